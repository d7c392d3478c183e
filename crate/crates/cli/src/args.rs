//! Argument structures and configuration resolution.
//!
//! Every option is declared `Option<_>` so precedence can be applied
//! uniformly: explicit flag, then `key=value` line from `--config`, then the
//! built-in default. Each resolved value is recorded and echoed in the
//! output header.

use crate::CliError;
use clap::{Args, Parser, Subcommand};
use nearcurve::counting::CountParams;
use nearcurve::curves::Curve;
use nearcurve::pathological::{self, DenseSetSpec, TruncatedSingular, WeightScheme};
use nearcurve::rat::{rat_parse, rat_to_f64, Rat};
use nearcurve::Interval;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "nearcurve",
    version,
    about = "Rational points near planar curves: counting, constants, lattice machinery"
)]
pub struct Cli {
    /// Plain key=value file supplying defaults for any long option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Count near-curve rational points N_f(Q, delta, J).
    Count(CountArgs),
    /// Count, then measure the union of rho-balls around the hit abscissas.
    Measure(MeasureArgs),
    /// Estimate the measure of the small-linear-forms set B_g and compare
    /// with its explicit bound.
    Bg(BgArgs),
    /// Empirical (C, alpha)-good test over random balls.
    Good(GoodArgs),
    /// Print the explicit constant bundles.
    Constants(ConstantsArgs),
    /// Smooth a curve by bump convolution and tabulate it.
    Mollify(MollifyArgs),
    /// Build the dense-jump curve and tabulate it.
    Pathological(PathologicalArgs),
    /// Run the lattice point-attachment pipeline over a grid.
    Attach(AttachArgs),
    /// Count, cross-check, and evaluate every bound verdict in one pass.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct CurveOpts {
    /// Curve expression in x, e.g. "x^2" or "x^3/3+x".
    #[arg(long = "f")]
    pub f: Option<String>,
    /// Dense-jump curve spec "x1:x2:N[:scheme]" (scheme: nsq | pow2).
    #[arg(long)]
    pub pathological: Option<PathologicalSpec>,
}

#[derive(Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub curve: CurveOpts,
    /// Window J as "lo:hi".
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<IntervalArg>,
    /// Denominator bound Q (at least 1).
    #[arg(long = "Q")]
    pub q: Option<f64>,
    /// Vertical window parameter delta (rational or decimal).
    #[arg(long)]
    pub delta: Option<String>,
    /// Lower cutoff factor c in [0, 1): only q > c*Q is counted.
    #[arg(long)]
    pub c: Option<f64>,
    /// Arithmetic mode: exact | float | auto.
    #[arg(long)]
    pub mode: Option<ModeArg>,
    /// Output format: csv | json.
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub count: CountArgs,
    /// Ball half-width rho.
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Args)]
pub struct BgArgs {
    #[command(flatten)]
    pub curve: CurveOpts,
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<IntervalArg>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Membership grid resolution.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Curvature window lower bound (sampled from |f''| when omitted).
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct GoodArgs {
    #[command(flatten)]
    pub curve: CurveOpts,
    /// Interval to probe, as "lo:hi".
    #[arg(long = "J", alias = "I", allow_hyphen_values = true)]
    pub j: Option<IntervalArg>,
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub balls: Option<usize>,
    /// Comma-separated epsilon values in (0, 1).
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long = "measure-grid")]
    pub measure_grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Ambient sup of |x| for the lemma constants (defaults to max |J|).
    #[arg(long = "L", allow_hyphen_values = true)]
    pub l: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<IntervalArg>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct MollifyArgs {
    #[command(flatten)]
    pub curve: CurveOpts,
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<IntervalArg>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "quad-nodes")]
    pub quad_nodes: Option<usize>,
    /// Number of grid panels tabulated over J.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct PathologicalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x2: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Weight scheme: nsq (n^-2) | pow2 (2^-n).
    #[arg(long)]
    pub scheme: Option<String>,
    /// What to tabulate: grid | breakpoints.
    #[arg(long)]
    pub dump: Option<String>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct AttachArgs {
    #[command(flatten)]
    pub curve: CurveOpts,
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<IntervalArg>,
    #[arg(long = "Q")]
    pub q: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Constants mode: "paper" or "relaxed:c0=<value>".
    #[arg(long)]
    pub constants: Option<ConstantsModeArg>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Number of grid panels over the three-quarters window.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub count: CountArgs,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Ball half-width for the covering measure (defaults to the relaxed
    /// localization radius C1*/(delta Q^2)).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Relaxed pipeline constant for the default rho.
    #[arg(long = "c0-star")]
    pub c0_star: Option<f64>,
}

// ---------------------------------------------------------------------------
// Parsed flag value types
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct IntervalArg(pub Interval);

impl FromStr for IntervalArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lo '{lo}': {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad hi '{hi}': {e}"))?;
        Interval::new(lo, hi)
            .map(IntervalArg)
            .map_err(|e| e.to_string())
    }
}

impl Display for IntervalArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.0.lo(), self.0.hi())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Exact,
    Float,
    Auto,
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(ModeArg::Exact),
            "float" => Ok(ModeArg::Float),
            "auto" => Ok(ModeArg::Auto),
            other => Err(format!("mode must be exact|float|auto, got '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Json,
}

impl FromStr for FormatArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(FormatArg::Csv),
            "json" => Ok(FormatArg::Json),
            other => Err(format!("format must be csv|json, got '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PathologicalSpec {
    pub x1: f64,
    pub x2: f64,
    pub n: usize,
    pub scheme: WeightScheme,
}

pub fn scheme_from_str(s: &str) -> Result<WeightScheme, String> {
    match s {
        "nsq" => Ok(WeightScheme::InverseSquare),
        "pow2" => Ok(WeightScheme::PowerOfTwo),
        other => Err(format!("scheme must be nsq|pow2, got '{other}'")),
    }
}

pub fn scheme_name(s: WeightScheme) -> &'static str {
    match s {
        WeightScheme::InverseSquare => "nsq",
        WeightScheme::PowerOfTwo => "pow2",
    }
}

impl FromStr for PathologicalSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(format!("expected x1:x2:N[:scheme], got '{s}'"));
        }
        let x1: f64 = parts[0].parse().map_err(|e| format!("bad x1: {e}"))?;
        let x2: f64 = parts[1].parse().map_err(|e| format!("bad x2: {e}"))?;
        let n: usize = parts[2].parse().map_err(|e| format!("bad N: {e}"))?;
        let scheme = if parts.len() == 4 {
            scheme_from_str(parts[3])?
        } else {
            WeightScheme::InverseSquare
        };
        Ok(PathologicalSpec { x1, x2, n, scheme })
    }
}

#[derive(Clone, Copy, Debug)]
pub enum ConstantsModeArg {
    Paper,
    Relaxed { c0: f64 },
}

impl FromStr for ConstantsModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "paper" {
            return Ok(ConstantsModeArg::Paper);
        }
        if let Some(body) = s.strip_prefix("relaxed:") {
            for kv in body.split(',') {
                if let Some(v) = kv.strip_prefix("c0=") {
                    let c0: f64 = v.parse().map_err(|e| format!("bad c0: {e}"))?;
                    if !(c0 > 0.0 && c0.is_finite()) {
                        return Err(format!("c0 must be positive, got {c0}"));
                    }
                    return Ok(ConstantsModeArg::Relaxed { c0 });
                }
            }
            return Err("relaxed mode needs c0=<value>".into());
        }
        Err(format!("constants must be paper|relaxed:c0=..., got '{s}'"))
    }
}

// ---------------------------------------------------------------------------
// Resolution: flag > config file > default, with an echo of every value
// ---------------------------------------------------------------------------

pub struct Ctx {
    file: BTreeMap<String, String>,
    pub resolved: BTreeMap<String, String>,
}

impl Ctx {
    pub fn new(cli: &Cli) -> Result<Ctx, CliError> {
        let mut file = BTreeMap::new();
        if let Some(path) = &cli.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    CliError::Validation(format!(
                        "config line {} is not key=value: '{line}'",
                        lineno + 1
                    ))
                })?;
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Ctx {
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn file_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Validation(format!("config key '{key}' = '{raw}': {e}"))
            }),
        }
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn get<T: FromStr + Display>(
        &mut self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn get_req<T: FromStr + Display>(
        &mut self,
        flag: Option<T>,
        key: &str,
    ) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        let v = v.ok_or_else(|| {
            CliError::Validation(format!("missing required option --{key} (or config key)"))
        })?;
        self.record(key, &v);
        Ok(v)
    }

    pub fn get_opt<T: FromStr + Display>(
        &mut self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }
}

/// Build the curve from `--f` or `--pathological` (exactly one), using `j`
/// as the domain for expression curves.
pub fn resolve_curve(ctx: &mut Ctx, opts: &CurveOpts, j: Interval) -> Result<Curve, CliError> {
    let expr = ctx.get_opt(opts.f.clone(), "f")?;
    let path = ctx.get_opt_pathological(opts.pathological)?;
    match (expr, path) {
        (Some(src), None) => Curve::parse(&src, j)
            .map_err(|e| CliError::Validation(format!("--f '{src}': {e}"))),
        (None, Some(spec)) => {
            let dense = DenseSetSpec::new(spec.x1, spec.x2, spec.scheme)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let ts = TruncatedSingular::new(dense, spec.n)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let curve = pathological::curve(&ts);
            if !curve.domain().contains_interval(&j) {
                return Err(CliError::Validation(format!(
                    "J = [{}, {}] is outside the curve domain [{}, {}]",
                    j.lo(),
                    j.hi(),
                    spec.x1,
                    spec.x2
                )));
            }
            Ok(curve)
        }
        (Some(_), Some(_)) => Err(CliError::Validation(
            "give exactly one of --f and --pathological, not both".into(),
        )),
        (None, None) => Err(CliError::Validation(
            "a curve is required: --f <expr> or --pathological <x1:x2:N[:scheme]>".into(),
        )),
    }
}

impl Ctx {
    fn get_opt_pathological(
        &mut self,
        flag: Option<PathologicalSpec>,
    ) -> Result<Option<PathologicalSpec>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get("pathological") {
                None => None,
                Some(raw) => Some(raw.parse::<PathologicalSpec>().map_err(|e| {
                    CliError::Validation(format!("config key 'pathological': {e}"))
                })?),
            },
        };
        if let Some(s) = &v {
            self.record(
                "pathological",
                format!("{}:{}:{}:{}", s.x1, s.x2, s.n, scheme_name(s.scheme)),
            );
        }
        Ok(v)
    }
}

/// Resolve counting parameters (mode auto picks exact when the curve
/// supports it and delta parses as a rational).
pub fn resolve_count_params(
    ctx: &mut Ctx,
    args: &CountArgs,
    curve: &Curve,
    j: Interval,
) -> Result<CountParams, CliError> {
    let q = ctx.get_req(args.q, "Q")?;
    let delta_raw: String = ctx.get_req(args.delta.clone(), "delta")?;
    let delta_rat: Option<Rat> = rat_parse(&delta_raw);
    let c = ctx.get(args.c, "c", 0.0)?;
    let mode = ctx.get(args.mode, "mode", ModeArg::Auto)?;
    let use_exact = match mode {
        ModeArg::Exact => {
            if !curve.has_rational_eval() {
                return Err(CliError::Validation(
                    "exact mode needs a curve with exact rational evaluation".into(),
                ));
            }
            true
        }
        ModeArg::Float => false,
        ModeArg::Auto => curve.has_rational_eval() && delta_rat.is_some(),
    };
    ctx.record("mode-resolved", if use_exact { "exact" } else { "float" });
    let params = if use_exact {
        let delta = delta_rat.ok_or_else(|| {
            CliError::Validation(format!("delta '{delta_raw}' is not a rational"))
        })?;
        CountParams::exact(q, delta, c, j)
    } else {
        let delta: f64 = match &delta_rat {
            Some(r) => rat_to_f64(r),
            None => delta_raw
                .parse()
                .map_err(|e| CliError::Validation(format!("delta '{delta_raw}': {e}")))?,
        };
        CountParams::float(q, delta, c, j)
    };
    params.map_err(|e| CliError::Validation(e.to_string()))
}

impl std::fmt::Display for ModeArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeArg::Exact => "exact",
            ModeArg::Float => "float",
            ModeArg::Auto => "auto",
        })
    }
}

impl std::fmt::Display for FormatArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        })
    }
}

impl std::fmt::Display for ConstantsModeArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstantsModeArg::Paper => f.write_str("paper"),
            ConstantsModeArg::Relaxed { c0 } => write!(f, "relaxed:c0={c0}"),
        }
    }
}

impl std::fmt::Display for PathologicalSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}",
            self.x1,
            self.x2,
            self.n,
            scheme_name(self.scheme)
        )
    }
}

/// Required interval flag with config fallback.
pub fn resolve_interval(
    ctx: &mut Ctx,
    flag: Option<IntervalArg>,
    key: &str,
) -> Result<Interval, CliError> {
    let arg = ctx.get_req(flag, key)?;
    Ok(arg.0)
}

/// Sample the curvature window `(min |f''|, max |f''|)` over the interval.
pub fn sampled_class_bounds(curve: &Curve, j: Interval) -> Result<(f64, f64), CliError> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for x in j.grid(512) {
        let v = curve.d2(x).abs();
        if !v.is_finite() {
            return Err(CliError::Validation(format!(
                "|f''| is not finite at x = {x}; pass --c1/--c2 explicitly"
            )));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 {
        return Err(CliError::Validation(
            "sampled |f''| touches zero; pass --c1/--c2 explicitly".into(),
        ));
    }
    Ok((lo, hi))
}

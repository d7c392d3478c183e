//! Subcommand implementations.

use crate::args::*;
use crate::emit::{self, num};
use crate::CliError;
use nearcurve::bounds::{
    fit_shape_constant, thm1_check, thm9_verdict, BoundShape, KMConstants, PaperConstants,
};
use nearcurve::counting::{
    brute_force_oracle, closure_margin, count_n, delta_union, enumerate_r, CountError,
};
use nearcurve::goodness::{good_test, GoodnessProbe};
use nearcurve::lattice::{
    attach_grid, bg_measure_estimate, AttachConstants, AttachOutcome, AttachStage, GMap,
    KMParams, LatticeError,
};
use nearcurve::mollify::{extend_constant, mollify as mollify_op, MollifySpec};
use nearcurve::pathological::{DenseSetSpec, TruncatedSingular};
use serde_json::json;

fn count_error(e: CountError) -> CliError {
    match e {
        CountError::OracleGuard(..) | CountError::Overflow => CliError::Guard(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn lattice_error(e: LatticeError) -> CliError {
    match e {
        LatticeError::SearchTooWide(..) => CliError::Guard(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn count(cli: &Cli, args: &CountArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let j = resolve_interval(&mut ctx, args.j, "J")?;
    let curve = resolve_curve(&mut ctx, &args.curve, j)?;
    let params = resolve_count_params(&mut ctx, args, &curve, j)?;
    let format = ctx.get(args.format, "format", FormatArg::Json)?;
    let report = count_n(&curve, &params).map_err(count_error)?;
    match format {
        FormatArg::Json => emit::json(
            &ctx.resolved,
            json!({
                "n": report.n,
                "boundary_hits": report.boundary_hits,
                "unique_p2_regime": report.unique_p2_regime,
                "params": to_value(&report.params),
            }),
        ),
        FormatArg::Csv => {
            let rows: Vec<String> = report
                .triples
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|t| {
                    format!(
                        "{},{},{},{},{}",
                        t.q,
                        t.p1,
                        t.p2,
                        num(t.x()),
                        num(t.y())
                    )
                })
                .collect();
            emit::csv(&ctx.resolved, "q,p1,p2,x,y", &rows);
        }
    }
    Ok(())
}

pub fn measure(cli: &Cli, args: &MeasureArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let j = resolve_interval(&mut ctx, args.count.j, "J")?;
    let curve = resolve_curve(&mut ctx, &args.count.curve, j)?;
    let params = resolve_count_params(&mut ctx, &args.count, &curve, j)?;
    let rho = ctx.get_req(args.rho, "rho")?;
    let format = ctx.get(args.count.format, "format", FormatArg::Json)?;
    let enumeration = enumerate_r(&curve, &params).map_err(count_error)?;
    let union = delta_union(&enumeration.triples, rho, j).map_err(count_error)?;
    match format {
        FormatArg::Json => emit::json(
            &ctx.resolved,
            json!({
                "n": enumeration.triples.len(),
                "boundary_hits": enumeration.boundary_hits,
                "measure": union.measure(),
                "parts": union.parts().len(),
                "coverage_fraction": union.measure() / j.length(),
            }),
        ),
        FormatArg::Csv => {
            let rows: Vec<String> = union
                .parts()
                .iter()
                .map(|p| format!("{},{}", num(p.lo()), num(p.hi())))
                .collect();
            emit::csv(&ctx.resolved, "lo,hi", &rows);
        }
    }
    Ok(())
}

pub fn bg(cli: &Cli, args: &BgArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let j = resolve_interval(&mut ctx, args.j, "J")?;
    let curve = resolve_curve(&mut ctx, &args.curve, j)?;
    let delta = ctx.get_req(args.delta, "delta")?;
    let k = ctx.get_req(args.k, "K")?;
    let t = ctx.get_req(args.t, "T")?;
    let grid = ctx.get(args.grid, "grid", 1000)?;
    let (c1_default, c2_default) = sampled_class_bounds(&curve, j)?;
    let c1 = ctx.get(args.c1, "c1", c1_default)?;
    let c2 = ctx.get(args.c2, "c2", c2_default)?;
    let format = ctx.get(args.format, "format", FormatArg::Csv)?;
    let g = GMap::new(&curve);
    let params = KMParams::new(delta, k, t, j).map_err(lattice_error)?;
    let est = bg_measure_estimate(&g, &params, grid).map_err(lattice_error)?;
    let kc = KMConstants::for_interval(c1, c2, j, delta, k, t)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let measured = est.fraction * j.length();
    let verdict = thm9_verdict(&kc, j, measured);
    match format {
        FormatArg::Csv => {
            let row = format!(
                "{},{},{},{},{},{},{:?}",
                num(est.fraction),
                num(measured),
                num(est.half_width),
                num(verdict.bound_value),
                num(kc.e),
                num(kc.rho),
                verdict.status
            );
            emit::csv(
                &ctx.resolved,
                "fraction,measured,half_width,bound,E,rho,status",
                &[row],
            );
        }
        FormatArg::Json => emit::json(
            &ctx.resolved,
            json!({
                "estimate": to_value(&est),
                "constants": to_value(&kc),
                "verdict": to_value(&verdict),
            }),
        ),
    }
    Ok(())
}

pub fn good(cli: &Cli, args: &GoodArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let j = resolve_interval(&mut ctx, args.j, "J")?;
    let curve = resolve_curve(&mut ctx, &args.curve, j)?;
    let c = ctx.get_req(args.c, "C")?;
    let alpha = ctx.get_req(args.alpha, "alpha")?;
    let balls = ctx.get(args.balls, "balls", 20)?;
    let eps_raw: String = ctx.get(args.eps.clone(), "eps", "0.5,0.1,0.01".to_string())?;
    let measure_grid = ctx.get(args.measure_grid, "measure-grid", 512)?;
    let seed = ctx.get(args.seed, "seed", 0u64)?;
    let format = ctx.get(args.format, "format", FormatArg::Csv)?;
    let eps_grid: Vec<f64> = eps_raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Validation(format!("eps '{s}': {e}")))
        })
        .collect::<Result<_, _>>()?;
    let probe = GoodnessProbe {
        c,
        alpha,
        ball_samples: balls,
        eps_grid,
        measure_grid,
        seed,
        tol: 1e-3,
    };
    let curve = curve.clone();
    let report = good_test(move |x| curve.eval(x), j, &probe)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    match format {
        FormatArg::Csv => {
            let rows: Vec<String> = report
                .details
                .iter()
                .map(|d| {
                    format!(
                        "{},{},{},{},{},{}",
                        num(d.ball.lo()),
                        num(d.ball.hi()),
                        num(d.eps),
                        num(d.sup),
                        num(d.measure),
                        num(d.ratio)
                    )
                })
                .collect();
            emit::csv(&ctx.resolved, "ball_lo,ball_hi,eps,sup,measure,ratio", &rows);
        }
        FormatArg::Json => emit::json(
            &ctx.resolved,
            json!({
                "max_ratio": report.max_ratio,
                "violations": report.violations,
                "skipped": report.skipped,
                "balls_tested": report.balls_tested,
                "worst_ball": to_value(&report.worst_ball),
                "worst_eps": report.worst_eps,
            }),
        ),
    }
    Ok(())
}

pub fn constants(cli: &Cli, args: &ConstantsArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let c1 = ctx.get_req(args.c1, "c1")?;
    let c2 = ctx.get_req(args.c2, "c2")?;
    let format = ctx.get(args.format, "format", FormatArg::Json)?;
    let pc = PaperConstants::new(c1, c2).map_err(|e| CliError::Validation(e.to_string()))?;
    let j = ctx.get_opt(args.j, "J")?.map(|a| a.0);
    let l = ctx.get_opt(args.l, "L")?.or(j.map(|j| j.max_abs()));
    let delta = ctx.get_opt(args.delta, "delta")?;
    let k = ctx.get_opt(args.k, "K")?;
    let t = ctx.get_opt(args.t, "T")?;
    let km = match (j, delta, k, t) {
        (Some(j), Some(delta), Some(k), Some(t)) => Some(
            KMConstants::new(c1, c2, l.unwrap_or(j.max_abs()), j, delta, k, t)
                .map_err(|e| CliError::Validation(e.to_string()))?,
        ),
        _ => None,
    };
    let mut body = serde_json::Map::new();
    body.insert("paper".into(), to_value(&pc));
    if let Some(l) = l {
        let m = (1.0 + 4.0 * l * l).sqrt();
        let c0 = 4.0 * c2 / c1;
        body.insert(
            "lemma".into(),
            json!({
                "M": m,
                "C0": c0,
                "C1_km": 2.0 * c0.max((32.0 * c0 * m).sqrt()),
                "C2_km": c0 * 32.0f64.sqrt(),
            }),
        );
    }
    if let Some(km) = &km {
        body.insert("km".into(), to_value(km));
    }
    match format {
        FormatArg::Json => emit::json(&ctx.resolved, serde_json::Value::Object(body)),
        FormatArg::Csv => {
            let mut rows = Vec::new();
            flatten_json("", &serde_json::Value::Object(body), &mut rows);
            emit::csv(&ctx.resolved, "name,value", &rows);
        }
    }
    Ok(())
}

fn flatten_json(prefix: &str, v: &serde_json::Value, rows: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_json(&key, v, rows);
            }
        }
        other => rows.push(format!("{prefix},{other}")),
    }
}

pub fn mollify(cli: &Cli, args: &MollifyArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let j = resolve_interval(&mut ctx, args.j, "J")?;
    let curve = resolve_curve(&mut ctx, &args.curve, j)?;
    let epsilon = ctx.get_req(args.epsilon, "epsilon")?;
    let quad_nodes = ctx.get(args.quad_nodes, "quad-nodes", 512)?;
    let grid = ctx.get(args.grid, "grid", 256)?;
    ctx.get(args.format, "format", FormatArg::Csv)?;
    let spec = MollifySpec {
        epsilon,
        quad_nodes,
        target_eta: None,
    };
    let fhat = extend_constant(&curve);
    let m = mollify_op(&fhat, &spec).map_err(|e| CliError::Validation(e.to_string()))?;
    let rows: Vec<String> = j
        .grid(grid)
        .map(|x| {
            format!(
                "{},{},{},{}",
                num(x),
                num(curve.eval(x)),
                num(m.curve.eval(x)),
                num(m.curve.d2(x))
            )
        })
        .collect();
    emit::csv(&ctx.resolved, "x,f,f_eps,f_eps_d2", &rows);
    Ok(())
}

pub fn pathological(cli: &Cli, args: &PathologicalArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let x1 = ctx.get(args.x1, "x1", 0.0)?;
    let x2 = ctx.get(args.x2, "x2", 1.0)?;
    let n = ctx.get_req(args.n, "N")?;
    let scheme_raw: String = ctx.get(args.scheme.clone(), "scheme", "nsq".to_string())?;
    let scheme = scheme_from_str(&scheme_raw).map_err(CliError::Validation)?;
    let dump: String = ctx.get(args.dump.clone(), "dump", "grid".to_string())?;
    let grid = ctx.get(args.grid, "grid", 256)?;
    ctx.get(args.format, "format", FormatArg::Csv)?;
    let spec =
        DenseSetSpec::new(x1, x2, scheme).map_err(|e| CliError::Validation(e.to_string()))?;
    let ts = TruncatedSingular::new(spec, n).map_err(|e| CliError::Validation(e.to_string()))?;
    ctx.record("T_N", num(ts.t_total()));
    ctx.record("tail", num(ts.tail()));
    match dump.as_str() {
        "grid" => {
            let rows: Vec<String> = ts
                .domain()
                .grid(grid)
                .map(|x| {
                    let (t, terr) = ts.t_eval(x);
                    let (v, verr) = ts.v_eval(x);
                    let (f, ferr) = ts.f_eval(x);
                    format!(
                        "{},{},{},{},{},{},{}",
                        num(x),
                        num(t),
                        num(terr),
                        num(v),
                        num(verr),
                        num(f),
                        num(ferr)
                    )
                })
                .collect();
            emit::csv(&ctx.resolved, "x,t,t_err,v,v_err,f,f_err", &rows);
        }
        "breakpoints" => {
            let rows: Vec<String> = ts
                .breakpoints()
                .iter()
                .map(|b| format!("{},{},{}", b.index, num(b.position_f64), num(b.weight_f64)))
                .collect();
            emit::csv(&ctx.resolved, "index,position,weight", &rows);
        }
        other => {
            return Err(CliError::Validation(format!(
                "dump must be grid|breakpoints, got '{other}'"
            )))
        }
    }
    Ok(())
}

pub fn attach(cli: &Cli, args: &AttachArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let j = resolve_interval(&mut ctx, args.j, "J")?;
    let curve = resolve_curve(&mut ctx, &args.curve, j)?;
    let q = ctx.get_req(args.q, "Q")?;
    let delta = ctx.get_req(args.delta, "delta")?;
    let mode = ctx.get(args.constants, "constants", ConstantsModeArg::Paper)?;
    let (c1_default, c2_default) = sampled_class_bounds(&curve, j)?;
    let c1 = ctx.get(args.c1, "c1", c1_default)?;
    let c2 = ctx.get(args.c2, "c2", c2_default)?;
    let grid = ctx.get(args.grid, "grid", 200)?;
    let format = ctx.get(args.format, "format", FormatArg::Csv)?;
    let consts = match mode {
        ConstantsModeArg::Paper => {
            AttachConstants::paper(c1, c2).map_err(|e| CliError::Validation(e.to_string()))?
        }
        ConstantsModeArg::Relaxed { c0 } => AttachConstants::relaxed(c0, c1, c2),
    };
    let report = attach_grid(&curve, q, delta, &consts, grid).map_err(lattice_error)?;
    match format {
        FormatArg::Csv => {
            let rows: Vec<String> = report
                .outcomes
                .iter()
                .map(|(x, out)| match out {
                    AttachOutcome::Attached { triple, x_dist, dist } => format!(
                        "{},attached,{},{},{},{},{}",
                        num(*x),
                        triple.q,
                        triple.p1,
                        triple.p2,
                        num(*dist),
                        num(*x_dist)
                    ),
                    AttachOutcome::Failed { stage } => {
                        let tag = match stage {
                            AttachStage::NoLatticePoint => "no-lattice-point".to_string(),
                            AttachStage::SmallQ { q } => format!("small-q:{q}"),
                            AttachStage::OutsideWindow { x_rat } => {
                                format!("outside-window:{}", num(*x_rat))
                            }
                            AttachStage::FinalInequality { dist, .. } => {
                                format!("final-inequality:{}", num(*dist))
                            }
                            AttachStage::SearchGuard { width } => {
                                format!("search-guard:{}", num(*width))
                            }
                        };
                        format!("{},{tag},,,,,", num(*x))
                    }
                })
                .collect();
            emit::csv(&ctx.resolved, "x,outcome,q,p1,p2,dist,x_dist", &rows);
        }
        FormatArg::Json => emit::json(
            &ctx.resolved,
            json!({
                "success_fraction": report.success_fraction,
                "points": report.outcomes.len(),
                "outcomes": to_value(&report.outcomes),
            }),
        ),
    }
    Ok(())
}

pub fn verify(cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    let mut ctx = Ctx::new(cli)?;
    let j = resolve_interval(&mut ctx, args.count.j, "J")?;
    let curve = resolve_curve(&mut ctx, &args.count.curve, j)?;
    let params = resolve_count_params(&mut ctx, &args.count, &curve, j)?;
    let (c1_default, c2_default) = sampled_class_bounds(&curve, j)?;
    let c1 = ctx.get(args.c1, "c1", c1_default)?;
    let c2 = ctx.get(args.c2, "c2", c2_default)?;
    let c0_star = ctx.get(args.c0_star, "c0-star", 0.1)?;
    let relaxed = AttachConstants::relaxed(c0_star, c1, c2);
    let rho_default = relaxed.big_c1() / (params.delta * params.q_max * params.q_max);
    let rho = ctx.get(args.rho, "rho", rho_default)?;

    let report = count_n(&curve, &params).map_err(count_error)?;
    let enumeration = enumerate_r(&curve, &params).map_err(count_error)?;

    // independent oracle on desk-sized instances only
    let oracle = if params.q_max <= 200.0 {
        let slow = brute_force_oracle(&curve, &params).map_err(count_error)?;
        let fast = {
            let mut all = params.clone();
            all.c = 0.0;
            enumerate_r(&curve, &all).map_err(count_error)?.triples
        };
        json!({ "ran": true, "matches": slow == fast, "oracle_n": slow.len() })
    } else {
        json!({ "ran": false, "note": "skipped: Q above the oracle comfort bound of 200" })
    };

    let pc = PaperConstants::new(c1, c2).map_err(|e| CliError::Validation(e.to_string()))?;
    let thm1 = thm1_check(params.q_max, params.delta, j, &pc);

    let n = report.n as f64;
    let point = [(params.q_max, params.delta, n)];
    let huxley = BoundShape::Huxley {
        c_class: c2.max(1.0 / c1),
        eps: 0.1,
    };
    let shapes = json!({
        "vv1_value": nearcurve::bounds::shape_value(&BoundShape::Vv1, params.q_max, params.delta),
        "bdvv_value": nearcurve::bounds::shape_value(&BoundShape::Bdvv, params.q_max, params.delta),
        "huxley_value_eps_0.1": nearcurve::bounds::shape_value(&huxley, params.q_max, params.delta),
        "vv1_implied_constant": fit_shape_constant(&BoundShape::Vv1, &point).constant,
        "bdvv_implied_constant": fit_shape_constant(&BoundShape::Bdvv, &point).constant,
    });

    let union = delta_union(&enumeration.triples, rho, j).map_err(count_error)?;
    let coverage = union.measure() / j.length();
    // the enlarged set behind the margin is cubic in Q; desk scale only
    let margin = if params.q_max <= 100.0 {
        let m = closure_margin(&curve, &params).map_err(count_error)?;
        json!({ "ran": true, "eps_star": m.eps_star, "r_star_size": m.r_star_size })
    } else {
        json!({ "ran": false, "note": "skipped: Q above the closure-margin comfort bound of 100" })
    };

    emit::json(
        &ctx.resolved,
        json!({
            "count": {
                "n": report.n,
                "boundary_hits": report.boundary_hits,
                "unique_p2_regime": report.unique_p2_regime,
            },
            "oracle": oracle,
            "thm1": to_value(&thm1),
            "shapes": shapes,
            "covering": {
                "rho": rho,
                "measure": union.measure(),
                "coverage_fraction": coverage,
                "half_covered": coverage >= 0.5,
            },
            "closure_margin": margin,
        }),
    );
    Ok(())
}

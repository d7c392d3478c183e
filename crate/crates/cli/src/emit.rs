//! Output emitters. CSV: `# key=value` header lines (sorted), one header
//! row, then data rows; comma separator, `.` decimal point, no locale or
//! timestamp dependence, so fixed config + seed gives byte-identical output.
//! JSON: a single object with the resolved `config` plus the result fields.

use serde_json::{Map, Value};
use std::collections::BTreeMap;

pub fn csv(config: &BTreeMap<String, String>, header: &str, rows: &[String]) {
    let mut out = String::new();
    for (k, v) in config {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    print!("{out}");
}

pub fn json(config: &BTreeMap<String, String>, body: Value) {
    let mut root = Map::new();
    root.insert(
        "config".to_string(),
        Value::Object(
            config
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect(),
        ),
    );
    if let Value::Object(fields) = body {
        for (k, v) in fields {
            root.insert(k, v);
        }
    } else {
        root.insert("result".to_string(), body);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&Value::Object(root)).expect("serializable")
    );
}

/// Shortest-round-trip float formatting (Rust default: '.' decimal point).
pub fn num(x: f64) -> String {
    format!("{x}")
}

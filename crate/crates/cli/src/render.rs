//! Number formatting and report writers.

use std::io::Write;

use orgbottleneck::{InfoCurvePoint, ProfileRow};
use serde::Serialize;
use serde_json::Value;

pub const PROFILE_HEADER: [&str; 7] = [
    "layer_index",
    "layer_name",
    "beta_effective",
    "i_x_l_bits",
    "i_y_l_bits",
    "h_l_bits",
    "converged",
];

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

pub fn fmt12(v: f64) -> String {
    let r = round12(v);
    if r == 0.0 {
        "0".into()
    } else if !r.is_finite() || (1e-6..1e15).contains(&r.abs()) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn profile_csv(rows: &[ProfileRow<f64>]) -> Vec<u8> {
    let mut w = writer(Vec::new());
    w.write_record(PROFILE_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.layer_index.to_string(),
            r.layer_name.clone(),
            fmt12(r.beta_effective),
            fmt12(r.i_x_l_bits),
            fmt12(r.i_y_l_bits),
            fmt12(r.h_l_bits),
            r.converged.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn curve_csv(points: &[InfoCurvePoint<f64>]) -> Vec<u8> {
    let mut w = writer(Vec::new());
    w.write_record(["beta", "i_x_xhat_bits", "i_y_xhat_bits"])
        .expect("in-memory write");
    for p in points {
        w.write_record([fmt12(p.beta), fmt12(p.i_x_xhat), fmt12(p.i_y_xhat)])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round12(n.as_f64().expect("f64 number"));
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn json<S: Serialize>(value: &S) -> Vec<u8> {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_value(&mut v);
    let mut out = serde_json::to_vec_pretty(&v).expect("value serializes");
    out.push(b'\n');
    out
}

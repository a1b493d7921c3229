//! Deterministic report serialization.
//!
//! Reports are JSON documents with a stable schema version; identical
//! configs and inputs must produce byte-identical files. serde_json's
//! default map is ordered and the custom writer below pins float
//! formatting to 17 significant digits, so nothing in the output depends
//! on hash ordering or platform-specific shortest-float rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Format a float with 17 significant digits (scientific).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // normalize -0.0 for byte stability
        return String::from("0.0e0");
    }
    format!("{x:.16e}")
}

/// Reconstruct a small exact rational p/q from a float via continued
/// fractions; used to surface exact values (the worked example's 616/85
/// and friends) alongside their float forms.
pub fn rationalize(x: f64, max_den: u64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1u64, 1i64, 0u64);
    for _ in 0..40 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i64;
        let p2 = ai.checked_mul(p1)?.checked_add(p0)?;
        let q2 = (ai as u64).checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a;
        let approx = p1 as f64 / q1 as f64;
        if (approx - x.abs()).abs() <= 1e-12 * x.abs().max(1.0) {
            let p = if negative { -p1 } else { p1 };
            // require a genuinely close reconstruction
            if (p as f64 / q1 as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) {
                return Some((p, q1));
            }
            return None;
        }
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

/// "p/q" string for floats that reconstruct to a small rational.
pub fn rational_string(x: f64) -> Option<String> {
    rationalize(x, 10_000).map(|(p, q)| format!("{p}/{q}"))
}

/// Map of integer-indexed weights into a JSON object with string keys and
/// deterministic ordering.
pub fn weight_map(weights: &BTreeMap<i64, f64>) -> Value {
    let mut obj = serde_json::Map::new();
    for (k, v) in weights {
        obj.insert(k.to_string(), Value::from(*v));
    }
    Value::Object(obj)
}

/// Companion map of exact rational strings, for entries that reconstruct.
pub fn weight_rationals(weights: &BTreeMap<i64, f64>) -> Value {
    let mut obj = serde_json::Map::new();
    for (k, v) in weights {
        if let Some(r) = rational_string(*v) {
            obj.insert(k.to_string(), Value::String(r));
        }
    }
    Value::Object(obj)
}

/// Render a JSON value deterministically (sorted keys come from
/// serde_json's ordered map; floats use [`fmt_f64`]).
pub fn render(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out, 0);
    out.push('\n');
    out
}

fn write_value(value: &Value, out: &mut String, indent: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if x.is_finite() {
                    out.push_str(&fmt_f64(x));
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => {
            let _ = write!(out, "{}", Value::String(s.clone()));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                pad(out, indent + 2);
                write_value(item, out, indent + 2);
            }
            out.push('\n');
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                pad(out, indent + 2);
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_value(item, out, indent + 2);
            }
            out.push('\n');
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push(' ');
    }
}

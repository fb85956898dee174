//! Deterministic JSON output: sorted keys, floats with 17 significant digits.

use std::fmt::Write;

use conewright::Cplx;
use serde_json::Value;

pub fn to_string(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

pub fn float(x: f64) -> String {
    if x == 0.0 {
        format!("{:.16e}", 0.0)
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

pub fn complex(z: Cplx<f64>) -> Value {
    serde_json::json!([z.re, z.im])
}

fn indent(s: &mut String, depth: usize) {
    for _ in 0..depth {
        s.push_str("  ");
    }
}

fn write_value(s: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => s.push_str("null"),
        Value::Bool(b) => s.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => write!(s, "{i}").unwrap(),
            (_, Some(u)) => write!(s, "{u}").unwrap(),
            _ => s.push_str(&float(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(t) => s.push_str(&Value::String(t.clone()).to_string()),
        Value::Array(a) if a.is_empty() => s.push_str("[]"),
        Value::Array(a) if a.iter().all(|x| x.is_number()) => {
            s.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_value(s, x, depth);
            }
            s.push(']');
        }
        Value::Array(a) => {
            s.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                indent(s, depth + 1);
                write_value(s, x, depth + 1);
                s.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            indent(s, depth);
            s.push(']');
        }
        Value::Object(m) if m.is_empty() => s.push_str("{}"),
        Value::Object(m) => {
            s.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                indent(s, depth + 1);
                write!(s, "{}: ", Value::String(k.clone())).unwrap();
                write_value(s, x, depth + 1);
                s.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            indent(s, depth);
            s.push('}');
        }
    }
}

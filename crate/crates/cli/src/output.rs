//! Number formatting shared by the JSON and CSV writers.

use cancelput_core::{Contract, ModelParams};
use serde_json::{json, Value};

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// JSON number with 12 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else {
        Value::Null
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// CSV cell with 12 significant digits, shortest round-trip form.
pub fn cell(x: f64) -> String {
    format!("{}", round12(x))
}

/// Inputs and derived model quantities. Every key is always present.
pub fn params_echo(m: &ModelParams, c: &Contract, spot: Option<f64>) -> Value {
    json!({
        "r": num(m.r()),
        "sigma2": num(m.sigma2()),
        "lambda": num(m.lambda()),
        "rho": if m.has_jumps() { num(m.rho()) } else { Value::Null },
        "strike": num(c.strike()),
        "barrier": num(c.barrier()),
        "spot": opt_num(spot),
        "mu": num(m.mu()),
        "alpha": num(m.alpha()),
    })
}

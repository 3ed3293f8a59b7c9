//! Axis values: `v`, `v1,v2,...`, `lo:hi:n` (linear) or `log:lo:hi:n`.

use airy_fredholm::sweep::{linear_range, log_range};
use anyhow::Result;

use crate::config::usage;

fn number(name: &str, s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| usage(format!("--{name}: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(usage(format!("--{name}: `{s}` is not finite")));
    }
    Ok(v)
}

fn count(name: &str, s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| usage(format!("--{name}: `{s}` is not a point count")))
}

pub fn parse_axis(name: &str, spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(|v| number(name, v)).collect::<Result<Vec<f64>>>()?,
        [lo, hi, n] => linear_range(number(name, lo)?, number(name, hi)?, count(name, n)?)
            .map_err(|e| usage(format!("--{name}: {e}")))?,
        ["log", lo, hi, n] => log_range(number(name, lo)?, number(name, hi)?, count(name, n)?)
            .map_err(|e| usage(format!("--{name}: {e}")))?,
        _ => return Err(usage(format!("--{name}: expected v, v1,v2,..., lo:hi:n or log:lo:hi:n, got `{spec}`"))),
    };
    if values.is_empty() {
        return Err(usage(format!("--{name} is empty")));
    }
    Ok(values)
}

/// A single value; lists and ranges are rejected.
pub fn parse_scalar(name: &str, spec: &str) -> Result<f64> {
    match parse_axis(name, spec)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(usage(format!("--{name} takes a single value here, got `{spec}`"))),
    }
}

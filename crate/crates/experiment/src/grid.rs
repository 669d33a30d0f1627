//! Sweep grids: `linspace(a, b, n)`, `logspace(a, b, n)` with endpoint
//! values (not exponents), or a comma-separated list of expressions.

use crate::error::{ExperimentError, Result};
use crate::expr;

pub const MAX_POINTS: usize = 10_000;

pub fn parse_grid(src: &str) -> Result<Vec<f64>> {
    let s = src.trim();
    let call = |name: &str| {
        s.strip_prefix(name).map(str::trim_start).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')'))
    };
    if let Some(args) = call("linspace") {
        let (a, b, n) = three_args(args)?;
        return Ok(linspace(a, b, n));
    }
    if let Some(args) = call("logspace") {
        let (a, b, n) = three_args(args)?;
        if !(a > 0.0 && b > 0.0) {
            return Err(ExperimentError::config(format!("logspace endpoints must be positive in `{s}`")));
        }
        return Ok(linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect());
    }
    let values = s.split(',').map(expr::eval).collect::<Result<Vec<_>>>()?;
    if values.len() > MAX_POINTS {
        return Err(ExperimentError::config(format!("grid has more than {MAX_POINTS} points")));
    }
    Ok(values)
}

fn three_args(args: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = args.split(',').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(ExperimentError::config(format!("expected (start, end, count), got `({args})`")));
    };
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| ExperimentError::config(format!("grid count `{}` is not a positive integer", n.trim())))?;
    if n == 0 || n > MAX_POINTS {
        return Err(ExperimentError::config(format!("grid count must be in 1..={MAX_POINTS}, got {n}")));
    }
    Ok((expr::eval(a)?, expr::eval(b)?, n))
}

/// `n` evenly spaced points with both endpoints hit exactly.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { b } else { a + step * k as f64 }).collect()
}

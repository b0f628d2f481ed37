//! Composite Simpson quadrature and small grid helpers.

use crate::error::{Result, SimError};

/// Composite Simpson rule over `nodes` points (odd, >= 3), propagating
/// integrand errors.
pub(crate) fn try_simpson<F>(f: F, a: f64, b: f64, nodes: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(SimError::InvalidParams(format!(
            "simpson rule needs an odd node count >= 3, got {nodes}"
        )));
    }
    let h = (b - a) / (nodes - 1) as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..nodes - 1 {
        let x = a + h * i as f64;
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(x)?;
    }
    Ok(sum * h / 3.0)
}

pub(crate) fn simpson<F>(f: F, a: f64, b: f64, nodes: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    try_simpson(|x| Ok(f(x)), a, b, nodes).expect("infallible integrand")
}

/// Simpson integration of uniformly spaced samples with step `h`.
/// An even sample count is handled with a trapezoid on the final interval.
pub(crate) fn simpson_samples(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(SimError::InsufficientPoints(format!(
            "sample integration needs >= 3 points, got {n}"
        )));
    }
    let (simpson_len, tail) = if n % 2 == 1 { (n, 0.0) } else {
        (n - 1, 0.5 * h * (values[n - 2] + values[n - 1]))
    };
    let mut sum = values[0] + values[simpson_len - 1];
    for (i, v) in values.iter().enumerate().take(simpson_len - 1).skip(1) {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * v;
    }
    Ok(sum * h / 3.0 + tail)
}

/// Uniform grid from `min` to `max` inclusive; the final point is exactly `max`.
pub(crate) fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "linspace needs at least two points");
    let step = (max - min) / (count - 1) as f64;
    (0..count)
        .map(|i| if i == count - 1 { max } else { min + step * i as f64 })
        .collect()
}

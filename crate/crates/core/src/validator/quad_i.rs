//! Direct quadrature evaluation of I_η(v) and λ_v from the integral
//! representation of the bounded solution, worked in the inner variable
//! s = y/η.

use super::quad::{integrate_pieces, integrate_with_magnitude, QuadConfig, QuadError};

/// s^{p+1} where the weight e^{−s^{p+1}} has dropped below 1e−300.
const WEIGHT_CUTOFF: f64 = 700.0;
/// Extra decay budget for the one-sided integrals.
const HALF_CUTOFF: f64 = 750.0;

/// Output of [`quad_i`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadIResult {
    pub lambda: f64,
    pub values: Vec<f64>,
}

fn symmetric_breaks(s_max: f64) -> Vec<f64> {
    let mut pos = vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];
    pos.retain(|&x| x < s_max);
    pos.push(s_max);
    let mut out: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    out.pop();
    out.extend(pos);
    out
}

/// ∫_{−∞}^{∞} f(s) e^{−s^{p+1}} ds.
pub fn weighted_integral<F: Fn(f64) -> f64>(f: F, p: u32, cfg: &QuadConfig) -> Result<f64, QuadError> {
    let q = p as i32 + 1;
    let s_max = WEIGHT_CUTOFF.powf(1.0 / q as f64);
    integrate_pieces(|s| f(s) * (-s.powi(q)).exp(), &symmetric_breaks(s_max), cfg)
}

/// λ_v = −∫ v(ηs) e^{−s^{p+1}} ds / (η^L ∫ s^L e^{−s^{p+1}} ds).
pub fn quad_lambda<F: Fn(f64) -> f64>(
    v: F,
    p: u32,
    l: u32,
    eta: f64,
    cfg: &QuadConfig,
) -> Result<f64, QuadError> {
    let num = weighted_integral(|s| v(eta * s), p, cfg)?;
    let den = weighted_integral(|s| s.powi(l as i32), p, cfg)?;
    Ok(-num / (eta.powi(l as i32) * den))
}

/// s^{p+1} − T^{p+1} for s >= T >= 0, factored to avoid cancellation.
fn exponent_gap(s: f64, t: f64, q: i32) -> f64 {
    let mut acc = 0.0;
    for j in 0..q {
        acc += s.powi(j) * t.powi(q - 1 - j);
    }
    (s - t) * acc
}

/// −η ∫_T^∞ g(s) e^{−(s^{p+1} − T^{p+1})} ds for T >= 0; `g` returns the
/// integrand and the size of its uncancelled parts.
fn half_line<G: Fn(f64) -> (f64, f64)>(g: G, big_t: f64, p: u32, eta: f64, cfg: &QuadConfig) -> Result<f64, QuadError> {
    let q = p as i32 + 1;
    let t_end = (big_t.powi(q) + HALF_CUTOFF).powf(1.0 / q as f64);
    let scale = (1.0 / (q as f64 * big_t.powi(q - 1).max(1e-300))).min(1.0);
    let mut breaks = vec![big_t];
    let mut step = scale * 0.25;
    while breaks.last().unwrap() + step < t_end {
        breaks.push(breaks.last().unwrap() + step);
        step *= 2.0;
    }
    breaks.push(t_end);
    let integral = integrate_with_magnitude(
        |s| {
            let w = (-exponent_gap(s, big_t, q)).exp();
            let (v, m) = g(s);
            (v * w, m * w)
        },
        &breaks,
        cfg,
    )?;
    Ok(-eta * integral)
}

/// I_η(v) at each t of `t_grid`, together with λ_v.
///
/// For t < 0 the value is assembled from the even and odd parts of v, using
/// that I_η maps even functions to odd ones and vice versa.
pub fn quad_i<F: Fn(f64) -> f64>(
    v: F,
    p: u32,
    l: u32,
    eta: f64,
    t_grid: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadIResult, QuadError> {
    let lambda = quad_lambda(&v, p, l, eta, cfg)?;
    let li = l as i32;
    let lam_term = move |s: f64| lambda * eta.powi(li) * s.powi(li);
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let big_t = t / eta;
        let value = if big_t >= 0.0 {
            let g = |s: f64| {
                let (a, b) = (v(eta * s), lam_term(s));
                (a + b, a.abs() + b.abs())
            };
            half_line(g, big_t, p, eta, cfg)?
        } else {
            let even = |s: f64| {
                let (a, b, c) = (v(eta * s), v(-eta * s), lam_term(s));
                (0.5 * (a + b) + c, 0.5 * (a.abs() + b.abs()) + c.abs())
            };
            let odd = |s: f64| {
                let (a, b) = (v(eta * s), v(-eta * s));
                (0.5 * (a - b), 0.5 * (a.abs() + b.abs()))
            };
            let a = -big_t;
            -half_line(even, a, p, eta, cfg)? + half_line(odd, a, p, eta, cfg)?
        };
        values.push(value);
    }
    Ok(QuadIResult { lambda, values })
}

/// max|a − b| / max|b|, or the plain max|a − b| when b vanishes.
pub fn sup_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

//! Adaptive 7/15-point Gauss–Kronrod quadrature.

use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("adaptive quadrature on [{a}, {b}] stopped at error {error:.3e} after {intervals} intervals")]
    QuadFail { a: f64, b: f64, error: f64, intervals: usize },
    #[error("integrand is not finite at {0}")]
    NonFinite(f64),
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget of [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Target error relative to ∫|f|.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    abs: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> (f64, f64)>(f: &mut F, a: f64, b: f64) -> Result<Piece, QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (fc, mc) = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(c));
    }
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * mc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let (f1, m1) = f(c - h * x);
        let (f2, m2) = f(c + h * x);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(QuadError::NonFinite(c + h * x));
        }
        kron += w * (f1 + f2);
        abs += w * (m1 + m2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Piece {
        a,
        b,
        value: kron * h,
        abs: abs * h.abs(),
        error: ((kron - gauss) * h).abs(),
    })
}

/// ∫_a^b f over the initial breakpoints `a = x_0 < … < x_m = b`, refined
/// adaptively until the summed error estimate meets the tolerance.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], cfg: &QuadConfig) -> Result<f64, QuadError> {
    integrate_with_magnitude(
        |x| {
            let v = f(x);
            (v, v.abs())
        },
        breaks,
        cfg,
    )
}

/// Like [`integrate_pieces`], but `f` returns (value, magnitude) and the
/// relative tolerance is measured against ∫ magnitude. Use it when the
/// integrand is a cancelling difference whose parts carry rounding noise.
pub fn integrate_with_magnitude<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64, QuadError> {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1])?);
        }
    }
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let abs: f64 = heap.iter().map(|p| p.abs).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= (cfg.rel_tol * abs).max(cfg.abs_tol) {
            return Ok(value);
        }
        if heap.len() >= cfg.max_intervals {
            return Err(QuadError::QuadFail {
                a: breaks[0],
                b: *breaks.last().unwrap(),
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted in floating point; accept its contribution
            return Ok(value);
        }
        heap.push(gk15(&mut f, worst.a, mid)?);
        heap.push(gk15(&mut f, mid, worst.b)?);
    }
}

/// ∫_a^b f.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64, QuadError> {
    integrate_pieces(f, &[a, b], cfg)
}

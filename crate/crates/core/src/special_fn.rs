//! Complete and scaled incomplete Gamma functions, and the even Gaussian-type
//! moments G(m) = ∫ T^m e^{-T^{p+1}} dT.

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::term_algebra::exact::{ExactConst, Rat};

/// Maximum iterations for the power series / continued fraction.
const MAX_ITER: usize = 500;

/// Below `U < m + SERIES_SHIFT` the power series is used, the continued
/// fraction above.
const SERIES_SHIFT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecialError {
    #[error("domain error: Γ argument {0} must be positive")]
    Domain(f64),
    #[error("domain error: incomplete Γ needs U >= 0, got {0}")]
    NegativeU(f64),
    #[error("incomplete Γ({m}; {u}) did not converge within {MAX_ITER} iterations")]
    NoConvergence { m: f64, u: f64 },
}

/// Positive rational argument of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaArg(Rat);

impl GammaArg {
    pub fn new(r: Rat) -> Result<Self, SpecialError> {
        if r <= Rat::zero() {
            return Err(SpecialError::Domain(r.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(GammaArg(r))
    }

    pub fn from_parts(num: i64, den: i64) -> Result<Self, SpecialError> {
        if den == 0 {
            return Err(SpecialError::Domain(f64::NAN));
        }
        Self::new(Ratio::new(num, den))
    }

    pub fn rational(&self) -> Rat {
        self.0
    }

    pub fn value(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Reduce into (0, 1] via Γ(r + 1) = r·Γ(r): returns the reduced
    /// argument and the rational factor with Γ(self) = factor·Γ(reduced).
    pub fn reduce(&self) -> (GammaArg, Rat) {
        let mut r = self.0;
        let mut factor = Rat::one();
        while r > Rat::one() {
            r -= Rat::one();
            factor *= r;
        }
        (GammaArg(r), factor)
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real x > 0 (Lanczos, g = 7, with reflection below 1/2).
pub fn gamma_f64(x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) {
        return Err(SpecialError::Domain(x));
    }
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return Ok(pi / ((pi * x).sin() * gamma_f64(1.0 - x)?));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc)
}

/// Γ(m) for a rational argument. The argument is reduced into (0, 1] first
/// so every call with the same reduced argument sees the same float.
pub fn gamma_complete(m: GammaArg) -> Result<f64, SpecialError> {
    let (reduced, factor) = m.reduce();
    let base = if reduced.0 == Rat::one() {
        1.0
    } else if reduced.0 == Ratio::new(1, 2) {
        std::f64::consts::PI.sqrt()
    } else {
        gamma_f64(reduced.value())?
    };
    Ok(factor.to_f64().unwrap_or(f64::NAN) * base)
}

/// Scaled upper incomplete Gamma: e^U ∫_U^∞ z^{m-1} e^{-z} dz.
pub fn gamma_incomplete_scaled(m: f64, u: f64) -> Result<f64, SpecialError> {
    if !(m > 0.0) {
        return Err(SpecialError::Domain(m));
    }
    if !(u >= 0.0) {
        return Err(SpecialError::NegativeU(u));
    }
    if u == 0.0 {
        return gamma_f64(m);
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    if u < m + SERIES_SHIFT {
        // γ(m, U) = e^{-U} U^m Σ U^n / (m (m+1) … (m+n))
        let mut term = 1.0 / m;
        let mut sum = term;
        let mut ap = m;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= u / ap;
            sum += term;
            if term.abs() < sum.abs() * f64::EPSILON {
                return Ok(u.exp() * gamma_f64(m)? - u.powf(m) * sum);
            }
        }
        Err(SpecialError::NoConvergence { m, u })
    } else {
        // Modified Lentz for 1/(U + 1 - m - 1(1-m)/(U + 3 - m - …)).
        let tiny = 1e-300;
        let b0 = u + 1.0 - m;
        let mut f = if b0.abs() < tiny { tiny } else { b0 };
        let mut c = f;
        let mut d = 0.0;
        for n in 1..=MAX_ITER {
            let nf = n as f64;
            let an = nf * (m - nf);
            let bn = u + 2.0 * nf + 1.0 - m;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            d = 1.0 / d;
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                return Ok(u.powf(m) / f);
            }
        }
        Err(SpecialError::NoConvergence { m, u })
    }
}

/// Typed variant of [`gamma_incomplete_scaled`].
pub fn gamma_incomplete_scaled_arg(m: GammaArg, u: f64) -> Result<f64, SpecialError> {
    gamma_incomplete_scaled(m.value(), u)
}

/// G(m) = ∫_{-∞}^{∞} T^m e^{-T^{p+1}} dT in exact form:
/// zero for odd m, (2/(p+1))·Γ((m+1)/(p+1)) for even m.
pub fn even_moment(p: u32, m: u32) -> ExactConst {
    if m % 2 == 1 {
        return ExactConst::zero();
    }
    let q = (p + 1) as i64;
    ExactConst::gamma(Ratio::new(m as i64 + 1, q)).scale(&num_rational::BigRational::new(
        2.into(),
        q.into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arg(n: i64, d: i64) -> GammaArg {
        GammaArg::from_parts(n, d).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn complete_gamma_values() {
        assert_eq!(gamma_complete(arg(1, 1)).unwrap(), 1.0);
        assert!(rel(gamma_complete(arg(1, 2)).unwrap(), std::f64::consts::PI.sqrt()) < 1e-15);
        let q = gamma_complete(arg(1, 4)).unwrap();
        assert!(rel(q, 3.625_609_908_221_908) < 1e-13);
        assert!(rel(gamma_complete(arg(5, 4)).unwrap(), 0.25 * q) < 1e-15);
        assert!(rel(gamma_complete(arg(1, 3)).unwrap(), 2.678_938_534_707_747_6) < 1e-13);
        assert!(rel(gamma_complete(arg(7, 3)).unwrap(), 1.190_639_348_758_998_9) < 1e-13);
        assert!(rel(gamma_f64(0.1).unwrap(), 9.513_507_698_668_732) < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(GammaArg::from_parts(0, 1).is_err());
        assert!(GammaArg::from_parts(-1, 2).is_err());
        assert!(gamma_f64(0.0).is_err());
        assert!(gamma_incomplete_scaled(0.5, -1.0).is_err());
        assert!(gamma_incomplete_scaled(-0.5, 1.0).is_err());
    }

    #[test]
    fn reduce_is_idempotent() {
        let (r1, f1) = arg(9, 4).reduce();
        let (r2, f2) = r1.reduce();
        assert_eq!(r1, r2);
        assert_eq!(f2, Rat::one());
        assert_eq!(r1, arg(1, 4));
        assert_eq!(f1, Ratio::new(5, 16));
    }

    #[test]
    fn scaled_incomplete_known_values() {
        assert!((gamma_incomplete_scaled(1.0, 7.3).unwrap() - 1.0).abs() < 1e-12);
        let g14 = gamma_complete(arg(1, 4)).unwrap();
        assert!(rel(gamma_incomplete_scaled(0.25, 0.0).unwrap(), g14) < 1e-13);
        // e^4 ∫_4^∞ z^{-1/2} e^{-z} dz (frozen from a 30-digit quadrature)
        assert!(rel(gamma_incomplete_scaled(0.5, 4.0).unwrap(), 0.452_677_049_981_174_6) < 1e-12);
        assert!(rel(gamma_incomplete_scaled(0.25, 25.0).unwrap(), 0.086_929_223_639_544_76) < 1e-12);
    }

    #[test]
    fn unit_argument_is_one_everywhere() {
        for i in 0..200 {
            let u = i as f64 * 0.37;
            assert!((gamma_incomplete_scaled(1.0, u).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn continuity_across_branch_switch() {
        for &m in &[0.1, 0.25, 0.5, 0.75, 0.9, 1.5] {
            let u0 = m + SERIES_SHIFT;
            let below = gamma_incomplete_scaled(m, u0 * (1.0 - 1e-12)).unwrap();
            let above = gamma_incomplete_scaled(m, u0).unwrap();
            assert!(rel(below, above) < 1e-10, "m={m}: {below} vs {above}");
        }
    }

    #[test]
    fn decreasing_in_u_for_small_m() {
        for &m in &[0.2, 0.5, 0.8] {
            let mut prev = f64::INFINITY;
            for i in 0..400 {
                let v = gamma_incomplete_scaled(m, i as f64 * 0.1).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn large_u_tail_expansion() {
        for &m in &[0.25, 0.5, 0.75] {
            for &u in &[20.0, 50.0, 200.0, 1e4] {
                let g = gamma_incomplete_scaled(m, u).unwrap();
                let lead = g / u.powf(m - 1.0);
                assert!((lead - 1.0).abs() <= 1.0 / u);
                let two_term = 1.0 + (m - 1.0) / u;
                // next term is (m-1)(m-2)/U^2
                assert!((lead - two_term).abs() <= 2.0 / (u * u));
            }
        }
    }

    #[test]
    fn even_moment_exact_forms() {
        assert!(even_moment(3, 1).is_zero());
        let g0 = even_moment(3, 0);
        assert_eq!(
            g0,
            ExactConst::gamma(Ratio::new(1, 4)).scale(&num_rational::BigRational::new(1.into(), 2.into()))
        );
        assert!(rel(g0.to_f64(), 1.812_804_954_110_954) < 1e-13);
        assert!(rel(even_moment(3, 2).to_f64(), 0.612_708_351_232_588_8) < 1e-13);
        // G(4) = (1/2)Γ(5/4) = (1/8)Γ(1/4)
        assert_eq!(
            even_moment(3, 4),
            ExactConst::gamma(Ratio::new(1, 4)).scale(&num_rational::BigRational::new(1.into(), 8.into()))
        );
    }
}

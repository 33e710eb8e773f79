//! Intermediary functions ψ_k and their bracketed versions ψ̄_{i,k}.
//!
//! For the turning-point data (p, L), ψ_k is the bounded solution of
//!
//! ```text
//! ψ_k'(T) = (p+1) T^p ψ_k(T) + T^k + c_k T^L
//! ```
//!
//! so that I_η(X^k)(t) = η^{k+1} ψ_k(t/η). It is built from the scaled
//! incomplete Gamma function on T >= 0 and extended to T < 0 by parity: odd
//! for even k, even for odd k.
//!
//! ψ̄_{i,k}(T) is T^i ψ_k(T) minus the polynomial part of its expansion at
//! ±∞, so it tends to 0 in both directions.

use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;

use crate::special_fn::{even_moment, gamma_incomplete_scaled, SpecialError};
use crate::term_algebra::exact::ExactConst;

/// Default |T| above which ψ̄ is evaluated from its tail series.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 15.0;

/// Relative cancellation in the direct ψ̄ formula that is reported as an
/// error instead of a value.
pub const CANCELLATION_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PsiError {
    #[error("ψ index k = {k} outside 0..={p}")]
    Index { k: u32, p: u32 },
    #[error("ψ̄_{{i,k}} is undefined for k = L = {0}")]
    BracketOfL(u32),
    #[error("ψ̄_{{{i},{k}}}({t}) loses {ratio:.1e}x to cancellation; use the tail series")]
    Cancellation { i: u32, k: u32, t: f64, ratio: f64 },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("p = {0} must be odd and >= 3")]
    BadP(u32),
    #[error("L = {l} must be even with 0 <= L < p = {p}")]
    BadL { p: u32, l: u32 },
}

/// Deliberate defects used as negative controls by the self-test.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// c_2 multiplied by 101/100.
    CorruptC2,
    /// T < 0 extension uses (-1)^k instead of (-1)^{k+1}.
    ParityInverted,
    /// Tail recurrence uses (n - p) in place of (n - p - 1).
    RhoOffByOne,
}

/// Per-(p, L) constants: c_k, tail coefficients ρ_{k,-n} and moments M_{i,k}.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct PsiTable {
    p: u32,
    l: u32,
    depth: u32,
    tail_threshold: f64,
    fault: Option<Fault>,
    c: Vec<ExactConst>,
    c_f64: Vec<f64>,
    rho: Vec<Vec<ExactConst>>,
    rho_f64: Vec<Vec<f64>>,
    moments: Vec<Vec<ExactConst>>,
}

impl PsiTable {
    /// Table with ρ and M cached up to `2·k_max + p + 2`.
    pub fn new(p: u32, l: u32, k_max: u32) -> Result<Self, TableError> {
        Self::build(p, l, k_max, None)
    }

    #[doc(hidden)]
    pub fn with_fault(p: u32, l: u32, k_max: u32, fault: Fault) -> Result<Self, TableError> {
        Self::build(p, l, k_max, Some(fault))
    }

    fn build(p: u32, l: u32, k_max: u32, fault: Option<Fault>) -> Result<Self, TableError> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(TableError::BadP(p));
        }
        if l % 2 == 1 || l >= p {
            return Err(TableError::BadL { p, l });
        }
        let depth = 2 * k_max + p + 2;
        let mut table = PsiTable {
            p,
            l,
            depth,
            tail_threshold: DEFAULT_TAIL_THRESHOLD,
            fault,
            c: Vec::new(),
            c_f64: Vec::new(),
            rho: Vec::new(),
            rho_f64: Vec::new(),
            moments: Vec::new(),
        };
        let c_len = (depth + 2 * p + 4) as usize;
        table.c = (0..c_len as u32).map(|k| table.compute_c(k)).collect();
        table.c_f64 = table.c.iter().map(ExactConst::to_f64).collect();
        // float ρ reaches further so the tail series never runs short
        let float_depth = depth + 40 * (p + 1);
        for k in 0..p {
            let exact: Vec<ExactConst> = (0..=depth).map(|n| table.compute_rho(k, n)).collect();
            let floats = table.rho_f64_sequence(k, float_depth);
            table.rho.push(exact);
            table.rho_f64.push(floats);
        }
        for k in 0..p {
            let row = (0..=depth).map(|i| table.compute_moment(i, k)).collect();
            table.moments.push(row);
        }
        Ok(table)
    }

    /// Same table with a different tail-series switch point.
    pub fn with_tail_threshold(mut self, threshold: f64) -> Self {
        self.tail_threshold = threshold;
        self
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn fault(&self) -> Option<Fault> {
        self.fault
    }

    /// Fast indices: {0, …, p-1} \ {L}.
    pub fn fast_indices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.p).filter(move |&k| k != self.l)
    }

    /// p − max{k, L}: the first power of 1/T in the expansion of ψ_k.
    pub fn lead_index(&self, k: u32) -> u32 {
        self.p - k.max(self.l)
    }

    fn compute_c(&self, k: u32) -> ExactConst {
        if k == self.l {
            return ExactConst::from_int(-1);
        }
        let g_k = even_moment(self.p, k);
        let g_l = even_moment(self.p, self.l);
        let c = -g_k.div_monomial(&g_l).expect("G(L) is a single Γ monomial");
        if k == 2 && self.fault == Some(Fault::CorruptC2) {
            return c.scale(&BigRational::new(101.into(), 100.into()));
        }
        c
    }

    /// c_k with λ_{t^k} = c_k η^{k-L}.
    pub fn c(&self, k: u32) -> ExactConst {
        match self.c.get(k as usize) {
            Some(c) => c.clone(),
            None => self.compute_c(k),
        }
    }

    pub fn c_f64(&self, k: u32) -> f64 {
        match self.c_f64.get(k as usize) {
            Some(c) => *c,
            None => self.compute_c(k).to_f64(),
        }
    }

    /// Recurrence factor linking ρ_{-n} to ρ_{-(n-p-1)}.
    fn rho_step(&self, n: u32) -> BigRational {
        let q = (self.p + 1) as i64;
        let shift = match self.fault {
            Some(Fault::RhoOffByOne) => n as i64 - self.p as i64,
            _ => n as i64 - q,
        };
        BigRational::new((-shift).into(), q.into())
    }

    fn rho_source(&self, k: u32, n: u32) -> ExactConst {
        let q = (self.p + 1) as i64;
        let mut src = ExactConst::zero();
        if n == self.p - k {
            src += ExactConst::from_ratio(-1, q);
        }
        if n == self.p - self.l {
            src += self.c(k).scale(&BigRational::new((-1).into(), q.into()));
        }
        src
    }

    fn compute_rho(&self, k: u32, n: u32) -> ExactConst {
        let q = self.p + 1;
        let base = n % q;
        let mut value = self.rho_source(k, base);
        let mut idx = base;
        while idx < n {
            idx += q;
            if value.is_zero() {
                break;
            }
            value = value.scale(&self.rho_step(idx));
        }
        if idx < n {
            return ExactConst::zero();
        }
        value
    }

    fn rho_f64_sequence(&self, k: u32, upto: u32) -> Vec<f64> {
        let q = self.p + 1;
        let mut out = vec![0.0; upto as usize + 1];
        for n in 0..=upto {
            let mut v = self.rho_source(k, n).to_f64();
            if n >= q {
                v += self.rho_step(n).to_f64().unwrap() * out[(n - q) as usize];
            }
            out[n as usize] = v;
        }
        out
    }

    /// ρ_{k,-n}: coefficient of T^{-n} in the expansion of ψ_k at ±∞.
    pub fn rho(&self, k: u32, n: u32) -> ExactConst {
        assert!(k < self.p, "ρ is tabulated for k < p");
        match self.rho.get(k as usize).and_then(|row| row.get(n as usize)) {
            Some(r) => r.clone(),
            None => self.compute_rho(k, n),
        }
    }

    fn rho_f64(&self, k: u32, n: u32) -> f64 {
        match self.rho_f64[k as usize].get(n as usize) {
            Some(r) => *r,
            None => self.compute_rho(k, n).to_f64(),
        }
    }

    fn compute_moment(&self, i: u32, k: u32) -> ExactConst {
        // integration by parts against d/dT (ψ_k e^{-T^{p+1}}) = (T^k + c_k T^L) e^{-T^{p+1}}
        let g1 = even_moment(self.p, i + k + 1);
        let g2 = even_moment(self.p, i + self.l + 1);
        let sum = &g1 + &(&self.c(k) * &g2);
        sum.scale(&BigRational::new((-1).into(), (i as i64 + 1).into()))
    }

    /// M_{i,k} = ∫ T^i ψ_k(T) e^{-T^{p+1}} dT, exact.
    pub fn psi_moment(&self, i: u32, k: u32) -> ExactConst {
        match self.moments.get(k as usize).and_then(|row| row.get(i as usize)) {
            Some(m) => m.clone(),
            None => self.compute_moment(i, k),
        }
    }

    /// ρ_{k,0..=n_max}.
    pub fn psi_asym_coeffs(&self, k: u32, n_max: u32) -> Vec<ExactConst> {
        (0..=n_max).map(|n| self.rho(k, n)).collect()
    }

    fn check_k(&self, k: u32) -> Result<(), PsiError> {
        if k > self.p {
            return Err(PsiError::Index { k, p: self.p });
        }
        Ok(())
    }

    fn psi_nonneg(&self, k: u32, t: f64) -> Result<f64, PsiError> {
        let q = (self.p + 1) as f64;
        let u = t.powi(self.p as i32 + 1);
        let m_k = (k + 1) as f64 / q;
        let g_k = gamma_incomplete_scaled(m_k, u)?;
        if k % 2 == 1 {
            return Ok(-g_k / q);
        }
        let m_l = (self.l + 1) as f64 / q;
        let g_l = gamma_incomplete_scaled(m_l, u)?;
        Ok((-self.c_f64(k) * g_l - g_k) / q)
    }

    /// ψ_k(T) for k in 0..=p.
    pub fn psi_eval(&self, k: u32, t: f64) -> Result<f64, PsiError> {
        self.check_k(k)?;
        if t >= 0.0 {
            return self.psi_nonneg(k, t);
        }
        let v = self.psi_nonneg(k, -t)?;
        let odd_ext = match self.fault {
            Some(Fault::ParityInverted) => k % 2 == 1,
            _ => k.is_multiple_of(2),
        };
        Ok(if odd_ext { -v } else { v })
    }

    /// ψ_k'(T) from the defining equation (no finite differences).
    pub fn psi_deriv(&self, k: u32, t: f64) -> Result<f64, PsiError> {
        let psi = self.psi_eval(k, t)?;
        Ok(self.psi_deriv_from(k, t, psi))
    }

    fn psi_deriv_from(&self, k: u32, t: f64, psi: f64) -> f64 {
        let q = (self.p + 1) as f64;
        q * t.powi(self.p as i32) * psi + t.powi(k as i32) + self.c_f64(k) * t.powi(self.l as i32)
    }

    fn check_bar(&self, k: u32) -> Result<(), PsiError> {
        if k >= self.p {
            return Err(PsiError::Index { k, p: self.p - 1 });
        }
        if k == self.l {
            return Err(PsiError::BracketOfL(k));
        }
        Ok(())
    }

    /// Tail series Σ_{n>i} ρ_{-n} T^{i-n} and its T-derivative, if it
    /// converges to working precision at this T.
    fn tail(&self, i: u32, k: u32, t: f64) -> Option<(f64, f64)> {
        let q = self.p + 1;
        let mut sum = 0.0;
        let mut dsum = 0.0;
        let mut prev = f64::INFINITY;
        let mut seen = 0;
        let n_cap = i + 60 * q;
        for n in (i + 1)..=n_cap {
            let r = self.rho_f64(k, n);
            if r == 0.0 {
                continue;
            }
            let e = i as i32 - n as i32;
            let term = r * t.powi(e);
            let mag = term.abs();
            if seen > 0 && mag > prev {
                // divergent before reaching precision
                return None;
            }
            sum += term;
            dsum += e as f64 * r * t.powi(e - 1);
            seen += 1;
            prev = mag;
            if mag <= 1e-17 * sum.abs() {
                return Some((sum, dsum));
            }
        }
        if sum == 0.0 && seen == 0 {
            return Some((0.0, 0.0));
        }
        None
    }

    fn poly_part(&self, i: u32, k: u32, t: f64) -> (f64, f64, f64) {
        let mut val = 0.0;
        let mut dval = 0.0;
        let mut mag = 0.0;
        for n in self.lead_index(k)..=i {
            let r = self.rho_f64(k, n);
            if r == 0.0 {
                continue;
            }
            let e = (i - n) as i32;
            let term = r * t.powi(e);
            val += term;
            mag += term.abs();
            if e > 0 {
                dval += e as f64 * r * t.powi(e - 1);
            }
        }
        (val, dval, mag)
    }

    /// Value and T-derivative of ψ̄_{i,k}(T).
    pub fn psi_bar_eval_with_deriv(&self, i: u32, k: u32, t: f64) -> Result<(f64, f64), PsiError> {
        self.check_bar(k)?;
        let psi = self.psi_eval(k, t)?;
        let dpsi = self.psi_deriv_from(k, t, psi);
        let ti = t.powi(i as i32);
        let dti = if i == 0 { 0.0 } else { i as f64 * t.powi(i as i32 - 1) };
        if i < self.lead_index(k) {
            return Ok((ti * psi, dti * psi + ti * dpsi));
        }
        if t.abs() > self.tail_threshold {
            if let Some(v) = self.tail(i, k, t) {
                return Ok(v);
            }
        }
        let (poly, dpoly, mag) = self.poly_part(i, k, t);
        let value = ti * psi - poly;
        let lead_tail = self.first_tail_term(i, k, t);
        let ratio = mag / value.abs().max(lead_tail);
        if ratio > CANCELLATION_LIMIT {
            if let Some(v) = self.tail(i, k, t) {
                return Ok(v);
            }
            return Err(PsiError::Cancellation { i, k, t, ratio });
        }
        Ok((value, dti * psi + ti * dpsi - dpoly))
    }

    fn first_tail_term(&self, i: u32, k: u32, t: f64) -> f64 {
        let q = self.p + 1;
        for n in (i + 1)..=(i + 2 * q) {
            let r = self.rho_f64(k, n);
            if r != 0.0 {
                return (r * t.powi(i as i32 - n as i32)).abs();
            }
        }
        0.0
    }

    /// ψ̄_{i,k}(T) for k in {0..p-1} \ {L}.
    pub fn psi_bar_eval(&self, i: u32, k: u32, t: f64) -> Result<f64, PsiError> {
        self.psi_bar_eval_with_deriv(i, k, t).map(|(v, _)| v)
    }

    /// Tail-series value of ψ̄_{i,k}(T) regardless of the switch point.
    pub fn psi_bar_tail(&self, i: u32, k: u32, t: f64) -> Option<f64> {
        self.check_bar(k).ok()?;
        self.tail(i, k, t).map(|(v, _)| v)
    }

    /// m = (k+1)/(p+1) as a rational.
    pub fn gamma_exponent(&self, k: u32) -> Ratio<i64> {
        Ratio::new(k as i64 + 1, self.p as i64 + 1)
    }

    /// First nonzero tail coefficient (n, ρ_{k,-n}) with n >= lead_index(k).
    /// For odd k < L the coefficient at lead_index(k) is c_k/(p+1) = 0 and
    /// the tail actually starts at p − k.
    pub fn leading_tail(&self, k: u32) -> (u32, f64) {
        let lead = self.lead_index(k);
        (lead..=self.p)
            .map(|n| (n, self.rho_f64(k, n)))
            .find(|&(_, r)| r != 0.0)
            .unwrap_or((lead, 0.0))
    }

    /// Float value of ρ_{k,-n}.
    pub fn rho_value(&self, k: u32, n: u32) -> f64 {
        self.rho_f64(k, n)
    }

    pub fn psi_moment_f64(&self, i: u32, k: u32) -> f64 {
        self.psi_moment(i, k).to_f64()
    }

    pub fn c_value(&self, k: u32) -> f64 {
        self.c_f64(k)
    }

    #[doc(hidden)]
    pub fn rho_f64_len(&self, k: u32) -> usize {
        self.rho_f64[k as usize].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(p: u32, l: u32) -> PsiTable {
        PsiTable::new(p, l, 4).unwrap()
    }

    #[test]
    fn rejects_bad_indices() {
        assert_eq!(PsiTable::new(4, 0, 2).unwrap_err(), TableError::BadP(4));
        assert_eq!(PsiTable::new(1, 0, 2).unwrap_err(), TableError::BadP(1));
        assert!(PsiTable::new(3, 1, 2).is_err());
        assert!(PsiTable::new(3, 4, 2).is_err());
        let t = table(3, 0);
        assert!(matches!(t.psi_eval(4, 0.0), Err(PsiError::Index { .. })));
        assert!(matches!(t.psi_bar_eval(0, 0, 1.0), Err(PsiError::BracketOfL(0))));
        assert!(t.psi_bar_eval(0, 3, 1.0).is_err());
    }

    #[test]
    fn constants_c() {
        let t = table(3, 0);
        assert_eq!(t.c(0), ExactConst::from_int(-1));
        assert!(t.c(1).is_zero());
        assert!(t.c(3).is_zero());
        let expected = -ExactConst::gamma(Ratio::new(3, 4))
            .div_monomial(&ExactConst::gamma(Ratio::new(1, 4)))
            .unwrap();
        assert_eq!(t.c(2), expected);
    }

    #[test]
    fn psi_l_vanishes_and_psi_p_constant() {
        for &(p, l) in &[(3, 0), (3, 2), (5, 2)] {
            let t = table(p, l);
            for j in 0..=60 {
                let x = -6.0 + 0.2 * j as f64;
                assert_eq!(t.psi_eval(l, x).unwrap(), 0.0);
                let v = t.psi_eval(p, x).unwrap();
                assert!((v + 1.0 / (p + 1) as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn psi1_at_zero() {
        let t = table(3, 0);
        let v = t.psi_eval(1, 0.0).unwrap();
        assert!((v + std::f64::consts::PI.sqrt() / 4.0).abs() < 1e-14);
    }

    #[test]
    fn psi_deriv_edge_examples() {
        let t = table(3, 0);
        for &x in &[-3.0, -0.5, 0.0, 0.7, 4.0] {
            assert!(t.psi_deriv(3, x).unwrap().abs() < 1e-14);
        }
        assert_eq!(t.psi_deriv(1, 0.0).unwrap(), 0.0);
        let h = 1e-5;
        let fd = (t.psi_eval(2, 1.5 + h).unwrap() - t.psi_eval(2, 1.5 - h).unwrap()) / (2.0 * h);
        assert!((t.psi_deriv(2, 1.5).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn rho_sources_and_support() {
        let t = table(3, 0);
        // k = 1: leading index p - k = 2, value -1/(p+1)
        assert_eq!(t.rho(1, 2), ExactConst::from_ratio(-1, 4));
        assert!(t.rho(1, 0).is_zero());
        assert!(t.rho(1, 1).is_zero());
        // recurrence: ρ_{-6} = -(2/4) ρ_{-2}
        assert_eq!(t.rho(1, 6), ExactConst::from_ratio(1, 8));
        // k = 2: sources at n = 1 and n = p - L = 3
        assert_eq!(t.rho(2, 1), ExactConst::from_ratio(-1, 4));
        assert_eq!(t.rho(2, 3), t.c(2).scale(&BigRational::new((-1).into(), 4.into())));
        // parity: zero unless n ≡ p - k (mod 2)
        for k in [1u32, 2] {
            for n in 0..30 {
                if (n + 3 + k) % 2 == 1 {
                    assert!(t.rho(k, n).is_zero(), "k={k} n={n}");
                }
            }
        }
        // k = L gives nothing
        for n in 0..30 {
            assert!(t.rho(0, n).is_zero());
        }
    }

    #[test]
    fn exact_and_float_rho_agree_beyond_cache() {
        let t = table(5, 2);
        for k in t.fast_indices() {
            for n in 0..(t.depth() + 30) {
                let e = t.rho(k, n).to_f64();
                let f = t.rho_f64(k, n);
                assert!((e - f).abs() <= 1e-12 * e.abs().max(1e-300), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn moments_vanish_by_parity_and_for_l() {
        let t = table(3, 0);
        for i in 0..8 {
            assert!(t.psi_moment(i, 0).is_zero());
            for k in 1..3 {
                if (i + k) % 2 == 0 {
                    assert!(t.psi_moment(i, k).is_zero(), "i={i} k={k}");
                }
            }
        }
        let t = table(5, 2);
        for i in 0..8 {
            assert!(t.psi_moment(i, 2).is_zero());
        }
    }

    #[test]
    fn bracket_low_index_is_plain_product() {
        let t = table(3, 0);
        // lead index for k = 1 is 2, so i = 1 is below it
        for &x in &[-2.0, 0.3, 1.7, 9.0] {
            let expect = x * t.psi_eval(1, x).unwrap();
            assert_eq!(t.psi_bar_eval(1, 1, x).unwrap(), expect);
        }
        // at T = 0 only the constant of the subtracted polynomial survives
        for i in 1..6 {
            for k in [1u32, 2] {
                let expect = if i >= t.lead_index(k) { -t.rho_value(k, i) } else { 0.0 };
                assert_eq!(t.psi_bar_eval(i, k, 0.0).unwrap(), expect);
            }
        }
    }

    #[test]
    fn bracket_matches_tail_at_large_t() {
        let t = table(3, 0);
        let direct = t.psi_bar_eval(2, 1, 25.0).unwrap();
        let tail = t.psi_bar_tail(2, 1, 25.0).unwrap();
        assert!((direct - tail).abs() <= 1e-6 * tail.abs());
        // switch point does not introduce a jump
        let t2 = table(3, 0).with_tail_threshold(1e9);
        for i in 0..5 {
            for k in [1u32, 2] {
                for &x in &[6.0, 9.0, 12.0, -8.0] {
                    let a = t.psi_bar_tail(i, k, x).unwrap();
                    let b = t2.psi_bar_eval(i, k, x).unwrap();
                    assert!((a - b).abs() < 1e-9 * a.abs().max(1e-6), "i={i} k={k} x={x}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn bracket_decays() {
        let t = table(3, 0);
        for i in 0..6 {
            for k in [1u32, 2] {
                for &x in &[10.0, 20.0, 40.0, -10.0, -40.0] {
                    let v = t.psi_bar_eval(i, k, x).unwrap();
                    let q = t.p() + 1;
                    let bound = (i + 1..=i + 2 * q)
                        .map(|n| t.rho_f64(k, n).abs())
                        .fold(0.0, f64::max);
                    assert!(v.abs() <= 2.0 * bound / x.abs(), "i={i} k={k} x={x} v={v}");
                }
            }
        }
    }

    #[test]
    fn fault_tables_differ() {
        let good = table(3, 0);
        let bad = PsiTable::with_fault(3, 0, 4, Fault::ParityInverted).unwrap();
        assert_ne!(good.psi_eval(1, -1.0).unwrap(), bad.psi_eval(1, -1.0).unwrap());
        let bad = PsiTable::with_fault(3, 0, 4, Fault::RhoOffByOne).unwrap();
        assert_ne!(good.rho(1, 6), bad.rho(1, 6));
        let bad = PsiTable::with_fault(3, 0, 4, Fault::CorruptC2).unwrap();
        assert_ne!(good.c(2), bad.c(2));
    }
}

//! Unnormalized monomials t^i ψ_k(t/η)^{0|1} η^l and the rules that bring
//! them into graded form.

use std::collections::BTreeMap;

use super::exact::ExactConst;
use super::series::FormalSeries;
use super::AlgebraError;
use crate::psi::PsiTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawKey {
    pub t_pow: u32,
    pub eta_pow: i32,
    /// Index k of an unbracketed ψ_k(t/η) factor.
    pub psi: Option<u32>,
}

/// A single monomial `coeff · t^t_pow · ψ_psi(t/η) · η^eta_pow`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTerm {
    pub coeff: ExactConst,
    pub t_pow: u32,
    pub eta_pow: i32,
    pub psi: Option<u32>,
}

impl RawTerm {
    pub fn slow(coeff: ExactConst, t_pow: u32, eta_pow: i32) -> Self {
        RawTerm {
            coeff,
            t_pow,
            eta_pow,
            psi: None,
        }
    }

    pub fn with_psi(coeff: ExactConst, t_pow: u32, k: u32, eta_pow: i32) -> Self {
        RawTerm {
            coeff,
            t_pow,
            eta_pow,
            psi: Some(k),
        }
    }

    pub fn key(&self) -> RawKey {
        RawKey {
            t_pow: self.t_pow,
            eta_pow: self.eta_pow,
            psi: self.psi,
        }
    }
}

/// Grading: ord(t^i η^l) = l, ord(t^i ψ_k η^l) = min{p − max{k, L}, i} + l.
pub fn ord(table: &PsiTable, key: &RawKey) -> i32 {
    match key.psi {
        None => key.eta_pow,
        Some(k) if k >= table.p() => key.eta_pow,
        Some(k) => table.lead_index(k).min(key.t_pow) as i32 + key.eta_pow,
    }
}

/// Finite sum of raw monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawSum {
    terms: BTreeMap<RawKey, ExactConst>,
}

impl RawSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RawKey, &ExactConst)> {
        self.terms.iter()
    }

    pub fn push(&mut self, term: RawTerm) {
        self.add(term.key(), &term.coeff);
    }

    pub fn add(&mut self, key: RawKey, c: &ExactConst) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn extend(&mut self, other: &RawSum) {
        for (k, c) in &other.terms {
            self.add(*k, c);
        }
    }

    /// Multiply by c · t^dt · η^de.
    pub fn times(&self, c: &ExactConst, dt: u32, de: i32) -> RawSum {
        let mut out = RawSum::new();
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            let key = RawKey {
                t_pow: k.t_pow + dt,
                eta_pow: k.eta_pow + de,
                psi: k.psi,
            };
            out.add(key, &(v * c));
        }
        out
    }

    /// Multiply by a scalar η-series Σ s_n η^n.
    pub fn times_series(&self, s: &EtaSeries) -> RawSum {
        let mut out = RawSum::new();
        for (n, c) in s.iter() {
            out.extend(&self.times(c, 0, n));
        }
        out
    }

    /// Drop every term whose order exceeds `max_ord`.
    pub fn retain_ord(&mut self, table: &PsiTable, max_ord: i32) {
        self.terms.retain(|k, _| ord(table, k) <= max_ord);
    }

    pub fn min_ord(&self, table: &PsiTable) -> Option<i32> {
        self.terms.keys().map(|k| ord(table, k)).min()
    }

    /// Pointwise value at (t, η), for tests and oracles.
    pub fn eval(&self, table: &PsiTable, t: f64, eta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let psi = match k.psi {
                    Some(idx) => table.psi_eval(idx, t / eta).expect("ψ index in range"),
                    None => 1.0,
                };
                c.to_f64() * t.powi(k.t_pow as i32) * eta.powi(k.eta_pow) * psi
            })
            .sum()
    }
}

/// Scalar Laurent series in η with exact coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EtaSeries {
    coeffs: BTreeMap<i32, ExactConst>,
}

impl EtaSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut s = Self::new();
        s.add(0, &ExactConst::one());
        s
    }

    pub fn from_pairs<I: IntoIterator<Item = (i32, ExactConst)>>(it: I) -> Self {
        let mut s = Self::new();
        for (n, c) in it {
            s.add(n, &c);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&mut self, n: i32, c: &ExactConst) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(n).or_default();
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn get(&self, n: i32) -> ExactConst {
        self.coeffs.get(&n).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &ExactConst)> {
        self.coeffs.iter().map(|(n, c)| (*n, c))
    }

    pub fn min_power(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    /// Product truncated to powers <= `max_pow`.
    pub fn mul_truncated(&self, other: &EtaSeries, max_pow: i32) -> EtaSeries {
        let mut out = EtaSeries::new();
        for (n1, c1) in &self.coeffs {
            for (n2, c2) in &other.coeffs {
                if n1 + n2 <= max_pow {
                    out.add(n1 + n2, &(c1 * c2));
                }
            }
        }
        out
    }

    pub fn pow_truncated(&self, e: u32, max_pow: i32) -> EtaSeries {
        let mut out = EtaSeries::one();
        for _ in 0..e {
            out = out.mul_truncated(self, max_pow);
        }
        out
    }

    pub fn shift(&self, d: i32) -> EtaSeries {
        EtaSeries {
            coeffs: self.coeffs.iter().map(|(n, c)| (n + d, c.clone())).collect(),
        }
    }

    pub fn truncate(&self, max_pow: i32) -> EtaSeries {
        EtaSeries {
            coeffs: self.coeffs.range(..=max_pow).map(|(n, c)| (*n, c.clone())).collect(),
        }
    }

    pub fn eval(&self, eta: f64) -> f64 {
        self.coeffs.iter().map(|(n, c)| c.to_f64() * eta.powi(*n)).sum()
    }
}

/// Rewrite `coeff · t^i ψ_k(t/η) η^l` (or a slow monomial) in graded form:
/// η^{i+l} ψ̄_{i,k} + Σ_{n = p−max{k,L}}^{i} ρ_{k,−n} t^{i−n} η^{n+l}.
/// ψ_L vanishes and ψ_p is the constant −1/(p+1).
pub fn bracket_reduce(
    table: &PsiTable,
    key: &RawKey,
    coeff: &ExactConst,
    out: &mut FormalSeries,
) -> Result<(), AlgebraError> {
    if coeff.is_zero() {
        return Ok(());
    }
    let to_order = |e: i32| -> Result<u32, AlgebraError> {
        u32::try_from(e).map_err(|_| AlgebraError::NegativeOrderTerm { order: e })
    };
    let (i, l) = (key.t_pow, key.eta_pow);
    let k = match key.psi {
        None => {
            return out.add_slow(to_order(l)?, i, coeff);
        }
        Some(k) => k,
    };
    if k == table.l() {
        return Ok(());
    }
    if k == table.p() {
        let c = coeff * &ExactConst::from_ratio(-1, table.p() as i64 + 1);
        return out.add_slow(to_order(l)?, i, &c);
    }
    if k > table.p() {
        return Err(AlgebraError::PsiIndex { k, p: table.p() });
    }
    out.add_fast(to_order(i as i32 + l)?, i, k, coeff)?;
    for n in table.lead_index(k)..=i {
        let rho = table.rho(k, n);
        if rho.is_zero() {
            continue;
        }
        out.add_slow(to_order(n as i32 + l)?, i - n, &(coeff * &rho))?;
    }
    Ok(())
}

/// Graded form of a whole raw sum; terms above the truncation order of `out`
/// are dropped.
pub fn normalize_into(
    table: &PsiTable,
    raw: &RawSum,
    out: &mut FormalSeries,
) -> Result<(), AlgebraError> {
    let mut full = FormalSeries::zero(u32::MAX);
    for (key, c) in raw.iter() {
        bracket_reduce(table, key, c, &mut full)?;
    }
    out.add_truncated(&full.u_part());
    Ok(())
}

/// Expand the u-part of a series back into raw monomials:
/// ψ̄_{i,k} η^n = t^i ψ_k η^{n−i} − Σ_n' ρ_{k,−n'} t^{i−n'} η^{n−i+n'}.
pub fn u_to_raw(table: &PsiTable, s: &FormalSeries) -> RawSum {
    let mut raw = RawSum::new();
    for e in s.elements() {
        let n = e.n as i32;
        for (i, c) in &e.slow {
            raw.push(RawTerm::slow(c.clone(), *i, n));
        }
        for ((i, k), c) in &e.fast {
            let (i, k) = (*i, *k);
            raw.push(RawTerm::with_psi(c.clone(), i, k, n - i as i32));
            for m in table.lead_index(k)..=i {
                let rho = table.rho(k, m);
                if rho.is_zero() {
                    continue;
                }
                raw.push(RawTerm::slow(-(c * &rho), i - m, n - i as i32 + m as i32));
            }
        }
    }
    raw
}

/// The scalar part of a series as an η-series.
pub fn alpha_to_eta(s: &FormalSeries) -> EtaSeries {
    EtaSeries::from_pairs(s.alpha_coeffs().into_iter().map(|(n, c)| (n as i32, c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t30() -> PsiTable {
        PsiTable::new(3, 0, 4).unwrap()
    }

    #[test]
    fn ord_examples() {
        let t = t30();
        let key = |i, l, psi| RawKey {
            t_pow: i,
            eta_pow: l,
            psi,
        };
        assert_eq!(ord(&t, &key(2, 3, None)), 3);
        assert_eq!(ord(&t, &key(1, 0, Some(2))), 1);
        assert_eq!(ord(&t, &key(5, 0, Some(1))), 2);
    }

    #[test]
    fn bracket_low_power_keeps_coefficient() {
        let t = t30();
        let mut out = FormalSeries::zero(10);
        let key = RawKey {
            t_pow: 1,
            eta_pow: 2,
            psi: Some(1),
        };
        bracket_reduce(&t, &key, &ExactConst::from_int(7), &mut out).unwrap();
        let e = out.element(3).unwrap();
        assert_eq!(e.fast.get(&(1, 1)), Some(&ExactConst::from_int(7)));
        assert_eq!(out.elements().count(), 1);
    }

    #[test]
    fn bracket_of_l_is_zero() {
        let t = t30();
        let mut out = FormalSeries::zero(10);
        let key = RawKey {
            t_pow: 4,
            eta_pow: 0,
            psi: Some(0),
        };
        bracket_reduce(&t, &key, &ExactConst::one(), &mut out).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn bracket_t2_psi1() {
        // t^2 ψ_1 = η^2 ψ̄_{2,1} + ρ_{1,-2} η^2 with ρ_{1,-2} = -1/4
        let t = t30();
        let mut out = FormalSeries::zero(10);
        let key = RawKey {
            t_pow: 2,
            eta_pow: 0,
            psi: Some(1),
        };
        bracket_reduce(&t, &key, &ExactConst::one(), &mut out).unwrap();
        let e = out.element(2).unwrap();
        assert_eq!(e.fast.get(&(2, 1)), Some(&ExactConst::one()));
        assert_eq!(e.slow.get(&0), Some(&ExactConst::from_ratio(-1, 4)));
        assert_eq!(out.elements().count(), 1);
    }

    #[test]
    fn negative_order_is_rejected() {
        let t = t30();
        let mut out = FormalSeries::zero(10);
        let key = RawKey {
            t_pow: 0,
            eta_pow: -1,
            psi: None,
        };
        assert!(matches!(
            bracket_reduce(&t, &key, &ExactConst::one(), &mut out),
            Err(AlgebraError::NegativeOrderTerm { order: -1 })
        ));
    }

    #[test]
    fn u_to_raw_inverts_normalization() {
        let t = PsiTable::new(5, 2, 4).unwrap();
        let mut s = FormalSeries::zero(6);
        s.add_fast(4, 3, 1, &ExactConst::from_int(3)).unwrap();
        s.add_fast(5, 5, 3, &ExactConst::from_ratio(-2, 7)).unwrap();
        s.add_slow(2, 4, &ExactConst::one()).unwrap();
        let raw = u_to_raw(&t, &s);
        let mut back = FormalSeries::zero(6);
        normalize_into(&t, &raw, &mut back).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn eta_series_products() {
        let a = EtaSeries::from_pairs([(0, ExactConst::from_int(-1)), (2, ExactConst::from_int(3))]);
        let sq = a.pow_truncated(2, 3);
        assert_eq!(sq.get(0), ExactConst::from_int(1));
        assert_eq!(sq.get(2), ExactConst::from_int(-6));
        assert!(sq.get(4).is_zero());
        assert_eq!(a.pow_truncated(0, 5), EtaSeries::one());
    }
}

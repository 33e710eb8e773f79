//! Graded formal spaces: an element of C_n is a couple
//! (a_n η^n, (u_n(t) + Σ u_{i,k} ψ̄_{i,k}(t/η)) η^n), an element of A_K a
//! finite sum of those for n <= K.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::exact::ExactConst;
use super::AlgebraError;
use crate::psi::{PsiError, PsiTable};

/// One η-order of an A_K element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeriesElement {
    pub n: u32,
    /// Coefficient of η^n in the α series.
    pub a: ExactConst,
    /// t-power → coefficient of t^i η^n.
    pub slow: BTreeMap<u32, ExactConst>,
    /// (i, k) → coefficient of ψ̄_{i,k}(t/η) η^n, with i <= n and k != L.
    pub fast: BTreeMap<(u32, u32), ExactConst>,
}

impl SeriesElement {
    pub fn new(n: u32) -> Self {
        SeriesElement {
            n,
            ..Default::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.slow.is_empty() && self.fast.is_empty()
    }

    /// The u-part only (slow and fast) is zero.
    pub fn u_is_zero(&self) -> bool {
        self.slow.is_empty() && self.fast.is_empty()
    }

    pub fn term_count(&self) -> usize {
        usize::from(!self.a.is_zero()) + self.slow.len() + self.fast.len()
    }
}

fn accumulate<K: Ord + Copy>(map: &mut BTreeMap<K, ExactConst>, key: K, c: &ExactConst) {
    if c.is_zero() {
        return;
    }
    let slot = map.entry(key).or_default();
    *slot += c;
    if slot.is_zero() {
        map.remove(&key);
    }
}

/// Element of A_K = ⊕_{n <= K} C_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSeries {
    order: u32,
    elements: BTreeMap<u32, SeriesElement>,
}

impl FormalSeries {
    pub fn zero(order: u32) -> Self {
        FormalSeries {
            order,
            elements: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &SeriesElement> {
        self.elements.values()
    }

    pub fn element(&self, n: u32) -> Option<&SeriesElement> {
        self.elements.get(&n)
    }

    fn slot(&mut self, n: u32) -> Result<&mut SeriesElement, AlgebraError> {
        if n > self.order {
            return Err(AlgebraError::AboveTruncation { n, order: self.order });
        }
        Ok(self.elements.entry(n).or_insert_with(|| SeriesElement::new(n)))
    }

    fn tidy(&mut self, n: u32) {
        if self.elements.get(&n).is_some_and(SeriesElement::is_zero) {
            self.elements.remove(&n);
        }
    }

    pub fn add_scalar(&mut self, n: u32, c: &ExactConst) -> Result<(), AlgebraError> {
        let e = self.slot(n)?;
        e.a += c;
        self.tidy(n);
        Ok(())
    }

    pub fn add_slow(&mut self, n: u32, i: u32, c: &ExactConst) -> Result<(), AlgebraError> {
        accumulate(&mut self.slot(n)?.slow, i, c);
        self.tidy(n);
        Ok(())
    }

    pub fn add_fast(&mut self, n: u32, i: u32, k: u32, c: &ExactConst) -> Result<(), AlgebraError> {
        if i > n {
            return Err(AlgebraError::FastShape { n, i, k });
        }
        accumulate(&mut self.slot(n)?.fast, (i, k), c);
        self.tidy(n);
        Ok(())
    }

    /// Like the `add_*` family but silently drops anything above the
    /// truncation order.
    pub fn add_truncated(&mut self, other: &FormalSeries) {
        for e in other.elements.values() {
            if e.n > self.order {
                continue;
            }
            self.add_element(e);
        }
    }

    fn add_element(&mut self, e: &SeriesElement) {
        let n = e.n;
        let slot = self.elements.entry(n).or_insert_with(|| SeriesElement::new(n));
        slot.a += &e.a;
        for (i, c) in &e.slow {
            accumulate(&mut slot.slow, *i, c);
        }
        for (ik, c) in &e.fast {
            accumulate(&mut slot.fast, *ik, c);
        }
        self.tidy(n);
    }

    /// Natural projection onto A_K.
    pub fn project(&self, k: u32) -> FormalSeries {
        FormalSeries {
            order: k.min(self.order),
            elements: self
                .elements
                .range(..=k)
                .map(|(n, e)| (*n, e.clone()))
                .collect(),
        }
    }

    /// Re-label the truncation order without touching the content.
    pub fn with_order(mut self, order: u32) -> Result<FormalSeries, AlgebraError> {
        if let Some((&n, _)) = self.elements.iter().next_back() {
            if n > order {
                return Err(AlgebraError::AboveTruncation { n, order });
            }
        }
        self.order = order;
        Ok(self)
    }

    pub fn add(&self, other: &FormalSeries) -> FormalSeries {
        let mut out = FormalSeries::zero(self.order.max(other.order));
        for e in self.elements.values().chain(other.elements.values()) {
            out.add_element(e);
        }
        out
    }

    pub fn scale(&self, c: &ExactConst) -> FormalSeries {
        let mut out = FormalSeries::zero(self.order);
        if c.is_zero() {
            return out;
        }
        for e in self.elements.values() {
            let mut s = SeriesElement::new(e.n);
            s.a = &e.a * c;
            for (i, v) in &e.slow {
                accumulate(&mut s.slow, *i, &(v * c));
            }
            for (ik, v) in &e.fast {
                accumulate(&mut s.fast, *ik, &(v * c));
            }
            out.add_element(&s);
        }
        out
    }

    pub fn scale_rational(&self, q: &BigRational) -> FormalSeries {
        self.scale(&ExactConst::from_rational(q.clone()))
    }

    pub fn neg(&self) -> FormalSeries {
        self.scale(&ExactConst::from_int(-1))
    }

    /// The scalar (α) part as (n, a_n) pairs.
    pub fn alpha_coeffs(&self) -> Vec<(u32, ExactConst)> {
        self.elements
            .values()
            .filter(|e| !e.a.is_zero())
            .map(|e| (e.n, e.a.clone()))
            .collect()
    }

    /// Copy without the scalar part.
    pub fn u_part(&self) -> FormalSeries {
        let mut out = FormalSeries::zero(self.order);
        for e in self.elements.values() {
            let mut s = e.clone();
            s.a = ExactConst::zero();
            out.add_element(&s);
        }
        out
    }

    /// Copy keeping only the scalar part.
    pub fn alpha_part(&self) -> FormalSeries {
        let mut out = FormalSeries::zero(self.order);
        for e in self.elements.values() {
            let mut s = SeriesElement::new(e.n);
            s.a = e.a.clone();
            out.add_element(&s);
        }
        out
    }

    /// Check the C_n shape against (p, L): fast keys have k != L, k < p, i <= n.
    pub fn check_shape(&self, table: &PsiTable) -> Result<(), AlgebraError> {
        for e in self.elements.values() {
            for &(i, k) in e.fast.keys() {
                if i > e.n || k == table.l() || k >= table.p() {
                    return Err(AlgebraError::FastShape { n: e.n, i, k });
                }
            }
        }
        Ok(())
    }

    pub fn compile(&self) -> CompiledSeries {
        let mut c = CompiledSeries::default();
        for e in self.elements.values() {
            if !e.a.is_zero() {
                c.alpha.push((e.n, e.a.to_f64()));
            }
            for (i, v) in &e.slow {
                c.slow.push((e.n, *i, v.to_f64()));
            }
            for ((i, k), v) in &e.fast {
                c.fast.push((e.n, *i, *k, v.to_f64()));
            }
        }
        c
    }

    /// (α̃, ũ) at (t, η): substitutes ψ̄ numerically and sums over orders.
    pub fn eval_series(&self, table: &PsiTable, t: f64, eta: f64) -> Result<(f64, f64), PsiError> {
        let c = self.compile();
        let (u, _) = c.eval_u(table, t, eta)?;
        Ok((c.eval_alpha(eta), u))
    }
}

/// Float image of a [`FormalSeries`] for repeated evaluation.
#[derive(Debug, Clone, Default)]
pub struct CompiledSeries {
    pub alpha: Vec<(u32, f64)>,
    pub slow: Vec<(u32, u32, f64)>,
    pub fast: Vec<(u32, u32, u32, f64)>,
}

impl CompiledSeries {
    pub fn eval_alpha(&self, eta: f64) -> f64 {
        self.alpha.iter().map(|(n, a)| a * eta.powi(*n as i32)).sum()
    }

    /// ũ(t) and dũ/dt.
    pub fn eval_u(&self, table: &PsiTable, t: f64, eta: f64) -> Result<(f64, f64), PsiError> {
        let mut u = 0.0;
        let mut du = 0.0;
        for &(n, i, c) in &self.slow {
            let w = c * eta.powi(n as i32);
            u += w * t.powi(i as i32);
            if i > 0 {
                du += w * i as f64 * t.powi(i as i32 - 1);
            }
        }
        let big_t = t / eta;
        for &(n, i, k, c) in &self.fast {
            let w = c * eta.powi(n as i32);
            let (v, dv) = table.psi_bar_eval_with_deriv(i, k, big_t)?;
            u += w * v;
            du += w * dv / eta;
        }
        Ok((u, du))
    }
}

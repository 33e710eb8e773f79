//! Problem data and the fixed-point iteration Ξ_K.
//!
//! The rescaled equation is
//!
//! ```text
//! η^{p+2} u' = (p+1) η t^p u + η^{p−L+1} α t^L + S(t, η^{p−L+1} α) + η^{p+1} P(t, η u, η^{p−L+1} α, η)
//! ```
//!
//! and one sweep of Ξ_K maps (β, u) to (α, I_η(v)) where
//! v = S(t, η^{p−L+1} α)/η^{p+2} + P(t, η u, η^{p−L+1} β, η)/η and
//! α = η^{L+1} λ_v.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::i_eta::{apply_i, IEtaError};
use crate::psi::{Fault, PsiTable, TableError};
use crate::term_algebra::raw::{alpha_to_eta, u_to_raw, EtaSeries, RawSum, RawTerm};
use crate::term_algebra::{AlgebraError, ExactConst, FormalSeries};

/// S monomial coeff · t^i · A^j, with A = η^{p−L+1} α.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SMonomial {
    pub i: u32,
    pub j: u32,
    pub coeff: BigRational,
}

/// P monomial coeff · t^a · U^b · A^c · η^d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PMonomial {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
    pub coeff: BigRational,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("p = {0} must be odd and >= 3")]
    BadP(u32),
    #[error("L = {l} must be even with 0 <= L < p = {p}")]
    BadL { p: u32, l: u32 },
    #[error("domain radii need 0 < t1 < t0, got t0 = {t0}, t1 = {t1}")]
    BadRadii { t0: f64, t1: f64 },
    #[error("S monomial #{index} has α-power j = 0; S(t, 0) = 0 requires j >= 1")]
    SZeroAlphaPower { index: usize },
    #[error(
        "S monomial #{index} (i = {i}, j = {j}) has valuation i + j(p−L+1) = {valuation}, \
         which must be strictly greater than p + 1 = {bound}"
    )]
    SValuation { index: usize, i: u32, j: u32, valuation: u32, bound: u32 },
    #[error("P monomial #{index} has u-power b = {b}; only the linear case b <= 1 is supported")]
    PNonlinear { index: usize, b: u32 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    IEta(#[from] IEtaError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("α equation at order {order} depends on a_{order} itself (offset {offset})")]
    NonTriangular { order: u32, offset: i32 },
    #[error("iterate {iteration} changed the coefficients of order {order}")]
    NoStabilization { iteration: u32, order: u32 },
}

/// Equation data with validated invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    p: u32,
    l: u32,
    t0: f64,
    t1: f64,
    s: Vec<SMonomial>,
    pm: Vec<PMonomial>,
}

impl ProblemSpec {
    pub fn new(
        p: u32,
        l: u32,
        t0: f64,
        t1: f64,
        s: Vec<SMonomial>,
        pm: Vec<PMonomial>,
    ) -> Result<Self, SpecError> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(SpecError::BadP(p));
        }
        if l % 2 == 1 || l >= p {
            return Err(SpecError::BadL { p, l });
        }
        if !(t0 > 0.0 && t1 > 0.0 && t1 < t0) {
            return Err(SpecError::BadRadii { t0, t1 });
        }
        for (index, m) in s.iter().enumerate() {
            if m.j == 0 {
                return Err(SpecError::SZeroAlphaPower { index });
            }
            let valuation = m.i + m.j * (p - l + 1);
            if valuation <= p + 1 {
                return Err(SpecError::SValuation {
                    index,
                    i: m.i,
                    j: m.j,
                    valuation,
                    bound: p + 1,
                });
            }
        }
        for (index, m) in pm.iter().enumerate() {
            if m.b > 1 {
                return Err(SpecError::PNonlinear { index, b: m.b });
            }
        }
        Ok(ProblemSpec { p, l, t0, t1, s, pm })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn s_monomials(&self) -> &[SMonomial] {
        &self.s
    }

    pub fn p_monomials(&self) -> &[PMonomial] {
        &self.pm
    }

    /// ψ table deep enough for an order-K expansion.
    pub fn table(&self, order: u32) -> Result<PsiTable, TableError> {
        PsiTable::new(self.p, self.l, order)
    }

    #[doc(hidden)]
    pub fn table_with_fault(&self, order: u32, fault: Fault) -> Result<PsiTable, TableError> {
        PsiTable::with_fault(self.p, self.l, order, fault)
    }

    fn alpha_scale(&self) -> i32 {
        (self.p - self.l + 1) as i32
    }

    /// S(t, A) numerically.
    pub fn eval_s(&self, t: f64, a: f64) -> f64 {
        self.s
            .iter()
            .map(|m| q_f64(&m.coeff) * t.powi(m.i as i32) * a.powi(m.j as i32))
            .sum()
    }

    /// P(t, U, A, η) numerically.
    pub fn eval_p(&self, t: f64, u: f64, a: f64, eta: f64) -> f64 {
        self.pm
            .iter()
            .map(|m| {
                q_f64(&m.coeff)
                    * t.powi(m.a as i32)
                    * u.powi(m.b as i32)
                    * a.powi(m.c as i32)
                    * eta.powi(m.d as i32)
            })
            .sum()
    }
}

fn q_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Two parts of the right-hand side v of one sweep.
#[derive(Debug, Clone, Default)]
pub struct Rhs {
    /// S(t, η^{p−L+1} α)/η^{p+2}.
    pub s_part: RawSum,
    /// P(t, η u, η^{p−L+1} β, η)/η.
    pub p_part: RawSum,
}

/// Raw right-hand side, keeping only the terms that can reach orders <= K
/// after one application of I_η (which raises ord by at least one).
pub fn rhs_series(
    table: &PsiTable,
    prob: &ProblemSpec,
    alpha: &EtaSeries,
    beta: &EtaSeries,
    u: &FormalSeries,
    order: u32,
) -> Rhs {
    let keep = order as i32 - 1;
    let sc = prob.alpha_scale();
    let p2 = prob.p as i32 + 2;
    let mut rhs = Rhs::default();

    for m in &prob.s {
        let c = ExactConst::from_rational(m.coeff.clone());
        let mut base = RawSum::new();
        base.push(RawTerm::slow(c, m.i, m.j as i32 * sc - p2));
        let pow = alpha.pow_truncated(m.j, order as i32 + 1);
        let mut part = base.times_series(&pow);
        part.retain_ord(table, keep);
        rhs.s_part.extend(&part);
    }

    let u_raw = u_to_raw(table, &u.u_part());
    for m in &prob.pm {
        let c = ExactConst::from_rational(m.coeff.clone());
        let shift = m.c as i32 * sc + m.d as i32 - 1;
        let mut base = RawSum::new();
        if m.b == 0 {
            base.push(RawTerm::slow(c, m.a, shift));
        } else {
            base = u_raw.times(&c, m.a, shift + 1);
        }
        let pow = beta.pow_truncated(m.c, order as i32 + 1);
        let mut part = base.times_series(&pow);
        part.retain_ord(table, keep);
        rhs.p_part.extend(&part);
    }
    rhs
}

/// η-offset with which S monomial m feeds back into α:
/// i + j(p−L+1) − p − 1.
fn s_offset(prob: &ProblemSpec, m: &SMonomial) -> i32 {
    m.i as i32 + m.j as i32 * prob.alpha_scale() - prob.p as i32 - 1
}

/// Solve α = η^{L+1} λ_{P-part} + Σ_S coeff c_i η^{offset} α^j order by
/// order up to K.
pub fn alpha_solve(
    table: &PsiTable,
    prob: &ProblemSpec,
    lambda_p: &EtaSeries,
    order: u32,
) -> Result<EtaSeries, EngineError> {
    let base = lambda_p.shift(prob.l as i32 + 1);
    if let Some(n) = base.min_power() {
        if n < 0 {
            return Err(AlgebraError::NegativeOrderTerm { order: n }.into());
        }
    }
    let base = base.truncate(order as i32);
    for m in &prob.s {
        let offset = s_offset(prob, m);
        if offset < 1 {
            return Err(EngineError::NonTriangular { order: 0, offset });
        }
    }
    let mut alpha = base.clone();
    for _ in 0..=order {
        let mut next = base.clone();
        for m in &prob.s {
            let c = ExactConst::from_rational(m.coeff.clone()) * table.c(m.i);
            let pow = alpha.pow_truncated(m.j, order as i32);
            for (n, v) in pow.shift(s_offset(prob, m)).truncate(order as i32).iter() {
                next.add(n, &(&c * v));
            }
        }
        if next == alpha {
            break;
        }
        alpha = next;
    }
    Ok(alpha)
}

/// One sweep Ξ_K: (β, u) ↦ (α, I_η(v)) in A_K.
pub fn xi_apply(
    table: &PsiTable,
    prob: &ProblemSpec,
    state: &FormalSeries,
    order: u32,
) -> Result<FormalSeries, EngineError> {
    let beta = alpha_to_eta(state);
    let u = state.u_part();
    let pre = rhs_series(table, prob, &EtaSeries::new(), &beta, &u, order);
    let (u_p, lambda_p) = apply_i(table, &pre.p_part, order)?;
    let alpha = alpha_solve(table, prob, &lambda_p, order)?;
    let rhs = rhs_series(table, prob, &alpha, &beta, &u, order);
    let (u_s, _) = apply_i(table, &rhs.s_part, order)?;

    let mut out = FormalSeries::zero(order);
    out.add_truncated(&u_p);
    out.add_truncated(&u_s);
    for (n, a) in alpha.iter() {
        out.add_scalar(n as u32, a)?;
    }
    Ok(out)
}

/// Outcome of [`expand`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult {
    pub alpha_series: Vec<(u32, ExactConst)>,
    pub u_series: FormalSeries,
    pub order: u32,
    pub iterations_used: u32,
    /// Full (α, u) state of the final iterate.
    pub state: FormalSeries,
}

impl ExpansionResult {
    /// α coefficient a_n (zero when absent).
    pub fn a(&self, n: u32) -> ExactConst {
        self.alpha_series
            .iter()
            .find(|(m, _)| *m == n)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }
}

/// Iterates Ξ_K from zero K+2 times and returns every iterate, checking
/// that iterate N+1 agrees with iterate N through order N−1.
pub fn expand_with_history(
    table: &PsiTable,
    prob: &ProblemSpec,
    order: u32,
) -> Result<Vec<FormalSeries>, EngineError> {
    let mut history = vec![FormalSeries::zero(order)];
    for it in 1..=order + 2 {
        let next = xi_apply(table, prob, history.last().unwrap(), order)?;
        let prev_n = it - 1;
        if prev_n >= 1 {
            let settled = prev_n - 1;
            if next.project(settled) != history[prev_n as usize].project(settled) {
                let bad = first_difference(&next, &history[prev_n as usize], settled);
                return Err(EngineError::NoStabilization { iteration: it, order: bad });
            }
        }
        history.push(next);
    }
    Ok(history)
}

fn first_difference(a: &FormalSeries, b: &FormalSeries, upto: u32) -> u32 {
    (0..=upto)
        .find(|&n| a.element(n) != b.element(n))
        .unwrap_or(upto)
}

/// The order-K expansion of `prob` with the given ψ table.
pub fn expand_with_table(
    table: &PsiTable,
    prob: &ProblemSpec,
    order: u32,
) -> Result<ExpansionResult, EngineError> {
    let history = expand_with_history(table, prob, order)?;
    let n = history.len();
    let (last, before) = (&history[n - 1], &history[n - 2]);
    if last != before {
        let bad = first_difference(last, before, order);
        return Err(EngineError::NoStabilization { iteration: n as u32 - 1, order: bad });
    }
    last.check_shape(table)?;
    Ok(ExpansionResult {
        alpha_series: last.alpha_coeffs(),
        u_series: last.u_part(),
        order,
        iterations_used: order + 2,
        state: last.clone(),
    })
}

/// The order-K expansion of `prob`.
pub fn expand(prob: &ProblemSpec, order: u32) -> Result<ExpansionResult, EngineError> {
    let table = prob.table(order)?;
    expand_with_table(&table, prob, order)
}

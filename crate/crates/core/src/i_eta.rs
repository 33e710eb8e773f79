//! Formal rewriting of the bounded-solution operator I_η and of the
//! solvability constants λ.
//!
//! For a right-hand side v, w = I_η(v) is the solution of
//!
//! ```text
//! η^{p+1} w' − (p+1) t^p w = η^{p+1} (v + λ_v t^L)
//! ```
//!
//! that stays bounded through the turning point, λ_v being the unique
//! constant that makes that possible.

use crate::psi::PsiTable;
use crate::term_algebra::raw::{normalize_into, EtaSeries, RawKey, RawSum, RawTerm};
use crate::term_algebra::{AlgebraError, ExactConst, FormalSeries};

/// Bound on the number of nested X^{j} → X^{j−p−1} reductions.
pub const MAX_REDUCTION_DEPTH: u32 = 512;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IEtaError {
    #[error("I_η(X^{power}) needs {depth} reductions, above the bound {MAX_REDUCTION_DEPTH}")]
    RecursionBound { power: u32, depth: u32 },
    #[error("ψ index {k} exceeds p = {p}")]
    PsiIndex { k: u32, p: u32 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// λ = coeff · η^eta_power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaValue {
    pub coeff: ExactConst,
    pub eta_power: i32,
}

impl LambdaValue {
    pub fn zero(eta_power: i32) -> Self {
        LambdaValue {
            coeff: ExactConst::zero(),
            eta_power,
        }
    }

    /// δ_v = λ_v η^{p+1}.
    pub fn delta(&self, p: u32) -> LambdaValue {
        LambdaValue {
            coeff: self.coeff.clone(),
            eta_power: self.eta_power + p as i32 + 1,
        }
    }

    pub fn value(&self, eta: f64) -> f64 {
        self.coeff.to_f64() * eta.powi(self.eta_power)
    }
}

/// I_η(X^j) as raw monomials.
pub fn i_power(table: &PsiTable, j: u32) -> Result<RawSum, IEtaError> {
    let q = table.p() + 1;
    let depth = j / q;
    if depth > MAX_REDUCTION_DEPTH {
        return Err(IEtaError::RecursionBound { power: j, depth });
    }
    let mut out = RawSum::new();
    i_power_into(table, j, &ExactConst::one(), 0, &mut out);
    Ok(out)
}

/// Adds coeff · η^shift · I_η(X^j) to `out`.
fn i_power_into(table: &PsiTable, j: u32, coeff: &ExactConst, shift: i32, out: &mut RawSum) {
    let p = table.p();
    let q = p + 1;
    if j == table.l() || coeff.is_zero() {
        return;
    }
    if j == p {
        let c = coeff * &ExactConst::from_ratio(-1, q as i64);
        out.push(RawTerm::slow(c, 0, shift + q as i32));
        return;
    }
    if j < p {
        out.push(RawTerm::with_psi(coeff.clone(), 0, j, shift + j as i32 + 1));
        return;
    }
    // I(X^j) = η^{p+1}/(p+1) · ((j−p) I(X^{j−p−1}) − t^{j−p})
    let inv_q = ExactConst::from_ratio(1, q as i64);
    let down = coeff * &(&inv_q * &ExactConst::from_int((j - p) as i64));
    i_power_into(table, j - q, &down, shift + q as i32, out);
    out.push(RawTerm::slow(-(coeff * &inv_q), j - p, shift + q as i32));
}

/// λ of a single raw monomial.
pub fn lambda_of(table: &PsiTable, key: &RawKey, coeff: &ExactConst) -> LambdaValue {
    let l = table.l() as i32;
    match key.psi {
        None => LambdaValue {
            coeff: coeff * &table.c(key.t_pow),
            eta_power: key.t_pow as i32 - l + key.eta_pow,
        },
        Some(k) if k == table.l() => LambdaValue::zero(key.t_pow as i32 - l + key.eta_pow),
        Some(k) if k >= table.p() => {
            // ψ_p is the constant −1/(p+1)
            let c = coeff * &ExactConst::from_ratio(-1, table.p() as i64 + 1);
            LambdaValue {
                coeff: &c * &table.c(key.t_pow),
                eta_power: key.t_pow as i32 - l + key.eta_pow,
            }
        }
        Some(k) => {
            let g_l = crate::special_fn::even_moment(table.p(), table.l());
            let m = table
                .psi_moment(key.t_pow, k)
                .div_monomial(&g_l)
                .expect("G(L) is a single Γ monomial");
            LambdaValue {
                coeff: -(coeff * &m),
                eta_power: key.t_pow as i32 - l + key.eta_pow,
            }
        }
    }
}

/// I_η of a single raw monomial, as raw monomials.
pub fn i_term(table: &PsiTable, key: &RawKey, coeff: &ExactConst) -> Result<RawSum, IEtaError> {
    let mut out = RawSum::new();
    let (i, l) = (key.t_pow, key.eta_pow);
    match key.psi {
        None => {
            let base = i_power(table, i)?;
            out.extend(&base.times(coeff, 0, l));
        }
        Some(k) if k == table.l() => {}
        Some(k) if k == table.p() => {
            let c = coeff * &ExactConst::from_ratio(-1, table.p() as i64 + 1);
            out.extend(&i_power(table, i)?.times(&c, 0, l));
        }
        Some(k) if k > table.p() => {
            return Err(IEtaError::PsiIndex { k, p: table.p() });
        }
        Some(k) => {
            // t^i ψ_k η^l = η^{l−k−1} · X^i I(X^k)
            let scale = ExactConst::from_ratio(1, i as i64 + 1);
            let prod = i_product_raw(table, i, k)?;
            out.extend(&prod.times(&(coeff * &scale), 0, l - k as i32 - 1));
        }
    }
    Ok(out)
}

/// (i+1) · I_η(X^i · I_η(X^k)) as raw monomials.
fn i_product_raw(table: &PsiTable, i: u32, k: u32) -> Result<RawSum, IEtaError> {
    let mut out = RawSum::new();
    out.push(RawTerm::with_psi(ExactConst::one(), i + 1, k, k as i32 + 1));
    out.extend(&i_power(table, i + k + 1)?.times(&ExactConst::from_int(-1), 0, 0));
    let lam = -table.c(k);
    out.extend(&i_power(table, i + table.l() + 1)?.times(&lam, 0, k as i32 - table.l() as i32));
    Ok(out)
}

/// I_η(X^i · I_η(X^k)) in graded form, with its λ.
pub fn i_product(
    table: &PsiTable,
    i: u32,
    inner_k: u32,
) -> Result<(FormalSeries, LambdaValue), IEtaError> {
    if inner_k > table.p() {
        return Err(IEtaError::PsiIndex { k: inner_k, p: table.p() });
    }
    let mut raw = i_product_raw(table, i, inner_k)?;
    raw = raw.times(&ExactConst::from_ratio(1, i as i64 + 1), 0, 0);
    let mut out = FormalSeries::zero(u32::MAX);
    normalize_into(table, &raw, &mut out)?;
    let key = RawKey {
        t_pow: i,
        eta_pow: inner_k as i32 + 1,
        psi: Some(inner_k),
    };
    Ok((out, lambda_of(table, &key, &ExactConst::one())))
}

/// λ of a raw sum, collected per η-power.
pub fn lambda_series(table: &PsiTable, v: &RawSum) -> EtaSeries {
    let mut lam = EtaSeries::new();
    for (key, c) in v.iter() {
        let lv = lambda_of(table, key, c);
        lam.add(lv.eta_power, &lv.coeff);
    }
    lam
}

/// Termwise I_η and λ of a raw sum. The image is bracket-reduced and
/// truncated to `order`; λ is returned untruncated.
pub fn apply_i(
    table: &PsiTable,
    v: &RawSum,
    order: u32,
) -> Result<(FormalSeries, EtaSeries), IEtaError> {
    let mut image = RawSum::new();
    for (key, c) in v.iter() {
        image.extend(&i_term(table, key, c)?);
    }
    let mut out = FormalSeries::zero(order);
    normalize_into(table, &image, &mut out)?;
    Ok((out, lambda_series(table, v)))
}

/// |D_η(ũ)(t) − ṽ(t) − λ̃ t^L| with D_η(u) = u' − (p+1) t^p u / η^{p+1},
/// evaluated with analytic ψ derivatives.
pub fn d_eta_check(
    table: &PsiTable,
    u: &FormalSeries,
    v: &RawSum,
    lambda: &EtaSeries,
    t: f64,
    eta: f64,
) -> Result<f64, crate::psi::PsiError> {
    let p = table.p() as i32;
    let (uval, du) = u.compile().eval_u(table, t, eta)?;
    let d = du - (p + 1) as f64 * t.powi(p) * uval / eta.powi(p + 1);
    let rhs = v.eval(table, t, eta) + lambda.eval(eta) * t.powi(table.l() as i32);
    Ok((d - rhs).abs())
}

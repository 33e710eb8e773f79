//! Basis-recovery fit for A_K and the Gram-matrix independence test of the
//! ψ_k.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::psi::{PsiError, PsiTable};
use crate::term_algebra::random::{basis_slots, random_element, set_slot, BasisSlot, RandomShape};
use crate::term_algebra::{ExactConst, FormalSeries};

pub const FREENESS_TOL: f64 = 1e-6;
pub const CONDITION_GUARD: f64 = 1e10;
pub const GRAM_CONDITION_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FitStatus {
    Passed,
    Failed,
    /// Condition number above the guard: inconclusive.
    IllConditioned,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FreenessOutcome {
    pub max_error: f64,
    pub condition: f64,
    pub n_basis: usize,
    pub n_samples: usize,
    pub status: FitStatus,
}

/// Sampling of the (t, η) plane for the fit.
#[derive(Debug, Clone)]
pub struct FitSamples {
    pub etas: Vec<f64>,
    pub t_points: usize,
    pub t1: f64,
    pub max_slow_power: u32,
}

impl Default for FitSamples {
    fn default() -> Self {
        FitSamples {
            etas: vec![0.5, 0.4, 0.3, 0.25, 0.2, 0.15],
            t_points: 41,
            t1: 1.0,
            max_slow_power: 3,
        }
    }
}

fn slot_value(table: &PsiTable, slot: BasisSlot, t: f64, eta: f64) -> Result<f64, PsiError> {
    let (n, kind) = slot;
    let en = eta.powi(n as i32);
    Ok(match kind {
        None => en,
        Some((i, None)) => en * t.powi(i as i32),
        Some((i, Some(k))) => en * table.psi_bar_eval(i, k, t / eta)?,
    })
}

fn slot_coefficient(s: &FormalSeries, slot: BasisSlot) -> f64 {
    let (n, kind) = slot;
    let Some(e) = s.element(n) else { return 0.0 };
    match kind {
        None => e.a.to_f64(),
        Some((i, None)) => e.slow.get(&i).map_or(0.0, ExactConst::to_f64),
        Some((i, Some(k))) => e.fast.get(&(i, k)).map_or(0.0, ExactConst::to_f64),
    }
}

/// Evaluates the u-part of `element` on the sample set, refits every basis
/// coefficient of A_K by least squares and reports the largest error.
pub fn fit_element(
    table: &PsiTable,
    element: &FormalSeries,
    order: u32,
    samples: &FitSamples,
) -> Result<FreenessOutcome, PsiError> {
    let slots = basis_slots(table, order, samples.max_slow_power, false);
    let t_grid = super::residual::symmetric_grid(samples.t1, samples.t_points);
    let points: Vec<(f64, f64)> = samples
        .etas
        .iter()
        .flat_map(|&e| t_grid.iter().map(move |&t| (t, e)))
        .collect();
    let compiled = element.compile();
    let mut a = DMatrix::<f64>::zeros(points.len(), slots.len());
    let mut b = DVector::<f64>::zeros(points.len());
    for (r, &(t, eta)) in points.iter().enumerate() {
        for (c, &slot) in slots.iter().enumerate() {
            a[(r, c)] = slot_value(table, slot, t, eta)?;
        }
        b[r] = compiled.eval_u(table, t, eta)?.0;
    }
    let norms: Vec<f64> = (0..slots.len()).map(|c| a.column(c).norm().max(1e-300)).collect();
    for (c, n) in norms.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / n);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let solution = svd.solve(&b, 0.0).expect("SVD with both factors");
    let mut max_error: f64 = 0.0;
    for (c, &slot) in slots.iter().enumerate() {
        let fitted = solution[c] / norms[c];
        max_error = max_error.max((fitted - slot_coefficient(element, slot)).abs());
    }
    let status = if condition >= CONDITION_GUARD {
        FitStatus::IllConditioned
    } else if max_error <= FREENESS_TOL {
        FitStatus::Passed
    } else {
        FitStatus::Failed
    };
    Ok(FreenessOutcome {
        max_error,
        condition,
        n_basis: slots.len(),
        n_samples: points.len(),
        status,
    })
}

/// Random A_K element (coefficients in [−1, 1], every slot populated) and
/// its refit.
pub fn freeness_fit(
    order: u32,
    p: u32,
    l: u32,
    seed: u64,
    samples: &FitSamples,
) -> Result<FreenessOutcome, Box<dyn std::error::Error + Send + Sync>> {
    let table = PsiTable::new(p, l, order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = RandomShape {
        density: 1.0,
        denominator: 64,
        max_slow_power: samples.max_slow_power,
        with_alpha: false,
    };
    let element = random_element(&mut rng, &table, order, shape);
    Ok(fit_element(&table, &element, order, samples)?)
}

/// One-slot element with coefficient 1.
pub fn single_slot_element(order: u32, slot: BasisSlot) -> FormalSeries {
    let mut s = FormalSeries::zero(order);
    set_slot(&mut s, slot, &ExactConst::one());
    s
}

/// Condition number and numerical rank of the Gram matrix of
/// {ψ_k : k ≠ L, 0 <= k <= p} sampled on `n` points of [−t_max, t_max].
pub fn gram_condition(table: &PsiTable, n: usize, t_max: f64) -> Result<(f64, usize, usize), PsiError> {
    let ks: Vec<u32> = (0..=table.p()).filter(|&k| k != table.l()).collect();
    let mut a = DMatrix::<f64>::zeros(n, ks.len());
    for r in 0..n {
        let t = -t_max + 2.0 * t_max * r as f64 / (n - 1) as f64;
        for (c, &k) in ks.iter().enumerate() {
            a[(r, c)] = table.psi_eval(k, t)?;
        }
    }
    let gram = a.transpose() * &a;
    let sv = gram.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let rank = sv.iter().filter(|&&s| s > smax * 1e-12).count();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok((cond, rank, ks.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_element_recovers_zero() {
        let t = PsiTable::new(3, 0, 2).unwrap();
        let out = fit_element(&t, &FormalSeries::zero(2), 2, &FitSamples::default()).unwrap();
        assert_eq!(out.max_error, 0.0);
        assert_eq!(out.status, FitStatus::Passed);
    }

    #[test]
    fn single_slot_recovery() {
        let t = PsiTable::new(3, 0, 2).unwrap();
        let s = single_slot_element(2, (1, Some((1, Some(2)))));
        let out = fit_element(&t, &s, 2, &FitSamples::default()).unwrap();
        assert!(out.max_error <= 1e-9, "{out:?}");
    }

    #[test]
    fn random_element_k2() {
        let out = freeness_fit(2, 3, 0, 11, &FitSamples::default()).unwrap();
        assert_eq!(out.status, FitStatus::Passed, "{out:?}");
    }

    #[test]
    fn gram_is_well_conditioned() {
        for (p, l) in [(3, 0), (3, 2), (5, 2)] {
            let t = PsiTable::new(p, l, 2).unwrap();
            let (cond, rank, n) = gram_condition(&t, 400, 4.0).unwrap();
            assert_eq!(rank, n);
            assert!(cond < GRAM_CONDITION_LIMIT, "p={p} L={l}: {cond:e}");
        }
    }
}

//! Random A_K elements for property tests and the freeness fit.

use num_rational::BigRational;
use rand::Rng;

use super::exact::ExactConst;
use super::series::FormalSeries;
use crate::psi::PsiTable;

/// Shape of a random element.
#[derive(Debug, Clone, Copy)]
pub struct RandomShape {
    /// Probability that a given basis slot is populated.
    pub density: f64,
    /// Coefficients are k/denominator with |k| <= denominator.
    pub denominator: i64,
    /// Highest slow t-power per order.
    pub max_slow_power: u32,
    pub with_alpha: bool,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape {
            density: 0.5,
            denominator: 16,
            max_slow_power: 3,
            with_alpha: true,
        }
    }
}

fn coeff<R: Rng>(rng: &mut R, den: i64) -> ExactConst {
    let mut k = 0;
    while k == 0 {
        k = rng.gen_range(-den..=den);
    }
    ExactConst::from_rational(BigRational::new(k.into(), den.into()))
}

/// Every basis slot of A_K: (n, None) for α, (n, Some((i, None))) for t^i,
/// (n, Some((i, Some(k)))) for ψ̄_{i,k}.
pub type BasisSlot = (u32, Option<(u32, Option<u32>)>);

pub fn basis_slots(table: &PsiTable, order: u32, max_slow_power: u32, with_alpha: bool) -> Vec<BasisSlot> {
    let mut out = Vec::new();
    for n in 0..=order {
        if with_alpha {
            out.push((n, None));
        }
        for i in 0..=max_slow_power {
            out.push((n, Some((i, None))));
        }
        for i in 0..=n {
            for k in table.fast_indices() {
                out.push((n, Some((i, Some(k)))));
            }
        }
    }
    out
}

/// Put `c` into the given slot.
pub fn set_slot(s: &mut FormalSeries, slot: BasisSlot, c: &ExactConst) {
    let r = match slot {
        (n, None) => s.add_scalar(n, c),
        (n, Some((i, None))) => s.add_slow(n, i, c),
        (n, Some((i, Some(k)))) => s.add_fast(n, i, k, c),
    };
    r.expect("basis slots respect the A_K shape");
}

pub fn random_element<R: Rng>(rng: &mut R, table: &PsiTable, order: u32, shape: RandomShape) -> FormalSeries {
    let mut s = FormalSeries::zero(order);
    for slot in basis_slots(table, order, shape.max_slow_power, shape.with_alpha) {
        if rng.gen_bool(shape.density) {
            set_slot(&mut s, slot, &coeff(rng, shape.denominator));
        }
    }
    s
}

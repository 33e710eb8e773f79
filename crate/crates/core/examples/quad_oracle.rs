//! Formal I_η(t^k) against direct quadrature of the bounded-solution
//! integral.

use canard::i_eta::apply_i;
use canard::psi::PsiTable;
use canard::term_algebra::{ExactConst, RawSum, RawTerm};
use canard::validator::{quad_i, sup_relative_deviation, QuadConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = PsiTable::new(5, 2, 4)?;
    let grid: Vec<f64> = (0..=16).map(|j| -0.8 + 0.1 * j as f64).collect();
    let cfg = QuadConfig::default();
    for k in [0u32, 1, 4, 7, 12] {
        let mut v = RawSum::new();
        v.push(RawTerm::slow(ExactConst::one(), k, 0));
        let (image, lambda) = apply_i(&table, &v, u32::MAX)?;
        let compiled = image.compile();
        for eta in [0.5, 0.125] {
            let quad = quad_i(|y| y.powi(k as i32), 5, 2, eta, &grid, &cfg)?;
            let formal: Vec<f64> = grid
                .iter()
                .map(|&t| compiled.eval_u(&table, t, eta).map(|x| x.0))
                .collect::<Result<_, _>>()?;
            println!(
                "k = {k:>2}, eta = {eta:<5}: deviation {:.2e}, lambda {:.10e} vs {:.10e}",
                sup_relative_deviation(&formal, &quad.values),
                lambda.eval(eta),
                quad.lambda
            );
        }
    }
    Ok(())
}

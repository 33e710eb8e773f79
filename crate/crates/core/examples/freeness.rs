//! Least-squares recovery of every coefficient of random A_2 elements from
//! point samples, and the Gram conditioning of the ψ_k.

use canard::psi::PsiTable;
use canard::validator::freeness::{freeness_fit, gram_condition, FitSamples};

fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let samples = FitSamples::default();
    for seed in 1..=4 {
        let out = freeness_fit(2, 3, 0, seed, &samples)?;
        println!(
            "seed {seed}: {} basis functions, {} samples, max error {:.2e}, condition {:.2e}, {:?}",
            out.n_basis, out.n_samples, out.max_error, out.condition, out.status
        );
    }
    for (p, l) in [(3, 0), (3, 2), (5, 2)] {
        let table = PsiTable::new(p, l, 2)?;
        let (cond, rank, n) = gram_condition(&table, 400, 4.0)?;
        println!("Gram of psi_k, p = {p}, L = {l}: rank {rank}/{n}, condition {cond:.3e}");
    }
    Ok(())
}

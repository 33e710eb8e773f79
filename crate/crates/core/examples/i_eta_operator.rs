//! Formal I_η on powers and ψ-products, with the solvability constant λ and
//! a numerical check of η^{p+1} w' − (p+1) t^p w = η^{p+1}(v + λ_v t^L).

use canard::i_eta::{apply_i, d_eta_check, i_product};
use canard::psi::PsiTable;
use canard::term_algebra::{ExactConst, RawSum, RawTerm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = PsiTable::new(3, 0, 8)?;
    for j in [0u32, 1, 3, 5] {
        let mut v = RawSum::new();
        v.push(RawTerm::slow(ExactConst::one(), j, 0));
        let (w, lambda) = apply_i(&table, &v, 8)?;
        let lam: Vec<String> = lambda.iter().map(|(n, c)| format!("{c}·η^{n}")).collect();
        println!("I(t^{j}): {} graded orders, λ = [{}]", w.elements().count(), lam.join(", "));
        for (t, eta) in [(0.4, 0.25), (-0.2, 0.125)] {
            let r = d_eta_check(&table, &w, &v, &lambda, t, eta)?;
            println!("    defect at t = {t:>5}, eta = {eta}: {r:.2e}");
        }
    }

    let (w, lambda) = i_product(&table, 1, 2)?;
    println!(
        "\nI(t ψ_2(t/η) η^3): {} graded orders, λ = {}·η^{}",
        w.elements().count(),
        lambda.coeff,
        lambda.eta_power
    );
    Ok(())
}

//! ψ_k for (p, L) = (3, 2): the constants c_k, values with their parity,
//! the tail coefficients ρ and the moments M_{i,k}.

use canard::psi::PsiTable;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = PsiTable::new(3, 2, 4)?;
    for k in 0..=table.p() {
        println!("c_{k} = {}", table.c(k));
    }

    println!("\n   T      psi_0        psi_1        psi_3");
    for t in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        println!(
            "{t:>5.1} {:>12.8} {:>12.8} {:>12.8}",
            table.psi_eval(0, t)?,
            table.psi_eval(1, t)?,
            table.psi_eval(3, t)?
        );
    }

    println!("\ntails ψ_k(T) ~ Σ ρ_(k,−n) T^(−n):");
    for k in table.fast_indices() {
        let (n, rho) = table.leading_tail(k);
        println!("  k = {k}: first nonzero term {rho:.6} T^-{n}, ρ_(k,−{n}) = {}", table.rho(k, n));
    }

    println!("\nmoments M_(i,k) = ∫ s^i ψ_k(s) e^(−s^4) ds:");
    for k in table.fast_indices() {
        let row: Vec<String> = (0..=3).map(|i| format!("{:>10.6}", table.psi_moment_f64(i, k))).collect();
        println!("  k = {k}: {}", row.join(" "));
    }
    Ok(())
}

//! Graded normal form: raw monomials t^i ψ_k(t/η) η^l are rewritten as
//! bracketed fast terms ψ̄_{i,k} plus slow polynomial corrections, sorted
//! by order, and evaluate to the same function.

use canard::psi::PsiTable;
use canard::term_algebra::raw::normalize_into;
use canard::term_algebra::{ord, ExactConst, FormalSeries, RawSum, RawTerm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = PsiTable::new(3, 0, 6)?;
    let mut raw = RawSum::new();
    raw.push(RawTerm::with_psi(ExactConst::from_int(2), 3, 1, 0));
    raw.push(RawTerm::with_psi(ExactConst::one(), 1, 2, 1));
    raw.push(RawTerm::with_psi(ExactConst::from_ratio(1, 2), 0, 3, 0));
    raw.push(RawTerm::slow(ExactConst::from_ratio(-1, 3), 2, 2));
    for (key, c) in raw.iter() {
        println!("raw {c} · {key:?}  (order {})", ord(&table, key));
    }

    let mut series = FormalSeries::zero(6);
    normalize_into(&table, &raw, &mut series)?;
    for e in series.elements() {
        println!("\norder {}:", e.n);
        for (i, c) in &e.slow {
            println!("  slow  t^{i}          {c}");
        }
        for ((i, k), c) in &e.fast {
            println!("  fast  psibar_({i},{k})   {c}");
        }
    }

    let compiled = series.compile();
    for (t, eta) in [(0.3, 0.2), (-0.7, 0.1)] {
        let direct = raw.eval(&table, t, eta);
        let (graded, _) = compiled.eval_u(&table, t, eta)?;
        println!("\nt = {t}, eta = {eta}: raw {direct:.15e}, graded {graded:.15e}");
    }
    Ok(())
}

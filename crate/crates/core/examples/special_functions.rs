//! Γ at rational arguments, the scaled incomplete Gamma function and the
//! exact even moments G(m) = ∫ s^m e^{−s^{p+1}} ds.

use canard::special_fn::{even_moment, gamma_complete, gamma_incomplete_scaled, GammaArg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (n, d) in [(1, 4), (1, 2), (3, 4), (5, 4)] {
        let m = GammaArg::from_parts(n, d)?;
        println!("Gamma({n}/{d}) = {:.15}", gamma_complete(m)?);
    }

    println!("\ne^u Gamma(m, u) for m = 1/4:");
    for u in [0.0, 0.5, 2.0, 10.0, 100.0] {
        println!("  u = {u:>6}: {:.12e}", gamma_incomplete_scaled(0.25, u)?);
    }

    println!("\neven moments for p = 3:");
    for m in (0..=6).step_by(2) {
        let g = even_moment(3, m);
        println!("  G({m}) = {g}  ~ {:.12}", g.to_f64());
    }
    Ok(())
}

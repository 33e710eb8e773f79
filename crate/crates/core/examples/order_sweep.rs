//! Residual of truncated expansions over η and the fitted accuracy order,
//! for K = 0..4.

use canard::validator::{order_sweep, EvalConfig};
use canard::{PMonomial, ProblemSpec, SMonomial};
use num_rational::BigRational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let prob = ProblemSpec::new(
        3,
        2,
        2.0,
        1.0,
        vec![SMonomial { i: 3, j: 1, coeff: q(1, 1) }],
        vec![
            PMonomial { a: 0, b: 0, c: 0, d: 0, coeff: q(1, 1) },
            PMonomial { a: 1, b: 1, c: 0, d: 0, coeff: q(1, 2) },
        ],
    )?;
    let cfg = EvalConfig::default();
    for k in 0..=4 {
        let report = order_sweep(&prob, k, &cfg);
        let residuals: Vec<String> = report.per_eta_residual.iter().map(|(_, r)| format!("{r:.2e}")).collect();
        println!(
            "K = {k}: slope {:>6.3} (need >= {:.1}), r^2 {:.5}, residuals [{}] {}",
            report.slope.unwrap_or(f64::NAN),
            k as f64 + 0.7,
            report.slope_r2.unwrap_or(f64::NAN),
            residuals.join(", "),
            if report.all_passed() { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}

//! Oracle-equivalence and identity checks across the ψ, I_η and engine
//! layers, aggregated into one report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::freeness::{gram_condition, GRAM_CONDITION_LIMIT};
use super::quad::{integrate_pieces, QuadConfig};
use super::quad_i::{quad_i, weighted_integral};
use super::report::{Check, ValidationReport};
use crate::i_eta::{apply_i, d_eta_check, i_product};
use crate::psi::{Fault, PsiTable};
use crate::term_algebra::raw::{RawSum, RawTerm};
use crate::term_algebra::{ExactConst, FormalSeries};

pub const IDENTITY_TOL: f64 = 1e-12;
pub const QUAD_IDENTITY_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-7;
pub const DERIV_TOL: f64 = 1e-7;
pub const MOMENT_TOL: f64 = 1e-8;
pub const TAIL_LEAD_TOL: f64 = 1e-3;
pub const TAIL_SERIES_TOL: f64 = 1e-9;

/// Grid and η choices shared by the oracle checks.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub etas: Vec<f64>,
    pub t_max: f64,
    pub t_points: usize,
    pub quad: QuadConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            etas: vec![0.5, 0.25, 0.125],
            t_max: 0.8,
            t_points: 17,
            quad: QuadConfig::default(),
        }
    }
}

impl OracleConfig {
    pub fn grid(&self) -> Vec<f64> {
        super::residual::symmetric_grid(self.t_max, self.t_points)
    }
}

fn tag(table: &PsiTable, name: &str) -> String {
    format!("{name} (p={}, L={})", table.p(), table.l())
}

/// ψ_L ≡ 0 and ψ_p ≡ −1/(p+1) on 201 points of [−6, 6]; I_η(y^L) ≡ 0 and
/// I_η(y^p) ≡ −η^{p+1}/(p+1) by quadrature.
pub fn identity_checks(table: &PsiTable, etas: &[f64], quad: &QuadConfig) -> Vec<Check> {
    let (p, l) = (table.p(), table.l());
    let q = (p + 1) as f64;
    let mut dev_l: f64 = 0.0;
    let mut dev_p: f64 = 0.0;
    for j in 0..201 {
        let t = -6.0 + 0.06 * j as f64;
        match (table.psi_eval(l, t), table.psi_eval(p, t)) {
            (Ok(a), Ok(b)) => {
                dev_l = dev_l.max(a.abs());
                dev_p = dev_p.max((b + 1.0 / q).abs());
            }
            _ => return vec![Check::failed(tag(table, "psi_identities"), "ψ evaluation failed")],
        }
    }
    let mut out = vec![
        Check::at_most(tag(table, "psi_L_zero"), dev_l, IDENTITY_TOL),
        Check::at_most(tag(table, "psi_p_constant"), dev_p, IDENTITY_TOL),
    ];
    let grid = super::residual::symmetric_grid(0.8, 17);
    let mut dev_il: f64 = 0.0;
    let mut dev_ip: f64 = 0.0;
    for &eta in etas {
        let il = quad_i(|y| y.powi(l as i32), p, l, eta, &grid, quad);
        let ip = quad_i(|y| y.powi(p as i32), p, l, eta, &grid, quad);
        match (il, ip) {
            (Ok(a), Ok(b)) => {
                let target = -eta.powi(p as i32 + 1) / q;
                dev_il = a.values.iter().fold(dev_il, |m, v| m.max(v.abs()));
                dev_ip = b.values.iter().fold(dev_ip, |m, v| m.max((v - target).abs()));
            }
            (Err(e), _) | (_, Err(e)) => {
                out.push(Check::failed(tag(table, "quad_identities"), e.to_string()));
                return out;
            }
        }
    }
    out.push(Check::at_most(tag(table, "quad_I_power_L_zero"), dev_il, QUAD_IDENTITY_TOL));
    out.push(Check::at_most(tag(table, "quad_I_power_p_constant"), dev_ip, QUAD_IDENTITY_TOL));
    out
}

/// Analytic ψ_k' against a central difference with step 1e−5 on 201 points
/// of [−5, 5], all k in 0..=p.
pub fn psi_derivative_check(table: &PsiTable) -> Check {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..=table.p() {
        for j in 0..201 {
            let t = -5.0 + 0.05 * j as f64;
            let analytic = table.psi_deriv(k, t);
            let fd = table
                .psi_eval(k, t + h)
                .and_then(|a| table.psi_eval(k, t - h).map(|b| (a - b) / (2.0 * h)));
            match (analytic, fd) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
                _ => return Check::failed(tag(table, "psi_derivative"), "ψ evaluation failed"),
            }
        }
    }
    Check::at_most(tag(table, "psi_derivative"), worst, DERIV_TOL)
}

/// Formal image against quadrature at every η; returns the worst sup
/// relative deviation of the values and the worst λ deviation.
fn compare_with_quad<V: Fn(f64, f64) -> f64 + Sync>(
    table: &PsiTable,
    formal: &FormalSeries,
    lambda_formal: &(dyn Fn(f64) -> f64 + Sync),
    v: V,
    cfg: &OracleConfig,
) -> Result<(f64, f64), String> {
    let grid = cfg.grid();
    let compiled = formal.compile();
    let results: Vec<Result<(f64, f64), String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .etas
            .iter()
            .map(|&eta| {
                let (grid, compiled, v) = (&grid, &compiled, &v);
                scope.spawn(move || {
                    let q = quad_i(|y| v(y, eta), table.p(), table.l(), eta, grid, &cfg.quad)
                        .map_err(|e| e.to_string())?;
                    let mut f = Vec::with_capacity(grid.len());
                    for &t in grid {
                        f.push(compiled.eval_u(table, t, eta).map_err(|e| e.to_string())?.0);
                    }
                    let lam_ref = q.lambda;
                    let lam_dev = (lambda_formal(eta) - lam_ref).abs() / lam_ref.abs().max(1.0);
                    // Below this size the quadrature value is cancellation
                    // noise and cannot certify a relative error.
                    let resolvable = eta * grid.iter().map(|&t| v(t, eta).abs()).fold(0.0, f64::max) * cfg.quad.rel_tol
                        / ORACLE_TOL;
                    let num = f.iter().zip(&q.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    let den = q.values.iter().map(|b| b.abs()).fold(resolvable, f64::max);
                    let dev = if den == 0.0 { num } else { num / den };
                    Ok((dev, lam_dev))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle worker")).collect()
    });
    let mut worst = (0.0f64, 0.0f64);
    for r in results {
        let (a, b) = r?;
        worst = (worst.0.max(a), worst.1.max(b));
    }
    Ok(worst)
}

/// I_η(X^k) for k <= 2p+2 against quadrature (values and λ).
pub fn i_power_oracle(table: &PsiTable, cfg: &OracleConfig) -> Vec<Check> {
    let mut worst = (0.0f64, 0.0f64);
    let mut worst_k = 0;
    for k in 0..=2 * table.p() + 2 {
        let mut v = RawSum::new();
        v.push(RawTerm::slow(ExactConst::one(), k, 0));
        let (image, lam) = match apply_i(table, &v, u32::MAX) {
            Ok(x) => x,
            Err(e) => return vec![Check::failed(tag(table, "I_power_oracle"), e.to_string())],
        };
        let lam_f = |eta: f64| lam.eval(eta);
        match compare_with_quad(table, &image, &lam_f, |y, _| y.powi(k as i32), cfg) {
            Ok((a, b)) => {
                if a > worst.0 {
                    worst_k = k;
                }
                worst = (worst.0.max(a), worst.1.max(b));
            }
            Err(e) => return vec![Check::failed(tag(table, "I_power_oracle"), e)],
        }
    }
    vec![
        Check::at_most(tag(table, "I_power_oracle"), worst.0, ORACLE_TOL)
            .with_note(format!("worst at k = {worst_k}")),
        Check::at_most(tag(table, "I_power_lambda_oracle"), worst.1, ORACLE_TOL),
    ]
}

/// I_η(X^i · I_η(X^k)) for i <= `max_i`, all k in 0..=p, against quadrature;
/// the inner I_η(X^k) is evaluated with a fault-free table.
pub fn i_product_oracle(table: &PsiTable, max_i: u32, cfg: &OracleConfig) -> Vec<Check> {
    let reference = match PsiTable::new(table.p(), table.l(), 2) {
        Ok(t) => t,
        Err(e) => return vec![Check::failed(tag(table, "I_product_oracle"), e.to_string())],
    };
    let mut worst = (0.0f64, 0.0f64);
    let mut exact_zero = true;
    for i in 0..=max_i {
        for k in 0..=table.p() {
            let (image, lam) = match i_product(table, i, k) {
                Ok(x) => x,
                Err(e) => return vec![Check::failed(tag(table, "I_product_oracle"), e.to_string())],
            };
            if k == table.l() && !(image.is_zero() && lam.coeff.is_zero()) {
                exact_zero = false;
            }
            let lam_f = |eta: f64| lam.value(eta);
            let reference = &reference;
            let v = move |y: f64, eta: f64| {
                y.powi(i as i32) * eta.powi(k as i32 + 1) * reference.psi_eval(k, y / eta).unwrap_or(f64::NAN)
            };
            match compare_with_quad(table, &image, &lam_f, v, cfg) {
                Ok((a, b)) => worst = (worst.0.max(a), worst.1.max(b)),
                Err(e) => return vec![Check::failed(tag(table, "I_product_oracle"), e)],
            }
        }
    }
    vec![
        Check::at_most(tag(table, "I_product_oracle"), worst.0, ORACLE_TOL),
        Check::at_most(tag(table, "I_product_lambda_oracle"), worst.1, ORACLE_TOL),
        Check {
            name: tag(table, "I_product_inner_L_exact_zero"),
            passed: exact_zero,
            measured: if exact_zero { 0.0 } else { 1.0 },
            tolerance: 0.0,
            note: None,
        },
    ]
}

/// Closed-form moments M_{i,k} against quadrature, i <= `max_i`, k != L.
pub fn moment_check(table: &PsiTable, max_i: u32, quad: &QuadConfig) -> Check {
    let mut worst: f64 = 0.0;
    for k in table.fast_indices() {
        for i in 0..=max_i {
            let closed = table.psi_moment_f64(i, k);
            let numeric = weighted_integral(
                |s| s.powi(i as i32) * table.psi_eval(k, s).unwrap_or(f64::NAN),
                table.p(),
                quad,
            );
            let numeric = match numeric {
                Ok(v) => v,
                Err(e) => return Check::failed(tag(table, "moment_closed_form"), e.to_string()),
            };
            let dev = if closed == 0.0 {
                numeric.abs()
            } else {
                ((closed - numeric) / closed).abs()
            };
            worst = worst.max(dev);
        }
    }
    Check::at_most(tag(table, "moment_closed_form"), worst, MOMENT_TOL)
}

/// Leading tail coefficient at T = 30 (remainder bounded by twice the first
/// correction), and agreement of ψ̄ with its tail series at moderate T.
pub fn tail_checks(table: &PsiTable) -> Vec<Check> {
    let big_t: f64 = 30.0;
    let mut worst_lead: f64 = 0.0;
    let mut bound_ok = true;
    let mut worst_series: f64 = 0.0;
    for k in table.fast_indices() {
        let (lead, rho) = table.leading_tail(k);
        let psi = match table.psi_eval(k, big_t) {
            Ok(v) => v,
            Err(e) => return vec![Check::failed(tag(table, "tail_leading_rho"), e.to_string())],
        };
        let scaled = big_t.powi(lead as i32) * psi;
        worst_lead = worst_lead.max(((scaled - rho) / rho).abs());
        let correction = (lead + 1..lead + 2 * (table.p() + 1))
            .map(|n| table.rho_value(k, n) * big_t.powi(lead as i32 - n as i32))
            .find(|c| *c != 0.0)
            .unwrap_or(0.0);
        if (scaled - rho).abs() > 2.0 * correction.abs() + 1e-14 {
            bound_ok = false;
        }
        for &x in &[4.0f64, 6.0, -5.0] {
            for i in lead..=lead + table.p() + 3 {
                let Ok(psi) = table.psi_eval(k, x) else { continue };
                let raw = x.powi(i as i32) * psi;
                let poly: f64 = (lead..=i)
                    .map(|n| table.rho_value(k, n) * x.powi(i as i32 - n as i32))
                    .sum();
                let direct = raw - poly;
                match table.psi_bar_tail(i, k, x) {
                    Some(tail) => worst_series = worst_series.max((direct - tail).abs() / raw.abs().max(1e-300)),
                    None => worst_series = f64::INFINITY,
                }
            }
        }
    }
    vec![
        Check::at_most(tag(table, "tail_leading_rho"), worst_lead, TAIL_LEAD_TOL),
        Check {
            name: tag(table, "tail_remainder_bound"),
            passed: bound_ok,
            measured: if bound_ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            note: None,
        },
        Check::at_most(tag(table, "psi_bar_tail_series"), worst_series, TAIL_SERIES_TOL),
    ]
}

/// D_η∘I_η = id + λ t^L on random raw sums, 101 points of [−t1, t1].
pub fn d_eta_identity_check(table: &PsiTable, n_inputs: usize, t1: f64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = 0.5;
    let grid = super::residual::symmetric_grid(t1, 101);
    let mut worst: f64 = 0.0;
    for _ in 0..n_inputs {
        let mut v = RawSum::new();
        for _ in 0..rng.gen_range(1..=4) {
            let c = ExactConst::from_ratio(rng.gen_range(-8..=8), 8);
            let i = rng.gen_range(0..=2 * table.p());
            let l = rng.gen_range(0..=2);
            if rng.gen_bool(0.5) {
                v.push(RawTerm::slow(c, i, l));
            } else {
                let k = rng.gen_range(0..table.p());
                v.push(RawTerm::with_psi(c, i.min(4), k, l));
            }
        }
        let (u, lam) = match apply_i(table, &v, u32::MAX) {
            Ok(x) => x,
            Err(e) => return Check::failed(tag(table, "D_eta_identity"), e.to_string()),
        };
        for &t in &grid {
            match d_eta_check(table, &u, &v, &lam, t, eta) {
                Ok(r) => worst = worst.max(r / (1.0 + v.eval(table, t, eta).abs())),
                Err(e) => return Check::failed(tag(table, "D_eta_identity"), e.to_string()),
            }
        }
    }
    Check::at_most(tag(table, "D_eta_identity"), worst, ORACLE_TOL)
}

/// Condition number of the ψ Gram matrix on 400 points of [−4, 4].
pub fn gram_check(table: &PsiTable) -> Check {
    match gram_condition(table, 400, 4.0) {
        Ok((cond, rank, n)) if rank == n => Check::at_most(tag(table, "psi_gram_condition"), cond, GRAM_CONDITION_LIMIT),
        Ok((cond, rank, n)) => Check {
            name: tag(table, "psi_gram_condition"),
            passed: false,
            measured: cond,
            tolerance: GRAM_CONDITION_LIMIT,
            note: Some(format!("rank {rank} of {n}")),
        },
        Err(e) => Check::failed(tag(table, "psi_gram_condition"), e.to_string()),
    }
}

/// Even moments G(m) against quadrature for even m <= 2p+2.
pub fn even_moment_check(table: &PsiTable, quad: &QuadConfig) -> Check {
    let p = table.p();
    let mut worst: f64 = 0.0;
    for m in (0..=2 * p + 2).step_by(2) {
        let exact = crate::special_fn::even_moment(p, m).to_f64();
        let q = p as i32 + 1;
        let s_max = 700f64.powf(1.0 / q as f64);
        let numeric = integrate_pieces(
            |s| s.powi(m as i32) * (-s.powi(q)).exp(),
            &[-s_max, -1.0, 0.0, 1.0, s_max],
            quad,
        );
        match numeric {
            Ok(v) => worst = worst.max(((v - exact) / exact).abs()),
            Err(e) => return Check::failed(tag(table, "even_moment"), e.to_string()),
        }
    }
    Check::at_most(tag(table, "even_moment"), worst, 1e-10)
}

/// Every oracle and identity check for one (p, L), optionally with a
/// deliberately corrupted table.
pub fn selftest_suite(p: u32, l: u32, fault: Option<Fault>) -> ValidationReport {
    let mut report = ValidationReport::new(format!("selftest p={p} L={l}"));
    let table = match fault {
        Some(f) => PsiTable::with_fault(p, l, 4, f),
        None => PsiTable::new(p, l, 4),
    };
    let table = match table {
        Ok(t) => t,
        Err(e) => {
            report.push(Check::failed("psi_table", e.to_string()));
            return report;
        }
    };
    let cfg = OracleConfig::default();
    for c in identity_checks(&table, &[0.5, 0.25], &cfg.quad) {
        report.push(c);
    }
    report.push(psi_derivative_check(&table));
    report.push(even_moment_check(&table, &cfg.quad));
    for c in i_power_oracle(&table, &cfg) {
        report.push(c);
    }
    for c in i_product_oracle(&table, 2, &cfg) {
        report.push(c);
    }
    report.push(moment_check(&table, 8, &cfg.quad));
    for c in tail_checks(&table) {
        report.push(c);
    }
    report.push(d_eta_identity_check(&table, 20, 0.8, 17));
    report.push(gram_check(&table));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_table_passes_fast_checks() {
        let t = PsiTable::new(3, 0, 4).unwrap();
        assert!(psi_derivative_check(&t).passed);
        assert!(moment_check(&t, 4, &QuadConfig::default()).passed);
        assert!(tail_checks(&t).iter().all(|c| c.passed), "{:?}", tail_checks(&t));
        assert!(gram_check(&t).passed);
    }

    #[test]
    fn rho_fault_trips_tail_series_check() {
        let t = PsiTable::with_fault(3, 0, 4, Fault::RhoOffByOne).unwrap();
        let checks = tail_checks(&t);
        let tail = checks.iter().find(|c| c.name.starts_with("psi_bar_tail_series")).unwrap();
        assert!(!tail.passed);
    }
}

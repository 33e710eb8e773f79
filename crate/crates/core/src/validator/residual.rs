//! Residual of truncated expansions in the rescaled equation and the η-sweep
//! accuracy-order fit.

use super::report::{Check, ValidationReport};
use crate::engine::{expand_with_table, ExpansionResult, ProblemSpec};
use crate::psi::{PsiError, PsiTable};

/// Residuals below this are round-off: the expansion solves the equation.
pub const EXACT_RESIDUAL: f64 = 1e-12;
pub const SLOPE_MARGIN: f64 = 0.3;
pub const MIN_R2: f64 = 0.98;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Strictly decreasing.
    pub eta_list: Vec<f64>,
    /// Odd number of grid points on [−t1, t1].
    pub grid_n: usize,
    pub quad_rel_tol: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            eta_list: vec![0.4, 0.3, 0.2, 0.15, 0.1],
            grid_n: 101,
            quad_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("need at least {min} η values, got {got}")]
    TooFewEtas { min: usize, got: usize },
    #[error("η values must be positive and strictly decreasing")]
    EtaOrder,
    #[error("grid size {0} must be odd and >= 3")]
    Grid(usize),
}

impl EvalConfig {
    pub fn validate(&self, min_etas: usize) -> Result<(), ConfigError> {
        if self.eta_list.len() < min_etas {
            return Err(ConfigError::TooFewEtas {
                min: min_etas,
                got: self.eta_list.len(),
            });
        }
        let ordered = self.eta_list.windows(2).all(|w| w[0] > w[1]);
        if !ordered || self.eta_list.iter().any(|&e| !(e > 0.0)) {
            return Err(ConfigError::EtaOrder);
        }
        if self.grid_n < 3 || self.grid_n.is_multiple_of(2) {
            return Err(ConfigError::Grid(self.grid_n));
        }
        Ok(())
    }
}

/// `n` points symmetric about 0 on [−t1, t1].
pub fn symmetric_grid(t1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let half = (n - 1) / 2;
    (0..n)
        .map(|j| {
            let k = j as i64 - half as i64;
            t1 * k as f64 / half as f64
        })
        .collect()
}

/// Pointwise residual
/// η^{p+2}u' − (p+1)ηt^p u − η^{p−L+1}αt^L − S(t, η^{p−L+1}α) − η^{p+1}P(t, ηu, η^{p−L+1}α, η).
pub fn residual_at(
    table: &PsiTable,
    prob: &ProblemSpec,
    res: &ExpansionResult,
    t: f64,
    eta: f64,
) -> Result<(f64, f64, f64), PsiError> {
    let compiled = res.state.compile();
    residual_compiled(table, prob, &compiled, t, eta)
}

/// (α̃, ũ, residual) at one point from a compiled state.
pub fn residual_compiled(
    table: &PsiTable,
    prob: &ProblemSpec,
    compiled: &crate::term_algebra::CompiledSeries,
    t: f64,
    eta: f64,
) -> Result<(f64, f64, f64), PsiError> {
    let p = prob.p() as i32;
    let l = prob.l() as i32;
    let alpha = compiled.eval_alpha(eta);
    let (u, du) = compiled.eval_u(table, t, eta)?;
    let big_a = eta.powi(p - l + 1) * alpha;
    let r = eta.powi(p + 2) * du
        - (p + 1) as f64 * eta * t.powi(p) * u
        - big_a * t.powi(l)
        - prob.eval_s(t, big_a)
        - eta.powi(p + 1) * prob.eval_p(t, eta * u, big_a, eta);
    Ok((alpha, u, r))
}

/// sup over the grid of |residual|.
pub fn residual(
    table: &PsiTable,
    prob: &ProblemSpec,
    res: &ExpansionResult,
    eta: f64,
    grid: &[f64],
) -> Result<f64, PsiError> {
    let compiled = res.state.compile();
    let mut worst: f64 = 0.0;
    for &t in grid {
        let (_, _, r) = residual_compiled(table, prob, &compiled, t, eta)?;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Least-squares slope and r² of log y against log x.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, r2)
}

/// Residual sweep over `cfg.eta_list` of an existing expansion.
pub fn sweep_report(
    table: &PsiTable,
    prob: &ProblemSpec,
    res: &ExpansionResult,
    cfg: &EvalConfig,
) -> ValidationReport {
    let k = res.order;
    let mut report = ValidationReport::new(format!("order sweep, K = {k}"));
    let grid = symmetric_grid(prob.t1(), cfg.grid_n);
    let per_eta: Vec<Result<f64, PsiError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .eta_list
            .iter()
            .map(|&eta| {
                let grid = &grid;
                scope.spawn(move || residual(table, prob, res, eta, grid))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("residual worker")).collect()
    });
    for (eta, r) in cfg.eta_list.iter().zip(per_eta) {
        match r {
            Ok(v) => report.per_eta_residual.push((*eta, v)),
            Err(e) => {
                report.push(Check::failed("residual_evaluation", e.to_string()));
                return report;
            }
        }
    }
    let values: Vec<f64> = report.per_eta_residual.iter().map(|(_, r)| *r).collect();
    let worst = values.iter().cloned().fold(0.0, f64::max);
    if worst < EXACT_RESIDUAL {
        report.exact = true;
        report.push(Check::at_most("residual_exact", worst, EXACT_RESIDUAL).with_note("pass-exact"));
        return report;
    }
    if values.contains(&0.0) {
        report.push(Check::failed("accuracy_slope", "a residual is exactly zero on a non-exact sweep"));
        return report;
    }
    let (slope, r2) = fit_log_slope(&cfg.eta_list, &values);
    report.slope_r2 = Some(r2);
    if r2 >= MIN_R2 {
        report.slope = Some(slope);
    }
    let target = (k + 1) as f64 - SLOPE_MARGIN;
    report.push(Check::at_least("accuracy_slope", slope, target));
    report.push(Check::at_least("slope_fit_r2", r2, MIN_R2));
    report
}

/// Expands to order K and measures the residual decay over η.
pub fn order_sweep_with_table(
    table: &PsiTable,
    prob: &ProblemSpec,
    order: u32,
    cfg: &EvalConfig,
) -> ValidationReport {
    match expand_with_table(table, prob, order) {
        Ok(res) => sweep_report(table, prob, &res, cfg),
        Err(e) => {
            let mut r = ValidationReport::new(format!("order sweep, K = {order}"));
            r.push(Check::failed("expansion", e.to_string()));
            r
        }
    }
}

pub fn order_sweep(prob: &ProblemSpec, order: u32, cfg: &EvalConfig) -> ValidationReport {
    match prob.table(order) {
        Ok(table) => order_sweep_with_table(&table, prob, order, cfg),
        Err(e) => {
            let mut r = ValidationReport::new(format!("order sweep, K = {order}"));
            r.push(Check::failed("psi_table", e.to_string()));
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{expand, PMonomial};
    use num_rational::BigRational;

    fn prob(pm: Vec<PMonomial>) -> ProblemSpec {
        ProblemSpec::new(3, 0, 2.0, 1.0, vec![], pm).unwrap()
    }

    fn one(a: u32, b: u32) -> PMonomial {
        PMonomial { a, b, c: 0, d: 0, coeff: BigRational::from_integer(1.into()) }
    }

    #[test]
    fn grid_is_symmetric() {
        let g = symmetric_grid(1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs = [0.4, 0.3, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        let (s, r2) = fit_log_slope(&xs, &ys);
        assert!((s - 3.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toy_problem_is_pass_exact() {
        let p = prob(vec![one(0, 0)]);
        let r = order_sweep(&p, 2, &EvalConfig::default());
        assert!(r.exact && r.all_passed(), "{r}");
    }

    #[test]
    fn zero_series_leaves_unbalanced_p() {
        let p = prob(vec![one(0, 0)]);
        let table = p.table(0).unwrap();
        let zero = ExpansionResult {
            alpha_series: vec![],
            u_series: crate::term_algebra::FormalSeries::zero(0),
            order: 0,
            iterations_used: 0,
            state: crate::term_algebra::FormalSeries::zero(0),
        };
        let eta: f64 = 0.2;
        let r = residual(&table, &p, &zero, eta, &symmetric_grid(1.0, 11)).unwrap();
        assert!((r - eta.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn odd_forcing_decays_fast() {
        let p = prob(vec![one(1, 0)]);
        let res = expand(&p, 1).unwrap();
        let table = p.table(1).unwrap();
        let r = sweep_report(&table, &p, &res, &EvalConfig::default());
        assert!(r.all_passed(), "{r}");
    }
}

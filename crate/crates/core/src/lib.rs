//! Asymptotic expansions in powers of η for canard solutions of
//!
//! ```text
//! η^{p+2} u' = (p+1) η t^p u + η^{p−L+1} α t^L + S(t, η^{p−L+1} α) + η^{p+1} P(t, η u, η^{p−L+1} α, η)
//! ```
//!
//! near a degenerate turning point (p odd, L even, L < p).
//!
//! * [`special_fn`]: complete and scaled incomplete Gamma functions.
//! * [`psi`]: the intermediary functions ψ_k, their bracketed versions and
//!   tail coefficients.
//! * [`term_algebra`]: exact coefficients and the graded formal spaces.
//! * [`i_eta`]: formal rewriting of the operator I_η.
//! * [`engine`]: problem data and the fixed-point iteration.
//! * [`validator`]: quadrature oracles, residual sweeps, freeness fit.
//! * [`cli`]: the `canard` command line.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engine;
pub mod i_eta;
pub mod psi;
pub mod special_fn;
pub mod term_algebra;
pub mod validator;

pub use engine::{expand, ExpansionResult, PMonomial, ProblemSpec, SMonomial};
pub use psi::PsiTable;
pub use term_algebra::{ExactConst, FormalSeries};

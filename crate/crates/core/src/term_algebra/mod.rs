//! Exact constants, graded formal spaces A_K and raw monomials.

pub mod exact;
pub mod random;
pub mod raw;
pub mod series;

pub use exact::{ExactConst, ParseExactError, Rat};
pub use raw::{bracket_reduce, ord, EtaSeries, RawKey, RawSum, RawTerm};
pub use series::{CompiledSeries, FormalSeries, SeriesElement};

use crate::psi::PsiError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("term of negative order {order} cannot be represented in A_K")]
    NegativeOrderTerm { order: i32 },
    #[error("order {n} exceeds truncation order {order}")]
    AboveTruncation { n: u32, order: u32 },
    #[error("ψ̄_{{{i},{k}}} is not allowed in C_{n}")]
    FastShape { n: u32, i: u32, k: u32 },
    #[error("ψ index {k} exceeds p = {p}")]
    PsiIndex { k: u32, p: u32 },
    #[error(transparent)]
    Psi(#[from] PsiError),
}

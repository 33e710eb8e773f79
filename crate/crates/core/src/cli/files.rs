//! Problem and expansion file formats.

use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{ExpansionResult, PMonomial, ProblemSpec, SMonomial, SpecError};
use crate::psi::PsiTable;
use crate::term_algebra::exact::rational_from_decimal;
use crate::term_algebra::{AlgebraError, ExactConst, FormalSeries, ParseExactError};

pub const EXPANSION_FORMAT: &str = "canard-expansion/1";

/// A coefficient written as a JSON number, or as a string holding a decimal
/// or `p/q` literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffLiteral {
    Number(f64),
    Text(String),
}

impl CoeffLiteral {
    fn to_rational(&self) -> Option<BigRational> {
        match self {
            CoeffLiteral::Number(x) if x.is_finite() => rational_from_decimal(&x.to_string()),
            CoeffLiteral::Number(_) => None,
            CoeffLiteral::Text(s) => {
                let s = s.trim();
                if let Some((n, d)) = s.split_once('/') {
                    let n = num_bigint::BigInt::from_str(n.trim()).ok()?;
                    let d = num_bigint::BigInt::from_str(d.trim()).ok()?;
                    if d == 0.into() {
                        return None;
                    }
                    Some(BigRational::new(n, d))
                } else {
                    rational_from_decimal(s)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SEntry {
    pub i: u32,
    pub j: u32,
    pub coeff: CoeffLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PEntry {
    pub a: u32,
    pub b: u32,
    #[serde(default)]
    pub c: u32,
    #[serde(default)]
    pub d: u32,
    pub coeff: CoeffLiteral,
}

/// JSON problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub p: u32,
    #[serde(rename = "L")]
    pub l: u32,
    pub t0: f64,
    pub t1: f64,
    #[serde(rename = "S", default)]
    pub s: Vec<SEntry>,
    #[serde(rename = "P", default)]
    pub pm: Vec<PEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field {field}: {value:?} is not a decimal or p/q literal")]
    Coefficient { field: String, value: CoeffLiteral },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unsupported expansion format {0:?}")]
    Format(String),
    #[error("order {n}, field {field}: {source}")]
    Symbolic { n: u32, field: String, source: ParseExactError },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &str) -> Result<Self, FileError> {
        let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_spec(&self) -> Result<ProblemSpec, FileError> {
        let coeff = |field: String, c: &CoeffLiteral| {
            c.to_rational().ok_or_else(|| FileError::Coefficient { field, value: c.clone() })
        };
        let mut s = Vec::new();
        for (idx, e) in self.s.iter().enumerate() {
            s.push(SMonomial {
                i: e.i,
                j: e.j,
                coeff: coeff(format!("S[{idx}].coeff"), &e.coeff)?,
            });
        }
        let mut pm = Vec::new();
        for (idx, e) in self.pm.iter().enumerate() {
            pm.push(PMonomial {
                a: e.a,
                b: e.b,
                c: e.c,
                d: e.d,
                coeff: coeff(format!("P[{idx}].coeff"), &e.coeff)?,
            });
        }
        Ok(ProblemSpec::new(self.p, self.l, self.t0, self.t1, s, pm)?)
    }

    /// SHA-256 of the canonical JSON rendering.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("problem serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Coefficient in both renderings; the symbolic one is authoritative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffRecord {
    pub symbolic: String,
    pub float: f64,
}

impl CoeffRecord {
    fn new(c: &ExactConst) -> Self {
        CoeffRecord {
            symbolic: c.to_string(),
            float: c.to_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowRecord {
    pub i: u32,
    pub coeff: CoeffRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FastRecord {
    pub i: u32,
    pub k: u32,
    pub coeff: CoeffRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderRecord {
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_n: Option<CoeffRecord>,
    pub slow: Vec<SlowRecord>,
    pub fast: Vec<FastRecord>,
}

/// Serialized expansion: provenance header plus one record per nonzero order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionFile {
    pub format: String,
    pub tool_version: String,
    pub problem_hash: String,
    pub p: u32,
    #[serde(rename = "L")]
    pub l: u32,
    pub order: u32,
    pub iterations_used: u32,
    pub orders: Vec<OrderRecord>,
}

impl ExpansionFile {
    pub fn from_result(problem: &ProblemFile, res: &ExpansionResult) -> Self {
        let orders = res
            .state
            .elements()
            .map(|e| OrderRecord {
                n: e.n,
                a_n: (!e.a.is_zero()).then(|| CoeffRecord::new(&e.a)),
                slow: e
                    .slow
                    .iter()
                    .map(|(i, c)| SlowRecord { i: *i, coeff: CoeffRecord::new(c) })
                    .collect(),
                fast: e
                    .fast
                    .iter()
                    .map(|((i, k), c)| FastRecord { i: *i, k: *k, coeff: CoeffRecord::new(c) })
                    .collect(),
            })
            .collect();
        ExpansionFile {
            format: EXPANSION_FORMAT.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            problem_hash: problem.hash(),
            p: problem.p,
            l: problem.l,
            order: res.order,
            iterations_used: res.iterations_used,
            orders,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("expansion serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        let f: ExpansionFile = serde_json::from_str(text)?;
        if f.format != EXPANSION_FORMAT {
            return Err(FileError::Format(f.format));
        }
        Ok(f)
    }

    /// Rebuilds the exact (α, u) state from the symbolic coefficients.
    pub fn to_state(&self) -> Result<FormalSeries, FileError> {
        let parse = |n: u32, field: &str, c: &CoeffRecord| {
            ExactConst::from_str(&c.symbolic).map_err(|source| FileError::Symbolic {
                n,
                field: field.to_string(),
                source,
            })
        };
        let mut s = FormalSeries::zero(self.order);
        for r in &self.orders {
            if let Some(a) = &r.a_n {
                s.add_scalar(r.n, &parse(r.n, "a_n", a)?)?;
            }
            for e in &r.slow {
                s.add_slow(r.n, e.i, &parse(r.n, "slow", &e.coeff)?)?;
            }
            for e in &r.fast {
                s.add_fast(r.n, e.i, e.k, &parse(r.n, "fast", &e.coeff)?)?;
            }
        }
        Ok(s)
    }

    pub fn to_result(&self, table: &PsiTable) -> Result<ExpansionResult, FileError> {
        let state = self.to_state()?;
        state.check_shape(table)?;
        Ok(ExpansionResult {
            alpha_series: state.alpha_coeffs(),
            u_series: state.u_part(),
            order: self.order,
            iterations_used: self.iterations_used,
            state,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::expand;

    const TOY: &str = r#"{"p": 3, "L": 0, "t0": 2.0, "t1": 1.0, "S": [], "P": [{"a": 0, "b": 0, "coeff": 1}]}"#;

    #[test]
    fn parses_and_hashes_stably() {
        let a = ProblemFile::parse(TOY).unwrap();
        let b = ProblemFile::parse(&TOY.replace(' ', "")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert!(a.to_spec().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = TOY.replace("\"t1\"", "\"t2\": 0.5, \"t1\"");
        let err = ProblemFile::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("unknown field"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn coefficient_literals() {
        let half = CoeffLiteral::Number(0.5).to_rational().unwrap();
        assert_eq!(half, BigRational::new(1.into(), 2.into()));
        let tenth = CoeffLiteral::Number(0.1).to_rational().unwrap();
        assert_eq!(tenth, BigRational::new(1.into(), 10.into()));
        let third = CoeffLiteral::Text("1/3".into()).to_rational().unwrap();
        assert_eq!(third, BigRational::new(1.into(), 3.into()));
        assert!(CoeffLiteral::Text("abc".into()).to_rational().is_none());
        assert!(CoeffLiteral::Text("1/0".into()).to_rational().is_none());
    }

    #[test]
    fn expansion_round_trip() {
        let file = ProblemFile::parse(
            r#"{"p": 3, "L": 2, "t0": 2, "t1": 1, "S": [{"i": 3, "j": 1, "coeff": 1}],
                "P": [{"a": 0, "b": 0, "coeff": 1}, {"a": 1, "b": 1, "coeff": 0.5}]}"#,
        )
        .unwrap();
        let spec = file.to_spec().unwrap();
        let res = expand(&spec, 4).unwrap();
        let out = ExpansionFile::from_result(&file, &res);
        let back = ExpansionFile::parse(&out.to_json()).unwrap();
        assert_eq!(back, out);
        let table = spec.table(4).unwrap();
        assert_eq!(back.to_result(&table).unwrap(), res);
    }
}

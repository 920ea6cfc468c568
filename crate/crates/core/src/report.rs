//! Machine-readable reports emitted by the identity checks.
//!
//! Reports are deterministic: field order is fixed by the struct layout and
//! no timestamps or environment data enter the canonical body.

use serde::{Deserialize, Serialize};

/// Location and values of the first disagreement found by a check.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Witness {
    /// What was being compared when the mismatch appeared.
    pub context: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
    /// First differing coefficient index (power of X).
    pub coeff_index: usize,
    /// Aligned left-hand residue, decimal.
    pub lhs: String,
    /// Aligned right-hand residue, decimal.
    pub rhs: String,
}

/// Outcome of a single exact identity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckReport {
    pub fn pass(check: &str) -> Self {
        CheckReport { check: check.to_string(), pass: true, witness: None }
    }

    pub fn fail(check: &str, witness: Witness) -> Self {
        CheckReport { check: check.to_string(), pass: false, witness: Some(witness) }
    }
}

/// One step of a convergence run: the minimal entry valuation of
/// `M_{n+1} - M_n`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvergenceStep {
    pub n: u32,
    pub valuation: i64,
    /// False when every stored digit of the difference vanished, so the
    /// valuation is only a lower bound at the working precision.
    pub exact: bool,
}

/// Full convergence report; `pass` states that the agreement valuations are
/// non-decreasing over the contracted range (`p^{n-1} > D`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub check: String,
    pub pass: bool,
    pub steps: Vec<ConvergenceStep>,
}

/// Comparator verdict for the functional-equation check: `mu` and `lambda`
/// hold the invariant pair of each side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub pass: bool,
    pub mu: [u32; 2],
    pub lambda: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

//! Verification ledger: printed values against corrected and oracle values.

use crate::output::Cell;

pub const LEDGER_COLUMNS: &[&str] = &[
    "quantity", "n", "beta", "paper", "corrected", "oracle", "ratio_paper", "ratio_corrected", "status", "note",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Confirmed,
    Discrepant,
    Untested,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Confirmed => "confirmed",
            Status::Discrepant => "discrepant",
            Status::Untested => "untested",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub quantity: String,
    pub n: usize,
    pub beta: f64,
    pub paper: Option<f64>,
    pub corrected: Option<f64>,
    pub oracle: Option<f64>,
    pub status: Status,
    pub note: String,
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    if b == 0.0 {
        a.abs() <= tol
    } else {
        ((a - b) / b).abs() <= tol
    }
}

impl LedgerEntry {
    /// Printed value against an oracle value.
    pub fn compare(quantity: &str, n: usize, beta: f64, paper: f64, oracle: f64, tol: f64, note: &str) -> Self {
        Self {
            quantity: quantity.into(),
            n,
            beta,
            paper: Some(paper),
            corrected: None,
            oracle: Some(oracle),
            status: if within(paper, oracle, tol) { Status::Confirmed } else { Status::Discrepant },
            note: note.into(),
        }
    }

    /// Printed value against a re-derived value, with no independent oracle.
    pub fn paper_vs_corrected(quantity: &str, n: usize, beta: f64, paper: f64, corrected: f64, tol: f64, note: &str) -> Self {
        Self {
            quantity: quantity.into(),
            n,
            beta,
            paper: Some(paper),
            corrected: Some(corrected),
            oracle: None,
            status: if within(paper, corrected, tol) { Status::Confirmed } else { Status::Discrepant },
            note: note.into(),
        }
    }

    /// Whichever of `paper` / `corrected` is present, judged against the oracle.
    /// When both are present the status follows the corrected value.
    #[allow(clippy::too_many_arguments)]
    pub fn against_oracle(
        quantity: &str,
        n: usize,
        beta: f64,
        paper: Option<f64>,
        corrected: Option<f64>,
        oracle: f64,
        tol: f64,
        note: &str,
    ) -> Self {
        let judged = corrected.or(paper);
        Self {
            quantity: quantity.into(),
            n,
            beta,
            paper,
            corrected,
            oracle: Some(oracle),
            status: match judged {
                Some(v) if within(v, oracle, tol) => Status::Confirmed,
                Some(_) => Status::Discrepant,
                None => Status::Untested,
            },
            note: note.into(),
        }
    }

    pub fn untested(quantity: &str, n: usize, beta: f64, paper: Option<f64>, corrected: Option<f64>, note: &str) -> Self {
        Self {
            quantity: quantity.into(),
            n,
            beta,
            paper,
            corrected,
            oracle: None,
            status: Status::Untested,
            note: note.into(),
        }
    }

    pub fn row(&self) -> Vec<Cell> {
        let base = self.oracle.or(self.corrected.filter(|_| self.oracle.is_none()));
        let ratio = |v: Option<f64>, against: Option<f64>| match (v, against) {
            (Some(v), Some(b)) if b != 0.0 => Cell::Num(v / b),
            _ => Cell::Empty,
        };
        let ratio_paper = if self.oracle.is_some() { ratio(self.paper, self.oracle) } else { ratio(self.paper, base) };
        vec![
            self.quantity.clone().into(),
            self.n.into(),
            self.beta.into(),
            self.paper.into(),
            self.corrected.into(),
            self.oracle.into(),
            ratio_paper,
            ratio(self.corrected, self.oracle),
            self.status.as_str().into(),
            self.note.clone().into(),
        ]
    }
}

//! Outcomes of verification checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::expr::ZeroCertificate;
use crate::field::ResidualReport;

/// Pass/fail outcome of one check plus the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// All zero decisions were made by canonicalization.
    pub exact: bool,
    /// Sample points evaluated.
    pub points: usize,
    /// Largest residual magnitude observed.
    pub max_abs: f64,
    /// First failing entry, `(row, col)`, 0-based.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entry: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Verdict {
    pub fn pass() -> Self {
        Self {
            pass: true,
            exact: true,
            points: 0,
            max_abs: 0.0,
            entry: None,
            witness: None,
            note: None,
        }
    }

    pub fn fail(note: impl Into<String>) -> Self {
        Self {
            pass: false,
            note: Some(note.into()),
            ..Self::pass()
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Conjunction; keeps the evidence of the first failure.
    pub fn and(self, other: Verdict) -> Verdict {
        let merged = |first: Verdict, second: &Verdict| Verdict {
            exact: first.exact && second.exact,
            points: first.points + second.points,
            max_abs: first.max_abs.max(second.max_abs),
            ..first
        };
        if !self.pass || other.pass {
            let note = match (&self.note, &other.note) {
                (Some(a), Some(b)) if self.pass => Some(format!("{a}; {b}")),
                (None, Some(b)) if self.pass => Some(b.clone()),
                _ => self.note.clone(),
            };
            Verdict {
                note,
                ..merged(self, &other)
            }
        } else {
            merged(other, &self)
        }
    }

    /// Marks the failing entry as belonging to column `col` of a larger matrix.
    pub(crate) fn at_column(mut self, col: usize) -> Self {
        if let Some((i, _)) = self.entry {
            self.entry = Some((i, col));
        }
        self
    }
}

impl From<ResidualReport> for Verdict {
    fn from(r: ResidualReport) -> Self {
        Self {
            pass: r.zero,
            exact: r.exact,
            points: r.points,
            max_abs: r.max_abs,
            entry: r.entry,
            witness: r.witness,
            note: None,
        }
    }
}

impl From<ZeroCertificate> for Verdict {
    fn from(c: ZeroCertificate) -> Self {
        Self {
            pass: c.zero,
            exact: c.exact,
            points: c.points,
            max_abs: c.max_abs,
            entry: None,
            witness: c.witness,
            note: None,
        }
    }
}

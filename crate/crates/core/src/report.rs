use serde::{Deserialize, Serialize};

/// Outcome of a batch of pointwise or coefficientwise checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    pub first_discrepancy: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report { name: name.into(), checks: 0, failures: 0, first_discrepancy: None, notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    /// Record one check; `detail` is only evaluated on failure.
    pub fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first_discrepancy.is_none() {
                self.first_discrepancy = Some(detail());
            }
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn merge(&mut self, other: Report) {
        self.checks += other.checks;
        self.failures += other.failures;
        if self.first_discrepancy.is_none() {
            self.first_discrepancy = other.first_discrepancy.map(|d| format!("{}: {d}", other.name));
        }
        self.notes.extend(other.notes);
    }
}

//! Outcome of an exhaustive or randomized invariant scan.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    /// Instances on which the invariant was evaluated.
    pub checked: u64,
    /// Instances on which the hypothesis of the invariant held.
    pub applicable: u64,
    /// First counterexample found, rendered for humans.
    pub counterexample: Option<String>,
}

impl Default for CheckReport {
    fn default() -> Self {
        Self::new()
    }
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn new() -> Self {
        CheckReport { checked: 0, applicable: 0, counterexample: None }
    }

    /// Sums the counts; the left report's counterexample wins.
    pub fn merge(mut self, other: CheckReport) -> CheckReport {
        self.checked += other.checked;
        self.applicable += other.applicable;
        if self.counterexample.is_none() {
            self.counterexample = other.counterexample;
        }
        self
    }

    pub(crate) fn fail(&mut self, witness: impl FnOnce() -> String) {
        if self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }
}

//! Outcome types shared by the verifiers.

use serde::{Deserialize, Serialize};

/// Outcome of a checked statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// The hypotheses of the statement do not hold for this input.
    NotApplicable,
    Violation,
}

impl Status {
    /// `Pass` when `slack >= -tol`, else `Violation`.
    pub fn from_slack(slack: f64, tol: f64) -> Self {
        if slack >= -tol {
            Status::Pass
        } else {
            Status::Violation
        }
    }

    /// The more severe of two outcomes (violation over not-applicable over pass).
    pub fn worst(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Violation => 1,
            Status::NotApplicable => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::NotApplicable => "not_applicable",
            Status::Violation => "violation",
        }
    }
}

impl Ord for Status {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

impl PartialOrd for Status {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Folds a sequence of outcomes into the most severe one.
pub fn overall<I: IntoIterator<Item = Status>>(items: I) -> Status {
    items.into_iter().fold(Status::Pass, Status::worst)
}

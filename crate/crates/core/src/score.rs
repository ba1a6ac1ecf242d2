//! Verdicts shared by every verifier, and prediction scoring.
//!
//! A system counts as solved when any candidate is certified. Timeouts and
//! solver failures are scored as wrong but reported on their own line.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// The Lyapunov condition a verdict refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Condition {
    /// `V(0) = 0`.
    Origin,
    /// `V > 0` away from the origin (or `V >= 0` for barriers).
    Positivity,
    /// `grad V . f <= 0`.
    Decrease,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum UnknownReason {
    Timeout,
    SolverFailure,
    Budget,
    DomainError,
    /// The method cannot handle the input, e.g. SOS on a non-polynomial system.
    Unsupported,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "kebab-case"))]
pub enum Verdict {
    /// `numeric_only` marks sampling evidence rather than a proof.
    Certified { numeric_only: bool },
    /// A point where `condition` is violated beyond tolerance.
    Falsified { condition: Condition, witness: Vec<f64> },
    /// Proof that the SOS relaxation of `condition` is infeasible. No point is available.
    Rejected { condition: Condition },
    Unknown { reason: UnknownReason },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified { .. })
    }

    /// Falsified or Rejected.
    pub fn is_negative(&self) -> bool {
        matches!(self, Verdict::Falsified { .. } | Verdict::Rejected { .. })
    }

    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Certified { .. } => "certified",
            Verdict::Falsified { .. } => "falsified",
            Verdict::Rejected { .. } => "rejected",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified { numeric_only: true } => write!(f, "certified (numeric only)"),
            Verdict::Certified { .. } => write!(f, "certified"),
            Verdict::Falsified { condition, witness } => write!(f, "falsified {:?} at {:?}", condition, witness),
            Verdict::Rejected { condition } => write!(f, "rejected {:?}", condition),
            Verdict::Unknown { reason } => write!(f, "unknown ({:?})", reason),
        }
    }
}

/// What happened to one model candidate.
#[derive(Clone, Debug, PartialEq)]
pub enum CandidateOutcome {
    Checked(Verdict),
    DecodeError,
}

/// Per-system classification, in order of precedence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SystemOutcome {
    Correct,
    Timeout,
    Unknown,
    DecodeError,
    Incorrect,
}

/// A system is correct if any candidate is certified. Otherwise a timeout,
/// then any other unknown, then an all-decode-error list decides. What remains,
/// including the empty list, is incorrect.
pub fn classify(candidates: &[CandidateOutcome]) -> SystemOutcome {
    let mut timeout = false;
    let mut unknown = false;
    let mut decoded = false;
    for c in candidates {
        match c {
            CandidateOutcome::Checked(Verdict::Certified { .. }) => return SystemOutcome::Correct,
            CandidateOutcome::Checked(Verdict::Unknown { reason }) => {
                decoded = true;
                if *reason == UnknownReason::Timeout {
                    timeout = true;
                } else {
                    unknown = true;
                }
            }
            CandidateOutcome::Checked(_) => decoded = true,
            CandidateOutcome::DecodeError => {}
        }
    }
    if timeout {
        SystemOutcome::Timeout
    } else if unknown {
        SystemOutcome::Unknown
    } else if !decoded && !candidates.is_empty() {
        SystemOutcome::DecodeError
    } else {
        SystemOutcome::Incorrect
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreCounts {
    pub total: usize,
    pub certified: usize,
    pub falsified: usize,
    /// Unknown for any reason, timeouts included.
    pub unknown: usize,
    pub timeouts: usize,
    pub decode_error: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreReport {
    pub counts: ScoreCounts,
    /// Certified over total; unknowns count as wrong.
    pub accuracy: f64,
    /// `first_correct_rank[k]` systems were first solved by the candidate at beam rank `k`.
    pub first_correct_rank: Vec<usize>,
}

impl ScoreReport {
    pub fn from_systems<'a, I>(systems: I) -> ScoreReport
    where
        I: IntoIterator<Item = &'a [CandidateOutcome]>,
    {
        let mut c = ScoreCounts::default();
        let mut ranks: Vec<usize> = Vec::new();
        for cands in systems {
            c.total += 1;
            match classify(cands) {
                SystemOutcome::Correct => {
                    c.certified += 1;
                    let k = cands
                        .iter()
                        .position(|x| matches!(x, CandidateOutcome::Checked(Verdict::Certified { .. })))
                        .unwrap_or(0);
                    if ranks.len() <= k {
                        ranks.resize(k + 1, 0);
                    }
                    ranks[k] += 1;
                }
                SystemOutcome::Timeout => {
                    c.unknown += 1;
                    c.timeouts += 1;
                }
                SystemOutcome::Unknown => c.unknown += 1,
                SystemOutcome::DecodeError => c.decode_error += 1,
                SystemOutcome::Incorrect => c.falsified += 1,
            }
        }
        let accuracy = if c.total == 0 { 0.0 } else { c.certified as f64 / c.total as f64 };
        ScoreReport {
            counts: c,
            accuracy,
            first_correct_rank: ranks,
        }
    }

    /// `(correct, timeout, incorrect)`; non-timeout unknowns and decode errors count as incorrect.
    pub fn three_way(&self) -> (usize, usize, usize) {
        let c = &self.counts;
        (c.certified, c.timeouts, c.total - c.certified - c.timeouts)
    }
}

/// Histogram helper for callers that aggregate several reports.
pub fn merge_ranks(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::chain::SpeedTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    /// `|lhs - rhs| <= tolerance`.
    #[serde(rename = "~=")]
    Close,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Close => "~=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Close => (lhs - rhs).abs() <= tol,
        }
    }
}

/// One named comparison `lhs (relation) rhs` within `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The statement being checked, or `plumbing`.
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
    pub method: String,
    /// Why the check was not run, when it was not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        claim: &str,
        lhs: f64,
        relation: Relation,
        rhs: f64,
        tolerance: f64,
        method: &str,
    ) -> Self {
        Check {
            name: name.into(),
            claim: claim.to_string(),
            lhs,
            rhs,
            relation,
            tolerance,
            pass: relation.holds(lhs, rhs, tolerance),
            method: method.to_string(),
            skipped: None,
        }
    }

    pub fn skip(name: impl Into<String>, claim: &str, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            claim: claim.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            relation: Relation::Le,
            tolerance: 0.0,
            pass: false,
            method: "none".into(),
            skipped: Some(reason.into()),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.skipped.is_none() && !self.pass
    }
}

/// A chain a suite ran on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub family: String,
    pub n: usize,
    pub reversible: bool,
    pub transitivity: String,
}

/// A Monte Carlo or exact number the suite produced, for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub label: String,
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
    pub method: String,
}

/// Smallest weak-rule probability seen with speeds `(1, 1, 0)` on reversible
/// chains, against the conjectured floor of 1/3. Evidence only: it never
/// fails a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorEvidence {
    pub min_weak: f64,
    pub std_err: f64,
    pub family: String,
    pub chains_seen: usize,
    pub floor: f64,
    pub consistent: bool,
}

impl FloorEvidence {
    pub(crate) fn observe(slot: &mut Option<FloorEvidence>, family: String, weak: f64, se: f64) {
        let floor = 1.0 / 3.0;
        let seen = slot.as_ref().map_or(0, |e| e.chains_seen) + 1;
        match slot {
            Some(e) if e.min_weak <= weak => e.chains_seen = seen,
            _ => {
                *slot = Some(FloorEvidence {
                    min_weak: weak,
                    std_err: se,
                    family,
                    chains_seen: seen,
                    floor,
                    consistent: weak >= floor - 3.5 * se - 1e-12,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub chains: Vec<ChainMeta>,
    pub speeds: Vec<SpeedTriple>,
    pub seed: Option<u64>,
    pub estimates: Vec<EstimateRow>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<FloorEvidence>,
}

impl VerificationReport {
    pub fn new(suite: &str) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            checks: Vec::new(),
            chains: Vec::new(),
            speeds: Vec::new(),
            seed: None,
            estimates: Vec::new(),
            notes: Vec::new(),
            evidence: None,
        }
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.is_failure()).collect()
    }

    /// No check that ran has failed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| !c.is_failure())
    }

    /// `(passed, failed, skipped)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        let skipped = self.checks.iter().filter(|c| c.skipped.is_some()).count();
        let failed = self.failures().len();
        (self.checks.len() - skipped - failed, failed, skipped)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.chains.extend(other.chains);
        for s in other.speeds {
            if !self.speeds.contains(&s) {
                self.speeds.push(s);
            }
        }
        self.estimates.extend(other.estimates);
        self.notes.extend(other.notes);
        if let Some(e) = other.evidence {
            FloorEvidence::observe(&mut self.evidence, e.family, e.min_weak, e.std_err);
        }
    }

    pub fn add_speeds(&mut self, s: SpeedTriple) {
        if !self.speeds.contains(&s) {
            self.speeds.push(s);
        }
    }

    /// Plain-text table, one line per check.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:<width$} {:>14}    {:>14}  method", "status", "name", "lhs", "rhs");
        for c in &self.checks {
            let status = match (&c.skipped, c.pass) {
                (Some(_), _) => "SKIP",
                (None, true) => "PASS",
                (None, false) => "FAIL",
            };
            match &c.skipped {
                Some(reason) => {
                    let _ = writeln!(out, "{status:<6} {:<width$} {reason}", c.name);
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{status:<6} {:<width$} {:>14.8e} {} {:>14.8e}  {}",
                        c.name,
                        c.lhs,
                        c.relation.symbol(),
                        c.rhs,
                        c.method
                    );
                }
            }
        }
        let (p, f, s) = self.counts();
        let _ = writeln!(out, "{}: {p} passed, {f} failed, {s} skipped", self.suite);
        if let Some(e) = &self.evidence {
            let _ = writeln!(
                out,
                "evidence: smallest weak-rule probability {:.6} on {} over {} chains (floor 1/3{})",
                e.min_weak,
                e.family,
                e.chains_seen,
                if e.consistent { "" } else { ", BELOW FLOOR" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

use serde::{Deserialize, Serialize};

use crate::multilinear::Frame;

/// One named residual check. `pass` is always `residual < tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub tolerance: f64,
    pub frame: String,
}

impl VerificationReport {
    pub fn new(tolerance: f64, frame: &Frame) -> Self {
        Self { checks: Vec::new(), tolerance, frame: frame.fingerprint() }
    }

    /// Report not tied to a tensor frame (e.g. checks on abstract Lie algebras).
    pub fn detached(tolerance: f64) -> Self {
        Self { checks: Vec::new(), tolerance, frame: String::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, residual: f64) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.checks.push(Check { name: name.into(), residual, pass: residual < self.tolerance });
    }

    /// Record a check that holds when `margin` exceeds the tolerance
    /// (positive definiteness, linear independence). The stored residual is
    /// 0 on success and at least the tolerance on failure.
    pub fn push_margin(&mut self, name: impl Into<String>, margin: f64) {
        let tol = self.tolerance;
        let residual = if margin > tol { 0.0 } else { tol + (tol - margin).max(0.0) };
        self.push(name, residual);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.residual))
    }
}

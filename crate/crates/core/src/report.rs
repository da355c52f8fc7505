//! Pass/fail bookkeeping shared by the verification routines and the
//! scenario runner.

use std::fmt::Write as _;

/// One measured quantity against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured < tolerance`.
    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, passed: measured < tolerance, detail: String::new() }
    }

    /// Passes when `measured > threshold`.
    pub fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, tolerance: threshold, passed: measured > threshold, detail: String::new() }
    }

    /// Passes when `|measured − target| ≤ tolerance`.
    pub fn near(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        let passed = (measured - target).abs() <= tolerance;
        Self { name: name.into(), measured, tolerance, passed, detail: format!("target {}", fmt17(target)) }
    }

    /// A boolean verdict with no numeric measurement.
    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        let measured = if passed { 1.0 } else { 0.0 };
        Self { name: name.into(), measured, tolerance: 0.5, passed, detail: detail.into() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Run settings recorded next to the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub n_points: usize,
    pub length: f64,
    pub hbar: f64,
    pub mass: f64,
    pub scheme: String,
    pub dt: f64,
    /// Seconds spent; kept out of [`ScenarioReport::render`] so reports stay
    /// byte-reproducible.
    pub wall_clock: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
}

impl ScenarioReport {
    pub fn new(name: impl Into<String>, provenance: Provenance) -> Self {
        Self { name: name.into(), checks: Vec::new(), provenance }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Pass iff every check passes. An empty report passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Plain-text rendering with 17 significant digits.
    pub fn render(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.name);
        let _ = writeln!(out, "verdict {}", verdict(self.passed()));
        let _ = writeln!(
            out,
            "grid n={} L={} hbar={} M={} scheme={} dt={}",
            p.n_points,
            fmt17(p.length),
            fmt17(p.hbar),
            fmt17(p.mass),
            p.scheme,
            fmt17(p.dt)
        );
        let _ = writeln!(out, "# check\tmeasured\ttolerance\tverdict\tdetail");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                c.name,
                fmt17(c.measured),
                fmt17(c.tolerance),
                verdict(c.passed),
                c.detail
            );
        }
        out
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

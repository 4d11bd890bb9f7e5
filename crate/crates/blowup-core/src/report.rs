//! Structured verification reports.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Outcome of a verification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The data cannot support a conclusion (too coarse, too few samples).
    Inconclusive,
    /// The requested parameters fall outside the check's validity region.
    Inapplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Inapplicable => "inapplicable",
        }
    }
}

/// A tolerance attached to a measured quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// `|value| <= tol`
    AbsAtMost(f64),
}

impl Bound {
    pub fn satisfied_by(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match *self {
            Bound::AtMost(b) => value <= b,
            Bound::AtLeast(b) => value >= b,
            Bound::AbsAtMost(b) => value.abs() <= b,
        }
    }

    pub fn describe(&self) -> (&'static str, f64) {
        match *self {
            Bound::AtMost(b) => ("<=", b),
            Bound::AtLeast(b) => (">=", b),
            Bound::AbsAtMost(b) => ("|.|<=", b),
        }
    }
}

/// Structured outcome of a theorem or inequality check: named inputs, named
/// measured quantities, tolerances, and the resulting verdict.
///
/// The verdict is `Pass` exactly when every measured quantity that carries a
/// tolerance satisfies it, unless the check marked itself inconclusive or
/// inapplicable.
#[derive(Debug, Clone)]
pub struct Report {
    pub check_name: String,
    pub inputs: BTreeMap<String, String>,
    pub measured: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, Bound>,
    pub notes: Vec<String>,
    override_verdict: Option<Verdict>,
}

impl Report {
    pub fn new(check_name: impl Into<String>) -> Self {
        Self {
            check_name: check_name.into(),
            inputs: BTreeMap::new(),
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            notes: Vec::new(),
            override_verdict: None,
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.inputs.insert(key.into(), value.into());
        self
    }

    /// Record a quantity without a tolerance (informational).
    pub fn measure(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.measured.insert(key.into(), value);
        self
    }

    /// Record a quantity that must satisfy `bound` for the report to pass.
    pub fn require(&mut self, key: impl Into<String>, value: f64, bound: Bound) -> &mut Self {
        let key = key.into();
        self.measured.insert(key.clone(), value);
        self.tolerances.insert(key, bound);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn mark_inconclusive(&mut self, why: impl Into<String>) -> &mut Self {
        self.override_verdict = Some(Verdict::Inconclusive);
        self.notes.push(why.into());
        self
    }

    pub fn mark_inapplicable(&mut self, why: impl Into<String>) -> &mut Self {
        self.override_verdict = Some(Verdict::Inapplicable);
        self.notes.push(why.into());
        self
    }

    pub fn verdict(&self) -> Verdict {
        if let Some(v) = self.override_verdict {
            return v;
        }
        for (key, bound) in &self.tolerances {
            match self.measured.get(key) {
                Some(&v) if bound.satisfied_by(v) => {}
                _ => return Verdict::Fail,
            }
        }
        Verdict::Pass
    }

    pub fn passed(&self) -> bool {
        self.verdict() == Verdict::Pass
    }
}

//! Run traces and the sample-complexity quantities extracted from them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Cdoo,
    Ncdoo,
    Ps1d,
    Psgrid,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::Cdoo,
        AlgorithmKind::Ncdoo,
        AlgorithmKind::Ps1d,
        AlgorithmKind::Psgrid,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AlgorithmKind::Cdoo => "cdoo",
            AlgorithmKind::Ncdoo => "ncdoo",
            AlgorithmKind::Ps1d => "ps1d",
            AlgorithmKind::Psgrid => "psgrid",
        }
    }

    pub fn is_certified(self) -> bool {
        !matches!(self, AlgorithmKind::Ncdoo)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

/// One evaluation round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub n: usize,
    pub x: Point,
    pub fx: f64,
    pub xstar: Point,
    pub fxstar: f64,
    /// Error certificate; absent for non-certified algorithms.
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algorithm: AlgorithmKind,
    pub function: String,
    #[serde(rename = "L")]
    pub lip: f64,
    pub eps: Option<f64>,
    pub budget: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    header: TraceHeader,
    records: Vec<Record>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    annotations: Vec<String>,
}

/// First round at which a condition holds, or `NotReached`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SampleCount {
    At(usize),
    NotReached,
}

impl SampleCount {
    pub fn value(self) -> Option<usize> {
        match self {
            SampleCount::At(n) => Some(n),
            SampleCount::NotReached => None,
        }
    }

    pub fn is_reached(self) -> bool {
        matches!(self, SampleCount::At(_))
    }
}

impl fmt::Display for SampleCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleCount::At(n) => write!(f, "{n}"),
            SampleCount::NotReached => f.write_str("inf"),
        }
    }
}

impl Serialize for SampleCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

/// Result of [`certificate_validity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateVerdict {
    pub passed: bool,
    pub checked: usize,
    /// Rounds without a certificate (non-certified traces).
    pub skipped: usize,
    pub first_violation: Option<usize>,
    /// Largest `known_max − f(x*_n) − ξ_n` seen.
    pub worst_excess: f64,
}

impl RunTrace {
    /// Seals a list of records, checking the trace invariants.
    pub fn from_parts(header: TraceHeader, records: Vec<Record>) -> Result<Self> {
        let mut best = f64::NEG_INFINITY;
        for (k, r) in records.iter().enumerate() {
            if r.n != k + 1 {
                return Err(Error::InvalidArgument(format!(
                    "record {k} has n = {}, expected {}",
                    r.n,
                    k + 1
                )));
            }
            best = best.max(r.fx);
            if r.fxstar != best {
                return Err(Error::InvalidArgument(format!(
                    "record {} recommendation value {} is not the running max {best}",
                    r.n, r.fxstar
                )));
            }
            if let Some(xi) = r.xi {
                if !(xi >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "record {} has negative certificate {xi}",
                        r.n
                    )));
                }
            }
        }
        Ok(RunTrace {
            header,
            records,
            annotations: Vec::new(),
        })
    }

    pub fn header(&self) -> &TraceHeader {
        &self.header
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn annotations(&self) -> &[String] {
        &self.annotations
    }

    pub(crate) fn annotate(&mut self, note: impl Into<String>) {
        self.annotations.push(note.into());
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn queries(&self) -> impl Iterator<Item = &Point> {
        self.records.iter().map(|r| &r.x)
    }

    /// The first `n` records as a new trace.
    pub fn truncated(&self, n: usize) -> RunTrace {
        RunTrace {
            header: self.header.clone(),
            records: self.records[..n.min(self.records.len())].to_vec(),
            annotations: self.annotations.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RunTrace = serde_json::from_str(text)?;
        let mut sealed = RunTrace::from_parts(raw.header, raw.records)?;
        sealed.annotations = raw.annotations;
        Ok(sealed)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Incremental trace construction with running-argmax recommendations.
/// Ties keep the earliest query.
#[derive(Debug)]
pub(crate) struct TraceBuilder {
    header: TraceHeader,
    records: Vec<Record>,
    best: Option<(Point, f64)>,
}

impl TraceBuilder {
    pub fn new(header: TraceHeader) -> Self {
        TraceBuilder {
            header,
            records: Vec::new(),
            best: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn best_value(&self) -> f64 {
        self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1)
    }

    /// Records an observation; the certificate is computed from the updated
    /// recommendation value.
    pub fn push(
        &mut self,
        x: Point,
        fx: f64,
        certificate: impl FnOnce(f64) -> Option<f64>,
    ) -> &Record {
        match &self.best {
            Some((_, v)) if fx <= *v => {}
            _ => self.best = Some((x.clone(), fx)),
        }
        let (xstar, fxstar) = self.best.clone().expect("best set above");
        let xi = certificate(fxstar).map(|v| v.max(0.0));
        self.records.push(Record {
            n: self.records.len() + 1,
            x,
            fx,
            xstar,
            fxstar,
            xi,
        });
        self.records.last().expect("just pushed")
    }

    pub fn finish(self) -> RunTrace {
        RunTrace {
            header: self.header,
            records: self.records,
            annotations: Vec::new(),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )))
    }
}

/// `σ = inf{n ≥ 1 : ξ_n ≤ ε}`.
pub fn sigma_from_trace(trace: &RunTrace, eps: f64) -> Result<SampleCount> {
    check_eps(eps)?;
    if trace.is_empty() {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    Ok(trace
        .records
        .iter()
        .find(|r| r.xi.is_some_and(|xi| xi <= eps))
        .map_or(SampleCount::NotReached, |r| SampleCount::At(r.n)))
}

/// `ζ = inf{n ≥ 1 : max f − f(x*_n) ≤ ε}`.
pub fn zeta_from_trace(trace: &RunTrace, known_max: Option<f64>, eps: f64) -> Result<SampleCount> {
    check_eps(eps)?;
    let max = known_max.ok_or_else(|| Error::MissingMetadata("known maximum".into()))?;
    if trace.is_empty() {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    Ok(trace
        .records
        .iter()
        .find(|r| max - r.fxstar <= eps)
        .map_or(SampleCount::NotReached, |r| SampleCount::At(r.n)))
}

/// Checks `known_max − f(x*_n) ≤ ξ_n + tol` for every certified round.
pub fn certificate_validity(trace: &RunTrace, known_max: f64, tol: f64) -> CertificateVerdict {
    let mut verdict = CertificateVerdict {
        passed: true,
        checked: 0,
        skipped: 0,
        first_violation: None,
        worst_excess: f64::NEG_INFINITY,
    };
    for r in &trace.records {
        let Some(xi) = r.xi else {
            verdict.skipped += 1;
            continue;
        };
        verdict.checked += 1;
        let excess = known_max - r.fxstar - xi;
        verdict.worst_excess = verdict.worst_excess.max(excess);
        if excess > tol && verdict.first_violation.is_none() {
            verdict.passed = false;
            verdict.first_violation = Some(r.n);
        }
    }
    verdict
}

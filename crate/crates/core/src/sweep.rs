//! ε-sweeps over registry functions and algorithms, written as CSV with
//! two-column plot-data companions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::complexity::{estimate_sc, ComplexityConfig, ComplexityReport, IntegralMethod};
use crate::error::{Error, Result};
use crate::registry::{default_solver, lookup, RegistryEntry};
use crate::trace::{
    certificate_validity, sigma_from_trace, zeta_from_trace, AlgorithmKind, SampleCount,
};
use crate::CERTIFICATE_TOL;

/// Columns of the sweep CSV, in order.
pub const CSV_COLUMNS: [&str; 15] = [
    "function",
    "d",
    "L",
    "Lip",
    "eps",
    "algorithm",
    "sigma",
    "zeta",
    "SC",
    "SNC",
    "integral",
    "a_bound",
    "sandwich_lower",
    "sandwich_upper",
    "verdicts",
];

const KEYS: [&str; 14] = [
    "functions",
    "algorithms",
    "eps_max",
    "eps_ratio",
    "eps_count",
    "eps_floor",
    "L",
    "budget",
    "grid_step",
    "integral_method",
    "mc_samples",
    "seed",
    "jobs",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub functions: Vec<String>,
    /// Empty means every algorithm the function supports.
    pub algorithms: Vec<AlgorithmKind>,
    pub eps_max: f64,
    pub eps_ratio: f64,
    pub eps_count: usize,
    pub eps_floor: f64,
    pub lip: f64,
    pub budget: usize,
    /// `None` means `eps / (8 L)` per row.
    pub grid_step: Option<f64>,
    pub integral_method: IntegralMethod,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            functions: Vec::new(),
            algorithms: Vec::new(),
            eps_max: 0.5,
            eps_ratio: 0.5,
            eps_count: 8,
            eps_floor: 1e-6,
            lip: 1.0,
            budget: 100_000,
            grid_step: None,
            integral_method: IntegralMethod::GridMidpoint,
            seed: 0,
            jobs: 1,
            out: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl SweepConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown or repeated
    /// keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {k:?}",
                    lineno + 1
                )));
            }
            if seen.insert(k, v).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {k:?}",
                    lineno + 1
                )));
            }
        }
        let mut cfg = SweepConfig::default();
        let mut mc_samples = 10_000usize;
        let mut method = "grid";
        for (&k, &v) in &seen {
            match k {
                "functions" => {
                    cfg.functions = v
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect()
                }
                "algorithms" => {
                    cfg.algorithms = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse()
                                .map_err(|_| Error::Config(format!("algorithms: unknown {s:?}")))
                        })
                        .collect::<Result<_>>()?
                }
                "eps_max" => cfg.eps_max = parse_num(k, v)?,
                "eps_ratio" => cfg.eps_ratio = parse_num(k, v)?,
                "eps_count" => cfg.eps_count = parse_num(k, v)?,
                "eps_floor" => cfg.eps_floor = parse_num(k, v)?,
                "L" => cfg.lip = parse_num(k, v)?,
                "budget" => cfg.budget = parse_num(k, v)?,
                "grid_step" => {
                    cfg.grid_step = if v == "auto" {
                        None
                    } else {
                        Some(parse_num(k, v)?)
                    }
                }
                "integral_method" => method = v,
                "mc_samples" => mc_samples = parse_num(k, v)?,
                "seed" => cfg.seed = parse_num(k, v)?,
                "jobs" => cfg.jobs = parse_num(k, v)?,
                "out" => cfg.out = Some(PathBuf::from(v)),
                _ => unreachable!("key list checked above"),
            }
        }
        cfg.integral_method = match method {
            "grid" | "grid-midpoint" => IntegralMethod::GridMidpoint,
            "mc" | "monte-carlo" => IntegralMethod::MonteCarlo {
                seed: cfg.seed,
                samples: mc_samples,
            },
            other => return Err(Error::Config(format!("integral_method: unknown {other:?}"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        SweepConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.functions.is_empty() {
            return Err(Error::Config(
                "functions: at least one label required".into(),
            ));
        }
        if !(self.eps_floor > 0.0) {
            return Err(Error::Config("eps_floor must be positive".into()));
        }
        if !(self.eps_max >= self.eps_floor) {
            return Err(Error::Config("eps_max must be at least eps_floor".into()));
        }
        if !(self.eps_ratio > 0.0 && self.eps_ratio < 1.0) {
            return Err(Error::Config("eps_ratio must lie in (0, 1)".into()));
        }
        if self.eps_count == 0 {
            return Err(Error::Config("eps_count must be at least 1".into()));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if !(self.lip.is_finite() && self.lip > 0.0) {
            return Err(Error::Config("L must be positive".into()));
        }
        Ok(())
    }

    /// `eps_max · ratio^k` for `k < eps_count`, stopping below the floor.
    pub fn eps_values(&self) -> Vec<f64> {
        (0..self.eps_count)
            .map(|k| self.eps_max * self.eps_ratio.powi(k as i32))
            .take_while(|&e| e >= self.eps_floor)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub function: String,
    pub dim: usize,
    pub lip: f64,
    pub lip_f: f64,
    pub eps: f64,
    pub algorithm: AlgorithmKind,
    pub sigma: Option<SampleCount>,
    pub zeta: Option<SampleCount>,
    pub sc: Option<usize>,
    pub snc: Option<usize>,
    pub integral: Option<f64>,
    pub a_bound: Option<f64>,
    pub sandwich_lower: Option<f64>,
    pub sandwich_upper: Option<f64>,
    /// `name=pass|fail|error` flags, in a fixed order.
    pub verdicts: Vec<(String, String)>,
}

impl SweepRow {
    pub fn verdict(&self, name: &str) -> Option<&str> {
        self.verdicts
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| v == "pass")
    }

    fn cells(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "na".to_string(), T::to_string)
        }
        let verdicts: Vec<String> = self
            .verdicts
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        vec![
            self.function.clone(),
            self.dim.to_string(),
            self.lip.to_string(),
            self.lip_f.to_string(),
            self.eps.to_string(),
            self.algorithm.label().to_string(),
            opt(&self.sigma),
            opt(&self.zeta),
            opt(&self.sc),
            opt(&self.snc),
            opt(&self.integral),
            opt(&self.a_bound),
            opt(&self.sandwich_lower),
            opt(&self.sandwich_upper),
            verdicts.join(";"),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub csv: String,
    /// File name and contents of each plot-data companion.
    pub plots: Vec<(String, String)>,
}

impl SweepOutput {
    /// Writes `sweep.csv` and the plot files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep.csv"), &self.csv)?;
        for (name, body) in &self.plots {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn flag(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn run_row(
    entry: &RegistryEntry,
    eps: f64,
    kind: AlgorithmKind,
    report: &std::result::Result<ComplexityReport, String>,
    cfg: &SweepConfig,
) -> SweepRow {
    let mut row = SweepRow {
        function: entry.label.to_string(),
        dim: entry.dim,
        lip: cfg.lip,
        lip_f: entry.lip_f,
        eps,
        algorithm: kind,
        sigma: None,
        zeta: None,
        sc: None,
        snc: None,
        integral: None,
        a_bound: None,
        sandwich_lower: None,
        sandwich_upper: None,
        verdicts: Vec::new(),
    };
    match report {
        Ok(r) => {
            row.sc = Some(r.sc);
            row.snc = Some(r.snc);
            row.integral = Some(r.integral);
            if let Some(v) = r.verdicts {
                row.sandwich_lower = Some(v.lower_bound);
                row.sandwich_upper = Some(v.upper_bound);
            }
        }
        Err(e) => row
            .verdicts
            .push(("complexity".into(), format!("error: {e}"))),
    }
    let outcome = default_solver(entry, kind, eps).and_then(|solver| {
        let trace = solver.run(&entry.function, cfg.lip, eps, cfg.budget)?;
        let a = match &solver {
            crate::optimizers::Solver::Cdoo(p) | crate::optimizers::Solver::Ncdoo(p) => {
                Some(p.constants().doo_bound_constant(entry.dim))
            }
            _ => None,
        };
        Ok((trace, a))
    });
    let (trace, a) = match outcome {
        Ok(t) => t,
        Err(e) => {
            row.verdicts.push(("run".into(), format!("error: {e}")));
            return row;
        }
    };
    row.a_bound = a;
    let max = entry.max_value();
    if kind.is_certified() {
        row.sigma = sigma_from_trace(&trace, eps).ok();
        let v = certificate_validity(&trace, max, CERTIFICATE_TOL);
        row.verdicts.push(("cert".into(), flag(v.passed)));
    }
    row.zeta = zeta_from_trace(&trace, Some(max), eps).ok();
    if kind == AlgorithmKind::Cdoo {
        if let (Some(a), Some(sc), Some(sigma)) = (a, row.sc, row.sigma) {
            let ok = sigma
                .value()
                .is_some_and(|s| s as f64 <= 2.0 * a * sc as f64);
            row.verdicts.push(("prop1".into(), flag(ok)));
        }
    }
    if let Ok(r) = report {
        if let Some(v) = r.verdicts {
            row.verdicts.push(("sandwich".into(), flag(v.passed)));
        }
    }
    row
}

fn csv_text(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record(r.cells())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn plot_files(rows: &[SweepRow]) -> Vec<(String, String)> {
    let mut sigma: BTreeMap<String, String> = BTreeMap::new();
    let mut sandwich: BTreeMap<String, String> = BTreeMap::new();
    let mut seen_sandwich: std::collections::BTreeSet<(String, u64)> = Default::default();
    for r in rows {
        if let Some(s) = r
            .sigma
            .and_then(SampleCount::value)
            .or(if r.algorithm.is_certified() {
                None
            } else {
                r.zeta.and_then(SampleCount::value)
            })
        {
            let name = format!("plot_sigma_{}_{}.dat", r.function, r.algorithm.label());
            let body = sigma
                .entry(name)
                .or_insert_with(|| "# log10(1/eps) log10(samples)\n".to_string());
            let _ = writeln!(body, "{} {}", (1.0 / r.eps).log10(), (s as f64).log10());
        }
        if let (Some(sc), Some(i)) = (r.sc, r.integral) {
            if seen_sandwich.insert((r.function.clone(), r.eps.to_bits())) && sc > 0 && i > 0.0 {
                let name = format!("plot_sc_integral_{}.dat", r.function);
                let body = sandwich
                    .entry(name)
                    .or_insert_with(|| "# log10(integral) log10(SC)\n".to_string());
                let _ = writeln!(body, "{} {}", i.log10(), (sc as f64).log10());
            }
        }
    }
    sigma.into_iter().chain(sandwich).collect()
}

/// Runs every (function, eps, algorithm) row. Rows execute on up to
/// `cfg.jobs` threads and come back in config order; row errors land in
/// the verdict column instead of aborting the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let entries: Vec<RegistryEntry> = cfg
        .functions
        .iter()
        .map(|f| lookup(f, cfg.lip))
        .collect::<Result<_>>()?;
    let eps_values = cfg.eps_values();
    let mut tasks = Vec::new();
    for (ei, entry) in entries.iter().enumerate() {
        let algos: Vec<AlgorithmKind> = if cfg.algorithms.is_empty() {
            entry.algorithms()
        } else {
            cfg.algorithms.clone()
        };
        for (ki, _) in eps_values.iter().enumerate() {
            for &a in &algos {
                tasks.push((ei, ki, a));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let complexity_cfg = ComplexityConfig {
        grid_step: cfg.grid_step,
        method: cfg.integral_method,
        ..ComplexityConfig::default()
    };
    let rows = pool.install(|| {
        let pairs: Vec<(usize, usize)> = (0..entries.len())
            .flat_map(|e| (0..eps_values.len()).map(move |k| (e, k)))
            .collect();
        let reports: Vec<std::result::Result<ComplexityReport, String>> = pairs
            .par_iter()
            .map(|&(e, k)| {
                let entry = &entries[e];
                estimate_sc(
                    &entry.function,
                    &entry.domain,
                    entry.norm,
                    cfg.lip,
                    eps_values[k],
                    &complexity_cfg,
                )
                .map_err(|err| err.to_string())
            })
            .collect();
        tasks
            .par_iter()
            .map(|&(e, k, a)| {
                let report = &reports[e * eps_values.len() + k];
                run_row(&entries[e], eps_values[k], a, report, cfg)
            })
            .collect::<Vec<_>>()
    });
    let csv = csv_text(&rows)?;
    let plots = plot_files(&rows);
    Ok(SweepOutput { rows, csv, plots })
}

/// One certificate-validity check of [`certificate_suite`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CertificateCheck {
    pub function: String,
    pub algorithm: AlgorithmKind,
    pub eps: f64,
    pub evaluations: usize,
    pub sigma: SampleCount,
    pub verdict: crate::trace::CertificateVerdict,
}

/// `count` geometric scales from `1/2`: ratio `1/2` in d = 1, `2^{-1/d}`
/// above, so finer dimensions stay within grid caps.
pub fn geometric_scales(dim: usize, count: usize) -> Vec<f64> {
    let ratio = 0.5f64.powf(1.0 / dim.max(1) as f64);
    (0..count).map(|k| 0.5 * ratio.powi(k as i32)).collect()
}

/// Runs every certified algorithm on every registry function at each scale
/// of `scales(dim)` and checks `max f − f(x*_n) ≤ ξ_n + tol` along the
/// whole trace.
pub fn certificate_suite(
    lip: f64,
    scales: impl Fn(usize) -> Vec<f64>,
    budget: usize,
) -> Result<Vec<CertificateCheck>> {
    let entries = crate::registry::registry(lip)?;
    let mut jobs = Vec::new();
    for e in &entries {
        for kind in e.algorithms().into_iter().filter(|k| k.is_certified()) {
            for eps in scales(e.dim) {
                jobs.push((e, kind, eps));
            }
        }
    }
    jobs.par_iter()
        .map(|&(e, kind, eps)| {
            let solver = default_solver(e, kind, eps)?;
            let trace = solver.run(&e.function, lip, eps, budget)?;
            Ok(CertificateCheck {
                function: e.label.to_string(),
                algorithm: kind,
                eps,
                evaluations: trace.len(),
                sigma: sigma_from_trace(&trace, eps)?,
                verdict: certificate_validity(&trace, e.max_value(), CERTIFICATE_TOL),
            })
        })
        .collect()
}

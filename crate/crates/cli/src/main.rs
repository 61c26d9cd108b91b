use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lipcert::adversary::{audit_certified_run, AuditPoint, AuditVerdict};
use lipcert::complexity::{estimate_sc, lemma_properties_suite, ComplexityConfig, IntegralMethod};
use lipcert::registry::{default_solver, lookup, registry};
use lipcert::sweep::{certificate_suite, geometric_scales, run_sweep, SweepConfig};
use lipcert::{
    bisection_partition, certificate_validity, sigma_from_trace, verify_assumptions,
    zeta_from_trace, AlgorithmKind, Domain, Error, Norm, CERTIFICATE_TOL,
};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "LIPCERT_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "lipcert",
    version,
    about = "Certified Lipschitz optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one optimizer on a registry function and write its trace.
    Run {
        #[arg(long)]
        function: String,
        #[arg(long, value_parser = parse_algo)]
        algo: AlgorithmKind,
        #[arg(long = "L", default_value_t = 1.0)]
        lip: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an eps-sweep described by a key = value config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Estimate S_C, S_NC and the integral for a registry function.
    Complexity {
        #[arg(long)]
        function: String,
        #[arg(long = "L", default_value_t = 1.0)]
        lip: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long = "grid-step")]
        grid_step: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::Grid)]
        method: Method,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the bump construction against a certified run.
    Audit {
        #[arg(long)]
        function: String,
        #[arg(long, value_parser = parse_algo, default_value = "cdoo")]
        algo: AlgorithmKind,
        #[arg(long = "L", default_value_t = 1.0)]
        lip: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = At::Before)]
        at: At,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Method {
    Grid,
    Mc,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum At {
    /// One evaluation before certification.
    Before,
    /// At certification.
    Sigma,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Suite {
    Lemmas,
    Partition,
    Certificates,
}

fn parse_algo(s: &str) -> Result<AlgorithmKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn out_path(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default_name)
    })
}

fn write_text(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    std::fs::write(path, format!("{text}\n"))
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_run(
    function: &str,
    algo: AlgorithmKind,
    lip: f64,
    eps: f64,
    budget: usize,
    out: Option<PathBuf>,
) -> Outcome {
    let entry = lookup(function, lip)?;
    let solver = default_solver(&entry, algo, eps)?;
    let trace = solver.run(&entry.function, lip, eps, budget)?;
    let path = out_path(out, &format!("{function}_{algo}_trace.json"));
    write_text(&path, &trace.to_json()?)?;
    let max = entry.max_value();
    let zeta = zeta_from_trace(&trace, Some(max), eps)?;
    if algo.is_certified() {
        let sigma = sigma_from_trace(&trace, eps)?;
        println!(
            "{function} {algo}: sigma={sigma} zeta={zeta} evaluations={} trace={}",
            trace.len(),
            path.display()
        );
        let v = certificate_validity(&trace, max, CERTIFICATE_TOL);
        if !v.passed {
            return Err(Failure::Invariant(format!(
                "certificate violated: {:?}",
                v.first_violation
            )));
        }
    } else {
        println!(
            "{function} {algo}: zeta={zeta} evaluations={} trace={}",
            trace.len(),
            path.display()
        );
    }
    for note in trace.annotations() {
        println!("note: {note}");
    }
    Ok(())
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>, jobs: Option<usize>) -> Outcome {
    let mut cfg = SweepConfig::from_file(config)?;
    if let Some(j) = jobs {
        cfg.jobs = j;
        cfg.validate()?;
    }
    let dir = out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| out_path(None, "sweep"));
    let output = run_sweep(&cfg)?;
    output.write(&dir)?;
    let failing = output.rows.iter().filter(|r| !r.all_pass()).count();
    println!(
        "{} rows written to {} ({} plot files, {failing} rows with failing or errored verdicts)",
        output.rows.len(),
        dir.join("sweep.csv").display(),
        output.plots.len()
    );
    let violated = output.rows.iter().any(|r| {
        r.verdict("cert") == Some("fail")
            || r.verdict("prop1") == Some("fail")
            || r.verdict("sandwich") == Some("fail")
    });
    if violated {
        return Err(Failure::Invariant(
            "sweep verdicts report a violated inequality".into(),
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_complexity(
    function: &str,
    lip: f64,
    eps: f64,
    grid_step: Option<f64>,
    method: Method,
    samples: usize,
    seed: u64,
    gamma: Option<f64>,
    out: Option<PathBuf>,
) -> Outcome {
    let entry = lookup(function, lip)?;
    let config = ComplexityConfig {
        grid_step,
        method: match method {
            Method::Grid => IntegralMethod::GridMidpoint,
            Method::Mc => IntegralMethod::MonteCarlo { seed, samples },
        },
        gamma,
        ..ComplexityConfig::default()
    };
    let report = estimate_sc(
        &entry.function,
        &entry.domain,
        entry.norm,
        lip,
        eps,
        &config,
    )?;
    let path = out_path(out, &format!("{function}_complexity.json"));
    write_text(&path, &report.to_json()?)?;
    println!(
        "{function}: SC={} SNC={} integral={} m_eps={} report={}",
        report.sc,
        report.snc,
        report.integral,
        report.m_eps,
        path.display()
    );
    match report.verdicts {
        Some(v) if !v.passed => Err(Failure::Invariant(format!(
            "sandwich check failed: lower {} vs 2*SC, upper {} vs SC",
            v.lower_bound, v.upper_bound
        ))),
        _ => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_audit(
    function: &str,
    algo: AlgorithmKind,
    lip: f64,
    eps: f64,
    at: At,
    budget: usize,
    out: Option<PathBuf>,
) -> Outcome {
    let entry = lookup(function, lip)?;
    let solver = default_solver(&entry, algo, eps)?;
    let at = match at {
        At::Before => AuditPoint::BeforeCertification,
        At::Sigma => AuditPoint::AtCertification,
    };
    let report = audit_certified_run(&solver, &entry.function, lip, eps, at, budget)?;
    let path = out_path(out, &format!("{function}_{algo}_audit.json"));
    write_text(&path, &report.to_json()?)?;
    println!(
        "{function} {algo}: n={} case={} verdict={:?} eps_tilde={} report={}",
        report.n,
        report.case_fired,
        report.verdict,
        report
            .eps_tilde
            .map_or("none".to_string(), |e| e.to_string()),
        path.display()
    );
    if report.verdict == AuditVerdict::Fail {
        return Err(Failure::Invariant("audit failed".into()));
    }
    Ok(())
}

fn cmd_verify(suite: Suite, trials: usize, seed: u64) -> Outcome {
    match suite {
        Suite::Lemmas => {
            let v = lemma_properties_suite(trials, seed)?;
            println!(
                "lemmas: {} trials, {} checks, {} counterexamples",
                v.trials,
                v.checks,
                v.counterexamples.len()
            );
            if let Some(c) = v.counterexamples.first() {
                let text = serde_json::to_string(c).unwrap_or_default();
                return Err(Failure::Invariant(format!("counterexample: {text}")));
            }
        }
        Suite::Partition => {
            for dim in 1..=3 {
                let p = bisection_partition(&Domain::unit_cube(dim), Norm::Sup)?;
                let v = verify_assumptions(&p, 6, 2);
                println!(
                    "partition d={dim}: {} cells, {} pairs, passed={}",
                    v.cells_checked, v.pairs_checked, v.passed
                );
                if let Some(why) = v.violation {
                    return Err(Failure::Invariant(format!("d={dim}: {why:?}")));
                }
            }
        }
        Suite::Certificates => {
            let lip = 1.0;
            let count = trials.clamp(1, 8);
            let checks = certificate_suite(lip, |d| geometric_scales(d, count), 100_000)?;
            let bad: Vec<_> = checks.iter().filter(|c| !c.verdict.passed).collect();
            println!(
                "certificates: {} runs over {} functions, {} violations",
                checks.len(),
                registry(lip)?.len(),
                bad.len()
            );
            if let Some(c) = bad.first() {
                return Err(Failure::Invariant(format!(
                    "{} {} eps={}: {:?}",
                    c.function, c.algorithm, c.eps, c.verdict.first_violation
                )));
            }
        }
    }
    println!("pass");
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run {
            function,
            algo,
            lip,
            eps,
            budget,
            out,
        } => cmd_run(&function, algo, lip, eps, budget, out),
        Command::Sweep { config, out, jobs } => cmd_sweep(&config, out, jobs),
        Command::Complexity {
            function,
            lip,
            eps,
            grid_step,
            method,
            samples,
            seed,
            gamma,
            out,
        } => cmd_complexity(
            &function, lip, eps, grid_step, method, samples, seed, gamma, out,
        ),
        Command::Audit {
            function,
            algo,
            lip,
            eps,
            at,
            budget,
            out,
        } => cmd_audit(&function, algo, lip, eps, at, budget, out),
        Command::Verify {
            suite,
            trials,
            seed,
        } => cmd_verify(suite, trials, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(2)
        }
    }
}

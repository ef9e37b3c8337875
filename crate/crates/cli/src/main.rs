//! `hw`: evaluate Hanson–Wright bounds, simulate quadratic forms and run
//! the verification suites.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hw_core::bounds::{hw_mgf_bound, hw_tail_bound, make_bound_spec};
use hw_core::linalg::read_matrix;
use hw_core::mc::{run_soundness, DEFAULT_CONFIDENCE};
use hw_core::verify::{self, Suite, VerificationReport, VerifyConfig};
use hw_core::{Error, RngStream, SubGaussianDist};

#[derive(Parser, Debug)]
#[command(name = "hw", version, about = "Hanson-Wright bounds for sub-Gaussian quadratic forms")]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "HW_THREADS")]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constants, norms and bound values for one matrix.
    Bound(BoundArgs),
    /// Monte Carlo estimates of the tail or MGF against the bound.
    Simulate(SimulateArgs),
    /// Run a verification suite and emit a report.
    Verify(VerifyArgs),
    /// Pretty-print a saved verification report (exit 1 if it records a failure).
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Matrix file (JSON `{"n", "entries"}` or CSV).
    #[arg(long)]
    matrix: PathBuf,
    /// Sub-Gaussian variance proxy.
    #[arg(long)]
    sigma2: f64,
    /// Evaluate the MGF bound at this λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Evaluate the tail bound at this t.
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("grid").required(true).args(["t_grid", "lambda_grid"])))]
struct SimulateArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// `gaussian:<sigma>`, `rademacher` or `uniform:<a>`.
    #[arg(long)]
    dist: SubGaussianDist,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Tail thresholds `start:stop:step`.
    #[arg(long)]
    t_grid: Option<Grid>,
    /// MGF parameters `start:stop:step`, within `[0, λ_max/2]`.
    #[arg(long)]
    lambda_grid: Option<Grid>,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    confidence: f64,
    /// Also write the raw centred samples, one per line.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_suite, default_value = "full")]
    suite: Suite,
    /// Samples per Monte Carlo cell.
    #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
    samples: usize,
    /// Samples per matrix in the hollow-form comparison.
    #[arg(long, default_value_t = verify::DEFAULT_COMPARISON_SAMPLES)]
    comparison_samples: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Saved JSON report.
    input: PathBuf,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Inclusive arithmetic grid `start:stop:step`.
#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
            return Err(format!("need finite start <= stop and step > 0, got {s:?}"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        if count > 10_000 {
            return Err(format!("grid {s:?} has {count} points (max 10000)"));
        }
        Ok(Grid((0..count).map(|i| (a + step * i as f64).min(b)).collect()))
    }
}

#[derive(Serialize)]
struct BoundOutput {
    c1: f64,
    c2: f64,
    diagonal_free: bool,
    frob2: f64,
    opnorm: f64,
    /// `null` when the matrix is zero.
    lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mgf_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_bound: Option<f64>,
}

#[derive(Serialize)]
struct SimRow {
    t_or_lambda: f64,
    estimate: f64,
    ci_low: f64,
    ci_high: f64,
    bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SimOutput {
    kind: &'static str,
    dist: String,
    n: usize,
    sigma2: f64,
    c1: f64,
    c2: f64,
    samples: u64,
    seed: u64,
    confidence: f64,
    mean: f64,
    variance: f64,
    notices: Vec<String>,
    rows: Vec<SimRow>,
    all_pass: bool,
}

enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("hw: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("hw: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Bound(a) => bound(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Verify(a) => verify_cmd(cli, a),
        Command::Report(a) => report(cli, a),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(p) => write_file(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| Failure::Usage(format!("stdout: {e}")))
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), Failure> {
    fs::write(p, format!("{text}\n")).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Usage(e.to_string()))
}

fn bound(cli: &Cli, a: &BoundArgs) -> Result<(), Failure> {
    let m = read_matrix(&a.matrix)?;
    let spec = make_bound_spec(&m, a.sigma2)?;
    let out = BoundOutput {
        c1: spec.c1,
        c2: spec.c2,
        diagonal_free: spec.diagonal_free,
        frob2: spec.frob2,
        opnorm: spec.opnorm,
        lambda_max: spec.lambda_max.is_finite().then_some(spec.lambda_max),
        mgf_bound: a.lambda.map(|l| hw_mgf_bound(&spec, l)).transpose()?,
        tail_bound: a.t.map(|t| hw_tail_bound(&spec, t)).transpose()?,
    };
    let text = match cli.format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            format!(
                "c1,c2,diagonal_free,frob2,opnorm,lambda_max,mgf_bound,tail_bound\n{},{},{},{},{},{},{},{}",
                out.c1,
                out.c2,
                out.diagonal_free,
                out.frob2,
                out.opnorm,
                opt(out.lambda_max),
                opt(out.mgf_bound),
                opt(out.tail_bound)
            )
        }
    };
    emit(cli, &text)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<(), Failure> {
    let m = read_matrix(&a.matrix)?;
    let (ts, ls) = match (&a.t_grid, &a.lambda_grid) {
        (Some(g), None) => (g.0.clone(), Vec::new()),
        (None, Some(g)) => (Vec::new(), g.0.clone()),
        _ => return Err(Failure::Usage("give exactly one of --t-grid and --lambda-grid".into())),
    };
    let r = run_soundness(
        &m,
        &a.dist,
        &ts,
        &ls,
        a.samples,
        a.confidence,
        RngStream::new(cli.seed, 0),
        a.dump.is_some(),
    )?;
    if let (Some(path), Some(samples)) = (&a.dump, &r.stats.samples) {
        let mut text = String::with_capacity(samples.len() * 24);
        for y in samples {
            text.push_str(&format!("{y:.17e}\n"));
        }
        fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }

    let (kind, rows): (&'static str, Vec<SimRow>) = if a.t_grid.is_some() {
        let rows = r
            .tails
            .iter()
            .map(|c| SimRow {
                t_or_lambda: c.estimate.t,
                estimate: c.estimate.point,
                ci_low: c.estimate.ci_low,
                ci_high: c.estimate.ci_high,
                bound: c.bound,
                pass: c.pass,
            })
            .collect();
        ("tail", rows)
    } else {
        let rows = r
            .mgfs
            .iter()
            .map(|c| SimRow {
                t_or_lambda: c.estimate.lambda,
                estimate: c.estimate.mean,
                ci_low: c.estimate.ci_low,
                ci_high: c.estimate.ci_high,
                bound: c.bound,
                pass: c.pass,
            })
            .collect();
        ("mgf", rows)
    };
    let all_pass = rows.iter().all(|r| r.pass);
    let text = match cli.format {
        Format::Json => to_json(&SimOutput {
            kind,
            dist: a.dist.to_string(),
            n: m.n(),
            sigma2: r.spec.sigma2,
            c1: r.spec.c1,
            c2: r.spec.c2,
            samples: r.stats.n_samples,
            seed: cli.seed,
            confidence: a.confidence,
            mean: r.stats.mean,
            variance: r.stats.variance,
            notices: r.notices.clone(),
            rows,
            all_pass,
        })?,
        Format::Csv => {
            let mut s = String::from("t_or_lambda,estimate,ci_low,ci_high,bound,pass");
            for row in &rows {
                s.push_str(&format!(
                    "\n{},{},{},{},{},{}",
                    row.t_or_lambda, row.estimate, row.ci_low, row.ci_high, row.bound, row.pass
                ));
            }
            s
        }
    };
    for n in &r.notices {
        eprintln!("hw: note: {n}");
    }
    emit(cli, &text)?;
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn verify_cmd(cli: &Cli, a: &VerifyArgs) -> Result<(), Failure> {
    if a.samples == 0 || a.comparison_samples == 0 {
        return Err(Failure::Usage("sample counts must be positive".into()));
    }
    let cfg = VerifyConfig {
        seed: cli.seed,
        samples: a.samples,
        comparison_samples: a.comparison_samples,
        confidence: DEFAULT_CONFIDENCE,
    };
    let mut report = verify::run(a.suite, &cfg)?;
    report.timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let text = match cli.format {
        Format::Json => to_json(&report)?,
        Format::Csv => report_csv(&report),
    };
    emit(cli, &text)?;
    eprintln!(
        "hw: {} checks, {} passed, {} failed",
        report.summary.total, report.summary.passed, report.summary.failed
    );
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn report_csv(r: &VerificationReport) -> String {
    let mut s = String::from("id,category,pass,margin,details");
    for c in &r.checks {
        let cat = serde_json::to_value(c.category)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        s.push_str(&format!(
            "\n{},{},{},{},\"{}\"",
            c.id,
            cat,
            c.pass,
            c.margin,
            c.details.replace('"', "\"\"")
        ));
    }
    s
}

fn report(cli: &Cli, a: &ReportArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.input).map_err(|e| Failure::Usage(format!("{}: {e}", a.input.display())))?;
    let r: VerificationReport =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.input.display())))?;
    if r.summary.total != r.checks.len() || r.summary.passed + r.summary.failed != r.summary.total {
        return Err(Failure::Usage(format!("{}: summary does not match the check list", a.input.display())));
    }
    let out = match cli.format {
        Format::Json => r.to_string(),
        Format::Csv => report_csv(&r),
    };
    emit(cli, &out)?;
    if r.checks.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

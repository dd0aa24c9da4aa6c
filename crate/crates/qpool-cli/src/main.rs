//! Command-line interface for the qpool library.
//!
//! Subcommands map one-to-one onto library operations: `gauss`, `count`,
//! `bound`, `build`, `verify`, `simulate`, `table1`, `ratio`. Output is
//! human-readable by default and machine-readable with `--json` (big integers
//! are emitted as decimal strings). Every run with fixed inputs and an
//! explicit seed is bitwise reproducible on stdout, independent of
//! `--workers`.
//!
//! Exit codes: 0 success, 1 hypothesis/validation failure (including bad
//! flags), 2 I/O or file-format failure, 3 budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qpool::design::{
    self, build_design, ColumnOracle, DesignParams, ExportFormat, Family, PoolingMatrix,
    VirtualDesign, DEFAULT_BUILD_BUDGET_BITS,
};
use qpool::disjunct::{
    check_fully, falsify_sampled, measure_exhaustive, DisjunctReport, DisjunctStatus, FullyCheck,
    MeasureMode, DEFAULT_WORKLOAD_BUDGET_TUPLES,
};
use qpool::exact::{
    bound_guo_wang_q, bound_macula, bound_ngo_du, bound_set_intersection, count_fixed_intersection,
    gaussian, table1, test_to_item_ratio, BoundBreakdown, CountingQuery,
};
use qpool::simulate::simulate;

#[derive(Parser)]
#[command(
    name = "qpool",
    version,
    about = "Pooling designs over finite sets and vector spaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Gaussian coefficient [m2 choose m1]_q
    Gauss {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        m2: i64,
        #[arg(long)]
        m1: i64,
        #[arg(long)]
        json: bool,
    },
    /// Count r-dim subspaces meeting a fixed m-dim subspace of GF(q)^n at a
    /// fixed j-dim subspace
    Count {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        j: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        /// Shift of m for the monotonicity diagnostic
        #[arg(long, default_value_t = 0)]
        alpha: u32,
        #[arg(long)]
        json: bool,
    },
    /// Error-correction bounds for the four design families
    Bound {
        #[command(subcommand)]
        which: BoundCmd,
    },
    /// Build a design matrix and write it to a file
    Build {
        #[command(subcommand)]
        which: BuildCmd,
    },
    /// Measure disjunctness of a design (exhaustive or sampled)
    Verify(Box<VerifyArgs>),
    /// Simulate error-tolerant group-testing decode trials
    Simulate(SimulateArgs),
    /// Reproduce the published q=2, k=8, n=60 bound table with match flags
    Table1 {
        #[arg(long)]
        json: bool,
    },
    /// Exact test-to-item ratio [n choose d]_q / [n choose k]_q
    Ratio {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Set containment M(d,k,n): e = C(k-s,d-s) - 1
    Macula {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        json: bool,
    },
    /// Set intersection M(i;d,k,n)
    SetGw {
        #[arg(long)]
        i: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        json: bool,
    },
    /// Subspace containment M_q(d,k,n)
    NgoDu {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        json: bool,
    },
    /// Subspace intersection M_q(i;d,k,n)
    GuoWangQ {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        i: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct BuildCommon {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    d: u32,
    /// Output file
    #[arg(long)]
    out: PathBuf,
    /// Bit budget (rows x cols); also settable via QPOOL_BUDGET_BITS
    #[arg(long)]
    budget: Option<u64>,
    /// Output encoding: json-v1 (importable) or csv (inspection only)
    #[arg(long, default_value = "json-v1")]
    format: String,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum BuildCmd {
    /// Subspace containment M_q(d,k,n)
    QCont {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        common: BuildCommon,
    },
    /// Subspace intersection M_q(i;d,k,n)
    QInt {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        common: BuildCommon,
    },
    /// Set containment M(d,k,n)
    SetCont {
        #[command(flatten)]
        common: BuildCommon,
    },
    /// Set intersection M(i;d,k,n)
    SetInt {
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        common: BuildCommon,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Matrix file written by `build` (json-v1)
    #[arg(long, conflicts_with = "family")]
    matrix: Option<PathBuf>,
    /// Verify a design by parameters instead of a file (required for designs
    /// too large to materialize): q-cont | q-int | set-cont | set-int
    #[arg(long, requires = "n", requires = "k", requires = "d")]
    family: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    i: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Number of other columns that may cover a column
    #[arg(long)]
    s: u64,
    /// Exhaustive scan over all covering tuples
    #[arg(long, conflicts_with_all = ["samples", "threshold"])]
    exhaustive: bool,
    /// Sampled mode: number of random tuples to test
    #[arg(long, requires = "threshold", requires = "seed")]
    samples: Option<u64>,
    /// Sampled mode: fail if any private count falls below this
    #[arg(long)]
    threshold: Option<u64>,
    /// 64-bit hex seed (required in sampled mode)
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Certify tightness of (s, e); needs --e and exhaustive workloads
    #[arg(long, requires = "e")]
    fully: bool,
    /// Claimed e for --fully
    #[arg(long)]
    e: Option<u64>,
    /// Tuple budget for exhaustive scans
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Matrix file written by `build` (json-v1)
    #[arg(long)]
    matrix: PathBuf,
    /// Maximum number of positives per trial
    #[arg(long)]
    s: u64,
    /// Decoder error budget
    #[arg(long)]
    e: u64,
    /// Outcome flips injected per trial
    #[arg(long)]
    t: u64,
    #[arg(long)]
    trials: u64,
    /// 64-bit hex seed
    #[arg(long)]
    seed: String,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    json: bool,
}

enum CliError {
    Usage(String),
    Lib(qpool::Error),
    Io(String, std::io::Error),
}

impl From<qpool::Error> for CliError {
    fn from(e: qpool::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(..) => 2,
            CliError::Lib(e) => match e {
                qpool::Error::ResourceBudgetExceeded { .. }
                | qpool::Error::WorkloadBudgetExceeded { .. } => 3,
                qpool::Error::MalformedFile { .. }
                | qpool::Error::VersionMismatch { .. }
                | qpool::Error::ChecksumMismatch { .. } => 2,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
            CliError::Io(path, e) => format!("{path}: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, CliError> {
    let trimmed = s.strip_prefix("0x").unwrap_or(s);
    u64::from_str_radix(trimmed, 16)
        .map_err(|_| CliError::Usage(format!("--seed must be a 64-bit hex string, got {s:?}")))
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn bits_budget(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("QPOOL_BUDGET_BITS") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Usage(format!("QPOOL_BUDGET_BITS must be an integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_BUILD_BUDGET_BITS),
    }
}

fn read_matrix(path: &Path) -> Result<PoolingMatrix, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(design::import(&bytes)?)
}

fn print_breakdown(b: &BoundBreakdown, json: bool) {
    if json {
        let value = json!({
            "bound": b.bound.to_string(),
            "q_exponent": b.q_exponent,
            "gaussian_factor": b.gaussian_factor.to_string(),
            "private_row_factor": b.private_row_factor.to_string(),
            "theorem": b.theorem.to_string(),
            "fully_claimed": b.fully_claimed,
        });
        println!("{value}");
    } else {
        println!("{}", b.bound);
        println!("theorem: {}", b.theorem);
        println!("fully-claimed: {}", b.fully_claimed);
        println!("q-exponent: {}", b.q_exponent);
        println!("gaussian-factor: {}", b.gaussian_factor);
        println!("private-row-factor: {}", b.private_row_factor);
    }
}

fn print_disjunct_report(rep: &DisjunctReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string(rep).expect("report serializes"));
        return;
    }
    println!(
        "mode: {}",
        match rep.mode {
            MeasureMode::Exhaustive => "exhaustive",
            MeasureMode::Sampled => "sampled",
        }
    );
    println!("s: {}", rep.s);
    if let Some(trials) = rep.trials {
        println!("trials: {trials}");
    }
    if let Some(seed) = rep.seed {
        println!("seed: {seed:#018x}");
    }
    println!("min-private: {}", rep.min_private);
    if let Some(e) = rep.e_measured {
        println!("e-measured: {e}");
    }
    match &rep.status {
        DisjunctStatus::Disjunct { e } => println!("status: disjunct e={e}"),
        DisjunctStatus::NotDisjunct => println!("status: not-disjunct"),
        DisjunctStatus::LowerBoundNotFalsified { threshold } => {
            println!("status: lower-bound-not-falsified threshold={threshold}")
        }
    }
    println!(
        "witness: column {} covered by {:?}, private rows {:?}",
        rep.witness.column, rep.witness.covering, rep.witness.private_rows
    );
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Gauss { q, m2, m1, json } => {
            let value = gaussian(q, m2, m1)?;
            if json {
                println!(
                    "{}",
                    json!({"q": q, "m2": m2, "m1": m1, "value": value.to_string()})
                );
            } else {
                println!("{value}");
            }
            Ok(())
        }
        Cmd::Count {
            q,
            j,
            r,
            n,
            m,
            alpha,
            json,
        } => {
            let query = CountingQuery { q, j, r, n, m, alpha };
            let value = count_fixed_intersection(&query)?;
            if json {
                println!(
                    "{}",
                    json!({"q": q, "j": j, "r": r, "n": n, "m": m, "alpha": alpha,
                           "value": value.to_string()})
                );
            } else {
                println!("{value}");
            }
            Ok(())
        }
        Cmd::Bound { which } => {
            let (breakdown, json) = match which {
                BoundCmd::Macula { d, k, n, s, json } => (bound_macula(d, k, n, s)?, json),
                BoundCmd::SetGw { i, d, k, n, s, json } => {
                    (bound_set_intersection(i, d, k, n, s)?, json)
                }
                BoundCmd::NgoDu { q, d, k, n, s, json } => (bound_ngo_du(q, d, k, n, s)?, json),
                BoundCmd::GuoWangQ {
                    q,
                    i,
                    d,
                    k,
                    n,
                    s,
                    json,
                } => (bound_guo_wang_q(q, i, d, k, n, s)?, json),
            };
            print_breakdown(&breakdown, json);
            Ok(())
        }
        Cmd::Build { which } => run_build(which),
        Cmd::Verify(args) => run_verify(*args),
        Cmd::Simulate(args) => run_simulate(args),
        Cmd::Table1 { json } => {
            let rows = table1();
            if json {
                let arr: Vec<_> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "i": r.i,
                            "d": r.d,
                            "s": r.s_bar,
                            "e1_printed": r.e1_printed.to_string(),
                            "e1_computed": r.e1_computed.to_string(),
                            "e1_match": r.e1_match,
                            "e2_printed": r.e2_printed.to_string(),
                            "e2_computed": r.e2_computed.to_string(),
                            "e2_match": r.e2_match,
                            "theorem": r.theorem.to_string(),
                        })
                    })
                    .collect();
                println!("{}", serde_json::Value::Array(arr));
            } else {
                for r in &rows {
                    println!("(i={}, d={}, s={})  {}", r.i, r.d, r.s_bar, r.theorem);
                    println!("  e1 printed  {}", r.e1_printed);
                    println!("  e1 computed {}  match={}", r.e1_computed, r.e1_match);
                    println!("  e2 printed  {}", r.e2_printed);
                    println!("  e2 computed {}  match={}", r.e2_computed, r.e2_match);
                }
            }
            Ok(())
        }
        Cmd::Ratio { q, d, k, n, json } => {
            let ratio = test_to_item_ratio(q, d, k, n)?;
            if json {
                println!(
                    "{}",
                    json!({
                        "rows": ratio.rows.to_string(),
                        "cols": ratio.cols.to_string(),
                        "numerator": ratio.numerator.to_string(),
                        "denominator": ratio.denominator.to_string(),
                    })
                );
            } else {
                println!(
                    "{}/{} = {}/{}",
                    ratio.rows, ratio.cols, ratio.numerator, ratio.denominator
                );
            }
            Ok(())
        }
    }
}

fn run_build(which: BuildCmd) -> Result<(), CliError> {
    let (params, common) = match which {
        BuildCmd::QCont { q, common } => (
            DesignParams {
                family: Family::QContainment,
                q: Some(q),
                n: common.n,
                k: common.k,
                d: common.d,
                i: None,
            },
            common,
        ),
        BuildCmd::QInt { q, i, common } => (
            DesignParams {
                family: Family::QIntersection,
                q: Some(q),
                n: common.n,
                k: common.k,
                d: common.d,
                i: Some(i),
            },
            common,
        ),
        BuildCmd::SetCont { common } => (
            DesignParams {
                family: Family::SetContainment,
                q: None,
                n: common.n,
                k: common.k,
                d: common.d,
                i: None,
            },
            common,
        ),
        BuildCmd::SetInt { i, common } => (
            DesignParams {
                family: Family::SetIntersection,
                q: None,
                n: common.n,
                k: common.k,
                d: common.d,
                i: Some(i),
            },
            common,
        ),
    };
    let format = ExportFormat::parse(&common.format).ok_or_else(|| {
        CliError::Usage(format!(
            "--format must be json-v1 or csv, got {:?}",
            common.format
        ))
    })?;
    let budget = bits_budget(common.budget)?;
    let matrix = build_design(&params, budget)?;
    let bytes = design::export(&matrix, format);
    std::fs::write(&common.out, &bytes)
        .map_err(|e| CliError::Io(common.out.display().to_string(), e))?;
    if common.json {
        println!(
            "{}",
            json!({
                "file": common.out.display().to_string(),
                "family": params.family.as_str(),
                "rows": matrix.row_count(),
                "cols": matrix.col_count(),
                "bytes": bytes.len(),
            })
        );
    } else {
        println!(
            "wrote {}: {} {}x{} ({} bytes)",
            common.out.display(),
            params.family.as_str(),
            matrix.row_count(),
            matrix.col_count(),
            bytes.len()
        );
    }
    Ok(())
}

fn family_from_cli(name: &str) -> Result<Family, CliError> {
    match name {
        "q-cont" => Ok(Family::QContainment),
        "q-int" => Ok(Family::QIntersection),
        "set-cont" => Ok(Family::SetContainment),
        "set-int" => Ok(Family::SetIntersection),
        other => Err(CliError::Usage(format!(
            "--family must be one of q-cont, q-int, set-cont, set-int; got {other:?}"
        ))),
    }
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let workers = args.workers.unwrap_or_else(default_workers);
    let tuple_budget = args.budget.unwrap_or(DEFAULT_WORKLOAD_BUDGET_TUPLES);
    let sampled = args.samples.is_some();
    if args.exhaustive == sampled {
        return Err(CliError::Usage(
            "choose exactly one of --exhaustive or --samples N --threshold T --seed HEX".into(),
        ));
    }
    if args.fully && sampled {
        return Err(CliError::Usage(
            "--fully requires exhaustive measurements".into(),
        ));
    }

    enum Source {
        Dense(PoolingMatrix),
        Virtual(VirtualDesign),
    }
    let source = match (&args.matrix, &args.family) {
        (Some(path), None) => Source::Dense(read_matrix(path)?),
        (None, Some(fam)) => {
            let family = family_from_cli(fam)?;
            let params = DesignParams {
                family,
                q: args.q,
                n: args.n.unwrap(),
                k: args.k.unwrap(),
                d: args.d.unwrap(),
                i: args.i,
            };
            if args.exhaustive {
                // Exhaustive scans need the materialized matrix.
                Source::Dense(build_design(&params, bits_budget(None)?)?)
            } else {
                Source::Virtual(VirtualDesign::new(params)?)
            }
        }
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of --matrix FILE or --family with parameters".into(),
            ))
        }
    };

    if args.fully {
        let e = args.e.unwrap();
        let matrix = match &source {
            Source::Dense(m) => m,
            Source::Virtual(_) => unreachable!("--fully forces exhaustive, which forces dense"),
        };
        let outcome = check_fully(matrix, args.s, e, workers, tuple_budget)?;
        if args.json {
            println!(
                "{}",
                json!({"s": args.s, "e": e, "result": serde_json::to_value(&outcome).unwrap()})
            );
        } else {
            match outcome {
                FullyCheck::Certified => println!("certified: fully {}^{}-disjunct", args.s, e),
                FullyCheck::Refuted { reason } => println!("refuted: {reason}"),
            }
        }
        return Ok(());
    }

    let report = if args.exhaustive {
        let matrix = match &source {
            Source::Dense(m) => m,
            Source::Virtual(_) => unreachable!("exhaustive forces dense above"),
        };
        measure_exhaustive(matrix, args.s, workers, tuple_budget)?
    } else {
        let seed = parse_seed(args.seed.as_deref().expect("clap requires seed"))?;
        let threshold = args.threshold.expect("clap requires threshold");
        let trials = args.samples.unwrap();
        let oracle: &dyn ColumnOracle = match &source {
            Source::Dense(m) => m,
            Source::Virtual(v) => v,
        };
        falsify_sampled(oracle, args.s, threshold, trials, seed, workers)?
    };
    print_disjunct_report(&report, args.json);
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let matrix = read_matrix(&args.matrix)?;
    let seed = parse_seed(&args.seed)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    let report = simulate(&matrix, args.s, args.e, args.t, args.trials, seed, workers)?;
    if args.json {
        println!("{}", serde_json::to_string(&report).expect("serializes"));
    } else {
        println!("trials: {}", report.trials);
        println!("successes: {}", report.successes);
        println!(
            "s: {}  e: {}  t: {}",
            report.s_used, report.e_used, report.t_used
        );
        println!("seed: {:#018x}", report.seed);
        println!("out-of-guarantee: {}", report.out_of_guarantee);
        for f in &report.failures {
            println!(
                "failure at trial {}: positives {:?}, flipped {:?}, decoded {:?}",
                f.trial, f.positives, f.flipped, f.decoded
            );
        }
    }
    Ok(())
}

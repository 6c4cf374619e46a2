use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use wvc_core::instgen::{default_corpus, generate, GenSpec, Model, WeightModel};
use wvc_core::instrument::{
    audit_row, branching_number, global_bound_check, FailureKind, FloorSource, RecurrenceSpec,
    RowKey,
};
use wvc_core::oracle::{exact_min_weight_vc, DEFAULT_MAX_N};
use wvc_core::weight::{format_decimal, parse_decimal};
use wvc_core::wgr::{self, WgrFile};
use wvc_core::{solve, solve_traced, EngineError, FMode, MeasureParams, Solution, SolveConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NON_SUBCUBIC: u8 = 3;
const EXIT_F_PROPERTY: u8 = 4;
const EXIT_ORACLE_MISMATCH: u8 = 5;

#[derive(Parser)]
#[command(
    name = "wvc",
    version,
    about = "Exact minimum-weight vertex cover for graphs of maximum degree 3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Robust,
}

impl From<Mode> for FMode {
    fn from(m: Mode) -> FMode {
        match m {
            Mode::Strict => FMode::Strict,
            Mode::Robust => FMode::Robust,
        }
    }
}

#[derive(clap::Args)]
struct ParamArgs {
    /// Weight of a VCC1 vertex in m1.
    #[arg(long)]
    alpha: Option<String>,
    /// Weight of the potential in m2.
    #[arg(long)]
    beta: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a .wgr instance.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Robust)]
        mode: Mode,
        /// Write the branch report as JSON.
        #[arg(long, value_name = "OUT.json")]
        stats: Option<PathBuf>,
        /// Write one JSON trace event per line.
        #[arg(long, value_name = "OUT.jsonl")]
        trace: Option<PathBuf>,
        /// Compare against the brute-force oracle (n <= 26).
        #[arg(long)]
        check_oracle: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Generate a .wgr instance.
    Gen {
        /// cubic-pairing, subcubic-erdos, cycle, path, triangle-gadget, k4-cluster or bipartite.
        model: String,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// unit, uniform-int:W or rational.
        #[arg(long, default_value = "unit")]
        weights: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Branching number of a vector of measure decreases.
    Bound {
        vector: Vec<String>,
        /// Use the vector of an audit table row, e.g. rule4 or rule7-cycle5.
        #[arg(long, conflicts_with = "vector")]
        row: Option<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Solve and audit every instance of a corpus and print a TSV summary.
    Audit {
        /// Directory of .wgr files; the built-in corpus when omitted.
        dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        mode: Mode,
        /// Largest instance compared against the oracle.
        #[arg(long, default_value_t = 22)]
        oracle_max_n: usize,
    },
    /// Write the built-in audit corpus as .wgr files.
    Corpus { dir: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            path,
            mode,
            stats,
            trace,
            check_oracle,
            params,
        } => cmd_solve(
            &path,
            mode,
            stats.as_deref(),
            trace.as_deref(),
            check_oracle,
            &params,
        ),
        Command::Gen {
            model,
            n,
            seed,
            weights,
            out,
        } => cmd_gen(&model, n, seed, &weights, out.as_deref()),
        Command::Bound {
            vector,
            row,
            tol,
            params,
        } => cmd_bound(&vector, row.as_deref(), tol, &params),
        Command::Audit {
            dir,
            mode,
            oracle_max_n,
        } => cmd_audit(dir.as_deref(), mode, oracle_max_n),
        Command::Corpus { dir } => cmd_corpus(&dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wvc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn measure_params(args: &ParamArgs) -> Result<MeasureParams, Failure> {
    let mut p = MeasureParams::default();
    let parse = |name: &str, s: &str| {
        parse_decimal(s).map_err(|e| Failure::new(EXIT_USAGE, format!("--{name}: {e}")))
    };
    if let Some(a) = &args.alpha {
        p.alpha = parse("alpha", a)?;
    }
    if let Some(b) = &args.beta {
        p.beta = parse("beta", b)?;
    }
    Ok(p)
}

fn read_wgr(path: &Path) -> Result<WgrFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    wgr::parse(&text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn engine_failure(e: EngineError) -> Failure {
    let code = match e {
        EngineError::NonSubcubic { .. } => EXIT_NON_SUBCUBIC,
        EngineError::FPropertyViolation { .. } => EXIT_F_PROPERTY,
        _ => EXIT_FAILURE,
    };
    Failure::new(code, e.to_string())
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn cmd_solve(
    path: &Path,
    mode: Mode,
    stats: Option<&Path>,
    trace: Option<&Path>,
    check_oracle: bool,
    params: &ParamArgs,
) -> CmdResult {
    let file = read_wgr(path)?;
    let cfg = SolveConfig {
        mode: mode.into(),
        params: measure_params(params)?,
        ..Default::default()
    };
    let (g, w) = (&file.graph, &file.weights);
    if check_oracle && g.n_total() > DEFAULT_MAX_N {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("--check-oracle needs n <= {DEFAULT_MAX_N}"),
        ));
    }
    let sol = match trace {
        Some(out) => {
            let mut events = Vec::new();
            let sol = solve_traced(g, w, &cfg, &mut events).map_err(engine_failure)?;
            let mut text = String::new();
            for ev in &events {
                text.push_str(&serde_json::to_string(ev).expect("trace serializes"));
                text.push('\n');
            }
            write_file(out, &text)?;
            sol
        }
        None => solve(g, w, &cfg).map_err(engine_failure)?,
    };
    let ids: Vec<String> = sol
        .outcome
        .cover
        .iter()
        .map(|v| (v.index() + 1).to_string())
        .collect();
    println!("cover {}", ids.join(" "));
    println!("weight {}", format_decimal(&sol.outcome.weight));
    println!("t {}", sol.report.t);
    println!("leaves {}", sol.report.leaves);
    if let Some(out) = stats {
        write_file(out, &(sol.report.to_json() + "\n"))?;
    }
    if check_oracle {
        let oracle =
            exact_min_weight_vc(g, w).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
        println!("oracle {}", format_decimal(&oracle.weight));
        if oracle.weight != sol.outcome.weight {
            return Err(Failure::new(
                EXIT_ORACLE_MISMATCH,
                format!(
                    "oracle weight {} differs from solver weight {}",
                    format_decimal(&oracle.weight),
                    format_decimal(&sol.outcome.weight)
                ),
            ));
        }
    }
    Ok(())
}

fn gen_comment(req: &GenSpec) -> String {
    format!(
        "wvc gen {} {} --seed {} --weights {}",
        req.model, req.n, req.seed, req.weights
    )
}

fn cmd_gen(model: &str, n: usize, seed: u64, weights: &str, out: Option<&Path>) -> CmdResult {
    let usage = |e: wvc_core::instgen::GenError| Failure::new(EXIT_USAGE, e.to_string());
    let req = GenSpec {
        model: model.parse::<Model>().map_err(usage)?,
        n,
        seed,
        weights: weights.parse::<WeightModel>().map_err(usage)?,
    };
    let inst = generate(&req).map_err(usage)?;
    let text = wgr::emit(&[gen_comment(&req)], &inst.graph, &inst.weights);
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bound(vector: &[String], row: Option<&str>, tol: f64, params: &ParamArgs) -> CmdResult {
    let decreases = match row {
        Some(label) => {
            let key = RowKey::from_label(label)
                .ok_or_else(|| Failure::new(EXIT_USAGE, format!("unknown row `{label}`")))?;
            let p = measure_params(params)?;
            audit_row(key, &p).vector(&p)
        }
        None => vector
            .iter()
            .map(|s| parse_decimal(s).map_err(|e| Failure::new(EXIT_USAGE, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?,
    };
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::new(EXIT_USAGE, "--tol must be positive"));
    }
    let rec =
        RecurrenceSpec::new(decreases).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    println!("{:.6}", branching_number(&rec, tol));
    Ok(())
}

struct Row {
    name: String,
    line: String,
    mismatch: bool,
    error: bool,
    analysis: usize,
    conservative: usize,
    lemma: usize,
    ratio: Option<f64>,
}

fn audit_one(name: String, file: &WgrFile, cfg: &SolveConfig, oracle_max_n: usize) -> Row {
    let (g, w) = (&file.graph, &file.weights);
    let n = g.n_total();
    match solve(g, w, cfg) {
        Err(e) => Row {
            line: format!("{name}\t{n}\t-\t-\t-\t-\t-\t-\t-\t-\t-\terror: {e}"),
            name,
            mismatch: false,
            error: true,
            analysis: 0,
            conservative: 0,
            lemma: 0,
            ratio: None,
        },
        Ok(Solution {
            outcome, report, ..
        }) => {
            let oracle = if n <= oracle_max_n {
                match exact_min_weight_vc(g, w) {
                    Ok(o) if o.weight == outcome.weight => "match",
                    _ => "MISMATCH",
                }
            } else {
                "skip"
            };
            let floors: Vec<_> = report
                .failures_of(FailureKind::Floor)
                .filter_map(|f| f.detail.as_ref())
                .collect();
            let analysis = floors
                .iter()
                .filter(|v| v.source == FloorSource::Analysis)
                .count();
            let conservative = floors.len() - analysis;
            let lemma = report
                .audit_failures
                .iter()
                .filter(|f| f.kind != FailureKind::Floor)
                .count();
            let (_, ratio) = global_bound_check(&report);
            Row {
                line: format!(
                    "{name}\t{n}\t{}\t{}\t{}\t{ratio:.6}\t{analysis}\t{conservative}\t{lemma}\t{}\t{}\t{oracle}",
                    report.t,
                    report.leaves,
                    format_decimal(&report.m1_root),
                    report.robust_fallbacks,
                    format_decimal(&outcome.weight),
                ),
                name,
                mismatch: oracle == "MISMATCH",
                error: false,
                analysis,
                conservative,
                lemma,
                ratio: Some(ratio),
            }
        }
    }
}

fn cmd_audit(dir: Option<&Path>, mode: Mode, oracle_max_n: usize) -> CmdResult {
    let instances: Vec<(String, WgrFile)> = match dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "wgr"))
                .collect();
            paths.sort();
            paths
                .iter()
                .map(|p| {
                    Ok((
                        p.file_stem().unwrap().to_string_lossy().into_owned(),
                        read_wgr(p)?,
                    ))
                })
                .collect::<Result<_, Failure>>()?
        }
        None => default_corpus()
            .into_iter()
            .map(|(name, req)| {
                let inst = generate(&req).expect("built-in corpus generates");
                (
                    name,
                    WgrFile {
                        comments: vec![],
                        graph: inst.graph,
                        weights: inst.weights,
                    },
                )
            })
            .collect(),
    };
    let cfg = SolveConfig {
        mode: mode.into(),
        ..Default::default()
    };
    let rows: Vec<Row> = instances
        .par_iter()
        .map(|(name, f)| audit_one(name.clone(), f, &cfg, oracle_max_n))
        .collect();

    let mut out = std::io::stdout().lock();
    let mut emit =
        |s: String| writeln!(out, "{s}").map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()));
    emit("instance\tn\tt\tleaves\tm1_root\tratio\tanalysis_violations\tconservative_violations\tlemma_failures\tfallbacks\tweight\toracle".into())?;
    for r in &rows {
        emit(r.line.clone())?;
    }
    let count = |f: &dyn Fn(&Row) -> usize| rows.iter().map(f).sum::<usize>();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let mismatches = count(&|r| r.mismatch as usize);
    let errors = count(&|r| r.error as usize);
    emit(format!("# instances\t{}", rows.len()))?;
    emit(format!("# errors\t{errors}"))?;
    emit(format!("# oracle_mismatches\t{mismatches}"))?;
    emit(format!("# analysis_violations\t{}", count(&|r| r.analysis)))?;
    emit(format!(
        "# conservative_violations\t{}",
        count(&|r| r.conservative)
    ))?;
    emit(format!("# lemma_failures\t{}", count(&|r| r.lemma)))?;
    emit(format!(
        "# ratio_above_1\t{}",
        ratios.iter().filter(|&&x| x > 1.0).count()
    ))?;
    emit(format!("# max_ratio\t{max_ratio:.6}"))?;
    if mismatches > 0 {
        let names: Vec<&str> = rows
            .iter()
            .filter(|r| r.mismatch)
            .map(|r| r.name.as_str())
            .collect();
        return Err(Failure::new(
            EXIT_ORACLE_MISMATCH,
            format!("oracle mismatch on {}", names.join(", ")),
        ));
    }
    if errors > 0 {
        return Err(Failure::new(
            EXIT_FAILURE,
            format!("{errors} instances failed to solve"),
        ));
    }
    Ok(())
}

fn cmd_corpus(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", dir.display())))?;
    for (name, req) in default_corpus() {
        let inst = generate(&req).expect("built-in corpus generates");
        write_file(
            &dir.join(format!("{name}.wgr")),
            &wgr::emit(&[gen_comment(&req)], &inst.graph, &inst.weights),
        )?;
    }
    Ok(())
}

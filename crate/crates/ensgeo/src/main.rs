//! `ensgeo` — score-space geometry for ensemble classifiers, end to end:
//! fuse score groups, pick member subsets, emit the ensemble-size curve, run
//! the shrink experiment, and compare result columns.
//!
//! Every run is seeded and prints/writes byte-identical output for identical
//! flags and inputs, at any `--threads` setting. Exit codes: 0 success,
//! 1 user/input error, 2 a guaranteed invariant failed (a bug, not bad input).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ensemble_geometry::eval::{accuracy, paired_t, pearson, shrink_experiment, ExperimentConfig, ShrinkReport};
use ensemble_geometry::fusion::{centroid_fuse, theta_limit_curve, weighted_fuse};
use ensemble_geometry::io::{
    fmt_sig, load_column, load_dataset_csv, load_scores_document, write_results, ResultsFormat,
};
use ensemble_geometry::selection::{
    exact_best_subset, greedy_forward_subset, local_search_subset, SelectionObjective,
    SelectionResult, DEFAULT_LOCAL_SEARCH_ITERS, DEFAULT_SUBSET_CAP,
};
use ensemble_geometry::space::{euclidean_distance, ScorePoint};
use ensemble_geometry::weights::solve_optimal_weights;

#[derive(Parser)]
#[command(name = "ensgeo", version, about = "Score-space geometry for ensemble classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Significant digits in printed values.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,

    /// Worker threads for parallel sections; outputs are identical for any
    /// value (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse a scores file by majority voting (mv) or optimally weighted
    /// majority voting (wmv); writes a fusion report.
    Fuse {
        /// Scores JSON file.
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, value_enum)]
        method: Objective,
        /// Ridge added to the normal equations (wmv only).
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
        /// Output path for the fusion report (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for the best m' member subset under a fusion objective.
    Select {
        #[arg(long)]
        scores: PathBuf,
        /// Subset size to select.
        #[arg(long = "m-prime")]
        m_prime: usize,
        #[arg(long, value_enum)]
        method: SearchMethod,
        #[arg(long, value_enum)]
        objective: Objective,
        /// Max subsets the exact enumerator may visit.
        #[arg(long)]
        cap: Option<u64>,
        /// Iteration budget for the local search.
        #[arg(long)]
        iters: Option<u64>,
    },
    /// Emit the ensemble-size curve as CSV: one row per m, one column per
    /// theta (pairwise dissimilarity over common performance distance).
    Theta {
        /// Comma-separated theta values, e.g. 0.25,0.5,0.75,1.
        #[arg(long = "theta-list", value_delimiter = ',', required = true)]
        theta_list: Vec<String>,
        #[arg(long = "m-max")]
        m_max: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the shrink experiment on a dataset CSV: grow a forest, remove one
    /// random tree at a time, evaluate both fusion schemes at every size.
    Experiment {
        /// Dataset CSV with a "class" label column.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 30)]
        trees: usize,
        /// Training fraction of the stratified split.
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        /// Output directory (results.csv, results.json, summary.txt).
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired t test and Pearson correlation of two aligned numeric columns.
    Stats {
        /// First column file (one value per line).
        #[arg(long)]
        a: PathBuf,
        /// Second column file.
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Objective {
    Mv,
    Wmv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SearchMethod {
    Exact,
    Greedy,
    Local,
}

enum CliError {
    /// Bad input or arguments; exit 1.
    User(String),
    /// A theorem-guaranteed check failed; exit 2.
    Internal(String),
}

impl From<ensemble_geometry::Error> for CliError {
    fn from(e: ensemble_geometry::Error) -> Self {
        CliError::User(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fuse { scores, method, ridge, out } => {
            cmd_fuse(scores, *method, *ridge, out, cli.precision)
        }
        Command::Select { scores, m_prime, method, objective, cap, iters } => cmd_select(
            scores,
            *m_prime,
            *method,
            *objective,
            cap.unwrap_or(DEFAULT_SUBSET_CAP),
            iters.unwrap_or(DEFAULT_LOCAL_SEARCH_ITERS),
            cli.seed,
            cli.precision,
        ),
        Command::Theta { theta_list, m_max, out } => {
            cmd_theta(theta_list, *m_max, out, cli.precision)
        }
        Command::Experiment { data, trees, split, trials, out } => cmd_experiment(
            data,
            ExperimentConfig {
                m_max: *trees,
                trials: *trials,
                train_fraction: *split,
                seed: cli.seed,
            },
            out,
            cli.precision,
        ),
        Command::Stats { a, b } => cmd_stats(a, b, cli.precision),
    }
}

#[derive(Serialize)]
struct FuseReport {
    method: &'static str,
    n: usize,
    p: usize,
    m: usize,
    distance: f64,
    accuracy: Option<f64>,
    weights: Option<Vec<f64>>,
    ridge_applied: bool,
    fused: Vec<Vec<f64>>,
}

fn cmd_fuse(
    scores: &Path,
    method: Objective,
    ridge: f64,
    out: &Path,
    precision: usize,
) -> Result<(), CliError> {
    let doc = load_scores_document(scores)?;
    let (fused, weights, ridge_applied) = match method {
        Objective::Mv => (centroid_fuse(&doc.group).fused, None, false),
        Objective::Wmv => {
            let sol = solve_optimal_weights(&doc.group, &doc.ideal, ridge)?;
            let fused = weighted_fuse(&doc.group, &sol.weights)?.fused;
            (fused, Some(sol.weights), sol.ridge_applied)
        }
    };
    let distance = euclidean_distance(&fused, &doc.ideal)?;
    let acc = doc
        .ideal
        .is_single_label()
        .then(|| accuracy(&fused, &doc.ideal))
        .transpose()?;

    println!("method: {}", if method == Objective::Mv { "mv" } else { "wmv" });
    println!("members: {}", doc.group.len());
    println!("distance: {}", fmt_sig(distance, precision));
    match acc {
        Some(a) => println!("accuracy: {}", fmt_sig(a, precision)),
        None => println!("accuracy: n/a (multi-label data)"),
    }
    if let Some(w) = &weights {
        let rendered: Vec<String> =
            w.values().iter().map(|&v| fmt_sig(v, precision)).collect();
        println!("weights: {}", rendered.join(" "));
        if ridge_applied {
            println!("note: degenerate gram handled (see ridge/diagnostics)");
        }
    }

    let (n, p) = fused.shape();
    let report = FuseReport {
        method: if method == Objective::Mv { "mv" } else { "wmv" },
        n,
        p,
        m: doc.group.len(),
        distance,
        accuracy: acc,
        weights: weights.map(|w| w.values().to_vec()),
        ridge_applied,
        fused: (0..n).map(|i| fused.row(i).to_vec()).collect(),
    };
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    std::fs::write(out, body)
        .map_err(|e| CliError::User(format!("{}: {e}", out.display())))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_select(
    scores: &Path,
    m_prime: usize,
    method: SearchMethod,
    objective: Objective,
    cap: u64,
    iters: u64,
    seed: u64,
    precision: usize,
) -> Result<(), CliError> {
    let doc = load_scores_document(scores)?;
    let objective = match objective {
        Objective::Mv => SelectionObjective::Mv,
        Objective::Wmv => SelectionObjective::Wmv,
    };
    let result: SelectionResult = match method {
        SearchMethod::Exact => exact_best_subset(&doc.group, &doc.ideal, m_prime, objective, cap)?,
        SearchMethod::Greedy => greedy_forward_subset(&doc.group, &doc.ideal, m_prime, objective)?,
        SearchMethod::Local => {
            local_search_subset(&doc.group, &doc.ideal, m_prime, objective, iters, seed)?
        }
    };
    let ids: Vec<&str> = result
        .chosen
        .iter()
        .map(|&k| doc.group.member(k).classifier_id())
        .collect();
    println!("chosen: {}", ids.join(" "));
    let indices: Vec<String> = result.chosen.iter().map(|k| k.to_string()).collect();
    println!("indices: {}", indices.join(" "));
    println!("objective: {}", fmt_sig(result.objective, precision));
    println!("evaluations: {}", result.evaluations);
    Ok(())
}

fn cmd_theta(
    theta_list: &[String],
    m_max: u64,
    out: &Path,
    precision: usize,
) -> Result<(), CliError> {
    if m_max < 2 {
        return Err(CliError::User(format!("--m-max must be at least 2, got {m_max}")));
    }
    let thetas: Vec<(String, f64)> = theta_list
        .iter()
        .map(|token| {
            let token = token.trim().to_string();
            let value: f64 = token
                .parse()
                .map_err(|_| CliError::User(format!("bad theta value {token:?}")))?;
            Ok((token, value))
        })
        .collect::<Result<_, CliError>>()?;
    if thetas.is_empty() {
        return Err(CliError::User("--theta-list needs at least one value".into()));
    }

    let mut csv = String::from("m");
    for (token, _) in &thetas {
        write!(csv, ",theta={token}").unwrap();
    }
    csv.push('\n');
    for m in 2..=m_max {
        write!(csv, "{m}").unwrap();
        for &(_, theta) in &thetas {
            let v = theta_limit_curve(theta, m)?;
            write!(csv, ",{}", fmt_sig(v, precision)).unwrap();
        }
        csv.push('\n');
    }
    std::fs::write(out, csv)
        .map_err(|e| CliError::User(format!("{}: {e}", out.display())))?;
    println!("wrote {} rows to {}", m_max - 1, out.display());
    Ok(())
}

fn render_summary(report: &ShrinkReport, config: &ExperimentConfig, data: &Path) -> String {
    let mut s = String::new();
    writeln!(s, "dataset: {}", data.display()).unwrap();
    writeln!(
        s,
        "trees: {}  trials: {}  split: {}  seed: {}",
        config.m_max, config.trials, config.train_fraction, config.seed
    )
    .unwrap();
    writeln!(s, "rows: {} (m = 2..{})", report.rows.len(), config.m_max).unwrap();
    writeln!(s, "guaranteed train-side invariants:").unwrap();
    for c in &report.checks {
        writeln!(
            s,
            "  {} {} (worst violation {:e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst
        )
        .unwrap();
    }
    let wins = report
        .rows
        .iter()
        .filter(|r| r.wrf_train_dist < r.rf_train_dist)
        .count();
    writeln!(
        s,
        "weighted voting beats majority voting on train distance at {wins}/{} sizes",
        report.rows.len()
    )
    .unwrap();
    s
}

fn cmd_experiment(
    data: &Path,
    config: ExperimentConfig,
    out_dir: &Path,
    _precision: usize,
) -> Result<(), CliError> {
    let ds = load_dataset_csv(data)?;
    let report = shrink_experiment(&ds, &config)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::User(format!("{}: {e}", out_dir.display())))?;
    write_results(&report.rows, out_dir.join("results.csv"), ResultsFormat::Csv)?;
    write_results(&report.rows, out_dir.join("results.json"), ResultsFormat::Json)?;
    let summary = render_summary(&report, &config, data);
    std::fs::write(out_dir.join("summary.txt"), &summary)
        .map_err(|e| CliError::User(format!("{}: {e}", out_dir.display())))?;
    print!("{summary}");

    if !report.all_checks_passed() {
        return Err(CliError::Internal(
            "a train-side guaranteed invariant failed; see summary.txt".into(),
        ));
    }
    Ok(())
}

fn cmd_stats(a: &Path, b: &Path, precision: usize) -> Result<(), CliError> {
    let col_a = load_column(a)?;
    let col_b = load_column(b)?;
    // The paired test runs first: identical columns still yield t = 0 before
    // the correlation reports its zero-variance error.
    let t = paired_t(&col_a, &col_b)?;
    println!("n: {}", col_a.len());
    println!("t: {}", fmt_sig(t.t, precision));
    println!("df: {}", t.df);
    println!("mean_diff: {}", fmt_sig(t.mean_diff, precision));
    if t.degenerate {
        println!("note: zero variance of differences with nonzero mean (t is infinite)");
    }
    let r = pearson(&col_a, &col_b)?;
    println!("pearson_r: {}", fmt_sig(r, precision));
    Ok(())
}

//! Command-line front end: forest summaries, descendant trees, Monte Carlo
//! estimates, and the exhaustive verification suites.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 estimate
//! flagged unreliable (truncation rate above threshold).

use anyhow::Context;
use bumpforest::estimators::{
    estimate_bump_moments, simulate_gw, tail_diagnostic, EstimateReport, ReportRow,
    DEFAULT_UNRELIABLE_TRUNCATION_RATE,
};
use bumpforest::perm_forest::{
    build_forest, desc_tree, Permutation, DEFAULT_DESC_MAX_NODES, DEFAULT_FOREST_MAX_NODES,
};
use bumpforest::point_process::RngStream;
use bumpforest::verify::{run_suite, Budgets, Suite};
use bumpforest::TreeCaps;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

const SEED_ENV: &str = "BUMPFOREST_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "bumpforest",
    version,
    about = "Fixed-point forest enumeration and Poisson bump-tree Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DescFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stat {
    Size,
    Leaves,
    Size2,
    GwSize,
    GwSize2,
    Hill,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the whole forest for permutations of size n and summarize it.
    Forest {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FOREST_MAX_NODES)]
        max_nodes: u64,
    },
    /// Print the descendant tree of one permutation.
    Desc {
        #[arg(long)]
        perm: String,
        #[arg(long, value_enum, default_value = "text")]
        format: DescFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DESC_MAX_NODES)]
        max_nodes: u64,
    },
    /// Monte Carlo estimates over an alpha grid, with analytic columns.
    Estimate {
        /// Intensity values in (0, 1]; repeat the flag or give a comma list.
        #[arg(long, required = true, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Falls back to $BUMPFOREST_SEED, then 42.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to available parallelism; recorded in the output header.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = 1_000)]
        max_depth: u32,
        #[arg(long, default_value_t = 10_000_000)]
        max_nodes: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Stat::Size, Stat::Leaves])]
        stats: Vec<Stat>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an exhaustive verification suite; nonzero exit on a counterexample.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 4)]
        r_max: u32,
        #[arg(long, default_value_t = 6)]
        len_max: usize,
    },
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, anyhow::Error> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .parse::<u64>()
            .with_context(|| format!("{SEED_ENV}={v:?} is not a u64")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn write_out(out: Option<&PathBuf>, content: &str) -> Result<(), anyhow::Error> {
    match out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_forest(
    n: usize,
    format: Format,
    out: Option<&PathBuf>,
    max_nodes: u64,
) -> Result<u8, anyhow::Error> {
    let forest = build_forest(n, max_nodes)?;
    let summary = forest.summary();
    let content = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&summary)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = format!(
                "# forest n={} total={} trees={}\n# identity_tree_size={}\n# longest_path={} from={} to={} unique={}\nbase,size,max_depth\n",
                summary.n,
                summary.total_perms,
                summary.tree_count,
                summary.identity_tree_size,
                summary.max_depth,
                summary.deepest_perm,
                summary.deepest_base,
                summary.deepest_unique,
            );
            for t in &summary.trees {
                s.push_str(&format!("{},{},{}\n", t.base_perm, t.size, t.max_depth));
            }
            s
        }
    };
    write_out(out, &content)?;
    Ok(0)
}

fn cmd_desc(
    perm: &str,
    format: DescFormat,
    out: Option<&PathBuf>,
    max_nodes: u64,
) -> Result<u8, anyhow::Error> {
    let p = Permutation::parse(perm)?;
    let tree = desc_tree(&p, max_nodes);
    let content = match format {
        DescFormat::Text => tree.render_text(),
        DescFormat::Json => {
            let mut s = serde_json::to_string_pretty(&tree.to_json())?;
            s.push('\n');
            s
        }
    };
    write_out(out, &content)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    alphas: &[f64],
    trials: u64,
    seed: u64,
    workers: usize,
    caps: TreeCaps,
    stats: &[Stat],
    format: Format,
    out: Option<&PathBuf>,
) -> Result<u8, anyhow::Error> {
    let base = RngStream::new(seed, 0);
    let mut report = EstimateReport::new(seed, workers);
    let wants = |s: Stat| stats.contains(&s);
    let bump_stats: Vec<&str> = [
        (Stat::Size, "size"),
        (Stat::Leaves, "leaves"),
        (Stat::Size2, "size2"),
    ]
    .iter()
    .filter(|(s, _)| wants(*s))
    .map(|(_, name)| *name)
    .collect();
    let gw_stats: Vec<&str> = [(Stat::GwSize, "gw_size"), (Stat::GwSize2, "gw_size2")]
        .iter()
        .filter(|(s, _)| wants(*s))
        .map(|(_, name)| *name)
        .collect();

    for (ai, &alpha) in alphas.iter().enumerate() {
        let ai = ai as u64;
        if !bump_stats.is_empty() {
            let sub = estimate_bump_moments(
                alpha,
                trials,
                &base.substream(1).substream(ai),
                caps,
                workers,
            )?;
            report.rows.extend(
                sub.rows
                    .into_iter()
                    .filter(|r| bump_stats.contains(&r.statistic.as_str())),
            );
        }
        if !gw_stats.is_empty() {
            let sub = simulate_gw(
                alpha,
                trials,
                &base.substream(2).substream(ai),
                caps.max_nodes,
                workers,
            )?;
            report.rows.extend(
                sub.rows
                    .into_iter()
                    .filter(|r| gw_stats.contains(&r.statistic.as_str())),
            );
        }
        if wants(Stat::Hill) {
            let tail = tail_diagnostic(alpha, trials, &base.substream(3).substream(ai), caps)?;
            report.rows.push(ReportRow {
                alpha,
                statistic: "hill_index".to_string(),
                estimate: tail.hill_index,
                se: 0.0,
                analytic: String::new(),
                trials,
                truncation_rate: tail.truncated_trees as f64 / trials.max(1) as f64,
                seed,
            });
        }
    }

    let content = match format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let mut s = report.to_json_pretty();
            s.push('\n');
            s
        }
    };
    write_out(out, &content)?;
    if report.any_unreliable(DEFAULT_UNRELIABLE_TRUNCATION_RATE) {
        eprintln!(
            "warning: truncation rate above {DEFAULT_UNRELIABLE_TRUNCATION_RATE}; estimates flagged unreliable"
        );
        return Ok(3);
    }
    Ok(0)
}

fn cmd_verify(suite: Suite, budgets: Budgets) -> u8 {
    let outcome = run_suite(suite, budgets);
    match &outcome.failure {
        None => {
            println!("suite {}: PASS ({} checks)", outcome.suite, outcome.checks);
            0
        }
        Some(counterexample) => {
            println!("suite {}: FAIL\n{counterexample}", outcome.suite);
            2
        }
    }
}

fn run(cli: Cli) -> Result<u8, anyhow::Error> {
    match cli.cmd {
        Cmd::Forest {
            n,
            format,
            out,
            max_nodes,
        } => cmd_forest(n, format, out.as_ref(), max_nodes),
        Cmd::Desc {
            perm,
            format,
            out,
            max_nodes,
        } => cmd_desc(&perm, format, out.as_ref(), max_nodes),
        Cmd::Estimate {
            alpha,
            trials,
            seed,
            workers,
            max_depth,
            max_nodes,
            stats,
            format,
            out,
        } => {
            for &a in &alpha {
                if !(a.is_finite() && a > 0.0 && a <= 1.0) {
                    anyhow::bail!("alpha {a} outside (0, 1]");
                }
            }
            let seed = resolve_seed(seed)?;
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
            cmd_estimate(
                &alpha,
                trials,
                seed,
                workers,
                TreeCaps {
                    max_depth,
                    max_nodes,
                },
                &stats,
                format,
                out.as_ref(),
            )
        }
        Cmd::Verify {
            suite,
            n_max,
            r_max,
            len_max,
        } => Ok(cmd_verify(
            suite,
            Budgets {
                n_max,
                r_max,
                len_max,
            },
        )),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

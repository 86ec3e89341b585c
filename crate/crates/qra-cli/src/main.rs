//! Command-line front end: analyze a graph, enumerate its admissible
//! paths, predict transition times, simulate, and cross-validate.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qra::algorithm::{classify_regime, enumerate_admissible, run_algorithm, DEFAULT_PATH_CAP};
use qra::experiments::{export_csv, export_json, run_experiment, self_test};
use qra::graph::{BipartiteGraph, IsolatedUPolicy};
use qra::params::{Exponent, ModelParams};
use qra::predictor::{law_for_trace, mean_transition, mixture_mean, LawPrediction};
use qra::rng::Rng;
use qra::simulator::{simulate, Cap};

#[derive(Parser)]
#[command(
    name = "qra",
    about = "Queue-based random access on bipartite interference graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// Interference graph file (edge-list text or JSON)
    #[arg(long)]
    graph: PathBuf,
    /// Accept U-nodes without V-neighbors
    #[arg(long)]
    permissive: bool,
}

#[derive(Args)]
struct ParamsArg {
    /// Model parameters JSON file
    #[arg(long)]
    params: Option<PathBuf>,
    /// Activation exponent on the U side; a rational like "1/2" makes
    /// the criticality comparison exact (overrides the params file)
    #[arg(long)]
    beta: Option<String>,
    /// Scale parameter r (overrides the params file)
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct OutputArg {
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum least degree, regime, and one seeded elimination trace
    Analyze {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Enumerate every admissible path with its exact probability
    Paths {
        #[command(flatten)]
        graph: GraphArg,
        /// Abort if the enumeration exceeds this many paths
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        cap_paths: usize,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Closed-form transition-time predictions, per path and mixed
    Predict {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: ParamsArg,
        /// Also tabulate each available law to CSV next to --out
        #[arg(long)]
        tabulate: bool,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Run independent replications, one JSON line per outcome
    Simulate {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cap_events: Option<u64>,
        #[arg(long)]
        cap_time: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Monte Carlo cross-validation of the predictions
    Verify {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cap_events: Option<u64>,
        #[arg(long)]
        cap_time: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Built-in sampling and law-normalization oracles
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArg,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_graph(arg: &GraphArg) -> Result<BipartiteGraph> {
    let text = fs::read_to_string(&arg.graph)
        .with_context(|| format!("cannot read graph file {}", arg.graph.display()))?;
    let policy = if arg.permissive {
        IsolatedUPolicy::Allow
    } else {
        IsolatedUPolicy::Reject
    };
    BipartiteGraph::parse_with(&text, policy)
        .with_context(|| format!("invalid graph in {}", arg.graph.display()))
}

fn load_params(arg: &ParamsArg) -> Result<ModelParams> {
    let mut params = match &arg.params {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read params file {}", path.display()))?;
            serde_json::from_str::<ModelParams>(&text)
                .with_context(|| format!("invalid params JSON in {}", path.display()))?
        }
        None => default_params(),
    };
    if let Some(beta) = &arg.beta {
        params.beta = beta.parse::<Exponent>()?;
    }
    if let Some(r) = arg.r {
        params.r = r;
    }
    params.validate().context("invalid model parameters")?;
    Ok(params)
}

/// The baseline configuration shipped in inputs/sub.json.
fn default_params() -> ModelParams {
    ModelParams {
        lambda: 0.5,
        mu_u: 1.0,
        mu_v: 1.0,
        c: 1.0,
        b: 1.0,
        beta: Exponent::from_ratio(1, 4).expect("static"),
        b_prime: 1.0,
        beta_prime: 2.0,
        gamma_u: 1.0,
        gamma_v: 1.0,
        r: 2000.0,
    }
}

fn cap_from(p: &ModelParams, cap_events: Option<u64>, cap_time: Option<f64>) -> Cap {
    let mut cap = Cap::default_for(p);
    if let Some(e) = cap_events {
        cap.max_events = e;
    }
    if let Some(t) = cap_time {
        cap.max_time = t;
    }
    cap
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    Ok(())
}

fn emit(output: &OutputArg, content: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn emit_named(out: Option<&Path>, suffix: &str, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut name = path.as_os_str().to_owned();
            name.push(".");
            name.push(suffix);
            let path = PathBuf::from(name);
            fs::write(&path, content)
                .with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            println!("# --- {suffix} ---");
            print!("{content}");
            Ok(())
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Analyze {
            graph,
            params,
            seed,
        } => {
            let g = load_graph(&graph)?;
            let p = load_params(&params)?;
            let mut rng = Rng::seed_from_u64(seed);
            let trace = run_algorithm(&g, &mut rng)?;
            let regime = classify_regime(trace.d_star(), &p.beta);
            println!(
                "d*={}, regime={}, trace={} (p={})",
                trace.d_star(),
                regime.tag,
                trace.order().join(","),
                trace.probability()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Paths {
            graph,
            cap_paths,
            output,
        } => {
            let g = load_graph(&graph)?;
            let traces = enumerate_admissible(&g, cap_paths)?;
            let json = serde_json::to_string_pretty(&traces)? + "\n";
            emit(&output, &json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict {
            graph,
            params,
            tabulate,
            output,
        } => {
            let g = load_graph(&graph)?;
            let p = load_params(&params)?;
            let traces = enumerate_admissible(&g, DEFAULT_PATH_CAP)?;
            let per_trace: Vec<_> = traces
                .iter()
                .map(|t| {
                    let pred = mean_transition(t, &p)?;
                    let mean = pred.mean_at(p.r);
                    Ok(serde_json::json!({
                        "order": t.order(),
                        "prob": t.probability(),
                        "prediction": pred,
                        "predicted_mean": mean,
                    }))
                })
                .collect::<Result<_>>()?;
            let mixture = mixture_mean(&traces, &p)?;
            let doc = serde_json::json!({
                "d_star": traces[0].d_star(),
                "regime": mixture.regime,
                "per_trace": per_trace,
                "mixture": mixture,
                "mixture_predicted_mean": mixture.mean_at(p.r),
            });
            emit(&output, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
            if tabulate {
                for (i, t) in traces.iter().enumerate() {
                    if let Ok(LawPrediction::Known(law)) = law_for_trace(t, &p) {
                        let csv = law.tabulate_csv(law.suggested_x_max(), 512)?;
                        emit_named(output.out.as_deref(), &format!("law{i}.csv"), &csv)?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            graph,
            params,
            reps,
            seed,
            cap_events,
            cap_time,
            threads,
            output,
        } => {
            configure_threads(threads)?;
            let g = load_graph(&graph)?;
            let p = load_params(&params)?;
            let cap = cap_from(&p, cap_events, cap_time);
            let mut lines = String::new();
            let mut any_capped = false;
            for i in 0..reps {
                let outcome = simulate(&g, &p, seed + i as u64, Some(cap))?;
                any_capped |= outcome.capped;
                lines.push_str(&serde_json::to_string(&outcome)?);
                lines.push('\n');
            }
            emit(&output, &lines)?;
            Ok(if any_capped {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Verify {
            graph,
            params,
            reps,
            seed,
            cap_events,
            cap_time,
            threads,
            output,
        } => {
            configure_threads(threads)?;
            let g = load_graph(&graph)?;
            let p = load_params(&params)?;
            let cap = cap_from(&p, cap_events, cap_time);
            let report = run_experiment(&g, &p, reps, seed, Some(cap))?;
            match output.format.as_str() {
                "json" => emit(&output, &(export_json(&report)? + "\n"))?,
                "csv" => {
                    let tables = export_csv(&report)?;
                    emit_named(output.out.as_deref(), "summary.csv", &tables.summary)?;
                    emit_named(output.out.as_deref(), "ecdf.csv", &tables.ecdf)?;
                    emit_named(output.out.as_deref(), "path_freqs.csv", &tables.path_freqs)?;
                    emit_named(output.out.as_deref(), "snapshots.csv", &tables.snapshots)?;
                }
                other => bail!("unknown format {other}"),
            }
            Ok(if report.n_capped > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Selftest { seed, output } => {
            let report = self_test(seed);
            emit(&output, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            for check in &report.checks {
                eprintln!(
                    "{} {} (value {:.6}, expected {:.6})",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    check.value,
                    check.expected
                );
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

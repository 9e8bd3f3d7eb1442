use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tadpole_explore::adversary::{adversary_game, lb_ratio_bound};
use tadpole_explore::advice::{
    advise_2bit, advise_cycle, advise_tadpole, explore_2bit, explore_cycle_with_advice,
    explore_tadpole_with_advice,
};
use tadpole_explore::explorers::{explorer_by_name, Greedy};
use tadpole_explore::fog::{trace_csv, Session};
use tadpole_explore::graph::{cost_to_string, decompose_tadpole, parse_graph, Graph, VertexId};
use tadpole_explore::harness::{decimal6, parse_config, run_experiment, run_named_explorer};
use tadpole_explore::oracle::{brute_force_opt, opt_cost_cycle, opt_cost_tadpole, OptCost};

#[derive(Parser)]
#[command(
    name = "tadpole",
    about = "Online exploration experiments on weighted tadpole and cycle graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment described by a key=value config file; writes CSV.
    Run {
        /// Config file; the SEED environment variable overrides its seed.
        config: PathBuf,
    },
    /// Print `opt_closed_form,opt_brute_force,shape` for a graph file.
    Oracle { graph: PathBuf },
    /// Play one adversary game and print the outcome as a CSV row.
    Adversary {
        /// Explorer name: greedy, dfs, or random:<seed>.
        #[arg(long)]
        explorer: String,
        /// Distance threshold (at least 4).
        #[arg(long)]
        k: usize,
    },
    /// Generate advice for a graph, run the advice explorer, and print
    /// `n,bits,advice,cost,opt,ratio`.
    Advice {
        /// Scheme: 2bit, cycle, or tadpole.
        #[arg(long)]
        scheme: String,
        graph: PathBuf,
        #[arg(long)]
        start: u32,
    },
    /// Run an explorer on a graph file and print the move trace as CSV.
    Explore {
        /// Explorer name: greedy, dfs, random:<seed>, or advice:<scheme>.
        #[arg(long)]
        explorer: String,
        graph: PathBuf,
        #[arg(long)]
        start: u32,
    },
}

fn load_graph(path: &PathBuf) -> Result<Graph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_graph(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Run { config } => {
            let text =
                fs::read_to_string(&config).map_err(|e| format!("{}: {e}", config.display()))?;
            let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
            if let Ok(seed) = std::env::var("SEED") {
                cfg.seed = seed
                    .parse::<u64>()
                    .map_err(|_| format!("SEED must be an integer, got `{seed}`"))?;
            }
            if cfg.output.is_none() {
                cfg.output = Some(PathBuf::from("results.csv"));
            }
            let rows = run_experiment(&cfg).map_err(|e| e.to_string())?;
            let failures = rows.iter().filter(|r| !r.pass).count();
            println!(
                "{} rows written to {} ({} failing)",
                rows.len(),
                cfg.output.as_ref().unwrap().display(),
                failures
            );
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Cmd::Oracle { graph } => {
            let g = load_graph(&graph)?;
            let closed: OptCost = if let Ok(d) = decompose_tadpole(&g) {
                opt_cost_tadpole(&d)
            } else {
                opt_cost_cycle(&g)
                    .map_err(|_| "graph is neither a tadpole nor a cycle".to_string())?
            };
            let brute = match brute_force_opt(&g) {
                Ok(c) => cost_to_string(&c),
                Err(_) => "-".into(),
            };
            println!(
                "{},{},{}",
                cost_to_string(&closed.cost),
                brute,
                closed.shape.label()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Adversary { explorer, k } => {
            let mut policy = explorer_by_name(&explorer)
                .ok_or_else(|| format!("unknown explorer `{explorer}`"))?;
            let result = adversary_game(policy.as_mut(), k).map_err(|e| e.to_string())?;
            let bound = lb_ratio_bound(k, 0, 0).map_err(|e| e.to_string())?;
            println!(
                "{},{},{},{},{},{},{},{},{}",
                explorer,
                k,
                result.case,
                result.t1,
                result.stem_depth,
                cost_to_string(&result.explorer_cost),
                cost_to_string(&result.opt_cost),
                decimal6(&result.ratio),
                decimal6(&bound)
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Advice {
            scheme,
            graph,
            start,
        } => {
            let g = load_graph(&graph)?;
            let start = VertexId(start);
            let mut session = Session::new(g.clone(), start).map_err(|e| e.to_string())?;
            let (advice, tour, opt) = match scheme.as_str() {
                "cycle" => {
                    let advice = advise_cycle(&g, start).map_err(|e| e.to_string())?;
                    let tour = explore_cycle_with_advice(&mut session, &advice)
                        .map_err(|e| e.to_string())?;
                    let opt = opt_cost_cycle(&g).map_err(|e| e.to_string())?.cost;
                    (advice, tour, opt)
                }
                "tadpole" => {
                    let advice = advise_tadpole(&g, start).map_err(|e| e.to_string())?;
                    let tour = explore_tadpole_with_advice(&mut session, &advice)
                        .map_err(|e| e.to_string())?;
                    let d = decompose_tadpole(&g).map_err(|e| e.to_string())?;
                    (advice, tour, opt_cost_tadpole(&d).cost)
                }
                "2bit" => {
                    let advice =
                        advise_2bit(&g, start, &mut Greedy::new()).map_err(|e| e.to_string())?;
                    let tour = explore_2bit(&mut session, &advice, &mut Greedy::new())
                        .map_err(|e| e.to_string())?;
                    let d = decompose_tadpole(&g).map_err(|e| e.to_string())?;
                    (advice, tour, opt_cost_tadpole(&d).cost)
                }
                other => return Err(format!("unknown scheme `{other}`")),
            };
            let ratio = &tour.total_cost / &opt;
            println!(
                "{},{},{},{},{},{}",
                g.vertex_count(),
                advice.len(),
                advice,
                cost_to_string(&tour.total_cost),
                cost_to_string(&opt),
                decimal6(&ratio)
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Explore {
            explorer,
            graph,
            start,
        } => {
            let g = load_graph(&graph)?;
            let (tour, trace) = run_named_explorer(&g, VertexId(start), &explorer)?;
            print!("{}", trace_csv(&trace));
            eprintln!("cost={}", cost_to_string(&tour.total_cost));
            Ok(ExitCode::SUCCESS)
        }
    }
}

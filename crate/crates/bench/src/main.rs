use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use atr_bench::experiment::{route_summary, run_experiment, ExperimentSpec};
use atr_bench::gadget::{generate_gadget, GadgetSpec};
use atr_bench::sample::{ball_sample, subgraph_sample, SampleMode};
use atr_bench::witness;
use atr_core::follower::{write_trace, FollowerSearch};
use atr_core::graph::{load_edge_list_with_stats, LoadOptions};
use atr_core::reuse::ExpiryRule;
use atr_core::select::select;
use atr_core::tree::TrussComponentTree;
use atr_core::{truss_decompose, EdgeId, Graph, Strategy, StrategyConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "atr", version, about = "Anchor edges to raise graph trussness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truss decomposition with peeling layers, as CSV.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the component tree as JSON.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Choose anchors with one strategy and print the result as JSON.
    Anchor {
        file: PathBuf,
        #[arg(long, default_value = "gas")]
        strategy: Strategy,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0.2)]
        top_fraction: f64,
        #[arg(long, default_value_t = 5_000_000)]
        exact_cap: u128,
        #[arg(long, value_enum, default_value_t = Expiry::Sound)]
        expiry: Expiry,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Per-round CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit the maximum-coverage hardness gadget as an edge list.
    Gadget {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
        /// One set per line, 1-based element indices.
        #[arg(long)]
        membership: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ids of the set and element edges, as JSON.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Graph statistics, route sizes and trussness histogram.
    Stats {
        file: PathBuf,
        /// Trace the follower search from this edge, given as an id or `u,v`.
        #[arg(long)]
        trace: Option<String>,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Skip the route-size pass.
        #[arg(long)]
        no_routes: bool,
    },
    /// Random subgraph, written as an edge list.
    Sample {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 150)]
        min_edges: usize,
        #[arg(long, default_value_t = 250)]
        max_edges: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep described by a JSON spec.
    Experiment { spec: PathBuf },
    /// Search for a non-submodular instance.
    Witness {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        attempts: usize,
        /// Require single anchors to gain nothing and the pair at least this much.
        #[arg(long)]
        pair_gain: Option<u64>,
        /// Write the witness graph as an edge list.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Expiry {
    Sound,
    Narrow,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Vertex,
    Edge,
    Ball,
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> Result<Graph> {
    let (g, stats) = load_edge_list_with_stats(path, &LoadOptions::default())
        .with_context(|| format!("loading {}", path.display()))?;
    if stats.duplicates > 0 || stats.self_loops > 0 {
        eprintln!(
            "{}: {} edges, {} duplicate and {} self-loop lines dropped",
            path.display(),
            g.edge_count(),
            stats.duplicates,
            stats.self_loops
        );
    }
    Ok(g)
}

fn parse_edge(g: &Graph, text: &str) -> Result<EdgeId> {
    if let Some((a, b)) = text.split_once(',') {
        let (a, b) = (a.trim().parse()?, b.trim().parse()?);
        return g
            .edge_by_labels(a, b)
            .with_context(|| format!("no edge between {a} and {b}"));
    }
    let e = EdgeId(text.trim().parse().with_context(|| format!("bad edge `{text}`"))?);
    if !g.contains_edge(e) {
        bail!("edge id {} out of range", e.0);
    }
    Ok(e)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose { file, out, tree } => {
            let g = load(&file)?;
            let lab = truss_decompose(&g);
            let mut w = writer(out.as_deref())?;
            lab.write_csv(&g, &mut w)?;
            w.flush()?;
            if let Some(path) = tree {
                TrussComponentTree::build(&g, &lab).write_json(writer(Some(&path))?)?;
            }
        }
        Command::Anchor {
            file,
            strategy,
            budget,
            seed,
            trials,
            top_fraction,
            exact_cap,
            expiry,
            json,
            csv,
        } => {
            let g = load(&file)?;
            let mut config = StrategyConfig::new(strategy, budget);
            config.seed = seed;
            config.trials = trials;
            config.top_fraction = top_fraction;
            config.exact_cap = exact_cap;
            config.reuse.rule = match expiry {
                Expiry::Sound => ExpiryRule::Sound,
                Expiry::Narrow => ExpiryRule::Narrow,
            };
            let result = select(&g, &config)?;
            let mut w = writer(json.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &result)?;
            writeln!(w)?;
            w.flush()?;
            if let Some(path) = csv {
                let mut w = writer(Some(&path))?;
                result.write_rounds_csv(&g, &mut w)?;
                w.flush()?;
            }
        }
        Command::Gadget {
            s,
            t,
            membership,
            out,
            annotations,
        } => {
            let spec = GadgetSpec::from_file(&membership, s, t)?;
            let gadget = generate_gadget(&spec)?;
            let mut w = writer(out.as_deref())?;
            gadget.graph.write_edge_list(&mut w)?;
            w.flush()?;
            if let Some(path) = annotations {
                let mut w = writer(Some(&path))?;
                gadget.write_annotations(&mut w)?;
                writeln!(w)?;
                w.flush()?;
            }
        }
        Command::Stats {
            file,
            trace,
            trace_out,
            tree,
            no_routes,
        } => {
            let g = load(&file)?;
            let lab = truss_decompose(&g);
            let hulls: BTreeMap<u32, usize> = lab.hulls().into_iter().map(|(k, v)| (k, v.len())).collect();
            let comp = TrussComponentTree::build(&g, &lab);
            let routes = if no_routes { None } else { Some(route_summary(&g)?) };
            let mut w = writer(None)?;
            serde_json::to_writer_pretty(
                &mut w,
                &json!({
                    "vertices": g.vertex_count(),
                    "edges": g.edge_count(),
                    "triangles": g.triangle_count(),
                    "k_max": lab.k_max(),
                    "max_support": g.max_support(),
                    "hulls": hulls,
                    "tree_nodes": comp.node_count(),
                    "routes": routes,
                }),
            )?;
            writeln!(w)?;
            w.flush()?;
            if let Some(path) = tree {
                comp.write_json(writer(Some(&path))?)?;
            }
            if let Some(edge) = trace {
                let x = parse_edge(&g, &edge)?;
                let mut search = FollowerSearch::new(g.edge_count());
                search.set_tracing(true);
                let found = search.search(&g, &lab, x)?;
                let mut w = writer(trace_out.as_deref())?;
                write_trace(&search.take_trace(), &mut w)?;
                w.flush()?;
                eprintln!("{} followers, route size {}", found.len(), found.route_size);
            }
        }
        Command::Sample {
            file,
            mode,
            ratio,
            seed,
            min_edges,
            max_edges,
            out,
        } => {
            let g = load(&file)?;
            let sub = match mode {
                Mode::Vertex => subgraph_sample(&g, SampleMode::Vertex, ratio, seed)?,
                Mode::Edge => subgraph_sample(&g, SampleMode::Edge, ratio, seed)?,
                Mode::Ball => ball_sample(&g, min_edges, max_edges, seed)
                    .with_context(|| format!("no ball with {min_edges}..={max_edges} edges found"))?,
            };
            let mut w = writer(out.as_deref())?;
            sub.write_edge_list(&mut w)?;
            w.flush()?;
        }
        Command::Experiment { spec } => {
            let spec = ExperimentSpec::from_file(&spec)?;
            let report = run_experiment(&spec)?;
            for row in &report.runs {
                println!("{:<6} b={:<4} gain={:<8} {:.3}s", row.strategy, row.budget, row.gain, row.seconds);
            }
            println!("reports in {}", spec.output.display());
        }
        Command::Witness {
            seed,
            attempts,
            pair_gain,
            out,
        } => {
            let w = match pair_gain {
                Some(gain) => witness::search_gap(seed, attempts, gain),
                None => witness::search(seed, attempts),
            }
            .context("no witness found; try more attempts")?;
            println!("{}", serde_json::to_string_pretty(&w)?);
            if let Some(path) = out {
                let mut f = writer(Some(&path))?;
                w.graph.write_edge_list(&mut f)?;
                f.flush()?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

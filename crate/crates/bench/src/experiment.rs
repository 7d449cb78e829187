//! Experiment sweeps driven by a JSON spec.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use atr_core::follower::FollowerSearch;
use atr_core::graph::{load_edge_list, LoadOptions};
use atr_core::select::{select, select_exact, select_gas_with, ReuseHistogram};
use atr_core::{truss_decompose, Error as CoreError, ExpiryRule, Graph, ReuseOptions, Strategy, StrategyConfig};
use serde::{Deserialize, Serialize};

use crate::gadget::{generate_gadget, GadgetSpec};
use crate::sample::{ball_sample, subgraph_sample, SampleMode};
use crate::synth::{community_graph, erdos_renyi, planted_cliques, CommunitySpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    ErdosRenyi { n: usize, p: f64 },
    PlantedCliques { n: usize, p: f64, cliques: Vec<usize> },
    Community(CommunitySpec),
    Gadget(GadgetSpec),
}

impl GeneratorSpec {
    pub fn generate(&self, seed: u64) -> Result<Graph> {
        Ok(match self {
            GeneratorSpec::ErdosRenyi { n, p } => erdos_renyi(*n, *p, seed),
            GeneratorSpec::PlantedCliques { n, p, cliques } => planted_cliques(*n, *p, cliques, seed),
            GeneratorSpec::Community(spec) => community_graph(spec, seed),
            GeneratorSpec::Gadget(spec) => generate_gadget(spec)?.graph,
        })
    }
}

/// Greedy-versus-exhaustive comparison on small balls cut from the input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactSpec {
    pub samples: usize,
    pub budgets: Vec<usize>,
    #[serde(default = "default_min_edges")]
    pub min_edges: usize,
    #[serde(default = "default_max_edges")]
    pub max_edges: usize,
}

fn default_min_edges() -> usize {
    150
}

fn default_max_edges() -> usize {
    250
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub budgets: Vec<usize>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default = "default_cap")]
    pub exact_cap: u128,
    #[serde(default)]
    pub expiry: ExpiryRule,
    #[serde(default)]
    pub exact: Option<ExactSpec>,
    /// Sampling ratios for the scalability sweep.
    #[serde(default)]
    pub ratios: Vec<f64>,
    #[serde(default = "both_modes")]
    pub sample_modes: Vec<SampleMode>,
    /// Budget used in the scalability sweep; the largest budget if unset.
    #[serde(default)]
    pub scale_budget: Option<usize>,
    #[serde(default = "yes")]
    pub route_summary: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_cap() -> u128 {
    5_000_000
}

fn both_modes() -> Vec<SampleMode> {
    vec![SampleMode::Vertex, SampleMode::Edge]
}

impl ExperimentSpec {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_some() == self.generator.is_some() {
            bail!("give exactly one of `dataset` and `generator`");
        }
        if self.budgets.windows(2).any(|w| w[0] > w[1]) {
            bail!("budgets must be ascending");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            bail!("sampling ratio {r} outside (0, 1]");
        }
        Ok(())
    }

    pub fn load_graph(&self) -> Result<Graph> {
        match (&self.dataset, &self.generator) {
            (Some(path), _) => load_edge_list(path, &LoadOptions::default())
                .with_context(|| format!("loading {}", path.display())),
            (_, Some(generator)) => generator.generate(self.seed),
            _ => bail!("no input graph"),
        }
    }

    fn config(&self, strategy: Strategy, budget: usize) -> StrategyConfig {
        let mut config = StrategyConfig::new(strategy, budget);
        config.seed = self.seed;
        config.trials = self.trials;
        config.exact_cap = self.exact_cap;
        config.reuse = ReuseOptions {
            rule: self.expiry,
            ..ReuseOptions::default()
        };
        config
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRow {
    pub strategy: Strategy,
    pub budget: usize,
    pub gain: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RouteSummary {
    pub edges: usize,
    pub min: usize,
    pub max: usize,
    pub sum: usize,
    pub average: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReuseRow {
    pub round: usize,
    pub full: usize,
    pub partial: usize,
    pub none: usize,
    pub full_fraction: f64,
    pub searches: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactRow {
    pub sample: usize,
    pub edges: usize,
    pub budget: usize,
    pub exact_gain: u64,
    pub gas_gain: u64,
    pub ratio: f64,
    pub exact_seconds: f64,
    pub gas_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleRow {
    pub mode: SampleMode,
    pub ratio: f64,
    pub edges: usize,
    pub budget: usize,
    pub gain: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MachineInfo {
    pub os: &'static str,
    pub arch: &'static str,
    pub cpus: usize,
    pub crate_version: &'static str,
}

impl MachineInfo {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            crate_version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub vertices: usize,
    pub edges: usize,
    pub k_max: u32,
    pub max_support: usize,
    pub runs: Vec<RunRow>,
    pub route: Option<RouteSummary>,
    pub reuse: Vec<ReuseRow>,
    pub exact: Vec<ExactRow>,
    pub scale: Vec<ScaleRow>,
    pub notices: Vec<String>,
    pub machine: MachineInfo,
}

pub fn route_summary(g: &Graph) -> Result<RouteSummary> {
    let lab = truss_decompose(g);
    let mut search = FollowerSearch::new(g.edge_count());
    let mut s = RouteSummary {
        edges: g.edge_count(),
        min: usize::MAX,
        ..RouteSummary::default()
    };
    for e in g.edges() {
        let size = search.search(g, &lab, e)?.route_size;
        s.min = s.min.min(size);
        s.max = s.max.max(size);
        s.sum += size;
    }
    if s.edges == 0 {
        s.min = 0;
    } else {
        s.average = s.sum as f64 / s.edges as f64;
    }
    Ok(s)
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes `runs.csv`, `route_sizes.csv`, `reuse.csv`,
/// `exact_vs_gas.csv`, `scalability.csv`, `machine.json` and `report.json`
/// into the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let g = spec.load_graph()?;
    fs::create_dir_all(&spec.output).with_context(|| format!("creating {}", spec.output.display()))?;
    // warm-up, kept out of every timing below
    let lab = truss_decompose(&g);
    let mut report = Report {
        name: spec.name.clone(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        k_max: lab.k_max(),
        max_support: g.max_support(),
        runs: Vec::new(),
        route: None,
        reuse: Vec::new(),
        exact: Vec::new(),
        scale: Vec::new(),
        notices: Vec::new(),
        machine: MachineInfo::current(),
    };

    for &strategy in &spec.strategies {
        for &budget in &spec.budgets {
            match select(&g, &spec.config(strategy, budget)) {
                Ok(result) => {
                    if strategy == Strategy::Gas && Some(&budget) == spec.budgets.last() {
                        report.reuse = result
                            .reuse
                            .iter()
                            .zip(&result.searches)
                            .enumerate()
                            .map(|(i, (h, &searches))| reuse_row(i + 1, h, searches))
                            .collect();
                    }
                    report.runs.push(RunRow {
                        strategy,
                        budget,
                        gain: result.total_gain,
                        seconds: result.elapsed_seconds,
                    });
                }
                Err(err @ (CoreError::EnumerationCap { .. } | CoreError::PoolTooSmall { .. })) => {
                    report.notices.push(format!("skipped {strategy} at b={budget}: {err}"));
                }
                Err(err) => return Err(err.into()),
            }
        }
    }

    if spec.route_summary {
        report.route = Some(route_summary(&g)?);
    }

    if let Some(exact) = &spec.exact {
        run_exact(&g, spec, exact, &mut report)?;
    }

    if !spec.ratios.is_empty() {
        let budget = spec.scale_budget.or(spec.budgets.last().copied()).unwrap_or(0);
        for &mode in &spec.sample_modes {
            for &ratio in &spec.ratios {
                let sub = subgraph_sample(&g, mode, ratio, spec.seed)?;
                let result = select_gas_with(&sub, budget, spec.config(Strategy::Gas, budget).reuse)?;
                report.scale.push(ScaleRow {
                    mode,
                    ratio,
                    edges: sub.edge_count(),
                    budget,
                    gain: result.total_gain,
                    seconds: result.elapsed_seconds,
                });
            }
        }
    }

    write_report(spec, &report)?;
    for notice in &report.notices {
        eprintln!("note: {notice}");
    }
    Ok(report)
}

fn reuse_row(round: usize, h: &ReuseHistogram, searches: usize) -> ReuseRow {
    ReuseRow {
        round,
        full: h.full,
        partial: h.partial,
        none: h.none,
        full_fraction: h.full_fraction(),
        searches,
    }
}

fn run_exact(g: &Graph, spec: &ExperimentSpec, exact: &ExactSpec, report: &mut Report) -> Result<()> {
    let mut taken = 0;
    let mut attempt = 0u64;
    while taken < exact.samples && attempt < 50 * exact.samples as u64 + 50 {
        let seed = spec.seed.wrapping_add(attempt);
        attempt += 1;
        let Some(sub) = ball_sample(g, exact.min_edges, exact.max_edges, seed) else {
            continue;
        };
        for &budget in &exact.budgets {
            let started = Instant::now();
            let best = match select_exact(&sub, budget, spec.exact_cap) {
                Ok(r) => r,
                Err(err @ CoreError::EnumerationCap { .. }) => {
                    report.notices.push(format!("sample {taken}: skipped exact at b={budget}: {err}"));
                    continue;
                }
                Err(err) => return Err(err.into()),
            };
            let exact_seconds = started.elapsed().as_secs_f64();
            let greedy = select_gas_with(&sub, budget, spec.config(Strategy::Gas, budget).reuse)?;
            report.exact.push(ExactRow {
                sample: taken,
                edges: sub.edge_count(),
                budget,
                exact_gain: best.total_gain,
                gas_gain: greedy.total_gain,
                ratio: if best.total_gain == 0 {
                    1.0
                } else {
                    greedy.total_gain as f64 / best.total_gain as f64
                },
                exact_seconds,
                gas_seconds: greedy.elapsed_seconds,
            });
        }
        taken += 1;
    }
    if taken < exact.samples {
        report.notices.push(format!(
            "only {taken} of {} samples with {}..={} edges were found",
            exact.samples, exact.min_edges, exact.max_edges
        ));
    }
    Ok(())
}

fn write_report(spec: &ExperimentSpec, report: &Report) -> Result<()> {
    let dir = &spec.output;
    write_csv(&dir.join("runs.csv"), &["strategy", "budget", "gain", "seconds"], &report.runs)?;
    let route: Vec<&RouteSummary> = report.route.iter().collect();
    write_csv(&dir.join("route_sizes.csv"), &["edges", "min", "max", "sum", "average"], &route)?;
    write_csv(
        &dir.join("reuse.csv"),
        &["round", "full", "partial", "none", "full_fraction", "searches"],
        &report.reuse,
    )?;
    write_csv(
        &dir.join("exact_vs_gas.csv"),
        &[
            "sample",
            "edges",
            "budget",
            "exact_gain",
            "gas_gain",
            "ratio",
            "exact_seconds",
            "gas_seconds",
        ],
        &report.exact,
    )?;
    write_csv(
        &dir.join("scalability.csv"),
        &["mode", "ratio", "edges", "budget", "gain", "seconds"],
        &report.scale,
    )?;
    fs::write(dir.join("machine.json"), serde_json::to_string_pretty(&report.machine)?)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dir: &Path, budgets: Vec<usize>) -> ExperimentSpec {
        serde_json::from_value(serde_json::json!({
            "name": "er",
            "generator": { "kind": "planted_cliques", "n": 30, "p": 0.1, "cliques": [6, 5] },
            "strategies": ["gas", "base+", "exact", "sup"],
            "budgets": budgets,
            "seed": 3,
            "output": dir,
            "exact_cap": 10,
        }))
        .unwrap()
    }

    #[test]
    fn empty_budgets_write_headers() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&spec(dir.path(), vec![])).unwrap();
        assert!(report.runs.is_empty());
        let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert_eq!(runs, "strategy,budget,gain,seconds\n");
    }

    #[test]
    fn sweep_writes_rows_and_skips_exact() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&spec(dir.path(), vec![1, 2])).unwrap();
        let gas: Vec<u64> = report.runs.iter().filter(|r| r.strategy == Strategy::Gas).map(|r| r.gain).collect();
        let plus: Vec<u64> = report.runs.iter().filter(|r| r.strategy == Strategy::BasePlus).map(|r| r.gain).collect();
        assert_eq!(gas, plus);
        assert!(report.notices.iter().any(|n| n.contains("exact")));
        assert_eq!(report.reuse.len(), 2);
        let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert!(runs.lines().nth(1).unwrap().starts_with("gas,1,"));
        assert!(dir.path().join("machine.json").exists());
        let route = fs::read_to_string(dir.path().join("route_sizes.csv")).unwrap();
        assert_eq!(route.lines().count(), 2);
    }

    #[test]
    fn rejects_bad_specs() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(dir.path(), vec![2, 1]);
        assert!(s.validate().is_err());
        s.budgets = vec![1];
        s.ratios = vec![0.0];
        assert!(s.validate().is_err());
        s.ratios.clear();
        s.dataset = Some("x".into());
        assert!(s.validate().is_err());
    }

    #[test]
    fn reports_repeat() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut sa = spec(a.path(), vec![2]);
        sa.ratios = vec![0.7];
        let mut sb = sa.clone();
        sb.output = b.path().to_path_buf();
        let (ra, rb) = (run_experiment(&sa).unwrap(), run_experiment(&sb).unwrap());
        let gains = |r: &Report| r.runs.iter().map(|x| x.gain).chain(r.scale.iter().map(|x| x.gain)).collect::<Vec<_>>();
        assert_eq!(gains(&ra), gains(&rb));
    }
}

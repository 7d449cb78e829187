//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Correctness criteria (1-4, 7) are hard: a FAIL there makes the run exit
//! nonzero. The empirical ones (5, 6, 8) depend on the input data and are
//! reported without failing the run.
//!
//! The College dataset is read from `ATR_COLLEGE` or `data/CollegeMsg.txt`
//! at the workspace root.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use atr_bench::experiment::route_summary;
use atr_bench::gadget::{all_specs, generate_gadget, greedy_cover, GadgetSpec};
use atr_bench::sample::ball_sample;
use atr_bench::synth::{community_graph, random_corpus, CommunitySpec};
use atr_bench::witness;
use atr_core::follower::FollowerSearch;
use atr_core::graph::{load_edge_list, LoadOptions};
use atr_core::select::{select_base, select_base_plus, select_exact, select_gas, GasEngine};
use atr_core::truss::GainOracle;
use atr_core::{truss_decompose, trussness_gain, EdgeId, Graph, ReuseOptions};

const CORPUS_SEED: u64 = 20_240_601;
const MAX_BUDGET: usize = 5;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    /// A failing soft criterion is reported but does not fail the run.
    hard: bool,
    detail: String,
}

impl Outcome {
    fn hard(pass: bool, detail: String) -> Self {
        Self { pass, hard: true, detail }
    }

    fn soft(pass: bool, detail: String) -> Self {
        Self { pass, hard: false, detail }
    }
}

fn corpus() -> Vec<Graph> {
    random_corpus(200, 300, CORPUS_SEED)
}

fn gadgets() -> Vec<GadgetSpec> {
    (1..=3).flat_map(|s| (1..=3).flat_map(move |t| all_specs(s, t))).collect()
}

fn gadget_graphs() -> Vec<Graph> {
    gadgets().iter().map(|s| generate_gadget(s).unwrap().graph).collect()
}

fn oracle_equivalence(graphs: &[Graph]) -> Outcome {
    let (mut edges, mut bad) = (0usize, Vec::new());
    for (i, g) in graphs.iter().enumerate() {
        let lab = truss_decompose(g);
        let mut oracle = GainOracle::new(g);
        let mut search = FollowerSearch::new(g.edge_count());
        for x in g.edges() {
            edges += 1;
            let found = search.search(g, &lab, x).unwrap().len() as u64;
            let truth = oracle.gain(&[x]);
            if found != truth {
                bad.push(format!("graph {i} edge {}: {found} vs {truth}", x.0));
            }
        }
    }
    Outcome::hard(
        bad.is_empty(),
        format!(
            "{} graphs, {edges} anchors, {} mismatches{}",
            graphs.len(),
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn strategy_equivalence(graphs: &[Graph]) -> Outcome {
    let mut bad = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        // greedy rounds are deterministic, so each smaller budget is a prefix
        let base = select_base(g, MAX_BUDGET).unwrap();
        let plus = select_base_plus(g, MAX_BUDGET).unwrap();
        if plus.anchors != base.anchors || plus.per_round_gain != base.per_round_gain {
            bad.push(format!("graph {i}: base+ differs from base"));
        }
        for b in 1..=MAX_BUDGET {
            let gas = select_gas(g, b).unwrap();
            let k = b.min(base.anchors.len());
            if gas.anchors != base.anchors[..k] || gas.per_round_gain != base.per_round_gain[..k] {
                bad.push(format!("graph {i} b={b}: gas differs from base"));
            }
            if gas.total_gain != trussness_gain(g, &base.anchors[..k]).unwrap() {
                bad.push(format!("graph {i} b={b}: total gain differs"));
            }
        }
    }
    Outcome::hard(
        bad.is_empty(),
        format!(
            "{} graphs, b=1..{MAX_BUDGET}, {} mismatches{}",
            graphs.len(),
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn invariant_suite(graphs: &[Graph]) -> Outcome {
    let (mut single, mut local, mut cached) = (0usize, 0usize, 0usize);
    let mut checks = 0usize;
    for g in graphs {
        let lab = truss_decompose(g);
        let mut oracle = GainOracle::new(g);
        for x in g.edges() {
            let after = oracle.labeling(&[x]);
            single += g
                .edges()
                .filter(|&e| e != x && after.trussness(e) > lab.trussness(e) + 1)
                .count();
        }
        let mut engine = GasEngine::new(g, ReuseOptions::default());
        let mut search = FollowerSearch::new(g.edge_count());
        for round in 0..=MAX_BUDGET {
            let (tree, now) = (engine.tree(), engine.labeling());
            for x in g.edges().filter(|&x| !now.is_anchored(x)) {
                for f in search.search(g, now, x).unwrap().followers {
                    checks += 1;
                    if !tree.node_of(f).is_some_and(|id| tree.sla(x).contains(&id)) {
                        local += 1;
                    }
                }
            }
            if round > 0 {
                cached += engine.reuse_violations().unwrap().len();
            }
            if round == MAX_BUDGET {
                break;
            }
            let Some((x, _)) = engine.best().unwrap() else { break };
            engine.commit(x).unwrap();
        }
    }
    Outcome::hard(
        single + local + cached == 0,
        format!(
            "{} graphs; single-anchor rise >1: {single}; followers outside neighbor nodes: {local} of {checks}; stale cached results: {cached}",
            graphs.len()
        ),
    )
}

fn gadget_reproduction() -> Outcome {
    let mut specs = gadgets();
    specs.push(GadgetSpec::example());
    let mut bad = Vec::new();
    for spec in &specs {
        let gadget = generate_gadget(spec).unwrap();
        let g = &gadget.graph;
        let lab = truss_decompose(g);
        for (i, &a) in gadget.set_edges.iter().enumerate() {
            if lab.trussness(a) as usize != gadget.spec.membership[i].len() + 2 {
                bad.push(format!("{spec:?}: t(a_{}) = {}", i + 1, lab.trussness(a)));
            }
        }
        for (j, &f) in gadget.element_edges.iter().enumerate() {
            if lab.trussness(f) as usize != spec.t + 2 {
                bad.push(format!("{spec:?}: t(f_{}) = {}", j + 1, lab.trussness(f)));
            }
        }
        let cover = greedy_cover(&gadget.spec, spec.s);
        let want: Vec<EdgeId> = cover.iter().map(|&i| gadget.set_edges[i]).collect();
        let gas = select_gas(g, spec.s).unwrap();
        if gas.anchors != want {
            bad.push(format!("{spec:?}: greedy picked {:?}, cover order {want:?}", gas.anchors));
        }
        if gas.total_gain as usize != gadget.coverage(&cover) {
            bad.push(format!("{spec:?}: gain {} vs coverage {}", gas.total_gain, gadget.coverage(&cover)));
        }
    }
    Outcome::hard(
        bad.is_empty(),
        format!(
            "{} gadgets; trussness and greedy-cover mismatches: {}{}",
            specs.len(),
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn college_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("ATR_COLLEGE") {
        return Some(PathBuf::from(p));
    }
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/CollegeMsg.txt");
    p.exists().then_some(p)
}

fn load_college() -> Result<Graph, String> {
    let path = college_path().ok_or("College dataset not found (set ATR_COLLEGE)")?;
    load_edge_list(&path, &LoadOptions::default()).map_err(|e| format!("{}: {e}", path.display()))
}

fn college_numbers() -> Outcome {
    let g = match load_college() {
        Ok(g) => g,
        Err(why) => return Outcome::soft(false, why),
    };
    let started = Instant::now();
    let gas = select_gas(&g, 100).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let routes = route_summary(&g).unwrap();
    let gain_ok = (gas.total_gain as f64 - 769.0).abs() <= 0.05 * 769.0;
    let route_ok = (routes.average - 2.34).abs() <= 0.10 * 2.34;
    Outcome::soft(
        gain_ok && route_ok && secs < 600.0,
        format!(
            "{} edges; gain {} (target 769 +/-5%), route average {:.3} (target 2.34 +/-10%), {secs:.1}s",
            g.edge_count(),
            gas.total_gain,
            routes.average
        ),
    )
}

fn exact_comparison() -> Outcome {
    let host = community_graph(&CommunitySpec::default(), CORPUS_SEED);
    let mut samples = Vec::new();
    let mut seed = 0;
    while samples.len() < 20 && seed < 2000 {
        if let Some(sub) = ball_sample(&host, 150, 250, CORPUS_SEED + seed) {
            samples.push(sub);
        }
        seed += 1;
    }
    if samples.len() < 20 {
        return Outcome::soft(false, format!("only {} samples in 150..=250 edges", samples.len()));
    }
    let mut parts = Vec::new();
    let mut pass = true;
    for b in 1..=3 {
        let (mut exact, mut greedy) = (0u64, 0u64);
        for g in &samples {
            exact += select_exact(g, b, u128::MAX).unwrap().total_gain;
            greedy += select_gas(g, b).unwrap().total_gain;
        }
        let ratio = if exact == 0 { 1.0 } else { greedy as f64 / exact as f64 };
        pass &= ratio >= 0.9;
        parts.push(format!("b={b}: {:.1}% ({greedy}/{exact})", 100.0 * ratio));
    }
    Outcome::soft(
        pass,
        format!("{} samples from a synthetic community graph; greedy/exact {}", samples.len(), parts.join(", ")),
    )
}

fn non_submodularity() -> Outcome {
    let Some(w) = witness::search_gap(CORPUS_SEED, 5000, 3) else {
        return Outcome::hard(false, "no witness found".into());
    };
    let g = &w.graph;
    let recheck = trussness_gain(g, &w.a).unwrap() + trussness_gain(g, &w.b).unwrap();
    let union = trussness_gain(g, &[w.a[0], w.b[0]]).unwrap();
    Outcome::hard(
        w.holds() && recheck < union,
        format!(
            "{} edges, A={:?} B={:?}: TG(A)+TG(B) = {recheck} < TG(A|B)+TG(A&B) = {union}",
            g.edge_count(),
            w.a,
            w.b
        ),
    )
}

fn reuse_ratio() -> Outcome {
    let g = match load_college() {
        Ok(g) => g,
        Err(why) => {
            let host = community_graph(&CommunitySpec::default(), CORPUS_SEED);
            let gas = select_gas(&host, 10).unwrap();
            let fr = gas.reuse.first().map_or(0.0, |h| h.full_fraction());
            return Outcome::soft(
                false,
                format!("{why}; on a synthetic community graph FR after round 1 = {:.1}%", 100.0 * fr),
            );
        }
    };
    let gas = select_gas(&g, 10).unwrap();
    let fr = gas.reuse.first().map_or(0.0, |h| h.full_fraction());
    Outcome::soft(fr > 0.5, format!("FR after round 1 = {:.1}% (report only)", 100.0 * fr))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let gadget_graphs = gadget_graphs();
    let mixed: Vec<Graph> = corpus.iter().chain(&gadget_graphs).cloned().collect();
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Box::new(|| oracle_equivalence(&mixed))),
        ("strategy equivalence", Box::new(|| strategy_equivalence(&mixed))),
        ("invariant suite", Box::new(|| invariant_suite(&corpus))),
        ("gadget reproduction", Box::new(gadget_reproduction)),
        ("College gain and route size", Box::new(college_numbers)),
        ("greedy versus exhaustive", Box::new(exact_comparison)),
        ("non-submodularity witness", Box::new(non_submodularity)),
        ("reuse ratio", Box::new(reuse_ratio)),
    ];
    let mut failed = false;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let verdict = match (outcome.pass, outcome.hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (reported)",
        };
        println!(
            "{verdict} criterion {}: {name}: {} [{:.1}s]",
            i + 1,
            outcome.detail,
            started.elapsed().as_secs_f64()
        );
        failed |= outcome.hard && !outcome.pass;
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

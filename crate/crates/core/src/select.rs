//! Budgeted anchor selection.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::follower::FollowerSearch;
use crate::graph::{EdgeId, Graph};
use crate::reuse::{
    classify_reuse, follower_reuse, CommitReport, ExpiryRule, ReuseClass, ReuseLedger, ReuseOptions,
};
use crate::tree::{SlaMode, TrussComponentTree};
use crate::truss::{anchored_truss_decompose, truss_decompose, trussness_gain, GainOracle, TrussLabeling};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "base")]
    Base,
    #[serde(rename = "base+")]
    BasePlus,
    #[serde(rename = "gas")]
    Gas,
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "rand")]
    Rand,
    #[serde(rename = "sup")]
    Sup,
    #[serde(rename = "tur")]
    Tur,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Base,
        Strategy::BasePlus,
        Strategy::Gas,
        Strategy::Exact,
        Strategy::Rand,
        Strategy::Sup,
        Strategy::Tur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Base => "base",
            Strategy::BasePlus => "base+",
            Strategy::Gas => "gas",
            Strategy::Exact => "exact",
            Strategy::Rand => "rand",
            Strategy::Sup => "sup",
            Strategy::Tur => "tur",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s) || (s == "base_plus" && *st == Strategy::BasePlus))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub budget: usize,
    pub seed: u64,
    /// Independent draws for the randomized strategies.
    pub trials: usize,
    /// Share of edges in the Sup and Tur pools.
    pub top_fraction: f64,
    /// Largest number of subsets the exhaustive search may visit.
    pub exact_cap: u128,
    pub reuse: ReuseOptions,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy, budget: usize) -> Self {
        Self {
            strategy,
            budget,
            seed: 0,
            trials: 1,
            top_fraction: 0.2,
            exact_cap: 5_000_000,
            reuse: ReuseOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReuseHistogram {
    pub full: usize,
    pub partial: usize,
    pub none: usize,
}

impl ReuseHistogram {
    pub fn total(&self) -> usize {
        self.full + self.partial + self.none
    }

    pub fn full_fraction(&self) -> f64 {
        if self.total() == 0 {
            1.0
        } else {
            self.full as f64 / self.total() as f64
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionResult {
    pub strategy: Strategy,
    pub anchors: Vec<EdgeId>,
    /// Followers gained by each anchor on top of the earlier ones.
    pub per_round_gain: Vec<u64>,
    /// Gain of the whole anchor set, recomputed from scratch.
    pub total_gain: u64,
    /// Wall time per greedy round; empty for one-shot strategies.
    pub per_round_seconds: Vec<f64>,
    pub elapsed_seconds: f64,
    /// Reuse classes after each committed round (GAS only).
    pub reuse: Vec<ReuseHistogram>,
    /// Candidates that needed a fresh search, per round (GAS only).
    pub searches: Vec<usize>,
}

impl SelectionResult {
    fn finish(g: &Graph, strategy: Strategy, anchors: Vec<EdgeId>, started: Instant) -> Result<Self> {
        let per_round_gain = marginal_followers(g, &anchors)?;
        let total_gain = trussness_gain(g, &anchors)?;
        Ok(Self {
            strategy,
            anchors,
            per_round_gain,
            total_gain,
            per_round_seconds: Vec::new(),
            elapsed_seconds: started.elapsed().as_secs_f64(),
            reuse: Vec::new(),
            searches: Vec::new(),
        })
    }

    /// Writes `round,edge_id,u,v,gain,seconds` rows.
    pub fn write_rounds_csv<W: Write>(&self, g: &Graph, mut out: W) -> std::io::Result<()> {
        writeln!(out, "round,edge_id,u,v,gain,seconds")?;
        for (i, &a) in self.anchors.iter().enumerate() {
            let (u, v) = g.endpoints(a);
            let secs = self
                .per_round_seconds
                .get(i)
                .map(|s| format!("{s:.6}"))
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                a.0,
                g.label(u),
                g.label(v),
                self.per_round_gain[i],
                secs
            )?;
        }
        Ok(())
    }
}

/// Follower counts of each anchor given the ones before it.
fn marginal_followers(g: &Graph, anchors: &[EdgeId]) -> Result<Vec<u64>> {
    let mut lab = truss_decompose(g);
    let mut search = FollowerSearch::new(g.edge_count());
    let mut out = Vec::with_capacity(anchors.len());
    for (i, &a) in anchors.iter().enumerate() {
        out.push(search.search(g, &lab, a)?.len() as u64);
        lab = anchored_truss_decompose(g, &anchors[..=i])?.into_labeling();
    }
    Ok(out)
}

/// Index of the largest gain, smallest id on ties.
fn argmax(gains: impl Iterator<Item = (EdgeId, usize)>) -> Option<(EdgeId, usize)> {
    gains.fold(None, |best, (e, gain)| match best {
        Some((b, bg)) if bg > gain || (bg == gain && b < e) => Some((b, bg)),
        _ => Some((e, gain)),
    })
}

fn greedy_result(
    g: &Graph,
    strategy: Strategy,
    anchors: Vec<EdgeId>,
    gains: Vec<u64>,
    seconds: Vec<f64>,
    started: Instant,
) -> Result<SelectionResult> {
    Ok(SelectionResult {
        strategy,
        total_gain: trussness_gain(g, &anchors)?,
        anchors,
        per_round_gain: gains,
        per_round_seconds: seconds,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        reuse: Vec::new(),
        searches: Vec::new(),
    })
}

/// Greedy rounds, each scoring every candidate by a full anchored
/// decomposition.
pub fn select_base(g: &Graph, budget: usize) -> Result<SelectionResult> {
    let started = Instant::now();
    let mut lab = truss_decompose(g);
    let mut oracle = GainOracle::new(g);
    let mut anchors = Vec::new();
    let (mut gains, mut seconds) = (Vec::new(), Vec::new());
    let mut trial = Vec::new();
    for _ in 0..budget.min(g.edge_count()) {
        let round = Instant::now();
        let best = argmax(g.edges().filter(|&e| !lab.is_anchored(e)).map(|e| {
            trial.clear();
            trial.extend_from_slice(&anchors);
            trial.push(e);
            (e, oracle.risers(&trial, &lab).len())
        }));
        let Some((x, gain)) = best else { break };
        anchors.push(x);
        lab = anchored_truss_decompose(g, &anchors)?.into_labeling();
        gains.push(gain as u64);
        seconds.push(round.elapsed().as_secs_f64());
    }
    greedy_result(g, Strategy::Base, anchors, gains, seconds, started)
}

/// Greedy rounds scoring candidates with the follower search.
pub fn select_base_plus(g: &Graph, budget: usize) -> Result<SelectionResult> {
    let started = Instant::now();
    let mut lab = truss_decompose(g);
    let mut search = FollowerSearch::new(g.edge_count());
    let mut anchors = Vec::new();
    let (mut gains, mut seconds) = (Vec::new(), Vec::new());
    for _ in 0..budget.min(g.edge_count()) {
        let round = Instant::now();
        let mut best = None;
        for e in g.edges().filter(|&e| !lab.is_anchored(e)) {
            let gain = if g.support(e) == 0 {
                0
            } else {
                search.search(g, &lab, e)?.len()
            };
            best = argmax(best.into_iter().chain([(e, gain)]));
        }
        let Some((x, gain)) = best else { break };
        anchors.push(x);
        lab = anchored_truss_decompose(g, &anchors)?.into_labeling();
        gains.push(gain as u64);
        seconds.push(round.elapsed().as_secs_f64());
    }
    greedy_result(g, Strategy::BasePlus, anchors, gains, seconds, started)
}

/// Greedy selection with per-node follower caching across rounds.
pub struct GasEngine<'g> {
    g: &'g Graph,
    lab: TrussLabeling,
    tree: TrussComponentTree,
    ledger: ReuseLedger,
    search: FollowerSearch,
    options: ReuseOptions,
    anchors: Vec<EdgeId>,
    searches: usize,
}

impl<'g> GasEngine<'g> {
    pub fn new(g: &'g Graph, options: ReuseOptions) -> Self {
        let lab = truss_decompose(g);
        let tree = TrussComponentTree::build(g, &lab);
        Self {
            g,
            lab,
            tree,
            ledger: ReuseLedger::new(g.edge_count()),
            search: FollowerSearch::new(g.edge_count()),
            options,
            anchors: Vec::new(),
            searches: 0,
        }
    }

    pub fn labeling(&self) -> &TrussLabeling {
        &self.lab
    }

    pub fn tree(&self) -> &TrussComponentTree {
        &self.tree
    }

    pub fn ledger(&self) -> &ReuseLedger {
        &self.ledger
    }

    pub fn anchors(&self) -> &[EdgeId] {
        &self.anchors
    }

    /// Follower count of `e` under the current anchors, reusing every
    /// current cached node result and refreshing the rest.
    pub fn evaluate(&mut self, e: EdgeId) -> Result<usize> {
        if self.lab.is_anchored(e) {
            return Err(Error::AlreadyAnchored(e));
        }
        if self.g.support(e) == 0 {
            return Ok(0);
        }
        let Self {
            g,
            lab,
            tree,
            ledger,
            search,
            ..
        } = self;
        let sla = tree.sla(e);
        let rn = ledger.rn(e);
        let cached: usize = rn.iter().map(|&id| ledger.cached(e, id).map_or(0, <[_]>::len)).sum();
        if rn.len() == sla.len() {
            return Ok(cached);
        }
        let fixed = |p: EdgeId| {
            let id = tree.node_of(p)?;
            rn.binary_search(&id).ok()?;
            ledger.cached(e, id).map(|f| f.binary_search(&p).is_ok())
        };
        let fresh = search.search_restricted(g, lab, e, &fixed)?;
        self.searches += 1;
        let parts = self.tree.partition(&fresh.followers);
        let entries = self
            .tree
            .sla(e)
            .iter()
            .map(|&id| {
                let list = if self.ledger.rn(e).binary_search(&id).is_ok() {
                    self.ledger.cached(e, id).unwrap_or_default().to_vec()
                } else {
                    parts
                        .iter()
                        .find(|(pid, _)| *pid == id)
                        .map(|(_, v)| v.clone())
                        .unwrap_or_default()
                };
                (id, list)
            })
            .collect();
        self.ledger.store(e, entries);
        Ok(cached + fresh.len())
    }

    /// Scores every candidate and returns the best, smallest id on ties.
    pub fn best(&mut self) -> Result<Option<(EdgeId, usize)>> {
        let mut best = None;
        for e in self.g.edges() {
            if self.lab.is_anchored(e) {
                continue;
            }
            let gain = self.evaluate(e)?;
            best = argmax(best.into_iter().chain([(e, gain)]));
        }
        Ok(best)
    }

    pub fn commit(&mut self, x: EdgeId) -> Result<CommitReport> {
        if self.lab.is_anchored(x) {
            return Err(Error::AlreadyAnchored(x));
        }
        let t = self.lab.trussness(x);
        self.lab.mark_anchored(x, t);
        self.anchors.push(x);
        follower_reuse(self.g, &mut self.lab, x, &mut self.tree, &mut self.ledger, self.options)
    }

    pub fn reuse_histogram(&self) -> ReuseHistogram {
        let mut h = ReuseHistogram::default();
        for e in self.g.edges().filter(|&e| !self.lab.is_anchored(e)) {
            match classify_reuse(&self.tree, &self.ledger, e) {
                ReuseClass::Full => h.full += 1,
                ReuseClass::Partial => h.partial += 1,
                ReuseClass::None => h.none += 1,
            }
        }
        h
    }

    /// Fresh unrestricted followers of `e`, grouped by node.
    pub fn fresh_partition(&mut self, e: EdgeId) -> Result<Vec<(u32, Vec<EdgeId>)>> {
        let found = self.search.search(self.g, &self.lab, e)?;
        Ok(self.tree.partition(&found.followers))
    }

    /// `(edge, node)` pairs in `rn` whose cached followers differ from a
    /// fresh search.
    pub fn reuse_violations(&mut self) -> Result<Vec<(EdgeId, u32)>> {
        let mut out = Vec::new();
        for e in self.g.edges() {
            if self.lab.is_anchored(e) || self.ledger.rn(e).is_empty() {
                continue;
            }
            let fresh = self.fresh_partition(e)?;
            for &id in self.ledger.rn(e) {
                let want = fresh.iter().find(|(pid, _)| *pid == id).map_or(&[][..], |(_, v)| v);
                if self.ledger.cached(e, id) != Some(want) {
                    out.push((e, id));
                }
            }
        }
        Ok(out)
    }
}

pub fn select_gas(g: &Graph, budget: usize) -> Result<SelectionResult> {
    select_gas_with(g, budget, ReuseOptions::default())
}

pub fn select_gas_with(g: &Graph, budget: usize, options: ReuseOptions) -> Result<SelectionResult> {
    let started = Instant::now();
    let mut engine = GasEngine::new(g, options);
    let (mut gains, mut seconds, mut reuse, mut searches) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..budget.min(g.edge_count()) {
        let round = Instant::now();
        let before = engine.searches;
        let Some((x, gain)) = engine.best()? else { break };
        searches.push(engine.searches - before);
        engine.commit(x)?;
        gains.push(gain as u64);
        seconds.push(round.elapsed().as_secs_f64());
        reuse.push(engine.reuse_histogram());
    }
    let mut result = greedy_result(g, Strategy::Gas, engine.anchors, gains, seconds, started)?;
    result.reuse = reuse;
    result.searches = searches;
    Ok(result)
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Advances `idx` to the next `idx.len()`-combination of `0..n` in
/// lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
        return false;
    };
    idx[pos] += 1;
    for p in pos + 1..k {
        idx[p] = idx[p - 1] + 1;
    }
    true
}

/// Best `b`-subset by exhaustive enumeration. Edges in no triangle cannot
/// help anyone, so only edges with support enter the enumeration; if the
/// budget exceeds that pool the smallest remaining ids fill the set.
///
/// Every `(b-1)`-prefix is decomposed in full. The last anchor `x` is then
/// scored from the prefix labeling as
/// `TG(A + x) = TG(A) + |F(x, G_A)| - (t_A(x) - t(x))`.
pub fn select_exact(g: &Graph, budget: usize, cap: u128) -> Result<SelectionResult> {
    let started = Instant::now();
    let budget = budget.min(g.edge_count());
    let pool: Vec<EdgeId> = g.edges().filter(|&e| g.support(e) > 0).collect();
    let n = pool.len();
    let k = budget.min(n);
    let required = binomial(n, k);
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    let mut best: Option<(u64, Vec<EdgeId>)> = None;
    if k > 0 {
        let base = truss_decompose(g);
        let mut oracle = GainOracle::with_base(g, base.clone());
        let mut search = FollowerSearch::new(g.edge_count());
        // prefixes leave room for at least one later element
        let mut idx: Vec<usize> = (0..k - 1).collect();
        let mut prefix: Vec<EdgeId> = Vec::with_capacity(k);
        loop {
            prefix.clear();
            prefix.extend(idx.iter().map(|&i| pool[i]));
            let lab = oracle.labeling(&prefix);
            let prefix_gain: u64 = g
                .edges()
                .filter(|&e| !lab.is_anchored(e))
                .map(|e| u64::from(lab.trussness(e) - base.trussness(e)))
                .sum();
            let from = idx.last().map_or(0, |&i| i + 1);
            for &x in &pool[from..] {
                let followers = search.search(g, &lab, x)?.len() as u64;
                let gain = prefix_gain + followers - u64::from(lab.trussness(x) - base.trussness(x));
                if best.as_ref().is_none_or(|(bg, _)| gain > *bg) {
                    let mut set = prefix.clone();
                    set.push(x);
                    best = Some((gain, set));
                }
            }
            if !next_combination(&mut idx, n - 1) {
                break;
            }
        }
    }
    let mut anchors = best.map(|(_, s)| s).unwrap_or_default();
    for e in g.edges() {
        if anchors.len() >= budget {
            break;
        }
        if !anchors.contains(&e) {
            anchors.push(e);
        }
    }
    anchors.sort_unstable();
    SelectionResult::finish(g, Strategy::Exact, anchors, started)
}

/// Candidate pool for a randomized strategy.
pub fn random_pool(g: &Graph, strategy: Strategy, top_fraction: f64) -> Result<Vec<EdgeId>> {
    let m = g.edge_count();
    let take = ((m as f64) * top_fraction).ceil() as usize;
    let ranked = |score: Vec<usize>| {
        let mut edges: Vec<EdgeId> = g.edges().collect();
        edges.sort_by_key(|e| (std::cmp::Reverse(score[e.index()]), *e));
        edges.truncate(take.min(m));
        edges.sort_unstable();
        edges
    };
    match strategy {
        Strategy::Rand => Ok(g.edges().collect()),
        Strategy::Sup => Ok(ranked(g.edges().map(|e| g.support(e)).collect())),
        Strategy::Tur => {
            let lab = truss_decompose(g);
            let mut search = FollowerSearch::new(m);
            let sizes = g
                .edges()
                .map(|e| search.search(g, &lab, e).map(|f| f.route_size))
                .collect::<Result<Vec<_>>>()?;
            Ok(ranked(sizes))
        }
        other => Err(Error::InvalidArgument(format!("{other} is not a randomized strategy"))),
    }
}

/// Best of `trials` uniform draws of `b` edges from the strategy's pool.
pub fn select_random(g: &Graph, config: &StrategyConfig) -> Result<SelectionResult> {
    let started = Instant::now();
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trial count must be at least 1".into()));
    }
    let pool = random_pool(g, config.strategy, config.top_fraction)?;
    if config.budget > pool.len() {
        return Err(Error::PoolTooSmall {
            pool: pool.len(),
            budget: config.budget,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut oracle = GainOracle::new(g);
    let mut best: Option<(u64, Vec<EdgeId>)> = None;
    for _ in 0..config.trials {
        let mut draw: Vec<EdgeId> = sample(&mut rng, pool.len(), config.budget)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        draw.sort_unstable();
        let gain = oracle.gain(&draw);
        if best.as_ref().is_none_or(|(bg, _)| gain > *bg) {
            best = Some((gain, draw));
        }
    }
    let anchors = best.map(|(_, d)| d).unwrap_or_default();
    SelectionResult::finish(g, config.strategy, anchors, started)
}

pub fn select(g: &Graph, config: &StrategyConfig) -> Result<SelectionResult> {
    match config.strategy {
        Strategy::Base => select_base(g, config.budget),
        Strategy::BasePlus => select_base_plus(g, config.budget),
        Strategy::Gas => select_gas_with(g, config.budget, config.reuse),
        Strategy::Exact => select_exact(g, config.budget, config.exact_cap),
        Strategy::Rand | Strategy::Sup | Strategy::Tur => select_random(g, config),
    }
}

/// Default reuse settings with the given expiry rule.
pub fn reuse_options(rule: ExpiryRule, sla: SlaMode) -> ReuseOptions {
    ReuseOptions { rule, sla }
}

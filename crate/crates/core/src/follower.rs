//! Follower search: which edges gain one level of trussness when a single
//! extra edge is anchored.
//!
//! Levels are independent, so each trussness level `i` is searched on its
//! own. Candidates are popped from a min-heap keyed by `(layer, id)`; an
//! edge survives when at least `i - 1` of its triangles are still effective
//! and is eliminated otherwise. Eliminations retract support from survivors
//! through a worklist so every triangle is withdrawn at most once.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::truss::TrussLabeling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStatus {
    Unchecked,
    Survived,
    Eliminated,
}

/// Edges whose outcome is already known. `Some(true)` pins an edge as a
/// follower, `Some(false)` as a non-follower; pinned edges are never
/// enqueued or re-evaluated.
pub trait Restriction {
    fn fixed(&self, e: EdgeId) -> Option<bool>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Unrestricted;

impl Restriction for Unrestricted {
    #[inline]
    fn fixed(&self, _: EdgeId) -> Option<bool> {
        None
    }
}

impl<F: Fn(EdgeId) -> Option<bool>> Restriction for F {
    #[inline]
    fn fixed(&self, e: EdgeId) -> Option<bool> {
        self(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FollowerSet {
    pub anchor: EdgeId,
    /// Sorted by id.
    pub followers: Vec<EdgeId>,
    /// Distinct edges enqueued over all levels.
    pub route_size: usize,
}

impl FollowerSet {
    pub fn len(&self) -> usize {
        self.followers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.followers.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Seed { level: u32, edge: EdgeId },
    Pop { level: u32, edge: EdgeId, layer: u32 },
    Survive { edge: EdgeId, s_plus: u32 },
    Eliminate { edge: EdgeId, s_plus: u32 },
    Push { edge: EdgeId, from: EdgeId },
    Retract { edge: EdgeId, cause: EdgeId, s_plus: u32 },
    LevelDone { level: u32, followers: usize },
}

pub fn write_trace<W: Write>(events: &[TraceEvent], mut out: W) -> std::io::Result<()> {
    for event in events {
        serde_json::to_writer(&mut out, event)?;
        writeln!(out)?;
    }
    Ok(())
}

const SURVIVED: u8 = 1;
const ELIMINATED: u8 = 2;

/// Scratch state for repeated searches over graphs with at most `m` edges.
/// Per-level state is invalidated by bumping an epoch instead of clearing.
pub struct FollowerSearch {
    epoch: u32,
    mark: Vec<u32>,
    status: Vec<u8>,
    seen: Vec<u32>,
    pending: Vec<u32>,
    s_plus: Vec<u32>,
    heap: BinaryHeap<Reverse<(u32, u32)>>,
    work: Vec<EdgeId>,
    seeds: Vec<(u32, u32, EdgeId)>,
    trace: Option<Vec<TraceEvent>>,
}

struct Level<'a, R: ?Sized> {
    g: &'a Graph,
    lab: &'a TrussLabeling,
    x: EdgeId,
    i: u32,
    fixed: &'a R,
}

impl FollowerSearch {
    pub fn new(m: usize) -> Self {
        Self {
            epoch: 0,
            mark: vec![0; m],
            status: vec![0; m],
            seen: vec![0; m],
            pending: vec![0; m],
            s_plus: vec![0; m],
            heap: BinaryHeap::new(),
            work: Vec::new(),
            seeds: Vec::new(),
            trace: None,
        }
    }

    pub fn set_tracing(&mut self, on: bool) {
        self.trace = on.then(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn log(&mut self, event: impl FnOnce() -> TraceEvent) {
        if let Some(trace) = &mut self.trace {
            trace.push(event());
        }
    }

    fn grow(&mut self, m: usize) {
        if self.mark.len() < m {
            self.mark.resize(m, 0);
            self.status.resize(m, 0);
            self.seen.resize(m, 0);
            self.pending.resize(m, 0);
            self.s_plus.resize(m, 0);
        }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.fill(0);
            self.seen.fill(0);
            self.pending.fill(0);
            self.epoch = 1;
        }
    }

    #[inline]
    fn status_of(&self, e: EdgeId) -> EdgeStatus {
        if self.mark[e.index()] != self.epoch {
            EdgeStatus::Unchecked
        } else if self.status[e.index()] == SURVIVED {
            EdgeStatus::Survived
        } else {
            EdgeStatus::Eliminated
        }
    }

    #[inline]
    fn set_status(&mut self, e: EdgeId, s: u8) {
        self.mark[e.index()] = self.epoch;
        self.status[e.index()] = s;
    }

    /// Whether `p` may still supply a triangle to `e` at the current level.
    #[inline]
    fn ok<R: Restriction + ?Sized>(&self, lv: &Level<'_, R>, e: EdgeId, p: EdgeId) -> bool {
        if p == lv.x || lv.lab.is_anchored(p) {
            return true;
        }
        let tp = lv.lab.trussness(p);
        if tp != lv.i {
            return tp > lv.i;
        }
        if let Some(keep) = lv.fixed.fixed(p) {
            return keep;
        }
        match self.status_of(p) {
            EdgeStatus::Survived => true,
            EdgeStatus::Eliminated => false,
            EdgeStatus::Unchecked => lv.lab.layer(e) <= lv.lab.layer(p),
        }
    }

    fn count_effective<R: Restriction + ?Sized>(&self, lv: &Level<'_, R>, e: EdgeId) -> u32 {
        lv.g
            .wedges(e)
            .iter()
            .filter(|w| self.ok(lv, e, w.first) && self.ok(lv, e, w.second))
            .count() as u32
    }

    /// Effective-triangle count of `e` against the state left by the most
    /// recent level processed for anchor `x`.
    pub fn effective_support(&self, g: &Graph, lab: &TrussLabeling, x: EdgeId, e: EdgeId) -> u32 {
        let lv = Level {
            g,
            lab,
            x,
            i: lab.trussness(e),
            fixed: &Unrestricted,
        };
        self.count_effective(&lv, e)
    }

    /// Marks `z` eliminated and withdraws its triangles from survivors,
    /// cascading through a worklist.
    fn eliminate<R: Restriction + ?Sized>(&mut self, lv: &Level<'_, R>, z: EdgeId) {
        let threshold = lv.i - 1;
        self.work.clear();
        self.work.push(z);
        self.pending[z.index()] = self.epoch;
        while let Some(z) = self.work.pop() {
            // the popped edge is unchecked, cascaded ones are still survived
            let was_survived = self.status_of(z) == EdgeStatus::Survived;
            self.set_status(z, ELIMINATED);
            let lz = lv.lab.layer(z);
            for w in lv.g.wedges(z) {
                for (ep, r) in [(w.first, w.second), (w.second, w.first)] {
                    if self.status_of(ep) != EdgeStatus::Survived
                        || ep == lv.x
                        || lv.lab.is_anchored(ep)
                        || lv.lab.trussness(ep) != lv.i
                    {
                        continue;
                    }
                    let counted = was_survived || lv.lab.layer(ep) <= lz;
                    if !counted || !self.ok(lv, ep, r) {
                        continue;
                    }
                    let s = &mut self.s_plus[ep.index()];
                    *s -= 1;
                    let s = *s;
                    self.log(|| TraceEvent::Retract {
                        edge: ep,
                        cause: z,
                        s_plus: s,
                    });
                    if s < threshold && self.pending[ep.index()] != self.epoch {
                        self.pending[ep.index()] = self.epoch;
                        self.work.push(ep);
                    }
                }
            }
        }
    }

    fn collect_seeds<R: Restriction + ?Sized>(
        &mut self,
        g: &Graph,
        lab: &TrussLabeling,
        x: EdgeId,
        fixed: &R,
    ) {
        self.seeds.clear();
        let (tx, lx) = lab.key(x);
        for w in g.wedges(x) {
            for e in [w.first, w.second] {
                if lab.is_anchored(e) || fixed.fixed(e).is_some() {
                    continue;
                }
                let (t, l) = lab.key(e);
                if t > tx || (t == tx && l > lx) {
                    self.seeds.push((t, l, e));
                }
            }
        }
        self.seeds.sort_unstable();
    }

    pub fn search(&mut self, g: &Graph, lab: &TrussLabeling, x: EdgeId) -> Result<FollowerSet> {
        self.search_restricted(g, lab, x, &Unrestricted)
    }

    /// Followers of `x` in the graph anchored as `lab` describes, with the
    /// edges pinned by `fixed` taken as given. Pinned followers are not
    /// included in the result.
    pub fn search_restricted<R: Restriction + ?Sized>(
        &mut self,
        g: &Graph,
        lab: &TrussLabeling,
        x: EdgeId,
        fixed: &R,
    ) -> Result<FollowerSet> {
        if !g.contains_edge(x) || lab.len() != g.edge_count() {
            return Err(Error::InvalidEdge(x));
        }
        if lab.is_anchored(x) {
            return Err(Error::AlreadyAnchored(x));
        }
        self.grow(g.edge_count());
        self.collect_seeds(g, lab, x, fixed);
        let seeds = std::mem::take(&mut self.seeds);
        let mut followers = Vec::new();
        let mut route_size = 0;
        let mut start = 0;
        while start < seeds.len() {
            let i = seeds[start].0;
            let end = start + seeds[start..].iter().take_while(|s| s.0 == i).count();
            let lv = Level { g, lab, x, i, fixed };
            self.next_epoch();
            self.heap.clear();
            for &(_, l, e) in &seeds[start..end] {
                self.seen[e.index()] = self.epoch;
                self.heap.push(Reverse((l, e.0)));
                self.log(|| TraceEvent::Seed { level: i, edge: e });
            }
            route_size += end - start;
            let mut survivors = Vec::new();
            while let Some(Reverse((l, id))) = self.heap.pop() {
                let e = EdgeId(id);
                self.log(|| TraceEvent::Pop {
                    level: i,
                    edge: e,
                    layer: l,
                });
                let s = self.count_effective(&lv, e);
                if s + 1 >= i {
                    self.s_plus[e.index()] = s;
                    self.set_status(e, SURVIVED);
                    survivors.push(e);
                    self.log(|| TraceEvent::Survive { edge: e, s_plus: s });
                    for w in g.wedges(e) {
                        for p in [w.first, w.second] {
                            if p == x
                                || lab.is_anchored(p)
                                || lab.trussness(p) != i
                                || lab.layer(p) < l
                                || self.seen[p.index()] == self.epoch
                                || fixed.fixed(p).is_some()
                            {
                                continue;
                            }
                            self.seen[p.index()] = self.epoch;
                            self.heap.push(Reverse((lab.layer(p), p.0)));
                            route_size += 1;
                            self.log(|| TraceEvent::Push { edge: p, from: e });
                        }
                    }
                } else {
                    self.log(|| TraceEvent::Eliminate { edge: e, s_plus: s });
                    self.eliminate(&lv, e);
                }
            }
            let before = followers.len();
            followers.extend(
                survivors
                    .into_iter()
                    .filter(|&e| self.status_of(e) == EdgeStatus::Survived),
            );
            let found = followers.len() - before;
            self.log(|| TraceEvent::LevelDone {
                level: i,
                followers: found,
            });
            start = end;
        }
        self.seeds = seeds;
        followers.sort_unstable();
        Ok(FollowerSet {
            anchor: x,
            followers,
            route_size,
        })
    }
}

/// Neighbor-edges of `x` that may follow it directly, grouped by trussness.
pub fn seed_candidates(g: &Graph, lab: &TrussLabeling, x: EdgeId) -> Result<BTreeMap<u32, Vec<EdgeId>>> {
    if !g.contains_edge(x) {
        return Err(Error::InvalidEdge(x));
    }
    let mut search = FollowerSearch::new(0);
    search.collect_seeds(g, lab, x, &Unrestricted);
    let mut out: BTreeMap<u32, Vec<EdgeId>> = BTreeMap::new();
    for &(t, _, e) in &search.seeds {
        out.entry(t).or_default().push(e);
    }
    Ok(out)
}

pub fn get_followers(g: &Graph, lab: &TrussLabeling, x: EdgeId) -> Result<FollowerSet> {
    FollowerSearch::new(g.edge_count()).search(g, lab, x)
}

pub fn upward_route_size(g: &Graph, lab: &TrussLabeling, x: EdgeId) -> Result<usize> {
    get_followers(g, lab, x).map(|f| f.route_size)
}

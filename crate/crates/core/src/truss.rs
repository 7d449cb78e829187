//! Truss decomposition with per-edge peeling layers and anchored variants.
//!
//! Peeling runs in synchronized rounds: inside phase `k`, round `i` removes
//! every surviving edge whose support is at most `k - 2` at the start of the
//! round, and those edges get `t = k`, `l = i`. Anchored edges are never
//! removed; each one records a placement trussness, the largest `k` at which
//! it still lies in at least `k - 2` triangles of the anchored `k`-truss.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};

/// Per-edge trussness and layer. Anchored edges carry their placement
/// trussness and layer 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrussLabeling {
    trussness: Vec<u32>,
    layer: Vec<u32>,
    anchored: Vec<bool>,
    k_max: u32,
}

impl TrussLabeling {
    fn from_peel(peel: &Peel, anchored: &[bool]) -> Self {
        let mut labeling = Self {
            trussness: peel.trussness.clone(),
            layer: peel.layer.clone(),
            anchored: anchored.to_vec(),
            k_max: 2,
        };
        labeling.refresh_k_max();
        labeling
    }

    pub(crate) fn refresh_k_max(&mut self) {
        self.k_max = self
            .trussness
            .iter()
            .zip(&self.anchored)
            .filter(|(_, &a)| !a)
            .map(|(&t, _)| t)
            .max()
            .unwrap_or(2)
            .max(2);
    }

    pub fn len(&self) -> usize {
        self.trussness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trussness.is_empty()
    }

    #[inline]
    pub fn trussness(&self, e: EdgeId) -> u32 {
        self.trussness[e.index()]
    }

    #[inline]
    pub fn layer(&self, e: EdgeId) -> u32 {
        self.layer[e.index()]
    }

    #[inline]
    pub fn is_anchored(&self, e: EdgeId) -> bool {
        self.anchored[e.index()]
    }

    /// Largest trussness among non-anchored edges, at least 2.
    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn trussness_slice(&self) -> &[u32] {
        &self.trussness
    }

    pub fn layer_slice(&self) -> &[u32] {
        &self.layer
    }

    pub fn anchored_slice(&self) -> &[bool] {
        &self.anchored
    }

    pub fn anchors(&self) -> Vec<EdgeId> {
        self.anchored
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| EdgeId(i as u32))
            .collect()
    }

    #[inline]
    pub fn key(&self, e: EdgeId) -> (u32, u32) {
        (self.trussness(e), self.layer(e))
    }

    /// `a ≺ b`: lower trussness, or equal trussness and no later layer.
    #[inline]
    pub fn precedes(&self, a: EdgeId, b: EdgeId) -> bool {
        self.key(a) <= self.key(b)
    }

    pub fn order(&self) -> EdgeOrder<'_> {
        EdgeOrder { labeling: self }
    }

    /// Non-anchored edges grouped by trussness.
    pub fn hulls(&self) -> BTreeMap<u32, Vec<EdgeId>> {
        let mut out: BTreeMap<u32, Vec<EdgeId>> = BTreeMap::new();
        for (i, &t) in self.trussness.iter().enumerate() {
            if !self.anchored[i] {
                out.entry(t).or_default().push(EdgeId(i as u32));
            }
        }
        out
    }

    /// Layers of the `k`-hull, index 0 holding layer 1.
    pub fn layers(&self, k: u32) -> Vec<Vec<EdgeId>> {
        let mut out: Vec<Vec<EdgeId>> = Vec::new();
        for (i, (&t, &l)) in self.trussness.iter().zip(&self.layer).enumerate() {
            if t == k && !self.anchored[i] {
                let slot = l as usize - 1;
                if out.len() <= slot {
                    out.resize_with(slot + 1, Vec::new);
                }
                out[slot].push(EdgeId(i as u32));
            }
        }
        out
    }

    pub(crate) fn set(&mut self, e: EdgeId, trussness: u32, layer: u32) {
        self.trussness[e.index()] = trussness;
        self.layer[e.index()] = layer;
    }

    pub(crate) fn mark_anchored(&mut self, e: EdgeId, placement: u32) {
        self.anchored[e.index()] = true;
        self.trussness[e.index()] = placement;
        self.layer[e.index()] = 0;
    }

    /// Writes `edge_id,u,v,trussness,layer` rows, vertices by original label.
    pub fn write_csv<W: Write>(&self, g: &Graph, mut out: W) -> std::io::Result<()> {
        writeln!(out, "edge_id,u,v,trussness,layer")?;
        for e in g.edges() {
            let (u, v) = g.endpoints(e);
            writeln!(
                out,
                "{},{},{},{},{}",
                e.0,
                g.label(u),
                g.label(v),
                self.trussness(e),
                self.layer(e)
            )?;
        }
        Ok(())
    }
}

/// Total order on edges by `(trussness, layer, id)`, consistent with `≺`.
#[derive(Clone, Copy)]
pub struct EdgeOrder<'a> {
    labeling: &'a TrussLabeling,
}

impl EdgeOrder<'_> {
    pub fn compare(&self, a: EdgeId, b: EdgeId) -> Ordering {
        (self.labeling.key(a), a).cmp(&(self.labeling.key(b), b))
    }

    pub fn sort(&self, edges: &mut [EdgeId]) {
        edges.sort_by(|&a, &b| self.compare(a, b));
    }
}

/// Result of an anchored decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorState {
    anchors: Vec<EdgeId>,
    labeling: TrussLabeling,
}

impl AnchorState {
    pub fn anchors(&self) -> &[EdgeId] {
        &self.anchors
    }

    /// Post-anchor trussness, `None` for anchors (unbounded).
    pub fn trussness(&self, e: EdgeId) -> Option<u32> {
        (!self.labeling.is_anchored(e)).then(|| self.labeling.trussness(e))
    }

    pub fn placement(&self, e: EdgeId) -> Option<u32> {
        self.labeling
            .is_anchored(e)
            .then(|| self.labeling.trussness(e))
    }

    pub fn labeling(&self) -> &TrussLabeling {
        &self.labeling
    }

    pub fn into_labeling(self) -> TrussLabeling {
        self.labeling
    }

    /// Σ over non-anchors of the trussness increase relative to `base`.
    pub fn gain_over(&self, base: &TrussLabeling) -> u64 {
        gain_between(base, &self.labeling)
    }
}

fn gain_between(base: &TrussLabeling, anchored: &TrussLabeling) -> u64 {
    let mut gain = 0u64;
    for i in 0..base.len() {
        if !anchored.anchored[i] && !base.anchored[i] {
            gain += u64::from(anchored.trussness[i].saturating_sub(base.trussness[i]));
        }
    }
    gain
}

/// Raw peeling output, reused across runs.
#[derive(Clone, Debug, Default)]
pub struct Peel {
    /// Trussness, or placement for anchors; 0 for edges outside the member set.
    pub trussness: Vec<u32>,
    /// Layer within the trussness phase; 0 for anchors and non-members.
    pub layer: Vec<u32>,
}

/// Reusable peeling workspace bound to one graph.
pub struct Decomposer<'g> {
    g: &'g Graph,
    sup: Vec<u32>,
    alive: Vec<bool>,
    buckets: Vec<Vec<EdgeId>>,
    batch: Vec<EdgeId>,
    next: Vec<EdgeId>,
    open: Vec<EdgeId>,
}

impl<'g> Decomposer<'g> {
    pub fn new(g: &'g Graph) -> Self {
        let m = g.edge_count();
        Self {
            g,
            sup: vec![0; m],
            alive: vec![false; m],
            buckets: Vec::new(),
            batch: Vec::new(),
            next: Vec::new(),
            open: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    /// Peels the subgraph on `member` edges (all edges when `None`), never
    /// removing edges flagged in `anchored`.
    pub fn run(&mut self, member: Option<&[bool]>, anchored: &[bool], out: &mut Peel) {
        let g = self.g;
        let m = g.edge_count();
        out.trussness.clear();
        out.trussness.resize(m, 0);
        out.layer.clear();
        out.layer.resize(m, 0);
        for i in 0..m {
            self.alive[i] = member.is_none_or(|mm| mm[i]);
        }

        let mut max_sup = 0;
        let mut remaining = 0usize;
        self.open.clear();
        for e in g.edges() {
            let i = e.index();
            if !self.alive[i] {
                continue;
            }
            let s = g
                .wedges(e)
                .iter()
                .filter(|w| self.alive[w.first.index()] && self.alive[w.second.index()])
                .count() as u32;
            self.sup[i] = s;
            max_sup = max_sup.max(s);
            if anchored[i] {
                self.open.push(e);
                out.trussness[i] = 2;
            } else {
                remaining += 1;
            }
        }
        for b in &mut self.buckets {
            b.clear();
        }
        if self.buckets.len() < max_sup as usize + 1 {
            self.buckets.resize_with(max_sup as usize + 1, Vec::new);
        }
        for e in g.edges() {
            if self.alive[e.index()] && !anchored[e.index()] {
                self.buckets[self.sup[e.index()] as usize].push(e);
            }
        }

        let mut k = 2u32;
        while remaining > 0 {
            let thr = k - 2;
            self.open.retain(|a| {
                if self.sup[a.index()] >= thr {
                    out.trussness[a.index()] = k;
                    true
                } else {
                    false
                }
            });

            self.batch.clear();
            if let Some(bucket) = self.buckets.get_mut(thr as usize) {
                for e in bucket.drain(..) {
                    let i = e.index();
                    if self.alive[i] && self.sup[i] == thr {
                        self.batch.push(e);
                    }
                }
            }
            let mut round = 0;
            while !self.batch.is_empty() {
                round += 1;
                for &e in &self.batch {
                    out.trussness[e.index()] = k;
                    out.layer[e.index()] = round;
                }
                for bi in 0..self.batch.len() {
                    let e = self.batch[bi];
                    self.alive[e.index()] = false;
                    remaining -= 1;
                    for w in g.wedges(e) {
                        let (f1, f2) = (w.first.index(), w.second.index());
                        if !(self.alive[f1] && self.alive[f2]) {
                            continue;
                        }
                        for f in [w.first, w.second] {
                            let s = &mut self.sup[f.index()];
                            *s -= 1;
                            if anchored[f.index()] {
                                continue;
                            }
                            if *s == thr {
                                self.next.push(f);
                            } else if *s > thr {
                                self.buckets[*s as usize].push(f);
                            }
                        }
                    }
                }
                std::mem::swap(&mut self.batch, &mut self.next);
                self.next.clear();
            }
            k += 1;
        }
        for &a in &self.open {
            let i = a.index();
            out.trussness[i] = out.trussness[i].max(self.sup[i] + 2);
        }
    }
}

fn anchor_flags(g: &Graph, anchors: &[EdgeId]) -> Result<Vec<bool>> {
    let mut flags = vec![false; g.edge_count()];
    for &a in anchors {
        if !g.contains_edge(a) {
            return Err(Error::InvalidEdge(a));
        }
        flags[a.index()] = true;
    }
    Ok(flags)
}

pub fn truss_decompose(g: &Graph) -> TrussLabeling {
    let anchored = vec![false; g.edge_count()];
    let mut peel = Peel::default();
    Decomposer::new(g).run(None, &anchored, &mut peel);
    TrussLabeling::from_peel(&peel, &anchored)
}

pub fn anchored_truss_decompose(g: &Graph, anchors: &[EdgeId]) -> Result<AnchorState> {
    let flags = anchor_flags(g, anchors)?;
    let mut peel = Peel::default();
    Decomposer::new(g).run(None, &flags, &mut peel);
    let mut sorted = anchors.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(AnchorState {
        anchors: sorted,
        labeling: TrussLabeling::from_peel(&peel, &flags),
    })
}

/// Trussness gain of anchoring `anchors`, excluding the anchors themselves.
pub fn trussness_gain(g: &Graph, anchors: &[EdgeId]) -> Result<u64> {
    let base = truss_decompose(g);
    Ok(anchored_truss_decompose(g, anchors)?.gain_over(&base))
}

/// Repeated gain evaluation against a fixed base decomposition.
pub struct GainOracle<'g> {
    decomposer: Decomposer<'g>,
    base: TrussLabeling,
    flags: Vec<bool>,
    peel: Peel,
}

impl<'g> GainOracle<'g> {
    pub fn new(g: &'g Graph) -> Self {
        Self::with_base(g, truss_decompose(g))
    }

    pub fn with_base(g: &'g Graph, base: TrussLabeling) -> Self {
        Self {
            decomposer: Decomposer::new(g),
            base,
            flags: vec![false; g.edge_count()],
            peel: Peel::default(),
        }
    }

    pub fn base(&self) -> &TrussLabeling {
        &self.base
    }

    fn peel_with(&mut self, anchors: &[EdgeId]) {
        for &a in anchors {
            self.flags[a.index()] = true;
        }
        self.decomposer.run(None, &self.flags, &mut self.peel);
        for &a in anchors {
            self.flags[a.index()] = false;
        }
    }

    /// `TG(anchors)` relative to the base decomposition.
    pub fn gain(&mut self, anchors: &[EdgeId]) -> u64 {
        self.peel_with(anchors);
        let mut gain = 0u64;
        for (i, (&t, &t0)) in self.peel.trussness.iter().zip(&self.base.trussness).enumerate() {
            if !self.base.anchored[i] {
                gain += u64::from(t.saturating_sub(t0));
            }
        }
        for &a in anchors {
            let i = a.index();
            if !self.base.anchored[i] {
                gain -= u64::from(self.peel.trussness[i].saturating_sub(self.base.trussness[i]));
            }
        }
        gain
    }

    /// Edges whose trussness under `anchors` exceeds `reference`, anchors
    /// excluded.
    pub fn risers(&mut self, anchors: &[EdgeId], reference: &TrussLabeling) -> Vec<EdgeId> {
        self.peel_with(anchors);
        let mut out = Vec::new();
        for (i, &t) in self.peel.trussness.iter().enumerate() {
            if !reference.anchored[i] && t > reference.trussness[i] {
                out.push(EdgeId(i as u32));
            }
        }
        out.retain(|e| !anchors.contains(e));
        out
    }

    /// Full anchored labeling for `anchors`.
    pub fn labeling(&mut self, anchors: &[EdgeId]) -> TrussLabeling {
        self.peel_with(anchors);
        let mut flags = vec![false; self.flags.len()];
        for &a in anchors {
            flags[a.index()] = true;
        }
        TrussLabeling::from_peel(&self.peel, &flags)
    }
}

//! Immutable undirected simple graphs with dense vertex and edge ids.
//!
//! Vertices and edges are numbered in first-appearance order of the input.
//! Neighbor lists are sorted by vertex id and carry the id of the incident
//! edge, so common-neighbor scans are linear merges and `(u, v) -> EdgeId`
//! lookups are binary searches. The per-edge triangle index is built lazily
//! on first use and shared by every algorithm in the crate.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// One triangle seen from an edge `e = (u, v)`: the third vertex and the
/// ids of `(u, apex)` and `(v, apex)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wedge {
    pub apex: VertexId,
    pub first: EdgeId,
    pub second: EdgeId,
}

/// Three mutually adjacent vertices, stored sorted, with their edge ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triangle {
    pub vertices: [VertexId; 3],
    pub edges: [EdgeId; 3],
}

/// Per-edge triangle lists in CSR form.
#[derive(Debug)]
struct TriangleIndex {
    offsets: Vec<usize>,
    wedges: Vec<Wedge>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DuplicatePolicy {
    /// Collapse repeated and reversed pairs into one edge.
    #[default]
    Collapse,
    /// Treat a repeated pair as a parse error.
    Reject,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelfLoopPolicy {
    #[default]
    Drop,
    Reject,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub duplicates: DuplicatePolicy,
    pub self_loops: SelfLoopPolicy,
}

/// Counters collected while reading an edge list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub lines: usize,
    pub comments: usize,
    pub pairs: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

#[derive(Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    incident: Vec<EdgeId>,
    endpoints: Vec<(VertexId, VertexId)>,
    labels: Vec<i64>,
    triangles: OnceLock<TriangleIndex>,
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Self {
            offsets: self.offsets.clone(),
            neighbors: self.neighbors.clone(),
            incident: self.incident.clone(),
            endpoints: self.endpoints.clone(),
            labels: self.labels.clone(),
            triangles: OnceLock::new(),
        }
    }
}

/// Incremental construction from labelled pairs.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    options: LoadOptions,
    ids: HashMap<i64, VertexId>,
    labels: Vec<i64>,
    seen: HashMap<(u32, u32), EdgeId>,
    endpoints: Vec<(VertexId, VertexId)>,
    stats: LoadStats,
}

impl GraphBuilder {
    pub fn new(options: LoadOptions) -> Self {
        Self {
            options,
            ..Self::default()
        }
    }

    fn vertex(&mut self, label: i64) -> VertexId {
        let next = VertexId(self.labels.len() as u32);
        *self.ids.entry(label).or_insert_with(|| {
            self.labels.push(label);
            next
        })
    }

    /// Adds the pair `{a, b}`; returns the edge id, or `None` if the pair was
    /// dropped as a self-loop or collapsed as a duplicate.
    pub fn add_pair(&mut self, a: i64, b: i64) -> std::result::Result<Option<EdgeId>, String> {
        self.stats.pairs += 1;
        if a == b {
            self.stats.self_loops += 1;
            return match self.options.self_loops {
                SelfLoopPolicy::Drop => Ok(None),
                SelfLoopPolicy::Reject => Err(format!("self-loop on {a}")),
            };
        }
        let u = self.vertex(a);
        let v = self.vertex(b);
        let key = (u.0.min(v.0), u.0.max(v.0));
        if self.seen.contains_key(&key) {
            self.stats.duplicates += 1;
            return match self.options.duplicates {
                DuplicatePolicy::Collapse => Ok(None),
                DuplicatePolicy::Reject => Err(format!("duplicate edge {a} {b}")),
            };
        }
        let id = EdgeId(self.endpoints.len() as u32);
        self.seen.insert(key, id);
        self.endpoints.push((VertexId(key.0), VertexId(key.1)));
        Ok(Some(id))
    }

    pub fn stats(&self) -> LoadStats {
        self.stats
    }

    pub fn build(self) -> Graph {
        Graph::from_parts(self.labels, self.endpoints)
    }
}

impl Graph {
    /// Builds a graph from labelled pairs with the default policy
    /// (duplicates collapsed, self-loops dropped).
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let mut builder = GraphBuilder::new(LoadOptions::default());
        for (a, b) in pairs {
            builder
                .add_pair(a, b)
                .expect("default policy never rejects a pair");
        }
        builder.build()
    }

    /// Builds a graph over vertices `0..n` labelled by their index. Edge ids
    /// follow the order of `edges` after dropping loops and duplicates.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut endpoints = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            assert!((a as usize) < n && (b as usize) < n, "vertex out of range");
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                endpoints.push((VertexId(key.0), VertexId(key.1)));
            }
        }
        Self::from_parts((0..n as i64).collect(), endpoints)
    }

    pub(crate) fn from_parts(labels: Vec<i64>, endpoints: Vec<(VertexId, VertexId)>) -> Self {
        let n = labels.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in &endpoints {
            degree[u.index()] += 1;
            degree[v.index()] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().copied().unwrap_or(0) + d);
        }
        let mut slots: Vec<Vec<(VertexId, EdgeId)>> =
            degree.iter().map(|&d| Vec::with_capacity(d)).collect();
        for (i, &(u, v)) in endpoints.iter().enumerate() {
            let e = EdgeId(i as u32);
            slots[u.index()].push((v, e));
            slots[v.index()].push((u, e));
        }
        let mut neighbors = Vec::with_capacity(2 * endpoints.len());
        let mut incident = Vec::with_capacity(2 * endpoints.len());
        for mut list in slots {
            list.sort_unstable();
            for (w, e) in list {
                neighbors.push(w);
                incident.push(e);
            }
        }
        Self {
            offsets,
            neighbors,
            incident,
            endpoints,
            labels,
            triangles: OnceLock::new(),
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = EdgeId> + '_ {
        (0..self.endpoints.len() as u32).map(EdgeId)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        e.index() < self.endpoints.len()
    }

    fn check(&self, e: EdgeId) -> Result<()> {
        if self.contains_edge(e) {
            Ok(())
        } else {
            Err(Error::InvalidEdge(e))
        }
    }

    /// Endpoints of `e` with the smaller vertex id first.
    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.endpoints[e.index()]
    }

    #[inline]
    pub fn label(&self, v: VertexId) -> i64 {
        self.labels[v.index()]
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    #[inline]
    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let (small, other) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(small)
            .binary_search(&other)
            .ok()
            .map(|i| self.incident_edges(small)[i])
    }

    /// Edge lookup by original labels.
    pub fn edge_by_labels(&self, a: i64, b: i64) -> Option<EdgeId> {
        let u = self.labels.iter().position(|&l| l == a)?;
        let v = self.labels.iter().position(|&l| l == b)?;
        self.edge_between(VertexId(u as u32), VertexId(v as u32))
    }

    /// Merges the sorted neighbor lists of `e`'s endpoints.
    fn merge(&self, e: EdgeId, mut visit: impl FnMut(Wedge)) {
        let (u, v) = self.endpoints(e);
        let (nu, eu) = (self.neighbors(u), self.incident_edges(u));
        let (nv, ev) = (self.neighbors(v), self.incident_edges(v));
        let (mut i, mut j) = (0, 0);
        while i < nu.len() && j < nv.len() {
            match nu[i].cmp(&nv[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    visit(Wedge {
                        apex: nu[i],
                        first: eu[i],
                        second: ev[j],
                    });
                    i += 1;
                    j += 1;
                }
            }
        }
    }

    /// Sorted common neighbors of the endpoints of `e`.
    pub fn common_neighbors(&self, e: EdgeId) -> Result<Vec<VertexId>> {
        self.check(e)?;
        let mut out = Vec::new();
        self.merge(e, |w| out.push(w.apex));
        Ok(out)
    }

    /// Number of triangles containing `e`.
    pub fn support(&self, e: EdgeId) -> usize {
        self.wedges(e).len()
    }

    /// One entry per triangle containing `e`.
    pub fn neighbor_edges(&self, e: EdgeId) -> Result<Vec<Wedge>> {
        self.check(e)?;
        Ok(self.wedges(e).to_vec())
    }

    fn triangle_index(&self) -> &TriangleIndex {
        self.triangles.get_or_init(|| {
            let m = self.edge_count();
            let mut offsets = Vec::with_capacity(m + 1);
            let mut wedges = Vec::new();
            offsets.push(0);
            for e in self.edges() {
                self.merge(e, |w| wedges.push(w));
                offsets.push(wedges.len());
            }
            wedges.shrink_to_fit();
            TriangleIndex { offsets, wedges }
        })
    }

    /// Triangles of `e` from the cached index. Panics on an invalid id.
    #[inline]
    pub fn wedges(&self, e: EdgeId) -> &[Wedge] {
        let index = self.triangle_index();
        &index.wedges[index.offsets[e.index()]..index.offsets[e.index() + 1]]
    }

    /// Every triangle once, in lexicographic order of its sorted vertices.
    pub fn triangles(&self) -> Vec<Triangle> {
        let mut out = Vec::new();
        for e in self.edges() {
            let (u, v) = self.endpoints(e);
            for w in self.wedges(e) {
                // report from the edge joining the two smallest vertices
                if w.apex > v {
                    out.push(Triangle {
                        vertices: [u, v, w.apex],
                        edges: [e, w.first, w.second],
                    });
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn triangle_count(&self) -> usize {
        self.edges().map(|e| self.support(e)).sum::<usize>() / 3
    }

    pub fn max_support(&self) -> usize {
        self.edges().map(|e| self.support(e)).max().unwrap_or(0)
    }

    /// Subgraph keeping `edges` (in the given order), dropping vertices that
    /// end up isolated. Labels are carried over.
    pub fn edge_subgraph(&self, edges: &[EdgeId]) -> Graph {
        let mut remap = vec![u32::MAX; self.vertex_count()];
        let mut used: Vec<VertexId> = Vec::new();
        for &e in edges {
            let (u, v) = self.endpoints(e);
            for x in [u, v] {
                if remap[x.index()] == u32::MAX {
                    remap[x.index()] = 0;
                    used.push(x);
                }
            }
        }
        used.sort_unstable();
        let mut labels = Vec::with_capacity(used.len());
        for (i, &x) in used.iter().enumerate() {
            remap[x.index()] = i as u32;
            labels.push(self.label(x));
        }
        let endpoints = edges
            .iter()
            .map(|&e| {
                let (u, v) = self.endpoints(e);
                let (a, b) = (remap[u.index()], remap[v.index()]);
                (VertexId(a.min(b)), VertexId(a.max(b)))
            })
            .collect();
        Graph::from_parts(labels, endpoints)
    }

    /// Subgraph induced by `vertices`, keeping edges in id order.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> Graph {
        let mut keep = vec![u32::MAX; self.vertex_count()];
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut labels = Vec::with_capacity(sorted.len());
        for (i, &x) in sorted.iter().enumerate() {
            keep[x.index()] = i as u32;
            labels.push(self.label(x));
        }
        let endpoints = self
            .edges()
            .filter_map(|e| {
                let (u, v) = self.endpoints(e);
                let (a, b) = (keep[u.index()], keep[v.index()]);
                (a != u32::MAX && b != u32::MAX).then(|| (VertexId(a.min(b)), VertexId(a.max(b))))
            })
            .collect();
        Graph::from_parts(labels, endpoints)
    }

    /// Writes `vertex_id,label` rows.
    pub fn write_label_map<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "vertex_id,label")?;
        for (i, label) in self.labels.iter().enumerate() {
            writeln!(out, "{i},{label}")?;
        }
        Ok(())
    }

    /// Writes the graph as a SNAP-style edge list using original labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in self.edges() {
            let (u, v) = self.endpoints(e);
            writeln!(out, "{} {}", self.label(u), self.label(v))?;
        }
        Ok(())
    }
}

/// Parses a whitespace-separated edge list. Lines starting with `#` are
/// comments; tokens after the first two on a line are ignored.
pub fn parse_edge_list<R: BufRead>(reader: R, options: &LoadOptions) -> Result<(Graph, LoadStats)> {
    let mut builder = GraphBuilder::new(*options);
    let mut lines = 0;
    let mut comments = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        lines += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            comments += 1;
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next = |what: &str| -> Result<i64> {
            let token = tokens.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing {what} vertex"),
            })?;
            token.parse::<i64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{token}` is not an integer vertex label"),
            })
        };
        let a = next("first")?;
        let b = next("second")?;
        builder
            .add_pair(a, b)
            .map_err(|message| Error::Parse { line: lineno, message })?;
    }
    let mut stats = builder.stats();
    stats.lines = lines;
    stats.comments = comments;
    Ok((builder.build(), stats))
}

pub fn load_edge_list(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Graph> {
    load_edge_list_with_stats(path, options).map(|(g, _)| g)
}

pub fn load_edge_list_with_stats(
    path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<(Graph, LoadStats)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(BufReader::new(file), options)
}

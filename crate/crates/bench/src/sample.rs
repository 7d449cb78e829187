//! Seeded subgraph sampling.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use atr_core::{EdgeId, Graph, VertexId};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Vertex,
    Edge,
}

impl fmt::Display for SampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMode::Vertex => "vertex",
            SampleMode::Edge => "edge",
        })
    }
}

impl FromStr for SampleMode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(SampleMode::Vertex),
            "edge" => Ok(SampleMode::Edge),
            _ => bail!("unknown sample mode `{s}`"),
        }
    }
}

/// Vertex mode keeps the subgraph induced by `ceil(ratio * n)` random
/// vertices; edge mode keeps `ceil(ratio * m)` random edges and drops
/// vertices left isolated.
pub fn subgraph_sample(g: &Graph, mode: SampleMode, ratio: f64, seed: u64) -> Result<Graph> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        bail!("sampling ratio must lie in (0, 1], got {ratio}");
    }
    if ratio == 1.0 {
        return Ok(g.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match mode {
        SampleMode::Vertex => {
            let n = g.vertex_count();
            let take = (ratio * n as f64).ceil() as usize;
            let vertices: Vec<VertexId> = sample(&mut rng, n, take.min(n))
                .into_iter()
                .map(|i| VertexId(i as u32))
                .collect();
            g.induced_subgraph(&vertices)
        }
        SampleMode::Edge => {
            let m = g.edge_count();
            let take = (ratio * m as f64).ceil() as usize;
            let mut edges: Vec<EdgeId> = sample(&mut rng, m, take.min(m))
                .into_iter()
                .map(|i| EdgeId(i as u32))
                .collect();
            edges.sort_unstable();
            g.edge_subgraph(&edges)
        }
    })
}

/// Grows a breadth-first ball from a random vertex, one vertex at a time,
/// until the induced subgraph has between `lo` and `hi` edges. A start that
/// overshoots `hi` or runs out of vertices is abandoned for another.
pub fn ball_sample(g: &Graph, lo: usize, hi: usize, seed: u64) -> Option<Graph> {
    const ATTEMPTS: usize = 200;
    let n = g.vertex_count();
    if n == 0 || lo > hi {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = vec![false; n];
    for _ in 0..ATTEMPTS {
        let start = VertexId(rng.gen_range(0..n as u32));
        let mut taken = Vec::new();
        let mut queue = VecDeque::from([start]);
        let mut queued = vec![false; n];
        queued[start.index()] = true;
        let mut edges = 0;
        while let Some(v) = queue.pop_front() {
            edges += g.neighbors(v).iter().filter(|w| inside[w.index()]).count();
            inside[v.index()] = true;
            taken.push(v);
            if edges >= lo {
                break;
            }
            for &w in g.neighbors(v) {
                if !queued[w.index()] {
                    queued[w.index()] = true;
                    queue.push_back(w);
                }
            }
        }
        for &v in &taken {
            inside[v.index()] = false;
        }
        if (lo..=hi).contains(&edges) {
            return Some(g.induced_subgraph(&taken));
        }
    }
    None
}

//! Seeded random graph generators.

use atr_core::Graph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// G(n, p) over vertices `0..n`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &pairs)
}

/// G(n, p) with cliques of the given sizes planted on random vertex sets.
pub fn planted_cliques(n: usize, p: f64, cliques: &[usize], seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    let mut vertices: Vec<u32> = (0..n as u32).collect();
    for &size in cliques {
        vertices.shuffle(&mut rng);
        let members = &vertices[..size.min(n)];
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &pairs)
}

/// Dense blocks of random sizes joined by sparse links, a stand-in for
/// social graphs with many overlapping local communities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommunitySpec {
    pub blocks: usize,
    pub min_block: usize,
    pub max_block: usize,
    pub p_in: f64,
    pub p_out: f64,
}

impl Default for CommunitySpec {
    fn default() -> Self {
        Self {
            blocks: 60,
            min_block: 6,
            max_block: 16,
            p_in: 0.55,
            p_out: 0.004,
        }
    }
}

pub fn community_graph(spec: &CommunitySpec, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block_of = Vec::new();
    for b in 0..spec.blocks {
        let size = rng.gen_range(spec.min_block..=spec.max_block);
        block_of.extend(std::iter::repeat_n(b, size));
    }
    let n = block_of.len();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block_of[u] == block_of[v] { spec.p_in } else { spec.p_out };
            if rng.gen_bool(p) {
                pairs.push((u as u32, v as u32));
            }
        }
    }
    Graph::from_edges(n, &pairs)
}

/// Mixed corpus of small graphs: plain G(n, p) and graphs with planted
/// cliques, each at most `max_edges` edges.
pub fn random_corpus(count: usize, max_edges: usize, seed: u64) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(8..40);
        let p = rng.gen_range(0.08..0.45);
        let s = rng.gen();
        let g = if out.len() % 2 == 0 {
            erdos_renyi(n, p, s)
        } else {
            let k = rng.gen_range(1..4);
            let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(4..8)).collect();
            planted_cliques(n, p * 0.5, &sizes, s)
        };
        if g.edge_count() <= max_edges {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_repeat() {
        let (a, b) = (erdos_renyi(30, 0.2, 5), erdos_renyi(30, 0.2, 5));
        assert_eq!(a.edge_count(), b.edge_count());
        assert!(a.edges().all(|e| a.endpoints(e) == b.endpoints(e)));
        assert_ne!(erdos_renyi(30, 0.2, 6).edge_count(), 0);
        let a = planted_cliques(30, 0.1, &[6], 9);
        let b = planted_cliques(30, 0.1, &[6], 9);
        assert_eq!(a.edge_count(), b.edge_count());
        assert!(a.edges().all(|e| a.endpoints(e) == b.endpoints(e)));
    }

    #[test]
    fn planted_clique_is_present() {
        let g = planted_cliques(20, 0.0, &[5], 1);
        assert_eq!(g.edge_count(), 10);
        assert_eq!(atr_core::truss_decompose(&g).k_max(), 5);
    }

    #[test]
    fn corpus_respects_size() {
        let corpus = random_corpus(30, 300, 3);
        assert_eq!(corpus.len(), 30);
        assert!(corpus.iter().all(|g| g.edge_count() <= 300));
    }

    #[test]
    fn community_blocks() {
        let spec = CommunitySpec {
            blocks: 3,
            min_block: 5,
            max_block: 5,
            p_in: 1.0,
            p_out: 0.0,
        };
        let g = community_graph(&spec, 0);
        assert_eq!(g.vertex_count(), 15);
        assert_eq!(g.edge_count(), 30);
    }
}

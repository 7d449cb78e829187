//! Search for instances where the gain function is not submodular, that is
//! `TG(A) + TG(B) < TG(A | B) + TG(A & B)`.

use atr_core::truss::GainOracle;
use atr_core::{EdgeId, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::synth::planted_cliques;

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    #[serde(skip)]
    pub graph: Graph,
    pub a: Vec<EdgeId>,
    pub b: Vec<EdgeId>,
    pub gain_a: u64,
    pub gain_b: u64,
    pub gain_union: u64,
    pub gain_intersection: u64,
}

impl Witness {
    pub fn holds(&self) -> bool {
        self.gain_a + self.gain_b < self.gain_union + self.gain_intersection
    }
}

/// Pair of single edges `{a}`, `{b}` in `g` violating submodularity with
/// the widest gap, smallest ids on ties.
pub fn find_in(g: &Graph) -> Option<Witness> {
    let mut oracle = GainOracle::new(g);
    let singles: Vec<u64> = g.edges().map(|e| oracle.gain(&[e])).collect();
    let candidates: Vec<EdgeId> = g.edges().filter(|&e| g.support(e) > 0).collect();
    let mut best: Option<(u64, EdgeId, EdgeId, u64)> = None;
    for (i, &a) in candidates.iter().enumerate() {
        for &b in &candidates[i + 1..] {
            let union = oracle.gain(&[a, b]);
            let sum = singles[a.index()] + singles[b.index()];
            if union > sum && best.is_none_or(|(gap, ..)| union - sum > gap) {
                best = Some((union - sum, a, b, union));
            }
        }
    }
    best.map(|(_, a, b, union)| Witness {
        graph: g.clone(),
        a: vec![a],
        b: vec![b],
        gain_a: singles[a.index()],
        gain_b: singles[b.index()],
        gain_union: union,
        gain_intersection: 0,
    })
}

/// Tries small seeded planted-clique graphs until one holds a witness.
pub fn search(seed: u64, attempts: usize) -> Option<Witness> {
    search_with(seed, attempts, |_| true)
}

/// Like [`search`], but only accepts witnesses whose singles gain nothing
/// while the pair gains at least `pair_gain`.
pub fn search_gap(seed: u64, attempts: usize, pair_gain: u64) -> Option<Witness> {
    search_with(seed, attempts, |w| w.gain_a + w.gain_b == 0 && w.gain_union >= pair_gain)
}

fn search_with(seed: u64, attempts: usize, accept: impl Fn(&Witness) -> bool) -> Option<Witness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let n = rng.gen_range(8..16);
        let sizes = [rng.gen_range(4..6), rng.gen_range(4..6)];
        let g = planted_cliques(n, 0.2, &sizes, rng.gen());
        if let Some(w) = find_in(&g).filter(|w| accept(w)) {
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use atr_core::trussness_gain;

    #[test]
    fn search_finds_a_witness() {
        let w = search(0, 500).expect("witness");
        assert!(w.holds());
        let g = &w.graph;
        assert_eq!(trussness_gain(g, &w.a).unwrap(), w.gain_a);
        assert_eq!(trussness_gain(g, &w.b).unwrap(), w.gain_b);
        assert_eq!(trussness_gain(g, &[w.a[0], w.b[0]]).unwrap(), w.gain_union);
    }

    #[test]
    fn gap_of_three() {
        let w = search_gap(0, 5000, 3).expect("witness");
        assert_eq!(w.gain_a + w.gain_b, 0);
        assert!(w.gain_union >= 3);
        assert_eq!(trussness_gain(&w.graph, &[w.a[0], w.b[0]]).unwrap(), w.gain_union);
    }

    #[test]
    fn single_triangle_has_none() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(find_in(&g).is_none());
    }
}

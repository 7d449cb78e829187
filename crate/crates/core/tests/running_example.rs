//! End-to-end checks on a small three-community graph: a dotted chain
//! (9,10), (8,9), (7,8), (5,8) hanging off three near-cliques.

use atr_core::follower::{seed_candidates, FollowerSearch, TraceEvent};
use atr_core::graph::{parse_edge_list, LoadOptions};
use atr_core::select::{select_base, select_exact, select_gas};
use atr_core::tree::TrussComponentTree;
use atr_core::{anchored_truss_decompose, truss_decompose, trussness_gain, EdgeId, Graph};

fn edge_list() -> String {
    let mut pairs = vec![(9, 10), (8, 9), (7, 8), (5, 8)];
    let mut clique = |vs: &[i64], skip: (i64, i64)| {
        for (a, &u) in vs.iter().enumerate() {
            for &v in &vs[a + 1..] {
                if (u, v) != skip {
                    pairs.push((u, v));
                }
            }
        }
    };
    clique(&[1, 2, 5, 7, 9], (5, 9));
    clique(&[6, 8, 10, 11, 12], (6, 10));
    clique(&[3, 4, 5, 6, 13], (0, 0));
    let mut text = String::from("# running example\n");
    for (u, v) in pairs {
        text.push_str(&format!("{u}\t{v}\n"));
    }
    text
}

fn graph() -> Graph {
    parse_edge_list(edge_list().as_bytes(), &LoadOptions::default()).unwrap().0
}

fn e(g: &Graph, a: i64, b: i64) -> EdgeId {
    g.edge_by_labels(a, b).unwrap()
}

#[test]
fn loads_all_edges() {
    let (g, stats) = parse_edge_list(edge_list().as_bytes(), &LoadOptions::default()).unwrap();
    assert_eq!(g.edge_count(), 32);
    assert_eq!(g.vertex_count(), 13);
    assert_eq!(stats.comments, 1);
    let x = e(&g, 9, 10);
    let apexes: Vec<i64> = g.common_neighbors(x).unwrap().iter().map(|&v| g.label(v)).collect();
    assert!(apexes.contains(&8));
}

#[test]
fn hulls_and_layers() {
    let g = graph();
    let lab = truss_decompose(&g);
    let hull3: Vec<EdgeId> = lab.hulls()[&3].clone();
    let mut chain = vec![e(&g, 9, 10), e(&g, 8, 9), e(&g, 7, 8), e(&g, 5, 8)];
    chain.sort();
    assert_eq!(hull3, chain);
    let layers = lab.layers(3);
    assert_eq!(layers[0], vec![e(&g, 9, 10)]);
    assert_eq!(layers[1], vec![e(&g, 8, 9)]);
    assert!(lab.precedes(e(&g, 9, 10), e(&g, 8, 9)));
    assert_eq!(lab.k_max(), 5);
}

#[test]
fn follower_search_walkthrough() {
    let g = graph();
    let lab = truss_decompose(&g);
    let x = e(&g, 9, 10);
    let seeds = seed_candidates(&g, &lab, x).unwrap();
    assert_eq!(seeds[&3], vec![e(&g, 8, 9)]);
    assert_eq!(seeds[&4], vec![e(&g, 8, 10)]);

    let mut search = FollowerSearch::new(g.edge_count());
    search.set_tracing(true);
    let found = search.search(&g, &lab, x).unwrap();
    let mut want = vec![e(&g, 8, 9), e(&g, 7, 8), e(&g, 5, 8)];
    want.sort();
    assert_eq!(found.followers, want);
    assert_eq!(found.len() as u64, trussness_gain(&g, &[x]).unwrap());
    assert_eq!(search.effective_support(&g, &lab, x, e(&g, 8, 9)), 2);
    assert_eq!(search.effective_support(&g, &lab, x, e(&g, 8, 10)), 2);

    let trace = search.take_trace();
    assert!(trace.contains(&TraceEvent::Eliminate {
        edge: e(&g, 8, 10),
        s_plus: 2
    }));
}

#[test]
fn component_tree_neighbors() {
    let g = graph();
    let lab = truss_decompose(&g);
    let tree = TrussComponentTree::build(&g, &lab);
    assert_eq!(tree.roots(), &[0]);
    assert_eq!(tree.sla(e(&g, 9, 10)), &[0, 13]);
    assert_eq!(tree.sla(e(&g, 5, 8)), &[0, 4, 13, 22]);
    assert_eq!(tree.validate(&g, &lab), Ok(()));
}

#[test]
fn selection_agrees() {
    let g = graph();
    let gas = select_gas(&g, 2).unwrap();
    let base = select_base(&g, 2).unwrap();
    assert_eq!(gas.anchors, base.anchors);
    assert_eq!(gas.anchors[0], e(&g, 9, 10));
    assert_eq!(gas.total_gain, trussness_gain(&g, &gas.anchors).unwrap());
    let exact = select_exact(&g, 2, 1_000_000).unwrap();
    assert!(exact.total_gain >= gas.total_gain);
    let state = anchored_truss_decompose(&g, &gas.anchors).unwrap();
    let first = gas.anchors[0];
    assert_eq!(state.trussness(first), None);
    assert_eq!(state.placement(first), Some(state.labeling().trussness(first)));
    assert!(state.placement(first) >= Some(3));
}

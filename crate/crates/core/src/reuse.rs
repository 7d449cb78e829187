//! Cross-round reuse of per-node follower results.
//!
//! After a candidate is evaluated its followers are cached per tree node.
//! Committing an anchor re-decomposes only the subtree that held it, rebuilds
//! that subtree, and decides which cached `(edge, node)` results are still
//! valid (`rn`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::tree::{SlaMode, TreeNode, TrussComponentTree};
use crate::truss::{Decomposer, Peel, TrussLabeling};

/// Which cached node results are dropped after a commit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpiryRule {
    /// The anchor's old node, its neighbor nodes that held its followers,
    /// and the new nodes of those followers.
    Narrow,
    /// Every node whose edges, keys or neighborhood of the anchor changed,
    /// with all same-level neighbor nodes of a candidate dropped together,
    /// and all of a candidate's results dropped when its own key changed.
    #[default]
    Sound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReuseClass {
    #[serde(rename = "FR")]
    Full,
    #[serde(rename = "PR")]
    Partial,
    #[serde(rename = "NR")]
    None,
}

/// `F[e][id]` and `rn(e)` for every edge.
#[derive(Clone, Debug, Default)]
pub struct ReuseLedger {
    cache: Vec<Vec<(u32, Vec<EdgeId>)>>,
    rn: Vec<Vec<u32>>,
    expired: Vec<u32>,
}

impl ReuseLedger {
    pub fn new(m: usize) -> Self {
        Self {
            cache: vec![Vec::new(); m],
            rn: vec![Vec::new(); m],
            expired: Vec::new(),
        }
    }

    pub fn cached(&self, e: EdgeId, id: u32) -> Option<&[EdgeId]> {
        let entries = &self.cache[e.index()];
        entries
            .binary_search_by_key(&id, |(k, _)| *k)
            .ok()
            .map(|i| entries[i].1.as_slice())
    }

    pub fn entries(&self, e: EdgeId) -> &[(u32, Vec<EdgeId>)] {
        &self.cache[e.index()]
    }

    /// Sorted node ids whose cached result for `e` is current.
    pub fn rn(&self, e: EdgeId) -> &[u32] {
        &self.rn[e.index()]
    }

    /// Node ids expired by the latest commit.
    pub fn expired(&self) -> &[u32] {
        &self.expired
    }

    /// Replaces `e`'s cache; every stored node counts as current.
    pub fn store(&mut self, e: EdgeId, mut entries: Vec<(u32, Vec<EdgeId>)>) {
        entries.sort_unstable_by_key(|(id, _)| *id);
        self.rn[e.index()] = entries.iter().map(|(id, _)| *id).collect();
        self.cache[e.index()] = entries;
    }

    pub fn evict(&mut self, e: EdgeId) {
        self.cache[e.index()].clear();
        self.rn[e.index()].clear();
    }

    pub(crate) fn set_rn(&mut self, e: EdgeId, rn: Vec<u32>) {
        self.rn[e.index()] = rn;
    }
}

pub fn classify_reuse(tree: &TrussComponentTree, ledger: &ReuseLedger, e: EdgeId) -> ReuseClass {
    let sla = tree.sla(e);
    let rn = ledger.rn(e);
    if sla.iter().all(|id| rn.binary_search(id).is_ok()) {
        ReuseClass::Full
    } else if sla.iter().all(|id| rn.binary_search(id).is_err()) {
        ReuseClass::None
    } else {
        ReuseClass::Partial
    }
}

/// Outcome of committing one anchor.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CommitReport {
    pub anchor: Option<EdgeId>,
    pub placement: u32,
    pub followers: Vec<EdgeId>,
    pub region_size: usize,
    pub expired: Vec<u32>,
    pub nodes_removed: usize,
    pub nodes_created: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReuseOptions {
    pub rule: ExpiryRule,
    pub sla: SlaMode,
}

/// Brings the labeling, tree and ledger up to date after `x` was flagged as
/// an anchor in `lab`. `x` keeps its pre-anchor trussness in `lab` until this
/// call replaces it with the placement.
pub fn follower_reuse(
    g: &Graph,
    lab: &mut TrussLabeling,
    x: EdgeId,
    tree: &mut TrussComponentTree,
    ledger: &mut ReuseLedger,
    options: ReuseOptions,
) -> Result<CommitReport> {
    if !g.contains_edge(x) {
        return Err(Error::InvalidEdge(x));
    }
    if !lab.is_anchored(x) {
        return Err(Error::NotAnchored(x));
    }
    let mut report = CommitReport {
        anchor: Some(x),
        placement: lab.trussness(x),
        ..CommitReport::default()
    };
    let Some(root) = tree.node_of(x) else {
        // no triangles: nothing moves
        ledger.evict(x);
        ledger.expired.clear();
        return Ok(report);
    };
    let tx_old = lab.trussness(x);
    let region = tree.subtree_edges(root);
    let old_keys: Vec<(u32, u32)> = region.iter().map(|&e| lab.key(e)).collect();
    let old_nodes: Vec<u32> = region.iter().map(|&e| tree.node_of(e).unwrap_or(u32::MAX)).collect();
    let x_neighbors: Vec<EdgeId> = g
        .wedges(x)
        .iter()
        .flat_map(|w| [w.first, w.second])
        .filter(|&n| lab.trussness(n) >= tx_old)
        .collect();
    let x_neighbor_old: Vec<Option<u32>> = x_neighbors.iter().map(|&n| tree.node_of(n)).collect();
    let narrow_sla_x: Vec<u32> = tree
        .sla(x)
        .iter()
        .copied()
        .filter(|&id| ledger.cached(x, id).is_some_and(|f| !f.is_empty()))
        .collect();

    // the region is a whole component at x's level, so peeling it together
    // with every anchor reproduces its labels in the full anchored graph
    let mut member = vec![false; g.edge_count()];
    for &e in &region {
        member[e.index()] = true;
    }
    for a in lab.anchors() {
        member[a.index()] = true;
    }
    let mut peel = Peel::default();
    Decomposer::new(g).run(Some(&member), lab.anchored_slice(), &mut peel);
    let mut key_changed = vec![false; region.len()];
    for (i, &e) in region.iter().enumerate() {
        if e == x {
            let placement = peel.trussness[e.index()].max(tx_old);
            lab.mark_anchored(x, placement);
            report.placement = placement;
            key_changed[i] = true;
        } else if !lab.is_anchored(e) {
            let key = (peel.trussness[e.index()], peel.layer[e.index()]);
            if key.0 > old_keys[i].0 {
                report.followers.push(e);
            }
            if key != old_keys[i] {
                lab.set(e, key.0, key.1);
                key_changed[i] = true;
            }
        }
    }
    lab.refresh_k_max();

    let rebuild = tree.rebuild_subtree(g, lab, root, options.sla);
    report.region_size = rebuild.region.len();
    report.nodes_removed = rebuild.removed.len();
    report.nodes_created = rebuild.created.len();

    let mut expired: Vec<u32> = vec![root];
    match options.rule {
        ExpiryRule::Narrow => {
            expired.extend(narrow_sla_x);
            expired.extend(report.followers.iter().filter_map(|&f| tree.node_of(f)));
        }
        ExpiryRule::Sound => {
            expired.extend(tree.node_of(x));
            for (i, &e) in region.iter().enumerate() {
                if key_changed[i] {
                    expired.push(old_nodes[i]);
                    expired.extend(tree.node_of(e));
                }
            }
            for (n, old) in x_neighbors.iter().zip(&x_neighbor_old) {
                expired.extend(*old);
                expired.extend(tree.node_of(*n));
            }
            for &id in &rebuild.created {
                let node = tree.node(id).expect("created node");
                if !same_content(&rebuild.removed, node) {
                    expired.push(id);
                }
            }
        }
    }
    expired.retain(|&id| id != u32::MAX);
    expired.sort_unstable();
    expired.dedup();

    let mut changed_edge = vec![false; g.edge_count()];
    for (i, &e) in region.iter().enumerate() {
        changed_edge[e.index()] = key_changed[i];
    }
    ledger.evict(x);
    for e in g.edges() {
        if e == x {
            continue;
        }
        let rn = match options.rule {
            ExpiryRule::Narrow => tree
                .sla(e)
                .iter()
                .copied()
                .filter(|id| expired.binary_search(id).is_err() && ledger.cached(e, *id).is_some())
                .collect(),
            ExpiryRule::Sound if changed_edge[e.index()] => Vec::new(),
            ExpiryRule::Sound => {
                let sla = tree.sla(e);
                let reusable = |id: &u32| expired.binary_search(id).is_err() && ledger.cached(e, *id).is_some();
                let level = |id: &u32| tree.node(*id).map_or(0, |n| n.k);
                // nodes on one level interact through triangles with e
                let dead_levels: Vec<u32> = sla.iter().filter(|id| !reusable(id)).map(level).collect();
                sla.iter()
                    .copied()
                    .filter(|id| reusable(id) && !dead_levels.contains(&level(id)))
                    .collect()
            }
        };
        ledger.set_rn(e, rn);
    }
    ledger.expired = expired.clone();
    report.expired = expired;
    Ok(report)
}

fn same_content(removed: &[TreeNode], node: &TreeNode) -> bool {
    removed
        .iter()
        .any(|old| old.id == node.id && old.k == node.k && old.edges == node.edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::follower::tests::{by_label, running_graph};
    use crate::truss::truss_decompose;

    #[test]
    fn classification() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        let lab = truss_decompose(&g);
        let tree = TrussComponentTree::build(&g, &lab);
        let mut ledger = ReuseLedger::new(g.edge_count());
        let e = EdgeId(0);
        assert_eq!(tree.sla(e), &[0]);
        assert_eq!(classify_reuse(&tree, &ledger, e), ReuseClass::None);
        ledger.store(e, vec![(0, vec![])]);
        assert_eq!(classify_reuse(&tree, &ledger, e), ReuseClass::Full);
        // edges outside every triangle are trivially reusable
        let p = Graph::from_edges(2, &[(0, 1)]);
        let ptree = TrussComponentTree::build(&p, &truss_decompose(&p));
        assert_eq!(classify_reuse(&ptree, &ReuseLedger::new(1), EdgeId(0)), ReuseClass::Full);
    }

    #[test]
    fn partial_classification() {
        let g = running_graph();
        let lab = truss_decompose(&g);
        let tree = TrussComponentTree::build(&g, &lab);
        let mut ledger = ReuseLedger::new(g.edge_count());
        let e = by_label(&g, 5, 8);
        ledger.store(e, vec![(4, vec![])]);
        assert_eq!(classify_reuse(&tree, &ledger, e), ReuseClass::Partial);
    }

    #[test]
    fn requires_anchor_flag() {
        let g = running_graph();
        let mut lab = truss_decompose(&g);
        let mut tree = TrussComponentTree::build(&g, &lab);
        let mut ledger = ReuseLedger::new(g.edge_count());
        let x = by_label(&g, 9, 10);
        let err = follower_reuse(&g, &mut lab, x, &mut tree, &mut ledger, ReuseOptions::default());
        assert!(matches!(err, Err(Error::NotAnchored(_))));
    }

    #[test]
    fn running_example_commit() {
        let g = running_graph();
        let mut lab = truss_decompose(&g);
        let mut tree = TrussComponentTree::build(&g, &lab);
        let mut ledger = ReuseLedger::new(g.edge_count());
        let x = by_label(&g, 9, 10);
        let t = lab.trussness(x);
        lab.mark_anchored(x, t);
        let report = follower_reuse(&g, &mut lab, x, &mut tree, &mut ledger, ReuseOptions::default()).unwrap();
        let mut expect = vec![by_label(&g, 8, 9), by_label(&g, 7, 8), by_label(&g, 5, 8)];
        expect.sort();
        assert_eq!(report.followers, expect);
        for f in expect {
            assert_eq!(lab.trussness(f), 4);
        }
        tree.validate(&g, &lab).unwrap();
        let fresh = crate::truss::anchored_truss_decompose(&g, &[x]).unwrap().into_labeling();
        assert_eq!(lab, fresh);
    }
}

//! Truss component tree.
//!
//! A node at level `K` holds the trussness-`K` edges of one triangle-connected
//! component of the `K`-truss; its subtree holds the whole component. Anchors
//! take part in every truss, so they connect components at all levels, and
//! each anchor is stored in the node matching its placement trussness. Edges
//! in no triangle are left out. A node is identified by its smallest edge id.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::graph::{EdgeId, Graph};
use crate::truss::TrussLabeling;

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub id: u32,
    pub k: u32,
    /// Sorted.
    pub edges: Vec<EdgeId>,
    pub parent: Option<u32>,
    /// Sorted.
    pub children: Vec<u32>,
}

/// How neighbor-node indexes are refreshed after a subtree rebuild.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SlaMode {
    /// Only edges of the rebuilt region and their neighbor-edges.
    #[default]
    Localized,
    /// Every edge.
    Full,
}

#[derive(Clone, Debug)]
pub struct TrussComponentTree {
    nodes: Vec<Option<TreeNode>>,
    roots: Vec<u32>,
    edge_node: Vec<u32>,
    sla: Vec<Vec<u32>>,
}

/// Nodes removed and created by a subtree rebuild.
#[derive(Clone, Debug, Default)]
pub struct Rebuild {
    pub region: Vec<EdgeId>,
    pub removed: Vec<TreeNode>,
    pub created: Vec<u32>,
}

#[derive(Serialize)]
struct NodeDump {
    id: u32,
    k: u32,
    size: usize,
    parent: Option<u32>,
}

struct Dsu {
    parent: Vec<u32>,
    touched: Vec<u32>,
}

impl Dsu {
    fn new(m: usize) -> Self {
        Self {
            parent: vec![NONE; m],
            touched: Vec::new(),
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        if self.parent[x as usize] == NONE {
            self.parent[x as usize] = x;
            self.touched.push(x);
            return x;
        }
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller id as root so component order is stable
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else if rb < ra {
            self.parent[ra as usize] = rb;
        }
    }

    fn reset(&mut self) {
        for &t in &self.touched {
            self.parent[t as usize] = NONE;
        }
        self.touched.clear();
    }
}

impl TrussComponentTree {
    pub fn build(g: &Graph, lab: &TrussLabeling) -> Self {
        let m = g.edge_count();
        let mut tree = Self {
            nodes: vec![None; m],
            roots: Vec::new(),
            edge_node: vec![NONE; m],
            sla: vec![Vec::new(); m],
        };
        let members: Vec<EdgeId> = g.edges().filter(|&e| in_tree(g, lab, e)).collect();
        let tops = tree.build_forest(g, lab, members, None);
        tree.roots = tops;
        tree.recompute_sla(g, lab);
        tree
    }

    /// Creates nodes for `members` under `parent`; returns the ids of the
    /// nodes attached directly to `parent`.
    fn build_forest(
        &mut self,
        g: &Graph,
        lab: &TrussLabeling,
        members: Vec<EdgeId>,
        parent: Option<u32>,
    ) -> Vec<u32> {
        let m = g.edge_count();
        let anchors = lab.anchors();
        let mut dsu = Dsu::new(m);
        let mut stamp = vec![0u32; m];
        let mut epoch = 0u32;
        let mut tops = Vec::new();
        let mut stack = vec![(members, parent)];
        let mut first = true;
        while let Some((set, parent)) = stack.pop() {
            epoch += 1;
            for &e in &set {
                stamp[e.index()] = epoch;
            }
            let inside = |f: EdgeId, stamp: &[u32]| stamp[f.index()] == epoch || lab.is_anchored(f);
            for &e in &set {
                for w in g.wedges(e) {
                    if inside(w.first, &stamp) && inside(w.second, &stamp) {
                        dsu.union(e.0, w.first.0);
                        dsu.union(e.0, w.second.0);
                    }
                }
            }
            for &a in &anchors {
                if stamp[a.index()] == epoch {
                    continue;
                }
                for w in g.wedges(a) {
                    if lab.is_anchored(w.first) && lab.is_anchored(w.second) {
                        dsu.union(a.0, w.first.0);
                        dsu.union(a.0, w.second.0);
                    }
                }
            }
            let mut groups: BTreeMap<u32, Vec<EdgeId>> = BTreeMap::new();
            for &e in &set {
                groups.entry(dsu.find(e.0)).or_default().push(e);
            }
            dsu.reset();

            let mut created = Vec::new();
            for (_, mut group) in groups {
                group.sort_unstable();
                let k = group.iter().map(|&e| lab.trussness(e)).min().unwrap_or(2);
                let (edges, rest): (Vec<EdgeId>, Vec<EdgeId>) =
                    group.into_iter().partition(|&e| lab.trussness(e) == k);
                let id = edges[0].0;
                for &e in &edges {
                    self.edge_node[e.index()] = id;
                }
                self.nodes[id as usize] = Some(TreeNode {
                    id,
                    k,
                    edges,
                    parent,
                    children: Vec::new(),
                });
                created.push(id);
                if !rest.is_empty() {
                    stack.push((rest, Some(id)));
                }
            }
            match parent {
                Some(p) if !first => {
                    let node = self.nodes[p as usize].as_mut().expect("parent exists");
                    node.children.extend(&created);
                    node.children.sort_unstable();
                }
                _ => tops.extend(created),
            }
            first = false;
        }
        tops
    }

    /// Replaces the subtree rooted at `root` by a fresh build over the same
    /// edges under the current labeling, attached to the old parent.
    pub fn rebuild_subtree(&mut self, g: &Graph, lab: &TrussLabeling, root: u32, mode: SlaMode) -> Rebuild {
        let parent = self.node(root).and_then(|n| n.parent);
        let mut removed = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if let Some(node) = self.nodes[id as usize].take() {
                stack.extend(&node.children);
                removed.push(node);
            }
        }
        let mut region: Vec<EdgeId> = removed.iter().flat_map(|n| n.edges.iter().copied()).collect();
        region.sort_unstable();
        for &e in &region {
            self.edge_node[e.index()] = NONE;
        }
        match parent {
            Some(p) => {
                let node = self.nodes[p as usize].as_mut().expect("parent exists");
                node.children.retain(|&c| c != root);
            }
            None => self.roots.retain(|&r| r != root),
        }
        let members: Vec<EdgeId> = region.iter().copied().filter(|&e| in_tree(g, lab, e)).collect();
        let tops = self.build_forest(g, lab, members, parent);
        match parent {
            Some(p) => {
                let node = self.nodes[p as usize].as_mut().expect("parent exists");
                node.children.extend(&tops);
                node.children.sort_unstable();
            }
            None => {
                self.roots.extend(&tops);
                self.roots.sort_unstable();
            }
        }
        let mut created = Vec::new();
        let mut stack = tops;
        while let Some(id) = stack.pop() {
            created.push(id);
            stack.extend(&self.nodes[id as usize].as_ref().expect("created").children);
        }
        created.sort_unstable();
        match mode {
            SlaMode::Full => self.recompute_sla(g, lab),
            SlaMode::Localized => {
                let mut touched = region.clone();
                for &e in &region {
                    for w in g.wedges(e) {
                        touched.push(w.first);
                        touched.push(w.second);
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                for e in touched {
                    self.sla[e.index()] = self.compute_sla(g, lab, e);
                }
            }
        }
        Rebuild {
            region,
            removed,
            created,
        }
    }

    fn compute_sla(&self, g: &Graph, lab: &TrussLabeling, e: EdgeId) -> Vec<u32> {
        let te = lab.trussness(e);
        let mut ids: Vec<u32> = g
            .wedges(e)
            .iter()
            .flat_map(|w| [w.first, w.second])
            .filter(|&p| lab.trussness(p) >= te)
            .map(|p| self.edge_node[p.index()])
            .filter(|&id| id != NONE)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn recompute_sla(&mut self, g: &Graph, lab: &TrussLabeling) {
        for e in g.edges() {
            self.sla[e.index()] = self.compute_sla(g, lab, e);
        }
    }

    pub fn node(&self, id: u32) -> Option<&TreeNode> {
        self.nodes.get(id as usize).and_then(Option::as_ref)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().flatten()
    }

    pub fn node_count(&self) -> usize {
        self.nodes().count()
    }

    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// Id of the node holding `e`, if `e` lies in some triangle.
    #[inline]
    pub fn node_of(&self, e: EdgeId) -> Option<u32> {
        let id = self.edge_node[e.index()];
        (id != NONE).then_some(id)
    }

    /// Sorted ids of nodes holding neighbor-edges of `e` at or above its
    /// trussness.
    #[inline]
    pub fn sla(&self, e: EdgeId) -> &[u32] {
        &self.sla[e.index()]
    }

    pub fn subtree_edges(&self, id: u32) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            if let Some(node) = self.node(id) {
                out.extend(&node.edges);
                stack.extend(&node.children);
            }
        }
        out.sort_unstable();
        out
    }

    /// Groups `edges` by node id; edges outside the tree are dropped.
    pub fn partition(&self, edges: &[EdgeId]) -> Vec<(u32, Vec<EdgeId>)> {
        let mut by: BTreeMap<u32, Vec<EdgeId>> = BTreeMap::new();
        for &e in edges {
            if let Some(id) = self.node_of(e) {
                by.entry(id).or_default().push(e);
            }
        }
        by.into_iter()
            .map(|(id, mut v)| {
                v.sort_unstable();
                (id, v)
            })
            .collect()
    }

    /// Writes a JSON array of `{id, k, size, parent}` in id order.
    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        let dump: Vec<NodeDump> = self
            .nodes()
            .map(|n| NodeDump {
                id: n.id,
                k: n.k,
                size: n.edges.len(),
                parent: n.parent,
            })
            .collect();
        serde_json::to_writer_pretty(out, &dump)
    }

    /// Structural checks against `lab`; returns the first violation found.
    pub fn validate(&self, g: &Graph, lab: &TrussLabeling) -> Result<(), String> {
        let mut owner = vec![NONE; g.edge_count()];
        for node in self.nodes() {
            if node.edges.is_empty() || node.edges[0].0 != node.id {
                return Err(format!("node {} is not named by its smallest edge", node.id));
            }
            for &e in &node.edges {
                if lab.trussness(e) != node.k {
                    return Err(format!("edge {e} in node {} has trussness {}", node.id, lab.trussness(e)));
                }
                if owner[e.index()] != NONE {
                    return Err(format!("edge {e} in two nodes"));
                }
                owner[e.index()] = node.id;
            }
            for &c in &node.children {
                let child = self.node(c).ok_or(format!("missing child {c}"))?;
                if child.parent != Some(node.id) || child.k <= node.k {
                    return Err(format!("bad child link {} -> {c}", node.id));
                }
            }
            if let Some(p) = node.parent {
                let parent = self.node(p).ok_or(format!("missing parent {p}"))?;
                if !parent.children.contains(&node.id) {
                    return Err(format!("parent {p} does not list {}", node.id));
                }
            } else if !self.roots.contains(&node.id) {
                return Err(format!("orphan node {}", node.id));
            }
        }
        for e in g.edges() {
            if owner[e.index()] != self.edge_node[e.index()] {
                return Err(format!("edge map disagrees at {e}"));
            }
            if in_tree(g, lab, e) != (owner[e.index()] != NONE) {
                return Err(format!("membership of {e} is wrong"));
            }
            if self.sla[e.index()] != self.compute_sla(g, lab, e) {
                return Err(format!("stale neighbor-node index at {e}"));
            }
        }
        Ok(())
    }
}

fn in_tree(g: &Graph, lab: &TrussLabeling, e: EdgeId) -> bool {
    lab.trussness(e) >= 3 && g.support(e) > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::follower::tests::{arb_graph, by_label, running_graph};
    use crate::follower::FollowerSearch;
    use crate::truss::{anchored_truss_decompose, truss_decompose};
    use proptest::prelude::*;

    #[test]
    fn k4_is_one_node() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let lab = truss_decompose(&g);
        let tree = TrussComponentTree::build(&g, &lab);
        assert_eq!(tree.node_count(), 1);
        let node = tree.node(0).unwrap();
        assert_eq!((node.k, node.edges.len(), node.parent), (4, 6, None));
    }

    #[test]
    fn bowtie_is_one_node() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        let lab = truss_decompose(&g);
        let tree = TrussComponentTree::build(&g, &lab);
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.node(0).unwrap().k, 3);
        assert_eq!(tree.node(0).unwrap().edges.len(), 5);
    }

    #[test]
    fn path_has_no_nodes() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let tree = TrussComponentTree::build(&g, &truss_decompose(&g));
        assert_eq!(tree.node_count(), 0);
        assert!(tree.sla(EdgeId(0)).is_empty());
    }

    #[test]
    fn running_example_tree() {
        let g = running_graph();
        let lab = truss_decompose(&g);
        let tree = TrussComponentTree::build(&g, &lab);
        tree.validate(&g, &lab).unwrap();
        // one level-3 root with the three 4- and 5-truss blocks beneath
        assert_eq!(tree.roots(), &[0]);
        assert_eq!(tree.node(0).unwrap().children, vec![4, 13, 22]);
        assert_eq!(tree.sla(by_label(&g, 9, 10)), &[0, 13]);
        assert_eq!(tree.sla(by_label(&g, 5, 8)), &[0, 4, 13, 22]);
        let mut buf = Vec::new();
        tree.write_json(&mut buf).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 4);
        assert_eq!(parsed[1]["parent"], 0);
    }

    #[test]
    fn running_example_followers_stay_in_neighbor_nodes() {
        let g = running_graph();
        let lab = truss_decompose(&g);
        let tree = TrussComponentTree::build(&g, &lab);
        let x = by_label(&g, 9, 10);
        let found = FollowerSearch::new(g.edge_count()).search(&g, &lab, x).unwrap();
        let parts = tree.partition(&found.followers);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn structure_holds(g in arb_graph()) {
            let lab = truss_decompose(&g);
            let tree = TrussComponentTree::build(&g, &lab);
            prop_assert_eq!(tree.validate(&g, &lab), Ok(()));
            let covered: usize = tree.nodes().map(|n| n.edges.len()).sum();
            prop_assert_eq!(covered, g.edges().filter(|&e| lab.trussness(e) >= 3).count());
            // each subtree is one triangle-connected piece of its truss
            for node in tree.nodes() {
                let sub = tree.subtree_edges(node.id);
                prop_assert!(sub.iter().all(|&e| lab.trussness(e) >= node.k));
                let set: std::collections::HashSet<EdgeId> = sub.iter().copied().collect();
                let mut dsu = Dsu::new(g.edge_count());
                for &e in &sub {
                    dsu.find(e.0);
                    for w in g.wedges(e) {
                        if set.contains(&w.first) && set.contains(&w.second) {
                            dsu.union(e.0, w.first.0);
                        }
                    }
                }
                let root = dsu.find(sub[0].0);
                prop_assert!(sub.iter().all(|&e| dsu.find(e.0) == root));
            }
        }

        #[test]
        fn followers_live_in_neighbor_nodes(g in arb_graph()) {
            let lab = truss_decompose(&g);
            let tree = TrussComponentTree::build(&g, &lab);
            let mut search = FollowerSearch::new(g.edge_count());
            for x in g.edges() {
                let found = search.search(&g, &lab, x).unwrap();
                for f in found.followers {
                    let id = tree.node_of(f);
                    prop_assert!(id.is_some_and(|id| tree.sla(x).contains(&id)));
                }
            }
        }

        #[test]
        fn rebuild_matches_fresh_build(g in arb_graph(), pick in any::<prop::sample::Index>()) {
            prop_assume!(g.edge_count() > 0);
            let x = EdgeId(pick.index(g.edge_count()) as u32);
            let lab = truss_decompose(&g);
            let mut tree = TrussComponentTree::build(&g, &lab);
            let Some(root) = tree.node_of(x) else { return Ok(()); };
            let after = anchored_truss_decompose(&g, &[x]).unwrap().into_labeling();
            let mut full = tree.clone();
            tree.rebuild_subtree(&g, &after, root, SlaMode::Localized);
            full.rebuild_subtree(&g, &after, root, SlaMode::Full);
            let fresh = TrussComponentTree::build(&g, &after);
            prop_assert_eq!(tree.validate(&g, &after), Ok(()));
            for e in g.edges() {
                prop_assert_eq!(tree.sla(e), full.sla(e));
                prop_assert_eq!(tree.sla(e), fresh.sla(e));
                prop_assert_eq!(tree.node_of(e), fresh.node_of(e));
            }
            let mine: Vec<_> = tree.nodes().cloned().collect();
            let theirs: Vec<_> = fresh.nodes().cloned().collect();
            prop_assert_eq!(mine, theirs);
        }
    }
}

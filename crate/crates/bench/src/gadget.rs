//! Hardness gadget: a graph whose anchoring problem encodes maximum coverage.
//!
//! A hub vertex `h` carries every set edge `a_i = (h, x_i)` and every
//! element edge `f_j = (h, y_j)`. For each membership `j in T_i` a fresh
//! `(t+3)`-clique containing `x_i` and `y_j` closes the triangle
//! `{a_i, f_j, (x_i, y_j)}`. Each `f_j` also gets `t` triangles
//! `{f_j, (h, z), (y_j, z)}` whose two other edges sit in two further
//! `(t+3)`-cliques, one through `h` and one through `y_j`.

use std::io::BufRead;
use std::path::Path;

use anyhow::{bail, Context, Result};
use atr_core::{EdgeId, Graph};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub s: usize,
    pub t: usize,
    /// Element indices `0..t` of each set.
    pub membership: Vec<Vec<usize>>,
}

impl GadgetSpec {
    /// Reads one set per line, elements as 1-based indices separated by
    /// whitespace or commas. Blank lines and `#` comments are skipped.
    pub fn from_reader<R: BufRead>(reader: R, s: usize, t: usize) -> Result<Self> {
        let mut membership = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let set = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|tok| !tok.is_empty())
                .map(|tok| match tok.parse::<usize>() {
                    Ok(j) if j >= 1 => Ok(j - 1),
                    _ => bail!("line {}: bad element index `{tok}`", n + 1),
                })
                .collect::<Result<Vec<_>>>()?;
            membership.push(set);
        }
        let spec = Self { s, t, membership };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>, s: usize, t: usize) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Self::from_reader(std::io::BufReader::new(file), s, t)
    }

    /// Three sets over four elements, each covering two neighbours.
    pub fn example() -> Self {
        Self {
            s: 3,
            t: 4,
            membership: vec![vec![0, 1], vec![1, 2], vec![2, 3]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.membership.len() != self.s {
            bail!("expected {} sets, found {}", self.s, self.membership.len());
        }
        if self.t == 0 {
            bail!("the element count must be positive");
        }
        let mut covered = vec![false; self.t];
        for (i, set) in self.membership.iter().enumerate() {
            if set.is_empty() {
                bail!("set {} is empty", i + 1);
            }
            for &j in set {
                if j >= self.t {
                    bail!("set {} names element {} but t = {}", i + 1, j + 1, self.t);
                }
                covered[j] = true;
            }
        }
        if let Some(j) = covered.iter().position(|c| !c) {
            bail!("element {} is in no set", j + 1);
        }
        Ok(())
    }

    fn sets(&self) -> Vec<Vec<usize>> {
        self.membership
            .iter()
            .map(|set| {
                let mut set = set.clone();
                set.sort_unstable();
                set.dedup();
                set
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Gadget {
    pub graph: Graph,
    pub spec: GadgetSpec,
    /// `a_i`, with ids `0..s`.
    pub set_edges: Vec<EdgeId>,
    /// `f_j`, with ids `s..s+t`.
    pub element_edges: Vec<EdgeId>,
}

#[derive(Serialize)]
struct Annotations<'a> {
    s: usize,
    t: usize,
    membership: &'a [Vec<usize>],
    set_edges: Vec<u32>,
    element_edges: Vec<u32>,
}

impl Gadget {
    pub fn write_annotations<W: std::io::Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(
            out,
            &Annotations {
                s: self.spec.s,
                t: self.spec.t,
                membership: &self.spec.membership,
                set_edges: self.set_edges.iter().map(|e| e.0).collect(),
                element_edges: self.element_edges.iter().map(|e| e.0).collect(),
            },
        )
    }

    /// Elements covered by the given set indices.
    pub fn coverage(&self, sets: &[usize]) -> usize {
        let mut hit = vec![false; self.spec.t];
        for &i in sets {
            for &j in &self.spec.membership[i] {
                hit[j] = true;
            }
        }
        hit.into_iter().filter(|&h| h).count()
    }
}

struct Builder {
    next: i64,
    pairs: Vec<(i64, i64)>,
}

impl Builder {
    fn vertex(&mut self) -> i64 {
        self.next += 1;
        self.next - 1
    }

    /// Clique on `fixed` plus fresh vertices, `size` in total.
    fn clique(&mut self, fixed: &[i64], size: usize) {
        let mut members = fixed.to_vec();
        while members.len() < size {
            let v = self.vertex();
            members.push(v);
        }
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                self.pairs.push((u, v));
            }
        }
    }
}

pub fn generate_gadget(spec: &GadgetSpec) -> Result<Gadget> {
    spec.validate()?;
    let (s, t) = (spec.s, spec.t);
    let size = t + 3;
    let mut b = Builder {
        next: 0,
        pairs: Vec::new(),
    };
    let hub = b.vertex();
    let xs: Vec<i64> = (0..s).map(|_| b.vertex()).collect();
    let ys: Vec<i64> = (0..t).map(|_| b.vertex()).collect();
    b.pairs.extend(xs.iter().map(|&x| (hub, x)));
    b.pairs.extend(ys.iter().map(|&y| (hub, y)));
    for (i, set) in spec.sets().iter().enumerate() {
        for &j in set {
            b.clique(&[xs[i], ys[j]], size);
        }
    }
    for &y in &ys {
        for _ in 0..t {
            let z = b.vertex();
            b.clique(&[hub, z], size);
            b.clique(&[y, z], size);
        }
    }
    let graph = Graph::from_pairs(b.pairs);
    Ok(Gadget {
        graph,
        spec: GadgetSpec {
            s,
            t,
            membership: spec.sets(),
        },
        set_edges: (0..s as u32).map(EdgeId).collect(),
        element_edges: (s as u32..(s + t) as u32).map(EdgeId).collect(),
    })
}

/// Every set system with `s` nonempty sets over `t` elements that covers
/// all elements, sets listed in non-decreasing bitmask order so that
/// reorderings of the same sets appear once.
pub fn all_specs(s: usize, t: usize) -> Vec<GadgetSpec> {
    fn rec(s: usize, t: usize, from: u32, acc: &mut Vec<u32>, out: &mut Vec<GadgetSpec>) {
        if acc.len() == s {
            let union = acc.iter().fold(0, |a, m| a | m);
            if union == (1 << t) - 1 {
                let membership = acc
                    .iter()
                    .map(|m| (0..t).filter(|j| m >> j & 1 == 1).collect())
                    .collect();
                out.push(GadgetSpec { s, t, membership });
            }
            return;
        }
        for mask in from..1 << t {
            acc.push(mask);
            rec(s, t, mask, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(s, t, 1, &mut Vec::new(), &mut out);
    out
}

/// Greedy maximum coverage with smallest-index tie-break.
pub fn greedy_cover(spec: &GadgetSpec, budget: usize) -> Vec<usize> {
    let mut hit = vec![false; spec.t];
    let mut chosen = Vec::new();
    for _ in 0..budget.min(spec.s) {
        let best = (0..spec.s)
            .filter(|i| !chosen.contains(i))
            .map(|i| (spec.membership[i].iter().filter(|&&j| !hit[j]).count(), i))
            .max_by_key(|&(gain, i)| (gain, std::cmp::Reverse(i)));
        let Some((_, i)) = best else { break };
        for &j in &spec.membership[i] {
            hit[j] = true;
        }
        chosen.push(i);
    }
    chosen
}

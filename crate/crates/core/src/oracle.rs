//! Exhaustive reference solver for minimum-weight vertex cover.
//!
//! Used as the test oracle and as the terminal solve for small components.
//! The search branches on a maximum-degree vertex `v` (either `v` is in the
//! cover or all of `N(v)` is), which partitions the set of covers, and prunes
//! only strictly worse partial solutions so ties are resolved exactly: among
//! all minimum-weight covers the one with the lexicographically smallest
//! sorted id sequence is returned.

use std::cmp::Ordering;

use num_traits::Zero;
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::weight::{Rational, WeightMap};

pub const DEFAULT_MAX_N: usize = 26;
pub const SMALL_COMPONENT_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {n} alive vertices, oracle limit is {max_n}")]
    TooLarge { n: usize, max_n: usize },
    #[error("component has {size} vertices, limit is {SMALL_COMPONENT_LIMIT}")]
    ComponentTooLarge { size: usize },
    #[error("vertex set is not a connected component of the graph")]
    NotAComponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimit {
    pub max_n: usize,
}

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit {
            max_n: DEFAULT_MAX_N,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCover {
    pub cover: Vec<VertexId>,
    pub weight: Rational,
}

pub fn exact_min_weight_vc(g: &Graph, w: &WeightMap) -> Result<OracleCover, OracleError> {
    exact_min_weight_vc_with(g, w, OracleLimit::default())
}

pub fn exact_min_weight_vc_with(
    g: &Graph,
    w: &WeightMap,
    limit: OracleLimit,
) -> Result<OracleCover, OracleError> {
    if g.n_alive() > limit.max_n {
        return Err(OracleError::TooLarge {
            n: g.n_alive(),
            max_n: limit.max_n,
        });
    }
    let verts: Vec<VertexId> = g.vertices().collect();
    Ok(search_subset(g, w, &verts))
}

/// Minimum-weight cover of `G[C]` for a connected component `C` with at most
/// ten vertices.
pub fn solve_small_component(
    g: &Graph,
    comp: &[VertexId],
    w: &WeightMap,
) -> Result<OracleCover, OracleError> {
    if comp.len() > SMALL_COMPONENT_LIMIT {
        return Err(OracleError::ComponentTooLarge { size: comp.len() });
    }
    if !is_component(g, comp) {
        return Err(OracleError::NotAComponent);
    }
    let mut sorted = comp.to_vec();
    sorted.sort_unstable();
    Ok(search_subset(g, w, &sorted))
}

fn is_component(g: &Graph, comp: &[VertexId]) -> bool {
    if comp.is_empty() || comp.iter().any(|&v| !g.is_alive(v)) {
        return false;
    }
    let mut local = vec![false; g.n_total()];
    for &v in comp {
        local[v.index()] = true;
    }
    // Closed under adjacency and connected.
    if comp
        .iter()
        .any(|&v| g.neighbors(v).iter().any(|u| !local[u.index()]))
    {
        return false;
    }
    let mut seen = vec![false; g.n_total()];
    let mut stack = vec![comp[0]];
    seen[comp[0].index()] = true;
    let mut count = 0;
    while let Some(v) = stack.pop() {
        count += 1;
        for &u in g.neighbors(v) {
            if !seen[u.index()] {
                seen[u.index()] = true;
                stack.push(u);
            }
        }
    }
    count == comp.len()
}

/// Bitset copy of the subgraph induced by the searched vertices.
struct Search {
    adj: Vec<u64>,
    weight: Vec<Rational>,
    best: Option<(Rational, Vec<usize>)>,
    chosen: Vec<usize>,
}

fn search_subset(g: &Graph, w: &WeightMap, verts: &[VertexId]) -> OracleCover {
    assert!(verts.len() <= 64, "oracle search is limited to 64 vertices");
    let mut local = vec![usize::MAX; g.n_total()];
    for (i, &v) in verts.iter().enumerate() {
        local[v.index()] = i;
    }
    let mut adj = vec![0u64; verts.len()];
    for (i, &v) in verts.iter().enumerate() {
        for &u in g.neighbors(v) {
            let j = local[u.index()];
            if j != usize::MAX {
                adj[i] |= 1 << j;
            }
        }
    }
    let mut s = Search {
        adj,
        weight: verts.iter().map(|&v| w[v]).collect(),
        best: None,
        chosen: Vec::new(),
    };
    let all = if verts.len() == 64 {
        u64::MAX
    } else {
        (1u64 << verts.len()) - 1
    };
    s.recurse(all, Rational::zero());
    let (weight, idx) = s.best.expect("search always records a cover");
    OracleCover {
        cover: idx.into_iter().map(|i| verts[i]).collect(),
        weight,
    }
}

fn lex_cmp(a: &[usize], b: &[usize]) -> Ordering {
    a.cmp(b)
}

impl Search {
    /// Lower bound on the weight still needed: a greedy matching, each edge
    /// charged its lighter endpoint.
    fn lower_bound(&self, remaining: u64) -> Rational {
        let mut free = remaining;
        let mut lb = Rational::zero();
        let mut rest = remaining;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if free & (1 << i) == 0 {
                continue;
            }
            let nb = self.adj[i] & free & !(1u64 << i);
            if nb != 0 {
                let j = nb.trailing_zeros() as usize;
                free &= !(1u64 << i) & !(1u64 << j);
                lb += self.weight[i].min(self.weight[j]);
            }
        }
        lb
    }

    fn recurse(&mut self, remaining: u64, acc: Rational) {
        if let Some((best, _)) = &self.best {
            if acc + self.lower_bound(remaining) > *best {
                return;
            }
        }
        // Pick a vertex of maximum remaining degree (lowest index on ties).
        let mut pick: Option<(usize, u32)> = None;
        let mut rest = remaining;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (self.adj[i] & remaining).count_ones();
            if d > 0 && pick.is_none_or(|(_, bd)| d > bd) {
                pick = Some((i, d));
            }
        }
        let Some((v, _)) = pick else {
            self.finish(remaining, acc);
            return;
        };
        // v in the cover
        self.chosen.push(v);
        self.recurse(remaining & !(1u64 << v), acc + self.weight[v]);
        self.chosen.pop();
        // v out: all remaining neighbors in
        let nb = self.adj[v] & remaining;
        let mut add = acc;
        let before = self.chosen.len();
        let mut bits = nb;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            self.chosen.push(j);
            add += self.weight[j];
        }
        self.recurse(remaining & !nb & !(1u64 << v), add);
        self.chosen.truncate(before);
    }

    /// No edges left. Positive-weight leftovers stay out; zero-weight leftovers
    /// below the largest chosen index shorten the sorted sequence's prefix and
    /// are included to honor the lexicographic tie-break.
    fn finish(&mut self, remaining: u64, acc: Rational) {
        let mut cover = self.chosen.clone();
        cover.sort_unstable();
        if let Some(&top) = cover.last() {
            let mut rest = remaining;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if j < top && self.weight[j].is_zero() {
                    cover.push(j);
                }
            }
            cover.sort_unstable();
        }
        let better = match &self.best {
            None => true,
            Some((bw, bc)) => acc < *bw || (acc == *bw && lex_cmp(&cover, bc) == Ordering::Less),
        };
        if better {
            self.best = Some((acc, cover));
        }
    }
}

//! Mutable undirected graph with an undo journal.
//!
//! Vertex ids are dense indices that stay stable for the lifetime of a
//! [`Graph`]: deleting a vertex only marks it dead, and ids handed out by
//! [`Graph::add_vertex`] are never reused. Every mutation pushes one journal
//! frame; [`Graph::restore`] pops frames strictly in LIFO order.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i as u32)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex id {id} out of range (n = {n})")]
    IdOutOfRange { id: usize, n: usize },
    #[error("vertex {0} is not alive")]
    VertexNotAlive(VertexId),
    #[error("restore out of order: token {got} but top of journal is {expected:?}")]
    OutOfOrderRestore { got: usize, expected: Option<usize> },
}

/// Handle to one journal frame. Only the most recent outstanding token may be
/// restored.
#[derive(Debug, PartialEq, Eq)]
#[must_use = "a mutation token must be restored to undo the change"]
pub struct MutationToken(usize);

impl MutationToken {
    pub fn frame(&self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Deleted { v: VertexId, nbrs: Vec<VertexId> },
    Added { v: VertexId },
}

/// Result of a two-coloring attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bipartition {
    /// `side[v]` is `Some(false)` / `Some(true)` for alive vertices, `None` for dead ones.
    Coloring(Vec<Option<bool>>),
    /// Vertices of an odd cycle, in cycle order.
    OddCycle(Vec<VertexId>),
}

#[derive(Debug, Clone)]
pub struct Graph {
    alive: Vec<bool>,
    adj: Vec<Vec<VertexId>>,
    n_alive: usize,
    n_edges: usize,
    journal: Vec<Vec<Op>>,
}

impl PartialEq for Graph {
    /// Structural equality: same id space, alive set and adjacency. The
    /// journal is not compared.
    fn eq(&self, other: &Self) -> bool {
        self.alive == other.alive && self.adj == other.adj
    }
}

impl Eq for Graph {}

fn insert_sorted(list: &mut Vec<VertexId>, v: VertexId) {
    match list.binary_search(&v) {
        Ok(_) => {}
        Err(pos) => list.insert(pos, v),
    }
}

fn remove_sorted(list: &mut Vec<VertexId>, v: VertexId) {
    if let Ok(pos) = list.binary_search(&v) {
        list.remove(pos);
    }
}

impl Graph {
    /// Graph on `n` isolated vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            alive: vec![true; n],
            adj: vec![Vec::new(); n],
            n_alive: n,
            n_edges: 0,
            journal: Vec::new(),
        }
    }

    /// Builds a graph from an edge list. Pairs are normalized, so `(1, 0)`
    /// and `(0, 1)` denote the same edge and count as a duplicate.
    pub fn build(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(a, b) in edges {
            for id in [a, b] {
                if id >= n {
                    return Err(GraphError::IdOutOfRange { id, n });
                }
            }
            let (a, b) = (VertexId::from(a), VertexId::from(b));
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if g.has_edge(a, b) {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                return Err(GraphError::DuplicateEdge(lo, hi));
            }
            insert_sorted(&mut g.adj[a.index()], b);
            insert_sorted(&mut g.adj[b.index()], a);
            g.n_edges += 1;
        }
        Ok(g)
    }

    /// Number of ids ever created (alive or not).
    pub fn n_total(&self) -> usize {
        self.alive.len()
    }

    pub fn n_alive(&self) -> usize {
        self.n_alive
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn is_empty(&self) -> bool {
        self.n_alive == 0
    }

    #[inline]
    pub fn is_alive(&self, v: VertexId) -> bool {
        self.alive.get(v.index()).copied().unwrap_or(false)
    }

    /// Alive vertices in increasing id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| VertexId::from(i))
    }

    /// Sorted neighbor list. Empty for dead vertices.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v.index()]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v.index()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.adj[a.index()].binary_search(&b).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.n_edges);
        for u in self.vertices() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Number of outstanding journal frames.
    pub fn journal_depth(&self) -> usize {
        self.journal.len()
    }

    /// Removes every vertex of `set` together with its incident edges.
    pub fn delete_vertices(&mut self, set: &[VertexId]) -> Result<MutationToken, GraphError> {
        for (i, &v) in set.iter().enumerate() {
            if !self.is_alive(v) || set[..i].contains(&v) {
                return Err(GraphError::VertexNotAlive(v));
            }
        }
        let mut ops = Vec::with_capacity(set.len());
        for &v in set {
            let nbrs = std::mem::take(&mut self.adj[v.index()]);
            for &u in &nbrs {
                remove_sorted(&mut self.adj[u.index()], v);
            }
            self.n_edges -= nbrs.len();
            self.alive[v.index()] = false;
            self.n_alive -= 1;
            ops.push(Op::Deleted { v, nbrs });
        }
        self.journal.push(ops);
        Ok(MutationToken(self.journal.len() - 1))
    }

    /// Creates a fresh vertex adjacent to `nbrs` (all alive, distinct).
    pub fn add_vertex(
        &mut self,
        nbrs: &[VertexId],
    ) -> Result<(VertexId, MutationToken), GraphError> {
        for (i, &u) in nbrs.iter().enumerate() {
            if !self.is_alive(u) || nbrs[..i].contains(&u) {
                return Err(GraphError::VertexNotAlive(u));
            }
        }
        let v = VertexId::from(self.alive.len());
        let mut list = nbrs.to_vec();
        list.sort_unstable();
        for &u in &list {
            insert_sorted(&mut self.adj[u.index()], v);
        }
        self.n_edges += list.len();
        self.alive.push(true);
        self.adj.push(list);
        self.n_alive += 1;
        self.journal.push(vec![Op::Added { v }]);
        Ok((v, MutationToken(self.journal.len() - 1)))
    }

    /// Undoes the mutation identified by `token`, which must be the most
    /// recent outstanding one.
    pub fn restore(&mut self, token: MutationToken) -> Result<(), GraphError> {
        let top = self.journal.len().checked_sub(1);
        if top != Some(token.0) {
            return Err(GraphError::OutOfOrderRestore {
                got: token.0,
                expected: top,
            });
        }
        let ops = self.journal.pop().expect("checked above");
        for op in ops.into_iter().rev() {
            match op {
                Op::Deleted { v, nbrs } => {
                    for &u in &nbrs {
                        insert_sorted(&mut self.adj[u.index()], v);
                    }
                    self.n_edges += nbrs.len();
                    self.adj[v.index()] = nbrs;
                    self.alive[v.index()] = true;
                    self.n_alive += 1;
                }
                Op::Added { v } => {
                    let nbrs = std::mem::take(&mut self.adj[v.index()]);
                    for &u in &nbrs {
                        remove_sorted(&mut self.adj[u.index()], v);
                    }
                    self.n_edges -= nbrs.len();
                    self.alive.pop();
                    self.adj.pop();
                    self.n_alive -= 1;
                }
            }
        }
        Ok(())
    }

    /// Connected components of the alive graph. Each component is sorted and
    /// the list is ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.n_total()];
        let mut comps = Vec::new();
        let mut queue = VecDeque::new();
        for s in self.vertices() {
            if seen[s.index()] {
                continue;
            }
            seen[s.index()] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &u in self.neighbors(v) {
                    if !seen[u.index()] {
                        seen[u.index()] = true;
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Two-colors the alive graph by BFS, or returns an odd cycle.
    pub fn bipartition(&self) -> Bipartition {
        let n = self.n_total();
        let mut side: Vec<Option<bool>> = vec![None; n];
        let mut parent: Vec<Option<VertexId>> = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut queue = VecDeque::new();
        for s in self.vertices() {
            if side[s.index()].is_some() {
                continue;
            }
            side[s.index()] = Some(false);
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                let sv = side[v.index()].unwrap();
                for &u in self.neighbors(v) {
                    match side[u.index()] {
                        None => {
                            side[u.index()] = Some(!sv);
                            parent[u.index()] = Some(v);
                            depth[u.index()] = depth[v.index()] + 1;
                            queue.push_back(u);
                        }
                        Some(su) if su == sv => {
                            return Bipartition::OddCycle(odd_cycle(&parent, &depth, v, u));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Bipartition::Coloring(side)
    }

    pub fn is_bipartite(&self) -> bool {
        matches!(self.bipartition(), Bipartition::Coloring(_))
    }
}

/// Closes the BFS-tree paths from `a` and `b` (same color, adjacent) at their
/// lowest common ancestor.
fn odd_cycle(
    parent: &[Option<VertexId>],
    depth: &[usize],
    a: VertexId,
    b: VertexId,
) -> Vec<VertexId> {
    let (mut x, mut y) = (a, b);
    let mut left = vec![x];
    let mut right = vec![y];
    while depth[x.index()] > depth[y.index()] {
        x = parent[x.index()].unwrap();
        left.push(x);
    }
    while depth[y.index()] > depth[x.index()] {
        y = parent[y.index()].unwrap();
        right.push(y);
    }
    while x != y {
        x = parent[x.index()].unwrap();
        y = parent[y.index()].unwrap();
        left.push(x);
        right.push(y);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

//! Top-level preparation: a minimum-size vertex cover `U*` and the mapping
//! `f` from triangle components of `G[U]` to pair components.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cover::{partition_cover, CoverPartition, Slot, VertexSet};
use crate::graph::{Graph, MutationToken, VertexId};

// ---------------------------------------------------------------------------
// Minimum-size vertex cover
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Step {
    Take(Vec<VertexId>),
    /// `v` had the two non-adjacent neighbors `a`, `b`; they were merged into `x`.
    Fold {
        x: VertexId,
        v: VertexId,
        a: VertexId,
        b: VertexId,
    },
}

struct MinVc {
    g: Graph,
    steps: Vec<Step>,
    taken: usize,
    best: Option<Vec<VertexId>>,
    best_size: usize,
}

/// A vertex cover of minimum cardinality.
///
/// Branch and reduce: isolated vertices are dropped, a degree-1 vertex forces
/// its neighbor, a degree-2 vertex in a triangle forces its two neighbors, a
/// degree-2 vertex with non-adjacent neighbors is folded, and otherwise the
/// search branches on a maximum-degree vertex.
pub fn min_size_vc(g: &Graph) -> Vec<VertexId> {
    let mut s = MinVc {
        g: g.clone(),
        steps: Vec::new(),
        taken: 0,
        best: None,
        best_size: usize::MAX,
    };
    s.search();
    let mut cover = s.best.expect("search always finds a cover");
    cover.sort_unstable();
    cover
}

impl MinVc {
    fn take(&mut self, set: Vec<VertexId>, also_delete: &[VertexId]) -> MutationToken {
        let mut del = set.clone();
        del.extend_from_slice(also_delete);
        del.sort_unstable();
        del.dedup();
        self.taken += set.len();
        self.steps.push(Step::Take(set));
        self.g.delete_vertices(&del).expect("alive")
    }

    fn untake(&mut self, tok: MutationToken) {
        self.g.restore(tok).expect("lifo");
        if let Some(Step::Take(set)) = self.steps.pop() {
            self.taken -= set.len();
        }
    }

    fn lower_bound(&self) -> usize {
        // greedy maximal matching
        let mut matched = vec![false; self.g.n_total()];
        let mut size = 0;
        for v in self.g.vertices() {
            if matched[v.index()] {
                continue;
            }
            if let Some(&u) = self.g.neighbors(v).iter().find(|u| !matched[u.index()]) {
                matched[v.index()] = true;
                matched[u.index()] = true;
                size += 1;
            }
        }
        size
    }

    /// Applies one reduction if possible, returning the undo tokens pushed.
    fn reduce_once(&mut self) -> Option<Vec<MutationToken>> {
        let pick = self.g.vertices().find(|&v| self.g.degree(v) <= 2)?;
        let nb = self.g.neighbors(pick).to_vec();
        match nb.len() {
            0 => {
                let t = self.g.delete_vertices(&[pick]).expect("alive");
                self.steps.push(Step::Take(Vec::new()));
                Some(vec![t])
            }
            1 => Some(vec![self.take(vec![nb[0]], &[pick])]),
            _ => {
                let (a, b) = (nb[0], nb[1]);
                if self.g.has_edge(a, b) {
                    return Some(vec![self.take(vec![a, b], &[pick])]);
                }
                let mut merged: Vec<VertexId> = self
                    .g
                    .neighbors(a)
                    .iter()
                    .chain(self.g.neighbors(b))
                    .copied()
                    .filter(|&y| y != pick)
                    .collect();
                merged.sort_unstable();
                merged.dedup();
                let t1 = self.g.delete_vertices(&[pick, a, b]).expect("alive");
                let (x, t2) = self.g.add_vertex(&merged).expect("alive");
                self.taken += 1;
                self.steps.push(Step::Fold { x, v: pick, a, b });
                Some(vec![t1, t2])
            }
        }
    }

    fn undo_reduction(&mut self, tokens: Vec<MutationToken>) {
        for t in tokens.into_iter().rev() {
            self.g.restore(t).expect("lifo");
        }
        match self.steps.pop() {
            Some(Step::Take(set)) => self.taken -= set.len(),
            Some(Step::Fold { .. }) => self.taken -= 1,
            None => unreachable!(),
        }
    }

    fn search(&mut self) {
        let mut undo = Vec::new();
        while let Some(t) = self.reduce_once() {
            undo.push(t);
        }
        if self.taken + self.lower_bound() < self.best_size {
            if self.g.n_edges() == 0 {
                self.record();
            } else {
                let v = self
                    .g
                    .vertices()
                    .max_by(|&a, &b| self.g.degree(a).cmp(&self.g.degree(b)).then(b.cmp(&a)))
                    .expect("edges exist");
                let t = self.take(vec![v], &[]);
                self.search();
                self.untake(t);
                let nb = self.g.neighbors(v).to_vec();
                let t = self.take(nb, &[v]);
                self.search();
                self.untake(t);
            }
        }
        for t in undo.into_iter().rev() {
            self.undo_reduction(t);
        }
    }

    fn record(&mut self) {
        let mut chosen = VertexSet::new(self.g.n_total());
        for step in &self.steps {
            if let Step::Take(set) = step {
                for &v in set {
                    chosen.insert(v);
                }
            }
        }
        for step in self.steps.iter().rev() {
            if let Step::Fold { x, v, a, b } = *step {
                if chosen.remove(x) {
                    chosen.insert(a);
                    chosen.insert(b);
                } else {
                    chosen.insert(v);
                }
            }
        }
        let cover: Vec<VertexId> = chosen.iter().collect();
        debug_assert_eq!(cover.len(), self.taken);
        self.best_size = cover.len();
        self.best = Some(cover);
    }
}

// ---------------------------------------------------------------------------
// The mapping f
// ---------------------------------------------------------------------------

/// Image of one triangle: a pair component and an outside vertex adjacent to a
/// triangle vertex and to both pair vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FEntry {
    pub pair: [VertexId; 2],
    pub witness: VertexId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FMapping {
    pub entries: BTreeMap<[VertexId; 3], FEntry>,
}

impl FMapping {
    pub fn get(&self, tri: &[VertexId; 3]) -> Option<&FEntry> {
        self.entries.get(tri)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FStatus {
    Satisfied,
    Unsatisfied(Vec<[VertexId; 3]>),
}

impl FStatus {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, FStatus::Satisfied)
    }
}

/// Witness search for every triangle of `CCS3(G, U)`: lowest-id witness
/// first, then the lowest pair it sees.
pub fn compute_f_from(g: &Graph, part: &CoverPartition) -> (FMapping, FStatus) {
    let mut map = FMapping::default();
    let mut missing = Vec::new();
    for tri in &part.ccs3 {
        match find_witness(g, part, tri) {
            Some(entry) => {
                map.entries.insert(*tri, entry);
            }
            None => missing.push(*tri),
        }
    }
    let status = if missing.is_empty() {
        FStatus::Satisfied
    } else {
        FStatus::Unsatisfied(missing)
    };
    (map, status)
}

pub fn compute_f(g: &Graph, u: &VertexSet) -> (FMapping, FStatus) {
    let part = partition_cover(g, u).expect("U must be a vertex cover");
    compute_f_from(g, &part)
}

fn find_witness(g: &Graph, part: &CoverPartition, tri: &[VertexId; 3]) -> Option<FEntry> {
    let mut cands: Vec<VertexId> = tri
        .iter()
        .flat_map(|&c| g.neighbors(c).iter().copied())
        .filter(|&x| matches!(part.slot(x), Slot::Outside))
        .collect();
    cands.sort_unstable();
    cands.dedup();
    for x in cands {
        for &p in g.neighbors(x) {
            if let Slot::Pair { partner, .. } = part.slot(p) {
                if p < partner && g.has_edge(x, partner) {
                    return Some(FEntry {
                        pair: [p, partner],
                        witness: x,
                    });
                }
            }
        }
    }
    None
}

/// Checks one entry against the current state.
pub fn entry_is_valid(g: &Graph, part: &CoverPartition, tri: &[VertexId; 3], e: &FEntry) -> bool {
    let [p, p2] = e.pair;
    g.is_alive(e.witness)
        && matches!(part.slot(e.witness), Slot::Outside)
        && part.partner(p) == Some(p2)
        && g.has_edge(e.witness, p)
        && g.has_edge(e.witness, p2)
        && tri.iter().any(|&c| g.has_edge(e.witness, c))
        && tri
            .iter()
            .all(|&c| matches!(part.slot(c), Slot::Triangle(_)))
}

/// Repairs `U` so that every triangle of `CCS3` has a witness, by swapping
/// a triangle vertex with its unique outside neighbor. The size of `U` never
/// changes; the loop is bounded by `|V|` swaps.
pub fn establish_f_property(g: &Graph, u: &VertexSet) -> (VertexSet, FMapping, FStatus) {
    let mut cur = u.clone();
    for _ in 0..=g.n_alive() {
        let part = partition_cover(g, &cur).expect("U must be a vertex cover");
        let (map, status) = compute_f_from(g, &part);
        let FStatus::Unsatisfied(missing) = &status else {
            return (cur, map, status);
        };
        let swap = missing.iter().find_map(|tri| {
            tri.iter().find_map(|&c| {
                let outside: Vec<_> = g
                    .neighbors(c)
                    .iter()
                    .copied()
                    .filter(|&x| !cur.contains(x))
                    .collect();
                (outside.len() == 1).then(|| (c, outside[0]))
            })
        });
        match swap {
            Some((c, x)) => {
                cur.remove(c);
                cur.insert(x);
            }
            None => return (cur, map, status),
        }
    }
    let (map, status) = compute_f(g, &cur);
    (cur, map, status)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_min_weight_vc;
    use crate::weight::WeightMap;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn c5_needs_three() {
        let g = Graph::build(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let c = min_size_vc(&g);
        assert_eq!(c.len(), 3);
        assert_eq!(
            exact_min_weight_vc(&g, &WeightMap::unit(5))
                .unwrap()
                .cover
                .len(),
            3
        );
    }

    #[test]
    fn matching_needs_half() {
        let edges: Vec<_> = (0..6).map(|i| (2 * i, 2 * i + 1)).collect();
        let g = Graph::build(12, &edges).unwrap();
        assert_eq!(min_size_vc(&g).len(), 6);
    }

    #[test]
    fn edgeless_is_empty() {
        assert!(min_size_vc(&Graph::empty(4)).is_empty());
    }

    #[test]
    fn folding_reconstructs_valid_cover() {
        // C7 with chords 0-3: folding path.
        let g = Graph::build(
            7,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 0),
                (0, 3),
            ],
        )
        .unwrap();
        let c = min_size_vc(&g);
        let set = VertexSet::from_vertices(7, &c);
        crate::cover::check_cover(&g, &set).unwrap();
        assert_eq!(
            c.len(),
            exact_min_weight_vc(&g, &WeightMap::unit(7))
                .unwrap()
                .cover
                .len()
        );
    }

    // Triangle a=0,b=1,c=2; pendants ya=3, yb=4 on a, b; c's outside neighbor x=5
    // also sees pair p=6, p'=7; pendants on p, p': 8, 9.
    fn gadget(extra_pair_for_x: bool) -> Graph {
        let mut edges = vec![
            (0, 1),
            (1, 2),
            (0, 2),
            (0, 3),
            (1, 4),
            (2, 5),
            (6, 7),
            (6, 8),
            (7, 9),
        ];
        if extra_pair_for_x {
            edges.extend([(5, 6), (5, 7)]);
        } else {
            edges.extend([(5, 6), (7, 10)]);
        }
        Graph::build(11, &edges).unwrap()
    }

    #[test]
    fn f_empty_without_triangles() {
        let g = Graph::build(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let u = VertexSet::from_vertices(4, &[v(1), v(2)]);
        let (u2, f, st) = establish_f_property(&g, &u);
        assert_eq!(u2, u);
        assert!(f.is_empty());
        assert_eq!(st, FStatus::Satisfied);
    }

    #[test]
    fn f_from_designed_witness() {
        let g = gadget(true);
        let u = VertexSet::from_vertices(11, &[v(0), v(1), v(2), v(6), v(7)]);
        let (u2, f, st) = establish_f_property(&g, &u);
        assert_eq!(st, FStatus::Satisfied);
        assert_eq!(u2, u);
        assert_eq!(
            f.get(&[v(0), v(1), v(2)]),
            Some(&FEntry {
                pair: [v(6), v(7)],
                witness: v(5)
            })
        );
    }

    #[test]
    fn f_missing_witness_reported() {
        // Every triangle vertex sees only a pendant outside neighbor.
        let g = Graph::build(6, &[(0, 1), (1, 2), (0, 2), (0, 3), (1, 4), (2, 5)]).unwrap();
        let u = VertexSet::from_vertices(6, &[v(0), v(1), v(2)]);
        let (_, st) = compute_f(&g, &u);
        assert_eq!(st, FStatus::Unsatisfied(vec![[v(0), v(1), v(2)]]));
    }

    #[test]
    fn f_repair_keeps_size() {
        let g = gadget(false);
        let u = VertexSet::from_vertices(11, &[v(0), v(1), v(2), v(6), v(7)]);
        assert!(!compute_f(&g, &u).1.is_satisfied());
        let (u2, _, st) = establish_f_property(&g, &u);
        assert_eq!(u2.len(), u.len());
        crate::cover::check_cover(&g, &u2).unwrap();
        assert!(st.is_satisfied());
    }

    #[test]
    fn f_is_deterministic_and_excludes_k4() {
        let g = gadget(true);
        let u = VertexSet::from_vertices(11, &[v(0), v(1), v(2), v(6), v(7)]);
        assert_eq!(compute_f(&g, &u), compute_f(&g, &u));
        // K4 on 0..4 with U = {0,1,2}: the triangle has a common outside neighbor.
        let k4 = Graph::build(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let u = VertexSet::from_vertices(4, &[v(0), v(1), v(2)]);
        let part = partition_cover(&k4, &u).unwrap();
        assert_eq!(part.cc3.len(), 1);
        assert!(part.ccs3.is_empty());
        assert!(compute_f(&k4, &u).0.is_empty());
    }

    #[test]
    fn deleting_pair_vertex_invalidates_witness() {
        let mut g = gadget(true);
        let u = VertexSet::from_vertices(11, &[v(0), v(1), v(2), v(6), v(7)]);
        let _t = g.delete_vertices(&[v(6)]).unwrap();
        let (f, st) = compute_f(&g, &u);
        assert!(f.is_empty());
        assert_eq!(st, FStatus::Unsatisfied(vec![[v(0), v(1), v(2)]]));
    }
}

//! Bookkeeping over a vertex cover `U` of `G`: the decomposition of `G[U]`
//! into complete components, the bad / semi-bad / good classification of the
//! vertices outside `U`, the per-vertex potential, and the measures used to
//! bound the branching tree.
//!
//! Everything here is recomputed from scratch on each query. Potentials are
//! kept in quarter units so all comparisons are exact.

use std::collections::VecDeque;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::weight::{parse_decimal, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("not a vertex cover: edge ({0}, {1}) has no endpoint in U")]
    NotAVertexCover(VertexId, VertexId),
    #[error("U is not a good cover: G[U] has a component with more than two vertices")]
    NotGoodCover,
}

/// Membership set over vertex ids. Ids past the end are treated as absent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    member: Vec<bool>,
    len: usize,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        VertexSet {
            member: vec![false; n],
            len: 0,
        }
    }

    pub fn from_vertices<'a>(n: usize, vs: impl IntoIterator<Item = &'a VertexId>) -> Self {
        let mut s = VertexSet::new(n);
        for &v in vs {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.member.get(v.index()).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        if v.index() >= self.member.len() {
            self.member.resize(v.index() + 1, false);
        }
        let was = std::mem::replace(&mut self.member[v.index()], true);
        if !was {
            self.len += 1;
        }
        !was
    }

    pub fn remove(&mut self, v: VertexId) -> bool {
        match self.member.get_mut(v.index()) {
            Some(slot) if *slot => {
                *slot = false;
                self.len -= 1;
                true
            }
            _ => false,
        }
    }

    /// Number of ids in the set, dead or alive.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| VertexId::from(i))
    }

    /// Members that are alive in `g`, in increasing order.
    pub fn alive_members(&self, g: &Graph) -> Vec<VertexId> {
        self.iter().filter(|&v| g.is_alive(v)).collect()
    }
}

/// Checks that every alive edge has an endpoint in `u`.
pub fn check_cover(g: &Graph, u: &VertexSet) -> Result<(), CoverError> {
    for (a, b) in g.edges() {
        if !u.contains(a) && !u.contains(b) {
            return Err(CoverError::NotAVertexCover(a, b));
        }
    }
    Ok(())
}

/// Where a vertex sits relative to the decomposition of `G[U]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Dead,
    Outside,
    Single,
    Pair { partner: VertexId, pair: usize },
    Triangle(usize),
    Larger(usize),
}

/// Decomposition of `G[U]` into complete components of size 1, 2, 3 and the rest.
#[derive(Debug, Clone)]
pub struct CoverPartition {
    pub cc1: Vec<VertexId>,
    pub cc2: Vec<[VertexId; 2]>,
    pub cc3: Vec<[VertexId; 3]>,
    pub ccs2: Vec<[VertexId; 2]>,
    pub ccs3: Vec<[VertexId; 3]>,
    /// Components of size at least 3 that are not triangles.
    pub larger: Vec<Vec<VertexId>>,
    slot: Vec<Slot>,
    pair_is_strict: Vec<bool>,
    u_size: usize,
}

impl CoverPartition {
    #[inline]
    pub fn slot(&self, v: VertexId) -> Slot {
        self.slot.get(v.index()).copied().unwrap_or(Slot::Dead)
    }

    #[inline]
    pub fn in_u(&self, v: VertexId) -> bool {
        !matches!(self.slot(v), Slot::Dead | Slot::Outside)
    }

    #[inline]
    pub fn is_vcc1(&self, v: VertexId) -> bool {
        matches!(self.slot(v), Slot::Single)
    }

    #[inline]
    pub fn is_vcc2(&self, v: VertexId) -> bool {
        matches!(self.slot(v), Slot::Pair { .. })
    }

    pub fn partner(&self, v: VertexId) -> Option<VertexId> {
        match self.slot(v) {
            Slot::Pair { partner, .. } => Some(partner),
            _ => None,
        }
    }

    /// True iff `v` belongs to a pair with no common outside neighbor.
    pub fn is_vccs2(&self, v: VertexId) -> bool {
        match self.slot(v) {
            Slot::Pair { pair, .. } => self.pair_is_strict[pair],
            _ => false,
        }
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn vcc1_len(&self) -> usize {
        self.cc1.len()
    }

    pub fn vcc2_len(&self) -> usize {
        2 * self.cc2.len()
    }

    pub fn vcc_ge2_len(&self) -> usize {
        self.u_size - self.cc1.len()
    }

    pub fn is_good(&self) -> bool {
        self.cc3.is_empty() && self.larger.is_empty()
    }
}

/// Decomposes `G[U]` (restricted to alive vertices).
pub fn partition_cover(g: &Graph, u: &VertexSet) -> Result<CoverPartition, CoverError> {
    check_cover(g, u)?;
    let n = g.n_total();
    let mut slot = vec![Slot::Dead; n];
    for v in g.vertices() {
        slot[v.index()] = if u.contains(v) {
            Slot::Larger(usize::MAX)
        } else {
            Slot::Outside
        };
    }
    let mut part = CoverPartition {
        cc1: Vec::new(),
        cc2: Vec::new(),
        cc3: Vec::new(),
        ccs2: Vec::new(),
        ccs3: Vec::new(),
        larger: Vec::new(),
        slot: Vec::new(),
        pair_is_strict: Vec::new(),
        u_size: 0,
    };
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for s in g.vertices() {
        if !u.contains(s) || seen[s.index()] {
            continue;
        }
        seen[s.index()] = true;
        queue.push_back(s);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &w in g.neighbors(v) {
                if u.contains(w) && !seen[w.index()] {
                    seen[w.index()] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        part.u_size += comp.len();
        let strict = no_common_outside_neighbor(g, u, &comp);
        match comp.len() {
            1 => {
                slot[comp[0].index()] = Slot::Single;
                part.cc1.push(comp[0]);
            }
            2 => {
                let pair = part.cc2.len();
                let (a, b) = (comp[0], comp[1]);
                slot[a.index()] = Slot::Pair { partner: b, pair };
                slot[b.index()] = Slot::Pair { partner: a, pair };
                part.cc2.push([a, b]);
                part.pair_is_strict.push(strict);
                if strict {
                    part.ccs2.push([a, b]);
                }
            }
            3 if is_complete(g, &comp) => {
                let idx = part.cc3.len();
                let tri = [comp[0], comp[1], comp[2]];
                for v in tri {
                    slot[v.index()] = Slot::Triangle(idx);
                }
                part.cc3.push(tri);
                if strict {
                    part.ccs3.push(tri);
                }
            }
            _ => {
                let idx = part.larger.len();
                for &v in &comp {
                    slot[v.index()] = Slot::Larger(idx);
                }
                part.larger.push(comp);
            }
        }
    }
    part.slot = slot;
    Ok(part)
}

fn is_complete(g: &Graph, comp: &[VertexId]) -> bool {
    comp.iter()
        .enumerate()
        .all(|(i, &a)| comp[i + 1..].iter().all(|&b| g.has_edge(a, b)))
}

fn no_common_outside_neighbor(g: &Graph, u: &VertexSet, comp: &[VertexId]) -> bool {
    !g.neighbors(comp[0])
        .iter()
        .any(|&x| !u.contains(x) && comp[1..].iter().all(|&c| g.has_edge(x, c)))
}

/// True iff every component of `G[U]` has at most two vertices.
pub fn is_good_cover(g: &Graph, u: &VertexSet) -> Result<bool, CoverError> {
    Ok(partition_cover(g, u)?.is_good())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutsideClass {
    Bad,
    SemiBad,
    Good,
}

/// Classifies an outside vertex `x` by its adjacencies into VCC1 and VCC2.
pub fn classify_outside(g: &Graph, part: &CoverPartition, x: VertexId) -> OutsideClass {
    let mut n1 = 0;
    let mut n2 = 0;
    let mut whole_pair = false;
    for &y in g.neighbors(x) {
        match part.slot(y) {
            Slot::Single => n1 += 1,
            Slot::Pair { partner, .. } => {
                n2 += 1;
                if g.has_edge(x, partner) {
                    whole_pair = true;
                }
            }
            _ => {}
        }
    }
    if n1 >= 1 && (n2 == 1 || whole_pair) {
        OutsideClass::Bad
    } else if n1 == 1 && n2 == 2 {
        OutsideClass::SemiBad
    } else {
        OutsideClass::Good
    }
}

/// Potential of a pair vertex, in quarters: one of 0, 1/4, 1/2, 3/4, 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PotentialValue(u8);

impl PotentialValue {
    pub const ZERO: PotentialValue = PotentialValue(0);
    pub const ONE: PotentialValue = PotentialValue(4);

    pub fn from_quarters(q: u8) -> Self {
        assert!(q <= 4, "potential out of range: {q}/4");
        PotentialValue(q)
    }

    pub fn quarters(self) -> u8 {
        self.0
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(self.0 as i128, 4)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl fmt::Debug for PotentialValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/4", self.0)
    }
}

fn class_counts(classes: impl Iterator<Item = OutsideClass>) -> (i32, i32) {
    classes.fold((0, 0), |(b1, b2), c| match c {
        OutsideClass::Bad => (b1 + 1, b2),
        OutsideClass::SemiBad => (b1, b2 + 1),
        OutsideClass::Good => (b1, b2),
    })
}

/// Outside neighbors of the pair `{v, v'}`, sorted and deduplicated.
pub fn pair_outside_neighbors(
    g: &Graph,
    part: &CoverPartition,
    v: VertexId,
    v2: VertexId,
) -> Vec<VertexId> {
    let mut out: Vec<VertexId> = g
        .neighbors(v)
        .iter()
        .chain(g.neighbors(v2))
        .copied()
        .filter(|&x| x != v && x != v2 && !part.in_u(x))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Potential of `v ∈ VCC2`. Returns `None` when `v` is not a pair vertex.
pub fn potential(g: &Graph, part: &CoverPartition, v: VertexId) -> Option<PotentialValue> {
    let partner = part.partner(v)?;
    let q = if part.is_vccs2(v) {
        let (b1, b2) = class_counts(
            g.neighbors(v)
                .iter()
                .filter(|&&x| !part.in_u(x))
                .map(|&x| classify_outside(g, part, x)),
        );
        (4 - 4 * b1 - 2 * b2).max(0)
    } else {
        let (b1, b2) = class_counts(
            pair_outside_neighbors(g, part, v, partner)
                .into_iter()
                .map(|x| classify_outside(g, part, x)),
        );
        (4 - 2 * b1 - b2).max(0)
    };
    Some(PotentialValue(q as u8))
}

/// Potentials of all pair vertices plus the classes of all outside vertices.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    pub class: Vec<Option<OutsideClass>>,
    pub value: Vec<Option<PotentialValue>>,
    pub sum_quarters: u64,
}

impl PotentialTable {
    pub fn class_of(&self, x: VertexId) -> Option<OutsideClass> {
        self.class.get(x.index()).copied().flatten()
    }

    pub fn value_of(&self, v: VertexId) -> Option<PotentialValue> {
        self.value.get(v.index()).copied().flatten()
    }

    pub fn sum(&self) -> Rational {
        Rational::new(self.sum_quarters as i128, 4)
    }
}

pub fn potential_table(g: &Graph, part: &CoverPartition) -> PotentialTable {
    let n = g.n_total();
    let mut class = vec![None; n];
    for x in g.vertices() {
        if matches!(part.slot(x), Slot::Outside) {
            class[x.index()] = Some(classify_outside(g, part, x));
        }
    }
    let counts =
        |xs: &mut dyn Iterator<Item = VertexId>| class_counts(xs.filter_map(|x| class[x.index()]));
    let mut value = vec![None; n];
    let mut sum = 0u64;
    for (i, &[a, b]) in part.cc2.iter().enumerate() {
        let strict = part.pair_is_strict[i];
        if strict {
            for v in [a, b] {
                let (b1, b2) = counts(&mut g.neighbors(v).iter().copied());
                let q = (4 - 4 * b1 - 2 * b2).max(0) as u8;
                value[v.index()] = Some(PotentialValue(q));
                sum += q as u64;
            }
        } else {
            let nb = pair_outside_neighbors(g, part, a, b);
            let (b1, b2) = counts(&mut nb.into_iter());
            let q = (4 - 2 * b1 - b2).max(0) as u8;
            value[a.index()] = Some(PotentialValue(q));
            value[b.index()] = Some(PotentialValue(q));
            sum += 2 * q as u64;
        }
    }
    PotentialTable {
        class,
        value,
        sum_quarters: sum,
    }
}

/// Weights of the measures: `m1 = |VCC≥2| + α|VCC1|` and the phase threshold β.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureParams {
    pub alpha: Rational,
    pub beta: Rational,
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams {
            alpha: parse_decimal("0.156").unwrap(),
            beta: parse_decimal("0.175").unwrap(),
        }
    }
}

/// Measures of one `(G, U)` state. `m`, `m2` and `potential_sum` are only
/// defined for good covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measures {
    pub vcc1: usize,
    pub vcc2: usize,
    pub vcc_ge2: usize,
    pub m1: Rational,
    pub m2: Option<Rational>,
    pub m: Option<usize>,
    pub potential_sum: Option<Rational>,
}

impl Measures {
    pub fn m_value(&self) -> usize {
        self.m.expect("m is only defined for good covers")
    }

    pub fn big_m(&self) -> Rational {
        self.potential_sum
            .expect("M is only defined for good covers")
    }
}

pub fn measures(g: &Graph, part: &CoverPartition, params: &MeasureParams) -> Measures {
    let vcc1 = part.vcc1_len();
    let vcc2 = part.vcc2_len();
    let vcc_ge2 = part.vcc_ge2_len();
    let m1 = Rational::from_integer(vcc_ge2 as i128)
        + params.alpha * Rational::from_integer(vcc1 as i128);
    let (m2, m, potential_sum) = if part.is_good() {
        let one = Rational::from_integer(1);
        let m2 = (one + params.alpha * params.beta) * Rational::from_integer(vcc2 as i128);
        (Some(m2), Some(vcc2), Some(potential_table(g, part).sum()))
    } else {
        (None, None, None)
    };
    Measures {
        vcc1,
        vcc2,
        vcc_ge2,
        m1,
        m2,
        m,
        potential_sum,
    }
}

/// Outcome of the `M ≥ |VCC2| − 3|VCC1|` check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma2 {
    pub holds: bool,
    pub slack: Rational,
}

pub fn lemma2_holds(g: &Graph, u: &VertexSet) -> Result<Lemma2, CoverError> {
    let part = partition_cover(g, u)?;
    if !part.is_good() {
        return Err(CoverError::NotGoodCover);
    }
    Ok(lemma2_from_partition(g, &part))
}

pub fn lemma2_from_partition(g: &Graph, part: &CoverPartition) -> Lemma2 {
    let big_m = potential_table(g, part).sum();
    let rhs = Rational::from_integer(part.vcc2_len() as i128 - 3 * part.vcc1_len() as i128);
    let slack = big_m - rhs;
    Lemma2 {
        holds: slack >= Rational::zero(),
        slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn set(g: &Graph, ids: &[u32]) -> VertexSet {
        let vs: Vec<_> = ids.iter().map(|&i| v(i)).collect();
        VertexSet::from_vertices(g.n_total(), &vs)
    }

    #[test]
    fn k3_with_pendant_pair_not_strict() {
        // a=0 b=1 c=2 triangle, pendant x=3 on a; U = {a, b}
        let g = Graph::build(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]).unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1])).unwrap();
        assert_eq!(p.cc2, vec![[v(0), v(1)]]);
        assert!(p.ccs2.is_empty());
        assert!(!p.is_vccs2(v(0)));
    }

    #[test]
    fn single_edge_singleton() {
        let g = Graph::build(2, &[(0, 1)]).unwrap();
        let p = partition_cover(&g, &set(&g, &[0])).unwrap();
        assert_eq!(p.cc1, vec![v(0)]);
        assert!(p.cc2.is_empty());
    }

    #[test]
    fn triangle_with_pendants_is_strict() {
        let g = Graph::build(6, &[(0, 1), (1, 2), (0, 2), (0, 3), (1, 4), (2, 5)]).unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1, 2])).unwrap();
        assert_eq!(p.cc3, vec![[v(0), v(1), v(2)]]);
        assert_eq!(p.ccs3, vec![[v(0), v(1), v(2)]]);
        assert!(!p.is_good());
    }

    #[test]
    fn not_a_cover() {
        let g = Graph::build(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            partition_cover(&g, &set(&g, &[0])).unwrap_err(),
            CoverError::NotAVertexCover(v(1), v(2))
        );
    }

    #[test]
    fn good_cover_cases() {
        let p4 = Graph::build(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(is_good_cover(&p4, &set(&p4, &[1, 2])).unwrap());
        assert!(is_good_cover(&p4, &set(&p4, &[1, 3])).unwrap());
        assert!(!is_good_cover(&p4, &set(&p4, &[0, 1, 2])).unwrap());
        let empty = Graph::empty(3);
        assert!(is_good_cover(&empty, &set(&empty, &[])).unwrap());
    }

    // u=0 (VCC1), pair p=1,p'=2, pair q=3,q'=4, outside x=5.
    fn classify_fixture(x_nbrs: &[u32]) -> OutsideClass {
        let mut edges = vec![(1, 2), (3, 4), (0, 6), (1, 7), (2, 7), (3, 8), (4, 8)];
        edges.extend(x_nbrs.iter().map(|&y| (5usize, y as usize)));
        let g = Graph::build(9, &edges).unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1, 2, 3, 4])).unwrap();
        classify_outside(&g, &p, v(5))
    }

    #[test]
    fn classification() {
        assert_eq!(classify_fixture(&[0, 1]), OutsideClass::Bad);
        assert_eq!(classify_fixture(&[0, 1, 2]), OutsideClass::Bad);
        assert_eq!(classify_fixture(&[0, 1, 3]), OutsideClass::SemiBad);
        assert_eq!(classify_fixture(&[1, 3]), OutsideClass::Good);
        assert_eq!(classify_fixture(&[1, 2, 3]), OutsideClass::Good);
        assert_eq!(classify_fixture(&[0]), OutsideClass::Good);
    }

    #[test]
    fn potential_examples() {
        // strict pair {1,2}; x=3 adjacent to 1 and to singleton 0 -> bad.
        let g = Graph::build(6, &[(1, 2), (3, 1), (3, 0), (0, 4), (2, 5)]).unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1, 2])).unwrap();
        assert!(p.is_vccs2(v(1)));
        assert_eq!(potential(&g, &p, v(1)), Some(PotentialValue::ZERO));
        assert_eq!(potential(&g, &p, v(2)), Some(PotentialValue::ONE));

        // strict pair {1,2}; x=3 adjacent to 1, to singleton 0 and to pair {4,5}: semi-bad.
        let g = Graph::build(
            8,
            &[
                (1, 2),
                (4, 5),
                (3, 1),
                (3, 0),
                (3, 4),
                (0, 6),
                (2, 7),
                (5, 6),
            ],
        )
        .unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1, 2, 4, 5])).unwrap();
        assert_eq!(classify_outside(&g, &p, v(3)), OutsideClass::SemiBad);
        assert_eq!(
            potential(&g, &p, v(1)),
            Some(PotentialValue::from_quarters(2))
        );

        // non-strict pair {1,2} with common neighbor 3; bad vertex 4 on 1.
        let g = Graph::build(7, &[(1, 2), (3, 1), (3, 2), (4, 1), (4, 0), (0, 5), (2, 6)]).unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1, 2])).unwrap();
        assert!(!p.is_vccs2(v(1)));
        assert_eq!(classify_outside(&g, &p, v(4)), OutsideClass::Bad);
        assert_eq!(
            potential(&g, &p, v(1)),
            Some(PotentialValue::from_quarters(2))
        );
        assert_eq!(
            potential(&g, &p, v(2)),
            Some(PotentialValue::from_quarters(2))
        );
    }

    #[test]
    fn measures_examples() {
        // two pairs? |VCC2| = 2, |VCC1| = 1: path 3-0 plus edge pair (1,2) with pendants.
        let g = Graph::build(6, &[(0, 3), (1, 2), (1, 4), (2, 5)]).unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1, 2])).unwrap();
        let m = measures(&g, &p, &MeasureParams::default());
        assert_eq!(m.m1, parse_decimal("2.156").unwrap());

        // no singletons, clean pairs: M = |VCC2|
        let g = Graph::build(8, &[(0, 1), (2, 3), (0, 4), (1, 5), (2, 6), (3, 7)]).unwrap();
        let p = partition_cover(&g, &set(&g, &[0, 1, 2, 3])).unwrap();
        let m = measures(&g, &p, &MeasureParams::default());
        assert_eq!(m.potential_sum, Some(Rational::from_integer(4)));
        assert_eq!(m.m2, Some(parse_decimal("4.1092").unwrap()));
        assert_eq!(m.m, Some(4));
    }

    #[test]
    fn lemma2_base_and_empty() {
        let g = Graph::build(4, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        let l = lemma2_holds(&g, &set(&g, &[0, 1])).unwrap();
        assert!(l.holds);
        assert_eq!(l.slack, Rational::zero());
        let e = Graph::empty(2);
        assert!(lemma2_holds(&e, &set(&e, &[])).unwrap().holds);
    }
}

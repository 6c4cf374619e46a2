//! Minimum-weight vertex cover on bipartite graphs through a minimum s-t cut.
//!
//! Side-A vertices hang off the source with capacity `w(v)`, side-B vertices
//! drain into the sink with capacity `w(v)`, and every edge becomes an A→B arc
//! whose capacity exceeds the total weight. A minimum cut then only uses
//! weight arcs and the cut arcs name the cover.

use std::collections::VecDeque;

use num_traits::Zero;
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::weight::{Rational, WeightMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BipartiteError {
    #[error("coloring is not a proper 2-coloring: edge ({0}, {1}) is monochromatic or uncolored")]
    InvalidColoring(VertexId, VertexId),
}

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: Rational,
}

/// Residual network with exact capacities. Arcs are stored in pairs so that
/// `id ^ 1` is the reverse arc.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    source: usize,
    sink: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
            source,
            sink,
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: Rational) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc {
            to: from,
            cap: Rational::zero(),
        });
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }
}

/// Maximum flow value and the source side of a minimum cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub value: Rational,
    pub source_side: Vec<bool>,
}

/// Shortest-augmenting-path max flow (Edmonds–Karp). Consumes the network's
/// residual capacities.
pub fn max_flow(mut net: FlowNetwork) -> FlowResult {
    let n = net.node_count();
    let mut value = Rational::zero();
    loop {
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut reached = vec![false; n];
        reached[net.source] = true;
        let mut queue = VecDeque::from([net.source]);
        while let Some(x) = queue.pop_front() {
            if x == net.sink {
                break;
            }
            for &a in &net.out[x] {
                let arc = &net.arcs[a];
                if !reached[arc.to] && arc.cap > Rational::zero() {
                    reached[arc.to] = true;
                    pred[arc.to] = Some(a);
                    queue.push_back(arc.to);
                }
            }
        }
        if !reached[net.sink] {
            return FlowResult {
                value,
                source_side: reached,
            };
        }
        let mut bottleneck: Option<Rational> = None;
        let mut x = net.sink;
        while let Some(a) = pred[x] {
            let c = net.arcs[a].cap;
            bottleneck = Some(match bottleneck {
                Some(b) if b <= c => b,
                _ => c,
            });
            x = net.arcs[a ^ 1].to;
        }
        let b = bottleneck.expect("sink reached through at least one arc");
        let mut x = net.sink;
        while let Some(a) = pred[x] {
            net.arcs[a].cap -= b;
            net.arcs[a ^ 1].cap += b;
            x = net.arcs[a ^ 1].to;
        }
        value += b;
    }
}

/// Minimum-weight cover of a bipartite graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteCover {
    pub cover: Vec<VertexId>,
    pub weight: Rational,
    pub flow_value: Rational,
}

/// `coloring[v]` must be `Some(side)` for every alive vertex, with the two
/// endpoints of every edge on different sides.
pub fn min_weight_vc_bipartite(
    g: &Graph,
    w: &WeightMap,
    coloring: &[Option<bool>],
) -> Result<BipartiteCover, BipartiteError> {
    let side = |v: VertexId| coloring.get(v.index()).copied().flatten();
    for (a, b) in g.edges() {
        match (side(a), side(b)) {
            (Some(x), Some(y)) if x != y => {}
            _ => return Err(BipartiteError::InvalidColoring(a, b)),
        }
    }
    let verts: Vec<VertexId> = g.vertices().filter(|&v| g.degree(v) > 0).collect();
    let mut node = vec![usize::MAX; g.n_total()];
    for (i, &v) in verts.iter().enumerate() {
        node[v.index()] = i;
    }
    let source = verts.len();
    let sink = source + 1;
    let total: Rational = verts.iter().fold(Rational::zero(), |acc, &v| acc + w[v]);
    let unbounded = total + Rational::from_integer(1);
    let mut net = FlowNetwork::new(verts.len() + 2, source, sink);
    for &v in &verts {
        if side(v) == Some(false) {
            net.add_arc(source, node[v.index()], w[v]);
            for &u in g.neighbors(v) {
                net.add_arc(node[v.index()], node[u.index()], unbounded);
            }
        } else {
            net.add_arc(node[v.index()], sink, w[v]);
        }
    }
    let flow = max_flow(net);
    let cover: Vec<VertexId> = verts
        .iter()
        .copied()
        .filter(|&v| {
            let reachable = flow.source_side[node[v.index()]];
            if side(v) == Some(false) {
                !reachable
            } else {
                reachable
            }
        })
        .collect();
    let weight = w.total(&cover);
    debug_assert!(g
        .edges()
        .iter()
        .all(|(a, b)| cover.contains(a) || cover.contains(b)));
    debug_assert_eq!(weight, flow.value);
    Ok(BipartiteCover {
        cover,
        weight,
        flow_value: flow.value,
    })
}

//! Seeded instance generators. Every generator draws from a ChaCha8 stream
//! seeded with `seed`, so `(model, n, seed, weights)` fixes the output.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::preprocess::min_size_vc;
use crate::weight::{Rational, WeightMap};

pub const PAIRING_RETRIES: usize = 1000;
const GADGET_SIZE: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    CubicPairing,
    SubcubicErdos,
    Cycle,
    Path,
    TriangleGadget,
    K4Cluster,
    Bipartite,
}

impl Model {
    pub const ALL: [Model; 7] = [
        Model::CubicPairing,
        Model::SubcubicErdos,
        Model::Cycle,
        Model::Path,
        Model::TriangleGadget,
        Model::K4Cluster,
        Model::Bipartite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::CubicPairing => "cubic-pairing",
            Model::SubcubicErdos => "subcubic-erdos",
            Model::Cycle => "cycle",
            Model::Path => "path",
            Model::TriangleGadget => "triangle-gadget",
            Model::K4Cluster => "k4-cluster",
            Model::Bipartite => "bipartite",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s || (s == "subcubic" && *m == Model::SubcubicErdos))
            .ok_or_else(|| GenError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightModel {
    Unit,
    /// Integers drawn uniformly from `1..=max`.
    UniformInt(u32),
    /// Decimals with three fraction digits drawn uniformly from `0.001..=10`.
    Rational,
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightModel::Unit => f.write_str("unit"),
            WeightModel::UniformInt(w) => write!(f, "uniform-int:{w}"),
            WeightModel::Rational => f.write_str("rational"),
        }
    }
}

impl FromStr for WeightModel {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        match s {
            "unit" => Ok(WeightModel::Unit),
            "rational" => Ok(WeightModel::Rational),
            _ => s
                .strip_prefix("uniform-int:")
                .and_then(|w| w.parse::<u32>().ok())
                .filter(|&w| w >= 1)
                .map(WeightModel::UniformInt)
                .ok_or_else(|| GenError::UnknownWeights(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenSpec {
    pub model: Model,
    pub n: usize,
    pub seed: u64,
    pub weights: WeightModel,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("unknown weight model `{0}`")]
    UnknownWeights(String),
    #[error("model {model} cannot produce {n} vertices: {reason}")]
    BadSize {
        model: Model,
        n: usize,
        reason: &'static str,
    },
    #[error("model {model} gave up after {tries} attempts")]
    GenFailure { model: Model, tries: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub weights: WeightMap,
    /// A minimum-size cover built into the instance (triangle-gadget only).
    pub designed_cover: Option<Vec<VertexId>>,
}

pub fn generate(req: &GenSpec) -> Result<Instance, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let n = req.n;
    let bad = |reason| GenError::BadSize {
        model: req.model,
        n,
        reason,
    };
    if n == 0 {
        return Err(bad("need at least one vertex"));
    }
    let mut designed_cover = None;
    let edges = match req.model {
        Model::CubicPairing => {
            if n % 2 == 1 {
                return Err(bad("a 3-regular graph needs an even vertex count"));
            }
            if n < 4 {
                return Err(bad("a 3-regular simple graph needs at least 4 vertices"));
            }
            cubic_pairing(n, &mut rng).ok_or(GenError::GenFailure {
                model: req.model,
                tries: PAIRING_RETRIES,
            })?
        }
        Model::SubcubicErdos => subcubic(&(0..n).collect::<Vec<_>>(), &mut rng),
        Model::Cycle => {
            if n < 3 {
                return Err(bad("a cycle needs at least 3 vertices"));
            }
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        }
        Model::Path => (1..n).map(|i| (i - 1, i)).collect(),
        Model::K4Cluster => {
            if n < 4 {
                return Err(bad("a K4 needs 4 vertices"));
            }
            let k = (n / 8).max(1);
            let mut edges = Vec::new();
            for c in 0..k {
                let b = 4 * c;
                for i in 0..4 {
                    for j in i + 1..4 {
                        edges.push((b + i, b + j));
                    }
                }
            }
            edges.extend(subcubic(&(4 * k..n).collect::<Vec<_>>(), &mut rng));
            edges
        }
        Model::Bipartite => {
            let left: Vec<usize> = (0..n / 2).collect();
            let right: Vec<usize> = (n / 2..n).collect();
            random_capped(n, &mut rng, |rng| {
                if left.is_empty() || right.is_empty() {
                    None
                } else {
                    Some((*left.choose(rng).unwrap(), *right.choose(rng).unwrap()))
                }
            })
        }
        Model::TriangleGadget => {
            if n < GADGET_SIZE {
                return Err(bad("a triangle-gadget ring needs at least 14 vertices"));
            }
            let (edges, cover) = triangle_gadgets(n, &mut rng);
            let g = Graph::build(n, &edges).expect("gadgets are simple");
            if min_size_vc(&g).len() != cover.len() {
                return Err(GenError::GenFailure {
                    model: req.model,
                    tries: 1,
                });
            }
            designed_cover = Some(cover.into_iter().map(VertexId::from).collect());
            edges
        }
    };
    let graph = Graph::build(n, &edges).expect("generators emit simple graphs");
    debug_assert!(graph.max_degree() <= 3);
    let weights = sample_weights(n, req.weights, &mut rng);
    Ok(Instance {
        graph,
        weights,
        designed_cover,
    })
}

/// The built-in audit corpus: every model at oracle-checkable sizes with unit,
/// integer and rational weights.
pub fn default_corpus() -> Vec<(String, GenSpec)> {
    let weight_models = [
        WeightModel::Unit,
        WeightModel::UniformInt(9),
        WeightModel::Rational,
    ];
    let mut out = Vec::new();
    for model in Model::ALL {
        for seed in 0..24u64 {
            let lo = if model == Model::TriangleGadget {
                GADGET_SIZE
            } else {
                8
            };
            let n =
                (lo + (seed as usize * 5) % (23 - lo)) & !usize::from(model == Model::CubicPairing);
            let weights = weight_models[seed as usize % 3];
            let tag = match weights {
                WeightModel::Unit => "unit".to_string(),
                WeightModel::UniformInt(w) => format!("int{w}"),
                WeightModel::Rational => "rat".to_string(),
            };
            out.push((
                format!("{model}-n{n:02}-s{seed:02}-{tag}"),
                GenSpec {
                    model,
                    n,
                    seed,
                    weights,
                },
            ));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn sample_weights(n: usize, model: WeightModel, rng: &mut impl Rng) -> WeightMap {
    let ws = (0..n)
        .map(|_| match model {
            WeightModel::Unit => Rational::from_integer(1),
            WeightModel::UniformInt(max) => Rational::from_integer(rng.gen_range(1..=max as i128)),
            WeightModel::Rational => Rational::new(rng.gen_range(1..=10_000), 1000),
        })
        .collect();
    WeightMap::new(ws)
}

fn cubic_pairing(n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..3 * n).map(|p| p / 3).collect();
    'retry: for _ in 0..PAIRING_RETRIES {
        points.shuffle(rng);
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(3 * n / 2);
        for pair in points.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || edges.contains(&(a, b)) {
                continue 'retry;
            }
            edges.push((a, b));
        }
        edges.sort_unstable();
        return Some(edges);
    }
    None
}

/// Random edges among `verts`, each accepted only while both endpoints have
/// degree below 3. The edge budget is drawn between `|verts|` and `1.5|verts|`.
fn subcubic(verts: &[usize], rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if verts.len() < 2 {
        return Vec::new();
    }
    let n_max = verts.iter().max().unwrap() + 1;
    random_capped(n_max, rng, |rng| {
        let a = *verts.choose(rng).unwrap();
        let b = *verts.choose(rng).unwrap();
        Some((a, b))
    })
    .into_iter()
    .filter(|(a, b)| verts.contains(a) && verts.contains(b))
    .collect()
}

fn random_capped(
    n: usize,
    rng: &mut ChaCha8Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Option<(usize, usize)>,
) -> Vec<(usize, usize)> {
    let mut degree = vec![0usize; n];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let active = degree.len();
    let budget = rng.gen_range(active..=active + active / 2);
    let mut attempts = 0;
    while edges.len() < budget && attempts < 40 * active {
        attempts += 1;
        let Some((a, b)) = draw(rng) else { break };
        let (a, b) = (a.min(b), a.max(b));
        if a == b || degree[a] >= 3 || degree[b] >= 3 || edges.contains(&(a, b)) {
            continue;
        }
        degree[a] += 1;
        degree[b] += 1;
        edges.push((a, b));
    }
    edges.sort_unstable();
    edges
}

/// A ring of gadgets joined by linker pairs. Gadget `i` holds the triangle
/// `a b c`, a witness `x` on `c` adjacent to both ends of the pair `p p'`,
/// and pendants on `p` and `p'`. Link `i` is the pair `q q'` with pendants,
/// joined to `b_i` through connector `y` and to `a_{i+1}` through `y'`.
/// Every way of dropping a designed cover vertex costs an outside vertex of
/// its own, so the designed cover has minimum size. Leftover vertices form a
/// path. Labels are shuffled.
fn triangle_gadgets(n: usize, rng: &mut ChaCha8Rng) -> (Vec<(usize, usize)>, Vec<usize>) {
    let k = n / GADGET_SIZE;
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let mut edges = Vec::new();
    let mut cover = Vec::new();
    for i in 0..k {
        let g = i * GADGET_SIZE;
        let (a, b, c, x, p, p2, lp, lp2) = (g, g + 1, g + 2, g + 3, g + 4, g + 5, g + 6, g + 7);
        let (q, q2, lq, lq2, y, y2) = (g + 8, g + 9, g + 10, g + 11, g + 12, g + 13);
        let next_a = ((i + 1) % k) * GADGET_SIZE;
        edges.extend([
            (a, b),
            (a, c),
            (b, c),
            (c, x),
            (x, p),
            (x, p2),
            (p, p2),
            (p, lp),
            (p2, lp2),
        ]);
        edges.extend([
            (q, q2),
            (q, lq),
            (q2, lq2),
            (b, y),
            (q, y),
            (next_a, y2),
            (q2, y2),
        ]);
        cover.extend([a, b, c, p, p2, q, q2]);
    }
    let tail = k * GADGET_SIZE;
    for v in tail + 1..n {
        edges.push((v - 1, v));
    }
    cover.extend((tail..n).filter(|v| (v - tail) % 2 == 1));
    let mut edges: Vec<(usize, usize)> = edges
        .into_iter()
        .map(|(u, v)| (label[u].min(label[v]), label[u].max(label[v])))
        .collect();
    edges.sort_unstable();
    let mut cover: Vec<usize> = cover.into_iter().map(|v| label[v]).collect();
    cover.sort_unstable();
    (edges, cover)
}

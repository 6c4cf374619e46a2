//! The recursive solver: base branchings (B1) and (B2), the thirteen ordered
//! rules, exact weight bookkeeping and the hooks the audit consumes.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::bipartite::min_weight_vc_bipartite;
use crate::cover::{
    check_cover, measures, pair_outside_neighbors, partition_cover, potential_table,
    CoverPartition, MeasureParams, Measures, OutsideClass, VertexSet,
};
use crate::graph::{Bipartition, Graph, MutationToken, VertexId};
use crate::instrument::{
    audit_step, lemma1_bound, lemma1_subtree_check, AuditFailure, BranchReport, FailureKind, RowKey,
};
use crate::oracle::{solve_small_component, SMALL_COMPONENT_LIMIT};
use crate::preprocess::{
    compute_f_from, entry_is_valid, establish_f_property, min_size_vc, FStatus,
};
use crate::weight::{format_decimal, serialize_opt_decimal, Rational, WeightMap};

/// What to do when a triangle component has no witness pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FMode {
    /// Fail with [`EngineError::FPropertyViolation`].
    Strict,
    /// Branch on the triangle alone and count the fallback.
    #[default]
    Robust,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub mode: FMode,
    pub params: MeasureParams,
    /// Compute measures at every node and check them against the tables.
    pub audit: bool,
    /// Minimum-size cover to start from instead of computing one.
    pub initial_cover: Option<Vec<VertexId>>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: FMode::Robust,
            params: MeasureParams::default(),
            audit: true,
            initial_cover: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("vertex {vertex} has degree {degree} > 3")]
    NonSubcubic { vertex: VertexId, degree: usize },
    #[error("weight map has {got} entries for {expected} vertices")]
    WeightCount { expected: usize, got: usize },
    #[error("vertex {0} has a negative weight")]
    NegativeWeight(VertexId),
    #[error("initial cover rejected: {0}")]
    InvalidInitialCover(String),
    #[error("triangle {triangle:?} has no witness pair (depth {depth})")]
    FPropertyViolation {
        triangle: [VertexId; 3],
        depth: usize,
    },
    #[error("no rule applies at depth {depth}")]
    StuckState { depth: usize },
    #[error("rule {rule} found no witness around vertex {vertex}")]
    WitnessNotFound { rule: u8, vertex: VertexId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub cover: Vec<VertexId>,
    pub weight: Rational,
}

/// One Rule 10 switch, with the values that decide Lemma 2 there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma2Sample {
    pub vcc1: usize,
    pub vcc2: usize,
    pub potential_sum: Rational,
    pub slack: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub top_f_status: FStatus,
    pub lemma2_samples: Vec<Lemma2Sample>,
    pub lemma1_checks: u64,
    /// Audited firings per table row.
    pub row_firings: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub outcome: SolveOutcome,
    pub report: BranchReport,
    pub diagnostics: Diagnostics,
}

/// One rule application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub node: u64,
    pub depth: usize,
    pub q: u8,
    pub rule: String,
    pub witness: Vec<u32>,
    pub children: usize,
    #[serde(serialize_with = "serialize_opt_decimal")]
    pub m1: Option<Rational>,
    pub m: Option<usize>,
    #[serde(rename = "M", serialize_with = "serialize_opt_decimal")]
    pub big_m: Option<Rational>,
}

pub trait TraceSink {
    fn record(&mut self, event: TraceEvent);
}

impl TraceSink for Vec<TraceEvent> {
    fn record(&mut self, event: TraceEvent) {
        self.push(event);
    }
}

pub fn solve(g: &Graph, w: &WeightMap, config: &SolveConfig) -> Result<Solution, EngineError> {
    run(g, w, config, None)
}

pub fn solve_traced<'a>(
    g: &Graph,
    w: &WeightMap,
    config: &'a SolveConfig,
    sink: &'a mut dyn TraceSink,
) -> Result<Solution, EngineError> {
    run(g, w, config, Some(sink))
}

fn run<'a>(
    g: &Graph,
    w: &WeightMap,
    config: &'a SolveConfig,
    sink: Option<&'a mut dyn TraceSink>,
) -> Result<Solution, EngineError> {
    if w.len() != g.n_total() {
        return Err(EngineError::WeightCount {
            expected: g.n_total(),
            got: w.len(),
        });
    }
    for v in g.vertices() {
        if g.degree(v) > 3 {
            return Err(EngineError::NonSubcubic {
                vertex: v,
                degree: g.degree(v),
            });
        }
        if w[v] < Rational::from_integer(0) {
            return Err(EngineError::NegativeWeight(v));
        }
    }
    let min_cover = min_size_vc(g);
    let start = match &config.initial_cover {
        None => VertexSet::from_vertices(g.n_total(), &min_cover),
        Some(c) => {
            if let Some(v) = c.iter().find(|v| !g.is_alive(**v)) {
                return Err(EngineError::InvalidInitialCover(format!(
                    "vertex {v} does not exist"
                )));
            }
            let set = VertexSet::from_vertices(g.n_total(), c);
            check_cover(g, &set).map_err(|e| EngineError::InvalidInitialCover(e.to_string()))?;
            if set.len() != min_cover.len() {
                return Err(EngineError::InvalidInitialCover(format!(
                    "size {} but the minimum is {}",
                    set.len(),
                    min_cover.len()
                )));
            }
            set
        }
    };
    run_from(g, w, config, sink, &start)
}

/// Runs the branching from a given vertex cover of `g`.
fn run_from<'a>(
    g: &Graph,
    w: &WeightMap,
    config: &'a SolveConfig,
    sink: Option<&'a mut dyn TraceSink>,
    start: &VertexSet,
) -> Result<Solution, EngineError> {
    let (u, _, status) = establish_f_property(g, start);
    if config.mode == FMode::Strict {
        if let FStatus::Unsatisfied(missing) = &status {
            return Err(EngineError::FPropertyViolation {
                triangle: missing[0],
                depth: 0,
            });
        }
    }
    let t = u.len();
    let root_part = partition_cover(g, &u).expect("vertex cover");
    let m1_root = measures(g, &root_part, &config.params).m1;

    let mut e = Engine {
        g: g.clone(),
        u,
        w: w.clone(),
        cfg: config,
        sink,
        nodes: 0,
        rule_counts: BTreeMap::new(),
        fallbacks: 0,
        failures: Vec::new(),
        first_switch: None,
        lemma2_samples: Vec::new(),
        lemma1_checks: 0,
        row_firings: BTreeMap::new(),
    };
    let out = e.wvc_alg(0, 0)?;
    debug_assert_eq!(e.g.journal_depth(), 0);
    let mut cover = out.cover;
    cover.sort_unstable();
    debug_assert!(check_cover(g, &VertexSet::from_vertices(g.n_total(), &cover)).is_ok());
    debug_assert_eq!(w.total(&cover), out.weight);

    let int = |k: usize| Rational::from_integer(k as i128);
    let report = BranchReport {
        leaves: out.leaves,
        nodes: e.nodes,
        rule_counts: e.rule_counts,
        t,
        m1_root,
        m2_at_switch: e.first_switch.as_ref().and_then(|m| m.m2),
        m_at_switch: e.first_switch.as_ref().and_then(|m| m.m.map(int)),
        big_m_at_switch: e.first_switch.as_ref().and_then(|m| m.potential_sum),
        audit_failures: e.failures,
        robust_fallbacks: e.fallbacks,
    };
    Ok(Solution {
        outcome: SolveOutcome {
            cover,
            weight: out.weight,
        },
        report,
        diagnostics: Diagnostics {
            top_f_status: status,
            lemma2_samples: e.lemma2_samples,
            lemma1_checks: e.lemma1_checks,
            row_firings: e.row_firings,
        },
    })
}

/// Composite branching: each `Recurse` leaf is one child call.
#[derive(Debug, Clone)]
enum Plan {
    Recurse,
    B1 {
        v: VertexId,
        include: Box<Plan>,
        exclude: Box<Plan>,
    },
    B2 {
        tri: [VertexId; 3],
        next: Box<Plan>,
    },
}

impl Plan {
    fn b1(v: VertexId, include: Plan, exclude: Plan) -> Plan {
        Plan::B1 {
            v,
            include: Box::new(include),
            exclude: Box::new(exclude),
        }
    }

    fn b1_simple(v: VertexId) -> Plan {
        Plan::b1(v, Plan::Recurse, Plan::Recurse)
    }

    fn b2(tri: [VertexId; 3], next: Plan) -> Plan {
        Plan::B2 {
            tri,
            next: Box::new(next),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Plan::Recurse => 1,
            Plan::B1 {
                include, exclude, ..
            } => include.leaves() + exclude.leaves(),
            Plan::B2 { next, .. } => 3 * next.leaves(),
        }
    }
}

struct CallOut {
    cover: Vec<VertexId>,
    weight: Rational,
    leaves: u64,
    /// Measures at the first branching node below (and including) this call.
    head: Option<Measures>,
}

struct Removal {
    token: MutationToken,
    from_u: Vec<VertexId>,
}

struct Node<'m> {
    id: u64,
    depth: usize,
    q: u8,
    entry: Option<&'m Measures>,
}

struct Engine<'a> {
    g: Graph,
    u: VertexSet,
    w: WeightMap,
    cfg: &'a SolveConfig,
    sink: Option<&'a mut dyn TraceSink>,
    nodes: u64,
    rule_counts: BTreeMap<String, u64>,
    fallbacks: u64,
    failures: Vec<AuditFailure>,
    first_switch: Option<Measures>,
    lemma2_samples: Vec<Lemma2Sample>,
    lemma1_checks: u64,
    row_firings: BTreeMap<String, u64>,
}

fn rule_key(rule: u8) -> String {
    if rule == 0 {
        "fallback-b2".to_string()
    } else {
        rule.to_string()
    }
}

fn ids(vs: &[VertexId]) -> Vec<u32> {
    vs.iter().map(|v| v.0).collect()
}

impl Engine<'_> {
    fn wvc_alg(&mut self, q: u8, depth: usize) -> Result<CallOut, EngineError> {
        let id = self.nodes;
        self.nodes += 1;
        let part = partition_cover(&self.g, &self.u).expect("U stays a vertex cover");
        let entry = (self.cfg.audit || self.sink.is_some())
            .then(|| measures(&self.g, &part, &self.cfg.params));
        let node = Node {
            id,
            depth,
            q,
            entry: entry.as_ref(),
        };
        let out = self.dispatch(&node, &part)?;
        if self.cfg.audit && q == 2 {
            let e = entry.as_ref().expect("audit computes measures");
            self.lemma1_checks += 1;
            let (m, big_m) = (e.m_value(), e.big_m());
            if !lemma1_subtree_check(m, &big_m, out.leaves) {
                self.fail(
                    &node,
                    FailureKind::Lemma1,
                    2,
                    &[],
                    None,
                    format!(
                        "{} leaves exceed (sqrt 2)^{m} * 0.9808^{} = {:.6}",
                        out.leaves,
                        format_decimal(&big_m),
                        lemma1_bound(m, &big_m)
                    ),
                );
            }
        }
        debug_assert!(self
            .g
            .edges()
            .iter()
            .all(|(a, b)| out.cover.contains(a) || out.cover.contains(b)));
        Ok(out)
    }

    fn dispatch(&mut self, node: &Node, part: &CoverPartition) -> Result<CallOut, EngineError> {
        let q = node.q;

        // Rule 1
        if let Bipartition::Coloring(coloring) = self.g.bipartition() {
            self.announce(node, 1, &[], 0);
            let r = min_weight_vc_bipartite(&self.g, &self.w, &coloring).expect("valid coloring");
            return Ok(CallOut {
                cover: r.cover,
                weight: r.weight,
                leaves: 1,
                head: None,
            });
        }

        // Rule 2
        if let Some(comp) = self
            .g
            .connected_components()
            .into_iter()
            .find(|c| c.len() <= SMALL_COMPONENT_LIMIT)
        {
            self.announce(node, 2, &comp, 1);
            let small = solve_small_component(&self.g, &comp, &self.w).expect("small component");
            self.audit_deletions(node, 2, &comp);
            let rm = self.remove(&comp);
            let child = self.wvc_alg(q, node.depth + 1);
            self.unremove(rm);
            let mut child = child?;
            child.cover.extend_from_slice(&small.cover);
            child.weight += small.weight;
            return Ok(child);
        }

        // Rule 3
        let internal = self.g.vertices().find(|&v| {
            self.u.contains(v) && self.g.neighbors(v).iter().all(|&x| self.u.contains(x))
        });
        if let Some(v) = internal {
            self.announce(node, 3, &[v], 1);
            if self.cfg.audit && q == 2 {
                let key = if part.is_vcc2(v) {
                    RowKey::DeleteVcc2
                } else {
                    RowKey::DeleteOther
                };
                let before = node.entry.expect("audit computes measures").clone();
                self.u.remove(v);
                let after = self.measure_now();
                self.u.insert(v);
                self.check_row(node, 3, key, &[v], &before, &[Some(after)]);
            }
            self.u.remove(v);
            let child = self.wvc_alg(q, node.depth + 1);
            self.u.insert(v);
            return child;
        }

        // Rules 4 and 5
        if !part.cc3.is_empty() {
            return self.triangle_rules(node, part);
        }

        // Rule 6
        for u in self.u_members() {
            if self.u_degree(u) != 1 {
                continue;
            }
            let v = self.u_neighbors(u)[0];
            if self.u_degree(v) == 2 {
                return self.branch(node, 6, Some(RowKey::Rule6), &[u, v], Plan::b1_simple(v));
            }
        }

        // Rule 7
        if let Some(v) = self
            .u_members()
            .into_iter()
            .find(|&v| self.u_degree(v) == 2)
        {
            return self.cycle_rule(node, v);
        }

        // Rule 8
        let pendant = self.g.vertices().find(|&v| self.g.degree(v) == 1);
        if let Some(v) = pendant {
            return self.fold_degree1(node, v);
        }

        // Rule 9
        if let Some((v1, v2)) = self.reducible_triangle() {
            let vi = if self.w[v2] < self.w[v1] { v2 } else { v1 };
            self.announce(node, 9, &[v1, v2, vi], 1);
            self.audit_deletions(node, 9, &[vi]);
            let rm = self.remove(&[vi]);
            let child = self.wvc_alg(q, node.depth + 1);
            self.unremove(rm);
            let mut child = child?;
            child.cover.push(vi);
            child.weight += self.w[vi];
            return Ok(child);
        }

        // Rule 10
        if q == 0 {
            return self.switch_phase(node, part);
        }

        if q == 2 {
            if let Some((rule, witness, plan)) = self.pair_rules(part)? {
                let key = RowKey::lookup(rule, plan.leaves()).ok();
                return self.branch(node, rule, key, &witness, plan);
            }
        }

        // Rule 13
        if let Some(v) = self
            .u_members()
            .into_iter()
            .find(|&v| self.u_degree(v) == 1)
        {
            let row = RowKey::lookup(13, q as usize).ok();
            return self.branch(node, 13, row, &[v], Plan::b1_simple(v));
        }

        Err(EngineError::StuckState { depth: node.depth })
    }

    // -- helpers over U -------------------------------------------------------

    fn u_members(&self) -> Vec<VertexId> {
        self.g.vertices().filter(|&v| self.u.contains(v)).collect()
    }

    fn u_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&x| self.u.contains(x))
            .collect()
    }

    fn u_degree(&self, v: VertexId) -> usize {
        self.g
            .neighbors(v)
            .iter()
            .filter(|&&x| self.u.contains(x))
            .count()
    }

    fn remove(&mut self, set: &[VertexId]) -> Removal {
        let from_u: Vec<VertexId> = set.iter().copied().filter(|&v| self.u.remove(v)).collect();
        let token = self
            .g
            .delete_vertices(set)
            .expect("deleting alive vertices");
        Removal { token, from_u }
    }

    fn unremove(&mut self, r: Removal) {
        self.g.restore(r.token).expect("LIFO restore");
        for v in r.from_u {
            self.u.insert(v);
        }
    }

    fn measure_now(&self) -> Measures {
        let part = partition_cover(&self.g, &self.u).expect("U stays a vertex cover");
        measures(&self.g, &part, &self.cfg.params)
    }

    // -- trace and audit ------------------------------------------------------

    fn announce(&mut self, node: &Node, rule: u8, witness: &[VertexId], children: usize) {
        *self.rule_counts.entry(rule_key(rule)).or_insert(0) += 1;
        if let Some(sink) = self.sink.as_deref_mut() {
            sink.record(TraceEvent {
                node: node.id,
                depth: node.depth,
                q: node.q,
                rule: rule_key(rule),
                witness: ids(witness),
                children,
                m1: node.entry.map(|m| m.m1),
                m: node.entry.and_then(|m| m.m),
                big_m: node.entry.and_then(|m| m.potential_sum),
            });
        }
    }

    fn fail(
        &mut self,
        node: &Node,
        kind: FailureKind,
        rule: u8,
        witness: &[VertexId],
        detail: Option<crate::instrument::Violation>,
        message: String,
    ) {
        self.failures.push(AuditFailure {
            kind,
            node: node.id,
            depth: node.depth,
            q: node.q,
            rule,
            witness: ids(witness),
            detail,
            message,
        });
    }

    fn check_row(
        &mut self,
        node: &Node,
        rule: u8,
        key: RowKey,
        witness: &[VertexId],
        before: &Measures,
        after: &[Option<Measures>],
    ) {
        *self.row_firings.entry(key.label()).or_insert(0) += 1;
        let violations =
            audit_step(key, &self.cfg.params, before, after).expect("row shape matches the plan");
        for v in violations {
            let msg = format!(
                "{} branch {}: {} required {}, observed {}",
                v.row, v.branch, v.measure, v.required, v.observed
            );
            self.fail(node, FailureKind::Floor, rule, witness, Some(v), msg);
        }
    }

    /// Audits a reduction in the `q = 2` phase one deleted vertex at a time.
    fn audit_deletions(&mut self, node: &Node, rule: u8, order: &[VertexId]) {
        if !(self.cfg.audit && node.q == 2) {
            return;
        }
        let mut undo = Vec::with_capacity(order.len());
        let mut before = node.entry.expect("audit computes measures").clone();
        for &d in order {
            let part = partition_cover(&self.g, &self.u).expect("U stays a vertex cover");
            let key = if part.is_vcc2(d) {
                RowKey::DeleteVcc2
            } else {
                RowKey::DeleteOther
            };
            undo.push(self.remove(&[d]));
            let after = self.measure_now();
            self.check_row(node, rule, key, &[d], &before, &[Some(after.clone())]);
            before = after;
        }
        for r in undo.into_iter().rev() {
            self.unremove(r);
        }
    }

    // -- branching ------------------------------------------------------------

    fn branch(
        &mut self,
        node: &Node,
        rule: u8,
        row: Option<RowKey>,
        witness: &[VertexId],
        plan: Plan,
    ) -> Result<CallOut, EngineError> {
        self.announce(node, rule, witness, plan.leaves());
        let mut outs = Vec::with_capacity(plan.leaves());
        self.run_plan(&plan, node, &mut outs)?;
        if let (true, Some(row), Some(entry)) = (self.cfg.audit, row, node.entry) {
            let heads: Vec<Option<Measures>> = outs.iter().map(|o| o.head.clone()).collect();
            self.check_row(node, rule, row, witness, entry, &heads);
        }
        let leaves = outs.iter().map(|o| o.leaves).sum();
        let mut best = 0;
        for (i, o) in outs.iter().enumerate() {
            if o.weight < outs[best].weight {
                best = i;
            }
        }
        let chosen = outs.swap_remove(best);
        Ok(CallOut {
            cover: chosen.cover,
            weight: chosen.weight,
            leaves,
            head: node.entry.cloned(),
        })
    }

    fn run_plan(
        &mut self,
        plan: &Plan,
        node: &Node,
        outs: &mut Vec<CallOut>,
    ) -> Result<(), EngineError> {
        match plan {
            Plan::Recurse => {
                let out = self.wvc_alg(node.q, node.depth + 1)?;
                outs.push(out);
            }
            Plan::B1 {
                v,
                include,
                exclude,
            } => {
                let v = *v;
                if !(self.g.is_alive(v) && self.u.contains(v)) {
                    debug_assert!(false, "nested branching vertex {v} vanished");
                    return self.run_plan(&Plan::Recurse, node, outs);
                }
                self.take_branch(&[v], &[v], include, node, outs)?;
                let nb = self.g.neighbors(v).to_vec();
                let mut closed = nb.clone();
                closed.push(v);
                self.take_branch(&closed, &nb, exclude, node, outs)?;
            }
            Plan::B2 { tri, next } => {
                let [a, b, c] = *tri;
                for pair in [[a, b], [a, c], [b, c]] {
                    self.take_branch(&pair, &pair, next, node, outs)?;
                }
            }
        }
        Ok(())
    }

    fn take_branch(
        &mut self,
        delete: &[VertexId],
        take: &[VertexId],
        next: &Plan,
        node: &Node,
        outs: &mut Vec<CallOut>,
    ) -> Result<(), EngineError> {
        let start = outs.len();
        let rm = self.remove(delete);
        let r = self.run_plan(next, node, outs);
        self.unremove(rm);
        r?;
        let extra = self.w.total(take);
        for o in &mut outs[start..] {
            o.cover.extend_from_slice(take);
            o.weight += extra;
        }
        Ok(())
    }

    // -- individual rules -----------------------------------------------------

    fn triangle_rules(
        &mut self,
        node: &Node,
        part: &CoverPartition,
    ) -> Result<CallOut, EngineError> {
        let mut tris = part.cc3.clone();
        tris.sort_unstable();
        let (f, _) = compute_f_from(&self.g, part);
        if let Some(&missing) = tris.iter().find(|t| f.get(t).is_none()) {
            if self.cfg.mode == FMode::Strict {
                return Err(EngineError::FPropertyViolation {
                    triangle: missing,
                    depth: node.depth,
                });
            }
            self.fallbacks += 1;
            return self.branch(node, 0, None, &missing, Plan::b2(missing, Plan::Recurse));
        }
        for t in &tris {
            debug_assert!(entry_is_valid(&self.g, part, t, f.get(t).unwrap()));
        }
        let pair_of = |t: &[VertexId; 3]| f.get(t).expect("checked above").pair;
        // Rule 4
        for c in &tris {
            let p = pair_of(c);
            if tris.iter().all(|c2| c2 == c || pair_of(c2) != p) {
                let e = f.get(c).unwrap();
                let v = p[0];
                let witness = [c[0], c[1], c[2], p[0], p[1], e.witness];
                let plan = Plan::b1(v, Plan::b2(*c, Plan::Recurse), Plan::Recurse);
                return self.branch(node, 4, Some(RowKey::Rule4), &witness, plan);
            }
        }
        // Rule 5
        let c = tris[0];
        let p = pair_of(&c);
        let c2 = *tris[1..]
            .iter()
            .find(|t| pair_of(t) == p)
            .expect("rule 4 failed, so f(C) is shared");
        let v = p[0];
        let witness = [c[0], c[1], c[2], c2[0], c2[1], c2[2], p[0], p[1]];
        let plan = Plan::b1(v, Plan::b2(c, Plan::b2(c2, Plan::Recurse)), Plan::Recurse);
        self.branch(node, 5, Some(RowKey::Rule5), &witness, plan)
    }

    fn cycle_rule(&mut self, node: &Node, v: VertexId) -> Result<CallOut, EngineError> {
        // Walk the component of v in G[U]; it is a chordless cycle here.
        let mut cycle = vec![v];
        let mut prev = v;
        let mut cur = self.u_neighbors(v)[0];
        while cur != v {
            let nb = self.u_neighbors(cur);
            if nb.len() != 2 || cycle.len() > self.g.n_total() {
                cycle.clear();
                break;
            }
            cycle.push(cur);
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        let k = cycle.len();
        if k < 4 {
            debug_assert!(
                false,
                "rule 7 expects a chordless cycle of length at least 4"
            );
            return self.branch(node, 7, None, &[v], Plan::b1_simple(v));
        }
        let (v2, v3, v4) = (cycle[2], cycle[3], cycle.get(4).copied());
        let plan = if k >= 6 {
            let v4 = v4.expect("k >= 6");
            Plan::b1(
                v,
                Plan::b1(v2, Plan::b1_simple(v4), Plan::Recurse),
                Plan::b1_simple(v3),
            )
        } else {
            Plan::b1(v, Plan::b1_simple(v2), Plan::Recurse)
        };
        self.branch(node, 7, Some(RowKey::Rule7 { cycle: k }), &cycle, plan)
    }

    fn fold_degree1(&mut self, node: &Node, v: VertexId) -> Result<CallOut, EngineError> {
        let u = self.g.neighbors(v)[0];
        let (wv, wu) = (self.w[v], self.w[u]);
        self.announce(node, 8, &[v, u], 1);
        if wv >= wu {
            self.audit_deletions(node, 8, &[v, u]);
            let rm = self.remove(&[u, v]);
            let child = self.wvc_alg(node.q, node.depth + 1);
            self.unremove(rm);
            let mut child = child?;
            child.cover.push(u);
            child.weight += wu;
            return Ok(child);
        }
        self.audit_deletions(node, 8, &[v]);
        let rm = self.remove(&[v]);
        self.w[u] = wu - wv;
        let child = self.wvc_alg(node.q, node.depth + 1);
        self.w[u] = wu;
        self.unremove(rm);
        let mut child = child?;
        if !child.cover.contains(&u) {
            child.cover.push(v);
        }
        child.weight += wv;
        Ok(child)
    }

    /// First triangle (lexicographic) with two vertices `v1, v2` that either
    /// both have degree 2 or share a degree-2 neighbor outside the triangle.
    fn reducible_triangle(&self) -> Option<(VertexId, VertexId)> {
        let g = &self.g;
        for a in g.vertices() {
            for &b in g.neighbors(a).iter().filter(|&&b| b > a) {
                for &c in g.neighbors(a).iter().filter(|&&c| c > b) {
                    if !g.has_edge(b, c) {
                        continue;
                    }
                    for (v1, v2, v3) in [(a, b, c), (a, c, b), (b, c, a)] {
                        if g.degree(v1) == 2 && g.degree(v2) == 2 {
                            return Some((v1, v2));
                        }
                        let shared = g
                            .neighbors(v1)
                            .iter()
                            .any(|&x| x != v2 && x != v3 && g.degree(x) == 2 && g.has_edge(x, v2));
                        if shared {
                            return Some((v1, v2));
                        }
                    }
                }
            }
        }
        None
    }

    fn switch_phase(&mut self, node: &Node, part: &CoverPartition) -> Result<CallOut, EngineError> {
        let params = &self.cfg.params;
        let vcc1 = Rational::from_integer(part.vcc1_len() as i128);
        let vcc2 = Rational::from_integer(part.vcc2_len() as i128);
        let q_next = if vcc1 >= params.beta * vcc2 { 1 } else { 2 };
        self.announce(node, 10, &[], 1);
        if let Some(entry) = node.entry {
            if self.first_switch.is_none() {
                self.first_switch = Some(entry.clone());
            }
        }
        if self.cfg.audit {
            let l2 = crate::cover::lemma2_from_partition(&self.g, part);
            self.lemma2_samples.push(Lemma2Sample {
                vcc1: part.vcc1_len(),
                vcc2: part.vcc2_len(),
                potential_sum: l2.slack + vcc2 - Rational::from_integer(3) * vcc1,
                slack: l2.slack,
                holds: l2.holds,
            });
            if !l2.holds {
                let msg = format!(
                    "potential sum below |VCC2| - 3|VCC1| by {}",
                    format_decimal(&-l2.slack)
                );
                self.fail(node, FailureKind::Lemma2, 10, &[], None, msg);
            }
            let entry = node.entry.expect("audit computes measures");
            if q_next == 1 && entry.m2.is_some_and(|m2| m2 > entry.m1) {
                self.fail(
                    node,
                    FailureKind::SwitchOrder,
                    10,
                    &[],
                    None,
                    "m2 exceeds m1 at the switch".into(),
                );
            }
        }
        self.wvc_alg(q_next, node.depth + 1)
    }

    /// Rules 11 and 12. Returns `None` when every potential is zero.
    #[allow(clippy::type_complexity)]
    fn pair_rules(
        &self,
        part: &CoverPartition,
    ) -> Result<Option<(u8, Vec<VertexId>, Plan)>, EngineError> {
        let g = &self.g;
        let pt = potential_table(g, part);
        let positive = |v: VertexId| pt.value_of(v).is_some_and(|p| p.is_positive());
        let class = |x: VertexId| pt.class_of(x).expect("outside vertex");

        // Rule 11
        let strong = g.vertices().find(|&v| part.is_vccs2(v) && positive(v));
        if let Some(v) = strong {
            let missing = EngineError::WitnessNotFound {
                rule: 11,
                vertex: v,
            };
            let vp = part.partner(v).expect("pair vertex");
            let xs: Vec<VertexId> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&x| x != vp)
                .collect();
            let (x1, x2) = match xs[..] {
                [x1] => (x1, None),
                [a, b] if class(b) == OutsideClass::Good && class(a) != OutsideClass::Bad => {
                    (a, Some(b))
                }
                [a, b] if class(a) == OutsideClass::Good && class(b) != OutsideClass::Bad => {
                    (b, Some(a))
                }
                _ => return Err(missing),
            };
            if class(x1) == OutsideClass::Bad {
                return Err(missing);
            }
            let u1 = *g
                .neighbors(x1)
                .iter()
                .find(|&&y| y != v && part.is_vcc2(y))
                .ok_or(missing.clone())?;
            let u1p = part.partner(u1).expect("pair vertex");
            let u2 = match x2 {
                Some(x2) if !g.has_edge(x2, u1) => {
                    let rest: Vec<VertexId> = g
                        .neighbors(x2)
                        .iter()
                        .copied()
                        .filter(|&y| y != v)
                        .collect();
                    if rest == [u1p] {
                        None
                    } else {
                        Some(*rest.iter().find(|&&y| y != u1p).ok_or(missing.clone())?)
                    }
                }
                _ => None,
            };
            let plan = self.pair_plan(u1, u1p, u2, &[v, vp], missing)?;
            let mut witness = vec![v, vp, x1, u1, u1p];
            witness.extend(x2);
            witness.extend(u2);
            return Ok(Some((11, witness, plan)));
        }

        // Rule 12
        let weak = g
            .vertices()
            .find(|&v| part.is_vcc2(v) && !part.is_vccs2(v) && positive(v));
        if let Some(v) = weak {
            let missing = EngineError::WitnessNotFound {
                rule: 12,
                vertex: v,
            };
            let vp = part.partner(v).expect("pair vertex");
            let outside = pair_outside_neighbors(g, part, v, vp);
            let x = *outside
                .iter()
                .find(|&&x| g.has_edge(x, v) && g.has_edge(x, vp))
                .ok_or(missing.clone())?;
            let a: Vec<VertexId> = outside
                .iter()
                .copied()
                .filter(|&y| g.neighbors(y).iter().any(|&z| z != v && z != vp))
                .collect();
            let (x1, x2) = match a.len() {
                2 => (
                    *a.iter()
                        .find(|&&y| class(y) != OutsideClass::Bad)
                        .ok_or(missing.clone())?,
                    None,
                ),
                3 => {
                    let pick =
                        a.iter()
                            .flat_map(|&p| a.iter().map(move |&r| (p, r)))
                            .find(|&(p, r)| {
                                p != r
                                    && class(p) != OutsideClass::Bad
                                    && class(r) == OutsideClass::Good
                            });
                    let (p, r) = pick.ok_or(missing.clone())?;
                    (p, Some(r))
                }
                _ => return Err(missing),
            };
            let u1 = *g
                .neighbors(x1)
                .iter()
                .find(|&&y| y != v && y != vp && part.is_vcc2(y))
                .ok_or(missing.clone())?;
            let u1p = part.partner(u1).expect("pair vertex");
            let u2 = match x2 {
                Some(x2) if !g.has_edge(x2, u1) => {
                    let rest: Vec<VertexId> = g
                        .neighbors(x2)
                        .iter()
                        .copied()
                        .filter(|&y| y != v && y != vp)
                        .collect();
                    if rest == [u1p] {
                        None
                    } else {
                        Some(*rest.iter().find(|&&y| y != u1p).ok_or(missing.clone())?)
                    }
                }
                _ => None,
            };
            let plan = self.pair_plan(u1, u1p, u2, &[v, vp], missing)?;
            let mut witness = vec![v, vp, x, x1, u1, u1p];
            witness.extend(x2);
            witness.extend(u2);
            return Ok(Some((12, witness, plan)));
        }
        Ok(None)
    }

    /// B1 on `u1`, with B1 on `u2` nested in both branches when it exists.
    fn pair_plan(
        &self,
        u1: VertexId,
        u1p: VertexId,
        u2: Option<VertexId>,
        around: &[VertexId],
        missing: EngineError,
    ) -> Result<Plan, EngineError> {
        let part_u2 = |u2: VertexId| {
            let nb = self.u_neighbors(u2);
            (nb.len() == 1).then(|| nb[0])
        };
        match u2 {
            None => Ok(Plan::b1_simple(u1)),
            Some(u2) => {
                let u2p = part_u2(u2).ok_or(missing.clone())?;
                let four = [u1, u1p, u2, u2p];
                let distinct = (0..4).all(|i| (i + 1..4).all(|j| four[i] != four[j]));
                if !distinct || around.contains(&u2) {
                    return Err(missing);
                }
                Ok(Plan::b1(u1, Plan::b1_simple(u2), Plan::b1_simple(u2)))
            }
        }
    }
}

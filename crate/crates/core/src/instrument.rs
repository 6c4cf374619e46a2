//! Branching numbers, per-rule measure-decrease tables and leaf bounds.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cover::{MeasureParams, Measures};
use crate::weight::{format_decimal, serialize_decimal, serialize_opt_decimal, to_f64, Rational};

/// Base of the potential factor in the leaf bound for `q = 2` calls.
pub const POTENTIAL_BASE: f64 = 0.9808;
/// Claimed branching number of the whole algorithm.
pub const TARGET_BASE: f64 = 1.402;
/// Relative guard used by every floating-point bound comparison.
pub const GUARD: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Branching numbers
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecurrenceError {
    #[error("branching vector is empty")]
    Empty,
    #[error("branching vector entry {0} is not positive")]
    NonPositive(String),
}

/// A branching vector `(d_1, ..., d_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceSpec {
    pub decreases: Vec<Rational>,
}

impl RecurrenceSpec {
    pub fn new(decreases: Vec<Rational>) -> Result<Self, RecurrenceError> {
        if decreases.is_empty() {
            return Err(RecurrenceError::Empty);
        }
        if let Some(d) = decreases.iter().find(|d| **d <= Rational::from_integer(0)) {
            return Err(RecurrenceError::NonPositive(format_decimal(d)));
        }
        Ok(RecurrenceSpec { decreases })
    }
}

fn characteristic(ds: &[f64], x: f64) -> f64 {
    ds.iter().map(|&d| x.powf(-d)).sum::<f64>() - 1.0
}

/// The unique `x ≥ 1` with `Σ x^(−d_i) = 1`, located by bisection to within `tol`.
pub fn branching_number(rec: &RecurrenceSpec, tol: f64) -> f64 {
    let ds: Vec<f64> = rec.decreases.iter().map(to_f64).collect();
    if ds.len() == 1 {
        return 1.0;
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while characteristic(&ds, hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let tol = tol.max(f64::EPSILON);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if characteristic(&ds, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `√2 · 0.9808^(1−3β)`, the per-unit growth of the `q = 2` bound at a phase switch.
pub fn combination_constant(beta: &Rational) -> f64 {
    std::f64::consts::SQRT_2 * POTENTIAL_BASE.powf(1.0 - 3.0 * to_f64(beta))
}

/// `(√2)^(−Δm) · 0.9808^(−ΔM)` summed over branches.
pub fn lemma1_recurrence_sum(branches: &[(u32, u32)]) -> f64 {
    branches
        .iter()
        .map(|&(dm, dbig)| lemma1_factor(dm as f64, dbig as f64))
        .sum()
}

fn lemma1_factor(dm: f64, dbig: f64) -> f64 {
    std::f64::consts::SQRT_2.powf(-dm) * POTENTIAL_BASE.powf(-dbig)
}

/// `(√2)^m · 0.9808^M`.
pub fn lemma1_bound(m: usize, big_m: &Rational) -> f64 {
    std::f64::consts::SQRT_2.powf(m as f64) * POTENTIAL_BASE.powf(to_f64(big_m))
}

/// True iff a subtree rooted at a `q = 2` call with the given measures has at
/// most `(√2)^m · 0.9808^M` leaves.
pub fn lemma1_subtree_check(m: usize, big_m: &Rational, subtree_leaves: u64) -> bool {
    subtree_leaves as f64 <= lemma1_bound(m, big_m) * (1.0 + GUARD)
}

// ---------------------------------------------------------------------------
// Audit rows
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("no audit row for rule {0} (variant {1})")]
    UnknownRule(u8, usize),
    #[error("row {row} expects {expected} branches, got {got}")]
    BranchCount {
        row: String,
        expected: usize,
        got: usize,
    },
}

/// Identifies one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowKey {
    Rule4,
    Rule5,
    Rule6,
    Rule7 { cycle: usize },
    Rule11 { branches: usize },
    Rule12 { branches: usize },
    Rule13 { q: u8 },
    DeleteVcc2,
    DeleteOther,
}

impl RowKey {
    /// Row lookup by rule number; `variant` is the cycle length for rule 7,
    /// the branch count for rules 11 and 12 and the phase for rule 13.
    pub fn lookup(rule: u8, variant: usize) -> Result<RowKey, AuditError> {
        match (rule, variant) {
            (4, _) => Ok(RowKey::Rule4),
            (5, _) => Ok(RowKey::Rule5),
            (6, _) => Ok(RowKey::Rule6),
            (7, c) if c >= 4 => Ok(RowKey::Rule7 { cycle: c.min(6) }),
            (11, b @ (2 | 4)) => Ok(RowKey::Rule11 { branches: b }),
            (12, b @ (2 | 4)) => Ok(RowKey::Rule12 { branches: b }),
            (13, q @ (1 | 2)) => Ok(RowKey::Rule13 { q: q as u8 }),
            _ => Err(AuditError::UnknownRule(rule, variant)),
        }
    }

    pub fn all() -> Vec<RowKey> {
        let mut keys = vec![RowKey::Rule4, RowKey::Rule5, RowKey::Rule6];
        keys.extend((4..=6).map(|cycle| RowKey::Rule7 { cycle }));
        for b in [2, 4] {
            keys.push(RowKey::Rule11 { branches: b });
            keys.push(RowKey::Rule12 { branches: b });
        }
        keys.extend([
            RowKey::Rule13 { q: 1 },
            RowKey::Rule13 { q: 2 },
            RowKey::DeleteVcc2,
            RowKey::DeleteOther,
        ]);
        keys
    }

    pub fn from_label(label: &str) -> Option<RowKey> {
        RowKey::all().into_iter().find(|k| k.label() == label)
    }

    pub fn label(&self) -> String {
        match self {
            RowKey::Rule4 => "rule4".into(),
            RowKey::Rule5 => "rule5".into(),
            RowKey::Rule6 => "rule6".into(),
            RowKey::Rule7 { cycle } if *cycle >= 6 => "rule7-cycle6+".into(),
            RowKey::Rule7 { cycle } => format!("rule7-cycle{cycle}"),
            RowKey::Rule11 { branches } => format!("rule11-{branches}way"),
            RowKey::Rule12 { branches } => format!("rule12-{branches}way"),
            RowKey::Rule13 { q } => format!("rule13-q{q}"),
            RowKey::DeleteVcc2 => "delete-vcc2".into(),
            RowKey::DeleteOther => "delete-other".into(),
        }
    }
}

/// Whether a row's floors come straight from the analysis or are a
/// conservative case analysis of rules whose vectors are not spelled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FloorSource {
    Analysis,
    Conservative,
}

/// Per-branch requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Floor {
    /// `m1` must drop by at least this much.
    M1(Rational),
    /// `m2` must drop by at least this much.
    M2(Rational),
    /// `m` must drop by at least `dm` and the potential by at most `dbig`,
    /// checked jointly through the `(√2)^m · 0.9808^M` factor.
    Potential { dm: usize, dbig: Rational },
    /// A single deletion: `m` drops by exactly `dm` and `M` by at most `dbig`.
    Deletion { dm: usize, dbig: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRow {
    pub key: RowKey,
    pub floors: Vec<Floor>,
    pub source: FloorSource,
}

impl AuditRow {
    /// Branching vector of the row in its own measure.
    pub fn vector(&self, params: &MeasureParams) -> Vec<Rational> {
        let c = Rational::from_integer(1) + params.alpha * params.beta;
        self.floors
            .iter()
            .map(|f| match f {
                Floor::M1(d) | Floor::M2(d) => *d,
                Floor::Potential { dm, .. } | Floor::Deletion { dm, .. } => {
                    Rational::from_integer(*dm as i128)
                        * if matches!(self.key, RowKey::Rule13 { .. }) {
                            c
                        } else {
                            Rational::from_integer(1)
                        }
                }
            })
            .collect()
    }
}

pub fn audit_row(key: RowKey, params: &MeasureParams) -> AuditRow {
    let a = params.alpha;
    let int = |k: i128| Rational::from_integer(k);
    let m1 = |k: i128, alphas: i128| Floor::M1(int(k) - int(alphas) * a);
    let pot = |dm: usize, dbig: i128| Floor::Potential {
        dm,
        dbig: int(dbig),
    };
    let (floors, source) = match key {
        RowKey::Rule4 => (
            vec![m1(5, 2), m1(5, 2), m1(5, 2), m1(3, 1)],
            FloorSource::Analysis,
        ),
        RowKey::Rule5 => {
            let mut f = vec![m1(8, 3); 9];
            f.push(m1(4, 0));
            (f, FloorSource::Conservative)
        }
        RowKey::Rule6 => (vec![m1(2, 1), m1(3, 0)], FloorSource::Conservative),
        RowKey::Rule7 { cycle: 4 } => (vec![m1(4, 2), m1(4, 1), m1(4, 2)], FloorSource::Analysis),
        RowKey::Rule7 { cycle: 5 } => (vec![m1(3, 1), m1(5, 2), m1(3, 1)], FloorSource::Analysis),
        RowKey::Rule7 { .. } => (
            vec![m1(5, 2), m1(6, 2), m1(4, 1), m1(5, 2), m1(6, 2)],
            FloorSource::Analysis,
        ),
        RowKey::Rule11 { branches: 4 } | RowKey::Rule12 { branches: 4 } => (
            vec![pot(4, 8), pot(4, 6), pot(4, 6), pot(6, 8)],
            FloorSource::Analysis,
        ),
        RowKey::Rule11 { .. } | RowKey::Rule12 { .. } => {
            (vec![pot(2, 4), pot(4, 6)], FloorSource::Analysis)
        }
        RowKey::Rule13 { q: 1 } => {
            let d = int(2) * (int(1) + a * params.beta);
            (vec![Floor::M2(d), Floor::M2(d)], FloorSource::Analysis)
        }
        RowKey::Rule13 { .. } => (vec![pot(2, 0), pot(2, 0)], FloorSource::Analysis),
        RowKey::DeleteVcc2 => (
            vec![Floor::Deletion {
                dm: 2,
                dbig: int(4),
            }],
            FloorSource::Analysis,
        ),
        RowKey::DeleteOther => (
            vec![Floor::Deletion {
                dm: 0,
                dbig: int(0),
            }],
            FloorSource::Analysis,
        ),
    };
    AuditRow {
        key,
        floors,
        source,
    }
}

/// One branch that missed its floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub row: String,
    pub branch: usize,
    pub measure: String,
    pub required: String,
    pub observed: String,
    pub source: FloorSource,
}

/// Compares the measures before a step with the measures of each branch.
/// `None` marks a branch whose subtree never branches again; such branches
/// are exempt.
pub fn audit_step(
    key: RowKey,
    params: &MeasureParams,
    before: &Measures,
    after: &[Option<Measures>],
) -> Result<Vec<Violation>, AuditError> {
    let row = audit_row(key, params);
    if row.floors.len() != after.len() {
        return Err(AuditError::BranchCount {
            row: key.label(),
            expected: row.floors.len(),
            got: after.len(),
        });
    }
    let mut out = Vec::new();
    for (i, (floor, after)) in row.floors.iter().zip(after).enumerate() {
        let Some(after) = after else { continue };
        let mut miss = |measure: &str, required: String, observed: String| {
            out.push(Violation {
                row: key.label(),
                branch: i,
                measure: measure.to_string(),
                required,
                observed,
                source: row.source,
            })
        };
        match floor {
            Floor::M1(d) => {
                let dec = before.m1 - after.m1;
                if dec < *d {
                    miss(
                        "m1",
                        format!(">= {}", format_decimal(d)),
                        format_decimal(&dec),
                    );
                }
            }
            Floor::M2(d) => {
                let (Some(b), Some(a)) = (before.m2, after.m2) else {
                    miss("m2", "defined".into(), "undefined".into());
                    continue;
                };
                let dec = b - a;
                if dec < *d {
                    miss(
                        "m2",
                        format!(">= {}", format_decimal(d)),
                        format_decimal(&dec),
                    );
                }
            }
            Floor::Potential { dm, dbig } => {
                let (Some(mb), Some(ma), Some(pb), Some(pa)) =
                    (before.m, after.m, before.potential_sum, after.potential_sum)
                else {
                    miss("m", "defined".into(), "undefined".into());
                    continue;
                };
                let dec_m = mb as i64 - ma as i64;
                if dec_m < *dm as i64 {
                    miss("m", format!(">= {dm}"), dec_m.to_string());
                }
                let allowed = lemma1_factor(*dm as f64, to_f64(dbig));
                let observed = lemma1_factor(dec_m as f64, to_f64(&(pb - pa)));
                if observed > allowed * (1.0 + GUARD) {
                    miss(
                        "factor",
                        format!("<= {allowed:.6}"),
                        format!("{observed:.6}"),
                    );
                }
            }
            Floor::Deletion { dm, dbig } => {
                let (Some(mb), Some(ma), Some(pb), Some(pa)) =
                    (before.m, after.m, before.potential_sum, after.potential_sum)
                else {
                    miss("m", "defined".into(), "undefined".into());
                    continue;
                };
                let dec_m = mb as i64 - ma as i64;
                if dec_m != *dm as i64 {
                    miss("m", format!("== {dm}"), dec_m.to_string());
                }
                let dec_big = pb - pa;
                if dec_big > *dbig {
                    miss(
                        "M",
                        format!("<= {}", format_decimal(dbig)),
                        format_decimal(&dec_big),
                    );
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Floor,
    Lemma1,
    Lemma2,
    SwitchOrder,
}

/// An audit event with enough context to replay it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditFailure {
    pub kind: FailureKind,
    pub node: u64,
    pub depth: usize,
    pub q: u8,
    pub rule: u8,
    pub witness: Vec<u32>,
    pub detail: Option<Violation>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchReport {
    pub leaves: u64,
    pub nodes: u64,
    pub rule_counts: BTreeMap<String, u64>,
    pub t: usize,
    #[serde(serialize_with = "serialize_decimal")]
    pub m1_root: Rational,
    #[serde(serialize_with = "serialize_opt_decimal")]
    pub m2_at_switch: Option<Rational>,
    #[serde(serialize_with = "serialize_opt_decimal")]
    pub m_at_switch: Option<Rational>,
    #[serde(rename = "M_at_switch", serialize_with = "serialize_opt_decimal")]
    pub big_m_at_switch: Option<Rational>,
    pub audit_failures: Vec<AuditFailure>,
    pub robust_fallbacks: u64,
}

impl BranchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failures_of(&self, kind: FailureKind) -> impl Iterator<Item = &AuditFailure> {
        self.audit_failures.iter().filter(move |f| f.kind == kind)
    }
}

/// `leaves / 1.402^(m1 at root)` and whether it is at most one.
pub fn global_bound_check(report: &BranchReport) -> (bool, f64) {
    let ratio = report.leaves as f64 / TARGET_BASE.powf(to_f64(&report.m1_root));
    (ratio <= 1.0 + GUARD, ratio)
}

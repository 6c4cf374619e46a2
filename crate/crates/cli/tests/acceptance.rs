//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wvc_core::bipartite::min_weight_vc_bipartite;
use wvc_core::cover::{check_cover, lemma2_holds, partition_cover};
use wvc_core::engine::TraceEvent;
use wvc_core::graph::Bipartition;
use wvc_core::instgen::{default_corpus, generate, GenSpec, Instance, Model, WeightModel};
use wvc_core::instrument::{
    combination_constant, global_bound_check, lemma1_recurrence_sum, FailureKind, FloorSource,
    TARGET_BASE,
};
use wvc_core::oracle::exact_min_weight_vc;
use wvc_core::preprocess::min_size_vc;
use wvc_core::weight::format_decimal;
use wvc_core::{
    solve, solve_traced, EngineError, FMode, MeasureParams, Rational, Solution, SolveConfig,
    VertexSet,
};

const WVC: &str = env!("CARGO_BIN_EXE_wvc");

struct Case {
    name: String,
    inst: Instance,
}

struct Run {
    name: String,
    mode: FMode,
    result: Result<Solution, EngineError>,
}

fn case(model: Model, n: usize, seed: u64, weights: WeightModel) -> Case {
    let req = GenSpec {
        model,
        n,
        seed,
        weights,
    };
    let inst = generate(&req).unwrap_or_else(|e| panic!("{model} n={n} seed={seed}: {e}"));
    Case {
        name: format!("{model}/n{n}/s{seed}/{weights}"),
        inst,
    }
}

/// Oracle-sized corpus: four models, n <= 22, unit and integer weights.
fn small_corpus() -> Vec<Case> {
    let models = [
        Model::CubicPairing,
        Model::SubcubicErdos,
        Model::TriangleGadget,
        Model::K4Cluster,
    ];
    let mut out = Vec::new();
    for (mi, model) in models.into_iter().enumerate() {
        for seed in 0..260u64 {
            let lo = if model == Model::TriangleGadget {
                14
            } else {
                6
            };
            let mut n = lo + (seed as usize * 7 + mi) % (23 - lo);
            if model == Model::CubicPairing {
                n &= !1;
            }
            let weights = if seed % 2 == 0 {
                WeightModel::Unit
            } else {
                WeightModel::UniformInt(9)
            };
            out.push(case(model, n, 1000 * mi as u64 + seed, weights));
        }
    }
    out
}

/// Larger corpus for the leaf-bound criterion: n between 24 and 60.
fn large_corpus() -> Vec<Case> {
    let models = [
        Model::CubicPairing,
        Model::SubcubicErdos,
        Model::TriangleGadget,
        Model::K4Cluster,
        Model::Bipartite,
    ];
    let mut out = Vec::new();
    for (mi, model) in models.into_iter().enumerate() {
        for seed in 0..50u64 {
            let mut n = 24 + (seed as usize * 11 + mi) % 37;
            if model == Model::CubicPairing {
                n &= !1;
            }
            let weights = [
                WeightModel::Unit,
                WeightModel::UniformInt(9),
                WeightModel::Rational,
            ][seed as usize % 3];
            out.push(case(model, n, 5000 + 1000 * mi as u64 + seed, weights));
        }
    }
    out
}

fn config(c: &Case, mode: FMode) -> SolveConfig {
    SolveConfig {
        mode,
        initial_cover: c.inst.designed_cover.clone(),
        ..Default::default()
    }
}

fn run_all(cases: &[Case]) -> Vec<Run> {
    cases
        .par_iter()
        .flat_map_iter(|c| {
            [FMode::Strict, FMode::Robust]
                .into_iter()
                .map(move |mode| Run {
                    name: c.name.clone(),
                    mode,
                    result: solve(&c.inst.graph, &c.inst.weights, &config(c, mode)),
                })
        })
        .collect()
}

fn wvc(args: &[&str]) -> Output {
    Command::new(WVC).args(args).output().expect("run wvc")
}

fn stdout_of(args: &[&str]) -> String {
    let out = wvc(args);
    assert!(
        out.status.success(),
        "wvc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn criterion_1(small: &[Case], runs: &[Run], elapsed: Duration) -> Result<String, String> {
    let t0 = Instant::now();
    let oracle: Vec<Rational> = small
        .par_iter()
        .map(|c| {
            exact_min_weight_vc(&c.inst.graph, &c.inst.weights)
                .unwrap()
                .weight
        })
        .collect();
    let total = elapsed + t0.elapsed();
    let mut mismatches = Vec::new();
    for (i, c) in small.iter().enumerate() {
        for run in &runs[2 * i..2 * i + 2] {
            assert_eq!(run.name, c.name);
            match &run.result {
                Ok(sol) if sol.outcome.weight == oracle[i] => {
                    let cover =
                        VertexSet::from_vertices(c.inst.graph.n_total(), &sol.outcome.cover);
                    if check_cover(&c.inst.graph, &cover).is_err()
                        || c.inst.weights.total(&sol.outcome.cover) != oracle[i]
                    {
                        mismatches.push(format!("{} {:?}: invalid cover", c.name, run.mode));
                    }
                }
                Ok(sol) => mismatches.push(format!(
                    "{} {:?}: solver {} vs oracle {}",
                    c.name,
                    run.mode,
                    format_decimal(&sol.outcome.weight),
                    format_decimal(&oracle[i])
                )),
                Err(e) => mismatches.push(format!("{} {:?}: {e}", c.name, run.mode)),
            }
        }
    }
    ensure(
        small.len() >= 1000,
        format!("only {} instances", small.len()),
    )?;
    ensure(
        mismatches.is_empty(),
        format!(
            "{} mismatches, first: {}",
            mismatches.len(),
            mismatches.join("; ")
        ),
    )?;
    ensure(total < Duration::from_secs(300), format!("took {total:?}"))?;
    Ok(format!(
        "{} instances x 2 modes, 0 mismatches, {:.2}s",
        small.len(),
        total.as_secs_f64()
    ))
}

fn criterion_2() -> Result<String, String> {
    let weights = [
        WeightModel::Unit,
        WeightModel::UniformInt(9),
        WeightModel::Rational,
    ];
    let mut checked = 0;
    for seed in 0..330u64 {
        let n = 2 + (seed as usize * 3) % 19;
        let c = case(
            Model::Bipartite,
            n,
            20_000 + seed,
            weights[seed as usize % 3],
        );
        let (g, w) = (&c.inst.graph, &c.inst.weights);
        let Bipartition::Coloring(coloring) = g.bipartition() else {
            return Err(format!("{} is not bipartite", c.name));
        };
        let got =
            min_weight_vc_bipartite(g, w, &coloring).map_err(|e| format!("{}: {e}", c.name))?;
        let want = exact_min_weight_vc(g, w).unwrap().weight;
        ensure(
            got.weight == want,
            format!("{}: min-cut {} vs oracle {}", c.name, got.weight, want),
        )?;
        ensure(
            got.weight == got.flow_value,
            format!(
                "{}: cover {} vs flow {}",
                c.name, got.weight, got.flow_value
            ),
        )?;
        ensure(
            w.total(&got.cover) == got.weight,
            format!("{}: reported weight differs from cover", c.name),
        )?;
        ensure(
            check_cover(g, &VertexSet::from_vertices(g.n_total(), &got.cover)).is_ok(),
            format!("{}: not a cover", c.name),
        )?;
        checked += 1;
    }
    Ok(format!(
        "{checked} bipartite instances, cover = oracle = max-flow"
    ))
}

fn criterion_3() -> Result<String, String> {
    let checks: [(&[&str], f64); 6] = [
        (&["4.688", "4.688", "4.688", "2.844"], 1.402),
        (&["--row", "rule4"], 1.402),
        (&["--row", "rule7-cycle4"], 1.342),
        (&["--row", "rule7-cycle5"], 1.389),
        (&["--row", "rule7-cycle6+"], 1.395),
        (&["--row", "rule13-q1"], 1.402),
    ];
    let mut got = Vec::new();
    for (args, want) in checks {
        let mut full = vec!["bound"];
        full.extend_from_slice(args);
        let text = stdout_of(&full);
        let x: f64 = text
            .trim()
            .parse()
            .map_err(|_| format!("unparsable output `{text}`"))?;
        ensure(
            (x - want).abs() <= 1e-3,
            format!("bound {args:?} = {x}, expected {want}"),
        )?;
        got.push(format!("{x:.4}"));
    }
    Ok(format!(
        "rule4 {}/{}, rule7 {}/{}/{}, rule13 {}",
        got[0], got[1], got[2], got[3], got[4], got[5]
    ))
}

fn criterion_4() -> Result<String, String> {
    let p = MeasureParams::default();
    let c = combination_constant(&p.beta);
    let four = lemma1_recurrence_sum(&[(4, 8), (4, 6), (4, 6), (6, 8)]);
    let two = lemma1_recurrence_sum(&[(2, 4), (4, 6)]);
    ensure(
        c <= TARGET_BASE && (c - 1.4013).abs() <= 1e-3,
        format!("combination constant {c}"),
    )?;
    ensure(
        four <= 1.0 && (four - 0.9996).abs() <= 1e-3,
        format!("four-branch sum {four}"),
    )?;
    ensure(
        two <= 1.0 && (two - 0.821).abs() <= 1e-3,
        format!("two-branch sum {two}"),
    )?;
    Ok(format!(
        "constant {c:.4}, Lemma-1 sums {four:.4} and {two:.4}"
    ))
}

/// Random minimal covers: drop vertices in shuffled order while the rest
/// still covers every edge.
fn random_minimal_cover(inst: &Instance, rng: &mut ChaCha8Rng) -> VertexSet {
    let g = &inst.graph;
    let mut u = VertexSet::from_vertices(g.n_total(), &g.vertices().collect::<Vec<_>>());
    let mut order: Vec<_> = g.vertices().collect();
    order.shuffle(rng);
    for v in order {
        if g.neighbors(v).iter().all(|&x| u.contains(x)) {
            u.remove(v);
        }
    }
    u
}

fn criterion_5(runs: &[&Run]) -> Result<String, String> {
    let mut engine_samples = 0usize;
    let mut violations = Vec::new();
    for run in runs {
        if let Ok(sol) = &run.result {
            for s in &sol.diagnostics.lemma2_samples {
                engine_samples += 1;
                if !s.holds {
                    violations.push(format!(
                        "{} {:?}: slack {}",
                        run.name,
                        run.mode,
                        format_decimal(&s.slack)
                    ));
                }
            }
            for f in sol.report.failures_of(FailureKind::Lemma2) {
                violations.push(format!("{} {:?}: {}", run.name, run.mode, f.message));
            }
        }
    }
    let models = [
        Model::CubicPairing,
        Model::SubcubicErdos,
        Model::TriangleGadget,
        Model::K4Cluster,
        Model::Bipartite,
        Model::Cycle,
        Model::Path,
    ];
    let mut synthetic = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..400u64 {
        let model = models[seed as usize % models.len()];
        let mut n = 14 + (seed as usize * 13) % 47;
        if model == Model::CubicPairing {
            n &= !1;
        }
        let c = case(model, n, 30_000 + seed, WeightModel::Unit);
        let mut covers = vec![VertexSet::from_vertices(n, &min_size_vc(&c.inst.graph))];
        covers.extend((0..6).map(|_| random_minimal_cover(&c.inst, &mut rng)));
        for u in covers {
            if !partition_cover(&c.inst.graph, &u).unwrap().is_good() {
                continue;
            }
            let l2 = lemma2_holds(&c.inst.graph, &u).unwrap();
            synthetic += 1;
            if !l2.holds {
                violations.push(format!(
                    "{} synthetic cover: slack {}",
                    c.name,
                    format_decimal(&l2.slack)
                ));
            }
        }
    }
    let total = engine_samples + synthetic;
    ensure(total >= 1000, format!("only {total} good covers sampled"))?;
    ensure(
        violations.is_empty(),
        format!(
            "{} violations, first: {}",
            violations.len(),
            violations.first().cloned().unwrap_or_default()
        ),
    )?;
    Ok(format!("{total} good covers ({engine_samples} engine switches, {synthetic} synthetic), 0 violations"))
}

fn criterion_6(runs: &[&Run]) -> Result<String, String> {
    let mut analysis = Vec::new();
    let mut conservative = Vec::new();
    let mut firings: BTreeMap<String, u64> = BTreeMap::new();
    let mut strict_runs = 0;
    for run in runs.iter().filter(|r| r.mode == FMode::Strict) {
        let Ok(sol) = &run.result else { continue };
        strict_runs += 1;
        for (k, v) in &sol.diagnostics.row_firings {
            *firings.entry(k.clone()).or_default() += v;
        }
        for f in &sol.report.audit_failures {
            let context = format!("{}: {}", run.name, serde_json::to_string(f).unwrap());
            match (&f.kind, &f.detail) {
                (FailureKind::Floor, Some(v)) if v.source == FloorSource::Conservative => {
                    conservative.push(context)
                }
                (FailureKind::Floor | FailureKind::SwitchOrder, _) => analysis.push(context),
                _ => {}
            }
        }
    }
    for c in &conservative {
        println!("    conservative-floor violation {c}");
    }
    let derived_firings =
        firings.get("rule5").copied().unwrap_or(0) + firings.get("rule6").copied().unwrap_or(0);
    let audited: u64 = firings.values().sum();
    ensure(
        analysis.is_empty(),
        format!(
            "{} analysis-row violations, first: {}",
            analysis.len(),
            analysis.join("; ")
        ),
    )?;
    ensure(
        conservative.len() as f64 <= 0.01 * derived_firings as f64,
        format!(
            "{} conservative violations over {derived_firings} rule 5/6 firings",
            conservative.len()
        ),
    )?;
    let rows: Vec<String> = firings.iter().map(|(k, v)| format!("{k}={v}")).collect();
    Ok(format!(
        "{strict_runs} strict runs, {audited} audited steps, 0 analysis violations, {} of {derived_firings} rule 5/6 firings below floor [{}]",
        conservative.len(),
        rows.join(" ")
    ))
}

fn criterion_7(large: &[Case], runs: &[Run]) -> Result<String, String> {
    let mut ratios = Vec::new();
    let mut excluded = 0;
    let mut lemma1_checks = 0;
    let mut lemma1_failures = Vec::new();
    let mut errors = Vec::new();
    for (c, run) in large
        .iter()
        .zip(runs.iter().filter(|r| r.mode == FMode::Strict))
    {
        assert_eq!(c.name, run.name);
        match &run.result {
            Ok(sol) => {
                ratios.push(global_bound_check(&sol.report).1);
                lemma1_checks += sol.diagnostics.lemma1_checks;
                lemma1_failures.extend(
                    sol.report
                        .failures_of(FailureKind::Lemma1)
                        .map(|f| format!("{}: {}", c.name, f.message)),
                );
            }
            Err(EngineError::FPropertyViolation { depth: 0, .. }) => excluded += 1,
            Err(e) => errors.push(format!("{}: {e}", c.name)),
        }
    }
    let within_1 = ratios.iter().filter(|&&r| r <= 1.0).count();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    ensure(
        errors.is_empty(),
        format!("solver errors: {}", errors.join("; ")),
    )?;
    ensure(
        ratios.len() >= 200,
        format!(
            "only {} instances solved ({excluded} unsatisfied at the root)",
            ratios.len()
        ),
    )?;
    ensure(
        within_1 as f64 >= 0.99 * ratios.len() as f64,
        format!("{within_1} of {} within ratio 1", ratios.len()),
    )?;
    ensure(max <= 2.0, format!("max ratio {max}"))?;
    ensure(
        lemma1_failures.is_empty(),
        format!(
            "{} Lemma 1 failures, first: {}",
            lemma1_failures.len(),
            lemma1_failures.join("; ")
        ),
    )?;
    Ok(format!(
        "{} instances (n <= 60, {excluded} excluded), {within_1} with ratio <= 1, max ratio {max:.4}, {lemma1_checks} q=2 subtrees within Lemma 1",
        ratios.len()
    ))
}

fn criterion_8(small: &[Case]) -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let twice = |args: &[&str], files: &[String]| -> Result<(), String> {
        let mut seen = Vec::new();
        for _ in 0..2 {
            let out = wvc(args);
            let mut bytes = vec![
                out.status.code().unwrap_or(-1).to_string().into_bytes(),
                out.stdout,
                out.stderr,
            ];
            bytes.extend(files.iter().map(|f| std::fs::read(f).unwrap_or_default()));
            seen.push(bytes);
        }
        ensure(
            seen[0] == seen[1],
            format!("wvc {args:?} differs between runs"),
        )
    };
    let gen_files = [p("a.wgr"), p("b.wgr"), p("c.wgr")];
    twice(
        &[
            "gen",
            "cubic-pairing",
            "20",
            "--seed",
            "7",
            "-o",
            &gen_files[0],
        ],
        &[gen_files[0].clone()],
    )?;
    twice(
        &[
            "gen",
            "triangle-gadget",
            "30",
            "--seed",
            "3",
            "--weights",
            "rational",
            "-o",
            &gen_files[1],
        ],
        &[gen_files[1].clone()],
    )?;
    twice(
        &[
            "gen",
            "subcubic-erdos",
            "40",
            "--seed",
            "11",
            "--weights",
            "uniform-int:9",
            "-o",
            &gen_files[2],
        ],
        &[gen_files[2].clone()],
    )?;
    for f in &gen_files {
        for mode in ["strict", "robust"] {
            let (stats, trace) = (p("stats.json"), p("trace.jsonl"));
            twice(
                &[
                    "solve", f, "--mode", mode, "--stats", &stats, "--trace", &trace,
                ],
                &[stats.clone(), trace.clone()],
            )?;
        }
    }
    twice(&["bound", "4.688", "4.688", "4.688", "2.844"], &[])?;
    let corpus = p("corpus");
    twice(&["corpus", &corpus], &[])?;
    twice(&["audit", &corpus], &[])?;
    twice(&["audit"], &[])?;
    for c in small.iter().step_by(20) {
        let cfg = config(c, FMode::Robust);
        let mut traces: Vec<(Vec<TraceEvent>, String, Vec<u32>)> = Vec::new();
        for _ in 0..2 {
            let mut events = Vec::new();
            let sol = solve_traced(&c.inst.graph, &c.inst.weights, &cfg, &mut events).unwrap();
            traces.push((
                events,
                sol.report.to_json(),
                sol.outcome.cover.iter().map(|v| v.0).collect(),
            ));
        }
        ensure(
            traces[0] == traces[1],
            format!("{}: trace differs between runs", c.name),
        )?;
    }
    ensure(
        Path::new(&corpus).read_dir().unwrap().count() == default_corpus().len(),
        "corpus size".into(),
    )?;
    Ok("gen, solve (stats + trace), bound, corpus and audit byte-identical across runs; library traces identical".into())
}

fn criterion_9(all: &[&[Run]]) -> Result<String, String> {
    let mut total = 0;
    let mut stuck = Vec::new();
    for runs in all {
        for run in runs.iter() {
            total += 1;
            if let Err(e @ EngineError::StuckState { .. }) = &run.result {
                stuck.push(format!("{} {:?}: {e}", run.name, run.mode));
            }
        }
    }
    ensure(
        stuck.is_empty(),
        format!("{} StuckState, first: {}", stuck.len(), stuck.join("; ")),
    )?;
    Ok(format!("{total} runs across all corpora, 0 StuckState"))
}

fn main() {
    let t0 = Instant::now();
    let small = small_corpus();
    let small_runs = run_all(&small);
    let small_elapsed = t0.elapsed();
    let large = large_corpus();
    let large_runs = run_all(&large);
    let default_cases: Vec<Case> = default_corpus()
        .into_iter()
        .map(|(name, req)| Case {
            name,
            inst: generate(&req).unwrap(),
        })
        .collect();
    let default_runs = run_all(&default_cases);
    let all_runs: Vec<&Run> = small_runs
        .iter()
        .chain(&large_runs)
        .chain(&default_runs)
        .collect();

    type Check<'a> = Box<dyn FnOnce() -> Result<String, String> + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        (
            "oracle equivalence",
            Box::new(|| criterion_1(&small, &small_runs, small_elapsed)),
        ),
        ("bipartite min-cut", Box::new(criterion_2)),
        ("branching-number reproduction", Box::new(criterion_3)),
        ("analysis constants", Box::new(criterion_4)),
        ("Lemma 2 property", Box::new(|| criterion_5(&all_runs))),
        (
            "measure-decrease audit",
            Box::new(|| criterion_6(&all_runs)),
        ),
        (
            "empirical leaf bound",
            Box::new(|| criterion_7(&large, &large_runs)),
        ),
        ("determinism", Box::new(|| criterion_8(&small))),
        (
            "rule exhaustiveness",
            Box::new(|| criterion_9(&[&small_runs, &large_runs, &default_runs])),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        9 - failed,
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

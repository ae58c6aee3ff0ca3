//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use setexpand_core::class_ranking::{
    entity_class_similarity, ClassQueryEmbeddings, SimilarityConfig,
};
use setexpand_core::corpus::{EmbeddingStore, EntityId};
use setexpand_core::eval::{
    average_precision_at_k, evaluate, PlantedClusters, Query, DEFAULT_CUTOFFS,
};
use setexpand_core::expansion::{expand, resolve_seeds, ExpansionConfig};
use setexpand_core::lm::FixtureLm;
use setexpand_core::probing::ClassName;
use setexpand_core::ranking::RankedList;
use setexpand_core::selection::{aggregate_entity_ranks, AggregationMode, ScoredCandidate};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn cos(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| f64::from(*x) * f64::from(*y))
        .sum();
    let na: f64 = a.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn exhaustive_similarity(xe: &[Vec<f32>], xc: &[Vec<f32>], k: usize) -> f64 {
    let size = k.min(xe.len());
    let best: Vec<f64> = xe
        .iter()
        .map(|x| {
            xc.iter()
                .map(|c| cos(x, c))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (0u32..1 << xe.len())
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| {
            (0..xe.len())
                .filter(|i| m & (1 << i) != 0)
                .map(|i| best[i])
                .sum::<f64>()
                / size as f64
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    loop {
        let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f32>() > 1e-3 {
            return v;
        }
    }
}

fn similarity_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let class = ClassName::parse("things").unwrap();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let dim = rng.random_range(1..=8);
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=4);
        let xe: Vec<Vec<f32>> = (0..n).map(|_| random_vec(&mut rng, dim)).collect();
        let xc: Vec<Vec<f32>> = (0..6).map(|_| random_vec(&mut rng, dim)).collect();
        let store = EmbeddingStore::from_occurrences(dim, [(EntityId(0), xe.clone())]).unwrap();
        let emb = ClassQueryEmbeddings::from_vectors(class.clone(), xc.clone()).unwrap();
        let got = entity_class_similarity(EntityId(0), &store, &emb, &SimilarityConfig::with_k(k))
            .unwrap();
        let diff = (got - exhaustive_similarity(&xe, &xc, k)).abs();
        worst = worst.max(diff);
        check(diff < 1e-9, format!("fixture {i}: |diff| = {diff:e}"))?;
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(5),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "200 fixtures, max |diff| {worst:.1e}, {elapsed:.2?}"
    ))
}

fn ranked(entries: &[(u32, f64)]) -> RankedList<ScoredCandidate> {
    RankedList::from_scores(
        entries.iter().map(|&(e, s)| {
            (
                ScoredCandidate {
                    entity: EntityId(e),
                    local: s,
                    global: s,
                    combined: s,
                },
                s,
            )
        }),
        |c: &ScoredCandidate| c.entity,
    )
}

fn aggregation_fixtures() -> Outcome {
    let member: BTreeSet<EntityId> = [EntityId(0)].into();
    let lists = [ranked(&[(0, 0.9), (1, 0.5)]), ranked(&[(1, 0.9), (0, 0.5)])];
    let mrr = aggregate_entity_ranks(&lists, &member, |_| true, AggregationMode::Mrr).unwrap();
    check(
        mrr[&EntityId(0)] == 3.5,
        format!("MRR gave {}", mrr[&EntityId(0)]),
    )?;

    let single = [ranked(&[(0, 0.8), (1, 0.5), (2, 0.2)])];
    let none = BTreeSet::new();
    let comb = aggregate_entity_ranks(&single, &none, |_| true, AggregationMode::CombSum).unwrap();
    check(
        comb[&EntityId(0)] == 1.0 && comb[&EntityId(2)] == 0.0,
        format!(
            "CombSUM endpoints {} / {}",
            comb[&EntityId(0)],
            comb[&EntityId(2)]
        ),
    )?;

    for mode in [AggregationMode::Mrr, AggregationMode::CombSum] {
        let gated = aggregate_entity_ranks(&lists, &member, |e| e != EntityId(0), mode).unwrap();
        check(
            gated[&EntityId(0)] == 0.0,
            format!("{mode}: gate-false scored {}", gated[&EntityId(0)]),
        )?;
    }
    Ok("MRR 3.5, CombSUM 1.0/0.0, gate-false 0.0".into())
}

fn alpha_queries(queries: &[Query]) -> Vec<Query> {
    queries
        .iter()
        .filter(|q| q.class == "alphas")
        .cloned()
        .collect()
}

fn gate_dominance() -> Outcome {
    let bench = PlantedClusters::adversarial().generate().unwrap();
    let lm = FixtureLm::new(bench.tables.clone()).unwrap();
    let decoys: Vec<EntityId> = bench
        .vocab
        .iter()
        .filter(|(_, s)| s.starts_with("decoy"))
        .map(|(e, _)| e)
        .collect();
    let mut checked = 0;
    for query in alpha_queries(&bench.queries) {
        let seeds = resolve_seeds(&query.seeds, &bench.vocab).unwrap();
        let out = expand(
            &seeds,
            &ExpansionConfig::default(),
            &bench.vocab,
            &bench.store,
            &lm,
        )
        .unwrap();
        let ranked: Vec<EntityId> = out.ranked_entities().collect();
        let last_gate_true = ranked
            .iter()
            .rposition(|e| !out.gated_out.contains(e))
            .unwrap();
        for &d in &decoys {
            let surface = bench.vocab.surface(d);
            check(
                out.gated_out.contains(&d),
                format!("{surface} passed the gate"),
            )?;
            check(
                out.trace
                    .iter()
                    .all(|r| !r.added.iter().any(|a| a == surface)),
                format!("{surface} entered the set"),
            )?;
            let pos = ranked.iter().position(|&e| e == d).unwrap();
            check(
                pos > last_gate_true,
                format!("{surface} at {pos} above a gate-true entity"),
            )?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} (query, decoy) pairs never admitted, all ranked below gate-true entities"
    ))
}

fn planted_clusters() -> Outcome {
    let start = Instant::now();
    let bench = PlantedClusters::default().generate().unwrap();
    let lm = FixtureLm::new(bench.tables.clone()).unwrap();
    let classes: BTreeSet<&str> = bench.queries.iter().map(|q| q.class.as_str()).collect();
    check(classes.len() == 3, "expected queries from three clusters")?;
    let report = evaluate(
        &bench.queries,
        &ExpansionConfig::default(),
        &bench.vocab,
        &bench.store,
        &lm,
        &DEFAULT_CUTOFFS,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let (m10, m20) = (report.map[&10], report.map[&20]);
    check(m10 == 1.0, format!("MAP@10 {m10}"))?;
    check(m20 >= 0.95, format!("MAP@20 {m20}"))?;
    check(
        elapsed < Duration::from_secs(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "{} queries, MAP@10 {m10:.3}, MAP@20 {m20:.3}, {elapsed:.2?}",
        report.queries.len()
    ))
}

fn filtration_ablation() -> Outcome {
    let bench = PlantedClusters::adversarial().generate().unwrap();
    let lm = FixtureLm::new(bench.tables.clone()).unwrap();
    let queries = alpha_queries(&bench.queries);
    let run = |negative_gate| {
        let cfg = ExpansionConfig {
            negative_gate,
            ..ExpansionConfig::default()
        };
        evaluate(&queries, &cfg, &bench.vocab, &bench.store, &lm, &[10])
            .unwrap()
            .map[&10]
    };
    let (full, no_filter) = (run(true), run(false));
    check(
        full > no_filter,
        format!("full {full:.3} vs no filter {no_filter:.3}"),
    )?;
    Ok(format!("MAP@10 full {full:.3} > no filter {no_filter:.3}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let bin = env!("CARGO_BIN_EXE_setexpand");
    let status = Command::new(bin)
        .args(["synth", "--out-dir"])
        .arg(root)
        .output()
        .unwrap();
    check(status.status.success(), "synth failed")?;
    let text = std::fs::read_to_string(root.join("queries.json")).unwrap();
    let queries: Vec<Query> = serde_json::from_str(&text).unwrap();
    let run = |tag: &str, threads: Option<&str>| {
        let trace = root.join(format!("trace-{tag}.jsonl"));
        let mut cmd = Command::new(bin);
        cmd.arg("expand")
            .arg("--vocab")
            .arg(root.join("vocab.txt"))
            .arg("--cache")
            .arg(root.join("cache.bin"))
            .arg("--fixture")
            .arg(root.join("fixture.json"))
            .args(["--rng-seed", "7", "--trace"])
            .arg(&trace)
            .args(&queries[0].seeds);
        if let Some(n) = threads {
            cmd.args(["--threads", n]);
        }
        let out = cmd.output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        (out.stdout, std::fs::read(trace).unwrap())
    };
    let a = run("a", None);
    let b = run("b", None);
    let c = run("c", Some("1"));
    check(a.0 == b.0 && a.1 == b.1, "repeat run differs")?;
    check(a.0 == c.0 && a.1 == c.1, "single-threaded run differs")?;
    check(!a.0.is_empty() && !a.1.is_empty(), "empty output")?;
    Ok(format!(
        "3 runs byte-identical ({} output bytes, {} trace bytes)",
        a.0.len(),
        a.1.len()
    ))
}

fn map_harness() -> Outcome {
    let none: HashSet<&str> = HashSet::new();
    let truth: HashSet<&str> = ["a", "c"].into();
    let ap = average_precision_at_k(&["a", "b", "c"], &truth, &none, 3).unwrap();
    check(
        (ap - 5.0 / 6.0).abs() < 1e-9,
        format!("partial list gave {ap}"),
    )?;
    let perfect = average_precision_at_k(&["a", "c", "b"], &truth, &none, 3).unwrap();
    check(
        (perfect - 1.0).abs() < 1e-9,
        format!("perfect list gave {perfect}"),
    )?;
    Ok(format!("{ap:.4} and {perfect:.4}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("top-k similarity oracle", similarity_oracle),
        ("aggregation fixtures", aggregation_fixtures),
        ("gate dominance", gate_dominance),
        ("planted clusters end to end", planted_clusters),
        ("filtration ablation", filtration_ablation),
        ("determinism", determinism),
        ("MAP harness", map_harness),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let result = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use setexpand_core::lm::{FixtureLm, FixtureTables, LmClient};
use setexpand_core::probing::{
    beam_class_names, generate_class_names, render_class_probe, render_entity_probes, ClassName,
    GenerationConfig, HearstPattern, ProbeDraw,
};

const ASIAN: [&str; 3] = ["China", "India", "Japan"];

fn lm() -> FixtureLm {
    FixtureLm::new(FixtureTables {
        dim: 2,
        ..Default::default()
    })
    .unwrap()
    .with_predictions(
        "[MASK] such as China, India, and Japan",
        &["countries", "nations", "and"],
    )
    .with_predictions(
        "[MASK] countries such as China, India, and Japan",
        &["asian", "and", "other"],
    )
    .with_predictions(
        "[MASK] nations such as China, India, and Japan",
        &["asian", "the", "and"],
    )
    .with_predictions(
        "[MASK] asian countries such as China, India, and Japan",
        &["east", "other", ","],
    )
    .with_predictions(
        "[MASK] asian nations such as China, India, and Japan",
        &["south", "all", ","],
    )
}

fn draw() -> ProbeDraw {
    ProbeDraw {
        entities: ASIAN.map(String::from).to_vec(),
        pattern: HearstPattern::SuchAs,
    }
}

#[test]
fn class_probe_rendering() {
    let q = render_class_probe(HearstPattern::SuchAs, &ASIAN).unwrap();
    assert_eq!(q.text(), "[MASK] such as China, India, and Japan");
    let q = render_class_probe(HearstPattern::AndOther, &ASIAN).unwrap();
    assert_eq!(q.text(), "China, India, and Japan and other [MASK]");
    let q = render_class_probe(HearstPattern::SuchYAs, &["A", "B", "C"]).unwrap();
    assert_eq!(q.text(), "such [MASK] as A, B, and C");
}

#[test]
fn entity_probe_rendering() {
    let probes = render_entity_probes(&ClassName::parse("countries").unwrap());
    assert_eq!(probes.len(), 6);
    assert_eq!(probes[0].text(), "countries such as [MASK]");
    assert_eq!(probes[2].text(), "[MASK] or other countries");
    assert!(probes
        .iter()
        .all(|p| p.text().matches("[MASK]").count() == 1));
}

#[test]
fn beam_reaches_fine_grained_names() {
    let pool = beam_class_names(&draw(), &lm(), &GenerationConfig::default()).unwrap();
    for name in [
        "countries",
        "asian countries",
        "east asian countries",
        "south asian nations",
    ] {
        assert!(pool.contains(name), "missing {name}");
    }
    assert!(!pool.contains("and countries"));
    assert!(!pool.contains("other asian countries"));
    assert!(pool.len() <= GenerationConfig::default().pool_bound());
}

#[test]
fn degenerate_beam_yields_at_most_one_name() {
    let cfg = GenerationConfig {
        beam_width: 1,
        max_len: 1,
        num_samples: 1,
    };
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = generate_class_names(&ASIAN, &structural_lm(), &mut rng, &cfg).unwrap();
        assert!(pool.len() <= 1);
    }
    let single = beam_class_names(&draw(), &lm(), &cfg).unwrap();
    assert_eq!(
        single.classes().map(|c| c.surface()).collect::<Vec<_>>(),
        ["countries"]
    );
}

#[test]
fn unknown_probes_fail_loudly() {
    let lm = lm();
    let q = render_class_probe(HearstPattern::Especially, &ASIAN).unwrap();
    assert!(lm.predict_masked(&q, 3).is_err());
}

fn structural_lm() -> FixtureLm {
    let tables: FixtureTables = serde_json::from_str(
        r#"{
            "dim": 2,
            "entity_labels": {
                "China": ["countries", "economies", "nations"],
                "India": ["countries", "nations", "democracies"],
                "Japan": ["countries", "islands", "nations"],
                "Korea": ["countries", "nations", "peninsulas"]
            },
            "modifiers": {
                "countries": ["asian", "and", "large"],
                "nations": ["asian", ",", "other"],
                "economies": ["big", "the", "and"],
                "islands": ["pacific", "and", "the"],
                "democracies": ["young", "and", "the"],
                "peninsulas": ["korean", "and", "the"],
                "asian countries": ["east", "the", ","],
                "large countries": ["very", "the", ","],
                "asian nations": ["east", "the", ","],
                "big economies": ["very", "the", ","],
                "pacific islands": ["small", "the", ","],
                "young democracies": ["very", "the", ","],
                "korean peninsulas": ["two", "the", ","]
            }
        }"#,
    )
    .unwrap();
    FixtureLm::new(tables).unwrap()
}

#[test]
fn same_seed_same_pool() {
    let entities = ["China", "India", "Japan", "Korea"];
    let cfg = GenerationConfig::default();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        generate_class_names(&entities, &structural_lm(), &mut rng, &cfg).unwrap()
    };
    let a = run(11);
    assert_eq!(a, run(11));
    assert!(a.contains("countries") && a.contains("east asian countries"));
    assert!(a.len() <= cfg.pool_bound());
}

mod common;

use std::collections::{BTreeMap, HashMap};

use landscape_core::atoms::{assign_words, orthogonal_matching_pursuit};
use landscape_core::corpus::{
    build_ppmi, build_vocab, count_cooccurrence, CooccurConfig, SliceSpec, Source, SourceWeights,
    TokenizedCorpus, TokenizedDoc, Vocabulary,
};
use landscape_core::embedding::{objective_value, EmbeddingTensor, TrainConfig};
use landscape_core::measures::{
    global_distance, local_distance, negentropy_balance, AcquisitionBook, CompanyModules,
    CompanyRecord, CpiTable, Event, EventKind, Pooling, SliceView,
};
use landscape_core::pipeline::PipelineConfig;
use landscape_core::validation::{build_axis, project_on_axis};
use nalgebra::DMatrix;
use proptest::prelude::*;

const WORDS: [&str; 8] = ["ant", "bee", "cat", "dog", "eel", "fox", "gnu", "hen"];

fn corpus_of(docs: &[(Vec<usize>, Source)]) -> TokenizedCorpus {
    TokenizedCorpus {
        slices: SliceSpec::yearly(2000, 2000),
        docs: docs
            .iter()
            .enumerate()
            .map(|(i, (ids, source))| TokenizedDoc {
                id: i.to_string(),
                slice: 0,
                source: *source,
                tokens: ids.iter().map(|&w| WORDS[w].to_string()).collect(),
            })
            .collect(),
        skipped_out_of_range: 0,
        skipped_empty: 0,
    }
}

fn source() -> impl Strategy<Value = Source> {
    prop_oneof![
        Just(Source::News),
        Just(Source::Patent),
        Just(Source::Other)
    ]
}

fn docs() -> impl Strategy<Value = Vec<(Vec<usize>, Source)>> {
    prop::collection::vec(
        (prop::collection::vec(0..WORDS.len(), 1..12), source()),
        1..8,
    )
}

/// Direct double loop over every ordered pair of positions.
fn naive_counts(
    docs: &[(Vec<usize>, Source)],
    vocab: &Vocabulary,
    cfg: &CooccurConfig,
) -> HashMap<(usize, usize), f64> {
    let mut out = HashMap::new();
    for (ids, src) in docs {
        let kept: Vec<usize> = ids.iter().filter_map(|&w| vocab.id(WORDS[w])).collect();
        for i in 0..kept.len() {
            for j in 0..kept.len() {
                let d = i.abs_diff(j);
                if d == 0 || d > cfg.window || kept[i] == kept[j] {
                    continue;
                }
                let base = cfg.weights.weight(*src);
                let w = if cfg.distance_decay {
                    base / d as f64
                } else {
                    base
                };
                *out.entry((kept[i], kept[j])).or_insert(0.0) += w;
            }
        }
    }
    out
}

fn vocab_of(words: &[String]) -> Vocabulary {
    let corpus = TokenizedCorpus {
        slices: SliceSpec::yearly(2000, 2000),
        docs: vec![TokenizedDoc {
            id: "v".into(),
            slice: 0,
            source: Source::Other,
            tokens: words.to_vec(),
        }],
        skipped_out_of_range: 0,
        skipped_empty: 0,
    };
    build_vocab(&corpus, 1).unwrap()
}

fn acquisition(year: i32, price: f64) -> Event {
    Event {
        kind: EventKind::Acquisition,
        date: chrono::NaiveDate::from_ymd_opt(year, 6, 1).unwrap(),
        price_usd: Some(price),
        investors: vec![],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cooccurrence_matches_naive_count(
        docs in docs(),
        window in 1usize..6,
        decay in any::<bool>(),
        min_count in 1u64..3,
        w in (0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0),
    ) {
        let corpus = corpus_of(&docs);
        let vocab = match build_vocab(&corpus, min_count) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        let cfg = CooccurConfig {
            window,
            weights: SourceWeights { news: w.0, patent: w.1, other: w.2 },
            distance_decay: decay,
        };
        let got = &count_cooccurrence(&corpus, &vocab, &cfg).unwrap()[0];
        let want = naive_counts(&docs, &vocab, &cfg);
        for a in 0..vocab.len() {
            for b in 0..vocab.len() {
                let expect = want.get(&(a, b)).copied().unwrap_or(0.0);
                prop_assert!((got.pair(a, b) - expect).abs() < 1e-9, "({a},{b}) {} vs {expect}", got.pair(a, b));
            }
        }
        prop_assert!(got.pairs.is_symmetric());
    }

    #[test]
    fn ppmi_is_symmetric_nonnegative_and_weight_scale_free(docs in docs(), s in 0.05f64..20.0) {
        let corpus = corpus_of(&docs);
        let vocab = build_vocab(&corpus, 1).unwrap();
        let base = CooccurConfig::default();
        let scaled = CooccurConfig { weights: base.weights.scaled(s), ..base };
        let c1 = &count_cooccurrence(&corpus, &vocab, &base).unwrap()[0];
        let c2 = &count_cooccurrence(&corpus, &vocab, &scaled).unwrap()[0];
        for a in 0..vocab.len() {
            for b in 0..vocab.len() {
                prop_assert!((c2.pair(a, b) - s * c1.pair(a, b)).abs() < 1e-9 * (1.0 + c2.pair(a, b)));
            }
        }
        let p1 = build_ppmi(c1, 1.0).unwrap();
        let p2 = build_ppmi(c2, 1.0).unwrap();
        for a in 0..vocab.len() {
            for b in 0..vocab.len() {
                prop_assert!(p1.get(a, b) >= 0.0);
                prop_assert_eq!(p1.get(a, b), p1.get(b, a));
                prop_assert!((p1.get(a, b) - p2.get(a, b)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn larger_shift_never_raises_ppmi(docs in docs(), shift in 1.0f64..10.0) {
        let corpus = corpus_of(&docs);
        let vocab = build_vocab(&corpus, 1).unwrap();
        let c = &count_cooccurrence(&corpus, &vocab, &CooccurConfig::default()).unwrap()[0];
        let lo = build_ppmi(c, 1.0).unwrap();
        let hi = build_ppmi(c, shift).unwrap();
        for a in 0..vocab.len() {
            for b in 0..vocab.len() {
                prop_assert!(hi.get(a, b) <= lo.get(a, b) + 1e-12);
            }
        }
    }

    #[test]
    fn objective_is_nonnegative(seed in any::<u64>(), n in 2usize..8, k in 1usize..4) {
        let mut r = common::rng(seed);
        let y: Vec<_> = (0..2)
            .map(|t| landscape_core::corpus::PpmiMatrix { slice: t, values: common::random_sym(&mut r, n, 0.5) })
            .collect();
        let u: Vec<_> = (0..2).map(|_| common::random_matrix(&mut r, n, k, 1.0)).collect();
        let cfg = TrainConfig { k, ..TrainConfig::default() };
        prop_assert!(objective_value(&y, &u, &cfg).unwrap() >= 0.0);
    }

    #[test]
    fn omp_respects_sparsity_and_beats_the_empty_code(seed in any::<u64>(), s in 1usize..5) {
        let mut r = common::rng(seed);
        let mut dict = common::random_matrix(&mut r, 12, 6, 1.0);
        for mut row in dict.row_iter_mut() {
            let n = row.norm();
            row /= n;
        }
        let x: Vec<f64> = common::random_matrix(&mut r, 1, 6, 1.0).iter().copied().collect();
        let code = orthogonal_matching_pursuit(&x, &dict, s);
        prop_assert!(code.len() <= s);
        let mut res = x.clone();
        for &(a, c) in &code {
            for (d, v) in res.iter_mut().enumerate() {
                *v -= c * dict[(a, d)];
            }
        }
        let before: f64 = x.iter().map(|v| v * v).sum();
        let after: f64 = res.iter().map(|v| v * v).sum();
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn measures_ignore_order_repetition_and_vector_scale(
        seed in any::<u64>(),
        picks in prop::collection::vec(0usize..20, 1..15),
        repeat in prop::collection::vec(0usize..20, 0..5),
        c in 0.01f64..100.0,
    ) {
        let mut r = common::rng(seed);
        let words: Vec<String> = (0..20).map(|i| format!("w{i:02}")).collect();
        let vocab = vocab_of(&words);
        let vectors = common::random_matrix(&mut r, 20, 4, 1.0);
        let atoms = common::random_matrix(&mut r, 4, 4, 1.0);
        let asg = assign_words(&atoms, &vectors);
        let scaled = &vectors * c;
        let view = SliceView { vocab: &vocab, vectors: &vectors, assignment: &asg };
        let view_scaled = SliceView { vocab: &vocab, vectors: &scaled, assignment: &asg };

        let tokens: Vec<&str> = picks.iter().map(|&i| words[i].as_str()).collect();
        let mut shuffled: Vec<&str> = tokens.iter().rev().copied().collect();
        shuffled.extend(repeat.iter().filter(|&&i| picks.contains(&i)).map(|&i| words[i].as_str()));

        let all = |m: &CompanyModules| {
            [
                local_distance(m, 2, Pooling::Pairs).value,
                local_distance(m, 2, Pooling::Regions).value,
                global_distance(m, 2).value,
                negentropy_balance(m).value,
            ]
        };
        let a = all(&CompanyModules::new(&tokens, &view));
        let b = all(&CompanyModules::new(&shuffled, &view));
        let d = all(&CompanyModules::new(&tokens, &view_scaled));
        for i in 0..4 {
            prop_assert!((a[i] - b[i]).abs() < 1e-12);
            prop_assert!((a[i] - d[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn high_price_label_is_monotone(
        prices in prop::collection::vec(1.0f64..1e9, 1..30),
        probe in (1.0f64..1e9, 1.0f64..1e9),
    ) {
        let cpi = CpiTable::new(BTreeMap::from([(2015, 100.0)]), 2015).unwrap();
        let companies: Vec<CompanyRecord> = prices
            .iter()
            .enumerate()
            .map(|(i, &p)| CompanyRecord {
                id: format!("c{i}"),
                description: String::new(),
                founded: chrono::NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
                industry: "x".into(),
                events: vec![acquisition(2015, p)],
                snapshots: vec![],
            })
            .collect();
        let book = AcquisitionBook::build(&companies, &cpi).unwrap();
        let (lo, hi) = if probe.0 <= probe.1 { probe } else { (probe.1, probe.0) };
        prop_assert!(!book.is_high("x", lo) || book.is_high("x", hi));
        let n_high = prices.iter().filter(|&&p| book.is_high("x", cpi.deflate(p, 2015).unwrap())).count();
        prop_assert!(n_high >= (3 * prices.len()).div_ceil(10));
        prop_assert!(!book.is_high("other", hi));
    }

    #[test]
    fn swapping_poles_negates_the_axis(seed in any::<u64>(), probe in prop::collection::vec(-1.0f64..1.0, 3)) {
        let mut r = common::rng(seed);
        let words: Vec<String> = (0..6).map(|i| format!("p{i}")).collect();
        let vocab = vocab_of(&words);
        let u = EmbeddingTensor::new(vec![common::random_matrix(&mut r, 6, 3, 1.0)], vec![2000]).unwrap();
        let pos = words[..3].to_vec();
        let neg = words[3..].to_vec();
        let fwd = build_axis(&u, &vocab, 0, &pos, &neg).unwrap();
        let back = build_axis(&u, &vocab, 0, &neg, &pos).unwrap();
        for (a, b) in fwd.vector.iter().zip(&back.vector) {
            prop_assert!((a + b).abs() < 1e-12);
        }
        let norm: f64 = fwd.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        if let Some(p) = project_on_axis(&probe, &fwd) {
            let flipped: Vec<f64> = probe.iter().map(|x| -x).collect();
            prop_assert!((p + project_on_axis(&flipped, &fwd).unwrap()).abs() < 1e-12);
            prop_assert!((p + project_on_axis(&probe, &back).unwrap()).abs() < 1e-12);
            prop_assert!(p.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn config_survives_toml_round_trip(
        seed in proptest::option::of(any::<u32>()),
        k in 1usize..100,
        lambda in 0.0f64..100.0,
        window in 1usize..10,
        quantiles in 1usize..20,
    ) {
        let mut cfg = PipelineConfig { seed: seed.map(u64::from), ..PipelineConfig::default() };
        cfg.train.k = k;
        cfg.train.lambda = lambda;
        cfg.ingest.window = window;
        cfg.report.quantiles = quantiles;
        let back = PipelineConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn assignment_ignores_word_scale() {
    let mut r = common::rng(11);
    let words = common::random_matrix(&mut r, 30, 5, 1.0);
    let atoms = common::random_matrix(&mut r, 6, 5, 1.0);
    let scaled = DMatrix::from_fn(30, 5, |i, c| words[(i, c)] * (i as f64 + 0.5));
    assert_eq!(
        assign_words(&atoms, &words).atom,
        assign_words(&atoms, &scaled).atom
    );
}

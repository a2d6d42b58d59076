//! Acceptance suite. Each criterion prints a single PASS/FAIL line; the
//! process fails if any criterion does.

mod common;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use persona::c45::{
    best_split, entropy, grow_tree, prune, top_features, Column, ColumnKind, Dataset, Split, TrainParams,
};
use persona::cli::{self, labeled_dataset, report_table, run_cv, train_model, PipelineConfig, ThresholdScope};
use persona::discretize::{compute_thresholds, Mode};
use persona::eval::{cross_validate, f_measure, prf, ConfusionMatrix};
use persona::inventory::{read_inventories, score_bfi, scoring_key, InventoryResponse};
use persona::Dimension;

use common::{cohort, fixture, planted, prepare};

fn verdict(id: u32, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let in_time = elapsed <= limit;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "{status} [{id}] {name}: {detail} ({:.2}s, limit {}s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its time limit");
}

fn criterion_1_discretization_arithmetic() {
    let start = Instant::now();
    // Score sets with mean 2.95 and population sigma 0.64 exactly.
    let sets: Vec<Vec<f64>> = vec![
        vec![2.95 - 0.64, 2.95 + 0.64],
        vec![2.95 - 0.64, 2.95 + 0.64, 2.95 - 0.64, 2.95 + 0.64],
        {
            let s = 0.64 / 1.25f64.sqrt();
            [-1.5, -0.5, 0.5, 1.5].iter().map(|z| 2.95 + z * s).collect()
        },
    ];
    let mut ok = true;
    let mut detail = String::new();
    for scores in &sets {
        let t = compute_thresholds(Dimension::Extraversion, scores).unwrap();
        let a = format!("{:.2}", t.alpha);
        let b = format!("{:.2}", t.beta);
        ok &= a == "2.31" && b == "3.59";
        detail = format!("alpha {a}, beta {b}");
    }
    verdict(1, "discretization arithmetic", ok, start.elapsed(), Duration::from_secs(1), &detail);
}

fn log2_entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Exhaustive split search written from the definitions: every feature,
/// every midpoint between distinct sorted values, gain ratio over the
/// branch partition, mean-gain floor, first maximum in column then
/// threshold order.
fn oracle_split(data: &Dataset, min_leaf: usize) -> Option<(usize, Option<f64>)> {
    const EPS: f64 = 1e-12;
    let k = data.classes.len();
    let n = data.len();
    let parent: Vec<usize> = (0..k).map(|c| data.labels.iter().filter(|&&l| l == c).count()).collect();
    let h_parent = log2_entropy(&parent);
    let mut cands: Vec<(usize, Option<f64>, f64, f64)> = Vec::new();
    let score = |groups: &[Vec<usize>]| -> (f64, f64) {
        let mut rem = 0.0;
        let mut info = 0.0;
        for g in groups.iter().filter(|g| !g.is_empty()) {
            let counts: Vec<usize> = (0..k).map(|c| g.iter().filter(|&&i| data.labels[i] == c).count()).collect();
            let w = g.len() as f64 / n as f64;
            rem += w * log2_entropy(&counts);
            info -= w * w.log2();
        }
        let gain = h_parent - rem;
        (gain, if info > 0.0 { gain / info } else { 0.0 })
    };
    for (f, col) in data.columns.iter().enumerate() {
        match &col.kind {
            ColumnKind::Numeric => {
                let mut vals: Vec<f64> = data.rows.iter().map(|r| r[f]).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for w in vals.windows(2) {
                    let t = (w[0] + w[1]) / 2.0;
                    let left: Vec<usize> = (0..n).filter(|&i| data.rows[i][f] <= t).collect();
                    let right: Vec<usize> = (0..n).filter(|&i| data.rows[i][f] > t).collect();
                    if left.len() < min_leaf || right.len() < min_leaf {
                        continue;
                    }
                    let (g, r) = score(&[left, right]);
                    cands.push((f, Some(t), g, r));
                }
            }
            ColumnKind::Categorical { categories } => {
                let groups: Vec<Vec<usize>> = (0..categories.len())
                    .map(|c| (0..n).filter(|&i| data.rows[i][f] as usize == c).collect())
                    .collect();
                let observed = groups.iter().filter(|g| !g.is_empty()).count();
                let big = groups.iter().filter(|g| g.len() >= min_leaf).count();
                if observed >= 2 && big >= 2 {
                    let (g, r) = score(&groups);
                    cands.push((f, None, g, r));
                }
            }
        }
    }
    let positive: Vec<_> = cands.into_iter().filter(|c| c.2 > EPS).collect();
    if positive.is_empty() {
        return None;
    }
    let floor = positive.iter().map(|c| c.2).sum::<f64>() / positive.len() as f64 - EPS;
    let mut best: Option<(usize, Option<f64>, f64)> = None;
    for (f, t, g, r) in positive {
        if g < floor {
            continue;
        }
        if best.is_none_or(|b| r > b.2 + EPS) {
            best = Some((f, t, r));
        }
    }
    best.map(|(f, t, _)| (f, t))
}

fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let n = rng.random_range(2..=12);
    let n_features = rng.random_range(1..=4);
    let k = rng.random_range(2..=3);
    let columns: Vec<Column> = (0..n_features)
        .map(|f| {
            if rng.random_bool(0.25) {
                let cats = ["a", "b", "c"];
                Column::categorical(&format!("f{f}"), &cats[..rng.random_range(2..=3)])
            } else {
                Column::numeric(&format!("f{f}"))
            }
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            columns
                .iter()
                .map(|c| match &c.kind {
                    ColumnKind::Numeric => rng.random_range(0..8) as f64 / 4.0,
                    ColumnKind::Categorical { categories } => rng.random_range(0..categories.len()) as f64,
                })
                .collect()
        })
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
    let classes = (0..k).map(|c| format!("c{c}")).collect();
    Dataset::new(columns, rows, labels, classes).unwrap()
}

fn criterion_2_gain_ratio_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases = 2000;
    let mut mismatches = 0;
    let mut splits = 0;
    for _ in 0..cases {
        let data = random_dataset(&mut rng);
        let min_leaf = rng.random_range(1..=2);
        let params = TrainParams {
            min_leaf,
            ..Default::default()
        };
        let got = best_split(&data, &params).map(|(_, s)| match s {
            Split::Numeric { feature, threshold } => (feature, Some(threshold)),
            Split::Categorical { feature } => (feature, None),
        });
        let want = oracle_split(&data, min_leaf);
        splits += usize::from(want.is_some());
        if got != want {
            mismatches += 1;
        }
    }
    let detail = format!("{cases} datasets, {splits} with a split, {mismatches} mismatches");
    verdict(2, "gain-ratio oracle equivalence", mismatches == 0, start.elapsed(), Duration::from_secs(30), &detail);
}

fn criterion_3_c45_sanity() {
    let start = Instant::now();
    let e55 = entropy(&[5, 5]).unwrap();
    let e10 = entropy(&[10, 0]).unwrap();
    let e95 = entropy(&[9, 5]).unwrap();
    let entropy_ok = e55 == 1.0 && e10 == 0.0 && (e95 - 0.9403).abs() < 1e-4;

    // XOR quadrants, jittered off the unit lattice where every split has
    // zero gain.
    let xor = Dataset::new(
        vec![Column::numeric("a"), Column::numeric("b")],
        vec![vec![0.1, 0.2], vec![0.2, 0.9], vec![0.9, 0.1], vec![0.8, 0.95]],
        vec![0, 1, 1, 0],
        vec!["0".into(), "1".into()],
    )
    .unwrap();
    let params = TrainParams {
        min_leaf: 1,
        prune: false,
        ..Default::default()
    };
    let tree = persona::c45::train(&xor, &params).unwrap();
    let correct = (0..xor.len())
        .filter(|&i| tree.predict(&xor.rows[i]).unwrap().class == xor.labels[i])
        .count();
    let xor_ok = correct == xor.len();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut grew = 0;
    for _ in 0..500 {
        let data = random_dataset(&mut rng);
        let params = TrainParams {
            min_leaf: 1,
            ..Default::default()
        };
        let grown = grow_tree(&data, &params).unwrap();
        let pruned = prune(&grown, &data, params.cf);
        if pruned.node_count() > grown.node_count() {
            grew += 1;
        }
    }
    let detail = format!(
        "entropy (5,5)={e55} (10,0)={e10} (9,5)={e95:.4}; XOR {correct}/4 correct; pruning grew {grew}/500 trees"
    );
    verdict(
        3,
        "C4.5 sanity battery",
        entropy_ok && xor_ok && grew == 0,
        start.elapsed(),
        Duration::from_secs(5),
        &detail,
    );
}

fn criterion_4_metrics_arithmetic() {
    let start = Instant::now();
    let names = |k: usize| (0..k).map(|c| format!("c{c}")).collect::<Vec<_>>();
    // [[3,1],[2,4]]: class 0 P 3/5 R 3/4, class 1 P 4/5 R 4/6.
    let cm = ConfusionMatrix::from_counts(names(2), vec![vec![3, 1], vec![2, 4]]).unwrap();
    let m = prf(&cm, "X");
    let mut ok = (m.per_class[0].precision - 0.6).abs() < 1e-9
        && (m.per_class[0].recall - 0.75).abs() < 1e-9
        && (m.per_class[0].f - 2.0 / 3.0).abs() < 1e-9
        && (m.per_class[1].precision - 0.8).abs() < 1e-9
        && (m.per_class[1].recall - 2.0 / 3.0).abs() < 1e-9
        && (m.per_class[1].f - 8.0 / 11.0).abs() < 1e-9
        && (m.precision - 0.72).abs() < 1e-9
        && (m.recall - 0.7).abs() < 1e-9;
    // 3x3: rows (5,1,0), (2,6,2), (0,1,3). Column sums 7, 8, 5.
    let cm = ConfusionMatrix::from_counts(names(3), vec![vec![5, 1, 0], vec![2, 6, 2], vec![0, 1, 3]]).unwrap();
    let m3 = prf(&cm, "Y");
    let p = [5.0 / 7.0, 6.0 / 8.0, 3.0 / 5.0];
    let r = [5.0 / 6.0, 6.0 / 10.0, 3.0 / 4.0];
    let support = [6.0, 10.0, 4.0];
    for c in 0..3 {
        let f = 2.0 * p[c] * r[c] / (p[c] + r[c]);
        ok &= (m3.per_class[c].precision - p[c]).abs() < 1e-9
            && (m3.per_class[c].recall - r[c]).abs() < 1e-9
            && (m3.per_class[c].f - f).abs() < 1e-9;
    }
    let wf: f64 = (0..3).map(|c| support[c] * 2.0 * p[c] * r[c] / (p[c] + r[c])).sum::<f64>() / 20.0;
    ok &= (m3.recall - 14.0 / 20.0).abs() < 1e-9 && (m3.f - wf).abs() < 1e-9;
    let row_a = f_measure(0.725, 0.722);
    ok &= (row_a - 0.723).abs() <= 0.001;
    let detail = format!("hand matrices match; P 0.725 R 0.722 -> F {row_a:.4}");
    verdict(4, "metrics arithmetic", ok, start.elapsed(), Duration::from_secs(1), &detail);
}

/// Item -> (dimension letter, reversed) from the transcribed published key.
fn transcribed_key() -> std::collections::BTreeMap<usize, (&'static str, bool)> {
    let text = std::fs::read_to_string(fixture("bfi44_published_key.txt")).unwrap();
    let mut out = std::collections::BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (dim, items) = line.split_once(':').unwrap();
        let letter = Dimension::ALL.iter().find(|d| d.letter() == dim.trim()).unwrap().letter();
        for item in items.split(',').map(str::trim) {
            let (num, reversed) = match item.strip_suffix('R') {
                Some(n) => (n, true),
                None => (item, false),
            };
            out.insert(num.parse().unwrap(), (letter, reversed));
        }
    }
    out
}

fn criterion_5_bfi_scoring() {
    let start = Instant::now();
    let threes = score_bfi(&InventoryResponse::new(&[3; 44]).unwrap()).to_array();
    let hand = read_inventories(&fixture("hand_scored_inventory.csv")).unwrap();
    let got = score_bfi(&hand[0].answers).to_array();
    // Hand-scored against the published key: E 30/8, A 32/9, C 36/9, N 17/8, O 36/10.
    let want = [30.0 / 8.0, 32.0 / 9.0, 36.0 / 9.0, 17.0 / 8.0, 36.0 / 10.0];
    let hand_ok = got.iter().zip(&want).all(|(g, w)| (g - w).abs() < 1e-9);
    let key = scoring_key();
    let counts: Vec<usize> = Dimension::ALL.iter().map(|&d| key.item_count(d)).collect();
    let transcribed = transcribed_key();
    let mismatched: Vec<usize> = (1..=44)
        .filter(|&i| {
            let e = key.entry(i);
            transcribed.get(&i) != Some(&(e.dimension.letter(), e.reversed))
        })
        .collect();
    let ok = threes == [3.0; 5] && hand_ok && counts == [8, 9, 9, 8, 10] && transcribed.len() == 44 && mismatched.is_empty();
    let detail = format!(
        "all-3 -> {threes:?}; fixture -> {got:.4?}; item counts {counts:?}; key differs from transcription at {mismatched:?}"
    );
    verdict(5, "BFI scoring", ok, start.elapsed(), Duration::from_secs(1), &detail);
}

fn criterion_6_planted_signal_recovery() {
    let start = Instant::now();
    let seeds = 10;
    let mut hits = [0usize; 5];
    let mut listed = [0usize; 5];
    for seed in 1..=seeds {
        let prep = prepare(cohort(500, seed));
        let models: Vec<_> = Dimension::ALL
            .iter()
            .map(|&d| {
                let (data, _) = labeled_dataset(&prep.vectors, &prep.labels, d, Mode::ThreeClass).unwrap();
                train_model(&data, d, Mode::ThreeClass, &TrainParams::default()).unwrap()
            })
            .collect();
        let report = report_table(&models);
        for (d, model) in Dimension::ALL.iter().zip(&models) {
            let top = top_features(&model.root, 2);
            let found: Vec<&str> = planted(*d)
                .into_iter()
                .filter(|p| top.iter().any(|(_, f)| f == p))
                .collect();
            if !found.is_empty() {
                hits[d.index()] += 1;
                let block: Vec<&str> = report
                    .lines()
                    .skip_while(|l| !l.starts_with(d.letter()))
                    .take(2)
                    .collect();
                if found.iter().any(|f| block.iter().any(|l| l.contains(f))) {
                    listed[d.index()] += 1;
                }
            }
        }
    }
    let ok = hits.iter().all(|&h| h >= 8) && hits == listed;
    let detail = Dimension::ALL
        .iter()
        .map(|d| format!("{d} {}/{seeds}", hits[d.index()]))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(6, "planted-signal recovery", ok, start.elapsed(), Duration::from_secs(60), &detail);
}

fn criterion_7_pipeline_plausibility() {
    let start = Instant::now();
    let prep = prepare(cohort(500, 42));
    let cfg = PipelineConfig {
        mode: Mode::ThreeClass,
        dims: Dimension::ALL.to_vec(),
        folds: 10,
        seed: 42,
        params: TrainParams::default(),
        thresholds: ThresholdScope::Global,
    };
    let outcomes = run_cv(&prep.vectors, &prep.labels, None, &cfg).unwrap();
    let fs: Vec<f64> = outcomes.iter().map(|o| o.metrics.f).collect();
    let band_ok = fs.iter().all(|f| (0.60..=0.90).contains(f));

    let (base, _) = labeled_dataset(&prep.vectors, &prep.labels, Dimension::Extraversion, Mode::ThreeClass).unwrap();
    let runs = 20;
    let mut total = 0.0;
    for seed in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut labels: Vec<usize> = (0..base.len()).map(|i| i % 3).collect();
        labels.shuffle(&mut rng);
        let mut shuffled = base.clone();
        shuffled.labels = labels;
        total += cross_validate(&shuffled, "shuffled", 10, &TrainParams::default(), seed).unwrap().metrics.f;
    }
    let chance = total / runs as f64;
    let chance_ok = (chance - 1.0 / 3.0).abs() <= 0.1;
    let detail = format!(
        "weighted F {}; shuffled-label mean F {chance:.3} over {runs} seeds",
        Dimension::ALL
            .iter()
            .zip(&fs)
            .map(|(d, f)| format!("{d} {f:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    verdict(7, "pipeline plausibility band", band_ok && chance_ok, start.elapsed(), Duration::from_secs(120), &detail);
}

fn end_to_end(dir: &std::path::Path) -> (Vec<u8>, Vec<u8>) {
    use cli::*;
    let cohort_dir = dir.join("cohort");
    cmd_synth(&SynthArgs {
        config: None,
        n: Some(150),
        seed: Some(42),
        out: cohort_dir.clone(),
    })
    .unwrap();
    cmd_train_emotion(&TrainEmotionArgs {
        corpus: cohort_dir.join(cohort_files::CORPUS),
        lexicon: cohort_dir.join(cohort_files::LEXICON),
        boost: 2.0,
        smoothing: 1.0,
        out: dir.join("emotion.json"),
    })
    .unwrap();
    cmd_features(&FeaturesArgs {
        records: cohort_dir.join(cohort_files::RECORDS),
        emotion_model: dir.join("emotion.json"),
        reference: DEFAULT_REFERENCE.into(),
        out: dir.join("features.csv"),
    })
    .unwrap();
    cmd_score(&ScoreArgs {
        inventories: cohort_dir.join(cohort_files::INVENTORIES),
        out: dir.join("scores.csv"),
    })
    .unwrap();
    cmd_discretize(&DiscretizeArgs {
        scores: dir.join("scores.csv"),
        mode: ModeArg::ThreeClass,
        out: dir.to_path_buf(),
    })
    .unwrap();
    let tree = TreeArgs {
        min_leaf: 2,
        cf: 0.25,
        max_depth: None,
        no_prune: false,
        seed: 42,
    };
    cmd_train(&TrainArgs {
        features: dir.join("features.csv"),
        labels: dir.join("labels.csv"),
        dim: Dimension::Agreeableness,
        mode: ModeArg::ThreeClass,
        tree: tree.clone(),
        out: dir.join("model_A.json"),
    })
    .unwrap();
    cmd_cv(&CvArgs {
        features: dir.join("features.csv"),
        labels: dir.join("labels.csv"),
        scores: None,
        mode: ModeArg::ThreeClass,
        dims: Dimension::ALL.to_vec(),
        folds: 10,
        thresholds: ThresholdScope::Global,
        tree,
        out: dir.join("cv"),
    })
    .unwrap();
    (
        std::fs::read(dir.join("model_A.json")).unwrap(),
        std::fs::read(dir.join("cv/metrics.csv")).unwrap(),
    )
}

fn criterion_8_determinism() {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (model_a, metrics_a) = end_to_end(a.path());
    let (model_b, metrics_b) = end_to_end(b.path());
    let ok = model_a == model_b && metrics_a == metrics_b;
    let detail = format!(
        "model JSON {} bytes identical: {}; metrics CSV {} bytes identical: {}",
        model_a.len(),
        model_a == model_b,
        metrics_a.len(),
        metrics_a == metrics_b
    );
    verdict(8, "determinism", ok, start.elapsed(), Duration::from_secs(120), &detail);
}

fn main() {
    let criteria: [(&str, fn()); 8] = [
        ("discretization arithmetic", criterion_1_discretization_arithmetic),
        ("gain-ratio oracle equivalence", criterion_2_gain_ratio_oracle),
        ("C4.5 sanity battery", criterion_3_c45_sanity),
        ("metrics arithmetic", criterion_4_metrics_arithmetic),
        ("BFI scoring", criterion_5_bfi_scoring),
        ("planted-signal recovery", criterion_6_planted_signal_recovery),
        ("pipeline plausibility band", criterion_7_pipeline_plausibility),
        ("determinism", criterion_8_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        if std::panic::catch_unwind(run).is_err() {
            failed.push(format!("[{}] {name}", i + 1));
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}

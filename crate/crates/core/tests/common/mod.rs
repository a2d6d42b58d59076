#![allow(dead_code)]

use std::path::PathBuf;

use persona::discretize::{compute_thresholds, LabelTable, Mode};
use persona::emotion::{train_emotion_model, EmotionModel, DEFAULT_BOOST, DEFAULT_SMOOTHING};
use persona::features::{extract_features, FeatureVector};
use persona::inventory::{score_bfi, ScoredParticipant};
use persona::synth::{emotion_corpus, generate_cohort, lexicon, CohortConfig};
use persona::Dimension;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A generated cohort pushed through scoring, feature extraction and
/// three-class discretization.
pub struct Prepared {
    pub cfg: CohortConfig,
    pub model: EmotionModel,
    pub vectors: Vec<FeatureVector>,
    pub scores: Vec<ScoredParticipant>,
    pub labels: LabelTable,
}

pub fn prepare(cfg: CohortConfig) -> Prepared {
    let cohort = generate_cohort(&cfg).unwrap();
    let model = train_emotion_model(&emotion_corpus(cfg.seed), &lexicon(), DEFAULT_BOOST, DEFAULT_SMOOTHING).unwrap();
    let vectors: Vec<FeatureVector> = cohort
        .iter()
        .map(|p| extract_features(&p.record, cfg.reference(), &model).unwrap())
        .collect();
    let scores: Vec<ScoredParticipant> = cohort
        .iter()
        .map(|p| ScoredParticipant {
            participant_id: p.record.user_id.clone(),
            score: score_bfi(&p.inventory),
        })
        .collect();
    let thresholds: Vec<_> = Dimension::ALL
        .iter()
        .map(|&d| compute_thresholds(d, &scores.iter().map(|s| s.score.get(d)).collect::<Vec<_>>()).unwrap())
        .collect();
    let labels = LabelTable::from_scores(&scores, &thresholds, Mode::ThreeClass);
    Prepared {
        cfg,
        model,
        vectors,
        scores,
        labels,
    }
}

pub fn cohort(n: usize, seed: u64) -> CohortConfig {
    CohortConfig {
        n,
        seed,
        ..Default::default()
    }
}

/// Features a dimension's planted links target.
pub fn planted(dim: Dimension) -> Vec<&'static str> {
    match dim {
        Dimension::Extraversion => vec!["zzstatus_proportion"],
        Dimension::Agreeableness => vec!["zidou", "blog_emoticon_count"],
        Dimension::Conscientiousness => vec!["guestbook_count"],
        Dimension::Neuroticism => vec!["angry_blog_proportion"],
        Dimension::Openness => vec!["usage", "recent_status_count_30d"],
    }
}

//! Synthetic cohorts with planted trait-behavior links.
//!
//! Each participant gets a latent Big Five vector, an inventory whose score
//! stays within [`SCORE_TOLERANCE`] of it, and a behavior log. Behavior
//! knobs are driven by a linear predictor `a + sum(b * z)` over the
//! standardized latent scores `z`: counts use the rate `exp(predictor)`,
//! proportions use `logistic(predictor)`. Every participant draws from its
//! own ChaCha stream, so cohorts are reproducible and order independent.

mod vocab;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::Statistics;

use crate::emotion::{EmotionLabel, EmotionModel, LabeledText};
use crate::features::{extract_features, feature_index, resolve_feature, Blog, Comment, Gender, Status, UserRecord};
use crate::inventory::{scoring_key, score_bfi, Dimension, InventoryResponse, PersonalityScore, ITEM_COUNT};
use crate::{Error, Result};

pub use vocab::{lexicon, vocabulary, PRONOUNS};

/// Largest gap between a latent score and the scored inventory.
pub const SCORE_TOLERANCE: f64 = 0.35;
/// Bound on the per-participant offset between latent and target score.
pub const SCORE_OFFSET_LIMIT: f64 = 0.28;
pub const MIN_STATUSES: usize = 50;
pub const MIN_BLOGS: usize = 10;
pub const MIN_FRIENDS: u64 = 100;
const CORPUS_DOCS_PER_CLASS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitMoments {
    pub dimension: Dimension,
    pub mean: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub dimension: Dimension,
    pub feature: String,
    pub direction: Direction,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Noise {
    /// Standard deviation of the latent-to-inventory offset, truncated at
    /// [`SCORE_OFFSET_LIMIT`].
    pub score: f64,
    /// Sum-preserving unit moves between items, per item.
    pub item_spread: f64,
    /// Standard deviation of the per-knob noise added to each predictor.
    pub behavior: f64,
    /// Draw counts from Poisson/binomial distributions instead of rounding
    /// their expected values.
    pub sample_counts: bool,
}

impl Default for Noise {
    fn default() -> Self {
        Noise {
            score: 0.1,
            item_spread: 1.0,
            behavior: 0.5,
            sample_counts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub n: usize,
    pub seed: u64,
    pub reference_date: NaiveDate,
    pub moments: Vec<TraitMoments>,
    pub links: Vec<Link>,
    pub noise: Noise,
}

pub fn default_moments() -> Vec<TraitMoments> {
    use Dimension::*;
    [
        (Extraversion, 2.95, 0.64),
        (Agreeableness, 3.71, 0.47),
        (Conscientiousness, 3.29, 0.55),
        (Neuroticism, 3.02, 0.61),
        (Openness, 3.39, 0.61),
    ]
    .into_iter()
    .map(|(dimension, mean, sigma)| TraitMoments {
        dimension,
        mean,
        sigma,
    })
    .collect()
}

pub fn default_links() -> Vec<Link> {
    use Dimension::*;
    [
        (Extraversion, "zzstatus_proportion", 1.6),
        (Neuroticism, "angry_blog_proportion", 1.6),
        (Openness, "usage", 1.2),
        (Openness, "recent_status_count_30d", 1.2),
        (Agreeableness, "zidou", 1.6),
        (Agreeableness, "blog_emoticon_count", 1.2),
        (Conscientiousness, "guestbook_count", 1.6),
    ]
    .into_iter()
    .map(|(dimension, feature, strength)| Link {
        dimension,
        feature: feature.to_owned(),
        direction: Direction::Positive,
        strength,
    })
    .collect()
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            n: 500,
            seed: 42,
            reference_date: NaiveDate::from_ymd_opt(2012, 3, 1).expect("valid date"),
            moments: default_moments(),
            links: default_links(),
            noise: Noise::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum KnobKind {
    Count,
    Proportion,
}

/// A behavior quantity the generator controls directly, with its baseline
/// predictor value.
struct Knob {
    feature: &'static str,
    kind: KnobKind,
    base: f64,
}

const fn count(feature: &'static str, base: f64) -> Knob {
    Knob {
        feature,
        kind: KnobKind::Count,
        base,
    }
}

const fn proportion(feature: &'static str, base: f64) -> Knob {
    Knob {
        feature,
        kind: KnobKind::Proportion,
        base,
    }
}

// Bases are natural logs of the baseline rate, or logits of the baseline
// proportion.
const KNOBS: &[Knob] = &[
    proportion("zzstatus_proportion", -1.2),
    proportion("angry_blog_proportion", -1.4),
    count("usage", 0.9),
    count("recent_status_count_30d", 2.1),
    count("zidou", 4.1),
    count("blog_emoticon_count", 2.5),
    count("guestbook_count", 2.3),
    count("friend_count", 4.4),
    count("photo_count", 3.7),
    count("album_count", 1.4),
    count("share_count", 1.8),
    count("gift_count", 1.1),
    count("checkin_count", 1.1),
    count("app_count", 1.6),
    count("page_follow_count", 1.4),
    count("comment_given_count", 3.4),
    count("status_emoticon_count", 3.0),
];

fn knob_index(feature: &str) -> Option<usize> {
    KNOBS.iter().position(|k| k.feature == feature)
}

/// Names of the features a link may target.
pub fn plantable_features() -> Vec<&'static str> {
    KNOBS.iter().map(|k| k.feature).collect()
}

impl CohortConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::validation("n", "cohort needs at least one participant"));
        }
        for d in Dimension::ALL {
            let hits = self.moments.iter().filter(|m| m.dimension == d).count();
            if hits != 1 {
                return Err(Error::validation(
                    "moments",
                    format!("dimension {d} listed {hits} times, expected once"),
                ));
            }
        }
        for (i, m) in self.moments.iter().enumerate() {
            if !(1.0..=5.0).contains(&m.mean) || !(m.sigma >= 0.0 && m.sigma.is_finite()) {
                return Err(Error::validation(
                    format!("moments[{i}]"),
                    format!("mean {} must lie in [1, 5] and sigma {} must be >= 0", m.mean, m.sigma),
                ));
            }
        }
        for (i, l) in self.links.iter().enumerate() {
            if !(l.strength >= 0.0 && l.strength.is_finite()) {
                return Err(Error::validation(
                    format!("links[{i}].strength"),
                    format!("strength {} must be >= 0", l.strength),
                ));
            }
            self.resolve_link(i, l)?;
        }
        let n = &self.noise;
        for (name, v) in [("noise.score", n.score), ("noise.item_spread", n.item_spread), ("noise.behavior", n.behavior)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("{v} must be >= 0")));
            }
        }
        Ok(())
    }

    fn resolve_link(&self, i: usize, link: &Link) -> Result<usize> {
        let field = format!("links[{i}].feature");
        let descriptor = resolve_feature(&link.feature)
            .ok_or_else(|| Error::validation(&field, format!("unknown feature {:?}", link.feature)))?;
        knob_index(descriptor.name).ok_or_else(|| {
            Error::validation(
                &field,
                format!(
                    "feature {:?} cannot be planted; plantable features: {}",
                    descriptor.name,
                    plantable_features().join(", ")
                ),
            )
        })
    }

    pub fn moments_of(&self, d: Dimension) -> TraitMoments {
        *self
            .moments
            .iter()
            .find(|m| m.dimension == d)
            .expect("validated moments cover every dimension")
    }

    pub fn reference(&self) -> DateTime<Utc> {
        self.reference_date
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc()
    }

    /// Per-knob slope for each dimension, summing links on the same knob.
    fn slopes(&self) -> Result<Vec<[f64; 5]>> {
        let mut out = vec![[0.0; 5]; KNOBS.len()];
        for (i, l) in self.links.iter().enumerate() {
            let k = self.resolve_link(i, l)?;
            out[k][l.dimension.index()] += l.direction.sign() * l.strength;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParticipant {
    pub latent: PersonalityScore,
    pub inventory: InventoryResponse,
    pub record: UserRecord,
}

#[derive(Clone, Copy)]
enum Purpose {
    Latent = 0,
    Inventory = 1,
    Behavior = 2,
}

fn stream_rng(seed: u64, index: usize, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 * 4 + purpose as u64);
    rng
}

pub fn participant_id(index: usize) -> String {
    format!("u{index:05}")
}

pub fn generate_cohort(cfg: &CohortConfig) -> Result<Vec<SyntheticParticipant>> {
    cfg.validate()?;
    let slopes = cfg.slopes()?;
    (0..cfg.n)
        .into_par_iter()
        .map(|i| generate_participant(cfg, &slopes, i))
        .collect()
}

fn generate_participant(cfg: &CohortConfig, slopes: &[[f64; 5]], index: usize) -> Result<SyntheticParticipant> {
    let mut rng = stream_rng(cfg.seed, index, Purpose::Latent);
    let mut latent = [0.0; 5];
    let mut z = [0.0; 5];
    for d in Dimension::ALL {
        let m = cfg.moments_of(d);
        let x = if m.sigma > 0.0 {
            Normal::new(m.mean, m.sigma).expect("valid normal").sample(&mut rng)
        } else {
            m.mean
        };
        latent[d.index()] = x.clamp(1.0, 5.0);
        z[d.index()] = if m.sigma > 0.0 { (latent[d.index()] - m.mean) / m.sigma } else { 0.0 };
    }
    let latent = PersonalityScore::from_array(latent);

    let mut rng = stream_rng(cfg.seed, index, Purpose::Inventory);
    let inventory = inventory_for(&mut rng, &latent, &cfg.noise)?;

    let mut rng = stream_rng(cfg.seed, index, Purpose::Behavior);
    let record = behavior_for(&mut rng, cfg, slopes, &z, &participant_id(index));

    Ok(SyntheticParticipant {
        latent,
        inventory,
        record,
    })
}

/// Answers whose dimension means equal a target within `SCORE_OFFSET_LIMIT`
/// plus rounding of the latent score.
///
/// Each dimension's keyed item total is fixed first, then spread over the
/// items and perturbed by unit moves that keep the total. Reverse-keyed
/// items store `6 - keyed value`.
fn inventory_for<R: Rng>(rng: &mut R, latent: &PersonalityScore, noise: &Noise) -> Result<InventoryResponse> {
    let key = scoring_key();
    let offset = Normal::new(0.0, noise.score).expect("validated noise");
    let mut answers = [0u8; ITEM_COUNT];
    for d in Dimension::ALL {
        let items: Vec<usize> = key.items.iter().filter(|e| e.dimension == d).map(|e| e.item).collect();
        let k = items.len() as i64;
        let e = offset.sample(rng).clamp(-SCORE_OFFSET_LIMIT, SCORE_OFFSET_LIMIT);
        let target = (latent.get(d) + e).clamp(1.0, 5.0);
        let total = ((target * k as f64).round() as i64).clamp(k, 5 * k);

        let mut keyed = vec![total / k; items.len()];
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.shuffle(rng);
        for &j in order.iter().take((total % k) as usize) {
            keyed[j] += 1;
        }
        let moves = (noise.item_spread * k as f64).round() as usize;
        for _ in 0..moves {
            let up = rng.random_range(0..items.len());
            let down = rng.random_range(0..items.len());
            if up != down && keyed[up] < 5 && keyed[down] > 1 {
                keyed[up] += 1;
                keyed[down] -= 1;
            }
        }
        for (&item, &v) in items.iter().zip(&keyed) {
            let reversed = key.entry(item).reversed;
            answers[item - 1] = if reversed { 6 - v } else { v } as u8;
        }
    }
    InventoryResponse::new(&answers)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Sampler<'a, R> {
    rng: &'a mut R,
    sample: bool,
}

impl<R: Rng> Sampler<'_, R> {
    fn count(&mut self, rate: f64) -> u64 {
        if !(rate > 0.0) {
            return 0;
        }
        if self.sample {
            Poisson::new(rate).expect("positive rate").sample(self.rng) as u64
        } else {
            rate.round() as u64
        }
    }

    fn successes(&mut self, n: u64, p: f64) -> u64 {
        if self.sample {
            Binomial::new(n, p.clamp(0.0, 1.0)).expect("valid binomial").sample(self.rng)
        } else {
            (n as f64 * p).round() as u64
        }
    }
}

fn instant_between<R: Rng>(rng: &mut R, from: DateTime<Utc>, to: DateTime<Utc>) -> DateTime<Utc> {
    let span = (to - from).num_seconds().max(1);
    from + Duration::seconds(rng.random_range(0..span))
}

fn behavior_for<R: Rng>(rng: &mut R, cfg: &CohortConfig, slopes: &[[f64; 5]], z: &[f64; 5], user_id: &str) -> UserRecord {
    let reference = cfg.reference();
    let jitter = Normal::new(0.0, cfg.noise.behavior.max(0.0)).expect("valid normal");
    let predictor: Vec<f64> = KNOBS
        .iter()
        .zip(slopes)
        .map(|(knob, b)| {
            let signal: f64 = b.iter().zip(z).map(|(b, z)| b * z).sum();
            knob.base + signal + jitter.sample(rng)
        })
        .collect();
    let level = |name: &str| {
        let k = knob_index(name).expect("known knob");
        match KNOBS[k].kind {
            KnobKind::Count => predictor[k].exp(),
            KnobKind::Proportion => logistic(predictor[k]),
        }
    };

    let tenure_days = rng.random_range(365..=1000);
    let registration = reference - Duration::days(tenure_days);
    let recent_start = reference - Duration::days(30);
    let mut rec = UserRecord::empty(user_id, registration);
    rec.gender = if rng.random_bool(0.5) { Gender::M } else { Gender::F };
    rec.birth_year = rng.random_range(1983..=1994);
    rec.hometown_code = rng.random_range(0..64);
    rec.friend_ids = (0..8).map(|j| format!("{user_id}-f{j}")).collect();

    let mut s = Sampler {
        rng,
        sample: cfg.noise.sample_counts,
    };
    rec.zidou = s.count(level("zidou"));
    rec.friend_count = MIN_FRIENDS + s.count(level("friend_count"));
    rec.photo_count = s.count(level("photo_count"));
    rec.album_count = s.count(level("album_count"));
    rec.share_count = s.count(level("share_count"));
    rec.gift_count = s.count(level("gift_count"));
    rec.checkin_count = s.count(level("checkin_count"));
    rec.guestbook_count = s.count(level("guestbook_count"));
    rec.app_count = s.count(level("app_count"));
    rec.page_follow_count = s.count(level("page_follow_count"));
    rec.comments_given = s.count(level("comment_given_count"));
    rec.photo_comment_count = s.count(rec.photo_count as f64 * 0.5);

    let weeks = tenure_days as f64 / 7.0;
    let logins = s.count(level("usage") * weeks);
    let recent = s.count(level("recent_status_count_30d"));
    let older = (MIN_STATUSES as u64).saturating_sub(recent) + s.count(10.0);
    let n_status = recent + older;
    let republished = s.successes(n_status, level("zzstatus_proportion"));
    let status_emoticons = s.count(level("status_emoticon_count"));
    let n_blog = MIN_BLOGS as u64 + s.count(5.0);
    let angry = s.successes(n_blog, level("angry_blog_proportion"));
    let blog_emoticons = s.count(level("blog_emoticon_count"));
    let rng = s.rng;

    let mut logins: Vec<DateTime<Utc>> = (0..logins).map(|_| instant_between(rng, registration, reference)).collect();
    logins.sort();
    rec.login_events = logins;

    let mut flags: Vec<bool> = (0..n_status).map(|i| i < republished).collect();
    flags.shuffle(rng);
    let mut statuses: Vec<Status> = flags
        .into_iter()
        .enumerate()
        .map(|(i, is_republished)| {
            let ts = if (i as u64) < recent {
                instant_between(rng, recent_start + Duration::seconds(1), reference)
            } else {
                instant_between(rng, registration, recent_start)
            };
            let label = EmotionLabel::ALL[rng.random_range(0..4)];
            let len = rng.random_range(4..=8);
            Status {
                timestamp: ts,
                text: vocab::emotion_text(rng, label, len),
                is_republished,
                emoticon_count: 0,
            }
        })
        .collect();
    for _ in 0..status_emoticons {
        let j = rng.random_range(0..statuses.len());
        statuses[j].emoticon_count += 1;
    }
    statuses.sort_by_key(|s| s.timestamp);
    rec.statuses = statuses;

    let others = [EmotionLabel::Funny, EmotionLabel::Surprised, EmotionLabel::Moving];
    let mut blogs: Vec<Blog> = (0..n_blog)
        .map(|i| {
            let label = if i < angry { EmotionLabel::Angry } else { others[rng.random_range(0..3)] };
            let timestamp = instant_between(rng, registration, reference);
            let len = rng.random_range(10..=20);
            let pronouns = rng.random_range(0..=4);
            let n_comments = rng.random_range(0..=4);
            let comments = (0..n_comments)
                .map(|_| {
                    let roll: f64 = rng.random();
                    let author_id = if roll < 0.2 {
                        user_id.to_owned()
                    } else if roll < 0.7 {
                        rec.friend_ids[rng.random_range(0..rec.friend_ids.len())].clone()
                    } else {
                        format!("stranger{}", rng.random_range(0..1000))
                    };
                    Comment {
                        author_id,
                        timestamp: instant_between(rng, timestamp, reference),
                    }
                })
                .collect();
            Blog {
                timestamp,
                text: vocab::blog_text(rng, label, len, pronouns),
                emoticon_count: 0,
                comments,
            }
        })
        .collect();
    blogs.shuffle(rng);
    for _ in 0..blog_emoticons {
        let j = rng.random_range(0..blogs.len());
        blogs[j].emoticon_count += 1;
    }
    blogs.sort_by_key(|b| b.timestamp);
    rec.blogs = blogs;
    rec
}

/// Labeled texts for training the emotion classifier on the synthetic
/// vocabularies.
pub fn emotion_corpus(seed: u64) -> Vec<LabeledText> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    vocab::training_corpus(&mut rng, CORPUS_DOCS_PER_CLASS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub dimension: Dimension,
    pub latent_mean: f64,
    pub latent_sigma: f64,
    pub scored_mean: f64,
    pub scored_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub dimension: Dimension,
    pub feature: String,
    pub direction: Direction,
    pub strength: f64,
    /// Pearson correlation between the latent score and the extracted feature.
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub n: usize,
    pub seed: u64,
    pub dimensions: Vec<DimensionSummary>,
    pub links: Vec<LinkSummary>,
}

fn population_moments(xs: &[f64]) -> (f64, f64) {
    let mean = xs.iter().mean();
    (mean, xs.iter().population_std_dev())
}

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let cov = xs.iter().population_covariance(ys.iter());
    let sx = xs.iter().population_std_dev();
    let sy = ys.iter().population_std_dev();
    if sx > 0.0 && sy > 0.0 {
        cov / (sx * sy)
    } else {
        0.0
    }
}

/// Score moments and planted-link correlations, measured through the
/// inventory scorer and the feature extractor.
pub fn cohort_report(cfg: &CohortConfig, participants: &[SyntheticParticipant], model: &EmotionModel) -> Result<CohortReport> {
    if participants.is_empty() {
        return Err(Error::validation("participants", "cannot report on an empty cohort"));
    }
    let reference = cfg.reference();
    let scored: Vec<PersonalityScore> = participants.iter().map(|p| score_bfi(&p.inventory)).collect();
    let dimensions = Dimension::ALL
        .iter()
        .map(|&d| {
            let latent: Vec<f64> = participants.iter().map(|p| p.latent.get(d)).collect();
            let obs: Vec<f64> = scored.iter().map(|s| s.get(d)).collect();
            let (latent_mean, latent_sigma) = population_moments(&latent);
            let (scored_mean, scored_sigma) = population_moments(&obs);
            DimensionSummary {
                dimension: d,
                latent_mean,
                latent_sigma,
                scored_mean,
                scored_sigma,
            }
        })
        .collect();
    let vectors = participants
        .par_iter()
        .map(|p| extract_features(&p.record, reference, model))
        .collect::<Result<Vec<_>>>()?;
    let links = cfg
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            cfg.resolve_link(i, l)?;
            let name = resolve_feature(&l.feature).expect("resolved above").name;
            let slot = feature_index(name).expect("schema feature");
            let xs: Vec<f64> = participants.iter().map(|p| p.latent.get(l.dimension)).collect();
            let ys: Vec<f64> = vectors.iter().map(|v| v.values[slot].as_f64()).collect();
            Ok(LinkSummary {
                dimension: l.dimension,
                feature: name.to_owned(),
                direction: l.direction,
                strength: l.strength,
                correlation: pearson(&xs, &ys),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CohortReport {
        n: participants.len(),
        seed: cfg.seed,
        dimensions,
        links,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::{train_emotion_model, DEFAULT_BOOST, DEFAULT_SMOOTHING};

    fn small(n: usize) -> CohortConfig {
        CohortConfig {
            n,
            ..Default::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        assert!(CohortConfig::default().validate().is_ok());
        assert_eq!(CohortConfig::default().moments_of(Dimension::Extraversion).mean, 2.95);
    }

    #[test]
    fn unknown_and_unplantable_links_rejected() {
        let mut cfg = small(3);
        cfg.links.push(Link {
            dimension: Dimension::Openness,
            feature: "shoe_size".into(),
            direction: Direction::Positive,
            strength: 1.0,
        });
        let err = generate_cohort(&cfg).unwrap_err().to_string();
        assert!(err.contains("links[7].feature"), "{err}");

        let mut cfg = small(3);
        cfg.links[0].feature = "gender".into();
        assert!(generate_cohort(&cfg).unwrap_err().to_string().contains("cannot be planted"));

        let mut cfg = small(3);
        cfg.links[0].strength = -1.0;
        assert!(generate_cohort(&cfg).is_err());
    }

    #[test]
    fn aliases_resolve_in_links() {
        let mut cfg = small(2);
        cfg.links[0].feature = "p(angryblog)".into();
        assert!(generate_cohort(&cfg).is_ok());
    }

    #[test]
    fn inventories_track_latent_scores() {
        let cohort = generate_cohort(&small(200)).unwrap();
        for p in &cohort {
            let s = score_bfi(&p.inventory);
            for d in Dimension::ALL {
                assert!((s.get(d) - p.latent.get(d)).abs() <= SCORE_TOLERANCE, "{d}: {} vs {}", s.get(d), p.latent.get(d));
            }
        }
    }

    #[test]
    fn records_validate_and_meet_minimums() {
        let cfg = small(40);
        for p in generate_cohort(&cfg).unwrap() {
            p.record.validate(cfg.reference()).unwrap();
            assert!(p.record.statuses.len() >= MIN_STATUSES);
            assert!(p.record.blogs.len() >= MIN_BLOGS);
            assert!(p.record.friend_count >= MIN_FRIENDS);
        }
    }

    #[test]
    fn deterministic_and_index_addressed() {
        let a = generate_cohort(&small(12)).unwrap();
        let b = generate_cohort(&small(12)).unwrap();
        assert_eq!(a, b);
        let c = generate_cohort(&small(5)).unwrap();
        assert_eq!(&a[..5], &c[..]);
        let mut other = small(12);
        other.seed = 43;
        assert_ne!(a, generate_cohort(&other).unwrap());
    }

    #[test]
    fn null_planting_ignores_latent_scores() {
        let mut cfg = small(1);
        for l in &mut cfg.links {
            l.strength = 0.0;
        }
        let base = generate_cohort(&cfg).unwrap().remove(0);
        for m in &mut cfg.moments {
            m.mean = 1.5;
        }
        let moved = generate_cohort(&cfg).unwrap().remove(0);
        assert_ne!(base.latent, moved.latent);
        assert_eq!(base.record, moved.record);
    }

    #[test]
    fn monotone_limit_orders_republish_rates() {
        let mut cfg = small(60);
        cfg.links = vec![Link {
            dimension: Dimension::Extraversion,
            feature: "zzstatus_proportion".into(),
            direction: Direction::Positive,
            strength: 6.0,
        }];
        cfg.noise.behavior = 0.0;
        cfg.noise.sample_counts = false;
        let cohort = generate_cohort(&cfg).unwrap();
        let corpus = emotion_corpus(cfg.seed);
        let model = train_emotion_model(&corpus, &lexicon(), DEFAULT_BOOST, DEFAULT_SMOOTHING).unwrap();
        let slot = feature_index("zzstatus_proportion").unwrap();
        let mut pairs: Vec<(f64, f64)> = cohort
            .iter()
            .map(|p| {
                let v = extract_features(&p.record, cfg.reference(), &model).unwrap();
                (p.latent.e, v.values[slot].as_f64())
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Rounding to whole statuses can tie neighbours but never reverses them.
        for w in pairs.windows(2) {
            assert!(w[0].1 <= w[1].1 + 0.02, "{w:?}");
        }
        let first = pairs.first().unwrap().1;
        let last = pairs.last().unwrap().1;
        assert!(last - first > 0.9);
    }

    #[test]
    fn synthetic_texts_classify_as_intended() {
        let model = train_emotion_model(&emotion_corpus(7), &lexicon(), DEFAULT_BOOST, DEFAULT_SMOOTHING).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for label in EmotionLabel::ALL {
            let hits = (0..200)
                .filter(|_| {
                    let len = rng.random_range(4..=8);
                    let pronouns = rng.random_range(0..=4);
                    model.classify(&vocab::blog_text(&mut rng, label, len, pronouns)).label == label
                })
                .count();
            assert!(hits >= 180, "{label:?}: {hits}/200");
        }
    }

    #[test]
    fn zero_noise_sigma_matches_configuration() {
        let mut cfg = small(400);
        cfg.noise.score = 0.0;
        cfg.noise.item_spread = 0.0;
        let cohort = generate_cohort(&cfg).unwrap();
        let model = train_emotion_model(&emotion_corpus(1), &lexicon(), DEFAULT_BOOST, DEFAULT_SMOOTHING).unwrap();
        let report = cohort_report(&cfg, &cohort, &model).unwrap();
        for s in &report.dimensions {
            let m = cfg.moments_of(s.dimension);
            assert!((s.latent_sigma - m.sigma).abs() < 0.08, "{s:?}");
            assert!((s.scored_sigma - m.sigma).abs() < 0.1, "{s:?}");
        }
    }

    #[test]
    fn empty_cohort_report_is_error() {
        let model = train_emotion_model(&emotion_corpus(1), &lexicon(), DEFAULT_BOOST, DEFAULT_SMOOTHING).unwrap();
        assert!(cohort_report(&CohortConfig::default(), &[], &model).is_err());
    }

    #[test]
    fn pearson_fixture() {
        // Perfect linear, perfect inverse, and constant inputs.
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), 0.0);
        // Hand value: x = (1,2,3,4), y = (1,3,2,4) gives r = 0.8.
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]) - 0.8).abs() < 1e-12);
    }
}

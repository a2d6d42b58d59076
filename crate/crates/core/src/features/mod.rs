//! Behavior-log feature extraction.
//!
//! [`extract_features`] maps a [`UserRecord`] onto the 41 slots described by
//! [`feature_schema`]. Proportions with an empty denominator are 0 and
//! categorical slots use the closed category lists of their descriptors, so
//! every valid record yields a complete vector.

mod pronoun;
mod record;
mod schema;

use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike, Duration, Utc};

pub use pronoun::{person_of, pronoun_counts, pronoun_profile, Person};
pub use record::{read_records, Blog, Comment, Gender, Status, UserRecord, HOMETOWN_CARDINALITY};
pub use schema::{
    feature_index, feature_schema, group_sizes, resolve_feature, schema_json, FeatureDescriptor,
    FeatureGroup, FeatureKind, Provenance, Unit, EMOTION_CATEGORIES, FEATURE_COUNT,
    PRONOUN_CATEGORIES, SCHEMA_VERSION,
};

use crate::c45::{Column, ColumnKind};
use crate::emotion::{tokenize, top_emotion, EmotionLabel, EmotionModel};
use crate::io;
use crate::{Error, Result};

pub const RECENT_WINDOW_DAYS: i64 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    /// Index into the descriptor's category list.
    Categorical(usize),
}

impl FeatureValue {
    pub fn as_f64(self) -> f64 {
        match self {
            FeatureValue::Numeric(x) => x,
            FeatureValue::Categorical(c) => c as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub user_id: String,
    pub values: Vec<FeatureValue>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<FeatureValue> {
        feature_index(name).map(|i| self.values[i])
    }

    pub fn numeric(&self, name: &str) -> f64 {
        self.get(name).map(FeatureValue::as_f64).unwrap_or(f64::NAN)
    }

    /// Categorical value as its category string.
    pub fn category(&self, name: &str) -> Option<&'static str> {
        let i = feature_index(name)?;
        match self.values[i] {
            FeatureValue::Categorical(c) => Some(feature_schema()[i].categories()[c].as_str()),
            FeatureValue::Numeric(_) => None,
        }
    }

    /// Row for the tree learner: numbers as-is, categories as their index.
    pub fn to_row(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}

/// Tree-learner column descriptions in schema order.
pub fn dataset_columns() -> Vec<Column> {
    feature_schema()
        .iter()
        .map(|d| Column {
            name: d.name.to_owned(),
            kind: match &d.kind {
                FeatureKind::Numeric => ColumnKind::Numeric,
                FeatureKind::Categorical { categories } => ColumnKind::Categorical {
                    categories: categories.clone(),
                },
            },
        })
        .collect()
}

fn days_between(earlier: DateTime<Utc>, later: DateTime<Utc>) -> f64 {
    (later - earlier).num_seconds() as f64 / 86_400.0
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn emotion_category(label: Option<EmotionLabel>) -> usize {
    label.map_or(0, |l| l.index() + 1)
}

/// Days covered by the newest run of same-emotion statuses: from the
/// earliest status in the run to `reference`. `statuses` must be sorted by
/// timestamp; no statuses gives 0.
pub fn emotion_length(statuses: &[Status], model: &EmotionModel, reference: DateTime<Utc>) -> f64 {
    let labels: Vec<EmotionLabel> = statuses.iter().map(|s| model.classify(&s.text).label).collect();
    emotion_length_from_labels(statuses, &labels, reference)
}

fn emotion_length_from_labels(
    statuses: &[Status],
    labels: &[EmotionLabel],
    reference: DateTime<Utc>,
) -> f64 {
    let Some(&newest) = labels.last() else {
        return 0.0;
    };
    let run_start = labels
        .iter()
        .rposition(|&l| l != newest)
        .map_or(0, |i| i + 1);
    days_between(statuses[run_start].timestamp, reference)
}

pub fn extract_features(
    rec: &UserRecord,
    reference: DateTime<Utc>,
    model: &EmotionModel,
) -> Result<FeatureVector> {
    rec.validate(reference)?;

    let recent_start = reference - Duration::days(RECENT_WINDOW_DAYS);
    let is_recent = |t: DateTime<Utc>| t >= recent_start && t <= reference;

    let mut statuses = rec.statuses.clone();
    statuses.sort_by_key(|s| s.timestamp);
    let status_labels: Vec<EmotionLabel> =
        statuses.iter().map(|s| model.classify(&s.text).label).collect();
    let blog_labels: Vec<EmotionLabel> =
        rec.blogs.iter().map(|b| model.classify(&b.text).label).collect();
    let blog_texts: Vec<&str> = rec.blogs.iter().map(|b| b.text.as_str()).collect();

    let tenure = days_between(rec.registration_date, reference);
    let weeks = tenure / 7.0;
    let n_status = statuses.len() as f64;
    let n_blog = rec.blogs.len() as f64;

    let comments: Vec<&Comment> = rec.blogs.iter().flat_map(|b| &b.comments).collect();
    let n_comments = comments.len() as f64;
    let self_comments = comments.iter().filter(|c| c.author_id == rec.user_id).count() as f64;
    let friend_comments = comments
        .iter()
        .filter(|c| c.author_id != rec.user_id && rec.friend_ids.contains(&c.author_id))
        .count() as f64;

    let pronouns = pronoun_counts(&blog_texts);
    let n_pronouns = pronouns.iter().sum::<usize>() as f64;

    let mut blog_hist = [0usize; 4];
    for l in &blog_labels {
        blog_hist[l.index()] += 1;
    }
    let mut recent_hist = [0usize; 4];
    for (s, l) in statuses.iter().zip(&status_labels) {
        if is_recent(s.timestamp) {
            recent_hist[l.index()] += 1;
        }
    }
    let recent_statuses: usize = recent_hist.iter().sum();

    let mean_tokens = |texts: &mut dyn Iterator<Item = &str>, n: f64| -> f64 {
        ratio(texts.map(|t| tokenize(t).len() as f64).sum(), n)
    };

    let hometown = rec.hometown_code as usize;
    let gender = match rec.gender {
        Gender::M => 0,
        Gender::F => 1,
    };

    use FeatureValue::{Categorical as C, Numeric as N};
    let slots: Vec<(&str, FeatureValue)> = vec![
        ("gender", C(gender)),
        ("age", N(f64::from(reference.year() - rec.birth_year))),
        ("hometown_code", C(hometown)),
        ("zidou", N(rec.zidou as f64)),
        ("account_tenure_days", N(tenure.floor().max(0.0))),
        ("friend_count", N(rec.friend_count as f64)),
        ("usage", N(ratio(rec.login_events.len() as f64, weeks))),
        ("guestbook_count", N(rec.guestbook_count as f64)),
        (
            "blog_emoticon_count",
            N(rec.blogs.iter().map(|b| f64::from(b.emoticon_count)).sum()),
        ),
        (
            "zzstatus_proportion",
            N(ratio(statuses.iter().filter(|s| s.is_republished).count() as f64, n_status)),
        ),
        ("self_comment_proportion", N(ratio(self_comments, n_comments))),
        ("friend_comment_proportion", N(ratio(friend_comments, n_comments))),
        ("blog_i_you_it", C(pronoun_profile(&blog_texts) as usize)),
        ("blog_count", N(n_blog)),
        ("photo_count", N(rec.photo_count as f64)),
        ("album_count", N(rec.album_count as f64)),
        ("share_count", N(rec.share_count as f64)),
        ("gift_count", N(rec.gift_count as f64)),
        ("checkin_count", N(rec.checkin_count as f64)),
        ("comment_received_count", N(n_comments)),
        ("comment_given_count", N(rec.comments_given as f64)),
        (
            "status_emoticon_count",
            N(statuses.iter().map(|s| f64::from(s.emoticon_count)).sum()),
        ),
        (
            "zzblog_proportion",
            N(ratio(rec.share_count as f64, rec.share_count as f64 + n_blog)),
        ),
        (
            "avg_blog_length",
            N(mean_tokens(&mut rec.blogs.iter().map(|b| b.text.as_str()), n_blog)),
        ),
        (
            "avg_status_length",
            N(mean_tokens(&mut statuses.iter().map(|s| s.text.as_str()), n_status)),
        ),
        ("blog_i_ratio", N(ratio(pronouns[0] as f64, n_pronouns))),
        ("blog_you_ratio", N(ratio(pronouns[1] as f64, n_pronouns))),
        ("blog_it_ratio", N(ratio(pronouns[2] as f64, n_pronouns))),
        ("statuses_per_week", N(ratio(n_status, weeks))),
        ("blogs_per_week", N(ratio(n_blog, weeks))),
        (
            "photo_comment_proportion",
            N(ratio(
                rec.photo_comment_count as f64,
                rec.photo_comment_count as f64 + n_comments,
            )),
        ),
        ("app_count", N(rec.app_count as f64)),
        ("page_follow_count", N(rec.page_follow_count as f64)),
        ("recent_status_count_30d", N(recent_statuses as f64)),
        (
            "recent_blog_count_30d",
            N(rec.blogs.iter().filter(|b| is_recent(b.timestamp)).count() as f64),
        ),
        (
            "recent_comment_count_30d",
            N(comments.iter().filter(|c| is_recent(c.timestamp)).count() as f64),
        ),
        ("blog_top_emotion", C(emotion_category(top_emotion(&blog_hist)))),
        (
            "angry_blog_proportion",
            N(ratio(blog_hist[EmotionLabel::Angry.index()] as f64, n_blog)),
        ),
        (
            "recent_status_top_emotion_ratio",
            N(ratio(
                recent_hist.iter().copied().max().unwrap_or(0) as f64,
                recent_statuses as f64,
            )),
        ),
        ("latest_status_emotion", C(emotion_category(status_labels.last().copied()))),
        (
            "latest_emotion_length_days",
            N(emotion_length_from_labels(&statuses, &status_labels, reference)),
        ),
    ];

    let schema = feature_schema();
    assert_eq!(slots.len(), schema.len(), "feature slots out of sync with schema");
    for ((name, _), d) in slots.iter().zip(schema) {
        assert_eq!(*name, d.name, "feature slots out of sync with schema");
    }

    Ok(FeatureVector {
        user_id: rec.user_id.clone(),
        values: slots.into_iter().map(|(_, v)| v).collect(),
    })
}

// ---------------------------------------------------------------------------
// CSV format

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SchemaStamp {
    pub schema_version: String,
    pub feature_count: usize,
    pub features: Vec<String>,
}

impl SchemaStamp {
    pub fn current() -> Self {
        SchemaStamp {
            schema_version: SCHEMA_VERSION.to_owned(),
            feature_count: FEATURE_COUNT,
            features: feature_schema().iter().map(|d| d.name.to_owned()).collect(),
        }
    }
}

/// Sidecar path holding the schema stamp of a feature CSV.
pub fn stamp_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".schema.json");
    PathBuf::from(s)
}

fn csv_header() -> Vec<String> {
    std::iter::once("user_id".to_owned())
        .chain(feature_schema().iter().map(|d| d.name.to_owned()))
        .collect()
}

pub fn features_csv(vectors: &[FeatureVector]) -> Result<Vec<u8>> {
    let schema = feature_schema();
    let rows: Vec<Vec<String>> = vectors
        .iter()
        .map(|v| {
            std::iter::once(v.user_id.clone())
                .chain(v.values.iter().zip(schema).map(|(val, d)| match *val {
                    FeatureValue::Numeric(x) => io::fmt_f64(x),
                    FeatureValue::Categorical(c) => d.categories()[c].clone(),
                }))
                .collect()
        })
        .collect();
    io::csv_bytes(&csv_header(), &rows)
}

pub fn write_features(path: &Path, vectors: &[FeatureVector]) -> Result<()> {
    io::write_atomic(path, &features_csv(vectors)?)?;
    io::write_atomic(&stamp_path(path), &io::to_pretty_json(&SchemaStamp::current())?)
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let stamp_file = stamp_path(path);
    if stamp_file.exists() {
        let stamp: SchemaStamp = io::read_json(&stamp_file)?;
        if stamp.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                expected: SCHEMA_VERSION.to_owned(),
                found: stamp.schema_version,
            });
        }
    }
    let (header, rows) = io::read_csv(path)?;
    if header != csv_header() {
        return Err(Error::SchemaMismatch {
            expected: format!("{SCHEMA_VERSION} header"),
            found: format!("{} columns starting {:?}", header.len(), header.iter().take(3).collect::<Vec<_>>()),
        });
    }
    let schema = feature_schema();
    rows.into_iter()
        .map(|(line, rec)| {
            let values = schema
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let cell = rec.get(i + 1).unwrap_or_default();
                    match &d.kind {
                        FeatureKind::Numeric => cell
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .map(FeatureValue::Numeric)
                            .ok_or_else(|| io::row_error(path, line, format!("{}: not a number: {cell:?}", d.name))),
                        FeatureKind::Categorical { categories } => categories
                            .iter()
                            .position(|c| c == cell)
                            .map(FeatureValue::Categorical)
                            .ok_or_else(|| io::row_error(path, line, format!("{}: unknown category {cell:?}", d.name))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FeatureVector {
                user_id: rec.get(0).unwrap_or_default().to_owned(),
                values,
            })
        })
        .collect()
}

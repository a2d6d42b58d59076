use std::sync::OnceLock;

use serde::Serialize;

use super::record::HOMETOWN_CARDINALITY;

pub const SCHEMA_VERSION: &str = "persona-features/1";
pub const FEATURE_COUNT: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FeatureGroup {
    BasicInfo,
    SnsUsage,
    TimeRelated,
    EmotionRelated,
    TimeEmotionRelated,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::BasicInfo,
        FeatureGroup::SnsUsage,
        FeatureGroup::TimeRelated,
        FeatureGroup::EmotionRelated,
        FeatureGroup::TimeEmotionRelated,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical { categories: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Named in the source feature design.
    Named,
    /// Filled in to complete the SNS-usage group.
    GapFill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Category,
    Years,
    Days,
    Count,
    Proportion,
    PerWeek,
    Tokens,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureDescriptor {
    pub name: &'static str,
    pub group: FeatureGroup,
    #[serde(flatten)]
    pub kind: FeatureKind,
    pub unit: Unit,
    pub provenance: Provenance,
    pub definition: &'static str,
    /// Short names under which the feature is also reported.
    pub aliases: &'static [&'static str],
}

impl FeatureDescriptor {
    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, FeatureKind::Categorical { .. })
    }

    pub fn categories(&self) -> &[String] {
        match &self.kind {
            FeatureKind::Categorical { categories } => categories,
            FeatureKind::Numeric => &[],
        }
    }
}

pub const EMOTION_CATEGORIES: [&str; 5] = ["none", "angry", "funny", "surprised", "moving"];
pub const PRONOUN_CATEGORIES: [&str; 3] = ["I", "you", "it"];

fn cats(names: &[&str]) -> FeatureKind {
    FeatureKind::Categorical {
        categories: names.iter().map(|s| s.to_string()).collect(),
    }
}

fn build() -> Vec<FeatureDescriptor> {
    use FeatureGroup::*;
    use Provenance::*;
    use Unit::*;

    let num = || FeatureKind::Numeric;
    let hometowns: Vec<String> = (0..HOMETOWN_CARDINALITY).map(|c| c.to_string()).collect();
    let d = |name, group, kind, unit, provenance, definition, aliases| FeatureDescriptor {
        name,
        group,
        kind,
        unit,
        provenance,
        definition,
        aliases,
    };

    vec![
        d("gender", BasicInfo, cats(&["m", "f"]), Category, Named, "profile gender", &[]),
        d("age", BasicInfo, num(), Years, Named, "reference year minus birth year", &[]),
        d(
            "hometown_code",
            BasicInfo,
            FeatureKind::Categorical { categories: hometowns },
            Category,
            Named,
            "province-level hometown id",
            &["hometown"],
        ),
        d("zidou", BasicInfo, num(), Count, Named, "virtual-currency balance", &[]),
        d(
            "account_tenure_days",
            BasicInfo,
            num(),
            Days,
            GapFill,
            "whole days from registration to the reference date",
            &[],
        ),
        // SNS usage
        d("friend_count", SnsUsage, num(), Count, Named, "number of friends", &["friend"]),
        d(
            "usage",
            SnsUsage,
            num(),
            PerWeek,
            Named,
            "login events per week since registration",
            &[],
        ),
        d("guestbook_count", SnsUsage, num(), Count, Named, "guestbook entries", &["guestbook"]),
        d(
            "blog_emoticon_count",
            SnsUsage,
            num(),
            Count,
            Named,
            "emoticons used across all blogs",
            &["blogemoticon"],
        ),
        d(
            "zzstatus_proportion",
            SnsUsage,
            num(),
            Proportion,
            Named,
            "republished statuses / all statuses",
            &["zzstatus"],
        ),
        d(
            "self_comment_proportion",
            SnsUsage,
            num(),
            Proportion,
            Named,
            "blog comments authored by the user / all blog comments received",
            &["selfcomment", "selfcommentproportion"],
        ),
        d(
            "friend_comment_proportion",
            SnsUsage,
            num(),
            Proportion,
            Named,
            "blog comments authored by friends / all blog comments received",
            &["friendcomment", "friendcommentproportion"],
        ),
        d(
            "blog_i_you_it",
            SnsUsage,
            cats(&PRONOUN_CATEGORIES),
            Category,
            Named,
            "dominant grammatical person across blog texts (ties I < you < it)",
            &["blogiyouit"],
        ),
        d("blog_count", SnsUsage, num(), Count, GapFill, "number of blogs", &[]),
        d("photo_count", SnsUsage, num(), Count, GapFill, "photos uploaded", &[]),
        d("album_count", SnsUsage, num(), Count, GapFill, "photo albums", &[]),
        d("share_count", SnsUsage, num(), Count, GapFill, "items shared", &[]),
        d("gift_count", SnsUsage, num(), Count, GapFill, "virtual gifts sent", &[]),
        d("checkin_count", SnsUsage, num(), Count, GapFill, "location check-ins", &[]),
        d(
            "comment_received_count",
            SnsUsage,
            num(),
            Count,
            GapFill,
            "comments received on blogs",
            &[],
        ),
        d(
            "comment_given_count",
            SnsUsage,
            num(),
            Count,
            GapFill,
            "comments written on others' content",
            &[],
        ),
        d(
            "status_emoticon_count",
            SnsUsage,
            num(),
            Count,
            GapFill,
            "emoticons used across all statuses",
            &[],
        ),
        d(
            "zzblog_proportion",
            SnsUsage,
            num(),
            Proportion,
            GapFill,
            "shares / (shares + blogs)",
            &[],
        ),
        d("avg_blog_length", SnsUsage, num(), Tokens, GapFill, "mean tokens per blog", &[]),
        d("avg_status_length", SnsUsage, num(), Tokens, GapFill, "mean tokens per status", &[]),
        d(
            "blog_i_ratio",
            SnsUsage,
            num(),
            Proportion,
            GapFill,
            "first-person pronouns / all pronouns in blogs",
            &[],
        ),
        d(
            "blog_you_ratio",
            SnsUsage,
            num(),
            Proportion,
            GapFill,
            "second-person pronouns / all pronouns in blogs",
            &[],
        ),
        d(
            "blog_it_ratio",
            SnsUsage,
            num(),
            Proportion,
            GapFill,
            "third-person pronouns / all pronouns in blogs",
            &[],
        ),
        d(
            "statuses_per_week",
            SnsUsage,
            num(),
            PerWeek,
            GapFill,
            "statuses per week since registration",
            &[],
        ),
        d(
            "blogs_per_week",
            SnsUsage,
            num(),
            PerWeek,
            GapFill,
            "blogs per week since registration",
            &[],
        ),
        d(
            "photo_comment_proportion",
            SnsUsage,
            num(),
            Proportion,
            GapFill,
            "photo comments / (photo comments + blog comments) received",
            &[],
        ),
        d("app_count", SnsUsage, num(), Count, GapFill, "installed applications", &[]),
        d("page_follow_count", SnsUsage, num(), Count, GapFill, "followed public pages", &[]),
        // time related
        d(
            "recent_status_count_30d",
            TimeRelated,
            num(),
            Count,
            Named,
            "statuses in the 30 days up to the reference date",
            &["recentstatus"],
        ),
        d(
            "recent_blog_count_30d",
            TimeRelated,
            num(),
            Count,
            Named,
            "blogs in the 30 days up to the reference date",
            &["recentblog"],
        ),
        d(
            "recent_comment_count_30d",
            TimeRelated,
            num(),
            Count,
            GapFill,
            "blog comments received in the 30 days up to the reference date",
            &[],
        ),
        // emotion related
        d(
            "blog_top_emotion",
            EmotionRelated,
            cats(&EMOTION_CATEGORIES),
            Category,
            Named,
            "most frequent predicted emotion over all blogs (none without blogs)",
            &["blogtopemotion"],
        ),
        d(
            "angry_blog_proportion",
            EmotionRelated,
            num(),
            Proportion,
            Named,
            "blogs predicted angry / all blogs",
            &["angryblog", "angryblogproportion"],
        ),
        // time and emotion related
        d(
            "recent_status_top_emotion_ratio",
            TimeEmotionRelated,
            num(),
            Proportion,
            Named,
            "count of the majority predicted emotion / statuses in the last 30 days",
            &["recentstatustopemotionratio"],
        ),
        d(
            "latest_status_emotion",
            TimeEmotionRelated,
            cats(&EMOTION_CATEGORIES),
            Category,
            Named,
            "predicted emotion of the newest status (none without statuses)",
            &[],
        ),
        d(
            "latest_emotion_length_days",
            TimeEmotionRelated,
            num(),
            Days,
            Named,
            "days from the earliest status of the newest same-emotion run to the reference date",
            &["emotionlength"],
        ),
    ]
}

/// The 41 feature slots in vector order.
pub fn feature_schema() -> &'static [FeatureDescriptor] {
    static SCHEMA: OnceLock<Vec<FeatureDescriptor>> = OnceLock::new();
    SCHEMA.get_or_init(build)
}

pub fn feature_index(name: &str) -> Option<usize> {
    feature_schema().iter().position(|d| d.name == name)
}

/// Resolves a schema name or a short report name such as `p(angryblog)`
/// or `zzstatus` to a descriptor.
pub fn resolve_feature(name: &str) -> Option<&'static FeatureDescriptor> {
    let trimmed = name.trim();
    let inner = trimmed
        .strip_prefix("p(")
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(trimmed);
    let key: String = inner
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase();
    feature_schema().iter().find(|d| {
        d.name == trimmed
            || d.name.replace('_', "") == key
            || d.aliases.iter().any(|a| *a == key)
    })
}

pub fn group_sizes() -> [usize; 5] {
    let mut out = [0; 5];
    for d in feature_schema() {
        let g = FeatureGroup::ALL.iter().position(|g| *g == d.group).unwrap();
        out[g] += 1;
    }
    out
}

#[derive(Serialize)]
struct SchemaFile<'a> {
    schema_version: &'static str,
    features: &'a [FeatureDescriptor],
}

/// The schema as the JSON document shipped in `data/feature_schema.json`.
pub fn schema_json() -> String {
    let file = SchemaFile {
        schema_version: SCHEMA_VERSION,
        features: feature_schema(),
    };
    serde_json::to_string_pretty(&file).expect("schema serializes") + "\n"
}

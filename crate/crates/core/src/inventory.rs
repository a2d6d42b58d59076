//! BFI-44 inventory scoring.
//!
//! Each of the 44 Likert items belongs to one trait dimension; reverse-keyed
//! items are flipped (`6 - answer`) before the per-dimension mean is taken.
//! The item key is embedded from `data/bfi44_key.json`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::io;
use crate::{Error, Result};

pub const ITEM_COUNT: usize = 44;

const KEY_JSON: &str = include_str!("../data/bfi44_key.json");

/// Big Five trait dimension, in the E, A, C, N, O order used for all output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "E")]
    Extraversion,
    #[serde(rename = "A")]
    Agreeableness,
    #[serde(rename = "C")]
    Conscientiousness,
    #[serde(rename = "N")]
    Neuroticism,
    #[serde(rename = "O")]
    Openness,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Extraversion,
        Dimension::Agreeableness,
        Dimension::Conscientiousness,
        Dimension::Neuroticism,
        Dimension::Openness,
    ];

    pub fn letter(self) -> &'static str {
        match self {
            Dimension::Extraversion => "E",
            Dimension::Agreeableness => "A",
            Dimension::Conscientiousness => "C",
            Dimension::Neuroticism => "N",
            Dimension::Openness => "O",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E" => Ok(Dimension::Extraversion),
            "A" => Ok(Dimension::Agreeableness),
            "C" => Ok(Dimension::Conscientiousness),
            "N" => Ok(Dimension::Neuroticism),
            "O" => Ok(Dimension::Openness),
            _ => Err(Error::validation("dimension", format!("unknown dimension {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyEntry {
    /// 1-based item number.
    pub item: usize,
    pub dimension: Dimension,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringKey {
    pub version: String,
    pub items: Vec<KeyEntry>,
}

impl ScoringKey {
    pub fn entry(&self, item: usize) -> &KeyEntry {
        &self.items[item - 1]
    }

    pub fn item_count(&self, dim: Dimension) -> usize {
        self.items.iter().filter(|e| e.dimension == dim).count()
    }

    fn validate(&self) -> Result<()> {
        if self.items.len() != ITEM_COUNT {
            return Err(Error::validation(
                "scoring key",
                format!("expected {ITEM_COUNT} items, found {}", self.items.len()),
            ));
        }
        for (i, e) in self.items.iter().enumerate() {
            if e.item != i + 1 {
                return Err(Error::validation(
                    format!("scoring key item {}", i + 1),
                    format!("out of order (found item {})", e.item),
                ));
            }
        }
        Ok(())
    }
}

/// The embedded BFI-44 key.
pub fn scoring_key() -> &'static ScoringKey {
    static KEY: OnceLock<ScoringKey> = OnceLock::new();
    KEY.get_or_init(|| {
        let key: ScoringKey = serde_json::from_str(KEY_JSON).expect("embedded BFI-44 key parses");
        key.validate().expect("embedded BFI-44 key is well formed");
        key
    })
}

/// 44 Likert answers in canonical item order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct InventoryResponse {
    answers: [u8; ITEM_COUNT],
}

impl InventoryResponse {
    pub fn new(answers: &[u8]) -> Result<Self> {
        if answers.len() != ITEM_COUNT {
            return Err(Error::validation(
                "answers",
                format!("expected {ITEM_COUNT} answers, found {}", answers.len()),
            ));
        }
        let mut out = [0u8; ITEM_COUNT];
        for (i, &a) in answers.iter().enumerate() {
            if !(1..=5).contains(&a) {
                return Err(Error::validation(
                    format!("answers[{}] (item {})", i, i + 1),
                    format!("answer {a} outside 1..=5"),
                ));
            }
            out[i] = a;
        }
        Ok(Self { answers: out })
    }

    pub fn answers(&self) -> &[u8; ITEM_COUNT] {
        &self.answers
    }
}

impl TryFrom<Vec<u8>> for InventoryResponse {
    type Error = Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        Self::new(&v)
    }
}

impl From<InventoryResponse> for Vec<u8> {
    fn from(r: InventoryResponse) -> Self {
        r.answers.to_vec()
    }
}

/// Per-dimension means on the 1..=5 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonalityScore {
    pub e: f64,
    pub a: f64,
    pub c: f64,
    pub n: f64,
    pub o: f64,
}

impl PersonalityScore {
    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            e: v[0],
            a: v[1],
            c: v[2],
            n: v[3],
            o: v[4],
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.e, self.a, self.c, self.n, self.o]
    }

    pub fn get(&self, dim: Dimension) -> f64 {
        self.to_array()[dim.index()]
    }
}

pub fn score_bfi(resp: &InventoryResponse) -> PersonalityScore {
    score_with_key(resp, scoring_key())
}

pub fn score_with_key(resp: &InventoryResponse, key: &ScoringKey) -> PersonalityScore {
    let mut sums = [0u32; 5];
    let mut counts = [0u32; 5];
    for (entry, &answer) in key.items.iter().zip(resp.answers.iter()) {
        let corrected = if entry.reversed { 6 - answer } else { answer };
        let d = entry.dimension.index();
        sums[d] += u32::from(corrected);
        counts[d] += 1;
    }
    let mut means = [0.0; 5];
    for d in 0..5 {
        means[d] = f64::from(sums[d]) / f64::from(counts[d]);
    }
    PersonalityScore::from_array(means)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantResponse {
    pub participant_id: String,
    pub answers: InventoryResponse,
}

/// Reads inventories from CSV (`participant_id,q1..q44`) or JSONL
/// (`{"participant_id": .., "answers": [..]}`), chosen by file extension.
pub fn read_inventories(path: &Path) -> Result<Vec<ParticipantResponse>> {
    let is_jsonl = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("json")
    );
    if is_jsonl {
        return io::read_jsonl(path);
    }
    let (header, rows) = io::read_csv(path)?;
    if header.len() != ITEM_COUNT + 1 {
        return Err(io::row_error(
            path,
            1,
            format!("expected participant_id plus {ITEM_COUNT} answer columns, found {} columns", header.len()),
        ));
    }
    rows.into_iter()
        .map(|(line, rec)| {
            let id = rec.get(0).unwrap_or_default().to_owned();
            let answers = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(i, cell)| {
                    cell.parse::<u8>().map_err(|_| {
                        io::row_error(path, line, format!("answers[{i}]: not an integer: {cell:?}"))
                    })
                })
                .collect::<Result<Vec<u8>>>()?;
            let answers = InventoryResponse::new(&answers)
                .map_err(|e| io::row_error(path, line, e.to_string()))?;
            Ok(ParticipantResponse {
                participant_id: id,
                answers,
            })
        })
        .collect()
}

pub fn inventories_csv(rows: &[ParticipantResponse]) -> Result<Vec<u8>> {
    let mut header = vec!["participant_id".to_owned()];
    header.extend((1..=ITEM_COUNT).map(|i| format!("q{i}")));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.participant_id.clone()];
            row.extend(r.answers.answers().iter().map(|a| a.to_string()));
            row
        })
        .collect();
    io::csv_bytes(&header, &body)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredParticipant {
    pub participant_id: String,
    pub score: PersonalityScore,
}

pub fn scores_csv(rows: &[ScoredParticipant]) -> Result<Vec<u8>> {
    let mut header = vec!["participant_id".to_owned()];
    header.extend(Dimension::ALL.iter().map(|d| d.letter().to_owned()));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.participant_id.clone()];
            row.extend(r.score.to_array().iter().map(|&x| io::fmt_f64(x)));
            row
        })
        .collect();
    io::csv_bytes(&header, &body)
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoredParticipant>> {
    let (header, rows) = io::read_csv(path)?;
    let expected: Vec<&str> = std::iter::once("participant_id")
        .chain(Dimension::ALL.iter().map(|d| d.letter()))
        .collect();
    if header != expected {
        return Err(io::row_error(path, 1, format!("expected header {}", expected.join(","))));
    }
    rows.into_iter()
        .map(|(line, rec)| {
            let mut v = [0.0; 5];
            for (d, slot) in v.iter_mut().enumerate() {
                let cell = rec.get(d + 1).unwrap_or_default();
                *slot = cell
                    .parse()
                    .map_err(|_| io::row_error(path, line, format!("{}: not a number: {cell:?}", expected[d + 1])))?;
                if !(1.0..=5.0).contains(slot) {
                    return Err(io::row_error(path, line, format!("{}: score {slot} outside [1,5]", expected[d + 1])));
                }
            }
            Ok(ScoredParticipant {
                participant_id: rec.get(0).unwrap_or_default().to_owned(),
                score: PersonalityScore::from_array(v),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_counts() {
        let key = scoring_key();
        let counts: Vec<usize> = Dimension::ALL.iter().map(|&d| key.item_count(d)).collect();
        assert_eq!(counts, vec![8, 9, 9, 8, 10]);
        assert_eq!(counts.iter().sum::<usize>(), ITEM_COUNT);
    }

    #[test]
    fn all_threes() {
        let s = score_bfi(&InventoryResponse::new(&[3; 44]).unwrap());
        assert_eq!(s.to_array(), [3.0; 5]);
    }

    #[test]
    fn maximal_answers() {
        let answers: Vec<u8> = scoring_key()
            .items
            .iter()
            .map(|e| if e.reversed { 1 } else { 5 })
            .collect();
        let s = score_bfi(&InventoryResponse::new(&answers).unwrap());
        assert_eq!(s.to_array(), [5.0; 5]);
    }

    #[test]
    fn rejects_bad_length_and_range() {
        assert!(InventoryResponse::new(&[3; 43]).is_err());
        let mut a = [3u8; 44];
        a[17] = 6;
        let err = InventoryResponse::new(&a).unwrap_err().to_string();
        assert!(err.contains("answers[17]"), "{err}");
        a[17] = 0;
        assert!(InventoryResponse::new(&a).is_err());
    }

    #[test]
    fn monotone_in_each_item() {
        let key = scoring_key();
        let base = [3u8; 44];
        let s0 = score_bfi(&InventoryResponse::new(&base).unwrap());
        for item in 1..=ITEM_COUNT {
            let mut a = base;
            a[item - 1] = 4;
            let s1 = score_bfi(&InventoryResponse::new(&a).unwrap());
            let e = key.entry(item);
            let k = key.item_count(e.dimension) as f64;
            for d in Dimension::ALL {
                let delta = s1.get(d) - s0.get(d);
                let expected = if d != e.dimension {
                    0.0
                } else if e.reversed {
                    -1.0 / k
                } else {
                    1.0 / k
                };
                assert!((delta - expected).abs() < 1e-12, "item {item} dim {d}");
            }
        }
    }

    #[test]
    fn json_rejects_invalid_answers() {
        let ok: ParticipantResponse =
            serde_json::from_str(&format!("{{\"participant_id\":\"p\",\"answers\":{:?}}}", [2u8; 44])).unwrap();
        assert_eq!(ok.answers.answers()[0], 2);
        let bad = serde_json::from_str::<ParticipantResponse>(&format!(
            "{{\"participant_id\":\"p\",\"answers\":{:?}}}",
            [2u8; 40]
        ));
        assert!(bad.is_err());
    }
}

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::emotion::{EmotionLabel, LabeledText};

pub const ANGRY: &[&str] = &[
    "furious", "outrage", "unfair", "hate", "annoyed", "rage", "scandal", "corrupt", "cheated",
    "insult", "disgust", "fuming",
];
pub const FUNNY: &[&str] = &[
    "haha", "lol", "joke", "hilarious", "silly", "laugh", "prank", "giggle", "comedy", "meme",
    "lmao", "goofy",
];
pub const SURPRISED: &[&str] = &[
    "wow", "unexpected", "shocking", "suddenly", "unbelievable", "amazed", "omg", "astonished",
    "whoa", "twist", "stunned", "jawdrop",
];
pub const MOVING: &[&str] = &[
    "tears", "touching", "grateful", "kindness", "family", "hug", "warm", "memories", "heartfelt",
    "hope", "tender", "cherish",
];
pub const PRONOUNS: &[&str] = &["i", "me", "my", "you", "your", "it", "he", "she", "they"];

/// Words the lexicon up-weights for each emotion.
const LEXICON_SIZE: usize = 4;

pub fn vocabulary(label: EmotionLabel) -> &'static [&'static str] {
    match label {
        EmotionLabel::Angry => ANGRY,
        EmotionLabel::Funny => FUNNY,
        EmotionLabel::Surprised => SURPRISED,
        EmotionLabel::Moving => MOVING,
    }
}

/// Space-joined bag of `len` words drawn from `label`'s vocabulary.
pub fn emotion_text<R: Rng>(rng: &mut R, label: EmotionLabel, len: usize) -> String {
    let vocab = vocabulary(label);
    (0..len)
        .map(|_| *vocab.choose(rng).expect("non-empty vocabulary"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Emotion words interleaved with `pronouns` pronoun tokens.
pub fn blog_text<R: Rng>(rng: &mut R, label: EmotionLabel, len: usize, pronouns: usize) -> String {
    let base = emotion_text(rng, label, len);
    let mut words: Vec<&str> = base.split(' ').collect();
    for _ in 0..pronouns {
        let at = rng.random_range(0..=words.len());
        words.insert(at, PRONOUNS.choose(rng).expect("non-empty pronoun list"));
    }
    words.join(" ")
}

pub fn training_corpus<R: Rng>(rng: &mut R, docs_per_class: usize) -> Vec<LabeledText> {
    let mut out = Vec::with_capacity(docs_per_class * 4);
    for label in EmotionLabel::ALL {
        for _ in 0..docs_per_class {
            let len = rng.random_range(6..=12);
            out.push(LabeledText {
                text: emotion_text(rng, label, len),
                label: label.as_str().to_owned(),
            });
        }
    }
    out
}

pub fn lexicon() -> BTreeSet<String> {
    EmotionLabel::ALL
        .iter()
        .flat_map(|&l| vocabulary(l)[..LEXICON_SIZE].iter().map(|w| w.to_string()))
        .collect()
}

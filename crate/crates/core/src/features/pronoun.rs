use serde::{Deserialize, Serialize};

use crate::emotion::tokenize;

/// Grammatical person. Third person covers he/she/they as well as it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Person {
    I,
    You,
    It,
}

impl Person {
    pub const ALL: [Person; 3] = [Person::I, Person::You, Person::It];

    pub fn as_str(self) -> &'static str {
        match self {
            Person::I => "I",
            Person::You => "you",
            Person::It => "it",
        }
    }
}

pub fn person_of(token: &str) -> Option<Person> {
    match token {
        "i" | "me" | "my" | "mine" | "myself" | "we" | "us" | "our" | "ours" | "ourselves" | "我"
        | "我们" => Some(Person::I),
        "you" | "your" | "yours" | "yourself" | "yourselves" | "你" | "您" | "你们" => {
            Some(Person::You)
        }
        "it" | "its" | "itself" | "he" | "him" | "his" | "himself" | "she" | "her" | "hers"
        | "herself" | "they" | "them" | "their" | "theirs" | "themselves" | "他" | "她" | "它"
        | "他们" | "她们" | "它们" => Some(Person::It),
        _ => None,
    }
}

/// Pronoun counts per person, in [`Person::ALL`] order.
pub fn pronoun_counts<S: AsRef<str>>(texts: &[S]) -> [usize; 3] {
    let mut counts = [0; 3];
    for text in texts {
        for tok in tokenize(text.as_ref()) {
            if let Some(p) = person_of(&tok) {
                counts[p as usize] += 1;
            }
        }
    }
    counts
}

/// Most used grammatical person; ties and empty input resolve toward `I`.
pub fn pronoun_profile<S: AsRef<str>>(texts: &[S]) -> Person {
    let counts = pronoun_counts(texts);
    let mut best = 0;
    for k in 1..3 {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    Person::ALL[best]
}

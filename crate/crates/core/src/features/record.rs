use std::path::Path;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use crate::io;
use crate::{Error, Result};

/// Largest accepted hometown code (exclusive).
pub const HOMETOWN_CARDINALITY: u16 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    M,
    F,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Status {
    pub timestamp: DateTime<Utc>,
    pub text: String,
    /// Reshared from another user rather than authored.
    #[serde(default)]
    pub is_republished: bool,
    #[serde(default)]
    pub emoticon_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub author_id: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blog {
    pub timestamp: DateTime<Utc>,
    pub text: String,
    #[serde(default)]
    pub emoticon_count: u32,
    #[serde(default)]
    pub comments: Vec<Comment>,
}

/// One user's raw behavior log, as ingested from JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub gender: Gender,
    pub birth_year: i32,
    pub hometown_code: u16,
    /// Virtual-currency balance.
    pub zidou: u64,
    pub registration_date: DateTime<Utc>,
    pub friend_count: u64,
    /// Ids of the user's friends; comment authors in this set count as
    /// friend comments.
    #[serde(default)]
    pub friend_ids: Vec<String>,
    #[serde(default)]
    pub login_events: Vec<DateTime<Utc>>,
    #[serde(default)]
    pub statuses: Vec<Status>,
    #[serde(default)]
    pub blogs: Vec<Blog>,
    #[serde(default)]
    pub photo_count: u64,
    #[serde(default)]
    pub photo_comment_count: u64,
    #[serde(default)]
    pub album_count: u64,
    #[serde(default)]
    pub share_count: u64,
    #[serde(default)]
    pub gift_count: u64,
    #[serde(default)]
    pub checkin_count: u64,
    #[serde(default)]
    pub guestbook_count: u64,
    #[serde(default)]
    pub app_count: u64,
    #[serde(default)]
    pub page_follow_count: u64,
    #[serde(default)]
    pub comments_given: u64,
}

impl UserRecord {
    /// Checks the invariants that depend on the reference instant: no
    /// event may postdate it.
    pub fn validate(&self, reference: DateTime<Utc>) -> Result<()> {
        let late = |field: String, ts: DateTime<Utc>| -> Result<()> {
            if ts > reference {
                Err(Error::validation(
                    format!("{}.{field}", self.user_id),
                    format!("timestamp {ts} is after the reference date {reference}"),
                ))
            } else {
                Ok(())
            }
        };
        if self.hometown_code >= HOMETOWN_CARDINALITY {
            return Err(Error::validation(
                format!("{}.hometown_code", self.user_id),
                format!("code {} must be below {HOMETOWN_CARDINALITY}", self.hometown_code),
            ));
        }
        if self.birth_year > reference.year() {
            return Err(Error::validation(
                format!("{}.birth_year", self.user_id),
                format!("birth year {} is after the reference year", self.birth_year),
            ));
        }
        late("registration_date".into(), self.registration_date)?;
        for (i, &t) in self.login_events.iter().enumerate() {
            late(format!("login_events[{i}]"), t)?;
        }
        for (i, s) in self.statuses.iter().enumerate() {
            late(format!("statuses[{i}].timestamp"), s.timestamp)?;
        }
        for (i, b) in self.blogs.iter().enumerate() {
            late(format!("blogs[{i}].timestamp"), b.timestamp)?;
            for (j, c) in b.comments.iter().enumerate() {
                late(format!("blogs[{i}].comments[{j}].timestamp"), c.timestamp)?;
            }
        }
        Ok(())
    }

    /// A record with a profile and no activity.
    pub fn empty(user_id: &str, registration_date: DateTime<Utc>) -> Self {
        UserRecord {
            user_id: user_id.to_owned(),
            gender: Gender::F,
            birth_year: 1990,
            hometown_code: 0,
            zidou: 0,
            registration_date,
            friend_count: 0,
            friend_ids: Vec::new(),
            login_events: Vec::new(),
            statuses: Vec::new(),
            blogs: Vec::new(),
            photo_count: 0,
            photo_comment_count: 0,
            album_count: 0,
            share_count: 0,
            gift_count: 0,
            checkin_count: 0,
            guestbook_count: 0,
            app_count: 0,
            page_follow_count: 0,
            comments_given: 0,
        }
    }
}

pub fn read_records(path: &Path) -> Result<Vec<UserRecord>> {
    io::read_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let r: UserRecord = serde_json::from_str(
            r#"{"user_id":"u1","gender":"m","birth_year":1989,"hometown_code":3,"zidou":10,
                "registration_date":"2010-01-01T00:00:00Z","friend_count":120}"#,
        )
        .unwrap();
        assert!(r.statuses.is_empty());
        assert_eq!(r.gender, Gender::M);
        r.validate(ts("2012-03-01T00:00:00Z")).unwrap();
    }

    #[test]
    fn rejects_future_timestamps() {
        let mut r = UserRecord::empty("u", ts("2011-01-01T00:00:00Z"));
        r.statuses.push(Status {
            timestamp: ts("2013-01-01T00:00:00Z"),
            text: String::new(),
            is_republished: false,
            emoticon_count: 0,
        });
        let err = r.validate(ts("2012-03-01T00:00:00Z")).unwrap_err().to_string();
        assert!(err.contains("statuses[0].timestamp"), "{err}");
    }

    #[test]
    fn rejects_large_hometown() {
        let mut r = UserRecord::empty("u", ts("2011-01-01T00:00:00Z"));
        r.hometown_code = 64;
        assert!(r.validate(ts("2012-03-01T00:00:00Z")).is_err());
    }
}

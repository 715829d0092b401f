use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Contribution, Dataset, Feedback, FeedbackSchema, Item, User};
use crate::error::{Error, Result};

/// The five JSON-Lines inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub users: PathBuf,
    pub items: PathBuf,
    pub reviews: PathBuf,
    pub tips: PathBuf,
    pub friends: PathBuf,
}

impl DatasetPaths {
    /// `users.jsonl`, `items.jsonl`, ... inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        DatasetPaths {
            users: dir.join("users.jsonl"),
            items: dir.join("items.jsonl"),
            reviews: dir.join("reviews.jsonl"),
            tips: dir.join("tips.jsonl"),
            friends: dir.join("friends.jsonl"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplimentsRecord {
    #[serde(default)]
    pub more: u64,
    #[serde(default)]
    pub thanks: u64,
    #[serde(default)]
    pub great_writer: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    #[serde(default)]
    pub elite_years: u64,
    #[serde(default)]
    pub compliments: ComplimentsRecord,
    #[serde(default)]
    pub fans: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub item_id: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub user_id: String,
    pub item_id: String,
    pub rating: i64,
    #[serde(default)]
    pub useful: u64,
    #[serde(default)]
    pub funny: u64,
    #[serde(default)]
    pub cool: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_votes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_votes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TipRecord {
    pub user_id: String,
    pub item_id: String,
    #[serde(default)]
    pub like: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FriendRecord {
    pub a: String,
    pub b: String,
}

impl From<UserRecord> for User {
    fn from(r: UserRecord) -> Self {
        User {
            user_id: r.user_id,
            elite_years: r.elite_years,
            compliments_more: r.compliments.more,
            compliments_thanks: r.compliments.thanks,
            compliments_great_writer: r.compliments.great_writer,
            fans: r.fans,
        }
    }
}

impl From<&User> for UserRecord {
    fn from(u: &User) -> Self {
        UserRecord {
            user_id: u.user_id.clone(),
            elite_years: u.elite_years,
            compliments: ComplimentsRecord {
                more: u.compliments_more,
                thanks: u.compliments_thanks,
                great_writer: u.compliments_great_writer,
            },
            fans: u.fans,
        }
    }
}

/// Read every non-blank line of `path` as a `T`, handing each record to
/// `sink`. Errors carry the 1-based line number.
fn for_each_record<T, F>(path: &Path, mut sink: F) -> Result<()>
where
    T: DeserializeOwned,
    F: FnMut(T) -> Result<()>,
{
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T =
            serde_json::from_str(&line).map_err(|e| Error::Parse(e.to_string()).at(path, n + 1))?;
        sink(record).map_err(|e| e.at(path, n + 1))?;
    }
    Ok(())
}

/// Load and validate a dataset. Users and items are read first so that
/// every contribution and friend edge can be checked for dangling
/// references.
pub fn load_dataset(paths: &DatasetPaths, schema: FeedbackSchema) -> Result<Dataset> {
    let mut b = Dataset::builder(schema);
    for_each_record(&paths.users, |r: UserRecord| b.add_user(r.into()).map(drop))?;
    for_each_record(&paths.items, |r: ItemRecord| {
        b.add_item(Item {
            item_id: r.item_id,
            tags: r.tags,
        })
        .map(drop)
    })?;
    for_each_record(&paths.reviews, |r: ReviewRecord| {
        b.add_review(
            &r.user_id,
            &r.item_id,
            r.rating,
            r.useful,
            r.funny,
            r.cool,
            r.positive_votes,
            r.negative_votes,
        )
    })?;
    for_each_record(&paths.tips, |r: TipRecord| {
        b.add_tip(&r.user_id, &r.item_id, r.like)
    })?;
    for_each_record(&paths.friends, |r: FriendRecord| b.add_friend(&r.a, &r.b))?;
    Ok(b.build())
}

fn write_records<T: Serialize>(path: &Path, records: impl Iterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(&r).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write `d` as the five JSON-Lines files `load_dataset` reads.
pub fn save_dataset(d: &Dataset, paths: &DatasetPaths) -> Result<()> {
    write_records(&paths.users, d.users().iter().map(UserRecord::from))?;
    write_records(
        &paths.items,
        d.items().iter().map(|i| ItemRecord {
            item_id: i.item_id.clone(),
            tags: i.tags.clone(),
        }),
    )?;
    let id = |c: &Contribution| (d.user_id(c.author).to_string(), d.item_id(c.item).to_string());
    write_records(
        &paths.reviews,
        d.contributions().iter().filter_map(|c| match c.feedback {
            Feedback::Review {
                rating,
                useful,
                funny,
                cool,
                positive_votes,
                negative_votes,
            } => {
                let (user_id, item_id) = id(c);
                Some(ReviewRecord {
                    user_id,
                    item_id,
                    rating: i64::from(rating),
                    useful,
                    funny,
                    cool,
                    positive_votes,
                    negative_votes,
                })
            }
            Feedback::Tip { .. } => None,
        }),
    )?;
    write_records(
        &paths.tips,
        d.contributions().iter().filter_map(|c| match c.feedback {
            Feedback::Tip { like } => {
                let (user_id, item_id) = id(c);
                Some(TipRecord {
                    user_id,
                    item_id,
                    like,
                })
            }
            Feedback::Review { .. } => None,
        }),
    )?;
    write_records(
        &paths.friends,
        d.friends().iter().map(|e| FriendRecord {
            a: d.user_id(e.a).to_string(),
            b: d.user_id(e.b).to_string(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn fixture(reviews: &str) -> (tempfile::TempDir, DatasetPaths) {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "users.jsonl",
            concat!(
                r#"{"user_id":"a","elite_years":2,"compliments":{"more":1,"thanks":2,"great_writer":3},"fans":4}"#,
                "\n",
                r#"{"user_id":"b"}"#,
                "\n\n",
                r#"{"user_id":"c","fans":1}"#,
                "\n"
            ),
        );
        write(
            dir.path(),
            "items.jsonl",
            "{\"item_id\":\"x\",\"tags\":[\"Hotels\"]}\n{\"item_id\":\"y\",\"tags\":[]}\n",
        );
        write(dir.path(), "reviews.jsonl", reviews);
        write(
            dir.path(),
            "tips.jsonl",
            "{\"user_id\":\"c\",\"item_id\":\"x\",\"like\":5}\n",
        );
        write(dir.path(), "friends.jsonl", "{\"a\":\"a\",\"b\":\"b\"}\n");
        let paths = DatasetPaths::in_dir(dir.path());
        (dir, paths)
    }

    #[test]
    fn loads_three_users_two_reviews() {
        let (_dir, paths) = fixture(concat!(
            r#"{"user_id":"a","item_id":"x","rating":4,"useful":2,"funny":1,"cool":0}"#,
            "\n",
            r#"{"user_id":"b","item_id":"y","rating":2}"#,
            "\n"
        ));
        let d = load_dataset(&paths, FeedbackSchema::PositiveOnly).unwrap();
        assert_eq!(d.num_users(), 3);
        assert_eq!(
            d.contributions().iter().filter(|c| c.rating().is_some()).count(),
            2
        );
        assert_eq!(d.contributions().len(), 3);
        assert_eq!(d.users()[0].compliments(), 6);
        assert_eq!(d.rating(0, 0), Some(4));
        assert_eq!(d.friends().len(), 1);
    }

    #[test]
    fn rating_out_of_range_has_line_number() {
        let (_dir, paths) = fixture(concat!(
            r#"{"user_id":"a","item_id":"x","rating":4}"#,
            "\n",
            r#"{"user_id":"b","item_id":"y","rating":6}"#,
            "\n"
        ));
        let err = load_dataset(&paths, FeedbackSchema::PositiveOnly).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("reviews.jsonl:2"), "{msg}");
        assert!(msg.contains("rating out of range"), "{msg}");
    }

    #[test]
    fn duplicate_review_rejected() {
        let (_dir, paths) = fixture(concat!(
            r#"{"user_id":"a","item_id":"x","rating":4}"#,
            "\n",
            r#"{"user_id":"a","item_id":"x","rating":5}"#,
            "\n"
        ));
        let msg = load_dataset(&paths, FeedbackSchema::PositiveOnly)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("duplicate contribution"), "{msg}");
    }

    #[test]
    fn malformed_and_dangling_lines() {
        let (_dir, paths) = fixture("{\"user_id\":\"a\",\"item_id\":\"x\"\n");
        let msg = load_dataset(&paths, FeedbackSchema::PositiveOnly)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("reviews.jsonl:1"), "{msg}");

        let (_dir, paths) = fixture("{\"user_id\":\"nobody\",\"item_id\":\"x\",\"rating\":3}\n");
        let msg = load_dataset(&paths, FeedbackSchema::PositiveOnly)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("dangling reference"), "{msg}");
    }

    #[test]
    fn save_then_load_is_identity() {
        let (_dir, paths) = fixture(concat!(
            r#"{"user_id":"a","item_id":"x","rating":4,"useful":2,"funny":1,"cool":0}"#,
            "\n"
        ));
        let d = load_dataset(&paths, FeedbackSchema::PositiveOnly).unwrap();
        let out = tempfile::tempdir().unwrap();
        let out_paths = DatasetPaths::in_dir(out.path());
        save_dataset(&d, &out_paths).unwrap();
        assert_eq!(load_dataset(&out_paths, FeedbackSchema::PositiveOnly).unwrap(), d);
    }

    #[test]
    fn positive_negative_schema_needs_votes() {
        let (_dir, paths) = fixture("{\"user_id\":\"a\",\"item_id\":\"x\",\"rating\":3}\n");
        assert!(load_dataset(&paths, FeedbackSchema::PositiveNegative).is_err());
        let (_dir, paths) = fixture(
            "{\"user_id\":\"a\",\"item_id\":\"x\",\"rating\":3,\"positive_votes\":3,\"negative_votes\":1}\n",
        );
        let d = load_dataset(&paths, FeedbackSchema::PositiveNegative).unwrap();
        assert_eq!(d.num_ratings(), 1);
    }
}

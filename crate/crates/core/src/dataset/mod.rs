//! In-memory social review dataset.
//!
//! Users, items, contributions (reviews and tips) and undirected friend
//! relations are stored in dense index order. Identifiers are kept only for
//! I/O and deterministic tie-breaking; everything downstream works on
//! `usize` indices.

mod load;
mod split;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{
    load_dataset, save_dataset, ComplimentsRecord, DatasetPaths, FriendRecord, ItemRecord, ReviewRecord,
    TipRecord, UserRecord,
};
pub use split::{kfold, split_holdout, SplitPlan};

/// Which kind of feedback contributions can receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FeedbackSchema {
    /// Only appreciations (useful, funny, cool, like).
    #[default]
    PositiveOnly,
    /// Reviews carry positive and negative votes.
    PositiveNegative,
}

impl std::str::FromStr for FeedbackSchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive-only" | "positive" => Ok(FeedbackSchema::PositiveOnly),
            "positive-negative" | "pn" => Ok(FeedbackSchema::PositiveNegative),
            other => Err(Error::InvalidArgument(format!("unknown schema {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct User {
    pub user_id: String,
    pub elite_years: u64,
    pub compliments_more: u64,
    pub compliments_thanks: u64,
    pub compliments_great_writer: u64,
    pub fans: u64,
}

impl User {
    pub fn new(user_id: impl Into<String>) -> Self {
        User {
            user_id: user_id.into(),
            elite_years: 0,
            compliments_more: 0,
            compliments_thanks: 0,
            compliments_great_writer: 0,
            fans: 0,
        }
    }

    /// more + thanks + great writer.
    pub fn compliments(&self) -> u64 {
        self.compliments_more + self.compliments_thanks + self.compliments_great_writer
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub item_id: String,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContributionKind {
    Review,
    Tip,
}

impl ContributionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ContributionKind::Review => "review",
            ContributionKind::Tip => "tip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Review {
        rating: u8,
        useful: u64,
        funny: u64,
        cool: u64,
        positive_votes: Option<u64>,
        negative_votes: Option<u64>,
    },
    Tip {
        like: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contribution {
    pub author: usize,
    pub item: usize,
    pub feedback: Feedback,
}

impl Contribution {
    pub fn kind(&self) -> ContributionKind {
        match self.feedback {
            Feedback::Review { .. } => ContributionKind::Review,
            Feedback::Tip { .. } => ContributionKind::Tip,
        }
    }

    pub fn rating(&self) -> Option<u8> {
        match self.feedback {
            Feedback::Review { rating, .. } => Some(rating),
            Feedback::Tip { .. } => None,
        }
    }
}

/// Undirected friendship, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FriendEdge {
    pub a: usize,
    pub b: usize,
}

/// One observed rating in index space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    schema: FeedbackSchema,
    users: Vec<User>,
    items: Vec<Item>,
    contributions: Vec<Contribution>,
    friends: Vec<FriendEdge>,
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    ratings: HashMap<(usize, usize), u8>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema
            && self.users == other.users
            && self.items == other.items
            && self.contributions == other.contributions
            && self.friends == other.friends
    }
}

impl Dataset {
    pub fn builder(schema: FeedbackSchema) -> DatasetBuilder {
        DatasetBuilder::new(schema)
    }

    pub fn schema(&self) -> FeedbackSchema {
        self.schema
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn contributions(&self) -> &[Contribution] {
        &self.contributions
    }

    pub fn friends(&self) -> &[FriendEdge] {
        &self.friends
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn user_id(&self, user: usize) -> &str {
        &self.users[user].user_id
    }

    pub fn item_id(&self, item: usize) -> &str {
        &self.items[item].item_id
    }

    pub fn user_index(&self, user_id: &str) -> Option<usize> {
        self.user_index.get(user_id).copied()
    }

    pub fn item_index(&self, item_id: &str) -> Option<usize> {
        self.item_index.get(item_id).copied()
    }

    pub fn rating(&self, user: usize, item: usize) -> Option<u8> {
        self.ratings.get(&(user, item)).copied()
    }

    pub fn num_ratings(&self) -> usize {
        self.ratings.len()
    }

    /// The known-rating set, in contribution order.
    pub fn rated_pairs(&self) -> Vec<(usize, usize)> {
        self.contributions
            .iter()
            .filter(|c| c.kind() == ContributionKind::Review)
            .map(|c| (c.author, c.item))
            .collect()
    }

    /// Look up the ratings of the given pairs. Pairs without a rating are
    /// skipped.
    pub fn ratings_for(&self, pairs: &[(usize, usize)]) -> Vec<Rating> {
        pairs
            .iter()
            .filter_map(|&(user, item)| {
                self.rating(user, item).map(|r| Rating {
                    user,
                    item,
                    value: f64::from(r),
                })
            })
            .collect()
    }

    pub fn stats(&self) -> DatasetStats {
        let users = self.num_users();
        let items = self.num_items();
        let ratings = self.num_ratings();
        let friend_links = 2 * self.friends.len();
        let cells = users as f64 * items as f64;
        let pairs = users as f64 * users.saturating_sub(1) as f64;
        DatasetStats {
            users,
            items,
            ratings,
            friend_edges: self.friends.len(),
            friend_links,
            rating_sparsity: if cells > 0.0 {
                1.0 - ratings as f64 / cells
            } else {
                0.0
            },
            friend_sparsity: if pairs > 0.0 {
                1.0 - friend_links as f64 / pairs
            } else {
                0.0
            },
        }
    }
}

/// Table-1-style counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub users: usize,
    pub items: usize,
    pub ratings: usize,
    /// Undirected friend relations.
    pub friend_edges: usize,
    /// Directed social links, two per friend relation.
    pub friend_links: usize,
    /// `1 - ratings / (users * items)`.
    pub rating_sparsity: f64,
    /// `1 - links / (users * (users - 1))`.
    pub friend_sparsity: f64,
}

impl std::fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "users\t{}", self.users)?;
        writeln!(f, "items\t{}", self.items)?;
        writeln!(f, "ratings\t{}", self.ratings)?;
        writeln!(f, "friend_relations\t{}", self.friend_edges)?;
        writeln!(f, "social_links\t{}", self.friend_links)?;
        writeln!(f, "rating_sparsity\t{}", self.rating_sparsity)?;
        write!(f, "friend_sparsity\t{}", self.friend_sparsity)
    }
}

/// Validating constructor. Users and items are registered first; the
/// contribution and friend adders resolve identifiers and reject dangling
/// references and duplicates.
#[derive(Debug)]
pub struct DatasetBuilder {
    schema: FeedbackSchema,
    users: Vec<User>,
    items: Vec<Item>,
    contributions: Vec<Contribution>,
    friends: Vec<FriendEdge>,
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    seen: BTreeSet<(usize, usize, ContributionKind)>,
    seen_friends: BTreeSet<FriendEdge>,
    ratings: HashMap<(usize, usize), u8>,
}

impl DatasetBuilder {
    pub fn new(schema: FeedbackSchema) -> Self {
        DatasetBuilder {
            schema,
            users: Vec::new(),
            items: Vec::new(),
            contributions: Vec::new(),
            friends: Vec::new(),
            user_index: HashMap::new(),
            item_index: HashMap::new(),
            seen: BTreeSet::new(),
            seen_friends: BTreeSet::new(),
            ratings: HashMap::new(),
        }
    }

    pub fn add_user(&mut self, user: User) -> Result<usize> {
        if self.user_index.contains_key(&user.user_id) {
            return Err(Error::DuplicateId("user", user.user_id));
        }
        let idx = self.users.len();
        self.user_index.insert(user.user_id.clone(), idx);
        self.users.push(user);
        Ok(idx)
    }

    pub fn add_item(&mut self, item: Item) -> Result<usize> {
        if self.item_index.contains_key(&item.item_id) {
            return Err(Error::DuplicateId("item", item.item_id));
        }
        let idx = self.items.len();
        self.item_index.insert(item.item_id.clone(), idx);
        self.items.push(item);
        Ok(idx)
    }

    fn resolve_user(&self, id: &str) -> Result<usize> {
        self.user_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::DanglingReference("user", id.to_string()))
    }

    fn resolve_item(&self, id: &str) -> Result<usize> {
        self.item_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::DanglingReference("item", id.to_string()))
    }

    /// Add a review. `rating` is checked against the 1..=5 scale.
    #[allow(clippy::too_many_arguments)]
    pub fn add_review(
        &mut self,
        user_id: &str,
        item_id: &str,
        rating: i64,
        useful: u64,
        funny: u64,
        cool: u64,
        positive_votes: Option<u64>,
        negative_votes: Option<u64>,
    ) -> Result<()> {
        if !(1..=5).contains(&rating) {
            return Err(Error::RatingOutOfRange(rating));
        }
        if self.schema == FeedbackSchema::PositiveNegative
            && (positive_votes.is_none() || negative_votes.is_none())
        {
            return Err(Error::Parse(
                "positive-negative schema requires positive_votes and negative_votes".into(),
            ));
        }
        let feedback = Feedback::Review {
            rating: rating as u8,
            useful,
            funny,
            cool,
            positive_votes,
            negative_votes,
        };
        self.push_contribution(user_id, item_id, feedback)
    }

    pub fn add_tip(&mut self, user_id: &str, item_id: &str, like: u64) -> Result<()> {
        self.push_contribution(user_id, item_id, Feedback::Tip { like })
    }

    fn push_contribution(&mut self, user_id: &str, item_id: &str, feedback: Feedback) -> Result<()> {
        let author = self.resolve_user(user_id)?;
        let item = self.resolve_item(item_id)?;
        let c = Contribution {
            author,
            item,
            feedback,
        };
        if !self.seen.insert((author, item, c.kind())) {
            return Err(Error::DuplicateContribution {
                kind: c.kind().as_str(),
                user: user_id.to_string(),
                item: item_id.to_string(),
            });
        }
        if let Some(r) = c.rating() {
            self.ratings.insert((author, item), r);
        }
        self.contributions.push(c);
        Ok(())
    }

    pub fn add_friend(&mut self, a: &str, b: &str) -> Result<()> {
        let ia = self.resolve_user(a)?;
        let ib = self.resolve_user(b)?;
        if ia == ib {
            return Err(Error::InvalidFriendEdge(a.into(), b.into(), "self loop"));
        }
        let edge = FriendEdge {
            a: ia.min(ib),
            b: ia.max(ib),
        };
        if !self.seen_friends.insert(edge) {
            return Err(Error::InvalidFriendEdge(a.into(), b.into(), "duplicate pair"));
        }
        self.friends.push(edge);
        Ok(())
    }

    pub fn build(self) -> Dataset {
        Dataset {
            schema: self.schema,
            users: self.users,
            items: self.items,
            contributions: self.contributions,
            friends: self.friends,
            user_index: self.user_index,
            item_index: self.item_index,
            ratings: self.ratings,
        }
    }
}

/// Keep items carrying at least one of `category_tags` (all items when the
/// set is empty), then keep users with at least `min_ratings` reviews on the
/// surviving items. Contributions and friend edges are restricted to what
/// survives; relative order is preserved.
pub fn filter_dataset(d: &Dataset, min_ratings: usize, category_tags: &BTreeSet<String>) -> Dataset {
    let keep_item: Vec<bool> = d
        .items
        .iter()
        .map(|it| category_tags.is_empty() || it.tags.iter().any(|t| category_tags.contains(t)))
        .collect();

    let mut reviews_on_kept = vec![0usize; d.num_users()];
    for c in &d.contributions {
        if c.kind() == ContributionKind::Review && keep_item[c.item] {
            reviews_on_kept[c.author] += 1;
        }
    }
    let keep_user: Vec<bool> = reviews_on_kept.iter().map(|&n| n >= min_ratings).collect();

    let user_map = remap(&keep_user);
    let item_map = remap(&keep_item);

    let users: Vec<User> = d
        .users
        .iter()
        .zip(&keep_user)
        .filter(|(_, &k)| k)
        .map(|(u, _)| u.clone())
        .collect();
    let items: Vec<Item> = d
        .items
        .iter()
        .zip(&keep_item)
        .filter(|(_, &k)| k)
        .map(|(i, _)| i.clone())
        .collect();
    let contributions: Vec<Contribution> = d
        .contributions
        .iter()
        .filter_map(|c| {
            Some(Contribution {
                author: user_map[c.author]?,
                item: item_map[c.item]?,
                feedback: c.feedback,
            })
        })
        .collect();
    let friends: Vec<FriendEdge> = d
        .friends
        .iter()
        .filter_map(|e| {
            Some(FriendEdge {
                a: user_map[e.a]?,
                b: user_map[e.b]?,
            })
        })
        .collect();

    let user_index = users
        .iter()
        .enumerate()
        .map(|(i, u)| (u.user_id.clone(), i))
        .collect();
    let item_index = items
        .iter()
        .enumerate()
        .map(|(i, it)| (it.item_id.clone(), i))
        .collect();
    let ratings = contributions
        .iter()
        .filter_map(|c| c.rating().map(|r| ((c.author, c.item), r)))
        .collect();

    Dataset {
        schema: d.schema,
        users,
        items,
        contributions,
        friends,
        user_index,
        item_index,
        ratings,
    }
}

fn remap(keep: &[bool]) -> Vec<Option<usize>> {
    let mut next = 0;
    keep.iter()
        .map(|&k| {
            k.then(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

//! Synthetic social review data with planted reliable and noisy raters.
//!
//! Reliable raters rate according to shared latent tastes, receive a lot of
//! feedback on their reviews and profiles, and befriend like-minded reliable
//! users. Noisy raters rate uniformly at random, receive little feedback and
//! befriend users at random.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Dataset, FeedbackSchema, Item, User};
use crate::error::Result;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub users: usize,
    pub items: usize,
    /// Share of users whose ratings are noise.
    pub noisy_fraction: f64,
    pub ratings_per_user: usize,
    pub latent_dim: usize,
    pub friends_per_user: usize,
    /// Standard deviation of the rating noise of reliable users.
    pub rating_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 200,
            items: 200,
            noisy_fraction: 0.3,
            ratings_per_user: 30,
            latent_dim: 3,
            friends_per_user: 6,
            rating_noise: 0.3,
            seed: 0,
        }
    }
}

/// A generated dataset together with the ground truth of who is noisy.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub dataset: Dataset,
    pub noisy: Vec<bool>,
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    let mut rng = rng::stream(cfg.seed, rng::STREAM_SYNTH);
    let dim = cfg.latent_dim.max(1);
    let n_noisy = (cfg.noisy_fraction * cfg.users as f64).round() as usize;
    let mut noisy: Vec<bool> = (0..cfg.users).map(|u| u < n_noisy).collect();
    noisy.shuffle(&mut rng);

    let taste: Vec<Vec<f64>> = (0..cfg.users)
        .map(|_| (0..dim).map(|_| normal(&mut rng)).collect())
        .collect();
    let traits: Vec<Vec<f64>> = (0..cfg.items)
        .map(|_| (0..dim).map(|_| normal(&mut rng)).collect())
        .collect();
    let scale = 1.4 / (dim as f64).sqrt();
    let item_bias: Vec<f64> = (0..cfg.items).map(|_| 0.4 * normal(&mut rng)).collect();

    let uid = |u: usize| format!("user{u:04}");
    let iid = |i: usize| format!("item{i:04}");
    let mut b = Dataset::builder(FeedbackSchema::PositiveOnly);
    for (u, &is_noisy) in noisy.iter().enumerate() {
        let mut user = User::new(uid(u));
        if is_noisy {
            user.elite_years = 0;
            user.compliments_more = rng.gen_range(0..=1);
            user.compliments_thanks = rng.gen_range(0..=1);
            user.compliments_great_writer = 0;
            user.fans = rng.gen_range(0..=2);
        } else {
            user.elite_years = rng.gen_range(1..=10);
            user.compliments_more = rng.gen_range(5..=40);
            user.compliments_thanks = rng.gen_range(5..=40);
            user.compliments_great_writer = rng.gen_range(0..=20);
            user.fans = rng.gen_range(5..=80);
        }
        b.add_user(user)?;
    }
    for i in 0..cfg.items {
        let tag = if i % 2 == 0 { "Hotels" } else { "Hostels" };
        b.add_item(Item {
            item_id: iid(i),
            tags: vec![tag.to_string()],
        })?;
    }

    let all_items: Vec<usize> = (0..cfg.items).collect();
    let per_user = cfg.ratings_per_user.min(cfg.items);
    for u in 0..cfg.users {
        let chosen: Vec<usize> = all_items.choose_multiple(&mut rng, per_user).copied().collect();
        for &i in &chosen {
            let (rating, useful, funny, cool) = if noisy[u] {
                (rng.gen_range(1..=5), rng.gen_range(0..=1), 0, 0)
            } else {
                let affinity: f64 = taste[u].iter().zip(&traits[i]).map(|(a, b)| a * b).sum();
                let raw = 3.0 + item_bias[i] + scale * affinity + cfg.rating_noise * normal(&mut rng);
                (
                    raw.round().clamp(1.0, 5.0) as i64,
                    rng.gen_range(2..=8),
                    rng.gen_range(0..=3),
                    rng.gen_range(0..=3),
                )
            };
            b.add_review(&uid(u), &iid(i), rating, useful, funny, cool, None, None)?;
        }
        // a few tips on rated items
        for &i in chosen.iter().take(3) {
            let like = if noisy[u] {
                rng.gen_range(0..=1)
            } else {
                rng.gen_range(1..=5)
            };
            b.add_tip(&uid(u), &iid(i), like)?;
        }
    }

    let reliable: Vec<usize> = (0..cfg.users).filter(|&u| !noisy[u]).collect();
    let mut edges = std::collections::BTreeSet::new();
    for u in 0..cfg.users {
        let want = if noisy[u] {
            cfg.friends_per_user / 2
        } else {
            cfg.friends_per_user
        };
        let mut attempts = 0;
        let mut made = 0;
        while made < want && attempts < 50 * want.max(1) {
            attempts += 1;
            let v = if noisy[u] {
                rng.gen_range(0..cfg.users)
            } else {
                match reliable.choose(&mut rng) {
                    Some(&v) => v,
                    None => break,
                }
            };
            if v == u {
                continue;
            }
            if !noisy[u] {
                let sim: f64 = taste[u].iter().zip(&taste[v]).map(|(a, b)| a * b).sum();
                if sim <= 0.0 {
                    continue;
                }
            }
            if edges.insert((u.min(v), u.max(v))) {
                made += 1;
            }
        }
    }
    for (a, c) in edges {
        b.add_friend(&uid(a), &uid(c))?;
    }
    Ok(SynthData {
        dataset: b.build(),
        noisy,
    })
}

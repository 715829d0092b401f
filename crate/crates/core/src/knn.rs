//! User-to-user neighbourhood baselines.
//!
//! U2UCF picks neighbours by positive Pearson similarity; U2USocial picks
//! them among the user's friends with unit weight. Both predict the user's
//! mean plus the weighted mean deviation of the neighbours' ratings.

use crate::dataset::Rating;
use crate::factorization::{co_rated, pearson, RATING_MAX, RATING_MIN};
use crate::ratings::UserRatings;
use crate::trustgraph::SocialGraph;

pub const DEFAULT_K_NEIGHBORS: usize = 40;
pub const DEFAULT_MIN_OVERLAP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborSource {
    Similarity,
    Friends,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodSpec {
    pub k_neighbors: usize,
    /// Minimum co-rated items for a similarity neighbour.
    pub min_overlap: usize,
    pub source: NeighborSource,
}

impl NeighborhoodSpec {
    pub fn new(source: NeighborSource) -> Self {
        NeighborhoodSpec {
            k_neighbors: DEFAULT_K_NEIGHBORS,
            min_overlap: DEFAULT_MIN_OVERLAP,
            source,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KnnPredictor {
    table: UserRatings,
    raters: Vec<Vec<(usize, f64)>>,
    friends: Vec<Vec<usize>>,
    /// Position of each user in ascending-id order, for tie-breaking.
    id_order: Vec<usize>,
    spec: NeighborhoodSpec,
}

impl KnnPredictor {
    /// `graph` supplies friends for the social source and user ids for
    /// tie-breaking; it must cover `num_users` nodes.
    pub fn new(
        num_users: usize,
        num_items: usize,
        ratings: &[Rating],
        graph: &SocialGraph,
        spec: NeighborhoodSpec,
    ) -> Self {
        let table = UserRatings::new(num_users, ratings);
        let mut raters = vec![Vec::new(); num_items];
        for r in ratings {
            raters[r.item].push((r.user, r.value));
        }
        let friends = (0..num_users).map(|u| graph.neighbors(u).to_vec()).collect();
        let mut by_id: Vec<usize> = (0..num_users).collect();
        by_id.sort_by(|&a, &b| graph.id(a).cmp(graph.id(b)));
        let mut id_order = vec![0; num_users];
        for (pos, u) in by_id.into_iter().enumerate() {
            id_order[u] = pos;
        }
        KnnPredictor {
            table,
            raters,
            friends,
            id_order,
            spec: NeighborhoodSpec {
                k_neighbors: spec.k_neighbors.max(1),
                ..spec
            },
        }
    }

    /// Neighbours of `user` that rated `item`, with their weights, best
    /// first.
    pub fn neighbors(&self, user: usize, item: usize) -> Vec<(usize, f64)> {
        let Some(raters) = self.raters.get(item) else {
            return Vec::new();
        };
        let mut cands: Vec<(usize, f64)> = match self.spec.source {
            NeighborSource::Similarity => {
                let mine = self.table.row(user);
                raters
                    .iter()
                    .filter(|&&(v, _)| v != user)
                    .filter(|&&(v, _)| co_rated(mine, self.table.row(v)) >= self.spec.min_overlap)
                    .map(|&(v, _)| (v, pearson(mine, self.table.row(v))))
                    .filter(|&(_, s)| s > 0.0)
                    .collect()
            }
            NeighborSource::Friends => {
                let friends = self.friends.get(user).map_or(&[][..], Vec::as_slice);
                raters
                    .iter()
                    .filter(|(v, _)| friends.binary_search(v).is_ok())
                    .map(|&(v, _)| (v, 1.0))
                    .collect()
            }
        };
        cands.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.id_order[a.0].cmp(&self.id_order[b.0]))
        });
        cands.truncate(self.spec.k_neighbors);
        cands
    }

    fn baseline(&self, user: usize) -> f64 {
        self.table
            .user_mean(user)
            .or(self.table.global_mean())
            .unwrap_or((RATING_MIN + RATING_MAX) / 2.0)
    }

    pub fn predict(&self, user: usize, item: usize) -> f64 {
        let base = self.baseline(user);
        let neighbors = self.neighbors(user, item);
        let (mut num, mut den) = (0.0, 0.0);
        for &(v, s) in &neighbors {
            // neighbours rated the item, so both lookups succeed
            let (Some(r), Some(mean)) = (self.table.rating(v, item), self.table.user_mean(v)) else {
                continue;
            };
            num += s * (r - mean);
            den += s.abs();
        }
        let pred = if den > 0.0 { base + num / den } else { base };
        pred.clamp(RATING_MIN, RATING_MAX)
    }
}

/// One-off prediction.
pub fn u2u_predict(
    num_users: usize,
    num_items: usize,
    ratings: &[Rating],
    graph: &SocialGraph,
    user: usize,
    item: usize,
    spec: NeighborhoodSpec,
) -> f64 {
    KnnPredictor::new(num_users, num_items, ratings, graph, spec).predict(user, item)
}

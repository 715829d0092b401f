//! Per-user view of a set of ratings.

use crate::dataset::Rating;

/// Ratings grouped by user, each row sorted by item.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRatings {
    rows: Vec<Vec<(usize, f64)>>,
    means: Vec<Option<f64>>,
    global_mean: Option<f64>,
}

impl UserRatings {
    pub fn new(num_users: usize, ratings: &[Rating]) -> Self {
        let mut rows = vec![Vec::new(); num_users];
        for r in ratings {
            rows[r.user].push((r.item, r.value));
        }
        for row in &mut rows {
            row.sort_by_key(|&(item, _)| item);
        }
        let means = rows.iter().map(|row| mean(row.iter().map(|&(_, v)| v))).collect();
        let global_mean = mean(ratings.iter().map(|r| r.value));
        UserRatings {
            rows,
            means,
            global_mean,
        }
    }

    pub fn num_users(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, user: usize) -> &[(usize, f64)] {
        self.rows.get(user).map_or(&[], Vec::as_slice)
    }

    pub fn rating(&self, user: usize, item: usize) -> Option<f64> {
        let row = self.row(user);
        row.binary_search_by_key(&item, |&(i, _)| i)
            .ok()
            .map(|p| row[p].1)
    }

    pub fn user_mean(&self, user: usize) -> Option<f64> {
        self.means.get(user).copied().flatten()
    }

    pub fn global_mean(&self) -> Option<f64> {
        self.global_mean
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

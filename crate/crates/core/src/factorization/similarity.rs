use crate::ratings::UserRatings;
use crate::trustgraph::SocialGraph;

/// Pearson correlation of two users' rating vectors over the items both
/// rated. Each user is centred on the mean of all of their own ratings.
///
/// Returns 0 with fewer than two co-rated items or when either centred
/// co-rated vector is all zero.
pub fn pearson(x: &[(usize, f64)], z: &[(usize, f64)]) -> f64 {
    let (Some(mx), Some(mz)) = (mean(x), mean(z)) else {
        return 0.0;
    };
    let (mut i, mut j) = (0, 0);
    let (mut co, mut sxz, mut sxx, mut szz) = (0usize, 0.0, 0.0, 0.0);
    while i < x.len() && j < z.len() {
        match x[i].0.cmp(&z[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let (dx, dz) = (x[i].1 - mx, z[j].1 - mz);
                sxz += dx * dz;
                sxx += dx * dx;
                szz += dz * dz;
                co += 1;
                i += 1;
                j += 1;
            }
        }
    }
    if co < 2 || sxx == 0.0 || szz == 0.0 {
        return 0.0;
    }
    (sxz / (sxx * szz).sqrt()).clamp(-1.0, 1.0)
}

/// Number of items rated by both users.
pub fn co_rated(x: &[(usize, f64)], z: &[(usize, f64)]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < x.len() && j < z.len() {
        match x[i].0.cmp(&z[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn mean(row: &[(usize, f64)]) -> Option<f64> {
    (!row.is_empty()).then(|| row.iter().map(|&(_, v)| v).sum::<f64>() / row.len() as f64)
}

/// Rating similarity on directed social links, clamped at 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimilarityMatrix {
    entries: Vec<(usize, usize, f64)>,
}

impl SimilarityMatrix {
    /// Entries must not repeat a `(x, z)` pair.
    pub fn from_entries(mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(x, z, _)| (x, z));
        SimilarityMatrix { entries }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: usize, z: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&(x, z), |&(a, b, _)| (a, b))
            .ok()
            .map(|p| self.entries[p].2)
    }
}

/// `S_xz = max(0, pearson(x, z))` for every directed link `x -> z`.
pub fn build_similarity(ratings: &UserRatings, g: &SocialGraph) -> SimilarityMatrix {
    let entries = g
        .edges()
        .map(|(x, z)| (x, z, pearson(ratings.row(x), ratings.row(z)).max(0.0)))
        .collect();
    SimilarityMatrix::from_entries(entries)
}

//! Directed social graph and PageRank-based user importance.

use std::io::{self, Write};

use crate::dataset::{Dataset, FriendEdge};
use crate::error::{Error, Result};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Scores are compared on this grid when ranking, so that values differing
/// only by accumulated rounding count as ties and fall back to the id order.
const RANK_QUANTUM: f64 = 1e-12;

/// Users as nodes, each friendship as a pair of opposite directed links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    ids: Vec<String>,
    out: Vec<Vec<usize>>,
}

impl SocialGraph {
    /// `ids[i]` labels node `i`. Every friend edge must reference a node.
    pub fn new(ids: Vec<String>, friends: &[FriendEdge]) -> Result<Self> {
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        for e in friends {
            let (a, b) = (e.a, e.b);
            if a >= n || b >= n {
                return Err(Error::DanglingReference("user", format!("#{}", a.max(b))));
            }
            if a == b {
                return Err(Error::InvalidFriendEdge(
                    ids[a].clone(),
                    ids[b].clone(),
                    "self loop",
                ));
            }
            out[a].push(b);
            out[b].push(a);
        }
        for adj in &mut out {
            adj.sort_unstable();
        }
        Ok(SocialGraph { ids, out })
    }

    /// A graph from explicit directed links. Duplicate links are merged.
    pub fn from_links(ids: Vec<String>, links: &[(usize, usize)]) -> Result<Self> {
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        for &(a, b) in links {
            if a >= n || b >= n {
                return Err(Error::DanglingReference("user", format!("#{}", a.max(b))));
            }
            if a == b {
                return Err(Error::InvalidFriendEdge(
                    ids[a].clone(),
                    ids[b].clone(),
                    "self loop",
                ));
            }
            out[a].push(b);
        }
        for adj in &mut out {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(SocialGraph { ids, out })
    }

    pub fn num_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    /// Out-neighbours of `node`, ascending.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(from, adj)| adj.iter().map(move |&to| (from, to)))
    }
}

/// The social graph over all users of `d`.
pub fn build_graph(d: &Dataset) -> Result<SocialGraph> {
    let ids = d.users().iter().map(|u| u.user_id.clone()).collect();
    SocialGraph::new(ids, d.friends())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: DEFAULT_DAMPING,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    /// Stationary probability per node; sums to one.
    pub score: Vec<f64>,
    /// Ordinal rank per node, 1 = highest score.
    pub rank: Vec<usize>,
    /// `1 / (1 + ln rank)` per node.
    pub importance: Vec<f64>,
    pub iterations: usize,
}

impl PageRankResult {
    pub fn write_tsv<W: Write>(&self, g: &SocialGraph, mut w: W) -> io::Result<()> {
        for v in 0..self.score.len() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                g.id(v),
                self.score[v],
                self.rank[v],
                self.importance[v]
            )?;
        }
        Ok(())
    }
}

/// Power iteration with uniform teleportation. The mass of nodes without
/// out-links is spread uniformly over all nodes.
pub fn pagerank(g: &SocialGraph, params: PageRankParams) -> Result<PageRankResult> {
    let n = g.num_nodes();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let d = params.damping;
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1), got {d}"
        )));
    }
    if params.tolerance.is_nan() || params.tolerance <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }

    let nf = n as f64;
    let mut score = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&v| g.out[v].is_empty()).map(|v| score[v]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (v, adj) in g.out.iter().enumerate() {
            if adj.is_empty() {
                continue;
            }
            let share = d * score[v] / adj.len() as f64;
            for &t in adj {
                next[t] += share;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = score.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut score, &mut next);
        if delta < params.tolerance {
            break;
        }
    }

    let rank = ordinal_ranks(&score, &g.ids);
    let importance = rank.iter().map(|&r| importance_of_rank(r)).collect();
    Ok(PageRankResult {
        score,
        rank,
        importance,
        iterations,
    })
}

/// Descending score, ties by ascending id. Returns 1-based ranks.
fn ordinal_ranks(score: &[f64], ids: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..score.len()).collect();
    let key = |v: usize| (score[v] / RANK_QUANTUM).round() as i64;
    order.sort_by(|&a, &b| key(b).cmp(&key(a)).then_with(|| ids[a].cmp(&ids[b])));
    let mut rank = vec![0; score.len()];
    for (pos, v) in order.into_iter().enumerate() {
        rank[v] = pos + 1;
    }
    rank
}

/// `1 / (1 + ln rank)`; 1 for the top-ranked user, strictly decreasing.
pub fn importance_of_rank(rank: usize) -> f64 {
    1.0 / (1.0 + (rank as f64).ln())
}

/// Importance of the user with id `user_id`.
pub fn importance(pr: &PageRankResult, g: &SocialGraph, user_id: &str) -> Result<f64> {
    g.ids
        .iter()
        .position(|id| id == user_id)
        .map(|v| pr.importance[v])
        .ok_or_else(|| Error::UnknownUser(user_id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("u{i}")).collect()
    }

    fn edge(a: usize, b: usize) -> FriendEdge {
        FriendEdge { a, b }
    }

    #[test]
    fn friend_edges_become_two_links() {
        let g = SocialGraph::new(ids(2), &[edge(0, 1)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), [(0, 1), (1, 0)]);
        let g = SocialGraph::new(ids(3), &[]).unwrap();
        assert_eq!((g.num_nodes(), g.num_edges()), (3, 0));
        let g = SocialGraph::new(ids(3), &[edge(0, 1), edge(1, 2)]).unwrap();
        assert_eq!(g.num_edges(), 4);
        assert!(SocialGraph::new(ids(2), &[edge(0, 5)]).is_err());
    }

    #[test]
    fn symmetric_graphs() {
        let pr = pagerank(
            &SocialGraph::new(ids(2), &[edge(0, 1)]).unwrap(),
            Default::default(),
        )
        .unwrap();
        assert!((pr.score[0] - 0.5).abs() < 1e-12 && (pr.score[1] - 0.5).abs() < 1e-12);
        assert_eq!(pr.rank, [1, 2]);

        let pr = pagerank(&SocialGraph::new(ids(3), &[]).unwrap(), Default::default()).unwrap();
        for s in &pr.score {
            assert!((s - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(pr.rank, [1, 2, 3]);
        assert_eq!(pr.importance[0], 1.0);
    }

    #[test]
    fn directed_chain_has_dangling_tail() {
        let g = SocialGraph::from_links(ids(3), &[(0, 1), (1, 2)]).unwrap();
        let pr = pagerank(&g, Default::default()).unwrap();
        assert!((pr.score.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(pr.rank, [3, 2, 1]);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = SocialGraph::new(vec![], &[]).unwrap();
        assert!(matches!(pagerank(&g, Default::default()), Err(Error::EmptyGraph)));
    }

    #[test]
    fn importance_values() {
        assert_eq!(importance_of_rank(1), 1.0);
        // 1 / (1 + ln 10) and 1 / (1 + ln 100), evaluated independently
        assert!((importance_of_rank(10) - 0.302_793_106_564_113_85).abs() < 1e-15);
        assert!((importance_of_rank(100) - 0.178_406_715_018_184_2).abs() < 1e-15);
        for r in 1..500 {
            assert!(importance_of_rank(r) > importance_of_rank(r + 1));
        }
    }

    #[test]
    fn importance_lookup() {
        let g = SocialGraph::new(ids(3), &[edge(0, 1), edge(1, 2)]).unwrap();
        let pr = pagerank(&g, Default::default()).unwrap();
        // the middle of the path collects the most mass
        assert_eq!(importance(&pr, &g, "u1").unwrap(), 1.0);
        assert!(importance(&pr, &g, "nobody").is_err());
    }
}

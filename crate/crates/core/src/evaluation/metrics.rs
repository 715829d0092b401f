use std::io::{self, Write};

use crate::error::{Error, Result};

/// Ratings above this are relevant; predictions above it are recommended.
pub const RELEVANCE_THRESHOLD: f64 = 3.0;

/// Top-k recommendations for one user, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub user: usize,
    pub items: Vec<(usize, f64)>,
}

/// Rank the candidates predicted above the relevance threshold by
/// descending score (ties by ascending `item_id`) and keep the first `k`.
pub fn recommend<'a>(
    predict: impl Fn(usize) -> f64,
    user: usize,
    candidates: &[usize],
    k: usize,
    item_id: impl Fn(usize) -> &'a str,
) -> RankedList {
    let mut items: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&i| (i, predict(i)))
        .filter(|&(_, s)| s > RELEVANCE_THRESHOLD)
        .collect();
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| item_id(a.0).cmp(item_id(b.0))));
    items.truncate(k);
    RankedList { user, items }
}

/// Per-user ranking quality of one list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingScores {
    pub precision: f64,
    pub recall: f64,
    pub average_precision: f64,
    pub reciprocal_rank: f64,
}

/// Scores of a list whose positions have relevance `relevance`, for a user
/// with `num_relevant` relevant items overall. Average precision is
/// normalised by `num_relevant`; a user without relevant items scores 0 on
/// recall, AP and RR.
pub fn ranking_scores(relevance: &[bool], num_relevant: usize) -> RankingScores {
    let hits = relevance.iter().filter(|&&r| r).count();
    let precision = if relevance.is_empty() {
        0.0
    } else {
        hits as f64 / relevance.len() as f64
    };
    if num_relevant == 0 {
        return RankingScores {
            precision,
            recall: 0.0,
            average_precision: 0.0,
            reciprocal_rank: 0.0,
        };
    }
    let mut seen = 0usize;
    let mut ap_sum = 0.0;
    let mut reciprocal_rank = 0.0;
    for (pos, &rel) in relevance.iter().enumerate() {
        if rel {
            seen += 1;
            ap_sum += seen as f64 / (pos + 1) as f64;
            if seen == 1 {
                reciprocal_rank = 1.0 / (pos + 1) as f64;
            }
        }
    }
    RankingScores {
        precision,
        recall: hits as f64 / num_relevant as f64,
        average_precision: ap_sum / num_relevant as f64,
        reciprocal_rank,
    }
}

/// Whose predictions enter RMSE and MAE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorScope {
    /// Only the recommended items.
    #[default]
    Recommended,
    /// Every evaluated pair.
    AllTest,
}

/// Evaluation outcome for one user: the list and every evaluated
/// `(item, rating, prediction)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserOutcome {
    pub list: RankedList,
    pub truth: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map: f64,
    pub rmse: f64,
    pub mae: f64,
    pub mrr: f64,
    pub ucov: f64,
    /// Users with a non-empty list.
    pub covered_users: usize,
    pub users: usize,
}

/// The @k metric suite.
///
/// P, R, MAP and MRR are averaged over users with a non-empty list; F1 is
/// the harmonic mean of the averaged P and R; UCov is the share of all
/// evaluated users with a non-empty list. Lists are cut to `k`.
pub fn metrics_at_k(outcomes: &[UserOutcome], k: usize, scope: ErrorScope) -> Result<Metrics> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut m = Metrics {
        users: outcomes.len(),
        ..Metrics::default()
    };
    let (mut se, mut ae, mut n_err) = (0.0, 0.0, 0usize);
    for o in outcomes {
        let relevant: Vec<usize> = o
            .truth
            .iter()
            .filter(|t| t.1 > RELEVANCE_THRESHOLD)
            .map(|t| t.0)
            .collect();
        let list = &o.list.items[..o.list.items.len().min(k)];
        let truth_of = |item: usize| o.truth.iter().find(|t| t.0 == item);
        match scope {
            ErrorScope::Recommended => {
                for &(item, _) in list {
                    if let Some(&(_, r, p)) = truth_of(item) {
                        se += (r - p) * (r - p);
                        ae += (r - p).abs();
                        n_err += 1;
                    }
                }
            }
            ErrorScope::AllTest => {
                for &(_, r, p) in &o.truth {
                    se += (r - p) * (r - p);
                    ae += (r - p).abs();
                    n_err += 1;
                }
            }
        }
        if list.is_empty() {
            continue;
        }
        let rel: Vec<bool> = list.iter().map(|(i, _)| relevant.contains(i)).collect();
        let s = ranking_scores(&rel, relevant.len());
        m.covered_users += 1;
        m.precision += s.precision;
        m.recall += s.recall;
        m.map += s.average_precision;
        m.mrr += s.reciprocal_rank;
    }
    if m.covered_users > 0 {
        let c = m.covered_users as f64;
        m.precision /= c;
        m.recall /= c;
        m.map /= c;
        m.mrr /= c;
    }
    m.f1 = f1(m.precision, m.recall);
    if n_err > 0 {
        m.rmse = (se / n_err as f64).sqrt();
        m.mae = ae / n_err as f64;
    }
    if m.users > 0 {
        m.ucov = m.covered_users as f64 / m.users as f64;
    }
    Ok(m)
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

pub const REPORT_HEADER: &str = "algorithm,ablation,alpha,beta,k,P,R,F1,MAP,RMSE,MAE,MRR,UCov";

/// One report row: the metrics plus an echo of the configuration that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub algorithm: String,
    /// Ablation name with its switches, e.g. `noS:C=1:C1-C6=011111`, or
    /// `-` for algorithms without trust.
    pub ablation: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k: usize,
    pub metrics: Metrics,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.algorithm,
            self.ablation,
            opt(self.alpha),
            opt(self.beta),
            self.k,
            m.precision,
            m.recall,
            m.f1,
            m.map,
            m.rmse,
            m.mae,
            m.mrr,
            m.ucov
        )
    }

    pub fn write_csv<W: Write>(reports: &[MetricsReport], mut w: W) -> io::Result<()> {
        writeln!(w, "{REPORT_HEADER}")?;
        for r in reports {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

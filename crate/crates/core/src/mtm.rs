//! Multi-faceted trust.
//!
//! Raw feedback counts are turned into per-user indicators in `[0, 1]`, all
//! of them relative to the best value in the community (or, for
//! contributions, to the best contribution on the same item). The enabled
//! indicators are averaged into a user's reputation (`mgr`), which is then
//! blended with the quality of an individual review into the weight of that
//! rating (`mft`).
//!
//! Every `0 / 0` normalisation resolves to 0.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::dataset::{Contribution, ContributionKind, Dataset, Feedback, FeedbackSchema};
use crate::error::{Error, Result};

/// The six reputation indicators, in fusion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Indicator {
    /// PageRank importance in the friend graph.
    Importance = 0,
    /// Years with elite status.
    Elite = 1,
    /// Profile compliments (liking of the user profile).
    ProfileLiking = 2,
    /// Anonymous fans (opinion leadership).
    OpinionLeader = 3,
    /// Compliments per contribution.
    Visibility = 4,
    /// Feedback summed over all of a user's contributions.
    ContributorQuality = 5,
}

impl Indicator {
    pub const ALL: [Indicator; 6] = [
        Indicator::Importance,
        Indicator::Elite,
        Indicator::ProfileLiking,
        Indicator::OpinionLeader,
        Indicator::Visibility,
        Indicator::ContributorQuality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Importance => "imp",
            Indicator::Elite => "elite",
            Indicator::ProfileLiking => "lup",
            Indicator::OpinionLeader => "opLeader",
            Indicator::Visibility => "vis",
            Indicator::ContributorQuality => "q",
        }
    }
}

/// On/off switch per indicator (`C_1..C_6`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorFlags(pub [bool; 6]);

impl IndicatorFlags {
    pub const ALL: IndicatorFlags = IndicatorFlags([true; 6]);

    pub fn is_on(self, ind: Indicator) -> bool {
        self.0[ind as usize]
    }

    pub fn with(mut self, ind: Indicator, on: bool) -> Self {
        self.0[ind as usize] = on;
        self
    }

    pub fn count(self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// `"110111"`-style rendering, `C_1` first.
    pub fn bits(self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustConfig {
    /// Weight of reputation against contribution quality, in `[0, 1]`.
    pub beta: f64,
    /// The `C` switch: use the feedback on the rated contribution.
    pub contribution_feedback: bool,
    pub indicators: IndicatorFlags,
}

impl TrustConfig {
    pub fn new(beta: f64, contribution_feedback: bool, indicators: IndicatorFlags) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        Ok(TrustConfig {
            beta,
            contribution_feedback,
            indicators,
        })
    }

    /// Every facet switched on.
    pub fn full(beta: f64) -> Result<Self> {
        TrustConfig::new(beta, true, IndicatorFlags::ALL)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        TrustConfig::new(beta, self.contribution_feedback, self.indicators)
    }
}

/// The LOCABAL+ configurations used for ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Ablation {
    /// All trust facets.
    #[default]
    Full,
    /// No feedback on contributions: `C_6 = 0`, `C = 0`.
    NoF,
    /// No profile endorsements or visibility: `C_2..C_5 = 0`.
    NoE,
    /// No social relations: `C_1 = 0` and no social regularization.
    NoS,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Ablation::Full, Ablation::NoF, Ablation::NoE, Ablation::NoS];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoF => "noF",
            Ablation::NoE => "noE",
            Ablation::NoS => "noS",
        }
    }

    pub fn trust_config(self, beta: f64) -> Result<TrustConfig> {
        use Indicator::*;
        let all = IndicatorFlags::ALL;
        let (feedback, flags) = match self {
            Ablation::Full => (true, all),
            Ablation::NoF => (false, all.with(ContributorQuality, false)),
            Ablation::NoE => (
                true,
                all.with(Elite, false)
                    .with(ProfileLiking, false)
                    .with(OpinionLeader, false)
                    .with(Visibility, false),
            ),
            Ablation::NoS => (true, all.with(Importance, false)),
        };
        TrustConfig::new(beta, feedback, flags)
    }

    /// The social-regularization weight this configuration forces, if any.
    pub fn alpha_override(self) -> Option<f64> {
        match self {
            Ablation::NoS => Some(0.0),
            _ => None,
        }
    }

    pub fn apply_alpha(self, alpha: f64) -> f64 {
        self.alpha_override().unwrap_or(alpha)
    }
}

impl std::fmt::Display for Ablation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "LOCABAL+" => Ok(Ablation::Full),
            "noF" | "LOC+noF" => Ok(Ablation::NoF),
            "noE" | "LOC+noE" => Ok(Ablation::NoE),
            "noS" | "LOC+noS" => Ok(Ablation::NoS),
            other => Err(Error::UnknownAblation(other.to_string())),
        }
    }
}

/// Trust configuration and forced `alpha` for a named ablation.
pub fn ablation_config(name: &str, beta: f64) -> Result<(TrustConfig, Option<f64>)> {
    let ablation: Ablation = name.parse()?;
    Ok((ablation.trust_config(beta)?, ablation.alpha_override()))
}

/// Per-user values of the six indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorVector {
    values: [Vec<f64>; 6],
}

impl IndicatorVector {
    /// All six vectors must have the same length.
    pub fn new(values: [Vec<f64>; 6]) -> Result<Self> {
        let n = values[0].len();
        if values.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(
                "indicator vectors differ in length".into(),
            ));
        }
        Ok(IndicatorVector { values })
    }

    pub fn num_users(&self) -> usize {
        self.values[0].len()
    }

    pub fn get(&self, ind: Indicator) -> &[f64] {
        &self.values[ind as usize]
    }

    pub fn get_mut(&mut self, ind: Indicator) -> &mut [f64] {
        &mut self.values[ind as usize]
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Divide each value by the maximum of its group.
fn relative_to_group_max(groups: &[usize], values: &[f64]) -> Vec<f64> {
    let mut best: HashMap<usize, f64> = HashMap::new();
    for (&g, &v) in groups.iter().zip(values) {
        let b = best.entry(g).or_insert(0.0);
        if v > *b {
            *b = v;
        }
    }
    groups
        .iter()
        .zip(values)
        .map(|(g, &v)| ratio(v, best[g]))
        .collect()
}

/// Quality of each contribution under positive-only feedback: its
/// appreciations over the best count among contributions in the same group
/// (`groups[c]`, normally the item).
pub fn contribution_quality_pos(groups: &[usize], appreciations: &[u64]) -> Vec<f64> {
    let values: Vec<f64> = appreciations.iter().map(|&a| a as f64).collect();
    relative_to_group_max(groups, &values)
}

/// `pos / (pos + neg)`, 0 without votes.
pub fn helpfulness(pos: u64, neg: u64) -> f64 {
    ratio(pos as f64, (pos + neg) as f64)
}

/// Quality under positive and negative votes: helpfulness over the best
/// helpfulness within the same group.
pub fn contribution_quality_pn(groups: &[usize], pos: &[u64], neg: &[u64]) -> Vec<f64> {
    let help: Vec<f64> = pos.iter().zip(neg).map(|(&p, &n)| helpfulness(p, n)).collect();
    relative_to_group_max(groups, &help)
}

/// useful + funny + cool for reviews, like for tips.
pub fn yelp_appreciations(c: &Contribution) -> u64 {
    match c.feedback {
        Feedback::Review {
            useful, funny, cool, ..
        } => useful + funny + cool,
        Feedback::Tip { like } => like,
    }
}

/// Each count over the global maximum count.
pub fn endorsement_score(raw: &[u64]) -> Vec<f64> {
    let max = raw.iter().copied().max().unwrap_or(0) as f64;
    raw.iter().map(|&c| ratio(c as f64, max)).collect()
}

/// `compliments_v / (max compliments * contributions_v)`, clamped to 1.
pub fn visibility(compliments: &[u64], contributions: &[u64]) -> Vec<f64> {
    let max = compliments.iter().copied().max().unwrap_or(0) as u128;
    compliments
        .iter()
        .zip(contributions)
        .map(|(&c, &n)| ratio(c as f64, (max * n as u128) as f64).min(1.0))
        .collect()
}

/// Sum of per-contribution values per author over the best author's sum.
pub fn contributor_quality(authors: &[usize], values: &[f64], num_users: usize) -> Vec<f64> {
    let mut sums = vec![0.0; num_users];
    for (&a, &v) in authors.iter().zip(values) {
        sums[a] += v;
    }
    let max = sums.iter().copied().fold(0.0, f64::max);
    sums.iter().map(|&s| ratio(s, max)).collect()
}

/// Mean of the enabled indicators.
pub fn multi_dimensional_reputation(ind: &IndicatorVector, cfg: &TrustConfig) -> Result<Vec<f64>> {
    let on: Vec<Indicator> = Indicator::ALL
        .into_iter()
        .filter(|&i| cfg.indicators.is_on(i))
        .collect();
    if on.is_empty() {
        return Err(Error::InvalidArgument(
            "every reputation indicator is switched off".into(),
        ));
    }
    let k = on.len() as f64;
    Ok((0..ind.num_users())
        .map(|v| {
            let sum: f64 = on.iter().map(|&i| ind.get(i)[v]).sum();
            (sum / k).clamp(0.0, 1.0)
        })
        .collect())
}

/// `beta * mgr + C * (1 - beta) * fcontr`.
pub fn multi_faceted_trust(mgr: f64, fcontr: f64, cfg: &TrustConfig) -> f64 {
    let feedback = if cfg.contribution_feedback {
        (1.0 - cfg.beta) * fcontr
    } else {
        0.0
    };
    (cfg.beta * mgr + feedback).clamp(0.0, 1.0)
}

/// Quality of every contribution of `d`, aligned with `d.contributions()`.
///
/// Contributions are compared with contributions of the same kind on the
/// same item. Under the positive-negative schema reviews are scored by
/// helpfulness and tips, which carry no votes, score 0.
pub fn contribution_qualities(d: &Dataset) -> Vec<f64> {
    let contribs = d.contributions();
    let groups: Vec<usize> = contribs
        .iter()
        .map(|c| {
            2 * c.item
                + match c.kind() {
                    ContributionKind::Review => 0,
                    ContributionKind::Tip => 1,
                }
        })
        .collect();
    match d.schema() {
        FeedbackSchema::PositiveOnly => {
            let app: Vec<u64> = contribs.iter().map(yelp_appreciations).collect();
            contribution_quality_pos(&groups, &app)
        }
        FeedbackSchema::PositiveNegative => {
            let (pos, neg): (Vec<u64>, Vec<u64>) = contribs
                .iter()
                .map(|c| match c.feedback {
                    Feedback::Review {
                        positive_votes,
                        negative_votes,
                        ..
                    } => (positive_votes.unwrap_or(0), negative_votes.unwrap_or(0)),
                    Feedback::Tip { .. } => (0, 0),
                })
                .unzip();
            contribution_quality_pn(&groups, &pos, &neg)
        }
    }
}

/// Yelp instantiation of the six indicators. `importance` holds the PageRank
/// importance per user; pass `None` when the social facet is unused, which
/// leaves the importance indicator at 0.
pub fn yelp_indicators(d: &Dataset, importance: Option<&[f64]>) -> Result<IndicatorVector> {
    let n = d.num_users();
    let users = d.users();
    let imp = match importance {
        Some(imp) if imp.len() != n => {
            return Err(Error::DimensionMismatch(format!(
                "{} importance values for {n} users",
                imp.len()
            )))
        }
        Some(imp) => imp.to_vec(),
        None => vec![0.0; n],
    };
    let elite = endorsement_score(&users.iter().map(|u| u.elite_years).collect::<Vec<_>>());
    let compliments: Vec<u64> = users.iter().map(|u| u.compliments()).collect();
    let lup = endorsement_score(&compliments);
    let fans = endorsement_score(&users.iter().map(|u| u.fans).collect::<Vec<_>>());

    let mut authored = vec![0u64; n];
    for c in d.contributions() {
        authored[c.author] += 1;
    }
    let vis = visibility(&compliments, &authored);

    let authors: Vec<usize> = d.contributions().iter().map(|c| c.author).collect();
    let q = match d.schema() {
        FeedbackSchema::PositiveOnly => {
            let app: Vec<f64> = d
                .contributions()
                .iter()
                .map(|c| yelp_appreciations(c) as f64)
                .collect();
            contributor_quality(&authors, &app, n)
        }
        FeedbackSchema::PositiveNegative => contributor_quality(&authors, &contribution_qualities(d), n),
    };
    IndicatorVector::new([imp, elite, lup, fans, vis, q])
}

/// Trust attached to one rated pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTrust {
    pub user: usize,
    pub item: usize,
    pub fcontr: f64,
    pub mft: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrustScores {
    pub mgr: Vec<f64>,
    /// One entry per rated pair, in contribution order.
    pub pairs: Vec<PairTrust>,
    index: HashMap<(usize, usize), usize>,
}

impl TrustScores {
    pub fn pair(&self, user: usize, item: usize) -> Option<&PairTrust> {
        self.index.get(&(user, item)).map(|&i| &self.pairs[i])
    }

    pub fn mft(&self, user: usize, item: usize) -> Option<f64> {
        self.pair(user, item).map(|p| p.mft)
    }

    /// `user_id \t mgr` lines, then `user_id \t item_id \t fcontr \t mft`.
    pub fn write_tsv<W: Write>(&self, d: &Dataset, mut w: W) -> io::Result<()> {
        for (v, m) in self.mgr.iter().enumerate() {
            writeln!(w, "{}\t{}", d.user_id(v), m)?;
        }
        for p in &self.pairs {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                d.user_id(p.user),
                d.item_id(p.item),
                p.fcontr,
                p.mft
            )?;
        }
        Ok(())
    }
}

/// Reputation for every user and trust for every rated pair of `d`.
pub fn compute_trust(d: &Dataset, indicators: &IndicatorVector, cfg: &TrustConfig) -> Result<TrustScores> {
    let mgr = multi_dimensional_reputation(indicators, cfg)?;
    let quality = contribution_qualities(d);
    let pairs: Vec<PairTrust> = d
        .contributions()
        .iter()
        .zip(&quality)
        .filter(|(c, _)| c.kind() == ContributionKind::Review)
        .map(|(c, &fcontr)| PairTrust {
            user: c.author,
            item: c.item,
            fcontr,
            mft: multi_faceted_trust(mgr[c.author], fcontr, cfg),
        })
        .collect();
    let index = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.user, p.item), i))
        .collect();
    Ok(TrustScores { mgr, pairs, index })
}

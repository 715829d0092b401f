//! Top-k evaluation, cross-validated grid search and final holdout
//! evaluation.

mod metrics;

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;

pub use metrics::{
    f1, metrics_at_k, ranking_scores, recommend, ErrorScope, Metrics, MetricsReport, RankedList,
    RankingScores, UserOutcome, RELEVANCE_THRESHOLD, REPORT_HEADER,
};

use crate::dataset::{kfold, Dataset};
use crate::error::{Error, Result};
use crate::factorization::{
    self, build_similarity, HyperParams, ObjectiveSpec, SimilarityMatrix, TrainedModel,
};
use crate::knn::{KnnPredictor, NeighborSource, NeighborhoodSpec};
use crate::mtm::{compute_trust, Ablation, IndicatorVector};
use crate::ratings::UserRatings;
use crate::trustgraph::SocialGraph;

/// The recommenders the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Mf,
    Locabal,
    LocabalPlus(Ablation),
    U2uCf,
    U2uSocial,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mf => "MF",
            Algorithm::Locabal => "LOCABAL",
            Algorithm::LocabalPlus(_) => "LOCABAL+",
            Algorithm::U2uCf => "U2UCF",
            Algorithm::U2uSocial => "U2USocial",
        }
    }

    pub fn uses_alpha(self) -> bool {
        matches!(self, Algorithm::Locabal | Algorithm::LocabalPlus(_))
    }

    pub fn uses_beta(self) -> bool {
        matches!(self, Algorithm::LocabalPlus(_))
    }

    /// The `alpha` actually trained with.
    pub fn effective_alpha(self, alpha: f64) -> f64 {
        match self {
            Algorithm::LocabalPlus(a) => a.apply_alpha(alpha),
            Algorithm::Locabal => alpha,
            _ => 0.0,
        }
    }

    /// Ablation echo for reports: the name with the `C` switch and the
    /// indicator switches `C_1..C_6`.
    pub fn ablation_echo(self) -> String {
        match self {
            Algorithm::LocabalPlus(a) => {
                // beta does not affect the switches
                let cfg = a.trust_config(0.0).expect("0 is a valid beta");
                format!(
                    "{}:C={}:C1-C6={}",
                    a.name(),
                    u8::from(cfg.contribution_feedback),
                    cfg.indicators.bits()
                )
            }
            _ => "-".to_string(),
        }
    }

    pub fn parse(variant: &str, ablation: Ablation) -> Result<Self> {
        match variant {
            "MF" | "mf" => Ok(Algorithm::Mf),
            "LOCABAL" | "locabal" => Ok(Algorithm::Locabal),
            "LOCABAL+" | "locabal+" | "locabalplus" => Ok(Algorithm::LocabalPlus(ablation)),
            "U2UCF" | "u2ucf" => Ok(Algorithm::U2uCf),
            "U2USocial" | "u2usocial" => Ok(Algorithm::U2uSocial),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

/// Shared read-only inputs for every training run.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentSetup<'a> {
    pub dataset: &'a Dataset,
    pub graph: &'a SocialGraph,
    /// PageRank importance per user.
    pub importance: &'a [f64],
    pub indicators: &'a IndicatorVector,
    /// Base hyperparameters; `alpha` is overridden per cell.
    pub hp: HyperParams,
    pub k_neighbors: usize,
    /// List length for the @k metrics.
    pub top_k: usize,
    pub error_scope: ErrorScope,
}

/// One point of the `alpha x beta` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellConfig {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub beta: f64,
}

impl CellConfig {
    pub fn alpha_echo(&self) -> Option<f64> {
        self.algorithm
            .uses_alpha()
            .then(|| self.algorithm.effective_alpha(self.alpha))
    }

    pub fn beta_echo(&self) -> Option<f64> {
        self.algorithm.uses_beta().then_some(self.beta)
    }
}

/// A trained recommender.
#[derive(Debug, Clone)]
pub enum Fitted {
    Factorization(TrainedModel),
    Knn(KnnPredictor),
}

impl Fitted {
    pub fn predict(&self, user: usize, item: usize) -> f64 {
        match self {
            Fitted::Factorization(m) => m.predict(user, item),
            Fitted::Knn(k) => k.predict(user, item),
        }
    }

    pub fn model(&self) -> Option<&TrainedModel> {
        match self {
            Fitted::Factorization(m) => Some(m),
            Fitted::Knn(_) => None,
        }
    }
}

/// Train `cell` on the ratings of `train_pairs`.
pub fn fit(setup: &ExperimentSetup<'_>, cell: &CellConfig, train_pairs: &[(usize, usize)]) -> Result<Fitted> {
    let d = setup.dataset;
    let (n, m) = (d.num_users(), d.num_items());
    let ratings = d.ratings_for(train_pairs);
    let hp = HyperParams {
        alpha: cell.algorithm.effective_alpha(cell.alpha),
        ..setup.hp
    };
    let similarity = || {
        if hp.alpha > 0.0 {
            build_similarity(&UserRatings::new(n, &ratings), setup.graph)
        } else {
            SimilarityMatrix::default()
        }
    };
    let knn = |source| {
        let spec = NeighborhoodSpec {
            k_neighbors: setup.k_neighbors,
            ..NeighborhoodSpec::new(source)
        };
        Fitted::Knn(KnnPredictor::new(n, m, &ratings, setup.graph, spec))
    };
    let model = match cell.algorithm {
        Algorithm::Mf => {
            let spec = ObjectiveSpec::mf(&ratings, n);
            factorization::train(n, m, &ratings, &spec, &SimilarityMatrix::default(), &hp)?
        }
        Algorithm::Locabal => {
            let spec = ObjectiveSpec::locabal(&ratings, setup.importance);
            factorization::train(n, m, &ratings, &spec, &similarity(), &hp)?
        }
        Algorithm::LocabalPlus(ablation) => {
            let cfg = ablation.trust_config(cell.beta)?;
            let trust = compute_trust(d, setup.indicators, &cfg)?;
            let spec = ObjectiveSpec::locabal_plus(&ratings, &trust)?;
            factorization::train(n, m, &ratings, &spec, &similarity(), &hp)?
        }
        Algorithm::U2uCf => return Ok(knn(NeighborSource::Similarity)),
        Algorithm::U2uSocial => return Ok(knn(NeighborSource::Friends)),
    };
    Ok(Fitted::Factorization(model))
}

/// Rank each user's evaluation items and compute the metric suite.
pub fn evaluate(
    setup: &ExperimentSetup<'_>,
    model: &Fitted,
    eval_pairs: &[(usize, usize)],
) -> Result<Metrics> {
    let d = setup.dataset;
    let mut by_user: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, i) in eval_pairs {
        by_user.entry(u).or_default().push(i);
    }
    let outcomes: Vec<UserOutcome> = by_user
        .into_iter()
        .map(|(user, items)| {
            let truth: Vec<(usize, f64, f64)> = items
                .iter()
                .filter_map(|&i| {
                    d.rating(user, i)
                        .map(|r| (i, f64::from(r), model.predict(user, i)))
                })
                .collect();
            let lookup = |i: usize| truth.iter().find(|t| t.0 == i).map_or(0.0, |t| t.2);
            let list = recommend(lookup, user, &items, setup.top_k, |i| d.item_id(i));
            UserOutcome { list, truth }
        })
        .collect();
    metrics_at_k(&outcomes, setup.top_k, setup.error_scope)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub config: CellConfig,
    /// Validation MAP per fold; `-inf` marks a diverged fold.
    pub fold_maps: Vec<f64>,
    pub mean_map: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub best: CellConfig,
    pub best_map: f64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn fmt_map(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "-inf".into()
    }
}

impl GridResult {
    /// `alpha,beta,fold,map` with one `mean` row per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "alpha,beta,fold,map")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},mean,{}",
                fmt_opt(c.config.alpha_echo()),
                fmt_opt(c.config.beta_echo()),
                fmt_map(c.mean_map)
            )?;
        }
        Ok(())
    }

    /// `alpha,beta,fold,map` with one row per cell and fold.
    pub fn write_folds_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "alpha,beta,fold,map")?;
        for c in &self.cells {
            for (f, map) in c.fold_maps.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt_opt(c.config.alpha_echo()),
                    fmt_opt(c.config.beta_echo()),
                    f,
                    fmt_map(*map)
                )?;
            }
        }
        Ok(())
    }
}

/// The cells a grid search visits: parameters an algorithm does not use
/// collapse to a single value, and a forced `alpha` replaces the alpha grid.
pub fn grid_cells(algorithm: Algorithm, alphas: &[f64], betas: &[f64]) -> Vec<CellConfig> {
    let mut alphas: Vec<f64> = if algorithm.uses_alpha() {
        alphas.iter().map(|&a| algorithm.effective_alpha(a)).collect()
    } else {
        vec![0.0]
    };
    let mut betas: Vec<f64> = if algorithm.uses_beta() {
        betas.to_vec()
    } else {
        vec![0.0]
    };
    for v in [&mut alphas, &mut betas] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    alphas
        .iter()
        .flat_map(|&alpha| {
            betas.iter().map(move |&beta| CellConfig {
                algorithm,
                alpha,
                beta,
            })
        })
        .collect()
}

/// Mean validation MAP of every cell over `folds` folds of `train_pairs`;
/// returns the best cell, ties going to the lower `alpha` and then the
/// lower `beta`. Cells and folds run in parallel; each run is itself
/// deterministic, so the result does not depend on scheduling.
pub fn grid_search(
    setup: &ExperimentSetup<'_>,
    algorithm: Algorithm,
    train_pairs: &[(usize, usize)],
    alphas: &[f64],
    betas: &[f64],
    folds: usize,
    seed: u64,
) -> Result<GridResult> {
    if (algorithm.uses_alpha() && alphas.is_empty()) || (algorithm.uses_beta() && betas.is_empty()) {
        return Err(Error::InvalidArgument("empty parameter grid".into()));
    }
    let cells = grid_cells(algorithm, alphas, betas);
    let assignment = kfold(train_pairs, folds, seed)?;
    let split = |fold: usize| {
        let mut fit_pairs = Vec::new();
        let mut val_pairs = Vec::new();
        for (p, &f) in train_pairs.iter().zip(&assignment) {
            if f == fold {
                val_pairs.push(*p);
            } else {
                fit_pairs.push(*p);
            }
        }
        (fit_pairs, val_pairs)
    };
    let splits: Vec<_> = (0..folds).map(split).collect();

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..folds).map(move |f| (c, f)))
        .collect();
    let maps = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (fit_pairs, val_pairs) = &splits[f];
            match fit(setup, &cells[c], fit_pairs) {
                Ok(model) => evaluate(setup, &model, val_pairs).map(|m| m.map),
                Err(Error::Divergence { .. }) => Ok(f64::NEG_INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let cells: Vec<GridCell> = cells
        .into_iter()
        .enumerate()
        .map(|(c, config)| {
            let fold_maps = maps[c * folds..(c + 1) * folds].to_vec();
            let mean_map = fold_maps.iter().sum::<f64>() / folds as f64;
            GridCell {
                config,
                fold_maps,
                mean_map,
            }
        })
        .collect();
    let best = select_best(&cells);
    Ok(GridResult {
        best: cells[best].config,
        best_map: cells[best].mean_map,
        cells,
    })
}

/// Index of the highest mean MAP; ties to the lower `alpha`, then the lower
/// `beta`.
pub fn select_best(cells: &[GridCell]) -> usize {
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&cells[a].config, &cells[b].config);
        ca.alpha.total_cmp(&cb.alpha).then(ca.beta.total_cmp(&cb.beta))
    });
    let mut best = order[0];
    for &c in &order[1..] {
        if cells[c].mean_map > cells[best].mean_map {
            best = c;
        }
    }
    best
}

/// Train `cell` on all training pairs and score it on the test pairs.
pub fn evaluate_final(
    setup: &ExperimentSetup<'_>,
    cell: &CellConfig,
    train_pairs: &[(usize, usize)],
    test_pairs: &[(usize, usize)],
) -> Result<(MetricsReport, Fitted)> {
    if test_pairs.is_empty() {
        return Err(Error::EmptySplit);
    }
    let model = fit(setup, cell, train_pairs)?;
    let metrics = evaluate(setup, &model, test_pairs)?;
    let report = MetricsReport {
        algorithm: cell.algorithm.name().to_string(),
        ablation: cell.algorithm.ablation_echo(),
        alpha: cell.alpha_echo(),
        beta: cell.beta_echo(),
        k: setup.top_k,
        metrics,
    };
    Ok((report, model))
}

//! Batch driver: a flat `key = value` run configuration and the commands
//! built on it. Every command is deterministic given the configuration.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dataset::{
    filter_dataset, load_dataset, save_dataset, split_holdout, Dataset, DatasetPaths, DatasetStats,
    FeedbackSchema, SplitPlan,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_final, fit, grid_search, Algorithm, CellConfig, ErrorScope, ExperimentSetup, GridResult,
    MetricsReport,
};
use crate::factorization::{HyperParams, TrainedModel};
use crate::knn::DEFAULT_K_NEIGHBORS;
use crate::mtm::{compute_trust, yelp_indicators, Ablation, IndicatorVector, TrustScores};
use crate::synth::{self, SynthConfig};
use crate::trustgraph::{build_graph, pagerank, PageRankParams, PageRankResult, SocialGraph};

pub const DEFAULT_ALPHA_GRID: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9];
pub const DEFAULT_BETA_GRID: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.7, 1.0];

pub const REPORT_FILE: &str = "report.csv";
pub const GRID_FILE: &str = "grid.csv";
pub const GRID_FOLDS_FILE: &str = "grid_folds.csv";
pub const MODEL_FILE: &str = "model.txt";
pub const TRUST_FILE: &str = "trust.tsv";
pub const PAGERANK_FILE: &str = "pagerank.tsv";
pub const SPLIT_FILE: &str = "split.tsv";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub paths: DatasetPaths,
    pub schema: FeedbackSchema,
    /// Users need at least this many ratings on kept items.
    pub min_ratings: usize,
    /// Keep items carrying one of these tags; empty keeps every item.
    pub category_tags: BTreeSet<String>,
    pub variant: String,
    pub ablation: Ablation,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    /// Top-k list length.
    pub k: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// `hp.alpha` and `hp.seed` are ignored; the grid and `seed` win.
    pub hp: HyperParams,
    pub test_fraction: f64,
    pub folds: usize,
    pub k_neighbors: usize,
    pub error_scope: ErrorScope,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: DatasetPaths::in_dir("data"),
            schema: FeedbackSchema::default(),
            min_ratings: 0,
            category_tags: BTreeSet::new(),
            variant: "LOCABAL+".to_string(),
            ablation: Ablation::Full,
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
            beta_grid: DEFAULT_BETA_GRID.to_vec(),
            k: 10,
            seed: 0,
            out: PathBuf::from("out"),
            hp: HyperParams::default(),
            test_fraction: 0.1,
            folds: 5,
            k_neighbors: DEFAULT_K_NEIGHBORS,
            error_scope: ErrorScope::Recommended,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl RunConfig {
    /// Parse `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig {
            paths: DatasetPaths::in_dir(base.join("data")),
            out: base.join("out"),
            ..RunConfig::default()
        };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim(), base)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse(&text, base)
    }

    /// Apply one setting.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || base.join(value);
        match key {
            "data_dir" => self.paths = DatasetPaths::in_dir(path()),
            "users" => self.paths.users = path(),
            "items" => self.paths.items = path(),
            "reviews" => self.paths.reviews = path(),
            "tips" => self.paths.tips = path(),
            "friends" => self.paths.friends = path(),
            "schema" => self.schema = value.parse()?,
            "min_ratings" => self.min_ratings = parse_num(key, value)?,
            "category_tags" => {
                self.category_tags = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "variant" => {
                Algorithm::parse(value, self.ablation)?;
                self.variant = value.to_string();
            }
            "ablation" => self.ablation = value.parse()?,
            "alpha_grid" => self.alpha_grid = parse_list(key, value)?,
            "beta_grid" => self.beta_grid = parse_list(key, value)?,
            "alpha" => self.alpha_grid = vec![parse_num(key, value)?],
            "beta" => self.beta_grid = vec![parse_num(key, value)?],
            "k" => self.k = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = path(),
            "factors" => self.hp.k = parse_num(key, value)?,
            "lambda" => self.hp.lambda = parse_num(key, value)?,
            "learning_rate" => self.hp.learning_rate = parse_num(key, value)?,
            "epochs" => self.hp.epochs = parse_num(key, value)?,
            "init_scale" => self.hp.init_scale = parse_num(key, value)?,
            "test_fraction" => self.test_fraction = parse_num(key, value)?,
            "folds" => self.folds = parse_num(key, value)?,
            "k_neighbors" => self.k_neighbors = parse_num(key, value)?,
            "error_scope" => {
                self.error_scope = match value {
                    "recommended" => ErrorScope::Recommended,
                    "all-test" | "all" => ErrorScope::AllTest,
                    other => return Err(Error::Config(format!("unknown error scope {other:?}"))),
                }
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        Algorithm::parse(&self.variant, self.ablation)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() || self.beta_grid.is_empty() {
            return Err(Error::Config("parameter grids must be non-empty".into()));
        }
        if self.alpha_grid.iter().any(|a| a.is_nan() || *a < 0.0) {
            return Err(Error::Config("alpha values must be non-negative".into()));
        }
        if self.beta_grid.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::Config("beta values must lie in [0, 1]".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        self.algorithm()?;
        self.hyper_params().validate()
    }

    fn hyper_params(&self) -> HyperParams {
        HyperParams {
            seed: self.seed,
            ..self.hp
        }
    }

    /// The cell used by commands that train without a grid search.
    fn single_cell(&self) -> Result<CellConfig> {
        Ok(CellConfig {
            algorithm: self.algorithm()?,
            alpha: self.alpha_grid[0],
            beta: self.beta_grid[0],
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    Ok(&cfg.out)
}

/// Load and filter the configured dataset.
pub fn load(cfg: &RunConfig) -> Result<Dataset> {
    let d = load_dataset(&cfg.paths, cfg.schema)?;
    Ok(filter_dataset(&d, cfg.min_ratings, &cfg.category_tags))
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<DatasetStats> {
    Ok(load(cfg)?.stats())
}

/// Social and trust inputs derived from a dataset. Pieces an algorithm does
/// not use are left empty.
pub struct TrustInputs {
    pub graph: SocialGraph,
    pub pagerank: Option<PageRankResult>,
    pub indicators: IndicatorVector,
}

impl TrustInputs {
    pub fn importance(&self) -> &[f64] {
        self.pagerank.as_ref().map_or(&[], |p| &p.importance)
    }
}

pub fn trust_inputs(d: &Dataset, algorithm: Algorithm) -> Result<TrustInputs> {
    let graph = build_graph(d)?;
    let social = matches!(algorithm, Algorithm::Locabal | Algorithm::LocabalPlus(_));
    let pagerank = if social && graph.num_nodes() > 0 {
        Some(pagerank(&graph, PageRankParams::default())?)
    } else {
        None
    };
    let indicators = match algorithm {
        Algorithm::LocabalPlus(_) => yelp_indicators(d, pagerank.as_ref().map(|p| p.importance.as_slice()))?,
        _ => IndicatorVector::new(Default::default())?,
    };
    Ok(TrustInputs {
        graph,
        pagerank,
        indicators,
    })
}

fn setup<'a>(cfg: &RunConfig, d: &'a Dataset, t: &'a TrustInputs) -> ExperimentSetup<'a> {
    ExperimentSetup {
        dataset: d,
        graph: &t.graph,
        importance: t.importance(),
        indicators: &t.indicators,
        hp: cfg.hyper_params(),
        k_neighbors: cfg.k_neighbors,
        top_k: cfg.k,
        error_scope: cfg.error_scope,
    }
}

fn write_trust(
    dir: &Path,
    d: &Dataset,
    t: &TrustInputs,
    ablation: Ablation,
    beta: f64,
) -> Result<TrustScores> {
    if let Some(pr) = &t.pagerank {
        write_file(&dir.join(PAGERANK_FILE), |w| pr.write_tsv(&t.graph, w))?;
    }
    let trust = compute_trust(d, &t.indicators, &ablation.trust_config(beta)?)?;
    write_file(&dir.join(TRUST_FILE), |w| trust.write_tsv(d, w))?;
    Ok(trust)
}

/// Write PageRank and trust dumps for the configured ablation and the first
/// `beta` of the grid.
pub fn cmd_trust(cfg: &RunConfig) -> Result<TrustScores> {
    cfg.validate()?;
    let d = load(cfg)?;
    let t = trust_inputs(&d, Algorithm::LocabalPlus(cfg.ablation))?;
    write_trust(out_dir(cfg)?, &d, &t, cfg.ablation, cfg.beta_grid[0])
}

/// Train the first grid cell on the training split and dump the model.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    let cell = cfg.single_cell()?;
    let d = load(cfg)?;
    let plan = split_holdout(&d, cfg.test_fraction, cfg.seed)?;
    let t = trust_inputs(&d, cell.algorithm)?;
    let fitted = fit(&setup(cfg, &d, &t), &cell, &plan.train)?;
    let model = fitted
        .model()
        .cloned()
        .ok_or_else(|| Error::Config(format!("{} has no model to train", cell.algorithm.name())))?;
    let dir = out_dir(cfg)?;
    write_file(&dir.join(MODEL_FILE), |w| model.write(w))?;
    Ok(model)
}

fn run_grid(cfg: &RunConfig, d: &Dataset, t: &TrustInputs, plan: &SplitPlan) -> Result<GridResult> {
    grid_search(
        &setup(cfg, d, t),
        cfg.algorithm()?,
        &plan.train,
        &cfg.alpha_grid,
        &cfg.beta_grid,
        cfg.folds,
        cfg.seed,
    )
}

fn write_grid(dir: &Path, grid: &GridResult) -> Result<()> {
    write_file(&dir.join(GRID_FILE), |w| grid.write_csv(w))?;
    write_file(&dir.join(GRID_FOLDS_FILE), |w| grid.write_folds_csv(w))
}

/// Grid search on the training split; writes the grid tables.
pub fn cmd_grid(cfg: &RunConfig) -> Result<GridResult> {
    cfg.validate()?;
    let d = load(cfg)?;
    let plan = split_holdout(&d, cfg.test_fraction, cfg.seed)?;
    let t = trust_inputs(&d, cfg.algorithm()?)?;
    let grid = run_grid(cfg, &d, &t, &plan)?;
    write_grid(out_dir(cfg)?, &grid)?;
    Ok(grid)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub grid: GridResult,
    pub report: MetricsReport,
}

/// Split, trust, grid search and final evaluation of the best cell.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let algorithm = cfg.algorithm()?;
    let d = load(cfg)?;
    let plan = split_holdout(&d, cfg.test_fraction, cfg.seed)?;
    let t = trust_inputs(&d, algorithm)?;
    let grid = run_grid(cfg, &d, &t, &plan)?;
    let (report, fitted) = evaluate_final(&setup(cfg, &d, &t), &grid.best, &plan.train, &plan.test)?;

    let dir = out_dir(cfg)?;
    write_file(&dir.join(SPLIT_FILE), |w| plan.write_tsv(&d, w))?;
    write_grid(dir, &grid)?;
    write_file(&dir.join(REPORT_FILE), |w| {
        MetricsReport::write_csv(std::slice::from_ref(&report), w)
    })?;
    if let Some(model) = fitted.model() {
        write_file(&dir.join(MODEL_FILE), |w| model.write(w))?;
    }
    if let Algorithm::LocabalPlus(ablation) = algorithm {
        write_trust(dir, &d, &t, ablation, grid.best.beta)?;
    }
    Ok(RunOutcome { grid, report })
}

/// Generate a synthetic dataset and write it as JSON lines into `dir`.
pub fn cmd_synth(sc: &SynthConfig, dir: &Path) -> Result<Dataset> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data = synth::generate(sc)?;
    save_dataset(&data.dataset, &DatasetPaths::in_dir(dir))?;
    Ok(data.dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_keys_and_comments() {
        let text =
            "# experiment\nvariant = MF\nalpha_grid = 0, 0.5\nbeta = 0.3\nk = 5 # top five\ndata_dir = d\n";
        let cfg = RunConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(cfg.variant, "MF");
        assert_eq!(cfg.alpha_grid, vec![0.0, 0.5]);
        assert_eq!(cfg.beta_grid, vec![0.3]);
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.paths.users, Path::new("/base/d/users.jsonl"));
        assert_eq!(cfg.out, Path::new("/base/out"));
    }

    #[test]
    fn parse_errors() {
        let base = Path::new(".");
        assert!(matches!(
            RunConfig::parse("nonsense", base),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("colour = red", base),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::parse("k = ten", base), Err(Error::Config(_))));
        assert!(RunConfig::parse("ablation = noX", base).is_err());
        let cfg = RunConfig::parse("alpha_grid = ", base).unwrap();
        assert!(cfg.validate().is_err());
    }
}

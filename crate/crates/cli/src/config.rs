//! Config file schema and construction of library objects from it.
//!
//! The file is TOML with a fixed field set; unknown keys are rejected
//! with the parser's line/column diagnostics.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use cltbound::bounds::GaussianTarget;
use cltbound::corpus::{default_corpus, randomized_corpus, CorpusInstance};
use cltbound::matrix::DMat;
use cltbound::mc::McConfig;
use cltbound::quadforms::QuadFormSpec;
use cltbound::runs::RunsSpec;
use cltbound::statistic::StatisticVector;
use cltbound::table::JointTable;
use cltbound::verify::{cosine_test_function, SmoothTestFunction};
use cltbound::{ComponentDistribution, ProductModel};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional command name; must match the invoked subcommand.
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub alphas: Option<Vec<f64>>,
    pub model: Option<ModelConfig>,
    pub statistic: Option<StatisticConfig>,
    pub target: Option<TargetConfig>,
    pub test_function: Option<TestFunctionConfig>,
    pub mc: Option<McSection>,
    pub identities: Option<IdentitiesConfig>,
    pub sweep: Option<SweepConfig>,
    pub compare_runs: Option<CompareRunsConfig>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// "rademacher" | "bernoulli" | "atoms"
    pub kind: String,
    pub n: Option<usize>,
    pub p: Option<f64>,
    /// per-coordinate lists of [value, probability]
    pub atoms: Option<Vec<Vec<(f64, f64)>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticConfig {
    /// "sum" | "product" | "runs" | "quadform" | "rademacher-polynomial"
    pub kind: String,
    pub coefficients: Option<Vec<f64>>,
    pub scale: Option<f64>,
    pub indices: Option<Vec<usize>>,
    pub window_lengths: Option<Vec<usize>>,
    pub window_count: Option<usize>,
    pub runs_coefficients: Option<Vec<Vec<f64>>>,
    pub matrices: Option<Vec<Vec<Vec<f64>>>>,
    pub matrices_csv: Option<Vec<String>>,
    pub degree: Option<usize>,
    pub terms: Option<usize>,
    pub poly_seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    /// "identity" | "exact-covariance" | "explicit"
    pub kind: String,
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionConfig {
    /// only "cosine"
    pub kind: String,
    pub t: Vec<f64>,
    pub phase: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub outer_samples: usize,
    pub inner_resamples: usize,
    pub chunk_size: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub default_corpus: Option<bool>,
    pub randomized: Option<usize>,
    pub randomized_seed: Option<u64>,
    pub centered: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// "bernoulli-runs" | "qf-tridiagonal" | "qf-concentrated-row"
    pub family: String,
    pub n_grid: Vec<usize>,
    pub p: Option<f64>,
    pub d: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRunsConfig {
    pub p_values: Option<Vec<f64>>,
    pub d_values: Option<Vec<usize>>,
    pub n_values: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub svg: Option<String>,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn check_command(&self, invoked: &str) -> Result<(), CliError> {
        if let Some(c) = &self.command {
            if c != invoked {
                return Err(CliError::Config(format!(
                    "config names command \"{c}\" but \"{invoked}\" was invoked"
                )));
            }
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.alphas.clone().unwrap_or_else(|| vec![0.5])
    }

    pub fn mc_config(&self, seed: u64) -> Result<McConfig, CliError> {
        let mc = self
            .mc
            .as_ref()
            .ok_or_else(|| CliError::Config("mc mode requires an [mc] section".into()))?;
        Ok(McConfig::new(
            mc.outer_samples,
            mc.inner_resamples,
            seed,
            mc.chunk_size,
        ))
    }
}

/// The fully-built problem a command operates on.
pub struct Problem {
    pub model: Arc<ProductModel>,
    pub stat: StatisticVector,
    pub kind: StatisticKind,
}

pub enum StatisticKind {
    Generic,
    Runs(RunsSpec),
    QuadForm(QuadFormSpec),
}

fn iid_component(model: &ModelConfig) -> Result<ComponentDistribution, CliError> {
    match model.kind.as_str() {
        "rademacher" => Ok(ComponentDistribution::rademacher()),
        "bernoulli" => {
            let p = model
                .p
                .ok_or_else(|| CliError::Config("bernoulli model requires field p".into()))?;
            ComponentDistribution::bernoulli(p).map_err(CliError::from)
        }
        other => Err(CliError::Config(format!(
            "model kind \"{other}\" cannot be used as an iid prototype"
        ))),
    }
}

fn explicit_components(model: &ModelConfig) -> Result<Vec<ComponentDistribution>, CliError> {
    let atoms = model
        .atoms
        .as_ref()
        .ok_or_else(|| CliError::Config("model kind atoms requires field atoms".into()))?;
    atoms
        .iter()
        .map(|pairs| ComponentDistribution::from_pairs(pairs).map_err(CliError::from))
        .collect()
}

pub fn build_model(model: &ModelConfig) -> Result<Arc<ProductModel>, CliError> {
    match model.kind.as_str() {
        "atoms" => Ok(ProductModel::new(explicit_components(model)?)?),
        "rademacher" | "bernoulli" => {
            let n = model.n.ok_or_else(|| {
                CliError::Config(format!("model kind {} requires field n", model.kind))
            })?;
            Ok(ProductModel::iid(iid_component(model)?, n)?)
        }
        other => Err(CliError::Config(format!("unknown model kind \"{other}\""))),
    }
}

fn components_for(
    model: &ModelConfig,
    required: usize,
) -> Result<Vec<ComponentDistribution>, CliError> {
    match model.kind.as_str() {
        "atoms" => {
            let comps = explicit_components(model)?;
            if comps.len() != required {
                return Err(CliError::Config(format!(
                    "statistic needs {required} coordinates but the model lists {}",
                    comps.len()
                )));
            }
            Ok(comps)
        }
        _ => Ok(vec![iid_component(model)?; required]),
    }
}

fn dense_matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMat, CliError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("coefficient matrix is not square".into()));
    }
    Ok(DMat::from_rows(rows))
}

fn dense_matrix_from_csv(path: &str) -> Result<DMat, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Config(format!("{path}: bad number {f:?}: {e}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    dense_matrix_from_rows(&rows)
}

pub fn build_problem(config: &RunConfig, seed: u64) -> Result<Problem, CliError> {
    let stat_cfg = config
        .statistic
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [statistic] section".into()))?;
    let model_cfg = config
        .model
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [model] section".into()))?;
    match stat_cfg.kind.as_str() {
        "sum" => {
            let model = build_model(model_cfg)?;
            let coeffs = match (&stat_cfg.coefficients, stat_cfg.scale) {
                (Some(c), _) => c.clone(),
                (None, Some(s)) => vec![1.0 / s; model.n()],
                (None, None) => vec![1.0; model.n()],
            };
            if coeffs.len() != model.n() {
                return Err(CliError::Config(format!(
                    "sum statistic has {} coefficients for {} coordinates",
                    coeffs.len(),
                    model.n()
                )));
            }
            Ok(Problem {
                model,
                stat: StatisticVector::weighted_sum(coeffs),
                kind: StatisticKind::Generic,
            })
        }
        "product" => {
            let model = build_model(model_cfg)?;
            let indices = stat_cfg
                .indices
                .clone()
                .unwrap_or_else(|| (0..model.n()).collect());
            if indices.iter().any(|&i| i >= model.n()) {
                return Err(CliError::Config("product index out of range".into()));
            }
            Ok(Problem {
                model,
                stat: StatisticVector::monomial(indices),
                kind: StatisticKind::Generic,
            })
        }
        "runs" => {
            let m = stat_cfg
                .window_lengths
                .clone()
                .ok_or_else(|| CliError::Config("runs statistic requires window_lengths".into()))?;
            let n = stat_cfg
                .window_count
                .ok_or_else(|| CliError::Config("runs statistic requires window_count".into()))?;
            let max_m = *m.iter().max().unwrap_or(&1);
            let spec = match &stat_cfg.runs_coefficients {
                Some(coeffs) => RunsSpec::new(
                    m,
                    n,
                    coeffs.clone(),
                    components_for(model_cfg, n + max_m - 1)?,
                )?,
                None => {
                    // normalized Bernoulli coefficients
                    let p = model_cfg.p.ok_or_else(|| {
                        CliError::Config(
                            "runs without explicit coefficients requires a bernoulli model".into(),
                        )
                    })?;
                    let d = m.len();
                    if m != (1..=d).collect::<Vec<_>>() {
                        return Err(CliError::Config(
                            "normalized runs require window_lengths = [1..d]".into(),
                        ));
                    }
                    RunsSpec::bernoulli(n, d, p)?
                }
            };
            Ok(Problem {
                model: spec.model()?,
                stat: spec.statistic(),
                kind: StatisticKind::Runs(spec),
            })
        }
        "quadform" => {
            let matrices: Vec<DMat> = match (&stat_cfg.matrices, &stat_cfg.matrices_csv) {
                (Some(inline), _) => inline
                    .iter()
                    .map(|rows| dense_matrix_from_rows(rows))
                    .collect::<Result<_, _>>()?,
                (None, Some(paths)) => paths
                    .iter()
                    .map(|p| dense_matrix_from_csv(p))
                    .collect::<Result<_, _>>()?,
                (None, None) => {
                    return Err(CliError::Config(
                        "quadform requires matrices or matrices_csv".into(),
                    ))
                }
            };
            let n = matrices.first().map(|m| m.dim()).unwrap_or(0);
            let spec = QuadFormSpec::new(matrices, components_for(model_cfg, n)?)?;
            Ok(Problem {
                model: spec.model()?,
                stat: spec.statistic(),
                kind: StatisticKind::QuadForm(spec),
            })
        }
        "rademacher-polynomial" => {
            let model = build_model(model_cfg)?;
            let degree = stat_cfg.degree.unwrap_or(3);
            let terms = stat_cfg.terms.unwrap_or(4);
            let poly_seed = stat_cfg.poly_seed.unwrap_or(seed);
            let mut rng = cltbound::rng::CounterRng::new(poly_seed, 0);
            let poly =
                cltbound::corpus::random_multilinear(&mut rng, model.n(), degree, terms);
            Ok(Problem {
                model,
                stat: poly.statistic(None),
                kind: StatisticKind::Generic,
            })
        }
        other => Err(CliError::Config(format!(
            "unknown statistic kind \"{other}\""
        ))),
    }
}

pub fn build_target(
    config: &RunConfig,
    problem: &Problem,
) -> Result<GaussianTarget, CliError> {
    let dim = problem.stat.dim();
    let cfg = config.target.as_ref();
    match cfg.map(|t| t.kind.as_str()).unwrap_or("exact-covariance") {
        "identity" => Ok(GaussianTarget::identity(dim)),
        "explicit" => {
            let rows = cfg
                .and_then(|t| t.matrix.clone())
                .ok_or_else(|| CliError::Config("explicit target requires matrix".into()))?;
            if rows.len() != dim {
                return Err(CliError::Config(format!(
                    "target matrix is {}x{} but the statistic has dimension {dim}",
                    rows.len(),
                    rows.len()
                )));
            }
            Ok(GaussianTarget::new(dense_matrix_from_rows(&rows)?)?)
        }
        "exact-covariance" => {
            let table = JointTable::build(&problem.model, &problem.stat)?;
            let (_, cov) = table.moments();
            Ok(GaussianTarget::new(cov)?)
        }
        other => Err(CliError::Config(format!("unknown target kind \"{other}\""))),
    }
}

pub fn build_test_function(config: &RunConfig) -> Result<SmoothTestFunction, CliError> {
    let tf = config
        .test_function
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [test_function] section".into()))?;
    match tf.kind.as_str() {
        "cosine" => Ok(cosine_test_function(&tf.t, tf.phase.unwrap_or(0.0))),
        other => Err(CliError::Config(format!(
            "unknown test function kind \"{other}\""
        ))),
    }
}

pub fn build_identity_corpus(config: &RunConfig) -> Vec<CorpusInstance> {
    let ids = config.identities.as_ref();
    let mut corpus = Vec::new();
    if ids.map(|i| i.default_corpus.unwrap_or(true)).unwrap_or(true) {
        corpus.extend(default_corpus());
    }
    if let Some(ids) = ids {
        let count = ids.randomized.unwrap_or(0);
        if count > 0 {
            corpus.extend(randomized_corpus(
                count,
                ids.randomized_seed.unwrap_or(1),
                ids.centered.unwrap_or(false),
            ));
        }
    }
    corpus
}

//! Growth experiments: realized type counts `|S_φ(B)|` over sampled
//! parameter sets of increasing size, fitted to a power law.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use laminar_core::growth::{fit_codensity_exponent, median, GrowthPoint, GrowthSeries};
use laminar_core::models::{builtin_formulas, load_model, random_ultrametric, Model};
use laminar_core::{equality_witness, type_space, Error, ParametrizedFormula, TypeSpaceOptions};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{derive_seed, HarnessError};

pub const DEFAULT_TOL: f64 = 0.15;
pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_BRANCHING: usize = 3;

/// Where the carrier comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    File(PathBuf),
    /// Seeded random ultrametric tree; `leaves` defaults to twice the
    /// largest size.
    Ultrametric {
        leaves: Option<usize>,
        branching: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub formula: String,
    /// Object arity `k`.
    pub arity: usize,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Evaluation cap per type-space computation.
    pub cap: u64,
    /// Sample object tuples instead of failing when over the cap.
    pub sample: bool,
    pub tol: f64,
    /// Record wall time per row; off gives bit-identical output.
    pub timing: bool,
    /// Draw parameter tuples with replacement.
    pub allow_duplicates: bool,
}

impl ExperimentConfig {
    pub fn new(formula: impl Into<String>, arity: usize, sizes: Vec<usize>) -> Self {
        ExperimentConfig {
            model: ModelSpec::Ultrametric {
                leaves: None,
                branching: DEFAULT_BRANCHING,
                seed: 0,
            },
            formula: formula.into(),
            arity,
            sizes,
            trials: DEFAULT_TRIALS,
            seed: 0,
            cap: laminar_core::types::DEFAULT_EVAL_CAP,
            sample: false,
            tol: DEFAULT_TOL,
            timing: true,
            allow_duplicates: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let usage = |m: String| Err(HarnessError::Usage(m));
        if self.sizes.is_empty() {
            return usage("at least one size is required".into());
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return usage(format!(
                "sizes must be strictly increasing, got {:?}",
                self.sizes
            ));
        }
        if self.sizes[0] == 0 {
            return usage("sizes must be positive".into());
        }
        if self.trials == 0 {
            return usage("trials must be at least 1".into());
        }
        if !(1..=2).contains(&self.arity) {
            return usage(format!("arity must be 1 or 2, got {}", self.arity));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return usage(format!(
                "tolerance must be a non-negative number, got {}",
                self.tol
            ));
        }
        Ok(())
    }

    /// Declared exponent ceiling `k + tol`.
    pub fn ceiling(&self) -> f64 {
        self.arity as f64 + self.tol
    }

    pub fn load_model(&self) -> Result<Model, HarnessError> {
        match &self.model {
            ModelSpec::File(path) => Ok(load_model(path)?),
            ModelSpec::Ultrametric {
                leaves,
                branching,
                seed,
            } => {
                let max = self.sizes.last().copied().unwrap_or(2);
                let leaves = leaves.unwrap_or((2 * max).max(4));
                Ok(Model::Ultrametric(random_ultrametric(
                    leaves, *branching, *seed,
                )?))
            }
        }
    }
}

/// Formulas of a kind, in the orientation whose object arity is `arity`.
///
/// * `eq-witness`: `x_1 = y ∨ … ∨ x_k = y`.
/// * `lt`: `x < y` on the carrier (`k = 1`).
/// * `ball`, `ball-up-j`: membership in the ball of a node (ultrametric,
///   `k = 1`).
/// * `member`: `x ∈ S_y` for the sets of a family model (`k = 1`).
/// * u-ball corpus kinds (`lca-ball`, `twin-ball[-j]`, `boolean-mix[-j-i]`,
///   `corpus`): `φ(x; y0, y1)` as is for `k = 1`; for `k = 2` the opposite
///   formula with the leaf pair as objects and one leaf as parameter.
pub fn resolve_formulas(
    model: &Model,
    kind: &str,
    arity: usize,
) -> Result<Vec<ParametrizedFormula>, HarnessError> {
    let n = model.carrier().size();
    let need_arity_one = |name: &str| {
        if arity == 1 {
            Ok(())
        } else {
            Err(HarnessError::Usage(format!(
                "formula {name} has a single object variable; use --arity 1"
            )))
        }
    };
    match (kind, model) {
        ("eq-witness", _) => Ok(vec![equality_witness(arity, n)]),
        ("lt", _) => {
            need_arity_one(kind)?;
            Ok(vec![ParametrizedFormula::new(
                "lt",
                (1, n),
                (1, n),
                |x, y| x[0] < y[0],
            )])
        }
        ("member", Model::Family(f)) => {
            need_arity_one(kind)?;
            let sets = f.family().sets().to_vec();
            Ok(vec![ParametrizedFormula::new(
                "member",
                (1, n),
                (1, sets.len()),
                move |x, y| sets[y[0]].contains(x[0]),
            )])
        }
        (_, Model::Ultrametric(m)) if kind == "ball" || kind.starts_with("ball-up-") => {
            need_arity_one(kind)?;
            let up = match kind.strip_prefix("ball-up-") {
                None => 0,
                Some(j) => j
                    .parse()
                    .map_err(|_| HarnessError::Usage(format!("unknown formula kind {kind:?}")))?,
            };
            Ok(vec![m.ball_formula_at(up)])
        }
        (_, Model::Ultrametric(m)) => {
            let corpus = builtin_formulas(m, kind).map_err(|e| match e {
                Error::Domain(msg) => HarnessError::Usage(msg),
                other => other.into(),
            })?;
            Ok(corpus
                .iter()
                .map(|f| {
                    if arity == 1 {
                        f.base().clone()
                    } else {
                        f.base().opposite()
                    }
                })
                .collect())
        }
        _ => Err(HarnessError::Usage(format!(
            "formula kind {kind:?} is not available on model {}",
            model.id()
        ))),
    }
}

/// One CSV row; field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Row {
    pub model: String,
    pub formula: String,
    pub arity: usize,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub type_count: usize,
    pub ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialFit {
    pub trial: usize,
    pub series: GrowthSeries,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormulaGrowth {
    pub formula: String,
    pub arity: usize,
    pub trials: Vec<TrialFit>,
    pub median_exponent: Option<f64>,
    pub ceiling: f64,
    pub pass: bool,
    /// `false` if any count came from sampled object tuples.
    pub exhaustive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub model: String,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub tol: f64,
    pub formulas: Vec<FormulaGrowth>,
    /// Set when some computation exceeded the cap; the report then covers
    /// only the rows that finished.
    pub resource_error: Option<String>,
    pub pass: bool,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

impl GrowthReport {
    /// Exit code: 0 pass, 1 ceiling exceeded, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        if self.resource_error.is_some() {
            3
        } else if self.pass {
            0
        } else {
            1
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record([
                "model",
                "formula",
                "arity",
                "m",
                "trial",
                "seed",
                "type_count",
                "ms",
            ])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|source| HarnessError::Io {
            path: PathBuf::from("<csv>"),
            source,
        })?;
        Ok(())
    }
}

/// `m` parameter tuples from `domain^arity`, distinct unless `duplicates`.
fn sample_params(
    rng: &mut ChaCha8Rng,
    domain: usize,
    arity: usize,
    m: usize,
    duplicates: bool,
) -> Result<Vec<Vec<usize>>, HarnessError> {
    let total = (domain as u128).pow(arity as u32);
    let decode = |mut i: usize| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = i % domain;
            i /= domain;
        }
        t
    };
    if duplicates {
        return Ok((0..m)
            .map(|_| decode(rng.gen_range(0..total as usize)))
            .collect());
    }
    if m as u128 > total {
        return Err(HarnessError::Usage(format!(
            "cannot draw {m} distinct parameters from {total} candidates; use a larger model"
        )));
    }
    Ok(sample(rng, total as usize, m)
        .into_iter()
        .map(decode)
        .collect())
}

enum JobFailure {
    Harness(HarnessError),
    Core(Error),
}

struct Outcome {
    formula: usize,
    row: Row,
    exhaustive: bool,
}

/// Runs every (formula, size, trial) job. Trials run concurrently, each
/// with its own generator seeded from `(seed, size, trial)`; rows are sorted
/// before they are reported.
pub fn run_growth(config: &ExperimentConfig) -> Result<GrowthReport, HarnessError> {
    config.validate()?;
    let model = config.load_model()?;
    let formulas = resolve_formulas(&model, &config.formula, config.arity)?;
    let carrier = model.carrier();
    let model_id = model.id();

    let mut jobs = Vec::new();
    for fi in 0..formulas.len() {
        for &m in &config.sizes {
            for trial in 0..config.trials {
                jobs.push((fi, m, trial));
            }
        }
    }
    let results: Vec<Result<Outcome, JobFailure>> = jobs
        .par_iter()
        .map(|&(fi, m, trial)| {
            let f = &formulas[fi];
            let seed = derive_seed(config.seed, &[m as u64, trial as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = sample_params(
                &mut rng,
                f.param_domain(),
                f.param_arity(),
                m,
                config.allow_duplicates,
            )
            .map_err(JobFailure::Harness)?;
            let options = TypeSpaceOptions {
                cap: config.cap,
                sampling_seed: config.sample.then_some(seed),
            };
            let start = Instant::now();
            let ts = type_space(
                std::slice::from_ref(f),
                &params,
                carrier,
                config.arity,
                options,
            )
            .map_err(JobFailure::Core)?;
            let ms = if config.timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            Ok(Outcome {
                formula: fi,
                exhaustive: ts.exhaustive,
                row: Row {
                    model: model_id.clone(),
                    formula: f.name().to_string(),
                    arity: config.arity,
                    m,
                    trial,
                    seed,
                    type_count: ts.count(),
                    ms,
                },
            })
        })
        .collect();

    let mut outcomes = Vec::new();
    let mut resource_error = None;
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(JobFailure::Core(Error::Resource(msg))) => {
                resource_error.get_or_insert(msg);
            }
            Err(JobFailure::Core(e)) => return Err(e.into()),
            Err(JobFailure::Harness(e)) => return Err(e),
        }
    }
    outcomes.sort_by(|a, b| (a.formula, &a.row).cmp(&(b.formula, &b.row)));

    let mut per_formula = Vec::new();
    for (fi, f) in formulas.iter().enumerate() {
        let mine: Vec<&Outcome> = outcomes.iter().filter(|o| o.formula == fi).collect();
        let mut trials = Vec::new();
        for trial in 0..config.trials {
            let mut series = GrowthSeries::default();
            for o in mine.iter().filter(|o| o.row.trial == trial) {
                series.push(GrowthPoint {
                    m: o.row.m,
                    count: o.row.type_count,
                    seed: o.row.seed,
                });
            }
            if let Ok(fit) = fit_codensity_exponent(&series) {
                series.fitted_exponent = Some(fit.exponent);
            }
            trials.push(TrialFit { trial, series });
        }
        let exponents: Vec<f64> = trials
            .iter()
            .filter_map(|t| t.series.fitted_exponent)
            .collect();
        let median_exponent = median(&exponents);
        per_formula.push(FormulaGrowth {
            formula: f.name().to_string(),
            arity: config.arity,
            median_exponent,
            ceiling: config.ceiling(),
            pass: median_exponent.is_some_and(|e| e <= config.ceiling()),
            exhaustive: mine.iter().all(|o| o.exhaustive),
            trials,
        });
    }

    let pass = resource_error.is_none() && per_formula.iter().all(|f| f.pass);
    Ok(GrowthReport {
        model: model_id,
        seed: config.seed,
        sizes: config.sizes.clone(),
        tol: config.tol,
        formulas: per_formula,
        resource_error,
        pass,
        rows: outcomes.into_iter().map(|o| o.row).collect(),
    })
}

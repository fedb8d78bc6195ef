//! Experiment runners: error versus unlabeled sample size, prior-estimation
//! error versus data size, and the clustering benchmark against k-means.
//!
//! Every trial owns a seed derived from the master seed and its index, so
//! results do not depend on execution order. A failed trial is recorded and
//! the run continues.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baseline::{clustering_accuracy, error_rate, kmeans2, DEFAULT_KMEANS_MAX_ITER};
use crate::datasets::{generate_gaussian, sample_su, ClassPrior, Label, LabeledDataset, SamplingOptions, SuDataset, SyntheticSpec};
use crate::error::{Result, SuError};
use crate::losses::LossKind;
use crate::modelselect::{cross_validate, CvPlan};
use crate::prior::{estimate_prior, MpeConfig, PriorCase};
use crate::rng::{derive_seed, rng_from_seed, tags};
use crate::train::{train, BasisSpec, LinearModel, TrainConfig};

/// Two interleaved crescents in 2-D with Gaussian jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BananaSpec {
    pub noise: f64,
    pub pi_plus: f64,
    pub seed: u64,
}

impl Default for BananaSpec {
    fn default() -> Self {
        Self {
            noise: 0.2,
            pi_plus: 0.5,
            seed: 0,
        }
    }
}

pub fn generate_banana(spec: &BananaSpec, n: usize) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(SuError::InvalidArgument("n must be at least 1".into()));
    }
    if !(spec.pi_plus > 0.0 && spec.pi_plus < 1.0) {
        return Err(SuError::InvalidArgument(format!("class prior must lie in (0, 1), got {}", spec.pi_plus)));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(SuError::InvalidArgument(format!("noise must be non-negative, got {}", spec.noise)));
    }
    let mut rng = rng_from_seed(spec.seed);
    let mut x = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for mut row in x.rows_mut() {
        let label = if rng.random_bool(spec.pi_plus) { Label::Pos } else { Label::Neg };
        let t = rng.random::<f64>() * PI;
        let (a, b) = match label {
            Label::Pos => (t.cos(), t.sin()),
            Label::Neg => (1.0 - t.cos(), 0.5 - t.sin()),
        };
        let ea: f64 = rng.sample(StandardNormal);
        let eb: f64 = rng.sample(StandardNormal);
        row[0] = a + spec.noise * ea;
        row[1] = b + spec.noise * eb;
        labels.push(label);
    }
    LabeledDataset::new(x, labels)
}

/// Where labeled points come from. Synthetic families draw fresh data per
/// trial; a fixed pair of files is reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Gaussian(SyntheticSpec),
    Banana(BananaSpec),
    #[serde(skip)]
    Fixed { pool: LabeledDataset, test: LabeledDataset },
}

impl DataSource {
    pub fn dim(&self) -> usize {
        match self {
            DataSource::Gaussian(s) => s.dim(),
            DataSource::Banana(_) => 2,
            DataSource::Fixed { pool, .. } => pool.dim(),
        }
    }

    /// `n` labeled points with positive fraction `pi_plus` in expectation.
    pub fn generate(&self, n: usize, pi_plus: f64, seed: u64) -> Result<LabeledDataset> {
        match self {
            DataSource::Gaussian(s) => generate_gaussian(&SyntheticSpec { pi_plus, seed, ..s.clone() }, n),
            DataSource::Banana(b) => generate_banana(&BananaSpec { pi_plus, seed, ..b.clone() }, n),
            DataSource::Fixed { .. } => Err(SuError::InvalidArgument("a fixed data source cannot generate points".into())),
        }
    }

    /// SU sample for one trial. Synthetic sources sample without
    /// replacement from a fresh balanced pool, so the draws are i.i.d.
    pub fn sample(&self, pi_plus: f64, n_s: usize, n_u: usize, seed: u64) -> Result<SuDataset> {
        match self {
            DataSource::Fixed { pool, .. } => sample_su(pool, pi_plus, n_s, n_u, seed, &SamplingOptions::default()),
            _ => {
                let need = 2 * n_s + n_u;
                let pool = self.generate(4 * need + 1000, 0.5, derive_seed(seed, tags::CORPUS, 0))?;
                let opts = SamplingOptions {
                    replacement: false,
                    ..SamplingOptions::default()
                };
                sample_su(&pool, pi_plus, n_s, n_u, derive_seed(seed, tags::SAMPLE, 0), &opts)
            }
        }
    }

    /// Held-out labeled set with class ratio `pi_plus`.
    pub fn test_set(&self, n: usize, pi_plus: f64, seed: u64) -> Result<LabeledDataset> {
        match self {
            DataSource::Fixed { test, .. } => Ok(test.clone()),
            _ => self.generate(n, pi_plus, seed),
        }
    }
}

/// How features are built for training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisChoice {
    Linear,
    /// Centers are unlabeled training points; bandwidth by median heuristic.
    Rbf { max_centers: usize },
}

impl BasisChoice {
    pub fn build(&self, su: &SuDataset, seed: u64) -> Result<BasisSpec> {
        match *self {
            BasisChoice::Linear => Ok(BasisSpec::identity(su.dim())),
            BasisChoice::Rbf { max_centers } => BasisSpec::rbf_from_points(su.u_points().view(), max_centers, seed),
        }
    }
}

/// Lambda is either fixed or chosen by cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaChoice {
    Fixed { lambda: f64 },
    CrossValidate { k: usize, grid: Vec<f64> },
}

impl Default for LambdaChoice {
    fn default() -> Self {
        let plan = CvPlan::default();
        LambdaChoice::CrossValidate {
            k: plan.k,
            grid: plan.lambda_grid,
        }
    }
}

/// Trains one loss on `su`, selecting lambda as configured.
pub fn fit(su: &SuDataset, basis: &BasisSpec, loss: LossKind, prior: ClassPrior, lambda: &LambdaChoice, seed: u64) -> Result<(LinearModel, f64)> {
    let samples = su.training_view();
    let mut cfg = TrainConfig::new(loss, 0.0, prior);
    cfg.seed = seed;
    cfg.lambda = match lambda {
        LambdaChoice::Fixed { lambda } => *lambda,
        LambdaChoice::CrossValidate { k, grid } => {
            let plan = CvPlan {
                k: *k,
                lambda_grid: grid.clone(),
                losses: vec![loss],
                seed: derive_seed(seed, tags::CV, 0),
            };
            cross_validate(&samples, prior, basis, &plan, &cfg)?.best_lambda
        }
    };
    Ok((train(&samples, basis, &cfg)?.model, cfg.lambda))
}

fn status_of(r: &Result<()>) -> String {
    match r {
        Ok(()) => "ok".into(),
        Err(e) => format!("failed: {e}"),
    }
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Number of protocol-sized test points also scored in the sweep.
pub const SMALL_TEST_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NuSweepConfig {
    pub source: DataSource,
    pub pi_plus: f64,
    pub n_s: usize,
    pub n_u_grid: Vec<usize>,
    pub trials: usize,
    pub loss: LossKind,
    pub basis: BasisChoice,
    pub lambda: LambdaChoice,
    pub test_size: usize,
    pub seed: u64,
}

impl Default for NuSweepConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Gaussian(SyntheticSpec::isotropic(5, 2.0, 0.7, 0)),
            pi_plus: 0.7,
            n_s: 200,
            n_u_grid: vec![200, 400, 800, 1600],
            trials: 50,
            loss: LossKind::Squared,
            basis: BasisChoice::Linear,
            lambda: LambdaChoice::default(),
            test_size: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuSweepRow {
    pub pi_plus: f64,
    pub n_u: usize,
    pub trial: usize,
    /// Zero-one error on the full held-out set.
    pub error: Option<f64>,
    /// Zero-one error on its first 100 points.
    pub error_100: Option<f64>,
    pub lambda: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rows: usize,
    pub failures: usize,
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(SuError::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Classification error against unlabeled sample size with `pi_plus`
/// given. The test set is shared by all grid points of a trial.
pub fn run_nu_sweep(cfg: &NuSweepConfig) -> Result<(Vec<NuSweepRow>, RunSummary)> {
    check_trials(cfg.trials)?;
    let prior = ClassPrior::new(cfg.pi_plus)?;
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let trial_seed = derive_seed(cfg.seed, tags::TRIAL, trial as u64);
        let test = cfg.source.test_set(cfg.test_size, cfg.pi_plus, derive_seed(trial_seed, tags::TEST_SET, 0));
        for (g, &n_u) in cfg.n_u_grid.iter().enumerate() {
            let mut row = NuSweepRow {
                pi_plus: cfg.pi_plus,
                n_u,
                trial,
                error: None,
                error_100: None,
                lambda: None,
                status: String::new(),
            };
            let r = (|| -> Result<()> {
                let test = test.as_ref().map_err(|e| SuError::InvalidData(e.to_string()))?;
                let seed = derive_seed(trial_seed, tags::SAMPLE, g as u64);
                let su = cfg.source.sample(cfg.pi_plus, cfg.n_s, n_u, seed)?;
                let basis = cfg.basis.build(&su, derive_seed(seed, tags::BASIS, 0))?;
                let (model, lambda) = fit(&su, &basis, cfg.loss, prior, &cfg.lambda, seed)?;
                let pred = model.classify(test.features().view())?;
                let small = SMALL_TEST_SIZE.min(test.len());
                row.error = Some(error_rate(&pred, test.labels())?);
                row.error_100 = Some(error_rate(&pred[..small], &test.labels()[..small])?);
                row.lambda = Some(lambda);
                Ok(())
            })();
            row.status = status_of(&r);
            rows.push(row);
        }
    }
    let failures = rows.iter().filter(|r| r.status != "ok").count();
    let summary = RunSummary { rows: rows.len(), failures };
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorCurveConfig {
    pub source: DataSource,
    pub pi_plus: f64,
    /// Total sizes `N`: `N / 2` unlabeled points and `N / 4` pairs.
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub mpe: MpeConfig,
    pub case: PriorCase,
    pub seed: u64,
}

impl Default for PriorCurveConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Gaussian(SyntheticSpec::isotropic(5, 2.0, 0.7, 0)),
            pi_plus: 0.7,
            sizes: vec![200, 400, 800, 1600],
            trials: 20,
            mpe: MpeConfig::default(),
            case: PriorCase::AssumePlusLarger,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorCurveRow {
    pub n_total: usize,
    pub trial: usize,
    pub pi_plus_hat: Option<f64>,
    pub abs_error: Option<f64>,
    pub status: String,
}

/// Splits a total size into (pairs, unlabeled points): half of the points
/// are pair members, half unlabeled.
pub fn split_total(n_total: usize) -> (usize, usize) {
    (n_total / 4, n_total / 2)
}

/// Absolute prior-estimation error against data size.
pub fn run_prior_curve(cfg: &PriorCurveConfig) -> Result<(Vec<PriorCurveRow>, RunSummary)> {
    check_trials(cfg.trials)?;
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let trial_seed = derive_seed(cfg.seed, tags::TRIAL, trial as u64);
        for (g, &n_total) in cfg.sizes.iter().enumerate() {
            let mut row = PriorCurveRow {
                n_total,
                trial,
                pi_plus_hat: None,
                abs_error: None,
                status: String::new(),
            };
            let r = (|| -> Result<()> {
                let (n_s, n_u) = split_total(n_total);
                let seed = derive_seed(trial_seed, tags::SAMPLE, g as u64);
                let su = cfg.source.sample(cfg.pi_plus, n_s, n_u, seed)?;
                let mpe = MpeConfig {
                    seed: derive_seed(seed, tags::PRIOR, 0),
                    ..cfg.mpe.clone()
                };
                let est = estimate_prior(&su.training_view(), &mpe, cfg.case)?;
                row.pi_plus_hat = Some(est.pi_plus_hat);
                row.abs_error = Some((est.pi_plus_hat - cfg.pi_plus).abs());
                Ok(())
            })();
            row.status = status_of(&r);
            rows.push(row);
        }
    }
    let failures = rows.iter().filter(|r| r.status != "ok").count();
    let summary = RunSummary { rows: rows.len(), failures };
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub source: DataSource,
    pub pi_plus: f64,
    pub n_s: usize,
    pub n_u: usize,
    pub test_size: usize,
    pub trials: usize,
    pub basis: BasisChoice,
    pub losses: Vec<LossKind>,
    pub lambda: LambdaChoice,
    /// Estimate the prior (larger class positive) or use `pi_plus` as given.
    pub estimate_prior: bool,
    pub mpe: MpeConfig,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Gaussian(SyntheticSpec::isotropic(5, 2.0, 0.7, 0)),
            pi_plus: 0.7,
            n_s: 500,
            n_u: 500,
            test_size: 1000,
            trials: 20,
            basis: BasisChoice::Linear,
            losses: vec![LossKind::Squared, LossKind::DoubleHinge],
            lambda: LambdaChoice::default(),
            estimate_prior: true,
            mpe: MpeConfig::default(),
            seed: 0,
        }
    }
}

/// One CSV row: `method,trial,clustering_accuracy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: String,
    pub trial: usize,
    pub clustering_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub rows: usize,
    pub failures: usize,
    pub failure_messages: Vec<String>,
    /// Prior used in each trial where it was obtained.
    pub pi_plus_used: Vec<f64>,
}

pub const KMEANS_METHOD: &str = "kmeans";

pub fn su_method_name(loss: LossKind) -> String {
    format!("su-{}", loss.name())
}

/// SU classifiers with an estimated (or given) prior against k-means on
/// the unlabeled points, scored by clustering accuracy. A failure of one
/// method drops only that method's row for the trial.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<(Vec<BenchmarkRow>, BenchmarkSummary)> {
    check_trials(cfg.trials)?;
    let mut rows = Vec::new();
    let mut summary = BenchmarkSummary {
        rows: 0,
        failures: 0,
        failure_messages: Vec::new(),
        pi_plus_used: Vec::new(),
    };
    let fail = |summary: &mut BenchmarkSummary, trial: usize, what: &str, e: SuError| {
        summary.failures += 1;
        summary.failure_messages.push(format!("trial {trial} {what}: {e}"));
    };
    for trial in 0..cfg.trials {
        let trial_seed = derive_seed(cfg.seed, tags::TRIAL, trial as u64);
        let setup = (|| -> Result<(SuDataset, LabeledDataset, ClassPrior)> {
            let su = cfg.source.sample(cfg.pi_plus, cfg.n_s, cfg.n_u, derive_seed(trial_seed, tags::SAMPLE, 0))?;
            let test = cfg.source.test_set(cfg.test_size, cfg.pi_plus, derive_seed(trial_seed, tags::TEST_SET, 0))?;
            let pi = if cfg.estimate_prior {
                let mpe = MpeConfig {
                    seed: derive_seed(trial_seed, tags::PRIOR, 0),
                    ..cfg.mpe.clone()
                };
                estimate_prior(&su.training_view(), &mpe, PriorCase::AssumePlusLarger)?.pi_plus_hat
            } else {
                cfg.pi_plus
            };
            Ok((su, test, ClassPrior::new(pi)?))
        })();
        let (su, test, prior) = match setup {
            Ok(v) => v,
            Err(e) => {
                fail(&mut summary, trial, "setup", e);
                continue;
            }
        };
        summary.pi_plus_used.push(prior.pi_plus());
        let basis = match cfg.basis.build(&su, derive_seed(trial_seed, tags::BASIS, 0)) {
            Ok(b) => Some(b),
            Err(e) => {
                fail(&mut summary, trial, "basis", e);
                None
            }
        };
        for &loss in &cfg.losses {
            let Some(basis) = &basis else { break };
            let r = fit(&su, basis, loss, prior, &cfg.lambda, derive_seed(trial_seed, tags::CV, loss as u64))
                .and_then(|(m, _)| m.classify(test.features().view()))
                .and_then(|pred| clustering_accuracy(&pred, test.labels()));
            match r {
                Ok(acc) => rows.push(BenchmarkRow {
                    method: su_method_name(loss),
                    trial,
                    clustering_accuracy: acc,
                }),
                Err(e) => fail(&mut summary, trial, &su_method_name(loss), e),
            }
        }
        let km = kmeans2(su.u_points().view(), derive_seed(trial_seed, tags::KMEANS, 0), DEFAULT_KMEANS_MAX_ITER)
            .and_then(|m| m.predict(test.features().view()))
            .and_then(|pred| clustering_accuracy(&pred, test.labels()));
        match km {
            Ok(acc) => rows.push(BenchmarkRow {
                method: KMEANS_METHOD.into(),
                trial,
                clustering_accuracy: acc,
            }),
            Err(e) => fail(&mut summary, trial, KMEANS_METHOD, e),
        }
    }
    summary.rows = rows.len();
    Ok((rows, summary))
}

/// Mean accuracy per method in first-appearance order.
pub fn mean_by_method(rows: &[BenchmarkRow]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(m, _, _)| *m == r.method) {
            Some(e) => {
                e.1 += r.clustering_accuracy;
                e.2 += 1;
            }
            None => out.push((r.method.clone(), r.clustering_accuracy, 1)),
        }
    }
    out.into_iter().map(|(m, s, n)| (m, s / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banana_is_deterministic_and_balanced() {
        let spec = BananaSpec {
            pi_plus: 0.7,
            seed: 3,
            ..BananaSpec::default()
        };
        let a = generate_banana(&spec, 5000).unwrap();
        assert_eq!(a, generate_banana(&spec, 5000).unwrap());
        assert!((a.positive_fraction() - 0.7).abs() < 0.02);
        assert_eq!(a.dim(), 2);
    }

    #[test]
    fn split_total_halves() {
        assert_eq!(split_total(1600), (400, 800));
        assert_eq!(split_total(200), (50, 100));
    }

    #[test]
    fn synthetic_sample_has_requested_sizes() {
        let src = DataSource::Gaussian(SyntheticSpec::isotropic(3, 2.0, 0.5, 0));
        let su = src.sample(0.7, 40, 90, 5).unwrap();
        assert_eq!((su.n_s(), su.n_u(), su.dim()), (40, 90, 3));
        assert_eq!(su.to_json().unwrap(), src.sample(0.7, 40, 90, 5).unwrap().to_json().unwrap());
    }

    #[test]
    fn small_nu_sweep_is_deterministic_and_improves_on_chance() {
        let cfg = NuSweepConfig {
            n_s: 200,
            n_u_grid: vec![200, 800],
            trials: 2,
            test_size: 2000,
            source: DataSource::Gaussian(SyntheticSpec::isotropic(2, 4.0, 0.7, 0)),
            ..NuSweepConfig::default()
        };
        let (rows, summary) = run_nu_sweep(&cfg).unwrap();
        assert_eq!(summary, RunSummary { rows: 4, failures: 0 });
        assert_eq!(rows, run_nu_sweep(&cfg).unwrap().0);
        for r in &rows {
            assert!(r.error.unwrap() < 0.2, "{r:?}");
        }
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pi_plus,n_u,trial,error,error_100,lambda,status\n"));
        let back: Vec<NuSweepRow> = csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn failed_trials_are_counted_not_fatal() {
        // One pair per fold is too few for 5-fold CV at n_s = 3.
        let cfg = NuSweepConfig {
            n_s: 3,
            n_u_grid: vec![50],
            trials: 2,
            test_size: 100,
            ..NuSweepConfig::default()
        };
        let (rows, summary) = run_nu_sweep(&cfg).unwrap();
        assert_eq!(summary.failures, 2);
        assert!(rows.iter().all(|r| r.status.starts_with("failed") && r.error.is_none()));
    }

    #[test]
    fn benchmark_rows_and_schema() {
        let cfg = BenchmarkConfig {
            n_s: 200,
            n_u: 200,
            test_size: 1000,
            trials: 1,
            estimate_prior: false,
            source: DataSource::Gaussian(SyntheticSpec::isotropic(2, 4.0, 0.7, 0)),
            ..BenchmarkConfig::default()
        };
        let (rows, summary) = run_benchmark(&cfg).unwrap();
        assert_eq!(summary.failures, 0, "{:?}", summary.failure_messages);
        let methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(methods, ["su-squared", "su-double-hinge", "kmeans"]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("method,trial,clustering_accuracy\n"));
        for (_, acc) in mean_by_method(&rows) {
            assert!(acc > 0.9);
        }
    }

    #[test]
    fn prior_curve_errors_in_range() {
        let cfg = PriorCurveConfig {
            sizes: vec![200],
            trials: 2,
            ..PriorCurveConfig::default()
        };
        let (rows, summary) = run_prior_curve(&cfg).unwrap();
        assert_eq!(summary.failures, 0);
        for r in rows {
            let e = r.abs_error.unwrap();
            assert!((0.0..=0.5).contains(&e));
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = BenchmarkConfig {
            basis: BasisChoice::Rbf { max_centers: 100 },
            source: DataSource::Banana(BananaSpec::default()),
            ..BenchmarkConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: BenchmarkConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: NuSweepConfig = serde_json::from_str(r#"{"trials": 3, "lambda": {"kind": "fixed", "lambda": 0.01}}"#).unwrap();
        assert_eq!(partial.trials, 3);
        assert_eq!(partial.lambda, LambdaChoice::Fixed { lambda: 0.01 });
    }
}

//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ndarray::{s, Array2};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use sulearn::baseline::{clustering_accuracy, error_rate};
use sulearn::datasets::{read_libsvm, sample_su, write_libsvm, SamplingOptions, SyntheticSpec};
use sulearn::experiment::{
    generate_banana, run_benchmark, run_nu_sweep, run_prior_curve, write_csv, BananaSpec, BasisChoice, BenchmarkConfig, DataSource, LambdaChoice,
    NuSweepConfig, PriorCurveConfig,
};
use sulearn::modelselect::{cross_validate, CvPlan, DEFAULT_LAMBDA_GRID};
use sulearn::prior::{estimate_prior as estimate, BandwidthRule, MpeConfig, PriorCase, PriorEstimate};
use sulearn::train::{train as fit, BasisSpec, LinearModel, TrainConfig};
use sulearn::{ClassPrior, Label, LabeledDataset, LossKind, Result, SuDataset, SuError};

use crate::{
    BasisKind, BenchmarkArgs, EstimatePriorArgs, EvalArgs, ExperimentArgs, Family, GenerateArgs, PredictArgs, PriorCurveArgs, PriorMode, SampleArgs,
    SourceArgs, SweepNuArgs, TrainArgs,
};

const DEFAULT_DIM: usize = 5;
const DEFAULT_SEPARATION: f64 = 2.0;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn read_labeled(path: &Path) -> Result<LabeledDataset> {
    let file = File::open(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    read_libsvm(io::BufReader::new(file))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn prior_case(mode: PriorMode) -> PriorCase {
    match mode {
        PriorMode::AssumePlusLarger => PriorCase::AssumePlusLarger,
        PriorMode::SignKnownMinusLarger => PriorCase::SignKnownMinusLarger,
    }
}

fn parse_loss(name: &str) -> Result<LossKind> {
    name.parse()
}

/// Builds a data source from flags; `None` when no source flag was given.
fn source_from_args(a: &SourceArgs) -> Result<Option<DataSource>> {
    if let (Some(pool), Some(test)) = (&a.pool, &a.test) {
        return Ok(Some(DataSource::Fixed {
            pool: read_labeled(pool)?,
            test: read_labeled(test)?,
        }));
    }
    if a.family.is_none() && a.dim.is_none() && a.separation.is_none() && a.noise.is_none() {
        return Ok(None);
    }
    Ok(Some(match a.family.unwrap_or(Family::Gaussian) {
        Family::Gaussian => {
            let dim = a.dim.unwrap_or(DEFAULT_DIM);
            if dim == 0 {
                return Err(SuError::InvalidArgument("--dim must be at least 1".into()));
            }
            DataSource::Gaussian(SyntheticSpec::isotropic(dim, a.separation.unwrap_or(DEFAULT_SEPARATION), 0.5, 0))
        }
        Family::Banana => DataSource::Banana(BananaSpec {
            noise: a.noise.unwrap_or(BananaSpec::default().noise),
            ..BananaSpec::default()
        }),
    }))
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    if a.source.pool.is_some() {
        return Err(SuError::InvalidArgument("generate draws from a synthetic family, not --pool".into()));
    }
    let source = source_from_args(&a.source)?.unwrap_or_else(|| DataSource::Gaussian(SyntheticSpec::isotropic(DEFAULT_DIM, DEFAULT_SEPARATION, 0.5, 0)));
    let data = match &source {
        DataSource::Banana(b) => generate_banana(&BananaSpec { pi_plus: a.pi_plus, seed: a.seed, ..b.clone() }, a.n)?,
        other => other.generate(a.n, a.pi_plus, a.seed)?,
    };
    fs::write(&a.out, write_libsvm(&data))?;
    Ok(())
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let data = read_labeled(&a.input)?;
    let opts = SamplingOptions {
        replacement: !a.without_replacement,
        ..SamplingOptions::default()
    };
    let mut su = sample_su(&data, a.pi_plus, a.n_s, a.n_u, a.seed, &opts)?;
    if a.strip_labels {
        su = su.without_hidden_labels();
    }
    fs::write(&a.out, su.to_json()?)?;
    Ok(())
}

fn resolve_prior(su: &SuDataset, pi_plus: Option<f64>, mode: Option<PriorMode>, seed: u64) -> Result<(PriorEstimate, &'static str)> {
    match (pi_plus, mode) {
        (Some(p), _) => Ok((PriorEstimate::given(p), "given")),
        (None, Some(m)) => {
            let cfg = MpeConfig {
                seed,
                ..MpeConfig::default()
            };
            let mut est = estimate(&su.training_view(), &cfg, prior_case(m))?;
            est.diagnostics = None;
            Ok((est, "estimated"))
        }
        (None, None) => Err(SuError::InvalidArgument("pass --pi-plus or --estimate-prior".into())),
    }
}

pub fn train(a: TrainArgs) -> Result<()> {
    let su = SuDataset::from_json(&read_text(&a.data)?)?;
    let loss = parse_loss(&a.loss)?;
    let (est, source) = resolve_prior(&su, a.pi_plus, a.estimate_prior, a.seed)?;
    let prior = ClassPrior::new(est.pi_plus_hat)?;
    let basis = match a.basis {
        BasisKind::Linear => BasisSpec::identity(su.dim()),
        BasisKind::Rbf => BasisSpec::rbf_from_points(su.u_points().view(), a.centers, a.seed)?,
    };
    let samples = su.training_view();
    let mut cfg = TrainConfig::new(loss, 0.0, prior);
    cfg.seed = a.seed;
    let cv = match a.lambda {
        Some(l) => {
            cfg.lambda = l;
            None
        }
        None => {
            let plan = CvPlan {
                k: a.folds,
                lambda_grid: a.grid.clone().unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec()),
                losses: vec![loss],
                seed: a.seed,
            };
            let out = cross_validate(&samples, prior, &basis, &plan, &cfg)?;
            cfg.lambda = out.best_lambda;
            Some(out)
        }
    };
    let trained = fit(&samples, &basis, &cfg)?;
    fs::write(&a.model_out, trained.model.to_json()?)?;
    let report = json!({
        "prior": {
            "pi_plus": est.pi_plus_hat,
            "source": source,
            "case": est.case,
            "pi_s_hat": est.pi_s_hat,
        },
        "lambda": cfg.lambda,
        "cross_validation": cv,
        "training": trained.report,
    });
    write_out(a.report_out.as_deref(), &to_pretty(&report)?)
}

/// Pads trailing all-zero columns that a sparse file may omit.
fn features_for(model: &LinearModel, data: &LabeledDataset) -> Result<Array2<f64>> {
    let want = model.basis.input_dim();
    let have = data.dim();
    if have > want {
        return Err(SuError::DimensionMismatch { expected: want, got: have });
    }
    let mut x = Array2::zeros((data.len(), want));
    x.slice_mut(s![.., ..have]).assign(data.features());
    Ok(x)
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let model = LinearModel::from_json(&read_text(&a.model)?)?;
    let data = read_labeled(&a.input)?;
    let scores = model.predict(features_for(&model, &data)?.view())?;
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(out, "score,label")?;
    for z in scores {
        writeln!(out, "{z},{}", Label::from_score(z))?;
    }
    out.flush()?;
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let model = LinearModel::from_json(&read_text(&a.model)?)?;
    let data = read_labeled(&a.test)?;
    let pred = model.classify(features_for(&model, &data)?.view())?;
    let err = error_rate(&pred, data.labels())?;
    let metrics = json!({
        "n": data.len(),
        "accuracy": 1.0 - err,
        "zero_one_risk": err,
        "clustering_accuracy": clustering_accuracy(&pred, data.labels())?,
        "predicted_positive_fraction": pred.iter().filter(|l| **l == Label::Pos).count() as f64 / pred.len() as f64,
    });
    write_out(a.out.as_deref(), &to_pretty(&metrics)?)
}

pub fn estimate_prior(a: EstimatePriorArgs) -> Result<()> {
    let su = SuDataset::from_json(&read_text(&a.data)?)?;
    let mut cfg = MpeConfig {
        seed: a.seed,
        ..MpeConfig::default()
    };
    if let Some(b) = a.bandwidth {
        cfg.bandwidth = BandwidthRule::Fixed(b);
    }
    let mut est = estimate(&su.training_view(), &cfg, prior_case(a.case))?;
    if !a.diagnostics {
        est.diagnostics = None;
    }
    write_out(a.out.as_deref(), &to_pretty(&est)?)
}

fn load_config<T: DeserializeOwned + Default>(common: &ExperimentArgs) -> Result<T> {
    match &common.config {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

fn emit<T: Serialize, S: Serialize>(common: &ExperimentArgs, rows: &[T], summary: &S) -> Result<()> {
    match &common.out {
        Some(p) => write_csv(BufWriter::new(File::create(p)?), rows)?,
        None => write_csv(io::stdout().lock(), rows)?,
    }
    let text = serde_json::to_string(summary)?;
    match &common.summary {
        Some(p) => fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(())
}

pub fn sweep_nu(a: SweepNuArgs) -> Result<()> {
    let c = &a.common;
    let mut cfg: NuSweepConfig = load_config(c)?;
    if let Some(src) = source_from_args(&c.source)? {
        cfg.source = src;
    }
    cfg.trials = c.trials.unwrap_or(cfg.trials);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    cfg.pi_plus = c.pi_plus.unwrap_or(cfg.pi_plus);
    cfg.n_s = a.n_s.unwrap_or(cfg.n_s);
    if let Some(g) = a.n_u_grid {
        cfg.n_u_grid = g;
    }
    if let Some(l) = &a.loss {
        cfg.loss = parse_loss(l)?;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = LambdaChoice::Fixed { lambda: l };
    }
    cfg.test_size = a.test_size.unwrap_or(cfg.test_size);
    let (rows, summary) = run_nu_sweep(&cfg)?;
    emit(c, &rows, &summary)
}

pub fn prior_curve(a: PriorCurveArgs) -> Result<()> {
    let c = &a.common;
    let mut cfg: PriorCurveConfig = load_config(c)?;
    if let Some(src) = source_from_args(&c.source)? {
        cfg.source = src;
    }
    cfg.trials = c.trials.unwrap_or(cfg.trials);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    cfg.pi_plus = c.pi_plus.unwrap_or(cfg.pi_plus);
    if let Some(sz) = a.sizes {
        cfg.sizes = sz;
    }
    let (rows, summary) = run_prior_curve(&cfg)?;
    emit(c, &rows, &summary)
}

pub fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let c = &a.common;
    let mut cfg: BenchmarkConfig = load_config(c)?;
    if let Some(src) = source_from_args(&c.source)? {
        cfg.source = src;
    }
    cfg.trials = c.trials.unwrap_or(cfg.trials);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    cfg.pi_plus = c.pi_plus.unwrap_or(cfg.pi_plus);
    cfg.n_s = a.n_s.unwrap_or(cfg.n_s);
    cfg.n_u = a.n_u.unwrap_or(cfg.n_u);
    cfg.test_size = a.test_size.unwrap_or(cfg.test_size);
    match a.basis {
        Some(BasisKind::Linear) => cfg.basis = BasisChoice::Linear,
        Some(BasisKind::Rbf) => cfg.basis = BasisChoice::Rbf { max_centers: 100 },
        None => {}
    }
    if a.given_prior {
        cfg.estimate_prior = false;
    }
    let (rows, summary) = run_benchmark(&cfg)?;
    emit(c, &rows, &summary)
}

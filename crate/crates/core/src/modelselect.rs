//! k-fold cross-validation over loss and regularization strength.
//!
//! No labels are available at validation time, so each held-out fold is
//! scored with the empirical SU risk under the zero-one loss. Pairs are
//! assigned to folds whole; unlabeled points are assigned independently.
//! The class prior is fixed for all folds.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::datasets::{ClassPrior, SuSamples};
use crate::error::{Result, SuError};
use crate::losses::LossKind;
use crate::risk::su_zero_one_risk;
use crate::rng::{derive_seed, rng_from_seed, tags};
use crate::train::{train, BasisSpec, LinearModel, TrainConfig};

pub const DEFAULT_LAMBDA_GRID: [f64; 3] = [1e-1, 1e-4, 1e-7];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvPlan {
    pub k: usize,
    pub lambda_grid: Vec<f64>,
    pub losses: Vec<LossKind>,
    pub seed: u64,
}

impl Default for CvPlan {
    fn default() -> Self {
        Self {
            k: 5,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            losses: vec![LossKind::DoubleHinge],
            seed: 0,
        }
    }
}

impl CvPlan {
    /// Candidates in declaration order: losses outer, lambdas inner.
    pub fn candidates(&self) -> Vec<(LossKind, f64)> {
        self.losses
            .iter()
            .flat_map(|&loss| self.lambda_grid.iter().map(move |&lambda| (loss, lambda)))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(SuError::InvalidArgument(format!("need at least 2 folds, got {}", self.k)));
        }
        if self.lambda_grid.is_empty() || self.losses.is_empty() {
            return Err(SuError::InvalidArgument("empty hyperparameter grid".into()));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(SuError::InvalidArgument(format!("invalid lambda {l} in grid")));
        }
        Ok(())
    }
}

/// Fold index of every pair and every unlabeled point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Folds {
    pub k: usize,
    pub pair_fold: Vec<usize>,
    pub u_fold: Vec<usize>,
}

fn shuffled_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

impl Folds {
    /// Balanced random folds; a function of the sizes and seed only.
    pub fn assign(n_pairs: usize, n_u: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(SuError::InvalidArgument(format!("need at least 2 folds, got {k}")));
        }
        if n_pairs < k || n_u < k {
            return Err(SuError::InvalidData(format!(
                "{k}-fold cross-validation needs at least {k} pairs and {k} unlabeled points (have {n_pairs} and {n_u})"
            )));
        }
        Ok(Self {
            k,
            pair_fold: shuffled_assignment(n_pairs, k, derive_seed(seed, tags::CV, 0)),
            u_fold: shuffled_assignment(n_u, k, derive_seed(seed, tags::CV, 1)),
        })
    }

    /// Owned (train, validation) samples for fold `f`.
    pub fn split(&self, samples: &SuSamples<'_>, f: usize) -> (FoldData, FoldData) {
        let pick_pairs = |held: bool| -> Vec<usize> {
            (0..self.pair_fold.len())
                .filter(|&i| (self.pair_fold[i] == f) == held)
                .flat_map(|i| [2 * i, 2 * i + 1])
                .collect()
        };
        let pick_u = |held: bool| -> Vec<usize> {
            (0..self.u_fold.len()).filter(|&i| (self.u_fold[i] == f) == held).collect()
        };
        let make = |held: bool| FoldData {
            pooled_s: samples.pooled_s.select(Axis(0), &pick_pairs(held)),
            u: samples.u.select(Axis(0), &pick_u(held)),
        };
        (make(false), make(true))
    }
}

/// Owned counterpart of [`SuSamples`] for one side of a fold split.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub pooled_s: Array2<f64>,
    pub u: Array2<f64>,
}

impl FoldData {
    pub fn view(&self) -> SuSamples<'_> {
        SuSamples {
            pooled_s: self.pooled_s.view(),
            u: self.u.view(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub loss: LossKind,
    pub lambda: f64,
    /// Mean held-out proxy risk; absent if any fold failed to train.
    pub mean_proxy: Option<f64>,
    pub fold_proxies: Vec<f64>,
    pub failed_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub best_loss: LossKind,
    pub best_lambda: f64,
    pub scores: Vec<CandidateScore>,
}

/// Index of the winner: smallest mean proxy, then larger lambda, then
/// earlier declaration.
fn select_best(scores: &[CandidateScore]) -> Option<usize> {
    (0..scores.len())
        .filter_map(|i| scores[i].mean_proxy.map(|m| (i, m)))
        .min_by(|&(a, ma), &(b, mb)| {
            let (x, y) = (&scores[a], &scores[b]);
            ma.total_cmp(&mb)
                .then(y.lambda.total_cmp(&x.lambda))
                .then(a.cmp(&b))
        })
        .map(|(i, _)| i)
}

/// Cross-validation with a caller-supplied trainer. Numerical failures of
/// the trainer disqualify a candidate; other errors abort.
pub fn cross_validate_with<F>(samples: &SuSamples<'_>, prior: ClassPrior, plan: &CvPlan, mut trainer: F) -> Result<CvOutcome>
where
    F: FnMut(&SuSamples<'_>, LossKind, f64) -> Result<LinearModel>,
{
    plan.validate()?;
    let folds = Folds::assign(samples.n_s(), samples.n_u(), plan.k, plan.seed)?;
    let splits: Vec<(FoldData, FoldData)> = (0..plan.k).map(|f| folds.split(samples, f)).collect();
    let mut scores = Vec::new();
    for (loss, lambda) in plan.candidates() {
        let mut fold_proxies = Vec::with_capacity(plan.k);
        let mut failed_folds = 0;
        for (tr, va) in &splits {
            match trainer(&tr.view(), loss, lambda) {
                Ok(model) => {
                    let sv = model.scores(&va.view())?;
                    fold_proxies.push(su_zero_one_risk(&sv, prior)?);
                }
                Err(e) if e.is_numerical() => failed_folds += 1,
                Err(e) => return Err(e),
            }
        }
        let mean_proxy = (failed_folds == 0).then(|| fold_proxies.iter().sum::<f64>() / fold_proxies.len() as f64);
        scores.push(CandidateScore {
            loss,
            lambda,
            mean_proxy,
            fold_proxies,
            failed_folds,
        });
    }
    let best = select_best(&scores)
        .ok_or_else(|| SuError::NoViableCandidate(format!("all {} cross-validation candidates failed", scores.len())))?;
    Ok(CvOutcome {
        best_loss: scores[best].loss,
        best_lambda: scores[best].lambda,
        scores,
    })
}

/// Cross-validation with the standard trainer; `template` supplies solver
/// settings and the seed.
pub fn cross_validate(
    samples: &SuSamples<'_>,
    prior: ClassPrior,
    basis: &BasisSpec,
    plan: &CvPlan,
    template: &TrainConfig,
) -> Result<CvOutcome> {
    cross_validate_with(samples, prior, plan, |s, loss, lambda| {
        let cfg = TrainConfig {
            loss,
            lambda,
            prior,
            ..*template
        };
        Ok(train(s, basis, &cfg)?.model)
    })
}

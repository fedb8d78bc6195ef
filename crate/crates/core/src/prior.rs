//! Class-prior estimation from SU data.
//!
//! The unlabeled marginal decomposes as `p = pi_S p~_S + pi_D p~_D`, where
//! `p~_S` is the marginal of pooled pair members. Mixture proportion
//! estimation of `p~_S` inside `p` therefore gives an estimate of `pi_S`,
//! and `pi_S = pi_plus^2 + pi_minus^2` is inverted for the larger class
//! prior `(sqrt(2 pi_S - 1) + 1) / 2`.
//!
//! The default estimator works in a Gaussian-kernel mean embedding. For
//! `lambda >= 1` it measures
//!
//! ```text
//! d(lambda) = min_{w in simplex} | lambda mu_F + (1 - lambda) mu_H - sum_i w_i phi(c_i) |
//! ```
//!
//! with `F` the unlabeled sample, `H` the pooled pair sample and `c_i` points
//! of `F`. `d` stays near zero while `lambda F + (1 - lambda) H` is still a
//! distribution, i.e. up to `lambda* = 1 / (1 - kappa*)`, and grows linearly
//! beyond. The scan runs over `kappa = 1 - 1 / lambda` from
//! `1 - 1 / lambda_left` upwards (`lambda_left = 2` encodes `pi_S >= 1/2`) and
//! returns the last grid point before the slope of `d` first exceeds a
//! threshold.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::datasets::SuSamples;
use crate::error::{Result, SuError};
use crate::rng::{derive_seed, rng_from_seed, tags};
use crate::train::median_pairwise_distance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum BandwidthRule {
    /// Median pairwise distance over the merged sample.
    MedianHeuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpeConfig {
    pub bandwidth: BandwidthRule,
    /// Left end of the `lambda` scan; `2` restricts `kappa` to `[1/2, 1)`.
    pub lambda_left: f64,
    /// Grid spacing in `kappa`.
    pub kappa_step: f64,
    pub kappa_max: f64,
    /// Fixed gradient threshold. When unset the threshold is
    /// `noise_multiplier` times the standard error of the difference of the
    /// two empirical embeddings.
    pub gradient_threshold: Option<f64>,
    pub noise_multiplier: f64,
    /// Cap on the number of hull points `c_i`.
    pub max_candidates: usize,
    /// Cap on the points used per sample for embeddings and the bandwidth.
    pub max_kernel_points: usize,
    pub solver_max_iter: usize,
    /// The simplex QP stops once its Frank-Wolfe gap is below this fraction
    /// of the current squared distance.
    pub solver_tol: f64,
    pub seed: u64,
}

impl Default for MpeConfig {
    fn default() -> Self {
        Self {
            bandwidth: BandwidthRule::MedianHeuristic,
            lambda_left: 2.0,
            kappa_step: 0.01,
            kappa_max: 0.99,
            gradient_threshold: None,
            noise_multiplier: 1.0,
            max_candidates: 300,
            max_kernel_points: 2000,
            solver_max_iter: 2000,
            solver_tol: 1e-3,
            seed: 0,
        }
    }
}

impl MpeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda_left >= 1.0) {
            return Err(SuError::InvalidArgument(format!(
                "lambda_left must be at least 1, got {}",
                self.lambda_left
            )));
        }
        if !(self.kappa_step > 0.0) || !(self.kappa_max < 1.0) {
            return Err(SuError::InvalidArgument(
                "kappa grid needs a positive step and kappa_max < 1".into(),
            ));
        }
        if let BandwidthRule::Fixed(b) = self.bandwidth {
            if !(b > 0.0 && b.is_finite()) {
                return Err(SuError::InvalidArgument(format!("bandwidth must be positive, got {b}")));
            }
        }
        let threshold_ok = match self.gradient_threshold {
            Some(t) => t > 0.0 && t.is_finite(),
            None => self.noise_multiplier > 0.0 && self.noise_multiplier.is_finite(),
        };
        if self.max_candidates == 0 || self.max_kernel_points == 0 || !threshold_ok {
            return Err(SuError::InvalidArgument("MPE caps and gradient threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub kappa: f64,
    pub lambda: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpeDiagnostics {
    pub bandwidth: f64,
    pub gradient_threshold: f64,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpeResult {
    pub kappa: f64,
    pub diagnostics: Option<MpeDiagnostics>,
}

/// Estimates the largest `kappa` with `F = kappa H + (1 - kappa) G` for some
/// distribution `G`, from a sample of `F` and a sample of `H`.
pub trait MixtureProportionEstimator {
    fn estimate(&self, mixture: ArrayView2<f64>, component: ArrayView2<f64>) -> Result<MpeResult>;
}

/// Kernel mean embedding distance with gradient thresholding.
#[derive(Debug, Clone, Default)]
pub struct KernelEmbeddingMpe {
    pub config: MpeConfig,
}

impl KernelEmbeddingMpe {
    pub fn new(config: MpeConfig) -> Self {
        Self { config }
    }
}

fn subsample(x: ArrayView2<f64>, cap: usize, seed: u64) -> Array2<f64> {
    if x.nrows() <= cap {
        return x.to_owned();
    }
    let mut idx = sample(&mut rng_from_seed(seed), x.nrows(), cap).into_vec();
    idx.sort_unstable();
    x.select(Axis(0), &idx)
}

fn sq_norms(x: &Array2<f64>) -> Array1<f64> {
    x.rows().into_iter().map(|r| r.dot(&r)).collect()
}

/// `k(a_i, b_j) = exp(-|a_i - b_j|^2 / (2 bandwidth^2))`.
fn gaussian_kernel(a: &Array2<f64>, b: &Array2<f64>, bandwidth: f64) -> Array2<f64> {
    let na = sq_norms(a);
    let nb = sq_norms(b);
    let mut k = a.dot(&b.t());
    let scale = -0.5 / (bandwidth * bandwidth);
    for ((i, j), v) in k.indexed_iter_mut() {
        let d2 = (na[i] + nb[j] - 2.0 * *v).max(0.0);
        *v = (scale * d2).exp();
    }
    k
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut Array1<f64>) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.mapv_inplace(|x| (x - theta).max(0.0));
}

fn largest_eigenvalue(k: &Array2<f64>) -> f64 {
    let n = k.nrows();
    let mut v = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..100 {
        let kv = k.dot(&v);
        let norm = kv.dot(&kv).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = kv / norm;
        let diff = (norm - est).abs();
        est = norm;
        v = next;
        if diff <= 1e-6 * est {
            break;
        }
    }
    est
}

/// `min_{w in simplex} w'Kw - 2 b'w` by FISTA with adaptive restart. `offset`
/// is added to the objective to obtain the squared distance for the relative
/// stopping rule.
struct SimplexQp<'a> {
    k: &'a Array2<f64>,
    lipschitz: f64,
    max_iter: usize,
    tol: f64,
}

impl SimplexQp<'_> {
    fn solve(&self, b: &Array1<f64>, offset: f64, w0: Array1<f64>) -> (Array1<f64>, f64) {
        let value = |w: &Array1<f64>, kw: &Array1<f64>| w.dot(kw) - 2.0 * b.dot(w);
        let mut w = w0;
        let mut y = w.clone();
        let mut t = 1.0f64;
        for it in 0..self.max_iter {
            let ky = self.k.dot(&y);
            let grad = (&ky - b) * 2.0;
            let mut next = &y - &(&grad / self.lipschitz);
            project_simplex(&mut next);
            let step = &next - &w;
            if (&y - &next).dot(&step) > 0.0 {
                t = 1.0;
                y = next.clone();
            } else {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                y = &next + &(&step * ((t - 1.0) / t_next));
                t = t_next;
            }
            w = next;
            if it % 10 == 9 {
                let kw = self.k.dot(&w);
                let gw = (&kw - b) * 2.0;
                let min_g = gw.iter().copied().fold(f64::INFINITY, f64::min);
                let d2 = (offset + value(&w, &kw)).max(0.0);
                if gw.dot(&w) - min_g <= self.tol * d2 + 1e-12 {
                    break;
                }
            }
        }
        let kw = self.k.dot(&w);
        let v = value(&w, &kw);
        (w, v)
    }
}

impl MixtureProportionEstimator for KernelEmbeddingMpe {
    fn estimate(&self, mixture: ArrayView2<f64>, component: ArrayView2<f64>) -> Result<MpeResult> {
        let cfg = &self.config;
        cfg.validate()?;
        if mixture.nrows() == 0 || component.nrows() == 0 {
            return Err(SuError::EmptyInput);
        }
        if mixture.ncols() != component.ncols() {
            return Err(SuError::DimensionMismatch {
                expected: mixture.ncols(),
                got: component.ncols(),
            });
        }
        let f = subsample(mixture, cfg.max_kernel_points, derive_seed(cfg.seed, tags::PRIOR, 0));
        let h = subsample(component, cfg.max_kernel_points, derive_seed(cfg.seed, tags::PRIOR, 1));
        let c = subsample(f.view(), cfg.max_candidates, derive_seed(cfg.seed, tags::PRIOR, 2));

        let bandwidth = match cfg.bandwidth {
            BandwidthRule::Fixed(b) => b,
            BandwidthRule::MedianHeuristic => {
                let merged = ndarray::concatenate(Axis(0), &[f.view(), h.view()])
                    .map_err(|e| SuError::InvalidData(e.to_string()))?;
                let sub = subsample(merged.view(), cfg.max_kernel_points, derive_seed(cfg.seed, tags::PRIOR, 3));
                median_pairwise_distance(sub.view()).map_err(|_| {
                    SuError::InvalidData("kernel matrix is degenerate: all points are identical".into())
                })?
            }
        };

        let k_cc = gaussian_kernel(&c, &c, bandwidth);
        let a_f = gaussian_kernel(&f, &c, bandwidth).mean_axis(Axis(0)).expect("non-empty");
        let a_h = gaussian_kernel(&h, &c, bandwidth).mean_axis(Axis(0)).expect("non-empty");
        let mean_block = |x: &Array2<f64>, y: &Array2<f64>| gaussian_kernel(x, y, bandwidth).mean().expect("non-empty");
        let kff = mean_block(&f, &f);
        let kfh = mean_block(&f, &h);
        let khh = mean_block(&h, &h);

        let qp = SimplexQp {
            k: &k_cc,
            lipschitz: 2.0 * largest_eigenvalue(&k_cc) * 1.01 + 1e-12,
            max_iter: cfg.solver_max_iter,
            tol: cfg.solver_tol,
        };
        let m = c.nrows();
        let mut w = Array1::from_elem(m, 1.0 / m as f64);
        let distance = |lambda: f64, w: &mut Array1<f64>| -> f64 {
            let b = &a_f * lambda + &a_h * (1.0 - lambda);
            let t2 = lambda * lambda * kff + 2.0 * lambda * (1.0 - lambda) * kfh + (1.0 - lambda) * (1.0 - lambda) * khh;
            let (wn, v) = qp.solve(&b, t2, w.clone());
            *w = wn;
            (t2 + v).max(0.0).sqrt()
        };

        // `d` is convex with slope at most |mu_F - mu_H|, so without a
        // separable component its slope stays at the noise level.
        let threshold = cfg.gradient_threshold.unwrap_or_else(|| {
            let var_f = (1.0 - kff).max(0.0) / f.nrows() as f64;
            let var_h = (1.0 - khh).max(0.0) / h.nrows() as f64;
            cfg.noise_multiplier * (var_f + var_h).sqrt()
        });

        let kappa_left = 1.0 - 1.0 / cfg.lambda_left;
        let steps = ((cfg.kappa_max - kappa_left) / cfg.kappa_step + 1e-9).floor().max(0.0) as usize;
        let kappa_at = |i: usize| kappa_left + i as f64 * cfg.kappa_step;
        let mut evaluated: BTreeMap<usize, TracePoint> = BTreeMap::new();
        let mut point = |i: usize, w: &mut Array1<f64>| -> TracePoint {
            *evaluated.entry(i).or_insert_with(|| {
                let kappa = kappa_at(i);
                let lambda = 1.0 / (1.0 - kappa);
                TracePoint {
                    kappa,
                    lambda,
                    distance: distance(lambda, w),
                }
            })
        };
        // Secant slopes of a convex function increase along the grid, so
        // the first steep step can be found by bisection.
        point(0, &mut w);
        let (mut lo, mut hi) = (0usize, steps);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let a = point(mid, &mut w);
            let b = point(mid + 1, &mut w);
            if (b.distance - a.distance) / (b.lambda - a.lambda) > threshold {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let kappa_hat = kappa_at(lo);
        let trace: Vec<TracePoint> = evaluated.into_values().collect();
        Ok(MpeResult {
            kappa: kappa_hat,
            diagnostics: Some(MpeDiagnostics {
                bandwidth,
                gradient_threshold: threshold,
                trace,
            }),
        })
    }
}

/// How the sign of the estimated prior is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorCase {
    /// The prior was supplied; no estimation took place.
    ExactGiven,
    /// Call the larger class positive.
    AssumePlusLarger,
    /// The negative class is known to be the larger one.
    SignKnownMinusLarger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEstimate {
    pub pi_s_hat: f64,
    pub pi_plus_hat: f64,
    pub case: PriorCase,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<MpeDiagnostics>,
}

impl PriorEstimate {
    pub fn given(pi_plus: f64) -> Self {
        Self {
            pi_s_hat: crate::datasets::pi_s_of(pi_plus),
            pi_plus_hat: pi_plus,
            case: PriorCase::ExactGiven,
            diagnostics: None,
        }
    }
}

/// Inverts `pi_S = p^2 + (1 - p)^2` for the larger-class prior
/// `p = (sqrt(2 pi_S - 1) + 1) / 2` after clamping `pi_S` to `[1/2, 1]`.
/// Returns `p` unless the case says the negative class is larger, in which
/// case `1 - p`. `ExactGiven` inverts like `AssumePlusLarger`.
pub fn pi_plus_from_pi_s(pi_s_hat: f64, case: PriorCase) -> PriorEstimate {
    let pi_s = if pi_s_hat.is_nan() { 0.5 } else { pi_s_hat.clamp(0.5, 1.0) };
    let larger = (0.5 * ((2.0 * pi_s - 1.0).max(0.0).sqrt() + 1.0)).min(1.0);
    let pi_plus_hat = match case {
        PriorCase::SignKnownMinusLarger => 1.0 - larger,
        PriorCase::ExactGiven | PriorCase::AssumePlusLarger => larger,
    };
    PriorEstimate {
        pi_s_hat: pi_s,
        pi_plus_hat,
        case,
        diagnostics: None,
    }
}

/// Mixture proportion of the pooled pair sample inside the unlabeled
/// sample, clamped to `[1/2, 1]`.
pub fn estimate_pi_s(u: ArrayView2<f64>, pooled_s: ArrayView2<f64>, cfg: &MpeConfig) -> Result<(f64, Option<MpeDiagnostics>)> {
    estimate_pi_s_with(&KernelEmbeddingMpe::new(cfg.clone()), u, pooled_s)
}

pub fn estimate_pi_s_with<E: MixtureProportionEstimator + ?Sized>(
    estimator: &E,
    u: ArrayView2<f64>,
    pooled_s: ArrayView2<f64>,
) -> Result<(f64, Option<MpeDiagnostics>)> {
    let r = estimator.estimate(u, pooled_s)?;
    Ok((r.kappa.clamp(0.5, 1.0), r.diagnostics))
}

/// Estimates `pi_S` from the data, then the prior for the given case.
pub fn estimate_prior(samples: &SuSamples<'_>, cfg: &MpeConfig, case: PriorCase) -> Result<PriorEstimate> {
    if samples.n_s() == 0 || samples.n_u() == 0 {
        return Err(SuError::EmptyInput);
    }
    let (pi_s, diagnostics) = estimate_pi_s(samples.u, samples.pooled_s, cfg)?;
    Ok(PriorEstimate {
        diagnostics,
        ..pi_plus_from_pi_s(pi_s, case)
    })
}

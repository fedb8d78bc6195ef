//! Linear-in-parameter models and the SU trainers.
//!
//! A model is `f(x) = w' phi(x)` where the basis `phi` always ends with a
//! constant 1, so the bias is an ordinary weight. The regularized objective
//!
//! ```text
//! J(w) = pi_S / (2 n_S) sum l_s(w' phi(x~_i)) + 1 / n_U sum l_u(w' phi(x_i)) + lambda / 2 |w|^2
//! ```
//!
//! is convex for the squared, logistic and double hinge losses. Each gets
//! its own solver: a linear system, a QP and gradient descent.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::datasets::{ClassPrior, Label, SuSamples};
use crate::error::{Result, SuError};
use crate::losses::{CorrectedLosses, LossKind};
use crate::numkit::{solve_qp, Cholesky, QpProblem, QpSettings, QpStatus};
use crate::risk::{empirical_su_risk, ScoreVector};
use crate::rng::rng_from_seed;

/// Feature map. Both variants append a constant-1 column for the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSpec {
    /// `[x, 1]`
    IdentityWithIntercept { dim: usize },
    /// `[exp(-|x - c_1|^2 / (2 bandwidth^2)), ..., 1]`
    GaussianRbf {
        centers: Vec<Vec<f64>>,
        bandwidth: f64,
    },
}

impl BasisSpec {
    pub fn identity(dim: usize) -> Self {
        BasisSpec::IdentityWithIntercept { dim }
    }

    pub fn rbf(centers: Array2<f64>, bandwidth: f64) -> Result<Self> {
        if centers.nrows() == 0 {
            return Err(SuError::InvalidArgument("RBF basis needs at least one center".into()));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(SuError::InvalidArgument(format!(
                "RBF bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(BasisSpec::GaussianRbf {
            centers: centers.rows().into_iter().map(|r| r.to_vec()).collect(),
            bandwidth,
        })
    }

    /// Centers: up to `max_centers` points drawn without replacement by
    /// `seed`. Bandwidth: median pairwise distance (over at most 1000 points).
    pub fn rbf_from_points(points: ArrayView2<f64>, max_centers: usize, seed: u64) -> Result<Self> {
        let n = points.nrows();
        if n == 0 || max_centers == 0 {
            return Err(SuError::EmptyInput);
        }
        let mut rng = rng_from_seed(seed);
        let mut idx = sample(&mut rng, n, max_centers.min(n)).into_vec();
        idx.sort_unstable();
        let centers = points.select(Axis(0), &idx);
        let mut sub = sample(&mut rng, n, n.min(1000)).into_vec();
        sub.sort_unstable();
        let bandwidth = median_pairwise_distance(points.select(Axis(0), &sub).view())?;
        Self::rbf(centers, bandwidth)
    }

    pub fn input_dim(&self) -> usize {
        match self {
            BasisSpec::IdentityWithIntercept { dim } => *dim,
            BasisSpec::GaussianRbf { centers, .. } => centers.first().map_or(0, Vec::len),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            BasisSpec::IdentityWithIntercept { dim } => dim + 1,
            BasisSpec::GaussianRbf { centers, .. } => centers.len() + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BasisSpec::IdentityWithIntercept { dim } if *dim == 0 => {
                Err(SuError::InvalidArgument("basis dimension must be at least 1".into()))
            }
            BasisSpec::IdentityWithIntercept { .. } => Ok(()),
            BasisSpec::GaussianRbf { centers, bandwidth } => {
                let d = self.input_dim();
                if centers.is_empty() || d == 0 || centers.iter().any(|c| c.len() != d) {
                    return Err(SuError::InvalidArgument("RBF centers must be non-empty and of equal length".into()));
                }
                if !(*bandwidth > 0.0 && bandwidth.is_finite()) {
                    return Err(SuError::InvalidArgument(format!(
                        "RBF bandwidth must be positive, got {bandwidth}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn featurize(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.validate()?;
        let d = self.input_dim();
        if x.ncols() != d {
            return Err(SuError::DimensionMismatch {
                expected: d,
                got: x.ncols(),
            });
        }
        let n = x.nrows();
        let b = self.output_dim();
        let mut out = Array2::<f64>::ones((n, b));
        match self {
            BasisSpec::IdentityWithIntercept { .. } => {
                out.slice_mut(s![.., ..d]).assign(&x);
            }
            BasisSpec::GaussianRbf { centers, bandwidth } => {
                let scale = -0.5 / (bandwidth * bandwidth);
                for (i, row) in x.rows().into_iter().enumerate() {
                    for (k, c) in centers.iter().enumerate() {
                        let d2: f64 = row.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                        out[[i, k]] = (scale * d2).exp();
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Median of the pairwise Euclidean distances between distinct rows.
pub fn median_pairwise_distance(x: ArrayView2<f64>) -> Result<f64> {
    let n = x.nrows();
    let mut dists = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            dists.push(d2.sqrt());
        }
    }
    if dists.is_empty() {
        return Err(SuError::InvalidData("need at least two points for a bandwidth".into()));
    }
    let mid = dists.len() / 2;
    let (_, m, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let m = *m;
    if m <= 0.0 {
        return Err(SuError::InvalidData(
            "median pairwise distance is zero (points identical)".into(),
        ));
    }
    Ok(m)
}

/// `f(x) = w' phi(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub basis: BasisSpec,
    pub weights: Vec<f64>,
}

impl LinearModel {
    pub fn new(basis: BasisSpec, weights: Array1<f64>) -> Result<Self> {
        basis.validate()?;
        if weights.len() != basis.output_dim() {
            return Err(SuError::DimensionMismatch {
                expected: basis.output_dim(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(SuError::InvalidData("model weights must be finite".into()));
        }
        Ok(Self {
            basis,
            weights: weights.to_vec(),
        })
    }

    pub fn zeros(basis: BasisSpec) -> Result<Self> {
        let b = basis.output_dim();
        Self::new(basis, Array1::zeros(b))
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.weights[..])
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(self.basis.featurize(x)?.dot(&self.weights()))
    }

    /// `sign(f(x))` with ties going to `+1`.
    pub fn classify(&self, x: ArrayView2<f64>) -> Result<Vec<Label>> {
        Ok(self.predict(x)?.iter().map(|&z| Label::from_score(z)).collect())
    }

    pub fn scores(&self, samples: &SuSamples<'_>) -> Result<ScoreVector> {
        ScoreVector::new(self.predict(samples.pooled_s)?, self.predict(samples.u)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: LinearModel = serde_json::from_str(text)?;
        Self::new(m.basis, Array1::from(m.weights))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdSettings {
    pub max_epochs: usize,
    /// Stop once the gradient infinity norm is at most this.
    pub tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
}

impl Default for GdSettings {
    fn default() -> Self {
        Self {
            max_epochs: 10_000,
            tol: 1e-6,
            armijo_c: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub lambda: f64,
    pub prior: ClassPrior,
    pub gd: GdSettings,
    pub qp: QpSettings,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(loss: LossKind, lambda: f64, prior: ClassPrior) -> Self {
        Self {
            loss,
            lambda,
            prior,
            gd: GdSettings::default(),
            qp: QpSettings::default(),
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(SuError::InvalidArgument(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Featurized training data.
#[derive(Debug, Clone)]
pub struct Design {
    /// `2 n_S x b`, interleaved pair members.
    pub phi_s: Array2<f64>,
    /// `n_U x b`.
    pub phi_u: Array2<f64>,
}

impl Design {
    pub fn new(basis: &BasisSpec, samples: &SuSamples<'_>) -> Result<Self> {
        samples.check_trainable()?;
        Ok(Self {
            phi_s: basis.featurize(samples.pooled_s)?,
            phi_u: basis.featurize(samples.u)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi_u.ncols()
    }

    pub fn n_s(&self) -> usize {
        self.phi_s.nrows() / 2
    }

    pub fn n_u(&self) -> usize {
        self.phi_u.nrows()
    }
}

/// The regularized SU objective over a fixed design.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub design: &'a Design,
    pub losses: CorrectedLosses,
    pub lambda: f64,
}

impl<'a> Objective<'a> {
    pub fn new(design: &'a Design, loss: LossKind, prior: ClassPrior, lambda: f64) -> Self {
        Self {
            design,
            losses: CorrectedLosses::new(loss, prior),
            lambda,
        }
    }

    pub fn value(&self, w: ArrayView1<f64>) -> f64 {
        let scores = ScoreVector {
            s_scores: self.design.phi_s.dot(&w),
            u_scores: self.design.phi_u.dot(&w),
        };
        let risk = empirical_su_risk(&scores, self.losses.kind, self.losses.prior)
            .unwrap_or(f64::NAN);
        risk + 0.5 * self.lambda * w.dot(&w)
    }

    /// `lambda w + pi_S / (2 n_S) Phi_S' l_s'(z_S) + 1 / n_U Phi_U' l_u'(z_U)`;
    /// at kinks the midpoint subgradient.
    pub fn gradient(&self, w: ArrayView1<f64>) -> Array1<f64> {
        let d = self.design;
        let c = &self.losses;
        let zs = d.phi_s.dot(&w);
        let zu = d.phi_u.dot(&w);
        let gs = zs.mapv(|z| c.dl_s(z)) * (c.prior.pi_s() / d.phi_s.nrows() as f64);
        let gu = zu.mapv(|z| c.dl_u(z)) / d.phi_u.nrows() as f64;
        &w * self.lambda + d.phi_s.t().dot(&gs) + d.phi_u.t().dot(&gu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss: LossKind,
    pub lambda: f64,
    pub pi_plus: f64,
    pub objective: f64,
    /// Infinity norm of the objective gradient at the solution (smooth
    /// losses).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_norm: Option<f64>,
    /// KKT residual of the QP (double hinge).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt_residual: Option<f64>,
    /// Largest gap between a QP slack and the loss value it bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack_gap: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: LinearModel,
    pub report: TrainReport,
}

fn inf_norm(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Dispatches on the configured loss.
pub fn train(samples: &SuSamples<'_>, basis: &BasisSpec, cfg: &TrainConfig) -> Result<Trained> {
    match cfg.loss {
        LossKind::Squared => train_squared_closed_form(samples, basis, cfg),
        LossKind::DoubleHinge => train_double_hinge(samples, basis, cfg),
        LossKind::Logistic => train_gradient(samples, basis, cfg),
        other => Err(SuError::InvalidArgument(format!(
            "no trainer for the {other} loss (use squared, logistic or double-hinge)"
        ))),
    }
}

/// Objective value of `model` on `samples`.
pub fn objective(model: &LinearModel, samples: &SuSamples<'_>, cfg: &TrainConfig) -> Result<f64> {
    let design = Design::new(&model.basis, samples)?;
    Ok(Objective::new(&design, cfg.loss, cfg.prior, cfg.lambda).value(model.weights()))
}

/// Solves the squared-loss objective exactly:
///
/// ```text
/// w = n_U / (2 pi_plus - 1) (Phi_U' Phi_U + 2 lambda n_U I)^-1
///     (pi_S / n_S Phi_S' 1 - 1 / n_U Phi_U' 1)
/// ```
pub fn train_squared_closed_form(
    samples: &SuSamples<'_>,
    basis: &BasisSpec,
    cfg: &TrainConfig,
) -> Result<Trained> {
    if cfg.loss != LossKind::Squared {
        return Err(SuError::InvalidArgument("closed form requires the squared loss".into()));
    }
    cfg.validate()?;
    let design = Design::new(basis, samples)?;
    let w = squared_closed_form_weights(&design, cfg.prior, cfg.lambda)?;
    let obj = Objective::new(&design, cfg.loss, cfg.prior, cfg.lambda);
    let report = TrainReport {
        loss: cfg.loss,
        lambda: cfg.lambda,
        pi_plus: cfg.prior.pi_plus(),
        objective: obj.value(w.view()),
        gradient_norm: Some(inf_norm(&obj.gradient(w.view()))),
        kkt_residual: None,
        slack_gap: None,
        iterations: 1,
        converged: true,
        objective_trace: Vec::new(),
    };
    Ok(Trained {
        model: LinearModel::new(basis.clone(), w)?,
        report,
    })
}

pub fn squared_closed_form_weights(design: &Design, prior: ClassPrior, lambda: f64) -> Result<Array1<f64>> {
    let n_u = design.n_u() as f64;
    let n_s = design.n_s() as f64;
    let mut a = design.phi_u.t().dot(&design.phi_u);
    for i in 0..a.nrows() {
        a[[i, i]] += 2.0 * lambda * n_u;
    }
    let rhs = design.phi_s.sum_axis(Axis(0)) * (prior.pi_s() / n_s)
        - design.phi_u.sum_axis(Axis(0)) / n_u;
    let chol = Cholesky::factor(a.view()).map_err(|_| {
        SuError::Singular(format!(
            "Phi_U' Phi_U + 2 lambda n_U I is not invertible at lambda = {lambda}; use lambda > 0"
        ))
    })?;
    let w = chol.solve(rhs.view()) * (n_u / prior.skew());
    if w.iter().any(|v| !v.is_finite()) {
        return Err(SuError::Singular("closed-form solution is not finite; use lambda > 0".into()));
    }
    Ok(w)
}

/// QP for the double hinge loss over `gamma = (w, xi, eta)`:
///
/// ```text
/// P = diag(lambda I_b, 0, 0)
/// q = (-pi_S / (2 n_S (2 pi_plus - 1)) Phi_S' 1 + 1 / (2 n_U (2 pi_plus - 1)) Phi_U' 1,
///      1 / (2 n_U) 1, 1 / (2 n_U) 1)
/// xi  >= 0,  xi  >= 1/2 + Phi_U w / 2,  xi  >= Phi_U w
/// eta >= 0,  eta >= 1/2 - Phi_U w / 2,  eta >= -Phi_U w
/// ```
///
/// At the optimum `xi_i = l(z_i, -1)` and `eta_i = l(z_i, +1)`. The linear
/// term uses `l_u(z) = (l(z, +1) + l(z, -1)) / 2 + z / (2 (2 pi_plus - 1))`,
/// which holds whenever `l(z, +1) - l(z, -1) = -z`; it keeps both slack
/// costs positive for every prior.
pub fn double_hinge_problem(design: &Design, prior: ClassPrior, lambda: f64) -> Result<QpProblem> {
    let b = design.dim();
    let n_u = design.n_u();
    let n_s = design.n_s();
    let n = b + 2 * n_u;
    let m = 6 * n_u;
    let skew = prior.skew();
    let mut p = Array2::<f64>::zeros((n, n));
    for i in 0..b {
        p[[i, i]] = lambda;
    }
    let mut q = Array1::<f64>::zeros(n);
    let qw = design.phi_s.sum_axis(Axis(0)) * (-prior.pi_s() / (2.0 * n_s as f64 * skew))
        + design.phi_u.sum_axis(Axis(0)) / (2.0 * n_u as f64 * skew);
    q.slice_mut(s![..b]).assign(&qw);
    q.slice_mut(s![b..]).fill(1.0 / (2.0 * n_u as f64));

    let mut g = Array2::<f64>::zeros((m, n));
    let mut h = Array1::<f64>::zeros(m);
    let phi = &design.phi_u;
    for i in 0..n_u {
        let xi = b + i;
        let eta = b + n_u + i;
        let row = phi.row(i);
        // xi >= 0
        g[[i, xi]] = -1.0;
        // xi >= 1/2 + z/2
        let r = n_u + i;
        g.slice_mut(s![r, ..b]).assign(&(&row * 0.5));
        g[[r, xi]] = -1.0;
        h[r] = -0.5;
        // xi >= z
        let r = 2 * n_u + i;
        g.slice_mut(s![r, ..b]).assign(&row);
        g[[r, xi]] = -1.0;
        // eta >= 0
        let r = 3 * n_u + i;
        g[[r, eta]] = -1.0;
        // eta >= 1/2 - z/2
        let r = 4 * n_u + i;
        g.slice_mut(s![r, ..b]).assign(&(&row * -0.5));
        g[[r, eta]] = -1.0;
        h[r] = -0.5;
        // eta >= -z
        let r = 5 * n_u + i;
        g.slice_mut(s![r, ..b]).assign(&(&row * -1.0));
        g[[r, eta]] = -1.0;
    }
    QpProblem::new(p, q, g, h)
}

pub fn train_double_hinge(samples: &SuSamples<'_>, basis: &BasisSpec, cfg: &TrainConfig) -> Result<Trained> {
    if cfg.loss != LossKind::DoubleHinge {
        return Err(SuError::InvalidArgument("QP trainer requires the double-hinge loss".into()));
    }
    cfg.validate()?;
    if cfg.lambda <= 0.0 {
        return Err(SuError::InvalidArgument("double-hinge training needs lambda > 0".into()));
    }
    let design = Design::new(basis, samples)?;
    let problem = double_hinge_problem(&design, cfg.prior, cfg.lambda)?;
    let sol = solve_qp(&problem, &cfg.qp);
    if sol.status != QpStatus::Optimal {
        return Err(SuError::Solver {
            status: sol.status,
            kkt_residual: sol.kkt_residual,
        });
    }
    let b = design.dim();
    let n_u = design.n_u();
    let w = sol.gamma.slice(s![..b]).to_owned();
    let z = design.phi_u.dot(&w);
    let mut slack_gap = 0.0f64;
    for i in 0..n_u {
        let xi = sol.gamma[b + i];
        let eta = sol.gamma[b + n_u + i];
        slack_gap = slack_gap
            .max((xi - LossKind::DoubleHinge.eval(z[i], Label::Neg)).abs())
            .max((eta - LossKind::DoubleHinge.eval(z[i], Label::Pos)).abs());
    }
    let obj = Objective::new(&design, cfg.loss, cfg.prior, cfg.lambda);
    let report = TrainReport {
        loss: cfg.loss,
        lambda: cfg.lambda,
        pi_plus: cfg.prior.pi_plus(),
        objective: obj.value(w.view()),
        gradient_norm: None,
        kkt_residual: Some(sol.kkt_residual),
        slack_gap: Some(slack_gap),
        iterations: sol.iterations,
        converged: true,
        objective_trace: Vec::new(),
    };
    Ok(Trained {
        model: LinearModel::new(basis.clone(), w)?,
        report,
    })
}

/// Full-batch gradient descent from `w = 0`. Each step starts from a
/// Barzilai-Borwein step length and halves it until the Armijo condition
/// holds, so the objective never increases. Works for any loss with a
/// derivative; the logistic loss is the intended use.
pub fn train_gradient(samples: &SuSamples<'_>, basis: &BasisSpec, cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    if matches!(cfg.loss, LossKind::ZeroOne) {
        return Err(SuError::InvalidArgument("the zero-one loss cannot be trained".into()));
    }
    let design = Design::new(basis, samples)?;
    let obj = Objective::new(&design, cfg.loss, cfg.prior, cfg.lambda);
    let (w, report) = gradient_descent(&obj, Array1::zeros(design.dim()), &cfg.gd)?;
    let report = TrainReport {
        loss: cfg.loss,
        lambda: cfg.lambda,
        pi_plus: cfg.prior.pi_plus(),
        ..report
    };
    Ok(Trained {
        model: LinearModel::new(basis.clone(), w)?,
        report,
    })
}

pub fn gradient_descent(
    obj: &Objective<'_>,
    w0: Array1<f64>,
    settings: &GdSettings,
) -> Result<(Array1<f64>, TrainReport)> {
    let mut w = w0;
    let mut f = obj.value(w.view());
    if !f.is_finite() {
        return Err(SuError::Diverged("objective is not finite at the starting point".into()));
    }
    let mut g = obj.gradient(w.view());
    let mut trace = vec![f];
    let mut step = 1.0;
    let mut converged = false;
    let mut epochs = 0;
    let mut prev: Option<(Array1<f64>, Array1<f64>)> = None;
    while epochs < settings.max_epochs {
        if inf_norm(&g) <= settings.tol {
            converged = true;
            break;
        }
        if let Some((pw, pg)) = &prev {
            let sv = &w - pw;
            let yv = &g - pg;
            let sy = sv.dot(&yv);
            if sy > 0.0 {
                step = sv.dot(&sv) / sy;
            } else {
                step *= 2.0;
            }
        }
        let gg = g.dot(&g);
        let mut t = step;
        let (w_new, f_new) = loop {
            let cand = &w - &(&g * t);
            let fc = obj.value(cand.view());
            if fc.is_finite() && fc <= f - settings.armijo_c * t * gg {
                break (cand, fc);
            }
            t *= 0.5;
            if t < 1e-30 {
                if fc.is_finite() {
                    // No representable decrease left along -g.
                    return Ok((w.clone(), gd_report(obj, &w, f, epochs, false, trace)));
                }
                return Err(SuError::Diverged(format!(
                    "objective became non-finite at epoch {epochs}"
                )));
            }
        };
        step = t;
        prev = Some((w, g));
        w = w_new;
        f = f_new;
        g = obj.gradient(w.view());
        trace.push(f);
        epochs += 1;
    }
    if !converged && inf_norm(&g) <= settings.tol {
        converged = true;
    }
    let report = gd_report(obj, &w, f, epochs, converged, trace);
    Ok((w, report))
}

fn gd_report(obj: &Objective<'_>, w: &Array1<f64>, f: f64, epochs: usize, converged: bool, trace: Vec<f64>) -> TrainReport {
    TrainReport {
        loss: obj.losses.kind,
        lambda: obj.lambda,
        pi_plus: obj.losses.prior.pi_plus(),
        objective: f,
        gradient_norm: Some(inf_norm(&obj.gradient(w.view()))),
        kkt_residual: None,
        slack_gap: None,
        iterations: epochs,
        converged,
        objective_trace: trace,
    }
}

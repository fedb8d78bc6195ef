//! Dense linear algebra and an inequality-constrained convex QP solver.
//!
//! The QP solver is a Mehrotra predictor-corrector interior-point method for
//!
//! ```text
//!     minimize    1/2 x' P x + q' x
//!     subject to  G x <= h
//! ```
//!
//! with `P` positive semidefinite. Matrices are stored densely, but the
//! Newton system is assembled from the sparsity pattern of `G`: variables
//! with no off-diagonal entry in `P` that never share a constraint row with
//! each other are eliminated through a diagonal Schur complement. Slack
//! variables of hinge-type reformulations fall into that class, so their
//! cost stays linear in their count.
//!
//! The Newton matrix carries a static diagonal regularization of `1e-10`,
//! which lets `P` be singular (zero blocks for slack variables).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SuError};

/// Static diagonal regularization applied to every Newton matrix.
pub const NEWTON_REGULARIZATION: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 2;
// Iterations without a new best residual before giving up. Paths toward a
// large-norm optimum can wander for dozens of steps before converging.
const STALL_LIMIT: usize = 200;

/// Lower-triangular Cholesky factor `A = L L'`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    /// Factors the symmetric matrix `a`, reading only its lower triangle.
    pub fn factor(a: ArrayView2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SuError::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut diag = a[[j, j]];
            for k in 0..j {
                diag -= l[[j, k]] * l[[j, k]];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(SuError::NotPositiveDefinite {
                    index: j,
                    pivot: diag,
                });
            }
            let ljj = diag.sqrt();
            l[[j, j]] = ljj;
            for i in (j + 1)..n {
                let mut v = a[[i, j]];
                let (ri, rj) = (l.row(i), l.row(j));
                for k in 0..j {
                    v -= ri[k] * rj[k];
                }
                l[[i, j]] = v / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.l
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let l = &self.l;
        for i in 0..n {
            let row = l.row(i);
            let mut v = b[i];
            for k in 0..i {
                v -= row[k] * b[k];
            }
            b[i] = v / row[i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            for k in (i + 1)..n {
                v -= l[[k, i]] * b[k];
            }
            b[i] = v / l[[i, i]];
        }
    }

    pub fn solve(&self, b: ArrayView1<f64>) -> Array1<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Array1::from(x)
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` by Cholesky.
pub fn solve_spd(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    if b.len() != a.nrows() {
        return Err(SuError::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    Ok(Cholesky::factor(a)?.solve(b))
}

/// `min 1/2 x'Px + q'x  s.t.  Gx <= h`.
#[derive(Debug, Clone)]
pub struct QpProblem {
    p: Array2<f64>,
    q: Array1<f64>,
    g: Array2<f64>,
    h: Array1<f64>,
}

impl QpProblem {
    /// Validates shapes, symmetry of `P` (to `1e-10`) and that its smallest
    /// eigenvalue is at least `-1e-8`.
    pub fn new(p: Array2<f64>, q: Array1<f64>, g: Array2<f64>, h: Array1<f64>) -> Result<Self> {
        let n = q.len();
        if p.nrows() != n || p.ncols() != n {
            return Err(SuError::DimensionMismatch {
                expected: n,
                got: p.nrows(),
            });
        }
        if g.ncols() != n {
            return Err(SuError::DimensionMismatch {
                expected: n,
                got: g.ncols(),
            });
        }
        if g.nrows() != h.len() {
            return Err(SuError::DimensionMismatch {
                expected: g.nrows(),
                got: h.len(),
            });
        }
        if p.iter().chain(q.iter()).chain(g.iter()).chain(h.iter()).any(|v| !v.is_finite()) {
            return Err(SuError::InvalidData("QP data must be finite".into()));
        }
        let mut diagonal = true;
        for i in 0..n {
            for j in (i + 1)..n {
                if (p[[i, j]] - p[[j, i]]).abs() > 1e-10 {
                    return Err(SuError::InvalidData(format!(
                        "P is not symmetric at ({i}, {j})"
                    )));
                }
                if p[[i, j]] != 0.0 {
                    diagonal = false;
                }
            }
        }
        if diagonal {
            if let Some(i) = (0..n).find(|&i| p[[i, i]] < -1e-8) {
                return Err(SuError::NotPositiveDefinite {
                    index: i,
                    pivot: p[[i, i]],
                });
            }
        } else {
            let mut shifted = p.clone();
            for i in 0..n {
                shifted[[i, i]] += 1e-8;
            }
            Cholesky::factor(shifted.view())?;
        }
        Ok(Self { p, q, g, h })
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.h.len()
    }

    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn q(&self) -> &Array1<f64> {
        &self.q
    }

    pub fn g(&self) -> &Array2<f64> {
        &self.g
    }

    pub fn h(&self) -> &Array1<f64> {
        &self.h
    }

    pub fn objective(&self, x: ArrayView1<f64>) -> f64 {
        0.5 * x.dot(&self.p.dot(&x)) + self.q.dot(&x)
    }

    /// KKT residual of a primal-dual pair: the largest of stationarity
    /// `|Px + q + G'z|_inf`, primal violation `max(Gx - h)_+`, dual violation
    /// `max(-z)_+`, and complementary slackness `max |z_i (Gx - h)_i|`.
    pub fn kkt_residual(&self, x: ArrayView1<f64>, z: ArrayView1<f64>) -> f64 {
        let stat = (&self.p.dot(&x) + &self.q + &self.g.t().dot(&z))
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let slack = self.g.dot(&x) - &self.h;
        let mut res = stat;
        for (sv, zv) in slack.iter().zip(z.iter()) {
            res = res.max(sv.max(0.0)).max((-zv).max(0.0)).max((zv * sv).abs());
        }
        res
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Eliminate diagonal-coupled variables through a Schur complement.
    pub exploit_structure: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            exploit_structure: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub gamma: Array1<f64>,
    /// Multipliers of `G x <= h`.
    pub dual: Array1<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub status: QpStatus,
    pub iterations: usize,
}

impl QpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == QpStatus::Optimal
    }
}

/// Row-compressed copy of a dense matrix (`G`, and `P`).
struct SparseRows {
    ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
    ncols: usize,
}

impl SparseRows {
    fn from_dense(g: &Array2<f64>) -> Self {
        let mut ptr = Vec::with_capacity(g.nrows() + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        ptr.push(0);
        for row in g.rows() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col.push(j);
                    val.push(v);
                }
            }
            ptr.push(col.len());
        }
        Self {
            ptr,
            col,
            val,
            ncols: g.ncols(),
        }
    }

    fn nrows(&self) -> usize {
        self.ptr.len() - 1
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.ptr[r]..self.ptr[r + 1];
        self.col[span.clone()].iter().copied().zip(self.val[span].iter().copied())
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(j, v)| v * x[j]).sum();
        }
    }

    fn mul_t(&self, z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, &zr) in z.iter().enumerate() {
            if zr != 0.0 {
                for (j, v) in self.row(r) {
                    out[j] += v * zr;
                }
            }
        }
    }
}

/// Variable partition for the Newton system: `elim` variables have a
/// diagonal block and are removed by Schur complement onto `keep`.
struct NewtonLayout {
    elim: Vec<usize>,
    keep: Vec<usize>,
    /// For each row, the eliminated variable it touches (at most one).
    row_elim: Vec<Option<(usize, f64)>>,
    /// For each row, its entries on kept variables (indices into `keep`).
    row_keep: Vec<Vec<(usize, f64)>>,
}

impl NewtonLayout {
    fn new(p: &Array2<f64>, g: &SparseRows, exploit: bool) -> Self {
        let n = g.ncols;
        let m = g.nrows();
        let mut is_elim = vec![false; n];
        if exploit {
            let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
            for r in 0..m {
                for (j, _) in g.row(r) {
                    col_rows[j].push(r);
                }
            }
            let mut candidates: Vec<usize> = (0..n)
                .filter(|&j| (0..n).all(|i| i == j || p[[j, i]] == 0.0))
                .collect();
            let weight = |j: usize| -> usize {
                col_rows[j].iter().map(|&r| g.ptr[r + 1] - g.ptr[r]).sum()
            };
            candidates.sort_by_key(|&j| (weight(j), j));
            let mut row_taken = vec![false; m];
            for j in candidates {
                if col_rows[j].iter().all(|&r| !row_taken[r]) {
                    is_elim[j] = true;
                    for &r in &col_rows[j] {
                        row_taken[r] = true;
                    }
                }
            }
        }
        let elim: Vec<usize> = (0..n).filter(|&j| is_elim[j]).collect();
        let keep: Vec<usize> = (0..n).filter(|&j| !is_elim[j]).collect();
        let mut slot = vec![0usize; n];
        for (k, &j) in elim.iter().enumerate() {
            slot[j] = k;
        }
        for (k, &j) in keep.iter().enumerate() {
            slot[j] = k;
        }
        let mut row_elim = vec![None; m];
        let mut row_keep = vec![Vec::new(); m];
        for r in 0..m {
            for (j, v) in g.row(r) {
                if is_elim[j] {
                    row_elim[r] = Some((slot[j], v));
                } else {
                    row_keep[r].push((slot[j], v));
                }
            }
        }
        Self {
            elim,
            keep,
            row_elim,
            row_keep,
        }
    }
}

/// Factored Newton matrix `P + G' W G + reg I`.
struct NewtonFactor {
    elim_diag: Vec<f64>,
    /// Row-major `|elim| x |keep|` coupling block.
    elim_keep: Vec<f64>,
    schur: Option<Cholesky>,
}

impl NewtonLayout {
    fn factor(&self, p: &Array2<f64>, w: &[f64], reg: f64) -> Result<NewtonFactor> {
        let ne = self.elim.len();
        let nk = self.keep.len();
        let mut elim_diag: Vec<f64> = self.elim.iter().map(|&j| p[[j, j]] + reg).collect();
        let mut elim_keep = vec![0.0; ne * nk];
        let mut mkk = Array2::<f64>::zeros((nk, nk));
        for (a, &ja) in self.keep.iter().enumerate() {
            for (b, &jb) in self.keep.iter().enumerate() {
                mkk[[a, b]] = p[[ja, jb]];
            }
            mkk[[a, a]] += reg;
        }
        // Keep-keep block of G'WG as a Gram product of the scaled rows.
        let coupled: Vec<usize> = (0..w.len()).filter(|&r| !self.row_keep[r].is_empty()).collect();
        let mut a_rows = Array2::<f64>::zeros((coupled.len(), nk));
        for (i, &r) in coupled.iter().enumerate() {
            let sw = w[r].sqrt();
            for &(a, va) in &self.row_keep[r] {
                a_rows[[i, a]] += sw * va;
            }
        }
        for (r, &wr) in w.iter().enumerate() {
            if let Some((e, ve)) = self.row_elim[r] {
                elim_diag[e] += wr * ve * ve;
                let row = &mut elim_keep[e * nk..(e + 1) * nk];
                for &(a, va) in &self.row_keep[r] {
                    row[a] += wr * ve * va;
                }
            }
        }
        // Schur complement: subtract C' D^-1 C for the eliminated block.
        let mut c_rows = Array2::<f64>::zeros((ne, nk));
        for e in 0..ne {
            let inv = 1.0 / elim_diag[e].sqrt();
            for (a, v) in elim_keep[e * nk..(e + 1) * nk].iter().enumerate() {
                c_rows[[e, a]] = v * inv;
            }
        }
        mkk += &a_rows.t().dot(&a_rows);
        mkk -= &c_rows.t().dot(&c_rows);
        let schur = if nk > 0 {
            Some(Cholesky::factor(mkk.view())?)
        } else {
            None
        };
        Ok(NewtonFactor {
            elim_diag,
            elim_keep,
            schur,
        })
    }

    fn solve(&self, f: &NewtonFactor, rhs: &[f64], out: &mut [f64]) {
        let nk = self.keep.len();
        let mut yk: Vec<f64> = self.keep.iter().map(|&j| rhs[j]).collect();
        for (e, &j) in self.elim.iter().enumerate() {
            let s = rhs[j] / f.elim_diag[e];
            let row = &f.elim_keep[e * nk..(e + 1) * nk];
            for a in 0..nk {
                yk[a] -= row[a] * s;
            }
        }
        if let Some(ch) = &f.schur {
            ch.solve_in_place(&mut yk);
        }
        for (a, &j) in self.keep.iter().enumerate() {
            out[j] = yk[a];
        }
        for (e, &j) in self.elim.iter().enumerate() {
            let row = &f.elim_keep[e * nk..(e + 1) * nk];
            let coupled: f64 = row.iter().zip(&yk).map(|(r, y)| r * y).sum();
            out[j] = (rhs[j] - coupled) / f.elim_diag[e];
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

/// Solves a convex QP by a primal-dual interior-point method.
///
/// Returns `Optimal` once the KKT residuals, each scaled by the magnitude of
/// the terms it balances, and the relative duality gap are below
/// `settings.tol`. The reported `kkt_residual` is unscaled. A Farkas
/// certificate `z >= 0, G'z = 0, h'z < 0` yields `Infeasible`; running out
/// of iterations or numerical breakdown yields `MaxIter` with the best
/// iterate seen.
pub fn solve_qp(problem: &QpProblem, settings: &QpSettings) -> QpSolution {
    let n = problem.num_vars();
    let m = problem.num_constraints();
    let p = &problem.p;
    let q = problem.q.as_slice().expect("contiguous q");
    let h = problem.h.as_slice().expect("contiguous h");
    let g = SparseRows::from_dense(&problem.g);
    let layout = NewtonLayout::new(p, &g, settings.exploit_structure);

    let p_sparse = SparseRows::from_dense(p);
    let pmul = |x: &[f64], out: &mut [f64]| p_sparse.mul(x, out);

    // Initial point: minimize 1/2 x'Px + q'x + 1/2 |Gx - h|^2, then shift
    // the slacks and multipliers into the positive orthant.
    let ones = vec![1.0; m];
    let mut x = vec![0.0; n];
    let mut s = vec![1.0; m];
    let mut z = vec![1.0; m];
    if let Ok(f) = layout.factor(p, &ones, NEWTON_REGULARIZATION.max(1e-8)) {
        let mut rhs = vec![0.0; n];
        g.mul_t(h, &mut rhs);
        for (r, qi) in rhs.iter_mut().zip(q) {
            *r -= qi;
        }
        layout.solve(&f, &rhs, &mut x);
        let mut gx = vec![0.0; m];
        g.mul(&x, &mut gx);
        for i in 0..m {
            s[i] = h[i] - gx[i];
            z[i] = gx[i] - h[i];
        }
        let shift = |v: &mut [f64]| {
            let alpha = -v.iter().copied().fold(f64::INFINITY, f64::min);
            if alpha >= -1e-8 {
                v.iter_mut().for_each(|e| *e += 1.0 + alpha);
            }
        };
        if m > 0 {
            shift(&mut s);
            shift(&mut z);
        }
    }

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut status = QpStatus::MaxIter;
    let mut iterations = 0;
    let mut stall = 0usize;

    let mut gx = vec![0.0; m];
    let mut gtz = vec![0.0; n];
    let mut px = vec![0.0; n];
    let mut rd = vec![0.0; n];
    let mut rp = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut rhs = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut dx = vec![0.0; n];
    let mut ds = vec![0.0; m];
    let mut dz = vec![0.0; m];
    let mut rc = vec![0.0; m];

    for it in 0..=settings.max_iter {
        iterations = it;
        g.mul(&x, &mut gx);
        g.mul_t(&z, &mut gtz);
        pmul(&x, &mut px);
        for i in 0..n {
            rd[i] = px[i] + q[i] + gtz[i];
        }
        for i in 0..m {
            rp[i] = gx[i] + s[i] - h[i];
        }
        let primal: f64 = 0.5 * x.iter().zip(&px).map(|(a, b)| a * b).sum::<f64>()
            + x.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        // Complementarity gap; equals the duality gap once rd = 0.
        let dual_gap: f64 = (0..m).map(|i| z[i] * (h[i] - gx[i])).sum::<f64>();
        // Residuals relative to the size of the terms they balance, so the
        // stop works when the solution itself is large (tiny lambda).
        let dual_scale = 1.0 + inf_norm(&px).max(inf_norm(q)).max(inf_norm(&gtz));
        let primal_scale = 1.0 + inf_norm(&gx).max(inf_norm(h));
        let gap_scale = 1.0 + primal.abs();
        let mut res = inf_norm(&rd) / dual_scale;
        for i in 0..m {
            let viol = gx[i] - h[i];
            res = res.max(viol.max(0.0) / primal_scale).max((z[i] * viol).abs() / gap_scale);
        }

        let improved = best.as_ref().is_none_or(|(b, _, _)| res < *b);
        if improved {
            best = Some((res, x.clone(), z.clone()));
            stall = 0;
        } else {
            stall += 1;
        }
        if res <= settings.tol && dual_gap.abs() <= settings.tol * gap_scale {
            status = QpStatus::Optimal;
            best = Some((res, x.clone(), z.clone()));
            break;
        }
        if m > 0 {
            let hz: f64 = h.iter().zip(&z).map(|(a, b)| a * b).sum();
            if hz < 0.0 && inf_norm(&gtz) <= 1e-9 * (-hz) {
                status = QpStatus::Infeasible;
                break;
            }
        }
        if it == settings.max_iter || stall > STALL_LIMIT {
            break;
        }
        if m == 0 {
            // Unconstrained: a single Newton step on P x = -q.
            let Ok(f) = layout.factor(p, &w, NEWTON_REGULARIZATION) else {
                break;
            };
            for i in 0..n {
                rhs[i] = -rd[i];
            }
            layout.solve(&f, &rhs, &mut dx);
            for i in 0..n {
                x[i] += dx[i];
            }
            continue;
        }

        let mu = s.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() / m as f64;
        for i in 0..m {
            w[i] = z[i] / s[i];
        }
        let factor = match layout.factor(p, &w, NEWTON_REGULARIZATION) {
            Ok(f) => f,
            Err(_) => {
                let scale = 1e-8 * (1.0 + w.iter().copied().fold(0.0, f64::max));
                match layout.factor(p, &w, scale) {
                    Ok(f) => f,
                    Err(_) => break,
                }
            }
        };

        let newton = |rc: &[f64],
                      dx: &mut [f64],
                      ds: &mut [f64],
                      dz: &mut [f64],
                      rhs: &mut [f64],
                      tmp_m: &mut [f64]| {
            for i in 0..m {
                tmp_m[i] = (z[i] * rp[i] - rc[i]) / s[i];
            }
            g.mul_t(tmp_m, rhs);
            for i in 0..n {
                rhs[i] = -rd[i] - rhs[i];
            }
            layout.solve(&factor, rhs, dx);
            // Iterative refinement against the unregularized system; the
            // factor loses digits when z/s spans many orders of magnitude.
            let mut corr = vec![0.0; n];
            let mut lhs = vec![0.0; n];
            for _ in 0..REFINEMENT_STEPS {
                g.mul(dx, tmp_m);
                for i in 0..m {
                    tmp_m[i] *= w[i];
                }
                g.mul_t(tmp_m, &mut lhs);
                pmul(dx, &mut corr);
                for i in 0..n {
                    lhs[i] = rhs[i] - lhs[i] - corr[i];
                }
                layout.solve(&factor, &lhs, &mut corr);
                for i in 0..n {
                    dx[i] += corr[i];
                }
            }
            g.mul(dx, tmp_m);
            for i in 0..m {
                ds[i] = -rp[i] - tmp_m[i];
                dz[i] = (-rc[i] - z[i] * ds[i]) / s[i];
            }
        };

        // Predictor.
        for i in 0..m {
            rc[i] = s[i] * z[i];
        }
        newton(&rc, &mut dx, &mut ds, &mut dz, &mut rhs, &mut tmp_m);
        let alpha_aff = max_step(&s, &ds).min(max_step(&z, &dz)).min(1.0);
        let mu_aff = (0..m)
            .map(|i| (s[i] + alpha_aff * ds[i]) * (z[i] + alpha_aff * dz[i]))
            .sum::<f64>()
            / m as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        for i in 0..m {
            rc[i] = s[i] * z[i] + ds[i] * dz[i] - sigma * mu;
        }
        newton(&rc, &mut dx, &mut ds, &mut dz, &mut rhs, &mut tmp_m);
        let alpha = (0.99 * max_step(&s, &ds).min(max_step(&z, &dz))).min(1.0);
        if !alpha.is_finite() || alpha <= 0.0 {
            break;
        }
        for i in 0..n {
            x[i] += alpha * dx[i];
        }
        for i in 0..m {
            s[i] += alpha * ds[i];
            z[i] += alpha * dz[i];
        }
        if x.iter().chain(&s).chain(&z).any(|v| !v.is_finite()) {
            break;
        }
    }

    let (x_out, z_out) = match (status, best) {
        (QpStatus::Infeasible, _) | (_, None) => (x, z),
        (_, Some((_, bx, bz))) => (bx, bz),
    };
    let mut gamma = Array1::from(x_out);
    let mut dual = Array1::from(z_out);
    let mut kkt_residual = problem.kkt_residual(gamma.view(), dual.view());
    if status == QpStatus::Optimal {
        if let Some((px, pz)) = polish(problem, &gamma, &dual) {
            let res = problem.kkt_residual(px.view(), pz.view());
            if res <= kkt_residual {
                gamma = px;
                dual = pz;
                kkt_residual = res;
            }
        }
    }
    QpSolution {
        objective: problem.objective(gamma.view()),
        gamma,
        dual,
        kkt_residual,
        status,
        iterations,
    }
}

/// Largest `n + |active set|` for which a converged solution is polished.
const POLISH_MAX_DIM: usize = 400;

/// Re-solves the equality-constrained KKT system on the active set guessed
/// from the interior-point iterate. This removes the `O(mu)` bias of the
/// barrier solution on small problems. Returns `None` when the system is
/// singular or the guess is inconsistent (negative multiplier).
fn polish(problem: &QpProblem, x: &Array1<f64>, z: &Array1<f64>) -> Option<(Array1<f64>, Array1<f64>)> {
    let n = problem.num_vars();
    let slack = &problem.h - &problem.g.dot(x);
    let active: Vec<usize> = (0..problem.num_constraints())
        .filter(|&i| z[i] > slack[i])
        .collect();
    let k = n + active.len();
    if k > POLISH_MAX_DIM {
        return None;
    }
    let mut a = Array2::<f64>::zeros((k, k));
    let mut b = Array1::<f64>::zeros(k);
    a.slice_mut(ndarray::s![..n, ..n]).assign(&problem.p);
    for i in 0..n {
        b[i] = -problem.q[i];
    }
    for (r, &i) in active.iter().enumerate() {
        for j in 0..n {
            let v = problem.g[[i, j]];
            a[[n + r, j]] = v;
            a[[j, n + r]] = v;
        }
        b[n + r] = problem.h[i];
    }
    let sol = lu_solve(a, b)?;
    let px = sol.slice(ndarray::s![..n]).to_owned();
    let mut pz = Array1::<f64>::zeros(problem.num_constraints());
    for (r, &i) in active.iter().enumerate() {
        if sol[n + r] < 0.0 {
            return None;
        }
        pz[i] = sol[n + r];
    }
    Some((px, pz))
}

/// Gaussian elimination with partial pivoting.
fn lu_solve(mut a: Array2<f64>, mut b: Array1<f64>) -> Option<Array1<f64>> {
    let n = b.len();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))?;
        if a[[piv, col]].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap([piv, j], [col, j]);
            }
            b.swap(piv, col);
        }
        let d = a[[col, col]];
        for i in (col + 1)..n {
            let f = a[[i, col]] / d;
            if f != 0.0 {
                for j in col..n {
                    a[[i, j]] -= f * a[[col, j]];
                }
                b[i] -= f * b[col];
            }
        }
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for j in (i + 1)..n {
            v -= a[[i, j]] * b[j];
        }
        b[i] = v / a[[i, i]];
    }
    b.iter().all(|v| v.is_finite()).then_some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
        let a = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
        let mut s = a.t().dot(&a);
        for i in 0..n {
            s[[i, i]] += 0.1;
        }
        s
    }

    #[test]
    fn solve_spd_identity_and_diagonal() {
        let b = array![3.0, -1.5, 2.0];
        let x = solve_spd(Array2::eye(3).view(), b.view()).unwrap();
        assert_eq!(x, b);
        let a = array![[2.0, 0.0], [0.0, 4.0]];
        let x = solve_spd(a.view(), array![2.0, 8.0].view()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn solve_spd_backward_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = 1 + (trial * 2) % 200;
            let a = random_spd(&mut rng, n);
            let b = Array1::from_shape_fn(n, |_| rng.random_range(-10.0..10.0));
            let x = solve_spd(a.view(), b.view()).unwrap();
            let r = a.dot(&x) - &b;
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(inf_norm(r.as_slice().unwrap()) <= 1e-8 * (1.0 + bnorm), "n={n}");
        }
    }

    #[test]
    fn solve_spd_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        let err = solve_spd(a.view(), array![1.0, 1.0].view()).unwrap_err();
        assert!(matches!(err, SuError::NotPositiveDefinite { index: 1, .. }));
    }

    #[test]
    fn qp_projection_onto_halfline() {
        let prob = QpProblem::new(array![[1.0]], array![0.0], array![[-1.0]], array![-1.0]).unwrap();
        let sol = solve_qp(&prob, &QpSettings::default());
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.gamma[0] - 1.0).abs() < 1e-7);
        assert!((sol.objective - 0.5).abs() < 1e-7);
    }

    #[test]
    fn qp_symmetric_halfspace() {
        let prob = QpProblem::new(
            Array2::eye(2),
            array![0.0, 0.0],
            array![[1.0, 1.0]],
            array![-2.0],
        )
        .unwrap();
        let sol = solve_qp(&prob, &QpSettings::default());
        assert!(sol.is_optimal());
        assert!((sol.gamma[0] + 1.0).abs() < 1e-7 && (sol.gamma[1] + 1.0).abs() < 1e-7);
        assert!(sol.kkt_residual <= 1e-8);
    }

    #[test]
    fn qp_detects_infeasibility() {
        // x <= -1 and x >= 1.
        let prob = QpProblem::new(
            array![[1.0]],
            array![0.0],
            array![[1.0], [-1.0]],
            array![-1.0, -1.0],
        )
        .unwrap();
        let sol = solve_qp(&prob, &QpSettings::default());
        assert_eq!(sol.status, QpStatus::Infeasible);
    }

    #[test]
    fn qp_singular_p_linear_program() {
        // min x + y s.t. x >= 0, y >= 0, x + y >= 1 (degenerate optimum face).
        let prob = QpProblem::new(
            Array2::zeros((2, 2)),
            array![1.0, 2.0],
            array![[-1.0, 0.0], [0.0, -1.0], [-1.0, -1.0]],
            array![0.0, 0.0, -1.0],
        )
        .unwrap();
        let sol = solve_qp(&prob, &QpSettings::default());
        assert!(sol.is_optimal());
        assert!((sol.objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn qp_rejects_asymmetric_or_indefinite_p() {
        let e = QpProblem::new(
            array![[1.0, 1.0], [0.0, 1.0]],
            array![0.0, 0.0],
            Array2::zeros((0, 2)),
            Array1::zeros(0),
        );
        assert!(e.is_err());
        let e = QpProblem::new(array![[-1.0]], array![0.0], Array2::zeros((0, 1)), Array1::zeros(0));
        assert!(e.is_err());
    }

    #[test]
    fn qp_structure_and_dense_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 6;
            let mut p = Array2::zeros((n, n));
            let a = random_spd(&mut rng, 3);
            p.slice_mut(ndarray::s![0..3, 0..3]).assign(&a);
            let q = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
            // Each of the last three variables appears in its own rows.
            let mut g = Array2::zeros((9, n));
            for k in 0..3 {
                for r in 0..3 {
                    let row = 3 * k + r;
                    g[[row, 3 + k]] = -1.0;
                    for j in 0..3 {
                        g[[row, j]] = rng.random_range(-1.0..1.0);
                    }
                }
            }
            let h = Array1::from_shape_fn(9, |_| rng.random_range(0.0..1.0));
            let q = q.mapv(f64::abs);
            let prob = QpProblem::new(p, q, g, h).unwrap();
            let a = solve_qp(&prob, &QpSettings::default());
            let b = solve_qp(
                &prob,
                &QpSettings {
                    exploit_structure: false,
                    ..QpSettings::default()
                },
            );
            assert!(a.is_optimal() && b.is_optimal());
            assert!((a.objective - b.objective).abs() < 1e-7);
        }
    }

    #[test]
    fn qp_vacuous_constraint_does_not_move_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let p = random_spd(&mut rng, 3);
            let q = Array1::from_shape_fn(3, |_| rng.random_range(-1.0..1.0));
            let g = Array2::from_shape_fn((4, 3), |_| rng.random_range(-1.0..1.0));
            let h = Array1::from_shape_fn(4, |_| rng.random_range(0.0..1.0));
            let base = solve_qp(&QpProblem::new(p.clone(), q.clone(), g.clone(), h.clone()).unwrap(), &QpSettings::default());
            let mut g2 = Array2::zeros((5, 3));
            g2.slice_mut(ndarray::s![0..4, ..]).assign(&g);
            g2.row_mut(4).assign(&Array1::from_shape_fn(3, |_| rng.random_range(-1.0..1.0)));
            let mut h2 = Array1::zeros(5);
            h2.slice_mut(ndarray::s![0..4]).assign(&h);
            h2[4] = 1e9;
            let more = solve_qp(&QpProblem::new(p, q, g2, h2).unwrap(), &QpSettings::default());
            assert!(base.is_optimal() && more.is_optimal(), "{:?} {:?} {} {}", base.status, more.status, base.kkt_residual, more.kkt_residual);
            for (a, b) in base.gamma.iter().zip(more.gamma.iter()) {
                assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
            }
        }
    }

    /// Gauss-Jordan elimination, kept separate from the solver's own code.
    fn oracle_solve(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
        let n = r.len();
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap())?;
            if m[p][c].abs() < 1e-12 {
                return None;
            }
            m.swap(p, c);
            r.swap(p, c);
            for i in 0..n {
                if i != c {
                    let f = m[i][c] / m[c][c];
                    for j in 0..n {
                        m[i][j] -= f * m[c][j];
                    }
                    r[i] -= f * r[c];
                }
            }
        }
        Some((0..n).map(|i| r[i] / m[i][i]).collect())
    }

    /// Minimum over all active sets whose KKT point is primal and dual
    /// feasible.
    fn active_set_oracle(p: &Array2<f64>, q: &Array1<f64>, g: &Array2<f64>, h: &Array1<f64>) -> f64 {
        let n = q.len();
        let m = h.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << m) {
            let act: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            let k = n + act.len();
            let mut mat = vec![vec![0.0; k]; k];
            let mut rhs = vec![0.0; k];
            for i in 0..n {
                for j in 0..n {
                    mat[i][j] = p[[i, j]];
                }
                rhs[i] = -q[i];
            }
            for (r, &a) in act.iter().enumerate() {
                for j in 0..n {
                    mat[n + r][j] = g[[a, j]];
                    mat[j][n + r] = g[[a, j]];
                }
                rhs[n + r] = h[a];
            }
            let Some(sol) = oracle_solve(mat, rhs) else { continue };
            let x = Array1::from(sol[..n].to_vec());
            let feasible = (g.dot(&x) - h).iter().all(|&v| v <= 1e-9);
            let dual_ok = sol[n..].iter().all(|&v| v >= -1e-9);
            if feasible && dual_ok {
                best = best.min(0.5 * x.dot(&p.dot(&x)) + q.dot(&x));
            }
        }
        best
    }

    #[test]
    fn qp_matches_active_set_enumeration_and_closes_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..30 {
            let p = random_spd(&mut rng, 3);
            let q = Array1::from_shape_fn(3, |_| rng.random_range(-2.0..2.0));
            let g = Array2::from_shape_fn((4, 3), |_| rng.random_range(-1.0..1.0));
            let h = Array1::from_shape_fn(4, |_| rng.random_range(0.0..1.0));
            let expected = active_set_oracle(&p, &q, &g, &h);
            let prob = QpProblem::new(p, q, g, h).unwrap();
            let settings = QpSettings::default();
            let sol = solve_qp(&prob, &settings);
            assert!(sol.is_optimal());
            assert!((sol.objective - expected).abs() <= 1e-6, "{} vs {expected}", sol.objective);
            let gap = sol.objective
                + 0.5 * sol.gamma.dot(&prob.p().dot(&sol.gamma))
                + prob.h().dot(&sol.dual);
            assert!(gap.abs() <= 10.0 * settings.tol, "gap {gap}");
            assert!((prob.g().dot(&sol.gamma) - prob.h()).iter().all(|&v| v <= 1e-6));
        }
    }
}

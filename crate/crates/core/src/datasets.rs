//! Labeled data, SU datasets and the samplers connecting them.
//!
//! An SU dataset holds `n_S` similar pairs and `n_U` unlabeled points. Pair
//! members are stored pooled and interleaved (`x_0, x'_0, x_1, x'_1, ...`),
//! which is the layout the risk and trainer code consume. Ground-truth labels
//! can ride along in [`HiddenLabels`] for evaluation; trainers only ever see
//! a [`SuSamples`] view, which has no access to them.

use std::fmt;
use std::io::Read;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SuError};
use crate::numkit::Cholesky;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    /// `sign(0)` maps to `Pos`.
    pub fn from_score(score: f64) -> Self {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Pos => "+1",
            Label::Neg => "-1",
        })
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign() as i8)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i64::deserialize(d)? {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(serde::de::Error::custom(format!(
                "label must be +1 or -1, got {other}"
            ))),
        }
    }
}

/// Feature matrix with one `+1/-1` label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<Label>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(SuError::EmptyInput);
        }
        if labels.len() != features.nrows() {
            return Err(SuError::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        check_finite(features.view())?;
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Row indices carrying `label`, in order.
    pub fn class_indices(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn positive_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&l| l == Label::Pos).count() as f64 / self.len() as f64
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(features, labels)
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<Label>) {
        (self.features, self.labels)
    }
}

fn check_finite(x: ArrayView2<f64>) -> Result<()> {
    if let Some((idx, _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(SuError::InvalidData(format!(
            "non-finite feature at row {}, column {}",
            idx.0, idx.1
        )));
    }
    Ok(())
}

/// Default half-width of the excluded band around `pi_plus = 1/2`.
pub const DEFAULT_PRIOR_GUARD: f64 = 1e-3;

/// Positive class prior, kept away from `1/2` where the SU risk is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassPrior {
    pi_plus: f64,
}

impl ClassPrior {
    pub fn new(pi_plus: f64) -> Result<Self> {
        Self::with_guard(pi_plus, DEFAULT_PRIOR_GUARD)
    }

    /// Requires `0 < pi_plus < 1` and `|2 pi_plus - 1| >= guard`.
    pub fn with_guard(pi_plus: f64, guard: f64) -> Result<Self> {
        if !(pi_plus > 0.0 && pi_plus < 1.0) {
            return Err(SuError::InvalidArgument(format!(
                "class prior must lie in (0, 1), got {pi_plus}"
            )));
        }
        if (2.0 * pi_plus - 1.0).abs() < guard {
            return Err(SuError::DegeneratePrior { pi_plus, guard });
        }
        Ok(Self { pi_plus })
    }

    pub fn pi_plus(&self) -> f64 {
        self.pi_plus
    }

    pub fn pi_minus(&self) -> f64 {
        1.0 - self.pi_plus
    }

    /// Probability that two independent points share a class.
    pub fn pi_s(&self) -> f64 {
        pi_s_of(self.pi_plus)
    }

    /// Probability that two independent points differ in class.
    pub fn pi_d(&self) -> f64 {
        2.0 * self.pi_plus * self.pi_minus()
    }

    /// `2 pi_plus - 1`, the denominator of the corrected losses.
    pub fn skew(&self) -> f64 {
        2.0 * self.pi_plus - 1.0
    }
}

pub fn pi_s_of(pi_plus: f64) -> f64 {
    pi_plus * pi_plus + (1.0 - pi_plus) * (1.0 - pi_plus)
}

fn check_probability(pi_plus: f64) -> Result<()> {
    if !(pi_plus > 0.0 && pi_plus < 1.0) {
        return Err(SuError::InvalidArgument(format!(
            "class prior must lie in (0, 1), got {pi_plus}"
        )));
    }
    Ok(())
}

/// Two Gaussian classes with a shared covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub mean_plus: Vec<f64>,
    pub mean_minus: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub pi_plus: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Identity covariance with means `+/- (separation / 2) / sqrt(d)` in
    /// every coordinate, so the distance between means is `separation`.
    pub fn isotropic(dim: usize, separation: f64, pi_plus: f64, seed: u64) -> Self {
        let c = 0.5 * separation / (dim as f64).sqrt();
        let mut covariance = vec![vec![0.0; dim]; dim];
        for (i, row) in covariance.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self {
            mean_plus: vec![c; dim],
            mean_minus: vec![-c; dim],
            covariance,
            pi_plus,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean_plus.len()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_pi_plus(&self, pi_plus: f64) -> Self {
        Self {
            pi_plus,
            ..self.clone()
        }
    }
}

/// Draws `n` points: labels are Bernoulli(`pi_plus`), features come from the
/// class-conditional Gaussian.
pub fn generate_gaussian(spec: &SyntheticSpec, n: usize) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(SuError::InvalidArgument("n must be at least 1".into()));
    }
    check_probability(spec.pi_plus)?;
    let d = spec.dim();
    if d == 0 {
        return Err(SuError::InvalidArgument("dimension must be at least 1".into()));
    }
    if spec.mean_minus.len() != d {
        return Err(SuError::DimensionMismatch {
            expected: d,
            got: spec.mean_minus.len(),
        });
    }
    if spec.covariance.len() != d || spec.covariance.iter().any(|r| r.len() != d) {
        return Err(SuError::InvalidArgument(format!(
            "covariance must be {d}x{d}"
        )));
    }
    let cov = Array2::from_shape_fn((d, d), |(i, j)| spec.covariance[i][j]);
    for i in 0..d {
        for j in 0..i {
            if (cov[[i, j]] - cov[[j, i]]).abs() > 1e-12 {
                return Err(SuError::InvalidArgument("covariance is not symmetric".into()));
            }
        }
    }
    let chol = Cholesky::factor(cov.view())?;
    let l = chol.lower();
    let mut rng = rng_from_seed(spec.seed);
    let mut features = Array2::<f64>::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    let mut z = vec![0.0; d];
    for mut row in features.rows_mut() {
        let label = if rng.random_bool(spec.pi_plus) {
            Label::Pos
        } else {
            Label::Neg
        };
        let mean = match label {
            Label::Pos => &spec.mean_plus,
            Label::Neg => &spec.mean_minus,
        };
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for r in 0..d {
            let mut v = mean[r];
            for c in 0..=r {
                v += l[[r, c]] * z[c];
            }
            row[r] = v;
        }
        labels.push(label);
    }
    LabeledDataset::new(features, labels)
}

/// Parses LIBSVM sparse text (`label idx:val idx:val ...`).
///
/// Indices are 1-based and densified; missing entries are 0. Any two
/// distinct raw labels are accepted and the larger one becomes `+1`. With a
/// single distinct label, positive raw values map to `+1` and everything
/// else to `-1`. Blank lines and `#` comments are skipped.
pub fn parse_libsvm(text: &str) -> Result<LabeledDataset> {
    let mut raw_labels: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| SuError::Parse {
            line: line_no,
            message: format!("invalid label '{label_tok}'"),
        })?;
        if !label.is_finite() {
            return Err(SuError::Parse {
                line: line_no,
                message: format!("invalid label '{label_tok}'"),
            });
        }
        let mut entries = Vec::new();
        let mut last_index = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| SuError::Parse {
                line: line_no,
                message: format!("expected index:value, got '{tok}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| SuError::Parse {
                line: line_no,
                message: format!("invalid index '{idx}'"),
            })?;
            if idx == 0 {
                return Err(SuError::Parse {
                    line: line_no,
                    message: "feature indices are 1-based".into(),
                });
            }
            if idx <= last_index {
                return Err(SuError::Parse {
                    line: line_no,
                    message: format!("index {idx} is not increasing"),
                });
            }
            last_index = idx;
            let val: f64 = val.parse().map_err(|_| SuError::Parse {
                line: line_no,
                message: format!("invalid value '{val}'"),
            })?;
            if !val.is_finite() {
                return Err(SuError::Parse {
                    line: line_no,
                    message: format!("non-finite value '{val}'"),
                });
            }
            entries.push((idx - 1, val));
            dim = dim.max(idx);
        }
        raw_labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(SuError::EmptyInput);
    }
    if dim == 0 {
        return Err(SuError::Format("no features present".into()));
    }
    let mut distinct: Vec<f64> = Vec::new();
    for &l in &raw_labels {
        if !distinct.contains(&l) {
            distinct.push(l);
            if distinct.len() > 2 {
                return Err(SuError::Format(format!(
                    "expected at most two distinct labels, found {}, {} and {}",
                    distinct[0], distinct[1], distinct[2]
                )));
            }
        }
    }
    let positive = if distinct.len() == 2 {
        distinct[0].max(distinct[1])
    } else if distinct[0] > 0.0 {
        distinct[0]
    } else {
        f64::NAN
    };
    let mut features = Array2::<f64>::zeros((rows.len(), dim));
    for (r, entries) in rows.iter().enumerate() {
        for &(c, v) in entries {
            features[[r, c]] = v;
        }
    }
    let labels = raw_labels
        .iter()
        .map(|&l| if l == positive { Label::Pos } else { Label::Neg })
        .collect();
    LabeledDataset::new(features, labels)
}

pub fn read_libsvm<R: Read>(mut reader: R) -> Result<LabeledDataset> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_libsvm(&text)
}

/// Writes `+1/-1` labels and nonzero features. The last column of the first
/// row is always written so the dimension survives a round trip.
pub fn write_libsvm(data: &LabeledDataset) -> String {
    let d = data.dim();
    let mut out = String::new();
    for (r, row) in data.features.rows().into_iter().enumerate() {
        out.push_str(&data.labels[r].to_string());
        for (c, &v) in row.iter().enumerate() {
            if v != 0.0 || (r == 0 && c + 1 == d) {
                out.push_str(&format!(" {}:{}", c + 1, v));
            }
        }
        out.push('\n');
    }
    out
}

/// Ground truth for an SU dataset. Never passed to trainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenLabels {
    /// Shared class of each pair.
    pub s_pairs: Vec<Label>,
    pub u_points: Vec<Label>,
}

/// Similar pairs plus unlabeled points.
#[derive(Debug, Clone, PartialEq)]
pub struct SuDataset {
    pooled_s: Array2<f64>,
    u_points: Array2<f64>,
    hidden: Option<HiddenLabels>,
}

/// What trainers get to see: pooled pair members (interleaved, `2 n_S` rows)
/// and unlabeled points.
#[derive(Debug, Clone, Copy)]
pub struct SuSamples<'a> {
    pub pooled_s: ArrayView2<'a, f64>,
    pub u: ArrayView2<'a, f64>,
}

impl SuSamples<'_> {
    pub fn n_s(&self) -> usize {
        self.pooled_s.nrows() / 2
    }

    pub fn n_u(&self) -> usize {
        self.u.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    /// Requires at least one pair and one unlabeled point.
    pub fn check_trainable(&self) -> Result<()> {
        if self.n_s() == 0 || self.n_u() == 0 {
            return Err(SuError::InvalidData(format!(
                "training needs at least one pair and one unlabeled point (have {} and {})",
                self.n_s(),
                self.n_u()
            )));
        }
        Ok(())
    }
}

impl SuDataset {
    /// `pooled_s` holds pair members interleaved: rows `2i` and `2i + 1`
    /// form pair `i`.
    pub fn new(
        pooled_s: Array2<f64>,
        u_points: Array2<f64>,
        hidden: Option<HiddenLabels>,
    ) -> Result<Self> {
        if pooled_s.nrows() % 2 != 0 {
            return Err(SuError::InvalidData(
                "pooled pair matrix must have an even number of rows".into(),
            ));
        }
        if pooled_s.ncols() != u_points.ncols() {
            return Err(SuError::DimensionMismatch {
                expected: u_points.ncols(),
                got: pooled_s.ncols(),
            });
        }
        if u_points.ncols() == 0 {
            return Err(SuError::InvalidData("dimension must be at least 1".into()));
        }
        check_finite(pooled_s.view())?;
        check_finite(u_points.view())?;
        if let Some(h) = &hidden {
            if h.s_pairs.len() != pooled_s.nrows() / 2 || h.u_points.len() != u_points.nrows() {
                return Err(SuError::InvalidData(
                    "hidden labels do not match dataset sizes".into(),
                ));
            }
        }
        Ok(Self {
            pooled_s,
            u_points,
            hidden,
        })
    }

    pub fn n_s(&self) -> usize {
        self.pooled_s.nrows() / 2
    }

    pub fn n_u(&self) -> usize {
        self.u_points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u_points.ncols()
    }

    pub fn pair(&self, i: usize) -> (ArrayView1<'_, f64>, ArrayView1<'_, f64>) {
        (self.pooled_s.row(2 * i), self.pooled_s.row(2 * i + 1))
    }

    pub fn pooled_s(&self) -> &Array2<f64> {
        &self.pooled_s
    }

    pub fn u_points(&self) -> &Array2<f64> {
        &self.u_points
    }

    pub fn hidden_labels(&self) -> Option<&HiddenLabels> {
        self.hidden.as_ref()
    }

    pub fn training_view(&self) -> SuSamples<'_> {
        SuSamples {
            pooled_s: self.pooled_s.view(),
            u: self.u_points.view(),
        }
    }

    pub fn without_hidden_labels(&self) -> Self {
        Self {
            hidden: None,
            ..self.clone()
        }
    }

    /// Keeps the listed pairs (whole) and unlabeled points.
    pub fn subset(&self, pairs: &[usize], u: &[usize]) -> Self {
        let rows: Vec<usize> = pairs.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let hidden = self.hidden.as_ref().map(|h| HiddenLabels {
            s_pairs: pairs.iter().map(|&i| h.s_pairs[i]).collect(),
            u_points: u.iter().map(|&i| h.u_points[i]).collect(),
        });
        Self {
            pooled_s: self.pooled_s.select(Axis(0), &rows),
            u_points: self.u_points.select(Axis(0), u),
            hidden,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let d = self.dim();
        let json = SuDatasetJson {
            s_pairs: (0..self.n_s())
                .map(|i| {
                    let (a, b) = self.pair(i);
                    [a.to_vec(), b.to_vec()]
                })
                .collect(),
            u_points: self.u_points.rows().into_iter().map(|r| r.to_vec()).collect(),
            d,
            hidden_labels: self.hidden.clone(),
        };
        Ok(serde_json::to_string(&json)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: SuDatasetJson = serde_json::from_str(text)?;
        let d = json.d;
        let check = |v: &Vec<f64>| -> Result<()> {
            if v.len() != d {
                return Err(SuError::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            Ok(())
        };
        let mut pooled = Vec::with_capacity(json.s_pairs.len() * 2 * d);
        for [a, b] in &json.s_pairs {
            check(a)?;
            check(b)?;
            pooled.extend_from_slice(a);
            pooled.extend_from_slice(b);
        }
        let mut u = Vec::with_capacity(json.u_points.len() * d);
        for p in &json.u_points {
            check(p)?;
            u.extend_from_slice(p);
        }
        let pooled_s = Array2::from_shape_vec((2 * json.s_pairs.len(), d), pooled)
            .map_err(|e| SuError::Format(e.to_string()))?;
        let u_points = Array2::from_shape_vec((json.u_points.len(), d), u)
            .map_err(|e| SuError::Format(e.to_string()))?;
        Self::new(pooled_s, u_points, json.hidden_labels)
    }
}

#[derive(Serialize, Deserialize)]
struct SuDatasetJson {
    s_pairs: Vec<[Vec<f64>; 2]>,
    u_points: Vec<Vec<f64>>,
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hidden_labels: Option<HiddenLabels>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSampler {
    /// Draw two labeled points independently and keep them if their classes
    /// agree.
    #[default]
    Rejection,
    /// Draw the pair class with probability `pi_plus^2 / pi_S`, then two
    /// points of that class.
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub sampler: PairSampler,
    /// Allow a source point to be reused across pairs and unlabeled points.
    /// The two members of a pair are always distinct points.
    pub replacement: bool,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            sampler: PairSampler::Rejection,
            replacement: true,
        }
    }
}

/// Per-class pools of source indices.
struct ClassPools {
    pos: Vec<usize>,
    neg: Vec<usize>,
    replacement: bool,
}

impl ClassPools {
    fn pool(&mut self, label: Label) -> &mut Vec<usize> {
        match label {
            Label::Pos => &mut self.pos,
            Label::Neg => &mut self.neg,
        }
    }

    fn insufficient(&mut self, label: Label, needed: usize) -> SuError {
        SuError::InsufficientData {
            class: label,
            needed,
            available: self.pool(label).len(),
        }
    }

    fn draw_one<R: Rng>(&mut self, rng: &mut R, label: Label) -> Result<usize> {
        let replacement = self.replacement;
        let pool = self.pool(label);
        if pool.is_empty() {
            return Err(self.insufficient(label, 1));
        }
        let k = rng.random_range(0..pool.len());
        Ok(if replacement {
            pool[k]
        } else {
            pool.swap_remove(k)
        })
    }

    /// Two distinct points of one class.
    fn draw_two<R: Rng>(&mut self, rng: &mut R, label: Label) -> Result<(usize, usize)> {
        if self.pool(label).len() < 2 {
            return Err(self.insufficient(label, 2));
        }
        if self.replacement {
            let pool = self.pool(label);
            let a = rng.random_range(0..pool.len());
            let mut b = rng.random_range(0..pool.len() - 1);
            if b >= a {
                b += 1;
            }
            Ok((pool[a], pool[b]))
        } else {
            let a = self.draw_one(rng, label)?;
            let b = self.draw_one(rng, label)?;
            Ok((a, b))
        }
    }
}

fn draw_label<R: Rng>(rng: &mut R, pi_plus: f64) -> Label {
    if rng.random_bool(pi_plus) {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// Subsamples an SU dataset from labeled data.
///
/// Labeled points are drawn by first drawing a class with probability
/// `pi_plus` and then a uniform point of that class, so the source data's
/// own class balance does not matter. Pairs follow the pair distribution
/// (positive pairs with probability `pi_plus^2 / pi_S`), unlabeled points
/// the marginal. Pairs come first in the random stream, then unlabeled
/// points.
pub fn sample_su(
    data: &LabeledDataset,
    pi_plus: f64,
    n_s: usize,
    n_u: usize,
    seed: u64,
    options: &SamplingOptions,
) -> Result<SuDataset> {
    check_probability(pi_plus)?;
    let mut rng = rng_from_seed(seed);
    let mut pools = ClassPools {
        pos: data.class_indices(Label::Pos),
        neg: data.class_indices(Label::Neg),
        replacement: options.replacement,
    };
    let d = data.dim();
    let mut pooled = Array2::<f64>::zeros((2 * n_s, d));
    let mut pair_labels = Vec::with_capacity(n_s);
    let p_pos_pair = pi_plus * pi_plus / pi_s_of(pi_plus);
    for i in 0..n_s {
        let label = match options.sampler {
            PairSampler::Rejection => loop {
                let a = draw_label(&mut rng, pi_plus);
                let b = draw_label(&mut rng, pi_plus);
                if a == b {
                    break a;
                }
            },
            PairSampler::Stratified => {
                if rng.random_bool(p_pos_pair) {
                    Label::Pos
                } else {
                    Label::Neg
                }
            }
        };
        let (a, b) = pools.draw_two(&mut rng, label)?;
        pooled.row_mut(2 * i).assign(&data.point(a));
        pooled.row_mut(2 * i + 1).assign(&data.point(b));
        pair_labels.push(label);
    }
    let mut u = Array2::<f64>::zeros((n_u, d));
    let mut u_labels = Vec::with_capacity(n_u);
    for i in 0..n_u {
        let label = draw_label(&mut rng, pi_plus);
        let idx = pools.draw_one(&mut rng, label)?;
        u.row_mut(i).assign(&data.point(idx));
        u_labels.push(label);
    }
    SuDataset::new(
        pooled,
        u,
        Some(HiddenLabels {
            s_pairs: pair_labels,
            u_points: u_labels,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn column_mean(x: ArrayView2<f64>) -> ndarray::Array1<f64> {
        x.mean_axis(Axis(0)).unwrap()
    }

    fn toy(n_pos: usize, n_neg: usize) -> LabeledDataset {
        let n = n_pos + n_neg;
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let labels = (0..n)
            .map(|i| if i < n_pos { Label::Pos } else { Label::Neg })
            .collect();
        LabeledDataset::new(features, labels).unwrap()
    }

    #[test]
    fn libsvm_basic() {
        let d = parse_libsvm("+1 1:0.5 3:2.0\n-1 2:1.0").unwrap();
        assert_eq!(d.features(), &array![[0.5, 0.0, 2.0], [0.0, 1.0, 0.0]]);
        assert_eq!(d.labels(), &[Label::Pos, Label::Neg]);
    }

    #[test]
    fn libsvm_empty_and_three_labels() {
        assert!(matches!(parse_libsvm(""), Err(SuError::EmptyInput)));
        assert!(matches!(parse_libsvm("\n  \n"), Err(SuError::EmptyInput)));
        assert!(matches!(
            parse_libsvm("1 1:1\n2 1:2\n3 1:3"),
            Err(SuError::Format(_))
        ));
    }

    #[test]
    fn libsvm_larger_raw_label_is_positive() {
        let d = parse_libsvm("2 1:1\n1 1:2\n2 1:3").unwrap();
        assert_eq!(d.labels(), &[Label::Pos, Label::Neg, Label::Pos]);
        let d = parse_libsvm("0 1:1\n-3 1:2").unwrap();
        assert_eq!(d.labels(), &[Label::Pos, Label::Neg]);
    }

    #[test]
    fn libsvm_errors_carry_line_numbers() {
        for (text, line) in [
            ("+1 1:1\n-1 2:x", 2),
            ("+1 1:1\n\n-1 0:1", 3),
            ("abc 1:1", 1),
            ("+1 1:1\n-1 3:1 2:1", 2),
            ("+1 1-1", 1),
        ] {
            match parse_libsvm(text) {
                Err(SuError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn libsvm_round_trip_keeps_trailing_zero_column() {
        let data = LabeledDataset::new(
            array![[0.0, 1.5, 0.0], [2.0, 0.0, 0.0]],
            vec![Label::Neg, Label::Pos],
        )
        .unwrap();
        let text = write_libsvm(&data);
        assert_eq!(parse_libsvm(&text).unwrap(), data);
    }

    proptest! {
        #[test]
        fn libsvm_round_trip(
            rows in prop::collection::vec(
                (any::<bool>(), prop::collection::vec(prop_oneof![Just(0.0), -1e6..1e6f64], 4)),
                1..12,
            )
        ) {
            let n = rows.len();
            let features = Array2::from_shape_fn((n, 4), |(i, j)| rows[i].1[j]);
            let labels = rows.iter().map(|r| if r.0 { Label::Pos } else { Label::Neg }).collect();
            let data = LabeledDataset::new(features, labels).unwrap();
            prop_assert_eq!(parse_libsvm(&write_libsvm(&data)).unwrap(), data);
        }
    }

    #[test]
    fn labeled_dataset_rejects_bad_input() {
        assert!(LabeledDataset::new(array![[f64::NAN]], vec![Label::Pos]).is_err());
        assert!(LabeledDataset::new(array![[1.0]], vec![]).is_err());
        assert!(LabeledDataset::new(Array2::zeros((0, 2)), vec![]).is_err());
    }

    #[test]
    fn class_prior_guard() {
        assert!(matches!(
            ClassPrior::new(0.5),
            Err(SuError::DegeneratePrior { .. })
        ));
        assert!(ClassPrior::new(0.5004).is_err());
        assert!(ClassPrior::new(0.502).is_ok());
        assert!(ClassPrior::new(0.0).is_err());
        assert!(ClassPrior::new(1.0).is_err());
        let p = ClassPrior::new(0.7).unwrap();
        assert!((p.pi_s() - 0.58).abs() < 1e-15);
        assert!((p.pi_d() - 0.42).abs() < 1e-15);
    }

    #[test]
    fn gaussian_positive_fraction_and_determinism() {
        let spec = SyntheticSpec::isotropic(1, 2.0, 0.5, 3);
        let data = generate_gaussian(&spec, 1_000_000).unwrap();
        assert!((data.positive_fraction() - 0.5).abs() <= 0.002);
        let a = generate_gaussian(&spec, 50).unwrap();
        let b = generate_gaussian(&spec, 50).unwrap();
        assert_eq!(a, b);
        assert_eq!(generate_gaussian(&spec, 1).unwrap().len(), 1);
    }

    #[test]
    fn gaussian_class_moments() {
        let mut spec = SyntheticSpec::isotropic(2, 0.0, 0.3, 8);
        spec.mean_plus = vec![1.0, -2.0];
        spec.covariance = vec![vec![2.0, 0.6], vec![0.6, 1.0]];
        let data = generate_gaussian(&spec, 200_000).unwrap();
        let pos = data.select(&data.class_indices(Label::Pos)).unwrap();
        let m = column_mean(pos.features().view());
        assert!((m[0] - 1.0).abs() < 0.02 && (m[1] + 2.0).abs() < 0.02);
        let c = pos.features() - &m;
        let cov01 = (c.column(0).to_owned() * c.column(1)).mean().unwrap();
        assert!((cov01 - 0.6).abs() < 0.03);
    }

    #[test]
    fn gaussian_rejects_non_pd_covariance() {
        let mut spec = SyntheticSpec::isotropic(2, 1.0, 0.5, 0);
        spec.covariance = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(matches!(
            generate_gaussian(&spec, 10),
            Err(SuError::NotPositiveDefinite { .. })
        ));
    }

    fn positive_pair_fraction(ds: &SuDataset) -> f64 {
        let h = ds.hidden_labels().unwrap();
        h.s_pairs.iter().filter(|&&l| l == Label::Pos).count() as f64 / h.s_pairs.len() as f64
    }

    #[test]
    fn pair_class_ratio_matches_pair_distribution() {
        let data = toy(50, 50);
        for sampler in [PairSampler::Rejection, PairSampler::Stratified] {
            let opts = SamplingOptions {
                sampler,
                replacement: true,
            };
            let ds = sample_su(&data, 0.7, 100_000, 10, 1, &opts).unwrap();
            assert!((positive_pair_fraction(&ds) - 0.49 / 0.58).abs() <= 0.004);
            let ds = sample_su(&data, 0.5, 100_000, 10, 2, &opts).unwrap();
            assert!((positive_pair_fraction(&ds) - 0.5).abs() <= 0.005);
        }
    }

    #[test]
    fn pair_members_share_class_and_are_distinct() {
        let data = toy(3, 4);
        let ds = sample_su(&data, 0.6, 500, 20, 5, &SamplingOptions::default()).unwrap();
        let h = ds.hidden_labels().unwrap();
        for i in 0..ds.n_s() {
            let (a, b) = ds.pair(i);
            assert_ne!(a, b);
            let class_of = |x: ArrayView1<f64>| if (x[0] as usize) / 2 < 3 { Label::Pos } else { Label::Neg };
            assert_eq!(class_of(a), h.s_pairs[i]);
            assert_eq!(class_of(b), h.s_pairs[i]);
        }
        for (i, row) in ds.u_points().rows().into_iter().enumerate() {
            let expected = if (row[0] as usize) / 2 < 3 { Label::Pos } else { Label::Neg };
            assert_eq!(expected, h.u_points[i]);
        }
    }

    #[test]
    fn unlabeled_class_ratio() {
        let data = toy(5, 50);
        let ds = sample_su(&data, 0.7, 1, 100_000, 3, &SamplingOptions::default()).unwrap();
        let h = ds.hidden_labels().unwrap();
        let frac = h.u_points.iter().filter(|&&l| l == Label::Pos).count() as f64 / 1e5;
        assert!((frac - 0.7).abs() < 0.006);
    }

    #[test]
    fn without_replacement_exhaustion_names_class() {
        let data = toy(1, 1);
        let opts = SamplingOptions {
            sampler: PairSampler::Rejection,
            replacement: false,
        };
        match sample_su(&data, 0.9, 100, 1, 0, &opts) {
            Err(SuError::InsufficientData { class, .. }) => {
                let msg = SuError::InsufficientData { class, needed: 2, available: 1 }.to_string();
                assert!(msg.contains("class"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn without_replacement_uses_each_point_once() {
        let data = toy(40, 40);
        let opts = SamplingOptions {
            sampler: PairSampler::Stratified,
            replacement: false,
        };
        let ds = sample_su(&data, 0.6, 10, 20, 4, &opts).unwrap();
        let mut seen: Vec<i64> = ds
            .pooled_s()
            .rows()
            .into_iter()
            .chain(ds.u_points().rows())
            .map(|r| r[0] as i64)
            .collect();
        let n = seen.len();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), n);
    }

    #[test]
    fn sampling_is_deterministic() {
        let data = toy(10, 10);
        let a = sample_su(&data, 0.7, 30, 30, 9, &SamplingOptions::default()).unwrap();
        let b = sample_su(&data, 0.7, 30, 30, 9, &SamplingOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn su_json_round_trip() {
        let data = toy(10, 10);
        let ds = sample_su(&data, 0.7, 5, 7, 1, &SamplingOptions::default()).unwrap();
        let text = ds.to_json().unwrap();
        assert!(text.contains("\"s_pairs\"") && text.contains("\"d\":2"));
        assert_eq!(SuDataset::from_json(&text).unwrap(), ds);
        let stripped = ds.without_hidden_labels();
        let text = stripped.to_json().unwrap();
        assert!(!text.contains("hidden_labels"));
        assert_eq!(SuDataset::from_json(&text).unwrap(), stripped);
    }

    #[test]
    fn su_json_rejects_ragged_points() {
        let bad = r#"{"s_pairs":[[[1,2],[3]]],"u_points":[[1,2]],"d":2}"#;
        assert!(SuDataset::from_json(bad).is_err());
    }

    #[test]
    fn subset_keeps_pairs_whole() {
        let data = toy(10, 10);
        let ds = sample_su(&data, 0.7, 6, 4, 1, &SamplingOptions::default()).unwrap();
        let sub = ds.subset(&[4, 1], &[3]);
        assert_eq!(sub.pair(0), ds.pair(4));
        assert_eq!(sub.pair(1), ds.pair(1));
        assert_eq!(sub.u_points().row(0), ds.u_points().row(3));
        assert_eq!(sub.hidden_labels().unwrap().s_pairs[0], ds.hidden_labels().unwrap().s_pairs[4]);
    }
}

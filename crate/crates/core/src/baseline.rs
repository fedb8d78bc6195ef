//! Two-cluster k-means baseline and the clustering-accuracy metric.
//!
//! The baseline ignores pair structure: it clusters whatever points it is
//! given (typically the unlabeled sample) and calls the larger cluster
//! positive.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::datasets::Label;
use crate::error::{Result, SuError};
use crate::rng::rng_from_seed;

pub const DEFAULT_KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    /// Row `j` is center `j`.
    pub centers: Array2<f64>,
    /// Index of the center whose cluster is labelled `+1`.
    pub positive_center: usize,
    /// Within-cluster sum of squares after each assignment step.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KMeansModel {
    /// Nearest center; ties go to the lower index.
    pub fn assign(&self, x: ArrayView1<f64>) -> usize {
        let d0 = sq_dist(x, self.centers.row(0));
        let d1 = sq_dist(x, self.centers.row(1));
        usize::from(d1 < d0)
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<Label>> {
        if x.ncols() != self.centers.ncols() {
            return Err(SuError::DimensionMismatch {
                expected: self.centers.ncols(),
                got: x.ncols(),
            });
        }
        Ok(x.rows()
            .into_iter()
            .map(|r| if self.assign(r) == self.positive_center { Label::Pos } else { Label::Neg })
            .collect())
    }

    pub fn inertia(&self, x: ArrayView2<f64>) -> f64 {
        x.rows().into_iter().map(|r| sq_dist(r, self.centers.row(self.assign(r)))).sum()
    }
}

/// k-means++ seeding for two centers.
fn seed_centers(x: ArrayView2<f64>, seed: u64) -> Array2<f64> {
    let mut rng = rng_from_seed(seed);
    let n = x.nrows();
    let first = rng.random_range(0..n);
    let d: Vec<f64> = x.rows().into_iter().map(|r| sq_dist(r, x.row(first))).collect();
    let total: f64 = d.iter().sum();
    let mut target = rng.random::<f64>() * total;
    let mut second = n - 1;
    for (i, &di) in d.iter().enumerate() {
        if di > 0.0 && target < di {
            second = i;
            break;
        }
        target -= di;
    }
    // Rounding can leave us on a zero-distance point; take the farthest one.
    if d[second] == 0.0 {
        second = (0..n).max_by(|&a, &b| d[a].total_cmp(&d[b])).expect("non-empty");
    }
    let mut c = Array2::zeros((2, x.ncols()));
    c.row_mut(0).assign(&x.row(first));
    c.row_mut(1).assign(&x.row(second));
    c
}

/// Lloyd's algorithm with k = 2 from k-means++ seeding. Stops at an
/// assignment fixpoint or after `max_iter` assignment steps.
pub fn kmeans2(x: ArrayView2<f64>, seed: u64, max_iter: usize) -> Result<KMeansModel> {
    let n = x.nrows();
    if n == 0 {
        return Err(SuError::EmptyInput);
    }
    if max_iter == 0 {
        return Err(SuError::InvalidArgument("max_iter must be positive".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SuError::InvalidData("non-finite coordinate".into()));
    }
    let first = x.row(0);
    if x.rows().into_iter().all(|r| r == first) {
        return Err(SuError::InvalidData("k-means needs at least two distinct points".into()));
    }

    let mut model = KMeansModel {
        centers: seed_centers(x, seed),
        positive_center: 0,
        inertia_trace: Vec::new(),
        iterations: 0,
    };
    let mut assignment: Vec<usize> = vec![usize::MAX; n];
    for it in 0..max_iter {
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, r) in x.rows().into_iter().enumerate() {
            let j = model.assign(r);
            inertia += sq_dist(r, model.centers.row(j));
            if assignment[i] != j {
                assignment[i] = j;
                changed = true;
            }
        }
        model.inertia_trace.push(inertia);
        model.iterations = it + 1;
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros(model.centers.raw_dim());
        let mut counts = [0usize; 2];
        for (i, r) in x.rows().into_iter().enumerate() {
            let mut row = sums.row_mut(assignment[i]);
            row += &r;
            counts[assignment[i]] += 1;
        }
        for j in 0..2 {
            // An empty cluster keeps its center.
            if counts[j] > 0 {
                let mean: Array1<f64> = &sums.row(j) / counts[j] as f64;
                model.centers.row_mut(j).assign(&mean);
            }
        }
    }
    let n_second = assignment.iter().filter(|&&a| a == 1).count();
    model.positive_center = usize::from(n_second > n - n_second);
    Ok(model)
}

/// `1 - min(r, 1 - r)` for error rate `r`; invariant to a global flip.
pub fn clustering_accuracy(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(SuError::EmptyInput);
    }
    if predicted.len() != truth.len() {
        return Err(SuError::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let errors = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    // Counting in integers keeps the flip invariance exact.
    let worse = errors.min(truth.len() - errors);
    Ok(1.0 - worse as f64 / truth.len() as f64)
}

/// Plain misclassification rate.
pub fn error_rate(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(SuError::EmptyInput);
    }
    if predicted.len() != truth.len() {
        return Err(SuError::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    Ok(predicted.iter().zip(truth).filter(|(p, t)| p != t).count() as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_gaussian, SyntheticSpec};
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn two_points_become_the_centers() {
        let x = array![[0.0], [10.0]];
        for seed in 0..10 {
            let m = kmeans2(x.view(), seed, 100).unwrap();
            let mut c: Vec<f64> = m.centers.column(0).to_vec();
            c.sort_by(f64::total_cmp);
            assert_eq!(c, vec![0.0, 10.0]);
        }
    }

    #[test]
    fn inertia_is_non_increasing() {
        let data = generate_gaussian(&SyntheticSpec::isotropic(3, 1.0, 0.6, 8), 400).unwrap();
        for seed in 0..20 {
            let m = kmeans2(data.features().view(), seed, 300).unwrap();
            for w in m.inertia_trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", m.inertia_trace);
            }
            let last = *m.inertia_trace.last().unwrap();
            assert!((m.inertia(data.features().view()) - last).abs() <= 1e-9 * last);
        }
    }

    #[test]
    fn separated_blobs_are_recovered() {
        // Means 10 sigma apart.
        let data = generate_gaussian(&SyntheticSpec::isotropic(2, 10.0, 0.5, 3), 500).unwrap();
        let m = kmeans2(data.features().view(), 1, 300).unwrap();
        let pred = m.predict(data.features().view()).unwrap();
        assert!(clustering_accuracy(&pred, data.labels()).unwrap() >= 0.99);
    }

    #[test]
    fn larger_cluster_is_positive() {
        let x = array![[0.0], [0.1], [0.2], [9.0]];
        let m = kmeans2(x.view(), 5, 100).unwrap();
        let pred = m.predict(x.view()).unwrap();
        assert_eq!(pred, vec![Label::Pos, Label::Pos, Label::Pos, Label::Neg]);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = generate_gaussian(&SyntheticSpec::isotropic(2, 1.0, 0.5, 4), 300).unwrap();
        let a = kmeans2(data.features().view(), 7, 300).unwrap();
        let b = kmeans2(data.features().view(), 7, 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let m = KMeansModel {
            centers: array![[-1.0], [1.0]],
            positive_center: 1,
            inertia_trace: vec![],
            iterations: 0,
        };
        assert_eq!(m.assign(array![0.0].view()), 0);
    }

    #[test]
    fn degenerate_inputs() {
        let x = Array2::from_elem((5, 2), 3.0);
        assert!(matches!(kmeans2(x.view(), 0, 10), Err(SuError::InvalidData(_))));
        assert!(matches!(kmeans2(Array2::<f64>::zeros((0, 2)).view(), 0, 10), Err(SuError::EmptyInput)));
        assert!(clustering_accuracy(&[], &[]).is_err());
        assert!(clustering_accuracy(&[Label::Pos], &[]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        use Label::*;
        let truth = [Pos, Neg, Pos, Neg, Pos, Neg, Pos, Neg, Pos, Neg];
        assert_eq!(clustering_accuracy(&truth, &truth).unwrap(), 1.0);
        let flipped: Vec<Label> = truth.iter().map(|l| l.flip()).collect();
        assert_eq!(clustering_accuracy(&flipped, &truth).unwrap(), 1.0);
        let mut three_wrong = truth;
        for l in three_wrong.iter_mut().take(3) {
            *l = l.flip();
        }
        assert!((clustering_accuracy(&three_wrong, &truth).unwrap() - 0.7).abs() < 1e-15);
        assert!((error_rate(&three_wrong, &truth).unwrap() - 0.3).abs() < 1e-15);
    }

    fn labels(bits: &[bool]) -> Vec<Label> {
        bits.iter().map(|&b| if b { Label::Pos } else { Label::Neg }).collect()
    }

    proptest! {
        #[test]
        fn accuracy_is_flip_invariant_and_at_least_half(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
            let (p, t): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let (p, t) = (labels(&p), labels(&t));
            let a = clustering_accuracy(&p, &t).unwrap();
            let flipped: Vec<Label> = p.iter().map(|l| l.flip()).collect();
            prop_assert_eq!(a, clustering_accuracy(&flipped, &t).unwrap());
            prop_assert!((0.5..=1.0).contains(&a));
        }
    }
}

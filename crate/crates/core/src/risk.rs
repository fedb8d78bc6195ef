//! Risk functionals on precomputed scores.
//!
//! Pair scores are interleaved: `s_scores[2i]` and `s_scores[2i + 1]` are the
//! scores of the two members of pair `i`. `pi_S` is always derived from the
//! prior, never passed separately. SU risk values may be negative; the
//! corrected losses are signed and no clamping is applied.

use ndarray::Array1;

use crate::datasets::{pi_s_of, ClassPrior, Label};
use crate::error::{Result, SuError};
use crate::losses::{CorrectedLosses, LossKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub s_scores: Array1<f64>,
    pub u_scores: Array1<f64>,
}

impl ScoreVector {
    pub fn new(s_scores: Array1<f64>, u_scores: Array1<f64>) -> Result<Self> {
        let sv = Self { s_scores, u_scores };
        sv.validate()?;
        Ok(sv)
    }

    pub fn n_s(&self) -> usize {
        self.s_scores.len() / 2
    }

    pub fn n_u(&self) -> usize {
        self.u_scores.len()
    }

    fn validate(&self) -> Result<()> {
        if self.s_scores.len() % 2 != 0 {
            return Err(SuError::InvalidData(
                "pair scores must come in interleaved pairs".into(),
            ));
        }
        if self.s_scores.is_empty() || self.u_scores.is_empty() {
            return Err(SuError::EmptyInput);
        }
        if self.s_scores.iter().chain(self.u_scores.iter()).any(|v| !v.is_finite()) {
            return Err(SuError::InvalidData("scores must be finite".into()));
        }
        Ok(())
    }
}

/// `pi_S / (2 n_S) * sum l_s(s_scores)`.
pub fn su_s_term(scores: &ScoreVector, losses: &CorrectedLosses) -> f64 {
    let sum: f64 = scores.s_scores.iter().map(|&z| losses.l_s(z)).sum();
    losses.prior.pi_s() * sum / scores.s_scores.len() as f64
}

/// `1 / n_U * sum l_u(u_scores)`.
pub fn su_u_term(scores: &ScoreVector, losses: &CorrectedLosses) -> f64 {
    let sum: f64 = scores.u_scores.iter().map(|&z| losses.l_u(z)).sum();
    sum / scores.u_scores.len() as f64
}

/// The unbiased SU risk estimate.
pub fn empirical_su_risk(scores: &ScoreVector, kind: LossKind, prior: ClassPrior) -> Result<f64> {
    scores.validate()?;
    let losses = CorrectedLosses::new(kind, prior);
    Ok(su_s_term(scores, &losses) + su_u_term(scores, &losses))
}

/// `pi_S / n_S * sum_i [alpha l_s(f(x_i)) + (1 - alpha) l_s(f(x'_i))]`.
/// At `alpha = 1/2` this is the pair term of [`empirical_su_risk`].
pub fn alpha_weighted_s_term(
    scores: &ScoreVector,
    kind: LossKind,
    prior: ClassPrior,
    alpha: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SuError::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    scores.validate()?;
    let losses = CorrectedLosses::new(kind, prior);
    let s = &scores.s_scores;
    let n_s = scores.n_s();
    let sum: f64 = (0..n_s)
        .map(|i| alpha * losses.l_s(s[2 * i]) + (1.0 - alpha) * losses.l_s(s[2 * i + 1]))
        .sum();
    Ok(prior.pi_s() * sum / n_s as f64)
}

/// Mean of `l(score, label)` over labeled points.
pub fn supervised_risk(scores: &[f64], labels: &[Label], kind: LossKind) -> Result<f64> {
    if scores.is_empty() {
        return Err(SuError::EmptyInput);
    }
    if scores.len() != labels.len() {
        return Err(SuError::DimensionMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let sum: f64 = scores.iter().zip(labels).map(|(&z, &t)| kind.eval(z, t)).sum();
    Ok(sum / scores.len() as f64)
}

/// Risk expressed through positive points, similar pairs and dissimilar
/// pairs (each of the last two interleaved):
///
/// ```text
/// pi_plus / (2 pi_minus) E_+[l~]
///   + pi_S E_S[-pi_plus / (2 pi_minus) avg l(., +1) + (1 + pi_minus) / (2 pi_minus) avg l(., -1)]
///   + pi_D E_D[(l(f(x), -1) + l(f(x'), +1)) / 2]
/// ```
///
/// with `pi_D = 2 pi_plus pi_minus`. Equal to the supervised risk in
/// expectation; used as an independent check of the SU risk.
pub fn psd_risk(
    positive_scores: &[f64],
    s_scores: &[f64],
    d_scores: &[f64],
    kind: LossKind,
    pi_plus: f64,
) -> Result<f64> {
    if positive_scores.is_empty() || s_scores.is_empty() || d_scores.is_empty() {
        return Err(SuError::EmptyInput);
    }
    if s_scores.len() % 2 != 0 || d_scores.len() % 2 != 0 {
        return Err(SuError::InvalidData("pair scores must be interleaved".into()));
    }
    if !(pi_plus > 0.0 && pi_plus < 1.0) {
        return Err(SuError::InvalidArgument(format!(
            "class prior must lie in (0, 1), got {pi_plus}"
        )));
    }
    let pi_minus = 1.0 - pi_plus;
    let pi_s = pi_s_of(pi_plus);
    let pi_d = 2.0 * pi_plus * pi_minus;
    let pos = |z: f64| kind.eval(z, Label::Pos);
    let neg = |z: f64| kind.eval(z, Label::Neg);

    let p_term = positive_scores.iter().map(|&z| kind.tilde(z)).sum::<f64>()
        / positive_scores.len() as f64;
    let n_s = s_scores.len() / 2;
    let s_term = (0..n_s)
        .map(|i| {
            let (a, b) = (s_scores[2 * i], s_scores[2 * i + 1]);
            -pi_plus / (2.0 * pi_minus) * 0.5 * (pos(a) + pos(b))
                + (1.0 + pi_minus) / (2.0 * pi_minus) * 0.5 * (neg(a) + neg(b))
        })
        .sum::<f64>()
        / n_s as f64;
    let n_d = d_scores.len() / 2;
    let d_term = (0..n_d)
        .map(|i| 0.5 * (neg(d_scores[2 * i]) + pos(d_scores[2 * i + 1])))
        .sum::<f64>()
        / n_d as f64;
    Ok(pi_plus / (2.0 * pi_minus) * p_term + pi_s * s_term + pi_d * d_term)
}

/// SU risk under the zero-one loss; the model-selection criterion.
pub fn su_zero_one_risk(scores: &ScoreVector, prior: ClassPrior) -> Result<f64> {
    empirical_su_risk(scores, LossKind::ZeroOne, prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prior(p: f64) -> ClassPrior {
        ClassPrior::new(p).unwrap()
    }

    #[test]
    fn su_risk_small_examples() {
        let sv = ScoreVector::new(array![0.0, 0.0], array![0.0]).unwrap();
        let r = empirical_su_risk(&sv, LossKind::Squared, prior(0.75)).unwrap();
        assert!((r - 0.25).abs() < 1e-15);
        for p in [0.1, 0.3, 0.7, 0.95] {
            let sv = ScoreVector::new(Array1::zeros(6), Array1::zeros(4)).unwrap();
            let r = empirical_su_risk(&sv, LossKind::ZeroOne, prior(p)).unwrap();
            assert!((r - 0.5).abs() < 1e-12);
            assert_eq!(su_zero_one_risk(&sv, prior(p)).unwrap(), r);
        }
    }

    #[test]
    fn su_risk_matches_direct_summation() {
        let s = [0.3, -1.2, 2.0, 0.7];
        let u = [-0.4, 1.1, 0.05];
        let (pp, pm) = (0.7, 0.3);
        let pi_s = pp * pp + pm * pm;
        let psi = |m: f64| 0.25 * (m - 1.0) * (m - 1.0);
        let mut expected = 0.0;
        for z in s {
            expected += pi_s / 4.0 * (psi(z) - psi(-z)) / (2.0 * pp - 1.0);
        }
        for z in u {
            expected += (-pm * psi(z) + pp * psi(-z)) / (2.0 * pp - 1.0) / 3.0;
        }
        let sv = ScoreVector::new(Array1::from(s.to_vec()), Array1::from(u.to_vec())).unwrap();
        let got = empirical_su_risk(&sv, LossKind::Squared, prior(0.7)).unwrap();
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn su_risk_rejects_empty_sets() {
        assert!(ScoreVector::new(array![], array![1.0]).is_err());
        assert!(ScoreVector::new(array![1.0, 2.0], array![]).is_err());
        assert!(ScoreVector::new(array![1.0], array![1.0]).is_err());
    }

    #[test]
    fn alpha_term_examples() {
        let sv = ScoreVector::new(array![0.4, -1.0, 2.5, 0.1], array![0.0]).unwrap();
        let p = prior(0.7);
        let losses = CorrectedLosses::new(LossKind::Squared, p);
        let half = alpha_weighted_s_term(&sv, LossKind::Squared, p, 0.5).unwrap();
        assert!((half - su_s_term(&sv, &losses)).abs() < 1e-15);
        let one = alpha_weighted_s_term(&sv, LossKind::Squared, p, 1.0).unwrap();
        assert!((one - p.pi_s() * (losses.l_s(0.4) + losses.l_s(2.5)) / 2.0).abs() < 1e-15);
        let a = 0.3;
        let direct = p.pi_s() / 2.0
            * (a * losses.l_s(0.4) + (1.0 - a) * losses.l_s(-1.0) + a * losses.l_s(2.5) + (1.0 - a) * losses.l_s(0.1));
        let got = alpha_weighted_s_term(&sv, LossKind::Squared, p, a).unwrap();
        assert!((got - direct).abs() < 1e-15);
        assert!(alpha_weighted_s_term(&sv, LossKind::Squared, p, 1.5).is_err());
        assert!(alpha_weighted_s_term(&sv, LossKind::Squared, p, -0.1).is_err());
    }

    #[test]
    fn supervised_examples() {
        let r = supervised_risk(&[1.0, -1.0], &[Label::Pos, Label::Neg], LossKind::Squared).unwrap();
        assert_eq!(r, 0.0);
        let r = supervised_risk(&[0.0], &[Label::Pos], LossKind::ZeroOne).unwrap();
        assert_eq!(r, 0.5);
        assert!(supervised_risk(&[], &[], LossKind::Squared).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scores: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
        let labels: Vec<Label> = (0..20).map(|i| if i % 3 == 0 { Label::Neg } else { Label::Pos }).collect();
        let direct: f64 = scores
            .iter()
            .zip(&labels)
            .map(|(z, t)| (1.0 + (-(t.sign() * z)).exp()).ln())
            .sum::<f64>()
            / 20.0;
        let got = supervised_risk(&scores, &labels, LossKind::Logistic).unwrap();
        assert!((got - direct).abs() < 1e-13);
    }

    #[test]
    fn psd_risk_rejects_degenerate_prior_and_empty_sets() {
        assert!(psd_risk(&[0.0], &[0.0, 0.0], &[0.0, 0.0], LossKind::Squared, 1.0).is_err());
        assert!(psd_risk(&[], &[0.0, 0.0], &[0.0, 0.0], LossKind::Squared, 0.7).is_err());
        assert!(psd_risk(&[0.0], &[0.0, 0.0], &[], LossKind::Squared, 0.7).is_err());
    }

    #[test]
    fn zero_one_proxy_prefers_correct_scores() {
        // All pairs positive, U drawn with pi_plus = 0.7.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s: Vec<f64> = (0..40).map(|_| rng.random_range(0.5..2.0)).collect();
        let u: Vec<f64> = (0..50)
            .map(|_| {
                let m = rng.random_range(0.5..2.0);
                if rng.random_bool(0.7) { m } else { -m }
            })
            .collect();
        let good = ScoreVector::new(Array1::from(s.clone()), Array1::from(u.clone())).unwrap();
        let bad = ScoreVector::new(-Array1::from(s), -Array1::from(u)).unwrap();
        let p = prior(0.7);
        assert!(su_zero_one_risk(&good, p).unwrap() < su_zero_one_risk(&bad, p).unwrap());
    }

    proptest! {
        #[test]
        fn u_term_is_count_weighted_over_splits(
            u in prop::collection::vec(-5.0..5.0f64, 2..40),
            split in 1usize..39,
            pi in 0.05..0.45f64,
        ) {
            let split = split.min(u.len() - 1);
            let s = Array1::from(vec![0.3, -0.2]);
            let losses = CorrectedLosses::new(LossKind::Logistic, prior(pi));
            let whole = ScoreVector::new(s.clone(), Array1::from(u.clone())).unwrap();
            let a = ScoreVector::new(s.clone(), Array1::from(u[..split].to_vec())).unwrap();
            let b = ScoreVector::new(s, Array1::from(u[split..].to_vec())).unwrap();
            let n = u.len() as f64;
            let combined = (split as f64 * su_u_term(&a, &losses) + (n - split as f64) * su_u_term(&b, &losses)) / n;
            prop_assert!((combined - su_u_term(&whole, &losses)).abs() <= 1e-10);
        }
    }
}

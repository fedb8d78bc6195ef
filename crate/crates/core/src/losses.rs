//! Margin losses `l(z, t) = psi(t z)` and their prior-corrected SU forms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datasets::{ClassPrior, Label};
use crate::error::{Result, SuError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// `1/4 (m - 1)^2`
    Squared,
    /// `log(1 + exp(-m))`
    Logistic,
    /// `max(-m, max(0, 1/2 - m/2))`
    DoubleHinge,
    /// `max(0, 1 - m)`
    Hinge,
    /// `(1 - sign(m)) / 2` with `sign(0) = 0`; evaluation only.
    ZeroOne,
}

impl LossKind {
    pub const ALL: [LossKind; 5] = [
        LossKind::Squared,
        LossKind::Logistic,
        LossKind::DoubleHinge,
        LossKind::Hinge,
        LossKind::ZeroOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Squared => "squared",
            LossKind::Logistic => "logistic",
            LossKind::DoubleHinge => "double-hinge",
            LossKind::Hinge => "hinge",
            LossKind::ZeroOne => "zero-one",
        }
    }

    /// Value at margin `m`.
    pub fn psi(self, m: f64) -> f64 {
        match self {
            LossKind::Squared => 0.25 * (m - 1.0) * (m - 1.0),
            LossKind::Logistic => softplus(-m),
            LossKind::DoubleHinge => (-m).max((0.5 - 0.5 * m).max(0.0)),
            LossKind::Hinge => (1.0 - m).max(0.0),
            LossKind::ZeroOne => 0.5 * (1.0 - sign(m)),
        }
    }

    /// Derivative in `m`; at kinks the midpoint of the one-sided derivatives.
    pub fn dpsi(self, m: f64) -> f64 {
        match self {
            LossKind::Squared => 0.5 * (m - 1.0),
            LossKind::Logistic => -sigmoid(-m),
            LossKind::DoubleHinge => {
                if m < -1.0 {
                    -1.0
                } else if m == -1.0 {
                    -0.75
                } else if m < 1.0 {
                    -0.5
                } else if m == 1.0 {
                    -0.25
                } else {
                    0.0
                }
            }
            LossKind::Hinge => {
                if m < 1.0 {
                    -1.0
                } else if m == 1.0 {
                    -0.5
                } else {
                    0.0
                }
            }
            LossKind::ZeroOne => 0.0,
        }
    }

    /// Margins where `psi` is not differentiable.
    pub fn kinks(self) -> &'static [f64] {
        match self {
            LossKind::DoubleHinge => &[-1.0, 1.0],
            LossKind::Hinge => &[1.0],
            LossKind::ZeroOne => &[0.0],
            LossKind::Squared | LossKind::Logistic => &[],
        }
    }

    /// Whether `l(z, +1) - l(z, -1) = -z`, the condition under which the
    /// SU objective of a linear-in-parameter model is convex.
    pub fn satisfies_linear_odd(self) -> bool {
        matches!(
            self,
            LossKind::Squared | LossKind::Logistic | LossKind::DoubleHinge
        )
    }

    pub fn eval(self, z: f64, t: Label) -> f64 {
        self.psi(t.sign() * z)
    }

    /// `l(z, +1) - l(z, -1)`.
    pub fn tilde(self, z: f64) -> f64 {
        self.psi(z) - self.psi(-z)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = SuError;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                SuError::InvalidArgument(format!(
                    "unknown loss '{s}' (expected squared, logistic, double-hinge, hinge or zero-one)"
                ))
            })
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The pair of corrected losses applied to pooled pair members (`l_s`) and
/// to unlabeled points (`l_u`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedLosses {
    pub kind: LossKind,
    pub prior: ClassPrior,
}

impl CorrectedLosses {
    pub fn new(kind: LossKind, prior: ClassPrior) -> Self {
        Self { kind, prior }
    }

    /// Validates `pi_plus` against the default guard band around `1/2`.
    pub fn for_prior(kind: LossKind, pi_plus: f64) -> Result<Self> {
        Ok(Self::new(kind, ClassPrior::new(pi_plus)?))
    }

    /// `(l(z, +1) - l(z, -1)) / (2 pi_plus - 1)`
    pub fn l_s(&self, z: f64) -> f64 {
        self.kind.tilde(z) / self.prior.skew()
    }

    /// `(-pi_minus l(z, +1) + pi_plus l(z, -1)) / (2 pi_plus - 1)`
    pub fn l_u(&self, z: f64) -> f64 {
        let p = &self.prior;
        (-p.pi_minus() * self.kind.psi(z) + p.pi_plus() * self.kind.psi(-z)) / p.skew()
    }

    pub fn dl_s(&self, z: f64) -> f64 {
        (self.kind.dpsi(z) + self.kind.dpsi(-z)) / self.prior.skew()
    }

    pub fn dl_u(&self, z: f64) -> f64 {
        let p = &self.prior;
        (-p.pi_minus() * self.kind.dpsi(z) - p.pi_plus() * self.kind.dpsi(-z)) / p.skew()
    }
}

//! # sulearn
//!
//! Binary classification from similar pairs and unlabeled points.
//!
//! A similar pair is two points known to share a class, without saying which
//! class. Given `n_S` such pairs, `n_U` unlabeled points and the class prior
//! `pi_plus`, the SU risk
//!
//! ```text
//! R_SU(f) = pi_S / (2 n_S) * sum_i L_S(f(x~_i)) + 1 / n_U * sum_i L_U(f(x_i))
//! ```
//!
//! is an unbiased estimate of the ordinary supervised risk, where
//! `pi_S = pi_plus^2 + pi_minus^2` and `L_S`, `L_U` are prior-corrected
//! versions of a margin loss (see [`losses::CorrectedLosses`]). For losses
//! with `l(z, +1) - l(z, -1) = -z` the regularized objective is convex in
//! the weights of a linear-in-parameter model, which gives the trainers in
//! [`train`]: a closed form for the squared loss, a QP for the double hinge
//! loss and gradient descent for the logistic loss.
//!
//! When the prior is unknown it can be estimated from the same data
//! ([`prior`]), because the unlabeled marginal contains the pooled pair
//! marginal as a mixture component of weight `pi_S`.
//!
//! Modules:
//!
//! - [`datasets`]: labeled data, LIBSVM I/O, Gaussian generator, SU sampling
//! - [`losses`], [`risk`]: margin losses and risk functionals
//! - [`numkit`]: Cholesky solves and an interior-point QP solver
//! - [`train`]: basis expansion, models and trainers
//! - [`prior`]: class-prior estimation by mixture proportion estimation
//! - [`modelselect`]: k-fold cross-validation with the zero-one SU risk
//! - [`baseline`]: 2-means clustering and clustering accuracy
//! - [`experiment`]: synthetic sweeps and benchmarks producing CSV rows

pub mod baseline;
pub mod datasets;
pub mod error;
pub mod experiment;
pub mod losses;
pub mod modelselect;
pub mod numkit;
pub mod prior;
pub mod rng;
pub mod risk;
pub mod train;

pub use datasets::{ClassPrior, Label, LabeledDataset, SuDataset, SuSamples};
pub use error::{Result, SuError};
pub use losses::{CorrectedLosses, LossKind};

pub use train::{BasisSpec, LinearModel, TrainConfig};

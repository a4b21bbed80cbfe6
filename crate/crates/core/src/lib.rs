//! Least-squares polynomial fitting and extrapolation of analytic functions
//! from perturbed, equally spaced samples.
//!
//! A degree-`M` Chebyshev fit to `N + 1` equispaced samples is well
//! conditioned as long as `M <= sqrt(N)/2`. [`extrapolator::optimal_degree`]
//! picks `M` from the Bernstein parameter `rho`, the perturbation level and
//! `N`; [`extrapolator::extrapolate`] evaluates the fit to the right of
//! `x = 1` together with computable error bounds.
//!
//! ```
//! use stable_extrap::{extrapolate, ProblemParams, SampleSet};
//!
//! let f = |x: f64| 1.0 / (1.0 + x * x);
//! let samples = SampleSet::from_fn(1600, f).unwrap();
//! let params = ProblemParams::new(1600, 1.0 + 2f64.sqrt(), 1e-14, 1.0).unwrap();
//! let report = extrapolate(&samples, &params, &[1.1]).unwrap();
//! let p = &report.points[0];
//! assert!((p.value - f(1.1)).abs() <= p.bound_explicit);
//! ```
//!
//! The normal equations are assembled in `O(M^2)` operations by
//! [`fastgram::gram_fast`]; [`vandermonde::gram_naive`] is the `O(M^2 N)`
//! reference. Loops over samples run on rayon when the `parallel` feature
//! (on by default) is enabled; every reduction uses a fixed pairwise split,
//! so results are identical with and without it.

pub mod basis;
pub mod error;
pub mod experiments;
pub mod extrapolator;
pub mod fastgram;
pub mod linalg;
mod par;
pub mod samples;
pub mod solver;
pub mod vandermonde;
pub mod verify;

pub use basis::{ChebyshevSeries, Grid, GridKind, LegendreSeries};
pub use error::{Error, Result};
pub use extrapolator::{
    extrapolate, extrapolate_with, optimal_degree, r_alpha, BoundKind, ExtrapolationOptions, ExtrapolationReport,
    MinimaxWitness, ProblemParams, Regime,
};
pub use fastgram::{gram_fast, BernoulliWeights, GramMethod, GramSystem};
pub use par::{pairwise_sum, Execution};
pub use samples::SampleSet;
pub use solver::{fit, FitOptions, FitResult, FitWarning, FittedSeries};
pub use vandermonde::{Basis, DesignMatrix, SpectralReport};
pub use verify::{CheckResult, Suite, SuiteParams};

//! Least-squares fits through the normal equations, and the Legendre to
//! Chebyshev change of basis.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{ChebyshevSeries, LegendreSeries};
use crate::error::{Error, Result};
use crate::fastgram::{gram_fast_with, rhs_with, BernoulliWeights, GramMethod};
use crate::linalg::{cholesky_solve, perron_bracket, symmetric_eigenvalues, PerronBracket};
use crate::par::Execution;
use crate::samples::SampleSet;
use crate::vandermonde::{gram_naive_on_grid, spectral_report, Basis};

/// `Psi(i) = Gamma(i + 1/2) / Gamma(i + 1)` by the ratio recurrence
/// `Psi(i+1) = Psi(i) (i + 1/2) / (i + 1)`; never forms a Gamma value.
pub fn psi(i: usize) -> f64 {
    let mut v = std::f64::consts::PI.sqrt();
    for k in 0..i {
        let kf = k as f64;
        v *= (kf + 0.5) / (kf + 1.0);
    }
    v
}

/// `Psi(i) / sqrt(pi)` for `i < len`.
fn scaled_psi_table(len: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(len);
    let mut v = 1.0;
    for k in 0..len {
        t.push(v);
        let kf = k as f64;
        v *= (kf + 0.5) / (kf + 1.0);
    }
    t
}

/// Upper-triangular `S` with `c_cheb = S c_leg`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChangeMatrix {
    pub entries: DMatrix<f64>,
}

/// Dimension above which `||S||_2` comes from power iteration instead of a
/// full Jacobi spectrum.
const JACOBI_NORM_LIMIT: usize = 200;

impl BasisChangeMatrix {
    pub fn degree(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        (&self.entries * DVector::from_column_slice(c)).iter().copied().collect()
    }

    pub fn apply_transpose(&self, c: &[f64]) -> Vec<f64> {
        (self.entries.tr_mul(&DVector::from_column_slice(c))).iter().copied().collect()
    }

    /// `(S + S^T) / 2`.
    pub fn symmetric_part(&self) -> DMatrix<f64> {
        (&self.entries + self.entries.transpose()) * 0.5
    }

    /// Bracket on `||S||_2^2 = lambda_max(S^T S)`. `S^T S` has nonnegative
    /// entries, so the Collatz–Wielandt value is a guaranteed upper bound.
    pub fn norm2_squared_bracket(&self) -> PerronBracket {
        let dim = self.entries.nrows();
        let s = &self.entries;
        perron_bracket(
            dim,
            |v, out| {
                let sv = s * DVector::from_column_slice(v);
                let stsv = s.tr_mul(&sv);
                out.copy_from_slice(stsv.as_slice());
            },
            1e-13,
            200_000,
        )
    }

    /// `||S||_2`, from the Jacobi spectrum of `S^T S` for moderate sizes and
    /// from the Collatz–Wielandt upper bound above that.
    pub fn norm2(&self) -> f64 {
        if self.entries.nrows() <= JACOBI_NORM_LIMIT {
            let sts = self.entries.tr_mul(&self.entries);
            let sts = (&sts + sts.transpose()) * 0.5;
            let eig = symmetric_eigenvalues(&sts).expect("S^T S is square and symmetric");
            eig[0].max(0.0).sqrt()
        } else {
            self.norm2_squared_bracket().upper.sqrt()
        }
    }
}

/// Builds `S` entrywise:
/// `S_{0j} = Psi(j/2)^2 / pi` for even `j`, and
/// `S_{ij} = (2/pi) Psi((j-i)/2) Psi((j+i)/2)` for `0 < i <= j`, `i + j` even.
pub fn basis_change_matrix(m: usize) -> BasisChangeMatrix {
    let dim = m + 1;
    // The 1/pi factors cancel against Psi(0)^2 = pi.
    let psi = scaled_psi_table(dim);
    let mut s = DMatrix::zeros(dim, dim);
    for j in (0..dim).step_by(2) {
        s[(0, j)] = psi[j / 2] * psi[j / 2];
    }
    for i in 1..dim {
        for j in (i..dim).step_by(2) {
            s[(i, j)] = 2.0 * psi[(j - i) / 2] * psi[(j + i) / 2];
        }
    }
    BasisChangeMatrix { entries: s }
}

pub fn legendre_to_chebyshev(series: &LegendreSeries) -> ChebyshevSeries {
    let s = basis_change_matrix(series.degree());
    ChebyshevSeries::new(s.apply(series.coeffs())).expect("nonempty")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", content = "coeffs", rename_all = "lowercase")]
pub enum FittedSeries {
    Chebyshev(ChebyshevSeries),
    Legendre(LegendreSeries),
}

impl FittedSeries {
    pub fn coeffs(&self) -> &[f64] {
        match self {
            FittedSeries::Chebyshev(s) => s.coeffs(),
            FittedSeries::Legendre(s) => s.coeffs(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FittedSeries::Chebyshev(s) => s.eval(x),
            FittedSeries::Legendre(s) => s.eval(x),
        }
    }

    pub fn basis(&self) -> Basis {
        match self {
            FittedSeries::Chebyshev(_) => Basis::Chebyshev,
            FittedSeries::Legendre(_) => Basis::Legendre,
        }
    }

    pub fn to_chebyshev(&self) -> ChebyshevSeries {
        match self {
            FittedSeries::Chebyshev(s) => s.clone(),
            FittedSeries::Legendre(s) => legendre_to_chebyshev(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    /// `M > sqrt(N) / 2`: the conditioning guarantees no longer apply.
    BeyondOversamplingLimit { m: usize, limit: f64 },
    /// The Gram matrix was shifted by `shift * I` before factorization.
    ShiftedGram { shift: f64 },
    /// `||G c - b|| / ||b||` stayed above `1e-10` after one refinement step.
    ResidualCheck { ratio: f64 },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::BeyondOversamplingLimit { m, limit } => {
                write!(f, "M = {m} exceeds sqrt(N)/2 = {limit:.3}; conditioning is not guaranteed")
            }
            FitWarning::ShiftedGram { shift } => {
                write!(f, "Gram matrix shifted by {shift:e} before factorization")
            }
            FitWarning::ResidualCheck { ratio } => {
                write!(f, "normal-equation residual ratio {ratio:e} exceeds 1e-10")
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub basis: Basis,
    pub gram: GramMethod,
    /// Compute `kappa_2` of the Gram matrix (one Jacobi eigensolve).
    pub estimate_condition: bool,
    pub weights: BernoulliWeights,
    pub exec: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            basis: Basis::Chebyshev,
            gram: GramMethod::Fast,
            estimate_condition: false,
            weights: BernoulliWeights::default(),
            exec: Execution::default(),
        }
    }
}

impl FitOptions {
    pub fn basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    pub fn gram(mut self, gram: GramMethod) -> Self {
        self.gram = gram;
        self
    }

    pub fn estimate_condition(mut self, on: bool) -> Self {
        self.estimate_condition = on;
        self
    }

    pub fn exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub series: FittedSeries,
    pub m: usize,
    pub n: usize,
    /// `kappa_2(G)` of the normal-equation matrix, when requested.
    pub gram_cond_estimate: Option<f64>,
    pub method: GramMethod,
    pub warnings: Vec<FitWarning>,
    /// Final `||G c - b|| / ||b||`.
    pub residual_ratio: f64,
}

impl FitResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.series.eval(x)
    }
}

const RESIDUAL_TOL: f64 = 1e-10;
const SHIFT_FACTOR: f64 = 1e-14;

/// Normal-equation matrix and right-hand side in the requested basis.
fn normal_equations(samples: &SampleSet, m: usize, opts: &FitOptions) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let grid = samples.grid();
    let y = samples.values();
    let n = samples.n();
    match (opts.basis, opts.gram) {
        (basis, GramMethod::Naive) => {
            let g = gram_naive_on_grid(grid, m, basis, opts.exec);
            let b = rhs_with(grid, y, m, basis, opts.exec)?;
            Ok((g, b))
        }
        (Basis::Chebyshev, GramMethod::Fast) => {
            let g = gram_fast_with(m, n, &opts.weights, opts.exec)?.matrix;
            let b = rhs_with(grid, y, m, Basis::Chebyshev, opts.exec)?;
            Ok((g, b))
        }
        (Basis::Legendre, GramMethod::Fast) => {
            // T S = P, so P^T P = S^T (T^T T) S and P^T y = S^T (T^T y).
            let s = basis_change_matrix(m);
            let gt = gram_fast_with(m, n, &opts.weights, opts.exec)?.matrix;
            let gp = s.entries.transpose() * gt * &s.entries;
            let gp = (&gp + gp.transpose()) * 0.5;
            let bt = rhs_with(grid, y, m, Basis::Chebyshev, opts.exec)?;
            Ok((gp, s.apply_transpose(&bt)))
        }
    }
}

fn residual(g: &DMatrix<f64>, c: &[f64], b: &[f64]) -> Vec<f64> {
    let gc = g * DVector::from_column_slice(c);
    b.iter().zip(gc.iter()).map(|(bi, gi)| bi - gi).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Degree-`M` least-squares fit to the samples via the normal equations.
pub fn fit(samples: &SampleSet, m: usize, opts: FitOptions) -> Result<FitResult> {
    let n = samples.n();
    if m > n {
        return Err(Error::DegreeExceedsSamples { m, n });
    }
    let mut warnings = Vec::new();
    let limit = 0.5 * (n as f64).sqrt();
    if m as f64 > limit {
        warnings.push(FitWarning::BeyondOversamplingLimit { m, limit });
    }
    let (mut g, b) = normal_equations(samples, m, &opts)?;

    let mut c = match cholesky_solve(&g, &b) {
        Some(c) => c,
        None => {
            let shift = SHIFT_FACTOR * g.trace();
            for i in 0..=m {
                g[(i, i)] += shift;
            }
            warnings.push(FitWarning::ShiftedGram { shift });
            cholesky_solve(&g, &b).ok_or(Error::Factorization { m, n })?
        }
    };

    let bnorm = norm(&b);
    let mut r = residual(&g, &c, &b);
    let mut ratio = if bnorm > 0.0 { norm(&r) / bnorm } else { norm(&r) };
    if ratio > RESIDUAL_TOL {
        if let Some(d) = cholesky_solve(&g, &r) {
            for (ci, di) in c.iter_mut().zip(&d) {
                *ci += di;
            }
            r = residual(&g, &c, &b);
            ratio = if bnorm > 0.0 { norm(&r) / bnorm } else { norm(&r) };
        }
        if ratio > RESIDUAL_TOL {
            warnings.push(FitWarning::ResidualCheck { ratio });
        }
    }

    let gram_cond_estimate = if opts.estimate_condition {
        let rep = spectral_report(&g)?;
        Some(rep.cond2 * rep.cond2)
    } else {
        None
    };

    let series = match opts.basis {
        Basis::Chebyshev => FittedSeries::Chebyshev(ChebyshevSeries::new(c)?),
        Basis::Legendre => FittedSeries::Legendre(LegendreSeries::new(c)?),
    };
    Ok(FitResult { series, m, n, gram_cond_estimate, method: opts.gram, warnings, residual_ratio: ratio })
}

/// `||p(x_k) - y_k||_2` over the sample grid.
pub fn least_squares_residual(samples: &SampleSet, series: &FittedSeries) -> f64 {
    samples
        .grid()
        .points()
        .iter()
        .zip(samples.values())
        .map(|(&x, &y)| {
            let d = series.eval(x) - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{cheb_eval, legendre_eval};

    #[test]
    fn psi_examples() {
        let sp = std::f64::consts::PI.sqrt();
        assert_eq!(psi(0), sp);
        assert!((psi(1) - sp / 2.0).abs() < 1e-15);
        let p50 = psi(50);
        assert!(p50 < psi(49));
        assert!(p50 * p50 <= 51.0 / (50.5 * 50.5) && p50 * p50 <= 1.0 / 50.0);
        assert!(p50 > 1.0 / 51f64.sqrt());
    }

    #[test]
    fn basis_change_structure() {
        let s = basis_change_matrix(12);
        assert_eq!(s.entries[(0, 0)], 1.0);
        for i in 0..13 {
            assert_eq!(s.entries[(i, 0)], if i == 0 { 1.0 } else { 0.0 });
            for j in 0..13 {
                let v = s.entries[(i, j)];
                assert!(v >= 0.0);
                if i > j || (i + j) % 2 == 1 {
                    assert_eq!(v, 0.0);
                }
            }
        }
        assert!(s.norm2() <= 5.0);
    }

    #[test]
    fn legendre_to_chebyshev_examples() {
        let e0 = legendre_to_chebyshev(&LegendreSeries::new(vec![1.0, 0.0, 0.0]).unwrap());
        assert_eq!(e0.coeffs(), &[1.0, 0.0, 0.0]);
        let e1 = legendre_to_chebyshev(&LegendreSeries::new(vec![0.0, 1.0]).unwrap());
        assert!((e1.coeffs()[0]).abs() < 1e-16 && (e1.coeffs()[1] - 1.0).abs() < 1e-15);
        let p2 = legendre_to_chebyshev(&LegendreSeries::new(vec![0.0, 0.0, 1.0]).unwrap());
        for i in 0..21 {
            let x = -1.0 + i as f64 / 10.0;
            assert!((p2.eval(x) - legendre_eval(2, x)).abs() < 1e-13);
        }
    }

    #[test]
    fn basis_change_converts_every_legendre_polynomial() {
        let m = 30;
        let s = basis_change_matrix(m);
        for k in 0..=m {
            let col: Vec<f64> = s.entries.column(k).iter().copied().collect();
            let cs = ChebyshevSeries::new(col).unwrap();
            for i in 0..=40 {
                let x = -1.0 + i as f64 / 20.0;
                assert!((cs.eval(x) - legendre_eval(k, x)).abs() < 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn reproduces_t2() {
        let samples = SampleSet::from_fn(16, |x| cheb_eval(2, x)).unwrap();
        for gram in [GramMethod::Fast, GramMethod::Naive] {
            let r = fit(&samples, 2, FitOptions::default().gram(gram)).unwrap();
            let c = r.series.coeffs();
            assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12 && (c[2] - 1.0).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn approximation_bound_for_runge_like_function() {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let samples = SampleSet::from_fn(400, f).unwrap();
        let r = fit(&samples, 10, FitOptions::default()).unwrap();
        let err = (0..=1000)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / 1000.0;
                (f(x) - r.eval(x)).abs()
            })
            .fold(0.0, f64::max);
        let (rho, q, m) = (2.414f64, 1.5, 10.0f64);
        let bound = 2.0 * q * (1.0 + 10.0 * 5f64.sqrt() * (m + 1.0).powf(1.5)) * rho.powf(-m) / (rho - 1.0);
        assert!(err <= bound, "{err} > {bound}");
    }

    #[test]
    fn legendre_and_chebyshev_paths_agree() {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let samples = SampleSet::from_fn(400, f).unwrap();
        let cheb = fit(&samples, 10, FitOptions::default()).unwrap();
        for gram in [GramMethod::Naive, GramMethod::Fast] {
            let leg = fit(&samples, 10, FitOptions::default().basis(Basis::Legendre).gram(gram)).unwrap();
            let conv = leg.series.to_chebyshev();
            for (a, b) in conv.coeffs().iter().zip(cheb.series.coeffs()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn m_above_n_is_rejected() {
        let samples = SampleSet::from_fn(10, |x| x).unwrap();
        assert_eq!(fit(&samples, 11, FitOptions::default()).unwrap_err(), Error::DegreeExceedsSamples { m: 11, n: 10 });
    }

    #[test]
    fn warns_beyond_half_sqrt_n() {
        let samples = SampleSet::from_fn(100, |x| x.exp()).unwrap();
        let r = fit(&samples, 8, FitOptions::default()).unwrap();
        assert!(r.warnings.iter().any(|w| matches!(w, FitWarning::BeyondOversamplingLimit { .. })));
        let r = fit(&samples, 5, FitOptions::default().estimate_condition(true)).unwrap();
        assert!(r.warnings.is_empty());
        assert!(r.gram_cond_estimate.unwrap() >= 1.0);
    }

    #[test]
    fn least_squares_residual_of_exact_fit_is_tiny() {
        let samples = SampleSet::from_fn(64, |x| cheb_eval(3, x)).unwrap();
        let r = fit(&samples, 3, FitOptions::default()).unwrap();
        assert!(least_squares_residual(&samples, &r.series) < 1e-12);
    }
}

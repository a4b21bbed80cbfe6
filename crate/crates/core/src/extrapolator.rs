//! Degree selection, extrapolation to `[1, (rho + 1/rho)/2)` and the
//! matching error bounds.
//!
//! Extrapolation to `x < -1` follows by reflecting the samples; it is not
//! implemented separately.

use serde::{Deserialize, Serialize};

use crate::basis::cheb_eval;
use crate::error::{Error, Result};
use crate::fastgram::{gram_fast_with, GramMethod};
use crate::samples::SampleSet;
use crate::solver::{fit, FitOptions, FitWarning};
use crate::vandermonde::{gram_naive_on_grid, spectral_report, Basis};

/// `(N, rho, eps, Q)`: grid size, Bernstein parameter, perturbation level
/// and the bound on `|f|` inside the Bernstein ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub rho: f64,
    pub eps: f64,
    pub q: f64,
}

impl ProblemParams {
    pub fn new(n: usize, rho: f64, eps: f64, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho = {rho} must exceed 1")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("Q = {q} must be positive")));
        }
        Ok(Self { n, rho, eps, q })
    }

    /// Right end `(rho + 1/rho)/2` of the extrapolation interval.
    pub fn edge(&self) -> f64 {
        interval_edge(self.rho)
    }

    /// `eps > Q`: the data carry no information beyond the constant term.
    pub fn is_degenerate(&self) -> bool {
        self.eps > self.q
    }
}

pub fn interval_edge(rho: f64) -> f64 {
    0.5 * (rho + 1.0 / rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Oversampled,
    Undersampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeChoice {
    pub m_star: usize,
    pub regime: Regime,
    /// `log(Q/eps) / log(rho)` before flooring.
    pub balance: f64,
    pub degenerate: bool,
}

/// `M* = floor(min(sqrt(N)/2, log(Q/eps)/log(rho)))`.
///
/// The regime compares the unfloored `log(Q/eps)/log(rho)` with
/// `sqrt(N)/2`.
pub fn optimal_degree(p: &ProblemParams) -> DegreeChoice {
    let half_sqrt_n = 0.5 * (p.n as f64).sqrt();
    let balance = (p.q / p.eps).ln() / p.rho.ln();
    let regime = if balance < half_sqrt_n { Regime::Oversampled } else { Regime::Undersampled };
    let m_star = if p.is_degenerate() { 0 } else { balance.min(half_sqrt_n).floor() as usize };
    DegreeChoice { m_star, regime, balance, degenerate: p.is_degenerate() }
}

/// `r = (x + sqrt(x^2 - 1))/rho` and `alpha = -log(r)/log(rho)` for
/// `1 <= x < (rho + 1/rho)/2`.
pub fn r_alpha(x: f64, rho: f64) -> Result<(f64, f64)> {
    if !(rho > 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must exceed 1")));
    }
    let upper = interval_edge(rho);
    if !(x >= 1.0 && x < upper) {
        return Err(Error::OutOfRange { x, upper });
    }
    let r = (x + (x * x - 1.0).sqrt()) / rho;
    let alpha = -r.ln() / rho.ln();
    Ok((r, alpha))
}

/// How `sigma_{M+1}` enters the explicit bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Smallest singular value of the Chebyshev design matrix, measured.
    #[default]
    Measured,
    /// The a priori lower bound `sigma_{M+1}^2 >= 2N / (125 (2M+1))`.
    TheoremConstant,
}

/// A priori lower bound on `sigma_{M+1}(T_M)` for `M <= sqrt(N)/2`.
pub fn sigma_min_lower_bound(m: usize, n: usize) -> f64 {
    (2.0 * n as f64 / (125.0 * (2 * m + 1) as f64)).sqrt()
}

/// `2Q [ (N+1)^{1/2} (M+1) / (sigma (rho - 1)) + r/(1-r) ] r^M`.
fn truncation_term(p: &ProblemParams, m: usize, r: f64, sigma_min: f64) -> f64 {
    let n1 = (p.n as f64 + 1.0).sqrt();
    let m1 = m as f64 + 1.0;
    2.0 * p.q * (n1 * m1 / (sigma_min * (p.rho - 1.0)) + r / (1.0 - r)) * r.powi(m as i32)
}

/// Worst-case bound on `|f(x) - p_M(x)|` for `||eps||_inf <= p.eps`.
pub fn explicit_bound(p: &ProblemParams, m: usize, x: f64, sigma_min: f64) -> Result<f64> {
    let (r, _) = r_alpha(x, p.rho)?;
    let n1 = (p.n as f64 + 1.0).sqrt();
    let m1 = m as f64 + 1.0;
    let noise = m1 * n1 * p.eps / sigma_min * (p.rho * r).powi(m as i32);
    Ok(truncation_term(p, m, r, sigma_min) + noise)
}

/// Bound for i.i.d. Gaussian noise of standard deviation `s`, holding with
/// high probability.
pub fn noisy_extrapolation_bound(p: &ProblemParams, m: usize, s: f64, x: f64, sigma_min: f64) -> Result<f64> {
    let (r, _) = r_alpha(x, p.rho)?;
    let m1 = m as f64 + 1.0;
    let noise = m1.powf(1.5) * s / sigma_min * (p.rho * r).powi(m as i32);
    Ok(truncation_term(p, m, r, sigma_min) + noise)
}

/// Growth factor of the error at `x`, up to constants:
/// `Q/(1-r) (eps/Q)^alpha` when oversampled, `Q/(1-r) r^{sqrt(N)/2}` when
/// undersampled.
pub fn bound_factor(p: &ProblemParams, regime: Regime, x: f64) -> Result<f64> {
    let (r, alpha) = r_alpha(x, p.rho)?;
    let tail = match regime {
        Regime::Oversampled => (p.eps / p.q).powf(alpha),
        Regime::Undersampled => r.powf(0.5 * (p.n as f64).sqrt()),
    };
    Ok(p.q / (1.0 - r) * tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: f64,
    pub r: f64,
    pub alpha: f64,
    pub value: f64,
    pub bound_explicit: f64,
    pub bound_asymptotic_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationReport {
    pub m_star: usize,
    pub regime: Regime,
    pub degenerate: bool,
    pub bound_kind: BoundKind,
    /// `sigma_{M+1}` used in the explicit bounds.
    pub sigma_min: f64,
    pub coeffs: Vec<f64>,
    pub points: Vec<PointRecord>,
    pub warnings: Vec<FitWarning>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtrapolationOptions {
    pub fit: FitOptions,
    pub bound: BoundKind,
}

/// Fits `p_{M*}` and evaluates it at each `x` with its error bounds.
pub fn extrapolate(samples: &SampleSet, p: &ProblemParams, xs: &[f64]) -> Result<ExtrapolationReport> {
    extrapolate_with(samples, p, xs, &ExtrapolationOptions::default())
}

pub fn extrapolate_with(
    samples: &SampleSet,
    p: &ProblemParams,
    xs: &[f64],
    opts: &ExtrapolationOptions,
) -> Result<ExtrapolationReport> {
    if samples.n() != p.n {
        return Err(Error::LengthMismatch { expected: p.n + 1, got: samples.n() + 1 });
    }
    let rs = xs.iter().map(|&x| r_alpha(x, p.rho)).collect::<Result<Vec<_>>>()?;
    let choice = optimal_degree(p);
    let m = choice.m_star;
    let fitted = fit(samples, m, opts.fit)?;
    let cheb = fitted.series.to_chebyshev();

    let sigma_min = match opts.bound {
        BoundKind::Measured => {
            let g = match opts.fit.gram {
                GramMethod::Fast => gram_fast_with(m, p.n, &opts.fit.weights, opts.fit.exec)?.matrix,
                GramMethod::Naive => gram_naive_on_grid(samples.grid(), m, Basis::Chebyshev, opts.fit.exec),
            };
            spectral_report(&g)?.sigma_min
        }
        BoundKind::TheoremConstant => sigma_min_lower_bound(m, p.n),
    };

    let points = xs
        .iter()
        .zip(rs)
        .map(|(&x, (r, alpha))| {
            Ok(PointRecord {
                x,
                r,
                alpha,
                value: cheb.eval(x),
                bound_explicit: explicit_bound(p, m, x, sigma_min)?,
                bound_asymptotic_factor: bound_factor(p, choice.regime, x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExtrapolationReport {
        m_star: m,
        regime: choice.regime,
        degenerate: choice.degenerate,
        bound_kind: opts.bound,
        sigma_min,
        coeffs: cheb.into_coeffs(),
        points,
        warnings: fitted.warnings,
    })
}

/// The function `g` showing that no method beats `p_{M*}` by more than a
/// constant: `|g| <= eps` on `[-1, 1]`, yet `g(x) >= c_rho r^K/(1-r)` on
/// the extrapolation interval.
///
/// `g = ((rho-1)/rho) sum_{n > K} rho^{-n} T_n`, summed in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaxWitness {
    pub rho: f64,
    pub eps: f64,
    pub k: usize,
}

impl MinimaxWitness {
    pub fn new(rho: f64, eps: f64) -> Result<Self> {
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho = {rho} must exceed 1")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
        }
        let k = ((1.0 / eps).ln() / rho.ln()).floor();
        if k < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "K = floor(log(1/eps)/log(rho)) = {k} < 1; the closed form needs K >= 1"
            )));
        }
        Ok(Self { rho, eps, k: k as usize })
    }

    /// `rho^{-2} (1 - 1/rho) (rho - 1) / 2`.
    pub fn c_rho(&self) -> f64 {
        let rho = self.rho;
        (1.0 - 1.0 / rho) * (rho - 1.0) / (2.0 * rho * rho)
    }

    /// Evaluates `g` on `[-1, 1]` or on `[1, (rho + 1/rho)/2)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let upper = interval_edge(self.rho);
        if !(x >= -1.0 && x < upper) {
            return Err(Error::OutOfRange { x, upper });
        }
        let (tk, tk1) = if x <= 1.0 {
            (cheb_eval(self.k, x), cheb_eval(self.k + 1, x))
        } else {
            (cheb_cosh(self.k, x), cheb_cosh(self.k + 1, x))
        };
        let rho = self.rho;
        let inv = 1.0 / rho;
        let kk = self.k as i32;
        let num = rho.powi(-kk - 1) * tk1 - rho.powi(-kk - 2) * tk;
        let den = 1.0 - 2.0 * inv * x + inv * inv;
        Ok((rho - 1.0) / rho * num / den)
    }

    /// `c_rho r^K / (1 - r)`.
    pub fn lower_bound(&self, x: f64) -> Result<f64> {
        let (r, _) = r_alpha(x, self.rho)?;
        Ok(self.c_rho() * r.powi(self.k as i32) / (1.0 - r))
    }
}

/// `T_n(x) = cosh(n acosh x)` for `x >= 1`.
fn cheb_cosh(n: usize, x: f64) -> f64 {
    (n as f64 * x.acosh()).cosh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const RHO: f64 = 1.0 + std::f64::consts::SQRT_2;

    #[test]
    fn optimal_degree_examples() {
        let p = ProblemParams::new(10_000, RHO, 2.2e-16, 1.0).unwrap();
        let c = optimal_degree(&p);
        assert_eq!(c.m_star, 40);
        assert_eq!(c.regime, Regime::Oversampled);

        let p = ProblemParams::new(100, RHO, 0.5, 0.5).unwrap();
        assert_eq!(optimal_degree(&p).m_star, 0);
        assert!(!optimal_degree(&p).degenerate);

        let p = ProblemParams::new(100, RHO, 2.0, 1.0).unwrap();
        let c = optimal_degree(&p);
        assert_eq!(c.m_star, 0);
        assert!(c.degenerate);

        let p = ProblemParams::new(4, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(optimal_degree(&p).m_star, 1);
        let p = ProblemParams::new(4, 2.0, 0.6, 1.0).unwrap();
        assert_eq!(optimal_degree(&p).m_star, 0);
    }

    #[test]
    fn params_are_validated() {
        assert!(ProblemParams::new(0, 2.0, 1e-3, 1.0).is_err());
        assert!(ProblemParams::new(10, 1.0, 1e-3, 1.0).is_err());
        assert!(ProblemParams::new(10, 2.0, 0.0, 1.0).is_err());
        assert!(ProblemParams::new(10, 2.0, 1e-3, -1.0).is_err());
    }

    #[test]
    fn r_alpha_examples() {
        let (r, a) = r_alpha(1.0, RHO).unwrap();
        assert!((r - 1.0 / RHO).abs() < 1e-16);
        assert!((a - 1.0).abs() < 1e-15);

        let edge = interval_edge(RHO);
        let (_, a) = r_alpha(edge * (1.0 - 1e-12), RHO).unwrap();
        assert!(a > 0.0 && a < 1e-5);

        let x = 1.2;
        let (r, _) = r_alpha(x, RHO).unwrap();
        assert!((r - (1.2 + 0.44f64.sqrt()) / RHO).abs() < 1e-16);
        assert!((RHO * r * (x - (x * x - 1.0).sqrt()) - 1.0).abs() < 1e-15);

        assert_eq!(r_alpha(edge, RHO).unwrap_err(), Error::OutOfRange { x: edge, upper: edge });
        assert!(r_alpha(0.99, RHO).is_err());
    }

    #[test]
    fn zero_samples_extrapolate_to_zero() {
        let s = SampleSet::from_fn(400, |_| 0.0).unwrap();
        let p = ProblemParams::new(400, RHO, 1e-8, 1.0).unwrap();
        let rep = extrapolate(&s, &p, &[1.0, 1.1]).unwrap();
        for pt in &rep.points {
            assert_eq!(pt.value, 0.0);
            let b = explicit_bound(&p, rep.m_star, pt.x, rep.sigma_min).unwrap();
            assert_eq!(pt.bound_explicit, b);
        }
    }

    #[test]
    fn runge_extrapolation_within_bound() {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let s = SampleSet::from_fn(1600, f).unwrap();
        let p = ProblemParams::new(1600, 2.414, 1e-15, 1.5).unwrap();
        let rep = extrapolate(&s, &p, &[1.0, 1.1]).unwrap();
        for pt in &rep.points {
            assert!((f(pt.x) - pt.value).abs() <= pt.bound_explicit);
        }
        let b = |m| explicit_bound(&p, m, 1.1, 1.0).unwrap();
        assert!(b(20) < b(10));

        // Deterministic perturbation of size 1e-8.
        let eps = 1e-8;
        let pert: Vec<f64> = (0..=1600).map(|k| if k % 2 == 0 { eps } else { -eps }).collect();
        let noisy = s.perturbed(&pert).unwrap();
        let p = ProblemParams::new(1600, 2.414, eps, 1.5).unwrap();
        let rep = extrapolate(&noisy, &p, &[1.1]).unwrap();
        assert!((f(1.1) - rep.points[0].value).abs() <= rep.points[0].bound_explicit);
        let theorem = extrapolate_with(
            &noisy,
            &p,
            &[1.1],
            &ExtrapolationOptions { bound: BoundKind::TheoremConstant, ..Default::default() },
        )
        .unwrap();
        assert!(theorem.points[0].bound_explicit >= rep.points[0].bound_explicit);
    }

    #[test]
    fn noisy_bound_reductions() {
        let p = ProblemParams::new(400, RHO, 1e-8, 1.0).unwrap();
        let (r, _) = r_alpha(1.1, RHO).unwrap();
        let t = truncation_term(&p, 8, r, 3.0);
        assert!((noisy_extrapolation_bound(&p, 8, 0.0, 1.1, 3.0).unwrap() - t).abs() <= 1e-15 * t);
        let at_one = noisy_extrapolation_bound(&p, 8, 1e-3, 1.0, 3.0).unwrap()
            - noisy_extrapolation_bound(&p, 8, 0.0, 1.0, 3.0).unwrap();
        let expected = 9f64.powf(1.5) * 1e-3 / 3.0;
        assert!((at_one - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn noise_term_scales_like_inverse_sqrt_n() {
        let m = 5;
        let term = |n: usize| {
            let p = ProblemParams::new(n, RHO, 1e-8, 1.0).unwrap();
            let sigma = sigma_min_lower_bound(m, n);
            noisy_extrapolation_bound(&p, m, 1e-3, 1.1, sigma).unwrap()
                - noisy_extrapolation_bound(&p, m, 0.0, 1.1, sigma).unwrap()
        };
        let slope = (term(10_000).ln() - term(100).ln()) / (10_000f64.ln() - 100f64.ln());
        assert!((slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn witness_examples() {
        for eps in [1e-4, 1e-8, 1e-12] {
            let g = MinimaxWitness::new(RHO, eps).unwrap();
            let max = (0..10_000)
                .map(|i| g.eval(-1.0 + 2.0 * i as f64 / 9_999.0).unwrap().abs())
                .fold(0.0, f64::max);
            assert!(max <= eps);
            let g1 = g.eval(1.0).unwrap();
            let expected = RHO.powi(-(g.k as i32) - 1);
            assert!((g1 - expected).abs() <= 1e-13 * expected);
            for x in [1.05, 1.1, 1.2] {
                assert!(g.eval(x).unwrap() >= g.lower_bound(x).unwrap());
            }
        }
    }

    #[test]
    fn witness_rejects_k_zero() {
        assert!(MinimaxWitness::new(RHO, 0.9).is_err());
        assert!(MinimaxWitness::new(RHO, 1.5).is_err());
    }

    #[test]
    fn regime_matches_unfloored_balance() {
        for n in [16usize, 100, 1600, 10_000] {
            for eps in [1e-2, 1e-6, 1e-12] {
                let p = ProblemParams::new(n, RHO, eps, 1.0).unwrap();
                let c = optimal_degree(&p);
                let half = 0.5 * (n as f64).sqrt();
                if c.regime == Regime::Oversampled {
                    assert!((c.m_star as f64) < half);
                    assert_eq!(c.m_star, c.balance.floor() as usize);
                } else {
                    assert_eq!(c.m_star, half.floor() as usize);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn r_increasing_and_factor_monotone(t1 in 0.0f64..0.999, t2 in 0.0f64..0.999, rho in 1.1f64..6.0) {
            let edge = interval_edge(rho);
            let (a, b) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            prop_assume!(b - a > 1e-9);
            let xa = 1.0 + a * (edge - 1.0);
            let xb = 1.0 + b * (edge - 1.0);
            let (ra, aa) = r_alpha(xa, rho).unwrap();
            let (rb, ab) = r_alpha(xb, rho).unwrap();
            prop_assert!(ra < rb);
            prop_assert!(aa > ab && ab > 0.0 && aa <= 1.0 + 1e-15);
            prop_assert!(ra >= 1.0 / rho * (1.0 - 1e-15) && rb < 1.0);
            let p = ProblemParams::new(10_000, rho, 1e-10, 1.0).unwrap();
            prop_assert!(bound_factor(&p, Regime::Oversampled, xa).unwrap() < bound_factor(&p, Regime::Oversampled, xb).unwrap());
        }
    }

    #[test]
    fn witness_to_factor_ratio_is_bounded_independently_of_eps() {
        let edge = interval_edge(RHO);
        let mut ranges = Vec::new();
        for eps in [1e-4, 1e-8, 1e-12] {
            let g = MinimaxWitness::new(RHO, eps).unwrap();
            let p = ProblemParams::new(1_000_000, RHO, eps, 1.0).unwrap();
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for i in 0..=200 {
                let x = 1.0 + (0.95 * edge - 1.0) * i as f64 / 200.0;
                let (r, alpha) = r_alpha(x, RHO).unwrap();
                let witness = g.c_rho() * eps.powf(alpha) / (1.0 - r);
                let ratio = witness / bound_factor(&p, Regime::Oversampled, x).unwrap();
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            ranges.push((lo, hi));
        }
        for (lo, hi) in &ranges {
            assert!((hi / lo) < 1.0 + 1e-9);
            assert!((lo - ranges[0].0).abs() < 1e-9 * lo);
        }
    }
}

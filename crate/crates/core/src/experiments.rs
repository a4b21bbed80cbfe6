//! Data behind the figures: the `alpha(x)` profile, singular values against
//! their bounds, extrapolation error curves, the coefficient plateau under
//! noise, and Gram construction timings.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::Grid;
use crate::error::{Error, Result};
use crate::extrapolator::{interval_edge, r_alpha};
use crate::fastgram::{gram_fast_with, rhs_with, BernoulliWeights};
use crate::par::Execution;
use crate::samples::SampleSet;
use crate::solver::{fit, FitOptions};
use crate::vandermonde::{gram_naive_on_grid, Basis};
use crate::verify::{check_cheb_singular_bounds, check_legendre_singular_bounds};

/// Perturbation added to exact samples.
///
/// Gaussian draws come from `ChaCha8Rng::seed_from_u64(seed)` fed through
/// `rand_distr::Normal`, one draw per sample in grid order. The stream is
/// fixed for a given seed and crate versions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    GaussianIid { s: f64 },
    /// `+eps, -eps, +eps, ...`
    DeterministicWorstCase { eps: f64 },
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { kind: NoiseKind::None, seed: 0 }
    }

    pub fn gaussian(s: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::GaussianIid { s }, seed }
    }

    pub fn worst_case(eps: f64) -> Self {
        Self { kind: NoiseKind::DeterministicWorstCase { eps }, seed: 0 }
    }

    pub fn sample(&self, len: usize) -> Result<Vec<f64>> {
        match self.kind {
            NoiseKind::None => Ok(vec![0.0; len]),
            NoiseKind::GaussianIid { s } => {
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(Error::InvalidParameter(format!("noise level s = {s} must be nonnegative")));
                }
                let normal = Normal::new(0.0, s)
                    .map_err(|e| Error::InvalidParameter(format!("noise level s = {s}: {e}")))?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok((0..len).map(|_| normal.sample(&mut rng)).collect())
            }
            NoiseKind::DeterministicWorstCase { eps } => {
                Ok((0..len).map(|k| if k % 2 == 0 { eps } else { -eps }).collect())
            }
        }
    }
}

/// Bernstein parameter of a function whose nearest singularity is `z`:
/// `a + sqrt(a^2 - 1)` with `a = (|z - 1| + |z + 1|)/2`.
pub fn bernstein_rho(re: f64, im: f64) -> f64 {
    let a = 0.5 * ((re - 1.0).hypot(im) + (re + 1.0).hypot(im));
    a + (a * a - 1.0).sqrt()
}

/// Analytic test functions with known singularities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    /// `1/(1 + x^2)`, poles at `+-i`.
    InvSquare,
    /// `1/(1 + 2x^2)`, poles at `+-i/sqrt(2)`.
    InvTwoSquare,
    /// `1/(1 + 25(x - 1/100)^2)`, poles at `1/100 +- i/5`.
    Runge,
}

impl TestFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            TestFunction::InvSquare => 1.0 / (1.0 + x * x),
            TestFunction::InvTwoSquare => 1.0 / (1.0 + 2.0 * x * x),
            TestFunction::Runge => {
                let d = x - 0.01;
                1.0 / (1.0 + 25.0 * d * d)
            }
        }
    }

    /// Bernstein parameter from the nearest pole.
    pub fn rho(self) -> f64 {
        match self {
            TestFunction::InvSquare => bernstein_rho(0.0, 1.0),
            TestFunction::InvTwoSquare => bernstein_rho(0.0, std::f64::consts::FRAC_1_SQRT_2),
            TestFunction::Runge => bernstein_rho(0.01, 0.2),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            TestFunction::InvSquare => "inv-square",
            TestFunction::InvTwoSquare => "inv-two-square",
            TestFunction::Runge => "runge",
        }
    }
}

/// A named numeric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Subset of columns, keeping row order.
    pub fn select(&self, name: impl Into<String>, columns: &[&str]) -> Option<Table> {
        let idx: Vec<usize> =
            columns.iter().map(|c| self.columns.iter().position(|k| k == c)).collect::<Option<_>>()?;
        Some(Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect(),
        })
    }
}

/// Value reported in place of the unbounded factor at the interval edge.
pub const FACTOR_CAP: f64 = 1e300;

/// `alpha(x)` and `(eps/Q)^alpha / (1 - r)` over `x_count` equispaced points
/// of `[1, (rho + 1/rho)/2]`; the last row sits on the edge, where the
/// factor is capped and flagged.
pub fn run_alpha_profile(rho: f64, eps: f64, q: f64, x_count: usize) -> Result<Table> {
    if x_count < 2 {
        return Err(Error::InvalidParameter("x_count must be at least 2".into()));
    }
    if !(eps > 0.0 && q > 0.0) {
        return Err(Error::InvalidParameter("eps and Q must be positive".into()));
    }
    let edge = interval_edge(rho);
    let mut t = Table::new("alpha_profile", &["x", "alpha", "factor", "capped"]);
    for i in 0..x_count {
        let x = 1.0 + (edge - 1.0) * i as f64 / (x_count - 1) as f64;
        if i + 1 == x_count {
            t.push(vec![edge, 0.0, FACTOR_CAP, 1.0]);
            continue;
        }
        let (r, alpha) = r_alpha(x, rho)?;
        let factor = (eps / q).powf(alpha) / (1.0 - r);
        let capped = !(factor < FACTOR_CAP);
        t.push(vec![x, alpha, if capped { FACTOR_CAP } else { factor }, if capped { 1.0 } else { 0.0 }]);
    }
    Ok(t)
}

/// Measured extreme squared singular values at `M = floor(sqrt(N)/2)` next to
/// their bounds.
pub fn run_singular_bounds_sweep(n_list: &[usize]) -> Result<Table> {
    let mut t = Table::new(
        "singular_bounds",
        &[
            "N",
            "M",
            "legendre_sigma_max_sq",
            "legendre_upper_bound",
            "legendre_sigma_min_sq",
            "legendre_lower_bound",
            "chebyshev_sigma_max_sq",
            "chebyshev_upper_bound",
            "chebyshev_sigma_min_sq",
            "chebyshev_lower_bound",
        ],
    );
    for &n in n_list {
        let m = (0.5 * (n as f64).sqrt()).floor() as usize;
        let leg = check_legendre_singular_bounds(m, n)?;
        let cheb = check_cheb_singular_bounds(m, n)?;
        t.push(vec![
            n as f64,
            m as f64,
            leg[0].lhs,
            leg[0].rhs,
            leg[1].lhs,
            leg[1].rhs,
            cheb[0].lhs,
            cheb[0].rhs,
            cheb[1].lhs,
            cheb[1].rhs,
        ]);
    }
    Ok(t)
}

fn error_column(x: f64) -> String {
    format!("err_x={x}")
}

/// `|f(x) - p_M(x)|` for `M = 1..=m_max` from exact samples with
/// `N = 4 M^2`. The points are not restricted to the extrapolation interval
/// so that growth beyond it is visible.
pub fn run_extrapolation_decay(f: TestFunction, xs: &[f64], m_max: usize, exec: Execution) -> Result<Table> {
    let names: Vec<String> = xs.iter().map(|&x| error_column(x)).collect();
    let mut cols: Vec<&str> = vec!["M", "N"];
    cols.extend(names.iter().map(String::as_str));
    let mut t = Table::new(format!("extrapolation_decay_{}", f.id()), &cols);
    for m in 1..=m_max {
        let n = 4 * m * m;
        let samples = SampleSet::from_fn(n, |x| f.eval(x))?;
        let fitted = fit(&samples, m, FitOptions::default().exec(exec))?;
        let mut row = vec![m as f64, n as f64];
        row.extend(xs.iter().map(|&x| (f.eval(x) - fitted.eval(x)).abs()));
        t.push(row);
    }
    Ok(t)
}

/// Least-squares slope of `log(err)` against `M` for `M` in `[lo, hi]`.
pub fn decay_slope(table: &Table, x: f64, lo: usize, hi: usize) -> Option<f64> {
    let ms = table.column("M")?;
    let errs = table.column(&error_column(x))?;
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(&errs)
        .filter(|(m, e)| **m >= lo as f64 && **m <= hi as f64 && **e > 0.0)
        .map(|(m, e)| (*m, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Median of `|c_k|` over `k` in `[0.8 M, M]`.
pub fn plateau_statistic(coeffs: &[f64]) -> f64 {
    let m = coeffs.len() - 1;
    let start = (0.8 * m as f64).ceil() as usize;
    let mut tail: Vec<f64> = coeffs[start..].iter().map(|c| c.abs()).collect();
    tail.sort_by(f64::total_cmp);
    let k = tail.len();
    if k % 2 == 1 {
        tail[k / 2]
    } else {
        0.5 * (tail[k / 2 - 1] + tail[k / 2])
    }
}

/// `|c_k|` of degree-`M` Chebyshev fits to `f` plus i.i.d. Gaussian noise of
/// standard deviation `s`, one column per `N`. Every `N` uses the same seed.
pub fn run_noise_coefficients(
    m: usize,
    n_list: &[usize],
    s: f64,
    f: TestFunction,
    seed: u64,
    exec: Execution,
) -> Result<Table> {
    let noise = if s > 0.0 { NoiseModel::gaussian(s, seed) } else { NoiseModel::none() };
    let names: Vec<String> = n_list.iter().map(|n| format!("abs_c_N={n}")).collect();
    let mut cols: Vec<&str> = vec!["k"];
    cols.extend(names.iter().map(String::as_str));
    let mut columns = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let exact = SampleSet::from_fn(n, |x| f.eval(x))?;
        let samples = exact.perturbed(&noise.sample(n + 1)?)?;
        let fitted = fit(&samples, m, FitOptions::default().exec(exec))?;
        columns.push(fitted.series.coeffs().iter().map(|c| c.abs()).collect::<Vec<_>>());
    }
    let mut t = Table::new("noise_coefficients", &cols);
    for k in 0..=m {
        let mut row = vec![k as f64];
        row.extend(columns.iter().map(|c| c[k]));
        t.push(row);
    }
    Ok(t)
}

/// Tail plateau of the coefficients in a [`run_noise_coefficients`] table.
pub fn plateau_table(coeffs: &Table) -> Table {
    let mut t = Table::new("noise_plateau", &["N", "plateau", "plateau_times_sqrt_N"]);
    for (i, name) in coeffs.columns.iter().enumerate().skip(1) {
        let n: f64 = name.trim_start_matches("abs_c_N=").parse().unwrap_or(f64::NAN);
        let col: Vec<f64> = coeffs.rows.iter().map(|r| r[i]).collect();
        let p = plateau_statistic(&col);
        t.push(vec![n, p, p * n.sqrt()]);
    }
    t
}

/// Plateau of `|c_k|` for each `N`; see [`plateau_statistic`].
pub fn run_noise_plateau(
    m: usize,
    n_list: &[usize],
    s: f64,
    f: TestFunction,
    seed: u64,
    exec: Execution,
) -> Result<Table> {
    Ok(plateau_table(&run_noise_coefficients(m, n_list, s, f, seed, exec)?))
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        std::hint::black_box(f()?);
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(best)
}

/// Wall-clock seconds (best of `reps`) to build the normal equations of
/// degree `M`, single-threaded, with and without the right-hand side.
pub fn run_gram_timing(m: usize, n_list: &[usize], reps: usize) -> Result<Table> {
    let mut t = Table::new(
        "gram_timing",
        &["N", "M", "fast_gram_s", "naive_gram_s", "fast_gram_rhs_s", "naive_gram_rhs_s"],
    );
    let exec = Execution::Sequential;
    let w = BernoulliWeights::default();
    for &n in n_list {
        let grid = Grid::equispaced(n)?;
        let y: Vec<f64> = grid.points().iter().map(|&x| TestFunction::InvSquare.eval(x)).collect();
        let fast = best_of(reps, || gram_fast_with(m, n, &w, exec))?;
        let naive = best_of(reps, || Ok(gram_naive_on_grid(&grid, m, Basis::Chebyshev, exec)))?;
        let rhs = best_of(reps, || rhs_with(&grid, &y, m, Basis::Chebyshev, exec))?;
        t.push(vec![n as f64, m as f64, fast, naive, fast + rhs, naive + rhs]);
    }
    Ok(t)
}

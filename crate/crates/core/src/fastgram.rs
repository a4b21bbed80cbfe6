//! `O(M^2)` assembly of the equispaced Chebyshev normal equations.
//!
//! On the grid `x_k = 2k/N - 1` the Gram entry `sum_k T_m(x_k) T_n(x_k)` is
//! `N/2` times the trapezium-rule value of `int T_m T_n`, plus the endpoint
//! halves. The integral is known in closed form and the trapezium error
//! follows from the Euler–Maclaurin formula, whose summands only depend on
//! `(m - n)^2` and `(m + n)^2` (a Toeplitz-plus-Hankel structure). The cost of
//! building the matrix is therefore independent of `N`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::Grid;
use crate::error::{Error, Result};
use crate::par::{map_range, pairwise_reduce, Execution};
use crate::vandermonde::{gram_naive_on_grid, Basis};

/// `B_{s+1} / (s+1)!` for odd `s = 1, 3, 5, 7, 9`.
const EXACT_WEIGHTS: [f64; 5] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
];

/// Scaled Bernoulli numbers `B_{s+1}/(s+1)!` for odd `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliWeights {
    /// Largest `s` kept in the Euler–Maclaurin sums.
    pub truncation_s: usize,
}

impl Default for BernoulliWeights {
    fn default() -> Self {
        Self { truncation_s: 10 }
    }
}

impl BernoulliWeights {
    pub fn with_truncation(truncation_s: usize) -> Self {
        Self { truncation_s }
    }

    /// Tabulated value for odd `s <= 9`.
    pub fn exact(s: usize) -> Option<f64> {
        if s % 2 == 1 && s <= 9 {
            Some(EXACT_WEIGHTS[s / 2])
        } else {
            None
        }
    }

    /// Six-term zeta expansion
    /// `(-1)^{(s+3)/2} 2 (2 pi)^{-(s+1)} (1 + 2^{-(s+1)} + ... + 6^{-(s+1)})`.
    ///
    /// Avoids forming `B_{s+1}` and `(s+1)!` separately, which overflow.
    pub fn asymptotic(s: usize) -> f64 {
        debug_assert!(s % 2 == 1);
        let p = (s + 1) as i32;
        let zeta: f64 = (1..=6).map(|j| (j as f64).powi(-p)).sum();
        let sign = if ((s + 3) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign * 2.0 * (2.0 * std::f64::consts::PI).powi(-p) * zeta
    }

    /// Weight used for odd `s`: tabulated up to 9, asymptotic above.
    pub fn weight(&self, s: usize) -> f64 {
        Self::exact(s).unwrap_or_else(|| Self::asymptotic(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramMethod {
    Naive,
    Fast,
}

/// The `(M+1) x (M+1)` Chebyshev normal-equation matrix and its provenance.
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub matrix: DMatrix<f64>,
    pub method: GramMethod,
    pub m: usize,
    pub n: usize,
    /// Trapezium error matrix `E~`, kept for diagnostics (fast path only).
    pub correction: Option<DMatrix<f64>>,
    /// Set when `N < 4 M^2`: the truncated correction is no longer covered by
    /// the convergence argument.
    pub undersampled: bool,
}

fn is_undersampled(m: usize, n: usize) -> bool {
    n < 4 * m * m
}

/// `prod_{j<s} (q^2 - j^2) / (N (j + 1/2))` for every `q <= 2M` and every odd
/// `s <= s_max`, laid out as `table[q * odd_count + (s - 1)/2]`.
fn product_table(m: usize, n: usize, s_max: usize) -> (Vec<f64>, usize) {
    let odd_count = s_max.div_ceil(2);
    let nf = n as f64;
    let mut table = vec![0.0; (2 * m + 1) * odd_count];
    for q in 0..=2 * m {
        let q2 = (q * q) as f64;
        let mut cum = 1.0;
        for j in 0..s_max {
            let jf = j as f64;
            cum *= (q2 - jf * jf) / (nf * (jf + 0.5));
            let s = j + 1;
            if s % 2 == 1 {
                table[q * odd_count + s / 2] = cum;
            }
        }
    }
    (table, odd_count)
}

/// The Euler–Maclaurin correction matrix `E~` for the equispaced Chebyshev
/// Gram matrix, truncated at `weights.truncation_s`.
pub fn trapezium_error_matrix(m: usize, n: usize, weights: &BernoulliWeights) -> Result<DMatrix<f64>> {
    if m < 1 {
        return Err(Error::InvalidParameter("trapezium error matrix needs M >= 1".into()));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("trapezium error matrix needs N >= 1".into()));
    }
    let s_max = weights.truncation_s.min(2 * m - 1);
    let (table, odd_count) = product_table(m, n, s_max);
    let w: Vec<f64> = (0..odd_count).map(|i| weights.weight(2 * i + 1)).collect();
    let scale = 2.0 / n as f64;
    let dim = m + 1;
    let mut e = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in a..dim {
            let sum_idx = a + b;
            if sum_idx % 2 == 1 || sum_idx <= 1 {
                continue;
            }
            let diff = b - a;
            let last = s_max.min(sum_idx - 1);
            let mut acc = 0.0;
            for i in 0..last.div_ceil(2) {
                acc += (table[diff * odd_count + i] + table[sum_idx * odd_count + i]) * w[i];
            }
            e[(a, b)] = scale * acc;
            e[(b, a)] = scale * acc;
        }
    }
    Ok(e)
}

/// Closed-form Chebyshev Gram matrix on the `N + 1` point equispaced grid.
pub fn gram_fast(m: usize, n: usize, weights: &BernoulliWeights) -> Result<GramSystem> {
    gram_fast_with(m, n, weights, Execution::default())
}

pub fn gram_fast_with(
    m: usize,
    n: usize,
    weights: &BernoulliWeights,
    exec: Execution,
) -> Result<GramSystem> {
    if n < 1 {
        return Err(Error::InvalidParameter("gram_fast needs N >= 1".into()));
    }
    let dim = m + 1;
    let nf = n as f64;
    if m == 0 {
        return Ok(GramSystem {
            matrix: DMatrix::from_element(1, 1, nf + 1.0),
            method: GramMethod::Fast,
            m,
            n,
            correction: None,
            undersampled: false,
        });
    }
    let e = trapezium_error_matrix(m, n, weights)?;
    let rows = map_range(exec, 0..dim, |a| {
        let mut row = vec![0.0; dim];
        for (b, out) in row.iter_mut().enumerate().skip(a) {
            if (a + b) % 2 == 1 {
                continue;
            }
            let sp = (a + b) as f64;
            let dm = a.abs_diff(b) as f64;
            *out = nf / (2.0 * (1.0 - sp * sp)) + nf / (2.0 * (1.0 - dm * dm)) + 1.0 + 0.5 * nf * e[(a, b)];
        }
        row
    });
    let mut g = DMatrix::zeros(dim, dim);
    for (a, row) in rows.iter().enumerate() {
        for b in a..dim {
            g[(a, b)] = row[b];
            g[(b, a)] = row[b];
        }
    }
    Ok(GramSystem {
        matrix: g,
        method: GramMethod::Fast,
        m,
        n,
        correction: Some(e),
        undersampled: is_undersampled(m, n),
    })
}

/// Chebyshev Gram matrix by direct summation over the equispaced grid.
pub fn gram_system_naive(m: usize, n: usize, exec: Execution) -> Result<GramSystem> {
    let grid = Grid::equispaced(n)?;
    Ok(GramSystem {
        matrix: gram_naive_on_grid(&grid, m, Basis::Chebyshev, exec),
        method: GramMethod::Naive,
        m,
        n,
        correction: None,
        undersampled: is_undersampled(m, n),
    })
}

const RHS_LEAF_ROWS: usize = 256;

/// `T_M(x)^T y`, streaming the recurrence over the grid in `O(MN)` time and
/// `O(M)` extra space per leaf.
pub fn rhs(grid: &Grid, samples: &[f64], m: usize) -> Result<Vec<f64>> {
    rhs_with(grid, samples, m, Basis::Chebyshev, Execution::default())
}

/// [`rhs`] for either basis and execution mode. The result does not depend
/// on the number of threads.
pub fn rhs_with(
    grid: &Grid,
    samples: &[f64],
    m: usize,
    basis: Basis,
    exec: Execution,
) -> Result<Vec<f64>> {
    let pts = grid.points();
    if samples.len() != pts.len() {
        return Err(Error::LengthMismatch { expected: pts.len(), got: samples.len() });
    }
    let dim = m + 1;
    let leaf = |range: std::ops::Range<usize>| {
        let mut acc = vec![0.0; dim];
        let mut row = vec![0.0; dim];
        for i in range {
            let y = samples[i];
            basis.fill(pts[i], &mut row);
            for (a, r) in acc.iter_mut().zip(&row) {
                *a += r * y;
            }
        }
        acc
    };
    let combine = |mut x: Vec<f64>, y: Vec<f64>| {
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi += yi;
        }
        x
    };
    Ok(pairwise_reduce(exec, 0..pts.len(), RHS_LEAF_ROWS, &leaf, &combine))
}

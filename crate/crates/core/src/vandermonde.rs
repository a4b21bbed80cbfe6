//! Chebyshev/Legendre–Vandermonde matrices, naive Gram products, spectra and
//! Lebesgue constants.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{cheb_fill, legendre_fill, Grid};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::par::{map_range, pairwise_reduce, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Chebyshev,
    Legendre,
}

impl Basis {
    /// Writes the first `out.len()` basis polynomials at `x` into `out`.
    pub fn fill(self, x: f64, out: &mut [f64]) {
        match self {
            Basis::Chebyshev => cheb_fill(x, out),
            Basis::Legendre => legendre_fill(x, out),
        }
    }
}

/// Default ratio between `M` and `sqrt(rows)` accepted by [`design_matrix`].
pub const DEFAULT_DEGREE_GUARD: f64 = 10.0;

/// Entry `(i, j)` is basis polynomial `j` at grid point `i`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub entries: DMatrix<f64>,
    pub basis: Basis,
    pub grid: Grid,
}

impl DesignMatrix {
    pub fn degree(&self) -> usize {
        self.entries.ncols() - 1
    }
}

pub fn design_matrix(grid: &Grid, m: usize, basis: Basis) -> Result<DesignMatrix> {
    design_matrix_with_guard(grid, m, basis, DEFAULT_DEGREE_GUARD)
}

/// Like [`design_matrix`] but with a caller-chosen guard `M <= guard * sqrt(rows)`.
pub fn design_matrix_with_guard(
    grid: &Grid,
    m: usize,
    basis: Basis,
    guard: f64,
) -> Result<DesignMatrix> {
    let rows = grid.len();
    let limit = guard * (rows as f64).sqrt();
    if m as f64 > limit {
        return Err(Error::DegreeGuard { m, rows, limit });
    }
    let mut entries = DMatrix::zeros(rows, m + 1);
    let mut row = vec![0.0; m + 1];
    for (i, &x) in grid.points().iter().enumerate() {
        basis.fill(x, &mut row);
        for (j, v) in row.iter().enumerate() {
            entries[(i, j)] = *v;
        }
    }
    Ok(DesignMatrix { entries, basis, grid: grid.clone() })
}

const GRAM_LEAF_ROWS: usize = 128;

/// Upper-triangular accumulator of `V^T V`, packed row-major `(M+1)^2`.
fn gram_reduce<R>(rows: usize, m: usize, exec: Execution, fill_row: R) -> DMatrix<f64>
where
    R: Fn(usize, &mut [f64]) + Sync,
{
    let dim = m + 1;
    let leaf = |range: std::ops::Range<usize>| {
        let mut acc = vec![0.0; dim * dim];
        let mut row = vec![0.0; dim];
        for i in range {
            fill_row(i, &mut row);
            for a in 0..dim {
                let ra = row[a];
                let out = &mut acc[a * dim..(a + 1) * dim];
                for b in a..dim {
                    out[b] += ra * row[b];
                }
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
    let acc = pairwise_reduce(exec, 0..rows, GRAM_LEAF_ROWS, &leaf, &combine);
    let mut g = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in a..dim {
            g[(a, b)] = acc[a * dim + b];
            g[(b, a)] = acc[a * dim + b];
        }
    }
    g
}

/// `V^T V` with pairwise summation over rows; exactly symmetric.
pub fn gram_naive(v: &DesignMatrix) -> DMatrix<f64> {
    gram_naive_with(v, Execution::default())
}

pub fn gram_naive_with(v: &DesignMatrix, exec: Execution) -> DMatrix<f64> {
    let cols = v.entries.ncols();
    gram_reduce(v.entries.nrows(), cols - 1, exec, |i, row| {
        for (j, r) in row.iter_mut().enumerate() {
            *r = v.entries[(i, j)];
        }
    })
}

/// The same product as [`gram_naive`] without materialising the design
/// matrix; rows are generated by the recurrence as they are consumed, so
/// memory stays `O(M^2)` even for millions of grid points.
///
/// Bit-identical to `gram_naive(&design_matrix(grid, m, basis)?)`.
pub fn gram_naive_on_grid(grid: &Grid, m: usize, basis: Basis, exec: Execution) -> DMatrix<f64> {
    let pts = grid.points();
    gram_reduce(pts.len(), m, exec, |i, row| basis.fill(pts[i], row))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// `sigma_max / sigma_min`; infinite when `sigma_min == 0`.
    pub cond2: f64,
}

impl SpectralReport {
    pub fn is_singular(&self) -> bool {
        self.sigma_min == 0.0
    }
}

/// Singular-value extremes of `V` from the spectrum of its Gram matrix `G = V^T V`.
pub fn spectral_report(g: &DMatrix<f64>) -> Result<SpectralReport> {
    let eig = symmetric_eigenvalues(g)?;
    let lmax = eig.first().copied().unwrap_or(0.0).max(0.0);
    let lmin = eig.last().copied().unwrap_or(0.0).max(0.0);
    let sigma_max = lmax.sqrt();
    let sigma_min = lmin.sqrt();
    let cond2 = if sigma_min == 0.0 { f64::INFINITY } else { sigma_max / sigma_min };
    Ok(SpectralReport { sigma_max, sigma_min, cond2 })
}

/// Probed Lebesgue constant `max_x sum_j |l_j(x)|` over `probe_count`
/// equispaced points of `[-1, 1]`.
///
/// A lower bound on the true supremum.
pub fn lebesgue_constant(grid: &Grid, probe_count: usize) -> Result<f64> {
    let nodes = grid.points();
    let n1 = nodes.len();
    if probe_count < 10 * n1 {
        return Err(Error::InvalidParameter(format!(
            "probe_count {probe_count} is below 10 * (N + 1) = {}",
            10 * n1
        )));
    }
    for i in 1..n1 {
        if nodes[i] == nodes[i - 1] {
            return Err(Error::DuplicateNodes(i - 1, i));
        }
    }
    if n1 == 1 {
        return Ok(1.0);
    }
    let denoms: Vec<f64> = (0..n1)
        .map(|j| (0..n1).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product())
        .collect();
    let step = 2.0 / (probe_count - 1) as f64;
    let sums = map_range(Execution::default(), 0..probe_count, |p| {
        let x = if p + 1 == probe_count { 1.0 } else { -1.0 + p as f64 * step };
        (0..n1)
            .map(|j| {
                let num: f64 = (0..n1).filter(|&k| k != j).map(|k| x - nodes[k]).product();
                (num / denoms[j]).abs()
            })
            .sum::<f64>()
    });
    Ok(sums.into_iter().fold(0.0, f64::max))
}

//! Dense symmetric eigenvalues (cyclic Jacobi) and Perron-root brackets.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative asymmetry tolerated by the symmetric routines.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(())
}

pub(crate) fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    check_square(a)?;
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (a[(i, j)] - a[(j, i)]).abs();
            if diff > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric { i, j, diff });
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a real symmetric matrix, sorted in decreasing order.
///
/// Cyclic Jacobi rotations on a row-major copy. An off-diagonal entry is
/// zeroed outright once it no longer changes either diagonal entry it
/// couples, which gives every eigenvalue an error of a few ulps of
/// `||A||`.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    let n = a.nrows();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    jacobi_in_place(&mut w, n);
    let mut eig: Vec<f64> = (0..n).map(|i| w[i * n + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

const MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(w: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += w[i * n + j] * w[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

fn jacobi_in_place(w: &mut [f64], n: usize) {
    if n < 2 {
        return;
    }
    for sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(w, n) == 0.0 {
            return;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[p * n + q] = 0.0;
                    w[q * n + p] = 0.0;
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                w[p * n + p] = app - t * apq;
                w[q * n + q] = aqq + t * apq;
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = w[r * n + p];
                    let arq = w[r * n + q];
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    w[r * n + p] = new_rp;
                    w[p * n + r] = new_rp;
                    w[r * n + q] = new_rq;
                    w[q * n + r] = new_rq;
                }
            }
        }
    }
}

/// Lower and upper bounds on the Perron root of a nonnegative symmetric
/// operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronBracket {
    /// Rayleigh quotient of the final iterate.
    pub lower: f64,
    /// Collatz–Wielandt bound `max_i (Av)_i / v_i`.
    pub upper: f64,
    pub iterations: usize,
}

/// Power iteration for the largest eigenvalue of a symmetric matrix with
/// nonnegative entries, given only its action `apply(v, out)`.
///
/// Starts from the all-ones vector and stops once the Collatz–Wielandt upper
/// bound and the Rayleigh lower bound agree to `rel_tol`.
pub fn perron_bracket<F>(n: usize, apply: F, rel_tol: f64, max_iter: usize) -> PerronBracket
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut av = vec![0.0; n];
    let mut best = PerronBracket { lower: 0.0, upper: f64::INFINITY, iterations: 0 };
    for it in 1..=max_iter {
        apply(&v, &mut av);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let vav: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        let rayleigh = vav / vv;
        let cw = v
            .iter()
            .zip(&av)
            .map(|(&vi, &wi)| if vi > 0.0 { wi / vi } else if wi > 0.0 { f64::INFINITY } else { 0.0 })
            .fold(0.0f64, f64::max);
        best.lower = best.lower.max(rayleigh);
        best.upper = best.upper.min(cw);
        best.iterations = it;
        if best.upper - best.lower <= rel_tol * best.upper {
            break;
        }
        let norm = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for (vi, wi) in v.iter_mut().zip(&av) {
            *vi = wi / norm;
        }
    }
    best
}

/// Solves `G c = b` for symmetric positive definite `G` by Cholesky.
///
/// Returns `None` when the factorization breaks down.
pub fn cholesky_solve(g: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let chol = nalgebra::Cholesky::new(g.clone())?;
    let rhs = nalgebra::DVector::from_column_slice(b);
    Some(chol.solve(&rhs).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_and_identity() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(symmetric_eigenvalues(&id).unwrap(), vec![1.0, 1.0, 1.0]);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        assert_eq!(symmetric_eigenvalues(&d).unwrap(), vec![4.0, 1.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = symmetric_eigenvalues(&a).unwrap();
        assert!((e[0] - 3.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(symmetric_eigenvalues(&a), Err(Error::NotSymmetric { .. })));
        let r = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(symmetric_eigenvalues(&r), Err(Error::NotSquare { .. })));
    }

    proptest! {
        #[test]
        fn agrees_with_nalgebra(entries in proptest::collection::vec(-10.0f64..10.0, 36)) {
            let m = DMatrix::from_row_slice(6, 6, &entries);
            let s = &m + m.transpose();
            let mine = symmetric_eigenvalues(&s).unwrap();
            let mut theirs: Vec<f64> = s.clone().symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(|a, b| b.total_cmp(a));
            let scale = mine[0].abs().max(mine[5].abs()).max(1.0);
            for (a, b) in mine.iter().zip(&theirs) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
            let trace: f64 = (0..6).map(|i| s[(i, i)]).sum();
            prop_assert!((mine.iter().sum::<f64>() - trace).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn perron_bracket_on_known_matrix() {
        // [[2,1],[1,2]] has Perron root 3.
        let a = [[2.0, 1.0], [1.0, 2.0]];
        let b = perron_bracket(
            2,
            |v, out| {
                for i in 0..2 {
                    out[i] = a[i][0] * v[0] + a[i][1] * v[1];
                }
            },
            1e-14,
            100,
        );
        assert!(b.lower <= 3.0 + 1e-14 && b.upper >= 3.0 - 1e-14);
        assert!(b.upper - b.lower < 1e-12);
    }

    #[test]
    fn cholesky_solves_spd() {
        let g = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let c = cholesky_solve(&g, &[1.0, 2.0]).unwrap();
        assert!((4.0 * c[0] + c[1] - 1.0).abs() < 1e-15);
        assert!((c[0] + 3.0 * c[1] - 2.0).abs() < 1e-15);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky_solve(&bad, &[1.0, 1.0]).is_none());
    }
}

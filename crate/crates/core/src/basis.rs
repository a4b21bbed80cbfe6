//! Chebyshev and Legendre polynomials, their series, and sample grids.
//!
//! Polynomials are evaluated with their three-term recurrences for every
//! real `x`, including points beyond `[-1, 1]`, so fitting and extrapolation
//! share one code path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `T_k(x)` by the recurrence `T_{k+1} = 2x T_k - T_{k-1}`.
pub fn cheb_eval(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..k {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Fills `out[k] = T_k(x)` for `k < out.len()`.
///
/// Produces bit-identical values to [`cheb_eval`].
pub fn cheb_fill(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

/// `P_k(x)` by Bonnet's recurrence `(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}`.
pub fn legendre_eval(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for j in 1..k {
                let jf = j as f64;
                let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Fills `out[k] = P_k(x)`; bit-identical to [`legendre_eval`].
pub fn legendre_fill(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        let jf = (k - 1) as f64;
        out[k] = ((2.0 * jf + 1.0) * x * out[k - 1] - jf * out[k - 2]) / (jf + 1.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    Equispaced,
    ChebyshevFirstKind,
    Arbitrary,
}

/// Ordered abscissae in `[-1, 1]`, stored in strictly increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    kind: GridKind,
}

impl Grid {
    /// Builds the `N + 1` point grid of the requested kind.
    ///
    /// Equispaced points are `x_k = 2k/N - 1`, so the endpoints are exactly
    /// `-1` and `1`. Chebyshev points of the first kind
    /// `cos((k + 1/2) pi / (N + 1))` come out descending and are stored
    /// reversed.
    pub fn new(kind: GridKind, n: usize) -> Result<Self> {
        let points = match kind {
            GridKind::Equispaced => {
                if n == 0 {
                    return Err(Error::InvalidGrid(
                        "an equispaced grid needs N >= 1".into(),
                    ));
                }
                let nf = n as f64;
                (0..=n).map(|k| 2.0 * k as f64 / nf - 1.0).collect()
            }
            GridKind::ChebyshevFirstKind => {
                let denom = (n + 1) as f64;
                (0..=n)
                    .rev()
                    .map(|k| ((k as f64 + 0.5) * std::f64::consts::PI / denom).cos())
                    .collect()
            }
            GridKind::Arbitrary => {
                return Err(Error::InvalidGrid(
                    "arbitrary grids are built with Grid::from_points".into(),
                ))
            }
        };
        Ok(Self { points, kind })
    }

    pub fn equispaced(n: usize) -> Result<Self> {
        Self::new(GridKind::Equispaced, n)
    }

    pub fn chebyshev(n: usize) -> Result<Self> {
        Self::new(GridKind::ChebyshevFirstKind, n)
    }

    /// Wraps caller-supplied points; they must be finite, inside `[-1, 1]`
    /// and strictly increasing.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid has no points".into()));
        }
        for (i, &x) in points.iter().enumerate() {
            if !x.is_finite() || !(-1.0..=1.0).contains(&x) {
                return Err(Error::InvalidGrid(format!("point {i} = {x} is outside [-1, 1]")));
            }
        }
        for i in 1..points.len() {
            if points[i] == points[i - 1] {
                return Err(Error::DuplicateNodes(i - 1, i));
            }
            if points[i] < points[i - 1] {
                return Err(Error::InvalidGrid(format!(
                    "points are not increasing at index {i}"
                )));
            }
        }
        Ok(Self { points, kind: GridKind::Arbitrary })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Number of points, `N + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The grid parameter `N` (one less than the number of points).
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }
}

/// `p(x) = sum_k c_k T_k(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevSeries {
    coeffs: Vec<f64>,
}

impl ChebyshevSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("a series needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw_eval(self, x)
    }
}

/// Clenshaw's backward recurrence for a Chebyshev series.
pub fn clenshaw_eval(series: &ChebyshevSeries, x: f64) -> f64 {
    let c = series.coeffs();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c[1..].iter().rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}

/// `p(x) = sum_k c_k P_k(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreSeries {
    coeffs: Vec<f64>,
}

impl LegendreSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("a series needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Forward summation alongside Bonnet's recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let mut sum = self.coeffs[0];
        let (mut prev, mut cur) = (1.0, x);
        for (k, &ck) in self.coeffs.iter().enumerate().skip(1) {
            sum += ck * cur;
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cheb_eval_examples() {
        assert_eq!(cheb_eval(0, 0.7), 1.0);
        assert_eq!(cheb_eval(3, 0.5), -1.0);
        assert_eq!(cheb_eval(2, 2.0), 7.0);
        let oracle = (5.0 * 1.1f64.acosh()).cosh();
        assert!((cheb_eval(5, 1.1) - oracle).abs() <= 1e-13 * oracle.abs());
    }

    #[test]
    fn cheb_bounded_on_interval() {
        for k in 0..=60 {
            for i in 0..=200 {
                let x = -1.0 + 2.0 * i as f64 / 200.0;
                assert!(cheb_eval(k, x).abs() <= 1.0 + 1e-12, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn cheb_matches_cosine_form() {
        for k in 0..=60 {
            for i in 0..=100 {
                let theta = PI * i as f64 / 100.0;
                let got = cheb_eval(k, theta.cos());
                assert!((got - (k as f64 * theta).cos()).abs() <= 1e-12, "k={k} theta={theta}");
            }
        }
    }

    #[test]
    fn cheb_matches_hyperbolic_form_beyond_one() {
        for k in 0..=60 {
            for i in 0..=40 {
                let x = 1.0 + 2.0 * i as f64 / 40.0;
                let w = x + (x * x - 1.0).sqrt();
                let oracle = (w.powi(k as i32) + w.powi(-(k as i32))) / 2.0;
                let got = cheb_eval(k, x);
                assert!((got - oracle).abs() <= 1e-11 * oracle.abs(), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn fill_is_bit_identical_to_eval() {
        let mut buf = vec![0.0; 31];
        for &x in &[-0.93, 0.0, 0.41, 1.0, 1.37] {
            cheb_fill(x, &mut buf);
            for (k, v) in buf.iter().enumerate() {
                assert_eq!(v.to_bits(), cheb_eval(k, x).to_bits());
            }
            legendre_fill(x, &mut buf);
            for (k, v) in buf.iter().enumerate() {
                assert_eq!(v.to_bits(), legendre_eval(k, x).to_bits());
            }
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_eval(0, -0.3), 1.0);
        assert!((legendre_eval(2, 0.5) + 0.125).abs() < 1e-15);
        assert!((legendre_eval(4, 0.0) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn legendre_orthogonality_by_trapezium() {
        let n = 1_000_000usize;
        let h = 2.0 / n as f64;
        let mut row = vec![0.0; 9];
        let mut gram = [[0.0f64; 9]; 9];
        for k in 0..=n {
            let x = 2.0 * k as f64 / n as f64 - 1.0;
            let w = if k == 0 || k == n { 0.5 * h } else { h };
            legendre_fill(x, &mut row);
            for m in 0..9 {
                for j in 0..9 {
                    gram[m][j] += w * row[m] * row[j];
                }
            }
        }
        for m in 0..9 {
            for j in 0..9 {
                let expect = if m == j { 2.0 / (2.0 * j as f64 + 1.0) } else { 0.0 };
                assert!((gram[m][j] - expect).abs() < 1e-6, "({m},{j}) {}", gram[m][j]);
            }
        }
    }

    #[test]
    fn clenshaw_examples() {
        let s = ChebyshevSeries::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!((s.eval(0.25) + 0.875).abs() < 1e-15);
        let c = ChebyshevSeries::new(vec![5.0]).unwrap();
        assert_eq!(c.eval(123.0), 5.0);
        assert!(ChebyshevSeries::new(vec![]).is_err());
    }

    #[test]
    fn clenshaw_matches_termwise_sum_for_runge_expansion() {
        // Chebyshev coefficients of 1/(1+x^2): a_0 = 1/sqrt2,
        // a_{2j} = sqrt2 (-1)^j (sqrt2 - 1)^{2j}.
        let q = 2f64.sqrt() - 1.0;
        let mut coeffs = vec![0.0; 41];
        coeffs[0] = 1.0 / 2f64.sqrt();
        for j in 1..=20 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[2 * j] = 2f64.sqrt() * sign * q.powi(2 * j as i32);
        }
        let s = ChebyshevSeries::new(coeffs.clone()).unwrap();
        let direct: f64 = coeffs.iter().enumerate().map(|(k, c)| c * cheb_eval(k, 0.3)).sum();
        assert!((s.eval(0.3) - direct).abs() < 1e-12);
        assert!((s.eval(0.3) - 1.0 / 1.09).abs() < 1e-12);
    }

    #[test]
    fn legendre_series_eval() {
        let s = LegendreSeries::new(vec![1.0, 2.0, 3.0]).unwrap();
        let x = 0.37;
        let expect = 1.0 + 2.0 * x + 3.0 * (3.0 * x * x - 1.0) / 2.0;
        assert!((s.eval(x) - expect).abs() < 1e-15);
    }

    #[test]
    fn grid_examples() {
        assert_eq!(Grid::equispaced(2).unwrap().points(), &[-1.0, 0.0, 1.0]);
        assert_eq!(Grid::equispaced(4).unwrap().points(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let c = Grid::chebyshev(1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.points()[0] + s).abs() < 1e-15 && (c.points()[1] - s).abs() < 1e-15);
        assert!(Grid::equispaced(0).is_err());
        assert_eq!(Grid::chebyshev(0).unwrap().len(), 1);
    }

    #[test]
    fn equispaced_endpoints_exact() {
        for n in [1usize, 3, 7, 100, 12345] {
            let g = Grid::equispaced(n).unwrap();
            assert_eq!(g.len(), n + 1);
            assert_eq!(g.points()[0], -1.0);
            assert_eq!(g.points()[n], 1.0);
            assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn chebyshev_grid_ascending() {
        let g = Grid::chebyshev(20).unwrap();
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn from_points_validation() {
        assert!(Grid::from_points(vec![-0.5, 0.5]).is_ok());
        assert_eq!(Grid::from_points(vec![0.1, 0.1]), Err(Error::DuplicateNodes(0, 1)));
        assert!(Grid::from_points(vec![0.5, 0.1]).is_err());
        assert!(Grid::from_points(vec![2.0]).is_err());
    }
}

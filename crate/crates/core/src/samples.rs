use crate::basis::{Grid, GridKind};
use crate::error::{Error, Result};

/// Maximum deviation from `2k/N - 1` accepted when reading abscissae.
pub const EQUISPACED_TOL: f64 = 1e-12;

/// Ordinates `f(x_k) + eps_k` on an equispaced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    grid: Grid,
    values: Vec<f64>,
    /// Known perturbation level `||eps||_inf`, when the caller has one.
    pub declared_eps: Option<f64>,
}

impl SampleSet {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if grid.kind() != GridKind::Equispaced {
            return Err(Error::InvalidGrid("samples must lie on an equispaced grid".into()));
        }
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, values, declared_eps: None })
    }

    /// Samples `f` on the `N + 1` point equispaced grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = Grid::equispaced(n)?;
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Builds a sample set from `(x, y)` pairs, checking that `x` is the
    /// equispaced grid to within [`EQUISPACED_TOL`].
    pub fn from_xy(xs: &[f64], ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch { expected: xs.len(), got: ys.len() });
        }
        if xs.len() < 2 {
            return Err(Error::InvalidGrid("need at least two samples".into()));
        }
        let grid = Grid::equispaced(xs.len() - 1)?;
        for (index, (&x, &expected)) in xs.iter().zip(grid.points()).enumerate() {
            if !((x - expected).abs() <= EQUISPACED_TOL) {
                return Err(Error::NotEquispaced { index, x, expected });
            }
        }
        Self::new(grid, ys)
    }

    pub fn with_declared_eps(mut self, eps: f64) -> Self {
        self.declared_eps = Some(eps);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Adds a perturbation vector to the ordinates.
    pub fn perturbed(&self, eps: &[f64]) -> Result<Self> {
        if eps.len() != self.values.len() {
            return Err(Error::LengthMismatch { expected: self.values.len(), got: eps.len() });
        }
        let values = self.values.iter().zip(eps).map(|(v, e)| v + e).collect();
        Ok(Self { grid: self.grid.clone(), values, declared_eps: self.declared_eps })
    }
}

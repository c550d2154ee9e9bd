use ndarray::Array2;
use num_complex::Complex64;

use crate::grid::Grid;

/// Scalar field sampled at grid nodes, `data[[i, j]] = f(x1_i, x2_j)`.
#[derive(Clone, Debug)]
pub struct RealField {
    pub grid: Grid,
    pub data: Array2<f64>,
}

/// Unnormalized DFT coefficients in standard order, `data[[i, j]]` holding
/// the mode `(mode_x(i), mode_y(j))`. The inverse transform divides by
/// `nx * ny`, so Parseval reads
/// `sum_x |f|^2 = (1 / (nx ny)) sum_k |fhat|^2`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    pub grid: Grid,
    pub data: Array2<Complex64>,
}

impl RealField {
    pub fn zeros(grid: Grid) -> Self {
        RealField { grid, data: Array2::zeros((grid.nx, grid.ny)) }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Array2::zeros((grid.nx, grid.ny));
        for i in 0..grid.nx {
            let x1 = grid.x1(i);
            for j in 0..grid.ny {
                data[[i, j]] = f(x1, grid.x2(j));
            }
        }
        RealField { grid, data }
    }

    /// Trapezoid integral over the torus; on a periodic grid this is just
    /// the node sum times the cell area.
    pub fn integral(&self) -> f64 {
        self.data.sum() * self.grid.cell_area()
    }

    /// Integral of `f * w(x1, x2)` for a coordinate weight.
    pub fn integral_weighted(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.nx {
            let x1 = self.grid.x1(i);
            for j in 0..self.grid.ny {
                acc += self.data[[i, j]] * w(x1, self.grid.x2(j));
            }
        }
        acc * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.data.sum() / (self.grid.nx * self.grid.ny) as f64
    }

    /// Pointwise product, the only nonlinearity the solver needs.
    #[must_use]
    pub fn mul_pointwise(&self, other: &RealField) -> RealField {
        assert_eq!(self.grid, other.grid, "field grids must match");
        RealField { grid: self.grid, data: &self.data * &other.data }
    }

    #[must_use]
    pub fn scale(&self, c: f64) -> RealField {
        RealField { grid: self.grid, data: &self.data * c }
    }

    #[must_use]
    pub fn add(&self, other: &RealField) -> RealField {
        assert_eq!(self.grid, other.grid, "field grids must match");
        RealField { grid: self.grid, data: &self.data + &other.data }
    }

    #[must_use]
    pub fn sub(&self, other: &RealField) -> RealField {
        assert_eq!(self.grid, other.grid, "field grids must match");
        RealField { grid: self.grid, data: &self.data - &other.data }
    }

    /// `self + c * other`, fused to avoid a temporary.
    #[must_use]
    pub fn add_scaled(&self, c: f64, other: &RealField) -> RealField {
        assert_eq!(self.grid, other.grid, "field grids must match");
        let mut out = self.data.clone();
        out.zip_mut_with(&other.data, |a, b| *a += c * b);
        RealField { grid: self.grid, data: out }
    }
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField { grid, data: Array2::zeros((grid.nx, grid.ny)) }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    #[must_use]
    pub fn scale(&self, c: f64) -> SpectralField {
        SpectralField { grid: self.grid, data: self.data.mapv(|v| v * c) }
    }

    #[must_use]
    pub fn add(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, other.grid, "field grids must match");
        SpectralField { grid: self.grid, data: &self.data + &other.data }
    }

    #[must_use]
    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, other.grid, "field grids must match");
        SpectralField { grid: self.grid, data: &self.data - &other.data }
    }

    #[must_use]
    pub fn add_scaled(&self, c: f64, other: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, other.grid, "field grids must match");
        let mut out = self.data.clone();
        ndarray::Zip::from(&mut out).and(&other.data).for_each(|a, b| *a += b * c);
        SpectralField { grid: self.grid, data: out }
    }

    /// Apply a real multiplier `m(kx, ky)` mode by mode.
    pub fn multiplier(&self, m: impl Fn(f64, f64) -> f64) -> SpectralField {
        let mut out = self.data.clone();
        for i in 0..self.grid.nx {
            let kx = self.grid.kx(i);
            for j in 0..self.grid.ny {
                out[[i, j]] *= m(kx, self.grid.ky(j));
            }
        }
        SpectralField { grid: self.grid, data: out }
    }
}

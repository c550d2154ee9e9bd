use crate::error::{Error, Result};

/// Uniform doubly periodic grid on `[0, lx) x [-ly/2, ly/2)`.
///
/// `ny` is required to be even so that the symmetry axis `x2 = 0` is a grid
/// line (`j = ny/2`) and the reflection `x2 -> -x2` is an exact index map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::BadGrid(format!("nx, ny must be >= 8, got {nx} x {ny}")));
        }
        if nx % 2 != 0 || ny % 2 != 0 {
            return Err(Error::BadGrid(format!("nx, ny must be even, got {nx} x {ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::BadGrid(format!("domain lengths must be positive, got {lx} x {ly}")));
        }
        Ok(Grid { nx, ny, lx, ly })
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Cell area, the quadrature weight for grid-sum integrals.
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn x2(&self, j: usize) -> f64 {
        -0.5 * self.ly + j as f64 * self.hy()
    }

    /// Row index of the symmetry axis `x2 = 0`.
    pub fn axis_row(&self) -> usize {
        self.ny / 2
    }

    /// Index image of the reflection `x2 -> -x2`. The seam row `j = 0`
    /// (identified `x2 = -ly/2 ~ ly/2`) and the axis row map to themselves.
    pub fn reflect_row(&self, j: usize) -> usize {
        (self.ny - j) % self.ny
    }

    /// Signed integer mode number for the `i`-th DFT output in `x1`.
    pub fn mode_x(&self, i: usize) -> i64 {
        if i <= self.nx / 2 - 1 {
            i as i64
        } else {
            i as i64 - self.nx as i64
        }
    }

    pub fn mode_y(&self, j: usize) -> i64 {
        if j <= self.ny / 2 - 1 {
            j as i64
        } else {
            j as i64 - self.ny as i64
        }
    }

    /// Wavenumber `2 pi m / lx` of the `i`-th DFT output.
    pub fn kx(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode_x(i) as f64 / self.lx
    }

    pub fn ky(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode_y(j) as f64 / self.ly
    }

    /// Smallest nonzero wavenumber magnitude, `2 pi / max(lx, ly)`.
    pub fn k_min(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lx.max(self.ly)
    }

    /// Wrap a physical point into the fundamental domain.
    pub fn wrap(&self, p: [f64; 2]) -> [f64; 2] {
        let x = p[0].rem_euclid(self.lx);
        let y = (p[1] + 0.5 * self.ly).rem_euclid(self.ly) - 0.5 * self.ly;
        [x, y]
    }
}

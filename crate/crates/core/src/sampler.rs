//! Off-grid velocity evaluation for marker transport.
//!
//! Gridded components are interpolated by periodic cubic B-splines: an IIR
//! prefilter turns node samples into B-spline coefficients, so the
//! interpolant passes through the data exactly and converges at O(h^4) on
//! smooth fields. Analytic samplers (closures) plug into the same trait for
//! tests and manufactured flows.

use ndarray::Array2;

use crate::field::RealField;
use crate::grid::Grid;

pub trait VelocitySampler {
    fn velocity(&self, t: f64, p: [f64; 2]) -> [f64; 2];
}

impl<F: Fn(f64, [f64; 2]) -> [f64; 2]> VelocitySampler for F {
    fn velocity(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        self(t, p)
    }
}

/// Cubic B-spline interpolation pole, the stable root of `z^2 + 4z + 1`.
const POLE: f64 = -0.267_949_192_431_122_7;

/// Convert periodic samples to cubic B-spline coefficients in place.
fn prefilter_periodic(line: &mut [f64]) {
    let n = line.len();
    let z = POLE;
    // Causal pass c+[i] = f[i] + z c+[i-1], circular initialization.
    let mut init = 0.0;
    let mut zk = 1.0;
    for k in 0..n {
        init += zk * line[(n - k) % n];
        zk *= z;
        if zk.abs() < 1e-18 {
            break;
        }
    }
    let mut prev = init / (1.0 - zk);
    line[0] = prev;
    for i in 1..n {
        prev = line[i] + z * prev;
        line[i] = prev;
    }
    // Anticausal pass c-[i] = z (c-[i+1] - c+[i]), circular initialization
    // c-[n-1] = -sum_{m>=0} z^{m+1} c+[(n-1+m) mod n].
    let mut init = 0.0;
    let mut zk = z;
    for m in 0..n {
        init -= zk * line[(n - 1 + m) % n];
        zk *= z;
        if zk.abs() < 1e-18 {
            break;
        }
    }
    // zk / z is z^(terms), the period factor of the truncated circular sum.
    let mut next = init / (1.0 - zk / z);
    line[n - 1] = 6.0 * next;
    for i in (0..n - 1).rev() {
        next = z * (next - line[i]);
        line[i] = 6.0 * next;
    }
}

fn bspline_weights(u: f64) -> [f64; 4] {
    let v = 1.0 - u;
    [
        v * v * v / 6.0,
        (4.0 - 6.0 * u * u + 3.0 * u * u * u) / 6.0,
        (1.0 + 3.0 * u + 3.0 * u * u - 3.0 * u * u * u) / 6.0,
        u * u * u / 6.0,
    ]
}

/// One scalar field prepared for bicubic evaluation anywhere on the torus.
#[derive(Clone, Debug)]
pub struct BicubicField {
    grid: Grid,
    coeff: Array2<f64>,
}

impl BicubicField {
    pub fn new(f: &RealField) -> Self {
        let g = f.grid;
        let mut coeff = f.data.clone();
        // Rows (x2 direction is contiguous).
        for mut row in coeff.rows_mut() {
            prefilter_periodic(row.as_slice_mut().expect("contiguous row"));
        }
        // Columns.
        let mut col = vec![0.0; g.nx];
        for j in 0..g.ny {
            for i in 0..g.nx {
                col[i] = coeff[[i, j]];
            }
            prefilter_periodic(&mut col);
            for i in 0..g.nx {
                coeff[[i, j]] = col[i];
            }
        }
        BicubicField { grid: g, coeff }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let g = self.grid;
        let gx = p[0] / g.hx();
        let gy = (p[1] + 0.5 * g.ly) / g.hy();
        let bx = gx.floor();
        let by = gy.floor();
        let wx = bspline_weights(gx - bx);
        let wy = bspline_weights(gy - by);
        let ix = bx as i64;
        let iy = by as i64;
        let nx = g.nx as i64;
        let ny = g.ny as i64;
        let mut acc = 0.0;
        for (a, wxa) in wx.iter().enumerate() {
            let i = (ix - 1 + a as i64).rem_euclid(nx) as usize;
            let mut row_acc = 0.0;
            for (b, wyb) in wy.iter().enumerate() {
                let j = (iy - 1 + b as i64).rem_euclid(ny) as usize;
                row_acc += wyb * self.coeff[[i, j]];
            }
            acc += wxa * row_acc;
        }
        acc
    }
}

/// Velocity frozen at one time level.
#[derive(Clone, Debug)]
pub struct GridVelocity {
    pub u1: BicubicField,
    pub u2: BicubicField,
}

impl GridVelocity {
    pub fn new(u1: &RealField, u2: &RealField) -> Self {
        assert_eq!(u1.grid, u2.grid, "velocity components on different grids");
        GridVelocity { u1: BicubicField::new(u1), u2: BicubicField::new(u2) }
    }
}

impl VelocitySampler for GridVelocity {
    fn velocity(&self, _t: f64, p: [f64; 2]) -> [f64; 2] {
        [self.u1.eval(p), self.u2.eval(p)]
    }
}

/// Linear-in-time blend of two frozen velocity fields over `[t0, t1]`.
/// Each instant of the blend is a divergence-free field, so the exact flow
/// of the blended velocity is still area preserving.
pub struct TimeBlendVelocity {
    pub t0: f64,
    pub t1: f64,
    pub start: GridVelocity,
    pub end: GridVelocity,
}

impl VelocitySampler for TimeBlendVelocity {
    fn velocity(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        let w = if self.t1 > self.t0 {
            ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let a = self.start.velocity(t, p);
        let b = self.end.velocity(t, p);
        [(1.0 - w) * a[0] + w * b[0], (1.0 - w) * a[1] + w * b[1]]
    }
}

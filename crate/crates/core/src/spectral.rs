//! Fourier-side operators: transforms, derivatives, inverse Laplacian,
//! Biot-Savart, homogeneous Sobolev norms and the 2/3-rule dealiasing mask.
//!
//! Conventions. The forward transform is the unnormalized DFT; the inverse
//! divides by `nx * ny`. Derivative multipliers zero the Nyquist modes so
//! that derivatives of real fields stay real; they are exact for
//! band-limited input. `inverse_laplacian` zeroes the `k = 0` mode, i.e. it
//! inverts the Laplacian on the zero-mean part and drops the mean.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::{RealField, SpectralField};

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// Transform every row (axis 1, contiguous) in place.
fn fft_rows(data: &mut ndarray::Array2<Complex64>, forward: bool) {
    let len = data.ncols();
    let fft = plan(len, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for mut row in data.rows_mut() {
        let slice = row.as_slice_mut().expect("row must be contiguous");
        fft.process_with_scratch(slice, &mut scratch);
    }
}

/// Transform every column (axis 0) in place through a gather/scatter buffer.
fn fft_cols(data: &mut ndarray::Array2<Complex64>, forward: bool) {
    let (n0, n1) = data.dim();
    let fft = plan(n0, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut col = vec![Complex64::default(); n0];
    for j in 0..n1 {
        for i in 0..n0 {
            col[i] = data[[i, j]];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for i in 0..n0 {
            data[[i, j]] = col[i];
        }
    }
}

pub fn to_spectral(f: &RealField) -> SpectralField {
    let mut buf = f.data.mapv(|v| Complex64::new(v, 0.0));
    fft_rows(&mut buf, true);
    fft_cols(&mut buf, true);
    SpectralField { grid: f.grid, data: buf }
}

pub fn to_real(fh: &SpectralField) -> RealField {
    let mut buf = fh.data.clone();
    fft_rows(&mut buf, false);
    fft_cols(&mut buf, false);
    let scale = 1.0 / (fh.grid.nx * fh.grid.ny) as f64;
    RealField { grid: fh.grid, data: buf.mapv(|v| v.re * scale) }
}

/// `i kx` multiplier with the `x1` Nyquist column zeroed.
pub fn derivative_x_spec(fh: &SpectralField) -> SpectralField {
    let g = fh.grid;
    let mut out = fh.data.clone();
    for i in 0..g.nx {
        let factor = if 2 * i == g.nx {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, g.kx(i))
        };
        for j in 0..g.ny {
            out[[i, j]] *= factor;
        }
    }
    SpectralField { grid: g, data: out }
}

pub fn derivative_y_spec(fh: &SpectralField) -> SpectralField {
    let g = fh.grid;
    let mut out = fh.data.clone();
    for j in 0..g.ny {
        let factor = if 2 * j == g.ny {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, g.ky(j))
        };
        for i in 0..g.nx {
            out[[i, j]] *= factor;
        }
    }
    SpectralField { grid: g, data: out }
}

pub fn laplacian_spec(fh: &SpectralField) -> SpectralField {
    fh.multiplier(|kx, ky| -(kx * kx + ky * ky))
}

/// Inverse Laplacian on the zero-mean part; the `k = 0` coefficient is set
/// to zero.
pub fn inverse_laplacian_spec(fh: &SpectralField) -> SpectralField {
    fh.multiplier(|kx, ky| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    })
}

/// Velocity spectra from the vorticity spectrum:
/// `u = (-d2, d1) inverse_laplacian(omega)`.
pub fn velocity_spec(omega_hat: &SpectralField) -> (SpectralField, SpectralField) {
    let psi = inverse_laplacian_spec(omega_hat);
    let u1 = derivative_y_spec(&psi).scale(-1.0);
    let u2 = derivative_x_spec(&psi);
    (u1, u2)
}

/// Zero every mode with `|mode_x| > nx/3` or `|mode_y| > ny/3` (the 2/3 of
/// Nyquist cutoff), in place.
pub fn dealias_spec(fh: &mut SpectralField) {
    let g = fh.grid;
    let cut_x = (g.nx / 3) as i64;
    let cut_y = (g.ny / 3) as i64;
    for i in 0..g.nx {
        let kill_row = g.mode_x(i).abs() > cut_x;
        for j in 0..g.ny {
            if kill_row || g.mode_y(j).abs() > cut_y {
                fh.data[[i, j]] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

// Physical-space wrappers.

pub fn partial_x(f: &RealField) -> RealField {
    to_real(&derivative_x_spec(&to_spectral(f)))
}

pub fn partial_y(f: &RealField) -> RealField {
    to_real(&derivative_y_spec(&to_spectral(f)))
}

pub fn laplacian(f: &RealField) -> RealField {
    to_real(&laplacian_spec(&to_spectral(f)))
}

pub fn inverse_laplacian(f: &RealField) -> RealField {
    to_real(&inverse_laplacian_spec(&to_spectral(f)))
}

/// Divergence-free velocity recovered from the vorticity:
/// `u1 = -d2 inverse_laplacian(omega)`, `u2 = d1 inverse_laplacian(omega)`.
pub fn biot_savart(omega: &RealField) -> (RealField, RealField) {
    let (u1h, u2h) = velocity_spec(&to_spectral(omega));
    (to_real(&u1h), to_real(&u2h))
}

pub fn dealias(f: &RealField) -> RealField {
    let mut fh = to_spectral(f);
    dealias_spec(&mut fh);
    to_real(&fh)
}

/// Homogeneous Sobolev norm of the zero-mean part,
/// `( lx ly * sum_{k != 0} |k|^{2s} |fhat_k / (nx ny)|^2 )^{1/2}`,
/// normalized so `s = 0` is the L2 norm of `f - mean(f)`.
///
/// Panics if `s` is outside `[-2, 2]`; larger exponents amplify the spectral
/// tail beyond what the stored fields resolve.
pub fn hs_norm(f: &RealField, s: f64) -> f64 {
    assert!((-2.0..=2.0).contains(&s), "hs_norm exponent {s} outside [-2, 2]");
    hs_norm_spec(&to_spectral(f), s)
}

pub fn hs_norm_spec(fh: &SpectralField, s: f64) -> f64 {
    assert!((-2.0..=2.0).contains(&s), "hs_norm exponent {s} outside [-2, 2]");
    let g = fh.grid;
    let mut acc = 0.0;
    for i in 0..g.nx {
        let kx = g.kx(i);
        for j in 0..g.ny {
            let ky = g.ky(j);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            acc += k2.powf(s) * fh.data[[i, j]].norm_sqr();
        }
    }
    let norm = (g.nx * g.ny) as f64;
    (acc * g.lx * g.ly / (norm * norm)).sqrt()
}

//! Pseudo-spectral time stepper for the coupled transport system on the
//! torus: scalar advected with no diffusivity, vorticity advected with
//! viscosity and the horizontal-gradient source, velocity recovered from
//! vorticity through the stream function.
//!
//! Time integration is classic RK4 with an exact integrating factor for
//! the viscous term (applied to vorticity only; the scalar is inviscid),
//! so stiff high-mode damping never limits the step. Products are formed
//! pointwise in physical space and dealiased by the 2/3 rule.

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::spectral::{
    dealias_spec, derivative_x_spec, derivative_y_spec, to_real, to_spectral, velocity_spec,
};

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// Viscosity acting on vorticity (the scalar is never diffused).
    pub nu: f64,
    /// Advective CFL number against min(hx, hy).
    pub cfl: f64,
    /// Hard cap on the step regardless of how quiet the flow is.
    pub dt_max: f64,
    /// Apply the 2/3 truncation to nonlinear products (and seeds).
    pub dealias: bool,
    /// Re-project both fields onto odd vertical parity after each step.
    pub enforce_symmetry: bool,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::BadTimeStep {
                dt: self.nu,
                reason: "viscosity must be finite and nonnegative".into(),
            });
        }
        if !(self.cfl > 0.0 && self.cfl <= 2.0) {
            return Err(Error::BadTimeStep { dt: self.cfl, reason: "cfl must lie in (0, 2]".into() });
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::BadTimeStep { dt: self.dt_max, reason: "dt_max must be positive".into() });
        }
        Ok(())
    }
}

/// Spectral state of the pair (scalar, vorticity) at time `t`.
#[derive(Clone, Debug)]
pub struct State {
    pub rho_hat: SpectralField,
    pub omega_hat: SpectralField,
    pub t: f64,
}

impl State {
    pub fn grid(&self) -> Grid {
        self.rho_hat.grid
    }

    pub fn rho(&self) -> RealField {
        to_real(&self.rho_hat)
    }

    pub fn omega(&self) -> RealField {
        to_real(&self.omega_hat)
    }

    /// Physical-space velocity recovered from vorticity.
    pub fn velocity(&self) -> (RealField, RealField) {
        let (u1h, u2h) = velocity_spec(&self.omega_hat);
        (to_real(&u1h), to_real(&u2h))
    }

    pub fn is_finite(&self) -> bool {
        self.rho_hat.is_finite() && self.omega_hat.is_finite()
    }
}

/// Initial velocity recipes for seeding.
pub enum InitialVelocity {
    /// Start from rest.
    Zero,
    /// Stream function `amplitude sin(2 pi kx x1 / Lx) sin(2 pi ky x2 / Ly)`,
    /// odd in x2, hence admissible; velocity is its perpendicular gradient.
    StreamMode { amplitude: f64, kx: usize, ky: usize },
    /// Explicit velocity components (u1 even in x2, u2 odd) on the grid.
    Fields(RealField, RealField),
}

/// Project a spectral field onto odd vertical parity: the reflection
/// x2 -> -x2 maps the mode row ky to -ky, so the odd part is
/// (f(kx, ky) - f(kx, -ky)) / 2; the ky = 0 and Nyquist rows vanish.
pub fn project_odd(f: &mut SpectralField) {
    let g = f.grid;
    for i in 0..g.nx {
        for j in 0..g.ny {
            let jr = g.reflect_row(j);
            if j < jr {
                let odd = 0.5 * (f.data[[i, j]] - f.data[[i, jr]]);
                f.data[[i, j]] = odd;
                f.data[[i, jr]] = -odd;
            } else if j == jr {
                f.data[[i, j]] = num_complex::Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Largest-magnitude deviation from odd vertical parity in physical space.
pub fn parity_defect(f: &RealField) -> f64 {
    let g = f.grid;
    let mut worst = 0.0f64;
    for i in 0..g.nx {
        for j in 0..g.ny {
            let jr = g.reflect_row(j);
            worst = worst.max((f.data[[i, j]] + f.data[[i, jr]]).abs());
        }
    }
    worst
}

/// Build the initial state: rasterize the patch contour into the mirror
/// scalar, derive vorticity from the requested velocity, then dealias and
/// project both onto the odd-parity sector.
pub fn seed_state(
    contour: &Contour,
    grid: Grid,
    epsilon: f64,
    u0: &InitialVelocity,
    cfg: &SolverConfig,
) -> Result<State> {
    cfg.validate()?;
    let rho = contour.rasterize(&grid, epsilon)?;
    let mut rho_hat = to_spectral(&rho);

    let mut omega_hat = match u0 {
        InitialVelocity::Zero => SpectralField::zeros(grid),
        InitialVelocity::StreamMode { amplitude, kx, ky } => {
            if *kx == 0 || *ky == 0 {
                return Err(Error::BadSeed("stream-mode wavenumbers must be nonzero".into()));
            }
            if *kx >= grid.nx / 2 || *ky >= grid.ny / 2 {
                return Err(Error::BadSeed(format!(
                    "stream mode ({kx}, {ky}) is beyond the grid Nyquist"
                )));
            }
            let (a, kx, ky) = (*amplitude, *kx as f64, *ky as f64);
            let qx = 2.0 * std::f64::consts::PI * kx / grid.lx;
            let qy = 2.0 * std::f64::consts::PI * ky / grid.ly;
            // omega = laplacian(psi) = -(qx^2 + qy^2) psi.
            let w = RealField::from_fn(grid, |x, y| {
                -(qx * qx + qy * qy) * a * (qx * x).sin() * (qy * y).sin()
            });
            to_spectral(&w)
        }
        InitialVelocity::Fields(u1, u2) => {
            if u1.grid != grid || u2.grid != grid {
                return Err(Error::BadSeed("initial velocity grids do not match".into()));
            }
            if !(u1.is_finite() && u2.is_finite()) {
                return Err(Error::BadSeed("initial velocity is not finite".into()));
            }
            let u1h = to_spectral(u1);
            let u2h = to_spectral(u2);
            let mut w = derivative_x_spec(&u2h);
            let dy = derivative_y_spec(&u1h);
            w.data.zip_mut_with(&dy.data, |a, b| *a -= b);
            w
        }
    };

    if cfg.dealias {
        dealias_spec(&mut rho_hat);
        dealias_spec(&mut omega_hat);
    }
    project_odd(&mut rho_hat);
    project_odd(&mut omega_hat);
    omega_hat.data[[0, 0]] = num_complex::Complex64::new(0.0, 0.0);

    let state = State { rho_hat, omega_hat, t: 0.0 };
    if !state.is_finite() {
        return Err(Error::NonFinite { context: "seeding", t: 0.0 });
    }
    Ok(state)
}

/// Nonlinear right-hand sides (everything except vorticity diffusion):
/// scalar: -(u . grad) rho; vorticity: -(u . grad) omega - d_x1 rho.
fn rhs(rho_hat: &SpectralField, omega_hat: &SpectralField, dealias: bool) -> (SpectralField, SpectralField) {
    let (u1h, u2h) = velocity_spec(omega_hat);
    let rx_h = derivative_x_spec(rho_hat);
    let ry_h = derivative_y_spec(rho_hat);
    let wx_h = derivative_x_spec(omega_hat);
    let wy_h = derivative_y_spec(omega_hat);

    let u1 = to_real(&u1h);
    let u2 = to_real(&u2h);
    let rx = to_real(&rx_h);
    let ry = to_real(&ry_h);
    let wx = to_real(&wx_h);
    let wy = to_real(&wy_h);

    let grid = rho_hat.grid;
    let mut adv_r = RealField::zeros(grid);
    let mut adv_w = RealField::zeros(grid);
    ndarray::Zip::from(&mut adv_r.data)
        .and(&u1.data)
        .and(&u2.data)
        .and(&rx.data)
        .and(&ry.data)
        .for_each(|o, &a, &b, &gx, &gy| *o = a * gx + b * gy);
    ndarray::Zip::from(&mut adv_w.data)
        .and(&u1.data)
        .and(&u2.data)
        .and(&wx.data)
        .and(&wy.data)
        .for_each(|o, &a, &b, &gx, &gy| *o = a * gx + b * gy);

    let mut rho_rhs = to_spectral(&adv_r);
    let mut omega_rhs = to_spectral(&adv_w);
    if dealias {
        dealias_spec(&mut rho_rhs);
        dealias_spec(&mut omega_rhs);
    }
    rho_rhs.data.mapv_inplace(|v| -v);
    // Buoyancy source enters undealiased: it is linear in the scalar.
    ndarray::Zip::from(&mut omega_rhs.data)
        .and(&rx_h.data)
        .for_each(|o, &s| *o = -*o - s);
    let zero = num_complex::Complex64::new(0.0, 0.0);
    rho_rhs.data[[0, 0]] = zero;
    omega_rhs.data[[0, 0]] = zero;
    (rho_rhs, omega_rhs)
}

/// Multiply each mode by exp(factor |k|^2); factor = -nu dt gives the
/// exact diffusion propagator over dt.
fn diffuse_exp(f: &SpectralField, factor: f64) -> SpectralField {
    let g = f.grid;
    let mut out = f.clone();
    for i in 0..g.nx {
        let kx = g.kx(i);
        for j in 0..g.ny {
            let ky = g.ky(j);
            out.data[[i, j]] *= (factor * (kx * kx + ky * ky)).exp();
        }
    }
    out
}

fn lincomb(base: &SpectralField, scale: f64, slope: &SpectralField) -> SpectralField {
    let mut out = base.clone();
    out.data.zip_mut_with(&slope.data, |a, b| *a += scale * b);
    out
}

/// Advective step limit: `cfl min(hx, hy) / max |u|`, capped at `dt_max`.
pub fn cfl_dt(state: &State, cfg: &SolverConfig) -> f64 {
    let (u1, u2) = state.velocity();
    let umax = u1.max_abs().max(u2.max_abs()).max(1e-12);
    let h = state.grid().hx().min(state.grid().hy());
    (cfg.cfl * h / umax).min(cfg.dt_max)
}

/// One integrating-factor RK4 step of size `dt`.
///
/// The substitution v = exp(nu |k|^2 t) omega removes the stiff diffusion
/// term exactly; classic RK4 on (rho, v) then unwinds back to omega with
/// the half- and full-step propagators E = exp(-nu |k|^2 dt / 2), E^2.
pub fn step(state: &mut State, cfg: &SolverConfig, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BadTimeStep { dt, reason: "step must be positive and finite".into() });
    }
    let half = 0.5 * dt;
    let e_half = -cfg.nu * half; // exponent factor per |k|^2
    let (r1, w1) = rhs(&state.rho_hat, &state.omega_hat, cfg.dealias);

    let rho_b = lincomb(&state.rho_hat, half, &r1);
    let omega_b = diffuse_exp(&lincomb(&state.omega_hat, half, &w1), e_half);
    let (r2, w2) = rhs(&rho_b, &omega_b, cfg.dealias);

    let rho_c = lincomb(&state.rho_hat, half, &r2);
    let omega_c = lincomb(&diffuse_exp(&state.omega_hat, e_half), half, &w2);
    let (r3, w3) = rhs(&rho_c, &omega_c, cfg.dealias);

    let rho_d = lincomb(&state.rho_hat, dt, &r3);
    let omega_d = diffuse_exp(
        &lincomb(&diffuse_exp(&state.omega_hat, e_half), dt, &w3),
        e_half,
    );
    let (r4, w4) = rhs(&rho_d, &omega_d, cfg.dealias);

    // rho(t+dt) = rho + dt/6 (r1 + 2 r2 + 2 r3 + r4)
    let sixth = dt / 6.0;
    ndarray::Zip::from(&mut state.rho_hat.data)
        .and(&r1.data)
        .and(&r2.data)
        .and(&r3.data)
        .and(&r4.data)
        .for_each(|o, &a, &b, &c, &d| *o += sixth * (a + 2.0 * b + 2.0 * c + d));

    // omega(t+dt) = E^2 omega + dt/6 (E^2 w1 + 2 E (w2 + w3) + w4)
    let w1e = diffuse_exp(&w1, 2.0 * e_half);
    let w2e = diffuse_exp(&w2, e_half);
    let w3e = diffuse_exp(&w3, e_half);
    let omega_new = diffuse_exp(&state.omega_hat, 2.0 * e_half);
    state.omega_hat = omega_new;
    ndarray::Zip::from(&mut state.omega_hat.data)
        .and(&w1e.data)
        .and(&w2e.data)
        .and(&w3e.data)
        .and(&w4.data)
        .for_each(|o, &a, &b, &c, &d| *o += sixth * (a + 2.0 * (b + c) + d));

    if cfg.enforce_symmetry {
        project_odd(&mut state.rho_hat);
        project_odd(&mut state.omega_hat);
    }
    let zero = num_complex::Complex64::new(0.0, 0.0);
    state.rho_hat.data[[0, 0]] = zero;
    state.omega_hat.data[[0, 0]] = zero;

    state.t += dt;
    if !state.is_finite() {
        return Err(Error::NonFinite { context: "time step", t: state.t });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use std::f64::consts::PI;

    fn cfg(nu: f64) -> SolverConfig {
        SolverConfig { nu, cfl: 0.4, dt_max: 0.05, dealias: true, enforce_symmetry: false }
    }

    /// Odd band-limited scalar built from a few sine rows.
    fn odd_field(grid: Grid) -> RealField {
        RealField::from_fn(grid, |x, y| {
            let qx = 2.0 * PI / grid.lx;
            let qy = 2.0 * PI / grid.ly;
            (qy * y).sin() * (1.0 + 0.3 * (2.0 * qx * x).cos())
                + 0.2 * (2.0 * qy * y).sin() * (qx * x).sin()
        })
    }

    #[test]
    fn single_vertical_mode_decays_at_the_exact_viscous_rate() {
        let g = Grid::new(32, 32, 8.0, 8.0).unwrap();
        let nu = 0.1;
        let qy = 2.0 * PI * 2.0 / g.ly;
        let w0 = RealField::from_fn(g, |_, y| (qy * y).sin());
        let mut st = State {
            rho_hat: SpectralField::zeros(g),
            omega_hat: to_spectral(&w0),
            t: 0.0,
        };
        // A single-row vorticity self-advects to zero: u is horizontal and
        // shear-free along x1, so the only dynamics left is diffusion,
        // which the integrating factor reproduces exactly.
        let c = cfg(nu);
        let dt = 0.01;
        for _ in 0..100 {
            step(&mut st, &c, dt).unwrap();
        }
        let want = (-nu * qy * qy * 1.0).exp();
        let w = st.omega();
        // Sample at x2 = 1 where sin(qy x2) = 1.
        let j = 5 * g.ny / 8;
        let got = w.data[[0, j]] / w0.data[[0, j]];
        assert!(
            (got - want).abs() < 1e-12,
            "decay factor {got} want {want}"
        );
    }

    #[test]
    fn buoyancy_source_matches_first_order_growth_from_rest() {
        let g = Grid::new(64, 64, 8.0, 8.0).unwrap();
        let c = SolverConfig { nu: 0.0, ..cfg(0.0) };
        let rho0 = odd_field(g);
        let rho0_hat = to_spectral(&rho0);
        let dx = to_real(&derivative_x_spec(&rho0_hat));
        let mut errs = Vec::new();
        for dt in [1e-3, 1e-4] {
            let mut st = State {
                rho_hat: rho0_hat.clone(),
                omega_hat: SpectralField::zeros(g),
                t: 0.0,
            };
            step(&mut st, &c, dt).unwrap();
            // omega(dt) ~ -dt d_x1 rho to O(dt^3) from rest.
            let w = st.omega();
            let mut worst = 0.0f64;
            for i in 0..g.nx {
                for j in 0..g.ny {
                    worst = worst.max((w.data[[i, j]] + dt * dx.data[[i, j]]).abs());
                }
            }
            errs.push(worst / dt);
        }
        assert!(
            errs[1] < errs[0] / 50.0,
            "normalized errors {errs:?} not shrinking at order >= 2"
        );
    }

    #[test]
    fn parity_is_preserved_without_enforcement_and_exact_with_it() {
        let g = Grid::new(48, 48, 8.0, 8.0).unwrap();
        let contour = shapes::disk([4.0, 2.0], 0.7, 256).unwrap();
        let mut free = seed_state(
            &contour,
            g,
            1.5 * g.hx(),
            &InitialVelocity::StreamMode { amplitude: 0.5, kx: 1, ky: 1 },
            &cfg(0.02),
        )
        .unwrap();
        let mut forced = State {
            rho_hat: free.rho_hat.clone(),
            omega_hat: free.omega_hat.clone(),
            t: 0.0,
        };
        let c_free = cfg(0.02);
        let c_forced = SolverConfig { enforce_symmetry: true, ..c_free };
        for _ in 0..20 {
            step(&mut free, &c_free, 0.01).unwrap();
            step(&mut forced, &c_forced, 0.01).unwrap();
        }
        assert!(parity_defect(&free.rho()) < 1e-10);
        assert!(parity_defect(&free.omega()) < 1e-10);
        assert!(parity_defect(&forced.rho()) < 1e-13);
        assert!(parity_defect(&forced.omega()) < 1e-13);
        // The two runs agree: enforcement only removes roundoff.
        let d = free.rho().sub(&forced.rho()).max_abs();
        assert!(d < 1e-11, "enforcement changed the solution by {d}");
    }

    #[test]
    fn seeded_stream_mode_has_expected_energy_and_vorticity() {
        let g = Grid::new(64, 64, 8.0, 8.0).unwrap();
        let contour = shapes::disk([4.0, 2.0], 0.6, 256).unwrap();
        let (amp, kx, ky) = (0.7, 2usize, 1usize);
        let st = seed_state(
            &contour,
            g,
            1.5 * g.hx(),
            &InitialVelocity::StreamMode { amplitude: amp, kx, ky },
            &cfg(0.02),
        )
        .unwrap();
        let qx = 2.0 * PI * kx as f64 / g.lx;
        let qy = 2.0 * PI * ky as f64 / g.ly;
        let w = st.omega();
        let want = RealField::from_fn(g, |x, y| {
            -(qx * qx + qy * qy) * amp * (qx * x).sin() * (qy * y).sin()
        });
        assert!(w.sub(&want).max_abs() < 1e-11);
        // Velocity is the perpendicular gradient of the stream function.
        let (u1, u2) = st.velocity();
        let want_u1 = RealField::from_fn(g, |x, y| -amp * qy * (qx * x).sin() * (qy * y).cos());
        let want_u2 = RealField::from_fn(g, |x, y| amp * qx * (qx * x).cos() * (qy * y).sin());
        assert!(u1.sub(&want_u1).max_abs() < 1e-11);
        assert!(u2.sub(&want_u2).max_abs() < 1e-11);
        // Kinetic energy of the mode: amp^2 (qx^2 + qy^2) Lx Ly / 8.
        let ke = 0.5 * (u1.l2_norm().powi(2) + u2.l2_norm().powi(2));
        let want_ke = amp * amp * (qx * qx + qy * qy) * g.lx * g.ly / 8.0;
        assert!(((ke - want_ke) / want_ke).abs() < 1e-12, "ke {ke} want {want_ke}");
    }

    #[test]
    fn explicit_velocity_fields_reproduce_stream_mode_seeding() {
        let g = Grid::new(48, 48, 8.0, 8.0).unwrap();
        let contour = shapes::disk([4.0, 2.0], 0.6, 256).unwrap();
        let (amp, kx, ky) = (0.3, 1usize, 2usize);
        let qx = 2.0 * PI * kx as f64 / g.lx;
        let qy = 2.0 * PI * ky as f64 / g.ly;
        let u1 = RealField::from_fn(g, |x, y| -amp * qy * (qx * x).sin() * (qy * y).cos());
        let u2 = RealField::from_fn(g, |x, y| amp * qx * (qx * x).cos() * (qy * y).sin());
        let c = cfg(0.02);
        let eps = 1.5 * g.hx();
        let a = seed_state(&contour, g, eps, &InitialVelocity::Fields(u1, u2), &c).unwrap();
        let b = seed_state(
            &contour,
            g,
            eps,
            &InitialVelocity::StreamMode { amplitude: amp, kx, ky },
            &c,
        )
        .unwrap();
        let d = a.omega().sub(&b.omega()).max_abs();
        assert!(d < 1e-11, "omega mismatch {d}");
    }

    #[test]
    fn halving_the_step_shrinks_the_error_sixteenfold() {
        let g = Grid::new(64, 64, 8.0, 8.0).unwrap();
        let contour = shapes::disk([4.0, 2.2], 0.7, 256).unwrap();
        let c = cfg(0.05);
        let seed = seed_state(
            &contour,
            g,
            1.5 * g.hx(),
            &InitialVelocity::StreamMode { amplitude: 0.8, kx: 1, ky: 1 },
            &c,
        )
        .unwrap();
        let t_end = 0.4;
        let run = |steps: usize| {
            let mut st = State {
                rho_hat: seed.rho_hat.clone(),
                omega_hat: seed.omega_hat.clone(),
                t: 0.0,
            };
            let dt = t_end / steps as f64;
            for _ in 0..steps {
                step(&mut st, &c, dt).unwrap();
            }
            st
        };
        let coarse = run(20);
        let medium = run(40);
        let fine = run(80);
        let e1 = coarse.omega().sub(&fine.omega()).max_abs();
        let e2 = medium.omega().sub(&fine.omega()).max_abs();
        // Richardson: e1 ~ 15 eps, e2 ~ eps for a 4th-order method, so the
        // ratio should approach 15; allow generous slack.
        let ratio = e1 / e2;
        assert!(ratio > 10.0 && ratio < 24.0, "convergence ratio {ratio}");
    }

    #[test]
    fn means_stay_pinned_at_zero() {
        let g = Grid::new(48, 48, 8.0, 8.0).unwrap();
        let contour = shapes::disk([4.0, 2.0], 0.7, 256).unwrap();
        let c = cfg(0.02);
        let mut st = seed_state(
            &contour,
            g,
            1.5 * g.hx(),
            &InitialVelocity::StreamMode { amplitude: 1.0, kx: 1, ky: 1 },
            &c,
        )
        .unwrap();
        for _ in 0..25 {
            step(&mut st, &c, 0.01).unwrap();
        }
        assert_eq!(st.rho_hat.data[[0, 0]], num_complex::Complex64::new(0.0, 0.0));
        assert_eq!(st.omega_hat.data[[0, 0]], num_complex::Complex64::new(0.0, 0.0));
        assert!(st.rho().integral().abs() < 1e-10);
        assert!(st.omega().integral().abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_steps_and_configs() {
        let g = Grid::new(32, 32, 8.0, 8.0).unwrap();
        let mut st = State {
            rho_hat: SpectralField::zeros(g),
            omega_hat: SpectralField::zeros(g),
            t: 0.0,
        };
        let c = cfg(0.02);
        assert!(step(&mut st, &c, 0.0).is_err());
        assert!(step(&mut st, &c, -0.1).is_err());
        assert!(step(&mut st, &c, f64::NAN).is_err());
        assert!(SolverConfig { nu: -1.0, ..c }.validate().is_err());
        assert!(SolverConfig { cfl: 0.0, ..c }.validate().is_err());
        assert!(SolverConfig { dt_max: 0.0, ..c }.validate().is_err());
    }

    #[test]
    fn cfl_dt_tracks_the_velocity_scale() {
        let g = Grid::new(64, 64, 8.0, 8.0).unwrap();
        let contour = shapes::disk([4.0, 2.0], 0.6, 256).unwrap();
        let c = SolverConfig { dt_max: 10.0, ..cfg(0.02) };
        let quiet = seed_state(&contour, g, 1.5 * g.hx(), &InitialVelocity::Zero, &c).unwrap();
        // At rest the cap rules.
        assert_eq!(cfl_dt(&quiet, &c), 10.0);
        let busy = seed_state(
            &contour,
            g,
            1.5 * g.hx(),
            &InitialVelocity::StreamMode { amplitude: 2.0, kx: 1, ky: 1 },
            &c,
        )
        .unwrap();
        let (u1, u2) = busy.velocity();
        let umax = u1.max_abs().max(u2.max_abs());
        let want = c.cfl * g.hx().min(g.hy()) / umax;
        assert!((cfl_dt(&busy, &c) - want).abs() < 1e-14);
    }
}

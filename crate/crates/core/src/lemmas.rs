//! Constructive links between patch geometry and negative-order Sobolev
//! norms of the mirror-odd indicator.
//!
//! Two estimates are verified, both through the same duality mechanism: an
//! explicit product test function f(x1, x2) = g(x1) h(x2), extended odd in
//! x2, is paired against mu = 1_D - 1_{D*}. Integration by parts bounds
//! the pairing by Sobolev norms of d1 invlap(mu) shifted by an arbitrary
//! comparison field, while a direct construction bounds the pairing from
//! below by a quantity the geometry controls: the inscribed-disk radius in
//! one case, a fixed constant tied to the horizontal extent and height
//! moment in the other. The inscribed-disk/curvature comparison closes the
//! loop: a curve of small curvature must enclose a large disk.

use std::f64::consts::PI;

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::grid::Grid;
use crate::spectral::{
    derivative_x_spec, hs_norm, hs_norm_spec, inverse_laplacian_spec, to_real, to_spectral,
};

/// Comparison field in the duality estimate.
pub enum OmegaChoice<'a> {
    /// The whole estimate rides on the gradient-norm term.
    Zero,
    /// The natural choice d1 invlap(mu); the gradient term vanishes and the
    /// bound reduces to the plain L2 norm of that stream derivative.
    StreamDerivative,
    /// An externally supplied field, e.g. a vorticity snapshot.
    Supplied(&'a RealField),
}

/// Inscribed disk and the translated-disk chain attached to it.
#[derive(Debug, Clone)]
pub struct CurvatureLemmaParams {
    /// Inscribed-disk center; its height plays the role of b.
    pub center: [f64; 2],
    /// Inscribed-disk radius.
    pub r: f64,
    /// First index n with |D intersect B_n| <= r^2/16.
    pub n_star: usize,
    /// Overlap areas |D intersect B_n| for n = 1..=n_star.
    pub overlaps: Vec<f64>,
}

/// Horizontal extent and height moment of the patch.
#[derive(Debug, Clone)]
pub struct PerimeterLemmaParams {
    /// Leftmost abscissa of the patch; the test function is anchored here.
    pub x_left: f64,
    /// Horizontal extent L (far-left to far-right distance).
    pub l_extent: f64,
    /// Height moment A = integral over D of x2.
    pub a_moment: f64,
}

/// Both sides of a duality inequality together with the analytic lower
/// bound for its left side.
#[derive(Debug, Clone, Copy)]
pub struct LemmaReport {
    /// Pairing integral of mu with d1 f.
    pub lhs: f64,
    /// ||d1 invlap(mu) - Omega||_{H1 dot} * ||grad f||_{L2}.
    pub rhs_h1: f64,
    /// ||Omega||_{L2} * ||lap f||_{L2}.
    pub rhs_l2: f64,
    /// Analytic lower bound for `lhs` from the construction.
    pub predicted_lower_bound: f64,
    /// lhs / (rhs_h1 + rhs_l2).
    pub ratio: f64,
}

/// A product test function sampled on the grid with its analytic
/// derivatives (no spectral differentiation: the pieces are only C^1, and
/// the closed forms are exact where the quadrature needs them).
pub struct TestFunction {
    pub f: RealField,
    pub d1: RealField,
    pub d2: RealField,
    pub lap: RealField,
    /// ||grad f||_{L2} by grid quadrature.
    pub grad_l2: f64,
    /// ||lap f||_{L2} by grid quadrature.
    pub lap_l2: f64,
}

/// Number of quadrature rows for overlap areas and strip masses. Midpoint
/// sampling converges like rows^-3/2 at the disk caps; 600 rows keeps the
/// cap error near 1e-4 r^2, well below the r^2/16 decision threshold.
const OVERLAP_ROWS: usize = 600;

/// Total length of the intersection of [x_lo, x_hi] with the inside
/// intervals encoded by sorted boundary crossings.
fn interval_overlap(crossings: &[f64], x_lo: f64, x_hi: f64) -> f64 {
    let mut total = 0.0;
    for pair in crossings.chunks_exact(2) {
        let lo = pair[0].max(x_lo);
        let hi = pair[1].min(x_hi);
        if hi > lo {
            total += hi - lo;
        }
    }
    total
}

/// Area of the intersection of the patch with the disk, by exact
/// horizontal-interval clipping on a midpoint row quadrature.
pub fn disk_overlap(c: &Contour, center: [f64; 2], r: f64) -> f64 {
    let dy = 2.0 * r / OVERLAP_ROWS as f64;
    let mut area = 0.0;
    for k in 0..OVERLAP_ROWS {
        let y = center[1] - r + (k as f64 + 0.5) * dy;
        let half = (r * r - (y - center[1]).powi(2)).max(0.0).sqrt();
        let mut xs = c.row_crossings(y);
        if xs.len() < 2 {
            continue;
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        area += dy * interval_overlap(&xs, center[0] - half, center[0] + half);
    }
    area
}

/// Mass of the patch inside the axis-aligned box, same row quadrature.
fn box_mass(c: &Contour, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> f64 {
    if y_hi <= y_lo || x_hi <= x_lo {
        return 0.0;
    }
    let dy = (y_hi - y_lo) / OVERLAP_ROWS as f64;
    let mut mass = 0.0;
    for k in 0..OVERLAP_ROWS {
        let y = y_lo + (k as f64 + 0.5) * dy;
        let mut xs = c.row_crossings(y);
        if xs.len() < 2 {
            continue;
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        mass += dy * interval_overlap(&xs, x_lo, x_hi);
    }
    mass
}

/// March disks of radius `r` rightward from `center` in steps of 2r and
/// return the first index whose overlap with the patch falls to r^2/16,
/// together with every overlap measured on the way.
///
/// The translates are pairwise disjoint, so the overlaps sum to at most
/// the patch area; for a unit-area patch the first index to pass the
/// threshold can therefore not exceed 32/r^2, and exceeding that bound is
/// reported as a violation rather than searched past.
pub fn find_nstar(c: &Contour, center: [f64; 2], r: f64) -> Result<CurvatureLemmaParams> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadLemmaSetup(format!("disk radius {r} must be positive")));
    }
    // The construction needs the seed disk inside the patch: center plus a
    // ring of boundary samples must pass the membership test.
    if !c.contains(center) {
        return Err(Error::BadLemmaSetup("disk center outside the patch".into()));
    }
    let shrink = 1.0 - 1e-9;
    for k in 0..128 {
        let a = 2.0 * PI * k as f64 / 128.0;
        let p = [center[0] + shrink * r * a.cos(), center[1] + shrink * r * a.sin()];
        if !c.contains(p) {
            return Err(Error::BadLemmaSetup(format!(
                "disk of radius {r} at ({}, {}) leaves the patch near angle {a:.3}",
                center[0], center[1]
            )));
        }
    }

    let threshold = r * r / 16.0;
    let cap = (32.0 / (r * r)).ceil() as usize;
    let mut overlaps = Vec::new();
    for n in 1..=cap {
        let overlap = disk_overlap(c, [center[0] + 2.0 * r * n as f64, center[1]], r);
        overlaps.push(overlap);
        if overlap <= threshold {
            return Ok(CurvatureLemmaParams { center, r, n_star: n, overlaps });
        }
    }
    Err(Error::LemmaViolation(format!(
        "no translated disk reached overlap <= r^2/16 within the bound 32/r^2 = {cap}"
    )))
}

/// Piecewise value, first, and second derivative of the cosine plateau
/// profile for the inscribed-disk estimate: up-ramp on (0, r], plateau to
/// 2 r n*, down-ramp of the same width.
fn curvature_g(s: f64, r: f64, n_star: usize) -> (f64, f64, f64) {
    let plateau_end = 2.0 * r * n_star as f64;
    if s <= 0.0 || s > plateau_end + r {
        (0.0, 0.0, 0.0)
    } else if s <= r {
        let a = PI * s / r;
        (
            0.5 * (1.0 - a.cos()),
            0.5 * PI / r * a.sin(),
            0.5 * (PI / r).powi(2) * a.cos(),
        )
    } else if s <= plateau_end {
        (1.0, 0.0, 0.0)
    } else {
        let a = PI * (s - plateau_end) / r;
        (
            0.5 * (1.0 + a.cos()),
            -0.5 * PI / r * a.sin(),
            -0.5 * (PI / r).powi(2) * a.cos(),
        )
    }
}

/// Cosine bump of half-width r around zero (the vertical factor for the
/// inscribed-disk estimate, centered at the disk height).
fn curvature_h(tau: f64, r: f64) -> (f64, f64, f64) {
    if tau.abs() >= r {
        (0.0, 0.0, 0.0)
    } else {
        let a = PI * tau / r;
        (
            0.5 * (1.0 + a.cos()),
            -0.5 * PI / r * a.sin(),
            -0.5 * (PI / r).powi(2) * a.cos(),
        )
    }
}

/// Assemble a product test function, odd in x2, from horizontal and
/// vertical profiles given as (value, first, second derivative) closures
/// of the upper-half-plane coordinates.
fn assemble_odd_product(
    grid: &Grid,
    g: impl Fn(f64) -> (f64, f64, f64),
    h: impl Fn(f64) -> (f64, f64, f64),
) -> TestFunction {
    let mut f = RealField::zeros(*grid);
    let mut d1 = RealField::zeros(*grid);
    let mut d2 = RealField::zeros(*grid);
    let mut lap = RealField::zeros(*grid);
    for i in 0..grid.nx {
        let (gv, gp, gpp) = g(grid.x1(i));
        if gv == 0.0 && gp == 0.0 && gpp == 0.0 {
            continue;
        }
        for j in 0..grid.ny {
            let x2 = grid.x2(j);
            let sign = if x2 < 0.0 { -1.0 } else { 1.0 };
            let (hv, hp, hpp) = h(x2.abs());
            if hv == 0.0 && hp == 0.0 && hpp == 0.0 {
                continue;
            }
            f.data[[i, j]] = sign * gv * hv;
            d1.data[[i, j]] = sign * gp * hv;
            // Chain rule through |x2| makes the x2-derivative even.
            d2.data[[i, j]] = gv * hp;
            lap.data[[i, j]] = sign * (gpp * hv + gv * hpp);
        }
    }
    let grad_l2 = (d1.l2_norm().powi(2) + d2.l2_norm().powi(2)).sqrt();
    let lap_l2 = lap.l2_norm();
    TestFunction { f, d1, d2, lap, grad_l2, lap_l2 }
}

/// Test function for the inscribed-disk estimate: cosine plateau in x1
/// anchored at the disk center, cosine bump of half-width r at the disk
/// height in x2, extended odd in x2.
///
/// The displayed extension in the source derivation is even, but the very
/// next step uses that mu and d1 f are both odd in x2 and keeps a factor
/// two; odd extension is what makes that step correct, so odd is what is
/// built (the parity test below pins it).
pub fn build_f_curvature(
    grid: &Grid,
    center: [f64; 2],
    r: f64,
    n_star: usize,
) -> Result<TestFunction> {
    let h_max = grid.hx().max(grid.hy());
    if r < 8.0 * h_max {
        return Err(Error::BadLemmaSetup(format!(
            "disk radius {r} spans fewer than 8 cells (cell {h_max})"
        )));
    }
    if n_star == 0 {
        return Err(Error::BadLemmaSetup("translated-disk index must be at least 1".into()));
    }
    let b = center[1];
    if !(b - r > 0.0) {
        return Err(Error::BadLemmaSetup(format!(
            "vertical bump (b = {b}, r = {r}) dips below the symmetry axis"
        )));
    }
    if b + r >= 0.5 * grid.ly {
        return Err(Error::BadLemmaSetup("vertical bump reaches the top seam".into()));
    }
    let support_end = center[0] + 2.0 * r * n_star as f64 + r;
    if center[0] < 0.0 || support_end >= grid.lx {
        return Err(Error::BadLemmaSetup(format!(
            "horizontal support [{}, {support_end}] leaves the domain [0, {})",
            center[0], grid.lx
        )));
    }

    let cx = center[0];
    let tf = assemble_odd_product(
        grid,
        |x1| curvature_g(x1 - cx, r, n_star),
        |y| curvature_h(y - b, r),
    );
    debug_assert!(tf.d1.max_abs() <= 0.5 * PI / r * (1.0 + 1e-12));
    Ok(tf)
}

/// Horizontal profile for the extent estimate: slope ramps linearly up
/// over the width `w`, holds 1 until L - w, ramps back to zero at L, then
/// mirrors (g(s) = g(2L - s)) so the profile returns to zero at 2L.
fn perimeter_g(s: f64, l: f64, w: f64) -> (f64, f64, f64) {
    if s <= 0.0 || s >= 2.0 * l {
        return (0.0, 0.0, 0.0);
    }
    if s > l {
        let (v, p, pp) = perimeter_g(2.0 * l - s, l, w);
        return (v, -p, pp);
    }
    if s <= w {
        (0.5 * s * s / w, s / w, 1.0 / w)
    } else if s <= l - w {
        (s - 0.5 * w, 1.0, 0.0)
    } else {
        let t = l - s;
        (l - 0.5 * w - 0.5 * t * t / w, t / w, -1.0 / w)
    }
}

/// Vertical profile for the extent estimate: C^1 ramp with triangular
/// slope over (0, v), plateau 1 to 4A, mirrored ramp down to zero at
/// 4A + v. The triangular slope is the smallest-curvature C^1 ramp that
/// fits the prescribed width, with peak slope 2/v and |h''| = 4/v^2.
fn perimeter_h(tau: f64, a4: f64, v: f64) -> (f64, f64, f64) {
    if tau <= 0.0 || tau >= a4 + v {
        return (0.0, 0.0, 0.0);
    }
    if tau >= v && tau <= a4 {
        return (1.0, 0.0, 0.0);
    }
    // Distance into the ramp, measured from its outer (zero) end.
    let s = if tau < v { tau } else { a4 + v - tau };
    let up = tau < v;
    let peak = 2.0 / v;
    let (val, slope, curv) = if s <= 0.5 * v {
        (peak * s * s / v, 2.0 * peak * s / v, 2.0 * peak / v)
    } else {
        (1.0 - peak * (v - s).powi(2) / v, 2.0 * peak * (v - s) / v, -2.0 * peak / v)
    };
    if up {
        (val, slope, curv)
    } else {
        (val, -slope, curv)
    }
}

/// Test function for the extent estimate, odd in x2, anchored at the
/// leftmost point of the patch.
///
/// The prescribed vertical ramp width 1/(4L) forces a mean slope of 4L, so
/// no C^1 profile can also satisfy a sup-slope bound of 4L; the triangular
/// slope used here is the C^1 minimizer of the curvature bound at that
/// width, with sup |h'| = 8L and sup |h''| = 64 L^2. The horizontal
/// profile meets its stated bounds exactly (|g'| <= 1, |g''| = 32A on the
/// ramps).
pub fn build_f_perimeter(
    grid: &Grid,
    x_left: f64,
    l_extent: f64,
    a_moment: f64,
) -> Result<TestFunction> {
    if !(l_extent > 0.0 && l_extent.is_finite()) || !(a_moment > 0.0 && a_moment.is_finite()) {
        return Err(Error::BadLemmaSetup(format!(
            "extent {l_extent} and height moment {a_moment} must be positive"
        )));
    }
    if 16.0 * a_moment * l_extent <= 1.0 {
        return Err(Error::BadLemmaSetup(format!(
            "strip condition 16 A L > 1 fails (A = {a_moment}, L = {l_extent})"
        )));
    }
    let w = 1.0 / (32.0 * a_moment);
    let v = 1.0 / (4.0 * l_extent);
    if w < 4.0 * grid.hx() * (1.0 - 1e-12) {
        return Err(Error::BadLemmaSetup(format!(
            "horizontal ramp width {w} spans fewer than 4 cells (hx = {})",
            grid.hx()
        )));
    }
    if v < 4.0 * grid.hy() * (1.0 - 1e-12) {
        return Err(Error::BadLemmaSetup(format!(
            "vertical ramp width {v} spans fewer than 4 cells (hy = {})",
            grid.hy()
        )));
    }
    if 2.0 * w >= l_extent {
        return Err(Error::BadLemmaSetup("horizontal ramps overlap: L < 1/(16A)".into()));
    }
    if x_left < 0.0 || x_left + 2.0 * l_extent >= grid.lx {
        return Err(Error::BadLemmaSetup(format!(
            "horizontal support [{x_left}, {}] leaves the domain [0, {})",
            x_left + 2.0 * l_extent,
            grid.lx
        )));
    }
    let a4 = 4.0 * a_moment;
    if a4 + v >= 0.5 * grid.ly {
        return Err(Error::BadLemmaSetup(format!(
            "vertical support reaches {} but the half-domain height is {}",
            a4 + v,
            0.5 * grid.ly
        )));
    }

    let tf = assemble_odd_product(
        grid,
        |x1| perimeter_g(x1 - x_left, l_extent, w),
        |y| perimeter_h(y, a4, v),
    );
    debug_assert!(tf.d1.max_abs() <= 1.0 + 1e-12);
    Ok(tf)
}

/// Evaluate the duality estimate: the pairing of `mu` with d1 f against
/// the Sobolev bound for the requested comparison field. Shared by both
/// lemma checks.
fn duality_sides(
    mu: &RealField,
    tf: &TestFunction,
    omega: &OmegaChoice,
) -> Result<(f64, f64, f64)> {
    let lhs = mu.mul_pointwise(&tf.d1).integral();
    let stream_hat = derivative_x_spec(&inverse_laplacian_spec(&to_spectral(mu)));
    let (h1, l2) = match omega {
        OmegaChoice::Zero => (hs_norm_spec(&stream_hat, 1.0), 0.0),
        OmegaChoice::StreamDerivative => (0.0, hs_norm_spec(&stream_hat, 0.0)),
        OmegaChoice::Supplied(w) => {
            let stream = to_real(&stream_hat);
            (hs_norm(&stream.sub(w), 1.0), w.l2_norm())
        }
    };
    let rhs_h1 = h1 * tf.grad_l2;
    let rhs_l2 = l2 * tf.lap_l2;
    if lhs > (rhs_h1 + rhs_l2) * (1.0 + 1e-6) + 1e-12 {
        return Err(Error::LemmaViolation(format!(
            "duality estimate fails: pairing {lhs} exceeds bound {rhs_h1} + {rhs_l2}"
        )));
    }
    Ok((lhs, rhs_h1, rhs_l2))
}

/// Analytic lower-bound constant for the inscribed-disk pairing, per unit
/// radius: 2 (sqrt(14)/8 - pi/32).
///
/// The source derivation displays 2 (pi sqrt(14)/8 - pi/32): its chain
/// evaluates `pi r * integral sin(pi x1) dx1 * integral (...) dx2` but the
/// sine integral already carries a 1/pi, which the displayed constant
/// keeps. The displayed value 2.742 r is impossible: the pairing is at
/// most 2r for any shape (|integral of g' h over the upper plane| <= r and
/// the factor 2 from mirror symmetry), so the corrected constant 0.7391 r
/// is what the construction proves and what is enforced here.
pub const CURVATURE_LHS_CONSTANT: f64 = 2.0 * (0.46770717334674267 - PI / 32.0);

/// Constant as displayed in the source derivation (kept for reporting; no
/// shape can attain it).
pub const CURVATURE_LHS_CONSTANT_AS_STATED: f64 = 2.0 * (PI * 0.46770717334674267 - PI / 32.0);

/// Full inscribed-disk check: find the disk and the translated-disk
/// index, build the test function, and evaluate both sides of the duality
/// estimate. Errors if the measured pairing falls below 98% of the
/// corrected analytic bound, or if the duality inequality itself fails.
pub fn check_inscribed_disk_pairing(
    c: &Contour,
    grid: &Grid,
    epsilon: f64,
    omega: &OmegaChoice,
) -> Result<(LemmaReport, CurvatureLemmaParams)> {
    let (center, r) = c.inscribed_disk();
    let params = find_nstar(c, center, r)?;
    let tf = build_f_curvature(grid, center, r, params.n_star)?;
    let mu = c.rasterize(grid, epsilon)?;
    let (lhs, rhs_h1, rhs_l2) = duality_sides(&mu, &tf, omega)?;
    let predicted_lower_bound = CURVATURE_LHS_CONSTANT * r;
    if lhs < predicted_lower_bound * 0.98 {
        return Err(Error::LemmaViolation(format!(
            "pairing {lhs} fell below the analytic bound {predicted_lower_bound} for r = {r}"
        )));
    }
    let report = LemmaReport {
        lhs,
        rhs_h1,
        rhs_l2,
        predicted_lower_bound,
        ratio: lhs / (rhs_h1 + rhs_l2),
    };
    Ok((report, params))
}

/// Full extent check: measure L and A from the contour, verify the strip
/// confinement that the construction relies on, build the test function,
/// and evaluate the duality estimate. Errors if the pairing falls below
/// 0.5 by more than 5%, if confinement fails, or if duality fails.
pub fn check_extent_pairing(
    c: &Contour,
    grid: &Grid,
    epsilon: f64,
    omega: &OmegaChoice,
) -> Result<(LemmaReport, PerimeterLemmaParams)> {
    let geometry = c.measure(0.0);
    let (lo, hi) = c.bounding_box();
    let l_extent = hi[0] - lo[0];
    let a_moment = geometry.centroid_height * geometry.area;
    if !((geometry.area - 1.0).abs() <= 0.02) {
        return Err(Error::BadLemmaSetup(format!(
            "patch area {} is not normalized to 1 (the confinement bounds assume unit mass)",
            geometry.area
        )));
    }
    let params = PerimeterLemmaParams { x_left: lo[0], l_extent, a_moment };
    let tf = build_f_perimeter(grid, params.x_left, l_extent, a_moment)?;

    // Confinement: at most a quarter of the mass above 4A, at most a
    // quarter below 1/(4L), and after removing two side strips of width
    // 1/(32A) at least a quarter remains in the central box.
    let a4 = 4.0 * a_moment;
    let v = 1.0 / (4.0 * l_extent);
    let w = 1.0 / (32.0 * a_moment);
    let quad_tol = 5e-3;
    let mass_above = box_mass(c, lo[0], hi[0], a4, hi[1].max(a4));
    if mass_above > 0.25 * (1.0 + quad_tol) {
        return Err(Error::LemmaViolation(format!(
            "mass above 4A is {mass_above}, exceeding the bound 1/4"
        )));
    }
    let mass_below = box_mass(c, lo[0], hi[0], lo[1].min(v), v);
    if mass_below > 0.25 * (1.0 + quad_tol) {
        return Err(Error::LemmaViolation(format!(
            "mass below 1/(4L) is {mass_below}, exceeding the bound 1/4"
        )));
    }
    let confined = box_mass(c, lo[0] + w, lo[0] + l_extent - w, v, a4);
    if confined < (geometry.area - 0.75) * (1.0 - quad_tol) {
        return Err(Error::LemmaViolation(format!(
            "confined mass {confined} fell below the guaranteed area - 3/4"
        )));
    }

    let mu = c.rasterize(grid, epsilon)?;
    let (lhs, rhs_h1, rhs_l2) = duality_sides(&mu, &tf, omega)?;
    let predicted_lower_bound = 0.5;
    if lhs < predicted_lower_bound * 0.95 {
        return Err(Error::LemmaViolation(format!(
            "pairing {lhs} fell below the analytic bound 1/2"
        )));
    }
    let report = LemmaReport {
        lhs,
        rhs_h1,
        rhs_l2,
        predicted_lower_bound,
        ratio: lhs / (rhs_h1 + rhs_l2),
    };
    Ok((report, params))
}

/// Product of the inscribed-disk radius with the maximal curvature
/// magnitude. A smooth simple closed curve always yields at least 1
/// (rescale so max |kappa| = 1: the curve then encloses a unit disk);
/// values below 0.99 are reported as violations.
pub fn pestov_ionin_check(c: &Contour) -> Result<f64> {
    let r = c.inscribed_radius();
    let kappa_max = c
        .curvature_profile()
        .into_iter()
        .fold(0.0f64, |acc, k| acc.max(k.abs()));
    let product = r * kappa_max;
    if !(product >= 0.99) {
        return Err(Error::LemmaViolation(format!(
            "inscribed radius {r} times max curvature {kappa_max} is {product} < 0.99"
        )));
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    /// Closed form for the area of a disk of radius r cut by the vertical
    /// line x = d (area of the part with x1 < d, measured from center).
    fn disk_left_of(r: f64, d: f64) -> f64 {
        if d <= -r {
            0.0
        } else if d >= r {
            PI * r * r
        } else {
            let t = d / r;
            r * r * (t * (1.0 - t * t).sqrt() + t.asin() + 0.5 * PI)
        }
    }

    #[test]
    fn tangent_translate_of_a_disk_gives_index_one() {
        let r = (1.0 / PI).sqrt(); // unit area
        let c = shapes::disk([4.0, 2.0], r, 512).unwrap();
        let params = find_nstar(&c, [4.0, 2.0], r * 0.999).unwrap();
        assert_eq!(params.n_star, 1);
        assert!(params.overlaps[0] < 1e-4, "tangent disks should not overlap");
    }

    #[test]
    fn overlaps_across_a_rectangle_match_the_closed_form() {
        // Rectangle slightly taller than 2r and of width 2.0 holding the
        // seed disk at its left end: each translate overlaps in exactly
        // the disk area left of the rectangle's right edge.
        let r = 0.25;
        let width = 2.0;
        let c = shapes::rectangle([4.0, 2.0], width, 2.2 * r, 1024).unwrap();
        let center = [4.0 - 0.5 * width + r, 2.0];
        let params = find_nstar(&c, center, r).unwrap();
        let right = 4.0 + 0.5 * width;
        for (idx, overlap) in params.overlaps.iter().enumerate() {
            let n = idx + 1;
            let cx = center[0] + 2.0 * r * n as f64;
            let expected = disk_left_of(r, right - cx);
            assert!(
                (overlap - expected).abs() < 2e-3 * r * r + 1e-12,
                "n = {n}: overlap {overlap} vs closed form {expected}"
            );
        }
        // Expected index: first disk whose overlap with the strip drops to
        // r^2/16, straight from the closed form.
        let mut expected_n = 1;
        while disk_left_of(r, right - (center[0] + 2.0 * r * expected_n as f64)) > r * r / 16.0 {
            expected_n += 1;
        }
        assert_eq!(params.n_star, expected_n);
        assert!((params.n_star as f64) <= 32.0 / (r * r));
    }

    #[test]
    fn nstar_rejects_a_disk_that_pokes_out() {
        let c = shapes::disk([4.0, 2.0], 0.5, 256).unwrap();
        let err = find_nstar(&c, [4.3, 2.0], 0.4).unwrap_err();
        assert!(matches!(err, Error::BadLemmaSetup(_)));
    }

    #[test]
    fn curvature_profile_hits_its_closed_form_values() {
        // Grid chosen so the probe points fall exactly on grid nodes.
        let g = Grid::new(256, 256, 8.0, 8.0).unwrap();
        let r = 0.5;
        let b = 2.0;
        let cx = 4.0;
        let tf = build_f_curvature(&g, [cx, b], r, 2).unwrap();
        let at = |x: f64, y: f64| {
            let i = (x / g.hx()).round() as usize;
            let j = ((y + 0.5 * g.ly) / g.hy()).round() as usize;
            (tf.f.data[[i, j]], tf.d1.data[[i, j]], tf.d2.data[[i, j]])
        };
        // g(r/2) = 1/2 on the up-ramp, h(b) = 1 at the bump peak.
        let (f_mid, _, _) = at(cx + 0.5 * r, b);
        assert!((f_mid - 0.5).abs() < 1e-12);
        // Plateau value comes from h alone: f = h(b + r/2) = 1/2.
        let (f_plateau, d1_plateau, _) = at(cx + 2.0 * r, b + 0.5 * r);
        assert!((f_plateau - 0.5).abs() < 1e-12);
        assert!(d1_plateau.abs() < 1e-12);
        // Odd extension: mirrored point flips sign of f but keeps d2.
        let (f_up, d1_up, d2_up) = at(cx + 0.5 * r, b - 0.25 * r);
        let (f_dn, d1_dn, d2_dn) = at(cx + 0.5 * r, -(b - 0.25 * r));
        assert!((f_up + f_dn).abs() < 1e-12);
        assert!((d1_up + d1_dn).abs() < 1e-12);
        assert!((d2_up - d2_dn).abs() < 1e-12);
        // Slope cap from the construction.
        assert!(tf.d1.max_abs() <= 0.5 * PI / r * (1.0 + 1e-12));
        // Finite differences of the sampled f reproduce the analytic
        // derivatives away from the kinks.
        let h = g.hx();
        let probe = [cx + 0.3 * r, b + 0.2 * r];
        let (_, d1_probe, d2_probe) = at(probe[0], probe[1]);
        let fd1 = (at(probe[0] + h, probe[1]).0 - at(probe[0] - h, probe[1]).0) / (2.0 * h);
        let fd2 = (at(probe[0], probe[1] + h).0 - at(probe[0], probe[1] - h).0) / (2.0 * h);
        assert!((fd1 - d1_probe).abs() < 0.02 * d1_probe.abs().max(1.0));
        assert!((fd2 - d2_probe).abs() < 0.02 * d2_probe.abs().max(1.0));
    }

    #[test]
    fn curvature_builder_rejects_bad_setups() {
        let g = Grid::new(128, 128, 8.0, 8.0).unwrap();
        // Too coarse: r under 8 cells.
        assert!(matches!(
            build_f_curvature(&g, [4.0, 2.0], 0.3, 2),
            Err(Error::BadLemmaSetup(_))
        ));
        // Bump dips below the axis.
        assert!(matches!(
            build_f_curvature(&g, [4.0, 0.4], 0.6, 1),
            Err(Error::BadLemmaSetup(_))
        ));
        // Support runs off the right edge.
        assert!(matches!(
            build_f_curvature(&g, [4.0, 2.0], 0.6, 4),
            Err(Error::BadLemmaSetup(_))
        ));
    }

    #[test]
    fn unit_disk_passes_the_inscribed_disk_check_with_every_comparison_field() {
        let g = Grid::new(512, 512, 8.0, 8.0).unwrap();
        let c = shapes::disk([4.0, 2.0], (1.0 / PI).sqrt(), 512).unwrap();
        let eps = 3.0 * g.hx();
        let (report, params) = check_inscribed_disk_pairing(&c, &g, eps, &OmegaChoice::Zero).unwrap();
        assert!(report.lhs <= 2.0 * params.r * (1.0 + 1e-6), "hard cap 2r on the pairing");
        assert!(report.rhs_l2 == 0.0);
        assert!(report.ratio <= 1.0 + 1e-9);
        assert!((params.n_star as f64) <= 32.0 / (params.r * params.r));

        let (report_s, _) = check_inscribed_disk_pairing(&c, &g, eps, &OmegaChoice::StreamDerivative).unwrap();
        assert!(report_s.rhs_h1 == 0.0);
        // Same pairing either way; only the bound side changes.
        assert!((report_s.lhs - report.lhs).abs() < 1e-12);

        let omega_field = RealField::from_fn(g, |_, _| 0.0);
        let (report_w, _) =
            check_inscribed_disk_pairing(&c, &g, eps, &OmegaChoice::Supplied(&omega_field)).unwrap();
        // A supplied zero field must agree with OmegaChoice::Zero.
        assert!((report_w.rhs_h1 - report.rhs_h1).abs() < 1e-9 * report.rhs_h1.abs());
    }

    #[test]
    fn ellipse_family_clears_the_corrected_pairing_bound() {
        let g = Grid::new(512, 512, 8.0, 8.0).unwrap();
        let eps = 3.0 * g.hx();
        for aspect in [1.0, 2.0, 4.0] {
            let c = shapes::unit_area_ellipse([3.5, 2.0], aspect, 512).unwrap();
            let (report, params) = check_inscribed_disk_pairing(&c, &g, eps, &OmegaChoice::Zero).unwrap();
            assert!(
                report.lhs >= CURVATURE_LHS_CONSTANT * params.r * 0.98,
                "aspect {aspect}: lhs {} vs bound {}",
                report.lhs,
                CURVATURE_LHS_CONSTANT * params.r
            );
            // The constant as displayed in the derivation is unattainable:
            // the pairing never exceeds 2r.
            assert!(report.lhs < CURVATURE_LHS_CONSTANT_AS_STATED * params.r);
            assert!(report.lhs <= (report.rhs_h1 + report.rhs_l2) * (1.0 + 1e-6));
        }
    }

    #[test]
    fn perimeter_profiles_meet_their_envelopes() {
        let l = 2.0;
        let a = 1.0;
        let w = 1.0 / (32.0 * a);
        let v = 1.0 / (4.0 * l);
        // Dense scan of the closed forms.
        let n = 40_000;
        let mut max_gp: f64 = 0.0;
        let mut max_gpp: f64 = 0.0;
        for k in 0..=n {
            let s = 2.2 * l * k as f64 / n as f64 - 0.1 * l;
            let (gv, gp, gpp) = perimeter_g(s, l, w);
            assert!((0.0..=l).contains(&gv));
            max_gp = max_gp.max(gp.abs());
            max_gpp = max_gpp.max(gpp.abs());
        }
        assert!(max_gp <= 1.0 + 1e-12);
        assert!(max_gpp <= 32.0 * a * (1.0 + 1e-12));
        // Symmetry about L: g(L - d) = g(L + d).
        for d in [0.1, 0.5, 0.9] {
            let (gl, _, _) = perimeter_g(l - d, l, w);
            let (gr, _, _) = perimeter_g(l + d, l, w);
            assert!((gl - gr).abs() < 1e-12);
        }
        // Slope 1 exactly at mid-extent.
        assert!((perimeter_g(0.5 * l, l, w).1 - 1.0).abs() < 1e-15);

        let mut max_hp: f64 = 0.0;
        let mut max_hpp: f64 = 0.0;
        let a4 = 4.0 * a;
        for k in 0..=n {
            let tau = (a4 + 2.0 * v) * k as f64 / n as f64 - 0.5 * v;
            let (hv, hp, hpp) = perimeter_h(tau, a4, v);
            assert!((-1e-12..=1.0 + 1e-12).contains(&hv));
            max_hp = max_hp.max(hp.abs());
            max_hpp = max_hpp.max(hpp.abs());
        }
        // The C^1 ramp peaks at twice the infeasible flat-slope value and
        // at the matching curvature. The scan cannot land exactly on the
        // slope peak, so pin the peak with a direct closed-form probe.
        assert!(max_hp <= 8.0 * l + 1e-12 && max_hp > 8.0 * l * 0.999);
        assert!((perimeter_h(0.5 * v, a4, v).1 - 8.0 * l).abs() < 1e-12);
        // Curvature is piecewise constant, so any ramp sample is exact.
        assert!((max_hpp - 64.0 * l * l).abs() < 1e-9);
        // Plateau and ends.
        assert!((perimeter_h(0.5 * a4, a4, v).0 - 1.0).abs() < 1e-15);
        assert!(perimeter_h(-1e-9, a4, v).0 == 0.0);
        assert!(perimeter_h(a4 + v + 1e-9, a4, v).0 == 0.0);
    }

    #[test]
    fn unit_disk_passes_the_extent_check() {
        // Spec-style configuration: unit-area disk at height 1, so A = 1,
        // L = 2/sqrt(pi). The vertical support 4A + 1/(4L) needs Ly > 8.5.
        let g = Grid::new(1024, 768, 8.0, 12.0).unwrap();
        let r = (1.0 / PI).sqrt();
        let c = shapes::disk([4.0, 1.0], r, 512).unwrap();
        let eps = 3.0 * g.hy();
        let (report, params) = check_extent_pairing(&c, &g, eps, &OmegaChoice::Zero).unwrap();
        assert!((params.a_moment - 1.0).abs() < 1e-3, "A = b |D| = 1");
        assert!((params.l_extent - 2.0 * r).abs() < 1e-3);
        assert!(report.lhs >= 0.475, "pairing {}", report.lhs);
        assert!(report.lhs <= (report.rhs_h1 + report.rhs_l2) * (1.0 + 1e-6));

        let (report_s, _) = check_extent_pairing(&c, &g, eps, &OmegaChoice::StreamDerivative).unwrap();
        assert!((report_s.lhs - report.lhs).abs() < 1e-12);
        assert!(report_s.rhs_h1 == 0.0 && report_s.rhs_l2 > 0.0);
    }

    #[test]
    fn extent_check_is_translation_invariant() {
        let g = Grid::new(1024, 768, 8.0, 12.0).unwrap();
        let r = (1.0 / PI).sqrt();
        let eps = 3.0 * g.hy();
        let c0 = shapes::disk([3.0, 1.0], r, 512).unwrap();
        let shift = 32.0 * g.hx(); // whole number of cells: same samples
        let c1 = shapes::disk([3.0 + shift, 1.0], r, 512).unwrap();
        let (r0, _) = check_extent_pairing(&c0, &g, eps, &OmegaChoice::Zero).unwrap();
        let (r1, _) = check_extent_pairing(&c1, &g, eps, &OmegaChoice::Zero).unwrap();
        assert!((r0.lhs - r1.lhs).abs() < 1e-9 * r0.lhs.abs());
        assert!((r0.rhs_h1 - r1.rhs_h1).abs() < 1e-9 * r0.rhs_h1.abs());
    }

    #[test]
    fn extent_check_rejects_an_unnormalized_patch() {
        let g = Grid::new(1024, 768, 8.0, 12.0).unwrap();
        let c = shapes::disk([4.0, 1.0], 0.8, 512).unwrap(); // area 2.0
        let err = check_extent_pairing(&c, &g, 3.0 * g.hy(), &OmegaChoice::Zero).unwrap_err();
        assert!(matches!(err, Error::BadLemmaSetup(_)));
    }

    #[test]
    fn inscribed_radius_times_curvature_reaches_one_on_smooth_shapes() {
        let circle = shapes::disk([4.0, 2.0], 0.7, 512).unwrap();
        let p = pestov_ionin_check(&circle).unwrap();
        assert!((p - 1.0).abs() < 5e-3, "circle product {p}");

        // Ellipse: r = minor axis b, max curvature a/b^2, product a/b >= 1.
        let c = shapes::ellipse([4.0, 2.0], 0.9, 0.45, 512).unwrap();
        let p = pestov_ionin_check(&c).unwrap();
        assert!((p - 2.0).abs() < 0.02, "ellipse product {p} should be near a/b");

        for seed in 0..5 {
            let c = shapes::random_star([4.0, 2.0], seed, 512).unwrap();
            let p = pestov_ionin_check(&c).unwrap();
            assert!(p >= 0.99, "seed {seed}: product {p}");
        }
    }
}

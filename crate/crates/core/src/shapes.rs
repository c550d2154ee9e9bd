//! Seed contour builders: disks, ellipses, stadiums, rectangles, dumbbells
//! and reproducible random star-shaped curves, all traced counterclockwise
//! by markers at (approximately) equal arclength.

use crate::contour::Contour;
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Piecewise boundary element used to lay out markers by arclength.
enum Piece {
    Line([f64; 2], [f64; 2]),
    /// Circular arc, angles in radians, traversed th0 -> th1.
    Arc { c: [f64; 2], r: f64, th0: f64, th1: f64 },
}

impl Piece {
    fn len(&self) -> f64 {
        match self {
            Piece::Line(a, b) => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(),
            Piece::Arc { r, th0, th1, .. } => r * (th1 - th0).abs(),
        }
    }

    fn eval(&self, s: f64) -> [f64; 2] {
        match self {
            Piece::Line(a, b) => {
                let t = s / self.len();
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            }
            Piece::Arc { c, r, th0, th1 } => {
                let th = th0 + (s / self.len()) * (th1 - th0);
                [c[0] + r * th.cos(), c[1] + r * th.sin()]
            }
        }
    }
}

/// `n` markers at equal arclength along the concatenated pieces.
fn sample_pieces(pieces: &[Piece], n: usize) -> Vec<[f64; 2]> {
    let lens: Vec<f64> = pieces.iter().map(Piece::len).collect();
    let total: f64 = lens.iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut piece = 0usize;
    let mut consumed = 0.0;
    for k in 0..n {
        let s = total * k as f64 / n as f64;
        while piece + 1 < pieces.len() && s >= consumed + lens[piece] {
            consumed += lens[piece];
            piece += 1;
        }
        out.push(pieces[piece].eval((s - consumed).min(lens[piece])));
    }
    out
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadSeed(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn ellipse(center: [f64; 2], semi_a: f64, semi_b: f64, n: usize) -> Result<Contour> {
    check_positive("semi_a", semi_a)?;
    check_positive("semi_b", semi_b)?;
    let pts = (0..n)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n as f64;
            [center[0] + semi_a * th.cos(), center[1] + semi_b * th.sin()]
        })
        .collect();
    Contour::new(pts)
}

pub fn disk(center: [f64; 2], radius: f64, n: usize) -> Result<Contour> {
    ellipse(center, radius, radius, n)
}

/// Ellipse with unit enclosed area and the given axis ratio
/// `aspect = semi_a / semi_b`.
pub fn unit_area_ellipse(center: [f64; 2], aspect: f64, n: usize) -> Result<Contour> {
    check_positive("aspect", aspect)?;
    let semi_b = 1.0 / (PI * aspect).sqrt();
    ellipse(center, aspect * semi_b, semi_b, n)
}

/// Axis-aligned rectangle traced counterclockwise from the lower-left corner.
pub fn rectangle(center: [f64; 2], width: f64, height: f64, n: usize) -> Result<Contour> {
    check_positive("width", width)?;
    check_positive("height", height)?;
    let (hw, hh) = (0.5 * width, 0.5 * height);
    let c = |dx: f64, dy: f64| [center[0] + dx, center[1] + dy];
    let pieces = [
        Piece::Line(c(-hw, -hh), c(hw, -hh)),
        Piece::Line(c(hw, -hh), c(hw, hh)),
        Piece::Line(c(hw, hh), c(-hw, hh)),
        Piece::Line(c(-hw, hh), c(-hw, -hh)),
    ];
    Contour::new(sample_pieces(&pieces, n))
}

/// Stadium: a `2*half_straight x 2*cap_radius` rectangle with semicircular
/// caps of radius `cap_radius` on the left and right ends.
pub fn stadium(center: [f64; 2], half_straight: f64, cap_radius: f64, n: usize) -> Result<Contour> {
    check_positive("half_straight", half_straight)?;
    check_positive("cap_radius", cap_radius)?;
    let (l, r) = (half_straight, cap_radius);
    let c = |dx: f64, dy: f64| [center[0] + dx, center[1] + dy];
    let pieces = [
        Piece::Line(c(-l, -r), c(l, -r)),
        Piece::Arc { c: c(l, 0.0), r, th0: -0.5 * PI, th1: 0.5 * PI },
        Piece::Line(c(l, r), c(-l, r)),
        Piece::Arc { c: c(-l, 0.0), r, th0: 0.5 * PI, th1: 1.5 * PI },
    ];
    Contour::new(sample_pieces(&pieces, n))
}

/// Two lobes of radius `lobe_radius` centered `lobe_offset` either side of
/// `center`, joined by a straight neck of half-width `neck_halfwidth`.
pub fn dumbbell(
    center: [f64; 2],
    lobe_offset: f64,
    lobe_radius: f64,
    neck_halfwidth: f64,
    n: usize,
) -> Result<Contour> {
    check_positive("lobe_offset", lobe_offset)?;
    check_positive("lobe_radius", lobe_radius)?;
    check_positive("neck_halfwidth", neck_halfwidth)?;
    let (d, r, w) = (lobe_offset, lobe_radius, neck_halfwidth);
    if w >= r {
        return Err(Error::BadSeed(format!(
            "neck half-width {w} must be smaller than the lobe radius {r}"
        )));
    }
    let chord = (r * r - w * w).sqrt();
    if d <= chord {
        return Err(Error::BadSeed(format!(
            "lobes overlap: offset {d} must exceed {chord} for these radii"
        )));
    }
    let beta = (w / r).asin();
    let c = |dx: f64, dy: f64| [center[0] + dx, center[1] + dy];
    let pieces = [
        // Right lobe, from the lower neck attachment around through 0.
        Piece::Arc { c: c(d, 0.0), r, th0: beta - PI, th1: PI - beta },
        Piece::Line(c(d - chord, w), c(-d + chord, w)),
        Piece::Arc { c: c(-d, 0.0), r, th0: beta, th1: 2.0 * PI - beta },
        Piece::Line(c(-d + chord, -w), c(d - chord, -w)),
    ];
    Contour::new(sample_pieces(&pieces, n))
}

/// Reproducible star-shaped curve with unit enclosed area: a unit circle
/// perturbed radially by random low-order Fourier modes (amplitudes fall
/// off as 1/m^2, keeping the curve star-shaped with bounded curvature),
/// then rescaled so the exact area is 1.
pub fn random_star(center: [f64; 2], seed: u64, n: usize) -> Result<Contour> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const M_MAX: usize = 8;
    let mut a = [0.0f64; M_MAX + 1];
    let mut b = [0.0f64; M_MAX + 1];
    let mut coeff_sq = 0.0;
    for m in 2..=M_MAX {
        let amp = 0.35 / (m * m) as f64;
        a[m] = rng.gen_range(-amp..=amp);
        b[m] = rng.gen_range(-amp..=amp);
        coeff_sq += a[m] * a[m] + b[m] * b[m];
    }
    // area = (1/2) integral r(th)^2 dth = pi (1 + coeff_sq / 2) before scaling.
    let scale = 1.0 / (PI * (1.0 + 0.5 * coeff_sq)).sqrt();
    let pts = (0..n)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n as f64;
            let mut rr = 1.0;
            for m in 2..=M_MAX {
                rr += a[m] * (m as f64 * th).cos() + b[m] * (m as f64 * th).sin();
            }
            let rr = rr * scale;
            [center[0] + rr * th.cos(), center[1] + rr * th.sin()]
        })
        .collect();
    Contour::new(pts)
}

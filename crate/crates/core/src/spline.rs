//! Periodic cubic spline through closed-curve markers, parametrized by
//! marker index `t in [0, n)`. Supplies node derivatives for curvature,
//! Gauss-quadrature arclength and area, and equal-arclength resampling.

/// Gauss-Legendre 5-point rule on [0, 1].
const GAUSS_X: [f64; 5] = [
    0.046_910_077_030_668_0,
    0.230_765_344_947_158_4,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332_0,
];
const GAUSS_W: [f64; 5] = [
    0.118_463_442_528_094_55,
    0.239_314_335_249_683_25,
    0.284_444_444_444_444_44,
    0.239_314_335_249_683_25,
    0.118_463_442_528_094_55,
];

/// Solve the cyclic tridiagonal system `m[j-1] + 4 m[j] + m[j+1] = d[j]`
/// (indices mod n) by Sherman-Morrison over two Thomas sweeps.
fn solve_cyclic_141(d: &[f64]) -> Vec<f64> {
    let n = d.len();
    assert!(n >= 3, "cyclic spline needs at least 3 nodes");
    let gamma = -4.0;
    // Modified diagonal.
    let mut b = vec![4.0; n];
    b[0] = 4.0 - gamma;
    b[n - 1] = 4.0 - 1.0 / gamma;
    let thomas = |rhs: &[f64], b: &[f64]| -> Vec<f64> {
        let n = rhs.len();
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = 1.0 / b[0];
        dp[0] = rhs[0] / b[0];
        for i in 1..n {
            let m = b[i] - cp[i - 1];
            cp[i] = 1.0 / m;
            dp[i] = (rhs[i] - dp[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    };
    let y = thomas(d, &b);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = thomas(&u, &b);
    // v = (1, 0, ..., 0, 1/gamma)
    let fact = (y[0] + y[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    (0..n).map(|i| y[i] - fact * z[i]).collect()
}

/// One periodic spline component: values and node second derivatives.
#[derive(Clone, Debug)]
struct Component {
    f: Vec<f64>,
    m: Vec<f64>,
}

impl Component {
    fn fit(f: Vec<f64>) -> Self {
        let n = f.len();
        let d: Vec<f64> = (0..n)
            .map(|j| {
                let prev = f[(j + n - 1) % n];
                let next = f[(j + 1) % n];
                6.0 * (next - 2.0 * f[j] + prev)
            })
            .collect();
        let m = solve_cyclic_141(&d);
        Component { f, m }
    }

    /// Value, first and second parameter derivatives at `t` (wrapped).
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let n = self.f.len();
        let tw = t.rem_euclid(n as f64);
        let j = (tw.floor() as usize).min(n - 1);
        let s = tw - j as f64;
        let jp = (j + 1) % n;
        let (fj, fp, mj, mp) = (self.f[j], self.f[jp], self.m[j], self.m[jp]);
        let r = 1.0 - s;
        let val = fj * r + fp * s + (r * r * r - r) * mj / 6.0 + (s * s * s - s) * mp / 6.0;
        let d1 = fp - fj + (1.0 - 3.0 * r * r) * mj / 6.0 + (3.0 * s * s - 1.0) * mp / 6.0;
        let d2 = r * mj + s * mp;
        (val, d1, d2)
    }
}

/// Periodic cubic spline through a closed sequence of plane points.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    x: Component,
    y: Component,
    n: usize,
}

impl PeriodicSpline {
    pub fn fit(points: &[[f64; 2]]) -> Self {
        assert!(points.len() >= 4, "spline needs at least 4 markers");
        let n = points.len();
        let x = Component::fit(points.iter().map(|p| p[0]).collect());
        let y = Component::fit(points.iter().map(|p| p[1]).collect());
        PeriodicSpline { x, y, n }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        [self.x.eval(t).0, self.y.eval(t).0]
    }

    /// (point, first derivative, second derivative) w.r.t. the index
    /// parameter.
    pub fn jet(&self, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let (x, dx, ddx) = self.x.eval(t);
        let (y, dy, ddy) = self.y.eval(t);
        ([x, y], [dx, dy], [ddx, ddy])
    }

    /// Signed curvature `(x' y'' - y' x'') / |r'|^3`; parametrization
    /// invariant, positive for counterclockwise convex arcs.
    pub fn curvature(&self, t: f64) -> f64 {
        let (_, d1, d2) = self.jet(t);
        let speed_sq = d1[0] * d1[0] + d1[1] * d1[1];
        (d1[0] * d2[1] - d1[1] * d2[0]) / speed_sq.powf(1.5)
    }

    fn segment_length(&self, j: usize, s_end: f64) -> f64 {
        let mut acc = 0.0;
        for (gx, gw) in GAUSS_X.iter().zip(GAUSS_W.iter()) {
            let t = j as f64 + gx * s_end;
            let (_, d1, _) = self.jet(t);
            acc += gw * (d1[0] * d1[0] + d1[1] * d1[1]).sqrt();
        }
        acc * s_end
    }

    /// Arclength accumulated at each node, plus the total as the last entry
    /// (length `n + 1`).
    pub fn arclength_table(&self) -> Vec<f64> {
        let mut table = Vec::with_capacity(self.n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for j in 0..self.n {
            acc += self.segment_length(j, 1.0);
            table.push(acc);
        }
        table
    }

    pub fn total_arclength(&self) -> f64 {
        *self.arclength_table().last().unwrap()
    }

    /// Signed area by Green's theorem, `(1/2) closed_integral (x y' - y x') dt`,
    /// positive for counterclockwise orientation.
    pub fn area(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.n {
            for (gx, gw) in GAUSS_X.iter().zip(GAUSS_W.iter()) {
                let (p, d1, _) = self.jet(j as f64 + gx);
                acc += gw * (p[0] * d1[1] - p[1] * d1[0]);
            }
        }
        0.5 * acc
    }

    /// `count` points at equal arclength along the spline, the first at the
    /// original marker 0.
    pub fn resample(&self, count: usize) -> Vec<[f64; 2]> {
        assert!(count >= 4, "resample needs at least 4 markers");
        let table = self.arclength_table();
        let total = *table.last().unwrap();
        let mut out = Vec::with_capacity(count);
        out.push(self.point(0.0));
        let mut seg = 0usize;
        for k in 1..count {
            let target = total * k as f64 / count as f64;
            while seg + 1 < self.n && table[seg + 1] < target {
                seg += 1;
            }
            let local = target - table[seg];
            // Bisect the in-segment arclength, then polish with one Newton
            // step using |r'(t)| as the derivative.
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            for _ in 0..30 {
                let mid = 0.5 * (lo + hi);
                if self.segment_length(seg, mid) < local {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut s = 0.5 * (lo + hi);
            let (_, d1, _) = self.jet(seg as f64 + s);
            let speed = (d1[0] * d1[0] + d1[1] * d1[1]).sqrt();
            if speed > 0.0 {
                s -= (self.segment_length(seg, s) - local) / speed;
                s = s.clamp(0.0, 1.0);
            }
            out.push(self.point(seg as f64 + s));
        }
        out
    }
}

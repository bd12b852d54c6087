//! Sampling functions `f : T^d -> D`, Verblunsky windows `alpha(n) = f(T^n w)`, and the
//! tube construction: `f` constant on each `U_j = union_{l=0..4} T^{j+lq}(B)`, `1 <= j <= q`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{wrap_signed, TorusDynamics, TorusPoint};
use crate::error::{Error, Result};
use crate::sequence::VerblunskySequence;
use crate::transfer::{gamma_bound, GammaBound};

/// Tube radii at or below this are reported as a degenerate orbit.
pub const RADIUS_FLOOR: f64 = 1e-12;
/// Fraction of the admissible radius actually used by [`ball_radius`].
pub const RADIUS_SAFETY: f64 = 0.9;

#[derive(Clone, Debug)]
pub enum SamplingFunction {
    Constant(Complex64),
    /// `amplitude * exp(2 pi i sum_i m_i x_i)`.
    Exponential {
        amplitude: Complex64,
        harmonics: Vec<i64>,
    },
    /// `amplitude * cos(2 pi sum_i m_i x_i)`.
    Cosine {
        amplitude: f64,
        harmonics: Vec<i64>,
    },
    /// `height * max(0, 1 - dist(x, center)/radius)` in the torus max-metric.
    Bump {
        center: Vec<f64>,
        radius: f64,
        height: Complex64,
    },
    Piecewise(Box<PiecewiseFunction>),
    Sum(Vec<SamplingFunction>),
}

fn torus_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| wrap_signed(a - b).abs())
        .fold(0.0, f64::max)
}

fn phase_sum(harmonics: &[i64], x: &[f64]) -> f64 {
    // reduce each term mod 1 first to keep the argument small
    harmonics
        .iter()
        .zip(x)
        .map(|(&m, &xi)| wrap_signed(m as f64 * xi))
        .sum()
}

impl SamplingFunction {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            SamplingFunction::Constant(c) => *c,
            SamplingFunction::Exponential { amplitude, harmonics } => {
                amplitude * Complex64::from_polar(1.0, 2.0 * PI * phase_sum(harmonics, x))
            }
            SamplingFunction::Cosine { amplitude, harmonics } => {
                Complex64::new(amplitude * (2.0 * PI * phase_sum(harmonics, x)).cos(), 0.0)
            }
            SamplingFunction::Bump { center, radius, height } => {
                height * (1.0 - torus_dist(x, center) / radius).max(0.0)
            }
            SamplingFunction::Piecewise(p) => p.eval(x),
            SamplingFunction::Sum(parts) => parts.iter().map(|p| p.eval(x)).sum(),
        }
    }

    pub fn eval_point(&self, w: &TorusPoint) -> Complex64 {
        self.eval(&w.to_f64())
    }

    /// Closed-form upper bound on `sup |f|` (the triangle inequality for sums).
    pub fn sup_norm(&self) -> f64 {
        match self {
            SamplingFunction::Constant(c) => c.norm(),
            SamplingFunction::Exponential { amplitude, .. } => amplitude.norm(),
            SamplingFunction::Cosine { amplitude, .. } => amplitude.abs(),
            SamplingFunction::Bump { height, .. } => height.norm(),
            SamplingFunction::Piecewise(p) => p.r_max,
            SamplingFunction::Sum(parts) => parts.iter().map(|p| p.sup_norm()).sum(),
        }
    }

    /// Invariant check: `sup_norm < 1`, so the range lies in the open disk.
    pub fn validate(&self) -> Result<()> {
        let s = self.sup_norm();
        if !(s < 1.0) {
            return Err(Error::InvariantViolation(format!("sup-norm bound {s} is not below 1")));
        }
        Ok(())
    }

    /// Built-in families: `constant RE IM`, `exponential LAMBDA M1 [M2 ...]`, `cosine LAMBDA M1 [M2 ...]`.
    pub fn family(name: &str, params: &[f64]) -> Result<Self> {
        let ints = |p: &[f64]| -> Result<Vec<i64>> {
            if p.is_empty() {
                return Err(Error::Parse(format!("{name} needs at least one harmonic")));
            }
            p.iter()
                .map(|&m| {
                    if m.fract() == 0.0 {
                        Ok(m as i64)
                    } else {
                        Err(Error::Parse(format!("harmonic {m} is not an integer")))
                    }
                })
                .collect()
        };
        let f = match (name, params) {
            ("constant", [re]) => SamplingFunction::Constant(Complex64::new(*re, 0.0)),
            ("constant", [re, im]) => SamplingFunction::Constant(Complex64::new(*re, *im)),
            ("exponential", [lambda, rest @ ..]) => SamplingFunction::Exponential {
                amplitude: Complex64::new(*lambda, 0.0),
                harmonics: ints(rest)?,
            },
            ("cosine", [lambda, rest @ ..]) => SamplingFunction::Cosine {
                amplitude: *lambda,
                harmonics: ints(rest)?,
            },
            _ => {
                return Err(Error::Parse(format!(
                    "unknown family {name:?} with {} parameters",
                    params.len()
                )))
            }
        };
        f.validate()?;
        Ok(f)
    }

    pub fn describe(&self) -> serde_json::Value {
        use serde_json::json;
        let c = |z: &Complex64| json!([z.re, z.im]);
        match self {
            SamplingFunction::Constant(v) => json!({"kind": "constant", "value": c(v)}),
            SamplingFunction::Exponential { amplitude, harmonics } => {
                json!({"kind": "exponential", "amplitude": c(amplitude), "harmonics": harmonics})
            }
            SamplingFunction::Cosine { amplitude, harmonics } => {
                json!({"kind": "cosine", "amplitude": amplitude, "harmonics": harmonics})
            }
            SamplingFunction::Bump { center, radius, height } => {
                json!({"kind": "bump", "center": center, "radius": radius, "height": c(height)})
            }
            SamplingFunction::Piecewise(p) => json!({
                "kind": "piecewise",
                "q": p.tubes.q,
                "radius": p.tubes.radius,
                "center": p.tubes.center.to_f64(),
                "values": p.values.iter().map(c).collect::<Vec<_>>(),
                "fill": "inverse-square-distance blend",
            }),
            SamplingFunction::Sum(parts) => json!({
                "kind": "sum",
                "parts": parts.iter().map(|p| p.describe()).collect::<Vec<_>>(),
            }),
        }
    }
}

/// `alpha(n) = f(T^n w)` for `n_min <= n <= n_max`; orbit points are exact.
pub fn verblunsky_window(
    f: &SamplingFunction,
    t: &TorusDynamics,
    w: &TorusPoint,
    n_min: i64,
    n_max: i64,
) -> Result<VerblunskySequence> {
    if n_min > n_max {
        return Err(Error::Domain(format!("empty window [{n_min}, {n_max}]")));
    }
    let mut cur = t.iterate(w, n_min);
    let mut alpha = Vec::with_capacity((n_max - n_min + 1) as usize);
    for n in n_min..=n_max {
        let a = f.eval_point(&cur);
        if !(a.norm() < 1.0) {
            return Err(Error::InvariantViolation(format!(
                "f(T^{n} w) = {a} lies outside the open unit disk"
            )));
        }
        alpha.push(a);
        cur = t.step(&cur);
    }
    VerblunskySequence::new(n_min, alpha)
}

/// The balls `T^m(B)`, `m = 1..=5q`, around `w_m = T^m(center)`; tube `j` is `{T^{j+lq}(B) : l = 0..4}`.
#[derive(Clone, Debug)]
pub struct TubeFamily {
    dynamics: TorusDynamics,
    center: TorusPoint,
    q: usize,
    radius: f64,
    images: Vec<Vec<f64>>,
}

impl TubeFamily {
    pub fn new(dynamics: &TorusDynamics, center: &TorusPoint, q: usize, radius: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("q must be positive".into()));
        }
        if !(radius > 0.0 && radius < 0.25) {
            return Err(Error::Domain(format!("tube radius must lie in (0, 1/4), got {radius}")));
        }
        let mut images = Vec::with_capacity(5 * q);
        let mut cur = center.clone();
        for _ in 0..5 * q {
            cur = dynamics.step(&cur);
            images.push(cur.to_f64());
        }
        Ok(TubeFamily {
            dynamics: dynamics.clone(),
            center: center.clone(),
            q,
            radius,
            images,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &TorusPoint {
        &self.center
    }

    pub fn dynamics(&self) -> &TorusDynamics {
        &self.dynamics
    }

    /// `w_m` for `1 <= m <= 5q`.
    pub fn image(&self, m: usize) -> &[f64] {
        &self.images[m - 1]
    }

    /// Offset `d` (smallest representative) with `x = T^m(center + d)`; its max-norm is the
    /// distance to the ball `T^m(B)` measured in the ball's own coordinates.
    pub fn pulled_back(&self, x: &[f64], m: usize) -> Vec<f64> {
        let diff: Vec<f64> = x.iter().zip(self.image(m)).map(|(a, b)| wrap_signed(a - b)).collect();
        self.dynamics
            .push_offset(&diff, -(m as i64))
            .into_iter()
            .map(wrap_signed)
            .collect()
    }

    pub fn ball_distance(&self, x: &[f64], m: usize) -> f64 {
        self.pulled_back(x, m).iter().map(|d| d.abs()).fold(0.0, f64::max)
    }

    /// The tube index `j` in `1..=q` containing `x`, if any.
    pub fn tube_of(&self, x: &[f64]) -> Option<usize> {
        (1..=5 * self.q)
            .find(|&m| self.ball_distance(x, m) <= self.radius)
            .map(|m| (m - 1) % self.q + 1)
    }

    /// `min_l max(0, D_{j+lq}(x) - radius)` for each tube `j`.
    fn gaps(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![f64::INFINITY; self.q];
        for m in 1..=5 * self.q {
            let g = (self.ball_distance(x, m) - self.radius).max(0.0);
            let j = (m - 1) % self.q;
            out[j] = out[j].min(g);
        }
        out
    }

    /// `T^m(center + d)` for an offset `d` in the ball, in `f64`.
    pub fn map_offset(&self, d: &[f64], m: usize) -> Vec<f64> {
        self.dynamics
            .push_offset(d, m as i64)
            .iter()
            .zip(self.image(m))
            .map(|(a, b)| (a + b).rem_euclid(1.0))
            .collect()
    }

    /// Offsets on a `res^d` grid covering the ball (shrunk by one part in 10^9 against rounding).
    pub fn ball_grid(&self, res: usize) -> Vec<Vec<f64>> {
        let res = res.max(1);
        let dim = self.center.dim();
        let r = self.radius * (1.0 - 1e-9);
        let axis: Vec<f64> = if res == 1 {
            vec![0.0]
        } else {
            (0..res).map(|i| -r + 2.0 * r * i as f64 / (res - 1) as f64).collect()
        };
        let mut pts = vec![Vec::new()];
        for _ in 0..dim {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                })
                .collect();
        }
        pts
    }

    /// Offsets on the boundary of the ball (`res` points per edge).
    pub fn ball_boundary(&self, res: usize) -> Vec<Vec<f64>> {
        let r = self.radius * (1.0 - 1e-9);
        self.ball_grid(res)
            .into_iter()
            .filter(|p| p.iter().any(|c| (c.abs() - r).abs() < 1e-15 + 1e-9 * r))
            .collect()
    }

    /// Sample points of tube `j` (1-based): the ball grid mapped by `T^{j+lq}`, `l = 0..4`.
    pub fn tube_samples(&self, j: usize, res: usize) -> Vec<Vec<f64>> {
        let grid = self.ball_grid(res);
        (0..5)
            .flat_map(|l| {
                let m = j + l * self.q;
                grid.iter().map(move |d| self.map_offset(d, m)).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// A function constant on each tube, extended by an inverse-square-distance blend.
#[derive(Clone, Debug)]
pub struct PiecewiseFunction {
    tubes: TubeFamily,
    values: Vec<Complex64>,
    r_max: f64,
}

impl PiecewiseFunction {
    pub fn tubes(&self) -> &TubeFamily {
        &self.tubes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `v_j` on tube `j`; elsewhere `sum_j w_j v_j / sum_j w_j` with `w_j = 1/d_j^2` and `d_j`
    /// the gap to tube `j`. As `d_j -> 0` the blend tends to `v_j`, so `f` is continuous,
    /// and as a convex combination it stays in the disk of radius `max |v_j|`.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        if let Some(j) = self.tubes.tube_of(x) {
            return self.values[j - 1];
        }
        let gaps = self.tubes.gaps(x);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (g, v) in gaps.iter().zip(&self.values) {
            let w = 1.0 / (g * g);
            num += v * w;
            den += w;
        }
        num / den
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BallRadius {
    pub radius: f64,
    /// `min_{n<m} dist(w_n, w_m) / (spread(n) + spread(m))` over `1..=5q`.
    pub gap_bound: f64,
    /// `min_{j,l} (5 eps - dist(w_{j+lq}, w_{j+2q})) / spread(j+lq)`.
    pub containment_bound: f64,
    pub boundary_samples: usize,
}

/// Largest safe radius for `B` around `center`: images `T^n(B)`, `1 <= n <= 5q`, pairwise
/// disjoint, and each tube inside the ball of radius `5 eps` around `w_{j+2q}`. Both
/// conditions are re-checked on a grid of the ball boundary.
pub fn ball_radius(t: &TorusDynamics, center: &TorusPoint, q: usize, epsilon: f64) -> Result<BallRadius> {
    if q == 0 || !q.is_multiple_of(2) {
        return Err(Error::Domain(format!("q must be even and positive, got {q}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = 5 * q;
    let mut pts = Vec::with_capacity(n);
    let mut cur = center.clone();
    for _ in 0..n {
        cur = t.step(&cur);
        pts.push(cur.clone());
    }
    let spread = |m: usize| t.spread(m as i64);
    let mut gap = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            if pts[a] == pts[b] {
                return Err(Error::DegenerateOrbit(format!(
                    "orbit points {} and {} coincide",
                    a + 1,
                    b + 1
                )));
            }
            gap = gap.min(pts[a].distance(&pts[b]) / (spread(a + 1) + spread(b + 1)));
        }
    }
    let mut contain = f64::INFINITY;
    for j in 1..=q {
        let anchor = &pts[j + 2 * q - 1];
        for l in 0..5 {
            let m = j + l * q;
            contain = contain.min((5.0 * epsilon - pts[m - 1].distance(anchor)) / spread(m));
        }
    }
    if contain <= 0.0 {
        return Err(Error::Domain(format!(
            "orbit segments do not fit in balls of radius 5*{epsilon}; is q an even repetition time?"
        )));
    }
    let radius = RADIUS_SAFETY * gap.min(contain).min(0.2);
    if radius <= RADIUS_FLOOR {
        return Err(Error::DegenerateOrbit(format!(
            "admissible radius {radius:e} is below the floor {RADIUS_FLOOR:e}"
        )));
    }
    let tubes = TubeFamily::new(t, center, q, radius)?;
    let boundary = tubes.ball_boundary(9);
    for d in &boundary {
        for m in 1..=n {
            let x = tubes.map_offset(d, m);
            let anchor = tubes.image(2 * q + (m - 1) % q + 1);
            if torus_dist(&x, anchor) > 5.0 * epsilon {
                return Err(Error::Internal(format!("tube containment fails at image {m}")));
            }
            for other in 1..=n {
                if other != m && tubes.ball_distance(&x, other) <= radius {
                    return Err(Error::Internal(format!("images {m} and {other} overlap")));
                }
            }
        }
    }
    Ok(BallRadius {
        radius,
        gap_bound: gap,
        containment_bound: contain,
        boundary_samples: boundary.len(),
    })
}

/// Builds `f` with value `values[j-1]` on tube `j`, and re-verifies it by sampling every tube.
pub fn construct_ck(
    t: &TorusDynamics,
    center: &TorusPoint,
    q: usize,
    radius: f64,
    values: &[Complex64],
) -> Result<SamplingFunction> {
    if values.len() != q {
        return Err(Error::Domain(format!("need {q} tube values, got {}", values.len())));
    }
    let r_max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(r_max < 1.0) {
        return Err(Error::Domain(format!(
            "tube values must lie in the open disk, max modulus {r_max}"
        )));
    }
    let tubes = TubeFamily::new(t, center, q, radius)?;
    let n = 5 * q;
    for a in 1..=n {
        for b in a + 1..=n {
            let d = torus_dist(tubes.image(a), tubes.image(b));
            if d <= (t.spread(a as i64) + t.spread(b as i64)) * radius {
                return Err(Error::Construction(format!(
                    "balls T^{a}(B) and T^{b}(B) may overlap at radius {radius}"
                )));
            }
        }
    }
    let f = PiecewiseFunction {
        tubes,
        values: values.to_vec(),
        r_max,
    };
    for j in 1..=q {
        for x in f.tubes.tube_samples(j, 5) {
            if f.eval(&x) != values[j - 1] {
                return Err(Error::InvariantViolation(format!(
                    "tube {j} does not carry its value at {x:?}"
                )));
            }
        }
    }
    Ok(SamplingFunction::Piecewise(Box::new(f)))
}

/// The point `T^{2q}(center + offset)`: every index in `1-2q ..= 3q` of its orbit lands in a tube.
pub fn gordon_point(tubes: &TubeFamily, offset: &[f64]) -> Result<TorusPoint> {
    if offset.iter().any(|d| d.abs() > tubes.radius) {
        return Err(Error::Domain("offset lies outside the ball".into()));
    }
    let start = tubes.center.offset(offset)?;
    Ok(tubes.dynamics.iterate(&start, 2 * tubes.q as i64))
}

/// The four maxima over `1 <= j <= q` of `|f(T^{j+a} w) - f(T^{j+b} w)|` for
/// `(a, b) = (q, 2q), (0, q), (-q, 0), (-2q, -q)`.
pub fn gordon_differences(f: &SamplingFunction, t: &TorusDynamics, w: &TorusPoint, q: usize) -> [f64; 4] {
    let qi = q as i64;
    let seq: Vec<Complex64> = (1 - 2 * qi..=3 * qi).map(|n| f.eval_point(&t.iterate(w, n))).collect();
    let at = |n: i64| seq[(n - (1 - 2 * qi)) as usize];
    let mut out = [0.0; 4];
    for (slot, (a, b)) in [(qi, 2 * qi), (0, qi), (-qi, 0), (-2 * qi, -qi)]
        .into_iter()
        .enumerate()
    {
        out[slot] = (1..=qi).map(|j| (at(j + a) - at(j + b)).norm()).fold(0.0, f64::max);
    }
    out
}

/// Radius of the smallest disk containing `pts` (Welzl's algorithm, ChaCha shuffle seeded at 0).
pub fn chebyshev_radius(pts: &[Complex64]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let mut p = pts.to_vec();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    let tol = 1e-12;
    let inside = |c: Complex64, r: f64, x: Complex64| (x - c).norm() <= r * (1.0 + tol) + 1e-15;
    let mut c = p[0];
    let mut r = 0.0;
    for i in 1..p.len() {
        if inside(c, r, p[i]) {
            continue;
        }
        c = p[i];
        r = 0.0;
        for j in 0..i {
            if inside(c, r, p[j]) {
                continue;
            }
            c = (p[i] + p[j]) / 2.0;
            r = (p[i] - p[j]).norm() / 2.0;
            for k in 0..j {
                if inside(c, r, p[k]) {
                    continue;
                }
                (c, r) = circumcircle(p[i], p[j], p[k]);
            }
        }
    }
    r
}

fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
    let (bx, by) = (b.re - a.re, b.im - a.im);
    let (cx, cy) = (c.re - a.re, c.im - a.im);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-300 {
        // collinear: the farthest pair spans the disk
        let pairs = [(a, b), (a, c), (b, c)];
        let (p, q) = pairs
            .into_iter()
            .max_by(|x, y| (x.0 - x.1).norm().total_cmp(&(y.0 - y.1).norm()))
            .unwrap();
        return ((p + q) / 2.0, (p - q).norm() / 2.0);
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    let center = Complex64::new(a.re + ux, a.im + uy);
    (center, (ux * ux + uy * uy).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct CkDistance {
    /// Upper bound on `inf_{g in C_k} sup |f - g|` from the sampled tubes.
    pub distance: f64,
    pub per_tube: Vec<f64>,
    pub grid: usize,
}

/// Max over tubes of the Chebyshev radius of `f`'s sampled values on that tube.
pub fn distance_to_ck(f: &SamplingFunction, tubes: &TubeFamily, grid: usize) -> Result<CkDistance> {
    if grid == 0 {
        return Err(Error::Domain("grid resolution must be positive".into()));
    }
    let per_tube: Vec<f64> = (1..=tubes.q)
        .map(|j| {
            let vals: Vec<Complex64> = tubes.tube_samples(j, grid).iter().map(|x| f.eval(x)).collect();
            chebyshev_radius(&vals)
        })
        .collect();
    Ok(CkDistance {
        distance: per_tube.iter().cloned().fold(0.0, f64::max),
        per_tube,
        grid,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FkMembership {
    pub distance: f64,
    pub sup_norm: f64,
    pub gamma: GammaBound,
    /// `Gamma(k, q, |f|) / 8`.
    pub threshold: f64,
    pub member: bool,
}

/// `f` is in `F_k` when some `g in C_k` lies within `Gamma(k, q, |f|)/8` of it.
pub fn fk_membership(f: &SamplingFunction, dist: &CkDistance, k: u32, q: u64) -> Result<FkMembership> {
    let sup_norm = f.sup_norm();
    let gamma = gamma_bound(k, q, sup_norm)?;
    let threshold = gamma.value / 8.0;
    Ok(FkMembership {
        distance: dist.distance,
        sup_norm,
        gamma,
        threshold,
        member: dist.distance < threshold,
    })
}

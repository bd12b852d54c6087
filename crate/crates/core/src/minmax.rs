//! `min_{|v|=1} max_i |B_i v|` for complex 2x2 matrices.
//!
//! With `G = B* B`, `v* G v = a + g . s` where `s` is the Bloch vector of `v` on the
//! unit sphere, `a = (G00 + G11)/2` and `g = (Re G01, -Im G01, (G00 - G11)/2)`.
//! The minimum of a maximum of affine functions over the sphere is attained where
//! one, two or three of them are active, which gives a finite candidate list.
//!
//! Candidates are evaluated directly as `max_i |B_i v|`, so every reported value is
//! attained by an actual unit vector. The forms themselves lose accuracy when the
//! blocks are large (the smallest value of `v* G v` is `1/|B|^2` for `|det B| = 1`),
//! so results carry a floor: if the forms are off by at most `delta`, the best candidate
//! of the perturbed problem is within `2 delta` of the true minimum in squared value.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;
type V3 = Vector3<f64>;

fn bloch(b: &Mat2) -> (f64, V3) {
    let g = b.adjoint() * b;
    let a = 0.5 * (g[(0, 0)].re + g[(1, 1)].re);
    (
        a,
        V3::new(g[(0, 1)].re, -g[(0, 1)].im, 0.5 * (g[(0, 0)].re - g[(1, 1)].re)),
    )
}

fn any_perpendicular(n: &V3) -> V3 {
    let e = if n.x.abs() < 0.9 { V3::x() } else { V3::y() };
    n.cross(&e).normalize()
}

fn candidates(forms: &[(f64, V3)]) -> Vec<V3> {
    let mut out = vec![V3::z()];
    for (_, g) in forms {
        let n = g.norm();
        if n > 0.0 {
            out.push(-g / n);
        }
    }
    for i in 0..forms.len() {
        for j in i + 1..forms.len() {
            let (a1, g1) = forms[i];
            let (a2, g2) = forms[j];
            // circle {s : (g1 - g2).s = a2 - a1, |s| = 1}
            let n = g1 - g2;
            let c = a2 - a1;
            let nn = n.norm_squared();
            if nn == 0.0 || c * c > nn {
                continue;
            }
            let p0 = n * (c / nn);
            let radius = (1.0 - c * c / nn).max(0.0).sqrt();
            let gp = g1 - n * (g1.dot(&n) / nn);
            let gpn = gp.norm();
            let dir = if gpn > 0.0 { -gp / gpn } else { any_perpendicular(&n) };
            out.push(p0 + dir * radius);
            out.push(p0 - dir * radius);
        }
    }
    for i in 0..forms.len() {
        for j in i + 1..forms.len() {
            for k in j + 1..forms.len() {
                let (a1, g1) = forms[i];
                let (a2, g2) = forms[j];
                let (a3, g3) = forms[k];
                let n1 = g1 - g2;
                let c1 = a2 - a1;
                let n2 = g1 - g3;
                let c2 = a3 - a1;
                let d = n1.cross(&n2);
                let dd = d.norm_squared();
                if dd == 0.0 {
                    continue;
                }
                let x0 = (n2.cross(&d) * c1 + d.cross(&n1) * c2) / dd;
                let b = 2.0 * x0.dot(&d);
                let cc = x0.norm_squared() - 1.0;
                let disc = b * b - 4.0 * dd * cc;
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                for t in [(-b + sq) / (2.0 * dd), (-b - sq) / (2.0 * dd)] {
                    out.push(x0 + d * t);
                }
            }
        }
    }
    out
}

/// A unit vector whose Bloch vector is `s` (unique up to phase).
fn spinor(s: &V3) -> [Complex64; 2] {
    let s = s.normalize();
    let w = Complex64::new(s.x, s.y);
    if s.z >= 0.0 {
        let v0 = (0.5 * (1.0 + s.z)).sqrt();
        [Complex64::new(v0, 0.0), w / (2.0 * v0)]
    } else {
        let v1 = (0.5 * (1.0 - s.z)).sqrt();
        [w.conj() / (2.0 * v1), Complex64::new(v1, 0.0)]
    }
}

/// `max_i |B_i v(s)|`.
fn objective(blocks: &[Mat2], s: &V3) -> f64 {
    let [v0, v1] = spinor(s);
    blocks
        .iter()
        .map(|b| {
            let x = b[(0, 0)] * v0 + b[(0, 1)] * v1;
            let y = b[(1, 0)] * v0 + b[(1, 1)] * v1;
            x.norm().hypot(y.norm())
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinMax {
    /// `max_i |B_i v|` at the best candidate `v`; always attained, so an upper bound on the minimum.
    pub value: f64,
    /// `sqrt(max(0, value^2 - 2 delta))` with `delta = 64 eps max_i |B_i|^2` the rounding
    /// budget of the quadratic forms: a lower bound on the minimum.
    pub floor: f64,
    /// `value - floor <= 1e-6 value`.
    pub resolved: bool,
}

/// `min_{|v|=1} max_i |B_i v|` via the Bloch-sphere candidate set.
pub fn min_max_norm(blocks: &[Mat2]) -> MinMax {
    assert!(!blocks.is_empty(), "need at least one block");
    let forms: Vec<_> = blocks.iter().map(bloch).collect();
    let value = candidates(&forms)
        .iter()
        .filter(|s| s.norm() > 0.0)
        .map(|s| objective(blocks, s))
        .fold(f64::INFINITY, f64::min);
    let scale = forms.iter().map(|(a, g)| a + g.norm()).fold(0.0, f64::max);
    let delta = 64.0 * f64::EPSILON * scale;
    let floor = (value * value - 2.0 * delta).max(0.0).sqrt();
    MinMax {
        value,
        floor,
        resolved: value - floor <= 1e-6 * value,
    }
}

/// Points on the unit sphere in spherical angles `(theta, phi)`.
fn sphere(theta: f64, phi: f64) -> V3 {
    V3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Grid-and-refine estimate of [`min_max_norm`]: `points` Fibonacci-sphere samples,
/// then shrinking local grids around the incumbent. Independent of the candidate
/// analysis and always an upper bound on the exact value.
pub fn min_max_norm_grid(blocks: &[Mat2], points: usize) -> f64 {
    let f = |s: &V3| objective(blocks, s);
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = (f64::INFINITY, V3::z());
    for i in 0..points {
        let zc = 1.0 - 2.0 * (i as f64 + 0.5) / points as f64;
        let theta = zc.clamp(-1.0, 1.0).acos();
        let s = sphere(theta, golden_angle * i as f64);
        let v = f(&s);
        if v < best.0 {
            best = (v, s);
        }
    }
    let (mut val, mut s) = best;
    // Local tangent-plane grids re-centred on the best point; the spacing halves only
    // when the centre wins, so narrow valleys along kinks are followed rather than stalled in.
    const HALF: i32 = 10;
    let mut h = (4.0 * std::f64::consts::PI / points as f64).sqrt() / HALF as f64 * 2.0;
    let mut rounds = 0;
    while h > 1e-13 && rounds < 500 {
        rounds += 1;
        let e1 = any_perpendicular(&s);
        let e2 = s.cross(&e1);
        let mut moved = false;
        for i in -HALF..=HALF {
            for j in -HALF..=HALF {
                if i == 0 && j == 0 {
                    continue;
                }
                let cand = (s + e1 * (h * i as f64) + e2 * (h * j as f64)).normalize();
                let v = f(&cand);
                if v < val - 1e-15 * val.abs() {
                    val = v;
                    s = cand;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    val
}

/// Operator 2-norm of a complex 2x2 matrix.
pub fn op_norm(m: &Mat2) -> f64 {
    let h = m.adjoint() * m;
    let tr = h[(0, 0)].re + h[(1, 1)].re;
    let det = (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_blocks() {
        let id = Mat2::identity();
        assert_eq!(min_max_norm(&[id, id, id]).value, 1.0);
    }

    #[test]
    fn single_block_is_smallest_singular_value() {
        let m = Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!((min_max_norm(&[m]).value - 0.5).abs() < 1e-15);
        assert!((op_norm(&m) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_diagonal_blocks_balance() {
        // |Av|^2 = 4x + y/4, |Bv|^2 = x/4 + 4y with x + y = 1: balanced at x = y = 1/2
        let a = Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        let b = Mat2::new(c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0));
        let want = (0.5 * (4.0 + 0.25f64)).sqrt();
        assert!((min_max_norm(&[a, b]).value - want).abs() < 1e-14);
        assert!((min_max_norm_grid(&[a, b], 1024) - want).abs() < 1e-8);
    }

    #[test]
    fn huge_blocks_are_unresolved() {
        let big = Mat2::new(c(1e13, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1e-13, 0.0));
        let m = min_max_norm(&[big]);
        assert!(!m.resolved);
        let small = Mat2::new(c(3.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0 / 3.0, 0.0));
        assert!(min_max_norm(&[small, small.try_inverse().unwrap()]).resolved);
    }

    #[test]
    fn grid_is_an_upper_bound() {
        let a = Mat2::new(c(1.0, 0.3), c(-0.7, 2.0), c(0.2, 0.0), c(0.4, -1.1));
        let b = a * a;
        let inv = a.try_inverse().unwrap();
        let exact = min_max_norm(&[a, b, inv]).value;
        let grid = min_max_norm_grid(&[a, b, inv], 1024);
        assert!(grid >= exact - 1e-12);
        assert!(grid - exact < 1e-6, "{grid} vs {exact}");
    }
}

//! Szegő transfer matrices, the Lipschitz constant behind `Gamma(k, q, r)`,
//! Gordon certification and the three-block lower bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::minmax::{min_max_norm, min_max_norm_grid, op_norm, Mat2, MinMax};
use crate::sequence::{rho_of, VerblunskySequence};

/// Reporting threshold for `min_z c(z)`: half the periodic-case constant 1/2.
pub const EVIDENCE_THRESHOLD: f64 = 0.25;
/// Fibonacci-sphere points for the grid cross-check of the exact min-max.
pub const CROSS_CHECK_POINTS: usize = 1024;

pub fn unit_circle_point(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// `S(alpha, z) = rho^{-1} [[z, -conj(alpha)], [-alpha z, 1]]`, with `det S = z`.
pub fn szego_matrix(alpha: Complex64, z: Complex64) -> Result<Mat2> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::Domain(format!("|alpha| = {} is not below 1", alpha.norm())));
    }
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("|z| = {} is not 1", z.norm())));
    }
    let r = 1.0 / rho_of(alpha);
    Ok(Mat2::new(
        z * r,
        -alpha.conj() * r,
        -alpha * z * r,
        Complex64::new(r, 0.0),
    ))
}

/// Ordered product `S(alpha(to-1), z) ... S(alpha(from), z)`; identity when `from >= to`.
///
/// Multiplied pairwise (a balanced tree), so rounding error grows like `log L` rather than `L`.
pub fn block_product(seq: &VerblunskySequence, z: Complex64, from: i64, to: i64) -> Result<Mat2> {
    seq.require(from, to - 1)?;
    if from >= to {
        return Ok(Mat2::identity());
    }
    tree_product(seq, z, from, to)
}

fn tree_product(seq: &VerblunskySequence, z: Complex64, from: i64, to: i64) -> Result<Mat2> {
    if to - from == 1 {
        return szego_matrix(seq.alpha(from)?, z);
    }
    let mid = from + (to - from) / 2;
    Ok(tree_product(seq, z, mid, to)? * tree_product(seq, z, from, mid)?)
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

/// `M(r) = sqrt((1+r)/(1-r)) = sup_{|alpha| <= r} |S(alpha, z)|`.
pub fn szego_norm_bound(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(((1.0 + r) / (1.0 - r)).sqrt())
}

/// `C(r) = r(1+r)/rho^3 + 1/rho` with `rho = sqrt(1 - r^2)`: bounds `|dS/d alpha|` on the closed disk of radius `r`.
pub fn one_step_lipschitz(r: f64) -> Result<f64> {
    check_radius(r)?;
    let rho = ((1.0 - r) * (1.0 + r)).sqrt();
    Ok(r * (1.0 + r) / (rho * rho * rho) + 1.0 / rho)
}

/// `L3(r) = 3 M(r)^2 C(r)`: Lipschitz constant of three-step products in the coefficients.
pub fn lipschitz_constant(r: f64) -> Result<f64> {
    let m = szego_norm_bound(r)?;
    Ok(3.0 * m * m * one_step_lipschitz(r)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaBound {
    /// `k^{-q} / L3(r)`, or the smallest positive normal `f64` when that underflows.
    pub value: f64,
    pub log10: f64,
    pub underflow: bool,
}

/// `Gamma(k, q, r) = k^{-q} / L3(r)`, so `|A_n - A~_n| < k^{-q}` whenever the coefficients differ by less than `Gamma`.
pub fn gamma_bound(k: u32, q: u64, r: f64) -> Result<GammaBound> {
    if k == 0 || q == 0 {
        return Err(Error::Domain(format!("need k >= 1 and q >= 1, got k = {k}, q = {q}")));
    }
    let l3 = lipschitz_constant(r)?;
    let log10 = -(q as f64) * (k as f64).log10() - l3.log10();
    let value = (k as f64).powf(-(q as f64)) / l3;
    if value > 0.0 && value.is_normal() {
        Ok(GammaBound {
            value,
            log10,
            underflow: false,
        })
    } else {
        Ok(GammaBound {
            value: f64::MIN_POSITIVE,
            log10,
            underflow: true,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzValidation {
    pub r: f64,
    pub samples: usize,
    pub bound: f64,
    pub max_ratio: f64,
    pub violations: usize,
}

fn disk_point(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    let rad = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rad, 2.0 * PI * rng.gen::<f64>())
}

fn clamp_to_disk(a: Complex64, r: f64) -> Complex64 {
    if a.norm() > r {
        a * (r / a.norm())
    } else {
        a
    }
}

fn three_step(a: &[Complex64; 3], z: Complex64) -> Mat2 {
    let s = |x| szego_matrix(x, z).expect("inside disk");
    s(a[2]) * s(a[1]) * s(a[0])
}

/// Samples pairs of coefficient triples in the closed disk of radius `r` and records
/// the largest `|P - P~| / max_i |alpha_i - alpha~_i|`. A third of the pairs are
/// independent, a third are finite differences, and a third sit on the rim `|alpha| = r`.
/// For `r = 0` the disk is degenerate and pairs in the disk of radius `1e-6` are
/// compared against `L3(1e-6)`. A ratio counts as a violation only beyond the
/// floating-point rounding allowance `64 eps (|P| + |P~|) / max|d alpha|`.
pub fn validate_lipschitz(r: f64, samples: usize, seed: u64) -> Result<LipschitzValidation> {
    let bound_r = if r == 0.0 { 1e-6 } else { r };
    let bound = lipschitz_constant(bound_r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut violations = 0;
    for i in 0..samples {
        let z = unit_circle_point(2.0 * PI * rng.gen::<f64>());
        let mut a = [Complex64::new(0.0, 0.0); 3];
        let mut b = a;
        for t in 0..3 {
            match i % 3 {
                0 => {
                    a[t] = disk_point(&mut rng, bound_r);
                    b[t] = disk_point(&mut rng, bound_r);
                }
                1 => {
                    a[t] = disk_point(&mut rng, bound_r);
                    b[t] = clamp_to_disk(a[t] + disk_point(&mut rng, 1e-4 * bound_r), bound_r);
                }
                _ => {
                    let th = 2.0 * PI * rng.gen::<f64>();
                    a[t] = Complex64::from_polar(bound_r, th);
                    b[t] = Complex64::from_polar(bound_r, th + 1e-3 * (rng.gen::<f64>() - 0.5));
                }
            }
        }
        let delta = (0..3).map(|t| (a[t] - b[t]).norm()).fold(0.0, f64::max);
        if delta == 0.0 {
            continue;
        }
        let (pa, pb) = (three_step(&a, z), three_step(&b, z));
        let ratio = op_norm(&(pa - pb)) / delta;
        max_ratio = max_ratio.max(ratio);
        let rounding = 64.0 * f64::EPSILON * (op_norm(&pa) + op_norm(&pb)) / delta;
        if ratio > bound + rounding {
            violations += 1;
        }
    }
    Ok(LipschitzValidation {
        r,
        samples,
        bound,
        max_ratio,
        violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GordonLevel {
    pub k: u32,
    pub q: u64,
    /// `max |alpha(n)|` over `[-2q+1, 2q+1]`.
    pub r_k: f64,
    /// `max |alpha(n) - alpha(n +- q)|` over `-q+1 <= n <= q+1`.
    pub measured_defect: f64,
    pub gamma: GammaBound,
    /// `Gamma(k, q, r_k) / 4`.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GordonCertificate {
    pub levels: Vec<GordonLevel>,
}

impl GordonCertificate {
    pub fn any_pass(&self) -> bool {
        self.levels.iter().any(|l| l.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.levels.iter().all(|l| l.pass)
    }

    /// The passing level with the largest period.
    pub fn best_level(&self) -> Option<&GordonLevel> {
        self.levels.iter().filter(|l| l.pass).max_by_key(|l| l.q)
    }
}

/// Checks Definition-2 style near-periodicity at each `(k, q_k)`.
pub fn certify_gordon(seq: &VerblunskySequence, levels: &[(u32, u64)]) -> Result<GordonCertificate> {
    let mut prev_q = 0;
    let mut out = Vec::with_capacity(levels.len());
    for &(k, q) in levels {
        if q == 0 || q % 2 != 0 {
            return Err(Error::Domain(format!("q_k must be even and positive, got {q}")));
        }
        if q <= prev_q {
            return Err(Error::Domain(format!(
                "q_k must be strictly increasing, got {q} after {prev_q}"
            )));
        }
        prev_q = q;
        let qi = q as i64;
        let r_k = seq.max_modulus(-2 * qi + 1, 2 * qi + 1)?;
        let mut defect = 0.0f64;
        for n in (-qi + 1)..=(qi + 1) {
            let a = seq.alpha(n)?;
            defect = defect.max((a - seq.alpha(n + qi)?).norm());
            defect = defect.max((a - seq.alpha(n - qi)?).norm());
        }
        let gamma = gamma_bound(k, q, r_k)?;
        let threshold = gamma.value / 4.0;
        out.push(GordonLevel {
            k,
            q,
            r_k,
            measured_defect: defect,
            gamma,
            threshold,
            pass: defect <= threshold,
        });
    }
    Ok(GordonCertificate { levels: out })
}

/// `B^{-1} = adj(B) / det B` with the determinant supplied: products of `L` Szegő
/// matrices have determinant `z^L`, which is far more accurate than `ad - bc` once the
/// entries are large.
pub fn inverse_with_det(b: &Mat2, det: Complex64) -> Mat2 {
    Mat2::new(b[(1, 1)], -b[(0, 1)], -b[(1, 0)], b[(0, 0)]) / det
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    pub angle: f64,
    /// The value entering the verdict: a lower bound on the min-max, the larger of
    /// `c_floor` and `c_lower`.
    pub c: f64,
    /// `min_{|v|=1} max(|B+ v|, |B++ v|, |B-' v|)` from the Bloch-sphere candidates (attained, so an upper bound).
    pub c_exact: f64,
    /// `c_exact` less the rounding budget of the candidate analysis (a lower bound).
    pub c_floor: f64,
    /// `c_exact - c_floor <= 1e-6 c_exact`: the candidate analysis pins the value down in `f64`.
    pub resolved: bool,
    /// Grid-and-refine value of the same min-max (an upper bound).
    pub c_grid: f64,
    /// `max(0, 1/2 - eta)`: with `A = B+` and `|det A| = 1`, `max(|Av|, |A^2 v|, |A^{-1} v|) >= |v|/2`,
    /// and the min-max moves by at most `eta` when each block moves by at most `eta`.
    pub c_lower: f64,
    pub norm_plus: f64,
    pub norm_plus_plus: f64,
    pub norm_minus: f64,
    /// `max(|B++ - A^2|, |B-' - A^{-1}|)`.
    pub eta: f64,
    /// A-priori bound `q C(r) M(r)^{3q-1} max_{-q <= n < q} |alpha(n) - alpha(n+q)|` on `eta`.
    pub eta_bound: f64,
}

/// Three-block lower bound at `z`: `B+` over `[0, q)`, `B++` over `[0, 2q)` and
/// `B-'`, the inverse of the product over `[-q, 0)`, which carries solutions from 0 to `-q`.
pub fn gordon_lower_bound(seq: &VerblunskySequence, q: u64, z: Complex64) -> Result<LowerBound> {
    if q == 0 {
        return Err(Error::Domain("q must be positive".into()));
    }
    let qi = q as i64;
    seq.require(-qi, 2 * qi - 1)?;
    let b_plus = block_product(seq, z, 0, qi)?;
    let b_pp = block_product(seq, z, qi, 2 * qi)? * b_plus;
    let det = z.powu(q as u32);
    let b_mp = inverse_with_det(&block_product(seq, z, -qi, 0)?, det);
    let a_inv = inverse_with_det(&b_plus, det);
    let eta = op_norm(&(b_pp - b_plus * b_plus)).max(op_norm(&(b_mp - a_inv)));
    let c_lower = (0.5 - eta).max(0.0);

    let blocks = [b_plus, b_pp, b_mp];
    // With alpha = 0 every block is diag(z^m, 1); the min-max is exactly 1.
    let isometric = (-qi..2 * qi).all(|n| seq.alpha(n).map(|a| a == Complex64::new(0.0, 0.0)).unwrap_or(false));
    let (exact, c_grid) = if isometric {
        (
            MinMax {
                value: 1.0,
                floor: 1.0,
                resolved: true,
            },
            1.0,
        )
    } else {
        (min_max_norm(&blocks), min_max_norm_grid(&blocks, CROSS_CHECK_POINTS))
    };
    // the attained value can never undercut a valid lower bound, and when resolved it
    // must not exceed the independently refined grid value
    let tol = 1e-7 * exact.value.max(1.0);
    if exact.value < c_lower - tol || (exact.resolved && exact.value > c_grid + tol) {
        return Err(Error::Internal(format!(
            "min-max {} inconsistent with grid {c_grid} / lower bound {c_lower} at angle {}",
            exact.value,
            z.arg()
        )));
    }
    let c = exact.floor.max(c_lower);

    let r = seq.max_modulus(-qi, 2 * qi - 1)?;
    let mut delta = 0.0f64;
    for n in -qi..qi {
        delta = delta.max((seq.alpha(n)? - seq.alpha(n + qi)?).norm());
    }
    let eta_bound = if delta == 0.0 {
        0.0
    } else {
        q as f64 * one_step_lipschitz(r)? * szego_norm_bound(r)?.powf(3.0 * q as f64 - 1.0) * delta
    };
    Ok(LowerBound {
        angle: z.arg(),
        c,
        c_exact: exact.value,
        c_floor: exact.floor,
        resolved: exact.resolved,
        c_grid,
        c_lower,
        norm_plus: op_norm(&b_plus),
        norm_plus_plus: op_norm(&b_pp),
        norm_minus: op_norm(&b_mp),
        eta,
        eta_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Evidence {
    pub q: u64,
    pub k: Option<u32>,
    pub grid: usize,
    pub rows: Vec<LowerBound>,
    pub min_c: f64,
    pub argmin_angle: f64,
    /// Minimum over every other grid point (step doubled), for a refinement-stability check.
    pub coarse_min_c: f64,
    /// Grid points where the candidate analysis did not pin `c` down to `1e-6` in `f64`.
    pub unresolved_points: usize,
    /// `min_z c_exact`: attained values, so an upper bound on the true minimum.
    pub min_c_exact: f64,
    pub points_below_threshold: usize,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Tabulates `c(z)` at the largest certified period on a uniform grid of `z_grid` angles.
pub fn no_point_spectrum_evidence(
    seq: &VerblunskySequence,
    cert: &GordonCertificate,
    z_grid: usize,
) -> Result<Evidence> {
    let level = cert
        .best_level()
        .ok_or_else(|| Error::Domain("certificate has no passing level".into()))?;
    let mut ev = evidence_at_period(seq, level.q, z_grid)?;
    ev.k = Some(level.k);
    Ok(ev)
}

/// `c(z)` on the grid for a given period, without requiring a certificate (used for controls).
pub fn evidence_at_period(seq: &VerblunskySequence, q: u64, z_grid: usize) -> Result<Evidence> {
    if z_grid == 0 {
        return Err(Error::Domain("z grid must have at least one point".into()));
    }
    let rows = (0..z_grid)
        .into_par_iter()
        .map(|i| gordon_lower_bound(seq, q, unit_circle_point(2.0 * PI * i as f64 / z_grid as f64)))
        .collect::<Result<Vec<_>>>()?;
    let (mut min_c, mut argmin) = (f64::INFINITY, 0.0);
    for r in &rows {
        if r.c < min_c {
            min_c = r.c;
            argmin = r.angle;
        }
    }
    let coarse_min_c = rows.iter().step_by(2).map(|r| r.c).fold(f64::INFINITY, f64::min);
    Ok(Evidence {
        q,
        k: None,
        grid: z_grid,
        points_below_threshold: rows.iter().filter(|r| r.c < EVIDENCE_THRESHOLD).count(),
        unresolved_points: rows.iter().filter(|r| !r.resolved).count(),
        min_c_exact: rows.iter().map(|r| r.c_exact).fold(f64::INFINITY, f64::min),
        rows,
        min_c,
        argmin_angle: argmin,
        coarse_min_c,
        threshold: EVIDENCE_THRESHOLD,
        verdict: if min_c >= EVIDENCE_THRESHOLD {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

impl Evidence {
    /// CSV with columns `angle,c,c_exact,c_floor,resolved,c_grid,c_lower,norm_plus,norm_plus_plus,norm_minus,eta`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "angle",
            "c",
            "c_exact",
            "c_floor",
            "resolved",
            "c_grid",
            "c_lower",
            "norm_plus",
            "norm_plus_plus",
            "norm_minus",
            "eta",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.angle.to_string(),
                r.c.to_string(),
                r.c_exact.to_string(),
                r.c_floor.to_string(),
                r.resolved.to_string(),
                r.c_grid.to_string(),
                r.c_lower.to_string(),
                r.norm_plus.to_string(),
                r.norm_plus_plus.to_string(),
                r.norm_minus.to_string(),
                r.eta.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn szego_zero_coefficient() {
        let z = unit_circle_point(0.7);
        let s = szego_matrix(c(0.0, 0.0), z).unwrap();
        assert_eq!(s, Mat2::new(z, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn szego_real_coefficient() {
        let s = szego_matrix(c(0.6, 0.0), c(1.0, 0.0)).unwrap();
        let want = Mat2::new(c(1.25, 0.0), c(-0.75, 0.0), c(-0.75, 0.0), c(1.25, 0.0));
        assert!((s - want).norm() < 1e-15);
        assert!((s.determinant() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn szego_domain_errors() {
        assert!(szego_matrix(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(szego_matrix(c(0.1, 0.0), c(1.1, 0.0)).is_err());
    }

    #[test]
    fn lipschitz_values() {
        assert_eq!(lipschitz_constant(0.0).unwrap(), 3.0);
        // r = 1/2: M^2 = 3, C = (1/2)(3/2)/(3/4)^{3/2} + (3/4)^{-1/2} = 4/sqrt(3)
        let want = 3.0 * 3.0 * 4.0 / 3f64.sqrt();
        assert!((lipschitz_constant(0.5).unwrap() - want).abs() < 1e-12);
        assert!(lipschitz_constant(0.3).unwrap() <= lipschitz_constant(0.6).unwrap());
        assert!(lipschitz_constant(1.0).is_err());
    }

    #[test]
    fn gamma_values() {
        let l = lipschitz_constant(0.5).unwrap();
        assert_eq!(gamma_bound(1, 17, 0.5).unwrap().value, 1.0 / l);
        assert!((gamma_bound(2, 4, 0.5).unwrap().value - 1.0 / (16.0 * l)).abs() < 1e-18);
        let g = gamma_bound(10, 400, 0.5).unwrap();
        assert!(g.underflow);
        assert!(g.value > 0.0);
        assert!((g.log10 - (-400.0 - l.log10())).abs() < 1e-9);
        assert!(gamma_bound(0, 4, 0.5).is_err());
    }

    #[test]
    fn empty_block_is_identity() {
        let s = VerblunskySequence::constant(c(0.3, 0.1), 0, 3).unwrap();
        assert_eq!(block_product(&s, c(1.0, 0.0), 2, 2).unwrap(), Mat2::identity());
        let one = block_product(&s, unit_circle_point(1.0), 1, 2).unwrap();
        assert_eq!(one, szego_matrix(c(0.3, 0.1), unit_circle_point(1.0)).unwrap());
        assert!(matches!(block_product(&s, c(1.0, 0.0), 0, 5), Err(Error::Range { .. })));
    }

    #[test]
    fn certify_rejects_odd_and_nonincreasing() {
        let s = VerblunskySequence::constant(c(0.3, 0.0), -20, 20).unwrap();
        assert!(certify_gordon(&s, &[(1, 3)]).is_err());
        assert!(certify_gordon(&s, &[(1, 4), (2, 4)]).is_err());
        assert!(matches!(certify_gordon(&s, &[(1, 12)]), Err(Error::Range { .. })));
        let cert = certify_gordon(&s, &[(1, 2), (2, 4)]).unwrap();
        assert!(cert.all_pass());
        assert!((cert.levels[0].r_k - 0.3).abs() < 1e-16);
        assert_eq!(cert.levels[1].measured_defect, 0.0);
    }

    #[test]
    fn free_lower_bound_is_one() {
        let s = VerblunskySequence::constant(c(0.0, 0.0), -10, 10).unwrap();
        let b = gordon_lower_bound(&s, 4, unit_circle_point(0.3)).unwrap();
        assert_eq!(b.c, 1.0);
        assert!(matches!(
            gordon_lower_bound(&s, 6, unit_circle_point(0.3)),
            Err(Error::Range { .. })
        ));
    }
}

//! Torus rotations and the skew-shift `(x, y) -> (x + 2a, x + y)` on `T^2`.
//!
//! Points and frequencies are fixed-point [`Phase`]s, so every iterate is an
//! exact closed form and `T^m T^n = T^{m+n}` holds bit-for-bit.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::Frequency;
use crate::phase::{Phase, Precision};

/// Orbit lengths up to this are checked point by point; longer ones use the exact progression bound.
const DIRECT_SCAN_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusPoint {
    coords: Vec<Phase>,
}

impl TorusPoint {
    pub fn new(coords: Vec<Phase>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("torus point needs at least one coordinate".into()));
        }
        let p = coords[0].precision();
        if coords.iter().any(|c| c.precision() != p) {
            return Err(Error::Domain("coordinates carry different precisions".into()));
        }
        Ok(TorusPoint { coords })
    }

    pub fn from_f64(coords: &[f64], precision: Precision) -> Result<Self> {
        let c = coords
            .iter()
            .map(|&x| Phase::from_f64(x, precision))
            .collect::<Result<Vec<_>>>()?;
        TorusPoint::new(c)
    }

    pub fn origin(dim: usize, precision: Precision) -> Self {
        TorusPoint {
            coords: vec![Phase::zero(precision); dim.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Phase] {
        &self.coords
    }

    pub fn precision(&self) -> Precision {
        self.coords[0].precision()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Phase::to_f64).collect()
    }

    /// Translates by a real offset vector, exactly on the grid.
    pub fn offset(&self, delta: &[f64]) -> Result<TorusPoint> {
        if delta.len() != self.dim() {
            return Err(Error::Domain(format!(
                "offset has dimension {}, point has {}",
                delta.len(),
                self.dim()
            )));
        }
        let p = self.precision();
        let coords = self
            .coords
            .iter()
            .zip(delta)
            .map(|(c, &d)| Ok(c + &Phase::from_f64(d, p)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(TorusPoint { coords })
    }

    /// Coordinate-wise `self - other` on the torus.
    pub fn difference(&self, other: &TorusPoint) -> Vec<Phase> {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect()
    }

    /// Max over coordinates of the distance to the nearest integer of the difference.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        torus_norm(&self.difference(other))
    }
}

/// Max-metric size of a torus displacement.
pub fn torus_norm(diff: &[Phase]) -> f64 {
    diff.iter().map(Phase::dist_to_int).fold(0.0, f64::max)
}

/// Signed representative in `[-1/2, 1/2)` of an `f64` torus displacement.
pub fn wrap_signed(x: f64) -> f64 {
    x - x.round()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorusDynamics {
    /// `w -> w + shift` on `T^d`.
    Rotation { shift: Vec<Phase> },
    /// `(x, y) -> (x + 2a, x + y)` on `T^2`.
    SkewShift { frequency: Phase },
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityHint {
    pub likely_minimal: bool,
    /// An integer relation found among `1, a_1, ..., a_d` (or the denominator of a rational-looking shift).
    pub relation: Option<Vec<String>>,
}

impl TorusDynamics {
    pub fn rotation(shift: Vec<Phase>) -> Result<Self> {
        TorusPoint::new(shift.clone())?;
        Ok(TorusDynamics::Rotation { shift })
    }

    pub fn skew_shift(frequency: Phase) -> Self {
        TorusDynamics::SkewShift { frequency }
    }

    pub fn dim(&self) -> usize {
        match self {
            TorusDynamics::Rotation { shift } => shift.len(),
            TorusDynamics::SkewShift { .. } => 2,
        }
    }

    pub fn precision(&self) -> Precision {
        match self {
            TorusDynamics::Rotation { shift } => shift[0].precision(),
            TorusDynamics::SkewShift { frequency } => frequency.precision(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TorusDynamics::Rotation { .. } => "rotation",
            TorusDynamics::SkewShift { .. } => "skew",
        }
    }

    fn check_point(&self, w: &TorusPoint) {
        assert_eq!(w.dim(), self.dim(), "point dimension does not match the system");
    }

    /// One application of the map.
    pub fn step(&self, w: &TorusPoint) -> TorusPoint {
        self.check_point(w);
        match self {
            TorusDynamics::Rotation { shift } => TorusPoint {
                coords: w.coords.iter().zip(shift).map(|(x, a)| x + a).collect(),
            },
            TorusDynamics::SkewShift { frequency } => {
                let x = &w.coords[0];
                let y = &w.coords[1];
                TorusPoint {
                    coords: vec![&(x + frequency) + frequency, x + y],
                }
            }
        }
    }

    /// `T^n w` in closed form; `n` may be negative.
    pub fn iterate(&self, w: &TorusPoint, n: i64) -> TorusPoint {
        self.iterate_big(w, &BigInt::from(n))
    }

    pub fn iterate_big(&self, w: &TorusPoint, n: &BigInt) -> TorusPoint {
        self.check_point(w);
        match self {
            TorusDynamics::Rotation { shift } => TorusPoint {
                coords: w.coords.iter().zip(shift).map(|(x, a)| x + &a.mul_int(n)).collect(),
            },
            TorusDynamics::SkewShift { frequency } => {
                let x = &w.coords[0];
                let y = &w.coords[1];
                let two_n = n * 2;
                let quad = n * (n - BigInt::one());
                let first = x + &frequency.mul_int(&two_n);
                let second = &(y + &x.mul_int(n)) + &frequency.mul_int(&quad);
                TorusPoint {
                    coords: vec![first, second],
                }
            }
        }
    }

    /// Linear part of `T^n` applied to a small displacement: `T^n(w + d) = T^n w + L^n d`.
    pub fn push_offset(&self, delta: &[f64], n: i64) -> Vec<f64> {
        match self {
            TorusDynamics::Rotation { .. } => delta.to_vec(),
            TorusDynamics::SkewShift { .. } => vec![delta[0], delta[1] + n as f64 * delta[0]],
        }
    }

    /// Max-norm of `L^n`: images of a radius-`r` ball under `T^n` lie in a ball of radius `spread(n) * r`.
    pub fn spread(&self, n: i64) -> f64 {
        match self {
            TorusDynamics::Rotation { .. } => 1.0,
            TorusDynamics::SkewShift { .. } => 1.0 + n.unsigned_abs() as f64,
        }
    }

    /// Heuristic minimality flag: looks for small integer relations among the shift components.
    pub fn minimality_hint(&self) -> MinimalityHint {
        let comps: Vec<Phase> = match self {
            TorusDynamics::Rotation { shift } => shift.clone(),
            TorusDynamics::SkewShift { frequency } => vec![frequency + frequency],
        };
        for c in &comps {
            if let Some(q) = rational_denominator(c) {
                return MinimalityHint {
                    likely_minimal: false,
                    relation: Some(vec![q.to_string()]),
                };
            }
        }
        if comps.len() > 1 {
            if let Some(rel) = small_relation(&comps) {
                return MinimalityHint {
                    likely_minimal: false,
                    relation: Some(rel.iter().map(|m| m.to_string()).collect()),
                };
            }
        }
        MinimalityHint {
            likely_minimal: true,
            relation: None,
        }
    }
}

/// Denominator `q <= 2^(bits/2 - 16)` with `q * x` an integer up to grid rounding, if any.
fn rational_denominator(x: &Phase) -> Option<BigUint> {
    if x.is_zero() {
        return Some(BigUint::one());
    }
    // Expanding the grid value exactly keeps every convergent with `|x - p/q| < 1/(2q^2)`.
    let f = Frequency::from_rational(x.to_rational(), x.precision()).ok()?;
    let limit = BigUint::one() << (x.precision().bits() / 2 - 16);
    for c in &f.expansion().convergents {
        if c.q > limit {
            break;
        }
        if x.mul_int(&BigInt::from(c.q.clone())).dist_to_int_raw() <= c.q {
            return Some(c.q.clone());
        }
    }
    None
}

fn small_relation(comps: &[Phase]) -> Option<Vec<i64>> {
    let d = comps.len();
    let bound: i64 = match d {
        2 => 8,
        3 => 4,
        _ => 1,
    };
    let p = comps[0].precision();
    let tol = BigUint::one() << (p.bits() / 2);
    let width = (2 * bound + 1) as u64;
    let total = width.checked_pow(d as u32)?;
    for code in 0..total {
        let mut c = code;
        let mut m = Vec::with_capacity(d);
        for _ in 0..d {
            m.push((c % width) as i64 - bound);
            c /= width;
        }
        if m.iter().all(|&x| x == 0) {
            continue;
        }
        let mut acc = Phase::zero(p);
        for (mi, a) in m.iter().zip(comps) {
            acc = &acc + &a.mul_i64(*mi);
        }
        if acc.dist_to_int_raw() <= tol {
            return Some(m);
        }
    }
    None
}

pub fn iterate(t: &TorusDynamics, w: &TorusPoint, n: i64) -> TorusPoint {
    t.iterate(w, n)
}

/// `T^{n+q} w - T^n w = (2qa, q x + q^2 a + 2nqa - qa)` for the skew-shift.
pub fn block_displacement(t: &TorusDynamics, w: &TorusPoint, n: &BigInt, q: &BigInt) -> Result<Vec<Phase>> {
    let a = match t {
        TorusDynamics::SkewShift { frequency } => frequency,
        _ => return Err(Error::Domain("block displacement formula is for the skew-shift".into())),
    };
    if q.sign() == Sign::Minus {
        return Err(Error::Domain("q must be non-negative".into()));
    }
    let x = &w.coords()[0];
    let first = a.mul_int(&(q * 2));
    let second = &(&(&x.mul_int(q) + &a.mul_int(&(q * q))) + &a.mul_int(&(n * q * 2))) - &a.mul_int(q);
    Ok(vec![first, second])
}

/// `dist(w_k, w_{k+q}) < epsilon` for `k = 0..=horizon`, with `horizon = floor(s q)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepetitionCertificate {
    pub q: u64,
    pub epsilon: f64,
    pub s: f64,
    pub horizon: u64,
    pub max_deviation: f64,
}

fn horizon(s: f64, q: u64) -> u64 {
    (s * q as f64).floor() as u64
}

fn check_eps_s(epsilon: f64, s: f64) -> Result<()> {
    if !(epsilon > 0.0) || !(s > 0.0) {
        return Err(Error::Domain(format!("need epsilon > 0 and s > 0, got {epsilon}, {s}")));
    }
    Ok(())
}

/// Points `w_0, ..., w_{len-1}` by repeated application of the map.
pub fn orbit(t: &TorusDynamics, w: &TorusPoint, len: usize) -> Vec<TorusPoint> {
    let mut out = Vec::with_capacity(len);
    let mut cur = w.clone();
    for _ in 0..len {
        let next = t.step(&cur);
        out.push(std::mem::replace(&mut cur, next));
    }
    out
}

/// `dist(w_k, w_{k+q})` for `k = 0..=k_max`, from an explicit orbit.
pub fn orbit_deviations(t: &TorusDynamics, w: &TorusPoint, q: u64, k_max: u64) -> Vec<f64> {
    let pts = orbit(t, w, (k_max + q + 1) as usize);
    (0..=k_max as usize)
        .map(|k| pts[k].distance(&pts[k + q as usize]))
        .collect()
}

/// Smallest even `q <= q_max` with the even repetition property at `(epsilon, s)`.
///
/// Rotations use `dist(w_k, w_{k+q}) = max_i <q a_i>`, which does not depend on `k`;
/// other systems fall back to [`scan_even_repetition`].
pub fn find_even_repetition(
    t: &TorusDynamics,
    w: &TorusPoint,
    epsilon: f64,
    s: f64,
    q_max: u64,
) -> Result<Option<RepetitionCertificate>> {
    find_even_repetition_from(t, w, epsilon, s, 2, q_max)
}

/// As [`find_even_repetition`], restricted to even `q` in `q_min..=q_max`.
pub fn find_even_repetition_from(
    t: &TorusDynamics,
    w: &TorusPoint,
    epsilon: f64,
    s: f64,
    q_min: u64,
    q_max: u64,
) -> Result<Option<RepetitionCertificate>> {
    check_eps_s(epsilon, s)?;
    let q_min = (q_min.max(2) + 1) & !1;
    match t {
        TorusDynamics::Rotation { shift } => {
            let two: Vec<Phase> = shift.iter().map(|a| a + a).collect();
            let mut acc: Vec<Phase> = shift.iter().map(|a| a.mul_u64(q_min)).collect();
            let mut q = q_min;
            while q <= q_max {
                let dev = torus_norm(&acc);
                if dev < epsilon {
                    return Ok(Some(RepetitionCertificate {
                        q,
                        epsilon,
                        s,
                        horizon: horizon(s, q),
                        max_deviation: dev,
                    }));
                }
                acc = acc.iter().zip(&two).map(|(x, y)| x + y).collect();
                q += 2;
            }
            Ok(None)
        }
        TorusDynamics::SkewShift { .. } => scan_from(t, w, epsilon, s, q_min, q_max),
    }
}

/// Brute-force orbit scan over even `q = 2, 4, ..., q_max`.
pub fn scan_even_repetition(
    t: &TorusDynamics,
    w: &TorusPoint,
    epsilon: f64,
    s: f64,
    q_max: u64,
) -> Result<Option<RepetitionCertificate>> {
    check_eps_s(epsilon, s)?;
    scan_from(t, w, epsilon, s, 2, q_max)
}

fn scan_from(
    t: &TorusDynamics,
    w: &TorusPoint,
    epsilon: f64,
    s: f64,
    q_min: u64,
    q_max: u64,
) -> Result<Option<RepetitionCertificate>> {
    if q_max < q_min {
        return Ok(None);
    }
    let len = q_max + horizon(s, q_max) + 1;
    let pts = orbit(t, w, len as usize);
    let mut q = q_min;
    while q <= q_max {
        let h = horizon(s, q);
        let mut worst = 0.0f64;
        let mut ok = true;
        for k in 0..=h as usize {
            let d = pts[k].distance(&pts[k + q as usize]);
            if d >= epsilon {
                ok = false;
                break;
            }
            worst = worst.max(d);
        }
        if ok {
            return Ok(Some(RepetitionCertificate {
                q,
                epsilon,
                s,
                horizon: h,
                max_deviation: worst,
            }));
        }
        q += 2;
    }
    Ok(None)
}

/// Gordon periods `q_1 < q_2 < ...`: `q_k` is the smallest even `q > q_{k-1}` with the even
/// repetition property at `epsilon_k = epsilon_base^k`.
pub fn gordon_periods(
    t: &TorusDynamics,
    w: &TorusPoint,
    epsilon_base: f64,
    s: f64,
    levels: u32,
    q_max: u64,
) -> Result<Vec<RepetitionCertificate>> {
    if !(epsilon_base > 0.0 && epsilon_base < 1.0) {
        return Err(Error::Domain(format!(
            "epsilon base must lie in (0, 1), got {epsilon_base}"
        )));
    }
    let mut out: Vec<RepetitionCertificate> = Vec::with_capacity(levels as usize);
    for k in 1..=levels {
        let eps = epsilon_base.powi(k as i32);
        let from = out.last().map_or(2, |c| c.q + 2);
        let cert = find_even_repetition_from(t, w, eps, s, from, q_max)?.ok_or_else(|| {
            Error::Domain(format!(
                "no even repetition time in {from}..={q_max} at epsilon = {eps}"
            ))
        })?;
        out.push(cert);
    }
    Ok(out)
}

/// Re-checks a certificate against an explicit orbit; returns the measured deviation.
pub fn validate_certificate(t: &TorusDynamics, w: &TorusPoint, cert: &RepetitionCertificate) -> Option<f64> {
    if !cert.q.is_multiple_of(2) || cert.q < 2 {
        return None;
    }
    let devs = orbit_deviations(t, w, cert.q, cert.horizon);
    let worst = devs.iter().cloned().fold(0.0, f64::max);
    (worst < cert.epsilon).then_some(worst)
}

/// One repetition time `q~ = m q_e` built from a designated denominator.
#[derive(Clone, Debug, Serialize)]
pub struct SkewRepetition {
    pub k: usize,
    pub base_q: String,
    /// `base_q`, doubled if it was odd.
    pub even_q: String,
    pub multiplier: u64,
    pub q_tilde: String,
    /// `<q~ x>` for the first coordinate `x` of the starting point.
    pub omega_term: f64,
    /// `floor(r q~)`.
    pub horizon: String,
    /// `max_{0 <= n <= horizon} dist(T^{n+q~} w, T^n w)`.
    pub max_deviation: f64,
    /// False when the exact progression bound was replaced by the trivial bound 1/2.
    pub deviation_exact: bool,
    /// Bound on every displacement term other than `q~ x`, uniform in the allowed multipliers.
    pub tail_bound: f64,
    /// `tail_bound <= 4 epsilon`, so the deviation is at most `5 epsilon` by the triangle inequality.
    pub in_asymptotic_regime: bool,
    pub passes: bool,
    /// `max_deviation / epsilon`.
    pub constant: f64,
}

/// Repetition times `q~_k = m_k q_k` for the skew-shift, with `m_k` in `1..=floor(1/epsilon)+1`
/// chosen so that `<q~_k x> < epsilon`.
pub fn skew_repetition_times(
    a: &Frequency,
    w: &TorusPoint,
    epsilon: f64,
    r: f64,
    count: usize,
) -> Result<Vec<SkewRepetition>> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(r > 0.0) {
        return Err(Error::Domain(format!(
            "need 0 < epsilon < 1 and r > 0, got {epsilon}, {r}"
        )));
    }
    if w.dim() != 2 {
        return Err(Error::Domain("skew-shift points live on T^2".into()));
    }
    let dens = a.repetition_denominators();
    if dens.is_empty() {
        return Err(Error::Domain(
            "frequency has no designated repetition denominators (use a Liouville-type construction)".into(),
        ));
    }
    let t = TorusDynamics::skew_shift(a.value().clone());
    let x = &w.coords()[0];
    let m_max = (1.0 / epsilon).floor() as u64 + 1;
    let r_exact = BigRational::from_float(r).expect("finite r");
    let mut out = Vec::new();
    for (idx, base) in dens.iter().take(count).enumerate() {
        let even = if (base % 2u32).is_zero() {
            base.clone()
        } else {
            base * 2u32
        };
        let even_i = BigInt::from(even.clone());
        let cx = x.mul_int(&even_i);
        let mut chosen = None;
        let mut acc = Phase::zero(x.precision());
        for m in 1..=m_max {
            acc = &acc + &cx;
            let d = acc.dist_to_int();
            if d < epsilon {
                chosen = Some((m, d));
                break;
            }
        }
        let (m, omega_term) = chosen.ok_or_else(|| {
            Error::Internal(format!(
                "no multiplier in 1..={m_max} brings <m q x> below {epsilon}; pigeonhole guarantees one"
            ))
        })?;
        let q_tilde = &even * m;
        let q_tilde_i = BigInt::from(q_tilde.clone());
        let h = (r_exact.clone() * BigRational::from_integer(q_tilde_i.clone()))
            .floor()
            .to_integer();
        let h_u = h.to_biguint().expect("non-negative");
        let (max_deviation, exact) = progression_max_deviation(&t, w, &q_tilde_i, &h_u)?;

        let s_k = a.distance(&even)?;
        let qe = even.to_f64().unwrap_or(f64::INFINITY);
        let mf = m_max as f64;
        let tail_bound = mf * mf * qe * s_k * (1.0 + 2.0 * r) + mf * s_k;
        out.push(SkewRepetition {
            k: idx + 1,
            base_q: base.to_string(),
            even_q: even.to_string(),
            multiplier: m,
            q_tilde: q_tilde.to_string(),
            omega_term,
            horizon: h_u.to_string(),
            max_deviation,
            deviation_exact: exact,
            tail_bound,
            in_asymptotic_regime: tail_bound <= 4.0 * epsilon,
            passes: max_deviation <= 5.0 * epsilon,
            constant: max_deviation / epsilon,
        });
    }
    Ok(out)
}

/// `max_{0 <= n <= h} |T^{n+q} w - T^n w|` for the skew-shift.
///
/// The displacement is `(2qa, C + n d)` with `d = 2qa`, an arithmetic progression
/// in the second coordinate. Short horizons are scanned directly; long ones use
/// signed representatives: if `|C| + h |d| < 1/2` the progression never wraps and
/// the maximum sits at an endpoint.
fn progression_max_deviation(t: &TorusDynamics, w: &TorusPoint, q: &BigInt, h: &BigUint) -> Result<(f64, bool)> {
    let base = block_displacement(t, w, &BigInt::zero(), q)?;
    let step = block_displacement(t, w, &BigInt::one(), q)?;
    let first = base[0].dist_to_int();
    let delta = &step[1] - &base[1];
    if let Some(hs) = h.to_u64().filter(|&v| v <= DIRECT_SCAN_LIMIT) {
        let mut cur = base[1].clone();
        let mut worst = cur.dist_to_int();
        for _ in 0..hs {
            cur = &cur + &delta;
            worst = worst.max(cur.dist_to_int());
        }
        return Ok((first.max(worst), true));
    }
    let p = delta.precision();
    let half = BigInt::one() << (p.bits() - 1);
    let signed = |x: &Phase| {
        let v = BigInt::from(x.raw().clone());
        if v >= half {
            v - (BigInt::one() << p.bits())
        } else {
            v
        }
    };
    let c = signed(&base[1]);
    let d = signed(&delta);
    let hb = BigInt::from(h.clone());
    let end = &c + &d * &hb;
    let reach = abs(&c) + abs(&d) * &hb;
    if reach < half {
        let m = std::cmp::max(abs(&c), abs(&end));
        let v = crate::frequency::ratio_to_f64(&m.to_biguint().expect("abs"), &p.modulus());
        Ok((first.max(v), true))
    } else {
        Ok((0.5, false))
    }
}

fn abs(x: &BigInt) -> BigInt {
    if x.sign() == Sign::Minus {
        -x
    } else {
        x.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::liouville_frequency;
    use crate::phase::parse_exact;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    fn ph(x: &str) -> Phase {
        Phase::from_rational(&parse_exact(x).unwrap(), p())
    }

    fn skew(a: &str) -> TorusDynamics {
        TorusDynamics::skew_shift(ph(a))
    }

    fn pt(x: &str, y: &str) -> TorusPoint {
        TorusPoint::new(vec![ph(x), ph(y)]).unwrap()
    }

    #[test]
    fn skew_single_step() {
        let t = skew("1/8");
        let w = pt("1/4", "3/8");
        let one = t.iterate(&w, 1);
        assert_eq!(one, pt("1/2", "5/8"));
        assert_eq!(one, t.step(&w));
    }

    #[test]
    fn zero_iterate_is_identity() {
        let w = pt("0.2", "0.3");
        assert_eq!(skew("0.1").iterate(&w, 0), w);
        let r = TorusDynamics::rotation(vec![Phase::golden_mean(p()), ph("0.25")]).unwrap();
        assert_eq!(r.iterate(&w, 0), w);
    }

    #[test]
    fn closed_form_matches_repeated_application() {
        let t = skew("0.1");
        let w = pt("0.2", "0.3");
        let mut cur = w.clone();
        for _ in 0..7 {
            cur = t.step(&cur);
        }
        assert_eq!(t.iterate(&w, 7), cur);
        // and backwards
        let back = t.iterate(&cur, -7);
        assert_eq!(back, w);
    }

    #[test]
    fn block_displacement_small_example() {
        let t = skew("1/8");
        let w = pt("1/4", "3/8");
        let d = block_displacement(&t, &w, &BigInt::from(1), &BigInt::from(2)).unwrap();
        assert_eq!(d[0], ph("1/2"));
        assert_eq!(d[1], ph("1/4"));
        let direct = t.iterate(&w, 3).difference(&t.iterate(&w, 1));
        assert_eq!(d, direct);
        let zero = block_displacement(&t, &w, &BigInt::from(5), &BigInt::zero()).unwrap();
        assert!(zero.iter().all(Phase::is_zero));
    }

    #[test]
    fn block_displacement_rejects_rotation() {
        let r = TorusDynamics::rotation(vec![ph("0.1")]).unwrap();
        let w = TorusPoint::new(vec![ph("0.2")]).unwrap();
        assert!(block_displacement(&r, &w, &BigInt::one(), &BigInt::one()).is_err());
    }

    #[test]
    fn half_rotation_repeats_at_two() {
        let r = TorusDynamics::rotation(vec![ph("1/2")]).unwrap();
        let w = TorusPoint::new(vec![ph("0.3")]).unwrap();
        let c = find_even_repetition(&r, &w, 1e-6, 4.0, 100).unwrap().unwrap();
        assert_eq!(c.q, 2);
        assert_eq!(c.max_deviation, 0.0);
        assert_eq!(c.horizon, 8);
    }

    #[test]
    fn rejects_bad_parameters() {
        let r = TorusDynamics::rotation(vec![ph("1/2")]).unwrap();
        let w = TorusPoint::new(vec![ph("0.3")]).unwrap();
        assert!(find_even_repetition(&r, &w, 0.0, 4.0, 10).is_err());
        assert!(find_even_repetition(&r, &w, 0.1, -1.0, 10).is_err());
    }

    #[test]
    fn minimality_hints() {
        let g = TorusDynamics::rotation(vec![Phase::golden_mean(p())]).unwrap();
        assert!(g.minimality_hint().likely_minimal);
        let rat = TorusDynamics::rotation(vec![ph("3/7")]).unwrap();
        let h = rat.minimality_hint();
        assert!(!h.likely_minimal);
        assert_eq!(h.relation.unwrap(), vec!["7".to_string()]);
        // golden and 2*golden are rationally dependent
        let g2 = Phase::golden_mean(p());
        let dep = TorusDynamics::rotation(vec![g2.clone(), &g2 + &g2]).unwrap();
        assert!(!dep.minimality_hint().likely_minimal);
        let indep = TorusDynamics::rotation(vec![g2, Phase::frac_sqrt(2, p())]).unwrap();
        assert!(indep.minimality_hint().likely_minimal);
        let liou = liouville_frequency(2, 4, p()).unwrap();
        assert!(
            !TorusDynamics::skew_shift(liou.value().clone())
                .minimality_hint()
                .likely_minimal
        );
    }

    #[test]
    fn skew_repetition_with_zero_first_coordinate() {
        let a = liouville_frequency(2, 4, p()).unwrap();
        let w = pt("0", "0.7");
        let reps = skew_repetition_times(&a, &w, 0.1, 1.0, 4).unwrap();
        assert!(reps.iter().all(|r| r.multiplier == 1 && r.omega_term == 0.0));
    }

    #[test]
    fn skew_repetition_requires_designated_denominators() {
        let g = Frequency::golden_mean(p());
        assert!(skew_repetition_times(&g, &pt("0.1", "0.2"), 0.1, 1.0, 3).is_err());
    }
}

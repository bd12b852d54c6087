//! Rotation frequencies and their continued-fraction structure.
//!
//! A [`Frequency`] always carries a fixed-point value on the circle. When the
//! frequency is known exactly as a rational (decimal input, Liouville-type
//! constructions) the exact value is kept alongside and every number-theoretic
//! quantity is computed from it without rounding.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::{parse_exact, Phase, Precision};

/// Significant bits that must survive in `q * a mod 1` before a distance is trusted.
const GUARD_BITS: u64 = 32;

/// Default finite-scan threshold for the badly-approximable verdict.
pub const DEFAULT_BADLY_APPROXIMABLE_THRESHOLD: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigUint,
    pub q: BigUint,
}

/// Partial quotients `a_1, a_2, ...` of `x = [0; a_1, a_2, ...]` with convergents `p_k / q_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub partial_quotients: Vec<BigUint>,
    pub convergents: Vec<Convergent>,
    /// Fewer terms than requested were available.
    pub truncated: bool,
    /// The expansion stopped because the fixed-point value could not determine the next quotient.
    pub precision_limited: bool,
}

impl ContinuedFraction {
    fn from_quotients(quotients: Vec<BigUint>, precision_limited: bool) -> Self {
        let mut convergents = Vec::with_capacity(quotients.len());
        // p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1
        let (mut p2, mut q2) = (BigUint::one(), BigUint::zero());
        let (mut p1, mut q1) = (BigUint::zero(), BigUint::one());
        for a in &quotients {
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            convergents.push(Convergent {
                p: p.clone(),
                q: q.clone(),
            });
            p2 = std::mem::replace(&mut p1, p);
            q2 = std::mem::replace(&mut q1, q);
        }
        ContinuedFraction {
            partial_quotients: quotients,
            convergents,
            truncated: false,
            precision_limited,
        }
    }

    fn prefix(&self, k: usize) -> ContinuedFraction {
        let n = k.min(self.partial_quotients.len());
        ContinuedFraction {
            partial_quotients: self.partial_quotients[..n].to_vec(),
            convergents: self.convergents[..n].to_vec(),
            truncated: n < k,
            precision_limited: self.precision_limited && n < k,
        }
    }

    pub fn denominators(&self) -> impl Iterator<Item = &BigUint> {
        self.convergents.iter().map(|c| &c.q)
    }
}

/// A rotation number in `(0, 1)`.
#[derive(Clone, Debug)]
pub struct Frequency {
    value: Phase,
    exact: Option<BigRational>,
    expansion: ContinuedFraction,
    repetition_denominators: Vec<BigUint>,
    label: String,
}

impl Frequency {
    /// Reduces `value` modulo 1; the result must be non-zero.
    pub fn from_rational(value: BigRational, precision: Precision) -> Result<Self> {
        let frac = &value - value.floor();
        if frac.is_zero() {
            return Err(Error::Domain(format!("frequency {value} is an integer")));
        }
        let phase = Phase::from_rational(&frac, precision);
        let num = frac.numer().to_biguint().expect("fractional part is non-negative");
        let den = frac.denom().to_biguint().expect("positive denominator");
        let expansion = ContinuedFraction::from_quotients(euclid_quotients(num, den), false);
        Ok(Frequency {
            label: frac.to_string(),
            value: phase,
            exact: Some(frac),
            expansion,
            repetition_denominators: Vec::new(),
        })
    }

    /// A frequency known only to the grid accuracy of `phase`.
    pub fn from_phase(phase: Phase) -> Result<Self> {
        if phase.is_zero() {
            return Err(Error::Domain("frequency must be non-zero mod 1".into()));
        }
        let expansion = ContinuedFraction::from_quotients(interval_quotients(&phase), true);
        Ok(Frequency {
            label: format!("{}", phase.to_f64()),
            value: phase,
            exact: None,
            expansion,
            repetition_denominators: Vec::new(),
        })
    }

    pub fn golden_mean(precision: Precision) -> Self {
        let mut f = Frequency::from_phase(Phase::golden_mean(precision)).expect("non-zero");
        f.label = "golden".into();
        f
    }

    /// `frac(sqrt(n))` for a non-square `n`.
    pub fn frac_sqrt(n: u64, precision: Precision) -> Result<Self> {
        let r = (n as f64).sqrt().round() as u64;
        if r * r == n {
            return Err(Error::Domain(format!("{n} is a perfect square")));
        }
        let mut f = Frequency::from_phase(Phase::frac_sqrt(n, precision))?;
        f.label = format!("sqrt:{n}");
        Ok(f)
    }

    /// Accepts `golden`, `silver` (`sqrt(2) - 1`), `sqrt:N`, `liouville:BASE,DEPTH`,
    /// a fraction `p/q`, or an exact decimal.
    pub fn parse(text: &str, precision: Precision) -> Result<Self> {
        let t = text.trim();
        match t {
            "golden" => return Ok(Frequency::golden_mean(precision)),
            "silver" => return Frequency::frac_sqrt(2, precision),
            _ => {}
        }
        if let Some(n) = t.strip_prefix("sqrt:") {
            let n: u64 = n
                .parse()
                .map_err(|_| Error::Parse(format!("bad sqrt argument in {t:?}")))?;
            return Frequency::frac_sqrt(n, precision);
        }
        if let Some(args) = t.strip_prefix("liouville:") {
            let (b, d) = args
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected liouville:BASE,DEPTH, got {t:?}")))?;
            let base = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad base in {t:?}")))?;
            let depth = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad depth in {t:?}")))?;
            return liouville_frequency(base, depth, precision);
        }
        Frequency::from_rational(parse_exact(t)?, precision)
    }

    pub fn value(&self) -> &Phase {
        &self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn precision(&self) -> Precision {
        self.value.precision()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn expansion(&self) -> &ContinuedFraction {
        &self.expansion
    }

    /// Denominators `q_n` along which `q_n * <a q_n>` is designed to vanish.
    pub fn repetition_denominators(&self) -> &[BigUint] {
        &self.repetition_denominators
    }

    /// `a` as numerator over denominator. For inexact values this is the dyadic grid value.
    fn as_ratio(&self) -> (BigUint, BigUint) {
        match &self.exact {
            Some(r) => (
                r.numer().to_biguint().expect("in [0,1)"),
                r.denom().to_biguint().expect("positive"),
            ),
            None => (self.value.raw().clone(), self.precision().modulus()),
        }
    }

    /// `q * <a q>` together with its exact numerator over the frequency's denominator.
    pub fn scaled_distance(&self, q: &BigUint) -> Result<f64> {
        let (num, den) = self.as_ratio();
        let r = (&num * q) % &den;
        let dist = std::cmp::min(r.clone(), &den - &r);
        self.check_precision(q, &dist)?;
        Ok(ratio_to_f64(&(q * &dist), &den))
    }

    /// `<a q>`.
    pub fn distance(&self, q: &BigUint) -> Result<f64> {
        let (num, den) = self.as_ratio();
        let r = (&num * q) % &den;
        let dist = std::cmp::min(r.clone(), &den - &r);
        self.check_precision(q, &dist)?;
        Ok(ratio_to_f64(&dist, &den))
    }

    fn check_precision(&self, q: &BigUint, dist_num: &BigUint) -> Result<()> {
        if self.exact.is_some() {
            return Ok(());
        }
        // the grid value is within one ulp of the true frequency, so q * a is within q ulps
        let floor = q << GUARD_BITS;
        if *dist_num <= floor {
            return Err(Error::Precision {
                q: q.to_string(),
                detail: format!(
                    "<q a> is within 2^{GUARD_BITS} * q ulps of an integer at {} bits",
                    self.precision().bits()
                ),
            });
        }
        Ok(())
    }
}

fn euclid_quotients(mut num: BigUint, mut den: BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    while !num.is_zero() {
        let (a, r) = den.div_rem(&num);
        out.push(a);
        den = std::mem::replace(&mut num, r);
    }
    out
}

/// Quotients shared by every real in `[raw, raw + 1) / 2^bits`.
fn interval_quotients(phase: &Phase) -> Vec<BigUint> {
    let m = phase.precision().modulus();
    let (mut lo_n, mut lo_d) = (phase.raw().clone(), m.clone());
    let (mut hi_n, mut hi_d) = (phase.raw() + 1u32, m);
    let mut out = Vec::new();
    loop {
        if lo_n.is_zero() || hi_n.is_zero() || hi_n >= hi_d {
            break;
        }
        let (a_lo, r_lo) = lo_d.div_rem(&lo_n);
        let (a_hi, r_hi) = hi_d.div_rem(&hi_n);
        if a_lo != a_hi || r_lo.is_zero() || r_hi.is_zero() {
            break;
        }
        out.push(a_lo);
        // x -> 1/x - a reverses the order of the endpoints
        let new_lo = (r_hi, std::mem::take(&mut hi_n));
        let new_hi = (r_lo, std::mem::take(&mut lo_n));
        lo_n = new_lo.0;
        lo_d = new_lo.1;
        hi_n = new_hi.0;
        hi_d = new_hi.1;
    }
    out
}

/// `num / den` rounded to `f64` from 64 significant bits.
pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let scaled = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        (num >> (-shift) as u64) / den
    };
    scaled.to_f64().expect("finite") * (-(shift as f64)).exp2()
}

/// First `k` partial quotients and convergents; `truncated` is set when fewer exist.
pub fn continued_fraction(a: &Frequency, k: usize) -> Result<ContinuedFraction> {
    if k == 0 {
        return Err(Error::Domain("need at least one partial quotient".into()));
    }
    Ok(a.expansion.prefix(k))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergentScore {
    pub q: String,
    pub p: String,
    /// `q * <a q>`.
    pub score: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproximationScore {
    pub max_q: u64,
    /// `min_{1 <= q <= max_q} q <a q>`.
    pub min_score: f64,
    pub argmin_q: u64,
    pub per_convergent: Vec<ConvergentScore>,
    pub threshold: f64,
    /// Finite-scan verdict: `min_score > threshold`. Not a proof of bad approximability.
    pub reported_badly_approximable: bool,
}

/// Scans `q = 1..=max_q` for the smallest `q <a q>` and cross-checks that the
/// minimiser is a convergent denominator.
pub fn badly_approximable_score(a: &Frequency, max_q: u64, threshold: f64) -> Result<ApproximationScore> {
    if max_q < 2 {
        return Err(Error::Domain(format!("max_q must be at least 2, got {max_q}")));
    }
    let (num, den) = a.as_ratio();
    let mut r = BigUint::zero();
    let mut best: Option<(BigUint, u64)> = None;
    for q in 1..=max_q {
        r += &num;
        if r >= den {
            r -= &den;
        }
        let dist = if r.clone() + &r > den { &den - &r } else { r.clone() };
        let qb = BigUint::from(q);
        a.check_precision(&qb, &dist)?;
        let score = dist * q;
        match &best {
            Some((b, _)) if score >= *b => {}
            _ => best = Some((score, q)),
        }
    }
    let (best_num, argmin_q) = best.expect("max_q >= 2");
    let min_score = ratio_to_f64(&best_num, &den);

    let mut per_convergent = Vec::new();
    let mut denominators = vec![BigUint::one()];
    for c in &a.expansion.convergents {
        if c.q > BigUint::from(max_q) {
            break;
        }
        per_convergent.push(ConvergentScore {
            q: c.q.to_string(),
            p: c.p.to_string(),
            score: a.scaled_distance(&c.q)?,
        });
        denominators.push(c.q.clone());
    }
    let covered = a
        .expansion
        .convergents
        .last()
        .map(|c| c.q > BigUint::from(max_q))
        .unwrap_or(false)
        || a.exact.is_some();
    if covered && !denominators.contains(&BigUint::from(argmin_q)) {
        return Err(Error::Internal(format!(
            "minimum of q<aq> attained at q = {argmin_q}, which is not a convergent denominator"
        )));
    }
    Ok(ApproximationScore {
        max_q,
        min_score,
        argmin_q,
        per_convergent,
        threshold,
        reported_badly_approximable: min_score > threshold,
    })
}

fn factorial(n: u32) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// `sum_{n=1}^{depth} base^{-n!}` as an exact rational, with repetition
/// denominators `base^{n!}`.
pub fn liouville_frequency(base: u32, depth: u32, precision: Precision) -> Result<Frequency> {
    if base < 2 {
        return Err(Error::Domain(format!("base must be at least 2, got {base}")));
    }
    if depth < 2 {
        return Err(Error::Domain(format!("depth must be at least 2, got {depth}")));
    }
    let top = factorial(depth).ok_or_else(|| Error::Budget(format!("{depth}! overflows")))?;
    let needed_bits = (top as f64 * (base as f64).log2()).ceil() + GUARD_BITS as f64 * 2.0;
    if needed_bits > precision.bits() as f64 {
        return Err(Error::Budget(format!(
            "base^{{{depth}!}} needs about {needed_bits} bits, precision is {}",
            precision.bits()
        )));
    }
    let b = BigUint::from(base);
    let mut value = BigRational::zero();
    let mut dens = Vec::with_capacity(depth as usize);
    for n in 1..=depth {
        let e = factorial(n).expect("bounded by depth!") as usize;
        let qn = num_traits::pow(b.clone(), e);
        value += BigRational::new(BigInt::one(), BigInt::from(qn.clone()));
        dens.push(qn);
    }
    let mut f = Frequency::from_rational(value, precision)?;
    f.repetition_denominators = dens;
    f.label = format!("liouville:{base},{depth}");
    Ok(f)
}

/// `|a - p/q|` as an exact rational.
pub fn approximation_error(a: &Frequency, c: &Convergent) -> BigRational {
    let value = a.exact.clone().unwrap_or_else(|| a.value.to_rational());
    let pq = BigRational::new(BigInt::from(c.p.clone()), BigInt::from(c.q.clone()));
    (value - pq).abs()
}

//! Finite windows of Verblunsky coefficients `alpha(n)`, `n_min <= n <= n_max`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for `rho(n)^2 + |alpha(n)|^2 = 1`.
pub const PYTHAGORAS_TOL: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct VerblunskySequence {
    n_min: i64,
    alpha: Vec<Complex64>,
    rho: Vec<f64>,
}

/// `rho = (1 - |alpha|^2)^{1/2}`, computed as `sqrt((1 - |a|)(1 + |a|))` to keep accuracy near the circle.
pub fn rho_of(alpha: Complex64) -> f64 {
    let a = alpha.norm();
    ((1.0 - a) * (1.0 + a)).sqrt()
}

#[derive(Serialize, Deserialize)]
struct Row {
    n: i64,
    re_alpha: f64,
    im_alpha: f64,
    rho: f64,
}

impl VerblunskySequence {
    /// Coefficients `alpha[i] = alpha(n_min + i)`; every `|alpha| < 1`.
    pub fn new(n_min: i64, alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Domain("empty coefficient window".into()));
        }
        for (i, a) in alpha.iter().enumerate() {
            if !(a.norm() < 1.0) {
                return Err(Error::InvariantViolation(format!(
                    "|alpha({})| = {} is not inside the open unit disk",
                    n_min + i as i64,
                    a.norm()
                )));
            }
        }
        let rho = alpha.iter().map(|&a| rho_of(a)).collect();
        Ok(VerblunskySequence { n_min, alpha, rho })
    }

    pub fn constant(value: Complex64, n_min: i64, n_max: i64) -> Result<Self> {
        Self::from_fn(n_min, n_max, |_| value)
    }

    pub fn from_fn(n_min: i64, n_max: i64, f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::Domain(format!("empty window [{n_min}, {n_max}]")));
        }
        Self::new(n_min, (n_min..=n_max).map(f).collect())
    }

    /// Constant `background` with `impurity` replacing the coefficient at `site`.
    pub fn impurity(background: Complex64, site: i64, impurity: Complex64, n_min: i64, n_max: i64) -> Result<Self> {
        Self::from_fn(n_min, n_max, |n| if n == site { impurity } else { background })
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.alpha.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rho
    }

    pub fn covers(&self, from: i64, to: i64) -> bool {
        from > to || (from >= self.n_min && to <= self.n_max())
    }

    /// Range error unless `[from, to]` lies inside the window.
    pub fn require(&self, from: i64, to: i64) -> Result<()> {
        if self.covers(from, to) {
            Ok(())
        } else {
            Err(Error::Range {
                need_from: from,
                need_to: to,
                have_from: self.n_min,
                have_to: self.n_max(),
            })
        }
    }

    pub fn alpha(&self, n: i64) -> Result<Complex64> {
        self.require(n, n)?;
        Ok(self.alpha[(n - self.n_min) as usize])
    }

    pub fn rho(&self, n: i64) -> Result<f64> {
        self.require(n, n)?;
        Ok(self.rho[(n - self.n_min) as usize])
    }

    /// `max |alpha(n)|` over `[from, to]`.
    pub fn max_modulus(&self, from: i64, to: i64) -> Result<f64> {
        self.require(from, to)?;
        Ok((from..=to)
            .map(|n| self.alpha[(n - self.n_min) as usize].norm())
            .fold(0.0, f64::max))
    }

    /// Sub-window `[from, to]`.
    pub fn slice(&self, from: i64, to: i64) -> Result<Self> {
        self.require(from, to)?;
        let a = (from - self.n_min) as usize;
        let b = (to - self.n_min) as usize;
        Ok(VerblunskySequence {
            n_min: from,
            alpha: self.alpha[a..=b].to_vec(),
            rho: self.rho[a..=b].to_vec(),
        })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(self.n_min, self.alpha.iter().map(|&a| f(a)).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (i, (a, r)) in self.alpha.iter().zip(&self.rho).enumerate() {
            out.serialize(Row {
                n: self.n_min + i as i64,
                re_alpha: a.re,
                im_alpha: a.im,
                rho: *r,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `n,re_alpha,im_alpha,rho` rows with consecutive `n`; `rho` is recomputed and checked.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut n_min = None;
        let mut alpha = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            let expect = n_min.map(|m: i64| m + alpha.len() as i64);
            if let Some(e) = expect {
                if row.n != e {
                    return Err(Error::Parse(format!("expected index {e}, found {}", row.n)));
                }
            } else {
                n_min = Some(row.n);
            }
            let a = Complex64::new(row.re_alpha, row.im_alpha);
            if a.norm() < 1.0 && (rho_of(a) - row.rho).abs() > 1e-12 {
                return Err(Error::Parse(format!(
                    "rho column disagrees with alpha at n = {}",
                    row.n
                )));
            }
            alpha.push(a);
        }
        let n_min = n_min.ok_or_else(|| Error::Parse("no coefficient rows".into()))?;
        Self::new(n_min, alpha)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sequence_has_unit_rho() {
        let s = VerblunskySequence::constant(Complex64::new(0.0, 0.0), -3, 3).unwrap();
        assert_eq!(s.len(), 7);
        assert!(s.rhos().iter().all(|&r| r == 1.0));
    }

    #[test]
    fn rejects_boundary_coefficients() {
        assert!(matches!(
            VerblunskySequence::constant(Complex64::new(1.0, 0.0), 0, 1),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn range_errors_report_window() {
        let s = VerblunskySequence::constant(Complex64::new(0.1, 0.0), 0, 9).unwrap();
        match s.alpha(10) {
            Err(Error::Range {
                need_from: 10,
                have_to: 9,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = VerblunskySequence::from_fn(-2, 2, |n| Complex64::new(0.1 * n as f64, 0.2)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,re_alpha,im_alpha,rho\n-2,"));
        assert_eq!(VerblunskySequence::read_csv(&buf[..]).unwrap(), s);
    }

    #[test]
    fn csv_rejects_gaps() {
        let text = "n,re_alpha,im_alpha,rho\n0,0,0,1\n2,0,0,1\n";
        assert!(matches!(
            VerblunskySequence::read_csv(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn pythagorean_identity() {
        for &m in &[0.0, 0.3, 0.6, 0.9, 0.999999] {
            let a = Complex64::from_polar(m, 1.234);
            let r = rho_of(a);
            assert!((r * r + a.norm_sqr() - 1.0).abs() <= PYTHAGORAS_TOL);
        }
    }
}

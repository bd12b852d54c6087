//! Finite CMV truncations `E = L M` on a window `[n_min, n_max]`.
//!
//! `L` carries `Theta(alpha(j))` on the pair `(j, j+1)` for even `j`, `M` for odd `j`, with
//! `Theta(a) = [[conj a, rho], [rho, -a]]`. Row `r` of `E` then reads
//!
//! ```text
//! r even:  E[r, r-1] = conj a_r rho_{r-1}   E[r, r] = -conj a_r a_{r-1}
//!          E[r, r+1] = rho_r conj a_{r+1}   E[r, r+2] = rho_r rho_{r+1}
//! r odd:   E[r, r-2] = rho_{r-1} rho_{r-2}  E[r, r-1] = -rho_{r-1} a_{r-2}
//!          E[r, r]   = -a_{r-1} conj a_r    E[r, r+1] = -a_{r-1} rho_r
//! ```
//!
//! The truncation replaces `alpha(n_min - 1)` and `alpha(n_max)` by unimodular boundary
//! values. Their `rho` vanishes, the straddling blocks become diagonal, and the window
//! decouples into an exactly unitary matrix.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minmax::Mat2;
use crate::sequence::VerblunskySequence;

/// Allowed deviation of a boundary value from the unit circle.
pub const UNIMODULAR_TOL: f64 = 4.0 * f64::EPSILON;
/// Eigenvalue modulus and residual tolerance of [`CmvOperator::spectrum`].
pub const SPECTRUM_TOL: f64 = 1e-10;

/// How the window is closed at its two edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Boundary {
    /// `alpha(n_min - 1) = minus`, `alpha(n_max) = plus`, both of modulus one.
    Unimodular { minus: Complex64, plus: Complex64 },
    /// Plain projection of the two-sided operator: the edge coefficients come from the
    /// sequence and the matrix is not unitary; its defect is reported, not rejected.
    Projection,
}

impl Boundary {
    pub fn unimodular(minus: Complex64, plus: Complex64) -> Self {
        Boundary::Unimodular { minus, plus }
    }

    /// Both edges at `alpha = 1`.
    pub fn free() -> Self {
        Self::unimodular(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }
}

/// A 2x2 block acting on the pair `(j, j+1)`.
pub type IndexedBlock = (i64, Mat2);

/// A finite CMV matrix stored by rows of its five diagonals.
#[derive(Clone, Debug)]
pub struct CmvOperator {
    n_min: i64,
    n_max: i64,
    boundary: Boundary,
    /// `alpha(n)` for `n_min - 1 <= n <= n_max`, boundary values substituted.
    coef: Vec<Complex64>,
    rho: Vec<f64>,
    /// `band[i][d] = E[n_min + i, n_min + i + d - 2]`.
    band: Vec<[Complex64; 5]>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn theta(a: Complex64, rho: f64) -> Mat2 {
    let r = Complex64::new(rho, 0.0);
    Mat2::new(a.conj(), r, r, -a)
}

impl CmvOperator {
    /// Assembles the window `[n_min, n_max]` from the paper-style entry formulas.
    ///
    /// With a unimodular boundary the sequence must cover `[n_min, n_max - 1]`; in
    /// projection mode it must cover `[n_min - 1, n_max]`.
    pub fn assemble(seq: &VerblunskySequence, n_min: i64, n_max: i64, boundary: Boundary) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::Domain(format!("empty window [{n_min}, {n_max}]")));
        }
        let mut coef = Vec::with_capacity((n_max - n_min + 2) as usize);
        let mut rho = Vec::with_capacity(coef.capacity());
        match boundary {
            Boundary::Unimodular { minus, plus } => {
                for b in [minus, plus] {
                    if (b.norm() - 1.0).abs() > UNIMODULAR_TOL {
                        return Err(Error::Domain(format!(
                            "boundary coefficient {b} has modulus {} (need exactly 1; use the projection mode for a non-unitary truncation)",
                            b.norm()
                        )));
                    }
                }
                seq.require(n_min, n_max - 1)?;
                coef.push(minus);
                rho.push(0.0);
                for n in n_min..n_max {
                    coef.push(seq.alpha(n)?);
                    rho.push(seq.rho(n)?);
                }
                coef.push(plus);
                rho.push(0.0);
            }
            Boundary::Projection => {
                seq.require(n_min - 1, n_max)?;
                for n in n_min - 1..=n_max {
                    coef.push(seq.alpha(n)?);
                    rho.push(seq.rho(n)?);
                }
            }
        }
        let mut op = CmvOperator {
            n_min,
            n_max,
            boundary,
            coef,
            rho,
            band: Vec::new(),
        };
        op.band = (n_min..=n_max)
            .map(|r| {
                let mut row = [zero(); 5];
                for (c, v) in op.display_row(r) {
                    if (n_min..=n_max).contains(&c) {
                        row[(c - r + 2) as usize] = v;
                    }
                }
                row
            })
            .collect();
        Ok(op)
    }

    /// `alpha(n)` for `n_min - 1 <= n <= n_max`, boundary values substituted.
    fn a(&self, n: i64) -> Complex64 {
        self.coef[(n - self.n_min + 1) as usize]
    }

    fn r(&self, n: i64) -> Complex64 {
        Complex64::new(self.rho[(n - self.n_min + 1) as usize], 0.0)
    }

    /// `a`/`r` that read as zero / one beyond the stored coefficients, used for columns
    /// that the boundary blocks cut off anyway.
    fn a_ext(&self, n: i64) -> Complex64 {
        if n < self.n_min - 1 || n > self.n_max {
            zero()
        } else {
            self.a(n)
        }
    }

    fn r_ext(&self, n: i64) -> Complex64 {
        if n < self.n_min - 1 || n > self.n_max {
            Complex64::new(1.0, 0.0)
        } else {
            self.r(n)
        }
    }

    /// The nonzero pattern of row `r` of the two-sided matrix, per the displayed formulas.
    fn display_row(&self, r: i64) -> [(i64, Complex64); 4] {
        let (a, rh) = (|n| self.a_ext(n), |n| self.r_ext(n));
        if r.rem_euclid(2) == 0 {
            [
                (r - 1, a(r).conj() * rh(r - 1)),
                (r, -a(r).conj() * a(r - 1)),
                (r + 1, rh(r) * a(r + 1).conj()),
                (r + 2, rh(r) * rh(r + 1)),
            ]
        } else {
            [
                (r - 2, rh(r - 1) * rh(r - 2)),
                (r - 1, -rh(r - 1) * a(r - 2)),
                (r, -a(r - 1) * a(r).conj()),
                (r + 1, -a(r - 1) * rh(r)),
            ]
        }
    }

    pub fn size(&self) -> usize {
        self.band.len()
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_unitary_mode(&self) -> bool {
        matches!(self.boundary, Boundary::Unimodular { .. })
    }

    /// `E[row, col]` in sequence indices; zero off the band or outside the window.
    pub fn entry(&self, row: i64, col: i64) -> Complex64 {
        let d = col - row;
        if !(self.n_min..=self.n_max).contains(&row) || !(self.n_min..=self.n_max).contains(&col) || d.abs() > 2 {
            return zero();
        }
        self.band[(row - self.n_min) as usize][(d + 2) as usize]
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.size();
        let mut m = DMatrix::from_element(n, n, zero());
        for (i, row) in self.band.iter().enumerate() {
            for (d, v) in row.iter().enumerate() {
                let j = i as i64 + d as i64 - 2;
                if (0..n as i64).contains(&j) {
                    m[(i, j as usize)] = *v;
                }
            }
        }
        m
    }

    /// `E x` using the band.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        assert_eq!(x.len(), n, "vector length must match the window");
        (0..n)
            .map(|i| {
                let mut s = zero();
                for d in 0..5 {
                    let j = i as i64 + d as i64 - 2;
                    if (0..n as i64).contains(&j) {
                        s += self.band[i][d] * x[j as usize];
                    }
                }
                s
            })
            .collect()
    }

    /// The `Theta` blocks of `L` (even `j`) and `M` (odd `j`) as `(j, block)`, covering
    /// pairs `(j, j+1)` with `n_min - 1 <= j <= n_max`.
    pub fn factor_blocks(&self) -> (Vec<IndexedBlock>, Vec<IndexedBlock>) {
        let mut l = Vec::new();
        let mut m = Vec::new();
        for j in self.n_min - 1..=self.n_max {
            let b = (j, theta(self.a(j), self.rho[(j - self.n_min + 1) as usize]));
            if j.rem_euclid(2) == 0 {
                l.push(b);
            } else {
                m.push(b);
            }
        }
        (l, m)
    }

    /// Band of `P L P M P` from the factor blocks, independent of the entry formulas.
    pub fn factor_product(&self) -> Vec<[Complex64; 5]> {
        let (n_min, n_max) = (self.n_min, self.n_max);
        let inside = |i: i64| (n_min..=n_max).contains(&i);
        // row i of a block-diagonal factor: (col, value) pairs inside the window
        let row_of = |blocks: &[(i64, Mat2)], i: i64| -> Vec<(i64, Complex64)> {
            let mut out = Vec::new();
            for (j, b) in blocks {
                if i == *j || i == j + 1 {
                    let bi = (i - j) as usize;
                    for bc in 0..2 {
                        let c = j + bc as i64;
                        if inside(c) {
                            out.push((c, b[(bi, bc)]));
                        }
                    }
                }
            }
            out
        };
        let (l, m) = self.factor_blocks();
        (n_min..=n_max)
            .map(|r| {
                let mut row = [zero(); 5];
                for (k, lv) in row_of(&l, r) {
                    for (c, mv) in row_of(&m, k) {
                        row[(c - r + 2) as usize] += lv * mv;
                    }
                }
                row
            })
            .collect()
    }

    /// `max |(P L P M P - E)[i, j]|`; exactly the factorisation defect in unitary mode.
    pub fn factor_defect(&self) -> f64 {
        self.factor_product()
            .iter()
            .zip(&self.band)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// `max |(E* E - I)[i, j]|`, computed on the band of `E* E` (width 4).
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.size() as i64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for k in (i - 4).max(0)..=(i + 4).min(n - 1) {
                let mut s = zero();
                for j in (i.max(k) - 2).max(0)..=(i.min(k) + 2).min(n - 1) {
                    let eji = self.band[j as usize][(i - j + 2) as usize];
                    let ejk = self.band[j as usize][(k - j + 2) as usize];
                    s += eji.conj() * ejk;
                }
                if i == k {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// `det E = det L det M` from the factor blocks; the straddling blocks contribute
    /// only their in-window diagonal entry.
    pub fn det_from_factors(&self) -> Complex64 {
        let (l, m) = self.factor_blocks();
        l.iter()
            .chain(&m)
            .map(|(j, b)| {
                if *j < self.n_min {
                    b[(1, 1)]
                } else if *j >= self.n_max {
                    b[(0, 0)]
                } else {
                    b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)]
                }
            })
            .product()
    }

    /// Nonzero entries as `(row, col, value)` in sequence indices, row-major.
    pub fn triplets(&self) -> Vec<(i64, i64, Complex64)> {
        let mut out = Vec::new();
        for (i, row) in self.band.iter().enumerate() {
            let r = self.n_min + i as i64;
            for (d, v) in row.iter().enumerate() {
                if *v != zero() {
                    out.push((r, r + d as i64 - 2, *v));
                }
            }
        }
        out
    }

    /// Sparse-triplet text dump:
    ///
    /// ```text
    /// # gordon-cmv sparse triplet v1
    /// # size <N>
    /// # window <n_min> <n_max>
    /// # boundary <unimodular|projection>
    /// # row col re im
    /// <row> <col> <re> <im>
    /// ...
    /// ```
    ///
    /// Indices are sequence indices `n`; only nonzero entries are listed, row-major;
    /// values use the shortest round-trip decimal form.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# gordon-cmv sparse triplet v1")?;
        writeln!(w, "# size {}", self.size())?;
        writeln!(w, "# window {} {}", self.n_min, self.n_max)?;
        let mode = if self.is_unitary_mode() {
            "unimodular"
        } else {
            "projection"
        };
        writeln!(w, "# boundary {mode}")?;
        writeln!(w, "# row col re im")?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {} {}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Eigenvalues sorted by angle in `(-pi, pi]` with orthonormal eigenvectors, from a
    /// dense complex Schur decomposition (Schur form of a normal matrix is diagonal).
    pub fn spectrum(&self) -> Result<Spectrum> {
        if !self.is_unitary_mode() {
            return Err(Error::Domain("spectrum needs a unimodular boundary".into()));
        }
        let n = self.size();
        let schur = nalgebra::Schur::try_new(self.to_dense(), f64::EPSILON, 1000 * n.max(10)).ok_or_else(|| {
            Error::Numeric {
                size: n,
                detail: "Schur iteration did not converge".into(),
            }
        })?;
        let (q, t) = schur.unpack();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| t[(i, i)].arg().total_cmp(&t[(j, j)].arg()));
        let eigenvalues: Vec<Complex64> = order.iter().map(|&i| t[(i, i)]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
        let mut residuals = Vec::with_capacity(n);
        for (k, lambda) in eigenvalues.iter().enumerate() {
            let v: Vec<Complex64> = vectors.column(k).iter().copied().collect();
            let ev = self.apply(&v);
            let res = ev
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if res > SPECTRUM_TOL || (lambda.norm() - 1.0).abs() > SPECTRUM_TOL {
                return Err(Error::Numeric {
                    size: n,
                    detail: format!(
                        "eigenpair {k} (angle {}) has residual {res:e} and |lambda| - 1 = {:e}",
                        lambda.arg(),
                        lambda.norm() - 1.0
                    ),
                });
            }
            residuals.push(res);
        }
        Ok(Spectrum {
            n_min: self.n_min,
            eigenvalues,
            vectors,
            residuals,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    n_min: i64,
    pub eigenvalues: Vec<Complex64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`; row `i` is site `n_min + i`.
    pub vectors: DMatrix<Complex64>,
    /// `|E v_k - lambda_k v_k|`.
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.arg()).collect()
    }

    pub fn product(&self) -> Complex64 {
        self.eigenvalues.iter().product()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with columns `index,angle,re,im,residual`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "angle", "re", "im", "residual"])?;
        for (k, (z, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            out.write_record([
                k.to_string(),
                z.arg().to_string(),
                z.re.to_string(),
                z.im.to_string(),
                r.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Decay report of eigenvector `index`.
    pub fn profile(&self, index: usize) -> Result<Profile> {
        if index >= self.len() {
            return Err(Error::Domain(format!(
                "eigenvector index {index} out of range 0..{}",
                self.len()
            )));
        }
        let mass: Vec<f64> = self.vectors.column(index).iter().map(|c| c.norm_sqr()).collect();
        Ok(Profile::from_masses(index, self.n_min, &mass))
    }

    pub fn profiles(&self) -> Vec<Profile> {
        (0..self.len())
            .map(|k| self.profile(k).expect("index in range"))
            .collect()
    }

    pub fn min_participation_ratio(&self) -> f64 {
        self.profiles()
            .iter()
            .map(|p| p.participation_ratio)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvector mass in dyadic shells around its peak: shell 0 is the peak site, shell
/// `s >= 1` holds the sites at distance `2^{s-1} <= d < 2^s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub index: usize,
    /// Site `n` of the largest component.
    pub peak: i64,
    pub shells: Vec<f64>,
    /// `(sum |v|^2)^2 / sum |v|^4`, between 1 and `N`.
    pub participation_ratio: f64,
}

impl Profile {
    fn from_masses(index: usize, n_min: i64, mass: &[f64]) -> Profile {
        let total: f64 = mass.iter().sum();
        let peak = mass
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &m)| if m > best.1 { (i, m) } else { best },
            )
            .0;
        let shell_of = |i: usize| {
            let d = i.abs_diff(peak);
            if d == 0 {
                0
            } else {
                (usize::BITS - d.leading_zeros()) as usize
            }
        };
        let count = (0..mass.len()).map(shell_of).max().unwrap_or(0) + 1;
        let mut shells = vec![0.0; count];
        for (i, m) in mass.iter().enumerate() {
            shells[shell_of(i)] += m / total;
        }
        let fourth: f64 = mass.iter().map(|m| (m / total) * (m / total)).sum();
        Profile {
            index,
            peak: n_min + peak as i64,
            shells,
            participation_ratio: 1.0 / fourth,
        }
    }

    /// CSV with columns `shell,mass`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["shell", "mass"])?;
        for (s, m) in self.shells.iter().enumerate() {
            out.write_record([s.to_string(), m.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outcome of the gauge check `alpha -> e^{i theta} alpha`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeCheck {
    pub theta: f64,
    /// `max |E(e^{i theta} alpha) - D E(alpha) D*|` for `D = diag(e^{-i theta/2}` on even
    /// sites, `e^{i theta/2}` on odd sites`)`.
    pub conjugation_defect: f64,
    /// Largest difference between the angle-sorted spectra of the two operators.
    pub eigenvalue_defect: f64,
}

/// Rotating every coefficient (boundary values included) by `e^{i theta}` conjugates each
/// `Theta` block by `diag(conj mu, mu)` with `mu^2 = e^{i theta}`, so `E` goes to `D E D*`.
/// Both sides are built explicitly and compared, together with their spectra.
pub fn gauge_check(
    seq: &VerblunskySequence,
    n_min: i64,
    n_max: i64,
    boundary: Boundary,
    theta: f64,
) -> Result<GaugeCheck> {
    let lambda = Complex64::from_polar(1.0, theta);
    let mu = Complex64::from_polar(1.0, theta / 2.0);
    let rotated_boundary = match boundary {
        Boundary::Unimodular { minus, plus } => Boundary::unimodular(lambda * minus, lambda * plus),
        Boundary::Projection => Boundary::Projection,
    };
    let e = CmvOperator::assemble(seq, n_min, n_max, boundary)?;
    let e_rot = CmvOperator::assemble(&seq.map(|a| lambda * a)?, n_min, n_max, rotated_boundary)?;
    let d = |n: i64| if n.rem_euclid(2) == 0 { mu.conj() } else { mu };
    let mut conjugation_defect: f64 = 0.0;
    for r in n_min..=n_max {
        for c in (r - 2).max(n_min)..=(r + 2).min(n_max) {
            let conj = d(r) * e.entry(r, c) * d(c).conj();
            conjugation_defect = conjugation_defect.max((e_rot.entry(r, c) - conj).norm());
        }
    }
    let s = e.spectrum()?;
    let s_rot = e_rot.spectrum()?;
    let eigenvalue_defect = s
        .eigenvalues
        .iter()
        .zip(&s_rot.eigenvalues)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(GaugeCheck {
        theta,
        conjugation_defect,
        eigenvalue_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_apply(m: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
        (m * nalgebra::DVector::from_column_slice(x)).iter().copied().collect()
    }

    #[test]
    fn free_operator_is_a_permutation() {
        let s = VerblunskySequence::constant(zero(), -6, 6).unwrap();
        let e = CmvOperator::assemble(&s, -5, 5, Boundary::free()).unwrap();
        assert_eq!(e.unitarity_defect(), 0.0);
        assert_eq!(e.factor_defect(), 0.0);
        for r in -5..=5 {
            let nz: Vec<_> = (-5..=5).filter(|&k| e.entry(r, k) != zero()).collect();
            assert_eq!(nz.len(), 1, "row {r}");
        }
    }

    #[test]
    fn non_unimodular_boundary_is_rejected() {
        let s = VerblunskySequence::constant(c(0.2, 0.0), -6, 6).unwrap();
        let err = CmvOperator::assemble(&s, 0, 4, Boundary::unimodular(c(0.9, 0.0), c(1.0, 0.0)));
        assert!(matches!(err, Err(Error::Domain(_))));
        let proj = CmvOperator::assemble(&s, 0, 4, Boundary::Projection).unwrap();
        assert!(proj.unitarity_defect() > 1e-3);
    }

    #[test]
    fn two_site_window_is_a_theta_block() {
        // window [0, 1]: pair (0, 1) carries Theta(alpha(0)) from L, M is diagonal there
        let s = VerblunskySequence::constant(c(0.3, -0.4), 0, 1).unwrap();
        let e = CmvOperator::assemble(&s, 0, 1, Boundary::unimodular(c(0.0, 1.0), c(-1.0, 0.0))).unwrap();
        assert!(e.unitarity_defect() < 1e-15);
        let det = e.det_from_factors();
        let dense = e.to_dense();
        let direct = dense[(0, 0)] * dense[(1, 1)] - dense[(0, 1)] * dense[(1, 0)];
        assert!((det - direct).norm() < 1e-15);
    }

    #[test]
    fn apply_matches_dense() {
        let s = VerblunskySequence::from_fn(-3, 9, |n| Complex64::from_polar(0.5, n as f64)).unwrap();
        let e = CmvOperator::assemble(&s, -2, 8, Boundary::free()).unwrap();
        let x: Vec<_> = (0..e.size()).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let a = e.apply(&x);
        let b = dense_apply(&e.to_dense(), &x);
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).norm() < 1e-13));
    }

    #[test]
    fn profile_shells() {
        let p = Profile::from_masses(0, 10, &[0.0, 0.25, 0.5, 0.25, 0.0]);
        assert_eq!(p.peak, 12);
        assert_eq!(p.shells, vec![0.5, 0.5, 0.0]);
        assert!((p.participation_ratio - 1.0 / (0.0625 + 0.25 + 0.0625)).abs() < 1e-15);
    }
}

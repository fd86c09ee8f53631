//! Numeric primitives shared by every other module: real eigen-decomposition
//! of loxodromic matrices, singular values, the matrix exponential, guarded
//! linear solves and the frame sign convention.
//!
//! All thresholds live in [`tol`] so that the whole crate applies one policy.

use nalgebra::linalg::{Schur, LU, SVD};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix. Group elements and Lie algebra elements share this type.
pub type Mat = DMatrix<f64>;

/// Tolerance policy.
pub mod tol {
    /// `|det - 1| <= DET * n` for group elements.
    pub const DET: f64 = 1e-9;
    /// `|trace| <= TRACE * ||X||` for Lie algebra elements.
    pub const TRACE: f64 = 1e-9;
    /// An eigenvalue is real when `|Im| <= REALNESS * |lambda|`.
    pub const REALNESS: f64 = 1e-8;
    /// Minimal relative modulus gap `|l_i| / |l_{i+1}| - 1`.
    pub const MODULUS_GAP: f64 = 1e-9;
    /// Transversality threshold on normalized mixed determinants.
    pub const TRANSVERSE: f64 = 1e-9;
    /// Condition number above which guarded solves report `Singular`.
    pub const CONDITION: f64 = 1e12;
}

/// Eigen-data of a real loxodromic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LoxodromicData {
    /// Eigenvalues ordered by strictly decreasing modulus.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors as columns, canonically signed, `det = 1`.
    pub frame: Mat,
    /// `min_i |l_i| / |l_{i+1}| - 1`.
    pub gap: f64,
}

impl LoxodromicData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `frame * diag(eigenvalues) * frame^-1`.
    pub fn reconstruct(&self) -> Result<Mat> {
        let d = Mat::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        let inv = inverse(&self.frame)?;
        Ok(&self.frame * d * inv)
    }
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn frobenius(m: &Mat) -> f64 {
    m.norm()
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Removes the trace: `X - tr(X)/n * I`.
pub fn traceless_part(m: &Mat) -> Mat {
    let n = m.nrows();
    let t = m.trace() / n as f64;
    m - Mat::identity(n, n) * t
}

pub fn is_unimodular(g: &Mat, tolerance: f64) -> bool {
    g.is_square() && (g.determinant() - 1.0).abs() <= tolerance * g.nrows() as f64
}

pub fn is_traceless(x: &Mat, tolerance: f64) -> bool {
    x.is_square() && x.trace().abs() <= tolerance * x.norm().max(1.0)
}

/// Ratio of extreme singular values; `inf` for exactly singular input.
pub fn condition_number(m: &Mat) -> f64 {
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Partial-pivot solve `a x = b`, rejecting systems with condition above
/// [`tol::CONDITION`].
pub fn solve(a: &Mat, b: &Mat) -> Result<Mat> {
    let condition = condition_number(a);
    if !condition.is_finite() || condition > tol::CONDITION {
        return Err(Error::Singular { condition });
    }
    LU::new(a.clone())
        .solve(b)
        .ok_or(Error::Singular { condition })
}

/// Guarded inverse, see [`solve`].
pub fn inverse(a: &Mat) -> Result<Mat> {
    solve(a, &Mat::identity(a.nrows(), a.ncols()))
}

/// Inverse without the conditioning guard. Group elements coming from long
/// words are legitimately ill-conditioned; only exact singularity fails.
pub fn group_inverse(g: &Mat) -> Result<Mat> {
    LU::new(g.clone())
        .try_inverse()
        .filter(|m| m.iter().all(|x| x.is_finite()))
        .ok_or(Error::Singular { condition: f64::INFINITY })
}

/// Adjoint action `Ad(g) y = g y g^-1`.
pub fn adjoint(g: &Mat, y: &Mat) -> Result<Mat> {
    Ok(g * y * group_inverse(g)?)
}

/// `Ad(g)^-1 y = g^-1 y g`.
pub fn adjoint_inverse(g: &Mat, y: &Mat) -> Result<Mat> {
    Ok(group_inverse(g)? * y * g)
}

/// Diagonal of a square matrix as a vector.
pub fn diagonal(m: &Mat) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, i)]).collect()
}

pub fn diag_matrix(values: &[f64]) -> Mat {
    Mat::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

/// Sign convention for frames: every column scaled to unit length with its
/// largest-magnitude entry positive, then the last column flipped if the
/// determinant is negative, then everything scaled so that `det = 1`.
pub fn canonicalize_frame(h: &Mat) -> Result<Mat> {
    let n = h.nrows();
    let mut out = h.clone();
    for j in 0..n {
        let mut col = out.column_mut(j);
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        col /= norm;
        let mut best = 0;
        for i in 1..n {
            // ties resolved toward the first index
            if col[i].abs() > col[best].abs() * (1.0 + 1e-12) {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    let mut det = out.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular { condition: f64::INFINITY });
    }
    if det < 0.0 {
        out.column_mut(n - 1).neg_mut();
        det = -det;
    }
    out /= det.powf(1.0 / n as f64);
    Ok(out)
}

/// Orthonormal frame with the same column-prefix spans (Gram-Schmidt via QR,
/// positive diagonal of R).
pub fn orthonormal_frame(frame: &Mat) -> Result<Mat> {
    let n = frame.nrows();
    if !frame.is_square() {
        return Err(Error::DimensionMismatch { expected: n, found: frame.ncols() });
    }
    let qr = frame.clone().qr();
    let r = qr.r();
    let scale = max_abs(&r).max(f64::MIN_POSITIVE);
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        if d.abs() <= 1e-14 * scale || !d.is_finite() {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        if d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// Singular values in nonincreasing order.
pub fn singular_values(g: &Mat) -> Result<Vec<f64>> {
    let mut sv: Vec<f64> = SVD::new(g.clone(), false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv.last().is_none_or(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(Error::Singular { condition: f64::INFINITY });
    }
    Ok(sv)
}

/// Matrix exponential by scaling and squaring of a degree-18 Taylor polynomial.
pub fn matrix_exp(x: &Mat) -> Mat {
    let n = x.nrows();
    let norm = x.abs().row_sum().iter().cloned().fold(0.0_f64, f64::max);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = x / 2f64.powi(squarings as i32);
    let mut term = Mat::identity(n, n);
    let mut sum = Mat::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn complex_spectrum(g: &Mat) -> Result<Vec<(f64, f64)>> {
    let n = g.nrows();
    let schur = Schur::try_new(g.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or(Error::Singular { condition: f64::NAN })?;
    Ok(schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect())
}

/// Eigen-decomposition of a matrix with real eigenvalues of pairwise distinct
/// moduli.
///
/// Eigenvalues come from the real Schur form; each eigenvector is obtained by
/// inverse iteration at the computed eigenvalue. Columns are then put in the
/// canonical sign convention of [`canonicalize_frame`].
pub fn eigen_loxodromic(g: &Mat) -> Result<LoxodromicData> {
    let n = g.nrows();
    if !g.is_square() {
        return Err(Error::DimensionMismatch { expected: n, found: g.ncols() });
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular { condition: f64::NAN });
    }
    let mut spectrum = complex_spectrum(g)?;
    for &(re, im) in &spectrum {
        let modulus = re.hypot(im);
        if im.abs() > tol::REALNESS * modulus {
            return Err(Error::ComplexSpectrum { re, im });
        }
    }
    spectrum.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
    let eigenvalues: Vec<f64> = spectrum.iter().map(|z| z.0).collect();
    if eigenvalues.contains(&0.0) {
        return Err(Error::Singular { condition: f64::INFINITY });
    }
    let mut gap = f64::INFINITY;
    for w in eigenvalues.windows(2) {
        let ratio = w[0].abs() / w[1].abs() - 1.0;
        if ratio <= tol::MODULUS_GAP {
            return Err(Error::ModulusCollision { larger: w[0], smaller: w[1], gap: ratio });
        }
        gap = gap.min(ratio);
    }

    let mut frame = Mat::zeros(n, n);
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let v = inverse_iteration(g, lambda)?;
        frame.set_column(j, &v);
    }
    let frame = canonicalize_frame(&frame)?;
    // refine against the computed vectors: diag(h^-1 g h)
    let eigenvalues = match LU::new(frame.clone()).solve(&(g * &frame)) {
        Some(d) => {
            let refined = diagonal(&d);
            let consistent = refined
                .iter()
                .zip(&eigenvalues)
                .all(|(r, l)| r.is_finite() && (r - l).abs() <= 1e-6 * l.abs());
            if consistent {
                refined
            } else {
                eigenvalues
            }
        }
        None => eigenvalues,
    };
    Ok(LoxodromicData { eigenvalues, frame, gap })
}

fn inverse_iteration(g: &Mat, lambda: f64) -> Result<nalgebra::DVector<f64>> {
    let n = g.nrows();
    let mut shift = 1e-13;
    for _ in 0..6 {
        let mu = lambda * (1.0 + shift);
        let shifted = g - Mat::identity(n, n) * mu;
        let lu = LU::new(shifted);
        // deterministic start vector with no special alignment
        let mut v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64 + 0.01 * (i * i) as f64);
        v /= v.norm();
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&v) {
                Some(w) if w.iter().all(|x| x.is_finite()) && w.norm() > 0.0 => {
                    v = &w / w.norm();
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(v);
        }
        shift *= 1e3;
    }
    Err(Error::Singular { condition: f64::INFINITY })
}

fn combinations(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, &mut Vec::new(), &mut out);
    out
}

/// Matrix of the `p`-th exterior power in the lexicographic basis of
/// `p`-subsets.
pub fn exterior_power(m: &Mat, p: usize) -> Mat {
    let n = m.nrows();
    let subsets = combinations(n, p);
    let size = subsets.len();
    let mut out = Mat::zeros(size, size);
    for (r, rows) in subsets.iter().enumerate() {
        for (c, cols) in subsets.iter().enumerate() {
            let minor = Mat::from_fn(p, p, |i, j| m[(rows[i], cols[j])]);
            out[(r, c)] = minor.determinant();
        }
    }
    out
}

/// Logarithms of the singular values of the product `factors[0] * ... *
/// factors[last]`, in nonincreasing order.
///
/// The partial sums `log s_1 + ... + log s_p` are the log operator norms of the
/// `p`-th exterior powers, which are accumulated factor by factor with
/// rescaling. Only top singular values are ever extracted, so small singular
/// values of long products keep their relative accuracy.
pub fn log_singular_values_of_product(factors: &[&Mat]) -> Result<Vec<f64>> {
    let n = factors
        .first()
        .map(|m| m.nrows())
        .ok_or_else(|| Error::OutOfRange("empty product".into()))?;
    let mut partial = vec![0.0; n + 1];
    for p in 1..n {
        let mut acc = Mat::identity(combinations(n, p).len(), combinations(n, p).len());
        let mut log_scale = 0.0;
        for f in factors {
            acc *= exterior_power(f, p);
            let s = max_abs(&acc);
            if s == 0.0 || !s.is_finite() {
                return Err(Error::Singular { condition: f64::INFINITY });
            }
            acc /= s;
            log_scale += s.ln();
        }
        let top = SVD::new(acc, false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        partial[p] = log_scale + top.ln();
    }
    let mut log_det = 0.0;
    for f in factors {
        let d = f.determinant().abs();
        if d == 0.0 {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        log_det += d.ln();
    }
    partial[n] = log_det;
    Ok((1..=n).map(|p| partial[p] - partial[p - 1]).collect())
}

//! Jordan and Cartan projections, the longest Weyl element, full flags,
//! transversality and the neutral / co-neutral maps of a transverse pair.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::numkernel::{self, tol, LoxodromicData, Mat};

/// A vector of the model Cartan subspace: `n` reals, zero sum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CartanVector(pub Vec<f64>);

impl CartanVector {
    pub fn new(coords: Vec<f64>) -> Self {
        CartanVector(coords)
    }

    pub fn zeros(n: usize) -> Self {
        CartanVector(vec![0.0; n])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn dot(&self, other: &CartanVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sum().abs() <= 1e-9 * self.norm().max(1.0)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Largest componentwise difference.
    pub fn distance(&self, other: &CartanVector) -> f64 {
        (self - other).max_abs()
    }

    pub fn as_diagonal(&self) -> Mat {
        numkernel::diag_matrix(&self.0)
    }

    /// Coordinate reversal.
    pub fn omega0(&self) -> CartanVector {
        omega0(self)
    }
}

impl Index<usize> for CartanVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<'a> Add<&'a CartanVector> for &'a CartanVector {
    type Output = CartanVector;
    fn add(self, rhs: &CartanVector) -> CartanVector {
        CartanVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a CartanVector> for &'a CartanVector {
    type Output = CartanVector;
    fn sub(self, rhs: &CartanVector) -> CartanVector {
        CartanVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for CartanVector {
    type Output = CartanVector;
    fn add(self, rhs: CartanVector) -> CartanVector {
        &self + &rhs
    }
}

impl Sub for CartanVector {
    type Output = CartanVector;
    fn sub(self, rhs: CartanVector) -> CartanVector {
        &self - &rhs
    }
}

impl Neg for CartanVector {
    type Output = CartanVector;
    fn neg(self) -> CartanVector {
        CartanVector(self.0.into_iter().map(|x| -x).collect())
    }
}

impl Mul<f64> for &CartanVector {
    type Output = CartanVector;
    fn mul(self, s: f64) -> CartanVector {
        CartanVector(self.0.iter().map(|x| x * s).collect())
    }
}

impl Mul<f64> for CartanVector {
    type Output = CartanVector;
    fn mul(self, s: f64) -> CartanVector {
        &self * s
    }
}

impl fmt::Display for CartanVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// `(x_1, ..., x_n) -> (x_n, ..., x_1)`.
pub fn omega0(x: &CartanVector) -> CartanVector {
    CartanVector(x.0.iter().rev().cloned().collect())
}

/// The regular symmetric vector `diag(n-1, n-3, ..., -(n-1))`, unit norm.
pub fn model_vector(n: usize) -> CartanVector {
    let v = CartanVector((0..n).map(|i| (n - 1) as f64 - 2.0 * i as f64).collect());
    let norm = v.norm();
    if norm == 0.0 {
        v
    } else {
        &v * (1.0 / norm)
    }
}

/// Simple root `x -> x_i - x_{i+1}` as a dual vector.
pub fn simple_root(n: usize, i: usize) -> CartanVector {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v[i + 1] = -1.0;
    CartanVector(v)
}

/// Log-moduli of the eigenvalues, nonincreasing.
pub fn jordan_projection(g: &Mat) -> Result<CartanVector> {
    Ok(jordan_of(&numkernel::eigen_loxodromic(g)?))
}

pub fn jordan_of(lox: &LoxodromicData) -> CartanVector {
    CartanVector(lox.eigenvalues.iter().map(|l| l.abs().ln()).collect())
}

/// Log singular values, nonincreasing.
pub fn cartan_projection(g: &Mat) -> Result<CartanVector> {
    let sv = numkernel::singular_values(g)?;
    Ok(CartanVector(sv.iter().map(|s| s.ln()).collect()))
}

/// Cartan projection of a product given by its factors, computed without
/// forming the product.
pub fn cartan_projection_of_product(factors: &[&Mat]) -> Result<CartanVector> {
    Ok(CartanVector(numkernel::log_singular_values_of_product(factors)?))
}

/// A full flag, stored as an orthonormal frame whose first `p` columns span
/// the `p`-dimensional subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    frame: Mat,
}

impl Flag {
    /// Flag spanned by the column prefixes of an invertible matrix.
    pub fn from_frame(frame: &Mat) -> Result<Self> {
        Ok(Flag { frame: numkernel::orthonormal_frame(frame)? })
    }

    pub fn standard(n: usize) -> Self {
        Flag { frame: Mat::identity(n, n) }
    }

    /// `span(e_n) < span(e_n, e_{n-1}) < ...`.
    pub fn reversed_standard(n: usize) -> Self {
        Flag { frame: Mat::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 }) }
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// Orthonormal frame; carries the standard flag to `self`.
    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    /// Image under `g`.
    pub fn apply(&self, g: &Mat) -> Result<Flag> {
        Flag::from_frame(&(g * &self.frame))
    }

    /// Largest sine of a principal angle between corresponding subspaces.
    pub fn distance(&self, other: &Flag) -> f64 {
        let n = self.dim();
        let c = self.frame.transpose() * &other.frame;
        (1..n)
            .map(|p| {
                let block = c.view((p, 0), (n - p, p));
                numkernel::singular_values(&block.clone_owned())
                    .map(|s| s[0])
                    .unwrap_or_else(|_| block.norm())
            })
            .fold(0.0_f64, f64::max)
    }

    /// True when `x` lies in the `p`-dimensional subspace, up to `tol`
    /// relative to `|x|`.
    pub fn contains_vector(&self, p: usize, x: &nalgebra::DVector<f64>, tolerance: f64) -> bool {
        let q = self.frame.columns(0, p);
        let residual = x - q * (q.transpose() * x);
        residual.norm() <= tolerance * x.norm().max(f64::MIN_POSITIVE)
    }
}

/// Attracting and repelling flags of a loxodromic element.
pub fn flags_of(lox: &LoxodromicData) -> Result<(Flag, Flag)> {
    let n = lox.dim();
    let reversed = Mat::from_fn(n, n, |i, j| lox.frame[(i, n - 1 - j)]);
    Ok((Flag::from_frame(&lox.frame)?, Flag::from_frame(&reversed)?))
}

/// `|det [F^p | G^(n-p)]|` for `p = 1..n-1`, with orthonormal bases; each
/// value lies in `[0, 1]`.
pub fn transversality_minors(f: &Flag, g: &Flag) -> Vec<f64> {
    let n = f.dim();
    (1..n)
        .map(|p| {
            let mut m = Mat::zeros(n, n);
            m.columns_mut(0, p).copy_from(&f.frame.columns(0, p));
            m.columns_mut(p, n - p).copy_from(&g.frame.columns(0, n - p));
            m.determinant().abs()
        })
        .collect()
}

/// Smallest transversality minor; `1` when `n = 1`.
pub fn transversality(f: &Flag, g: &Flag) -> f64 {
    transversality_minors(f, g).into_iter().fold(1.0, f64::min)
}

pub fn is_transverse(f: &Flag, g: &Flag) -> bool {
    transversality(f, g) > tol::TRANSVERSE
}

fn check_transverse(f: &Flag, g: &Flag) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    for (i, m) in transversality_minors(f, g).into_iter().enumerate() {
        if !(m > tol::TRANSVERSE) {
            return Err(Error::NotTransverse { index: i + 1, minor: m });
        }
    }
    Ok(())
}

/// Frame `h` with column `p` spanning `F^p ∩ G^(n-p+1)`, `det h = 1`.
/// It carries the standard pair to `(F, G)`.
pub fn transverse_frame(f: &Flag, g: &Flag) -> Result<Mat> {
    check_transverse(f, g)?;
    let n = f.dim();
    let qf = &f.frame;
    let qg = &g.frame;
    let mut h = Mat::zeros(n, n);
    for p in 1..=n {
        // x = Q_F[:, :p] c orthogonal to the last p-1 columns of Q_G
        let mut c = nalgebra::DVector::zeros(p);
        c[p - 1] = 1.0;
        if p > 1 {
            let b = qg.columns(n - p + 1, p - 1).transpose() * qf.columns(0, p);
            let lhs = b.columns(0, p - 1).clone_owned();
            let rhs = -b.column(p - 1).clone_owned();
            let sol = numkernel::solve(&lhs, &Mat::from_column_slice(p - 1, 1, rhs.as_slice()))?;
            for i in 0..p - 1 {
                c[i] = sol[(i, 0)];
            }
        }
        h.set_column(p - 1, &(qf.columns(0, p) * c));
    }
    numkernel::canonicalize_frame(&h)
}

/// A transverse pair with its frame and inverse, for repeated use of the
/// neutral and co-neutral maps.
#[derive(Debug, Clone)]
pub struct TransversePair {
    h: Mat,
    h_inv: Mat,
}

impl TransversePair {
    pub fn new(f: &Flag, g: &Flag) -> Result<Self> {
        let h = transverse_frame(f, g)?;
        let h_inv = numkernel::inverse(&h)?;
        Ok(TransversePair { h, h_inv })
    }

    /// From a frame already adapted to the pair (e.g. an eigenframe).
    pub fn from_frame(h: Mat) -> Result<Self> {
        let h_inv = numkernel::inverse(&h)?;
        Ok(TransversePair { h, h_inv })
    }

    pub fn frame(&self) -> &Mat {
        &self.h
    }

    /// Diagonal of `Ad(h^-1) Z`.
    pub fn co_neutral(&self, z: &Mat) -> CartanVector {
        CartanVector(numkernel::diagonal(&(&self.h_inv * z * &self.h)))
    }

    /// `Ad(h) diag(Y0)`.
    pub fn neutral(&self, y0: &CartanVector) -> Mat {
        &self.h * y0.as_diagonal() * &self.h_inv
    }

    /// `neutral o co_neutral`, the projection onto the zero-weight space of
    /// the pair.
    pub fn project(&self, z: &Mat) -> Mat {
        self.neutral(&self.co_neutral(z))
    }
}

pub fn co_neutral(fi: &Flag, fj: &Flag, z: &Mat) -> Result<CartanVector> {
    Ok(TransversePair::new(fi, fj)?.co_neutral(z))
}

pub fn neutral(fi: &Flag, fj: &Flag, y0: &CartanVector) -> Result<Mat> {
    Ok(TransversePair::new(fi, fj)?.neutral(y0))
}

/// Strictly lower triangular part of `Ad(Q^-1) X` for the orthonormal frame
/// `Q` of `f`; zero exactly when `X` lies in the Borel subalgebra of `f`.
pub fn borel_residual(f: &Flag, x: &Mat) -> f64 {
    let z = f.frame.transpose() * x * &f.frame;
    let n = z.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in j + 1..n {
            s += z[(i, j)] * z[(i, j)];
        }
    }
    s.sqrt()
}

/// Norm of the non-strictly-upper part of `Ad(Q^-1) X`; zero exactly when
/// `X` lies in the nilradical of the Borel subalgebra of `f`.
pub fn nilradical_residual(f: &Flag, x: &Mat) -> f64 {
    let z = f.frame.transpose() * x * &f.frame;
    let n = z.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in j..n {
            s += z[(i, j)] * z[(i, j)];
        }
    }
    s.sqrt()
}

//! The irreducible representation `SL(2) -> SL(n)` and its differential,
//! Schottky pairs in `SL(2)`, and the direction vectors `X_k`.

use num_rational::Ratio;

use crate::cartan::CartanVector;
use crate::error::{Error, Result};
use crate::freegroup::AffineRepresentation;
use crate::numkernel::{self, tol, Mat};

fn binomial_f64(m: usize, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, t| acc * (m - t) as f64 / (t + 1) as f64)
}

fn check_two_by_two(a: &Mat) -> Result<()> {
    if a.nrows() != 2 || a.ncols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: a.nrows().max(a.ncols()) });
    }
    Ok(())
}

/// Coefficients of `(p0 e1 + p1 e2)^r (q0 e1 + q1 e2)^s` on the monomials
/// `e1^(r+s-j) e2^j`.
fn product_of_powers(p: (f64, f64), r: usize, q: (f64, f64), s: usize) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    let mut mul = |lin: (f64, f64)| {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j] += c * lin.0;
            next[j + 1] += c * lin.1;
        }
        coeffs = next;
    };
    for _ in 0..r {
        mul(p);
    }
    for _ in 0..s {
        mul(q);
    }
    coeffs
}

/// Action of `A` on homogeneous polynomials of degree `n - 1` in the basis
/// `sqrt(C(n-1, i)) e1^(n-1-i) e2^i`, in which `SO(2)` acts orthogonally.
pub fn sym_rep(n: usize, a: &Mat) -> Result<Mat> {
    check_two_by_two(a)?;
    if !numkernel::is_unimodular(a, tol::DET / 2.0) {
        return Err(Error::NotUnimodular { det: a.determinant() });
    }
    if n == 0 {
        return Err(Error::OutOfRange("dimension must be positive".into()));
    }
    let m = n - 1;
    let scale: Vec<f64> = (0..n).map(|i| binomial_f64(m, i).sqrt()).collect();
    let e1 = (a[(0, 0)], a[(1, 0)]);
    let e2 = (a[(0, 1)], a[(1, 1)]);
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        let coeffs = product_of_powers(e1, m - i, e2, i);
        for (j, c) in coeffs.iter().enumerate() {
            out[(j, i)] = c * scale[i] / scale[j];
        }
    }
    Ok(out)
}

/// Differential of [`sym_rep`] at the identity.
pub fn sym_rep_lie(n: usize, x: &Mat) -> Result<Mat> {
    check_two_by_two(x)?;
    if !numkernel::is_traceless(x, tol::TRACE) {
        return Err(Error::OutOfRange(format!("trace {} is not zero", x.trace())));
    }
    if n == 0 {
        return Err(Error::OutOfRange("dimension must be positive".into()));
    }
    let m = n - 1;
    let scale: Vec<f64> = (0..n).map(|i| binomial_f64(m, i).sqrt()).collect();
    let mut raw = Mat::zeros(n, n);
    for i in 0..n {
        let (r, s) = ((m - i) as f64, i as f64);
        raw[(i, i)] += r * x[(0, 0)] + s * x[(1, 1)];
        if i + 1 < n {
            raw[(i + 1, i)] += r * x[(1, 0)];
        }
        if i > 0 {
            raw[(i - 1, i)] += s * x[(0, 1)];
        }
    }
    Ok(Mat::from_fn(n, n, |j, i| raw[(j, i)] * scale[i] / scale[j]))
}

/// Rotation by `phi` in `SO(2)`.
pub fn rotation(phi: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[phi.cos(), -phi.sin(), phi.sin(), phi.cos()])
}

/// `(diag(l, 1/l), R diag(l, 1/l) R^-1)` where `R` turns the axis of the first
/// generator in the hyperbolic plane by the angle `theta`, so the two axes
/// meet at angle `theta`. On `H^2` a rotation matrix by `phi` turns geodesics
/// through `i` by `2 phi`, hence `R = rotation(theta / 2)`.
pub fn schottky_generators(lambda: f64, theta: f64) -> Result<(Mat, Mat)> {
    if !(lambda.is_finite() && lambda > 1.0 + 1e-3) {
        return Err(Error::DegenerateParameters(format!("stretch factor {lambda} must exceed 1.001")));
    }
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::DegenerateParameters(format!("axis angle {theta} must lie in (0, pi/2]")));
    }
    let a = numkernel::diag_matrix(&[lambda, 1.0 / lambda]);
    let r = rotation(theta / 2.0);
    let b = &r * &a * r.transpose();
    Ok((a, b))
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Exact value of the closed form
/// `X_{k,p} = (p-1)!(n-p)! / (2^(k-2) (n-k)!) * sum_j C(n-k, p-j) C(k-1, j-1)^2 (-1)^(j+k+1)`,
/// `j` from `max(1, k+p-n)` to `min(k, p)`.
pub fn lw_direction_exact(n: usize, k: usize) -> Result<Vec<Ratio<i128>>> {
    if !(2..=n).contains(&k) || n > 20 {
        return Err(Error::OutOfRange(format!("need 2 <= k <= n <= 20, got n = {n}, k = {k}")));
    }
    let mut out = Vec::with_capacity(n);
    for p in 1..=n {
        let lo = 1.max((k + p).saturating_sub(n));
        let hi = k.min(p);
        let mut sum: i128 = 0;
        for j in lo..=hi {
            let c = binomial(n - k, p - j) * binomial(k - 1, j - 1).pow(2);
            sum += if (j + k + 1).is_multiple_of(2) { c } else { -c };
        }
        let num = factorial(p - 1) * factorial(n - p) * sum;
        let den = (1i128 << (k - 2)) * factorial(n - k);
        out.push(Ratio::new(num, den));
    }
    Ok(out)
}

pub fn lw_direction(n: usize, k: usize) -> Result<CartanVector> {
    Ok(CartanVector(
        lw_direction_exact(n, k)?
            .into_iter()
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
            .collect(),
    ))
}

/// Lifts a representation into `SL(2) x| sl(2)` through `sym_rep` and
/// `sym_rep_lie`.
pub fn fuchsian_lift(n: usize, rep: &AffineRepresentation) -> Result<AffineRepresentation> {
    if rep.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rep.dim() });
    }
    let rho = rep.rho().iter().map(|a| sym_rep(n, a)).collect::<Result<Vec<_>>>()?;
    let u = rep.u().iter().map(|x| sym_rep_lie(n, x)).collect::<Result<Vec<_>>>()?;
    AffineRepresentation::new(rho, u)
}

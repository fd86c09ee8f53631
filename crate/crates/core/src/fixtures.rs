//! Seeded random generators used by the tests, the acceptance suite and the
//! experiment drivers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::affine::AffineParabolic;
use crate::cartan::Flag;
use crate::freegroup::{AffineRepresentation, GroupWord, Letter};
use crate::hitchin;
use crate::numkernel::{self, Mat};

pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Gaussian matrix rescaled to determinant one. Draws with
/// `|det|^(1/n) < 0.2` are rejected so that conditioning stays moderate.
pub fn random_unimodular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    loop {
        let mut m = gaussian_matrix(n, rng);
        let mut det = m.determinant();
        if det.abs().powf(1.0 / n as f64) < 0.2 {
            continue;
        }
        if det < 0.0 {
            m.row_mut(0).neg_mut();
            det = -det;
        }
        return m / det.powf(1.0 / n as f64);
    }
}

/// Random traceless matrix with Gaussian entries.
pub fn random_traceless<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    numkernel::traceless_part(&gaussian_matrix(n, rng))
}

/// Random real spectrum with decreasing moduli, consecutive ratios at least
/// `1 + min_gap`, product one and random signs.
pub fn random_spectrum<R: Rng + ?Sized>(n: usize, min_gap: f64, rng: &mut R) -> Vec<f64> {
    let mut logs = vec![0.0; n];
    for i in 1..n {
        logs[i] = logs[i - 1] - (1.0 + min_gap).ln() - rng.random_range(0.0..0.8);
    }
    let mean = logs.iter().sum::<f64>() / n as f64;
    let mut lambda: Vec<f64> = logs
        .iter()
        .map(|l| if rng.random_bool(0.5) { (l - mean).exp() } else { -(l - mean).exp() })
        .collect();
    if lambda.iter().filter(|l| **l < 0.0).count() % 2 == 1 {
        lambda[n - 1] = -lambda[n - 1];
    }
    lambda
}

/// Random unimodular matrix with condition number at most `max_condition`.
pub fn random_frame<R: Rng + ?Sized>(n: usize, max_condition: f64, rng: &mut R) -> Mat {
    loop {
        let h = random_unimodular(n, rng);
        if numkernel::condition_number(&h) <= max_condition {
            return h;
        }
    }
}

/// `h diag(lambda) h^-1` with `lambda` from [`random_spectrum`] and `h` a
/// random eigenframe with condition number at most `1e3`.
pub fn random_loxodromic<R: Rng + ?Sized>(n: usize, min_gap: f64, rng: &mut R) -> Mat {
    let h = random_frame(n, 1e3, rng);
    let lambda = random_spectrum(n, min_gap, rng);
    &h * numkernel::diag_matrix(&lambda) * numkernel::group_inverse(&h).expect("unimodular")
}

/// Random freely reduced word of the given length in `k` generators.
pub fn random_word<R: Rng + ?Sized>(k: usize, len: usize, rng: &mut R) -> GroupWord {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::from_rank(rng.random_range(0..2 * k));
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    crate::freegroup::reduce(letters)
}

/// Representation with loxodromic generators and Gaussian translation parts
/// of size `scale`.
pub fn random_representation<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    scale: f64,
    rng: &mut R,
) -> AffineRepresentation {
    let rho = (0..k).map(|_| random_loxodromic(n, 0.2, rng)).collect();
    let u = (0..k).map(|_| random_traceless(n, rng) * scale).collect();
    AffineRepresentation::new(rho, u).expect("valid random representation")
}

/// Flag spanned by a random frame with condition number at most `100`.
pub fn random_flag<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Flag {
    Flag::from_frame(&random_frame(n, 100.0, rng)).expect("invertible frame")
}

/// Random flag with a Gaussian traceless base point.
pub fn random_affine_parabolic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> AffineParabolic {
    AffineParabolic::new(random_flag(n, rng), random_traceless(n, rng))
}

/// Schottky pair with stretch `lambda` and axis angle `theta`, lifted to
/// dimension `n`, with zero translation parts.
pub fn schottky_lift(n: usize, lambda: f64, theta: f64) -> AffineRepresentation {
    let (a, b) = hitchin::schottky_generators(lambda, theta).expect("valid Schottky parameters");
    let rho = vec![hitchin::sym_rep(n, &a).unwrap(), hitchin::sym_rep(n, &b).unwrap()];
    AffineRepresentation::linear(rho).expect("unimodular lift")
}

/// Same linear part as `rep`, with the coboundary `u(a_i) = v - Ad(rho(a_i)) v`.
pub fn coboundary(rep: &AffineRepresentation, v: &Mat) -> AffineRepresentation {
    let u = rep
        .rho()
        .iter()
        .map(|g| v - numkernel::adjoint(g, v).expect("invertible generator"))
        .collect();
    rep.with_translations(u).expect("traceless coboundary")
}

/// Tangent cocycle of the Schottky family `lambda -> lambda e^t` in `SL(2)`:
/// `u(a_i) = Ad(rho(a_i)) X_i` where `X_i` is the axis direction of `a_i`.
pub fn schottky_stretch_cocycle(lambda: f64, theta: f64) -> AffineRepresentation {
    let (a, b) = hitchin::schottky_generators(lambda, theta).expect("valid Schottky parameters");
    let h = numkernel::diag_matrix(&[1.0, -1.0]);
    let r = hitchin::rotation(theta / 2.0);
    let xb = &r * &h * r.transpose();
    let u = vec![numkernel::adjoint(&a, &h).unwrap(), numkernel::adjoint(&b, &xb).unwrap()];
    AffineRepresentation::new(vec![a, b], u).expect("valid cocycle")
}

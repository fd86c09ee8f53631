//! Margulis invariants, invariant affine subspaces, affine parabolic spaces
//! and the affine cross and triple ratios.

use crate::cartan::{self, CartanVector, Flag, TransversePair};
use crate::cyclic;
use crate::error::{Error, Result};
use crate::freegroup::{self, AffinePair, AffineRepresentation, GroupWord};
use crate::numkernel::{self, Mat};

/// An affine parabolic space `base + b_flag`, where `b_flag` is the Borel
/// subalgebra stabilizing `flag`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParabolic {
    pub flag: Flag,
    pub base: Mat,
}

impl AffineParabolic {
    pub fn new(flag: Flag, base: Mat) -> Self {
        AffineParabolic { flag, base }
    }

    pub fn linear(flag: Flag) -> Self {
        let n = flag.dim();
        AffineParabolic { flag, base: Mat::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.flag.dim()
    }

    /// Distance of `x` from the space, measured as the strictly lower part of
    /// `Ad(Q^-1)(x - base)` in the orthonormal frame of the flag.
    pub fn residual(&self, x: &Mat) -> f64 {
        cartan::borel_residual(&self.flag, &(x - &self.base))
    }

    pub fn contains(&self, x: &Mat, tolerance: f64) -> bool {
        self.residual(x) <= tolerance * (1.0 + x.norm() + self.base.norm())
    }

    /// Same space, base point moved by an element of the Borel subalgebra.
    pub fn rebased(&self, shift_in_frame: &Mat) -> AffineParabolic {
        let q = self.flag.frame();
        let mut upper = shift_in_frame.clone();
        let n = upper.nrows();
        for j in 0..n {
            for i in j + 1..n {
                upper[(i, j)] = 0.0;
            }
        }
        AffineParabolic { flag: self.flag.clone(), base: &self.base + q * upper * q.transpose() }
    }
}

/// Image under `X -> Ad(g) X + Y`.
pub fn apply_affine(pair: &AffinePair, a: &AffineParabolic) -> Result<AffineParabolic> {
    Ok(AffineParabolic { flag: a.flag.apply(&pair.g)?, base: pair.apply(&a.base)? })
}

/// Diagonal of `Ad(h^-1) Y` for the canonical eigenframe `h` of `g`.
pub fn margulis_invariant(g: &Mat, y: &Mat) -> Result<CartanVector> {
    let lox = numkernel::eigen_loxodromic(g)?;
    Ok(TransversePair::from_frame(lox.frame)?.co_neutral(y))
}

/// Words up to this length are classified from their explicit product.
const EXPLICIT_MAX_LEN: usize = 12;
/// Sweeps above which a short word is handed to the direct route.
const SWEEP_BUDGET: usize = 2000;

/// Jordan projection, Margulis invariant and eigenvalue signs of a word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordInvariants {
    pub jordan: CartanVector,
    pub margulis: CartanVector,
    pub signs: Vec<i8>,
}

/// Invariants of `w` from the evaluated pair: eigen-decomposition of the
/// explicit product. Loses accuracy once `rho(w)` is badly conditioned.
pub fn word_invariants_direct(rep: &AffineRepresentation, w: &GroupWord) -> Result<WordInvariants> {
    let pair = freegroup::eval_affine(rep, w)?;
    let lox = numkernel::eigen_loxodromic(&pair.g)?;
    let signs = lox.eigenvalues.iter().map(|l| if *l < 0.0 { -1 } else { 1 }).collect();
    let jordan = cartan::jordan_of(&lox);
    let margulis = TransversePair::from_frame(lox.frame)?.co_neutral(&pair.y);
    Ok(WordInvariants { jordan, margulis, signs })
}

/// Invariants of `w` computed letter by letter.
///
/// With `r_k` the rotation of `w` starting at letter `k`,
/// `M(w) = sum_k nu*(F+(r_k), F-(r_k)) u(s_k)`; the flags come from periodic
/// QR iterations, so no quantity grows with the word length and coboundary
/// contributions telescope.
pub fn word_invariants(rep: &AffineRepresentation, w: &GroupWord) -> Result<WordInvariants> {
    let w = freegroup::cyclic_reduce(w);
    if w.is_empty() {
        return Err(numkernel::eigen_loxodromic(&Mat::identity(rep.dim(), rep.dim()))
            .err()
            .unwrap_or(Error::OutOfRange("trivial word".into())));
    }
    if let Some(l) = w.letters().iter().find(|l| l.gen() >= rep.generators()) {
        return Err(Error::UnknownLetter(l.to_char()));
    }
    let letters = w.letters();
    let len = letters.len();
    let mut sweeps = cyclic::default_sweeps(len);
    if len <= EXPLICIT_MAX_LEN {
        // short words: classify from the explicit product and size the
        // iteration by its modulus gap
        let lox = numkernel::eigen_loxodromic(&rep.eval_linear(&w)?)?;
        let needed = 40.0 / lox.gap.ln_1p() + 10.0;
        if needed > SWEEP_BUDGET as f64 {
            return word_invariants_direct(rep, &w);
        }
        sweeps = sweeps.min(needed as usize * 2);
    }

    let attracting: Vec<&Mat> = letters.iter().rev().map(|&l| rep.letter_linear(l)).collect();
    let repelling: Vec<&Mat> = letters.iter().map(|&l| rep.letter_linear(l.inverse())).collect();
    let (plus, minus) = match (
        cyclic::periodic_qr(&attracting, sweeps),
        cyclic::periodic_qr(&repelling, sweeps),
    ) {
        (Ok(p), Ok(m)) => (p, m),
        _ => return word_invariants_direct(rep, &w),
    };

    let jordan = CartanVector(plus.log_moduli.clone());
    for pair in jordan.coords().windows(2) {
        let gap = (pair[0] - pair[1]).exp_m1();
        if !(gap > numkernel::tol::MODULUS_GAP) {
            return Err(Error::ModulusCollision { larger: pair[0].exp(), smaller: pair[1].exp(), gap });
        }
    }

    let n = rep.dim();
    let mut margulis = CartanVector::zeros(n);
    for (k, &letter) in letters.iter().enumerate() {
        // attracting frames are stored after applying s_{L-1}, ..., s_0
        let fp = Flag::from_frame(&plus.frames[len - 1 - k])?;
        // repelling frame after applying s_j^-1 belongs to r_{j+1}
        let fm = Flag::from_frame(&minus.frames[(k + len - 1) % len])?;
        let term = TransversePair::new(&fp, &fm)?.co_neutral(rep.letter_translation(letter));
        margulis = &margulis + &term;
    }
    Ok(WordInvariants { jordan, margulis, signs: plus.signs })
}

/// Margulis invariant of `(rho(w), u(w))`.
pub fn margulis_of_word(rep: &AffineRepresentation, w: &GroupWord) -> Result<CartanVector> {
    Ok(word_invariants(rep, w)?.margulis)
}

/// Point `X` with no zero-weight component in the eigenframe of `g` such that
/// `Ad(g) X + Y - X` is zero-weight.
pub fn invariant_affine_point(g: &Mat, y: &Mat) -> Result<Mat> {
    let lox = numkernel::eigen_loxodromic(g)?;
    let h = &lox.frame;
    let h_inv = numkernel::inverse(h)?;
    let z = &h_inv * y * h;
    let n = g.nrows();
    let lam = &lox.eigenvalues;
    let x = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { z[(i, j)] / (1.0 - lam[i] / lam[j]) });
    Ok(h * x * h_inv)
}

/// The affine parabolic spaces `(F+(g), X)` and `(F-(g), X)` preserved by
/// `(g, Y)`, with `X` the invariant affine point.
pub fn affine_fixed_parabolics(g: &Mat, y: &Mat) -> Result<(AffineParabolic, AffineParabolic)> {
    let lox = numkernel::eigen_loxodromic(g)?;
    let (fp, fm) = cartan::flags_of(&lox)?;
    let x = invariant_affine_point(g, y)?;
    Ok((AffineParabolic::new(fp, x.clone()), AffineParabolic::new(fm, x)))
}

/// `(h, X)` conjugating `(g, Y)` to `(diag(signs) exp(Jd), diag(M))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub conjugator: AffinePair,
    pub signs: Vec<i8>,
    pub jordan: CartanVector,
    pub margulis: CartanVector,
}

impl NormalForm {
    /// `(diag(signs) exp(Jd), diag(M))`.
    pub fn normal_pair(&self) -> AffinePair {
        let lam: Vec<f64> =
            self.jordan.coords().iter().zip(&self.signs).map(|(j, s)| *s as f64 * j.exp()).collect();
        AffinePair::new(numkernel::diag_matrix(&lam), self.margulis.as_diagonal())
    }
}

pub fn affine_normal_form(g: &Mat, y: &Mat) -> Result<NormalForm> {
    let lox = numkernel::eigen_loxodromic(g)?;
    let x = invariant_affine_point(g, y)?;
    let signs = lox.eigenvalues.iter().map(|l| if *l < 0.0 { -1 } else { 1 }).collect();
    let jordan = cartan::jordan_of(&lox);
    let margulis = TransversePair::from_frame(lox.frame.clone())?.co_neutral(y);
    Ok(NormalForm { conjugator: AffinePair::new(lox.frame, x), signs, jordan, margulis })
}

fn nu(a: &AffineParabolic, b: &AffineParabolic) -> Result<TransversePair> {
    TransversePair::new(&a.flag, &b.flag)
}

/// Affine cross ratio of four pairwise transverse affine parabolic spaces,
/// from arbitrary base points:
/// `[nu14 - nu13] X1 + [nu23 - nu24] X2 - [nu23 - nu13] X3 - [nu14 - nu24] X4`.
pub fn cross_ratio(
    a1: &AffineParabolic,
    a2: &AffineParabolic,
    a3: &AffineParabolic,
    a4: &AffineParabolic,
) -> Result<CartanVector> {
    let n13 = nu(a1, a3)?;
    let n14 = nu(a1, a4)?;
    let n23 = nu(a2, a3)?;
    let n24 = nu(a2, a4)?;
    // the pairs (1,2) and (3,4) enter only through transversality
    for (x, y) in [(a1, a2), (a3, a4)] {
        nu(x, y)?;
    }
    // regrouped by pairs so only base point differences enter
    let t14 = n14.co_neutral(&(&a1.base - &a4.base));
    let t13 = n13.co_neutral(&(&a3.base - &a1.base));
    let t23 = n23.co_neutral(&(&a2.base - &a3.base));
    let t24 = n24.co_neutral(&(&a4.base - &a2.base));
    Ok(&(&t14 + &t13) + &(&t23 + &t24))
}

/// Affine triple ratio
/// `[nu23 + nu32](X2 - X3) + [nu34 + nu43](X3 - X4) + [nu42 + nu24](X4 - X2)`.
pub fn triple_ratio(a2: &AffineParabolic, a3: &AffineParabolic, a4: &AffineParabolic) -> Result<CartanVector> {
    let term = |a: &AffineParabolic, b: &AffineParabolic| -> Result<CartanVector> {
        let d = &a.base - &b.base;
        Ok(&nu(a, b)?.co_neutral(&d) + &nu(b, a)?.co_neutral(&d))
    };
    Ok(&(&term(a2, a3)? + &term(a3, a4)?) + &term(a4, a2)?)
}

/// A point of `A_i ∩ A_j` for transverse flags.
pub fn intersection_point(ai: &AffineParabolic, aj: &AffineParabolic) -> Result<Mat> {
    let pair = nu(ai, aj)?;
    let h = pair.frame();
    let h_inv = numkernel::inverse(h)?;
    // in the adapted frame A_i is upper triangular and A_j lower triangular
    // around their base points; split the difference accordingly
    let z = &h_inv * (&aj.base - &ai.base) * h;
    let n = z.nrows();
    let lower = Mat::from_fn(n, n, |r, c| if r > c { z[(r, c)] } else { 0.0 });
    Ok(&aj.base - h * lower * &h_inv)
}

/// Cross ratio through pairwise intersections: `[nu14 - nu23](X13 - X24)`
/// with `X_ij ∈ A_i ∩ A_j`. Used as a cross-check on well-conditioned
/// configurations.
pub fn cross_ratio_by_intersections(
    a1: &AffineParabolic,
    a2: &AffineParabolic,
    a3: &AffineParabolic,
    a4: &AffineParabolic,
) -> Result<CartanVector> {
    let d = intersection_point(a1, a3)? - intersection_point(a2, a4)?;
    Ok(&nu(a1, a4)?.co_neutral(&d) - &nu(a2, a3)?.co_neutral(&d))
}

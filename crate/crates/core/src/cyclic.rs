//! Flags and Jordan projections of cyclic words without forming the product.
//!
//! For a word `s_0 s_1 ... s_{L-1}` the rotations `r_k = s_k ... s_{L-1}
//! s_0 ... s_{k-1}` are conjugate, and their attracting flags satisfy
//! `F+(r_k) = rho(s_k) F+(r_{k+1})`. A periodic QR iteration over the letters
//! therefore converges to all of them at once, with every intermediate
//! quantity of size `O(1)` regardless of word length.

use crate::error::{Error, Result};
use crate::numkernel::Mat;

/// Result of a converged periodic QR iteration.
#[derive(Debug, Clone)]
pub struct PeriodicQr {
    /// Orthonormal frame after applying each factor, in application order.
    pub frames: Vec<Mat>,
    /// Sum over one period of `log R_ii`; the log-moduli of the eigenvalues
    /// of the product, in decreasing order when converged.
    pub log_moduli: Vec<f64>,
    /// Signs of the eigenvalues of the full product.
    pub signs: Vec<i8>,
    pub sweeps: usize,
}

const TARGET: f64 = 1e-14;
const STAGNATION: f64 = 1e-12;

fn start_frame(n: usize) -> Mat {
    // any fixed frame with no special position relative to coordinate flags
    let m = Mat::from_fn(n, n, |i, j| {
        let x = (i as f64 + 1.0) * 0.618_033_988_75 + (j as f64 + 1.0) * 0.414_213_562_37;
        (7.0 * x).sin() + if i == j { 0.5 } else { 0.0 }
    });
    crate::numkernel::orthonormal_frame(&m).expect("start frame is invertible")
}

fn qr_step(factor: &Mat, q: &Mat) -> (Mat, Vec<f64>) {
    let qr = (factor * q).qr();
    let r = qr.r();
    let mut q = qr.q();
    let n = r.nrows();
    let mut logs = Vec::with_capacity(n);
    for j in 0..n {
        let d = r[(j, j)];
        if d < 0.0 {
            q.column_mut(j).neg_mut();
        }
        logs.push(d.abs().ln());
    }
    (q, logs)
}

fn strictly_lower_max(a: &Mat, b: &Mat) -> f64 {
    let c = a.transpose() * b;
    let n = c.nrows();
    let mut m = 0.0_f64;
    for j in 0..n {
        for i in j + 1..n {
            m = m.max(c[(i, j)].abs());
        }
    }
    m
}

/// Runs `Q <- qr(f Q)` cyclically over `factors` (applied in slice order)
/// until the frame at the end of a period stops moving.
pub fn periodic_qr(factors: &[&Mat], max_sweeps: usize) -> Result<PeriodicQr> {
    let n = factors
        .first()
        .map(|f| f.nrows())
        .ok_or_else(|| Error::OutOfRange("empty word".into()))?;
    let mut q = start_frame(n);
    let mut prev = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for sweep in 1..=max_sweeps {
        let start = q.clone();
        let mut frames = Vec::with_capacity(factors.len());
        let mut log_moduli = vec![0.0; n];
        for f in factors {
            let (next, logs) = qr_step(f, &q);
            if next.iter().any(|x| !x.is_finite()) || logs.iter().any(|x| !x.is_finite()) {
                return Err(Error::Singular { condition: f64::INFINITY });
            }
            for (acc, l) in log_moduli.iter_mut().zip(logs) {
                *acc += l;
            }
            frames.push(next.clone());
            q = next;
        }
        let moved = strictly_lower_max(&start, &q);
        if moved < best {
            best = moved;
            since_best = 0;
        } else {
            since_best += 1;
        }
        // distance to the fixed point is about moved * rate / (1 - rate)
        let rate = moved / prev;
        let remaining = if rate < 1.0 { moved * rate / (1.0 - rate) } else { f64::INFINITY };
        prev = moved;
        let converged = moved == 0.0
            || (moved <= TARGET && remaining <= TARGET)
            || (since_best >= 8 && best <= STAGNATION);
        if converged && sweep >= 2 {
            let c = start.transpose() * &q;
            let signs = (0..n).map(|i| if c[(i, i)] < 0.0 { -1 } else { 1 }).collect();
            return Ok(PeriodicQr { frames, log_moduli, signs, sweeps: sweep });
        }
    }
    Err(Error::ModulusCollision { larger: f64::NAN, smaller: f64::NAN, gap: 0.0 })
}

/// Sweep budget: enough for a modulus gap around `1e-3` on short words,
/// capped by total work on long ones.
pub fn default_sweeps(word_len: usize) -> usize {
    (200_000 / word_len.max(1)).clamp(50, 20_000)
}

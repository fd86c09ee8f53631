//! Spectra of Margulis invariants over conjugacy classes, properness
//! diagnostics, and numerical experiments around the limit formula, the
//! derivative of the Jordan projection and convexity.

use std::fmt;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::affine::{self, AffineParabolic};
use crate::cartan::{self, CartanVector};
use crate::error::{Error, Result};
use crate::freegroup::{self, AffineRepresentation, GroupWord};
use crate::numkernel::{self, Mat};

/// Threshold on the margin for a `PROPER_CANDIDATE` verdict.
pub const TAU_PROPER: f64 = 1e-3;
/// Threshold on `|M| / length` for a `NONPROPER_SIGNATURE` verdict.
pub const TAU_ZERO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum SampleStatus {
    Ok,
    Skipped(String),
}

impl fmt::Display for SampleStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleStatus::Ok => write!(f, "ok"),
            SampleStatus::Skipped(reason) => write!(f, "skipped:{reason}"),
        }
    }
}

/// Invariants of one conjugacy class. The vectors are `None` for skipped
/// words.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub word: GroupWord,
    pub length: usize,
    pub jordan: Option<CartanVector>,
    pub margulis: Option<CartanVector>,
    pub normalized_margulis: Option<CartanVector>,
    pub status: SampleStatus,
}

impl SpectrumSample {
    pub fn is_ok(&self) -> bool {
        self.status == SampleStatus::Ok
    }

    fn evaluate(rep: &AffineRepresentation, word: GroupWord) -> Self {
        let length = word.cyclic_length();
        match affine::word_invariants(rep, &word) {
            Ok(inv) => SpectrumSample {
                normalized_margulis: Some(&inv.margulis * (1.0 / length as f64)),
                jordan: Some(inv.jordan),
                margulis: Some(inv.margulis),
                word,
                length,
                status: SampleStatus::Ok,
            },
            Err(e) => SpectrumSample {
                word,
                length,
                jordan: None,
                margulis: None,
                normalized_margulis: None,
                status: SampleStatus::Skipped(e.code().to_string()),
            },
        }
    }
}

/// One sample per conjugacy representative of cyclic length `1..=max_len`,
/// in enumeration order. Words are evaluated in parallel.
pub fn sample_spectrum(rep: &AffineRepresentation, max_len: usize) -> Vec<SpectrumSample> {
    let words: Vec<GroupWord> = freegroup::enumerate_conjugacy_reps(rep.generators(), max_len).collect();
    words.into_par_iter().map(|w| SpectrumSample::evaluate(rep, w)).collect()
}

/// Serial version of [`sample_spectrum`].
pub fn sample_spectrum_serial(rep: &AffineRepresentation, max_len: usize) -> Vec<SpectrumSample> {
    freegroup::enumerate_conjugacy_reps(rep.generators(), max_len)
        .map(|w| SpectrumSample::evaluate(rep, w))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ProperCandidate,
    NonproperSignature,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::ProperCandidate => "PROPER_CANDIDATE",
            Verdict::NonproperSignature => "NONPROPER_SIGNATURE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        write!(f, "{s}")
    }
}

/// Aggregated properness evidence. Verdicts are sampling heuristics up to
/// `horizon`, not certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct PropernessReport {
    pub horizon: usize,
    /// Unit-norm zero-sum functional realizing the margin.
    pub functional: CartanVector,
    /// `min_w <functional, M(w)> / length(w)` over ok samples.
    pub margin: f64,
    /// Smallest `|M(w)| / length(w)` among ok samples of length at least
    /// `horizon / 2`.
    pub min_normalized_norm: f64,
    pub ok_count: usize,
    pub skipped_count: usize,
    pub verdict: Verdict,
}

/// Orthonormal basis of the zero-sum hyperplane in `R^n`.
fn helmert_basis(n: usize) -> Vec<CartanVector> {
    (1..n)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut v = vec![0.0; n];
            for x in v.iter_mut().take(k) {
                *x = 1.0 / norm;
            }
            v[k] = -(k as f64) / norm;
            CartanVector(v)
        })
        .collect()
}

/// Unit directions in the zero-sum hyperplane: exact for `n = 2`, evenly
/// spaced for `n = 3`, a Fibonacci sphere for `n = 4`, seeded Gaussian
/// directions beyond.
pub fn dual_grid(n: usize, resolution: usize) -> Vec<CartanVector> {
    let basis = helmert_basis(n);
    let combine = |coeffs: &[f64]| -> CartanVector {
        let mut v = CartanVector::zeros(n);
        for (c, b) in coeffs.iter().zip(&basis) {
            v = &v + &(b * *c);
        }
        let norm = v.norm();
        &v * (1.0 / norm)
    };
    match n {
        0 | 1 => Vec::new(),
        2 => vec![combine(&[1.0]), combine(&[-1.0])],
        3 => (0..resolution)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
                combine(&[t.cos(), t.sin()])
            })
            .collect(),
        4 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..resolution)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / resolution as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    combine(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            (0..resolution)
                .map(|_| {
                    let c: Vec<f64> = (0..n - 1).map(|_| StandardNormal.sample(&mut rng)).collect();
                    combine(&c)
                })
                .collect()
        }
    }
}

/// Default candidates: unit simple roots plus the grid direction maximizing
/// the smallest pairing with the sampled normalized invariants.
pub fn default_functionals(samples: &[SpectrumSample]) -> Vec<CartanVector> {
    let points: Vec<&CartanVector> = samples.iter().filter_map(|s| s.normalized_margulis.as_ref()).collect();
    let Some(n) = points.first().map(|p| p.dim()) else {
        return Vec::new();
    };
    let mut out: Vec<CartanVector> = (0..n.saturating_sub(1))
        .map(|i| &cartan::simple_root(n, i) * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    let grid = dual_grid(n, 1000);
    let best = grid
        .into_iter()
        .map(|phi| {
            let m = points.iter().map(|p| phi.dot(p)).fold(f64::INFINITY, f64::min);
            (m, phi)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((_, phi)) = best {
        out.push(phi);
    }
    out
}

/// Properness verdict from sampled invariants. Candidate functionals are
/// normalized to unit length; `None` selects [`default_functionals`].
pub fn properness_diagnostic(
    samples: &[SpectrumSample],
    candidates: Option<&[CartanVector]>,
) -> Result<PropernessReport> {
    let ok: Vec<&SpectrumSample> = samples.iter().filter(|s| s.is_ok()).collect();
    if ok.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let horizon = samples.iter().map(|s| s.length).max().unwrap_or(0);
    let defaults;
    let candidates = match candidates {
        Some(c) => c,
        None => {
            defaults = default_functionals(samples);
            &defaults[..]
        }
    };
    let n = ok[0].margulis.as_ref().map(|m| m.dim()).unwrap_or(0);
    let mut best = (f64::NEG_INFINITY, CartanVector::zeros(n));
    for phi in candidates {
        let norm = phi.norm();
        if norm == 0.0 {
            continue;
        }
        let phi = phi * (1.0 / norm);
        let m = ok
            .iter()
            .filter_map(|s| s.normalized_margulis.as_ref())
            .map(|p| phi.dot(p))
            .fold(f64::INFINITY, f64::min);
        if m > best.0 {
            best = (m, phi);
        }
    }
    let min_normalized_norm = ok
        .iter()
        .filter(|s| 2 * s.length >= horizon)
        .filter_map(|s| s.normalized_margulis.as_ref())
        .map(|p| p.norm())
        .fold(f64::INFINITY, f64::min);
    let verdict = if min_normalized_norm < TAU_ZERO {
        Verdict::NonproperSignature
    } else if best.0 > TAU_PROPER {
        Verdict::ProperCandidate
    } else {
        Verdict::Inconclusive
    };
    Ok(PropernessReport {
        horizon,
        functional: best.1,
        margin: best.0,
        min_normalized_norm,
        ok_count: ok.len(),
        skipped_count: samples.len() - ok.len(),
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow {
    pub n: usize,
    pub defect: CartanVector,
    pub target: CartanVector,
    pub gap: f64,
}

/// Fixed affine parabolic spaces of a word.
pub fn fixed_parabolics_of_word(
    rep: &AffineRepresentation,
    w: &GroupWord,
) -> Result<(AffineParabolic, AffineParabolic)> {
    let pair = freegroup::eval_affine(rep, w)?;
    affine::affine_fixed_parabolics(&pair.g, &pair.y)
}

/// `beta(gamma+, eta+, gamma-, eta-)` from the fixed affine parabolic spaces.
pub fn limit_target(rep: &AffineRepresentation, gamma: &GroupWord, eta: &GroupWord) -> Result<CartanVector> {
    let (gp, gm) = fixed_parabolics_of_word(rep, gamma)?;
    let (ep, em) = fixed_parabolics_of_word(rep, eta)?;
    affine::cross_ratio(&gp, &ep, &gm, &em)
}

/// `M(gamma^k eta^k) - M(gamma^k) - M(eta^k)` for `k = 1..=max_power`
/// against the cross ratio of the fixed spaces.
pub fn limit_formula_experiment(
    rep: &AffineRepresentation,
    gamma: &GroupWord,
    eta: &GroupWord,
    max_power: usize,
) -> Result<Vec<LimitRow>> {
    let target = limit_target(rep, gamma, eta)?;
    (1..=max_power)
        .map(|k| {
            let gk = gamma.pow(k as i64);
            let ek = eta.pow(k as i64);
            let both = affine::margulis_of_word(rep, &gk.concat(&ek))?;
            let defect = &(&both - &affine::margulis_of_word(rep, &gk)?) - &affine::margulis_of_word(rep, &ek)?;
            let gap = (&defect - &target).norm();
            Ok(LimitRow { n: k, defect, target: target.clone(), gap })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeResult {
    pub finite_difference: CartanVector,
    pub margulis: CartanVector,
    pub error: f64,
}

/// Central difference of `t -> Jd(g exp(tX))` against `M(g, X)`.
pub fn derivative_experiment(g: &Mat, x: &Mat, t: f64) -> Result<DerivativeResult> {
    if !(t > 0.0 && t <= 1e-2) {
        return Err(Error::OutOfRange(format!("step {t} must lie in (0, 1e-2]")));
    }
    let plus = cartan::jordan_projection(&(g * numkernel::matrix_exp(&(x * t))))?;
    let minus = cartan::jordan_projection(&(g * numkernel::matrix_exp(&(x * -t))))?;
    let finite_difference = &(&plus - &minus) * (0.5 / t);
    let margulis = affine::margulis_invariant(g, x)?;
    let error = (&finite_difference - &margulis).norm();
    Ok(DerivativeResult { finite_difference, margulis, error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityRow {
    pub n: usize,
    pub normalized: CartanVector,
    pub combination: CartanVector,
    pub gap: f64,
}

/// `M(gamma^(pk) eta^(qk)) / length` against the length-weighted combination
/// of the normalized invariants of `gamma` and `eta`.
pub fn convexity_probe(
    rep: &AffineRepresentation,
    gamma: &GroupWord,
    eta: &GroupWord,
    p: usize,
    q: usize,
    max_power: usize,
) -> Result<Vec<ConvexityRow>> {
    if p == 0 || q == 0 {
        return Err(Error::OutOfRange("weights must be positive".into()));
    }
    limit_target(rep, gamma, eta)?;
    let mg = affine::margulis_of_word(rep, gamma)?;
    let me = affine::margulis_of_word(rep, eta)?;
    let (lg, le) = (gamma.cyclic_length() as f64, eta.cyclic_length() as f64);
    let (pf, qf) = (p as f64, q as f64);
    let combination = &(&(&mg * pf) + &(&me * qf)) * (1.0 / (pf * lg + qf * le));
    (1..=max_power)
        .map(|k| {
            let w = gamma.pow((p * k) as i64).concat(&eta.pow((q * k) as i64));
            let normalized = &affine::margulis_of_word(rep, &w)? * (1.0 / w.cyclic_length() as f64);
            let gap = (&normalized - &combination).norm();
            Ok(ConvexityRow { n: k, normalized, combination: combination.clone(), gap })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnosovGap {
    /// `min_w (kappa_i - kappa_{i+1})(w) / length(w)` for each root.
    pub per_root: Vec<f64>,
    pub floor: f64,
    pub argmin: GroupWord,
}

/// Singular-value gap rates over all conjugacy representatives of length
/// `1..=max_len`.
pub fn anosov_gap_probe(rep: &AffineRepresentation, max_len: usize) -> Result<AnosovGap> {
    if max_len < 2 {
        return Err(Error::OutOfRange("horizon must be at least 2".into()));
    }
    let n = rep.dim();
    let words: Vec<GroupWord> = freegroup::enumerate_conjugacy_reps(rep.generators(), max_len).collect();
    let rates: Vec<Vec<f64>> = words
        .par_iter()
        .map(|w| {
            let factors: Vec<&Mat> = w.letters().iter().map(|&l| rep.letter_linear(l)).collect();
            let k = cartan::cartan_projection_of_product(&factors)?;
            let len = w.cyclic_length() as f64;
            Ok((0..n - 1).map(|i| (k[i] - k[i + 1]) / len).collect())
        })
        .collect::<Result<_>>()?;
    let mut per_root = vec![f64::INFINITY; n - 1];
    let mut floor = (f64::INFINITY, 0);
    for (idx, r) in rates.iter().enumerate() {
        for (i, x) in r.iter().enumerate() {
            per_root[i] = per_root[i].min(*x);
            if *x < floor.0 {
                floor = (*x, idx);
            }
        }
    }
    Ok(AnosovGap { per_root, floor: floor.0, argmin: words[floor.1].clone() })
}

/// Seventeen significant digits; non-finite values print as `nan`/`inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// CSV with header `word,length,jd_1..jd_n,m_1..m_n,status`; skipped rows
/// leave the numeric fields empty.
pub fn write_spectrum_csv<W: Write>(samples: &[SpectrumSample], n: usize, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::OutOfRange(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string(), "length".to_string()];
    header.extend((1..=n).map(|i| format!("jd_{i}")));
    header.extend((1..=n).map(|i| format!("m_{i}")));
    header.push("status".into());
    w.write_record(&header).map_err(io)?;
    for s in samples {
        let mut row = vec![s.word.to_string(), s.length.to_string()];
        for v in [&s.jordan, &s.margulis] {
            match v {
                Some(v) => row.extend(v.coords().iter().map(|x| fmt_num(*x))),
                None => row.extend(std::iter::repeat_n(String::new(), n)),
            }
        }
        row.push(s.status.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::OutOfRange(format!("csv output failed: {e}")))?;
    Ok(())
}

//! Command-line front end. Representation files are JSON, bulk spectra are
//! CSV, and errors go to standard error as `{"error": code, "message": ...}`.
//!
//! Exit codes: 1 for I/O failures (including truncated files), 2 for
//! schema or validation failures, 3 for numerical degeneracy.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::affine::{self, AffineParabolic};
use crate::cartan::{CartanVector, Flag};
use crate::error::Error;
use crate::freegroup::{self, AffineRepresentation, GroupWord, Letter};
use crate::numkernel::{self, tol, Mat};
use crate::{hitchin, spectra};

#[derive(Debug, Parser)]
#[command(name = "margulis", version, about = "Margulis invariants and affine cross ratios for free group representations")]
pub struct Cli {
    /// Tolerance for the unimodularity and trace checks at load time.
    #[arg(long, global = true, default_value_t = tol::DET)]
    pub tolerance: f64,
    /// Worker threads for spectrum sampling (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a representation file.
    Validate { path: PathBuf },
    /// Jordan projection, Margulis invariant and eigenvalue signs of a word.
    Invariant { path: PathBuf, word: String },
    /// Cross ratio of four affine parabolic spaces given by frames and base points.
    Crossratio { path: PathBuf },
    /// CSV of invariants over conjugacy classes up to a length.
    Spectrum {
        path: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_length: usize,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Properness report over conjugacy classes up to a length.
    Proper {
        path: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_length: usize,
    },
    /// Defect M(g^k h^k) - M(g^k) - M(h^k) against the cross ratio of the fixed spaces.
    Limit { path: PathBuf, gamma: String, eta: String, max_power: usize },
    /// Central difference of the Jordan projection of rho(word) exp(t u_i).
    Deriv { path: PathBuf, word: String, direction: usize, t: f64 },
    /// Exact direction vector X_k in dimension n.
    Lw { n: usize, k: usize },
    /// Lift a 2x2 representation file to dimension n.
    Fuchsian {
        n: usize,
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure of a command, rendered as JSON on standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit: u8,
    pub code: String,
    pub message: String,
}

impl CliError {
    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError { exit: 1, code: "io".into(), message: format!("{}: {e}", path.display()) }
    }

    fn invalid(code: &str, message: String) -> Self {
        CliError { exit: 2, code: code.into(), message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::UnknownLetter(_)
            | Error::OutOfRange(_)
            | Error::DimensionMismatch { .. }
            | Error::NotUnimodular { .. } => 2,
            _ => 3,
        };
        CliError { exit, code: e.code().into(), message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A number printed with 17 significant digits; `null` if not finite.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn nums(v: &CartanVector) -> Vec<Num> {
    v.coords().iter().map(|x| Num(*x)).collect()
}

fn rows(m: &Mat) -> Vec<Vec<Num>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Num(m[(i, j)])).collect()).collect()
}

/// Matrices are accepted nested (list of rows) or flat, row-major.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MatrixData {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixData {
    fn to_mat(&self, n: usize) -> Option<Mat> {
        match self {
            MatrixData::Flat(v) if v.len() == n * n => Some(Mat::from_row_slice(n, n, v)),
            MatrixData::Rows(r) if r.len() == n && r.iter().all(|row| row.len() == n) => {
                Some(Mat::from_fn(n, n, |i, j| r[i][j]))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct GeneratorData {
    pub rho: MatrixData,
    pub u: MatrixData,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepFile {
    pub n: usize,
    pub k: usize,
    pub generators: Vec<GeneratorData>,
    #[serde(default)]
    pub metadata: Option<Metadata>,
}

#[derive(Serialize)]
struct GeneratorOut {
    rho: Vec<Vec<Num>>,
    u: Vec<Vec<Num>>,
}

#[derive(Serialize)]
struct RepFileOut {
    n: usize,
    k: usize,
    generators: Vec<GeneratorOut>,
    metadata: Metadata,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        if e.is_eof() || e.is_io() {
            CliError::io(path, e)
        } else {
            CliError::invalid("schema", format!("{}: {e}", path.display()))
        }
    })
}

fn generator_name(i: usize) -> char {
    Letter::generator(i).to_char()
}

/// Reads and validates a representation file.
pub fn load_representation(path: &Path, tolerance: f64) -> CliResult<(RepFile, AffineRepresentation)> {
    let file: RepFile = read_json(path)?;
    let (n, k) = (file.n, file.k);
    if n == 0 || k == 0 || k > 26 {
        return Err(CliError::invalid("schema", format!("need n >= 1 and 1 <= k <= 26, got n = {n}, k = {k}")));
    }
    if file.generators.len() != k {
        return Err(CliError::invalid(
            "schema",
            format!("k = {k} but {} generators are listed", file.generators.len()),
        ));
    }
    let mut rho = Vec::with_capacity(k);
    let mut u = Vec::with_capacity(k);
    for (i, g) in file.generators.iter().enumerate() {
        let name = generator_name(i);
        let r = g.rho.to_mat(n).ok_or_else(|| {
            CliError::invalid("schema", format!("generator {name}: rho is not a {n}x{n} matrix"))
        })?;
        let y = g
            .u
            .to_mat(n)
            .ok_or_else(|| CliError::invalid("schema", format!("generator {name}: u is not a {n}x{n} matrix")))?;
        if r.iter().chain(y.iter()).any(|x| !x.is_finite()) {
            return Err(CliError::invalid("schema", format!("generator {name}: non-finite entry")));
        }
        if !numkernel::is_unimodular(&r, tolerance) {
            return Err(CliError::invalid(
                "not_unimodular",
                format!("generator {name}: det(rho) = {} is not 1", r.determinant()),
            ));
        }
        if !numkernel::is_traceless(&y, tolerance) {
            return Err(CliError::invalid(
                "not_traceless",
                format!("generator {name}: trace(u) = {} is not 0", y.trace()),
            ));
        }
        rho.push(r);
        u.push(y);
    }
    let rep = AffineRepresentation::with_tolerance(rho, u, tolerance)?;
    Ok((file, rep))
}

fn word_arg(s: &str, k: usize) -> CliResult<GroupWord> {
    freegroup::parse_word(s, k).map_err(|e| CliError::invalid(e.code(), format!("word {s:?}: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceData {
    frame: MatrixData,
    base: MatrixData,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpacesFile {
    n: usize,
    spaces: Vec<SpaceData>,
}

fn load_spaces(path: &Path) -> CliResult<Vec<AffineParabolic>> {
    let file: SpacesFile = read_json(path)?;
    let n = file.n;
    if file.spaces.len() != 4 {
        return Err(CliError::invalid("schema", format!("expected 4 spaces, found {}", file.spaces.len())));
    }
    file.spaces
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let bad = |what: &str| CliError::invalid("schema", format!("space {}: {what} is not a {n}x{n} matrix", i + 1));
            let frame = s.frame.to_mat(n).ok_or_else(|| bad("frame"))?;
            let base = s.base.to_mat(n).ok_or_else(|| bad("base"))?;
            Ok(AffineParabolic::new(Flag::from_frame(&frame)?, base))
        })
        .collect()
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => io::stdout().write_all(bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output values serialize");
    text.push('\n');
    write_output(None, text.as_bytes())
}

#[derive(Serialize)]
struct InvariantOut {
    word: String,
    jordan: Vec<Num>,
    margulis: Vec<Num>,
    signs: Vec<i8>,
}

#[derive(Serialize)]
struct ReportOut {
    horizon: usize,
    functional: Vec<Num>,
    margin: Num,
    min_normalized_norm: Num,
    ok_count: usize,
    skipped_count: usize,
    verdict: spectra::Verdict,
}

#[derive(Serialize)]
struct LimitRowOut {
    n: usize,
    defect: Vec<Num>,
    gap: Num,
}

#[derive(Serialize)]
struct LimitOut {
    gamma: String,
    eta: String,
    target: Vec<Num>,
    rows: Vec<LimitRowOut>,
}

#[derive(Serialize)]
struct DerivOut {
    word: String,
    direction: usize,
    t: Num,
    finite_difference: Vec<Num>,
    margulis: Vec<Num>,
    error: Num,
}

fn format_ratio(r: &Ratio<i128>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Runs one parsed command.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let tolerance = cli.tolerance;
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CliError::invalid("out_of_range", format!("tolerance {tolerance} must be positive")));
    }
    match &cli.command {
        Command::Validate { path } => {
            load_representation(path, tolerance)?;
            Ok(())
        }
        Command::Invariant { path, word } => {
            let (_, rep) = load_representation(path, tolerance)?;
            let w = word_arg(word, rep.generators())?;
            let inv = affine::word_invariants(&rep, &w)?;
            print_json(&InvariantOut {
                word: w.to_string(),
                jordan: nums(&inv.jordan),
                margulis: nums(&inv.margulis),
                signs: inv.signs,
            })
        }
        Command::Crossratio { path } => {
            let a = load_spaces(path)?;
            let beta = affine::cross_ratio(&a[0], &a[1], &a[2], &a[3])?;
            print_json(&serde_json::json!({ "cross_ratio": nums(&beta) }))
        }
        Command::Spectrum { path, max_length, out } => {
            let (_, rep) = load_representation(path, tolerance)?;
            let samples = spectra::sample_spectrum(&rep, *max_length);
            let mut buf = Vec::new();
            spectra::write_spectrum_csv(&samples, rep.dim(), &mut buf)?;
            write_output(out.as_deref(), &buf)
        }
        Command::Proper { path, max_length } => {
            let (_, rep) = load_representation(path, tolerance)?;
            let samples = spectra::sample_spectrum(&rep, *max_length);
            let r = spectra::properness_diagnostic(&samples, None)?;
            print_json(&ReportOut {
                horizon: r.horizon,
                functional: nums(&r.functional),
                margin: Num(r.margin),
                min_normalized_norm: Num(r.min_normalized_norm),
                ok_count: r.ok_count,
                skipped_count: r.skipped_count,
                verdict: r.verdict,
            })
        }
        Command::Limit { path, gamma, eta, max_power } => {
            let (_, rep) = load_representation(path, tolerance)?;
            let g = word_arg(gamma, rep.generators())?;
            let e = word_arg(eta, rep.generators())?;
            let table = spectra::limit_formula_experiment(&rep, &g, &e, *max_power)?;
            let target = spectra::limit_target(&rep, &g, &e)?;
            print_json(&LimitOut {
                gamma: g.to_string(),
                eta: e.to_string(),
                target: nums(&target),
                rows: table
                    .iter()
                    .map(|r| LimitRowOut { n: r.n, defect: nums(&r.defect), gap: Num(r.gap) })
                    .collect(),
            })
        }
        Command::Deriv { path, word, direction, t } => {
            let (_, rep) = load_representation(path, tolerance)?;
            let w = word_arg(word, rep.generators())?;
            let x = rep.u().get(*direction).ok_or_else(|| {
                CliError::invalid(
                    "out_of_range",
                    format!("direction {direction} is not a generator index below {}", rep.generators()),
                )
            })?;
            let g = rep.eval_linear(&w)?;
            let r = spectra::derivative_experiment(&g, x, *t)?;
            print_json(&DerivOut {
                word: w.to_string(),
                direction: *direction,
                t: Num(*t),
                finite_difference: nums(&r.finite_difference),
                margulis: nums(&r.margulis),
                error: Num(r.error),
            })
        }
        Command::Lw { n, k } => {
            let x = hitchin::lw_direction_exact(*n, *k)?;
            let line: Vec<String> = x.iter().map(format_ratio).collect();
            write_output(None, format!("{}\n", line.join(" ")).as_bytes())
        }
        Command::Fuchsian { n, path, out } => {
            let (file, rep) = load_representation(path, tolerance)?;
            let lifted = hitchin::fuchsian_lift(*n, &rep)?;
            let source = file.metadata.and_then(|m| m.name).unwrap_or_else(|| path.display().to_string());
            let doc = RepFileOut {
                n: *n,
                k: lifted.generators(),
                generators: lifted
                    .rho()
                    .iter()
                    .zip(lifted.u())
                    .map(|(r, y)| GeneratorOut { rho: rows(r), u: rows(y) })
                    .collect(),
                metadata: Metadata {
                    name: Some(format!("{source} lifted to dimension {n}")),
                    description: Some("image under the irreducible representation of SL(2)".into()),
                },
            };
            let mut text = serde_json::to_string_pretty(&doc).expect("output values serialize");
            text.push('\n');
            write_output(out.as_deref(), text.as_bytes())
        }
    }
}

fn report(e: &CliError) {
    let body = serde_json::json!({ "error": e.code, "message": e.message });
    eprintln!("{body}");
}

/// Entry point for the binary.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            report(&CliError::invalid("threads", e.to_string()));
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit)
        }
    }
}

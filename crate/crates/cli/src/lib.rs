//! Command-line front end: `decompose`, `verify`, `predict`, `oracle` and
//! `generate`. Exit codes are 0 on success, 1 on usage or input errors and
//! 2 when a certificate fails verification.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rigidity::cert::{verify_cert, VerificationReport, VerifyOptions};
use rigidity::decomp::{
    decompose_kron_product, decompose_unequal, hadamard_family_pipeline, DecompOptions, DeltaChoice, PipelineReport,
    UnequalMode,
};
use rigidity::hadamard::{paley1, paley2, walsh, HadamardMatrix};
use rigidity::io::{parse_cert, parse_matrix, peek_field, render_cert, render_matrix, MatrixFormat};
use rigidity::matrix::{DenseMatrix, KroneckerSpec, SparseMatrix};
use rigidity::oracle::{brute_rc_rigidity, brute_rigidity};
use rigidity::predict::{predict_parameters, PredictConfig};
use rigidity::score::WeightFn;
use rigidity::field::parse_rational;
use rigidity::{Field, FieldSpec, PrimeField, Rationals};

/// Name of the seeded generator behind `--random` factors.
pub const RNG_NAME: &str = "chacha8-v1";

#[derive(Parser, Debug)]
#[command(name = "rigidity", version, about = "Low-rank plus sparse certificates for Kronecker products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and verify a certificate for a Kronecker product.
    Decompose(DecomposeArgs),
    /// Check a certificate against a target matrix.
    Verify(VerifyArgs),
    /// Predicted parameters of the split for given dimensions.
    Predict(PredictArgs),
    /// Exact rigidity of a tiny matrix by exhaustive search.
    Oracle(OracleArgs),
    /// Write a generated matrix file.
    Generate(GenerateArgs),
}

/// Factor sources; their relative order on the command line is the
/// Kronecker order.
#[derive(Args, Debug, Default)]
struct FactorArgs {
    /// Matrix files, comma separated.
    #[arg(long, value_delimiter = ',')]
    factors: Vec<PathBuf>,
    /// Walsh-Hadamard factor of order 2^k.
    #[arg(long, value_name = "K")]
    walsh: Vec<u32>,
    /// Paley I Hadamard factor of order q + 1 (q = 3 mod 4).
    #[arg(long, value_name = "Q")]
    paley1: Vec<u64>,
    /// Paley II Hadamard factor of order 2(q + 1) (q = 1 mod 4).
    #[arg(long, value_name = "Q")]
    paley2: Vec<u64>,
    /// Random d x d factor drawn from the seeded generator.
    #[arg(long, value_name = "D")]
    random: Vec<usize>,
    /// Field for generated factors ("Fp 5" or "Q"); files carry their own.
    #[arg(long)]
    field: Option<FieldSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Equal,
    Binpack,
    Hadamard,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    factors: FactorArgs,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Mode::Equal)]
    mode: Mode,
    /// A real offset parameter or "auto".
    #[arg(long, default_value = "auto")]
    delta: String,
    /// "uniform" or a file of `d w` lines.
    #[arg(long, default_value = "uniform")]
    weights: String,
    /// Certificate output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report output file; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = rigidity::matrix::DEFAULT_DIM_CAP)]
    max_n: usize,
    /// Bin capacity in binpack mode.
    #[arg(long)]
    bin_cap: Option<usize>,
    /// Size bound b of the hadamard mode.
    #[arg(long, default_value_t = 4.0)]
    b: f64,
    /// Constant in the hadamard-mode gamma_b.
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Enforce the asymptotic size gate in hadamard mode.
    #[arg(long)]
    gate: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    cert: PathBuf,
    /// Target matrix file; otherwise the factor flags give the target.
    #[arg(long)]
    target: Option<PathBuf>,
    #[command(flatten)]
    factors: FactorArgs,
    #[arg(long, default_value_t = rigidity::matrix::DEFAULT_DIM_CAP)]
    max_n: usize,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Comma separated sizes; `d*m` repeats `d` m times.
    #[arg(long)]
    dims: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value = "uniform")]
    weights: String,
    /// Constant in the asymptotic gamma.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = rigidity::score::GRID_POINTS)]
    grid_points: usize,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    file: PathBuf,
    /// Target rank r.
    #[arg(long)]
    rank: usize,
    /// Row-column rigidity instead of rigidity.
    #[arg(long)]
    rc: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Dense,
    Sparse,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    factors: FactorArgs,
    #[arg(long, value_enum, default_value_t = Format::Dense)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    max_n: usize,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return 1;
        }
    };
    let sub = matches.subcommand().map(|(_, m)| m).expect("subcommand required");
    let result = match &cli.command {
        Command::Decompose(a) => decompose(a, sub, stdout),
        Command::Verify(a) => verify(a, sub, stdout),
        Command::Predict(a) => predict(a, stdout),
        Command::Oracle(a) => oracle(a, stdout),
        Command::Generate(a) => generate(a, sub, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

#[derive(Clone, Debug)]
enum Source {
    File(PathBuf),
    Walsh(u32),
    Paley1(u64),
    Paley2(u64),
    Random(usize),
}

impl Source {
    fn describe(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Walsh(k) => format!("walsh({k})"),
            Source::Paley1(q) => format!("paley1({q})"),
            Source::Paley2(q) => format!("paley2({q})"),
            Source::Random(d) => format!("random({d})"),
        }
    }
}

/// Factor sources in command-line order.
fn sources(a: &FactorArgs, m: &ArgMatches) -> Vec<Source> {
    let mut out: Vec<(usize, Source)> = Vec::new();
    let mut collect = |id: &str, items: Vec<Source>| {
        if let Some(idx) = m.indices_of(id) {
            out.extend(idx.zip(items));
        }
    };
    collect("factors", a.factors.iter().cloned().map(Source::File).collect());
    collect("walsh", a.walsh.iter().map(|&k| Source::Walsh(k)).collect());
    collect("paley1", a.paley1.iter().map(|&q| Source::Paley1(q)).collect());
    collect("paley2", a.paley2.iter().map(|&q| Source::Paley2(q)).collect());
    collect("random", a.random.iter().map(|&d| Source::Random(d)).collect());
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, s)| s).collect()
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Field of the factor list: the files' common field, checked against
/// `--field`, or `--field`, or Q.
fn resolve_field(a: &FactorArgs, srcs: &[Source]) -> anyhow::Result<FieldSpec> {
    let mut found: Option<(FieldSpec, String)> = None;
    for s in srcs {
        if let Source::File(p) = s {
            let spec = peek_field(&read(p)?).with_context(|| format!("factor {}", p.display()))?;
            match &found {
                Some((f, first)) if *f != spec => {
                    bail!("factor {} is over {spec} but {first} is over {f}", p.display())
                }
                None => found = Some((spec, p.display().to_string())),
                _ => {}
            }
        }
    }
    match (found, a.field) {
        (Some((f, _)), Some(g)) if f != g => bail!("factor files are over {f} but --field is {g}"),
        (Some((f, _)), _) => Ok(f),
        (None, Some(g)) => Ok(g),
        (None, None) => Ok(FieldSpec::Rational),
    }
}

fn hadamard_factor<F: Field>(field: &F, h: anyhow::Result<HadamardMatrix>) -> anyhow::Result<DenseMatrix<F>> {
    Ok(h?.to_dense(field)?)
}

fn build_factors<F: Field>(field: &F, srcs: &[Source], seed: u64) -> anyhow::Result<Vec<DenseMatrix<F>>> {
    if srcs.is_empty() {
        bail!("no factors given (use --factors, --walsh, --paley1, --paley2 or --random)");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    srcs.iter()
        .enumerate()
        .map(|(i, s)| {
            let m = match s {
                Source::File(p) => parse_matrix(&read(p)?, field).map(|(m, _)| m.to_dense()).map_err(Into::into),
                Source::Walsh(k) => hadamard_factor(field, walsh(*k).map_err(Into::into)),
                Source::Paley1(q) => hadamard_factor(field, paley1(*q).map_err(Into::into)),
                Source::Paley2(q) => hadamard_factor(field, paley2(*q).map_err(Into::into)),
                Source::Random(d) => Ok(DenseMatrix::random(field, *d, *d, &mut rng)),
            };
            let m = m.with_context(|| format!("factor {} ({})", i + 1, s.describe()))?;
            if m.rows() != m.cols() {
                bail!("factor {} ({}) is {}x{}, not square", i + 1, s.describe(), m.rows(), m.cols());
            }
            Ok(m)
        })
        .collect()
}

fn parse_weights(arg: &str) -> anyhow::Result<WeightFn> {
    if arg == "uniform" {
        return Ok(WeightFn::Uniform);
    }
    let text = read(Path::new(arg))?;
    let mut table = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(d), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
            bail!("{arg}: line {}: expected `d w`", n + 1);
        };
        let d: usize = d.parse().map_err(|_| anyhow!("{arg}: line {}: bad dimension {d:?}", n + 1))?;
        let w = parse_rational(w).map_err(|e| anyhow!("{arg}: line {}: {e}", n + 1))?;
        table.insert(d, w);
    }
    Ok(WeightFn::table(table)?)
}

fn parse_delta(arg: &str) -> anyhow::Result<DeltaChoice> {
    if arg == "auto" {
        return Ok(DeltaChoice::Auto);
    }
    let d: f64 = arg.parse().map_err(|_| anyhow!("--delta must be a real number or \"auto\", got {arg:?}"))?;
    if !(d > 0.0 && d.is_finite()) {
        bail!("--delta must be positive, got {arg}");
    }
    Ok(DeltaChoice::Fixed(d))
}

/// Runs `$body` with `$f` bound to the concrete field of `$spec`.
macro_rules! with_field {
    ($spec:expr, |$f:ident| $body:expr) => {
        match $spec {
            FieldSpec::Prime(p) => {
                let $f = PrimeField::new(p)?;
                $body
            }
            FieldSpec::Rational => {
                let $f = Rationals;
                $body
            }
        }
    };
}

fn decompose(a: &DecomposeArgs, m: &ArgMatches, out: &mut dyn Write) -> anyhow::Result<i32> {
    let srcs = sources(&a.factors, m);
    let spec = resolve_field(&a.factors, &srcs)?;
    with_field!(spec, |f| decompose_in(&f, a, &srcs, out))
}

fn decompose_in<F: Field>(f: &F, a: &DecomposeArgs, srcs: &[Source], out: &mut dyn Write) -> anyhow::Result<i32> {
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        bail!("--epsilon must lie in (0, 1), got {}", a.epsilon);
    }
    let matrices = build_factors(f, srcs, a.factors.seed)?;
    let opts = DecompOptions {
        delta: parse_delta(&a.delta)?,
        weights: parse_weights(&a.weights)?,
        max_n: a.max_n,
        gate_asymptotic: a.gate,
        bin_cap: a.bin_cap,
        ..DecompOptions::default()
    };
    let target = KroneckerSpec::new(f, matrices.clone())?;
    let (cert, report) = match a.mode {
        Mode::Equal => decompose_kron_product(&target, a.epsilon, &opts)?,
        Mode::Binpack => decompose_unequal(f, &matrices, a.epsilon, UnequalMode::BinPack, &opts)?,
        Mode::Hadamard => {
            let none = vec![None; matrices.len()];
            hadamard_family_pipeline(f, &matrices, &none, a.epsilon, a.b, a.c0, &opts)?
        }
    };
    let verification = verify_cert(&cert, &target, &VerifyOptions::for_field(f.spec()));
    let text = decompose_report(srcs, a, &report, &verification);
    if let Some(p) = &a.out {
        write_out(p, &render_cert(&cert))?;
    }
    match &a.report {
        Some(p) => write_out(p, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(if verification.verified() { 0 } else { 2 })
}

fn prefixed(s: &mut String, prefix: &str, kv: &str) {
    for line in kv.lines() {
        let _ = writeln!(s, "{prefix}{line}");
    }
}

fn decompose_report(srcs: &[Source], a: &DecomposeArgs, r: &PipelineReport, v: &VerificationReport) -> String {
    let mut s = String::new();
    let names: Vec<String> = srcs.iter().map(Source::describe).collect();
    let _ = writeln!(s, "factors: {}", names.join(" "));
    if srcs.iter().any(|s| matches!(s, Source::Random(_))) {
        let _ = writeln!(s, "rng: {RNG_NAME}");
        let _ = writeln!(s, "seed: {}", a.factors.seed);
    }
    s.push_str(&r.to_kv());
    prefixed(&mut s, "verify.", &v.to_kv());
    s
}

enum Target<F: Field> {
    Kron(KroneckerSpec<F>),
    Matrix(SparseMatrix<F>),
}

impl<F: Field> Target<F> {
    fn dims(&self) -> (usize, usize) {
        match self {
            Target::Kron(k) => (k.order(), k.order()),
            Target::Matrix(m) => (m.rows(), m.cols()),
        }
    }

    fn verify(&self, cert: &rigidity::cert::LowRankSparseCert<F>) -> VerificationReport {
        let opts = VerifyOptions::for_field(cert.spec());
        match self {
            Target::Kron(k) => verify_cert(cert, k, &opts),
            Target::Matrix(m) => verify_cert(cert, m, &opts),
        }
    }
}

fn verify(a: &VerifyArgs, m: &ArgMatches, out: &mut dyn Write) -> anyhow::Result<i32> {
    let cert_text = read(&a.cert)?;
    let spec = peek_field(&cert_text).with_context(|| format!("certificate {}", a.cert.display()))?;
    let srcs = sources(&a.factors, m);
    if a.target.is_some() == !srcs.is_empty() {
        bail!("give exactly one of --target or factor flags");
    }
    if let Some(g) = a.factors.field {
        if g != spec {
            bail!("certificate is over {spec} but --field is {g}");
        }
    }
    with_field!(spec, |f| verify_in(&f, a, &cert_text, &srcs, out))
}

fn verify_in<F: Field>(
    f: &F,
    a: &VerifyArgs,
    cert_text: &str,
    srcs: &[Source],
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let cert = parse_cert(cert_text, f).with_context(|| format!("certificate {}", a.cert.display()))?;
    let target = match &a.target {
        Some(p) => {
            let text = read(p)?;
            let (m, _) = parse_matrix(&text, f).with_context(|| format!("target {}", p.display()))?;
            Target::Matrix(m)
        }
        None => {
            let k = KroneckerSpec::new(f, build_factors(f, srcs, a.factors.seed)?)?;
            rigidity::matrix::check_cap(k.order(), a.max_n)?;
            Target::Kron(k)
        }
    };
    let (rows, cols) = target.dims();
    if (rows, cols) != (cert.rows, cert.cols) {
        bail!("certificate is {}x{} but target is {rows}x{cols}", cert.rows, cert.cols);
    }
    let v = target.verify(&cert);
    let mut s = String::new();
    let _ = writeln!(s, "target: {}", cert.target);
    s.push_str(&v.to_kv());
    out.write_all(s.as_bytes())?;
    Ok(if v.verified() { 0 } else { 2 })
}

/// Parses `2,3,5` and `2*10,3` style dimension lists.
pub fn parse_dims(arg: &str) -> anyhow::Result<Vec<usize>> {
    let mut dims = Vec::new();
    for part in arg.split(',').map(str::trim) {
        let (d, m) = match part.split_once('*') {
            Some((d, m)) => (d.trim(), m.trim()),
            None => (part, "1"),
        };
        let d: usize = d.parse().map_err(|_| anyhow!("bad dimension {part:?}"))?;
        let m: usize = m.parse().map_err(|_| anyhow!("bad repeat count {part:?}"))?;
        if d < 2 {
            bail!("dimensions must be at least 2, got {d}");
        }
        dims.extend(std::iter::repeat(d).take(m));
    }
    if dims.is_empty() {
        bail!("empty dimension list");
    }
    Ok(dims)
}

fn predict(a: &PredictArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let dims = parse_dims(&a.dims)?;
    let w = parse_weights(&a.weights)?;
    let cfg = PredictConfig {
        c: a.c,
        grid_points: a.grid_points,
        ..PredictConfig::default()
    };
    let r = predict_parameters(&dims, a.epsilon, &w, &cfg)?;
    out.write_all(r.to_kv().as_bytes())?;
    Ok(0)
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let text = read(&a.file)?;
    let spec = peek_field(&text).with_context(|| a.file.display().to_string())?;
    with_field!(spec, |f| {
        let (m, _) = parse_matrix(&text, &f).with_context(|| a.file.display().to_string())?;
        let m = m.to_dense();
        let r = if a.rc { brute_rc_rigidity(&m, a.rank)? } else { brute_rigidity(&m, a.rank)? };
        out.write_all(r.to_kv().as_bytes())?;
        Ok(0)
    })
}

fn generate(a: &GenerateArgs, m: &ArgMatches, out: &mut dyn Write) -> anyhow::Result<i32> {
    let srcs = sources(&a.factors, m);
    let spec = resolve_field(&a.factors, &srcs)?;
    let format = match a.format {
        Format::Dense => MatrixFormat::Dense,
        Format::Sparse => MatrixFormat::Sparse,
    };
    let text = with_field!(spec, |f| {
        let k = KroneckerSpec::new(&f, build_factors(&f, &srcs, a.factors.seed)?)?;
        render_matrix(&k.materialize_capped(a.max_n)?, format)
    });
    match &a.out {
        Some(p) => write_out(p, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

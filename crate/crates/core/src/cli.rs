//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 verification
//! failure, 3 decode-image or internal error.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{self, CompositionFamily, RateLossMethod, SweepRow};
use crate::codec::{roundtrip_exhaustive, BitBlock, Codeword, KPolicy, Matcher, SamplingConfig};
use crate::error::Error;
use crate::models::{select_composition, Alphabet, BranchingModel, Composition, IidModel, Model, TargetDistribution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_DECODE: i32 = 3;

/// Default search ceiling for `nmax` when `2^w` is larger.
const DEFAULT_NMAX_LIMIT: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "acdm", version, about = "Finite-precision arithmetic-coding distribution matcher")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Map k input bits to a codeword.
    Encode(CodecArgs),
    /// Recover the input bits from a codeword.
    Decode(CodecArgs),
    /// Rate and divergence over a grid of output lengths and precisions.
    Analyze(AnalyzeArgs),
    /// Rate-loss bound for one model and precision.
    Rateloss(RatelossArgs),
    /// Largest output length with rate loss below one bit.
    Nmax(NmaxArgs),
    /// Encode and decode random (or all) inputs and compare.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Ccdm,
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    BalancedBinary,
    Target,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Symbol counts, e.g. `1600,1600`.
    #[arg(long, conflicts_with = "target")]
    composition: Option<String>,
    /// Target distribution JSON file `{"symbols": [...], "probs": [...]}`.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Output length, needed with --target.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModelKind::Ccdm)]
    model: ModelKind,
    /// Quantization scale of the i.i.d. model; defaults to 2^w.
    #[arg(long)]
    theta: Option<u64>,
    /// Mantissa precision.
    #[arg(long, default_value_t = 18)]
    w: u32,
    /// Samples for the sampled input-length estimate of non-CCDM models.
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct CodecArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Input length in bits, or `auto`.
    #[arg(long, default_value = "auto")]
    k: String,
    /// Accept a k above the certified input length.
    #[arg(long = "unsafe")]
    allow_unsafe: bool,
    /// Read input from this file instead of stdin.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Codewords use symbol labels instead of 0-based indices.
    #[arg(long)]
    labels: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    target: PathBuf,
    /// Comma-separated output lengths.
    #[arg(long)]
    n_list: String,
    /// Comma-separated precisions.
    #[arg(long, default_value = "18")]
    w_list: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RatelossArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// theorem1, ramabadran, sample or linearized.
    #[arg(long, default_value = "theorem1")]
    method: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NmaxArgs {
    #[arg(long, default_value_t = 18)]
    w: u32,
    #[arg(long, value_enum, default_value_t = Family::BalancedBinary)]
    family: Family,
    /// Target distribution for `--family target`.
    #[arg(long)]
    target: Option<PathBuf>,
    /// theorem1, ramabadran or linearized.
    #[arg(long, default_value = "theorem1")]
    method: String,
    /// Largest output length to consider; defaults to min(2^w, 10^6).
    #[arg(long)]
    n_limit: Option<u64>,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Input length in bits, or `auto`. An explicit k is verified as given.
    #[arg(long, default_value = "auto")]
    k: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Sweep all 2^k inputs instead of random ones.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure of a command, already mapped to an exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::Config(_) | Error::InstanceTooLarge(_) => EXIT_USAGE,
            Error::DecodeOutsideImage(_) | Error::ZeroWidthChild { .. } | Error::Internal(_) => EXIT_DECODE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<i32, Failure>;

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn read_input(&mut self, path: &Option<PathBuf>) -> std::result::Result<String, Failure> {
        match path {
            Some(p) => fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display()))),
            None => {
                let mut s = String::new();
                self.stdin
                    .read_to_string(&mut s)
                    .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
                Ok(s)
            }
        }
    }

    fn write_output(&mut self, path: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
        match path {
            Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| usage(format!("cannot write stdout: {e}"))),
        }
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.stderr, "{text}");
    }
}

/// Runs the CLI with the process streams and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI against arbitrary streams and returns the exit code.
pub fn run_with_io<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut io = Io { stdin, stdout, stderr };
    let result = match cli.command {
        Command::Encode(a) => cmd_encode(a, &mut io),
        Command::Decode(a) => cmd_decode(a, &mut io),
        Command::Analyze(a) => cmd_analyze(a, &mut io),
        Command::Rateloss(a) => cmd_rateloss(a, &mut io),
        Command::Nmax(a) => cmd_nmax(a, &mut io),
        Command::Roundtrip(a) => cmd_roundtrip(a, &mut io),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            io.note(&format!("error: {}", f.message));
            f.code
        }
    }
}

fn load_target(path: &PathBuf) -> std::result::Result<TargetDistribution, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(TargetDistribution::from_json(&text)?)
}

fn build_model(a: &ModelArgs) -> std::result::Result<Model, Failure> {
    match (&a.composition, &a.target, a.model) {
        (Some(c), _, ModelKind::Ccdm) => {
            let comp = Composition::parse_counts(c)?;
            if let Some(n) = a.n {
                if n != comp.n() {
                    return Err(usage(format!("--n {n} disagrees with the composition length {}", comp.n())));
                }
            }
            Ok(Model::ccdm(comp))
        }
        (Some(_), _, ModelKind::Iid) => Err(usage("--model iid needs --target")),
        (None, Some(path), kind) => {
            let target = load_target(path)?;
            let n = a.n.ok_or_else(|| usage("--target needs --n"))?;
            match kind {
                ModelKind::Ccdm => Ok(Model::ccdm(select_composition(&target, n)?)),
                ModelKind::Iid => {
                    crate::fpa::check_precision(a.w)?;
                    let theta = a.theta.unwrap_or(1u64 << a.w.min(62));
                    let n = usize::try_from(n).map_err(|_| usage("--n too large"))?;
                    Ok(Model::Iid(IidModel::new(target, n, theta)?))
                }
            }
        }
        (None, None, _) => Err(usage("one of --composition or --target is required")),
    }
}

fn parse_k(text: &str) -> std::result::Result<Option<u64>, Failure> {
    if text == "auto" {
        Ok(None)
    } else {
        text.parse()
            .map(Some)
            .map_err(|_| usage(format!("--k must be a non-negative integer or `auto`, got {text:?}")))
    }
}

fn sampling(a: &ModelArgs) -> SamplingConfig {
    SamplingConfig {
        samples: a.samples,
        seed: a.seed,
    }
}

fn build_matcher(a: &CodecArgs, io: &mut Io) -> std::result::Result<Matcher, Failure> {
    let model = build_model(&a.model)?;
    let policy = match (parse_k(&a.k)?, a.allow_unsafe) {
        (None, _) => KPolicy::Auto,
        (Some(k), false) => KPolicy::Checked(k),
        (Some(k), true) => KPolicy::Unchecked(k),
    };
    let m = Matcher::new(model, a.model.w, policy, sampling(&a.model))?;
    if policy == KPolicy::Auto {
        io.note(&format!("k = {}", m.k()));
    }
    Ok(m)
}

fn cmd_encode(a: CodecArgs, io: &mut Io) -> CmdResult {
    let matcher = build_matcher(&a, io)?;
    let text = io.read_input(&a.input)?;
    let bits: BitBlock = text.trim().parse()?;
    if bits.len() as u64 != matcher.k() {
        return Err(usage(format!("input has {} bits, expected k={}", bits.len(), matcher.k())));
    }
    let codeword = matcher.encode(&bits)?;
    let out = if a.labels {
        codeword.format_labels(matcher.model().alphabet())
    } else {
        codeword.format_indices()
    };
    io.write_output(&a.out, &format!("{out}\n"))?;
    Ok(EXIT_OK)
}

fn cmd_decode(a: CodecArgs, io: &mut Io) -> CmdResult {
    let matcher = build_matcher(&a, io)?;
    let text = io.read_input(&a.input)?;
    let alphabet: &Alphabet = matcher.model().alphabet();
    let codeword = Codeword::parse(text.trim(), a.labels.then_some(alphabet))?;
    if let Some(&bad) = codeword.symbols().iter().find(|&&s| s >= alphabet.len()) {
        return Err(usage(format!("symbol index {bad} outside alphabet of size {}", alphabet.len())));
    }
    let bits = matcher.decode(&codeword)?;
    io.write_output(&a.out, &format!("{bits}\n"))?;
    Ok(EXIT_OK)
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> std::result::Result<Vec<T>, Failure> {
    let items = text
        .split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| usage(format!("bad value {t:?} in --{flag}"))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(usage(format!("--{flag} is empty")));
    }
    Ok(items)
}

/// `x` with 12 significant digits, fixed notation where that stays short.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const SWEEP_CSV_HEADER: &str = "n,w,k_ipa,k_fpa,delta_k,rate,divergence";

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.w,
            r.k_ipa,
            r.k_fpa,
            format_sig12(r.delta_k),
            format_sig12(r.rate),
            format_sig12(r.divergence)
        ));
    }
    out
}

fn to_json<T: Serialize>(value: &T) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).expect("serializable"))
}

fn cmd_analyze(a: AnalyzeArgs, io: &mut Io) -> CmdResult {
    let target = load_target(&a.target)?;
    let ns: Vec<u64> = parse_list("n-list", &a.n_list)?;
    let ws: Vec<u32> = parse_list("w-list", &a.w_list)?;
    let rows = analysis::sweep(&target, &ns, &ws)?;
    for r in rows.iter().filter(|r| !r.certified) {
        io.note(&format!(
            "warning: n={} exceeds 2^w at w={}; the coder cannot run there and delta_k is the formula value only",
            r.n, r.w
        ));
    }
    let text = match a.format {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json(&rows),
    };
    io.write_output(&a.out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_rateloss(a: RatelossArgs, io: &mut Io) -> CmdResult {
    let method: RateLossMethod = a.method.parse()?;
    let model = build_model(&a.model)?;
    let report = analysis::rateloss_report(&model, a.model.w, method, a.model.samples, a.model.seed)?;
    let text = match a.format {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "method,n,w,k_ipa,k_fpa,delta_k\n{},{},{},{},{},{}\n",
            report.method,
            report.n,
            report.w,
            report.k_ipa,
            report.k_fpa,
            format_sig12(report.delta_k)
        ),
    };
    io.write_output(&a.out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_nmax(a: NmaxArgs, io: &mut Io) -> CmdResult {
    let method: RateLossMethod = a.method.parse()?;
    let family = match a.family {
        Family::BalancedBinary => CompositionFamily::BalancedBinary,
        Family::Target => {
            let path = a.target.as_ref().ok_or_else(|| usage("--family target needs --target"))?;
            CompositionFamily::Target(load_target(path)?)
        }
    };
    crate::fpa::check_precision(a.w)?;
    let limit = a
        .n_limit
        .unwrap_or_else(|| (1u64 << a.w).min(DEFAULT_NMAX_LIMIT));
    let n = analysis::nmax_search(a.w, &family, method, limit)?;
    io.write_output(&None, &format!("{n}\n"))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RoundtripOutput {
    k: u64,
    certified_k: Option<u64>,
    w: u32,
    n: usize,
    #[serde(flatten)]
    report: crate::codec::RoundtripReport,
}

fn cmd_roundtrip(a: RoundtripArgs, io: &mut Io) -> CmdResult {
    let model = build_model(&a.model)?;
    let w = a.model.w;
    let matcher = match parse_k(&a.k)? {
        None => Matcher::new(model, w, KPolicy::Auto, sampling(&a.model))?,
        Some(k) => Matcher::new(model, w, KPolicy::Unchecked(k), sampling(&a.model))?,
    };
    // Report the certified length next to an explicit one.
    let certified_k = match matcher.certified_k() {
        Some(c) => Some(c),
        None => match matcher.model() {
            Model::Ccdm(c) => analysis::k_fpa_ccdm(c.composition(), w).ok(),
            Model::Iid(_) => None,
        },
    };
    if let Some(c) = certified_k.filter(|&c| matcher.k() > c) {
        io.note(&format!("note: k={} exceeds the certified input length {c}", matcher.k()));
    }
    let report = if a.exhaustive {
        roundtrip_exhaustive(matcher.model(), w, matcher.k())?
    } else {
        matcher.roundtrip(a.trials, a.model.seed)
    };
    let passed = report.all_passed();
    let out = RoundtripOutput {
        k: matcher.k(),
        certified_k,
        w,
        n: matcher.n(),
        report,
    };
    io.write_output(&a.out, &to_json(&out))?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}

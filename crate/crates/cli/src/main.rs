//! `sadic`: S-adic subshifts from multidimensional continued fractions.

mod source;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use sadic_core::boshernitzan::{scan_certificate, verify_cover, WindowCaps};
use sadic_core::coding::{level_words_capped, sample_potential, SamplingFunction};
use sadic_core::lyapunov::{estimate_exponents, Cocycle, CocycleRun};
use sadic_core::mcf::{directive_sequence, format_f64, Algorithm, PiecewiseProjective, SimplexPoint};
use sadic_core::spectrum::{zero_measure_trend, DEFAULT_PERIOD_CAP};
use sadic_core::words::complexity_profile;
use sadic_core::{Error, Letter};

use source::{Mode, SourceArgs};

#[derive(Parser, Debug)]
#[command(name = "sadic", version, about = "S-adic subshifts, Boshernitzan certificates and Schrödinger band spectra")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write data here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Orbit of a simplex point and the branches it selects.
    Orbit(OrbitArgs),
    /// Search for a Boshernitzan certificate window.
    Certify(CertifyArgs),
    /// Level word `w_n(a)` or its statistics.
    Words(WordsArgs),
    /// Potential sampled along a level word.
    Potential(PotentialArgs),
    /// Bandwidths of periodic approximants across levels.
    Spectrum(SpectrumArgs),
    /// Monte Carlo Lyapunov exponents of the substitution cocycle.
    Lyapunov(LyapunovArgs),
    /// Factor complexity of a level word.
    Complexity(ComplexityArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Exact,
    Decimal,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[arg(long, default_value = "cs")]
    algorithm: Algorithm,
    #[arg(long)]
    point: String,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Coordinates as `p/q` (exact mode only) or decimals.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 60)]
    horizon: usize,
    /// Largest segment norm accepted.
    #[arg(long)]
    max_norm: Option<u64>,
    /// Longest positive segment.
    #[arg(long, default_value_t = 20)]
    positive_cap: usize,
    /// Largest depth of the precedes over-approximation.
    #[arg(long, default_value_t = 8)]
    builder_depth: usize,
}

#[derive(Args, Debug)]
struct LevelArgs {
    #[arg(long)]
    level: usize,
    #[arg(long, default_value_t = 1)]
    letter: u8,
    /// Longest word materialized.
    #[arg(long, default_value_t = 1_000_000)]
    max_len: usize,
}

#[derive(Args, Debug)]
struct WordsArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    level: LevelArgs,
    /// Emit length and letter frequencies as JSON instead of the word.
    #[arg(long)]
    stats: bool,
}

#[derive(Args, Debug)]
struct SamplingArgs {
    /// Cylinder values, e.g. `1=0,2=1,3=-1`.
    #[arg(long)]
    values: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    coupling: f64,
    /// Value of cylinders missing from `--values`.
    #[arg(long, allow_negative_numbers = true)]
    default: Option<f64>,
}

impl SamplingArgs {
    fn build(&self, window: Option<usize>) -> Result<SamplingFunction, Error> {
        let mut f = SamplingFunction::parse(&self.values, self.coupling)?;
        if let Some(k) = window {
            if k != f.window {
                return Err(Error::InvalidArgument(format!("--window {} but the values use words of length {}", k, f.window)));
            }
        }
        if let Some(v) = self.default {
            f = f.with_default(v);
        }
        Ok(f)
    }
}

#[derive(Args, Debug)]
struct PotentialArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    level: LevelArgs,
    #[arg(long)]
    window: Option<usize>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Increasing levels, e.g. `2,4,6`.
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    letter: u8,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long, default_value_t = DEFAULT_PERIOD_CAP)]
    period_cap: usize,
    /// Also write every band as `level,lower,upper` to this file.
    #[arg(long)]
    emit_bands: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LyapunovArgs {
    #[arg(long, default_value = "cs")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 1_000_000)]
    steps: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    reorth_every: usize,
    /// Push the untransposed matrices through the frame.
    #[arg(long, conflicts_with = "identity")]
    transpose: bool,
    /// Diagnostic: identity matrices along the orbit.
    #[arg(long)]
    identity: bool,
}

#[derive(Args, Debug)]
struct ComplexityArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    level: LevelArgs,
    /// Largest factor length counted.
    #[arg(long, default_value_t = 40)]
    max_n: usize,
    /// Count factors of this prefix of the word only.
    #[arg(long)]
    prefix: Option<usize>,
}

fn letter(index: u8) -> Result<Letter, Error> {
    Letter::new(index)
}

fn orbit(args: &OrbitArgs, out: &mut dyn Write) -> Result<(), Error> {
    let x = SimplexPoint::<BigRational>::parse(&args.point)?;
    let rows: Vec<(Option<String>, Vec<String>)> = match args.mode {
        Mode::Exact => {
            let it = directive_sequence(&x, args.steps, args.algorithm)?;
            source::report_degeneracy(&it);
            let decimal = matches!(args.format, Some(Format::Decimal));
            it.points
                .iter()
                .enumerate()
                .map(|(n, p)| {
                    let coords =
                        if decimal { p.to_f64().coords().iter().map(|v| format_f64(*v)).collect() } else { p.render() };
                    (it.branches.get(n).map(|b| b.to_string()), coords)
                })
                .collect()
        }
        Mode::Float => {
            if matches!(args.format, Some(Format::Exact)) {
                return Err(Error::InvalidArgument("--format exact needs --mode exact".into()));
            }
            let it = directive_sequence(&x.to_f64(), args.steps, args.algorithm)?;
            source::report_degeneracy(&it);
            it.points
                .iter()
                .enumerate()
                .map(|(n, p)| (it.branches.get(n).map(|b| b.to_string()), p.render()))
                .collect()
        }
    };
    let d = args.algorithm.dimension();
    let header: Vec<String> = (1..=d).map(|i| format!("x_{}", i)).collect();
    writeln!(out, "step,branch,{}", header.join(","))?;
    for (n, (branch, coords)) in rows.into_iter().enumerate() {
        writeln!(out, "{},{},{}", n, branch.unwrap_or_default(), coords.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CertifyOutput {
    found: bool,
    n0: Option<usize>,
    n1: Option<usize>,
    n2: Option<usize>,
    n3: Option<usize>,
    #[serde(rename = "N")]
    norm_bound: Option<String>,
    r: Option<String>,
    #[serde(rename = "C")]
    constant: Option<String>,
    precedes_depth: Option<usize>,
    verified_cover: Option<bool>,
}

fn certify(args: &CertifyArgs, out: &mut dyn Write) -> Result<(), Error> {
    let dv = args.source.directive_view(args.horizon)?;
    let caps = WindowCaps { positive: args.positive_cap, builder_depth: args.builder_depth };
    let cap = args.max_norm.map(num_bigint::BigUint::from);
    let cert = scan_certificate(&dv, cap.as_ref(), args.horizon, caps)?;
    let report = match cert {
        Some(c) => CertifyOutput {
            found: true,
            n0: Some(c.n0),
            n1: Some(c.n1),
            n2: Some(c.n2),
            n3: Some(c.n3),
            norm_bound: Some(c.norm_bound.to_string()),
            r: Some(c.r.to_string()),
            constant: Some(c.constant().to_string()),
            precedes_depth: Some(c.precedes_depth),
            verified_cover: Some(verify_cover(&dv, &c)?),
        },
        None => {
            eprintln!("no certificate window within horizon {}", args.horizon);
            CertifyOutput {
                found: false,
                n0: None,
                n1: None,
                n2: None,
                n3: None,
                norm_bound: None,
                r: None,
                constant: None,
                precedes_depth: None,
                verified_cover: None,
            }
        }
    };
    write_json(out, &report)
}

#[derive(Serialize)]
struct WordStats {
    level: usize,
    letter: u8,
    length: String,
    frequencies: Vec<String>,
}

fn words(args: &WordsArgs, out: &mut dyn Write) -> Result<(), Error> {
    let a = letter(args.level.letter)?;
    let dv = args.source.directive_view(args.level.level + 1)?;
    if args.stats {
        let m = dv.segment_matrix(0, args.level.level)?;
        if a.slot() >= m.dim() {
            return Err(Error::InvalidArgument(format!("letter {} is outside the alphabet", a)));
        }
        let length = m.column_sums().swap_remove(a.slot());
        let frequencies = (0..m.dim())
            .map(|i| BigRational::new(BigInt::from(m.get(i, a.slot()).clone()), BigInt::from(length.clone())).to_string())
            .collect();
        let stats = WordStats { level: args.level.level, letter: a.index(), length: length.to_string(), frequencies };
        return write_json(out, &stats);
    }
    let lw = level_words_capped(&dv, args.level.level, args.level.max_len)?;
    let w = lw.word(a).map_err(|_| {
        Error::InvalidArgument(format!(
            "w_{}({}) has {} letters, more than --max-len {}; use --stats",
            args.level.level,
            a,
            lw.length(a),
            args.level.max_len
        ))
    })?;
    writeln!(out, "{}", w)?;
    Ok(())
}

fn level_word(source: &SourceArgs, level: &LevelArgs) -> Result<sadic_core::Word, Error> {
    let a = letter(level.letter)?;
    let dv = source.directive_view(level.level + 1)?;
    let lw = level_words_capped(&dv, level.level, level.max_len)?;
    let w = lw.word(a).map_err(|_| {
        Error::InvalidArgument(format!(
            "w_{}({}) has {} letters, more than --max-len {}",
            level.level,
            a,
            lw.length(a),
            level.max_len
        ))
    })?;
    Ok(w.clone())
}

fn potential(args: &PotentialArgs, out: &mut dyn Write) -> Result<(), Error> {
    let f = args.sampling.build(args.window)?;
    let w = level_word(&args.source, &args.level)?;
    let v = sample_potential(&w, &f)?;
    writeln!(out, "index,value")?;
    for (m, x) in v.samples.iter().enumerate() {
        writeln!(out, "{},{}", m, format_f64(*x))?;
    }
    Ok(())
}

fn spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> Result<(), Error> {
    let f = args.sampling.build(None)?;
    let a = letter(args.letter)?;
    let top = *args.levels.iter().max().expect("clap requires at least one level");
    let dv = args.source.directive_view(top + 1)?;
    let report = zero_measure_trend(&dv, &f, &args.levels, a, args.period_cap)?;
    for n in &report.skipped {
        eprintln!("level {} skipped: period above --period-cap {}", n, args.period_cap);
    }
    writeln!(out, "level,period,band_count,bandwidth")?;
    for row in &report.rows {
        writeln!(out, "{},{},{},{}", row.level, row.period, row.band_count, format_f64(row.bandwidth))?;
    }
    if let Some(path) = &args.emit_bands {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "level,lower,upper")?;
        for row in &report.rows {
            for &(l, u) in &row.bands.bands {
                writeln!(w, "{},{},{}", row.level, format_f64(l), format_f64(u))?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LyapunovOutput {
    algorithm: String,
    cocycle: Cocycle,
    steps: usize,
    burn_in: usize,
    trials: usize,
    seed: u64,
    theta: Vec<f64>,
    stderr: Vec<f64>,
    sum: f64,
    sum_tolerance: f64,
    total_steps: usize,
}

fn lyapunov(args: &LyapunovArgs, out: &mut dyn Write) -> Result<(), Error> {
    let cocycle = if args.identity {
        Cocycle::Identity
    } else if args.transpose {
        Cocycle::Transposed
    } else {
        Cocycle::Forward
    };
    let run = CocycleRun {
        algorithm: args.algorithm,
        steps: args.steps,
        burn_in: args.burn_in,
        reorth_every: args.reorth_every,
        seed: args.seed,
        cocycle,
    };
    let e = estimate_exponents(&run, args.trials)?;
    let report = LyapunovOutput {
        algorithm: args.algorithm.to_string(),
        cocycle,
        steps: args.steps,
        burn_in: args.burn_in,
        trials: e.trials,
        seed: args.seed,
        sum: e.sum(),
        sum_tolerance: e.sum_tolerance(),
        theta: e.theta,
        stderr: e.stderr,
        total_steps: e.total_steps,
    };
    write_json(out, &report)
}

fn complexity(args: &ComplexityArgs, out: &mut dyn Write) -> Result<(), Error> {
    let w = level_word(&args.source, &args.level)?;
    let w = match args.prefix {
        Some(len) if len < w.len() => w.prefix(len),
        _ => w,
    };
    let profile = complexity_profile(&w, args.max_n)?;
    writeln!(out, "n,complexity")?;
    for (k, p) in profile.iter().enumerate() {
        writeln!(out, "{},{}", k + 1, p)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Error> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
    writeln!(out, "{}", s)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match &cli.command {
        Command::Orbit(a) => orbit(a, &mut out)?,
        Command::Certify(a) => certify(a, &mut out)?,
        Command::Words(a) => words(a, &mut out)?,
        Command::Potential(a) => potential(a, &mut out)?,
        Command::Spectrum(a) => spectrum(a, &mut out)?,
        Command::Lyapunov(a) => lyapunov(a, &mut out)?,
        Command::Complexity(a) => complexity(a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::InvalidArgument(_) | Error::PreconditionViolation(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

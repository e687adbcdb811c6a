use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use jumpcode::bounds::{log_tauberian_sum, lower_constant_c_lambda, RateEnvelope};
use jumpcode::entropycoder::{decode_archive, encode_archive, CoderMode};
use jumpcode::harness::{
    build_process, oracle_cross_check, rate_curve_experiment, shifted_candidates, write_csv, CoderDescriptor,
    Estimator, ExperimentConfig, FinitePathLaw,
};
use jumpcode::paths::{moment_distortion, JumpPath};
use jumpcode::quantizer::{CompositePathCodebook, QuantMode, ValueSource};
use jumpcode::sim::{read_trace, sample_paths, write_trace};
use jumpcode::spaces::{DistortionSpace, Point};
use jumpcode::{CoderConfig, Error, ProcessSpec};

#[derive(Parser)]
#[command(name = "jumpcode", version, about = "Quantize and entropy-code piecewise-constant jump processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample paths and write them as a trace, one record per line.
    Simulate {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map paths to their nearest codeword in the composite codebook.
    Quantize {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value = "destinations")]
        mode: QuantMode,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Trace to quantize; sampled from the process if absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a trace into an archive.
    Encode {
        #[command(flatten)]
        coder: CoderArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode an archive into a trace of reconstructions.
    Decode {
        #[command(flatten)]
        coder: CoderArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo rate–distortion experiment and write CSV.
    Curve(CurveArgs),
    /// Print analytic curves and constants as CSV (r, value, kind, params).
    Bounds {
        #[arg(long, value_enum, default_value = "all")]
        kind: BoundKind,
        /// Comma-separated rates.
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,160")]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Constant of the entropy upper curve.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
        #[arg(long, default_value_t = 1.0)]
        eps0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check optimum ≤ constructed ≤ proof bound on a finite path law.
    Oracle {
        /// Trace of support paths on the two-point space; a built-in
        /// three-path law is used if absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Comma-separated probabilities, uniform if absent.
        #[arg(long, value_delimiter = ',')]
        probs: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "7,8,10,12")]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Time shifts used to widen the candidate pool.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.125,0.125,-0.0625,0.0625")]
        shifts: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct ProcessArgs {
    /// alternating, counting, compound-cube or compound-cantor.
    #[arg(long, alias = "space", default_value = "alternating")]
    family: String,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 40)]
    depth: u32,
}

impl ProcessArgs {
    fn build(&self) -> Result<ProcessSpec> {
        Ok(build_process(&self.family, self.lambda, self.dim, self.depth)?)
    }
}

#[derive(Args)]
struct CoderArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long)]
    rate: f64,
    /// destinations, increments or discrete-exact.
    #[arg(long, default_value = "destinations")]
    mode: CoderMode,
}

impl CoderArgs {
    fn build(&self) -> Result<(ProcessSpec, CoderConfig)> {
        let spec = self.process.build()?;
        let cfg = CoderConfig::for_process(&spec, self.rate, self.mode)?;
        Ok((spec, cfg))
    }
}

#[derive(Args)]
struct CurveArgs {
    /// Flat key = value file; the remaining flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, value_enum, default_value = "entropy")]
    coder: CoderKind,
    #[arg(long, default_value = "destinations")]
    mode: String,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, value_delimiter = ',')]
    rates: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    stratified: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoderKind {
    Quantizer,
    Entropy,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BoundKind {
    All,
    Tauberian,
    QuantUpper,
    QuantLower,
    EntropyUpper,
    EntropyLower,
    CLambda,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn simulate(process: &ProcessArgs, trials: usize, seed: u64, out: &Option<PathBuf>) -> Result<()> {
    let spec = process.build()?;
    let paths = sample_paths(&spec, seed, trials)?;
    let mut w = output(out)?;
    write_trace(&paths, &mut w)?;
    Ok(w.flush()?)
}

#[allow(clippy::too_many_arguments)]
fn quantize(
    process: &ProcessArgs,
    rate: f64,
    mode: QuantMode,
    delta: f64,
    s: f64,
    input: &Option<PathBuf>,
    trials: usize,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<()> {
    let spec = process.build()?;
    let source = ValueSource::from_spec(&spec, mode)?;
    let cb = CompositePathCodebook::new(source, rate, delta, s)?;
    let paths = match input {
        Some(p) => read_trace(&read_text(p)?, &spec.space)?,
        None => sample_paths(&spec, seed, trials)?,
    };
    let mut w = output(out)?;
    writeln!(w, "path,index,distortion")?;
    let mut pairs = Vec::with_capacity(paths.len());
    for (i, x) in paths.iter().enumerate() {
        let (idx, d) = cb.nearest_codeword(x)?;
        writeln!(w, "{i},{idx},{d}")?;
        pairs.push((x.clone(), cb.decode(&idx)?.to_path(cb.space())?));
    }
    w.flush()?;
    let moment = moment_distortion(&pairs, s, cb.space())?;
    eprintln!(
        "codebook: log size {:.4} nats, k0 = {}, eps0 = {:e}; mean distortion (s = {s}) {moment:.6e}",
        cb.log_size(),
        cb.k0(),
        cb.eps0()
    );
    Ok(())
}

fn encode(coder: &CoderArgs, input: &Path, out: &Path) -> Result<()> {
    let (spec, cfg) = coder.build()?;
    let paths = read_trace(&read_text(input)?, &spec.space)?;
    let bytes = encode_archive(&paths, &cfg)?;
    fs::write(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("{} paths, {} bytes", paths.len(), bytes.len());
    Ok(())
}

fn decode(coder: &CoderArgs, input: &Path, out: &Option<PathBuf>) -> Result<()> {
    let (spec, cfg) = coder.build()?;
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let recs = decode_archive(&bytes, &cfg)?;
    let paths = recs.iter().map(|r| r.to_path(&spec.space)).collect::<jumpcode::Result<Vec<_>>>()?;
    let mut w = output(out)?;
    write_trace(&paths, &mut w)?;
    Ok(w.flush()?)
}

fn curve(args: &CurveArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::parse(&read_text(p)?)?,
        None => {
            if args.rates.is_empty() {
                return Err(Error::Config("--rates or --config is required".into()).into());
            }
            let coder = match args.coder {
                CoderKind::Quantizer => CoderDescriptor::Quantizer { mode: args.mode.parse()?, delta: args.delta },
                CoderKind::Entropy => CoderDescriptor::Entropy { mode: args.mode.parse()? },
            };
            let mut cfg = ExperimentConfig::new(args.process.build()?, coder, args.rates.clone());
            cfg.s = args.s;
            cfg.trials = args.trials;
            cfg.seed = args.seed;
            if args.stratified {
                cfg.estimator = Estimator::Stratified;
            }
            cfg.validate()?;
            cfg
        }
    };
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    let points = rate_curve_experiment(&cfg)?;
    if cfg.output.is_none() {
        write_csv(&points, io::stdout().lock())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bounds(
    kind: BoundKind,
    rates: &[f64],
    lambda: f64,
    s: f64,
    gamma: f64,
    constant: f64,
    eps0: f64,
    out: &Option<PathBuf>,
) -> Result<()> {
    let mut w = output(out)?;
    writeln!(w, "r,value,kind,params")?;
    let want = |k: BoundKind| kind == BoundKind::All || kind == k;
    if want(BoundKind::Tauberian) {
        for &r in rates {
            writeln!(w, "{r},{:e},tauberian,c={lambda}", log_tauberian_sum(lambda, r)?.exp())?;
        }
    }
    let envs = [
        (BoundKind::QuantUpper, RateEnvelope::QuantUpper { s, gamma }),
        (BoundKind::QuantLower, RateEnvelope::QuantLower { s, gamma }),
        (BoundKind::EntropyUpper, RateEnvelope::EntropyUpper { lambda, constant }),
        (BoundKind::EntropyLower, RateEnvelope::EntropyLower { lambda, eps0 }),
    ];
    for (k, env) in envs {
        if !want(k) {
            continue;
        }
        for &r in rates {
            // The √(r log r) curves are only defined above their floor.
            if r < env.floor() {
                continue;
            }
            writeln!(w, "{r},{:e},{},{}", env.eval(r)?, env.name(), env.params())?;
        }
    }
    if want(BoundKind::CLambda) {
        writeln!(w, ",{:e},c_lambda,lambda={lambda}", lower_constant_c_lambda(lambda)?)?;
    }
    Ok(w.flush()?)
}

fn three_path_law(space: &DistortionSpace<f64>) -> Result<FinitePathLaw> {
    let jump = |t: f64| JumpPath::new(vec![t], vec![Point::Label(0), Point::Label(1)], space);
    let paths = vec![JumpPath::constant(Point::Label(0), space)?, jump(0.25)?, jump(0.75)?];
    Ok(FinitePathLaw::new(paths, vec![0.5, 0.25, 0.25])?)
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    input: &Option<PathBuf>,
    probs: &[f64],
    rates: &[f64],
    delta: f64,
    s: f64,
    shifts: &[f64],
    out: &Option<PathBuf>,
) -> Result<()> {
    let space = DistortionSpace::two_point();
    let law = match input {
        Some(p) => {
            let paths = read_trace(&read_text(p)?, &space)?;
            let probs = if probs.is_empty() { vec![1.0 / paths.len() as f64; paths.len()] } else { probs.to_vec() };
            FinitePathLaw::new(paths, probs)?
        }
        None => three_path_law(&space)?,
    };
    let candidates = shifted_candidates(&law, &space, shifts);
    let mut w = output(out)?;
    for &r in rates {
        let report = oracle_cross_check(&law, &space, &candidates, r, delta, s)?;
        writeln!(w, "{report}")?;
    }
    Ok(w.flush()?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { process, trials, seed, out } => simulate(&process, trials, seed, &out),
        Command::Quantize { process, rate, mode, delta, s, input, trials, seed, out } => {
            quantize(&process, rate, mode, delta, s, &input, trials, seed, &out)
        }
        Command::Encode { coder, input, out } => encode(&coder, &input, &out),
        Command::Decode { coder, input, out } => decode(&coder, &input, &out),
        Command::Curve(args) => curve(&args),
        Command::Bounds { kind, rates, lambda, s, gamma, constant, eps0, out } => {
            bounds(kind, &rates, lambda, s, gamma, constant, eps0, &out)
        }
        Command::Oracle { input, probs, rates, delta, s, shifts, out } => {
            if rates.is_empty() {
                bail!(Error::Config("no rates given".into()));
            }
            oracle(&input, &probs, &rates, delta, s, &shifts, &out)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Oracle(_)) => 4,
        Some(
            Error::RateTooSmall { .. } | Error::Capacity { .. } | Error::Budget { .. } | Error::Precision(_),
        ) => 3,
        Some(_) => 2,
        None if err.downcast_ref::<io::Error>().is_some() => 1,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

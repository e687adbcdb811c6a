//! Monte Carlo rate–distortion estimation and rate-curve CSV output.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use super::config::{family_name, CoderDescriptor, Estimator, ExperimentConfig};
use crate::bounds::{entropy_upper_constant, RateEnvelope};
use crate::entropycoder::{decode_path, encode_path, path_symbol, CoderConfig, CoderMode};
use crate::error::{Error, Result};
use crate::paths::{path_distortion, JumpPath};
use crate::quantizer::bigmath::index_width;
use crate::quantizer::{composite_codebook, increment_gamma, CompositePathCodebook};
use crate::sim::{substream, IncrementLaw, ProcessFamily, ProcessSpec};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Tail mass of the jump count left out of the stratified estimator.
pub const STRATUM_TAIL: f64 = 1e-25;

pub const CSV_HEADER: [&str; 16] = [
    "rate_nominal_nats",
    "rate_bits",
    "rate_nats",
    "entropy_nats",
    "distortion",
    "stderr",
    "trials",
    "seed",
    "family",
    "lambda",
    "s",
    "coder",
    "mode",
    "gamma",
    "envelope_upper",
    "envelope_lower",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RateCurvePoint {
    pub rate_nominal: f64,
    /// Mean record length (entropy coder) or index width (quantizer).
    pub rate_bits: f64,
    pub rate_nats: f64,
    pub entropy_nats: f64,
    /// `(E ρ_D^s)^{1/s}` estimate.
    pub distortion: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub family: String,
    pub lambda: f64,
    pub s: f64,
    pub coder: String,
    pub mode: String,
    pub gamma: f64,
    pub envelope_upper: f64,
    pub envelope_lower: f64,
    /// `(E ρ_D^s)^{1/s}` bound along the construction's error chain (quantizer only).
    pub proof_bound: Option<f64>,
}

impl RateCurvePoint {
    pub fn csv_record(&self) -> [String; 16] {
        [
            self.rate_nominal.to_string(),
            self.rate_bits.to_string(),
            self.rate_nats.to_string(),
            self.entropy_nats.to_string(),
            self.distortion.to_string(),
            self.stderr.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
            self.family.clone(),
            self.lambda.to_string(),
            self.s.to_string(),
            self.coder.clone(),
            self.mode.clone(),
            self.gamma.to_string(),
            self.envelope_upper.to_string(),
            self.envelope_lower.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(points: &[RateCurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record(p.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// One trial: `ρ_D^s`, record bits (or index width) and a reconstruction symbol.
#[derive(Clone, Debug)]
struct Trial {
    dist_s: f64,
    bits: f64,
    symbol: String,
}

/// Trial groups with their weights: one group of weight 1 for plain
/// sampling, one group per jump count for the stratified estimator.
struct Sample {
    groups: Vec<(f64, Vec<Trial>)>,
}

impl Sample {
    fn mean_of(&self, f: impl Fn(&Trial) -> f64) -> f64 {
        self.groups
            .iter()
            .filter(|(_, g)| !g.is_empty())
            .map(|(w, g)| w * g.iter().map(&f).sum::<f64>() / g.len() as f64)
            .sum()
    }

    fn entropy(&self) -> f64 {
        let mut mass: BTreeMap<&str, f64> = BTreeMap::new();
        for (w, g) in &self.groups {
            for t in g {
                *mass.entry(t.symbol.as_str()).or_default() += w / g.len() as f64;
            }
        }
        let total: f64 = mass.values().sum();
        mass.values().map(|m| m / total).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum::<f64>().max(0.0)
    }

    /// Bootstrap standard error of `(Σ w E d^s)^{1/s}`, resampling within groups.
    fn bootstrap_stderr(&self, s: f64, seed: u64, stream: u64) -> f64 {
        let mut rng = substream(seed ^ 0xB007_57A9_0000_0000, stream);
        let stats: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let mut m = 0.0;
                for (w, g) in &self.groups {
                    if g.is_empty() {
                        continue;
                    }
                    let n = g.len();
                    let sum: f64 = (0..n).map(|_| g[rng.random_range(0..n)].dist_s).sum();
                    m += w * sum / n as f64;
                }
                m.powf(1.0 / s)
            })
            .collect();
        let mean = stats.iter().sum::<f64>() / stats.len() as f64;
        (stats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (stats.len() - 1) as f64).sqrt()
    }
}

/// A compiled coder at one rate.
pub enum RateCoder {
    Quantizer(CompositePathCodebook<f64>),
    Entropy(CoderConfig<f64>),
}

impl RateCoder {
    pub fn build(spec: &ProcessSpec<f64>, coder: CoderDescriptor, s: f64, r: f64) -> Result<Self> {
        Ok(match coder {
            CoderDescriptor::Quantizer { mode, delta } => {
                RateCoder::Quantizer(composite_codebook(spec, r, delta, s, mode)?)
            }
            CoderDescriptor::Entropy { mode } => RateCoder::Entropy(CoderConfig::for_process(spec, r, mode)?),
        })
    }

    fn trial(&self, x: &JumpPath<f64>, s: f64) -> Result<Trial> {
        match self {
            RateCoder::Quantizer(cb) => {
                let (idx, d) = cb.nearest_codeword(x)?;
                Ok(Trial { dist_s: d.powf(s), bits: index_width(cb.size()) as f64, symbol: idx.to_string() })
            }
            RateCoder::Entropy(cfg) => {
                let b = encode_path(x, cfg)?;
                let y = decode_path(&b, cfg)?;
                let d = path_distortion(x, &y, cfg.space())?;
                Ok(Trial { dist_s: d.powf(s), bits: b.len() as f64, symbol: path_symbol(&y, cfg.space())? })
            }
        }
    }
}

/// Smallest `K` with `P(N > K) < STRATUM_TAIL` (or the truncation point).
pub fn stratum_cap(spec: &ProcessSpec<f64>) -> usize {
    let mut cdf = 0.0;
    let mut k = 0;
    loop {
        cdf += spec.count_pmf(k);
        let mut tail = 0.0;
        let mut j = k + 1;
        loop {
            let p = spec.count_pmf(j);
            tail += p;
            if (j as f64 > spec.lambda && p < 1e-40) || j > k + 10_000 {
                break;
            }
            j += 1;
        }
        if tail < STRATUM_TAIL || cdf >= 1.0 && tail == 0.0 {
            return k;
        }
        k += 1;
    }
}

fn run_trials(cfg: &ExperimentConfig, coder: &RateCoder) -> Result<Sample> {
    let spec = &cfg.process;
    match cfg.estimator {
        Estimator::Plain => {
            let trials = (0..cfg.trials)
                .into_par_iter()
                .map(|i| {
                    let x = spec.sample(&mut substream(cfg.seed, i as u64))?;
                    coder.trial(&x, cfg.s)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Sample { groups: vec![(1.0, trials)] })
        }
        Estimator::Stratified => {
            let cap = stratum_cap(spec);
            let strata: Vec<usize> = (0..=cap).filter(|&k| spec.count_pmf(k) > 0.0).collect();
            let per = cfg.trials / strata.len();
            let extra = cfg.trials % strata.len();
            let mut groups = Vec::with_capacity(strata.len());
            for (si, &k) in strata.iter().enumerate() {
                let n = per + usize::from(si < extra);
                let trials = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = substream(cfg.seed, ((k as u64) << 32) | i as u64);
                        let x = spec.sample_given_count(k, &mut rng)?;
                        coder.trial(&x, cfg.s)
                    })
                    .collect::<Result<Vec<_>>>()?;
                groups.push((spec.count_pmf(k), trials));
            }
            Ok(Sample { groups })
        }
    }
}

/// `ε₀`: a lower bound on the size of every jump, if the process has one.
pub fn min_jump_size(spec: &ProcessSpec<f64>) -> Option<f64> {
    if !spec.space.is_metric() {
        return None;
    }
    match &spec.family {
        ProcessFamily::AlternatingPoisson | ProcessFamily::DiscreteStateGeneral { .. } => {
            spec.space.min_positive_distortion()
        }
        ProcessFamily::CompoundPoisson(IncrementLaw::PointMass(z)) => {
            Some(z.iter().fold(0.0f64, |m, c| m.max(c.abs())))
        }
        ProcessFamily::CompoundPoisson(IncrementLaw::Finite { points, probs }) => points
            .iter()
            .zip(probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(z, _)| z.iter().fold(0.0f64, |m, c| m.max(c.abs())))
            .reduce(f64::min),
        ProcessFamily::CompoundPoisson(_) => None,
    }
}

/// The upper constant `C` in `D ≤ C e^{−r/λ}` for an entropy coder.
///
/// When values are coded without error the only error is on the set where
/// the quantized jump times disagree, giving `(K (2wκ)^s (1−e^{−λ}))^{1/s}`
/// with `w` the diameter (or the largest jump). Otherwise the value error
/// adds, giving `(K (2e^{−λ} + C_s 2^s ((wκ)^s + 1)(1 − e^{−λ})))^{1/s}`.
/// `None` for increment coding with inexact increments.
pub fn entropy_upper_envelope_constant(spec: &ProcessSpec<f64>, cfg: &CoderConfig<f64>, s: f64) -> Option<f64> {
    let k_const = spec.k_constant();
    let kappa = cfg.kappa_max();
    let lambda = cfg.lambda();
    let exact_values = match cfg.mode() {
        CoderMode::DiscreteExact => true,
        CoderMode::Destinations => spec.space.alphabet_size().is_some_and(|q| cfg.log_value_alphabet() >= (q as f64).ln() - 1e-12),
        CoderMode::Increments => matches!(spec.increment_law(), Some(IncrementLaw::PointMass(_))),
    };
    let w = match cfg.mode() {
        CoderMode::Increments => spec.increment_law()?.sup_norm(),
        _ => spec.space.diameter()?,
    };
    if exact_values {
        return Some(entropy_upper_constant(k_const, w, kappa, s, lambda));
    }
    if cfg.mode() == CoderMode::Increments {
        return None;
    }
    let cs = 2f64.powf(s - 1.0).max(1.0);
    let inner = 2.0 * (-lambda).exp() + cs * 2f64.powf(s) * ((w * kappa).powf(s) + 1.0) * -(-lambda).exp_m1();
    Some((k_const * inner).powf(1.0 / s))
}

/// Runs the experiment over the rate ladder.
pub fn mc_distortion(cfg: &ExperimentConfig) -> Result<Vec<RateCurvePoint>> {
    cfg.validate()?;
    let spec = &cfg.process;
    let gamma = match (&cfg.coder, spec.increment_law()) {
        (CoderDescriptor::Quantizer { mode: crate::quantizer::QuantMode::Increments, .. }, Some(law))
        | (CoderDescriptor::Entropy { mode: CoderMode::Increments }, Some(law)) => increment_gamma(law),
        _ => spec.space.box_dimension().unwrap_or(f64::NAN),
    };
    let mut out = Vec::with_capacity(cfg.rate_ladder.len());
    for (ri, &r) in cfg.rate_ladder.iter().enumerate() {
        let coder = RateCoder::build(spec, cfg.coder, cfg.s, r)?;
        let sample = run_trials(cfg, &coder)?;
        let dist_s = sample.mean_of(|t| t.dist_s);
        let distortion = dist_s.powf(1.0 / cfg.s);
        let stderr = sample.bootstrap_stderr(cfg.s, cfg.seed, ri as u64);
        let entropy = sample.entropy();
        let (rate_bits, rate_nats, upper, lower, proof_bound) = match &coder {
            RateCoder::Quantizer(cb) => {
                let bits = index_width(cb.size()) as f64;
                let up = RateEnvelope::QuantUpper { s: cfg.s, gamma }.eval(r).unwrap_or(f64::NAN);
                let lower_gamma = match spec.increment_law() {
                    Some(IncrementLaw::UniformCube { dim }) => *dim as f64,
                    _ => 0.0,
                };
                let lo = RateEnvelope::QuantLower { s: cfg.s, gamma: lower_gamma }.eval(r).unwrap_or(f64::NAN);
                let bound = cb.proof_bound_for(spec).powf(1.0 / cfg.s);
                (bits, cb.log_size(), up, lo, Some(bound))
            }
            RateCoder::Entropy(cc) => {
                let bits = sample.mean_of(|t| t.bits);
                let up = entropy_upper_envelope_constant(spec, cc, cfg.s)
                    .map_or(f64::NAN, |c| RateEnvelope::EntropyUpper { lambda: spec.lambda, constant: c }.eval(r).unwrap_or(f64::NAN));
                let lo = min_jump_size(spec).map_or(f64::NAN, |eps0| {
                    RateEnvelope::EntropyLower { lambda: spec.lambda, eps0 }.eval(entropy).unwrap_or(f64::NAN)
                });
                (bits, bits * std::f64::consts::LN_2, up, lo, None)
            }
        };
        out.push(RateCurvePoint {
            rate_nominal: r,
            rate_bits,
            rate_nats,
            entropy_nats: entropy,
            distortion,
            stderr,
            trials: cfg.trials,
            seed: cfg.seed,
            family: family_name(spec).to_string(),
            lambda: spec.lambda,
            s: cfg.s,
            coder: cfg.coder.name().to_string(),
            mode: cfg.coder.mode_name(),
            gamma,
            envelope_upper: upper,
            envelope_lower: lower,
            proof_bound,
        });
    }
    Ok(out)
}

/// [`mc_distortion`] plus CSV output to `cfg.output` when set.
pub fn rate_curve_experiment(cfg: &ExperimentConfig) -> Result<Vec<RateCurvePoint>> {
    let points = mc_distortion(cfg)?;
    if let Some(path) = &cfg.output {
        let file = std::fs::File::create(path)?;
        write_csv(&points, std::io::BufWriter::new(file))?;
    }
    Ok(points)
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("need at least two paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("x values are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

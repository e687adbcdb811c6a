//! Experiment configuration and its flat `key = value` file format.

use std::path::PathBuf;

use crate::entropycoder::CoderMode;
use crate::error::{Error, Result};
use crate::quantizer::QuantMode;
use crate::sim::{IncrementLaw, ProcessFamily, ProcessSpec};
use crate::spaces::DEFAULT_CANTOR_DEPTH;

pub const MIN_TRIALS: usize = 100;
pub const DEFAULT_TRIALS: usize = 10_000;

/// Which scheme an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoderDescriptor {
    /// Composite fixed-size codebook with nearest-codeword search.
    Quantizer { mode: QuantMode, delta: f64 },
    /// Variable-rate coder, encode then decode.
    Entropy { mode: CoderMode },
}

impl CoderDescriptor {
    pub fn name(&self) -> &'static str {
        match self {
            CoderDescriptor::Quantizer { .. } => "quantizer",
            CoderDescriptor::Entropy { .. } => "entropy",
        }
    }

    pub fn mode_name(&self) -> String {
        match self {
            CoderDescriptor::Quantizer { mode, .. } => mode.to_string(),
            CoderDescriptor::Entropy { mode } => mode.to_string(),
        }
    }
}

/// How the `s`-moment is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// i.i.d. sample paths.
    Plain,
    /// Trials split evenly across jump counts, weighted by the count law.
    Stratified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub process: ProcessSpec<f64>,
    pub coder: CoderDescriptor,
    pub s: f64,
    pub rate_ladder: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub estimator: Estimator,
}

impl ExperimentConfig {
    pub fn new(process: ProcessSpec<f64>, coder: CoderDescriptor, rate_ladder: Vec<f64>) -> Self {
        Self {
            process,
            coder,
            s: 1.0,
            rate_ladder,
            trials: DEFAULT_TRIALS,
            seed: 0,
            output: None,
            estimator: Estimator::Plain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!("trials must be at least {MIN_TRIALS}, got {}", self.trials)));
        }
        if self.rate_ladder.is_empty() {
            return Err(Error::Config("empty rate ladder".into()));
        }
        if self.rate_ladder.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(format!("rate ladder must be strictly increasing: {:?}", self.rate_ladder)));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Config(format!("moment order must be positive, got {}", self.s)));
        }
        Ok(())
    }

    /// Parses the flat format: one `key = value` per line, `#` comments.
    ///
    /// Keys: `family` (`alternating`, `counting`, `compound-cube`,
    /// `compound-cantor`), `lambda`, `dim`, `depth`, `coder` (`quantizer`,
    /// `entropy`), `mode`, `delta`, `s`, `rates` (comma-separated), `trials`,
    /// `seed`, `output`, `estimator` (`plain`, `stratified`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = std::collections::BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {}", n + 1, k.trim())));
            }
        }
        let take = |k: &str| kv.get(k).map(String::as_str);
        let num = |k: &str, default: Option<f64>| -> Result<f64> {
            match take(k) {
                Some(v) => v.parse().map_err(|_| Error::Config(format!("{k}: not a number: {v}"))),
                None => default.ok_or_else(|| Error::Config(format!("missing key {k}"))),
            }
        };
        let lambda = num("lambda", None)?;
        let dim = num("dim", Some(1.0))? as usize;
        let depth = num("depth", Some(DEFAULT_CANTOR_DEPTH as f64))? as u32;
        let family = take("family").ok_or_else(|| Error::Config("missing key family".into()))?;
        let process = build_process(family, lambda, dim, depth)?;
        let coder = match take("coder").unwrap_or("entropy") {
            "quantizer" => CoderDescriptor::Quantizer {
                mode: take("mode").unwrap_or("destinations").parse()?,
                delta: num("delta", Some(0.1))?,
            },
            "entropy" => CoderDescriptor::Entropy { mode: take("mode").unwrap_or("destinations").parse()? },
            other => return Err(Error::Config(format!("unknown coder {other:?}"))),
        };
        let rates = take("rates")
            .ok_or_else(|| Error::Config("missing key rates".into()))?
            .split(',')
            .map(|r| r.trim().parse::<f64>().map_err(|_| Error::Config(format!("rates: not a number: {r}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut cfg = ExperimentConfig::new(process, coder, rates);
        cfg.s = num("s", Some(1.0))?;
        cfg.trials = num("trials", Some(DEFAULT_TRIALS as f64))? as usize;
        cfg.seed = match take("seed") {
            Some(v) => v.parse().map_err(|_| Error::Config(format!("seed: not an integer: {v}")))?,
            None => 0,
        };
        cfg.output = take("output").map(PathBuf::from);
        cfg.estimator = match take("estimator").unwrap_or("plain") {
            "plain" => Estimator::Plain,
            "stratified" => Estimator::Stratified,
            other => return Err(Error::Config(format!("unknown estimator {other:?}"))),
        };
        let known = [
            "family", "lambda", "dim", "depth", "coder", "mode", "delta", "s", "rates", "trials", "seed", "output",
            "estimator",
        ];
        if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key {k}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A process from its family name.
pub fn build_process(family: &str, lambda: f64, dim: usize, depth: u32) -> Result<ProcessSpec<f64>> {
    let spec = match family {
        "alternating" => ProcessSpec::alternating(lambda),
        "counting" => ProcessSpec::counting(lambda),
        "compound-cube" => ProcessSpec::compound_poisson(IncrementLaw::UniformCube { dim }, lambda),
        "compound-cantor" => ProcessSpec::compound_poisson(IncrementLaw::CantorUniform { depth }, lambda),
        other => return Err(Error::Config(format!("unknown process family {other:?}"))),
    };
    spec.map_err(|e| Error::Config(e.to_string()))
}

/// Short name of a process family, as written to CSV.
pub fn family_name(spec: &ProcessSpec<f64>) -> &'static str {
    match &spec.family {
        ProcessFamily::AlternatingPoisson => "alternating",
        ProcessFamily::DiscreteStateGeneral { .. } => "discrete-general",
        ProcessFamily::CompoundPoisson(IncrementLaw::PointMass(_)) => "counting",
        ProcessFamily::CompoundPoisson(IncrementLaw::UniformCube { .. }) => "compound-cube",
        ProcessFamily::CompoundPoisson(IncrementLaw::CantorUniform { .. }) => "compound-cantor",
        ProcessFamily::CompoundPoisson(IncrementLaw::Finite { .. }) => "compound-finite",
    }
}

//! Samplers for compound Poisson, alternating Poisson and general
//! discrete-state jump processes.
//!
//! All randomness flows through an explicit RNG. [`substream`] derives
//! independent, reproducible ChaCha8 streams from a 64-bit seed so that
//! parallel trials do not depend on scheduling.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::paths::JumpPath;
use crate::scalar::Scalar;
use crate::spaces::{DistortionSpace, Point};

/// Above this intensity Poisson counts come from `rand_distr` instead of inversion.
pub const INVERSION_MAX_LAMBDA: f64 = 30.0;

/// Stream `stream` of the generator seeded with `seed`.
///
/// ChaCha8 keyed by `seed_from_u64(seed)` with its 64-bit stream id set to
/// `stream`; distinct stream ids give non-overlapping keystreams.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `P(N = k)` for `N ~ Poisson(λ)`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp()
}

pub fn ln_factorial(k: usize) -> f64 {
    crate::bounds::special::ln_gamma(k as f64 + 1.0)
}

/// Poisson count by sequential inversion for small λ.
pub fn sample_poisson_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> usize {
    if lambda > INVERSION_MAX_LAMBDA {
        let d = rand_distr::Poisson::new(lambda).expect("λ is positive and finite");
        return d.sample(rng) as usize;
    }
    let u: f64 = rng.random();
    let mut k = 0usize;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // The cap guards against u landing in the rounding gap 1 − Σ pmf.
    while u >= cdf && k < 10_000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    k
}

/// `k` sorted, distinct, nonzero uniform times in `(0,1)`.
pub fn sample_uniform_times<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        t.sort_by(f64::total_cmp);
        if t.first().is_none_or(|&x| x > 0.0) && t.windows(2).all(|w| w[0] < w[1]) {
            return t;
        }
    }
}

/// Jump times of a Poisson point process with intensity `λ` on `[0,1)`.
pub fn sample_poisson_jump_times<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let k = sample_poisson_count(lambda, rng);
    Ok(sample_uniform_times(k, rng))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("intensity must be positive, got {lambda}")))
    }
}

/// Law of the jump count `N`.
#[derive(Clone, Debug, PartialEq)]
pub enum CountLaw {
    Poisson,
    /// Poisson conditioned on `N ≤ max`; satisfies `P(N=k) ≤ K·λ^k e^{−λ}/k!`
    /// with `K = 1/P(Poisson ≤ max)`.
    TruncatedPoisson { max: usize },
}

impl CountLaw {
    /// The smallest `K` with `P(N=k) ≤ K·Poisson(λ)(k)` for all `k`.
    pub fn k_constant(&self, lambda: f64) -> f64 {
        match self {
            CountLaw::Poisson => 1.0,
            CountLaw::TruncatedPoisson { max } => 1.0 / (0..=*max).map(|k| poisson_pmf(lambda, k)).sum::<f64>(),
        }
    }

    pub fn pmf(&self, lambda: f64, k: usize) -> f64 {
        match self {
            CountLaw::Poisson => poisson_pmf(lambda, k),
            CountLaw::TruncatedPoisson { max } if k > *max => 0.0,
            CountLaw::TruncatedPoisson { .. } => poisson_pmf(lambda, k) * self.k_constant(lambda),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> usize {
        loop {
            let k = sample_poisson_count(lambda, rng);
            match self {
                CountLaw::TruncatedPoisson { max } if k > *max => continue,
                _ => return k,
            }
        }
    }
}

/// Distribution of a compound Poisson increment `Z`, with `P(Z = 0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum IncrementLaw<T> {
    /// Uniform on `[0,1]^dim`.
    UniformCube { dim: usize },
    /// Finitely many nonzero vectors with probabilities.
    Finite { points: Vec<Vec<T>>, probs: Vec<f64> },
    /// Coin-flip ternary digits in `{0,2}` to the given depth.
    CantorUniform { depth: u32 },
    /// Deterministic increment.
    PointMass(Vec<T>),
}

impl<T: Scalar> IncrementLaw<T> {
    pub fn validate(&self) -> Result<()> {
        let nonzero = |v: &[T]| v.iter().any(|x| *x != T::zero());
        match self {
            IncrementLaw::UniformCube { dim } if *dim == 0 => Err(Error::Domain("dimension must be positive".into())),
            IncrementLaw::UniformCube { .. } => Ok(()),
            IncrementLaw::CantorUniform { depth } if *depth == 0 || *depth > 60 => {
                Err(Error::Domain(format!("Cantor depth {depth} outside 1..=60")))
            }
            IncrementLaw::CantorUniform { .. } => Ok(()),
            IncrementLaw::PointMass(z) => {
                if z.is_empty() || !nonzero(z) || z.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Domain("point-mass increment must be a finite nonzero vector".into()));
                }
                Ok(())
            }
            IncrementLaw::Finite { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    return Err(Error::Domain("finite increment law needs one probability per point".into()));
                }
                let d = points[0].len();
                if d == 0 || points.iter().any(|p| p.len() != d) {
                    return Err(Error::Domain("increment points must share a positive dimension".into()));
                }
                if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || probs.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::Domain("increment probabilities must be nonnegative with positive sum".into()));
                }
                if points.iter().zip(probs).any(|(z, &p)| p > 0.0 && !nonzero(z)) {
                    return Err(Error::Domain("P(Z = 0) must be zero".into()));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            IncrementLaw::UniformCube { dim } => *dim,
            IncrementLaw::CantorUniform { .. } => 1,
            IncrementLaw::PointMass(z) => z.len(),
            IncrementLaw::Finite { points, .. } => points[0].len(),
        }
    }

    /// `sup ‖z‖_∞` over the support.
    pub fn sup_norm(&self) -> f64 {
        match self {
            IncrementLaw::UniformCube { .. } | IncrementLaw::CantorUniform { .. } => 1.0,
            IncrementLaw::PointMass(z) => z.iter().map(|x| x.f64().abs()).fold(0.0, f64::max),
            IncrementLaw::Finite { points, probs } => points
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .flat_map(|(z, _)| z.iter().map(|x| x.f64().abs()))
                .fold(0.0, f64::max),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            IncrementLaw::UniformCube { dim } => (0..*dim).map(|_| T::of(rng.random::<f64>())).collect(),
            IncrementLaw::CantorUniform { depth } => {
                let mut x = 0.0;
                for _ in 0..*depth {
                    x = (x + if rng.random::<bool>() { 2.0 } else { 0.0 }) / 3.0;
                }
                // Digits were accumulated last-first; the law is symmetric under reversal.
                vec![T::of(x)]
            }
            IncrementLaw::PointMass(z) => z.clone(),
            IncrementLaw::Finite { points, probs } => {
                let w = WeightedIndex::new(probs).expect("validated weights");
                points[w.sample(rng)].clone()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProcessFamily<T> {
    /// `X(t) = Σ_{i ≤ N(t)} Z_i`, starting at 0 in `R^d`.
    CompoundPoisson(IncrementLaw<T>),
    /// `0, 1, 0, 1, …` on the two-point space.
    AlternatingPoisson,
    /// Initial law and a jump-destination kernel on a finite space; the
    /// kernel row of the current state gives the next state's law.
    DiscreteStateGeneral { initial: Vec<f64>, kernel: Vec<Vec<f64>> },
}

/// A jump process: family, intensity `λ`, count law and state space.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSpec<T> {
    pub family: ProcessFamily<T>,
    pub lambda: f64,
    pub counts: CountLaw,
    pub space: DistortionSpace<T>,
}

impl<T: Scalar> ProcessSpec<T> {
    pub fn compound_poisson(law: IncrementLaw<T>, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        law.validate()?;
        let space = DistortionSpace::real_vector(law.dim())?;
        Ok(Self { family: ProcessFamily::CompoundPoisson(law), lambda, counts: CountLaw::Poisson, space })
    }

    /// Compound Poisson with `Z ≡ 1`.
    pub fn counting(lambda: f64) -> Result<Self> {
        Self::compound_poisson(IncrementLaw::PointMass(vec![T::one()]), lambda)
    }

    pub fn alternating(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            family: ProcessFamily::AlternatingPoisson,
            lambda,
            counts: CountLaw::Poisson,
            space: DistortionSpace::two_point(),
        })
    }

    pub fn discrete_general(
        space: DistortionSpace<T>,
        initial: Vec<f64>,
        kernel: Vec<Vec<f64>>,
        lambda: f64,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        let q = space
            .alphabet_size()
            .ok_or_else(|| Error::Domain("general discrete process needs a finite space".into()))?;
        let law_ok = |w: &[f64]| {
            w.len() == q && w.iter().all(|&p| p >= 0.0 && p.is_finite()) && w.iter().sum::<f64>() > 0.0
        };
        if !law_ok(&initial) {
            return Err(Error::Domain("initial law must be a weight vector over the alphabet".into()));
        }
        if kernel.len() != q || !kernel.iter().all(|row| law_ok(row)) {
            return Err(Error::Domain("kernel must have one weight row per state".into()));
        }
        if let Some(i) = (0..q).find(|&i| kernel[i][i] > 0.0) {
            return Err(Error::Domain(format!("kernel self-loop at state {i}")));
        }
        Ok(Self {
            family: ProcessFamily::DiscreteStateGeneral { initial, kernel },
            lambda,
            counts: CountLaw::Poisson,
            space,
        })
    }

    pub fn with_counts(mut self, counts: CountLaw) -> Self {
        self.counts = counts;
        self
    }

    /// The constant `K` in `P(N = k) ≤ K λ^k e^{−λ}/k!`.
    pub fn k_constant(&self) -> f64 {
        self.counts.k_constant(self.lambda)
    }

    pub fn count_pmf(&self, k: usize) -> f64 {
        self.counts.pmf(self.lambda, k)
    }

    /// Whether `X(0)` is deterministic.
    pub fn deterministic_start(&self) -> bool {
        match &self.family {
            ProcessFamily::CompoundPoisson(_) | ProcessFamily::AlternatingPoisson => true,
            ProcessFamily::DiscreteStateGeneral { initial, .. } => initial.iter().filter(|&&p| p > 0.0).count() == 1,
        }
    }

    pub fn increment_law(&self) -> Option<&IncrementLaw<T>> {
        match &self.family {
            ProcessFamily::CompoundPoisson(law) => Some(law),
            _ => None,
        }
    }

    /// One path of the process.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<JumpPath<T>> {
        let k = self.counts.sample(self.lambda, rng);
        self.sample_given_count(k, rng)
    }

    /// One path conditioned on exactly `k` jumps.
    pub fn sample_given_count<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<JumpPath<T>> {
        let times = sample_uniform_times(k, rng);
        match &self.family {
            ProcessFamily::CompoundPoisson(law) => {
                let mut x = vec![T::zero(); law.dim()];
                let mut values = vec![Point::Vector(x.clone())];
                for _ in 0..k {
                    let z = law.sample(rng);
                    if z.iter().all(|c| *c == T::zero()) {
                        return Err(Error::Internal("increment sampler returned 0".into()));
                    }
                    for (a, b) in x.iter_mut().zip(&z) {
                        *a = *a + *b;
                    }
                    values.push(Point::Vector(x.clone()));
                }
                Ok(JumpPath::from_parts(times, values))
            }
            ProcessFamily::AlternatingPoisson => {
                let values = (0..=k).map(|i| Point::Label(i % 2)).collect();
                Ok(JumpPath::from_parts(times, values))
            }
            ProcessFamily::DiscreteStateGeneral { initial, kernel } => {
                let init = WeightedIndex::new(initial).expect("validated weights");
                let rows: Vec<_> = kernel.iter().map(|r| WeightedIndex::new(r).expect("validated weights")).collect();
                let mut state = init.sample(rng);
                let mut values = vec![Point::Label(state)];
                for _ in 0..k {
                    state = rows[state].sample(rng);
                    values.push(Point::Label(state));
                }
                Ok(JumpPath::from_parts(times, values))
            }
        }
    }
}

pub fn sample_compound_poisson<T: Scalar, R: Rng + ?Sized>(spec: &ProcessSpec<T>, rng: &mut R) -> Result<JumpPath<T>> {
    match spec.family {
        ProcessFamily::CompoundPoisson(_) => spec.sample(rng),
        _ => Err(Error::Domain("not a compound Poisson spec".into())),
    }
}

pub fn sample_alternating_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<JumpPath<f64>> {
    ProcessSpec::alternating(lambda)?.sample(rng)
}

pub fn sample_discrete_general<T: Scalar, R: Rng + ?Sized>(spec: &ProcessSpec<T>, rng: &mut R) -> Result<JumpPath<T>> {
    match spec.family {
        ProcessFamily::DiscreteStateGeneral { .. } => spec.sample(rng),
        _ => Err(Error::Domain("not a general discrete-state spec".into())),
    }
}

/// `n` paths, path `i` drawn from `substream(seed, i)`.
pub fn sample_paths<T: Scalar>(spec: &ProcessSpec<T>, seed: u64, n: usize) -> Result<Vec<JumpPath<T>>> {
    (0..n).map(|i| spec.sample(&mut substream(seed, i as u64))).collect()
}

/// One path record per line.
pub fn write_trace<T: Scalar, W: Write>(paths: &[JumpPath<T>], mut out: W) -> Result<()> {
    for p in paths {
        writeln!(out, "{p}")?;
    }
    Ok(())
}

pub fn read_trace<T: Scalar>(text: &str, space: &DistortionSpace<T>) -> Result<Vec<JumpPath<T>>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| JumpPath::from_record(l, space))
        .collect()
}

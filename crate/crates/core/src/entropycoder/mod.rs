//! Variable-rate path coder: a jump-count prefix, an ordered-grid position
//! index and fixed-width value indices per record.

pub mod bits;

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigUint;

pub use bits::{BitReader, BitStream, MAGIC, VERSION};

use crate::error::{Error, Result};
use crate::paths::{PiecewiseConstant, Reconstruction};
use crate::quantizer::bigmath::index_width;
use crate::quantizer::{midpoint_product_codebook, ordered_codebook_for_rate, IncrementNet, PositionCodebook};
use crate::scalar::Scalar;
use crate::sim::{poisson_pmf, IncrementLaw, ProcessSpec};
use crate::spaces::{DistortionSpace, EpsNet, Point};

/// Poisson tail mass allowed beyond the default `k_max`.
pub const K_MAX_TAIL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoderMode {
    /// Initial value and destinations, each to the nearest ε-net point.
    Destinations,
    /// Increments to the nearest point of an increment net; fixed start.
    Increments,
    /// Exact symbols of a finite alphabet.
    DiscreteExact,
}

impl std::fmt::Display for CoderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CoderMode::Destinations => "destinations",
            CoderMode::Increments => "increments",
            CoderMode::DiscreteExact => "discrete-exact",
        })
    }
}

impl std::str::FromStr for CoderMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "destinations" => Ok(CoderMode::Destinations),
            "increments" => Ok(CoderMode::Increments),
            "discrete-exact" | "discrete_exact" | "exact" => Ok(CoderMode::DiscreteExact),
            _ => Err(Error::Config(format!("unknown coder mode {s:?}"))),
        }
    }
}

/// Smallest `k` with `P(N > k) < 10⁻¹²` for `N ~ Poisson(λ)`.
pub fn default_k_max(lambda: f64) -> usize {
    let mut cdf = 0.0;
    let mut k = 0;
    loop {
        cdf += poisson_pmf(lambda, k);
        // Compare the tail through the remaining terms once the cdf saturates.
        let tail = if cdf > 0.5 { tail_from(lambda, k) } else { 1.0 - cdf };
        if tail < K_MAX_TAIL {
            return k;
        }
        k += 1;
    }
}

fn tail_from(lambda: f64, k: usize) -> f64 {
    let mut sum = 0.0;
    let mut j = k + 1;
    loop {
        let p = poisson_pmf(lambda, j);
        sum += p;
        if p < 1e-30 * sum.max(1e-300) || (j as f64 > lambda && p == 0.0) {
            return sum;
        }
        j += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
enum ValueTable<T> {
    Net(EpsNet<T>),
    Exact { q: usize },
    Increments { net: IncrementNet<T>, x0: Vec<T> },
}

/// Per-`k` position codebook and whether it is the single-centre fallback.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionTable {
    pub codebook: PositionCodebook,
    pub fallback: bool,
    pub width: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoderConfig<T> {
    lambda: f64,
    r: f64,
    space: DistortionSpace<T>,
    mode: CoderMode,
    k_max: usize,
    values: ValueTable<T>,
    value_width: u32,
    positions: Vec<Option<PositionTable>>,
}

impl<T: Scalar> CoderConfig<T> {
    /// Coder for paths with values in `space` (destination or exact modes).
    pub fn new(lambda: f64, r: f64, space: DistortionSpace<T>, mode: CoderMode) -> Result<Self> {
        Self::build(lambda, r, space, mode, None, default_k_max(lambda))
    }

    /// Coder for paths of `spec`; increment mode takes the law and start from it.
    pub fn for_process(spec: &ProcessSpec<T>, r: f64, mode: CoderMode) -> Result<Self> {
        let inc = match mode {
            CoderMode::Increments => {
                if !spec.deterministic_start() {
                    return Err(Error::Mode("increment coding needs a deterministic start".into()));
                }
                let law = spec
                    .increment_law()
                    .ok_or_else(|| Error::Mode("increment coding needs a compound Poisson process".into()))?;
                Some((law.clone(), vec![T::zero(); law.dim()]))
            }
            _ => None,
        };
        Self::build(spec.lambda, r, spec.space.clone(), mode, inc, default_k_max(spec.lambda))
    }

    /// Coder for increments of `law` starting at `x0`.
    pub fn increments(lambda: f64, r: f64, law: IncrementLaw<T>, x0: Vec<T>) -> Result<Self> {
        let space = DistortionSpace::real_vector(x0.len())?;
        Self::build(lambda, r, space, CoderMode::Increments, Some((law, x0)), default_k_max(lambda))
    }

    pub fn with_k_max(mut self, k_max: usize) -> Result<Self> {
        self.k_max = k_max;
        self.positions = position_tables(self.lambda, self.r, k_max)?;
        Ok(self)
    }

    fn build(
        lambda: f64,
        r: f64,
        space: DistortionSpace<T>,
        mode: CoderMode,
        inc: Option<(IncrementLaw<T>, Vec<T>)>,
        k_max: usize,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
        }
        if !r.is_finite() {
            return Err(Error::Domain(format!("rate must be finite, got {r}")));
        }
        let floor = lambda * std::f64::consts::LN_2;
        if r < floor {
            return Err(Error::RateTooSmall { k: 1, rate: r, floor });
        }
        let eps = (-r / lambda).exp();
        let (values, value_width) = match mode {
            CoderMode::Destinations => {
                if space.diameter().is_none() {
                    return Err(Error::Mode("destination coding needs a bounded space".into()));
                }
                let net = space.net(eps)?;
                let w = index_width(&BigUint::from(net.size())) as u32;
                (ValueTable::Net(net), w)
            }
            CoderMode::DiscreteExact => {
                let q = space
                    .alphabet_size()
                    .ok_or_else(|| Error::Mode("exact symbol coding needs a finite space".into()))?;
                (ValueTable::Exact { q }, index_width(&BigUint::from(q)) as u32)
            }
            CoderMode::Increments => {
                let (law, x0) = inc.ok_or_else(|| Error::Mode("increment coding needs an increment law".into()))?;
                law.validate()?;
                if x0.len() != law.dim() {
                    return Err(Error::Domain("start value and increments differ in dimension".into()));
                }
                let net = IncrementNet::for_law(&law, eps)?;
                let w = index_width(&BigUint::from(net.size())) as u32;
                (ValueTable::Increments { net, x0 }, w)
            }
        };
        if value_width > 128 {
            return Err(Error::Precision("value index wider than 128 bits".into()));
        }
        let positions = position_tables(lambda, r, k_max)?;
        Ok(Self { lambda, r, space, mode, k_max, values, value_width, positions })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn space(&self) -> &DistortionSpace<T> {
        &self.space
    }

    pub fn mode(&self) -> CoderMode {
        self.mode
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Bits per value (or increment) index.
    pub fn value_width(&self) -> u32 {
        self.value_width
    }

    /// `ε = e^{−r/λ}`, the value net radius.
    pub fn value_eps(&self) -> f64 {
        (-self.r / self.lambda).exp()
    }

    /// `log N` of the value alphabet actually used.
    pub fn log_value_alphabet(&self) -> f64 {
        match &self.values {
            ValueTable::Net(net) => net.log_size(),
            ValueTable::Exact { q } => (*q as f64).ln(),
            ValueTable::Increments { net, .. } => net.log_size(),
        }
    }

    pub fn position_table(&self, k: usize) -> Option<&PositionTable> {
        self.positions.get(k).and_then(|p| p.as_ref())
    }

    /// Jump counts whose position budget falls below the ordered-grid floor.
    pub fn fallback_counts(&self) -> Vec<usize> {
        (1..=self.k_max).filter(|&k| self.positions[k].as_ref().is_some_and(|p| p.fallback)).collect()
    }

    /// `max_k k e^{r/λ} δ_k` over `1 ≤ k ≤ k_max`, `δ_k` the grid's worst error.
    pub fn kappa_max(&self) -> f64 {
        (1..=self.k_max)
            .map(|k| {
                let p = self.positions[k].as_ref().expect("k ≥ 1");
                k as f64 * (self.r / self.lambda).exp() * p.codebook.worst_error()
            })
            .fold(0.0, f64::max)
    }

    /// Bit length of the record for a path with `k` jumps.
    pub fn record_len(&self, k: usize) -> Result<usize> {
        if k > self.k_max {
            return Err(Error::Capacity { k, k_max: self.k_max });
        }
        let pos = self.positions[k].as_ref().map_or(0, |p| p.width as usize);
        let nvals = if self.mode == CoderMode::Increments { k } else { k + 1 };
        Ok(bits::elias_gamma_len(k as u64 + 1) + pos + nvals * self.value_width as usize)
    }

    /// One line per jump count: position grid, width, fallback flag.
    pub fn report(&self) -> String {
        let mut s = format!(
            "mode={} lambda={} r={} k_max={} value_width={} log_alphabet={:.6}\n",
            self.mode,
            self.lambda,
            self.r,
            self.k_max,
            self.value_width,
            self.log_value_alphabet()
        );
        for k in 1..=self.k_max {
            let p = self.positions[k].as_ref().expect("k ≥ 1");
            s.push_str(&format!(
                "k={k} m={} position_bits={} fallback={}\n",
                p.codebook.m(),
                p.width,
                p.fallback
            ));
        }
        s
    }
}

fn position_tables(lambda: f64, r: f64, k_max: usize) -> Result<Vec<Option<PositionTable>>> {
    let mut out = vec![None];
    for k in 1..=k_max {
        let (codebook, fallback) = match ordered_codebook_for_rate(k, k as f64 * r / lambda) {
            Ok(cb) => (cb, false),
            Err(Error::RateTooSmall { .. }) => (midpoint_product_codebook(k, 2)?, true),
            Err(e) => return Err(e),
        };
        let width = index_width(codebook.size());
        out.push(Some(PositionTable { codebook, fallback, width }));
    }
    Ok(out)
}

/// Encodes one path as a self-delimiting record.
pub fn encode_path<T: Scalar, P: PiecewiseConstant<T>>(x: &P, cfg: &CoderConfig<T>) -> Result<BitStream> {
    let times = x.breakpoints();
    let values = x.values();
    let k = times.len();
    if k > cfg.k_max {
        return Err(Error::Capacity { k, k_max: cfg.k_max });
    }
    for v in values {
        cfg.space.contains(v)?;
    }
    let mut out = BitStream::new();
    out.push_elias_gamma(k as u64 + 1);
    if let Some(p) = &cfg.positions[k] {
        let levels = p.codebook.nearest_levels(times)?;
        out.push_biguint(&p.codebook.rank(&levels), p.width);
    }
    match &cfg.values {
        ValueTable::Net(net) => {
            for v in values {
                out.push_u128(net.nearest(v)?.0, cfg.value_width);
            }
        }
        ValueTable::Exact { .. } => {
            for v in values {
                let Point::Label(i) = v else { unreachable!("finite space holds labels") };
                out.push_u128(*i as u128, cfg.value_width);
            }
        }
        ValueTable::Increments { net, x0 } => {
            let first = values[0].as_vector().expect("vector path");
            if first != x0.as_slice() {
                return Err(Error::Domain(format!("path starts away from the coder's start value {x0:?}")));
            }
            for w in values.windows(2) {
                let (a, b) = (w[0].as_vector().expect("vector"), w[1].as_vector().expect("vector"));
                let z: Vec<T> = b.iter().zip(a).map(|(b, a)| *b - *a).collect();
                out.push_u128(net.nearest(&z).0, cfg.value_width);
            }
        }
    }
    debug_assert_eq!(out.len(), cfg.record_len(k)?);
    Ok(out)
}

/// Decodes one record from the reader.
pub fn decode_record<T: Scalar>(r: &mut BitReader<'_>, cfg: &CoderConfig<T>) -> Result<Reconstruction<T>> {
    let start = r.position();
    let n = r.read_elias_gamma()?;
    let k = (n - 1) as usize;
    if k > cfg.k_max {
        return Err(Error::Decode {
            offset: start,
            reason: format!("jump count {k} exceeds the coder capacity {}", cfg.k_max),
        });
    }
    let times = match &cfg.positions[k] {
        Some(p) => {
            let rank = r.read_biguint(p.width, "position index")?;
            if &rank >= p.codebook.size() {
                return Err(r.error(format!("position index {rank} out of range")));
            }
            p.codebook.times(&p.codebook.unrank(&rank)?)
        }
        None => Vec::new(),
    };
    let mut read_index = |limit: u128, what: &str| -> Result<u128> {
        let i = r.read_u128(cfg.value_width, what)?;
        if i >= limit {
            return Err(r.error(format!("{what} {i} out of range {limit}")));
        }
        Ok(i)
    };
    let values = match &cfg.values {
        ValueTable::Net(net) => {
            let mut v = Vec::with_capacity(k + 1);
            for _ in 0..=k {
                v.push(net.point(read_index(net.size(), "value index")?));
            }
            v
        }
        ValueTable::Exact { q } => {
            let mut v = Vec::with_capacity(k + 1);
            for _ in 0..=k {
                v.push(Point::Label(read_index(*q as u128, "symbol")? as usize));
            }
            v
        }
        ValueTable::Increments { net, x0 } => {
            let mut x = x0.clone();
            let mut v = Vec::with_capacity(k + 1);
            v.push(Point::Vector(x.clone()));
            for _ in 0..k {
                let z = net.point(read_index(net.size(), "increment index")?);
                for (a, b) in x.iter_mut().zip(z) {
                    *a = *a + b;
                }
                v.push(Point::Vector(x.clone()));
            }
            v
        }
    };
    let mut sorted = times;
    sorted.sort_by(f64::total_cmp);
    Reconstruction::new(sorted, values)
}

/// Decodes a single record that must fill the stream exactly.
pub fn decode_path<T: Scalar>(b: &BitStream, cfg: &CoderConfig<T>) -> Result<Reconstruction<T>> {
    if b.is_empty() {
        return Err(Error::Decode { offset: 0, reason: "empty stream".into() });
    }
    let mut r = BitReader::new(b.bits());
    let out = decode_record(&mut r, cfg)?;
    if r.remaining() > 0 {
        return Err(r.error(format!("{} trailing bits after the record", r.remaining())));
    }
    Ok(out)
}

/// Concatenated records, without container header.
pub fn decode_concatenated<T: Scalar>(b: &BitStream, cfg: &CoderConfig<T>) -> Result<Vec<Reconstruction<T>>> {
    let mut r = BitReader::new(b.bits());
    let mut out = Vec::new();
    while r.remaining() > 0 {
        out.push(decode_record(&mut r, cfg)?);
    }
    Ok(out)
}

/// Archive bytes for a batch of paths.
pub fn encode_archive<T: Scalar, P: PiecewiseConstant<T>>(paths: &[P], cfg: &CoderConfig<T>) -> Result<Vec<u8>> {
    let records = paths.iter().map(|p| encode_path(p, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(bits::write_archive(&records))
}

pub fn decode_archive<T: Scalar>(bytes: &[u8], cfg: &CoderConfig<T>) -> Result<Vec<Reconstruction<T>>> {
    let body = bits::archive_body(bytes)?;
    let mut r = BitReader::with_base(body, 16);
    let mut out = Vec::new();
    while !bits::is_padding(r.rest()) {
        out.push(decode_record(&mut r, cfg)?);
    }
    Ok(out)
}

/// `K (r + (λ+1) log N(e^{−r/λ}))` nats; increment mode codes `k` rather
/// than `k+1` values, giving `K (r + λ log N)`. The jump-count prefix is
/// not included (see [`prefix_overhead_bits`]).
pub fn expected_rate_bound<T: Scalar>(cfg: &CoderConfig<T>, k_const: f64) -> f64 {
    let per = match cfg.mode {
        CoderMode::Increments => cfg.lambda,
        _ => cfg.lambda + 1.0,
    };
    k_const * (cfg.r + per * cfg.log_value_alphabet())
}

/// `E[len(γ(N+1))]` bits for `N ~ Poisson(λ)` truncated at `k_max`.
pub fn prefix_overhead_bits(lambda: f64, k_max: usize) -> f64 {
    (0..=k_max).map(|k| poisson_pmf(lambda, k) * bits::elias_gamma_len(k as u64 + 1) as f64).sum()
}

/// Mean record length and plug-in entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateReport {
    pub mean_bits: f64,
    pub entropy_nats: f64,
}

impl RateReport {
    pub fn mean_nats(&self) -> f64 {
        self.mean_bits * std::f64::consts::LN_2
    }
}

/// `−Σ p̂ log p̂` over distinct symbols.
pub fn plugin_entropy<S: Hash + Eq>(symbols: &[S]) -> Result<f64> {
    if symbols.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    let mut counts: HashMap<&S, usize> = HashMap::new();
    for s in symbols {
        *counts.entry(s).or_default() += 1;
    }
    let n = symbols.len() as f64;
    // Sum in a fixed order so the result does not depend on hashing.
    let mut c: Vec<usize> = counts.into_values().collect();
    c.sort_unstable();
    Ok(c.into_iter().map(|c| c as f64 / n).map(|p| -p * p.ln()).sum::<f64>().max(0.0))
}

/// Mean length of `streams` and the plug-in entropy of `symbols` (typically
/// the decoded paths).
pub fn empirical_rate<S: Hash + Eq>(streams: &[BitStream], symbols: &[S]) -> Result<RateReport> {
    if streams.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    let mean_bits = streams.iter().map(|b| b.len() as f64).sum::<f64>() / streams.len() as f64;
    Ok(RateReport { mean_bits, entropy_nats: plugin_entropy(symbols)? })
}

/// Canonical symbol for a decoded path: its record after merging empty
/// segments and repeated values.
pub fn path_symbol<T: Scalar>(rec: &Reconstruction<T>, space: &DistortionSpace<T>) -> Result<String> {
    Ok(rec.to_path(space)?.to_record())
}

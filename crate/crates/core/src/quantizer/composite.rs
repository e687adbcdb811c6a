//! The composite path codebook: a union over jump counts `k ≤ k₀` of
//! position × value product codebooks.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::bigmath::ln_biguint;
use super::position::{position_codebook_for_rate, PositionCodebook};
use super::value::{product_value_codebook, IncrementCodebook, IncrementNet, ValueCodebook};
use crate::error::{Error, Result};
use crate::paths::{path_distortion_unchecked, JumpPath, Reconstruction};
use crate::scalar::Scalar;
use crate::sim::{IncrementLaw, ProcessSpec};
use crate::spaces::{DistortionSpace, Point};

/// Codebooks at or below this size are searched exhaustively.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u64 = 4096;

/// Finest net radius probed by the ε₀ surrogate, `2^{-40}`.
pub const EPS0_PROBE_DEPTH: i32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantMode {
    /// Code the initial value and the jump destinations.
    Destinations,
    /// Code the increments from a fixed start.
    Increments,
}

impl std::fmt::Display for QuantMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QuantMode::Destinations => "destinations",
            QuantMode::Increments => "increments",
        })
    }
}

impl std::str::FromStr for QuantMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "destinations" => Ok(QuantMode::Destinations),
            "increments" => Ok(QuantMode::Increments),
            _ => Err(Error::Config(format!("unknown quantizer mode {s:?}"))),
        }
    }
}

/// What the values of the coded paths look like.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueSource<T> {
    /// Values in a bounded space.
    Destinations(DistortionSpace<T>),
    /// Paths starting at `x0` in `R^d` whose increments follow `law`.
    Increments { law: IncrementLaw<T>, x0: Vec<T> },
}

impl<T: Scalar> ValueSource<T> {
    pub fn from_spec(spec: &ProcessSpec<T>, mode: QuantMode) -> Result<Self> {
        match mode {
            QuantMode::Destinations => Ok(ValueSource::Destinations(spec.space.clone())),
            QuantMode::Increments => {
                let law = spec
                    .increment_law()
                    .ok_or_else(|| Error::Mode("increment coding needs a compound Poisson process".into()))?;
                Ok(ValueSource::Increments { law: law.clone(), x0: vec![T::zero(); law.dim()] })
            }
        }
    }

    pub fn mode(&self) -> QuantMode {
        match self {
            ValueSource::Destinations(_) => QuantMode::Destinations,
            ValueSource::Increments { .. } => QuantMode::Increments,
        }
    }

    /// Box dimension of the coded value set.
    pub fn gamma(&self) -> Result<f64> {
        match self {
            ValueSource::Destinations(space) => space
                .box_dimension()
                .ok_or_else(|| Error::Mode("destination coding needs a bounded space".into())),
            ValueSource::Increments { law, .. } => Ok(increment_gamma(law)),
        }
    }

    /// `log N(ε)` of the constructed net.
    pub fn log_covering(&self, eps: f64) -> Result<f64> {
        match self {
            ValueSource::Destinations(space) => space.log_covering_number(eps),
            ValueSource::Increments { law, .. } => Ok(IncrementNet::for_law(law, eps)?.log_size()),
        }
    }

    /// The space the coded paths live in.
    pub fn path_space(&self) -> Result<DistortionSpace<T>> {
        match self {
            ValueSource::Destinations(space) => Ok(space.clone()),
            ValueSource::Increments { x0, .. } => DistortionSpace::real_vector(x0.len()),
        }
    }
}

/// Box dimension of the support of an increment law.
pub fn increment_gamma<T: Scalar>(law: &IncrementLaw<T>) -> f64 {
    match law {
        IncrementLaw::UniformCube { dim } => *dim as f64,
        IncrementLaw::CantorUniform { .. } => 2f64.ln() / 3f64.ln(),
        IncrementLaw::PointMass(_) | IncrementLaw::Finite { .. } => 0.0,
    }
}

/// The largest dyadic `ε₀ = 2^{-j}`, `j ≥ 1`, such that
/// `log N(ε) ≤ (γ+δ) log(1/ε)` at every probed `ε = 2^{-j'}` with `j ≤ j' ≤ 40`.
pub fn eps0_surrogate(log_n: impl Fn(f64) -> Result<f64>, gamma: f64, delta: f64) -> Result<f64> {
    let mut best = None;
    for j in (1..=EPS0_PROBE_DEPTH).rev() {
        let eps = 2f64.powi(-j);
        if log_n(eps)? <= (gamma + delta) * eps.recip().ln() + 1e-12 {
            best = Some(eps);
        } else {
            break;
        }
    }
    best.ok_or_else(|| {
        Error::Unsupported(format!(
            "covering numbers exceed ε^-(γ+δ) at ε = 2^-{EPS0_PROBE_DEPTH}; increase δ"
        ))
    })
}

#[derive(Clone, Debug, PartialEq)]
enum CellValues<T> {
    Destinations(ValueCodebook<T>),
    Increments(IncrementCodebook<T>),
    /// The single path constant at the start value.
    Fixed,
}

/// The sub-codebook `C_k = C'_k × C''_k` for paths with `k` jumps.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    k: usize,
    positions: Option<PositionCodebook>,
    values: CellValues<T>,
    value_size: BigUint,
    size: BigUint,
}

impl<T: Scalar> Cell<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn positions(&self) -> Option<&PositionCodebook> {
        self.positions.as_ref()
    }

    pub fn size(&self) -> &BigUint {
        &self.size
    }

    pub fn value_log_size(&self) -> f64 {
        ln_biguint(&self.value_size)
    }

    /// Radius of the value (or increment) net, if any.
    pub fn value_eps(&self) -> Option<f64> {
        match &self.values {
            CellValues::Destinations(v) => Some(v.eps()),
            CellValues::Increments(v) => Some(v.net().eps()),
            CellValues::Fixed => None,
        }
    }
}

/// A codeword by parts: jump count, position levels, value digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodewordParts {
    pub k: usize,
    pub levels: Vec<u64>,
    pub digits: Vec<u128>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositePathCodebook<T> {
    source: ValueSource<T>,
    space: DistortionSpace<T>,
    r: f64,
    delta: f64,
    s: f64,
    gamma: f64,
    eps0: f64,
    k0: usize,
    cells: Vec<Cell<T>>,
    offsets: Vec<BigUint>,
    total: BigUint,
    exhaustive_limit: u64,
}

/// Composite codebook for the process at nominal rate `r` (nats).
pub fn composite_codebook<T: Scalar>(
    spec: &ProcessSpec<T>,
    r: f64,
    delta: f64,
    s: f64,
    mode: QuantMode,
) -> Result<CompositePathCodebook<T>> {
    if mode == QuantMode::Increments && !spec.deterministic_start() {
        return Err(Error::Mode("increment coding needs a deterministic start".into()));
    }
    CompositePathCodebook::new(ValueSource::from_spec(spec, mode)?, r, delta, s)
}

impl<T: Scalar> CompositePathCodebook<T> {
    pub fn new(source: ValueSource<T>, r: f64, delta: f64, s: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("δ must be positive, got {delta}")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("moment order must be positive, got {s}")));
        }
        if !r.is_finite() {
            return Err(Error::Domain(format!("rate must be finite, got {r}")));
        }
        if let ValueSource::Destinations(space) = &source {
            if space.diameter().is_none() {
                return Err(Error::Mode("destination coding needs a bounded space".into()));
            }
        }
        let gamma = source.gamma()?;
        let eps0 = eps0_surrogate(|e| source.log_covering(e), gamma, delta)?;
        let l0 = eps0.recip().ln();
        let floor = l0.max(1.0);
        if r < floor {
            return Err(Error::RateTooSmall { k: 0, rate: r, floor });
        }
        let k0 = (r * (1.0 / l0).min(1.0) - 1.0 + 1e-12).floor() as usize;
        let space = source.path_space()?;
        let mut cells = Vec::with_capacity(k0 + 1);
        for k in 0..=k0 {
            let positions = if k == 0 { None } else { Some(position_codebook_for_rate(k, r - k as f64)?) };
            let values = match &source {
                ValueSource::Destinations(space) => {
                    CellValues::Destinations(product_value_codebook(space, (-r / (k + 1) as f64).exp(), k + 1)?)
                }
                ValueSource::Increments { .. } if k == 0 => CellValues::Fixed,
                ValueSource::Increments { law, .. } => {
                    CellValues::Increments(IncrementCodebook::new(IncrementNet::for_law(law, (-r / k as f64).exp())?, k))
                }
            };
            let value_size = match &values {
                CellValues::Destinations(v) => v.size(),
                CellValues::Increments(v) => v.size(),
                CellValues::Fixed => BigUint::from(1u32),
            };
            let pos_size = positions.as_ref().map_or(BigUint::from(1u32), |p| p.size().clone());
            let size = pos_size * &value_size;
            cells.push(Cell { k, positions, values, value_size, size });
        }
        let mut offsets = Vec::with_capacity(cells.len());
        let mut total = BigUint::zero();
        for c in &cells {
            offsets.push(total.clone());
            total += &c.size;
        }
        Ok(Self {
            source,
            space,
            r,
            delta,
            s,
            gamma,
            eps0,
            k0,
            cells,
            offsets,
            total,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
        })
    }

    pub fn with_exhaustive_limit(mut self, limit: u64) -> Self {
        self.exhaustive_limit = limit;
        self
    }

    pub fn mode(&self) -> QuantMode {
        self.source.mode()
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn space(&self) -> &DistortionSpace<T> {
        &self.space
    }

    pub fn size(&self) -> &BigUint {
        &self.total
    }

    pub fn log_size(&self) -> f64 {
        ln_biguint(&self.total)
    }

    /// `(1+γ+δ) r + 1`.
    pub fn log_size_bound(&self) -> f64 {
        (1.0 + self.gamma + self.delta) * self.r + 1.0
    }

    /// `log N(ε) / log(1/ε)` at the finest probed radius, to compare with γ.
    pub fn gamma_diagnostic(&self) -> Result<f64> {
        let eps = 2f64.powi(-EPS0_PROBE_DEPTH);
        Ok(self.source.log_covering(eps)? / eps.recip().ln())
    }

    pub fn index_of(&self, parts: &CodewordParts) -> Result<BigUint> {
        let cell = self
            .cells
            .get(parts.k)
            .ok_or_else(|| Error::Domain(format!("no cell for k = {} > k₀ = {}", parts.k, self.k0)))?;
        let pos = match &cell.positions {
            Some(p) => {
                if !p.is_valid(&parts.levels) {
                    return Err(Error::Domain(format!("invalid position levels {:?}", parts.levels)));
                }
                p.rank(&parts.levels)
            }
            None => BigUint::zero(),
        };
        let val = match &cell.values {
            CellValues::Destinations(v) => v.rank(&parts.digits),
            CellValues::Increments(v) => v.rank(&parts.digits),
            CellValues::Fixed => BigUint::zero(),
        };
        Ok(&self.offsets[parts.k] + pos * &cell.value_size + val)
    }

    pub fn parts_of(&self, index: &BigUint) -> Result<CodewordParts> {
        if index >= &self.total {
            return Err(Error::Domain(format!("codeword index {index} ≥ size {}", self.total)));
        }
        let k = self.offsets.partition_point(|o| o <= index) - 1;
        let cell = &self.cells[k];
        let local = index - &self.offsets[k];
        let (pos, val) = (&local / &cell.value_size, &local % &cell.value_size);
        let levels = match &cell.positions {
            Some(p) => p.unrank(&pos)?,
            None => Vec::new(),
        };
        let digits = match &cell.values {
            CellValues::Destinations(v) => v.unrank(&val),
            CellValues::Increments(v) => v.unrank(&val),
            CellValues::Fixed => Vec::new(),
        };
        Ok(CodewordParts { k, levels, digits })
    }

    /// The function a codeword represents. Times are sorted; values keep
    /// their order.
    pub fn reconstruction(&self, parts: &CodewordParts) -> Reconstruction<T> {
        let cell = &self.cells[parts.k];
        let mut times = cell.positions.as_ref().map_or_else(Vec::new, |p| p.times(&parts.levels));
        times.sort_by(f64::total_cmp);
        let values = match (&cell.values, &self.source) {
            (CellValues::Destinations(v), _) => v.points(&parts.digits),
            (CellValues::Increments(v), ValueSource::Increments { x0, .. }) => v.values(x0, &parts.digits),
            (CellValues::Fixed, ValueSource::Increments { x0, .. }) => vec![Point::Vector(x0.clone())],
            _ => unreachable!("cell kind follows the source"),
        };
        Reconstruction::new(times, values).expect("codeword times lie in (0,1]")
    }

    pub fn decode(&self, index: &BigUint) -> Result<Reconstruction<T>> {
        Ok(self.reconstruction(&self.parts_of(index)?))
    }

    /// Codeword minimizing `ρ_D(x, ·)`, with its distortion.
    ///
    /// Small codebooks are searched exhaustively with ties to the lowest
    /// index. Larger ones evaluate a shortlist: per-block minimizers for `x`
    /// and for greedy jump-deleting simplifications of `x`, the constant
    /// cell, and a coordinate-neighbour refinement of the best candidate.
    pub fn nearest_codeword(&self, x: &JumpPath<T>) -> Result<(BigUint, T)> {
        for v in x.values() {
            self.space.contains(v)?;
        }
        if self.total.is_zero() {
            return Err(Error::Internal("empty codebook".into()));
        }
        if let Some(n) = self.total.to_u64().filter(|&n| n <= self.exhaustive_limit) {
            let mut best: Option<(T, u64)> = None;
            for i in 0..n {
                let d = path_distortion_unchecked(x, &self.decode(&BigUint::from(i))?, &self.space);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
            let (d, i) = best.expect("non-empty");
            return Ok((BigUint::from(i), d));
        }
        let mut best: Option<(T, BigUint, CodewordParts)> = None;
        let consider = |parts: CodewordParts, best: &mut Option<(T, BigUint, CodewordParts)>| -> Result<()> {
            let idx = self.index_of(&parts)?;
            let d = path_distortion_unchecked(x, &self.reconstruction(&parts), &self.space);
            let better = match best {
                None => true,
                Some((bd, bi, _)) => d < *bd || (d == *bd && idx < *bi),
            };
            if better {
                *best = Some((d, idx, parts));
            }
            Ok(())
        };
        let mut path = x.clone();
        loop {
            if path.jump_count() <= self.k0 {
                for parts in self.block_minimizers(&path)? {
                    consider(parts, &mut best)?;
                }
            }
            if path.jump_count() == 0 {
                break;
            }
            path = self.delete_cheapest_jump(&path);
        }
        for parts in self.constant_candidates(x)? {
            consider(parts, &mut best)?;
        }
        // Coordinate-neighbour refinement on the true distortion.
        for _ in 0..4 {
            let (_, _, current) = best.clone().expect("at least one candidate");
            let before = best.as_ref().map(|b| b.1.clone());
            for parts in self.neighbours(&current) {
                consider(parts, &mut best)?;
            }
            if best.as_ref().map(|b| b.1.clone()) == before {
                break;
            }
        }
        let (d, idx, _) = best.expect("at least one candidate");
        Ok((idx, d))
    }

    /// Nearest positions and per-coordinate nearest values for a path in cell `k`.
    fn block_minimizers(&self, p: &JumpPath<T>) -> Result<Vec<CodewordParts>> {
        let k = p.jump_count();
        let cell = &self.cells[k];
        let levels = match &cell.positions {
            Some(pc) => pc.nearest_levels(p.jump_times())?,
            None => Vec::new(),
        };
        let mut out = Vec::new();
        match (&cell.values, &self.source) {
            (CellValues::Destinations(v), _) => {
                let (digits, _) = v.nearest_digits(p.values())?;
                out.push(CodewordParts { k, levels, digits });
            }
            (CellValues::Increments(v), ValueSource::Increments { x0, .. }) => {
                let net = v.net();
                let inc = p.increments()?;
                let open: Vec<u128> = inc.iter().map(|z| net.nearest(z).0).collect();
                // Closed loop: quantize the gap to the target from the reconstructed value.
                let mut xh = x0.clone();
                let mut closed = Vec::with_capacity(k);
                for target in p.values().iter().skip(1) {
                    let target = target.as_vector().expect("vector path");
                    let gap: Vec<T> = target.iter().zip(&xh).map(|(a, b)| *a - *b).collect();
                    let (d, _) = net.nearest(&gap);
                    for (a, b) in xh.iter_mut().zip(net.point(d)) {
                        *a = *a + b;
                    }
                    closed.push(d);
                }
                let same = open == closed;
                out.push(CodewordParts { k, levels: levels.clone(), digits: open });
                if !same {
                    out.push(CodewordParts { k, levels, digits: closed });
                }
            }
            (CellValues::Fixed, _) => out.push(CodewordParts { k, levels, digits: Vec::new() }),
            _ => unreachable!("cell kind follows the source"),
        }
        Ok(out)
    }

    fn constant_candidates(&self, x: &JumpPath<T>) -> Result<Vec<CodewordParts>> {
        let cell = &self.cells[0];
        let mut out = Vec::new();
        match &cell.values {
            CellValues::Destinations(v) => {
                let net = v.net();
                if net.size() <= 64 {
                    out.extend((0..net.size()).map(|d| CodewordParts { k: 0, levels: vec![], digits: vec![d] }));
                } else {
                    for value in x.values() {
                        let (d, _) = net.nearest(value)?;
                        out.push(CodewordParts { k: 0, levels: vec![], digits: vec![d] });
                    }
                }
            }
            _ => out.push(CodewordParts { k: 0, levels: vec![], digits: vec![] }),
        }
        Ok(out)
    }

    fn neighbours(&self, parts: &CodewordParts) -> Vec<CodewordParts> {
        let cell = &self.cells[parts.k];
        let mut out = Vec::new();
        if let Some(pc) = &cell.positions {
            for i in 0..parts.levels.len() {
                for step in [-1i64, 1] {
                    let mut l = parts.levels.clone();
                    let moved = l[i] as i64 + step;
                    if moved < 0 {
                        continue;
                    }
                    l[i] = moved as u64;
                    if pc.is_valid(&l) && l.windows(2).all(|w| w[0] <= w[1]) {
                        out.push(CodewordParts { k: parts.k, levels: l, digits: parts.digits.clone() });
                    }
                }
            }
        }
        if let CellValues::Destinations(v) = &cell.values {
            let n = v.net().size();
            if n <= 16 {
                for i in 0..parts.digits.len() {
                    for d in (0..n).filter(|&d| d != parts.digits[i]) {
                        let mut digits = parts.digits.clone();
                        digits[i] = d;
                        out.push(CodewordParts { k: parts.k, levels: parts.levels.clone(), digits });
                    }
                }
            }
        }
        out
    }

    /// Remove the jump whose deletion changes the path least in `ρ_D`.
    fn delete_cheapest_jump(&self, p: &JumpPath<T>) -> JumpPath<T> {
        let t = p.jump_times();
        let v = p.values();
        let k = t.len();
        let seg = |i: usize| {
            let a = if i == 0 { 0.0 } else { t[i - 1] };
            let b = if i == k { 1.0 } else { t[i] };
            b - a
        };
        let mut best = (f64::INFINITY, 0usize, false);
        for j in 1..=k {
            let rho = self.space.distortion_unchecked(&v[j - 1], &v[j]).f64();
            // Keep the earlier value over segment j, or the later one over segment j−1.
            for (cost, keep_earlier) in [(seg(j) * rho, true), (seg(j - 1) * rho, false)] {
                if cost < best.0 {
                    best = (cost, j, keep_earlier);
                }
            }
        }
        let (_, j, keep_earlier) = best;
        let mut times = t.to_vec();
        let mut values = v.to_vec();
        times.remove(j - 1);
        values.remove(if keep_earlier { j } else { j - 1 });
        Reconstruction::new(times, values)
            .and_then(|r| r.to_path(&self.space))
            .expect("deleting a jump keeps a valid path")
    }

    /// Upper bound on `E ρ_D(X, C)^s` along the construction's error chain,
    /// for a jump count with law `pmf`; terms beyond `k_max` are dropped.
    ///
    /// Destinations: `pmf(0) 2^s e^{−sr} + Σ_{1≤k≤k₀} pmf(k) D k^s e^{−rs/(k+1)}
    /// + Σ_{k>k₀} pmf(k) w^s` with `D = C_s 2^s ((ew)^s + 1)`,
    /// `C_s = max(1, 2^{s−1})`.
    ///
    /// Increments: `Σ_{1≤k≤k₀} pmf(k) C_s [(kδ_k (k z̄ + kε_k))^s + (kε_k)^s]
    /// + Σ_{k>k₀} pmf(k) (k z̄)^s`, where `δ_k` is the position grid's worst
    /// error, `ε_k` the increment net radius and `z̄ = sup ‖Z‖`.
    pub fn proof_bound(&self, pmf: impl Fn(usize) -> f64, k_max: usize) -> f64 {
        let s = self.s;
        let cs = 2f64.powf(s - 1.0).max(1.0);
        let r = self.r;
        let mut total = 0.0;
        match &self.source {
            ValueSource::Destinations(space) => {
                let w = space.diameter().expect("bounded").f64();
                let dconst = cs * 2f64.powf(s) * ((std::f64::consts::E * w).powf(s) + 1.0);
                for k in 0..=k_max.max(self.k0) {
                    let p = pmf(k);
                    let term = if k == 0 {
                        2f64.powf(s) * (-s * r).exp()
                    } else if k <= self.k0 {
                        dconst * (k as f64).powf(s) * (-r * s / (k + 1) as f64).exp()
                    } else {
                        w.powf(s)
                    };
                    total += p * term;
                }
            }
            ValueSource::Increments { law, .. } => {
                let z = law.sup_norm();
                for k in 1..=k_max.max(self.k0) {
                    let kf = k as f64;
                    let term = if k <= self.k0 {
                        let cell = &self.cells[k];
                        let dk = cell.positions.as_ref().expect("k ≥ 1").worst_error();
                        let ek = cell.value_eps().expect("k ≥ 1");
                        cs * ((kf * dk * (kf * z + kf * ek)).powf(s) + (kf * ek).powf(s))
                    } else {
                        (kf * z).powf(s)
                    };
                    total += pmf(k) * term;
                }
            }
        }
        total
    }

    /// [`proof_bound`](Self::proof_bound) for the count law of `spec`.
    pub fn proof_bound_for(&self, spec: &ProcessSpec<T>) -> f64 {
        let k_max = count_support_cap(|k| spec.count_pmf(k), spec.lambda);
        self.proof_bound(|k| spec.count_pmf(k), k_max)
    }
}

/// A `k` beyond which the count pmf is negligible (below `1e-300` and past the mode).
pub(crate) fn count_support_cap(pmf: impl Fn(usize) -> f64, lambda: f64) -> usize {
    let mut k = lambda.ceil() as usize + 1;
    while pmf(k) > 1e-300 && k < 100_000 {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::path_distortion;
    use crate::sim::{sample_paths, substream};

    fn alternating(lambda: f64) -> ProcessSpec<f64> {
        ProcessSpec::alternating(lambda).unwrap()
    }

    #[test]
    fn finite_space_log_size_bound() {
        let cb = composite_codebook(&alternating(1.0), 8.0, 0.1, 1.0, QuantMode::Destinations).unwrap();
        assert!(cb.log_size() <= 1.1 * 8.0 + 1.0);
        assert_eq!(cb.gamma(), 0.0);
        for r in [7.0, 10.0, 15.0, 25.0, 40.0] {
            let cb = composite_codebook(&alternating(1.0), r, 0.1, 1.0, QuantMode::Destinations).unwrap();
            assert!(cb.log_size() <= cb.log_size_bound(), "r={r}");
        }
    }

    #[test]
    fn cube_and_cantor_log_size_bound() {
        let cube = DistortionSpace::<f64>::unit_cube(1).unwrap();
        let cantor = DistortionSpace::<f64>::cantor(40).unwrap();
        for space in [cube, cantor] {
            for r in [3.0, 6.0, 12.0, 20.0] {
                let cb = CompositePathCodebook::new(ValueSource::Destinations(space.clone()), r, 0.25, 1.0);
                let Ok(cb) = cb else { continue };
                assert!(cb.log_size() <= cb.log_size_bound(), "{space:?} r={r}");
            }
        }
    }

    #[test]
    fn rate_floor_and_mode_errors() {
        assert!(matches!(
            composite_codebook(&alternating(1.0), 3.0, 0.1, 1.0, QuantMode::Destinations),
            Err(Error::RateTooSmall { .. })
        ));
        let counting = ProcessSpec::<f64>::counting(1.0).unwrap();
        assert!(matches!(
            composite_codebook(&counting, 10.0, 0.1, 1.0, QuantMode::Destinations),
            Err(Error::Mode(_))
        ));
        assert!(matches!(
            composite_codebook(&alternating(1.0), 10.0, 0.1, 1.0, QuantMode::Increments),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn counting_process_values_are_free() {
        let counting = ProcessSpec::<f64>::counting(1.0).unwrap();
        let cb = composite_codebook(&counting, 20.0, 0.1, 1.0, QuantMode::Increments).unwrap();
        assert_eq!(cb.k0(), 19);
        for cell in cb.cells() {
            assert_eq!(cell.value_log_size(), 0.0);
        }
        assert!(cb.log_size() <= 20.0 + 1.0);
    }

    #[test]
    fn index_roundtrip_and_valid_decodes() {
        let cube = DistortionSpace::<f64>::unit_cube(1).unwrap();
        let cb = CompositePathCodebook::new(ValueSource::Destinations(cube.clone()), 5.0, 0.5, 1.0).unwrap();
        let n = cb.size().to_u64().unwrap();
        for i in (0..n).step_by((n / 500).max(1) as usize) {
            let idx = BigUint::from(i);
            let parts = cb.parts_of(&idx).unwrap();
            assert_eq!(cb.index_of(&parts).unwrap(), idx);
            let rec = cb.decode(&idx).unwrap();
            assert!(rec.times().windows(2).all(|w| w[0] <= w[1]));
            rec.to_path(&cube).unwrap();
        }
    }

    #[test]
    fn codewords_are_their_own_nearest() {
        let spec = alternating(2.0);
        let cb = composite_codebook(&spec, 12.0, 0.1, 1.0, QuantMode::Destinations).unwrap();
        let mut rng = substream(5, 0);
        use rand::Rng;
        for _ in 0..200 {
            let i = BigUint::from(rng.random_range(0..cb.size().to_u64().unwrap()));
            let rec = cb.decode(&i).unwrap();
            let p = rec.to_path(cb.space()).unwrap();
            let (_, d) = cb.nearest_codeword(&p).unwrap();
            assert_eq!(d, 0.0);
        }
        let zero = JumpPath::constant(Point::Label(0), cb.space()).unwrap();
        assert_eq!(cb.nearest_codeword(&zero).unwrap().1, 0.0);
    }

    #[test]
    fn shortlist_matches_exhaustive_search() {
        let spec = alternating(2.0);
        let exhaustive = composite_codebook(&spec, 12.0, 0.1, 1.0, QuantMode::Destinations)
            .unwrap()
            .with_exhaustive_limit(u64::MAX);
        let shortlist = exhaustive.clone().with_exhaustive_limit(0);
        for p in sample_paths(&spec, 6, 300).unwrap() {
            let (ie, de) = exhaustive.nearest_codeword(&p).unwrap();
            let (is, ds) = shortlist.nearest_codeword(&p).unwrap();
            assert!(ds <= de * (1.0 + 1e-9) + 1e-15, "{p}: shortlist {ds} vs exhaustive {de}");
            let rec = exhaustive.decode(&ie).unwrap();
            assert_eq!(path_distortion(&p, &rec, exhaustive.space()).unwrap(), de);
            let _ = is;
        }
    }

    #[test]
    fn alternating_mean_below_proof_chain() {
        let spec = alternating(1.0);
        let cb = composite_codebook(&spec, 8.0, 0.1, 1.0, QuantMode::Destinations).unwrap();
        let paths = sample_paths(&spec, 7, 1000).unwrap();
        let mean: f64 = paths.iter().map(|p| cb.nearest_codeword(p).unwrap().1).sum::<f64>() / 1000.0;
        let bound = cb.proof_bound_for(&spec);
        assert!(mean <= bound, "{mean} > {bound}");
    }

    #[test]
    fn increments_quantizer_error_within_chain_per_path() {
        let spec = ProcessSpec::<f64>::compound_poisson(IncrementLaw::UniformCube { dim: 1 }, 2.0).unwrap();
        let cb = composite_codebook(&spec, 14.0, 0.5, 1.0, QuantMode::Increments).unwrap();
        assert!(cb.log_size() <= cb.log_size_bound());
        let z = 1.0;
        for p in sample_paths(&spec, 8, 300).unwrap() {
            let (_, d) = cb.nearest_codeword(&p).unwrap();
            let k = p.jump_count();
            let kf = k as f64;
            let bound = if k == 0 {
                0.0
            } else if k <= cb.k0() {
                let cell = &cb.cells()[k];
                let dk = cell.positions().unwrap().worst_error();
                let ek = cell.value_eps().unwrap();
                kf * dk * (kf * z + kf * ek) + kf * ek
            } else {
                kf * z
            };
            assert!(d <= bound + 1e-12, "{p}: {d} > {bound}");
        }
    }

    #[test]
    fn distortion_nonincreasing_along_rate_ladder() {
        let spec = alternating(1.0);
        let paths = sample_paths(&spec, 9, 2000).unwrap();
        let mut last = f64::INFINITY;
        for r in [7.0, 14.0, 21.0, 28.0] {
            let cb = composite_codebook(&spec, r, 0.1, 1.0, QuantMode::Destinations).unwrap();
            let ds: Vec<f64> = paths.iter().map(|p| cb.nearest_codeword(p).unwrap().1).collect();
            let mean = ds.iter().sum::<f64>() / ds.len() as f64;
            let sd = (ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / ds.len() as f64).sqrt();
            assert!(mean <= last + 2.0 * sd / (ds.len() as f64).sqrt(), "r={r}");
            last = mean;
        }
    }
}

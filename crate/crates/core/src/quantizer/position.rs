//! Codebooks for jump-time vectors in `[0,1]^k` under the sup-norm.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::bigmath::{binomial, ln_biguint};
use crate::error::{Error, Result};

/// Largest grid resolution; beyond it grid points are no longer exact doubles.
pub const MAX_RESOLUTION: u64 = 1 << 53;

/// Upper bound asserted for the ordered-grid κ witness, `8e√2`.
pub const KAPPA_BOUND: f64 = 8.0 * std::f64::consts::E * std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositionKind {
    /// All tuples `(y_1/m, …, y_k/m)` with odd `y_i ≤ m`.
    MidpointProduct,
    /// Nondecreasing tuples `(y_1/m, …, y_k/m)` with `1 ≤ y_1 ≤ … ≤ y_k ≤ m`.
    OrderedGrid,
}

/// An implicit position codebook.
///
/// A codeword is identified by its integer levels: `j_i ∈ 0..(m+1)/2` with
/// coordinate `(2j_i+1)/m` for the product kind, `y_i ∈ 1..=m` with coordinate
/// `y_i/m` for the ordered kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionCodebook {
    k: usize,
    m: u64,
    kind: PositionKind,
    size: BigUint,
}

pub fn midpoint_product_codebook(k: usize, m: u64) -> Result<PositionCodebook> {
    if k == 0 || m == 0 {
        return Err(Error::Domain(format!("need k ≥ 1 and m ≥ 1, got k={k}, m={m}")));
    }
    if m > MAX_RESOLUTION {
        return Err(Error::Precision(format!("grid resolution {m} exceeds 2^53")));
    }
    let per_axis = m.div_ceil(2);
    let size = num_traits::pow(BigUint::from(per_axis), k);
    Ok(PositionCodebook { k, m, kind: PositionKind::MidpointProduct, size })
}

pub fn ordered_grid_codebook(k: usize, m: u64) -> Result<PositionCodebook> {
    if k == 0 || m < k as u64 {
        return Err(Error::Domain(format!("need m ≥ k ≥ 1, got k={k}, m={m}")));
    }
    if m > MAX_RESOLUTION {
        return Err(Error::Precision(format!("grid resolution {m} exceeds 2^53")));
    }
    let size = binomial(m + k as u64 - 1, k as u64);
    Ok(PositionCodebook { k, m, kind: PositionKind::OrderedGrid, size })
}

/// Relative slack when comparing a log size against a rate.
pub(crate) fn rate_slack(r: f64) -> f64 {
    1e-12 * r.abs().max(1.0)
}

/// Product codebook with worst-case error `≤ e^{−r/k}` and log size `≤ r`.
///
/// With `c = ⌊e^{r/k}⌋` points per axis the grid is the centred one,
/// `m = 2c`; `c = 1` is the single centre `(½, …, ½)`.
pub fn position_codebook_for_rate(k: usize, r: f64) -> Result<PositionCodebook> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("rate must be finite and nonnegative, got {r}")));
    }
    let kf = k as f64;
    let limit = r + rate_slack(r);
    let cap = MAX_RESOLUTION / 2;
    let mut c = (r / kf).exp().floor().clamp(1.0, cap as f64) as u64;
    while c > 1 && kf * (c as f64).ln() > limit {
        c -= 1;
    }
    while c < cap && kf * ((c + 1) as f64).ln() <= limit {
        c += 1;
    }
    midpoint_product_codebook(k, 2 * c)
}

/// `c*(k) = ln C(2k, k) / k`.
pub fn c_star(k: usize) -> f64 {
    ln_biguint(&binomial(2 * k as u64, k as u64)) / k as f64
}

/// Ordered grid with the largest `m` such that `C(m+k−1, k) ≤ e^r`.
pub fn ordered_codebook_for_rate(k: usize, r: f64) -> Result<PositionCodebook> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if !r.is_finite() {
        return Err(Error::Domain(format!("rate must be finite, got {r}")));
    }
    let ku = k as u64;
    let limit = r + rate_slack(r);
    let fits = |m: u64| ln_biguint(&binomial(m + ku - 1, ku)) <= limit;
    if !fits(ku) {
        return Err(Error::RateTooSmall { k, rate: r, floor: c_star(k) * k as f64 });
    }
    let (mut lo, mut hi) = (ku, ku);
    while fits(hi) {
        lo = hi;
        if hi >= MAX_RESOLUTION {
            return Err(Error::Precision(format!(
                "rate {r} for k={k} needs a grid finer than 2^53"
            )));
        }
        hi = hi.saturating_mul(2).min(MAX_RESOLUTION);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cb = ordered_grid_codebook(k, lo)?;
    let kappa = cb.kappa(r);
    if kappa > KAPPA_BOUND {
        return Err(Error::Internal(format!("κ witness {kappa} exceeds 8e√2 at k={k}, r={r}")));
    }
    Ok(cb)
}

impl PositionCodebook {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn kind(&self) -> PositionKind {
        self.kind
    }

    pub fn size(&self) -> &BigUint {
        &self.size
    }

    pub fn log_size(&self) -> f64 {
        ln_biguint(&self.size)
    }

    /// Number of levels per coordinate.
    pub fn levels(&self) -> u64 {
        match self.kind {
            PositionKind::MidpointProduct => self.m.div_ceil(2),
            PositionKind::OrderedGrid => self.m,
        }
    }

    /// Guaranteed sup-norm error for every point of `[0,1]^k` (nondecreasing
    /// points for the ordered kind).
    pub fn worst_error(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// `κ = k e^{r/k} / m`, so that the worst error is `(κ/k) e^{−r/k}`.
    pub fn kappa(&self, r: f64) -> f64 {
        self.k as f64 * (r / self.k as f64).exp() / self.m as f64
    }

    pub fn coordinate(&self, level: u64) -> f64 {
        match self.kind {
            PositionKind::MidpointProduct => (2 * level + 1) as f64 / self.m as f64,
            PositionKind::OrderedGrid => level as f64 / self.m as f64,
        }
    }

    pub fn times(&self, levels: &[u64]) -> Vec<f64> {
        levels.iter().map(|&l| self.coordinate(l)).collect()
    }

    pub fn is_valid(&self, levels: &[u64]) -> bool {
        levels.len() == self.k
            && match self.kind {
                PositionKind::MidpointProduct => levels.iter().all(|&j| j < self.levels()),
                PositionKind::OrderedGrid => {
                    levels.iter().all(|&y| (1..=self.m).contains(&y)) && levels.windows(2).all(|w| w[0] <= w[1])
                }
            }
    }

    /// Levels of the nearest codeword in sup-norm, ties to the lower level.
    pub fn nearest_levels(&self, y: &[f64]) -> Result<Vec<u64>> {
        if y.len() != self.k {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.k, y.len())));
        }
        if self.kind == PositionKind::OrderedGrid && y.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("ordered-grid input must be nondecreasing".into()));
        }
        let m = self.m as f64;
        let round_down_ties = |v: f64| {
            let f = v.floor();
            if v - f > 0.5 { f + 1.0 } else { f }
        };
        Ok(y.iter()
            .map(|&t| match self.kind {
                PositionKind::MidpointProduct => {
                    round_down_ties((t * m - 1.0) / 2.0).clamp(0.0, (self.levels() - 1) as f64) as u64
                }
                PositionKind::OrderedGrid => round_down_ties(t * m).clamp(1.0, m) as u64,
            })
            .collect())
    }

    /// Index and sup-norm error of the nearest codeword.
    pub fn nearest(&self, y: &[f64]) -> Result<(BigUint, f64)> {
        let levels = self.nearest_levels(y)?;
        let err = y
            .iter()
            .zip(self.times(&levels))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((self.rank(&levels), err))
    }

    pub fn rank(&self, levels: &[u64]) -> BigUint {
        debug_assert!(self.is_valid(levels), "invalid levels {levels:?}");
        match self.kind {
            PositionKind::MidpointProduct => {
                let c = self.levels();
                levels.iter().fold(BigUint::zero(), |acc, &j| acc * c + j)
            }
            // Colex rank of the strictly increasing z_i = y_i + i − 1 in 1..=m+k−1.
            PositionKind::OrderedGrid => levels
                .iter()
                .enumerate()
                .map(|(i, &y)| binomial(y + i as u64 - 1, i as u64 + 1))
                .sum(),
        }
    }

    pub fn unrank(&self, index: &BigUint) -> Result<Vec<u64>> {
        if index >= &self.size {
            return Err(Error::Domain(format!("position index {index} ≥ size {}", self.size)));
        }
        match self.kind {
            PositionKind::MidpointProduct => {
                let c = BigUint::from(self.levels());
                let mut rest = index.clone();
                let mut levels = vec![0u64; self.k];
                for l in levels.iter_mut().rev() {
                    *l = (&rest % &c).to_u64().expect("level below c");
                    rest /= &c;
                }
                Ok(levels)
            }
            PositionKind::OrderedGrid => {
                let mut rest = index.clone();
                let mut levels = vec![0u64; self.k];
                let mut upper = self.m + self.k as u64 - 1;
                for i in (1..=self.k as u64).rev() {
                    // Largest z ≤ upper with C(z−1, i) ≤ rest.
                    let (mut lo, mut hi) = (i, upper);
                    while lo < hi {
                        let mid = lo + (hi - lo).div_ceil(2);
                        if binomial(mid - 1, i) <= rest {
                            lo = mid;
                        } else {
                            hi = mid - 1;
                        }
                    }
                    rest -= binomial(lo - 1, i);
                    levels[i as usize - 1] = lo - (i - 1);
                    upper = lo - 1;
                }
                Ok(levels)
            }
        }
    }
}

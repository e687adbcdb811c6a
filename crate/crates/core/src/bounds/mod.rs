//! Analytic rate curves, the Tauberian sum and the lower-bound constants.

pub mod constants;
pub mod dyadic;
pub mod special;

use std::f64::consts::E;

pub use constants::{alpha1, alpha2, lower_constant_c_lambda};
pub use dyadic::{dyadic_partition, DyadicInterval, MAX_DYADIC_DEPTH};

use crate::error::{Error, Result};
use special::{ln_poisson_pmf, log_sum_exp};

/// Relative tail mass at which the Tauberian series is truncated.
pub const TAUBERIAN_REL_TAIL: f64 = 1e-14;

/// `ln Σ_k Poisson(c)(k) e^{−r/(k+1)}`.
///
/// Summation stops once the Poisson tail beyond the current index is below
/// `1e-14` times the partial sum; the exponential factor is at most one, so
/// this bounds the omitted terms.
pub fn log_tauberian_sum(c: f64, r: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("r must be nonnegative, got {r}")));
    }
    let mut terms = Vec::new();
    let mut k = 0u64;
    loop {
        let lp = ln_poisson_pmf(c, k);
        terms.push(lp - r / (k + 1) as f64);
        // P(N > k) ≤ P(N = k+1) / (1 − c/(k+2)) once k+2 > c.
        let kn = (k + 2) as f64;
        if kn > 2.0 * c {
            let ln_tail = ln_poisson_pmf(c, k + 1) - (1.0 - c / kn).ln();
            if ln_tail < TAUBERIAN_REL_TAIL.ln() + log_sum_exp(&terms) {
                break;
            }
        }
        k += 1;
    }
    Ok(log_sum_exp(&terms))
}

/// `Σ_k Poisson(c)(k) e^{−r/(k+1)}`; underflows to 0 for very large `r`,
/// where [`log_tauberian_sum`] should be used.
pub fn tauberian_sum(c: f64, r: f64) -> Result<f64> {
    Ok(log_tauberian_sum(c, r)?.exp())
}

/// `√(2 r log r)`.
pub fn sqrt_r_log_r(r: f64) -> f64 {
    (2.0 * r * r.ln()).sqrt()
}

/// Rate curves `r ↦ D(r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateEnvelope {
    /// `exp(−√(2/(s(1+γ)) r log r))`.
    QuantUpper { s: f64, gamma: f64 },
    /// `exp(−√(2/(s(1+γ')) r log r))`.
    QuantLower { s: f64, gamma: f64 },
    /// `constant · e^{−r/λ}`.
    EntropyUpper { lambda: f64, constant: f64 },
    /// `ε₀ C_λ min(1,λ) e^{−r/λ}`.
    EntropyLower { lambda: f64, eps0: f64 },
}

impl RateEnvelope {
    pub fn floor(&self) -> f64 {
        match self {
            RateEnvelope::QuantUpper { .. } | RateEnvelope::QuantLower { .. } => E,
            _ => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RateEnvelope::QuantUpper { .. } => "quant_upper",
            RateEnvelope::QuantLower { .. } => "quant_lower",
            RateEnvelope::EntropyUpper { .. } => "entropy_upper",
            RateEnvelope::EntropyLower { .. } => "entropy_lower",
        }
    }

    pub fn params(&self) -> String {
        match self {
            RateEnvelope::QuantUpper { s, gamma } | RateEnvelope::QuantLower { s, gamma } => {
                format!("s={s};gamma={gamma}")
            }
            RateEnvelope::EntropyUpper { lambda, constant } => format!("lambda={lambda};constant={constant}"),
            RateEnvelope::EntropyLower { lambda, eps0 } => format!("lambda={lambda};eps0={eps0}"),
        }
    }

    /// `−log D(r)`.
    pub fn neg_log(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= self.floor()) || (self.floor() > 0.0 && r <= self.floor()) {
            return Err(Error::Domain(format!("{} needs r > {}, got {r}", self.name(), self.floor())));
        }
        Ok(match *self {
            RateEnvelope::QuantUpper { s, gamma } | RateEnvelope::QuantLower { s, gamma } => {
                (2.0 / (s * (1.0 + gamma)) * r * r.ln()).sqrt()
            }
            RateEnvelope::EntropyUpper { lambda, constant } => r / lambda - constant.ln(),
            RateEnvelope::EntropyLower { lambda, eps0 } => {
                r / lambda - (eps0 * lower_constant_c_lambda(lambda)? * lambda.min(1.0)).ln()
            }
        })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok((-self.neg_log(r)?).exp())
    }
}

/// Upper constant of the discrete-space entropy coder:
/// `(K (2wκ)^s (1 − e^{−λ}))^{1/s}`.
pub fn entropy_upper_constant(k_const: f64, w: f64, kappa: f64, s: f64, lambda: f64) -> f64 {
    (k_const * (2.0 * w * kappa).powf(s) * -(-lambda).exp_m1()).powf(1.0 / s)
}

/// `ε₀ (k/(2e)) (∏|I_i|)^{1/k} e^{−r/k}`.
pub fn fixed_config_lower_bound(eps0: f64, intervals: &[DyadicInterval], r: f64) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::Domain("need at least one interval".into()));
    }
    if !(eps0 > 0.0) || !(r >= 0.0) {
        return Err(Error::Domain(format!("need ε₀ > 0 and r ≥ 0, got {eps0}, {r}")));
    }
    let k = intervals.len() as f64;
    let log_geo = intervals.iter().map(|i| i.len().ln()).sum::<f64>() / k;
    Ok(eps0 * k / (2.0 * E) * (log_geo - r / k).exp())
}

//! Constants of the entropy-coding lower bound.

use std::f64::consts::{E, LN_2};

use super::special::{exp_integral_e1, harmonic, ln_poisson_pmf, EULER_GAMMA};
use crate::error::{Error, Result};

/// Relative agreement demanded between the two evaluations of `C_λ`.
pub const C_LAMBDA_AGREEMENT: f64 = 1e-8;

/// `α₁ = E log min(e₁, e₂) = −γ − log 2` for independent standard exponentials.
pub fn alpha1() -> f64 {
    -EULER_GAMMA - LN_2
}

/// `α₂(n) = ψ(n+1) = H_n − γ`.
pub fn alpha2(n: u64) -> f64 {
    harmonic(n) - EULER_GAMMA
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("λ must be positive and finite, got {lambda}")))
    }
}

/// `E[N α₂(N)]` for `N ~ Poisson(λ)`, summed term by term.
pub fn expected_n_alpha2(lambda: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 1u64;
    let stop = lambda + 40.0 * lambda.sqrt() + 50.0;
    loop {
        let w = ln_poisson_pmf(lambda, n).exp();
        sum += w * n as f64 * alpha2(n);
        if n as f64 > stop && w < 1e-20 {
            break;
        }
        n += 1;
    }
    sum
}

/// `c/λ` from `c = λα₁ − E[N α₂(N)]`.
pub fn c_over_lambda_series(lambda: f64) -> f64 {
    alpha1() - expected_n_alpha2(lambda) / lambda
}

/// `c/λ = −γ − log 2 − log λ − E₁(λ) − (1 − e^{−λ})/λ`.
pub fn c_over_lambda_closed(lambda: f64) -> f64 {
    -EULER_GAMMA - LN_2 - lambda.ln() - exp_integral_e1(lambda) + (-lambda).exp_m1() / lambda
}

/// `C_λ = (λ/(8e)) e^{c/λ}` from the series form.
pub fn c_lambda_series(lambda: f64) -> f64 {
    lambda / (8.0 * E) * c_over_lambda_series(lambda).exp()
}

/// `C_λ = (λ/(8e)) e^{c/λ}` from the closed form.
pub fn c_lambda_closed(lambda: f64) -> f64 {
    lambda / (8.0 * E) * c_over_lambda_closed(lambda).exp()
}

/// `C_λ`, evaluated both ways; fails if they disagree beyond
/// [`C_LAMBDA_AGREEMENT`].
pub fn lower_constant_c_lambda(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let a = c_lambda_series(lambda);
    let b = c_lambda_closed(lambda);
    if ((a - b) / b).abs() > C_LAMBDA_AGREEMENT {
        return Err(Error::Oracle(format!("C_λ at λ={lambda}: series {a} vs closed form {b}")));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::substream;
    use rand::Rng;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn alpha2_small_values() {
        assert!((alpha2(0) + EULER_GAMMA).abs() < 1e-15);
        assert!((alpha2(1) - (1.0 - EULER_GAMMA)).abs() < 1e-15);
    }

    fn mc_mean(samples: usize, seed: u64, f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> f64) -> (f64, f64) {
        let mut rng = substream(seed, 0);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let x = f(&mut rng);
            s += x;
            s2 += x * x;
        }
        let n = samples as f64;
        let mean = s / n;
        (mean, ((s2 / n - mean * mean) / n).sqrt())
    }

    #[test]
    fn alpha2_six_against_monte_carlo() {
        let (m, se) = mc_mean(1_000_000, 11, |rng| {
            (0..7).map(|_| <Exp1 as Distribution<f64>>::sample(&Exp1, rng)).sum::<f64>().ln()
        });
        assert!((m - alpha2(6)).abs() < 3.0 * se, "{m} ± {se} vs {}", alpha2(6));
    }

    #[test]
    fn alpha1_against_monte_carlo() {
        let (m, se) = mc_mean(1_000_000, 12, |rng| {
            let a: f64 = rng.sample(Exp1);
            let b: f64 = rng.sample(Exp1);
            a.min(b).ln()
        });
        assert!((m - alpha1()).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn both_forms_agree_on_grid() {
        for lambda in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let a = c_lambda_series(lambda);
            let b = c_lambda_closed(lambda);
            assert!(((a - b) / b).abs() < 1e-8, "λ={lambda}: {a} vs {b}");
            assert!(lower_constant_c_lambda(lambda).is_ok());
        }
    }

    #[test]
    fn rejects_bad_lambda() {
        assert!(lower_constant_c_lambda(0.0).is_err());
        assert!(lower_constant_c_lambda(f64::NAN).is_err());
    }
}

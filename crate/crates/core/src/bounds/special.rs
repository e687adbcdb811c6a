//! Special functions used by the analytic bounds.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// `H_n = Σ_{j=1}^{n} 1/j`.
pub fn harmonic(n: u64) -> f64 {
    if n < 64 {
        return (1..=n).rev().map(|j| 1.0 / j as f64).sum();
    }
    // Asymptotic expansion; exact to double precision from n = 64 on.
    let x = n as f64;
    let x2 = x * x;
    x.ln() + EULER_GAMMA + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2) - 1.0 / (252.0 * x2 * x2 * x2)
}

/// Exponential integral `E₁(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series for `x ≤ 1`, modified-Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E₁ needs x > 0, got {x}");
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        return -EULER_GAMMA - x.ln() - sum;
    }
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// `ln P(N = k)` for `N ~ Poisson(λ)`.
pub fn ln_poisson_pmf(lambda: f64, k: u64) -> f64 {
    if k == 0 {
        return -lambda;
    }
    k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)
}

/// `ln Σ exp(a_i)` without overflow.
pub fn log_sum_exp(a: &[f64]) -> f64 {
    let m = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + a.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn e1_matches_quadrature() {
        // E₁(x) = ∫_0^∞ exp(−x e^v) dv.
        for x in [0.01f64, 0.3, 1.0, 1.0001, 2.5, 7.0, 30.0] {
            let q = simpson(|v| (-x * v.exp()).exp(), 0.0, (800.0 / x).ln(), 200_000);
            let e = exp_integral_e1(x);
            assert!((q - e).abs() < 1e-12 * e.max(1e-3), "x={x}: {e} vs {q}");
        }
    }

    #[test]
    fn e1_regimes_meet() {
        let below = exp_integral_e1(1.0);
        let above = exp_integral_e1(1.0 + 1e-12);
        assert!((below - above).abs() < 1e-11);
        assert!((below - 0.219_383_934_395_520_27).abs() < 1e-14);
    }

    #[test]
    fn harmonic_matches_digamma() {
        for n in [0u64, 1, 2, 6, 63, 64, 65, 1000, 1_000_000] {
            let h = harmonic(n);
            assert!((h - EULER_GAMMA - digamma(n as f64 + 1.0)).abs() < 1e-12 * h.max(1.0), "n={n}");
        }
        let direct: f64 = (1..=5000u64).rev().map(|j| 1.0 / j as f64).sum();
        assert!((harmonic(5000) - direct).abs() < 1e-13);
    }

    #[test]
    fn log_sum_exp_handles_underflow() {
        let v = log_sum_exp(&[-2000.0, -2000.0]);
        assert!((v - (-2000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}

use jumpcode::bounds::special::{exp_integral_e1, EULER_GAMMA};
use jumpcode::bounds::{constants, lower_constant_c_lambda, RateEnvelope};

const E: f64 = std::f64::consts::E;

// The exact limits of C_λ: e^{−γ}/(16e) as λ → ∞ and λ/(16e²) as λ → 0.
#[test]
fn c_lambda_large_lambda_limit() {
    let c = lower_constant_c_lambda(1e4).unwrap();
    assert!((c * 16.0 * E * EULER_GAMMA.exp() - 1.0).abs() < 0.01);
}

#[test]
fn c_lambda_small_lambda_limit() {
    let c = lower_constant_c_lambda(1e-4).unwrap();
    assert!((c * 16.0 * E * E / 1e-4 - 1.0).abs() < 0.01);
}

#[test]
fn c_lambda_is_increasing_and_positive() {
    let grid: Vec<f64> = (-8..=8).map(|i| 2f64.powi(i)).collect();
    let vals: Vec<f64> = grid.iter().map(|&l| lower_constant_c_lambda(l).unwrap()).collect();
    assert!(vals.iter().all(|&v| v > 0.0));
    assert!(vals.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn c_over_lambda_closed_form_is_finite_near_zero() {
    for l in [1e-8, 1e-6, 1e-3] {
        let v = constants::c_over_lambda_closed(l);
        assert!(v.is_finite());
        // c/λ ≈ −γ − ln 2 − ln λ − E₁(λ) − 1 for small λ; E₁(λ) ≈ −γ − ln λ.
        assert!((v - (-std::f64::consts::LN_2 - 1.0)).abs() < 1e-2, "{l}: {v}");
    }
    assert!(exp_integral_e1(1e-8) > 17.0);
}

#[test]
fn envelopes_are_monotone_in_rate() {
    let envs = [
        RateEnvelope::QuantUpper { s: 1.0, gamma: 0.0 },
        RateEnvelope::QuantLower { s: 1.0, gamma: 1.0 },
        RateEnvelope::EntropyUpper { lambda: 1.0, constant: 2.0 },
        RateEnvelope::EntropyLower { lambda: 1.0, eps0: 1.0 },
    ];
    for env in envs {
        let mut last = f64::INFINITY;
        for r in [10.0, 20.0, 40.0, 80.0] {
            let v = env.eval(r).unwrap();
            assert!(v > 0.0 && v < last, "{}: {v} at {r}", env.name());
            last = v;
        }
    }
}

//! Exact binomials and logarithms of big integers.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` exactly.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `ln x` for `x ≥ 1`, accurate to double precision for any size; `-∞` for 0.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `⌈log₂ x⌉` for `x ≥ 1`: the bit width of indices `0..x`.
pub fn index_width(x: &BigUint) -> u64 {
    assert!(!x.is_zero(), "empty index range");
    (x - 1u32).bits()
}

pub fn pow_u128(base: u128, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

/// Mixed-radix digits of `index` in base `base`, most significant first.
pub fn to_digits(index: &BigUint, base: u128, count: usize) -> Vec<u128> {
    let b = BigUint::from(base);
    let mut rest = index.clone();
    let mut digits = vec![0u128; count];
    for d in digits.iter_mut().rev() {
        *d = (&rest % &b).to_u128().expect("digit below base");
        rest /= &b;
    }
    debug_assert!(rest.is_zero(), "index exceeds base^count");
    digits
}

pub fn from_digits(digits: &[u128], base: u128) -> BigUint {
    digits.iter().fold(BigUint::zero(), |acc, &d| {
        debug_assert!(d < base);
        acc * base + d
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(7, 3), BigUint::from(35u32));
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(60, 30), BigUint::from(118_264_581_564_861_424u64));
    }

    #[test]
    fn logs_and_widths() {
        assert!((ln_biguint(&BigUint::from(10u32)) - 10f64.ln()).abs() < 1e-15);
        let big = BigUint::one() << 5000u32;
        assert!((ln_biguint(&big) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(index_width(&BigUint::one()), 0);
        assert_eq!(index_width(&BigUint::from(2u32)), 1);
        assert_eq!(index_width(&BigUint::from(10u32)), 4);
        assert_eq!(index_width(&BigUint::from(16u32)), 4);
        assert_eq!(index_width(&BigUint::from(17u32)), 5);
    }

    #[test]
    fn digits_roundtrip() {
        let d = vec![3, 0, 7, 1];
        let i = from_digits(&d, 8);
        assert_eq!(i, BigUint::from(3 * 512 + 7 * 8 + 1u32));
        assert_eq!(to_digits(&i, 8, 4), d);
    }
}

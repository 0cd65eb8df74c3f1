//! Log-factorials and exact multinomial coefficients.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

const TABLE_LEN: usize = 256;

fn table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for k in 1..TABLE_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// `log(n!)`: tabulated partial sums below 256, Stirling's series with four
/// correction terms above (truncation error below 1e-20 there).
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// `log(M! / ∏ k_i!)` with `M = Σ k_i`.
pub fn log_multinomial(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    log_factorial(total) - counts.iter().map(|&k| log_factorial(k)).sum::<f64>()
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Exact `M! / ∏ k_i!`, built as a product of binomials so intermediate
/// values stay no larger than the result.
pub fn multinomial(counts: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    let mut running = 0u64;
    for &k in counts {
        for j in 1..=k {
            acc *= running + j;
            acc /= j;
        }
        running += k;
    }
    acc
}

/// Natural logarithm of a big integer, from its top 64 bits.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return n.to_u64().map_or(f64::NAN, |v| (v as f64).ln());
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

//! From a measure back to a set: the multinomial blow-up.
//!
//! A measure `P` on `G` is rounded to counts `k_g` with `Σ k_g = M`. The
//! blow-up `G′` is the set of `M`-tuples over `G` of that type, so
//! `|G′| = M!/∏ k_g!`, and its projection along `r` is the set of tuples
//! over `π_r(G)` whose type is the fiber-summed counts. `G′` itself is never
//! built; only these cardinalities are.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::Serialize;

use crate::config::{fibers, Configuration, Slope};
use crate::entropy::Measure;
use crate::error::{Error, Result};
use crate::factorial::{log_multinomial, multinomial};
use crate::numfmt::format_sig;

/// Largest `M` for which exact big-integer counts are computed by default.
pub const DEFAULT_EXACT_THRESHOLD: u64 = 5000;

/// Counts `k_g` over a common denominator `M`; `q_g = k_g / M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalApprox {
    pub denominator: u64,
    pub counts: Vec<u64>,
}

impl RationalApprox {
    pub fn q(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.denominator as f64
    }

    pub fn max_error(&self, m: &Measure) -> f64 {
        m.weights()
            .iter()
            .enumerate()
            .map(|(i, p)| (self.q(i) - p).abs())
            .fold(0.0, f64::max)
    }
}

/// `M` for a target accuracy `δ`: `ceil(1/δ)`.
pub fn denominator_for_delta(delta: f64) -> u64 {
    (1.0 / delta).ceil() as u64
}

/// Largest-remainder apportionment of `M` units among the weights of `m`.
///
/// Each positive weight must end with at least one unit. Weights that
/// rounding leaves at zero take one unit from the entries currently rounded
/// up the most, so every `|k_g/M − p_g|` stays below `1/M`. When that is not
/// possible the call fails with [`Error::TooSmallM`]. Zero weights never
/// receive units.
pub fn approximate_measure(m: &Measure, denominator: u64) -> Result<RationalApprox> {
    let w = m.weights();
    let scale = denominator as f64;
    let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    if (denominator as usize) < support.len() {
        return Err(Error::TooSmallM {
            m: denominator,
            index: support[denominator as usize] + 1,
        });
    }

    let mut counts = vec![0u64; w.len()];
    let mut remainders = vec![0.0; w.len()];
    for &i in &support {
        let exact = scale * w[i];
        let floor = exact.floor();
        counts[i] = floor as u64;
        remainders[i] = exact - floor;
    }
    let mut order = support.clone();
    order.sort_by(|&i, &j| remainders[j].total_cmp(&remainders[i]).then(i.cmp(&j)));
    let mut assigned: u64 = counts.iter().sum();
    // rounding can overshoot by a unit when the weights sum to 1 + ε
    for &i in order.iter().rev() {
        if assigned <= denominator {
            break;
        }
        if counts[i] > 0 {
            counts[i] -= 1;
            assigned -= 1;
        }
    }
    for &i in order.iter().cycle().take((denominator - assigned) as usize) {
        counts[i] += 1;
    }

    let lifted: Vec<usize> = support
        .iter()
        .copied()
        .filter(|&i| counts[i] == 0)
        .collect();
    if !lifted.is_empty() {
        let error = |i: usize, k: u64| k as f64 / scale - w[i];
        let mut donors: Vec<usize> = support
            .iter()
            .copied()
            .filter(|&i| counts[i] >= 2 && error(i, counts[i]) > 0.0)
            .collect();
        if donors.len() < lifted.len() {
            return Err(Error::TooSmallM {
                m: denominator,
                index: lifted[donors.len()] + 1,
            });
        }
        donors.sort_by(|&i, &j| {
            error(j, counts[j])
                .total_cmp(&error(i, counts[i]))
                .then(i.cmp(&j))
        });
        for (&to, &from) in lifted.iter().zip(&donors) {
            counts[to] = 1;
            counts[from] -= 1;
        }
    }
    Ok(RationalApprox {
        denominator,
        counts,
    })
}

/// Exact cardinalities of `G′` and of each projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    pub g_prime: BigUint,
    pub projected: Vec<(Slope, BigUint)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub denominator: u64,
    pub log_g_prime: f64,
    pub log_projected: Vec<(Slope, f64)>,
    /// `None` when every projection of `G′` is a single tuple.
    pub alpha_prime: Option<f64>,
    pub exact_counts: Option<ExactCounts>,
}

impl BlowupReport {
    pub fn alpha_prime(&self) -> Result<f64> {
        self.alpha_prime.ok_or(Error::DegenerateDenominator)
    }

    pub fn is_degenerate(&self) -> bool {
        self.alpha_prime.is_none()
    }
}

impl Serialize for ExactCounts {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let projected: Vec<(String, String)> = self
            .projected
            .iter()
            .map(|(r, v)| (r.to_string(), v.to_string()))
            .collect();
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("g_prime", &self.g_prime.to_string())?;
        map.serialize_entry("projected", &OrderedMap(&projected))?;
        map.end()
    }
}

struct OrderedMap<'a, V: Serialize>(&'a [(String, V)]);

impl<V: Serialize> Serialize for OrderedMap<'_, V> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for BlowupReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let logs: Vec<(String, f64)> = self
            .log_projected
            .iter()
            .map(|(r, v)| (r.to_string(), *v))
            .collect();
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("M", &self.denominator)?;
        map.serialize_entry("log_G_prime", &self.log_g_prime)?;
        map.serialize_entry("log_projected", &OrderedMap(&logs))?;
        map.serialize_entry("alpha_prime", &self.alpha_prime)?;
        map.serialize_entry("exact_counts", &self.exact_counts)?;
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlowupOptions {
    /// Exact big-integer counts are computed only for `M` up to this value.
    pub exact_threshold: u64,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions {
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
        }
    }
}

impl BlowupOptions {
    pub fn log_only() -> Self {
        BlowupOptions { exact_threshold: 0 }
    }
}

/// Fiber-summed counts along one slope.
fn projected_counts(c: &Configuration, r: &Slope, counts: &[u64]) -> Vec<u64> {
    fibers(c, r)
        .classes
        .iter()
        .map(|class| class.members.iter().map(|&i| counts[i]).sum())
        .collect()
}

pub fn blowup_counts(
    c: &Configuration,
    approx: &RationalApprox,
    opts: BlowupOptions,
) -> Result<BlowupReport> {
    if approx.counts.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            got: approx.counts.len(),
        });
    }
    let per_slope: Vec<(Slope, Vec<u64>)> = c
        .slopes()
        .iter()
        .map(|r| (r.clone(), projected_counts(c, r, &approx.counts)))
        .collect();

    let log_g_prime = log_multinomial(&approx.counts);
    let log_projected: Vec<(Slope, f64)> = per_slope
        .iter()
        .map(|(r, k)| (r.clone(), log_multinomial(k)))
        .collect();
    let worst = log_projected.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let alpha_prime = (worst > 0.0).then(|| log_g_prime / worst);

    let exact_counts = (approx.denominator <= opts.exact_threshold).then(|| ExactCounts {
        g_prime: multinomial(&approx.counts),
        projected: per_slope
            .iter()
            .map(|(r, k)| (r.clone(), multinomial(k)))
            .collect(),
    });

    Ok(BlowupReport {
        denominator: approx.denominator,
        log_g_prime,
        log_projected,
        alpha_prime,
        exact_counts,
    })
}

/// One report per denominator, in the order given.
pub fn convergence_sweep(
    c: &Configuration,
    m: &Measure,
    denominators: &[u64],
    opts: BlowupOptions,
) -> Result<Vec<BlowupReport>> {
    if m.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            got: m.len(),
        });
    }
    denominators
        .par_iter()
        .map(|&d| blowup_counts(c, &approximate_measure(m, d)?, opts))
        .collect()
}

/// `(log N!, N log(N/e))`, the first by direct summation.
pub fn stirling_check(n: u64) -> (f64, f64) {
    let exact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    let x = n as f64;
    (exact, x * (x.ln() - 1.0))
}

/// Sweep as CSV: `M, log_G_prime, log_pi_<slope>..., alpha_prime`.
pub fn sweep_csv(slopes: &[Slope], reports: &[BlowupReport]) -> String {
    let mut out = String::from("M,log_G_prime");
    for r in slopes {
        out.push_str(&format!(",log_pi_{r}"));
    }
    out.push_str(",alpha_prime\n");
    for rep in reports {
        out.push_str(&rep.denominator.to_string());
        out.push(',');
        out.push_str(&format_sig(rep.log_g_prime));
        for (_, v) in &rep.log_projected {
            out.push(',');
            out.push_str(&format_sig(*v));
        }
        out.push(',');
        if let Some(a) = rep.alpha_prime {
            out.push_str(&format_sig(a));
        }
        out.push('\n');
    }
    out
}

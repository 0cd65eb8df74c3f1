//! Shannon entropy of measures on a configuration and of their
//! push-forwards along each slope.

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};

use crate::config::{fibers, Configuration, Slope};
use crate::error::{Error, Result};

/// Allowed deviation of a measure's total mass from 1.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// `ψ(x) = −x log x` with `ψ(0) = 0`, no domain check.
#[inline]
pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(x));
    }
    Ok(())
}

/// `ψ(x) = −x log x` on `[0, 1]`, continuously extended by `ψ(0) = 0`.
pub fn psi(x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(xlogx(x))
}

/// Binary entropy `φ(x) = ψ(x) + ψ(1 − x)`.
pub fn phi(x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(xlogx(x) + xlogx(1.0 - x))
}

/// A probability vector, one weight per configuration point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct Measure {
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for Measure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        Measure::new(raw.weights)
    }
}

impl Measure {
    /// Validates nonnegativity and total mass; renormalizes deviations
    /// within [`SIMPLEX_TOLERANCE`], rejects larger ones.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no weights".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidMeasure(format!(
                "weight {} is {w}, expected a finite nonnegative number",
                i + 1
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let mut weights = weights;
        if total != 1.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Measure { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Measure {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Measure { weights }
    }

    /// Skips validation. Callers guarantee the simplex constraint.
    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Measure { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// `H(P) = Σ ψ(p_i)`, summed in index order.
pub fn entropy(m: &Measure) -> f64 {
    m.weights.iter().map(|&p| xlogx(p)).sum()
}

fn check_dims(c: &Configuration, m: &Measure) -> Result<()> {
    if c.len() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            got: m.len(),
        });
    }
    Ok(())
}

/// Push-forward `π_r P`: one weight per fiber, fibers in ascending order of
/// their projected value.
pub fn pushforward(c: &Configuration, r: &Slope, m: &Measure) -> Result<Measure> {
    check_dims(c, m)?;
    let part = fibers(c, r);
    let class_of = part.class_of(c.len());
    let mut mass = vec![0.0; part.len()];
    for (i, &w) in m.weights.iter().enumerate() {
        mass[class_of[i]] += w;
    }
    Ok(Measure::from_raw(mass))
}

/// Fiber tables for every slope of a configuration, precomputed so that
/// projected entropies can be evaluated many times without touching the
/// rationals again.
#[derive(Debug, Clone)]
pub struct ProjectionTables {
    n_points: usize,
    slopes: Vec<Slope>,
    class_of: Vec<Vec<usize>>,
    n_classes: Vec<usize>,
}

impl ProjectionTables {
    pub fn new(c: &Configuration) -> Self {
        let mut class_of = Vec::with_capacity(c.slopes().len());
        let mut n_classes = Vec::with_capacity(c.slopes().len());
        for r in c.slopes() {
            let part = fibers(c, r);
            class_of.push(part.class_of(c.len()));
            n_classes.push(part.len());
        }
        ProjectionTables {
            n_points: c.len(),
            slopes: c.slopes().to_vec(),
            class_of,
            n_classes,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn slopes(&self) -> &[Slope] {
        &self.slopes
    }

    /// Writes `H(π_{r_j} P)` for every slope into `out`.
    pub fn projected_entropies_into(
        &self,
        weights: &[f64],
        scratch: &mut Vec<f64>,
        out: &mut Vec<f64>,
    ) {
        debug_assert_eq!(weights.len(), self.n_points);
        out.clear();
        for (class_of, &k) in self.class_of.iter().zip(&self.n_classes) {
            scratch.clear();
            scratch.resize(k, 0.0);
            for (i, &w) in weights.iter().enumerate() {
                scratch[class_of[i]] += w;
            }
            out.push(scratch.iter().map(|&q| xlogx(q)).sum());
        }
    }

    pub fn projected_entropies(&self, weights: &[f64]) -> Vec<f64> {
        let mut scratch = Vec::new();
        let mut out = Vec::with_capacity(self.slopes.len());
        self.projected_entropies_into(weights, &mut scratch, &mut out);
        out
    }

    pub fn profile(&self, m: &Measure) -> Result<EntropyProfile> {
        if m.len() != self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_points,
                got: m.len(),
            });
        }
        let h_total = entropy(m);
        let projected = self.projected_entropies(&m.weights);
        let worst = projected.iter().copied().fold(0.0, f64::max);
        if worst <= 0.0 {
            return Err(Error::DegenerateDenominator);
        }
        Ok(EntropyProfile {
            h_total,
            h_projected: self.slopes.iter().cloned().zip(projected).collect(),
            alpha: h_total / worst,
        })
    }
}

/// `H(P)`, each `H(π_{r_j} P)` and the entropy ratio
/// `α = H(P) / max_j H(π_{r_j} P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub h_total: f64,
    pub h_projected: Vec<(Slope, f64)>,
    pub alpha: f64,
}

impl EntropyProfile {
    pub fn max_projected(&self) -> f64 {
        self.h_projected.iter().map(|(_, h)| *h).fold(0.0, f64::max)
    }

    pub fn min_projected(&self) -> f64 {
        self.h_projected
            .iter()
            .map(|(_, h)| *h)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn projected(&self, r: &Slope) -> Option<f64> {
        self.h_projected
            .iter()
            .find(|(s, _)| s == r)
            .map(|(_, h)| *h)
    }
}

struct SlopeMap<'a>(&'a [(Slope, f64)]);

impl Serialize for SlopeMap<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (slope, h) in self.0 {
            map.serialize_entry(&slope.to_string(), h)?;
        }
        map.end()
    }
}

impl Serialize for EntropyProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("h_total", &self.h_total)?;
        map.serialize_entry("h_projected", &SlopeMap(&self.h_projected))?;
        map.serialize_entry("alpha", &self.alpha)?;
        map.end()
    }
}

/// Entropy profile of `m` on `c`.
pub fn entropy_ratio(c: &Configuration, m: &Measure) -> Result<EntropyProfile> {
    check_dims(c, m)?;
    ProjectionTables::new(c).profile(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{int, ratio, Point};
    use approx::assert_abs_diff_eq;

    fn slopes(names: &[&str]) -> Vec<Slope> {
        names.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn four_point() -> Configuration {
        Configuration::from_ints(
            &[(0, 1), (1, 0), (1, 1), (2, 0)],
            slopes(&["0", "1", "inf"]),
        )
        .unwrap()
    }

    fn slope2_set() -> Configuration {
        let mut pts: Vec<Point> = [(0, 1), (1, 0), (1, 1), (2, 0)]
            .iter()
            .map(|&(a, b)| Point::int(a, b))
            .collect();
        pts.push(Point::new(int(1), ratio(1, 2)));
        Configuration::new(pts, slopes(&["0", "1", "2", "inf"])).unwrap()
    }

    #[test]
    fn psi_and_phi_values() {
        assert_eq!(psi(1.0).unwrap(), 0.0);
        assert_eq!(psi(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(psi(0.5).unwrap(), 2f64.ln() / 2.0, epsilon = 1e-16);
        assert_abs_diff_eq!(phi(0.5).unwrap(), 2f64.ln(), epsilon = 1e-16);
        assert_eq!(phi(0.0).unwrap(), 0.0);
        assert_eq!(phi(1.0).unwrap(), 0.0);
        let third = phi(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(third, 3f64.ln() - 2.0 / 3.0 * 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(third, 0.63651, epsilon = 5e-6);
    }

    #[test]
    fn psi_domain() {
        assert!(matches!(psi(-0.1), Err(Error::Domain(_))));
        assert!(matches!(psi(1.5), Err(Error::Domain(_))));
        assert!(matches!(phi(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&Measure::uniform(3)), 3f64.ln(), epsilon = 1e-15);
        assert_eq!(entropy(&Measure::point_mass(4, 2)), 0.0);
        let m = Measure::new(vec![0.1135, 0.3865, 0.3865, 0.1135]).unwrap();
        let expected = 2.0 * xlogx(0.1135) + 2.0 * xlogx(0.3865);
        assert_abs_diff_eq!(entropy(&m), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(entropy(&m), 1.2288, epsilon = 1e-4);
    }

    #[test]
    fn measure_validation() {
        assert!(Measure::new(vec![]).is_err());
        assert!(Measure::new(vec![0.5, 0.6]).is_err());
        assert!(Measure::new(vec![-0.1, 1.1]).is_err());
        assert!(Measure::new(vec![f64::NAN, 1.0]).is_err());
        let m = Measure::new(vec![0.5, 0.5 + 5e-13]).unwrap();
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let parsed: Measure = serde_json::from_str(r#"{"weights": [0.25, 0.75]}"#).unwrap();
        assert_eq!(parsed.weights(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<Measure>(r#"{"weights": [0.25, 0.5]}"#).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let c = four_point();
        let m = Measure::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let one = pushforward(&c, &"1".parse().unwrap(), &m).unwrap();
        assert_abs_diff_eq!(one.weights()[0], 0.1 + 0.2, epsilon = 1e-16);
        assert_abs_diff_eq!(one.weights()[1], 0.3 + 0.4, epsilon = 1e-16);

        let inj = Configuration::from_ints(&[(3, 0), (1, 0), (2, 0)], slopes(&["0"])).unwrap();
        let m = Measure::new(vec![0.5, 0.2, 0.3]).unwrap();
        let pf = pushforward(&inj, &inj.slopes()[0], &m).unwrap();
        assert_eq!(pf.weights(), &[0.2, 0.3, 0.5]);

        let p = 0.2;
        let m = Measure::new(vec![p, p, p, p, 1.0 - 4.0 * p]).unwrap();
        let pf = pushforward(&slope2_set(), &"2".parse().unwrap(), &m).unwrap();
        assert_abs_diff_eq!(pf.weights()[0], p, epsilon = 1e-15);
        assert_abs_diff_eq!(pf.weights()[1], 1.0 - 2.0 * p, epsilon = 1e-15);
        assert_abs_diff_eq!(pf.weights()[2], p, epsilon = 1e-15);
    }

    #[test]
    fn pushforward_dimension_mismatch() {
        let r = pushforward(&four_point(), &Slope::Infinity, &Measure::uniform(3));
        assert!(matches!(
            r,
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn ruzsa_ratio() {
        let c = Configuration::from_ints(&[(0, 1), (1, 0), (1, 1)], slopes(&["0", "1", "inf"]))
            .unwrap();
        let prof = entropy_ratio(&c, &Measure::uniform(3)).unwrap();
        assert_abs_diff_eq!(
            prof.alpha,
            27f64.ln() / (27.0f64 / 4.0).ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn four_point_reference_measure() {
        let m = Measure::new(vec![0.1135, 0.3865, 0.3865, 0.1135]).unwrap();
        let prof = entropy_ratio(&four_point(), &m).unwrap();
        assert_abs_diff_eq!(prof.alpha, 1.7726, epsilon = 5e-4);
    }

    #[test]
    fn degenerate_denominator() {
        let c = Configuration::from_ints(&[(0, 1), (1, 0)], slopes(&["1"])).unwrap();
        assert!(matches!(
            entropy_ratio(&c, &Measure::uniform(2)),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn profile_serializes_keyed_by_slope() {
        let prof = entropy_ratio(&four_point(), &Measure::uniform(4)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&prof).unwrap();
        assert!(v["h_projected"]["inf"].is_number());
        assert!(v["h_projected"]["0"].is_number());
        assert!(v["alpha"].is_number());
    }
}

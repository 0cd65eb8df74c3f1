//! Point configurations in Q², slope projections and their fibers.
//!
//! Everything here is exact: coordinates and slopes are arbitrary-precision
//! rationals, so two points share a fiber exactly when their projected
//! values are equal as rationals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"` or an integer string into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| Error::ParseRational(s.to_string()))?;
    let den = BigInt::from_str(den).map_err(|_| Error::ParseRational(s.to_string()))?;
    if den.is_zero() {
        return Err(Error::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Integer strings for integers, `p/q` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Projection direction: a finite rational `r` (never −1) or infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slope {
    Finite(Rational),
    Infinity,
}

impl Slope {
    pub fn finite(r: Rational) -> Result<Self> {
        if r == -Rational::one() {
            return Err(ConfigError::ReservedSlope.into());
        }
        Ok(Slope::Finite(r))
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::finite(int(n))
    }

    /// The difference map `a − b`. This is the only way to obtain slope −1;
    /// it never appears in a [`Configuration`].
    pub(crate) fn difference() -> Self {
        Slope::Finite(-Rational::one())
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(r) => f.write_str(&format_rational(r)),
            Slope::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Slope::Infinity),
            other => Slope::finite(parse_rational(other)?),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub a: Rational,
    pub b: Rational,
}

impl Point {
    pub fn new(a: Rational, b: Rational) -> Self {
        Point { a, b }
    }

    pub fn int(a: i64, b: i64) -> Self {
        Point::new(int(a), int(b))
    }

    pub fn difference(&self) -> Rational {
        &self.a - &self.b
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            format_rational(&self.a),
            format_rational(&self.b)
        )
    }
}

/// `π_r(a, b) = a + r·b`, and `π_∞(a, b) = b`.
pub fn project(p: &Point, r: &Slope) -> Rational {
    match r {
        Slope::Finite(r) => &p.a + r * &p.b,
        Slope::Infinity => p.b.clone(),
    }
}

/// True iff the differences `a_i − b_i` are pairwise distinct.
pub fn check_difference_injective(points: &[Point]) -> bool {
    first_difference_collision(points).is_none()
}

fn first_difference_collision(points: &[Point]) -> Option<(usize, usize, Rational)> {
    let mut seen: HashMap<Rational, usize> = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let d = p.difference();
        if let Some(&j) = seen.get(&d) {
            return Some((j, i, d));
        }
        seen.insert(d, i);
    }
    None
}

/// A validated point set `G` together with its slope list.
///
/// Points keep the order they were given in; reports index them from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration", into = "RawConfiguration")]
pub struct Configuration {
    points: Vec<Point>,
    slopes: Vec<Slope>,
}

impl Configuration {
    pub fn new(points: Vec<Point>, slopes: Vec<Slope>) -> Result<Self> {
        if points.is_empty() {
            return Err(ConfigError::NoPoints.into());
        }
        if slopes.is_empty() {
            return Err(ConfigError::NoSlopes.into());
        }
        let mut seen = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if let Some(&j) = seen.get(p) {
                return Err(ConfigError::DuplicatePoint {
                    first: j + 1,
                    second: i + 1,
                }
                .into());
            }
            seen.insert(p, i);
        }
        if let Some((i, j, d)) = first_difference_collision(&points) {
            return Err(ConfigError::DifferenceCollision {
                first: i + 1,
                second: j + 1,
                difference: format_rational(&d),
            }
            .into());
        }
        for (i, s) in slopes.iter().enumerate() {
            if *s == Slope::difference() {
                return Err(ConfigError::ReservedSlope.into());
            }
            if slopes[..i].contains(s) {
                return Err(ConfigError::DuplicateSlope(s.to_string()).into());
            }
        }
        Ok(Configuration { points, slopes })
    }

    pub fn from_ints(points: &[(i64, i64)], slopes: Vec<Slope>) -> Result<Self> {
        Self::new(
            points.iter().map(|&(a, b)| Point::int(a, b)).collect(),
            slopes,
        )
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn slopes(&self) -> &[Slope] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points, different slope list.
    pub fn with_slopes(&self, slopes: Vec<Slope>) -> Result<Self> {
        Self::new(self.points.clone(), slopes)
    }

    pub fn fibers(&self, r: &Slope) -> FiberPartition {
        fibers(self, r)
    }
}

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    points: Vec<[String; 2]>,
    slopes: Vec<Slope>,
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = Error;

    fn try_from(raw: RawConfiguration) -> Result<Self> {
        let points = raw
            .points
            .iter()
            .map(|[a, b]| Ok(Point::new(parse_rational(a)?, parse_rational(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(points, raw.slopes)
    }
}

impl From<Configuration> for RawConfiguration {
    fn from(c: Configuration) -> Self {
        RawConfiguration {
            points: c
                .points
                .iter()
                .map(|p| [format_rational(&p.a), format_rational(&p.b)])
                .collect(),
            slopes: c.slopes,
        }
    }
}

/// One fiber `π_r^{-1}(ν)`: its projected value and 0-based member indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberClass {
    pub value: Rational,
    pub members: Vec<usize>,
}

/// The partition of point indices induced by one slope, classes ordered by
/// ascending value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberPartition {
    pub slope: Slope,
    pub classes: Vec<FiberClass>,
}

impl FiberPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.members.len()).collect()
    }

    /// For each point, the position of its class.
    pub fn class_of(&self, n_points: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n_points];
        for (k, class) in self.classes.iter().enumerate() {
            for &i in &class.members {
                out[i] = k;
            }
        }
        out
    }
}

fn partition_points(points: &[Point], r: &Slope) -> FiberPartition {
    let mut map: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        map.entry(project(p, r)).or_default().push(i);
    }
    FiberPartition {
        slope: r.clone(),
        classes: map
            .into_iter()
            .map(|(value, members)| FiberClass { value, members })
            .collect(),
    }
}

pub fn fibers(c: &Configuration, r: &Slope) -> FiberPartition {
    partition_points(&c.points, r)
}

/// `log|G| / max_j log|π_{r_j}(G)|`, natural logarithms.
pub fn cardinality_alpha(c: &Configuration) -> Result<f64> {
    let widest = c
        .slopes
        .iter()
        .map(|r| fibers(c, r).len())
        .max()
        .unwrap_or(0);
    if widest < 2 {
        return Err(Error::DegenerateProjection);
    }
    Ok((c.len() as f64).ln() / (widest as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slopes(names: &[&str]) -> Vec<Slope> {
        names.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn ruzsa() -> Configuration {
        Configuration::from_ints(&[(0, 1), (1, 0), (1, 1)], slopes(&["0", "1", "inf"])).unwrap()
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
    fn project_examples() {
        let p = Point::new(int(1), ratio(1, 2));
        assert_eq!(project(&p, &Slope::integer(2).unwrap()), int(2));
        let q = Point::new(ratio(7, 3), int(-5));
        assert_eq!(project(&q, &Slope::integer(0).unwrap()), ratio(7, 3));
        assert_eq!(project(&Point::int(3, -2), &Slope::Infinity), int(-2));
    }

    #[test]
    fn ruzsa_fibers_at_zero() {
        let f = fibers(&ruzsa(), &Slope::integer(0).unwrap());
        assert_eq!(f.classes.len(), 2);
        assert_eq!(f.classes[0].value, int(0));
        assert_eq!(f.classes[0].members, vec![0]);
        assert_eq!(f.classes[1].value, int(1));
        assert_eq!(f.classes[1].members, vec![1, 2]);
    }

    #[test]
    fn slope2_fibers_at_two() {
        let f = fibers(&slope2_set(), &Slope::integer(2).unwrap());
        let got: Vec<(Rational, Vec<usize>)> = f
            .classes
            .into_iter()
            .map(|c| (c.value, c.members))
            .collect();
        assert_eq!(
            got,
            vec![
                (int(1), vec![1]),
                (int(2), vec![0, 3, 4]),
                (int(3), vec![2])
            ]
        );
    }

    #[test]
    fn injective_projection_gives_singletons() {
        let c =
            Configuration::from_ints(&[(0, 0), (1, 0), (2, 0), (5, 0)], slopes(&["0"])).unwrap();
        assert_eq!(fibers(&c, &c.slopes()[0]).len(), 4);
    }

    #[test]
    fn difference_injectivity() {
        let ruzsa: Vec<Point> = [(0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| Point::int(a, b))
            .collect();
        assert!(check_difference_injective(&ruzsa));
        assert!(!check_difference_injective(&[
            Point::int(0, 0),
            Point::int(1, 1)
        ]));
        let stair: Vec<Point> = [(0, 1), (1, 1), (1, 0), (2, 0), (2, -1), (3, -1), (3, -2)]
            .iter()
            .map(|&(a, b)| Point::int(a, b))
            .collect();
        assert!(check_difference_injective(&stair));
        let mut diffs: Vec<Rational> = stair.iter().map(Point::difference).collect();
        diffs.sort();
        assert_eq!(diffs, (-1..=5).map(int).collect::<Vec<_>>());
    }

    #[test]
    fn cardinality_alpha_examples() {
        let a = cardinality_alpha(&ruzsa()).unwrap();
        assert!((a - 3f64.ln() / 2f64.ln()).abs() < 1e-15);
        for r in ruzsa().slopes() {
            assert_eq!(fibers(&ruzsa(), r).len(), 2);
        }

        let a = cardinality_alpha(&slope2_set()).unwrap();
        assert!((a - 5f64.ln() / 3f64.ln()).abs() < 1e-15);

        let with_injective = ruzsa().with_slopes(slopes(&["0", "2"])).unwrap();
        assert_eq!(cardinality_alpha(&with_injective).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_projection() {
        let c = Configuration::from_ints(&[(0, 0)], slopes(&["0", "inf"])).unwrap();
        assert!(matches!(
            cardinality_alpha(&c),
            Err(Error::DegenerateProjection)
        ));
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            "-1".parse::<Slope>(),
            Err(Error::Config(ConfigError::ReservedSlope))
        ));
        assert!(matches!(
            "-2/2".parse::<Slope>(),
            Err(Error::Config(ConfigError::ReservedSlope))
        ));
        assert!(matches!(
            parse_rational("1/0"),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(matches!(parse_rational("x"), Err(Error::ParseRational(_))));
        let dup = Configuration::from_ints(&[(0, 1), (0, 1)], slopes(&["0"]));
        assert!(matches!(
            dup,
            Err(Error::Config(ConfigError::DuplicatePoint {
                first: 1,
                second: 2
            }))
        ));
        let coll = Configuration::from_ints(&[(0, 0), (1, 1)], slopes(&["0"]));
        assert!(matches!(
            coll,
            Err(Error::Config(ConfigError::DifferenceCollision { .. }))
        ));
        let dup_slope = Configuration::from_ints(&[(0, 0)], slopes(&["1", "2/2"]));
        assert!(matches!(
            dup_slope,
            Err(Error::Config(ConfigError::DuplicateSlope(_)))
        ));
        assert!(matches!(
            Configuration::from_ints(&[(0, 0)], vec![]),
            Err(Error::Config(ConfigError::NoSlopes))
        ));
    }

    #[test]
    fn rationals_are_reduced() {
        let q = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(format_rational(&parse_rational("10/5").unwrap()), "2");
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"points": [["0","1"],["1","0"],["1","1"],["2","0"],["1","1/2"]], "slopes": ["0","1","2","inf"]}"#;
        let c: Configuration = serde_json::from_str(json).unwrap();
        assert_eq!(c, slope2_set());
        let back: Configuration =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);

        let bad = r#"{"points": [["0","1/0"]], "slopes": ["0"]}"#;
        assert!(serde_json::from_str::<Configuration>(bad).is_err());
        let bad = r#"{"points": [["0","1"]], "slopes": ["-1"]}"#;
        assert!(serde_json::from_str::<Configuration>(bad).is_err());
    }
}

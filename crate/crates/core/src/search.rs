//! Candidate generation and ranking: the staircase family and exhaustive
//! enumeration of small lattice configurations up to translation.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Configuration, Point, Slope};
use crate::error::{Error, Result};
use crate::optimizer::{maximize_alpha, OptimizationResult, OptimizerOptions, SymmetryAnsatz};

pub const DEFAULT_BUDGET: u128 = 2_000_000;

fn default_slopes() -> Vec<Slope> {
    vec![
        Slope::Finite(crate::config::int(0)),
        Slope::Finite(crate::config::int(1)),
        Slope::Infinity,
    ]
}

/// The `i`-th staircase point (0-based): `(0,1), (1,1), (1,0), (2,0), (2,-1), …`.
fn staircase_point(i: usize) -> (i64, i64) {
    let i = i as i64;
    ((i + 1) / 2, 1 - i / 2)
}

/// First `n` staircase points with slopes `(0, 1, ∞)`.
pub fn staircase(n: usize) -> Result<Configuration> {
    let pts: Vec<(i64, i64)> = (0..n).map(staircase_point).collect();
    Configuration::from_ints(&pts, default_slopes())
}

/// Translates the lexicographically smallest point to the origin and sorts
/// the points.
pub fn canonical_form(c: &Configuration) -> Configuration {
    let origin = c
        .points()
        .iter()
        .min()
        .expect("configurations are nonempty")
        .clone();
    let mut pts: Vec<Point> = c
        .points()
        .iter()
        .map(|p| Point::new(&p.a - &origin.a, &p.b - &origin.b))
        .collect();
    pts.sort();
    Configuration::new(pts, c.slopes().to_vec()).expect("translation preserves validity")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    /// Columns `a = 0, …, width`.
    pub width: u32,
    /// Rows `b = −height, …, height`.
    pub height: u32,
}

impl Grid {
    pub fn points(&self) -> Vec<(i64, i64)> {
        let h = self.height as i64;
        (0..=self.width as i64)
            .flat_map(|a| (-h..=h).map(move |b| (a, b)))
            .collect()
    }

    pub fn len(&self) -> usize {
        (self.width as usize + 1) * (2 * self.height as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub grid: Grid,
    pub size: usize,
    #[serde(default = "default_slopes")]
    pub slopes: Vec<Slope>,
    #[serde(default = "default_budget")]
    pub budget: u128,
    #[serde(default)]
    pub optimizer: OptimizerOptions,
    /// Also merge configurations whose fiber structures are isomorphic.
    #[serde(default)]
    pub structural_dedup: bool,
}

fn default_budget() -> u128 {
    DEFAULT_BUDGET
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedEntry {
    pub configuration: Configuration,
    pub result: OptimizationResult,
}

/// Descending by `best_alpha`; equal values keep canonical-form order.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RankedResult {
    pub entries: Vec<RankedEntry>,
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn canonical_ints(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let (oa, ob) = *points.iter().min().expect("nonempty");
    let mut out: Vec<(i64, i64)> = points.iter().map(|&(a, b)| (a - oa, b - ob)).collect();
    out.sort();
    out
}

fn differences_distinct(points: &[(i64, i64)]) -> bool {
    let mut d: Vec<i64> = points.iter().map(|&(a, b)| a - b).collect();
    d.sort_unstable();
    d.windows(2).all(|w| w[0] != w[1])
}

/// Per slope, the sorted fiber sizes. Isomorphic configurations share it.
fn fingerprint(c: &Configuration) -> Vec<Vec<usize>> {
    c.slopes()
        .iter()
        .map(|r| {
            let mut s = c.fibers(r).sizes();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Whether some relabeling of points maps every fiber partition of `a` onto
/// the corresponding partition of `b`. Backtracking over bijections.
fn structurally_equivalent(a: &Configuration, b: &Configuration) -> bool {
    let n = a.len();
    if n != b.len() || a.slopes().len() != b.slopes().len() {
        return false;
    }
    let classes = |c: &Configuration| -> Vec<Vec<usize>> {
        c.slopes().iter().map(|r| c.fibers(r).class_of(n)).collect()
    };
    let (ca, cb) = (classes(a), classes(b));
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn extend(
        i: usize,
        n: usize,
        ca: &[Vec<usize>],
        cb: &[Vec<usize>],
        image: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if i == n {
            return true;
        }
        for cand in 0..n {
            if used[cand] {
                continue;
            }
            let consistent = (0..i).all(|j| {
                ca.iter()
                    .zip(cb)
                    .all(|(pa, pb)| (pa[i] == pa[j]) == (pb[cand] == pb[image[j]]))
            });
            if consistent {
                image[i] = cand;
                used[cand] = true;
                if extend(i + 1, n, ca, cb, image, used) {
                    return true;
                }
                used[cand] = false;
            }
        }
        false
    }
    extend(0, n, &ca, &cb, &mut image, &mut used)
}

/// Difference-injective, translation-distinct configurations of the grid,
/// in canonical-form order.
pub fn enumerate_configurations(spec: &SearchSpec) -> Result<Vec<Configuration>> {
    let grid = spec.grid.points();
    let count = binomial(grid.len() as u128, spec.size as u128);
    if count > spec.budget {
        return Err(Error::BudgetExceeded {
            count,
            budget: spec.budget,
        });
    }
    if spec.size == 0 {
        return Ok(Vec::new());
    }
    let mut seen: BTreeSet<Vec<(i64, i64)>> = BTreeSet::new();
    for subset in grid.iter().copied().combinations(spec.size) {
        if differences_distinct(&subset) {
            seen.insert(canonical_ints(&subset));
        }
    }
    let mut configs = seen
        .into_iter()
        .map(|pts| Configuration::from_ints(&pts, spec.slopes.clone()))
        .collect::<Result<Vec<_>>>()?;

    if spec.structural_dedup {
        let mut kept: Vec<Configuration> = Vec::with_capacity(configs.len());
        let mut buckets: BTreeMap<Vec<Vec<usize>>, Vec<usize>> = BTreeMap::new();
        for c in configs {
            let bucket = buckets.entry(fingerprint(&c)).or_default();
            if bucket
                .iter()
                .any(|&k| structurally_equivalent(&kept[k], &c))
            {
                continue;
            }
            bucket.push(kept.len());
            kept.push(c);
        }
        configs = kept;
    }
    Ok(configs)
}

/// Optimizes every enumerated configuration and ranks them. Configurations
/// on which α is undefined (a single point) are left out.
pub fn enumerate_and_rank(spec: &SearchSpec) -> Result<RankedResult> {
    let configs = enumerate_configurations(spec)?;
    let results: Vec<Result<Option<RankedEntry>>> = configs
        .into_par_iter()
        .map(|c| match maximize_alpha(&c, None, &spec.optimizer) {
            Ok(result) => Ok(Some(RankedEntry {
                configuration: c,
                result,
            })),
            Err(Error::DegenerateDenominator) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut entries = Vec::new();
    for r in results {
        if let Some(e) = r? {
            entries.push(e);
        }
    }
    entries.sort_by(|x, y| y.result.best_alpha.total_cmp(&x.result.best_alpha));
    Ok(RankedResult { entries })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionCheck {
    pub alpha7: f64,
    pub alpha9: f64,
    pub improved: bool,
}

/// Margin by which the nine-point staircase must beat the seven-point one to
/// count as an improvement.
pub const IMPROVEMENT_MARGIN: f64 = 1e-6;

/// Palindromic optimization of the 7- and 9-point staircases.
pub fn extension_check(opts: &OptimizerOptions) -> Result<ExtensionCheck> {
    let seven = maximize_alpha(&staircase(7)?, Some(&SymmetryAnsatz::palindrome(7)), opts)?;
    let nine = maximize_alpha(&staircase(9)?, Some(&SymmetryAnsatz::palindrome(9)), opts)?;
    Ok(ExtensionCheck {
        alpha7: seven.best_alpha,
        alpha9: nine.best_alpha,
        improved: nine.best_alpha > seven.best_alpha + IMPROVEMENT_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{check_difference_injective, int};
    use crate::entropy::{entropy_ratio, Measure};

    fn ints(c: &Configuration) -> Vec<(i64, i64)> {
        use num_traits::ToPrimitive;
        c.points()
            .iter()
            .map(|p| (p.a.to_i64().unwrap(), p.b.to_i64().unwrap()))
            .collect()
    }

    #[test]
    fn staircase_prefixes() {
        assert_eq!(ints(&staircase(3).unwrap()), vec![(0, 1), (1, 1), (1, 0)]);
        assert_eq!(
            ints(&staircase(7).unwrap()),
            vec![(0, 1), (1, 1), (1, 0), (2, 0), (2, -1), (3, -1), (3, -2)]
        );
        let nine = ints(&staircase(9).unwrap());
        assert_eq!(&nine[7..], &[(4, -2), (4, -3)]);
        for n in 1..20 {
            let c = staircase(n).unwrap();
            let mut d: Vec<_> = c.points().iter().map(Point::difference).collect();
            d.sort();
            assert_eq!(d, (-1..=n as i64 - 2).map(int).collect::<Vec<_>>());
        }
    }

    #[test]
    fn staircase_three_is_ruzsa_relabeled() {
        let ruzsa = Configuration::from_ints(&[(0, 1), (1, 0), (1, 1)], default_slopes()).unwrap();
        assert_eq!(
            canonical_form(&staircase(3).unwrap()),
            canonical_form(&ruzsa)
        );
    }

    #[test]
    fn canonical_form_examples() {
        let c = Configuration::from_ints(&[(1, 2), (2, 1)], default_slopes()).unwrap();
        assert_eq!(ints(&canonical_form(&c)), vec![(0, 0), (1, -1)]);
        let once = canonical_form(&staircase(7).unwrap());
        assert_eq!(canonical_form(&once), once);
        let ruzsa = Configuration::from_ints(&[(0, 1), (1, 0), (1, 1)], default_slopes()).unwrap();
        let moved = Configuration::from_ints(&[(5, 6), (6, 5), (6, 6)], default_slopes()).unwrap();
        assert_eq!(canonical_form(&ruzsa), canonical_form(&moved));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(9, 4), 126);
        assert_eq!(binomial(20, 5), 15504);
        assert_eq!(binomial(3, 5), 0);
    }

    fn fast() -> OptimizerOptions {
        OptimizerOptions {
            starts: 8,
            ..Default::default()
        }
    }

    #[test]
    fn small_grid_contains_four_point_set() {
        let spec = SearchSpec {
            grid: Grid {
                width: 2,
                height: 1,
            },
            size: 4,
            slopes: default_slopes(),
            budget: DEFAULT_BUDGET,
            optimizer: fast(),
            structural_dedup: false,
        };
        let ranked = enumerate_and_rank(&spec).unwrap();
        let target = canonical_form(
            &Configuration::from_ints(&[(0, 1), (1, 0), (1, 1), (2, 0)], default_slopes()).unwrap(),
        );
        let hit = ranked
            .entries
            .iter()
            .find(|e| e.configuration == target)
            .expect("four-point set enumerated");
        assert!((hit.result.best_alpha - 1.7726).abs() < 5e-4);
        assert!(ranked
            .entries
            .windows(2)
            .all(|w| w[0].result.best_alpha >= w[1].result.best_alpha));
        for e in &ranked.entries {
            assert!(check_difference_injective(e.configuration.points()));
        }
    }

    #[test]
    fn single_points_rank_empty() {
        let spec = SearchSpec {
            grid: Grid {
                width: 2,
                height: 1,
            },
            size: 1,
            slopes: default_slopes(),
            budget: DEFAULT_BUDGET,
            optimizer: fast(),
            structural_dedup: false,
        };
        assert!(enumerate_and_rank(&spec).unwrap().entries.is_empty());
    }

    #[test]
    fn horizontal_pairs() {
        let spec = SearchSpec {
            grid: Grid {
                width: 1,
                height: 0,
            },
            size: 2,
            slopes: default_slopes(),
            budget: DEFAULT_BUDGET,
            optimizer: fast(),
            structural_dedup: false,
        };
        let ranked = enumerate_and_rank(&spec).unwrap();
        assert_eq!(ranked.entries.len(), 1);
        assert_eq!(ints(&ranked.entries[0].configuration), vec![(0, 0), (1, 0)]);
        assert!((ranked.entries[0].result.best_alpha - 1.0).abs() < 1e-15);
    }

    #[test]
    fn budget_is_enforced() {
        let spec = SearchSpec {
            grid: Grid {
                width: 3,
                height: 2,
            },
            size: 5,
            slopes: default_slopes(),
            budget: 1000,
            optimizer: fast(),
            structural_dedup: false,
        };
        assert!(matches!(
            enumerate_and_rank(&spec),
            Err(Error::BudgetExceeded {
                count: 15504,
                budget: 1000
            })
        ));
    }

    #[test]
    fn structural_dedup_merges_mirror_images() {
        let base = SearchSpec {
            grid: Grid {
                width: 2,
                height: 1,
            },
            size: 3,
            slopes: default_slopes(),
            budget: DEFAULT_BUDGET,
            optimizer: fast(),
            structural_dedup: false,
        };
        let plain = enumerate_configurations(&base).unwrap();
        let merged = enumerate_configurations(&SearchSpec {
            structural_dedup: true,
            ..base
        })
        .unwrap();
        assert!(merged.len() < plain.len());
        // every dropped configuration has an equivalent survivor with equal α at uniform
        for c in &plain {
            let survivor = merged
                .iter()
                .find(|k| structurally_equivalent(k, c))
                .expect("survivor");
            let a = entropy_ratio(c, &Measure::uniform(3));
            let b = entropy_ratio(survivor, &Measure::uniform(3));
            match (a, b) {
                (Ok(a), Ok(b)) => assert!((a.alpha - b.alpha).abs() < 1e-15),
                (Err(_), Err(_)) => {}
                _ => panic!("equivalence changed degeneracy"),
            }
        }
    }

    #[test]
    fn spec_json() {
        let s: SearchSpec = serde_json::from_str(
            r#"{"grid": {"width": 3, "height": 2}, "size": 5, "slopes": ["0","1","2","inf"], "budget": 2000000, "optimizer": {"starts": 4}}"#,
        )
        .unwrap();
        assert_eq!(s.grid.len(), 20);
        assert_eq!(s.optimizer.starts, 4);
        assert_eq!(s.slopes.len(), 4);
        assert!(!s.structural_dedup);
    }
}

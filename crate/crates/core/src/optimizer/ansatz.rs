//! Linear restrictions of the simplex: index ties `p_i = p_j` and rational
//! affine relations `Σ c_k p_k = d`.
//!
//! The constraint system (together with `Σ p = 1`) is reduced exactly over
//! the rationals. Non-pivot columns become the free coordinates, so a
//! parameter vector is literally a sub-vector of the measure.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::config::{format_rational, int, parse_rational, Rational};
use crate::error::{Error, Result};

/// `Σ c_k p_k = rhs`, indices 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRelation {
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawRelation {
    terms: Vec<(usize, String)>,
    rhs: String,
}

impl Serialize for LinearRelation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawRelation {
            terms: self
                .terms
                .iter()
                .map(|(i, c)| (*i, format_rational(c)))
                .collect(),
            rhs: format_rational(&self.rhs),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearRelation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRelation::deserialize(d)?;
        let terms = raw
            .terms
            .iter()
            .map(|(i, c)| parse_rational(c).map(|c| (*i, c)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let rhs = parse_rational(&raw.rhs).map_err(serde::de::Error::custom)?;
        Ok(LinearRelation { terms, rhs })
    }
}

/// Ties and affine relations on measure weights, all indices 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryAnsatz {
    #[serde(default)]
    pub ties: Vec<(usize, usize)>,
    #[serde(default)]
    pub relations: Vec<LinearRelation>,
}

impl SymmetryAnsatz {
    pub fn from_ties(ties: &[(usize, usize)]) -> Self {
        SymmetryAnsatz {
            ties: ties.to_vec(),
            relations: Vec::new(),
        }
    }

    /// `p_i = p_{n+1-i}` for every `i`.
    pub fn palindrome(n: usize) -> Self {
        Self::from_ties(&(1..=n / 2).map(|i| (n + 1 - i, i)).collect::<Vec<_>>())
    }

    pub fn with_relation(mut self, terms: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        self.relations.push(LinearRelation { terms, rhs });
        self
    }
}

/// Affine map from free coordinates onto the constrained simplex hyperplane:
/// `p = base + basis · t`.
#[derive(Debug, Clone)]
pub struct AffineParam {
    n: usize,
    base: Vec<f64>,
    // row-major n × dim
    basis: Vec<Vec<f64>>,
    free: Vec<usize>,
    relations: Vec<(Vec<(usize, f64)>, f64)>,
    ties: Vec<(usize, usize)>,
}

impl AffineParam {
    /// Unrestricted simplex on `n` points.
    pub fn simplex(n: usize) -> Self {
        Self::new(n, &SymmetryAnsatz::default()).expect("bare simplex is consistent")
    }

    pub fn new(n: usize, ansatz: &SymmetryAnsatz) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidAnsatz("no points".into()));
        }
        let check = |i: usize| -> Result<usize> {
            if i == 0 || i > n {
                Err(Error::InvalidAnsatz(format!("index {i} outside 1..={n}")))
            } else {
                Ok(i - 1)
            }
        };

        // augmented rows [c_1 .. c_n | d]
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let mut ties = Vec::new();
        for &(i, j) in &ansatz.ties {
            let (i, j) = (check(i)?, check(j)?);
            ties.push((i, j));
            let mut row = vec![Rational::zero(); n + 1];
            row[i] += int(1);
            row[j] -= int(1);
            rows.push(row);
        }
        let mut relations = Vec::new();
        for rel in &ansatz.relations {
            let mut row = vec![Rational::zero(); n + 1];
            let mut float_terms = Vec::new();
            for (i, c) in &rel.terms {
                let i = check(*i)?;
                row[i] += c;
                float_terms.push((i, to_f64(c)));
            }
            row[n] = rel.rhs.clone();
            relations.push((float_terms, to_f64(&rel.rhs)));
            rows.push(row);
        }
        rows.push((0..=n).map(|_| int(1)).collect());

        let pivots = reduce(&mut rows, n);
        if rows.iter().skip(pivots.len()).any(|r| !r[n].is_zero()) {
            return Err(Error::InvalidAnsatz("constraints are inconsistent".into()));
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        if free.is_empty() {
            return Err(Error::InvalidAnsatz(
                "constraints leave no free parameter".into(),
            ));
        }

        let mut base = vec![0.0; n];
        let mut basis = vec![vec![0.0; free.len()]; n];
        for (r, &pc) in pivots.iter().enumerate() {
            base[pc] = to_f64(&rows[r][n]);
            for (k, &fc) in free.iter().enumerate() {
                basis[pc][k] = -to_f64(&rows[r][fc]);
            }
        }
        for (k, &fc) in free.iter().enumerate() {
            basis[fc][k] = 1.0;
        }
        Ok(AffineParam {
            n,
            base,
            basis,
            free,
            relations,
            ties,
        })
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    /// 0-based indices of the free coordinates.
    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn raw(&self, t: &[f64]) -> Vec<f64> {
        let mut out = self.base.clone();
        self.raw_into(t, &mut out);
        out
    }

    pub fn raw_into(&self, t: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (b, row) in self.base.iter().zip(&self.basis) {
            let mut v = *b;
            for (c, x) in row.iter().zip(t) {
                v += c * x;
            }
            out.push(v);
        }
    }

    /// Free coordinates of a full weight vector.
    pub fn coords(&self, weights: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| weights[i]).collect()
    }

    /// Clips negative weights to zero and renormalizes. False if nothing is
    /// left or a constraint no longer holds within `tol`.
    pub fn feasible_into(&self, t: &[f64], out: &mut Vec<f64>, tol: f64) -> bool {
        self.raw_into(t, out);
        let mut total = 0.0;
        for w in out.iter_mut() {
            if !w.is_finite() {
                return false;
            }
            if *w < 0.0 {
                *w = 0.0;
            }
            total += *w;
        }
        if total <= 0.0 {
            return false;
        }
        if total != 1.0 {
            out.iter_mut().for_each(|w| *w /= total);
        }
        self.satisfied(out, tol)
    }

    pub fn feasible(&self, t: &[f64], tol: f64) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n);
        self.feasible_into(t, &mut out, tol).then_some(out)
    }

    pub fn satisfied(&self, weights: &[f64], tol: f64) -> bool {
        self.ties
            .iter()
            .all(|&(i, j)| (weights[i] - weights[j]).abs() <= tol)
            && self.relations.iter().all(|(terms, rhs)| {
                let lhs: f64 = terms.iter().map(|&(i, c)| c * weights[i]).sum();
                (lhs - rhs).abs() <= tol
            })
    }

    /// For one-dimensional families, the parameter interval on which every
    /// raw weight is nonnegative.
    pub fn interval(&self) -> Option<(f64, f64)> {
        if self.dim() != 1 {
            return None;
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (b, row) in self.base.iter().zip(&self.basis) {
            let c = row[0];
            if c > 0.0 {
                lo = lo.max(-b / c);
            } else if c < 0.0 {
                hi = hi.min(-b / c);
            } else if *b < 0.0 {
                return None;
            }
        }
        (lo < hi && lo.is_finite() && hi.is_finite()).then_some((lo, hi))
    }
}

fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Gauss-Jordan elimination over the first `cols` columns. Returns the pivot
/// columns in row order; rows past the pivots are zero on those columns.
fn reduce(rows: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c].clone();
        rows[r].iter_mut().for_each(|x| *x = &*x / &lead);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &factor * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

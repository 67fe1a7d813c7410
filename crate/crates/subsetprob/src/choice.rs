//! Weighted choice between the factors of a product experiment.
//!
//! Performing a product means some hidden process picks a factor. When that
//! process is itself probabilistic with fixed weights, a family of classical
//! probabilities `v_i` for the factors combines to `sum(x_i * v_i)`. Two
//! facts about this combination matter for the calculus and are checkable
//! here exactly:
//!
//! - certainty of the combination forces certainty of every factor precisely
//!   when every weight is positive ([`certainty_grid_diagnostic`]);
//! - letting the weights range over all distributions, a family of subset
//!   values fills out exactly the convex hull of their union
//!   ([`attainable_hull`]).

use std::fmt;

use num::{One, Signed};

use crate::error::Error;
use crate::interval::UnitIntervalSet;
use crate::rational::{in_unit_interval, one, ratio, Rational};

/// A probability distribution over the factors of a product: finitely many
/// rational weights in [0, 1] summing to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceWeights(Vec<Rational>);

impl ChoiceWeights {
    pub fn new(weights: Vec<Rational>) -> Result<Self, Error> {
        if weights.is_empty() {
            return Err(Error::ZeroCount { what: "number of weights" });
        }
        for w in &weights {
            if !in_unit_interval(w) {
                return Err(Error::OutOfUnitInterval {
                    what: "weight",
                    value: w.clone(),
                });
            }
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(Error::WeightSumNotOne { sum });
        }
        Ok(ChoiceWeights(weights))
    }

    /// Equal weight `1/n` on each of `n` factors.
    pub fn uniform(n: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::ZeroCount { what: "number of weights" });
        }
        Ok(ChoiceWeights(vec![ratio(1, n as i64); n]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rational> {
        self.0.iter()
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(Rational::is_positive)
    }
}

impl fmt::Display for ChoiceWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

/// The exact classical probability `sum(x_i * v_i)` of a weighted product
/// whose factors have classical probabilities `v_i`.
pub fn convex_combination(
    weights: &ChoiceWeights,
    values: &[Rational],
) -> Result<Rational, Error> {
    if weights.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: values.len(),
        });
    }
    for v in values {
        if !in_unit_interval(v) {
            return Err(Error::OutOfUnitInterval {
                what: "probability",
                value: v.clone(),
            });
        }
    }
    Ok(weights.iter().zip(values).map(|(w, v)| w * v).sum())
}

/// The set of product values attainable by varying the choice weights over
/// all distributions: the convex hull of the union of the factor values.
/// Every factor must be performable, since any factor might be the one
/// chosen.
pub fn attainable_hull(values: &[UnitIntervalSet]) -> Result<UnitIntervalSet, Error> {
    if values.is_empty() {
        return Err(Error::EmptyConvexHull);
    }
    if let Some(index) = values.iter().position(UnitIntervalSet::is_empty) {
        return Err(Error::UnperformableFactor { index });
    }
    UnitIntervalSet::union_all(values).convex_hull()
}

/// Result of an exhaustive grid search for violations of the certainty
/// transfer implication under fixed weights; see
/// [`certainty_grid_diagnostic`].
#[derive(Clone, Debug)]
pub struct CertaintyGridReport {
    pub weights: ChoiceWeights,
    pub grid_step: Rational,
    pub all_weights_positive: bool,
    /// Factor probability vectors with `sum(x_i * v_i) = 1` but some
    /// `v_j != 1`, in grid order.
    pub counterexamples: Vec<Vec<Rational>>,
}

impl CertaintyGridReport {
    /// True when no counterexample exists on the grid, so combination
    /// certainty forced factor certainty.
    pub fn implication_holds(&self) -> bool {
        self.counterexamples.is_empty()
    }

    /// The implication should hold exactly when all weights are positive;
    /// this reports whether the search confirmed that equivalence.
    pub fn agrees(&self) -> bool {
        self.implication_holds() == self.all_weights_positive
    }

    pub fn counterexample(&self) -> Option<&[Rational]> {
        self.counterexamples.first().map(Vec::as_slice)
    }
}

impl fmt::Display for CertaintyGridReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "weights {} on a grid of step {}",
            self.weights, self.grid_step
        )?;
        match self.counterexample() {
            None => writeln!(f, "combination certainty forces every factor to be certain")?,
            Some(v) => {
                let parts: Vec<String> = v.iter().map(Rational::to_string).collect();
                writeln!(
                    f,
                    "{} counterexamples, first: factor probabilities ({})",
                    self.counterexamples.len(),
                    parts.join(", ")
                )?;
            }
        }
        write!(
            f,
            "matches the positivity of the weights: {}",
            if self.agrees() { "yes" } else { "no" }
        )
    }
}

/// Search the whole grid `{0, s, 2s, .., 1}^n` of factor probability vectors
/// for violations of "`sum(x_i * v_i) = 1` implies every `v_i = 1`". The step
/// `s` must divide 1 exactly, so the grid contains both endpoints and the
/// arithmetic stays exact. The implication fails exactly when some weight is
/// zero: a zero-weighted factor can do anything without disturbing the sum.
pub fn certainty_grid_diagnostic(
    weights: &ChoiceWeights,
    grid_step: &Rational,
) -> Result<CertaintyGridReport, Error> {
    let inverse = if grid_step.is_positive() {
        one() / grid_step
    } else {
        return Err(Error::InvalidGridStep { step: grid_step.clone() });
    };
    if !inverse.is_integer() {
        return Err(Error::InvalidGridStep { step: grid_step.clone() });
    }
    let k: usize = inverse
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidGridStep { step: grid_step.clone() })?;
    let n = weights.len();
    let total = (k as u128 + 1).checked_pow(n as u32);
    match total {
        Some(t) if t <= 2_000_000 => {}
        _ => return Err(Error::GridTooLarge { points: k + 1 }),
    }

    let grid: Vec<Rational> = (0..=k).map(|i| ratio(i as i64, 1) * grid_step).collect();
    let mut idx = vec![0usize; n];
    let mut counterexamples = Vec::new();
    'grid: loop {
        let sum: Rational = weights
            .iter()
            .zip(&idx)
            .map(|(w, &i)| w * &grid[i])
            .sum();
        if sum.is_one() && !idx.iter().all(|&i| grid[i].is_one()) {
            counterexamples.push(idx.iter().map(|&i| grid[i].clone()).collect());
        }
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            if idx[pos] < k {
                idx[pos] += 1;
                for slot in idx.iter_mut().skip(pos + 1) {
                    *slot = 0;
                }
                continue 'grid;
            }
        }
        break;
    }
    Ok(CertaintyGridReport {
        weights: weights.clone(),
        grid_step: grid_step.clone(),
        all_weights_positive: weights.all_positive(),
        counterexamples,
    })
}

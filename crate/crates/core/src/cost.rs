//! Cost vectors and the Pareto-dominance kernel.
//!
//! All cost arithmetic is exact integer arithmetic. The derived [`Ord`] on
//! [`CostVector`] is the lexicographic order (first component most
//! significant); it is a linear extension of dominance, so the least element
//! of any set under `Ord` is never dominated by another member.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Integer cost component.
pub type Cost = u64;

/// An `M`-dimensional non-negative cost.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostVector(SmallVec<[Cost; 4]>);

impl CostVector {
    pub fn zeros(m: usize) -> Self {
        CostVector(SmallVec::from_elem(0, m))
    }

    /// The all-ones vector scaled by `k`.
    pub fn splat(m: usize, k: Cost) -> Self {
        CostVector(SmallVec::from_elem(k, m))
    }

    pub fn from_slice(components: &[Cost]) -> Self {
        CostVector(SmallVec::from_slice(components))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Cost] {
        &self.0
    }

    pub fn get(&self, m: usize) -> Cost {
        self.0[m]
    }

    fn check_len(&self, other: &CostVector) {
        assert_eq!(
            self.len(),
            other.len(),
            "cost vectors of different dimension compared: {self:?} vs {other:?}"
        );
    }

    /// Pareto dominance: no worse in every component, strictly better in one.
    ///
    /// Panics if the dimensions differ.
    pub fn dominates(&self, other: &CostVector) -> bool {
        self.check_len(other);
        let mut strict = false;
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            if a > b {
                return false;
            }
            if a < b {
                strict = true;
            }
        }
        strict
    }

    /// `dominates(other) || self == other`, i.e. component-wise `<=`.
    pub fn dominates_or_equal(&self, other: &CostVector) -> bool {
        self.check_len(other);
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Lexicographic comparison, first component most significant.
    pub fn lex_cmp(&self, other: &CostVector) -> Ordering {
        self.check_len(other);
        self.0.cmp(&other.0)
    }

    /// Lexicographic comparison with the last component most significant.
    pub fn reverse_lex_cmp(&self, other: &CostVector) -> Ordering {
        self.check_len(other);
        self.0.iter().rev().cmp(other.0.iter().rev())
    }

    /// Component-wise product.
    pub fn hadamard(&self, other: &CostVector) -> CostVector {
        self.check_len(other);
        CostVector(self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).collect())
    }

    pub fn scaled(&self, k: Cost) -> CostVector {
        CostVector(self.0.iter().map(|a| a * k).collect())
    }

    /// `self + k * other`, used for wait-adjusted label comparisons.
    pub fn add_scaled(&self, other: &CostVector, k: Cost) -> CostVector {
        self.check_len(other);
        CostVector(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + k * b).collect())
    }

    pub fn sum<'a>(m: usize, items: impl IntoIterator<Item = &'a CostVector>) -> CostVector {
        items.into_iter().fold(CostVector::zeros(m), |acc, c| &acc + c)
    }
}

impl fmt::Debug for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<Vec<Cost>> for CostVector {
    fn from(v: Vec<Cost>) -> Self {
        CostVector(SmallVec::from_vec(v))
    }
}

impl<const N: usize> From<[Cost; N]> for CostVector {
    fn from(v: [Cost; N]) -> Self {
        CostVector::from_slice(&v)
    }
}

impl Add for &CostVector {
    type Output = CostVector;

    fn add(self, rhs: &CostVector) -> CostVector {
        self.check_len(rhs);
        CostVector(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Add<&CostVector> for CostVector {
    type Output = CostVector;

    fn add(mut self, rhs: &CostVector) -> CostVector {
        self += rhs;
        self
    }
}

impl AddAssign<&CostVector> for CostVector {
    fn add_assign(&mut self, rhs: &CostVector) {
        self.check_len(rhs);
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
    }
}

/// Returns the maximal cost-unique non-dominated subset of `items`.
///
/// Among cost-equal items the first in input order is kept. Output order
/// follows input order.
pub fn pareto_filter<T>(items: impl IntoIterator<Item = (CostVector, T)>) -> Vec<(CostVector, T)> {
    let mut set = ParetoSet::new();
    for (cost, payload) in items {
        set.insert(cost, payload);
    }
    set.into_vec()
}

/// Incrementally maintained cost-unique Pareto set (first-wins on ties).
#[derive(Clone, Debug)]
pub struct ParetoSet<T> {
    items: Vec<(CostVector, T)>,
}

impl<T> Default for ParetoSet<T> {
    fn default() -> Self {
        ParetoSet { items: Vec::new() }
    }
}

impl<T> ParetoSet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// True if some member dominates or equals `cost`.
    pub fn covers(&self, cost: &CostVector) -> bool {
        self.items.iter().any(|(c, _)| c.dominates_or_equal(cost))
    }

    /// Inserts unless covered; evicts members the new cost dominates.
    /// Returns whether the item was inserted.
    pub fn insert(&mut self, cost: CostVector, payload: T) -> bool {
        if self.covers(&cost) {
            return false;
        }
        self.items.retain(|(c, _)| !cost.dominates(c));
        self.items.push((cost, payload));
        true
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(CostVector, T)> {
        self.items.iter()
    }

    pub fn costs(&self) -> impl Iterator<Item = &CostVector> {
        self.items.iter().map(|(c, _)| c)
    }

    pub fn into_vec(self) -> Vec<(CostVector, T)> {
        self.items
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[Cost]) -> CostVector {
        CostVector::from_slice(v)
    }

    #[test]
    fn dominance_examples() {
        assert!(cv(&[1, 2]).dominates(&cv(&[2, 2])));
        assert!(!cv(&[1, 2]).dominates(&cv(&[2, 1])));
        assert!(!cv(&[2, 1]).dominates(&cv(&[1, 2])));
        assert!(!cv(&[3, 3]).dominates(&cv(&[3, 3])));
    }

    #[test]
    fn dominates_or_equal_examples() {
        assert!(cv(&[3, 3]).dominates_or_equal(&cv(&[3, 3])));
        assert!(cv(&[1, 1]).dominates_or_equal(&cv(&[2, 2])));
        assert!(!cv(&[2, 1]).dominates_or_equal(&cv(&[1, 2])));
    }

    #[test]
    #[should_panic(expected = "different dimension")]
    fn length_mismatch_is_a_contract_violation() {
        cv(&[1, 2]).dominates(&cv(&[1, 2, 3]));
    }

    #[test]
    #[should_panic(expected = "different dimension")]
    fn length_mismatch_in_weak_dominance() {
        cv(&[1]).dominates_or_equal(&cv(&[1, 2]));
    }

    #[test]
    fn pareto_filter_examples() {
        let kept = pareto_filter(vec![(cv(&[1, 3]), 'a'), (cv(&[3, 1]), 'b'), (cv(&[2, 2]), 'c')]);
        assert_eq!(kept.len(), 3);

        let kept = pareto_filter(vec![(cv(&[1, 1]), 'a'), (cv(&[2, 2]), 'b')]);
        assert_eq!(kept, vec![(cv(&[1, 1]), 'a')]);

        let kept = pareto_filter(vec![(cv(&[1, 2]), "first"), (cv(&[1, 2]), "second")]);
        assert_eq!(kept, vec![(cv(&[1, 2]), "first")]);
    }

    #[test]
    fn pareto_filter_late_dominator_evicts() {
        let kept = pareto_filter(vec![(cv(&[4, 4]), 0), (cv(&[5, 1]), 1), (cv(&[1, 1]), 2)]);
        assert_eq!(kept, vec![(cv(&[1, 1]), 2)]);
    }

    #[test]
    fn lexicographic_orders() {
        assert_eq!(cv(&[1, 9]).lex_cmp(&cv(&[2, 0])), Ordering::Less);
        assert_eq!(cv(&[1, 9]).reverse_lex_cmp(&cv(&[2, 0])), Ordering::Greater);
        assert_eq!(cv(&[1, 9]).cmp(&cv(&[2, 0])), Ordering::Less);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(cv(&[2, 3]).hadamard(&cv(&[1, 4])), cv(&[2, 12]));
        assert_eq!(&cv(&[1, 2]) + &cv(&[3, 4]), cv(&[4, 6]));
        assert_eq!(cv(&[1, 2]).add_scaled(&cv(&[1, 1]), 3), cv(&[4, 5]));
        assert_eq!(CostVector::sum(2, [cv(&[1, 0]), cv(&[0, 1]), cv(&[1, 1])].iter()), cv(&[2, 2]));
    }

    #[test]
    fn serde_is_a_plain_array() {
        assert_eq!(serde_json::to_string(&cv(&[7, 2, 9])).unwrap(), "[7,2,9]");
    }
}

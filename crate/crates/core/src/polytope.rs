//! Local-polytope membership.
//!
//! A behavior is local exactly when it is a convex mixture of the sixteen
//! deterministic counterfactual tables. Membership is decided by linear
//! feasibility over the mixture weights; a failed membership is certified by
//! a violated CHSH facet. No-signalling is screened first because it is
//! necessary for membership but not sufficient.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{cells, no_signalling_check, Behavior};
use crate::outcome::SettingPair;
use crate::scalar::Scalar;
use crate::simplex::{find_feasible_point, Feasibility, SimplexError};
use crate::table::CounterfactualTable;

/// Bound of every CHSH facet over the local polytope.
pub const CHSH_LOCAL_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolytopeError {
    #[error("signalling behavior: marginal gap {gap} exceeds tolerance")]
    Signalling { gap: f64 },
    #[error("LP numerical failure: {0}")]
    Numerical(String),
    #[error("tolerance must be non-negative")]
    NegativeTolerance,
}

impl From<SimplexError> for PolytopeError {
    fn from(e: SimplexError) -> Self {
        PolytopeError::Numerical(e.to_string())
    }
}

/// `±E11 ±E12 ±E21 ±E22` with an odd number of minus signs.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet<T> {
    /// Signs of `E11, E12, E21, E22`.
    pub signs: [i8; 4],
    pub value: T,
}

impl<T> Facet<T> {
    /// Identifier such as `"+E11+E12+E21-E22"`.
    pub fn id(&self) -> String {
        SettingPair::ALL
            .iter()
            .zip(self.signs)
            .map(|(pair, s)| format!("{}E{}", if s > 0 { '+' } else { '-' }, pair.label()))
            .collect()
    }
}

impl<T: fmt::Display> fmt::Display for Facet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.id(), self.value)
    }
}

/// Sign patterns of the eight CHSH facets.
pub fn facet_signs() -> impl Iterator<Item = [i8; 4]> {
    (0u8..16).filter_map(|bits| {
        let signs: [i8; 4] = std::array::from_fn(|k| if bits >> (3 - k) & 1 == 1 { -1 } else { 1 });
        let minus = signs.iter().filter(|&&s| s < 0).count();
        (minus % 2 == 1).then_some(signs)
    })
}

/// The eight CHSH facet values of `behavior`.
pub fn chsh_facets<T: Scalar>(behavior: &Behavior<T>) -> Vec<Facet<T>> {
    let corr = SettingPair::ALL.map(|pair| behavior.correlator(pair));
    facet_signs()
        .map(|signs| {
            let value = signs.iter().zip(&corr).fold(T::zero(), |acc, (&s, e)| {
                if s > 0 {
                    acc + e.clone()
                } else {
                    acc - e.clone()
                }
            });
            Facet { signs, value }
        })
        .collect()
}

/// Facet with the largest value (first one on ties).
pub fn max_facet<T: Scalar>(behavior: &Behavior<T>) -> Facet<T> {
    chsh_facets(behavior)
        .into_iter()
        .reduce(|best, f| if f.value > best.value { f } else { best })
        .expect("eight facets")
}

/// The "all eight facets within `2 + tol`" rule.
pub fn satisfies_chsh_facets<T: Scalar>(behavior: &Behavior<T>, tol: &T) -> bool {
    let bound = T::from_f64_lossy(CHSH_LOCAL_BOUND) + tol.clone();
    chsh_facets(behavior).iter().all(|f| f.value <= bound)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolytopeVerdict<T> {
    /// Mixture weights over [`CounterfactualTable::all`] reproducing the behavior.
    Local { weights: [T; 16] },
    /// A facet exceeding the local bound by more than the tolerance.
    Nonlocal { facet: Facet<T> },
}

impl<T> PolytopeVerdict<T> {
    pub fn is_local(&self) -> bool {
        matches!(self, PolytopeVerdict::Local { .. })
    }
}

/// Decides whether some mixture of deterministic tables reproduces every
/// cell of `behavior` within `tol`.
pub fn local_polytope_member<T: Scalar>(
    behavior: &Behavior<T>,
    tol: &T,
) -> Result<PolytopeVerdict<T>, PolytopeError> {
    if *tol < T::zero() {
        return Err(PolytopeError::NegativeTolerance);
    }
    if !no_signalling_check(behavior, tol) {
        return Err(PolytopeError::Signalling { gap: behavior.max_signalling_gap().to_f64_lossy() });
    }

    // Variables: 16 weights, 16 upper slacks, 16 lower slacks.
    //   M w + u = p + tol,   M w - l = p - tol,   Σ w = 1.
    let incidence = incidence_matrix();
    let probs = behavior.probs();
    let n = 48;
    let mut a: Vec<Vec<T>> = Vec::with_capacity(33);
    let mut b: Vec<T> = Vec::with_capacity(33);
    for (c, row_inc) in incidence.iter().enumerate() {
        for (offset, sign) in [(16, 1i8), (32, -1i8)] {
            let mut row = vec![T::zero(); n];
            for (t, &hit) in row_inc.iter().enumerate() {
                if hit {
                    row[t] = T::one();
                }
            }
            row[offset + c] = if sign > 0 { T::one() } else { -T::one() };
            a.push(row);
            b.push(if sign > 0 {
                probs[c].clone() + tol.clone()
            } else {
                probs[c].clone() - tol.clone()
            });
        }
    }
    let mut norm = vec![T::zero(); n];
    for w in norm.iter_mut().take(16) {
        *w = T::one();
    }
    a.push(norm);
    b.push(T::one());

    match find_feasible_point(&a, &b)? {
        Feasibility::Feasible(x) => {
            let weights: [T; 16] = std::array::from_fn(|t| {
                let w = x[t].clone();
                if w < T::zero() {
                    T::zero()
                } else {
                    w
                }
            });
            check_weights(behavior, &weights, tol)?;
            Ok(PolytopeVerdict::Local { weights })
        }
        Feasibility::Infeasible { .. } => {
            let facet = max_facet(behavior);
            let bound = T::from_f64_lossy(CHSH_LOCAL_BOUND) + tol.clone();
            if facet.value > bound {
                Ok(PolytopeVerdict::Nonlocal { facet })
            } else {
                Err(PolytopeError::Numerical(format!(
                    "LP infeasible but largest facet {} is within the local bound",
                    facet
                )))
            }
        }
    }
}

/// `incidence[c][t]`: deterministic table `t` produces cell `c`.
fn incidence_matrix() -> [[bool; 16]; 16] {
    let mut m = [[false; 16]; 16];
    for (c, (x, y, pair)) in cells().enumerate() {
        for (t, table) in CounterfactualTable::all().enumerate() {
            m[c][t] = table.left(pair.a) == x && table.right(pair.b) == y;
        }
    }
    m
}

/// Behavior produced by mixing the deterministic tables with `weights`.
pub fn behavior_of_weights<T: Scalar>(weights: &[T; 16]) -> [T; 16] {
    let incidence = incidence_matrix();
    std::array::from_fn(|c| {
        incidence[c]
            .iter()
            .zip(weights)
            .filter(|(hit, _)| **hit)
            .fold(T::zero(), |acc, (_, w)| acc + w.clone())
    })
}

fn check_weights<T: Scalar>(behavior: &Behavior<T>, weights: &[T; 16], tol: &T) -> Result<(), PolytopeError> {
    // Floating pivots leave round-off on top of the requested tolerance.
    let slack = if T::EXACT { T::zero() } else { T::pivot_epsilon() * T::from_u32(1000).expect("small") };
    let reproduced = behavior_of_weights(weights);
    for (got, want) in reproduced.iter().zip(behavior.probs()) {
        if (got.clone() - want.clone()).abs() > tol.clone() + slack.clone() {
            return Err(PolytopeError::Numerical(format!(
                "certificate weights reproduce {got} instead of {want}"
            )));
        }
    }
    Ok(())
}

/// Serializable summary of a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum VerdictSummary {
    Local { weights: Vec<f64> },
    Nonlocal { facet: String, value: f64 },
    Signalling { gap: f64 },
    Inconclusive { reason: String },
}

impl VerdictSummary {
    pub fn from_result<T: Scalar>(result: &Result<PolytopeVerdict<T>, PolytopeError>) -> Self {
        match result {
            Ok(PolytopeVerdict::Local { weights }) => VerdictSummary::Local {
                weights: weights.iter().map(Scalar::to_f64_lossy).collect(),
            },
            Ok(PolytopeVerdict::Nonlocal { facet }) => VerdictSummary::Nonlocal {
                facet: facet.id(),
                value: facet.value.to_f64_lossy(),
            },
            Err(PolytopeError::Signalling { gap }) => VerdictSummary::Signalling { gap: *gap },
            Err(e) => VerdictSummary::Inconclusive { reason: e.to_string() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{quantum_behavior, AngleSet};
    use approx::assert_abs_diff_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn eight_facets_with_odd_minus_count() {
        let all: Vec<[i8; 4]> = facet_signs().collect();
        assert_eq!(all.len(), 8);
        assert!(all.contains(&[1, 1, 1, -1]));
        assert!(all.contains(&[-1, -1, -1, 1]));
    }

    #[test]
    fn uniform_facets_are_zero_and_local() {
        let u = Behavior::<f64>::uniform();
        assert!(chsh_facets(&u).iter().all(|f| f.value == 0.0));
        let verdict = local_polytope_member(&u, &1e-9).unwrap();
        assert!(verdict.is_local());
    }

    #[test]
    fn quantum_preset_is_nonlocal_at_two_root_two() {
        let q = quantum_behavior(&AngleSet::preset_chsh());
        assert_abs_diff_eq!(max_facet(&q).value, 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        match local_polytope_member(&q, &1e-9).unwrap() {
            PolytopeVerdict::Nonlocal { facet } => {
                assert_abs_diff_eq!(facet.value, 2.828_427_124_746_19, epsilon = 1e-12);
                assert_eq!(facet.id(), "-E11+E12-E21-E22");
            }
            other => panic!("expected nonlocal, got {other:?}"),
        }
    }

    #[test]
    fn pr_box_facet_is_four() {
        let pr = Behavior::<f64>::pr_box();
        let f = max_facet(&pr);
        assert_eq!(f.value, 4.0);
        assert_eq!(f.id(), "+E11+E12+E21-E22");
        assert!(!local_polytope_member(&pr, &1e-9).unwrap().is_local());
    }

    #[test]
    fn every_deterministic_table_is_a_vertex() {
        for table in CounterfactualTable::all() {
            let b = Behavior::<f64>::deterministic(&table);
            match local_polytope_member(&b, &1e-9).unwrap() {
                PolytopeVerdict::Local { weights } => {
                    assert_abs_diff_eq!(weights[table.index()], 1.0, epsilon = 2e-9);
                }
                other => panic!("table {table} not local: {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_signalling_input() {
        let mut probs = *Behavior::<f64>::uniform().probs();
        probs[0] = 0.45;
        probs[1] = 0.45;
        probs[2] = 0.05;
        probs[3] = 0.05;
        let b = Behavior::new(probs).unwrap();
        assert!(matches!(local_polytope_member(&b, &1e-9), Err(PolytopeError::Signalling { .. })));
        assert!(matches!(local_polytope_member(&Behavior::<f64>::uniform(), &-1.0), Err(PolytopeError::NegativeTolerance)));
    }

    #[test]
    fn exact_pr_box_and_uniform() {
        let zero = BigRational::from_integer(BigInt::from(0));
        let pr = Behavior::<BigRational>::pr_box();
        match local_polytope_member(&pr, &zero).unwrap() {
            PolytopeVerdict::Nonlocal { facet } => {
                assert_eq!(facet.value, BigRational::from_integer(BigInt::from(4)))
            }
            other => panic!("{other:?}"),
        }
        match local_polytope_member(&Behavior::<BigRational>::uniform(), &zero).unwrap() {
            PolytopeVerdict::Local { weights } => {
                assert_eq!(behavior_of_weights(&weights), Behavior::<BigRational>::uniform().probs().clone());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_boundary_is_local() {
        // Half PR box plus half uniform sits exactly on a facet: 0.5·4 = 2.
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let zero = BigRational::from_integer(BigInt::from(0));
        let b = Behavior::<BigRational>::pr_box().mix(&Behavior::uniform(), &half).unwrap();
        assert_eq!(max_facet(&b).value, BigRational::from_integer(BigInt::from(2)));
        assert!(local_polytope_member(&b, &zero).unwrap().is_local());
        // A hair beyond the facet is not.
        let v = half + BigRational::new(BigInt::from(1), BigInt::from(1_000_000_000_000i64));
        let b = Behavior::<BigRational>::pr_box().mix(&Behavior::uniform(), &v).unwrap();
        assert!(!local_polytope_member(&b, &zero).unwrap().is_local());
    }

    #[test]
    fn summary_serializes_with_tag() {
        let q = quantum_behavior(&AngleSet::preset_chsh());
        let summary = VerdictSummary::from_result(&local_polytope_member(&q, &1e-9));
        let text = serde_json::to_string(&summary).unwrap();
        assert!(text.starts_with(r#"{"verdict":"nonlocal","facet":"-E11+E12-E21-E22""#), "{text}");
    }
}

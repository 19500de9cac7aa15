//! Dense phase-one simplex for `A x = b, x >= 0`.
//!
//! Generic over [`Scalar`]: with `BigRational` every pivot is exact, with
//! floats pivots below [`Scalar::pivot_epsilon`] are skipped. Bland's rule
//! prevents cycling.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplexError {
    #[error("constraint matrix is ragged: row {row} has {found} columns, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("right-hand side has {found} entries for {expected} rows")]
    RhsLength { found: usize, expected: usize },
    #[error("non-finite coefficient in the linear program")]
    NonFinite,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<T> {
    /// A non-negative solution of `A x = b`.
    Feasible(Vec<T>),
    /// Minimal total artificial mass left after phase one.
    Infeasible { residual: T },
}

const MAX_PIVOTS: usize = 50_000;

/// Finds `x >= 0` with `A x = b`, or proves none exists.
pub fn find_feasible_point<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Result<Feasibility<T>, SimplexError> {
    let m = a.len();
    if b.len() != m {
        return Err(SimplexError::RhsLength { found: b.len(), expected: m });
    }
    let n = a.first().map_or(0, Vec::len);
    for (row, coeffs) in a.iter().enumerate() {
        if coeffs.len() != n {
            return Err(SimplexError::Ragged { row, found: coeffs.len(), expected: n });
        }
    }
    let finite = |v: &T| v.to_f64().is_some_and(f64::is_finite);
    if !T::EXACT && !(a.iter().flatten().all(finite) && b.iter().all(finite)) {
        return Err(SimplexError::NonFinite);
    }

    // Tableau columns: n structural, m artificial, then the right-hand side.
    let width = n + m + 1;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    for (i, (coeffs, rhs)) in a.iter().zip(b).enumerate() {
        let flip = *rhs < T::zero();
        let mut row = Vec::with_capacity(width);
        for v in coeffs {
            row.push(if flip { -v.clone() } else { v.clone() });
        }
        for j in 0..m {
            row.push(if i == j { T::one() } else { T::zero() });
        }
        row.push(if flip { -rhs.clone() } else { rhs.clone() });
        tab.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of the phase-one objective (sum of artificials).
    let mut cost = vec![T::zero(); width];
    for row in &tab {
        for j in 0..n {
            cost[j] = cost[j].clone() - row[j].clone();
        }
        cost[width - 1] = cost[width - 1].clone() - row[width - 1].clone();
    }

    let eps = T::pivot_epsilon();
    let neg_eps = -eps.clone();
    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..n + m).find(|&j| cost[j] < neg_eps) else {
            let residual = -cost[width - 1].clone();
            return Ok(finish(&tab, &basis, n, residual));
        };
        let mut leave: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[enter] > eps {
                let ratio = row[width - 1].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so an entering column always
        // has a positive entry; treat the opposite as converged noise.
        let Some((pivot_row, _)) = leave else {
            let residual = -cost[width - 1].clone();
            return Ok(finish(&tab, &basis, n, residual));
        };
        pivot(&mut tab, &mut cost, pivot_row, enter);
        basis[pivot_row] = enter;
    }
    Err(SimplexError::IterationLimit(MAX_PIVOTS))
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], cost: &mut [T], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let factor = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            *v = v.clone() - factor.clone() * pv.clone();
        }
    }
    let factor = cost[col].clone();
    if !factor.is_zero() {
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v = v.clone() - factor.clone() * pv.clone();
        }
    }
}

fn finish<T: Scalar>(tab: &[Vec<T>], basis: &[usize], n: usize, residual: T) -> Feasibility<T> {
    let threshold = T::pivot_epsilon() * T::from_u32(1000).expect("1000 is representable");
    if residual > threshold {
        return Feasibility::Infeasible { residual };
    }
    let mut x = vec![T::zero(); n];
    for (row, &var) in tab.iter().zip(basis) {
        if var < n {
            x[var] = row[row.len() - 1].clone();
        }
    }
    Feasibility::Feasible(x)
}

//! The bijection between collection space and total-data space on the
//! complete graph: forward map Φ and its inverse.

use num_traits::Zero;

use crate::error::{FairexError, Result};
use crate::model::{CollectionProfile, TotalProfile};
use crate::rational::Rational;

/// `Φ(X)`: totals `t_i = x_i + Σ_{j≠i} min(x_i, x_j)`.
///
/// Computed via the sorted prefix form: at ascending rank τ,
/// `t_(τ) = Σ_{j<τ} x_(j) + (n-τ+1) x_(τ)`.
pub fn phi_forward(x: &CollectionProfile) -> TotalProfile {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x.get(a).cmp(x.get(b)).then(a.cmp(&b)));
    let mut totals = vec![Rational::zero(); n];
    let mut below = Rational::zero();
    for (rank, &agent) in order.iter().enumerate() {
        let xi = x.get(agent);
        totals[agent] = &below + xi * Rational::from_integer(((n - rank) as i64).into());
        below += xi;
    }
    TotalProfile::new(totals).expect("totals of a nonnegative profile are nonnegative")
}

/// `Φ⁻¹(T)`: sorts T ascending (ties broken by agent index), applies the
/// prefix recursion `x_(τ) = (t_(τ) - P) / (n - τ + 1)`, and maps back to
/// agent identities. The recovered profile must be nonnegative and
/// nondecreasing along the sorted order; the first failing rank is reported
/// otherwise.
pub fn phi_inverse(t: &TotalProfile) -> Result<CollectionProfile> {
    let n = t.len();
    if n == 0 {
        return Err(FairexError::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| t.get(a).cmp(t.get(b)).then(a.cmp(&b)));

    let mut x = vec![Rational::zero(); n];
    let mut prev_x = Rational::zero();
    let mut prev_t = Rational::zero();
    for (rank, &agent) in order.iter().enumerate() {
        let ti = t.get(agent);
        let xi = if rank == 0 {
            ti / Rational::from_integer((n as i64).into())
        } else {
            let dt = ti - &prev_t;
            if dt.is_zero() {
                prev_x.clone()
            } else {
                &prev_x + dt / Rational::from_integer(((n - rank) as i64).into())
            }
        };
        if xi < Rational::zero() {
            return Err(FairexError::InfeasibleTotalProfile {
                rank: rank + 1,
                reason: format!("recovered collection {xi} is negative"),
            });
        }
        if xi < prev_x {
            return Err(FairexError::InfeasibleTotalProfile {
                rank: rank + 1,
                reason: format!("recovered collections decrease ({prev_x} then {xi})"),
            });
        }
        prev_x = xi.clone();
        prev_t = ti.clone();
        x[agent] = xi;
    }
    CollectionProfile::new(x)
}

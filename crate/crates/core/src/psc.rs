//! Pivot-switching closure for the truncated lifting.
//!
//! Plain truncation drops every monomial `u^q` with `q > P`. For scalar
//! systems the closure instead replaces `u^q` by its degree-`P` Taylor
//! polynomial about a pivot `s`, which keeps the lifted dynamics accurate in
//! a neighbourhood of the pivot rather than only near the origin. With
//! `s = 0` the closure vanishes and the system reduces to plain truncation.

use thiserror::Error;

use crate::carleman::{CarlemanError, LiftedSystem};
use crate::polysys::PolyField;
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum PscError {
    #[error("pivot closure is only defined for one-dimensional systems (got dimension {0})")]
    MultiDimensional(usize),
    #[error(transparent)]
    Carleman(#[from] CarlemanError),
}

/// Coefficients `c_0..c_P` of the degree-`order` Taylor polynomial of `x^q`
/// about the pivot `s`:
///
/// `x^q ≈ sum_{m=0..P} C(q,m) s^{q-m} (x-s)^m = sum_j c_j x^j`.
///
/// For `q <= order` this is exact (`c_j = [j == q]`); for `s = 0` it is the
/// zero vector, matching plain truncation.
pub fn taylor_closure<S: Scalar>(q: usize, order: usize, s: S) -> Vec<S> {
    let mut c = vec![S::zero(); order + 1];
    if q <= order {
        c[q] = S::one();
        return c;
    }
    for m in 0..=order {
        let outer = cast::<S>(binomial(q, m)) * s.powi((q - m) as i32);
        for j in 0..=m {
            let inner = cast::<S>(binomial(m, j)) * (-s).powi((m - j) as i32);
            c[j] = c[j] + outer * inner;
        }
    }
    c
}

/// Lifts a scalar polynomial field at truncation order `P`, closing every
/// dropped tensor power with [`taylor_closure`] about `pivot`.
pub fn psc_system<S: Scalar>(
    field: PolyField<S>,
    order: usize,
    pivot: S,
) -> Result<LiftedSystem<S>, PscError> {
    if field.dim() != 1 {
        return Err(PscError::MultiDimensional(field.dim()));
    }
    if order < 1 {
        return Err(PscError::Carleman(CarlemanError::InvalidOrder));
    }
    let mut closure_entries = Vec::new();
    for k in field.degrees() {
        if k < 2 {
            continue; // q = p + k - 1 <= P for every retained row
        }
        let f: S = field
            .entries(k)
            .iter()
            .map(|e| e.coeff)
            .fold(S::zero(), |a, b| a + b);
        for p in 1..=order {
            let q = p + k - 1;
            if q <= order {
                continue;
            }
            let row_coeff = cast::<S>(p as f64) * f;
            for (m, &cm) in taylor_closure(q, order, pivot).iter().enumerate() {
                if cm != S::zero() {
                    closure_entries.push((p, m, row_coeff * cm));
                }
            }
        }
    }
    Ok(LiftedSystem::with_closure(field, order, pivot, closure_entries)?)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

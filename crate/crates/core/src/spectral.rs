//! Spectral analysis of lifted systems and quantum resource estimates.
//!
//! Three concerns live here: the maximum real eigenvalue of the (dense,
//! capped) lifted generator and the bisection search for the load at which
//! it crosses zero; a matrix-free power-iteration estimate of the spectral
//! norm `‖A‖₂`; and the block-encoding resource estimate (normalization
//! bound `α`, lifted dimension, qubit count, query-cost factors).

use thiserror::Error;

use crate::carleman::{apply_cfp, apply_cfp_transpose, CarlemanError, LiftedSystem};
use crate::models::{chain_field, spring_flow, ChainModel, ModelError, SpringParams};
use crate::polysys::FieldEntry;
use crate::scalar::{cast, two_norm, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Carleman(#[from] CarlemanError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("max real eigenvalue has the same sign at both bracket ends ({lo_eig:.3e} at {lo}, {hi_eig:.3e} at {hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        lo_eig: f64,
        hi_eig: f64,
    },
}

/// Result of a power-iteration norm estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralReport {
    /// Estimated `‖A‖₂` (a lower bound that converges from below).
    pub norm: f64,
    pub iterations: usize,
    /// Relative change of the estimate over the last iteration.
    pub residual: f64,
}

/// Maximum real part over all eigenvalues of the dense lifted generator.
/// This always includes the structural zero eigenvalue contributed by the
/// constant top block (`dy₀/dt = 0`).
pub fn max_real_eig<S: Scalar>(sys: &LiftedSystem<S>) -> Result<f64, SpectralError> {
    let a = sys.assemble_dense()?.to_f64();
    let eigs = a.complex_eigenvalues();
    Ok(eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Maximum real eigenvalue of the dynamic part of the lifted generator,
/// i.e. with the structural zero of the constant `y₀` row removed. Since
/// that row is identically zero the spectrum splits as
/// `{0} ∪ spec(A[1.., 1..])`, so this is the quantity whose sign decides
/// stability of the lifted flow.
pub fn max_real_eig_dynamic<S: Scalar>(sys: &LiftedSystem<S>) -> Result<f64, SpectralError> {
    let a = sys.assemble_dense()?.to_f64();
    let n = a.nrows();
    let sub = a.view((1, 1), (n - 1, n - 1)).into_owned();
    let eigs = sub.complex_eigenvalues();
    Ok(eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Bisection on the external force `b` for the load at which the lifted
/// spring generator loses stability (max real eigenvalue crosses zero).
/// The returned bracket midpoint is accurate to `1e-3`.
pub fn stability_threshold<S: Scalar>(
    params: &SpringParams<S>,
    order: usize,
    b_lo: f64,
    b_hi: f64,
) -> Result<f64, SpectralError> {
    let eig_at = |b: f64| -> Result<f64, SpectralError> {
        let p = SpringParams::new(params.k, params.a, cast::<S>(b))?;
        let sys = LiftedSystem::carleman(spring_flow(&p), order)?;
        max_real_eig_dynamic(&sys)
    };
    let (mut lo, mut hi) = (b_lo, b_hi);
    let (e_lo, e_hi) = (eig_at(lo)?, eig_at(hi)?);
    if e_lo.signum() == e_hi.signum() {
        return Err(SpectralError::NoSignChange {
            lo,
            hi,
            lo_eig: e_lo,
            hi_eig: e_hi,
        });
    }
    let rising = e_hi > e_lo;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let e = eig_at(mid)?;
        if (e > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Power iteration on `AᵀA` for a matrix-free operator pair. The start
/// vector is a fixed pseudo-random direction so results are reproducible.
pub fn operator_norm<S: Scalar>(
    dim_in: usize,
    dim_out: usize,
    mut apply: impl FnMut(&[S], &mut [S]),
    mut apply_t: impl FnMut(&[S], &mut [S]),
    iters: usize,
) -> SpectralReport {
    if dim_in == 0 || dim_out == 0 {
        return SpectralReport {
            norm: 0.0,
            iterations: 0,
            residual: 0.0,
        };
    }
    let mut v: Vec<S> = {
        let mut state = 0x9e3779b97f4a7c15u64;
        (0..dim_in)
            .map(|_| {
                // splitmix64 -> uniform in [-1, 1)
                state = state.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                z ^= z >> 31;
                cast::<S>((z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
            })
            .collect()
    };
    let nv = two_norm(&v);
    for x in &mut v {
        *x = *x / nv;
    }
    let mut av = vec![S::zero(); dim_out];
    let mut atav = vec![S::zero(); dim_in];
    let mut norm = 0.0f64;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=iters {
        iterations = it;
        apply(&v, &mut av);
        let sigma = two_norm(&av).to_f64().unwrap_or(0.0);
        apply_t(&av, &mut atav);
        let scale = two_norm(&atav);
        if sigma == 0.0 || scale == S::zero() {
            return SpectralReport {
                norm: 0.0,
                iterations: it,
                residual: 0.0,
            };
        }
        for (vi, wi) in v.iter_mut().zip(&atav) {
            *vi = *wi / scale;
        }
        residual = if norm > 0.0 {
            ((sigma - norm) / norm).abs()
        } else {
            f64::INFINITY
        };
        norm = sigma;
        if residual < 1e-12 {
            break;
        }
    }
    SpectralReport {
        norm,
        iterations,
        residual,
    }
}

/// Spectral norm of the full lifted generator via [`operator_norm`].
pub fn spectral_norm<S: Scalar>(sys: &LiftedSystem<S>, iters: usize) -> SpectralReport {
    let dim = sys.total_dim();
    operator_norm(
        dim,
        dim,
        |x, out| sys.matvec_into(x, out),
        |x, out| sys.matvec_transpose_into(x, out),
        iters,
    )
}

/// Spectral norm of a single transfer block `C(F_k, p)` (dimension
/// `N^p x N^{p-1+k}`), matrix-free.
pub fn block_norm<S: Scalar>(
    entries: &[FieldEntry<S>],
    base_dim: usize,
    k: usize,
    p: usize,
    iters: usize,
) -> SpectralReport {
    let dim_in = base_dim.pow((p - 1 + k) as u32);
    let dim_out = base_dim.pow(p as u32);
    operator_norm(
        dim_in,
        dim_out,
        |x, out| {
            out.fill(S::zero());
            apply_cfp(entries, base_dim, k, p, x, out);
        },
        |x, out| {
            out.fill(S::zero());
            apply_cfp_transpose(entries, base_dim, k, p, x, out);
        },
        iters,
    )
}

/// Block-encoding resource estimate for a lifted chain system.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceEstimate {
    pub n: usize,
    pub order: usize,
    /// Lifted dimension `1 + Σ_{p=1..P} N^p`.
    pub dim: usize,
    /// `ceil(log₂ dim)`.
    pub qubits: u32,
    /// Normalization bound `α = P^{3/2} sqrt(‖b‖² + 16k² + 40a²)`.
    pub alpha_bound: f64,
    /// Measured `‖A‖₂` when the dimension is within the feasibility cap.
    pub alpha_numeric: Option<f64>,
    /// Evolution time used for the query-cost factor.
    pub t: f64,
    /// Target error; enters only through the additive `ln(1/ε)` term.
    pub epsilon: f64,
    /// Multiplicative query-cost factor `α·t`.
    pub query_factor: f64,
    /// Additive query-cost term `ln(1/ε)`, reported separately since the
    /// asymptotic bound carries no known constant.
    pub log_eps_term: f64,
}

/// Default largest lifted dimension for which `alpha_numeric` is measured.
pub const NUMERIC_CAP: usize = 50_000;

/// Upper bound on the lifted-generator norm for the chain family:
/// `P^{3/2} sqrt(‖b‖² + (4k)² + (2√10 a)²)`.
pub fn alpha_bound(order: usize, k: f64, a: f64, b: &[f64]) -> f64 {
    let b_sq: f64 = b.iter().map(|x| x * x).sum();
    (order as f64).powf(1.5) * (b_sq + 16.0 * k * k + 40.0 * a * a).sqrt()
}

/// Fills a [`ResourceEstimate`] for the chain with `n` masses at truncation
/// order `order`, measuring `‖A‖₂` when the lifted dimension is at most
/// `NUMERIC_CAP`.
pub fn estimate_resources(
    n: usize,
    order: usize,
    k: f64,
    a: f64,
    b: &[f64],
    t: f64,
    epsilon: f64,
) -> Result<ResourceEstimate, SpectralError> {
    estimate_resources_with_cap(n, order, k, a, b, t, epsilon, NUMERIC_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_resources_with_cap(
    n: usize,
    order: usize,
    k: f64,
    a: f64,
    b: &[f64],
    t: f64,
    epsilon: f64,
    numeric_cap: usize,
) -> Result<ResourceEstimate, SpectralError> {
    let model = ChainModel::new(n, k, a, b.to_vec())?;
    let sys = LiftedSystem::carleman(chain_field(&model), order)?;
    let dim = sys.total_dim();
    let qubits = usize::BITS - (dim - 1).leading_zeros();
    let bound = alpha_bound(order, k, a, b);
    let alpha_numeric = if dim <= numeric_cap {
        Some(spectral_norm(&sys, 500).norm)
    } else {
        None
    };
    let alpha = alpha_numeric.unwrap_or(bound);
    Ok(ResourceEstimate {
        n,
        order,
        dim,
        qubits,
        alpha_bound: bound,
        alpha_numeric,
        t,
        epsilon,
        query_factor: alpha * t,
        log_eps_term: (1.0 / epsilon).ln(),
    })
}

/// Exact spectral norm of the chain's linear block `k(S + Sᵀ − 2I)`
/// (circulant): `max_θ |k(2cosθ − 2)|` over the `n`-th roots of unity.
pub fn chain_linear_norm(n: usize, k: f64) -> f64 {
    (0..n)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / n as f64;
            (k * (2.0 * theta.cos() - 2.0)).abs()
        })
        .fold(0.0, f64::max)
}

/// Spectral norm of the chain's cubic block in its difference-tensor form
/// `a·V{(Sᵀ−I)^⊗3 − (I−S)^⊗3}`, computed exactly from the n x n Gram matrix
/// `G = F₃F₃ᵀ`.
///
/// The cubic block admits many sparse representations that evaluate to the
/// same polynomial but have different spectral norms (they differ by how
/// coefficients are spread over permuted index tuples); the `2√10·a` bound
/// refers to this difference-tensor form, so the norm here is built from the
/// raw `{i−1, i}³ / {i, i+1}³` tuples without sorting or merging across
/// permutations.
pub fn chain_cubic_norm(n: usize, a: f64) -> f64 {
    use std::collections::HashMap;
    // row i of F3: -a (u_i - u_{i-1})^{⊗3} + a (u_{i+1} - u_i)^{⊗3}
    let mut rows: Vec<HashMap<[usize; 3], f64>> = vec![HashMap::new(); n];
    for (i, row) in rows.iter_mut().enumerate() {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        for c0 in [i, prev] {
            for c1 in [i, prev] {
                for c2 in [i, prev] {
                    let sign = [c0, c1, c2].iter().filter(|&&c| c == prev).count();
                    let coeff = -a * if sign % 2 == 0 { 1.0 } else { -1.0 };
                    *row.entry([c0, c1, c2]).or_insert(0.0) += coeff;
                }
            }
        }
        for c0 in [next, i] {
            for c1 in [next, i] {
                for c2 in [next, i] {
                    let sign = [c0, c1, c2].iter().filter(|&&c| c == i).count();
                    let coeff = a * if sign % 2 == 0 { 1.0 } else { -1.0 };
                    *row.entry([c0, c1, c2]).or_insert(0.0) += coeff;
                }
            }
        }
    }
    let mut g = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (tuple, ci) in &rows[i] {
                if let Some(cj) = rows[j].get(tuple) {
                    acc += ci * cj;
                }
            }
            g[(i, j)] = acc;
            g[(j, i)] = acc;
        }
    }
    let eigs = g.symmetric_eigen().eigenvalues;
    eigs.iter().fold(0.0f64, |m, &x| m.max(x)).max(0.0).sqrt()
}

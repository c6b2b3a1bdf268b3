//! Builders for the three benchmark systems: a single nonlinear spring, a
//! periodic nonlinear mass-spring chain, and a 2D truss of nonlinear springs
//! with a quartic small-displacement energy expansion.
//!
//! Every builder produces a [`Polynomial`] potential (and, where convenient,
//! the corresponding gradient-flow [`PolyField`]) over the free degrees of
//! freedom, so the rest of the toolkit never needs model-specific code.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dense::{is_positive_definite, DenseMatrix};
use crate::polysys::{flow_from_potential, PolyField, Polynomial};
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("linear stiffness must be positive (got {0})")]
    NonPositiveStiffness(f64),
    #[error("cubic coefficient must be nonnegative (got {0})")]
    NegativeCubic(f64),
    #[error("chain needs at least 2 masses (got {0})")]
    ChainTooShort(usize),
    #[error("force vector length {got} does not match mass count {expected}")]
    ForceLengthMismatch { expected: usize, got: usize },
    #[error("edge ({0}, {1}) has zero natural length")]
    ZeroLengthEdge(usize, usize),
    #[error("edge ({0}, {1}) references a node out of range")]
    EdgeOutOfRange(usize, usize),
    #[error("all nodes are fixed; no degrees of freedom remain")]
    NoFreeDofs,
    #[error("structure has a zero-stiffness mechanism at the natural state")]
    Mechanism,
}

/// Single nonlinear spring: restoring force `k u + a u³` against a constant
/// external force `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpringParams<S> {
    pub k: S,
    pub a: S,
    pub b: S,
}

impl<S: Scalar> SpringParams<S> {
    pub fn new(k: S, a: S, b: S) -> Result<Self, ModelError> {
        if k <= S::zero() {
            return Err(ModelError::NonPositiveStiffness(k.to_f64().unwrap_or(f64::NAN)));
        }
        if a < S::zero() {
            return Err(ModelError::NegativeCubic(a.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { k, a, b })
    }
}

/// `U(u) = ½ k u² + ¼ a u⁴ − b u`.
pub fn spring_potential<S: Scalar>(p: &SpringParams<S>) -> Polynomial<S> {
    let u = Polynomial::variable(1, 0);
    let u2 = &u * &u;
    let u4 = &u2 * &u2;
    &(&u2.scale(p.k * cast(0.5)) + &u4.scale(p.a * cast(0.25))) - &u.scale(p.b)
}

/// Gradient flow of the spring potential: `du/dt = b − k u − a u³`.
pub fn spring_flow<S: Scalar>(p: &SpringParams<S>) -> PolyField<S> {
    flow_from_potential(&spring_potential(p))
}

/// Periodic chain of `n` masses joined by nonlinear springs, with external
/// force `b_i` on mass `i`. Indices wrap (`u_n = u_0`).
#[derive(Clone, Debug, PartialEq)]
pub struct ChainModel<S> {
    pub n: usize,
    pub k: S,
    pub a: S,
    pub b: Vec<S>,
}

impl<S: Scalar> ChainModel<S> {
    pub fn new(n: usize, k: S, a: S, b: Vec<S>) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::ChainTooShort(n));
        }
        if k <= S::zero() {
            return Err(ModelError::NonPositiveStiffness(k.to_f64().unwrap_or(f64::NAN)));
        }
        if a < S::zero() {
            return Err(ModelError::NegativeCubic(a.to_f64().unwrap_or(f64::NAN)));
        }
        if b.len() != n {
            return Err(ModelError::ForceLengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
        Ok(Self { n, k, a, b })
    }

    /// The step-load pattern used in the chain experiments: `+f` on the left
    /// half of the chain, `-f` on the right half (net force zero).
    pub fn half_loaded(n: usize, k: S, a: S, f: S) -> Result<Self, ModelError> {
        let b = (0..n).map(|i| if i < n / 2 { f } else { -f }).collect();
        Self::new(n, k, a, b)
    }
}

/// `U(u) = Σ_i [ ½k e_i² + ¼a e_i⁴ ] − Σ_i b_i u_i` with periodic bond
/// extensions `e_i = u_i − u_{i−1}`.
pub fn chain_potential<S: Scalar>(m: &ChainModel<S>) -> Polynomial<S> {
    let n = m.n;
    let mut u = Polynomial::zero(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let e = &Polynomial::variable(n, i) - &Polynomial::variable(n, prev);
        let e2 = &e * &e;
        let e4 = &e2 * &e2;
        u = &u + &e2.scale(m.k * cast(0.5));
        u = &u + &e4.scale(m.a * cast(0.25));
        u = &u - &Polynomial::variable(n, i).scale(m.b[i]);
    }
    u
}

/// Gradient flow of the chain: constant block `b`, linear block
/// `k(S + Sᵀ − 2I)` for the cyclic shift `S`, and the cubic bond forces,
/// stored as merged sorted-index tuples.
pub fn chain_field<S: Scalar>(m: &ChainModel<S>) -> PolyField<S> {
    flow_from_potential(&chain_potential(m))
}

/// Direct elementwise chain force, used as an independent check of
/// [`chain_field`]: `f_i = b_i − k(2u_i − u_{i−1} − u_{i+1}) − a e_i³ + a e_{i+1}³`.
pub fn chain_force_elementwise<S: Scalar>(m: &ChainModel<S>, u: &[S]) -> Vec<S> {
    assert_eq!(u.len(), m.n);
    let n = m.n;
    (0..n)
        .map(|i| {
            let prev = u[(i + n - 1) % n];
            let next = u[(i + 1) % n];
            let e_in = u[i] - prev;
            let e_out = next - u[i];
            m.b[i] - m.k * (e_in - e_out) - m.a * e_in.powi(3) + m.a * e_out.powi(3)
        })
        .collect()
}

/// 2D truss: point masses at natural positions joined by nonlinear springs.
#[derive(Clone, Debug, PartialEq)]
pub struct TrussModel<S> {
    pub nodes: Vec<(S, S)>,
    pub edges: Vec<(usize, usize)>,
    pub fixed: Vec<usize>,
    /// Per-node external force `(f_x, f_y)`.
    pub forces: Vec<(S, S)>,
    pub k: S,
    pub a: S,
}

/// Truss potential over free DOFs plus the bookkeeping needed to interpret
/// the solution vector.
#[derive(Clone, Debug)]
pub struct TrussSystem<S> {
    pub potential: Polynomial<S>,
    /// `dof_map[d] = (node, axis)` with axis 0 = x, 1 = y.
    pub dof_map: Vec<(usize, u8)>,
    /// Non-fatal issues found while building (e.g. a force on a fixed node,
    /// which is ignored).
    pub warnings: Vec<String>,
}

impl<S: Scalar> TrussModel<S> {
    /// The default 2x1-bay cantilever used throughout the truss experiments:
    /// six nodes on a unit grid, the two left nodes fixed, a horizontal force
    /// on the far bottom node, and one diagonal per bay.
    pub fn default_cantilever(k: S, a: S, force: S) -> Self {
        let c = |v: f64| cast::<S>(v);
        let nodes = vec![
            (c(0.0), c(0.0)),
            (c(0.0), c(1.0)),
            (c(1.0), c(0.0)),
            (c(1.0), c(1.0)),
            (c(2.0), c(0.0)),
            (c(2.0), c(1.0)),
        ];
        let edges = vec![
            (0, 2),
            (2, 4),
            (1, 3),
            (3, 5),
            (0, 1),
            (2, 3),
            (4, 5),
            (0, 3),
            (2, 5),
        ];
        let mut forces = vec![(S::zero(), S::zero()); 6];
        forces[4] = (force, S::zero());
        Self {
            nodes,
            edges,
            fixed: vec![0, 1],
            forces,
            k,
            a,
        }
    }
}

/// Quartic expansion of a single spring's elastic energy in the relative
/// endpoint displacement `(u, v)`, for an edge with natural vector `(x, y)`
/// of length `L₀`:
///
/// `Û = (k/2)(l₁²/L₀² + l₁l₂/L₀² − l₁³/L₀⁴ + l₂²/(4L₀²) − 3l₁²l₂/(2L₀⁴)
///       + 5l₁⁴/(4L₀⁶)) + a l₁⁴/(4L₀⁴)`
///
/// with `l₁ = ux + vy` and `l₂ = u² + v²`. Along the axis the cubic and
/// quartic elastic corrections cancel, leaving `½kε² + ¼aε⁴` exactly.
pub fn truss_edge_energy<S: Scalar>(
    x: S,
    y: S,
    k: S,
    a: S,
) -> Result<Polynomial<S>, ModelError> {
    let l0_sq = x * x + y * y;
    if l0_sq <= S::zero() {
        return Err(ModelError::ZeroLengthEdge(0, 0));
    }
    let u = Polynomial::variable(2, 0);
    let v = Polynomial::variable(2, 1);
    let l1 = &u.scale(x) + &v.scale(y);
    let l2 = &(&u * &u) + &(&v * &v);
    let l1_2 = &l1 * &l1;
    let l1_3 = &l1_2 * &l1;
    let l1_4 = &l1_2 * &l1_2;
    let l2_2 = &l2 * &l2;
    let l1l2 = &l1 * &l2;
    let l1_2l2 = &l1_2 * &l2;

    let inv2 = S::one() / l0_sq;
    let inv4 = inv2 * inv2;
    let inv6 = inv4 * inv2;
    let half_k = k * cast::<S>(0.5);

    let mut e = Polynomial::zero(2);
    e = &e + &l1_2.scale(half_k * inv2);
    e = &e + &l1l2.scale(half_k * inv2);
    e = &e - &l1_3.scale(half_k * inv4);
    e = &e + &l2_2.scale(half_k * inv2 * cast(0.25));
    e = &e - &l1_2l2.scale(half_k * inv4 * cast(1.5));
    e = &e + &l1_4.scale(half_k * inv6 * cast(1.25));
    e = &e + &l1_4.scale(a * inv4 * cast(0.25));
    Ok(e)
}

/// Exact elastic energy of one spring, `½kΔL² + ¼aΔL⁴` with
/// `ΔL = |(x+u, y+v)| − L₀`. Ground truth for the expansion above.
pub fn truss_edge_energy_exact<S: Scalar>(x: S, y: S, k: S, a: S, u: S, v: S) -> S {
    let l0 = (x * x + y * y).sqrt();
    let dl = ((x + u) * (x + u) + (y + v) * (y + v)).sqrt() - l0;
    k * cast::<S>(0.5) * dl * dl + a * cast::<S>(0.25) * dl.powi(4)
}

/// Assembles the total potential `U = Σ_edges Û − Σ_free (f_x u + f_y v)`
/// over the free DOFs, checking the structural invariants.
pub fn truss_potential<S: Scalar>(m: &TrussModel<S>) -> Result<TrussSystem<S>, ModelError> {
    let n_nodes = m.nodes.len();
    let fixed: BTreeSet<usize> = m.fixed.iter().copied().collect();
    let mut dof_map = Vec::new();
    let mut dof_of = vec![[None::<usize>; 2]; n_nodes];
    for node in 0..n_nodes {
        if fixed.contains(&node) {
            continue;
        }
        for axis in 0..2u8 {
            dof_of[node][axis as usize] = Some(dof_map.len());
            dof_map.push((node, axis));
        }
    }
    let dim = dof_map.len();
    if dim == 0 {
        return Err(ModelError::NoFreeDofs);
    }

    let mut warnings = Vec::new();
    let mut potential = Polynomial::zero(dim);

    // displacement of each node axis as a polynomial over the free DOFs
    let disp = |node: usize, axis: u8| -> Polynomial<S> {
        match dof_of[node][axis as usize] {
            Some(d) => Polynomial::variable(dim, d),
            None => Polynomial::zero(dim),
        }
    };

    for &(i, j) in &m.edges {
        if i >= n_nodes || j >= n_nodes {
            return Err(ModelError::EdgeOutOfRange(i, j));
        }
        let (xi, yi) = m.nodes[i];
        let (xj, yj) = m.nodes[j];
        let (ex, ey) = (xj - xi, yj - yi);
        if ex * ex + ey * ey <= S::zero() {
            return Err(ModelError::ZeroLengthEdge(i, j));
        }
        let edge = truss_edge_energy(ex, ey, m.k, m.a)
            .map_err(|_| ModelError::ZeroLengthEdge(i, j))?;
        // relative displacement (u, v) = (disp_j - disp_i)
        let du = &disp(j, 0) - &disp(i, 0);
        let dv = &disp(j, 1) - &disp(i, 1);
        potential = &potential + &edge.substitute(&[du, dv]);
    }

    for node in 0..n_nodes {
        let (fx, fy) = m.forces[node];
        if fixed.contains(&node) {
            if fx != S::zero() || fy != S::zero() {
                warnings.push(format!("force on fixed node {node} ignored"));
            }
            continue;
        }
        potential = &potential - &disp(node, 0).scale(fx);
        potential = &potential - &disp(node, 1).scale(fy);
    }

    // mechanism check: the quadratic part of U must be positive definite on
    // the free DOFs (constant Hessian of the degree-2 truncation at u = 0)
    let mut h = DenseMatrix::zeros(dim, dim);
    let zero = vec![S::zero(); dim];
    for r in 0..dim {
        let dr = potential.partial(r);
        for c in 0..dim {
            h.set(r, c, dr.partial(c).eval(&zero));
        }
    }
    if !is_positive_definite(&h) {
        return Err(ModelError::Mechanism);
    }

    Ok(TrussSystem {
        potential,
        dof_map,
        warnings,
    })
}

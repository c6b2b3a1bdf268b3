//! Exact classical equilibrium solvers used as ground truth.
//!
//! The main entry point is a damped Newton iteration on `∇U(u) = 0` with an
//! analytic Hessian obtained by differentiating the polynomial potential
//! twice. If Newton stagnates (singular Hessian or no descent), the state is
//! first relaxed by integrating the gradient flow and Newton is retried from
//! there. A dedicated scalar root-finder covers the single-spring cubic.

use thiserror::Error;

use crate::dense::{solve, DenseMatrix};
use crate::integrate::{integrate_nonlinear, IntegrateError, IntegratorConfig};
use crate::polysys::{flow_from_potential, Polynomial};
use crate::scalar::{cast, inf_norm, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Newton,
    FlowThenNewton,
    Cubic,
}

#[derive(Clone, Debug)]
pub struct OracleResult<S> {
    pub u_star: Vec<S>,
    /// `‖∇U(u_star)‖∞`; at most `1e-10` on success.
    pub residual: S,
    pub iterations: usize,
    pub method: SolveMethod,
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("equilibrium solve did not converge (best residual {0:.3e})")]
    NonConvergence(f64),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

const RESIDUAL_TOL: f64 = 1e-10;

/// Unique nonnegative root of `k u + a u³ = b` (`k > 0`, `a ≥ 0`, `b ≥ 0`),
/// by Newton iteration safeguarded with bisection, to full double precision.
pub fn cubic_root(k: f64, a: f64, b: f64) -> f64 {
    assert!(k > 0.0 && a >= 0.0 && b >= 0.0);
    if b == 0.0 {
        return 0.0;
    }
    let f = |u: f64| k * u + a * u * u * u - b;
    // the root is below both the linear and the cubic estimate
    let mut hi = b / k;
    if a > 0.0 {
        hi = hi.min((b / a).cbrt());
    }
    hi *= 1.0 + 1e-12;
    let mut lo = 0.0f64;
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fu = f(u);
        if fu == 0.0 {
            return u;
        }
        if fu > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let df = k + 3.0 * a * u * u;
        let step = fu / df;
        let mut next = u - step;
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-14 * u.abs().max(1e-300) {
            return next;
        }
        u = next;
    }
    u
}

/// Damped Newton on `∇U(u) = 0` from `u0`, with a gradient-flow relaxation
/// phase if plain Newton stagnates. Returns the equilibrium in the basin
/// reached from `u0`.
pub fn solve_equilibrium<S: Scalar>(
    potential: &Polynomial<S>,
    u0: &[S],
) -> Result<OracleResult<S>, OracleError> {
    let grad = potential.gradient();
    let hess: Vec<Vec<Polynomial<S>>> = grad
        .iter()
        .map(|g| (0..potential.dim()).map(|j| g.partial(j)).collect())
        .collect();

    let mut total_iters = 0usize;
    match newton(potential, &grad, &hess, u0, &mut total_iters) {
        Some(res) => Ok(OracleResult {
            method: SolveMethod::Newton,
            iterations: total_iters,
            ..res
        }),
        None => {
            // relax along the flow, then retry from the relaxed state
            let field = flow_from_potential(potential);
            let mut cfg = IntegratorConfig::default().with_t_end(cast(10.0));
            cfg.rel_tol = cast(1e-10);
            cfg.abs_tol = cast(1e-12);
            let traj = integrate_nonlinear(&field, u0, &cfg)?;
            let relaxed = traj.final_state().to_vec();
            match newton(potential, &grad, &hess, &relaxed, &mut total_iters) {
                Some(res) => Ok(OracleResult {
                    method: SolveMethod::FlowThenNewton,
                    iterations: total_iters,
                    ..res
                }),
                None => {
                    let g: Vec<S> = grad.iter().map(|gi| gi.eval(&relaxed)).collect();
                    Err(OracleError::NonConvergence(
                        inf_norm(&g).to_f64().unwrap_or(f64::NAN),
                    ))
                }
            }
        }
    }
}

/// Minimum-norm least-squares solution of `H d = g` via SVD (in `f64`).
fn pseudo_solve<S: Scalar>(h: &DenseMatrix<S>, g: &[S]) -> Option<Vec<S>> {
    let hf = h.to_f64();
    let gf = nalgebra::DVector::from_iterator(g.len(), g.iter().map(|x| x.to_f64().unwrap()));
    let svd = hf.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let d = svd.solve(&gf, tol).ok()?;
    Some(d.iter().map(|&x| cast::<S>(x)).collect())
}

fn newton<S: Scalar>(
    potential: &Polynomial<S>,
    grad: &[Polynomial<S>],
    hess: &[Vec<Polynomial<S>>],
    u0: &[S],
    total_iters: &mut usize,
) -> Option<OracleResult<S>> {
    let dim = potential.dim();
    let tol = cast::<S>(RESIDUAL_TOL);
    let mut u = u0.to_vec();
    for _ in 0..100 {
        let g: Vec<S> = grad.iter().map(|gi| gi.eval(&u)).collect();
        let res = inf_norm(&g);
        if res <= tol {
            return Some(OracleResult {
                u_star: u,
                residual: res,
                iterations: *total_iters,
                method: SolveMethod::Newton,
            });
        }
        *total_iters += 1;
        let mut h = DenseMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                h.set(r, c, hess[r][c].eval(&u));
            }
        }
        let neg_g: Vec<S> = g.iter().map(|&x| -x).collect();
        // singular Hessians happen legitimately (e.g. the rigid translation
        // of a periodic chain); fall back to the minimum-norm least-squares
        // direction, which stays orthogonal to the null space
        let d = match solve(&h, &neg_g) {
            Some(d) => d,
            None => pseudo_solve(&h, &neg_g)?,
        };
        // halve the step until the potential decreases (or the full residual
        // shrinks, which covers the saddle-free quadratic endgame)
        let u_val = potential.eval(&u);
        let mut t = S::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<S> = u.iter().zip(&d).map(|(&ui, &di)| ui + t * di).collect();
            let trial_val = potential.eval(&trial);
            let trial_res = inf_norm(&grad.iter().map(|gi| gi.eval(&trial)).collect::<Vec<_>>());
            if trial_val < u_val || trial_res < res {
                u = trial;
                accepted = true;
                break;
            }
            t = t * cast(0.5);
        }
        if !accepted {
            return None;
        }
    }
    None
}

//! Adaptive explicit integration of the gradient flow and its lifted form.
//!
//! The stepper is Dormand–Prince 5(4) with the usual embedded error
//! estimate, PI-free step control, and first-same-as-last reuse. It is
//! deliberately self-contained: the systems here are small-to-medium dense
//! vector fields and a matrix-free lifted operator, and the driver needs
//! custom divergence/convergence classification that off-the-shelf steppers
//! do not expose.

use thiserror::Error;

use crate::carleman::LiftedSystem;
use crate::polysys::PolyField;
use crate::scalar::{cast, inf_norm, Scalar};

/// Right-hand side of an autonomous ODE `dy/dt = f(y)`.
pub trait OdeSystem<S: Scalar> {
    fn dim(&self) -> usize;
    fn eval_into(&self, y: &[S], dydt: &mut [S]);
}

impl<S: Scalar> OdeSystem<S> for PolyField<S> {
    fn dim(&self) -> usize {
        PolyField::dim(self)
    }

    fn eval_into(&self, y: &[S], dydt: &mut [S]) {
        let f = self.eval(y);
        dydt.copy_from_slice(&f);
    }
}

impl<S: Scalar> OdeSystem<S> for LiftedSystem<S> {
    fn dim(&self) -> usize {
        self.total_dim()
    }

    fn eval_into(&self, y: &[S], dydt: &mut [S]) {
        self.matvec_into(y, dydt);
    }
}

/// How an integration run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Status<S> {
    /// The flow stalled: `‖f(u)‖∞` dropped below the convergence tolerance
    /// before the horizon.
    Converged { t: S },
    /// Integrated to `t_end` without converging or diverging.
    ReachedTEnd,
    /// The state norm crossed the divergence threshold.
    Diverged { t: S },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig<S> {
    pub t_end: S,
    pub rel_tol: S,
    pub abs_tol: S,
    /// `‖y‖∞` beyond which the run is classified as diverged.
    pub divergence_threshold: S,
    /// Early-stop tolerance on `‖f(u)‖∞`; `None` disables convergence
    /// detection (used for the lifted linear system, whose top block is
    /// constant and never stalls).
    pub convergence_tol: Option<S>,
    pub max_steps: usize,
    pub initial_step: Option<S>,
}

impl<S: Scalar> Default for IntegratorConfig<S> {
    fn default() -> Self {
        Self {
            t_end: S::one(),
            rel_tol: cast(1e-8),
            abs_tol: cast(1e-10),
            divergence_threshold: cast(1e6),
            convergence_tol: None,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

impl<S: Scalar> IntegratorConfig<S> {
    pub fn with_t_end(mut self, t_end: S) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_convergence_tol(mut self, tol: S) -> Self {
        self.convergence_tol = Some(tol);
        self
    }
}

/// Accepted integration points plus the run classification.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<S>,
    pub states: Vec<Vec<S>>,
    pub status: Status<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn final_state(&self) -> &[S] {
        self.states.last().expect("trajectory has at least y0")
    }

    pub fn final_time(&self) -> S {
        *self.times.last().expect("trajectory has at least t0")
    }
}

/// Result of a lifted run: the block-1 (base state) trajectory plus the full
/// lifted state at the final time, which the caller may want for
/// consistency diagnostics.
#[derive(Clone, Debug)]
pub struct LiftedRun<S> {
    pub trajectory: Trajectory<S>,
    pub final_lifted: Vec<S>,
}

#[derive(Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("dimension mismatch: system expects {expected}, initial state has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step size underflowed at t = {t} (stiff or ill-scaled system)")]
    StepSizeUnderflow { t: f64 },
    #[error("exceeded {0} steps before reaching the horizon")]
    MaxStepsExceeded(usize),
    #[error("horizon must be positive")]
    NonPositiveHorizon,
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// Difference between the 5th-order weights and the embedded 4th-order ones.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = f(y)` from `y0`, recording every accepted step.
pub fn integrate<S: Scalar, Sys: OdeSystem<S>>(
    sys: &Sys,
    y0: &[S],
    cfg: &IntegratorConfig<S>,
) -> Result<Trajectory<S>, IntegrateError> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let (_, status) = drive(sys, y0, cfg, |t, y| {
        times.push(t);
        states.push(y.to_vec());
    })?;
    Ok(Trajectory {
        times,
        states,
        status,
    })
}

/// Core adaptive stepper. Calls `on_accept` for the initial state and every
/// accepted step (callers choose what to record), and returns the final
/// state with the run classification.
pub fn drive<S: Scalar, Sys: OdeSystem<S>>(
    sys: &Sys,
    y0: &[S],
    cfg: &IntegratorConfig<S>,
    mut on_accept: impl FnMut(S, &[S]),
) -> Result<(Vec<S>, Status<S>), IntegrateError> {
    if y0.len() != sys.dim() {
        return Err(IntegrateError::DimensionMismatch {
            expected: sys.dim(),
            got: y0.len(),
        });
    }
    if cfg.t_end <= S::zero() {
        return Err(IntegrateError::NonPositiveHorizon);
    }

    let dim = sys.dim();
    let mut t = S::zero();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<S>> = (0..7).map(|_| vec![S::zero(); dim]).collect();
    let mut stage = vec![S::zero(); dim];
    let mut y_new = vec![S::zero(); dim];

    on_accept(t, &y);

    sys.eval_into(&y, &mut k[0]);
    if let Some(tol) = cfg.convergence_tol {
        if inf_norm(&k[0]) < tol {
            return Ok((y, Status::Converged { t }));
        }
    }

    let mut h = cfg
        .initial_step
        .unwrap_or_else(|| initial_step(&y, &k[0], cfg));
    let min_step = S::epsilon() * cast::<S>(16.0) * cfg.t_end.max(S::one());

    for _ in 0..cfg.max_steps {
        if t >= cfg.t_end {
            return Ok((y, Status::ReachedTEnd));
        }
        h = h.min(cfg.t_end - t);

        for s in 0..6 {
            for i in 0..dim {
                let mut acc = S::zero();
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc = acc + cast::<S>(a) * kj[i];
                    }
                }
                stage[i] = y[i] + h * acc;
            }
            if s == 5 {
                y_new.copy_from_slice(&stage);
            }
            let (_, tail) = k.split_at_mut(s + 1);
            sys.eval_into(&stage, &mut tail[0]);
        }

        // weighted RMS of the embedded error
        let mut err_sq = S::zero();
        let mut finite = true;
        for i in 0..dim {
            let mut e = S::zero();
            for (j, &ej) in E.iter().enumerate() {
                if ej != 0.0 {
                    e = e + cast::<S>(ej) * k[j][i];
                }
            }
            e = e * h;
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = e / sc;
            err_sq = err_sq + r * r;
            if !y_new[i].is_finite() {
                finite = false;
            }
        }
        let err = (err_sq / cast::<S>(dim as f64)).sqrt();

        if finite && err <= S::one() {
            t = t + h;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6); // FSAL: last stage is f at the accepted point
            on_accept(t, &y);

            if inf_norm(&y) > cfg.divergence_threshold {
                return Ok((y, Status::Diverged { t }));
            }
            if let Some(tol) = cfg.convergence_tol {
                if inf_norm(&k[0]) < tol {
                    return Ok((y, Status::Converged { t }));
                }
            }

            let factor = if err == S::zero() {
                cast::<S>(5.0)
            } else {
                (cast::<S>(0.9) * err.powf(cast::<S>(-0.2)))
                    .min(cast(5.0))
                    .max(cast(0.2))
            };
            h = h * factor;
        } else {
            let factor = if finite && err.is_finite() {
                (cast::<S>(0.9) * err.powf(cast::<S>(-0.2))).max(cast(0.1))
            } else {
                cast::<S>(0.1)
            };
            h = h * factor;
            if h < min_step {
                // a genuine blowup shrinks the step to nothing while the norm
                // is already large; report that as divergence rather than as
                // a stepper failure
                if inf_norm(&y) > cfg.divergence_threshold * cast(1e-3) {
                    return Ok((y, Status::Diverged { t }));
                }
                return Err(IntegrateError::StepSizeUnderflow {
                    t: t.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    Err(IntegrateError::MaxStepsExceeded(cfg.max_steps))
}

/// Integrates the nonlinear gradient flow `du/dt = f(u)` with early stopping
/// once `‖f(u)‖∞ < 1e-10` (unless the config overrides the tolerance).
pub fn integrate_nonlinear<S: Scalar>(
    field: &PolyField<S>,
    u0: &[S],
    cfg: &IntegratorConfig<S>,
) -> Result<Trajectory<S>, IntegrateError> {
    let mut cfg = cfg.clone();
    if cfg.convergence_tol.is_none() {
        cfg.convergence_tol = Some(cast(1e-10));
    }
    integrate(field, u0, &cfg)
}

/// Integrates the lifted linear system from the lifted initial state and
/// projects the trajectory back onto the base block.
pub fn integrate_lifted<S: Scalar>(
    sys: &LiftedSystem<S>,
    u0: &[S],
    cfg: &IntegratorConfig<S>,
) -> Result<LiftedRun<S>, IntegrateError> {
    let y0 = sys
        .lift_state(u0)
        .map_err(|_| IntegrateError::DimensionMismatch {
            expected: sys.base_dim(),
            got: u0.len(),
        })?;
    let mut cfg = cfg.clone();
    cfg.convergence_tol = None;
    // record only the base block: full lifted states are large (N^P entries)
    let range = sys.layout().block_range(1);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let (final_lifted, status) = drive(sys, &y0, &cfg, |t, y| {
        times.push(t);
        states.push(y[range.clone()].to_vec());
    })?;
    Ok(LiftedRun {
        trajectory: Trajectory {
            times,
            states,
            status,
        },
        final_lifted,
    })
}

fn initial_step<S: Scalar>(y: &[S], f: &[S], cfg: &IntegratorConfig<S>) -> S {
    let sc = |v: &[S]| -> S {
        let mut acc = S::zero();
        for (i, &vi) in v.iter().enumerate() {
            let s = cfg.abs_tol + cfg.rel_tol * y[i].abs();
            let r = vi / s;
            acc = acc + r * r;
        }
        (acc / cast::<S>(v.len() as f64)).sqrt()
    };
    let d0 = sc(y);
    let d1 = sc(f);
    let h = if d0 < cast(1e-5) || d1 < cast(1e-5) {
        cast::<S>(1e-6)
    } else {
        cast::<S>(0.01) * (d0 / d1)
    };
    h.min(cfg.t_end * cast(0.1))
}

//! The four batch experiments: spring sweep, chain sweep, truss load cases,
//! and the resource-estimate table.

use rayon::prelude::*;

use equiflow::carleman::LiftedSystem;
use equiflow::integrate::{integrate_lifted, IntegratorConfig, Status};
use equiflow::models::{
    chain_potential, spring_flow, truss_potential, ChainModel, SpringParams, TrussModel,
};
use equiflow::oracle::{cubic_root, solve_equilibrium};
use equiflow::polysys::flow_from_potential;
use equiflow::psc::psc_system;
use equiflow::spectral::estimate_resources_with_cap;

use crate::config::{ConfigError, FileConfig};
use crate::plot::{line_chart, shape_plot, Series};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn numerical(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

/// One CSV table plus its optional companion plot.
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub svg: Option<String>,
}

/// Fixed 12-significant-digit float formatting; identical configs produce
/// byte-identical CSV output.
fn fmt_f(x: f64) -> String {
    format!("{x:.11e}")
}

fn status_str(s: &Status<f64>) -> &'static str {
    match s {
        Status::Converged { .. } => "Converged",
        Status::ReachedTEnd => "ReachedTEnd",
        Status::Diverged { .. } => "Diverged",
    }
}

fn integrator(cfg: &FileConfig) -> IntegratorConfig<f64> {
    let mut c = IntegratorConfig::default();
    c.t_end = cfg.integrator.t_end;
    c.rel_tol = cfg.integrator.rel_tol;
    c.abs_tol = cfg.integrator.abs_tol;
    c.divergence_threshold = cfg.integrator.divergence_threshold;
    c
}

/// Readout value at `t_end` plus a divergence classification over the longer
/// horizon (unstable lifted springs cross the threshold well after t = 1).
fn readout_and_classify(
    sys: &LiftedSystem<f64>,
    u0: &[f64],
    cfg: &FileConfig,
) -> Result<(Option<f64>, &'static str), RunError> {
    let readout_cfg = integrator(cfg);
    let run = integrate_lifted(sys, u0, &readout_cfg).map_err(numerical)?;
    if matches!(run.trajectory.status, Status::Diverged { .. }) {
        return Ok((None, "Diverged"));
    }
    let value = run.trajectory.final_state()[0];
    let horizon = cfg.integrator.divergence_horizon.max(cfg.integrator.t_end);
    let status = if horizon > cfg.integrator.t_end {
        let mut classify_cfg = integrator(cfg);
        classify_cfg.t_end = horizon;
        let long = integrate_lifted(sys, u0, &classify_cfg).map_err(numerical)?;
        status_str(&long.trajectory.status)
    } else {
        status_str(&run.trajectory.status)
    };
    // a run that diverges within the horizon has no meaningful readout
    let value = if status == "Diverged" { None } else { Some(value) };
    Ok((value, status))
}

pub fn run_spring(cfg: &FileConfig) -> Result<Vec<Table>, RunError> {
    let default_grid: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
    let grid = cfg.sweep_values(&default_grid);
    if grid.iter().any(|&b| b < 0.0) {
        return Err(ConfigError("[sweep] spring loads must be nonnegative".into()).into());
    }
    let (k, a) = (cfg.model.k, cfg.model.a);
    let order = cfg.method.order;
    let pivot = cfg.method.pivot;

    struct Row {
        b: f64,
        u_carleman: Option<f64>,
        status_carleman: &'static str,
        u_psc: Option<f64>,
        status_psc: &'static str,
        u_exact: f64,
        u_linear: f64,
    }

    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&b| -> Result<Row, RunError> {
            let params = SpringParams::new(k, a, b).map_err(numerical)?;
            let carleman = LiftedSystem::carleman(spring_flow(&params), order).map_err(numerical)?;
            let (u_carleman, status_carleman) = readout_and_classify(&carleman, &[0.0], cfg)?;
            let pivoted = psc_system(spring_flow(&params), order, pivot).map_err(numerical)?;
            let (u_psc, status_psc) = readout_and_classify(&pivoted, &[0.0], cfg)?;
            Ok(Row {
                b,
                u_carleman,
                status_carleman,
                u_psc,
                status_psc,
                u_exact: cubic_root(k, a, b),
                u_linear: b / k,
            })
        })
        .collect::<Result<_, _>>()?;

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f(r.b),
                r.u_carleman.map(fmt_f).unwrap_or_default(),
                r.status_carleman.into(),
                r.u_psc.map(fmt_f).unwrap_or_default(),
                r.status_psc.into(),
                fmt_f(r.u_exact),
                fmt_f(r.u_linear),
            ]
        })
        .collect();

    let svg = line_chart(
        "spring equilibrium displacement vs load",
        "b",
        "u",
        &[
            Series {
                label: "carleman".into(),
                points: rows
                    .iter()
                    .filter_map(|r| r.u_carleman.map(|u| (r.b, u)))
                    .collect(),
                dashed: false,
            },
            Series {
                label: "pivot closure".into(),
                points: rows.iter().filter_map(|r| r.u_psc.map(|u| (r.b, u))).collect(),
                dashed: false,
            },
            Series {
                label: "exact".into(),
                points: rows.iter().map(|r| (r.b, r.u_exact)).collect(),
                dashed: true,
            },
            Series {
                label: "linear".into(),
                points: rows.iter().map(|r| (r.b, r.u_linear)).collect(),
                dashed: true,
            },
        ],
    );

    Ok(vec![Table {
        name: "spring".into(),
        header: vec![
            "b",
            "u_carleman",
            "status_carleman",
            "u_psc",
            "status_psc",
            "u_exact",
            "u_linear",
        ],
        rows: csv_rows,
        svg: Some(svg),
    }])
}

fn lifted_for(cfg: &FileConfig, field: equiflow::PolyField) -> Result<LiftedSystem<f64>, RunError> {
    match cfg.method.closure.as_str() {
        "carleman" => LiftedSystem::carleman(field, cfg.method.order).map_err(numerical),
        "psc" => {
            if field.dim() != 1 {
                return Err(ConfigError(
                    "[method] the psc closure only applies to one-dimensional models".into(),
                )
                .into());
            }
            psc_system(field, cfg.method.order, cfg.method.pivot).map_err(numerical)
        }
        _ => unreachable!("validated on load"),
    }
}

pub fn run_chain(cfg: &FileConfig) -> Result<Vec<Table>, RunError> {
    let default_grid: Vec<f64> = (0..=6).map(|i| 0.05 * i as f64).collect();
    let grid = cfg.sweep_values(&default_grid);
    let (n, k, a) = (cfg.model.n, cfg.model.k, cfg.model.a);

    let per_load: Vec<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> = grid
        .par_iter()
        .map(|&f| -> Result<_, RunError> {
            let model = ChainModel::half_loaded(n, k, a, f).map_err(numerical)?;
            let sys = lifted_for(cfg, equiflow::models::chain_field(&model))?;
            let run = integrate_lifted(&sys, &vec![0.0; n], &integrator(cfg)).map_err(numerical)?;
            let u_method = run.trajectory.final_state().to_vec();
            let exact = solve_equilibrium(&chain_potential(&model), &vec![0.0; n])
                .map_err(numerical)?
                .u_star;
            let linear_model = ChainModel::half_loaded(n, k, 0.0, f).map_err(numerical)?;
            let linear = solve_equilibrium(&chain_potential(&linear_model), &vec![0.0; n])
                .map_err(numerical)?
                .u_star;
            Ok((f, u_method, exact, linear))
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    for (f, u_method, exact, linear) in &per_load {
        for i in 0..n {
            rows.push(vec![
                fmt_f(*f),
                i.to_string(),
                fmt_f(u_method[i]),
                fmt_f(exact[i]),
                fmt_f(linear[i]),
            ]);
        }
    }

    let mut series = Vec::new();
    for i in 0..n {
        series.push(Series {
            label: format!("mass {i}"),
            points: per_load.iter().map(|(f, u, _, _)| (*f, u[i])).collect(),
            dashed: false,
        });
    }
    for i in 0..n {
        series.push(Series {
            label: format!("mass {i} exact"),
            points: per_load.iter().map(|(f, _, e, _)| (*f, e[i])).collect(),
            dashed: true,
        });
    }
    let svg = line_chart("chain displacements vs load amplitude", "F", "u_i", &series);

    Ok(vec![Table {
        name: "chain".into(),
        header: vec!["F", "i", "u_method", "u_exact", "u_linear"],
        rows,
        svg: Some(svg),
    }])
}

fn truss_model(cfg: &FileConfig, force: f64) -> Result<TrussModel<f64>, RunError> {
    let mut model = TrussModel::default_cantilever(cfg.model.k, cfg.model.a, 0.0);
    if let Some(nodes) = &cfg.model.nodes {
        model.nodes = nodes.iter().map(|&[x, y]| (x, y)).collect();
        model.forces = vec![(0.0, 0.0); model.nodes.len()];
    }
    if let Some(edges) = &cfg.model.edges {
        model.edges = edges.iter().map(|&[i, j]| (i, j)).collect();
    }
    if let Some(fixed) = &cfg.model.fixed {
        model.fixed = fixed.clone();
    }
    let force_node = cfg.model.force_node.unwrap_or(4);
    if force_node >= model.nodes.len() {
        return Err(ConfigError(format!(
            "[model] force_node {force_node} out of range for {} nodes",
            model.nodes.len()
        ))
        .into());
    }
    model.forces[force_node] = (force, 0.0);
    Ok(model)
}

pub fn run_truss(cfg: &FileConfig) -> Result<Vec<Table>, RunError> {
    let grid = cfg.sweep_values(&[0.3, 0.9]);

    struct LoadCase {
        f: f64,
        // per node: (ux, uy) for method / exact / linear
        method: Vec<(f64, f64)>,
        exact: Vec<(f64, f64)>,
        linear: Vec<(f64, f64)>,
    }

    let solve_case = |f: f64| -> Result<LoadCase, RunError> {
        let model = truss_model(cfg, f)?;
        let n_nodes = model.nodes.len();
        let sys = truss_potential(&model).map_err(numerical)?;
        for w in &sys.warnings {
            eprintln!("warning: {w}");
        }
        let dim = sys.dof_map.len();
        let lifted = lifted_for(cfg, flow_from_potential(&sys.potential))?;
        let run =
            integrate_lifted(&lifted, &vec![0.0; dim], &integrator(cfg)).map_err(numerical)?;
        let u_method = run.trajectory.final_state().to_vec();
        let u_exact = solve_equilibrium(&sys.potential, &vec![0.0; dim])
            .map_err(numerical)?
            .u_star;
        let mut linear_model = model.clone();
        linear_model.a = 0.0;
        let lin_sys = truss_potential(&linear_model).map_err(numerical)?;
        let u_linear = solve_equilibrium(&lin_sys.potential, &vec![0.0; dim])
            .map_err(numerical)?
            .u_star;

        let unpack = |u: &[f64]| -> Vec<(f64, f64)> {
            let mut per_node = vec![(0.0, 0.0); n_nodes];
            for (d, &(node, axis)) in sys.dof_map.iter().enumerate() {
                if axis == 0 {
                    per_node[node].0 = u[d];
                } else {
                    per_node[node].1 = u[d];
                }
            }
            per_node
        };
        Ok(LoadCase {
            f,
            method: unpack(&u_method),
            exact: unpack(&u_exact),
            linear: unpack(&u_linear),
        })
    };

    let cases: Vec<LoadCase> = grid
        .par_iter()
        .map(|&f| solve_case(f))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    for case in &cases {
        for node in 0..case.method.len() {
            rows.push(vec![
                fmt_f(case.f),
                node.to_string(),
                fmt_f(case.method[node].0),
                fmt_f(case.method[node].1),
                fmt_f(case.exact[node].0),
                fmt_f(case.exact[node].1),
                fmt_f(case.linear[node].0),
                fmt_f(case.linear[node].1),
            ]);
        }
    }

    // deformed-shape plot on the natural geometry
    let model = truss_model(cfg, 0.0)?;
    let segments: Vec<((f64, f64), (f64, f64))> = model
        .edges
        .iter()
        .map(|&(i, j)| (model.nodes[i], model.nodes[j]))
        .collect();
    let mut groups = vec![("natural".to_string(), model.nodes.clone())];
    for case in &cases {
        let displaced = |u: &[(f64, f64)]| {
            model
                .nodes
                .iter()
                .zip(u)
                .map(|(&(x, y), &(ux, uy))| (x + ux, y + uy))
                .collect::<Vec<_>>()
        };
        groups.push((format!("F={} method", case.f), displaced(&case.method)));
        groups.push((format!("F={} exact", case.f), displaced(&case.exact)));
    }
    let svg = shape_plot("truss deformation", &segments, &groups);

    Ok(vec![Table {
        name: "truss".into(),
        header: vec![
            "F",
            "node",
            "ux_method",
            "uy_method",
            "ux_exact",
            "uy_exact",
            "ux_linear",
            "uy_linear",
        ],
        rows,
        svg: Some(svg),
    }])
}

pub fn run_estimate(cfg: &FileConfig) -> Result<Vec<Table>, RunError> {
    let est = cfg.estimate.clone().unwrap_or_default();
    let mut grid = Vec::new();
    for &n in &est.n {
        for &p in &est.p {
            grid.push((n, p));
        }
    }

    let results: Vec<equiflow::spectral::ResourceEstimate> = grid
        .par_iter()
        .map(|&(n, p)| {
            let b: Vec<f64> = (0..n)
                .map(|i| if i < n / 2 { est.f } else { -est.f })
                .collect();
            estimate_resources_with_cap(
                n,
                p,
                cfg.model.k,
                cfg.model.a,
                &b,
                est.t,
                est.epsilon,
                est.numeric_cap,
            )
            .map_err(numerical)
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.order.to_string(),
                r.dim.to_string(),
                r.qubits.to_string(),
                fmt_f(r.alpha_bound),
                r.alpha_numeric.map(fmt_f).unwrap_or_default(),
                fmt_f(r.query_factor),
                fmt_f(r.log_eps_term),
            ]
        })
        .collect();

    let mut series = Vec::new();
    for &n in &est.n {
        series.push(Series {
            label: format!("N={n}"),
            points: results
                .iter()
                .filter(|r| r.n == n)
                .map(|r| (r.order as f64, r.qubits as f64))
                .collect(),
            dashed: false,
        });
    }
    let svg = line_chart("qubit count vs truncation order", "P", "qubits", &series);

    Ok(vec![Table {
        name: "estimate".into(),
        header: vec![
            "N",
            "P",
            "dim",
            "qubits",
            "alpha_bound",
            "alpha_numeric",
            "query_factor_alpha_t",
            "log_inv_epsilon",
        ],
        rows,
        svg: Some(svg),
    }])
}

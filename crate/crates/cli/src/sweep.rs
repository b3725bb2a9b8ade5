//! Runs a configuration over the cartesian product of its sweep axes.

use rayon::prelude::*;

use bipartite_gp::boson::boson_factors;
use bipartite_gp::entanglement::{concurrence_closed, concurrence_wootters, linear_entropy};
use bipartite_gp::evolution::{rho_at, trajectory, EnvironmentSpec, InitialState};
use bipartite_gp::geophase::{
    kinematic_phase_werner, kinematic_phase_with, perturbative_phase, reduced_phase_for, unitary_phase, GeoPhaseResult,
    KinematicOptions, Method, SeriesArgs, SeriesKind,
};
use bipartite_gp::spin::{p_factor, q_factor};
use bipartite_gp::state::{Branch, SystemParams};

use crate::config::{AxisName, EnvSection, ExperimentConfig, MethodChoice, OutputKind, Point, SpinBathSection};
use crate::CliError;

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
    Missing,
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// Grid points in row-major order, the last axis varying fastest.
pub fn grid(cfg: &ExperimentConfig) -> Vec<Point> {
    let mut points = vec![cfg.base_point()];
    for axis in &cfg.sweep {
        let values = axis.points().expect("axes are checked when the config is parsed");
        points = points
            .iter()
            .flat_map(|base| {
                values.iter().map(move |&v| {
                    let mut q = *base;
                    q.set(axis.axis, v);
                    q
                })
            })
            .collect();
    }
    points
}

fn columns(cfg: &ExperimentConfig) -> Vec<String> {
    let mut cols: Vec<String> = cfg.sweep.iter().map(|a| a.axis.column().to_string()).collect();
    for out in &cfg.outputs {
        let names: &[&str] = match out {
            OutputKind::Geophase => &["phi_total", "phi_unitary", "method"],
            OutputKind::DeltaPhi => &["delta_phi"],
            OutputKind::Series => &["delta_phi_series", "delta_phi_series_approx"],
            OutputKind::Concurrence => &["concurrence", "concurrence_closed"],
            OutputKind::Entropy => &["entropy"],
            OutputKind::Factors => &["damping"],
        };
        cols.extend(names.iter().map(|s| s.to_string()));
    }
    cols.push("status".into());
    cols
}

/// Evaluates every grid point on a pool of `workers` threads (all cores when
/// `None`). Row order does not depend on the number of workers.
pub fn run_sweep(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Table, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    let points = grid(cfg);
    let rows = pool.install(|| points.par_iter().map(|pt| evaluate(cfg, pt)).collect());
    Ok(Table { columns: columns(cfg), rows })
}

struct RowContext {
    params: SystemParams,
    initial: InitialState,
    env: EnvironmentSpec,
    omega: f64,
}

fn evaluate(cfg: &ExperimentConfig, point: &Point) -> Vec<Value> {
    let mut row: Vec<Value> = cfg.sweep.iter().map(|a| Value::Num(axis_value(point, a.axis))).collect();
    let mut errors: Vec<String> = Vec::new();

    let ctx = (|| -> bipartite_gp::Result<RowContext> {
        let params = cfg.system_params()?;
        let omega = params.checked_cycle_frequency(cfg.state.branch())?;
        Ok(RowContext { params, initial: cfg.initial_state(point)?, env: cfg.environment(point)?, omega })
    })();
    let ctx = match ctx {
        Ok(c) => c,
        Err(e) => {
            let n = columns(cfg).len() - row.len() - 1;
            row.extend(std::iter::repeat_n(Value::Missing, n));
            row.push(Value::Text(e.to_string()));
            return row;
        }
    };
    let t = point.t / ctx.omega.abs();

    let needs_phase = cfg.outputs.iter().any(|o| matches!(o, OutputKind::Geophase | OutputKind::DeltaPhi));
    let phase = if needs_phase {
        match geometric_phase(cfg, point, &ctx) {
            Ok(r) => Some(r),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let rho = if cfg.outputs.iter().any(|o| matches!(o, OutputKind::Concurrence | OutputKind::Entropy)) {
        match rho_at(&ctx.initial, &ctx.params, &ctx.env, t) {
            Ok(r) => Some(r),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let mut record = |r: bipartite_gp::Result<f64>| -> Value {
        match r {
            Ok(x) => Value::Num(x),
            Err(e) => {
                errors.push(e.to_string());
                Value::Missing
            }
        }
    };

    for out in &cfg.outputs {
        match out {
            OutputKind::Geophase => {
                row.push(phase.map(|r| r.phi_total).into());
                row.push(phase.map(|r| r.phi_unitary).into());
                row.push(phase.map_or(Value::Missing, |r| Value::Text(method_name(r.method).into())));
            }
            OutputKind::DeltaPhi => row.push(phase.map(|r| r.phi_total - r.phi_unitary).into()),
            OutputKind::Series => {
                let (full, approx) = series_pair(cfg, point);
                row.push(full.into());
                row.push(approx.into());
            }
            OutputKind::Concurrence => {
                let c = rho.as_ref().map(|r| record(concurrence_wootters(r)));
                row.push(c.unwrap_or(Value::Missing));
                let closed = match ctx.initial {
                    InitialState::Werner(w) => concurrence_closed(&w, &ctx.env, t).ok(),
                    InitialState::Pure(_) => None,
                };
                row.push(closed.into());
            }
            OutputKind::Entropy => {
                let s = rho.as_ref().map(|r| record(linear_entropy(r)));
                row.push(s.unwrap_or(Value::Missing));
            }
            OutputKind::Factors => {
                let d = record(damping(&ctx, t));
                row.push(d);
            }
        }
    }
    errors.dedup();
    row.push(Value::Text(if errors.is_empty() { "ok".into() } else { errors.join("; ") }));
    row
}

fn axis_value(point: &Point, axis: AxisName) -> f64 {
    use AxisName::*;
    match axis {
        P => point.p,
        R => point.r,
        Gamma0 => point.gamma0,
        LambdaOverH => point.lambda_over_h,
        NSpins => point.n_spins as f64,
        T => point.t,
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::GeneralKinematic => "kinematic",
        Method::ReducedIntegrand => "reduced",
        Method::Perturbative => "perturbative",
    }
}

fn geometric_phase(cfg: &ExperimentConfig, point: &Point, ctx: &RowContext) -> bipartite_gp::Result<GeoPhaseResult> {
    let pure_werner = matches!(ctx.initial, InitialState::Werner(w) if w.r == 1.0);
    let method = match cfg.method {
        MethodChoice::Auto if pure_werner => MethodChoice::Reduced,
        MethodChoice::Auto => MethodChoice::Kinematic,
        m => m,
    };
    match (method, &ctx.initial) {
        (MethodChoice::Reduced, InitialState::Werner(w)) => reduced_phase_for(w, &ctx.params, &ctx.env, cfg.cycles),
        (MethodChoice::Kinematic, InitialState::Werner(w)) => {
            kinematic_phase_werner(w, &ctx.params, &ctx.env, cfg.cycles, cfg.steps_per_cycle)
        }
        (MethodChoice::Kinematic, InitialState::Pure(_)) => {
            let t_end = cfg.cycles as f64 * std::f64::consts::TAU / ctx.omega.abs();
            let steps = cfg.cycles as usize * cfg.steps_per_cycle + 1;
            let traj = trajectory(&ctx.initial, &ctx.params, &ctx.env, t_end, steps)?;
            let opts = KinematicOptions { cycle_frequency: Some(ctx.omega), ..KinematicOptions::default() };
            kinematic_phase_with(&traj, &opts)
        }
        (MethodChoice::Perturbative, InitialState::Werner(w)) => {
            let (full, _) = series_pair(cfg, point);
            let delta = full.ok_or_else(|| {
                bipartite_gp::Error::UnsupportedRegime("no perturbative series for this environment".into())
            })?;
            let phi_u = unitary_phase(w.p, ctx.omega, cfg.cycles);
            Ok(GeoPhaseResult {
                phi_total: phi_u + delta,
                phi_unitary: phi_u,
                delta_phi: bipartite_gp::geophase::wrap(delta),
                winding: cfg.cycles,
                method: Method::Perturbative,
            })
        }
        (_, InitialState::Pure(_)) => {
            Err(bipartite_gp::Error::UnsupportedRegime("pure initial states only support the kinematic method".into()))
        }
        (MethodChoice::Auto, _) => unreachable!("auto is resolved above"),
    }
}

/// Full and approximate leading-order corrections, where defined.
fn series_pair(cfg: &ExperimentConfig, point: &Point) -> (Option<f64>, Option<f64>) {
    let mut args = SeriesArgs { gamma0: point.gamma0, p: point.p, winding: cfg.cycles, ..SeriesArgs::default() };
    match &cfg.env {
        EnvSection::Closed => (Some(0.0), Some(0.0)),
        EnvSection::Boson { spectral, lambda_over_omega, .. } => {
            args.lambda_over_omega = *lambda_over_omega;
            let (full, approx) = match spectral {
                crate::config::SpectralName::Ohmic => (SeriesKind::OhmicFull, SeriesKind::OhmicApprox),
                crate::config::SpectralName::Supraohmic => (SeriesKind::SupraohmicFull, SeriesKind::SupraohmicApprox),
            };
            (Some(perturbative_phase(full, &args)), Some(perturbative_phase(approx, &args)))
        }
        EnvSection::Spin { bath: SpinBathSection::Homogeneous { h_over_omega, .. } } => {
            args.lambda_over_h = point.lambda_over_h;
            args.h_over_omega = *h_over_omega;
            args.n_spins = point.n_spins;
            (Some(perturbative_phase(SeriesKind::SpinBath, &args)), None)
        }
        EnvSection::Spin { .. } => (None, None),
    }
}

/// Real factor multiplying the Werner coherence at time `t`.
fn damping(ctx: &RowContext, t: f64) -> bipartite_gp::Result<f64> {
    let branch = match ctx.initial {
        InitialState::Werner(w) => w.branch,
        InitialState::Pure(_) => Branch::Theta,
    };
    match (&ctx.env, branch) {
        (EnvironmentSpec::Closed, _) => Ok(1.0),
        (EnvironmentSpec::Boson(b), Branch::Theta) => Ok(boson_factors(b, t)?.theta_damping()),
        (EnvironmentSpec::Boson(b), Branch::Mu) => Ok(boson_factors(b, t)?.mu_damping()),
        (EnvironmentSpec::Spin(s), Branch::Theta) => q_factor(s, t),
        (EnvironmentSpec::Spin(s), Branch::Mu) => p_factor(s, t),
    }
}

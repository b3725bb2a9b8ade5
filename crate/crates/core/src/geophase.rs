//! Mixed-state kinematic geometric phase.
//!
//! Three routes are provided:
//! - [`kinematic_phase`] works on any sampled [`Trajectory`]: every weighted
//!   eigenvector is parallel transported along the path and the phase is
//!   `arg sum_k sqrt(eps_k(0) eps_k(tau)) <Psi_k(0)|Psi_k(tau)>`.
//! - the reduced routes integrate the scalar mixing weight of the dominant
//!   eigenvector, valid for pure initial Werner components (`r = 1`);
//! - [`perturbative_phase`] evaluates the weak-coupling series.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Vector4};

use crate::boson::{boson_factors, BosonBathSpec};
use crate::error::{Error, Result};
use crate::evolution::{rho_at, trajectory, EnvironmentSpec, InitialState, Trajectory};
use crate::quad;
use crate::spin::{p_factor, q_factor, SpinBathSpec};
use crate::state::{eigensystem, Branch, EigenSystem4, SystemParams, WernerSpec};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GeneralKinematic,
    ReducedIntegrand,
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPhaseResult {
    /// Total phase, lifted to a continuous branch.
    pub phi_total: f64,
    /// Phase of the same state in the closed system.
    pub phi_unitary: f64,
    /// `phi_total - phi_unitary`, wrapped into `(-pi, pi]`.
    pub delta_phi: f64,
    pub winding: u32,
    pub method: Method,
}

impl GeoPhaseResult {
    fn new(phi_total: f64, phi_unitary: f64, winding: u32, method: Method) -> Self {
        Self { phi_total, phi_unitary, delta_phi: wrap(phi_total - phi_unitary), winding, method }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap(x: f64) -> f64 {
    let y = x - TAU * (x / TAU).round();
    if y <= -PI {
        y + TAU
    } else if y > PI {
        y - TAU
    } else {
        y
    }
}

/// The representative of `angle + 2 pi k` closest to `reference`.
pub fn lift(angle: f64, reference: f64) -> f64 {
    reference + wrap(angle - reference)
}

/// Closed-system phase `sgn(Omega) 2 pi n (1 - p)` of a Werner component.
pub fn unitary_phase(p: f64, cycle_frequency: f64, winding: u32) -> f64 {
    cycle_frequency.signum() * TAU * winding as f64 * (1.0 - p)
}

/// Tuning knobs of [`kinematic_phase_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicOptions {
    /// Branches whose initial eigenvalue is at or below this are dropped.
    pub eps_floor: f64,
    /// Eigenvalues closer than this are treated as one degenerate cluster.
    pub degeneracy_gap: f64,
    pub min_points_per_cycle: usize,
    /// Combine the full grid with its every-other-sample subgrid to cancel the
    /// leading discretisation error of the overlap chain.
    pub extrapolate: bool,
    /// Cycle frequency; derived from the Werner branch when absent.
    pub cycle_frequency: Option<f64>,
    /// Branch used to lift the principal value; defaults to the unitary phase.
    pub reference: Option<f64>,
}

impl Default for KinematicOptions {
    fn default() -> Self {
        Self {
            eps_floor: 1e-12,
            degeneracy_gap: 1e-8,
            min_points_per_cycle: 500,
            extrapolate: true,
            cycle_frequency: None,
            reference: None,
        }
    }
}

// Subspace movement above which a persistent degenerate cluster is rejected.
const CLUSTER_MOTION_TOL: f64 = 1e-8;
// Consecutive samples a weighted cluster may stay degenerate while moving.
const MAX_DEGENERATE_RUN: usize = 3;

struct Cluster {
    value: f64,
    basis: Vec<Vector4<C64>>,
}

fn clusters(eig: &EigenSystem4, gap: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::with_capacity(4);
    let mut last = f64::INFINITY;
    for (&value, v) in eig.values.iter().zip(eig.vectors.iter()) {
        match out.last_mut() {
            Some(c) if last - value <= gap => {
                let n = c.basis.len() as f64;
                c.value = (c.value * n + value) / (n + 1.0);
                c.basis.push(*v);
            }
            _ => out.push(Cluster { value, basis: vec![*v] }),
        }
        last = value;
    }
    out
}

fn basis_matrix(basis: &[Vector4<C64>]) -> DMatrix<C64> {
    DMatrix::from_fn(4, basis.len(), |i, j| basis[j][i])
}

fn to_vector(m: &DMatrix<C64>, col: usize) -> Vector4<C64> {
    Vector4::new(m[(0, col)], m[(1, col)], m[(2, col)], m[(3, col)])
}

// Closest isometry to `m` (d x k, d >= k): the unitary factor of its polar decomposition.
fn polar(m: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

fn projector_distance(a: &[Vector4<C64>], b: &[Vector4<C64>]) -> f64 {
    let pa = basis_matrix(a);
    let pb = basis_matrix(b);
    (&pa * pa.adjoint() - &pb * pb.adjoint()).norm()
}

struct Tracked {
    initial: Vector4<C64>,
    current: Vector4<C64>,
    eps0: f64,
    eps: f64,
}

// Initial vectors of a degenerate cluster, aligned with the eigenvectors the
// cluster splits into at the next sample.
fn resolve_initial(cluster: &Cluster, next: &EigenSystem4) -> Vec<Vector4<C64>> {
    let d = cluster.basis.len();
    let b0 = basis_matrix(&cluster.basis);
    let mut candidates: Vec<(f64, Vector4<C64>)> = next
        .vectors
        .iter()
        .map(|v| {
            let proj: f64 = cluster.basis.iter().map(|c| c.dotc(v).norm_sqr()).sum();
            (proj, *v)
        })
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let chosen: Vec<Vector4<C64>> = candidates.into_iter().take(d).map(|(_, v)| v).collect();
    let m = b0.adjoint() * basis_matrix(&chosen);
    let aligned = &b0 * polar(&m);
    (0..d).map(|j| to_vector(&aligned, j)).collect()
}

// Parallel transport along the samples `idx`; returns the weighted overlap sum.
fn transport_sum(eigs: &[EigenSystem4], times: &[f64], idx: &[usize], opts: &KinematicOptions) -> Result<C64> {
    let first = &eigs[idx[0]];
    let mut tracked: Vec<Tracked> = Vec::new();
    for cluster in clusters(first, opts.degeneracy_gap) {
        if cluster.value <= opts.eps_floor {
            continue;
        }
        let vectors =
            if cluster.basis.len() == 1 { cluster.basis.clone() } else { resolve_initial(&cluster, &eigs[idx[1]]) };
        for v in vectors {
            tracked.push(Tracked { initial: v, current: v, eps0: cluster.value, eps: cluster.value });
        }
    }
    if tracked.is_empty() {
        return Err(Error::StateIntegrity("no eigenvalue above the floor".into()));
    }

    let mut degenerate_run = 0usize;
    let mut previous_degenerate: Option<Vec<Vec<Vector4<C64>>>> = None;
    for &j in &idx[1..] {
        let cl = clusters(&eigs[j], opts.degeneracy_gap);
        let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); cl.len()];
        for (k, w) in tracked.iter().enumerate() {
            let (best, capture) = cl
                .iter()
                .enumerate()
                .map(|(c, cluster)| (c, cluster.basis.iter().map(|b| b.dotc(&w.current).norm_sqr()).sum::<f64>()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one cluster");
            if capture < 0.5 {
                return Err(Error::Precondition(format!(
                    "time grid too coarse to follow an eigenvector near t = {} (overlap^2 {capture:.3})",
                    times[j]
                )));
            }
            assigned[best].push(k);
        }

        let mut degenerate_now: Vec<Vec<Vector4<C64>>> = Vec::new();
        for (cluster, members) in cl.iter().zip(assigned.iter()) {
            if members.is_empty() {
                continue;
            }
            if members.len() > cluster.basis.len() {
                return Err(Error::Degeneracy {
                    t: times[j],
                    detail: "more weighted branches than eigenvectors in a cluster".into(),
                });
            }
            if cluster.basis.len() > 1 {
                degenerate_now.push(cluster.basis.clone());
            }
            let c = basis_matrix(&cluster.basis);
            let w = basis_matrix(&members.iter().map(|&k| tracked[k].current).collect::<Vec<_>>());
            let moved = &c * polar(&(c.adjoint() * w));
            for (col, &k) in members.iter().enumerate() {
                tracked[k].current = to_vector(&moved, col);
                tracked[k].eps = cluster.value;
            }
        }

        // a weighted degenerate subspace may persist only if it does not move
        let moving = match (&previous_degenerate, degenerate_now.is_empty()) {
            (_, true) => false,
            (None, false) => true,
            (Some(prev), false) => {
                prev.len() != degenerate_now.len()
                    || prev
                        .iter()
                        .zip(degenerate_now.iter())
                        .any(|(a, b)| a.len() != b.len() || projector_distance(a, b) > CLUSTER_MOTION_TOL)
            }
        };
        if degenerate_now.is_empty() || !moving {
            degenerate_run = 0;
        } else {
            degenerate_run += 1;
            if degenerate_run >= MAX_DEGENERATE_RUN {
                return Err(Error::Degeneracy {
                    t: times[j],
                    detail: "weighted eigenvalues stay degenerate while their eigenspace moves".into(),
                });
            }
        }
        previous_degenerate = if degenerate_now.is_empty() { None } else { Some(degenerate_now) };
    }

    Ok(tracked.iter().map(|w| w.initial.dotc(&w.current) * (w.eps0 * w.eps.max(0.0)).sqrt()).sum())
}

fn winding_of(t_end: f64, omega: f64) -> Result<u32> {
    let cycles = t_end * omega.abs() / TAU;
    let n = cycles.round();
    if n < 1.0 || (cycles - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::Precondition(format!(
            "trajectory spans {cycles} cycles; the phase needs a whole number of cycles"
        )));
    }
    Ok(n as u32)
}

/// Kinematic phase with default options.
pub fn kinematic_phase(traj: &Trajectory) -> Result<GeoPhaseResult> {
    kinematic_phase_with(traj, &KinematicOptions::default())
}

/// Kinematic phase of a trajectory spanning a whole number of cycles.
///
/// Eigenvectors are paired across samples by overlap rather than by
/// eigenvalue order, so branches that cross are followed continuously.
/// A degenerate weighted eigenspace is tolerated while it stays fixed or
/// over isolated samples; one that keeps moving is a [`Error::Degeneracy`].
pub fn kinematic_phase_with(traj: &Trajectory, opts: &KinematicOptions) -> Result<GeoPhaseResult> {
    if traj.len() < 2 {
        return Err(Error::Precondition("trajectory needs at least two samples".into()));
    }
    if traj.times[0] != 0.0 {
        return Err(Error::Precondition("trajectory must start at t = 0".into()));
    }
    let omega = match (opts.cycle_frequency, &traj.initial) {
        (Some(w), _) => w,
        (None, InitialState::Werner(w)) => traj.params.checked_cycle_frequency(w.branch)?,
        (None, InitialState::Pure(_)) => {
            return Err(Error::Precondition("a pure initial state needs an explicit cycle frequency".into()))
        }
    };
    let winding = winding_of(traj.t_end(), omega)?;
    let intervals = traj.len() - 1;
    if intervals < opts.min_points_per_cycle * winding as usize {
        return Err(Error::Precondition(format!(
            "{} samples per cycle, need at least {}",
            intervals / winding as usize,
            opts.min_points_per_cycle
        )));
    }

    let phi_unitary = match &traj.initial {
        InitialState::Werner(w) => unitary_phase(w.p, omega, winding),
        InitialState::Pure(_) if traj.env.is_decoupled() => f64::NAN,
        InitialState::Pure(_) => {
            let closed = trajectory(&traj.initial, &traj.params, &EnvironmentSpec::Closed, traj.t_end(), traj.len())?;
            kinematic_phase_with(&closed, opts)?.phi_total
        }
    };
    let reference = opts.reference.unwrap_or(if phi_unitary.is_nan() { 0.0 } else { phi_unitary });

    use rayon::prelude::*;
    let eigs = traj.states.par_iter().map(eigensystem).collect::<Result<Vec<_>>>()?;

    let full: Vec<usize> = (0..traj.len()).collect();
    let sum = transport_sum(&eigs, &traj.times, &full, opts)?;
    if sum.norm() < 1e-14 {
        return Err(Error::Precondition("overlap sum vanishes; the phase is undefined".into()));
    }
    let mut phi = lift(sum.arg(), reference);
    if opts.extrapolate && intervals.is_multiple_of(2) {
        let coarse: Vec<usize> = (0..traj.len()).step_by(2).collect();
        let coarse_sum = transport_sum(&eigs, &traj.times, &coarse, opts)?;
        let phi_coarse = lift(coarse_sum.arg(), phi);
        phi += (phi - phi_coarse) / 3.0;
    }
    let phi_unitary = if phi_unitary.is_nan() { phi } else { phi_unitary };
    Ok(GeoPhaseResult::new(phi, phi_unitary, winding, Method::GeneralKinematic))
}

/// Weight `cos^2(theta_+)` of `|00>` (or `|01>`) in the dominant eigenvector
/// when the initial coherence `sqrt(p(1-p))` has been scaled by `damping`.
pub fn mixing_weight(p: f64, damping: f64) -> f64 {
    let a = 1.0 - 2.0 * p;
    let root = (a * a + 4.0 * p * (1.0 - p) * damping * damping).sqrt();
    if root == 0.0 {
        0.5
    } else {
        0.5 * (1.0 + a / root)
    }
}

// mixing_weight(p, g) - (1 - p), arranged to keep precision when g is near +-1
fn mixing_shift(p: f64, damping: f64) -> f64 {
    let a = 1.0 - 2.0 * p;
    if a == 0.0 {
        return 0.0;
    }
    let s = 4.0 * p * (1.0 - p) * (1.0 - damping) * (1.0 + damping);
    let root = (1.0 - s).sqrt();
    0.5 * a * s / (root * (1.0 + root))
}

/// Absolute tolerance on reduced-integrand phases.
pub const REDUCED_PHASE_TOL: f64 = 1e-9;
const MAX_PANELS: usize = 20_000;

fn require_pure(spec: &WernerSpec) -> Result<()> {
    if spec.r != 1.0 {
        return Err(Error::UnsupportedRegime(format!("the reduced integrand needs r = 1, got r = {}", spec.r)));
    }
    Ok(())
}

// phi = Omega int_0^{n tau} mixing_weight dt, evaluated as the unitary value
// plus the integral of the shift.
fn reduced_phase<D: Fn(f64) -> f64>(
    p: f64,
    omega: f64,
    winding: u32,
    damping: D,
    extra_breaks: &[f64],
) -> Result<GeoPhaseResult> {
    if winding == 0 {
        return Err(Error::ParameterDomain("winding number must be >= 1".into()));
    }
    let phi_u = unitary_phase(p, omega, winding);
    if p == 0.0 || p == 1.0 || p == 0.5 {
        return Ok(GeoPhaseResult::new(phi_u, phi_u, winding, Method::ReducedIntegrand));
    }
    let tau = TAU / omega.abs();
    let t_end = tau * winding as f64;
    let panels_per_cycle = 8;
    let mut breaks: Vec<f64> = (1..winding as usize * panels_per_cycle)
        .map(|k| t_end * k as f64 / (winding as usize * panels_per_cycle) as f64)
        .collect();
    breaks.extend_from_slice(extra_breaks);
    let r = quad::integrate(
        |t| mixing_shift(p, damping(t)),
        0.0,
        t_end,
        &breaks,
        REDUCED_PHASE_TOL / omega.abs(),
        MAX_PANELS,
    );
    if !r.value.is_finite() {
        return Err(Error::StateIntegrity("bath factor evaluation failed".into()));
    }
    if !r.converged {
        return Err(Error::Precondition(format!(
            "quadrature did not reach {REDUCED_PHASE_TOL:e} rad (estimate {:e})",
            r.abs_error * omega.abs()
        )));
    }
    Ok(GeoPhaseResult::new(phi_u + omega * r.value, phi_u, winding, Method::ReducedIntegrand))
}

fn boson_breaks(bath: &BosonBathSpec) -> Vec<f64> {
    [0.1, 0.3, 1.0, 3.0, 10.0, 30.0].iter().map(|x| x / bath.cutoff).collect()
}

fn check_branch(spec: &WernerSpec, branch: Branch) -> Result<()> {
    if spec.branch != branch {
        return Err(Error::ParameterDomain(format!("expected a {branch:?} state, got {:?}", spec.branch)));
    }
    Ok(())
}

/// Phase of the `|00>,|11>` Werner branch in a bosonic bath, `r = 1`.
pub fn reduced_phase_boson_theta(
    spec: &WernerSpec,
    params: &SystemParams,
    bath: &BosonBathSpec,
    winding: u32,
) -> Result<GeoPhaseResult> {
    require_pure(spec)?;
    check_branch(spec, Branch::Theta)?;
    let omega = params.checked_cycle_frequency(Branch::Theta)?;
    reduced_phase(
        spec.p,
        omega,
        winding,
        |t| boson_factors(bath, t).map(|f| f.theta_damping()).unwrap_or(f64::NAN),
        &boson_breaks(bath),
    )
}

/// Phase of the `|01>,|10>` Werner branch in a bosonic bath, `r = 1`.
pub fn reduced_phase_boson_mu(
    spec: &WernerSpec,
    params: &SystemParams,
    bath: &BosonBathSpec,
    winding: u32,
) -> Result<GeoPhaseResult> {
    require_pure(spec)?;
    check_branch(spec, Branch::Mu)?;
    let omega = params.checked_cycle_frequency(Branch::Mu)?;
    reduced_phase(
        spec.p,
        omega,
        winding,
        |t| boson_factors(bath, t).map(|f| f.mu_damping()).unwrap_or(f64::NAN),
        &boson_breaks(bath),
    )
}

/// Phase of either Werner branch in a spin bath, `r = 1`; the Theta branch is
/// damped by `Q(t)` and the Mu branch by `P(t)`.
pub fn reduced_phase_spin(
    spec: &WernerSpec,
    params: &SystemParams,
    bath: &SpinBathSpec,
    winding: u32,
) -> Result<GeoPhaseResult> {
    require_pure(spec)?;
    let omega = params.checked_cycle_frequency(spec.branch)?;
    let factor: fn(&SpinBathSpec, f64) -> Result<f64> = match spec.branch {
        Branch::Theta => q_factor,
        Branch::Mu => p_factor,
    };
    reduced_phase(spec.p, omega, winding, |t| factor(bath, t).unwrap_or(f64::NAN), &[])
}

/// Reduced phase for any environment.
pub fn reduced_phase_for(
    spec: &WernerSpec,
    params: &SystemParams,
    env: &EnvironmentSpec,
    winding: u32,
) -> Result<GeoPhaseResult> {
    match env {
        EnvironmentSpec::Boson(b) => match spec.branch {
            Branch::Theta => reduced_phase_boson_theta(spec, params, b, winding),
            Branch::Mu => reduced_phase_boson_mu(spec, params, b, winding),
        },
        EnvironmentSpec::Spin(s) => reduced_phase_spin(spec, params, s, winding),
        EnvironmentSpec::Closed => {
            require_pure(spec)?;
            let omega = params.checked_cycle_frequency(spec.branch)?;
            reduced_phase(spec.p, omega, winding, |_| 1.0, &[])
        }
    }
}

/// Kinematic phase of a Werner state sampled with `points_per_cycle`
/// intervals per cycle.
pub fn kinematic_phase_werner(
    spec: &WernerSpec,
    params: &SystemParams,
    env: &EnvironmentSpec,
    winding: u32,
    points_per_cycle: usize,
) -> Result<GeoPhaseResult> {
    let omega = params.checked_cycle_frequency(spec.branch)?;
    let t_end = winding as f64 * TAU / omega.abs();
    let traj = trajectory(&InitialState::Werner(*spec), params, env, t_end, winding as usize * points_per_cycle + 1)?;
    kinematic_phase(&traj)
}

/// Default number of sampling intervals per cycle for kinematic phases.
pub const DEFAULT_POINTS_PER_CYCLE: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    OhmicFull,
    OhmicApprox,
    SupraohmicFull,
    SupraohmicApprox,
    SpinBath,
}

/// Inputs of [`perturbative_phase`]; only the fields used by the chosen
/// series are read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesArgs {
    pub gamma0: f64,
    pub p: f64,
    /// Cutoff over cycle frequency, `Lambda / Omega`.
    pub lambda_over_omega: f64,
    /// Bath coupling over tunneling, `lambda / h` (spin series).
    pub lambda_over_h: f64,
    /// Tunneling over cycle frequency, `h / Omega` (spin series).
    pub h_over_omega: f64,
    pub n_spins: usize,
    pub winding: u32,
}

impl Default for SeriesArgs {
    fn default() -> Self {
        Self {
            gamma0: 0.0,
            p: 0.0,
            lambda_over_omega: 100.0,
            lambda_over_h: 0.0,
            h_over_omega: 1.0,
            n_spins: 1,
            winding: 1,
        }
    }
}

/// Leading-order correction `delta phi` accumulated over `winding` cycles.
pub fn perturbative_phase(kind: SeriesKind, args: &SeriesArgs) -> f64 {
    let p = args.p;
    let shape = p * (1.0 - 3.0 * p + 2.0 * p * p);
    let l = args.lambda_over_omega;
    let x = TAU * l;
    let single = match kind {
        SeriesKind::OhmicFull => 32.0 * args.gamma0 * shape / l * (x.atan() + PI * l * (-2.0 + (1.0 + x * x).ln())),
        SeriesKind::OhmicApprox => 64.0 * PI * args.gamma0 * shape * (x.ln() - 1.0),
        SeriesKind::SupraohmicFull => {
            8.0 * args.gamma0 * shape / l * (PI * l * (4.0 + 2.0 / (1.0 + x * x)) - 3.0 * x.atan())
        }
        SeriesKind::SupraohmicApprox => 32.0 * PI * args.gamma0 * shape,
        SeriesKind::SpinBath => {
            let ho = args.h_over_omega;
            args.lambda_over_h.powi(2) * 16.0 * args.n_spins as f64 * shape * (4.0 * PI - (4.0 * PI * ho).sin() / ho)
        }
    };
    args.winding as f64 * single
}

/// Perturbative result packaged like the other methods.
pub fn perturbative_result(kind: SeriesKind, args: &SeriesArgs) -> GeoPhaseResult {
    let phi_u = unitary_phase(args.p, 1.0, args.winding);
    let delta = perturbative_phase(kind, args);
    GeoPhaseResult {
        phi_total: phi_u + delta,
        phi_unitary: phi_u,
        delta_phi: delta,
        winding: args.winding,
        method: Method::Perturbative,
    }
}

/// Dominant-eigenvector weight at time `t`, read off the reduced state.
pub fn dominant_weight(initial: &InitialState, params: &SystemParams, env: &EnvironmentSpec, t: f64) -> Result<f64> {
    let rho = rho_at(initial, params, env, t)?;
    let eig = eigensystem(&rho)?;
    let v = eig.vectors[0];
    let idx = match initial {
        InitialState::Werner(w) if w.branch == Branch::Mu => 1,
        _ => 0,
    };
    Ok(v[idx].norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boson::Spectral;
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> SystemParams {
        SystemParams::new(1.0, 0.0, 0.0).unwrap()
    }

    fn ohmic(g: f64) -> BosonBathSpec {
        BosonBathSpec::uniform(Spectral::Ohmic, g, 100.0).unwrap()
    }

    #[test]
    fn wrap_and_lift() {
        assert_abs_diff_eq!(wrap(3.0 * PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(lift(-0.5 * PI, 1.4 * PI), 1.5 * PI, epsilon = 1e-14);
    }

    #[test]
    fn mixing_weight_limits() {
        assert_abs_diff_eq!(mixing_weight(0.25, 1.0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(mixing_weight(0.25, 0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mixing_weight(0.75, 0.0), 0.0, epsilon = 1e-15);
        assert_eq!(mixing_weight(0.5, 0.0), 0.5);
        for (p, g) in [(0.1, 0.99), (0.3, -0.4), (0.8, 0.999_999)] {
            assert_abs_diff_eq!(mixing_shift(p, g), mixing_weight(p, g) - (1.0 - p), epsilon = 1e-14);
        }
    }

    #[test]
    fn mixing_weight_matches_dominant_eigenvector() {
        let bath = EnvironmentSpec::Boson(ohmic(0.05));
        for branch in [Branch::Theta, Branch::Mu] {
            let spec = WernerSpec::new(1.0, 0.3, branch).unwrap();
            let t = 1.3;
            let f = boson_factors(&ohmic(0.05), t).unwrap();
            let g = if branch == Branch::Theta { f.theta_damping() } else { f.mu_damping() };
            let w = dominant_weight(&InitialState::Werner(spec), &SystemParams::new(1.0, 0.4, 0.0).unwrap(), &bath, t)
                .unwrap();
            assert_abs_diff_eq!(w, mixing_weight(0.3, g), epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_kinematic_phase_is_unitary() {
        for p in [0.0, 0.1, 0.25, 0.5, 0.8, 1.0] {
            let spec = WernerSpec::new(1.0, p, Branch::Theta).unwrap();
            let r = kinematic_phase_werner(&spec, &unit(), &EnvironmentSpec::Closed, 1, 2000).unwrap();
            assert_abs_diff_eq!(r.phi_total, TAU * (1.0 - p), epsilon = 1e-8);
            assert_abs_diff_eq!(r.delta_phi, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn extrapolation_removes_leading_error() {
        let spec = WernerSpec::new(1.0, 0.2, Branch::Theta).unwrap();
        let traj = trajectory(&InitialState::Werner(spec), &unit(), &EnvironmentSpec::Closed, TAU, 1001).unwrap();
        let raw = kinematic_phase_with(&traj, &KinematicOptions { extrapolate: false, ..Default::default() }).unwrap();
        let ext = kinematic_phase(&traj).unwrap();
        let exact = TAU * 0.8;
        assert!((ext.phi_total - exact).abs() < 1e-9);
        assert!((raw.phi_total - exact).abs() > 1e2 * (ext.phi_total - exact).abs());
    }

    #[test]
    fn negative_cycle_frequency_flips_sign() {
        let params = SystemParams::new(0.3, 0.8, 0.0).unwrap();
        let spec = WernerSpec::new(1.0, 0.2, Branch::Mu).unwrap();
        let k = kinematic_phase_werner(&spec, &params, &EnvironmentSpec::Closed, 1, 1000).unwrap();
        let r = reduced_phase_for(&spec, &params, &EnvironmentSpec::Closed, 1).unwrap();
        assert_abs_diff_eq!(k.phi_total, -TAU * 0.8, epsilon = 1e-8);
        assert_abs_diff_eq!(r.phi_total, -TAU * 0.8, epsilon = 1e-12);
    }

    #[test]
    fn preconditions_enforced() {
        let spec = InitialState::Werner(WernerSpec::new(1.0, 0.2, Branch::Theta).unwrap());
        let coarse = trajectory(&spec, &unit(), &EnvironmentSpec::Closed, TAU, 200).unwrap();
        assert!(matches!(kinematic_phase(&coarse), Err(Error::Precondition(_))));
        let partial = trajectory(&spec, &unit(), &EnvironmentSpec::Closed, 0.9 * TAU, 2001).unwrap();
        assert!(matches!(kinematic_phase(&partial), Err(Error::Precondition(_))));
        let mixed = WernerSpec::new(0.7, 0.2, Branch::Theta).unwrap();
        assert!(matches!(
            reduced_phase_boson_theta(&mixed, &unit(), &ohmic(0.01), 1),
            Err(Error::UnsupportedRegime(_))
        ));
        let same = SystemParams::new(1.0, 1.0, 0.0).unwrap();
        let mu = WernerSpec::new(1.0, 0.2, Branch::Mu).unwrap();
        assert!(matches!(reduced_phase_boson_mu(&mu, &same, &ohmic(0.01), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn closed_mixed_state_is_a_moving_degeneracy() {
        let spec = WernerSpec::new(0.6, 0.2, Branch::Theta).unwrap();
        let r = kinematic_phase_werner(&spec, &unit(), &EnvironmentSpec::Closed, 1, 1000);
        assert!(matches!(r, Err(Error::Degeneracy { .. })));
    }

    #[test]
    fn mixed_state_in_bath_matches_two_level_oracle() {
        // For r < 1 the |00>,|11> block has the same mixing angle as for r = 1,
        // both of its eigenvectors pick up -+ Omega int w dt, and the noise
        // eigenvectors |01>, |10> stay put and add a real (1 - r)/2.
        let (r, p, g) = (0.8, 0.3, 0.01);
        let bath = ohmic(g);
        let spec = WernerSpec::new(r, p, Branch::Theta).unwrap();
        let k = kinematic_phase_werner(&spec, &unit(), &EnvironmentSpec::Boson(bath), 1, 2000).unwrap();

        let damping = |t: f64| boson_factors(&bath, t).unwrap().theta_damping();
        let big_phi = integrate(|t| mixing_weight(p, damping(t)), 0.0, TAU, &[0.001, 0.01, 0.1], 1e-12, 20000).value;
        let eps = |d: f64, sign: f64| {
            (1.0 - r) / 4.0 + 0.5 * r * (1.0 + sign * (1.0 - 4.0 * p * (1.0 - p) * (1.0 - d * d)).sqrt())
        };
        let (w0, w1) = (1.0 - p, mixing_weight(p, damping(TAU)));
        let overlap = (w0 * w1).sqrt() + ((1.0 - w0) * (1.0 - w1)).sqrt();
        let d1 = damping(TAU);
        let sum = C64::from_polar((eps(1.0, 1.0) * eps(d1, 1.0)).sqrt() * overlap, big_phi)
            + C64::from_polar((eps(1.0, -1.0) * eps(d1, -1.0)).sqrt() * overlap, -big_phi)
            + C64::new(0.5 * (1.0 - r), 0.0);
        let oracle = lift(sum.arg(), k.phi_total);
        assert!((k.phi_total - oracle).abs() < 1e-6, "{} vs {oracle}", k.phi_total);
    }

    #[test]
    fn kinematic_and_reduced_agree_ohmic() {
        let spec = WernerSpec::new(1.0, 0.25, Branch::Theta).unwrap();
        let env = EnvironmentSpec::Boson(ohmic(0.01));
        let k = kinematic_phase_werner(&spec, &unit(), &env, 1, 2000).unwrap();
        let r = reduced_phase_for(&spec, &unit(), &env, 1).unwrap();
        assert!((k.phi_total - r.phi_total).abs() < 1e-5, "{} vs {}", k.phi_total, r.phi_total);
    }

    #[test]
    fn reduced_phase_against_plain_quadrature() {
        // independent evaluation of Omega int cos^2(theta_+) straight from the
        // eigenvalue closed form
        let (p, g) = (0.3, 0.01);
        let bath = BosonBathSpec::new(Spectral::Ohmic, g, 0.002, 0.003, 100.0).unwrap();
        let params = SystemParams::new(1.0, 0.0, 0.0).unwrap();
        let integrand = |t: f64| {
            let f = boson_factors(&bath, t).unwrap();
            let d = f.theta_damping();
            let eps_plus = 0.5 * (1.0 + (1.0 - 4.0 * p * (1.0 - p) * (1.0 - d * d)).sqrt());
            // |<00|psi_+>|^2 from the 2x2 block [[1-p, c],[c*, p]]
            let c2 = p * (1.0 - p) * d * d;
            let num = c2;
            let den = c2 + (eps_plus - (1.0 - p)).powi(2);
            num / den
        };
        let oracle = integrate(integrand, 0.0, TAU, &[0.001, 0.01, 0.1], 1e-12, 20000).value;
        let spec = WernerSpec::new(1.0, p, Branch::Theta).unwrap();
        let r = reduced_phase_boson_theta(&spec, &params, &bath, 1).unwrap();
        assert_abs_diff_eq!(r.phi_total, oracle, epsilon = 1e-8);
        assert!(r.delta_phi.abs() > 1e-3);
    }

    #[test]
    fn supraohmic_correction_is_smaller() {
        let spec = WernerSpec::new(1.0, 0.25, Branch::Theta).unwrap();
        let o = reduced_phase_boson_theta(&spec, &unit(), &ohmic(0.01), 1).unwrap();
        let s = reduced_phase_boson_theta(
            &spec,
            &unit(),
            &BosonBathSpec::uniform(Spectral::Supraohmic, 0.01, 100.0).unwrap(),
            1,
        )
        .unwrap();
        assert!(s.delta_phi.abs() < o.delta_phi.abs());
    }

    #[test]
    fn mu_branch_examples() {
        let params = SystemParams::new(1.0, 0.4, 0.0).unwrap();
        let spec = WernerSpec::new(1.0, 0.3, Branch::Mu).unwrap();
        let equal = ohmic(0.05);
        let r = reduced_phase_boson_mu(&spec, &params, &equal, 1).unwrap();
        assert_abs_diff_eq!(r.phi_total, TAU * 0.7, epsilon = 1e-12);
        let unequal = BosonBathSpec::new(Spectral::Ohmic, 0.01, 0.002, 0.003, 100.0).unwrap();
        let r = reduced_phase_boson_mu(&spec, &params, &unequal, 1).unwrap();
        assert!(r.delta_phi.abs() > 1e-4);
        let mes = WernerSpec::new(1.0, 0.5, Branch::Mu).unwrap();
        assert_abs_diff_eq!(reduced_phase_boson_mu(&mes, &params, &unequal, 1).unwrap().phi_total, PI, epsilon = 1e-15);
    }

    #[test]
    fn spin_examples() {
        let spec = WernerSpec::new(1.0, 0.25, Branch::Theta).unwrap();
        let free = SpinBathSpec::homogeneous(5, 1.0, 0.0, 0.0).unwrap();
        let r = reduced_phase_spin(&spec, &unit(), &free, 1).unwrap();
        assert_abs_diff_eq!(r.phi_total, 1.5 * PI, epsilon = 1e-12);
        let dfs = SpinBathSpec::homogeneous(5, 1.0, 0.1, 0.1).unwrap();
        let mu = WernerSpec::new(1.0, 0.35, Branch::Mu).unwrap();
        let params = SystemParams::new(1.0, 0.5, 0.0).unwrap();
        let r = reduced_phase_spin(&mu, &params, &dfs, 2).unwrap();
        assert_abs_diff_eq!(r.phi_total, 2.0 * TAU * 0.65, epsilon = 1e-12);
    }

    #[test]
    fn spin_kinematic_follows_sign_changes_of_q() {
        // strong coupling drives Q through zero several times per cycle
        let bath = SpinBathSpec::homogeneous(1, 1.0, 0.6, 0.6).unwrap();
        let spec = WernerSpec::new(1.0, 0.3, Branch::Theta).unwrap();
        let env = EnvironmentSpec::Spin(bath.clone());
        let k = kinematic_phase_werner(&spec, &unit(), &env, 1, 4000).unwrap();
        let r = reduced_phase_spin(&spec, &unit(), &bath, 1).unwrap();
        assert!((k.phi_total - r.phi_total).abs() < 1e-5, "{} vs {}", k.phi_total, r.phi_total);
    }

    #[test]
    fn pure_general_state_needs_cycle() {
        let psi = WernerSpec::new(1.0, 0.3, Branch::Theta).unwrap().pure_state();
        let traj =
            trajectory(&InitialState::Pure(psi), &unit(), &EnvironmentSpec::Boson(ohmic(0.01)), TAU, 2001).unwrap();
        assert!(kinematic_phase(&traj).is_err());
        let opts = KinematicOptions { cycle_frequency: Some(1.0), reference: Some(TAU * 0.7), ..Default::default() };
        let k = kinematic_phase_with(&traj, &opts).unwrap();
        let r = reduced_phase_boson_theta(&WernerSpec::new(1.0, 0.3, Branch::Theta).unwrap(), &unit(), &ohmic(0.01), 1)
            .unwrap();
        assert!((k.phi_total - r.phi_total).abs() < 1e-5);
        assert_abs_diff_eq!(k.phi_unitary, TAU * 0.7, epsilon = 1e-8);
    }

    #[test]
    fn series_examples() {
        let args = SeriesArgs { gamma0: 0.002, p: 0.25, lambda_over_omega: 100.0, ..Default::default() };
        // 64 pi 0.002 0.09375 (ln(200 pi) - 1), evaluated with mpmath
        assert_abs_diff_eq!(perturbative_phase(SeriesKind::OhmicApprox, &args), 0.205_198_047_135_0, epsilon = 1e-12);
        let mes = SeriesArgs { p: 0.5, gamma0: 0.1, lambda_over_h: 0.1, n_spins: 100, ..Default::default() };
        for kind in [
            SeriesKind::OhmicFull,
            SeriesKind::OhmicApprox,
            SeriesKind::SupraohmicFull,
            SeriesKind::SupraohmicApprox,
            SeriesKind::SpinBath,
        ] {
            assert_eq!(perturbative_phase(kind, &mes), 0.0);
        }
        let ratio = perturbative_phase(SeriesKind::SupraohmicApprox, &args)
            / perturbative_phase(SeriesKind::OhmicApprox, &args);
        assert_abs_diff_eq!(ratio, 1.0 / (2.0 * ((200.0 * PI).ln() - 1.0)), epsilon = 1e-15);
        let three = SeriesArgs { winding: 3, ..args };
        assert_eq!(
            perturbative_phase(SeriesKind::OhmicFull, &three),
            3.0 * perturbative_phase(SeriesKind::OhmicFull, &args)
        );
    }

    #[test]
    fn full_series_approach_their_approximations() {
        let args = SeriesArgs { gamma0: 0.001, p: 0.2, lambda_over_omega: 1e4, ..Default::default() };
        let of = perturbative_phase(SeriesKind::OhmicFull, &args);
        let oa = perturbative_phase(SeriesKind::OhmicApprox, &args);
        assert!((of / oa - 1.0).abs() < 1e-3);
        let sf = perturbative_phase(SeriesKind::SupraohmicFull, &args);
        let sa = perturbative_phase(SeriesKind::SupraohmicApprox, &args);
        assert!((sf / sa - 1.0).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn series_antisymmetric(p in 0.0f64..=1.0, g in 0.0f64..0.1, l in 0.0f64..0.1) {
            let a = SeriesArgs { gamma0: g, p, lambda_over_h: l, n_spins: 50, ..Default::default() };
            let b = SeriesArgs { p: 1.0 - p, ..a };
            for kind in [SeriesKind::OhmicFull, SeriesKind::OhmicApprox, SeriesKind::SupraohmicFull, SeriesKind::SupraohmicApprox, SeriesKind::SpinBath] {
                let sum = perturbative_phase(kind, &a) + perturbative_phase(kind, &b);
                prop_assert!(sum.abs() <= 1e-12 * perturbative_phase(kind, &a).abs().max(1e-300));
            }
        }

        #[test]
        fn mixing_weight_in_unit_interval(p in 0.0f64..=1.0, g in -1.0f64..=1.0) {
            let w = mixing_weight(p, g);
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }
}

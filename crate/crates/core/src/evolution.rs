//! Exact reduced density matrix of the two qubits at time `t`.
//!
//! The system-bath coupling commutes with the free Hamiltonian, so the
//! populations never change and every coherence picks up a free phase times
//! a real bath factor.

use nalgebra::Matrix4;
use rayon::prelude::*;

use crate::boson::{boson_factors, BosonBathSpec, BosonFactors};
use crate::error::{Error, Result};
use crate::spin::{p_factor, q_factor, SpinBathSpec};
use crate::state::{werner_density, Branch, DensityMatrix4, GeneralInitialState, SystemParams, WernerSpec};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentSpec {
    Boson(BosonBathSpec),
    Spin(SpinBathSpec),
    Closed,
}

impl EnvironmentSpec {
    /// True when the environment cannot affect the qubits at all.
    pub fn is_decoupled(&self) -> bool {
        match self {
            EnvironmentSpec::Boson(b) => b.is_closed(),
            EnvironmentSpec::Spin(s) => s.is_decoupled(),
            EnvironmentSpec::Closed => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Werner(WernerSpec),
    Pure(GeneralInitialState),
}

impl InitialState {
    pub fn density(&self) -> Result<DensityMatrix4> {
        match self {
            InitialState::Werner(w) => werner_density(w),
            InitialState::Pure(psi) => Ok(DensityMatrix4::from_hermitian_unchecked(psi.projector())),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::ParameterDomain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

fn phase(angle: f64) -> C64 {
    C64::from_polar(1.0, angle)
}

fn general_matrix(psi0: &GeneralInitialState, params: &SystemParams, f: &BosonFactors, t: f64) -> Matrix4<C64> {
    let [a, b, z, d] = psi0.amplitudes();
    let (w1, w2, g) = (params.omega1, params.omega2, params.gamma_qq);
    let lam = phase(f.lambda12_phase);
    let lam_c = lam.conj();
    let re = |x: f64| C64::new(x, 0.0);

    // upper triangle as displayed; the lower triangle is its conjugate
    let e01 = a * b.conj() * phase(-(2.0 * g + w2) * t) * lam * re(f.gamma2);
    let e02 = a * z.conj() * phase(-(2.0 * g + w1) * t) * lam * re(f.gamma1);
    let e03 = a * d.conj() * phase(-(w1 + w2) * t) * re(f.theta_damping());
    let e12 = b * z.conj() * phase(-(w1 - w2) * t) * re(f.mu_damping());
    let e13 = b * d.conj() * phase(-(w1 - 2.0 * g) * t) * lam_c * re(f.gamma1);
    let e23 = z * d.conj() * phase(-(w2 - 2.0 * g) * t) * lam_c * re(f.gamma2);

    let mut m = Matrix4::<C64>::zeros();
    for (k, amp) in [a, b, z, d].iter().enumerate() {
        m[(k, k)] = re(amp.norm_sqr());
    }
    for ((i, j), v) in [((0, 1), e01), ((0, 2), e02), ((0, 3), e03), ((1, 2), e12), ((1, 3), e13), ((2, 3), e23)] {
        m[(i, j)] = v;
        m[(j, i)] = v.conj();
    }
    m
}

/// Reduced state for an arbitrary pure initial state in the bosonic bath.
pub fn rho_boson_general(
    psi0: &GeneralInitialState,
    params: &SystemParams,
    bath: &BosonBathSpec,
    t: f64,
) -> Result<DensityMatrix4> {
    check_time(t)?;
    let f = boson_factors(bath, t)?;
    Ok(DensityMatrix4::from_hermitian_unchecked(general_matrix(psi0, params, &f, t)))
}

/// Closed-system evolution of an arbitrary pure state.
pub fn rho_closed_general(psi0: &GeneralInitialState, params: &SystemParams, t: f64) -> Result<DensityMatrix4> {
    check_time(t)?;
    Ok(DensityMatrix4::from_hermitian_unchecked(general_matrix(psi0, params, &BosonFactors::UNIT, t)))
}

// Werner state whose single surviving coherence rotates with the branch
// frequency and is scaled by `damping`.
fn werner_evolved(spec: &WernerSpec, params: &SystemParams, damping: f64, t: f64) -> Result<DensityMatrix4> {
    let spec = WernerSpec::new(spec.r, spec.p, spec.branch)?;
    let (i, j) = match spec.branch {
        Branch::Theta => (0, 3),
        Branch::Mu => (1, 2),
    };
    let omega = params.cycle_frequency(spec.branch);
    let mut m = *werner_density(&spec)?.matrix();
    let c = phase(-omega * t) * (spec.r * spec.coherence_amplitude() * damping);
    m[(i, j)] = c;
    m[(j, i)] = c.conj();
    Ok(DensityMatrix4::from_hermitian_unchecked(m))
}

/// Werner-like initial state in the bosonic bath.
///
/// The `|00><11|` coherence decays with `Gamma1 Gamma2 Gamma12^2`, the
/// `|01><10|` coherence with `Gamma1 Gamma2 Gamma12~^2`.
pub fn rho_boson_werner(
    spec: &WernerSpec,
    params: &SystemParams,
    bath: &BosonBathSpec,
    t: f64,
) -> Result<DensityMatrix4> {
    check_time(t)?;
    let f = boson_factors(bath, t)?;
    let damping = match spec.branch {
        Branch::Theta => f.theta_damping(),
        Branch::Mu => f.mu_damping(),
    };
    werner_evolved(spec, params, damping, t)
}

/// Werner-like initial state in the spin bath; `Q(t)` damps the Theta
/// coherence and `P(t)` the Mu coherence.
pub fn rho_spin_werner(
    spec: &WernerSpec,
    params: &SystemParams,
    bath: &SpinBathSpec,
    t: f64,
) -> Result<DensityMatrix4> {
    check_time(t)?;
    let damping = match spec.branch {
        Branch::Theta => q_factor(bath, t)?,
        Branch::Mu => p_factor(bath, t)?,
    };
    werner_evolved(spec, params, damping, t)
}

/// Werner-like initial state without environment.
pub fn rho_closed_werner(spec: &WernerSpec, params: &SystemParams, t: f64) -> Result<DensityMatrix4> {
    check_time(t)?;
    werner_evolved(spec, params, 1.0, t)
}

/// Dispatches to the closed form matching the environment and initial state.
pub fn rho_at(initial: &InitialState, params: &SystemParams, env: &EnvironmentSpec, t: f64) -> Result<DensityMatrix4> {
    match (initial, env) {
        (InitialState::Werner(w), EnvironmentSpec::Boson(b)) => rho_boson_werner(w, params, b, t),
        (InitialState::Werner(w), EnvironmentSpec::Spin(s)) => rho_spin_werner(w, params, s, t),
        (InitialState::Werner(w), EnvironmentSpec::Closed) => rho_closed_werner(w, params, t),
        (InitialState::Pure(psi), EnvironmentSpec::Boson(b)) => rho_boson_general(psi, params, b, t),
        (InitialState::Pure(psi), EnvironmentSpec::Closed) => rho_closed_general(psi, params, t),
        (InitialState::Pure(_), EnvironmentSpec::Spin(_)) => {
            Err(Error::UnsupportedRegime("the spin bath closed forms cover Werner-like initial states only".into()))
        }
    }
}

/// States sampled on a uniform time grid starting at zero.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix4>,
    pub params: SystemParams,
    pub env: EnvironmentSpec,
    pub initial: InitialState,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least two samples")
    }
}

/// Samples `steps` equally spaced states on `[0, t_end]`.
pub fn trajectory(
    initial: &InitialState,
    params: &SystemParams,
    env: &EnvironmentSpec,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    if steps < 2 {
        return Err(Error::ParameterDomain(format!("need at least two samples, got {steps}")));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::ParameterDomain(format!("t_end must be > 0, got {t_end}")));
    }
    let last = (steps - 1) as f64;
    let times: Vec<f64> = (0..steps).map(|k| if k + 1 == steps { t_end } else { t_end * k as f64 / last }).collect();
    let states = times.par_iter().map(|&t| rho_at(initial, params, env, t)).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times, states, params: *params, env: env.clone(), initial: *initial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boson::{gamma_ohmic, Spectral};
    use crate::state::eigensystem;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn params() -> SystemParams {
        SystemParams::new(0.6, 0.4, 0.13).unwrap()
    }

    fn max_diff(a: &DensityMatrix4, b: &DensityMatrix4) -> f64 {
        (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn general_state_at_origin_is_projector() {
        let raw = [C64::new(0.5, 0.1), C64::new(0.0, 0.5), C64::new(-0.4, 0.2), C64::new(0.3, 0.2)];
        let n = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = GeneralInitialState::new(raw[0] / n, raw[1] / n, raw[2] / n, raw[3] / n).unwrap();
        let bath = BosonBathSpec::new(Spectral::Ohmic, 0.01, 0.02, 0.005, 50.0).unwrap();
        let rho = rho_boson_general(&psi, &params(), &bath, 0.0).unwrap();
        let diff = (rho.matrix() - psi.projector()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn bell_coherence_decays_with_product_factor() {
        let psi = GeneralInitialState::new(
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
        )
        .unwrap();
        let (g0, cutoff) = (0.004, 100.0);
        let bath = BosonBathSpec::uniform(Spectral::Ohmic, g0, cutoff).unwrap();
        let p = params();
        for t in [0.01, 0.5, 3.0] {
            let rho = rho_boson_general(&psi, &p, &bath, t).unwrap();
            let x2 = (cutoff * t).powi(2);
            let expected = phase(-(p.omega1 + p.omega2) * t) * (0.5 * (1.0 + x2).powf(-8.0 * g0));
            assert!((rho.entry(0, 3) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn decoupled_bath_gives_unitary_evolution() {
        let raw = [C64::new(0.3, 0.2), C64::new(0.1, -0.5), C64::new(0.6, 0.0), C64::new(-0.2, 0.4)];
        let n = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = GeneralInitialState::new(raw[0] / n, raw[1] / n, raw[2] / n, raw[3] / n).unwrap();
        let p = params();
        let bath = BosonBathSpec::uniform(Spectral::Supraohmic, 0.0, 10.0).unwrap();
        let t = 1.7;
        let rho = rho_boson_general(&psi, &p, &bath, t).unwrap();
        // direct propagation with the diagonal free Hamiltonian
        let z = |s: f64| if s == 0.0 { 1.0 } else { -1.0 };
        let energies: Vec<f64> = (0..4)
            .map(|k| {
                let (s1, s2) = (z((k >> 1) as f64), z((k & 1) as f64));
                0.5 * p.omega1 * s1 + 0.5 * p.omega2 * s2 + p.gamma_qq * s1 * s2
            })
            .collect();
        let amps = psi.amplitudes();
        for i in 0..4 {
            for j in 0..4 {
                let expected = amps[i] * amps[j].conj() * phase(-(energies[i] - energies[j]) * t);
                assert!((rho.entry(i, j) - expected).norm() < 1e-14, "({i},{j})");
            }
        }
        assert!(rho.validate().is_ok());
    }

    #[test]
    fn werner_branches_match_general_constructor() {
        let p = params();
        let bath = BosonBathSpec::new(Spectral::Ohmic, 0.01, 0.004, 0.005, 100.0).unwrap();
        for branch in [Branch::Theta, Branch::Mu] {
            let spec = WernerSpec::new(1.0, 0.25, branch).unwrap();
            for t in [0.0, 0.2, 2.0 * PI] {
                let a = rho_boson_werner(&spec, &p, &bath, t).unwrap();
                let b = rho_boson_general(&spec.pure_state(), &p, &bath, t).unwrap();
                assert!(max_diff(&a, &b) < 1e-12, "{branch:?} t = {t}");
            }
        }
    }

    #[test]
    fn mixed_werner_is_noise_plus_scaled_pure_part() {
        let p = params();
        let bath = BosonBathSpec::uniform(Spectral::Ohmic, 0.01, 100.0).unwrap();
        let pure = WernerSpec::new(1.0, 0.3, Branch::Mu).unwrap();
        let mixed = WernerSpec::new(0.8, 0.3, Branch::Mu).unwrap();
        let t = 1.1;
        let a = rho_boson_werner(&mixed, &p, &bath, t).unwrap();
        let b = rho_boson_general(&pure.pure_state(), &p, &bath, t).unwrap();
        let expected = Matrix4::<C64>::identity() * C64::new(0.05, 0.0) + b.matrix() * C64::new(0.8, 0.0);
        assert!((a.matrix() - expected).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn theta_coherence_at_one_cycle() {
        let p = SystemParams::new(1.0, 0.0, 0.0).unwrap();
        let g0 = 0.002;
        let bath = BosonBathSpec::uniform(Spectral::Ohmic, g0, 100.0).unwrap();
        let spec = WernerSpec::new(1.0, 0.25, Branch::Theta).unwrap();
        let tau = 2.0 * PI;
        let rho = rho_boson_werner(&spec, &p, &bath, tau).unwrap();
        let g = gamma_ohmic(g0, 100.0, tau).unwrap();
        assert_abs_diff_eq!(rho.entry(0, 3).norm(), 3f64.sqrt() / 4.0 * g.powi(4), epsilon = 1e-15);
    }

    #[test]
    fn spin_bath_examples() {
        let p = params();
        let spec = WernerSpec::new(0.7, 0.35, Branch::Theta).unwrap();
        let bath = SpinBathSpec::homogeneous(10, 1.0, 0.05, 0.03).unwrap();
        let rho0 = rho_spin_werner(&spec, &p, &bath, 0.0).unwrap();
        assert!(max_diff(&rho0, &werner_density(&spec).unwrap()) < 1e-15);

        let free = SpinBathSpec::homogeneous(10, 1.0, 0.0, 0.0).unwrap();
        let spec = WernerSpec::new(1.0, 0.35, Branch::Theta).unwrap();
        for t in [0.3, 4.0, 19.0] {
            let rho = rho_spin_werner(&spec, &p, &free, t).unwrap();
            assert_abs_diff_eq!(rho.entry(0, 3).norm(), spec.coherence_amplitude(), epsilon = 1e-15);
        }

        let dfs = SpinBathSpec::homogeneous(10, 1.0, 0.2, 0.2).unwrap();
        let spec = WernerSpec::new(1.0, 0.5, Branch::Mu).unwrap();
        for t in [0.3, 4.0, 19.0] {
            let rho = rho_spin_werner(&spec, &p, &dfs, t).unwrap();
            assert_abs_diff_eq!(rho.entry(1, 2).norm(), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn pure_state_in_spin_bath_unsupported() {
        let psi = WernerSpec::new(1.0, 0.2, Branch::Theta).unwrap().pure_state();
        let bath = SpinBathSpec::homogeneous(3, 1.0, 0.1, 0.1).unwrap();
        let err = rho_at(&InitialState::Pure(psi), &params(), &EnvironmentSpec::Spin(bath), 1.0);
        assert!(matches!(err, Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn trajectory_grid() {
        let spec = InitialState::Werner(WernerSpec::new(1.0, 0.25, Branch::Theta).unwrap());
        let p = SystemParams::new(1.0, 0.0, 0.0).unwrap();
        let tau = 2.0 * PI;
        let traj = trajectory(&spec, &p, &EnvironmentSpec::Closed, tau, 2).unwrap();
        assert_eq!(traj.times, vec![0.0, tau]);
        for rho in &traj.states {
            assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);
        }

        let traj = trajectory(&spec, &p, &EnvironmentSpec::Closed, tau, 1001).unwrap();
        assert_abs_diff_eq!(traj.times[1] - traj.times[0], tau / 1000.0, epsilon = 1e-15);
        assert_eq!(traj.t_end(), tau);
        assert!(traj.states.iter().all(|s| (s.trace() - 1.0).abs() < 1e-14));
        assert!(trajectory(&spec, &p, &EnvironmentSpec::Closed, tau, 1).is_err());
        assert!(trajectory(&spec, &p, &EnvironmentSpec::Closed, 0.0, 10).is_err());
    }

    #[test]
    fn purity_nonincreasing_for_ohmic_theta() {
        let spec = InitialState::Werner(WernerSpec::new(1.0, 0.3, Branch::Theta).unwrap());
        let p = SystemParams::new(1.0, 0.0, 0.0).unwrap();
        let env = EnvironmentSpec::Boson(BosonBathSpec::uniform(Spectral::Ohmic, 0.05, 100.0).unwrap());
        let traj = trajectory(&spec, &p, &env, 4.0 * PI, 801).unwrap();
        for w in traj.states.windows(2) {
            assert!(w[1].purity() <= w[0].purity() + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn populations_are_frozen_and_states_positive(
            r in 0.01f64..=1.0,
            p in 0.0f64..=1.0,
            theta in any::<bool>(),
            g1 in 0.0f64..0.2,
            g2 in 0.0f64..0.2,
            corr in 0.0f64..=1.0,
            supra in any::<bool>(),
            t in 0.0f64..20.0,
        ) {
            let branch = if theta { Branch::Theta } else { Branch::Mu };
            let spectral = if supra { Spectral::Supraohmic } else { Spectral::Ohmic };
            let bath = BosonBathSpec::new(spectral, g1, g2, corr * (g1 * g2).sqrt(), 100.0).unwrap();
            let spec = WernerSpec::new(r, p, branch).unwrap();
            let rho = rho_boson_werner(&spec, &params(), &bath, t).unwrap();
            let rho0 = werner_density(&spec).unwrap();
            for (a, b) in rho.populations().iter().zip(rho0.populations().iter()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
            let eig = eigensystem(&rho).unwrap();
            prop_assert!(eig.values[3] >= -1e-10);
        }

        #[test]
        fn spin_states_positive(
            r in 0.01f64..=1.0,
            p in 0.0f64..=1.0,
            seed in any::<u64>(),
            t in 0.0f64..50.0,
        ) {
            let bath = SpinBathSpec::random(12, (0.5, 1.5), (-0.5, 0.5), (-0.5, 0.5), seed).unwrap();
            for branch in [Branch::Theta, Branch::Mu] {
                let spec = WernerSpec::new(r, p, branch).unwrap();
                let rho = rho_spin_werner(&spec, &params(), &bath, t).unwrap();
                prop_assert!(rho.validate().is_ok());
            }
        }
    }
}

//! Shared domain types: system parameters, initial states, density matrices
//! and their Hermitian eigendecomposition.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::C64;

/// Hermiticity tolerance on individual matrix entries.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as roundoff.
pub const NEGATIVITY_TOL: f64 = 1e-10;
/// Allowed deviation of amplitude norms from one.
pub const NORM_TOL: f64 = 1e-12;
/// Bound on `|rho v - eps v|` for every returned eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Frequencies and inter-qubit coupling of the free two-qubit Hamiltonian
/// (units with hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma_qq: f64,
}

impl SystemParams {
    pub fn new(omega1: f64, omega2: f64, gamma_qq: f64) -> Result<Self> {
        if !(omega1 > 0.0) || !omega1.is_finite() {
            return Err(Error::ParameterDomain(format!("omega1 must be > 0, got {omega1}")));
        }
        if !(omega2 >= 0.0) || !omega2.is_finite() {
            return Err(Error::ParameterDomain(format!("omega2 must be >= 0, got {omega2}")));
        }
        if !gamma_qq.is_finite() {
            return Err(Error::ParameterDomain("gamma_qq must be finite".into()));
        }
        Ok(Self { omega1, omega2, gamma_qq })
    }

    /// Signed cycle frequency of the coherence that carries the phase:
    /// `omega1 + omega2` for [`Branch::Theta`], `omega1 - omega2` for [`Branch::Mu`].
    pub fn cycle_frequency(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Theta => self.omega1 + self.omega2,
            Branch::Mu => self.omega1 - self.omega2,
        }
    }

    /// Like [`cycle_frequency`](Self::cycle_frequency) but rejects a vanishing cycle.
    pub fn checked_cycle_frequency(&self, branch: Branch) -> Result<f64> {
        let omega = self.cycle_frequency(branch);
        if omega.abs() < 1e-14 {
            return Err(Error::Precondition(format!(
                "cycle frequency of branch {branch:?} vanishes (omega1 = omega2 = {})",
                self.omega1
            )));
        }
        Ok(omega)
    }
}

/// Which pure state is mixed with white noise in a Werner-like state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `sqrt(1-p)|00> + sqrt(p)|11>`
    Theta,
    /// `sqrt(1-p)|01> + sqrt(p)|10>`
    Mu,
}

/// Arbitrary pure two-qubit state `alpha|00> + beta|01> + zeta|10> + delta|11>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralInitialState {
    amps: [C64; 4],
}

impl GeneralInitialState {
    pub fn new(alpha: C64, beta: C64, zeta: C64, delta: C64) -> Result<Self> {
        let amps = [alpha, beta, zeta, delta];
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL || !norm.is_finite() {
            return Err(Error::ParameterDomain(format!("amplitudes must be normalised, |a|^2 sum = {norm}")));
        }
        Ok(Self { amps })
    }

    pub fn alpha(&self) -> C64 {
        self.amps[0]
    }
    pub fn beta(&self) -> C64 {
        self.amps[1]
    }
    pub fn zeta(&self) -> C64 {
        self.amps[2]
    }
    pub fn delta(&self) -> C64 {
        self.amps[3]
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.amps
    }

    pub fn to_vector(&self) -> Vector4<C64> {
        Vector4::from_column_slice(&self.amps)
    }

    pub fn projector(&self) -> Matrix4<C64> {
        let v = self.to_vector();
        v * v.adjoint()
    }
}

/// Parameters of `(1-r)/4 I + r |phi><phi|` with `|phi>` chosen by `branch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerSpec {
    pub r: f64,
    pub p: f64,
    pub branch: Branch,
}

impl WernerSpec {
    pub fn new(r: f64, p: f64, branch: Branch) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::ParameterDomain(format!("mixing r must lie in (0, 1], got {r}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterDomain(format!("entanglement parameter p must lie in [0, 1], got {p}")));
        }
        Ok(Self { r, p, branch })
    }

    /// The pure component `|phi>`.
    pub fn pure_state(&self) -> GeneralInitialState {
        let a = C64::new((1.0 - self.p).sqrt(), 0.0);
        let b = C64::new(self.p.sqrt(), 0.0);
        let z = C64::new(0.0, 0.0);
        let amps = match self.branch {
            Branch::Theta => [a, z, z, b],
            Branch::Mu => [z, a, b, z],
        };
        GeneralInitialState { amps }
    }

    /// `sqrt(p(1-p))`, the magnitude of the initial coherence of `|phi>`.
    pub fn coherence_amplitude(&self) -> f64 {
        (self.p * (1.0 - self.p)).sqrt()
    }
}

/// 4x4 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    m: Matrix4<C64>,
}

impl DensityMatrix4 {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        check_hermitian(&m)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::StateIntegrity(format!("trace is {tr}, expected 1")));
        }
        let min = m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -NEGATIVITY_TOL {
            return Err(Error::StateIntegrity(format!("negative eigenvalue {min}")));
        }
        Ok(Self { m })
    }

    /// Skips the positivity check; used by the closed-form constructors whose
    /// output is Hermitian with unit trace by construction.
    pub(crate) fn from_hermitian_unchecked(m: Matrix4<C64>) -> Self {
        debug_assert!(check_hermitian(&m).is_ok());
        Self { m }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `Tr rho^2`
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> [f64; 4] {
        [self.m[(0, 0)].re, self.m[(1, 1)].re, self.m[(2, 2)].re, self.m[(3, 3)].re]
    }

    /// Full validation, for states assembled from untrusted factors.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.m).map(|_| ())
    }
}

/// Eigenvalues sorted descending with unit, gauge-fixed eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem4 {
    pub values: [f64; 4],
    pub vectors: [Vector4<C64>; 4],
}

impl EigenSystem4 {
    /// `sum_k eps_k |v_k><v_k|`
    pub fn reconstruct(&self) -> Matrix4<C64> {
        self.values
            .iter()
            .zip(self.vectors.iter())
            .fold(Matrix4::zeros(), |acc, (&e, v)| acc + v * v.adjoint() * C64::new(e, 0.0))
    }
}

/// Eigendecomposition of a density matrix.
pub fn eigensystem(rho: &DensityMatrix4) -> Result<EigenSystem4> {
    hermitian_eigensystem(rho.matrix())
}

/// Eigendecomposition of an arbitrary 4x4 matrix that must be Hermitian.
///
/// Each eigenvector's phase is fixed so that its largest-magnitude component
/// is real and positive (lowest index wins a tie).
pub fn hermitian_eigensystem(m: &Matrix4<C64>) -> Result<EigenSystem4> {
    check_hermitian(m)?;
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut values = [0.0; 4];
    let mut vectors = [Vector4::zeros(); 4];
    for (slot, &k) in order.iter().enumerate() {
        let v: Vector4<C64> = eig.eigenvectors.column(k).into_owned();
        let v = fix_gauge(v.normalize());
        let e = eig.eigenvalues[k];
        let residual = (m * v - v * C64::new(e, 0.0)).norm();
        if residual > RESIDUAL_TOL {
            return Err(Error::StateIntegrity(format!("eigenpair residual {residual:e} exceeds {RESIDUAL_TOL:e}")));
        }
        values[slot] = e;
        vectors[slot] = v;
    }
    Ok(EigenSystem4 { values, vectors })
}

/// Rotates the global phase so the dominant component is real positive.
pub fn fix_gauge(v: Vector4<C64>) -> Vector4<C64> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    let pivot = v.iter().position(|z| z.norm() >= max - 1e-12 * max).expect("max is attained");
    let phase = v[pivot] / v[pivot].norm();
    v * phase.conj()
}

fn check_hermitian(m: &Matrix4<C64>) -> Result<()> {
    for i in 0..4 {
        for j in i..4 {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > HERMITIAN_TOL || !d.is_finite() {
                return Err(Error::StateIntegrity(format!("matrix not Hermitian at ({i},{j}): deviation {d:e}")));
            }
        }
    }
    Ok(())
}

/// `(1-r)/4 I + r |phi><phi|`.
pub fn werner_density(spec: &WernerSpec) -> Result<DensityMatrix4> {
    let spec = WernerSpec::new(spec.r, spec.p, spec.branch)?;
    let noise = Matrix4::<C64>::identity() * C64::new((1.0 - spec.r) / 4.0, 0.0);
    let m = noise + spec.pure_state().projector() * C64::new(spec.r, 0.0);
    Ok(DensityMatrix4::from_hermitian_unchecked(m))
}

//! Concurrence and entropy of the two-qubit reduced state.

use nalgebra::Matrix4;
use rayon::prelude::*;

use crate::boson::boson_factors;
use crate::error::{Error, Result};
use crate::evolution::{EnvironmentSpec, Trajectory};
use crate::spin::{p_factor, q_factor};
use crate::state::{eigensystem, Branch, DensityMatrix4, WernerSpec};
use crate::C64;

// sigma_y (x) sigma_y is real in the computational basis
fn spin_flip() -> Matrix4<C64> {
    let mut y = Matrix4::<C64>::zeros();
    y[(0, 3)] = C64::new(-1.0, 0.0);
    y[(3, 0)] = C64::new(-1.0, 0.0);
    y[(1, 2)] = C64::new(1.0, 0.0);
    y[(2, 1)] = C64::new(1.0, 0.0);
    y
}

// Eigenvalues below this are roundoff; their square roots would otherwise
// leak ~1e-8 into the concurrence.
const ROUNDOFF_EIGENVALUE: f64 = 1e-14;

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, where `l_k^2` are the
/// eigenvalues of `rho (Y rho* Y)` in decreasing order.
///
/// With `rho = W W^dagger`, `W = [sqrt(eps_k) v_k]`, the `l_k` are the singular
/// values of `W^T Y W`, which avoids a non-Hermitian eigenproblem.
pub fn concurrence_wootters(rho: &DensityMatrix4) -> Result<f64> {
    let eig = eigensystem(rho)?;
    let mut w = Matrix4::<C64>::zeros();
    for (k, (&e, v)) in eig.values.iter().zip(eig.vectors.iter()).enumerate() {
        if e > ROUNDOFF_EIGENVALUE {
            w.set_column(k, &(v * C64::new(e.sqrt(), 0.0)));
        }
    }
    let tau = w.transpose() * spin_flip() * w;
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// `2 sqrt(p(1-p)) |damping|`: concurrence of an `r = 1` Werner branch whose
/// coherence has been scaled by `damping`.
pub fn coherence_concurrence(p: f64, damping: f64) -> f64 {
    2.0 * (p * (1.0 - p)).sqrt() * damping.abs()
}

/// The printed closed form for the Mu branch in a bosonic bath with equal
/// couplings: `sqrt(1-p + 2 sqrt(p(1-p)^3)) - sqrt(1-p - 2 sqrt(p(1-p)^3))`.
///
/// It equals `2 sqrt(p(1-p))` for `p <= 1/2` but `2(1-p)` above.
pub fn concurrence_mu_boson_printed(p: f64) -> f64 {
    let q = 1.0 - p;
    let s = 2.0 * (p * q * q * q).sqrt();
    (q + s).sqrt() - (q - s).max(0.0).sqrt()
}

/// The printed spin-bath form `sqrt(p(1-p)(F+1)^2) - sqrt(p(1-p)(F-1)^2)`
/// with `F = Q` or `P`; it reduces to `2 sqrt(p(1-p)) F` and is negative
/// whenever `F < 0`.
pub fn concurrence_spin_printed(p: f64, factor: f64) -> f64 {
    let pq = p * (1.0 - p);
    (pq * (factor + 1.0).powi(2)).sqrt() - (pq * (factor - 1.0).powi(2)).sqrt()
}

/// Closed-form concurrence of a pure (`r = 1`) Werner branch at time `t`.
///
/// Bosonic baths require equal couplings; the Theta branch uses
/// `2 Gamma^4 sqrt(p(1-p))` and the Mu branch the printed decoherence-free
/// expression. Spin baths use the printed `Q`/`P` forms literally.
pub fn concurrence_closed(spec: &WernerSpec, env: &EnvironmentSpec, t: f64) -> Result<f64> {
    if spec.r != 1.0 {
        return Err(Error::UnsupportedRegime(format!("closed-form concurrence needs r = 1, got {}", spec.r)));
    }
    let p = spec.p;
    match env {
        EnvironmentSpec::Closed => Ok(coherence_concurrence(p, 1.0)),
        EnvironmentSpec::Boson(b) => {
            if !(b.gamma01 == b.gamma02 && b.gamma02 == b.gamma012) {
                return Err(Error::UnsupportedRegime("closed-form boson concurrence assumes equal couplings".into()));
            }
            match spec.branch {
                Branch::Theta => Ok(coherence_concurrence(p, boson_factors(b, t)?.theta_damping())),
                Branch::Mu => {
                    if t < 0.0 {
                        return Err(Error::ParameterDomain(format!("time must be >= 0, got {t}")));
                    }
                    Ok(concurrence_mu_boson_printed(p))
                }
            }
        }
        EnvironmentSpec::Spin(s) => {
            let factor = match spec.branch {
                Branch::Theta => q_factor(s, t)?,
                Branch::Mu => p_factor(s, t)?,
            };
            Ok(concurrence_spin_printed(p, factor))
        }
    }
}

/// Von Neumann entropy `-Tr rho log2 rho` in bits.
pub fn linear_entropy(rho: &DensityMatrix4) -> Result<f64> {
    let eig = eigensystem(rho)?;
    Ok(eig.values.iter().filter(|&&e| e > 0.0).map(|&e| -e * e.log2()).sum::<f64>().max(0.0))
}

/// `pi sqrt((1-p)/p)`: ratio of the closed-system phase to the concurrence.
pub fn phase_concurrence_ratio(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::ParameterDomain(format!("ratio needs 0 < p <= 1, got {p}")));
    }
    Ok(std::f64::consts::PI * ((1.0 - p) / p).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementSample {
    pub t: f64,
    pub concurrence: f64,
    /// Entropy in bits.
    pub entropy: f64,
}

/// Concurrence and entropy at every sample of a trajectory.
pub fn entanglement_along(traj: &Trajectory) -> Result<Vec<EntanglementSample>> {
    traj.times
        .par_iter()
        .zip(traj.states.par_iter())
        .map(|(&t, rho)| {
            Ok(EntanglementSample { t, concurrence: concurrence_wootters(rho)?, entropy: linear_entropy(rho)? })
        })
        .collect()
}

//! Finite bath of `N` tunneling spins coupled to both qubits through `sigma_z`.
//!
//! The bath starts in a product of equal-weight superpositions on each spin,
//! which is what makes the factors below closed-form.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// One environmental spin: tunneling `h`, coupling `eps` to qubit 1 and `lam` to qubit 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpin {
    pub h: f64,
    pub eps: f64,
    pub lam: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinBathSpec {
    spins: Vec<BathSpin>,
}

// Above this size the per-spin factors are reduced in parallel.
const PARALLEL_THRESHOLD: usize = 4096;

impl SpinBathSpec {
    pub fn new(spins: Vec<BathSpin>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::ParameterDomain("spin bath needs at least one spin".into()));
        }
        for (i, s) in spins.iter().enumerate() {
            if !(s.h >= 0.0) || !s.h.is_finite() || !s.eps.is_finite() || !s.lam.is_finite() {
                return Err(Error::ParameterDomain(format!("spin {i}: invalid parameters {s:?}")));
            }
            let sum = s.eps + s.lam;
            let diff = s.eps - s.lam;
            if s.h == 0.0 && (sum == 0.0 || diff == 0.0) {
                return Err(Error::ParameterDomain(format!(
                    "spin {i}: h = 0 together with eps +/- lam = 0 leaves the factor undefined"
                )));
            }
        }
        Ok(Self { spins })
    }

    /// `n` identical spins.
    pub fn homogeneous(n: usize, h: f64, eps: f64, lam: f64) -> Result<Self> {
        Self::new(vec![BathSpin { h, eps, lam }; n])
    }

    /// `n` spins with each parameter drawn uniformly from its range, reproducible from `seed`.
    pub fn random(n: usize, h: (f64, f64), eps: (f64, f64), lam: (f64, f64), seed: u64) -> Result<Self> {
        let dist = |(lo, hi): (f64, f64)| -> Result<Uniform<f64>> {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::ParameterDomain(format!("invalid sampling range [{lo}, {hi}]")));
            }
            Ok(Uniform::new_inclusive(lo, hi))
        };
        let (dh, de, dl) = (dist(h)?, dist(eps)?, dist(lam)?);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins = (0..n)
            .map(|_| BathSpin { h: dh.sample(&mut rng), eps: de.sample(&mut rng), lam: dl.sample(&mut rng) })
            .collect();
        Self::new(spins)
    }

    pub fn spins(&self) -> &[BathSpin] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn is_decoupled(&self) -> bool {
        self.spins.iter().all(|s| s.eps == 0.0 && s.lam == 0.0)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::ParameterDomain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

// 1 - 2 c^2 / (h^2 + c^2) * sin^2(t sqrt(h^2 + c^2))
fn spin_factor(h: f64, c: f64, t: f64) -> f64 {
    let c2 = c * c;
    if c2 == 0.0 {
        return 1.0;
    }
    let w2 = h * h + c2;
    let s = (t * w2.sqrt()).sin();
    1.0 - 2.0 * c2 / w2 * s * s
}

fn product(bath: &SpinBathSpec, t: f64, coupling: fn(&BathSpin) -> f64) -> f64 {
    let factor = |s: &BathSpin| spin_factor(s.h, coupling(s), t);
    if bath.len() >= PARALLEL_THRESHOLD {
        bath.spins.par_iter().map(factor).product()
    } else {
        bath.spins.iter().map(factor).product()
    }
}

/// Damping of the `|00><11|` coherence; depends on `eps + lam`.
pub fn q_factor(bath: &SpinBathSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(product(bath, t, |s| s.eps + s.lam))
}

/// Damping of the `|01><10|` coherence; depends on `eps - lam`.
pub fn p_factor(bath: &SpinBathSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(product(bath, t, |s| s.eps - s.lam))
}

/// Literal dispersion estimate `sqrt(sum_i p_i)` with
/// `p_i = 1 - (eps_i + lam_i)^2 / (4 (h_i^2 + (eps_i + lam_i)^2))`.
///
/// This grows like `sqrt(N)`; see [`dispersion_estimate_normalized`] and
/// [`time_averaged_abs_q`] for the quantities that shrink with bath size.
pub fn dispersion_estimate(bath: &SpinBathSpec) -> f64 {
    bath.spins
        .iter()
        .map(|s| {
            let c2 = (s.eps + s.lam).powi(2);
            let w2 = s.h * s.h + c2;
            if c2 == 0.0 {
                1.0
            } else {
                1.0 - c2 / (4.0 * w2)
            }
        })
        .sum::<f64>()
        .sqrt()
}

/// [`dispersion_estimate`] divided by `N`.
pub fn dispersion_estimate_normalized(bath: &SpinBathSpec) -> f64 {
    dispersion_estimate(bath) / bath.len() as f64
}

/// Mean of `|Q(t)|` over `samples` uniformly spaced times in `[0, t_end]`
/// (trapezoid weights).
pub fn time_averaged_abs_q(bath: &SpinBathSpec, t_end: f64, samples: usize) -> Result<f64> {
    check_time(t_end)?;
    if samples < 2 || t_end == 0.0 {
        return Err(Error::ParameterDomain("need t_end > 0 and at least two samples".into()));
    }
    let dt = t_end / (samples - 1) as f64;
    let sum: f64 = (0..samples)
        .into_par_iter()
        .map(|k| {
            let w = if k == 0 || k == samples - 1 { 0.5 } else { 1.0 };
            w * product(bath, k as f64 * dt, |s| s.eps + s.lam).abs()
        })
        .sum();
    Ok(sum / (samples - 1) as f64)
}

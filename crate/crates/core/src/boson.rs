//! Zero-temperature bosonic bath: decoherence factors, noise and dissipation
//! kernels.
//!
//! The spectral density of channel `i` is
//! `J_i(w) = g_i / 4 * w^n * cutoff^(1-n) * exp(-w / cutoff)` with `n = 1`
//! (ohmic) or `n = 3` (supraohmic). The kernels and their first and second
//! time integrals are evaluated from exact antiderivatives, written in terms
//! of the dimensionless time `x = cutoff * t`.
//!
//! Two prefactor conventions exist for the decoherence factors. The closed
//! forms `(1 + x^2)^(-2 g)` and `exp(-4 g x^4 / (1 + x^2)^2)` are the
//! [`PrefactorConvention::MainText`] default. Feeding the kernels through
//! `Gamma = exp(-4 * int F)` instead gives [`PrefactorConvention::Appendix`],
//! whose ohmic exponent is four times smaller.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spectral {
    /// `J ~ w`
    Ohmic,
    /// `J ~ w^3`
    Supraohmic,
}

impl Spectral {
    /// Power `n` of the spectral density.
    pub fn exponent(self) -> u32 {
        match self {
            Spectral::Ohmic => 1,
            Spectral::Supraohmic => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PrefactorConvention {
    #[default]
    MainText,
    Appendix,
}

/// Which coupling channel a kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// qubit 1 alone
    One,
    /// qubit 2 alone
    Two,
    /// cross term between the two qubits
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonBathSpec {
    pub spectral: Spectral,
    pub gamma01: f64,
    pub gamma02: f64,
    pub gamma012: f64,
    /// Frequency cutoff (rad / time).
    pub cutoff: f64,
    pub convention: PrefactorConvention,
}

impl BosonBathSpec {
    pub fn new(spectral: Spectral, gamma01: f64, gamma02: f64, gamma012: f64, cutoff: f64) -> Result<Self> {
        for (name, g) in [("gamma01", gamma01), ("gamma02", gamma02), ("gamma012", gamma012)] {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::ParameterDomain(format!("{name} must be >= 0, got {g}")));
            }
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::ParameterDomain(format!("cutoff must be > 0, got {cutoff}")));
        }
        Ok(Self { spectral, gamma01, gamma02, gamma012, cutoff, convention: PrefactorConvention::MainText })
    }

    /// All three couplings equal to `gamma0`.
    pub fn uniform(spectral: Spectral, gamma0: f64, cutoff: f64) -> Result<Self> {
        Self::new(spectral, gamma0, gamma0, gamma0, cutoff)
    }

    pub fn with_convention(mut self, convention: PrefactorConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn coupling(&self, which: Channel) -> f64 {
        match which {
            Channel::One => self.gamma01,
            Channel::Two => self.gamma02,
            Channel::Cross => self.gamma012,
        }
    }

    /// `gamma012^2 <= gamma01 * gamma02`, which keeps every evolved state positive.
    pub fn is_physical(&self) -> bool {
        self.gamma012 * self.gamma012 <= self.gamma01 * self.gamma02 * (1.0 + 1e-12)
    }

    pub fn is_closed(&self) -> bool {
        self.gamma01 == 0.0 && self.gamma02 == 0.0 && self.gamma012 == 0.0
    }
}

/// All bath factors entering the reduced density matrix at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonFactors {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma12: f64,
    /// Enhancement factor of the `|01><10|` coherence; may exceed one.
    pub gamma12_tilde_sq: f64,
    /// Phase of the dissipative factor `exp(i * phase)`.
    pub lambda12_phase: f64,
}

impl BosonFactors {
    pub const UNIT: BosonFactors =
        BosonFactors { gamma1: 1.0, gamma2: 1.0, gamma12: 1.0, gamma12_tilde_sq: 1.0, lambda12_phase: 0.0 };

    /// Damping of the `|00><11|` coherence.
    pub fn theta_damping(&self) -> f64 {
        self.gamma1 * self.gamma2 * self.gamma12 * self.gamma12
    }

    /// Damping of the `|01><10|` coherence.
    pub fn mu_damping(&self) -> f64 {
        self.gamma1 * self.gamma2 * self.gamma12_tilde_sq
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::ParameterDomain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// `(1 + cutoff^2 t^2)^(-2 gamma0)`
pub fn gamma_ohmic(gamma0: f64, cutoff: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let x = cutoff * t;
    Ok((-2.0 * gamma0 * x.mul_add(x, 1.0).ln()).exp())
}

/// `exp(-4 gamma0 x^4 / (1 + x^2)^2)` with `x = cutoff * t`.
pub fn gamma_supraohmic(gamma0: f64, cutoff: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((-4.0 * gamma0 * supra_shape(cutoff * t)).exp())
}

// x^4 / (1 + x^2)^2, written to stay accurate for large x
fn supra_shape(x: f64) -> f64 {
    let s = x * x / (1.0 + x * x);
    s * s
}

/// Noise kernel `nu(t) = int_0^inf J(w) cos(w t) dw` at zero temperature.
pub fn noise_kernel(spec: &BosonBathSpec, which: Channel, t: f64) -> Result<f64> {
    check_time(t)?;
    let g = spec.coupling(which);
    let (l, x) = (spec.cutoff, spec.cutoff * t);
    let d = 1.0 + x * x;
    Ok(match spec.spectral {
        Spectral::Ohmic => 0.25 * g * l * l * (1.0 - x * x) / (d * d),
        Spectral::Supraohmic => 1.5 * g * l * l * (1.0 - 6.0 * x * x + x.powi(4)) / d.powi(4),
    })
}

/// Dissipation kernel `eta(t) = int_0^inf J(w) sin(w t) dw`.
pub fn dissipation_kernel(spec: &BosonBathSpec, which: Channel, t: f64) -> Result<f64> {
    check_time(t)?;
    let g = spec.coupling(which);
    let (l, x) = (spec.cutoff, spec.cutoff * t);
    let d = 1.0 + x * x;
    Ok(match spec.spectral {
        Spectral::Ohmic => 0.5 * g * l * l * x / (d * d),
        Spectral::Supraohmic => 6.0 * g * l * l * x * (1.0 - x * x) / d.powi(4),
    })
}

/// `F(t) = int_0^t nu(s) ds`
pub fn noise_integral(spec: &BosonBathSpec, which: Channel, t: f64) -> Result<f64> {
    check_time(t)?;
    let g = spec.coupling(which);
    let (l, x) = (spec.cutoff, spec.cutoff * t);
    let d = 1.0 + x * x;
    Ok(match spec.spectral {
        Spectral::Ohmic => 0.25 * g * l * x / d,
        Spectral::Supraohmic => 0.5 * g * l * x * (3.0 - x * x) / d.powi(3),
    })
}

/// `int_0^t F(s) ds`
pub fn noise_double_integral(spec: &BosonBathSpec, which: Channel, t: f64) -> Result<f64> {
    check_time(t)?;
    let g = spec.coupling(which);
    let x = spec.cutoff * t;
    Ok(match spec.spectral {
        Spectral::Ohmic => 0.125 * g * x.mul_add(x, 1.0).ln(),
        Spectral::Supraohmic => {
            let d = 1.0 + x * x;
            0.25 * g * (supra_shape(x) + 3.0 * x * x / (d * d))
        }
    })
}

/// `G(t) = int_0^t eta(s) ds`
pub fn dissipation_integral(spec: &BosonBathSpec, which: Channel, t: f64) -> Result<f64> {
    check_time(t)?;
    let g = spec.coupling(which);
    let (l, x) = (spec.cutoff, spec.cutoff * t);
    let d = 1.0 + x * x;
    Ok(match spec.spectral {
        Spectral::Ohmic => 0.25 * g * l * x * x / d,
        // 1 - (1 - 3x^2)/d^3 expanded to avoid cancellation
        Spectral::Supraohmic => 0.5 * g * l * x * x * (6.0 + 3.0 * x * x + x.powi(4)) / d.powi(3),
    })
}

/// Real exponent `4 int_0^t G_12(s) ds` of the dissipative factor.
pub fn dissipation_phase(spec: &BosonBathSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    let g = spec.gamma012;
    let x = spec.cutoff * t;
    Ok(match spec.spectral {
        Spectral::Ohmic => g * (x - x.atan()),
        Spectral::Supraohmic => {
            let d = 1.0 + x * x;
            // 1 - 1/d^2 = x^2 (2 + x^2) / d^2
            2.0 * g * x * x * x * (2.0 + x * x) / (d * d)
        }
    })
}

/// Decoherence factor of one channel under the spec's prefactor convention.
pub fn decoherence_factor(spec: &BosonBathSpec, which: Channel, t: f64) -> Result<f64> {
    check_time(t)?;
    let g = spec.coupling(which);
    match spec.convention {
        PrefactorConvention::MainText => match spec.spectral {
            Spectral::Ohmic => gamma_ohmic(g, spec.cutoff, t),
            Spectral::Supraohmic => gamma_supraohmic(g, spec.cutoff, t),
        },
        PrefactorConvention::Appendix => Ok((-4.0 * noise_double_integral(spec, which, t)?).exp()),
    }
}

/// Assembles all five bath factors at time `t`.
///
/// `gamma12_tilde_sq` is the reciprocal of `gamma12^2`. Under the appendix
/// convention this is literally `exp(+8 int F_12)`.
pub fn boson_factors(spec: &BosonBathSpec, t: f64) -> Result<BosonFactors> {
    check_time(t)?;
    let gamma1 = decoherence_factor(spec, Channel::One, t)?;
    let gamma2 = decoherence_factor(spec, Channel::Two, t)?;
    let gamma12 = decoherence_factor(spec, Channel::Cross, t)?;
    let gamma12_tilde_sq = match spec.convention {
        PrefactorConvention::Appendix => (8.0 * noise_double_integral(spec, Channel::Cross, t)?).exp(),
        PrefactorConvention::MainText => 1.0 / (gamma12 * gamma12),
    };
    Ok(BosonFactors { gamma1, gamma2, gamma12, gamma12_tilde_sq, lambda12_phase: dissipation_phase(spec, t)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn spec(spectral: Spectral, g: f64) -> BosonBathSpec {
        BosonBathSpec::uniform(spectral, g, 100.0).unwrap()
    }

    // J(w) in the documented normalisation
    fn spectral_density(spec: &BosonBathSpec, w: f64) -> f64 {
        let n = spec.spectral.exponent() as i32;
        0.25 * spec.gamma012 * w.powi(n) * spec.cutoff.powi(1 - n) * (-w / spec.cutoff).exp()
    }

    // brute-force frequency integral, independent of the closed forms
    fn kernel_by_quadrature(spec: &BosonBathSpec, t: f64, trig: fn(f64) -> f64) -> f64 {
        let upper = 80.0 * spec.cutoff;
        let breaks: Vec<f64> = (1..400).map(|k| upper * k as f64 / 400.0).collect();
        quad::integrate(|w| spectral_density(spec, w) * trig(w * t), 0.0, upper, &breaks, 1e-10, 20000).value
    }

    #[test]
    fn ohmic_factor_values() {
        assert_eq!(gamma_ohmic(0.3, 50.0, 0.0).unwrap(), 1.0);
        assert_eq!(gamma_ohmic(0.0, 50.0, 7.0).unwrap(), 1.0);
        let t = 2.0 * std::f64::consts::PI;
        let x2 = (200.0 * std::f64::consts::PI).powi(2);
        // evaluated independently: (1 + (200 pi)^2)^(-0.004)
        assert_relative_eq!(gamma_ohmic(0.002, 100.0, t).unwrap(), (1.0 + x2).powf(-0.004), max_relative = 1e-14);
        assert_relative_eq!(gamma_ohmic(0.002, 100.0, t).unwrap(), 0.949_761_490_869_782_9, max_relative = 1e-13);
        assert!(gamma_ohmic(0.1, 1.0, -1.0).is_err());
    }

    #[test]
    fn supraohmic_factor_values() {
        assert_eq!(gamma_supraohmic(0.4, 10.0, 0.0).unwrap(), 1.0);
        let v = gamma_supraohmic(0.1, 1000.0, 1.0).unwrap();
        assert!((v / (-0.4f64).exp() - 1.0).abs() < 0.01);
        let ratio: f64 = 10_000.0 / 10_001.0;
        assert_relative_eq!(
            gamma_supraohmic(0.002, 100.0, 1.0).unwrap(),
            (-0.008 * ratio * ratio).exp(),
            max_relative = 1e-14
        );
        assert!(gamma_supraohmic(0.1, 1.0, -1e-3).is_err());
    }

    #[test]
    fn noise_kernel_examples() {
        let s = spec(Spectral::Ohmic, 0.02);
        assert_relative_eq!(noise_kernel(&s, Channel::One, 0.0).unwrap(), 0.02 * 1e4 / 4.0, max_relative = 1e-15);
        assert_abs_diff_eq!(noise_kernel(&s, Channel::One, 0.01).unwrap(), 0.0, epsilon = 1e-12);
        let z = spec(Spectral::Supraohmic, 0.0);
        assert_eq!(noise_kernel(&z, Channel::Cross, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn kernels_match_frequency_quadrature() {
        for spectral in [Spectral::Ohmic, Spectral::Supraohmic] {
            let s = BosonBathSpec::uniform(spectral, 0.01, 5.0).unwrap();
            for t in [0.0, 0.05, 0.2, 0.37, 1.0] {
                let nu = kernel_by_quadrature(&s, t, f64::cos);
                let eta = kernel_by_quadrature(&s, t, f64::sin);
                let scale = 0.01 * 25.0;
                assert_abs_diff_eq!(noise_kernel(&s, Channel::Cross, t).unwrap(), nu, epsilon = 1e-9 * scale);
                assert_abs_diff_eq!(dissipation_kernel(&s, Channel::Cross, t).unwrap(), eta, epsilon = 1e-9 * scale);
            }
        }
    }

    #[test]
    fn antiderivatives_match_time_quadrature() {
        for spectral in [Spectral::Ohmic, Spectral::Supraohmic] {
            let s = BosonBathSpec::uniform(spectral, 0.03, 20.0).unwrap();
            let nu = |t: f64| noise_kernel(&s, Channel::One, t).unwrap();
            let eta = |t: f64| dissipation_kernel(&s, Channel::Cross, t).unwrap();
            let f = |t: f64| noise_integral(&s, Channel::One, t).unwrap();
            let g = |t: f64| dissipation_integral(&s, Channel::Cross, t).unwrap();
            for t in [0.01, 0.1, 0.5, 2.0] {
                let brk = [0.05, 0.5];
                let tol = 1e-11;
                assert_abs_diff_eq!(f(t), quad::integrate(nu, 0.0, t, &brk, tol, 5000).value, epsilon = 1e-9);
                assert_abs_diff_eq!(g(t), quad::integrate(eta, 0.0, t, &brk, tol, 5000).value, epsilon = 1e-9);
                assert_abs_diff_eq!(
                    noise_double_integral(&s, Channel::One, t).unwrap(),
                    quad::integrate(f, 0.0, t, &brk, tol, 5000).value,
                    epsilon = 1e-10
                );
                assert_abs_diff_eq!(
                    dissipation_phase(&s, t).unwrap(),
                    4.0 * quad::integrate(g, 0.0, t, &brk, tol, 5000).value,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn noise_integral_is_derivative_of_double_integral() {
        for spectral in [Spectral::Ohmic, Spectral::Supraohmic] {
            let s = BosonBathSpec::uniform(spectral, 0.05, 30.0).unwrap();
            assert_eq!(noise_integral(&s, Channel::Two, 0.0).unwrap(), 0.0);
            for t in [0.003, 0.02, 0.1, 1.3] {
                let h = 1e-6 * t;
                let fd = (noise_double_integral(&s, Channel::Two, t + h).unwrap()
                    - noise_double_integral(&s, Channel::Two, t - h).unwrap())
                    / (2.0 * h);
                let f = noise_integral(&s, Channel::Two, t).unwrap();
                assert!((fd - f).abs() <= 1e-6 * f.abs().max(1e-3), "t={t}: {fd} vs {f}");
            }
        }
    }

    #[test]
    fn dissipation_phase_examples() {
        let s = spec(Spectral::Ohmic, 0.002);
        assert_eq!(dissipation_phase(&s, 0.0).unwrap(), 0.0);
        let uncorrelated = BosonBathSpec::new(Spectral::Ohmic, 0.1, 0.1, 0.0, 100.0).unwrap();
        assert_eq!(dissipation_phase(&uncorrelated, 3.0).unwrap(), 0.0);
        // nested time quadrature of eta_12 at t = 0.1
        let eta = |t: f64| dissipation_kernel(&s, Channel::Cross, t).unwrap();
        let g = |t: f64| quad::integrate(eta, 0.0, t, &[0.01], 1e-12, 2000).value;
        let nested = 4.0 * quad::integrate(g, 0.0, 0.1, &[0.01], 1e-12, 2000).value;
        assert_relative_eq!(dissipation_phase(&s, 0.1).unwrap(), nested, max_relative = 1e-8);
    }

    #[test]
    fn appendix_exponent_is_quarter_of_main_text() {
        let main = spec(Spectral::Ohmic, 0.01);
        let app = main.with_convention(PrefactorConvention::Appendix);
        for t in [0.01, 0.3, 6.0] {
            let a = decoherence_factor(&app, Channel::One, t).unwrap().ln();
            let m = decoherence_factor(&main, Channel::One, t).unwrap().ln();
            assert_relative_eq!(m / a, 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn tilde_factor_cancels_cross_factor() {
        for spectral in [Spectral::Ohmic, Spectral::Supraohmic] {
            for convention in [PrefactorConvention::MainText, PrefactorConvention::Appendix] {
                let s = BosonBathSpec::new(spectral, 0.02, 0.03, 0.01, 100.0).unwrap().with_convention(convention);
                for t in [0.0, 0.01, 1.0, 6.0] {
                    let f = boson_factors(&s, t).unwrap();
                    assert_relative_eq!(f.gamma12_tilde_sq * f.gamma12 * f.gamma12, 1.0, max_relative = 1e-12);
                }
            }
        }
        // appendix: exponents +8 int F and -4 * 2 int F are equal and opposite
        let s = spec(Spectral::Ohmic, 0.02).with_convention(PrefactorConvention::Appendix);
        let f = boson_factors(&s, 0.5).unwrap();
        let int_f = noise_double_integral(&s, Channel::Cross, 0.5).unwrap();
        assert_relative_eq!(f.gamma12_tilde_sq.ln(), 8.0 * int_f, max_relative = 1e-12);
        assert_relative_eq!((f.gamma12 * f.gamma12).ln(), -8.0 * int_f, max_relative = 1e-12);
    }

    #[test]
    fn factors_at_origin_and_uncorrelated() {
        for spectral in [Spectral::Ohmic, Spectral::Supraohmic] {
            let f = boson_factors(&spec(spectral, 0.1), 0.0).unwrap();
            assert_eq!(f, BosonFactors::UNIT);
            let unc = BosonBathSpec::new(spectral, 0.05, 0.02, 0.0, 100.0).unwrap();
            let f = boson_factors(&unc, 2.0).unwrap();
            assert_eq!(f.gamma12, 1.0);
            assert_eq!(f.gamma12_tilde_sq, 1.0);
            assert_eq!(f.lambda12_phase, 0.0);
        }
    }

    #[test]
    fn equal_coupling_theta_damping() {
        let g0 = 0.004;
        let s = spec(Spectral::Ohmic, g0);
        for t in [0.1, 1.0, 6.0] {
            let x = 100.0 * t;
            let f = boson_factors(&s, t).unwrap();
            assert_relative_eq!(f.theta_damping(), (1.0f64 + x * x).powf(-8.0 * g0), max_relative = 1e-12);
            assert_relative_eq!(f.mu_damping(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn ohmic_strictly_decreasing_and_below_supraohmic() {
        let g0 = 0.05;
        let mut prev = 1.0;
        for k in 1..200 {
            let t = 0.01 * k as f64;
            let o = gamma_ohmic(g0, 100.0, t).unwrap();
            assert!(o < prev);
            prev = o;
            let s = gamma_supraohmic(g0, 100.0, t).unwrap();
            if 100.0 * t > 1.0 {
                assert!(s > o, "t={t}");
            }
        }
    }

    #[test]
    fn combined_mu_damping_bounded_when_couplings_physical() {
        for (g1, g2, g12) in [(0.01, 0.04, 0.02), (0.1, 0.001, 0.0), (0.02, 0.02, 0.02), (0.05, 0.01, 0.02)] {
            let s = BosonBathSpec::new(Spectral::Ohmic, g1, g2, g12, 100.0).unwrap();
            assert!(s.is_physical());
            for t in [0.0, 0.05, 1.0, 10.0] {
                assert!(boson_factors(&s, t).unwrap().mu_damping() <= 1.0 + 1e-12);
            }
        }
    }
}

//! Numerical acceptance checks, one per criterion.
//!
//! Every check returns the worst measured deviation next to the value it was
//! compared against, so a failing line says by how much it failed.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bipartite_gp::boson::{boson_factors, BosonBathSpec, Spectral};
use bipartite_gp::entanglement::{
    coherence_concurrence, concurrence_closed, concurrence_mu_boson_printed, concurrence_wootters, linear_entropy,
    phase_concurrence_ratio,
};
use bipartite_gp::evolution::{rho_at, EnvironmentSpec, InitialState};
use bipartite_gp::geophase::{
    kinematic_phase_werner, perturbative_phase, reduced_phase_for, unitary_phase, SeriesArgs, SeriesKind,
    DEFAULT_POINTS_PER_CYCLE,
};
use bipartite_gp::spin::{p_factor, time_averaged_abs_q, BathSpin, SpinBathSpec};
use bipartite_gp::state::{Branch, GeneralInitialState, SystemParams, WernerSpec};
use bipartite_gp::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Informational; never fails the suite.
    Report,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Report => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    /// One-line summary for terminal output.
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: measured {:.6e}, expected {:.6e}, tolerance {} ({:.2} s) | {}",
            self.status.label(),
            self.id,
            self.name,
            self.measured,
            self.expected,
            if self.tolerance.is_nan() { "n/a".to_string() } else { format!("{:.1e}", self.tolerance) },
            self.seconds,
            self.detail
        )
    }
}

/// Measured value and verdict of one check, before timing is attached.
#[derive(Debug, Clone)]
pub struct Check {
    pub status: Status,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn deviation(measured: f64, expected: f64, tolerance: f64, detail: String) -> Self {
        let ok = (measured - expected).abs() <= tolerance;
        Self { status: if ok { Status::Pass } else { Status::Fail }, measured, expected, tolerance, detail }
    }

    fn failed(detail: String) -> Self {
        Self { status: Status::Fail, measured: f64::NAN, expected: f64::NAN, tolerance: f64::NAN, detail }
    }

    fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.status = Status::Fail;
            self.detail = format!("{why}; {}", self.detail);
        }
        self
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    /// Wall-clock budget in seconds, if any.
    pub budget: Option<f64>,
    pub run: fn() -> Check,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: "1", name: "unitary-recovery", budget: Some(5.0), run: unitary_recovery },
        Criterion { id: "2", name: "mes-zero-correction", budget: None, run: mes_zero_correction },
        Criterion { id: "3", name: "ohmic-perturbative-agreement", budget: None, run: ohmic_perturbative },
        Criterion { id: "4", name: "ohmic-supraohmic-hierarchy", budget: None, run: spectral_hierarchy },
        Criterion { id: "5", name: "boson-decoherence-free", budget: None, run: boson_dfs },
        Criterion { id: "6", name: "spin-decoherence-free", budget: None, run: spin_dfs },
        Criterion { id: "7", name: "spin-perturbative-agreement", budget: None, run: spin_perturbative },
        Criterion { id: "8", name: "concurrence-closed-forms", budget: Some(10.0), run: concurrence_oracle },
        Criterion { id: "9", name: "entropy-limits", budget: None, run: entropy_limits },
        Criterion { id: "10", name: "method-agreement", budget: Some(60.0), run: method_agreement },
        Criterion { id: "11", name: "antisymmetry", budget: None, run: antisymmetry },
        Criterion { id: "12", name: "phase-concurrence-ratio", budget: None, run: phase_concurrence },
        Criterion { id: "13", name: "spin-bath-size-scaling", budget: None, run: size_scaling },
        Criterion { id: "14", name: "winding-proportionality", budget: None, run: winding },
        Criterion { id: "R", name: "printed-mu-concurrence", budget: None, run: printed_mu_concurrence },
    ]
}

/// Runs every criterion whose id or name contains `filter`.
pub fn validate(filter: Option<&str>) -> Vec<Outcome> {
    criteria()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.id == f || c.name.contains(f)))
        .map(|c| run_one(&c))
        .collect()
}

pub fn run_one(c: &Criterion) -> Outcome {
    let start = Instant::now();
    let mut check = (c.run)();
    let seconds = start.elapsed().as_secs_f64();
    if let Some(budget) = c.budget {
        check = check.require(seconds < budget, &format!("exceeded the {budget} s budget"));
    }
    Outcome {
        id: c.id,
        name: c.name,
        status: check.status,
        measured: check.measured,
        expected: check.expected,
        tolerance: check.tolerance,
        detail: check.detail,
        seconds,
    }
}

/// True when nothing failed.
pub fn all_passed(outcomes: &[Outcome]) -> bool {
    outcomes.iter().all(|o| o.status != Status::Fail)
}

const CUTOFF: f64 = 100.0;

fn params() -> SystemParams {
    SystemParams::new(1.0, 0.0, 0.0).expect("valid parameters")
}

fn werner(p: f64, branch: Branch) -> WernerSpec {
    WernerSpec::new(1.0, p, branch).expect("valid Werner state")
}

fn ohmic(g: f64) -> EnvironmentSpec {
    EnvironmentSpec::Boson(BosonBathSpec::uniform(Spectral::Ohmic, g, CUTOFF).expect("valid bath"))
}

fn supraohmic(g: f64) -> EnvironmentSpec {
    EnvironmentSpec::Boson(BosonBathSpec::uniform(Spectral::Supraohmic, g, CUTOFF).expect("valid bath"))
}

fn spin_bath(n: usize, lambda_over_h: f64, eps_over_lambda: f64) -> EnvironmentSpec {
    let lam = lambda_over_h;
    EnvironmentSpec::Spin(SpinBathSpec::homogeneous(n, 1.0, eps_over_lambda * lam, lam).expect("valid bath"))
}

fn reduced_delta(spec: &WernerSpec, env: &EnvironmentSpec, n: u32) -> bipartite_gp::Result<f64> {
    let r = reduced_phase_for(spec, &params(), env, n)?;
    Ok(r.phi_total - r.phi_unitary)
}

fn kinematic_delta(spec: &WernerSpec, env: &EnvironmentSpec) -> bipartite_gp::Result<f64> {
    let r = kinematic_phase_werner(spec, &params(), env, 1, DEFAULT_POINTS_PER_CYCLE)?;
    Ok(r.phi_total - r.phi_unitary)
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m: f64, x: f64| if m.is_nan() || x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Collects a fallible parallel map, turning the first error into a failure.
fn collect<T: Send>(items: Vec<bipartite_gp::Result<T>>) -> Result<Vec<T>, Check> {
    items.into_iter().collect::<bipartite_gp::Result<Vec<T>>>().map_err(|e| Check::failed(e.to_string()))
}

macro_rules! try_check {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(c) => return c,
        }
    };
}

fn unitary_recovery() -> Check {
    let ps: Vec<f64> = (0..50).map(|k| k as f64 / 49.0).collect();
    let envs = [
        EnvironmentSpec::Closed,
        ohmic(0.0),
        supraohmic(0.0),
        EnvironmentSpec::Spin(SpinBathSpec::homogeneous(10, 1.0, 0.0, 0.0).expect("valid bath")),
    ];
    let cases: Vec<(f64, &EnvironmentSpec)> = ps.iter().flat_map(|&p| envs.iter().map(move |e| (p, e))).collect();
    let errs = try_check!(collect(
        cases
            .par_iter()
            .map(|&(p, env)| {
                let spec = werner(p, Branch::Theta);
                let target = TAU * (1.0 - p);
                let k = kinematic_phase_werner(&spec, &params(), env, 1, DEFAULT_POINTS_PER_CYCLE)?.phi_total;
                let r = reduced_phase_for(&spec, &params(), env, 1)?.phi_total;
                let s = unitary_phase(p, 1.0, 1)
                    + perturbative_phase(SeriesKind::OhmicFull, &SeriesArgs { p, ..SeriesArgs::default() });
                Ok([k - target, r - target, s - target])
            })
            .collect()
    ));
    let worst = |i: usize| max_abs(errs.iter().map(|e| e[i]));
    Check::deviation(
        max_abs((0..3).map(worst)),
        0.0,
        1e-6,
        format!(
            "{} cases; worst kinematic {:.1e}, reduced {:.1e}, perturbative {:.1e}",
            cases.len(),
            worst(0),
            worst(1),
            worst(2)
        ),
    )
}

fn mes_zero_correction() -> Check {
    let mut envs: Vec<(String, EnvironmentSpec)> = Vec::new();
    for g in [0.002, 0.01, 0.1] {
        envs.push((format!("ohmic {g}"), ohmic(g)));
        envs.push((format!("supraohmic {g}"), supraohmic(g)));
    }
    for n in [10, 100] {
        envs.push((format!("spin N={n}"), spin_bath(n, 0.1, 1.0)));
    }
    let spec = werner(0.5, Branch::Theta);
    let rows = try_check!(collect(
        envs.par_iter()
            .map(|(name, env)| Ok((name.clone(), kinematic_delta(&spec, env)?, reduced_delta(&spec, env, 1)?)))
            .collect()
    ));
    let (name, k, _) =
        rows.iter().max_by(|a, b| a.1.abs().max(a.2.abs()).total_cmp(&b.1.abs().max(b.2.abs()))).expect("non-empty");
    let worst = max_abs(rows.iter().flat_map(|r| [r.1, r.2]));
    Check::deviation(worst, 0.0, 1e-5, format!("{} environments; largest in {name} (kinematic {k:.1e})", rows.len()))
}

fn ohmic_perturbative() -> Check {
    let mut cases = Vec::new();
    for &g in &[0.0005, 0.001, 0.002] {
        for k in 1..10 {
            let p = k as f64 / 10.0;
            if g * p <= 1e-3 + 1e-15 && k != 5 {
                cases.push((p, g));
            }
        }
    }
    cases.push((0.25, 0.002));
    let rows = try_check!(collect(
        cases
            .par_iter()
            .map(|&(p, g)| {
                let exact = reduced_delta(&werner(p, Branch::Theta), &ohmic(g), 1)?;
                let series =
                    perturbative_phase(SeriesKind::OhmicApprox, &SeriesArgs { gamma0: g, p, ..SeriesArgs::default() });
                Ok((p, g, exact, series))
            })
            .collect()
    ));
    let rel: Vec<(f64, f64, f64)> =
        rows.iter().filter(|r| r.2.abs() > 1e-4).map(|&(p, g, e, s)| (p, g, (e - s).abs() / e.abs())).collect();
    let (wp, wg, worst) = rel.iter().copied().max_by(|a, b| a.2.total_cmp(&b.2)).unwrap_or((0.0, 0.0, 0.0));
    let anchor = rows.last().expect("anchor case");
    let within = rel.iter().filter(|r| r.2 <= 0.05).count();
    Check::deviation(
        worst,
        0.0,
        0.05,
        format!(
            "{within}/{} points within 5%; worst at p={wp}, gamma0={wg}; at p=0.25, gamma0=0.002 exact {:.5} vs series {:.5}",
            rel.len(),
            anchor.2,
            anchor.3
        ),
    )
}

fn spectral_hierarchy() -> Check {
    let ps: Vec<f64> = (0..20).map(|k| (k as f64 + 0.5) / 20.0).collect();
    let gs = [0.0005, 0.001, 0.002, 0.005, 0.01];
    let cases: Vec<(f64, f64)> = ps.iter().flat_map(|&p| gs.iter().map(move |&g| (p, g))).collect();
    let rows = try_check!(collect(
        cases
            .par_iter()
            .map(|&(p, g)| {
                let spec = werner(p, Branch::Theta);
                Ok((p, g, reduced_delta(&spec, &ohmic(g), 1)?, reduced_delta(&spec, &supraohmic(g), 1)?))
            })
            .collect()
    ));
    let violations = rows.iter().filter(|r| !(r.3.abs() < r.2.abs())).count();
    let target = 1.0 / (2.0 * ((TAU * CUTOFF).ln() - 1.0));
    // perturbative corner: weakest couplings, corrections still resolvable
    let ratios: Vec<f64> = rows.iter().filter(|r| r.1 <= 0.001 && r.2.abs() > 1e-4).map(|r| r.3 / r.2).collect();
    let worst = ratios
        .iter()
        .copied()
        .max_by(|a, b| (a / target - 1.0).abs().total_cmp(&(b / target - 1.0).abs()))
        .unwrap_or(f64::NAN);
    let series_ratio =
        perturbative_phase(
            SeriesKind::SupraohmicApprox,
            &SeriesArgs { gamma0: 1e-3, p: 0.25, ..SeriesArgs::default() },
        ) / perturbative_phase(SeriesKind::OhmicApprox, &SeriesArgs { gamma0: 1e-3, p: 0.25, ..SeriesArgs::default() });
    Check::deviation(
        worst,
        target,
        0.2 * target,
        format!(
            "{violations}/{} grid points violate |supra| < |ohmic|; exact supra/ohmic in the corner ranges {:.4}..{:.4} over {} points; series ratio {:.4}",
            rows.len(),
            ratios.iter().copied().fold(f64::INFINITY, f64::min),
            ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ratios.len(),
            series_ratio
        ),
    )
    .require(violations == 0, "hierarchy violated")
}

fn draws(seed: u64, n: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.gen_range(0.01..0.99), rng.gen_range(0.0005..0.1))).collect()
}

fn time_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / (n - 1) as f64).collect()
}

fn boson_dfs() -> Check {
    let cases = draws(2024, 10);
    let rows = try_check!(collect(
        cases
            .par_iter()
            .map(|&(p, g)| {
                let spec = werner(p, Branch::Mu);
                let env = ohmic(g);
                let delta = reduced_delta(&spec, &env, 1)?;
                let initial = InitialState::Werner(spec);
                let c0 = concurrence_wootters(&rho_at(&initial, &params(), &env, 0.0)?)?;
                let mut drift: f64 = 0.0;
                for t in time_grid(101) {
                    drift = drift.max((concurrence_wootters(&rho_at(&initial, &params(), &env, t)?)? - c0).abs());
                }
                Ok((delta, drift))
            })
            .collect()
    ));
    let phase = max_abs(rows.iter().map(|r| r.0));
    let drift = max_abs(rows.iter().map(|r| r.1));
    Check::deviation(
        phase,
        0.0,
        1e-9,
        format!("10 seeded draws; worst concurrence drift {drift:.1e} (tolerance 1e-10)"),
    )
    .require(drift <= 1e-10, "concurrence not constant")
}

fn spin_dfs() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spins: Vec<BathSpin> = (0..20)
        .map(|_| {
            let lam = rng.gen_range(0.05..0.5);
            BathSpin { h: rng.gen_range(0.5..1.5), eps: lam, lam }
        })
        .collect();
    let bath = SpinBathSpec::new(spins).expect("valid bath");
    let times: Vec<f64> = (0..200).map(|k| 0.37 * k as f64).collect();
    let p_exact = times.iter().all(|&t| p_factor(&bath, t).is_ok_and(|v| v == 1.0));
    let env = EnvironmentSpec::Spin(bath);
    let ps = [0.1, 0.25, 0.4, 0.6, 0.9];
    let rows = try_check!(collect(
        ps.par_iter()
            .map(|&p| {
                let spec = werner(p, Branch::Mu);
                let delta = reduced_delta(&spec, &env, 1)?;
                let mut c_err: f64 = 0.0;
                for t in time_grid(51) {
                    let c = concurrence_wootters(&rho_at(&InitialState::Werner(spec), &params(), &env, t)?)?;
                    c_err = c_err.max((c - 2.0 * (p * (1.0 - p)).sqrt()).abs());
                }
                Ok((delta, c_err))
            })
            .collect()
    ));
    let phase = max_abs(rows.iter().map(|r| r.0));
    let c_err = max_abs(rows.iter().map(|r| r.1));
    Check::deviation(
        phase,
        0.0,
        1e-9,
        format!("P(t) == 1 on 200 times: {p_exact}; worst concurrence error {c_err:.1e} (tolerance 1e-10)"),
    )
    .require(p_exact, "P(t) differs from 1")
    .require(c_err <= 1e-10, "concurrence differs from 2 sqrt(p(1-p))")
}

fn spin_perturbative() -> Check {
    let n = 100;
    let mut cases = Vec::new();
    for k in 1..=5 {
        let lh = 0.01 * k as f64;
        for j in 1..10 {
            if j != 5 {
                cases.push((j as f64 / 10.0, lh));
            }
        }
    }
    let rows = try_check!(collect(
        cases
            .par_iter()
            .map(|&(p, lh)| {
                let exact = reduced_delta(&werner(p, Branch::Theta), &spin_bath(n, lh, 1.0), 1)?;
                let series = perturbative_phase(
                    SeriesKind::SpinBath,
                    &SeriesArgs { p, lambda_over_h: lh, n_spins: n, ..SeriesArgs::default() },
                );
                Ok((p, lh, exact, series))
            })
            .collect()
    ));
    let rel: Vec<(f64, f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.2.abs() > 1e-4)
        .map(|&(p, lh, e, s)| (p, lh, (e - s).abs() / e.abs(), s / e))
        .collect();
    let worst = rel.iter().copied().max_by(|a, b| a.2.total_cmp(&b.2)).unwrap_or((0.0, 0.0, 0.0, 0.0));
    let ratio_min = rel.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let ratio_max = rel.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    Check::deviation(
        worst.2,
        0.0,
        0.1,
        format!(
            "{} points with |dphi| > 1e-4; worst at p={}, lambda/h={}; series/exact ranges {ratio_min:.3}..{ratio_max:.3}",
            rel.len(),
            worst.0,
            worst.1
        ),
    )
}

fn concurrence_oracle() -> Check {
    let ps: Vec<f64> = (1..=10).map(|k| k as f64 / 11.0).collect();
    let ts: Vec<f64> = (1..=10).map(|k| TAU * k as f64 / 10.0).collect();
    let gs: Vec<f64> = (1..=10).map(|k| 0.01 * k as f64).collect();
    let ls: Vec<f64> = (1..=10).map(|k| 0.01 * k as f64).collect();
    let mut cases: Vec<(f64, EnvironmentSpec)> = Vec::new();
    for &p in &ps {
        for &g in &gs {
            cases.push((p, ohmic(g)));
        }
        for &l in &ls {
            cases.push((p, spin_bath(10, l, 1.0)));
        }
    }
    let errs = try_check!(collect(
        cases
            .par_iter()
            .map(|(p, env)| {
                let spec = werner(*p, Branch::Theta);
                let mut worst: f64 = 0.0;
                for &t in &ts {
                    let c = concurrence_wootters(&rho_at(&InitialState::Werner(spec), &params(), env, t)?)?;
                    worst = worst.max((c - concurrence_closed(&spec, env, t)?).abs());
                }
                Ok(worst)
            })
            .collect()
    ));
    // cases alternate in blocks of ten: bosonic, then spin
    let boson = max_abs(errs.iter().enumerate().filter(|(i, _)| i % 20 < 10).map(|(_, e)| *e));
    let spin = max_abs(errs.iter().enumerate().filter(|(i, _)| i % 20 >= 10).map(|(_, e)| *e));
    Check::deviation(
        boson.max(spin),
        0.0,
        1e-10,
        format!("{} evaluations; worst boson {boson:.1e}, spin {spin:.1e}", errs.len() * ts.len()),
    )
}

fn entropy_limits() -> Check {
    let spec = werner(0.5, Branch::Theta);
    let initial = InitialState::Werner(spec);
    // strong ohmic damping drives the coherence factor to ~1e-24 within a cycle
    let env = ohmic(0.5);
    let t = TAU;
    let damping = match &env {
        EnvironmentSpec::Boson(b) => boson_factors(b, t).map(|f| f.theta_damping()).unwrap_or(f64::NAN),
        _ => unreachable!(),
    };
    let dephased = try_check!(rho_at(&initial, &params(), &env, t)
        .and_then(|r| linear_entropy(&r))
        .map_err(|e| Check::failed(e.to_string())));

    let mut pure_worst: f64 = 0.0;
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        for branch in [Branch::Theta, Branch::Mu] {
            let init = InitialState::Werner(werner(p, branch));
            for &t in &[0.0, 1.3, TAU] {
                let s = try_check!(rho_at(&init, &params(), &EnvironmentSpec::Closed, t)
                    .and_then(|r| linear_entropy(&r))
                    .map_err(|e| Check::failed(e.to_string())));
                pure_worst = pure_worst.max(s);
            }
        }
    }
    let psi = GeneralInitialState::new(C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(-0.5, 0.0), C64::new(0.3, 0.4))
        .expect("normalized");
    for &t in &[0.0, 0.7, 2.9] {
        let s = try_check!(rho_at(&InitialState::Pure(psi), &params(), &EnvironmentSpec::Closed, t)
            .and_then(|r| linear_entropy(&r))
            .map_err(|e| Check::failed(e.to_string())));
        pure_worst = pure_worst.max(s);
    }
    Check::deviation(
        dephased,
        1.0,
        1e-6,
        format!("coherence factor {damping:.1e}; worst pure-state entropy {pure_worst:.1e} (tolerance 1e-10)"),
    )
    .require(pure_worst < 1e-10, "pure-state entropy too large")
}

fn agreement_cases() -> Vec<(String, f64, WernerSpec, EnvironmentSpec)> {
    let ps: Vec<f64> = (0..10).map(|k| 0.05 + 0.1 * k as f64).collect();
    let gs = [0.0005, 0.001, 0.002, 0.005, 0.01];
    let ls = [0.02, 0.04, 0.06, 0.08, 0.1];
    let mut cases = Vec::new();
    for &p in &ps {
        for (&g, &l) in gs.iter().zip(&ls) {
            cases.push(("boson theta".to_string(), g, werner(p, Branch::Theta), ohmic(g)));
            let unequal = BosonBathSpec::new(Spectral::Ohmic, g, 0.5 * g, 0.3 * g, CUTOFF).expect("valid bath");
            cases.push(("boson mu".to_string(), g, werner(p, Branch::Mu), EnvironmentSpec::Boson(unequal)));
            cases.push(("spin theta".to_string(), l, werner(p, Branch::Theta), spin_bath(10, l, 0.5)));
            cases.push(("spin mu".to_string(), l, werner(p, Branch::Mu), spin_bath(10, l, 0.5)));
        }
    }
    cases
}

fn method_agreement() -> Check {
    let cases = agreement_cases();
    let rows = try_check!(collect(
        cases
            .par_iter()
            .map(|(label, c, spec, env)| {
                let k = kinematic_delta(spec, env)?;
                let r = reduced_delta(spec, env, 1)?;
                Ok((label.as_str(), spec.p, *c, (k - r).abs(), r))
            })
            .collect()
    ));
    let worst = rows.iter().max_by(|a, b| a.3.total_cmp(&b.3)).expect("non-empty");
    let largest = max_abs(rows.iter().map(|r| r.4));
    Check::deviation(
        worst.3,
        0.0,
        1e-5,
        format!(
            "{} cases; worst in {} at p={:.2}, coupling={}; largest |dphi| {largest:.3}",
            rows.len(),
            worst.0,
            worst.1,
            worst.2
        ),
    )
}

fn antisymmetry() -> Check {
    let kinds = [
        SeriesKind::OhmicFull,
        SeriesKind::OhmicApprox,
        SeriesKind::SupraohmicFull,
        SeriesKind::SupraohmicApprox,
        SeriesKind::SpinBath,
    ];
    let mut series_worst: f64 = 0.0;
    for kind in kinds {
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let args = SeriesArgs { gamma0: 0.01, p, lambda_over_h: 0.05, n_spins: 100, ..SeriesArgs::default() };
            let a = perturbative_phase(kind, &args);
            let b = perturbative_phase(kind, &SeriesArgs { p: 1.0 - p, ..args });
            let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            series_worst = series_worst.max((a + b).abs() / scale);
        }
    }
    // exact corrections on the method-agreement grid (ohmic, Theta)
    let ps: Vec<f64> = (0..5).map(|k| 0.05 + 0.1 * k as f64).collect();
    let gs = [0.0005, 0.001, 0.002, 0.005, 0.01];
    let cases: Vec<(f64, f64)> = ps.iter().flat_map(|&p| gs.iter().map(move |&g| (p, g))).collect();
    let rows = try_check!(collect(
        cases
            .par_iter()
            .map(|&(p, g)| {
                let a = reduced_delta(&werner(p, Branch::Theta), &ohmic(g), 1)?;
                let b = reduced_delta(&werner(1.0 - p, Branch::Theta), &ohmic(g), 1)?;
                Ok(((a + b).abs(), 10.0 * g * g * p * (1.0 - p)))
            })
            .collect()
    ));
    let outside = rows.iter().filter(|r| r.0 > r.1).count();
    let worst_ratio = rows.iter().map(|r| r.0 / r.1).fold(0.0, f64::max);
    // antisymmetry of the series is exact up to rounding in p(1-3p+2p^2)
    Check::deviation(
        series_worst,
        0.0,
        1e-13,
        format!(
            "exact sum within 10 gamma0^2 p(1-p) at {}/{} points (largest sum/bound {worst_ratio:.2}){}",
            rows.len() - outside,
            rows.len(),
            if outside > 0 { "; finding, not a failure" } else { "" }
        ),
    )
}

fn phase_concurrence() -> Check {
    let mut worst: f64 = 0.0;
    for k in 1..=20 {
        let p = k as f64 / 21.0;
        let spec = werner(p, Branch::Theta);
        let phase =
            try_check!(reduced_phase_for(&spec, &params(), &EnvironmentSpec::Closed, 1)
                .map_err(|e| Check::failed(e.to_string())));
        let c = try_check!(rho_at(&InitialState::Werner(spec), &params(), &EnvironmentSpec::Closed, TAU)
            .and_then(|r| concurrence_wootters(&r))
            .map_err(|e| Check::failed(e.to_string())));
        let ratio = try_check!(phase_concurrence_ratio(p).map_err(|e| Check::failed(e.to_string())));
        worst = worst.max((phase.phi_total / c - ratio).abs());
    }
    Check::deviation(worst, 0.0, 1e-9, "20 values of p, closed system".into())
}

fn size_scaling() -> Check {
    let sizes = [16usize, 64, 256, 1024];
    let t_end = 100.0;
    let samples = 100_000;
    let mut points = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let bath = try_check!(SpinBathSpec::random(n, (0.8, 1.2), (0.3, 0.7), (0.3, 0.7), 1000 + i as u64)
            .map_err(|e| Check::failed(e.to_string())));
        let avg = try_check!(time_averaged_abs_q(&bath, t_end, samples).map_err(|e| Check::failed(e.to_string())));
        points.push(((n as f64).ln(), avg.ln()));
    }
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = num / den;
    let avgs: Vec<String> = points.iter().map(|p| format!("{:.3e}", p.1.exp())).collect();
    Check::deviation(slope, -0.5, 0.15, format!("mean |Q| over [0, 100/h] for N = 16..1024: {}", avgs.join(", ")))
}

fn winding() -> Check {
    let kinds = [
        SeriesKind::OhmicFull,
        SeriesKind::OhmicApprox,
        SeriesKind::SupraohmicFull,
        SeriesKind::SupraohmicApprox,
        SeriesKind::SpinBath,
    ];
    let mut exact_linear = true;
    for kind in kinds {
        let args = SeriesArgs { gamma0: 0.002, p: 0.25, lambda_over_h: 0.05, n_spins: 100, ..SeriesArgs::default() };
        let single = perturbative_phase(kind, &args);
        for n in 1..=3u32 {
            exact_linear &= perturbative_phase(kind, &SeriesArgs { winding: n, ..args }) == n as f64 * single;
        }
    }
    let spec = werner(0.25, Branch::Theta);
    let mut deltas = Vec::new();
    for n in 1..=3 {
        deltas.push(try_check!(reduced_delta(&spec, &ohmic(0.002), n).map_err(|e| Check::failed(e.to_string()))));
    }
    let monotone = deltas.windows(2).all(|w| w[1].abs() > w[0].abs());
    let ratio = deltas[2] / deltas[0];
    Check {
        status: if exact_linear && monotone { Status::Pass } else { Status::Fail },
        measured: ratio,
        expected: 3.0,
        tolerance: f64::NAN,
        detail: format!(
            "series n-linear: {exact_linear}; exact dphi for n = 1, 2, 3: {:.5}, {:.5}, {:.5} (monotone: {monotone})",
            deltas[0], deltas[1], deltas[2]
        ),
    }
}

fn printed_mu_concurrence() -> Check {
    let mut worst: f64 = 0.0;
    let mut worst_p = 0.0;
    for k in 1..20 {
        let p = k as f64 / 20.0;
        let d = (concurrence_mu_boson_printed(p) - coherence_concurrence(p, 1.0)).abs();
        if d > worst {
            worst = d;
            worst_p = p;
        }
    }
    Check {
        status: Status::Report,
        measured: worst,
        expected: 0.0,
        tolerance: f64::NAN,
        detail: format!(
            "printed closed form vs Wootters for the Mu branch; agrees for p <= 1/2, largest gap at p = {worst_p}"
        ),
    }
}

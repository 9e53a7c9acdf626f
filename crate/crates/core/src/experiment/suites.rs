//! Verification suites. Defaults reproduce the acceptance settings; every
//! parameter can be overridden from the `params` object of a verify config.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CheckRecord, RunReport};
use crate::caratheodory::{
    disk_family, disk_schwarz_checks, harmonic_gradient_check, stochastic_caratheodory_grid, HarmonicFunction,
    HolomorphicTestFunction,
};
use crate::comparison::{absorption_probability, coupling_failure_bound, wang_bound, ComparisonDiffusion1D};
use crate::coupling::{
    estimate_absorption_survival, estimate_expectation_grid, estimate_exit_event, estimate_survival,
    joint_matrix_psd_probe, synchronous_square_distance_drift, CouplingStrategy, PairFunctional,
};
use crate::error::{invalid, Result};
use crate::geometry::{chc2_diffusion_matrix, BallPoint4, CurvatureProfile, DiskPoint};
use crate::sde::{ComplexHyperbolicBm, DiffusionSpec, PoincareDiskBm, StepPlan};

const MARTINGALE: &str = "Since f is harmonic";
const INDICATOR: &str = "indicator function of the event";
const SCHWARZ: &str = "Stochastic Schwarz lemma on a disk";
const ROTATION: &str = "must be a rotation";
const GRADIENT: &str = "Gradient estimates for harmonic functions";
const NOT_SUCCESSFUL: &str = "then the coupling is not successful";
const NON_NEGATIVE: &str = "must be non-negative definite";
const READILY: &str = "It is readily checked that";
const DEGENERATE: &str = "gets closer to being degenerate";
const SCALE: &str = "By passing";
const WANG: &str = "We need the following lemma to estimate";
const DOMINANCE: &str = "Thus by a comparison theorem it follows that";
const EXIT: &str = "is the geodesic distance of";
const FAILURE: &str = "Kendall-Cranston coupling";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "disk_schwarz")]
    DiskSchwarz,
    #[serde(rename = "caratheodory")]
    Caratheodory,
    #[serde(rename = "h2c_prop72")]
    H2cProp72,
    #[serde(rename = "comparison_1d")]
    Comparison1d,
    #[serde(rename = "psd_probe")]
    PsdProbe,
    #[serde(rename = "martingale")]
    Martingale,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Self::DiskSchwarz,
        Self::Caratheodory,
        Self::H2cProp72,
        Self::Comparison1d,
        Self::PsdProbe,
        Self::Martingale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DiskSchwarz => "disk_schwarz",
            Self::Caratheodory => "caratheodory",
            Self::H2cProp72 => "h2c_prop72",
            Self::Comparison1d => "comparison_1d",
            Self::PsdProbe => "psd_probe",
            Self::Martingale => "martingale",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

fn max_time(t_grid: &[f64]) -> Result<f64> {
    t_grid
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))))
        .ok_or_else(|| invalid("t_grid", "must not be empty"))
}

fn diff_of(f: HolomorphicTestFunction) -> impl Fn(&[f64; 2], &[f64; 2]) -> Complex64 + Sync {
    move |a, b| f.evaluate(a).unwrap_or_default() - f.evaluate(b).unwrap_or_default()
}

fn disk_point(p: [f64; 2]) -> Result<DiskPoint> {
    DiskPoint::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MartingaleParams {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t_grid: Vec<f64>,
    pub strategies: Vec<CouplingStrategy>,
    /// Center of the Möbius test function.
    pub moebius_center: [f64; 2],
    pub n_paths: usize,
    pub dt: f64,
    pub eps_couple: f64,
}

impl Default for MartingaleParams {
    fn default() -> Self {
        Self {
            x: [0.5, 0.0],
            y: [0.0, 0.0],
            t_grid: vec![0.25, 0.5, 1.0, 2.0],
            strategies: CouplingStrategy::ALL.to_vec(),
            moebius_center: [0.3, 0.0],
            n_paths: 20_000,
            dt: 1e-3,
            eps_couple: 1e-3,
        }
    }
}

pub(super) fn martingale(p: &MartingaleParams, seed: u64, report: &mut RunReport) -> Result<()> {
    disk_point(p.x)?;
    disk_point(p.y)?;
    let plan = StepPlan::new(p.dt, max_time(&p.t_grid)?)?;
    let functions = [
        ("z", HolomorphicTestFunction::Moebius { a: [0.0, 0.0] }),
        ("z^2", HolomorphicTestFunction::Power { a: [0.0, 0.0], k: 2 }),
        ("moebius", HolomorphicTestFunction::Moebius { a: p.moebius_center }),
    ];
    let diffs: Vec<_> = functions.iter().map(|(_, f)| diff_of(*f)).collect();
    let refs: Vec<PairFunctional<'_, 2>> = diffs.iter().map(|d| d as PairFunctional<'_, 2>).collect();
    for &strategy in &p.strategies {
        let grid = estimate_expectation_grid(&PoincareDiskBm, strategy, p.x, p.y, &plan, p.eps_couple, &p.t_grid, &refs, p.n_paths, seed)?;
        let mut max_gap = 0.0f64;
        for ((label, f), rows) in functions.iter().zip(&grid.estimates) {
            let exact = f.evaluate(&p.x)? - f.evaluate(&p.y)?;
            for e in rows {
                let err = (e.unweighted.point() - exact).norm();
                let se = e.unweighted.se();
                report.checks.push(
                    CheckRecord::new(format!("martingale/{}/{label}/t={}", strategy.name(), e.t), MARTINGALE, err)
                        .se(se)
                        .bound(3.0 * se)
                        .pass_if(err <= 3.0 * se),
                );
                max_gap = max_gap.max((e.weighted.point() - e.unweighted.point()).norm());
            }
        }
        report.checks.push(
            CheckRecord::new(format!("martingale/{}/indicator_weighting", strategy.name()), INDICATOR, max_gap)
                .bound(1e-15)
                .pass_if(max_gap <= 1e-15),
        );
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaratheodoryParams {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t_grid: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub eps_couple: f64,
    /// Rotations of the extremal automorphism in the test family.
    pub n_phases: usize,
    /// Highest power of the extremal automorphism in the test family.
    pub max_power: u32,
    /// Paths for the synchronous and independent slack comparison.
    pub other_paths: usize,
    /// Ball radius parameter of the exit-event estimate (hyperbolic).
    pub exit_delta: f64,
    /// Hyperbolic distance of the exit-event start pair, placed
    /// symmetrically about the origin.
    pub exit_distance: f64,
    pub exit_t_max: f64,
    pub exit_paths: usize,
}

impl Default for CaratheodoryParams {
    fn default() -> Self {
        Self {
            x: [0.5, 0.0],
            y: [0.0, 0.0],
            t_grid: vec![0.5, 1.0, 2.0, 4.0],
            n_paths: 20_000,
            dt: 1e-3,
            eps_couple: 1e-3,
            n_phases: 8,
            max_power: 3,
            other_paths: 5_000,
            exit_delta: 0.5,
            exit_distance: 0.1,
            exit_t_max: 10.0,
            exit_paths: 5_000,
        }
    }
}

pub(super) fn caratheodory(p: &CaratheodoryParams, seed: u64, report: &mut RunReport) -> Result<()> {
    disk_point(p.x)?;
    let y = disk_point(p.y)?;
    let plan = StepPlan::new(p.dt, max_time(&p.t_grid)?)?;
    let family = disk_family(y, p.n_phases, p.max_power);
    let mirror = stochastic_caratheodory_grid(&PoincareDiskBm, CouplingStrategy::Mirror, p.x, p.y, &p.t_grid, &family, &plan, p.eps_couple, p.n_paths, seed)?;
    let mut mirror_slack = Vec::new();
    for r in &mirror {
        let se = r.survival.se;
        report.checks.push(
            CheckRecord::new(format!("caratheodory/mirror/survival_bound/t={}", r.t), INDICATOR, r.survival_bound)
                .se(2.0 * se)
                .interval(2.0 * r.survival.interval.0, 2.0 * r.survival.interval.1)
                .bound(r.closed_form)
                .pass_if(r.closed_form <= r.survival_bound + 3.0 * se),
        );
        let e = r.stochastic_estimate;
        report.checks.push(
            CheckRecord::new(format!("caratheodory/mirror/family_sup/t={}", r.t), INDICATOR, e.point)
                .se(e.se)
                .interval(e.interval.0, e.interval.1)
                .bound(r.closed_form)
                .pass_if((e.point - r.closed_form).abs() <= 3.0 * e.se),
        );
        mirror_slack.push((r.survival_bound - r.closed_form, 2.0 * se));
    }

    let closed = mirror.first().map_or(0.0, |r| r.closed_form);
    for strategy in [CouplingStrategy::Synchronous, CouplingStrategy::Independent] {
        let curve = estimate_survival(&PoincareDiskBm, strategy, p.x, p.y, &plan, p.eps_couple, &p.t_grid, p.other_paths, seed)?;
        for ((t, e), ms) in curve.t.iter().zip(&curve.estimates).zip(&mirror_slack) {
            let slack = 2.0 * e.point - closed;
            report.checks.push(
                CheckRecord::new(format!("caratheodory/{}/survival_bound/t={t}", strategy.name()), INDICATOR, 2.0 * e.point)
                    .se(2.0 * e.se)
                    .bound(closed)
                    .pass_if(closed <= 2.0 * e.point + 3.0 * e.se),
            );
            let (ms, ms_se) = *ms;
            let joint = ms_se.hypot(2.0 * e.se);
            report.checks.push(
                CheckRecord::new(format!("caratheodory/{}/slack_minus_mirror_slack/t={t}", strategy.name()), INDICATOR, slack - ms)
                    .se(joint)
                    .bound(0.0)
                    .pass_if(slack - ms >= -3.0 * joint),
            );
        }
    }

    // Exit event from a small symmetric pair: fitted constant only.
    let a = (p.exit_distance / 4.0).tanh();
    let exit_plan = StepPlan::new(p.dt, p.exit_t_max)?;
    let e = estimate_exit_event(
        &PoincareDiskBm,
        CouplingStrategy::Mirror,
        [a, 0.0],
        [-a, 0.0],
        [0.0, 0.0],
        p.exit_delta,
        &exit_plan,
        p.eps_couple,
        p.exit_paths,
        seed,
    )?;
    report.checks.push(CheckRecord::new("exit_event/mirror/probability", EXIT, e.point).se(e.se).interval(e.interval.0, e.interval.1));
    report.checks.push(CheckRecord::new(
        "exit_event/mirror/fitted_constant",
        EXIT,
        e.point / ((1.0 / p.exit_delta + 1.0) * p.exit_distance),
    ));

    if let (Some(last), Some(t_last)) = (mirror.last(), p.t_grid.last()) {
        let rho = 2.0 * closed.atanh();
        let bound = coupling_failure_bound(&CurvatureProfile::unit_disk(), rho)?.value;
        report.checks.push(
            CheckRecord::new(format!("coupling_failure/mirror/t={t_last}"), FAILURE, last.survival.point)
                .se(last.survival.se)
                .bound(bound),
        );
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiskSchwarzParams {
    pub xs: Vec<f64>,
    pub t: f64,
    pub strategy: CouplingStrategy,
    pub rotation_phase: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub eps_couple: f64,
    /// Radii and number of angles of the gradient-bound sweep.
    pub gradient_radii: Vec<f64>,
    pub gradient_angles: usize,
}

impl Default for DiskSchwarzParams {
    fn default() -> Self {
        Self {
            xs: vec![0.3, 0.5, 0.7],
            t: 1.0,
            strategy: CouplingStrategy::Mirror,
            rotation_phase: 0.7,
            n_paths: 20_000,
            dt: 1e-3,
            eps_couple: 1e-3,
            gradient_radii: vec![0.0, 0.3, 0.6, 0.9],
            gradient_angles: 8,
        }
    }
}

pub(super) fn disk_schwarz(p: &DiskSchwarzParams, seed: u64, report: &mut RunReport) -> Result<()> {
    let plan = StepPlan::new(p.dt, p.t)?;
    let fs = [
        HolomorphicTestFunction::Power { a: [0.0, 0.0], k: 2 },
        HolomorphicTestFunction::RotatedMoebius { a: [0.0, 0.0], phase: p.rotation_phase },
        HolomorphicTestFunction::Moebius { a: [0.0, 0.0] },
    ];
    for &x in &p.xs {
        let checks = disk_schwarz_checks(&fs, disk_point([x, 0.0])?, p.t, p.strategy, &plan, p.eps_couple, p.n_paths, seed)?;
        let s = p.strategy.name();
        let sq = &checks[0];
        report.checks.push(
            CheckRecord::new(format!("schwarz/{s}/z^2/x={x}"), SCHWARZ, sq.lhs)
                .se(sq.combined_se)
                .bound(sq.rhs)
                .pass_if(sq.holds),
        );
        let rot = &checks[1];
        let gap = (rot.lhs - rot.rhs).abs();
        report.checks.push(
            CheckRecord::new(format!("schwarz/{s}/rotation/x={x}"), ROTATION, gap)
                .se(rot.combined_se)
                .bound(3.0 * rot.combined_se)
                .pass_if(gap <= 3.0 * rot.combined_se),
        );
        let id = &checks[2];
        report.checks.push(
            CheckRecord::new(format!("schwarz/{s}/identity/x={x}"), ROTATION, (id.lhs - id.rhs).abs())
                .bound(0.0)
                .pass_if(id.lhs == id.rhs),
        );
    }

    let profile = CurvatureProfile::unit_disk();
    let g = harmonic_gradient_check(&HarmonicFunction::RealPart, DiskPoint::ORIGIN, &profile)?;
    report.checks.push(
        CheckRecord::new("gradient/real_part/origin", GRADIENT, g.grad_norm)
            .bound(g.bound)
            .pass_if(g.holds && (g.grad_norm - 0.5).abs() <= 1e-8),
    );
    let arc = HarmonicFunction::ArcMeasure { start: 0.0, end: std::f64::consts::PI };
    let mut worst = 0.0f64;
    let mut all = true;
    let mut bound = 0.0;
    for &r in &p.gradient_radii {
        let n_ang = if r == 0.0 { 1 } else { p.gradient_angles.max(1) };
        for j in 0..n_ang {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / n_ang as f64);
            let g = harmonic_gradient_check(&arc, DiskPoint::from_complex(z)?, &profile)?;
            worst = worst.max(g.grad_norm);
            all &= g.holds;
            bound = g.bound;
        }
    }
    report.checks.push(CheckRecord::new("gradient/half_circle_measure/sweep_max", GRADIENT, worst).bound(bound).pass_if(all));
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct H2cParams {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub t: f64,
    pub strategies: Vec<CouplingStrategy>,
    pub n_paths: usize,
    pub dt: f64,
    pub eps_couple: f64,
}

impl Default for H2cParams {
    fn default() -> Self {
        Self {
            x: [0.3, 0.0, 0.0, 0.0],
            y: [-0.3, 0.0, 0.0, 0.0],
            t: 10.0,
            strategies: vec![CouplingStrategy::Synchronous, CouplingStrategy::Independent],
            n_paths: 20_000,
            dt: 2.5e-4,
            eps_couple: 5e-3,
        }
    }
}

pub(super) fn h2c_failure(p: &H2cParams, seed: u64, report: &mut RunReport) -> Result<()> {
    BallPoint4::new(p.x)?;
    BallPoint4::new(p.y)?;
    let rho = ComplexHyperbolicBm.distance(&p.x, &p.y);
    let bound = rho * rho / 4.0;
    if rho == 0.0 {
        report.warnings.push("start points coincide: the lower bound is zero and the check is vacuous".into());
        for s in &p.strategies {
            report.checks.push(CheckRecord::new(format!("h2c_failure/{}/vacuous", s.name()), NOT_SUCCESSFUL, 0.0).bound(0.0).pass_if(true));
        }
        return Ok(());
    }
    let plan = StepPlan::new(p.dt, p.t)?;
    for &strategy in &p.strategies {
        let curve = estimate_survival(&ComplexHyperbolicBm, strategy, p.x, p.y, &plan, p.eps_couple, &[p.t], p.n_paths, seed)?;
        let e = curve.estimates[0];
        report.checks.push(
            CheckRecord::new(format!("h2c_failure/{}/survival/t={}", strategy.name(), p.t), NOT_SUCCESSFUL, e.point)
                .se(e.se)
                .interval(e.interval.0, e.interval.1)
                .bound(bound)
                .pass_if(e.point >= bound - 3.0 * e.se),
        );
        report.checks.push(CheckRecord::new(
            format!("h2c_failure/{}/boundary_censored_fraction", strategy.name()),
            DEGENERATE,
            curve.domain_exits as f64 / p.n_paths as f64,
        ));
        if curve.domain_exits > 0 {
            report.warnings.push(format!(
                "{}: {} of {} paths reached the chart boundary before coupling and were censored as uncoupled",
                strategy.name(),
                curve.domain_exits,
                p.n_paths
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DominanceParams {
    /// Hyperbolic distance of the disk start pair.
    pub rho0: f64,
    pub t_grid: Vec<f64>,
    pub b: f64,
    pub sigma2: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub eps_couple: f64,
}

impl Default for DominanceParams {
    fn default() -> Self {
        Self {
            rho0: 0.6,
            t_grid: vec![0.5, 1.0, 2.0],
            b: 2.0,
            sigma2: 2.0,
            n_paths: 20_000,
            dt: 1e-3,
            eps_couple: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Comparison1dParams {
    pub b: f64,
    pub sigma2: f64,
    pub r0: f64,
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    /// Paths above this level stop as survivors.
    pub escape_level: Option<f64>,
    pub tolerance: f64,
    /// Times at which the survival curve is compared with the finite-time bound.
    pub bound_times: Vec<f64>,
    pub dominance: DominanceParams,
}

impl Default for Comparison1dParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            sigma2: 2.0,
            r0: 0.5,
            dt: 1e-3,
            t_max: 50.0,
            n_paths: 100_000,
            escape_level: Some(20.0),
            tolerance: 0.015,
            bound_times: vec![0.5, 1.0, 2.0, 5.0],
            dominance: DominanceParams::default(),
        }
    }
}

pub(super) fn comparison_1d(p: &Comparison1dParams, seed: u64, report: &mut RunReport) -> Result<()> {
    let process = ComparisonDiffusion1D::constant(p.b, p.sigma2, p.r0)?;
    let plan = StepPlan::new(p.dt, p.t_max)?;
    let mut grid: Vec<f64> = p.bound_times.iter().copied().filter(|&t| t < p.t_max).collect();
    grid.push(p.t_max);
    let curve = estimate_absorption_survival(&process, &plan, &grid, p.n_paths, seed, p.escape_level)?;
    let oracle = 1.0 - absorption_probability(p.b, p.sigma2, p.r0)?;
    let last = *curve.estimates.last().expect("grid is not empty");
    report.checks.push(
        CheckRecord::new(format!("comparison_1d/survival/t={}", p.t_max), SCALE, last.point)
            .se(last.se)
            .interval(last.interval.0, last.interval.1)
            .bound(oracle)
            .pass_if((last.point - oracle).abs() <= p.tolerance),
    );
    report.checks.push(
        CheckRecord::new(format!("comparison_1d/absorbed/t={}", p.t_max), SCALE, 1.0 - last.point)
            .se(last.se)
            .bound(1.0 - oracle)
            .pass_if((last.point - oracle).abs() <= p.tolerance),
    );

    let a = p.sigma2 / 2.0;
    let limit = wang_bound(a, p.b, p.r0, f64::INFINITY)?;
    report.checks.push(
        CheckRecord::new("comparison_1d/bound_limit_matches_scale_function", WANG, limit)
            .bound(oracle)
            .pass_if((limit - oracle).abs() <= 1e-9),
    );
    for (t, e) in curve.t.iter().zip(&curve.estimates) {
        let w = wang_bound(a, p.b, p.r0, *t)?;
        report.checks.push(
            CheckRecord::new(format!("comparison_1d/survival_below_bound/t={t}"), WANG, e.point)
                .se(e.se)
                .bound(w)
                .pass_if(e.point <= w + 3.0 * e.se),
        );
    }

    let d = &p.dominance;
    let x0 = [(d.rho0 / 2.0).tanh(), 0.0];
    let disk_plan = StepPlan::new(d.dt, max_time(&d.t_grid)?)?;
    let disk = estimate_survival(&PoincareDiskBm, CouplingStrategy::Mirror, x0, [0.0, 0.0], &disk_plan, d.eps_couple, &d.t_grid, d.n_paths, seed)?;
    let cmp = ComparisonDiffusion1D::constant(d.b, d.sigma2, d.rho0)?;
    let line = estimate_absorption_survival(&cmp, &disk_plan, &d.t_grid, d.n_paths, seed ^ 0x5eed, None)?;
    for ((t, de), le) in d.t_grid.iter().zip(&disk.estimates).zip(&line.estimates) {
        let joint = de.se.hypot(le.se);
        report.checks.push(
            CheckRecord::new(format!("dominance/mirror/t={t}"), DOMINANCE, de.point)
                .se(joint)
                .bound(le.point)
                .pass_if(de.point <= le.point + 3.0 * joint),
        );
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdParams {
    pub n_points: usize,
    /// Sampled points lie within this Euclidean radius.
    pub max_radius: f64,
    pub drift_x: [f64; 4],
    pub drift_y: [f64; 4],
    pub drift_dt: f64,
    pub drift_horizon: f64,
    pub drift_fit_points: usize,
    pub drift_paths: usize,
    pub drift_rel_tol: f64,
}

impl Default for PsdParams {
    fn default() -> Self {
        Self {
            n_points: 1_000,
            max_radius: 0.95,
            drift_x: [0.5, 0.0, 0.0, 0.0],
            drift_y: [0.0, 0.0, 0.5, 0.0],
            drift_dt: 1e-4,
            drift_horizon: 0.01,
            drift_fit_points: 10,
            drift_paths: 20_000,
            drift_rel_tol: 0.1,
        }
    }
}

fn ball_sample<const D: usize>(rng: &mut ChaCha8Rng, max_radius: f64) -> [f64; D] {
    let g: [f64; D] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let r = max_radius * u.powf(1.0 / D as f64);
    std::array::from_fn(|i| g[i] / norm * r)
}

pub(super) fn psd_probe(p: &PsdParams, seed: u64, report: &mut RunReport) -> Result<()> {
    if !(p.max_radius > 0.0 && p.max_radius < 1.0) {
        return Err(invalid("max_radius", "must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 4]> = (0..p.n_points).map(|_| ball_sample::<4>(&mut rng, p.max_radius)).collect();

    let (mut asym, mut eig_err) = (0.0f64, 0.0f64);
    for x in &points {
        let a = chc2_diffusion_matrix(BallPoint4::new(*x)?);
        let m = Matrix4::from_fn(|i, j| a[i][j]);
        asym = asym.max((m - m.transpose()).abs().max());
        let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let s = 1.0 - x.iter().map(|v| v * v).sum::<f64>();
        let mut want = [2.0 * s, 2.0 * s, 2.0 * s.sqrt(), 2.0 * s.sqrt()];
        want.sort_by(f64::total_cmp);
        for (g, w) in eig.iter().zip(want) {
            eig_err = eig_err.max((g - w).abs());
        }
    }
    report.checks.push(CheckRecord::new("psd/h2c/diffusion_symmetry", DEGENERATE, asym).bound(1e-14).pass_if(asym <= 1e-14));
    report.checks.push(CheckRecord::new("psd/h2c/eigenvalue_multiset", DEGENERATE, eig_err).bound(1e-10).pass_if(eig_err <= 1e-10));

    let h2c_pairs: Vec<([f64; 4], [f64; 4])> =
        (0..p.n_points).map(|_| (ball_sample::<4>(&mut rng, p.max_radius), ball_sample::<4>(&mut rng, p.max_radius))).collect();
    for strategy in [CouplingStrategy::Synchronous, CouplingStrategy::Independent] {
        let r = joint_matrix_psd_probe(&ComplexHyperbolicBm, strategy, &h2c_pairs)?;
        report.checks.push(
            CheckRecord::new(format!("psd/h2c/{}/joint_min_eigenvalue", strategy.name()), NON_NEGATIVE, r.min_eig_joint)
                .bound(-1e-9)
                .pass_if(r.min_eig_joint >= -1e-9),
        );
        report.checks.push(CheckRecord::new(format!("psd/h2c/{}/hat_min_eigenvalue", strategy.name()), NON_NEGATIVE, r.min_eig_hat));
    }
    let disk_pairs: Vec<([f64; 2], [f64; 2])> = (0..p.n_points)
        .map(|_| (ball_sample::<2>(&mut rng, p.max_radius), ball_sample::<2>(&mut rng, p.max_radius)))
        .collect();
    for strategy in CouplingStrategy::ALL {
        let r = joint_matrix_psd_probe(&PoincareDiskBm, strategy, &disk_pairs)?;
        report.checks.push(
            CheckRecord::new(format!("psd/disk/{}/joint_min_eigenvalue", strategy.name()), NON_NEGATIVE, r.min_eig_joint)
                .bound(-1e-9)
                .pass_if(r.min_eig_joint >= -1e-9),
        );
        report.checks.push(CheckRecord::new(format!("psd/disk/{}/hat_min_eigenvalue", strategy.name()), NON_NEGATIVE, r.min_eig_hat));
    }

    let d = synchronous_square_distance_drift(
        &ComplexHyperbolicBm,
        p.drift_x,
        p.drift_y,
        p.drift_dt,
        p.drift_horizon,
        p.drift_fit_points,
        p.drift_paths,
        seed,
    )?;
    let rel = (d.drift.point - d.trace_hat).abs() / d.trace_hat.abs();
    report.checks.push(
        CheckRecord::new("trace_identity/h2c/synchronous/drift", READILY, d.drift.point)
            .se(d.drift.se)
            .interval(d.drift.interval.0, d.drift.interval.1)
            .bound(d.trace_hat)
            .pass_if(rel <= p.drift_rel_tol),
    );
    report.checks.push(CheckRecord::new("trace_identity/h2c/synchronous/relative_error", READILY, rel).bound(p.drift_rel_tol).pass_if(rel <= p.drift_rel_tol));
    if d.excluded > 0 {
        report.warnings.push(format!("trace identity: {} paths left the chart and were excluded", d.excluded));
    }
    Ok(())
}

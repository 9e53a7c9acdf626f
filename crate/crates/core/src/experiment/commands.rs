//! Command configurations and their runners.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::suites::{self, Suite};
use super::{Cell, CheckRecord, RunReport, Table, DEFAULT_SEED};
use crate::caratheodory::{disk_family, stochastic_caratheodory_grid, HolomorphicChart, HolomorphicTestFunction};
use crate::comparison::{
    comparison_drift_kahler, coupling_failure_bound, gradient_bound, kahler_index_bound, kahler_laplacian_bound,
    quaternionic_index_bound, quaternionic_laplacian_bound, ricci_reduction_check, schwarz_bound, wang_bound,
    ComparisonDiffusion1D,
};
use crate::coupling::{estimate_absorption_survival, estimate_exit_event, estimate_survival, CouplingStrategy, SurvivalCurve};
use crate::error::{invalid, Result};
use crate::geometry::{CurvatureProfile, DiskPoint};
use crate::sde::{ComplexHyperbolicBm, DiffusionSpec, PoincareDiskBm, StepPlan};
use crate::stats::{wilson_interval, BatchEstimate};

const BOUNDS_ANCHOR: &str = "Kendall-Cranston coupling";
const RICCI_ANCHOR: &str = "Gradient estimates for harmonic functions";
const THEOREM_ANCHOR: &str = "indicator function of the event";

/// State space of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Poincaré disk, states `[re, im]`.
    Disk,
    /// Unit ball of ℂ², states `[a1, b1, a2, b2]`.
    ComplexHyperbolic,
    /// One-dimensional comparison diffusion.
    Line,
}

impl Space {
    fn default_dt(self) -> f64 {
        match self {
            Space::ComplexHyperbolic => 2.5e-4,
            _ => 1e-3,
        }
    }

    fn default_eps(self) -> f64 {
        match self {
            Space::ComplexHyperbolic => 5e-3,
            _ => 1e-3,
        }
    }
}

fn to_array<const D: usize>(v: &[f64], name: &'static str) -> Result<[f64; D]> {
    v.try_into()
        .map_err(|_| invalid(name, format!("expected {D} coordinates, got {}", v.len())))
}

fn echo<T: Serialize>(config: &T) -> Value {
    serde_json::to_value(config).expect("configs serialise")
}

fn require_paths(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        Err(invalid("n_paths", "must be > 0"))
    } else {
        Ok(())
    }
}

/// Configuration of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Suite parameters; omitted fields take the acceptance defaults.
    #[serde(default)]
    pub params: Value,
}

impl VerifyConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            seed: None,
            params: Value::Null,
        }
    }
}

fn params<T: for<'de> Deserialize<'de> + Default>(v: &Value) -> Result<T> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v.clone()).map_err(|e| invalid("params", e.to_string()))
}

/// Runs a verification suite. The report echoes the resolved parameters.
pub fn cmd_verify(config: &VerifyConfig) -> Result<RunReport> {
    let seed = config.seed.unwrap_or(DEFAULT_SEED);
    macro_rules! run {
        ($ty:ty, $f:path) => {{
            let p: $ty = params(&config.params)?;
            let resolved = VerifyConfig {
                suite: config.suite,
                seed: Some(seed),
                params: echo(&p),
            };
            let mut report = RunReport::new("verify", echo(&resolved));
            $f(&p, seed, &mut report)?;
            report
        }};
    }
    Ok(match config.suite {
        Suite::DiskSchwarz => run!(suites::DiskSchwarzParams, suites::disk_schwarz),
        Suite::Caratheodory => run!(suites::CaratheodoryParams, suites::caratheodory),
        Suite::H2cProp72 => run!(suites::H2cParams, suites::h2c_failure),
        Suite::Comparison1d => run!(suites::Comparison1dParams, suites::comparison_1d),
        Suite::PsdProbe => run!(suites::PsdParams, suites::psd_probe),
        Suite::Martingale => run!(suites::MartingaleParams, suites::martingale),
    })
}

/// Exit-event request of `simulate`: probability that a marginal leaves the
/// ball of radius `2 delta` about `center` before coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitEventConfig {
    pub center: Vec<f64>,
    pub delta: f64,
}

/// Configuration of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub space: Space,
    #[serde(default = "default_strategy")]
    pub strategy: CouplingStrategy,
    #[serde(default)]
    pub x0: Vec<f64>,
    #[serde(default)]
    pub y0: Vec<f64>,
    pub dt: Option<f64>,
    pub t_max: f64,
    pub eps_couple: Option<f64>,
    pub n_paths: usize,
    pub seed: Option<u64>,
    /// Output times; defaults to `[t_max]`.
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub exit_event: Option<ExitEventConfig>,
    /// Required for `space = "line"`.
    #[serde(default)]
    pub process: Option<ComparisonDiffusion1D>,
    /// Line paths above this level stop as survivors.
    #[serde(default)]
    pub escape_level: Option<f64>,
}

fn default_strategy() -> CouplingStrategy {
    CouplingStrategy::Mirror
}

impl SimulateConfig {
    fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.dt = Some(self.dt.unwrap_or(self.space.default_dt()));
        c.eps_couple = Some(self.eps_couple.unwrap_or(self.space.default_eps()));
        c.seed = Some(self.seed.unwrap_or(DEFAULT_SEED));
        if c.t_grid.is_empty() {
            c.t_grid = vec![self.t_max];
        }
        c
    }
}

fn survival_table(curve: &SurvivalCurve) -> Table {
    let mut table = Table::new(&["t", "n", "k", "p_hat", "wilson_lo", "wilson_hi"]);
    for (t, e) in curve.t.iter().zip(&curve.estimates) {
        table.rows.push(estimate_row(*t, e));
    }
    table
}

fn estimate_row(t: f64, e: &BatchEstimate) -> Vec<Cell> {
    vec![
        Cell::Num(t),
        Cell::Int(e.n),
        e.k.map_or(Cell::Missing, Cell::Int),
        Cell::Num(e.point),
        Cell::Num(e.interval.0),
        Cell::Num(e.interval.1),
    ]
}

fn simulate_chart<const D: usize, S: DiffusionSpec<D>>(spec: &S, c: &SimulateConfig, report: &mut RunReport) -> Result<()> {
    let x0 = to_array::<D>(&c.x0, "x0")?;
    let y0 = to_array::<D>(&c.y0, "y0")?;
    for (name, p) in [("x0", &x0), ("y0", &y0)] {
        if !spec.in_domain(p) {
            return Err(invalid(name, format!("{p:?} is outside the {} chart", spec.name())));
        }
    }
    let (dt, eps, seed) = (c.dt.unwrap_or_default(), c.eps_couple.unwrap_or_default(), c.seed.unwrap_or_default());
    let plan = StepPlan::new(dt, c.t_max)?;
    if let Some(ev) = &c.exit_event {
        let center = to_array::<D>(&ev.center, "exit_event.center")?;
        let e = estimate_exit_event(spec, c.strategy, x0, y0, center, ev.delta, &plan, eps, c.n_paths, seed)?;
        let mut table = Table::new(&["t", "n", "k", "p_hat", "wilson_lo", "wilson_hi"]);
        table.rows.push(estimate_row(c.t_max, &e));
        report.table = Some(table);
        return Ok(());
    }
    let curve = estimate_survival(spec, c.strategy, x0, y0, &plan, eps, &c.t_grid, c.n_paths, seed)?;
    if curve.domain_exits > 0 {
        report.warnings.push(format!(
            "{} of {} pairs reached the chart boundary before coupling and count as uncoupled",
            curve.domain_exits, c.n_paths
        ));
    }
    report.table = Some(survival_table(&curve));
    Ok(())
}

/// Estimates a survival curve (or an exit-event probability) and tabulates
/// it as `t,n,k,p_hat,wilson_lo,wilson_hi`.
pub fn cmd_simulate(config: &SimulateConfig) -> Result<RunReport> {
    require_paths(config.n_paths)?;
    let c = config.resolved();
    let mut report = RunReport::new("simulate", echo(&c));
    match c.space {
        Space::Disk => simulate_chart(&PoincareDiskBm, &c, &mut report)?,
        Space::ComplexHyperbolic => {
            if c.strategy == CouplingStrategy::Mirror {
                return Err(crate::Error::MirrorUnsupported(ComplexHyperbolicBm.name()));
            }
            simulate_chart(&ComplexHyperbolicBm, &c, &mut report)?
        }
        Space::Line => {
            let process = c.process.ok_or_else(|| invalid("process", "required for the line space"))?;
            process.validate()?;
            if c.exit_event.is_some() {
                return Err(invalid("exit_event", "not defined for the line space"));
            }
            let plan = StepPlan::new(c.dt.unwrap_or_default(), c.t_max)?;
            let curve = estimate_absorption_survival(&process, &plan, &c.t_grid, c.n_paths, c.seed.unwrap_or_default(), c.escape_level)?;
            report.table = Some(survival_table(&curve));
        }
    }
    Ok(report)
}

/// Grid of `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub n: Vec<u32>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub m: Vec<f64>,
    pub rho: Vec<f64>,
    /// Radii of the index, Laplacian and Ricci-reduction rows.
    pub r: Vec<f64>,
    /// Sup-norm of the harmonic function in the gradient rows.
    pub sup_norm: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            n: vec![1, 2, 3, 4],
            k1: vec![-2.0, -1.0, -0.25],
            k2: vec![-2.0, -1.0, -0.25],
            m: vec![0.0, 1.0],
            rho: vec![0.1, 1.0],
            r: vec![0.5, 1.0, 2.0],
            sup_norm: 1.0,
        }
    }
}

/// Tabulates every closed-form bound over the grid as
/// `quantity,n,k1,k2,m,r,value`. The `r` column holds `rho` for the
/// distance bounds, the sup-norm for gradient rows and the radius otherwise.
pub fn cmd_bounds(config: &BoundsConfig) -> Result<RunReport> {
    let mut report = RunReport::new("bounds", echo(config));
    let mut table = Table::new(&["quantity", "n", "k1", "k2", "m", "r", "value"]);
    let mut violations = 0u64;
    let mut total = 0u64;
    for &n in &config.n {
        for &k1 in &config.k1 {
            for &k2 in &config.k2 {
                let mut push = |q: &str, m: Option<f64>, r: Option<f64>, v: f64| {
                    table.rows.push(vec![
                        Cell::Text(q.into()),
                        Cell::Int(u64::from(n)),
                        Cell::Num(k1),
                        Cell::Num(k2),
                        m.map_or(Cell::Missing, Cell::Num),
                        r.map_or(Cell::Missing, Cell::Num),
                        Cell::Num(v),
                    ])
                };
                for &m in &config.m {
                    let kahler = CurvatureProfile::kahler(n, k1, k2, m);
                    let quat = CurvatureProfile::quaternionic(n, k1, k2, m);
                    kahler.validate_negative()?;
                    for &rho in &config.rho {
                        push("coupling_failure_kahler", Some(m), Some(rho), coupling_failure_bound(&kahler, rho)?.value);
                        push("coupling_failure_quaternionic", Some(m), Some(rho), coupling_failure_bound(&quat, rho)?.value);
                        if m == 0.0 {
                            push("schwarz_kahler", Some(m), Some(rho), schwarz_bound(&kahler, rho)?.value);
                        }
                    }
                    push("gradient_kahler", Some(m), Some(config.sup_norm), gradient_bound(&kahler, config.sup_norm)?);
                    push("gradient_quaternionic", Some(m), Some(config.sup_norm), gradient_bound(&quat, config.sup_norm)?);
                    let b = comparison_drift_kahler(&kahler)?;
                    push("comparison_drift_kahler", Some(m), None, b);
                    for &rho in config.rho.iter().filter(|&&r| r > 0.0) {
                        push("wang_bound_t1", Some(m), Some(rho), wang_bound(1.0, b, rho, 1.0)?);
                        push("wang_bound_limit", Some(m), Some(rho), wang_bound(1.0, b, rho, f64::INFINITY)?);
                    }
                }
                let kahler = CurvatureProfile::kahler(n, k1, k2, 0.0);
                let quat = CurvatureProfile::quaternionic(n, k1, k2, 0.0);
                for &r in &config.r {
                    push("index_bound_kahler", None, Some(r), kahler_index_bound(&kahler, r)?);
                    push("index_bound_quaternionic", None, Some(r), quaternionic_index_bound(&quat, r)?);
                    push("laplacian_bound_kahler", None, Some(r), kahler_laplacian_bound(&kahler, r)?);
                    push("laplacian_bound_quaternionic", None, Some(r), quaternionic_laplacian_bound(&quat, r)?);
                    let rr = ricci_reduction_check(n, k1, k2, r)?;
                    push("ricci_reduction_lhs", None, Some(r), rr.lhs);
                    push("ricci_reduction_rhs", None, Some(r), rr.rhs);
                    total += 1;
                    violations += u64::from(!rr.holds);
                }
            }
        }
    }
    report.checks.push(CheckRecord::new("ricci_reduction/violations", RICCI_ANCHOR, violations as f64).bound(total as f64));
    report.checks.push(CheckRecord::new("bounds/rows", BOUNDS_ANCHOR, table.rows.len() as f64));
    report.table = Some(table);
    Ok(report)
}

/// Configuration of `caratheodory`: the stochastic Carathéodory estimate on
/// a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaratheodoryConfig {
    pub space: Space,
    #[serde(default = "default_strategy")]
    pub strategy: CouplingStrategy,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t_grid: Vec<f64>,
    #[serde(default = "default_phases")]
    pub n_phases: usize,
    #[serde(default = "default_power")]
    pub max_power: u32,
    pub dt: Option<f64>,
    pub eps_couple: Option<f64>,
    pub n_paths: usize,
    pub seed: Option<u64>,
}

fn default_phases() -> usize {
    8
}

fn default_power() -> u32 {
    3
}

fn caratheodory_on<const D: usize, S: HolomorphicChart<D>>(
    spec: &S,
    c: &CaratheodoryConfig,
    family: &[HolomorphicTestFunction],
    report: &mut RunReport,
) -> Result<()> {
    let x = to_array::<D>(&c.x, "x")?;
    let y = to_array::<D>(&c.y, "y")?;
    let t_end = c.t_grid.iter().copied().fold(0.0, f64::max);
    let plan = StepPlan::new(c.dt.unwrap_or_default(), t_end)?;
    let rows = stochastic_caratheodory_grid(
        spec,
        c.strategy,
        x,
        y,
        &c.t_grid,
        family,
        &plan,
        c.eps_couple.unwrap_or_default(),
        c.n_paths,
        c.seed.unwrap_or_default(),
    )?;
    let mut table = Table::new(&["t", "closed_form", "sup_estimate", "sup_se", "survival", "survival_se", "survival_bound", "best"]);
    for r in &rows {
        table.rows.push(vec![
            Cell::Num(r.t),
            Cell::Num(r.closed_form),
            Cell::Num(r.stochastic_estimate.point),
            Cell::Num(r.stochastic_estimate.se),
            Cell::Num(r.survival.point),
            Cell::Num(r.survival.se),
            Cell::Num(r.survival_bound),
            r.best.map_or(Cell::Missing, |b| Cell::Text(family[b].name())),
        ]);
        report.checks.push(
            CheckRecord::new(format!("caratheodory/{}/survival_bound/t={}", c.strategy.name(), r.t), THEOREM_ANCHOR, r.survival_bound)
                .se(2.0 * r.survival.se)
                .bound(r.closed_form)
                .pass_if(r.closed_form <= r.survival_bound + 3.0 * r.survival.se),
        );
        report.checks.push(
            CheckRecord::new(format!("caratheodory/{}/family_sup/t={}", c.strategy.name(), r.t), THEOREM_ANCHOR, r.stochastic_estimate.point)
                .se(r.stochastic_estimate.se)
                .bound(r.closed_form),
        );
    }
    report.table = Some(table);
    Ok(())
}

/// Stochastic Carathéodory distance against the closed form.
///
/// On the disk the family is the rotated extremal automorphism at `y` with
/// its powers; on the ball of ℂ² it is the two coordinates of the
/// automorphism exchanging `y` and 0.
pub fn cmd_caratheodory(config: &CaratheodoryConfig) -> Result<RunReport> {
    require_paths(config.n_paths)?;
    if config.t_grid.is_empty() {
        return Err(invalid("t_grid", "must not be empty"));
    }
    let mut c = config.clone();
    c.dt = Some(c.dt.unwrap_or(c.space.default_dt()));
    c.eps_couple = Some(c.eps_couple.unwrap_or(c.space.default_eps()));
    c.seed = Some(c.seed.unwrap_or(DEFAULT_SEED));
    let mut report = RunReport::new("caratheodory", echo(&c));
    match c.space {
        Space::Disk => {
            let y = to_array::<2>(&c.y, "y")?;
            let family = disk_family(DiskPoint::new(y[0], y[1])?, c.n_phases, c.max_power);
            caratheodory_on(&PoincareDiskBm, &c, &family, &mut report)?;
        }
        Space::ComplexHyperbolic => {
            if c.strategy == CouplingStrategy::Mirror {
                return Err(crate::Error::MirrorUnsupported(ComplexHyperbolicBm.name()));
            }
            let center = to_array::<4>(&c.y, "y")?;
            let family: Vec<_> = (0..2).map(|index| HolomorphicTestFunction::CoordinateSlice { index, center }).collect();
            caratheodory_on(&ComplexHyperbolicBm, &c, &family, &mut report)?;
        }
        Space::Line => return Err(invalid("space", "the line has no holomorphic structure")),
    }
    Ok(report)
}

/// Wilson score interval as a one-row report.
pub fn cmd_wilson(k: u64, n: u64, z: f64) -> Result<RunReport> {
    let (lo, hi) = wilson_interval(k, n, z)?;
    let mut report = RunReport::new("wilson", serde_json::json!({ "k": k, "n": n, "z": z }));
    let mut table = Table::new(&["k", "n", "z", "p_hat", "wilson_lo", "wilson_hi"]);
    table.rows.push(vec![Cell::Int(k), Cell::Int(n), Cell::Num(z), Cell::Num(k as f64 / n as f64), Cell::Num(lo), Cell::Num(hi)]);
    report.table = Some(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_example_row() {
        let cfg = BoundsConfig {
            n: vec![2],
            k1: vec![-1.0],
            k2: vec![-1.0],
            m: vec![0.0],
            rho: vec![0.0, 0.1],
            ..Default::default()
        };
        let csv = cmd_bounds(&cfg).unwrap().table.unwrap().to_csv();
        assert!(csv.contains("coupling_failure_kahler,2,-1.0000000000000000e0,-1.0000000000000000e0,0.0000000000000000e0,1.0000000000000001e-1,1.6000000000000001e0"));
        assert!(csv.contains("coupling_failure_kahler,2,-1.0000000000000000e0,-1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"));
    }

    #[test]
    fn positive_curvature_is_rejected() {
        let cfg = BoundsConfig {
            k1: vec![0.5],
            ..Default::default()
        };
        assert!(matches!(cmd_bounds(&cfg), Err(crate::Error::CurvatureSign { .. })));
    }

    #[test]
    fn zero_paths_is_a_config_error() {
        let cfg: SimulateConfig = serde_json::from_value(serde_json::json!({
            "space": "disk", "x0": [0.5, 0.0], "y0": [0.0, 0.0], "t_max": 1.0, "n_paths": 0
        }))
        .unwrap();
        assert!(matches!(cmd_simulate(&cfg), Err(crate::Error::InvalidParameter { .. })));
    }

    #[test]
    fn coincident_start_survives_nowhere() {
        let cfg: SimulateConfig = serde_json::from_value(serde_json::json!({
            "space": "disk", "x0": [0.2, 0.1], "y0": [0.2, 0.1], "t_max": 0.1, "t_grid": [0.0, 0.05, 0.1], "n_paths": 50
        }))
        .unwrap();
        let t = cmd_simulate(&cfg).unwrap().table.unwrap();
        assert!(t.rows.iter().all(|r| r[2] == Cell::Int(0)));
    }

    #[test]
    fn unknown_suite_params_are_rejected() {
        let cfg = VerifyConfig {
            suite: Suite::Martingale,
            seed: None,
            params: serde_json::json!({ "bogus": 1 }),
        };
        assert!(cmd_verify(&cfg).is_err());
    }
}

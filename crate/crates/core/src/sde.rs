//! Euler–Maruyama time stepping of `dX = A(X) dB + Z(X) dt` in chart
//! coordinates, with per-path reproducible noise and domain monitoring.
//!
//! Every path draws its Gaussians from its own ChaCha8 stream selected by
//! `(seed, path_index)`, so results do not depend on scheduling or on the
//! number of worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::comparison::{ComparisonDiffusion1D, ComparisonDrift};
use crate::error::{invalid, Result};
use crate::geometry::{
    chc2_diffusion_unchecked, geodesic_directions, mirror_coefficient, norm4, BOUNDARY_FAULT,
};

/// A diffusion in a chart of dimension `D`.
///
/// The optional hooks default to a plain Itô diffusion on an open domain.
pub trait DiffusionSpec<const D: usize>: Sync {
    fn name(&self) -> &'static str;

    /// Diffusion matrix `A(x)`, row-major.
    fn diffusion(&self, x: &[f64; D]) -> [[f64; D]; D];

    /// Drift `Z(x)`.
    fn drift(&self, _x: &[f64; D]) -> [f64; D] {
        [0.0; D]
    }

    fn in_domain(&self, x: &[f64; D]) -> bool;

    /// Intrinsic distance of the chart.
    fn distance(&self, x: &[f64; D], y: &[f64; D]) -> f64;

    /// Applied to every proposed state; reflecting boundaries fold here.
    fn fold(&self, x: [f64; D]) -> [f64; D] {
        x
    }

    /// Probability that the continuous path left the domain during a step
    /// whose endpoints both lie inside (Brownian-bridge correction).
    fn bridge_exit_probability(&self, _from: &[f64; D], _to: &[f64; D], _dt: f64) -> f64 {
        0.0
    }

    /// States from which a return to the boundary is negligible; paths stop
    /// there as survivors.
    fn has_escaped(&self, _x: &[f64; D]) -> bool {
        false
    }

    /// Noise for the second marginal under the mirror coupling, or `None`
    /// when the chart has no closed-form mirror map.
    fn mirror_noise(&self, _x: &[f64; D], _y: &[f64; D], _xi: &[f64; D]) -> Option<[f64; D]> {
        None
    }

    fn supports_mirror(&self) -> bool {
        false
    }

    /// Probability that mirror-coupled marginals met during a step, given
    /// both endpoints. `1.0` when they crossed.
    fn mirror_meeting_probability(
        &self,
        _x0: &[f64; D],
        _y0: &[f64; D],
        _x1: &[f64; D],
        _y1: &[f64; D],
        _dt: f64,
    ) -> f64 {
        0.0
    }
}

/// Fixed-step integration plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub dt: f64,
    pub t_max: f64,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    EulerMaruyama,
}

impl StepPlan {
    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        let plan = Self {
            dt,
            t_max,
            scheme: Scheme::EulerMaruyama,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", format!("must be >= 0, got {}", self.t_max)));
        }
        if self.t_max > 0.0 && self.dt > self.t_max {
            return Err(invalid("dt", format!("dt = {} exceeds t_max = {}", self.dt, self.t_max)));
        }
        Ok(())
    }

    /// Number of steps; `t_max` is rounded to the nearest multiple of `dt`
    /// when it is within 1e-9 relative of one, otherwise rounded up.
    pub fn n_steps(&self) -> usize {
        step_index(self.t_max, self.dt)
    }

    pub fn time_of(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Step index at which a grid time is sampled.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) || t > self.t_max * (1.0 + 1e-12) {
            return Err(invalid("t_grid", format!("time {t} outside [0, {}]", self.t_max)));
        }
        Ok(step_index(t, self.dt))
    }
}

fn step_index(t: f64, dt: f64) -> usize {
    let q = t / dt;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * q.max(1.0) {
        r as usize
    } else {
        q.ceil() as usize
    }
}

/// Deterministic Gaussian source for one path.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    seed: u64,
    path_index: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        Self {
            rng,
            seed,
            path_index,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// Position in the underlying 32-bit word stream.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn gaussians<const D: usize>(&mut self) -> [f64; D] {
        std::array::from_fn(|_| self.gaussian())
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

/// The pre-step state of a path whose proposed step left the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainExit<const D: usize> {
    pub state: [f64; D],
}

#[inline]
pub(crate) fn mat_vec<const D: usize>(a: &[[f64; D]; D], v: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| (0..D).map(|j| a[i][j] * v[j]).sum())
}

/// The Euler–Maruyama proposal `x + A(x) √dt ξ + Z(x) dt`, folded but not
/// checked against the domain.
#[inline]
pub fn euler_proposal<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    x: &[f64; D],
    dt: f64,
    xi: &[f64; D],
) -> [f64; D] {
    let a = spec.diffusion(x);
    let z = spec.drift(x);
    let sdt = dt.sqrt();
    let noise = mat_vec(&a, xi);
    spec.fold(std::array::from_fn(|i| x[i] + noise[i] * sdt + z[i] * dt))
}

/// One Euler–Maruyama step; a proposal outside the domain is reported with
/// the pre-step state.
#[inline]
pub fn euler_step<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    x: &[f64; D],
    dt: f64,
    xi: &[f64; D],
) -> Result<[f64; D], DomainExit<D>> {
    let next = euler_proposal(spec, x, dt, xi);
    if spec.in_domain(&next) {
        Ok(next)
    } else {
        Err(DomainExit { state: *x })
    }
}

/// Outcome of a single uncoupled path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary<const D: usize> {
    pub terminal: [f64; D],
    /// Time of the first step that left the domain (including bridge exits).
    pub exit_time: Option<f64>,
    /// Time at which the path was stopped as escaped.
    pub escape_time: Option<f64>,
    /// `(t, state)` every `record_stride` steps when recording was requested.
    pub trajectory: Vec<(f64, [f64; D])>,
}

/// Integrates one path to `plan.t_max`, a domain exit, or escape.
///
/// `record_stride = Some(k)` stores every k-th state (and the last one).
pub fn simulate_path<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    x0: [f64; D],
    plan: &StepPlan,
    noise: &mut NoiseStream,
    record_stride: Option<usize>,
) -> Result<PathSummary<D>> {
    plan.validate()?;
    if !spec.in_domain(&x0) {
        return Err(invalid("x0", format!("{x0:?} is outside the domain of {}", spec.name())));
    }
    let n = plan.n_steps();
    let mut x = x0;
    let mut trajectory = Vec::new();
    let stride = record_stride.map(|s| s.max(1));
    if stride.is_some() {
        trajectory.push((0.0, x));
    }
    let mut exit_time = None;
    let mut escape_time = None;
    for k in 0..n {
        if spec.has_escaped(&x) {
            escape_time = Some(plan.time_of(k));
            break;
        }
        let xi = noise.gaussians::<D>();
        match euler_step(spec, &x, plan.dt, &xi) {
            Ok(next) => {
                let p = spec.bridge_exit_probability(&x, &next, plan.dt);
                if p > 0.0 && noise.uniform() < p {
                    exit_time = Some(plan.time_of(k + 1));
                    break;
                }
                x = next;
            }
            Err(_) => {
                exit_time = Some(plan.time_of(k + 1));
                break;
            }
        }
        if let Some(s) = stride {
            if (k + 1) % s == 0 || k + 1 == n {
                trajectory.push((plan.time_of(k + 1), x));
            }
        }
    }
    Ok(PathSummary {
        terminal: x,
        exit_time,
        escape_time,
        trajectory,
    })
}

/// Strong error of one step size against the reference run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongErrorRow {
    pub dt: f64,
    /// Mean Euclidean distance between terminal states.
    pub error: f64,
    /// Paths excluded because either run left the domain.
    pub excluded: usize,
}

/// Strong-convergence table on shared noise.
///
/// The reference solution uses `min(dt_list) / 16`; every listed step must
/// be a power-of-two multiple of it. Coarse increments are dyadic sums of
/// the reference increments.
pub fn strong_convergence_probe<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    x0: [f64; D],
    dt_list: &[f64],
    t_max: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<StrongErrorRow>> {
    use rayon::prelude::*;

    if dt_list.is_empty() || n_paths == 0 {
        return Err(invalid("dt_list", "need at least one step size and one path"));
    }
    if dt_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("dt_list", "step sizes must be strictly descending"));
    }
    let dt_ref = dt_list[dt_list.len() - 1] / 16.0;
    let n_ref = StepPlan::new(dt_ref, t_max)?.n_steps();
    let mut ratios = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let q = dt / dt_ref;
        let r = q.round() as usize;
        if !r.is_power_of_two() || (q - r as f64).abs() > 1e-9 * q || n_ref % r != 0 {
            return Err(invalid("dt_list", format!("{dt} is not a dyadic multiple of {dt_ref} dividing t_max")));
        }
        ratios.push(r);
    }

    let per_path: Vec<Option<Vec<f64>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut noise = NoiseStream::new(seed, i);
            let xis: Vec<[f64; D]> = (0..n_ref).map(|_| noise.gaussians::<D>()).collect();
            let reference = integrate_blocks(spec, x0, &xis, 1, dt_ref)?;
            ratios
                .iter()
                .map(|&r| {
                    integrate_blocks(spec, x0, &xis, r, dt_ref * r as f64).map(|x| {
                        (0..D).map(|j| (x[j] - reference[j]).powi(2)).sum::<f64>().sqrt()
                    })
                })
                .collect()
        })
        .collect();

    let good: Vec<&Vec<f64>> = per_path.iter().flatten().collect();
    let excluded = n_paths - good.len();
    if good.is_empty() {
        return Err(invalid("n_paths", "every path left the domain"));
    }
    Ok(dt_list
        .iter()
        .enumerate()
        .map(|(j, &dt)| StrongErrorRow {
            dt,
            error: good.iter().map(|e| e[j]).sum::<f64>() / good.len() as f64,
            excluded,
        })
        .collect())
}

fn integrate_blocks<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    x0: [f64; D],
    xis: &[[f64; D]],
    block: usize,
    dt: f64,
) -> Option<[f64; D]> {
    let scale = 1.0 / (block as f64).sqrt();
    let mut x = x0;
    for chunk in xis.chunks(block) {
        let mut xi = [0.0; D];
        for v in chunk {
            for j in 0..D {
                xi[j] += v[j];
            }
        }
        xi.iter_mut().for_each(|c| *c *= scale);
        x = euler_step(spec, &x, dt, &xi).ok()?;
    }
    Some(x)
}

/// Least-squares slope of `ln(error)` against `ln(dt)`.
pub fn fitted_order(rows: &[StrongErrorRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| (r.dt.ln(), r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Brownian motion of the curvature −1 Poincaré disk, generator `½Δ_g`.
///
/// In the conformal chart this is `dZ = ((1 − |Z|²)/2) dB` with no drift:
/// the Laplace–Beltrami operator of a conformal metric in two dimensions
/// has no first-order term. Distance is the hyperbolic geodesic distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoincareDiskBm;

pub(crate) fn complex_of(x: &[f64; 2]) -> Complex64 {
    Complex64::new(x[0], x[1])
}

impl DiffusionSpec<2> for PoincareDiskBm {
    fn name(&self) -> &'static str {
        "poincare_disk"
    }

    #[inline]
    fn diffusion(&self, x: &[f64; 2]) -> [[f64; 2]; 2] {
        let s = 0.5 * (1.0 - x[0] * x[0] - x[1] * x[1]);
        [[s, 0.0], [0.0, s]]
    }

    #[inline]
    fn in_domain(&self, x: &[f64; 2]) -> bool {
        x[0].hypot(x[1]) < 1.0 - BOUNDARY_FAULT
    }

    fn distance(&self, x: &[f64; 2], y: &[f64; 2]) -> f64 {
        let (z, w) = (complex_of(x), complex_of(y));
        let num = z - w;
        if num.norm_sqr() == 0.0 {
            return 0.0;
        }
        2.0 * (num / (Complex64::new(1.0, 0.0) - w.conj() * z)).norm().atanh()
    }

    fn supports_mirror(&self) -> bool {
        true
    }

    /// The chart is conformal, so unit chart directions are orthonormal
    /// frames and the mirror map acts on `ξ` as a reflection matrix.
    fn mirror_noise(&self, x: &[f64; 2], y: &[f64; 2], xi: &[f64; 2]) -> Option<[f64; 2]> {
        let c = mirror_coefficient(complex_of(x), complex_of(y))?;
        let out = c * Complex64::new(xi[0], -xi[1]);
        Some([out.re, out.im])
    }

    /// The signed separation along the pre-step geodesic has quadratic
    /// variation `4 dt`. A sign change means the marginals crossed;
    /// otherwise the bridge probability `exp(−2 ρ0 ρ1 / (4 dt))` applies.
    fn mirror_meeting_probability(
        &self,
        x0: &[f64; 2],
        y0: &[f64; 2],
        x1: &[f64; 2],
        y1: &[f64; 2],
        dt: f64,
    ) -> f64 {
        let z0 = complex_of(x0);
        let Some((dir, _)) = geodesic_directions(z0, complex_of(y0)) else {
            return 1.0;
        };
        // Straighten the old geodesic onto the positive real axis.
        let one = Complex64::new(1.0, 0.0);
        let to_axis = |u: Complex64| dir.conj() * (u - z0) / (one - z0.conj() * u);
        if (to_axis(complex_of(y1)) - to_axis(complex_of(x1))).re <= 0.0 {
            return 1.0;
        }
        let rho0 = self.distance(x0, y0);
        let rho1 = self.distance(x1, y1);
        (-2.0 * rho0 * rho1 / (4.0 * dt)).exp()
    }
}

/// Brownian motion of H²(ℂ) in the unit-ball chart of ℝ⁴: `dX = A(X) dB`.
/// Distance is Euclidean.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexHyperbolicBm;

impl DiffusionSpec<4> for ComplexHyperbolicBm {
    fn name(&self) -> &'static str {
        "complex_hyperbolic_plane"
    }

    #[inline]
    fn diffusion(&self, x: &[f64; 4]) -> [[f64; 4]; 4] {
        chc2_diffusion_unchecked(x)
    }

    #[inline]
    fn in_domain(&self, x: &[f64; 4]) -> bool {
        norm4(x) < 1.0 - BOUNDARY_FAULT
    }

    fn distance(&self, x: &[f64; 4], y: &[f64; 4]) -> f64 {
        (0..4).map(|i| (x[i] - y[i]).powi(2)).sum::<f64>().sqrt()
    }
}

/// One-dimensional comparison diffusion as a simulable spec.
///
/// Constant drift: absorbed at 0 with a Brownian-bridge crossing check, and
/// optionally stopped as a survivor above `escape_level`.
///
/// Eta drift: 0 is an entrance boundary. Below `r_switch = 10 √(σ² dt)` the
/// step is the reflected driftless move `|r + σ √dt ξ|`; above it the full
/// drift is applied (still reflected at 0).
#[derive(Debug, Clone, Copy)]
pub struct OneDimSpec {
    process: ComparisonDiffusion1D,
    sigma: f64,
    r_switch: f64,
    escape_level: Option<f64>,
}

impl OneDimSpec {
    pub fn new(process: ComparisonDiffusion1D, dt: f64) -> Result<Self> {
        process.validate()?;
        Ok(Self {
            sigma: process.sigma2.sqrt(),
            r_switch: 10.0 * (process.sigma2 * dt).sqrt(),
            escape_level: None,
            process,
        })
    }

    pub fn with_escape_level(mut self, level: f64) -> Self {
        self.escape_level = Some(level);
        self
    }

    pub fn process(&self) -> &ComparisonDiffusion1D {
        &self.process
    }

    fn absorbing(&self) -> bool {
        matches!(self.process.drift, ComparisonDrift::Constant { .. })
    }
}

impl DiffusionSpec<1> for OneDimSpec {
    fn name(&self) -> &'static str {
        if self.absorbing() {
            "constant_drift_line"
        } else {
            "eta_comparison"
        }
    }

    fn diffusion(&self, _x: &[f64; 1]) -> [[f64; 1]; 1] {
        [[self.sigma]]
    }

    fn drift(&self, x: &[f64; 1]) -> [f64; 1] {
        match self.process.drift {
            ComparisonDrift::Constant { b } => [b],
            ComparisonDrift::Eta { .. } if x[0] < self.r_switch => [0.0],
            ComparisonDrift::Eta { .. } => [self.process.drift_at(x[0])],
        }
    }

    fn in_domain(&self, x: &[f64; 1]) -> bool {
        if self.absorbing() {
            x[0] > 0.0
        } else {
            x[0] >= 0.0 && x[0].is_finite()
        }
    }

    fn distance(&self, x: &[f64; 1], y: &[f64; 1]) -> f64 {
        (x[0] - y[0]).abs()
    }

    fn fold(&self, x: [f64; 1]) -> [f64; 1] {
        if self.absorbing() {
            x
        } else {
            [x[0].abs()]
        }
    }

    fn bridge_exit_probability(&self, from: &[f64; 1], to: &[f64; 1], dt: f64) -> f64 {
        if !self.absorbing() {
            return 0.0;
        }
        let e = 2.0 * from[0] * to[0] / (self.process.sigma2 * dt);
        if e > 50.0 {
            0.0
        } else {
            (-e).exp()
        }
    }

    fn has_escaped(&self, x: &[f64; 1]) -> bool {
        self.escape_level.is_some_and(|l| x[0] >= l)
    }
}

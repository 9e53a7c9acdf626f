//! Markovian couplings of two copies of a diffusion, coupled simulation with
//! coupling-time detection, and Monte Carlo estimators built on it.
//!
//! Coupling is declared when the intrinsic distance drops to `eps_couple`,
//! or, under the mirror coupling, when the marginals cross or a
//! Brownian-bridge meeting test fires between grid points. From then on the
//! second marginal is set equal to the first.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::ComparisonDiffusion1D;
use crate::error::{invalid, Error, Result};
use crate::sde::{euler_proposal, euler_step, simulate_path, DiffusionSpec, NoiseStream, OneDimSpec, StepPlan};
use crate::stats::{BatchEstimate, ComplexEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingStrategy {
    /// Both marginals are driven by the same noise.
    Synchronous,
    /// The second marginal draws its own noise.
    Independent,
    /// The noise is parallel-transported along the connecting geodesic and
    /// reflected in the hyperplane normal to it.
    Mirror,
}

impl CouplingStrategy {
    pub const ALL: [CouplingStrategy; 3] = [Self::Synchronous, Self::Independent, Self::Mirror];

    pub fn name(self) -> &'static str {
        match self {
            Self::Synchronous => "synchronous",
            Self::Independent => "independent",
            Self::Mirror => "mirror",
        }
    }
}

/// Noise driving the second marginal, given the noise `xi` of the first.
///
/// `Independent` draws fresh Gaussians from `noise`.
pub fn couple_noise<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x: &[f64; D],
    y: &[f64; D],
    xi: &[f64; D],
    noise: &mut NoiseStream,
) -> Result<[f64; D]> {
    match strategy {
        CouplingStrategy::Synchronous => Ok(*xi),
        CouplingStrategy::Independent => Ok(noise.gaussians::<D>()),
        CouplingStrategy::Mirror => {
            if !spec.supports_mirror() {
                return Err(Error::MirrorUnsupported(spec.name()));
            }
            if x == y {
                return Err(Error::AlreadyCoupled);
            }
            spec.mirror_noise(x, y, xi).ok_or(Error::AlreadyCoupled)
        }
    }
}

/// A ball in the intrinsic distance of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball<const D: usize> {
    pub center: [f64; D],
    pub radius: f64,
}

/// Options of a coupled run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoupledRunOptions<const D: usize> {
    /// Stop integrating once the pair has coupled. Later snapshots repeat the
    /// coalesced state.
    pub stop_at_coupling: bool,
    /// Step indices at which `(X, Y)` is stored, ascending.
    pub snapshot_steps: Vec<usize>,
    /// Record `(t, X, Y)` every k-th step.
    pub record_stride: Option<usize>,
    /// Watch for the first exit of either marginal from this ball while the
    /// pair is uncoupled.
    pub watch: Option<Ball<D>>,
}

/// Result of one coupled path.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledOutcome<const D: usize> {
    pub coupled: bool,
    pub coupling_time: Option<f64>,
    /// Step index of coupling (0 when the start points are within `eps`).
    pub coupling_step: Option<usize>,
    pub exited_x: Option<f64>,
    pub exited_y: Option<f64>,
    /// Step index at which a marginal left the chart domain before coupling.
    /// The pair is frozen from then on and counted as uncoupled.
    pub exit_step: Option<usize>,
    /// First time a marginal left the watched ball while uncoupled.
    pub ball_exit_time: Option<f64>,
    pub terminal_x: [f64; D],
    pub terminal_y: [f64; D],
    pub snapshots: Vec<([f64; D], [f64; D])>,
    pub trajectory: Vec<(f64, [f64; D], [f64; D])>,
}

impl<const D: usize> CoupledOutcome<D> {
    /// Whether `τ > t` holds at grid step `k`.
    pub fn survives_step(&self, k: usize) -> bool {
        self.coupling_step.is_none_or(|c| c > k)
    }
}

/// Simulates a coupled pair to `plan.t_max`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_coupled<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x0: [f64; D],
    y0: [f64; D],
    plan: &StepPlan,
    eps_couple: f64,
    noise: &mut NoiseStream,
    options: &CoupledRunOptions<D>,
) -> Result<CoupledOutcome<D>> {
    plan.validate()?;
    if !(eps_couple > 0.0) {
        return Err(invalid("eps_couple", format!("must be > 0, got {eps_couple}")));
    }
    for (name, p) in [("x0", &x0), ("y0", &y0)] {
        if !spec.in_domain(p) {
            return Err(invalid(name, format!("{p:?} is outside the domain of {}", spec.name())));
        }
    }
    if strategy == CouplingStrategy::Mirror && !spec.supports_mirror() {
        return Err(Error::MirrorUnsupported(spec.name()));
    }

    let n = plan.n_steps();
    let (mut x, mut y) = (x0, y0);
    let mut out = CoupledOutcome {
        coupled: false,
        coupling_time: None,
        coupling_step: None,
        exited_x: None,
        exited_y: None,
        exit_step: None,
        ball_exit_time: None,
        terminal_x: x0,
        terminal_y: y0,
        snapshots: Vec::with_capacity(options.snapshot_steps.len()),
        trajectory: Vec::new(),
    };
    let mut snaps = options.snapshot_steps.iter().peekable();
    let stride = options.record_stride.map(|s| s.max(1));

    let outside = |p: &[f64; D]| options.watch.is_some_and(|b| spec.distance(p, &b.center) >= b.radius);

    if spec.distance(&x, &y) <= eps_couple {
        y = x;
        out.coupled = true;
        out.coupling_time = Some(0.0);
        out.coupling_step = Some(0);
    } else if outside(&x) || outside(&y) {
        out.ball_exit_time = Some(0.0);
    }
    if stride.is_some() {
        out.trajectory.push((0.0, x, y));
    }

    let mut halted = false;
    for k in 0..=n {
        while snaps.next_if(|&&s| s == k).is_some() {
            out.snapshots.push((x, y));
        }
        if k == n {
            break;
        }
        if halted || (out.coupled && options.stop_at_coupling) {
            if snaps.peek().is_none() {
                break;
            }
            continue;
        }

        let xi = noise.gaussians::<D>();
        let t1 = plan.time_of(k + 1);
        if out.coupled {
            match euler_step(spec, &x, plan.dt, &xi) {
                Ok(next) => {
                    x = next;
                    y = next;
                }
                Err(_) => {
                    out.exited_x = Some(t1);
                    out.exited_y = Some(t1);
                    halted = true;
                }
            }
        } else {
            let eta = couple_noise(spec, strategy, &x, &y, &xi, noise)?;
            let x1 = euler_proposal(spec, &x, plan.dt, &xi);
            let y1 = euler_proposal(spec, &y, plan.dt, &eta);
            let (ok_x, ok_y) = (spec.in_domain(&x1), spec.in_domain(&y1));
            if !(ok_x && ok_y) {
                if !ok_x {
                    out.exited_x = Some(t1);
                }
                if !ok_y {
                    out.exited_y = Some(t1);
                }
                out.exit_step = Some(k + 1);
                halted = true;
            } else {
                let met = spec.distance(&x1, &y1) <= eps_couple
                    || (strategy == CouplingStrategy::Mirror && {
                        let p = spec.mirror_meeting_probability(&x, &y, &x1, &y1, plan.dt);
                        p >= 1.0 || (p > 0.0 && noise.uniform() < p)
                    });
                x = x1;
                y = if met { x1 } else { y1 };
                if met {
                    out.coupled = true;
                    out.coupling_time = Some(t1);
                    out.coupling_step = Some(k + 1);
                } else if out.ball_exit_time.is_none() && (outside(&x) || outside(&y)) {
                    out.ball_exit_time = Some(t1);
                }
            }
        }
        if let Some(s) = stride {
            if (k + 1) % s == 0 || k + 1 == n {
                out.trajectory.push((t1, x, y));
            }
        }
    }
    // Snapshots past an early stop repeat the last state.
    while snaps.next().is_some() {
        out.snapshots.push((x, y));
    }
    out.terminal_x = x;
    out.terminal_y = y;
    Ok(out)
}

/// Survival curve `P(τ > t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub t: Vec<f64>,
    pub estimates: Vec<BatchEstimate>,
    /// Paths frozen by a chart-domain exit before coupling; they count as
    /// uncoupled at every later time.
    pub domain_exits: u64,
}

fn grid_steps(plan: &StepPlan, t_grid: &[f64]) -> Result<Vec<usize>> {
    let steps = t_grid.iter().map(|&t| plan.index_of(t)).collect::<Result<Vec<_>>>()?;
    if steps.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("t_grid", "times must be nondecreasing"));
    }
    Ok(steps)
}

fn require_paths(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        Err(invalid("n_paths", "must be > 0"))
    } else {
        Ok(())
    }
}

/// Monte Carlo estimate of `P(τ > t)` for each `t` in `t_grid`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_survival<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x0: [f64; D],
    y0: [f64; D],
    plan: &StepPlan,
    eps_couple: f64,
    t_grid: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<SurvivalCurve> {
    require_paths(n_paths)?;
    let steps = grid_steps(plan, t_grid)?;
    let last = steps.last().copied().unwrap_or(0);
    let run_plan = StepPlan { t_max: plan.time_of(last), ..*plan };
    let options = CoupledRunOptions {
        stop_at_coupling: true,
        ..Default::default()
    };
    let outcomes: Vec<(Option<usize>, bool)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut noise = NoiseStream::new(seed, i);
            simulate_coupled(spec, strategy, x0, y0, &run_plan, eps_couple, &mut noise, &options)
                .map(|o| (o.coupling_step, o.exit_step.is_some()))
        })
        .collect::<Result<_>>()?;
    let domain_exits = outcomes.iter().filter(|o| o.1).count() as u64;
    let estimates = steps
        .iter()
        .map(|&k| {
            let alive = outcomes.iter().filter(|o| o.0.is_none_or(|c| c > k)).count();
            BatchEstimate::from_counts(alive as u64, n_paths as u64)
        })
        .collect::<Result<_>>()?;
    Ok(SurvivalCurve {
        t: t_grid.to_vec(),
        estimates,
        domain_exits,
    })
}

/// Probability that either marginal leaves the ball of radius `2δ` about
/// `center` before the pair couples.
///
/// Paths still uncoupled and inside the ball at `t_max` are counted as
/// events: the estimate is an upper proxy that reduces to `P(τ > t_max)` when
/// the ball cannot be left within the horizon.
#[allow(clippy::too_many_arguments)]
pub fn estimate_exit_event<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x0: [f64; D],
    y0: [f64; D],
    center: [f64; D],
    delta: f64,
    plan: &StepPlan,
    eps_couple: f64,
    n_paths: usize,
    seed: u64,
) -> Result<BatchEstimate> {
    require_paths(n_paths)?;
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("must be > 0, got {delta}")));
    }
    for (name, p) in [("x0", &x0), ("y0", &y0)] {
        let d = spec.distance(p, &center);
        if !(d < delta) {
            return Err(invalid(name, format!("distance {d} from the center is not below delta = {delta}")));
        }
    }
    let options = CoupledRunOptions {
        stop_at_coupling: true,
        watch: Some(Ball {
            center,
            radius: 2.0 * delta,
        }),
        ..Default::default()
    };
    let events: Vec<bool> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut noise = NoiseStream::new(seed, i);
            simulate_coupled(spec, strategy, x0, y0, plan, eps_couple, &mut noise, &options).map(|o| !o.coupled)
        })
        .collect::<Result<_>>()?;
    let k = events.iter().filter(|&&e| e).count() as u64;
    BatchEstimate::from_counts(k, n_paths as u64)
}

/// A functional of the pair `(X_t, Y_t)`.
pub type PairFunctional<'a, const D: usize> = &'a (dyn Fn(&[f64; D], &[f64; D]) -> Complex64 + Sync);

/// Indicator-weighted and plain means of a pair functional at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationEstimate {
    pub t: f64,
    /// `E[g(X_t, Y_t) 1(τ > t)]`.
    pub weighted: ComplexEstimate,
    /// `E[g(X_t, Y_t)]`.
    pub unweighted: ComplexEstimate,
}

/// Expectations and survival from one batch of coupled paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationGrid {
    /// Indexed `[functional][time]`.
    pub estimates: Vec<Vec<ExpectationEstimate>>,
    /// `P(τ > t)` per grid time.
    pub survival: Vec<BatchEstimate>,
}

/// Means of each functional at each grid time, from one batch of coupled
/// paths.
#[allow(clippy::too_many_arguments)]
pub fn estimate_expectation_grid<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x0: [f64; D],
    y0: [f64; D],
    plan: &StepPlan,
    eps_couple: f64,
    t_grid: &[f64],
    functionals: &[PairFunctional<'_, D>],
    n_paths: usize,
    seed: u64,
) -> Result<ExpectationGrid> {
    require_paths(n_paths)?;
    let steps = grid_steps(plan, t_grid)?;
    let last = steps.last().copied().unwrap_or(0);
    let run_plan = StepPlan { t_max: plan.time_of(last), ..*plan };
    let options = CoupledRunOptions {
        stop_at_coupling: false,
        snapshot_steps: steps.clone(),
        ..Default::default()
    };
    let outcomes: Vec<CoupledOutcome<D>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut noise = NoiseStream::new(seed, i);
            simulate_coupled(spec, strategy, x0, y0, &run_plan, eps_couple, &mut noise, &options)
        })
        .collect::<Result<_>>()?;
    let survival = steps
        .iter()
        .map(|&k| {
            let alive = outcomes.iter().filter(|o| o.survives_step(k)).count();
            BatchEstimate::from_counts(alive as u64, n_paths as u64)
        })
        .collect::<Result<_>>()?;
    let estimates = functionals
        .iter()
        .map(|g| {
            steps
                .iter()
                .enumerate()
                .map(|(j, &k)| {
                    let plain: Vec<Complex64> = outcomes.iter().map(|o| g(&o.snapshots[j].0, &o.snapshots[j].1)).collect();
                    let weighted: Vec<Complex64> = outcomes
                        .iter()
                        .zip(&plain)
                        .map(|(o, v)| if o.survives_step(k) { *v } else { Complex64::new(0.0, 0.0) })
                        .collect();
                    Ok(ExpectationEstimate {
                        t: t_grid[j],
                        weighted: ComplexEstimate::from_samples(&weighted)?,
                        unweighted: ComplexEstimate::from_samples(&plain)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(ExpectationGrid { estimates, survival })
}

/// Single-time, single-functional form of [`estimate_expectation_grid`].
#[allow(clippy::too_many_arguments)]
pub fn estimate_expectation<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x0: [f64; D],
    y0: [f64; D],
    plan: &StepPlan,
    eps_couple: f64,
    t: f64,
    functional: PairFunctional<'_, D>,
    n_paths: usize,
    seed: u64,
) -> Result<ExpectationEstimate> {
    let mut v = estimate_expectation_grid(spec, strategy, x0, y0, plan, eps_couple, &[t], &[functional], n_paths, seed)?;
    Ok(v.estimates.remove(0).remove(0))
}

/// Minimum eigenvalues of the joint diffusion matrix and of `Â` at one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdSample {
    pub min_eig_joint: f64,
    pub min_eig_hat: f64,
    pub trace_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub strategy: CouplingStrategy,
    pub samples: Vec<PsdSample>,
    pub min_eig_joint: f64,
    pub min_eig_hat: f64,
}

/// Correlation `E[ξ ηᵀ]` between the two noises at `(x, y)`.
fn noise_correlation<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x: &[f64; D],
    y: &[f64; D],
) -> Result<DMatrix<f64>> {
    match strategy {
        CouplingStrategy::Synchronous => Ok(DMatrix::identity(D, D)),
        CouplingStrategy::Independent => Ok(DMatrix::zeros(D, D)),
        CouplingStrategy::Mirror => {
            if !spec.supports_mirror() {
                return Err(Error::MirrorUnsupported(spec.name()));
            }
            // η = M ξ, so E[ξ ηᵀ] = Mᵀ; column j of M is the image of e_j.
            let mut m = DMatrix::zeros(D, D);
            for j in 0..D {
                let mut e = [0.0; D];
                e[j] = 1.0;
                let col = spec.mirror_noise(x, y, &e).ok_or(Error::AlreadyCoupled)?;
                for i in 0..D {
                    m[(i, j)] = col[i];
                }
            }
            Ok(m.transpose())
        }
    }
}

fn to_dmatrix<const D: usize>(a: &[[f64; D]; D]) -> DMatrix<f64> {
    DMatrix::from_fn(D, D, |i, j| a[i][j])
}

/// Joint diffusion matrix `[[AAᵀ(x), C], [Cᵀ, AAᵀ(y)]]` with
/// `C = A(x) ρ Aᵀ(y)`, and `Â = AAᵀ(x) + AAᵀ(y) − C − Cᵀ`.
pub fn joint_matrices<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x: &[f64; D],
    y: &[f64; D],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let ax = to_dmatrix(&spec.diffusion(x));
    let ay = to_dmatrix(&spec.diffusion(y));
    let rho = noise_correlation(spec, strategy, x, y)?;
    let c = &ax * rho * ay.transpose();
    let gx = &ax * ax.transpose();
    let gy = &ay * ay.transpose();
    let mut joint = DMatrix::zeros(2 * D, 2 * D);
    joint.view_mut((0, 0), (D, D)).copy_from(&gx);
    joint.view_mut((D, D), (D, D)).copy_from(&gy);
    joint.view_mut((0, D), (D, D)).copy_from(&c);
    joint.view_mut((D, 0), (D, D)).copy_from(&c.transpose());
    let hat = gx + gy - &c - c.transpose();
    Ok((joint, hat))
}

fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    let sym = (&m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Minimum eigenvalues of the joint matrix and of `Â` over sampled pairs.
pub fn joint_matrix_psd_probe<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    pairs: &[([f64; D], [f64; D])],
) -> Result<PsdReport> {
    let samples = pairs
        .iter()
        .map(|(x, y)| {
            let (joint, hat) = joint_matrices(spec, strategy, x, y)?;
            Ok(PsdSample {
                trace_hat: hat.trace(),
                min_eig_joint: min_eigenvalue(joint),
                min_eig_hat: min_eigenvalue(hat),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PsdReport {
        strategy,
        min_eig_joint: samples.iter().map(|s| s.min_eig_joint).fold(f64::INFINITY, f64::min),
        min_eig_hat: samples.iter().map(|s| s.min_eig_hat).fold(f64::INFINITY, f64::min),
        samples,
    })
}

/// `Tr Â(x, y)`: the initial rate of change of `E|X_t − Y_t|²`.
pub fn trace_hat<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    strategy: CouplingStrategy,
    x: &[f64; D],
    y: &[f64; D],
) -> Result<f64> {
    Ok(joint_matrices(spec, strategy, x, y)?.1.trace())
}

/// Initial drift of `E|X_t − Y_t|²` under the synchronous coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareDistanceDrift {
    /// `Tr Â(x0, y0)`.
    pub trace_hat: f64,
    /// Fitted linear coefficient, with the standard error across paths.
    pub drift: BatchEstimate,
    pub times: Vec<f64>,
    /// Control-variate means of `|X_t − Y_t|² − |x0 − y0|²`.
    pub increments: Vec<f64>,
    /// Paths discarded after a domain exit.
    pub excluded: u64,
}

/// Fits `E|X_t − Y_t|² − |x0 − y0|² ≈ αt + βt² + γt³` on `n_fit` equally spaced
/// times in `(0, horizon]` and reports `α`.
///
/// The Itô martingale `Σ 2 (X − Y) · (A(X) − A(Y)) ΔB` is subtracted
/// pathwise; it has mean zero and carries almost all of the variance.
#[allow(clippy::too_many_arguments)]
pub fn synchronous_square_distance_drift<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    x0: [f64; D],
    y0: [f64; D],
    dt: f64,
    horizon: f64,
    n_fit: usize,
    n_paths: usize,
    seed: u64,
) -> Result<SquareDistanceDrift> {
    require_paths(n_paths)?;
    if n_fit < 3 {
        return Err(invalid("n_fit", "need at least three fit times"));
    }
    let plan = StepPlan::new(dt, horizon)?;
    let times: Vec<f64> = (1..=n_fit).map(|k| horizon * k as f64 / n_fit as f64).collect();
    let steps = grid_steps(&plan, &times)?;
    let n = plan.n_steps();
    let sq = |a: &[f64; D], b: &[f64; D]| (0..D).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>();
    let d0 = sq(&x0, &y0);

    // Least-squares weights of α for the design [t, t², t³].
    let design = DMatrix::from_fn(times.len(), 3, |r, c| times[r].powi(c as i32 + 1));
    let normal = design.transpose() * &design;
    let inv = normal.try_inverse().ok_or_else(|| invalid("n_fit", "singular fit design"))?;
    let weights: Vec<f64> = (inv * design.transpose()).row(0).iter().copied().collect();

    let per_path: Vec<Option<Vec<f64>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut noise = NoiseStream::new(seed, i);
            let (mut x, mut y) = (x0, y0);
            let mut mart = 0.0;
            let mut out = Vec::with_capacity(steps.len());
            let mut next = steps.iter().peekable();
            let sdt = dt.sqrt();
            for k in 0..n {
                let xi = noise.gaussians::<D>();
                let (ax, ay) = (spec.diffusion(&x), spec.diffusion(&y));
                for r in 0..D {
                    let diff: f64 = (0..D).map(|j| (ax[r][j] - ay[r][j]) * xi[j]).sum();
                    mart += 2.0 * (x[r] - y[r]) * diff * sdt;
                }
                x = euler_step(spec, &x, dt, &xi).ok()?;
                y = euler_step(spec, &y, dt, &xi).ok()?;
                while next.next_if(|&&s| s == k + 1).is_some() {
                    out.push(sq(&x, &y) - d0 - mart);
                }
            }
            Some(out)
        })
        .collect();
    let good: Vec<&Vec<f64>> = per_path.iter().flatten().collect();
    let excluded = (n_paths - good.len()) as u64;
    let alphas: Vec<f64> = good.iter().map(|v| v.iter().zip(&weights).map(|(m, w)| m * w).sum()).collect();
    let increments = (0..times.len())
        .map(|j| good.iter().map(|v| v[j]).sum::<f64>() / good.len().max(1) as f64)
        .collect();
    Ok(SquareDistanceDrift {
        trace_hat: trace_hat(spec, CouplingStrategy::Synchronous, &x0, &y0)?,
        drift: BatchEstimate::from_samples(&alphas)?,
        times,
        increments,
        excluded,
    })
}

/// Survival `P(r_t > 0 for s ≤ t)` of a one-dimensional comparison process.
///
/// With `escape_level`, paths reaching it stop and count as survivors.
pub fn estimate_absorption_survival(
    process: &ComparisonDiffusion1D,
    plan: &StepPlan,
    t_grid: &[f64],
    n_paths: usize,
    seed: u64,
    escape_level: Option<f64>,
) -> Result<SurvivalCurve> {
    require_paths(n_paths)?;
    let steps = grid_steps(plan, t_grid)?;
    let last = steps.last().copied().unwrap_or(0);
    let run_plan = StepPlan { t_max: plan.time_of(last), ..*plan };
    let mut spec = OneDimSpec::new(*process, plan.dt)?;
    if let Some(l) = escape_level {
        spec = spec.with_escape_level(l);
    }
    let exit_steps: Vec<Option<usize>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut noise = NoiseStream::new(seed, i);
            simulate_path(&spec, [process.r0], &run_plan, &mut noise, None)
                .map(|s| s.exit_time.map(|t| run_plan.index_of(t).unwrap_or(usize::MAX)))
        })
        .collect::<Result<_>>()?;
    let estimates = steps
        .iter()
        .map(|&k| {
            let alive = exit_steps.iter().filter(|e| e.is_none_or(|s| s > k)).count();
            BatchEstimate::from_counts(alive as u64, n_paths as u64)
        })
        .collect::<Result<_>>()?;
    Ok(SurvivalCurve {
        t: t_grid.to_vec(),
        estimates,
        domain_exits: exit_steps.iter().filter(|e| e.is_some()).count() as u64,
    })
}

/// Terminal states `X_t` of the uncoupled diffusion, for marginal-law checks.
pub fn sample_marginal<const D: usize, S: DiffusionSpec<D> + ?Sized>(
    spec: &S,
    x0: [f64; D],
    plan: &StepPlan,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<[f64; D]>> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(spec, x0, plan, &mut NoiseStream::new(seed, i), None).map(|s| s.terminal))
        .collect()
}

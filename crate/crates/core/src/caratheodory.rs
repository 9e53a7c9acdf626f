//! Carathéodory quantities on the disk and the unit ball, holomorphic test
//! functions into the disk, and the Monte Carlo estimator
//! `sup_f |E[(f(X_t) − f(Y_t)) 1(τ > t)]|`.
//!
//! Distances use the Möbius (tanh) normalisation, in which the Carathéodory
//! distance of the disk between 0.5 and 0 is 0.5. On the ball Bⁿ the
//! Carathéodory–Reiffen metric and the Bergman metric differ by the
//! constant `√(n + 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::comparison::gradient_bound;
use crate::coupling::{estimate_expectation_grid, CouplingStrategy, PairFunctional};
use crate::error::{invalid, Error, Result};
use crate::geometry::{moebius_pseudo_distance, BallPoint4, CurvatureProfile, DiskPoint};
use crate::sde::{complex_of, ComplexHyperbolicBm, DiffusionSpec, PoincareDiskBm, StepPlan};
use crate::stats::{BatchEstimate, ComplexEstimate};

/// Tolerance for `f(anchor) = 0`.
pub const ANCHOR_TOL: f64 = 1e-12;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Holomorphic maps into the unit disk.
///
/// Disk members act on the Poincaré disk chart; `CoordinateSlice` acts on the
/// unit ball of ℂ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HolomorphicTestFunction {
    /// `φ_a(z) = (z − a) / (1 − ā z)`, vanishing at `a`.
    Moebius { a: [f64; 2] },
    /// `e^{iθ} φ_a(z)`.
    RotatedMoebius { a: [f64; 2], phase: f64 },
    /// `φ_a(z)^k`.
    Power { a: [f64; 2], k: u32 },
    Zero,
    /// Coordinate `index` of the ball automorphism exchanging `center` and 0.
    CoordinateSlice { index: usize, center: [f64; 4] },
}

fn moebius(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (ONE - a.conj() * z)
}

/// The involutive ball automorphism `φ_a` with `φ_a(a) = 0`.
pub fn ball_automorphism(a: [Complex64; 2], z: [Complex64; 2]) -> [Complex64; 2] {
    let inner = |u: &[Complex64; 2], v: &[Complex64; 2]| u[0] * v[0].conj() + u[1] * v[1].conj();
    let a2 = inner(&a, &a).re;
    let za = inner(&z, &a);
    let denom = ONE - za;
    if a2 == 0.0 {
        return [-z[0], -z[1]];
    }
    let s = (1.0 - a2).sqrt();
    std::array::from_fn(|i| {
        let proj = za / a2 * a[i];
        (a[i] - proj - s * (z[i] - proj)) / denom
    })
}

impl HolomorphicTestFunction {
    pub fn name(&self) -> String {
        match self {
            Self::Moebius { a } => format!("moebius({}, {})", a[0], a[1]),
            Self::RotatedMoebius { a, phase } => format!("rotated_moebius({}, {}; {phase})", a[0], a[1]),
            Self::Power { a, k } => format!("moebius({}, {})^{k}", a[0], a[1]),
            Self::Zero => "zero".into(),
            Self::CoordinateSlice { index, center } => format!("slice{index}({center:?})"),
        }
    }

    /// Value at a chart state: `[re, im]` on the disk, `[a1, b1, a2, b2]` on
    /// the ball.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        let disk = |x: &[f64]| -> Result<Complex64> {
            match x {
                [re, im] => Ok(Complex64::new(*re, *im)),
                _ => Err(invalid("f", format!("{} acts on the disk, got a {}-dimensional state", self.name(), x.len()))),
            }
        };
        let c = |a: &[f64; 2]| Complex64::new(a[0], a[1]);
        match self {
            Self::Moebius { a } => Ok(moebius(c(a), disk(x)?)),
            Self::RotatedMoebius { a, phase } => Ok(Complex64::from_polar(1.0, *phase) * moebius(c(a), disk(x)?)),
            Self::Power { a, k } => Ok(moebius(c(a), disk(x)?).powu(*k)),
            Self::Zero => Ok(Complex64::new(0.0, 0.0)),
            Self::CoordinateSlice { index, center } => {
                let [a1, b1, a2, b2] = match x {
                    [a1, b1, a2, b2] => [*a1, *b1, *a2, *b2],
                    _ => return Err(invalid("f", format!("{} acts on the ball of C^2", self.name()))),
                };
                if *index > 1 {
                    return Err(invalid("index", format!("coordinate index {index} out of range")));
                }
                let ctr = BallPoint4::new(*center)?.complex();
                let w = ball_automorphism(ctr, [Complex64::new(a1, b1), Complex64::new(a2, b2)]);
                Ok(w[*index])
            }
        }
    }

    /// Checks `|f(anchor)| ≤ ANCHOR_TOL`.
    pub fn check_anchor(&self, anchor: &[f64]) -> Result<()> {
        let v = self.evaluate(anchor)?.norm();
        if v > ANCHOR_TOL {
            Err(Error::NotAnchored { name: self.name(), value: v })
        } else {
            Ok(())
        }
    }
}

/// Test functions vanishing at `y` on the disk: rotations of the extremal
/// automorphism at `n_phases` equally spaced phases, plus its powers 2..=`max_power`.
pub fn disk_family(y: DiskPoint, n_phases: usize, max_power: u32) -> Vec<HolomorphicTestFunction> {
    let a = y.to_array();
    let mut out: Vec<_> = (0..n_phases.max(1))
        .map(|j| HolomorphicTestFunction::RotatedMoebius {
            a,
            phase: std::f64::consts::TAU * j as f64 / n_phases.max(1) as f64,
        })
        .collect();
    out.extend((2..=max_power).map(|k| HolomorphicTestFunction::Power { a, k }));
    out
}

/// Carathéodory distance of the disk (Möbius normalisation).
pub fn caratheodory_disk(x: DiskPoint, y: DiskPoint) -> f64 {
    moebius_pseudo_distance(x, y)
}

/// Carathéodory distance of the unit ball of ℂ² (Möbius normalisation),
/// `√(1 − (1 − |p|²)(1 − |q|²) / |1 − ⟨p, q⟩|²)`.
pub fn caratheodory_ball(p: BallPoint4, q: BallPoint4) -> f64 {
    let [p1, p2] = p.complex();
    let [q1, q2] = q.complex();
    let inner = p1 * q1.conj() + p2 * q2.conj();
    let ratio = (1.0 - p.norm_sqr()) * (1.0 - q.norm_sqr()) / (ONE - inner).norm_sqr();
    (1.0 - ratio).max(0.0).sqrt()
}

/// Carathéodory–Reiffen metric of the unit ball of ℂⁿ,
/// `[‖v‖² / (1 − ‖p‖²) + |⟨p, v⟩|² / (1 − ‖p‖²)²]^½`.
pub fn caratheodory_reiffen_chn(p: &[Complex64], v: &[Complex64]) -> Result<f64> {
    if p.len() != v.len() || p.is_empty() {
        return Err(invalid("v", format!("dimension {} does not match the point's {}", v.len(), p.len())));
    }
    let p2: f64 = p.iter().map(|c| c.norm_sqr()).sum();
    if !(p2 < 1.0) {
        return Err(Error::OutsideDomain {
            chart: "ball",
            point: p.iter().flat_map(|c| [c.re, c.im]).collect(),
            norm: p2.sqrt(),
        });
    }
    let v2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let pv: Complex64 = p.iter().zip(v).map(|(a, b)| b * a.conj()).sum();
    let d = 1.0 - p2;
    Ok((v2 / d + pv.norm_sqr() / (d * d)).sqrt())
}

/// Ratio between the Bergman metric and the Carathéodory–Reiffen metric on
/// the unit ball of ℂⁿ.
pub fn bergman_ratio(n: u32) -> f64 {
    (f64::from(n) + 1.0).sqrt()
}

/// A chart whose states can be fed to holomorphic test functions and that
/// has a closed-form Carathéodory distance.
pub trait HolomorphicChart<const D: usize>: DiffusionSpec<D> {
    fn caratheodory(&self, x: &[f64; D], y: &[f64; D]) -> Result<f64>;
}

impl HolomorphicChart<2> for PoincareDiskBm {
    fn caratheodory(&self, x: &[f64; 2], y: &[f64; 2]) -> Result<f64> {
        Ok(caratheodory_disk(DiskPoint::from_complex(complex_of(x))?, DiskPoint::from_complex(complex_of(y))?))
    }
}

impl HolomorphicChart<4> for ComplexHyperbolicBm {
    fn caratheodory(&self, x: &[f64; 4], y: &[f64; 4]) -> Result<f64> {
        Ok(caratheodory_ball(BallPoint4::new(*x)?, BallPoint4::new(*y)?))
    }
}

/// Monte Carlo estimate of one test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberEstimate {
    pub function: HolomorphicTestFunction,
    /// `E[(f(X_t) − f(Y_t)) 1(τ > t)]`.
    pub weighted: ComplexEstimate,
    /// `E[f(X_t) − f(Y_t)]`.
    pub unweighted: ComplexEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaratheodoryReport {
    pub t: f64,
    pub closed_form: f64,
    /// Largest modulus of the weighted means over the family.
    pub stochastic_estimate: BatchEstimate,
    /// Index of the family member attaining the sup.
    pub best: Option<usize>,
    pub survival: BatchEstimate,
    /// `2 P̂(τ > t)`.
    pub survival_bound: f64,
    /// Modulus of `E[(X_t − Y_t) 1(τ > t)]` on the disk.
    pub schwarz_rhs: Option<f64>,
    pub members: Vec<MemberEstimate>,
}

impl CaratheodoryReport {
    /// Whether the closed form lies below `2 P̂(τ > t) + 3 se`.
    pub fn survival_bound_holds(&self) -> bool {
        self.closed_form <= self.survival_bound + 3.0 * 2.0 * self.survival.se
    }
}

fn modulus_estimate(e: &ComplexEstimate) -> BatchEstimate {
    let m = e.modulus();
    let se = e.se();
    BatchEstimate {
        n: e.re.n,
        k: None,
        point: m,
        se,
        interval: ((m - crate::stats::Z95 * se).max(0.0), m + crate::stats::Z95 * se),
    }
}

/// Estimates `sup_f |E[(f(X_t) − f(Y_t)) 1(τ > t)]|` over `family`, together
/// with `2 P̂(τ > t)` from the same paths.
#[allow(clippy::too_many_arguments)]
pub fn stochastic_caratheodory<const D: usize, S: HolomorphicChart<D>>(
    spec: &S,
    strategy: CouplingStrategy,
    x: [f64; D],
    y: [f64; D],
    t: f64,
    family: &[HolomorphicTestFunction],
    plan: &StepPlan,
    eps_couple: f64,
    n_paths: usize,
    seed: u64,
) -> Result<CaratheodoryReport> {
    let mut v = stochastic_caratheodory_grid(spec, strategy, x, y, &[t], family, plan, eps_couple, n_paths, seed)?;
    Ok(v.remove(0))
}

/// [`stochastic_caratheodory`] at every time of `t_grid`, from one batch.
#[allow(clippy::too_many_arguments)]
pub fn stochastic_caratheodory_grid<const D: usize, S: HolomorphicChart<D>>(
    spec: &S,
    strategy: CouplingStrategy,
    x: [f64; D],
    y: [f64; D],
    t_grid: &[f64],
    family: &[HolomorphicTestFunction],
    plan: &StepPlan,
    eps_couple: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<CaratheodoryReport>> {
    for f in family {
        f.check_anchor(&y)?;
        f.evaluate(&x)?;
    }
    type Boxed<const D: usize> = Box<dyn Fn(&[f64; D], &[f64; D]) -> Complex64 + Sync>;
    let mut diffs: Vec<Boxed<D>> = family
        .iter()
        .map(|f| {
            let f = *f;
            Box::new(move |a: &[f64; D], b: &[f64; D]| f.evaluate(a).unwrap_or_default() - f.evaluate(b).unwrap_or_default())
                as Boxed<D>
        })
        .collect();
    let with_identity = D == 2;
    if with_identity {
        diffs.push(Box::new(|a: &[f64; D], b: &[f64; D]| Complex64::new(a[0] - b[0], a[1] - b[1])));
    }
    let refs: Vec<PairFunctional<'_, D>> = diffs.iter().map(|b| b.as_ref() as PairFunctional<'_, D>).collect();
    let grid = estimate_expectation_grid(spec, strategy, x, y, plan, eps_couple, t_grid, &refs, n_paths, seed)?;
    let closed_form = spec.caratheodory(&x, &y)?;

    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let survival = grid.survival[j];
            let members: Vec<MemberEstimate> = family
                .iter()
                .zip(&grid.estimates)
                .map(|(f, e)| MemberEstimate {
                    function: *f,
                    weighted: e[j].weighted,
                    unweighted: e[j].unweighted,
                })
                .collect();
            let schwarz_rhs = with_identity.then(|| grid.estimates[family.len()][j].weighted.modulus());
            let best = (0..members.len())
                .max_by(|&a, &b| members[a].weighted.modulus().total_cmp(&members[b].weighted.modulus()));
            let stochastic_estimate = match best {
                Some(i) => modulus_estimate(&members[i].weighted),
                None => BatchEstimate {
                    n: n_paths as u64,
                    k: None,
                    point: 0.0,
                    se: 0.0,
                    interval: (0.0, 0.0),
                },
            };
            CaratheodoryReport {
                t,
                closed_form,
                stochastic_estimate,
                best,
                survival_bound: 2.0 * survival.point,
                survival,
                schwarz_rhs,
                members,
            }
        })
        .collect())
}

/// Both sides of the stochastic Schwarz inequality on the disk with `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzCheck {
    pub function: HolomorphicTestFunction,
    pub x: [f64; 2],
    pub t: f64,
    /// `|E[(f(X_t) − f(Y_t)) 1(τ > t)]|`.
    pub lhs: f64,
    /// `|E[(X_t − Y_t) 1(τ > t)]|`.
    pub rhs: f64,
    pub combined_se: f64,
    pub holds: bool,
}

/// Estimates both sides from one batch; `holds` is `lhs ≤ rhs + 3 se`.
#[allow(clippy::too_many_arguments)]
pub fn disk_schwarz_check(
    f: HolomorphicTestFunction,
    x: DiskPoint,
    t: f64,
    strategy: CouplingStrategy,
    plan: &StepPlan,
    eps_couple: f64,
    n_paths: usize,
    seed: u64,
) -> Result<SchwarzCheck> {
    Ok(disk_schwarz_checks(&[f], x, t, strategy, plan, eps_couple, n_paths, seed)?.remove(0))
}

/// [`disk_schwarz_check`] for several functions on one batch of paths.
#[allow(clippy::too_many_arguments)]
pub fn disk_schwarz_checks(
    fs: &[HolomorphicTestFunction],
    x: DiskPoint,
    t: f64,
    strategy: CouplingStrategy,
    plan: &StepPlan,
    eps_couple: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<SchwarzCheck>> {
    for f in fs {
        f.check_anchor(&[0.0, 0.0])?;
    }
    let diffs: Vec<_> = fs
        .iter()
        .map(|&f| move |a: &[f64; 2], b: &[f64; 2]| f.evaluate(a).unwrap_or_default() - f.evaluate(b).unwrap_or_default())
        .collect();
    let id = |a: &[f64; 2], b: &[f64; 2]| Complex64::new(a[0] - b[0], a[1] - b[1]);
    let mut refs: Vec<PairFunctional<'_, 2>> = diffs.iter().map(|d| d as PairFunctional<'_, 2>).collect();
    refs.push(&id);
    let grid = estimate_expectation_grid(&PoincareDiskBm, strategy, x.to_array(), [0.0, 0.0], plan, eps_couple, &[t], &refs, n_paths, seed)?;
    let r = grid.estimates[fs.len()][0].weighted;
    Ok(fs
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let l = grid.estimates[i][0].weighted;
            let combined_se = l.se().hypot(r.se());
            SchwarzCheck {
                function: f,
                x: x.to_array(),
                t,
                lhs: l.modulus(),
                rhs: r.modulus(),
                combined_se,
                holds: l.modulus() <= r.modulus() + 3.0 * combined_se,
            }
        })
        .collect())
}

/// Bounded harmonic functions on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HarmonicFunction {
    Constant { value: f64 },
    /// `Re z`.
    RealPart,
    /// Poisson extension of the indicator of the boundary arc from angle
    /// `start` to `end` (counter-clockwise).
    ArcMeasure { start: f64, end: f64 },
}

impl HarmonicFunction {
    pub fn value(&self, z: Complex64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::RealPart => z.re,
            Self::ArcMeasure { start, end } => {
                let (a, b) = (Complex64::from_polar(1.0, start), Complex64::from_polar(1.0, end));
                ((b - z) / (a - z)).arg().rem_euclid(std::f64::consts::TAU) / std::f64::consts::PI - (end - start) / std::f64::consts::TAU
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            Self::Constant { value } => value.abs(),
            Self::RealPart | Self::ArcMeasure { .. } => 1.0,
        }
    }

    /// Poisson integral of the boundary values, by the midpoint rule.
    pub fn poisson_quadrature(&self, z: Complex64, n: usize) -> f64 {
        let boundary = |theta: f64| -> f64 {
            match *self {
                Self::Constant { value } => value,
                Self::RealPart => theta.cos(),
                Self::ArcMeasure { start, end } => {
                    let rel = (theta - start).rem_euclid(std::f64::consts::TAU);
                    if rel < end - start {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
        };
        let r2 = z.norm_sqr();
        let h = std::f64::consts::TAU / n as f64;
        (0..n)
            .map(|j| {
                let theta = (j as f64 + 0.5) * h;
                let e = Complex64::from_polar(1.0, theta);
                boundary(theta) * (1.0 - r2) / (e - z).norm_sqr()
            })
            .sum::<f64>()
            * h
            / std::f64::consts::TAU
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub x: [f64; 2],
    /// Hyperbolic norm of the gradient.
    pub grad_norm: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Finite-difference step of the gradient check.
pub const GRADIENT_STEP: f64 = 1e-5;

/// Compares `|∇u(x)|_g` with the gradient bound for `‖u‖∞`.
///
/// The Euclidean gradient uses central differences with one Richardson
/// extrapolation; the hyperbolic norm is `(1 − |x|²)/2 · |∇u|`.
pub fn harmonic_gradient_check(u: &HarmonicFunction, x: DiskPoint, profile: &CurvatureProfile) -> Result<GradientCheck> {
    let z = x.z();
    let central = |dir: Complex64, h: f64| (u.value(z + dir * h) - u.value(z - dir * h)) / (2.0 * h);
    let richardson = |dir: Complex64| {
        let h = GRADIENT_STEP;
        (4.0 * central(dir, h / 2.0) - central(dir, h)) / 3.0
    };
    let gx = richardson(Complex64::new(1.0, 0.0));
    let gy = richardson(Complex64::new(0.0, 1.0));
    let grad_norm = (1.0 - z.norm_sqr()) / 2.0 * gx.hypot(gy);
    let bound = gradient_bound(profile, u.sup_norm())?;
    Ok(GradientCheck {
        x: x.to_array(),
        grad_norm,
        bound,
        holds: grad_norm <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_distance_examples() {
        let x = DiskPoint::new(0.5, 0.0).unwrap();
        assert_eq!(caratheodory_disk(x, DiskPoint::ORIGIN), 0.5);
        assert_eq!(caratheodory_disk(x, x), 0.0);
    }

    #[test]
    fn reiffen_examples() {
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        assert_abs_diff_eq!(caratheodory_reiffen_chn(&[c(0.0, 0.0); 2], &v).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(caratheodory_reiffen_chn(&[c(0.3, 0.1), c(0.0, 0.2)], &[c(0.0, 0.0); 2]).unwrap(), 0.0);
        // 1/0.75 + 0.25/0.5625 = 16/9
        assert_abs_diff_eq!(caratheodory_reiffen_chn(&[c(0.5, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert!(caratheodory_reiffen_chn(&[c(1.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn ball_distance_restricts_to_disk() {
        let p = BallPoint4::new([0.3, -0.2, 0.0, 0.0]).unwrap();
        let q = BallPoint4::new([-0.1, 0.5, 0.0, 0.0]).unwrap();
        let d = caratheodory_disk(DiskPoint::new(0.3, -0.2).unwrap(), DiskPoint::new(-0.1, 0.5).unwrap());
        assert_abs_diff_eq!(caratheodory_ball(p, q), d, epsilon = 1e-14);
    }

    #[test]
    fn ball_automorphism_is_involutive_and_anchored() {
        let a = [c(0.3, 0.1), c(-0.2, 0.4)];
        let z = [c(0.1, -0.5), c(0.2, 0.3)];
        let w = ball_automorphism(a, a);
        assert!(w[0].norm() < 1e-15 && w[1].norm() < 1e-15);
        let back = ball_automorphism(a, ball_automorphism(a, z));
        assert_abs_diff_eq!((back[0] - z[0]).norm() + (back[1] - z[1]).norm(), 0.0, epsilon = 1e-14);
        let w = ball_automorphism(a, [c(0.0, 0.0); 2]);
        assert_abs_diff_eq!(w[0].norm_sqr() + w[1].norm_sqr(), 0.3f64.powi(2) + 0.01 + 0.04 + 0.16, epsilon = 1e-14);
    }

    #[test]
    fn anchor_check() {
        let f = HolomorphicTestFunction::Moebius { a: [0.2, 0.1] };
        assert!(f.check_anchor(&[0.2, 0.1]).is_ok());
        assert!(matches!(f.check_anchor(&[0.0, 0.0]), Err(Error::NotAnchored { .. })));
        assert!(HolomorphicTestFunction::Zero.check_anchor(&[0.4, 0.0]).is_ok());
        let s = HolomorphicTestFunction::CoordinateSlice { index: 1, center: [0.1, 0.0, 0.2, 0.3] };
        assert!(s.check_anchor(&[0.1, 0.0, 0.2, 0.3]).is_ok());
    }

    #[test]
    fn arc_measure_matches_poisson_quadrature() {
        let u = HarmonicFunction::ArcMeasure { start: 0.0, end: std::f64::consts::PI };
        for z in [c(0.0, 0.0), c(0.3, 0.4), c(-0.5, -0.2), c(0.1, 0.8)] {
            assert_abs_diff_eq!(u.value(z), u.poisson_quadrature(z, 200_000), epsilon = 1e-4);
        }
        assert_abs_diff_eq!(u.value(c(0.0, 0.0)), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let p = CurvatureProfile::unit_disk();
        let g = harmonic_gradient_check(&HarmonicFunction::RealPart, DiskPoint::ORIGIN, &p).unwrap();
        assert_abs_diff_eq!(g.grad_norm, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(g.bound, 4.0, epsilon = 1e-15);
        assert!(g.holds);
        let g = harmonic_gradient_check(&HarmonicFunction::Constant { value: 0.7 }, DiskPoint::new(0.2, 0.1).unwrap(), &p).unwrap();
        assert_eq!(g.grad_norm, 0.0);
    }

    #[test]
    fn family_members_vanish_at_anchor() {
        let y = DiskPoint::new(0.1, -0.3).unwrap();
        for f in disk_family(y, 8, 3) {
            f.check_anchor(&y.to_array()).unwrap();
        }
    }
}

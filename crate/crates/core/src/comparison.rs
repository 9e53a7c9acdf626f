//! Closed-form comparison quantities for Kähler and quaternionic Kähler
//! manifolds with lower curvature bounds, and the one-dimensional comparison
//! diffusions they drive.
//!
//! Two comparison functions underlie everything here. `index_comparison`
//! (`G`) is the index form of the constant-curvature Jacobi field with unit
//! boundary values; `laplacian_comparison` (`F`) is the Laplacian of the
//! distance function of the constant-curvature model. The theorem-level
//! evaluators only accept `k1, k2 < 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{CurvatureFamily, CurvatureProfile};

/// `G(k, r)`: `-2√k tan(√k r / 2)` for `k > 0`, `0` for `k = 0`,
/// `2√|k| tanh(√|k| r / 2)` for `k < 0`.
pub fn index_comparison(k: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(invalid("r", format!("must be >= 0, got {r}")));
    }
    if k > 0.0 {
        let sk = k.sqrt();
        if sk * r >= std::f64::consts::PI {
            return Err(Error::Singularity { k, r });
        }
        Ok(-2.0 * sk * (0.5 * sk * r).tan())
    } else if k == 0.0 {
        Ok(0.0)
    } else {
        let sk = (-k).sqrt();
        Ok(2.0 * sk * (0.5 * sk * r).tanh())
    }
}

/// `F(k, r)`: `√k cot(√k r)` for `k > 0`, `1/r` for `k = 0`,
/// `√|k| coth(√|k| r)` for `k < 0`. Requires `r > 0`.
pub fn laplacian_comparison(k: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("r", format!("must be > 0, got {r}")));
    }
    if k > 0.0 {
        let sk = k.sqrt();
        if sk * r >= std::f64::consts::PI {
            return Err(Error::Singularity { k, r });
        }
        Ok(sk / (sk * r).tan())
    } else if k == 0.0 {
        Ok(1.0 / r)
    } else {
        let sk = (-k).sqrt();
        if r.is_infinite() {
            return Ok(sk);
        }
        Ok(sk / (sk * r).tanh())
    }
}

fn require_family(profile: &CurvatureProfile, family: CurvatureFamily) -> Result<()> {
    profile.validate_shape()?;
    if profile.family == family {
        Ok(())
    } else {
        Err(invalid(
            "family",
            format!("expected {family:?} profile, got {:?}", profile.family),
        ))
    }
}

/// Upper bound on the index of the mirror coupling at distance `d`,
/// `(2n − 2) G(k2, d) + 2 G(k1, 2d)`.
pub fn kahler_index_bound(profile: &CurvatureProfile, d: f64) -> Result<f64> {
    require_family(profile, CurvatureFamily::Kahler)?;
    let n = f64::from(profile.n);
    Ok((2.0 * n - 2.0) * index_comparison(profile.k2, d)? + 2.0 * index_comparison(profile.k1, 2.0 * d)?)
}

/// `(4n − 4) G(k2, d) + 6 G(k1, 2d)`.
pub fn quaternionic_index_bound(profile: &CurvatureProfile, d: f64) -> Result<f64> {
    require_family(profile, CurvatureFamily::Quaternionic)?;
    let n = f64::from(profile.n);
    Ok((4.0 * n - 4.0) * index_comparison(profile.k2, d)? + 6.0 * index_comparison(profile.k1, 2.0 * d)?)
}

/// Upper bound on the Laplacian of the distance from a point,
/// `(2n − 2) F(k2, r) + 2 F(k1, 2r)`.
pub fn kahler_laplacian_bound(profile: &CurvatureProfile, r: f64) -> Result<f64> {
    require_family(profile, CurvatureFamily::Kahler)?;
    let n = f64::from(profile.n);
    let orth = if profile.n > 1 {
        (2.0 * n - 2.0) * laplacian_comparison(profile.k2, r)?
    } else {
        0.0
    };
    Ok(orth + 2.0 * laplacian_comparison(profile.k1, 2.0 * r)?)
}

/// `(4n − 4) F(k2, r) + 6 F(k1, 2r)`.
pub fn quaternionic_laplacian_bound(profile: &CurvatureProfile, r: f64) -> Result<f64> {
    require_family(profile, CurvatureFamily::Quaternionic)?;
    let n = f64::from(profile.n);
    let orth = if profile.n > 1 {
        (4.0 * n - 4.0) * laplacian_comparison(profile.k2, r)?
    } else {
        0.0
    };
    Ok(orth + 6.0 * laplacian_comparison(profile.k1, 2.0 * r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    CouplingFailure,
    Schwarz,
    Gradient,
    ExitEvent,
}

/// A closed-form bound evaluated at a distance (or sup-norm) `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub profile: CurvatureProfile,
    pub rho: f64,
    pub value: f64,
    pub kind: BoundKind,
}

/// Rate constant shared by the coupling-failure and gradient bounds.
fn failure_rate(profile: &CurvatureProfile) -> Result<f64> {
    profile.validate_negative()?;
    let n1 = f64::from(profile.n) - 1.0;
    let (s1, s2) = ((-profile.k1).sqrt(), (-profile.k2).sqrt());
    Ok(match profile.family {
        CurvatureFamily::Kahler => 8.0 * (n1 * s2 + s1) + 2.0 * profile.m,
        CurvatureFamily::Quaternionic => 8.0 * n1 * s2 + 24.0 * s1 + 2.0 * profile.m,
    })
}

fn require_distance(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(invalid("rho", format!("must be a finite distance >= 0, got {rho}")))
    }
}

/// Upper bound on the probability that the mirror coupling never succeeds
/// from two points at geodesic distance `rho`.
pub fn coupling_failure_bound(profile: &CurvatureProfile, rho: f64) -> Result<BoundReport> {
    require_distance(rho)?;
    Ok(BoundReport {
        profile: *profile,
        rho,
        value: failure_rate(profile)? * rho,
        kind: BoundKind::CouplingFailure,
    })
}

/// Carathéodory distance bound `16((n − 1)√|k2| + √|k1|) ρ` for driftless
/// Kähler manifolds.
pub fn schwarz_bound(profile: &CurvatureProfile, rho: f64) -> Result<BoundReport> {
    require_family(profile, CurvatureFamily::Kahler)?;
    profile.validate_negative()?;
    require_distance(rho)?;
    if profile.m != 0.0 {
        return Err(invalid("m", "the Schwarz bound requires a driftless generator (m = 0)"));
    }
    let n1 = f64::from(profile.n) - 1.0;
    let value = 4.0 * (4.0 * (n1 * (-profile.k2).sqrt() + (-profile.k1).sqrt())) * rho;
    Ok(BoundReport {
        profile: *profile,
        rho,
        value,
        kind: BoundKind::Schwarz,
    })
}

/// Gradient bound for bounded positive harmonic functions, in terms of the
/// sup-norm.
pub fn gradient_bound(profile: &CurvatureProfile, sup_norm: f64) -> Result<f64> {
    if !(sup_norm.is_finite() && sup_norm >= 0.0) {
        return Err(invalid("sup_norm", format!("must be >= 0, got {sup_norm}")));
    }
    Ok(failure_rate(profile)? * sup_norm)
}

/// Constant drift `b` of the comparison process for the mirror-coupling
/// distance, `4(n − 1)√|k2| + 4√|k1| + 2m`.
pub fn comparison_drift_kahler(profile: &CurvatureProfile) -> Result<f64> {
    require_family(profile, CurvatureFamily::Kahler)?;
    profile.validate_negative()?;
    let n1 = f64::from(profile.n) - 1.0;
    Ok(4.0 * n1 * (-profile.k2).sqrt() + 4.0 * (-profile.k1).sqrt() + 2.0 * profile.m)
}

/// Drift of the comparison process for the distance from the start point:
/// half the Laplacian bound (the generator is `½Δ + Z`) plus `m`.
pub fn eta_drift(profile: &CurvatureProfile, r: f64) -> Result<f64> {
    profile.validate_negative()?;
    Ok(0.5 * kahler_laplacian_bound(profile, r)? + profile.m)
}

/// Probability that `dr = σ dW + b dt`, started at `r0` and absorbed at 0,
/// ever reaches 0. Scale-function closed form.
pub fn absorption_probability(b: f64, sigma2: f64, r0: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(invalid("sigma2", format!("must be > 0, got {sigma2}")));
    }
    if r0 <= 0.0 || b <= 0.0 {
        return Ok(1.0);
    }
    Ok((-2.0 * b * r0 / sigma2).exp().min(1.0))
}

/// Upper bound on `P(τ0 > t)` for the diffusion generated by
/// `a d²/dr² + b d/dr` with constant `b`, started at `r0`:
///
/// `ξ(r0) · inf_{s > r0} { 1/ξ(s) + e^{c(s)} / √(aπt) }`
///
/// with `ξ(r) = (a/b)(1 − e^{−(b/a) r})` and `c(u) = max(0, (b/a) u)`.
/// `t = +∞` is accepted and gives the long-time limit.
///
/// The infimum is taken over a 256-point log grid on `(r0, 10⁴ max(1, r0)]`
/// and refined by golden-section search around the best grid point.
pub fn wang_bound(a: f64, b: f64, r0: f64, t: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("must be > 0, got {a}")));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(invalid("r0", format!("must be > 0, got {r0}")));
    }
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be > 0, got {t}")));
    }
    if !b.is_finite() {
        return Err(invalid("b", "must be finite"));
    }
    let ratio = b / a;
    let xi = |r: f64| {
        if ratio == 0.0 {
            r
        } else {
            -(-ratio * r).exp_m1() / ratio
        }
    };
    let time_factor = if t.is_infinite() {
        0.0
    } else {
        1.0 / (a * std::f64::consts::PI * t).sqrt()
    };
    let infimand = |s: f64| {
        let tail = if time_factor == 0.0 {
            0.0
        } else {
            (ratio * s).max(0.0).exp() * time_factor
        };
        1.0 / xi(s) + tail
    };

    const GRID: usize = 256;
    let upper = 1e4 * r0.max(1.0);
    let log_span = (upper / r0).ln();
    let node = |i: usize| r0 * (log_span * i as f64 / GRID as f64).exp();
    let (mut best_i, mut best) = (1, f64::INFINITY);
    for i in 1..=GRID {
        let v = infimand(node(i));
        if v < best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement on the bracketing grid cells
    let (mut lo, mut hi) = (node(best_i - 1), node((best_i + 1).min(GRID)));
    if lo <= r0 {
        lo = r0 * (1.0 + 1e-12);
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (infimand(c), infimand(d));
    for _ in 0..200 {
        if (hi - lo) <= 1e-13 * hi {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = infimand(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = infimand(d);
        }
    }
    best = best.min(fc).min(fd);
    Ok(xi(r0) * best)
}

/// Both sides of the reduction of the Kähler index bound to a Ricci bound,
/// `(2n − 2) G(k2, r) + 2 G(k1, 2r) <= (2n − 1) G((4k1 + (2n − 2)k2)/(2n − 1), r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciReduction {
    pub n: u32,
    pub k1: f64,
    pub k2: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn ricci_reduction_check(n: u32, k1: f64, k2: f64, r: f64) -> Result<RicciReduction> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    if k1 > 0.0 || k2 > 0.0 {
        return Err(invalid("k1/k2", "the reduction is stated for k1, k2 <= 0"));
    }
    let nf = f64::from(n);
    let lhs = (2.0 * nf - 2.0) * index_comparison(k2, r)? + 2.0 * index_comparison(k1, 2.0 * r)?;
    let k_ricci = (4.0 * k1 + (2.0 * nf - 2.0) * k2) / (2.0 * nf - 1.0);
    let rhs = (2.0 * nf - 1.0) * index_comparison(k_ricci, r)?;
    Ok(RicciReduction {
        n,
        k1,
        k2,
        r,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Evaluates the reduction on `n ∈ 1..=4`, `k1, k2 ∈ {−2, −1, −¼}` and 50
/// equally spaced radii in `(0, 5]`. Violations are returned, not asserted.
pub fn ricci_reduction_sweep() -> Vec<RicciReduction> {
    let ks = [-2.0, -1.0, -0.25];
    let mut out = Vec::with_capacity(4 * 9 * 50);
    for n in 1..=4 {
        for &k1 in &ks {
            for &k2 in &ks {
                for i in 1..=50 {
                    let r = 0.1 * f64::from(i);
                    out.push(ricci_reduction_check(n, k1, k2, r).expect("grid values are valid"));
                }
            }
        }
    }
    out
}

/// Drift law of a one-dimensional comparison diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ComparisonDrift {
    /// Constant drift `b`; the process is absorbed at 0.
    Constant { b: f64 },
    /// `eta_drift(profile, r)`; 0 is an entrance boundary.
    Eta { profile: CurvatureProfile },
}

/// A one-dimensional comparison diffusion `dr = √sigma2 dW + drift(r) dt`.
///
/// The coupling-distance process uses `sigma2 = 2` with a constant drift;
/// the distance-from-start process uses `sigma2 = 1` with `eta_drift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDiffusion1D {
    pub sigma2: f64,
    pub drift: ComparisonDrift,
    pub r0: f64,
}

impl ComparisonDiffusion1D {
    pub fn constant(b: f64, sigma2: f64, r0: f64) -> Result<Self> {
        let d = Self {
            sigma2,
            drift: ComparisonDrift::Constant { b },
            r0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn eta(profile: CurvatureProfile) -> Result<Self> {
        profile.validate_negative()?;
        if profile.family != CurvatureFamily::Kahler {
            return Err(invalid("family", "the eta process uses the Kähler Laplacian bound"));
        }
        Ok(Self {
            sigma2: 1.0,
            drift: ComparisonDrift::Eta { profile },
            r0: 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid("sigma2", format!("must be > 0, got {}", self.sigma2)));
        }
        if !(self.r0 >= 0.0 && self.r0.is_finite()) {
            return Err(invalid("r0", format!("must be >= 0, got {}", self.r0)));
        }
        if let ComparisonDrift::Constant { b } = self.drift {
            if !b.is_finite() {
                return Err(invalid("b", "must be finite"));
            }
        }
        Ok(())
    }

    /// Drift at `r`; for the eta process this is singular as `r → 0`.
    pub fn drift_at(&self, r: f64) -> f64 {
        match self.drift {
            ComparisonDrift::Constant { b } => b,
            ComparisonDrift::Eta { profile } => {
                eta_drift(&profile, r).expect("validated profile, r > 0")
            }
        }
    }

    /// Closed-form probability of ever reaching 0 (constant drift only).
    pub fn absorption_probability(&self) -> Option<f64> {
        match self.drift {
            ComparisonDrift::Constant { b } => absorption_probability(b, self.sigma2, self.r0).ok(),
            ComparisonDrift::Eta { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// tanh from its exponential series; independent of the libm routine.
    fn tanh_series(x: f64) -> f64 {
        let (mut sinh, mut cosh) = (0.0, 0.0);
        let mut term = 1.0;
        for k in 0..60 {
            if k % 2 == 0 {
                cosh += term;
            } else {
                sinh += term;
            }
            term *= x / f64::from(k + 1);
        }
        sinh / cosh
    }

    #[test]
    fn g_examples() {
        assert_eq!(index_comparison(0.0, 1.7).unwrap(), 0.0);
        assert_eq!(index_comparison(-1.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(index_comparison(-1.0, 2.0).unwrap(), 2.0 * tanh_series(1.0), epsilon = 1e-14);
        assert_abs_diff_eq!(index_comparison(-1.0, 2.0).unwrap(), 1.5231883119115298, epsilon = 1e-14);
        assert!(matches!(index_comparison(1.0, 4.0), Err(Error::Singularity { .. })));
        assert!(index_comparison(1.0, 1.0).unwrap() < 0.0);
    }

    #[test]
    fn f_examples() {
        assert_eq!(laplacian_comparison(0.0, 4.0).unwrap(), 0.25);
        assert_abs_diff_eq!(laplacian_comparison(-1.0, 1e3).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(laplacian_comparison(-1.0, 1.0).unwrap(), 1.0 / tanh_series(1.0), epsilon = 1e-14);
        assert_abs_diff_eq!(laplacian_comparison(-1.0, 1.0).unwrap(), 1.3130352854993312, epsilon = 1e-14);
        assert!(laplacian_comparison(-1.0, 0.0).is_err());
        assert!(laplacian_comparison(-1.0, -1.0).is_err());
        assert!(matches!(laplacian_comparison(4.0, 2.0), Err(Error::Singularity { .. })));
    }

    #[test]
    fn index_bounds() {
        let kp = CurvatureProfile::kahler(2, -1.0, -1.0, 0.0);
        assert_eq!(kahler_index_bound(&kp, 0.0).unwrap(), 0.0);
        assert_eq!(kahler_index_bound(&CurvatureProfile::kahler(3, 0.0, 0.0, 0.0), 1.3).unwrap(), 0.0);
        let want = 4.0 * tanh_series(0.5) + 4.0 * tanh_series(1.0);
        assert_abs_diff_eq!(kahler_index_bound(&kp, 1.0).unwrap(), want, epsilon = 1e-13);
        assert_abs_diff_eq!(want, 4.894845252863099, epsilon = 1e-12);

        let qp = CurvatureProfile::quaternionic(2, -1.0, -1.0, 0.0);
        assert_eq!(quaternionic_index_bound(&qp, 0.0).unwrap(), 0.0);
        let q1 = CurvatureProfile::quaternionic(1, -1.0, -0.3, 0.0);
        assert_abs_diff_eq!(
            quaternionic_index_bound(&q1, 0.7).unwrap(),
            6.0 * index_comparison(-1.0, 1.4).unwrap(),
            epsilon = 1e-15
        );
        let want = 8.0 * tanh_series(0.5) + 12.0 * tanh_series(1.0);
        assert_abs_diff_eq!(quaternionic_index_bound(&qp, 1.0).unwrap(), want, epsilon = 1e-13);
        assert_abs_diff_eq!(want, 12.836067129549257, epsilon = 1e-12);

        assert!(kahler_index_bound(&qp, 1.0).is_err());
        assert!(quaternionic_index_bound(&kp, 1.0).is_err());
    }

    #[test]
    fn laplacian_bounds() {
        let k1 = CurvatureProfile::kahler(1, -0.5, -2.0, 0.0);
        assert_abs_diff_eq!(
            kahler_laplacian_bound(&k1, 0.8).unwrap(),
            2.0 * laplacian_comparison(-0.5, 1.6).unwrap(),
            epsilon = 1e-15
        );
        let flat = CurvatureProfile::kahler(3, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(kahler_laplacian_bound(&flat, 2.0).unwrap(), 4.0 / 2.0 + 1.0 / 2.0, epsilon = 1e-15);
        let kp = CurvatureProfile::kahler(2, -1.0, -1.0, 0.0);
        let want = 2.0 / tanh_series(1.0) + 2.0 / tanh_series(2.0);
        assert_abs_diff_eq!(kahler_laplacian_bound(&kp, 1.0).unwrap(), want, epsilon = 1e-13);
        assert_abs_diff_eq!(want, 4.700700012453759, epsilon = 1e-12);

        let q1 = CurvatureProfile::quaternionic(1, -0.5, -2.0, 0.0);
        assert_abs_diff_eq!(
            quaternionic_laplacian_bound(&q1, 0.8).unwrap(),
            6.0 * laplacian_comparison(-0.5, 1.6).unwrap(),
            epsilon = 1e-15
        );
        let qflat = CurvatureProfile::quaternionic(2, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(quaternionic_laplacian_bound(&qflat, 2.0).unwrap(), 4.0 / 2.0 + 3.0 / 2.0, epsilon = 1e-15);
        let qp = CurvatureProfile::quaternionic(2, -1.0, -1.0, 0.0);
        let want = 4.0 / tanh_series(1.0) + 6.0 / tanh_series(2.0);
        assert_abs_diff_eq!(quaternionic_laplacian_bound(&qp, 1.0).unwrap(), want, epsilon = 1e-13);
        assert_abs_diff_eq!(want, 11.476029466362614, epsilon = 1e-12);
    }

    #[test]
    fn theorem_bounds() {
        let kp = CurvatureProfile::kahler(2, -1.0, -1.0, 0.0);
        assert_abs_diff_eq!(coupling_failure_bound(&kp, 0.1).unwrap().value, 1.6, epsilon = 1e-15);
        assert_eq!(coupling_failure_bound(&kp, 0.0).unwrap().value, 0.0);
        let qp = CurvatureProfile::quaternionic(1, -1.0, -1.0, 0.0);
        assert_eq!(coupling_failure_bound(&qp, 0.5).unwrap().value, 12.0);

        assert_eq!(schwarz_bound(&CurvatureProfile::unit_disk(), 1.5).unwrap().value, 12.0);
        assert_eq!(schwarz_bound(&kp, 0.0).unwrap().value, 0.0);
        assert_eq!(schwarz_bound(&kp, 1.0).unwrap().value, 32.0);
        assert!(schwarz_bound(&CurvatureProfile::kahler(2, -1.0, -1.0, 0.5), 1.0).is_err());
        assert!(schwarz_bound(&qp, 1.0).is_err());

        assert_eq!(gradient_bound(&kp, 0.0).unwrap(), 0.0);
        assert_eq!(gradient_bound(&CurvatureProfile::unit_disk(), 1.0).unwrap(), 4.0);
        assert_eq!(gradient_bound(&CurvatureProfile::quaternionic(2, -1.0, -1.0, 1.0), 2.0).unwrap(), 68.0);

        for bad in [
            CurvatureProfile::kahler(2, 0.0, -1.0, 0.0),
            CurvatureProfile::kahler(2, -1.0, 0.5, 0.0),
            CurvatureProfile::quaternionic(2, 1.0, -1.0, 0.0),
        ] {
            assert!(matches!(coupling_failure_bound(&bad, 1.0), Err(Error::CurvatureSign { .. })));
            assert!(gradient_bound(&bad, 1.0).is_err());
        }
    }

    #[test]
    fn drifts() {
        assert_eq!(comparison_drift_kahler(&CurvatureProfile::kahler(1, -1.0, -7.0, 0.0)).unwrap(), 4.0);
        assert_eq!(comparison_drift_kahler(&CurvatureProfile::kahler(2, -1.0, -1.0, 1.0)).unwrap(), 10.0);
        assert_eq!(comparison_drift_kahler(&CurvatureProfile::unit_disk()).unwrap(), 2.0);
        let kp = CurvatureProfile::kahler(2, -1.0, -1.0, 0.0);
        assert_abs_diff_eq!(eta_drift(&kp, 50.0).unwrap(), 2.0, epsilon = 1e-12);
        assert!(eta_drift(&kp, 0.0).is_err());
        // on the curvature −1 disk the eta drift is the radial drift ½ coth r
        let r: f64 = 0.7;
        assert_abs_diff_eq!(eta_drift(&CurvatureProfile::unit_disk(), r).unwrap(), 0.5 / r.tanh(), epsilon = 1e-14);
    }

    #[test]
    fn absorption_examples() {
        assert_eq!(absorption_probability(1.0, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(absorption_probability(-0.5, 2.0, 3.0).unwrap(), 1.0);
        assert_eq!(absorption_probability(0.0, 2.0, 3.0).unwrap(), 1.0);
        assert_abs_diff_eq!(absorption_probability(1.0, 2.0, 0.5).unwrap(), 0.6065306597126334, epsilon = 1e-15);
        assert!(absorption_probability(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn wang_examples() {
        let lim = wang_bound(1.0, 1.0, 0.5, f64::INFINITY).unwrap();
        assert_abs_diff_eq!(lim, 0.3934693402873666, epsilon = 1e-9);
        let far = wang_bound(1.0, 1.0, 0.5, 1e200).unwrap();
        assert_abs_diff_eq!(far, 0.3934693402873666, epsilon = 1e-9);
        let small = wang_bound(1.0, 1.0, 1e-9, 1.0).unwrap();
        assert!(small < 1e-8);
        assert!(wang_bound(0.0, 1.0, 0.5, 1.0).is_err());
        assert!(wang_bound(1.0, 1.0, 0.0, 1.0).is_err());
        // b <= 0 still evaluates
        assert!(wang_bound(1.0, -1.0, 0.5, 10.0).unwrap().is_finite());
    }

    #[test]
    fn ricci_examples() {
        let z = ricci_reduction_check(3, 0.0, 0.0, 2.0).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        let z = ricci_reduction_check(2, -1.0, -1.0, 0.0).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        let c = ricci_reduction_check(2, -1.0, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(c.lhs, 4.894845252863099, epsilon = 1e-12);
        let rhs_direct = 3.0 * 2.0 * 2f64.sqrt() * tanh_series(2f64.sqrt() / 2.0);
        assert_abs_diff_eq!(c.rhs, rhs_direct, epsilon = 1e-13);
        assert_abs_diff_eq!(c.rhs, 5.166343029483286, epsilon = 1e-12);
        assert!(c.holds);
        assert!(ricci_reduction_check(2, 0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn comparison_diffusion_validation() {
        assert!(ComparisonDiffusion1D::constant(1.0, 0.0, 0.5).is_err());
        assert!(ComparisonDiffusion1D::constant(1.0, 2.0, -0.5).is_err());
        let d = ComparisonDiffusion1D::constant(1.0, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(d.absorption_probability().unwrap(), (-0.5f64).exp(), epsilon = 1e-15);
        let e = ComparisonDiffusion1D::eta(CurvatureProfile::unit_disk()).unwrap();
        assert_eq!(e.sigma2, 1.0);
        assert!(e.absorption_probability().is_none());
        assert!(ComparisonDiffusion1D::eta(CurvatureProfile::quaternionic(1, -1.0, -1.0, 0.0)).is_err());
    }
}

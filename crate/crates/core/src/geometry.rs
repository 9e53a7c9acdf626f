//! Closed-form geometry of the two model spaces used by the simulations: the
//! Poincaré disk (Gaussian curvature −1, `ds = 2|dz| / (1 − |z|²)`) and the
//! complex hyperbolic plane H²(ℂ) in the unit-ball chart of ℝ⁴.
//!
//! Geodesics and parallel transport on the disk are obtained by moving one
//! endpoint to the origin with a disk automorphism, where geodesics through 0
//! are Euclidean diameters. Both spaces are simply connected with
//! nonpositive curvature, so cut loci are empty and every pair of distinct
//! points has a unique geodesic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// States with `|x| >= 1 - BOUNDARY_FAULT` are treated as having left the
/// chart. They are never clamped back inside.
pub const BOUNDARY_FAULT: f64 = 1e-9;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        let norm = z.norm();
        if norm.is_finite() && norm < 1.0 {
            Ok(Self(z))
        } else {
            Err(Error::OutsideDomain {
                chart: "disk",
                point: vec![z.re, z.im],
                norm,
            })
        }
    }

    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn z(&self) -> Complex64 {
        self.0
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.0.re, self.0.im]
    }

    /// Conformal factor λ(z) = 2 / (1 − |z|²) of the hyperbolic metric.
    pub fn conformal_factor(&self) -> f64 {
        2.0 / (1.0 - self.0.norm_sqr())
    }

    /// Hyperbolic length of a chart vector based at this point.
    pub fn hyperbolic_norm(&self, v: [f64; 2]) -> f64 {
        self.conformal_factor() * v[0].hypot(v[1])
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        DiskPoint::new(v[0], v[1])
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(p: DiskPoint) -> Self {
        p.to_array()
    }
}

/// A point of the open unit ball of ℝ⁴ ≅ ℂ², stored as `(a1, b1, a2, b2)` with
/// `z1 = a1 + i b1`, `z2 = a2 + i b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BallPoint4([f64; 4]);

impl BallPoint4 {
    pub fn new(coords: [f64; 4]) -> Result<Self> {
        let norm = norm4(&coords);
        if norm.is_finite() && norm < 1.0 {
            Ok(Self(coords))
        } else {
            Err(Error::OutsideDomain {
                chart: "ball",
                point: coords.to_vec(),
                norm,
            })
        }
    }

    pub fn coords(&self) -> [f64; 4] {
        self.0
    }

    pub fn complex(&self) -> [Complex64; 2] {
        let [a1, b1, a2, b2] = self.0;
        [Complex64::new(a1, b1), Complex64::new(a2, b2)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }
}

impl TryFrom<[f64; 4]> for BallPoint4 {
    type Error = Error;
    fn try_from(v: [f64; 4]) -> Result<Self> {
        BallPoint4::new(v)
    }
}

impl From<BallPoint4> for [f64; 4] {
    fn from(p: BallPoint4) -> Self {
        p.0
    }
}

pub(crate) fn norm4(x: &[f64; 4]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Pseudo-hyperbolic (Möbius) distance `|(z − w) / (1 − w̄ z)|` on the disk.
///
/// This is the Carathéodory distance of the disk in the normalization used
/// throughout this crate; it takes values in `[0, 1)`.
pub fn moebius_pseudo_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    let (z, w) = (z.z(), w.z());
    let num = z - w;
    if num.norm_sqr() == 0.0 {
        return 0.0;
    }
    // Ratio of moduli rather than modulus of the quotient: swapping the
    // arguments negates both parts exactly, so the result is symmetric bit for bit.
    let den = Complex64::new(1.0, 0.0) - w.conj() * z;
    num.norm() / den.norm()
}

/// Geodesic distance of the curvature −1 metric `ds = 2|dz| / (1 − |z|²)`.
pub fn disk_geodesic_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    2.0 * moebius_pseudo_distance(z, w).atanh()
}

/// The disk automorphism `u ↦ rotation · (u − center) / (1 − conj(center) u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAutomorphism {
    center: Complex64,
    rotation: Complex64,
}

impl DiskAutomorphism {
    /// `rotation` is normalized to unit modulus.
    pub fn new(center: DiskPoint, rotation: Complex64) -> Result<Self> {
        let r = rotation.norm();
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid("rotation", "must be a nonzero finite complex number"));
        }
        Ok(Self {
            center: center.z(),
            rotation: rotation / r,
        })
    }

    /// Automorphism sending `center` to the origin, without rotation.
    pub fn to_origin(center: DiskPoint) -> Self {
        Self {
            center: center.z(),
            rotation: Complex64::new(1.0, 0.0),
        }
    }

    pub fn apply_complex(&self, u: Complex64) -> Complex64 {
        self.rotation * (u - self.center) / (Complex64::new(1.0, 0.0) - self.center.conj() * u)
    }

    /// Fails only if rounding pushes an image onto the boundary circle.
    pub fn apply(&self, p: DiskPoint) -> Result<DiskPoint> {
        DiskPoint::from_complex(self.apply_complex(p.z()))
    }

    pub fn inverse_complex(&self, u: Complex64) -> Complex64 {
        let v = u / self.rotation;
        (v + self.center) / (Complex64::new(1.0, 0.0) + self.center.conj() * v)
    }

    pub fn inverse(&self) -> Self {
        // inverse(u) = (r̄u + a)/(1 + ā r̄ u) = r̄ (u + r a)/(1 + conj(r a) u)
        let rc = self.rotation.conj();
        Self {
            center: -(self.rotation * self.center),
            rotation: rc,
        }
    }

    /// Complex derivative at `u`.
    pub fn derivative(&self, u: Complex64) -> Complex64 {
        let d = Complex64::new(1.0, 0.0) - self.center.conj() * u;
        self.rotation * (1.0 - self.center.norm_sqr()) / (d * d)
    }

    /// Push forward of the chart vector `v` based at `p`.
    pub fn push_vector(&self, p: DiskPoint, v: [f64; 2]) -> [f64; 2] {
        let out = self.derivative(p.z()) * Complex64::new(v[0], v[1]);
        [out.re, out.im]
    }
}

/// Unit-speed hyperbolic geodesic segment between two distinct disk points.
///
/// Stored as the automorphism carrying the segment onto `[0, tanh(L/2)]` on
/// the real diameter, plus the length `L`.
#[derive(Debug, Clone, Copy)]
pub struct DiskGeodesic {
    chart: DiskAutomorphism,
    length: f64,
}

impl DiskGeodesic {
    pub fn length(&self) -> f64 {
        self.length
    }

    /// The automorphism carrying the geodesic onto the real diameter.
    pub fn straightening(&self) -> DiskAutomorphism {
        self.chart
    }

    /// Point at hyperbolic arclength `s` from the start.
    pub fn point_at(&self, s: f64) -> Complex64 {
        self.chart
            .inverse_complex(Complex64::new((0.5 * s).tanh(), 0.0))
    }

    /// Euclidean unit chart direction of the velocity at arclength `s`.
    pub fn direction_at(&self, s: f64) -> Complex64 {
        let u = Complex64::new((0.5 * s).tanh(), 0.0);
        // (ψ⁻¹)'(u) = 1 / ψ'(ψ⁻¹(u))
        let d = Complex64::new(1.0, 0.0) / self.chart.derivative(self.chart.inverse_complex(u));
        d / d.norm()
    }
}

/// The unique unit-speed geodesic from `z` to `w`.
pub fn disk_geodesic(z: DiskPoint, w: DiskPoint) -> Result<DiskGeodesic> {
    let to0 = DiskAutomorphism::to_origin(z);
    let w0 = to0.apply_complex(w.z());
    let r = w0.norm();
    if r == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    let chart = DiskAutomorphism {
        center: z.z(),
        rotation: w0.conj() / r,
    };
    Ok(DiskGeodesic {
        chart,
        length: 2.0 * r.atanh(),
    })
}

/// Unit chart directions of the geodesic from `z` to `w`: at `z` pointing
/// towards `w`, and at `w` pointing away from `z`.
pub fn geodesic_directions(z: Complex64, w: Complex64) -> Option<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let w0 = (w - z) / (one - z.conj() * w);
    let r = w0.norm();
    if r == 0.0 || !r.is_finite() {
        return None;
    }
    let dir = w0 / r;
    // d/du φ_z⁻¹(u) = (1 − |z|²) / (1 + z̄ u)², evaluated at u = w0.
    let q = one + z.conj() * w0;
    let tw = dir / (q * q);
    Some((dir, tw / tw.norm()))
}

/// The mirror map on unit chart directions, as the complex coefficient `c`
/// of `v ↦ c · conj(v)`. Parallel transport followed by reflection in the
/// hyperplane normal to the geodesic is an orientation-reversing isometry
/// between the two tangent planes; in 2D it is a reflection of this form.
pub(crate) fn mirror_coefficient(z: Complex64, w: Complex64) -> Option<Complex64> {
    geodesic_directions(z, w).map(|(tz, tw)| -(tz * tw))
}

/// Mirror map `m_{z,w}`: parallel transport of the chart vector `v` from `z`
/// to `w` along the geodesic, followed by reflection across the orthogonal
/// complement of the geodesic tangent at `w`.
///
/// The result is a chart vector at `w` with the same hyperbolic length.
pub fn mirror_map(z: DiskPoint, w: DiskPoint, v: [f64; 2]) -> Result<[f64; 2]> {
    let c = mirror_coefficient(z.z(), w.z()).ok_or(Error::DegenerateGeodesic)?;
    let scale = (1.0 - w.z().norm_sqr()) / (1.0 - z.z().norm_sqr());
    let out = c * Complex64::new(v[0], -v[1]) * scale;
    Ok([out.re, out.im])
}

/// Real 2×2 matrix of the unit-direction mirror map, row-major.
pub fn mirror_matrix(z: DiskPoint, w: DiskPoint) -> Result<[[f64; 2]; 2]> {
    let c = mirror_coefficient(z.z(), w.z()).ok_or(Error::DegenerateGeodesic)?;
    Ok([[c.re, c.im], [c.im, -c.re]])
}

/// Diffusion matrix A(x) of Brownian motion on H²(ℂ) in the unit-ball chart,
/// so that `dX = A(X) dB` with `B` a standard Brownian motion in ℝ⁴.
///
/// A(x) is symmetric positive definite with eigenvalues `2√(1 − |x|²)` and
/// `2(1 − |x|²)`, each of multiplicity two.
pub fn chc2_diffusion_matrix(x: BallPoint4) -> [[f64; 4]; 4] {
    chc2_diffusion_unchecked(&x.0)
}

pub(crate) fn chc2_diffusion_unchecked(x: &[f64; 4]) -> [[f64; 4]; 4] {
    let [a1, b1, a2, b2] = *x;
    let r2 = a1 * a1 + b1 * b1 + a2 * a2 + b2 * b2;
    let s = (1.0 - r2).sqrt();
    let d = 1.0 + s;
    let pre = 2.0 * s;
    let diag1 = pre * (1.0 - (a1 * a1 + b1 * b1) / d);
    let diag2 = pre * (1.0 - (a2 * a2 + b2 * b2) / d);
    let p = -pre * (a1 * a2 + b1 * b2) / d;
    let q = pre * (b1 * a2 - a1 * b2) / d;
    [
        [diag1, 0.0, p, q],
        [0.0, diag1, -q, p],
        [p, -q, diag2, 0.0],
        [q, p, 0.0, diag2],
    ]
}

/// Curvature family of a bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureFamily {
    Kahler,
    Quaternionic,
}

/// Lower curvature bounds and drift size: the inputs to every closed-form
/// coupling bound.
///
/// For the Kähler family the assumptions are `H >= 4 k1` and
/// `Ric⊥ >= (2n − 2) k2`; for the quaternionic family `Q >= 12 k1` and
/// `Ric⊥ >= (4n − 4) k2`. `m` bounds the drift, `|Z| <= m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub family: CurvatureFamily,
    pub n: u32,
    pub k1: f64,
    pub k2: f64,
    pub m: f64,
}

impl CurvatureProfile {
    pub fn kahler(n: u32, k1: f64, k2: f64, m: f64) -> Self {
        Self {
            family: CurvatureFamily::Kahler,
            n,
            k1,
            k2,
            m,
        }
    }

    pub fn quaternionic(n: u32, k1: f64, k2: f64, m: f64) -> Self {
        Self {
            family: CurvatureFamily::Quaternionic,
            n,
            k1,
            k2,
            m,
        }
    }

    /// The Poincaré disk with curvature −1: `H = −1 = 4 k1`. `k2` is inert at
    /// `n = 1` and set to the same value.
    pub fn unit_disk() -> Self {
        Self::kahler(1, -0.25, -0.25, 0.0)
    }

    pub(crate) fn validate_shape(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(invalid("m", format!("drift bound must be >= 0, got {}", self.m)));
        }
        if !(self.k1.is_finite() && self.k2.is_finite()) {
            return Err(invalid("k1/k2", "curvature bounds must be finite"));
        }
        Ok(())
    }

    /// Checks the hypotheses of the theorem-level bounds: `k1, k2 < 0`.
    pub fn validate_negative(&self) -> Result<()> {
        self.validate_shape()?;
        if self.k1 < 0.0 && self.k2 < 0.0 {
            Ok(())
        } else {
            Err(Error::CurvatureSign {
                k1: self.k1,
                k2: self.k2,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpace {
    ComplexEuclidean,
    ComplexProjective,
    ComplexHyperbolic,
    QuaternionEuclidean,
    QuaternionProjective,
    QuaternionHyperbolic,
}

/// Holomorphic (or quaternionic) sectional curvature and orthogonal Ricci
/// curvature of a model space of dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpaceConstants {
    pub space: ModelSpace,
    pub dim: u32,
    pub sectional_value: f64,
    pub orth_ricci_value: f64,
}

pub fn model_constants(space: ModelSpace, dim: u32) -> ModelSpaceConstants {
    let m = f64::from(dim);
    let (sectional_value, orth_ricci_value) = match space {
        ModelSpace::ComplexEuclidean | ModelSpace::QuaternionEuclidean => (0.0, 0.0),
        ModelSpace::ComplexProjective => (4.0, 2.0 * m - 2.0),
        ModelSpace::ComplexHyperbolic => (-4.0, -(2.0 * m - 2.0)),
        ModelSpace::QuaternionProjective => (12.0, 4.0 * m - 4.0),
        ModelSpace::QuaternionHyperbolic => (-12.0, -(4.0 * m - 4.0)),
    };
    ModelSpaceConstants {
        space,
        dim,
        sectional_value,
        orth_ricci_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix4;

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn disk_point_rejects_boundary() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.6, 0.8).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
        assert!(BallPoint4::new([0.5, 0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn pseudo_distance_examples() {
        assert_abs_diff_eq!(moebius_pseudo_distance(dp(0.37, 0.0), DiskPoint::ORIGIN), 0.37);
        assert_abs_diff_eq!(moebius_pseudo_distance(dp(0.0, -0.6), DiskPoint::ORIGIN), 0.6);
        let z = dp(0.2, -0.4);
        assert_eq!(moebius_pseudo_distance(z, z), 0.0);
        assert_abs_diff_eq!(moebius_pseudo_distance(dp(0.5, 0.0), dp(-0.5, 0.0)), 0.8, epsilon = 1e-15);
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn geodesic_distance_matches_metric_quadrature() {
        for r in [0.1, 0.5, 0.8, 0.95] {
            let oracle = simpson(|s| 2.0 / (1.0 - s * s), 0.0, r, 2000);
            let d = disk_geodesic_distance(DiskPoint::ORIGIN, dp(r, 0.0));
            assert_abs_diff_eq!(d, oracle, epsilon = 1e-9);
        }
        // frozen from the quadrature oracle above
        assert_abs_diff_eq!(
            disk_geodesic_distance(DiskPoint::ORIGIN, dp(0.5, 0.0)),
            1.0986122886681098,
            epsilon = 1e-12
        );
    }

    #[test]
    fn diffusion_matrix_at_origin_is_twice_identity() {
        let a = chc2_diffusion_matrix(BallPoint4::new([0.0; 4]).unwrap());
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 2.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn diffusion_matrix_eigenvalues_at_three_quarters() {
        // |x|² = 0.75
        let x = BallPoint4::new([0.5, 0.5, 0.5, 0.0]).unwrap();
        let m = Matrix4::from_fn(|i, j| chc2_diffusion_matrix(x)[i][j]);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.5, 0.5, 1.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn geodesic_on_real_diameter() {
        let g = disk_geodesic(dp(-0.4, 0.0), dp(0.4, 0.0)).unwrap();
        for k in 0..=10 {
            let s = g.length() * k as f64 / 10.0;
            let p = g.point_at(s);
            assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-15);
            let dir = g.direction_at(s);
            assert_abs_diff_eq!(dir.re, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(g.length(), 4.0 * 0.4f64.atanh(), epsilon = 1e-12);
    }

    #[test]
    fn geodesic_endpoints() {
        let (z, w) = (dp(0.3, -0.6), dp(-0.7, 0.1));
        let g = disk_geodesic(z, w).unwrap();
        assert!((g.point_at(0.0) - z.z()).norm() < 1e-12);
        assert!((g.point_at(g.length()) - w.z()).norm() < 1e-12);
        assert_eq!(disk_geodesic(z, z).unwrap_err(), Error::DegenerateGeodesic);
    }

    #[test]
    fn mirror_reflects_tangent_and_fixes_normal() {
        let (z, w) = (dp(-0.3, 0.0), dp(0.3, 0.0));
        let t = mirror_map(z, w, [1.0, 0.0]).unwrap();
        assert!(t[0] < 0.0);
        assert_abs_diff_eq!(t[1], 0.0, epsilon = 1e-15);
        let n = mirror_map(z, w, [0.0, 1.0]).unwrap();
        assert!(n[1] > 0.0);
        assert_abs_diff_eq!(n[0], 0.0, epsilon = 1e-15);
        assert_eq!(mirror_map(z, z, [1.0, 0.0]).unwrap_err(), Error::DegenerateGeodesic);
    }

    #[test]
    fn mirror_matrix_is_orthogonal_reflection() {
        let m = mirror_matrix(dp(0.1, 0.5), dp(-0.2, -0.3)).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert_abs_diff_eq!(det, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[0][0] * m[0][0] + m[0][1] * m[0][1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn table_rows() {
        let c = model_constants(ModelSpace::ComplexHyperbolic, 3);
        assert_eq!((c.sectional_value, c.orth_ricci_value), (-4.0, -4.0));
        let c = model_constants(ModelSpace::ComplexEuclidean, 5);
        assert_eq!((c.sectional_value, c.orth_ricci_value), (0.0, 0.0));
        let c = model_constants(ModelSpace::QuaternionHyperbolic, 2);
        assert_eq!((c.sectional_value, c.orth_ricci_value), (-12.0, -4.0));
        let c = model_constants(ModelSpace::ComplexProjective, 2);
        assert_eq!((c.sectional_value, c.orth_ricci_value), (4.0, 2.0));
        let c = model_constants(ModelSpace::QuaternionProjective, 1);
        assert_eq!((c.sectional_value, c.orth_ricci_value), (12.0, 0.0));
    }

    #[test]
    fn profile_sign_checks() {
        assert!(CurvatureProfile::kahler(2, -1.0, -1.0, 0.0).validate_negative().is_ok());
        assert!(matches!(
            CurvatureProfile::kahler(2, 0.0, -1.0, 0.0).validate_negative(),
            Err(Error::CurvatureSign { .. })
        ));
        assert!(CurvatureProfile::kahler(2, -1.0, -1.0, -0.5).validate_negative().is_err());
        assert!(CurvatureProfile::kahler(0, -1.0, -1.0, 0.0).validate_negative().is_err());
    }
}

use coupleman::coupling::{estimate_survival, CouplingStrategy};
use coupleman::sde::*;
use proptest::prelude::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn paths_are_bit_exact_across_runs() {
    let plan = StepPlan::new(1e-3, 0.5).unwrap();
    let x0 = [0.2, -0.1, 0.3, 0.0];
    for i in [0u64, 1, 17, 99_999] {
        let a = simulate_path(&ComplexHyperbolicBm, x0, &plan, &mut NoiseStream::new(5, i), None).unwrap();
        let b = simulate_path(&ComplexHyperbolicBm, x0, &plan, &mut NoiseStream::new(5, i), None).unwrap();
        assert_eq!(a.terminal.map(f64::to_bits), b.terminal.map(f64::to_bits));
    }
}

#[test]
fn survival_does_not_depend_on_thread_count() {
    let plan = StepPlan::new(1e-3, 1.0).unwrap();
    let run = || {
        estimate_survival(&PoincareDiskBm, CouplingStrategy::Mirror, [0.4, 0.1], [-0.2, 0.0], &plan, 1e-3, &[0.25, 0.5, 1.0], 2000, 11)
            .unwrap()
    };
    let one = in_pool(1, run);
    let four = in_pool(4, run);
    assert_eq!(one, four);
}

#[test]
fn short_horizon_domain_exits_are_rare() {
    // From |x0| ≤ 0.8 the chart boundary is not reached within a short
    // horizon; over long horizons the fault at 1 − 1e−9 is hit routinely.
    let plan = StepPlan::new(1e-3, 0.1).unwrap();
    let x0 = [0.8, 0.0, 0.0, 0.0];
    let n = 10_000u64;
    let exits = (0..n)
        .filter(|&i| {
            simulate_path(&ComplexHyperbolicBm, x0, &plan, &mut NoiseStream::new(3, i), None)
                .unwrap()
                .exit_time
                .is_some()
        })
        .count();
    assert!(exits as f64 <= 1e-3 * n as f64, "{exits} exits");
}

/// `M S M⁻¹`: a diffusion seen through the linear chart change `y = M x`.
struct Conjugated<'a, S> {
    inner: &'a S,
    m: [[f64; 2]; 2],
    m_inv: [[f64; 2]; 2],
}

fn mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

fn apply(a: &[[f64; 2]; 2], v: &[f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

impl<S: DiffusionSpec<2>> DiffusionSpec<2> for Conjugated<'_, S> {
    fn name(&self) -> &'static str {
        "conjugated"
    }
    fn diffusion(&self, y: &[f64; 2]) -> [[f64; 2]; 2] {
        mul(&self.m, &self.inner.diffusion(&apply(&self.m_inv, y)))
    }
    fn drift(&self, y: &[f64; 2]) -> [f64; 2] {
        apply(&self.m, &self.inner.drift(&apply(&self.m_inv, y)))
    }
    fn in_domain(&self, y: &[f64; 2]) -> bool {
        self.inner.in_domain(&apply(&self.m_inv, y))
    }
    fn distance(&self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        self.inner.distance(&apply(&self.m_inv, a), &apply(&self.m_inv, b))
    }
}

proptest! {
    #[test]
    fn euler_step_is_affine_equivariant(
        m in prop::array::uniform4(-2.0..2.0f64),
        r in 0.0..0.9f64,
        th in 0.0..std::f64::consts::TAU,
        xi in prop::array::uniform2(-3.0..3.0f64),
        dt in 1e-4..1e-2f64,
    ) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.1);
        let mm = [[m[0], m[1]], [m[2], m[3]]];
        let m_inv = [[m[3] / det, -m[1] / det], [-m[2] / det, m[0] / det]];
        let spec = Conjugated { inner: &PoincareDiskBm, m: mm, m_inv };
        let x = [r * th.cos(), r * th.sin()];
        let direct = apply(&mm, &euler_proposal(&PoincareDiskBm, &x, dt, &xi));
        let conj = euler_proposal(&spec, &apply(&mm, &x), dt, &xi);
        for i in 0..2 {
            prop_assert!((direct[i] - conj[i]).abs() <= 1e-12, "{direct:?} vs {conj:?}");
        }
    }
}

/// Geometric Brownian motion `dX = σ X dB + μ X dt`: multiplicative noise,
/// so Euler–Maruyama has strong order ½ rather than being exact.
struct Gbm;

impl DiffusionSpec<1> for Gbm {
    fn name(&self) -> &'static str {
        "gbm"
    }
    fn diffusion(&self, x: &[f64; 1]) -> [[f64; 1]; 1] {
        [[0.8 * x[0]]]
    }
    fn drift(&self, x: &[f64; 1]) -> [f64; 1] {
        [0.1 * x[0]]
    }
    fn in_domain(&self, x: &[f64; 1]) -> bool {
        x[0].is_finite()
    }
    fn distance(&self, a: &[f64; 1], b: &[f64; 1]) -> f64 {
        (a[0] - b[0]).abs()
    }
}

#[test]
fn multiplicative_noise_has_strong_order_one_half() {
    let rows = strong_convergence_probe(&Gbm, [1.0], &[1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0], 1.0, 2000, 8).unwrap();
    let order = fitted_order(&rows).unwrap();
    assert!((0.35..=0.65).contains(&order), "order {order}, rows {rows:?}");
}

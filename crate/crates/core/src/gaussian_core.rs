//! The Gaussian parametrix Z, its x-derivative, the Gaussian convolution
//! identity and the singular weighted integrals J, J_δ.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::singular_quadrature::{integrate_space_singular, SpaceRule, SpaceWindow};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePair {
    pub t: f64,
    pub x: f64,
    pub s: f64,
    pub y: f64,
}

impl SpaceTimePair {
    pub fn new(t: f64, x: f64, s: f64, y: f64) -> Result<Self> {
        let p = Self { t, x, s, y };
        p.validate("SpaceTimePair")?;
        Ok(p)
    }

    pub fn validate(&self, op: &'static str) -> Result<()> {
        ensure(
            [self.t, self.x, self.s, self.y].iter().all(|v| v.is_finite()),
            op,
            || format!("non-finite coordinates {self:?}"),
        )?;
        ensure(self.t > self.s, op, || format!("need t > s, got t={} s={}", self.t, self.s))
    }

    pub fn tau(&self) -> f64 {
        self.t - self.s
    }

    pub fn dist(&self) -> f64 {
        self.x - self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussTriple {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
}

impl GaussTriple {
    pub fn new(sigma1: f64, sigma2: f64, sigma3: f64) -> Result<Self> {
        ensure(sigma1 > 0.0 && sigma2 > 0.0 && sigma3 > 0.0, "GaussTriple", || {
            format!("standard deviations must be positive: {sigma1}, {sigma2}, {sigma3}")
        })?;
        let lhs = sigma3 * sigma3;
        let rhs = sigma1 * sigma1 + sigma2 * sigma2;
        ensure((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs, "GaussTriple", || {
            format!("sigma3^2 = {lhs} differs from sigma1^2 + sigma2^2 = {rhs}")
        })?;
        Ok(Self {
            sigma1,
            sigma2,
            sigma3,
        })
    }

    pub fn from_pair(sigma1: f64, sigma2: f64) -> Result<Self> {
        Self::new(sigma1, sigma2, sigma1.hypot(sigma2))
    }
}

/// Z_τ(d) = (2πτ)^{−1/2} exp(−d²/(2τ)), unchecked.
#[inline]
pub fn heat_kernel(tau: f64, d: f64) -> f64 {
    INV_SQRT_2PI / tau.sqrt() * (-0.5 * d * d / tau).exp()
}

/// ∂_d Z_τ(d) = −(d/τ) Z_τ(d), unchecked.
#[inline]
pub fn heat_kernel_dx(tau: f64, d: f64) -> f64 {
    -d / tau * heat_kernel(tau, d)
}

#[allow(non_snake_case)]
pub fn Z(pair: &SpaceTimePair) -> Result<f64> {
    pair.validate("Z")?;
    Ok(heat_kernel(pair.tau(), pair.dist()))
}

#[allow(non_snake_case)]
pub fn dZ_dx(pair: &SpaceTimePair) -> Result<f64> {
    pair.validate("dZ_dx")?;
    Ok(heat_kernel_dx(pair.tau(), pair.dist()))
}

/// (2πeδ)^{−1/2}(t−s)^{−1}exp(−(1−δ)(x−y)²/(2(t−s))), a majorant of |∂ₓZ|.
#[allow(non_snake_case)]
pub fn dZ_dx_bound(pair: &SpaceTimePair, delta: f64) -> Result<f64> {
    pair.validate("dZ_dx_bound")?;
    ensure(delta > 0.0 && delta < 1.0, "dZ_dx_bound", || {
        format!("delta must lie in (0,1), got {delta}")
    })?;
    let tau = pair.tau();
    let d = pair.dist();
    Ok((2.0 * std::f64::consts::PI * std::f64::consts::E * delta).powf(-0.5) / tau
        * (-(1.0 - delta) * d * d / (2.0 * tau)).exp())
}

/// ∫ exp(−½((x−z)²/σ₁² + (z−y)²/σ₂²)) dz in closed form.
pub fn gauss_convolution_closed_form(x: f64, y: f64, triple: &GaussTriple) -> Result<f64> {
    GaussTriple::new(triple.sigma1, triple.sigma2, triple.sigma3)?;
    let GaussTriple {
        sigma1,
        sigma2,
        sigma3,
    } = *triple;
    let d = x - y;
    Ok((2.0 * std::f64::consts::PI).sqrt() * sigma1 * sigma2 / sigma3
        * (-0.5 * d * d / (sigma3 * sigma3)).exp())
}

fn check_gamma(op: &'static str, gamma: f64) -> Result<()> {
    ensure(gamma > 0.0 && gamma < 1.0, op, || format!("gamma must lie in (0,1), got {gamma}"))
}

/// κ(γ) with min_{Δ>0}(AΔ^{1−γ} + BΔ^{−γ}) = κ(γ)A^γB^{1−γ}.
pub fn kappa(gamma: f64) -> Result<f64> {
    check_gamma("kappa", gamma)?;
    let q = gamma / (1.0 - gamma);
    Ok(q.powf(1.0 - gamma) + q.powf(-gamma))
}

/// κ₁(γ) = (2π)^{(1−γ)/2} κ(γ) (2/(1−γ))^γ.
pub fn kappa1(gamma: f64) -> Result<f64> {
    let k = kappa(gamma)?;
    Ok((2.0 * std::f64::consts::PI).powf(0.5 * (1.0 - gamma)) * k * (2.0 / (1.0 - gamma)).powf(gamma))
}

fn check_times(op: &'static str, t: f64, r: f64, s: f64) -> Result<()> {
    ensure(s < r && r < t, op, || format!("need s < r < t, got s={s} r={r} t={t}"))
}

/// J = ∫ |z|^{−γ} exp(−½((x−z)²/(t−r) + (z−y)²/(r−s))) dz.
#[allow(non_snake_case)]
pub fn J_integral(x: f64, y: f64, t: f64, r: f64, s: f64, gamma: f64) -> Result<f64> {
    check_gamma("J_integral", gamma)?;
    check_times("J_integral", t, r, s)?;
    Ok(j_weighted(x, y, t - r, r - s, gamma, 1.0))
}

/// Direct quadrature of the (1−δ)-damped J-integrand.
fn j_weighted(x: f64, y: f64, a: f64, b: f64, gamma: f64, damp: f64) -> f64 {
    let v = a * b / (a + b) / damp;
    let sigma = v.sqrt();
    let c = (x * b + y * a) / (a + b);
    let d = x - y;
    let offset = -0.5 * damp * d * d / (a + b);
    let rule = SpaceRule::reference(gamma);
    let delta = a.sqrt().min(b.sqrt()) / damp.sqrt();
    let window = SpaceWindow::gaussian(c, sigma, rule.truncation_radius_multiplier).with_delta(delta);
    integrate_space_singular(
        |z| {
            let u = z - c;
            z.abs().powf(-gamma) * (-0.5 * u * u / v + offset).exp()
        },
        gamma,
        &rule,
        &window,
    )
    .unwrap_or(f64::NAN)
}

/// κ₁(γ)[(t−r)(r−s)/(t−s)]^{(1−γ)/2} exp(−((1−γ)/2)(x−y)²/(t−s)).
#[allow(non_snake_case)]
pub fn J_bound(x: f64, y: f64, t: f64, r: f64, s: f64, gamma: f64) -> Result<f64> {
    check_times("J_bound", t, r, s)?;
    let k1 = kappa1(gamma)?;
    let d = x - y;
    Ok(k1 * ((t - r) * (r - s) / (t - s)).powf(0.5 * (1.0 - gamma))
        * (-0.5 * (1.0 - gamma) * d * d / (t - s)).exp())
}

/// J_δ through the scaling relation (1−δ)^{(γ−1)/2} J(x√(1−δ), y√(1−δ)).
#[allow(non_snake_case)]
pub fn J_delta_integral(x: f64, y: f64, t: f64, r: f64, s: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_delta("J_delta_integral", delta)?;
    let q = (1.0 - delta).sqrt();
    Ok((1.0 - delta).powf(0.5 * (gamma - 1.0)) * J_integral(x * q, y * q, t, r, s, gamma)?)
}

/// J_δ by direct quadrature of the damped integrand.
#[allow(non_snake_case)]
pub fn J_delta_direct(x: f64, y: f64, t: f64, r: f64, s: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_gamma("J_delta_direct", gamma)?;
    check_times("J_delta_direct", t, r, s)?;
    check_delta("J_delta_direct", delta)?;
    Ok(j_weighted(x, y, t - r, r - s, gamma, 1.0 - delta))
}

/// Bound for J_δ obtained by applying the J bound to the scaling relation:
/// (1−δ)^{(γ−1)/2} κ₁ [(t−r)(r−s)/(t−s)]^{(1−γ)/2} exp(−(1−γ)(1−δ)(x−y)²/(2(t−s))).
#[allow(non_snake_case)]
pub fn J_delta_bound(x: f64, y: f64, t: f64, r: f64, s: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_delta("J_delta_bound", delta)?;
    let q = (1.0 - delta).sqrt();
    Ok((1.0 - delta).powf(0.5 * (gamma - 1.0)) * J_bound(x * q, y * q, t, r, s, gamma)?)
}

/// Variant of [`J_delta_bound`] with the prefactor (2π)^{(1−γ)/2} in place of
/// κ₁(γ). It does not hold in general: at x = y = 0, t−r = r−s = ½, γ = δ = ½
/// the integral exceeds it by a factor ≈ 2.7.
#[allow(non_snake_case)]
pub fn J_delta_bound_unit_prefactor(
    x: f64,
    y: f64,
    t: f64,
    r: f64,
    s: f64,
    gamma: f64,
    delta: f64,
) -> Result<f64> {
    let corrected = J_delta_bound(x, y, t, r, s, gamma, delta)?;
    Ok(corrected * (2.0 * std::f64::consts::PI).powf(0.5 * (1.0 - gamma)) / kappa1(gamma)?)
}

fn check_delta(op: &'static str, delta: f64) -> Result<()> {
    ensure(delta > 0.0 && delta < 1.0, op, || format!("delta must lie in (0,1), got {delta}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::gamma_fn;
    use crate::test_oracles::{adaptive_simpson, golden_min, singular_line_integral};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn pair(tau: f64, d: f64) -> SpaceTimePair {
        SpaceTimePair::new(tau + 0.5, d, 0.5, 0.0).unwrap()
    }

    const KAPPA_QUARTER: f64 = 1.754_765_350_603_323;
    const KAPPA1_HALF: f64 = 6.332_933_948_344_638;

    #[test]
    fn z_examples() {
        assert!(rel(Z(&pair(1.0, 0.0)).unwrap(), 0.398_942_280_4) < 1e-10);
        assert!(rel(Z(&pair(1.0, 1.0)).unwrap(), 0.241_970_724_5) < 1e-9);
        assert!(rel(Z(&pair(0.25, 0.0)).unwrap(), 0.797_884_560_8) < 1e-10);
        assert!(Z(&SpaceTimePair { t: 1.0, x: 0.0, s: 1.0, y: 0.0 }).is_err());
    }

    #[test]
    fn dz_examples() {
        assert_eq!(dZ_dx(&pair(1.0, 0.0)).unwrap(), 0.0);
        let v = dZ_dx(&pair(1.0, 1.0)).unwrap();
        let h = 1e-6;
        let fd = (heat_kernel(1.0, 1.0 + h) - heat_kernel(1.0, 1.0 - h)) / (2.0 * h);
        assert!((v - fd).abs() < 1e-8);
        assert!(rel(v, -0.241_970_724_5) < 1e-9);
        assert!(rel(dZ_dx(&pair(1.0, -1.0)).unwrap(), 0.241_970_724_5) < 1e-9);
    }

    #[test]
    fn dz_bound_examples() {
        let b = dZ_dx_bound(&pair(1.0, 0.0), 0.5).unwrap();
        let direct = (2.0 * std::f64::consts::PI * std::f64::consts::E * 0.5).powf(-0.5);
        assert!(rel(b, direct) < 1e-14);
        assert!(rel(b, 0.342_198_280_312_216_55) < 1e-14);
        assert!(dZ_dx_bound(&pair(1.0, 0.0), 1.0).is_err());
        let mut last = 0.0;
        for d in [2.0, 4.0, 8.0, 12.0] {
            let p = pair(1.0, d);
            let ratio = dZ_dx_bound(&p, 0.5).unwrap() / dZ_dx(&p).unwrap().abs();
            assert!(ratio > last);
            last = ratio;
        }
        assert!(last > 1e6);
    }

    #[test]
    fn gauss_convolution_examples() {
        let t = GaussTriple::from_pair(1.0, 1.0).unwrap();
        assert!(rel(gauss_convolution_closed_form(0.3, 0.3, &t).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
        let oracle = adaptive_simpson(&|z: f64| (-0.5 * ((1.0 - z).powi(2) + z * z)).exp(), -20.0, 20.0, 1e-14);
        assert!(rel(oracle, 1.380_388_447_043_143) < 1e-12);
        assert!(rel(gauss_convolution_closed_form(1.0, 0.0, &t).unwrap(), oracle) < 1e-12);
        let tiny = GaussTriple::from_pair(1e-8, 1.0).unwrap();
        assert!(gauss_convolution_closed_form(0.0, 0.0, &tiny).unwrap() < 1e-7);
        assert!(GaussTriple::new(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn kappa_examples() {
        assert!(rel(kappa(0.5).unwrap(), 2.0) < 1e-15);
        let (arg, min) = golden_min(|d: f64| d.powf(0.75) + d.powf(-0.25), 1e-3, 10.0, 200);
        assert!((arg - 1.0 / 3.0).abs() < 1e-6);
        assert!(rel(min, KAPPA_QUARTER) < 1e-12);
        assert!(rel(kappa(0.25).unwrap(), KAPPA_QUARTER) < 1e-14);
        assert!(kappa(0.0).is_err() && kappa(1.0).is_err());
    }

    #[test]
    fn kappa1_examples() {
        assert!(rel(kappa1(0.5).unwrap(), KAPPA1_HALF) < 1e-14);
        let small = kappa1(1e-6).unwrap();
        assert!(rel(small, (2.0 * std::f64::consts::PI).sqrt() * kappa(1e-6).unwrap()) < 1e-4);
        for i in 1..19 {
            let g = 0.05 * i as f64;
            let v = kappa1(g).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn j_integral_examples() {
        // x = y = 0: ∫|z|^{−1/2}e^{−2z²}dz = Γ(1/4)2^{−1/4}
        let closed = gamma_fn(0.25).unwrap() * 2f64.powf(-0.25);
        let f = |z: f64| z.abs().powf(-0.5) * (-2.0 * z * z).exp();
        let oracle = singular_line_integral(&f, 0.5, -10.0, 10.0, 1e-14);
        assert!(rel(oracle, closed) < 1e-10);
        let j = J_integral(0.0, 0.0, 1.0, 0.5, 0.0, 0.5).unwrap();
        assert!(rel(j, closed) < 1e-10);
        assert!(J_integral(0.0, 0.0, 1.0, 1.0, 0.0, 0.5).is_err());
        // γ → 0: Gaussian convolution
        let j0 = J_integral(0.4, -0.3, 1.0, 0.6, 0.0, 1e-9).unwrap();
        let g = gauss_convolution_closed_form(0.4, -0.3, &GaussTriple::from_pair(0.4f64.sqrt(), 0.6f64.sqrt()).unwrap()).unwrap();
        assert!(rel(j0, g) < 1e-7);
    }

    #[test]
    fn j_delta_examples() {
        let j = J_integral(0.3, -0.2, 1.0, 0.4, 0.0, 0.5).unwrap();
        let jd = J_delta_integral(0.3, -0.2, 1.0, 0.4, 0.0, 0.5, 1e-12).unwrap();
        assert!(rel(jd, j) < 1e-10);
        let a = J_delta_integral(0.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5).unwrap();
        let b = J_delta_direct(0.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5).unwrap();
        let closed = gamma_fn(0.25).unwrap() * 2f64.powf(-0.25) * 0.5f64.powf(-0.25);
        assert!(rel(a, b) < 1e-8);
        assert!(rel(a, closed) < 1e-10);
    }

    #[test]
    fn j_delta_bound_with_unit_prefactor_fails_at_origin() {
        let jd = J_delta_integral(0.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5).unwrap();
        let printed = J_delta_bound_unit_prefactor(0.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5).unwrap();
        let fixed = J_delta_bound(0.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5).unwrap();
        assert!(jd > 2.0 * printed);
        assert!(jd <= fixed);
    }

    #[test]
    fn z_integrates_to_one() {
        for &(tau, x) in &[(0.01, 0.3), (0.5, -1.0), (2.0, 4.0)] {
            let s: f64 = adaptive_simpson(&|y: f64| heat_kernel(tau, x - y), x - 12.0 * f64::sqrt(tau), x + 12.0 * f64::sqrt(tau), 1e-13);
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn z_solves_heat_equation() {
        for &(tau, d) in &[(0.1, 0.0), (0.3, 0.5), (1.0, -1.2), (2.0, 3.0)] {
            let h = 1e-4 * f64::max(1.0, f64::abs(d));
            let k = 1e-4 * tau;
            let zt = (heat_kernel(tau + k, d) - heat_kernel(tau - k, d)) / (2.0 * k);
            let zxx = (heat_kernel(tau, d + h) - 2.0 * heat_kernel(tau, d) + heat_kernel(tau, d - h)) / (h * h);
            assert!((zt - 0.5 * zxx).abs() <= 1e-5 * (zt.abs() + 1.0));
        }
    }

    #[test]
    fn z_chapman_kolmogorov() {
        for &(a, b, x, y) in &[(0.3, 0.7, 0.2, -0.5), (0.05, 1.0, 1.0, 1.3)] {
            let ck = adaptive_simpson(&|z: f64| heat_kernel(a, x - z) * heat_kernel(b, z - y), -15.0, 15.0, 1e-14);
            assert!(rel(ck, heat_kernel(a + b, x - y)) < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn dz_bound_dominates(tau in 0.01f64..3.0, d in -5.0f64..5.0, delta in 0.01f64..0.99) {
            let p = pair(tau, d);
            prop_assert!(dZ_dx(&p).unwrap().abs() <= dZ_dx_bound(&p, delta).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn dz_matches_finite_difference(tau in 0.1f64..3.0, d in -3.0f64..3.0) {
            let h = 1e-4 * f64::max(1.0, d.abs());
            let fd = (heat_kernel(tau, d + h) - heat_kernel(tau, d - h)) / (2.0 * h);
            prop_assert!((heat_kernel_dx(tau, d) - fd).abs() < 1e-7);
        }

        #[test]
        fn kappa_identity(a in 0.01f64..10.0, b in 0.01f64..10.0, g in 0.05f64..0.95) {
            let f = |ln_d: f64| { let d = ln_d.exp(); a * d.powf(1.0 - g) + b * d.powf(-g) };
            let (_, m) = golden_min(f, -30.0, 30.0, 300);
            let k = kappa(g).unwrap() * a.powf(g) * b.powf(1.0 - g);
            prop_assert!((m - k).abs() <= 1e-6 * k);
        }

        #[test]
        fn j_below_bound(x in -3.0f64..3.0, y in -3.0f64..3.0, a in 0.01f64..1.0, b in 0.01f64..1.0, g in 0.1f64..0.9) {
            let j = J_integral(x, y, a + b, b, 0.0, g).unwrap();
            let bound = J_bound(x, y, a + b, b, 0.0, g).unwrap();
            prop_assert!(j <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn j_delta_scaling_matches_direct(x in -2.0f64..2.0, y in -2.0f64..2.0, a in 0.05f64..1.0, b in 0.05f64..1.0, delta in 0.05f64..0.95) {
            let s = J_delta_integral(x, y, a + b, b, 0.0, 0.5, delta).unwrap();
            let d = J_delta_direct(x, y, a + b, b, 0.0, 0.5, delta).unwrap();
            prop_assert!((s - d).abs() <= 1e-8 * d);
            prop_assert!(s <= J_delta_bound(x, y, a + b, b, 0.0, 0.5, delta).unwrap() * (1.0 + 1e-12));
        }
    }
}

//! Closed-form majorants and minorants: the inductive Φ_m bound, the
//! envelope D·ψ(z), the series upper estimate, q_δ and q, and the lower
//! estimate with its calibrated constant.
//!
//! Several of these are astronomically large at moderate K(t−s); the series
//! sums are therefore accumulated in log space.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, ensure, Error, Result};
use crate::gaussian_core::{heat_kernel, kappa1, SpaceTimePair};
use crate::special_functions::{
    gamma_fn, ln_gamma_unchecked, psi, psi_decay_grid, verify_psi_decay, PsiParams,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const E: f64 = std::f64::consts::E;
const LN_SERIES_TOL: f64 = -36.8; // ln 1e-16
const MAX_SERIES_TERMS: usize = 50_000_000;
const GOLDEN_ITERS: usize = 40;
const DELTA_LO: f64 = 0.01;
const DELTA_HI: f64 = 0.99;

fn check_delta(op: &'static str, delta: f64) -> Result<()> {
    ensure(delta > 0.0 && delta < 1.0, op, || format!("delta must lie in (0,1), got {delta}"))
}

fn check_gamma(op: &'static str, gamma: f64) -> Result<()> {
    ensure(gamma > 0.0 && gamma < 1.0, op, || format!("gamma must lie in (0,1), got {gamma}"))
}

fn check_pair(op: &'static str, pair: &SpaceTimePair) -> Result<()> {
    pair.validate(op)?;
    if pair.x == 0.0 {
        return Err(Error::SingularPoint { op });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub delta: f64,
    /// 1 − γ
    pub lambda: f64,
    /// √(2π) κ₁ K (1−δ)(1−γ) (eδ)^{−1/2}
    pub c: f64,
    /// 1/(1 − γ)
    pub mu: f64,
    pub b: f64,
    /// (2π)^{−1} κ₁^{−1} [(1−δ)(1−γ)]^{−1}
    pub c5: f64,
}

impl EnvelopeParams {
    pub fn new(gamma: f64, k: f64, delta: f64, b: f64) -> Result<Self> {
        check_gamma("EnvelopeParams", gamma)?;
        check_delta("EnvelopeParams", delta)?;
        ensure(k >= 0.0 && k.is_finite(), "EnvelopeParams", || format!("K must be nonnegative, got {k}"))?;
        ensure(b > 0.0 && b.is_finite(), "EnvelopeParams", || format!("B must be positive, got {b}"))?;
        let k1 = kappa1(gamma)?;
        let dg = (1.0 - delta) * (1.0 - gamma);
        Ok(Self {
            delta,
            lambda: 1.0 - gamma,
            c: TWO_PI.sqrt() * k1 * k * dg / (E * delta).sqrt(),
            mu: 1.0 / (1.0 - gamma),
            b,
            c5: 1.0 / (TWO_PI * k1 * dg),
        })
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.lambda
    }

    /// ψ parameters; `None` when c = 0 (zero drift), where ψ ≡ 0.
    pub fn psi_params(&self) -> Option<PsiParams> {
        if self.c > 0.0 {
            PsiParams::new(self.lambda, self.c, self.mu).ok()
        } else {
            None
        }
    }

    /// Λ = |ln(1 − λ)|.
    pub fn big_lambda(&self) -> f64 {
        (1.0 - self.lambda).ln().abs()
    }
}

/// Step-I bound on |Φ_m(t,x,s,y)|.
pub fn phi_m_majorant(m: usize, pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    check_pair("phi_m_majorant", pair)?;
    check_gamma("phi_m_majorant", gamma)?;
    check_delta("phi_m_majorant", delta)?;
    ensure(m >= 1, "phi_m_majorant", || "order must be >= 1".into())?;
    if k == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_phi_m_majorant(m, pair, gamma, k, delta)?.exp())
}

fn ln_phi_m_majorant(m: usize, pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    let mf = m as f64;
    let g = 1.0 - gamma;
    let tau = pair.tau();
    let d2 = pair.dist().powi(2);
    let k1 = kappa1(gamma)?;
    Ok((0.5 * mf - 1.0) * TWO_PI.ln()
        + (mf - 1.0) * k1.ln()
        + mf * k.ln()
        + (mf - 1.0) * ((1.0 - delta) * g).ln()
        - 0.5 * mf * (E * delta).ln()
        - gamma * pair.x.abs().ln()
        + (0.5 * mf * g - 1.5 + 0.5 * gamma) * tau.ln()
        + mf * ln_gamma_unchecked(0.5 * g)
        - ln_gamma_unchecked(0.5 * mf * g)
        - 0.5 * (1.0 - delta) * g.powi(m as i32 - 1) * d2 / tau)
}

/// K|x|^{−γ}(2πeδ)^{−1/2}(t−s)^{−1}exp(−(1−δ)(x−y)²/(2(t−s))).
pub fn phi1_bound(pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    check_pair("phi1_bound", pair)?;
    check_delta("phi1_bound", delta)?;
    let tau = pair.tau();
    Ok(k / pair.x.abs().powf(gamma) / (TWO_PI * E * delta).sqrt() / tau
        * (-(1.0 - delta) * pair.dist().powi(2) / (2.0 * tau)).exp())
}

/// The two-fold bound κ₁|x|^{−γ}√(1−δ)K²/(2πeδ)(t−s)^{−(1+γ)/2}Γ²((1−γ)/2)/Γ(1−γ)
/// × exp(−(1−γ)(1−δ)(x−y)²/(2(t−s))).
pub fn phi2_bound(pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    check_pair("phi2_bound", pair)?;
    check_gamma("phi2_bound", gamma)?;
    check_delta("phi2_bound", delta)?;
    let tau = pair.tau();
    let g = 1.0 - gamma;
    let gh = gamma_fn(0.5 * g)?;
    Ok(kappa1(gamma)? / pair.x.abs().powf(gamma) * (1.0 - delta).sqrt() * k * k / (TWO_PI * E * delta)
        * tau.powf(-0.5 * (1.0 + gamma))
        * gh
        * gh
        / gamma_fn(g)?
        * (-g * (1.0 - delta) * pair.dist().powi(2) / (2.0 * tau)).exp())
}

/// Bound on ∫_s^t dr ∫ |x|^{−β}|z|^{−γ}(t−r)^{α₁}(r−s)^{α₂}
/// exp(−(1−δ)/2·[(x−z)²/(t−r) + (z−y)²/(r−s)]) dz; `delta = None` is the
/// undamped case δ = 0.
#[allow(non_snake_case)]
pub fn G_convolution_bound(
    alpha1: f64,
    alpha2: f64,
    beta: f64,
    gamma: f64,
    pair: &SpaceTimePair,
    delta: Option<f64>,
) -> Result<f64> {
    check_pair("G_convolution_bound", pair)?;
    ensure(alpha1 > -1.0 && alpha2 > -1.0, "G_convolution_bound", || {
        format!("need alpha1, alpha2 > -1, got ({alpha1}, {alpha2})")
    })?;
    ensure((0.0..1.0).contains(&beta) && (0.0..1.0).contains(&gamma), "G_convolution_bound", || {
        format!("need beta, gamma in [0,1), got ({beta}, {gamma})")
    })?;
    let dl = delta.unwrap_or(0.0);
    ensure((0.0..1.0).contains(&dl), "G_convolution_bound", || format!("delta must lie in [0,1), got {dl}"))?;
    let tau = pair.tau();
    let a = 0.5 * (3.0 - gamma);
    let k1 = if gamma == 0.0 { TWO_PI.sqrt() } else { kappa1(gamma)? };
    let beta_fn = (ln_gamma_unchecked(a + alpha1) + ln_gamma_unchecked(a + alpha2)
        - ln_gamma_unchecked(2.0 * a + alpha1 + alpha2))
    .exp();
    Ok(k1
        * (1.0 - dl).powf(gamma - 1.0)
        * tau.powf(1.5 + alpha1 + alpha2 - 0.5 * gamma)
        * pair.x.abs().powf(-beta)
        * beta_fn
        * (-(1.0 - dl) * (1.0 - gamma) * pair.dist().powi(2) / (2.0 * tau)).exp())
}

/// z(δ,γ,x,y,t,s) = ½(1−δ)(1−γ)(x−y)²/(t−s).
pub fn envelope_argument(pair: &SpaceTimePair, gamma: f64, delta: f64) -> f64 {
    0.5 * (1.0 - delta) * (1.0 - gamma) * pair.dist().powi(2) / pair.tau()
}

/// Φ̄_δ = C₅|x|^{−γ}(t−s)^{−(3−γ)/2} ψ_{λ,c,μ}(z).
pub fn phi_envelope(pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    check_pair("phi_envelope", pair)?;
    let p = EnvelopeParams::new(gamma, k, delta, 1.0)?;
    let Some(pp) = p.psi_params() else {
        return Ok(0.0);
    };
    let d = p.c5 * pair.x.abs().powf(-gamma) * pair.tau().powf(-0.5 * (3.0 - gamma));
    Ok(d * psi(&pp, envelope_argument(pair, gamma, delta))?)
}

/// Golden-section search for the minimum of f on [lo, hi]; returns (x*, f(x*)).
pub fn golden_min<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, iters: usize) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let (mut xs, mut fs) = if fc < fd { (c, fc) } else { (d, fd) };
    // endpoint guard
    for x in [lo, hi] {
        let fx = f(x)?;
        if fx < fs {
            xs = x;
            fs = fx;
        }
    }
    Ok((xs, fs))
}

/// inf over δ ∈ (0.01, 0.99) of Φ̄_δ; returns (δ*, value).
pub fn phi_envelope_inf(pair: &SpaceTimePair, gamma: f64, k: f64) -> Result<(f64, f64)> {
    golden_min(|d| phi_envelope(pair, gamma, k, d), DELTA_LO, DELTA_HI, GOLDEN_ITERS)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln Σ_{m≥m0} exp(ln_term(m)), stopped once the terms decrease and fall
/// below 1e-16 of the running sum.
fn ln_series<F: Fn(usize) -> f64>(ln_term: F, m0: usize) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    for m in m0..m0 + MAX_SERIES_TERMS {
        let lt = ln_term(m);
        if lt == f64::NEG_INFINITY {
            break;
        }
        acc = log_add(acc, lt);
        if lt < prev && lt < acc + LN_SERIES_TOL {
            break;
        }
        prev = lt;
    }
    acc
}

/// ln of the m-th summand C₃C₄^m(t−s)^{m(1−γ)/2}/Γ((m(1−γ)+2−γ)/2)
/// × exp(−½(1−δ)(1−γ)^{m−1}(x−y)²/(t−s)) of the series estimate, with
/// C₄ carrying the factor K.
fn ln_series_term(m: usize, pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    let g = 1.0 - gamma;
    let k1 = kappa1(gamma)?;
    let lg = ln_gamma_unchecked(0.5 * g);
    let ln_c3 = -TWO_PI.ln() - k1.ln() - 1.5 * (1.0 - delta).ln() - g.ln() + lg;
    let ln_c4 = 0.5 * TWO_PI.ln() + k1.ln() + k.ln() + ((1.0 - delta) * g).ln() - 0.5 * (E * delta).ln() + lg;
    let mf = m as f64;
    let tau = pair.tau();
    let d2 = pair.dist().powi(2);
    Ok(ln_c3 + mf * ln_c4 + 0.5 * mf * g * tau.ln()
        - ln_gamma_unchecked(0.5 * (mf * g + 2.0 - gamma))
        - 0.5 * (1.0 - delta) * g.powi((m as i32 - 1).min(2000)) * d2 / tau)
}

/// ln of the series upper estimate Z + C₃Σ_{m≥1}(…).
pub fn ln_upper_estimate_series(pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    check_pair("upper_estimate_series", pair)?;
    check_gamma("upper_estimate_series", gamma)?;
    check_delta("upper_estimate_series", delta)?;
    let ln_z = heat_kernel(pair.tau(), pair.dist()).ln();
    if k == 0.0 {
        return Ok(ln_z);
    }
    ln_series_term(1, pair, gamma, k, delta)?;
    let s = ln_series(|m| ln_series_term(m, pair, gamma, k, delta).unwrap_or(f64::NEG_INFINITY), 1);
    Ok(log_add(ln_z, s))
}

/// The series upper estimate; +∞ when it exceeds the double range.
pub fn upper_estimate_series(pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    if k == 0.0 {
        check_pair("upper_estimate_series", pair)?;
        return Ok(heat_kernel(pair.tau(), pair.dist()));
    }
    Ok(ln_upper_estimate_series(pair, gamma, k, delta)?.exp())
}

/// Σ_{m > order} of the series summands: the certified remainder after
/// truncating the Neumann series at `order`.
pub fn series_tail_bound(pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64, order: usize) -> Result<f64> {
    pair.validate("series_tail_bound")?;
    check_gamma("series_tail_bound", gamma)?;
    check_delta("series_tail_bound", delta)?;
    if k == 0.0 {
        return Ok(0.0);
    }
    let s = ln_series(
        |m| ln_series_term(m, pair, gamma, k, delta).unwrap_or(f64::NEG_INFINITY),
        order + 1,
    );
    Ok(s.exp())
}

/// ln Σ_m of the step-I majorants, for the envelope identity check.
pub fn ln_majorant_sum(pair: &SpaceTimePair, gamma: f64, k: f64, delta: f64) -> Result<f64> {
    check_pair("majorant_sum", pair)?;
    check_gamma("majorant_sum", gamma)?;
    check_delta("majorant_sum", delta)?;
    if k == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_series(
        |m| ln_phi_m_majorant(m, pair, gamma, k, delta).unwrap_or(f64::NEG_INFINITY),
        1,
    ))
}

/// Regime (x−y)² ≥ BΛe^e(t−s) with Λ = |ln γ|.
pub fn regime_holds(pair: &SpaceTimePair, gamma: f64, b: f64) -> bool {
    regime_check(pair, gamma, b).is_ok()
}

pub fn regime_check(pair: &SpaceTimePair, gamma: f64, b: f64) -> Result<()> {
    let lhs = pair.dist().powi(2);
    let rhs = b * gamma.ln().abs() * E.exp() * pair.tau();
    if lhs >= rhs {
        Ok(())
    } else {
        Err(Error::Regime { lhs, rhs })
    }
}

/// Ĉ₁(λ,c,μ;B) from the ψ decay scan; 0 when c = 0.
pub fn c1_hat(params: &EnvelopeParams) -> Result<f64> {
    let Some(pp) = params.psi_params() else {
        return Ok(0.0);
    };
    let grid = psi_decay_grid(&pp, 1e6, 200);
    Ok(verify_psi_decay(&pp, params.b, &grid)?.c1_hat)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    pub value: f64,
    pub delta: f64,
    pub c1_hat: f64,
}

fn polynomial_factor(pair: &SpaceTimePair, gamma: f64, delta: f64, b: f64) -> f64 {
    (1.0 + (1.0 - delta) * (1.0 - gamma) * pair.dist().powi(2) / pair.tau()).powf(-b)
}

/// q_δ = Z + Ĉ₁C₅(t−s)^{−(3−γ)/2}[1 + (1−δ)(1−γ)(x−y)²/(t−s)]^{−B}.
pub fn q_delta(pair: &SpaceTimePair, gamma: f64, k: f64, b: f64, delta: f64) -> Result<QValue> {
    check_pair("q_delta", pair)?;
    regime_check(pair, gamma, b)?;
    let p = EnvelopeParams::new(gamma, k, delta, b)?;
    let c1 = c1_hat(&p)?;
    let value = heat_kernel(pair.tau(), pair.dist())
        + c1 * p.c5 * pair.tau().powf(-0.5 * (3.0 - gamma)) * polynomial_factor(pair, gamma, delta, b);
    Ok(QValue {
        value,
        delta,
        c1_hat: c1,
    })
}

/// q = inf_δ q_δ by golden section on (0.01, 0.99).
pub fn q_upper(pair: &SpaceTimePair, gamma: f64, k: f64, b: f64) -> Result<QValue> {
    check_pair("q_upper", pair)?;
    regime_check(pair, gamma, b)?;
    let (d, _) = golden_min(|d| Ok(q_delta(pair, gamma, k, b, d)?.value), DELTA_LO, DELTA_HI, GOLDEN_ITERS)?;
    q_delta(pair, gamma, k, b, d)
}

/// Z + C₆(t−s)^{−(3−γ)/2}[1 + (1−δ)(1−γ)(x−y)²/(t−s)]^{−B₁}.
pub fn lower_estimate(
    pair: &SpaceTimePair,
    gamma: f64,
    k_minus: Option<f64>,
    delta: f64,
    b1: f64,
    c6: f64,
) -> Result<f64> {
    check_pair("lower_estimate", pair)?;
    check_delta("lower_estimate", delta)?;
    match k_minus {
        Some(km) if km > 0.0 => {}
        _ => return Err(Error::Config("lower_estimate needs a positive K_minus".into())),
    }
    ensure(b1 > 0.0, "lower_estimate", || format!("B1 must be positive, got {b1}"))?;
    regime_check(pair, gamma, b1)?;
    Ok(lower_shape(pair, gamma, delta, b1, c6))
}

fn lower_shape(pair: &SpaceTimePair, gamma: f64, delta: f64, b1: f64, c6: f64) -> f64 {
    heat_kernel(pair.tau(), pair.dist())
        + c6 * pair.tau().powf(-0.5 * (3.0 - gamma)) * polynomial_factor(pair, gamma, delta, b1)
}

/// Decay exponents of q and of the minorant, with the calibrated C₆.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_b")]
    pub b1: f64,
    #[serde(default)]
    pub calibration: Option<Calibration>,
}

fn default_b() -> f64 {
    4.0
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            b: 4.0,
            b1: 4.0,
            calibration: None,
        }
    }
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite() && self.b1 > 0.0 && self.b1.is_finite()) {
            return Err(Error::Config(format!("B and B1 must be positive, got ({}, {})", self.b, self.b1)));
        }
        if let Some(c) = &self.calibration {
            if !c.c6.is_finite() || !(c.delta > 0.0 && c.delta < 1.0) || c.b1 != self.b1 {
                return Err(Error::Config(
                    "calibration needs a finite c6, delta in (0,1) and the configured B1".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub c6: f64,
    pub b1: f64,
    pub delta: f64,
    pub points: usize,
    pub grid_hash: String,
}

/// SHA-256 over the little-endian coordinates of the pairs.
pub fn grid_hash(pairs: &[SpaceTimePair]) -> String {
    let mut h = Sha256::new();
    for p in pairs {
        for v in [p.t, p.x, p.s, p.y] {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Largest C₆ for which the minorant stays below the supplied p values at
/// every sample inside the regime.
pub fn calibrate_c6(samples: &[(SpaceTimePair, f64)], gamma: f64, delta: f64, b1: f64) -> Result<Calibration> {
    check_gamma("calibrate_c6", gamma)?;
    check_delta("calibrate_c6", delta)?;
    let mut c6 = f64::INFINITY;
    let mut used = 0;
    for (pair, p) in samples {
        if pair.x == 0.0 || !regime_holds(pair, gamma, b1) {
            continue;
        }
        let shape = lower_shape(pair, gamma, delta, b1, 1.0) - heat_kernel(pair.tau(), pair.dist());
        let z = heat_kernel(pair.tau(), pair.dist());
        c6 = c6.min((p - z) / shape);
        used += 1;
    }
    if used == 0 {
        return Err(domain("calibrate_c6", "no sample satisfies the regime condition"));
    }
    let pairs: Vec<SpaceTimePair> = samples.iter().map(|(p, _)| *p).collect();
    Ok(Calibration {
        c6,
        b1,
        delta,
        points: used,
        grid_hash: grid_hash(&pairs),
    })
}

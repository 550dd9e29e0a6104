//! Quadrature for the weakly singular integrals of the construction.
//!
//! Space: |z|^{−γ}-type singularities at the origin are removed by the
//! substitution z = sign(w)|w|^{1/(1−γ)} on |z| ≤ Δ, which maps |z|^{−γ}dz to
//! (1/(1−γ))dw. Time: Gauss–Jacobi for declared endpoint powers, or a
//! polynomial end-grading map when the powers are not known exactly.

use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure, Error, Result};
use crate::gaussian_core::SpaceTimePair;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 0 {
                break;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Jacobi rule for the weight (1−x)^α(1+x)^β on [−1, 1] (Golub–Welsch).
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    ensure(alpha > -1.0 && beta > -1.0, "gauss_jacobi", || {
        format!("exponents must exceed -1, got alpha={alpha} beta={beta}")
    })?;
    ensure(n >= 1, "gauss_jacobi", || "need at least one node".into())?;
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    diag[0] = (beta - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off[k - 1] = b2.sqrt();
    }
    let jm = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let eig = jm.symmetric_eigen();
    let mu0 = (ab + 1.0).exp2()
        * crate::special_functions::beta_unchecked(alpha + 1.0, beta + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Sum in a fixed binary tree, independent of evaluation scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceRule {
    pub gamma: f64,
    pub truncation_radius_multiplier: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl SpaceRule {
    pub fn new(gamma: f64, truncation_radius_multiplier: f64, panels: usize, nodes_per_panel: usize) -> Result<Self> {
        let r = Self {
            gamma,
            truncation_radius_multiplier,
            panels,
            nodes_per_panel,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gamma >= 0.0 && self.gamma < 1.0, "SpaceRule", || {
            format!("gamma must lie in [0,1), got {}", self.gamma)
        })?;
        ensure(self.truncation_radius_multiplier >= 7.5, "SpaceRule", || {
            format!(
                "truncation radius {} leaves a Gaussian tail above 1e-12",
                self.truncation_radius_multiplier
            )
        })?;
        ensure(self.panels >= 1, "SpaceRule", || "need at least one panel".into())?;
        ensure(self.nodes_per_panel >= 4, "SpaceRule", || {
            format!("nodes_per_panel must be at least 4, got {}", self.nodes_per_panel)
        })
    }

    /// 16 panels of 24 nodes, radius 8.
    pub fn standard(gamma: f64) -> Self {
        Self {
            gamma,
            truncation_radius_multiplier: 8.0,
            panels: 16,
            nodes_per_panel: 24,
        }
    }

    /// Doubled panels and nodes.
    pub fn reference(gamma: f64) -> Self {
        Self::standard(gamma).doubled()
    }

    pub fn doubled(&self) -> Self {
        Self {
            panels: self.panels * 2,
            nodes_per_panel: self.nodes_per_panel * 2,
            ..*self
        }
    }

    /// Nodes z_i and weights w_i with Σ w_i f(z_i) ≈ ∫_window f dz for f that
    /// may carry a |z|^{−γ} factor.
    pub fn nodes(&self, window: &SpaceWindow) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.prepare().nodes_into(window, &mut out);
        out
    }

    pub fn prepare(&self) -> PreparedSpaceRule {
        let (gx, gw) = gauss_legendre(self.nodes_per_panel);
        PreparedSpaceRule { rule: *self, gx, gw }
    }
}

/// A [`SpaceRule`] with its Gauss–Legendre panel rule precomputed.
#[derive(Debug, Clone)]
pub struct PreparedSpaceRule {
    pub rule: SpaceRule,
    gx: Vec<f64>,
    gw: Vec<f64>,
}

impl PreparedSpaceRule {
    /// Appends nodes in ascending z: left outer, left inner, right inner,
    /// right outer. Inner segments use z = ±w^{1/(1−γ)}.
    pub fn nodes_into(&self, window: &SpaceWindow, out: &mut Vec<(f64, f64)>) {
        let rule = &self.rule;
        let (lo, hi, d) = (window.lo, window.hi, window.delta);
        let outer = [(lo, hi.min(-d)), (lo.max(d), hi)];
        let inner = [(lo.max(-d), hi.min(0.0)), (lo.max(0.0), hi.min(d))];
        let outer_len: f64 = outer.iter().map(|(a, b)| (b - a).max(0.0)).sum();
        let inner_panels = (rule.panels / 4).max(1);
        let mu = 1.0 / (1.0 - rule.gamma);
        let (gx, gw) = (&self.gx, &self.gw);

        let push_plain = |a: f64, b: f64, out: &mut Vec<(f64, f64)>| {
            if b <= a {
                return;
            }
            let np = ((rule.panels as f64 * (b - a) / outer_len).round() as usize).max(1);
            let h = (b - a) / np as f64;
            for p in 0..np {
                let c = a + (p as f64 + 0.5) * h;
                for (xi, wi) in gx.iter().zip(gw) {
                    out.push((c + 0.5 * h * xi, 0.5 * h * wi));
                }
            }
        };
        let push_mapped = |a: f64, b: f64, sign: f64, out: &mut Vec<(f64, f64)>| {
            // |z| ∈ [a, b], z = sign·w^μ with w ∈ [a^{1−γ}, b^{1−γ}]
            if b <= a {
                return;
            }
            let (wa, wb) = (a.powf(1.0 - rule.gamma), b.powf(1.0 - rule.gamma));
            let h = (wb - wa) / inner_panels as f64;
            let start = out.len();
            for p in 0..inner_panels {
                let c = wa + (p as f64 + 0.5) * h;
                for (xi, wi) in gx.iter().zip(gw) {
                    let w = c + 0.5 * h * xi;
                    let z = w.powf(mu);
                    // dz = μ w^{μ−1} dw
                    out.push((sign * z, 0.5 * h * wi * mu * w.powf(mu - 1.0)));
                }
            }
            if sign < 0.0 {
                out[start..].reverse();
            }
        };
        push_plain(outer[0].0, outer[0].1, out);
        push_mapped(-inner[0].1, -inner[0].0, -1.0, out);
        push_mapped(inner[1].0, inner[1].1, 1.0, out);
        push_plain(outer[1].0, outer[1].1, out);
    }
}

/// Integration window [lo, hi] with the inner half-width Δ around the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceWindow {
    pub lo: f64,
    pub hi: f64,
    pub delta: f64,
}

impl SpaceWindow {
    pub fn new(lo: f64, hi: f64, delta: f64) -> Self {
        Self { lo, hi, delta }
    }

    /// center ± radius·sigma, with Δ = sigma.
    pub fn gaussian(center: f64, sigma: f64, radius: f64) -> Self {
        Self {
            lo: center - radius * sigma,
            hi: center + radius * sigma,
            delta: sigma,
        }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }
}

/// ∫ f(z) dz over the window, f allowed an integrable |z|^{−γ} singularity.
pub fn integrate_space_singular<F: Fn(f64) -> f64>(
    f: F,
    gamma: f64,
    rule: &SpaceRule,
    window: &SpaceWindow,
) -> Result<f64> {
    ensure(gamma >= 0.0 && gamma < 1.0, "integrate_space_singular", || {
        format!("gamma must lie in [0,1), got {gamma}")
    })?;
    let rule = SpaceRule { gamma, ..*rule };
    rule.validate()?;
    let nodes = rule.nodes(window);
    let mut vals = Vec::with_capacity(nodes.len());
    for &(z, w) in &nodes {
        let v = f(z);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                op: "integrate_space_singular",
                location: format!("z = {z}"),
            });
        }
        vals.push(w * v);
    }
    Ok(pairwise_sum(&vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeRule {
    /// power a of (t−r)^{−a}
    pub exponent_left: f64,
    /// power b of (r−s)^{−b}
    pub exponent_right: f64,
    pub nodes: usize,
    /// Degree k of the end-grading map r = s + (t−s)u^k/(u^k+(1−u)^k);
    /// k = 1 selects plain Gauss–Jacobi with the declared exponents.
    #[serde(default = "one")]
    pub grading: u32,
}

fn one() -> u32 {
    1
}

impl TimeRule {
    pub fn new(exponent_left: f64, exponent_right: f64, nodes: usize) -> Result<Self> {
        let r = Self {
            exponent_left,
            exponent_right,
            nodes,
            grading: 1,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn graded(nodes: usize, grading: u32) -> Self {
        Self {
            exponent_left: 0.0,
            exponent_right: 0.0,
            nodes,
            grading,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.exponent_left < 1.0 && self.exponent_right < 1.0, "TimeRule", || {
            format!(
                "endpoint exponents must be < 1, got ({}, {})",
                self.exponent_left, self.exponent_right
            )
        })?;
        ensure(self.nodes >= 8, "TimeRule", || format!("need at least 8 nodes, got {}", self.nodes))?;
        ensure(self.grading >= 1, "TimeRule", || "grading degree must be >= 1".into())
    }

    pub fn doubled(&self) -> Self {
        Self {
            nodes: self.nodes * 2,
            ..*self
        }
    }

    /// Nodes with Σ w_i h(r_i) ≈ ∫_s^t h(r) dr; both end gaps are kept to full
    /// relative precision.
    pub fn nodes(&self, s: f64, t: f64) -> Vec<TimeNode> {
        let len = t - s;
        if self.grading <= 1 {
            let (a, b) = (self.exponent_left, self.exponent_right);
            // (1−x)^{−a}(1+x)^{−b}: r = s + len(1+x)/2
            let (x, w) = gauss_jacobi(self.nodes, -a, -b).expect("validated exponents");
            x.iter()
                .zip(&w)
                .map(|(&xi, &wi)| {
                    let (u, v) = (0.5 * (1.0 + xi), 0.5 * (1.0 - xi));
                    let un = v.powf(a) * u.powf(b);
                    TimeNode {
                        r: s + len * u,
                        from_s: len * u,
                        to_t: len * v,
                        w: wi * 0.5 * len * un * (2.0f64).powf(a + b),
                    }
                })
                .collect()
        } else {
            let k = self.grading as i32;
            let (x, w) = gauss_legendre(self.nodes);
            x.iter()
                .zip(&w)
                .map(|(&xi, &wi)| {
                    let (u, v) = (0.5 * (1.0 + xi), 0.5 * (1.0 - xi));
                    let (uk, vk) = (u.powi(k), v.powi(k));
                    let den = uk + vk;
                    let dphi = k as f64 * (u * v).powi(k - 1) / (den * den);
                    TimeNode {
                        r: s + len * uk / den,
                        from_s: len * uk / den,
                        to_t: len * vk / den,
                        w: 0.5 * wi * len * dphi,
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeNode {
    pub r: f64,
    /// r − s
    pub from_s: f64,
    /// t − r
    pub to_t: f64,
    pub w: f64,
}

/// ∫_s^t (t−r)^{−a}(r−s)^{−b} g(r) dr by Gauss–Jacobi, a and b from the rule.
pub fn integrate_time_beta<G: Fn(f64) -> f64>(g: G, s: f64, t: f64, rule: &TimeRule) -> Result<f64> {
    rule.validate()?;
    ensure(s < t, "integrate_time_beta", || format!("need s < t, got s={s} t={t}"))?;
    let (a, b) = (rule.exponent_left, rule.exponent_right);
    let (x, w) = gauss_jacobi(rule.nodes, -a, -b)?;
    let len = t - s;
    let scale = len.powf(1.0 - a - b) * (0.5f64).powf(1.0 - a - b);
    let mut vals = Vec::with_capacity(x.len());
    for (&xi, &wi) in x.iter().zip(&w) {
        let r = s + len * 0.5 * (1.0 + xi);
        let v = g(r);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                op: "integrate_time_beta",
                location: format!("r = {r}"),
            });
        }
        vals.push(wi * v);
    }
    Ok(scale * pairwise_sum(&vals))
}

/// Bridge window at time r between (t, x) and (s, y).
pub fn bridge_window(pair: &SpaceTimePair, r: f64, radius: f64) -> SpaceWindow {
    let a = pair.t - r;
    let b = r - pair.s;
    let c = (pair.x * b + pair.y * a) / (a + b);
    let sigma = (a * b / (a + b)).sqrt();
    SpaceWindow::gaussian(c, sigma, radius).with_delta(a.sqrt().min(b.sqrt()))
}

/// (f∗g)(t,x,s,y) = ∫_s^t dr ∫ f(t,x,r,z) g(r,z,s,y) dz.
pub fn convolve<F, G>(
    f: F,
    g: G,
    pair: &SpaceTimePair,
    space_rule: &SpaceRule,
    time_rule: &TimeRule,
) -> Result<f64>
where
    F: Fn(f64, f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64, f64) -> f64,
{
    pair.validate("convolve")?;
    space_rule.validate()?;
    time_rule.validate()?;
    let nodes = time_rule.nodes(pair.s, pair.t);
    let mut vals = Vec::with_capacity(nodes.len());
    for node in &nodes {
        let (r, wr) = (node.r, node.w);
        let window = bridge_window(pair, r, space_rule.truncation_radius_multiplier);
        let inner = integrate_space_singular(
            |z| f(pair.t, pair.x, r, z) * g(r, z, pair.s, pair.y),
            space_rule.gamma,
            space_rule,
            &window,
        )
        .map_err(|e| match e {
            Error::NonFinite { location, .. } => Error::NonFinite {
                op: "convolve",
                location: format!("r = {r}, {location}"),
            },
            other => other,
        })?;
        vals.push(wr * inner);
    }
    let v = pairwise_sum(&vals);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain("convolve", "non-finite result"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_core::heat_kernel;
    use crate::special_functions::beta_fn;
    use crate::test_oracles::singular_line_integral;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        for k in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn jacobi_reduces_to_legendre() {
        let (xl, wl) = gauss_legendre(12);
        let (xj, wj) = gauss_jacobi(12, 0.0, 0.0).unwrap();
        for i in 0..12 {
            assert!((xl[i] - xj[i]).abs() < 1e-13);
            assert!((wl[i] - wj[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn space_examples() {
        let rule = SpaceRule::standard(0.0);
        let g = integrate_space_singular(
            |z| (-0.5 * z * z).exp(),
            0.0,
            &rule,
            &SpaceWindow::gaussian(0.0, 1.0, 8.0),
        )
        .unwrap();
        assert!(rel(g, (2.0 * std::f64::consts::PI).sqrt()) < 1e-12);

        let rule = SpaceRule::standard(0.5);
        let v = integrate_space_singular(
            |z| if z.abs() <= 1.0 { z.abs().powf(-0.5) } else { 0.0 },
            0.5,
            &rule,
            &SpaceWindow::new(-1.0, 1.0, 1.0),
        )
        .unwrap();
        assert!(rel(v, 4.0) < 1e-12);
    }

    #[test]
    fn space_matches_adaptive_oracle_on_j_family() {
        let rule = SpaceRule::standard(0.5);
        for &(x, y, a, b) in &[(0.0, 0.0, 0.5, 0.5), (1.0, -0.5, 0.2, 0.7), (0.3, 2.0, 0.05, 0.9), (-2.0, -1.5, 0.3, 0.3)] {
            let v = a * b / (a + b);
            let c = (x * b + y * a) / (a + b);
            let f = |z: f64| {
                z.abs().powf(-0.5) * (-0.5 * ((x - z) * (x - z) / a + (z - y) * (z - y) / b)).exp()
            };
            let win = SpaceWindow::gaussian(c, v.sqrt(), 8.0).with_delta(a.sqrt().min(b.sqrt()));
            let q = integrate_space_singular(f, 0.5, &rule, &win).unwrap();
            let o = singular_line_integral(&f, 0.5, win.lo, win.hi, 1e-14);
            assert!(rel(q, o) < 1e-9, "{x} {y} {a} {b}: {q} vs {o}");
            // refinement
            let q2 = integrate_space_singular(f, 0.5, &rule.doubled(), &win).unwrap();
            assert!(rel(q, q2) < 1e-8);
        }
    }

    #[test]
    fn space_rejects_bad_gamma_and_nan() {
        let rule = SpaceRule::standard(0.5);
        let w = SpaceWindow::gaussian(0.0, 1.0, 8.0);
        assert!(integrate_space_singular(|z| z, 1.0, &rule, &w).is_err());
        assert!(integrate_space_singular(|_| f64::NAN, 0.5, &rule, &w).is_err());
    }

    #[test]
    fn time_beta_closed_forms() {
        for &(a, b) in &[(0.25, 0.25), (0.5, 0.5), (0.75, 0.75), (0.75, 0.1)] {
            let rule = TimeRule::new(a, b, 16).unwrap();
            let q = integrate_time_beta(|_| 1.0, 0.0, 1.0, &rule).unwrap();
            assert!(rel(q, beta_fn(1.0 - a, 1.0 - b).unwrap()) < 1e-9);
            let q2 = integrate_time_beta(|_| 1.0, 1.0, 3.0, &rule).unwrap();
            assert!(rel(q2, beta_fn(1.0 - a, 1.0 - b).unwrap() * 2f64.powf(1.0 - a - b)) < 1e-9);
        }
        let pi = integrate_time_beta(|_| 1.0, 0.0, 1.0, &TimeRule::new(0.5, 0.5, 8).unwrap()).unwrap();
        assert!(rel(pi, std::f64::consts::PI) < 1e-12);
        // γ = 0.5, t−s = 2: 2^{−0.5}B(0.25, 0.25)
        let q = integrate_time_beta(|_| 1.0, 0.0, 2.0, &TimeRule::new(0.75, 0.75, 16).unwrap()).unwrap();
        assert!(rel(q, 2f64.powf(-0.5) * beta_fn(0.25, 0.25).unwrap()) < 1e-10);
    }

    #[test]
    fn time_rule_node_weights_match_beta_form() {
        let rule = TimeRule::new(0.75, 0.75, 24).unwrap();
        let (s, t) = (0.3, 1.1);
        let q: f64 = rule
            .nodes(s, t)
            .iter()
            .map(|n| n.w * n.to_t.powf(-0.75) * n.from_s.powf(-0.75) * n.r.cos())
            .sum();
        let o = integrate_time_beta(|r| r.cos(), s, t, &rule).unwrap();
        assert!(rel(q, o) < 1e-12);
    }

    #[test]
    fn graded_time_rule_handles_sqrt_endpoints() {
        let rule = TimeRule::graded(48, 4);
        let q: f64 = rule
            .nodes(0.0, 1.0)
            .iter()
            .map(|n| n.w * n.from_s.powf(-0.25) * n.to_t.powf(-0.75))
            .sum();
        assert!(rel(q, beta_fn(0.75, 0.25).unwrap()) < 1e-9);
    }

    #[test]
    fn time_rule_rejects_nonintegrable() {
        assert!(TimeRule::new(1.0, 0.0, 16).is_err());
        assert!(TimeRule::new(0.0, 0.0, 4).is_err());
    }

    #[test]
    fn convolve_heat_kernels_gives_tau_z() {
        let pair = SpaceTimePair::new(1.0, 0.7, 0.2, -0.4).unwrap();
        let k = |t: f64, x: f64, s: f64, y: f64| heat_kernel(t - s, x - y);
        let q = convolve(k, k, &pair, &SpaceRule::standard(0.0), &TimeRule::graded(16, 2)).unwrap();
        let exact = pair.tau() * heat_kernel(pair.tau(), pair.dist());
        assert!(rel(q, exact) < 1e-10);
        let zero = convolve(k, |_, _, _, _| 0.0, &pair, &SpaceRule::standard(0.0), &TimeRule::graded(16, 2)).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 1e-3).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum(&v.clone()));
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn convolve_is_linear(alpha in -3.0f64..3.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let pair = SpaceTimePair::new(0.8, x, 0.1, y).unwrap();
            let f = |t: f64, x: f64, s: f64, y: f64| heat_kernel(t - s, x - y) * (1.0 + x.abs()).recip();
            let fa = |t: f64, x: f64, s: f64, y: f64| alpha * f(t, x, s, y);
            let g = |t: f64, x: f64, s: f64, y: f64| heat_kernel(t - s, x - y) * y.abs().powf(-0.5);
            let rs = SpaceRule::standard(0.5);
            let rt = TimeRule::graded(16, 2);
            let a = convolve(fa, g, &pair, &rs, &rt).unwrap();
            let b = alpha * convolve(f, g, &pair, &rs, &rt).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }

        #[test]
        fn even_integrand_is_twice_half_line(c in 0.1f64..3.0, sig in 0.2f64..2.0) {
            let rule = SpaceRule::standard(0.5);
            let f = |z: f64| z.abs().powf(-0.5) * (-(z.abs() - c).powi(2) / (2.0 * sig * sig)).exp();
            let r = c + 8.0 * sig;
            let full = integrate_space_singular(f, 0.5, &rule, &SpaceWindow::new(-r, r, sig)).unwrap();
            let half = integrate_space_singular(f, 0.5, &rule, &SpaceWindow::new(0.0, r, sig)).unwrap();
            prop_assert!((full - 2.0 * half).abs() <= 1e-10 * full);
        }
    }
}

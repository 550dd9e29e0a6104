//! Φ₁ = (b/|x|^γ)∂ₓZ, the Neumann recursion Φ_{m+1} = Φ₁∗Φ_m and the
//! assembly p = Z + Σ Z∗Φ_m, with the Cauchy and source representations.
//!
//! The iterated kernels are carried as tables anchored at one end point.
//! Forward tables fix (s, y) and hold G_m(r, z) with Φ_{m+1} = β G_m:
//!
//!   G_0 = ∂_z Z_{r−s}(z−y),  G_m(r,z) = ∫∫ ∂_z Z_{r−r'}(z−z') β(r',z') G_{m−1}(r',z'),
//!
//! so Z∗Φ_m(t,x) = ∫∫ Z_{t−r}(x−z) β(r,z) G_{m−1}(r,z). Backward tables fix
//! (t, x) and hold V_m(s', y') = Z∗Φ_m(t,x,s',y') through
//!
//!   V_0 = Z_{t−r}(x−z),  V_m(s',y') = ∫∫ V_{m−1}(r,z) β(r,z) ∂_z Z_{r−s'}(z−y').

mod bridge;
mod table;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{ensure, Error, Result};
use crate::gaussian_core::{heat_kernel, heat_kernel_dx, SpaceTimePair};
use crate::singular_quadrature::{SpaceRule, SpaceWindow, TimeRule};
use bridge::{bridge, BridgeRules, Geometry, KernelKind, Source};
use table::{KernelTable, QMap, TableGrid};

pub use table::TableSpec;

pub type CoefficientFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The coefficient b(t, x).
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// a·(0.6 + 0.4 cos(x + t))
    BoundedOscillatory(f64),
    Custom(CoefficientFn),
}

impl std::fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coefficient::Constant(v) => write!(f, "Constant({v})"),
            Coefficient::BoundedOscillatory(a) => write!(f, "BoundedOscillatory({a})"),
            Coefficient::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Coefficient {
    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::BoundedOscillatory(a) => a * (0.6 + 0.4 * (x + t).cos()),
            Coefficient::Custom(f) => f(t, x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Constant(v) if *v == 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct DriftSpec {
    pub b: Coefficient,
    pub gamma: f64,
    /// sup |b|
    pub k: f64,
    /// inf b, when positive
    pub k_minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftAudit {
    pub samples: usize,
    /// max |b| / K over the samples
    pub max_ratio: f64,
    pub min_value: f64,
    pub sup_violations: usize,
    pub inf_violations: usize,
}

impl DriftAudit {
    pub fn ok(&self) -> bool {
        self.sup_violations == 0 && self.inf_violations == 0
    }
}

impl DriftSpec {
    pub fn new(b: Coefficient, gamma: f64, k: f64, k_minus: Option<f64>) -> Result<Self> {
        let d = Self { b, gamma, k, k_minus };
        d.validate()?;
        Ok(d)
    }

    pub fn zero(gamma: f64) -> Self {
        Self {
            b: Coefficient::Constant(0.0),
            gamma,
            k: 0.0,
            k_minus: None,
        }
    }

    pub fn constant(value: f64, gamma: f64) -> Self {
        Self {
            b: Coefficient::Constant(value),
            gamma,
            k: value.abs(),
            k_minus: (value > 0.0).then_some(value),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gamma > 0.0 && self.gamma < 1.0, "DriftSpec", || {
            format!("gamma must lie in (0,1), got {}", self.gamma)
        })?;
        ensure(self.k >= 0.0 && self.k.is_finite(), "DriftSpec", || {
            format!("K must be nonnegative, got {}", self.k)
        })?;
        if let Some(km) = self.k_minus {
            ensure(km > 0.0 && km.is_finite(), "DriftSpec", || {
                format!("K_minus must be positive, got {km}")
            })?;
        }
        Ok(())
    }

    /// β = b(t,x)/|x|^γ.
    #[inline]
    pub fn beta(&self, t: f64, x: f64) -> f64 {
        self.b.eval(t, x) / x.abs().powf(self.gamma)
    }

    /// Samples b on an n_t × n_x grid of [t0,t1]×[x0,x1] and checks the
    /// declared bounds K and K₋.
    pub fn audit(&self, t0: f64, t1: f64, x0: f64, x1: f64, n_t: usize, n_x: usize) -> DriftAudit {
        let mut a = DriftAudit {
            samples: 0,
            max_ratio: 0.0,
            min_value: f64::INFINITY,
            sup_violations: 0,
            inf_violations: 0,
        };
        for i in 0..n_t.max(1) {
            let t = t0 + (t1 - t0) * i as f64 / (n_t.max(2) - 1) as f64;
            for j in 0..n_x.max(1) {
                let x = x0 + (x1 - x0) * j as f64 / (n_x.max(2) - 1) as f64;
                let v = self.b.eval(t, x);
                a.samples += 1;
                a.min_value = a.min_value.min(v);
                let ratio = if self.k > 0.0 {
                    v.abs() / self.k
                } else if v == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                a.max_ratio = a.max_ratio.max(ratio);
                if v.abs() > self.k * (1.0 + 1e-12) {
                    a.sup_violations += 1;
                }
                if let Some(km) = self.k_minus {
                    if v < km * (1.0 - 1e-12) {
                        a.inf_violations += 1;
                    }
                }
            }
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeumannConfig {
    pub max_order: usize,
    pub tail_tolerance: f64,
    pub delta: f64,
    pub space_rule: SpaceRule,
    pub time_rule: TimeRule,
    #[serde(default)]
    pub table: TableSpec,
}

impl NeumannConfig {
    pub fn standard(gamma: f64) -> Self {
        Self {
            max_order: 4,
            tail_tolerance: 1e-6,
            delta: 0.5,
            space_rule: SpaceRule {
                gamma,
                truncation_radius_multiplier: 8.0,
                panels: 6,
                nodes_per_panel: 8,
            },
            time_rule: TimeRule::graded(20, 4),
            table: TableSpec::default(),
        }
    }

    /// Space and time rules doubled; the tables keep their grid.
    pub fn doubled(&self) -> Self {
        Self {
            space_rule: self.space_rule.doubled(),
            time_rule: self.time_rule.doubled(),
            ..*self
        }
    }

    pub fn refined_tables(&self) -> Self {
        Self {
            table: self.table.refined(),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.max_order >= 1, "NeumannConfig", || "max_order must be >= 1".into())?;
        ensure(self.tail_tolerance > 0.0, "NeumannConfig", || {
            format!("tail_tolerance must be positive, got {}", self.tail_tolerance)
        })?;
        ensure(self.delta > 0.0 && self.delta < 1.0, "NeumannConfig", || {
            format!("delta must lie in (0,1), got {}", self.delta)
        })?;
        self.space_rule.validate()?;
        self.time_rule.validate()?;
        self.table.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannResult {
    pub value_p: f64,
    pub leading_z: f64,
    /// Z∗Φ_m for m = 1..=truncation_order
    pub terms: Vec<f64>,
    pub truncation_order: usize,
    /// Σ_{m > order} of the series majorant; may be +∞ (serialized as null)
    pub analytic_tail_bound: f64,
    /// set when the tail bound is not below the tolerance
    pub tail_warning: bool,
}

fn forward_exponent(m: usize, gamma: f64) -> f64 {
    1.0 - 0.5 * m as f64 * (1.0 - gamma)
}

fn backward_exponent(m: usize, gamma: f64) -> f64 {
    0.5 - 0.5 * m as f64 * (1.0 - gamma)
}

/// Shared state of an anchored family of tables.
struct Engine {
    drift: DriftSpec,
    config: NeumannConfig,
    rules: BridgeRules,
}

impl Engine {
    fn new(drift: &DriftSpec, config: &NeumannConfig) -> Result<Self> {
        drift.validate()?;
        config.validate()?;
        let space = SpaceRule {
            gamma: drift.gamma,
            ..config.space_rule
        };
        Ok(Self {
            drift: drift.clone(),
            config: *config,
            rules: BridgeRules::new(&space, &config.time_rule),
        })
    }

    fn integrate(&self, geo: &Geometry, kernel: KernelKind, source: Source<'_>) -> f64 {
        let mut buf = Vec::with_capacity(self.rules.max_space_nodes());
        bridge(&self.rules, &self.drift, geo, kernel, source, &mut buf)
    }

    /// Tabulates F(age, z) = bridge(target at age from the anchor) on the
    /// table grid; dir = +1 for forward tables, −1 for backward ones.
    #[allow(clippy::too_many_arguments)]
    fn build_table(
        &self,
        anchor_time: f64,
        anchor_pos: f64,
        t_max: f64,
        dir: f64,
        kernel: KernelKind,
        source: Source<'_>,
        scale_exponent: f64,
    ) -> Result<KernelTable> {
        let gamma = self.drift.gamma;
        let grid = TableGrid::new(&self.config.table, gamma);
        let n_q = grid.n_q;
        let data: Vec<f64> = (0..grid.n_theta * n_q)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(self.rules.max_space_nodes()),
                |buf, idx| {
                    let (j, k) = (idx / n_q, idx % n_q);
                    let age = grid.age(t_max, j);
                    let z = QMap::new(anchor_pos, gamma, age).z(grid.q(k));
                    let geo = Geometry {
                        anchor_time,
                        anchor_pos,
                        target_time: anchor_time + dir * age,
                        target_pos: z,
                    };
                    age.powf(scale_exponent) * bridge(&self.rules, &self.drift, &geo, kernel, source, buf)
                },
            )
            .collect();
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                op: "build_table",
                location: format!("node {i}"),
            });
        }
        Ok(KernelTable::from_grid(grid, anchor_pos, gamma, t_max, scale_exponent, data))
    }

    /// Orders kept by the tail rule and the tail bound after the last one.
    fn truncate(&self, pair: &SpaceTimePair) -> (usize, f64) {
        let d = &self.drift;
        let max = self.config.max_order;
        let tail = |m| bounds::series_tail_bound(pair, d.gamma, d.k, self.config.delta, m).unwrap_or(f64::INFINITY);
        // the tail is nonincreasing in the order
        let last = tail(max);
        if !(last < self.config.tail_tolerance) {
            return (max, last);
        }
        for m in 1..max {
            let t = tail(m);
            if t < self.config.tail_tolerance {
                return (m, t);
            }
        }
        (max, last)
    }
}

/// p(·,·; s, y) for a fixed starting point, valid for t − s ≤ t_max.
pub struct ForwardKernel {
    engine: Engine,
    s: f64,
    y: f64,
    t_max: f64,
    /// G_1..G_{M−1}
    tables: Vec<KernelTable>,
}

impl ForwardKernel {
    pub fn new(drift: &DriftSpec, config: &NeumannConfig, s: f64, y: f64, t_max: f64) -> Result<Self> {
        ensure(s.is_finite() && y.is_finite(), "ForwardKernel", || "non-finite anchor".into())?;
        ensure(t_max > 0.0 && t_max.is_finite(), "ForwardKernel", || {
            format!("t_max must be positive, got {t_max}")
        })?;
        let engine = Engine::new(drift, config)?;
        let mut tables: Vec<KernelTable> = Vec::new();
        if !drift.b.is_zero() {
            for m in 1..config.max_order {
                let source = match tables.last() {
                    None => Source::ExactDeriv,
                    Some(t) => Source::Table(t),
                };
                let t = engine.build_table(
                    s,
                    y,
                    t_max,
                    1.0,
                    KernelKind::DerivTargetMinusZ,
                    source,
                    forward_exponent(m, drift.gamma),
                )?;
                tables.push(t);
            }
        }
        Ok(Self {
            engine,
            s,
            y,
            t_max,
            tables,
        })
    }

    pub fn anchor(&self) -> (f64, f64) {
        (self.s, self.y)
    }

    fn check(&self, t: f64, x: f64, op: &'static str) -> Result<SpaceTimePair> {
        let pair = SpaceTimePair::new(t, x, self.s, self.y)?;
        ensure(t - self.s <= self.t_max * (1.0 + 1e-12), op, || {
            format!("t − s = {} exceeds the tabulated range {}", t - self.s, self.t_max)
        })?;
        Ok(pair)
    }

    fn source(&self, m: usize) -> Source<'_> {
        if m == 0 {
            Source::ExactDeriv
        } else {
            Source::Table(&self.tables[m - 1])
        }
    }

    fn geo(&self, t: f64, x: f64) -> Geometry {
        Geometry {
            anchor_time: self.s,
            anchor_pos: self.y,
            target_time: t,
            target_pos: x,
        }
    }

    /// G_m(t, x).
    pub fn g(&self, m: usize, t: f64, x: f64) -> Result<f64> {
        let pair = self.check(t, x, "ForwardKernel::g")?;
        if m == 0 {
            return Ok(heat_kernel_dx(pair.tau(), x - self.y));
        }
        if self.engine.drift.b.is_zero() {
            return Ok(0.0);
        }
        ensure(m < self.engine.config.max_order, "ForwardKernel::g", || {
            format!("order {m} needs max_order > {m}")
        })?;
        Ok(self
            .engine
            .integrate(&self.geo(t, x), KernelKind::DerivTargetMinusZ, self.source(m - 1)))
    }

    /// Φ_m(t, x, s, y) = β(t, x) G_{m−1}(t, x).
    pub fn phi(&self, m: usize, t: f64, x: f64) -> Result<f64> {
        ensure(m >= 1, "ForwardKernel::phi", || "order must be >= 1".into())?;
        if x == 0.0 {
            return Err(Error::SingularPoint { op: "phi_m" });
        }
        Ok(self.engine.drift.beta(t, x) * self.g(m - 1, t, x)?)
    }

    /// Z∗Φ_m(t, x, s, y).
    pub fn term(&self, m: usize, t: f64, x: f64) -> Result<f64> {
        self.check(t, x, "ForwardKernel::term")?;
        ensure(m >= 1 && m <= self.engine.config.max_order, "ForwardKernel::term", || {
            format!("order {m} outside 1..={}", self.engine.config.max_order)
        })?;
        if self.engine.drift.b.is_zero() {
            return Ok(0.0);
        }
        Ok(self
            .engine
            .integrate(&self.geo(t, x), KernelKind::Value, self.source(m - 1)))
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<NeumannResult> {
        let pair = self.check(t, x, "ForwardKernel::eval")?;
        let leading_z = heat_kernel(pair.tau(), pair.dist());
        let (order, tail) = self.engine.truncate(&pair);
        let mut terms = Vec::with_capacity(order);
        for m in 1..=order {
            terms.push(self.term(m, t, x)?);
        }
        finish(leading_z, terms, tail, &self.engine.config)
    }
}

/// p(t, x; ·, ·) for a fixed end point, valid for t − s ≤ t_max.
pub struct BackwardKernel {
    engine: Engine,
    t: f64,
    x: f64,
    t_max: f64,
    /// V_1..V_{M−1}
    tables: Vec<KernelTable>,
}

impl BackwardKernel {
    pub fn new(drift: &DriftSpec, config: &NeumannConfig, t: f64, x: f64, t_max: f64) -> Result<Self> {
        ensure(t.is_finite() && x.is_finite(), "BackwardKernel", || "non-finite anchor".into())?;
        ensure(t_max > 0.0 && t_max.is_finite(), "BackwardKernel", || {
            format!("t_max must be positive, got {t_max}")
        })?;
        let engine = Engine::new(drift, config)?;
        let mut tables: Vec<KernelTable> = Vec::new();
        if !drift.b.is_zero() {
            for m in 1..config.max_order {
                let source = match tables.last() {
                    None => Source::ExactValue,
                    Some(t) => Source::Table(t),
                };
                let tb = engine.build_table(
                    t,
                    x,
                    t_max,
                    -1.0,
                    KernelKind::DerivZMinusTarget,
                    source,
                    backward_exponent(m, drift.gamma),
                )?;
                tables.push(tb);
            }
        }
        Ok(Self {
            engine,
            t,
            x,
            t_max,
            tables,
        })
    }

    pub fn anchor(&self) -> (f64, f64) {
        (self.t, self.x)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn drift(&self) -> &DriftSpec {
        &self.engine.drift
    }

    pub fn config(&self) -> &NeumannConfig {
        &self.engine.config
    }

    fn check(&self, s: f64, y: f64, op: &'static str) -> Result<SpaceTimePair> {
        let pair = SpaceTimePair::new(self.t, self.x, s, y)?;
        ensure(self.t - s <= self.t_max * (1.0 + 1e-12), op, || {
            format!("t − s = {} exceeds the tabulated range {}", self.t - s, self.t_max)
        })?;
        Ok(pair)
    }

    /// Z∗Φ_m(t, x, s, y).
    pub fn term(&self, m: usize, s: f64, y: f64) -> Result<f64> {
        self.check(s, y, "BackwardKernel::term")?;
        ensure(m >= 1 && m <= self.engine.config.max_order, "BackwardKernel::term", || {
            format!("order {m} outside 1..={}", self.engine.config.max_order)
        })?;
        if self.engine.drift.b.is_zero() {
            return Ok(0.0);
        }
        let source = if m == 1 {
            Source::ExactValue
        } else {
            Source::Table(&self.tables[m - 2])
        };
        let geo = Geometry {
            anchor_time: self.t,
            anchor_pos: self.x,
            target_time: s,
            target_pos: y,
        };
        Ok(self.engine.integrate(&geo, KernelKind::DerivZMinusTarget, source))
    }

    pub fn eval(&self, s: f64, y: f64) -> Result<NeumannResult> {
        let pair = self.check(s, y, "BackwardKernel::eval")?;
        let leading_z = heat_kernel(pair.tau(), pair.dist());
        let (order, tail) = self.engine.truncate(&pair);
        let mut terms = Vec::with_capacity(order);
        for m in 1..=order {
            terms.push(self.term(m, s, y)?);
        }
        finish(leading_z, terms, tail, &self.engine.config)
    }

    pub fn p(&self, s: f64, y: f64) -> Result<f64> {
        Ok(self.eval(s, y)?.value_p)
    }

    /// ∫ p(t, x, s, y) f(y) dy over the window, cusp at y = 0 handled by the
    /// space rule.
    pub fn integrate_y<F: FnMut(f64) -> f64>(&self, s: f64, mut f: F, lo: f64, hi: f64) -> Result<f64> {
        let tau = self.t - s;
        let rule = y_rule(&self.engine.config.space_rule, self.engine.drift.gamma, hi - lo, tau);
        let window = SpaceWindow::new(lo, hi, tau.sqrt());
        let mut acc = 0.0;
        for (y, w) in rule.nodes(&window) {
            let fy = f(y);
            if fy == 0.0 {
                continue;
            }
            acc += w * self.p(s, y)? * fy;
        }
        if acc.is_finite() {
            Ok(acc)
        } else {
            Err(Error::NonFinite {
                op: "integrate_y",
                location: format!("s = {s}"),
            })
        }
    }
}

/// A space rule for y-integrals of p over a window of the given length,
/// with panels no wider than about √τ.
fn y_rule(base: &SpaceRule, gamma: f64, len: f64, tau: f64) -> SpaceRule {
    let panels = ((len / tau.sqrt()).ceil() as usize).clamp(base.panels, 4000);
    SpaceRule {
        gamma,
        panels,
        ..*base
    }
}

fn finish(leading_z: f64, terms: Vec<f64>, tail: f64, config: &NeumannConfig) -> Result<NeumannResult> {
    let value_p = leading_z + terms.iter().sum::<f64>();
    if !value_p.is_finite() {
        return Err(Error::NonFinite {
            op: "fundamental_solution",
            location: format!("terms {terms:?}"),
        });
    }
    Ok(NeumannResult {
        value_p,
        leading_z,
        truncation_order: terms.len(),
        terms,
        analytic_tail_bound: tail,
        tail_warning: !(tail < config.tail_tolerance),
    })
}

/// Φ₁ = (b(t,x)/|x|^γ) ∂ₓZ.
pub fn phi1(pair: &SpaceTimePair, drift: &DriftSpec) -> Result<f64> {
    pair.validate("phi1")?;
    if pair.x == 0.0 {
        return Err(Error::SingularPoint { op: "phi1" });
    }
    Ok(drift.beta(pair.t, pair.x) * heat_kernel_dx(pair.tau(), pair.dist()))
}

/// Φ_m at one pair; builds the forward tables it needs.
pub fn phi_m(m: usize, pair: &SpaceTimePair, drift: &DriftSpec, config: &NeumannConfig) -> Result<f64> {
    pair.validate("phi_m")?;
    ensure(m >= 1, "phi_m", || "order must be >= 1".into())?;
    if pair.x == 0.0 {
        return Err(Error::SingularPoint { op: "phi_m" });
    }
    if m == 1 {
        return phi1(pair, drift);
    }
    let cfg = NeumannConfig {
        max_order: m,
        ..*config
    };
    ForwardKernel::new(drift, &cfg, pair.s, pair.y, pair.tau())?.phi(m, pair.t, pair.x)
}

pub fn fundamental_solution(pair: &SpaceTimePair, drift: &DriftSpec, config: &NeumannConfig) -> Result<NeumannResult> {
    pair.validate("fundamental_solution")?;
    ForwardKernel::new(drift, config, pair.s, pair.y, pair.tau())?.eval(pair.t, pair.x)
}

/// Declared bound |f(y)| ≤ W₀(1 + |y|)^W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialGrowth {
    pub w0: f64,
    pub w: f64,
}

impl PolynomialGrowth {
    pub fn validate(&self) -> Result<()> {
        ensure(self.w0 > 0.0 && self.w0.is_finite() && self.w >= 0.0 && self.w.is_finite(), "PolynomialGrowth", || {
            format!("need W0 > 0 and W >= 0, got ({}, {})", self.w0, self.w)
        })
        .map_err(|e| Error::Config(e.to_string()))
    }

    /// R with (1+R)^W exp(−(1−γ)R²/(4τ)) < tol.
    pub fn truncation_radius(&self, gamma: f64, tau: f64, tol: f64) -> f64 {
        let g = |r: f64| self.w * (1.0 + r).ln() - (1.0 - gamma) * r * r / (4.0 * tau) - tol.ln();
        let mut hi = (tau.sqrt()).max(1e-3);
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

fn check_growth(growth: &PolynomialGrowth, y: f64, fy: f64) -> Result<()> {
    if fy.abs() > growth.w0 * (1.0 + y.abs()).powf(growth.w) * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "|f({y})| = {} exceeds the declared growth W0(1+|y|)^W",
            fy.abs()
        )));
    }
    Ok(())
}

/// u(t,x) = ∫ p(t,x,s,y) f(y) dy from a backward kernel anchored at (t, x).
pub fn solve_cauchy_with<F: Fn(f64) -> f64>(
    kernel: &BackwardKernel,
    s: f64,
    f: F,
    growth: &PolynomialGrowth,
) -> Result<f64> {
    growth.validate()?;
    let (t, x) = kernel.anchor();
    ensure(t > s, "solve_cauchy", || format!("need t > s, got t={t} s={s}"))?;
    let tau = t - s;
    let r = growth.truncation_radius(kernel.drift().gamma, tau, kernel.config().tail_tolerance);
    let mut violation = Ok(());
    let value = kernel.integrate_y(
        s,
        |y| {
            let v = f(y);
            if violation.is_ok() {
                violation = check_growth(growth, y, v);
            }
            v
        },
        x - r,
        x + r,
    );
    violation?;
    value
}

pub fn solve_cauchy<F: Fn(f64) -> f64>(
    t: f64,
    x: f64,
    s: f64,
    f: F,
    growth: &PolynomialGrowth,
    drift: &DriftSpec,
    config: &NeumannConfig,
) -> Result<f64> {
    ensure(t > s, "solve_cauchy", || format!("need t > s, got t={t} s={s}"))?;
    let kernel = BackwardKernel::new(drift, config, t, x, t - s)?;
    solve_cauchy_with(&kernel, s, f, growth)
}

/// u(t,x) = ∫_s^t dθ ∫ p(t,x,θ,y) g(θ,y) dy for a bounded source g.
pub fn solve_nonhomogeneous_with<G: Fn(f64, f64) -> f64>(
    kernel: &BackwardKernel,
    s: f64,
    g: G,
    growth: &PolynomialGrowth,
) -> Result<f64> {
    growth.validate()?;
    let (t, x) = kernel.anchor();
    ensure(t > s, "solve_nonhomogeneous", || format!("need t > s, got t={t} s={s}"))?;
    let time_rule = kernel.config().time_rule;
    let mut acc = 0.0;
    for node in time_rule.nodes(s, t) {
        let theta = node.r;
        let tau = node.to_t;
        let r = growth.truncation_radius(kernel.drift().gamma, tau, kernel.config().tail_tolerance);
        let mut violation = Ok(());
        let inner = kernel.integrate_y(
            theta,
            |y| {
                let v = g(theta, y);
                if violation.is_ok() {
                    violation = check_growth(growth, y, v);
                }
                v
            },
            x - r,
            x + r,
        )?;
        violation?;
        acc += node.w * inner;
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_nonhomogeneous<G: Fn(f64, f64) -> f64>(
    t: f64,
    x: f64,
    s: f64,
    g: G,
    growth: &PolynomialGrowth,
    drift: &DriftSpec,
    config: &NeumannConfig,
) -> Result<f64> {
    ensure(t > s, "solve_nonhomogeneous", || format!("need t > s, got t={t} s={s}"))?;
    let kernel = BackwardKernel::new(drift, config, t, x, t - s)?;
    solve_nonhomogeneous_with(&kernel, s, g, growth)
}

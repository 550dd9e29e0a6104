//! The space-time integral linking a target point to an anchored kernel:
//!
//! ∫₀^T d(age) ∫ dz  k(T − age, ·) β(r, z) F(age, z),
//!
//! where age runs from the anchor, the kernel k is the heat kernel or its
//! derivative at the target, and F is an exact Gaussian or a table.

use super::table::{KernelTable, Slice};
use super::DriftSpec;
use crate::gaussian_core::{heat_kernel, heat_kernel_dx};
use crate::singular_quadrature::{PreparedSpaceRule, SpaceRule, SpaceWindow, TimeNode, TimeRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum KernelKind {
    /// Z_{age}(target − z)
    Value,
    /// ∂_d Z_{age}(d) at d = target − z
    DerivTargetMinusZ,
    /// ∂_d Z_{age}(d) at d = z − target
    DerivZMinusTarget,
}

impl KernelKind {
    #[inline]
    fn eval(self, age: f64, target: f64, z: f64) -> f64 {
        match self {
            KernelKind::Value => heat_kernel(age, target - z),
            KernelKind::DerivTargetMinusZ => heat_kernel_dx(age, target - z),
            KernelKind::DerivZMinusTarget => heat_kernel_dx(age, z - target),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Source<'a> {
    /// Z_{age}(z − anchor)
    ExactValue,
    /// ∂_z Z_{age}(z − anchor)
    ExactDeriv,
    Table(&'a KernelTable),
}

enum SourceSlice<'a> {
    ExactValue(f64),
    ExactDeriv(f64),
    Table(&'a KernelTable, Slice),
}

impl<'a> Source<'a> {
    fn slice(&self, age: f64) -> SourceSlice<'a> {
        match *self {
            Source::ExactValue => SourceSlice::ExactValue(age),
            Source::ExactDeriv => SourceSlice::ExactDeriv(age),
            Source::Table(t) => SourceSlice::Table(t, t.slice(age)),
        }
    }
}

impl SourceSlice<'_> {
    #[inline]
    fn eval(&self, anchor: f64, z: f64) -> f64 {
        match self {
            SourceSlice::ExactValue(age) => heat_kernel(*age, z - anchor),
            SourceSlice::ExactDeriv(age) => heat_kernel_dx(*age, z - anchor),
            SourceSlice::Table(t, sl) => t.eval(sl, z),
        }
    }
}

/// Anchor and target; the integration runs from the anchor time towards the
/// target time, forwards or backwards.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    pub anchor_time: f64,
    pub anchor_pos: f64,
    pub target_time: f64,
    pub target_pos: f64,
}

/// Quadrature rules prepared once per engine.
#[derive(Debug, Clone)]
pub(crate) struct BridgeRules {
    space: PreparedSpaceRule,
    radius: f64,
    /// nodes on the unit age interval
    unit_time: Vec<TimeNode>,
}

impl BridgeRules {
    pub(crate) fn new(space: &SpaceRule, time: &TimeRule) -> Self {
        Self {
            space: space.prepare(),
            radius: space.truncation_radius_multiplier,
            unit_time: time.nodes(0.0, 1.0),
        }
    }

    pub(crate) fn max_space_nodes(&self) -> usize {
        let r = &self.space.rule;
        (r.panels + 2 * (r.panels / 4).max(1) + 2) * r.nodes_per_panel
    }
}

/// Σ over time nodes of Σ over space nodes; `buf` is scratch.
pub(crate) fn bridge(
    rules: &BridgeRules,
    drift: &DriftSpec,
    geo: &Geometry,
    kernel: KernelKind,
    source: Source<'_>,
    buf: &mut Vec<(f64, f64)>,
) -> f64 {
    let total = (geo.target_time - geo.anchor_time).abs();
    let dir = (geo.target_time - geo.anchor_time).signum();
    let mut acc = 0.0;
    for node in &rules.unit_time {
        let age_a = total * node.from_s;
        let age_k = total * node.to_t;
        let r = geo.anchor_time + dir * age_a;
        let center = (geo.target_pos * age_a + geo.anchor_pos * age_k) / total;
        let sigma = (age_a * age_k / total).sqrt();
        let window = SpaceWindow::gaussian(center, sigma, rules.radius);
        buf.clear();
        rules.space.nodes_into(&window, buf);
        let src = source.slice(age_a);
        let mut inner = 0.0;
        for &(z, w) in buf.iter() {
            let f = src.eval(geo.anchor_pos, z);
            if f == 0.0 {
                continue;
            }
            inner += w * kernel.eval(age_k, geo.target_pos, z) * drift.beta(r, z) * f;
        }
        acc += total * node.w * inner;
    }
    acc
}

//! Interpolated tables of the iterated kernels on a (θ, q) grid.
//!
//! age = T·θ⁴, and q = (z − A)/√age + (w(z) − w(A))/age^{(1−γ)/2} with
//! w(z) = sign(z)|z|^{1−γ}. The second term straightens the |z|^{1−γ} cusp
//! the kernels carry at z = 0, so Lagrange interpolation in q stays accurate
//! across the origin.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

pub(crate) const THETA_POWER: i32 = 4;
const Q_STENCIL: usize = 6;
const THETA_STENCIL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    /// slices θ_j = j/n, j = 1..=n
    pub theta_nodes: usize,
    /// half-width L of the tabulated band |z − A| ≤ L√age
    pub xi_halfwidth: f64,
    /// spacing of the q grid
    pub q_step: f64,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self {
            theta_nodes: 20,
            xi_halfwidth: 11.0,
            q_step: 0.2,
        }
    }
}

impl TableSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.theta_nodes >= 8, "TableSpec", || {
            format!("theta_nodes must be >= 8, got {}", self.theta_nodes)
        })?;
        ensure(self.xi_halfwidth >= 8.0 && self.xi_halfwidth.is_finite(), "TableSpec", || {
            format!("xi_halfwidth must be >= 8, got {}", self.xi_halfwidth)
        })?;
        ensure(self.q_step > 0.0 && self.q_step <= 0.5, "TableSpec", || {
            format!("q_step must lie in (0, 0.5], got {}", self.q_step)
        })
    }

    pub fn refined(&self) -> Self {
        Self {
            theta_nodes: self.theta_nodes * 2,
            q_step: self.q_step / 2.0,
            ..*self
        }
    }
}

#[inline]
pub(crate) fn wmap(z: f64, one_m_gamma: f64) -> f64 {
    if z >= 0.0 {
        z.powf(one_m_gamma)
    } else {
        -(-z).powf(one_m_gamma)
    }
}

/// The cusp-straightening coordinate for one age.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QMap {
    anchor: f64,
    w_anchor: f64,
    one_m_gamma: f64,
    inv_sqrt_age: f64,
    inv_age_pow: f64,
}

impl QMap {
    pub(crate) fn new(anchor: f64, gamma: f64, age: f64) -> Self {
        let one_m_gamma = 1.0 - gamma;
        Self {
            anchor,
            w_anchor: wmap(anchor, one_m_gamma),
            one_m_gamma,
            inv_sqrt_age: 1.0 / age.sqrt(),
            inv_age_pow: age.powf(-0.5 * one_m_gamma),
        }
    }

    #[inline]
    pub(crate) fn q(&self, z: f64) -> f64 {
        (z - self.anchor) * self.inv_sqrt_age + (wmap(z, self.one_m_gamma) - self.w_anchor) * self.inv_age_pow
    }

    /// Inverse of `q`; |z − A| ≤ |q|√age bounds the root.
    pub(crate) fn z(&self, q: f64) -> f64 {
        let span = q.abs() / self.inv_sqrt_age + f64::MIN_POSITIVE;
        let (mut lo, mut hi) = (self.anchor - span, self.anchor + span);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.q(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Lagrange weights for equispaced nodes 0..n at position u.
#[inline]
fn lagrange_weights<const N: usize>(u: f64) -> [f64; N] {
    let mut w = [0.0; N];
    for (k, wk) in w.iter_mut().enumerate() {
        let mut num = 1.0;
        let mut den = 1.0;
        for i in 0..N {
            if i != k {
                num *= u - i as f64;
                den *= k as f64 - i as f64;
            }
        }
        *wk = num / den;
    }
    w
}

/// Stored values S(θ_j, q_k) = age_j^a · F(age_j, z_jk) of a kernel F.
#[derive(Debug, Clone)]
pub(crate) struct KernelTable {
    pub anchor: f64,
    pub gamma: f64,
    pub t_max: f64,
    pub scale_exponent: f64,
    pub n_theta: usize,
    pub q_lo: f64,
    pub q_step: f64,
    pub n_q: usize,
    pub data: Vec<f64>,
}

/// Grid geometry of a table before its values are known.
#[derive(Debug, Clone)]
pub(crate) struct TableGrid {
    pub n_theta: usize,
    pub q_lo: f64,
    pub q_step: f64,
    pub n_q: usize,
}

impl TableGrid {
    pub(crate) fn new(spec: &TableSpec, gamma: f64) -> Self {
        let l = spec.xi_halfwidth;
        // |w(z) − w(A)| ≤ 2^γ|z − A|^{1−γ}
        let q_max = l + 2f64.powf(gamma) * l.powf(1.0 - gamma);
        let n_half = (q_max / spec.q_step).ceil() as usize;
        Self {
            n_theta: spec.theta_nodes,
            q_lo: -(n_half as f64) * spec.q_step,
            q_step: spec.q_step,
            n_q: 2 * n_half + 1,
        }
    }

    pub(crate) fn age(&self, t_max: f64, j: usize) -> f64 {
        let theta = (j + 1) as f64 / self.n_theta as f64;
        t_max * theta.powi(THETA_POWER)
    }

    pub(crate) fn q(&self, k: usize) -> f64 {
        self.q_lo + k as f64 * self.q_step
    }
}

/// Precomputed interpolation data for one age.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slice {
    qmap: QMap,
    j0: usize,
    w_theta: [f64; THETA_STENCIL],
    inv_scale: f64,
}

impl KernelTable {
    pub(crate) fn from_grid(
        grid: TableGrid,
        anchor: f64,
        gamma: f64,
        t_max: f64,
        scale_exponent: f64,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), grid.n_theta * grid.n_q);
        Self {
            anchor,
            gamma,
            t_max,
            scale_exponent,
            n_theta: grid.n_theta,
            q_lo: grid.q_lo,
            q_step: grid.q_step,
            n_q: grid.n_q,
            data,
        }
    }

    pub(crate) fn slice(&self, age: f64) -> Slice {
        let theta = (age / self.t_max).powf(1.0 / THETA_POWER as f64);
        // slice j holds θ = (j+1)/n
        let pos = theta * self.n_theta as f64 - 1.0;
        let j0 = ((pos.floor() as i64) - 1).clamp(0, (self.n_theta - THETA_STENCIL) as i64) as usize;
        Slice {
            qmap: QMap::new(self.anchor, self.gamma, age),
            j0,
            w_theta: lagrange_weights::<THETA_STENCIL>(pos - j0 as f64),
            inv_scale: age.powf(-self.scale_exponent),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, slice: &Slice, z: f64) -> f64 {
        let q = slice.qmap.q(z);
        let pos = (q - self.q_lo) / self.q_step;
        if pos < 0.0 || pos > (self.n_q - 1) as f64 {
            return 0.0;
        }
        let k0 = ((pos.floor() as i64) - 2).clamp(0, (self.n_q - Q_STENCIL) as i64) as usize;
        let wq = lagrange_weights::<Q_STENCIL>(pos - k0 as f64);
        let mut acc = 0.0;
        for (i, wt) in slice.w_theta.iter().enumerate() {
            let row = &self.data[(slice.j0 + i) * self.n_q + k0..][..Q_STENCIL];
            let mut v = 0.0;
            for (a, b) in row.iter().zip(&wq) {
                v += a * b;
            }
            acc += wt * v;
        }
        acc * slice.inv_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qmap_inverts() {
        for &anchor in &[-1.0, 0.0, 0.3] {
            for &age in &[1e-6, 0.01, 0.5] {
                let m = QMap::new(anchor, 0.5, age);
                for i in -20..=20 {
                    let q = 0.7 * i as f64;
                    let z = m.z(q);
                    assert!((m.q(z) - q).abs() < 1e-9 * (1.0 + q.abs()), "A={anchor} age={age} q={q}");
                }
            }
        }
    }

    #[test]
    fn lagrange_reproduces_quintics() {
        let w = lagrange_weights::<6>(2.37);
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.01 * x.powi(5);
        let v: f64 = (0..6).map(|i| w[i] * p(i as f64)).sum();
        assert!((v - p(2.37)).abs() < 1e-12);
    }

    fn interpolation_error(spec: &TableSpec) -> f64 {
        // F(age, z) = age^{-1/2} (1 + w(z)) exp(−(z−A)²/(2 age)), γ = 1/2
        let (gamma, anchor, t_max) = (0.5, 0.3, 0.5);
        let grid = TableGrid::new(spec, gamma);
        let f = |age: f64, z: f64| (1.0 + wmap(z, 0.5)) * (-(z - anchor).powi(2) / (2.0 * age)).exp() / age.sqrt();
        let mut data = Vec::new();
        for j in 0..grid.n_theta {
            let age = grid.age(t_max, j);
            let m = QMap::new(anchor, gamma, age);
            for k in 0..grid.n_q {
                data.push(age.sqrt() * f(age, m.z(grid.q(k))));
            }
        }
        let table = KernelTable::from_grid(grid, anchor, gamma, t_max, 0.5, data);
        let mut worst: f64 = 0.0;
        for &age in &[0.001, 0.0371, 0.2, 0.43] {
            let sl = table.slice(age);
            for i in 0..200 {
                let z = anchor - 4.0 * age.sqrt() + 8.0 * age.sqrt() * i as f64 / 199.0;
                let e = (table.eval(&sl, z) - f(age, z)).abs() * age.sqrt();
                worst = worst.max(e);
            }
        }
        worst
    }

    #[test]
    fn table_interpolates_smooth_cusped_profile() {
        // the cusp leaves a second-derivative jump in q, so convergence is about h²
        let coarse = interpolation_error(&TableSpec::default());
        let fine = interpolation_error(&TableSpec::default().refined());
        assert!(coarse < 1e-2, "coarse = {coarse}");
        assert!(fine < coarse / 3.0, "fine = {fine}, coarse = {coarse}");
    }
}

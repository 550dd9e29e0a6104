//! Crank–Nicolson reference solver for the ε-regularized equation
//! u_t = ½u_xx + b(t,x)(|x|+ε)^{−γ}u_x, started from a narrow Gaussian at y,
//! with Richardson extrapolation in the grid and in ε.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::gaussian_core::SpaceTimePair;
use crate::parametrix_engine::DriftSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FDConfig {
    /// ε₀; the extrapolation uses ε₀, ε₀/2, ε₀/4
    pub epsilon: f64,
    pub dx: f64,
    pub dt: f64,
    pub domain_halfwidth: f64,
    /// implicit weight, 0.5 for Crank–Nicolson
    pub theta: f64,
}

impl Default for FDConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            dx: 2e-3,
            dt: 2e-3,
            domain_halfwidth: 8.0,
            theta: 0.5,
        }
    }
}

impl FDConfig {
    pub fn validate(&self, t_max: f64) -> Result<()> {
        let op = "FDConfig";
        ensure(self.epsilon > 0.0 && self.dx > 0.0 && self.dt > 0.0, op, || {
            "epsilon, dx and dt must be positive".into()
        })?;
        ensure(self.dt <= self.dx, op, || format!("need dt <= dx, got dt={} dx={}", self.dt, self.dx))?;
        ensure(self.domain_halfwidth >= 8.0 * t_max.sqrt(), op, || {
            format!(
                "domain half-width {} below 8·√t = {}",
                self.domain_halfwidth,
                8.0 * t_max.sqrt()
            )
        })?;
        ensure((0.5..=1.0).contains(&self.theta), op, || {
            format!("theta must lie in [0.5, 1], got {}", self.theta)
        })
    }
}

/// Solution of one regularized run on the grid x_i = −L + i·dx.
#[derive(Debug, Clone)]
pub struct FdGrid {
    pub lo: f64,
    pub dx: f64,
    pub u: Vec<f64>,
    /// max |(one step applied to 1) − 1| over the run
    pub constant_defect: f64,
    pub min_value: f64,
}

impl FdGrid {
    /// Cubic interpolation at x.
    pub fn at(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.dx;
        let n = self.u.len();
        let i0 = (pos.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
        let u = pos - i0 as f64;
        let mut acc = 0.0;
        for k in 0..4 {
            let mut l = 1.0;
            for i in 0..4 {
                if i != k {
                    l *= (u - i as f64) / (k as f64 - i as f64);
                }
            }
            acc += l * self.u[i0 + k];
        }
        acc
    }
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) {
    // a: sub, b: diag, c: super; solution written into d
    let n = b.len();
    scratch[0] = c[0] / b[0];
    d[0] /= b[0];
    for i in 1..n {
        let m = b[i] - a[i] * scratch[i - 1];
        scratch[i] = c[i] / m;
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= scratch[i] * d[i + 1];
    }
}

/// One regularized run from s to t with the given ε, dx and dt. The first
/// step is replaced by four implicit-Euler quarter steps to damp the
/// initial spike.
#[allow(clippy::too_many_arguments)]
pub fn fd_solve(
    drift: &DriftSpec,
    s: f64,
    y: f64,
    t: f64,
    epsilon: f64,
    dx: f64,
    dt: f64,
    halfwidth: f64,
    theta: f64,
) -> Result<FdGrid> {
    ensure(t > s, "fd_solve", || format!("need t > s, got t={t} s={s}"))?;
    let n = (2.0 * halfwidth / dx).round() as usize + 1;
    let lo = -halfwidth;
    let dx = 2.0 * halfwidth / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + i as f64 * dx).collect();
    let var = dx * dx;
    let mut u: Vec<f64> = xs
        .iter()
        .map(|x| (-(x - y).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
        .collect();
    let steps = ((t - s) / dt).ceil().max(1.0) as usize;
    let h = (t - s) / steps as f64;
    let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut rhs, mut scratch, mut ones) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut defect: f64 = 0.0;
    let inv_dx2 = 1.0 / (dx * dx);

    // coefficients of A u = ½u_xx + β u_x at time τ, reflecting ends
    let coeffs = |tau: f64, lower: &mut [f64], diag: &mut [f64], upper: &mut [f64]| {
        for i in 0..n {
            let beta = drift.b.eval(tau, xs[i]) / (xs[i].abs() + epsilon).powf(drift.gamma);
            lower[i] = 0.5 * inv_dx2 - beta / (2.0 * dx);
            diag[i] = -inv_dx2;
            upper[i] = 0.5 * inv_dx2 + beta / (2.0 * dx);
        }
    };
    let (mut lw, mut dg, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut step = |u: &mut Vec<f64>, tau_mid: f64, th: f64, k: f64, defect: &mut f64| {
        coeffs(tau_mid, &mut lw, &mut dg, &mut up);
        let apply = |v: &[f64], out: &mut [f64]| {
            out[0] = dg[0] * v[0] + (lw[0] + up[0]) * v[1];
            out[n - 1] = dg[n - 1] * v[n - 1] + (lw[n - 1] + up[n - 1]) * v[n - 2];
            for i in 1..n - 1 {
                out[i] = lw[i] * v[i - 1] + dg[i] * v[i] + up[i] * v[i + 1];
            }
        };
        for i in 0..n {
            a[i] = -th * k * lw[i];
            b[i] = 1.0 - th * k * dg[i];
            c[i] = -th * k * up[i];
        }
        // ghost node u_{−1} = u_1 folds into the boundary rows
        c[0] += -th * k * lw[0];
        a[n - 1] += -th * k * up[n - 1];
        a[0] = 0.0;
        c[n - 1] = 0.0;
        apply(u, &mut rhs);
        for i in 0..n {
            rhs[i] = u[i] + (1.0 - th) * k * rhs[i];
        }
        thomas(&a, &b, &c, &mut rhs, &mut scratch);
        std::mem::swap(u, &mut rhs);
        // the constant function must be preserved
        ones.iter_mut().for_each(|v| *v = 0.0);
        apply(&vec![1.0; n], &mut ones);
        for v in ones.iter_mut() {
            *v = 1.0 + (1.0 - th) * k * *v;
        }
        thomas(&a, &b, &c, &mut ones, &mut scratch);
        for v in &ones {
            *defect = defect.max((v - 1.0).abs());
        }
    };
    let mut time = s;
    for _ in 0..4 {
        step(&mut u, time + h / 8.0, 1.0, h / 4.0, &mut defect);
        time += h / 4.0;
    }
    for _ in 1..steps {
        step(&mut u, time + h / 2.0, theta, h, &mut defect);
        time += h;
    }
    let min_value = u.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(FdGrid {
        lo,
        dx,
        u,
        constant_defect: defect,
        min_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdReference {
    pub value: f64,
    /// grid-extrapolated values for ε₀, ε₀/2, ε₀/4
    pub per_epsilon: Vec<f64>,
    /// raw values at (dx, dx/2, dx/4) for ε₀
    pub grid_levels: Vec<f64>,
    /// |v(dx/4) − v(dx/2)| / |v(dx/2) − v(dx)|
    pub self_convergence_ratio: f64,
    pub constant_defect: f64,
}

/// Richardson over the grid (second order) for ε₀, ε₀/2, ε₀/4, then over ε
/// with exponents 1−γ and 2(1−γ).
pub fn fd_reference_many(drift: &DriftSpec, s: f64, y: f64, t: f64, xs: &[f64], cfg: &FDConfig) -> Result<Vec<FdReference>> {
    cfg.validate(t - s)?;
    drift.validate()?;
    let margin = 4.0 * (t - s).sqrt();
    for &x in xs.iter().chain(std::iter::once(&y)) {
        ensure(x.abs() + margin <= cfg.domain_halfwidth, "fd_reference_density", || {
            format!("point {x} lacks a 4σ margin inside the domain")
        })?;
    }
    let run = |eps: f64, dx: f64, dt: f64| -> Result<FdGrid> {
        let g = fd_solve(drift, s, y, t, eps, dx, dt, cfg.domain_halfwidth, cfg.theta)?;
        if g.min_value < -1e-8 {
            return Err(Error::Oracle(format!("negative density {} (eps={eps}, dx={dx})", g.min_value)));
        }
        if g.constant_defect > 1e-2 {
            return Err(Error::Oracle(format!("constant not preserved: defect {}", g.constant_defect)));
        }
        Ok(g)
    };
    let mut per_eps = vec![Vec::new(); xs.len()];
    let mut levels = vec![Vec::new(); xs.len()];
    let mut defect: f64 = 0.0;
    for (e, eps) in [cfg.epsilon, cfg.epsilon / 2.0, cfg.epsilon / 4.0].into_iter().enumerate() {
        let coarse = run(eps, cfg.dx, cfg.dt)?;
        let fine = run(eps, cfg.dx / 2.0, cfg.dt / 2.0)?;
        defect = defect.max(coarse.constant_defect).max(fine.constant_defect);
        let finest = if e == 0 {
            Some(run(eps, cfg.dx / 4.0, cfg.dt / 4.0)?)
        } else {
            None
        };
        for (i, &x) in xs.iter().enumerate() {
            let (vc, vf) = (coarse.at(x), fine.at(x));
            per_eps[i].push((4.0 * vf - vc) / 3.0);
            if let Some(g) = &finest {
                levels[i] = vec![vc, vf, g.at(x)];
            }
        }
    }
    let p1 = 0.5f64.powf(1.0 - drift.gamma);
    let p2 = 0.5f64.powf(2.0 * (1.0 - drift.gamma));
    let out = xs
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let v = &per_eps[i];
            let r1 = (v[1] - p1 * v[0]) / (1.0 - p1);
            let r2 = (v[2] - p1 * v[1]) / (1.0 - p1);
            let value = (r2 - p2 * r1) / (1.0 - p2);
            let l = &levels[i];
            FdReference {
                value,
                per_epsilon: v.clone(),
                grid_levels: l.clone(),
                self_convergence_ratio: ((l[2] - l[1]) / (l[1] - l[0])).abs(),
                constant_defect: defect,
            }
        })
        .collect();
    Ok(out)
}

pub fn fd_reference_density(pair: &SpaceTimePair, drift: &DriftSpec, cfg: &FDConfig) -> Result<FdReference> {
    pair.validate("fd_reference_density")?;
    Ok(fd_reference_many(drift, pair.s, pair.y, pair.t, &[pair.x], cfg)?.remove(0))
}

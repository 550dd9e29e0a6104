//! Euler–Maruyama reference for the transition density with a Gaussian
//! kernel density estimate. Paths start at x and run for t−s units with the
//! drift evaluated at t−σ, so the estimate at y is p(t,x;s,y).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::parametrix_engine::DriftSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MCConfig {
    pub paths: u64,
    /// relative to t−s
    pub step_fraction: f64,
    pub seed: u64,
    /// None selects 0.8 × Silverman
    pub bandwidth: Option<f64>,
    pub epsilon: f64,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            step_fraction: 1e-3,
            seed: 20_240_917,
            bandwidth: None,
            epsilon: 1e-4,
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        let op = "MCConfig";
        ensure(self.paths >= 100_000, op, || format!("need at least 1e5 paths, got {}", self.paths))?;
        ensure(self.step_fraction > 0.0 && self.step_fraction <= 1e-3, op, || {
            format!("step must be at most 1e-3·(t−s), got {}", self.step_fraction)
        })?;
        ensure(self.epsilon > 0.0, op, || "epsilon must be positive".into())?;
        if let Some(h) = self.bandwidth {
            ensure(h > 0.0, op, || format!("bandwidth must be positive, got {h}"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub y: f64,
    pub value: f64,
    /// 2 standard errors
    pub halfwidth: f64,
    /// estimates with the bandwidth scaled by 0.5 and 1.5
    pub bandwidth_sensitivity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub bandwidth: f64,
    pub explosions: u64,
    pub paths: u64,
    pub estimates: Vec<McEstimate>,
}

const EXPLOSION_LEVEL: f64 = 1e3;

fn inv_pow(a: f64, gamma: f64) -> f64 {
    if gamma == 0.5 {
        1.0 / a.sqrt()
    } else {
        a.powf(-gamma)
    }
}

/// Endpoints of all paths; `None` marks a path that left |X| ≤ 1e3.
pub fn simulate(drift: &DriftSpec, t: f64, x: f64, s: f64, cfg: &MCConfig) -> Result<Vec<Option<f64>>> {
    cfg.validate()?;
    drift.validate()?;
    ensure(t > s, "mc_simulate", || format!("need t > s, got t={t} s={s}"))?;
    let steps = (1.0 / cfg.step_fraction).ceil() as usize;
    let h = (t - s) / steps as f64;
    let sq = h.sqrt();
    let gamma = drift.gamma;
    Ok((0..cfg.paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path);
            let mut xv = x;
            for k in 0..steps {
                let time = t - k as f64 * h;
                let beta = drift.b.eval(time, xv) * inv_pow(xv.abs() + cfg.epsilon, gamma);
                let z: f64 = StandardNormal.sample(&mut rng);
                xv += beta * h + sq * z;
                if xv.abs() > EXPLOSION_LEVEL || !xv.is_finite() {
                    return None;
                }
            }
            Some(xv)
        })
        .collect())
}

fn silverman(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    0.8 * 1.06 * var.sqrt() * n.powf(-0.2)
}

fn kde(v: &[f64], y: f64, h: f64, total: f64) -> (f64, f64) {
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let (mut s1, mut s2) = (0.0, 0.0);
    for &e in v {
        let k = norm * (-0.5 * ((y - e) / h).powi(2)).exp();
        s1 += k;
        s2 += k * k;
    }
    let mean = s1 / total;
    let var = (s2 / total - mean * mean).max(0.0);
    (mean, 2.0 * (var / total).sqrt())
}

/// Density estimates of p(t,x;s,y) at each y from one ensemble.
pub fn mc_density_many(drift: &DriftSpec, t: f64, x: f64, s: f64, ys: &[f64], cfg: &MCConfig) -> Result<McReport> {
    let ends = simulate(drift, t, x, s, cfg)?;
    let alive: Vec<f64> = ends.iter().flatten().copied().collect();
    let explosions = cfg.paths - alive.len() as u64;
    if explosions as f64 > 1e-3 * cfg.paths as f64 {
        return Err(Error::Oracle(format!("{explosions} of {} paths exploded", cfg.paths)));
    }
    let h = cfg.bandwidth.unwrap_or_else(|| silverman(&alive));
    let total = cfg.paths as f64;
    let estimates = ys
        .iter()
        .map(|&y| {
            let (value, halfwidth) = kde(&alive, y, h, total);
            McEstimate {
                y,
                value,
                halfwidth,
                bandwidth_sensitivity: [kde(&alive, y, 0.5 * h, total).0, kde(&alive, y, 1.5 * h, total).0],
            }
        })
        .collect();
    Ok(McReport {
        bandwidth: h,
        explosions,
        paths: cfg.paths,
        estimates,
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_core::SpaceTimePair;

/// `count` equally spaced values from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn fixed(v: f64) -> Self {
        Self {
            min: v,
            max: v,
            count: 1,
        }
    }

    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::Config(format!("grid axis {name}: need finite min <= max")));
        }
        if self.count == 0 || (self.max > self.min && self.count < 2) {
            return Err(Error::Config(format!(
                "grid axis {name}: a swept axis needs count >= 2, got {}",
                self.count
            )));
        }
        if self.max == self.min && self.count != 1 {
            return Err(Error::Config(format!("grid axis {name}: a fixed axis needs count = 1")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * h).collect()
    }
}

/// Tensor grid over (t, x, s, y); points with t ≤ s or |x| < `exclusion`
/// are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t: Axis,
    pub x: Axis,
    pub s: Axis,
    pub y: Axis,
    pub exclusion: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.t.validate("t")?;
        self.x.validate("x")?;
        self.s.validate("s")?;
        self.y.validate("y")?;
        if !(self.exclusion > 0.0) {
            return Err(Error::Config(format!(
                "grid exclusion half-band must be positive, got {}",
                self.exclusion
            )));
        }
        if self.points().is_empty() {
            return Err(Error::Config("grid has no admissible point".into()));
        }
        Ok(())
    }

    /// Points in (t, x, s, y) lexicographic order.
    pub fn points(&self) -> Vec<SpaceTimePair> {
        let mut out = Vec::new();
        for &t in &self.t.values() {
            for &x in &self.x.values() {
                if x.abs() < self.exclusion {
                    continue;
                }
                for &s in &self.s.values() {
                    if t <= s {
                        continue;
                    }
                    for &y in &self.y.values() {
                        out.push(SpaceTimePair { t, x, s, y });
                    }
                }
            }
        }
        out
    }

    /// Starting points (s, y) in first-appearance order, each with the
    /// largest t − s it is paired with.
    pub fn anchors(&self) -> Vec<((f64, f64), f64)> {
        let mut out: Vec<((f64, f64), f64)> = Vec::new();
        for p in self.points() {
            match out.iter_mut().find(|(a, _)| *a == (p.s, p.y)) {
                Some(e) => e.1 = e.1.max(p.tau()),
                None => out.push(((p.s, p.y), p.tau())),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excludes_origin_band_and_backward_times() {
        let g = GridSpec {
            t: Axis::new(0.5, 1.0, 2),
            x: Axis::new(-1.0, 1.0, 5),
            s: Axis::new(0.0, 0.5, 2),
            y: Axis::fixed(0.3),
            exclusion: 0.25,
        };
        g.validate().unwrap();
        // t=0.5: s=0 only; t=1: both s; x = 0 dropped
        assert_eq!(g.points().len(), 3 * 4);
        assert!(g.points().iter().all(|p| p.x != 0.0 && p.t > p.s));
        assert_eq!(g.anchors(), vec![((0.0, 0.3), 1.0), ((0.5, 0.3), 0.5)]);
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Axis::new(0.0, 1.0, 1).validate("x").is_err());
        assert!(Axis::new(1.0, 0.0, 3).validate("x").is_err());
        let mut g = GridSpec {
            t: Axis::fixed(1.0),
            x: Axis::fixed(0.5),
            s: Axis::fixed(0.0),
            y: Axis::fixed(0.0),
            exclusion: 0.0,
        };
        assert!(g.validate().is_err());
        g.exclusion = 0.1;
        assert!(g.validate().is_ok());
    }
}

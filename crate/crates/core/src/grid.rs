//! Uniform parameter grids with an optional offset that shifts nodes off
//! designated singular parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid on `[start, end]` with `points ≥ 2` nodes at
/// `start + offset + i·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    #[serde(default)]
    pub offset: f64,
}

impl ParamGrid {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        Self::with_offset(start, end, points, 0.0)
    }

    pub fn with_offset(start: f64, end: f64, points: usize, offset: f64) -> Result<Self> {
        let g = ParamGrid {
            start,
            end,
            points,
            offset,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid with the default generic-position offset `1e-3·step`.
    pub fn with_default_offset(start: f64, end: f64, points: usize) -> Result<Self> {
        let step = (end - start) / (points.max(2) as f64 - 1.0);
        Self::with_offset(start, end, points, 1e-3 * step)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.step() > 0.0) || !self.step().is_finite() {
            return Err(Error::InvalidGrid(format!(
                "step must be positive and finite (start {}, end {})",
                self.start, self.end
            )));
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidGrid("offset must be finite".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.points as f64 - 1.0)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + self.offset + i as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Doubles the grid density, keeping endpoints and the absolute offset.
    pub fn refined(&self) -> ParamGrid {
        ParamGrid {
            start: self.start,
            end: self.end,
            points: 2 * (self.points - 1) + 1,
            offset: self.offset,
        }
    }

    /// Index of the node closest to `x`, with its distance.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let raw = ((x - self.start - self.offset) / self.step()).round();
        let i = raw.clamp(0.0, (self.points - 1) as f64) as usize;
        (i, (x - self.node(i)).abs())
    }
}

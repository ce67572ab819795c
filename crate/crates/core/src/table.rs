//! Radial tables with linear interpolation.

use crate::error::{Error, Result};
use std::path::Path;

/// A function of the radius sampled on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialTable {
    r: Vec<f64>,
    y: Vec<f64>,
}

impl RadialTable {
    pub fn new(r: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if r.len() != y.len() || r.len() < 2 {
            return Err(Error::Invalid("a radial table needs at least two (r, value) rows".into()));
        }
        if r.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("radial table entries must be finite".into()));
        }
        if r[0] < 0.0 {
            return Err(Error::Invalid("radial table radii must be non-negative".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("radial table radii must be strictly increasing".into()));
        }
        Ok(Self { r, y })
    }

    /// Reads a two-column whitespace-separated file; `#` starts a comment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut y = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected two columns", n + 1)));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)));
            r.push(parse(cols[0])?);
            y.push(parse(cols[1])?);
        }
        Self::new(r, y)
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn first_radius(&self) -> f64 {
        self.r[0]
    }

    pub fn last_radius(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Linear interpolation inside the grid, the first value below it and
    /// `None` beyond the last radius.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.r.len();
        if x > self.r[n - 1] {
            return None;
        }
        if x <= self.r[0] {
            return Some(self.y[0]);
        }
        let i = self.r.partition_point(|&ri| ri <= x).min(n - 1);
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let (y0, y1) = (self.y[i - 1], self.y[i]);
        let t = (x - r0) / (r1 - r0);
        Some(y0 + t * (y1 - y0))
    }

    pub fn is_non_increasing(&self) -> bool {
        self.y.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.y.windows(2).all(|w| w[1] >= w[0])
    }
}

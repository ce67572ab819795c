//! The cube Λ = [−L, L]^d, its δ-grid and the shrunken box.

use crate::error::{Error, Result};

/// A point of ℝ^d stored in three slots; slots beyond the dimension are zero.
pub type Point = [f64; 3];

pub const ORIGIN: Point = [0.0; 3];

/// Builds a point from `d` coordinates.
pub fn point(coords: &[f64]) -> Result<Point> {
    if coords.is_empty() || coords.len() > 3 {
        return Err(Error::Invalid(format!("points need 1 to 3 coordinates, got {}", coords.len())));
    }
    let mut p = ORIGIN;
    p[..coords.len()].copy_from_slice(coords);
    Ok(p)
}

pub fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub fn distance(x: &Point, y: &Point) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    norm(&d)
}

pub fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

/// Integer coordinates of one half-open grid cell. Unused slots are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeIndex(pub [i64; 3]);

/// A cubic grid of side `delta` whose cells are `offset + [kδ, (k+1)δ)` per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub delta: f64,
    pub offset: f64,
}

impl Grid {
    /// Grid with a cell corner at the origin.
    pub fn origin(dim: usize, delta: f64) -> Self {
        Self { dim, delta, offset: 0.0 }
    }

    pub fn cube_of(&self, x: &Point) -> CubeIndex {
        let mut k = [0i64; 3];
        for (i, ki) in k.iter_mut().enumerate().take(self.dim) {
            *ki = ((x[i] - self.offset) / self.delta).floor() as i64;
        }
        CubeIndex(k)
    }

    pub fn lower_corner(&self, c: &CubeIndex) -> Point {
        let mut p = ORIGIN;
        for (i, pi) in p.iter_mut().enumerate().take(self.dim) {
            *pi = self.offset + c.0[i] as f64 * self.delta;
        }
        p
    }

    pub fn cell_volume(&self) -> f64 {
        self.delta.powi(self.dim as i32)
    }

    /// Smallest norm over the closed cell.
    pub fn min_norm(&self, c: &CubeIndex) -> f64 {
        let lo = self.lower_corner(c);
        let mut s = 0.0;
        for &l in lo.iter().take(self.dim) {
            let u = l + self.delta;
            let t = if l > 0.0 {
                l
            } else if u < 0.0 {
                -u
            } else {
                0.0
            };
            s += t * t;
        }
        s.sqrt()
    }

    /// Centre of the cell.
    pub fn center(&self, c: &CubeIndex) -> Point {
        let mut p = self.lower_corner(c);
        for pi in p.iter_mut().take(self.dim) {
            *pi += 0.5 * self.delta;
        }
        p
    }

    /// The `2^d` corners of the cell.
    pub fn corners(&self, c: &CubeIndex) -> Vec<Point> {
        let lo = self.lower_corner(c);
        (0..1usize << self.dim)
            .map(|mask| {
                let mut p = lo;
                for (i, pi) in p.iter_mut().enumerate().take(self.dim) {
                    if mask >> i & 1 == 1 {
                        *pi += self.delta;
                    }
                }
                p
            })
            .collect()
    }
}

/// The simulation box Λ of half-size L with its δ-partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimBox {
    dim: usize,
    half_size: f64,
    delta: f64,
    cells_per_side: usize,
}

impl SimBox {
    pub fn new(dim: usize, half_size: f64, delta: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(half_size > 0.0 && half_size.is_finite()) {
            return Err(Error::Invalid(format!("half size must be positive, got {half_size}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Invalid(format!("delta must be positive, got {delta}")));
        }
        let ratio = 2.0 * half_size / delta;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Invalid(format!("2L/delta must be a positive integer (L={half_size}, delta={delta})")));
        }
        Ok(Self { dim, half_size, delta, cells_per_side: n as usize })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_size(&self) -> f64 {
        self.half_size
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_size).powi(self.dim as i32)
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.iter().take(self.dim).all(|c| c.abs() <= self.half_size)
    }

    /// Distance from `x ∈ Λ` to the boundary ∂Λ.
    pub fn boundary_distance(&self, x: &Point) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("point {:?} lies outside the box of half size {}", &x[..self.dim], self.half_size)));
        }
        Ok(x.iter().take(self.dim).map(|c| self.half_size - c.abs()).fold(f64::INFINITY, f64::min))
    }

    /// The δ-grid whose cell faces coincide with ∂Λ.
    pub fn grid(&self) -> Grid {
        let offset = if self.cells_per_side.is_multiple_of(2) { 0.0 } else { 0.5 * self.delta };
        Grid { dim: self.dim, delta: self.delta, offset }
    }

    pub fn cube_of(&self, x: &Point) -> CubeIndex {
        self.grid().cube_of(x)
    }

    /// Index of the lowest cell along each axis.
    fn first_index(&self) -> i64 {
        let n = self.cells_per_side as i64;
        if n % 2 == 0 {
            -n / 2
        } else {
            -(n + 1) / 2
        }
    }

    /// The cells of Λ_δ in lexicographic order.
    pub fn cells(&self) -> Vec<CubeIndex> {
        let k0 = self.first_index();
        let total = self.cells_per_side.pow(self.dim as u32);
        (0..total)
            .map(|mut flat| {
                let mut k = [0i64; 3];
                for ki in k.iter_mut().take(self.dim) {
                    *ki = k0 + (flat % self.cells_per_side) as i64;
                    flat /= self.cells_per_side;
                }
                CubeIndex(k)
            })
            .collect()
    }

    /// Position of a cell in the order returned by [`SimBox::cells`], with
    /// points on the upper faces assigned to the last cell.
    pub fn cell_slot(&self, x: &Point) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let c = self.cube_of(x);
        let k0 = self.first_index();
        let n = self.cells_per_side as i64;
        let mut slot = 0usize;
        for i in (0..self.dim).rev() {
            let k = (c.0[i] - k0).clamp(0, n - 1);
            slot = slot * self.cells_per_side + k as usize;
        }
        Some(slot)
    }

    /// Λ_h: the concentric cube of half-size L − h with δ re-chosen as the
    /// largest δ' ≤ δ for which 2(L − h)/δ' is an integer.
    pub fn shrink(&self, h: f64) -> Result<SimBox> {
        if !(h > 0.0 && h < self.half_size) {
            return Err(Error::Domain(format!("shrink margin must lie in (0, L), got h={h}, L={}", self.half_size)));
        }
        let half = self.half_size - h;
        let n = (2.0 * half / self.delta - 1e-9).ceil().max(1.0);
        SimBox::new(self.dim, half, 2.0 * half / n)
    }
}

/// Default margin function h(L) = L^{2/3}.
pub fn default_margin(l: f64) -> f64 {
    l.powf(2.0 / 3.0)
}

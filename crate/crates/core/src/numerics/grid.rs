use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform mesh `x_i = i·Δx`, `i = -G..=N_x+G`.
///
/// The physical nodes are `0..=N_x`; `G` ghost nodes are appended on each
/// side. The domain length is always reported as `N_x·Δx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    nx: usize,
    dx: f64,
    ghosts: usize,
}

impl Grid {
    pub fn new(length: f64, nx: usize, ghosts: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::validation("grid.length", "must be positive and finite"));
        }
        Self::with_spacing(nx, length / nx as f64, ghosts)
    }

    pub fn with_spacing(nx: usize, dx: f64, ghosts: usize) -> Result<Self> {
        if nx == 0 {
            return Err(Error::validation("grid.nx", "must be at least 1"));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::validation("grid.dx", "must be positive and finite"));
        }
        if ghosts == 0 {
            return Err(Error::validation("grid.ghosts", "must be at least 1"));
        }
        Ok(Grid { nx, dx, ghosts })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn ghosts(&self) -> usize {
        self.ghosts
    }

    pub fn length(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    /// Number of stored values, physical nodes plus ghosts.
    pub fn storage_len(&self) -> usize {
        self.nx + 1 + 2 * self.ghosts
    }

    pub fn x(&self, i: isize) -> f64 {
        i as f64 * self.dx
    }

    /// Lowest and highest stored node index.
    pub fn index_bounds(&self) -> (isize, isize) {
        (-(self.ghosts as isize), (self.nx + self.ghosts) as isize)
    }

    /// Physical node coordinates `x_0..=x_{N_x}`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nx as isize).map(|i| self.x(i)).collect()
    }

    /// `12/Δx²`, the compact-scheme weight.
    pub fn lambda(&self) -> f64 {
        12.0 / (self.dx * self.dx)
    }

    /// Same spacing, different ghost extent.
    pub fn with_ghosts(&self, ghosts: usize) -> Result<Self> {
        Self::with_spacing(self.nx, self.dx, ghosts)
    }
}

/// Nodal values on a [`Grid`], including ghost slots, indexed by the signed
/// node index `i ∈ -G..=N_x+G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type ComplexGridFunction = GridFunction<Complex64>;
pub type RealGridFunction = GridFunction<f64>;

impl<T: Copy> GridFunction<T> {
    pub fn filled(grid: Grid, value: T) -> Self {
        GridFunction {
            grid,
            values: vec![value; grid.storage_len()],
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(isize) -> T) -> Self {
        let (lo, hi) = grid.index_bounds();
        GridFunction {
            grid,
            values: (lo..=hi).map(&mut f).collect(),
        }
    }

    /// Wraps raw storage ordered from index `-G` upward.
    pub fn from_storage(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.storage_len() {
            return Err(Error::InvalidSystem(format!(
                "grid function needs {} values, got {}",
                grid.storage_len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn storage(&self) -> &[T] {
        &self.values
    }

    /// Values at the physical nodes `0..=N_x`.
    pub fn interior(&self) -> &[T] {
        let g = self.grid.ghosts;
        &self.values[g..g + self.grid.nx + 1]
    }

    pub fn interior_mut(&mut self) -> &mut [T] {
        let g = self.grid.ghosts;
        let n = self.grid.nx;
        &mut self.values[g..g + n + 1]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> GridFunction<U> {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn offset(&self, i: isize) -> usize {
        let k = i + self.grid.ghosts as isize;
        assert!(
            k >= 0 && (k as usize) < self.values.len(),
            "node index {i} outside stored range {:?}",
            self.grid.index_bounds()
        );
        k as usize
    }
}

impl<T: Copy> Index<isize> for GridFunction<T> {
    type Output = T;

    fn index(&self, i: isize) -> &T {
        &self.values[self.offset(i)]
    }
}

impl<T: Copy> IndexMut<isize> for GridFunction<T> {
    fn index_mut(&mut self, i: isize) -> &mut T {
        let k = self.offset(i);
        &mut self.values[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_node_hits_length() {
        for nx in [3usize, 7, 100, 1600, 12345] {
            let g = Grid::new(30.0, nx, 1).unwrap();
            let xn = g.x(nx as isize);
            assert!((xn - 30.0).abs() <= f64::EPSILON * 30.0 * nx as f64);
            assert_eq!(g.length(), nx as f64 * g.dx());
        }
    }

    #[test]
    fn storage_covers_ghosts() {
        let g = Grid::new(10.0, 4, 2).unwrap();
        assert_eq!(g.storage_len(), 9);
        let f = GridFunction::from_fn(g, |i| i as f64);
        assert_eq!(f[-2], -2.0);
        assert_eq!(f[6], 6.0);
        assert_eq!(f.interior(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(10.0, 0, 1).is_err());
        assert!(Grid::new(-1.0, 10, 1).is_err());
        assert!(Grid::new(10.0, 10, 0).is_err());
    }

    #[test]
    #[should_panic]
    fn out_of_range_index_panics() {
        let f = GridFunction::filled(Grid::new(1.0, 2, 1).unwrap(), 0.0);
        let _ = f[4];
    }
}

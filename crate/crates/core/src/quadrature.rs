//! Uniform grids on `[0, π]`, sampled functions of one and two variables, and
//! composite trapezoid sums.
//!
//! Every integration limit that appears in the transformation-operator
//! recursion is a grid node when its arguments are nodes, so all integrals in
//! this crate reduce to trapezoid sums over contiguous runs of samples.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Uniform partition of `[0, π]` into `n_intervals` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_intervals: usize,
    step: f64,
}

impl Grid {
    pub fn new(n_intervals: usize) -> Result<Self> {
        make_grid(n_intervals)
    }

    #[inline]
    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    /// Number of nodes, `n_intervals + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_intervals + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Node `x_i`; the endpoints are exactly `0` and `π`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_intervals {
            PI
        } else {
            PI * i as f64 / self.n_intervals as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// The grid with half the step.
    pub fn refined(&self) -> Grid {
        Grid {
            n_intervals: 2 * self.n_intervals,
            step: PI / (2 * self.n_intervals) as f64,
        }
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.n_intervals == other.n_intervals {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.n_intervals,
                found: other.n_intervals,
            })
        }
    }
}

pub fn make_grid(n_intervals: usize) -> Result<Grid> {
    if n_intervals < 2 {
        return Err(Error::GridTooCoarse { n_intervals });
    }
    Ok(Grid {
        n_intervals,
        step: PI / n_intervals as f64,
    })
}

/// Trapezoid sum of equally spaced samples. Fewer than two samples give
/// exactly zero.
#[inline]
pub(crate) fn trapezoid(samples: &[Complex64], h: f64) -> Complex64 {
    match samples.len() {
        0 | 1 => Complex64::new(0.0, 0.0),
        n => {
            let inner: Complex64 = samples[1..n - 1].iter().sum();
            (inner + (samples[0] + samples[n - 1]) * 0.5) * h
        }
    }
}

/// Trapezoid sum of `f(k)` over `k = from..=to`.
#[inline]
pub(crate) fn trapezoid_by<F>(from: usize, to: usize, h: f64, mut f: F) -> Complex64
where
    F: FnMut(usize) -> Complex64,
{
    if to <= from {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = (f(from) + f(to)) * 0.5;
    for k in from + 1..to {
        acc += f(k);
    }
    acc * h
}

/// Composite trapezoid approximation of `∫ f` over `[x_{i_from}, x_{i_to}]`.
pub fn integrate_nodes(samples: &[Complex64], grid: &Grid, i_from: usize, i_to: usize) -> Result<Complex64> {
    if i_from > i_to {
        return Err(Error::InvalidArgument("integration range must satisfy i_from <= i_to"));
    }
    if i_to >= samples.len() {
        return Err(Error::IndexOutOfRange {
            index: i_to,
            len: samples.len(),
        });
    }
    Ok(trapezoid(&samples[i_from..=i_to], grid.step()))
}

/// A complex function of one variable sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Profile {
    pub fn zeros(grid: Grid) -> Self {
        Profile {
            grid,
            values: alloc::vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.n_intervals(),
                found: values.len().saturating_sub(1),
            });
        }
        Ok(Profile { grid, values })
    }

    pub fn from_fn<F>(grid: Grid, mut f: F) -> Self
    where
        F: FnMut(f64) -> Complex64,
    {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Profile { grid, values }
    }

    pub fn from_real_fn<F>(grid: Grid, mut f: F) -> Self
    where
        F: FnMut(f64) -> f64,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn interp(&self, x: f64) -> Result<Complex64> {
        interp_profile(self, x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `sup |self − other|` over the nodes.
    pub fn sup_distance(&self, other: &Profile) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Piecewise-linear interpolation of a profile; exact at nodes.
pub fn interp_profile(p: &Profile, x: f64) -> Result<Complex64> {
    let n = p.grid.n_intervals();
    if !(0.0..=PI).contains(&x) {
        return Err(Error::OutOfDomain { x });
    }
    let h = p.grid.step();
    let nearest = Float::round(x / h) as usize;
    let nearest = nearest.min(n);
    if (x - p.grid.node(nearest)).abs() <= 4.0 * f64::EPSILON * PI {
        return Ok(p.values[nearest]);
    }
    let k = ((x / h) as usize).min(n - 1);
    let frac = (x - p.grid.node(k)) / h;
    Ok(p.values[k] * (1.0 - frac) + p.values[k + 1] * frac)
}

/// A complex function on the triangle `0 ≤ t ≤ x ≤ π`, sampled at node pairs
/// `(x_i, t_j)` with `j ≤ i`. Storage is packed row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularField {
    grid: Grid,
    values: Vec<Complex64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl TriangularField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        TriangularField {
            grid,
            values: alloc::vec![Complex64::new(0.0, 0.0); n * (n + 1) / 2],
        }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        Self::from_index_fn(grid, |_, _| c)
    }

    /// Samples `f(x, t)` at every node pair of the triangle.
    pub fn from_fn<F>(grid: Grid, mut f: F) -> Self
    where
        F: FnMut(f64, f64) -> Complex64,
    {
        Self::from_index_fn(grid, |i, j| f(grid.node(i), grid.node(j)))
    }

    pub fn from_real_fn<F>(grid: Grid, mut f: F) -> Self
    where
        F: FnMut(f64, f64) -> f64,
    {
        Self::from_fn(grid, |x, t| Complex64::new(f(x, t), 0.0))
    }

    /// Builds a field from its value at index pairs `(i, j)`, `j ≤ i`.
    pub fn from_index_fn<F>(grid: Grid, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let n = grid.len();
        let mut values = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                values.push(f(i, j));
            }
        }
        TriangularField { grid, values }
    }

    /// Packed row-major values, `(0,0), (1,0), (1,1), (2,0), …`.
    pub fn from_packed(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        let n = grid.len();
        if values.len() != n * (n + 1) / 2 {
            return Err(Error::InvalidArgument("packed triangle has the wrong number of entries"));
        }
        Ok(TriangularField { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn packed(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at `(x_i, t_j)`. Panics when `j > i`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(j <= i, "triangular field accessed above the diagonal at ({i}, {j})");
        self.values[row_start(i) + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j <= i, "triangular field accessed above the diagonal at ({i}, {j})");
        self.values[row_start(i) + j] = v;
    }

    /// Row `i`: the values at `(x_i, t_0..=t_i)`.
    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.values[row_start(i)..row_start(i + 1)]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.values[row_start(i)..row_start(i + 1)]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.grid.len()).map(|i| self.get(i, i)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &TriangularField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn add_assign(&mut self, other: &TriangularField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn sub(&self, other: &TriangularField) -> Result<TriangularField> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(TriangularField { grid: self.grid, values })
    }

    /// Keeps the values at the nodes of a grid with twice the step. Requires
    /// an even number of intervals.
    pub fn coarsen(&self) -> Result<TriangularField> {
        let n = self.grid.n_intervals();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument("coarsening needs an even number of intervals"));
        }
        let coarse = make_grid(n / 2)?;
        Ok(TriangularField::from_index_fn(coarse, |i, j| self.get(2 * i, 2 * j)))
    }
}

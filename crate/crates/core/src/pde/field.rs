use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{NodeKind, Point, RingGrid};

/// Grid function on a rasterized ring.
///
/// Values are stored for every lattice node: interior nodes carry the unknowns,
/// nodes in the inner body carry `inner_value` and nodes outside the outer body
/// carry `outer_value`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<RingGrid>,
    values: Vec<f64>,
    outer_value: f64,
    inner_value: f64,
}

impl ScalarField {
    /// Constant `interior` value on the ring with the given boundary data.
    pub fn constant(grid: Arc<RingGrid>, interior: f64, outer_value: f64, inner_value: f64) -> Self {
        Self::from_fn(grid, |_| interior, outer_value, inner_value)
    }

    /// Samples `f` at interior nodes.
    pub fn from_fn(grid: Arc<RingGrid>, f: impl Fn(Point) -> f64, outer_value: f64, inner_value: f64) -> Self {
        let n = grid.n();
        let mut values = vec![0.0; n * n];
        for (idx, v) in values.iter_mut().enumerate() {
            *v = match grid.kind(idx) {
                NodeKind::Interior => {
                    let (i, j) = grid.coords(idx);
                    f(grid.position(i, j))
                }
                NodeKind::Inner => inner_value,
                NodeKind::Outer => outer_value,
            };
        }
        ScalarField {
            grid,
            values,
            outer_value,
            inner_value,
        }
    }

    /// Builds a field from a vector of unknowns in interior order.
    pub fn from_unknowns(grid: Arc<RingGrid>, x: &[f64], outer_value: f64, inner_value: f64) -> Self {
        let mut f = Self::constant(grid, 0.0, outer_value, inner_value);
        f.set_unknowns(x);
        f
    }

    /// Wraps full-lattice values; non-interior entries are overwritten with the
    /// boundary data.
    pub fn from_values(grid: Arc<RingGrid>, mut values: Vec<f64>, outer_value: f64, inner_value: f64) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                n * n,
                values.len()
            )));
        }
        for (idx, v) in values.iter_mut().enumerate() {
            match grid.kind(idx) {
                NodeKind::Interior => {
                    if !v.is_finite() {
                        return Err(Error::invalid(format!("non-finite value at node {idx}")));
                    }
                }
                NodeKind::Inner => *v = inner_value,
                NodeKind::Outer => *v = outer_value,
            }
        }
        Ok(ScalarField {
            grid,
            values,
            outer_value,
            inner_value,
        })
    }

    pub fn grid(&self) -> &Arc<RingGrid> {
        &self.grid
    }

    /// Full lattice values, row-major with `x` fastest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.n() + i]
    }

    pub fn outer_value(&self) -> f64 {
        self.outer_value
    }

    pub fn inner_value(&self) -> f64 {
        self.inner_value
    }

    /// Interior values in unknown order.
    pub fn unknowns(&self) -> Vec<f64> {
        self.grid.interior_nodes().iter().map(|&i| self.values[i]).collect()
    }

    pub fn set_unknowns(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.grid.interior_count());
        for (&idx, &v) in self.grid.interior_nodes().iter().zip(x) {
            self.values[idx] = v;
        }
    }

    /// `(min, max)` over interior nodes.
    pub fn interior_range(&self) -> (f64, f64) {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&i| self.values[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Whether interior values lie within the boundary data range up to `tol`.
    pub fn satisfies_maximum_principle(&self, tol: f64) -> bool {
        let lo = self.outer_value.min(self.inner_value) - tol;
        let hi = self.outer_value.max(self.inner_value) + tol;
        let (min, max) = self.interior_range();
        min >= lo && max <= hi
    }

    /// Max-norm difference over interior nodes.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&i| (self.values[i] - other.values[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Whether both fields live on the same lattice mask.
    pub fn same_mask(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.mask_hash() == other.grid.mask_hash()
    }

    /// Bilinear interpolation of the lattice values.
    pub fn sample(&self, p: Point) -> f64 {
        let n = self.grid.n();
        let (gx, gy) = self.grid.to_grid(p);
        let i = (gx.floor().max(0.0) as usize).min(n - 2);
        let j = (gy.floor().max(0.0) as usize).min(n - 2);
        let fx = gx - i as f64;
        let fy = gy - j as f64;
        let v = |a: usize, b: usize| self.values[b * n + a];
        (1.0 - fx) * (1.0 - fy) * v(i, j)
            + fx * (1.0 - fy) * v(i + 1, j)
            + (1.0 - fx) * fy * v(i, j + 1)
            + fx * fy * v(i + 1, j + 1)
    }
}

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Scheme {
    #[serde(rename = "backward-euler")]
    BackwardEuler,
    #[serde(rename = "crank-nicolson")]
    CrankNicolson,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "be" | "backward-euler" => Ok(Scheme::BackwardEuler),
            "cn" | "crank-nicolson" => Ok(Scheme::CrankNicolson),
            _ => Err(Error::invalid(format!(
                "unknown scheme `{s}` (expected backward-euler or crank-nicolson)"
            ))),
        }
    }
}

/// Saved slices of a time-dependent solve.
#[derive(Clone, Debug)]
pub struct SpaceTimeSolution {
    pub dt: f64,
    pub scheme: Scheme,
    pub times: Vec<f64>,
    pub slices: Vec<ScalarField>,
}

impl SpaceTimeSolution {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn grid(&self) -> &Arc<RingGrid> {
        self.slices[0].grid()
    }

    pub fn final_slice(&self) -> &ScalarField {
        self.slices.last().expect("solution has at least one slice")
    }

    /// Index of the saved slice closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

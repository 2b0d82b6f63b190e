use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Boundary, RingGrid};

use super::field::ScalarField;

const NONE: u32 = u32::MAX;

/// Cut-cell 5-point Laplacian on a rasterized ring.
///
/// The discrete Laplacian at an interior node is `Σ_d (u_d - u_P)/(θ_d h²)`
/// where `θ_d = 1` towards interior neighbours and `θ_d` is the cut fraction
/// towards the boundary, with `u_d` the Dirichlet value there. Written as
/// `L u = b - A u`, the matrix `A` is symmetric positive definite and an
/// M-matrix, so conjugate gradients apply and the maximum principle holds.
#[derive(Clone, Debug)]
pub struct Operator {
    grid: Arc<RingGrid>,
    inv_h2: f64,
    diag: Vec<f64>,
    nbr: Vec<[u32; 4]>,
    cut_outer: Vec<f64>,
    cut_inner: Vec<f64>,
}

impl Operator {
    pub fn new(grid: Arc<RingGrid>) -> Self {
        let h = grid.spacing();
        let inv_h2 = 1.0 / (h * h);
        let m = grid.interior_count();
        let mut diag = vec![0.0; m];
        let mut nbr = vec![[NONE; 4]; m];
        let mut cut_outer = vec![0.0; m];
        let mut cut_inner = vec![0.0; m];
        for (p, &idx) in grid.interior_nodes().iter().enumerate() {
            for d in 0..4 {
                match grid.cuts(idx)[d] {
                    Some(cut) => {
                        let w = inv_h2 / cut.frac;
                        diag[p] += w;
                        match cut.boundary {
                            Boundary::Outer => cut_outer[p] += w,
                            Boundary::Inner => cut_inner[p] += w,
                        }
                    }
                    None => {
                        let q = grid
                            .neighbour(idx, d)
                            .and_then(|q| grid.unknown(q))
                            .expect("uncut neighbour of an interior node is interior");
                        nbr[p][d] = q as u32;
                        diag[p] += inv_h2;
                    }
                }
            }
        }
        Operator {
            grid,
            inv_h2,
            diag,
            nbr,
            cut_outer,
            cut_inner,
        }
    }

    pub fn grid(&self) -> &Arc<RingGrid> {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for p in 0..self.diag.len() {
            let mut s = self.diag[p] * x[p];
            for &q in &self.nbr[p] {
                if q != NONE {
                    s -= self.inv_h2 * x[q as usize];
                }
            }
            y[p] = s;
        }
    }

    /// Boundary contribution `b` for the given Dirichlet values.
    pub fn boundary_rhs(&self, outer_value: f64, inner_value: f64) -> Vec<f64> {
        self.cut_outer
            .iter()
            .zip(&self.cut_inner)
            .map(|(o, i)| outer_value * o + inner_value * i)
            .collect()
    }

    /// Discrete Laplacian of a field at the unknowns.
    pub fn laplacian(&self, field: &ScalarField) -> Vec<f64> {
        let x = field.unknowns();
        let mut y = vec![0.0; x.len()];
        self.apply(&x, &mut y);
        let b = self.boundary_rhs(field.outer_value(), field.inner_value());
        y.iter().zip(&b).map(|(ax, b)| b - ax).collect()
    }

    /// Discrete Laplacian spread onto the full lattice (zero off the ring).
    pub fn laplacian_lattice(&self, field: &ScalarField) -> Vec<f64> {
        let lap = self.laplacian(field);
        let n = self.grid.n();
        let mut out = vec![0.0; n * n];
        for (&idx, v) in self.grid.interior_nodes().iter().zip(lap) {
            out[idx] = v;
        }
        out
    }

    /// Solves `(α I + β A) x = rhs` by Jacobi-preconditioned conjugate
    /// gradients, starting from `x`. Stops when the max-norm residual drops to
    /// `tol`; returns the iteration count.
    pub fn solve(&self, alpha: f64, beta: f64, rhs: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
        let m = self.size();
        if rhs.len() != m || x.len() != m {
            return Err(Error::invalid("system size mismatch"));
        }
        let apply = |v: &[f64], out: &mut [f64]| {
            self.apply(v, out);
            for (o, vi) in out.iter_mut().zip(v) {
                *o = alpha * vi + beta * *o;
            }
        };
        let inv_diag: Vec<f64> = self.diag.iter().map(|d| 1.0 / (alpha + beta * d)).collect();
        let mut r = vec![0.0; m];
        apply(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(rhs) {
            *ri = bi - *ri;
        }
        let max_norm = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut res = max_norm(&r);
        if res <= tol {
            return Ok(0);
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; m];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        for it in 1..=max_iter {
            apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if !(pap > 0.0) {
                return Err(Error::SolverDiverged {
                    iterations: it,
                    residual: res,
                });
            }
            let step = rz / pap;
            for i in 0..m {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            res = max_norm(&r);
            if res <= tol {
                return Ok(it);
            }
            for i in 0..m {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta_cg = rz_new / rz;
            rz = rz_new;
            for i in 0..m {
                p[i] = z[i] + beta_cg * p[i];
            }
        }
        Err(Error::SolverDiverged {
            iterations: max_iter,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_ball, rasterize, ConvexRing};

    fn grid() -> Arc<RingGrid> {
        let ring = ConvexRing::new(
            make_ball([0.0, 0.0], 2.0, 256).unwrap(),
            make_ball([0.1, 0.0], 1.0, 256).unwrap(),
        )
        .unwrap();
        Arc::new(rasterize(&ring, 64, 0.05).unwrap())
    }

    #[test]
    fn operator_is_symmetric() {
        let op = Operator::new(grid());
        let m = op.size();
        let x: Vec<f64> = (0..m).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
        let y: Vec<f64> = (0..m).map(|i| ((i * 104729) % 97) as f64 / 97.0).collect();
        let mut ax = vec![0.0; m];
        let mut ay = vec![0.0; m];
        op.apply(&x, &mut ax);
        op.apply(&y, &mut ay);
        let a: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let b: f64 = ay.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn constants_are_harmonic() {
        let g = grid();
        let op = Operator::new(g.clone());
        let f = ScalarField::constant(g, 0.7, 0.7, 0.7);
        assert!(op.laplacian(&f).iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn cg_reports_divergence() {
        let op = Operator::new(grid());
        let rhs = op.boundary_rhs(0.0, 1.0);
        let mut x = vec![0.0; op.size()];
        let err = op.solve(0.0, 1.0, &rhs, &mut x, 1e-10, 3).unwrap_err();
        assert!(matches!(err, Error::SolverDiverged { iterations: 3, .. }));
    }
}

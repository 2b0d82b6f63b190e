//! Jets of grid solutions by finite differences.
//!
//! Spatial first and second derivatives use fourth-order central stencils.
//! Time derivatives come from the equation: `U_t` is the fourth-order
//! Laplacian of the slice and its spatial derivatives are second-order
//! differences of `U_t`, so the heat relations `u_t = Δu`, `u_it = Δu_i`,
//! `u_tt = Δu_t` hold exactly at the discrete level.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::pde::{ScalarField, SpaceTimeSolution};

use super::jet::{Jet, D3, T};

/// Cells of clearance needed around a node for a jet of the given order.
pub fn stencil_reach(order: usize) -> usize {
    if order >= 3 {
        4
    } else {
        3
    }
}

struct Stencil<'a> {
    field: &'a ScalarField,
    n: isize,
    i: isize,
    j: isize,
    inv_h: f64,
}

impl Stencil<'_> {
    #[inline]
    fn u(&self, a: isize, b: isize) -> Result<f64> {
        let (p, q) = (self.i + a, self.j + b);
        if p < 0 || q < 0 || p >= self.n || q >= self.n {
            return Err(Error::StencilOutOfDomain(self.i as usize, self.j as usize));
        }
        let idx = q as usize * self.n as usize + p as usize;
        if !self.field.grid().is_interior(idx) {
            return Err(Error::StencilOutOfDomain(self.i as usize, self.j as usize));
        }
        Ok(self.field.at(idx))
    }

    fn d1x(&self, a: isize, b: isize) -> Result<f64> {
        Ok(
            (-self.u(a + 2, b)? + 8.0 * self.u(a + 1, b)? - 8.0 * self.u(a - 1, b)? + self.u(a - 2, b)?) * self.inv_h
                / 12.0,
        )
    }

    fn d1y(&self, a: isize, b: isize) -> Result<f64> {
        Ok(
            (-self.u(a, b + 2)? + 8.0 * self.u(a, b + 1)? - 8.0 * self.u(a, b - 1)? + self.u(a, b - 2)?) * self.inv_h
                / 12.0,
        )
    }

    fn d2x(&self, a: isize, b: isize) -> Result<f64> {
        Ok(
            (-self.u(a + 2, b)? + 16.0 * self.u(a + 1, b)? - 30.0 * self.u(a, b)? + 16.0 * self.u(a - 1, b)?
                - self.u(a - 2, b)?)
                * self.inv_h
                * self.inv_h
                / 12.0,
        )
    }

    fn d2y(&self, a: isize, b: isize) -> Result<f64> {
        Ok(
            (-self.u(a, b + 2)? + 16.0 * self.u(a, b + 1)? - 30.0 * self.u(a, b)? + 16.0 * self.u(a, b - 1)?
                - self.u(a, b - 2)?)
                * self.inv_h
                * self.inv_h
                / 12.0,
        )
    }

    fn dxy(&self, a: isize, b: isize) -> Result<f64> {
        const W: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
        let mut s = 0.0;
        for (da, wa) in W {
            for (db, wb) in W {
                s += wa * wb * self.u(a + da, b + db)?;
            }
        }
        Ok(s * self.inv_h * self.inv_h / 144.0)
    }

    /// `u_t` through the equation.
    fn ut(&self, a: isize, b: isize) -> Result<f64> {
        Ok(self.d2x(a, b)? + self.d2y(a, b)?)
    }

    /// Five-point Laplacian of `U_t`.
    fn utt(&self, a: isize, b: isize) -> Result<f64> {
        let c = self.ut(a, b)?;
        Ok(
            (self.ut(a + 1, b)? + self.ut(a - 1, b)? + self.ut(a, b + 1)? + self.ut(a, b - 1)? - 4.0 * c)
                * self.inv_h
                * self.inv_h,
        )
    }

    fn jet(&self, order: usize) -> Result<Jet> {
        let ih = self.inv_h;
        let ih2 = ih * ih;
        let ut = self.ut(0, 0)?;
        let (utxp, utxm) = (self.ut(1, 0)?, self.ut(-1, 0)?);
        let (utyp, utym) = (self.ut(0, 1)?, self.ut(0, -1)?);
        let uxt = 0.5 * (utxp - utxm) * ih;
        let uyt = 0.5 * (utyp - utym) * ih;
        let uxxt = (utxp - 2.0 * ut + utxm) * ih2;
        let uyyt = (utyp - 2.0 * ut + utym) * ih2;
        let uxyt = 0.25 * (self.ut(1, 1)? - self.ut(1, -1)? - self.ut(-1, 1)? + self.ut(-1, -1)?) * ih2;
        let utt = uxxt + uyyt;
        let (uxx, uyy, uxy) = (self.d2x(0, 0)?, self.d2y(0, 0)?, self.dxy(0, 0)?);
        let d1 = [self.d1x(0, 0)?, self.d1y(0, 0)?, ut];
        let d2 = [[uxx, uxy, uxt], [uxy, uyy, uyt], [uxt, uyt, utt]];
        let mut jet = Jet::new(self.u(0, 0)?, d1, d2);
        jet.heat_constrained = true;
        if order >= 3 {
            let uxxx = 0.5 * (self.d2x(1, 0)? - self.d2x(-1, 0)?) * ih;
            let uxxy = 0.5 * (self.d2x(0, 1)? - self.d2x(0, -1)?) * ih;
            let uxyy = 0.5 * (self.d2y(1, 0)? - self.d2y(-1, 0)?) * ih;
            let uyyy = 0.5 * (self.d2y(0, 1)? - self.d2y(0, -1)?) * ih;
            let uxtt = 0.5 * (self.utt(1, 0)? - self.utt(-1, 0)?) * ih;
            let uytt = 0.5 * (self.utt(0, 1)? - self.utt(0, -1)?) * ih;
            let uttt =
                (self.utt(1, 0)? + self.utt(-1, 0)? + self.utt(0, 1)? + self.utt(0, -1)? - 4.0 * self.utt(0, 0)?) * ih2;
            let mut d3: D3 = [[[0.0; 3]; 3]; 3];
            let mut set = |a: usize, b: usize, c: usize, v: f64| {
                for (p, q, r) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                    d3[p][q][r] = v;
                }
            };
            set(0, 0, 0, uxxx);
            set(0, 0, 1, uxxy);
            set(0, 1, 1, uxyy);
            set(1, 1, 1, uyyy);
            set(0, 0, T, uxxt);
            set(0, 1, T, uxyt);
            set(1, 1, T, uyyt);
            set(0, T, T, uxtt);
            set(1, T, T, uytt);
            set(T, T, T, uttt);
            jet.d3 = Some(d3);
        }
        Ok(jet)
    }
}

/// Jet of a slice at lattice node `(i, j)`.
pub fn node_jet(field: &ScalarField, i: usize, j: usize, order: usize) -> Result<Jet> {
    let grid = field.grid();
    Stencil {
        field,
        n: grid.n() as isize,
        i: i as isize,
        j: j as isize,
        inv_h: 1.0 / grid.spacing(),
    }
    .jet(order)
}

/// Jet of a slice at an arbitrary point, blending the four surrounding node
/// jets bilinearly.
pub fn field_jet(field: &ScalarField, p: Point, order: usize) -> Result<Jet> {
    let grid = field.grid();
    let (gx, gy) = grid.to_grid(p);
    if !(gx >= 0.0 && gy >= 0.0 && gx <= (grid.n() - 1) as f64 && gy <= (grid.n() - 1) as f64) {
        return Err(Error::StencilOutOfDomain(gx.max(0.0) as usize, gy.max(0.0) as usize));
    }
    let i0 = (gx.floor() as usize).min(grid.n() - 2);
    let j0 = (gy.floor() as usize).min(grid.n() - 2);
    let fx = gx - i0 as f64;
    let fy = gy - j0 as f64;
    let corners = [
        ((1.0 - fx) * (1.0 - fy), i0, j0),
        (fx * (1.0 - fy), i0 + 1, j0),
        ((1.0 - fx) * fy, i0, j0 + 1),
        (fx * fy, i0 + 1, j0 + 1),
    ];
    let mut jets = Vec::with_capacity(4);
    for (w, i, j) in corners {
        if w > 0.0 {
            jets.push((w, node_jet(field, i, j, order)?));
        }
    }
    let parts: Vec<(f64, &Jet)> = jets.iter().map(|(w, j)| (*w, j)).collect();
    Ok(Jet::blend(&parts))
}

/// Jet of a saved solution slice at `point`.
pub fn jet_from_field(solution: &SpaceTimeSolution, point: Point, t_index: usize, order: usize) -> Result<Jet> {
    let slice = solution
        .slices
        .get(t_index)
        .ok_or_else(|| Error::invalid(format!("time index {t_index} out of range")))?;
    field_jet(slice, point, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_ball, rasterize, ConvexRing};
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<crate::geometry::RingGrid> {
        let ring = ConvexRing::new(
            make_ball([0.0, 0.0], 2.0, 256).unwrap(),
            make_ball([0.0, 0.0], 0.5, 256).unwrap(),
        )
        .unwrap();
        Arc::new(rasterize(&ring, n, 0.05).unwrap())
    }

    #[test]
    fn quadratic_is_exact() {
        let g = grid(128);
        let f = ScalarField::from_fn(g, |p| p[0] * p[0] + p[1] * p[1], 0.0, 1.0);
        let j = field_jet(&f, [1.2, 0.3], 2).unwrap();
        assert!((j.d2[0][0] - 2.0).abs() < 1e-8);
        assert!((j.d2[1][1] - 2.0).abs() < 1e-8);
        assert!(j.d2[0][1].abs() < 1e-8);
        assert!((j.d1[T] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn heat_relations_hold_exactly() {
        let g = grid(128);
        let f = ScalarField::from_fn(g.clone(), |p| (p[0] * 1.3).sin() * (0.7 * p[1]).exp(), 0.0, 1.0);
        let (gi, gj) = g.to_grid([1.1, -0.4]);
        let j = node_jet(&f, gi.round() as usize, gj.round() as usize, 3).unwrap();
        assert!(j.heat_defect() < 1e-9 * (1.0 + j.d1[T].abs()));
        assert!(j.symmetry_defect() == 0.0);
    }

    #[test]
    fn stencil_guard() {
        let g = grid(96);
        let f = ScalarField::from_fn(g.clone(), |p| p[0], 0.0, 1.0);
        // the node just outside the inner disk along the x axis
        let (i, j) = g.coords(
            *g.interior_nodes()
                .iter()
                .find(|&&idx| g.boundary_distance(idx).is_some())
                .unwrap(),
        );
        assert!(matches!(node_jet(&f, i, j, 2), Err(Error::StencilOutOfDomain(_, _))));
    }
}

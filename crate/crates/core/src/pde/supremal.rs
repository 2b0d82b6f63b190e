//! Supremal convolution of quasiconcave fields: superlevel sets combine by
//! Minkowski addition, `{w ≥ c} = (1−s){u_A ≥ c} + s{u_B ≥ c}`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::convexity::{extract_spatial_levelset, level_ladder, superlevel_violation, DEFAULT_QC_TOL};
use crate::error::{Error, Result};
use crate::geometry::{minkowski_combine, ConvexBody, Point};

use super::field::ScalarField;

/// Number of ladder levels used by default.
pub const DEFAULT_LEVELS: usize = 64;

/// Support samples of the hull of `points` around `center`.
fn support_of(points: &[Point], center: Point, m: usize) -> Result<ConvexBody> {
    let support = (0..m)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / m as f64).sin_cos();
            points
                .iter()
                .map(|p| (p[0] - center[0]) * c + (p[1] - center[1]) * s)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    ConvexBody::new(center, support)
}

/// Superlevel set `{u ≥ c}` as a convex body (hull of the level curve and the
/// inner body); fails if the set is not convex within `tol` spacings.
fn superlevel_body(u: &ScalarField, c: f64, tol: f64, m: usize) -> Result<ConvexBody> {
    let grid = u.grid();
    let inner = grid.ring().inner();
    let sample = extract_spatial_levelset(u, c)?;
    let (violation, at) = superlevel_violation(&sample, inner);
    if violation > tol * grid.spacing() {
        return Err(Error::NotQuasiconcave(format!(
            "superlevel set at c = {c} is non-convex by {violation:e} near ({:.4}, {:.4})",
            at[0], at[1]
        )));
    }
    let mut points: Vec<Point> = sample.points().copied().collect();
    points.extend((0..inner.resolution()).map(|k| inner.boundary_point(inner.angle(k))));
    support_of(&points, inner.center(), m)
}

pub fn supremal_convolution(ua: &ScalarField, ub: &ScalarField, s: f64) -> Result<ScalarField> {
    supremal_convolution_with(ua, ub, s, DEFAULT_LEVELS, DEFAULT_QC_TOL)
}

/// Supremal convolution on a ladder of `levels` uniform levels. Between
/// ladder levels the field is interpolated linearly in the distances to the
/// two neighbouring combined sets, so each ladder level set is exactly the
/// boundary of the combined set and the field is monotone across levels.
pub fn supremal_convolution_with(
    ua: &ScalarField,
    ub: &ScalarField,
    s: f64,
    levels: usize,
    qc_tol: f64,
) -> Result<ScalarField> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("weight {s} outside [0, 1]")));
    }
    if !ua.same_mask(ub) {
        return Err(Error::invalid("fields live on different rings"));
    }
    if ua.outer_value() != ub.outer_value() || ua.inner_value() != ub.inner_value() {
        return Err(Error::invalid("fields have different boundary data"));
    }
    let (lo, hi) = (ua.outer_value(), ua.inner_value());
    if !(lo < hi) {
        return Err(Error::invalid("supremal convolution expects outer value < inner value"));
    }
    if levels == 0 {
        return Err(Error::invalid("level ladder is empty"));
    }
    if s == 0.0 {
        return Ok(ua.clone());
    }
    if s == 1.0 {
        return Ok(ub.clone());
    }
    let grid = ua.grid().clone();
    let ring = grid.ring();
    let m = ring.outer().resolution().max(ring.inner().resolution()).max(256);
    let ladder = level_ladder(lo, hi, levels);

    let bodies = ladder
        .par_iter()
        .map(|&c| {
            let a = superlevel_body(ua, c, qc_tol, m)?;
            let b = superlevel_body(ub, c, qc_tol, m)?;
            minkowski_combine(&a, &b, s)
        })
        .collect::<Result<Vec<_>>>()?;

    // positive inside
    let depth = |j: usize, p: Point| -> f64 { -bodies[j].polygon_excess(p).0 };
    let outer = ring.outer();
    let inner = ring.inner();

    let values: Vec<(usize, f64)> = grid
        .interior_nodes()
        .par_iter()
        .map(|&idx| {
            let (i, j) = grid.coords(idx);
            let p = grid.position(i, j);
            // largest ladder index whose combined set contains p
            let (mut a, mut b) = (0usize, ladder.len());
            while a < b {
                let mid = (a + b) / 2;
                if depth(mid, p) >= 0.0 {
                    a = mid + 1;
                } else {
                    b = mid;
                }
            }
            let v = match a {
                0 => {
                    let d_in = (-outer.polygon_excess(p).0).max(0.0);
                    let d_out = -depth(0, p);
                    lo + (ladder[0] - lo) * d_in / (d_in + d_out)
                }
                k if k == ladder.len() => {
                    let d_in = depth(k - 1, p);
                    let d_out = inner.polygon_excess(p).0.max(0.0);
                    let denom = d_in + d_out;
                    if denom > 0.0 {
                        ladder[k - 1] + (hi - ladder[k - 1]) * d_in / denom
                    } else {
                        hi
                    }
                }
                k => {
                    let d_in = depth(k - 1, p);
                    let d_out = -depth(k, p);
                    ladder[k - 1] + (ladder[k] - ladder[k - 1]) * d_in / (d_in + d_out)
                }
            };
            (idx, v)
        })
        .collect();

    let mut out = ua.clone();
    let mut full = out.values().to_vec();
    for (idx, v) in values {
        full[idx] = v;
    }
    out = ScalarField::from_values(grid, full, lo, hi)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::quasiconcavity_check_spatial;
    use crate::geometry::{make_ball, rasterize, ConvexRing};
    use std::sync::Arc;

    #[test]
    fn radial_pair_combines_radii() {
        let ring = ConvexRing::new(
            make_ball([0.0, 0.0], 2.0, 256).unwrap(),
            make_ball([0.0, 0.0], 0.5, 256).unwrap(),
        )
        .unwrap();
        let grid = Arc::new(rasterize(&ring, 128, 0.05).unwrap());
        // level radii: rho_a(c) = 2 - 1.5c, rho_b(c) = 2 - 1.5 c^2
        let ua = ScalarField::from_fn(grid.clone(), |p| (2.0 - p[0].hypot(p[1])) / 1.5, 0.0, 1.0);
        let ub = ScalarField::from_fn(grid.clone(), |p| ((2.0 - p[0].hypot(p[1])) / 1.5).sqrt(), 0.0, 1.0);
        let s = 0.4;
        let w = supremal_convolution(&ua, &ub, s).unwrap();
        for c in [0.2, 0.5, 0.8] {
            let ls = extract_spatial_levelset(&w, c).unwrap();
            let expect = (1.0 - s) * (2.0 - 1.5 * c) + s * (2.0 - 1.5 * c * c);
            for p in ls.points() {
                assert!((p[0].hypot(p[1]) - expect).abs() < grid.spacing(), "c = {c}");
            }
        }
        let levels = crate::convexity::level_ladder(0.0, 1.0, 9);
        assert!(quasiconcavity_check_spatial(&w, &levels, DEFAULT_QC_TOL).unwrap().pass);
        assert_eq!(supremal_convolution(&ua, &ub, 0.0).unwrap().values(), ua.values());
    }
}

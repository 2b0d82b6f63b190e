//! Convexity of spatial and space-time superlevel sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, NodeKind, Point};
use crate::pde::{ScalarField, SpaceTimeSolution};

use super::levelset::{extract_spatial_levelset, LevelSetSample};

/// Default hull tolerance, in grid spacings.
pub const DEFAULT_QC_TOL: f64 = 0.25;

/// `count` uniform levels strictly inside `(lo, hi)`: `lo + j·(hi−lo)/(count+1)`.
pub fn level_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| lo + (hi - lo) * j as f64 / (count + 1) as f64)
        .collect()
}

/// Convex hull (Andrew's monotone chain), counterclockwise, without
/// collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Depth of `p` inside a counterclockwise convex polygon (zero on or outside
/// the boundary).
pub fn hull_depth(hull: &[Point], p: Point) -> f64 {
    let mut depth = f64::INFINITY;
    for k in 0..hull.len() {
        let a = hull[k];
        let b = hull[(k + 1) % hull.len()];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = ex.hypot(ey);
        if len == 0.0 {
            continue;
        }
        // positive to the left, i.e. inside
        let d = (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / len;
        depth = depth.min(d);
    }
    if depth.is_finite() {
        depth.max(0.0)
    } else {
        0.0
    }
}

/// Largest hull depth of level-curve vertices, with the inner body added to
/// the superlevel region. Zero when the curve is not resolved away from the
/// boundary (the superlevel set is then the inner body at grid scale).
pub fn superlevel_violation(sample: &LevelSetSample, inner: &ConvexBody) -> (f64, Point) {
    if sample.is_empty() || sample.boundary_attached() {
        return (0.0, [f64::NAN, f64::NAN]);
    }
    let mut cloud: Vec<Point> = sample.points().copied().collect();
    cloud.extend((0..inner.resolution()).map(|k| inner.boundary_point(inner.angle(k))));
    let hull = convex_hull(&cloud);
    let mut worst = (0.0, [f64::NAN, f64::NAN]);
    for &p in sample.points() {
        let d = hull_depth(&hull, p);
        if d > worst.0 {
            worst = (d, p);
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelCheck {
    pub c: f64,
    pub pass: bool,
    /// Hull depth of the worst vertex, in length units.
    pub violation: f64,
    pub location: Point,
    pub loops: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpatialReport {
    pub pass: bool,
    pub worst_violation: f64,
    /// Absolute tolerance, `tol·spacing`.
    pub tolerance: f64,
    pub per_level: Vec<LevelCheck>,
}

/// Convexity of the superlevel sets `{u ≥ c}` of a slice, for each level.
/// `tol` is in grid spacings.
pub fn quasiconcavity_check_spatial(field: &ScalarField, levels: &[f64], tol: f64) -> Result<SpatialReport> {
    let grid = field.grid();
    let tolerance = tol * grid.spacing();
    let per_level = levels
        .par_iter()
        .map(|&c| {
            let sample = extract_spatial_levelset(field, c)?;
            let (violation, location) = superlevel_violation(&sample, grid.ring().inner());
            Ok(LevelCheck {
                c,
                pass: violation <= tolerance,
                violation,
                location,
                loops: sample.loops.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_violation = per_level.iter().map(|l| l.violation).fold(0.0, f64::max);
    Ok(SpatialReport {
        pass: per_level.iter().all(|l| l.pass),
        worst_violation,
        tolerance,
        per_level,
    })
}

/// Settings of the space-time check.
#[derive(Clone, Debug, Serialize)]
pub struct SpaceTimeCheck {
    /// Hull tolerance for slices, in grid spacings.
    pub spatial_tol: f64,
    /// Midpoint tolerance on hitting times; `None` means one save interval.
    pub time_tol: Option<f64>,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for SpaceTimeCheck {
    fn default() -> Self {
        SpaceTimeCheck {
            spatial_tol: DEFAULT_QC_TOL,
            time_tol: None,
            pairs: 20_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceTimeLevel {
    pub c: f64,
    pub pass: bool,
    /// Largest `τ((x+y)/2) − (τ(x)+τ(y))/2` over tested pairs.
    pub midpoint_violation: f64,
    pub midpoint_location: Point,
    pub pairs_tested: usize,
    pub pairs_skipped: usize,
    /// Worst slice hull depth and the time it occurred.
    pub spatial_violation: f64,
    pub spatial_time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceTimeReport {
    pub pass: bool,
    pub time_tolerance: f64,
    pub space_tolerance: f64,
    pub per_level: Vec<SpaceTimeLevel>,
}

/// Rejects solutions that decrease in time or stall between saved slices.
pub fn check_monotone_in_time(solution: &SpaceTimeSolution) -> Result<()> {
    if solution.len() < 2 {
        return Err(Error::invalid("space-time analysis needs at least two slices"));
    }
    let first = &solution.slices[0];
    let range = (first.outer_value() - first.inner_value()).abs().max(f64::MIN_POSITIVE);
    let nodes = solution.grid().interior_nodes();
    for m in 1..solution.len() {
        let (a, b) = (&solution.slices[m - 1], &solution.slices[m]);
        let mut decrease = 0.0f64;
        let mut change = 0.0f64;
        for &idx in nodes {
            let d = b.at(idx) - a.at(idx);
            decrease = decrease.max(-d);
            change = change.max(d.abs());
        }
        if decrease > 1e-9 * range {
            return Err(Error::MonotonicityViolated(format!(
                "u decreases by {decrease:e} between t = {} and t = {}",
                solution.times[m - 1],
                solution.times[m]
            )));
        }
        if change <= 1e-14 * range {
            return Err(Error::MonotonicityViolated(format!(
                "u_t vanishes between t = {} and t = {}",
                solution.times[m - 1],
                solution.times[m]
            )));
        }
    }
    Ok(())
}

/// Hitting times `τ_c` on the lattice: 0 on the inner body, `∞` outside the
/// ring or where `c` is not reached, linear in `t` between saved slices.
pub fn hitting_times(solution: &SpaceTimeSolution, c: f64) -> Vec<f64> {
    let grid = solution.grid();
    let n = grid.n();
    let mut tau = vec![f64::INFINITY; n * n];
    for idx in 0..n * n {
        match grid.kind(idx) {
            NodeKind::Inner => tau[idx] = 0.0,
            NodeKind::Outer => {}
            NodeKind::Interior => {
                let mut prev = solution.slices[0].at(idx);
                if prev >= c {
                    tau[idx] = solution.times[0];
                    continue;
                }
                for m in 1..solution.len() {
                    let cur = solution.slices[m].at(idx);
                    if cur >= c {
                        let (t0, t1) = (solution.times[m - 1], solution.times[m]);
                        tau[idx] = t0 + (c - prev) / (cur - prev) * (t1 - t0);
                        break;
                    }
                    prev = cur;
                }
            }
        }
    }
    tau
}

/// Convexity of the space-time superlevel sets `{u ≥ c}` through the
/// midpoint convexity of hitting times, plus slice-wise spatial checks.
pub fn quasiconcavity_check_spacetime(
    solution: &SpaceTimeSolution,
    levels: &[f64],
    check: &SpaceTimeCheck,
) -> Result<SpaceTimeReport> {
    check_monotone_in_time(solution)?;
    let grid = solution.grid().clone();
    let save_interval = solution.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let time_tolerance = check.time_tol.unwrap_or(save_interval);
    let space_tolerance = check.spatial_tol * grid.spacing();
    let t_end = *solution.times.last().unwrap();
    let inner = grid.ring().inner().clone();

    let per_level = levels
        .par_iter()
        .enumerate()
        .map(|(li, &c)| -> Result<SpaceTimeLevel> {
            let tau = hitting_times(solution, c);
            // pairs within one parity class have a lattice node as midpoint,
            // so no spatial interpolation of τ enters the test
            let mut classes: [Vec<usize>; 4] = Default::default();
            for &idx in grid.interior_nodes() {
                if tau[idx] <= 0.9 * t_end {
                    let (i, j) = grid.coords(idx);
                    classes[(i % 2) + 2 * (j % 2)].push(idx);
                }
            }
            let total: usize = classes.iter().map(Vec::len).sum();
            let mut rng = ChaCha8Rng::seed_from_u64(check.seed ^ (li as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let (mut tested, mut skipped) = (0, 0);
            let mut worst = (f64::NEG_INFINITY, [f64::NAN, f64::NAN]);
            if total >= 2 {
                for _ in 0..check.pairs {
                    let mut pick = rng.gen_range(0..total);
                    let class = classes
                        .iter()
                        .find(|c| {
                            if pick < c.len() {
                                true
                            } else {
                                pick -= c.len();
                                false
                            }
                        })
                        .unwrap();
                    let a = class[pick];
                    let b = class[rng.gen_range(0..class.len())];
                    let (ia, ja) = grid.coords(a);
                    let (ib, jb) = grid.coords(b);
                    let mid = grid.index((ia + ib) / 2, (ja + jb) / 2);
                    if grid.kind(mid) == NodeKind::Outer {
                        skipped += 1;
                        continue;
                    }
                    tested += 1;
                    let mean = 0.5 * (tau[a] + tau[b]);
                    // a midpoint that never reaches c violates by at least t_end − mean
                    let v = if tau[mid].is_finite() {
                        tau[mid] - mean
                    } else {
                        t_end - mean
                    };
                    if v > worst.0 {
                        let (im, jm) = grid.coords(mid);
                        worst = (v, grid.position(im, jm));
                    }
                }
            }
            let midpoint_violation = worst.0.max(0.0);

            let mut spatial = (0.0f64, 0.0f64);
            for (m, slice) in solution.slices.iter().enumerate() {
                let sample = extract_spatial_levelset(slice, c)?;
                let (v, _) = superlevel_violation(&sample, &inner);
                if v > spatial.0 {
                    spatial = (v, solution.times[m]);
                }
            }
            Ok(SpaceTimeLevel {
                c,
                pass: midpoint_violation <= time_tolerance && spatial.0 <= space_tolerance,
                midpoint_violation,
                midpoint_location: worst.1,
                pairs_tested: tested,
                pairs_skipped: skipped,
                spatial_violation: spatial.0,
                spatial_time: spatial.1,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SpaceTimeReport {
        pass: per_level.iter().all(|l| l.pass),
        time_tolerance,
        space_tolerance,
        per_level,
    })
}

//! Level curves of grid fields by marching squares, with cut-cell aware edge
//! crossings and Newton refinement on a bicubic interpolant.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Boundary, Point, DIRECTIONS};
use crate::pde::ScalarField;

/// A level curve `{u = c}` as closed polylines.
#[derive(Clone, Debug)]
pub struct LevelSetSample {
    pub level: f64,
    /// Closed loops, counterclockwise; the first point is not repeated.
    pub loops: Vec<Vec<Point>>,
    /// Per point: whether it was placed on a grid edge cut by the ring boundary.
    pub on_cut: Vec<Vec<bool>>,
    /// Largest `|u - c|` over refined points, measured on the interpolant.
    pub max_residual: f64,
    /// Loops run counterclockwise, superlevel region on the left.
    pub counterclockwise: bool,
}

impl LevelSetSample {
    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.loops.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.loops.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when every point sits on a boundary-cut edge, i.e. the level curve
    /// is not resolved away from the boundary.
    pub fn boundary_attached(&self) -> bool {
        self.on_cut.iter().flatten().all(|b| *b)
    }

    /// Total length of all loops.
    pub fn perimeter(&self) -> f64 {
        self.loops.iter().map(|l| loop_length(l)).sum()
    }

    /// The longest loop.
    pub fn main_loop(&self) -> Option<&Vec<Point>> {
        self.loops
            .iter()
            .max_by(|a, b| loop_length(a).total_cmp(&loop_length(b)))
    }
}

pub fn loop_length(l: &[Point]) -> f64 {
    (0..l.len())
        .map(|k| {
            let a = l[k];
            let b = l[(k + 1) % l.len()];
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .sum()
}

fn signed_area(l: &[Point]) -> f64 {
    0.5 * (0..l.len())
        .map(|k| {
            let a = l[k];
            let b = l[(k + 1) % l.len()];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// `count` points spaced evenly by arclength along a closed loop, starting at
/// fraction `phase` of one spacing.
pub fn resample_loop(l: &[Point], count: usize, phase: f64) -> Vec<Point> {
    let total = loop_length(l);
    if l.is_empty() || count == 0 || total == 0.0 {
        return Vec::new();
    }
    let step = total / count as f64;
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    let mut seg_start = 0.0;
    let seg_len = |k: usize| {
        let a = l[k];
        let b = l[(k + 1) % l.len()];
        (b[0] - a[0]).hypot(b[1] - a[1])
    };
    for m in 0..count {
        let target = (m as f64 + phase) * step;
        while seg + 1 < l.len() && seg_start + seg_len(seg) < target {
            seg_start += seg_len(seg);
            seg += 1;
        }
        let len = seg_len(seg);
        let f = if len > 0.0 {
            ((target - seg_start) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let a = l[seg];
        let b = l[(seg + 1) % l.len()];
        out.push([a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]);
    }
    out
}

/// Catmull–Rom bicubic interpolation with gradient; `None` unless all sixteen
/// supporting nodes are interior.
pub fn bicubic(field: &ScalarField, p: Point) -> Option<(f64, [f64; 2])> {
    let grid = field.grid();
    let n = grid.n() as isize;
    let (gx, gy) = grid.to_grid(p);
    let i0 = gx.floor() as isize;
    let j0 = gy.floor() as isize;
    if i0 < 1 || j0 < 1 || i0 + 2 >= n || j0 + 2 >= n {
        return None;
    }
    let weights = |t: f64| {
        let t2 = t * t;
        let t3 = t2 * t;
        (
            [
                0.5 * (-t3 + 2.0 * t2 - t),
                0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
                0.5 * (-3.0 * t3 + 4.0 * t2 + t),
                0.5 * (t3 - t2),
            ],
            [
                0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
                0.5 * (9.0 * t2 - 10.0 * t),
                0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
                0.5 * (3.0 * t2 - 2.0 * t),
            ],
        )
    };
    let (wx, dwx) = weights(gx - i0 as f64);
    let (wy, dwy) = weights(gy - j0 as f64);
    let (mut v, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for b in 0..4 {
        for a in 0..4 {
            let idx = ((j0 - 1 + b) * n + (i0 - 1 + a)) as usize;
            if !grid.is_interior(idx) {
                return None;
            }
            let u = field.at(idx);
            v += wx[a as usize] * wy[b as usize] * u;
            dx += dwx[a as usize] * wy[b as usize] * u;
            dy += wx[a as usize] * dwy[b as usize] * u;
        }
    }
    let h = grid.spacing();
    Some((v, [dx / h, dy / h]))
}

/// Extracts the level curve `{u = c}` of a slice.
pub fn extract_spatial_levelset(field: &ScalarField, c: f64) -> Result<LevelSetSample> {
    let lo = field.outer_value().min(field.inner_value());
    let hi = field.outer_value().max(field.inner_value());
    if !(c > lo && c < hi) {
        return Err(Error::LevelOutOfRange(c));
    }
    let grid = field.grid();
    let n = grid.n();
    let h = grid.spacing();
    let range = hi - lo;

    // crossing point on the edge between lattice nodes a and b
    let crossing = |a: usize, b: usize| -> (Point, bool) {
        let (ia, ja) = grid.coords(a);
        let (ib, jb) = grid.coords(b);
        let pa = grid.position(ia, ja);
        let pb = grid.position(ib, jb);
        let (va, vb) = (field.at(a), field.at(b));
        let dir_index = |di: isize, dj: isize| DIRECTIONS.iter().position(|d| *d == (di, dj)).unwrap();
        let along = |from: Point, to: Point, s: f64| [from[0] + s * (to[0] - from[0]), from[1] + s * (to[1] - from[1])];
        match (grid.is_interior(a), grid.is_interior(b)) {
            (true, false) | (false, true) => {
                let (p, q, pi, qi, vp) = if grid.is_interior(a) {
                    (a, b, pa, pb, va)
                } else {
                    (b, a, pb, pa, vb)
                };
                let (ip, jp) = grid.coords(p);
                let (iq, jq) = grid.coords(q);
                let d = dir_index(iq as isize - ip as isize, jq as isize - jp as isize);
                let cut = grid.cuts(p)[d].expect("edge to a non-interior node is cut");
                let g = match cut.boundary {
                    Boundary::Outer => field.outer_value(),
                    Boundary::Inner => field.inner_value(),
                };
                let s = cut.frac * ((c - vp) / (g - vp)).clamp(0.0, 1.0);
                (along(pi, qi, s), true)
            }
            _ => {
                let s = ((c - va) / (vb - va)).clamp(0.0, 1.0);
                (along(pa, pb, s), false)
            }
        }
    };

    let mut points: Vec<(Point, bool)> = Vec::new();
    let mut key_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut point_for = |a: usize, b: usize, points: &mut Vec<(Point, bool)>| -> usize {
        let key = (a.min(b), a.max(b));
        *key_of.entry(key).or_insert_with(|| {
            points.push(crossing(key.0, key.1));
            points.len() - 1
        })
    };

    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let corners = [j * n + i, j * n + i + 1, (j + 1) * n + i + 1, (j + 1) * n + i];
            let above: Vec<bool> = corners.iter().map(|&k| field.at(k) >= c).collect();
            let mask = above.iter().enumerate().fold(0u8, |m, (k, a)| m | ((*a as u8) << k));
            if mask == 0 || mask == 15 {
                continue;
            }
            // edge e joins corner e and corner e+1
            let crossing_edges: Vec<usize> = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]).collect();
            let mut emit = |e1: usize, e2: usize, points: &mut Vec<(Point, bool)>| {
                let p = point_for(corners[e1], corners[(e1 + 1) % 4], points);
                let q = point_for(corners[e2], corners[(e2 + 1) % 4], points);
                segments.push((p, q));
            };
            if crossing_edges.len() == 2 {
                emit(crossing_edges[0], crossing_edges[1], &mut points);
            } else {
                // saddle: decide by the cell average
                let centre = corners.iter().map(|&k| field.at(k)).sum::<f64>() / 4.0;
                let isolate_above = centre < c;
                for k in 0..4 {
                    if above[k] == isolate_above {
                        // corner k touches edges k-1 and k
                        emit((k + 3) % 4, k, &mut points);
                    }
                }
            }
        }
    }

    // link segments into loops
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    for (s, &(p, q)) in segments.iter().enumerate() {
        incident[p].push(s);
        incident[q].push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut loops = Vec::new();
    let mut flags = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut cur) = segments[start];
        let mut chain = vec![first];
        loop {
            if cur == first {
                break;
            }
            chain.push(cur);
            let next = incident[cur].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            let (p, q) = segments[s];
            cur = if p == cur { q } else { p };
        }
        let mut pts: Vec<Point> = chain.iter().map(|&k| points[k].0).collect();
        let mut cut: Vec<bool> = chain.iter().map(|&k| points[k].1).collect();
        if signed_area(&pts) < 0.0 {
            pts.reverse();
            cut.reverse();
        }
        loops.push(pts);
        flags.push(cut);
    }

    // Newton refinement along the gradient of the bicubic interpolant
    let tol = 1e-8 * range;
    let mut max_residual = 0.0f64;
    for (pts, cut) in loops.iter_mut().zip(&flags) {
        for (p, on_cut) in pts.iter_mut().zip(cut) {
            if *on_cut {
                continue;
            }
            let start = *p;
            let mut x = *p;
            let mut ok = false;
            let mut last = f64::INFINITY;
            for _ in 0..12 {
                let Some((v, g)) = bicubic(field, x) else { break };
                let r = v - c;
                last = r.abs();
                if last <= tol {
                    ok = true;
                    break;
                }
                let g2 = g[0] * g[0] + g[1] * g[1];
                if g2 == 0.0 {
                    break;
                }
                x = [x[0] - r * g[0] / g2, x[1] - r * g[1] / g2];
                if (x[0] - start[0]).hypot(x[1] - start[1]) > h {
                    break;
                }
            }
            if ok {
                *p = x;
                max_residual = max_residual.max(last);
            }
        }
    }

    Ok(LevelSetSample {
        level: c,
        loops,
        on_cut: flags,
        max_residual,
        counterclockwise: true,
    })
}

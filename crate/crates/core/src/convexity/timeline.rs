//! Rank timelines, minimal principal curvatures and positivity of `u_t`, `|∇u|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{field_jet, spacetime_shape_operator, ShapeReport};
use crate::error::{Error, Result};
use crate::geometry::RingGrid;
use crate::pde::{Operator, SpaceTimeSolution};
use crate::symmetric::{rank_from_eigenvalues, sigma_unchecked};

use super::levelset::{extract_spatial_levelset, resample_loop};

/// Minimal rank and curvature data over the probes of one saved slice.
#[derive(Clone, Debug, Serialize)]
pub struct RankEntry {
    pub t: f64,
    /// `None` when no probe gave a usable jet.
    pub min_rank: Option<usize>,
    /// Rank at ten times the threshold.
    pub min_rank_relaxed: Option<usize>,
    /// Minimum of `σ_{l+1}(â)` with `l = min_rank` (zero at full rank).
    pub min_phi: Option<f64>,
    /// Minimum of `σ_2(â)`.
    pub min_gauss: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub argmin: Option<[f64; 2]>,
    pub probes_used: usize,
    pub probes_skipped: usize,
    pub not_psd: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankTimeline {
    pub level: f64,
    pub rank_tol: f64,
    pub entries: Vec<RankEntry>,
    /// Minimal rank nondecreasing in `t` over non-gap entries.
    pub monotone: bool,
    pub monotone_relaxed: bool,
}

impl RankTimeline {
    /// Smallest eigenvalue of `â` over all probes, with its `(x, y, t)`.
    pub fn min_principal_curvature(&self) -> Option<CurvatureMinimum> {
        let mut best: Option<CurvatureMinimum> = None;
        for e in &self.entries {
            if let (Some(k), Some(g), Some(p)) = (e.min_eigenvalue, e.min_gauss, e.argmin) {
                match &mut best {
                    None => {
                        best = Some(CurvatureMinimum {
                            min_eigenvalue: k,
                            min_gauss: g,
                            location: [p[0], p[1], e.t],
                        })
                    }
                    Some(b) => {
                        if k < b.min_eigenvalue {
                            b.min_eigenvalue = k;
                            b.location = [p[0], p[1], e.t];
                        }
                        b.min_gauss = b.min_gauss.min(g);
                    }
                }
            }
        }
        best
    }

    /// Minimal ranks over non-gap entries.
    pub fn ranks(&self) -> Vec<usize> {
        self.entries.iter().filter_map(|e| e.min_rank).collect()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CurvatureMinimum {
    pub min_eigenvalue: f64,
    pub min_gauss: f64,
    /// `(x, y, t)` of the smallest eigenvalue.
    pub location: [f64; 3],
}

fn nondecreasing(values: impl Iterator<Item = usize>) -> bool {
    let v: Vec<usize> = values.collect();
    v.windows(2).all(|w| w[0] <= w[1])
}

/// Samples `probes` points on the level curve of each saved slice (after the
/// first), computes `â` there and records the minimal rank.
pub fn rank_timeline(
    solution: &SpaceTimeSolution,
    c: f64,
    probes: usize,
    rank_tol: f64,
    seed: u64,
) -> Result<RankTimeline> {
    if solution.is_empty() {
        return Err(Error::invalid("empty solution"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for (m, slice) in solution.slices.iter().enumerate().skip(1) {
        let t = solution.times[m];
        let phase: f64 = rng.gen();
        let sample = extract_spatial_levelset(slice, c)?;
        let points = sample
            .main_loop()
            .map(|l| resample_loop(l, probes, phase))
            .unwrap_or_default();
        let mut entry = RankEntry {
            t,
            min_rank: None,
            min_rank_relaxed: None,
            min_phi: None,
            min_gauss: None,
            min_eigenvalue: None,
            argmin: None,
            probes_used: 0,
            probes_skipped: 0,
            not_psd: 0,
        };
        let mut reports = Vec::new();
        for p in points {
            let report = field_jet(slice, p, 2).and_then(|jet| spacetime_shape_operator(&jet));
            match report {
                Ok(r) => reports.push((p, r)),
                Err(_) => entry.probes_skipped += 1,
            }
        }
        for (p, r) in &reports {
            entry.probes_used += 1;
            let k = r.min_eigenvalue();
            if entry.min_eigenvalue.is_none_or(|m| k < m) {
                entry.min_eigenvalue = Some(k);
                entry.argmin = Some(*p);
            }
            entry.min_gauss = Some(entry.min_gauss.map_or(r.gauss, |g| g.min(r.gauss)));
            match (
                rank_from_eigenvalues(&r.eigenvalues, rank_tol),
                rank_from_eigenvalues(&r.eigenvalues, 10.0 * rank_tol),
            ) {
                (Ok(a), Ok(b)) => {
                    entry.min_rank = Some(entry.min_rank.map_or(a, |x| x.min(a)));
                    entry.min_rank_relaxed = Some(entry.min_rank_relaxed.map_or(b, |x| x.min(b)));
                }
                _ => entry.not_psd += 1,
            }
        }
        if let Some(l) = entry.min_rank {
            let phi = reports
                .iter()
                .map(|(_, r)| sigma_unchecked(&r.eigenvalues, l as i64 + 1))
                .fold(f64::INFINITY, f64::min);
            entry.min_phi = Some(phi);
        }
        entries.push(entry);
    }
    let monotone = nondecreasing(entries.iter().filter_map(|e| e.min_rank));
    let monotone_relaxed = nondecreasing(entries.iter().filter_map(|e| e.min_rank_relaxed));
    Ok(RankTimeline {
        level: c,
        rank_tol,
        entries,
        monotone,
        monotone_relaxed,
    })
}

/// One probe of a space-time level surface.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeSample {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub level: f64,
    pub report: ShapeReport,
}

/// The probes of [`rank_timeline`] (same seed, same points) with their
/// shape operators; probes without a usable jet are dropped.
pub fn shape_samples(solution: &SpaceTimeSolution, c: f64, probes: usize, seed: u64) -> Result<Vec<ShapeSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (m, slice) in solution.slices.iter().enumerate().skip(1) {
        let phase: f64 = rng.gen();
        let sample = extract_spatial_levelset(slice, c)?;
        let Some(main) = sample.main_loop() else { continue };
        for p in resample_loop(main, probes, phase) {
            if let Ok(report) = field_jet(slice, p, 2).and_then(|jet| spacetime_shape_operator(&jet)) {
                out.push(ShapeSample {
                    x: p[0],
                    y: p[1],
                    t: solution.times[m],
                    level: c,
                    report,
                });
            }
        }
    }
    Ok(out)
}

/// Smallest principal curvature of the space-time level surface `{u = c}`
/// over probes on every saved slice.
pub fn min_principal_curvature(
    solution: &SpaceTimeSolution,
    c: f64,
    probes: usize,
    seed: u64,
) -> Result<CurvatureMinimum> {
    rank_timeline(solution, c, probes, 1e-6, seed)?
        .min_principal_curvature()
        .ok_or(Error::DegenerateGradient(0.0))
}

/// Interior nodes on a sublattice of the given stride whose
/// `clearance`-neighbourhood lies entirely in the ring.
pub fn probe_lattice(grid: &RingGrid, stride: usize, clearance: usize) -> Vec<usize> {
    let n = grid.n();
    let c = clearance as isize;
    grid.interior_nodes()
        .iter()
        .copied()
        .filter(|&idx| {
            let (i, j) = grid.coords(idx);
            if i % stride != 0 || j % stride != 0 {
                return false;
            }
            (-c..=c).all(|a| {
                (-c..=c).all(|b| {
                    let (p, q) = (i as isize + a, j as isize + b);
                    p >= 0
                        && q >= 0
                        && (p as usize) < n
                        && (q as usize) < n
                        && grid.is_interior(q as usize * n + p as usize)
                })
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityEntry {
    pub t: f64,
    pub min_ut: f64,
    pub min_grad: f64,
    pub argmin_ut: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub probes: usize,
    pub entries: Vec<PositivityEntry>,
}

impl PositivityReport {
    /// Minima over entries with `t ≥ t_from`.
    pub fn minima_from(&self, t_from: f64) -> (f64, f64) {
        self.entries
            .iter()
            .filter(|e| e.t >= t_from)
            .fold((f64::INFINITY, f64::INFINITY), |(a, b), e| {
                (a.min(e.min_ut), b.min(e.min_grad))
            })
    }
}

/// Minima of the discrete `u_t = Δ_h u` and of `|∇u|` (central differences)
/// over a fixed probe lattice, per saved slice.
pub fn positivity_diagnostics(solution: &SpaceTimeSolution, stride: usize) -> Result<PositivityReport> {
    if solution.is_empty() {
        return Err(Error::invalid("empty solution"));
    }
    let grid = solution.grid().clone();
    let probes = probe_lattice(&grid, stride.max(1), 2);
    let op = Operator::new(grid.clone());
    let h = grid.spacing();
    let mut entries = Vec::with_capacity(solution.len());
    for (m, slice) in solution.slices.iter().enumerate() {
        let lap = op.laplacian_lattice(slice);
        let mut e = PositivityEntry {
            t: solution.times[m],
            min_ut: f64::INFINITY,
            min_grad: f64::INFINITY,
            argmin_ut: [f64::NAN, f64::NAN],
        };
        for &idx in &probes {
            if lap[idx] < e.min_ut {
                e.min_ut = lap[idx];
                let (i, j) = grid.coords(idx);
                e.argmin_ut = grid.position(i, j);
            }
            // directions: +x, -x, +y, -y
            let nb = |d: usize| slice.at(grid.neighbour(idx, d).expect("probe clearance"));
            let gx = (nb(0) - nb(1)) / (2.0 * h);
            let gy = (nb(2) - nb(3)) / (2.0 * h);
            e.min_grad = e.min_grad.min(gx.hypot(gy));
        }
        entries.push(e);
    }
    Ok(PositivityReport {
        probes: probes.len(),
        entries,
    })
}

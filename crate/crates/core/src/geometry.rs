//! Planar convex bodies stored as support functions, convex rings and their
//! rasterization onto a uniform Cartesian grid.
//!
//! A body is the pair `(center, h)` where `h[k]` samples the support function
//! of the body seen from `center` on the angle grid `θ_k = 2πk/M`. The support
//! function in world coordinates is `H(θ) = center·e(θ) + h(θ)`. Off-grid values
//! and derivatives of `h` come from its trigonometric interpolant, which is exact
//! for bodies described by finitely many Fourier modes.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Smallest admissible angle resolution.
pub const MIN_ANGLES: usize = 64;
/// Smallest admissible grid size.
pub const MIN_GRID: usize = 64;
/// Number of grid cells that must fit across the thinnest part of a ring.
pub const MIN_CELLS_ACROSS_GAP: f64 = 4.0;

#[inline]
fn unit(theta: f64) -> Point {
    [theta.cos(), theta.sin()]
}

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Trigonometric interpolant of a periodic sample vector.
#[derive(Clone, Debug)]
struct FourierSeries {
    a: Vec<f64>,
    b: Vec<f64>,
    /// Coefficient of `cos(Mθ/2)` for even `M`.
    nyquist: f64,
    half: usize,
}

impl FourierSeries {
    fn new(samples: &[f64]) -> Self {
        let m = samples.len();
        let half = (m - 1) / 2;
        let mut a = vec![0.0; half + 1];
        let mut b = vec![0.0; half + 1];
        let step = 2.0 * PI / m as f64;
        let table: Vec<(f64, f64)> = (0..m).map(|r| (step * r as f64).sin_cos()).collect();
        for (k, &h) in samples.iter().enumerate() {
            for j in 0..=half {
                let (s, c) = table[(j * k) % m];
                a[j] += h * c;
                b[j] += h * s;
            }
        }
        a[0] /= m as f64;
        b[0] = 0.0;
        for j in 1..=half {
            a[j] *= 2.0 / m as f64;
            b[j] *= 2.0 / m as f64;
        }
        let nyquist = if m.is_multiple_of(2) {
            samples
                .iter()
                .enumerate()
                .map(|(k, h)| if k % 2 == 0 { *h } else { -*h })
                .sum::<f64>()
                / m as f64
        } else {
            0.0
        };
        // drop modes that carry nothing
        let scale = samples.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
        let mut last = half;
        while last > 0 && a[last].abs() + b[last].abs() < 1e-14 * scale {
            last -= 1;
        }
        a.truncate(last + 1);
        b.truncate(last + 1);
        let nyquist = if nyquist.abs() < 1e-14 * scale { 0.0 } else { nyquist };
        FourierSeries {
            a,
            b,
            nyquist,
            half: m / 2,
        }
    }

    /// Value, first and second derivative at `theta`.
    fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let (s1, c1) = theta.sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut v = self.a[0];
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for j in 1..self.a.len() {
            let jf = j as f64;
            let (aj, bj) = (self.a[j], self.b[j]);
            v += aj * c + bj * s;
            d1 += jf * (bj * c - aj * s);
            d2 -= jf * jf * (aj * c + bj * s);
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        if self.nyquist != 0.0 {
            let w = self.half as f64;
            let (sn, cn) = (w * theta).sin_cos();
            v += self.nyquist * cn;
            d1 -= self.nyquist * w * sn;
            d2 -= self.nyquist * w * w * cn;
        }
        (v, d1, d2)
    }
}

/// A planar convex body described by support-function samples.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    center: Point,
    support: Vec<f64>,
    series: FourierSeries,
}

impl ConvexBody {
    /// Builds a body from support samples around `center`, checking positivity
    /// and discrete convexity.
    pub fn new(center: Point, support: Vec<f64>) -> Result<Self> {
        let m = support.len();
        if m < MIN_ANGLES {
            return Err(Error::invalid(format!(
                "angle resolution {m} below minimum {MIN_ANGLES}"
            )));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("non-finite center"));
        }
        if let Some((k, h)) = support.iter().enumerate().find(|(_, h)| !(**h > 0.0) || !h.is_finite()) {
            return Err(Error::invalid(format!(
                "support value h[{k}] = {h} must be positive and finite"
            )));
        }
        let body = ConvexBody {
            center,
            series: FourierSeries::new(&support),
            support,
        };
        let scale = body.support.iter().cloned().fold(0.0, f64::max);
        let cos_step = (2.0 * PI / m as f64).cos();
        for k in 0..m {
            let (prev, cur, next) = body.neighbours(k);
            let d = prev - 2.0 * cur * cos_step + next;
            if d < -1e-12 * scale {
                return Err(Error::invalid(format!(
                    "support samples violate discrete convexity at k = {k} ({d:e})"
                )));
            }
        }
        Ok(body)
    }

    /// Samples `h` from a closure of the angle.
    pub fn from_fn(center: Point, m: usize, h: impl Fn(f64) -> f64) -> Result<Self> {
        let support = (0..m).map(|k| h(2.0 * PI * k as f64 / m as f64)).collect();
        Self::new(center, support)
    }

    /// Reads `θ,h` rows. The angles must form the uniform grid `2πk/M`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (Some(t), Some(h), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::invalid(format!("line {}: expected `theta,h`", lineno + 1)));
            };
            match (t.parse::<f64>(), h.parse::<f64>()) {
                (Ok(t), Ok(h)) => rows.push((t, h)),
                // tolerate a header row
                _ if rows.is_empty() => continue,
                _ => return Err(Error::invalid(format!("line {}: cannot parse `{line}`", lineno + 1))),
            }
        }
        let m = rows.len();
        for (k, (t, _)) in rows.iter().enumerate() {
            let expect = 2.0 * PI * k as f64 / m as f64;
            if (t - expect).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "support CSV row {k}: angle {t} is not on the uniform grid (expected {expect})"
                )));
            }
        }
        Self::new([0.0, 0.0], rows.into_iter().map(|(_, h)| h).collect())
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Support samples relative to the center.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn resolution(&self) -> usize {
        self.support.len()
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.support.len() as f64
    }

    fn neighbours(&self, k: usize) -> (f64, f64, f64) {
        let m = self.support.len();
        (
            self.support[(k + m - 1) % m],
            self.support[k],
            self.support[(k + 1) % m],
        )
    }

    /// Body-frame support value and its first two derivatives at any angle.
    pub fn support_jet(&self, theta: f64) -> (f64, f64, f64) {
        self.series.eval(theta)
    }

    /// World-frame support function `H(θ)`.
    pub fn world_support(&self, theta: f64) -> f64 {
        dot(self.center, unit(theta)) + self.series.eval(theta).0
    }

    /// Boundary point with outward normal `e(θ)`.
    pub fn boundary_point(&self, theta: f64) -> Point {
        let (h, dh, _) = self.series.eval(theta);
        let (s, c) = theta.sin_cos();
        [self.center[0] + h * c - dh * s, self.center[1] + h * s + dh * c]
    }

    /// Discrete radius of curvature at sample `k`.
    ///
    /// Uses the translation-exact second difference
    /// `(h[k-1] - 2 h[k] cos Δ + h[k+1]) / (2 (1 - cos Δ))`, whose sign is the
    /// discrete convexity condition.
    pub fn radius_of_curvature(&self, k: usize) -> f64 {
        let step = 2.0 * PI / self.support.len() as f64;
        let (prev, cur, next) = self.neighbours(k);
        (prev - 2.0 * cur * step.cos() + next) / (2.0 * (1.0 - step.cos()))
    }

    /// Minimum boundary curvature `min_k 1/ρ_k`.
    pub fn gauss_curvature_min(&self) -> Result<f64> {
        let scale = self.support.iter().cloned().fold(0.0, f64::max);
        let (rho_min, rho_max) = (0..self.support.len())
            .map(|k| self.radius_of_curvature(k))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        if rho_min <= 1e-3 * scale {
            return Err(Error::DegenerateBody(format!(
                "radius of curvature {rho_min:e} vanishes at grid scale"
            )));
        }
        Ok(1.0 / rho_max)
    }

    /// `max_k ((p - c)·e_k - h_k)`: nonpositive exactly on the circumscribed
    /// polygon of the sampled support lines.
    pub fn polygon_excess(&self, p: Point) -> (f64, usize) {
        let q = [p[0] - self.center[0], p[1] - self.center[1]];
        let m = self.support.len();
        let step = 2.0 * PI / m as f64;
        let (s1, c1) = step.sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        let mut best = (f64::NEG_INFINITY, 0);
        for k in 0..m {
            let v = q[0] * c + q[1] * s - self.support[k];
            if v > best.0 {
                best = (v, k);
            }
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        best
    }

    /// Membership test against the sampled support lines.
    pub fn contains(&self, p: Point) -> bool {
        self.polygon_excess(p).0 <= 0.0
    }

    /// Signed distance to the boundary (negative inside), with the maximizing
    /// normal angle: `F(p) = max_θ ((p - c)·e(θ) - h(θ))`.
    pub fn signed_distance(&self, p: Point) -> (f64, f64) {
        let (fd, k) = self.polygon_excess(p);
        let q = [p[0] - self.center[0], p[1] - self.center[1]];
        let step = 2.0 * PI / self.support.len() as f64;
        let theta0 = step * k as f64;
        let mut theta = theta0;
        for _ in 0..40 {
            let (_, dh, d2h) = self.series.eval(theta);
            let (s, c) = theta.sin_cos();
            let g = -q[0] * s + q[1] * c - dh;
            let dg = -(q[0] * c + q[1] * s) - d2h;
            if dg >= 0.0 {
                break;
            }
            let mut delta = -g / dg;
            if delta.abs() > step {
                delta = step * delta.signum();
            }
            theta += delta;
            if (theta - theta0).abs() > 2.0 * step {
                theta = theta0;
                break;
            }
            if delta.abs() < 1e-15 {
                break;
            }
        }
        let (h, _, _) = self.series.eval(theta);
        let (s, c) = theta.sin_cos();
        let f = q[0] * c + q[1] * s - h;
        if f >= fd {
            (f, theta)
        } else {
            (fd, theta0)
        }
    }
}

/// Support-weighted Minkowski combination `(1 - t) A + t B`.
pub fn minkowski_combine(a: &ConvexBody, b: &ConvexBody, t: f64) -> Result<ConvexBody> {
    if a.resolution() != b.resolution() {
        return Err(Error::invalid(format!(
            "angle resolutions differ ({} vs {})",
            a.resolution(),
            b.resolution()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("weight {t} outside [0, 1]")));
    }
    let s = 1.0 - t;
    let center = [s * a.center[0] + t * b.center[0], s * a.center[1] + t * b.center[1]];
    let support = a
        .support
        .iter()
        .zip(&b.support)
        .map(|(ha, hb)| s * ha + t * hb)
        .collect();
    ConvexBody::new(center, support)
}

/// Ball of the given radius with `m` support samples.
pub fn make_ball(center: Point, radius: f64, m: usize) -> Result<ConvexBody> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!("ball radius {radius} must be positive")));
    }
    if m < MIN_ANGLES {
        return Err(Error::invalid(format!(
            "angle resolution {m} below minimum {MIN_ANGLES}"
        )));
    }
    ConvexBody::new(center, vec![radius; m])
}

/// The ring `outer \ closure(inner)`.
#[derive(Clone, Debug)]
pub struct ConvexRing {
    outer: ConvexBody,
    inner: ConvexBody,
    gap: f64,
}

impl ConvexRing {
    pub fn new(outer: ConvexBody, inner: ConvexBody) -> Result<Self> {
        let m = outer.resolution().max(inner.resolution()).max(512);
        let gap = (0..m)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / m as f64;
                outer.world_support(theta) - inner.world_support(theta)
            })
            .fold(f64::INFINITY, f64::min);
        if !(gap > 0.0) {
            return Err(Error::invalid(format!(
                "inner body is not strictly contained in the outer body (margin {gap:e})"
            )));
        }
        Ok(ConvexRing { outer, inner, gap })
    }

    pub fn outer(&self) -> &ConvexBody {
        &self.outer
    }

    pub fn inner(&self) -> &ConvexBody {
        &self.inner
    }

    /// Minimal distance between the two boundaries, `min_θ (H_out - H_in)`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Width of the outer body's bounding box along its longer side.
    pub fn diameter(&self) -> f64 {
        let w = self.outer.world_support(0.0) + self.outer.world_support(PI);
        let h = self.outer.world_support(0.5 * PI) + self.outer.world_support(1.5 * PI);
        w.max(h)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.outer.signed_distance(p).0 < 0.0 && self.inner.signed_distance(p).0 > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// Inside the closed inner body.
    Inner,
    /// Outside the open outer body.
    Outer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Boundary {
    Outer,
    Inner,
}

/// A grid edge from an interior node that crosses the ring boundary at
/// `frac` spacings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cut {
    pub frac: f64,
    pub boundary: Boundary,
}

/// Neighbour offsets in the order +x, -x, +y, -y.
pub const DIRECTIONS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Rasterized ring: node classification, cut-cell data and spacing.
#[derive(Clone, Debug)]
pub struct RingGrid {
    ring: ConvexRing,
    n: usize,
    spacing: f64,
    origin: Point,
    kind: Vec<NodeKind>,
    cuts: Vec<[Option<Cut>; 4]>,
    /// Signed distances `(to ∂Ω₀, to ∂Ω₁)` for boundary-adjacent interior nodes.
    boundary_distance: Vec<Option<(f64, f64)>>,
    unknown: Vec<Option<usize>>,
    interior: Vec<usize>,
}

impl RingGrid {
    pub fn ring(&self) -> &ConvexRing {
        &self.ring
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn origin(&self) -> Point {
        self.origin
    }
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
        ]
    }
    #[inline]
    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kind[idx]
    }
    #[inline]
    pub fn is_interior(&self, idx: usize) -> bool {
        self.kind[idx] == NodeKind::Interior
    }
    pub fn cuts(&self, idx: usize) -> &[Option<Cut>; 4] {
        &self.cuts[idx]
    }
    pub fn boundary_distance(&self, idx: usize) -> Option<(f64, f64)> {
        self.boundary_distance[idx]
    }
    /// Position of a node among the unknowns, if interior.
    pub fn unknown(&self, idx: usize) -> Option<usize> {
        self.unknown[idx]
    }
    /// Grid indices of the interior nodes, in unknown order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }
    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }
    pub fn mask(&self) -> Vec<bool> {
        self.kind.iter().map(|k| *k == NodeKind::Interior).collect()
    }

    /// FNV-1a hash of the interior mask; stored in field file headers.
    pub fn mask_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for k in &self.kind {
            let byte = match k {
                NodeKind::Interior => 1u8,
                NodeKind::Inner => 2,
                NodeKind::Outer => 0,
            };
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
        hash ^= self.n as u64;
        hash.wrapping_mul(0x0100_0000_01b3)
    }

    /// Neighbour of a node in direction `d`, if inside the grid.
    #[inline]
    pub fn neighbour(&self, idx: usize, d: usize) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let (di, dj) = DIRECTIONS[d];
        let ni = i as isize + di;
        let nj = j as isize + dj;
        if ni < 0 || nj < 0 || ni >= self.n as isize || nj >= self.n as isize {
            None
        } else {
            Some(self.index(ni as usize, nj as usize))
        }
    }

    /// Grid coordinates (fractional) of a world point.
    pub fn to_grid(&self, p: Point) -> (f64, f64) {
        (
            (p[0] - self.origin[0]) / self.spacing,
            (p[1] - self.origin[1]) / self.spacing,
        )
    }
}

/// Rasterizes a ring onto an `n × n` grid covering the outer body plus
/// `padding` on every side.
pub fn rasterize(ring: &ConvexRing, n: usize, padding: f64) -> Result<RingGrid> {
    if n < MIN_GRID {
        return Err(Error::ResolutionTooCoarse(format!(
            "grid size {n} below minimum {MIN_GRID}"
        )));
    }
    if !(padding >= 0.0) {
        return Err(Error::invalid(format!("padding {padding} must be nonnegative")));
    }
    let outer = &ring.outer;
    let xmax = outer.world_support(0.0);
    let xmin = -outer.world_support(PI);
    let ymax = outer.world_support(0.5 * PI);
    let ymin = -outer.world_support(1.5 * PI);
    let side = (xmax - xmin).max(ymax - ymin) + 2.0 * padding;
    let spacing = side / (n - 1) as f64;
    if ring.gap < MIN_CELLS_ACROSS_GAP * spacing {
        return Err(Error::ResolutionTooCoarse(format!(
            "ring gap {:.4} is narrower than {MIN_CELLS_ACROSS_GAP} cells of size {spacing:.4}",
            ring.gap
        )));
    }
    let origin = [0.5 * (xmin + xmax) - 0.5 * side, 0.5 * (ymin + ymax) - 0.5 * side];

    let total = n * n;
    let mut kind = vec![NodeKind::Outer; total];
    let mut d_outer = vec![0.0; total];
    let mut d_inner = vec![0.0; total];
    for j in 0..n {
        for i in 0..n {
            let p = [origin[0] + i as f64 * spacing, origin[1] + j as f64 * spacing];
            let idx = j * n + i;
            let fo = ring.outer.signed_distance(p).0;
            d_outer[idx] = fo;
            if fo >= 0.0 {
                continue;
            }
            let fi = ring.inner.signed_distance(p).0;
            d_inner[idx] = fi;
            kind[idx] = if fi > 0.0 { NodeKind::Interior } else { NodeKind::Inner };
        }
    }

    let mut cuts = vec![[None; 4]; total];
    let mut boundary_distance = vec![None; total];
    let mut unknown = vec![None; total];
    let mut interior = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            if kind[idx] != NodeKind::Interior {
                continue;
            }
            unknown[idx] = Some(interior.len());
            interior.push(idx);
            let p = [origin[0] + i as f64 * spacing, origin[1] + j as f64 * spacing];
            let mut adjacent = false;
            for (d, (di, dj)) in DIRECTIONS.iter().enumerate() {
                let ni = i as isize + di;
                let nj = j as isize + dj;
                let nk = if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                    NodeKind::Outer
                } else {
                    kind[nj as usize * n + ni as usize]
                };
                if nk == NodeKind::Interior {
                    continue;
                }
                adjacent = true;
                let dir = [*di as f64 * spacing, *dj as f64 * spacing];
                let (body, boundary) = match nk {
                    NodeKind::Outer => (&ring.outer, Boundary::Outer),
                    _ => (&ring.inner, Boundary::Inner),
                };
                let frac = edge_crossing(body, p, dir, spacing);
                cuts[idx][d] = Some(Cut {
                    frac: frac.clamp(CUT_FRACTION_FLOOR, 1.0),
                    boundary,
                });
            }
            if adjacent {
                boundary_distance[idx] = Some((d_outer[idx], d_inner[idx]));
            }
        }
    }

    Ok(RingGrid {
        ring: ring.clone(),
        n,
        spacing,
        origin,
        kind,
        cuts,
        boundary_distance,
        unknown,
        interior,
    })
}

/// Cut fractions are clamped from below so the cut-cell coefficients stay bounded.
pub const CUT_FRACTION_FLOOR: f64 = 1e-3;

/// Fraction `s ∈ (0, 1]` along `p + s·dir` where the boundary of `body` is
/// crossed, by safeguarded Newton iteration on the signed distance.
fn edge_crossing(body: &ConvexBody, p: Point, dir: Point, spacing: f64) -> f64 {
    let at = |s: f64| {
        let x = [p[0] + s * dir[0], p[1] + s * dir[1]];
        let (f, theta) = body.signed_distance(x);
        let df = dir[0] * theta.cos() + dir[1] * theta.sin();
        (f, df)
    };
    let (f0, _) = at(0.0);
    let (f1, _) = at(1.0);
    if f0.signum() == f1.signum() {
        // the smooth boundary and the sampled support lines disagree by O(Δθ²)
        return if f0.abs() < f1.abs() { 0.0 } else { 1.0 };
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let lo_sign = f0.signum();
    let mut s = f0 / (f0 - f1);
    for _ in 0..100 {
        let (f, df) = at(s);
        if f.abs() < 1e-10 * spacing {
            return s;
        }
        if f.signum() == lo_sign {
            lo = s;
        } else {
            hi = s;
        }
        let newton = if df != 0.0 { s - f / df } else { f64::NAN };
        s = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-14 {
            break;
        }
    }
    s
}

/// Parses a body description: `ball cx cy r`, `support <path>` (CSV of
/// support samples) or `fourier cx cy a0 k1 a1 …` for
/// `h(θ) = a0 + Σ a_i cos(k_i θ)`.
pub fn parse_body(spec: &str, m: usize, base_dir: Option<&Path>) -> Result<ConvexBody> {
    let words: Vec<&str> = spec.split_whitespace().collect();
    match words.as_slice() {
        ["ball", cx, cy, r] => {
            let parse = |w: &str| {
                w.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("cannot parse number `{w}`")))
            };
            make_ball([parse(cx)?, parse(cy)?], parse(r)?, m)
        }
        ["fourier", cx, cy, rest @ ..] if rest.len() % 2 == 1 => {
            let nums = std::iter::once(*cx)
                .chain(std::iter::once(*cy))
                .chain(rest.iter().copied())
                .map(|w| {
                    w.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("cannot parse number `{w}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let (a0, modes) = (nums[2], &nums[3..]);
            ConvexBody::from_fn([nums[0], nums[1]], m, |theta| {
                a0 + modes.chunks(2).map(|km| km[1] * (km[0] * theta).cos()).sum::<f64>()
            })
        }
        ["support", path] => {
            let p = Path::new(path);
            let full = match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.to_path_buf(),
            };
            ConvexBody::from_csv(&full)
        }
        _ => Err(Error::invalid(format!(
            "body must be `ball cx cy r`, `fourier cx cy a0 [k a]...` or `support <path>`, got `{spec}`"
        ))),
    }
}

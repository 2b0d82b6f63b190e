//! One-dimensional radial references for ball rings `B_R \ B_r` with
//! `u = 1` at `ρ = r` and `u = 0` at `ρ = R`.

use crate::error::{Error, Result};

/// Closed-form radial harmonic function.
pub fn radial_harmonic(outer: f64, inner: f64, rho: f64) -> f64 {
    (outer.ln() - rho.ln()) / (outer.ln() - inner.ln())
}

/// Closed-form radial solution of `Δu = c`: `cρ²/4 + A ln ρ + B`.
pub fn radial_poisson(outer: f64, inner: f64, c: f64, rho: f64) -> f64 {
    let a = (1.0 - c * (inner * inner - outer * outer) / 4.0) / (inner.ln() - outer.ln());
    let b = -c * outer * outer / 4.0 - a * outer.ln();
    c * rho * rho / 4.0 + a * rho.ln() + b
}

/// Saved profiles of the radial heat equation.
#[derive(Clone, Debug)]
pub struct RadialSolution {
    pub rho: Vec<f64>,
    pub times: Vec<f64>,
    pub profiles: Vec<Vec<f64>>,
}

impl RadialSolution {
    /// Linear interpolation of saved profile `slice` at radius `rho`.
    pub fn value(&self, slice: usize, rho: f64) -> f64 {
        let r0 = self.rho[0];
        let step = self.rho[1] - r0;
        let last = self.rho.len() - 1;
        let x = ((rho - r0) / step).clamp(0.0, last as f64);
        let i = (x.floor() as usize).min(last - 1);
        let f = x - i as f64;
        let p = &self.profiles[slice];
        (1.0 - f) * p[i] + f * p[i + 1]
    }
}

/// Backward-Euler solve of `u_t = u_ρρ + u_ρ/ρ` on `[inner, outer]` with
/// central differences on `nodes` points. Profiles are saved at step 0, every
/// `save_stride` steps and at the final step, matching the planar solver.
pub fn radial_reference_heat(
    outer: f64,
    inner: f64,
    u0: impl Fn(f64) -> f64,
    dt: f64,
    t_end: f64,
    save_stride: usize,
    nodes: usize,
) -> Result<RadialSolution> {
    if !(inner > 0.0 && outer > inner) {
        return Err(Error::invalid(format!(
            "radii must satisfy 0 < r < R, got r = {inner}, R = {outer}"
        )));
    }
    if nodes < 3 || save_stride == 0 || !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::invalid("bad radial discretization parameters"));
    }
    let d = (outer - inner) / (nodes - 1) as f64;
    let rho: Vec<f64> = (0..nodes).map(|i| inner + i as f64 * d).collect();
    let mut u: Vec<f64> = rho.iter().map(|&r| u0(r)).collect();
    u[0] = 1.0;
    u[nodes - 1] = 0.0;
    let m = nodes - 2;
    // (I - dt L) on interior nodes: sub, main, sup diagonals
    let mut lower = vec![0.0; m];
    let mut main = vec![0.0; m];
    let mut upper = vec![0.0; m];
    for k in 0..m {
        let r = rho[k + 1];
        let a = 1.0 / (d * d) - 1.0 / (2.0 * r * d);
        let c = 1.0 / (d * d) + 1.0 / (2.0 * r * d);
        lower[k] = -dt * a;
        main[k] = 1.0 + 2.0 * dt / (d * d);
        upper[k] = -dt * c;
    }
    let steps = ((t_end / dt).round() as usize).max(1);
    let mut times = vec![0.0];
    let mut profiles = vec![u.clone()];
    let mut rhs = vec![0.0; m];
    let mut cp = vec![0.0; m];
    for step in 1..=steps {
        rhs.copy_from_slice(&u[1..=m]);
        rhs[0] -= lower[0] * u[0];
        rhs[m - 1] -= upper[m - 1] * u[nodes - 1];
        // Thomas algorithm
        cp[0] = upper[0] / main[0];
        rhs[0] /= main[0];
        for k in 1..m {
            let den = main[k] - lower[k] * cp[k - 1];
            cp[k] = upper[k] / den;
            rhs[k] = (rhs[k] - lower[k] * rhs[k - 1]) / den;
        }
        for k in (0..m - 1).rev() {
            rhs[k] -= cp[k] * rhs[k + 1];
        }
        u[1..=m].copy_from_slice(&rhs);
        if step % save_stride == 0 || step == steps {
            times.push(step as f64 * dt);
            profiles.push(u.clone());
        }
    }
    Ok(RadialSolution { rho, times, profiles })
}

//! Browser bindings for three small ringlab operations. Each returns a JSON
//! string so the page needs no generated type glue.

use std::sync::Arc;

use ringlab_core::convexity::{level_ladder, quasiconcavity_check_spatial, DEFAULT_QC_TOL};
use ringlab_core::curvature::{spacetime_shape_operator, spatial_curvature, Jet};
use ringlab_core::geometry::{parse_body, rasterize, ConvexRing};
use ringlab_core::homotopy::min_level_curvature;
use ringlab_core::pde::solve_laplace;
use ringlab_core::symmetric::{rank_from_eigenvalues, sigma_all};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Elementary symmetric functions `σ_0..σ_n` and the rank of a PSD spectrum.
pub fn symmetric_json(values: &[f64], rank_tol: f64) -> String {
    let sigma = sigma_all(values);
    let rank = rank_from_eigenvalues(values, rank_tol);
    json!({
        "sigma": sigma,
        "rank": rank.as_ref().ok(),
        "error": rank.err().map(|e| e.to_string()),
    })
    .to_string()
}

/// Curvature of the level curve through a point with the given derivatives;
/// with a nonzero `ut` also the space-time principal curvatures.
#[allow(clippy::too_many_arguments)]
pub fn curvature_json(ux: f64, uy: f64, uxx: f64, uxy: f64, uyy: f64, ut: f64, uxt: f64, uyt: f64, utt: f64) -> String {
    let spatial = spatial_curvature(&Jet::spatial(0.0, [ux, uy], [[uxx, uxy], [uxy, uyy]]));
    let spacetime = if ut != 0.0 {
        let jet = Jet::new(0.0, [ux, uy, ut], [[uxx, uxy, uxt], [uxy, uyy, uyt], [uxt, uyt, utt]]);
        Some(spacetime_shape_operator(&jet))
    } else {
        None
    };
    json!({
        "kappa": spatial.as_ref().ok().map(|r| r.min_eigenvalue()),
        "spatial_error": spatial.as_ref().err().map(|e| e.to_string()),
        "spacetime_eigenvalues": spacetime.as_ref().and_then(|r| r.as_ref().ok()).map(|r| r.eigenvalues.clone()),
        "spacetime_gauss": spacetime.as_ref().and_then(|r| r.as_ref().ok()).map(|r| r.gauss),
        "spacetime_error": spacetime.as_ref().and_then(|r| r.as_ref().err()).map(|e| e.to_string()),
    })
    .to_string()
}

/// Harmonic function of a ring (0 outside, 1 on the inner body) on an
/// `n × n` grid, with the convexity of its level curves.
pub fn harmonic_ring_json(n: usize, outer: &str, inner: &str) -> Result<String, String> {
    let m = 256;
    let run = || -> ringlab_core::Result<String> {
        let ring = ConvexRing::new(parse_body(outer, m, None)?, parse_body(inner, m, None)?)?;
        let grid = Arc::new(rasterize(&ring, n, 0.05)?);
        let u = solve_laplace(&grid, 0.0, 1.0, 1e-10)?;
        let ladder = level_ladder(0.0, 1.0, 9);
        let qc = quasiconcavity_check_spatial(&u, &ladder, DEFAULT_QC_TOL)?;
        let (min_k, at, _) = min_level_curvature(&u, &ladder, 48)?;
        let values: Vec<Option<f64>> = (0..n * n)
            .map(|idx| if grid.is_interior(idx) { Some(u.at(idx)) } else { None })
            .collect();
        let inside: Vec<bool> = (0..n * n).map(|idx| ring.inner().contains(node(&grid, idx))).collect();
        Ok(json!({
            "n": n,
            "origin": grid.origin(),
            "spacing": grid.spacing(),
            "values": values,
            "inner": inside,
            "quasiconcave": qc.pass,
            "hull_violation": qc.worst_violation,
            "min_curvature": min_k,
            "argmin": at,
        })
        .to_string())
    };
    run().map_err(|e| e.to_string())
}

fn node(grid: &ringlab_core::geometry::RingGrid, idx: usize) -> [f64; 2] {
    let (i, j) = grid.coords(idx);
    grid.position(i, j)
}

#[wasm_bindgen]
pub fn symmetric_functions(values: &[f64], rank_tol: f64) -> String {
    symmetric_json(values, rank_tol)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn level_curvature(
    ux: f64,
    uy: f64,
    uxx: f64,
    uxy: f64,
    uyy: f64,
    ut: f64,
    uxt: f64,
    uyt: f64,
    utt: f64,
) -> String {
    curvature_json(ux, uy, uxx, uxy, uyy, ut, uxt, uyt, utt)
}

#[wasm_bindgen]
pub fn harmonic_ring(n: usize, outer: &str, inner: &str) -> Result<String, JsValue> {
    harmonic_ring_json(n, outer, inner).map_err(|e| JsValue::from_str(&e))
}

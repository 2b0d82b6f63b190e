use std::sync::Arc;

use proptest::prelude::*;
use ringlab_core::geometry::{make_ball, rasterize, ConvexBody, ConvexRing, RingGrid};
use ringlab_core::pde::io::{read_field_binary, write_field_binary};
use ringlab_core::pde::{
    make_initial_poisson, radial_harmonic, radial_poisson, radial_reference_heat, solve_heat, solve_laplace,
    solve_poisson, supremal_convolution, HeatParams, Operator, ScalarField, Scheme,
};
use ringlab_core::Error;

fn ball_grid(outer: f64, inner: f64, n: usize) -> Arc<RingGrid> {
    let ring = ConvexRing::new(
        make_ball([0.0, 0.0], outer, 256).unwrap(),
        make_ball([0.0, 0.0], inner, 256).unwrap(),
    )
    .unwrap();
    Arc::new(rasterize(&ring, n, 0.05).unwrap())
}

fn random_grid(a0: f64, amp: f64, inner: [f64; 3], n: usize) -> Arc<RingGrid> {
    let a = amp * a0 / 8.0;
    let outer = ConvexBody::from_fn([0.0, 0.0], 256, |t| a0 + a * (3.0 * t).cos()).unwrap();
    let ring = ConvexRing::new(outer, make_ball([inner[0], inner[1]], inner[2], 256).unwrap()).unwrap();
    Arc::new(rasterize(&ring, n, 0.05).unwrap())
}

fn radius(grid: &RingGrid, idx: usize) -> f64 {
    let (i, j) = grid.coords(idx);
    let p = grid.position(i, j);
    p[0].hypot(p[1])
}

fn params(dt: f64, t_end: f64, scheme: Scheme) -> HeatParams {
    HeatParams {
        dt,
        t_end,
        save_stride: 5,
        cg_tol: 1e-12,
        scheme,
        ..HeatParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn heat_flow_obeys_maximum_principle(
        a0 in 1.8f64..2.4, amp in -0.25f64..0.25,
        ix in -0.3f64..0.3, iy in -0.3f64..0.3, ir in 0.3f64..0.6,
        k in 0.5f64..4.0, cn in any::<bool>(),
    ) {
        let grid = random_grid(a0, amp, [ix, iy, ir], 64);
        let u0 = ScalarField::from_fn(grid, |p| 0.5 + 0.5 * (k * p[0]).sin() * (k * p[1]).cos(), 0.0, 1.0);
        let scheme = if cn { Scheme::CrankNicolson } else { Scheme::BackwardEuler };
        let sol = solve_heat(&u0, &params(2e-3, 0.06, scheme)).unwrap();
        for slice in &sol.slices {
            prop_assert!(slice.satisfies_maximum_principle(1e-9));
        }
        prop_assert_eq!(*sol.times.last().unwrap(), 0.06);
    }

    #[test]
    fn poisson_data_has_constant_laplacian(
        a0 in 1.8f64..2.4, amp in -0.25f64..0.25,
        ix in -0.3f64..0.3, iy in -0.3f64..0.3, ir in 0.3f64..0.6,
        c in 0.05f64..2.0,
    ) {
        let grid = random_grid(a0, amp, [ix, iy, ir], 80);
        let u0 = make_initial_poisson(&grid, c, 1e-12).unwrap();
        let lap = Operator::new(grid.clone()).laplacian(&u0);
        for v in &lap {
            prop_assert!((v - c).abs() < 1e-6 * (1.0 + c), "laplacian {v} vs {c}");
        }
        // subharmonic data lies below the harmonic function with the same boundary values
        let h = solve_laplace(&grid, 0.0, 1.0, 1e-12).unwrap();
        for &idx in grid.interior_nodes() {
            prop_assert!(u0.at(idx) <= h.at(idx) + 1e-9);
            prop_assert!(u0.at(idx) <= 1.0);
        }
    }
}

#[test]
fn poisson_data_is_positive_on_concentric_rings() {
    let grid = ball_grid(2.0, 1.0, 96);
    for c in [0.1, 0.5, 1.0] {
        let u0 = make_initial_poisson(&grid, c, 1e-12).unwrap();
        let (lo, hi) = u0.interior_range();
        assert!(lo > 0.0 && hi < 1.0, "c = {c}: range ({lo}, {hi})");
        for &idx in grid.interior_nodes() {
            let exact = radial_poisson(2.0, 1.0, c, radius(&grid, idx));
            assert!((u0.at(idx) - exact).abs() < 2e-3, "c = {c}");
        }
    }
    assert!(matches!(
        make_initial_poisson(&grid, 0.0, 1e-12),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn refinement_reduces_error_against_radial_reference() {
    let (outer, inner, c, t_end) = (2.0, 1.0, 1.0, 0.2);
    let reference = radial_reference_heat(
        outer,
        inner,
        |r| radial_poisson(outer, inner, c, r),
        1e-4,
        t_end,
        2000,
        4001,
    )
    .unwrap();
    let last = reference.times.len() - 1;
    let error = |n: usize, dt: f64, scheme: Scheme| {
        let grid = ball_grid(outer, inner, n);
        let u0 = make_initial_poisson(&grid, c, 1e-12).unwrap();
        let sol = solve_heat(&u0, &params(dt, t_end, scheme)).unwrap();
        let u = sol.final_slice();
        grid.interior_nodes()
            .iter()
            .map(|&idx| (u.at(idx) - reference.value(last, radius(&grid, idx))).abs())
            .fold(0.0, f64::max)
    };
    for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
        let coarse = error(64, 4e-3, scheme);
        let fine = error(128, 2e-3, scheme);
        assert!(coarse / fine >= 1.8, "{scheme:?}: errors {coarse:e} -> {fine:e}");
    }
}

#[test]
fn long_time_limit_is_harmonic() {
    let grid = ball_grid(2.0, 1.0, 64);
    let u0 = ScalarField::constant(grid.clone(), 0.0, 0.0, 1.0);
    let p = HeatParams {
        dt: 0.05,
        t_end: 32.0,
        save_stride: 640,
        cg_tol: 1e-12,
        ..HeatParams::default()
    };
    let sol = solve_heat(&u0, &p).unwrap();
    let harmonic = solve_laplace(&grid, 0.0, 1.0, 1e-12).unwrap();
    assert!(sol.final_slice().max_abs_diff(&harmonic) < 1e-3);
    for &idx in grid.interior_nodes() {
        assert!((harmonic.at(idx) - radial_harmonic(2.0, 1.0, radius(&grid, idx))).abs() < 2e-3);
    }
}

#[test]
fn swapping_boundary_values_reflects_the_solution() {
    let grid = random_grid(2.0, 0.2, [0.1, -0.2, 0.5], 64);
    let f = |p: [f64; 2]| 0.3 + 0.2 * (p[0] * p[1]).sin();
    for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson] {
        let u = solve_heat(
            &ScalarField::from_fn(grid.clone(), f, 0.0, 1.0),
            &params(2e-3, 0.04, scheme),
        )
        .unwrap();
        let swapped = HeatParams {
            outer_value: 1.0,
            inner_value: 0.0,
            ..params(2e-3, 0.04, scheme)
        };
        let v = solve_heat(&ScalarField::from_fn(grid.clone(), |p| 1.0 - f(p), 1.0, 0.0), &swapped).unwrap();
        for (a, b) in u.slices.iter().zip(&v.slices) {
            for &idx in grid.interior_nodes() {
                assert!((a.at(idx) + b.at(idx) - 1.0).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn invalid_heat_parameters_are_rejected() {
    let grid = ball_grid(2.0, 1.0, 64);
    let u0 = ScalarField::constant(grid.clone(), 0.0, 0.0, 1.0);
    let bad = |p: HeatParams| matches!(solve_heat(&u0, &p), Err(Error::InvalidArgument(_)));
    assert!(bad(HeatParams {
        dt: 0.0,
        ..HeatParams::default()
    }));
    assert!(bad(HeatParams {
        dt: 1.0,
        ..HeatParams::default()
    }));
    assert!(bad(HeatParams {
        save_stride: 0,
        ..HeatParams::default()
    }));
    assert!(bad(HeatParams {
        inner_value: 0.5,
        ..HeatParams::default()
    }));
    let nan = ScalarField::constant(grid, f64::NAN, 0.0, 1.0);
    assert!(solve_heat(&nan, &HeatParams::default()).is_err());
}

#[test]
fn supremal_convolution_of_radial_fields_averages_radii() {
    let (outer, inner, c) = (2.0, 1.0, 0.5);
    let grid = ball_grid(outer, inner, 128);
    let ua = solve_laplace(&grid, 0.0, 1.0, 1e-12).unwrap();
    let ub = solve_poisson(&grid, c, 0.0, 1.0, 1e-12).unwrap();
    let w = supremal_convolution(&ua, &ub, 0.5).unwrap();
    assert!(w.satisfies_maximum_principle(1e-12));
    let level_radius = |f: &dyn Fn(f64) -> f64, v: f64| {
        // both profiles decrease in ρ
        let (mut lo, mut hi) = (inner, outer);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let h = grid.spacing();
    for &idx in grid.interior_nodes() {
        let v = w.at(idx);
        let ra = level_radius(&|r| radial_harmonic(outer, inner, r), v);
        let rb = level_radius(&|r| radial_poisson(outer, inner, c, r), v);
        let r = radius(&grid, idx);
        assert!((r - 0.5 * (ra + rb)).abs() < h, "ρ = {r}: expected {}", 0.5 * (ra + rb));
    }
    assert_eq!(supremal_convolution(&ua, &ub, 0.0).unwrap().max_abs_diff(&ua), 0.0);
    assert_eq!(supremal_convolution(&ua, &ub, 1.0).unwrap().max_abs_diff(&ub), 0.0);
    assert!(supremal_convolution(&ua, &ub, 1.5).is_err());
}

#[test]
fn binary_fields_round_trip() {
    let grid = ball_grid(2.0, 1.0, 64);
    let u = solve_laplace(&grid, 0.0, 1.0, 1e-12).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.bin");
    write_field_binary(&u, &path).unwrap();
    let back = read_field_binary(&path, &grid, 0.0, 1.0).unwrap();
    assert_eq!(back.values(), u.values());
    let other = ball_grid(2.0, 1.0, 80);
    assert!(read_field_binary(&path, &other, 0.0, 1.0).is_err());
}

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use ringlab_core::convexity::{
    check_monotone_in_time, convex_hull, extract_spatial_levelset, hitting_times, hull_depth, level_ladder,
    quasiconcavity_check_spacetime, quasiconcavity_check_spatial, rank_timeline, shape_samples, SpaceTimeCheck,
    DEFAULT_QC_TOL,
};
use ringlab_core::geometry::{make_ball, rasterize, ConvexRing, NodeKind, RingGrid};
use ringlab_core::pde::{solve_heat, HeatParams, ScalarField, Scheme, SpaceTimeSolution};
use ringlab_core::Error;

fn grid(outer: f64, inner: ([f64; 2], f64), n: usize) -> Arc<RingGrid> {
    let ring = ConvexRing::new(
        make_ball([0.0, 0.0], outer, 256).unwrap(),
        make_ball(inner.0, inner.1, 256).unwrap(),
    )
    .unwrap();
    Arc::new(rasterize(&ring, n, 0.05).unwrap())
}

/// Heat flow from zero data on the ball ring `B_2 \ B_1`.
fn borell() -> &'static SpaceTimeSolution {
    static SOLUTION: OnceLock<SpaceTimeSolution> = OnceLock::new();
    SOLUTION.get_or_init(|| {
        let g = grid(2.0, ([0.0, 0.0], 1.0), 96);
        let u0 = ScalarField::constant(g, 0.0, 0.0, 1.0);
        let p = HeatParams {
            dt: 2e-3,
            t_end: 0.6,
            save_stride: 10,
            ..HeatParams::default()
        };
        solve_heat(&u0, &p).unwrap()
    })
}

fn synthetic(g: &Arc<RingGrid>, times: &[f64], f: impl Fn([f64; 2], f64) -> f64) -> SpaceTimeSolution {
    SpaceTimeSolution {
        dt: times[1] - times[0],
        scheme: Scheme::BackwardEuler,
        times: times.to_vec(),
        slices: times
            .iter()
            .map(|&t| ScalarField::from_fn(g.clone(), |p| f(p, t), 0.0, 1.0))
            .collect(),
    }
}

fn slice_at(sol: &SpaceTimeSolution, idx: usize, t: f64) -> f64 {
    let m = sol.times.partition_point(|&s| s < t).clamp(1, sol.len() - 1);
    let (t0, t1) = (sol.times[m - 1], sol.times[m]);
    let (a, b) = (sol.slices[m - 1].at(idx), sol.slices[m].at(idx));
    a + (t - t0) / (t1 - t0) * (b - a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hitting_times_are_consistent_and_nested(c1 in 0.05f64..0.95, c2 in 0.05f64..0.95) {
        let sol = borell();
        let (lo, hi) = (c1.min(c2), c1.max(c2));
        let (ta, tb) = (hitting_times(sol, lo), hitting_times(sol, hi));
        let g = sol.grid();
        for idx in 0..g.n() * g.n() {
            match g.kind(idx) {
                NodeKind::Inner => prop_assert_eq!(ta[idx], 0.0),
                NodeKind::Outer => prop_assert!(ta[idx].is_infinite()),
                NodeKind::Interior => {
                    prop_assert!(ta[idx] <= tb[idx]);
                    if ta[idx].is_finite() && ta[idx] > 0.0 {
                        prop_assert!((slice_at(sol, idx, ta[idx]) - lo).abs() < 1e-9);
                    } else if ta[idx].is_infinite() {
                        prop_assert!(sol.final_slice().at(idx) < lo);
                    }
                }
            }
        }
    }

    #[test]
    fn spatial_level_sets_are_nested_circles(c1 in 0.05f64..0.95, c2 in 0.05f64..0.95, m in 1usize..31) {
        prop_assume!((c1 - c2).abs() > 0.02);
        let slice = &borell().slices[m];
        let h = slice.grid().spacing();
        let radii = |c: f64| -> Option<(f64, f64)> {
            let sample = extract_spatial_levelset(slice, c).unwrap();
            if sample.is_empty() || sample.boundary_attached() {
                return None;
            }
            let r: Vec<f64> = sample.points().map(|p| p[0].hypot(p[1])).collect();
            Some((r.iter().cloned().fold(f64::INFINITY, f64::min), r.iter().cloned().fold(0.0, f64::max)))
        };
        if let (Some((lo1, hi1)), Some((lo2, hi2))) = (radii(c1.min(c2)), radii(c1.max(c2))) {
            prop_assert!(hi1 - lo1 < 0.1 * h && hi2 - lo2 < 0.1 * h);
            prop_assert!(lo1 > hi2, "level {} inside level {}", c1.min(c2), c1.max(c2));
        }
    }
}

#[test]
fn ball_ring_flow_is_quasiconcave_with_full_rank() {
    let sol = borell();
    check_monotone_in_time(sol).unwrap();
    let ladder = level_ladder(0.0, 1.0, 9);
    for slice in &sol.slices[1..] {
        assert!(
            quasiconcavity_check_spatial(slice, &ladder, DEFAULT_QC_TOL)
                .unwrap()
                .pass
        );
    }
    let check = SpaceTimeCheck {
        pairs: 4000,
        ..SpaceTimeCheck::default()
    };
    let report = quasiconcavity_check_spacetime(sol, &ladder, &check).unwrap();
    assert!(
        report.pass,
        "{:?}",
        report
            .per_level
            .iter()
            .map(|l| l.midpoint_violation)
            .collect::<Vec<_>>()
    );

    let timeline = rank_timeline(sol, 0.5, 32, 1e-6, 7).unwrap();
    let ranks = timeline.ranks();
    assert!(!ranks.is_empty());
    assert!(ranks.iter().all(|&r| r == 2), "{ranks:?}");
    assert!(timeline.monotone);
    assert!(timeline.min_principal_curvature().unwrap().min_eigenvalue > 0.0);
}

#[test]
fn travelling_plane_has_flat_level_sets() {
    // e^(x+t) solves the heat equation; its level sets are planes x + t = const
    let g = grid(3.0, ([2.0, 0.0], 0.3), 128);
    let sol = synthetic(&g, &[0.0, 0.1, 0.2, 0.3], |p, t| (p[0] + t).exp());
    let samples = shape_samples(&sol, 0.5, 24, 3).unwrap();
    assert!(samples.len() > 20);
    // time derivatives of u_t use second-order differences
    let h2 = g.spacing().powi(2);
    for s in &samples {
        for k in &s.report.eigenvalues {
            assert!(k.abs() < h2, "curvature {k}");
        }
    }
}

#[test]
fn two_bumps_are_not_quasiconcave() {
    let g = grid(3.0, ([1.2, 0.0], 0.2), 128);
    let bump = |p: [f64; 2], cx: f64| (-((p[0] - cx).powi(2) + p[1] * p[1])).exp();
    let u = ScalarField::from_fn(g.clone(), |p| bump(p, 1.2).max(bump(p, -1.2)), 0.0, 1.0);
    let report = quasiconcavity_check_spatial(&u, &[0.5], DEFAULT_QC_TOL).unwrap();
    assert!(!report.pass);
    assert!(report.worst_violation > 10.0 * g.spacing());
    assert_eq!(report.per_level[0].loops, 2);
}

#[test]
fn concave_hitting_times_fail_the_spacetime_check() {
    let g = grid(3.0, ([0.0, 0.0], 0.3), 96);
    let times: Vec<f64> = (0..=60).map(|k| 0.05 * k as f64).collect();
    let sol = synthetic(&g, &times, |p, t| (t / (1.0 + 4.0 * p[0].hypot(p[1])).sqrt()).min(1.0));
    let report = quasiconcavity_check_spacetime(&sol, &level_ladder(0.2, 0.8, 5), &SpaceTimeCheck::default()).unwrap();
    assert!(!report.pass);
    assert!(report
        .per_level
        .iter()
        .any(|l| l.midpoint_violation > report.time_tolerance));
}

#[test]
fn stalled_or_decreasing_flows_are_rejected() {
    let sol = borell();
    let mut stalled = sol.clone();
    stalled.slices.insert(2, stalled.slices[2].clone());
    stalled.times.insert(2, stalled.times[2] - 1e-3);
    assert!(matches!(
        check_monotone_in_time(&stalled),
        Err(Error::MonotonicityViolated(_))
    ));
    let mut reversed = sol.clone();
    reversed.slices.reverse();
    assert!(matches!(
        check_monotone_in_time(&reversed),
        Err(Error::MonotonicityViolated(_))
    ));
    let levels = [0.5];
    assert!(quasiconcavity_check_spacetime(&reversed, &levels, &SpaceTimeCheck::default()).is_err());
}

#[test]
fn levels_outside_the_data_range_are_rejected() {
    let slice = &borell().slices[3];
    assert!(matches!(
        extract_spatial_levelset(slice, 1.0),
        Err(Error::LevelOutOfRange(_))
    ));
    assert!(matches!(
        extract_spatial_levelset(slice, -0.1),
        Err(Error::LevelOutOfRange(_))
    ));
}

#[test]
fn hull_depth_of_square() {
    let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.9]];
    let hull = convex_hull(&pts);
    assert_eq!(hull.len(), 4);
    assert!((hull_depth(&hull, [0.5, 0.9]) - 0.1).abs() < 1e-12);
    assert!(hull_depth(&hull, [1.0, 0.5]).abs() < 1e-12);
}

use fppm::gather::{sector_index, ContributionSample, Decision, GatherRegion, RadiusMode, RadiusSchedule};
use fppm::math::{map_from_unified, map_to_unified, unified_to_point, Point3, Rgb, TangentFrame, UnifiedPoint, Vec3};
use fppm::metrics::log_log_slope;
use fppm::photon_map::HashGrid;
use fppm::stats::{CriticalValues, TestConfig};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point3> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn grid_query_equals_brute_force(
        pts in proptest::collection::vec(point(), 0..300),
        center in point(),
        r in 0.01f64..2.0,
        cell_factor in 1.0f64..4.0,
    ) {
        let grid = HashGrid::build_points(&pts, r * cell_factor).unwrap();
        let mut got = grid.query_ball(center, r).unwrap();
        got.sort_unstable();
        let want: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - center).length_sq() <= r * r).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn sector_index_is_in_range_and_scale_free(
        u in -1.0f64..1.0, v in -1.0f64..1.0, scale in 0.01f64..100.0, n_a in 1usize..4, n_s in 1usize..9,
    ) {
        let y = UnifiedPoint::new(u, v);
        prop_assume!(y.norm() <= 1.0);
        let a = sector_index(y, 1.0, n_a, n_s).unwrap();
        prop_assert!(a < n_a * n_s);
        let b = sector_index(UnifiedPoint::new(u * scale, v * scale), scale, n_a, n_s).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn unified_map_roundtrips_in_the_tangent_plane(
        x in point(), nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0, u in -1.0f64..1.0, v in -1.0f64..1.0,
    ) {
        let n = Vec3::new(nx, ny, nz);
        prop_assume!(n.length() > 0.1);
        let frame = TangentFrame::from_unit(n.normalized());
        let y = UnifiedPoint::new(u, v);
        let back = map_to_unified(x, unified_to_point(x, y, &frame), &frame);
        prop_assert!((back.y_u - u).abs() < 1e-12 && (back.y_v - v).abs() < 1e-12);
        // The literal forward map lands on the reflected point.
        let mirrored = map_to_unified(x, map_from_unified(x, y, &frame), &frame);
        prop_assert!((mirrored.y_u + u).abs() < 1e-12 && (mirrored.y_v + v).abs() < 1e-12);
    }

    #[test]
    fn radius_never_grows_and_respects_the_floor(
        decisions in proptest::collection::vec(0u8..3, 1..120),
        k in 0.3f64..0.95,
        alpha in 0.5f64..0.95,
    ) {
        let schedule = RadiusSchedule::with(0.5, k, alpha);
        let config = TestConfig::default();
        let critical = CriticalValues::new();
        let mut region = GatherRegion::new(&schedule, RadiusMode::FTest, &config);
        let mut prev = region.radius;
        for (i, d) in decisions.iter().enumerate() {
            let i = i as u64 + 1;
            let decision = match d {
                0 => Decision::Test,
                1 => Decision::AlwaysReject,
                _ => Decision::NeverReject,
            };
            // A few samples bunched near the kernel's edge.
            let r = region.radius;
            for s in 0..5 {
                let y = UnifiedPoint::new(0.9 * r, 0.01 * r * s as f64);
                region.accumulate(&ContributionSample { y, value: Rgb::grey(1.0) }, &config).unwrap();
            }
            let up = region.end_iteration(&schedule, i, 16, &config, &critical, decision).unwrap();
            prop_assert!(up.radius <= prev);
            prop_assert!(up.radius >= schedule.lower_bound(i + 1) * (1.0 - 1e-12));
            prev = up.radius;
        }
    }
}

#[test]
fn slope_of_exact_power_laws() {
    let rows: Vec<(f64, f64)> = (100..=2000).step_by(10).map(|i| (i as f64, 7.0 / i as f64)).collect();
    assert!((log_log_slope(&rows).unwrap() + 1.0).abs() < 1e-12);
    let rows: Vec<(f64, f64)> = (100..=2000).step_by(10).map(|i| (i as f64, 3.0 * (i as f64).powf(-2.0 / 3.0))).collect();
    assert!((log_log_slope(&rows).unwrap() + 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn slope_tolerates_multiplicative_noise() {
    use fppm::math::{Purpose, RngStream, StreamKey};
    let mut r = RngStream::new(9, StreamKey { index: 0, iteration: 0, purpose: Purpose::Synthetic });
    let rows: Vec<(f64, f64)> =
        (100..=2000).map(|i| (i as f64, (1.0 + 0.05 * (2.0 * r.uniform() - 1.0)) / i as f64)).collect();
    assert!((log_log_slope(&rows).unwrap() + 1.0).abs() < 0.05);
}

#[test]
fn slope_needs_enough_positive_rows() {
    let rows: Vec<(f64, f64)> = (1..5).map(|i| (i as f64, 1.0)).collect();
    assert!(log_log_slope(&rows).is_err());
}

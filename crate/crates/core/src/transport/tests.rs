use super::*;
use crate::geometry::DomainSpec;

fn disk_spec() -> DomainSpec {
    DomainSpec::ball(2, &[0.0, 0.0], 1.0)
}

fn ellipse_spec() -> DomainSpec {
    DomainSpec::ellipsoid(2, &[0.0, 0.0], &[0.5, 1.0])
}

#[test]
fn sample_centroid_near_origin() {
    let cloud = sample_uniform::<2>(&disk_spec(), 100, 7).unwrap();
    let c = cloud.centroid();
    assert!(la::norm(&c) < 0.05, "centroid {c:?}");
}

#[test]
fn sample_single_point_inside() {
    let cloud = sample_uniform::<2>(&disk_spec(), 1, 0).unwrap();
    assert_eq!(cloud.len(), 1);
    assert!(la::norm(&cloud.points[0]) < 1.0);
}

#[test]
fn sampling_is_deterministic() {
    let a = sample_uniform::<3>(&DomainSpec::ball(3, &[0.0; 3], 1.0), 64, 42).unwrap();
    let b = sample_uniform::<3>(&DomainSpec::ball(3, &[0.0; 3], 1.0), 64, 42).unwrap();
    assert_eq!(a.points, b.points);
    let c = sample_uniform::<3>(&DomainSpec::ball(3, &[0.0; 3], 1.0), 64, 43).unwrap();
    assert_ne!(a.points, c.points);
}

#[test]
fn identity_assignment_for_equal_clouds() {
    let cloud = sample_uniform::<2>(&disk_spec(), 80, 3).unwrap();
    let t = solve_assignment(&cloud, &cloud).unwrap();
    assert!(t.total_cost.abs() < 1e-12);
    for i in 0..cloud.len() {
        assert_eq!(t.assignment[i], i);
    }
}

#[test]
fn translation_is_optimal() {
    let target = sample_uniform::<2>(&disk_spec(), 120, 5).unwrap();
    let shift = [0.7, -0.3];
    let source = PointCloud {
        points: target.points.iter().map(|p| la::add(p, &shift)).collect(),
    };
    let t = solve_assignment(&source, &target).unwrap();
    for i in 0..source.len() {
        assert_eq!(
            t.assignment[i], i,
            "translation must match point {i} to itself"
        );
    }
    let expected = source.len() as f64 * la::dot(&shift, &shift);
    assert!((t.total_cost - expected).abs() < 1e-9 * expected);
}

#[test]
fn matches_brute_force_on_small_instances() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let n = 6;
        let source = PointCloud::<2> {
            points: (0..n)
                .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
                .collect(),
        };
        let target = PointCloud::<2> {
            points: (0..n)
                .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
                .collect(),
        };
        let t = solve_assignment(&source, &target).unwrap();
        let brute = brute_force_cost(&source, &target);
        assert!(
            (t.total_cost - brute).abs() <= 1e-12 * brute.max(1.0),
            "JV {} vs brute {}",
            t.total_cost,
            brute
        );
    }
}

pub fn brute_force_cost<const N: usize>(source: &PointCloud<N>, target: &PointCloud<N>) -> f64 {
    let n = source.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let mut c = 0.0;
        for i in 0..n {
            c += la::dist2(&source.points[i], &target.points[p[i]]);
        }
        best = best.min(c);
    });
    best
}

fn permute(arr: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == arr.len() {
        f(arr);
        return;
    }
    for i in k..arr.len() {
        arr.swap(k, i);
        permute(arr, k + 1, f);
        arr.swap(k, i);
    }
}

#[test]
fn dual_feasibility_certificate() {
    let source = sample_uniform::<2>(&ellipse_spec(), 200, 1).unwrap();
    let target = sample_ball::<2>(&[0.0, 0.0], 0.5f64.sqrt(), 200, 2);
    let t = solve_assignment(&source, &target).unwrap();
    assert!(
        t.dual_feasibility_violation() <= 1e-9,
        "violation {}",
        t.dual_feasibility_violation()
    );
    // complementary slackness on matched pairs
    for i in 0..200 {
        let slack =
            la::dist2(&source.points[i], t.target_of(i)) - t.dual_u[i] - t.dual_v[t.assignment[i]];
        assert!(slack.abs() <= 1e-9, "matched slack {slack}");
    }
    assert_eq!(t.monotonicity_violations(10_000, 1e-9, 99), 0);
}

#[test]
fn potential_is_max_affine_consistent() {
    let source = sample_uniform::<2>(&ellipse_spec(), 150, 9).unwrap();
    let target = sample_ball::<2>(&[0.0, 0.0], 0.5f64.sqrt(), 150, 10);
    let t = solve_assignment(&source, &target).unwrap();
    let min_v = t.potential.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min_v.abs() < 1e-12);
    for i in 0..t.source.len() {
        let yi = t.target_of(i);
        for j in 0..t.source.len() {
            let plane =
                t.potential[i] + la::dot(yi, &la::sub(&t.source.points[j], &t.source.points[i]));
            assert!(
                t.potential[j] >= plane - 1e-9,
                "max-affine consistency failed: v_{j} = {} < {plane}",
                t.potential[j]
            );
        }
    }
}

#[test]
fn convex_extension_properties() {
    let source = sample_uniform::<2>(&disk_spec(), 100, 21).unwrap();
    let target = sample_ball::<2>(&[0.0, 0.0], 1.0, 100, 22);
    let t = solve_assignment(&source, &target).unwrap();
    // at a source point the envelope dominates its own value
    for i in 0..t.source.len() {
        assert!(t.extend_convex(&t.source.points[i]) >= t.potential[i] - 1e-12);
    }
    // Lipschitz constant bounded by the max matched target norm
    let lip = t.max_target_norm();
    assert!(lip <= 1.0 + 1e-12);
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let a = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let b = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let diff = (t.extend_convex(&a) - t.extend_convex(&b)).abs();
        assert!(diff <= lip * la::dist(&a, &b) + 1e-12);
    }
}

#[test]
fn two_plane_envelope_kink_on_bisector() {
    // two points with distinct slopes: the envelope kinks where the planes
    // meet; convexity across the kink
    let t = BrenierTransport::<2> {
        source: PointCloud {
            points: vec![[-1.0, 0.0], [1.0, 0.0]],
        },
        target: PointCloud {
            points: vec![[-0.5, 0.0], [0.5, 0.0]],
        },
        assignment: vec![0, 1],
        potential: vec![0.5, 0.5],
        dual_u: vec![0.0, 0.0],
        dual_v: vec![0.0, 0.0],
        total_cost: 0.5,
    };
    // planes: 0.5 - 0.5(x+1) and 0.5 + 0.5(x-1): equal at x = 0
    let left = t.extend_convex(&[-0.2, 0.0]);
    let mid = t.extend_convex(&[0.0, 0.0]);
    let right = t.extend_convex(&[0.2, 0.0]);
    assert!((mid - 0.0).abs() < 1e-12);
    assert!((left - 0.1).abs() < 1e-12 && (right - 0.1).abs() < 1e-12);
}

#[test]
fn translation_diagnostics_identity_hessian() {
    let target = sample_uniform::<2>(&disk_spec(), 300, 13).unwrap();
    let shift = [0.4, 0.1];
    let source = PointCloud {
        points: target.points.iter().map(|p| la::add(p, &shift)).collect(),
    };
    let t = solve_assignment(&source, &target).unwrap();
    let shape = disk_spec().typed::<2>().unwrap();
    let spacing = source.mean_nn_spacing();
    let interior: Vec<bool> = source
        .points
        .iter()
        .map(|p| shape.sdf(&la::sub(p, &shift)) < -3.0 * spacing)
        .collect();
    let d = brenier_diagnostics(&t, 1.0, &interior, 4).unwrap();
    assert!(
        d.trace_pass_fraction > 0.999,
        "trace pass {}",
        d.trace_pass_fraction
    );
    assert!((d.det_mean - 1.0).abs() < 1e-6, "det mean {}", d.det_mean);
    assert!(d.det_stddev < 1e-6);
    assert_eq!(d.monotonicity_violations, 0);
}

#[test]
fn ellipse_to_disk_matches_linear_map() {
    // Uniform ellipse (a, b) -> uniform disk r with r² = ab has the linear
    // measure-preserving Brenier map diag(r/a, r/b).
    let n = 900;
    let r = 0.5f64.sqrt();
    let source = sample_uniform::<2>(&ellipse_spec(), n, 31).unwrap();
    let target = sample_ball::<2>(&[0.0, 0.0], r, n, 32);
    let t = solve_assignment(&source, &target).unwrap();
    let map = [r / 0.5, r / 1.0];
    let spacing = target.mean_nn_spacing();
    let mut mean_err = 0.0;
    for i in 0..n {
        let expect = [map[0] * source.points[i][0], map[1] * source.points[i][1]];
        mean_err += la::dist(t.target_of(i), &expect);
    }
    mean_err /= n as f64;
    assert!(
        mean_err < 2.5 * spacing,
        "mean deviation from the linear map {mean_err} vs spacing {spacing}"
    );

    let shape = ellipse_spec().typed::<2>().unwrap();
    let interior: Vec<bool> = source
        .points
        .iter()
        .map(|p| shape.sdf(p) < -2.5 * spacing)
        .collect();
    let d = brenier_diagnostics(&t, r, &interior, 8).unwrap();
    assert!(d.max_target_norm <= r + 1e-12);
    assert!(
        d.trace_pass_fraction >= 0.95,
        "trace pass fraction {}",
        d.trace_pass_fraction
    );
    assert_eq!(d.monotonicity_violations, 0);
}

#[test]
fn rejects_bad_inputs() {
    let a = sample_uniform::<2>(&disk_spec(), 10, 0).unwrap();
    let b = sample_uniform::<2>(&disk_spec(), 11, 0).unwrap();
    assert!(solve_assignment(&a, &b).is_err());
    assert!(sample_uniform::<2>(&disk_spec(), 0, 0).is_err());

    // exact regime is capped at n = 5000 (checked before any allocation)
    let big = PointCloud::<2> {
        points: vec![[0.0, 0.0]; 5001],
    };
    assert!(solve_assignment(&big, &big).is_err());
}

#[test]
fn degenerate_rejection_efficiency_fails() {
    // two tiny balls far apart: the bounding box dwarfs the domain and the
    // accept rate drops below the 1% floor
    let spec = DomainSpec::union_of_balls(
        2,
        &[(vec![0.0, 0.0], 0.5), (vec![200.0, 0.0], 0.5)],
    );
    assert!(sample_uniform::<2>(&spec, 64, 0).is_err());
}

#[test]
fn rank_deficient_fits_are_skipped_and_counted() {
    // collinear cloud: the neighborhood geometry cannot identify a Hessian,
    // so every fit is skipped rather than fabricated
    let n = 64;
    let source = PointCloud::<2> {
        points: (0..n).map(|k| [k as f64 * 0.01, 0.0]).collect(),
    };
    let target = source.clone();
    let t = solve_assignment(&source, &target).unwrap();
    let interior = vec![true; n];
    let d = brenier_diagnostics(&t, 1.0, &interior, 0).unwrap();
    assert_eq!(d.fitted_points, 0);
    assert_eq!(d.skipped_points, n);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn scaling_equivariance(s in 0.2f64..4.0, seed in 0u64..100) {
            let source = sample_uniform::<2>(&disk_spec(), 40, seed).unwrap();
            let target = sample_ball::<2>(&[0.0, 0.0], 1.0, 40, seed + 1);
            let t = solve_assignment(&source, &target).unwrap();
            let scaled_source = PointCloud {
                points: source.points.iter().map(|p| la::scale(p, s)).collect(),
            };
            let scaled_target = PointCloud {
                points: target.points.iter().map(|p| la::scale(p, s)).collect(),
            };
            let ts = solve_assignment(&scaled_source, &scaled_target).unwrap();
            prop_assert!((ts.total_cost - s * s * t.total_cost).abs() <= 1e-9 * ts.total_cost.max(1e-9));
            prop_assert_eq!(&ts.assignment, &t.assignment);
        }
    }
}

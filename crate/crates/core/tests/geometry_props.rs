use std::f64::consts::PI;

use morsecover::geometry::validate_morse;
use morsecover::{MorseSet, Norm, Point, Space};
use proptest::prelude::*;

fn space(norm: u8) -> Space {
    let n = match norm {
        0 => Norm::L1,
        1 => Norm::L2,
        _ => Norm::Linf,
    };
    Space::new(2, n).unwrap()
}

/// Angle-sorted vertices with a certified kernel: the kernel radius is a
/// fraction of the smallest distance from the center to an edge line.
fn polygon() -> impl Strategy<Value = (Point, Vec<Point>, f64)> {
    (5usize..12, -1.0..1.0f64, -1.0..1.0f64)
        .prop_flat_map(|(n, cx, cy)| {
            (Just(n), Just((cx, cy)), prop::collection::vec((0.5..2.0f64, -0.3..0.3f64), n))
        })
        .prop_map(|(n, (cx, cy), rv)| {
            let rel: Vec<[f64; 2]> = rv
                .iter()
                .enumerate()
                .map(|(k, (rho, jit))| {
                    let t = 2.0 * PI * (k as f64 + jit) / n as f64;
                    [rho * t.cos(), rho * t.sin()]
                })
                .collect();
            let kernel = (0..n)
                .map(|k| {
                    let (a, b) = (rel[k], rel[(k + 1) % n]);
                    (a[0] * b[1] - a[1] * b[0]) / (b[0] - a[0]).hypot(b[1] - a[1])
                })
                .fold(f64::INFINITY, f64::min);
            let verts = rel.iter().map(|v| Point::from([cx + v[0], cy + v[1]])).collect();
            (Point::from([cx, cy]), verts, 0.9 * kernel)
        })
}

fn shape() -> impl Strategy<Value = MorseSet> {
    let sp = Space::euclidean(2);
    let ball = (-2.0..2.0f64, -2.0..2.0f64, 0.1..3.0f64, 0.0..0.8f64, 0.0..2.0 * PI, any::<bool>()).prop_map(
        move |(x, y, r, w, t, closed)| {
            let c = Point::from([x, y]);
            let tag = c.axpy(w * r, &[t.cos(), t.sin()]);
            MorseSet::tagged_ball(&Space::euclidean(2), c, r, tag, closed, None).unwrap()
        },
    );
    let interval = (-2.0..2.0f64, -2.0..2.0f64, 0.1..3.0f64, 0.1..3.0f64, 0.05..0.7f64, 0.05..0.7f64).prop_map(
        |(x, y, a, b, c1, c2)| {
            MorseSet::tagged_interval(
                &Space::euclidean(2),
                Point::from([x, y]),
                Point::from([a, b]),
                Point::from([c1, c2]),
                None,
            )
            .unwrap()
        },
    );
    let poly = polygon().prop_map(move |(c, v, k)| MorseSet::star_polygon(&sp, c, k, &v, None).unwrap());
    prop_oneof![ball, interval, poly]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_shapes_are_morse(s in shape()) {
        let r = validate_morse(&Space::euclidean(2), &s, 512).unwrap();
        prop_assert!(r.valid, "{:?}", r.first_failure);
        prop_assert!(r.min_lambda <= s.lambda() * (1.0 + 1e-9));
    }

    #[test]
    fn kernel_ball_and_outer_ball(s in shape(), t in 0.0..2.0 * PI, f in 0.0..0.999f64) {
        let sp = Space::euclidean(2);
        let u = [t.cos(), t.sin()];
        let inner = s.tag().axpy(f * s.inner_radius(), &u);
        prop_assert!(s.interior_contains(&sp, &inner).unwrap());
        let b = s.boundary_point(&sp, &u);
        prop_assert!(sp.dist(&b, s.tag()) <= s.lambda() * s.inner_radius() * (1.0 + 1e-9));
    }

    #[test]
    fn segments_from_the_kernel_are_interior(
        s in shape(),
        ty in 0.0..2.0 * PI,
        fy in 0.0..0.95f64,
        tx in 0.0..2.0 * PI,
        fx in 0.0..=1.0f64,
        alpha in 1e-3..=1.0f64,
    ) {
        let sp = Space::euclidean(2);
        let y = s.tag().axpy(fy * s.inner_radius(), &[ty.cos(), ty.sin()]);
        let edge = s.boundary_point(&sp, &[tx.cos(), tx.sin()]);
        let x = s.tag().axpy(fx, &edge.sub(s.tag()));
        let p = s.segment_interior(&sp, &y, &x, alpha);
        prop_assert!(p.is_ok(), "{:?}", p);
    }

    #[test]
    fn scaling_is_a_semigroup(s in shape(), p in 0.05..1.0f64, q in 0.05..1.0f64) {
        let twice = s.scaled(p).unwrap().scaled(q).unwrap();
        prop_assert!(twice.approx_eq(&s.scaled(p * q).unwrap(), 1e-12));
        prop_assert!(s.scaled(1.0).unwrap().approx_eq(&s, 1e-12));
    }

    #[test]
    fn smaller_scalings_sit_inside(s in shape(), p in 0.05..0.9f64, gap in 0.01..0.1f64, t in 0.0..2.0 * PI) {
        let sp = Space::euclidean(2);
        let q = (p + gap).min(1.0);
        let b = s.scaled(p).unwrap().boundary_point(&sp, &[t.cos(), t.sin()]);
        prop_assert!(s.scaled(q).unwrap().interior_contains(&sp, &b).unwrap());
    }

    #[test]
    fn closure_contains_the_set(s in shape(), t in 0.0..2.0 * PI, f in 0.0..=1.0f64) {
        let sp = Space::euclidean(2);
        let x = s.tag().axpy(f, &s.boundary_point(&sp, &[t.cos(), t.sin()]).sub(s.tag()));
        prop_assert!(s.closure_contains(&sp, &x).unwrap());
        if s.contains(&sp, &x).unwrap() {
            prop_assert!(s.closure().contains(&sp, &x).unwrap());
        }
    }

    #[test]
    fn norms_satisfy_the_triangle_inequality(
        norm in 0u8..3,
        a in prop::array::uniform2(-5.0..5.0f64),
        b in prop::array::uniform2(-5.0..5.0f64),
        c in prop::array::uniform2(-5.0..5.0f64),
    ) {
        let sp = space(norm);
        prop_assert!(sp.dist(&a, &c) <= sp.dist(&a, &b) + sp.dist(&b, &c) + 1e-12);
        prop_assert!((sp.dist(&a, &b) - sp.dist(&b, &a)).abs() <= 1e-15);
    }

    #[test]
    fn balls_in_any_norm_are_morse(norm in 0u8..3, r in 0.1..5.0f64, x in -3.0..3.0f64) {
        let sp = space(norm);
        let s = MorseSet::closed_ball(&sp, Point::from([x, -x]), r).unwrap();
        prop_assert!(validate_morse(&sp, &s, 256).unwrap().valid);
        prop_assert!((s.diameter(&sp) - 2.0 * r).abs() <= 1e-12 * r);
    }
}

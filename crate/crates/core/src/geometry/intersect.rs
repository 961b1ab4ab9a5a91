use super::{AaBox, MorseSet, Norm, Point, Shape, Space, GEOM_TOL};
use crate::sampling::directions;

/// Verdict of a set-set intersection test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Intersection {
    Exact(bool),
    /// Decided by boundary sampling; `true` is always backed by a witness point.
    Sampled(bool),
}

impl Intersection {
    pub fn intersects(self) -> bool {
        match self {
            Intersection::Exact(b) | Intersection::Sampled(b) => b,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Intersection::Exact(_))
    }
}

/// Position of a closed box relative to a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxRelation {
    /// The box lies in the closure of the set.
    Inside,
    /// The box misses the closure of the set.
    Outside,
    /// Undecided.
    Partial,
}

/// Per-axis interval with open/closed ends.
#[derive(Clone, Copy, Debug)]
struct Side {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

/// Box-like description of balls in box norms and of tagged intervals.
fn as_box(space: &Space, s: &MorseSet) -> Option<Vec<Side>> {
    match s.shape() {
        Shape::Interval { anchor, edges, closed } => Some(
            (0..anchor.dim())
                .map(|i| Side { lo: anchor[i], hi: anchor[i] + edges[i], lo_closed: *closed, hi_closed: true })
                .collect(),
        ),
        Shape::Ball { center, radius, closed } if space.norm().balls_are_boxes(space.dim()) => {
            let hw = space.ball_half_widths(*radius);
            Some(
                (0..center.dim())
                    .map(|i| Side {
                        lo: center[i] - hw[i],
                        hi: center[i] + hw[i],
                        lo_closed: *closed,
                        hi_closed: *closed,
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

fn boxes_meet(a: &[Side], b: &[Side], tol: f64) -> bool {
    a.iter().zip(b).all(|(p, q)| {
        let (lo, lo_closed) = if (p.lo - q.lo).abs() <= tol {
            (p.lo.max(q.lo), p.lo_closed && q.lo_closed)
        } else if p.lo > q.lo {
            (p.lo, p.lo_closed)
        } else {
            (q.lo, q.lo_closed)
        };
        let (hi, hi_closed) = if (p.hi - q.hi).abs() <= tol {
            (p.hi.min(q.hi), p.hi_closed && q.hi_closed)
        } else if p.hi < q.hi {
            (p.hi, p.hi_closed)
        } else {
            (q.hi, q.hi_closed)
        };
        lo < hi - tol || ((lo - hi).abs() <= tol && lo_closed && hi_closed)
    })
}

fn side_contains(sides: &[Side], x: &[f64], tol: f64) -> bool {
    sides.iter().zip(x).all(|(s, v)| {
        let above = if s.lo_closed { *v >= s.lo - tol } else { *v > s.lo + tol };
        let below = if s.hi_closed { *v <= s.hi + tol } else { *v < s.hi - tol };
        above && below
    })
}

/// Whether two sets share a point.
///
/// Exact for ball/ball (any norm), box/box (open and closed faces respected),
/// round ball/box, and every pair in 2D; touching polygons count as
/// meeting. Other pairs use a bounding-ball reject followed by deterministic
/// boundary sampling.
pub fn sets_intersect(space: &Space, a: &MorseSet, b: &MorseSet) -> Intersection {
    let tol = GEOM_TOL * a.inner_radius().min(b.inner_radius());
    let ba = a.bounding_box(space);
    let bb = b.bounding_box(space);
    if (0..space.dim()).any(|i| ba.lo[i] > bb.hi[i] + tol || bb.lo[i] > ba.hi[i] + tol) {
        return Intersection::Exact(false);
    }
    if let (
            Shape::Ball { center: c1, radius: r1, closed: k1 },
            Shape::Ball { center: c2, radius: r2, closed: k2 },
        ) = (a.shape(), b.shape()) {
        let d = space.dist(c1, c2);
        let limit = r1 + r2;
        return Intersection::Exact(if *k1 && *k2 { d <= limit + tol } else { d < limit - tol });
    }
    let box_a = as_box(space, a);
    let box_b = as_box(space, b);
    if let (Some(p), Some(q)) = (&box_a, &box_b) {
        return Intersection::Exact(boxes_meet(p, q, tol));
    }
    // Round ball against a box-like set.
    for (ball, sides, other) in [(a, &box_b, b), (b, &box_a, a)] {
        if let (Shape::Ball { center, radius, closed }, Some(sides)) = (ball.shape(), sides) {
            let hull = other.bounding_box(space);
            let (d, p) = space.box_nearest(center, &hull);
            return Intersection::Exact(if d < radius - tol {
                true
            } else if d > radius + tol {
                false
            } else {
                *closed && side_contains(sides, &p, tol)
            });
        }
    }
    if space.dim() == 2 {
        return Intersection::Exact(planar_meet(space, a, b, tol));
    }
    sampled_meet(space, a, b, tol)
}

fn seg_dist_point(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let len2 = e[0] * e[0] + e[1] * e[1];
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / len2).clamp(0.0, 1.0) };
    let q = [a[0] + t * e[0] - p[0], a[1] + t * e[1] - p[1]];
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}

fn orient(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Closed segments `ab` and `cd` meet (collinear overlaps included).
pub(crate) fn segments_meet(a: &[f64], b: &[f64], c: &[f64], d: &[f64], tol: f64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol)) && ((o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol)) {
        return true;
    }
    seg_dist_point(c, a, b) <= tol
        || seg_dist_point(d, a, b) <= tol
        || seg_dist_point(a, c, d) <= tol
        || seg_dist_point(b, c, d) <= tol
}

fn is_disc(space: &Space, s: &MorseSet) -> bool {
    matches!(s.shape(), Shape::Ball { .. }) && matches!(space.norm(), Norm::L2)
}

fn planar_meet(space: &Space, a: &MorseSet, b: &MorseSet, tol: f64) -> bool {
    match (is_disc(space, a), is_disc(space, b)) {
        (true, true) => unreachable!("ball pairs are handled exactly above"),
        (true, false) | (false, true) => {
            let (disc, poly) = if is_disc(space, a) { (a, b) } else { (b, a) };
            let (center, radius) = match disc.shape() {
                Shape::Ball { center, radius, .. } => (center, *radius),
                _ => unreachable!(),
            };
            if poly.closure_contains_unchecked(space, center) {
                return true;
            }
            let v = poly.outline_2d(space, 0);
            let n = v.len();
            (0..n).any(|k| seg_dist_point(center, &v[k], &v[(k + 1) % n]) <= radius + tol)
        }
        (false, false) => {
            let va = a.outline_2d(space, 0);
            let vb = b.outline_2d(space, 0);
            if va.iter().any(|p| b.closure_contains_unchecked(space, p))
                || vb.iter().any(|p| a.closure_contains_unchecked(space, p))
            {
                return true;
            }
            let (na, nb) = (va.len(), vb.len());
            (0..na).any(|i| {
                (0..nb).any(|j| segments_meet(&va[i], &va[(i + 1) % na], &vb[j], &vb[(j + 1) % nb], tol))
            })
        }
    }
}

fn sampled_meet(space: &Space, a: &MorseSet, b: &MorseSet, tol: f64) -> Intersection {
    let ra = a.outer_radius(space);
    let rb = b.outer_radius(space);
    if space.dist(a.tag(), b.tag()) > ra + rb + tol {
        return Intersection::Exact(false);
    }
    if a.contains_unchecked(space, b.tag()) || b.contains_unchecked(space, a.tag()) {
        return Intersection::Exact(true);
    }
    let ratio = ra.max(rb) / a.inner_radius().min(b.inner_radius());
    let n = (64.0 * ratio.powi(space.dim() as i32 - 1)).clamp(64.0, 4096.0) as usize;
    let dirs = directions(space.dim(), n);
    for (s, t) in [(a, b), (b, a)] {
        for u in &dirs {
            let ext = s.radial_extent(space, u);
            for depth in [1.0, 0.75, 0.5, 0.25] {
                let p = s.tag().axpy(ext * depth, u);
                if t.contains_unchecked(space, &p) && s.contains_unchecked(space, &p) {
                    return Intersection::Sampled(true);
                }
            }
        }
    }
    Intersection::Sampled(false)
}

/// Liang-Barsky test: the closed segment `pq` meets the closed 2D box.
fn segment_meets_box(p: &[f64], q: &[f64], b: &AaBox) -> bool {
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for i in 0..2 {
        let d = q[i] - p[i];
        if d == 0.0 {
            if p[i] < b.lo[i] || p[i] > b.hi[i] {
                return false;
            }
        } else {
            let mut ta = (b.lo[i] - p[i]) / d;
            let mut tb = (b.hi[i] - p[i]) / d;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Classify a closed box against a set's closure.
///
/// `Inside` and `Outside` are certain; `Partial` means undecided.
pub fn box_relation(space: &Space, s: &MorseSet, b: &AaBox) -> BoxRelation {
    let hull = s.bounding_box(space);
    if hull.intersect(b).is_none() {
        return BoxRelation::Outside;
    }
    match s.shape() {
        Shape::Ball { center, radius, .. } => {
            if space.box_nearest(center, b).0 > *radius {
                BoxRelation::Outside
            } else if space.box_farthest(center, b) <= *radius {
                BoxRelation::Inside
            } else {
                BoxRelation::Partial
            }
        }
        Shape::Interval { .. } => {
            if hull.contains_box(b) {
                BoxRelation::Inside
            } else {
                BoxRelation::Partial
            }
        }
        Shape::Polytope { template, scale } => {
            let rel: Vec<Point> = b.corners().map(|c| c.sub(s.tag()).scale(1.0 / scale)).collect();
            if template.is_convex() {
                let sep = template
                    .facets()
                    .iter()
                    .any(|(n, h)| rel.iter().all(|c| c.iter().zip(n.iter()).map(|(x, y)| x * y).sum::<f64>() > *h));
                if sep {
                    return BoxRelation::Outside;
                }
                if rel.iter().all(|c| template.boundary_gap(c) >= 0.0) {
                    return BoxRelation::Inside;
                }
                return BoxRelation::Partial;
            }
            // Non-convex star polygon.
            let v = s.outline_2d(space, 0);
            let n = v.len();
            let edge_hits = (0..n).any(|k| segment_meets_box(&v[k], &v[(k + 1) % n], b));
            let corners_in = rel.iter().filter(|c| template.boundary_gap(c) >= 0.0).count();
            if !edge_hits {
                if corners_in == rel.len() {
                    return BoxRelation::Inside;
                }
                if corners_in == 0 && !b.contains(s.tag()) {
                    return BoxRelation::Outside;
                }
            }
            BoxRelation::Partial
        }
    }
}

/// Whether the closure of `s` may meet the closed box (never a false negative).
pub fn set_box_intersects(space: &Space, s: &MorseSet, b: &AaBox) -> bool {
    box_relation(space, s, b) != BoxRelation::Outside
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2() -> Space {
        Space::euclidean(2)
    }

    fn ball(c: [f64; 2], r: f64) -> MorseSet {
        MorseSet::closed_ball(&l2(), Point::from(c), r).unwrap()
    }

    fn unit_box(lo: [f64; 2], closed: bool) -> MorseSet {
        let s = MorseSet::tagged_interval(
            &l2(),
            Point::from(lo),
            Point::from([1.0, 1.0]),
            Point::from([0.5, 0.5]),
            None,
        )
        .unwrap();
        if closed {
            s.closure()
        } else {
            s
        }
    }

    #[test]
    fn touching_closed_balls_meet() {
        assert_eq!(sets_intersect(&l2(), &ball([0.0, 0.0], 1.0), &ball([2.0, 0.0], 1.0)), Intersection::Exact(true));
        assert_eq!(sets_intersect(&l2(), &ball([0.0, 0.0], 1.0), &ball([5.0, 0.0], 1.0)), Intersection::Exact(false));
        let open = MorseSet::open_ball_tagged(&l2(), Point::from([2.0, 0.0]), 1.0, Point::from([0.0, 0.0])).unwrap();
        assert!(!sets_intersect(&l2(), &ball([0.0, 0.0], 1.0), &open).intersects());
    }

    #[test]
    fn half_open_boxes_share_faces_correctly() {
        // (0,1]^2 and (1,2]x(0,1] are disjoint; their closures touch.
        let a = unit_box([0.0, 0.0], false);
        let b = unit_box([1.0, 0.0], false);
        assert_eq!(sets_intersect(&l2(), &a, &b), Intersection::Exact(false));
        assert_eq!(sets_intersect(&l2(), &b, &a), Intersection::Exact(false));
        assert!(sets_intersect(&l2(), &a.closure(), &b.closure()).intersects());
        // The upper face of a is closed, and b's closure includes its lower face.
        assert!(sets_intersect(&l2(), &a, &b.closure()).intersects());
        assert!(!sets_intersect(&l2(), &a.closure(), &b).intersects());
    }

    #[test]
    fn disc_against_box() {
        let b = unit_box([1.0, 1.0], true);
        assert!(sets_intersect(&l2(), &ball([0.0, 0.0], 1.5), &b).intersects());
        assert!(!sets_intersect(&l2(), &ball([0.0, 0.0], 1.4), &b).intersects());
        // Tangent at the closed corner.
        assert!(sets_intersect(&l2(), &ball([0.0, 0.0], 2f64.sqrt()), &b).intersects());
        // Tangent at an excluded corner of a half-open box.
        assert!(!sets_intersect(&l2(), &ball([0.0, 0.0], 2f64.sqrt()), &unit_box([1.0, 1.0], false)).intersects());
    }

    #[test]
    fn star_polygons_interlock_without_meeting() {
        let tri = |c: [f64; 2], s: f64| {
            let v = [[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]]
                .map(|p| Point::from([c[0] + s * p[0], c[1] + s * p[1]]));
            MorseSet::star_polygon(&l2(), Point::from(c), 0.1, &v, None).unwrap()
        };
        let a = tri([0.0, 0.0], 1.0);
        assert!(sets_intersect(&l2(), &a, &tri([1.2, 0.0], 1.0)).intersects());
        assert!(!sets_intersect(&l2(), &a, &tri([3.0, 0.0], 1.0)).intersects());
        assert!(sets_intersect(&l2(), &a, &ball([1.5, 0.0], 0.6)).intersects());
        assert!(!sets_intersect(&l2(), &a, &ball([1.5, 0.0], 0.4)).intersects());
    }

    #[test]
    fn sampled_pairs_in_three_dimensions() {
        let s3 = Space::euclidean(3);
        let hs = (0..3)
            .flat_map(|i| [1.0, -1.0].map(|s| (Point::axis(3, i, s), 1.0)))
            .collect();
        let cube = std::sync::Arc::new(crate::geometry::PolytopeTemplate::convex_from_halfspaces(3, hs).unwrap());
        let a = MorseSet::star_polytope(&s3, Point::from([0.0, 0.0, 0.0]), 1.0, cube.clone(), 1.0, None).unwrap();
        let near = MorseSet::closed_ball(&s3, Point::from([1.5, 0.0, 0.0]), 0.6).unwrap();
        let far = MorseSet::closed_ball(&s3, Point::from([3.0, 0.0, 0.0]), 0.6).unwrap();
        assert!(sets_intersect(&s3, &a, &near).intersects());
        assert_eq!(sets_intersect(&s3, &a, &far), Intersection::Exact(false));
    }

    #[test]
    fn box_relation_for_balls() {
        let b = ball([0.0, 0.0], 1.0);
        let inner = AaBox::cube(&[0.0, 0.0], 0.5);
        let outer = AaBox::cube(&[3.0, 0.0], 0.5);
        let cross = AaBox::cube(&[1.0, 0.0], 0.5);
        assert_eq!(box_relation(&l2(), &b, &inner), BoxRelation::Inside);
        assert_eq!(box_relation(&l2(), &b, &outer), BoxRelation::Outside);
        assert_eq!(box_relation(&l2(), &b, &cross), BoxRelation::Partial);
    }
}

//! Lebesgue volumes of sets intersected with boxes: closed forms where
//! available, certified dyadic quadrature otherwise.

use crate::geometry::{box_relation, AaBox, BoxRelation, MorseSet, Norm, Point, Shape, Space};

/// A value with an absolute error bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub err: f64,
}

impl Measured {
    pub fn exact(value: f64) -> Self {
        Measured { value, err: 0.0 }
    }

    pub fn scaled(self, c: f64) -> Self {
        Measured { value: c * self.value, err: c.abs() * self.err }
    }
}

impl std::ops::Add for Measured {
    type Output = Measured;
    fn add(self, o: Measured) -> Measured {
        Measured { value: self.value + o.value, err: self.err + o.err }
    }
}

impl std::ops::AddAssign for Measured {
    fn add_assign(&mut self, o: Measured) {
        self.value += o.value;
        self.err += o.err;
    }
}

impl std::iter::Sum for Measured {
    fn sum<I: Iterator<Item = Measured>>(iter: I) -> Measured {
        iter.fold(Measured::default(), |a, b| a + b)
    }
}

/// Full Lebesgue volume of a set, when a closed form exists.
pub fn set_volume(space: &Space, s: &MorseSet) -> Option<f64> {
    match s.shape() {
        Shape::Ball { radius, .. } => Some(space.unit_ball_volume() * radius.powi(space.dim() as i32)),
        Shape::Interval { edges, .. } => Some(edges.iter().product()),
        Shape::Polytope { template, scale } if space.dim() == 2 => Some(scale * scale * template.area_2d()),
        Shape::Polytope { .. } => None,
    }
}

/// Lebesgue volume of `s ∩ b` in closed form, or `None` when no exact path applies.
pub fn set_box_volume(space: &Space, s: &MorseSet, b: &AaBox) -> Option<f64> {
    let hull = s.bounding_box(space);
    let Some(clip) = hull.intersect(b) else {
        return Some(0.0);
    };
    let boxy = matches!(s.shape(), Shape::Interval { .. })
        || (matches!(s.shape(), Shape::Ball { .. }) && space.norm().balls_are_boxes(space.dim()));
    if boxy {
        return Some(clip.volume());
    }
    if b.contains_box(&hull) {
        if let Some(v) = set_volume(space, s) {
            return Some(v);
        }
    }
    match box_relation(space, s, b) {
        BoxRelation::Outside => return Some(0.0),
        BoxRelation::Inside => return Some(b.volume()),
        BoxRelation::Partial => {}
    }
    if space.dim() != 2 {
        return None;
    }
    match (s.shape(), space.norm()) {
        (Shape::Ball { center, radius, .. }, Norm::L2) => Some(disc_rect_area(center[0], center[1], *radius, &clip)),
        _ => Some(polygon_area(&clip_polygon(&s.outline_2d(space, 0), &clip))),
    }
}

fn disc_strip_integral(r: f64, u: f64) -> f64 {
    let u = u.clamp(-r, r);
    0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).asin())
}

/// Area of the Euclidean disc `B((cx, cy), r)` intersected with a rectangle,
/// integrated piecewise in closed form.
pub fn disc_rect_area(cx: f64, cy: f64, r: f64, b: &AaBox) -> f64 {
    let xa = b.lo[0].max(cx - r);
    let xb = b.hi[0].min(cx + r);
    if xa >= xb {
        return 0.0;
    }
    let mut breaks = vec![xa, xb];
    for t in [b.lo[1] - cy, b.hi[1] - cy] {
        if t.abs() < r {
            let w = (r * r - t * t).sqrt();
            for x in [cx - w, cx + w] {
                if x > xa && x < xb {
                    breaks.push(x);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let h = |x: f64| (r * r - (x - cx) * (x - cx)).max(0.0).sqrt();
    let mut area = 0.0;
    for w in breaks.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        let m = 0.5 * (x0 + x1);
        let hm = h(m);
        let top_curve = cy + hm < b.hi[1];
        let bot_curve = cy - hm > b.lo[1];
        let top_m = if top_curve { cy + hm } else { b.hi[1] };
        let bot_m = if bot_curve { cy - hm } else { b.lo[1] };
        if top_m <= bot_m {
            continue;
        }
        let dx = x1 - x0;
        let ih = disc_strip_integral(r, x1 - cx) - disc_strip_integral(r, x0 - cx);
        let top = if top_curve { cy * dx + ih } else { b.hi[1] * dx };
        let bot = if bot_curve { cy * dx - ih } else { b.lo[1] * dx };
        area += top - bot;
    }
    area.max(0.0)
}

/// Sutherland-Hodgman clipping of a polygon against a rectangle.
pub fn clip_polygon(poly: &[Point], b: &AaBox) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = poly.iter().map(|p| [p[0], p[1]]).collect();
    // (axis, bound, keep_below)
    let edges = [(0, b.lo[0], false), (0, b.hi[0], true), (1, b.lo[1], false), (1, b.hi[1], true)];
    for (axis, bound, below) in edges {
        if pts.is_empty() {
            break;
        }
        let inside = |p: &[f64; 2]| if below { p[axis] <= bound } else { p[axis] >= bound };
        let mut out = Vec::with_capacity(pts.len() + 4);
        for k in 0..pts.len() {
            let cur = pts[k];
            let prev = pts[(k + pts.len() - 1) % pts.len()];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                let mut q = [prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])];
                q[axis] = bound;
                out.push(q);
            }
            if ci {
                out.push(cur);
            }
        }
        pts = out;
    }
    pts
}

/// Shoelace area (absolute value).
pub fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice.abs()
}

/// Default cap on cells examined per quadrature level.
pub const QUAD_MAX_CELLS: usize = 1 << 18;

/// Dyadic quadrature of the volume of `{classify = Inside}` within `domain`.
///
/// Inside cells count fully, outside cells not at all, and undecided cells
/// contribute half their volume with the other half booked as error. Stops
/// once the error is below `max(abs_tol, rel_tol * value)` or the cell cap
/// is reached.
pub fn quadrature<F>(domain: &AaBox, classify: F, abs_tol: f64, rel_tol: f64, max_cells: usize) -> Measured
where
    F: Fn(&AaBox) -> BoxRelation,
{
    let mut inside = 0.0;
    let mut frontier = vec![domain.clone()];
    let branching = 1usize << domain.dim();
    loop {
        let mut partial = Vec::new();
        for c in frontier.drain(..) {
            match classify(&c) {
                BoxRelation::Inside => inside += c.volume(),
                BoxRelation::Outside => {}
                BoxRelation::Partial => partial.push(c),
            }
        }
        let pv: f64 = partial.iter().map(|c| c.volume()).sum();
        let value = inside + 0.5 * pv;
        let err = 0.5 * pv;
        if err <= abs_tol.max(rel_tol * value) || partial.is_empty() || partial.len() * branching > max_cells {
            return Measured { value, err };
        }
        frontier = partial.iter().flat_map(|c| c.children().collect::<Vec<_>>()).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn disc_rectangle_cases() {
        let unit = AaBox::cube(&[0.0, 0.0], 2.0);
        assert_relative_eq!(disc_rect_area(0.0, 0.0, 1.0, &unit), PI, epsilon = 1e-14);
        let quarter = AaBox { lo: Point::from([0.0, 0.0]), hi: Point::from([2.0, 2.0]) };
        assert_relative_eq!(disc_rect_area(0.0, 0.0, 1.0, &quarter), PI / 4.0, epsilon = 1e-14);
        let strip = AaBox { lo: Point::from([-2.0, 0.5]), hi: Point::from([2.0, 2.0]) };
        // circular segment above y = 1/2
        let seg = PI / 3.0 - 0.5 * (3f64).sqrt() / 2.0;
        assert_relative_eq!(disc_rect_area(0.0, 0.0, 1.0, &strip), seg, epsilon = 1e-14);
        let inner = AaBox::cube(&[0.0, 0.0], 0.5);
        assert_relative_eq!(disc_rect_area(0.0, 0.0, 1.0, &inner), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn disc_area_matches_quadrature() {
        let sp = Space::euclidean(2);
        let s = MorseSet::closed_ball(&sp, Point::from([0.3, 0.2]), 0.7).unwrap();
        let b = AaBox { lo: Point::from([0.0, 0.0]), hi: Point::from([1.0, 0.5]) };
        let exact = set_box_volume(&sp, &s, &b).unwrap();
        let q = quadrature(&b, |c| box_relation(&sp, &s, c), 1e-7, 0.0, 1 << 22);
        assert!((q.value - exact).abs() <= q.err + 1e-12, "{exact} vs {q:?}");
    }

    #[test]
    fn clipped_square_and_star() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]].map(Point::from);
        let b = AaBox::cube(&[2.0, 2.0], 1.0);
        assert_relative_eq!(polygon_area(&clip_polygon(&sq, &b)), 1.0);
        let sp = Space::euclidean(2);
        let star: Vec<Point> = (0..10)
            .map(|k| {
                let t = PI * k as f64 / 5.0;
                let r = if k % 2 == 0 { 1.0 } else { 0.4 };
                Point::from([r * t.cos(), r * t.sin()])
            })
            .collect();
        let s = MorseSet::star_polygon(&sp, Point::from([0.0, 0.0]), 0.3, &star, None).unwrap();
        let half = AaBox { lo: Point::from([0.0, -2.0]), hi: Point::from([2.0, 2.0]) };
        let exact = set_box_volume(&sp, &s, &half).unwrap();
        let q = quadrature(&half, |c| box_relation(&sp, &s, c), 1e-6, 0.0, 1 << 22);
        assert!((q.value - exact).abs() <= q.err + 1e-12, "{exact} vs {q:?}");
    }

    #[test]
    fn l1_ball_volume() {
        let sp = Space::new(2, Norm::L1).unwrap();
        let s = MorseSet::closed_ball(&sp, Point::from([0.0, 0.0]), 1.0).unwrap();
        assert_relative_eq!(set_volume(&sp, &s).unwrap(), 2.0);
        let half = AaBox { lo: Point::from([0.0, -2.0]), hi: Point::from([2.0, 2.0]) };
        assert_relative_eq!(set_box_volume(&sp, &s, &half).unwrap(), 1.0, epsilon = 1e-14);
    }
}

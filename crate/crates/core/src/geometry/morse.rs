use std::sync::Arc;

use super::{AaBox, Point, PolytopeTemplate, Space};
use crate::error::{Error, Result};

/// Relative tolerance for geometric predicates; comparisons are made against
/// `GEOM_TOL * r` where `r` is the set's inner radius.
pub const GEOM_TOL: f64 = 1e-9;

/// Concrete shape of a [`MorseSet`].
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Norm ball; the tag may sit anywhere in its interior.
    Ball { center: Point, radius: f64, closed: bool },
    /// `{anchor + t : 0 < t_i <= edges_i}`, or its closure when `closed`.
    Interval { anchor: Point, edges: Point, closed: bool },
    /// Closed star polygon (2D) or convex polytope (d >= 3):
    /// `tag + scale * template`.
    Polytope { template: Arc<PolytopeTemplate>, scale: f64 },
}

/// A tagged set `S` with `B(tag, r) ⊆ S ⊆ B(tag, lambda * r)` that is starlike
/// with respect to every point of `B(tag, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MorseSet {
    tag: Point,
    r: f64,
    lambda: f64,
    shape: Shape,
}

fn check_radius(r: f64, what: &str) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::input(format!("{what} must be positive and finite, got {r}")));
    }
    Ok(())
}

fn resolve_lambda(given: Option<f64>, minimal: f64, certified: bool) -> Result<f64> {
    match given {
        None => Ok(minimal.max(1.0)),
        Some(l) if !(l >= 1.0 && l.is_finite()) => {
            Err(Error::input(format!("lambda must be a finite value >= 1, got {l}")))
        }
        Some(l) if certified && l < minimal * (1.0 - 1e-12) => Err(Error::input(format!(
            "lambda {l} is below the smallest value {minimal} this shape admits"
        ))),
        Some(l) => Ok(l),
    }
}

impl MorseSet {
    /// Closed ball tagged at its center (lambda = 1).
    pub fn closed_ball(space: &Space, center: Point, radius: f64) -> Result<Self> {
        space.check(&center)?;
        check_radius(radius, "radius")?;
        Ok(MorseSet {
            tag: center.clone(),
            r: radius,
            lambda: 1.0,
            shape: Shape::Ball { center, radius, closed: true },
        })
    }

    /// Open or closed ball with the tag at `tag`, which must lie in the interior.
    ///
    /// The inner radius is `radius - ||tag - center||` and the smallest
    /// admissible lambda is `(1 + w) / (1 - w)` with `w = ||tag - center|| / radius`.
    pub fn tagged_ball(
        space: &Space,
        center: Point,
        radius: f64,
        tag: Point,
        closed: bool,
        lambda: Option<f64>,
    ) -> Result<Self> {
        space.check(&center)?;
        space.check(&tag)?;
        check_radius(radius, "radius")?;
        let offset = space.dist(&tag, &center);
        let r = radius - offset;
        if !(r > 0.0) {
            return Err(Error::input("tag must lie in the interior of the ball"));
        }
        let lambda = resolve_lambda(lambda, (radius + offset) / r, true)?;
        Ok(MorseSet { tag, r, lambda, shape: Shape::Ball { center, radius, closed } })
    }

    /// Open ball tagged at `center + offset`.
    pub fn open_ball_tagged(space: &Space, center: Point, radius: f64, offset: Point) -> Result<Self> {
        space.check(&offset)?;
        let tag = center.add(&offset);
        Self::tagged_ball(space, center, radius, tag, false, None)
    }

    /// Tagged interval `I(a, b, c)`: half-open box `{a + t : 0 < t_i <= b_i}`
    /// tagged at `a + b * c`, with `c_i > 0` and `sum c_i^2 < 1`.
    pub fn tagged_interval(
        space: &Space,
        anchor: Point,
        edges: Point,
        fraction: Point,
        lambda: Option<f64>,
    ) -> Result<Self> {
        space.check(&anchor)?;
        space.check(&edges)?;
        space.check(&fraction)?;
        for b in edges.iter() {
            check_radius(*b, "edge length")?;
        }
        if fraction.iter().any(|c| !(*c > 0.0)) || fraction.iter().map(|c| c * c).sum::<f64>() >= 1.0 {
            return Err(Error::input("tag fraction needs c_i > 0 and sum of c_i^2 < 1"));
        }
        let tag = Point::new(
            anchor.iter().zip(edges.iter()).zip(fraction.iter()).map(|((a, b), c)| a + b * c),
        );
        let shape = Shape::Interval { anchor, edges, closed: false };
        let r = (0..space.dim())
            .map(|i| {
                let (a, b) = match &shape {
                    Shape::Interval { anchor, edges, .. } => (anchor[i], edges[i]),
                    _ => unreachable!(),
                };
                (tag[i] - a).min(a + b - tag[i]) / space.norm().axis_extent(i)
            })
            .fold(f64::INFINITY, f64::min);
        check_radius(r, "inner radius")?;
        let mut set = MorseSet { tag, r, lambda: 1.0, shape };
        let minimal = set.outer_radius(space) / r;
        set.lambda = resolve_lambda(lambda, minimal, true)?;
        Ok(set)
    }

    /// Star polytope `center + scale * template` with kernel ball radius
    /// `kernel_radius`. Lambda defaults to the smallest value consistent with
    /// the vertices; kernel containment is checked by [`validate_morse`].
    ///
    /// [`validate_morse`]: super::validate_morse
    pub fn star_polytope(
        space: &Space,
        center: Point,
        kernel_radius: f64,
        template: Arc<PolytopeTemplate>,
        scale: f64,
        lambda: Option<f64>,
    ) -> Result<Self> {
        space.check(&center)?;
        if template.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: template.dim() });
        }
        check_radius(kernel_radius, "kernel radius")?;
        check_radius(scale, "scale")?;
        let minimal = scale * template.outer_radius(space) / kernel_radius;
        let lambda = resolve_lambda(lambda, minimal, false)?;
        Ok(MorseSet {
            tag: center,
            r: kernel_radius,
            lambda,
            shape: Shape::Polytope { template, scale },
        })
    }

    /// Star polygon from absolute vertex coordinates.
    pub fn star_polygon(
        space: &Space,
        center: Point,
        kernel_radius: f64,
        vertices: &[Point],
        lambda: Option<f64>,
    ) -> Result<Self> {
        if space.dim() != 2 {
            return Err(Error::input("star polygons live in dimension 2"));
        }
        space.check(&center)?;
        for v in vertices {
            space.check(v)?;
        }
        let rel = vertices.iter().map(|v| v.sub(&center)).collect();
        let template = Arc::new(PolytopeTemplate::star_polygon(rel)?);
        Self::star_polytope(space, center, kernel_radius, template, 1.0, lambda)
    }

    pub fn tag(&self) -> &Point {
        &self.tag
    }

    pub fn inner_radius(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.tag.dim()
    }

    /// Replace lambda; it must stay admissible for balls and intervals.
    pub fn with_lambda(mut self, space: &Space, lambda: f64) -> Result<Self> {
        let minimal = self.outer_radius(space) / self.r;
        let certified = !matches!(self.shape, Shape::Polytope { .. });
        self.lambda = resolve_lambda(Some(lambda), minimal, certified)?;
        Ok(self)
    }

    pub fn kind(&self) -> &'static str {
        match &self.shape {
            Shape::Ball { closed: true, .. } => "closed_ball",
            Shape::Ball { closed: false, .. } => "open_ball",
            Shape::Interval { .. } => "tagged_interval",
            Shape::Polytope { .. } => "star_polytope",
        }
    }

    pub fn is_closed(&self) -> bool {
        match &self.shape {
            Shape::Ball { closed, .. } | Shape::Interval { closed, .. } => *closed,
            Shape::Polytope { .. } => true,
        }
    }

    fn tol(&self) -> f64 {
        GEOM_TOL * self.r
    }

    /// Signed clearance of `x` from the boundary: positive inside, in length units.
    fn clearance(&self, space: &Space, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius, .. } => radius - space.dist(x, center),
            Shape::Interval { anchor, edges, .. } => (0..x.len())
                .map(|i| {
                    let t = x[i] - anchor[i];
                    t.min(edges[i] - t)
                })
                .fold(f64::INFINITY, f64::min),
            Shape::Polytope { template, scale } => {
                let v: Vec<f64> = x.iter().zip(self.tag.iter()).map(|(a, b)| (a - b) / scale).collect();
                scale * template.boundary_gap(&v)
            }
        }
    }

    pub(crate) fn contains_unchecked(&self, space: &Space, x: &[f64]) -> bool {
        let tol = self.tol();
        match &self.shape {
            Shape::Ball { center, radius, closed } => {
                let d = space.dist(x, center);
                if *closed {
                    d <= radius + tol
                } else {
                    d < radius - tol
                }
            }
            Shape::Interval { anchor, edges, closed } => (0..x.len()).all(|i| {
                let t = x[i] - anchor[i];
                let lower = if *closed { t >= -tol } else { t > tol };
                lower && t <= edges[i] + tol
            }),
            Shape::Polytope { .. } => self.clearance(space, x) >= -tol,
        }
    }

    pub(crate) fn interior_contains_unchecked(&self, space: &Space, x: &[f64]) -> bool {
        self.clearance(space, x) > self.tol()
    }

    pub(crate) fn closure_contains_unchecked(&self, space: &Space, x: &[f64]) -> bool {
        self.clearance(space, x) >= -self.tol()
    }

    /// Membership, respecting open and closed faces.
    pub fn contains(&self, space: &Space, x: &[f64]) -> Result<bool> {
        space.check(x)?;
        Ok(self.contains_unchecked(space, x))
    }

    pub fn interior_contains(&self, space: &Space, x: &[f64]) -> Result<bool> {
        space.check(x)?;
        Ok(self.interior_contains_unchecked(space, x))
    }

    pub fn closure_contains(&self, space: &Space, x: &[f64]) -> Result<bool> {
        space.check(x)?;
        Ok(self.closure_contains_unchecked(space, x))
    }

    /// `alpha * y + (1 - alpha) * x`, checked to lie in the interior whenever
    /// `||y - tag|| < r` and `x` is in the closure.
    pub fn segment_interior(&self, space: &Space, y: &Point, x: &Point, alpha: f64) -> Result<Point> {
        space.check(y)?;
        space.check(x)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::contract(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(space.dist(y, &self.tag) < self.r) {
            return Err(Error::contract("y must lie in the open kernel ball B(tag, r)"));
        }
        if !self.closure_contains_unchecked(space, x) {
            return Err(Error::contract("x must lie in the closure of the set"));
        }
        let p = Point::affine(y, x, alpha);
        if !self.interior_contains_unchecked(space, &p) {
            return Err(Error::contract(format!("segment point {:?} is not interior", p.coords())));
        }
        Ok(p)
    }

    /// Scaling about the tag by any positive factor.
    pub(crate) fn rescaled(&self, f: f64) -> MorseSet {
        let shape = match &self.shape {
            Shape::Ball { center, radius, closed } => Shape::Ball {
                center: self.tag.axpy(f, &center.sub(&self.tag)),
                radius: radius * f,
                closed: *closed,
            },
            Shape::Interval { anchor, edges, closed } => Shape::Interval {
                anchor: self.tag.axpy(f, &anchor.sub(&self.tag)),
                edges: edges.scale(f),
                closed: *closed,
            },
            Shape::Polytope { template, scale } => {
                Shape::Polytope { template: Arc::clone(template), scale: scale * f }
            }
        };
        MorseSet { tag: self.tag.clone(), r: self.r * f, lambda: self.lambda, shape }
    }

    /// `S^(p) = {a + p x : a + x in S}` for `0 < p <= 1`.
    pub fn scaled(&self, p: f64) -> Result<MorseSet> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::input(format!("scale factor must lie in (0, 1], got {p}")));
        }
        Ok(self.rescaled(p))
    }

    /// The same set moved by `offset`.
    pub fn translated(&self, offset: &[f64]) -> MorseSet {
        let shape = match &self.shape {
            Shape::Ball { center, radius, closed } => {
                Shape::Ball { center: center.add(offset), radius: *radius, closed: *closed }
            }
            Shape::Interval { anchor, edges, closed } => {
                Shape::Interval { anchor: anchor.add(offset), edges: edges.clone(), closed: *closed }
            }
            Shape::Polytope { .. } => self.shape.clone(),
        };
        MorseSet { tag: self.tag.add(offset), r: self.r, lambda: self.lambda, shape }
    }

    /// Closure; closed balls, closed boxes and polytopes are returned unchanged.
    pub fn closure(&self) -> MorseSet {
        let mut s = self.clone();
        match &mut s.shape {
            Shape::Ball { closed, .. } | Shape::Interval { closed, .. } => *closed = true,
            Shape::Polytope { .. } => {}
        }
        s
    }

    /// Supremum of pairwise norm distances.
    pub fn diameter(&self, space: &Space) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Interval { edges, .. } => space.norm().eval(edges),
            Shape::Polytope { template, scale } => scale * template.diameter(space),
        }
    }

    /// `sup { ||x - tag|| : x in S }`.
    pub fn outer_radius(&self, space: &Space) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius, .. } => radius + space.dist(center, &self.tag),
            Shape::Interval { .. } => {
                let b = self.bounding_box(space);
                space.box_farthest(&self.tag, &b)
            }
            Shape::Polytope { template, scale } => scale * template.outer_radius(space),
        }
    }

    /// Smallest lambda consistent with the stored inner radius.
    pub fn min_lambda(&self, space: &Space) -> f64 {
        self.outer_radius(space) / self.r
    }

    pub fn is_delta_fine(&self, delta: f64) -> bool {
        self.lambda * self.r <= delta * (1.0 + 1e-12)
    }

    /// The closure as a box, when the set is one: max-norm balls, balls on
    /// the line, and intervals.
    pub fn as_box(&self, space: &Space) -> Option<AaBox> {
        let boxy = match &self.shape {
            Shape::Ball { .. } => space.norm().balls_are_boxes(space.dim()),
            Shape::Interval { .. } => true,
            Shape::Polytope { .. } => false,
        };
        boxy.then(|| self.bounding_box(space))
    }

    pub fn bounding_box(&self, space: &Space) -> AaBox {
        match &self.shape {
            Shape::Ball { center, radius, .. } => AaBox::around(center, &space.ball_half_widths(*radius)),
            Shape::Interval { anchor, edges, .. } => AaBox { lo: anchor.clone(), hi: anchor.add(edges) },
            Shape::Polytope { template, scale } => {
                let b = template.bounds();
                AaBox { lo: self.tag.axpy(*scale, &b.lo), hi: self.tag.axpy(*scale, &b.hi) }
            }
        }
    }

    /// `t >= 0` with `tag + t * u` on the boundary, for a nonzero vector `u`.
    pub fn radial_extent(&self, space: &Space, u: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius, .. } => {
                let w = self.tag.sub(center);
                if matches!(space.norm(), super::Norm::L2) {
                    let a: f64 = u.iter().map(|v| v * v).sum();
                    let b: f64 = 2.0 * u.iter().zip(w.iter()).map(|(x, y)| x * y).sum::<f64>();
                    let c: f64 = w.iter().map(|v| v * v).sum::<f64>() - radius * radius;
                    return (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a);
                }
                let mut lo = 0.0;
                let mut hi = (radius + space.norm().eval(&w)) / space.norm().eval(u);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if space.norm().eval(&w.axpy(mid, u)) <= *radius {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
            Shape::Interval { anchor, edges, .. } => (0..u.len())
                .filter(|&i| u[i] != 0.0)
                .map(|i| {
                    let face = if u[i] > 0.0 { anchor[i] + edges[i] } else { anchor[i] };
                    (face - self.tag[i]) / u[i]
                })
                .fold(f64::INFINITY, f64::min),
            Shape::Polytope { template, scale } => scale * template.radial(u),
        }
    }

    pub fn boundary_point(&self, space: &Space, u: &[f64]) -> Point {
        self.tag.axpy(self.radial_extent(space, u), u)
    }

    /// Shape equality up to relative tolerance `rel` on every stored number.
    pub fn approx_eq(&self, other: &MorseSet, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()));
        let close_pts = |a: &Point, b: &Point| a.dim() == b.dim() && a.iter().zip(b.iter()).all(|(x, y)| close(*x, *y));
        if !(close_pts(&self.tag, &other.tag) && close(self.r, other.r) && close(self.lambda, other.lambda)) {
            return false;
        }
        match (&self.shape, &other.shape) {
            (
                Shape::Ball { center: c1, radius: r1, closed: k1 },
                Shape::Ball { center: c2, radius: r2, closed: k2 },
            ) => k1 == k2 && close(*r1, *r2) && close_pts(c1, c2),
            (
                Shape::Interval { anchor: a1, edges: e1, closed: k1 },
                Shape::Interval { anchor: a2, edges: e2, closed: k2 },
            ) => k1 == k2 && close_pts(a1, a2) && close_pts(e1, e2),
            (
                Shape::Polytope { template: t1, scale: s1 },
                Shape::Polytope { template: t2, scale: s2 },
            ) => (Arc::ptr_eq(t1, t2) || t1 == t2) && close(*s1, *s2),
            _ => false,
        }
    }

    /// Vertices of a 2D outline: polygon vertices, box corners or a
    /// sampled boundary with `n` points for round balls.
    pub fn outline_2d(&self, space: &Space, n: usize) -> Vec<Point> {
        match &self.shape {
            Shape::Polytope { template, scale } => {
                template.vertices().iter().map(|v| self.tag.axpy(*scale, v)).collect()
            }
            Shape::Interval { anchor, edges, .. } => vec![
                anchor.clone(),
                Point::from([anchor[0] + edges[0], anchor[1]]),
                anchor.add(edges),
                Point::from([anchor[0], anchor[1] + edges[1]]),
            ],
            Shape::Ball { center, radius, .. } => {
                let hw = space.ball_half_widths(*radius);
                match space.norm() {
                    super::Norm::L2 => (0..n)
                        .map(|k| {
                            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                            Point::from([center[0] + radius * t.cos(), center[1] + radius * t.sin()])
                        })
                        .collect(),
                    super::Norm::L1 => vec![
                        Point::from([center[0] + hw[0], center[1]]),
                        Point::from([center[0], center[1] + hw[1]]),
                        Point::from([center[0] - hw[0], center[1]]),
                        Point::from([center[0], center[1] - hw[1]]),
                    ],
                    _ => vec![
                        Point::from([center[0] - hw[0], center[1] - hw[1]]),
                        Point::from([center[0] + hw[0], center[1] - hw[1]]),
                        Point::from([center[0] + hw[0], center[1] + hw[1]]),
                        Point::from([center[0] - hw[0], center[1] + hw[1]]),
                    ],
                }
            }
        }
    }
}

pub fn morse_contains(space: &Space, s: &MorseSet, x: &Point) -> Result<bool> {
    s.contains(space, x)
}

pub fn interior_contains(space: &Space, s: &MorseSet, x: &Point) -> Result<bool> {
    s.interior_contains(space, x)
}

pub fn segment_interior(space: &Space, s: &MorseSet, y: &Point, x: &Point, alpha: f64) -> Result<Point> {
    s.segment_interior(space, y, x, alpha)
}

pub fn morse_scale(s: &MorseSet, p: f64) -> Result<MorseSet> {
    s.scaled(p)
}

pub fn morse_diameter(space: &Space, s: &MorseSet) -> f64 {
    s.diameter(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;
    use approx::assert_relative_eq;

    fn l2() -> Space {
        Space::euclidean(2)
    }

    fn star5(space: &Space) -> MorseSet {
        let v: Vec<Point> = (0..10)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k as f64 / 5.0;
                let r = if k % 2 == 0 { 1.0 } else { 0.45 };
                Point::from([r * t.cos(), r * t.sin()])
            })
            .collect();
        MorseSet::star_polygon(space, Point::from([0.0, 0.0]), 0.3, &v, None).unwrap()
    }

    #[test]
    fn closed_ball_boundary_and_interior() {
        let s = MorseSet::closed_ball(&l2(), Point::from([0.0, 0.0]), 1.0).unwrap();
        assert!(s.contains(&l2(), &[1.0, 0.0]).unwrap());
        assert!(!s.interior_contains(&l2(), &[1.0, 0.0]).unwrap());
        assert!(s.interior_contains(&l2(), &[0.0, 0.0]).unwrap());
        assert_eq!(s.lambda(), 1.0);
        assert_eq!(s.diameter(&l2()), 2.0);
    }

    #[test]
    fn interval_lower_faces_are_excluded() {
        let s = MorseSet::tagged_interval(
            &l2(),
            Point::from([0.0, 0.0]),
            Point::from([1.0, 1.0]),
            Point::from([0.5, 0.5]),
            None,
        )
        .unwrap();
        assert!(!s.contains(&l2(), &[0.0, 0.5]).unwrap());
        assert!(s.contains(&l2(), &[1.0, 0.5]).unwrap());
        assert!(s.closure().contains(&l2(), &[0.0, 0.5]).unwrap());
        assert_eq!(s.tag(), &Point::from([0.5, 0.5]));
        assert_relative_eq!(s.inner_radius(), 0.5);
    }

    #[test]
    fn interval_diameter_is_edge_norm() {
        let s = MorseSet::tagged_interval(
            &l2(),
            Point::from([0.0, 0.0]),
            Point::from([1.0, 2.0]),
            Point::from([0.5, 0.5]),
            None,
        )
        .unwrap();
        assert_relative_eq!(s.diameter(&l2()), 5f64.sqrt());
    }

    #[test]
    fn interval_fraction_must_stay_inside_unit_sphere() {
        let r = MorseSet::tagged_interval(
            &l2(),
            Point::from([0.0, 0.0]),
            Point::from([1.0, 1.0]),
            Point::from([0.8, 0.8]),
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn star_membership_near_outer_vertex() {
        let s = star5(&l2());
        let tip = Point::from([0.0, 1.0]);
        assert!(s.contains(&l2(), &tip.scale(0.99)).unwrap());
        assert!(!s.contains(&l2(), &tip.scale(1.01)).unwrap());
        let mid = tip.scale(0.5);
        assert!(s.interior_contains(&l2(), &mid).unwrap());
    }

    #[test]
    fn segment_interior_examples() {
        let s = MorseSet::closed_ball(&l2(), Point::from([0.0, 0.0]), 1.0).unwrap();
        let y = Point::from([0.0, 0.0]);
        let x = Point::from([1.0, 0.0]);
        assert_eq!(s.segment_interior(&l2(), &y, &x, 0.5).unwrap(), Point::from([0.5, 0.0]));
        assert_eq!(s.segment_interior(&l2(), &y, &x, 1.0).unwrap(), y);
        assert!(s.segment_interior(&l2(), &y, &x, 0.0).is_err());
        assert!(s.segment_interior(&l2(), &Point::from([1.0, 0.0]), &x, 0.5).is_err());
        let star = star5(&l2());
        let p = star.segment_interior(&l2(), &y, &Point::from([0.0, 1.0]), 0.1).unwrap();
        assert!(star.interior_contains(&l2(), &p).unwrap());
    }

    #[test]
    fn scaling_balls_and_semigroup() {
        let s = MorseSet::closed_ball(&l2(), Point::from([1.0, 2.0]), 2.0).unwrap();
        assert_eq!(s.scaled(1.0).unwrap(), s);
        let h = s.scaled(0.5).unwrap();
        assert_eq!(h, MorseSet::closed_ball(&l2(), Point::from([1.0, 2.0]), 1.0).unwrap());
        assert!(s.scaled(0.0).is_err());
        assert!(s.scaled(1.5).is_err());
        let star = star5(&l2());
        let a = star.scaled(0.6).unwrap().scaled(0.5).unwrap();
        assert!(a.approx_eq(&star.scaled(0.3).unwrap(), 1e-12));
    }

    #[test]
    fn open_ball_lambda_from_offset() {
        let s = MorseSet::open_ball_tagged(&l2(), Point::from([0.0, 0.0]), 3.0, Point::from([1.0, 0.0]))
            .unwrap();
        assert_relative_eq!(s.lambda(), 2.0);
        assert_relative_eq!(s.inner_radius(), 2.0);
        assert!(!s.contains(&l2(), &[3.0, 0.0]).unwrap());
        assert!(s.closure().contains(&l2(), &[3.0, 0.0]).unwrap());
        assert!(MorseSet::tagged_ball(&l2(), Point::from([0.0, 0.0]), 3.0, Point::from([1.0, 0.0]), false, Some(1.5))
            .is_err());
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(MorseSet::closed_ball(&l2(), Point::from([0.0, 0.0]), 0.0).is_err());
        assert!(MorseSet::closed_ball(&l2(), Point::from([0.0]), 1.0).is_err());
        let s = MorseSet::closed_ball(&l2(), Point::from([0.0, 0.0]), 1.0).unwrap();
        assert!(s.with_lambda(&l2(), 0.5).is_err());
    }

    #[test]
    fn radial_extent_matches_norm_balls() {
        for norm in [Norm::L1, Norm::L2, Norm::Linf] {
            let sp = Space::new(2, norm).unwrap();
            let s = MorseSet::tagged_ball(&sp, Point::from([0.0, 0.0]), 1.0, Point::from([0.2, 0.1]), true, None)
                .unwrap();
            for k in 0..16 {
                let t = k as f64 * 0.4;
                let u = [t.cos(), t.sin()];
                let p = s.boundary_point(&sp, &u);
                assert_relative_eq!(sp.norm().eval(&p), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn weighted_linf_interval_radius() {
        let sp = Space::new(2, Norm::WeightedLinf(vec![2.0, 1.0])).unwrap();
        let s = MorseSet::tagged_interval(
            &sp,
            Point::from([0.0, 0.0]),
            Point::from([1.0, 1.0]),
            Point::from([0.5, 0.5]),
            None,
        )
        .unwrap();
        // Axis 1 has unit extent and half-width 0.5, which limits r.
        assert_relative_eq!(s.inner_radius(), 0.5);
        assert_relative_eq!(s.diameter(&sp), 2.0);
    }
}

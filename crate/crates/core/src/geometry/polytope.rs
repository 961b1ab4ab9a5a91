use nalgebra::{DMatrix, DVector};

use super::{AaBox, Point, Space};
use crate::error::{Error, Result};

/// Vertex and facet data for a star polygon (d = 2) or convex polytope (d >= 3),
/// in coordinates relative to the kernel center at unit scale.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeTemplate {
    dim: usize,
    vertices: Vec<Point>,
    /// Outward unit normals `n` and offsets `h > 0` with `n . v <= h` on each facet's side.
    /// For a star polygon these are the edge lines and bound the kernel only.
    facets: Vec<(Point, f64)>,
    /// Vertex angles in `(-pi, pi]`, ascending; 2D only.
    angles: Vec<f64>,
    convex: bool,
}

fn cross(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl PolytopeTemplate {
    /// Star polygon from vertices given relative to the kernel center.
    ///
    /// Vertices are sorted by angle; the center must see every edge from the
    /// inside (positive offset on every edge line).
    pub fn star_polygon(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::input("star polygon needs at least three vertices"));
        }
        if vertices.iter().any(|v| v.dim() != 2 || !v.is_finite()) {
            return Err(Error::input("star polygon vertices must be finite 2D points"));
        }
        let mut tagged: Vec<(f64, Point)> = vertices
            .into_iter()
            .map(|v| (v[1].atan2(v[0]), v))
            .collect();
        if tagged.iter().any(|(_, v)| v.euclidean_len() == 0.0) {
            return Err(Error::input("a vertex coincides with the kernel center"));
        }
        tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in tagged.windows(2) {
            if w[1].0 - w[0].0 <= 1e-12 {
                return Err(Error::input("two vertices share a direction from the kernel center"));
            }
        }
        let n = tagged.len();
        let mut facets = Vec::with_capacity(n);
        for k in 0..n {
            let a = &tagged[k].1;
            let b = &tagged[(k + 1) % n].1;
            let e = [b[0] - a[0], b[1] - a[1]];
            // Consecutive vertices must turn counter-clockwise by less than pi.
            let sweep = (tagged[(k + 1) % n].0 - tagged[k].0).rem_euclid(2.0 * std::f64::consts::PI);
            if sweep >= std::f64::consts::PI {
                return Err(Error::input("kernel center lies outside the polygon"));
            }
            let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
            let normal = Point::from([e[1] / len, -e[0] / len]);
            let h = dot(&normal, a);
            if h <= 0.0 {
                return Err(Error::input("kernel center is not strictly inside every edge line"));
            }
            facets.push((normal, h));
        }
        let (angles, verts): (Vec<f64>, Vec<Point>) = tagged.into_iter().unzip();
        let convex = Self::polygon_is_convex(&verts);
        Ok(PolytopeTemplate { dim: 2, vertices: verts, facets, angles, convex })
    }

    fn polygon_is_convex(v: &[Point]) -> bool {
        let n = v.len();
        (0..n).all(|k| {
            let a = &v[k];
            let b = &v[(k + 1) % n];
            let c = &v[(k + 2) % n];
            cross(&[b[0] - a[0], b[1] - a[1]], &[c[0] - b[0], c[1] - b[1]]) >= -1e-14
        })
    }

    /// Bounded convex polytope `{x : n_k . x <= h_k}` relative to an interior
    /// center; vertices are enumerated by solving every d-subset of facets.
    pub fn convex_from_halfspaces(dim: usize, halfspaces: Vec<(Point, f64)>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::input("polytopes need dimension at least 2; use intervals in 1D"));
        }
        if halfspaces.len() <= dim {
            return Err(Error::input("a bounded polytope needs more than d halfspaces"));
        }
        let mut facets = Vec::with_capacity(halfspaces.len());
        for (n, h) in halfspaces {
            if n.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: n.dim() });
            }
            let len = n.euclidean_len();
            if len == 0.0 || !h.is_finite() || h <= 0.0 {
                return Err(Error::input("each halfspace needs a nonzero normal and positive offset"));
            }
            facets.push((n.scale(1.0 / len), h / len));
        }
        let m = facets.len();
        let mut vertices: Vec<Point> = Vec::new();
        let mut idx: Vec<usize> = (0..dim).collect();
        loop {
            let a = DMatrix::from_fn(dim, dim, |r, c| facets[idx[r]].0[c]);
            let b = DVector::from_fn(dim, |r, _| facets[idx[r]].1);
            if let Some(sol) = a.lu().solve(&b) {
                let v = Point::new(sol.iter().copied());
                let scale = v.euclidean_len().max(1.0);
                let feasible = facets.iter().all(|(n, h)| dot(n, &v) <= h + 1e-10 * scale);
                if v.is_finite()
                    && feasible
                    && !vertices
                        .iter()
                        .any(|w| w.iter().zip(v.iter()).all(|(x, y)| (x - y).abs() <= 1e-10 * scale))
                {
                    vertices.push(v);
                }
            }
            // Next d-subset in lexicographic order.
            let mut i = dim;
            while i > 0 && idx[i - 1] == m - dim + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..dim {
                idx[j] = idx[j - 1] + 1;
            }
        }
        if vertices.len() <= dim {
            return Err(Error::input("halfspaces do not bound a full-dimensional polytope"));
        }
        // Boundedness: every coordinate direction must be capped by some facet.
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let u = Point::axis(dim, i, sign);
                if !facets.iter().any(|(n, _)| dot(n, &u) > 1e-12) {
                    return Err(Error::input("halfspaces describe an unbounded region"));
                }
            }
        }
        Ok(PolytopeTemplate { dim, vertices, facets, angles: Vec::new(), convex: true })
    }

    /// Convex polytope from its vertex set (any dimension >= 2). In 2D the hull
    /// vertices are used as a star polygon; in higher dimension the facets are
    /// recovered by brute force over d-subsets of vertices.
    pub fn convex_from_vertices(dim: usize, vertices: Vec<Point>) -> Result<Self> {
        if dim == 2 {
            let t = Self::star_polygon(vertices)?;
            if !t.convex {
                return Err(Error::input("vertices are not in convex position"));
            }
            return Ok(t);
        }
        if vertices.len() <= dim {
            return Err(Error::input("need more than d vertices"));
        }
        let n = vertices.len();
        let mut halfspaces: Vec<(Point, f64)> = Vec::new();
        let mut idx: Vec<usize> = (0..dim).collect();
        loop {
            // Normal of the hyperplane through the chosen vertices.
            let base = &vertices[idx[0]];
            let rows: Vec<Point> = idx[1..].iter().map(|&k| vertices[k].sub(base)).collect();
            if let Some(normal) = hyperplane_normal(dim, &rows) {
                let h = dot(&normal, base);
                let (normal, h) = if h < 0.0 { (normal.scale(-1.0), -h) } else { (normal, h) };
                let tol = 1e-10 * (1.0 + h.abs());
                if h > tol
                    && vertices.iter().all(|v| dot(&normal, v) <= h + tol)
                    && !halfspaces
                        .iter()
                        .any(|(m, g)| (g - h).abs() <= tol && dot(m, &normal) > 1.0 - 1e-10)
                {
                    halfspaces.push((normal, h));
                }
            }
            let mut i = dim;
            while i > 0 && idx[i - 1] == n - dim + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..dim {
                idx[j] = idx[j - 1] + 1;
            }
        }
        Self::convex_from_halfspaces(dim, halfspaces)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[(Point, f64)] {
        &self.facets
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// `t` such that `t * v` lies on the boundary, for a nonzero direction `v`.
    pub fn radial(&self, v: &[f64]) -> f64 {
        if self.dim == 2 {
            let theta = v[1].atan2(v[0]);
            let n = self.angles.len();
            // Edge k runs from vertex k to vertex k+1 (cyclic).
            let k = match self.angles.partition_point(|a| *a <= theta) {
                0 => n - 1,
                p => p - 1,
            };
            let a = &self.vertices[k];
            let b = &self.vertices[(k + 1) % n];
            let e = [b[0] - a[0], b[1] - a[1]];
            cross(a, &e) / cross(v, &e)
        } else {
            self.facets
                .iter()
                .filter_map(|(n, h)| {
                    let s = dot(n, v);
                    (s > 0.0).then(|| h / s)
                })
                .fold(f64::INFINITY, f64::min)
        }
    }

    /// Signed boundary gap at relative point `v`, in Euclidean length:
    /// positive inside, negative outside.
    pub fn boundary_gap(&self, v: &[f64]) -> f64 {
        if self.convex {
            return self
                .facets
                .iter()
                .map(|(n, h)| h - dot(n, v))
                .fold(f64::INFINITY, f64::min);
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len == 0.0 {
            return f64::INFINITY;
        }
        len * (self.radial(v) - 1.0)
    }

    /// Largest `r` with the norm ball `B(0, r)` inside every facet halfspace.
    ///
    /// For a convex polytope this is the inradius about the center; for a
    /// star polygon it is the largest ball inside the kernel.
    pub fn kernel_radius(&self, space: &Space) -> f64 {
        self.facets
            .iter()
            .map(|(n, h)| h / space.norm().dual(n))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest norm distance from the center to a vertex.
    pub fn outer_radius(&self, space: &Space) -> f64 {
        self.vertices.iter().map(|v| space.norm().eval(v)).fold(0.0, f64::max)
    }

    pub fn diameter(&self, space: &Space) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(space.dist(a, b));
            }
        }
        best
    }

    pub fn bounds(&self) -> AaBox {
        let d = self.dim;
        let mut lo = Point::new(std::iter::repeat_n(f64::INFINITY, d));
        let mut hi = Point::new(std::iter::repeat_n(f64::NEG_INFINITY, d));
        for v in &self.vertices {
            for i in 0..d {
                lo.coords_mut()[i] = lo[i].min(v[i]);
                hi.coords_mut()[i] = hi[i].max(v[i]);
            }
        }
        AaBox { lo, hi }
    }

    /// Area of a 2D template by the shoelace formula.
    pub fn area_2d(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|k| cross(&self.vertices[k], &self.vertices[(k + 1) % n]))
            .sum::<f64>()
    }
}

/// Unit normal to the span of `rows` (d-1 vectors in R^d), by cofactor expansion.
fn hyperplane_normal(dim: usize, rows: &[Point]) -> Option<Point> {
    let mut normal = Point::zeros(dim);
    for i in 0..dim {
        let minor = DMatrix::from_fn(dim - 1, dim - 1, |r, c| {
            let col = if c < i { c } else { c + 1 };
            rows[r][col]
        });
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        normal.coords_mut()[i] = sign * minor.determinant();
    }
    let len = normal.euclidean_len();
    (len > 1e-12).then(|| normal.scale(1.0 / len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;
    use approx::assert_relative_eq;

    fn star(points: usize, outer: f64, inner: f64) -> PolytopeTemplate {
        let v = (0..2 * points)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / points as f64;
                let r = if k % 2 == 0 { outer } else { inner };
                Point::from([r * t.cos(), r * t.sin()])
            })
            .collect();
        PolytopeTemplate::star_polygon(v).unwrap()
    }

    #[test]
    fn square_radial_and_kernel() {
        let sq = PolytopeTemplate::star_polygon(vec![
            Point::from([1.0, 1.0]),
            Point::from([-1.0, 1.0]),
            Point::from([-1.0, -1.0]),
            Point::from([1.0, -1.0]),
        ])
        .unwrap();
        assert!(sq.is_convex());
        assert_relative_eq!(sq.radial(&[1.0, 0.0]), 1.0);
        assert_relative_eq!(sq.radial(&[1.0, 1.0]), 1.0);
        assert_relative_eq!(sq.radial(&[0.0, -2.0]), 0.5);
        assert_relative_eq!(sq.area_2d(), 4.0);
        assert_relative_eq!(sq.kernel_radius(&Space::euclidean(2)), 1.0);
        let l1 = Space::new(2, Norm::L1).unwrap();
        assert_relative_eq!(sq.kernel_radius(&l1), 1.0);
        assert_relative_eq!(sq.diameter(&Space::euclidean(2)), 8f64.sqrt());
    }

    #[test]
    fn five_point_star_is_not_convex() {
        let s = star(5, 1.0, 0.4);
        assert!(!s.is_convex());
        assert!(s.boundary_gap(&[0.99, 0.0]) > 0.0);
        assert!(s.boundary_gap(&[1.01, 0.0]) < 0.0);
        // The notch between two outer points is at radius 0.4.
        let t = std::f64::consts::PI / 5.0;
        assert_relative_eq!(s.radial(&[t.cos(), t.sin()]), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn rejects_center_outside() {
        let v = vec![
            Point::from([1.0, 0.1]),
            Point::from([2.0, 0.5]),
            Point::from([1.0, 1.0]),
        ];
        assert!(PolytopeTemplate::star_polygon(v).is_err());
    }

    #[test]
    fn cube_from_halfspaces() {
        let hs = (0..3)
            .flat_map(|i| [1.0, -1.0].map(|s| (Point::axis(3, i, s), 1.0)))
            .collect();
        let c = PolytopeTemplate::convex_from_halfspaces(3, hs).unwrap();
        assert_eq!(c.vertices().len(), 8);
        let s = Space::euclidean(3);
        assert_relative_eq!(c.diameter(&s), 12f64.sqrt());
        assert_relative_eq!(c.kernel_radius(&s), 1.0);
        assert_relative_eq!(c.radial(&[1.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn octahedron_from_vertices_round_trips() {
        let v = (0..3)
            .flat_map(|i| [1.0, -1.0].map(|s| Point::axis(3, i, s)))
            .collect();
        let o = PolytopeTemplate::convex_from_vertices(3, v).unwrap();
        assert_eq!(o.facets().len(), 8);
        assert_eq!(o.vertices().len(), 6);
        let linf = Space::new(3, Norm::Linf).unwrap();
        // Largest Linf cube inside the unit cross-polytope has half-side 1/3.
        assert_relative_eq!(o.kernel_radius(&linf), 1.0 / 3.0, epsilon = 1e-12);
    }
}

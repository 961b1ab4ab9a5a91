//! Finite-dimensional normed spaces, points, boxes and Morse sets.

mod intersect;
mod morse;
mod polytope;
mod validate;

pub use intersect::{box_relation, set_box_intersects, sets_intersect, BoxRelation, Intersection};
pub use morse::{MorseSet, Shape, GEOM_TOL};
pub use polytope::PolytopeTemplate;
pub use validate::{validate_morse, Certification, MorseReport};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::ops::Deref;

use crate::error::{Error, Result};

/// A point of R^d; its length is checked against the owning [`Space`] at use sites.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(SmallVec<[f64; 3]>);

impl Point {
    pub fn new(coords: impl IntoIterator<Item = f64>) -> Self {
        Point(coords.into_iter().collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Point(SmallVec::from_elem(0.0, dim))
    }

    /// The i-th standard basis vector scaled by `value`.
    pub fn axis(dim: usize, i: usize, value: f64) -> Self {
        let mut p = Point::zeros(dim);
        p.0[i] = value;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn add(&self, other: &[f64]) -> Point {
        Point(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Point {
        Point(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Point {
        Point(self.0.iter().map(|a| a * c).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &[f64]) -> Point {
        Point(self.0.iter().zip(other).map(|(a, b)| a + c * b).collect())
    }

    /// `alpha * y + (1 - alpha) * x`.
    pub fn affine(y: &[f64], x: &[f64], alpha: f64) -> Point {
        Point(y.iter().zip(x).map(|(yi, xi)| alpha * yi + (1.0 - alpha) * xi).collect())
    }

    pub fn euclidean_len(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(SmallVec::from_vec(v))
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(SmallVec::from_slice(v))
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(SmallVec::from_slice(&v))
    }
}

/// Norm selector for a [`Space`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
    Linf,
    /// `max_i w_i |x_i|` with all weights positive.
    WeightedLinf(Vec<f64>),
}

impl Norm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Norm::L1 => x.iter().map(|v| v.abs()).sum(),
            Norm::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Norm::WeightedLinf(w) => x
                .iter()
                .zip(w.iter())
                .fold(0.0, |m, (v, wi)| m.max(wi * v.abs())),
        }
    }

    /// Dual norm, `sup { n.x : ||x|| <= 1 }`.
    pub fn dual(&self, n: &[f64]) -> f64 {
        match self {
            Norm::L1 => n.iter().fold(0.0, |m, v| m.max(v.abs())),
            Norm::L2 => n.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::Linf => n.iter().map(|v| v.abs()).sum(),
            Norm::WeightedLinf(w) => n.iter().zip(w.iter()).map(|(v, wi)| v.abs() / wi).sum(),
        }
    }

    /// `sup { |x_i| : ||x|| <= 1 }`, the half-width of the unit ball along axis i.
    pub fn axis_extent(&self, i: usize) -> f64 {
        match self {
            Norm::WeightedLinf(w) => 1.0 / w[i],
            _ => 1.0,
        }
    }

    /// True when every ball is an axis-aligned box.
    pub fn balls_are_boxes(&self, dim: usize) -> bool {
        dim == 1 || matches!(self, Norm::Linf | Norm::WeightedLinf(_))
    }

    /// Lebesgue volume of the closed unit ball in dimension `dim`.
    pub fn unit_ball_volume(&self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            Norm::L1 => 2f64.powi(dim as i32) / factorial(dim),
            Norm::L2 => euclidean_ball_volume(dim),
            Norm::Linf => 2f64.powf(d),
            Norm::WeightedLinf(w) => w.iter().fold(2f64.powf(d), |v, wi| v / wi),
        }
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Volume of the Euclidean unit ball via `V_d = V_{d-2} * 2 pi / d`.
pub(crate) fn euclidean_ball_volume(dim: usize) -> f64 {
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if dim.is_multiple_of(2) { 2 } else { 3 };
    while k <= dim {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// A finite-dimensional real normed space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    dim: usize,
    norm: Norm,
}

impl Space {
    pub fn new(dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        if let Norm::WeightedLinf(w) = &norm {
            if w.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: w.len() });
            }
            if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::input("weighted-Linf weights must be positive and finite"));
            }
        }
        Ok(Space { dim, norm })
    }

    pub fn euclidean(dim: usize) -> Self {
        Space { dim: dim.max(1), norm: Norm::L2 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    pub fn norm_eval(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.norm.eval(x))
    }

    /// `||a - b||` without a dimension check.
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.norm {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Norm::Linf => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            Norm::WeightedLinf(w) => a
                .iter()
                .zip(b)
                .zip(w.iter())
                .fold(0.0, |m, ((x, y), wi)| m.max(wi * (x - y).abs())),
        }
    }

    /// Distance from `c` to the closest point of the closed box, and that point.
    ///
    /// All supported norms are monotone in each coordinate's absolute value,
    /// so the coordinate clamp is a nearest point.
    pub fn box_nearest(&self, c: &[f64], b: &AaBox) -> (f64, Point) {
        let p = b.clamp(c);
        (self.dist(c, &p), p)
    }

    /// Largest distance from `c` to a point of the closed box (attained at a corner).
    pub fn box_farthest(&self, c: &[f64], b: &AaBox) -> f64 {
        let far: Point = c
            .iter()
            .zip(b.lo.iter().zip(b.hi.iter()))
            .map(|(ci, (l, h))| if (ci - l).abs() > (h - ci).abs() { *l } else { *h })
            .collect::<Vec<_>>()
            .into();
        self.dist(c, &far)
    }

    pub fn unit_ball_volume(&self) -> f64 {
        self.norm.unit_ball_volume(self.dim)
    }

    /// Half-widths of the bounding box of a ball of radius `r`.
    pub fn ball_half_widths(&self, r: f64) -> Point {
        Point::new((0..self.dim).map(|i| r * self.norm.axis_extent(i)))
    }
}

/// `||x||` in the given space.
pub fn norm_eval(space: &Space, x: &Point) -> Result<f64> {
    space.norm_eval(x)
}

/// A closed axis-aligned box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaBox {
    pub lo: Point,
    pub hi: Point,
}

impl AaBox {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch { expected: lo.dim(), got: hi.dim() });
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l.is_nan() || h.is_nan() || l > h) {
            return Err(Error::input(format!("box bounds out of order: {:?} .. {:?}", lo, hi)));
        }
        Ok(AaBox { lo, hi })
    }

    pub fn cube(center: &[f64], half: f64) -> Self {
        AaBox {
            lo: Point::new(center.iter().map(|c| c - half)),
            hi: Point::new(center.iter().map(|c| c + half)),
        }
    }

    pub fn around(center: &[f64], half_widths: &[f64]) -> Self {
        AaBox {
            lo: Point::new(center.iter().zip(half_widths).map(|(c, h)| c - h)),
            hi: Point::new(center.iter().zip(half_widths).map(|(c, h)| c + h)),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn center(&self) -> Point {
        Point::new(self.lo.iter().zip(self.hi.iter()).map(|(l, h)| 0.5 * (l + h)))
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(l, h)| (h - l).max(0.0))
            .product()
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    pub fn contains_box(&self, other: &AaBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Intersection of closed boxes; `None` when empty.
    pub fn intersect(&self, other: &AaBox) -> Option<AaBox> {
        let lo = Point::new(self.lo.iter().zip(other.lo.iter()).map(|(a, b)| a.max(*b)));
        let hi = Point::new(self.hi.iter().zip(other.hi.iter()).map(|(a, b)| a.min(*b)));
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            None
        } else {
            Some(AaBox { lo, hi })
        }
    }

    pub fn overlap_volume(&self, other: &AaBox) -> f64 {
        (0..self.dim())
            .map(|i| (self.hi[i].min(other.hi[i]) - self.lo[i].max(other.lo[i])).max(0.0))
            .product()
    }

    pub fn union_hull(&self, other: &AaBox) -> AaBox {
        AaBox {
            lo: Point::new(self.lo.iter().zip(other.lo.iter()).map(|(a, b)| a.min(*b))),
            hi: Point::new(self.hi.iter().zip(other.hi.iter()).map(|(a, b)| a.max(*b))),
        }
    }

    /// Grow by `eta` on every side (negative shrinks; `None` if it vanishes).
    pub fn dilate(&self, eta: &[f64]) -> Option<AaBox> {
        let lo = Point::new(self.lo.iter().zip(eta).map(|(l, e)| l - e));
        let hi = Point::new(self.hi.iter().zip(eta).map(|(h, e)| h + e));
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            None
        } else {
            Some(AaBox { lo, hi })
        }
    }

    pub fn clamp(&self, x: &[f64]) -> Point {
        Point::new(
            x.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .map(|(v, (l, h))| v.clamp(*l, *h)),
        )
    }

    /// The `2^d` corners.
    pub fn corners(&self) -> impl Iterator<Item = Point> + '_ {
        let d = self.dim();
        (0..1usize << d).map(move |mask| {
            Point::new((0..d).map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] }))
        })
    }

    /// Split into `2^d` equal children.
    pub fn children(&self) -> impl Iterator<Item = AaBox> + '_ {
        let d = self.dim();
        let mid = self.center();
        (0..1usize << d).map(move |mask| {
            let mut lo = self.lo.clone();
            let mut hi = self.hi.clone();
            for i in 0..d {
                if mask >> i & 1 == 1 {
                    lo.coords_mut()[i] = mid[i];
                } else {
                    hi.coords_mut()[i] = mid[i];
                }
            }
            AaBox { lo, hi }
        })
    }

    /// Halve every axis wider than two thirds of the widest one. Repeated
    /// splitting drives any box towards a cube; cubes split into `2^d`.
    pub fn halves(&self) -> Vec<AaBox> {
        let d = self.dim();
        let wmax = (0..d).map(|i| self.width(i)).fold(0.0, f64::max);
        let axes: Vec<usize> = (0..d).filter(|&i| 1.5 * self.width(i) > wmax).collect();
        let mid = self.center();
        (0..1usize << axes.len())
            .map(|mask| {
                let mut lo = self.lo.clone();
                let mut hi = self.hi.clone();
                for (k, &i) in axes.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        lo.coords_mut()[i] = mid[i];
                    } else {
                        hi.coords_mut()[i] = mid[i];
                    }
                }
                AaBox { lo, hi }
            })
            .collect()
    }

    /// `self \ inner` as at most `2d` boxes with disjoint interiors.
    pub fn minus(&self, inner: &AaBox) -> Vec<AaBox> {
        let Some(inner) = self.intersect(inner) else { return vec![self.clone()] };
        let mut rest = Vec::new();
        let mut core = self.clone();
        for i in 0..self.dim() {
            if inner.lo[i] > core.lo[i] {
                let mut b = core.clone();
                b.hi.coords_mut()[i] = inner.lo[i];
                rest.push(b);
                core.lo.coords_mut()[i] = inner.lo[i];
            }
            if inner.hi[i] < core.hi[i] {
                let mut b = core.clone();
                b.lo.coords_mut()[i] = inner.hi[i];
                rest.push(b);
                core.hi.coords_mut()[i] = inner.hi[i];
            }
        }
        rest
    }
}

/// The segment `alpha * y + (1 - alpha) * x`, `alpha` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub y: Point,
    pub x: Point,
}

impl Segment {
    pub fn new(y: Point, x: Point) -> Self {
        Segment { y, x }
    }

    pub fn point_at(&self, alpha: f64) -> Point {
        Point::affine(&self.y, &self.x, alpha)
    }
}

pub use morse::{interior_contains, morse_contains, morse_diameter, morse_scale, segment_interior};

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn halves_tend_to_cubes() {
        let b = AaBox { lo: Point::from([0.0, 0.0]), hi: Point::from([1.0, 0.1]) };
        let h = b.halves();
        assert_eq!(h.len(), 2);
        assert_eq!(h[0].width(0), 0.5);
        assert_eq!(h[0].width(1), 0.1);
        let c = AaBox { lo: Point::zeros(3), hi: Point::from([1.0, 1.0, 1.0]) };
        assert_eq!(c.halves().len(), 8);
    }

    #[test]
    fn box_remainder_tiles_the_rest() {
        let b = AaBox { lo: Point::from([0.0, 0.0]), hi: Point::from([1.0, 1.0]) };
        let inner = AaBox { lo: Point::from([0.2, 0.3]), hi: Point::from([0.5, 1.0]) };
        let rest = b.minus(&inner);
        assert_eq!(rest.len(), 3);
        let total: f64 = rest.iter().map(|r| r.volume()).sum();
        assert_relative_eq!(total + inner.volume(), 1.0, epsilon = 1e-15);
        for (i, a) in rest.iter().enumerate() {
            assert_eq!(a.overlap_volume(&inner), 0.0);
            for c in &rest[i + 1..] {
                assert_eq!(a.overlap_volume(c), 0.0);
            }
        }
    }

    #[test]
    fn norms_of_three_four() {
        let x = Point::from([3.0, -4.0]);
        assert_eq!(Norm::Linf.eval(&x), 4.0);
        assert_eq!(Norm::L1.eval(&x), 7.0);
        assert_eq!(Norm::L2.eval(&x), 5.0);
        assert_eq!(Norm::WeightedLinf(vec![2.0, 0.5]).eval(&x), 6.0);
    }

    #[test]
    fn norm_eval_rejects_wrong_dimension() {
        let s = Space::euclidean(2);
        assert!(matches!(
            s.norm_eval(&Point::from([1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(Space::new(2, Norm::WeightedLinf(vec![1.0, 0.0])).is_err());
        assert!(Space::new(2, Norm::WeightedLinf(vec![1.0])).is_err());
        assert!(Space::new(0, Norm::L2).is_err());
    }

    #[test]
    fn dual_norm_pairs() {
        let n = [1.0, -2.0];
        assert_eq!(Norm::L1.dual(&n), 2.0);
        assert_eq!(Norm::Linf.dual(&n), 3.0);
        assert_relative_eq!(Norm::L2.dual(&n), 5f64.sqrt());
        assert_eq!(Norm::WeightedLinf(vec![2.0, 4.0]).dual(&n), 1.0);
    }

    #[test]
    fn unit_ball_volumes() {
        assert_relative_eq!(Norm::L2.unit_ball_volume(2), std::f64::consts::PI);
        assert_relative_eq!(Norm::L2.unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0);
        assert_relative_eq!(Norm::L2.unit_ball_volume(1), 2.0);
        assert_relative_eq!(Norm::L1.unit_ball_volume(2), 2.0);
        assert_relative_eq!(Norm::L1.unit_ball_volume(3), 8.0 / 6.0);
        assert_relative_eq!(Norm::WeightedLinf(vec![2.0, 4.0]).unit_ball_volume(2), 0.5);
    }

    #[test]
    fn box_children_tile_parent() {
        let b = AaBox::new(Point::from([0.0, 0.0]), Point::from([2.0, 1.0])).unwrap();
        let total: f64 = b.children().map(|c| c.volume()).sum();
        assert_relative_eq!(total, b.volume());
        assert_eq!(b.corners().count(), 4);
    }

    #[test]
    fn box_nearest_in_each_norm() {
        let b = AaBox::new(Point::from([1.0, 1.0]), Point::from([2.0, 2.0])).unwrap();
        for (norm, want) in [(Norm::L1, 2.0), (Norm::L2, 2f64.sqrt()), (Norm::Linf, 1.0)] {
            let s = Space::new(2, norm).unwrap();
            assert_relative_eq!(s.box_nearest(&[0.0, 0.0], &b).0, want);
        }
    }

    #[test]
    fn segment_is_affine() {
        let s = Segment::new(Point::from([0.0, 0.0]), Point::from([2.0, 4.0]));
        assert_eq!(s.point_at(1.0), Point::from([0.0, 0.0]));
        assert_eq!(s.point_at(0.0), Point::from([2.0, 4.0]));
        assert_eq!(s.point_at(0.25), Point::from([1.5, 3.0]));
    }
}

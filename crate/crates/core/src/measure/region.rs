use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AaBox, BoxRelation, Point, Space};

/// Closed building block of a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Part {
    Box { lo: Point, hi: Point },
    /// Closed ball in the ambient norm.
    Ball { center: Point, radius: f64 },
}

impl Part {
    pub fn from_box(b: AaBox) -> Part {
        Part::Box { lo: b.lo, hi: b.hi }
    }

    fn dim(&self) -> usize {
        match self {
            Part::Box { lo, .. } => lo.dim(),
            Part::Ball { center, .. } => center.dim(),
        }
    }

    pub fn hull(&self, space: &Space) -> AaBox {
        match self {
            Part::Box { lo, hi } => AaBox { lo: lo.clone(), hi: hi.clone() },
            Part::Ball { center, radius } => AaBox::around(center, &space.ball_half_widths(*radius)),
        }
    }

    pub fn contains(&self, space: &Space, x: &[f64]) -> bool {
        match self {
            Part::Box { lo, hi } => (0..x.len()).all(|i| lo[i] <= x[i] && x[i] <= hi[i]),
            Part::Ball { center, radius } => space.dist(x, center) <= *radius,
        }
    }

    pub fn relation(&self, space: &Space, cell: &AaBox) -> BoxRelation {
        match self {
            Part::Box { lo, hi } => {
                let b = AaBox { lo: lo.clone(), hi: hi.clone() };
                if b.contains_box(cell) {
                    BoxRelation::Inside
                } else if b.intersect(cell).is_none() {
                    BoxRelation::Outside
                } else {
                    BoxRelation::Partial
                }
            }
            Part::Ball { center, radius } => {
                if space.box_nearest(center, cell).0 > *radius {
                    BoxRelation::Outside
                } else if space.box_farthest(center, cell) <= *radius {
                    BoxRelation::Inside
                } else {
                    BoxRelation::Partial
                }
            }
        }
    }

    /// Grow by `eta` in norm distance (boxes grow per axis by `eta` times the axis extent).
    fn grown(&self, space: &Space, eta: f64) -> Option<Part> {
        match self {
            Part::Box { lo, hi } => {
                let hw: Vec<f64> = space.ball_half_widths(eta).to_vec();
                let b = AaBox { lo: lo.clone(), hi: hi.clone() }.dilate(&hw)?;
                Some(Part::from_box(b))
            }
            Part::Ball { center, radius } => {
                let r = radius + eta;
                (r >= 0.0).then(|| Part::Ball { center: center.clone(), radius: r })
            }
        }
    }
}

/// `(union of include) minus (union of exclude)`, plus finitely many extra points.
///
/// The extra points carry no Lebesgue mass; they matter only for atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub dim: usize,
    #[serde(default)]
    pub include: Vec<Part>,
    #[serde(default)]
    pub exclude: Vec<Part>,
    #[serde(default)]
    pub points: Vec<Point>,
}

impl Region {
    pub fn empty(dim: usize) -> Self {
        Region { dim, include: Vec::new(), exclude: Vec::new(), points: Vec::new() }
    }

    pub fn from_box(b: AaBox) -> Self {
        let dim = b.dim();
        Region { dim, include: vec![Part::from_box(b)], exclude: Vec::new(), points: Vec::new() }
    }

    /// The unit cube `[0, 1]^dim`.
    pub fn unit_cube(dim: usize) -> Self {
        Self::from_box(AaBox { lo: Point::zeros(dim), hi: Point::new(std::iter::repeat_n(1.0, dim)) })
    }

    pub fn with_part(mut self, p: Part) -> Self {
        self.include.push(p);
        self
    }

    pub fn without_part(mut self, p: Part) -> Self {
        self.exclude.push(p);
        self
    }

    pub fn with_point(mut self, x: Point) -> Self {
        self.points.push(x);
        self
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        if self.dim != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: self.dim });
        }
        for p in self.include.iter().chain(&self.exclude) {
            if p.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
            }
            match p {
                Part::Box { lo, hi } => {
                    if (0..self.dim).any(|i| !(lo[i] <= hi[i])) {
                        return Err(Error::input("region box bounds out of order"));
                    }
                }
                Part::Ball { center, radius } => {
                    if !(radius.is_finite() && *radius >= 0.0) || !center.is_finite() {
                        return Err(Error::input("region ball needs a finite center and radius"));
                    }
                }
            }
        }
        for x in &self.points {
            space.check(x)?;
        }
        Ok(())
    }

    pub fn contains(&self, space: &Space, x: &[f64]) -> bool {
        self.contains_solid(space, x) || self.points.iter().any(|p| p.coords() == x)
    }

    /// Membership ignoring the extra points.
    pub fn contains_solid(&self, space: &Space, x: &[f64]) -> bool {
        self.include.iter().any(|p| p.contains(space, x)) && !self.exclude.iter().any(|p| p.contains(space, x))
    }

    /// Relation of a closed cell to the solid part (extra points ignored).
    ///
    /// `Inside` is certain up to the boundary of excluded parts, which is
    /// Lebesgue-null.
    pub fn relation(&self, space: &Space, cell: &AaBox) -> BoxRelation {
        let mut any_partial = false;
        let mut inside_one = false;
        for p in &self.include {
            match p.relation(space, cell) {
                BoxRelation::Inside => inside_one = true,
                BoxRelation::Partial => any_partial = true,
                BoxRelation::Outside => {}
            }
        }
        if !inside_one && !any_partial {
            return BoxRelation::Outside;
        }
        let mut excl_partial = false;
        for p in &self.exclude {
            match p.relation(space, cell) {
                BoxRelation::Inside => return BoxRelation::Outside,
                BoxRelation::Partial => excl_partial = true,
                BoxRelation::Outside => {}
            }
        }
        if inside_one && !excl_partial {
            BoxRelation::Inside
        } else {
            BoxRelation::Partial
        }
    }

    /// Bounding box of the included parts and points; `None` for the empty region.
    pub fn hull(&self, space: &Space) -> Option<AaBox> {
        let mut hull: Option<AaBox> = None;
        let parts = self.include.iter().map(|p| p.hull(space));
        let pts = self.points.iter().map(|p| AaBox::cube(p, 0.0));
        for b in parts.chain(pts) {
            hull = Some(match hull {
                None => b,
                Some(h) => h.union_hull(&b),
            });
        }
        hull
    }

    pub fn is_bounded(&self, space: &Space) -> bool {
        self.hull(space).is_none_or(|h| h.is_bounded())
    }

    pub fn is_box_only(&self) -> bool {
        self.include.iter().chain(&self.exclude).all(|p| matches!(p, Part::Box { .. }))
    }

    /// For box-only regions, closed boxes with pairwise null overlaps whose
    /// union equals the solid part up to a null set.
    pub fn disjoint_boxes(&self) -> Option<Vec<AaBox>> {
        if !self.is_box_only() {
            return None;
        }
        let boxes = |parts: &[Part]| -> Vec<AaBox> {
            parts
                .iter()
                .map(|p| match p {
                    Part::Box { lo, hi } => AaBox { lo: lo.clone(), hi: hi.clone() },
                    Part::Ball { .. } => unreachable!(),
                })
                .collect()
        };
        let inc = boxes(&self.include);
        let exc = boxes(&self.exclude);
        if inc.len() == 1 && exc.is_empty() {
            return Some(inc);
        }
        let d = self.dim;
        let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); d];
        for b in inc.iter().chain(&exc) {
            for (i, c) in cuts.iter_mut().enumerate() {
                c.push(b.lo[i]);
                c.push(b.hi[i]);
            }
        }
        for c in &mut cuts {
            c.sort_by(f64::total_cmp);
            c.dedup();
        }
        let counts: Vec<usize> = cuts.iter().map(|c| c.len().saturating_sub(1)).collect();
        if counts.contains(&0) {
            return Some(Vec::new());
        }
        let total: usize = counts.iter().product();
        let mut out: Vec<AaBox> = Vec::new();
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let lo = Point::new((0..d).map(|i| cuts[i][idx[i]]));
            let hi = Point::new((0..d).map(|i| cuts[i][idx[i] + 1]));
            let cell = AaBox { lo, hi };
            let mid = cell.center();
            if inc.iter().any(|b| b.contains(&mid)) && !exc.iter().any(|b| b.contains(&mid)) {
                out.push(cell);
            }
            for i in 0..d {
                idx[i] += 1;
                if idx[i] < counts[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        Some(out)
    }

    /// Open-ish superset: included parts grown by `eta`, excluded parts shrunk
    /// by `eta`, and a cube of half-width `eta` around each extra point.
    pub fn dilated(&self, space: &Space, eta: f64) -> Region {
        let include = self
            .include
            .iter()
            .filter_map(|p| p.grown(space, eta))
            .chain(self.points.iter().map(|x| Part::from_box(AaBox::around(x, &space.ball_half_widths(eta)))))
            .collect();
        let exclude = self.exclude.iter().filter_map(|p| p.grown(space, -eta)).collect();
        Region { dim: self.dim, include, exclude, points: Vec::new() }
    }

    /// Intersection of the included parts with a box (used to truncate
    /// unbounded regions).
    pub fn clipped(&self, space: &Space, b: &AaBox) -> Region {
        let mut out = Region::empty(self.dim);
        for p in &self.include {
            match p {
                Part::Box { lo, hi } => {
                    if let Some(c) = (AaBox { lo: lo.clone(), hi: hi.clone() }).intersect(b) {
                        out.include.push(Part::from_box(c));
                    }
                }
                Part::Ball { .. } => {
                    if p.hull(space).intersect(b).is_some() {
                        out.include.push(p.clone());
                    }
                }
            }
        }
        if out.include.iter().any(|p| matches!(p, Part::Ball { .. })) {
            // Keep balls exact by cutting away everything outside b.
            let big = out.hull(space).map(|h| h.union_hull(b)).unwrap_or_else(|| b.clone());
            for c in complement_slabs(b, &big) {
                out.exclude.push(Part::from_box(c));
            }
        }
        out.exclude.extend(self.exclude.iter().cloned());
        out.points = self.points.iter().filter(|x| b.contains(x)).cloned().collect();
        out
    }
}

/// Boxes covering `outer` minus the interior of `inner`.
fn complement_slabs(inner: &AaBox, outer: &AaBox) -> Vec<AaBox> {
    let d = inner.dim();
    let mut out = Vec::new();
    for i in 0..d {
        if outer.lo[i] < inner.lo[i] {
            let mut hi = outer.hi.clone();
            hi.coords_mut()[i] = inner.lo[i];
            out.push(AaBox { lo: outer.lo.clone(), hi });
        }
        if outer.hi[i] > inner.hi[i] {
            let mut lo = outer.lo.clone();
            lo.coords_mut()[i] = inner.hi[i];
            out.push(AaBox { lo, hi: outer.hi.clone() });
        }
    }
    out
}

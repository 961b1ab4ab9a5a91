use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AaBox, MorseSet, Point, PolytopeTemplate, Shape, Space};

/// Which cardinality bound governs satellite configurations of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaMode {
    /// Balls tagged at their centers.
    Balls,
    /// General lambda-Morse sets.
    Morse,
}

/// A fine Morse cover generator: sets of every size at every point.
pub trait MorseFamily: Send + Sync {
    fn space(&self) -> &Space;
    fn lambda(&self) -> f64;
    fn kappa_mode(&self) -> KappaMode;
    /// Member tagged at `tag` with `lambda * r = size`.
    fn member(&self, tag: &Point, size: f64) -> Result<MorseSet>;
    /// Largest member whose bounding box fits in `cell`, centered in it.
    fn inscribed(&self, cell: &AaBox) -> Option<MorseSet>;
    /// Bounding box of the member tagged at the origin with size 1; the
    /// member at `tag` with size `s` has box `tag + s * unit_box`.
    fn unit_box(&self) -> &AaBox;
}

/// All translates and dilates of one template set.
#[derive(Clone, Debug)]
pub struct ScaledFamily {
    space: Space,
    /// Template tagged at the origin with `lambda * r = 1`.
    template: MorseSet,
    rel: AaBox,
}

impl ScaledFamily {
    pub fn from_template(space: &Space, template: &MorseSet) -> Result<Self> {
        space.check(template.tag())?;
        let at_origin = template.translated(&template.tag().scale(-1.0));
        let unit = at_origin.rescaled(1.0 / (template.lambda() * template.inner_radius()));
        let rel = unit.bounding_box(space);
        Ok(ScaledFamily { space: space.clone(), template: unit, rel })
    }

    /// Closed balls tagged at their centers.
    pub fn closed_balls(space: &Space) -> Result<Self> {
        Self::from_template(space, &MorseSet::closed_ball(space, Point::zeros(space.dim()), 1.0)?)
    }

    /// Open balls tagged at `center + ratio * radius * direction`.
    pub fn open_balls(space: &Space, direction: &Point, ratio: f64) -> Result<Self> {
        space.check(direction)?;
        let n = space.norm().eval(direction);
        if !(n > 0.0) || !(0.0..1.0).contains(&ratio) {
            return Err(Error::input("open-ball family needs a nonzero direction and ratio in [0, 1)"));
        }
        let offset = direction.scale(ratio / n);
        Self::from_template(space, &MorseSet::open_ball_tagged(space, Point::zeros(space.dim()), 1.0, offset)?)
    }

    /// Tagged intervals with edge proportions `edges` and tag fraction `fraction`.
    pub fn intervals(space: &Space, edges: &Point, fraction: &Point) -> Result<Self> {
        let t = MorseSet::tagged_interval(space, Point::zeros(space.dim()), edges.clone(), fraction.clone(), None)?;
        Self::from_template(space, &t)
    }

    /// Star polygons or convex polytopes from a template with kernel radius `kernel_radius`.
    pub fn polytopes(space: &Space, template: Arc<PolytopeTemplate>, kernel_radius: f64) -> Result<Self> {
        let s = MorseSet::star_polytope(space, Point::zeros(space.dim()), kernel_radius, template, 1.0, None)?;
        Self::from_template(space, &s)
    }

    pub fn template(&self) -> &MorseSet {
        &self.template
    }
}

impl MorseFamily for ScaledFamily {
    fn space(&self) -> &Space {
        &self.space
    }

    fn lambda(&self) -> f64 {
        self.template.lambda()
    }

    fn kappa_mode(&self) -> KappaMode {
        match self.template.shape() {
            Shape::Ball { center, .. } if self.template.lambda() == 1.0 && center.iter().all(|c| *c == 0.0) => {
                KappaMode::Balls
            }
            _ => KappaMode::Morse,
        }
    }

    fn member(&self, tag: &Point, size: f64) -> Result<MorseSet> {
        self.space.check(tag)?;
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::input(format!("member size must be positive, got {size}")));
        }
        Ok(self.template.translated(tag).rescaled(size))
    }

    fn inscribed(&self, cell: &AaBox) -> Option<MorseSet> {
        let d = self.space.dim();
        let s = (0..d)
            .map(|i| cell.width(i) / (self.rel.hi[i] - self.rel.lo[i]))
            .fold(f64::INFINITY, f64::min);
        if !(s > 0.0 && s.is_finite()) {
            return None;
        }
        let tag = Point::new((0..d).map(|i| {
            0.5 * (cell.lo[i] + cell.hi[i]) - 0.5 * s * (self.rel.lo[i] + self.rel.hi[i])
        }));
        Some(self.template.translated(&tag).rescaled(s))
    }

    fn unit_box(&self) -> &AaBox {
        &self.rel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;

    #[test]
    fn inscribed_cube_fills_linf_cell() {
        let sp = Space::new(2, Norm::Linf).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let cell = AaBox { lo: Point::from([0.0, 0.0]), hi: Point::from([0.5, 0.5]) };
        let s = fam.inscribed(&cell).unwrap();
        assert_eq!(s.bounding_box(&sp), cell);
        assert_eq!(fam.kappa_mode(), KappaMode::Balls);
        assert!((s.lambda() * s.inner_radius() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn interval_members_keep_their_shape() {
        let sp = Space::euclidean(2);
        let fam = ScaledFamily::intervals(&sp, &Point::from([2.0, 1.0]), &Point::from([0.3, 0.6])).unwrap();
        let s = fam.member(&Point::from([1.0, 1.0]), 0.1).unwrap();
        assert!((s.lambda() * s.inner_radius() - 0.1).abs() < 1e-15);
        assert_eq!(s.tag(), &Point::from([1.0, 1.0]));
        let cell = AaBox { lo: Point::from([0.0, 0.0]), hi: Point::from([1.0, 1.0]) };
        let t = fam.inscribed(&cell).unwrap();
        assert!(cell.contains_box(&t.bounding_box(&sp)));
        assert_eq!(fam.kappa_mode(), KappaMode::Morse);
    }
}

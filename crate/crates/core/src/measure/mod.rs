//! Radon measures, regions, measure evaluation, a.e. covers by exhaustion,
//! and differentiation diagnostics.

mod diagnostics;
mod exhaust;
mod family;
mod radon;
mod region;
mod volume;

pub use diagnostics::{approx_cont_defect, diff_quotient, DefectEstimate, Quotient, QuotientFlag};
pub use exhaust::{ae_cover, AeCover, CoverOptions, RoundStat};
pub(crate) use exhaust::working_domain;
pub use family::{KappaMode, MorseFamily, ScaledFamily};
pub use radon::{Atom, DensityPiece, RadonMeasure};
pub use region::{Part, Region};
pub use volume::{clip_polygon, disc_rect_area, polygon_area, quadrature, set_box_volume, set_volume, Measured};

use crate::error::{Error, Result};
use crate::geometry::{box_relation, AaBox, BoxRelation, MorseSet, Space};

const ABS_TOL: f64 = 1e-9;
const REL_TOL: f64 = 1e-6;

/// What to measure.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Set(&'a MorseSet),
    /// Interior of a set: atoms on the boundary are not counted.
    Interior(&'a MorseSet),
    Region(&'a Region),
    Box(&'a AaBox),
}

impl<'a> From<&'a MorseSet> for Target<'a> {
    fn from(s: &'a MorseSet) -> Self {
        Target::Set(s)
    }
}

impl<'a> From<&'a Region> for Target<'a> {
    fn from(r: &'a Region) -> Self {
        Target::Region(r)
    }
}

impl<'a> From<&'a AaBox> for Target<'a> {
    fn from(b: &'a AaBox) -> Self {
        Target::Box(b)
    }
}

fn check_dims(space: &Space, mu: &RadonMeasure) -> Result<()> {
    if space.dim() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: mu.dim() });
    }
    Ok(())
}

/// `mu(target)` with an absolute error bound.
///
/// Boxes, box-shaped balls, intervals, full balls, and all 2D shapes are
/// measured in closed form against density boxes. Remaining shape/box pairs
/// go through certified dyadic quadrature. Atoms are counted by membership,
/// respecting open and closed boundaries.
pub fn measure_of<'a>(space: &Space, mu: &RadonMeasure, target: impl Into<Target<'a>>) -> Result<Measured> {
    check_dims(space, mu)?;
    match target.into() {
        Target::Set(s) => {
            space.check(s.tag())?;
            let atoms = atom_mass(mu, &s.bounding_box(space), |x| s.contains_unchecked(space, x));
            Ok(lebesgue_of_set(space, mu, s)? + Measured::exact(atoms))
        }
        Target::Interior(s) => {
            space.check(s.tag())?;
            let atoms = atom_mass(mu, &s.bounding_box(space), |x| s.interior_contains_unchecked(space, x));
            Ok(lebesgue_of_set(space, mu, s)? + Measured::exact(atoms))
        }
        Target::Region(r) => {
            r.validate(space)?;
            region_measure(space, mu, r)
        }
        Target::Box(b) => {
            if b.dim() != space.dim() {
                return Err(Error::DimensionMismatch { expected: space.dim(), got: b.dim() });
            }
            Ok(Measured::exact(mu.mass_of_box(b)))
        }
    }
}

/// `mu(S ∩ region)`.
pub fn measure_in_region(space: &Space, mu: &RadonMeasure, s: &MorseSet, region: &Region) -> Result<Measured> {
    check_dims(space, mu)?;
    let hull = s.bounding_box(space);
    let atoms = atom_mass(mu, &hull, |x| s.contains_unchecked(space, x) && region.contains(space, x));
    Ok(density_of_set_in_region(space, mu, s, region)? + Measured::exact(atoms))
}

/// `mu(cell ∩ region)` for a closed box.
pub fn box_in_region(space: &Space, mu: &RadonMeasure, cell: &AaBox, region: &Region) -> Result<Measured> {
    check_dims(space, mu)?;
    let atoms = atom_mass(mu, cell, |x| region.contains(space, x));
    Ok(density_of_box_in_region(space, mu, cell, region)? + Measured::exact(atoms))
}

/// Absolutely continuous part of `mu(S)`.
pub(crate) fn density_of_set(space: &Space, mu: &RadonMeasure, s: &MorseSet) -> Result<Measured> {
    lebesgue_of_set(space, mu, s)
}

/// Absolutely continuous part of `mu(S ∩ region)`.
pub(crate) fn density_of_set_in_region(
    space: &Space,
    mu: &RadonMeasure,
    s: &MorseSet,
    region: &Region,
) -> Result<Measured> {
    let hull = s.bounding_box(space);
    match region.relation(space, &hull) {
        BoxRelation::Inside => lebesgue_of_set(space, mu, s),
        BoxRelation::Outside => Ok(Measured::default()),
        BoxRelation::Partial => lebesgue_in_region(space, mu, &hull, region, |c| box_relation(space, s, c), |c| {
            set_box_volume(space, s, c)
        }),
    }
}

/// Absolutely continuous part of `mu(cell ∩ region)`.
pub(crate) fn density_of_box_in_region(
    space: &Space,
    mu: &RadonMeasure,
    cell: &AaBox,
    region: &Region,
) -> Result<Measured> {
    match region.relation(space, cell) {
        BoxRelation::Inside => Ok(Measured::exact(mu.density_mass_of_box(cell))),
        BoxRelation::Outside => Ok(Measured::default()),
        BoxRelation::Partial => {
            lebesgue_in_region(space, mu, cell, region, |_| BoxRelation::Inside, |c| Some(c.volume()))
        }
    }
}

fn atom_mass(mu: &RadonMeasure, hull: &AaBox, member: impl Fn(&[f64]) -> bool) -> f64 {
    if mu.atoms().is_empty() {
        return 0.0;
    }
    mu.atoms_in_box(hull).into_iter().map(|i| &mu.atoms()[i]).filter(|a| member(&a.at)).map(|a| a.weight).sum()
}

fn lebesgue_of_set(space: &Space, mu: &RadonMeasure, s: &MorseSet) -> Result<Measured> {
    let hull = s.bounding_box(space);
    let mut total = Measured::default();
    for p in mu.pieces_meeting(&hull) {
        if p.density == 0.0 {
            continue;
        }
        let Some(clip) = p.cell.intersect(&hull) else { continue };
        let vol = match set_box_volume(space, s, &clip) {
            Some(v) => Measured::exact(v),
            None => quadrature(&clip, |c| box_relation(space, s, c), ABS_TOL, REL_TOL, volume::QUAD_MAX_CELLS),
        };
        total += vol.scaled(p.density);
    }
    Ok(total)
}

/// Lebesgue mass of `A ∩ region` inside `hull`, where `A` is described by a
/// cell classifier and an optional exact box-volume routine.
fn lebesgue_in_region(
    space: &Space,
    mu: &RadonMeasure,
    hull: &AaBox,
    region: &Region,
    classify: impl Fn(&AaBox) -> BoxRelation,
    exact: impl Fn(&AaBox) -> Option<f64>,
) -> Result<Measured> {
    let mut total = Measured::default();
    let pieces = mu.pieces_meeting(hull);
    if let Some(boxes) = region.disjoint_boxes() {
        for d in boxes.iter().filter_map(|d| d.intersect(hull)) {
            for p in &pieces {
                if p.density == 0.0 {
                    continue;
                }
                let Some(c) = p.cell.intersect(&d) else { continue };
                let vol = match exact(&c) {
                    Some(v) => Measured::exact(v),
                    None => quadrature(&c, &classify, ABS_TOL, REL_TOL, volume::QUAD_MAX_CELLS),
                };
                total += vol.scaled(p.density);
            }
        }
        return Ok(total);
    }
    for p in pieces {
        if p.density == 0.0 {
            continue;
        }
        let Some(c) = p.cell.intersect(hull) else { continue };
        if !c.is_bounded() {
            return Err(Error::Unsupported("quadrature over an unbounded domain".into()));
        }
        let both = |cell: &AaBox| match (classify(cell), region.relation(space, cell)) {
            (BoxRelation::Outside, _) | (_, BoxRelation::Outside) => BoxRelation::Outside,
            (BoxRelation::Inside, BoxRelation::Inside) => BoxRelation::Inside,
            _ => BoxRelation::Partial,
        };
        total += quadrature(&c, both, ABS_TOL, REL_TOL, volume::QUAD_MAX_CELLS).scaled(p.density);
    }
    Ok(total)
}

fn region_measure(space: &Space, mu: &RadonMeasure, r: &Region) -> Result<Measured> {
    let Some(hull) = r.hull(space) else {
        return Ok(Measured::default());
    };
    let atoms = atom_mass(mu, &hull, |x| r.contains(space, x));
    let leb = if let Some(boxes) = r.disjoint_boxes() {
        Measured::exact(boxes.iter().map(|b| mu.density_mass_of_box(b)).sum())
    } else {
        lebesgue_in_region(space, mu, &hull, r, |_| BoxRelation::Inside, |c| Some(c.volume()))?
    };
    Ok(leb + Measured::exact(atoms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Norm, Point};
    use approx::assert_relative_eq;

    #[test]
    fn half_box_of_unit_square() {
        let sp = Space::euclidean(2);
        let mu = RadonMeasure::lebesgue_on(AaBox::cube(&[0.5, 0.5], 0.5)).unwrap();
        let s = MorseSet::tagged_interval(
            &sp,
            Point::from([0.0, 0.0]),
            Point::from([0.5, 1.0]),
            Point::from([0.5, 0.5]),
            None,
        )
        .unwrap();
        let m = measure_of(&sp, &mu, &s).unwrap();
        assert_eq!(m, Measured::exact(0.5));
    }

    #[test]
    fn cross_polytope_volume() {
        let sp = Space::new(2, Norm::L1).unwrap();
        let mu = RadonMeasure::lebesgue_on(AaBox::cube(&[0.0, 0.0], 5.0)).unwrap();
        let s = MorseSet::closed_ball(&sp, Point::from([0.0, 0.0]), 1.0).unwrap();
        assert_relative_eq!(measure_of(&sp, &mu, &s).unwrap().value, 2.0);
    }

    #[test]
    fn atoms_follow_membership() {
        let sp = Space::euclidean(2);
        let mu = RadonMeasure::dirac(Point::from([1.0, 0.0]), 1.0).unwrap();
        let closed = MorseSet::closed_ball(&sp, Point::from([0.0, 0.0]), 1.0).unwrap();
        assert_eq!(measure_of(&sp, &mu, &closed).unwrap().value, 1.0);
        assert_eq!(measure_of(&sp, &mu, Target::Interior(&closed)).unwrap().value, 0.0);
        let open = MorseSet::open_ball_tagged(&sp, Point::from([0.0, 0.0]), 1.0, Point::from([0.0, 0.0])).unwrap();
        assert_eq!(measure_of(&sp, &mu, &open).unwrap().value, 0.0);
    }

    #[test]
    fn three_dimensional_ball_straddling_a_piece_uses_quadrature() {
        let sp = Space::euclidean(3);
        let mu = RadonMeasure::lebesgue_on(AaBox { lo: Point::from([0.0, -2.0, -2.0]), hi: Point::from([2.0, 2.0, 2.0]) })
            .unwrap();
        let s = MorseSet::closed_ball(&sp, Point::from([0.0, 0.0, 0.0]), 1.0).unwrap();
        let m = measure_of(&sp, &mu, &s).unwrap();
        let half = 2.0 * std::f64::consts::PI / 3.0;
        assert!(m.err > 0.0);
        assert!((m.value - half).abs() <= m.err);
    }

    #[test]
    fn set_inside_region_with_hole() {
        let sp = Space::euclidean(2);
        let mu = RadonMeasure::lebesgue_on(AaBox::cube(&[0.0, 0.0], 4.0)).unwrap();
        let region = Region::unit_cube(2);
        let s = MorseSet::closed_ball(&sp, Point::from([1.0, 1.0]), 0.5).unwrap();
        let m = measure_in_region(&sp, &mu, &s, &region).unwrap();
        assert_relative_eq!(m.value, std::f64::consts::PI * 0.25 / 4.0, epsilon = 1e-14);
        let r = measure_of(&sp, &mu, &region).unwrap();
        assert_eq!(r.value, 1.0);
    }
}

//! Differentiation quotients and approximate-continuity defects.

use serde::Serialize;

use super::{measure_of, MorseFamily, RadonMeasure, Target};
use crate::error::{Error, Result};
use crate::geometry::{box_relation, AaBox, BoxRelation, MorseSet, Point};
use crate::sampling::Halton;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientFlag {
    /// `mu(S) = 0`; the ratio is undefined.
    ZeroMeasure,
    /// `nu` has an atom at the tag that `mu` lacks, so ratios diverge.
    Unbounded,
}

/// One entry of a differentiation sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quotient {
    pub size: f64,
    pub diameter: f64,
    pub nu: f64,
    pub mu: f64,
    pub ratio: Option<f64>,
    pub flag: Option<QuotientFlag>,
}

/// Ratios `nu(S) / mu(S)` for members tagged at `a` with `lambda * r` running
/// through `sizes`, which must be strictly decreasing.
pub fn diff_quotient(
    nu: &RadonMeasure,
    mu: &RadonMeasure,
    a: &Point,
    family: &dyn MorseFamily,
    sizes: &[f64],
) -> Result<Vec<Quotient>> {
    let sp = family.space();
    sp.check(a)?;
    if sizes.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::input("sizes must be strictly decreasing"));
    }
    let atom_at = |m: &RadonMeasure| m.atoms().iter().filter(|t| t.at == *a).map(|t| t.weight).sum::<f64>();
    let diverges = atom_at(nu) > 0.0 && atom_at(mu) == 0.0;
    sizes
        .iter()
        .map(|&size| {
            let s = family.member(a, size)?;
            let n = measure_of(sp, nu, Target::Set(&s))?.value;
            let m = measure_of(sp, mu, Target::Set(&s))?.value;
            let (ratio, flag) = if m > 0.0 {
                (Some(n / m), diverges.then_some(QuotientFlag::Unbounded))
            } else {
                (None, Some(QuotientFlag::ZeroMeasure))
            };
            Ok(Quotient { size, diameter: s.diameter(sp), nu: n, mu: m, ratio, flag })
        })
        .collect()
}

/// Estimate of `mu(E) / mu(S)` with `E = {y in S : |f(y) - f(tag)| > eta}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectEstimate {
    pub fraction: f64,
    /// Standard error of the stratified estimate.
    pub std_err: f64,
    pub samples: usize,
}

const STRATA: usize = 4096;
const PER_STRATUM: usize = 16;

/// Stratified estimate of the approximate-continuity defect of `f` on `s`.
///
/// Atoms are evaluated exactly. The density part is split into dyadic strata
/// over the bounding box, each sampled with a fixed Halton sequence, so the
/// result is deterministic.
pub fn approx_cont_defect(
    f: &dyn Fn(&[f64]) -> f64,
    mu: &RadonMeasure,
    space: &crate::geometry::Space,
    s: &MorseSet,
    eta: f64,
) -> Result<DefectEstimate> {
    let total = measure_of(space, mu, Target::Set(s))?.value;
    if !(total > 0.0) {
        return Err(Error::input("defect is undefined when mu(S) = 0"));
    }
    let f0 = f(s.tag());
    let bad = |y: &[f64]| (f(y) - f0).abs() > eta;
    let bb = s.bounding_box(space);
    let mut bad_mass = 0.0;
    for i in mu.atoms_in_box(&bb) {
        let at = &mu.atoms()[i];
        if s.contains_unchecked(space, &at.at) && bad(&at.at) {
            bad_mass += at.weight;
        }
    }
    let d = space.dim();
    let per_axis = ((STRATA as f64).powf(1.0 / d as f64).floor() as usize).max(1);
    let mut var = 0.0;
    let mut samples = 0;
    let mut idx = vec![0usize; d];
    let mut halton = Halton::new(d);
    for _ in 0..per_axis.pow(d as u32) {
        let lo = Point::new((0..d).map(|i| bb.lo[i] + bb.width(i) * idx[i] as f64 / per_axis as f64));
        let hi = Point::new((0..d).map(|i| bb.lo[i] + bb.width(i) * (idx[i] + 1) as f64 / per_axis as f64));
        let cell = AaBox { lo, hi };
        for k in idx.iter_mut() {
            *k += 1;
            if *k < per_axis {
                break;
            }
            *k = 0;
        }
        let rel = box_relation(space, s, &cell);
        if rel == BoxRelation::Outside {
            continue;
        }
        let pieces = mu.pieces_meeting(&cell);
        if pieces.iter().all(|p| p.density == 0.0) {
            continue;
        }
        let mut weight_sum = 0.0;
        let mut bad_sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..PER_STRATUM {
            let u = halton.next_point();
            let y = Point::new((0..d).map(|i| cell.lo[i] + u[i] * cell.width(i)));
            samples += 1;
            if rel == BoxRelation::Partial && !s.contains_unchecked(space, &y) {
                continue;
            }
            let w = mu.density_at(&y);
            weight_sum += w;
            if bad(&y) {
                bad_sum += w;
                sq += w * w;
            }
        }
        let scale = cell.volume() / PER_STRATUM as f64;
        bad_mass += bad_sum * scale;
        let mean = bad_sum / PER_STRATUM as f64;
        var += scale * scale * PER_STRATUM as f64 * (sq / PER_STRATUM as f64 - mean * mean).max(0.0);
        let _ = weight_sum;
    }
    Ok(DefectEstimate { fraction: (bad_mass / total).clamp(0.0, 1.0), std_err: var.sqrt() / total, samples })
}

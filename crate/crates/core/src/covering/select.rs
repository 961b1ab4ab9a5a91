use rayon::prelude::*;

use super::TaggedFamily;
use crate::error::{Error, Result};
use crate::geometry::{sets_intersect, AaBox};
use crate::measure::{measure_of, RadonMeasure, Target};
use crate::spatial::BoxIndex;

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 1.0 && tau <= 2.0) {
        return Err(Error::input(format!("tau must lie in (1, 2], got {tau}")));
    }
    Ok(())
}

const PAR_THRESHOLD: usize = 4096;

fn diameters(fam: &TaggedFamily) -> Vec<f64> {
    let sp = fam.space();
    if fam.len() >= PAR_THRESHOLD {
        fam.sets().par_iter().map(|s| s.diameter(sp)).collect()
    } else {
        fam.sets().iter().map(|s| s.diameter(sp)).collect()
    }
}

/// Selection order: repeatedly take a remaining entry of largest diameter
/// (lowest index on ties) and drop every remaining tag in its interior.
///
/// For `alpha < beta` in the result, `tag_beta` is not interior to
/// `S(tag_alpha)` and `diam S(tag_beta) < tau * diam S(tag_alpha)`.
pub fn greedy_select(fam: &TaggedFamily, tau: f64) -> Result<Vec<usize>> {
    check_tau(tau)?;
    let n = fam.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let sp = fam.space();
    let diam = diameters(fam);
    let mut by_size: Vec<usize> = (0..n).collect();
    by_size.sort_by(|&a, &b| diam[b].total_cmp(&diam[a]).then(a.cmp(&b)));
    let tags = BoxIndex::bulk(sp.dim(), (0..n).map(|i| (AaBox::cube(fam.sets()[i].tag(), 0.0), i)).collect());
    let mut removed = vec![false; n];
    let mut order = Vec::new();
    let mut hits = Vec::new();
    for i in by_size {
        if removed[i] {
            continue;
        }
        removed[i] = true;
        order.push(i);
        let s = &fam.sets()[i];
        hits.clear();
        tags.query_into(&s.bounding_box(sp), &mut hits);
        for &j in &hits {
            if !removed[j] && s.interior_contains_unchecked(sp, fam.sets()[j].tag()) {
                removed[j] = true;
            }
        }
    }
    Ok(order)
}

/// Disjoint subfamilies of a selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    /// Entry indices per subfamily, each in selection order.
    pub families: Vec<Vec<usize>>,
    pub selection_order: Vec<usize>,
    /// False when some disjointness verdict came from sampling.
    pub exact: bool,
}

impl Partition {
    pub fn m(&self) -> usize {
        self.families.len()
    }

    /// Entries whose tag is not interior to any selected set.
    pub fn uncovered_tags(&self, fam: &TaggedFamily) -> Vec<usize> {
        let sp = fam.space();
        let sel = BoxIndex::bulk(
            sp.dim(),
            self.selection_order.iter().map(|&i| (fam.sets()[i].bounding_box(sp), i)).collect(),
        );
        (0..fam.len())
            .filter(|&k| {
                let t = fam.sets()[k].tag();
                !sel.query(&AaBox::cube(t, 0.0)).into_iter().any(|i| fam.sets()[i].interior_contains_unchecked(sp, t))
            })
            .collect()
    }
}

/// Sweep the selection order repeatedly, putting each unassigned entry into
/// the current subfamily when it is disjoint from everything already there.
pub fn partition_disjoint(fam: &TaggedFamily, order: &[usize]) -> Result<Partition> {
    let n = fam.len();
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n {
            return Err(Error::input(format!("order refers to entry {i} of a family of size {n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::input(format!("entry {i} appears twice in the order")));
        }
    }
    let sp = fam.space();
    let boxes: Vec<AaBox> = order.iter().map(|&i| fam.sets()[i].bounding_box(sp)).collect();
    let mut assigned = vec![false; order.len()];
    let mut left = order.len();
    let mut families = Vec::new();
    let mut exact = true;
    let mut hits = Vec::new();
    while left > 0 {
        let mut family = Vec::new();
        let mut index = BoxIndex::new(sp.dim());
        for pos in 0..order.len() {
            if assigned[pos] {
                continue;
            }
            let i = order[pos];
            hits.clear();
            index.query_into(&boxes[pos], &mut hits);
            let mut clash = false;
            for &j in &hits {
                let v = sets_intersect(sp, &fam.sets()[i], &fam.sets()[j]);
                exact &= v.is_exact();
                if v.intersects() {
                    clash = true;
                    break;
                }
            }
            if !clash {
                index.insert(&boxes[pos], i);
                family.push(i);
                assigned[pos] = true;
                left -= 1;
            }
        }
        families.push(family);
    }
    Ok(Partition { families, selection_order: order.to_vec(), exact })
}

/// Result of the heavy-subfamily selection.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavySelection {
    /// Index into `Partition::families` of the first heaviest subfamily.
    pub family: usize,
    /// Minimal prefix of that subfamily holding at least half its mass.
    pub prefix: Vec<usize>,
    /// `sum mu(int S)` per subfamily.
    pub family_masses: Vec<f64>,
    /// `sum mu(int S)` over the prefix; at least `mu*(tags) / (2 m)`.
    pub lower_bound: f64,
}

/// `mu(int S)` for every entry.
pub(crate) fn interior_masses(fam: &TaggedFamily, mu: &RadonMeasure) -> Result<Vec<f64>> {
    let sp = fam.space();
    let one = |s| measure_of(sp, mu, Target::Interior(s)).map(|m| m.value);
    let masses: Vec<f64> = if fam.len() >= PAR_THRESHOLD {
        fam.sets().par_iter().map(one).collect::<Result<_>>()?
    } else {
        fam.sets().iter().map(one).collect::<Result<_>>()?
    };
    if masses.iter().any(|m| !m.is_finite()) {
        return Err(Error::input("measure is not finite on the union of the family"));
    }
    Ok(masses)
}

/// First subfamily maximizing `sum mu(int S)` and its minimal prefix with at
/// least half of that sum.
pub fn heavy_subfamily(part: &Partition, fam: &TaggedFamily, mu: &RadonMeasure) -> Result<HeavySelection> {
    let masses = interior_masses(fam, mu)?;
    heavy_from_masses(part, &masses)
}

pub(crate) fn heavy_from_masses(part: &Partition, masses: &[f64]) -> Result<HeavySelection> {
    if part.families.is_empty() {
        return Err(Error::input("partition has no subfamilies"));
    }
    let family_masses: Vec<f64> =
        part.families.iter().map(|f| f.iter().map(|&i| masses[i]).sum::<f64>()).collect();
    let mut family = 0;
    for (k, m) in family_masses.iter().enumerate() {
        if *m > family_masses[family] {
            family = k;
        }
    }
    let half = 0.5 * family_masses[family];
    let mut acc = 0.0;
    let mut prefix = Vec::new();
    for &i in &part.families[family] {
        if acc >= half && !prefix.is_empty() {
            break;
        }
        acc += masses[i];
        prefix.push(i);
    }
    Ok(HeavySelection { family, prefix, family_masses, lower_bound: acc })
}

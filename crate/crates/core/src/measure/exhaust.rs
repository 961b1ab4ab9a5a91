//! Disjoint covers of `mu`-almost all of a region, built in rounds.
//!
//! Each round builds a pool of delta-fine candidates inside an open
//! superset `O_k` of the region, runs greedy selection and the disjoint
//! partition, and keeps the heavy prefix. Candidates come from a dyadic cell
//! frontier: every live cell offers the largest family member inscribed in
//! it, and cells that cannot host an admissible member are split. Atoms get
//! dedicated candidates centered on them.

use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use super::{
    density_of_box_in_region, density_of_set, density_of_set_in_region, measure_of, KappaMode, Measured,
    MorseFamily, RadonMeasure, Region, Target,
};
use crate::covering::{
    check_tau, greedy_select, heavy_from_masses, kappa_bound, partition_disjoint, Partition, TaggedFamily,
    DEFAULT_TAU,
};
use crate::error::{Error, Result};
use crate::geometry::{box_relation, sets_intersect, AaBox, BoxRelation, MorseSet, Point, Shape, Space};
use crate::integrate::Gauge;
use crate::numeric::CompensatedSum;
use crate::spatial::BoxIndex;

/// Knobs for [`ae_cover`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoverOptions {
    /// Budget for `sum_n mu(S_n \ Omega)`.
    pub eps: f64,
    /// Residual target; defaults to `1e-6 * mu(Omega)`.
    pub tol: Option<f64>,
    pub tau: f64,
    pub seed: u64,
    pub max_sets: usize,
    /// Live grid cells allowed during refinement; bounds memory.
    pub max_cells: usize,
    pub max_depth: u16,
    pub max_rounds: usize,
    /// Run greedy selection and partition even when the pool is known to be
    /// pairwise disjoint.
    pub full_selection: bool,
}

impl CoverOptions {
    pub fn new(eps: f64) -> Self {
        CoverOptions {
            eps,
            tol: None,
            tau: DEFAULT_TAU,
            seed: 0,
            max_sets: 8_000_000,
            max_cells: 6_000_000,
            max_depth: 48,
            max_rounds: 500,
            full_selection: false,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }
}

/// Bookkeeping for one selection round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundStat {
    pub round: usize,
    /// Dilation radius of `O_k`.
    pub eta: f64,
    pub pool: usize,
    pub pool_mass: f64,
    /// Number of disjoint subfamilies in the partition.
    pub families: usize,
    pub chosen: usize,
    pub captured: f64,
    /// `mu(Omega) - sum mu(S_n ∩ Omega)` after the round.
    pub residual: f64,
}

/// A countable disjoint delta-fine family covering `mu`-almost all of `Omega`
/// up to `residual`.
#[derive(Clone, Debug)]
pub struct AeCover {
    pub sets: Vec<MorseSet>,
    /// `mu(S_n)`.
    pub masses: Vec<f64>,
    /// `mu(S_n ∩ Omega)`.
    pub inside: Vec<f64>,
    pub omega_mass: Measured,
    pub residual: Measured,
    /// `sum mu(S_n \ Omega)`.
    pub excess: f64,
    pub tol: f64,
    pub eps: f64,
    pub kappa: u128,
    pub kappa_mode: KappaMode,
    /// False when some disjointness verdict was sampled.
    pub exact: bool,
    pub rounds: Vec<RoundStat>,
    /// Region actually covered; differs from `Omega` only when `Omega` is
    /// unbounded and was clipped to the support of `mu`.
    pub domain: Region,
}

impl AeCover {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Re-check disjointness, fineness, tags, the residual and the excess
    /// from scratch.
    pub fn verify(&self, space: &Space, mu: &RadonMeasure, delta: &Gauge) -> Result<()> {
        let index = BoxIndex::bulk(
            space.dim(),
            self.sets.iter().enumerate().map(|(i, s)| (s.bounding_box(space), i)).collect(),
        );
        let mut hits = Vec::new();
        for (i, s) in self.sets.iter().enumerate() {
            if !self.domain.contains(space, s.tag()) {
                return Err(Error::contract(format!("set {i}: tag {:?} is outside the region", s.tag().coords())));
            }
            let d = delta.at(s.tag())?;
            if !s.is_delta_fine(d) {
                return Err(Error::contract(format!("set {i} is not fine: lambda*r > {d}")));
            }
            hits.clear();
            index.query_into(&s.bounding_box(space), &mut hits);
            for &j in hits.iter().filter(|&&j| j > i) {
                if sets_intersect(space, s, &self.sets[j]).intersects() {
                    return Err(Error::contract(format!("sets {i} and {j} intersect")));
                }
            }
        }
        let omega = measure_of(space, mu, Target::Region(&self.domain))?;
        let mut covered = Measured::default();
        let mut excess = CompensatedSum::new();
        for s in &self.sets {
            let full = measure_of(space, mu, Target::Set(s))?;
            let inside = super::measure_in_region(space, mu, s, &self.domain)?;
            covered += inside;
            excess.add(full.value - inside.value);
        }
        let residual = omega.value - covered.value;
        let slack = omega.err + covered.err + 1e-12 * omega.value.max(1.0);
        if residual > self.tol + slack {
            return Err(Error::contract(format!("residual {residual} exceeds tolerance {}", self.tol)));
        }
        if excess.value() > self.eps + slack {
            return Err(Error::contract(format!("excess {} exceeds budget {}", excess.value(), self.eps)));
        }
        Ok(())
    }
}

struct Cand {
    set: MorseSet,
    mass: f64,
    inside: f64,
    inside_leb: f64,
    interior: f64,
    err: f64,
    diam: f64,
    /// Dilation radius the containment in `O_k` was checked against.
    eta: f64,
}

struct Cell {
    bx: AaBox,
    level: u16,
    jittered: bool,
    /// Density mass of `cell ∩ Omega`.
    mass: f64,
    blockers: SmallVec<[u32; 2]>,
    cand: Option<Box<Cand>>,
}

enum Made {
    Dropped,
    Live(Cell),
}

struct Ctx<'a> {
    space: &'a Space,
    mu: &'a RadonMeasure,
    work: &'a Region,
    family: &'a dyn MorseFamily,
    delta: &'a Gauge,
    gap: f64,
    seed: u64,
    jitter: f64,
    has_atoms: bool,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn unit_hash(seed: u64, b: &AaBox) -> f64 {
    let mut h = splitmix(seed);
    for c in b.lo.iter().chain(b.hi.iter()) {
        h = splitmix(h ^ c.to_bits());
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Center and radius of a closed ball containing `s`.
fn outer_ball<'s>(space: &Space, s: &'s MorseSet) -> (&'s [f64], f64) {
    match s.shape() {
        Shape::Ball { center, radius, .. } => (center, *radius),
        _ => (s.tag(), s.outer_radius(space)),
    }
}

fn shrink(b: &AaBox, g: f64) -> AaBox {
    let d = b.dim();
    let lo = Point::new((0..d).map(|i| b.lo[i] + g * b.width(i)));
    let hi = Point::new((0..d).map(|i| b.hi[i] - g * b.width(i)));
    AaBox { lo, hi }
}

impl Ctx<'_> {
    /// Shrink `s` about its tag until no atom sits in `cl(S) \ S`.
    fn avoid_boundary_atoms(&self, s: MorseSet) -> Option<MorseSet> {
        if !self.has_atoms {
            return Some(s);
        }
        let sp = self.space;
        let clean = |t: &MorseSet| {
            self.mu.atoms_in_box(&t.bounding_box(sp)).into_iter().all(|i| {
                let x = &self.mu.atoms()[i].at;
                t.contains_unchecked(sp, x) || !t.closure_contains_unchecked(sp, x)
            })
        };
        if clean(&s) {
            return Some(s);
        }
        (1..64).map(|j| s.rescaled(1.0 - j as f64 / 64.0)).find(|t| clean(t))
    }

    fn evaluate(&self, set: MorseSet, eta: f64) -> Result<Cand> {
        let sp = self.space;
        let leb = density_of_set(sp, self.mu, &set)?;
        let inside_leb = density_of_set_in_region(sp, self.mu, &set, self.work)?;
        let (mut mass, mut inside, mut interior) = (leb.value, inside_leb.value, leb.value);
        if self.has_atoms {
            for i in self.mu.atoms_in_box(&set.bounding_box(sp)) {
                let a = &self.mu.atoms()[i];
                if set.contains_unchecked(sp, &a.at) {
                    mass += a.weight;
                    if self.work.contains(sp, &a.at) {
                        inside += a.weight;
                    }
                    if set.interior_contains_unchecked(sp, &a.at) {
                        interior += a.weight;
                    }
                }
            }
        }
        Ok(Cand {
            diam: set.diameter(sp),
            set,
            mass,
            inside,
            inside_leb: inside_leb.value,
            interior,
            err: leb.err + inside_leb.err,
            eta,
        })
    }

    fn candidate(&self, cell: &AaBox, outer: &Region, eta: f64) -> Result<Option<Cand>> {
        let sp = self.space;
        let Some(s) = self.family.inscribed(&shrink(cell, self.gap)) else {
            return Ok(None);
        };
        if !self.work.contains(sp, s.tag()) {
            return Ok(None);
        }
        let d = self.delta.at(s.tag())?;
        if !s.is_delta_fine(d) {
            return Ok(None);
        }
        if outer.relation(sp, &s.bounding_box(sp)) != BoxRelation::Inside {
            return Ok(None);
        }
        match self.avoid_boundary_atoms(s) {
            Some(s) => self.evaluate(s, eta).map(Some),
            None => Ok(None),
        }
    }

    /// Largest member in `cell` clear of the outer balls of `blockers`,
    /// found by a grid seed and a pattern search over the tag. Kept only when
    /// its size is at least a quarter of the inscribed one.
    fn avoiding(&self, cell: &AaBox, blockers: &[u32], chosen: &[MorseSet], outer: &Region, eta: f64) -> Result<Option<Cand>> {
        let sp = self.space;
        let d = sp.dim();
        let inner = shrink(cell, self.gap);
        let unit = self.family.unit_box();
        let balls: Vec<(&[f64], f64)> = blockers.iter().map(|&b| outer_ball(sp, &chosen[b as usize])).collect();
        let size_at = |t: &[f64]| -> f64 {
            let mut s = f64::INFINITY;
            for (i, &x) in t.iter().enumerate().take(d) {
                if !(inner.lo[i] <= x && x <= inner.hi[i]) {
                    return 0.0;
                }
                if unit.lo[i] < 0.0 {
                    s = s.min((x - inner.lo[i]) / -unit.lo[i]);
                }
                if unit.hi[i] > 0.0 {
                    s = s.min((inner.hi[i] - x) / unit.hi[i]);
                }
            }
            for (c, r) in &balls {
                s = s.min((sp.dist(t, c) - r) * (1.0 - self.gap));
            }
            s.max(0.0)
        };
        let full = (0..d).map(|i| inner.width(i) / (unit.hi[i] - unit.lo[i])).fold(f64::INFINITY, f64::min);
        if !(full > 0.0 && full.is_finite()) {
            return Ok(None);
        }
        let k: usize = match d {
            1 | 2 => 4,
            3 => 3,
            _ => 2,
        };
        let mut best = (0.0, inner.center());
        let mut idx = vec![0usize; d];
        for _ in 0..k.pow(d as u32) {
            let t = Point::new((0..d).map(|i| inner.lo[i] + inner.width(i) * (idx[i] as f64 + 0.5) / k as f64));
            let s = size_at(&t);
            if s > best.0 {
                best = (s, t);
            }
            for j in idx.iter_mut() {
                *j += 1;
                if *j < k {
                    break;
                }
                *j = 0;
            }
        }
        let mut step = (0..d).map(|i| inner.width(i)).fold(f64::INFINITY, f64::min) / (2 * k) as f64;
        for _ in 0..32 {
            let mut moved = false;
            for i in 0..d {
                for dir in [-1.0, 1.0] {
                    let mut t = best.1.clone();
                    t.coords_mut()[i] += dir * step;
                    let s = size_at(&t);
                    if s > best.0 {
                        best = (s, t);
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        let (size, tag) = best;
        if size < 0.25 * full || !self.work.contains(sp, &tag) || !(size <= self.delta.at(&tag)?) {
            return Ok(None);
        }
        let s = self.family.member(&tag, size)?;
        if outer.relation(sp, &s.bounding_box(sp)) != BoxRelation::Inside {
            return Ok(None);
        }
        match self.avoid_boundary_atoms(s) {
            Some(s) => self.evaluate(s, eta).map(Some),
            None => Ok(None),
        }
    }

    fn make_cell(
        &self,
        bx: AaBox,
        level: u16,
        jittered: bool,
        parent_blockers: &[u32],
        chosen: &[MorseSet],
        outer: &Region,
        eta: f64,
    ) -> Result<Made> {
        let mass = density_of_box_in_region(self.space, self.mu, &bx, self.work)?.value;
        if !(mass > 0.0) {
            return Ok(Made::Dropped);
        }
        let mut blockers = SmallVec::new();
        for &b in parent_blockers {
            match box_relation(self.space, &chosen[b as usize], &bx) {
                BoxRelation::Inside => return Ok(Made::Dropped),
                BoxRelation::Partial => blockers.push(b),
                BoxRelation::Outside => {}
            }
        }
        let mut cell = Cell { bx, level, jittered, mass, blockers, cand: None };
        let cand = if cell.blockers.is_empty() {
            self.candidate(&cell.bx, outer, eta)?
        } else {
            self.avoiding(&cell.bx, &cell.blockers, chosen, outer, eta)?
        };
        if let Some(c) = cand {
            if !cell.jittered && self.jitter > 0.0 && unit_hash(self.seed, &cell.bx) < self.jitter {
                cell.jittered = true;
            } else {
                cell.cand = Some(Box::new(c));
            }
        }
        Ok(Made::Live(cell))
    }
}

const PAR_MIN: usize = 2048;

/// `Omega` clipped to the support hull of `mu` when unbounded, with the
/// bounded hull that the cover lives in (`None` when `mu` misses `Omega`).
pub(crate) fn working_domain(space: &Space, mu: &RadonMeasure, omega: &Region) -> Result<(Region, Option<AaBox>)> {
    Ok(match (omega.hull(space), mu.support_hull()) {
        (Some(h), Some(sup)) => match h.intersect(&sup) {
            Some(hull) if hull.is_bounded() => {
                let work = if h.is_bounded() { omega.clone() } else { omega.clipped(space, &hull) };
                (work, Some(hull))
            }
            Some(_) => return Err(Error::input("mu(Omega) is not finite: bound Omega or the support of mu")),
            None => (omega.clone(), None),
        },
        _ => (omega.clone(), None),
    })
}

/// Build a countable disjoint family of delta-fine members of `family`,
/// tagged in `omega` and contained in an open set `O ⊇ Omega` with
/// `mu(O \ Omega) < eps`, covering all of `omega` except a residual of
/// `mu`-mass at most `tol`.
///
/// Fails with `Stalled` when the depth, set or round budget runs out first,
/// and with `NotFine` when no admissible member exists around an atom.
pub fn ae_cover(
    mu: &RadonMeasure,
    omega: &Region,
    family: &dyn MorseFamily,
    delta: &Gauge,
    opts: &CoverOptions,
) -> Result<AeCover> {
    let space = family.space();
    let d = space.dim();
    omega.validate(space)?;
    if mu.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: mu.dim() });
    }
    check_tau(opts.tau)?;
    if !(opts.eps > 0.0 && opts.eps.is_finite()) {
        return Err(Error::input(format!("eps must be positive, got {}", opts.eps)));
    }
    let kappa_mode = family.kappa_mode();
    let kappa = kappa_bound(space, family.lambda(), kappa_mode)?;

    let (work, hull) = working_domain(space, mu, omega)?;
    let omega_mass = match &hull {
        Some(_) => measure_of(space, mu, Target::Region(&work))?,
        None => Measured::default(),
    };
    let tol = opts.tol.unwrap_or(1e-6 * omega_mass.value);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::input(format!("tol must be nonnegative, got {tol}")));
    }
    let mut out = AeCover {
        sets: Vec::new(),
        masses: Vec::new(),
        inside: Vec::new(),
        omega_mass,
        residual: omega_mass,
        excess: 0.0,
        tol,
        eps: opts.eps,
        kappa,
        kappa_mode,
        exact: true,
        rounds: Vec::new(),
        domain: work.clone(),
    };
    let Some(hull) = hull else { return Ok(out) };
    if omega_mass.value <= tol {
        return Ok(out);
    }

    let tol_rel = tol / omega_mass.value;
    let gap = (0.05 * tol_rel / d as f64).clamp(1e-9, 1e-3) * (1.0 + 0.5 * unit_hash(opts.seed ^ 0x5eed, &hull));
    let in_omega_atoms: Vec<usize> =
        (0..mu.atoms().len()).filter(|&i| work.contains(space, &mu.atoms()[i].at)).collect();
    let ctx = Ctx {
        space,
        mu,
        work: &work,
        family,
        delta,
        gap,
        seed: opts.seed,
        jitter: if opts.seed == 0 { 0.0 } else { 0.05 },
        has_atoms: !mu.atoms().is_empty(),
    };

    let eta_max = match (0..d).map(|i| hull.width(i)).fold(0.0, f64::max) {
        w if w > 0.0 => w,
        _ => 1.0,
    };
    let excess_at = |eta: f64| -> Result<f64> {
        let m = measure_of(space, mu, Target::Region(&work.dilated(space, eta)))?;
        Ok(m.value + m.err + omega_mass.err - omega_mass.value)
    };
    let dilation = |budget: f64, prev: f64| -> Result<f64> {
        if excess_at(prev)? < budget {
            return Ok(prev);
        }
        let (mut lo, mut hi) = (0.0, prev);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if excess_at(mid)? < budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo > 0.0 {
            Ok(lo)
        } else {
            Err(Error::input("mu charges the boundary of Omega from outside; no open superset fits the budget"))
        }
    };

    let mut eta = dilation(0.5 * opts.eps, eta_max)?;
    let mut outer = work.dilated(space, eta);

    // Root grid: roughly cubic cells, seeded count per axis.
    let mut ready: Vec<Cell> = Vec::new();
    let mut pending: Vec<Cell> = Vec::new();
    let degenerate = (0..d).any(|i| !(hull.width(i) > 0.0));
    if !degenerate {
        let wmin = (0..d).map(|i| hull.width(i)).fold(f64::INFINITY, f64::min);
        let base = 1 + (opts.seed % 3) as usize;
        let counts: Vec<usize> = (0..d).map(|i| (base as f64 * hull.width(i) / wmin).ceil().min(64.0) as usize).collect();
        let total: usize = counts.iter().product();
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let lo = Point::new((0..d).map(|i| hull.lo[i] + hull.width(i) * idx[i] as f64 / counts[i] as f64));
            let hi = Point::new((0..d).map(|i| {
                if idx[i] + 1 == counts[i] {
                    hull.hi[i]
                } else {
                    hull.lo[i] + hull.width(i) * (idx[i] + 1) as f64 / counts[i] as f64
                }
            }));
            if let Made::Live(c) = ctx.make_cell(AaBox { lo, hi }, 0, false, &[], &[], &outer, eta)? {
                if c.cand.is_some() {
                    ready.push(c);
                } else {
                    pending.push(c);
                }
            }
            for i in 0..d {
                idx[i] += 1;
                if idx[i] < counts[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    let mut uncovered_atoms = in_omega_atoms;
    let mut chosen_index = (!uncovered_atoms.is_empty()).then(|| BoxIndex::new(d));
    let mut covered = CompensatedSum::new();
    let mut covered_err = 0.0;
    let mut excess = CompensatedSum::new();
    let abandon_budget = 0.25 * tol;
    let mut abandoned = 0.0;
    let residual_of = |covered: &CompensatedSum| omega_mass.value - covered.value();

    for round in 0.. {
        if round >= opts.max_rounds {
            return Err(Error::Stalled {
                residual: residual_of(&covered),
                tol,
                reason: format!("round limit {} reached", opts.max_rounds),
            });
        }
        if round > 0 {
            let next = dilation(opts.eps / 2f64.powi(round as i32 + 1), eta)?;
            if next < eta {
                eta = next;
                outer = work.dilated(space, eta);
                let mut keep = Vec::with_capacity(ready.len());
                for mut c in ready.drain(..) {
                    let cand = c.cand.as_ref().expect("ready cells carry a candidate");
                    if cand.eta > eta && outer.relation(space, &cand.set.bounding_box(space)) != BoxRelation::Inside {
                        c.cand = None;
                        pending.push(c);
                    } else {
                        keep.push(c);
                    }
                }
                ready = keep;
            }
        }
        let residual = residual_of(&covered);

        // Atom candidates: largest admissible member, halved until it fits.
        let mut atom_cands: Vec<(usize, Cand)> = Vec::new();
        for &ai in &uncovered_atoms {
            let at = &mu.atoms()[ai].at;
            let mut size = delta.at(at)?;
            let mut found = None;
            for _ in 0..96 {
                let s = family.member(at, size)?;
                let bb = s.bounding_box(space);
                let fits = outer.relation(space, &bb) == BoxRelation::Inside
                    && chosen_index.as_ref().is_none_or(|ix| {
                        ix.query(&bb).into_iter().all(|j| !sets_intersect(space, &s, &out.sets[j]).intersects())
                    });
                if fits {
                    if let Some(s) = ctx.avoid_boundary_atoms(s) {
                        found = Some(s);
                        break;
                    }
                }
                size *= 0.5;
            }
            let Some(s) = found else {
                return Err(Error::NotFine {
                    tag: at.coords().to_vec(),
                    reason: "no admissible member around the atom".into(),
                });
            };
            atom_cands.push((ai, ctx.evaluate(s, eta)?));
        }

        // Refine until the pool holds half of what is left.
        loop {
            let pool_mass: f64 = ready.iter().map(|c| c.cand.as_ref().map_or(0.0, |k| k.inside)).sum::<f64>()
                + atom_cands.iter().map(|(_, c)| c.inside).sum::<f64>();
            if pool_mass >= 0.5 * (residual - abandoned) || pending.is_empty() {
                break;
            }
            let waiting: f64 = pending.iter().map(|c| c.mass).sum();
            if waiting <= abandon_budget - abandoned && !ready.is_empty() {
                abandoned += waiting;
                pending.clear();
                break;
            }
            let deepest = pending.iter().map(|c| c.level).max().unwrap_or(0);
            if deepest >= opts.max_depth {
                let stuck: f64 = pending.iter().filter(|c| c.level >= opts.max_depth).map(|c| c.mass).sum();
                if stuck > abandon_budget - abandoned {
                    return Err(Error::Stalled {
                        residual,
                        tol,
                        reason: format!("depth limit {} reached with mass {stuck} unresolved", opts.max_depth),
                    });
                }
                abandoned += stuck;
                pending.retain(|c| c.level < opts.max_depth);
                continue;
            }
            if 4 * pending.len() + ready.len() > opts.max_cells {
                return Err(Error::Stalled {
                    residual,
                    tol,
                    reason: format!("cell budget {} exhausted at depth {deepest}", opts.max_cells),
                });
            }
            let parents = std::mem::take(&mut pending);
            let spawn = |p: &Cell| -> Result<Vec<Made>> {
                p.bx.halves()
                    .into_iter()
                    .map(|b| ctx.make_cell(b, p.level + 1, p.jittered, &p.blockers, &out.sets, &outer, eta))
                    .collect()
            };
            let made: Vec<Vec<Made>> = if parents.len() >= PAR_MIN {
                parents.par_iter().map(spawn).collect::<Result<_>>()?
            } else {
                parents.iter().map(spawn).collect::<Result<_>>()?
            };
            for m in made.into_iter().flatten() {
                if let Made::Live(c) = m {
                    if c.cand.is_some() {
                        ready.push(c);
                    } else {
                        pending.push(c);
                    }
                }
            }
        }

        let n_cells = ready.len();
        let pool_len = n_cells + atom_cands.len();
        if pool_len == 0 {
            if residual <= tol {
                break;
            }
            return Err(Error::Stalled { residual, tol, reason: "no admissible candidates remain".into() });
        }
        let cand_at = |k: usize| -> &Cand {
            if k < n_cells {
                ready[k].cand.as_deref().expect("ready cells carry a candidate")
            } else {
                &atom_cands[k - n_cells].1
            }
        };
        let pool_mass: f64 = (0..pool_len).map(|k| cand_at(k).inside).sum();
        let part = if atom_cands.is_empty() && !opts.full_selection {
            // Cell candidates sit in pairwise disjoint open cells: no tag is
            // interior to another member and no two members meet, so greedy
            // selection reduces to the diameter order and the partition to a
            // single family.
            let mut order: Vec<usize> = (0..pool_len).collect();
            order.sort_by(|&a, &b| cand_at(b).diam.total_cmp(&cand_at(a).diam));
            Partition { families: vec![order.clone()], selection_order: order, exact: true }
        } else {
            let sets: Vec<MorseSet> = (0..pool_len).map(|k| cand_at(k).set.clone()).collect();
            let fam = TaggedFamily::from_members(space, sets, family.lambda());
            let order = greedy_select(&fam, opts.tau)?;
            partition_disjoint(&fam, &order)?
        };
        if part.m() as u128 > kappa {
            return Err(Error::contract(format!("partition used {} families, above the bound {kappa}", part.m())));
        }
        out.exact &= part.exact;
        let masses: Vec<f64> = (0..pool_len).map(|k| cand_at(k).interior).collect();
        let heavy = heavy_from_masses(&part, &masses)?;

        let mut picked = vec![false; pool_len];
        for &k in &heavy.prefix {
            picked[k] = true;
        }
        let first_new = out.sets.len();
        let mut captured = CompensatedSum::new();
        let mut refill = Vec::new();
        let mut keep = Vec::with_capacity(n_cells);
        for (k, mut c) in ready.drain(..).enumerate() {
            if !picked[k] {
                keep.push(c);
                continue;
            }
            let cand = c.cand.take().expect("ready cells carry a candidate");
            let id = out.sets.len() as u32;
            captured.add(cand.inside);
            covered.add(cand.inside);
            covered_err += cand.err;
            excess.add(cand.mass - cand.inside);
            out.masses.push(cand.mass);
            out.inside.push(cand.inside);
            out.sets.push(cand.set);
            let rem = c.mass - cand.inside_leb;
            let negligible = 0.25 * tol * c.mass / omega_mass.value;
            if rem <= negligible {
                continue;
            }
            match out.sets[id as usize].as_box(space) {
                Some(bb) => {
                    // Box members leave a box remainder: tile it exactly.
                    for piece in shrink(&c.bx, gap).minus(&bb) {
                        if let Made::Live(p) =
                            ctx.make_cell(piece, c.level + 1, c.jittered, &c.blockers, &out.sets, &outer, eta)?
                        {
                            if p.mass > negligible / (2 * d) as f64 {
                                refill.push(p);
                            }
                        }
                    }
                }
                None => {
                    c.blockers.push(id);
                    refill.push(c);
                }
            }
        }
        for c in refill {
            if c.cand.is_some() {
                keep.push(c);
            } else {
                pending.push(c);
            }
        }
        ready = keep;
        let mut atom_sets = Vec::new();
        for (k, (_, cand)) in atom_cands.into_iter().enumerate() {
            if !picked[n_cells + k] {
                continue;
            }
            captured.add(cand.inside);
            covered.add(cand.inside);
            covered_err += cand.err;
            excess.add(cand.mass - cand.inside);
            atom_sets.push(out.sets.len() as u32);
            out.masses.push(cand.mass);
            out.inside.push(cand.inside);
            out.sets.push(cand.set);
        }
        // Atom sets reach across cells: block or retire the cells they touch.
        for &id in &atom_sets {
            let s = &out.sets[id as usize];
            let bb = s.bounding_box(space);
            let mut keep = Vec::with_capacity(ready.len());
            for mut c in ready.drain(..) {
                if c.bx.intersect(&bb).is_none() {
                    keep.push(c);
                    continue;
                }
                match box_relation(space, s, &c.bx) {
                    BoxRelation::Inside => {}
                    BoxRelation::Outside => keep.push(c),
                    BoxRelation::Partial => {
                        c.blockers.push(id);
                        let hit = c.cand.as_ref().is_some_and(|k| sets_intersect(space, &k.set, s).intersects());
                        if hit {
                            c.cand = None;
                            pending.push(c);
                        } else {
                            keep.push(c);
                        }
                    }
                }
            }
            ready = keep;
            pending.retain_mut(|c| {
                if c.bx.intersect(&bb).is_none() {
                    return true;
                }
                match box_relation(space, s, &c.bx) {
                    BoxRelation::Inside => false,
                    BoxRelation::Outside => true,
                    BoxRelation::Partial => {
                        c.blockers.push(id);
                        true
                    }
                }
            });
        }
        if let Some(ix) = chosen_index.as_mut() {
            for (j, s) in out.sets.iter().enumerate().skip(first_new) {
                ix.insert(&s.bounding_box(space), j);
            }
            uncovered_atoms.retain(|&ai| {
                let at = &mu.atoms()[ai].at;
                !ix.query(&AaBox::cube(at, 0.0)).into_iter().any(|j| out.sets[j].contains_unchecked(space, at))
            });
        }
        let residual = residual_of(&covered);
        out.rounds.push(RoundStat {
            round,
            eta,
            pool: pool_len,
            pool_mass,
            families: part.m(),
            chosen: out.sets.len() - first_new,
            captured: captured.value(),
            residual,
        });
        if out.sets.len() > opts.max_sets {
            return Err(Error::Stalled { residual, tol, reason: format!("set budget {} exhausted", opts.max_sets) });
        }
        if residual + omega_mass.err + covered_err <= tol {
            break;
        }
    }
    out.residual = Measured { value: residual_of(&covered), err: omega_mass.err + covered_err };
    out.excess = excess.value().max(0.0);
    Ok(out)
}

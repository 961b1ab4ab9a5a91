use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Space};
pub use crate::measure::KappaMode;
use crate::sampling::{directions, Halton};

/// Points in `B(0, container_radius)` (or on its surface) at pairwise
/// distance at least `min_pairwise_distance`.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingWitness {
    pub points: Vec<Point>,
    pub min_pairwise_distance: f64,
    pub container_radius: f64,
    pub anchored: bool,
    pub surface_only: bool,
}

/// Relative slack allowed for surface membership of computed points.
pub const SURFACE_TOL: f64 = 1e-12;

impl PackingWitness {
    /// Re-check every invariant from scratch.
    pub fn verify(&self, space: &Space) -> bool {
        let r = self.container_radius;
        let placed = self.points.iter().all(|p| {
            let n = space.norm().eval(p);
            if self.surface_only {
                (n - r).abs() <= SURFACE_TOL * r
            } else {
                n <= r
            }
        });
        let spread = self.points.iter().enumerate().all(|(i, p)| {
            self.points[i + 1..].iter().all(|q| space.dist(p, q) >= self.min_pairwise_distance)
        });
        let anchor = !self.anchored || self.points.iter().any(|p| p.iter().all(|c| *c == 0.0));
        placed && spread && anchor
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingBounds {
    pub lower: usize,
    pub upper: u128,
    pub witness: PackingWitness,
}

fn floor_count(x: f64) -> u128 {
    if x >= u128::MAX as f64 {
        u128::MAX
    } else {
        (x * (1.0 + 1e-12)).floor() as u128
    }
}

/// Volume bound: balls of radius `m/2` around the points are disjoint and
/// lie in `B(0, R + m/2)` (minus `B(0, R - m/2)` for surface packings).
pub fn packing_upper(dim: usize, container_r: f64, min_dist: f64, surface_only: bool) -> u128 {
    let h = 0.5 * min_dist;
    let d = dim as i32;
    let outer = ((container_r + h) / h).powi(d);
    if surface_only {
        let inner = ((container_r - h).max(0.0) / h).powi(d);
        floor_count(outer - inner)
    } else {
        floor_count(outer)
    }
}

fn lattice_candidates(space: &Space, r: f64, m: f64) -> Vec<Point> {
    let d = space.dim();
    let k = (r / m).floor() as i64;
    let side = (2 * k + 1) as usize;
    if (side as f64).powi(d as i32) > 2e5 {
        return Vec::new();
    }
    let total = side.pow(d as u32);
    let mut pts: Vec<Point> = (0..total)
        .map(|mut code| {
            Point::new((0..d).map(|_| {
                let c = (code % side) as i64 - k;
                code /= side;
                c as f64 * m
            }))
        })
        .filter(|p| space.norm().eval(p) <= r)
        .collect();
    pts.sort_by(|a, b| space.norm().eval(a).total_cmp(&space.norm().eval(b)));
    pts
}

fn project_to_surface(space: &Space, u: &Point, r: f64) -> Option<Point> {
    let n = space.norm().eval(u);
    (n > 0.0).then(|| u.scale(r / n))
}

struct Packer<'a> {
    space: &'a Space,
    r: f64,
    m: f64,
    surface: bool,
    points: Vec<Point>,
}

impl Packer<'_> {
    fn admissible(&self, p: &Point) -> bool {
        let n = self.space.norm().eval(p);
        if self.surface {
            (n - self.r).abs() <= SURFACE_TOL * self.r
        } else {
            n <= self.r
        }
    }

    fn conflicts(&self, p: &Point) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.space.dist(p, &self.points[i]) < self.m).collect()
    }

    fn try_add(&mut self, p: Point) -> bool {
        if self.admissible(&p) && self.conflicts(&p).is_empty() {
            self.points.push(p);
            true
        } else {
            false
        }
    }
}

/// Bracket the maximal packing count: a verified witness from greedy seeding
/// plus `budget` rounds of perturbation search, and the volume bound.
pub fn packing_count(
    space: &Space,
    container_r: f64,
    min_dist: f64,
    anchored: bool,
    surface_only: bool,
    budget: usize,
    seed: u64,
) -> Result<PackingBounds> {
    if !(min_dist > 0.0 && min_dist.is_finite()) {
        return Err(Error::input(format!("minimum distance must be positive, got {min_dist}")));
    }
    if !(container_r > 0.0 && container_r.is_finite()) {
        return Err(Error::input(format!("container radius must be positive, got {container_r}")));
    }
    if anchored && surface_only {
        return Err(Error::input("the origin is not on the surface; anchored and surface_only exclude each other"));
    }
    let d = space.dim();
    let mut pk = Packer { space, r: container_r, m: min_dist, surface: surface_only, points: Vec::new() };
    if anchored {
        pk.points.push(Point::zeros(d));
    }
    // Greedy seeding: lattice (or projected lattice directions), then low-discrepancy fill.
    if surface_only {
        let n_dirs = (packing_upper(d, container_r, min_dist, true).min(4096) as usize * 4).max(16);
        for u in directions(d, n_dirs) {
            if let Some(p) = project_to_surface(space, &u, container_r) {
                pk.try_add(p);
            }
        }
        for p in lattice_candidates(space, container_r, min_dist) {
            if let Some(q) = project_to_surface(space, &p, container_r) {
                pk.try_add(q);
            }
        }
    } else {
        for p in lattice_candidates(space, container_r, min_dist) {
            pk.try_add(p);
        }
        let mut h = Halton::new(d);
        for _ in 0..2048 {
            let u = Point::new(h.next_point().into_iter().map(|v| (2.0 * v - 1.0) * container_r));
            let u = Point::new((0..d).map(|i| u[i] * space.norm().axis_extent(i)));
            pk.try_add(u);
        }
    }
    // Perturbation: add when free, swap out a single blocker otherwise.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = pk.points.clone();
    for _ in 0..budget {
        let raw = Point::new((0..d).map(|i| rng.gen_range(-1.0..=1.0) * container_r * space.norm().axis_extent(i)));
        let cand = if surface_only {
            match project_to_surface(space, &raw, container_r) {
                Some(p) => p,
                None => continue,
            }
        } else {
            raw
        };
        if !pk.admissible(&cand) {
            continue;
        }
        let c = pk.conflicts(&cand);
        match c.as_slice() {
            [] => pk.points.push(cand),
            [i] if !(anchored && *i == 0) && rng.gen_bool(0.5) => pk.points[*i] = cand,
            _ => {}
        }
        if pk.points.len() > best.len() {
            best = pk.points.clone();
        }
    }
    let witness = PackingWitness {
        points: best,
        min_pairwise_distance: min_dist,
        container_radius: container_r,
        anchored,
        surface_only,
    };
    if !witness.verify(space) {
        return Err(Error::contract("packing witness failed re-verification"));
    }
    let upper = packing_upper(d, container_r, min_dist, surface_only);
    if witness.points.len() as u128 > upper {
        return Err(Error::contract("packing witness exceeds the volume bound"));
    }
    Ok(PackingBounds { lower: witness.points.len(), upper, witness })
}

/// `N(gamma)`: anchored packings of `B(0, 1)` at distance `1/gamma`, volume bound.
pub fn n_gamma(dim: usize, gamma: f64) -> u128 {
    packing_upper(dim, 1.0, 1.0 / gamma, false)
}

/// `N_S(gamma)`: surface packings of `B(0, 1)` at distance `1/gamma`, volume bound.
pub fn n_surface(dim: usize, gamma: f64) -> u128 {
    packing_upper(dim, 1.0, 1.0 / gamma, true)
}

/// Upper bound for the satellite cardinality `kappa`.
///
/// `Balls` gives the anchored packing bound of `B(0, 2)` at distance 1
/// (at most `5^d`); `Morse` gives `N(64 l^3) + N(8 l^2) N_S(16 l)`.
pub fn kappa_bound(space: &Space, lambda: f64, mode: KappaMode) -> Result<u128> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::input(format!("lambda must be >= 1, got {lambda}")));
    }
    let d = space.dim();
    Ok(match mode {
        KappaMode::Balls => packing_upper(d, 2.0, 1.0, false),
        KappaMode::Morse => {
            let l = lambda;
            n_gamma(d, 64.0 * l * l * l)
                .saturating_add(n_gamma(d, 8.0 * l * l).saturating_mul(n_surface(d, 16.0 * l)))
        }
    })
}

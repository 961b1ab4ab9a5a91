use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::packing::{kappa_bound, KappaMode};
use super::select::check_tau;
use crate::error::{Error, Result};
use crate::geometry::{sets_intersect, MorseSet, Point, Space};

/// Ordered sets `S_1, ..., S_n` tested against a parameter `tau`.
#[derive(Clone, Debug)]
pub struct SatelliteConfig {
    pub sets: Vec<MorseSet>,
    pub tau: f64,
}

/// First failed clause, with 1-based indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `S_i` misses the last set `S_n`.
    MissesLast { i: usize, n: usize },
    /// A later tag `a_j` lies in the interior of `S_i`.
    TagInInterior { i: usize, j: usize },
    /// `diam S_j >= tau * diam S_i` for `i < j`.
    DiameterOrder { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissesLast { i, n } => write!(f, "S{i}∩S{n}=∅"),
            Violation::TagInInterior { i, j } => write!(f, "a{j}∈int(S{i})"),
            Violation::DiameterOrder { i, j } => write!(f, "Δ(S{j})≥τΔ(S{i})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SatelliteVerdict {
    pub valid: bool,
    pub violation: Option<Violation>,
    /// False when an intersection verdict was sampled.
    pub exact: bool,
}

/// Check that every `S_i` meets `S_n`, and that for `i < j` the tag `a_j` is
/// not interior to `S_i` and `diam S_j < tau * diam S_i`.
pub fn is_satellite_config(space: &Space, cfg: &SatelliteConfig) -> Result<SatelliteVerdict> {
    check_tau(cfg.tau)?;
    if cfg.sets.is_empty() {
        return Err(Error::input("a satellite configuration needs at least one set"));
    }
    for s in &cfg.sets {
        if s.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: s.dim() });
        }
    }
    let n = cfg.sets.len();
    let last = &cfg.sets[n - 1];
    let mut exact = true;
    let fail = |v, exact| Ok(SatelliteVerdict { valid: false, violation: Some(v), exact });
    for (i, s) in cfg.sets.iter().enumerate() {
        let v = sets_intersect(space, s, last);
        exact &= v.is_exact();
        if !v.intersects() {
            return fail(Violation::MissesLast { i: i + 1, n }, exact);
        }
    }
    let diam: Vec<f64> = cfg.sets.iter().map(|s| s.diameter(space)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if cfg.sets[i].interior_contains_unchecked(space, cfg.sets[j].tag()) {
                return fail(Violation::TagInInterior { i: i + 1, j: j + 1 }, exact);
            }
            if !(diam[j] < cfg.tau * diam[i]) {
                return fail(Violation::DiameterOrder { i: i + 1, j: j + 1 }, exact);
            }
        }
    }
    Ok(SatelliteVerdict { valid: true, violation: None, exact })
}

const RESTART_LEN: usize = 256;

/// Randomized search for a large tau-satellite configuration of lambda-Morse
/// balls around the closed unit ball at the origin, which stays last.
///
/// `budget` counts proposed sets across all restarts. The result always
/// passes [`is_satellite_config`] and its size never exceeds the Morse bound.
pub fn satellite_search(space: &Space, lambda: f64, tau: f64, budget: usize, seed: u64) -> Result<SatelliteConfig> {
    check_tau(tau)?;
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::input(format!("lambda must be >= 1, got {lambda}")));
    }
    let last = MorseSet::closed_ball(space, Point::zeros(space.dim()), 1.0)?.with_lambda(space, lambda)?;
    let restarts = budget.div_ceil(RESTART_LEN);
    let runs: Vec<Vec<MorseSet>> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let len = RESTART_LEN.min(budget - k * RESTART_LEN);
            one_restart(space, lambda, tau, &last, len, seed.wrapping_add(k as u64))
        })
        .collect::<Result<_>>()?;
    let mut best = vec![last.clone()];
    for run in runs {
        if run.len() > best.len() {
            best = run;
        }
    }
    let cfg = SatelliteConfig { sets: best, tau };
    let verdict = is_satellite_config(space, &cfg)?;
    if !verdict.valid {
        return Err(Error::contract(format!("search emitted an invalid configuration: {:?}", verdict.violation)));
    }
    let bound = kappa_bound(space, lambda, KappaMode::Morse)?;
    if cfg.sets.len() as u128 > bound {
        return Err(Error::contract(format!(
            "configuration of size {} exceeds the Morse bound {bound}",
            cfg.sets.len()
        )));
    }
    Ok(cfg)
}

fn random_direction(rng: &mut ChaCha8Rng, space: &Space) -> Point {
    loop {
        let v = Point::new((0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)));
        let n = space.norm().eval(&v);
        if n > 1e-3 && v.euclidean_len() <= 1.0 {
            return v.scale(1.0 / n);
        }
    }
}

fn propose(rng: &mut ChaCha8Rng, space: &Space, lambda: f64, tau: f64) -> Result<MorseSet> {
    let radius = (rng.gen_range(-1.0..1.0) * tau.ln()).exp().max(1.0 / tau * (1.0 + 1e-9));
    let u = random_direction(rng, space);
    let dist = rng.gen_range(radius..=radius + 1.0);
    let center = u.scale(dist);
    let max_off = radius * (lambda - 1.0) / (lambda + 1.0);
    let tag = center.axpy(rng.gen_range(0.0..=1.0) * max_off * 0.999, &random_direction(rng, space));
    let s = MorseSet::tagged_ball(space, center, radius, tag, true, None)?;
    s.with_lambda(space, lambda)
}

fn one_restart(
    space: &Space,
    lambda: f64,
    tau: f64,
    last: &MorseSet,
    proposals: usize,
    seed: u64,
) -> Result<Vec<MorseSet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = SatelliteConfig { sets: vec![last.clone()], tau };
    for _ in 0..proposals {
        let cand = propose(&mut rng, space, lambda, tau)?;
        let n = cfg.sets.len();
        for pos in 0..n {
            cfg.sets.insert(pos, cand.clone());
            if is_satellite_config(space, &cfg)?.valid {
                break;
            }
            cfg.sets.remove(pos);
        }
    }
    Ok(cfg.sets)
}

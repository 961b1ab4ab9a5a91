//! A function whose Riemann sums over disjoint ball covers converge while
//! the absolute sums do not.
//!
//! In one dimension take `A_n = U((-1)^n / n, 1 / (2 n^2))`, let `mu` be a unit
//! atom at the origin plus Lebesgue measure on the union of the `A_n`, and let
//! `f = ((-1)^n / n) / mu(A_n) = (-1)^n n` on `A_n` with `f(0) = 0`. A cover
//! made of a central ball `B(0, R)` plus one ball per remaining `A_n` has sum
//! close to `-ln 2`, while its absolute sum grows like `ln(1 / R)`.

use super::riemann::riemann_sum_over;
use super::Integrand;
use crate::error::{Error, Result};
use crate::geometry::{AaBox, MorseSet, Point, Space};
use crate::measure::{Atom, DensityPiece, RadonMeasure};

#[derive(Clone, Debug)]
pub struct PvReport {
    pub n_balls: usize,
    pub central_radius: f64,
    pub sum: f64,
    pub abs_sum: f64,
    /// Balls outside the central one, in index order.
    pub outer_sets: usize,
    pub sets: Vec<MorseSet>,
}

fn center(n: usize) -> f64 {
    let s = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    s / n as f64
}

fn half_width(n: usize) -> f64 {
    0.5 / (n * n) as f64
}

/// Smallest central radius whose ball contains every `A_n` with `n > n_balls`.
pub fn pv_min_radius(n_balls: usize) -> f64 {
    let m = (n_balls + 1) as f64;
    1.0 / m + 0.5 / (m * m)
}

/// The measure of the construction restricted to the first `n_balls` sets.
pub fn pv_measure(n_balls: usize) -> Result<RadonMeasure> {
    let pieces = (1..=n_balls)
        .map(|n| {
            let (c, h) = (center(n), half_width(n));
            Ok(DensityPiece { cell: AaBox::new(Point::from([c - h]), Point::from([c + h]))?, density: 1.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    RadonMeasure::new(1, vec![Atom { at: Point::from([0.0]), weight: 1.0 }], pieces)
}

/// The integrand `(-1)^n n` on `A_n`, zero elsewhere.
pub fn pv_integrand(n_balls: usize) -> Integrand {
    let mut ends: Vec<(f64, f64, f64)> = (1..=n_balls)
        .map(|n| {
            let (c, h) = (center(n), half_width(n));
            (c - h, c + h, if n % 2 == 0 { n as f64 } else { -(n as f64) })
        })
        .collect();
    ends.sort_by(|a, b| a.0.total_cmp(&b.0));
    Integrand::new("pv", move |x| {
        let x = x[0];
        let i = ends.partition_point(|e| e.0 < x);
        match i.checked_sub(1).map(|j| ends[j]) {
            Some((lo, hi, v)) if lo < x && x < hi => v,
            _ => 0.0,
        }
    })
}

fn check_gaps(n_balls: usize) -> Result<()> {
    let mut iv: Vec<(f64, f64)> = (1..=n_balls).map(|n| (center(n) - half_width(n), center(n) + half_width(n))).collect();
    iv.push((0.0, 0.0));
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in iv.windows(2) {
        if !(w[0].1 < w[1].0) {
            return Err(Error::contract(format!("balls {:?} and {:?} overlap", w[0], w[1])));
        }
    }
    Ok(())
}

/// Riemann and absolute sums of the construction over the central ball
/// `B(0, central_radius)` plus, for each `A_n` not inside it, one open ball
/// covering `A_n \ B(0, R)` tagged at its midpoint.
pub fn pv_counterexample(n_balls: usize, central_radius: f64) -> Result<PvReport> {
    if n_balls == 0 {
        return Err(Error::input("n_balls must be at least 1"));
    }
    let r_min = pv_min_radius(n_balls);
    if !(central_radius >= r_min && central_radius.is_finite()) {
        return Err(Error::input(format!(
            "central radius {central_radius} leaves sets beyond index {n_balls} uncovered; need at least {r_min}"
        )));
    }
    check_gaps(n_balls)?;
    let sp = Space::euclidean(1);
    let mu = pv_measure(n_balls)?;
    let f = pv_integrand(n_balls);
    let r = central_radius;
    let mut sets = vec![MorseSet::closed_ball(&sp, Point::from([0.0]), r)?];
    for n in 1..=n_balls {
        let (c, h) = (center(n), half_width(n));
        let (lo, hi) = if c > 0.0 { ((c - h).max(r), c + h) } else { (c - h, (c + h).min(-r)) };
        if lo < hi {
            let mid = 0.5 * (lo + hi);
            sets.push(MorseSet::open_ball_tagged(&sp, Point::from([mid]), 0.5 * (hi - lo), Point::from([0.0]))?);
        }
    }
    let rs = riemann_sum_over(&sp, &mu, &f, &sets)?;
    Ok(PvReport { n_balls, central_radius: r, sum: rs.sum, abs_sum: rs.abs_sum, outer_sets: sets.len() - 1, sets })
}

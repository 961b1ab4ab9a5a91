//! Deterministic low-discrepancy samples used by validators and sampled predicates.

use crate::geometry::{Point, Space};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Halton sequence in `[0, 1)^dim`, skipping the origin.
#[derive(Clone, Debug)]
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize) -> Self {
        Halton { dim, index: 1 }
    }

    pub fn starting_at(dim: usize, index: u64) -> Self {
        Halton { dim, index: index.max(1) }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim)
            .map(|k| {
                let base = PRIMES[k % PRIMES.len()];
                // Dimensions beyond the prime table reuse bases with a shifted index.
                let shift = (k / PRIMES.len()) as u64 * 7919;
                radical_inverse(i + shift, base)
            })
            .collect()
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        Some(self.next_point())
    }
}

/// Unit-Euclidean directions: evenly spaced angles in 2D, ±1 in 1D,
/// normalized Halton points otherwise.
pub fn directions(dim: usize, n: usize) -> Vec<Point> {
    match dim {
        1 => vec![Point::from([1.0]), Point::from([-1.0])],
        2 => (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                Point::from([t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            let mut h = Halton::new(dim);
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let p = Point::new(h.next_point().into_iter().map(|u| 2.0 * u - 1.0));
                let len = p.euclidean_len();
                if len > 1e-3 && len <= 1.0 {
                    out.push(p.scale(1.0 / len));
                }
            }
            out
        }
    }
}

/// Points of the norm ball `B(center, radius)` by rejection from a Halton
/// stream over its bounding box.
pub fn ball_points(space: &Space, center: &[f64], radius: f64, n: usize, start: u64) -> Vec<Point> {
    let d = space.dim();
    let hw = space.ball_half_widths(1.0);
    let mut h = Halton::starting_at(d, start);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = Point::new(h.next_point().iter().zip(hw.iter()).map(|(v, w)| (2.0 * v - 1.0) * w));
        if space.norm().eval(&u) <= 1.0 {
            out.push(Point::new(center.iter().zip(u.iter()).map(|(c, x)| c + radius * x)));
        }
    }
    out
}

//! Seeded fixtures shared by the benchmarks.

use morsecover::covering::TaggedFamily;
use morsecover::{MorseSet, Point, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` closed balls with centers in the unit cube and radii in `[r_lo, r_hi)`.
pub fn random_balls(space: &Space, n: usize, r_lo: f64, r_hi: f64, seed: u64) -> TaggedFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = space.dim();
    let sets = (0..n)
        .map(|_| {
            let c = Point::new((0..d).map(|_| rng.gen::<f64>()));
            MorseSet::closed_ball(space, c, rng.gen_range(r_lo..r_hi)).expect("positive radius")
        })
        .collect();
    TaggedFamily::new(space, sets).expect("balls share the space")
}

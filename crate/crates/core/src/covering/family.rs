use crate::error::{Error, Result};
use crate::geometry::{MorseSet, Space};

/// Tagged sets sharing one lambda, each containing its tag in its interior.
#[derive(Clone, Debug)]
pub struct TaggedFamily {
    space: Space,
    sets: Vec<MorseSet>,
    lambda: f64,
    diam_bound: f64,
}

impl TaggedFamily {
    pub fn new(space: &Space, sets: Vec<MorseSet>) -> Result<Self> {
        let lambda = sets.first().map_or(1.0, |s| s.lambda());
        let mut diam_bound: f64 = 0.0;
        for (k, s) in sets.iter().enumerate() {
            space.check(s.tag())?;
            if !s.interior_contains_unchecked(space, s.tag()) {
                return Err(Error::input(format!("entry {k}: tag is not interior to its set")));
            }
            if (s.lambda() - lambda).abs() > 1e-12 * lambda {
                return Err(Error::input(format!(
                    "entry {k}: lambda {} differs from the family lambda {lambda}",
                    s.lambda()
                )));
            }
            diam_bound = diam_bound.max(s.diameter(space));
        }
        if !diam_bound.is_finite() {
            return Err(Error::input("diameters must be bounded"));
        }
        Ok(TaggedFamily { space: space.clone(), sets, lambda, diam_bound })
    }

    /// Family built from trusted members of one generator.
    pub(crate) fn from_members(space: &Space, sets: Vec<MorseSet>, lambda: f64) -> Self {
        let diam_bound = sets.iter().map(|s| s.diameter(space)).fold(0.0, f64::max);
        TaggedFamily { space: space.clone(), sets, lambda, diam_bound }
    }

    /// Declare a diameter bound; it must dominate every member.
    pub fn with_diam_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound >= self.diam_bound && bound.is_finite()) {
            return Err(Error::input(format!("diameter bound {bound} is below the largest diameter {}", self.diam_bound)));
        }
        self.diam_bound = bound;
        Ok(self)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn sets(&self) -> &[MorseSet] {
        &self.sets
    }

    pub fn into_sets(self) -> Vec<MorseSet> {
        self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn diam_bound(&self) -> f64 {
        self.diam_bound
    }
}

use rayon::prelude::*;

use super::Integrand;
use crate::error::{Error, Result};
use crate::geometry::{MorseSet, Space};
use crate::measure::{measure_of, AeCover, RadonMeasure, Target};
use crate::numeric::CompensatedSum;

/// `sum f(x_n) mu(S_n)` and `sum |f(x_n)| mu(S_n)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RiemannSum {
    pub sum: f64,
    pub abs_sum: f64,
}

fn accumulate(values: impl Iterator<Item = (f64, f64)>) -> Result<RiemannSum> {
    let mut sum = CompensatedSum::new();
    let mut abs = CompensatedSum::new();
    for (i, (fx, m)) in values.enumerate() {
        if !fx.is_finite() {
            return Err(Error::input(format!("integrand is not finite at the tag of set {i}")));
        }
        sum.add(fx * m);
        abs.add(fx.abs() * m);
    }
    Ok(RiemannSum { sum: sum.value(), abs_sum: abs.value() })
}

/// Riemann sum over a cover, using the masses it was built with. Summation
/// runs in cover order.
pub fn riemann_sum(f: &Integrand, cover: &AeCover) -> Result<RiemannSum> {
    let fx: Vec<f64> = cover.sets.par_iter().map(|s| f.eval(s.tag())).collect();
    accumulate(fx.into_iter().zip(cover.masses.iter().copied()))
}

/// Riemann sum over arbitrary tagged sets, measuring each against `mu`.
pub fn riemann_sum_over(space: &Space, mu: &RadonMeasure, f: &Integrand, sets: &[MorseSet]) -> Result<RiemannSum> {
    let terms: Vec<(f64, f64)> = sets
        .par_iter()
        .map(|s| Ok((f.eval(s.tag()), measure_of(space, mu, Target::Set(s))?.value)))
        .collect::<Result<_>>()?;
    accumulate(terms.into_iter())
}

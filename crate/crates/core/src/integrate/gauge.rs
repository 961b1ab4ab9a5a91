use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::Integrand;
use crate::error::{Error, Result};
use crate::geometry::{MorseSet, Norm, Point, Space};
use crate::measure::{measure_of, RadonMeasure, Region, Target};

/// How a gauge value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeSource {
    /// Explicit continuity modulus with the finite- or infinite-measure budget.
    Modulus,
    /// Refinement around a point where no modulus exists.
    LebesguePoint,
    /// Dilation of a declared null set.
    NullSet,
    User,
}

type GaugeFn = dyn Fn(&[f64]) -> Result<(f64, GaugeSource)> + Send + Sync;

/// A function `delta: Omega -> (0, 1]` bounding `lambda * r` for sets tagged at `x`.
#[derive(Clone)]
pub struct Gauge {
    f: Arc<GaugeFn>,
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Gauge")
    }
}

impl Gauge {
    /// User gauge; values are clamped to at most 1.
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Gauge { f: Arc::new(move |x| Ok((f(x).min(1.0), GaugeSource::User))) }
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::input(format!("constant gauge must lie in (0, 1], got {c}")));
        }
        Ok(Gauge::new(move |_| c))
    }

    pub(crate) fn from_fn(f: impl Fn(&[f64]) -> Result<(f64, GaugeSource)> + Send + Sync + 'static) -> Self {
        Gauge { f: Arc::new(f) }
    }

    /// Checked value with its provenance.
    pub fn sourced(&self, x: &[f64]) -> Result<(f64, GaugeSource)> {
        let (v, s) = (self.f)(x)?;
        if v > 0.0 && v <= 1.0 {
            Ok((v, s))
        } else {
            Err(Error::contract(format!("gauge value {v} at {x:?} is outside (0, 1]")))
        }
    }

    /// Checked value.
    pub fn at(&self, x: &[f64]) -> Result<f64> {
        self.sourced(x).map(|(v, _)| v)
    }

    /// Value, or NaN where the gauge is undefined.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.at(x).unwrap_or(f64::NAN)
    }
}

/// `c` with `||v||_inf <= c ||v||`; moduli are stated for the max norm.
pub(crate) fn max_norm_factor(space: &Space) -> f64 {
    match space.norm() {
        Norm::WeightedLinf(w) => 1.0 / w.iter().cloned().fold(f64::INFINITY, f64::min),
        _ => 1.0,
    }
}

/// Gauge from an explicit continuity modulus.
///
/// With `mu(Omega)` finite, `delta(x) = rho(x, eps / (1 + mu(Omega)))`.
/// Otherwise `delta(x) = rho(x, eps 2^-k / (1 + mu(B(0, k + 1))))` where `k`
/// is the least integer strictly above `||x||`. Values are clamped to (0, 1].
pub fn gauge_from_modulus(
    space: &Space,
    f: &Integrand,
    eps: f64,
    mu: &RadonMeasure,
    omega: &Region,
) -> Result<Gauge> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    if !f.has_modulus() {
        return Err(Error::input(format!("integrand `{}` has no continuity modulus", f.name())));
    }
    omega.validate(space)?;
    let c = max_norm_factor(space);
    let mass = if omega.is_bounded(space) || mu.support_hull().is_some_and(|h| h.is_bounded()) {
        measure_of(space, mu, Target::Region(omega)).map(|m| m.value).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    let f = f.clone();
    let rho = move |x: &[f64], gamma: f64| -> Result<(f64, GaugeSource)> {
        match f.modulus(x, gamma) {
            Some(r) if r > 0.0 => Ok(((r / c).min(1.0), GaugeSource::Modulus)),
            _ => Err(Error::NoModulus { point: x.to_vec() }),
        }
    };
    if mass.is_finite() {
        let gamma = eps / (1.0 + mass);
        return Ok(Gauge::from_fn(move |x| rho(x, gamma)));
    }
    let space = space.clone();
    let mu = mu.clone();
    let shells: Mutex<HashMap<u64, f64>> = Mutex::new(HashMap::new());
    Ok(Gauge::from_fn(move |x| {
        let k = space.norm().eval(x).floor() + 1.0;
        let key = k as u64;
        let cached = shells.lock().expect("gauge cache poisoned").get(&key).copied();
        let ball = match cached {
            Some(m) => m,
            None => {
                let b = MorseSet::closed_ball(&space, Point::zeros(space.dim()), k + 1.0)?;
                let m = measure_of(&space, &mu, Target::Set(&b))?.value;
                shells.lock().expect("gauge cache poisoned").insert(key, m);
                m
            }
        };
        rho(x, eps * 2f64.powf(-k) / (1.0 + ball))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AaBox;

    #[test]
    fn linear_function_gauge_is_constant() {
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::lebesgue_on(AaBox::new(Point::from([0.0]), Point::from([1.0])).unwrap()).unwrap();
        let f = Integrand::builtin("identity", 1).unwrap();
        let g = gauge_from_modulus(&sp, &f, 0.1, &mu, &Region::unit_cube(1)).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert!((g.at(&[x]).unwrap() - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_function_gauge_is_one() {
        let sp = Space::euclidean(2);
        let mu = RadonMeasure::lebesgue_on(AaBox::cube(&[0.5, 0.5], 0.5)).unwrap();
        let f = Integrand::builtin("one", 2).unwrap();
        let g = gauge_from_modulus(&sp, &f, 1e-3, &mu, &Region::unit_cube(2)).unwrap();
        assert_eq!(g.at(&[0.2, 0.9]).unwrap(), 1.0);
    }

    #[test]
    fn infinite_measure_gauge_decays_with_the_shell_index() {
        let sp = Space::euclidean(1);
        let line = AaBox::new(Point::from([f64::NEG_INFINITY]), Point::from([f64::INFINITY])).unwrap();
        let mu = RadonMeasure::lebesgue_on(line.clone()).unwrap();
        let f = Integrand::builtin("identity", 1).unwrap();
        let g = gauge_from_modulus(&sp, &f, 1.0, &mu, &Region::from_box(line)).unwrap();
        // k = 1, 2, 3 at x = 0.5, 1.5, 2.5; mu(B(0, k + 1)) = 2 (k + 1).
        for (x, k) in [(0.5, 1.0), (1.5, 2.0), (2.5, 3.0)] {
            let want: f64 = 2f64.powf(-k) / (1.0 + 2.0 * (k + 1.0));
            assert!((g.at(&[x]).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn user_gauge_is_clamped_and_checked() {
        let g = Gauge::new(|x| x[0]);
        assert_eq!(g.at(&[5.0]).unwrap(), 1.0);
        assert!(g.at(&[0.0]).is_err());
        assert!(g.eval(&[-1.0]).is_nan());
    }
}

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{AaBox, Point};
use crate::measure::Region;
use crate::sampling::Halton;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type ModulusFn = dyn Fn(&[f64], f64) -> Option<f64> + Send + Sync;
type SupFn = dyn Fn(&AaBox) -> Option<f64> + Send + Sync;

/// A real function with optional continuity data.
///
/// The modulus `rho(x, gamma)` promises `|f(y) - f(x)| <= gamma` whenever
/// `max_i |y_i - x_i| <= rho`; it returns `None` where `f` is discontinuous.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    f: Arc<EvalFn>,
    modulus: Option<Arc<ModulusFn>>,
    estimated: bool,
    null_set: Option<Region>,
    sup: Option<Arc<SupFn>>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("modulus", &self.modulus.is_some())
            .field("estimated", &self.estimated)
            .field("null_set", &self.null_set)
            .finish()
    }
}

/// Names accepted by [`Integrand::builtin`].
pub const BUILTINS: &[&str] =
    &["zero", "one", "identity", "square", "sin_pi", "step", "x1x2", "inv_sqrt", "atom_jump"];

fn corner_max(b: &AaBox, g: impl Fn(&[f64]) -> f64) -> f64 {
    b.corners().map(|c| g(&c).abs()).fold(0.0, f64::max)
}

impl Integrand {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Integrand { name: name.into(), f: Arc::new(f), modulus: None, estimated: false, null_set: None, sup: None }
    }

    pub fn with_modulus(mut self, m: impl Fn(&[f64], f64) -> Option<f64> + Send + Sync + 'static) -> Self {
        self.modulus = Some(Arc::new(m));
        self.estimated = false;
        self
    }

    /// Declare a `mu`-null set carrying the discontinuities.
    pub fn with_null_set(mut self, r: Region) -> Self {
        self.null_set = Some(r);
        self
    }

    /// Bound for `sup |f|` over a box; `None` when unbounded there.
    pub fn with_sup(mut self, s: impl Fn(&AaBox) -> Option<f64> + Send + Sync + 'static) -> Self {
        self.sup = Some(Arc::new(s));
        self
    }

    /// Attach a modulus found by halving a probe radius until sampled
    /// oscillation drops below `gamma / 2`. Sampled, so not a proof.
    pub fn with_estimated_modulus(mut self) -> Self {
        let f = self.f.clone();
        self.modulus = Some(Arc::new(move |x: &[f64], gamma: f64| {
            let d = x.len();
            let fx = f(x);
            if !fx.is_finite() {
                return None;
            }
            let mut r = 1.0;
            for _ in 0..48 {
                let mut worst: f64 = 0.0;
                let mut probe = |y: &[f64]| worst = worst.max((f(y) - fx).abs());
                for i in 0..d {
                    for s in [-1.0, -0.5, 0.5, 1.0] {
                        let mut y = x.to_vec();
                        y[i] += s * r;
                        probe(&y);
                    }
                }
                for mask in 0..(1usize << d.min(8)) {
                    let y: Vec<f64> = (0..d).map(|i| x[i] + if mask >> i & 1 == 1 { r } else { -r }).collect();
                    probe(&y);
                }
                for u in Halton::new(d).take(16) {
                    let y: Vec<f64> = (0..d).map(|i| x[i] + (2.0 * u[i] - 1.0) * r).collect();
                    probe(&y);
                }
                if worst.is_finite() && worst < 0.5 * gamma {
                    return Some(r);
                }
                r *= 0.5;
            }
            None
        }));
        self.estimated = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn has_modulus(&self) -> bool {
        self.modulus.is_some()
    }

    pub fn modulus_is_estimated(&self) -> bool {
        self.estimated
    }

    pub fn modulus(&self, x: &[f64], gamma: f64) -> Option<f64> {
        self.modulus.as_ref().and_then(|m| m(x, gamma)).filter(|r| *r > 0.0)
    }

    pub fn null_set(&self) -> Option<&Region> {
        self.null_set.as_ref()
    }

    /// Declared bound for `sup |f|` over `b`, if any.
    pub fn sup_bound(&self, b: &AaBox) -> Option<f64> {
        self.sup.as_ref().and_then(|s| s(b))
    }

    /// `(bound, declared)`: the declared bound, or a sampled estimate over
    /// corners and a Halton set. `None` when `f` is declared unbounded on `b`
    /// or a sample is not finite.
    pub fn sup_on(&self, b: &AaBox) -> Option<(f64, bool)> {
        if let Some(s) = &self.sup {
            return s(b).map(|v| (v, true));
        }
        let d = b.dim();
        let mut m = corner_max(b, |x| self.eval(x));
        for u in Halton::new(d).take(4096) {
            let y: Vec<f64> = (0..d).map(|i| b.lo[i] + u[i] * b.width(i)).collect();
            m = m.max(self.eval(&y).abs());
        }
        m.is_finite().then_some((m, false))
    }

    /// `max(f, 0)` with the same continuity data.
    pub fn positive_part(&self) -> Integrand {
        let f = self.f.clone();
        Integrand { name: format!("{}+", self.name), f: Arc::new(move |x| f(x).max(0.0)), ..self.clone() }
    }

    /// `max(-f, 0)` with the same continuity data.
    pub fn negative_part(&self) -> Integrand {
        let f = self.f.clone();
        Integrand { name: format!("{}-", self.name), f: Arc::new(move |x| (-f(x)).max(0.0)), ..self.clone() }
    }

    /// Sample the promise of the modulus at `points`: for `samples` Halton
    /// points `y` in the max-norm ball of radius `rho(x, gamma)`, check
    /// `|f(y) - f(x)| <= gamma`. Returns the first offending pair.
    pub fn check_modulus(&self, points: &[Point], gamma: f64, samples: usize) -> Result<()> {
        for x in points {
            let Some(r) = self.modulus(x, gamma) else { continue };
            let fx = self.eval(x);
            let d = x.dim();
            for u in Halton::new(d).take(samples) {
                let y: Vec<f64> = (0..d).map(|i| x[i] + (2.0 * u[i] - 1.0) * r).collect();
                if (self.eval(&y) - fx).abs() > gamma * (1.0 + 1e-12) + 1e-15 {
                    return Err(Error::contract(format!(
                        "modulus of `{}` fails at x = {:?}, y = {y:?}",
                        self.name,
                        x.coords()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn constant(c: f64) -> Integrand {
        Integrand::new(format!("{c}"), move |_| c).with_modulus(|_, _| Some(f64::INFINITY)).with_sup(move |_| Some(c.abs()))
    }

    /// Named integrands with exact moduli and sup bounds.
    ///
    /// `identity` is `x_1`; `square`, `sin_pi`, `step`, `inv_sqrt`,
    /// `atom_jump` are one-dimensional; `x1x2` is two-dimensional.
    pub fn builtin(name: &str, dim: usize) -> Result<Integrand> {
        let need = |want: usize| -> Result<()> {
            if dim != want {
                return Err(Error::input(format!("builtin `{name}` needs dimension {want}, got {dim}")));
            }
            Ok(())
        };
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        let f = match name {
            "zero" => Integrand::constant(0.0),
            "one" => Integrand::constant(1.0),
            "identity" => Integrand::new(name, |x| x[0])
                .with_modulus(|_, g| Some(g))
                .with_sup(|b| Some(b.lo[0].abs().max(b.hi[0].abs()))),
            "square" => {
                need(1)?;
                Integrand::new(name, |x| x[0] * x[0])
                    .with_modulus(|x, g| Some((x[0] * x[0] + g).sqrt() - x[0].abs()))
                    .with_sup(|b| Some(corner_max(b, |x| x[0] * x[0])))
            }
            "sin_pi" => {
                need(1)?;
                Integrand::new(name, |x| (std::f64::consts::PI * x[0]).sin())
                    .with_modulus(|_, g| Some(g / std::f64::consts::PI))
                    .with_sup(|_| Some(1.0))
            }
            "step" => {
                need(1)?;
                Integrand::new(name, |x| if x[0] < 0.5 { 1.0 } else { 3.0 })
                    .with_modulus(|x, _| {
                        let r = (x[0] - 0.5).abs();
                        (r > 0.0).then_some(if x[0] < 0.5 { r * (1.0 - 1e-12) } else { r })
                    })
                    .with_null_set(Region::empty(1).with_point(Point::from([0.5])))
                    .with_sup(|_| Some(3.0))
            }
            "x1x2" => {
                need(2)?;
                Integrand::new(name, |x| x[0] * x[1])
                    .with_modulus(|x, g| {
                        let s = x[0].abs() + x[1].abs();
                        Some(2.0 * g / (s + (s * s + 4.0 * g).sqrt()))
                    })
                    .with_sup(|b| Some(corner_max(b, |x| x[0] * x[1])))
            }
            "inv_sqrt" => {
                need(1)?;
                Integrand::new(name, |x| if x[0] > 0.0 { x[0].powf(-0.5) } else { 0.0 })
                    .with_modulus(|x, g| {
                        let x = x[0];
                        (x > 0.0).then(|| {
                            let low = (x.powf(-0.5) + g).powi(-2);
                            x - low
                        })
                    })
                    .with_null_set(Region::empty(1).with_point(Point::from([0.0])))
                    .with_sup(|b| (b.lo[0] > 0.0).then(|| b.lo[0].powf(-0.5)))
            }
            "atom_jump" => {
                need(1)?;
                Integrand::new(name, |x| if x[0] == 0.0 { 7.0 } else { x[0] })
                    .with_modulus(|x, g| {
                        let a = x[0].abs();
                        (a > 0.0).then_some(g.min(a * (1.0 - 1e-12)))
                    })
                    .with_sup(|b| Some(7f64.max(b.lo[0].abs()).max(b.hi[0].abs())))
            }
            _ => {
                return Err(Error::input(format!("unknown builtin `{name}`; expected one of {}", BUILTINS.join(", "))))
            }
        };
        Ok(Integrand { name: name.into(), ..f })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<Point> {
        (0..=n).map(|k| Point::from([k as f64 / n as f64])).collect()
    }

    #[test]
    fn builtin_moduli_hold_on_samples() {
        for name in ["identity", "square", "sin_pi", "step", "atom_jump"] {
            let f = Integrand::builtin(name, 1).unwrap();
            for g in [1e-1, 1e-3] {
                f.check_modulus(&grid(97), g, 256).unwrap();
            }
        }
        let inv = Integrand::builtin("inv_sqrt", 1).unwrap();
        let pts: Vec<Point> = (1..50).map(|k| Point::from([k as f64 / 50.0])).collect();
        inv.check_modulus(&pts, 1e-2, 256).unwrap();
        let xy = Integrand::builtin("x1x2", 2).unwrap();
        let pts: Vec<Point> = (0..20).map(|k| Point::from([k as f64 / 19.0, 1.0 - k as f64 / 23.0])).collect();
        xy.check_modulus(&pts, 1e-3, 256).unwrap();
    }

    #[test]
    fn a_wrong_modulus_is_caught() {
        let f = Integrand::new("bad", |x| 10.0 * x[0]).with_modulus(|_, g| Some(g));
        assert!(f.check_modulus(&grid(4), 1e-2, 64).is_err());
    }

    #[test]
    fn estimated_modulus_finds_a_radius_and_fails_at_jumps() {
        let f = Integrand::new("jump", |x| if x[0] < 0.5 { 0.0 } else { 1.0 }).with_estimated_modulus();
        assert!(f.modulus(&[0.2], 0.1).is_some());
        assert!(f.modulus(&[0.5], 0.1).is_none());
        assert!(f.modulus_is_estimated());
    }

    #[test]
    fn parts_split_the_sign() {
        let f = Integrand::new("lin", |x| x[0] - 0.5);
        assert_eq!(f.positive_part().eval(&[0.75]), 0.25);
        assert_eq!(f.negative_part().eval(&[0.25]), 0.25);
        assert_eq!(f.positive_part().eval(&[0.25]), 0.0);
    }

    #[test]
    fn unknown_and_misdimensioned_builtins() {
        assert!(Integrand::builtin("nope", 1).is_err());
        assert!(Integrand::builtin("x1x2", 1).is_err());
        assert!(Integrand::builtin("square", 2).is_err());
    }

    #[test]
    fn sup_bounds() {
        let f = Integrand::builtin("square", 1).unwrap();
        let b = AaBox::new(Point::from([-2.0]), Point::from([1.0])).unwrap();
        assert_eq!(f.sup_on(&b), Some((4.0, true)));
        let g = Integrand::new("cubic", |x| x[0].powi(3));
        let (s, declared) = g.sup_on(&b).unwrap();
        assert!(!declared && (s - 8.0).abs() < 1e-12);
        assert_eq!(Integrand::builtin("inv_sqrt", 1).unwrap().sup_on(&b), None);
    }
}

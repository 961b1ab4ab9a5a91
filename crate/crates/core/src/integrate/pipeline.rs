use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::gauge::{gauge_from_modulus, Gauge, GaugeSource};
use super::riemann::{riemann_sum, riemann_sum_over};
use super::Integrand;
use crate::covering::DEFAULT_TAU;
use crate::error::{Error, Result};
use crate::geometry::{AaBox, MorseSet, Point, Space};
use crate::measure::{
    ae_cover, approx_cont_defect, measure_of, working_domain, AeCover, CoverOptions, MorseFamily, RadonMeasure,
    Region, Target,
};
use crate::numeric::CompensatedSum;

/// Knobs for [`integrate`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub eps: f64,
    /// Residual mass left uncovered; defaults to `1e-6 mu(Omega)`.
    pub tol: Option<f64>,
    pub seed: u64,
    pub tau: f64,
    /// `abs_sum` above this is reported as possible non-integrability.
    pub abs_ceiling: f64,
    pub max_sets: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { eps: 1e-3, tol: None, seed: 0, tau: DEFAULT_TAU, abs_ceiling: 1e12, max_sets: 8_000_000 }
    }
}

impl IntegrateOptions {
    pub fn new(eps: f64) -> Self {
        IntegrateOptions { eps, ..Default::default() }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// How the error budget was split across gauge sources, with everything
/// needed to rebuild the gauge without re-running refinements.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePlan {
    /// Budget handed to the continuity-modulus gauge.
    pub modulus_eps: f64,
    /// Per-unit-mass budget of the Lebesgue-point refinement.
    pub lebesgue_gamma: f64,
    /// Radii fixed by Lebesgue-point refinement, keyed by tag.
    pub lebesgue_radii: Vec<(Point, f64)>,
    /// Dilation of the declared null set and its share of the error.
    pub null_eta: Option<f64>,
    pub null_error: f64,
}

/// Result of [`integrate`]: the Riemann sum over an explicit disjoint cover
/// and the budget behind the claim `|sum - integral| <= error_bound`.
#[derive(Clone, Debug)]
pub struct IntegralCertificate {
    pub integrand: String,
    pub value: f64,
    pub eps: f64,
    pub sum: f64,
    pub abs_sum: f64,
    pub sum_plus: f64,
    pub sum_minus: f64,
    pub rounds: usize,
    pub cover: AeCover,
    pub plan: GaugePlan,
    pub mu_omega: f64,
    /// Bound for `sup |f|` on the covered region.
    pub sup_abs: f64,
    pub sup_declared: bool,
    pub residual: f64,
    /// `sum |f(x_n)| mu(S_n \ Omega)`.
    pub weighted_excess: f64,
    pub error_bound: f64,
    /// Number of cover sets per gauge provenance.
    pub sources: BTreeMap<&'static str, usize>,
    /// False when some step relied on sampling rather than a stated bound.
    pub rigorous: bool,
    pub seed: u64,
    pub attempts: usize,
}

fn source_name(s: GaugeSource) -> &'static str {
    match s {
        GaugeSource::Modulus => "modulus",
        GaugeSource::LebesguePoint => "lebesgue_point",
        GaugeSource::NullSet => "null_set",
        GaugeSource::User => "user",
    }
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|c| c.to_bits()).collect()
}

type RadiusCache = Arc<Mutex<HashMap<Vec<u64>, (f64, bool)>>>;

struct GaugeParts {
    gauge: Gauge,
    cache: RadiusCache,
}

/// Largest `s = 2^-k` with `int_{B(x, s)} |f - f(x)| dmu <= gamma mu(B(x, s))`,
/// shown either by `2 M mu(B \ {x}) <= gamma mu(B)` or by a sampled defect.
fn lebesgue_radius(space: &Space, mu: &RadonMeasure, f: &Integrand, x: &[f64], gamma: f64) -> Result<(f64, bool)> {
    let fx = f.eval(x);
    let here: f64 = mu.atoms().iter().filter(|a| a.at.coords() == x).map(|a| a.weight).sum();
    let mut s = 1.0;
    for _ in 0..60 {
        let ball = MorseSet::closed_ball(space, Point::from(x), s)?;
        let total = measure_of(space, mu, Target::Set(&ball))?.value;
        if !(total > 0.0) {
            return Ok((s, true));
        }
        if let Some((m, declared)) = f.sup_on(&ball.bounding_box(space)) {
            let m = m.max(fx.abs());
            if 2.0 * m * (total - here).max(0.0) <= gamma * total {
                return Ok((s, declared));
            }
            let d = approx_cont_defect(&|y| f.eval(y), mu, space, &ball, 0.5 * gamma)?;
            if 2.0 * m * (d.fraction + 3.0 * d.std_err) <= 0.5 * gamma {
                return Ok((s, false));
            }
        }
        s *= 0.5;
    }
    Err(Error::NotFine { tag: x.to_vec(), reason: "Lebesgue-point refinement did not converge".into() })
}

fn build_gauge(
    space: &Space,
    mu: &RadonMeasure,
    f: &Integrand,
    work: &Region,
    plan: &GaugePlan,
    refine: bool,
) -> Result<GaugeParts> {
    let modulus = if f.has_modulus() { Some(gauge_from_modulus(space, f, plan.modulus_eps, mu, work)?) } else { None };
    let cache: RadiusCache = Arc::new(Mutex::new(
        plan.lebesgue_radii.iter().map(|(p, r)| (key(p), (*r, true))).collect(),
    ));
    let null = plan.null_eta.zip(f.null_set().cloned());
    let (sp, mu, f, c) = (space.clone(), mu.clone(), f.clone(), cache.clone());
    let gamma = plan.lebesgue_gamma;
    let atoms: Vec<Point> = mu.atoms().iter().map(|a| a.at.clone()).collect();
    let gauge = Gauge::from_fn(move |x| {
        if let Some(g) = &modulus {
            match g.sourced(x) {
                Err(Error::NoModulus { .. }) => {}
                other => return other,
            }
        }
        let is_atom = atoms.iter().any(|a| a.coords() == x);
        if !is_atom {
            if let Some((eta, n)) = &null {
                if n.contains(&sp, x) {
                    return Ok((eta.min(1.0), GaugeSource::NullSet));
                }
            }
        }
        let k = key(x);
        if let Some(&(r, _)) = c.lock().expect("radius cache poisoned").get(&k) {
            return Ok((r, GaugeSource::LebesguePoint));
        }
        if !refine || !(gamma > 0.0) {
            return Err(Error::NoModulus { point: x.to_vec() });
        }
        let (r, rigorous) = lebesgue_radius(&sp, &mu, &f, x, gamma)?;
        c.lock().expect("radius cache poisoned").insert(k, (r, rigorous));
        Ok((r, GaugeSource::LebesguePoint))
    });
    Ok(GaugeParts { gauge, cache })
}

/// Shrink the null-set dilation until `2 M mu(N_eta) <= budget`.
fn null_dilation(space: &Space, mu: &RadonMeasure, f: &Integrand, n: &Region, budget: f64) -> Result<(f64, f64)> {
    n.validate(space)?;
    if measure_of(space, mu, Target::Region(n))?.value > 0.0 {
        return Err(Error::input(format!("declared null set of `{}` has positive measure", f.name())));
    }
    let mut eta = 1.0;
    for _ in 0..60 {
        let grown = n.dilated(space, eta);
        let mass = measure_of(space, mu, Target::Region(&grown))?;
        let m = match grown.hull(space) {
            Some(h) if h.is_bounded() => f.sup_on(&h).map(|(m, _)| m),
            _ => None,
        };
        if let Some(m) = m {
            let err = 2.0 * m * (mass.value + mass.err);
            if err <= budget {
                return Ok((eta, err));
            }
        }
        eta *= 0.5;
    }
    Err(Error::input(format!("no dilation of the null set of `{}` fits the error budget", f.name())))
}

fn weighted_excess(f: &Integrand, cover: &AeCover) -> f64 {
    let mut acc = CompensatedSum::new();
    for ((s, m), i) in cover.sets.iter().zip(&cover.masses).zip(&cover.inside) {
        acc.add(f.eval(s.tag()).abs() * (m - i).max(0.0));
    }
    acc.value()
}

/// Integrate `f` against `mu` over `omega` with a certificate.
///
/// The gauge comes from the continuity modulus of `f` where it exists. Atoms
/// without a modulus get Lebesgue-point refinement, and tags in the declared
/// null set get a dilation whose total weight fits its share of `eps`. The
/// Riemann sum over the resulting disjoint cover differs from the integral
/// by at most `error_bound`, which stays below `eps + sup|f| * tol`.
pub fn integrate(
    f: &Integrand,
    omega: &Region,
    mu: &RadonMeasure,
    family: &dyn MorseFamily,
    opts: &IntegrateOptions,
) -> Result<IntegralCertificate> {
    let space = family.space();
    let eps = opts.eps;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    omega.validate(space)?;
    let (work, hull) = working_domain(space, mu, omega)?;
    let mu_omega = match &hull {
        Some(_) => measure_of(space, mu, Target::Region(&work))?.value,
        None => 0.0,
    };
    let (sup_abs, sup_declared) = match &hull {
        Some(h) => f.sup_on(h).ok_or_else(|| {
            Error::Unsupported(format!("`{}` is unbounded on the domain; the residual cannot be bounded", f.name()))
        })?,
        None => (0.0, true),
    };

    let unresolved_atoms = mu
        .atoms()
        .iter()
        .filter(|a| work.contains(space, &a.at))
        .any(|a| f.modulus(&a.at, eps).is_none() && !f.null_set().is_some_and(|n| n.contains(space, &a.at)));
    let special = unresolved_atoms || !f.has_modulus() || f.null_set().is_some();
    let (modulus_eps, lebesgue_eps, null_budget) = if special { (0.5 * eps, 0.25 * eps, 0.25 * eps) } else { (eps, 0.0, 0.0) };
    let (null_eta, null_error) = match (f.null_set(), &hull) {
        (Some(n), Some(_)) => {
            let (eta, err) = null_dilation(space, mu, f, n, null_budget)?;
            (Some(eta), err)
        }
        _ => (None, 0.0),
    };
    let plan = GaugePlan {
        modulus_eps,
        lebesgue_gamma: lebesgue_eps / (1.0 + mu_omega),
        lebesgue_radii: Vec::new(),
        null_eta,
        null_error,
    };
    let parts = build_gauge(space, mu, f, &work, &plan, true)?;

    let excess_budget = eps / (4.0 * (1.0 + mu_omega));
    let tol = opts.tol.unwrap_or(1e-6 * mu_omega);
    let mut cover_eps = excess_budget / sup_abs.max(1.0);
    let mut attempts = 0;
    let (cover, wexcess) = loop {
        attempts += 1;
        let mut co = CoverOptions::new(cover_eps).with_tol(tol).with_seed(opts.seed).with_tau(opts.tau);
        co.max_sets = opts.max_sets;
        let cover = ae_cover(mu, omega, family, &parts.gauge, &co)?;
        let w = weighted_excess(f, &cover);
        if w <= excess_budget {
            break (cover, w);
        }
        if attempts == 4 {
            return Err(Error::contract(format!("weighted excess {w} stays above {excess_budget}")));
        }
        cover_eps /= 16.0;
    };

    let rs = riemann_sum(f, &cover)?;
    if rs.abs_sum > opts.abs_ceiling {
        return Err(Error::NonIntegrable { abs_sum: rs.abs_sum, ceiling: opts.abs_ceiling });
    }
    let plus = riemann_sum(&f.positive_part(), &cover)?;
    let minus = riemann_sum(&f.negative_part(), &cover)?;

    let mut sources: BTreeMap<&'static str, usize> = BTreeMap::new();
    let tagged: Vec<GaugeSource> =
        cover.sets.par_iter().map(|s| parts.gauge.sourced(s.tag()).map(|(_, src)| src)).collect::<Result<_>>()?;
    for s in &tagged {
        *sources.entry(source_name(*s)).or_default() += 1;
    }
    let cached = parts.cache.lock().expect("radius cache poisoned").clone();
    let mut lebesgue_radii: Vec<(Point, f64)> = cached
        .iter()
        .map(|(k, (r, _))| (Point::new(k.iter().map(|b| f64::from_bits(*b))), *r))
        .collect();
    lebesgue_radii.sort_by(|a, b| a.0.coords().partial_cmp(b.0.coords()).expect("finite tags"));
    let lebesgue_sampled = cached.values().any(|(_, rig)| !rig);
    let plan = GaugePlan { lebesgue_radii, ..plan };

    let residual = cover.residual.value + cover.residual.err;
    let has = |s: GaugeSource| sources.contains_key(source_name(s));
    let mut bound = wexcess + sup_abs * residual;
    if has(GaugeSource::Modulus) {
        bound += modulus_eps / (1.0 + mu_omega) * mu_omega;
    }
    if has(GaugeSource::LebesguePoint) {
        bound += plan.lebesgue_gamma * mu_omega;
    }
    if has(GaugeSource::NullSet) || plan.null_eta.is_some() {
        bound += plan.null_error;
    }
    let rigorous = sup_declared && !f.modulus_is_estimated() && !lebesgue_sampled && cover.exact;
    Ok(IntegralCertificate {
        integrand: f.name().to_string(),
        value: rs.sum,
        eps,
        sum: rs.sum,
        abs_sum: rs.abs_sum,
        sum_plus: plus.sum,
        sum_minus: minus.sum,
        rounds: cover.rounds.len(),
        plan,
        mu_omega,
        sup_abs,
        sup_declared,
        residual,
        weighted_excess: wexcess,
        error_bound: bound,
        sources,
        rigorous,
        seed: opts.seed,
        attempts,
        cover,
    })
}

impl IntegralCertificate {
    /// Re-check the cover against a gauge rebuilt from the stored plan,
    /// recompute the sums with fresh measure evaluations, and check that the
    /// error budget closes.
    pub fn verify(&self, space: &Space, mu: &RadonMeasure, f: &Integrand) -> Result<()> {
        let parts = build_gauge(space, mu, f, &self.cover.domain, &self.plan, false)?;
        self.cover.verify(space, mu, &parts.gauge)?;
        let rs = riemann_sum_over(space, mu, f, &self.cover.sets)?;
        let slack = 1e-9 * self.abs_sum.max(1.0);
        if (rs.sum - self.sum).abs() > slack || (rs.abs_sum - self.abs_sum).abs() > slack {
            return Err(Error::contract(format!(
                "recomputed sums ({}, {}) differ from ({}, {})",
                rs.sum, rs.abs_sum, self.sum, self.abs_sum
            )));
        }
        if self.abs_sum + slack < self.sum.abs() {
            return Err(Error::contract("abs_sum is below |sum|"));
        }
        if (self.sum_plus - self.sum_minus - self.sum).abs() > slack {
            return Err(Error::contract("positive and negative parts do not add up"));
        }
        let w = weighted_excess(f, &self.cover);
        if w > self.eps / (4.0 * (1.0 + self.mu_omega)) + slack {
            return Err(Error::contract(format!("weighted excess {w} exceeds its budget")));
        }
        if !(self.error_bound <= self.eps + self.sup_abs * self.cover.tol + slack) {
            return Err(Error::contract(format!("error bound {} does not close", self.error_bound)));
        }
        Ok(())
    }

    /// Bounding hull of the cover, if any.
    pub fn hull(&self, space: &Space) -> Option<AaBox> {
        self.cover.sets.iter().map(|s| s.bounding_box(space)).reduce(|a, b| a.union_hull(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;
    use crate::measure::ScaledFamily;

    fn unit(d: usize) -> AaBox {
        AaBox::new(Point::zeros(d), Point::new(vec![1.0; d])).unwrap()
    }

    fn run(name: &str, eps: f64, tol: f64, seed: u64) -> (IntegralCertificate, Space, RadonMeasure, Integrand) {
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::lebesgue_on(unit(1)).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let f = Integrand::builtin(name, 1).unwrap();
        let opts = IntegrateOptions::new(eps).with_tol(tol).with_seed(seed);
        let c = integrate(&f, &Region::unit_cube(1), &mu, &fam, &opts).unwrap();
        (c, sp, mu, f)
    }

    #[test]
    fn square_on_the_unit_interval() {
        let (c, sp, mu, f) = run("square", 1e-3, 1e-6, 1);
        assert!((c.sum - 1.0 / 3.0).abs() < 1e-3 + 1e-6, "{}", c.sum);
        assert!(c.error_bound < 1e-3 + 1e-6);
        assert!(c.rigorous);
        c.verify(&sp, &mu, &f).unwrap();
    }

    #[test]
    fn step_function_uses_the_null_set() {
        let (c, sp, mu, f) = run("step", 1e-3, 1e-6, 0);
        assert!((c.sum - 2.0).abs() < 1e-3 + 3e-6, "{}", c.sum);
        assert!(c.plan.null_eta.is_some());
        c.verify(&sp, &mu, &f).unwrap();
    }

    #[test]
    fn single_atom() {
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::dirac(Point::from([0.0]), 1.0).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let f = Integrand::new("seven", |x| if x[0] == 0.0 { 7.0 } else { 0.0 });
        let omega = Region::from_box(AaBox::cube(&[0.0], 1.0));
        let c = integrate(&f, &omega, &mu, &fam, &IntegrateOptions::new(1e-3)).unwrap();
        assert_eq!(c.sum, 7.0);
        assert_eq!(c.sources.get("lebesgue_point"), Some(&1));
    }

    #[test]
    fn atom_plus_lebesgue() {
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::dirac(Point::from([0.0]), 1.0).unwrap().plus(&RadonMeasure::lebesgue_on(unit(1)).unwrap()).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let f = Integrand::builtin("atom_jump", 1).unwrap();
        let c = integrate(&f, &Region::unit_cube(1), &mu, &fam, &IntegrateOptions::new(1e-3).with_tol(1e-6)).unwrap();
        assert!((c.sum - 7.5).abs() < 1e-3, "{}", c.sum);
        c.verify(&sp, &mu, &f).unwrap();
    }

    #[test]
    fn signed_parts_add_up() {
        let (c, ..) = run("sin_pi", 1e-2, 1e-6, 2);
        assert!((c.sum - 2.0 / std::f64::consts::PI).abs() < 1e-2);
        assert_eq!(c.sum_minus, 0.0);
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::lebesgue_on(AaBox::new(Point::from([-1.0]), Point::from([1.0])).unwrap()).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let f = Integrand::builtin("identity", 1).unwrap();
        let omega = Region::from_box(AaBox::new(Point::from([-1.0]), Point::from([1.0])).unwrap());
        let c = integrate(&f, &omega, &mu, &fam, &IntegrateOptions::new(1e-2).with_tol(1e-6)).unwrap();
        assert!(c.sum.abs() < 1e-2);
        assert!((c.sum_plus - 0.5).abs() < 1e-2 && (c.sum_minus - 0.5).abs() < 1e-2);
        assert!(c.abs_sum >= c.sum.abs());
    }

    #[test]
    fn product_on_the_square_with_boxes() {
        let sp = Space::new(2, Norm::Linf).unwrap();
        let mu = RadonMeasure::lebesgue_on(unit(2)).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let f = Integrand::builtin("x1x2", 2).unwrap();
        let c = integrate(&f, &Region::unit_cube(2), &mu, &fam, &IntegrateOptions::new(2e-2).with_tol(1e-4)).unwrap();
        assert!((c.sum - 0.25).abs() < 2e-2 + 1e-4, "{}", c.sum);
    }

    #[test]
    fn ceiling_reports_non_integrability() {
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::lebesgue_on(unit(1)).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let f = Integrand::constant(1e6);
        let mut opts = IntegrateOptions::new(1.0).with_tol(1e-3);
        opts.abs_ceiling = 1e3;
        let e = integrate(&f, &Region::unit_cube(1), &mu, &fam, &opts).unwrap_err();
        assert!(matches!(e, Error::NonIntegrable { .. }));
    }

    #[test]
    fn unbounded_integrand_is_unsupported() {
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::lebesgue_on(unit(1)).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        let f = Integrand::builtin("inv_sqrt", 1).unwrap();
        let e = integrate(&f, &Region::unit_cube(1), &mu, &fam, &IntegrateOptions::new(1e-3)).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
    }
}

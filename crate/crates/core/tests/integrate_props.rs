use morsecover::integrate::{integrate, riemann_sum, IntegralCertificate, Integrand, IntegrateOptions};
use morsecover::measure::{Atom, ScaledFamily};
use morsecover::{AaBox, Point, RadonMeasure, Region, Space};
use proptest::prelude::*;

fn interval(lo: f64, hi: f64) -> AaBox {
    AaBox::new(Point::from([lo]), Point::from([hi])).unwrap()
}

/// `a + b x` with its exact modulus and sup bound.
fn affine(a: f64, b: f64) -> Integrand {
    Integrand::new("affine", move |x| a + b * x[0])
        .with_modulus(move |_, g| Some(if b == 0.0 { f64::INFINITY } else { g / b.abs() }))
        .with_sup(move |c| Some((a + b * c.lo[0]).abs().max((a + b * c.hi[0]).abs())))
}

fn affine_integral(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    a * (hi - lo) + 0.5 * b * (hi * hi - lo * lo)
}

fn run(f: &Integrand, lo: f64, hi: f64, mu: &RadonMeasure, eps: f64, seed: u64) -> IntegralCertificate {
    let sp = Space::euclidean(1);
    let fam = ScaledFamily::closed_balls(&sp).unwrap();
    let omega = Region::from_box(interval(lo, hi));
    let opts = IntegrateOptions::new(eps).with_tol(1e-6).with_seed(seed);
    integrate(f, &omega, mu, &fam, &opts).unwrap()
}

fn lebesgue() -> RadonMeasure {
    RadonMeasure::lebesgue_on(interval(-3.0, 3.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_integrals_are_within_the_bound(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        lo in -1.0..0.5f64,
        len in 0.1..1.5f64,
        eps in 1e-4..1e-2f64,
        seed in 0u64..1000,
    ) {
        let hi = lo + len;
        let mu = lebesgue();
        let f = affine(a, b);
        let cert = run(&f, lo, hi, &mu, eps, seed);
        let exact = affine_integral(a, b, lo, hi);
        prop_assert!((cert.value - exact).abs() <= cert.error_bound * (1.0 + 1e-9) + 1e-12,
            "{} vs {exact}, bound {}", cert.value, cert.error_bound);
        prop_assert!(cert.error_bound <= eps + 1e-6 * cert.sup_abs + 1e-15);
        cert.verify(&Space::euclidean(1), &mu, &f).unwrap();
    }

    #[test]
    fn integration_is_linear(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        c in -2.0..2.0f64,
        e in -2.0..2.0f64,
        seed in 0u64..1000,
    ) {
        let mu = lebesgue();
        let (f, g, h) = (affine(a, b), affine(c, e), affine(a + c, b + e));
        let (cf, cg, ch) = (run(&f, 0.0, 1.0, &mu, 1e-3, seed), run(&g, 0.0, 1.0, &mu, 1e-3, seed), run(&h, 0.0, 1.0, &mu, 1e-3, seed));
        let slack = cf.error_bound + cg.error_bound + ch.error_bound;
        prop_assert!((ch.value - cf.value - cg.value).abs() <= slack * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn parts_recombine(a in -1.0..1.0f64, b in 0.5..3.0f64, seed in 0u64..1000) {
        let mu = lebesgue();
        let f = affine(a, -b);
        let plus = run(&f.positive_part(), 0.0, 1.0, &mu, 1e-3, seed);
        let minus = run(&f.negative_part(), 0.0, 1.0, &mu, 1e-3, seed);
        prop_assert!(plus.value >= 0.0 && minus.value >= 0.0);
        let exact = affine_integral(a, -b, 0.0, 1.0);
        let slack = plus.error_bound + minus.error_bound;
        prop_assert!((plus.value - minus.value - exact).abs() <= slack * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn certificate_sum_is_the_riemann_sum(a in -2.0..2.0f64, b in -2.0..2.0f64, seed in 0u64..1000) {
        let f = affine(a, b);
        let cert = run(&f, 0.0, 1.0, &lebesgue(), 1e-3, seed);
        let rs = riemann_sum(&f, &cert.cover).unwrap();
        prop_assert_eq!(rs.sum, cert.sum);
        prop_assert!(rs.abs_sum >= rs.sum.abs());
    }

    #[test]
    fn dirac_masses_weigh_point_values(
        at in prop::collection::vec((0.0..1.0f64, 0.1..2.0f64), 1..5),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        seed in 0u64..1000,
    ) {
        let atoms = at.iter().map(|&(x, w)| Atom { at: Point::from([x]), weight: w }).collect();
        let mu = RadonMeasure::new(1, atoms, vec![]).unwrap();
        let cert = run(&affine(a, b), 0.0, 1.0, &mu, 1e-3, seed);
        let exact: f64 = at.iter().map(|&(x, w)| w * (a + b * x)).sum();
        prop_assert!((cert.value - exact).abs() <= cert.error_bound * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn constants_integrate_to_their_mass() {
    let mu = lebesgue().plus(&RadonMeasure::dirac(Point::from([0.25]), 2.0).unwrap()).unwrap();
    for c in [-3.0, 0.0, 1.0, 4.5] {
        let cert = run(&Integrand::constant(c), 0.0, 1.0, &mu, 1e-3, 1);
        assert!((cert.value - 3.0 * c).abs() <= cert.error_bound + 1e-12, "{c}: {}", cert.value);
    }
}

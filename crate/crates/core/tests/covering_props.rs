use morsecover::covering::{
    greedy_select, heavy_subfamily, is_satellite_config, kappa_bound, packing_count, packing_upper, partition_disjoint,
    satellite_search, KappaMode, SatelliteConfig, TaggedFamily,
};
use morsecover::geometry::sets_intersect;
use morsecover::measure::measure_of;
use morsecover::{AaBox, MorseSet, Norm, Point, RadonMeasure, Space};
use proptest::prelude::*;

fn balls(dim: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec((prop::collection::vec(0.0..1.0f64, dim), 0.01..0.3f64), 1..60)
}

fn family(sp: &Space, raw: &[(Vec<f64>, f64)]) -> TaggedFamily {
    let sets = raw.iter().map(|(c, r)| MorseSet::closed_ball(sp, Point::from(c.clone()), *r).unwrap()).collect();
    TaggedFamily::new(sp, sets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selection_covers_every_tag(raw in balls(2), tau in 1.05..2.0f64) {
        let sp = Space::euclidean(2);
        let fam = family(&sp, &raw);
        let order = greedy_select(&fam, tau).unwrap();
        let part = partition_disjoint(&fam, &order).unwrap();
        prop_assert!(part.uncovered_tags(&fam).is_empty());
        prop_assert!(part.m() as u128 <= kappa_bound(&sp, 1.0, KappaMode::Balls).unwrap());
        let mut seen: Vec<usize> = part.families.concat();
        seen.sort_unstable();
        let mut want = order.clone();
        want.sort_unstable();
        prop_assert_eq!(seen, want);
    }

    #[test]
    fn families_are_pairwise_disjoint(raw in balls(2), norm in 0u8..3) {
        let n = [Norm::L1, Norm::L2, Norm::Linf][norm as usize].clone();
        let sp = Space::new(2, n).unwrap();
        let fam = family(&sp, &raw);
        let part = partition_disjoint(&fam, &greedy_select(&fam, 1.2).unwrap()).unwrap();
        for f in &part.families {
            for (a, &i) in f.iter().enumerate() {
                for &j in &f[a + 1..] {
                    prop_assert!(!sets_intersect(&sp, &fam.sets()[i], &fam.sets()[j]).intersects());
                }
            }
        }
    }

    #[test]
    fn selection_is_deterministic(raw in balls(1)) {
        let sp = Space::euclidean(1);
        let fam = family(&sp, &raw);
        prop_assert_eq!(greedy_select(&fam, 1.2).unwrap(), greedy_select(&fam, 1.2).unwrap());
    }

    #[test]
    fn heavy_family_holds_its_share(raw in balls(2)) {
        let sp = Space::euclidean(2);
        let mu = RadonMeasure::lebesgue_on(AaBox::new(Point::from([0.0, 0.0]), Point::from([1.0, 1.0])).unwrap()).unwrap();
        let fam = family(&sp, &raw);
        let part = partition_disjoint(&fam, &greedy_select(&fam, 1.2).unwrap()).unwrap();
        let heavy = heavy_subfamily(&part, &fam, &mu).unwrap();
        let mass = |ids: &[usize]| ids.iter().map(|&i| measure_of(&sp, &mu, &fam.sets()[i]).unwrap().value).sum::<f64>();
        let total = mass(&part.selection_order);
        let best = part.families.iter().map(|f| mass(f)).fold(0.0, f64::max);
        prop_assert!(best * part.m() as f64 >= total * (1.0 - 1e-12));
        prop_assert!(mass(&heavy.prefix) >= 0.5 * best * (1.0 - 1e-9));
    }

    #[test]
    fn packing_witnesses_verify(d in 1usize..3, r in 1.0..3.0f64, m in 0.5..1.5f64, seed in 0u64..1000, norm in 0u8..3) {
        let n = [Norm::L1, Norm::L2, Norm::Linf][norm as usize].clone();
        let sp = Space::new(d, n).unwrap();
        let b = packing_count(&sp, r, m, true, false, 50, seed).unwrap();
        prop_assert!(b.witness.verify(&sp));
        prop_assert!(b.lower as u128 <= b.upper);
        prop_assert!(b.upper <= packing_upper(d, r, m, false));
    }

    #[test]
    fn satellite_search_respects_the_bound(d in 1usize..3, lambda in 1.0..2.5f64, tau in 1.05..2.0f64, seed in 0u64..100) {
        let sp = Space::euclidean(d);
        let cfg = satellite_search(&sp, lambda, tau, 300, seed).unwrap();
        prop_assert!(is_satellite_config(&sp, &cfg).unwrap().valid);
        prop_assert!(cfg.sets.len() as u128 <= kappa_bound(&sp, lambda, KappaMode::Morse).unwrap());
    }

    #[test]
    fn reversed_pairs_are_not_satellites(r in 0.2..0.9f64, x in 0.1..1.0f64) {
        // A small set before a larger one breaks the diameter order.
        let sp = Space::euclidean(1);
        let small = MorseSet::closed_ball(&sp, Point::from([x]), r).unwrap();
        let big = MorseSet::closed_ball(&sp, Point::from([0.0]), 2.0).unwrap();
        let cfg = SatelliteConfig { sets: vec![small, big], tau: 1.2 };
        let v = is_satellite_config(&sp, &cfg).unwrap();
        prop_assert!(!v.valid);
    }
}

#[test]
fn kappa_grows_with_lambda() {
    let sp = Space::euclidean(2);
    let a = kappa_bound(&sp, 1.0, KappaMode::Morse).unwrap();
    let b = kappa_bound(&sp, 2.0, KappaMode::Morse).unwrap();
    assert!(a < b);
    assert_eq!(kappa_bound(&sp, 1.0, KappaMode::Balls).unwrap(), 25);
}

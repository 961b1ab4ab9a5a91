use super::riemann::riemann_sum;
use super::{Gauge, Integrand};
use crate::covering::DEFAULT_TAU;
use crate::error::{Error, Result};
use crate::measure::{ae_cover, AeCover, CoverOptions, MorseFamily, RadonMeasure, Region};

/// Trend of the absolute sums across trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Growth {
    /// Last absolute sum over the first.
    pub ratio: f64,
    /// Least-squares slope of `ln abs_sum` against the trial index.
    pub log_slope: f64,
    /// Running maxima, one per trial.
    pub running_max: Vec<f64>,
    /// Absolute sums never decrease and grow at least tenfold.
    pub unbounded_suspected: bool,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub max_abs_sum: f64,
    pub argmax: usize,
    pub sums: Vec<f64>,
    pub abs_sums: Vec<f64>,
    pub covers: Vec<AeCover>,
    pub growth: Growth,
}

pub(crate) fn growth_of(abs_sums: &[f64]) -> Growth {
    let n = abs_sums.len();
    let first = abs_sums.first().copied().unwrap_or(0.0);
    let last = abs_sums.last().copied().unwrap_or(0.0);
    let ratio = if first > 0.0 { last / first } else if last > 0.0 { f64::INFINITY } else { 1.0 };
    let pts: Vec<(f64, f64)> =
        abs_sums.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, v)| (i as f64, v.ln())).collect();
    let log_slope = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        num / den
    } else {
        0.0
    };
    let mut running_max = Vec::with_capacity(n);
    let mut m = f64::NEG_INFINITY;
    for v in abs_sums {
        m = m.max(*v);
        running_max.push(m);
    }
    let monotone = abs_sums.windows(2).all(|w| w[1] >= w[0]);
    Growth { ratio, log_slope, running_max, unbounded_suspected: n >= 2 && monotone && ratio >= 10.0 }
}

/// Build `trials` delta-fine disjoint a.e. covers with seeds `1..=trials`
/// and report the largest `sum |f(x_n)| mu(S_n)`.
///
/// The seed moves the root grid and jitters which cells host candidates, so
/// tags, scales and round order differ between trials. A bounded report is
/// evidence of integrability, not a proof.
pub fn uniform_bound_probe(
    f: &Integrand,
    omega: &Region,
    mu: &RadonMeasure,
    family: &dyn MorseFamily,
    delta: &Gauge,
    trials: usize,
    tol: f64,
) -> Result<ProbeReport> {
    if trials == 0 {
        return Err(Error::input("trials must be at least 1"));
    }
    let mut sums = Vec::with_capacity(trials);
    let mut abs_sums = Vec::with_capacity(trials);
    let mut covers = Vec::with_capacity(trials);
    for t in 0..trials {
        let opts = CoverOptions { tau: DEFAULT_TAU, ..CoverOptions::new(1e-6).with_tol(tol).with_seed(t as u64 + 1) };
        let cover = ae_cover(mu, omega, family, delta, &opts)?;
        let rs = riemann_sum(f, &cover)?;
        sums.push(rs.sum);
        abs_sums.push(rs.abs_sum);
        covers.push(cover);
    }
    let (argmax, max_abs_sum) =
        abs_sums.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    let growth = growth_of(&abs_sums);
    Ok(ProbeReport { max_abs_sum, argmax, sums, abs_sums, covers, growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AaBox, Point, Space};
    use crate::measure::ScaledFamily;

    fn setup() -> (Space, RadonMeasure, ScaledFamily) {
        let sp = Space::euclidean(1);
        let mu = RadonMeasure::lebesgue_on(AaBox::new(Point::from([0.0]), Point::from([1.0])).unwrap()).unwrap();
        let fam = ScaledFamily::closed_balls(&sp).unwrap();
        (sp, mu, fam)
    }

    #[test]
    fn constant_one_is_bounded_by_one() {
        let (_, mu, fam) = setup();
        let f = Integrand::builtin("one", 1).unwrap();
        let r = uniform_bound_probe(&f, &Region::unit_cube(1), &mu, &fam, &Gauge::constant(0.1).unwrap(), 4, 1e-4)
            .unwrap();
        assert_eq!(r.covers.len(), 4);
        for a in &r.abs_sums {
            assert!((a - 1.0).abs() < 2e-4, "{a}");
        }
        assert!(!r.growth.unbounded_suspected);
    }

    #[test]
    fn inverse_square_root_stays_near_two() {
        let (_, mu, fam) = setup();
        let f = Integrand::builtin("inv_sqrt", 1).unwrap();
        let delta = Gauge::new(|x| 0.25 * x[0].max(1e-300));
        let r = uniform_bound_probe(&f, &Region::unit_cube(1), &mu, &fam, &delta, 3, 1e-4).unwrap();
        assert!(r.max_abs_sum > 1.9 && r.max_abs_sum < 2.1, "{}", r.max_abs_sum);
    }

    #[test]
    fn growth_flags_monotone_blowup() {
        let g = growth_of(&[0.5, 1.0, 2.0, 4.0, 8.0]);
        assert!(g.unbounded_suspected && (g.log_slope - 2f64.ln()).abs() < 1e-12);
        assert!(!growth_of(&[1.0, 1.01, 0.99]).unbounded_suspected);
    }
}

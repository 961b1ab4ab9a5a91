//! Gauges, Riemann sums over disjoint covers, integral certificates, the
//! uniform-bound probe, and a principal-value counterexample.

mod gauge;
mod integrand;
mod pipeline;
mod probe;
mod pv;
mod riemann;

pub use gauge::{gauge_from_modulus, Gauge, GaugeSource};
pub use integrand::{Integrand, BUILTINS};
pub use pipeline::{integrate, GaugePlan, IntegralCertificate, IntegrateOptions};
pub use probe::{uniform_bound_probe, Growth, ProbeReport};
pub use pv::{pv_counterexample, pv_integrand, pv_measure, pv_min_radius, PvReport};
pub use riemann::{riemann_sum, riemann_sum_over, RiemannSum};

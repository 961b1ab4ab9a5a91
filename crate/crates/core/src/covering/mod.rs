//! Satellite configurations, greedy selection with disjoint partition, the
//! heavy-subfamily selector, and packing bounds for the cardinality constant.

mod family;
mod packing;
mod satellite;
mod select;

pub use family::TaggedFamily;
pub use packing::{kappa_bound, n_gamma, n_surface, packing_count, packing_upper, KappaMode, PackingBounds, PackingWitness, SURFACE_TOL};
pub use satellite::{is_satellite_config, satellite_search, SatelliteConfig, SatelliteVerdict, Violation};
pub use select::{greedy_select, heavy_subfamily, partition_disjoint, HeavySelection, Partition};

pub(crate) use select::{check_tau, heavy_from_masses};

/// Default `tau` for cover pipelines.
pub const DEFAULT_TAU: f64 = 1.2;

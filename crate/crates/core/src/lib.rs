//! Measures the digital divide created by where cloud edge datacenters are
//! placed: distance inequality between the closest and farthest populations,
//! wealth-ranked fairness of datacenter access, coverage/fairness trade-offs
//! for candidate sites, LEO-satellite what-if scenarios, and latency
//! attribution from recorded traceroutes.

pub mod catalog;
pub mod divide;
pub mod error;
pub mod fairness;
pub mod geo;
pub mod leo;
pub mod placement;
pub mod timeline;
pub mod tracenet;

pub use catalog::{
    load_catalog, nearest_datacenter, CatalogFilter, Datacenter, DatacenterCatalog, DcClass, LaunchDate,
};
pub use divide::{
    distance_distribution, inequality_report, inequality_timeline, percentile_ratio, weighted_percentile,
    InequalityReport, PopulationGroup, WeightedDistribution,
};
pub use error::{Error, Result};
pub use fairness::{
    cai, ci_timeline, concentration, concentration_curve, concentration_index, sigma_sweep, AccessUnit,
    ConcentrationCurve, ConcentrationResult, DEFAULT_SIGMA_KM,
};
pub use geo::{haversine_km, GeoPoint, PopulationGrid};
pub use leo::{leo_fairness_report, leo_inequality_report, leo_transform, LeoScenario};
pub use placement::{evaluate_candidate, filter_candidates, pareto_front, CandidateCity, ParetoResult};
pub use timeline::LaunchEvent;

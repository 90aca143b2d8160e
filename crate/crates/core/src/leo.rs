//! What-if transforms for users reaching the cloud through a LEO satellite
//! ISP: a constant satellite-hop distance added to every ground distance, and
//! fairness re-evaluated over wider access radii.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogFilter, DatacenterCatalog};
use crate::divide::{distance_distribution, InequalityReport, PopulationGroup, WeightedDistribution};
use crate::error::{Error, Result};
use crate::fairness::{sigma_sweep, AccessUnit, ConcentrationResult};

pub const DEFAULT_HOP_KM: f64 = 500.0;
/// Ground radius covered by a single satellite.
pub const SINGLE_SATELLITE_RADIUS_KM: f64 = 900.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeoScenario {
    #[serde(default = "default_hop")]
    pub hop_km: f64,
    #[serde(default = "default_sigmas")]
    pub sigma_list: Vec<f64>,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_hop() -> f64 {
    DEFAULT_HOP_KM
}

fn default_sigmas() -> Vec<f64> {
    vec![70.0, SINGLE_SATELLITE_RADIUS_KM, 3000.0]
}

fn default_label() -> String {
    "leo".to_string()
}

impl Default for LeoScenario {
    fn default() -> Self {
        LeoScenario {
            hop_km: default_hop(),
            sigma_list: default_sigmas(),
            label: default_label(),
        }
    }
}

impl LeoScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.hop_km.is_finite() && self.hop_km >= 0.0) {
            return Err(Error::Argument(format!("hop_km must be >= 0, got {}", self.hop_km)));
        }
        if self.sigma_list.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Argument("sigma_list entries must be > 0".into()));
        }
        if self.sigma_list.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument("sigma_list must be ascending".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let s: LeoScenario = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path.display().to_string(), format!("line {}", e.line()), e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

pub fn leo_transform(dist: &WeightedDistribution, hop_km: f64) -> Result<WeightedDistribution> {
    if !(hop_km.is_finite() && hop_km >= 0.0) {
        return Err(Error::Argument(format!("hop_km must be >= 0, got {hop_km}")));
    }
    Ok(dist.shifted(hop_km))
}

/// Per-continent inequality after adding the satellite hop.
pub fn leo_inequality_report(
    groups: &[PopulationGroup],
    catalog: &DatacenterCatalog,
    filter: &CatalogFilter,
    hop_km: f64,
) -> Result<BTreeMap<String, InequalityReport>> {
    let mut by_continent: BTreeMap<&str, Vec<PopulationGroup>> = BTreeMap::new();
    for g in groups {
        by_continent.entry(g.continent.as_str()).or_default().push(g.clone());
    }
    let desc = format!("{};hop_km={hop_km}", filter.describe());
    by_continent
        .into_iter()
        .map(|(continent, members)| {
            let dist = leo_transform(&distance_distribution(&members, catalog, filter)?, hop_km)?;
            Ok((
                continent.to_string(),
                InequalityReport::from_distribution(&dist, desc.clone()),
            ))
        })
        .collect()
}

pub fn leo_fairness_report(
    units: &[AccessUnit],
    catalog: &DatacenterCatalog,
    filter: &CatalogFilter,
    scenario: &LeoScenario,
) -> Result<Vec<(f64, ConcentrationResult)>> {
    scenario.validate()?;
    sigma_sweep(units, catalog, filter, &scenario.sigma_list)
}

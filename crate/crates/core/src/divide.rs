//! Population-weighted distance-to-nearest-datacenter distributions and
//! percentile-ratio inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{nearest_in, CatalogFilter, Datacenter, DatacenterCatalog};
use crate::error::{Error, Result};
use crate::geo::{AdminUnit, CensusTract, CompensatedSum, GeoPoint};
use crate::timeline::{deployment_steps, LaunchEvent};

/// Percentiles below this distance (km) make a ratio report infinity.
pub const RATIO_GUARD_KM: f64 = 0.001;

/// A population group located at a single representative point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationGroup {
    pub id: String,
    pub location: GeoPoint,
    pub population: f64,
    pub continent: String,
}

impl From<&CensusTract> for PopulationGroup {
    fn from(t: &CensusTract) -> Self {
        PopulationGroup {
            id: t.tract_id.clone(),
            location: t.location,
            population: t.population,
            continent: String::new(),
        }
    }
}

impl PopulationGroup {
    /// Requires a filled representative point.
    pub fn from_admin_unit(u: &AdminUnit) -> Result<Self> {
        let location = u
            .rep_point
            .ok_or_else(|| Error::Invariant(format!("unit `{}` has no representative point", u.id)))?;
        Ok(PopulationGroup {
            id: u.id.clone(),
            location,
            population: u.population,
            continent: u.continent.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedDistribution {
    samples: Vec<Sample>,
    total_weight: f64,
}

impl WeightedDistribution {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        for s in &samples {
            if !(s.value.is_finite() && s.value >= 0.0) {
                return Err(Error::Argument(format!("invalid sample value {}", s.value)));
            }
            if !(s.weight.is_finite() && s.weight >= 0.0) {
                return Err(Error::Argument(format!("invalid sample weight {}", s.weight)));
            }
        }
        let total_weight = samples.iter().map(|s| s.weight).collect::<CompensatedSum>().value();
        if total_weight <= 0.0 {
            return Err(Error::Argument("distribution has no positive weight".into()));
        }
        Ok(WeightedDistribution { samples, total_weight })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(value, weight)| Sample { value, weight })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same weights, every value shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> WeightedDistribution {
        WeightedDistribution {
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    value: s.value + offset,
                    weight: s.weight,
                })
                .collect(),
            total_weight: self.total_weight,
        }
    }

    pub fn sorted(&self) -> SortedDistribution {
        let mut samples = self.samples.clone();
        samples.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut cumulative = Vec::with_capacity(samples.len());
        let mut acc = 0.0;
        for s in &samples {
            acc += s.weight;
            cumulative.push(acc);
        }
        SortedDistribution {
            values: samples.iter().map(|s| s.value).collect(),
            cumulative,
        }
    }
}

/// Samples sorted by value with running weight totals.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedDistribution {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SortedDistribution {
    fn total(&self) -> f64 {
        *self.cumulative.last().expect("non-empty distribution")
    }

    /// Lower-step weighted quantile: the smallest value whose cumulative
    /// weight reaches `q`% of the total. No interpolation.
    pub fn percentile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 100.0) {
            return Err(Error::Argument(format!("percentile {q} outside (0, 100)")));
        }
        let threshold = q * self.total() / 100.0;
        let idx = self.cumulative.partition_point(|&c| c < threshold);
        Ok(self.values[idx.min(self.values.len() - 1)])
    }

    /// `(value, cumulative weight fraction)` at each distinct value.
    pub fn cdf_points(&self) -> Vec<(f64, f64)> {
        let total = self.total();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (&v, &c) in self.values.iter().zip(&self.cumulative) {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = c / total,
                _ => out.push((v, c / total)),
            }
        }
        out
    }
}

pub fn weighted_percentile(dist: &WeightedDistribution, q: f64) -> Result<f64> {
    dist.sorted().percentile(q)
}

/// `p_hi / p_lo`, or infinity when `p_lo` is below [`RATIO_GUARD_KM`].
pub fn percentile_ratio(dist: &WeightedDistribution, hi: f64, lo: f64) -> Result<f64> {
    ratio_sorted(&dist.sorted(), hi, lo)
}

fn ratio_sorted(sorted: &SortedDistribution, hi: f64, lo: f64) -> Result<f64> {
    if hi <= lo {
        return Err(Error::Argument(format!("ratio needs hi > lo, got {hi}/{lo}")));
    }
    let (h, l) = (sorted.percentile(hi)?, sorted.percentile(lo)?);
    Ok(guarded_ratio(h, l))
}

fn guarded_ratio(hi: f64, lo: f64) -> f64 {
    if lo < RATIO_GUARD_KM {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// One `(nearest distance, population)` sample per group against an explicit
/// deployment.
pub fn distances_to(
    groups: &[PopulationGroup],
    deployment: &[&Datacenter],
    filter_desc: &str,
) -> Result<WeightedDistribution> {
    if deployment.is_empty() {
        return Err(Error::EmptyCatalog(filter_desc.to_string()));
    }
    if !groups.iter().any(|g| g.population > 0.0) {
        return Err(Error::Argument("no group with positive population".into()));
    }
    let samples: Vec<Sample> = groups
        .par_iter()
        .map(|g| Sample {
            value: nearest_in(g.location, deployment).expect("non-empty").1,
            weight: g.population,
        })
        .collect();
    WeightedDistribution::new(samples)
}

pub fn distance_distribution(
    groups: &[PopulationGroup],
    catalog: &DatacenterCatalog,
    filter: &CatalogFilter,
) -> Result<WeightedDistribution> {
    let deployment = catalog.select_nonempty(filter)?;
    distances_to(groups, &deployment, &filter.describe())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub p10: f64,
    pub p20: f64,
    pub p50: f64,
    pub p80: f64,
    pub p90: f64,
    pub ratio_90_10: f64,
    pub ratio_80_20: f64,
    /// Set when a ratio hit the near-zero guard and reports infinity.
    pub ratio_guarded: bool,
    pub group_count: usize,
    pub total_weight: f64,
    pub catalog_filter: String,
}

impl InequalityReport {
    pub fn from_distribution(dist: &WeightedDistribution, catalog_filter: impl Into<String>) -> Self {
        let s = dist.sorted();
        let pct = |q| s.percentile(q).expect("fixed percentiles are in range");
        let (p10, p20, p50, p80, p90) = (pct(10.0), pct(20.0), pct(50.0), pct(80.0), pct(90.0));
        let ratio_90_10 = guarded_ratio(p90, p10);
        let ratio_80_20 = guarded_ratio(p80, p20);
        InequalityReport {
            p10,
            p20,
            p50,
            p80,
            p90,
            ratio_90_10,
            ratio_80_20,
            ratio_guarded: ratio_90_10.is_infinite() || ratio_80_20.is_infinite(),
            group_count: dist.len(),
            total_weight: dist.total_weight(),
            catalog_filter: catalog_filter.into(),
        }
    }
}

pub fn inequality_report(
    groups: &[PopulationGroup],
    catalog: &DatacenterCatalog,
    filter: &CatalogFilter,
) -> Result<InequalityReport> {
    let dist = distance_distribution(groups, catalog, filter)?;
    Ok(InequalityReport::from_distribution(&dist, filter.describe()))
}

/// Report for the regions-only deployment followed by one report per
/// cumulative launch.
pub fn inequality_timeline(
    groups: &[PopulationGroup],
    catalog: &DatacenterCatalog,
    launches: &[String],
) -> Result<Vec<(LaunchEvent, InequalityReport)>> {
    inequality_timeline_from(groups, catalog, &CatalogFilter::regions(), launches)
}

/// As [`inequality_timeline`] with an arbitrary base deployment.
pub fn inequality_timeline_from(
    groups: &[PopulationGroup],
    catalog: &DatacenterCatalog,
    base: &CatalogFilter,
    launches: &[String],
) -> Result<Vec<(LaunchEvent, InequalityReport)>> {
    let base_desc = base.describe();
    deployment_steps(catalog, base, launches)?
        .into_iter()
        .map(|(event, deployment)| {
            let desc = match &event.datacenter_id {
                None => base_desc.clone(),
                Some(_) => format!("{base_desc};launches={}", event.step),
            };
            let dist = distances_to(groups, &deployment, &desc)?;
            Ok((event, InequalityReport::from_distribution(&dist, desc)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::fixtures::*;
    use crate::catalog::DcClass;
    use crate::geo::haversine_km;

    fn dist(pairs: &[(f64, f64)]) -> WeightedDistribution {
        WeightedDistribution::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn group(id: &str, lat: f64, lon: f64, pop: f64) -> PopulationGroup {
        PopulationGroup {
            id: id.into(),
            location: GeoPoint::new(lat, lon).unwrap(),
            population: pop,
            continent: "NA".into(),
        }
    }

    #[test]
    fn single_sample_every_q() {
        let d = dist(&[(42.0, 3.0)]);
        for q in [0.5, 10.0, 50.0, 99.9] {
            assert_eq!(weighted_percentile(&d, q).unwrap(), 42.0);
        }
    }

    #[test]
    fn median_of_one_to_ten() {
        let d = dist(&(1..=10).map(|v| (v as f64, 1.0)).collect::<Vec<_>>());
        assert_eq!(weighted_percentile(&d, 50.0).unwrap(), 5.0);
        assert_eq!(weighted_percentile(&d, 10.0).unwrap(), 1.0);
        assert_eq!(weighted_percentile(&d, 90.0).unwrap(), 9.0);
        assert_eq!(weighted_percentile(&d, 90.5).unwrap(), 10.0);
    }

    #[test]
    fn mass_concentrated_on_one_value() {
        // 95% of the weight sits on 2 km; cumulative at 2 is 0.97 >= 0.90.
        let d = dist(&[(1.0, 2.0), (2.0, 95.0), (50.0, 3.0)]);
        assert_eq!(weighted_percentile(&d, 90.0).unwrap(), 2.0);
    }

    #[test]
    fn q_out_of_range() {
        let d = dist(&[(1.0, 1.0)]);
        assert!(weighted_percentile(&d, 0.0).is_err());
        assert!(weighted_percentile(&d, 100.0).is_err());
        assert!(percentile_ratio(&d, 10.0, 90.0).is_err());
    }

    #[test]
    fn equal_samples_ratio_is_one() {
        let d = dist(&[(7.0, 1.0), (7.0, 5.0), (7.0, 2.0)]);
        assert_eq!(percentile_ratio(&d, 90.0, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn near_zero_low_percentile_is_guarded() {
        let d = dist(&[(0.0, 5.0), (100.0, 5.0)]);
        assert!(percentile_ratio(&d, 90.0, 10.0).unwrap().is_infinite());
        let r = InequalityReport::from_distribution(&d, "x");
        assert!(r.ratio_guarded);
    }

    #[test]
    fn zero_weight_distribution_rejected() {
        assert!(WeightedDistribution::from_pairs([(1.0, 0.0)]).is_err());
        assert!(WeightedDistribution::from_pairs([(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn groups_at_datacenters_have_zero_distance() {
        let cat = DatacenterCatalog::new(vec![
            dc("sf", SF.0, SF.1, DcClass::Region, "2010-01-01"),
            dc("nyc", NYC.0, NYC.1, DcClass::Region, "2010-01-01"),
        ])
        .unwrap();
        let groups = vec![group("a", SF.0, SF.1, 3.0), group("b", NYC.0, NYC.1, 4.0)];
        let d = distance_distribution(&groups, &cat, &CatalogFilter::regions()).unwrap();
        assert_eq!(
            d.samples(),
            &[
                Sample {
                    value: 0.0,
                    weight: 3.0
                },
                Sample {
                    value: 0.0,
                    weight: 4.0
                }
            ]
        );
        assert_eq!(d.total_weight(), 7.0);
    }

    #[test]
    fn matches_exhaustive_scan() {
        let cat = DatacenterCatalog::new(vec![
            dc("sf", SF.0, SF.1, DcClass::Region, "2010-01-01"),
            dc("nyc", NYC.0, NYC.1, DcClass::Region, "2010-01-01"),
            dc("aus", AUSTIN.0, AUSTIN.1, DcClass::Region, "2010-01-01"),
        ])
        .unwrap();
        let groups = vec![
            group("a", 47.6, -122.3, 1.0),
            group("b", 41.9, -87.6, 2.0),
            group("c", 25.8, -80.2, 3.0),
            group("d", 39.7, -105.0, 4.0),
            group("e", 33.4, -112.1, 5.0),
        ];
        let d = distance_distribution(&groups, &cat, &CatalogFilter::regions()).unwrap();
        for (g, s) in groups.iter().zip(d.samples()) {
            let oracle = cat
                .entries()
                .iter()
                .map(|dc| haversine_km(g.location, dc.location))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(s.value, oracle);
            assert_eq!(s.weight, g.population);
        }
    }

    #[test]
    fn timeline_has_one_report_per_prefix() {
        let cat = DatacenterCatalog::new(vec![
            dc("sf", SF.0, SF.1, DcClass::Region, "2010-01-01"),
            dc("nyc", NYC.0, NYC.1, DcClass::Region, "2010-01-01"),
            dc("la", LA.0, LA.1, DcClass::LocalZone, "2019-12-03"),
        ])
        .unwrap();
        let groups = vec![
            group("a", 34.1, -118.3, 10.0),
            group("b", 30.3, -97.7, 10.0),
            group("c", 40.7, -74.0, 10.0),
        ];
        let base = inequality_timeline(&groups, &cat, &[]).unwrap();
        assert_eq!(base.len(), 1);
        let tl = inequality_timeline(&groups, &cat, &["la".into()]).unwrap();
        assert_eq!(tl.len(), 2);
        assert!(tl[1].1.p10 <= tl[0].1.p10);
        assert!(inequality_timeline(&groups, &cat, &["xx".into()]).is_err());
    }

    #[test]
    fn cdf_points_merge_ties() {
        let d = dist(&[(1.0, 1.0), (1.0, 1.0), (3.0, 2.0)]);
        assert_eq!(d.sorted().cdf_points(), vec![(1.0, 0.5), (3.0, 1.0)]);
    }
}

//! Cloud Access Indicator and wealth-ranked concentration analysis.
//!
//! The CAI of a unit counts the datacenters within `sigma` km of its
//! representative point. Units are ranked by wealth (ties by id); the
//! concentration curve plots cumulative population share against cumulative
//! share of `cai * population`, and the concentration index is twice the
//! signed area between the line of equality and that curve, so positive
//! values mean access is concentrated among the wealthy.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogFilter, Datacenter, DatacenterCatalog};
use crate::error::{Error, Result};
use crate::geo::{haversine_km, AdminUnit, CensusTract, GeoPoint};
use crate::timeline::{deployment_steps, LaunchEvent};

pub const DEFAULT_SIGMA_KM: f64 = 70.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessUnit {
    pub id: String,
    pub rep_point: GeoPoint,
    pub population: f64,
    pub wealth: f64,
    #[serde(default)]
    pub cai: u32,
}

impl AccessUnit {
    pub fn new(id: impl Into<String>, rep_point: GeoPoint, population: f64, wealth: f64) -> Result<Self> {
        let id = id.into();
        if !(population.is_finite() && population > 0.0) {
            return Err(Error::Argument(format!("unit `{id}` population must be > 0")));
        }
        if !wealth.is_finite() {
            return Err(Error::Argument(format!("unit `{id}` wealth must be finite")));
        }
        Ok(AccessUnit {
            id,
            rep_point,
            population,
            wealth,
            cai: 0,
        })
    }

    /// Tracts with zero population are not access units; returns `None` for them.
    pub fn from_tract(t: &CensusTract) -> Option<Self> {
        AccessUnit::new(&t.tract_id, t.location, t.population, t.median_income).ok()
    }

    /// Needs population, wealth and representative point filled; `None` otherwise.
    pub fn from_admin_unit(u: &AdminUnit) -> Option<Self> {
        AccessUnit::new(&u.id, u.rep_point?, u.population, u.wealth?).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCurve {
    points: Vec<CurvePoint>,
}

impl ConcentrationCurve {
    /// Validates the breakpoints: starts at (0,0), ends at (1,1), x strictly
    /// increasing, y non-decreasing.
    pub fn from_points(points: Vec<CurvePoint>) -> Result<Self> {
        let ok_ends = points.first() == Some(&CurvePoint { x: 0.0, y: 0.0 })
            && points.last() == Some(&CurvePoint { x: 1.0, y: 1.0 });
        let ok_steps = points.windows(2).all(|w| w[1].x > w[0].x && w[1].y >= w[0].y);
        if !(ok_ends && ok_steps && points.len() >= 2) {
            return Err(Error::Invariant("malformed concentration curve".into()));
        }
        Ok(ConcentrationCurve { points })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationResult {
    pub ci: f64,
    pub curve: ConcentrationCurve,
    pub sigma: f64,
    pub catalog_filter: String,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("sigma must be > 0 km, got {sigma}")))
    }
}

/// Number of deployment entries within `sigma` km (inclusive) of `p`.
pub fn cai_at(p: GeoPoint, deployment: &[&Datacenter], sigma: f64) -> u32 {
    deployment
        .iter()
        .filter(|dc| haversine_km(p, dc.location) <= sigma)
        .count() as u32
}

pub fn cai(unit: &AccessUnit, catalog: &DatacenterCatalog, filter: &CatalogFilter, sigma: f64) -> Result<u32> {
    check_sigma(sigma)?;
    Ok(cai_at(unit.rep_point, &catalog.select(filter), sigma))
}

/// Returns copies of `units` with `cai` filled against `deployment`.
pub fn fill_cai(units: &[AccessUnit], deployment: &[&Datacenter], sigma: f64) -> Result<Vec<AccessUnit>> {
    check_sigma(sigma)?;
    Ok(units
        .par_iter()
        .map(|u| AccessUnit {
            cai: cai_at(u.rep_point, deployment, sigma),
            ..u.clone()
        })
        .collect())
}

fn wealth_order(a: &AccessUnit, b: &AccessUnit) -> Ordering {
    a.wealth.total_cmp(&b.wealth).then_with(|| a.id.cmp(&b.id))
}

/// Concentration curve over units with `cai` already filled.
pub fn concentration_curve(units: &[AccessUnit]) -> Result<ConcentrationCurve> {
    if units.is_empty() {
        return Err(Error::Argument("no units".into()));
    }
    if let Some(u) = units.iter().find(|u| !(u.population > 0.0 && u.population.is_finite())) {
        return Err(Error::Argument(format!("unit `{}` population must be > 0", u.id)));
    }
    let mut ranked: Vec<&AccessUnit> = units.iter().collect();
    ranked.sort_by(|a, b| wealth_order(a, b));

    let mut cum_pop = Vec::with_capacity(ranked.len());
    let mut cum_mass = Vec::with_capacity(ranked.len());
    let (mut pop, mut mass) = (0.0, 0.0);
    for u in &ranked {
        pop += u.population;
        mass += u.cai as f64 * u.population;
        cum_pop.push(pop);
        cum_mass.push(mass);
    }
    if mass <= 0.0 {
        return Err(Error::NoAccess);
    }

    let mut points = Vec::with_capacity(ranked.len() + 1);
    points.push(CurvePoint { x: 0.0, y: 0.0 });
    points.extend(cum_pop.iter().zip(&cum_mass).map(|(p, m)| CurvePoint {
        x: p / pop,
        y: m / mass,
    }));
    ConcentrationCurve::from_points(points)
}

/// Twice the area between the line of equality and the curve, evaluated
/// with the trapezoid rule over the breakpoints (equivalently `1 - 2A`).
pub fn concentration_index(curve: &ConcentrationCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            (b.x - a.x) * ((a.x - a.y) + (b.x - b.y))
        })
        .sum()
}

fn concentration_for(
    units: &[AccessUnit],
    deployment: &[&Datacenter],
    sigma: f64,
    catalog_filter: String,
) -> Result<ConcentrationResult> {
    let filled = fill_cai(units, deployment, sigma)?;
    let curve = concentration_curve(&filled)?;
    Ok(ConcentrationResult {
        ci: concentration_index(&curve),
        curve,
        sigma,
        catalog_filter,
    })
}

/// CAI, curve and index for one filtered deployment.
pub fn concentration(
    units: &[AccessUnit],
    catalog: &DatacenterCatalog,
    filter: &CatalogFilter,
    sigma: f64,
) -> Result<ConcentrationResult> {
    concentration_for(units, &catalog.select(filter), sigma, filter.describe())
}

/// Like [`concentration`] against an explicit deployment.
pub fn concentration_in(
    units: &[AccessUnit],
    deployment: &[&Datacenter],
    sigma: f64,
    label: impl Into<String>,
) -> Result<ConcentrationResult> {
    concentration_for(units, deployment, sigma, label.into())
}

/// CI for the regions-only deployment and after each cumulative launch.
pub fn ci_timeline(
    units: &[AccessUnit],
    catalog: &DatacenterCatalog,
    launches: &[String],
    sigma: f64,
) -> Result<Vec<(LaunchEvent, ConcentrationResult)>> {
    ci_timeline_from(units, catalog, &CatalogFilter::regions(), launches, sigma)
}

pub fn ci_timeline_from(
    units: &[AccessUnit],
    catalog: &DatacenterCatalog,
    base: &CatalogFilter,
    launches: &[String],
    sigma: f64,
) -> Result<Vec<(LaunchEvent, ConcentrationResult)>> {
    check_sigma(sigma)?;
    let base_desc = base.describe();
    deployment_steps(catalog, base, launches)?
        .into_iter()
        .map(|(event, deployment)| {
            let desc = match event.datacenter_id {
                None => base_desc.clone(),
                Some(_) => format!("{base_desc};launches={}", event.step),
            };
            let res = concentration_for(units, &deployment, sigma, desc)?;
            Ok((event, res))
        })
        .collect()
}

/// One result per sigma; sigmas must be positive and ascending.
pub fn sigma_sweep(
    units: &[AccessUnit],
    catalog: &DatacenterCatalog,
    filter: &CatalogFilter,
    sigmas: &[f64],
) -> Result<Vec<(f64, ConcentrationResult)>> {
    for &s in sigmas {
        check_sigma(s)?;
    }
    if sigmas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("sigmas must be sorted ascending".into()));
    }
    let deployment = catalog.select(filter);
    let desc = filter.describe();
    sigmas
        .iter()
        .map(|&s| Ok((s, concentration_for(units, &deployment, s, desc.clone())?)))
        .collect()
}

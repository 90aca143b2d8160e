//! Candidate city selection trading population coverage against fairness.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Datacenter, DcClass, LaunchDate};
use crate::error::{Error, Result};
use crate::fairness::{concentration_in, AccessUnit};
use crate::geo::{haversine_km, CompensatedSum, GeoPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCity {
    pub name: String,
    pub location: GeoPoint,
    pub city_population: f64,
    pub coverage: f64,
    /// `None` until evaluated, and for cities that reach nobody.
    pub ci_if_selected: Option<f64>,
    pub evaluable: bool,
}

impl CandidateCity {
    pub fn new(name: impl Into<String>, location: GeoPoint, city_population: f64) -> Self {
        CandidateCity {
            name: name.into(),
            location,
            city_population,
            coverage: 0.0,
            ci_if_selected: None,
            evaluable: false,
        }
    }

    fn as_datacenter(&self) -> Datacenter {
        Datacenter {
            id: format!("candidate:{}", self.name),
            name: self.name.clone(),
            city: self.name.clone(),
            country: String::new(),
            continent: String::new(),
            location: self.location,
            class: DcClass::LocalZone,
            launch_date: LaunchDate::Announced,
        }
    }
}

#[derive(Deserialize)]
struct CityRow {
    name: String,
    lat: f64,
    lon: f64,
    population: f64,
}

/// Reads `name,lat,lon,population`.
pub fn load_cities(path: impl AsRef<Path>) -> Result<Vec<CandidateCity>> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&file, "open", e.to_string()))?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CityRow>().enumerate() {
        let loc = format!("row {}", i + 2);
        let row = row.map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
        if !(row.population.is_finite() && row.population >= 0.0) {
            return Err(Error::parse(&file, &loc, "population must be >= 0"));
        }
        let p = GeoPoint::new(row.lat, row.lon).map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
        out.push(CandidateCity::new(row.name, p, row.population));
    }
    Ok(out)
}

fn by_rank(a: &CandidateCity, b: &CandidateCity) -> Ordering {
    b.city_population
        .total_cmp(&a.city_population)
        .then_with(|| a.name.cmp(&b.name))
}

/// Greedy scan in descending population order: a city is kept iff it is at
/// least `sigma` km from every city kept before it.
pub fn filter_candidates(cities: &[CandidateCity], sigma: f64) -> Vec<CandidateCity> {
    let mut ranked: Vec<&CandidateCity> = cities.iter().collect();
    ranked.sort_by(|a, b| by_rank(a, b));
    let mut kept: Vec<CandidateCity> = Vec::new();
    for c in ranked {
        if kept.iter().all(|k| haversine_km(k.location, c.location) >= sigma) {
            kept.push(c.clone());
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub coverage: f64,
    pub ci: f64,
}

/// Coverage within `sigma` and the CI of deploying only at `city` (plus
/// `baseline`, when given). Errors with `NoAccess` when nobody is reached.
pub fn evaluate_candidate(
    city: &CandidateCity,
    units: &[AccessUnit],
    sigma: f64,
    baseline: &[&Datacenter],
) -> Result<CandidateScore> {
    if units.is_empty() {
        return Err(Error::Argument("no access units".into()));
    }
    let coverage = units
        .iter()
        .filter(|u| haversine_km(u.rep_point, city.location) <= sigma)
        .map(|u| u.population)
        .collect::<CompensatedSum>()
        .value();
    let site = city.as_datacenter();
    let mut deployment: Vec<&Datacenter> = baseline.to_vec();
    deployment.push(&site);
    let res = concentration_in(units, &deployment, sigma, format!("candidate:{}", city.name))?;
    Ok(CandidateScore { coverage, ci: res.ci })
}

/// Scores every city; cities reaching nobody are kept but marked unevaluable.
pub fn evaluate_all(
    cities: &[CandidateCity],
    units: &[AccessUnit],
    sigma: f64,
    baseline: &[&Datacenter],
) -> Result<Vec<CandidateCity>> {
    cities
        .par_iter()
        .map(|c| match evaluate_candidate(c, units, sigma, baseline) {
            Ok(score) => Ok(CandidateCity {
                coverage: score.coverage,
                ci_if_selected: Some(score.ci),
                evaluable: true,
                ..c.clone()
            }),
            Err(Error::NoAccess) => Ok(CandidateCity {
                coverage: 0.0,
                ci_if_selected: None,
                evaluable: false,
                ..c.clone()
            }),
            Err(e) => Err(e),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoResult {
    /// Evaluable candidates ordered by (coverage desc, ci asc, name); any
    /// unevaluable ones follow in name order.
    pub candidates: Vec<CandidateCity>,
    /// Parallel to `candidates`.
    pub on_front: Vec<bool>,
}

impl ParetoResult {
    pub fn front(&self) -> impl Iterator<Item = &CandidateCity> {
        self.candidates
            .iter()
            .zip(&self.on_front)
            .filter(|(_, f)| **f)
            .map(|(c, _)| c)
    }
}

/// `a` dominates `b`: at least as much coverage and no higher CI, strictly
/// better in one.
pub fn dominates(a: &CandidateCity, b: &CandidateCity) -> bool {
    match (a.ci_if_selected, b.ci_if_selected) {
        (Some(ca), Some(cb)) => a.coverage >= b.coverage && ca <= cb && (a.coverage > b.coverage || ca < cb),
        _ => false,
    }
}

/// Non-dominated set under (maximize coverage, minimize CI).
pub fn pareto_front(candidates: &[CandidateCity]) -> ParetoResult {
    let (mut scored, mut rest): (Vec<CandidateCity>, Vec<CandidateCity>) =
        candidates.iter().cloned().partition(|c| c.ci_if_selected.is_some());
    scored.sort_by(|a, b| {
        b.coverage
            .total_cmp(&a.coverage)
            .then_with(|| a.ci_if_selected.unwrap().total_cmp(&b.ci_if_selected.unwrap()))
            .then_with(|| a.name.cmp(&b.name))
    });
    rest.sort_by(|a, b| a.name.cmp(&b.name));

    // Sweep in coverage-descending order. A candidate is dominated iff some
    // strictly higher-coverage candidate has CI <= its CI, or a same-coverage
    // candidate has strictly lower CI (the first of its coverage group).
    let mut on_front = Vec::with_capacity(candidates.len());
    let mut best_ci_above = f64::INFINITY;
    let mut i = 0;
    while i < scored.len() {
        let cov = scored[i].coverage;
        let mut j = i;
        while j < scored.len() && scored[j].coverage == cov {
            j += 1;
        }
        let group_min = scored[i].ci_if_selected.unwrap();
        for c in &scored[i..j] {
            let ci = c.ci_if_selected.unwrap();
            on_front.push(!(best_ci_above <= ci || group_min < ci));
        }
        best_ci_above = best_ci_above.min(group_min);
        i = j;
    }
    on_front.extend(std::iter::repeat_n(false, rest.len()));
    scored.extend(rest);
    ParetoResult {
        candidates: scored,
        on_front,
    }
}

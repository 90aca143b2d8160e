use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GeoPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusTract {
    pub tract_id: String,
    pub location: GeoPoint,
    pub population: f64,
    pub median_income: f64,
}

#[derive(Deserialize)]
struct TractRow {
    tract_id: String,
    lat: f64,
    lon: f64,
    population: f64,
    median_income: f64,
}

/// Reads `tract_id,lat,lon,population,median_income`.
pub fn load_tracts(path: impl AsRef<Path>) -> Result<Vec<CensusTract>> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&file, "open", e.to_string()))?;
    let mut tracts = Vec::new();
    for (i, row) in rdr.deserialize::<TractRow>().enumerate() {
        let loc = format!("row {}", i + 2);
        let row = row.map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
        if !(row.population >= 0.0 && row.population.is_finite()) {
            return Err(Error::parse(&file, &loc, "population must be >= 0"));
        }
        if !(row.median_income >= 0.0 && row.median_income.is_finite()) {
            return Err(Error::parse(&file, &loc, "median_income must be >= 0"));
        }
        let location = GeoPoint::new(row.lat, row.lon).map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
        tracts.push(CensusTract {
            tract_id: row.tract_id,
            location,
            population: row.population,
            median_income: row.median_income,
        });
    }
    Ok(tracts)
}

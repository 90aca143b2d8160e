use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::polygon::{point_in_region, AdminUnit};
use super::{CompensatedSum, GeoPoint, PopulationGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZonalStat {
    Sum,
    Mean,
}

/// Cells whose center lies inside `unit`, as (row, col).
fn assigned_cells(grid: &PopulationGrid, unit: &AdminUnit) -> Vec<(usize, usize)> {
    let g = grid.geometry();
    let bb = unit.bbox();
    let cs = g.cell_size;
    // row/col window from the bounding box, clamped to the grid
    let top = g.yll + g.n_rows as f64 * cs;
    let r0 = (((top - bb.max_lat) / cs).floor().max(0.0) as usize).min(g.n_rows);
    let r1 = (((top - bb.min_lat) / cs).ceil().max(0.0) as usize).min(g.n_rows);
    let c0 = (((bb.min_lon - g.xll) / cs).floor().max(0.0) as usize).min(g.n_cols);
    let c1 = (((bb.max_lon - g.xll) / cs).ceil().max(0.0) as usize).min(g.n_cols);

    let mut cells = Vec::new();
    for r in r0..r1 {
        for c in c0..c1 {
            if point_in_region(g.cell_center(r, c), unit) {
                cells.push((r, c));
            }
        }
    }
    cells
}

/// Sum or mean of the cells assigned to each unit by the cell-center rule.
/// Units without cells map to 0 for `Sum` and are absent for `Mean`; nodata
/// cells do not count towards a mean.
pub fn zonal_aggregate(grid: &PopulationGrid, units: &[AdminUnit], stat: ZonalStat) -> BTreeMap<String, f64> {
    let per_unit: Vec<(String, Option<f64>)> = units
        .par_iter()
        .map(|u| {
            let cells = assigned_cells(grid, u);
            let value = match stat {
                ZonalStat::Sum => Some(
                    cells
                        .iter()
                        .map(|&(r, c)| grid.get(r, c))
                        .collect::<CompensatedSum>()
                        .value(),
                ),
                ZonalStat::Mean => {
                    let data: Vec<f64> = cells
                        .iter()
                        .filter(|&&(r, c)| grid.has_data(r, c))
                        .map(|&(r, c)| grid.get(r, c))
                        .collect();
                    (!data.is_empty())
                        .then(|| data.iter().copied().collect::<CompensatedSum>().value() / data.len() as f64)
                }
            };
            (u.id.clone(), value)
        })
        .collect();
    per_unit.into_iter().filter_map(|(id, v)| v.map(|v| (id, v))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub point: GeoPoint,
    /// True when the unit had no population and the polygon centroid was used.
    pub fallback: bool,
}

/// Population-weighted mean of assigned cell centers (planar in lat/lon).
pub fn weighted_centroid(grid: &PopulationGrid, unit: &AdminUnit) -> Centroid {
    let mut w = CompensatedSum::default();
    let mut lat = CompensatedSum::default();
    let mut lon = CompensatedSum::default();
    for (r, c) in assigned_cells(grid, unit) {
        let v = grid.get(r, c);
        if v > 0.0 {
            let ctr = grid.geometry().cell_center(r, c);
            w.add(v);
            lat.add(v * ctr.lat);
            lon.add(v * ctr.lon);
        }
    }
    let total = w.value();
    if total > 0.0 {
        Centroid {
            point: GeoPoint {
                lat: lat.value() / total,
                lon: lon.value() / total,
            },
            fallback: false,
        }
    } else {
        Centroid {
            point: unit.polygon_centroid(),
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitFillSummary {
    pub units: usize,
    pub total_population: f64,
    /// Units whose representative point fell back to the polygon centroid.
    pub centroid_fallbacks: Vec<String>,
    /// Units without any NTL data cell (wealth left unset).
    pub missing_wealth: Vec<String>,
}

/// Fills `population` (zonal sum) and `rep_point` (weighted centroid).
pub fn populate_units(grid: &PopulationGrid, units: &mut [AdminUnit]) -> UnitFillSummary {
    let sums = zonal_aggregate(grid, units, ZonalStat::Sum);
    let centroids: Vec<Centroid> = units.par_iter().map(|u| weighted_centroid(grid, u)).collect();
    let mut summary = UnitFillSummary {
        units: units.len(),
        ..Default::default()
    };
    let mut total = CompensatedSum::default();
    for (u, c) in units.iter_mut().zip(centroids) {
        u.population = sums.get(&u.id).copied().unwrap_or(0.0);
        u.rep_point = Some(c.point);
        total.add(u.population);
        if c.fallback {
            summary.centroid_fallbacks.push(u.id.clone());
        }
    }
    summary.total_population = total.value();
    summary
}

/// Sets each unit's wealth to the mean of `ntl` over its cells, after
/// aligning `ntl` onto `population_grid` by nearest neighbour.
pub fn assign_wealth(
    ntl: &PopulationGrid,
    population_grid: &PopulationGrid,
    units: &mut [AdminUnit],
    summary: &mut UnitFillSummary,
) -> Result<()> {
    let aligned = if ntl.geometry() == population_grid.geometry() {
        ntl.clone()
    } else {
        ntl.resample_nearest(population_grid.geometry())?
    };
    let means = zonal_aggregate(&aligned, units, ZonalStat::Mean);
    for u in units.iter_mut() {
        u.wealth = means.get(&u.id).copied();
        if u.wealth.is_none() {
            summary.missing_wealth.push(u.id.clone());
        }
    }
    if units.iter().all(|u| u.wealth.is_none()) && !units.is_empty() {
        return Err(Error::Invariant("NTL grid does not overlap any unit".into()));
    }
    Ok(())
}

//! Python bindings for the `edge_divide` core library.

// pyo3 0.22 macro expansion trips this lint on every PyResult signature.
#![allow(clippy::useless_conversion)]

use std::collections::BTreeMap;

use edge_divide::catalog::{nearest_in, parse_classes};
use edge_divide::divide::{distances_to, InequalityReport, PopulationGroup};
use edge_divide::fairness::{concentration_curve, concentration_in};
use edge_divide::geo::GridGeometry;
use edge_divide::tracenet::cdf_speedup_stats;
use edge_divide::{
    load_catalog, nearest_datacenter, AccessUnit, CandidateCity, CatalogFilter, DatacenterCatalog, Error, GeoPoint,
    PopulationGrid, Result, WeightedDistribution, DEFAULT_SIGMA_KM,
};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

const ORIGIN: GeoPoint = GeoPoint { lat: 0.0, lon: 0.0 };

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Argument(_) => PyValueError::new_err(err.to_string()),
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn point(lat: f64, lon: f64) -> PyResult<GeoPoint> {
    GeoPoint::new(lat, lon).map_err(to_py)
}

fn distribution(values: Vec<f64>, weights: Option<Vec<f64>>) -> PyResult<WeightedDistribution> {
    let weights = weights.unwrap_or_else(|| vec![1.0; values.len()]);
    if weights.len() != values.len() {
        return Err(PyValueError::new_err("values and weights differ in length"));
    }
    WeightedDistribution::from_pairs(values.into_iter().zip(weights)).map_err(to_py)
}

fn make_filter(classes: Option<&str>, as_of: Option<&str>, include_announced: bool) -> PyResult<CatalogFilter> {
    let mut f = match classes {
        Some(c) => CatalogFilter::new(parse_classes(c).map_err(to_py)?),
        None => CatalogFilter::all_classes(),
    };
    if let Some(d) = as_of {
        let date = d
            .parse()
            .map_err(|_| PyValueError::new_err(format!("invalid date `{d}`, expected YYYY-MM-DD")))?;
        f = f.as_of(date);
    }
    Ok(f.with_announced(include_announced))
}

fn same_len(n: usize, others: &[usize]) -> PyResult<()> {
    if others.iter().any(|&m| m != n) {
        return Err(PyValueError::new_err("input sequences differ in length"));
    }
    Ok(())
}

/// A datacenter catalog loaded from CSV.
#[pyclass(name = "Catalog", module = "edge_divide")]
struct PyCatalog {
    inner: DatacenterCatalog,
}

#[pymethods]
impl PyCatalog {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyCatalog {
            inner: load_catalog(path).map_err(to_py)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Ids admitted by the filter, in catalog order.
    #[pyo3(signature = (classes=None, as_of=None, include_announced=false))]
    fn ids(&self, classes: Option<&str>, as_of: Option<&str>, include_announced: bool) -> PyResult<Vec<String>> {
        let f = make_filter(classes, as_of, include_announced)?;
        Ok(self.inner.select(&f).into_iter().map(|d| d.id.clone()).collect())
    }

    /// `(id, km)` of the nearest admitted datacenter.
    #[pyo3(signature = (lat, lon, classes=None, as_of=None))]
    fn nearest(&self, lat: f64, lon: f64, classes: Option<&str>, as_of: Option<&str>) -> PyResult<(String, f64)> {
        let f = make_filter(classes, as_of, false)?;
        let (dc, km) = nearest_datacenter(point(lat, lon)?, &self.inner, &f).map_err(to_py)?;
        Ok((dc.id.clone(), km))
    }

    /// Non-region launches in date order, for timeline analyses.
    #[pyo3(signature = (classes=None))]
    fn launch_sequence(&self, classes: Option<&str>) -> PyResult<Vec<String>> {
        Ok(self.inner.launch_sequence(&make_filter(classes, None, false)?))
    }

    fn __repr__(&self) -> String {
        format!("Catalog({} datacenters)", self.inner.len())
    }
}

#[pyfunction]
fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> PyResult<f64> {
    Ok(edge_divide::haversine_km(point(lat1, lon1)?, point(lat2, lon2)?))
}

#[pyfunction]
#[pyo3(signature = (values, q, weights=None))]
fn weighted_percentile(values: Vec<f64>, q: f64, weights: Option<Vec<f64>>) -> PyResult<f64> {
    edge_divide::weighted_percentile(&distribution(values, weights)?, q).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (values, weights=None, hi=90.0, lo=10.0))]
fn percentile_ratio(values: Vec<f64>, weights: Option<Vec<f64>>, hi: f64, lo: f64) -> PyResult<f64> {
    edge_divide::percentile_ratio(&distribution(values, weights)?, hi, lo).map_err(to_py)
}

/// Adds the satellite hop to every distance.
#[pyfunction]
fn leo_transform(values: Vec<f64>, hop_km: f64) -> PyResult<Vec<f64>> {
    let d = edge_divide::leo_transform(&distribution(values, None)?, hop_km).map_err(to_py)?;
    Ok(d.samples().iter().map(|s| s.value).collect())
}

/// Block-sum downsampling of a row-major grid (row 0 north). Nodata cells
/// count as zero.
#[pyfunction]
#[pyo3(signature = (rows, factor, nodata=None))]
fn block_sum_downsample(rows: Vec<Vec<f64>>, factor: usize, nodata: Option<f64>) -> PyResult<Vec<Vec<f64>>> {
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("grid rows differ in length"));
    }
    let geometry = GridGeometry {
        xll: 0.0,
        yll: 0.0,
        cell_size: 1.0,
        n_rows: rows.len(),
        n_cols,
    };
    let grid = PopulationGrid::new(geometry, rows.concat(), nodata).map_err(to_py)?;
    let out = grid.block_sum_downsample(factor).map_err(to_py)?;
    Ok(out.values().chunks(out.n_cols().max(1)).map(<[f64]>::to_vec).collect())
}

/// `(ci, curve)` from per-unit population, wealth and CAI.
#[pyfunction]
fn concentration(population: Vec<f64>, wealth: Vec<f64>, cai: Vec<u32>) -> PyResult<(f64, Vec<(f64, f64)>)> {
    same_len(population.len(), &[wealth.len(), cai.len()])?;
    let units = population
        .iter()
        .zip(&wealth)
        .zip(&cai)
        .enumerate()
        .map(|(i, ((&p, &w), &c))| {
            let mut u = AccessUnit::new(format!("{i:09}"), ORIGIN, p, w)?;
            u.cai = c;
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(to_py)?;
    let curve = concentration_curve(&units).map_err(to_py)?;
    let points = curve.points().iter().map(|p| (p.x, p.y)).collect();
    Ok((edge_divide::concentration_index(&curve), points))
}

/// CAI against the filtered catalog, then `(ci, curve)`.
#[pyfunction]
#[pyo3(signature = (lats, lons, population, wealth, catalog, sigma=DEFAULT_SIGMA_KM, classes=None, as_of=None))]
#[allow(clippy::too_many_arguments)]
fn access_concentration(
    lats: Vec<f64>,
    lons: Vec<f64>,
    population: Vec<f64>,
    wealth: Vec<f64>,
    catalog: &PyCatalog,
    sigma: f64,
    classes: Option<&str>,
    as_of: Option<&str>,
) -> PyResult<(f64, Vec<(f64, f64)>)> {
    same_len(lats.len(), &[lons.len(), population.len(), wealth.len()])?;
    let mut units = Vec::with_capacity(lats.len());
    for i in 0..lats.len() {
        units.push(
            AccessUnit::new(format!("{i:09}"), point(lats[i], lons[i])?, population[i], wealth[i]).map_err(to_py)?,
        );
    }
    let f = make_filter(classes, as_of, false)?;
    let res = concentration_in(&units, &catalog.inner.select(&f), sigma, f.describe()).map_err(to_py)?;
    Ok((res.ci, res.curve.points().iter().map(|p| (p.x, p.y)).collect()))
}

/// Population-weighted distance percentiles and ratios as a dict.
#[pyfunction]
#[pyo3(signature = (lats, lons, population, catalog, classes=None, as_of=None))]
fn inequality<'py>(
    py: Python<'py>,
    lats: Vec<f64>,
    lons: Vec<f64>,
    population: Vec<f64>,
    catalog: &PyCatalog,
    classes: Option<&str>,
    as_of: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    same_len(lats.len(), &[lons.len(), population.len()])?;
    let mut groups = Vec::with_capacity(lats.len());
    for i in 0..lats.len() {
        groups.push(PopulationGroup {
            id: i.to_string(),
            location: point(lats[i], lons[i])?,
            population: population[i],
            continent: String::new(),
        });
    }
    let f = make_filter(classes, as_of, false)?;
    let deployment = catalog.inner.select_nonempty(&f).map_err(to_py)?;
    let dist = distances_to(&groups, &deployment, &f.describe()).map_err(to_py)?;
    let r = InequalityReport::from_distribution(&dist, f.describe());
    let d = PyDict::new_bound(py);
    for (k, v) in [
        ("p10", r.p10),
        ("p20", r.p20),
        ("p50", r.p50),
        ("p80", r.p80),
        ("p90", r.p90),
        ("ratio_90_10", r.ratio_90_10),
        ("ratio_80_20", r.ratio_80_20),
    ] {
        d.set_item(k, v)?;
    }
    d.set_item("catalog_filter", r.catalog_filter)?;
    Ok(d)
}

/// Distance from each point to its nearest admitted datacenter, in km.
#[pyfunction]
#[pyo3(signature = (lats, lons, catalog, classes=None))]
fn nearest_distances(lats: Vec<f64>, lons: Vec<f64>, catalog: &PyCatalog, classes: Option<&str>) -> PyResult<Vec<f64>> {
    same_len(lats.len(), &[lons.len()])?;
    let deployment = catalog
        .inner
        .select_nonempty(&make_filter(classes, None, false)?)
        .map_err(to_py)?;
    lats.iter()
        .zip(&lons)
        .map(|(&a, &b)| {
            Ok(nearest_in(point(a, b)?, &deployment)
                .expect("deployment is non-empty")
                .1)
        })
        .collect()
}

/// Names on the (coverage up, CI down) Pareto front, best coverage first.
#[pyfunction]
fn pareto_front(names: Vec<String>, coverage: Vec<f64>, ci: Vec<f64>) -> PyResult<Vec<String>> {
    same_len(names.len(), &[coverage.len(), ci.len()])?;
    let cities: Vec<CandidateCity> = names
        .into_iter()
        .zip(coverage.into_iter().zip(ci))
        .map(|(name, (cov, c))| {
            let mut city = CandidateCity::new(name, ORIGIN, 0.0);
            city.coverage = cov;
            city.ci_if_selected = Some(c);
            city.evaluable = true;
            city
        })
        .collect();
    Ok(edge_divide::pareto_front(&cities)
        .front()
        .map(|c| c.name.clone())
        .collect())
}

/// Per-group p50/p80 speedups from probe minimum RTTs (ms).
#[pyfunction]
fn speedup_stats<'py>(
    py: Python<'py>,
    baseline: BTreeMap<String, f64>,
    edge: BTreeMap<String, f64>,
    groups: BTreeMap<String, String>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let table = cdf_speedup_stats(&baseline, &edge, &groups);
    table
        .rows
        .into_iter()
        .map(|r| {
            let d = PyDict::new_bound(py);
            d.set_item("group", r.group)?;
            d.set_item("n_base", r.n_base)?;
            d.set_item("n_edge", r.n_edge)?;
            d.set_item("p50_base", r.p50_base)?;
            d.set_item("p50_edge", r.p50_edge)?;
            d.set_item("p80_base", r.p80_base)?;
            d.set_item("p80_edge", r.p80_edge)?;
            d.set_item("speedup_p50", r.speedup_p50)?;
            d.set_item("speedup_p80", r.speedup_p80)?;
            d.set_item("frac_under_20ms", r.frac_under_20ms)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "edge_divide")]
fn edge_divide_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_SIGMA_KM", DEFAULT_SIGMA_KM)?;
    m.add_class::<PyCatalog>()?;
    m.add_function(wrap_pyfunction!(haversine_km, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_percentile, m)?)?;
    m.add_function(wrap_pyfunction!(percentile_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(leo_transform, m)?)?;
    m.add_function(wrap_pyfunction!(block_sum_downsample, m)?)?;
    m.add_function(wrap_pyfunction!(concentration, m)?)?;
    m.add_function(wrap_pyfunction!(access_concentration, m)?)?;
    m.add_function(wrap_pyfunction!(inequality, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_distances, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_front, m)?)?;
    m.add_function(wrap_pyfunction!(speedup_stats, m)?)?;
    Ok(())
}

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use edge_divide::catalog::{parse_classes, CatalogFilter, DcClass};
use edge_divide::geo::{GridFormat, GridGeometry};
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Ascii,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSource {
    pub path: PathBuf,
    #[serde(default = "ascii")]
    pub format: GridKind,
    /// Required for CSV grids.
    #[serde(default)]
    pub geometry: Option<GridGeometry>,
}

fn ascii() -> GridKind {
    GridKind::Ascii
}

impl GridSource {
    pub fn format(&self) -> Result<GridFormat, ConfigError> {
        match (self.format, self.geometry) {
            (GridKind::Ascii, _) => Ok(GridFormat::AsciiGrid),
            (GridKind::Csv, Some(g)) => Ok(GridFormat::Csv(g)),
            (GridKind::Csv, None) => Err(ConfigError(format!(
                "CSV grid {} needs a geometry",
                self.path.display()
            ))),
        }
    }
}

/// Where population groups and access units come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSource {
    Tracts,
    Admin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub population_grid: Option<GridSource>,
    #[serde(default)]
    pub ntl_grid: Option<GridSource>,
    #[serde(default)]
    pub downsample_factor: Option<usize>,
    #[serde(default)]
    pub boundaries: Option<PathBuf>,
    #[serde(default)]
    pub tracts: Option<PathBuf>,
    #[serde(default)]
    pub units: Option<UnitSource>,
    #[serde(default)]
    pub catalog: Option<PathBuf>,
    #[serde(default)]
    pub cities: Option<PathBuf>,
    #[serde(default)]
    pub measurements: Vec<PathBuf>,
    #[serde(default)]
    pub probe_meta: Option<PathBuf>,
    #[serde(default)]
    pub asn_table: Option<PathBuf>,
    #[serde(default)]
    pub wan_asns: Option<Vec<u32>>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_classes")]
    pub classes: String,
    #[serde(default)]
    pub as_of: Option<NaiveDate>,
    #[serde(default)]
    pub include_announced: bool,
    /// Explicit launch order; derived from the catalog when absent.
    #[serde(default)]
    pub launches: Option<Vec<String>>,
    #[serde(default)]
    pub scenario: Option<PathBuf>,
    #[serde(default)]
    pub hop_km: Option<f64>,
    /// Score pareto candidates together with the region deployment.
    #[serde(default)]
    pub include_baseline: bool,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub emit_svg: bool,
}

fn default_sigma() -> f64 {
    edge_divide::DEFAULT_SIGMA_KM
}

fn default_classes() -> String {
    "region,local_zone".to_string()
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sigma: Option<f64>,
    pub as_of: Option<NaiveDate>,
    pub classes: Option<String>,
    pub hop_km: Option<f64>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl RunConfig {
    /// Reads a config file; relative dataset paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for g in [&mut self.population_grid, &mut self.ntl_grid].into_iter().flatten() {
            fix(&mut g.path);
        }
        for p in [
            &mut self.boundaries,
            &mut self.tracts,
            &mut self.catalog,
            &mut self.cities,
            &mut self.probe_meta,
            &mut self.asn_table,
            &mut self.scenario,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.measurements.iter_mut().for_each(fix);
    }

    /// Flags win over file values; `--out` stays relative to the working directory.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.sigma {
            self.sigma = s;
        }
        if let Some(d) = o.as_of {
            self.as_of = Some(d);
        }
        if let Some(c) = &o.classes {
            self.classes = c.clone();
        }
        if let Some(h) = o.hop_km {
            self.hop_km = Some(h);
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self.emit_svg |= o.svg;
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(ConfigError(format!("sigma must be > 0 km, got {}", self.sigma)));
        }
        if let Some(h) = self.hop_km {
            if !(h.is_finite() && h >= 0.0) {
                return Err(ConfigError(format!("hop_km must be >= 0, got {h}")));
            }
        }
        if self.downsample_factor == Some(0) {
            return Err(ConfigError("downsample_factor must be >= 1".into()));
        }
        self.class_set()?;
        let grids = [&self.population_grid, &self.ntl_grid].into_iter().flatten();
        for g in grids.clone() {
            g.format()?;
        }
        let paths = grids
            .map(|g| &g.path)
            .chain(
                [
                    &self.boundaries,
                    &self.tracts,
                    &self.catalog,
                    &self.cities,
                    &self.probe_meta,
                    &self.asn_table,
                    &self.scenario,
                ]
                .into_iter()
                .flatten(),
            )
            .chain(&self.measurements);
        for p in paths {
            if !p.exists() {
                return Err(ConfigError(format!("path does not exist: {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn class_set(&self) -> Result<std::collections::BTreeSet<DcClass>, ConfigError> {
        parse_classes(&self.classes).map_err(|e| ConfigError(format!("--classes: {e}")))
    }

    pub fn filter(&self) -> Result<CatalogFilter, ConfigError> {
        let mut f = CatalogFilter::new(self.class_set()?).with_announced(self.include_announced);
        if let Some(d) = self.as_of {
            f = f.as_of(d);
        }
        Ok(f)
    }

    /// Regions under the same date rules, the starting point of every timeline.
    pub fn base_filter(&self) -> CatalogFilter {
        let mut f = CatalogFilter::regions().with_announced(self.include_announced);
        if let Some(d) = self.as_of {
            f = f.as_of(d);
        }
        f
    }

    pub fn unit_source(&self) -> Result<UnitSource, ConfigError> {
        match self.units {
            Some(s) => Ok(s),
            None if self.tracts.is_some() => Ok(UnitSource::Tracts),
            None if self.boundaries.is_some() && self.population_grid.is_some() => Ok(UnitSource::Admin),
            None => Err(ConfigError(
                "no population groups configured: set `tracts`, or `boundaries` with `population_grid`".into(),
            )),
        }
    }

    pub fn require<'a>(&self, field: &'a Option<PathBuf>, name: &str) -> Result<&'a PathBuf, ConfigError> {
        field
            .as_ref()
            .ok_or_else(|| ConfigError(format!("`{name}` is required for this command")))
    }
}

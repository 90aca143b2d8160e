//! Datacenter catalog: dated, classed supply points and the filters used to
//! select a deployment from them.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_km, GeoPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DcClass {
    Region,
    LocalZone,
    EdgePop,
}

impl DcClass {
    pub const ALL: [DcClass; 3] = [DcClass::Region, DcClass::LocalZone, DcClass::EdgePop];

    pub fn as_str(self) -> &'static str {
        match self {
            DcClass::Region => "region",
            DcClass::LocalZone => "local_zone",
            DcClass::EdgePop => "edge_pop",
        }
    }
}

impl fmt::Display for DcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DcClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "region" => Ok(DcClass::Region),
            "local_zone" => Ok(DcClass::LocalZone),
            "edge_pop" => Ok(DcClass::EdgePop),
            other => Err(Error::Argument(format!("unknown datacenter class `{other}`"))),
        }
    }
}

/// Parses a comma-separated class list such as `region,local_zone`.
pub fn parse_classes(s: &str) -> Result<BTreeSet<DcClass>> {
    let set = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<BTreeSet<_>>>()?;
    if set.is_empty() {
        return Err(Error::Argument("empty class list".into()));
    }
    Ok(set)
}

/// A launch date, or "announced" for sites that are not live yet.
/// Dated launches order before announced ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LaunchDate {
    On(NaiveDate),
    Announced,
}

impl fmt::Display for LaunchDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaunchDate::On(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            LaunchDate::Announced => f.write_str("announced"),
        }
    }
}

impl FromStr for LaunchDate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("announced") {
            return Ok(LaunchDate::Announced);
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(LaunchDate::On)
            .map_err(|_| Error::Argument(format!("invalid launch date `{s}`")))
    }
}

impl Serialize for LaunchDate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LaunchDate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Datacenter {
    pub id: String,
    pub name: String,
    pub city: String,
    pub country: String,
    pub continent: String,
    pub location: GeoPoint,
    pub class: DcClass,
    pub launch_date: LaunchDate,
}

/// Which catalog entries take part in a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogFilter {
    pub classes: BTreeSet<DcClass>,
    /// Only entries launched on or before this date; excludes announced sites.
    pub as_of: Option<NaiveDate>,
    /// Include announced sites (only meaningful without `as_of`).
    pub include_announced: bool,
}

impl CatalogFilter {
    pub fn new(classes: impl IntoIterator<Item = DcClass>) -> Self {
        CatalogFilter {
            classes: classes.into_iter().collect(),
            as_of: None,
            include_announced: false,
        }
    }

    pub fn regions() -> Self {
        Self::new([DcClass::Region])
    }

    pub fn all_classes() -> Self {
        Self::new(DcClass::ALL)
    }

    pub fn as_of(mut self, date: NaiveDate) -> Self {
        self.as_of = Some(date);
        self
    }

    pub fn with_announced(mut self, yes: bool) -> Self {
        self.include_announced = yes;
        self
    }

    pub fn admits(&self, dc: &Datacenter) -> bool {
        if !self.classes.contains(&dc.class) {
            return false;
        }
        match (dc.launch_date, self.as_of) {
            (LaunchDate::On(d), Some(cutoff)) => d <= cutoff,
            (LaunchDate::On(_), None) => true,
            (LaunchDate::Announced, Some(_)) => false,
            (LaunchDate::Announced, None) => self.include_announced,
        }
    }

    pub fn describe(&self) -> String {
        let classes: Vec<_> = self.classes.iter().map(|c| c.as_str()).collect();
        let mut s = format!("classes={}", classes.join("+"));
        if let Some(d) = self.as_of {
            s.push_str(&format!(";as_of={}", d.format("%Y-%m-%d")));
        }
        if self.include_announced && self.as_of.is_none() {
            s.push_str(";announced");
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatacenterCatalog {
    entries: Vec<Datacenter>,
}

impl DatacenterCatalog {
    pub fn new(entries: Vec<Datacenter>) -> Result<Self> {
        let mut seen = HashSet::new();
        for dc in &entries {
            if !seen.insert(dc.id.as_str()) {
                return Err(Error::Argument(format!("duplicate datacenter id `{}`", dc.id)));
            }
        }
        Ok(DatacenterCatalog { entries })
    }

    pub fn entries(&self) -> &[Datacenter] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Datacenter> {
        self.entries.iter().find(|d| d.id == id)
    }

    /// Entries admitted by `filter`, possibly none.
    pub fn select(&self, filter: &CatalogFilter) -> Vec<&Datacenter> {
        self.entries.iter().filter(|d| filter.admits(d)).collect()
    }

    /// Like [`select`](Self::select) but an empty result is an error.
    pub fn select_nonempty(&self, filter: &CatalogFilter) -> Result<Vec<&Datacenter>> {
        let sel = self.select(filter);
        if sel.is_empty() {
            return Err(Error::EmptyCatalog(filter.describe()));
        }
        Ok(sel)
    }

    /// Non-region entries admitted by `filter`, ordered by launch date
    /// (announced last) then id.
    pub fn launch_sequence(&self, filter: &CatalogFilter) -> Vec<String> {
        let mut seq: Vec<&Datacenter> = self
            .select(filter)
            .into_iter()
            .filter(|d| d.class != DcClass::Region)
            .collect();
        seq.sort_by(|a, b| a.launch_date.cmp(&b.launch_date).then_with(|| a.id.cmp(&b.id)));
        seq.into_iter().map(|d| d.id.clone()).collect()
    }
}

#[derive(Deserialize)]
struct CatalogRow {
    id: String,
    name: String,
    city: String,
    country: String,
    continent: String,
    lat: f64,
    lon: f64,
    class: String,
    launch_date: String,
}

/// Reads `id,name,city,country,continent,lat,lon,class,launch_date`.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<DatacenterCatalog> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&file, "open", e.to_string()))?;
    let mut entries = Vec::new();
    for (i, row) in rdr.deserialize::<CatalogRow>().enumerate() {
        let loc = format!("row {}", i + 2);
        let row = row.map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
        let wrap = |e: Error| Error::parse(&file, &loc, e.to_string());
        entries.push(Datacenter {
            location: GeoPoint::new(row.lat, row.lon).map_err(wrap)?,
            class: row.class.parse().map_err(wrap)?,
            launch_date: row.launch_date.parse().map_err(wrap)?,
            id: row.id,
            name: row.name,
            city: row.city,
            country: row.country,
            continent: row.continent,
        });
    }
    DatacenterCatalog::new(entries).map_err(|e| Error::parse(&file, "catalog", e.to_string()))
}

/// Nearest entry of `deployment` to `p`; equidistant entries resolve to the
/// smallest id.
pub fn nearest_in<'a>(p: GeoPoint, deployment: &[&'a Datacenter]) -> Option<(&'a Datacenter, f64)> {
    let mut best: Option<(&Datacenter, f64)> = None;
    for &dc in deployment {
        let d = haversine_km(p, dc.location);
        best = match best {
            Some((b, bd)) if bd < d || (bd == d && b.id <= dc.id) => Some((b, bd)),
            _ => Some((dc, d)),
        };
    }
    best
}

pub fn nearest_datacenter<'a>(
    p: GeoPoint,
    catalog: &'a DatacenterCatalog,
    filter: &CatalogFilter,
) -> Result<(&'a Datacenter, f64)> {
    let deployment = catalog.select_nonempty(filter)?;
    Ok(nearest_in(p, &deployment).expect("deployment is non-empty"))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn catalog() -> DatacenterCatalog {
        DatacenterCatalog::new(vec![
            dc("sf", SF.0, SF.1, DcClass::Region, "2010-01-01"),
            dc("nyc", NYC.0, NYC.1, DcClass::Region, "2011-01-01"),
            dc("la", LA.0, LA.1, DcClass::LocalZone, "2019-12-03"),
            dc("aus", AUSTIN.0, AUSTIN.1, DcClass::LocalZone, "announced"),
        ])
        .unwrap()
    }

    #[test]
    fn single_entry_is_nearest() {
        let cat = DatacenterCatalog::new(vec![dc("x", 10.0, 10.0, DcClass::Region, "2020-01-01")]).unwrap();
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        let (d, km) = nearest_datacenter(p, &cat, &CatalogFilter::regions()).unwrap();
        assert_eq!(d.id, "x");
        assert_eq!(km, haversine_km(p, d.location));
    }

    #[test]
    fn los_angeles_is_closest_to_san_francisco() {
        let cat = catalog();
        let p = GeoPoint::new(LA.0, LA.1).unwrap();
        // brute-force scan
        let oracle = cat
            .select(&CatalogFilter::regions())
            .into_iter()
            .min_by(|a, b| haversine_km(p, a.location).total_cmp(&haversine_km(p, b.location)))
            .unwrap();
        let (d, _) = nearest_datacenter(p, &cat, &CatalogFilter::regions()).unwrap();
        assert_eq!(d.id, "sf");
        assert_eq!(d.id, oracle.id);
    }

    #[test]
    fn early_cutoff_leaves_nothing() {
        let cat = catalog();
        let f = CatalogFilter::all_classes().as_of(NaiveDate::from_ymd_opt(2000, 1, 1).unwrap());
        let err = nearest_datacenter(GeoPoint::new(0.0, 0.0).unwrap(), &cat, &f).unwrap_err();
        assert!(matches!(err, Error::EmptyCatalog(ref s) if s.contains("as_of=2000-01-01")));
    }

    #[test]
    fn announced_only_on_request() {
        let cat = catalog();
        let all = CatalogFilter::all_classes();
        assert_eq!(cat.select(&all).len(), 3);
        assert_eq!(cat.select(&all.clone().with_announced(true)).len(), 4);
        let dated = all
            .with_announced(true)
            .as_of(NaiveDate::from_ymd_opt(2030, 1, 1).unwrap());
        assert_eq!(cat.select(&dated).len(), 3);
    }

    #[test]
    fn ties_break_by_id() {
        let a = dc("b", 0.0, 1.0, DcClass::Region, "2020-01-01");
        let b = dc("a", 0.0, -1.0, DcClass::Region, "2020-01-01");
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        assert_eq!(nearest_in(p, &[&a, &b]).unwrap().0.id, "a");
        assert_eq!(nearest_in(p, &[&b, &a]).unwrap().0.id, "a");
    }

    #[test]
    fn launch_sequence_orders_dates_then_announced() {
        let cat = catalog();
        let seq = cat.launch_sequence(&CatalogFilter::all_classes().with_announced(true));
        assert_eq!(seq, vec!["la", "aus"]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let e = DatacenterCatalog::new(vec![
            dc("x", 0.0, 0.0, DcClass::Region, "2020-01-01"),
            dc("x", 1.0, 0.0, DcClass::Region, "2020-01-01"),
        ]);
        assert!(e.is_err());
    }

    #[test]
    fn class_list_parsing() {
        let s = parse_classes("region,local_zone").unwrap();
        assert!(s.contains(&DcClass::LocalZone) && !s.contains(&DcClass::EdgePop));
        assert!(parse_classes("region,moon").is_err());
    }
}

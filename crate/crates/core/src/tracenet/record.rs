use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::net::IpAddr;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// Probes carrying this tag sit inside datacenters and are dropped.
pub const DATACENTER_TAG: &str = "datacenter";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    Baseline,
    Edge,
    Region,
    GroundTruth,
}

impl TargetClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetClass::Baseline => "baseline",
            TargetClass::Edge => "edge",
            TargetClass::Region => "region",
            TargetClass::GroundTruth => "ground_truth",
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(TargetClass::Baseline),
            "edge" => Ok(TargetClass::Edge),
            "region" => Ok(TargetClass::Region),
            "ground_truth" => Ok(TargetClass::GroundTruth),
            _ => Err(Error::Argument(format!("unknown target class `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub hop_index: u32,
    /// `None` for non-responding hops.
    #[serde(default)]
    pub address: Option<String>,
    #[serde(default)]
    pub rtts_ms: Vec<f64>,
}

impl Hop {
    pub fn min_rtt(&self) -> Option<f64> {
        self.rtts_ms.iter().copied().reduce(f64::min)
    }

    pub fn ip(&self) -> Option<IpAddr> {
        self.address.as_deref().and_then(|a| a.parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracerouteRecord {
    pub probe_id: String,
    pub target_id: String,
    pub target_class: TargetClass,
    pub timestamp: String,
    pub hops: Vec<Hop>,
}

impl TracerouteRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if let Some(w) = self.hops.windows(2).find(|w| w[1].hop_index <= w[0].hop_index) {
            return Err(format!(
                "hop_index not strictly increasing ({} then {})",
                w[0].hop_index, w[1].hop_index
            ));
        }
        if self.hops.first().is_some_and(|h| h.hop_index < 1) {
            return Err("hop_index must start at 1 or above".into());
        }
        for h in &self.hops {
            if h.rtts_ms.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                return Err(format!("hop {} has an invalid rtt", h.hop_index));
            }
        }
        Ok(())
    }

    /// A record terminates iff its last hop carries at least one rtt.
    pub fn terminates(&self) -> bool {
        self.hops.last().is_some_and(|h| !h.rtts_ms.is_empty())
    }

    pub fn endpoint_min_rtt(&self) -> Option<f64> {
        self.hops.last().and_then(Hop::min_rtt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeMeta {
    pub probe_id: String,
    pub location: GeoPoint,
    pub continent: String,
    pub tags: BTreeSet<String>,
    pub asn: u32,
}

#[derive(Deserialize)]
struct ProbeRow {
    probe_id: String,
    lat: f64,
    lon: f64,
    continent: String,
    asn: u32,
    #[serde(default)]
    tags: String,
}

/// Reads `probe_id,lat,lon,continent,asn,tags` with pipe-separated tags.
pub fn load_probe_meta(path: impl AsRef<Path>) -> Result<Vec<ProbeMeta>> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&file, "open", e.to_string()))?;
    let mut out: Vec<ProbeMeta> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in rdr.deserialize::<ProbeRow>().enumerate() {
        let loc = format!("row {}", i + 2);
        let row = row.map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
        if !seen.insert(row.probe_id.clone()) {
            return Err(Error::parse(
                &file,
                &loc,
                format!("duplicate probe_id `{}`", row.probe_id),
            ));
        }
        out.push(ProbeMeta {
            location: GeoPoint::new(row.lat, row.lon).map_err(|e| Error::parse(&file, &loc, e.to_string()))?,
            tags: row
                .tags
                .split('|')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect(),
            probe_id: row.probe_id,
            continent: row.continent,
            asn: row.asn,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadCounts {
    pub lines_read: usize,
    pub records_kept: usize,
    pub records_excluded: usize,
    pub probes_kept: usize,
    pub probes_excluded: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Measurements {
    pub records: Vec<TracerouteRecord>,
    /// Kept probes keyed by id.
    pub probes: BTreeMap<String, ProbeMeta>,
    pub counts: LoadCounts,
}

impl Measurements {
    pub fn continent_of(&self) -> BTreeMap<String, String> {
        self.probes
            .iter()
            .map(|(id, m)| (id.clone(), m.continent.clone()))
            .collect()
    }
}

/// Parses JSON-lines records from `reader`; `file` is used for error context.
pub fn parse_records(reader: impl BufRead, file: &str) -> Result<Vec<(usize, TracerouteRecord)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let loc = format!("line {lineno}");
        let line = line.map_err(|e| Error::parse(file, &loc, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TracerouteRecord = serde_json::from_str(&line).map_err(|e| Error::parse(file, &loc, e.to_string()))?;
        rec.validate().map_err(|m| Error::parse(file, &loc, m))?;
        out.push((lineno, rec));
    }
    Ok(out)
}

/// Loads JSON-lines measurement files and probe metadata; probes tagged
/// [`DATACENTER_TAG`] and their records are excluded and counted.
pub fn load_measurements<P: AsRef<Path>>(paths: &[P], meta_path: impl AsRef<Path>) -> Result<Measurements> {
    let metas = load_probe_meta(meta_path)?;
    let mut counts = LoadCounts::default();
    let mut probes = BTreeMap::new();
    let mut excluded = BTreeSet::new();
    for m in metas {
        if m.tags.contains(DATACENTER_TAG) {
            excluded.insert(m.probe_id.clone());
        } else {
            probes.insert(m.probe_id.clone(), m);
        }
    }
    counts.probes_kept = probes.len();
    counts.probes_excluded = excluded.len();

    let mut records = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let file = path.display().to_string();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        for (lineno, rec) in parse_records(std::io::BufReader::new(f), &file)? {
            counts.lines_read += 1;
            if excluded.contains(&rec.probe_id) {
                counts.records_excluded += 1;
                continue;
            }
            if !probes.contains_key(&rec.probe_id) {
                return Err(Error::UnknownProbe {
                    probe_id: rec.probe_id,
                    line: lineno,
                });
            }
            records.push(rec);
        }
    }
    counts.records_kept = records.len();
    Ok(Measurements {
        records,
        probes,
        counts,
    })
}

//! Offline analysis of recorded traceroute campaigns.

mod asn;
mod record;
mod stats;

pub use asn::{is_non_routable, load_asn_table, AsnTable};
pub use record::{
    load_measurements, load_probe_meta, parse_records, Hop, LoadCounts, Measurements, ProbeMeta, TargetClass,
    TracerouteRecord, DATACENTER_TAG,
};
pub use stats::{
    cdf_breakpoints, cdf_speedup_stats, speedup_percent, CdfPoint, SpeedupRow, SpeedupTable, FAST_THRESHOLD_MS,
};

use std::collections::{BTreeMap, BTreeSet};
use std::net::{IpAddr, Ipv4Addr};
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// Address of the carrier-grade NAT hop at the exit of the satellite link.
pub const CGNAT_HOP: IpAddr = IpAddr::V4(Ipv4Addr::new(100, 64, 0, 1));

/// Amazon's ASNs, used when no WAN ASN set is configured.
pub const DEFAULT_WAN_ASNS: [u32; 2] = [16509, 14618];

pub fn default_wan_asns() -> BTreeSet<u32> {
    DEFAULT_WAN_ASNS.into_iter().collect()
}

/// Round-trip time held as integer nanoseconds so that differences and sums
/// of RTTs are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rtt(i64);

impl Rtt {
    pub fn from_ms(ms: f64) -> Rtt {
        Rtt((ms * 1e6).round() as i64)
    }

    pub fn from_nanos(ns: i64) -> Rtt {
        Rtt(ns)
    }

    pub fn nanos(self) -> i64 {
        self.0
    }

    pub fn as_ms(self) -> f64 {
        self.0 as f64 / 1e6
    }
}

impl Sub for Rtt {
    type Output = Rtt;
    fn sub(self, rhs: Rtt) -> Rtt {
        Rtt(self.0 - rhs.0)
    }
}

impl Add for Rtt {
    type Output = Rtt;
    fn add(self, rhs: Rtt) -> Rtt {
        Rtt(self.0 + rhs.0)
    }
}

impl Hop {
    pub fn min_rtt_exact(&self) -> Option<Rtt> {
        self.rtts_ms.iter().map(|&r| Rtt::from_ms(r)).min()
    }
}

impl TracerouteRecord {
    pub fn endpoint_rtt(&self) -> Option<Rtt> {
        self.hops.last().and_then(Hop::min_rtt_exact)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MinRttSummary {
    /// Minimum endpoint RTT (ms) per probe over all records of the class.
    pub per_probe: BTreeMap<String, f64>,
    /// Records of the class whose final hop carried no RTT.
    pub skipped_records: usize,
    /// Probes with records of the class but none that terminated.
    pub omitted_probes: usize,
}

/// Per-probe minimum of final-hop RTTs over all targets of `class`.
pub fn probe_min_rtt(records: &[TracerouteRecord], class: TargetClass) -> MinRttSummary {
    let mut best: BTreeMap<&str, Rtt> = BTreeMap::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut skipped = 0;
    for r in records.iter().filter(|r| r.target_class == class) {
        seen.insert(&r.probe_id);
        match r.endpoint_rtt() {
            Some(rtt) => {
                best.entry(&r.probe_id)
                    .and_modify(|b| *b = (*b).min(rtt))
                    .or_insert(rtt);
            }
            None => skipped += 1,
        }
    }
    MinRttSummary {
        omitted_probes: seen.len() - best.len(),
        skipped_records: skipped,
        per_probe: best.into_iter().map(|(k, v)| (k.to_string(), v.as_ms())).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WanHop {
    pub hop_index: u32,
    pub min_rtt: Rtt,
}

/// First hop (ascending index) whose address maps to an ASN in `wan_asns`,
/// skipping non-routable addresses and hops without an RTT.
pub fn first_wan_hop(record: &TracerouteRecord, table: &AsnTable, wan_asns: &BTreeSet<u32>) -> Option<WanHop> {
    record.hops.iter().find_map(|h| {
        let ip = h.ip().filter(|ip| !is_non_routable(*ip))?;
        let asn = table.lookup(ip)?;
        if !wan_asns.contains(&asn) {
            return None;
        }
        Some(WanHop {
            hop_index: h.hop_index,
            min_rtt: h.min_rtt_exact()?,
        })
    })
}

/// Endpoint minimum RTT minus the first WAN hop's minimum RTT. Reported raw,
/// so it is negative when the endpoint answered faster than the WAN hop.
pub fn wan_residence(record: &TracerouteRecord, table: &AsnTable, wan_asns: &BTreeSet<u32>) -> Option<Rtt> {
    let end = record.endpoint_rtt()?;
    let wan = first_wan_hop(record, table, wan_asns)?;
    Some(end - wan.min_rtt)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WanResidenceSummary {
    /// Smallest per-record residence (ms) for each probe.
    pub per_probe: BTreeMap<String, f64>,
    /// First WAN hop index of the record that gave the probe's residence.
    pub first_wan_hop_index: BTreeMap<String, u32>,
    pub records_with_wan_hop: usize,
    pub records_without_wan_hop: usize,
    pub negative_records: usize,
}

pub fn probe_wan_residence(
    records: &[TracerouteRecord],
    table: &AsnTable,
    wan_asns: &BTreeSet<u32>,
    class: Option<TargetClass>,
) -> WanResidenceSummary {
    let mut out = WanResidenceSummary::default();
    let mut best: BTreeMap<&str, (Rtt, u32)> = BTreeMap::new();
    for r in records.iter().filter(|r| class.is_none_or(|c| r.target_class == c)) {
        let (Some(end), Some(wan)) = (r.endpoint_rtt(), first_wan_hop(r, table, wan_asns)) else {
            out.records_without_wan_hop += 1;
            continue;
        };
        let res = end - wan.min_rtt;
        out.records_with_wan_hop += 1;
        if res.nanos() < 0 {
            out.negative_records += 1;
        }
        best.entry(&r.probe_id)
            .and_modify(|b| {
                if res < b.0 {
                    *b = (res, wan.hop_index);
                }
            })
            .or_insert((res, wan.hop_index));
    }
    for (k, (res, idx)) in best {
        out.per_probe.insert(k.to_string(), res.as_ms());
        out.first_wan_hop_index.insert(k.to_string(), idx);
    }
    out
}

/// Minimum RTT at the first hop whose address is exactly [`CGNAT_HOP`].
pub fn satellite_hop_rtt(record: &TracerouteRecord) -> Option<Rtt> {
    record
        .hops
        .iter()
        .find(|h| h.ip() == Some(CGNAT_HOP))
        .and_then(Hop::min_rtt_exact)
}

/// Per-probe minimum satellite-hop RTT (ms).
pub fn probe_satellite_rtt(records: &[TracerouteRecord]) -> BTreeMap<String, f64> {
    let mut best: BTreeMap<&str, Rtt> = BTreeMap::new();
    for r in records {
        if let Some(rtt) = satellite_hop_rtt(r) {
            best.entry(&r.probe_id)
                .and_modify(|b| *b = (*b).min(rtt))
                .or_insert(rtt);
        }
    }
    best.into_iter().map(|(k, v)| (k.to_string(), v.as_ms())).collect()
}

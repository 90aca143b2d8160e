use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::divide::{SortedDistribution, WeightedDistribution};

/// Response-time threshold for latency-critical applications.
pub const FAST_THRESHOLD_MS: f64 = 20.0;

/// Group label for probes missing from the grouping map.
const UNGROUPED: &str = "unassigned";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub group: String,
    pub n_base: usize,
    pub n_edge: usize,
    pub p50_base: f64,
    pub p50_edge: f64,
    pub p80_base: f64,
    pub p80_edge: f64,
    pub speedup_p50: f64,
    pub speedup_p80: f64,
    /// Share of edge probe minima strictly below [`FAST_THRESHOLD_MS`].
    pub frac_under_20ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeedupTable {
    pub rows: Vec<SpeedupRow>,
    pub warnings: Vec<String>,
}

/// `(base - edge) / base * 100`.
pub fn speedup_percent(base: f64, edge: f64) -> f64 {
    (base - edge) / base * 100.0
}

fn unweighted(values: &[f64]) -> SortedDistribution {
    WeightedDistribution::from_pairs(values.iter().map(|&v| (v, 1.0)))
        .expect("non-empty, non-negative probe minima")
        .sorted()
}

fn grouped(map: &BTreeMap<String, f64>, group_of: &BTreeMap<String, String>) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (probe, &ms) in map {
        let g = group_of.get(probe).map(String::as_str).unwrap_or(UNGROUPED);
        out.entry(g.to_string()).or_default().push(ms);
    }
    out
}

/// Per-group p50/p80 of baseline and edge probe minima (unweighted lower-step
/// percentiles over each map's own probes) with percentage speedups.
/// Groups missing on either side are omitted with a warning.
pub fn cdf_speedup_stats(
    baseline: &BTreeMap<String, f64>,
    edge: &BTreeMap<String, f64>,
    group_of: &BTreeMap<String, String>,
) -> SpeedupTable {
    let base_groups = grouped(baseline, group_of);
    let edge_groups = grouped(edge, group_of);
    let mut table = SpeedupTable::default();
    let names: std::collections::BTreeSet<&String> = base_groups.keys().chain(edge_groups.keys()).collect();
    for name in names {
        let (Some(b), Some(e)) = (base_groups.get(name), edge_groups.get(name)) else {
            table
                .warnings
                .push(format!("group `{name}` has no baseline or no edge probes; omitted"));
            continue;
        };
        let (bs, es) = (unweighted(b), unweighted(e));
        let pct = |s: &SortedDistribution, q| s.percentile(q).expect("fixed percentile");
        let (p50_base, p50_edge, p80_base, p80_edge) = (pct(&bs, 50.0), pct(&es, 50.0), pct(&bs, 80.0), pct(&es, 80.0));
        table.rows.push(SpeedupRow {
            group: name.clone(),
            n_base: b.len(),
            n_edge: e.len(),
            p50_base,
            p50_edge,
            p80_base,
            p80_edge,
            speedup_p50: speedup_percent(p50_base, p50_edge),
            speedup_p80: speedup_percent(p80_base, p80_edge),
            frac_under_20ms: e.iter().filter(|&&v| v < FAST_THRESHOLD_MS).count() as f64 / e.len() as f64,
        });
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub group: String,
    pub series: String,
    pub rtt_ms: f64,
    pub fraction: f64,
}

/// Empirical CDF breakpoints per group for one named series.
pub fn cdf_breakpoints(
    series: &str,
    map: &BTreeMap<String, f64>,
    group_of: &BTreeMap<String, String>,
) -> Vec<CdfPoint> {
    grouped(map, group_of)
        .into_iter()
        .flat_map(|(g, vals)| {
            unweighted(&vals).cdf_points().into_iter().map(move |(v, f)| CdfPoint {
                group: g.clone(),
                series: series.to_string(),
                rtt_ms: v,
                fraction: f,
            })
        })
        .collect()
}

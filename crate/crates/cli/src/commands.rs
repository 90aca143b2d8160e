use std::collections::BTreeMap;

use anyhow::Result;
use edge_divide::catalog::{load_catalog, CatalogFilter, DatacenterCatalog, DcClass};
use edge_divide::divide::{distance_distribution, inequality_report, inequality_timeline_from, PopulationGroup};
use edge_divide::fairness::{concentration, concentration_in, AccessUnit, ConcentrationResult};
use edge_divide::geo::{
    assign_wealth, load_admin_units, load_grid, load_tracts, populate_units, AdminUnit, GridSummary, PopulationGrid,
    UnitFillSummary,
};
use edge_divide::leo::{leo_inequality_report, LeoScenario};
use edge_divide::placement::{evaluate_all, filter_candidates, load_cities, pareto_front};
use edge_divide::timeline::{deployment_steps, LaunchEvent};
use edge_divide::tracenet::{
    cdf_breakpoints, cdf_speedup_stats, default_wan_asns, load_asn_table, load_measurements, probe_min_rtt,
    probe_satellite_rtt, probe_wan_residence, TargetClass,
};
use edge_divide::InequalityReport;
use serde::Serialize;
use serde_json::json;

use crate::config::{GridSource, RunConfig, UnitSource};
use crate::output::{num, opt_num, OutDir};
use crate::svg::{Chart, Series, Style};
use crate::ConfigError;

/// Continent label for groups that carry none (census tracts).
const ALL_CONTINENTS: &str = "all";

struct Loaded {
    source: UnitSource,
    groups: Vec<PopulationGroup>,
    /// Empty for admin units without a lights grid.
    access: Vec<AccessUnit>,
    grid: Option<GridSummary>,
    ntl: Option<GridSummary>,
    fill: Option<UnitFillSummary>,
    units: Vec<AdminUnit>,
}

fn load_pop_grid(src: &GridSource, factor: Option<usize>) -> Result<(PopulationGrid, GridSummary)> {
    let (grid, summary) = load_grid(&src.path, &src.format()?)?;
    match factor {
        Some(f) if f > 1 => {
            let down = grid.block_sum_downsample(f)?;
            let s = down.summary();
            Ok((down, s))
        }
        _ => Ok((grid, summary)),
    }
}

fn load_groups(cfg: &RunConfig) -> Result<Loaded> {
    let source = cfg.unit_source()?;
    match source {
        UnitSource::Tracts => {
            let tracts = load_tracts(cfg.require(&cfg.tracts, "tracts")?)?;
            let groups = tracts
                .iter()
                .map(|t| PopulationGroup {
                    continent: ALL_CONTINENTS.to_string(),
                    ..PopulationGroup::from(t)
                })
                .collect();
            Ok(Loaded {
                source,
                groups,
                access: tracts.iter().filter_map(AccessUnit::from_tract).collect(),
                grid: None,
                ntl: None,
                fill: None,
                units: Vec::new(),
            })
        }
        UnitSource::Admin => {
            let src = cfg
                .population_grid
                .as_ref()
                .ok_or_else(|| ConfigError("`population_grid` is required for admin units".into()))?;
            let (grid, grid_summary) = load_pop_grid(src, cfg.downsample_factor)?;
            let mut units = load_admin_units(cfg.require(&cfg.boundaries, "boundaries")?)?;
            let mut fill = populate_units(&grid, &mut units);
            let ntl = match &cfg.ntl_grid {
                Some(n) => {
                    let (lights, s) = load_grid(&n.path, &n.format()?)?;
                    assign_wealth(&lights, &grid, &mut units, &mut fill)?;
                    Some(s)
                }
                None => None,
            };
            let groups = units
                .iter()
                .map(PopulationGroup::from_admin_unit)
                .collect::<edge_divide::Result<Vec<_>>>()?;
            Ok(Loaded {
                source,
                groups,
                access: units.iter().filter_map(AccessUnit::from_admin_unit).collect(),
                grid: Some(grid_summary),
                ntl,
                fill: Some(fill),
                units,
            })
        }
    }
}

fn access_units(loaded: &Loaded) -> Result<&[AccessUnit]> {
    if loaded.access.is_empty() {
        let why = match loaded.source {
            UnitSource::Admin => "admin units need `ntl_grid` for wealth",
            UnitSource::Tracts => "no tract has positive population",
        };
        return Err(ConfigError(format!("no access units: {why}")).into());
    }
    Ok(&loaded.access)
}

fn catalog(cfg: &RunConfig) -> Result<DatacenterCatalog> {
    Ok(load_catalog(cfg.require(&cfg.catalog, "catalog")?)?)
}

fn launches(cfg: &RunConfig, catalog: &DatacenterCatalog, filter: &CatalogFilter) -> Vec<String> {
    cfg.launches.clone().unwrap_or_else(|| catalog.launch_sequence(filter))
}

fn event_cells(e: &LaunchEvent) -> Vec<String> {
    vec![
        e.step.to_string(),
        e.label(),
        e.datacenter_id.clone().unwrap_or_default(),
        e.launch_date.clone().unwrap_or_default(),
        e.deployment_size.to_string(),
    ]
}

const EVENT_HEADER: [&str; 5] = ["step", "label", "datacenter_id", "launch_date", "deployment_size"];

const REPORT_HEADER: [&str; 11] = [
    "group_count",
    "total_weight",
    "p10",
    "p20",
    "p50",
    "p80",
    "p90",
    "ratio_90_10",
    "ratio_80_20",
    "ratio_guarded",
    "catalog_filter",
];

fn report_cells(r: &InequalityReport) -> Vec<String> {
    vec![
        r.group_count.to_string(),
        num(r.total_weight),
        num(r.p10),
        num(r.p20),
        num(r.p50),
        num(r.p80),
        num(r.p90),
        num(r.ratio_90_10),
        num(r.ratio_80_20),
        r.ratio_guarded.to_string(),
        r.catalog_filter.clone(),
    ]
}

fn header(parts: &[&[&'static str]]) -> Vec<&'static str> {
    parts.concat()
}

pub fn ingest(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let mut body = BTreeMap::new();
    if cfg.unit_source().is_ok() {
        let loaded = load_groups(cfg)?;
        let total: f64 = loaded.groups.iter().map(|g| g.population).sum();
        body.insert(
            "groups",
            json!({
                "source": loaded.source,
                "count": loaded.groups.len(),
                "access_units": loaded.access.len(),
                "total_population": total,
                "population_grid": loaded.grid,
                "ntl_grid": loaded.ntl,
                "unit_fill": loaded.fill,
            }),
        );
        if !loaded.units.is_empty() {
            out.csv(
                "units.csv",
                &[
                    "id",
                    "name",
                    "country",
                    "continent",
                    "population",
                    "wealth",
                    "rep_lat",
                    "rep_lon",
                ],
                loaded.units.iter().map(|u| {
                    vec![
                        u.id.clone(),
                        u.name.clone(),
                        u.country.clone(),
                        u.continent.clone(),
                        num(u.population),
                        opt_num(u.wealth),
                        opt_num(u.rep_point.map(|p| p.lat)),
                        opt_num(u.rep_point.map(|p| p.lon)),
                    ]
                }),
            )?;
        }
    }
    if cfg.catalog.is_some() {
        let cat = catalog(cfg)?;
        let filter = cfg.filter()?;
        let by_class: BTreeMap<&str, usize> = DcClass::ALL
            .iter()
            .map(|c| (c.as_str(), cat.entries().iter().filter(|d| d.class == *c).count()))
            .collect();
        body.insert(
            "catalog",
            json!({
                "entries": cat.len(),
                "by_class": by_class,
                "filter": filter.describe(),
                "admitted": cat.select(&filter).len(),
                "launch_sequence": cat.launch_sequence(&filter),
            }),
        );
    }
    if let Some(p) = &cfg.cities {
        body.insert("cities", json!({ "count": load_cities(p)?.len() }));
    }
    if let Some(meta) = &cfg.probe_meta {
        if !cfg.measurements.is_empty() {
            let m = load_measurements(&cfg.measurements, meta)?;
            body.insert("measurements", json!(m.counts));
        }
    }
    if let Some(p) = &cfg.asn_table {
        body.insert("asn_table", json!({ "prefixes": load_asn_table(p)?.len() }));
    }
    if body.is_empty() {
        return Err(ConfigError("nothing to ingest: no datasets configured".into()).into());
    }
    out.json("ingest_summary.json", "ingest_summary", body)
}

fn cdf_rows(label: &str, points: &[(f64, f64)]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|&(v, f)| vec![label.to_string(), num(v), num(f)])
        .collect()
}

pub fn inequality(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let cat = catalog(cfg)?;
    let loaded = load_groups(cfg)?;
    let filter = cfg.filter()?;
    let base = cfg.base_filter();
    let seq = launches(cfg, &cat, &filter);

    let report = inequality_report(&loaded.groups, &cat, &filter)?;
    let timeline = inequality_timeline_from(&loaded.groups, &cat, &base, &seq)?;
    let mut by_continent: BTreeMap<&str, Vec<PopulationGroup>> = BTreeMap::new();
    for g in &loaded.groups {
        by_continent.entry(&g.continent).or_default().push(g.clone());
    }
    let continents = by_continent
        .iter()
        .map(|(c, gs)| Ok((c.to_string(), inequality_report(gs, &cat, &filter)?)))
        .collect::<Result<BTreeMap<String, InequalityReport>>>()?;

    out.csv(
        "inequality_timeline.csv",
        &header(&[&EVENT_HEADER, &REPORT_HEADER]),
        timeline.iter().map(|(e, r)| [event_cells(e), report_cells(r)].concat()),
    )?;
    out.csv(
        "inequality_by_continent.csv",
        &header(&[&["continent"], &REPORT_HEADER]),
        continents
            .iter()
            .map(|(c, r)| [vec![c.clone()], report_cells(r)].concat()),
    )?;

    let base_cdf = distance_distribution(&loaded.groups, &cat, &base)?
        .sorted()
        .cdf_points();
    let full_cdf = distance_distribution(&loaded.groups, &cat, &filter)?
        .sorted()
        .cdf_points();
    let (base_label, full_label) = (base.describe(), filter.describe());
    out.csv(
        "distance_cdf.csv",
        &["deployment", "distance_km", "cum_fraction"],
        cdf_rows(&base_label, &base_cdf)
            .into_iter()
            .chain(cdf_rows(&full_label, &full_cdf)),
    )?;

    #[derive(Serialize)]
    struct Step<'a> {
        event: &'a LaunchEvent,
        report: &'a InequalityReport,
    }
    out.json(
        "inequality.json",
        "inequality",
        json!({
            "report": report,
            "by_continent": continents,
            "timeline": timeline.iter().map(|(e, r)| Step { event: e, report: r }).collect::<Vec<_>>(),
        }),
    )?;

    if cfg.emit_svg {
        out.write_text(
            "distance_cdf.svg",
            &Chart {
                title: "Distance to nearest datacenter".into(),
                x_label: "distance (km)".into(),
                y_label: "fraction of population".into(),
                series: vec![
                    Series {
                        name: base_label,
                        points: base_cdf,
                        style: Style::Step,
                    },
                    Series {
                        name: full_label,
                        points: full_cdf,
                        style: Style::Step,
                    },
                ],
                diagonal: false,
            }
            .render(),
        )?;
        out.write_text(
            "inequality_timeline.svg",
            &Chart {
                title: "p90/p10 as datacenters launch".into(),
                x_label: "launch step".into(),
                y_label: "ratio".into(),
                series: vec![
                    Series {
                        name: "p90/p10".into(),
                        points: timeline.iter().map(|(e, r)| (e.step as f64, r.ratio_90_10)).collect(),
                        style: Style::Line,
                    },
                    Series {
                        name: "p80/p20".into(),
                        points: timeline.iter().map(|(e, r)| (e.step as f64, r.ratio_80_20)).collect(),
                        style: Style::Line,
                    },
                ],
                diagonal: false,
            }
            .render(),
        )?;
    }
    Ok(())
}

/// `None` when nobody has access, which leaves the index undefined.
fn allow_no_access(r: edge_divide::Result<ConcentrationResult>) -> Result<Option<ConcentrationResult>> {
    match r {
        Ok(r) => Ok(Some(r)),
        Err(edge_divide::Error::NoAccess) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn ci_cell(r: &Option<ConcentrationResult>) -> String {
    r.as_ref().map(|r| num(r.ci)).unwrap_or_else(|| "no_access".into())
}

fn curve_json(r: &ConcentrationResult) -> serde_json::Value {
    json!({
        "ci": r.ci,
        "sigma": r.sigma,
        "catalog_filter": r.catalog_filter,
        "curve": r.curve.points(),
    })
}

pub fn fairness(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let cat = catalog(cfg)?;
    let loaded = load_groups(cfg)?;
    let units = access_units(&loaded)?;
    let filter = cfg.filter()?;
    let result = concentration(units, &cat, &filter, cfg.sigma)?;
    let seq = launches(cfg, &cat, &filter);
    let base = cfg.base_filter();
    let timeline = deployment_steps(&cat, &base, &seq)?
        .into_iter()
        .map(|(event, deployment)| {
            let desc = match event.datacenter_id {
                None => base.describe(),
                Some(_) => format!("{};launches={}", base.describe(), event.step),
            };
            let res = allow_no_access(concentration_in(units, &deployment, cfg.sigma, desc.clone()))?;
            Ok((event, desc, res))
        })
        .collect::<Result<Vec<_>>>()?;

    out.csv(
        "concentration_curve.csv",
        &["x_population", "y_access"],
        result.curve.points().iter().map(|p| vec![num(p.x), num(p.y)]),
    )?;
    out.csv(
        "ci_timeline.csv",
        &header(&[&EVENT_HEADER, &["sigma", "ci", "catalog_filter"]]),
        timeline
            .iter()
            .map(|(e, desc, r)| [event_cells(e), vec![num(cfg.sigma), ci_cell(r), desc.clone()]].concat()),
    )?;
    out.json(
        "fairness.json",
        "fairness",
        json!({
            "result": curve_json(&result),
            "units": units.len(),
            "timeline": timeline
                .iter()
                .map(|(e, desc, r)| json!({ "event": e, "ci": r.as_ref().map(|r| r.ci), "catalog_filter": desc }))
                .collect::<Vec<_>>(),
        }),
    )?;

    if cfg.emit_svg {
        let pts = result.curve.points().iter().map(|p| (p.x, p.y)).collect();
        out.write_text(
            "concentration_curve.svg",
            &Chart {
                title: format!("Concentration curve, CI = {:.3}", result.ci),
                x_label: "cumulative population, poorest first".into(),
                y_label: "cumulative access".into(),
                series: vec![Series {
                    name: result.catalog_filter.clone(),
                    points: pts,
                    style: Style::Line,
                }],
                diagonal: true,
            }
            .render(),
        )?;
        out.write_text(
            "ci_timeline.svg",
            &Chart {
                title: "Concentration index as datacenters launch".into(),
                x_label: "launch step".into(),
                y_label: "CI".into(),
                series: vec![Series {
                    name: format!("sigma = {} km", cfg.sigma),
                    points: timeline
                        .iter()
                        .filter_map(|(e, _, r)| r.as_ref().map(|r| (e.step as f64, r.ci)))
                        .collect(),
                    style: Style::Line,
                }],
                diagonal: false,
            }
            .render(),
        )?;
    }
    Ok(())
}

pub fn pareto(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let loaded = load_groups(cfg)?;
    let units = access_units(&loaded)?;
    let cities = load_cities(cfg.require(&cfg.cities, "cities")?)?;
    let kept = filter_candidates(&cities, cfg.sigma);
    let cat;
    let baseline = if cfg.include_baseline {
        cat = catalog(cfg)?;
        cat.select_nonempty(&cfg.base_filter())?
    } else {
        Vec::new()
    };
    let evaluated = evaluate_all(&kept, units, cfg.sigma, &baseline)?;
    let result = pareto_front(&evaluated);

    out.csv(
        "pareto.csv",
        &[
            "name",
            "lat",
            "lon",
            "city_population",
            "coverage",
            "ci",
            "evaluable",
            "pareto",
        ],
        result.candidates.iter().zip(&result.on_front).map(|(c, f)| {
            vec![
                c.name.clone(),
                num(c.location.lat),
                num(c.location.lon),
                num(c.city_population),
                num(c.coverage),
                opt_num(c.ci_if_selected),
                c.evaluable.to_string(),
                f.to_string(),
            ]
        }),
    )?;
    out.json(
        "pareto.json",
        "pareto",
        json!({
            "sigma": cfg.sigma,
            "include_baseline": cfg.include_baseline,
            "cities_in": cities.len(),
            "cities_kept": kept.len(),
            "result": result,
        }),
    )?;

    if cfg.emit_svg {
        let (front, rest): (Vec<_>, Vec<_>) = result
            .candidates
            .iter()
            .zip(&result.on_front)
            .filter_map(|(c, f)| c.ci_if_selected.map(|ci| ((c.coverage, ci), *f)))
            .partition(|(_, f)| *f);
        out.write_text(
            "pareto.svg",
            &Chart {
                title: "Coverage vs concentration index".into(),
                x_label: "population within sigma".into(),
                y_label: "CI if selected".into(),
                series: vec![
                    Series {
                        name: "pareto optimal".into(),
                        points: front.into_iter().map(|p| p.0).collect(),
                        style: Style::Points,
                    },
                    Series {
                        name: "dominated".into(),
                        points: rest.into_iter().map(|p| p.0).collect(),
                        style: Style::Points,
                    },
                ],
                diagonal: false,
            }
            .render(),
        )?;
    }
    Ok(())
}

pub fn leo(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let cat = catalog(cfg)?;
    let loaded = load_groups(cfg)?;
    let filter = cfg.filter()?;
    let mut scenario = match &cfg.scenario {
        Some(p) => LeoScenario::load(p)?,
        None => LeoScenario::default(),
    };
    if let Some(h) = cfg.hop_km {
        scenario.hop_km = h;
    }
    scenario.validate()?;

    let ground = leo_inequality_report(&loaded.groups, &cat, &filter, 0.0)?;
    let sky = leo_inequality_report(&loaded.groups, &cat, &filter, scenario.hop_km)?;
    let rows = ground.iter().map(|(c, r)| ("ground", 0.0, c, r)).chain(
        sky.iter()
            .map(|(c, r)| (scenario.label.as_str(), scenario.hop_km, c, r)),
    );
    out.csv(
        "leo_inequality.csv",
        &header(&[&["scenario", "hop_km", "continent"], &REPORT_HEADER]),
        rows.map(|(label, hop, c, r)| [vec![label.to_string(), num(hop), c.clone()], report_cells(r)].concat()),
    )?;

    let sweep = if loaded.access.is_empty() {
        None
    } else {
        Some(
            scenario
                .sigma_list
                .iter()
                .map(|&s| Ok((s, allow_no_access(concentration(&loaded.access, &cat, &filter, s))?)))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    if let Some(sweep) = &sweep {
        out.csv(
            "leo_fairness.csv",
            &["scenario", "sigma", "ci", "catalog_filter"],
            sweep
                .iter()
                .map(|(s, r)| vec![scenario.label.clone(), num(*s), ci_cell(r), filter.describe()]),
        )?;
    }
    out.json(
        "leo.json",
        "leo",
        json!({
            "scenario": scenario,
            "ground": ground,
            "with_hop": sky,
            "sigma_sweep": sweep.as_ref().map(|s| {
                s.iter()
                    .map(|(sigma, r)| json!({ "sigma": sigma, "result": r.as_ref().map(curve_json) }))
                    .collect::<Vec<_>>()
            }),
        }),
    )?;

    if cfg.emit_svg {
        if let Some(sweep) = &sweep {
            out.write_text(
                "leo_fairness.svg",
                &Chart {
                    title: "Concentration index as sigma grows".into(),
                    x_label: "sigma (km)".into(),
                    y_label: "CI".into(),
                    series: vec![Series {
                        name: scenario.label.clone(),
                        points: sweep
                            .iter()
                            .filter_map(|(s, r)| r.as_ref().map(|r| (*s, r.ci)))
                            .collect(),
                        style: Style::Line,
                    }],
                    diagonal: false,
                }
                .render(),
            )?;
        }
    }
    Ok(())
}

pub fn trace(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    if cfg.measurements.is_empty() {
        return Err(ConfigError("`measurements` is required for this command".into()).into());
    }
    let m = load_measurements(&cfg.measurements, cfg.require(&cfg.probe_meta, "probe_meta")?)?;
    let groups = m.continent_of();
    let per_class: BTreeMap<TargetClass, _> = [
        TargetClass::Baseline,
        TargetClass::Edge,
        TargetClass::Region,
        TargetClass::GroundTruth,
    ]
    .into_iter()
    .map(|c| (c, probe_min_rtt(&m.records, c)))
    .collect();
    let base = &per_class[&TargetClass::Baseline];
    let edge = &per_class[&TargetClass::Edge];
    let stats = cdf_speedup_stats(&base.per_probe, &edge.per_probe, &groups);

    let wan_asns = cfg
        .wan_asns
        .as_ref()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_else(default_wan_asns);
    let wan = match &cfg.asn_table {
        Some(p) => Some(probe_wan_residence(&m.records, &load_asn_table(p)?, &wan_asns, None)),
        None => None,
    };
    let sat = probe_satellite_rtt(&m.records);

    out.csv(
        "trace_stats.csv",
        &[
            "group",
            "n_base",
            "n_edge",
            "p50_base",
            "p50_edge",
            "p80_base",
            "p80_edge",
            "speedup_p50",
            "speedup_p80",
            "frac_under_20ms",
        ],
        stats.rows.iter().map(|r| {
            vec![
                r.group.clone(),
                r.n_base.to_string(),
                r.n_edge.to_string(),
                num(r.p50_base),
                num(r.p50_edge),
                num(r.p80_base),
                num(r.p80_edge),
                num(r.speedup_p50),
                num(r.speedup_p80),
                num(r.frac_under_20ms),
            ]
        }),
    )?;
    let cdf: Vec<_> = cdf_breakpoints("baseline", &base.per_probe, &groups)
        .into_iter()
        .chain(cdf_breakpoints("edge", &edge.per_probe, &groups))
        .collect();
    out.csv(
        "trace_cdf.csv",
        &["group", "series", "rtt_ms", "fraction"],
        cdf.iter()
            .map(|p| vec![p.group.clone(), p.series.clone(), num(p.rtt_ms), num(p.fraction)]),
    )?;
    let class_min = |c: TargetClass, p: &str| opt_num(per_class[&c].per_probe.get(p).copied());
    out.csv(
        "probe_summary.csv",
        &[
            "probe_id",
            "continent",
            "min_rtt_baseline_ms",
            "min_rtt_edge_ms",
            "min_rtt_region_ms",
            "min_rtt_ground_truth_ms",
            "first_wan_hop_index",
            "wan_residence_ms",
            "satellite_hop_rtt_ms",
        ],
        m.probes.iter().map(|(id, meta)| {
            vec![
                id.clone(),
                meta.continent.clone(),
                class_min(TargetClass::Baseline, id),
                class_min(TargetClass::Edge, id),
                class_min(TargetClass::Region, id),
                class_min(TargetClass::GroundTruth, id),
                wan.as_ref()
                    .and_then(|w| w.first_wan_hop_index.get(id))
                    .map(|i| i.to_string())
                    .unwrap_or_default(),
                opt_num(wan.as_ref().and_then(|w| w.per_probe.get(id).copied())),
                opt_num(sat.get(id).copied()),
            ]
        }),
    )?;
    out.json(
        "trace_summary.json",
        "trace_summary",
        json!({
            "counts": m.counts,
            "min_rtt": per_class
                .iter()
                .map(|(c, s)| (c.as_str(), json!({
                    "probes": s.per_probe.len(),
                    "skipped_records": s.skipped_records,
                    "omitted_probes": s.omitted_probes,
                })))
                .collect::<BTreeMap<_, _>>(),
            "wan_asns": wan_asns,
            "wan_residence": wan.as_ref().map(|w| json!({
                "records_with_wan_hop": w.records_with_wan_hop,
                "records_without_wan_hop": w.records_without_wan_hop,
                "negative_records": w.negative_records,
            })),
            "satellite_probes": sat.len(),
            "stats": stats.rows,
            "warnings": stats.warnings,
        }),
    )?;

    if cfg.emit_svg {
        let mut series: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
        for p in &cdf {
            series
                .entry((p.group.clone(), p.series.clone()))
                .or_default()
                .push((p.rtt_ms, p.fraction));
        }
        out.write_text(
            "trace_cdf.svg",
            &Chart {
                title: "Minimum RTT per probe".into(),
                x_label: "RTT (ms)".into(),
                y_label: "fraction of probes".into(),
                series: series
                    .into_iter()
                    .map(|((g, s), pts)| Series {
                        name: format!("{g} {s}"),
                        points: pts,
                        style: Style::Step,
                    })
                    .collect(),
                diagonal: false,
            }
            .render(),
        )?;
    }
    Ok(())
}

/// Runs every analysis whose inputs are configured and indexes the artifacts.
pub fn report(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    type Section = fn(&RunConfig, &mut OutDir) -> Result<()>;
    let has_groups = cfg.unit_source().is_ok();
    let has_catalog = cfg.catalog.is_some();
    let plan: [(&str, bool, Section); 6] = [
        ("ingest", true, ingest),
        ("inequality", has_groups && has_catalog, inequality),
        ("fairness", has_groups && has_catalog, fairness),
        ("pareto", has_groups && cfg.cities.is_some(), pareto),
        ("leo", has_groups && has_catalog, leo),
        ("trace", !cfg.measurements.is_empty() && cfg.probe_meta.is_some(), trace),
    ];
    let mut sections = BTreeMap::new();
    for (name, enabled, run) in plan {
        if !enabled {
            sections.insert(name, json!({ "status": "skipped" }));
            continue;
        }
        let before = out.artifacts().len();
        run(cfg, out)?;
        sections.insert(
            name,
            json!({ "status": "ok", "artifacts": out.artifacts()[before..].to_vec() }),
        );
    }
    out.json("report.json", "report", json!({ "sections": sections }))
}

use std::collections::{BTreeMap, BTreeSet};
use std::net::IpAddr;

use edge_divide::catalog::{nearest_in, Datacenter, DcClass, LaunchDate};
use edge_divide::divide::{distances_to, PopulationGroup};
use edge_divide::fairness::{concentration_curve, fill_cai};
use edge_divide::geo::{point_in_region, zonal_aggregate, AdminUnit, GridGeometry, Polygon, Ring, ZonalStat};
use edge_divide::placement::dominates;
use edge_divide::tracenet::{cdf_speedup_stats, AsnTable};
use edge_divide::*;
use ipnet::IpNet;
use proptest::prelude::*;

fn pt(lat: f64, lon: f64) -> GeoPoint {
    GeoPoint::new(lat, lon).unwrap()
}

fn site(id: &str, lat: f64, lon: f64) -> Datacenter {
    Datacenter {
        id: id.into(),
        name: id.into(),
        city: id.into(),
        country: "US".into(),
        continent: "NA".into(),
        location: pt(lat, lon),
        class: DcClass::Region,
        launch_date: LaunchDate::On("2020-01-01".parse().unwrap()),
    }
}

fn geo_point() -> impl Strategy<Value = GeoPoint> {
    (-90.0..=90.0f64, -180.0..180.0f64).prop_map(|(a, b)| pt(a, b))
}

fn us_point() -> impl Strategy<Value = GeoPoint> {
    (25.0..49.0f64, -124.0..-67.0f64).prop_map(|(a, b)| pt(a, b))
}

fn replicate_oracle(pairs: &[(f64, u32)], q: f64) -> f64 {
    let mut flat: Vec<f64> = pairs
        .iter()
        .flat_map(|&(v, w)| std::iter::repeat_n(v, w as usize))
        .collect();
    flat.sort_by(f64::total_cmp);
    let k = ((q / 100.0) * flat.len() as f64).ceil() as usize;
    flat[k.max(1) - 1]
}

fn winding_number(p: GeoPoint, ring: &[GeoPoint]) -> i32 {
    let (x, y) = (p.lon, p.lat);
    let mut wn = 0;
    for w in ring.windows(2) {
        let (x0, y0, x1, y1) = (w[0].lon, w[0].lat, w[1].lon, w[1].lat);
        let cross = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0);
        if y0 <= y {
            if y1 > y && cross > 0.0 {
                wn += 1;
            }
        } else if y1 <= y && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn ring(points: &[(f64, f64)]) -> Ring {
    Ring::new(points.iter().map(|&(lat, lon)| pt(lat, lon)).collect(), "t").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn haversine_symmetric_and_bounded(a in geo_point(), b in geo_point()) {
        let (ab, ba) = (haversine_km(a, b), haversine_km(b, a));
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(haversine_km(a, a), 0.0);
        prop_assert!((0.0..=20015.2).contains(&ab));
    }

    #[test]
    fn downsample_conserves_integer_totals(
        rows in 1usize..30, cols in 1usize..30, factor in 1usize..=10, seed in any::<u64>()
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let values: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0..100_000u32) as f64).collect();
        let geom = GridGeometry { xll: -10.0, yll: 20.0, cell_size: 0.5, n_rows: rows, n_cols: cols };
        let g = PopulationGrid::new(geom, values.clone(), None).unwrap();
        let d = g.block_sum_downsample(factor).unwrap();
        let oracle: u64 = values.iter().map(|&v| v as u64).sum();
        prop_assert_eq!(d.total(), oracle as f64);
        prop_assert_eq!(d.n_rows(), rows.div_ceil(factor));
        prop_assert_eq!(d.n_cols(), cols.div_ceil(factor));
    }

    #[test]
    fn whole_grid_polygon_sums_to_total(rows in 1usize..12, cols in 1usize..12, vals in prop::collection::vec(0u16..1000, 144)) {
        let geom = GridGeometry { xll: 0.0, yll: 0.0, cell_size: 1.0, n_rows: rows, n_cols: cols };
        let g = PopulationGrid::new(geom, vals[..rows * cols].iter().map(|&v| v as f64).collect(), None).unwrap();
        let unit = AdminUnit::rectangle("all", 0.0, 0.0, rows as f64, cols as f64).unwrap();
        let sums = zonal_aggregate(&g, &[unit], ZonalStat::Sum);
        prop_assert_eq!(sums["all"], g.total());
    }

    #[test]
    fn percentile_matches_replicate_oracle(
        pairs in prop::collection::vec((0u32..5000, 1u32..=100), 1..1000),
        q in 0.01f64..99.99
    ) {
        let pairs: Vec<(f64, u32)> = pairs.into_iter().map(|(v, w)| (v as f64 / 4.0, w)).collect();
        let dist = WeightedDistribution::from_pairs(pairs.iter().map(|&(v, w)| (v, w as f64))).unwrap();
        prop_assert_eq!(weighted_percentile(&dist, q).unwrap(), replicate_oracle(&pairs, q));
    }

    #[test]
    fn percentile_monotone_in_q(
        pairs in prop::collection::vec((0.0f64..1e4, 0.0f64..1e3), 1..200),
        q1 in 0.01f64..99.99, q2 in 0.01f64..99.99
    ) {
        prop_assume!(pairs.iter().any(|p| p.1 > 0.0));
        let dist = WeightedDistribution::from_pairs(pairs).unwrap();
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(weighted_percentile(&dist, lo).unwrap() <= weighted_percentile(&dist, hi).unwrap());
    }

    #[test]
    fn adding_a_datacenter_never_increases_distance(
        groups in prop::collection::vec((us_point(), 1u32..10_000), 1..40),
        sites in prop::collection::vec(us_point(), 1..6),
        extra in us_point()
    ) {
        let groups: Vec<PopulationGroup> = groups
            .iter()
            .enumerate()
            .map(|(i, &(p, w))| PopulationGroup { id: i.to_string(), location: p, population: w as f64, continent: "NA".into() })
            .collect();
        let dcs: Vec<Datacenter> = sites.iter().enumerate().map(|(i, p)| site(&format!("d{i}"), p.lat, p.lon)).collect();
        let more = site("zz", extra.lat, extra.lon);
        let before: Vec<&Datacenter> = dcs.iter().collect();
        let mut after = before.clone();
        after.push(&more);
        let (d0, d1) = (distances_to(&groups, &before, "b").unwrap(), distances_to(&groups, &after, "a").unwrap());
        for (s0, s1) in d0.samples().iter().zip(d1.samples()) {
            prop_assert!(s1.value <= s0.value);
        }
        for q in [10.0, 50.0, 90.0] {
            prop_assert!(weighted_percentile(&d1, q).unwrap() <= weighted_percentile(&d0, q).unwrap());
        }
        let total: u64 = groups.iter().map(|g| g.population as u64).sum();
        prop_assert_eq!(d0.total_weight(), total as f64);
        for g in &groups {
            let brute = before.iter().map(|d| haversine_km(g.location, d.location)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(nearest_in(g.location, &before).unwrap().1, brute);
        }
    }

    #[test]
    fn ci_bounded_and_order_independent(
        units in prop::collection::vec((1u32..10_000, -50i32..50, 0u32..6), 1..60),
        seed in any::<u64>()
    ) {
        use rand::{seq::SliceRandom, SeedableRng};
        prop_assume!(units.iter().any(|u| u.2 > 0));
        let mut aus: Vec<AccessUnit> = units
            .iter()
            .enumerate()
            .map(|(i, &(p, w, c))| {
                let mut u = AccessUnit::new(format!("u{i:03}"), pt(0.0, 0.0), p as f64, w as f64).unwrap();
                u.cai = c;
                u
            })
            .collect();
        let curve = concentration_curve(&aus).unwrap();
        let ci = concentration_index(&curve);
        prop_assert!((-1.0..=1.0).contains(&ci));

        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        aus.shuffle(&mut rng);
        let shuffled = concentration_curve(&aus).unwrap();
        prop_assert_eq!(shuffled.points(), curve.points());

        aus.sort_by(|a, b| a.wealth.total_cmp(&b.wealth).then_with(|| a.id.cmp(&b.id)));
        let (tp, tm): (f64, f64) = (aus.iter().map(|u| u.population).sum(), aus.iter().map(|u| u.cai as f64 * u.population).sum());
        let (mut cp, mut cm) = (0.0, 0.0);
        for (u, point) in aus.iter().zip(&curve.points()[1..]) {
            cp += u.population;
            cm += u.cai as f64 * u.population;
            prop_assert!((point.x - cp / tp).abs() <= 1e-12);
            prop_assert!((point.y - cm / tm).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_per_capita_access_gives_zero_ci(
        units in prop::collection::vec((1u32..100_000, -1e3f64..1e3), 1..80), cai in 1u32..5
    ) {
        let aus: Vec<AccessUnit> = units
            .iter()
            .enumerate()
            .map(|(i, &(p, w))| {
                let mut u = AccessUnit::new(format!("u{i}"), pt(0.0, 0.0), p as f64, w).unwrap();
                u.cai = cai;
                u
            })
            .collect();
        prop_assert_eq!(concentration_index(&concentration_curve(&aus).unwrap()), 0.0);
    }

    #[test]
    fn affine_wealth_rescaling_is_invisible(
        units in prop::collection::vec((1u32..10_000, 0u32..1000, 0u32..4), 2..40),
        scale in 1u32..50, shift in -500i32..500
    ) {
        prop_assume!(units.iter().any(|u| u.2 > 0));
        let build = |f: &dyn Fn(f64) -> f64| -> Vec<AccessUnit> {
            units.iter().enumerate().map(|(i, &(p, w, c))| {
                let mut u = AccessUnit::new(format!("u{i:02}"), pt(0.0, 0.0), p as f64, f(w as f64)).unwrap();
                u.cai = c;
                u
            }).collect()
        };
        let a = concentration_curve(&build(&|w| w)).unwrap();
        let b = concentration_curve(&build(&|w| w * scale as f64 + shift as f64)).unwrap();
        prop_assert_eq!(a.points(), b.points());
        prop_assert_eq!(concentration_index(&a).to_bits(), concentration_index(&b).to_bits());
    }

    #[test]
    fn cai_monotone_in_sigma_and_catalog(
        units in prop::collection::vec(us_point(), 1..20),
        sites in prop::collection::vec(us_point(), 1..6),
        s1 in 10.0f64..2000.0, s2 in 10.0f64..2000.0
    ) {
        let aus: Vec<AccessUnit> = units.iter().enumerate()
            .map(|(i, p)| AccessUnit::new(format!("u{i}"), *p, 1.0, i as f64).unwrap())
            .collect();
        let dcs: Vec<Datacenter> = sites.iter().enumerate().map(|(i, p)| site(&format!("d{i}"), p.lat, p.lon)).collect();
        let all: Vec<&Datacenter> = dcs.iter().collect();
        let fewer = &all[..all.len() - 1];
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let a = fill_cai(&aus, &all, lo).unwrap();
        let b = fill_cai(&aus, &all, hi).unwrap();
        let c = fill_cai(&aus, fewer, lo).unwrap();
        for ((x, y), z) in a.iter().zip(&b).zip(&c) {
            prop_assert!(x.cai <= y.cai);
            prop_assert!(z.cai <= x.cai);
        }
    }

    #[test]
    fn leo_shift_is_exact(
        pairs in prop::collection::vec((0u32..40_000, 1u32..1000), 1..300),
        q in 0.01f64..99.99
    ) {
        let dist = WeightedDistribution::from_pairs(pairs.iter().map(|&(v, w)| (v as f64 / 8.0, w as f64))).unwrap();
        let t = leo_transform(&dist, 500.0).unwrap();
        prop_assert_eq!(t.len(), dist.len());
        prop_assert_eq!(t.total_weight(), dist.total_weight());
        prop_assert_eq!(weighted_percentile(&t, q).unwrap(), weighted_percentile(&dist, q).unwrap() + 500.0);
        let (p10, p90) = (weighted_percentile(&dist, 10.0).unwrap(), weighted_percentile(&dist, 90.0).unwrap());
        if p90 > p10 && p10 > 0.0 {
            prop_assert!(percentile_ratio(&t, 90.0, 10.0).unwrap() < percentile_ratio(&dist, 90.0, 10.0).unwrap());
        }
    }

    #[test]
    fn pareto_front_matches_dominance_scan(
        cands in prop::collection::vec((0u32..50, 0i32..20), 1..200)
    ) {
        let cities: Vec<CandidateCity> = cands.iter().enumerate().map(|(i, &(cov, ci))| {
            let mut c = CandidateCity::new(format!("c{i:03}"), pt(0.0, 0.0), 1.0);
            c.coverage = cov as f64;
            c.ci_if_selected = Some(ci as f64 / 20.0);
            c.evaluable = true;
            c
        }).collect();
        let res = pareto_front(&cities);
        let got: BTreeSet<&str> = res.front().map(|c| c.name.as_str()).collect();
        let want: BTreeSet<&str> = cities
            .iter()
            .filter(|b| !cities.iter().any(|a| dominates(a, b)))
            .map(|c| c.name.as_str())
            .collect();
        prop_assert_eq!(&got, &want);
        for b in res.candidates.iter().zip(&res.on_front).filter(|(_, f)| !**f).map(|(c, _)| c) {
            prop_assert!(res.front().any(|a| dominates(a, b)));
        }
    }

    #[test]
    fn adding_dominated_candidate_keeps_front(
        cands in prop::collection::vec((1u32..50, 0i32..20), 1..60)
    ) {
        let mk = |name: String, cov: f64, ci: f64| {
            let mut c = CandidateCity::new(name, pt(0.0, 0.0), 1.0);
            c.coverage = cov;
            c.ci_if_selected = Some(ci);
            c
        };
        let mut cities: Vec<CandidateCity> = cands.iter().enumerate()
            .map(|(i, &(cov, ci))| mk(format!("c{i:03}"), cov as f64, ci as f64 / 20.0))
            .collect();
        let before: BTreeSet<String> = pareto_front(&cities).front().map(|c| c.name.clone()).collect();
        let worst = cities[0].clone();
        cities.push(mk("zzz".into(), worst.coverage - 1.0, worst.ci_if_selected.unwrap() + 0.01));
        let after: BTreeSet<String> = pareto_front(&cities).front().map(|c| c.name.clone()).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn candidate_filter_ignores_duplicates(
        cities in prop::collection::vec((us_point(), 1u32..1_000_000), 1..30)
    ) {
        let list: Vec<CandidateCity> = cities.iter().enumerate()
            .map(|(i, &(p, pop))| CandidateCity::new(format!("c{i:02}"), p, pop as f64))
            .collect();
        let kept = filter_candidates(&list, 70.0);
        let mut doubled = list.clone();
        doubled.extend(list.iter().cloned());
        prop_assert_eq!(&filter_candidates(&doubled, 70.0), &kept);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[..i] {
                prop_assert!(haversine_km(a.location, b.location) >= 70.0);
            }
        }
    }

    #[test]
    fn speedup_stats_ignore_probe_order(
        probes in prop::collection::vec((0u32..3, 1u32..20_000, 1u32..20_000), 1..80),
        seed in any::<u64>()
    ) {
        use rand::{seq::SliceRandom, SeedableRng};
        let names: Vec<String> = (0..probes.len()).map(|i| format!("p{i}")).collect();
        let groups: BTreeMap<String, String> = probes.iter().zip(&names)
            .map(|(p, n)| (n.clone(), ["NA", "EU", "AF"][p.0 as usize].to_string()))
            .collect();
        let base: BTreeMap<String, f64> = probes.iter().zip(&names).map(|(p, n)| (n.clone(), p.1 as f64 / 100.0)).collect();
        let edge: BTreeMap<String, f64> = probes.iter().zip(&names).map(|(p, n)| (n.clone(), p.2 as f64 / 100.0)).collect();
        let t0 = cdf_speedup_stats(&base, &edge, &groups);

        let mut order: Vec<usize> = (0..names.len()).collect();
        order.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        let renamed = |m: &BTreeMap<String, f64>| -> BTreeMap<String, f64> {
            order.iter().map(|&i| (format!("q{i:03}"), m[&names[i]])).collect()
        };
        let regroup: BTreeMap<String, String> = order.iter().map(|&i| (format!("q{i:03}"), groups[&names[i]].clone())).collect();
        let t1 = cdf_speedup_stats(&renamed(&base), &renamed(&edge), &regroup);
        prop_assert_eq!(t0, t1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn point_in_region_matches_winding_number(
        points in prop::collection::vec((-2.0f64..12.0, -2.0f64..12.0), 1000)
    ) {
        let shapes = [
            ring(&[(0.0, 0.0), (0.0, 10.0), (10.0, 10.0), (10.0, 0.0), (0.0, 0.0)]),
            ring(&[(0.0, 0.0), (0.0, 10.0), (5.0, 4.0), (10.0, 10.0), (10.0, 0.0), (0.0, 0.0)]),
            ring(&[(1.0, 5.0), (5.0, 9.5), (9.0, 5.0), (5.0, 0.5), (1.0, 5.0)]),
        ];
        for r in &shapes {
            let unit = AdminUnit::new("u", "u", "X", "NA", vec![Polygon { exterior: r.clone(), holes: vec![] }]).unwrap();
            for &(lat, lon) in &points {
                let p = pt(lat, lon);
                prop_assert_eq!(point_in_region(p, &unit), winding_number(p, r.points()) != 0, "{:?}", p);
            }
        }
    }
}

fn random_prefix(rng: &mut impl rand::Rng) -> IpNet {
    if rng.gen_bool(0.7) {
        let len = rng.gen_range(8..=32u8);
        let addr = std::net::Ipv4Addr::from(rng.gen::<u32>() | 0x0100_0000);
        IpNet::new(IpAddr::V4(addr), len).unwrap().trunc()
    } else {
        let len = rng.gen_range(16..=64u8);
        let addr = std::net::Ipv6Addr::from(rng.gen::<u128>());
        IpNet::new(IpAddr::V6(addr), len).unwrap().trunc()
    }
}

#[test]
fn longest_prefix_match_agrees_with_containment_scan() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut entries: BTreeMap<IpNet, u32> = BTreeMap::new();
    while entries.len() < 10_000 {
        let p = random_prefix(&mut rng);
        entries.entry(p).or_insert(rng.gen_range(1..70_000));
    }
    let table = AsnTable::from_entries(entries.iter().map(|(p, a)| (*p, *a))).unwrap();
    let keys: Vec<IpNet> = entries.keys().copied().collect();
    for i in 0..4000 {
        let addr = if i % 2 == 0 {
            let p = keys[rng.gen_range(0..keys.len())];
            p.hosts().next().unwrap_or(p.addr())
        } else {
            random_prefix(&mut rng).addr()
        };
        let oracle = entries
            .iter()
            .filter(|(p, _)| p.contains(&addr))
            .max_by_key(|(p, _)| p.prefix_len())
            .map(|(_, a)| *a);
        assert_eq!(table.lookup(addr), oracle, "{addr}");
    }
}

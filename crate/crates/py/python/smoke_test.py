"""Smoke test for the edge_divide extension module.

Build and install first, e.g. `maturin develop --release` in crates/py, then
run `python python/smoke_test.py`.
"""

import math
from pathlib import Path

import edge_divide as ed

FIXTURES = Path(__file__).resolve().parents[3] / "fixtures"


def main():
    d = ed.haversine_km(0.0, 0.0, 0.0, 1.0)
    assert abs(d - 111.195) < 0.01, d

    assert ed.weighted_percentile([1.0, 2.0, 3.0], 50.0, weights=[1.0, 1.0, 2.0]) == 2.0
    assert ed.percentile_ratio([10.0, 100.0], hi=90.0, lo=10.0) == 10.0
    assert ed.leo_transform([0.0, 12.5], 500.0) == [500.0, 512.5]
    try:
        ed.weighted_percentile([1.0], 100.0)
    except ValueError:
        pass
    else:
        raise AssertionError("q=100 should be rejected")

    grid = [[1.0, 2.0, 3.0], [4.0, -1.0, 6.0]]
    down = ed.block_sum_downsample(grid, 2, nodata=-1.0)
    assert sum(map(sum, down)) == 16.0, down

    ci, curve = ed.concentration([10.0, 10.0, 10.0], [1.0, 2.0, 3.0], [2, 2, 2])
    assert ci == 0.0 and curve[0] == (0.0, 0.0) and curve[-1] == (1.0, 1.0)
    ci, _ = ed.concentration([30.0, 70.0], [1.0, 2.0], [0, 1])
    assert abs(ci - 0.3) < 1e-12, ci

    front = ed.pareto_front(["a", "b", "c"], [10.0, 5.0, 5.0], [0.5, 0.2, 0.4])
    assert front == ["a", "b"], front

    cat = ed.Catalog.load(str(FIXTURES / "toy_catalog.csv"))
    assert len(cat) == 7
    assert sorted(cat.ids(classes="region")) == ["us-east-nyc", "us-west-1"]
    nearest, km = cat.nearest(37.77, -122.42, classes="region")
    assert nearest == "us-west-1" and km < 5.0, (nearest, km)

    lats, lons, pops = [40.7, 34.05, 41.9], [-74.0, -118.2, -87.6], [8e6, 4e6, 2.7e6]
    report = ed.inequality(lats, lons, pops, cat, classes="region,local_zone")
    assert report["p10"] <= report["p50"] <= report["p90"]
    assert math.isinf(report["ratio_90_10"]) or report["ratio_90_10"] >= 1.0
    ci, _ = ed.access_concentration(lats, lons, pops, [3.0, 2.0, 1.0], cat, sigma=70.0)
    assert -1.0 <= ci <= 1.0

    rows = ed.speedup_stats(
        {"a": 22.77, "b": 12.33}, {"a": 18.53, "b": 10.56}, {"a": "NA", "b": "NA"}
    )
    assert rows[0]["group"] == "NA" and rows[0]["n_base"] == 2
    print("edge_divide smoke test: ok")


if __name__ == "__main__":
    main()

import math

import pytest

from tdsched.instgen import (
    CongestionConfig,
    CongestionField,
    EnergyCurve,
    GeneratorConfig,
    GridRouter,
    build_td_functions,
    energy_along_path,
    generate_instance,
    parse_solomon,
    station_coordinates,
    td_grid_shortest_path,
)
from tdsched.instgen.grid import SQRT2

from solomon_fixtures import synth_solomon


FLAT = CongestionConfig(delta_points=((0.0, 0.0), (1.0, 0.0)))
ALWAYS_PEAK = CongestionConfig(delta_points=((0.0, 1.0), (1.0, 1.0)))


class TestSolomonParser:
    def test_c101_style_header(self):
        raw = parse_solomon(synth_solomon("C101", 100, style="c1"))
        assert raw.name == "C101"
        assert raw.vehicle_capacity == 200
        assert len(raw.customers) == 100
        assert raw.depot.id == 0

    def test_truncation_keeps_depot(self):
        raw = parse_solomon(synth_solomon("C101", 100)).truncated(25)
        assert len(raw.customers) == 25
        assert raw.depot.id == 0

    def test_empty_customer_list_rejected(self):
        text = "X\n\nVEHICLE\nNUMBER CAPACITY\n 5 100\n\nCUSTOMER\nCUST NO. X\n"
        with pytest.raises(ValueError):
            parse_solomon(text)

    def test_truncated_row_reports_line_number(self):
        good = synth_solomon("C101", 3)
        truncated = "\n".join(good.splitlines()[:-1] + ["    4     12     30"])
        with pytest.raises(ValueError, match=r"line \d+"):
            parse_solomon(truncated)


class TestCongestionField:
    def test_peak_at_center_is_factor_five(self):
        f = CongestionField((0, 0, 40, 40), horizon=100, config=ALWAYS_PEAK)
        cx, cy = f.centers[0]
        assert math.isclose(f.gamma(cx, cy), 1.0)
        assert math.isclose(f.unit_time(cx, cy, 50), 5.0)

    def test_no_congestion_gives_free_flow(self):
        f = CongestionField((0, 0, 40, 40), horizon=100, config=FLAT)
        assert math.isclose(f.unit_time(10, 10, 37), 1.0)

    def test_formula_midrange(self):
        # gamma = 0.4 at distance sigma * sqrt(2 ln 2.5) from a lone centre
        cfg = CongestionConfig(delta_points=((0.0, 0.5), (1.0, 0.5)),
                               centers=((0.0, 0.0),))
        f = CongestionField((-50, -50, 50, 50), horizon=10, config=cfg)
        d = f.sigma * math.sqrt(2.0 * math.log(1 / 0.4))
        assert math.isclose(f.gamma(d, 0.0), 0.4, rel_tol=1e-12)
        assert math.isclose(f.unit_time(d, 0.0, 5), 1.25, rel_tol=1e-12)

    def test_effective_factor_capped(self):
        f = CongestionField((0, 0, 30, 30), horizon=100)
        for x in range(0, 31, 3):
            for y in range(0, 31, 3):
                for t in range(0, 101, 10):
                    assert f.effective_factor(x, y, t) <= 0.8 + 1e-12

    def test_default_profile_has_two_peaks(self):
        f = CongestionField((0, 0, 30, 30), horizon=100)
        assert f.delta(30) == 1.0  # morning plateau, relative 0.25-0.35
        assert f.delta(80) == 1.0  # afternoon peak at relative 0.80
        assert f.delta(5) == 0.0
        assert 0 < f.delta(60) < 1

    def test_fifo_clamp_on_short_horizons(self):
        # a 100-unit horizon makes the default falling edges steeper than the
        # step-arrival bound allows; construction rate-limits them
        f = CongestionField((0, 0, 60, 60), horizon=100)
        s_min = -((1 - 0.8) ** 2) / (math.sqrt(2.0) * 1.0 * 0.8)
        for t1, v1, t2, v2 in zip(f._delta_t, f._delta_v, f._delta_t[1:], f._delta_v[1:]):
            if t2 > t1:
                assert (v2 - v1) / (t2 - t1) >= s_min - 1e-12


class TestGridSearch:
    def test_same_point(self):
        f = CongestionField((0, 0, 10, 10), horizon=100, config=FLAT)
        arrival, path = td_grid_shortest_path((3, 3), (3, 3), 7.0, f)
        assert arrival == 7.0
        assert path == []

    def test_uncongested_eight_move_distance(self):
        f = CongestionField((0, 0, 10, 10), horizon=100, config=FLAT)
        arrival, path = td_grid_shortest_path((0, 0), (3, 4), 2.0, f)
        assert math.isclose(arrival, 2.0 + 3 * SQRT2 + 1.0, rel_tol=1e-12)
        assert path[0] == (0, 0) and path[-1] == (3, 4)

    def test_congested_center_is_circumvented(self):
        cfg = CongestionConfig(delta_points=((0.0, 1.0), (1.0, 1.0)),
                               centers=((10.0, 10.0),), sigma_frac=0.12)
        f = CongestionField((0, 0, 20, 20), horizon=1000, config=cfg)
        arrival, path = td_grid_shortest_path((2, 10), (18, 10), 0.0, f)
        straight = [(x, 10) for x in range(2, 19)]
        t = 0.0
        for (x, y) in straight[:-1]:
            t += f.unit_time(x, y, t)
        assert arrival < t
        assert any(abs(y - 10) > 2 for _, y in path)

    def test_arrival_non_decreasing_in_departure(self):
        f = CongestionField((0, 0, 25, 25), horizon=200)
        router = GridRouter(f)
        prev = None
        for t0 in range(0, 201, 10):
            arr, _ = router.route((1, 1), (22, 20), float(t0))
            if prev is not None:
                assert arr >= prev
            prev = arr


class TestEnergy:
    def test_constant_free_flow_energy(self):
        f = CongestionField((0, 0, 10, 10), horizon=100, config=FLAT)
        curve = EnergyCurve.default(1.0)
        path = [(0, 0), (1, 0), (2, 0), (3, 0)]
        assert math.isclose(energy_along_path(path, 0.0, f, curve), 3.0 * curve.rate(1.0))
        assert math.isclose(curve.rate(1.0), 1.0)

    def test_crawling_costs_more_than_free_flow(self):
        cfg = CongestionConfig(delta_points=((0.0, 1.0), (1.0, 1.0)),
                               centers=((1.0, 0.0),), sigma_frac=10.0)
        f = CongestionField((0, 0, 2, 0), horizon=100, config=cfg)
        curve = EnergyCurve.default(1.0)
        path = [(0, 0), (1, 0), (2, 0)]
        slow = energy_along_path(path, 50.0, f, curve)
        assert slow > 2.0 * curve.rate(1.0)

    def test_empty_path(self):
        f = CongestionField((0, 0, 10, 10), horizon=100, config=FLAT)
        assert energy_along_path([], 0.0, f, EnergyCurve.default(1.0)) == 0.0

    def test_curve_minimum_at_moderate_speed(self):
        curve = EnergyCurve.default(1.0)
        v_star = (curve.c1 / (2 * curve.c2)) ** (1.0 / 3.0)
        assert 0.5 < v_star < 1.0
        assert curve.rate(v_star) < curve.rate(0.2)
        assert curve.rate(v_star) < curve.rate(1.0)


class TestBuildFunctions:
    def test_same_point_pair(self):
        f = CongestionField((0, 0, 10, 10), horizon=200, config=FLAT)
        tau, rho = build_td_functions(((4, 4), (4, 4)), f, sample_count=8)
        assert tau(17) == 0
        assert rho(17) == 0

    def test_uncongested_pair_is_nearly_constant(self):
        f = CongestionField((0, 0, 12, 12), horizon=200, config=FLAT)
        tau, rho = build_td_functions(((1, 5), (9, 5)), f, sample_count=8)
        for t in (0, 50, 100, 199):
            assert math.isclose(float(tau(t)), 8.0, rel_tol=1e-4)

    def test_pair_through_center_peaks_with_profile(self):
        cfg = CongestionConfig(centers=((15.0, 8.0),), sigma_frac=0.15)
        f = CongestionField((0, 0, 30, 16), horizon=600, config=cfg)
        tau, _ = build_td_functions(((2, 8), (28, 8)), f, sample_count=48)
        off_peak = float(tau(0))
        morning = max(float(tau(t)) for t in range(100, 220, 10))
        afternoon = max(float(tau(t)) for t in range(380, 500, 10))
        assert morning > off_peak * 1.3
        assert afternoon > off_peak * 1.3

    def test_durations_are_fifo(self):
        cfg = CongestionConfig(centers=((10.0, 10.0),))
        f = CongestionField((0, 0, 20, 20), horizon=300, config=cfg)
        tau, _ = build_td_functions(((0, 10), (20, 10)), f, sample_count=24)
        assert tau.is_fifo(0, 300)


@pytest.fixture(scope="module")
def raw():
    return parse_solomon(synth_solomon("C101", 6, style="c1", box=24, horizon=400))


class TestGenerateInstance:

    def test_variant_none_has_no_stations(self, raw):
        cfg = GeneratorConfig(sample_count=6, fit_breakpoints=8)
        inst = generate_instance(raw, "none", cfg)
        assert inst.stations == ()
        assert len(inst.customers) == 6

    def test_variant_depot3_station_count(self, raw):
        cfg = GeneratorConfig(sample_count=6, fit_breakpoints=8)
        inst = generate_instance(raw, "depot+3", cfg)
        fixed = [l for l in inst.locations if l.kind == "station"]
        assert len(fixed) == 12
        assert len(inst.stations) == 13  # the depot is a charging option too

    def test_deterministic_serialization(self, raw):
        cfg = GeneratorConfig(sample_count=6, fit_breakpoints=8)
        a = generate_instance(raw, "depot", cfg)
        b = generate_instance(raw, "depot", cfg)
        import json
        assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)

    def test_all_durations_fifo_and_bounded(self, raw):
        cfg = GeneratorConfig(sample_count=8, fit_breakpoints=10)
        inst = generate_instance(raw, "depot+1", cfg)
        for (a, b), tau in inst.tau.items():
            assert tau.is_fifo(0, inst.horizon), (a, b)
            la, lb = inst.location(a), inst.location(b)
            dx, dy = abs(la.x - lb.x), abs(la.y - lb.y)
            free = (max(dx, dy) - min(dx, dy)) + min(dx, dy) * SQRT2
            if free == 0:
                continue
            peak = max(float(v) for v in tau.values)
            assert peak <= 5.0 * free * 1.02 + 1e-9, (a, b, peak, free)

    def test_round_trip_through_json(self, raw, tmp_path):
        from tdsched.instgen import load_instance
        cfg = GeneratorConfig(sample_count=6, fit_breakpoints=8)
        inst = generate_instance(raw, "depot", cfg)
        path = tmp_path / "inst.json"
        inst.save(path)
        loaded = load_instance(path)
        assert loaded.variant == "depot"
        assert loaded.battery_capacity == inst.battery_capacity
        key = next(iter(inst.tau))
        assert loaded.tau[key] == inst.tau[key]


class TestStations:
    def test_layout_counts(self):
        f = CongestionField((0, 0, 40, 40), horizon=100)
        assert station_coordinates("none", f) == []
        assert station_coordinates("depot", f) == []
        assert len(station_coordinates("depot+1", f)) == 4
        assert len(station_coordinates("depot+3", f)) == 12
        assert len(station_coordinates("depot+5", f)) == 20

    def test_unknown_variant(self):
        f = CongestionField((0, 0, 40, 40), horizon=100)
        with pytest.raises(ValueError):
            station_coordinates("depot+7", f)

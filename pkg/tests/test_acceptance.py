"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria complete. The randomized suites are seeded and exact: refinement
results must equal full-expansion results with zero tolerance.
"""

import random
import time
from dataclasses import dataclass, field

import pytest

from tdsched import ddd
from tdsched.instgen import GeneratorConfig, generate_instance, parse_solomon
from tdsched.instgen.generate import instance_field, make_builder
from tdsched.instgen.grid import SQRT2
from tdsched.model import greedy_earliest, validate_schedule
from tdsched.randgen import (
    random_prefix_extension,
    random_problem,
    random_replen_problem,
)
from tdsched.replen import solve_full as replen_full
from tdsched.savings import RouteEvaluator, savings_solve
from tdsched.ten import full_expand, solve as ten_solve

from oracles import enumerate_replen_schedules
from solomon_fixtures import synth_solomon


def ok(criterion: int, detail: str):
    print(f"ACCEPTANCE {criterion} PASS: {detail}")


@dataclass
class SuiteOutcome:
    matches: int = 0
    total: int = 0
    elapsed: float = 0.0
    bound_sequences: list = field(default_factory=list)
    validated: int = 0


@pytest.fixture(scope="module")
def plain_suite():
    rng = random.Random(20260801)
    out = SuiteOutcome()
    t0 = time.perf_counter()
    for _ in range(1000):
        problem = random_problem(rng, n_max=8, horizon=100)
        res = ddd.solve(problem)
        oracle = ten_solve(full_expand(problem)).schedule
        a = None if res.schedule is None else res.schedule.completion
        b = None if oracle is None else oracle.completion
        out.total += 1
        if a == b:
            out.matches += 1
        out.bound_sequences.append(res.lower_bounds)
        for schedule, prob in ((res.schedule, problem), (oracle, problem)):
            if schedule is not None:
                assert validate_schedule(prob, schedule) is None
                out.validated += 1
    out.elapsed = time.perf_counter() - t0
    return out


@pytest.fixture(scope="module")
def replen_suite():
    rng = random.Random(20260802)
    out = SuiteOutcome()
    t0 = time.perf_counter()
    for _ in range(1000):
        problem = random_replen_problem(rng, n_max=6, horizon=60)
        res = ddd.solve(problem)
        oracle = replen_full(problem)
        a = None if res.schedule is None else res.schedule.completion
        b = None if oracle is None else oracle.completion
        out.total += 1
        if a == b:
            out.matches += 1
        out.bound_sequences.append(res.lower_bounds)
        for schedule in (res.schedule, oracle):
            if schedule is not None:
                assert validate_schedule(problem, schedule) is None
                out.validated += 1
    out.elapsed = time.perf_counter() - t0
    return out


BENCH_VARIANTS = ("none", "depot", "depot+3")


@pytest.fixture(scope="module")
def bench_runs():
    """Desk-scale benchmark: 25-customer clustered instances, two window
    styles, three charging layouts, solved by the savings harness."""
    runs = []
    instances = []
    for style, seeds, horizon in (("c1", (1, 2), 1000), ("c2", (1, 2, 3, 4, 5), 2500)):
        for seed in seeds:
            name = f"{style.upper()}{seed:02d}"
            raw = parse_solomon(synth_solomon(
                name, 25, style=style, seed=seed, box=48, horizon=horizon))
            cfg = GeneratorConfig(sample_count=16, fit_breakpoints=12,
                                  battery_capacity=100)
            builder = make_builder(raw, cfg, variant="depot+3")
            for variant in BENCH_VARIANTS:
                inst = generate_instance(raw, variant, cfg, builder=builder)
                instances.append(inst)
                t0 = time.perf_counter()
                sol = savings_solve(inst, RouteEvaluator(inst))
                wall = time.perf_counter() - t0
                entry = {"style": style, "seed": seed, "variant": variant,
                         "instance": inst, "solution": sol, "wall": wall}
                if variant == "depot+3":
                    t0 = time.perf_counter()
                    entry["solution_pl"] = savings_solve(
                        inst, RouteEvaluator(inst, preload=True))
                    entry["wall_pl"] = time.perf_counter() - t0
                runs.append(entry)
    return {"runs": runs, "instances": instances}


class TestCriterion1:
    def test_plain_oracle_equivalence(self, plain_suite):
        assert plain_suite.matches == plain_suite.total == 1000
        assert plain_suite.elapsed < 60.0
        ok(1, f"1000/1000 refinement = full expansion "
              f"({plain_suite.elapsed:.1f}s < 60s)")


class TestCriterion2:
    def test_replen_oracle_equivalence(self, replen_suite):
        assert replen_suite.matches == replen_suite.total == 1000
        assert replen_suite.elapsed < 120.0
        ok(2, f"1000/1000 replenishment refinement = full expansion "
              f"({replen_suite.elapsed:.1f}s < 120s)")


class TestCriterion3:
    def test_earliest_schedule_optimal_for_monotone_consumption(self):
        rng = random.Random(20260803)
        for _ in range(500):
            problem = random_problem(rng, n_max=8, horizon=100,
                                   non_decreasing_rho=True)
            greedy = greedy_earliest(problem)
            res = ddd.solve(problem)
            a = None if greedy is None else greedy.completion
            b = None if res.schedule is None else res.schedule.completion
            assert a == b
            if greedy is not None:
                assert validate_schedule(problem, greedy) is None
        ok(3, "500/500 earliest-start schedules equal the refinement optimum")


class TestCriterion4:
    def test_lower_bounds_monotone_and_bounded(self, plain_suite, replen_suite):
        violations = 0
        checked = 0
        for bounds in plain_suite.bound_sequences + replen_suite.bound_sequences:
            checked += 1
            for x, y in zip(bounds, bounds[1:]):
                if x > y:
                    violations += 1
            if bounds and max(bounds) > bounds[-1]:
                violations += 1
        assert violations == 0
        ok(4, f"0 bound violations across {checked} refinement runs")


class TestCriterion5:
    def test_mode_restricted_instances_match_enumeration(self):
        rng = random.Random(20260805)
        for _ in range(200):
            problem = random_replen_problem(rng, n_max=4, horizon=24, with_modes=True)
            res = ddd.solve(problem)
            expected = enumerate_replen_schedules(problem)
            got = None if res.schedule is None else res.schedule.completion
            assert got == expected
            if res.schedule is not None:
                assert validate_schedule(problem, res.schedule) is None
        ok(5, "200/200 forbidden/required instances equal brute-force enumeration")


class TestCriterion6:
    def test_preloading_neutral_and_cheaper(self):
        rng = random.Random(20260806)
        created_cold = 0
        created_warm = 0
        pairs = 0
        while pairs < 100:
            replen = pairs % 2 == 1
            prefix, full = random_prefix_extension(
                rng, n_prefix=4, extra=2, horizon=80, replen=replen)
            pre = ddd.solve(prefix)
            if pre.schedule is None:
                continue
            cold = ddd.solve(full)
            warm = ddd.solve(full, preload_path=pre.path)
            a = None if cold.schedule is None else cold.schedule.completion
            b = None if warm.schedule is None else warm.schedule.completion
            assert a == b
            if warm.schedule is not None:
                assert validate_schedule(full, warm.schedule) is None
            created_cold += cold.stats.vertices_created
            created_warm += warm.stats.vertices_created
            pairs += 1
        assert created_warm < created_cold
        ratio = created_warm / created_cold
        ok(6, f"100/100 preloaded objectives match cold solves; solver-created "
              f"vertices reduced to {ratio:.2f}x of cold")


class TestCriterion7:
    def test_generated_durations_fifo_capped_and_bounded(self, bench_runs):
        pairs = 0
        for inst in bench_runs["instances"]:
            tol_margin = 2 ** -16
            for (a, b), tau in inst.tau.items():
                assert tau.is_fifo(0, inst.horizon), (inst.name, a, b)
                la, lb = inst.location(a), inst.location(b)
                dx, dy = abs(la.x - lb.x), abs(la.y - lb.y)
                free = (max(dx, dy) - min(dx, dy)) + min(dx, dy) * SQRT2
                pairs += 1
                if free == 0:
                    continue
                values = [float(v) for v in tau.values]
                fit_tol = 0.01 * (max(values) - min(values))
                assert max(values) <= 5.0 * free + fit_tol + tol_margin, \
                    (inst.name, a, b)
            fld = instance_field(inst)
            xmin, ymin, xmax, ymax = fld.bounds
            for x in range(int(xmin), int(xmax) + 1, 6):
                for y in range(int(ymin), int(ymax) + 1, 6):
                    for k in range(11):
                        t = fld.horizon * k / 10
                        assert fld.effective_factor(x, y, t) <= 0.8 + 1e-12
        ok(7, f"{pairs} generated duration functions FIFO, peak ratio <= 5 + "
              f"fit tolerance, congestion factor capped at 0.8")


class TestCriterion8:
    def test_desk_benchmark_runtime_and_fleet_direction(self, bench_runs):
        for entry in bench_runs["runs"]:
            assert entry["wall"] < 300.0, \
                f"{entry['instance'].name} {entry['variant']}: {entry['wall']:.0f}s"
        by_family = {}
        for entry in bench_runs["runs"]:
            by_family.setdefault((entry["style"], entry["seed"]), {})[
                entry["variant"]] = entry["solution"]
        c2_hits = 0
        c2_total = 0
        for (style, seed), sols in by_family.items():
            if style != "c2":
                continue
            c2_total += 1
            if sols["depot"].vehicles <= sols["none"].vehicles:
                c2_hits += 1
        assert c2_total >= 5
        assert c2_hits / c2_total >= 0.7
        ok(8, f"all savings runs < 300s; depot charging kept fleet <= no-charging "
              f"fleet on {c2_hits}/{c2_total} wide-window instances")

    def test_preloading_evaluator_is_exchangeable(self, bench_runs):
        direction = []
        for entry in bench_runs["runs"]:
            if "solution_pl" not in entry:
                continue
            plain = entry["solution"]
            warm = entry["solution_pl"]
            assert warm.vehicles == plain.vehicles
            assert warm.total_completion == plain.total_completion
            assert warm.replenishments == plain.replenishments
            direction.append(warm.cpu_per_evaluation <= plain.cpu_per_evaluation)
        assert direction
        ok(8, f"preloading evaluator matched plain solutions on "
              f"{len(direction)} station instances "
              f"(cpu/eval lower on {sum(direction)}/{len(direction)})")


class TestCriterion9:
    def test_every_solver_schedule_validates(self, plain_suite, replen_suite,
                                             bench_runs):
        validated = plain_suite.validated + replen_suite.validated
        for entry in bench_runs["runs"]:
            for ev in entry["solution"].routes:
                if ev.feasible:
                    # route evaluations re-validate internally; re-check here
                    assert ev.schedule is not None
                    assert ev.completion == ev.schedule.completion
                    validated += 1
        assert validated > 2000
        ok(9, f"{validated} schedules passed constraint validation, zero exceptions")

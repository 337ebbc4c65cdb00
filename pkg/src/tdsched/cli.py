"""Command-line interface.

Subcommands: ``generate`` builds routing instances from Solomon files,
``solve`` runs one of the solvers on a problem file, ``validate`` runs the
randomized oracle-equivalence suites, ``bench`` runs the savings harness
over instance files, and ``report`` aggregates bench CSVs into a summary CSV
with figures rendered alongside.

Exit codes: 0 on success, 1 for infeasible problems and failed validations,
2 for usage errors.
"""

from __future__ import annotations

import csv
import json
import random
import sys
from pathlib import Path

import click

from . import ddd
from .instgen import (
    CongestionConfig,
    EnergyCurve,
    GeneratorConfig,
    VARIANTS,
    generate_instance,
    load_instance,
    parse_solomon,
)
from .instgen.generate import make_builder
from .instgen.generate import instance_field
from .model import (
    InfeasibleProblem,
    greedy_earliest,
    load_problem,
    tighten_windows,
    validate_schedule,
)
from .pwl import scalar_to_json
from .randgen import random_problem, random_replen_problem
from .replen import solve_full as replen_full
from .savings import RouteEvaluator, report, savings_solve, solution_row
from .ten import full_expand, solve as ten_solve


@click.group()
def main():
    """Time-dependent activity scheduling with replenishable resources."""


def _load_generator_config(path, seed) -> GeneratorConfig:
    if path is None:
        return GeneratorConfig(seed=seed)
    with open(path) as fh:
        obj = json.load(fh)
    congestion = CongestionConfig(
        delta_points=tuple(tuple(p) for p in obj.get(
            "delta_points", CongestionConfig().delta_points)),
        sigma_frac=obj.get("sigma_frac", 0.15),
        cap=obj.get("cap", 0.8),
        centers=tuple(tuple(c) for c in obj["centers"]) if "centers" in obj else None,
    )
    energy = EnergyCurve(*obj["energy"]) if "energy" in obj else None
    return GeneratorConfig(
        tau_free=obj.get("tau_free", 1.0),
        sample_count=obj.get("sample_count", 48),
        fit_breakpoints=obj.get("fit_breakpoints", 16),
        fit_tolerance_frac=obj.get("fit_tolerance_frac", 0.01),
        congestion=congestion,
        energy=energy,
        battery_capacity=obj.get("battery_capacity"),
        replenish_duration=obj.get("replenish_duration"),
        station_sigma_frac=obj.get("station_sigma_frac", 1.0),
        seed=obj.get("seed", seed),
    )


@main.command("generate")
@click.argument("solomon_path", type=click.Path(exists=True))
@click.option("--variant", default="depot",
              type=click.Choice([*VARIANTS, "all"]),
              help="Charging-station layout (or 'all' for every layout).")
@click.option("--truncate", type=int, default=None,
              help="Keep only the first N customers.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Generator configuration JSON.")
@click.option("--seed", type=int, default=0)
@click.option("--output", "-o", "output", default=None,
              help="Output file (single variant) or directory (with 'all').")
def cmd_generate(solomon_path, variant, truncate, config_path, seed, output):
    """Build time-dependent EV-routing instances from a Solomon file."""
    config = _load_generator_config(config_path, seed)
    with open(solomon_path) as fh:
        raw = parse_solomon(fh.read())
    if truncate is not None:
        raw = raw.truncated(truncate)
    variants = list(VARIANTS) if variant == "all" else [variant]
    builder = make_builder(raw, config) if len(variants) > 1 else None
    outputs = []
    for var in variants:
        inst = generate_instance(raw, var, config, builder=builder)
        if output is None:
            path = Path(f"{raw.name.lower()}_{var.replace('+', '')}.json")
        elif variant == "all":
            Path(output).mkdir(parents=True, exist_ok=True)
            path = Path(output) / f"{raw.name.lower()}_{var.replace('+', '')}.json"
        else:
            path = Path(output)
        inst.save(path)
        outputs.append(path)
        click.echo(f"wrote {path}")
    return outputs


@main.command("solve")
@click.argument("problem_file", type=click.Path(exists=True))
@click.option("--algo", default="ddd",
              type=click.Choice(["greedy", "ten-full", "ddd", "ddd-replen"]))
@click.option("--preload", "preload_path", type=click.Path(exists=True), default=None,
              help="JSON list of [activity, time] vertices to preload.")
@click.option("--output", "-o", default=None)
def cmd_solve(problem_file, algo, preload_path, output):
    """Solve a problem file; prints the schedule as JSON."""
    problem = load_problem(problem_file)
    preload = None
    if preload_path:
        with open(preload_path) as fh:
            preload = [(int(i), v) for i, v in json.load(fh)]
    if algo == "ddd-replen" and not problem.has_replenishments:
        raise click.UsageError("ddd-replen needs a problem with replenishments")
    out: dict
    try:
        tight = tighten_windows(problem)
    except InfeasibleProblem as exc:
        _emit({"status": "infeasible", "detail": str(exc)}, output)
        sys.exit(1)
    if algo == "greedy":
        schedule = greedy_earliest(tight)
        stats = None
    elif algo == "ten-full":
        if tight.has_replenishments:
            schedule = replen_full(tight)
        else:
            schedule = ten_solve(full_expand(tight)).schedule
        stats = None
    else:
        res = ddd.solve(tight, preload_path=preload)
        schedule = res.schedule
        stats = res.stats.as_dict()
    if schedule is None:
        out = {"status": "infeasible"}
        if stats:
            out["stats"] = stats
        _emit(out, output)
        sys.exit(1)
    bad = validate_schedule(tight, schedule)
    if bad is not None:
        raise click.ClickException(f"solver returned an invalid schedule: {bad}")
    _emit(schedule.to_json(stats), output)


def _emit(obj: dict, output):
    text = json.dumps(obj, indent=1)
    if output:
        Path(output).write_text(text + "\n")
    click.echo(text)


@main.command("validate")
@click.option("--count", default=1000, help="Instances per suite.")
@click.option("--seed", type=int, default=0)
@click.option("--kind", default="both", type=click.Choice(["plain", "replen", "both"]))
@click.option("--output", "-o", default=None,
              help="Directory for failure reproducer dumps.")
def cmd_validate(count, seed, kind, output):
    """Check the refinement solvers against full expansions on random
    instances; nonzero exit on any mismatch."""
    from .model import problem_to_json

    failures = 0
    suites = []
    if kind in ("plain", "both"):
        suites.append("plain")
    if kind in ("replen", "both"):
        suites.append("replen")
    for suite in suites:
        rng = random.Random(seed)
        ok = 0
        for k in range(count):
            if suite == "plain":
                problem = random_problem(rng, n_max=8, horizon=100)
                oracle = ten_solve(full_expand(problem)).schedule
            else:
                problem = random_replen_problem(rng, n_max=6, horizon=60, with_modes=True)
                oracle = replen_full(problem)
            res = ddd.solve(problem)
            a = None if res.schedule is None else res.schedule.completion
            b = None if oracle is None else oracle.completion
            if a == b:
                ok += 1
                continue
            failures += 1
            click.echo(f"{suite} #{k}: refinement {a} != full expansion {b}", err=True)
            if output:
                Path(output).mkdir(parents=True, exist_ok=True)
                dump = Path(output) / f"mismatch_{suite}_{k}.json"
                dump.write_text(json.dumps({
                    "suite": suite, "seed": seed, "index": k,
                    "refined": scalar_to_json(a) if a is not None else None,
                    "full": scalar_to_json(b) if b is not None else None,
                    "problem": problem_to_json(problem),
                }, indent=1))
                click.echo(f"reproducer written to {dump}", err=True)
        click.echo(f"{suite}: {ok}/{count} match")
    if failures:
        sys.exit(1)


@main.command("bench")
@click.argument("instances", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--evaluator", "evaluators", multiple=True,
              type=click.Choice(["ddd", "ddd-pl"]), default=("ddd",))
@click.option("--variant", "variants", multiple=True, type=click.Choice(VARIANTS),
              help="Only bench instances with these charging layouts.")
@click.option("--time-limit", default=7200.0, show_default=True)
@click.option("--eps", default=1)
@click.option("--output", "-o", default="-", help="CSV path ('-' for stdout).")
def cmd_bench(instances, evaluators, variants, time_limit, eps, output):
    """Run the savings harness over instance files and emit the report CSV."""
    paths = []
    for item in instances:
        p = Path(item)
        paths.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    rows = []
    for path in paths:
        inst = load_instance(path)
        if variants and inst.variant not in variants:
            continue
        for name in evaluators:
            evaluator = RouteEvaluator(inst, eps=eps, preload=(name == "ddd-pl"))
            try:
                sol = savings_solve(inst, evaluator, time_limit=time_limit)
            except ValueError as exc:
                raise click.ClickException(f"{path}: {exc}")
            rows.append(solution_row(sol))
            click.echo(
                f"{inst.name} [{inst.variant}] {evaluator.name}: "
                f"{sol.vehicles} vehicles, completion {float(sol.total_completion):.1f}, "
                f"{sol.replenishments} replenishments"
                f"{'' if sol.terminated else ' (time limit hit)'}",
                err=True)
    if output == "-":
        report(rows, sys.stdout)
    else:
        with open(output, "w", newline="") as fh:
            report(rows, fh)
        click.echo(f"wrote {output}")


@main.command("report")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--output", "-o", "out_dir", default="report",
              help="Directory for the summary CSV and figures.")
def cmd_report(inputs, out_dir):
    """Aggregate bench CSVs (and render instance figures) into a directory."""
    from . import figures

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    written = []
    for item in inputs:
        path = Path(item)
        if path.suffix == ".csv":
            with open(path, newline="") as fh:
                for row in csv.DictReader(fh):
                    if "(avg" in row["Instance"]:
                        continue
                    for key in ("Avg. CPU", "CPU per Evaluation", "Avg. Veh.",
                                "Avg. Compl.", "Replenishments", "Routes w. Repl.",
                                "Terminated"):
                        row[key] = float(row[key])
                    rows.append(row)
        else:
            inst = load_instance(path)
            field = instance_field(inst)
            stem = path.stem
            written.append(figures.congestion_profile_figure(
                field, out / f"{stem}_congestion.png"))
            written.append(figures.congestion_map_figure(
                field, inst, out / f"{stem}_map.png"))
    if rows:
        csv_path = out / "report.csv"
        with open(csv_path, "w", newline="") as fh:
            report(rows, fh)
        written.append(csv_path)
        written.append(figures.fleet_figure(rows, out / "vehicles.png"))
        written.append(figures.completion_figure(rows, out / "completion.png"))
        written.append(figures.cpu_per_evaluation_figure(
            rows, out / "cpu_per_evaluation.png"))
    for w in written:
        click.echo(f"wrote {w}")


if __name__ == "__main__":
    main()

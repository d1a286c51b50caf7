"""Command-line front end.

    grassflow run --scenario FILE --out-dir DIR
    grassflow list
    grassflow check --suite NAME

Exit codes: 0 all checks pass, 1 a check failed, 2 bad scenario or usage,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import acceptance
from . import extension as ext
from . import filament as fl
from . import prequant as pq
from .acceptance import Check, below
from .ambient import AmbientSpace, area_form
from .catalog import LOOP_GENERATORS, _space, build_loop, field_catalog, list_generators
from .errors import GrassflowError, InvalidLoopError
from .io import read_polylines, write_csv, write_json, write_polylines
from .tilde import compatibility_residual

log = logging.getLogger("grassflow")

EXIT_OK, EXIT_CHECK, EXIT_SCHEMA, EXIT_NUMERIC = 0, 1, 2, 3

_LOOP = {
    "type": "object",
    "properties": {
        "generator": {"enum": sorted(LOOP_GENERATORS)},
        "params": {"type": "object"},
        "polyline": {"type": "string"},
    },
    "oneOf": [{"required": ["generator"]}, {"required": ["polyline"]}],
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema", "task"],
    "properties": {
        "schema": {"const": 1},
        "name": {"type": "string"},
        "task": {"enum": ["flow", "invariants", "cocycle_table", "holonomy", "sphere_example"]},
        "ambient": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["euclidean", "torus", "sphere"]},
                "periods": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 3, "maxItems": 3},
            },
            "additionalProperties": False,
        },
        "loop": _LOOP,
        "base": _LOOP,
        "fields": {"type": "array", "items": {"type": "string"}},
        "params": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "steps": {"type": "integer", "minimum": 0},
                "substeps": {"type": "integer", "minimum": 1},
                "cadence": {"type": "integer", "minimum": 1},
                "integrator": {"enum": ["rk4", "euler"]},
                "seed": {"type": "integer"},
                "trials": {"type": "integer", "minimum": 1},
                "resolution": {"type": "integer", "minimum": 8},
                "theta0": {"type": "number", "exclusiveMinimum": 0, "maximum": 3.141592653589793},
                "filling": {"enum": ["north", "south"]},
            },
            "additionalProperties": False,
        },
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"task": {"const": "flow"}}}, "then": {"required": ["loop", "params"],
            "properties": {"params": {"required": ["dt", "steps"]}}}},
        {"if": {"properties": {"task": {"const": "invariants"}}}, "then": {"required": ["loop", "params"],
            "properties": {"params": {"required": ["seed"]}}}},
        {"if": {"properties": {"task": {"const": "cocycle_table"}}}, "then": {"required": ["base", "fields"]}},
    ],
}


class ScenarioInvalid(Exception):
    pass


def load_scenario(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioInvalid(f"cannot read scenario: {exc}") from exc
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioInvalid(f"schema violation at {list(exc.absolute_path)}: {exc.message}") from exc
    unknown = set(data.get("fields", [])) - set(field_catalog())
    if unknown:
        raise ScenarioInvalid(f"unknown fields: {sorted(unknown)}")
    return data


def _resolve_loop(spec: dict, space: AmbientSpace, root: Path):
    if "polyline" in spec:
        loops = read_polylines(root / spec["polyline"], space)
        return loops[0]
    params = dict(spec.get("params", {}))
    if "center" in params:
        params["center"] = tuple(params["center"])
    if "offsets" in params:
        params["offsets"] = tuple(params["offsets"])
    try:
        return build_loop(spec["generator"], space, params)
    except TypeError as exc:
        raise ScenarioInvalid(f"bad parameters for {spec['generator']}: {exc}") from exc


class Runner:
    def __init__(self, scenario: dict, out_dir: Path, root: Path):
        self.sc = scenario
        self.out = out_dir
        self.root = root
        self.space = _space(scenario.get("ambient"))
        self.params = scenario.get("params", {})
        self.tol = scenario.get("tolerances", {})
        self.checks: list[Check] = []
        self.artifacts: list[str] = []
        self.extra: dict = {}

    def check(self, name: str, value: float, default_tol: float):
        self.checks.append(below(name, value, self.tol.get(name, default_tol)))

    def artifact(self, path: Path):
        self.artifacts.append(path.name)

    def prepare(self):
        """Resolve every name before any output is written."""
        self.loop = _resolve_loop(self.sc["loop"], self.space, self.root) if "loop" in self.sc else None
        self.base = _resolve_loop(self.sc["base"], self.space, self.root) if "base" in self.sc else None
        cat = field_catalog(self.space) if self.space.kind == "torus" else {}
        missing = [f for f in self.sc.get("fields", []) if f not in cat]
        if missing:
            raise ScenarioInvalid(f"fields {missing} need a torus ambient")
        self.fields = {f: cat[f] for f in self.sc.get("fields", [])}

    # tasks -----------------------------------------------------------------

    def flow(self):
        p = self.params
        cfg = fl.FlowConfig(p["dt"], p["steps"], p.get("integrator", "rk4"), p.get("cadence", 1), p.get("substeps", 1))
        traj = fl.run(self.loop, cfg)
        self.artifact(write_csv(self.out / "diagnostics.csv", traj.rows))
        self.artifact(write_polylines(self.out / "snapshots.txt", [s.loop for s in traj.states]))
        self.check("relative_length_drift", traj.relative_length_drift, 1e-6)
        self.check("max_dual_length_drift", traj.max_dual_length_drift, 1e-4)
        self.extra["final_time"] = traj.final.time
        self.extra["center_of_mass"] = traj.final.center_of_mass.tolist()

    def invariants(self):
        seed = self.params["seed"]
        trials = self.params.get("trials", 8)
        self.check("compatibility_residual", compatibility_residual(self.loop, trials, seed), 1e-12)
        self.check("gradient_residual", fl.gradient_residual(self.loop, trials, seed), 1e-3)
        self.check("hamiltonian_flow_residual", fl.hamiltonian_flow_residual(self.loop, trials, seed), 1e-3)
        for name, X in self.fields.items():
            base = self.base or self.loop
            self.check(f"moment_hamiltonian_residual[{name}]",
                       ext.hamiltonian_residual(self.loop, X, base, trials, seed), 1e-3)

    def cocycle_table(self):
        rows = ext.cocycle_table(self.base, self.fields)
        self.artifact(write_csv(self.out / "cocycle.csv",
                                [{"field_i": a, "field_j": b, "c_value": v} for a, b, v in rows],
                                ["field_i", "field_j", "c_value"]))
        table = {(a, b): v for a, b, v in rows}
        anti = max(abs(v + table[(b, a)]) for (a, b), v in table.items())
        self.check("antisymmetry", anti, 1e-12)

    def holonomy(self):
        p = self.params
        theta0 = p.get("theta0", np.pi / 2)
        filling = p.get("filling", "north")
        res = p.get("resolution", 512)
        rep = pq.sphere_holonomy(theta0, filling, res)
        self.artifact(write_json(self.out / "holonomy.json", rep.to_json()))
        expected_north = 0.5 * (1 - np.cos(theta0))
        expected = expected_north if filling == "north" else expected_north - 1.0
        self.check("holonomy_raw_error", abs(rep.raw_value - expected), 1e-5)
        gap, k = pq.integrality_gap(pq.cap_filling(theta0, "north", res), pq.cap_filling(theta0, "south", res),
                                    area_form(AmbientSpace.sphere()))
        self.check("integrality_gap", gap, 1e-5)
        self.checks.append(Check("north_minus_south_integer", k, 1, k == 1, "eq"))
        self.extra["holonomy"] = rep.to_json()

    def sphere_example(self):
        res = self.params.get("resolution", 512)
        rep = pq.sphere_holonomy(np.pi / 2, "north", res)
        self.artifact(write_json(self.out / "holonomy.json", rep.to_json()))
        self.check("value_mod_1_error", abs(rep.value_mod_1 - 0.5), 1e-6)
        f_pole = pq.sphere_rotation_hamiltonian(0.0)
        self.check("hamiltonian_pole_error", abs(abs(f_pole) - 0.5), 1e-8)
        self.check("hamiltonian_equator", abs(pq.sphere_rotation_hamiltonian(np.pi / 2)), 1e-10)
        self.check("hamiltonian_integral", abs(pq.sphere_function_integral(pq.sphere_rotation_hamiltonian)), 1e-6)
        self.extra["holonomy"] = rep.to_json()
        self.extra["hamiltonian_north_pole"] = f_pole

    def execute(self) -> dict:
        t0 = time.perf_counter()
        getattr(self, self.sc["task"])()
        report = {
            "scenario": self.sc,
            "checks": [c.to_json() for c in self.checks],
            "artifacts": sorted(self.artifacts + ["report.json"]),
            "results": self.extra,
            "pass": all(c.passed for c in self.checks),
            "wall_clock_s": time.perf_counter() - t0,
        }
        write_json(self.out / "report.json", report)
        return report


def run_scenario(path, out_dir) -> tuple[int, dict | None]:
    path = Path(path)
    try:
        sc = load_scenario(path)
        runner = Runner(sc, Path(out_dir), path.parent)
        runner.prepare()
    except ScenarioInvalid as exc:
        log.error("%s", exc)
        return EXIT_SCHEMA, None
    except (InvalidLoopError, OSError, ValueError, KeyError) as exc:
        log.error("scenario cannot be resolved: %s", exc)
        return EXIT_SCHEMA, None
    runner.out.mkdir(parents=True, exist_ok=True)
    try:
        report = runner.execute()
    except GrassflowError as exc:
        log.error("numerical failure: %s: %s", type(exc).__name__, exc)
        return EXIT_NUMERIC, None
    for c in report["checks"]:
        log.info("%-40s %-12s tol %-8g %s", c["name"], c["value"], c["tolerance"], "pass" if c["pass"] else "FAIL")
    return (EXIT_OK if report["pass"] else EXIT_CHECK), report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grassflow", description="Filament flows, loop-space cocycles and holonomy.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("--scenario", required=True)
    r.add_argument("--out-dir", required=True)
    sub.add_parser("list", help="list loop generators, fields and diffeo families")
    c = sub.add_parser("check", help="run a named check suite")
    c.add_argument("--suite", required=True, choices=sorted(acceptance.SUITES))
    c.add_argument("--out-dir", help="also write a JSON report here")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "list":
        print(list_generators())
        return EXIT_OK
    if args.command == "run":
        code, _ = run_scenario(args.scenario, args.out_dir)
        return code
    results = acceptance.run_suite(args.suite)
    for res in results:
        print(res.summary())
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / f"check_{args.suite}.json", [r.to_json() for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())

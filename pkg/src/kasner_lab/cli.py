"""Scenario runner: generate or integrate, reconstruct, reindex, detect.

Verbs::

    kasner-lab run <scenario.json | fixture-name>
    kasner-lab fixtures [--show NAME]
    kasner-lab simulate-wh --sigma+ S --sigma- S --n1 N --n2 N --n3 N --tau-span T
    kasner-lab detect <trajectory.jsonl> [--eps E] [--N N]

Artifacts go to ``$KASNER_LAB_OUT/<name>`` (default ``./out/<name>``).
Exit codes: 0 success, 1 a diagnostic check failed, 2 invalid input,
3 integration failure (last good state written to ``last_state.json``).
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import bianchi_ode as wh
from . import io as kio
from .exact_solutions import Family, FamilySpec, generate, gowdy_asymptotic_checks, kantowski_sachs_mean_curvature
from .flow_core import (
    FlowError,
    Gauge,
    Trajectory,
    constraint_residual,
    constraint_scale,
    hubble_reindex,
    monotone_densities,
    scale_invariants,
    spatial_scalar_curvature,
)
from .regime_detector import DetectorConfig, detect

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_INTEGRATION = 0, 1, 2, 3

# ---------------------------------------------------------------------------
# scenario schema

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["name", "source", "tau_span"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "tau_span": _POS,
        "samples": {"type": "integer", "minimum": 3},
        "t0": _POS,
        "source": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "family": {
                    "type": "object",
                    "required": ["family"],
                    "additionalProperties": False,
                    "properties": {
                        "family": {"enum": [f.value for f in Family]},
                        "params": {"type": "object"},
                    },
                },
                "wh": {
                    "type": "object",
                    "required": ["sigma_plus", "sigma_minus", "n1", "n2", "n3"],
                    "additionalProperties": False,
                    "properties": {k: _NUM for k in ("sigma_plus", "sigma_minus", "n1", "n2", "n3", "log_theta")},
                },
                "cycle": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "orbit": {"enum": ["golden"]},
                        "period": {"type": "integer", "minimum": 2},
                        "offset": _POS,
                        "structure": {"type": "array", "items": {"enum": [-1, 1]}, "minItems": 3, "maxItems": 3},
                    },
                },
            },
        },
        "integration": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rtol": _POS, "atol": _POS, "max_step": _POS, "output_step": _POS,
                "constraint_tol": _POS, "project": {"type": "boolean"},
            },
        },
        "detector": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eps": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "slope_tol": _POS, "beta": _POS, "window": _POS,
                "min_bounces": {"type": "integer", "minimum": 0},
                "N": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            },
        },
        "checks": {"type": "object"},
    },
}


class ScenarioError(Exception):
    pass


def validate_scenario(data) -> dict:
    v = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(v.iter_errors(data), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path)
        if e.validator == "required":
            missing = [k for k in e.validator_value if k not in e.instance]
            path = "/".join([path, missing[0]]) if path else missing[0]
        raise ScenarioError(f"scenario field '{path or '<root>'}': {e.message}")
    return data


# ---------------------------------------------------------------------------
# fixtures

FIXTURES: dict[str, dict] = {
    "cone": {
        "description": "Lorentzian cone over a hyperbolic space form (Milne model)",
        "source": {"family": {"family": "cone", "params": {"n": 3}}},
        "tau_span": 10.0, "samples": 401,
        "checks": {"L": 1.0, "t2R": -6.0, "t2K0sq": 0.0, "classification": "milne"},
    },
    "cone-torus": {
        "description": "cone over a hyperbolic plane times a flat circle",
        "source": {"family": {"family": "cone_times_torus", "params": {"n": 3, "n_torus": 1}}},
        "tau_span": 10.0, "samples": 401,
        "checks": {"L": 2.0 / 3.0, "t2R": -4.5, "volume_slope": 2.0},
    },
    "kasner": {
        "description": "Kasner solution on a flat torus, exponents (2/3, 2/3, -1/3)",
        "source": {"family": {"family": "kasner", "params": {"p": [2 / 3, 2 / 3, -1 / 3]}}},
        "tau_span": 10.0, "samples": 401,
        "checks": {"L": 1.0 / 3.0, "t2R": 0.0, "t2K2": 9.0, "classification": "kasner"},
    },
    "kantowski-sachs": {
        "description": "Schwarzschild interior as a Kantowski-Sachs flow, m = 1/2",
        "source": {"family": {"family": "kantowski_sachs", "params": {"m": 0.5}}},
        "tau_span": 20.0, "samples": 4001,
        "checks": {"time_exponent": 2.0 / 3.0, "limit_exponents": [-1 / 3, 2 / 3, 2 / 3], "classification": "kasner"},
    },
    "taub-nut": {
        "description": "Taub part of Taub-NUT as locally rotationally symmetric Bianchi IX data",
        "source": {"family": {"family": "taub_nut"}},
        "tau_span": 60.0,
        "integration": {"output_step": 0.005},
        "checks": {"limit_exponents": [1.0, 0.0, 0.0], "classification": "kasner"},
    },
    "bianchi8-nut": {
        "description": "Bianchi VIII NUT solution as locally rotationally symmetric Bianchi VIII data",
        "source": {"family": {"family": "bianchi_viii_nut"}},
        "tau_span": 60.0,
        "integration": {"output_step": 0.005},
        "checks": {"limit_exponents": [1.0, 0.0, 0.0], "classification": "kasner"},
    },
    "gowdy-asymptotic": {
        "description": "polarized Gowdy fiber, leading-order asymptotic model, velocity 3",
        "source": {"family": {"family": "gowdy_asymptotic", "params": {"pi": 3.0}}},
        "tau_span": 20.0, "samples": 401,
        "checks": {"limit_exponents": [2 / 3, -1 / 3, 2 / 3], "classification": "kasner"},
    },
    "mixmaster-period2": {
        "description": "Bianchi IX shadowing the golden-ratio Kasner cycle (u = (1 + sqrt 5)/2)",
        "source": {"cycle": {"orbit": "golden", "offset": 1e-4, "structure": [1, 1, 1]}},
        "tau_span": 100.0,
        "integration": {"output_step": 0.005},
        "checks": {"fn_nonincreasing_doublings": 3, "theta_slope": -3.0, "classification": "mixmaster"},
    },
}


def fixture_scenario(name: str) -> dict:
    if name not in FIXTURES:
        raise ScenarioError(f"unknown fixture '{name}'")
    return {"name": name, **copy.deepcopy(FIXTURES[name])}


def list_fixtures() -> str:
    width = max(map(len, FIXTURES))
    return "".join(f"{name:<{width}}  {FIXTURES[name]['description']}\n" for name in FIXTURES)


# ---------------------------------------------------------------------------
# pipeline

_DEFAULT_T0 = {
    Family.CONE: 1.0, Family.CONE_TIMES_TORUS: 1.0, Family.KASNER: 1.0, Family.GOWDY_ASYMPTOTIC: 1.0,
}


class IntegrationFailure(Exception):
    def __init__(self, msg, state):
        super().__init__(msg)
        self.state = state


def _integration_options(sc) -> wh.IntegrationOptions:
    cfg = dict(sc.get("integration", {}))
    cfg.setdefault("output_step", 0.01)
    return wh.IntegrationOptions(**cfg)


def _integrate(s0, span, opts):
    try:
        return wh.integrate_wh(s0, span, opts)
    except (wh.StiffnessError, wh.IntegrityError) as exc:
        raise IntegrationFailure(str(exc), exc.last_state) from None


def build(sc: dict):
    """Native trajectory, WH states (or None) and the family spec (or None)."""
    src_kind, src = next(iter(sc["source"].items()))
    span = float(sc["tau_span"])
    if src_kind == "family":
        spec = FamilySpec(src["family"], src.get("params", {}))
        fam = spec.family
        if fam in (Family.TAUB_NUT, Family.BIANCHI_VIII_NUT):
            opts = _integration_options(sc)
            from .exact_solutions import nut_initial_state
            states = _integrate(nut_initial_state(spec), (0.0, -span), opts)
            structure = (1, 1, 1) if fam is Family.TAUB_NUT else (-1, 1, 1)
            traj = wh.reconstruct_flow(states, structure=structure)
            traj = Trajectory(traj.samples, meta={"family": fam.value, "limit_exponents": (1.0, 0.0, 0.0)})
            return traj, states, spec
        t0 = float(sc.get("t0", _DEFAULT_T0.get(fam, 1.4 * spec.params.get("m", 1.0))))
        times = t0 * np.exp(-np.linspace(0.0, span, int(sc.get("samples", 2001))))
        return generate(spec, times), None, spec
    if src_kind == "wh":
        s0 = wh.WHState.from_values(src["sigma_plus"], src["sigma_minus"], src["n1"], src["n2"], src["n3"],
                                    log_theta=src.get("log_theta", 0.0))
        if abs(s0.constraint()) > 1e-8:
            raise ScenarioError(f"scenario field 'source/wh': initial data violate the constraint "
                                f"(residual {s0.constraint():.3e})")
    else:
        structure = tuple(src.get("structure", (1, 1, 1)))
        if "period" in src and "orbit" in src:
            raise ScenarioError("scenario field 'source/cycle': give either orbit or period")
        if "period" in src:
            orbit = wh.find_periodic_orbit(src["period"])
            if not orbit:
                raise ScenarioError(f"scenario field 'source/cycle/period': no Kasner cycle of period {src['period']}")
        else:
            orbit = wh.golden_cycle()
        cycle = wh.build_heteroclinic_cycle(orbit, structure)
        s0 = wh.shadowing_initial_state(cycle, src.get("offset", 1e-4))
    states = _integrate(s0, (0.0, -span), _integration_options(sc))
    return wh.reconstruct_flow(states), states, None


def _check(value, expected=None, tol=None, ok=None) -> dict:
    if ok is None:
        ok = abs(value - expected) <= tol
    out = {"value": value, "pass": bool(ok)}
    if expected is not None:
        out["expected"] = expected
    if tol is not None:
        out["tol"] = tol
    return out


def _json_safe(x):
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def diagnostics(sc, native: Trajectory, hub: Trajectory, states, spec, report, inv) -> dict:
    """Generic and fixture-specific checks recorded in the report."""
    want = sc.get("checks", {})
    c: dict[str, dict] = {}
    rel = max(abs(constraint_residual(s)) / constraint_scale(s) for s in native)
    c["constraint"] = _check(rel, ok=rel <= (1e-8 if states is not None else 1e-10), tol=1e-8 if states else 1e-10)
    d = monotone_densities(hub)
    c["milne_density_nonincreasing"] = _check(float(np.max(np.diff(d.log_milne_density), initial=0.0)),
                                              ok=bool(np.all(np.diff(d.log_milne_density) <= 1e-12)))
    R = np.array([spatial_scalar_curvature(s.metric) for s in hub])
    both = (R[:-1] <= 0) & (R[1:] <= 0)
    dk = np.diff(d.log_kasner_density)[both]
    c["kasner_density_nondecreasing_where_R_le_0"] = _check(float(np.min(dk, initial=0.0)),
                                                            ok=bool(np.all(dk >= -1e-12)))
    gm, gk = d.identity_gaps()
    c["milne_identity_gap"] = _check(gm, ok=gm <= 1e-6, tol=1e-6)
    c["kasner_identity_gap"] = _check(gk, ok=gk <= 1e-6, tol=1e-6)
    rm = np.array([x["t2Rm"] for x in inv])
    tau = np.log(hub.t0 / hub.times)
    half = tau <= tau.max() / 2
    sup_full, sup_half = float(rm.max()), float(rm[half].max())
    change = abs(sup_full - sup_half) / sup_full if sup_full > 0 else 0.0
    c["type_I_sup_t2Rm"] = _check(sup_full, ok=math.isfinite(sup_full))
    c["type_I_span_doubling_change"] = _check(change, ok=change < 0.05, tol=0.05)
    if "classification" in want:
        c["classification"] = {"value": report.classification, "expected": want["classification"],
                               "pass": report.classification == want["classification"]}
    for key in ("L", "t2R", "t2K2", "t2K0sq"):
        if key in want:
            dev = max(abs(x[key] - want[key]) for x in inv)
            c[key] = _check(dev, ok=dev <= 1e-12, tol=1e-12)
            c[key]["expected"] = want[key]
    if "volume_slope" in want:
        s = report.volume_exponent
        dev = max(abs(x - want["volume_slope"]) for x in s)
        c["volume_slope"] = _check(dev, ok=dev <= 1e-10, tol=1e-10)
    if "limit_exponents" in want:
        exps = hub[0].K_hat / hub[0].H
        target = sorted(want["limit_exponents"])
        dev = float(np.max(np.abs(np.sort(exps) - target)))
        c["limit_exponents"] = _check(dev, ok=dev <= 1e-3, tol=1e-3)
        c["limit_exponents"]["measured"] = [float(x) for x in exps]
    if spec is not None and spec.family is Family.KANTOWSKI_SACHS:
        m = spec.params["m"]
        t_areal = native.times
        Hdev = max(abs(s.H - kantowski_sachs_mean_curvature(m, s.t)) / abs(s.H) for s in native)
        c["mean_curvature_formula"] = _check(Hdev, ok=Hdev <= 1e-12, tol=1e-12)
        tH = np.sort(-3.0 / np.array([s.H for s in native]))
        order = np.argsort(-3.0 / np.array([s.H for s in native]))
        ta = t_areal[order]
        last = tH <= tH[0] * 10
        slope = float(np.polyfit(np.log(tH[last]), np.log(ta[last]), 1)[0])
        c["time_exponent"] = _check(slope, want.get("time_exponent", 2 / 3), 0.01)
        t2R = np.array([x["t2R"] for x in inv])
        c["t2R_at_smallest_t"] = _check(float(t2R[0]), ok=t2R[0] < t2R[len(t2R) // 2])
        integral = float(np.trapezoid(t2R, np.log(hub.times)))
        c["t2R_dlogt_integral"] = _check(integral, ok=math.isfinite(integral))
    if spec is not None and spec.family is Family.GOWDY_ASYMPTOTIC:
        g = gowdy_asymptotic_checks(spec)
        c["gowdy_kasner_identities"] = _check(max(g.sum_residual, g.sum_sq_residual), ok=max(
            g.sum_residual, g.sum_sq_residual) <= 1e-12, tol=1e-12)
        c["gowdy_hubble_rate"] = _check(g.hubble_rate_measured, g.hubble_rate, 1e-9)
        c["gowdy_volume_exponent"] = _check(g.volume_exponent_measured, 1.0, 1e-9)
    if "fn_nonincreasing_doublings" in want:
        k = want["fn_nonincreasing_doublings"]
        ratios = [r for _, _, r in report.fn_table][-(k + 1):]
        ok = len(ratios) == k + 1 and all(b <= a for a, b in zip(ratios, ratios[1:]))
        c["fn_nonincreasing"] = {"value": ratios, "pass": ok}
    if "theta_slope" in want and states is not None:
        taus = np.array([s.tau for s in states])
        lt = np.array([s.log_theta for s in states])
        m = taus <= taus.min() + 10
        slope = float(np.polyfit(taus[m], lt[m], 1)[0])
        c["theta_slope_last_10"] = _check(slope, want["theta_slope"], 0.1)
    if states is not None:
        vol = np.array([0.5 * sum(math.log(x) for x in s.metric.diag) for s in native])
        dev = float(np.max(np.abs(vol - vol[-1] - 3 * (native.times - native.times[-1]))))
        c["volume_law"] = _check(dev, ok=dev <= 1e-8 * max(1.0, float(np.max(np.abs(vol)))), tol=1e-8)
    return _json_safe(c)


def out_dir(name: str) -> Path:
    base = Path(os.environ.get("KASNER_LAB_OUT", "out"))
    return base / name


def write_artifacts(out: Path, native, hub, states, report, invariants):
    out.mkdir(parents=True, exist_ok=True)
    kio.write_trajectory(hub, out / "trajectory.jsonl")
    if native.gauge is not Gauge.HUBBLE:
        kio.write_trajectory(native, out / "trajectory_native.jsonl")
    (out / "report.json").write_text(report.to_json())
    (out / "fn_table.csv").write_text(report.fn_csv())
    d = monotone_densities(hub)
    rows = []
    for i, (s, inv) in enumerate(zip(hub, invariants)):
        rows.append((report.tau[i], math.log(s.t), 0.5 * sum(math.log(x) for x in s.metric.diag),
                     report.milne_score[i], report.kasner_score[i], float(s.L), float(inv["t2R"]),
                     float(inv["t2Rm"]), float(d.log_milne_density[i]), float(d.log_kasner_density[i])))
    kio.write_csv_rows(out / "series.csv",
                       ["tau", "log_t", "log_dvol", "milne_score", "kasner_score", "L", "t2R", "t2Rm",
                        "log_milne_density", "log_kasner_density"], rows)
    if states is not None:
        wh.write_wh_csv(states, out / "wh.csv")
        kio.write_csv_rows(out / "orbit.csv", ["tau", "sigma_plus", "sigma_minus"],
                           [(s.tau, s.sigma_plus, s.sigma_minus) for s in states])


def detector_config(sc) -> DetectorConfig:
    d = dict(sc.get("detector", {}))
    Ns = d.pop("N", None)
    return DetectorConfig(**d, Ns=tuple(Ns) if Ns else None)


@dataclasses.dataclass(frozen=True)
class RunResult:
    native: Trajectory
    hubble: Trajectory
    states: list | None
    spec: FamilySpec | None
    report: object
    invariants: list
    checks: dict

    @property
    def ok(self) -> bool:
        return all(v["pass"] for v in self.checks.values())


def execute(sc: dict) -> RunResult:
    """Run the pipeline in memory: build, reindex, detect, check."""
    validate_scenario(sc)
    native, states, spec = build(sc)
    hub = native if native.gauge is Gauge.HUBBLE else hubble_reindex(native)
    report = detect(hub, detector_config(sc))
    inv = [scale_invariants(s) for s in hub]
    checks = diagnostics(sc, native, hub, states, spec, report, inv)
    report = dataclasses.replace(report, checks=checks)
    return RunResult(native, hub, states, spec, report, inv, checks)


def run_scenario(sc: dict, out: Path | None = None) -> tuple[int, dict]:
    res = execute(sc)
    write_artifacts(out or out_dir(sc["name"]), res.native, res.hubble, res.states, res.report, res.invariants)
    return (EXIT_OK if res.ok else EXIT_CHECK), res.checks


# ---------------------------------------------------------------------------
# entry point


def _load_scenario(arg: str) -> dict:
    p = Path(arg)
    if p.suffix == ".json" or p.exists():
        try:
            return json.loads(p.read_text())
        except FileNotFoundError:
            raise ScenarioError(f"scenario file '{arg}' not found") from None
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario file '{arg}' is not valid JSON: {exc}") from None
    return fixture_scenario(arg)


def _dump_state(out: Path, state) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if state is None:
        payload = None
    else:
        payload = {"tau": state.tau, "sigma_plus": state.sigma_plus, "sigma_minus": state.sigma_minus,
                   "n": list(state.n), "log_abs_n": list(state.log_abs_n), "signs": list(state.signs),
                   "log_theta": state.log_theta}
    text = json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n"
    (out / "last_state.json").write_text(text)
    sys.stderr.write("last good state:\n" + text)


def _summarize(name, code, checks) -> str:
    failed = [k for k, v in checks.items() if not v["pass"]]
    status = "ok" if code == EXIT_OK else "FAILED: " + ", ".join(failed)
    return f"{name}: {len(checks) - len(failed)}/{len(checks)} checks passed ({status})\n"


def _cmd_run(args) -> int:
    sc = _load_scenario(args.scenario)
    name = sc.get("name", "scenario") if isinstance(sc, dict) else "scenario"
    try:
        code, checks = run_scenario(sc)
    except IntegrationFailure as exc:
        sys.stderr.write(f"integration failed: {exc}\n")
        _dump_state(out_dir(str(name)), exc.state)
        return EXIT_INTEGRATION
    sys.stdout.write(_summarize(name, code, checks))
    return code


def _cmd_fixtures(args) -> int:
    if args.show:
        sys.stdout.write(json.dumps(fixture_scenario(args.show), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(list_fixtures())
    return EXIT_OK


def _cmd_simulate(args) -> int:
    sc = {
        "name": args.name,
        "source": {"wh": {"sigma_plus": args.sigma_plus, "sigma_minus": args.sigma_minus,
                          "n1": args.n1, "n2": args.n2, "n3": args.n3}},
        "tau_span": args.tau_span,
        "integration": {"output_step": args.output_step},
    }
    return _cmd_run_dict(sc)


def _cmd_run_dict(sc) -> int:
    try:
        code, checks = run_scenario(sc)
    except IntegrationFailure as exc:
        sys.stderr.write(f"integration failed: {exc}\n")
        _dump_state(out_dir(sc["name"]), exc.state)
        return EXIT_INTEGRATION
    sys.stdout.write(_summarize(sc["name"], code, checks))
    return code


def _cmd_detect(args) -> int:
    traj = kio.read_trajectory(args.trajectory)
    if traj.gauge is not Gauge.HUBBLE:
        traj = hubble_reindex(traj)
    Ns = None
    if args.N is not None:
        tau_max = math.log(traj.t0 / traj.times[0])
        if args.N > tau_max + 1e-9:
            raise ScenarioError(f"--N {args.N} exceeds the trajectory's tau range {tau_max:.6g}")
        Ns = tuple(sorted({2**k for k in range(args.N.bit_length()) if 2**k <= args.N} | {args.N}))
    report = detect(traj, DetectorConfig(eps=args.eps, Ns=Ns))
    out = out_dir(args.name)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "fn_table.csv").write_text(report.fn_csv())
    sys.stdout.write(f"classification: {report.classification}\n")
    sys.stdout.write(report.fn_csv())
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kasner-lab", description="Numerical lab for vacuum CMC Einstein flows.")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run a scenario file or a built-in fixture")
    r.add_argument("scenario", help="path to a scenario JSON file, or a fixture name")
    r.set_defaults(func=_cmd_run)

    f = sub.add_parser("fixtures", help="list built-in fixtures")
    f.add_argument("--show", metavar="NAME", help="print the scenario JSON of one fixture")
    f.set_defaults(func=_cmd_fixtures)

    s = sub.add_parser("simulate-wh", help="integrate Wainwright-Hsu data toward the singularity")
    s.add_argument("--sigma+", dest="sigma_plus", type=float, required=True)
    s.add_argument("--sigma-", dest="sigma_minus", type=float, required=True)
    for k in ("n1", "n2", "n3"):
        s.add_argument(f"--{k}", type=float, required=True)
    s.add_argument("--tau-span", dest="tau_span", type=float, required=True)
    s.add_argument("--output-step", dest="output_step", type=float, default=0.01)
    s.add_argument("--name", default="simulate-wh")
    s.set_defaults(func=_cmd_simulate)

    d = sub.add_parser("detect", help="regime detection on a trajectory JSONL file")
    d.add_argument("trajectory")
    d.add_argument("--eps", type=float, default=0.05)
    d.add_argument("--N", type=int, default=None)
    d.add_argument("--name", default="detect")
    d.set_defaults(func=_cmd_detect)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, FlowError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

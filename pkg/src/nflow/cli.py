"""Command line front end.

Subcommands: simulate, predict, steady, sweep, check-ls, curve.  Run
parameters come from an optional flat key=value config file plus flags,
with flags winning.  The NFLOW_OUTPUT_DIR environment variable overrides
the configured output directory.  Exit codes: 0 for a completed command
(an undecided run still completed), 1 from check-ls when the inequality
is violated, 2 for configuration errors, 3 for runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .diagnostics import conserved_integral, energy
from .errors import ConfigError, NFlowError, NoRoot
from .evolution import SimOutcome, SolverConfig, simulate
from .experiments import ExperimentSpec, reconstruct_curve, run_ls_suite, run_sweep
from .steady import classify, compute_A0, predict_limit, solve_BA, steady_to_json

__all__ = ["main", "RunConfig", "build_run_config", "load_config_file", "parse_u0"]

_KEY_TYPES = {
    "a": float,
    "a_over_pi": str,
    "n": int,
    "p": float,
    "u0": str,
    "name": str,
    "output_dir": str,
    "seed": int,
    "step_tol": float,
    "dt_init": float,
    "dt_min": float,
    "dt_max": float,
    "blowup_threshold": float,
    "conv_tol": float,
    "conv_window": int,
    "t_max": float,
    "record_every": int,
    "project_conservation": bool,
}

_SOLVER_KEYS = (
    "step_tol",
    "dt_init",
    "dt_min",
    "dt_max",
    "blowup_threshold",
    "conv_tol",
    "conv_window",
    "t_max",
    "record_every",
    "project_conservation",
)

_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    """Fully resolved parameters for one simulate-style run."""

    a: float
    solver: SolverConfig
    u0_constant: float
    u0_modes: list[tuple[int, float]] = field(default_factory=list)
    n: int = 129
    name: str = "run"
    output_dir: str = "runs"
    seed: int = 0

    def spec(self) -> ExperimentSpec:
        return ExperimentSpec(
            name=self.name,
            a=self.a,
            config=self.solver,
            u0_constant=self.u0_constant,
            u0_modes=self.u0_modes,
            n=self.n,
        )

    def echo(self) -> dict:
        doc = {
            "a": self.a,
            "n": self.n,
            "p": self.solver.p,
            "u0_constant": self.u0_constant,
            "u0_modes": [[k, c] for k, c in self.u0_modes],
            "name": self.name,
            "output_dir": self.output_dir,
            "seed": self.seed,
        }
        for key in _SOLVER_KEYS:
            doc[key] = getattr(self.solver, key)
        return doc


def parse_u0(text: str) -> tuple[float, list[tuple[int, float]]]:
    """Parse "c0,k:ck,..." where mode k means cos(k*pi*x/a)."""
    parts = [chunk.strip() for chunk in text.split(",") if chunk.strip()]
    if not parts:
        raise ConfigError("u0 is empty; want e.g. 2.0,1:0.5")
    try:
        constant = float(parts[0])
    except ValueError:
        raise ConfigError(f"u0 must start with the constant term, got {parts[0]!r}")
    modes = []
    for chunk in parts[1:]:
        if ":" not in chunk:
            raise ConfigError(f"bad u0 term {chunk!r}; want k:coefficient")
        k_text, c_text = chunk.split(":", 1)
        try:
            k = int(k_text)
            coeff = float(c_text)
        except ValueError:
            raise ConfigError(f"bad u0 term {chunk!r}; want k:coefficient")
        if k < 1:
            raise ConfigError(f"u0 mode index must be >= 1, got {k}")
        modes.append((k, coeff))
    return constant, modes


def load_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat key = value file; # starts a comment, blank lines skipped."""
    kv: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        if key in kv:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        kv[key] = value
    return kv


def _coerce(key: str, text: str):
    kind = _KEY_TYPES[key]
    if kind is bool:
        low = text.lower()
        if low in _TRUE_WORDS:
            return True
        if low in _FALSE_WORDS:
            return False
        raise ConfigError(f"bad boolean for {key}: {text!r}")
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}")


def build_run_config(
    file_kv: dict[str, str], overrides: dict[str, object]
) -> RunConfig:
    """Merge config-file values with typed flag overrides (flags win)."""
    typed: dict[str, object] = {}
    for key, text in file_kv.items():
        if key not in _KEY_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        typed[key] = _coerce(key, text)
    if "a" in overrides or "a_over_pi" in overrides:
        typed.pop("a", None)
        typed.pop("a_over_pi", None)
    typed.update(overrides)

    if "a" in typed and "a_over_pi" in typed:
        raise ConfigError("give a or a_over_pi, not both")
    if "a_over_pi" in typed:
        text = str(typed.pop("a_over_pi"))
        try:
            ratio = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad a_over_pi value {text!r}")
        if ratio <= 0:
            raise ConfigError("a_over_pi must be positive")
        typed["a"] = float(ratio) * math.pi
    if "a" not in typed:
        raise ConfigError("domain length missing: set a or a_over_pi")
    if "p" not in typed:
        raise ConfigError("exponent p missing")
    if "u0" not in typed:
        raise ConfigError("initial data u0 missing")

    constant, modes = parse_u0(str(typed["u0"]))
    solver_kwargs = {key: typed[key] for key in _SOLVER_KEYS if key in typed}
    solver = SolverConfig(p=float(typed["p"]), **solver_kwargs)
    solver.validate()
    return RunConfig(
        a=float(typed["a"]),
        solver=solver,
        u0_constant=constant,
        u0_modes=modes,
        n=int(typed.get("n", 129)),
        name=str(typed.get("name", "run")),
        output_dir=str(typed.get("output_dir", "runs")),
        seed=int(typed.get("seed", 0)),
    )


def _overrides_from_args(args: argparse.Namespace) -> dict[str, object]:
    out: dict[str, object] = {}
    for key in _KEY_TYPES:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _run_config_from_args(args: argparse.Namespace) -> RunConfig:
    file_kv = load_config_file(args.config) if getattr(args, "config", None) else {}
    return build_run_config(file_kv, _overrides_from_args(args))


def _resolve_run_dir(rc: RunConfig) -> Path:
    base = os.environ.get("NFLOW_OUTPUT_DIR") or rc.output_dir
    run_dir = Path(base) / rc.name
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def _fnum(x) -> str:
    return repr(float(x))


_TRACE_HEADER = "step,t,dt,E,I,ubar,min_u,max_u,residual_inf,dissipation,lyapunov,closure"


def write_trace_csv(path: Path, trace) -> None:
    rows = [_TRACE_HEADER]
    for r in trace:
        rows.append(
            ",".join(
                [
                    str(r.step),
                    _fnum(r.t),
                    _fnum(r.dt),
                    _fnum(r.energy),
                    _fnum(r.conserved),
                    _fnum(r.mean),
                    _fnum(r.min_u),
                    _fnum(r.max_u),
                    _fnum(r.residual_inf),
                    "" if r.dissipation is None else _fnum(r.dissipation),
                    _fnum(r.lyapunov),
                    "" if r.closure is None else _fnum(r.closure),
                ]
            )
        )
    path.write_text("\n".join(rows) + "\n")


def _json_default(obj):
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n")


def _prediction_doc(prediction) -> dict:
    return {
        "kind": prediction.kind,
        "I0": prediction.I0,
        "A0": prediction.A0,
        "state": steady_to_json(prediction.state),
    }


def _comparison_doc(rc: RunConfig, prediction, out: SimOutcome):
    if out.tag != "converged" or out.state is None:
        return None
    fitted = steady_to_json(out.state)
    if fitted is None or fitted["kind"] == "no_match":
        return None
    p = rc.solver.p
    I_final = conserved_integral(out.final_field, p)
    drift = abs(I_final - prediction.I0) / abs(prediction.I0)
    if prediction.kind == "unique":
        target = prediction.state.c
        fitted_c = fitted.get("c")
        return {
            "kind": "unique",
            "predicted_c": target,
            "fitted_c": fitted_c,
            "abs_error": None if fitted_c is None else abs(fitted_c - target),
            "conserved_rel_error": drift,
        }
    if fitted["kind"] == "constant":
        A_fit, B_fit = 0.0, fitted["c"]
    else:
        B_fit = fitted["B"]
        A_fit = fitted["A"] if fitted.get("phase", 0.0) == 0.0 else -fitted["A"]
    doc = {
        "kind": "family",
        "A_fit": A_fit,
        "B_fit": B_fit,
        "conserved_rel_error": drift,
    }
    try:
        root = solve_BA(A_fit, p, rc.a, prediction.I0)
        doc["B_root"] = root
        doc["B_abs_error"] = abs(B_fit - root)
    except (NoRoot, NFlowError) as exc:
        doc["B_root"] = None
        doc["B_root_note"] = str(exc)
    return doc


def cmd_simulate(args: argparse.Namespace) -> int:
    rc = _run_config_from_args(args)
    _, u0 = rc.spec().build()
    p = rc.solver.p
    E0 = energy(u0)
    prediction = predict_limit(u0, p)
    out = simulate(u0, rc.solver)
    run_dir = _resolve_run_dir(rc)
    write_trace_csv(run_dir / "trace.csv", out.trace)
    final = out.trace[-1]
    summary = {
        "schema": "nflow-summary-v1",
        "config": rc.echo(),
        "outcome": {
            "tag": out.tag,
            "trigger": out.trigger,
            "t_end": out.t_end,
            "steps": out.steps,
            "rejections": out.rejections,
        },
        "prediction": _prediction_doc(prediction),
        "fitted": steady_to_json(out.state),
        "comparison": _comparison_doc(rc, prediction, out),
        "diagnostics": {
            "E0": E0,
            "E_final": final.energy,
            "I0": prediction.I0,
            "I_final": final.conserved,
            "conserved_drift_rel": abs(final.conserved - prediction.I0)
            / abs(prediction.I0),
            "residual_inf_final": final.residual_inf,
            "min_u_final": final.min_u,
            "max_u_final": final.max_u,
        },
        "metadata": {
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    }
    _write_json(run_dir / "summary.json", summary)
    print(f"{out.tag} at t = {out.t_end:.9g} after {out.steps} steps -> {run_dir}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    rc = _run_config_from_args(args)
    _, u0 = rc.spec().build()
    prediction = predict_limit(u0, rc.solver.p)
    if prediction.kind == "unique":
        doc = steady_to_json(prediction.state)
        doc["I0"] = prediction.I0
    else:
        doc = {"kind": "family", "I0": prediction.I0, "A0": prediction.A0}
    print(json.dumps(doc, default=_json_default))
    return 0


def cmd_steady(args: argparse.Namespace) -> int:
    a = _domain_from_flags(args)
    result = classify(a, args.p)
    doc = {
        "a": a,
        "p": args.p,
        "constants_only": result.constants_only,
        "k": result.k,
        "description": result.describe(),
    }
    if args.A is not None or args.I0 is not None:
        if args.A is None or args.I0 is None:
            raise ConfigError("--A and --I0 go together")
        if result.constants_only:
            raise ConfigError(f"the root solve needs a = k*pi; got a = {a!r}")
        doc["A"] = args.A
        doc["B"] = solve_BA(args.A, args.p, a, args.I0)
        if 1.0 < args.p < 1.5 and not result.constants_only:
            doc["A0"] = compute_A0(args.p, a, args.I0)
    print(json.dumps(doc, default=_json_default))
    return 0


def _parse_grid(text: str, what: str) -> list[float]:
    try:
        values = [float(chunk) for chunk in text.split(",") if chunk.strip()]
    except ValueError:
        raise ConfigError(f"bad {what} grid: {text!r}")
    if not values:
        raise ConfigError(f"empty {what} grid")
    return values


def cmd_sweep(args: argparse.Namespace) -> int:
    p_grid = _parse_grid(args.p_grid, "p")
    a_grid = _parse_grid(args.a_grid, "a")
    amp_grid = _parse_grid(args.amp_grid, "amplitude")
    solver_kwargs = {
        key: getattr(args, key)
        for key in _SOLVER_KEYS
        if getattr(args, key, None) is not None
    }
    base_cfg = SolverConfig(p=p_grid[0], **solver_kwargs)
    base_cfg.validate()
    result = run_sweep(
        p_grid, a_grid, amp_grid, base_cfg, n=args.n or 65, workers=args.workers
    )
    out_base = os.environ.get("NFLOW_OUTPUT_DIR") or args.output_dir or "runs"
    out_dir = Path(out_base) / (args.name or "sweep")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "sweep.csv"
    import csv as _csv

    with path.open("w", newline="") as handle:
        writer = _csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["p", "a", "amp", "E0", "outcome", "trigger", "t_end", "max_u", "fitted", "error"]
        )
        for cell in result.cells:
            writer.writerow(
                [
                    _fnum(cell["p"]),
                    _fnum(cell["a"]),
                    _fnum(cell["amp"]),
                    "" if cell["E0"] is None else _fnum(cell["E0"]),
                    cell["outcome"] or "",
                    cell["trigger"] or "",
                    "" if cell["t_end"] is None else _fnum(cell["t_end"]),
                    "" if cell["max_u"] is None else _fnum(cell["max_u"]),
                    "" if cell["fitted"] is None
                    else json.dumps(cell["fitted"], default=_json_default),
                    cell["error"] or "",
                ]
            )
    tally: dict[str, int] = {}
    for cell in result.cells:
        key = cell["outcome"] or "error"
        tally[key] = tally.get(key, 0) + 1
    print(f"{len(result.cells)} cells ({json.dumps(tally, sort_keys=True)}) -> {path}")
    return 0


def cmd_check_ls(args: argparse.Namespace) -> int:
    a_list = _parse_grid(args.a, "a")
    report = run_ls_suite(a_list, trials=args.trials, seed=args.seed, n=args.n or 129)
    print(json.dumps(report, indent=2, default=_json_default))
    return 1 if report["violations_total"] > 0 else 0


def cmd_curve(args: argparse.Namespace) -> int:
    rc = _run_config_from_args(args)
    _, u0 = rc.spec().build()
    result = reconstruct_curve(u0, rc.solver.p, samples=args.samples)
    run_dir = _resolve_run_dir(rc)
    path = run_dir / "curve.csv"
    rows = ["x,y"]
    for x, y in result.points:
        rows.append(f"{_fnum(x)},{_fnum(y)}")
    path.write_text("\n".join(rows) + "\n")
    print(
        json.dumps(
            {
                "closure_gap": result.closure_gap,
                "length": result.length,
                "points": int(result.points.shape[0]),
                "csv": str(path),
            },
            default=_json_default,
        )
    )
    return 0


def _domain_from_flags(args: argparse.Namespace) -> float:
    if args.a is not None and args.a_over_pi is not None:
        raise ConfigError("give a or a_over_pi, not both")
    if args.a_over_pi is not None:
        try:
            ratio = Fraction(args.a_over_pi)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad a_over_pi value {args.a_over_pi!r}")
        if ratio <= 0:
            raise ConfigError("a_over_pi must be positive")
        return float(ratio) * math.pi
    if args.a is None:
        raise ConfigError("domain length missing: set --a or --a-over-pi")
    return args.a


def _add_domain_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--a", type=float, help="domain length")
    parser.add_argument(
        "--a-over-pi",
        dest="a_over_pi",
        help="domain length as a rational multiple of pi, e.g. 2 or 3/2",
    )
    parser.add_argument("--n", type=int, help="number of grid nodes")


def _add_field_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=float, help="degeneracy exponent (> 1)")
    parser.add_argument(
        "--u0", help="initial data: constant then k:coeff terms, e.g. 2.0,1:0.5"
    )


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--step-tol", dest="step_tol", type=float)
    parser.add_argument("--dt-init", dest="dt_init", type=float)
    parser.add_argument("--dt-min", dest="dt_min", type=float)
    parser.add_argument("--dt-max", dest="dt_max", type=float)
    parser.add_argument("--blowup-threshold", dest="blowup_threshold", type=float)
    parser.add_argument("--conv-tol", dest="conv_tol", type=float)
    parser.add_argument("--conv-window", dest="conv_window", type=int)
    parser.add_argument("--t-max", dest="t_max", type=float)
    parser.add_argument("--record-every", dest="record_every", type=int)
    parser.add_argument(
        "--project-conservation",
        dest="project_conservation",
        action=argparse.BooleanOptionalAction,
        default=None,
    )


def _add_io_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--name", help="run directory name")
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nflow",
        description="Numerical laboratory for a degenerate nonlocal parabolic flow",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="evolve u0 and write trace.csv + summary.json")
    for attach in (_add_domain_flags, _add_field_flags, _add_solver_flags, _add_io_flags):
        attach(sim)
    sim.set_defaults(func=cmd_simulate)

    pred = sub.add_parser("predict", help="print the predicted limit for u0")
    for attach in (_add_domain_flags, _add_field_flags):
        attach(pred)
    pred.add_argument("--config", help="flat key = value config file")
    pred.set_defaults(func=cmd_predict)

    steady = sub.add_parser("steady", help="classify the steady-state family at (a, p)")
    steady.add_argument("--a", type=float)
    steady.add_argument("--a-over-pi", dest="a_over_pi")
    steady.add_argument("--p", type=float, required=True)
    steady.add_argument("--A", type=float, help="cosine amplitude for the root solve")
    steady.add_argument("--I0", type=float, help="conserved integral for the root solve")
    steady.set_defaults(func=cmd_steady)

    sweep = sub.add_parser("sweep", help="outcome grid over (p, a, amplitude)")
    sweep.add_argument("--p-grid", dest="p_grid", required=True)
    sweep.add_argument("--a-grid", dest="a_grid", required=True)
    sweep.add_argument("--amp-grid", dest="amp_grid", required=True)
    sweep.add_argument("--n", type=int)
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--output-dir", dest="output_dir")
    sweep.add_argument("--name")
    _add_solver_flags(sweep)
    sweep.set_defaults(func=cmd_sweep)

    check = sub.add_parser("check-ls", help="random-field audit of the gap inequality")
    check.add_argument("--a", required=True, help="comma-separated domain lengths")
    check.add_argument("--trials", type=int, default=1000)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--n", type=int)
    check.set_defaults(func=cmd_check_ls)

    curve = sub.add_parser("curve", help="reconstruct the closed curve for u0 on k*pi")
    for attach in (_add_domain_flags, _add_field_flags, _add_io_flags):
        attach(curve)
    curve.add_argument("--samples", type=int, default=4097)
    curve.set_defaults(func=cmd_curve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NFlowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

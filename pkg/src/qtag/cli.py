"""Command-line front end.

Three subcommands: ``run`` executes one transmission and reports its
heralded branches, ``sweep`` tabulates fidelities/efficiencies over a
misalignment-angle grid (and renders a figure next to the table), and
``verify`` cross-checks the sparse engine against the dense engine and the
closed forms on random parameter sets.

Angles are radians, or multiples of pi with a ``pi`` suffix (``0.25pi``).
Complex coefficients use Python notation (``0.6+0.8j``).  A JSON config
file may supply any flag value; explicit flags win.  Output files are
written atomically (temp file, then rename).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .analysis import DEFAULT_TOLERANCE, SWEEP_COLUMNS, SweepGrid, SweepResult, sweep, verify
from .errors import QtagError, UsageError
from .protocols import (
    ProtocolSpec,
    SourceCoefficients,
    TransmissionOutcome,
    Variant,
    herald_label,
    run_protocol,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2

_PROTOCOL_NAMES = tuple(v.value for v in Variant)

_COMMON_KEYS = {"out", "format", "seed"}
_CONFIG_KEYS = {
    "run": {"protocol", "n", "alpha", "beta", "theta", "eta"} | _COMMON_KEYS,
    "sweep": {"grid", "alpha", "beta", "eta", "plot", "no_plot"} | _COMMON_KEYS,
    "verify": {"trials", "tolerance"} | _COMMON_KEYS,
}


def parse_angle(value, key: str = "angle") -> float:
    """Parse radians or a pi-multiple string such as ``0.25pi``."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().lower()
    factor = 1.0
    if text.endswith("pi"):
        text = text[:-2].strip() or "1"
        factor = math.pi
    try:
        return float(text) * factor
    except ValueError:
        raise UsageError(f"{key}: malformed angle {value!r}") from None


def parse_angle_list(value, key: str = "--theta") -> tuple[float, ...]:
    if isinstance(value, str):
        items = [v for v in value.split(",") if v.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        raise UsageError(f"{key}: expected a comma-separated list, got {value!r}")
    if not items:
        raise UsageError(f"{key}: at least one angle required")
    return tuple(parse_angle(v, key) for v in items)


def parse_complex_coeff(value, key: str) -> complex:
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(str(value).strip().replace(" ", ""))
    except ValueError:
        raise UsageError(f"{key}: malformed number {value!r}") from None


def parse_grid(value, key: str = "--grid") -> tuple[float, float, int]:
    """Parse ``min:max:steps``, e.g. ``0:1pi:101``."""
    parts = str(value).split(":")
    if len(parts) != 3:
        raise UsageError(f"{key}: expected min:max:steps, got {value!r}")
    lo = parse_angle(parts[0], key)
    hi = parse_angle(parts[1], key)
    try:
        steps = int(parts[2])
    except ValueError:
        raise UsageError(f"{key}: malformed step count {parts[2]!r}") from None
    return lo, hi, steps


@dataclass
class RunConfig:
    """Validated invocation parameters for one command."""

    command: str
    variant: Variant | None = None
    n: int | None = None
    alpha: complex | None = None
    beta: complex | None = None
    thetas: tuple[float, ...] | None = None
    eta: float = 1.0
    theta_min: float = 0.0
    theta_max: float = math.pi
    steps: int = 101
    trials: int = 200
    tolerance: float = DEFAULT_TOLERANCE
    out: Path | None = None
    fmt: str = "csv"
    seed: int = 0
    plot: Path | None = None
    no_plot: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to SystemExit(2)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtag", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one transmission")
    run_p.add_argument("--protocol", choices=_PROTOCOL_NAMES)
    run_p.add_argument("--n", type=int, help="number of parties (at least 2)")
    run_p.add_argument("--alpha", help="H-component coefficient, e.g. 0.6+0.8j")
    run_p.add_argument("--beta", help="V-component coefficient")
    run_p.add_argument("--theta", help="per-party angles, e.g. 0.25pi,0.25pi")
    run_p.add_argument("--eta", help="gated-cell transmission in [0, 1]")

    sweep_p = sub.add_parser("sweep", help="tabulate a misalignment-angle grid")
    sweep_p.add_argument("--grid", help="min:max:steps, e.g. 0:1pi:101")
    sweep_p.add_argument("--alpha")
    sweep_p.add_argument("--beta")
    sweep_p.add_argument("--eta")
    sweep_p.add_argument("--plot", help="figure path (default: output path with .png)")
    sweep_p.add_argument(
        "--no-plot", action="store_true", default=None, help="skip the figure"
    )

    verify_p = sub.add_parser("verify", help="cross-check engines and closed forms")
    verify_p.add_argument("--trials", type=int)
    verify_p.add_argument("--tolerance", type=float)

    for p in (run_p, sweep_p, verify_p):
        p.add_argument("--config", help="JSON file with the same keys as the flags")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=("csv", "json"), dest="fmt")
        p.add_argument("--seed", type=int)
    return parser


def _load_config_file(path: str, command: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"--config: invalid JSON in {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"--config: {path!r} must hold a JSON object")
    allowed = _CONFIG_KEYS[command]
    for key in data:
        if key not in allowed:
            raise UsageError(f"--config: unknown key {key!r} for command {command!r}")
    return data


def _merge(ns: argparse.Namespace, command: str) -> dict[str, Any]:
    merged: dict[str, Any] = {}
    if ns.config is not None:
        merged.update(_load_config_file(ns.config, command))
    flag_names = {"fmt": "format", "no_plot": "no_plot"}
    for attr, value in vars(ns).items():
        if attr in ("command", "config") or value is None:
            continue
        merged[flag_names.get(attr, attr)] = value
    return merged


def _coefficients(merged: Mapping[str, Any]) -> tuple[complex, complex]:
    if "alpha" not in merged:
        raise UsageError("--alpha is required")
    if "beta" not in merged:
        raise UsageError("--beta is required")
    alpha = parse_complex_coeff(merged["alpha"], "--alpha")
    beta = parse_complex_coeff(merged["beta"], "--beta")
    nsq = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(nsq - 1.0) > 1e-9:
        raise UsageError(
            f"--alpha/--beta: |alpha|^2 + |beta|^2 = {nsq:.12g} differs from 1 "
            "by more than 1e-9"
        )
    return alpha, beta


def _as_int(merged: Mapping[str, Any], key: str, flag: str, default: int) -> int:
    if key not in merged:
        return default
    try:
        return int(merged[key])
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: malformed number {merged[key]!r}") from None


def _as_float(merged: Mapping[str, Any], key: str, flag: str, default: float) -> float:
    if key not in merged:
        return default
    try:
        return float(merged[key])
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: malformed number {merged[key]!r}") from None


def parse_config(argv) -> RunConfig:
    """Parse flags (and an optional config file) into a validated RunConfig."""
    ns = build_parser().parse_args(argv)
    command = ns.command
    merged = _merge(ns, command)
    cfg = RunConfig(command=command)
    cfg.seed = _as_int(merged, "seed", "--seed", 0)
    cfg.fmt = str(merged.get("format", "csv"))
    if cfg.fmt not in ("csv", "json"):
        raise UsageError(f"--format: must be csv or json, got {cfg.fmt!r}")
    if "out" in merged:
        cfg.out = Path(str(merged["out"]))

    if command == "run":
        if "protocol" not in merged:
            raise UsageError("--protocol is required")
        try:
            cfg.variant = Variant(str(merged["protocol"]))
        except ValueError:
            raise UsageError(
                f"--protocol: must be one of {', '.join(_PROTOCOL_NAMES)}, "
                f"got {merged['protocol']!r}"
            ) from None
        if "n" not in merged:
            raise UsageError("--n is required")
        cfg.n = _as_int(merged, "n", "--n", 0)
        if cfg.n < 2:
            raise UsageError(f"--n: at least 2 parties required, got {cfg.n}")
        cfg.alpha, cfg.beta = _coefficients(merged)
        if "theta" not in merged:
            raise UsageError("--theta is required")
        cfg.thetas = parse_angle_list(merged["theta"])
        if len(cfg.thetas) != cfg.n:
            raise UsageError(
                f"--theta: {len(cfg.thetas)} angles given for --n {cfg.n}"
            )
        cfg.eta = _as_float(merged, "eta", "--eta", 1.0)
        if not 0.0 <= cfg.eta <= 1.0:
            raise UsageError(f"--eta: must lie in [0, 1], got {cfg.eta!r}")
        return cfg

    if command == "sweep":
        if "grid" in merged:
            cfg.theta_min, cfg.theta_max, cfg.steps = parse_grid(merged["grid"])
        if cfg.steps < 2:
            raise UsageError(f"--grid: at least 2 steps required, got {cfg.steps}")
        if not cfg.theta_min < cfg.theta_max:
            raise UsageError("--grid: min must be below max")
        if "alpha" in merged or "beta" in merged:
            cfg.alpha, cfg.beta = _coefficients(merged)
        cfg.eta = _as_float(merged, "eta", "--eta", 1.0)
        if not 0.0 <= cfg.eta <= 1.0:
            raise UsageError(f"--eta: must lie in [0, 1], got {cfg.eta!r}")
        if cfg.out is None:
            raise UsageError("--out is required for sweep")
        if "plot" in merged:
            cfg.plot = Path(str(merged["plot"]))
        cfg.no_plot = bool(merged.get("no_plot", False))
        return cfg

    cfg.trials = _as_int(merged, "trials", "--trials", 200)
    if cfg.trials < 1:
        raise UsageError(f"--trials: must be at least 1, got {cfg.trials}")
    cfg.tolerance = _as_float(merged, "tolerance", "--tolerance", DEFAULT_TOLERANCE)
    return cfg


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _complex_pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def _state_terms(state) -> list[dict[str, Any]]:
    return [
        {
            "modes": [[m.pol.name, m.bin, int(m.path)] for m in ket],
            "amplitude": _complex_pair(amp),
        }
        for ket, amp in state.terms()
    ]


def _run_csv(outcome: TransmissionOutcome) -> str:
    lines = ["herald,probability,fidelity"]
    for pattern, branch in sorted(outcome.branches.items()):
        lines.append(
            f"{herald_label(pattern)},{_fmt(branch.probability)},{_fmt(branch.fidelity)}"
        )
    return "\n".join(lines) + "\n"


def _run_json(cfg: RunConfig, outcome: TransmissionOutcome) -> str:
    spec = outcome.spec
    doc = {
        "command": "run",
        "protocol": spec.variant.value,
        "n": spec.n_parties,
        "alpha": _complex_pair(spec.coeffs.alpha),
        "beta": _complex_pair(spec.coeffs.beta),
        "thetas": list(spec.thetas),
        "eta": spec.eta,
        "seed": cfg.seed,
        "total_success_probability": outcome.total_success_probability,
        "overall_fidelity_of_accepted": outcome.overall_fidelity_of_accepted,
        "branches": {
            herald_label(pattern): {
                "probability": branch.probability,
                "fidelity": branch.fidelity,
                "state": _state_terms(branch.state),
            }
            for pattern, branch in outcome.branches.items()
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sweep_csv(result: SweepResult) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in result.rows:
        lines.append(",".join(_fmt(v) for v in row.values()))
    return "\n".join(lines) + "\n"


def _sweep_json(cfg: RunConfig, result: SweepResult) -> str:
    grid = result.grid
    doc = {
        "command": "sweep",
        "grid": {
            "theta_min": grid.theta_min,
            "theta_max": grid.theta_max,
            "steps": grid.steps,
            "alpha": _complex_pair(grid.coeffs.alpha),
            "beta": _complex_pair(grid.coeffs.beta),
            "eta": grid.eta,
        },
        "seed": cfg.seed,
        "columns": list(SWEEP_COLUMNS),
        "simulated": [list(r.values()) for r in result.simulated],
        "closed_form": [list(r.values()) for r in result.closed_form],
        "disagreement": list(result.disagreement),
        "max_disagreement": result.max_disagreement,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _execute_run(cfg: RunConfig) -> int:
    spec = ProtocolSpec(
        cfg.n,
        SourceCoefficients(cfg.alpha, cfg.beta),
        cfg.variant,
        cfg.thetas,
        eta=cfg.eta,
    )
    outcome = run_protocol(spec)
    print(
        f"P={outcome.total_success_probability:.6f} "
        f"F={outcome.overall_fidelity_of_accepted:.6f}"
    )
    if cfg.out is not None:
        text = _run_json(cfg, outcome) if cfg.fmt == "json" else _run_csv(outcome)
        _atomic_write(cfg.out, text)
    return EXIT_OK


def _execute_sweep(cfg: RunConfig) -> int:
    kwargs: dict[str, Any] = {
        "theta_min": cfg.theta_min,
        "theta_max": cfg.theta_max,
        "steps": cfg.steps,
        "eta": cfg.eta,
    }
    if cfg.alpha is not None:
        kwargs["coeffs"] = SourceCoefficients(cfg.alpha, cfg.beta)
    grid = SweepGrid(**kwargs)
    result = sweep(grid)
    text = _sweep_json(cfg, result) if cfg.fmt == "json" else _sweep_csv(result)
    _atomic_write(cfg.out, text)
    outputs = [str(cfg.out)]
    if not cfg.no_plot:
        from .plotting import render_sweep_figure

        fig_path = cfg.plot if cfg.plot is not None else cfg.out.with_suffix(".png")
        render_sweep_figure(result, fig_path)
        outputs.append(str(fig_path))
    print(
        f"rows={cfg.steps} max_disagreement={result.max_disagreement:.3e} "
        f"out={' '.join(outputs)}"
    )
    return EXIT_OK


def _execute_verify(cfg: RunConfig) -> int:
    report = verify(trials=cfg.trials, seed=cfg.seed, tolerance=cfg.tolerance)
    status = "pass" if report.passed else "FAIL"
    print(
        f"trials={report.trials} max_disagreement={report.max_disagreement:.3e} "
        f"{status}"
    )
    for failure in report.failures:
        print(failure, file=sys.stderr)
    if cfg.out is not None:
        doc = {
            "command": "verify",
            "trials": report.trials,
            "seed": report.seed,
            "tolerance": report.tolerance,
            "max_disagreement": report.max_disagreement,
            "passed": report.passed,
            "failures": list(report.failures),
        }
        _atomic_write(cfg.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def execute(cfg: RunConfig) -> int:
    """Run one validated command; returns the process exit status."""
    if cfg.command == "run":
        return _execute_run(cfg)
    if cfg.command == "sweep":
        return _execute_sweep(cfg)
    return _execute_verify(cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return execute(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except QtagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())

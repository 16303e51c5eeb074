"""Command-line front end: load setups, run the bound sweeps, certification,
robustness, and steerable-weight pipelines, and emit CSV/JSON reports.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error,
4 certification failure, 5 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import tsi
from .assemblage import (
    assemblage_distance,
    assemblage_from,
    assemblage_from_json,
    consistency_check,
    ideal_assemblage,
    measurements_from_json,
    random_coefficients,
    target_ket,
)
from .certify import (
    certify_state,
    ideal_measurements,
    reconstruct_coefficients,
    report_to_json,
)
from .qmath import BipartiteDims
from .robust import NoiseModel, robust_certification_experiment
from .steerweight import SolverError, steerable_weight

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_CERTIFICATION = 4
EXIT_SOLVER = 5

_MODEL_ALIASES = {
    "white-noise": "white_noise",
    "white_noise": "white_noise",
    "dephasing": "bob_dephasing",
    "bob-dephasing": "bob_dephasing",
    "bob_dephasing": "bob_dephasing",
    "rotation": "measurement_rotation",
    "measurement-rotation": "measurement_rotation",
    "measurement_rotation": "measurement_rotation",
}

BOUNDS_COLUMNS = [
    "alpha", "beta", "local_bound", "quantum_bound", "bruteforce_local", "numeric_quantum",
]
ROBUST_COLUMNS = [
    "d", "model", "strength", "epsilon", "state_dist", "state_bound",
    "meas_dist_max", "meas_bound", "lemma2_max", "lemma2_bound",
    "lemma3_max", "lemma3_bound", "pass",
]


@dataclass(frozen=True)
class RunConfig:
    """One validated invocation: the subcommand plus its inputs and grids."""

    command: str
    out_path: str | None = None
    seed: int = 42
    tol: float = 1e-9
    d: int | None = None
    alphas: tuple[float, ...] = ()
    beta: float | None = None
    tilt: bool = False
    grid: int = 100_000
    state_path: str | None = None
    measurements: str = "ideal"
    model: str | None = None
    strengths: tuple[float, ...] = ()
    lemma_samples: int = 100
    assemblage_path: str | None = None
    sw_tol: float = 1e-7
    max_iter: int = 200


def parse_range(text: str) -> tuple[float, ...]:
    """Sweep grammar: a bare value, start:stop:step, or start:stop:logN."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(text),)
    if len(parts) != 3:
        raise ValueError(f"bad range {text!r}: use start:stop:step or start:stop:logN")
    start, stop = float(parts[0]), float(parts[1])
    tail = parts[2]
    if tail.startswith("log"):
        n = int(tail[3:])
        if n < 1:
            raise ValueError("log ranges need at least one point")
        if start <= 0.0 or stop <= 0.0:
            raise ValueError("log ranges need positive endpoints")
        return tuple(
            float(v) for v in np.logspace(math.log10(start), math.log10(stop), n)
        )
    step = float(tail)
    if step <= 0.0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must not be below start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + k * step for k in range(count))


def _range_arg(text: str) -> tuple[float, ...]:
    try:
        return parse_range(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_args(argv: list[str]) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="steerlab",
        description="steering-based certification toolbox: inequality bounds, "
        "isometric state certification, robustness sweeps, steerable weight",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="sweep tilted-inequality bounds to CSV")
    b.add_argument("--alpha", type=_range_arg, required=True, metavar="RANGE",
                   help="tilt values, start:stop:step or start:stop:logN")
    beta_rule = b.add_mutually_exclusive_group(required=True)
    beta_rule.add_argument("--tilt", action="store_true",
                           help="derive beta = sqrt(alpha^2 + 1) per point")
    beta_rule.add_argument("--beta", type=float, help="fixed beta for every alpha")
    b.add_argument("--grid", type=int, default=100_000,
                   help="hidden-strategy grid for the brute-force local bound")
    b.add_argument("--out", help="CSV path (stdout when omitted)")

    c = sub.add_parser("certify", help="run the certification pipeline on a state file")
    c.add_argument("--state", required=True, help="state JSON with a ket or rho field")
    c.add_argument("--measurements", default="ideal",
                   help='"ideal" or a measurement JSON path')
    c.add_argument("--d", type=int, help="trusted dimension (defaults to the file's d_B)")
    c.add_argument("--tol", type=float, default=1e-9,
                   help="pass threshold for residuals and fidelity deficits")
    c.add_argument("--out", help="report JSON path (stdout when omitted)")

    r = sub.add_parser("robust", help="noise sweep against the analytic robustness bounds")
    r.add_argument("--d", type=int, required=True, help="local dimension of the target")
    r.add_argument("--model", required=True, choices=sorted(_MODEL_ALIASES),
                   help="noise model")
    r.add_argument("--strength", type=_range_arg, required=True, metavar="RANGE",
                   help="model strengths, start:stop:step or start:stop:logN")
    r.add_argument("--samples", type=int, default=100,
                   help="random triples per trace-norm lemma check")
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--out", help="CSV path (stdout when omitted)")

    s = sub.add_parser("sw", help="steerable weight of an assemblage file")
    s.add_argument("--assemblage", required=True, help="assemblage JSON path")
    s.add_argument("--tol", type=float, default=1e-7, help="certified duality-gap target")
    s.add_argument("--max-iter", type=int, default=200, help="Newton step cap")
    s.add_argument("--out", help="output JSON path (stdout when omitted)")

    dm = sub.add_parser("demo", help="narrated end-to-end run on a seeded random target")
    dm.add_argument("--d", type=int, default=2)
    dm.add_argument("--seed", type=int, default=42)
    dm.add_argument("--tol", type=float, default=1e-9)

    ns = parser.parse_args(argv)
    if ns.command == "bounds":
        return RunConfig(command="bounds", alphas=ns.alpha, tilt=ns.tilt,
                         beta=ns.beta, grid=ns.grid, out_path=ns.out)
    if ns.command == "certify":
        return RunConfig(command="certify", state_path=ns.state,
                         measurements=ns.measurements, d=ns.d, tol=ns.tol,
                         out_path=ns.out)
    if ns.command == "robust":
        return RunConfig(command="robust", d=ns.d, model=ns.model,
                         strengths=ns.strength, lemma_samples=ns.samples,
                         seed=ns.seed, out_path=ns.out)
    if ns.command == "sw":
        return RunConfig(command="sw", assemblage_path=ns.assemblage,
                         sw_tol=ns.tol, max_iter=ns.max_iter, out_path=ns.out)
    return RunConfig(command="demo", d=ns.d, seed=ns.seed, tol=ns.tol)


def _fmt(x: float) -> str:
    """Every emitted float carries 12 significant digits."""
    return f"{float(x):.12g}"


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    return str(value)


def _jsonify(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (float, np.floating)):
        return float(_fmt(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {key: _jsonify(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def emit_report(report, path: str | None, fmt: str) -> None:
    """Write a report deterministically: field order as given, floats at 12
    significant digits. CSV reports are {"columns": [...], "rows": [[...]]},
    JSON reports any mapping."""
    if fmt == "json":
        text = json.dumps(_jsonify(report), indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report["columns"])
        for row in report["rows"]:
            writer.writerow([_cell(v) for v in row])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_state(path: str) -> tuple[np.ndarray, BipartiteDims]:
    """State JSON: {"d_A", "d_B", "ket": [[re, im], ...]} or the same with a
    row-major "rho" entry list."""
    blob = _load_json(path)
    try:
        dims = BipartiteDims(d_A=int(blob["d_A"]), d_B=int(blob["d_B"]))
    except KeyError as exc:
        raise ValueError(f"state file missing field {exc}") from exc
    if "ket" in blob:
        state = np.array([complex(re, im) for re, im in blob["ket"]])
        if state.size != dims.dim:
            raise ValueError("ket length does not match d_A * d_B")
        return state, dims
    if "rho" in blob:
        flat = np.array([complex(re, im) for re, im in blob["rho"]])
        if flat.size != dims.dim**2:
            raise ValueError("rho entry count does not match (d_A * d_B)^2")
        return flat.reshape(dims.dim, dims.dim), dims
    raise ValueError("state file needs a 'ket' or 'rho' field")


def _worker_cap(n_jobs: int) -> int:
    raw = os.environ.get("STEERLAB_THREADS")
    if raw is None or raw == "":
        cap = os.cpu_count() or 1
    else:
        try:
            cap = int(raw)
        except ValueError as exc:
            raise ValueError(f"STEERLAB_THREADS must be an integer, got {raw!r}") from exc
        if cap < 1:
            raise ValueError("STEERLAB_THREADS must be at least 1")
    return max(1, min(cap, n_jobs))


def _sweep(fn, items):
    """Evaluate sweep points, possibly in parallel; result order always
    follows input order."""
    items = list(items)
    workers = _worker_cap(len(items))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _run_bounds(config: RunConfig) -> int:
    def point(alpha: float) -> list[float]:
        beta = math.sqrt(alpha**2 + 1.0) if config.tilt else float(config.beta)
        p = tsi.TsiParams(alpha=alpha, beta=beta)
        # angle where the chained quantum bound is attained
        ratio = (1.0 + beta**2 - alpha**2) / (1.0 + beta**2 + alpha**2)
        theta = 0.5 * math.asin(math.sqrt(min(max(ratio, 1e-12), 1.0)))
        return [
            alpha,
            beta,
            tsi.local_bound(p),
            tsi.quantum_bound(p),
            tsi.local_bound_bruteforce(p, config.grid),
            tsi.numeric_max(theta, p),
        ]

    rows = _sweep(point, config.alphas)
    emit_report({"columns": BOUNDS_COLUMNS, "rows": rows}, config.out_path, "csv")
    return EXIT_OK


def _run_certify(config: RunConfig) -> int:
    state, dims = load_state(config.state_path)
    if config.d is not None and config.d != dims.d_B:
        raise ValueError(f"--d {config.d} does not match the state file's d_B {dims.d_B}")
    if config.measurements == "ideal":
        meas = ideal_measurements(dims.d_B)
    else:
        meas = measurements_from_json(_load_json(config.measurements))
    A = assemblage_from(state, dims, meas)
    coeffs = reconstruct_coefficients(A)
    report = certify_state(state, dims, meas, coeffs, tol=config.tol)
    emit_report(report_to_json(report), config.out_path, "json")
    return EXIT_OK if report.passed else EXIT_CERTIFICATION


def _run_robust(config: RunConfig) -> int:
    model = NoiseModel(kind=_MODEL_ALIASES[config.model], strength=0.0, seed=config.seed)

    def point(strength: float):
        return robust_certification_experiment(
            config.d, model, [strength], lemma_samples=config.lemma_samples
        )[0]

    records = _sweep(point, config.strengths)
    rows = [
        [
            r.d, r.model, r.strength, r.epsilon,
            r.state_dist_observed, r.state_bound,
            r.meas_dist_max, r.meas_bound,
            r.lemma2_max, r.lemma2_bound,
            r.lemma3_max, r.lemma3_bound,
            r.passed,
        ]
        for r in records
    ]
    emit_report({"columns": ROBUST_COLUMNS, "rows": rows}, config.out_path, "csv")
    return EXIT_OK if all(r.passed for r in records) else EXIT_CERTIFICATION


def _run_sw(config: RunConfig) -> int:
    A = assemblage_from_json(_load_json(config.assemblage_path))
    solution = steerable_weight(A, tol=config.sw_tol, max_iterations=config.max_iter)
    emit_report(
        {
            "sw": solution.sw,
            "primal": solution.primal,
            "gap": solution.gap,
            "iterations": solution.iterations,
        },
        config.out_path,
        "json",
    )
    return EXIT_OK


def _run_demo(config: RunConfig) -> int:
    if config.d is None or config.d < 2:
        raise ValueError("need d >= 2")
    d = config.d
    rng = np.random.default_rng(config.seed)
    coeffs = random_coefficients(d, rng)
    dims = BipartiteDims(d_A=d, d_B=d)
    psi = target_ket(coeffs)
    meas = ideal_measurements(d)

    print(f"demo: random Schmidt-diagonal target, d = {d}, seed = {config.seed}")
    print("step 1: Alice measures her untrusted box; Bob tomographs his register")
    A = assemblage_from(psi, dims, meas)
    check = consistency_check(A, config.tol)
    print(f"  collected {len(A.sigma)} assemblage elements over 3 settings")
    print(f"  positivity residual       {_fmt(check.positivity_residual)}")
    print(f"  non-signalling residual   {_fmt(check.non_signalling_residual)}")
    print(f"  normalization residual    {_fmt(check.normalization_residual)}")

    print("step 2: the observed assemblage matches the ideal pair structure")
    recon = reconstruct_coefficients(A)
    structure = assemblage_distance(A, ideal_assemblage(recon))
    recon_err = float(np.max(np.abs(recon.c - coeffs.c)))
    print(f"  structure residual        {_fmt(structure)}")
    print(f"  coefficient error         {_fmt(recon_err)}")

    print("step 3: the extraction isometry certifies the state and measurements")
    report = certify_state(psi, dims, meas, recon, tol=config.tol)
    pair_gap = max(abs(v.value - v.target) for v in report.subspace_violations)
    print(f"  sufficient residual       {_fmt(report.sufficient_residual)}")
    print(f"  pair violation gap        {_fmt(pair_gap)}")
    print(f"  state fidelity            {_fmt(report.state_fidelity)}")
    print(f"  min measurement fidelity  {_fmt(min(report.measurement_fidelities.values()))}")
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_CERTIFICATION


_RUNNERS = {
    "bounds": _run_bounds,
    "certify": _run_certify,
    "robust": _run_robust,
    "sw": _run_sw,
    "demo": _run_demo,
}


def run(config: RunConfig) -> int:
    return _RUNNERS[config.command](config)


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return EXIT_OK if code == 0 else EXIT_USAGE
    try:
        return run(config)
    except SolverError as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

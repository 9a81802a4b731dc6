"""Batch front-end: named experiments sweeping parameters into CSV datasets.

Every command writes one CSV plus a JSON run manifest listing the exact
invocation, seed, code version, wall time, and output files.  Numeric cells
use the shortest round-trip decimal form, so identical invocations produce
byte-identical CSV bodies.  Exit codes: 0 success, 2 validation error,
3 size-guard refusal.  The worker count for grid sweeps comes from the
SPTGAME_WORKERS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import free_fermion, game, metts, spin_model, thermal_cluster
from .game import GameSpec, min_win_prob_state, play_sampled, quantum_win_prob
from .pauli import NONTRIVIAL, ORDERED_PAIRS, string_order, symmetry_rep
from .spin_model import GuardError, ModelParams
from .thermal_cluster import ThermalPoint


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    version: str
    wall_time_s: float
    outputs: list[str]


class ValidationError(ValueError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(out_dir: Path, name: str, manifest: RunManifest) -> None:
    with open(out_dir / f"{name}.manifest.json", "w") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad numeric list {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad integer list {text!r}") from exc


def _temperature_grid(args) -> list[float]:
    if args.tsteps < 1:
        raise ValidationError("need at least one temperature step")
    if args.tmin <= 0 or args.tmax < args.tmin:
        raise ValidationError("need 0 < tmin <= tmax")
    if args.tsteps == 1:
        return [args.tmin]
    step = (args.tmax - args.tmin) / (args.tsteps - 1)
    return [args.tmin + i * step for i in range(args.tsteps)]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SPTGAME_WORKERS", "1")))
    except ValueError:
        return 1


def _grid_map(func, points: list):
    """Evaluate grid points, possibly in a worker pool, in grid order."""
    n_workers = _workers()
    if n_workers == 1 or len(points) <= 1:
        return [func(point) for point in points]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(func, points))


# -- cluster-exact -----------------------------------------------------------


def cmd_cluster_exact(args) -> list[str]:
    ns = _int_list(args.n)
    temps = _temperature_grid(args)
    rows = []
    for n in ns:
        t_c = thermal_cluster.critical_temperature(n, args.delta)
        for temperature in temps:
            point = ThermalPoint(n, 1.0 / temperature, args.delta)
            rows.append((n, temperature, thermal_cluster.min_win(point), t_c))
    out = Path(args.out) / "cluster_exact.csv"
    _write_csv(out, ["n", "T", "P_min", "T_c"], rows)
    _validate_cluster_exact(out)
    return [str(out)]


def _validate_cluster_exact(path: Path) -> None:
    """Re-read the file and check the physical monotonicities survived."""
    with open(path) as fh:
        reader = csv.DictReader(fh)
        by_n: dict[int, list[tuple[float, float]]] = {}
        for record in reader:
            by_n.setdefault(int(record["n"]), []).append(
                (float(record["T"]), float(record["P_min"]))
            )
    for n, pairs in by_n.items():
        pairs.sort()
        probs = [p for _, p in pairs]
        if any(a < b - 1e-15 for a, b in zip(probs, probs[1:])):
            raise ValidationError(f"P_min not monotone in T for n={n}")


# -- phase-diagram -----------------------------------------------------------


def _phase_cell(task):
    n, j_x, j_zz, delta = task
    params = ModelParams(n, j_x, j_zz, delta)
    result = spin_model.ground_state(params)
    span_end = 1 + n // 6
    min_sop = min(
        spin_model.expectation(result.state, string_order(g, 1, span_end, n))
        for g in NONTRIVIAL
    )
    p_min, _ = min_win_prob_state(result.state, n // 2)
    return (j_x, j_zz, min_sop, p_min, result.degenerate)


def cmd_phase_diagram(args) -> list[str]:
    n = int(args.n)
    if n > 12:
        raise GuardError(f"phase diagram is dense-backend only (n <= 12), got {n}")
    if n % 6:
        raise ValidationError("phase diagram needs 6 | n for equidistant corners")
    jxs = _float_list(args.jx)
    jzzs = _float_list(args.jzz)
    tasks = [(n, j_x, j_zz, args.delta) for j_x in jxs for j_zz in jzzs]
    rows = _grid_map(_phase_cell, tasks)
    out = Path(args.out) / "phase_diagram.csv"
    _write_csv(out, ["J_X", "J_ZZ", "min_sop", "P_min", "degenerate"], rows)
    return [str(out)]


# -- axis ----------------------------------------------------------------------


def _axis_point(task):
    axis, j, n, temperature, delta = task
    block = []
    probs = {}
    sets = {}
    for g, h in ORDERED_PAIRS:
        es = free_fermion.axis_expectations(j, axis, n, temperature, (g, h), delta=delta)
        sets[(g.label, h.label)] = es
        probs[(g.label, h.label)] = quantum_win_prob(es)
    p_min = min(probs.values())
    for (gl, hl), es in sets.items():
        block.append(
            (axis, j, n, temperature, gl, hl, es.u_g, es.u_h, es.u_gh,
             es.twist, es.u_g_twist, probs[(gl, hl)], p_min)
        )
    return block


def cmd_axis(args) -> list[str]:
    axis = args.axis.upper()
    if axis not in ("X", "ZZ"):
        raise ValidationError(f"axis must be X or ZZ, got {args.axis!r}")
    js = _float_list(args.jx if axis == "X" else args.jzz)
    n = int(args.n)
    temps = _temperature_grid(args)
    tasks = [(axis, j, n, temperature, args.delta) for j in js for temperature in temps]
    blocks = _grid_map(_axis_point, tasks)
    rows = [row for block in blocks for row in block]
    out = Path(args.out) / "axis.csv"
    _write_csv(
        out,
        ["axis", "J", "n", "T", "g", "h", "U_g", "U_h", "U_gh",
         "T_twist", "UgT", "P", "P_min"],
        rows,
    )
    return [str(out)]


# -- metts -----------------------------------------------------------------------


def _parse_points(args) -> list[tuple[float, float, float]]:
    points = []
    for text in args.point or []:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"point {text!r} is not JX:JZZ:T")
        points.append(tuple(float(p) for p in parts))
    if not points:
        raise ValidationError("metts needs at least one --point JX:JZZ:T")
    return points


def cmd_metts(args) -> list[str]:
    n = int(args.n)
    points = _parse_points(args)
    rows = []
    for index, (j_x, j_zz, temperature) in enumerate(points):
        if temperature <= 0:
            raise ValidationError("temperature must be positive")
        params = ModelParams(n, j_x, j_zz, args.delta)
        seed = args.seed + index
        config = metts.MettsConfig(
            beta=1.0 / temperature,
            num_iterations=args.iters,
            warmup=args.warmup,
            collapse_policy=args.policy,
            seed=seed,
        )
        observables = {}
        for g, h in ORDERED_PAIRS:
            for label, op in _pair_observables(n, g, h).items():
                observables.setdefault(label, op)
        run = metts.run_metts(config, params, observables)
        for label in sorted(observables):
            rep = run.reports[label]
            rows.append((j_x, j_zz, temperature, n, label, rep.mean, rep.stderr,
                         rep.tau, args.iters, seed))
        p_rows, p_min_row = _metts_win_rows(run, n)
        for label, mean, err in p_rows:
            rows.append((j_x, j_zz, temperature, n, label, mean, err,
                         1.0, args.iters, seed))
        rows.append((j_x, j_zz, temperature, n, p_min_row[0], p_min_row[1],
                     p_min_row[2], 1.0, args.iters, seed))
    out = Path(args.out) / "metts.csv"
    _write_csv(
        out,
        ["J_X", "J_ZZ", "T", "n", "observable", "mean", "stderr", "tau", "N_I", "seed"],
        rows,
    )
    return [str(out)]


def _pair_observables(n, g, h):
    span_end = 1 + max(1, n // 6)
    from .pauli import twisted_string_order_cached

    u_g = symmetry_rep(g, n)
    twist = twisted_string_order_cached(g, h, 1, span_end, n)
    return {
        f"U({g.label})": u_g,
        f"U({h.label})": symmetry_rep(h, n),
        f"U({(g * h).label})": symmetry_rep(g * h, n),
        f"T({g.label},{h.label})": twist,
        f"U({g.label})T({g.label},{h.label})": u_g * twist,
    }


def _metts_win_rows(run, n):
    """Per-pair winning probabilities with linearly propagated error bars."""
    p_rows = []
    best = None
    for g, h in ORDERED_PAIRS:
        labels = list(_pair_observables(n, g, h))
        reps = [run.reports[label] for label in labels]
        means = [r.mean for r in reps]
        errs = [r.stderr for r in reps]
        coeffs = [12.0, 1.0, 1.0, 3.0, 3.0]
        p = (12.0 * (1.0 + means[0]) + means[1] + means[2]
             - 3.0 * (means[3] + means[4])) / 32.0
        err = math.sqrt(sum((c * e) ** 2 for c, e in zip(coeffs, errs))) / 32.0
        label = f"P({g.label},{h.label})"
        p_rows.append((label, p, err))
        if best is None or p < best[1]:
            best = (f"P_min", p, err)
    return p_rows, best


# -- game --------------------------------------------------------------------------


def cmd_game(args) -> list[str]:
    n = int(args.n)
    if n % 6:
        raise ValidationError("game sweep needs 6 | n for equidistant corners")
    params = ModelParams(n, args.jx_val, args.jzz_val, args.delta)
    if args.source == "cluster":
        state = spin_model.prepare_cluster_state(n)
    elif args.source == "ground":
        state = spin_model.ground_state(params).state
    elif args.source == "thermal-dense":
        if args.t is None:
            raise ValidationError("thermal-dense needs --t TEMPERATURE")
        state = spin_model.gibbs_density(params, args.t)
    else:
        raise ValidationError(f"unknown source {args.source!r}")
    rows = []
    for index, (g, h) in enumerate(ORDERED_PAIRS):
        spec = GameSpec.equidistant(n // 2, (g, h))
        rng = np.random.default_rng(args.seed + index)
        result = play_sampled(spec, state, args.trials, rng)
        analytic = game.win_probability(state, spec)
        rows.append((n, args.source, g.label, h.label, args.trials,
                     result.rate, analytic, result.sigma))
    out = Path(args.out) / "game.csv"
    _write_csv(
        out,
        ["n", "source", "g", "h", "trials", "empirical", "analytic", "sigma"],
        rows,
    )
    return [str(out)]


# -- classical -----------------------------------------------------------------------


def cmd_classical(args) -> list[str]:
    result = game.classical_optimum_3player()
    out = Path(args.out) / "classical.csv"
    _write_csv(
        out,
        ["optimum", "witness_p1", "witness_p2", "witness_p3",
         "optimum_fixed_b", "strategies_enumerated"],
        [(result.optimum, *result.witness, result.optimum_fixed_b,
          result.strategies_enumerated)],
    )
    return [str(out)]


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sptgame",
        description="Triangle-game winning probabilities for thermal cluster chains",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default=0):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--delta", type=float, default=2.0)
        p.add_argument("--seed", type=int, default=seed_default)

    p = sub.add_parser("cluster-exact", help="closed-form thermal cluster sweep")
    common(p)
    p.add_argument("--n", default="64", help="comma-separated chain lengths")
    p.add_argument("--tmin", type=float, default=0.1)
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--tsteps", type=int, default=19)
    p.set_defaults(func=cmd_cluster_exact)

    p = sub.add_parser("phase-diagram", help="ground-state grid on the dense backend")
    common(p)
    p.add_argument("--n", default="12")
    p.add_argument("--jx", default="0,0.4,0.8,1.2,1.6")
    p.add_argument("--jzz", default="0,0.4,0.8,1.2,1.6")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("axis", help="exact free-fermion axis sweep")
    common(p)
    p.add_argument("--axis", default="X")
    p.add_argument("--jx", default="0.5")
    p.add_argument("--jzz", default="0.5")
    p.add_argument("--n", default="64")
    p.add_argument("--tmin", type=float, default=0.2)
    p.add_argument("--tmax", type=float, default=0.8)
    p.add_argument("--tsteps", type=int, default=13)
    p.set_defaults(func=cmd_axis)

    p = sub.add_parser("metts", help="METTS chains at phase-space points")
    common(p)
    p.add_argument("--n", default="8")
    p.add_argument("--point", action="append", help="JX:JZZ:T, repeatable")
    p.add_argument("--policy", default="z",
                   choices=metts.COLLAPSE_POLICIES)
    p.add_argument("--iters", type=int, default=110)
    p.add_argument("--warmup", type=int, default=10)
    p.set_defaults(func=cmd_metts)

    p = sub.add_parser("game", help="sampled play against the analytic value")
    common(p)
    p.add_argument("--n", default="6")
    p.add_argument("--source", default="cluster",
                   choices=("cluster", "ground", "thermal-dense"))
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--jx", dest="jx_val", type=float, default=0.0)
    p.add_argument("--jzz", dest="jzz_val", type=float, default=0.0)
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("classical", help="3-player brute-force optimum")
    common(p)
    p.set_defaults(func=cmd_classical)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        start = time.time()
        outputs = args.func(args)
        manifest = RunManifest(
            command=args.command,
            parameters={
                k: v for k, v in vars(args).items()
                if k not in ("func", "command") and not callable(v)
            },
            seed=getattr(args, "seed", 0),
            version=__version__,
            wall_time_s=round(time.time() - start, 3),
            outputs=outputs,
        )
        _write_manifest(out_dir, args.command.replace("-", "_"), manifest)
    except GuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError) as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Three subcommands:

* ``sweep``: run a configured u sweep and write CSV or JSON rows.
* ``check``: run the structural invariant suites and report each one.
* ``oracle``: regenerate or validate the on-disk junction coefficient cache.

Exit codes: 0 success, 2 configuration error, 3 convergence gate failure,
4 invariant violation (including cache validation mismatch).
"""

from __future__ import annotations

import argparse
import dataclasses
import pathlib
import sys

import numpy as np

from . import blocks, cache, negativity, oracles, states, sweep
from ._version import __version__
from .bogoliubov import InvariantViolation
from .config import PRESETS, load_config, parse_config, preset_text
from .sweep import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_INVARIANT = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavityent",
        description="Perturbative entanglement of modes in an accelerated cavity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a u sweep from a config file or preset")
    p_sweep.add_argument(
        "config", help=f"config path or preset name ({', '.join(PRESETS)})"
    )
    p_sweep.add_argument("--out", default="-", help="output path (default: stdout)")
    p_sweep.add_argument(
        "--format", choices=("csv", "json"), default=None,
        help="output format (default: csv, or json when --out ends in .json)",
    )
    p_sweep.add_argument("--nmax", type=int, default=None, help="override n_max")
    p_sweep.add_argument("--h", type=float, default=None, help="override the probe h")
    p_sweep.add_argument("--steps", type=int, default=None, help="override grid steps")

    p_check = sub.add_parser("check", help="run the structural invariant suites")
    p_check.add_argument("--nmax", type=int, default=40)
    p_check.add_argument("--h", type=float, default=0.01)

    p_oracle = sub.add_parser("oracle", help="manage the junction coefficient cache")
    group = p_oracle.add_mutually_exclusive_group()
    group.add_argument("--regen", action="store_true", help="rebuild and overwrite")
    group.add_argument("--validate", action="store_true", help="compare against a rebuild")
    p_oracle.add_argument("--nmax", type=int, default=40)
    p_oracle.add_argument(
        "--cache-dir", default=None,
        help=f"cache directory (default: ${cache.ENV_VAR})",
    )
    return parser


def _cmd_sweep(args) -> int:
    request = load_config(args.config)
    overrides = {}
    if args.nmax is not None:
        overrides["n_max"] = args.nmax
    if args.h is not None:
        overrides["h"] = args.h
    if args.steps is not None:
        overrides["steps"] = args.steps
    if overrides:
        request = dataclasses.replace(request, **overrides)

    fmt = args.format
    if fmt is None:
        fmt = "json" if args.out.endswith(".json") else "csv"

    result = sweep.run_sweep(request)
    sweep.emit(result, fmt=fmt, path=args.out)
    if not result.all_converged:
        for name, ok in result.converged.items():
            if not ok:
                print(
                    f"convergence gate failed for curve {name} "
                    f"(delta {result.deltas[name]:.3e})",
                    file=sys.stderr,
                )
        return EXIT_CONVERGENCE
    return EXIT_OK


def _check_lines(n_max: int, h_probe: float):
    """Yield (ok, label, detail) triples for the invariant suite."""
    for species in ("boson", "fermion"):
        interior = n_max // 2
        worst = 0.0
        for h in (0.08, 0.04, 0.02, 0.01):
            if species == "boson":
                a, b = oracles.boson_overlaps(h, n_max)
                worst = max(worst, oracles.overlap_identity_residuals(a, b, interior))
            else:
                a = oracles.fermion_overlaps(h, n_max)
                worst = max(worst, oracles.fermion_identity_residual(a, interior))
        yield worst < 1e-8, f"{species} finite-h overlap identities", f"max {worst:.2e}"

    bj = blocks.junction("boson", n_max)
    m = blocks.boson_modes(n_max)
    same = (m[:, None] + m[None, :]) % 2 == 0
    dust = float(np.max(np.abs(bj.beta.order(1)[same])))
    yield dust < 1e-10, "boson beta(1) parity zeros", f"max {dust:.2e}"
    off = same & ~np.eye(n_max, dtype=bool)
    dust = float(np.max(np.abs(bj.alpha.order(1)[off])))
    yield dust < 1e-10, "boson alpha(1) parity zeros", f"max {dust:.2e}"

    fj = blocks.junction("fermion", n_max)
    km = blocks.fermion_modes(n_max)
    same = (km[:, None] - km[None, :]) % 2 == 0
    off = same & ~np.eye(2 * n_max, dtype=bool)
    dust = float(np.max(np.abs(fj.a.order(1)[off])))
    yield dust < 1e-10, "fermion a(1) parity zeros", f"max {dust:.2e}"

    u = 0.3
    trip = blocks.one_way_trip("boson", n_max, u)
    i, j = 0, 3
    beta_pred = 2 * abs(bj.beta.order(1)[i, j]) * abs(np.sin(np.pi * (m[i] + m[j]) * u))
    alpha_pred = 2 * abs(bj.alpha.order(1)[i, j]) * abs(np.sin(np.pi * (m[j] - m[i]) * u))
    db = abs(abs(trip.beta.order(1)[i, j]) - beta_pred)
    da = abs(abs(trip.alpha.order(1)[i, j]) - alpha_pred)
    yield max(da, db) < 1e-10, "assembled first-order interference", f"max {max(da, db):.2e}"

    worst = 0.0
    for curve in _preset_curves():
        sp = curve.species
        s_a = curve.series(blocks.one_way_trip(sp, n_max, 0.37))
        s_b = curve.series(blocks.one_way_trip(sp, n_max, 1.37))
        worst = max(worst, float(np.max(np.abs(s_a - s_b))))
    yield worst < 1e-8, "period-1 recurrence of preset curves", f"max {worst:.2e}"

    probes = (h_probe, h_probe / 2, h_probe / 4)
    worst = 0.0
    all_ok = True
    for curve, build in _crosscheck_states():
        trip = blocks.one_way_trip(curve.species, n_max, u)
        closed = negativity.leading_from_series(curve.series(trip))
        rho = states.reduce_to_pair(build(trip))
        numeric = negativity.leading_order(rho, probes)
        rel = abs(numeric.coefficient - closed.coefficient) / abs(closed.coefficient)
        worst = max(worst, rel)
        if numeric.power != closed.power or rel >= 0.01:
            all_ok = False
            yield False, f"closed vs numeric leading order ({curve.name})", f"rel {rel:.2e}"
    if all_ok:
        yield True, "closed vs numeric leading order", f"worst rel {worst:.2e}"


def _preset_curves():
    curves = []
    for name in PRESETS:
        curves.extend(parse_config(preset_text(name)).curves)
    return curves


def _crosscheck_states():
    return [
        (sweep.CurveSpec("boson-vacuum-14", "boson", "vacuum", (1, 4)),
         lambda t: states.boson_vacuum_state(t, (1, 4))),
        (sweep.CurveSpec("boson-one-particle-14", "boson", "one-particle", (1, 4), 1),
         lambda t: states.boson_particle_state(t, 1, (1, 4))),
        (sweep.CurveSpec("fermion-vacuum-2m1", "fermion", "vacuum", (2, -1)),
         lambda t: states.fermion_vacuum_state(t, (2, -1))),
        (sweep.CurveSpec("fermion-one-particle-14", "fermion", "one-particle", (1, 4), 1),
         lambda t: states.fermion_particle_state(t, 1, (1, 4))),
    ]


def _cmd_check(args) -> int:
    failed = False
    for ok, label, detail in _check_lines(args.nmax, args.h):
        status = "ok  " if ok else "FAIL"
        print(f"{status} {label} ({detail})")
        failed = failed or not ok
    return EXIT_INVARIANT if failed else EXIT_OK


def _cmd_oracle(args) -> int:
    root = pathlib.Path(args.cache_dir) if args.cache_dir else cache.cache_root()
    if root is None:
        print(f"no cache directory: set {cache.ENV_VAR} or pass --cache-dir", file=sys.stderr)
        return EXIT_CONFIG

    ladder = blocks.DEFAULT_LADDER
    status = EXIT_OK
    for species in ("boson", "fermion"):
        path = cache.junction_path(root, species, args.nmax, ladder)
        regen = args.regen or (not args.validate and not path.is_file())
        if regen:
            t = blocks.build_junction(species, args.nmax, ladder)
            cache.write_junction(path, t, species, args.nmax, ladder)
            print(f"wrote {path}")
            continue
        try:
            stored = cache.read_junction(path)
        except (OSError, cache.CacheError) as exc:
            print(f"cannot read {path}: {exc}", file=sys.stderr)
            status = EXIT_INVARIANT
            continue
        fresh = blocks.build_junction(species, args.nmax, ladder)
        deviation = cache.compare(stored, fresh)
        ok = deviation < 1e-10
        print(f"{'ok  ' if ok else 'FAIL'} {path} (max deviation {deviation:.2e})")
        if not ok:
            status = EXIT_INVARIANT
    return status


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_oracle(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

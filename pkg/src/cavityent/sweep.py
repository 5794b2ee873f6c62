"""Sweeps of the normalized negativity over the acceleration duration u.

A sweep walks a u grid for a set of curves (species, in-state, observed mode
pair), evaluates the closed-form negativity series at each point and reports
the coefficient at the curve's leading power.  That is the quantity the
figure-style panels plot: the h -> 0 limit of N/h for linear curves and of
N/h^2 for the parity-suppressed ones, so the numbers do not depend on an
arbitrary probe h.

Convergence in the mode cutoff is checked by rebuilding a handful of grid
points at doubled n_max; a curve whose values move by more than
``CONVERGENCE_GATE`` (relative) is flagged in every one of its rows.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import io
import json
import os
import sys
import warnings

import numpy as np

from . import blocks, negativity
from ._version import __version__

CONVERGENCE_GATE = 1e-4
SPOT_POINTS = 3
POWER_FLOOR = 1e-10

CSV_COLUMNS = (
    "u",
    "negativity_normalized",
    "power",
    "state",
    "species",
    "mode_a",
    "mode_b",
    "converged",
)

STATES = ("vacuum", "one-particle", "pair")


class ConfigError(ValueError):
    """A sweep request that cannot be run as written."""


@dataclasses.dataclass(frozen=True)
class CurveSpec:
    """One curve of a sweep: species, in-state and observed mode pair."""

    name: str
    species: str
    state: str
    modes: tuple[int, int]
    excite: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        if self.species not in ("boson", "fermion"):
            raise ConfigError(f"curve {self.name}: unknown species {self.species!r}")
        if self.state not in STATES:
            raise ConfigError(f"curve {self.name}: unknown state {self.state!r}")
        a, b = self.modes
        if a == b:
            raise ConfigError(f"curve {self.name}: observed modes must differ")
        if self.species == "boson" and min(a, b) < 1:
            raise ConfigError(f"curve {self.name}: boson mode labels start at 1")
        if self.state == "pair":
            if self.species != "fermion":
                raise ConfigError(f"curve {self.name}: pair in-states are fermionic")
            if (a >= 0) == (b >= 0):
                raise ConfigError(
                    f"curve {self.name}: a pair state needs one particle label (>= 0) "
                    f"and one antiparticle label (< 0), got {self.modes}"
                )
        if self.state == "one-particle":
            if self.excite is None:
                raise ConfigError(f"curve {self.name}: one-particle state needs excite")
            if int(self.excite) not in self.modes:
                raise ConfigError(
                    f"curve {self.name}: excited mode {self.excite} must be one of "
                    f"the observed pair {self.modes}"
                )
            partner = next(m for m in self.modes if m != int(self.excite))
            if self.species == "fermion" and (int(self.excite) >= 0) != (partner >= 0):
                warnings.warn(
                    f"curve {self.name}: the partner mode carries the opposite "
                    "charge, so exchange with the excitation is Pauli blocked and "
                    "the curve will be identically zero",
                    stacklevel=2,
                )
        elif self.excite is not None:
            raise ConfigError(f"curve {self.name}: excite only applies to one-particle")
        if self.species == "fermion" and self.state == "vacuum" and (a >= 0) == (b >= 0):
            warnings.warn(
                f"curve {self.name}: vacuum pair creation only links opposite "
                "charges, so this same-charge curve will be identically zero",
                stacklevel=2,
            )

    def series(self, trip) -> np.ndarray:
        """Closed-form negativity series (orders h^0, h^1, h^2) at one trip."""
        if self.species == "boson":
            if self.state == "vacuum":
                return negativity.boson_vacuum_closed(trip, self.modes)
            return negativity.boson_particle_closed(trip, int(self.excite), self.modes)
        if self.state == "vacuum":
            if (self.modes[0] >= 0) == (self.modes[1] >= 0):
                return np.zeros(3)
            return negativity.fermion_vacuum_closed(trip, self.modes)
        if self.state == "one-particle":
            return negativity.fermion_particle_closed(trip, int(self.excite), self.modes)
        kappa, kappa_p = max(self.modes), min(self.modes)
        return negativity.fermion_pair_closed(trip, kappa, kappa_p)


@dataclasses.dataclass(frozen=True)
class SweepRequest:
    """A validated sweep: curves plus grid and cutoff choices."""

    curves: tuple[CurveSpec, ...]
    u_start: float = 0.0
    u_stop: float = 1.0
    steps: int = 101
    n_max: int = 40
    h: float = 0.01
    template: str = "single-arc"
    config_sha256: str = ""

    def __post_init__(self):
        if not self.curves:
            raise ConfigError("a sweep needs at least one curve section")
        if len({c.name for c in self.curves}) != len(self.curves):
            raise ConfigError("curve names must be unique")
        if self.steps < 2:
            raise ConfigError("a u grid needs at least 2 steps")
        if self.n_max < 8:
            raise ConfigError("n_max below 8 leaves no interior window")
        if not 0.0 < self.h < 2.0:
            raise ConfigError("the probe h must lie in (0, 2)")
        if self.template != "single-arc":
            raise ConfigError(
                f"unknown scenario template {self.template!r} (only single-arc here)"
            )

    def grid(self) -> np.ndarray:
        return np.linspace(self.u_start, self.u_stop, self.steps)


@dataclasses.dataclass(frozen=True)
class Row:
    u: float
    value: float
    power: int
    curve: CurveSpec
    converged: bool


@dataclasses.dataclass
class SweepResult:
    request: SweepRequest
    rows: list[Row]
    powers: dict[str, int]
    deltas: dict[str, float]
    converged: dict[str, bool]

    @property
    def all_converged(self) -> bool:
        return all(self.converged.values())


def _curve_series(request: SweepRequest, grid: np.ndarray, n_max: int) -> np.ndarray:
    """Closed series for every (u, curve), shape (len(grid), n_curves, 3)."""
    species = sorted({c.species for c in request.curves})
    for sp in species:
        blocks.junction(sp, n_max)

    def at(u: float) -> np.ndarray:
        trips = {sp: blocks.one_way_trip(sp, n_max, u) for sp in species}
        return np.stack([c.series(trips[c.species]) for c in request.curves])

    out = np.empty((grid.size, len(request.curves), 3))
    workers = min(8, os.cpu_count() or 1)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        for i, block in enumerate(pool.map(at, grid)):
            out[i] = block
    return out


def _curve_power(series_over_grid: np.ndarray) -> int:
    if np.max(np.abs(series_over_grid[:, 1])) > POWER_FLOOR:
        return 1
    if np.max(np.abs(series_over_grid[:, 2])) > POWER_FLOOR:
        return 2
    return 0


def _spot_indices(values: np.ndarray, count: int = SPOT_POINTS) -> list[int]:
    """Grid indices of the largest values: convergence is checked where the
    curve actually lives, not at its zeros."""
    order = np.argsort(-values, kind="stable")
    return sorted(int(i) for i in order[: min(count, values.size)])


def run_sweep(request: SweepRequest) -> SweepResult:
    grid = request.grid()
    table = _curve_series(request, grid, request.n_max)

    powers = {c.name: _curve_power(table[:, j]) for j, c in enumerate(request.curves)}
    values = np.stack(
        [table[:, j, powers[c.name]] for j, c in enumerate(request.curves)], axis=1
    )

    deltas: dict[str, float] = {}
    converged: dict[str, bool] = {}
    for j, curve in enumerate(request.curves):
        spots = _spot_indices(values[:, j])
        fine = _curve_series(
            dataclasses.replace(request, curves=(curve,)), grid[spots], 2 * request.n_max
        )
        delta = 0.0
        for s, i in enumerate(spots):
            coarse = values[i, j]
            refined = fine[s, 0, powers[curve.name]]
            scale = max(abs(coarse), abs(refined))
            if scale > 0.0:
                delta = max(delta, abs(refined - coarse) / scale)
        deltas[curve.name] = float(delta)
        converged[curve.name] = bool(delta < CONVERGENCE_GATE)

    rows = [
        Row(
            u=float(grid[i]),
            value=float(values[i, j]),
            power=powers[curve.name],
            curve=curve,
            converged=converged[curve.name],
        )
        for i in range(grid.size)
        for j, curve in enumerate(request.curves)
    ]
    return SweepResult(request, rows, powers, deltas, converged)


# ---------------------------------------------------------------------------
# serialization


def _row_fields(row: Row) -> dict:
    return {
        "u": row.u,
        "negativity_normalized": row.value,
        "power": row.power,
        "state": row.curve.state,
        "species": row.curve.species,
        "mode_a": row.curve.modes[0],
        "mode_b": row.curve.modes[1],
        "converged": row.converged,
    }


def _metadata(result: SweepResult) -> dict:
    req = result.request
    return {
        "version": __version__,
        "config_sha256": req.config_sha256,
        "template": req.template,
        "n_max": req.n_max,
        "h": req.h,
        "u_start": req.u_start,
        "u_stop": req.u_stop,
        "steps": req.steps,
        "convergence_gate": CONVERGENCE_GATE,
        "spot_points": SPOT_POINTS,
        "curves": {
            c.name: {
                "species": c.species,
                "state": c.state,
                "modes": list(c.modes),
                "excite": c.excite,
                "power": result.powers[c.name],
                "convergence_delta": result.deltas[c.name],
                "converged": result.converged[c.name],
            }
            for c in req.curves
        },
    }


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit(result: SweepResult, fmt: str = "csv", path: str | None = None) -> str:
    """Serialize a sweep result and optionally write it to ``path``.

    Rows are ordered by ascending u and then by curve position, and floats
    are printed with enough digits to round-trip exactly; two runs of the
    same package version on the same config produce identical bytes.
    """
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for row in result.rows:
            fields = _row_fields(row)
            buf.write(",".join(_format_value(fields[c]) for c in CSV_COLUMNS) + "\n")
        text = buf.getvalue()
    elif fmt == "json":
        payload = {
            "metadata": _metadata(result),
            "rows": [_row_fields(row) for row in result.rows],
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ConfigError(f"unknown output format {fmt!r}")

    if path is not None and path != "-":
        with open(path, "w") as fh:
            fh.write(text)
    elif path == "-":
        sys.stdout.write(text)
    return text


def load_rows(text: str) -> list[dict]:
    """Parse rows back out of emitted CSV or JSON text."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return [dict(row) for row in json.loads(text)["rows"]]
    lines = [line for line in text.splitlines() if line]
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        raise ConfigError(f"unexpected CSV header {header!r}")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(
            {
                "u": float(parts[0]),
                "negativity_normalized": float(parts[1]),
                "power": int(parts[2]),
                "state": parts[3],
                "species": parts[4],
                "mode_a": int(parts[5]),
                "mode_b": int(parts[6]),
                "converged": parts[7] == "true",
            }
        )
    return rows


def config_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()

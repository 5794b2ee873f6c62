"""Junction blocks and travel scenarios.

A trip is assembled from two ingredient types:

* the junction J between the inertial and the uniformly accelerated mode
  bases, whose h^1 and h^2 blocks are extracted from the exact overlap
  quadrature (independent of any printed series coefficients);
* diagonal free-evolution phases, either for an accelerated segment of
  dimensionless duration u or for an inertial coast of angle theta.

The basic one-way trip is J^-1 P(u) J: match onto the accelerated basis,
evolve, match back.  Everything composes through the second-order algebra in
:mod:`cavityent.bogoliubov`.
"""

from __future__ import annotations

import numpy as np

from . import cache, oracles
from .bogoliubov import (
    BosonBogoliubov,
    FermionBogoliubov,
    check_identities,
    compose,
    invert,
)
from .series import H2Matrix

DEFAULT_LADDER = oracles.geometric_ladder(top=0.02, count=4)

_cache: dict[tuple, object] = {}


def boson_modes(n_max: int) -> np.ndarray:
    return np.arange(1, n_max + 1)


def fermion_modes(n_max: int) -> np.ndarray:
    return np.arange(-n_max, n_max)


def interior_window(species: str, n_max: int) -> tuple[int, int]:
    """Mode-label range on which truncation effects are negligible."""
    if species == "boson":
        return (1, n_max // 2)
    return (-(n_max // 2), n_max // 2)


def junction(species: str, n_max: int, ladder=None, gate_tol: float = 5e-8):
    """Junction transformation from the inertial onto the accelerated basis.

    Blocks are extracted from the finite-h overlap quadrature sampled on a
    geometric ladder, using the mirror symmetry to split even and odd orders.
    The zeroth order is the identity by construction (asserted, then snapped
    exactly).  Structural identities are gated on the interior window before
    the result is released; results are cached per (species, n_max, ladder),
    and on disk as well when the cache directory variable is set.
    """
    if ladder is None:
        ladder = DEFAULT_LADDER
    ladder = np.asarray(ladder, dtype=float)
    key = (species, n_max, tuple(np.round(ladder, 12)))
    if key in _cache:
        return _cache[key]

    result = cache.load(species, n_max, ladder)
    if result is None:
        result = build_junction(species, n_max, ladder)
        cache.store(species, n_max, ladder, result)
    check_identities(result, tol=gate_tol, window=interior_window(species, n_max))
    _cache[key] = result
    return result


def build_junction(species: str, n_max: int, ladder=None):
    """Extract the junction blocks from the overlap quadrature, uncached."""
    if ladder is None:
        ladder = DEFAULT_LADDER
    ladder = np.asarray(ladder, dtype=float)
    if species == "boson":
        modes = boson_modes(n_max)
        stacked = np.array([np.stack(oracles.boson_overlaps(h, n_max)) for h in ladder])
        signs = (-1.0) ** modes
        calpha, _ = oracles.extract_orders_mirrored(stacked[:, 0], signs, ladder)
        cbeta, _ = oracles.extract_orders_mirrored(stacked[:, 1], signs, ladder)
        drift = max(
            float(np.max(np.abs(calpha[0] - np.eye(n_max)))),
            float(np.max(np.abs(cbeta[0]))),
        )
        if drift > 1e-9:
            raise oracles.ConvergenceError(f"junction zeroth order drifted by {drift:.2e}")
        alpha = H2Matrix.from_orders(np.eye(n_max), calpha[1], calpha[2])
        beta = H2Matrix.from_orders(np.zeros((n_max, n_max)), cbeta[1], cbeta[2])
        result = BosonBogoliubov(alpha, beta, modes)
    elif species == "fermion":
        modes = fermion_modes(n_max)
        stacked = np.array([oracles.fermion_overlaps(h, n_max) for h in ladder])
        c, _ = oracles.extract_orders_mirrored(stacked, (-1.0) ** (modes % 2), ladder)
        drift = float(np.max(np.abs(c[0] - np.eye(2 * n_max))))
        if drift > 1e-9:
            raise oracles.ConvergenceError(f"junction zeroth order drifted by {drift:.2e}")
        result = FermionBogoliubov(
            H2Matrix.from_orders(np.eye(2 * n_max), c[1], c[2]), modes
        )
    else:
        raise ValueError(f"unknown species {species!r}")
    return result


def accelerated_phases(species: str, n_max: int, u: float):
    """Free evolution in the accelerated basis for dimensionless duration u."""
    if species == "boson":
        modes = boson_modes(n_max)
        return BosonBogoliubov.from_phases(modes, np.exp(-2j * np.pi * modes * u))
    modes = fermion_modes(n_max)
    return FermionBogoliubov.from_phases(modes, np.exp(-2j * np.pi * (modes + 0.5) * u))


def coast_phases(species: str, n_max: int, theta: float):
    """Free evolution in the inertial basis through phase angle theta."""
    if species == "boson":
        modes = boson_modes(n_max)
        return BosonBogoliubov.from_phases(modes, np.exp(-1j * modes * theta))
    modes = fermion_modes(n_max)
    return FermionBogoliubov.from_phases(modes, np.exp(-1j * (modes + 0.5) * theta))


def one_way_trip(species: str, n_max: int, u: float, gate_tol: float = 5e-8):
    """Inertial -> accelerated (duration u) -> inertial, to second order.

    Relates the mode basis after the trip to the one before it.  The zeroth
    order is the diagonal of accelerated phases; the first and second orders
    mix modes through the junction blocks.
    """
    j = junction(species, n_max, gate_tol=gate_tol)
    p = accelerated_phases(species, n_max, u)
    trip = compose(invert(j), compose(p, j))
    check_identities(trip, tol=gate_tol, window=interior_window(species, n_max))
    return trip


def scenario(species: str, n_max: int, segments, gate_tol: float = 5e-8):
    """Chain of ("coast", theta) and ("arc", u) segments, earliest first."""
    total = None
    for kind, value in segments:
        if kind == "coast":
            step = coast_phases(species, n_max, value)
        elif kind == "arc":
            step = one_way_trip(species, n_max, value, gate_tol=gate_tol)
        else:
            raise ValueError(f"unknown segment kind {kind!r}")
        total = step if total is None else compose(step, total)
    if total is None:
        raise ValueError("scenario needs at least one segment")
    return total

"""Two-mode entanglement of travelled states.

Two independent routes to the same number.  The numeric route takes the
reduced density matrix orders from :mod:`cavityent.states`, evaluates them at
small finite h, partially transposes and sums the negative part of the
spectrum; the leading power and coefficient are then recovered from a probe
ladder.  The closed route evaluates the perturbative eigenvalue formulas of
the negative blocks directly from the transformation matrices and returns the
negativity series without ever building a density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import states
from .bogoliubov import InvariantViolation

PROBES = (1e-2, 5e-3, 2.5e-3)
HERMITICITY_TOL = 1e-10
# relative floor under which partially transposed eigenvalues count as zero
EIGENVALUE_FLOOR = 1e-12
# below this a first-order coherence is a parity zero, not a leading term
FIRST_ORDER_FLOOR = 1e-9

_SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# numeric route


def partial_transpose(rho: np.ndarray, d: int) -> np.ndarray:
    """Transpose the second factor of a (d*d, d*d) matrix (or stack thereof)."""
    shape = rho.shape
    r = rho.reshape(shape[:-2] + (d, d, d, d))
    return np.swapaxes(r, -3, -1).reshape(shape)


def negativity_at(rho_orders: np.ndarray, h: float, herm_tol: float = HERMITICITY_TOL) -> float:
    """Negativity of the reduced matrix evaluated at acceleration h."""
    rho = np.polynomial.polynomial.polyval(h, rho_orders)
    drift = float(np.max(np.abs(rho - rho.conj().T)))
    if drift > herm_tol:
        raise InvariantViolation(f"reduced matrix drifts from Hermitian by {drift:.3e}")
    d = int(round(np.sqrt(rho.shape[-1])))
    eig = np.linalg.eigvalsh(partial_transpose(rho, d))
    floor = -EIGENVALUE_FLOOR * float(np.sum(np.abs(eig)))
    return float(-eig[eig < floor].sum())


@dataclass(frozen=True)
class LeadingOrder:
    """Leading small-h behaviour coefficient * h**power of a negativity."""

    power: int
    coefficient: float
    converged: bool
    slope: float | None = None


def leading_order(rho_orders: np.ndarray, probes=PROBES) -> LeadingOrder:
    """Fit the leading power on a probe ladder and refine the coefficient.

    The power is the rounded log-log slope and is only trusted when the raw
    slope sits within 0.05 of it; the coefficient is Richardson-extrapolated
    from the two smallest probes, which cancels the next order exactly for a
    ratio-2 ladder.
    """
    probes = np.asarray(sorted(probes, reverse=True), dtype=float)
    values = np.array([negativity_at(rho_orders, h) for h in probes])
    if np.max(np.abs(values)) < 1e-12:
        return LeadingOrder(power=0, coefficient=0.0, converged=True)
    if np.min(values) <= 0.0:
        return LeadingOrder(power=0, coefficient=0.0, converged=False)
    slope = float(np.polyfit(np.log(probes), np.log(values), 1)[0])
    power = int(round(slope))
    scaled = values / probes**power
    coefficient = float(2.0 * scaled[-1] - scaled[-2])
    return LeadingOrder(
        power=power,
        coefficient=coefficient,
        converged=abs(slope - power) <= 0.05,
        slope=slope,
    )


def leading_from_series(series: np.ndarray, floor: float = 1e-12) -> LeadingOrder:
    c = np.asarray(series, dtype=float)
    if abs(c[1]) > floor:
        return LeadingOrder(power=1, coefficient=float(c[1]), converged=True)
    if abs(c[2]) > floor:
        return LeadingOrder(power=2, coefficient=float(c[2]), converged=True)
    return LeadingOrder(power=0, coefficient=0.0, converged=True)


def series_value(series: np.ndarray, h: float) -> float:
    return float(np.polynomial.polynomial.polyval(h, np.asarray(series, dtype=float)))


# ---------------------------------------------------------------------------
# closed route, shared pieces


def _pt_block(d1: float, d2: float, x: np.ndarray) -> np.ndarray:
    """Negativity series of a 2x2 transposed block [[d1 h^2, x], [conj x, d2 h^2]].

    With a first-order coherence the block is negative for any small h; when
    parity kills x[1] the block only opens at second order and may stay
    positive, in which case the series is zero.
    """
    out = np.zeros(3)
    if abs(x[1]) > FIRST_ORDER_FLOOR:
        out[1] = abs(x[1])
        out[2] = (np.conj(x[1]) * x[2]).real / abs(x[1]) - 0.5 * (d1 + d2)
    else:
        root = np.sqrt(0.25 * (d1 - d2) ** 2 + abs(x[2]) ** 2)
        out[2] = max(0.0, root - 0.5 * (d1 + d2))
    return out


def _others(labels, pair):
    return [i for i, m in enumerate(labels) if m not in pair]


# ---------------------------------------------------------------------------
# closed route, bosons


def boson_vacuum_closed(t, pair) -> np.ndarray:
    """Negativity series of the travelled vacuum on a mode pair."""
    k, kp = (int(m) for m in pair)
    v = states.boson_pair_matrix(t)
    labels = [int(m) for m in t.modes]
    ik, ikp = labels.index(k), labels.index(kp)
    rest = _others(labels, (k, kp))
    a_k = float(np.sum(np.abs(v[1][ik, rest]) ** 2))
    a_kp = float(np.sum(np.abs(v[1][ikp, rest]) ** 2))
    n2 = states._mul(states.boson_norm_factor(v), states.boson_norm_factor(v))
    x = states._mul(n2, v[:, ik, ikp])
    series = _pt_block(a_k, a_kp, x)
    # the (2,0)|(0,2) block closes on the double-pair amplitude
    series[2] += abs(v[1][ik, ikp]) ** 2
    return series


def boson_particle_closed(t, k: int, pair) -> np.ndarray:
    """Negativity series of a travelled one-particle state on (k, partner)."""
    k = int(k)
    pk, pkp = (int(m) for m in pair)
    if k not in (pk, pkp):
        raise ValueError("closed form expects the excited mode in the observed pair")
    kp = pkp if k == pk else pk
    v = states.boson_pair_matrix(t)
    d = states.boson_source_matrix(t, v)
    n = states.boson_norm_factor(v)
    labels = [int(m) for m in t.modes]
    ik, ikp = labels.index(k), labels.index(kp)
    rest = _others(labels, (k, kp))
    g = np.diagonal(t.alpha.order(0))

    amp_k = states._mul(n, d[:, ik, ik])
    amp_kp = states._mul(n, d[:, ikp, ik])
    amp_21 = _SQRT2 * states._mul(amp_k, v[:, ik, ikp])
    p = states._mul(amp_k, np.conj(amp_kp))
    q = states._mul(amp_k, np.conj(amp_21))

    d1 = float(np.sum(np.abs(v[1][ikp, rest]) ** 2))
    d2 = float(np.sum(np.abs(d[1][rest, ik]) ** 2))
    d3 = 2.0 * float(np.sum(np.abs(v[1][ik, rest]) ** 2))
    e2 = _SQRT2 * g[ik] * complex(np.sum(d[1][rest, ik] * np.conj(v[1][ik, rest])))

    series = np.zeros(3)
    s2 = abs(p[1]) ** 2 + abs(q[1]) ** 2
    if np.sqrt(s2) > FIRST_ORDER_FLOOR:
        s3 = 2.0 * (np.conj(p[1]) * p[2] + np.conj(q[1]) * q[2]).real
        cross = 2.0 * (e2 * p[1] * np.conj(q[1])).real
        series[1] = np.sqrt(s2)
        series[2] = s3 / (2.0 * np.sqrt(s2)) - 0.5 * (
            d1 + (abs(p[1]) ** 2 * d2 + abs(q[1]) ** 2 * d3 + cross) / s2
        )
    else:
        block = np.array(
            [
                [d1, p[2], q[2]],
                [np.conj(p[2]), d2, e2],
                [np.conj(q[2]), np.conj(e2), d3],
            ]
        )
        series[2] = max(0.0, -float(np.linalg.eigvalsh(block)[0]))
    # the (1,2)|(3,0) block rides on the twice-paired amplitude
    series[2] += np.sqrt(3.0) * abs(v[1][ik, ikp]) ** 2
    return series


# ---------------------------------------------------------------------------
# closed route, fermions


def _fermion_pieces(t):
    v = states.fermion_pair_matrix(t)
    part, anti = states._fermion_labels(t)
    m = states.fermion_norm_factor(v)
    return v, part, anti, m


def fermion_vacuum_closed(t, pair) -> np.ndarray:
    """Negativity series of the travelled vacuum on a particle-antiparticle pair."""
    kappa, kappa_p = max(pair), min(pair)
    if kappa < 0 or kappa_p >= 0:
        raise ValueError("vacuum negativity at this order needs opposite charges")
    v, part, anti, m = _fermion_pieces(t)
    ip, iq = part.index(int(kappa)), anti.index(int(kappa_p))
    d1 = float(np.sum(np.abs(np.delete(v[1][ip, :], iq)) ** 2))
    d2 = float(np.sum(np.abs(np.delete(v[1][:, iq], ip)) ** 2))
    x = -states._mul(states._mul(m, m), v[:, ip, iq])
    return _pt_block(d1, d2, x)


def fermion_particle_closed(t, kappa: int, pair) -> np.ndarray:
    """Negativity series of a travelled single excitation on an observed pair.

    A partner of the opposite charge cannot share a negative block with the
    excitation at this order (the exchange channel is Pauli blocked), so the
    series is identically zero there.
    """
    kappa = int(kappa)
    if kappa not in tuple(int(m) for m in pair):
        raise ValueError("closed form expects the excited mode in the observed pair")
    partner = next(int(m) for m in pair if int(m) != kappa)
    if (kappa >= 0) != (partner >= 0):
        return np.zeros(3)
    v, part, anti, m = _fermion_pieces(t)
    m2 = states._mul(m, m)
    if kappa >= 0:
        source = states.fermion_particle_source(t, v)
        labels = part
        ie, io = labels.index(kappa), labels.index(partner)
        d1 = float(np.sum(np.abs(v[1][io, :]) ** 2))
    else:
        source = states.fermion_antiparticle_source(t, v)
        labels = anti
        ie, io = labels.index(kappa), labels.index(partner)
        d1 = float(np.sum(np.abs(v[1][:, io]) ** 2))
    rest = [i for i, lab in enumerate(labels) if lab not in (kappa, partner)]
    d2 = float(np.sum(np.abs(source[1][rest, ie]) ** 2))
    x = states._mul(m2, states._mul(source[:, ie, ie], np.conj(source[:, io, ie])))
    return _pt_block(d1, d2, x)


def fermion_pair_closed(t, kappa: int, kappa_p: int) -> np.ndarray:
    """Negativity series of a travelled particle-antiparticle pair state."""
    if kappa < 0 or kappa_p >= 0:
        raise ValueError("pair state wants a particle label and an antiparticle label")
    v, part, anti, m = _fermion_pieces(t)
    d = states.fermion_particle_source(t, v)
    e = states.fermion_antiparticle_source(t, v)
    ip, iq = part.index(int(kappa)), anti.index(int(kappa_p))
    c0 = states.fermion_pair_scalar(t, e, kappa, kappa_p)
    d1 = float(np.sum(np.abs(np.delete(d[1][:, ip], ip)) ** 2))
    d2 = float(np.sum(np.abs(np.delete(e[1][:, iq], iq)) ** 2))
    psi11 = states._mul(d[:, ip, ip], e[:, iq, iq]) + states._mul(v[:, ip, iq], c0)
    x = -states._mul(states._mul(m, m), states._mul(psi11, np.conj(c0)))
    return _pt_block(d1, d2, x)

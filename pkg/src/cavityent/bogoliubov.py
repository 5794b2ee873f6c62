"""Mode transformations to second order and the algebra for chaining them.

Conventions
-----------
A bosonic transformation relates new mode functions to old ones through

    new_m = sum_n alpha[m, n] old_n + beta[m, n] conj(old_n)

and a fermionic one through a single matrix,

    new_m = sum_n a[m, n] old_n.

Both carry explicit mode labels so that phases, mirror conjugation and
composition cannot silently mix up index conventions.  All matrices are
``H2Matrix`` series in the acceleration parameter h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import H2Matrix


class InvariantViolation(RuntimeError):
    """A structural consistency identity failed beyond tolerance."""


def _check_labels(a, b):
    if not np.array_equal(a.modes, b.modes):
        raise ValueError("cannot combine transformations with different mode labels")


@dataclass(frozen=True)
class BosonBogoliubov:
    """Bosonic transformation (alpha, beta) between two sets of cavity modes."""

    alpha: H2Matrix
    beta: H2Matrix
    modes: np.ndarray

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=int)
        object.__setattr__(self, "modes", modes)
        n = modes.size
        if self.alpha.shape != (n, n) or self.beta.shape != (n, n):
            raise ValueError("alpha/beta shapes do not match the mode labels")

    @property
    def n_modes(self) -> int:
        return self.modes.size

    @classmethod
    def identity(cls, modes) -> "BosonBogoliubov":
        modes = np.asarray(modes, dtype=int)
        n = modes.size
        return cls(H2Matrix.identity(n), H2Matrix.zeros(n), modes)

    @classmethod
    def from_phases(cls, modes, phases) -> "BosonBogoliubov":
        """Pure phase rotation new_m = g_m old_m (free evolution of each mode)."""
        modes = np.asarray(modes, dtype=int)
        return cls(H2Matrix.diagonal(phases), H2Matrix.zeros(modes.size), modes)


@dataclass(frozen=True)
class FermionBogoliubov:
    """Fermionic transformation between two sets of cavity spinor modes.

    Mode labels are the integers kappa; kappa >= 0 are particle modes and
    kappa < 0 antiparticle modes.
    """

    a: H2Matrix
    modes: np.ndarray

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=int)
        object.__setattr__(self, "modes", modes)
        n = modes.size
        if self.a.shape != (n, n):
            raise ValueError("matrix shape does not match the mode labels")

    @property
    def n_modes(self) -> int:
        return self.modes.size

    @classmethod
    def identity(cls, modes) -> "FermionBogoliubov":
        modes = np.asarray(modes, dtype=int)
        return cls(H2Matrix.identity(modes.size), modes)

    @classmethod
    def from_phases(cls, modes, phases) -> "FermionBogoliubov":
        modes = np.asarray(modes, dtype=int)
        return cls(H2Matrix.diagonal(phases), modes)


def compose(second, first):
    """Transformation equivalent to applying ``first`` and then ``second``."""
    _check_labels(second, first)
    if isinstance(second, BosonBogoliubov) and isinstance(first, BosonBogoliubov):
        alpha = second.alpha @ first.alpha + second.beta @ first.beta.conj()
        beta = second.alpha @ first.beta + second.beta @ first.alpha.conj()
        return BosonBogoliubov(alpha, beta, second.modes)
    if isinstance(second, FermionBogoliubov) and isinstance(first, FermionBogoliubov):
        return FermionBogoliubov(second.a @ first.a, second.modes)
    raise TypeError("cannot compose transformations of different species")


def invert(t):
    """Inverse transformation (exact for any transformation satisfying the identities)."""
    if isinstance(t, BosonBogoliubov):
        return BosonBogoliubov(t.alpha.H, -t.beta.T, t.modes)
    if isinstance(t, FermionBogoliubov):
        return FermionBogoliubov(t.a.H, t.modes)
    raise TypeError(f"not a transformation: {t!r}")


def mirror(t):
    """Conjugate by the cavity reflection, i.e. the sign flip of every other mode.

    Reversing the direction of the acceleration is equivalent to reflecting
    the cavity about its centre, which multiplies mode n by (-1)^n.  The
    transformation for the reversed direction is therefore S t S with
    S = diag((-1)^mode), an index-preserving conjugation.
    """
    s = np.where(np.asarray(t.modes) % 2 == 0, 1.0, -1.0)
    outer = s[:, None] * s[None, :]
    if isinstance(t, BosonBogoliubov):
        return BosonBogoliubov(
            H2Matrix(t.alpha.data * outer), H2Matrix(t.beta.data * outer), t.modes
        )
    if isinstance(t, FermionBogoliubov):
        return FermionBogoliubov(H2Matrix(t.a.data * outer), t.modes)
    raise TypeError(f"not a transformation: {t!r}")


def _window_slice(modes: np.ndarray, window) -> np.ndarray:
    if window is None:
        return np.arange(modes.size)
    lo, hi = window
    return np.flatnonzero((modes >= lo) & (modes <= hi))


def identity_residuals(t, window=None) -> dict[str, np.ndarray]:
    """Order-by-order residuals of the structural identities.

    For bosons the left family is alpha alpha^+ - beta beta^+ = 1 together
    with the pair symmetry alpha beta^T = beta alpha^T, and the right family
    is alpha^+ alpha - beta^T conj(beta) = 1 with alpha^+ beta = beta^T
    conj(alpha).  For fermions both families reduce to unitarity.

    Returns a dict mapping residual names to arrays of per-order maxima,
    restricted to the rows and columns whose mode labels fall inside
    ``window`` (inclusive bounds).  Truncating the mode ladder always spoils
    the identities near the edge, so callers should stay in the interior.
    """
    idx = _window_slice(t.modes, window)

    def sub(m: H2Matrix) -> np.ndarray:
        return np.max(np.abs(m.data[:, idx[:, None], idx[None, :]]), axis=(1, 2))

    if isinstance(t, BosonBogoliubov):
        eye = H2Matrix.identity(t.n_modes)
        a, b = t.alpha, t.beta
        return {
            "number_left": sub(a @ a.H - b @ b.H - eye),
            "pair_left": sub(a @ b.T - b @ a.T),
            "number_right": sub(a.H @ a - b.T @ b.conj() - eye),
            "pair_right": sub(a.H @ b - b.T @ a.conj()),
        }
    if isinstance(t, FermionBogoliubov):
        eye = H2Matrix.identity(t.n_modes)
        return {
            "unitary_left": sub(t.a @ t.a.H - eye),
            "unitary_right": sub(t.a.H @ t.a - eye),
        }
    raise TypeError(f"not a transformation: {t!r}")


def check_identities(t, tol: float = 1e-8, window=None, h_ref: float = 0.08) -> dict[str, np.ndarray]:
    """Raise :class:`InvariantViolation` if the identities fail beyond ``tol``.

    Per-order residuals are combined as r0 + h_ref r1 + h_ref^2 r2, i.e. the
    size the violation would have at the largest acceleration of interest.
    The second-order residual always carries the truncated mode tail, so its
    raw value is only meaningful once weighted this way.
    """
    residuals = identity_residuals(t, window=window)
    weights = h_ref ** np.arange(3)
    worst = max(float(np.max(r * weights)) for r in residuals.values())
    if worst > tol:
        detail = ", ".join(f"{k}={np.max(v * weights):.3e}" for k, v in residuals.items())
        raise InvariantViolation(
            f"identity residual {worst:.3e} at h={h_ref} exceeds {tol:.1e} ({detail})"
        )
    return residuals

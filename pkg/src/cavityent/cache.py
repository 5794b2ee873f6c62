"""Optional on-disk cache for extracted junction coefficient tables.

Rebuilding the junction blocks means re-running the overlap quadrature over a
ladder of h values, which is the only genuinely slow step in a sweep.  When
the environment variable named by :data:`ENV_VAR` points at a directory, the
per-order matrices are written there once and picked up by later runs.

The file format is a plain text table, one nonzero coefficient per line, with
a commented header recording how the numbers were produced.  Files are keyed
by species, mode count and extraction ladder, so a stale file is simply
ignored rather than misused.
"""

from __future__ import annotations

import hashlib
import os
import pathlib

import numpy as np

from .bogoliubov import BosonBogoliubov, FermionBogoliubov
from .series import N_ORDERS, H2Matrix

ENV_VAR = "CAVITYENT_CACHE_DIR"
FORMAT_VERSION = 1


class CacheError(RuntimeError):
    """A cache file exists but cannot be used as written."""


def cache_root() -> pathlib.Path | None:
    path = os.environ.get(ENV_VAR)
    return pathlib.Path(path) if path else None


def _modes(species: str, n_max: int) -> np.ndarray:
    if species == "boson":
        return np.arange(1, n_max + 1)
    if species == "fermion":
        return np.arange(-n_max, n_max)
    raise ValueError(f"unknown species {species!r}")


def _ladder_tag(ladder: np.ndarray) -> str:
    return " ".join(f"{h:.12g}" for h in np.asarray(ladder, dtype=float))


def junction_path(root: pathlib.Path, species: str, n_max: int, ladder) -> pathlib.Path:
    digest = hashlib.sha256(_ladder_tag(ladder).encode()).hexdigest()[:8]
    return root / f"junction-{species}-n{n_max}-{digest}.txt"


def _families(t) -> dict[str, H2Matrix]:
    if isinstance(t, BosonBogoliubov):
        return {"alpha": t.alpha, "beta": t.beta}
    if isinstance(t, FermionBogoliubov):
        return {"a": t.a}
    raise TypeError(f"not a transformation: {t!r}")


def write_junction(path: pathlib.Path, t, species: str, n_max: int, ladder) -> None:
    """Write the per-order coefficient table for a junction transformation."""
    modes = np.asarray(t.modes)
    body = []
    for family, mat in _families(t).items():
        data = mat.data
        for order in range(N_ORDERS):
            for i, m in enumerate(modes):
                for j, n in enumerate(modes):
                    z = data[order, i, j]
                    if z == 0:
                        continue
                    body.append(
                        f"{species} {family} {order} {m} {n} {z.real:.17g} {z.imag:.17g}"
                    )
    lines = [
        "# junction coefficient table",
        f"# format: {FORMAT_VERSION}",
        f"# species: {species}",
        f"# n_max: {n_max}",
        f"# ladder: {_ladder_tag(ladder)} (mirrored in h)",
        "# convention: mode m evolves as exp(-i omega_m t); order k multiplies h^k",
        "# columns: species family order m n re im",
        f"# rows: {len(body)}",
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text("\n".join(lines + body) + "\n")
    tmp.replace(path)


def read_junction(path: pathlib.Path):
    """Parse a coefficient table back into a transformation.

    Raises :class:`CacheError` on any structural problem; callers decide
    whether that means "rebuild" or "report corruption".
    """
    header: dict[str, str] = {}
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if ":" in body:
                key, _, value = body.partition(":")
                header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 7:
            raise CacheError(f"{path}:{lineno}: expected 7 columns, got {len(parts)}")
        rows.append(parts)

    try:
        species = header["species"]
        n_max = int(header["n_max"])
        expected_rows = int(header["rows"])
    except KeyError as exc:
        raise CacheError(f"{path}: missing header field {exc}") from exc
    if len(rows) != expected_rows:
        raise CacheError(
            f"{path}: table holds {len(rows)} rows, header promises {expected_rows}"
        )
    modes = _modes(species, n_max)
    index = {int(m): i for i, m in enumerate(modes)}
    n = modes.size

    wanted = {"boson": ("alpha", "beta"), "fermion": ("a",)}[species]
    tables = {fam: np.zeros((N_ORDERS, n, n), dtype=complex) for fam in wanted}
    for parts in rows:
        sp, family, order, m, nn, re, im = parts
        if sp != species or family not in tables:
            raise CacheError(f"{path}: unexpected row key {sp}/{family}")
        k = int(order)
        if not 0 <= k < N_ORDERS:
            raise CacheError(f"{path}: order {k} out of range")
        try:
            i, j = index[int(m)], index[int(nn)]
        except KeyError as exc:
            raise CacheError(f"{path}: mode label {exc} outside the table") from exc
        tables[family][k, i, j] = complex(float(re), float(im))

    for fam in wanted:
        if not np.all(np.isfinite(tables[fam].view(float))):
            raise CacheError(f"{path}: non-finite coefficient in {fam}")
    if species == "boson":
        return BosonBogoliubov(H2Matrix(tables["alpha"]), H2Matrix(tables["beta"]), modes)
    return FermionBogoliubov(H2Matrix(tables["a"]), modes)


def _header_matches(path: pathlib.Path, species: str, n_max: int, ladder) -> bool:
    with path.open() as fh:
        head = [next(fh, "") for _ in range(8)]
    text = "".join(head)
    return (
        f"# species: {species}" in text
        and f"# n_max: {n_max}" in text
        and f"# ladder: {_ladder_tag(ladder)}" in text
    )


def load(species: str, n_max: int, ladder):
    """Load a cached junction, or None when there is no usable cache entry."""
    root = cache_root()
    if root is None:
        return None
    path = junction_path(root, species, n_max, ladder)
    if not path.is_file():
        return None
    try:
        if not _header_matches(path, species, n_max, ladder):
            return None
        return read_junction(path)
    except (CacheError, OSError, ValueError):
        return None


def store(species: str, n_max: int, ladder, t) -> pathlib.Path | None:
    root = cache_root()
    if root is None:
        return None
    path = junction_path(root, species, n_max, ladder)
    write_junction(path, t, species, n_max, ladder)
    return path


def compare(t_a, t_b) -> float:
    """Largest entrywise deviation between two transformations, all orders."""
    fam_a, fam_b = _families(t_a), _families(t_b)
    if fam_a.keys() != fam_b.keys() or not np.array_equal(t_a.modes, t_b.modes):
        raise CacheError("transformations are not comparable")
    return max(
        float(np.max(np.abs(fam_a[f].data - fam_b[f].data))) for f in fam_a
    )

"""Periodic lattice geometry and configuration storage.

Sites of the torus ``{0, ..., L-1}^d`` are stored as flat integers in row-major
order (last axis varies fastest). Each site carries one of three states:
0 = healthy, 1 = infected/asymptomatic, 2 = infected/symptomatic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError

HEALTHY, ASYMPTOMATIC, SYMPTOMATIC = 0, 1, 2

# Fig.-1 colour convention: healthy white, asymptomatic gray, symptomatic black.
PGM_LEVELS = np.array([255, 128, 0], dtype=np.int64)


@dataclass(frozen=True)
class LatticeGeometry:
    """The d-dimensional torus of side ``L``."""

    d: int
    L: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.d!r}")
        if int(self.L) != self.L or self.L < 1:
            raise DomainError(f"side length must be a positive integer, got {self.L!r}")

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    @property
    def degree(self) -> int:
        return 2 * self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.L,) * self.d

    @property
    def origin(self) -> int:
        """Central site, used as the origin for single-seed starts."""
        return self.index((self.L // 2,) * self.d)

    def index(self, coords) -> int:
        coords = tuple(int(c) for c in np.atleast_1d(coords))
        if len(coords) != self.d or any(c < 0 or c >= self.L for c in coords):
            raise DomainError(f"{coords} is not a site of the {self.d}-d torus of side {self.L}")
        return int(np.ravel_multi_index(coords, self.shape))

    def coords(self, x: int) -> tuple[int, ...]:
        self._check_site(x)
        return tuple(int(c) for c in np.unravel_index(x, self.shape))

    def _check_site(self, x) -> None:
        if int(x) != x or not 0 <= x < self.n_sites:
            raise DomainError(f"site index {x!r} out of range [0, {self.n_sites})")


def neighbors(x, g: LatticeGeometry) -> list:
    """Nearest neighbours of ``x`` with periodic wrap.

    Order is per axis, minus direction then plus direction. ``x`` may be a flat
    index (neighbours returned as flat indices) or a coordinate tuple
    (neighbours returned as tuples).

    >>> neighbors(0, LatticeGeometry(1, 5))
    [4, 1]
    """
    if g.L < 3:
        raise DomainError("nearest neighbours are distinct only for L >= 3")
    as_tuple = isinstance(x, tuple)
    c = list(x) if as_tuple else list(g.coords(x))
    if as_tuple:
        g.index(c)
    out = []
    for axis in range(g.d):
        for step in (-1, 1):
            y = list(c)
            y[axis] = (y[axis] + step) % g.L
            out.append(tuple(y) if as_tuple else g.index(y))
    return out


def neighbor_table(g: LatticeGeometry) -> np.ndarray:
    """Array of shape ``(n_sites, 2d)`` with the neighbours of every site."""
    if g.L < 3:
        raise DomainError("nearest neighbours are distinct only for L >= 3")
    grid = np.arange(g.n_sites, dtype=np.int64).reshape(g.shape)
    cols = []
    for axis in range(g.d):
        for step in (-1, 1):
            # roll by +1 brings the minus-neighbour into place
            cols.append(np.roll(grid, -step, axis=axis).ravel())
    return np.stack(cols, axis=1)


@dataclass
class Configuration:
    """One state in {0, 1, 2} per site of ``geometry``."""

    geometry: LatticeGeometry
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.states)
        if s.shape != (self.geometry.n_sites,):
            if s.shape == self.geometry.shape:
                s = s.ravel()
            else:
                raise DomainError(
                    f"expected {self.geometry.n_sites} states, got array of shape {s.shape}"
                )
        if s.size and (s.min() < 0 or s.max() > 2):
            raise DomainError("states must lie in {0, 1, 2}")
        self.states = s.astype(np.int8, copy=True)

    @classmethod
    def filled(cls, g: LatticeGeometry, state: int = HEALTHY) -> "Configuration":
        return cls(g, np.full(g.n_sites, state, dtype=np.int8))

    @classmethod
    def single(cls, g: LatticeGeometry, state: int = ASYMPTOMATIC, site=None) -> "Configuration":
        """Healthy lattice with one infected site (default: the central site)."""
        cfg = cls.filled(g)
        cfg.states[g.origin if site is None else site] = state
        return cfg

    @classmethod
    def bernoulli(cls, g: LatticeGeometry, p1: float, p2: float, rng) -> "Configuration":
        """Independent sites: state 1 w.p. ``p1``, state 2 w.p. ``p2``."""
        if p1 < 0 or p2 < 0 or p1 + p2 > 1:
            raise DomainError("need p1, p2 >= 0 and p1 + p2 <= 1")
        u = np.random.default_rng(rng).random(g.n_sites)
        states = np.where(u < p1, 1, np.where(u < p1 + p2, 2, 0))
        return cls(g, states)

    def copy(self) -> "Configuration":
        return Configuration(self.geometry, self.states)

    def counts(self) -> np.ndarray:
        return np.bincount(self.states, minlength=3)

    def infected(self) -> np.ndarray:
        return np.flatnonzero(self.states)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.states, other.states)


def neighbor_fraction(x: int, xi: Configuration, i: int) -> float:
    """Fraction of the 2d neighbours of ``x`` that are in state ``i``."""
    if i not in (0, 1, 2):
        raise DomainError(f"state must be 0, 1 or 2, got {i!r}")
    g = xi.geometry
    nb = neighbors(x, g)
    return sum(1 for y in nb if xi.states[y] == i) / g.degree


def density(xi: Configuration) -> tuple[float, float, float]:
    """Empirical densities ``(u0, u1, u2)``.

    The underlying counts sum to ``L**d`` exactly; the floats sum to one up to
    a rounding error of a few ulp.
    """
    n = xi.geometry.n_sites
    c0, c1, c2 = (int(v) for v in xi.counts())
    return c0 / n, c1 / n, c2 / n


def to_pgm(xi: Configuration) -> str:
    """Plain (P2) PGM rendering of a two-dimensional configuration."""
    g = xi.geometry
    if g.d != 2:
        raise DomainError("PGM snapshots are only defined for d = 2")
    pix = PGM_LEVELS[xi.states.reshape(g.shape)]
    lines = ["P2", f"{g.L} {g.L}", "255"]
    lines += [" ".join(map(str, row)) for row in pix]
    return "\n".join(lines) + "\n"


def write_pgm(xi: Configuration, path) -> Path:
    path = Path(path)
    path.write_text(to_pgm(xi))
    return path


def read_pgm(path, g: LatticeGeometry | None = None) -> Configuration:
    tokens = Path(path).read_text().split()
    if tokens[0] != "P2":
        raise DomainError("not a plain PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if w != h or maxval != 255:
        raise DomainError("expected a square 255-level snapshot")
    pix = np.array(tokens[4:], dtype=np.int64)
    lookup = {255: 0, 128: 1, 0: 2}
    try:
        states = np.array([lookup[v] for v in pix], dtype=np.int8)
    except KeyError as exc:
        raise DomainError(f"unexpected grey level {exc.args[0]}") from None
    return Configuration(g or LatticeGeometry(2, w), states)

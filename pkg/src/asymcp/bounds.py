"""Closed-form extinction and survival bounds, with Monte Carlo counterparts.

Branching bounds (``beta1 = 0``): the symptomatic sites are dominated by a
Galton-Watson process with mean offspring ``mu = 4 d gamma / (1 + gamma)``,
subcritical exactly when ``gamma < 1 / (4d - 1)``.

Percolation bound (``beta2 = 0``): a site is open when all of its 2d
outgoing infection clocks ring before it stops being asymptomatic.  Sites
are then independent, and an infinite open cluster from the origin implies
global survival.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import ndimage

from .errors import DomainError
from .montecarlo import wilson_interval

# Rigorous upper bound on the site percolation threshold of Z^2; the actual
# value is about 0.5927 but only the bound yields a provable survival region.
PC_UPPER_Z2 = 7 / 8


def gw_offspring_mean(d, gamma):
    """Mean number of symptomatic children per symptomatic parent.

    Exact for ``fractions.Fraction`` inputs.
    """
    if d < 1 or gamma < 0:
        raise DomainError("need d >= 1 and gamma >= 0")
    return 4 * d * gamma / (1 + gamma)


def is_subcritical(d, gamma) -> bool:
    return gamma * (4 * d - 1) < 1


def _subcritical_mu(d, gamma):
    mu = gw_offspring_mean(d, gamma)
    if mu >= 1:
        raise DomainError(f"mu = {float(mu):.6g} >= 1: the branching bound is vacuous")
    return mu


def gw_radius_bound(d, gamma, r: int):
    """Upper bound ``mu**(r-1)`` on the chance that infection from one 2 leaves ``[-r, r]^d``."""
    if r < 1:
        raise DomainError("r must be at least 1")
    return _subcritical_mu(d, gamma) ** (r - 1)


def gw_total_mean(d, gamma):
    """Expected total number of symptomatic individuals, ``1 / (1 - mu)``."""
    return 1 / (1 - _subcritical_mu(d, gamma))


def exterior_path_bound(d: int, gamma: float, r: int, rel_tol: float = 1e-15) -> float:
    """Bound on an infection path reaching the origin from outside ``[-r, r]^d``.

    Sums ``2d * sum_{j >= r} (2j + 3)^(d-1) mu^j`` until the terms are
    decreasing and below ``rel_tol`` times the running sum.
    """
    mu = float(_subcritical_mu(d, gamma))
    if mu == 0.0:
        return 0.0
    terms = []
    partial = 0.0
    j = r
    prev = math.inf
    while True:
        term = (2 * j + 3) ** (d - 1) * mu**j
        terms.append(term)
        partial += term
        if term < prev and term < rel_tol * partial:
            break
        prev = term
        j += 1
        if j - r > 10**7:
            raise RuntimeError("series did not converge")
    return 2 * d * math.fsum(terms)


@dataclass
class GWSample:
    """Per-tree generation sizes (``counts[i, n]`` = size of generation n of tree i)."""

    counts: np.ndarray

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def extinct(self) -> np.ndarray:
        return self.counts[:, -1] == 0


def gw_simulate(d: int, gamma: float, generations: int, seed=0, trees: int = 1,
                max_population: int = 10**8, law: str = "construction", mu: float | None = None) -> GWSample:
    """Simulate the dominating branching process.

    With ``law="construction"`` each symptomatic parent produces ``2d``
    asymptomatic children plus one extra per neighbouring recovery mark
    before its own recovery (2d independent ``Geometric(1/2) - 1`` counts).
    Each child independently becomes symptomatic with probability
    ``gamma / (1 + gamma)``.

    ``law="poisson"`` instead gives every individual Poisson(``mu``)
    offspring (``d`` and ``gamma`` are then ignored), a reference process
    with the same mean structure.
    """
    if generations < 0 or trees < 1:
        raise DomainError("need generations >= 0 and trees >= 1")
    if law not in ("construction", "poisson"):
        raise DomainError(f"unknown offspring law {law!r}")
    if law == "poisson" and (mu is None or mu < 0):
        raise DomainError("the poisson law needs mu >= 0")
    rng = np.random.default_rng(seed)
    q = gamma / (1.0 + gamma)
    deg = 2 * d
    counts = np.zeros((trees, generations + 1), dtype=np.int64)
    counts[:, 0] = 1
    for n in range(1, generations + 1):
        parents = counts[:, n - 1]
        total = int(parents.sum())
        if total == 0:
            break
        if total > max_population:
            raise RuntimeError("population exceeded max_population; is the process supercritical?")
        if law == "poisson":
            counts[:, n] = rng.poisson(mu * parents)
            continue
        extras = (rng.geometric(0.5, size=(total, deg)) - 1).sum(axis=1)
        ones = deg + extras
        twos = rng.binomial(ones, q)
        owner = np.repeat(np.arange(trees), parents)
        counts[:, n] = np.bincount(owner, weights=twos, minlength=trees).astype(np.int64)
    return GWSample(counts)


def site_open_prob(beta1: float, gamma: float, d: int) -> float:
    """P(max of 2d Exp(beta1/2d) clocks < Exp(1 + gamma)), in closed form.

    The alternating binomial sum is accumulated with ``math.fsum`` so that
    cancellation near ``beta1 = 0`` stays exact.
    """
    if beta1 < 0 or gamma < 0 or d < 1:
        raise DomainError("need beta1 >= 0, gamma >= 0, d >= 1")
    deg = 2 * d
    r = beta1 / (deg * (1.0 + gamma))
    p = math.fsum(comb(deg, k) * (-1) ** k / (1.0 + k * r) for k in range(deg + 1))
    return min(max(p, 0.0), 1.0)


def site_open_prob_quad(beta1: float, gamma: float, d: int) -> float:
    """Same probability by numerical quadrature of the conditioning integral."""
    from scipy.integrate import quad

    deg = 2 * d
    a = 1.0 + gamma
    val, _ = quad(lambda t: (-math.expm1(-beta1 * t / deg)) ** deg * a * math.exp(-a * t), 0, math.inf,
                  epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def beta_bar(gamma: float, d: int, target_p: float, rel_tol: float = 1e-9) -> float:
    """Unique ``beta1`` with ``site_open_prob(beta1, gamma, d) == target_p``."""
    if not 0 <= target_p < 1:
        raise DomainError("target probability must lie in [0, 1)")
    if target_p == 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while site_open_prob(hi, gamma, d) < target_p:
        lo, hi = hi, 2 * hi
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if site_open_prob(mid, gamma, d) < target_p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PercolationEstimate:
    estimate: float
    ci: tuple[float, float]
    hits: int
    replicas: int
    p_open: float


def reaches_boundary(open_sites: np.ndarray) -> bool:
    """Whether the directed growth from the centre of ``open_sites`` touches the box boundary.

    Infection spreads out of open sites only; closed sites are reached but
    do not pass it on.
    """
    shape = open_sites.shape
    centre = tuple(s // 2 for s in shape)
    if not open_sites[centre]:
        return any(s == 1 for s in shape)
    structure = ndimage.generate_binary_structure(open_sites.ndim, 1)
    labels, _ = ndimage.label(open_sites, structure=structure)
    cluster = labels == labels[centre]
    reached = ndimage.binary_dilation(cluster, structure=structure)
    edge = np.zeros(shape, dtype=bool)
    for axis in range(open_sites.ndim):
        sl = [slice(None)] * open_sites.ndim
        sl[axis] = 0
        edge[tuple(sl)] = True
        sl[axis] = -1
        edge[tuple(sl)] = True
    return bool(np.any(reached & edge))


def percolation_mc(beta1: float, gamma: float, d: int, R: int, replicas: int, seed=0) -> PercolationEstimate:
    """Fraction of independent site configurations in ``[-R, R]^d`` whose
    open cluster from the origin reaches the boundary (Wilson 95% interval)."""
    if d < 2:
        raise DomainError("the percolation comparison needs d >= 2")
    if R < 1 or replicas < 1:
        raise DomainError("need R >= 1 and replicas >= 1")
    p = site_open_prob(beta1, gamma, d)
    rng = np.random.default_rng(seed)
    shape = (2 * R + 1,) * d
    hits = sum(reaches_boundary(rng.random(shape) < p) for _ in range(replicas))
    return PercolationEstimate(hits / replicas, wilson_interval(hits, replicas), hits, replicas, p)


def bounds_report(d: int, gamma: float, beta1: float = 0.0, radius: int = 5,
                  target_p: float | None = None) -> dict:
    """All closed-form quantities for one parameter point, JSON-ready."""
    mu = float(gw_offspring_mean(d, gamma))
    sub = is_subcritical(d, gamma)
    if target_p is None:
        target_p = PC_UPPER_Z2
    report = {
        "inputs": {"d": d, "gamma": gamma, "beta1": beta1, "radius": radius, "target_p": target_p},
        "mu": mu,
        "subcritical": sub,
    }
    if sub:
        report["branching"] = {
            "radius_bound": float(gw_radius_bound(d, gamma, radius)),
            "total_mean": float(gw_total_mean(d, gamma)),
            "exterior_path_bound": exterior_path_bound(d, gamma, radius),
        }
    else:
        report["branching"] = "not applicable"
    report["site_open_prob"] = site_open_prob(beta1, gamma, d)
    report["beta_bar"] = beta_bar(gamma, d, target_p)
    return report

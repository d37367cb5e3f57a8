"""Exact continuous-time dynamics of the three-state contact process.

Two independent routes produce trajectories:

* :func:`run_ctmc` draws the chain directly (Gillespie direct method over an
  incrementally maintained rate table, compiled with numba);
* :func:`evolve_from_stream` replays a pre-sampled graphical representation
  (:class:`EventStream`) deterministically.

Both obey the same local rules.  A healthy site x becomes infected at rate
``beta1 * f1(x) + beta2 * f2(x)``; an asymptomatic site turns symptomatic at
rate ``gamma``; infected sites recover at rate one.
"""
from __future__ import annotations

import enum
import heapq
import math
import warnings
from dataclasses import dataclass, field
from itertools import repeat

import numpy as np

from . import _kernel
from .errors import BracketError, DomainError
from .lattice import Configuration, LatticeGeometry, neighbor_fraction, neighbor_table
from .montecarlo import map_replicas, mean_interval, replica_rng, wilson_interval

DEFAULT_MAX_EVENTS = 2**62


class Variant(enum.Enum):
    STANDARD = "standard"
    FOREST_FIRE = "forest-fire"
    COLLAPSED = "collapsed"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for v in cls:
            if v.value == key:
                return v
        raise DomainError(f"unknown variant {value!r}")


@dataclass(frozen=True)
class Params:
    """Model rates.

    ``variant`` selects the rule set:

    * ``standard``: the epidemic model.
    * ``forest-fire``: 0->1 at ``beta1*f1``, 1->2 at ``1+gamma``, 2->0 at
      ``regrowth`` (one by default); ``beta2`` must be zero.
    * ``collapsed``: the ``gamma = inf`` limit, a basic contact process on
      states {0, 2} with rate ``beta2``; ``gamma`` and ``beta1`` are unused.
    """

    beta1: float
    beta2: float
    gamma: float
    variant: Variant = Variant.STANDARD
    regrowth: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        for name in ("beta1", "beta2", "gamma", "regrowth"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be a finite nonnegative rate, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.variant is Variant.FOREST_FIRE and self.beta2 != 0:
            raise DomainError("the forest-fire variant requires beta2 = 0")
        if self.variant is not Variant.FOREST_FIRE and self.regrowth != 1.0:
            raise DomainError("regrowth is only adjustable in the forest-fire variant")

    def replace(self, **changes) -> "Params":
        kw = dict(beta1=self.beta1, beta2=self.beta2, gamma=self.gamma,
                  variant=self.variant, regrowth=self.regrowth)
        kw.update(changes)
        return Params(**kw)

    def kernel_rates(self, d: int):
        """(b1h, b2h, r12, r10, r20, new_state) for the compiled loop."""
        deg = 2 * d
        if self.variant is Variant.STANDARD:
            return self.beta1 / deg, self.beta2 / deg, self.gamma, 1.0, 1.0, 1
        if self.variant is Variant.FOREST_FIRE:
            return self.beta1 / deg, 0.0, 1.0 + self.gamma, 0.0, self.regrowth, 1
        return 0.0, self.beta2 / deg, 0.0, 0.0, 1.0, 2

    def as_dict(self) -> dict:
        out = dict(beta1=self.beta1, beta2=self.beta2, gamma=self.gamma, variant=self.variant.value)
        if self.variant is Variant.FOREST_FIRE:
            out["regrowth"] = self.regrowth
        return out


def local_rates(x: int, xi: Configuration, p: Params) -> list[tuple[int, float]]:
    """Possible transitions of site ``x`` as ``(target_state, rate)`` pairs."""
    s = int(xi.states[x])
    v = p.variant
    if v is Variant.STANDARD:
        if s == 0:
            return [(1, p.beta1 * neighbor_fraction(x, xi, 1) + p.beta2 * neighbor_fraction(x, xi, 2))]
        if s == 1:
            return [(2, p.gamma), (0, 1.0)]
        return [(0, 1.0)]
    if v is Variant.FOREST_FIRE:
        if s == 0:
            return [(1, p.beta1 * neighbor_fraction(x, xi, 1))]
        if s == 1:
            return [(2, 1.0 + p.gamma)]
        return [(0, p.regrowth)]
    if s == 0:
        return [(2, p.beta2 * neighbor_fraction(x, xi, 2))]
    if s == 1:
        raise DomainError("state 1 does not exist in the collapsed variant")
    return [(0, 1.0)]


def total_rate(xi: Configuration, p: Params) -> float:
    """Sum of all local rates, recomputed from scratch."""
    return math.fsum(r for x in range(xi.geometry.n_sites) for _, r in local_rates(x, xi, p))


@dataclass
class Trajectory:
    """Sampled densities of one run.

    ``extinction_time`` is the time at which the last infected site recovered,
    or ``None`` if infection was still present at the end of the run.
    """

    times: np.ndarray
    counts: np.ndarray
    final: Configuration
    extinction_time: float | None
    n_events: int
    params: Params
    seed: object = None
    snapshots: dict = field(default_factory=dict)
    changes: list | None = None

    @property
    def densities(self) -> np.ndarray:
        return self.counts / self.final.geometry.n_sites

    @property
    def infected_density(self) -> np.ndarray:
        return (self.counts[:, 1] + self.counts[:, 2]) / self.final.geometry.n_sites

    @property
    def extinct(self) -> bool:
        return self.extinction_time is not None

    def to_csv(self) -> str:
        rows = ["t,u0,u1,u2"]
        for t, (u0, u1, u2) in zip(self.times, self.densities):
            rows.append(",".join(repr(float(v)) for v in (t, u0, u1, u2)))
        return "\n".join(rows) + "\n"

    def summary(self) -> dict:
        u = self.densities[-1]
        return {
            "params": self.params.as_dict(),
            "seed": self.seed,
            "extinction_time": self.extinction_time,
            "final_densities": [float(v) for v in u],
            "n_events": int(self.n_events),
        }


def sample_grid(t_max: float, sample_dt: float) -> np.ndarray:
    """Times ``0, dt, 2dt, ...`` below ``t_max``, followed by ``t_max``."""
    if not t_max > 0 or not sample_dt > 0:
        raise DomainError("t_max and sample_dt must be positive")
    if math.isinf(t_max):
        return np.array([0.0, math.inf])
    n = int(math.floor(t_max / sample_dt + 1e-9))
    ts = [k * sample_dt for k in range(n + 1) if k * sample_dt < t_max]
    ts.append(float(t_max))
    return np.array(ts)


def _check_config(xi: Configuration, p: Params) -> None:
    if xi.geometry.L < 3:
        raise DomainError("simulation requires L >= 3")
    if p.variant is Variant.COLLAPSED and np.any(xi.states == 1):
        raise DomainError("the collapsed variant has no asymptomatic state")


def _run_kernel(xi0: Configuration, p: Params, record_times, snap_flags, rng, *,
                nbr=None, outside=None, stop_on_exit=False, max_events=DEFAULT_MAX_EVENTS, debug=False):
    g = xi0.geometry
    if nbr is None:
        nbr = neighbor_table(g)
    if outside is None:
        outside = np.zeros(g.n_sites, dtype=np.bool_)
    state = xi0.states.copy()
    b1h, b2h, r12, r10, r20, new_state = p.kernel_rates(g.d)
    out = _kernel.simulate(
        state, nbr, b1h, b2h, r12, r10, r20, new_state,
        np.asarray(record_times, dtype=np.float64), np.asarray(snap_flags, dtype=np.bool_),
        outside, stop_on_exit, max_events, debug, rng,
    )
    return state, out


def run_ctmc(xi0: Configuration, p: Params, t_max: float, sample_dt: float = 1.0, seed=0,
             snapshot_times=(), debug: bool = False) -> Trajectory:
    """Exact event-driven simulation up to ``t_max``.

    Densities are recorded every ``sample_dt`` and at ``t_max``; full
    configurations are stored for each time in ``snapshot_times``.  With
    ``debug=True`` the rate bookkeeping is recomputed from scratch after every
    event and any mismatch raises ``AssertionError``.  Identical seeds give
    bit-identical trajectories.
    """
    _check_config(xi0, p)
    samples = sample_grid(t_max, sample_dt)
    snaps = np.array(sorted(float(s) for s in snapshot_times), dtype=float)
    if snaps.size and (snaps.min() < 0 or snaps.max() > t_max):
        raise DomainError("snapshot times must lie in [0, t_max]")
    record = np.union1d(samples, snaps)
    snap_flags = np.isin(record, snaps)
    rng = np.random.default_rng(seed)
    state, (counts, snap_arr, t_ext, n_events, _, _, n_bad) = _run_kernel(
        xi0, p, record, snap_flags, rng, debug=debug)
    if n_bad:
        raise AssertionError(f"rate bookkeeping diverged from scratch recomputation ({n_bad} mismatches)")
    keep = np.isin(record, samples)
    g = xi0.geometry
    snapshots = {float(t): Configuration(g, s) for t, s in zip(record[snap_flags], snap_arr)}
    return Trajectory(
        times=record[keep], counts=counts[keep], final=Configuration(g, state),
        extinction_time=(t_ext if t_ext >= 0 else None), n_events=int(n_events),
        params=p, seed=_seed_repr(seed), snapshots=snapshots,
    )


def _seed_repr(seed):
    return seed if isinstance(seed, (int, type(None))) else repr(seed)


# ---------------------------------------------------------------------------
# graphical representation

EDGE_KINDS = ("arrow1", "arrow2")
SITE_KINDS = ("dot", "cross")


@dataclass
class EventStream:
    """Poisson clocks of the graphical representation on a space-time window.

    Edge clocks live on directed edges ``x -> nbr[x, j]``; site clocks on
    sites.  All event times of all clocks are stored in ``times``; clock ``c``
    owns ``times[offsets[c]:offsets[c + 1]]`` in increasing order.  Clock ids
    are laid out as ``(k * n_sites + x) * 2d + j`` for edge kind ``k``,
    followed by ``n_edge_clocks + m * n_sites + x`` for site kind ``m``.
    Simultaneous events are resolved by increasing clock id.
    """

    geometry: LatticeGeometry
    horizon: float
    edge_kinds: tuple[str, ...]
    site_kinds: tuple[str, ...]
    rates: dict
    times: np.ndarray
    offsets: np.ndarray
    variant: Variant = Variant.STANDARD
    seed: object = None

    def __post_init__(self):
        self._nbr = neighbor_table(self.geometry)

    @property
    def n_edge_clocks(self) -> int:
        return len(self.edge_kinds) * self.geometry.n_sites * self.geometry.degree

    @property
    def n_clocks(self) -> int:
        return self.n_edge_clocks + len(self.site_kinds) * self.geometry.n_sites

    def edge_clock(self, kind: str, x: int, j: int) -> int:
        g = self.geometry
        return (self.edge_kinds.index(kind) * g.n_sites + x) * g.degree + j

    def site_clock(self, kind: str, x: int) -> int:
        return self.n_edge_clocks + self.site_kinds.index(kind) * self.geometry.n_sites + x

    def decode(self, clock: int):
        """``(kind, x, y)`` for an edge clock, ``(kind, x, None)`` for a site clock."""
        g = self.geometry
        if clock < self.n_edge_clocks:
            k, rest = divmod(clock, g.n_sites * g.degree)
            x, j = divmod(rest, g.degree)
            return self.edge_kinds[k], x, int(self._nbr[x, j])
        m, x = divmod(clock - self.n_edge_clocks, g.n_sites)
        return self.site_kinds[m], x, None

    def clock_times(self, clock: int) -> np.ndarray:
        return self.times[self.offsets[clock]:self.offsets[clock + 1]]

    def count(self, kind: str) -> int:
        """Total number of events of one clock family."""
        g = self.geometry
        if kind in self.edge_kinds:
            k = self.edge_kinds.index(kind)
            span = g.n_sites * g.degree
            lo, hi = k * span, (k + 1) * span
        else:
            m = self.site_kinds.index(kind)
            lo = self.n_edge_clocks + m * g.n_sites
            hi = lo + g.n_sites
        return int(self.offsets[hi] - self.offsets[lo])

    def validate(self) -> None:
        if self.offsets.shape != (self.n_clocks + 1,) or self.offsets[-1] != self.times.size:
            raise DomainError("clock offsets do not match the window")
        if self.times.size and (self.times.min() < 0 or self.times.max() > self.horizon):
            raise DomainError("event outside the time window")
        lens = np.diff(self.offsets)
        if np.any(lens < 0):
            raise DomainError("negative clock length")
        inner = np.ones(self.times.size, dtype=bool)
        inner[self.offsets[1:-1][self.offsets[1:-1] < self.times.size]] = False
        if self.times.size > 1:
            steps = np.diff(self.times)
            if np.any(steps[inner[1:]] <= 0):
                raise DomainError("clock times must be strictly increasing")

    def events(self, t_max: float | None = None):
        """Lazily merged ``(time, clock)`` pairs in global time order."""
        per_clock = []
        for c in np.flatnonzero(np.diff(self.offsets)):
            ts = self.clock_times(c).tolist()
            per_clock.append(zip(ts, repeat(int(c))))
        for t, c in heapq.merge(*per_clock):
            if t_max is not None and t > t_max:
                return
            yield t, c

    def relabel(self, edge_map: dict, site_map: dict, variant=None) -> "EventStream":
        """New stream whose clock families are unions of existing ones.

        ``edge_map`` maps a new edge kind to the list of old edge kinds whose
        events it collects (per directed edge); likewise ``site_map``.
        """
        g = self.geometry
        for mapping, known in ((edge_map, self.edge_kinds), (site_map, self.site_kinds)):
            for sources in mapping.values():
                for s in sources:
                    if s not in known:
                        raise DomainError(f"unknown clock family {s!r}")

        def union(clocks):
            ts = [self.clock_times(c) for c in clocks]
            return np.sort(np.concatenate(ts)) if ts else np.empty(0)

        chunks = []
        for sources in edge_map.values():
            for x in range(g.n_sites):
                for j in range(g.degree):
                    chunks.append(union([self.edge_clock(s, x, j) for s in sources]))
        for sources in site_map.values():
            for x in range(g.n_sites):
                chunks.append(union([self.site_clock(s, x) for s in sources]))
        lengths = [c.size for c in chunks]
        rates = {name: sum(self.rates[s] for s in src) for name, src in {**edge_map, **site_map}.items()}
        return EventStream(
            geometry=g, horizon=self.horizon,
            edge_kinds=tuple(edge_map), site_kinds=tuple(site_map), rates=rates,
            times=np.concatenate(chunks) if chunks else np.empty(0),
            offsets=np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64),
            variant=Variant.parse(variant) if variant is not None else self.variant,
            seed=self.seed,
        )


def poisson_stream(geometry: LatticeGeometry, horizon: float, edge_rates: dict, site_rates: dict,
                   seed=0, variant=Variant.STANDARD) -> EventStream:
    """Independent homogeneous Poisson clocks with the given per-clock rates.

    Edge rates are per directed edge, site rates per site.
    """
    if not (horizon > 0 and math.isfinite(horizon)):
        raise DomainError("the time window must be finite and positive")
    for k, r in {**edge_rates, **site_rates}.items():
        if not (r >= 0 and math.isfinite(r)):
            raise DomainError(f"rate of {k!r} must be finite and nonnegative")
    rng = np.random.default_rng(seed)
    g = geometry
    clock_rates = np.concatenate(
        [np.full(g.n_sites * g.degree, edge_rates[k], dtype=float) for k in edge_rates]
        + [np.full(g.n_sites, site_rates[k], dtype=float) for k in site_rates]
    )
    n = rng.poisson(clock_rates * horizon)
    owner = np.repeat(np.arange(clock_rates.size), n)
    times = rng.uniform(0.0, horizon, size=owner.size)
    order = np.lexsort((times, owner))
    es = EventStream(
        geometry=g, horizon=float(horizon), edge_kinds=tuple(edge_rates), site_kinds=tuple(site_rates),
        rates={**edge_rates, **site_rates}, times=times[order],
        offsets=np.concatenate([[0], np.cumsum(n)]).astype(np.int64),
        variant=Variant.parse(variant), seed=_seed_repr(seed),
    )
    return es


def stream_rates(p: Params, d: int) -> tuple[dict, dict]:
    deg = 2 * d
    if p.variant is Variant.STANDARD:
        return {"arrow1": p.beta1 / deg, "arrow2": p.beta2 / deg}, {"dot": p.gamma, "cross": 1.0}
    if p.variant is Variant.FOREST_FIRE:
        return {"arrow1": p.beta1 / deg, "arrow2": 0.0}, {"dot": 1.0 + p.gamma, "cross": p.regrowth}
    return {"arrow1": 0.0, "arrow2": p.beta2 / deg}, {"dot": 0.0, "cross": 1.0}


def sample_event_stream(geometry: LatticeGeometry, horizon: float, p: Params, seed=0) -> EventStream:
    """Graphical representation of ``p`` on the whole torus over ``[0, horizon]``.

    Type-1 and type-2 arrows ring at ``beta1/2d`` and ``beta2/2d`` on every
    directed edge, dots at ``gamma`` and crosses at rate one on every site.
    In the forest-fire variant dots ring at ``1 + gamma`` and crosses at the
    regrowth rate; in the collapsed variant only type-2 arrows and crosses
    are present.
    """
    edge, site = stream_rates(p, geometry.d)
    return poisson_stream(geometry, horizon, edge, site, seed=seed, variant=p.variant)


def apply_event(states, kind: str, x: int, y, variant: Variant) -> int | None:
    """Apply one graphical event in place; return the changed site or None."""
    if kind == "arrow1":
        if states[x] == 1 and states[y] == 0:
            states[y] = 1
            return y
    elif kind == "arrow2":
        if states[x] == 2 and states[y] == 0:
            states[y] = 2 if variant is Variant.COLLAPSED else 1
            return y
    elif kind == "dot":
        if states[x] == 1:
            states[x] = 2
            return x
    elif kind == "cross":
        s = states[x]
        if s == 2 or (s == 1 and variant is not Variant.FOREST_FIRE):
            states[x] = 0
            return x
    else:
        raise DomainError(f"unknown event kind {kind!r}")
    return None


def evolve_from_stream(xi0: Configuration, es: EventStream, t_max: float | None = None,
                       sample_dt: float = 1.0, record_changes: bool = False) -> Trajectory:
    """Deterministic replay of the graphical representation ``es`` from ``xi0``.

    Events are processed in global time order.  A type-1 arrow infects its
    head when the tail is 1 and the head is 0; a type-2 arrow does the same
    from a tail in state 2; a dot turns a 1 into a 2; a cross heals an
    infected site.
    """
    if xi0.geometry != es.geometry:
        raise DomainError("initial configuration and event stream live on different lattices")
    es.validate()
    t_max = es.horizon if t_max is None else float(t_max)
    if t_max > es.horizon:
        raise DomainError("cannot replay beyond the stream's time window")
    variant = es.variant
    p_dummy = Params(0.0, 0.0, 0.0, variant=variant)
    _check_config(xi0, p_dummy)
    states = xi0.states.tolist()
    samples = sample_grid(t_max, sample_dt)
    n = len(states)
    n_inf = sum(1 for s in states if s)
    c = [n - n_inf, states.count(1), states.count(2)]
    counts = np.zeros((samples.size, 3), dtype=np.int64)
    changes = [] if record_changes else None
    k = 0
    t_ext = 0.0 if n_inf == 0 else None
    n_events = 0
    for t, clock in (es.events(t_max) if t_ext is None else ()):
        while k < samples.size and samples[k] < t:
            counts[k] = c
            k += 1
        kind, x, y = es.decode(clock)
        n_events += 1
        before = states[x if y is None else y]
        site = apply_event(states, kind, x, y, variant)
        if site is None:
            continue
        c[before] -= 1
        c[states[site]] += 1
        if changes is not None:
            changes.append((t, site, states[site]))
        if c[0] == n:
            t_ext = t
            break
    counts[k:] = c
    return Trajectory(
        times=samples, counts=counts, final=Configuration(xi0.geometry, np.array(states, dtype=np.int8)),
        extinction_time=t_ext, n_events=n_events, params=p_dummy, seed=es.seed, changes=changes,
    )


def contact_process_from_stream(infected0, es: EventStream, arrow_kind: str, t_max=None) -> list:
    """Basic two-state contact process driven by one arrow family and the crosses.

    ``infected0`` is a boolean array over the sites.  Returns the list of
    ``(time, site, infected)`` changes, for comparison with
    :func:`evolve_from_stream` in the limiting cases ``gamma = 0`` and
    ``gamma = inf``.
    """
    occ = [bool(v) for v in np.asarray(infected0)]
    t_max = es.horizon if t_max is None else t_max
    log = []
    for t, clock in es.events(t_max):
        kind, x, y = es.decode(clock)
        if kind == arrow_kind:
            if occ[x] and not occ[y]:
                occ[y] = True
                log.append((t, y, True))
        elif kind == "cross":
            if occ[x]:
                occ[x] = False
                log.append((t, x, False))
        if not any(occ):
            break
    return log


# ---------------------------------------------------------------------------
# replicated experiments

def initial_configuration(spec, g: LatticeGeometry, rng=None) -> Configuration:
    """Build a start: ``single-1``, ``single-2``, ``all-1``, ``all-2``,
    ``healthy`` or ``("bernoulli", p1, p2)``."""
    if isinstance(spec, Configuration):
        return spec.copy()
    if isinstance(spec, tuple):
        name, p1, p2 = spec
        if name != "bernoulli":
            raise DomainError(f"unknown initial condition {spec!r}")
        return Configuration.bernoulli(g, p1, p2, rng)
    key = str(spec).replace("_", "-").lower()
    table = {
        "single-1": lambda: Configuration.single(g, 1),
        "single-2": lambda: Configuration.single(g, 2),
        "all-1": lambda: Configuration.filled(g, 1),
        "all-2": lambda: Configuration.filled(g, 2),
        "healthy": lambda: Configuration.filled(g, 0),
    }
    if key not in table:
        raise DomainError(f"unknown initial condition {spec!r}")
    return table[key]()


@dataclass(frozen=True)
class SurvivalEstimate:
    estimate: float
    ci: tuple[float, float]
    survivors: int
    replicas: int
    density: float
    density_ci: tuple[float, float]


def _final_infected(xi0, p, t_max, rng, nbr):
    _, (counts, *_rest) = _run_kernel(xi0, p, [float(t_max)], [False], rng, nbr=nbr)
    return int(counts[0, 1] + counts[0, 2])


def survival_estimate(p: Params, geometry: LatticeGeometry, xi0, t_max: float, replicas: int,
                      seed=0, workers: int = 1, key: tuple = ()) -> SurvivalEstimate:
    """Fraction of independent replicas still infected at ``t_max``.

    ``xi0`` is a :class:`Configuration` or an initial-condition spec (random
    specs are redrawn per replica).  Replica ``i`` uses the generator derived
    from ``(seed, *key, i)``, so estimates at different parameters share
    common random numbers.  The interval is the 95% Wilson score interval.
    """
    if replicas < 1:
        raise DomainError("need at least one replica")
    nbr = neighbor_table(geometry)

    def one(i):
        rng = replica_rng(seed, *key, i)
        start = initial_configuration(xi0, geometry, rng)
        _check_config(start, p)
        return _final_infected(start, p, t_max, rng, nbr)

    infected = np.array(map_replicas(one, replicas, workers))
    alive = int(np.count_nonzero(infected))
    dens, dlo, dhi = mean_interval(infected / geometry.n_sites)
    return SurvivalEstimate(alive / replicas, wilson_interval(alive, replicas), alive, replicas,
                            dens, (dlo, dhi))


def exit_estimate(p: Params, d: int, radius: int, replicas: int, seed=0, start_state: int = 2,
                  max_events: int = 10**7, workers: int = 1) -> SurvivalEstimate:
    """Probability that the infection started by one site ever leaves ``[-r, r]^d``.

    Runs on a torus of side ``2r + 3``: until the first infection outside
    the box, the box is isolated exactly as in the infinite lattice, so the
    estimate is exact for ``Z^d``.  Each run stops at exit or extinction.
    """
    if radius < 1:
        raise DomainError("radius must be at least one")
    g = LatticeGeometry(d, 2 * radius + 3)
    nbr = neighbor_table(g)
    centre = np.array(g.coords(g.origin))
    coords = np.stack(np.unravel_index(np.arange(g.n_sites), g.shape), axis=1)
    outside = np.abs(coords - centre).max(axis=1) > radius
    xi0 = Configuration.single(g, start_state)
    _check_config(xi0, p)

    def one(i):
        _, (_, _, t_ext, _, exited, truncated, _) = _run_kernel(
            xi0, p, [math.inf], [False], replica_rng(seed, i), nbr=nbr, outside=outside,
            stop_on_exit=True, max_events=max_events)
        if truncated:
            raise RuntimeError("event budget exhausted before exit or extinction")
        return bool(exited)

    hits = int(sum(map_replicas(one, replicas, workers)))
    return SurvivalEstimate(hits / replicas, wilson_interval(hits, replicas), hits, replicas,
                            float("nan"), (float("nan"), float("nan")))


@dataclass
class CriticalBracket:
    lo: float
    hi: float
    evaluations: list

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi


def estimate_beta_c(vary: str, p: Params, geometry: LatticeGeometry, t_max: float, replicas: int,
                    tolerance: float, bracket: tuple[float, float], threshold: float = 0.5,
                    initial="all-1", seed=0, workers: int = 1) -> CriticalBracket:
    """Bisection for the infection rate at which survival to ``t_max`` crosses ``threshold``.

    ``vary`` is ``"beta1"`` or ``"beta2"``; the other parameters are taken
    from ``p``.  Every evaluation reuses the same replica seeds.  The result
    is a finite-size, finite-time estimate.
    """
    if vary not in ("beta1", "beta2"):
        raise DomainError("vary must be 'beta1' or 'beta2'")
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise DomainError("bracket must satisfy lo < hi")
    other = p.beta2 if vary == "beta1" else p.beta1
    proven = (
        p.variant is Variant.COLLAPSED
        or (p.variant is Variant.STANDARD and p.gamma == 0 and vary == "beta1")
        or (vary == "beta1" and hi <= other)
        or (vary == "beta2" and lo >= other)
    )
    if not proven:
        warnings.warn("survival is not known to be monotone over this bracket", stacklevel=2)
    evals = []

    def surv(value):
        est = survival_estimate(p.replace(**{vary: value}), geometry, initial, t_max, replicas,
                                seed=seed, workers=workers)
        evals.append((value, est.estimate))
        return est.estimate

    s_lo, s_hi = surv(lo), surv(hi)
    if not (s_lo < threshold <= s_hi):
        raise BracketError(
            f"survival at the bracket ends ({s_lo:.3f}, {s_hi:.3f}) does not straddle {threshold}")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if surv(mid) >= threshold:
            hi = mid
        else:
            lo = mid
    return CriticalBracket(lo, hi, evals)

"""Monotone couplings of two processes on one graphical representation.

A coupled site carries a pair of states ``ab`` (``a`` in the lower process,
``b`` in the higher one).  Starting from equal configurations, the three
constructions below only ever visit

    S = {00, 01, 02, 11, 12, 22},

so the infected set of the higher process always contains that of the lower
one.  Each construction is a list of clock families; the lookup tables give
the pair at the head of an arrow (edge families) or at the marked site
(vertex families) after the event.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EventStream, Params, Variant, apply_event, poisson_stream, sample_grid
from .errors import DomainError
from .lattice import Configuration, LatticeGeometry
from .montecarlo import replica_rng

PAIRS = ("00", "01", "02", "11", "12", "22")
CODE = {p: i for i, p in enumerate(PAIRS)}
FIRST = tuple(int(p[0]) for p in PAIRS)
SECOND = tuple(int(p[1]) for p in PAIRS)


class CouplingKind(enum.Enum):
    BETA1 = "beta1"
    BETA2 = "beta2"
    GAMMA = "gamma"

    @classmethod
    def parse(cls, value) -> "CouplingKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown coupling kind {value!r}") from None


BOTH = ("arrow1", "arrow2")

# family -> (events it triggers in the lower process, in the higher process)
EFFECTS = {
    CouplingKind.BETA1: {
        "arrow": (BOTH, BOTH),
        "arrow1p": (("arrow2",), BOTH),
        "arrow2": (("arrow2",), ("arrow2",)),
        "dot": (("dot",), ("dot",)),
        "cross": (("cross",), ("cross",)),
    },
    CouplingKind.BETA2: {
        "arrow": (BOTH, BOTH),
        "arrow2": (("arrow2",), ("arrow2",)),
        "arrow2p": ((), ("arrow2",)),
        "dot": (("dot",), ("dot",)),
        "cross": (("cross",), ("cross",)),
    },
    CouplingKind.GAMMA: {
        "arrow": (BOTH, BOTH),
        "arrow2": (("arrow2",), ("arrow2",)),
        "dot": (("dot",), ("dot",)),
        "white_dot": ((), ("dot",)),
        "cross": (("cross",), ("cross",)),
    },
}
EDGE_FAMILIES = {k: tuple(f for f in fams if f.startswith("arrow")) for k, fams in EFFECTS.items()}
VERTEX_FAMILIES = {k: tuple(f for f in fams if not f.startswith("arrow")) for k, fams in EFFECTS.items()}


def _rows(text: str) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(line.split()) for line in text.strip().splitlines())


_SHARED = _rows("""
    00 01 02 11 12 22
    01 01 02 11 12 22
    01 01 02 11 12 22
    11 11 12 11 12 22
    11 11 12 11 12 22
    11 11 12 11 12 22
""")

_ARROW2 = _rows("""
    00 01 02 11 12 22
    00 01 02 11 12 22
    01 01 02 11 12 22
    00 01 02 11 12 22
    01 01 02 11 12 22
    11 11 12 11 12 22
""")

# Rows are the pair at the tail x, columns the pair at the head y.
TABLES = {
    CouplingKind.BETA1: {
        "arrow": _SHARED,
        "arrow1p": _rows("""
            00 01 02 11 12 22
            01 01 02 11 12 22
            01 01 02 11 12 22
            01 01 02 11 12 22
            01 01 02 11 12 22
            11 11 12 11 12 22
        """),
        "arrow2": _ARROW2,
        "dot": ("00", "02", "02", "22", "22", "22"),
        "cross": ("00",) * 6,
    },
    # The published β2 table repeats columns of the β1 table; these entries
    # follow the stated arrow semantics instead (checked below).
    CouplingKind.BETA2: {
        "arrow": _SHARED,
        "arrow2": _ARROW2,
        "arrow2p": _rows("""
            00 01 02 11 12 22
            00 01 02 11 12 22
            01 01 02 11 12 22
            00 01 02 11 12 22
            01 01 02 11 12 22
            01 01 02 11 12 22
        """),
        "dot": ("00", "02", "02", "22", "22", "22"),
        "cross": ("00",) * 6,
    },
    CouplingKind.GAMMA: {
        "arrow": _SHARED,
        "arrow2": _ARROW2,
        "dot": ("00", "02", "02", "22", "22", "22"),
        "white_dot": ("00", "02", "02", "12", "12", "22"),
        "cross": ("00",) * 6,
    },
}


def _single(events, tail: int, head: int | None) -> int:
    """State after applying ``events`` of one process to (tail, head)."""
    if head is None:
        s = [tail]
        for e in events:
            apply_event(s, e, 0, None, Variant.STANDARD)
        return s[0]
    s = [tail, head]
    for e in events:
        apply_event(s, e, 0, 1, Variant.STANDARD)
    return s[1]


def rule_transition(kind: CouplingKind, family: str, x: str, y: str | None = None) -> str:
    """Pair produced by applying each coordinate's own rule (no table lookup)."""
    low, high = EFFECTS[kind][family]
    if y is None:
        return f"{_single(low, int(x[0]), None)}{_single(high, int(x[1]), None)}"
    return f"{_single(low, int(x[0]), int(y[0]))}{_single(high, int(x[1]), int(y[1]))}"


def regenerate_tables(kind: CouplingKind) -> dict:
    """Rebuild the lookup tables of ``kind`` from the arrow/dot/cross rules."""
    out = {}
    for f in EDGE_FAMILIES[kind]:
        out[f] = tuple(tuple(rule_transition(kind, f, x, y) for y in PAIRS) for x in PAIRS)
    for f in VERTEX_FAMILIES[kind]:
        out[f] = tuple(rule_transition(kind, f, x) for x in PAIRS)
    return out


def _assert_tables_consistent():
    for kind, table in TABLES.items():
        regen = regenerate_tables(kind)
        if set(regen) != set(table):
            raise RuntimeError(f"{kind.value} table lists the wrong clock families")
        for f, entries in table.items():
            if regen[f] != entries:
                raise RuntimeError(f"{kind.value} table, family {f!r}: transcription disagrees with the rules")


_assert_tables_consistent()


def pair_transition(kind, event: str, x_pair: str, y_pair: str | None = None):
    """Table lookup for one event.

    Edge events return the new pair at the head ``y_pair``; vertex events
    return the new pair at ``x_pair`` and ignore ``y_pair``.
    """
    kind = CouplingKind.parse(kind)
    table = TABLES[kind]
    if event not in table:
        raise DomainError(f"{event!r} is not a clock of the {kind.value} coupling")
    for p in (x_pair, y_pair):
        if p is not None and p not in CODE:
            raise DomainError(f"{p!r} is not a coupled pair state in S")
    if event in VERTEX_FAMILIES[kind]:
        return table[event][CODE[x_pair]]
    if y_pair is None:
        raise DomainError(f"{event!r} is an edge event and needs the head pair")
    return table[event][CODE[x_pair]][CODE[y_pair]]


@dataclass
class ClosureReport:
    kind: CouplingKind
    cases: int
    edge_cases: int
    vertex_cases: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "cases": self.cases,
            "edge_cases": self.edge_cases,
            "vertex_cases": self.vertex_cases,
            "violations": [list(v) for v in self.violations],
        }


def verify_table_closure(kind, tables: dict | None = None) -> ClosureReport:
    """Check every table cell: output in S and each coordinate follows its own rule.

    ``tables`` defaults to the embedded lookup data; pass another table set
    (same layout) to audit it.
    """
    kind = CouplingKind.parse(kind)
    tables = TABLES[kind] if tables is None else tables
    violations = []
    n_edge = n_vertex = 0
    for f in EDGE_FAMILIES[kind]:
        for (i, x), (j, y) in itertools.product(enumerate(PAIRS), enumerate(PAIRS)):
            n_edge += 1
            got = tables[f][i][j]
            if got not in CODE:
                violations.append((f, x, y, got, "outside S"))
            want = rule_transition(kind, f, x, y)
            if got != want:
                violations.append((f, x, y, got, f"marginal rule gives {want}"))
    for f in VERTEX_FAMILIES[kind]:
        for i, x in enumerate(PAIRS):
            n_vertex += 1
            got = tables[f][i]
            if got not in CODE:
                violations.append((f, x, None, got, "outside S"))
            want = rule_transition(kind, f, x)
            if got != want:
                violations.append((f, x, None, got, f"marginal rule gives {want}"))
    return ClosureReport(kind, n_edge + n_vertex, n_edge, n_vertex, violations)


@dataclass(frozen=True)
class Coupling:
    """Two processes differing in one parameter, ``params`` being the lower one.

    ``prime`` is the larger value of the varied parameter (``beta1'``,
    ``beta2'`` or ``gamma'``).
    """

    kind: CouplingKind
    params: Params
    prime: float

    def __post_init__(self):
        object.__setattr__(self, "kind", CouplingKind.parse(self.kind))
        p = self.params
        if p.variant is not Variant.STANDARD:
            raise DomainError("couplings are defined for the standard variant")
        if not (math.isfinite(self.prime) and self.prime >= 0):
            raise DomainError("the primed parameter must be a finite rate")
        b1, b2, g, q = p.beta1, p.beta2, p.gamma, self.prime
        ok = {
            CouplingKind.BETA1: b1 <= q <= b2,
            CouplingKind.BETA2: b1 <= b2 <= q,
            CouplingKind.GAMMA: b1 <= b2 and g <= q,
        }[self.kind]
        if not ok:
            need = {
                CouplingKind.BETA1: "beta1 <= beta1' <= beta2",
                CouplingKind.BETA2: "beta1 <= beta2 <= beta2'",
                CouplingKind.GAMMA: "beta1 <= beta2 and gamma <= gamma'",
            }[self.kind]
            raise DomainError(f"parameter ordering violated: need {need}")

    @property
    def high(self) -> Params:
        field_name = {CouplingKind.BETA1: "beta1", CouplingKind.BETA2: "beta2", CouplingKind.GAMMA: "gamma"}
        return self.params.replace(**{field_name[self.kind]: self.prime})

    def family_rates(self, d: int) -> tuple[dict, dict]:
        b1, b2, g, q = self.params.beta1, self.params.beta2, self.params.gamma, self.prime
        deg = 2 * d
        if self.kind is CouplingKind.BETA1:
            edge = {"arrow": b1 / deg, "arrow1p": (q - b1) / deg, "arrow2": (b2 - q) / deg}
            site = {"dot": g, "cross": 1.0}
        elif self.kind is CouplingKind.BETA2:
            edge = {"arrow": b1 / deg, "arrow2": (b2 - b1) / deg, "arrow2p": (q - b2) / deg}
            site = {"dot": g, "cross": 1.0}
        else:
            edge = {"arrow": b1 / deg, "arrow2": (b2 - b1) / deg}
            site = {"dot": g, "white_dot": q - g, "cross": 1.0}
        return edge, site


def coupled_stream(c: Coupling, geometry: LatticeGeometry, horizon: float, seed=0) -> EventStream:
    edge, site = c.family_rates(geometry.d)
    return poisson_stream(geometry, horizon, edge, site, seed=seed)


def marginal_stream(c: Coupling, es: EventStream, which: int) -> EventStream:
    """Single-process graphical representation seen by one marginal (0 low, 1 high)."""
    if which not in (0, 1):
        raise DomainError("which must be 0 (lower process) or 1 (higher process)")
    eff = EFFECTS[c.kind]
    edge_map = {k: [f for f in EDGE_FAMILIES[c.kind] if k in eff[f][which]] for k in ("arrow1", "arrow2")}
    site_map = {k: [f for f in VERTEX_FAMILIES[c.kind] if k in eff[f][which]] for k in ("dot", "cross")}
    return es.relabel(edge_map, site_map, variant=Variant.STANDARD)


@dataclass
class CoupledTrajectory:
    times: np.ndarray
    infected_low: np.ndarray
    infected_high: np.ndarray
    dominated: np.ndarray
    low: Configuration
    high: Configuration
    n_events: int
    changes: tuple | None = None

    def to_csv(self) -> str:
        n = self.low.geometry.n_sites
        rows = ["t,u_inf_low,u_inf_high,dominated"]
        for t, a, b, dom in zip(self.times, self.infected_low, self.infected_high, self.dominated):
            rows.append(f"{float(t)!r},{float(a / n)!r},{float(b / n)!r},{int(dom)}")
        return "\n".join(rows) + "\n"


def coupled_run(c: Coupling, xi0: Configuration, t_max: float, seed=0, sample_dt: float = 1.0,
                stream: EventStream | None = None, debug: bool = False,
                record_changes: bool = False) -> CoupledTrajectory:
    """Joint evolution of both processes from the shared start ``xi0``.

    Pair states are advanced by table lookup.  With ``debug=True`` the
    containment of infected sets is asserted after every event.
    """
    g = xi0.geometry
    es = coupled_stream(c, g, t_max, seed) if stream is None else stream
    if es.geometry != g:
        raise DomainError("stream and configuration live on different lattices")
    table = TABLES[c.kind]
    edge_fams = set(EDGE_FAMILIES[c.kind])
    code = [CODE[f"{s}{s}"] for s in xi0.states.tolist()]
    samples = sample_grid(t_max, sample_dt)
    n_low = sum(1 for k in code if FIRST[k])
    n_high = sum(1 for k in code if SECOND[k])
    inf_low = np.zeros(samples.size, dtype=np.int64)
    inf_high = np.zeros(samples.size, dtype=np.int64)
    dominated = np.zeros(samples.size, dtype=bool)
    log_low, log_high = ([], []) if record_changes else (None, None)

    def contained():
        a = np.asarray(code)
        return not np.any((np.take(FIRST, a) > 0) & (np.take(SECOND, a) == 0))

    k = 0
    n_events = 0
    for t, clock in es.events(t_max):
        while k < samples.size and samples[k] < t:
            inf_low[k], inf_high[k], dominated[k] = n_low, n_high, contained()
            k += 1
        fam, x, y = es.decode(clock)
        n_events += 1
        site = y if fam in edge_fams else x
        old = code[site]
        new = CODE[table[fam][code[x]][code[y]] if fam in edge_fams else table[fam][code[x]]]
        if new == old:
            continue
        code[site] = new
        n_low += (FIRST[new] > 0) - (FIRST[old] > 0)
        n_high += (SECOND[new] > 0) - (SECOND[old] > 0)
        if record_changes:
            if FIRST[new] != FIRST[old]:
                log_low.append((t, site, FIRST[new]))
            if SECOND[new] != SECOND[old]:
                log_high.append((t, site, SECOND[new]))
        if debug and FIRST[new] and not SECOND[new]:
            raise AssertionError(f"domination broken at site {site}, t={t}")
        if n_high == 0:
            break
    while k < samples.size:
        inf_low[k], inf_high[k], dominated[k] = n_low, n_high, contained()
        k += 1
    a = np.asarray(code)
    return CoupledTrajectory(
        times=samples, infected_low=inf_low, infected_high=inf_high, dominated=dominated,
        low=Configuration(g, np.take(FIRST, a)), high=Configuration(g, np.take(SECOND, a)),
        n_events=n_events, changes=(log_low, log_high) if record_changes else None,
    )


# ---------------------------------------------------------------------------
# beta1 > beta2: the same construction leaves S

_BREAK_EFFECTS = {
    "arrow": (BOTH, BOTH),
    "arrow1": (("arrow1",), ("arrow1",)),
    "dot": (("dot",), ("dot",)),
    "white_dot": ((), ("dot",)),
    "cross": (("cross",), ("cross",)),
}


@dataclass
class BreakReport:
    found: bool
    pair: str | None
    time: float | None
    site: int | None
    history: list

    def as_dict(self) -> dict:
        return {"found": self.found, "pair": self.pair, "time": self.time, "site": self.site,
                "history": [list(h) for h in self.history]}


def minimal_break() -> BreakReport:
    """Smallest event sequence producing a pair outside S when ``beta1 > beta2``.

    Two sites start infected-asymptomatic in both processes; a white dot
    makes the tail ``12``; a type-1 arrow onto a healthy head then infects it
    only in the lower process, giving ``10``.
    """
    tail, head = [1, 1], [0, 0]
    history = [("start", "11", "00")]
    tail[1] = _single(("dot",), tail[1], None)
    history.append(("white_dot", f"{tail[0]}{tail[1]}", "00"))
    head = [_single(("arrow1",), tail[0], head[0]), _single(("arrow1",), tail[1], head[1])]
    pair = f"{head[0]}{head[1]}"
    history.append(("arrow1", f"{tail[0]}{tail[1]}", pair))
    return BreakReport(pair not in CODE, pair, None, 1, history)


def coupling_break_demo(beta1: float, beta2: float, gamma: float, gamma_prime: float,
                        geometry: LatticeGeometry, t_max: float, seed=0,
                        xi0: Configuration | None = None) -> BreakReport:
    """Run the gamma-type joint construction with ``beta1 > beta2`` until a pair leaves S.

    Shared arrows ring at ``beta2/2d`` and act on any infected tail; the
    excess ``(beta1 - beta2)/2d`` is carried by arrows that only 1s can use.
    Pairs are updated coordinatewise from the single-process rules.
    """
    if not beta1 > beta2:
        raise DomainError("the demonstration needs beta1 > beta2")
    if not gamma <= gamma_prime:
        raise DomainError("need gamma <= gamma'")
    deg = geometry.degree
    es = poisson_stream(geometry, t_max,
                        {"arrow": beta2 / deg, "arrow1": (beta1 - beta2) / deg},
                        {"dot": gamma, "white_dot": gamma_prime - gamma, "cross": 1.0}, seed=seed)
    start = Configuration.filled(geometry, 1) if xi0 is None else xi0
    low = start.states.tolist()
    high = list(low)
    edge = {"arrow", "arrow1"}
    for t, clock in es.events():
        fam, x, y = es.decode(clock)
        e_low, e_high = _BREAK_EFFECTS[fam]
        site = y if fam in edge else x
        for states, events in ((low, e_low), (high, e_high)):
            for e in events:
                apply_event(states, e, x, y, Variant.STANDARD)
        pair = f"{low[site]}{high[site]}"
        if pair not in CODE:
            return BreakReport(True, pair, t, site, [(fam, x, y)])
    return BreakReport(False, None, None, None, [])


def coupled_replicas(c: Coupling, geometry: LatticeGeometry, xi0, t_max: float, replicas: int,
                     seed=0, sample_dt: float = 1.0):
    """Iterate over independent coupled runs (replica i seeded from ``(seed, i)``)."""
    for i in range(replicas):
        yield coupled_run(c, xi0, t_max, seed=replica_rng(seed, i), sample_dt=sample_dt, debug=True)

import numpy as np
import pytest

from asymcp.dynamics import EDGE_KINDS, SITE_KINDS, EventStream, Variant


def make_stream(g, horizon, events, variant=Variant.STANDARD, edge_kinds=EDGE_KINDS, site_kinds=SITE_KINDS):
    """EventStream from explicit ``(kind, x, j_or_None, t)`` tuples.

    ``j`` indexes the neighbour of ``x`` in the fixed neighbour order.
    """
    proto = EventStream(g, horizon, tuple(edge_kinds), tuple(site_kinds), {}, np.empty(0),
                        np.zeros(1 + (len(edge_kinds) * g.degree + len(site_kinds)) * g.n_sites, dtype=np.int64),
                        variant)
    per_clock = [[] for _ in range(proto.n_clocks)]
    for kind, x, j, t in events:
        c = proto.site_clock(kind, x) if j is None else proto.edge_clock(kind, x, j)
        per_clock[c].append(float(t))
    chunks = [np.sort(np.array(ts, dtype=float)) for ts in per_clock]
    lengths = [c.size for c in chunks]
    return EventStream(
        g, float(horizon), tuple(edge_kinds), tuple(site_kinds), {},
        np.concatenate(chunks), np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64), variant,
    )


@pytest.fixture
def stream_factory():
    return make_stream


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

"""Compiled event loop for the exact (Gillespie direct) simulation.

Healthy sites are selected through two Fenwick trees holding the integer
counts of infected neighbours of each state, so the total rate is an exact
function of integers and never drifts::

    R = b1h * S1 + b2h * S2 + (r12 + r10) * N1 + r20 * N2

where ``S_i`` is the number of (healthy site, neighbour in state i) pairs and
``N_i`` the number of sites in state i.
"""
import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _fw_add(tree, i, delta):
    i += 1
    n = tree.shape[0]
    while i < n:
        tree[i] += delta
        i += i & (-i)


@njit(**_JIT)
def _fw_find(tree, target):
    # smallest 0-based index whose inclusive prefix sum exceeds target
    n = tree.shape[0]
    step = 1
    while step * 2 < n:
        step *= 2
    pos = 0
    while step > 0:
        nxt = pos + step
        if nxt < n and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step >>= 1
    return pos


@njit(**_JIT)
def _fw_build(weights):
    n = weights.shape[0]
    tree = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        tree[i + 1] += weights[i]
        j = (i + 1) + ((i + 1) & (-(i + 1)))
        if j <= n:
            tree[j] += tree[i + 1]
    return tree


@njit(**_JIT)
def _fw_total(tree):
    n = tree.shape[0] - 1
    s = 0
    i = n
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(**_JIT)
def _neighbor_counts(state, nbr):
    n, deg = nbr.shape
    c = np.zeros((3, n), dtype=np.int64)
    for x in range(n):
        for j in range(deg):
            c[state[nbr[x, j]], x] += 1
    return c


@njit(**_JIT)
def _set_state(x, new, state, nbr, cnt, F1, F2, tot, lists, pos, nlist, outside):
    """Move site x to state ``new`` and update every derived quantity.

    ``tot`` holds [S1, S2]; ``lists[k-1]`` / ``nlist[k-1]`` hold the sites in
    state k for k = 1, 2; ``pos[x]`` is the slot of x inside its list.
    Returns True when x is an ``outside`` site becoming infected.
    """
    old = state[x]
    if old == new:
        return False
    if old > 0:
        k = old - 1
        last = lists[k, nlist[k] - 1]
        lists[k, pos[x]] = last
        pos[last] = pos[x]
        nlist[k] -= 1
    else:
        if cnt[1, x] > 0:
            _fw_add(F1, x, -cnt[1, x])
            tot[0] -= cnt[1, x]
        if cnt[2, x] > 0:
            _fw_add(F2, x, -cnt[2, x])
            tot[1] -= cnt[2, x]
    state[x] = new
    if new > 0:
        k = new - 1
        lists[k, nlist[k]] = x
        pos[x] = nlist[k]
        nlist[k] += 1
    else:
        if cnt[1, x] > 0:
            _fw_add(F1, x, cnt[1, x])
            tot[0] += cnt[1, x]
        if cnt[2, x] > 0:
            _fw_add(F2, x, cnt[2, x])
            tot[1] += cnt[2, x]
    for j in range(nbr.shape[1]):
        y = nbr[x, j]
        cnt[old, y] -= 1
        cnt[new, y] += 1
        if state[y] == 0:
            if old == 1:
                _fw_add(F1, y, -1)
                tot[0] -= 1
            elif old == 2:
                _fw_add(F2, y, -1)
                tot[1] -= 1
            if new == 1:
                _fw_add(F1, y, 1)
                tot[0] += 1
            elif new == 2:
                _fw_add(F2, y, 1)
                tot[1] += 1
    return old == 0 and outside[x]


@njit(**_JIT)
def _bookkeeping_errors(state, nbr, cnt, F1, F2, tot, nlist):
    fresh = _neighbor_counts(state, nbr)
    bad = 0
    s1 = 0
    s2 = 0
    n1 = 0
    n2 = 0
    for x in range(state.shape[0]):
        for k in range(3):
            if fresh[k, x] != cnt[k, x]:
                bad += 1
        if state[x] == 0:
            s1 += fresh[1, x]
            s2 += fresh[2, x]
        elif state[x] == 1:
            n1 += 1
        else:
            n2 += 1
    if s1 != tot[0] or s1 != _fw_total(F1):
        bad += 1
    if s2 != tot[1] or s2 != _fw_total(F2):
        bad += 1
    if n1 != nlist[0] or n2 != nlist[1]:
        bad += 1
    return bad


@njit(**_JIT)
def simulate(state, nbr, b1h, b2h, r12, r10, r20, new_state,
             sample_times, snap_flags, outside, stop_on_exit, max_events, debug, rng):
    """Run the chain in place on ``state``.

    Returns ``(counts, snaps, t_ext, n_events, exited, truncated, n_bad)``;
    ``counts[k]`` are the state counts at ``sample_times[k]`` and ``t_ext`` is
    the extinction time or -1.
    """
    n = state.shape[0]
    ns = sample_times.shape[0]
    counts = np.full((ns, 3), -1, dtype=np.int64)
    n_snap = 0
    for k in range(ns):
        if snap_flags[k]:
            n_snap += 1
    snaps = np.zeros((n_snap, n), dtype=np.int8)

    cnt = _neighbor_counts(state, nbr)
    w1 = np.zeros(n, dtype=np.int64)
    w2 = np.zeros(n, dtype=np.int64)
    lists = np.zeros((2, n), dtype=np.int64)
    pos = np.zeros(n, dtype=np.int64)
    nlist = np.zeros(2, dtype=np.int64)
    tot = np.zeros(2, dtype=np.int64)
    for x in range(n):
        s = state[x]
        if s == 0:
            w1[x] = cnt[1, x]
            w2[x] = cnt[2, x]
            tot[0] += w1[x]
            tot[1] += w2[x]
        else:
            lists[s - 1, nlist[s - 1]] = x
            pos[x] = nlist[s - 1]
            nlist[s - 1] += 1
    F1 = _fw_build(w1)
    F2 = _fw_build(w2)

    t = 0.0
    t_ext = -1.0
    k = 0
    isnap = 0
    n_events = 0
    n_bad = 0
    exited = False
    truncated = False
    while True:
        n1 = nlist[0]
        n2 = nlist[1]
        if n1 + n2 == 0:
            t_ext = t
            break
        a1 = b1h * tot[0]
        a2 = a1 + b2h * tot[1]
        a3 = a2 + r12 * n1
        a4 = a3 + r10 * n1
        rate = a4 + r20 * n2
        if rate <= 0.0:
            break
        t_new = t + rng.exponential(1.0) / rate
        while k < ns and sample_times[k] < t_new:
            counts[k, 0] = n - n1 - n2
            counts[k, 1] = n1
            counts[k, 2] = n2
            if snap_flags[k]:
                snaps[isnap, :] = state
                isnap += 1
            k += 1
        if k == ns:
            break
        if n_events >= max_events:
            truncated = True
            break
        t = t_new
        u = rng.random() * rate
        if u < a1:
            x = _fw_find(F1, rng.integers(0, tot[0]))
            hit = _set_state(x, new_state, state, nbr, cnt, F1, F2, tot, lists, pos, nlist, outside)
        elif u < a2:
            x = _fw_find(F2, rng.integers(0, tot[1]))
            hit = _set_state(x, new_state, state, nbr, cnt, F1, F2, tot, lists, pos, nlist, outside)
        elif u < a3:
            x = lists[0, rng.integers(0, n1)]
            hit = _set_state(x, 2, state, nbr, cnt, F1, F2, tot, lists, pos, nlist, outside)
        elif u < a4:
            x = lists[0, rng.integers(0, n1)]
            hit = _set_state(x, 0, state, nbr, cnt, F1, F2, tot, lists, pos, nlist, outside)
        else:
            x = lists[1, rng.integers(0, n2)]
            hit = _set_state(x, 0, state, nbr, cnt, F1, F2, tot, lists, pos, nlist, outside)
        n_events += 1
        if debug:
            n_bad += _bookkeeping_errors(state, nbr, cnt, F1, F2, tot, nlist)
        if hit:
            exited = True
            if stop_on_exit:
                break
    # absorbed (or frozen): the remaining samples see the final state
    if t_ext >= 0.0 or not (exited and stop_on_exit) and not truncated:
        while k < ns:
            counts[k, 0] = n - nlist[0] - nlist[1]
            counts[k, 1] = nlist[0]
            counts[k, 2] = nlist[1]
            if snap_flags[k]:
                snaps[isnap, :] = state
                isnap += 1
            k += 1
    return counts, snaps, t_ext, n_events, exited, truncated, n_bad

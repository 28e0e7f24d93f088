"""Compiled many-trial drivers.

Every kernel fills ``out[start:stop]`` for a range of trial indices, and
trial ``i`` draws only from streams keyed by ``(seed, i, tag)``.  The
driver splits the trial range into chunks run on a thread pool; kernels
release the GIL, and results do not depend on the number of threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from . import _replay
from .core_tree import fill_parents
from .cut_tree import _ordered_arrays
from .destruction import vertex_removal_steps
from .rng import (
    TAG_CLOCK,
    TAG_EPS,
    TAG_ETA,
    TAG_PERC,
    TAG_PICK,
    TAG_TARGETS,
    TAG_TIMES,
    TAG_TREE,
    TAG_URN,
    TAG_WALK,
    new_state,
    next_below,
    next_exponential,
    next_uniform,
    next_xi,
)

THREADS_ENV = "RRTCUT_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_chunks(kernel, trials: int, args: tuple, outs: tuple, threads: int | None = None) -> None:
    """Call ``kernel(*args, start, stop, *outs)`` over chunks of [0, trials)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    threads = threads or default_threads()
    n_chunks = min(trials, max(1, threads * 4))
    bounds = np.linspace(0, trials, n_chunks + 1).astype(np.int64)
    ranges = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if threads == 1 or len(ranges) == 1:
        for a, b in ranges:
            kernel(*args, a, b, *outs)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(kernel, *args, a, b, *outs) for a, b in ranges]
        for f in futures:
            f.result()


# ---------------------------------------------------------------------------
# per-trial building blocks


# Kernels reuse per-chunk workspaces: fresh multi-megabyte arrays in every
# trial cost more in page faults than the sweeps themselves.


@njit(cache=True, nogil=True)
def fill_tree(parent, seed, trial):
    fill_parents(parent, new_state(seed, trial, TAG_TREE))


@njit(cache=True, nogil=True)
def fill_keys(key, seed, trial):
    """Uniform removal marks; ``key[0]`` is +inf for the absent root edge."""
    st = new_state(seed, trial, TAG_TIMES)
    key[0] = np.inf
    for i in range(1, key.size):
        key[i] = next_uniform(st)


@njit(cache=True, nogil=True)
def trial_tree(n, seed, trial):
    parent = np.empty(n + 1, dtype=np.int64)
    fill_tree(parent, seed, trial)
    return parent


@njit(cache=True, nogil=True)
def trial_keys(n, seed, trial):
    key = np.empty(n + 1)
    fill_keys(key, seed, trial)
    return key


@njit(cache=True, nogil=True)
def trial_order(n, seed, trial):
    """Uniform permutation of 1..n by Fisher-Yates."""
    st = new_state(seed, trial, TAG_TIMES)
    order = np.arange(1, n + 1)
    for i in range(n - 1, 0, -1):
        j = next_below(st, i + 1)
        order[i], order[j] = order[j], order[i]
    return order


@njit(cache=True, nogil=True)
def _distinct_targets(n1, ell, st):
    """ell distinct uniform vertices (partial Fisher-Yates over 0..n)."""
    pool = np.arange(n1)
    for i in range(ell):
        j = i + next_below(st, n1 - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:ell].copy()


@njit(cache=True, nogil=True)
def _iid_targets(n1, ell, st):
    out = np.empty(ell, dtype=np.int64)
    for i in range(ell):
        out[i] = next_below(st, n1)
    return out


# ---------------------------------------------------------------------------
# root isolation, first vertices, generation one


@njit(cache=True, nogil=True)
def _k_root(n, ell, thresholds, seed, start, stop, out_x, out_xell, out_top, out_count):
    ln = math.log(n) if n > 1 else 1.0
    n1 = n + 1
    parent = np.empty(n1, dtype=np.int64)
    key = np.empty(n1)
    mk = np.empty(n1)
    flag = np.empty(n1, dtype=np.bool_)
    sizes = np.empty(n1, dtype=np.int64)
    for tr in range(start, stop):
        fill_tree(parent, seed, tr)
        fill_keys(key, seed, tr)
        _replay.root_path_severed_into(parent, key, mk, flag, sizes)
        x = 0
        top = 0
        for c in range(thresholds.size):
            out_count[tr, c] = 0
        for c in range(1, n + 1):
            if flag[c]:
                x += 1
                z = ln * sizes[c] / n
                if sizes[c] > top:
                    top = sizes[c]
                for j in range(thresholds.size):
                    if z >= thresholds[j]:
                        out_count[tr, j] += 1
        out_x[tr] = x
        out_top[tr] = ln * top / n
        out_xell[tr] = _replay.upward_closed_count_into(parent, key, ell, mk) if ell > 1 else x


def root_batch(n: int, seed: int, trials: int, ell: int = 1, thresholds=(), threads=None):
    """X_n, X'_{n,ell}, the largest normalized generation-one size and the
    number of generation-one values above each threshold."""
    th = np.asarray(thresholds, dtype=np.float64)
    x = np.empty(trials, dtype=np.int64)
    xe = np.empty(trials, dtype=np.int64)
    top = np.empty(trials)
    cnt = np.empty((trials, th.size), dtype=np.int64)
    run_chunks(_k_root, trials, (n, ell, th, seed), (x, xe, top, cnt), threads)
    return x, xe, top, cnt


@njit(cache=True, nogil=True)
def _k_multi(n, ell, seed, start, stop, out_stage, out_size):
    n1 = n + 1
    no_targets = np.zeros(n1, dtype=np.bool_)
    for tr in range(start, stop):
        parent = trial_tree(n, seed, tr)
        order = trial_order(n, seed, tr)
        comp_root, _, detached, _, _ = _replay.reverse_replay(parent, order, no_targets)
        for s in range(ell):
            out_stage[tr, s] = 0
        for k in range(n):
            if comp_root[k] < ell:
                out_stage[tr, comp_root[k]] += 1
        out_size[tr, 0] = n1
        for k in range(n):
            e = order[k]
            if e < ell:
                out_size[tr, e] = detached[k]


def multi_batch(n: int, ell: int, seed: int, trials: int, threads=None):
    """Per-stage cuts and stage sizes of the staged isolation of 0..ell-1."""
    st = np.empty((trials, ell), dtype=np.int64)
    sz = np.empty((trials, ell), dtype=np.int64)
    run_chunks(_k_multi, trials, (n, ell, seed), (st, sz), threads)
    return st, sz


# ---------------------------------------------------------------------------
# targets: isolation and disconnection via per-target sweeps

MODE_Y = 0  # ell i.i.d. uniform targets, isolation
MODE_Z = 1  # last vertices n, n-1, ..., isolation
MODE_A = 2  # ell distinct uniform targets, disconnection
MODE_B = 3  # vertices 0, 1, ..., ell-1, disconnection


@njit(cache=True, nogil=True)
def _disconnect_from_flags(key, cnt, below, ell, out_row):
    """Steps until the targets occupy 2..ell components."""
    n1 = key.size
    m = 0
    for e in range(1, n1):
        if cnt[e] >= 2 and below[e] >= 1 and cnt[e] - below[e] >= 1:
            m += 1
    sk = np.empty(m)
    si = np.empty(m, dtype=np.int64)
    j = 0
    for e in range(1, n1):
        if cnt[e] >= 2 and below[e] >= 1 and cnt[e] - below[e] >= 1:
            sk[j] = key[e]
            si[j] = e
            j += 1
    # splits in removal order (ties by edge id, already ascending)
    idx = np.argsort(sk, kind="mergesort")
    for k in range(ell - 1):
        kk = sk[idx[k]]
        ki = si[idx[k]]
        c = 0
        for e in range(1, n1):
            if cnt[e] >= 2 and (e == ki or _replay.before(key[e], e, kk, ki)):
                c += 1
        out_row[k] = c


@njit(cache=True, nogil=True)
def _target_stats(parent, key, targets, disconnect, out_row, on_path, buf, flags, hit, cnt, below):
    """``on_path`` must be all False on entry; the other arrays are scratch."""
    n1 = parent.size
    ell = targets.size
    if not disconnect:
        hit[:] = False
        total = 0
        for k in range(ell):
            _replay.target_sweep(parent, key, targets[k], on_path, buf, flags)
            for e in range(1, n1):
                if flags[e] and not hit[e]:
                    hit[e] = True
                    total += 1
            out_row[k] = total
        return
    cnt[:] = 0
    below[:] = 0
    for k in range(ell):
        v = targets[k]
        _replay.target_sweep(parent, key, v, on_path, buf, flags)
        for e in range(1, n1):
            if flags[e]:
                cnt[e] += 1
        # flagged edges on the root path of v lie above v
        x = v
        while x != 0:
            if flags[x]:
                below[x] += 1
            x = parent[x]
    _disconnect_from_flags(key, cnt, below, ell, out_row)


@njit(cache=True, nogil=True)
def _k_targets(n, ell, mode, seed, start, stop, out):
    n1 = n + 1
    parent = np.empty(n1, dtype=np.int64)
    key = np.empty(n1)
    on_path = np.zeros(n1, dtype=np.bool_)
    buf = np.empty(2 * n1)
    flags = np.empty(n1, dtype=np.bool_)
    hit = np.empty(n1, dtype=np.bool_)
    big = n1 if mode >= MODE_A else 0
    cnt = np.empty(big, dtype=np.int64)
    below = np.empty(big, dtype=np.int64)
    for tr in range(start, stop):
        fill_tree(parent, seed, tr)
        fill_keys(key, seed, tr)
        st = new_state(seed, tr, TAG_TARGETS)
        if mode == MODE_Y:
            targets = _iid_targets(n1, ell, st)
        elif mode == MODE_Z:
            targets = np.arange(n, n - ell, -1)
        elif mode == MODE_A:
            targets = _distinct_targets(n1, ell, st)
        else:
            targets = np.arange(ell)
        _target_stats(parent, key, targets, mode >= MODE_A, out[tr], on_path, buf, flags, hit, cnt, below)


def targets_batch(n: int, ell: int, mode: int, seed: int, trials: int, threads=None) -> np.ndarray:
    """Running isolation counts (modes Y, Z; ell columns) or disconnection
    counts for 2..ell components (modes A, B; ell-1 columns)."""
    if mode in (MODE_A, MODE_B) and ell < 2:
        raise ValueError("disconnection needs ell >= 2")
    if ell > n + 1:
        raise ValueError("too many targets")
    cols = ell if mode in (MODE_Y, MODE_Z) else ell - 1
    out = np.empty((trials, cols), dtype=np.int64)
    run_chunks(_k_targets, trials, (n, ell, mode, seed), (out,), threads)
    return out


# ---------------------------------------------------------------------------
# random walk and coupling


@njit(cache=True, nogil=True)
def _k_walk(n, seed, start, stop, out_l, out_over):
    for tr in range(start, stop):
        st = new_state(seed, tr, TAG_WALK)
        s = 0
        k = 0
        while True:
            x = next_xi(st)
            if s + x > n:
                break
            s += x
            k += 1
        out_l[tr] = k
        out_over[tr] = n - s


def walk_batch(n: int, seed: int, trials: int, threads=None):
    """L(n) and n - S_{L(n)} per trial."""
    L = np.empty(trials, dtype=np.int64)
    over = np.empty(trials, dtype=np.int64)
    run_chunks(_k_walk, trials, (n, seed), (L, over), threads)
    return L, over


@njit(cache=True, nogil=True)
def severed_in_order(parent, key, mk, flag, sizes):
    """Sizes cut from the root component, in the order they are cut."""
    _replay.root_path_severed_into(parent, key, mk, flag, sizes)
    n1 = parent.size
    m = 0
    for c in range(1, n1):
        if flag[c]:
            m += 1
    ck = np.empty(m)
    cs = np.empty(m, dtype=np.int64)
    j = 0
    for c in range(1, n1):
        if flag[c]:
            ck[j] = key[c]
            cs[j] = sizes[c]
            j += 1
    return cs[np.argsort(ck, kind="mergesort")]


@njit(cache=True, nogil=True)
def _k_coupled(n, seed, start, stop, out_x, out_l, out_bad):
    n1 = n + 1
    parent = np.empty(n1, dtype=np.int64)
    key = np.empty(n1)
    mk = np.empty(n1)
    flag = np.empty(n1, dtype=np.bool_)
    sizes = np.empty(n1, dtype=np.int64)
    for tr in range(start, stop):
        fill_tree(parent, seed, tr)
        fill_keys(key, seed, tr)
        sev = severed_in_order(parent, key, mk, flag, sizes)
        x = sev.size
        eps = new_state(seed, tr, TAG_EPS)
        eta = new_state(seed, tr, TAG_ETA)
        s = n1
        i = 0
        walk_sum = 0
        bad = 0
        while True:
            if s == 1 or next_uniform(eps) < 1.0 / s:
                # xi conditioned on xi >= s, by inversion
                step = int(math.floor(s / (1.0 - next_uniform(eta))))
                if step < s:
                    bad |= 4
                break
            step = sev[i]
            walk_sum += step
            s -= step
            i += 1
        L = i
        if x < L:
            bad |= 1
        if x > L + (n - walk_sum):
            bad |= 8
        out_x[tr] = x
        out_l[tr] = L
        out_bad[tr] = bad


def coupled_batch(n: int, seed: int, trials: int, threads=None):
    """X_n, L(n) and a failure bitmask per coupled trial (0 = all identities hold).

    Bit 1: X_n < L(n); bit 4: a conditioned step below the root size;
    bit 8: X_n > L(n) + n - S_{L(n)}.
    """
    x = np.empty(trials, dtype=np.int64)
    L = np.empty(trials, dtype=np.int64)
    bad = np.empty(trials, dtype=np.int64)
    run_chunks(_k_coupled, trials, (n, seed), (x, L, bad), threads)
    return x, L, bad


# ---------------------------------------------------------------------------
# ordered destruction


@njit(cache=True, nogil=True)
def _k_ordered(n, seed, start, stop, out_deg, out_height, out_sat):
    for tr in range(start, stop):
        parent = trial_tree(n, seed, tr)
        d = _replay.ordered_cut_tree_depths(parent)
        out_deg[tr] = d[0]
        out_height[tr] = d.max()
        out_sat[tr] = d.min()


def ordered_batch(n: int, seed: int, trials: int, threads=None):
    """Root degree (= leaf level of {0}), height and saturation level."""
    deg = np.empty(trials, dtype=np.int64)
    h = np.empty(trials, dtype=np.int64)
    s = np.empty(trials, dtype=np.int64)
    run_chunks(_k_ordered, trials, (n, seed), (deg, h, s), threads)
    return deg, h, s


@njit(cache=True, nogil=True)
def _k_root_degree(n, seed, start, stop, out):
    for tr in range(start, stop):
        st = new_state(seed, tr, TAG_TREE)
        d = 0
        for i in range(1, n + 1):
            if next_below(st, i) == 0:
                d += 1
        out[tr] = d


def root_degree_batch(n: int, seed: int, trials: int, threads=None) -> np.ndarray:
    out = np.empty(trials, dtype=np.int64)
    run_chunks(_k_root_degree, trials, (n, seed), (out,), threads)
    return out


# ---------------------------------------------------------------------------
# cut-tree trunk and branches


@njit(cache=True, nogil=True)
def _k_trunk(n, seed, start, stop, out_trunk, out_branch):
    n1 = n + 1
    no_targets = np.zeros(n1, dtype=np.bool_)
    for tr in range(start, stop):
        parent = trial_tree(n, seed, tr)
        order = trial_order(n, seed, tr)
        comp_root, comp_size, _, _, _ = _replay.reverse_replay(parent, order, no_targets)
        left, right, up, size = _replay.cut_tree_arrays(parent, order, comp_root, comp_size)
        h = np.zeros(left.size, dtype=np.int64)
        for k in range(n - 1, -1, -1):
            h[k] = 1 + max(h[left[k]], h[right[k]])
        x = 0
        length = 0
        best = 0
        while left[x] >= 0:
            if h[right[x]] > best:
                best = h[right[x]]
            x = left[x]
            length += 1
        out_trunk[tr] = length
        out_branch[tr] = best


def trunk_batch(n: int, seed: int, trials: int, threads=None):
    """Trunk length (edges) and largest branch height of the cut-tree."""
    t = np.empty(trials, dtype=np.int64)
    b = np.empty(trials, dtype=np.int64)
    run_chunks(_k_trunk, trials, (n, seed), (t, b), threads)
    return t, b


# ---------------------------------------------------------------------------
# percolation and urns


@njit(cache=True, nogil=True)
def _percolation_sizes(parent, p, seed, tr, kept, acc):
    """Cluster sizes, stored at each cluster's smallest vertex."""
    n1 = parent.size
    st = new_state(seed, tr, TAG_PERC)
    kept[0] = False
    for i in range(1, n1):
        kept[i] = next_uniform(st) < p
    acc[:] = 1
    for i in range(n1 - 1, 0, -1):
        if kept[i]:
            acc[parent[i]] += acc[i]


@njit(cache=True, nogil=True)
def _k_percolation(n, p, top, seed, start, stop, out_root, out_ranked):
    n1 = n + 1
    parent = np.empty(n1, dtype=np.int64)
    kept = np.empty(n1, dtype=np.bool_)
    acc = np.empty(n1, dtype=np.int64)
    for tr in range(start, stop):
        fill_tree(parent, seed, tr)
        _percolation_sizes(parent, p, seed, tr, kept, acc)
        out_root[tr] = acc[0]
        # keep the top sizes in a descending buffer; most values fall below it
        filled = 0
        for i in range(1, n1):
            if kept[i]:
                continue
            v = acc[i]
            if filled == top and (top == 0 or v <= out_ranked[tr, top - 1]):
                continue
            j = filled if filled < top else top - 1
            while j > 0 and out_ranked[tr, j - 1] < v:
                out_ranked[tr, j] = out_ranked[tr, j - 1]
                j -= 1
            out_ranked[tr, j] = v
            if filled < top:
                filled += 1
        for j in range(filled, top):
            out_ranked[tr, j] = 0


def percolation_batch(n: int, p: float, seed: int, trials: int, top: int = 32, threads=None):
    """Root cluster size and the ``top`` largest non-root cluster sizes."""
    root = np.empty(trials, dtype=np.int64)
    ranked = np.empty((trials, top), dtype=np.int64)
    run_chunks(_k_percolation, trials, (n, p, top, seed), (root, ranked), threads)
    return root, ranked


@njit(cache=True, nogil=True)
def _k_urn(n_draws, p, seed, start, stop, out):
    for tr in range(start, stop):
        st = new_state(seed, tr, TAG_URN)
        red = 1
        total = 1
        for _ in range(n_draws):
            if next_below(st, total) < red and next_uniform(st) < p:
                red += 1
            total += 1
        out[tr] = red


def urn_batch(n_draws: int, p: float, seed: int, trials: int, threads=None) -> np.ndarray:
    out = np.empty(trials, dtype=np.int64)
    run_chunks(_k_urn, trials, (n_draws, p, seed), (out,), threads)
    return out


@njit(cache=True, nogil=True)
def _k_yule(n, p, seed, start, stop, out_root, out_rho):
    for tr in range(start, stop):
        st = new_state(seed, tr, TAG_CLOCK)
        types = np.empty(n + 1, dtype=np.bool_)
        types[0] = True
        r = 1
        t = 0.0
        for i in range(1, n + 1):
            t += next_exponential(st) / i
            par = next_below(st, i)
            types[i] = types[par] and next_uniform(st) < p
            if types[i]:
                r += 1
        out_root[tr] = r
        out_rho[tr] = t


def yule_batch(n: int, p: float, seed: int, trials: int, threads=None):
    """Root-type count and time at which the population reaches n+1."""
    r = np.empty(trials, dtype=np.int64)
    rho = np.empty(trials)
    run_chunks(_k_yule, trials, (n, p, seed), (r, rho), threads)
    return r, rho


@njit(cache=True, nogil=True)
def _k_subtree(n, k, seed, start, stop, out):
    for tr in range(start, stop):
        parent = trial_tree(n, seed, tr)
        inside = np.zeros(n + 1, dtype=np.bool_)
        inside[k] = True
        s = 1
        for i in range(k + 1, n + 1):
            if inside[parent[i]]:
                inside[i] = True
                s += 1
        out[tr] = s


def subtree_size_batch(n: int, k: int, seed: int, trials: int, threads=None) -> np.ndarray:
    out = np.empty(trials, dtype=np.int64)
    run_chunks(_k_subtree, trials, (n, k, seed), (out,), threads)
    return out


@njit(cache=True, nogil=True)
def _k_vertex_removal(n, seed, start, stop, out):
    for tr in range(start, stop):
        parent = trial_tree(n, seed, tr)
        out[tr] = vertex_removal_steps(parent, new_state(seed, tr, TAG_PICK))


def vertex_removal_batch(n: int, seed: int, trials: int, threads=None) -> np.ndarray:
    out = np.empty(trials, dtype=np.int64)
    run_chunks(_k_vertex_removal, trials, (n, seed), (out,), threads)
    return out


# ---------------------------------------------------------------------------
# small-n laws (compared against exhaustive enumeration)

SMALL_STATS = {
    "X": 0,
    "X_ell": 1,
    "Z": 2,
    "A": 3,
    "first_cut_size": 4,
    "ordered_cut_tree_shape": 5,
    "gm_collisions": 6,
    "Y_random": 7,
    "component_tree_shape": 8,
    "leaf_depth": 9,
    "B": 10,
}


@njit(cache=True, nogil=True)
def _plane_code(node_parent):
    m = node_parent.size
    # children in creation order via counting sort
    cnt = np.zeros(m + 1, dtype=np.int64)
    for k in range(1, m):
        cnt[node_parent[k] + 1] += 1
    for v in range(m):
        cnt[v + 1] += cnt[v]
    kids = np.empty(max(m - 1, 0), dtype=np.int64)
    fill = cnt[:-1].copy()
    for k in range(1, m):
        p = node_parent[k]
        kids[fill[p]] = k
        fill[p] += 1
    code = 1
    sv = np.empty(m, dtype=np.int64)
    si = np.empty(m, dtype=np.int64)
    top = 0
    sv[0] = 0
    si[0] = 0
    while top >= 0:
        v = sv[top]
        i = si[top]
        if cnt[v] + i < cnt[v + 1]:
            si[top] = i + 1
            code = code * 2 + 1
            top += 1
            sv[top] = kids[cnt[v] + i]
            si[top] = 0
        else:
            top -= 1
            if v != 0:
                code = code * 2
    return code


@njit(cache=True, nogil=True)
def _small_stat(n, stat, ell, k, parent, order, seed, tr):
    n1 = n + 1
    if stat == 0:
        cuts, _ = _replay.replay_root_isolation(parent, order)
        return cuts
    if stat == 4:
        e = order[0]
        inside = np.zeros(n1, dtype=np.bool_)
        inside[e] = True
        s = 1
        for i in range(e + 1, n1):
            if inside[parent[i]]:
                inside[i] = True
                s += 1
        return s
    if stat == 5:
        left, right, _, _ = _ordered_arrays(parent)
        return _replay.shape_code(left, right, 0)
    if stat == 6:
        # coalescent on n+1 labels: exponential clocks, live edges only
        st = new_state(seed, tr, TAG_CLOCK)
        clocks = np.empty(n)
        for i in range(n):
            clocks[i] = next_exponential(st)
        ring = np.argsort(clocks, kind="mergesort") + 1
        cuts, _ = _replay.replay_root_isolation(parent, ring)
        return cuts
    is_t = np.zeros(n1, dtype=np.bool_)
    st = new_state(seed, tr, TAG_TARGETS)
    if stat == 1 or stat == 10:
        for v in range(ell):
            is_t[v] = True
    elif stat == 2:
        for v in range(n1 - ell, n1):
            is_t[v] = True
    elif stat == 3:
        tg = _distinct_targets(n1, ell, st)
        for v in tg:
            is_t[v] = True
    elif stat == 7:
        tg = _iid_targets(n1, ell, st)
        for v in tg:
            is_t[v] = True
    elif stat == 9:
        is_t[ell] = True
    comp_root, _, detached, tgt_total, tgt_det = _replay.reverse_replay(parent, order, is_t)
    if stat == 1:
        c = 0
        for j in range(n):
            if comp_root[j] < ell:
                c += 1
        return c
    if stat == 8:
        node_parent = np.empty(n1, dtype=np.int64)
        node_parent[0] = -1
        node_of_root = np.zeros(n1, dtype=np.int64)
        for j in range(n):
            node_parent[j + 1] = node_of_root[comp_root[j]]
            node_of_root[order[j]] = j + 1
        return _plane_code(node_parent)
    if stat == 3 or stat == 10:
        counted = 0
        splits = 0
        for j in range(n):
            if tgt_total[j] >= 2:
                counted += 1
                if tgt_det[j] >= 1 and tgt_total[j] - tgt_det[j] >= 1:
                    splits += 1
                    if splits == k - 1:
                        return counted
        return -1
    c = 0
    for j in range(n):
        if tgt_total[j] >= 1:
            c += 1
    return c


@njit(cache=True, nogil=True)
def _k_small(n, stat, ell, k, seed, start, stop, out):
    for tr in range(start, stop):
        parent = trial_tree(n, seed, tr)
        order = trial_order(n, seed, tr)
        out[tr] = _small_stat(n, stat, ell, k, parent, order, seed, tr)


def small_law_batch(n: int, statistic: str, seed: int, trials: int, ell: int = 1, k: int = 2, threads=None):
    """Monte Carlo sample of a statistic named as in ``oracle.exhaustive_destruction``.

    ``leaf_depth`` takes its vertex through ``ell``.
    """
    if statistic not in SMALL_STATS:
        raise ValueError(f"unknown statistic {statistic!r}")
    if n < 1:
        raise ValueError("need n >= 1")
    out = np.empty(trials, dtype=np.int64)
    run_chunks(_k_small, trials, (n, SMALL_STATS[statistic], ell, k, seed), (out,), threads)
    return out

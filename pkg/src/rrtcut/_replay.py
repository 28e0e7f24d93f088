"""Compiled replay kernels over (parent array, removal order) pairs.

Keys used by the path-minimum kernels are float64 per edge id; ties are
broken by the smaller edge id, which matches a stable argsort of the keys.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def before(ka, ia, kb, ib):
    """Edge ``ia`` with key ``ka`` is removed before edge ``ib`` with key ``kb``."""
    return ka < kb or (ka == kb and ia < ib)


@njit(cache=True)
def children_csr(parent):
    n1 = parent.size
    start = np.zeros(n1 + 1, dtype=np.int64)
    for i in range(1, n1):
        start[parent[i] + 1] += 1
    for v in range(n1):
        start[v + 1] += start[v]
    fill = start[:-1].copy()
    child = np.empty(max(n1 - 1, 0), dtype=np.int64)
    for i in range(1, n1):
        p = parent[i]
        child[fill[p]] = i
        fill[p] += 1
    return start, child


@njit(cache=True)
def replay_root_isolation(parent, order):
    """Forward replay of the root isolation algorithm.

    Edges outside the current root component are skipped.  Returns the
    number of cuts and the severed sizes in severance order.
    """
    n1 = parent.size
    start, child = children_csr(parent)
    in_root = np.ones(n1, dtype=np.bool_)
    sizes = np.empty(max(n1 - 1, 0), dtype=np.int64)
    stack = np.empty(n1, dtype=np.int64)
    cuts = 0
    for k in range(order.size):
        e = order[k]
        if not in_root[parent[e]]:
            continue
        top = 0
        stack[0] = e
        in_root[e] = False
        size = 0
        while top >= 0:
            v = stack[top]
            top -= 1
            size += 1
            for j in range(start[v], start[v + 1]):
                w = child[j]
                if in_root[w]:
                    in_root[w] = False
                    top += 1
                    stack[top] = w
        sizes[cuts] = size
        cuts += 1
    return cuts, sizes[:cuts]


@njit(cache=True)
def root_path_count(parent, key):
    """Root isolation count by one sweep over path minima.

    Edge i is cut while in the root component iff it precedes every edge on
    the path from parent(i) up to 0.  Those edges are ancestors of i with
    smaller ids, so a tie in keys always goes against i.
    """
    n1 = parent.size
    mk = np.empty(n1, dtype=np.float64)
    mk[0] = np.inf
    count = 0
    for i in range(1, n1):
        k = key[i]
        m = mk[parent[i]]
        if k < m:
            count += 1
            mk[i] = k
        else:
            mk[i] = m
    return count


@njit(cache=True)
def root_path_argmin(parent, key):
    """First-removed edge on each vertex's root path (0 for the root).

    The severed component of a counted edge c is exactly the set of vertices
    whose argmin is c.
    """
    n1 = parent.size
    # key and edge id side by side so one cache line serves both
    buf = np.empty(2 * n1, dtype=np.float64)
    mi = np.zeros(n1, dtype=np.int64)
    buf[0] = np.inf
    buf[1] = 0.0
    for i in range(1, n1):
        p = parent[i]
        k = key[i]
        if p == 0 or k < buf[2 * p]:
            buf[2 * i] = k
            buf[2 * i + 1] = i
            mi[i] = i
        else:
            buf[2 * i] = buf[2 * p]
            j = buf[2 * p + 1]
            buf[2 * i + 1] = j
            mi[i] = int(j)
    return mi


@njit(cache=True)
def root_path_severed_into(parent, key, mk, flag, acc):
    """Counted edges and their severed sizes without the argmin array.

    ``flag[c]`` marks edges cut while in the root component and ``acc[c]``
    is then the size of the part severed at c.  ``mk`` is scratch.
    """
    n1 = parent.size
    mk[0] = np.inf
    flag[0] = False
    for i in range(1, n1):
        k = key[i]
        m = mk[parent[i]]
        if k < m:
            flag[i] = True
            mk[i] = k
        else:
            flag[i] = False
            mk[i] = m
    acc[:n1] = 1
    for i in range(n1 - 1, 0, -1):
        if not flag[i]:
            acc[parent[i]] += acc[i]


@njit(cache=True)
def root_path_severed(parent, key):
    n1 = parent.size
    flag = np.empty(n1, dtype=np.bool_)
    acc = np.empty(n1, dtype=np.int64)
    root_path_severed_into(parent, key, np.empty(n1), flag, acc)
    return flag, acc


@njit(cache=True)
def upward_closed_count_into(parent, key, ell, mk):
    """Cuts needed to isolate every vertex of {0, ..., ell-1}; ``mk`` is scratch.

    That set is closed under taking parents, so an edge outside it is counted
    iff it precedes every edge between its parent and the set; the ell-1
    edges inside the set are always counted.  Ties go against the later
    edge, as in ``root_path_count``.
    """
    n1 = parent.size
    count = 0
    for i in range(min(ell, n1)):
        mk[i] = np.inf
        if i >= 1:
            count += 1
    for i in range(ell, n1):
        k = key[i]
        m = mk[parent[i]]
        if k < m:
            count += 1
            mk[i] = k
        else:
            mk[i] = m
    return count


@njit(cache=True)
def upward_closed_count(parent, key, ell):
    return upward_closed_count_into(parent, key, ell, np.empty(parent.size))


@njit(cache=True)
def target_sweep(parent, key, v, on_path, buf, flags):
    """Mark in ``flags[i]`` whether edge i is cut inside the component of ``v``.

    ``buf`` (length 2(n+1)) receives, for every vertex x, the key and id of
    the earliest edge on the path from v to x at ``2x`` and ``2x+1``.
    ``on_path`` is scratch of length n+1 (reset on exit).
    """
    n1 = parent.size
    x = v
    while x != 0:
        on_path[x] = True
        x = parent[x]
    on_path[0] = True
    # along the root path of v, walking upward
    buf[2 * v] = np.inf
    buf[2 * v + 1] = n1
    x = v
    while x != 0:
        p = parent[x]
        if before(key[x], x, buf[2 * x], buf[2 * x + 1]):
            buf[2 * p] = key[x]
            buf[2 * p + 1] = x
        else:
            buf[2 * p] = buf[2 * x]
            buf[2 * p + 1] = buf[2 * x + 1]
        x = p
    flags[0] = False
    for i in range(1, n1):
        if on_path[i]:
            flags[i] = before(key[i], i, buf[2 * i], buf[2 * i + 1])
        else:
            p = parent[i]
            k = key[i]
            m = buf[2 * p]
            if k < m or (k == m and i < buf[2 * p + 1]):
                flags[i] = True
                buf[2 * i] = k
                buf[2 * i + 1] = i
            else:
                flags[i] = False
                buf[2 * i] = m
                buf[2 * i + 1] = buf[2 * p + 1]
    x = v
    while x != 0:
        on_path[x] = False
        x = parent[x]
    on_path[0] = False


@njit(cache=True)
def _find(uf, x):
    while uf[x] != x:
        uf[x] = uf[uf[x]]
        x = uf[x]
    return x


@njit(cache=True)
def reverse_replay(parent, order, is_target):
    """Process removals backwards as unions.

    For removal step k (edge e = order[k]) returns

    * ``comp_root[k]``: smallest vertex of the component holding e just
      before its removal,
    * ``comp_size[k]`` and ``detached[k]``: sizes of that component and of
      the part split off on e's child side,
    * ``tgt_total[k]`` and ``tgt_detached[k]``: targets in those two sets.
    """
    n1 = parent.size
    m = order.size
    uf = np.arange(n1)
    sz = np.ones(n1, dtype=np.int64)
    lo = np.arange(n1)
    tc = np.zeros(n1, dtype=np.int64)
    for v in range(n1):
        if is_target[v]:
            tc[v] = 1
    comp_root = np.empty(m, dtype=np.int64)
    comp_size = np.empty(m, dtype=np.int64)
    detached = np.empty(m, dtype=np.int64)
    tgt_total = np.empty(m, dtype=np.int64)
    tgt_detached = np.empty(m, dtype=np.int64)
    for k in range(m - 1, -1, -1):
        e = order[k]
        a = _find(uf, parent[e])
        b = _find(uf, e)
        comp_root[k] = min(lo[a], lo[b])
        comp_size[k] = sz[a] + sz[b]
        detached[k] = sz[b]
        tgt_total[k] = tc[a] + tc[b]
        tgt_detached[k] = tc[b]
        if sz[a] < sz[b]:
            a, b = b, a
        uf[b] = a
        sz[a] += sz[b]
        tc[a] += tc[b]
        lo[a] = min(lo[a], lo[b])
    return comp_root, comp_size, detached, tgt_total, tgt_detached


@njit(cache=True)
def cut_tree_arrays(parent, order, comp_root, comp_size):
    """Binary cut-tree from a replay.

    Internal node k (0 <= k < n) is the block split at step k; leaf
    ``n + v`` is the singleton {v}.  The left child holds the block's
    smallest vertex, the right child is the part split off.
    """
    m = order.size
    n1 = parent.size
    total = m + n1
    left = np.full(total, -1, dtype=np.int64)
    right = np.full(total, -1, dtype=np.int64)
    up = np.full(total, -1, dtype=np.int64)
    size = np.ones(total, dtype=np.int64)
    # pending slot for the next block of the component rooted at v
    pend_node = np.full(n1, -1, dtype=np.int64)
    pend_side = np.zeros(n1, dtype=np.int64)
    for k in range(m):
        e = order[k]
        r = comp_root[k]
        size[k] = comp_size[k]
        pn = pend_node[r]
        if pn >= 0:
            up[k] = pn
            if pend_side[r] == 0:
                left[pn] = k
            else:
                right[pn] = k
        pend_node[r] = k
        pend_side[r] = 0
        pend_node[e] = k
        pend_side[e] = 1
    for v in range(n1):
        leaf = m + v
        pn = pend_node[v]
        if pn >= 0:
            up[leaf] = pn
            if pend_side[v] == 0:
                left[pn] = leaf
            else:
                right[pn] = leaf
    return left, right, up, size


@njit(cache=True)
def node_depths(left, right, root):
    total = left.size
    d = np.zeros(total, dtype=np.int64)
    stack = np.empty(total, dtype=np.int64)
    top = 0
    stack[0] = root
    while top >= 0:
        x = stack[top]
        top -= 1
        if left[x] >= 0:
            d[left[x]] = d[x] + 1
            d[right[x]] = d[x] + 1
            top += 1
            stack[top] = left[x]
            top += 1
            stack[top] = right[x]
    return d


@njit(cache=True)
def shape_code(left, right, root):
    """Preorder bit code of a full binary tree (1 = internal, 0 = leaf).

    A leading 1 sentinel bit keeps codes of different sizes distinct.
    """
    total = left.size
    stack = np.empty(total, dtype=np.int64)
    top = 0
    stack[0] = root
    code = 1
    while top >= 0:
        x = stack[top]
        top -= 1
        if left[x] >= 0:
            code = code * 2 + 1
            top += 1
            stack[top] = right[x]
            top += 1
            stack[top] = left[x]
        else:
            code = code * 2
    return code


@njit(cache=True)
def ordered_cut_tree_depths(parent):
    """Leaf levels of the ordered cut-tree by the recursive construction.

    Inserting vertex i turns the leaf {parent(i)} into an internal node with
    leaves {parent(i)} and {i}, both one level deeper.
    """
    n1 = parent.size
    d = np.zeros(n1, dtype=np.int64)
    for i in range(1, n1):
        p = parent[i]
        d[p] += 1
        d[i] = d[p]
    return d

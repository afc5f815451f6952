"""Numba kernels for the graph index hot paths.

The layer-0 beam search and link maintenance dominate both query latency and
streaming-insert cost, so they run as compiled kernels over flat arrays.
Everything here is deterministic: no fastmath, no RNG, sequential reductions.
First use pays a one-time JIT compile (cached on disk afterwards).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _dot(vectors, row, q):
    s = 0.0
    for j in range(q.shape[0]):
        s += vectors[row, j] * q[j]
    return s


@njit(cache=True)
def _dot_rows(vectors, a, b):
    s = 0.0
    for j in range(vectors.shape[1]):
        s += vectors[a, j] * vectors[b, j]
    return s


@njit(cache=True)
def beam_search_layer0(adj, adj_count, vectors, q, entry, ef):
    """Best-first beam over the layer-0 graph.

    Returns (nodes, sims) sorted by similarity descending, at most ef entries.
    `adj` is (capacity, m0) int32 with -1 padding; `adj_count` gives the used
    prefix of each row.
    """
    n = adj.shape[0]
    visited = np.zeros(n, dtype=np.uint8)
    visited[entry] = 1
    entry_sim = _dot(vectors, entry, q)

    # frontier: max-heap on similarity
    ccap = 1024
    csim = np.empty(ccap, dtype=np.float64)
    cnode = np.empty(ccap, dtype=np.int64)
    csim[0] = entry_sim
    cnode[0] = entry
    csize = 1

    # running top-ef: min-heap, worst at root
    rsim = np.empty(ef, dtype=np.float64)
    rnode = np.empty(ef, dtype=np.int64)
    rsim[0] = entry_sim
    rnode[0] = entry
    rsize = 1

    while csize > 0:
        best_sim = csim[0]
        best_node = cnode[0]
        csize -= 1
        if csize > 0:
            last_s = csim[csize]
            last_n = cnode[csize]
            i = 0
            while True:
                left = 2 * i + 1
                if left >= csize:
                    break
                right = left + 1
                big = left
                if right < csize and csim[right] > csim[left]:
                    big = right
                if csim[big] <= last_s:
                    break
                csim[i] = csim[big]
                cnode[i] = cnode[big]
                i = big
            csim[i] = last_s
            cnode[i] = last_n

        if rsize >= ef and best_sim < rsim[0]:
            break

        cnt = adj_count[best_node]
        for e in range(cnt):
            nb = adj[best_node, e]
            if nb < 0 or visited[nb] == 1:
                continue
            visited[nb] = 1
            s = _dot(vectors, nb, q)
            if rsize >= ef and s <= rsim[0]:
                continue
            # push frontier (grow if needed)
            if csize >= ccap:
                ccap2 = ccap * 2
                csim2 = np.empty(ccap2, dtype=np.float64)
                cnode2 = np.empty(ccap2, dtype=np.int64)
                for t in range(csize):
                    csim2[t] = csim[t]
                    cnode2[t] = cnode[t]
                csim = csim2
                cnode = cnode2
                ccap = ccap2
            i = csize
            csize += 1
            while i > 0:
                parent = (i - 1) // 2
                if csim[parent] >= s:
                    break
                csim[i] = csim[parent]
                cnode[i] = cnode[parent]
                i = parent
            csim[i] = s
            cnode[i] = nb
            # push result with min-heap bound ef
            if rsize < ef:
                i = rsize
                rsize += 1
                while i > 0:
                    parent = (i - 1) // 2
                    if rsim[parent] <= s:
                        break
                    rsim[i] = rsim[parent]
                    rnode[i] = rnode[parent]
                    i = parent
                rsim[i] = s
                rnode[i] = nb
            else:
                # replace root, sift down
                i = 0
                while True:
                    left = 2 * i + 1
                    if left >= rsize:
                        break
                    right = left + 1
                    small = left
                    if right < rsize and rsim[right] < rsim[left]:
                        small = right
                    if rsim[small] >= s:
                        break
                    rsim[i] = rsim[small]
                    rnode[i] = rnode[small]
                    i = small
                rsim[i] = s
                rnode[i] = nb

    # drain the min-heap into descending order
    out_nodes = np.empty(rsize, dtype=np.int64)
    out_sims = np.empty(rsize, dtype=np.float64)
    size = rsize
    for pos in range(rsize - 1, -1, -1):
        out_sims[pos] = rsim[0]
        out_nodes[pos] = rnode[0]
        size -= 1
        if size > 0:
            last_s = rsim[size]
            last_n = rnode[size]
            i = 0
            while True:
                left = 2 * i + 1
                if left >= size:
                    break
                right = left + 1
                small = left
                if right < size and rsim[right] < rsim[left]:
                    small = right
                if rsim[small] >= last_s:
                    break
                rsim[i] = rsim[small]
                rnode[i] = rnode[small]
                i = small
            rsim[i] = last_s
            rnode[i] = last_n
    return out_nodes, out_sims


@njit(cache=True)
def select_neighbors(nodes, sims, m, vectors):
    """Diversity heuristic: keep a candidate only if it is more similar to the
    query than to every already-kept neighbor; backfill from the skipped ones."""
    total = nodes.shape[0]
    kept = np.empty(m, dtype=np.int64)
    ksize = 0
    skipped = np.empty(total, dtype=np.int64)
    ssize = 0
    for i in range(total):
        if ksize >= m:
            break
        node = nodes[i]
        sim = sims[i]
        ok = True
        for j in range(ksize):
            if _dot_rows(vectors, node, kept[j]) > sim:
                ok = False
                break
        if ok:
            kept[ksize] = node
            ksize += 1
        else:
            skipped[ssize] = node
            ssize += 1
    for i in range(ssize):
        if ksize >= m:
            break
        kept[ksize] = skipped[i]
        ksize += 1
    return kept[:ksize]


@njit(cache=True)
def add_reverse_edges(adj, adj_count, vectors, row, neighbors, heuristic_shrink):
    """Link each neighbor back to `row`.

    Full rows either replace their weakest link (cheap) or, with
    `heuristic_shrink`, re-run the diversity heuristic over the old links
    plus the new one, which preserves long-range bridges at build cost.
    """
    m0 = adj.shape[1]
    for idx in range(neighbors.shape[0]):
        nbr = neighbors[idx]
        c = adj_count[nbr]
        if c < m0:
            adj[nbr, c] = row
            adj_count[nbr] = c + 1
        elif heuristic_shrink:
            cand = np.empty(m0 + 1, dtype=np.int64)
            sims = np.empty(m0 + 1, dtype=np.float64)
            for e in range(m0):
                cand[e] = adj[nbr, e]
                sims[e] = _dot_rows(vectors, adj[nbr, e], nbr)
            cand[m0] = row
            sims[m0] = _dot_rows(vectors, row, nbr)
            for a in range(1, m0 + 1):  # insertion sort, descending
                s = sims[a]
                nd = cand[a]
                b = a - 1
                while b >= 0 and sims[b] < s:
                    sims[b + 1] = sims[b]
                    cand[b + 1] = cand[b]
                    b -= 1
                sims[b + 1] = s
                cand[b + 1] = nd
            kept = select_neighbors(cand, sims, m0, vectors)
            kc = kept.shape[0]
            for e in range(kc):
                adj[nbr, e] = kept[e]
            for e in range(kc, m0):
                adj[nbr, e] = -1
            adj_count[nbr] = kc
        else:
            worst = 1e30
            worst_i = 0
            for e in range(m0):
                s = _dot_rows(vectors, adj[nbr, e], nbr)
                if s < worst:
                    worst = s
                    worst_i = e
            if _dot_rows(vectors, row, nbr) > worst:
                adj[nbr, worst_i] = row

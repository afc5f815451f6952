"""In-memory graph index for approximate top-k cosine search.

Hierarchical navigable-small-world graph over unit vectors, built for the
store's access pattern: streaming single-vector inserts, mark-style deletes
on eviction, and searches that honor a caller deadline. Layer-0 adjacency is
a preallocated int32 matrix walked by compiled kernels (see _kernels); the
sparse upper layers are plain dicts and stay in Python.

Rows are indices into an external vector matrix owned by the caller (the
memory store); the index never copies vectors. Level draws come from a
dedicated PCG64 stream, so a given insert sequence always yields the same
graph, and searches contain no randomness at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._kernels import add_reverse_edges, beam_search_layer0, select_neighbors


class SearchDeadlineExceeded(Exception):
    """Raised when the caller's should_stop callback fires mid-search."""


@dataclass(frozen=True)
class HnswParams:
    m: int = 24
    ef_construction: int = 160
    ef_search: int = 224
    level_seed: int = 1
    full_forward_links: bool = True  # new nodes get 2m links at layer 0
    heuristic_shrink: bool = False  # diversity-prune full rows instead of worst-swap

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "ef_construction": self.ef_construction,
            "ef_search": self.ef_search,
            "level_seed": self.level_seed,
            "full_forward_links": self.full_forward_links,
            "heuristic_shrink": self.heuristic_shrink,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HnswParams":
        defaults = cls()
        return cls(
            m=int(data.get("m", defaults.m)),
            ef_construction=int(data.get("ef_construction", defaults.ef_construction)),
            ef_search=int(data.get("ef_search", defaults.ef_search)),
            level_seed=int(data.get("level_seed", defaults.level_seed)),
            full_forward_links=bool(
                data.get("full_forward_links", defaults.full_forward_links)
            ),
            heuristic_shrink=bool(
                data.get("heuristic_shrink", defaults.heuristic_shrink)
            ),
        )


class HnswIndex:
    def __init__(self, params: HnswParams | None = None):
        self.params = params or HnswParams()
        self._m = self.params.m
        self._m0 = 2 * self.params.m
        self._level_mult = 1.0 / math.log(self._m) if self._m > 1 else 1.0
        self._rng = np.random.default_rng(np.random.PCG64(self.params.level_seed))

        self._capacity = 0
        self._adj: Optional[np.ndarray] = None  # (capacity, m0) int32, -1 padded
        self._adj_count: Optional[np.ndarray] = None

        self._upper: dict[int, dict[int, list[int]]] = {}
        self._node_level: dict[int, int] = {}
        self._deleted: set[int] = set()
        self._entry: Optional[int] = None
        self._max_level = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def _ensure_capacity(self, rows: int) -> None:
        if self._capacity >= rows:
            return
        new_cap = max(rows, self._capacity * 2, 1024)
        adj = np.full((new_cap, self._m0), -1, dtype=np.int32)
        count = np.zeros(new_cap, dtype=np.int32)
        if self._adj is not None:
            adj[: self._capacity] = self._adj
            count[: self._capacity] = self._adj_count
        self._adj, self._adj_count = adj, count
        self._capacity = new_cap

    # --- construction ---------------------------------------------------------

    def insert(self, row: int, vectors: np.ndarray) -> None:
        """Add `vectors[row]` to the graph. Single writer at a time."""
        self._ensure_capacity(row + 1)
        level = int(-math.log(self._rng.random() + 1e-12) * self._level_mult)
        self._node_level[row] = level
        self._size += 1

        if self._entry is None:
            self._entry = row
            self._max_level = level
            for layer in range(1, level + 1):
                self._upper.setdefault(layer, {})[row] = []
            return

        q = np.ascontiguousarray(vectors[row])
        current = self._entry
        for layer in range(self._max_level, level, -1):
            current = self._greedy_upper(q, current, layer, vectors)

        ef = self.params.ef_construction
        for layer in range(min(level, self._max_level), 0, -1):
            found = self._beam_upper(q, current, layer, ef, vectors)
            neighbors = [
                node
                for node in self._select_upper(q, found, self._m, vectors)
            ]
            graph = self._upper.setdefault(layer, {})
            graph[row] = list(neighbors)
            for nbr in neighbors:
                links = graph.setdefault(nbr, [])
                links.append(row)
                if len(links) > self._m:
                    arr = np.asarray(links, dtype=np.int64)
                    sims = vectors[arr] @ vectors[nbr]
                    keep = np.argpartition(sims, -self._m)[-self._m :]
                    graph[nbr] = arr[keep].tolist()
            if found:
                current = found[0][1]

        nodes, sims = beam_search_layer0(
            self._adj, self._adj_count, vectors, q, current, ef
        )
        forward = self._m0 if self.params.full_forward_links else self._m
        chosen = select_neighbors(nodes, sims, forward, vectors)
        count = len(chosen)
        self._adj[row, :count] = chosen
        self._adj_count[row] = count
        add_reverse_edges(
            self._adj, self._adj_count, vectors, row, chosen,
            self.params.heuristic_shrink,
        )

        if level > self._max_level:
            self._max_level = level
            self._entry = row

    def _select_upper(self, q, found, m, vectors) -> list[int]:
        nodes = np.asarray([node for _, node in found], dtype=np.int64)
        sims = np.asarray([sim for sim, _ in found], dtype=np.float64)
        return [int(v) for v in select_neighbors(nodes, sims, m, vectors)]

    def mark_deleted(self, row: int) -> None:
        """Deleted rows stay as graph waypoints but never appear in results."""
        self._deleted.add(row)
        self._size -= 1

    # --- search ----------------------------------------------------------------

    def search(
        self,
        q: np.ndarray,
        k: int,
        vectors: np.ndarray,
        should_stop: Callable[[], bool] | None = None,
        ef: int | None = None,
    ) -> list[tuple[float, int]]:
        """Approximate top candidates as (similarity, row), best first.

        Deleted rows are filtered out. The deadline callback is polled before
        the graph walk; the walk itself is one bounded batch of work (a few
        hundred microseconds at 100k rows), which sets the timeout overshoot
        granularity for approximate recall.
        """
        if self._entry is None or self._size <= 0:
            return []
        ef = max(ef or self.params.ef_search, k)
        if self._deleted:
            # deleted rows occupy beam slots; widen so k live rows survive
            ef += min(len(self._deleted), 3 * ef)
        if should_stop is not None and should_stop():
            raise SearchDeadlineExceeded()
        q = np.ascontiguousarray(q, dtype=np.float64)
        entry = self._entry
        for layer in range(self._max_level, 0, -1):
            entry = self._greedy_upper(q, entry, layer, vectors)
        if should_stop is not None and should_stop():
            raise SearchDeadlineExceeded()
        nodes, sims = beam_search_layer0(
            self._adj, self._adj_count, vectors, q, entry, ef
        )
        out = []
        deleted = self._deleted
        for i in range(len(nodes)):
            node = int(nodes[i])
            if node not in deleted:
                out.append((float(sims[i]), node))
                if len(out) >= k:
                    break
        return out

    def _greedy_upper(self, q, entry: int, layer: int, vectors) -> int:
        graph = self._upper.get(layer, {})
        current = entry
        current_sim = float(q @ vectors[current])
        while True:
            links = graph.get(current)
            if not links:
                return current
            arr = np.asarray(links, dtype=np.int64)
            sims = vectors[arr] @ q
            best = int(np.argmax(sims))
            if float(sims[best]) <= current_sim:
                return current
            current = links[best]
            current_sim = float(sims[best])

    def _beam_upper(self, q, entry: int, layer: int, ef: int, vectors):
        import heapq

        graph = self._upper.get(layer, {})
        entry_sim = float(q @ vectors[entry])
        visited = {entry}
        candidates = [(-entry_sim, entry)]
        results = [(entry_sim, entry)]
        worst = entry_sim
        while candidates:
            neg, current = heapq.heappop(candidates)
            if -neg < worst and len(results) >= ef:
                break
            links = graph.get(current)
            if not links:
                continue
            fresh = [n for n in links if n not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            sims = vectors[np.asarray(fresh, dtype=np.int64)] @ q
            for i, node in enumerate(fresh):
                sim = float(sims[i])
                if len(results) < ef or sim > worst:
                    heapq.heappush(candidates, (-sim, node))
                    heapq.heappush(results, (sim, node))
                    if len(results) > ef:
                        heapq.heappop(results)
                    worst = results[0][0]
        results.sort(reverse=True)
        return results

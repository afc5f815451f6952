"""Per-namespace episodic memory with exact and approximate top-k retrieval.

Each namespace stores EpisodeRecords behind a rolling window: when the record
count would exceed capacity, the oldest non-salient record is evicted; only
when every stored record is salient does the oldest salient one go. Record
ids are monotonic per namespace and double as the insertion order.

Retrieval contract shared by both paths: neighbors sorted by similarity
descending, ties broken by smaller record id. The exact path is an exhaustive
batched scan and acts as the oracle for the graph index behind query_approx.

Concurrency: one logical writer per namespace (inserts/evictions serialize on
a per-namespace lock); readers take the same lock only long enough to snapshot
the row count and liveness mask, then scan lock-free on rows that are
append-only beneath them. Compaction swaps in fresh arrays, so in-flight
readers keep a consistent view.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .hnsw import HnswIndex, HnswParams, SearchDeadlineExceeded
from .model import (
    Action,
    DimensionMismatchError,
    EpisodeRecord,
    Outcome,
    action_from_dict,
    action_kind,
    action_to_dict,
)

STORE_FORMAT_VERSION = 1
DEFAULT_CAPACITY = 100_000
SCAN_BATCH = 4096  # rows per deadline check in the exact scan


class StoreVersionError(Exception):
    """Persisted store was written under a different encoder version tag."""


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two same-dimension vectors, clamped to [-1, 1].

    Embeddings are unit-norm, so this is their cosine similarity.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dim {a.shape} vs {b.shape}")
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


@dataclass(frozen=True)
class MemoryConfig:
    capacity: int = DEFAULT_CAPACITY
    salience_protected_fraction: float = 0.2
    index_kind: str = "exact"  # "exact" | "approximate"
    ann: HnswParams = field(default_factory=HnswParams)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not 0.0 <= self.salience_protected_fraction < 1.0:
            raise ValueError("salience_protected_fraction must be in [0,1)")
        if self.index_kind not in ("exact", "approximate"):
            raise ValueError("index_kind must be 'exact' or 'approximate'")

    def to_dict(self) -> dict:
        return {
            "capacity": self.capacity,
            "salience_protected_fraction": self.salience_protected_fraction,
            "index_kind": self.index_kind,
            "ann": self.ann.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MemoryConfig":
        return cls(
            capacity=int(data.get("capacity", DEFAULT_CAPACITY)),
            salience_protected_fraction=float(
                data.get("salience_protected_fraction", 0.2)
            ),
            index_kind=data.get("index_kind", "exact"),
            ann=HnswParams.from_dict(data.get("ann", {})),
        )


@dataclass(frozen=True)
class RecordFilter:
    """Optional metadata predicate applied to retrieval results."""

    min_timestamp_ms: Optional[int] = None
    max_timestamp_ms: Optional[int] = None
    salient_only: bool = False
    action_kind: Optional[str] = None

    def to_dict(self) -> dict:
        out: dict = {}
        if self.min_timestamp_ms is not None:
            out["min_timestamp_ms"] = self.min_timestamp_ms
        if self.max_timestamp_ms is not None:
            out["max_timestamp_ms"] = self.max_timestamp_ms
        if self.salient_only:
            out["salient_only"] = True
        if self.action_kind is not None:
            out["action_kind"] = self.action_kind
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RecordFilter":
        return cls(
            min_timestamp_ms=data.get("min_timestamp_ms"),
            max_timestamp_ms=data.get("max_timestamp_ms"),
            salient_only=bool(data.get("salient_only", False)),
            action_kind=data.get("action_kind"),
        )


@dataclass(frozen=True)
class Neighbor:
    record_id: int
    similarity: float
    action: Action
    outcome: Outcome
    timestamp_ms: int

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "similarity": self.similarity,
            "action": action_to_dict(self.action),
            "outcome": self.outcome.to_dict(),
            "timestamp_ms": self.timestamp_ms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Neighbor":
        return cls(
            record_id=int(data["record_id"]),
            similarity=float(data["similarity"]),
            action=action_from_dict(data["action"]),
            outcome=Outcome.from_dict(data["outcome"]),
            timestamp_ms=int(data["timestamp_ms"]),
        )


_ACTION_KIND_CODE = {"noop": 0, "admission_threshold": 1, "handover": 2}


class _RecordMeta:
    __slots__ = ("action", "outcome", "timestamp_ms", "salient")

    def __init__(self, action, outcome, timestamp_ms, salient):
        self.action = action
        self.outcome = outcome
        self.timestamp_ms = timestamp_ms
        self.salient = salient


class _Namespace:
    """Array-backed row storage for one namespace. Mutations hold `lock`."""

    def __init__(self, config: MemoryConfig):
        self.config = config
        self.lock = threading.Lock()
        self.dim: Optional[int] = None
        self.next_id = 0
        self.rows = 0  # rows written (alive + tombstoned)
        self.alive_count = 0
        self.vectors: Optional[np.ndarray] = None
        self.row_ids = np.zeros(0, dtype=np.int64)
        self.alive = np.zeros(0, dtype=bool)
        self.salient = np.zeros(0, dtype=bool)
        self.timestamps = np.zeros(0, dtype=np.int64)
        self.action_codes = np.zeros(0, dtype=np.int8)
        # append-only, row-aligned; eviction flips `alive` but keeps the row,
        # so in-flight readers always assemble a complete snapshot view
        self.meta_rows: list[_RecordMeta] = []
        self.row_of: dict[int, int] = {}
        # eviction order: ids in the queues, oldest first; stale entries skipped
        self.plain_queue: list[int] = []
        self.plain_head = 0
        self.salient_queue: list[int] = []
        self.salient_head = 0
        self.index: Optional[HnswIndex] = None

    def grow(self, need_rows: int) -> None:
        cap = len(self.row_ids)
        if need_rows <= cap:
            return
        new_cap = max(need_rows, cap * 2, 1024)
        self.vectors = self._grown(self.vectors, (new_cap, self.dim), np.float64)
        self.row_ids = self._grown(self.row_ids, (new_cap,), np.int64)
        self.alive = self._grown(self.alive, (new_cap,), bool)
        self.salient = self._grown(self.salient, (new_cap,), bool)
        self.timestamps = self._grown(self.timestamps, (new_cap,), np.int64)
        self.action_codes = self._grown(self.action_codes, (new_cap,), np.int8)

    @staticmethod
    def _grown(arr, shape, dtype):
        fresh = np.zeros(shape, dtype=dtype)
        if arr is not None and arr.size:
            fresh[: arr.shape[0]] = arr
        return fresh


class MemoryStore:
    """All namespaces plus the retrieval entry points."""

    def __init__(self, config: MemoryConfig | None = None,
                 encoder_tag: str = "untagged"):
        self.config = config or MemoryConfig()
        self.encoder_tag = encoder_tag
        self._namespaces: dict[str, _Namespace] = {}
        self._registry_lock = threading.Lock()

    # --- namespace helpers ------------------------------------------------------

    def _namespace(self, name: str, create: bool) -> Optional[_Namespace]:
        ns = self._namespaces.get(name)
        if ns is None and create:
            with self._registry_lock:
                ns = self._namespaces.setdefault(name, _Namespace(self.config))
        return ns

    def ensure_namespace(self, name: str) -> None:
        """Create an empty namespace shell (dim fixed by its first insert)."""
        self._namespace(name, create=True)

    def namespaces(self) -> list[str]:
        return sorted(self._namespaces)

    def size(self, namespace: str) -> int:
        ns = self._namespaces.get(namespace)
        return ns.alive_count if ns else 0

    def dim(self, namespace: str) -> Optional[int]:
        ns = self._namespaces.get(namespace)
        return ns.dim if ns else None

    def stats(self, namespace: str) -> dict:
        ns = self._namespaces.get(namespace)
        if ns is None:
            return {"size": 0, "dim": None, "salient": 0,
                    "capacity": self.config.capacity,
                    "index_kind": self.config.index_kind}
        with ns.lock:
            salient = int(np.count_nonzero(ns.salient[: ns.rows] & ns.alive[: ns.rows]))
            return {
                "size": ns.alive_count,
                "dim": ns.dim,
                "salient": salient,
                "capacity": ns.config.capacity,
                "index_kind": ns.config.index_kind,
            }

    # --- writes -------------------------------------------------------------------

    def insert(
        self,
        namespace: str,
        embedding: np.ndarray,
        action: Action,
        outcome: Outcome,
        timestamp_ms: int,
        salient: Optional[bool] = None,
        _record_id: Optional[int] = None,
    ) -> int:
        """Store a record, evicting per the rolling-window rule; returns its id."""
        from .model import is_salient

        vec = np.asarray(embedding, dtype=np.float64)
        if vec.ndim != 1:
            raise DimensionMismatchError("embedding must be one-dimensional")
        ns = self._namespace(namespace, create=True)
        if salient is None:
            salient = is_salient(outcome)
        with ns.lock:
            if ns.dim is None:
                ns.dim = int(vec.shape[0])
                if ns.config.index_kind == "approximate" and ns.index is None:
                    # approximate namespaces keep their index current from the
                    # first insert; queries never pay a deferred bulk build
                    ns.index = HnswIndex(ns.config.ann)
            elif vec.shape[0] != ns.dim:
                raise DimensionMismatchError(
                    f"embedding dim {vec.shape[0]} != namespace dim {ns.dim}"
                )
            if _record_id is None:
                record_id = ns.next_id
                ns.next_id += 1
            else:
                # load path: ids from the file are preserved
                record_id = _record_id
                if record_id < ns.next_id or record_id in ns.row_of:
                    raise ValueError(f"record id {record_id} not monotonic")
                ns.next_id = record_id + 1
            row = ns.rows
            ns.grow(row + 1)
            ns.vectors[row] = vec
            ns.row_ids[row] = record_id
            ns.alive[row] = True
            ns.salient[row] = salient
            ns.timestamps[row] = timestamp_ms
            ns.action_codes[row] = _ACTION_KIND_CODE[action_kind(action)]
            ns.meta_rows.append(_RecordMeta(action, outcome, timestamp_ms, salient))
            ns.row_of[record_id] = row
            ns.rows = row + 1
            ns.alive_count += 1
            (ns.salient_queue if salient else ns.plain_queue).append(record_id)
            if ns.index is not None:
                ns.index.insert(row, ns.vectors)
            if ns.alive_count > ns.config.capacity:
                self._evict_oldest(ns)
            if ns.rows > 2 * ns.config.capacity:
                self._compact(ns)
        return record_id

    def _evict_oldest(self, ns: _Namespace) -> None:
        victim = self._pop_queue(ns, salient=False)
        if victim is None:
            victim = self._pop_queue(ns, salient=True)
        if victim is None:  # cannot happen while alive_count > 0
            return
        row = ns.row_of.pop(victim)
        ns.alive[row] = False
        ns.alive_count -= 1
        if ns.index is not None:
            ns.index.mark_deleted(row)

    @staticmethod
    def _pop_queue(ns: _Namespace, salient: bool) -> Optional[int]:
        queue = ns.salient_queue if salient else ns.plain_queue
        head = ns.salient_head if salient else ns.plain_head
        while head < len(queue):
            candidate = queue[head]
            head += 1
            if candidate in ns.row_of:
                if salient:
                    ns.salient_head = head
                else:
                    ns.plain_head = head
                return candidate
        if salient:
            ns.salient_head = head
        else:
            ns.plain_head = head
        return None

    def _compact(self, ns: _Namespace) -> None:
        """Drop tombstoned rows; swaps in fresh arrays so readers stay consistent."""
        keep = np.nonzero(ns.alive[: ns.rows])[0]
        order = np.argsort(ns.row_ids[keep], kind="stable")
        keep = keep[order]
        n = len(keep)
        fresh = _Namespace(ns.config)
        fresh.dim = ns.dim
        fresh.grow(max(n, 1))
        fresh.vectors[:n] = ns.vectors[keep]
        fresh.row_ids[:n] = ns.row_ids[keep]
        fresh.alive[:n] = True
        fresh.salient[:n] = ns.salient[keep]
        fresh.timestamps[:n] = ns.timestamps[keep]
        fresh.action_codes[:n] = ns.action_codes[keep]
        ns.vectors = fresh.vectors
        ns.row_ids = fresh.row_ids
        ns.alive = fresh.alive
        ns.salient = fresh.salient
        ns.timestamps = fresh.timestamps
        ns.action_codes = fresh.action_codes
        ns.meta_rows = [ns.meta_rows[i] for i in keep]
        ns.rows = n
        ns.row_of = {int(ns.row_ids[i]): i for i in range(n)}
        ns.plain_queue = [rid for rid in ns.plain_queue[ns.plain_head:]
                          if rid in ns.row_of]
        ns.plain_head = 0
        ns.salient_queue = [rid for rid in ns.salient_queue[ns.salient_head:]
                            if rid in ns.row_of]
        ns.salient_head = 0
        if ns.index is not None:
            ns.index = self._build_index(ns)

    def _build_index(self, ns: _Namespace) -> HnswIndex:
        index = HnswIndex(ns.config.ann)
        for row in range(ns.rows):
            index.insert(row, ns.vectors)
            if not ns.alive[row]:
                index.mark_deleted(row)
        return index

    # --- reads ---------------------------------------------------------------------

    def get(self, namespace: str, record_id: int) -> Optional[EpisodeRecord]:
        ns = self._namespaces.get(namespace)
        if ns is None:
            return None
        with ns.lock:
            row = ns.row_of.get(record_id)
            if row is None:
                return None
            meta = ns.meta_rows[row]
            return EpisodeRecord(
                id=record_id,
                embedding=ns.vectors[row].copy(),
                action=meta.action,
                outcome=meta.outcome,
                timestamp_ms=meta.timestamp_ms,
                namespace=namespace,
                salient=meta.salient,
            )

    def _snapshot(self, ns: _Namespace):
        """Consistent read view: (rows, vectors, ids, mask arrays, row metas).

        Rows below `rows` are append-only in every returned array, and
        `meta_rows` only grows, so the view stays coherent while writers keep
        inserting or evicting; compaction swaps whole objects, which leaves
        this captured view intact.
        """
        with ns.lock:
            rows = ns.rows
            return (
                rows,
                ns.vectors,
                ns.row_ids,
                ns.alive[:rows].copy(),
                ns.salient,
                ns.timestamps,
                ns.action_codes,
                ns.meta_rows,
            )

    def _check_query(self, ns: _Namespace, query: np.ndarray, k: int) -> np.ndarray:
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(query, dtype=np.float64)
        if ns.dim is not None and q.shape != (ns.dim,):
            raise DimensionMismatchError(
                f"query dim {q.shape} != namespace dim {ns.dim}"
            )
        return q

    def query_exact(
        self,
        namespace: str,
        query: np.ndarray,
        k: int,
        record_filter: RecordFilter | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> list[Neighbor]:
        """Exhaustive top-k cosine scan; ties broken by smaller record id.

        `should_stop` is polled between fixed-size row batches so a caller
        can bound the scan; it raises SearchDeadlineExceeded when triggered.
        """
        ns = self._namespaces.get(namespace)
        if ns is None:
            if k < 1:
                raise ValueError("k must be >= 1")
            return []
        q = self._check_query(ns, query, k)
        rows, vectors, row_ids, alive, salient, timestamps, codes, meta = (
            self._snapshot(ns)
        )
        if rows == 0:
            return []
        mask = alive
        if record_filter is not None:
            mask = mask & self._filter_mask(
                record_filter, rows, salient, timestamps, codes
            )
        sims = np.empty(rows, dtype=np.float64)
        for start in range(0, rows, SCAN_BATCH):
            if should_stop is not None and should_stop():
                raise SearchDeadlineExceeded()
            stop = min(start + SCAN_BATCH, rows)
            np.dot(vectors[start:stop], q, out=sims[start:stop])
        sims = np.clip(sims, -1.0, 1.0)
        candidates = np.nonzero(mask)[0]
        if candidates.size == 0:
            return []
        cand_sims = sims[candidates]
        if candidates.size > k:
            # keep every candidate tied with the k-th best, then sort exactly
            threshold = np.partition(cand_sims, candidates.size - k)[
                candidates.size - k
            ]
            keep = cand_sims >= threshold
            candidates = candidates[keep]
            cand_sims = cand_sims[keep]
        order = np.lexsort((row_ids[candidates], -cand_sims))[:k]
        chosen = candidates[order]
        return self._as_neighbors(chosen, cand_sims[order], row_ids, meta)

    def query_approx(
        self,
        namespace: str,
        query: np.ndarray,
        k: int,
        record_filter: RecordFilter | None = None,
        should_stop: Callable[[], bool] | None = None,
    ) -> list[Neighbor]:
        """Graph-index top-k; recall target >= 0.95 of query_exact at defaults.

        Namespaces configured "approximate" maintain the index incrementally
        from the first insert. Querying an "exact"-configured namespace this
        way builds the index on the spot (a one-time bulk cost, deliberate
        misuse escape hatch). When k covers the whole namespace the exact
        scan answers instead, so small namespaces are never approximated.
        """
        ns = self._namespaces.get(namespace)
        if ns is None:
            if k < 1:
                raise ValueError("k must be >= 1")
            return []
        q = self._check_query(ns, query, k)
        with ns.lock:
            if ns.index is None:
                ns.index = self._build_index(ns)
            index = ns.index
            alive_count = ns.alive_count
        if alive_count == 0:
            return []
        if k >= alive_count:
            return self.query_exact(namespace, q, k, record_filter, should_stop)
        rows, vectors, row_ids, alive, salient, timestamps, codes, meta = (
            self._snapshot(ns)
        )
        fetch = k if record_filter is None else min(alive_count, max(4 * k, 32))
        found = index.search(q, fetch, vectors, should_stop=should_stop)
        mask = alive
        if record_filter is not None:
            mask = mask & self._filter_mask(
                record_filter, rows, salient, timestamps, codes
            )
        chosen = [row for _, row in found if row < rows and mask[row]]
        if not chosen:
            return []
        chosen = np.asarray(chosen, dtype=np.int64)
        sims = np.clip(vectors[chosen] @ q, -1.0, 1.0)
        order = np.lexsort((row_ids[chosen], -sims))[:k]
        return self._as_neighbors(chosen[order], sims[order], row_ids, meta)

    @staticmethod
    def _filter_mask(record_filter, rows, salient, timestamps, codes):
        mask = np.ones(rows, dtype=bool)
        if record_filter.min_timestamp_ms is not None:
            mask &= timestamps[:rows] >= record_filter.min_timestamp_ms
        if record_filter.max_timestamp_ms is not None:
            mask &= timestamps[:rows] <= record_filter.max_timestamp_ms
        if record_filter.salient_only:
            mask &= salient[:rows]
        if record_filter.action_kind is not None:
            mask &= codes[:rows] == _ACTION_KIND_CODE[record_filter.action_kind]
        return mask

    @staticmethod
    def _as_neighbors(rows_chosen, sims_chosen, row_ids, meta_rows) -> list[Neighbor]:
        out = []
        for row, sim in zip(rows_chosen, sims_chosen):
            m = meta_rows[row]
            out.append(
                Neighbor(
                    record_id=int(row_ids[row]),
                    similarity=float(sim),
                    action=m.action,
                    outcome=m.outcome,
                    timestamp_ms=m.timestamp_ms,
                )
            )
        return out

    # --- persistence ------------------------------------------------------------------

    def persist(self, namespace: str, path: str) -> int:
        """Write header + one JSON line per record; returns the record count."""
        ns = self._namespaces.get(namespace)
        header = {
            "cortex_store": STORE_FORMAT_VERSION,
            "dim": ns.dim if ns else None,
            "encoder_tag": self.encoder_tag,
            "capacity": self.config.capacity,
        }
        count = 0
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(header, separators=(",", ":")) + "\n")
            if ns is not None:
                with ns.lock:
                    for rid in sorted(ns.row_of):
                        row = ns.row_of[rid]
                        meta = ns.meta_rows[row]
                        record = EpisodeRecord(
                            id=rid,
                            embedding=ns.vectors[row],
                            action=meta.action,
                            outcome=meta.outcome,
                            timestamp_ms=meta.timestamp_ms,
                            namespace=namespace,
                            salient=meta.salient,
                        )
                        f.write(json.dumps(record.to_dict(), separators=(",", ":")) + "\n")
                        count += 1
        return count

    def load(self, path: str, namespace: str) -> int:
        """Rebuild a namespace from a persisted file; refuses mismatched tags."""
        with open(path, "r", encoding="utf-8") as f:
            header_line = f.readline()
            if not header_line:
                raise ValueError(f"{path}: empty store file")
            header = json.loads(header_line)
            if header.get("cortex_store") != STORE_FORMAT_VERSION:
                raise ValueError(f"{path}: not a cortex store file")
            tag = header.get("encoder_tag")
            if tag != self.encoder_tag:
                raise StoreVersionError(
                    f"store written under encoder tag {tag!r}; "
                    f"this store uses {self.encoder_tag!r}"
                )
            records = [
                EpisodeRecord.from_dict(json.loads(line))
                for line in f
                if line.strip()
            ]
        records.sort(key=lambda r: r.id)  # id order == age order for eviction
        for record in records:
            self.insert(
                namespace,
                record.embedding,
                record.action,
                record.outcome,
                record.timestamp_ms,
                salient=record.salient,
                _record_id=record.id,
            )
        return len(records)

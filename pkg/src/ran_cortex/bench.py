"""In-process recall latency benchmark with percentile reporting.

Builds a store of random unit embeddings, replays a query workload through
the recall path, and reports p50/p99/max service times plus, in approximate
mode, recall@k against the exact scan on a query subsample (recomputing the
exact answer for every query would dominate the run at large store sizes).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .memory import MemoryConfig, MemoryStore
from .model import NoOp, Outcome

_NEUTRAL_OUTCOME = Outcome(
    achieved_throughput_mbps=0.0, drop_rate=0.0, sla_violated=False
)


@dataclass(frozen=True)
class BenchReport:
    store_size: int
    dim: int
    k: int
    mode: str
    queries: int
    p50_us: float
    p99_us: float
    max_us: float
    recall_at_k: float
    build_s: float
    latencies_us: tuple[float, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {
            "store_size": self.store_size,
            "dim": self.dim,
            "k": self.k,
            "mode": self.mode,
            "queries": self.queries,
            "p50_us": self.p50_us,
            "p99_us": self.p99_us,
            "max_us": self.max_us,
            "recall_at_k": self.recall_at_k,
            "build_s": self.build_s,
        }


def random_unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    vectors = rng.standard_normal((count, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return vectors


def clustered_unit_vectors(
    rng: np.random.Generator, count: int, dim: int, clusters: int = 16,
    spread: float = 0.25,
) -> np.ndarray:
    """Gaussian blobs around random unit centers, renormalized."""
    centers = random_unit_vectors(rng, clusters, dim)
    assignment = rng.integers(0, clusters, size=count)
    vectors = centers[assignment] + spread * rng.standard_normal((count, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return vectors


def build_store(
    vectors: np.ndarray,
    mode: str,
    namespace: str = "bench",
    memory_config: MemoryConfig | None = None,
) -> MemoryStore:
    config = memory_config or MemoryConfig(
        capacity=max(len(vectors), 1),
        index_kind="approximate" if mode == "approximate" else "exact",
    )
    store = MemoryStore(config, encoder_tag="bench")
    for i in range(len(vectors)):
        store.insert(namespace, vectors[i], NoOp(), _NEUTRAL_OUTCOME, timestamp_ms=i)
    return store


def bench_recall(
    store_size: int,
    dim: int = 128,
    k: int = 5,
    mode: str = "approximate",
    queries: int = 10_000,
    seed: int = 7,
    recall_sample: int = 500,
    clients: int = 1,
    memory_config: MemoryConfig | None = None,
    store: MemoryStore | None = None,
    namespace: str = "bench",
) -> BenchReport:
    """Measure recall latency percentiles over a synthetic store.

    `clients` > 1 splits the workload over that many threads, exercising the
    store's concurrent-reader contract; latencies are pooled across clients.
    Recall-vs-exact is measured on a query subsample after the timed run.
    """
    if store_size < 1 or dim < 2 or k < 1 or queries < 1 or clients < 1:
        raise ValueError("bench parameters must be positive")
    rng = np.random.default_rng(np.random.PCG64(seed))
    vectors = random_unit_vectors(rng, store_size, dim)
    build_start = time.perf_counter()
    if store is None:
        store = build_store(vectors, mode, namespace, memory_config)
    if mode == "approximate":
        # force the lazy index build so timing measures search, not setup
        store.query_approx(namespace, vectors[0], k=1)
    build_s = time.perf_counter() - build_start

    query_vectors = random_unit_vectors(rng, queries, dim)
    run = store.query_approx if mode == "approximate" else store.query_exact
    latencies = np.empty(queries, dtype=np.float64)

    def timed_range(start: int, stop: int) -> None:
        for i in range(start, stop):
            t0 = time.perf_counter_ns()
            run(namespace, query_vectors[i], k)
            latencies[i] = (time.perf_counter_ns() - t0) / 1000.0

    if clients == 1:
        timed_range(0, queries)
    else:
        import threading

        share = (queries + clients - 1) // clients
        threads = [
            threading.Thread(
                target=timed_range,
                args=(c * share, min((c + 1) * share, queries)),
                daemon=True,
            )
            for c in range(clients)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

    if mode == "approximate":
        hits = 0
        wanted = 0
        step = max(1, queries // max(1, min(recall_sample, queries)))
        for i in range(0, queries, step):
            approx_ids = {
                n.record_id for n in store.query_approx(namespace, query_vectors[i], k)
            }
            exact_ids = {
                n.record_id for n in store.query_exact(namespace, query_vectors[i], k)
            }
            hits += len(exact_ids & approx_ids)
            wanted += len(exact_ids)
        recall_at_k = hits / wanted if wanted else 1.0
    else:
        recall_at_k = 1.0

    return BenchReport(
        store_size=store_size,
        dim=dim,
        k=k,
        mode=mode,
        queries=queries,
        p50_us=float(np.percentile(latencies, 50)),
        p99_us=float(np.percentile(latencies, 99)),
        max_us=float(latencies.max()),
        recall_at_k=recall_at_k,
        build_s=build_s,
        latencies_us=tuple(latencies.tolist()),
    )

"""Line-delimited JSON recall service over TCP, plus the matching client.

One JSON object per line in both directions. Requests carry an "op"
("recall" | "insert" | "stats" | "persist" | "load") and a client correlation
"id"; every response echoes that id. A malformed line gets a per-line error
response and the connection stays usable; nothing a peer sends can crash the
server. Connections are handled concurrently, but requests on one connection
are processed strictly in order (open several connections to pipeline).

Namespaces may be protected with static bearer tokens: any namespace present
in the config token map requires the matching "token" field on every request
that touches it. Unlisted namespaces are open.

The client mirrors the recall deadline: a transport failure or a response
that misses deadline + allowance is synthesized into a "timeout" recall
response, so a policy loop built on the client can never block on the
network.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .encoder import ContextEncoder, EncoderConfig
from .memory import MemoryConfig, MemoryStore, RecordFilter, StoreVersionError
from .model import (
    Outcome,
    RanStateSnapshot,
    action_from_dict,
)
from .recall import (
    DEFAULT_DEADLINE_MS,
    DEFAULT_K,
    RecallEngine,
    RecallQuery,
    RecallResponse,
)

MAX_LINE_BYTES = 1 << 20  # anything longer is rejected per line


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 0  # 0 = OS-assigned
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    namespaces: tuple[str, ...] = ()
    auth_tokens: dict = field(default_factory=dict)  # namespace -> token

    def to_dict(self) -> dict:
        return {
            "listen": f"{self.host}:{self.port}",
            "encoder": self.encoder.to_dict(),
            "memory": self.memory.to_dict(),
            "namespaces": list(self.namespaces),
            "auth_tokens": dict(self.auth_tokens),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ServiceConfig":
        listen = data.get("listen", "127.0.0.1:0")
        host, _, port = listen.rpartition(":")
        return cls(
            host=host or "127.0.0.1",
            port=int(port),
            encoder=EncoderConfig.from_dict(data.get("encoder", {})),
            memory=MemoryConfig.from_dict(data.get("memory", {})),
            namespaces=tuple(data.get("namespaces", ())),
            auth_tokens=dict(data.get("auth_tokens", {})),
        )

    @classmethod
    def load(cls, path: str) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


class _RequestError(Exception):
    """Turned into a per-line error response."""


class CortexServer:
    """Threaded TCP listener around a MemoryStore + RecallEngine."""

    def __init__(self, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        self.encoder = ContextEncoder(self.config.encoder)
        self.store = MemoryStore(self.config.memory, encoder_tag=self.encoder.version_tag)
        for namespace in self.config.namespaces:
            self.store.ensure_namespace(namespace)
        self.engine = RecallEngine(self.store, self.encoder)
        self._stopping = threading.Event()
        self._thread: Optional[threading.Thread] = None

        handler = self._make_handler()

        class _Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = False
            block_on_close = True

        self._server = _Server((self.config.host, self.config.port), handler)

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def start(self) -> "CortexServer":
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="cortex-serve", daemon=True
        )
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def stop(self) -> None:
        """Stop accepting, let in-flight requests finish, then close."""
        self._stopping.set()
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=10)

    # --- request handling ----------------------------------------------------------

    def _make_handler(server_self):
        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                self.connection.settimeout(0.2)
                buffer = bytearray()
                while not server_self._stopping.is_set():
                    try:
                        chunk = self.connection.recv(65536)
                    except socket.timeout:
                        continue
                    except OSError:
                        return
                    if not chunk:
                        return
                    buffer.extend(chunk)
                    while True:
                        newline = buffer.find(b"\n")
                        if newline < 0:
                            if len(buffer) > MAX_LINE_BYTES:
                                self._respond(
                                    {"id": None, "status": "error",
                                     "error_detail": "line too long"}
                                )
                                buffer.clear()
                            break
                        line = bytes(buffer[:newline])
                        del buffer[: newline + 1]
                        self._respond(server_self._handle_line(line))

            def _respond(self, payload: dict) -> None:
                try:
                    self.wfile.write(
                        json.dumps(payload, separators=(",", ":")).encode("utf-8")
                        + b"\n"
                    )
                except OSError:
                    pass

        return Handler

    def _handle_line(self, line: bytes) -> dict:
        request_id: Any = None
        try:
            request = json.loads(line.decode("utf-8"))
            if not isinstance(request, dict):
                raise _RequestError("request must be a JSON object")
            request_id = request.get("id")
            op = request.get("op")
            if op == "recall":
                return self._op_recall(request_id, request)
            if op == "insert":
                return self._op_insert(request_id, request)
            if op == "stats":
                return self._op_stats(request_id, request)
            if op == "persist":
                return self._op_persist(request_id, request)
            if op == "load":
                return self._op_load(request_id, request)
            raise _RequestError(f"unknown op {op!r}")
        except _RequestError as exc:
            return {"id": request_id, "status": "error", "error_detail": str(exc)}
        except Exception as exc:  # totality: any bad line -> per-line error
            return {
                "id": request_id,
                "status": "error",
                "error_detail": f"{type(exc).__name__}: {exc}",
            }

    def _authorize(self, request: dict, namespace: str) -> None:
        expected = self.config.auth_tokens.get(namespace)
        if expected is not None and request.get("token") != expected:
            raise _RequestError("unauthorized")

    def _namespace_of(self, request: dict) -> str:
        namespace = request.get("namespace")
        if not isinstance(namespace, str) or not namespace:
            raise _RequestError("namespace required")
        return namespace

    def _op_recall(self, request_id, request) -> dict:
        namespace = self._namespace_of(request)
        self._authorize(request, namespace)
        snapshot = None
        embedding = None
        if "embedding" in request:
            embedding = np.asarray(request["embedding"], dtype=np.float64)
        if "snapshot" in request:
            snapshot = RanStateSnapshot.from_dict(request["snapshot"])
        record_filter = (
            RecordFilter.from_dict(request["filter"]) if "filter" in request else None
        )
        query = RecallQuery(
            namespace=namespace,
            snapshot=snapshot,
            embedding=embedding,
            k=int(request.get("k", DEFAULT_K)),
            deadline_ms=float(request.get("deadline_ms", DEFAULT_DEADLINE_MS)),
            mode=request.get("mode", "exact"),
            record_filter=record_filter,
        )
        response = self.engine.recall(query)
        out = {"id": request_id, "status": response.status,
               "neighbors": [n.to_dict() for n in response.neighbors],
               "latency_us": response.latency_us}
        if response.error_detail is not None:
            out["error_detail"] = response.error_detail
        return out

    def _op_insert(self, request_id, request) -> dict:
        namespace = self._namespace_of(request)
        self._authorize(request, namespace)
        action = action_from_dict(request.get("action", {"kind": "noop"}))
        outcome = Outcome.from_dict(request["outcome"]) if "outcome" in request else (
            Outcome(achieved_throughput_mbps=0.0, drop_rate=0.0, sla_violated=False)
        )
        if "embedding" in request:
            embedding = np.asarray(request["embedding"], dtype=np.float64)
            timestamp_ms = int(request.get("timestamp_ms", 0))
        elif "snapshot" in request:
            snapshot = RanStateSnapshot.from_dict(request["snapshot"])
            embedding = self.encoder.encode(snapshot)
            timestamp_ms = int(request.get("timestamp_ms", snapshot.timestamp_ms))
        else:
            raise _RequestError("insert needs snapshot or embedding")
        record_id = self.store.insert(namespace, embedding, action, outcome, timestamp_ms)
        return {"id": request_id, "status": "ok", "record_id": record_id}

    def _op_stats(self, request_id, request) -> dict:
        if "namespace" in request:
            namespace = self._namespace_of(request)
            self._authorize(request, namespace)
            return {"id": request_id, "status": "ok",
                    "stats": {namespace: self.store.stats(namespace)}}
        stats = {
            name: self.store.stats(name)
            for name in self.store.namespaces()
            if self.config.auth_tokens.get(name) is None
            or request.get("token") == self.config.auth_tokens.get(name)
        }
        return {"id": request_id, "status": "ok", "stats": stats}

    def _op_persist(self, request_id, request) -> dict:
        namespace = self._namespace_of(request)
        self._authorize(request, namespace)
        path = request.get("path")
        if not isinstance(path, str) or not path:
            raise _RequestError("path required")
        count = self.store.persist(namespace, path)
        return {"id": request_id, "status": "ok", "count": count}

    def _op_load(self, request_id, request) -> dict:
        namespace = self._namespace_of(request)
        self._authorize(request, namespace)
        path = request.get("path")
        if not isinstance(path, str) or not path:
            raise _RequestError("path required")
        try:
            count = self.store.load(path, namespace)
        except StoreVersionError as exc:
            raise _RequestError(str(exc))
        return {"id": request_id, "status": "ok", "count": count}


class CortexClient:
    """Blocking line-JSON client with the timeout-synthesis recall contract."""

    def __init__(
        self,
        host: str,
        port: int,
        token: Optional[str] = None,
        transport_allowance_ms: float = 200.0,
        connect_timeout_s: float = 2.0,
    ):
        self.host = host
        self.port = port
        self.token = token
        self.transport_allowance_ms = transport_allowance_ms
        self.connect_timeout_s = connect_timeout_s
        self._sock: Optional[socket.socket] = None
        self._rfile = None
        self._next_id = 0
        self._lock = threading.Lock()

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None
                self._rfile = None

    def __enter__(self) -> "CortexClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _connect(self) -> None:
        if self._sock is not None:
            return
        sock = socket.create_connection(
            (self.host, self.port), timeout=self.connect_timeout_s
        )
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        self._rfile = sock.makefile("rb")

    def _roundtrip(self, request: dict, timeout_s: float) -> dict:
        """Send one request and read its response; raises on transport trouble."""
        with self._lock:
            self._connect()
            self._sock.settimeout(timeout_s)
            request = dict(request)
            request["id"] = self._next_id
            self._next_id += 1
            if self.token is not None and "token" not in request:
                request["token"] = self.token
            self._sock.sendall(
                json.dumps(request, separators=(",", ":")).encode("utf-8") + b"\n"
            )
            line = self._rfile.readline(MAX_LINE_BYTES + 2)
            if not line:
                raise ConnectionError("server closed connection")
            response = json.loads(line.decode("utf-8"))
            if response.get("id") != request["id"]:
                raise ConnectionError(
                    f"correlation id mismatch: {response.get('id')} != {request['id']}"
                )
            return response

    def recall(self, query: RecallQuery) -> RecallResponse:
        """Round-trip a recall; transport trouble becomes status="timeout"."""
        payload: dict[str, Any] = {
            "op": "recall",
            "namespace": query.namespace,
            "k": query.k,
            "deadline_ms": query.deadline_ms,
            "mode": "approximate" if query.mode == "approximate" else "exact",
        }
        if query.embedding is not None:
            payload["embedding"] = [float(v) for v in query.embedding]
        if query.snapshot is not None:
            payload["snapshot"] = query.snapshot.to_dict()
        if query.record_filter is not None:
            payload["filter"] = query.record_filter.to_dict()
        timeout_s = (query.deadline_ms + self.transport_allowance_ms) / 1000.0
        try:
            response = self._roundtrip(payload, timeout_s)
        except (OSError, ValueError, ConnectionError):
            self.close()
            return RecallResponse(status="timeout")
        if response.get("status") not in ("ok", "timeout", "error"):
            return RecallResponse(status="timeout")
        return RecallResponse.from_dict(response)

    def insert(
        self,
        namespace: str,
        *,
        snapshot: Optional[RanStateSnapshot] = None,
        embedding=None,
        action=None,
        outcome: Optional[Outcome] = None,
        timestamp_ms: Optional[int] = None,
        timeout_s: float = 5.0,
    ) -> dict:
        from .model import NoOp, action_to_dict

        payload: dict[str, Any] = {"op": "insert", "namespace": namespace}
        if snapshot is not None:
            payload["snapshot"] = snapshot.to_dict()
        if embedding is not None:
            payload["embedding"] = [float(v) for v in embedding]
        payload["action"] = action_to_dict(action if action is not None else NoOp())
        if outcome is not None:
            payload["outcome"] = outcome.to_dict()
        if timestamp_ms is not None:
            payload["timestamp_ms"] = timestamp_ms
        return self._roundtrip(payload, timeout_s)

    def stats(self, namespace: Optional[str] = None, timeout_s: float = 5.0) -> dict:
        payload: dict[str, Any] = {"op": "stats"}
        if namespace is not None:
            payload["namespace"] = namespace
        return self._roundtrip(payload, timeout_s)

    def persist(self, namespace: str, path: str, timeout_s: float = 30.0) -> dict:
        return self._roundtrip(
            {"op": "persist", "namespace": namespace, "path": path}, timeout_s
        )

    def load(self, namespace: str, path: str, timeout_s: float = 60.0) -> dict:
        return self._roundtrip(
            {"op": "load", "namespace": namespace, "path": path}, timeout_s
        )

    def raw_line(self, line: str, timeout_s: float = 5.0) -> dict:
        """Send an arbitrary line (fuzzing/diagnostics) and read one response."""
        with self._lock:
            self._connect()
            self._sock.settimeout(timeout_s)
            self._sock.sendall(line.encode("utf-8", errors="replace") + b"\n")
            raw = self._rfile.readline(MAX_LINE_BYTES + 2)
            if not raw:
                raise ConnectionError("server closed connection")
            return json.loads(raw.decode("utf-8"))

"""Deterministic context encoder: feature normalization + seeded random projection.

The encoder maps a validated snapshot to a unit-L2-norm vector of dimension
`dim` (default 128). A fixed Gaussian projection stands in for a learned
model: it is dependency-free, preserves inner products in expectation, and --
because the matrix generator below is pinned bit-for-bit -- two independent
implementations produce identical embeddings. The encoder is swappable behind
`ContextEncoder.encode`.

Raw feature layout (feature_count = 20, order fixed):

    [ 0] rsrp_dbm normalized over [-140, -40]            in [0, 1]
    [ 1] sinr_db normalized over [-10, 40]               in [0, 1]
    [ 2] cqi / 15                                        in [0, 1]
    [ 3] prb_utilization                                 in [0, 1]
    [ 4] min(active_users, 1000) / 1000                  in [0, 1]
    [ 5] min(handover_attempts, 100) / 100               in [0, 1]
    [ 6] handover_failures / handover_attempts (0 if 0)  in [0, 1]
    [ 7] traffic_mix embb                                in [0, 1]
    [ 8] traffic_mix urllc                               in [0, 1]
    [ 9] traffic_mix mmtc                                in [0, 1]
    [10] sin(2*pi * (t mod 86400s) / 86400s)             in [-1, 1]
    [11] cos(2*pi * (t mod 86400s) / 86400s)             in [-1, 1]
    [12..19] 8 neighbor hash slots: each neighbor cell_id is hashed with
         64-bit FNV-1a mod 8 into a slot count, then every slot is divided
         by max(1, number of neighbors)                  in [0, 1]

The background traffic share is implied by the other three (the mix sums to
one), so only embb/urllc/mmtc are embedded. The 24-hour period captures the
daily structure of load; t is timestamp_ms / 1000.

Projection matrix generation (pinned; alternate implementations must match):

    SplitMix64 stream seeded with projection_seed, all arithmetic mod 2**64:
        state += 0x9E3779B97F4A7C15
        z = state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        output = z ^ (z >> 31)
    Uniforms: u1 = ((word >> 11) + 1) * 2**-53 in (0,1],
              u2 = (word >> 11) * 2**-53 in [0,1), consuming two words per pair.
    Box-Muller: r = sqrt(-2 ln u1); pair = (r cos(2 pi u2), r sin(2 pi u2)).
    The Gaussian stream fills the dim x 20 matrix row-major.

encode(s) = normalize(P @ feature_vector(s)); if the projected norm is below
1e-12 the canonical basis vector e_1 = (1, 0, ..., 0) is returned so encoding
is total and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    RSRP_MAX_DBM,
    RSRP_MIN_DBM,
    SINR_MAX_DB,
    SINR_MIN_DB,
    RanStateSnapshot,
    require_valid,
)

DEFAULT_DIM = 128
DEFAULT_PROJECTION_SEED = 49267  # "0xC0R7", documented constant
FEATURE_COUNT = 20
NEIGHBOR_SLOTS = 8
DAY_MS = 86_400_000

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance one SplitMix64 step; returns (new_state, output word)."""
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def gaussian_projection(seed: int, rows: int, cols: int) -> np.ndarray:
    """The pinned dim x F pseudo-random Gaussian matrix (see module docstring)."""
    count = rows * cols
    values = np.empty(count + 1, dtype=np.float64)
    state = seed & _MASK64
    i = 0
    while i < count:
        state, w1 = splitmix64_next(state)
        state, w2 = splitmix64_next(state)
        u1 = ((w1 >> 11) + 1) * 2.0**-53
        u2 = (w2 >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        values[i] = r * math.cos(2.0 * math.pi * u2)
        values[i + 1] = r * math.sin(2.0 * math.pi * u2)
        i += 2
    return values[:count].reshape(rows, cols)


@dataclass(frozen=True)
class EncoderConfig:
    dim: int = DEFAULT_DIM
    projection_seed: int = DEFAULT_PROJECTION_SEED
    feature_count: int = FEATURE_COUNT

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.feature_count != FEATURE_COUNT:
            raise ValueError("feature_count is fixed by the feature layout")

    @property
    def version_tag(self) -> str:
        """Identifies the encoding pipeline; persisted stores carry this tag."""
        return f"rp1-d{self.dim}-f{self.feature_count}-s{self.projection_seed}"

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "projection_seed": self.projection_seed,
            "feature_count": self.feature_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderConfig":
        return cls(
            dim=int(data.get("dim", DEFAULT_DIM)),
            projection_seed=int(data.get("projection_seed", DEFAULT_PROJECTION_SEED)),
            feature_count=int(data.get("feature_count", FEATURE_COUNT)),
        )


def feature_vector(snap: RanStateSnapshot) -> np.ndarray:
    """Raw 20-component feature vector in the documented layout.

    Rejects invalid snapshots.
    """
    require_valid(snap)
    out = np.zeros(FEATURE_COUNT, dtype=np.float64)
    out[0] = (snap.rsrp_dbm - RSRP_MIN_DBM) / (RSRP_MAX_DBM - RSRP_MIN_DBM)
    out[1] = (snap.sinr_db - SINR_MIN_DB) / (SINR_MAX_DB - SINR_MIN_DB)
    out[2] = snap.cqi / 15.0
    out[3] = snap.prb_utilization
    out[4] = min(snap.active_users, 1000) / 1000.0
    out[5] = min(snap.handover_attempts, 100) / 100.0
    out[6] = (
        snap.handover_failures / snap.handover_attempts
        if snap.handover_attempts > 0
        else 0.0
    )
    out[7] = snap.traffic_mix[0]
    out[8] = snap.traffic_mix[1]
    out[9] = snap.traffic_mix[2]
    angle = 2.0 * math.pi * (math.fmod(snap.timestamp_ms / 1000.0, 86400.0) / 86400.0)
    out[10] = math.sin(angle)
    out[11] = math.cos(angle)
    denom = max(1, len(snap.neighbor_cells))
    for cell in snap.neighbor_cells:
        slot = fnv1a64(cell.encode("utf-8")) % NEIGHBOR_SLOTS
        out[12 + slot] += 1.0
    out[12:] /= denom
    return out


class ContextEncoder:
    """Pure, immutable encoder; `encode` is safe to call concurrently."""

    def __init__(self, config: EncoderConfig | None = None):
        self.config = config or EncoderConfig()
        self._projection = gaussian_projection(
            self.config.projection_seed, self.config.dim, self.config.feature_count
        )

    @property
    def dim(self) -> int:
        return self.config.dim

    @property
    def version_tag(self) -> str:
        return self.config.version_tag

    def encode(self, snap: RanStateSnapshot) -> np.ndarray:
        """Unit-norm context embedding for a valid snapshot."""
        projected = self._projection @ feature_vector(snap)
        norm = float(np.linalg.norm(projected))
        if norm < 1e-12:
            canonical = np.zeros(self.config.dim, dtype=np.float64)
            canonical[0] = 1.0
            return canonical
        return projected / norm

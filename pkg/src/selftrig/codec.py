"""Distributed zooming quantizer.

Sensor ``i`` owns a block of ``n_i`` state coordinates. Given the shared
bound ``E`` it splits the cube ``[-E, E]^n_i`` into ``N^n_i`` equal cells and
sends the index of the cell holding its measurement; decoders replace the
index by the cell center, so each coordinate is off by at most ``E/N``.

Cell boundaries belong to the upper cell and ``x_j = +E`` falls into cell
``N - 1``. Cell coordinates are packed little-endian: coordinate 1 is the
least significant digit of the index.

Wire format
-----------
One sample is the sensors' indices in ascending sensor order. Sensor ``i``
uses exactly ``bits_for_block(n_i, N)`` bits (the smallest ``b`` with
``2^b >= N^n_i``, i.e. ``ceil(n_i log2 N)``), most significant bit first.
The fields are concatenated without separators and the final byte is
zero-padded on the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linops import DimensionError


@dataclass(frozen=True)
class EncoderConfig:
    partition: tuple[int, ...]
    N: int
    E0: float

    def __post_init__(self):
        object.__setattr__(self, "partition", tuple(int(p) for p in self.partition))
        if not self.partition or any(p < 1 for p in self.partition):
            raise ValueError(f"partition must be a list of positive sizes, got {self.partition}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not self.E0 > 0:
            raise ValueError(f"E0 must be positive, got {self.E0}")

    @property
    def n(self) -> int:
        return sum(self.partition)

    @classmethod
    def scalar_sensors(cls, n: int, N: int, E0: float) -> "EncoderConfig":
        return cls((1,) * n, N, E0)


@dataclass(frozen=True)
class CellIndex:
    sensor_id: int  # 1-based
    index: int


def bits_for_block(block_dim: int, N: int) -> int:
    return (N**block_dim - 1).bit_length()


def bits_per_sample(cfg: EncoderConfig) -> int:
    return sum(bits_for_block(n_i, cfg.N) for n_i in cfg.partition)


def _cells(x_block: np.ndarray, E: float, N: int) -> np.ndarray:
    width = 2.0 * E / N
    c = np.clip(np.floor((x_block + E) * N / (2.0 * E)), 0, N - 1)
    # the floor can land one cell off next to an edge; settle against -E + c * width
    c = np.where((c > 0) & (x_block < -E + c * width), c - 1, c)
    c = np.where((c < N - 1) & (x_block >= -E + (c + 1) * width), c + 1, c)
    return c.astype(np.int64)


def encode_block(x_block, E: float, N: int) -> int:
    if E < 0:
        raise ValueError(f"bound E must be nonnegative, got {E}")
    x_block = np.atleast_1d(np.asarray(x_block, dtype=float))
    if E == 0:
        return 0
    x_block = np.clip(x_block, -E, E)
    index = 0
    for c in reversed(_cells(x_block, E, N).tolist()):
        index = index * N + c
    return index


def decode_block(index: int, block_dim: int, E: float, N: int) -> np.ndarray:
    if not 0 <= index < N**block_dim:
        raise ValueError(f"index {index} out of range for {N}^{block_dim} cells")
    if E < 0:
        raise ValueError(f"bound E must be nonnegative, got {E}")
    if E == 0:
        return np.zeros(block_dim)
    cells = []
    for _ in range(block_dim):
        index, c = divmod(index, N)
        cells.append(c)
    width = 2.0 * E / N
    return -E + (np.array(cells, dtype=float) + 0.5) * width


def quantize_state(x, cfg: EncoderConfig, E: float) -> tuple[np.ndarray, list[CellIndex], bool]:
    """Encode every sensor block and decode the result.

    Returns ``(q, indices, clipped)``. ``clipped`` is true when some
    coordinate lay outside ``[-E, E]`` and had to be pulled back in; that
    cannot happen when the bound is valid, so callers should surface it.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != cfg.n:
        raise DimensionError(f"state has shape {x.shape}, partition covers {cfg.n} coordinates")
    clipped = bool(np.any(np.abs(x) > E))
    q = np.empty_like(x)
    indices = []
    start = 0
    for sensor, n_i in enumerate(cfg.partition, start=1):
        block = x[start:start + n_i]
        idx = encode_block(block, E, cfg.N)
        q[start:start + n_i] = decode_block(idx, n_i, E, cfg.N)
        indices.append(CellIndex(sensor, idx))
        start += n_i
    return q, indices, clipped


def pack_sample(indices: list[CellIndex], cfg: EncoderConfig) -> bytes:
    """Serialize one transmission per the wire format in the module docstring."""
    if len(indices) != len(cfg.partition):
        raise ValueError(f"expected {len(cfg.partition)} indices, got {len(indices)}")
    acc = 0
    nbits = 0
    for cell, n_i in zip(sorted(indices, key=lambda c: c.sensor_id), cfg.partition):
        b = bits_for_block(n_i, cfg.N)
        if not 0 <= cell.index < cfg.N**n_i:
            raise ValueError(f"index {cell.index} out of range for sensor {cell.sensor_id}")
        acc = (acc << b) | cell.index
        nbits += b
    nbytes = math.ceil(nbits / 8)
    acc <<= nbytes * 8 - nbits
    return acc.to_bytes(nbytes, "big")


def unpack_sample(payload: bytes, cfg: EncoderConfig) -> list[CellIndex]:
    widths = [bits_for_block(n_i, cfg.N) for n_i in cfg.partition]
    total = sum(widths)
    if len(payload) != math.ceil(total / 8):
        raise ValueError(f"payload is {len(payload)} bytes, expected {math.ceil(total / 8)}")
    acc = int.from_bytes(payload, "big") >> (len(payload) * 8 - total)
    out = []
    shift = total
    for sensor, b in enumerate(widths, start=1):
        shift -= b
        out.append(CellIndex(sensor, (acc >> shift) & ((1 << b) - 1)))
    return out

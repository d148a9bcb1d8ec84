"""HMF1 field container.

Layout (little-endian)::

    b"HMF1"
    u32 n, f64 h, u32 field_count
    per field: u16 name_length, UTF-8 name, u8 rank (0 or 1),
               f64 payload, sites in x-fastest order, Lie index innermost

A rank-0 field carries 3 values per site, a rank-1 field 3 x 3 (form index
outside the Lie index). Pair-valued arrays ``(..., 4, 3)`` are written as a
rank-1 field plus a rank-0 field, see :func:`pair_fields`.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import lattice as lat
from .monopole import Configuration, bps_seed

MAGIC = b"HMF1"
_HEADER = struct.Struct("<IdI")
CONFIG_FIELDS = ("nabla", "phi", "a", "psi")


class HMF1Error(ValueError):
    """Unreadable or malformed HMF1 content."""


def _site_major(arr: np.ndarray) -> np.ndarray:
    # x-fastest: z is the slowest site index
    return np.ascontiguousarray(np.swapaxes(arr, 0, 2), dtype="<f8")


def encode(n: int, h: float, fields: dict[str, np.ndarray]) -> bytes:
    parts = [MAGIC, _HEADER.pack(n, h, len(fields))]
    for name, arr in fields.items():
        arr = np.asarray(arr, dtype=float)
        if arr.shape == (n, n, n, 3):
            rank = 0
        elif arr.shape == (n, n, n, 3, 3):
            rank = 1
        else:
            raise HMF1Error(f"field {name!r} of shape {arr.shape} is neither rank 0 nor rank 1 on an n={n} grid")
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise HMF1Error(f"field name {name[:20]!r}... is too long")
        parts += [struct.pack("<H", len(raw)), raw, struct.pack("<B", rank), _site_major(arr).tobytes()]
    return b"".join(parts)


def decode(data: bytes) -> tuple[int, float, dict[str, np.ndarray]]:
    if data[:4] != MAGIC:
        raise HMF1Error("missing HMF1 magic bytes")
    try:
        n, h, count = _HEADER.unpack_from(data, 4)
    except struct.error as exc:
        raise HMF1Error("truncated header") from exc
    pos = 4 + _HEADER.size
    fields: dict[str, np.ndarray] = {}
    for _ in range(count):
        try:
            (length,) = struct.unpack_from("<H", data, pos)
            pos += 2
            name = data[pos:pos + length].decode("utf-8")
            pos += length
            (rank,) = struct.unpack_from("<B", data, pos)
            pos += 1
        except (struct.error, UnicodeDecodeError) as exc:
            raise HMF1Error("corrupt field header") from exc
        if rank not in (0, 1):
            raise HMF1Error(f"field {name!r} has unsupported rank {rank}")
        inner = (3,) if rank == 0 else (3, 3)
        count_f = n**3 * int(np.prod(inner))
        end = pos + 8 * count_f
        if end > len(data):
            raise HMF1Error(f"field {name!r} is truncated")
        arr = np.frombuffer(data, dtype="<f8", count=count_f, offset=pos).reshape((n, n, n) + inner)
        fields[name] = np.array(np.swapaxes(arr, 0, 2), dtype=float)
        pos = end
    if pos != len(data):
        raise HMF1Error(f"{len(data) - pos} trailing bytes after the last field")
    return n, h, fields


def write(path: str | Path, grid: lat.Grid, fields: dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(encode(grid.n, grid.h, fields))


def read(path: str | Path) -> tuple[lat.Grid, dict[str, np.ndarray]]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise HMF1Error(f"cannot read {path}: {exc.strerror}") from exc
    n, h, fields = decode(data)
    try:
        grid = lat.Grid(n, h)
    except ValueError as exc:
        raise HMF1Error(str(exc)) from exc
    return grid, fields


def pair_fields(prefix: str, v: np.ndarray) -> dict[str, np.ndarray]:
    return {f"{prefix}one": lat.one_part(v), f"{prefix}zero": lat.zero_part(v)}


def pair_from_fields(prefix: str, fields: dict[str, np.ndarray]) -> np.ndarray:
    try:
        return lat.make_pair(fields[f"{prefix}one"], fields[f"{prefix}zero"])
    except KeyError as exc:
        raise HMF1Error(f"missing field {exc.args[0]!r}") from exc


def config_fields(c: Configuration) -> dict[str, np.ndarray]:
    return {"nabla": c.nabla, "phi": c.phi, "a": c.a, "psi": c.psi}


def save_config(path: str | Path, c: Configuration) -> None:
    write(path, c.grid, config_fields(c))


def load_config(path: str | Path, exterior: str = "bps") -> Configuration:
    """Read a quadruple.

    HMF1 stores grid values only. ``exterior="bps"`` attaches the charge-1
    seed's analytic exterior (every configuration this package writes is a
    perturbation of it, and perturbations have zero exterior); ``"zero"``
    attaches none.
    """
    grid, fields = read(path)
    missing = [k for k in ("nabla", "phi") if k not in fields]
    if missing:
        raise HMF1Error(f"configuration file lacks field(s) {missing}")
    ext = None
    if exterior == "bps":
        ext = bps_seed(grid).exterior
    elif exterior != "zero":
        raise ValueError(f"unknown exterior policy {exterior!r}")
    return Configuration(grid, fields["nabla"], fields["phi"], fields.get("a"), fields.get("psi"), ext)

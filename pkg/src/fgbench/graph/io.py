"""Edge-list text files and the FGGS binary CSR format."""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .core import Graph, GraphFormatError, from_csr, undirect

MAGIC = b"FGGS"
VERSION = 1
# magic, version, scale, vertex_count, neighbor-array length
_HEADER = struct.Struct("<4sIIxxxxQQ")


def read_edge_list(path, vertex_count: int | None = None) -> Graph:
    """Read "u v" pairs, 0-based, '#' starts a comment."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            pairs.append((u, v))
    e = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if e.size and e.min() < 0:
        raise GraphFormatError(f"{path}: negative vertex id")
    return undirect(e, vertex_count)


def write_edge_list(g: Graph, path) -> None:
    pairs = g.edge_pairs()
    header = f"# vertices {g.vertex_count} edges {pairs.shape[0]} scale {g.scale}\n"
    _atomic_write(path, (header + "".join(f"{u} {v}\n" for u, v in pairs)).encode())


def write_binary(g: Graph, path) -> None:
    head = _HEADER.pack(MAGIC, VERSION, g.scale, g.vertex_count, g.indices.shape[0])
    body = g.indptr.astype("<i8").tobytes() + g.indices.astype("<i8").tobytes()
    _atomic_write(path, head + body)


def read_binary(path) -> Graph:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise GraphFormatError(f"{path}: not an FGGS graph file")
    magic, version, scale, n, m = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise GraphFormatError(f"{path}: unsupported FGGS version {version}")
    expect = _HEADER.size + 8 * (n + 1) + 8 * m
    if len(raw) != expect:
        raise GraphFormatError(f"{path}: size {len(raw)} does not match header ({expect})")
    off = _HEADER.size
    indptr = np.frombuffer(raw, dtype="<i8", count=n + 1, offset=off)
    indices = np.frombuffer(raw, dtype="<i8", count=m, offset=off + 8 * (n + 1))
    return from_csr(indptr.copy(), indices.copy(), scale)


def load_graph(path) -> Graph:
    with open(path, "rb") as fh:
        magic = fh.read(4)
    return read_binary(path) if magic == MAGIC else read_edge_list(path)


def save_graph(g: Graph, path, fmt: str = "binary") -> None:
    if fmt == "binary":
        write_binary(g, path)
    elif fmt == "text":
        write_edge_list(g, path)
    else:
        raise ValueError(f"unknown graph format {fmt!r}")


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise

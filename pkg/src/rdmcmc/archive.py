"""Versioned container for a compressed reconstruction.

Layout (big-endian)::

    magic      4 bytes  b"RDMC"
    version    u8       1
    n          u64
    k          u8       context order used by the quantiser
    alphabet   u16
    lz_variant u8       LZ78 stream variant id
    flags      u8       bit 0: 2-D image follows
    [width u32, height u32]   only when flag bit 0 is set
    LZ78 stream (self-delimiting, see :mod:`rdmcmc.lossless`)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import lossless

MAGIC = b"RDMC"
VERSION = 1
_HEAD = struct.Struct(">4sBQBHBB")
_DIMS = struct.Struct(">II")


class ArchiveError(ValueError):
    pass


@dataclass
class Archive:
    y: np.ndarray
    k: int
    alphabet_size: int
    width: int | None = None
    height: int | None = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.int64)
        if (self.width is None) != (self.height is None):
            raise ValueError("width and height go together")
        if self.width is not None and self.width * self.height != self.y.size:
            raise ValueError("image dimensions do not match the sequence length")


def pack(archive: Archive) -> bytes:
    image = archive.width is not None
    head = _HEAD.pack(MAGIC, VERSION, archive.y.size, archive.k, archive.alphabet_size,
                      lossless.VARIANT, int(image))
    dims = _DIMS.pack(archive.width, archive.height) if image else b""
    return head + dims + lossless.lz78_encode(archive.y, archive.alphabet_size)


def unpack(data: bytes) -> Archive:
    if len(data) < _HEAD.size:
        raise ArchiveError("truncated archive header")
    magic, version, n, k, a, variant, flags = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise ArchiveError("not an archive (bad magic)")
    if version != VERSION:
        raise ArchiveError(f"unsupported archive version {version}")
    if variant != lossless.VARIANT:
        raise ArchiveError(f"unsupported LZ variant {variant}")
    if flags & ~1:
        raise ArchiveError("unknown flag bits")
    pos = _HEAD.size
    width = height = None
    if flags & 1:
        if len(data) < pos + _DIMS.size:
            raise ArchiveError("truncated image dimensions")
        width, height = _DIMS.unpack_from(data, pos)
        pos += _DIMS.size
    try:
        y = lossless.lz78_decode(data[pos:])
    except lossless.MalformedStream as exc:
        raise ArchiveError(f"corrupt payload: {exc}") from exc
    if y.size != n:
        raise ArchiveError("payload length disagrees with header")
    if y.size and y.max() >= a:
        raise ArchiveError("payload symbol outside the header alphabet")
    try:
        return Archive(y, k, a, width, height)
    except ValueError as exc:
        raise ArchiveError(str(exc)) from exc


def write(path, archive: Archive) -> int:
    data = pack(archive)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def read(path) -> Archive:
    with open(path, "rb") as fh:
        return unpack(fh.read())

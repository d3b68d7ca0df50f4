"""Binary images: PBM I/O and 2-D causal context shapes.

Pixels are stored row-major, ``1`` = black as in PBM.  Writers emit the
canonical header ``P4\\n<w> <h>\\n`` (or ``P1``), so canonical files
round-trip byte for byte; comments in input headers are accepted and
dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .context import ContextTable

# (row, col) offsets; W, WW, NW, N, NE, NN
DEFAULT_OFFSETS = ((0, -1), (0, -2), (-1, -1), (-1, 0), (-1, 1), (-2, 0))


class MalformedPBM(ValueError):
    pass


def parse_offsets(text: str) -> tuple:
    """``"0:-1,-1:0"`` -> ``((0, -1), (-1, 0))``."""
    out = []
    for item in text.replace(" ", "").split(","):
        if not item:
            continue
        try:
            dr, dc = item.split(":")
            out.append((int(dr), int(dc)))
        except ValueError:
            raise ValueError(f"bad offset {item!r}; expected row:col") from None
    return tuple(out)


@dataclass
class Image2D:
    width: int
    height: int
    pixels: np.ndarray  # (height * width,) int64, row-major
    offsets: tuple = field(default=DEFAULT_OFFSETS)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.int64).reshape(-1)
        if self.pixels.size != self.width * self.height:
            raise ValueError("pixel count does not match width * height")
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > 1):
            raise ValueError("PBM pixels must be 0 or 1")
        self.offsets = tuple((int(r), int(c)) for r, c in self.offsets)
        for dr, dc in self.offsets:
            if not (dr < 0 or (dr == 0 and dc < 0)):
                raise ValueError(f"offset {(dr, dc)} is not causal in raster order")

    @property
    def n(self) -> int:
        return self.width * self.height

    def raster(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)

    def with_pixels(self, pixels) -> "Image2D":
        return Image2D(self.width, self.height, pixels, self.offsets)

    def context_table(self) -> ContextTable:
        return ContextTable.raster(self.height, self.width, self.offsets)

    def prefix_table(self, m: int) -> tuple[ContextTable, int]:
        """Context table for the first ``max(1, m // width)`` rows and its pixel count."""
        rows = min(self.height, max(1, m // self.width))
        return ContextTable.raster(rows, self.width, self.offsets), rows * self.width

    def window_table(self, m: int = 1) -> np.ndarray:
        """(n, (2m+1)**2) indices of the square neighbourhood; ``-1`` off the image."""
        rr, cc = np.divmod(np.arange(self.n), self.width)
        cols = []
        for dr in range(-m, m + 1):
            for dc in range(-m, m + 1):
                r2, c2 = rr + dr, cc + dc
                inside = (r2 >= 0) & (r2 < self.height) & (c2 >= 0) & (c2 < self.width)
                cols.append(np.where(inside, r2 * self.width + c2, -1))
        return np.stack(cols, axis=1)


def raster_previous(height: int, width: int, k: int) -> ContextTable:
    """Context of the ``k`` previous pixels in raster order, ignoring rows.

    Counts only pixels with a full history, which makes it the 1-D linear
    model expressed through the generic table constructor.
    """
    n = height * width
    if n <= k:
        raise ValueError("image too small for this order")
    p = np.arange(n)[:, None]
    ctx = p - 1 - np.arange(k)[None, :]
    ctx[ctx < 0] = -1
    return ContextTable(ctx.reshape(n, k), np.arange(n) >= k, "raster-previous")


_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def _header(data: bytes, count: int) -> tuple[list, int]:
    pos = 0
    fields = []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if not m:
            raise MalformedPBM("truncated header")
        fields.append(m.group(1))
        pos = m.end()
    return fields, pos


def parse_pbm(data: bytes, offsets=DEFAULT_OFFSETS) -> Image2D:
    fields, pos = _header(data, 3)
    magic = fields[0]
    try:
        width, height = int(fields[1]), int(fields[2])
    except ValueError:
        raise MalformedPBM("non-numeric dimensions") from None
    if width < 1 or height < 1:
        raise MalformedPBM("image dimensions must be positive")
    if magic == b"P4":
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise MalformedPBM("missing whitespace after header")
        body = data[pos + 1:]
        row_bytes = (width + 7) // 8
        if len(body) < row_bytes * height:
            raise MalformedPBM("truncated raster")
        raw = np.frombuffer(body[:row_bytes * height], dtype=np.uint8).reshape(height, row_bytes)
        bits = np.unpackbits(raw, axis=1)[:, :width]
        return Image2D(width, height, bits.reshape(-1), offsets)
    if magic == b"P1":
        body = re.sub(rb"#[^\n]*", b"", data[pos:])
        digits = re.sub(rb"\s", b"", body)
        if len(digits) < width * height:
            raise MalformedPBM("truncated raster")
        digits = digits[:width * height]
        if digits.strip(b"01"):
            raise MalformedPBM("P1 raster must contain only 0 and 1")
        px = np.frombuffer(digits, dtype=np.uint8) - ord("0")
        return Image2D(width, height, px, offsets)
    raise MalformedPBM(f"unsupported magic {magic!r}")


def format_pbm(image: Image2D, binary: bool = True) -> bytes:
    header = f"{'P4' if binary else 'P1'}\n{image.width} {image.height}\n".encode()
    r = image.raster().astype(np.uint8)
    if binary:
        return header + np.packbits(r, axis=1).tobytes()
    lines = [" ".join(str(v) for v in row) for row in r.tolist()]
    return header + ("\n".join(lines) + "\n").encode()


def read_pbm(path, offsets=DEFAULT_OFFSETS) -> Image2D:
    with open(path, "rb") as fh:
        return parse_pbm(fh.read(), offsets)


def write_pbm(path, image: Image2D, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(format_pbm(image, binary))

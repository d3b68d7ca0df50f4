"""Lossless backends: an LZ78 codec and the two-part enumerative code length.

LZ78 bitstream (all integers big-endian, payload bits packed MSB first)::

    magic      4 bytes  b"LZ78"
    variant    u8       1
    n          u64      number of symbols
    alphabet   u16      alphabet size A
    flags      u8       bit 0: last phrase is a bare back-reference
    nbits      u64      payload length in bits
    payload    ceil(nbits / 8) bytes, zero-padded

Phrase ``j`` (1-based) is written as its dictionary index among the ``j``
possible values (root plus ``j-1`` earlier phrases) in truncated binary,
i.e. ``floor(log2 j)`` or ``ceil(log2 j)`` bits, followed by the innovation
symbol in ``ceil(log2 A)`` bits.  If the input ends in the middle of a match, the
final phrase carries the index only and flag bit 0 is set.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .context import LINEAR, as_symbols, build_counts, infer_alphabet

MAGIC = b"LZ78"
VARIANT = 1
_HEADER = struct.Struct(">4sBQHBQ")


class MalformedStream(ValueError):
    pass


def _width(v: int) -> int:
    """Bits needed to index ``v`` distinct values."""
    return (v - 1).bit_length() if v > 1 else 0


def _phase_in(v: int, m: int) -> tuple[int, int]:
    """Truncated-binary codeword (value, width) for ``v`` in ``[0, m)``."""
    w = _width(m)
    short = (1 << w) - m
    if v < short:
        return v, w - 1
    return v + short, w


@dataclass
class LZ78Parse:
    phrases: list  # (parent node id, innovation symbol or None)
    alphabet_size: int

    @property
    def bit_length(self) -> int:
        sym_bits = _width(self.alphabet_size)
        total = 0
        for j, (parent, sym) in enumerate(self.phrases, start=1):
            total += _phase_in(parent, j)[1] + (sym_bits if sym is not None else 0)
        return total


def lz78_parse(y, alphabet_size: int | None = None) -> LZ78Parse:
    y = as_symbols(y)
    a = alphabet_size or infer_alphabet(y)
    as_symbols(y, a)
    trie = {}
    phrases = []
    node = 0
    for s in y.tolist():
        nxt = trie.get((node, s))
        if nxt is None:
            phrases.append((node, s))
            trie[(node, s)] = len(phrases)
            node = 0
        else:
            node = nxt
    if node:
        phrases.append((node, None))
    return LZ78Parse(phrases, a)


def lz78_length(y, alphabet_size: int | None = None) -> int:
    """Payload length in bits of the LZ78 description of ``y``."""
    return lz78_parse(y, alphabet_size).bit_length


def lz78_encode(y, alphabet_size: int | None = None) -> bytes:
    y = as_symbols(y)
    if y.size == 0:
        raise ValueError("cannot encode an empty sequence")
    parse = lz78_parse(y, alphabet_size)
    sym_bits = _width(parse.alphabet_size)
    parts = []
    partial = False
    for j, (parent, sym) in enumerate(parse.phrases, start=1):
        code, w = _phase_in(parent, j)
        if w:
            parts.append(format(code, f"0{w}b"))
        if sym is None:
            partial = True
        elif sym_bits:
            parts.append(format(sym, f"0{sym_bits}b"))
    bits = "".join(parts)
    nbits = len(bits)
    pad = (-nbits) % 8
    payload = int(bits + "0" * pad, 2).to_bytes((nbits + pad) // 8, "big") if nbits else b""
    header = _HEADER.pack(MAGIC, VARIANT, y.size, parse.alphabet_size, int(partial), nbits)
    return header + payload


def lz78_decode(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise MalformedStream("truncated header")
    magic, variant, n, a, flags, nbits = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedStream("bad magic")
    if variant != VARIANT:
        raise MalformedStream(f"unknown LZ78 variant {variant}")
    if flags & ~1:
        raise MalformedStream("unknown flag bits")
    payload = data[_HEADER.size:]
    if len(payload) != (nbits + 7) // 8:
        raise MalformedStream("payload length does not match bit count")
    bits = "".join(format(b, "08b") for b in payload)
    if bits[nbits:].strip("0"):
        raise MalformedStream("non-zero padding")
    bits = bits[:nbits]
    sym_bits = _width(a)
    partial = bool(flags & 1)
    strings = [()]
    out = []
    pos = 0
    j = 0
    while pos < nbits or (nbits == 0 and len(out) < n):
        j += 1
        w = _width(j)
        short = (1 << w) - j
        if pos + max(w - 1, 0) > nbits:
            raise MalformedStream("truncated phrase index")
        parent = int(bits[pos:pos + w - 1], 2) if w > 1 else 0
        pos += max(w - 1, 0)
        if w and parent >= short:
            if pos >= nbits:
                raise MalformedStream("truncated phrase index")
            parent = ((parent << 1) | (bits[pos] == "1")) - short
            pos += 1
        if parent >= len(strings):
            raise MalformedStream("phrase index out of range")
        if pos == nbits and partial:
            if parent == 0:
                raise MalformedStream("empty final phrase")
            out.extend(strings[parent])
            break
        if pos + sym_bits > nbits:
            raise MalformedStream("truncated innovation symbol")
        sym = int(bits[pos:pos + sym_bits], 2) if sym_bits else 0
        pos += sym_bits
        if sym >= a:
            raise MalformedStream("symbol outside alphabet")
        phrase = strings[parent] + (sym,)
        strings.append(phrase)
        out.extend(phrase)
        if len(out) > n:
            break
    if len(out) != n:
        raise MalformedStream(f"decoded {len(out)} symbols, header says {n}")
    return np.array(out, dtype=np.int64)


def log2_multinomial(counts) -> float:
    """log2 of ``(sum c)! / prod(c!)`` via log-gamma."""
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("negative count")
    v = math.lgamma(sum(counts) + 1) - sum(math.lgamma(c + 1) for c in counts)
    return v / math.log(2)


def enumerative_length(y, k: int, alphabet_size: int | None = None) -> float:
    """Two-part code length: count-matrix header plus, for every context,
    the index of the subsequence among those with the same symbol counts.
    """
    y = as_symbols(y)
    a = alphabet_size or infer_alphabet(y)
    n = y.size
    if n <= k:
        raise ValueError(f"sequence of length {n} is too short for order k={k}")
    cm = build_counts(y, k, LINEAR, a)
    body = 0.0
    for col in cm.counts[cm.coltot > 0]:
        body += log2_multinomial(col)
    return body + enumerative_header(n, k, a)


def enumerative_header(n: int, k: int, alphabet_size: int = 2) -> int:
    return alphabet_size ** (k + 1) * math.ceil(math.log2(n)) + k * _width(alphabet_size)

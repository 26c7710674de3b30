"""Fixed-size QR symbol generation for short byte-mode payloads.

Symbols are always version 3 (29x29 modules) at error-correction level L,
more than enough capacity for attribute labels (53 payload bytes).  They are
rendered without a quiet zone so the default 4-pixel module scale yields the
116x116 bitmap the memory pipeline expects.  A seeded random provider is
also exposed so memory experiments can run without symbol structure.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EmptyLabel, LabelTooLong
from .galois import Codeword, rs_encode
from .patterns import BinaryPattern

VERSION = 3
SIZE = 29  # modules per side for version 3
ECC_LEVEL = "L"
TOTAL_CODEWORDS = 70
ECC_CODEWORDS = 15
DATA_CODEWORDS = TOTAL_CODEWORDS - ECC_CODEWORDS
CONTENT_CAPACITY = 53  # payload bytes left after the 12-bit mode/length header
ALIGNMENT_CENTER = (22, 22)
DEFAULT_SCALE = 4  # 29 * 4 = 116 pixels per side

_BYTE_MODE = 0b0100
_PAD_BYTES = (0xEC, 0x11)
_ECC_LEVEL_BITS = {"L": 0b01, "M": 0b00, "Q": 0b11, "H": 0b10}
_FORMAT_GEN = 0b10100110111  # BCH(15,5) generator
_FORMAT_XOR = 0b101010000010010

# Mask predicates by mask index; r is the row, c the column.
_MASKS = (
    lambda r, c: (r + c) % 2 == 0,
    lambda r, c: r % 2 == 0,
    lambda r, c: c % 3 == 0,
    lambda r, c: (r + c) % 3 == 0,
    lambda r, c: (r // 2 + c // 3) % 2 == 0,
    lambda r, c: (r * c) % 2 + (r * c) % 3 == 0,
    lambda r, c: ((r * c) % 2 + (r * c) % 3) % 2 == 0,
    lambda r, c: ((r + c) % 2 + (r * c) % 3) % 2 == 0,
)


@dataclass(frozen=True)
class QrMatrix:
    """A finished symbol: module grid plus the choices that produced it."""

    size: int
    modules: np.ndarray  # (size, size) uint8, dark=1
    version: int
    ecc_level: str
    mask: int


class _BitWriter:
    def __init__(self) -> None:
        self.bits: list[int] = []

    def put(self, value: int, count: int) -> None:
        for shift in range(count - 1, -1, -1):
            self.bits.append((value >> shift) & 1)

    def to_bytes(self) -> bytes:
        assert len(self.bits) % 8 == 0
        out = bytearray()
        for i in range(0, len(self.bits), 8):
            byte = 0
            for bit in self.bits[i : i + 8]:
                byte = (byte << 1) | bit
            out.append(byte)
        return bytes(out)


def encode_payload(label: str) -> bytes:
    """Byte-mode bit stream: mode, length, data, terminator, pad bytes."""
    if label == "":
        raise EmptyLabel("label must not be empty")
    data = label.encode("utf-8")
    if len(data) > CONTENT_CAPACITY:
        raise LabelTooLong(
            f"label is {len(data)} bytes encoded; the symbol holds {CONTENT_CAPACITY}"
        )
    w = _BitWriter()
    w.put(_BYTE_MODE, 4)
    w.put(len(data), 8)
    for byte in data:
        w.put(byte, 8)
    capacity = DATA_CODEWORDS * 8
    w.put(0, min(4, capacity - len(w.bits)))  # terminator
    w.put(0, -len(w.bits) % 8)  # pad to byte boundary
    out = bytearray(w.to_bytes())
    for i in range(DATA_CODEWORDS - len(out)):
        out.append(_PAD_BYTES[i % 2])
    return bytes(out)


def encode_codewords(label: str) -> Codeword:
    """Payload plus error-correction bytes for a label."""
    return rs_encode(encode_payload(label), ECC_CODEWORDS)


# ---------------------------------------------------------------------------
# Module placement.
# ---------------------------------------------------------------------------


def _draw_finder(modules, reserved, row: int, col: int) -> None:
    for r in range(-1, 8):
        for c in range(-1, 8):
            rr, cc = row + r, col + c
            if not (0 <= rr < SIZE and 0 <= cc < SIZE):
                continue
            ring = max(abs(r - 3), abs(c - 3))
            modules[rr, cc] = 1 if ring in (0, 1, 3) else 0
            reserved[rr, cc] = True


def _draw_alignment(modules, reserved, row: int, col: int) -> None:
    for r in range(-2, 3):
        for c in range(-2, 3):
            ring = max(abs(r), abs(c))
            modules[row + r, col + c] = 1 if ring != 1 else 0
            reserved[row + r, col + c] = True


def _format_positions() -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """(vertical, horizontal) module positions of format bit i, LSB first."""
    pairs = []
    for i in range(15):
        if i < 6:
            vert = (i, 8)
        elif i < 8:
            vert = (i + 1, 8)
        else:
            vert = (SIZE - 15 + i, 8)
        if i < 8:
            horiz = (8, SIZE - 1 - i)
        elif i < 9:
            horiz = (8, 15 - i)
        else:
            horiz = (8, 14 - i)
        pairs.append((vert, horiz))
    return pairs


def _base_matrix() -> tuple[np.ndarray, np.ndarray]:
    """Function patterns drawn, format area reserved; returns (modules, reserved)."""
    modules = np.zeros((SIZE, SIZE), dtype=np.uint8)
    reserved = np.zeros((SIZE, SIZE), dtype=bool)

    _draw_finder(modules, reserved, 0, 0)
    _draw_finder(modules, reserved, 0, SIZE - 7)
    _draw_finder(modules, reserved, SIZE - 7, 0)
    _draw_alignment(modules, reserved, *ALIGNMENT_CENTER)

    for k in range(8, SIZE - 8):
        bit = 1 - (k % 2)
        modules[6, k] = bit
        reserved[6, k] = True
        modules[k, 6] = bit
        reserved[k, 6] = True

    for vert, horiz in _format_positions():
        reserved[vert] = True
        reserved[horiz] = True
    modules[SIZE - 8, 8] = 1  # fixed dark module
    reserved[SIZE - 8, 8] = True

    return modules, reserved


def function_region(size: int = SIZE) -> np.ndarray:
    """Boolean map of modules that never carry data (version 3 layout)."""
    if size != SIZE:
        raise ValueError(f"only the version-{VERSION} size {SIZE} is supported")
    _, reserved = _base_matrix()
    return reserved


def _data_positions(reserved: np.ndarray) -> list[tuple[int, int]]:
    """Zig-zag placement order: two-module columns snaking up and down."""
    positions = []
    col = SIZE - 1
    upward = True
    while col > 0:
        if col == 6:  # the vertical timing column is skipped entirely
            col -= 1
        rows = range(SIZE - 1, -1, -1) if upward else range(SIZE)
        for r in rows:
            for c in (col, col - 1):
                if not reserved[r, c]:
                    positions.append((r, c))
        upward = not upward
        col -= 2
    return positions


def _format_bits(ecc_level: str, mask: int) -> int:
    """15-bit format word: 5 data bits, 10 BCH bits, fixed XOR applied."""
    data = (_ECC_LEVEL_BITS[ecc_level] << 3) | mask
    rem = data << 10
    for shift in range(4, -1, -1):
        if rem & (1 << (10 + shift)):
            rem ^= _FORMAT_GEN << shift
    return ((data << 10) | rem) ^ _FORMAT_XOR


def _draw_format(modules: np.ndarray, bits: int) -> None:
    for i, (vert, horiz) in enumerate(_format_positions()):
        value = (bits >> i) & 1
        modules[vert] = value
        modules[horiz] = value


@lru_cache(maxsize=8)
def _mask_grid(mask: int) -> np.ndarray:
    grid = np.zeros((SIZE, SIZE), dtype=np.uint8)
    for r in range(SIZE):
        for c in range(SIZE):
            grid[r, c] = _MASKS[mask](r, c)
    grid.setflags(write=False)
    return grid


def penalty(modules: np.ndarray) -> int:
    """Symbol quality score; lower is better.

    Scores long same-color runs, 2x2 blocks, finder-lookalike sequences, and
    overall dark/light imbalance.
    """
    grid = np.asarray(modules)
    n = grid.shape[0]
    score = 0

    for lines in (grid, grid.T):
        for line in lines:
            run = 1
            for k in range(1, n):
                if line[k] == line[k - 1]:
                    run += 1
                else:
                    if run >= 5:
                        score += 3 + run - 5
                    run = 1
            if run >= 5:
                score += 3 + run - 5

    blocks = (
        (grid[:-1, :-1] == grid[:-1, 1:])
        & (grid[:-1, :-1] == grid[1:, :-1])
        & (grid[:-1, :-1] == grid[1:, 1:])
    )
    score += 3 * int(blocks.sum())

    lookalike = (1, 0, 1, 1, 1, 0, 1)
    for lines in (grid, grid.T):
        for line in lines:
            seq = tuple(int(v) for v in line)
            for k in range(n - 10):
                window = seq[k : k + 11]
                if window == lookalike + (0, 0, 0, 0) or window == (0, 0, 0, 0) + lookalike:
                    score += 40

    dark = int(grid.sum())
    total = grid.size
    score += 10 * (abs(100 * dark - 50 * total) // (5 * total))
    return score


def encode_label(label: str, mask: int | None = None) -> QrMatrix:
    """Encode a label into a version-3 symbol.

    The mask is chosen by minimum penalty over all eight patterns (lowest
    index wins ties) unless forced explicitly.
    """
    if mask is not None and mask not in range(8):
        raise ValueError("mask must be in 0..7")
    codeword = encode_codewords(label)
    base, reserved = _base_matrix()

    bits = []
    for byte in codeword.blob:
        for shift in range(7, -1, -1):
            bits.append((byte >> shift) & 1)
    positions = _data_positions(reserved)
    assert len(bits) <= len(positions), "codewords exceed the symbol's data region"
    for pos, bit in zip(positions, bits):
        base[pos] = bit
    # remaining positions, if any, stay light (remainder bits)

    candidates = range(8) if mask is None else (mask,)
    best = None
    for m in candidates:
        cand = np.where(reserved, base, base ^ _mask_grid(m)).astype(np.uint8)
        _draw_format(cand, _format_bits(ECC_LEVEL, m))
        p = penalty(cand)
        if best is None or p < best[0]:
            best = (p, m, cand)
    _, chosen, modules = best
    modules.setflags(write=False)
    return QrMatrix(size=SIZE, modules=modules, version=VERSION, ecc_level=ECC_LEVEL, mask=chosen)


def render(matrix: QrMatrix, scale: int = DEFAULT_SCALE) -> BinaryPattern:
    """Expand each module into a scale x scale pixel block (no quiet zone)."""
    if scale < 1:
        raise ValueError("scale must be >= 1")
    bits = np.repeat(np.repeat(matrix.modules, scale, axis=0), scale, axis=1)
    return BinaryPattern(bits)


# ---------------------------------------------------------------------------
# Pattern providers.
# ---------------------------------------------------------------------------


def random_pattern(seed, width: int = 116, height: int = 116) -> BinaryPattern:
    """Deterministic ~50%-density bitmap for experiments that don't need symbols."""
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(height, width), dtype=np.uint8)
    if not bits.any():
        bits[0, 0] = 1
    return BinaryPattern(bits)


def label_pattern(label: str, provider: str = "qr", seed: int = 0) -> BinaryPattern:
    """Pattern source used for training: real symbols or seeded random bitmaps."""
    if provider == "qr":
        return render(encode_label(label))
    if provider == "random":
        return random_pattern((int(seed) << 32) ^ zlib.crc32(label.encode("utf-8")))
    raise ValueError(f"unknown provider {provider!r}")

"""Bitmap patterns, their presentation vectors, and the attribute catalog.

A pattern is a rectangular grid of dark (1) / light (0) pixels.  Before being
presented to the Recall Net it is flattened row-major into a float vector,
either scaled so its squared components sum to one (the default) or left as
raw 0/1 values for unnormalized experiments.  Patterns round-trip to disk as
plain PBM, and the catalog maps attribute groups to ordered label lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    CatalogError,
    DegeneratePattern,
    DimensionMismatch,
    DuplicateEntry,
    PbmFormatError,
)

# A presentation vector: 1-D float64 array of row-major pixel values.
PatternVector = np.ndarray


class BinaryPattern:
    """Dark/light pixel grid; dark pixels are 1."""

    def __init__(self, bits) -> None:
        bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise DimensionMismatch(f"pattern bits must be 2-D, got {bits.ndim}-D")
        if bits.size and bits.max() > 1:
            raise ValueError("pattern bits must be 0 or 1")
        bits.setflags(write=False)
        self.bits = bits

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def dim(self) -> int:
        return self.bits.size

    def popcount(self) -> int:
        """Number of dark pixels."""
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryPattern):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"BinaryPattern({self.width}x{self.height}, dark={self.popcount()})"


def normalize(pattern: BinaryPattern) -> PatternVector:
    """Unit-energy presentation vector: every dark pixel becomes 1/sqrt(popcount).

    The squared components then sum to one, which is what makes a single
    cue-weight update land exactly on the learning value.
    """
    dark = pattern.popcount()
    if dark == 0:
        raise DegeneratePattern("cannot normalize an all-light pattern")
    return pattern.bits.reshape(-1).astype(np.float64) / math.sqrt(dark)


def raw_vector(pattern: BinaryPattern) -> PatternVector:
    """Presentation vector without normalization: dark=1.0, light=0.0."""
    return pattern.bits.reshape(-1).astype(np.float64)


def to_vector(pattern: BinaryPattern, normalized: bool = True) -> PatternVector:
    """Flatten a pattern for presentation, normalized or raw."""
    return normalize(pattern) if normalized else raw_vector(pattern)


def to_pattern(vector: PatternVector, width: int, height: int) -> BinaryPattern:
    """Threshold a recalled vector at half its peak to regenerate the bitmap.

    Exact for one-shot-stored patterns, whose recalled components are either
    zero or a single positive level.
    """
    v = np.asarray(vector, dtype=np.float64).reshape(-1)
    if v.size != width * height:
        raise DimensionMismatch(
            f"vector has {v.size} components, expected {width}x{height}"
        )
    peak = float(v.max()) if v.size else 0.0
    if peak <= 0.0:
        raise DegeneratePattern("recalled vector has no positive component")
    return BinaryPattern((v >= peak / 2).astype(np.uint8).reshape(height, width))


# ---------------------------------------------------------------------------
# Plain PBM (P1) round trip.
# ---------------------------------------------------------------------------


def save_pbm(pattern: BinaryPattern, path) -> None:
    """Write a pattern as plain PBM: magic P1, dimensions, one pixel row per line."""
    rows = "\n".join(" ".join(str(int(b)) for b in row) for row in pattern.bits)
    text = f"P1\n{pattern.width} {pattern.height}\n{rows}\n"
    Path(path).write_text(text, encoding="ascii", newline="\n")


def _pbm_tokens(text: str):
    for line in text.splitlines():
        body = line.split("#", 1)[0]
        yield from body.split()


def load_pbm(path, expect: tuple[int, int] | None = None) -> BinaryPattern:
    """Read a plain PBM file; `expect` optionally pins (width, height)."""
    tokens = list(_pbm_tokens(Path(path).read_text(encoding="ascii", errors="replace")))
    if not tokens or tokens[0] != "P1":
        magic = tokens[0] if tokens else "<empty>"
        raise PbmFormatError(f"{path}: bad magic {magic!r}, expected P1")
    try:
        width, height = int(tokens[1]), int(tokens[2])
    except (IndexError, ValueError):
        raise PbmFormatError(f"{path}: missing or malformed dimensions") from None
    if width <= 0 or height <= 0:
        raise PbmFormatError(f"{path}: non-positive dimensions {width}x{height}")
    if expect is not None and (width, height) != tuple(expect):
        raise DimensionMismatch(
            f"{path}: is {width}x{height}, expected {expect[0]}x{expect[1]}"
        )
    pixels = tokens[3:]
    if len(pixels) != width * height:
        raise PbmFormatError(
            f"{path}: has {len(pixels)} pixel tokens, expected {width * height}"
        )
    if any(tok not in ("0", "1") for tok in pixels):
        bad = next(tok for tok in pixels if tok not in ("0", "1"))
        raise PbmFormatError(f"{path}: pixel token {bad!r} is not 0 or 1")
    bits = np.fromiter((tok == "1" for tok in pixels), dtype=np.uint8, count=len(pixels))
    return BinaryPattern(bits.reshape(height, width))


# ---------------------------------------------------------------------------
# Attribute catalog.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeGroup:
    """One attribute group: an id and its ordered labels (one cue neuron each)."""

    name: str
    labels: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class AttributeCatalog:
    """Ordered collection of attribute groups."""

    groups: tuple[AttributeGroup, ...]

    def __iter__(self):
        return iter(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def group(self, name: str) -> AttributeGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)

    def label(self, name: str, index: int) -> str:
        return self.group(name).labels[index]


def parse_catalog(text: str) -> AttributeCatalog:
    """Parse `group:index:label` lines; `#` comments and blank lines are skipped."""
    order: list[str] = []
    entries: dict[str, dict[int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split(":", 2)
        if len(parts) != 3:
            raise CatalogError(f"line {lineno}: expected group:index:label, got {body!r}")
        name, index_text, label = parts[0].strip(), parts[1].strip(), parts[2].strip()
        if not name or any(ch.isspace() for ch in name):
            raise CatalogError(f"line {lineno}: group name {name!r} must be one word")
        try:
            index = int(index_text)
        except ValueError:
            raise CatalogError(f"line {lineno}: index {index_text!r} is not an integer") from None
        if index < 0:
            raise CatalogError(f"line {lineno}: index {index} is negative")
        if not label:
            raise CatalogError(f"line {lineno}: empty label")
        if name not in entries:
            order.append(name)
            entries[name] = {}
        group = entries[name]
        if index in group:
            raise DuplicateEntry(f"line {lineno}: duplicate entry {name}:{index}")
        if label in group.values():
            raise DuplicateEntry(f"line {lineno}: duplicate label {label!r} in group {name}")
        group[index] = label

    groups = []
    for name in order:
        group = entries[name]
        expected = set(range(len(group)))
        if set(group) != expected:
            missing = sorted(expected - set(group)) or sorted(set(group) - expected)
            raise CatalogError(
                f"group {name}: indices must run 0..{len(group) - 1} without gaps"
                f" (problem near index {missing[0]})"
            )
        groups.append(AttributeGroup(name, tuple(group[i] for i in range(len(group)))))
    return AttributeCatalog(tuple(groups))


def load_catalog(path) -> AttributeCatalog:
    """Load an attribute catalog from a text file."""
    return parse_catalog(Path(path).read_text(encoding="utf-8"))


def default_catalog() -> AttributeCatalog:
    """The bundled three-group, seven-label catalog."""
    text = resources.files("cbrn").joinpath("data/catalog.txt").read_text(encoding="utf-8")
    return parse_catalog(text)

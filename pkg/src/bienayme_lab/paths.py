"""Lattice paths, tree <-> path codecs, and the Vervaat transform.

A lattice path here is an integer sequence s_0..s_n with s_0 = 0 and every
increment at least -1.  Paths ending at -1 are bridges; bridges that stay
nonnegative before the final step are excursions.  Excursions of length n
are in bijection with plane trees on n vertices through the exploration
processes: the walk that starts at 0 and adds (child count - 1) for each
vertex taken in either lexicographic (depth-first) or breadth-first order.

The Vervaat transform rotates a bridge's increments to start just after the
first minimum, producing an excursion (the cycle lemma).
"""

from __future__ import annotations

import io
from enum import Enum

import numpy as np

from .tree import PlaneTree

__all__ = ["LatticePath", "PathKind", "encode", "decode", "vervaat",
           "classify", "width_upper"]


class PathKind(str, Enum):
    EXCURSION = "excursion"
    BRIDGE = "bridge"
    WALK = "walk"
    INVALID = "invalid"


class LatticePath:
    """Immutable integer path; values include the starting 0."""

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.asarray(values, dtype=np.int64)
        if v.ndim != 1 or len(v) < 1:
            raise ValueError("a path needs at least its starting point")
        self.values = v
        self.values.setflags(write=False)

    @classmethod
    def from_increments(cls, increments) -> "LatticePath":
        inc = np.asarray(increments, dtype=np.int64)
        out = np.empty(len(inc) + 1, dtype=np.int64)
        out[0] = 0
        np.cumsum(inc, out=out[1:])
        return cls(out)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def __len__(self) -> int:
        # number of steps
        return len(self.values) - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticePath) and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    def __repr__(self) -> str:
        if len(self.values) <= 20:
            return f"LatticePath({self.values.tolist()})"
        return f"LatticePath(<{len(self)} steps>)"

    def to_csv_row(self) -> str:
        return ",".join(str(int(x)) for x in self.values)

    @classmethod
    def from_csv_row(cls, row: str) -> "LatticePath":
        return cls([int(tok) for tok in row.strip().split(",")])


def classify(values) -> PathKind:
    s = np.asarray(values, dtype=np.int64)
    if len(s) < 2 or s[0] != 0 or np.diff(s).min() < -1:
        return PathKind.INVALID
    if s[-1] != -1:
        return PathKind.WALK
    if len(s) == 2 or s[1:-1].min() >= 0:
        return PathKind.EXCURSION
    return PathKind.BRIDGE


def encode(t: PlaneTree, order: str) -> LatticePath:
    """Exploration path of t; order is 'lex' or 'bfs'."""
    if order == "bfs":
        deg = t.degrees
    elif order == "lex":
        deg = t.degrees[t.lex_order()]
    else:
        raise ValueError(f"unknown order {order!r}")
    return LatticePath.from_increments(deg - 1)


def decode(p: LatticePath, order: str) -> PlaneTree:
    """Inverse of encode; p must be an excursion."""
    if classify(p.values) is not PathKind.EXCURSION:
        raise ValueError("only excursions code trees")
    deg = p.increments + 1
    if order == "bfs":
        return PlaneTree.from_bfs_degrees(deg)
    if order == "lex":
        return PlaneTree.from_lex_degrees(deg)
    raise ValueError(f"unknown order {order!r}")


def vervaat(b: LatticePath) -> tuple[LatticePath, int]:
    """Rotate the bridge b at its first minimum; returns (excursion, m).

    m is the first index attaining the overall minimum of b.  The output
    reads b's increments cyclically starting just after position m, and is
    always an excursion with the same increment multiset.
    """
    kind = classify(b.values)
    if kind not in (PathKind.BRIDGE, PathKind.EXCURSION):
        raise ValueError("vervaat is defined on bridges")
    m = int(np.argmin(b.values))
    x = b.increments
    rotated = np.concatenate([x[m:], x[:m]])
    return LatticePath.from_increments(rotated), m


def width_upper(p: LatticePath) -> int:
    """Maximum of the path values; for a BFS excursion this dominates the width."""
    return int(p.values.max())

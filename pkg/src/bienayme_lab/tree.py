"""Plane trees stored as flat breadth-first arrays, and their statistics.

A plane tree on n vertices is stored as the vector of child counts in
breadth-first (BFS) order.  This is a bijective encoding: vertex 0 is the
root, and the children of the i-th vertex in BFS order are the next block
of vertices after the children of vertices 0..i-1.  Parents, depths and
generation sizes are all recovered with O(n) vectorized passes, which keeps
million-vertex trees cheap.

The decomposition at the maximum-degree vertex splits a tree into the
spine from the root to that vertex, the subtrees hanging from its children,
and the forests hanging off the spine on either side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["PlaneTree", "MaxDecomposition", "height", "width_profile",
           "max_degree", "decompose_at_max"]


class PlaneTree:
    """Rooted ordered tree; immutable after construction.

    Attributes
    ----------
    degrees : np.ndarray
        Child count of each vertex, in BFS order.
    """

    __slots__ = ("degrees", "_csum", "_parents", "_depths", "_gen_sizes",
                 "_lex_order", "_subtree_heights")

    def __init__(self, degrees_bfs):
        d = np.asarray(degrees_bfs, dtype=np.int64)
        if d.ndim != 1 or len(d) == 0:
            raise ValueError("tree needs at least one vertex")
        if d.min(initial=0) < 0 or d.sum() != len(d) - 1:
            raise ValueError("child counts must be nonnegative and sum to n-1")
        self.degrees = d
        self.degrees.setflags(write=False)
        self._csum = None
        self._parents = None
        self._depths = None
        self._gen_sizes = None
        self._lex_order = None
        self._subtree_heights = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_bfs_degrees(cls, degrees) -> "PlaneTree":
        return cls(degrees)

    @classmethod
    def from_lex_degrees(cls, degrees) -> "PlaneTree":
        """Build from child counts listed in depth-first (lexicographic) order."""
        d = np.asarray(degrees, dtype=np.int64)
        n = len(d)
        if n == 1:
            return cls(d)
        # Recover the children lists with an explicit stack, then renumber BFS.
        children: list[list[int]] = [[] for _ in range(n)]
        stack = [(0, int(d[0]))]
        for v in range(1, n):
            while stack and stack[-1][1] == 0:
                stack.pop()
            if not stack:
                raise ValueError("degree sequence is not a preorder code")
            parent, remaining = stack[-1]
            children[parent].append(v)
            stack[-1] = (parent, remaining - 1)
            stack.append((v, int(d[v])))
        order = np.empty(n, dtype=np.int64)
        order[0] = 0
        pos = 1
        head = 0
        while head < pos:
            for c in children[order[head]]:
                order[pos] = c
                pos += 1
            head += 1
        return cls(d[order])

    # -- derived arrays ----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.degrees)

    def _cumdeg(self) -> np.ndarray:
        """csum[i] = total children of vertices 0..i-1."""
        if self._csum is None:
            c = np.concatenate(([0], np.cumsum(self.degrees)))
            c.setflags(write=False)
            self._csum = c
        return self._csum

    def parents(self) -> np.ndarray:
        """BFS parent index per vertex; parent of the root is -1."""
        if self._parents is None:
            p = np.empty(self.n, dtype=np.int64)
            p[0] = -1
            if self.n > 1:
                p[1:] = np.repeat(np.arange(self.n), self.degrees)
            p.setflags(write=False)
            self._parents = p
        return self._parents

    def generation_sizes(self) -> np.ndarray:
        """Number of vertices in each generation, root generation first."""
        if self._gen_sizes is None:
            csum = self._cumdeg()
            sizes = []
            start, end = 0, 1
            while start < end:
                sizes.append(end - start)
                nxt = end + int(csum[end] - csum[start])
                start, end = end, nxt
            g = np.array(sizes, dtype=np.int64)
            g.setflags(write=False)
            self._gen_sizes = g
        return self._gen_sizes

    def depths(self) -> np.ndarray:
        if self._depths is None:
            g = self.generation_sizes()
            dep = np.repeat(np.arange(len(g), dtype=np.int64), g)
            dep.setflags(write=False)
            self._depths = dep
        return self._depths

    def children_slice(self, v: int) -> slice:
        """BFS index range of v's children (contiguous by construction)."""
        first = 1 + int(self._cumdeg()[v])
        return slice(first, first + int(self.degrees[v]))

    def subtree_heights(self) -> np.ndarray:
        """Height of the subtree rooted at every vertex."""
        if self._subtree_heights is None:
            hs = np.zeros(self.n, dtype=np.int64)
            g = self.generation_sizes()
            bounds = np.concatenate(([0], np.cumsum(g)))
            par = self.parents()
            # Deepest generation first; children are always one level down,
            # so their hs values are final when the parents are updated.
            for lvl in range(len(g) - 1, 0, -1):
                lo, hi = int(bounds[lvl]), int(bounds[lvl + 1])
                np.maximum.at(hs, par[lo:hi], hs[lo:hi] + 1)
            hs.setflags(write=False)
            self._subtree_heights = hs
        return self._subtree_heights

    def lex_order(self) -> np.ndarray:
        """BFS indices listed in lexicographic (preorder DFS) order."""
        if self._lex_order is None:
            n = self.n
            csum = self._cumdeg()
            order = np.empty(n, dtype=np.int64)
            stack = [0]
            pos = 0
            while stack:
                v = stack.pop()
                order[pos] = v
                pos += 1
                first = 1 + int(csum[v])
                # push children right to left so the leftmost pops first
                stack.extend(range(first + int(self.degrees[v]) - 1, first - 1, -1))
            order.setflags(write=False)
            self._lex_order = order
        return self._lex_order

    def root_path(self, v: int) -> list[int]:
        """Vertices from the root to v inclusive."""
        par = self.parents()
        path = [v]
        while path[-1] != 0:
            path.append(int(par[path[-1]]))
        return path[::-1]

    def child_rank(self, v: int) -> int:
        """1-based position of v among its parent's children; 0 for the root."""
        if v == 0:
            return 0
        parent = int(self.parents()[v])
        return v - self.children_slice(parent).start + 1

    # -- dunder ------------------------------------------------------------

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, PlaneTree) and np.array_equal(self.degrees, other.degrees)

    def __hash__(self) -> int:
        return hash(self.degrees.tobytes())

    def __repr__(self) -> str:
        if self.n <= 16:
            return f"PlaneTree(bfs_degrees={self.degrees.tolist()})"
        return f"PlaneTree(n={self.n})"


@dataclass(frozen=True)
class MaxDecomposition:
    """Split of a tree at its (lex-least) maximum-degree vertex.

    Absent forests are None; in height bounds they behave like height -1.
    """

    spine_depth: int
    subtree_heights: tuple[int, ...]
    left_forest_height: Optional[int]
    right_forest_height: Optional[int]
    vertex: int = field(default=0)

    def height_upper(self) -> int:
        """spine + 1 + tallest attached piece; equals 0 for a single vertex."""
        parts = list(self.subtree_heights)
        for f in (self.left_forest_height, self.right_forest_height):
            if f is not None:
                parts.append(f)
        if not parts:
            return 0
        return self.spine_depth + 1 + max(parts)


def height(t: PlaneTree) -> int:
    return len(t.generation_sizes()) - 1


def width_profile(t: PlaneTree) -> tuple[int, np.ndarray]:
    g = t.generation_sizes()
    return int(g.max()), g


def _lex_key(t: PlaneTree, v: int) -> tuple[int, ...]:
    # Child-rank word of the root path; lexicographic order of vertices
    # coincides with lexicographic order of these words.
    path = t.root_path(v)
    return tuple(t.child_rank(u) for u in path[1:])


def max_degree(t: PlaneTree) -> tuple[int, int]:
    """Return (max child count, BFS index of the lex-least attaining vertex)."""
    delta = int(t.degrees.max())
    cand = np.flatnonzero(t.degrees == delta)
    if len(cand) == 1:
        return delta, int(cand[0])
    best = min(cand, key=lambda v: _lex_key(t, int(v)))
    return delta, int(best)


def decompose_at_max(t: PlaneTree) -> MaxDecomposition:
    delta, v = max_degree(t)
    depths = t.depths()
    hs = t.subtree_heights()
    sub = tuple(int(h) for h in hs[t.children_slice(v)])

    left: list[int] = []
    right: list[int] = []
    path = t.root_path(v)
    for w, nxt in zip(path[:-1], path[1:]):
        sl = t.children_slice(w)
        left.extend(int(h) for h in hs[sl.start:nxt])
        right.extend(int(h) for h in hs[nxt + 1:sl.stop])
    return MaxDecomposition(
        spine_depth=int(depths[v]),
        subtree_heights=sub,
        left_forest_height=max(left) if left else None,
        right_forest_height=max(right) if right else None,
        vertex=v,
    )

"""Words with prescribed letter multiplicities <-> labeled trees with
prescribed degrees.

A degree sequence d = (d_1..d_n) sums to n - 1.  For compressed d (all
nonzero entries before all zeros, with m nonzero entries and n0 = n - m
leaves) the bijection pairs each word v in S_d, the set of sequences of
length n - 1 in which letter i appears exactly d_i times, with a labeled
rooted tree in T_d:

* scanning v left to right, a position j >= 2 is a repeat when v_j already
  occurred strictly earlier;
* the repeats cut v into n0 runs; the i-th run, followed by the leaf label
  m + i, is a path P_i, grafted onto the existing tree at its first vertex;
* the root is v_1.

Since |S_d| = (n-1)! / prod_i d_i!, uniform words give uniform trees, and
a leaf-relabeling couples general degree sequences to compressed ones
without changing heights.  Sampling a uniform word is a Fisher-Yates
shuffle of the multiset, so uniform trees with any degree sequence cost
O(n) per draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import OffspringDist
from .sample import sample_degrees

__all__ = ["DegreeSequence", "LabeledTree", "compress", "ff_decode",
           "ff_encode", "count_Sd", "sample_tree_with_degrees", "hat_Tn",
           "multiset_permutations"]


def _as_degree_tuple(d) -> tuple[int, ...]:
    out = tuple(int(x) for x in d)
    if any(x < 0 for x in out):
        raise ValueError("degrees must be nonnegative")
    if sum(out) != len(out) - 1:
        raise ValueError("degrees must sum to n - 1")
    return out


@dataclass(frozen=True)
class DegreeSequence:
    """Degree list summing to n - 1; vertex labels are 1..n."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", _as_degree_tuple(self.degrees))

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def is_compressed(self) -> bool:
        seen_zero = False
        for x in self.degrees:
            if x == 0:
                seen_zero = True
            elif seen_zero:
                return False
        return True

    @property
    def num_internal(self) -> int:
        return sum(1 for x in self.degrees if x > 0)


class LabeledTree:
    """Rooted tree on labels 1..n as (root, parent array); parent[root] = 0."""

    __slots__ = ("root", "parent")

    def __init__(self, root: int, parent: np.ndarray):
        self.root = int(root)
        self.parent = np.asarray(parent, dtype=np.int64)
        self.parent.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.parent) - 1  # index 0 unused

    def degrees(self) -> np.ndarray:
        out = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(1, self.n + 1):
            if v != self.root:
                out[self.parent[v]] += 1
        return out[1:]

    def depths(self) -> np.ndarray:
        n = self.n
        dep = np.full(n + 1, -1, dtype=np.int64)
        dep[self.root] = 0
        for v in range(1, n + 1):
            if dep[v] >= 0:
                continue
            chain = [v]
            while dep[chain[-1]] < 0:
                chain.append(int(self.parent[chain[-1]]))
            base = dep[chain[-1]]
            for back, u in enumerate(reversed(chain[:-1]), start=1):
                dep[u] = base + back
        return dep[1:]

    def height(self) -> int:
        return int(self.depths().max())

    def key(self) -> bytes:
        return self.root.to_bytes(4, "little") + self.parent.tobytes()

    def __eq__(self, other) -> bool:
        return (isinstance(other, LabeledTree) and self.root == other.root
                and np.array_equal(self.parent, other.parent))

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"LabeledTree(root={self.root}, parent={self.parent[1:].tolist()})"


def compress(d) -> tuple[DegreeSequence, np.ndarray]:
    """Compressed sequence plus the relabeling old -> new.

    relabel[i-1] is the new label of old vertex i: internal vertices keep
    their relative order and move to 1..m, leaves to m+1..n.
    """
    ds = d if isinstance(d, DegreeSequence) else DegreeSequence(tuple(d))
    n = ds.n
    relabel = np.empty(n, dtype=np.int64)
    nz = [x for x in ds.degrees if x > 0]
    nxt_int, nxt_leaf = 1, len(nz) + 1
    for i, x in enumerate(ds.degrees):
        if x > 0:
            relabel[i] = nxt_int
            nxt_int += 1
        else:
            relabel[i] = nxt_leaf
            nxt_leaf += 1
    comp = DegreeSequence(tuple(nz) + (0,) * (n - len(nz)))
    return comp, relabel


def ff_decode(v, d) -> LabeledTree:
    """Tree for the word v in S_d; d must be compressed."""
    ds = d if isinstance(d, DegreeSequence) else DegreeSequence(tuple(d))
    if not ds.is_compressed:
        raise ValueError("degree sequence must be compressed")
    n = ds.n
    m = ds.num_internal
    word = [int(x) for x in v]
    if n == 1:
        if word:
            raise ValueError("word of a single-vertex tree is empty")
        return LabeledTree(1, np.zeros(2, dtype=np.int64))
    counts = np.zeros(n + 1, dtype=np.int64)
    for x in word:
        if not 1 <= x <= n:
            raise ValueError(f"letter {x} outside 1..{n}")
        counts[x] += 1
    if list(counts[1:]) != list(ds.degrees):
        raise ValueError("word multiplicities do not match the degrees")

    parent = np.zeros(n + 1, dtype=np.int64)
    seen = np.zeros(n + 1, dtype=bool)
    seen[word[0]] = True
    leaf = m  # next leaf label is m + i for run i
    prev = word[0]
    for j in range(1, n - 1):
        x = word[j]
        if seen[x]:
            # repeat: close the current run with a fresh leaf
            leaf += 1
            parent[leaf] = prev
            seen[leaf] = True
            prev = x
        else:
            parent[x] = prev
            seen[x] = True
            prev = x
    leaf += 1
    parent[leaf] = prev
    return LabeledTree(word[0], parent)


def ff_encode(t: LabeledTree) -> np.ndarray:
    """Inverse map; the tree's degree sequence must be compressed."""
    n = t.n
    degs = t.degrees()
    ds = DegreeSequence(tuple(int(x) for x in degs))
    if not ds.is_compressed:
        raise ValueError("tree degrees are not compressed")
    if n == 1:
        return np.empty(0, dtype=np.int64)
    m = ds.num_internal
    visited = np.zeros(n + 1, dtype=bool)
    visited[t.root] = True
    out: list[int] = []
    for leaf in range(m + 1, n + 1):
        path = [leaf]
        while not visited[path[-1]]:
            path.append(int(t.parent[path[-1]]))
        path.reverse()  # from the visited vertex down to the leaf
        for u in path[:-1]:
            visited[u] = True
            out.append(u)
        visited[leaf] = True
    return np.array(out, dtype=np.int64)


def count_Sd(d) -> int:
    """|S_d| = (n-1)! / prod_i d_i!, exactly."""
    ds = d if isinstance(d, DegreeSequence) else DegreeSequence(tuple(d))
    num = math.factorial(ds.n - 1)
    for x in ds.degrees:
        num //= math.factorial(x)
    return num


def multiset_permutations(items):
    """Distinct permutations of a multiset, lexicographic order."""
    items = sorted(items)

    def rec(pool):
        if not pool:
            yield ()
            return
        last = None
        for i, x in enumerate(pool):
            if x == last:
                continue
            last = x
            for rest in rec(pool[:i] + pool[i + 1:]):
                yield (x,) + rest

    yield from rec(items)


def sample_tree_with_degrees(d, rng: np.random.Generator) -> LabeledTree:
    """Uniform tree whose vertex i has degree d_i, via a shuffled word."""
    ds = d if isinstance(d, DegreeSequence) else DegreeSequence(tuple(d))
    comp, relabel = compress(ds)
    pool = np.repeat(np.arange(1, comp.n + 1), comp.degrees)
    word = rng.permutation(pool)
    t = ff_decode(word, comp)
    if comp.degrees == ds.degrees:
        return t
    # undo the compression relabeling
    inv = np.zeros(ds.n + 1, dtype=np.int64)
    inv[relabel] = np.arange(1, ds.n + 1)
    parent = np.zeros(ds.n + 1, dtype=np.int64)
    for new in range(1, ds.n + 1):
        old = inv[new]
        pnew = t.parent[new]
        parent[old] = inv[pnew] if pnew else 0
    return LabeledTree(int(inv[t.root]), parent)


def hat_Tn(d: OffspringDist, n: int, rng: np.random.Generator,
           max_tries: int = 10 ** 7) -> LabeledTree:
    """Uniformly labeled conditioned tree: exact degree multiset, uniform
    assignment to labels, uniform tree with those degrees.

    Its height has the size-n conditioned law.
    """
    multiset = sample_degrees(d, n, rng, max_tries)
    degs = rng.permutation(multiset)
    return sample_tree_with_degrees(DegreeSequence(tuple(int(x) for x in degs)), rng)

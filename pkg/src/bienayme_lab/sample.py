"""Samplers for Bienayme trees, size-conditioned variants, and an exact oracle.

Three sampling routes:

* the unconditioned tree, by running the increment walk until it first hits
  -1 and decoding the stopped path as a depth-first exploration;
* the exact size-n law, by rejection on n-step walks conditioned to end at
  -1, Vervaat-rotating the accepted bridge and decoding breadth-first
  (acceptance decays like 1/(n * typical endpoint spread), so this route is
  for small and medium n);
* the one-shot approximation, which always uses exactly one walk of length
  n-1, bridges it with a final step to -1 and Vervaat-rotates.  Its law is
  close in total variation to the exact one for heavy-tailed critical
  offspring laws, which is what makes million-vertex studies affordable.

The enumeration oracle lists every plane tree of a small size with its
exact conditional probability, in rational arithmetic whenever the law is
rational-valued.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .dist import OffspringDist, feasible_size
from .paths import LatticePath, vervaat
from .tree import PlaneTree

__all__ = ["SampleOutcome", "CapExceededError", "MaxTriesError", "sample_T",
           "sample_Tn_exact", "sample_Tn_prime", "sample_degrees",
           "sample_bridges_exact", "enumerate_conditional"]


class CapExceededError(RuntimeError):
    """The unconditioned walk outlived the size cap."""


class MaxTriesError(RuntimeError):
    """Rejection budget exhausted; carries the observed acceptance rate."""

    def __init__(self, tries: int, hits: int):
        self.tries = tries
        self.hits = hits
        rate = hits / tries if tries else 0.0
        super().__init__(
            f"no accepted walk in {tries} tries "
            f"(acceptance rate estimate {rate:.3g}, observed {hits} hits)")


@dataclass(frozen=True)
class SampleOutcome:
    tree: PlaneTree
    tries: int
    sampler_tag: str
    seed: Optional[object] = None
    sentinel: bool = False


def _require_conditionable(d: OffspringDist) -> None:
    if d.is_degenerate_linear:
        raise ValueError("all offspring mass on {0,1}: conditioned laws are "
                         "deterministic paths; refusing to sample")


def sample_T(d: OffspringDist, rng: np.random.Generator, cap: int = 10 ** 7) -> PlaneTree:
    """One unconditioned tree; raises CapExceededError if it grows past cap."""
    if d.pmf(0) <= 0:
        raise ValueError("mu_0 = 0 gives infinite trees almost surely")
    if d.mean > 1.0 + 1e-9:
        raise ValueError("supercritical law: extinction is not certain")
    chunk = 4096
    degs: list[np.ndarray] = []
    level = 0
    drawn = 0
    while drawn < cap:
        y = d.sample(rng, chunk)
        s = level + np.cumsum(y.astype(np.int64) - 1)
        hit = np.flatnonzero(s == -1)
        if len(hit):
            stop = int(hit[0])
            if drawn + stop + 1 > cap:
                break
            degs.append(y[:stop + 1])
            lex = np.concatenate(degs)
            return PlaneTree.from_lex_degrees(lex)
        degs.append(y)
        level = int(s[-1])
        drawn += chunk
    raise CapExceededError(f"walk exceeded {cap} steps without closing")


def _rotate_rows(inc: np.ndarray) -> np.ndarray:
    """Vervaat rotation of each bridge row of increments, vectorized."""
    rows, n = inc.shape
    s = np.concatenate([np.zeros((rows, 1), dtype=np.int64), np.cumsum(inc, axis=1)], axis=1)
    m = np.argmin(s, axis=1)  # first minimum per row
    cols = (m[:, None] + np.arange(n)[None, :]) % n
    return np.take_along_axis(inc, cols, axis=1)


def sample_bridges_exact(d: OffspringDist, n: int, rng: np.random.Generator,
                         count: int, max_tries: int = 10 ** 9):
    """Excursion increments of `count` exact size-n draws, plus tries used.

    Returns (excursions, tries): excursions has shape (count, n) and each
    row is the increment sequence of the BFS exploration of an exact draw.
    """
    _require_conditionable(d)
    if not feasible_size(d, n):
        raise ValueError(f"size {n} is infeasible for this offspring law")
    batch = max(1, min((1 << 18) // max(n, 1), 1 << 14))
    out = np.empty((count, n), dtype=np.int64)
    got = 0
    tries = 0
    while got < count:
        if tries >= max_tries:
            raise MaxTriesError(tries, got)
        y = d.sample(rng, batch * n).astype(np.int64).reshape(batch, n)
        inc = y - 1
        hits = np.flatnonzero(inc.sum(axis=1) == -1)
        tries += batch
        if len(hits) == 0:
            continue
        take = hits[: count - got]
        out[got: got + len(take)] = _rotate_rows(inc[take])
        got += len(take)
        if got >= count:
            # tries that produced the kept draws, not the surplus
            tries -= int(batch - int(take[-1]) - 1)
    return out, tries


def sample_Tn_exact(d: OffspringDist, n: int, rng: np.random.Generator,
                    max_tries: int = 10 ** 7,
                    seed: Optional[object] = None) -> SampleOutcome:
    """Exact conditioned draw by rejection; the result law is that of the
    size-n conditioned tree."""
    exc, tries = sample_bridges_exact(d, n, rng, 1, max_tries)
    tree = PlaneTree.from_bfs_degrees(exc[0] + 1)
    return SampleOutcome(tree, tries, "exact", seed)


def sample_Tn_prime(d: OffspringDist, n: int, rng: np.random.Generator,
                    seed: Optional[object] = None) -> SampleOutcome:
    """One-walk approximate draw; O(n), no rejection.

    When the length-(n-1) walk ends above 0 (vanishing probability in the
    heavy-tail regime) the fallback is the all-zero bridge, which decodes
    to the path tree; the outcome is flagged sentinel.
    """
    _require_conditionable(d)
    if not d.is_critical:
        raise ValueError("approximate sampler requires a critical law")
    if d.tail_model is None:
        warnings.warn("offspring law has no heavy-tail model; the one-walk "
                      "sampler's total-variation guarantee does not apply",
                      stacklevel=2)
    if n == 1:
        return SampleOutcome(PlaneTree.from_bfs_degrees([0]), 1, "tprime", seed)
    y = d.sample(rng, n - 1).astype(np.int64)
    inc = y - 1
    end = int(inc.sum())
    if end > 0:
        deg = np.ones(n, dtype=np.int64)
        deg[-1] = 0
        return SampleOutcome(PlaneTree.from_bfs_degrees(deg), 1, "tprime", seed,
                             sentinel=True)
    bridge_inc = np.append(inc, -1 - end)
    rotated = _rotate_rows(bridge_inc[None, :])[0]
    return SampleOutcome(PlaneTree.from_bfs_degrees(rotated + 1), 1, "tprime", seed)


def sample_degrees(d: OffspringDist, n: int, rng: np.random.Generator,
                   max_tries: int = 10 ** 7) -> np.ndarray:
    """Degree multiset of one exact conditioned draw, ascending."""
    exc, _ = sample_bridges_exact(d, n, rng, 1, max_tries)
    return np.sort(exc[0] + 1)


# ---------------------------------------------------------------------------
# exact enumeration oracle
# ---------------------------------------------------------------------------

def _excursion_degree_seqs(n: int):
    """All BFS degree sequences of plane trees on n vertices."""
    seq = [0] * n

    def rec(i: int, walk: int, used: int):
        # walk = exploration value after i vertices; needs walk >= 1 until
        # the last vertex, where it must drop to 0 (path value -1 shift).
        if i == n - 1:
            if n - 1 - used == 0 and walk == 1:
                seq[i] = 0
                yield tuple(seq)
            return
        remaining = n - 1 - used
        for dk in range(remaining + 1):
            w = walk + dk - 1
            if w < 1:
                continue
            seq[i] = dk
            yield from rec(i + 1, w, used + dk)

    yield from rec(0, 1, 0)


def enumerate_conditional(d: OffspringDist, n: int):
    """Every plane tree of size n with its exact conditional probability.

    Uses Fractions when the law is rational-valued (then probabilities are
    exact); float weights otherwise.  Catalan growth caps n at 12.
    """
    if n > 12:
        raise ValueError("enumeration is capped at n = 12")
    exact = d.pmf_fraction(0) is not None
    items = []
    total = Fraction(0) if exact else 0.0
    for deg in _excursion_degree_seqs(n):
        if exact:
            w = Fraction(1)
            for k in deg:
                w *= d.pmf_fraction(k)
        else:
            w = float(np.prod(d.pmf(np.array(deg))))
        if w > 0:
            items.append((PlaneTree.from_bfs_degrees(np.array(deg)), w))
            total += w
    if total == 0:
        raise ValueError(f"no feasible tree of size {n}")
    return [(t, w / total) for t, w in items]

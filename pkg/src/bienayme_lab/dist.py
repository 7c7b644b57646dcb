"""Offspring distributions with exact heads and parametric heavy tails.

A law mu on the nonnegative integers is stored as an exact head table
mu_0..mu_H plus an optional parametric tail model for n > H.  Three
power-log tail families are supported, all of the local-Cauchy shape
mu_n = c * L(n) / n^2 with L slowly varying:

  A:  L(n) = beta * ln(n)^(-1-beta),                       beta > 0
  B:  L(n) = (ln_k n)^(-2) * prod_{i<k} (ln_i n)^(-1),     k >= 2
  C:  L(n) = ((1-beta)/beta) * ln(n)^(-beta) * e^(-ln(n)^beta),  0 < beta < 1

where ln_i is the i-times iterated logarithm.  The scale c defaults to the
largest value compatible with a critical law; the head masses mu_0, mu_1
are then solved from the two linear constraints (total mass 1, mean 1).

Tail sums are evaluated by direct pairwise summation over a bounded window
together with an Euler-Maclaurin closure

    sum_{n>=a} f(n) = int_a^inf f(x) dx + f(a)/2 - f'(a)/12 + O(f'''(a))

applied at or beyond SUM_BOUNDARY, where the correction beyond f'/12 is
below 1e-18 relative for every supported family.  The integrals of L(x)/x
have closed forms per family; integrals of L(x)/x^2 use adaptive
quadrature.

The increment law X = Y - 1 drives every walk in the package.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import integrate, special

__all__ = ["OffspringDist", "IncrementLaw", "DistError", "load_spec",
           "pmf", "tail", "tail_moment", "sample_Y", "span", "feasible_size"]

# Beyond this index the Euler-Maclaurin closure is accurate to ~1e-18
# relative for all supported families; below it we sum terms directly.
SUM_BOUNDARY = 32768

ALIAS_CAP = 1 << 20

MASS_TOL = 1e-12
CRIT_TOL = 1e-9


class DistError(ValueError):
    """Malformed spec, infeasible normalization, or unsupported operation."""


# ---------------------------------------------------------------------------
# slowly varying tail factors
# ---------------------------------------------------------------------------

def _iterlog(x, k: int):
    for _ in range(k):
        x = np.log(x)
    return x


class PowerLogTail:
    """The factor L and its calculus for one family; excludes the scale c."""

    def __init__(self, family: str, beta: float = 1.0, k: int = 2, cutoff: int = 2):
        self.family = family
        self.beta = float(beta)
        self.k = int(k)
        self.cutoff = int(cutoff)
        if cutoff < 2:
            raise DistError("tail cutoff must be at least 2")
        if family == "A":
            if self.beta <= 0:
                raise DistError("family A needs beta > 0")
        elif family == "B":
            if self.k < 2:
                raise DistError("family B needs k >= 2")
        elif family == "C":
            if not 0 < self.beta < 1:
                raise DistError("family C needs beta in (0, 1)")
        else:
            raise DistError(f"unknown tail family {family!r}")
        probe = self.L(np.array([float(cutoff)]))[0]
        if not np.isfinite(probe) or probe <= 0:
            raise DistError(f"family {family} undefined at cutoff {cutoff}")

    # L and d(log L)/dx, vectorized over float arrays
    def L(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "A":
            return self.beta * np.log(x) ** (-1.0 - self.beta)
        if self.family == "B":
            out = 1.0 / _iterlog(x, self.k) ** 2
            for i in range(1, self.k):
                out = out / _iterlog(x, i)
            return out
        b = self.beta
        lx = np.log(x)
        return (1.0 - b) / b * lx ** (-b) * np.exp(-(lx ** b))

    def dlogL(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "A":
            return -(1.0 + self.beta) / (x * np.log(x))
        if self.family == "B":
            # d/dx ln_i(x) = 1 / (x * prod_{j<i} ln_j(x))
            out = np.zeros_like(x)
            prod = x.copy()
            for i in range(1, self.k + 1):
                li = _iterlog(x, i)
                w = 2.0 if i == self.k else 1.0
                out -= w / (li * prod)
                prod = prod * li
            return out
        b = self.beta
        lx = np.log(x)
        return -b / (x * lx) - b * lx ** (b - 1.0) / x

    def int_L_over_x(self, a):
        """Closed form of int_a^inf L(x)/x dx."""
        a = np.asarray(a, dtype=float)
        if self.family == "A":
            return np.log(a) ** (-self.beta)
        if self.family == "B":
            return 1.0 / _iterlog(a, self.k)
        b = self.beta
        s = (1.0 - b) / b
        return s / b * special.gamma(s) * special.gammaincc(s, np.log(a) ** b)

    def int_L_over_x2(self, a: float) -> float:
        """int_a^inf L(x)/x^2 dx by quadrature (no closed form)."""
        val, _ = integrate.quad(lambda t: float(self.L(1.0 / t)), 0.0, 1.0 / a,
                                epsabs=0.0, epsrel=1e-13, limit=200)
        return val

    # -- Euler-Maclaurin tail sums (exclude the scale c) --------------------

    def _f(self, x, p):
        return self.L(x) / x ** p

    def _fprime(self, x, p):
        return self._f(x, p) * (self.dlogL(x) - p / x)

    def _em(self, a, p):
        intpart = self.int_L_over_x(a) if p == 1 else self.int_L_over_x2(float(a))
        return intpart + self._f(a, p) / 2.0 - self._fprime(a, p) / 12.0

    def partial_sum(self, a: int, p: int) -> float:
        """sum_{n>=a} L(n)/n^p for integer a >= cutoff."""
        a = int(a)
        if a >= SUM_BOUNDARY:
            return float(self._em(float(a), p))
        ns = np.arange(a, SUM_BOUNDARY, dtype=float)
        return float(np.sum(self._f(ns, p))) + float(self._em(float(SUM_BOUNDARY), p))

    def moment_suffix_array(self, kmax: int) -> np.ndarray:
        """out[j] = sum_{n>=j} L(n)/n for cutoff <= j <= kmax (0 below cutoff)."""
        kmax = int(kmax)
        out = np.zeros(kmax + 1)
        top = min(kmax, SUM_BOUNDARY - 1)
        if top >= self.cutoff:
            # suffix sums over the whole direct window, then slice
            ns = np.arange(self.cutoff, SUM_BOUNDARY, dtype=float)
            terms = self._f(ns, 1)
            base = np.longdouble(self._em(float(SUM_BOUNDARY), 1))
            suffix = np.cumsum(terms[::-1].astype(np.longdouble))[::-1] + base
            out[self.cutoff:top + 1] = suffix[:top + 1 - self.cutoff].astype(float)
        if kmax >= SUM_BOUNDARY:
            ks = np.arange(SUM_BOUNDARY, kmax + 1, dtype=float)
            out[SUM_BOUNDARY:] = (self.int_L_over_x(ks) + self._f(ks, 1) / 2.0
                                  - self._fprime(ks, 1) / 12.0)
        return out

    def em_mass_cont(self, x) -> np.ndarray:
        """Continuous stand-in for sum_{n>=x} L(n)/n^2, valid for x >= SUM_BOUNDARY."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 0
        xs = np.atleast_1d(x)
        vals = np.array([self._em(float(v), 2) for v in xs])
        return float(vals[0]) if single else vals

    def em_moment_cont(self, x):
        """Continuous stand-in for sum_{n>=x} L(n)/n, valid for x >= SUM_BOUNDARY."""
        x = np.asarray(x, dtype=float)
        return self.int_L_over_x(x) + self._f(x, 1) / 2.0 - self._fprime(x, 1) / 12.0


# ---------------------------------------------------------------------------
# the distribution object
# ---------------------------------------------------------------------------

class OffspringDist:
    """Immutable offspring law; all methods are pure and thread-safe.

    Sampling takes an explicit numpy Generator so concurrent tasks can hold
    independent streams; the only mutable state is lazily built caches,
    each assigned atomically after construction.
    """

    def __init__(self, kind: str, head: np.ndarray,
                 tail_model: Optional[PowerLogTail] = None, c: float = 0.0,
                 spec: Optional[dict] = None):
        self.kind = kind
        self.head = np.asarray(head, dtype=float)
        self.head.setflags(write=False)
        self.tail_model = tail_model
        self.c = float(c)
        self.spec = dict(spec or {})
        self._alias = None
        self._sparse = None
        self._tail_cache: dict[int, np.ndarray] = {}
        self._validate()

    # -- construction helpers ----------------------------------------------

    def _validate(self) -> None:
        if np.any(self.head < -1e-15):
            raise DistError("negative probability in head")
        if self.kind == "geometric":
            self.head_mass = 0.0
            self.head_moment = 0.0
            self.mean = 1.0
            self.total_mass = 1.0
            return
        self.head_mass = float(self.head.sum())
        ks = np.arange(len(self.head), dtype=float)
        self.head_moment = float(np.dot(ks, self.head))
        if self.tail_model is not None:
            t = self.tail_model
            self.tail_mass_total = self.c * t.partial_sum(t.cutoff, 2)
            self.tail_moment_total = self.c * t.partial_sum(t.cutoff, 1)
        else:
            self.tail_mass_total = 0.0
            self.tail_moment_total = 0.0
        self.total_mass = self.head_mass + self.tail_mass_total
        self.mean = self.head_moment + self.tail_moment_total
        if abs(self.total_mass - 1.0) > MASS_TOL:
            raise DistError(f"mass {self.total_mass!r} does not normalize to 1")

    @property
    def H(self) -> int:
        return len(self.head) - 1

    @property
    def is_critical(self) -> bool:
        return abs(self.mean - 1.0) <= CRIT_TOL

    @property
    def mu0(self) -> float:
        return float(self.head[0]) if len(self.head) else self.pmf(0)

    @property
    def is_degenerate_linear(self) -> bool:
        """True when all mass sits on degrees {0, 1}: conditioned trees are paths."""
        if self.kind == "geometric":
            return False
        m01 = float(self.head[:2].sum()) if len(self.head) else 0.0
        return abs(m01 - 1.0) <= 1e-12

    # -- point masses --------------------------------------------------------

    def pmf(self, k):
        """mu_k, vectorized over integer arrays."""
        karr = np.asarray(k)
        scalar = karr.ndim == 0
        ks = np.atleast_1d(karr).astype(np.int64)
        out = np.zeros(len(ks))
        if self.kind == "geometric":
            out = np.where(ks >= 0, 0.5 ** (ks + 1.0), 0.0)
        else:
            inhead = (ks >= 0) & (ks <= self.H)
            out[inhead] = self.head[ks[inhead]]
            if self.tail_model is not None:
                t = self.tail_model
                intail = ks >= max(t.cutoff, self.H + 1)
                xs = ks[intail].astype(float)
                out[intail] = self.c * t.L(xs) / xs ** 2
        return float(out[0]) if scalar else out

    def pmf_fraction(self, k: int) -> Optional[Fraction]:
        """Exact rational mass; None when only float evaluation exists."""
        if self.kind == "geometric":
            return Fraction(1, 2 ** (k + 1))
        if self.tail_model is None:
            if 0 <= k <= self.H:
                return Fraction(float(self.head[k]))
            return Fraction(0)
        return None

    def tail(self, u) -> float:
        """P(Y >= u); decreasing in u, equals 1 at u = 0."""
        uarr = np.asarray(u)
        scalar = uarr.ndim == 0
        us = np.atleast_1d(uarr).astype(np.int64)
        if self.kind == "geometric":
            out = 0.5 ** us.astype(float)
            out[us <= 0] = 1.0
            return float(out[0]) if scalar else out
        out = np.empty(len(us))
        for i, uu in enumerate(us):
            out[i] = self._tail_scalar(int(uu))
        return float(out[0]) if scalar else out

    def _head_suffix(self, u: int) -> float:
        if u <= 0:
            return self.head_mass
        if u > self.H:
            return 0.0
        return float(self.head[u:].sum())

    def _head_suffix_moment(self, u: int) -> float:
        if u > self.H:
            return 0.0
        ks = np.arange(max(u, 0), self.H + 1, dtype=float)
        return float(np.dot(ks, self.head[max(u, 0):]))

    def _tail_scalar(self, u: int) -> float:
        out = self._head_suffix(u)
        if self.tail_model is not None:
            t = self.tail_model
            out += self.c * t.partial_sum(max(u, t.cutoff), 2)
        return out

    def tail_moment(self, x) -> float:
        """E[Y 1{Y >= x}]; equals the mean at x <= 0."""
        xarr = np.asarray(x)
        scalar = xarr.ndim == 0
        xs = np.atleast_1d(xarr).astype(np.int64)
        out = np.empty(len(xs))
        for i, xx in enumerate(xs):
            xx = int(xx)
            if self.kind == "geometric":
                out[i] = (xx + 1.0) * 0.5 ** xx if xx > 0 else 1.0
                continue
            acc = self._head_suffix_moment(xx)
            if self.tail_model is not None:
                t = self.tail_model
                acc += self.c * t.partial_sum(max(xx, t.cutoff), 1)
            out[i] = acc
        return float(out[0]) if scalar else out

    # -- bulk arrays ---------------------------------------------------------

    def pmf_array(self, kmax: int) -> np.ndarray:
        return self.pmf(np.arange(kmax + 1))

    def tail_array(self, kmax: int) -> np.ndarray:
        """P(Y >= k) for k = 0..kmax, one reverse pass."""
        kmax = int(kmax)
        hit = self._tail_cache.get(-1)
        if hit is not None and len(hit) > kmax:
            return hit[:kmax + 1]
        p = self.pmf_array(kmax + 1)
        rest = self._tail_scalar(kmax + 2)
        rev = np.cumsum(p[::-1].astype(np.longdouble))[::-1]
        out = (rev + np.longdouble(rest)).astype(float)[:kmax + 1]
        out[0] = 1.0
        out.setflags(write=False)
        self._tail_cache[-1] = out
        return out

    def ellstar_array(self, kmax: int) -> np.ndarray:
        """E[Y 1{Y >= k}] for k = 0..kmax, vectorized.

        Exact suffix sums below SUM_BOUNDARY, Euler-Maclaurin closure above;
        this is the integrand table for the scaling integrals.
        """
        kmax = int(kmax)
        if self.kind == "geometric":
            ks = np.arange(kmax + 1, dtype=float)
            out = (ks + 1.0) * 0.5 ** ks
            out[0] = 1.0
            return out
        out = np.zeros(kmax + 1)
        top = min(kmax, self.H)
        if top >= 0:
            ks = np.arange(top + 1)
            headmoms = np.cumsum((ks * self.head[:top + 1])[::-1].astype(np.longdouble))[::-1]
            rest = self._head_suffix_moment(top + 1)
            out[:top + 1] = (headmoms + np.longdouble(rest)).astype(float)
        if self.tail_model is not None:
            t = self.tail_model
            out[:t.cutoff + 1] += self.c * t.partial_sum(t.cutoff, 1)
            if kmax > t.cutoff:
                suff = t.moment_suffix_array(kmax)
                out[t.cutoff + 1:] += self.c * suff[t.cutoff + 1:]
        return out

    def tail_cont(self, x: float) -> float:
        """Smooth continuation of tail(u) for real u >= SUM_BOUNDARY (grid use)."""
        if self.kind == "geometric":
            return float(0.5 ** x)
        if self.tail_model is None:
            return 0.0
        return self.c * float(self.tail_model.em_mass_cont(x))

    def ellstar_cont(self, x) -> np.ndarray:
        """Smooth continuation of tail_moment for real x >= SUM_BOUNDARY."""
        if self.kind == "geometric":
            x = np.asarray(x, dtype=float)
            return (x + 1.0) * 0.5 ** x
        if self.tail_model is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.c * self.tail_model.em_moment_cont(x)

    # -- sampling -------------------------------------------------------------

    def _build_alias(self):
        if self.kind == "geometric":
            return None
        if self.tail_model is None:
            probs = self.head.copy()
            escape = -1
        else:
            cap = ALIAS_CAP
            probs = self.pmf_array(cap)
            escape = cap + 1
            probs = np.append(probs, self._tail_scalar(cap + 1))
        probs = probs / probs.sum()
        K = len(probs)
        accept = probs * K
        alias = np.arange(K, dtype=np.int64)
        small = [i for i in range(K) if accept[i] < 1.0]
        large = [i for i in range(K) if accept[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            alias[s] = g
            accept[g] = (accept[g] + accept[s]) - 1.0
            (small if accept[g] < 1.0 else large).append(g)
        return accept, alias, escape

    def _sample_escape(self, rng, count: int) -> np.ndarray:
        # inverse CDF on the smooth tail continuation, then integer clamp
        t = self.tail_model
        lo_mass = self.c * t.partial_sum(ALIAS_CAP + 1, 2)
        targets = rng.random(count) * lo_mass
        out = np.empty(count, dtype=np.int64)
        for i, tg in enumerate(targets):
            lo = ALIAS_CAP + 1
            hi = lo * 2
            while self.tail_cont(hi) > tg:
                hi *= 2
                if hi > 1 << 62:
                    break
            # invariant: tail_cont(lo) > tg >= tail_cont(hi)
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if self.tail_cont(mid) > tg:
                    lo = mid
                else:
                    hi = mid
            out[i] = lo
        return out

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """Draw from mu; head by alias table (inverse CDF for sparse heads),
        tail by inverse CDF on the parametric model."""
        n = 1 if size is None else int(size)
        if self.kind == "geometric":
            u = rng.random(n)
            out = np.floor(-np.log2(1.0 - u)).astype(np.int64)
        elif self.tail_model is None and np.count_nonzero(self.head) <= 64:
            # few atoms: branchless inverse CDF beats a huge alias table
            if self._sparse is None:
                idx = np.flatnonzero(self.head)
                self._sparse = (idx.astype(np.int64),
                                np.cumsum(self.head[idx]))
            vals, cum = self._sparse
            pos = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
            out = vals[np.minimum(pos, len(vals) - 1)]
        else:
            if self._alias is None:
                self._alias = self._build_alias()
            accept, alias, escape = self._alias
            u = rng.random(n) * len(accept)
            idx = u.astype(np.int64)
            frac = u - idx
            out = np.where(frac < accept[idx], idx, alias[idx])
            if escape >= 0:
                esc = out == escape
                cnt = int(esc.sum())
                if cnt:
                    out[esc] = self._sample_escape(rng, cnt)
        return out if size is not None else int(out[0])

    def __repr__(self) -> str:
        return f"OffspringDist(kind={self.kind!r}, H={self.H}, mean={self.mean:.12g})"


@dataclass(frozen=True)
class IncrementLaw:
    """The walk step X = Y - 1; support starts at -1."""

    dist: OffspringDist

    def pmf(self, i):
        return self.dist.pmf(np.asarray(i) + 1)

    @property
    def mean(self) -> float:
        return self.dist.mean - 1.0


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _solve_cauchy_head(kind: str, doc: dict) -> OffspringDist:
    family = kind[-1]
    cutoff = int(doc.get("cutoff", 2))
    model = PowerLogTail(family, beta=float(doc.get("beta", 1.0)),
                         k=int(doc.get("k", 2)), cutoff=cutoff)
    s1 = model.partial_sum(cutoff, 1)
    s0 = model.partial_sum(cutoff, 2)
    c_max = 1.0 / s1
    c = float(doc["c"]) if "c" in doc else c_max
    if c <= 0:
        raise DistError("tail scale c must be positive")
    if c > c_max * (1 + 1e-12):
        raise DistError(f"tail scale c={c} infeasible; criticality needs c <= {c_max!r}")
    # mass 1 and mean 1:  mu_1 = 1 - c*S1,  mu_0 = c*(S1 - S0)
    mu1 = 1.0 - c * s1
    mu0 = c * (s1 - s0)
    if mu1 < -1e-15 or mu0 < -1e-15:
        raise DistError("head solve produced negative mass")
    head = np.zeros(cutoff)
    # float residual parked on mu_0: restores mass exactly, mean untouched
    head[0] = mu0 + (1.0 - (mu0 + mu1 + c * s0))
    head[1] = mu1
    return OffspringDist(kind, head, model, c, spec=doc)


def load_spec(doc) -> OffspringDist:
    """Build a distribution from its JSON document (dict, JSON text, or path).

    Critical-mode laws come out with mean 1 up to float arithmetic; the
    residual mass adjustment lands on mu_1 via the linear solve.
    """
    if isinstance(doc, (str, bytes)):
        text = doc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise DistError(f"not valid JSON: {e}") from e
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DistError("distribution spec must be an object with a 'kind'")
    kind = doc["kind"]
    if kind == "geometric":
        return OffspringDist("geometric", np.empty(0), spec=doc)
    if kind == "tabulated":
        probs = doc.get("probs")
        if not isinstance(probs, list) or not probs:
            raise DistError("tabulated spec needs a nonempty 'probs' list")
        head = np.asarray(probs, dtype=float)
        if head.min() < 0:
            raise DistError("negative probability")
        if abs(head.sum() - 1.0) > MASS_TOL:
            raise DistError("tabulated probabilities must sum to 1")
        return OffspringDist("tabulated", head, spec=doc)
    if kind in ("cauchy_A", "cauchy_B", "cauchy_C"):
        return _solve_cauchy_head(kind, doc)
    if kind == "constructed":
        levels = doc.get("levels")
        mu1 = doc.get("mu1")
        if not isinstance(levels, list) or mu1 is None:
            raise DistError("constructed spec needs 'levels' and 'mu1'")
        tops = [int(n) for n, _ in levels]
        head = np.zeros(max(tops) + 1)
        for n_k, p_k in levels:
            if p_k < 0:
                raise DistError("negative probability")
            if int(n_k) != 1:
                head[int(n_k)] += float(p_k)
        head[1] = float(mu1)
        d = OffspringDist("constructed", head, spec=doc)
        if not d.is_critical:
            raise DistError(f"constructed law has mean {d.mean!r}, not critical")
        return d
    raise DistError(f"unknown distribution kind {kind!r}")


# -- functional aliases mirroring the operation names -----------------------

def pmf(d: OffspringDist, k):
    return d.pmf(k)


def tail(d: OffspringDist, u):
    return d.tail(u)


def tail_moment(d: OffspringDist, x):
    return d.tail_moment(x)


def sample_Y(d: OffspringDist, rng: np.random.Generator, size: Optional[int] = None):
    return d.sample(rng, size)


def span(d: OffspringDist) -> int:
    """gcd of the positive support; sizes n are only reachable when
    n = 1 (mod span)."""
    if d.kind == "geometric":
        return 1
    g = 0
    for i in np.flatnonzero(d.head[1:] > 0) + 1:
        g = math.gcd(g, int(i))
    if d.tail_model is not None:
        t = d.tail_model
        g = math.gcd(math.gcd(g, t.cutoff), t.cutoff + 1)
    if g == 0:
        raise DistError("distribution concentrated at 0 has no span")
    return g


def feasible_size(d: OffspringDist, n: int) -> bool:
    """Is P(|T| = n) > 0?  Exact DP for n <= 64, congruence test beyond.

    A size is reachable exactly when n - 1 splits into at most n positive
    supported degrees (zero-degree padding is free since mu_0 > 0 is
    required for finite trees).
    """
    if n < 1:
        return False
    if n == 1:
        return d.pmf(0) > 0
    if d.pmf(0) <= 0:
        return False
    if n > 64:
        return (n - 1) % span(d) == 0
    if d.kind == "geometric":
        support = set(range(1, n))
    else:
        support = {int(i) for i in np.flatnonzero(d.head[1:] > 0) + 1 if i <= n - 1}
        if d.tail_model is not None:
            support |= set(range(max(d.tail_model.cutoff, d.H + 1), n))
    if not support:
        return False
    # reachable sums with <= n supported positive parts, as a bitmask
    target = n - 1
    reach = 1
    full = (1 << (target + 1)) - 1
    for _ in range(n):
        nxt = reach
        for s in support:
            nxt |= (reach << s) & full
        if nxt == reach:
            break
        reach = nxt
    return bool(reach >> target & 1)

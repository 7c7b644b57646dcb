"""Critical offspring laws whose conditioned trees are short and fat along
a subsequence.

The ladder starts from atoms (0, 1/2), (1, 1/8), (2, 1/8) and repeatedly
adds a much larger atom n_{k+1} carrying mass p_{k+1} = delta_k / (2 (n_{k+1}-1)),
which halves the running mean defect delta_k and keeps the mass defect
eps_k positive.  The atom size is the smallest integer satisfying

  (i)   n_{k+1} - 1 >= delta_k / eps_k,
  (ii)  lambda_{k+1}^(n_{k+1}-1) < delta_k / (2 n_{k+1}),
  (iii) f(ceil(n_{k+1}/delta_k)) > 10 / delta_k,

with lambda_{k+1} the tilting decay constant of the current head.  The
checkpoint sizes n*_k = ceil(n_k/delta_{k-1}) are where the size-n*
conditioned tree has a degree >= n_k with probability at least 1 - 1/n_k:
one big jump plus the drift of the small steps is exactly how the
conditioned walk reaches -1.

All level arithmetic is exact rationals, so delta_k halves exactly.  A
finite ladder leaves a mean defect delta_K; one closing atom with the full
kill p = delta_K/(n-1) restores criticality exactly, and the leftover mass
lands on mu_1.  Slow growth functions (the iterated logarithm) push the
atom sizes past any representable integer after a few levels; the build
then stops with an error naming the binding condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import scaling
from .dist import OffspringDist, load_spec
from .sample import MaxTriesError

__all__ = ["ConstructError", "GrowthFunction", "growth_function", "Level",
           "ConstructedDist", "build_short_fat", "FatnessReport",
           "verify_fatness"]

SIZE_CAP = 10 ** 18


class ConstructError(ValueError):
    """No admissible atom below the size cap; carries the binding condition."""

    def __init__(self, message: str, binding: str):
        super().__init__(message)
        self.binding = binding


@dataclass(frozen=True)
class GrowthFunction:
    name: str
    fn: Callable[[float], float]
    min_arg: float = 3.0

    def __call__(self, x: float) -> float:
        return self.fn(max(float(x), self.min_arg))


def growth_function(spec) -> GrowthFunction:
    """Presets: 'lnln', 'sqrtlog', 'power[:alpha]'; or a table of
    [x, f(x)] pairs (step interpolation, monotone in x)."""
    if isinstance(spec, GrowthFunction):
        return spec
    if isinstance(spec, str):
        if spec == "lnln":
            return GrowthFunction("lnln", lambda x: math.log(math.log(x)), 3.0)
        if spec == "sqrtlog":
            return GrowthFunction("sqrtlog", lambda x: math.sqrt(math.log(x)), 2.0)
        if spec == "power" or spec.startswith("power:"):
            alpha = float(spec.split(":", 1)[1]) if ":" in spec else 0.3
            if not 0 < alpha <= 1:
                raise ValueError("power exponent must lie in (0, 1]")
            return GrowthFunction(f"power:{alpha:g}", lambda x: x ** alpha, 1.0)
        raise ValueError(f"unknown growth preset {spec!r}")
    pts = sorted((float(x), float(y)) for x, y in spec)
    if not pts:
        raise ValueError("growth table is empty")

    def step(x: float) -> float:
        out = pts[0][1]
        for px, py in pts:
            if px <= x:
                out = py
            else:
                break
        return out

    return GrowthFunction("table", step, pts[0][0])


@dataclass(frozen=True)
class Level:
    k: int
    n: int
    p: Fraction
    eps: Fraction          # mass defect after this level
    delta: Fraction        # mean defect after this level
    lam: Optional[float] = None       # decay constant used to pick n (k >= 3)
    checkpoint: Optional[int] = None  # n*_k
    binding: Optional[str] = None     # which condition fixed n
    closing: bool = False


@dataclass(frozen=True)
class ConstructedDist:
    levels: tuple[Level, ...]
    mu1: Fraction
    growth: str

    @property
    def K(self) -> int:
        return max(l.k for l in self.levels if not l.closing)

    def level(self, k: int) -> Level:
        for l in self.levels:
            if l.k == k and not l.closing:
                return l
        raise KeyError(f"no level {k}")

    @property
    def closing_level(self) -> Optional[Level]:
        for l in self.levels:
            if l.closing:
                return l
        return None

    def head_fractions(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for l in self.levels:
            if l.n == 1:
                continue
            out[l.n] = out.get(l.n, Fraction(0)) + l.p
        out[1] = self.mu1
        return out

    def mean_exact(self) -> Fraction:
        return sum(Fraction(n) * p for n, p in self.head_fractions().items())

    def to_spec(self) -> dict:
        levels = [[l.n, float(l.p)] for l in self.levels]
        return {"kind": "constructed", "levels": levels, "mu1": float(self.mu1)}

    def to_dist(self) -> OffspringDist:
        return load_spec(self.to_spec())

    def metadata(self) -> dict:
        return {
            "growth": self.growth,
            "levels": [
                {
                    "k": l.k, "n": l.n, "p": str(l.p),
                    "eps": str(l.eps), "delta": str(l.delta),
                    "lambda": l.lam, "checkpoint": l.checkpoint,
                    "binding": l.binding, "closing": l.closing,
                }
                for l in self.levels
            ],
            "mu1": str(self.mu1),
            "mean": str(self.mean_exact()),
        }


def _ladder_head(levels: list[Level]) -> np.ndarray:
    """The sub-probability head nu (mass 1 - eps_k) of the current ladder."""
    nu = np.zeros(max(l.n for l in levels) + 1)
    for l in levels:
        nu[l.n] += float(l.p)
    return nu


def _ceil_div_fraction(n: int, frac: Fraction) -> int:
    """ceil(n / frac) for positive rational frac, exact."""
    num, den = frac.numerator, frac.denominator
    return -((-n * den) // num)


def build_short_fat(f, K: int) -> ConstructedDist:
    """Run the ladder for levels 3..K and close it critically.

    K <= 8; levels 0..2 are fixed.  Raises ConstructError when no
    admissible atom exists below 1e18, naming the condition that binds.
    """
    if not 2 <= K <= 8:
        raise ValueError("K must be between 2 and 8")
    growth = growth_function(f)

    levels = [
        Level(0, 0, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)),
        Level(1, 1, Fraction(1, 8), Fraction(3, 8), Fraction(1, 2),
              checkpoint=None),
        Level(2, 2, Fraction(1, 8), Fraction(1, 4), Fraction(3, 8),
              checkpoint=4),  # ceil(n_2 / delta_1)
    ]
    # defects after level 2 (the level rows carry the running values)
    eps = Fraction(1, 4)
    delta = Fraction(3, 8)

    for k in range(3, K + 1):
        nu = _ladder_head(levels)
        lam_raw = scaling.lambda_est(nu, eps=float(eps), delta=float(delta))
        lam = 1.1 * lam_raw
        if lam >= 1.0:
            lam = 0.5 * (1.0 + lam_raw)  # keep the safety factor below 1

        n_next, binding = _smallest_admissible(growth, lam, eps, delta,
                                               levels[-1].n + 1)
        p_next = delta / (2 * (n_next - 1))
        eps_next = eps - p_next
        delta_next = delta / 2
        if eps_next <= 0:
            raise ConstructError("mass defect exhausted", binding="(i)")
        levels.append(Level(k, n_next, p_next, eps_next, delta_next,
                            lam=lam, binding=binding,
                            checkpoint=_ceil_div_fraction(n_next, delta)))
        eps, delta = eps_next, delta_next

    # closing atom: full kill of the remaining mean defect
    n_close = max(levels[-1].n + 1, 1 + _ceil_div_fraction(2, eps / delta))
    p_close = delta / (n_close - 1)
    eps_close = eps - p_close
    if eps_close <= 0:
        raise ConstructError("no room to close the ladder critically",
                             binding="(i)")
    levels.append(Level(K + 1, n_close, p_close, eps_close, Fraction(0),
                        closing=True))
    mu1 = levels[1].p + eps_close
    cd = ConstructedDist(tuple(levels), mu1, growth.name)
    assert cd.mean_exact() == 1, "ladder closure must restore criticality"
    return cd


def _smallest_admissible(growth: GrowthFunction, lam: float,
                         eps: Fraction, delta: Fraction,
                         lower: int) -> tuple[int, str]:
    """Smallest n with (i), (ii), (iii); reports the binding condition."""
    bound_i = 1 + _ceil_div_fraction(1, eps / delta)  # n - 1 >= delta/eps
    lo = max(lower, bound_i, 3)
    thr = 10.0 / float(delta)

    def cond_iii(n: int) -> bool:
        return growth(_ceil_div_fraction(n, delta)) > thr

    def cond_ii(n: int) -> bool:
        return (n - 1) * math.log(lam) < math.log(float(delta) / (2.0 * n))

    def first_true(cond, a: int, name: str) -> int:
        # smallest n >= a satisfying cond; both conditions are monotone
        # in n from their first success onward
        if cond(a):
            return a
        b = a
        while not cond(b):
            b *= 2
            if b > SIZE_CAP:
                raise ConstructError(
                    f"condition {name} unreachable below {SIZE_CAP:.0e}",
                    binding=name)
        a = b // 2
        while b - a > 1:
            mid = (a + b) // 2
            if cond(mid):
                b = mid
            else:
                a = mid
        return b

    n = first_true(cond_iii, lo, "(iii)")
    binding = "(iii)" if n > lo else ("(i)" if lo == bound_i and bound_i > lower else "floor")
    m = first_true(cond_ii, n, "(ii)")
    if m > n:
        n, binding = m, "(ii)"
    return n, binding


# ---------------------------------------------------------------------------
# empirical verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FatnessReport:
    level: int
    n_atom: int
    checkpoint: int
    sampler: str
    reps: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float
    target: float            # 1 - 1/n_k
    verified: bool
    note: str = ""

    @property
    def ci_half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def _wilson(hits: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    phat = hits / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def verify_fatness(cd: ConstructedDist, level: int, rng: np.random.Generator,
                   reps: Optional[int] = None, max_size: int = 10 ** 7,
                   draw_budget: int = 4 * 10 ** 10) -> FatnessReport:
    """Estimate P(max degree >= n_level) for the size-n*_level conditioned tree.

    Uses the exact rejection sampler whenever the expected draw count fits
    the budget; beyond that the level is reported, not asserted.  The max
    degree is read off the accepted walk's increments directly, so no trees
    are built.
    """
    lv = cd.level(level)
    if lv.checkpoint is None:
        raise ValueError(f"level {level} has no checkpoint size")
    n_star, n_atom = lv.checkpoint, lv.n
    target = 1.0 - 1.0 / n_atom
    if n_star > max_size:
        return FatnessReport(level, n_atom, n_star, "none", 0, 0,
                             float("nan"), 0.0, 1.0, target, False,
                             note="checkpoint size beyond sampling budget")
    head = cd.head_fractions()
    atoms = np.array(sorted(head), dtype=np.int64)
    cum = np.cumsum([float(head[int(a)]) for a in atoms])
    # 32-bit inverse CDF: the quantization bias (<= 2^-32 per atom) is far
    # below the confidence-interval resolution and the draws come twice as
    # fast as double-precision uniforms
    thr = np.minimum(np.round(cum * 2.0 ** 32), 2.0 ** 32 - 1).astype(np.uint32)

    batch_rows = max(1, (1 << 22) // n_star)
    hits = 0
    walks = 0
    accepted = 0
    drawn = 0
    want = reps
    results: list[bool] = []
    while True:
        u = rng.integers(0, 2 ** 32, size=batch_rows * n_star, dtype=np.uint32)
        y = atoms[np.searchsorted(thr, u, side="right")].reshape(batch_rows, n_star)
        drawn += batch_rows * n_star
        walks += batch_rows
        sel = np.flatnonzero(y.sum(axis=1) == n_star - 1)
        for i in sel:
            results.append(bool(y[i].max() >= n_atom))
        accepted = len(results)
        if want is not None and accepted >= want:
            break
        if want is None and accepted >= 24:
            lo, hi = _wilson(sum(results), accepted)
            if 0.5 * (hi - lo) <= 0.045 and accepted >= 64:
                break
        if drawn > draw_budget:
            if accepted == 0:
                raise MaxTriesError(walks, 0)
            break
    results = results[:want] if want is not None else results
    hits = sum(results)
    n_acc = len(results)
    lo, hi = _wilson(hits, n_acc)
    est = hits / n_acc if n_acc else float("nan")
    return FatnessReport(level, n_atom, n_star, "exact", n_acc, hits, est,
                         lo, hi, target, verified=True)


def dp_bound_at_level(cd: ConstructedDist, level: int,
                      ops_budget: float = 4e9) -> Optional[float]:
    """Lemma-style DP bound on P(max degree < n_level) at the checkpoint size.

    Returns None when the DP would not fit the operation budget (huge
    windows at the upper levels).
    """
    lv = cd.level(level)
    n_star, n_atom = lv.checkpoint, lv.n
    if n_star is None:
        return None
    d = cd.to_dist()
    values, probs = scaling.increment_support(d, max_degree=n_atom - 1)
    var = float(np.dot((values - np.dot(values, probs)) ** 2, probs))
    width = 2 * (12.0 * math.sqrt(var * n_star) + 4 * (values.max() - values.min()) + 64)
    if n_star * width * len(values) > ops_budget:
        return None
    return scaling.delta_upper_bound(d, n_star, n_atom - 1)

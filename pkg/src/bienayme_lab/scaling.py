"""Scaling sequences and analytic machinery for critical offspring laws.

Everything here is deterministic numerics:

* the quantile sequence a_n (first u with P(Y >= u) <= 1/n), the centering
  sequence b_n = n E[X 1{|X| > a_n}], and the height scale

      h_n = int_1^{n l*(a_n)} dx / (x l*(x)),      l*(x) = E[Y 1{Y >= x}],

  where the integrand is constant between integers so the integral is a
  finite sum of logarithms (piecewise-exact); a geometric grid takes over
  past 1e7 with relative error below 1e-8;

* the survival recursion Q_{n+1} = 1 - G(1 - Q_n) = Q_n (1 - l(Q_n)) with

      l(s) = sum_{k>=1} P(Y >= k+1) (1 - (1-s)^k),

  the cancellation-free rearrangement of the generating-function remainder
  (valid for critical laws); deep-tail arguments switch the series tail to
  an Euler-Maclaurin/Laplace closure;

* an exact dynamic-programming convolution for bounded increment laws, in
  log space with optional exponential tilting so that far-from-mean hitting
  probabilities keep full relative precision;

* the maximal-degree upper bound built from that DP, and the Cramer tilting
  root b_{c,s} with its decay constant lambda = b^{-1/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .dist import SUM_BOUNDARY, OffspringDist

__all__ = ["a_n", "b_n", "h_n", "upper_limit", "ell", "Gpgf", "G_bar", "V",
           "V_star", "V_star_curve", "QTable", "Q_table", "ConvTable",
           "conv_dp", "increment_support", "delta_upper_bound",
           "TiltSolution", "tilt_root", "lambda_est", "ScalingTable",
           "scaling_table"]

EXACT_INTEGRAL_LIMIT = 10 ** 7


def _require_critical(d: OffspringDist) -> None:
    if not d.is_critical:
        raise ValueError(f"operation needs a critical law, mean is {d.mean!r}")


# ---------------------------------------------------------------------------
# a_n, b_n, h_n
# ---------------------------------------------------------------------------

def a_n(d: OffspringDist, n: int) -> int:
    """Smallest integer u >= 0 with P(Y >= u) <= 1/n."""
    if n < 1:
        raise ValueError("n must be positive")
    thr = 1.0 / n
    if d.tail(0) <= thr:
        return 0
    lo, hi = 0, 1
    while d.tail(hi) > thr:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if d.tail(mid) > thr:
            lo = mid
        else:
            hi = mid
    return hi


def b_n(d: OffspringDist, n: int, a: Optional[int] = None) -> float:
    """n E[X 1{|X| > a_n}] for the increment X = Y - 1 (vanishes for a_n = 0)."""
    _require_critical(d)
    a = a_n(d, n) if a is None else a
    if a == 0:
        return 0.0
    return n * (d.tail_moment(a + 2) - d.tail(a + 2))


def upper_limit(d: OffspringDist, n: int, a: Optional[int] = None) -> float:
    """n l*(a_n), the upper endpoint of the h_n integral."""
    a = a_n(d, n) if a is None else a
    return n * float(d.tail_moment(a))


def _reciprocal_ellstar_integral(d: OffspringDist, y: float) -> float:
    """int_1^y dx / (x l*(floor(x))), piecewise-exact to 1e7, grid beyond."""
    if y <= 1.0:
        return 0.0
    y_exact = min(y, float(EXACT_INTEGRAL_LIMIT))
    kmax = int(math.ceil(y_exact)) - 1
    ells = d.ellstar_array(kmax + 1)
    ks = np.arange(1, kmax + 1, dtype=np.float64)
    uppers = np.minimum(ks + 1.0, y_exact)
    total = float(np.sum((np.log(uppers) - np.log(ks)) / ells[1:kmax + 1]))
    if y <= EXACT_INTEGRAL_LIMIT:
        return total
    # geometric grid on u = ln x; the integrand 1/l* is slowly varying out
    # here, so Simpson converges fast; relative error target 1e-9
    lo, hi = math.log(float(EXACT_INTEGRAL_LIMIT)), math.log(y)
    prev = None
    nodes = 1025
    while True:
        us = np.linspace(lo, hi, nodes)
        vals = 1.0 / d.ellstar_cont(np.exp(us))
        cur = float(integrate.simpson(vals, x=us))
        if prev is not None and abs(cur - prev) <= 1e-9 * abs(cur):
            break
        if nodes >= 1 << 15:
            break
        prev, nodes = cur, nodes * 2 - 1
    return total + cur


def V(d: OffspringDist, y: float) -> float:
    """int_1^y dx/(x l*(x)); requires y >= 1."""
    if y < 1.0:
        raise ValueError("V is defined for y >= 1")
    return _reciprocal_ellstar_integral(d, float(y))


def V_star(d: OffspringDist, y: float) -> float:
    """int_y^1 dx / (x l(x)) with the exact series l, for y in (0, 1).

    This is the survival-side transform: with this integrand the bound
    n < V_star(Q_n) is an identity-level consequence of the recursion,
    valid at every n.  (The tail-moment integrand of V only matches it
    asymptotically, so V_star is integrated in its own right rather than
    evaluated as V(1/y).)
    """
    if not 0.0 < y < 1.0:
        raise ValueError("V_star is defined on (0, 1)")
    _require_critical(d)
    top = math.log(1.0 / y)

    def f_u(u):
        return 1.0 / ell(d, math.exp(-u))

    nodes, prev = 257, None
    while True:
        us = np.linspace(0.0, top, nodes)
        vals = np.array([f_u(u) for u in us])
        cur = float(integrate.simpson(vals, x=us))
        if prev is not None and abs(cur - prev) <= 1e-8 * abs(cur):
            break
        if nodes >= 4097:
            break
        prev, nodes = cur, nodes * 2 - 1
    return cur


def V_star_curve(d: OffspringDist, qt: "QTable") -> np.ndarray:
    """V_star(Q_n) for every row of a survival table, sharing its l values.

    One Simpson panel per recursion slab [Q_{n+1}, Q_n] in u = ln(1/x);
    the endpoint integrand values come from the table, so the extra cost
    is one l evaluation per slab (the midpoint).
    """
    _require_critical(d)
    q = qt.q
    el = qt.ell_values
    out = np.full(len(q), np.nan)
    out[0] = 0.0
    acc = 0.0
    for n in range(len(q) - 1):
        if q[n + 1] <= 0:
            break
        du = float(np.log(q[n]) - np.log(q[n + 1]))
        fl = 1.0 / float(el[n])
        fr = (1.0 / float(el[n + 1])) if n + 1 < len(el) and el[n + 1] > 0 \
            else 1.0 / ell(d, float(q[n + 1]))
        fm = 1.0 / ell(d, float(np.sqrt(q[n] * q[n + 1])))
        acc += du * (fl + 4.0 * fm + fr) / 6.0
        out[n + 1] = acc
    return out


def h_n(d: OffspringDist, n: int) -> float:
    """The height scale; errors out when the integration range is empty."""
    _require_critical(d)
    a = a_n(d, n)
    u = upper_limit(d, n, a)
    if u <= 1.0:
        raise ValueError(f"h_n undefined: upper limit {u!r} <= 1")
    return _reciprocal_ellstar_integral(d, u)


# ---------------------------------------------------------------------------
# l(s) and the probability generating function
# ---------------------------------------------------------------------------

def _laplace_pmf_sum(d: OffspringDist, lam: float, start: int, shift: float) -> float:
    """sum_{j >= start} mu_j * (-expm1((j - shift) * lam)) for parametric tails.

    Euler-Maclaurin closure of the series.  The integral part runs in
    u = ln x (the range can span many decades when lam is tiny) up to the
    point where the expm1 weight saturates to 1, and closes with the exact
    integral of mu out there.
    """
    t = d.tail_model
    c = d.c

    def g1(x):
        return c * t.L(x) / x ** 2

    def w(x):
        return -np.expm1((x - shift) * lam)

    def f(x):
        return g1(x) * w(x)

    def fprime(x):
        return (f(x) * (t.dlogL(x) - 2.0 / x)
                - g1(x) * lam * np.exp((x - shift) * lam))

    a = float(start)
    alam = max(-lam, 1e-300)
    x_sat = shift + 45.0 / alam  # beyond here w(x) = 1 - O(1e-20)
    if x_sat <= a:
        intval = c * t.int_L_over_x2(a)
    else:
        def f_u(u):
            x = math.exp(u)
            return float(f(x)) * x

        ulo, uhi = math.log(a), math.log(x_sat)
        breaks = np.append(np.arange(ulo, uhi, 2.0), uhi)
        intval = 0.0
        for left, right in zip(breaks[:-1], breaks[1:]):
            val, _ = integrate.quad(f_u, left, right,
                                    epsabs=0.0, epsrel=1e-12, limit=200)
            intval += val
        intval += c * t.int_L_over_x2(x_sat)
    return intval + float(f(a)) / 2.0 - float(fprime(a)) / 12.0


def ell(d: OffspringDist, s: float) -> float:
    """l(s) = mu_0 - sum_k P(Y >= k+1)(1-s)^k, summed in positive form.

    For critical laws this equals sum_k P(Y >= k+1)(1 - (1-s)^k), which has
    no cancellation; the tail of the series beyond the direct window uses
    the Laplace closure.  Relative accuracy ~1e-12 while the direct series
    dominates, ~1e-10 deep in the tail regime.
    """
    _require_critical(d)
    if not 0.0 < s <= 1.0:
        raise ValueError("ell is defined on (0, 1]")
    k0 = SUM_BOUNDARY if d.tail_model is not None else max(SUM_BOUNDARY, d.H + 2)
    tails = d.tail_array(k0 + 2)
    ks = np.arange(1, k0 + 1, dtype=np.float64)
    if s == 1.0:
        weights = np.ones_like(ks)
    else:
        weights = -np.expm1(ks * math.log1p(-s))
    p_part = float(np.sum(tails[2:k0 + 2] * weights))
    if d.tail_model is None:
        return p_part
    # remainder R - T over k > k0
    r_part = float(d.tail_moment(k0 + 2) - (k0 + 1) * d.tail(k0 + 2))
    if r_part <= 0:
        return p_part
    lam = math.log1p(-s) if s < 1.0 else -math.inf
    t_bound = float(tails[k0 + 1]) * math.exp((k0 + 1) * lam) / s if s < 1.0 else 0.0
    if t_bound < 1e-16 * (p_part + r_part):
        return p_part + r_part
    t_part = math.exp((k0 + 1) * lam) / s * _laplace_pmf_sum(d, lam, k0 + 2, float(k0 + 1))
    return p_part + r_part - t_part


def _ell_exact_longdouble(d: OffspringDist, s) -> np.longdouble:
    """Extended-precision l(s) for laws whose series terminates on its own."""
    s = np.longdouble(s)
    k0 = 120 if d.kind == "geometric" else d.H + 1
    ks = np.arange(1, k0 + 1, dtype=np.longdouble)
    if d.kind == "geometric":
        tails = np.longdouble(2.0) ** (-(ks + 1))
    else:
        tails = d.tail_array(k0 + 2)[2:k0 + 2].astype(np.longdouble)
    if s >= 1.0:
        weights = np.ones_like(ks)
    else:
        weights = -np.expm1(ks * np.log1p(-s))
    return np.sum(tails * weights)


def G_bar(d: OffspringDist, s: float) -> float:
    """1 - G(1 - s) evaluated without cancellation: sum_k mu_k (1-(1-s)^k)."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("G_bar is defined on [0, 1]")
    if s == 0.0:
        return 0.0
    if d.kind == "geometric":
        k0 = 200  # mass beyond is under 2^-200
    elif d.tail_model is not None:
        k0 = SUM_BOUNDARY
    else:
        k0 = d.H + 1
    probs = d.pmf_array(k0)
    ks = np.arange(k0 + 1, dtype=np.float64)
    if s == 1.0:
        weights = np.ones_like(ks)
        weights[0] = 0.0  # the k = 0 term always vanishes
    else:
        weights = -np.expm1(ks * math.log1p(-s))
    acc = float(np.sum(probs * weights))
    if d.tail_model is None or d.kind == "geometric":
        return acc
    rest = d._tail_scalar(k0 + 1)
    if s == 1.0:
        return acc + rest
    if rest < 1e-16 * max(acc, 1e-300):
        return acc
    return acc + _laplace_pmf_sum(d, math.log1p(-s), k0 + 1, 0.0)


def Gpgf(d: OffspringDist, x: float) -> float:
    """G(x) = E[x^Y] on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("pgf evaluated on [0, 1] only")
    if x >= 0.5:
        return 1.0 - G_bar(d, 1.0 - x)
    kmax = SUM_BOUNDARY if d.tail_model is not None else max(64, d.H + 1)
    probs = d.pmf_array(kmax)
    return float(np.polynomial.polynomial.polyval(x, probs))


# ---------------------------------------------------------------------------
# survival probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QTable:
    """Q_n = P(height >= n) for n = 0..N, plus the l values used."""

    q: np.ndarray          # longdouble, length N+1
    ell_values: np.ndarray  # longdouble, length N (l(Q_n) while Q_n > 0)

    @property
    def q64(self) -> np.ndarray:
        return self.q.astype(np.float64)

    def __len__(self) -> int:
        return len(self.q)


def Q_table(d: OffspringDist, N: int) -> QTable:
    """Iterate Q_{n+1} = Q_n (1 - l(Q_n)) from Q_0 = 1.

    Extended precision keeps the relative drift below 1e-12 over 1e4 steps
    for laws with self-terminating series.  Subcritical laws fall back to
    the plain generating-function step Q_{n+1} = 1 - G(1 - Q_n).
    """
    if d.mean > 1.0 + 1e-9:
        raise ValueError("survival recursion needs a (sub)critical law")
    exact = d.tail_model is None or d.kind == "geometric"
    critical = d.is_critical
    q = np.zeros(N + 1, dtype=np.longdouble)
    ells = np.zeros(N, dtype=np.longdouble)
    q[0] = np.longdouble(1.0)
    for n in range(N):
        cur = q[n]
        if cur <= 0:
            break
        if not critical:
            q[n + 1] = np.longdouble(G_bar(d, float(cur)))
            continue
        if exact:
            l = _ell_exact_longdouble(d, cur)
        else:
            l = np.longdouble(ell(d, float(cur)))
        ells[n] = l
        q[n + 1] = cur * (np.longdouble(1.0) - l)
    return QTable(q, ells)


# ---------------------------------------------------------------------------
# exact convolution DP
# ---------------------------------------------------------------------------

@dataclass
class ConvTable:
    """Log-probabilities of S_n over a contiguous window of values."""

    n: int
    lo: int
    logp: np.ndarray
    log_truncated: float = -math.inf

    def prob(self, k: int) -> float:
        lp = self.logprob(k)
        return 0.0 if lp == -math.inf else math.exp(lp)

    def logprob(self, k: int) -> float:
        i = k - self.lo
        if not 0 <= i < len(self.logp):
            return -math.inf
        return float(self.logp[i])

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + len(self.logp))


def increment_support(d: OffspringDist, max_degree: Optional[int] = None,
                      cap: Optional[int] = None):
    """(values, probs) of X = Y - 1, optionally conditioned on Y <= max_degree.

    cap truncates unbounded supports (mass error reported by conv_dp's
    normalization, not hidden).
    """
    if max_degree is not None:
        top = max_degree
        mass = 1.0 - float(d.tail(max_degree + 1))
        if mass <= 0:
            raise ValueError("conditioning event has zero probability")
    else:
        top = cap if cap is not None else d.H
        if d.tail_model is not None and cap is None:
            raise ValueError("unbounded support needs an explicit cap")
        mass = 1.0
    probs = d.pmf_array(top)
    vals = np.arange(-1, top, dtype=np.int64)
    keep = probs > 0
    return vals[keep], probs[keep] / mass


def conv_dp(values, probs, n: int, window: Optional[int] = None,
            tilt: float = 0.0, targets: Sequence[int] = ()) -> ConvTable:
    """Distribution of S_n = X_1 + ... + X_n by sequential convolution.

    The DP runs on a drifting window that follows the walk's mean; with the
    default window the table is exact (mass error < 1e-12 when the window
    covers the full support).  A nonzero exponential tilt theta reweights
    the steps by e^(theta x)/M(theta); the output is converted back, which
    keeps far-from-mean probabilities at full relative precision.
    """
    values = np.asarray(values, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    if len(values) == 0 or n < 1:
        raise ValueError("empty law or nonpositive n")
    if tilt != 0.0:
        logw = tilt * values
        logm = float(np.log(np.sum(probs * np.exp(logw - logw.max()))) + logw.max())
        tprobs = probs * np.exp(logw - logm)
    else:
        logm = 0.0
        tprobs = probs / probs.sum()
    mean = float(np.dot(values, tprobs))
    var = float(np.dot((values - mean) ** 2, tprobs))
    span = int(values.max() - values.min())
    vmin, vmax = int(values.min()), int(values.max())

    if window is None:
        half = int(12.0 * math.sqrt(max(var, 1e-12) * n)) + 4 * span + 64
    else:
        half = int(window)

    # step 0: point mass at 0
    lo, hi = 0, 0
    p = np.ones(1)
    logscale = 0.0
    for i in range(1, n + 1):
        c = int(round(mean * i))
        nlo = max(c - half, i * vmin)
        nhi = min(c + half, i * vmax)
        q = np.zeros(nhi - nlo + 1)
        for v, pv in zip(values, tprobs):
            # source value x lands at x + v: target index (x + v) - nlo
            src_lo = max(lo, nlo - int(v))
            src_hi = min(hi, nhi - int(v))
            if src_hi < src_lo:
                continue
            tgt = src_lo + int(v) - nlo
            q[tgt: tgt + src_hi - src_lo + 1] += pv * p[src_lo - lo: src_hi - lo + 1]
        m = q.max()
        if m <= 0:
            raise ValueError("window lost all mass; widen it")
        logscale += math.log(m)
        p = q / m
        lo, hi = nlo, nhi
    # untilted log-probabilities: log P(S_n = k) = log Pt + n logM - theta k
    ks = np.arange(lo, hi + 1)
    with np.errstate(divide="ignore"):
        logp = np.log(p) + logscale + n * logm - tilt * ks
    table = ConvTable(n, lo, logp)
    covered = math.exp(logscale + math.log(p.sum()))
    table.log_truncated = (-math.inf if covered >= 1.0
                           else math.log(max(1.0 - covered, 1e-300)))
    for t in targets:
        if not lo <= t <= hi:
            raise ValueError(f"target {t} fell outside the DP window [{lo}, {hi}]")
    return table


def _tilt_for_target(values, probs, target_mean: float) -> float:
    """theta with tilted mean = target_mean, by monotone root finding."""
    values = np.asarray(values, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)

    def tilted_mean(theta):
        w = theta * values
        w -= w.max()
        z = probs * np.exp(w)
        return float(np.dot(values, z) / z.sum())

    lo, hi = -1.0, 1.0
    while tilted_mean(lo) > target_mean and lo > -512:
        lo *= 2
    while tilted_mean(hi) < target_mean and hi < 512:
        hi *= 2
    if tilted_mean(lo) > target_mean or tilted_mean(hi) < target_mean:
        return 0.0  # target outside attainable range; caller handles
    return float(optimize.brentq(lambda t: tilted_mean(t) - target_mean, lo, hi,
                                 xtol=1e-13))


def _log_hit(values, probs, n: int, target: int) -> float:
    """log P(S_n = target), tilted so the DP is well conditioned at target."""
    vmin, vmax = int(values.min()), int(values.max())
    if target < n * vmin or target > n * vmax:
        return -math.inf
    if len(values) == 1:
        return 0.0 if target == n * vmin else -math.inf
    if target == n * vmin:
        return n * math.log(float(probs[np.argmin(values)]))
    if target == n * vmax:
        return n * math.log(float(probs[np.argmax(values)]))
    theta = _tilt_for_target(values, probs, target / n)
    table = conv_dp(values, probs, n, tilt=theta, targets=[target])
    return table.logprob(target)


def delta_upper_bound(d: OffspringDist, n: int, N: int) -> float:
    """Upper bound on P(max degree in the size-n tree <= N).

    Ratio of hitting probabilities of the walk with increments conditioned
    below N; +inf when the denominator vanishes, exact 0 when the numerator
    does.
    """
    if n <= N + 1:
        raise ValueError("need n > N + 1")
    p_at = float(d.pmf(N + 1))
    if p_at <= 0.0:
        raise ValueError("P(X = N) = 0: the bound needs mass at degree N + 1")
    values, probs = increment_support(d, max_degree=N)
    lognum = _log_hit(values, probs, n, -1)
    if lognum == -math.inf:
        return 0.0
    logden = _log_hit(values, probs, n - 1, -N - 1)
    if logden == -math.inf:
        return math.inf
    logbound = lognum - (math.log(n) + math.log(p_at) + logden)
    return math.inf if logbound > 700.0 else float(math.exp(logbound))


# ---------------------------------------------------------------------------
# Cramer tilting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TiltSolution:
    """Root b of  b G_c'(b)/G_c(b) = -delta + s  on [1, inf)."""

    c: float
    s: float
    delta: float
    eps: float
    b: float
    lam: float
    residual: float


def _tilt_ratio(nu: np.ndarray, c: float, log_b: float) -> float:
    """b G_c'(b)/G_c(b) evaluated stably through logs."""
    j = np.flatnonzero(nu > 0)
    w = np.log(nu[j]) + (j - 1) * log_b
    coef = (j - 1).astype(np.float64)
    if c > 0:
        w = np.append(w, math.log(c))
        coef = np.append(coef, 0.0)
    m = w.max()
    e = np.exp(w - m)
    return float(np.dot(coef, e) / e.sum())


def tilt_root(nu, c: float, s: float, delta: Optional[float] = None,
              eps: Optional[float] = None) -> TiltSolution:
    """Solve the tilted-mean equation; the ratio is increasing in b.

    nu is the head law nu_0..nu_K with total mass 1 - eps; the defect
    delta comes from sum_i i nu_i + eps = 1 - delta.
    """
    nu = np.asarray(nu, dtype=np.float64)
    if nu.ndim != 1 or len(nu) < 2 or np.any(nu < 0):
        raise ValueError("head law must be a nonnegative vector nu_0..nu_K")
    eps0 = 1.0 - float(nu.sum())
    delta0 = 1.0 - (float(np.dot(np.arange(len(nu)), nu)) + eps0)
    if eps is None:
        eps = eps0
    elif abs(eps - eps0) > 1e-9:
        raise ValueError(f"eps mismatch: stated {eps}, implied {eps0!r}")
    if delta is None:
        delta = delta0
    elif abs(delta - delta0) > 1e-9:
        raise ValueError(f"delta mismatch: stated {delta}, implied {delta0!r}")
    if not (eps0 > 0 and delta0 > 0):
        raise ValueError("need positive mass defect eps and mean defect delta")
    if not 0.0 <= c <= eps0 + 1e-12:
        raise ValueError("c must lie in [0, eps]")
    if not 0.0 <= s <= delta0 + 1e-12:
        raise ValueError("s must lie in [0, delta]")
    target = -delta + s
    top = len(nu) - 1 - 1  # limit of the ratio as b -> inf is K - 1
    if target >= top:
        raise ValueError("target mean outside attainable range")

    def g(log_b):
        return _tilt_ratio(nu, c, log_b) - target

    if g(0.0) >= 0.0:
        b = 1.0
        res = abs(g(0.0))
    else:
        hi = 1.0
        while g(hi) < 0.0:
            hi *= 2.0
            if hi > 700.0:
                raise ValueError("target mean outside attainable range")
        log_b = float(optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=8.9e-16))
        b = math.exp(log_b)
        res = abs(g(log_b))
    lam = b ** -0.5
    return TiltSolution(c=c, s=s, delta=delta, eps=eps, b=b, lam=lam, residual=res)


def lambda_est(nu, eps: float, delta: float) -> float:
    """Decay constant lambda = b_{eps, delta/4}^{-1/2} in (0, 1)."""
    sol = tilt_root(nu, c=eps, s=delta / 4.0, delta=delta, eps=eps)
    if sol.b <= 1.0 + 1e-12:
        raise ValueError("tilt root degenerate at b = 1; lambda would not be < 1")
    return sol.lam


# ---------------------------------------------------------------------------
# the assembled table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingRow:
    n: int
    a: int
    b: float
    upper: float
    h: float      # nan when undefined (upper limit <= 1)
    v_of_b: float

    @property
    def h_defined(self) -> bool:
        return not math.isnan(self.h)


@dataclass(frozen=True)
class ScalingTable:
    dist_kind: str
    rows: tuple[ScalingRow, ...] = field(default_factory=tuple)

    CSV_HEADER = "n,a_n,b_n,h_n,V_bn"

    def to_csv_lines(self) -> list[str]:
        out = [self.CSV_HEADER]
        for r in self.rows:
            h = f"{r.h:.12g}" if r.h_defined else ""
            v = f"{r.v_of_b:.12g}" if not math.isnan(r.v_of_b) else ""
            out.append(f"{r.n},{r.a},{r.b:.12g},{h},{v}")
        return out


def scaling_table(d: OffspringDist, ns: Sequence[int]) -> ScalingTable:
    _require_critical(d)
    rows = []
    for n in ns:
        a = a_n(d, n)
        b = b_n(d, n, a)
        u = upper_limit(d, n, a)
        try:
            h = h_n(d, n)
        except ValueError:
            h = math.nan
        v = V(d, b) if b >= 1.0 else math.nan
        rows.append(ScalingRow(n=int(n), a=a, b=b, upper=u, h=h, v_of_b=v))
    return ScalingTable(d.kind, tuple(rows))

"""Meyer-König–Zeller operators: classical, q-analogue and Durrmeyer variant.

All three families share the outer kernel

    m_{n,k,q}(x) = (x; q)_{n+1} [n+k choose k]_q x^k,   k = 0, 1, ...

which is a probability mass in k (it sums to one).  The families differ only
in the value attached to node k:

* q-MKZ (and classical MKZ at q = 1): f([k]/[n+k]);
* Durrmeyer: f(0) at k = 0, otherwise the average of f against the
  normalised q-beta density t^(k-1) (qt; q)_(n-1) on the Jackson nodes q^j.

The kernel is summed outward from its mode.  The ratio
r(k) = m_{n,k+1,q}(x) / m_{n,k,q}(x) = x [n+k+1] / [k+1] decreases in k, so
both tails are dominated by geometric series; truncation stops once the two
certified tail masses total at most ``tail_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .functions import Func1D, PiecewisePoly, e0, e1, e2
from .qcalc import (
    DEFAULT_POLICY,
    QDomainError,
    SeriesResult,
    TruncationPolicy,
    check_q,
    log_q_integers,
    log_q_pochhammer,
    q_integer,
    q_integers,
    q_beta_rule,
)
from .summability import QSequence, constant_qseq

__all__ = [
    "Kernel",
    "mkz_kernel",
    "mkz_classical",
    "mkz_q",
    "durrmeyer_q",
    "durrmeyer_classical",
    "OperatorFamily",
    "MomentReport",
    "moment_report",
    "central_second_moment",
    "qmkz_e2_envelope",
    "durrmeyer_e2_envelope",
    "KINDS",
]

KINDS = ("classical-mkz", "q-mkz", "durrmeyer-q-mkz")
_GAUSS_JACOBI_ORDER = 20


@dataclass
class Kernel:
    """Truncated outer kernel at one (n, q, x): weights for k = k_lo, ..."""

    k_lo: int
    weights: np.ndarray
    tail: float  # certified bound on the neglected mass
    deficit: bool = False

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_lo, self.k_lo + len(self.weights))


def _log_ratio(k: np.ndarray, n: int, q: float, logx: float) -> np.ndarray:
    """log r(k) = log x + log [n+k+1] - log [k+1]."""
    k = np.asarray(k, dtype=float)
    if q == 1.0:
        return logx + np.log1p(n / (k + 1.0))
    if q == 0.0:
        return np.full(k.shape, logx)
    lq = math.log(q)
    return logx + np.log(np.expm1((n + k + 1.0) * lq) / np.expm1((k + 1.0) * lq))


def _log_ratio_scalar(k: int, n: int, q: float, logx: float) -> float:
    if q == 1.0:
        return logx + math.log1p(n / (k + 1.0))
    if q == 0.0:
        return logx
    lq = math.log(q)
    return logx + math.log(math.expm1((n + k + 1.0) * lq) / math.expm1((k + 1.0) * lq))


def _mode(n: int, q: float, logx: float) -> int:
    """Smallest k with r(k) < 1."""
    if q == 0.0:
        return 0
    if q == 1.0:
        # r(k) < 1  <=>  k (1 - x) > x (n + 1) - 1
        x = math.exp(logx)
        k = max(0, math.floor((x * (n + 1) - 1.0) / (1.0 - x)))
        while k > 0 and _log_ratio_scalar(k - 1, n, q, logx) < 0.0:
            k -= 1
        while _log_ratio_scalar(k, n, q, logx) >= 0.0:
            k += 1
        return k

    def below(k):
        return _log_ratio_scalar(k, n, q, logx) < 0.0

    if below(0):
        return 0
    hi = 1
    while not below(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if below(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _xsum(terms: np.ndarray) -> float:
    """Pairwise sum in extended precision; agrees with fsum on log-ratio runs."""
    return float(np.sum(terms, dtype=np.longdouble))


def _log_qbinom(top: int, r: int, q: float) -> float:
    s = min(r, top - r)
    if s == 0:
        return 0.0
    i = np.arange(1, s + 1, dtype=float)
    return _xsum(log_q_integers(top - s + i, q) - log_q_integers(i, q))


class _LogBinomWalker:
    """log [n+m choose m]_q for a fixed (n, q) as m moves along a grid.

    Successive calls extend the previous value by the log-ratios between the
    two indices; the increments are kept and re-summed with fsum, so the
    result matches a direct fsum without redoing the whole range.
    """

    def __init__(self, n: int, q: float):
        self.n, self.q = n, q
        self.m = 0
        self.parts: list[float] = []

    def __call__(self, m: int) -> float:
        if m != self.m:
            a, b = sorted((self.m, m))
            i = np.arange(a + 1, b + 1, dtype=float)
            d = _xsum(log_q_integers(self.n + i, self.q) - log_q_integers(i, self.q))
            self.parts.append(d if m > self.m else -d)
            self.m = m
        return math.fsum(self.parts)


def _tail_up(logw_end: float, lr_end: float) -> float:
    """Mass above the last kept index: w_end * r/(1-r) when r < 1."""
    if lr_end >= 0.0:
        return math.inf
    r = math.exp(lr_end)
    return math.exp(logw_end) * r / (1.0 - r)


def mkz_kernel(n: int, q: float, x: float, tail_tol: float = 1e-12,
               max_terms: int = 10**6, policy: TruncationPolicy | None = None,
               log_binom: _LogBinomWalker | None = None) -> Kernel:
    """Weights m_{n,k,q}(x) for 0 <= x < 1, truncated around the mode.

    ``q`` may be 0 (degenerate counterexample sequences) through 1.  The
    window [lo, hi] is first guessed from the spread of the kernel, then
    widened until each side's geometric tail bound is at most tail_tol/2.
    """
    if policy is not None:
        tail_tol, max_terms = policy.tail_tol, int(policy.max_terms)
    if n < 1:
        raise QDomainError(f"n must be >= 1, got {n}")
    if not 0.0 <= x < 1.0:
        raise QDomainError(f"kernel needs 0 <= x < 1, got {x}")
    if x == 0.0:
        return Kernel(0, np.ones(1), 0.0)
    logx = math.log(x)
    m = _mode(n, q, logx)
    lc = log_binom(m) if log_binom is not None else _log_qbinom(n + m, m, q)
    logw_m = log_q_pochhammer(x, q, n + 1) + lc + m * logx
    half = 0.5 * tail_tol
    if q == 1.0:
        reach = 8.5 * math.sqrt((n + 1) * x) / (1.0 - x) + 16.0
    else:
        reach = math.log(half * (1.0 - x)) / logx + 16.0
    reach = int(min(reach, max_terms))
    lo = max(0, m - reach)
    hi = m + reach  # exclusive
    deficit = False
    while True:
        if hi - lo > max_terms:
            deficit = True
            hi = lo + max_terms
        lr = _log_ratio(np.arange(lo, hi, dtype=float), n, q, logx)
        c = np.concatenate(([0.0], np.cumsum(lr)))
        logw = logw_m + (c[:-1] - c[m - lo])
        up = _tail_up(logw[-1], lr[-1])
        if lo == 0:
            down = 0.0
        else:
            # mass below lo <= w_lo * rho/(1-rho), rho = 1/r(lo-1)
            down = _tail_up(logw[0], -_log_ratio_scalar(lo - 1, n, q, logx))
        if deficit or (up <= half and down <= half):
            break
        if up > half:
            hi += hi - lo
        if down > half:
            lo = max(0, lo - (hi - lo))
    w = np.exp(logw)
    assert np.all(w >= 0.0)
    tail = min(1.0, up + down)
    if tail > tail_tol:
        deficit = True
    if deficit and policy is not None:
        policy.exhausted("mkz_kernel")
    return Kernel(lo, w, tail, deficit)


def _mkz_nodes(ks: np.ndarray, n: int, q: float) -> np.ndarray:
    """Sampling points [k]/[n+k]."""
    if q == 1.0:
        return ks / (n + ks)
    if q == 0.0:
        return (ks > 0).astype(float)
    lq = math.log(q)
    return np.expm1(ks * lq) / np.expm1((n + ks) * lq)


def _as_result(value, kern: Kernel, bound: float) -> SeriesResult:
    return SeriesResult(float(value), len(kern.weights), bound * kern.tail, kern.deficit)


def _endpoint(f: Func1D, x: float) -> SeriesResult | None:
    if x == 1.0:
        return SeriesResult(float(f(1.0)), 0, 0.0)
    if x == 0.0:
        return SeriesResult(float(f(0.0)), 1, 0.0)
    return None


def _check_x(x):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise QDomainError(f"x must lie in [0, 1], got {x}")
    return x


def mkz_classical(f: Func1D, n: int, x: float, policy=DEFAULT_POLICY) -> SeriesResult:
    """Classical MKZ operator by forward recurrence from k = 0.

    Independent of :func:`mkz_kernel`: the weights are built by
    w_{k+1} = w_k x (n+k+1)/(k+1) from w_0 = (1-x)^(n+1) (in log form) and
    summation stops once the accumulated mass reaches 1 - tail_tol.
    """
    if n < 1:
        raise QDomainError(f"n must be >= 1, got {n}")
    x = _check_x(x)
    if x == 1.0:
        return SeriesResult(float(f(1.0)), 0, 0.0)
    if x == 0.0:
        return SeriesResult(float(f(0.0)), 1, 0.0)
    tol = policy.tail_tol
    logx = math.log(x)
    total, mass = [], []
    acc = 0.0
    start, log_start = 0, (n + 1) * math.log1p(-x)
    size = 1024
    deficit = False
    while True:
        if start >= policy.max_terms:
            deficit = policy.exhausted("mkz_classical")
            break
        size = min(size, int(policy.max_terms) - start)
        k = np.arange(start, start + size, dtype=float)
        steps = logx + np.log((n + k + 1.0) / (k + 1.0))
        logw = log_start + np.concatenate(([0.0], np.cumsum(steps[:-1])))
        w = np.exp(logw)
        cum = acc + np.cumsum(w)
        hit = np.nonzero(cum >= 1.0 - tol)[0]
        cut = hit[0] + 1 if hit.size else size
        total.append(w[:cut] * f(k[:cut] / (n + k[:cut])))
        mass.append(w[:cut])
        start += cut
        if hit.size:
            break
        acc = math.fsum(np.concatenate(mass))
        log_start = logw[-1] + steps[-1]
        size *= 2
    value = math.fsum(np.concatenate(total))
    tail = max(0.0, 1.0 - math.fsum(np.concatenate(mass)))
    return SeriesResult(value, start, f.bound() * tail, deficit)


def mkz_q(f: Func1D, n: int, q: float, x: float, policy=DEFAULT_POLICY) -> SeriesResult:
    """q-MKZ operator M_n^q(f; x) for q in (0, 1]."""
    if n < 1:
        raise QDomainError(f"n must be >= 1, got {n}")
    q = check_q(q)
    x = _check_x(x)
    end = _endpoint(f, x)
    if end is not None:
        return end
    kern = mkz_kernel(n, q, x, policy=policy)
    vals = f(_mkz_nodes(kern.ks.astype(float), n, q))
    return _as_result(np.sum(kern.weights * vals), kern, f.bound())


class _InnerAverages:
    """Durrmeyer node values g_k(f), k = 0, 1, ..., cached per function.

    For q < 1 the average uses the Jackson nodes t_j = q^j, j < J, with J
    fixed by the k = 1 case (the slowest-decaying integrand); numerator and
    q-beta normaliser share those nodes, so the weights sum to one for every
    k.  q = 0 puts all inner mass at t = 1.  q = 1 is the classical limit,
    the Beta(k, n) average, done by Gauss–Jacobi quadrature.
    """

    def __init__(self, n: int, q: float, tail_tol: float, max_terms: int):
        self.n, self.q = n, q
        self.deficit = False
        self._cache: dict[str, np.ndarray] = {}
        if 0.0 < q < 1.0:
            lq = math.log(q)
            need = math.ceil((math.log(tail_tol) - math.log(q_integer(n, q))) / lq)
            need = max(need, 8)
            if need > max_terms:
                self.deficit = True
                need = max_terms
            self.J = need
            nodes, w1 = q_beta_rule(1, n, q, need)
            self.nodes = nodes
            self.logb = np.log(w1)
            self.jlq = np.arange(need, dtype=float) * lq
            self.spread = float(np.max(self.logb) - self.logb[0])

    def weights(self, k0: int, k1: int) -> np.ndarray:
        """Normalised inner weights for k in [k0, k1), shape (k1-k0, J').

        Nodes whose weight is below exp(-45) times the largest one for every
        k in the block are dropped (J' <= J).
        """
        J = self.J
        if k0 > 1:
            J = min(J, int(math.ceil((45.0 + self.spread) / ((k0 - 1) * -self.jlq[1]))) + 2)
        k = np.arange(k0, k1, dtype=float)[:, None]
        logp = self.logb[None, :J] + (k - 1.0) * self.jlq[None, :J]
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)

    def _gauss_jacobi(self, k0: int, k1: int, m: int = _GAUSS_JACOBI_ORDER):
        """Nodes/weights on [0, 1] for the Beta(k, n) densities, k in [k0, k1)."""
        a = float(self.n - 1)  # exponent of (1 - t)
        b = np.arange(k0, k1, dtype=float)[:, None] - 1.0  # exponent of t
        j = np.arange(m, dtype=float)[None, :]
        s = 2.0 * j + a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            diag = (b * b - a * a) / (s * (s + 2.0))
        diag[:, 0] = ((b - a) / (a + b + 2.0))[:, 0]
        jj = j[:, 1:]
        s1 = s[:, 1:]
        off = np.sqrt(4.0 * jj * (jj + a) * (jj + b) * (jj + a + b)
                      / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0)))
        mats = np.zeros((k1 - k0, m, m))
        idx = np.arange(m)
        mats[:, idx, idx] = diag
        mats[:, idx[1:], idx[:-1]] = off
        mats[:, idx[:-1], idx[1:]] = off
        xs, vecs = np.linalg.eigh(mats)
        return 0.5 * (1.0 + xs), vecs[:, 0, :] ** 2

    def _compute(self, funcs: Sequence[Func1D], k0: int, k1: int) -> np.ndarray:
        out = np.empty((len(funcs), k1 - k0))
        lo = k0
        if lo == 0:
            out[:, 0] = [float(f(0.0)) for f in funcs]
            lo = 1
        if lo >= k1:
            return out
        if self.q == 0.0:
            out[:, lo - k0:] = np.array([float(f(1.0)) for f in funcs])[:, None]
            return out
        if self.q < 1.0:
            fv = np.stack([f(self.nodes) for f in funcs])
            step = 256
        else:
            step = 4096
        for s in range(lo, k1, step):
            e = min(s + step, k1)
            if self.q < 1.0:
                p = self.weights(s, e)
                out[:, s - k0:e - k0] = fv[:, :p.shape[1]] @ p.T
            else:
                quad = [r for r, f in enumerate(funcs) if f.poly is None]
                for r, f in enumerate(funcs):
                    if f.poly is not None:
                        out[r, s - k0:e - k0] = self._beta_average(f.poly, s, e)
                if quad:
                    t, w = self._gauss_jacobi(s, e)
                    for r in quad:
                        out[r, s - k0:e - k0] = np.sum(w * funcs[r](t), axis=1)
        return out

    def _beta_average(self, pp: PiecewisePoly, k0: int, k1: int) -> np.ndarray:
        """E f(T), T ~ Beta(k, n), k in [k0, k1), for piecewise-polynomial f.

        E[T^j; a <= T < b] = E[T^j] (I_b(k+j, n) - I_a(k+j, n)) with I the
        regularised incomplete beta function.
        """
        k = np.arange(k0, k1, dtype=float)
        d = max(len(c) for c in pp.coeffs)
        mom = np.ones((d, k.size))
        for j in range(1, d):
            mom[j] = mom[j - 1] * (k + j - 1) / (k + self.n + j - 1)
        if not pp.breaks:
            return np.asarray(pp.coeffs[0]) @ mom[:len(pp.coeffs[0])]
        out = np.zeros(k.size)
        edges = pp.edges
        for p, c in enumerate(pp.coeffs):
            a, b = edges[p], edges[p + 1]
            for j, cj in enumerate(c):
                if cj == 0.0:
                    continue
                hi = 1.0 if b >= 1.0 else betainc(k + j, self.n, b)
                lo = 0.0 if a <= 0.0 else betainc(k + j, self.n, a)
                out += cj * mom[j] * (hi - lo)
        return out

    def values(self, funcs: Sequence[Func1D], kmax: int) -> np.ndarray:
        """g_k(f) for k = 0..kmax, one row per function."""
        short: dict[int, list[Func1D]] = {}
        for f in {f.name: f for f in funcs}.values():
            have = self._cache.get(f.name)
            size = 0 if have is None else len(have)
            if size <= kmax:
                short.setdefault(size, []).append(f)
        for size, group in short.items():
            new_size = max(kmax + 1, 2 * size)
            extra = self._compute(group, size, new_size)
            for f, row in zip(group, extra):
                have = self._cache.get(f.name)
                self._cache[f.name] = row if have is None else np.concatenate((have, row))
        return np.stack([self._cache[f.name][: kmax + 1] for f in funcs])


_INNER_CACHE: dict = {}
_INNER_CACHE_SIZE = 16  # one entry can hold ~10^5 k values per function


def _inner(n: int, q: float, tail_tol: float, max_terms: int) -> _InnerAverages:
    key = (n, q, tail_tol, max_terms)
    obj = _INNER_CACHE.get(key)
    if obj is None:
        if len(_INNER_CACHE) >= _INNER_CACHE_SIZE:
            _INNER_CACHE.clear()
        obj = _INNER_CACHE[key] = _InnerAverages(n, q, tail_tol, max_terms)
    return obj


def _durrmeyer_eval(f, n, q, x, policy):
    end = _endpoint(f, x)
    if end is not None:
        return end
    kern = mkz_kernel(n, q, x, policy=policy)
    inner = _inner(n, q, 0.25 * policy.tail_tol, int(policy.max_terms))
    g = inner.values([f], int(kern.ks[-1]))[0, kern.k_lo:]
    res = _as_result(np.sum(kern.weights * g), kern, f.bound())
    if inner.deficit and not res.deficit:
        res = SeriesResult(res.value, res.terms_used, res.tail_bound, True)
    return res


def durrmeyer_q(f: Func1D, n: int, q: float, x: float, policy=DEFAULT_POLICY) -> SeriesResult:
    """Durrmeyer q-MKZ operator D_n^q(f; x) for 0 < q < 1."""
    if n < 1:
        raise QDomainError(f"n must be >= 1, got {n}")
    q = check_q(q, below_one=True)
    return _durrmeyer_eval(f, n, q, _check_x(x), policy)


def durrmeyer_classical(f: Func1D, n: int, x: float, policy=DEFAULT_POLICY) -> SeriesResult:
    """q = 1 limit of the Durrmeyer operator (ordinary Beta-density averages)."""
    if n < 1:
        raise QDomainError(f"n must be >= 1, got {n}")
    return _durrmeyer_eval(f, n, 1.0, _check_x(x), policy)


@dataclass(frozen=True)
class OperatorFamily:
    """A sequence of operators L_n, each built with q = q_n.

    ``L_0`` is the zero operator.  For the Durrmeyer kind, indices with
    q_n = 1 use the classical (ordinary-integral) limit and q_n = 0 the
    degenerate all-mass-at-one inner average.
    """

    kind: str
    qseq: QSequence = field(default_factory=lambda: constant_qseq(1.0))
    policy: TruncationPolicy = DEFAULT_POLICY

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator family {self.kind!r}; choose from {KINDS}")

    @property
    def is_durrmeyer(self) -> bool:
        return self.kind == "durrmeyer-q-mkz"

    def q(self, n: int) -> float:
        return 1.0 if self.kind == "classical-mkz" else float(self.qseq(n))

    def evaluate(self, n: int, xs, funcs: Sequence[Func1D], central: bool = False):
        """Evaluate L_n on several functions over an x-grid.

        Returns ``(values, tails, deficit)``: ``values`` has one row per
        function (plus a final row holding L_n((t-x)^2; x) when ``central``),
        ``tails`` the neglected kernel mass at each x.
        """
        xs = np.asarray(xs, dtype=float)
        rows = len(funcs) + (1 if central else 0)
        values = np.zeros((rows, xs.size))
        tails = np.zeros(xs.size)
        if n == 0:
            return values, tails, False
        q = self.q(n)
        deficit = False
        inner = None
        if self.is_durrmeyer:
            inner = _inner(n, q, 0.25 * self.policy.tail_tol, int(self.policy.max_terms))
            deficit = inner.deficit
        walker = _LogBinomWalker(n, q)
        for i, x in enumerate(xs):
            if x == 1.0 or x == 0.0:
                for r, f in enumerate(funcs):
                    values[r, i] = float(f(x))
                continue
            kern = mkz_kernel(n, q, x, self.policy.tail_tol, int(self.policy.max_terms),
                              log_binom=walker)
            deficit |= kern.deficit
            tails[i] = kern.tail
            w = kern.weights
            kmax = int(kern.k_lo + len(w) - 1)
            if inner is None:
                t = _mkz_nodes(kern.ks.astype(float), n, q)
                if funcs:
                    values[:len(funcs), i] = np.stack([f(t) for f in funcs]) @ w
                if central:
                    values[-1, i] = np.sum(w * (t - x) ** 2)
            else:
                need = list(funcs) + ([e1, e2] if central else [])
                g = inner.values(need, kmax)[:, kern.k_lo:]
                if funcs:
                    values[:len(funcs), i] = g[:len(funcs)] @ w
                if central:
                    g1, g2 = g[-2], g[-1]
                    values[-1, i] = np.sum(w * (g2 - 2.0 * x * g1 + x * x))
        if deficit:
            self.policy.exhausted(f"{self.kind} n={n}")
        return values, tails, deficit

    def apply(self, f: Func1D, n: int, x: float) -> SeriesResult:
        vals, tails, deficit = self.evaluate(n, [x], [f])
        return SeriesResult(float(vals[0, 0]), 0, f.bound() * float(tails[0]), deficit)


def qmkz_e2_envelope(n: int, q: float, x):
    """(lower, upper) bounds on M_n^q(e2; x): x^2 and x/[n-1] + x^2."""
    x = np.asarray(x, dtype=float)
    return x * x, x / q_integer(n - 1, q) + x * x


def durrmeyer_e2_envelope(n: int, q: float, x):
    """(lower, upper) bounds on D_n^q(e2; x) - x^2."""
    x = np.asarray(x, dtype=float)
    b2, b3 = q_integer(2, q), q_integer(3, q)
    bn1, bn2 = q_integer(n - 1, q), q_integer(n - 2, q)
    upper = b2 * x * (1 - x) * (1 - q**n * x) / bn1
    corr = x * b2 * b3 * q ** (n - 1) / (bn1 * bn2) * (1 - x) * (1 - q * x) * (1 - q**n * x)
    return upper - corr, upper


@dataclass
class MomentReport:
    n: int
    q: float
    grid: np.ndarray
    e0_err: float
    e1_err: float
    e2_lower_violation: float
    e2_upper_violation: float
    deficit_flag: bool
    moments: np.ndarray = field(repr=False, default=None)  # rows e0, e1, e2
    lower: np.ndarray = field(repr=False, default=None)
    upper: np.ndarray = field(repr=False, default=None)

    def ok(self, tol: float = 1e-9, slack: float = 1e-9) -> bool:
        return (self.e0_err <= tol and self.e1_err <= tol
                and self.e2_lower_violation <= slack and self.e2_upper_violation <= slack)


def moment_report(family: OperatorFamily, n: int, grid) -> MomentReport:
    """Test-function moments of L_n over ``grid`` against the moment envelopes.

    For the MKZ kinds the e2 check is x^2 <= L(e2) <= x/[n-1] + x^2; for the
    Durrmeyer kind it is the two-sided envelope on D(e2) - x^2.  Violations
    are the largest amounts by which a bound is broken (0 when none).
    """
    if n < 3:
        raise QDomainError(f"moment envelopes need n >= 3, got {n}")
    grid = np.asarray(grid, dtype=float)
    q = family.q(n)
    vals, _, deficit = family.evaluate(n, grid, [e0, e1, e2])
    m0, m1, m2 = vals
    e0_err = float(np.max(np.abs(m0 - 1.0)))
    e1_err = float(np.max(np.abs(m1 - grid)))
    if family.is_durrmeyer:
        lo, hi = durrmeyer_e2_envelope(n, q, grid)
        excess = m2 - grid * grid
    else:
        lo, hi = qmkz_e2_envelope(n, q, grid)
        excess = m2
    lower_v = float(np.max(np.maximum(lo - excess, 0.0)))
    upper_v = float(np.max(np.maximum(excess - hi, 0.0)))
    return MomentReport(n, q, grid, e0_err, e1_err, lower_v, upper_v, deficit,
                        vals, lo, hi)


def central_second_moment(family: OperatorFamily, n: int, x: float) -> float:
    """L_n((t - x)^2; x), nonnegative by positivity."""
    if n < 3:
        raise QDomainError(f"n must be >= 3, got {n}")
    vals, _, _ = family.evaluate(n, [x], [], central=True)
    return float(vals[-1, 0])

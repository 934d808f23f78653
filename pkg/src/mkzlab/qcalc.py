"""q-calculus primitives: q-integers, q-factorials, q-binomials, q-shifted
factorials, the Jackson q-integral and the q-beta function.

Everything here is a pure function of its arguments.  Infinite series are
truncated under a :class:`TruncationPolicy` and returned as a
:class:`SeriesResult` carrying the certified tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "QDomainError",
    "BudgetExhausted",
    "TruncationPolicy",
    "SeriesResult",
    "DEFAULT_POLICY",
    "check_q",
    "q_integer",
    "q_integers",
    "log_q_integers",
    "q_factorial",
    "q_binomial",
    "q_binomial_quotient",
    "q_pochhammer",
    "log_q_pochhammer",
    "jackson_rule",
    "q_integral",
    "q_beta",
    "q_beta_rule",
]

# below this gap the closed form for [n]_q is replaced by direct summation
_NEAR_ONE = 1e-8
_SUP_SAMPLE = 64


class QDomainError(ValueError):
    """Argument outside the domain of a q-calculus operation."""


class BudgetExhausted(RuntimeError):
    """A truncated series hit ``max_terms`` before reaching its tolerance."""


@dataclass(frozen=True)
class TruncationPolicy:
    tail_tol: float = 1e-12
    max_terms: int = 10**6
    on_budget_exhausted: str = "flag"  # "flag" or "error"

    def __post_init__(self):
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol}")
        if int(self.max_terms) < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")
        if self.on_budget_exhausted not in ("flag", "error"):
            raise ValueError("on_budget_exhausted must be 'flag' or 'error'")

    def with_tol(self, tail_tol: float) -> "TruncationPolicy":
        return TruncationPolicy(tail_tol, self.max_terms, self.on_budget_exhausted)

    def exhausted(self, what: str) -> bool:
        """Apply the budget policy; returns the deficit flag or raises."""
        if self.on_budget_exhausted == "error":
            raise BudgetExhausted(f"{what}: max_terms={self.max_terms} reached")
        return True


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class SeriesResult:
    """Truncated series value.

    ``tail_bound`` bounds the neglected part of the series.  It is at most
    the policy's ``tail_tol`` unless ``deficit_flag`` is set.  When the bound
    rests on a sampled (rather than caller-supplied) sup of the summand,
    ``estimated_bound`` is set.
    """

    value: float
    terms_used: int
    tail_bound: float
    deficit_flag: bool = False
    estimated_bound: bool = False

    def __float__(self):
        return float(self.value)


def check_q(q, *, allow_zero=False, below_one=False) -> float:
    q = float(q)
    lo_ok = q >= 0 if allow_zero else q > 0
    hi_ok = q < 1 if below_one else q <= 1
    if not (lo_ok and hi_ok and math.isfinite(q)):
        rng = ("[0, " if allow_zero else "(0, ") + ("1)" if below_one else "1]")
        raise QDomainError(f"q must lie in {rng}, got {q!r}")
    return q


def _check_nonneg_int(n, name="n") -> int:
    if int(n) != n or n < 0:
        raise QDomainError(f"{name} must be a nonnegative integer, got {n!r}")
    return int(n)


def q_integer(n: int, q: float) -> float:
    """[n]_q = 1 + q + ... + q^(n-1), with [0]_q = 0."""
    n = _check_nonneg_int(n)
    q = check_q(q, allow_zero=True)
    if n == 0:
        return 0.0
    if q == 1.0:
        return float(n)
    if q == 0.0:
        return 1.0
    if 1.0 - q < _NEAR_ONE:
        return math.fsum(q**k for k in range(n))
    return -math.expm1(n * math.log(q)) / (1.0 - q)


def q_integers(m, q: float) -> np.ndarray:
    """Vectorised [m]_q for an integer array ``m`` (q in [0, 1])."""
    m = np.asarray(m, dtype=float)
    if q == 1.0:
        return m.copy()
    if q == 0.0:
        return (m > 0).astype(float)
    # expm1 keeps full relative accuracy right up to q -> 1
    return -np.expm1(m * math.log(q)) / (1.0 - q)


def log_q_integers(m, q: float) -> np.ndarray:
    """log [m]_q for positive integers m."""
    m = np.asarray(m, dtype=float)
    if q == 1.0:
        return np.log(m)
    if q == 0.0:
        return np.zeros_like(m)
    return np.log(-np.expm1(m * math.log(q))) - math.log1p(-q)


def q_factorial(n: int, q: float) -> float:
    n = _check_nonneg_int(n)
    q = check_q(q, allow_zero=True)
    out = 1.0
    for k in range(1, n + 1):
        out *= q_integer(k, q)
    if math.isinf(out):
        raise OverflowError(f"[{n}]_q! overflows a double at q={q}")
    return out


def q_binomial(n: int, r: int, q: float) -> float:
    """Gaussian binomial [n choose r]_q by the term-ratio recurrence.

    Uses min(r, n-r) multiplicative steps [n-r+i]/[i]; factorials are never
    formed.
    """
    n = _check_nonneg_int(n)
    r = _check_nonneg_int(r, "r")
    if r > n:
        raise QDomainError(f"q_binomial needs n >= r, got n={n}, r={r}")
    q = check_q(q, allow_zero=True)
    r = min(r, n - r)
    out = 1.0
    for i in range(1, r + 1):
        out *= q_integer(n - r + i, q) / q_integer(i, q)
    if math.isinf(out):
        raise OverflowError(f"[{n} choose {r}]_q overflows a double at q={q}")
    return out


def q_binomial_quotient(n: int, r: int, q: float) -> float:
    """Reference value [n]!/([r]![n-r]!) from full q-factorials (small n only)."""
    if r > n:
        raise QDomainError(f"q_binomial needs n >= r, got n={n}, r={r}")
    return q_factorial(n, q) / (q_factorial(r, q) * q_factorial(n - r, q))


def q_pochhammer(t: float, q: float, n: int) -> float:
    """(t; q)_n = prod_{j<n} (1 - t q^j); the empty product is 1."""
    n = _check_nonneg_int(n)
    q = check_q(q, allow_zero=True)
    out = 1.0
    qj = 1.0
    for _ in range(n):
        out *= 1.0 - t * qj
        qj *= q
    return out


def log_q_pochhammer(t: float, q: float, n: int) -> float:
    """log (t; q)_n for 0 <= t < 1 (every factor positive)."""
    if n == 0:
        return 0.0
    if q == 1.0:
        return n * math.log1p(-t)
    if q == 0.0:
        return math.log1p(-t)
    j = np.arange(n, dtype=float)
    return math.fsum(np.log1p(-t * np.exp(j * math.log(q))))


def jackson_rule(q: float, a: float = 1.0, n_nodes: int = 64):
    """Nodes a q^j and weights a (1-q) q^j, j < n_nodes, of the Jackson sum."""
    q = check_q(q, below_one=True)
    j = np.arange(n_nodes, dtype=float)
    qj = np.power(q, j)
    return a * qj, a * (1.0 - q) * qj


def _eval(g, t):
    vals = np.asarray(g(t), dtype=float)
    return np.broadcast_to(vals, np.shape(t)).astype(float, copy=False)


def q_integral(g: Callable, a: float = 1.0, q: float = 0.5, policy=DEFAULT_POLICY,
               sup_bound: float | None = None) -> SeriesResult:
    """Jackson q-integral of ``g`` over [0, a].

    ``g`` must accept numpy arrays.  The neglected tail after N nodes is at
    most ``a * sup|g| * q**N``; when ``sup_bound`` is not supplied, sup|g| is
    taken from the evaluated nodes (at least the first 64).
    """
    q = check_q(q, below_one=True)
    if not a > 0:
        raise QDomainError(f"upper limit a must be positive, got {a}")
    tol = policy.tail_tol
    max_terms = int(policy.max_terms)

    n0 = min(_SUP_SAMPLE, max_terms)
    nodes, weights = jackson_rule(q, a, n0)
    vals = _eval(g, nodes)
    estimated = sup_bound is None
    sup = float(np.max(np.abs(vals))) if estimated else float(sup_bound)

    if sup == 0.0:
        need = n0
    else:
        need = math.ceil(math.log(tol / (a * sup)) / math.log(q)) if a * sup > tol else 1
        need = max(need, 1)
    deficit = False
    if need > max_terms:
        deficit = policy.exhausted("q_integral")
        need = max_terms

    terms = [weights[: min(need, n0)] * vals[: min(need, n0)]]
    start = n0
    while start < need:
        stop = min(need, start + 65536)
        j = np.arange(start, stop, dtype=float)
        qj = np.power(q, j)
        v = _eval(g, a * qj)
        if estimated:
            sup = max(sup, float(np.max(np.abs(v))))
        terms.append(a * (1.0 - q) * qj * v)
        start = stop
    value = math.fsum(np.concatenate(terms))
    tail = a * sup * q**need
    return SeriesResult(value, need, tail, deficit, estimated)


def q_beta_rule(m: int, n: int, q: float, n_nodes: int):
    """Jackson nodes and integrand-weighted weights for B_q(m, n).

    Returns ``(nodes, weights)`` with ``weights[j] = (1-q) q^j * t_j^(m-1)
    * (q t_j; q)_(n-1)`` at ``t_j = q^j``, so ``weights.sum()`` is the
    truncated B_q(m, n) and ``weights @ f(nodes)`` the truncated
    q-integral of ``t^(m-1) (qt;q)_(n-1) f(t)``.
    """
    q = check_q(q, below_one=True)
    if m < 1 or n < 1:
        raise QDomainError(f"q_beta needs m, n >= 1, got {m}, {n}")
    lq = math.log(q)
    j = np.arange(n_nodes, dtype=float)
    # log (q^{j+1}; q)_{n-1} via prefix sums of log(1 - q^i)
    i = np.arange(1, n_nodes + n, dtype=float)
    c = np.concatenate(([0.0], np.cumsum(np.log1p(-np.exp(i * lq)))))
    ji = np.arange(n_nodes)
    log_poch = c[ji + n - 1] - c[ji]
    logw = math.log1p(-q) + j * lq + (m - 1) * j * lq + log_poch
    return np.exp(j * lq), np.exp(logw)


def q_beta(m: int, n: int, q: float, policy=DEFAULT_POLICY) -> SeriesResult:
    """B_q(m, n) = int_0^1 t^(m-1) (qt; q)_(n-1) d_q t as a Jackson sum."""
    q = check_q(q, below_one=True)
    if m < 1 or n < 1:
        raise QDomainError(f"q_beta needs m, n >= 1, got {m}, {n}")
    # integrand in [0, 1]; tail after N nodes <= q^(mN)
    tol = policy.tail_tol
    need = max(1, math.ceil(math.log(tol) / (m * math.log(q))))
    deficit = False
    if need > policy.max_terms:
        deficit = policy.exhausted("q_beta")
        need = int(policy.max_terms)
    _, w = q_beta_rule(m, n, q, need)
    return SeriesResult(math.fsum(w), need, q ** (m * need), deficit)

"""Abel transform of real sequences, q-sequences and their diagnostics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .qcalc import DEFAULT_POLICY, SeriesResult, TruncationPolicy, q_integer

__all__ = [
    "QSequence",
    "constant_qseq",
    "gen_cube_qseq",
    "gen_prime_qseq",
    "inverse_square_qseq",
    "qseq_by_name",
    "is_perfect_cube",
    "is_prime",
    "prime_sieve",
    "inv_bracket",
    "durrmeyer_ratio",
    "abel_transform",
    "AbelProfile",
    "abel_profile",
    "default_schedule",
    "ClassicalReport",
    "classical_conditions_check",
    "DensityEstimate",
    "density_estimate",
]


@dataclass(frozen=True)
class QSequence:
    """n -> q_n with q_0 = 0 and q_n in (0, 1] for n >= 1.

    ``zero_at`` names an indicator of indices where q_n = 0 is allowed
    (the counterexample sequences); anywhere else a zero is rejected.
    """

    name: str
    rule: Callable[[int], float] = field(compare=False, repr=False)
    zero_at: Callable[[int], bool] | None = field(default=None, compare=False, repr=False)

    def __call__(self, n: int) -> float:
        n = int(n)
        if n < 0:
            raise ValueError(f"q-sequence index must be >= 0, got {n}")
        if n == 0:
            return 0.0
        q = float(self.rule(n))
        if q == 0.0 and self.zero_at is not None and self.zero_at(n):
            return q
        if not 0.0 < q <= 1.0:
            raise ValueError(f"{self.name}: q_{n} = {q} outside (0, 1]")
        return q

    def values(self, ns) -> np.ndarray:
        return np.array([self(int(n)) for n in ns], dtype=float)


def constant_qseq(c: float) -> QSequence:
    c = float(c)
    if not 0.0 < c <= 1.0:
        raise ValueError(f"constant q must lie in (0, 1], got {c}")
    return QSequence(f"const:{c!r}", lambda n: c)


def is_perfect_cube(n: int) -> bool:
    if n < 0:
        return False
    r = round(n ** (1.0 / 3.0))
    return any((r + d) ** 3 == n for d in (-1, 0, 1))


_SIEVE = np.zeros(0, dtype=bool)


def prime_sieve(limit: int) -> np.ndarray:
    """Boolean primality table for 0..limit (grown by doubling, then reused)."""
    global _SIEVE
    if limit >= len(_SIEVE):
        size = max(1024, 1 << int(limit).bit_length())
        s = np.ones(size + 1, dtype=bool)
        s[:2] = False
        for p in range(2, int(size**0.5) + 1):
            if s[p]:
                s[p * p::p] = False
        s.setflags(write=False)
        _SIEVE = s
    return _SIEVE[: limit + 1]


def is_prime(n: int) -> bool:
    return n >= 2 and bool(prime_sieve(n)[n])


def gen_cube_qseq() -> QSequence:
    """q_n = 0 at perfect cubes, 1 otherwise."""
    return QSequence("cube", lambda n: 0.0 if is_perfect_cube(n) else 1.0, is_perfect_cube)


def gen_prime_qseq() -> QSequence:
    """q_n = 0 at primes, 1 otherwise."""
    return QSequence("prime", lambda n: 0.0 if is_prime(n) else 1.0, is_prime)


def inverse_square_qseq() -> QSequence:
    """q_n = 1 - 1/n^2 (q_1 = 1), which satisfies the classical conditions."""
    return QSequence("inv-square", lambda n: 1.0 - 1.0 / (n * n) if n > 1 else 1.0)


def qseq_by_name(spec: str) -> QSequence:
    """Parse ``cube | prime | inv-square | const:<c>``."""
    if spec == "cube":
        return gen_cube_qseq()
    if spec == "prime":
        return gen_prime_qseq()
    if spec == "inv-square":
        return inverse_square_qseq()
    if spec.startswith("const:"):
        return constant_qseq(float(spec[len("const:"):]))
    raise KeyError(f"unknown q-sequence {spec!r}; choose cube, prime, inv-square or const:<c>")


def inv_bracket(qseq: QSequence) -> Callable[[int], float]:
    """n -> 1/[n-1]_{q_n} (meaningful for n >= 3; [m]_0 = 1 for m >= 1)."""
    return lambda n: 1.0 / q_integer(n - 1, qseq(n))


def durrmeyer_ratio(qseq: QSequence) -> Callable[[int], float]:
    """n -> (1 + q_n)/([n]_{q_n} - q_n^(n-1)), i.e. [2]/[n-1], for n >= 2."""
    def rule(n):
        q = qseq(n)
        return (1.0 + q) / (q_integer(n, q) - q ** (n - 1))
    return rule


def _terms_needed(y: float, start: int, bound: float, tol: float) -> int:
    """Smallest N >= 1 with bound * y**(start + N) <= tol."""
    if bound <= 0.0 or bound * y**start <= tol:
        return 1
    return max(1, math.ceil(math.log(tol / bound) / math.log(y)) - start)


def _seq_values(x, ns: np.ndarray) -> np.ndarray:
    # try the rule on the whole index array, else fall back to scalars
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", DeprecationWarning)
            v = np.asarray(x(ns), dtype=float)
        if v.shape == ns.shape:
            return v
    except (TypeError, ValueError, DeprecationWarning):
        pass
    return np.array([float(x(int(n))) for n in ns])


def abel_transform(x: Callable, y: float, start_index: int = 0, bound: float = 1.0,
                   policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesResult:
    """(1 - y) * sum_{j >= start_index} x_j y^j.

    The caller promises |x_j| <= ``bound`` from ``start_index`` on, so the
    neglected tail after N terms is at most bound * y^(start_index + N).
    """
    if not 0.0 < y < 1.0:
        raise ValueError(f"y must lie in (0, 1), got {y}")
    if start_index < 0:
        raise ValueError("start_index must be >= 0")
    n_terms = _terms_needed(y, start_index, bound, policy.tail_tol)
    deficit = False
    if n_terms > policy.max_terms:
        deficit = policy.exhausted(f"abel_transform at y={y}")
        n_terms = int(policy.max_terms)
    ns = np.arange(start_index, start_index + n_terms)
    xs = _seq_values(x, ns)
    terms = (1.0 - y) * xs * np.exp(ns * math.log(y))
    value = math.fsum(terms)
    return SeriesResult(value, n_terms, bound * y ** (start_index + n_terms), deficit)


def default_schedule(m_max: int = 10) -> list[float]:
    """y_m = 1 - 2^-m, m = 1..m_max."""
    return [1.0 - 2.0**-m for m in range(1, m_max + 1)]


@dataclass
class AbelProfile:
    y_schedule: list[float]
    values: list[float]
    tail_bounds: list[float]
    start_index: int
    terms_used: list[int] = field(default_factory=list)
    deficits: list[bool] = field(default_factory=list)

    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.values, self.values[1:]))


def abel_profile(x: Callable, schedule: Sequence[float], start_index: int = 0,
                 bound: float = 1.0, policy: TruncationPolicy = DEFAULT_POLICY) -> AbelProfile:
    schedule = [float(y) for y in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("y schedule must be strictly increasing")
    results = [abel_transform(x, y, start_index, bound, policy) for y in schedule]
    return AbelProfile(schedule, [r.value for r in results], [r.tail_bound for r in results],
                       start_index, [r.terms_used for r in results],
                       [r.deficit_flag for r in results])


@dataclass
class ClassicalReport:
    horizon: int
    max_power_gap: float  # max |1 - q_n^n| over n in [N/2, N]
    max_inv_bracket: float  # max 1/[n]_{q_n} over the same window
    power_tol: float
    bracket_tol: float

    @property
    def passes(self) -> bool:
        return self.max_power_gap <= self.power_tol and self.max_inv_bracket <= self.bracket_tol

    @property
    def verdict(self) -> str:
        return "passes" if self.passes else "fails"


def classical_conditions_check(qseq: QSequence, horizon: int = 1000, power_tol: float = 0.05,
                               bracket_tol: float = 0.05) -> ClassicalReport:
    """Finite-horizon proxy for q_n^n -> 1 and 1/[n]_{q_n} -> 0."""
    if horizon < 10:
        raise ValueError("horizon must be >= 10")
    ns = range(horizon // 2, horizon + 1)
    gap = 0.0
    inv = 0.0
    for n in ns:
        q = qseq(n)
        gap = max(gap, abs(1.0 - q**n))
        inv = max(inv, 1.0 / q_integer(n, q))
    return ClassicalReport(horizon, gap, inv, power_tol, bracket_tol)


@dataclass(frozen=True)
class DensityEstimate:
    N: int
    count: int

    @property
    def density(self) -> float:
        return self.count / self.N


def density_estimate(indicator: Callable[[int], bool], N: int) -> DensityEstimate:
    """Share of indices 1..N where ``indicator`` holds."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return DensityEstimate(N, sum(1 for n in range(1, N + 1) if indicator(n)))

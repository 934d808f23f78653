"""Abel-summed approximation errors of operator sequences.

The central quantity is the Abel-weighted error norm

    E(y) = (1 - y) * sup_x | sum_{n >= start} (L_n f - f)(x) y^n |,

estimated as a maximum over an x-grid.  Terms beyond N(y) are dropped with
the bound 2 ||f|| y^(N+1) (positivity and L_n e0 = 1 give ||L_n f|| <= ||f||).
The operator values L_n f(x) do not depend on y, so every y of a schedule is
served from one table of values.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .functions import Func1D
from .operators import OperatorFamily
from .qcalc import TruncationPolicy

__all__ = [
    "default_x_grid",
    "modulus_of_continuity",
    "omega_subadditivity_check",
    "OperatorTable",
    "operator_table",
    "abel_horizon",
    "korovkin_error_norm",
    "KorovkinRun",
    "korovkin_run",
    "korovkin_runs",
    "phi",
    "RateReport",
    "rate_report",
]

_OMEGA_MAX_STEP = 1.0 / 2048
_OMEGA_MIN_STEP = 1e-6


def default_x_grid(points: int = 101, x_max: float = 0.99, include_one: bool = True) -> np.ndarray:
    """Uniform grid on [0, x_max], plus the endpoint x = 1 where L_n f(1) = f(1)."""
    xs = np.linspace(0.0, x_max, points)
    return np.append(xs, 1.0) if include_one and x_max < 1.0 else xs


def _grid_step(xs) -> float:
    xs = np.sort(np.asarray(xs, dtype=float))
    return float(np.max(np.diff(xs))) if xs.size > 1 else 1.0


# ----------------------------------------------------------------- modulus

def modulus_of_continuity(f: Func1D, delta: float, resolution: float | None = None) -> float:
    """Grid estimate of sup_{|s-t| <= delta} |f(s) - f(t)| on [0, 1].

    Pairs (t, t + s) are scanned with t on a grid of spacing ``resolution``
    (default min(delta/4, 1/2048)) and s running over the multiples of the
    spacing below delta together with delta itself.  The result is a lower
    estimate converging as the resolution shrinks.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    h = min(delta / 4.0, _OMEGA_MAX_STEP) if resolution is None else float(resolution)
    if h > delta / 4.0 * (1 + 1e-12):
        raise ValueError("resolution must be at most delta/4")
    m = int(math.ceil(1.0 / h))
    t = np.linspace(0.0, 1.0, m + 1)
    ft = f(t)
    if delta >= 1.0:
        return float(np.max(ft) - np.min(ft))
    step = 1.0 / m
    best = 0.0
    for j in range(1, int(delta / step + 1e-9) + 1):
        best = max(best, float(np.max(np.abs(ft[j:] - ft[:-j]))))
    # exact shift delta, including the pair ending at 1
    s0 = t[t + delta <= 1.0]
    s0 = np.append(s0, 1.0 - delta)
    best = max(best, float(np.max(np.abs(f(s0 + delta) - f(s0)))))
    return best


def omega_subadditivity_check(f: Func1D, delta: float, c: float,
                              resolution: float | None = None) -> bool:
    """Check omega(f, c delta) <= (1 + floor(c)) omega(f, delta) at grid precision.

    Both sides are lower estimates; the comparison allows the possible
    underestimate of omega(f, delta), which is at most 2 omega(f, 2h).
    """
    if not (delta > 0 and c > 0):
        raise ValueError("delta and c must be positive")
    h = min(delta / 4.0, _OMEGA_MAX_STEP) if resolution is None else float(resolution)
    lhs = modulus_of_continuity(f, c * delta, min(h, c * delta / 4.0))
    w = modulus_of_continuity(f, delta, h)
    k = 1 + math.floor(c)
    slack = k * 2.0 * modulus_of_continuity(f, 2.0 * h, h / 2.0)
    return lhs <= k * w + slack


# ----------------------------------------------------------------- tables

@dataclass
class OperatorTable:
    """L_n f(x) for n = start..n_max (rows), functions, and x-grid."""

    ns: np.ndarray
    xs: np.ndarray
    values: np.ndarray  # (len(ns), rows, len(xs))
    tails: np.ndarray  # (len(ns), len(xs)) neglected kernel mass
    deficits: np.ndarray  # (len(ns),)


def operator_table(family: OperatorFamily, funcs: Sequence[Func1D], xs, start: int,
                   n_max: int, central: bool = False) -> OperatorTable:
    xs = np.asarray(xs, dtype=float)
    ns = np.arange(start, n_max + 1)
    rows = len(funcs) + (1 if central else 0)
    values = np.empty((ns.size, rows, xs.size))
    tails = np.empty((ns.size, xs.size))
    deficits = np.zeros(ns.size, dtype=bool)
    for i, n in enumerate(ns):
        values[i], tails[i], deficits[i] = family.evaluate(int(n), xs, funcs, central)
    return OperatorTable(ns, xs, values, tails, deficits)


def abel_horizon(y: float, bound: float, tol: float, start: int) -> int:
    """Smallest N >= start with 2 * bound * y^(N+1) <= tol."""
    if bound <= 0.0:
        return start
    n = math.ceil(math.log(tol / (2.0 * bound)) / math.log(y)) - 1
    return max(start, n)


def _abel_sum(y: float, ns: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """sum_n y^n rows[n, x] with compensated summation per x (ascending n)."""
    w = np.exp(ns * math.log(y))[:, None] * rows
    return np.array([math.fsum(col) for col in w.T])


def _inner_family(family: OperatorFamily, policy: TruncationPolicy | None):
    policy = family.policy if policy is None else policy
    inner = dataclasses.replace(family, policy=policy.with_tol(0.5 * policy.tail_tol))
    return inner, policy


# ----------------------------------------------------------------- Korovkin

@dataclass
class KorovkinRun:
    kind: str
    qseq: str
    f: str
    y_schedule: list[float]
    values: list[float]
    tail_bounds: list[float]
    horizons: list[int]
    deficits: list[bool]
    start_index: int
    grid_step: float
    x_grid: np.ndarray = field(repr=False, default=None)

    def decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.values, self.values[1:]))

    def verdict(self, threshold: float = math.inf, zero_tol: float | None = None) -> bool:
        """Consistent with Abel convergence along the schedule.

        Either every value is below ``zero_tol`` (default: twice the largest
        tail bound), or the values strictly decrease and the last one is at
        most ``threshold``.
        """
        if zero_tol is None:
            zero_tol = 2.0 * max(self.tail_bounds, default=0.0)
        if all(v <= zero_tol for v in self.values):
            return True
        return self.decreasing() and self.values[-1] <= threshold


def korovkin_runs(family: OperatorFamily, funcs: Sequence[Func1D], y_schedule: Sequence[float],
                  x_grid=None, start_index: int = 3,
                  policy: TruncationPolicy | None = None) -> dict[str, KorovkinRun]:
    """Abel-weighted error norms for several functions from one operator table."""
    xs = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    ys = [float(y) for y in y_schedule]
    if any(not 0.0 < y < 1.0 for y in ys):
        raise ValueError("every y must lie in (0, 1)")
    inner, policy = _inner_family(family, policy)
    tol = policy.tail_tol
    bounds = [f.bound() for f in funcs]
    horizon = {y: abel_horizon(y, max(bounds), 0.5 * tol, start_index) for y in ys}
    n_max = max(horizon.values())
    if n_max - start_index + 1 > policy.max_terms:
        policy.exhausted("korovkin horizon")
        n_max = start_index + int(policy.max_terms) - 1
    table = operator_table(inner, funcs, xs, start_index, n_max)
    fx = np.stack([f(xs) for f in funcs])
    out = {}
    for r, f in enumerate(funcs):
        vals, tails, hs, defs = [], [], [], []
        diff = table.values[:, r, :] - fx[r][None, :]
        for y in ys:
            sel = table.ns <= horizon[y]
            s = _abel_sum(y, table.ns[sel], diff[sel])
            vals.append(float((1.0 - y) * np.max(np.abs(s))))
            kernel_tail = (1.0 - y) * bounds[r] * float(np.max(_abel_sum(y, table.ns[sel], table.tails[sel])))
            tails.append(2.0 * bounds[r] * y ** (horizon[y] + 1) + kernel_tail)
            hs.append(int(min(horizon[y], n_max)))
            defs.append(bool(table.deficits[sel].any() or horizon[y] > n_max))
        out[f.name] = KorovkinRun(family.kind, family.qseq.name, f.name, ys, vals, tails, hs,
                                  defs, start_index, _grid_step(xs), xs)
    return out


def korovkin_run(family: OperatorFamily, f: Func1D, y_schedule: Sequence[float], x_grid=None,
                 start_index: int = 3, policy: TruncationPolicy | None = None) -> KorovkinRun:
    return korovkin_runs(family, [f], y_schedule, x_grid, start_index, policy)[f.name]


def korovkin_error_norm(family: OperatorFamily, f: Func1D, y: float, x_grid=None,
                        start_index: int = 3, policy: TruncationPolicy | None = None) -> float:
    """(1 - y) max_x |sum_{n >= start} (L_n f - f)(x) y^n| over the x-grid."""
    return korovkin_run(family, f, [y], x_grid, start_index, policy).values[0]


# ----------------------------------------------------------------- rates

def _phi_from_table(table: OperatorTable, y: float, horizon: int) -> float:
    sel = table.ns <= horizon
    s = _abel_sum(y, table.ns[sel], table.values[sel, -1, :])
    return math.sqrt(max(0.0, (1.0 - y) * float(np.max(s))))


def phi(family: OperatorFamily, y: float, x_grid=None, start_index: int = 3,
        policy: TruncationPolicy | None = None) -> float:
    """{(1 - y) sup_x sum_{n >= start} L_n((t - x)^2; x) y^n}^(1/2), grid sup.

    The central moments are at most 1, so stopping at N leaves at most
    y^(N+1) under the root.
    """
    if not 0.0 < y < 1.0:
        raise ValueError("y must lie in (0, 1)")
    xs = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    inner, policy = _inner_family(family, policy)
    horizon = abel_horizon(y, 0.5, policy.tail_tol, start_index)
    table = operator_table(inner, [], xs, start_index, horizon, central=True)
    return _phi_from_table(table, y, horizon)


@dataclass
class RateReport:
    kind: str
    qseq: str
    f: str
    y_schedule: list[float]
    lhs: list[float]
    phi: list[float]
    omega_at_phi: list[float]
    margin: list[float]  # 2 omega(f, phi) - lhs
    slack: list[float]
    omega_floor_used: list[bool]
    mu_ratio: list[float] | None = None
    tail_bounds: list[float] = field(default_factory=list)

    @property
    def rhs(self) -> list[float]:
        return [2.0 * w for w in self.omega_at_phi]

    def ok(self) -> bool:
        return all(m >= -s for m, s in zip(self.margin, self.slack))


def rate_report(family: OperatorFamily, f: Func1D, y_schedule: Sequence[float], x_grid=None,
                policy: TruncationPolicy | None = None, mu: Callable[[float], float] | None = None,
                start_index: int = 3, omega_resolution: float = _OMEGA_MAX_STEP) -> RateReport:
    """Compare the Abel error norm with 2 omega(f, phi(y)) along a schedule.

    ``mu`` is an optional gauge; lhs/mu(y) is tabulated without a verdict.
    When phi(y)/4 is below the smallest omega grid step the modulus is taken
    at 4 * 1e-6 instead and the row is flagged.
    """
    xs = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    ys = [float(y) for y in y_schedule]
    inner, policy = _inner_family(family, policy)
    tol = policy.tail_tol
    bound = f.bound()
    horizon = {y: abel_horizon(y, max(bound, 0.5), 0.5 * tol, start_index) for y in ys}
    n_max = max(horizon.values())
    table = operator_table(inner, [f], xs, start_index, n_max, central=True)
    fx = f(xs)
    lhs, phis, omegas, margins, slacks, floors, tails = [], [], [], [], [], [], []
    for y in ys:
        sel = table.ns <= horizon[y]
        s = _abel_sum(y, table.ns[sel], table.values[sel, 0, :] - fx[None, :])
        e = float((1.0 - y) * np.max(np.abs(s)))
        p = _phi_from_table(table, y, horizon[y])
        floor = p < 4.0 * _OMEGA_MIN_STEP
        delta = max(p, 4.0 * _OMEGA_MIN_STEP)
        h = min(omega_resolution, delta / 4.0)
        w = modulus_of_continuity(f, delta, h) if bound > 0.0 else 0.0
        kernel_tail = (1.0 - y) * bound * float(np.max(_abel_sum(y, table.ns[sel], table.tails[sel])))
        tail = 2.0 * bound * y ** (horizon[y] + 1) + kernel_tail
        grid = 2.0 * 2.0 * modulus_of_continuity(f, 2.0 * h, h / 2.0) if bound > 0.0 else 0.0
        lhs.append(e)
        phis.append(p)
        omegas.append(w)
        margins.append(2.0 * w - e)
        slacks.append(grid + tail + tol)
        floors.append(floor)
        tails.append(tail)
    ratio = None
    if mu is not None:
        ratio = [e / mu(y) if mu(y) != 0 else math.inf for e, y in zip(lhs, ys)]
    return RateReport(family.kind, family.qseq.name, f.name, ys, lhs, phis, omegas, margins,
                      slacks, floors, ratio, tails)

"""Named continuous test functions on [0, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["Func1D", "PiecewisePoly", "polynomial", "e0", "e1", "e2", "sinpi", "abshalf", "const", "monomial",
           "by_name", "BUNDLED"]


@dataclass(frozen=True)
class PiecewisePoly:
    """sum_j coeffs[p][j] t^j on the p-th interval cut out by ``breaks``."""

    breaks: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.breaks) + 1:
            raise ValueError("need one coefficient tuple per piece")
        if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must increase")

    @property
    def edges(self) -> tuple[float, ...]:
        return (0.0,) + tuple(self.breaks) + (1.0,)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        piece = np.searchsorted(np.asarray(self.breaks), t, side="right")
        out = np.zeros_like(t)
        for p, c in enumerate(self.coeffs):
            sel = piece == p
            out[sel] = np.polynomial.polynomial.polyval(t[sel], c)
        return out


def polynomial(*coeffs: float) -> PiecewisePoly:
    return PiecewisePoly((), (tuple(float(c) for c in coeffs),))


def _sinpi_series(degree: int = 41) -> PiecewisePoly:
    # Maclaurin polynomial; on [0, 1] the remainder is below pi^43/43! < 1e-20
    c = [0.0] * (degree + 1)
    for j in range(1, degree + 1, 2):
        c[j] = (-1) ** (j // 2) * math.pi**j / math.factorial(j)
    return polynomial(*c)


@dataclass(frozen=True)
class Func1D:
    """A real function on [0, 1] evaluated on numpy arrays.

    ``sup_bound`` is a caller-known bound on |f| over [0, 1]; when absent,
    :meth:`bound` samples a 1025-point grid.  ``poly`` optionally gives f as
    a piecewise polynomial (equal to ``fn`` to double precision), which lets
    integral operators average f in closed form.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    sup_bound: float | None = None
    poly: PiecewisePoly | None = field(default=None, compare=False, repr=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.fn(x), dtype=float)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).copy()
        return out

    def bound(self) -> float:
        if self.sup_bound is not None:
            return float(self.sup_bound)
        return float(np.max(np.abs(self(np.linspace(0.0, 1.0, 1025)))))


def monomial(i: int) -> Func1D:
    return Func1D(f"e{i}", lambda x: x**i, 1.0, polynomial(*((0.0,) * i + (1.0,))))


e0 = Func1D("e0", lambda x: np.ones_like(x), 1.0, polynomial(1.0))
e1 = Func1D("e1", lambda x: x, 1.0, polynomial(0.0, 1.0))
e2 = Func1D("e2", lambda x: x * x, 1.0, polynomial(0.0, 0.0, 1.0))
sinpi = Func1D("sinpi", lambda x: np.sin(np.pi * x), 1.0, _sinpi_series())
abshalf = Func1D("abshalf", lambda x: np.abs(x - 0.5), 0.5,
                 PiecewisePoly((0.5,), ((0.5, -1.0), (-0.5, 1.0))))


def const(c: float) -> Func1D:
    c = float(c)
    return Func1D(f"const:{c!r}", lambda x: np.full_like(x, c), abs(c), polynomial(c))


BUNDLED = {f.name: f for f in (e0, e1, e2, sinpi, abshalf)}


def by_name(name: str) -> Func1D:
    """Resolve ``e0 | e1 | e2 | sinpi | abshalf | const:<c>``."""
    if name in BUNDLED:
        return BUNDLED[name]
    if name.startswith("const:"):
        try:
            return const(float(name[len("const:"):]))
        except ValueError:
            pass
    raise KeyError(f"unknown function {name!r}; choose from "
                   f"{', '.join(BUNDLED)} or const:<c>")

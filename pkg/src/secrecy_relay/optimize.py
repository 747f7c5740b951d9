"""Deterministic derivative-free search.

Two tools live here: :func:`grid_refine`, a coarse-to-fine grid search over a
box with optional coupling constraints, and :func:`simplex_grid`, which
enumerates probability vectors whose entries are multiples of ``1/k``.

Objectives are *grid objectives*: they receive one 1-D coordinate array per
parameter and return the tensor of values on the Cartesian product, with
``nan`` (or ``-inf``) marking infeasible points.  Use :func:`pointwise` to
adapt a scalar function.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError, InfeasibleError, ValidationError

__all__ = [
    "BoxSpec",
    "SearchReport",
    "grid_refine",
    "pointwise",
    "simplex_grid",
    "simplex_array",
    "simplex_count",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class BoxSpec:
    """Named box bounds plus coupling constraints.

    Each constraint is called with one broadcastable array per parameter
    (an open mesh, ``np.ix_`` style) and returns a boolean mask of feasible
    points.
    """

    names: tuple
    lower: tuple
    upper: tuple
    constraints: tuple = ()

    def __post_init__(self):
        names = tuple(self.names)
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if not (len(names) == len(lower) == len(upper)) or not names:
            raise ValidationError("names, lower and upper must have the same non-zero length")
        for n, lo, hi in zip(names, lower, upper):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValidationError(f"bad bounds for {n}: [{lo}, {hi}]")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self._probe():
            raise InfeasibleError(f"no feasible corner or center point in box {self}")

    @classmethod
    def from_bounds(cls, bounds: dict, constraints=()) -> "BoxSpec":
        names = tuple(bounds)
        return cls(
            names,
            tuple(bounds[n][0] for n in names),
            tuple(bounds[n][1] for n in names),
            tuple(constraints),
        )

    @property
    def ndim(self) -> int:
        return len(self.names)

    def feasible(self, mesh) -> np.ndarray:
        shape = np.broadcast_shapes(*(np.shape(m) for m in mesh))
        ok = np.ones(shape, dtype=bool)
        for con in self.constraints:
            ok &= np.broadcast_to(np.asarray(con(*mesh), dtype=bool), shape)
        return ok

    def _probe(self) -> bool:
        axes = [np.unique([lo, 0.5 * (lo + hi), hi]) for lo, hi in zip(self.lower, self.upper)]
        return bool(self.feasible(np.ix_(*axes)).any())


@dataclass
class SearchReport:
    best_point: dict
    best_value: float
    evaluations: int
    converged: bool
    levels_completed: int
    level_values: list = field(default_factory=list)


def pointwise(f: Callable[..., float]) -> Callable[..., np.ndarray]:
    """Lift a scalar objective ``f(x0, x1, ...)`` to a grid objective."""

    def grid(*axes):
        out = np.empty(tuple(len(a) for a in axes))
        for idx in itertools.product(*(range(len(a)) for a in axes)):
            out[idx] = f(*(float(a[i]) for a, i in zip(axes, idx)))
        return out

    return grid


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    a = np.linspace(lo, hi, n)
    a[-1] = hi
    return a


def grid_refine(
    objective: Callable[..., np.ndarray],
    box: BoxSpec,
    levels: int = 3,
    resolution: int | Sequence[int] = 51,
    budget: int = DEFAULT_BUDGET,
    window: float = 1.0,
) -> SearchReport:
    """Maximize ``objective`` over ``box`` by repeated grid scans.

    Level 0 scans the whole box.  Each later level scans a box spanning one
    previous grid step either side of the incumbent (clipped to the original
    bounds) at the same resolution.  Infeasible points are skipped.  Ties go
    to the lexicographically smallest grid index, and the incumbent is only
    replaced by a strictly better value, so the result never falls below
    the level-0 optimum.

    Raises
    ------
    InfeasibleError
        When level 0 contains no feasible point.
    """
    if levels < 1:
        raise ValidationError(f"levels must be >= 1, got {levels}")
    res = [int(resolution)] * box.ndim if np.isscalar(resolution) else [int(r) for r in resolution]
    if len(res) != box.ndim or min(res) < 2:
        raise ValidationError(f"need one resolution >= 2 per axis, got {resolution}")

    lower = np.array(box.lower)
    upper = np.array(box.upper)
    lo, hi = lower.copy(), upper.copy()
    best_x = None
    best_v = -np.inf
    evaluations = 0
    level_values = []
    completed = 0

    for level in range(levels):
        axes = [_axis(a, b, n) for a, b, n in zip(lo, hi, res)]
        count = math.prod(len(a) for a in axes)
        if evaluations + count > budget:
            if level == 0:
                raise BudgetExceededError(
                    f"level-0 grid has {count} points, budget is {budget}"
                )
            break
        values = np.asarray(objective(*axes), dtype=float)
        evaluations += count
        mesh = np.ix_(*axes)
        values = np.where(box.feasible(mesh) & np.isfinite(values), values, -np.inf)
        flat = int(np.argmax(values))
        v = float(values.flat[flat])
        if not np.isfinite(v):
            if level == 0:
                raise InfeasibleError("no feasible point on the level-0 grid")
        elif v > best_v:
            idx = np.unravel_index(flat, values.shape)
            best_x = np.array([a[i] for a, i in zip(axes, idx)])
            best_v = v
        level_values.append(best_v)
        completed += 1

        steps = np.array([(b - a) / (n - 1) for a, b, n in zip(lo, hi, res)])
        lo = np.maximum(best_x - window * steps, lower)
        hi = np.minimum(best_x + window * steps, upper)

    return SearchReport(
        best_point=dict(zip(box.names, (float(x) for x in best_x))),
        best_value=best_v,
        evaluations=evaluations,
        converged=completed == levels,
        levels_completed=completed,
        level_values=level_values,
    )


def simplex_count(dim: int, k: int) -> int:
    """Number of type-``k`` pmfs on ``dim`` symbols, ``C(k+dim-1, dim-1)``."""
    return math.comb(k + dim - 1, dim - 1)


def _compositions(dim: int, k: int) -> Iterator[tuple]:
    if dim == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(dim - 1, k - first):
            yield (first,) + rest


def simplex_grid(dim: int, k: int, budget: int = DEFAULT_BUDGET) -> Iterator[np.ndarray]:
    """Yield every pmf on ``dim`` symbols with entries in ``{0, 1/k, ..., 1}``.

    Order is lexicographic in the integer numerators.
    """
    if dim < 1 or k < 1:
        raise ValidationError(f"need dim >= 1 and k >= 1, got dim={dim}, k={k}")
    n = simplex_count(dim, k)
    if n > budget:
        raise BudgetExceededError(
            f"simplex of dimension {dim} at k={k} has {n} points, budget is {budget}"
        )
    return (np.array(c, dtype=float) / k for c in _compositions(dim, k))


def simplex_array(dim: int, k: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """All of :func:`simplex_grid` stacked into an ``(n, dim)`` array."""
    return np.array(list(simplex_grid(dim, k, budget))).reshape(-1, dim)

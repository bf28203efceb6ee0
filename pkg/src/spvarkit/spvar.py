"""Sample-persistence variable fixing.

Spins that keep one value across the lowest-energy part of a sample are
clamped to that value and folded out of the problem.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .model import DimensionError, IsingProblem, Sample
from .reduction import ReducedProblem, apply_fix

_EPS = 1e-12


@dataclass(frozen=True)
class SpvarParams:
    fixing_threshold: float = 1.0
    elite_threshold: float = 0.2
    adaptive_elite: bool = False
    correlation_threshold: float = 1.0
    correlation_elite_threshold: float = 0.2

    def __post_init__(self):
        for name in ("fixing_threshold", "elite_threshold", "correlation_threshold",
                     "correlation_elite_threshold"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")


@dataclass(frozen=True)
class SpvarOutcome:
    reduced: ReducedProblem
    elite_size: int
    fixed_count: int
    recorded_energies: np.ndarray
    elite_threshold: float = None


def elite_size(fraction, sample_size):
    """``ceil(fraction * sample_size)``, at least one."""
    return max(1, math.ceil(fraction * sample_size - _EPS))


def _persistent(elite: np.ndarray, threshold):
    means = elite.mean(axis=0)
    idx = np.flatnonzero(np.abs(means) >= threshold - _EPS)
    return {int(i): (1 if means[i] > 0 else -1) for i in idx}


def _validate(p, sample):
    if len(sample) == 0:
        raise ValueError("cannot fix variables from an empty sample")
    if sample.num_vars != p.num_vars:
        raise DimensionError("sample and problem sizes differ")


def spvar_fix(p: IsingProblem, sample: Sample, params: SpvarParams,
              elite_threshold: float | None = None) -> SpvarOutcome:
    """One SPVAR step: fix every spin whose elite mean reaches ``fixing_threshold``.

    ``elite_threshold`` overrides ``params.elite_threshold``; with
    ``params.adaptive_elite`` the threshold is chosen by :func:`adaptive_elite`.
    """
    _validate(p, sample)
    if elite_threshold is None:
        elite_threshold = (adaptive_elite(sample, params) if params.adaptive_elite
                           else params.elite_threshold)
    ordered = sample.sorted()
    k = elite_size(elite_threshold, len(ordered))
    fixed = _persistent(ordered.configs[:k].astype(float), params.fixing_threshold)
    return SpvarOutcome(apply_fix(p, fixed), k, len(fixed), sample.energies.copy(),
                        elite_threshold)


def adaptive_elite(sample: Sample, params: SpvarParams) -> float:
    """Largest of ``t, t/2, t/4, ...`` whose elite yields at least one fix.

    The sequence stops once the elite would shrink below two states; if nothing
    is ever fixed the floor fraction (an elite of two) is returned.
    """
    if len(sample) == 0:
        raise ValueError("cannot choose an elite threshold from an empty sample")
    ordered = sample.sorted()
    n = len(ordered)
    configs = ordered.configs.astype(float)
    t = params.elite_threshold
    floor = min(t, 2.0 / n)
    while elite_size(t, n) >= 2:
        if _persistent(configs[:elite_size(t, n)], params.fixing_threshold):
            return t
        t /= 2
    return floor


def correlation_prefix(p: IsingProblem, sample: Sample, params: SpvarParams) -> SpvarOutcome:
    """Fix the largest cluster of strongly correlated coupled spins.

    Pair correlations ``mean(s_i s_j)`` over the elite are measured on coupled
    pairs. Pairs with ``|c_ij| >= correlation_threshold`` link spins into
    clusters; the largest cluster has its smallest spin set to +1 and every
    other member set through the signs of the correlations along a BFS tree.
    Meant for zero-bias problems, where this breaks the global spin-flip
    symmetry that defeats plain persistence.
    """
    _validate(p, sample)
    ordered = sample.sorted()
    k = elite_size(params.correlation_elite_threshold, len(ordered))
    elite = ordered.configs[:k].astype(float)
    rows, cols, _ = p.edges
    corr = (elite[:, rows] * elite[:, cols]).mean(axis=0) if len(rows) else np.zeros(0)
    strong = np.flatnonzero(np.abs(corr) >= params.correlation_threshold - _EPS)

    adj = {}
    for e in strong:
        i, j, sgn = int(rows[e]), int(cols[e]), (1 if corr[e] > 0 else -1)
        adj.setdefault(i, []).append((j, sgn))
        adj.setdefault(j, []).append((i, sgn))

    best = {}
    seen = set()
    for root in sorted(adj):
        if root in seen:
            continue
        values = {root: 1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, sgn in sorted(adj[u]):
                if v not in values:
                    values[v] = values[u] * sgn
                    queue.append(v)
        seen.update(values)
        if len(values) > len(best):
            best = values
    return SpvarOutcome(apply_fix(p, best), k, len(best), sample.energies.copy(),
                        params.correlation_elite_threshold)

"""Problem-shrinking transforms and reconstruction of full solutions.

Every transform returns a :class:`ReducedProblem`; the reduced problem's offset
absorbs all constant energy so that, for any completion ``c`` of the surviving
spins, ``evaluate_energy(original, extend_solution(rp, c))`` equals
``evaluate_energy(rp.problem, c)``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .model import DimensionError, IsingProblem, Sample


class ReconstructionError(RuntimeError):
    """An inference rule refers to a spin that was never determined."""


class InferenceRule(NamedTuple):
    """``s[var] = sign * s[neighbor]``."""

    var: int
    neighbor: int
    sign: int


@dataclass(frozen=True)
class ReducedProblem:
    problem: IsingProblem
    index_map: np.ndarray
    num_original: int
    fixed: dict = field(default_factory=dict)
    rules: tuple = ()
    offset_delta: float = 0.0

    @classmethod
    def identity(cls, p: IsingProblem):
        return cls(p, np.arange(p.num_vars), p.num_vars)

    @property
    def num_fixed(self):
        return len(self.fixed)

    @property
    def num_inferred(self):
        return len(self.rules)

    def then(self, inner: "ReducedProblem") -> "ReducedProblem":
        """Compose with a reduction ``inner`` of ``self.problem``."""
        if inner.num_original != self.problem.num_vars:
            raise DimensionError("inner reduction does not match this reduced problem")
        imap = self.index_map
        fixed = dict(self.fixed)
        fixed.update({int(imap[k]): v for k, v in inner.fixed.items()})
        rules = self.rules + tuple(
            InferenceRule(int(imap[r.var]), int(imap[r.neighbor]), r.sign) for r in inner.rules)
        return ReducedProblem(inner.problem, imap[inner.index_map], self.num_original,
                              fixed, rules, self.offset_delta + inner.offset_delta)


def _sgn(x):
    return 1 if x >= 0 else -1


def _rebuild(adj, h, offset, survivors):
    """Build the surviving problem from a mutable adjacency."""
    survivors = sorted(survivors)
    remap = {v: k for k, v in enumerate(survivors)}
    couplers = {}
    for v in survivors:
        for u, w in adj[v].items():
            if v < u:
                couplers[(remap[v], remap[u])] = w
    return IsingProblem(len(survivors), couplers, [h[v] for v in survivors], offset), \
        np.array(survivors, dtype=np.int64)


def _adjacency(p: IsingProblem):
    adj = [dict() for _ in range(p.num_vars)]
    for (i, j), w in p.couplers.items():
        adj[i][j] = w
        adj[j][i] = w
    return adj


def apply_fix(p: IsingProblem, fixed) -> ReducedProblem:
    """Clamp the spins in ``fixed`` (index -> +/-1) and fold them into fields and offset."""
    fixed = {int(k): int(v) for k, v in dict(fixed).items()}
    for k, v in fixed.items():
        if not 0 <= k < p.num_vars:
            raise IndexError(f"fixed variable {k} out of range for {p.num_vars} variables")
        if v not in (-1, 1):
            raise ValueError(f"fixed value for {k} must be -1 or +1, got {v}")
    if not fixed:
        return ReducedProblem.identity(p)

    h = np.array(p.biases, dtype=float)
    delta = 0.0
    for k, v in fixed.items():
        delta += h[k] * v
    couplers = {}
    for (i, j), w in p.couplers.items():
        fi, fj = i in fixed, j in fixed
        if fi and fj:
            delta += w * fixed[i] * fixed[j]
        elif fi:
            h[j] += w * fixed[i]
        elif fj:
            h[i] += w * fixed[j]
        else:
            couplers[(i, j)] = w
    survivors = np.array([i for i in range(p.num_vars) if i not in fixed], dtype=np.int64)
    remap = {int(v): k for k, v in enumerate(survivors)}
    reduced = IsingProblem(
        len(survivors),
        {(remap[i], remap[j]): w for (i, j), w in couplers.items()},
        h[survivors],
        p.offset + delta,
    )
    return ReducedProblem(reduced, survivors, p.num_vars, dict(sorted(fixed.items())), (), delta)


def eliminate_leaves(p: IsingProblem) -> ReducedProblem:
    """Recursively remove spins of degree zero or one.

    A leaf ``k`` with sole coupler ``J`` to ``j`` is fixed to ``-sign(h_k)`` when
    ``|h_k| > |J|``; otherwise it is tied to its neighbour as
    ``s_k = -sign(J) * s_j``. Either way its optimal contribution is folded into
    ``h_j`` and the offset, so ground-state energies are preserved exactly. Trees
    reduce to the empty problem whose offset is the global minimum.
    """
    adj = _adjacency(p)
    h = np.array(p.biases, dtype=float)
    delta = 0.0
    fixed = {}
    rules = []
    alive = set(range(p.num_vars))
    queue = deque(i for i in range(p.num_vars) if len(adj[i]) <= 1)
    queued = set(queue)

    while queue:
        k = queue.popleft()
        queued.discard(k)
        if k not in alive or len(adj[k]) > 1:
            continue
        hk = h[k]
        if not adj[k]:
            fixed[k] = 1 if hk == 0 else -_sgn(hk)
            delta -= abs(hk)
        else:
            (j, w), = adj[k].items()
            if abs(hk) > abs(w):
                v = -_sgn(hk)
                fixed[k] = v
                h[j] += v * w
                delta -= abs(hk)
            else:
                sign = -_sgn(w)
                rules.append(InferenceRule(k, j, sign))
                h[j] += sign * hk
                delta -= abs(w)
            del adj[j][k]
            adj[k].clear()
            if len(adj[j]) <= 1 and j not in queued:
                queue.append(j)
                queued.add(j)
        alive.discard(k)

    reduced, survivors = _rebuild(adj, h, p.offset + delta, alive)
    return ReducedProblem(reduced, survivors, p.num_vars, dict(sorted(fixed.items())),
                          tuple(rules), delta)


def connected_components(p: IsingProblem) -> list[list[int]]:
    """Coupler-connected variable sets, ordered by smallest member."""
    n = p.num_vars
    if n == 0:
        return []
    rows, cols, _ = p.edges
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = _cc(graph, directed=False)
    groups = {}
    for v, lab in enumerate(labels):
        groups.setdefault(lab, []).append(v)
    return sorted(groups.values(), key=lambda g: g[0])


def merge_component_solutions(p: IsingProblem, sample: Sample) -> Sample:
    """Recombine a sample component-wise by rank of partial energy.

    Each component's partial solutions are sorted by their partial energy and
    the k-th ranked partials of all components form the k-th output row, so the
    best output row combines the best partial found for every component.
    """
    if sample.num_vars != p.num_vars:
        raise DimensionError("sample and problem sizes differ")
    comps = connected_components(p)
    if len(comps) <= 1 or len(sample) == 0:
        return sample.sorted()

    rows, cols, w = p.edges
    s = sample.configs.astype(float)
    label = np.empty(p.num_vars, dtype=np.int64)
    for c, members in enumerate(comps):
        label[members] = c

    merged = np.empty_like(sample.configs)
    total = np.zeros(len(sample))
    for c, members in enumerate(comps):
        members = np.asarray(members)
        mask = label[rows] == c
        part = s[:, members] @ p.biases[members]
        if mask.any():
            part = part + (s[:, rows[mask]] * s[:, cols[mask]]) @ w[mask]
        if c == 0:
            part = part + p.offset
        sub = sample.configs[:, members]
        keys = [sub[:, t] for t in range(len(members) - 1, -1, -1)]
        order = np.lexsort(keys + [part])
        merged[:, members] = sub[order]
        total += part[order]
    return Sample(merged, total, sorted_flag=True)


def extend_solution(rp: ReducedProblem, config) -> np.ndarray:
    """Map a reduced-space configuration back to the original variables."""
    c = np.asarray(config)
    if c.shape != (rp.problem.num_vars,):
        raise DimensionError(
            f"config has shape {c.shape}, expected ({rp.problem.num_vars},)")
    full = np.zeros(rp.num_original, dtype=np.int8)
    full[rp.index_map] = c
    for k, v in rp.fixed.items():
        full[k] = v
    for rule in reversed(rp.rules):
        nb = full[rule.neighbor]
        if nb == 0:
            raise ReconstructionError(
                f"rule for {rule.var} depends on undetermined spin {rule.neighbor}")
        full[rule.var] = rule.sign * nb
    if np.any(full == 0):
        missing = np.flatnonzero(full == 0)[:5].tolist()
        raise ReconstructionError(f"spins never determined: {missing}")
    return full


def extend_sample(rp: ReducedProblem, configs) -> np.ndarray:
    """Vectorized :func:`extend_solution` over the rows of ``configs``."""
    configs = np.asarray(configs, dtype=np.int8)
    if configs.ndim != 2 or configs.shape[1] != rp.problem.num_vars:
        raise DimensionError(f"configs have shape {configs.shape}, "
                             f"expected (k, {rp.problem.num_vars})")
    full = np.zeros((configs.shape[0], rp.num_original), dtype=np.int8)
    full[:, rp.index_map] = configs
    for k, v in rp.fixed.items():
        full[:, k] = v
    for rule in reversed(rp.rules):
        full[:, rule.var] = rule.sign * full[:, rule.neighbor]
    if configs.shape[0] and np.any(full == 0):
        raise ReconstructionError("undetermined spins after extension")
    return full


def no_prefix_hook(p: IsingProblem) -> dict:
    """Default external pre-processing hook: fixes nothing.

    A hook receives an :class:`IsingProblem` and returns a mapping of variable
    index to spin that is passed to :func:`apply_fix`.
    """
    return {}

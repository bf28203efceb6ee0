"""Exact ground states for sparse problems beyond plain enumeration.

Spins outside the 2-core are removed by leaf elimination. A greedy feedback
vertex set of the core is then enumerated; for each of its assignments the
remaining forest is minimized by a vectorized leaf-to-root sweep.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .model import IsingProblem, evaluate_energy
from .reduction import apply_fix, eliminate_leaves, extend_solution


class ExactLimitError(ValueError):
    pass


def _peel(adj, alive):
    """Remove degree <= 1 vertices from ``alive`` in place; return (vertex, parent) order."""
    deg = {v: sum(1 for u in adj[v] if u in alive) for v in alive}
    queue = deque(sorted(v for v in alive if deg[v] <= 1))
    order = []
    while queue:
        v = queue.popleft()
        if v not in alive:
            continue
        parent = next((u for u in adj[v] if u in alive), -1)
        alive.discard(v)
        order.append((v, parent))
        if parent >= 0:
            deg[parent] -= 1
            if deg[parent] == 1:
                queue.append(parent)
    return order


def feedback_vertex_set(p: IsingProblem) -> list[int]:
    """Greedy feedback vertex set: repeatedly drop a max-degree vertex of the 2-core."""
    adj = [set() for _ in range(p.num_vars)]
    for i, j in p.couplers:
        adj[i].add(j)
        adj[j].add(i)
    alive = set(range(p.num_vars))
    chosen = []
    _peel(adj, alive)
    while alive:
        v = max(sorted(alive), key=lambda x: sum(1 for u in adj[x] if u in alive))
        alive.discard(v)
        chosen.append(v)
        _peel(adj, alive)
    return sorted(chosen)


def exact_minimum(p: IsingProblem, max_cut_vars=26, chunk_bits=14):
    """Return ``(energy, config)`` of a certified ground state.

    Raises :class:`ExactLimitError` when the feedback vertex set of the 2-core
    exceeds ``max_cut_vars`` spins.
    """
    outer = eliminate_leaves(p)
    core = outer.problem
    cut = feedback_vertex_set(core)
    if len(cut) > max_cut_vars:
        raise ExactLimitError(f"feedback vertex set of {len(cut)} spins exceeds {max_cut_vars}")

    n = core.num_vars
    in_cut = np.zeros(n, dtype=bool)
    in_cut[cut] = True
    forest = [v for v in range(n) if not in_cut[v]]
    fpos = {v: a for a, v in enumerate(forest)}
    cpos = {v: a for a, v in enumerate(cut)}

    # couplings cut-cut, cut-forest, and the forest peeling order
    k, nf = len(cut), len(forest)
    cut_cut = []
    cut_forest = np.zeros((k, nf))
    adj = [set() for _ in range(n)]
    forest_w = {}
    for (i, j), w in core.couplers.items():
        if in_cut[i] and in_cut[j]:
            cut_cut.append((cpos[i], cpos[j], w))
        elif in_cut[i]:
            cut_forest[cpos[i], fpos[j]] += w
        elif in_cut[j]:
            cut_forest[cpos[j], fpos[i]] += w
        else:
            adj[i].add(j)
            adj[j].add(i)
            forest_w[(i, j)] = forest_w[(j, i)] = w
    order = _peel(adj, set(forest))
    steps = [(fpos[v], fpos[u] if u >= 0 else -1, forest_w.get((v, u), 0.0)) for v, u in order]
    h_cut = core.biases[cut]
    h_forest = core.biases[forest]

    best_e, best_idx = np.inf, 0
    total = 1 << k
    size = 1 << min(k, chunk_bits)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, size):
        idx = np.arange(start, start + size, dtype=np.int64)
        s = (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(float)
        const = s @ h_cut if k else np.zeros(size)
        for a, b, w in cut_cut:
            const = const + w * s[:, a] * s[:, b]
        field = h_forest + s @ cut_forest
        for leaf, parent, w in steps:
            hl = field[:, leaf]
            if parent < 0:
                const = const - np.abs(hl)
            else:
                up = -np.abs(w + hl)
                down = -np.abs(-w + hl)
                const = const + 0.5 * (up + down)
                field[:, parent] += 0.5 * (up - down)
        a = int(np.argmin(const))
        if const[a] < best_e:
            best_e, best_idx = float(const[a]), int(idx[a])

    assignment = {v: 1 if (best_idx >> (k - 1 - a)) & 1 else -1 for a, v in enumerate(cut)}
    fixed = apply_fix(core, assignment)
    rest = eliminate_leaves(fixed.problem)
    full = outer.then(fixed).then(rest)
    config = extend_solution(full, np.zeros(0, dtype=np.int8))
    return evaluate_energy(p, config), config

"""Benchmark instance families.

All problems are in the minimization form, so a ferromagnetic coupler is
negative. Every generator is deterministic in its arguments and ``seed``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .model import IsingProblem, QuboProblem

HORIZONTAL, VERTICAL = 0, 1


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChimeraCoord:
    cell_row: int
    cell_col: int
    partition: int
    leg: int

    def linear_index(self, m, cols=None):
        cols = m if cols is None else cols
        if not (0 <= self.cell_row < m and 0 <= self.cell_col < cols
                and self.partition in (0, 1) and 0 <= self.leg < 4):
            raise IndexError(f"{self} outside a {m}x{cols} Chimera grid")
        return 8 * (cols * self.cell_row + self.cell_col) + 4 * self.partition + self.leg

    @classmethod
    def from_index(cls, index, m, cols=None):
        cols = m if cols is None else cols
        cell, rem = divmod(index, 8)
        return cls(cell // cols, cell % cols, rem // 4, rem % 4)


def chimera_edges(m, cols=None, inactive=()):
    """Edges ``(i, j)``, ``i < j``, of an ``m x cols`` grid of K_{4,4} cells.

    Vertical-partition legs couple to the same leg in the cell below,
    horizontal-partition legs to the same leg in the cell to the right.
    Spins listed in ``inactive`` lose all their edges.
    """
    cols = m if cols is None else cols
    if m < 1 or cols < 1:
        raise ValueError("Chimera grid must be at least 1x1")
    idx = lambda r, c, part, leg: 8 * (cols * r + c) + 4 * part + leg
    edges = []
    for r in range(m):
        for c in range(cols):
            for a in range(4):
                for b in range(4):
                    edges.append((idx(r, c, HORIZONTAL, a), idx(r, c, VERTICAL, b)))
            for leg in range(4):
                if r + 1 < m:
                    edges.append((idx(r, c, VERTICAL, leg), idx(r + 1, c, VERTICAL, leg)))
                if c + 1 < cols:
                    edges.append((idx(r, c, HORIZONTAL, leg), idx(r, c + 1, HORIZONTAL, leg)))
    dead = set(inactive)
    return sorted((min(e), max(e)) for e in edges if e[0] not in dead and e[1] not in dead)


def gen_weak_strong(grid, h_w=-0.42, seed=0):
    """Weak-strong cluster problem with ``grid x grid`` cluster pairs.

    Pair ``(a, b)`` occupies cells ``(a, 2b)`` and ``(a, 2b + 1)`` of an
    ``grid x 2 grid`` Chimera layout; the seed decides which of the two is the
    weak cell. Cells are internally ferromagnetic, weak and strong cells of a
    pair are joined by their four horizontal legs, and strong cells of
    neighbouring pairs by four legs of the matching partition. Strong spins
    carry bias +1, weak spins ``h_w``.
    """
    if not -0.5 < h_w < 0:
        raise ValueError(f"h_w must lie in (-0.5, 0), got {h_w}")
    if grid < 1:
        raise ValueError("grid must be >= 1")
    rng = np.random.default_rng(seed)
    cols = 2 * grid
    idx = lambda r, c, part, leg: 8 * (cols * r + c) + 4 * part + leg
    n = 8 * grid * cols
    h = np.zeros(n)
    couplers = {}

    def couple(i, j):
        couplers[(min(i, j), max(i, j))] = -1.0

    strong = {}
    for a in range(grid):
        for b in range(grid):
            weak_left = bool(rng.integers(2))
            wc, sc = (2 * b, 2 * b + 1) if weak_left else (2 * b + 1, 2 * b)
            strong[(a, b)] = sc
            for c, bias in ((wc, h_w), (sc, 1.0)):
                for part, leg in product((HORIZONTAL, VERTICAL), range(4)):
                    h[idx(a, c, part, leg)] = bias
                for x, y in product(range(4), range(4)):
                    couple(idx(a, c, HORIZONTAL, x), idx(a, c, VERTICAL, y))
            for leg in range(4):
                couple(idx(a, wc, HORIZONTAL, leg), idx(a, sc, HORIZONTAL, leg))
    for (a, b), sc in strong.items():
        if b + 1 < grid:
            other = strong[(a, b + 1)]
            for leg in range(4):
                couple(idx(a, sc, HORIZONTAL, leg), idx(a, other, HORIZONTAL, leg))
        if a + 1 < grid:
            other = strong[(a + 1, b)]
            for leg in range(4):
                couple(idx(a, sc, VERTICAL, leg), idx(a + 1, other, VERTICAL, leg))
    return IsingProblem(n, couplers, h)


def degenerate_field_possible(h_i, weights):
    """True iff some neighbour sign pattern makes ``h_i + sum_j J_ij s_j`` zero."""
    sums = {h_i}
    for w in weights:
        sums = {x + w for x in sums} | {x - w for x in sums}
    return 0 in sums


def degenerate_variables(p: IsingProblem):
    """Indices whose effective field can vanish for some neighbour configuration."""
    return [i for i in range(p.num_vars)
            if degenerate_field_possible(p.biases[i], p.neighbors(i)[1].tolist())]


def gen_reduced_degeneracy(m, n, nonzero_bias=True, seed=0, max_passes=10_000, inactive=()):
    """Chimera instance with couplers/biases from ``{+-n, +-(n-1), +-(n-2)}``.

    After the initial draw, every spin whose effective field can vanish for
    some neighbour configuration gets one random incident coupler redrawn to
    a different value; passes repeat until none can vanish.
    """
    if n < 3 or m < 1:
        raise ValueError("need n >= 3 and m >= 1")
    rng = np.random.default_rng(seed)
    values = np.array([-n, -(n - 1), -(n - 2), n - 2, n - 1, n])
    edges = chimera_edges(m, inactive=inactive)
    nv = 8 * m * m
    J = {e: int(rng.choice(values)) for e in edges}
    if nonzero_bias:
        h = [int(v) for v in rng.choice(values, size=nv)]
        for i in inactive:
            h[i] = 0
    else:
        h = [0] * nv
    incident = [[] for _ in range(nv)]
    for e in edges:
        incident[e[0]].append(e)
        incident[e[1]].append(e)

    for _ in range(max_passes):
        changed = False
        for i in range(nv):
            if not incident[i]:
                continue
            if degenerate_field_possible(h[i], [J[e] for e in incident[i]]):
                e = incident[i][int(rng.integers(len(incident[i])))]
                J[e] = int(rng.choice(values[values != J[e]]))
                changed = True
        if not changed:
            return IsingProblem(nv, J, h)
    bad = [i for i in range(nv) if incident[i]
           and degenerate_field_possible(h[i], [J[e] for e in incident[i]])]
    raise GenerationError(f"local degeneracies remain after {max_passes} passes "
                          f"(e.g. variable {bad[0]})")


def gen_u_range(m, r, seed=0, inactive=()):
    """Chimera instance with couplers from ``{-r..r} \\ {0}`` and biases from ``{-r..r}``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    rng = np.random.default_rng(seed)
    nonzero = np.concatenate([np.arange(-r, 0), np.arange(1, r + 1)])
    edges = chimera_edges(m, inactive=inactive)
    J = dict(zip(edges, rng.choice(nonzero, size=len(edges)).tolist()))
    h = rng.integers(-r, r + 1, size=8 * m * m)
    h[list(inactive)] = 0
    return IsingProblem(8 * m * m, J, h)


def gen_3d_lattice(L, distribution="gaussian", seed=0):
    """Periodic ``L x L x L`` spin glass with zero biases.

    Gaussian couplers are quantized to six decimals. For ``L = 2`` the two
    bonds joining the same pair of sites are merged into one summed coupler.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    if distribution not in ("gaussian", "bimodal"):
        raise ValueError(f"unknown coupler distribution {distribution!r}")
    rng = np.random.default_rng(seed)
    site = lambda x, y, z: (x % L) + L * (y % L) + L * L * (z % L)
    couplers = {}
    for z, y, x in product(range(L), repeat=3):
        i = site(x, y, z)
        for j in (site(x + 1, y, z), site(x, y + 1, z), site(x, y, z + 1)):
            if distribution == "gaussian":
                w = round(float(rng.normal()), 6)
            else:
                w = float(rng.choice((-1.0, 1.0)))
            key = (min(i, j), max(i, j))
            couplers[key] = round(couplers.get(key, 0.0) + w, 6)
    return IsingProblem(L ** 3, couplers)


@dataclass(frozen=True)
class MaxKSatInstance:
    """Clauses are tuples of nonzero 1-based literals; negative means negated."""

    k: int
    num_literals: int
    clauses: tuple

    def __post_init__(self):
        for clause in self.clauses:
            vars_ = [abs(lit) for lit in clause]
            if 0 in vars_ or max(vars_) > self.num_literals:
                raise ValueError(f"literal out of range in {clause}")
            if len(set(vars_)) != len(vars_):
                raise ValueError(f"clause {clause} repeats a variable")

    @property
    def phi(self):
        return len(self.clauses) / self.num_literals

    def unsatisfied(self, x):
        """Number of clauses violated by the 0/1 assignment ``x`` (0-based)."""
        return sum(1 for clause in self.clauses
                   if not any((x[abs(l) - 1] == 1) == (l > 0) for l in clause))


def gen_maxksat(k, num_literals, num_clauses, seed=0):
    if k not in (2, 3):
        raise ValueError("k must be 2 or 3")
    if num_literals < k:
        raise ValueError("need at least k variables")
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(num_clauses):
        vars_ = rng.choice(num_literals, size=k, replace=False) + 1
        signs = np.where(rng.random(k) < 0.5, -1, 1)
        clauses.append(tuple(int(v) for v in vars_ * signs))
    return MaxKSatInstance(k, num_literals, tuple(clauses))


def _clause_polynomial(clause):
    """Expand the violation indicator: product of ``(1 - x)`` / ``x`` factors."""
    poly = {(): 1}
    for lit in clause:
        v = abs(lit) - 1
        a, b = (1, -1) if lit > 0 else (0, 1)
        nxt = {}
        for mono, c in poly.items():
            if a:
                nxt[mono] = nxt.get(mono, 0) + a * c
            key = tuple(sorted(mono + (v,)))
            nxt[key] = nxt.get(key, 0) + b * c
        poly = nxt
    return poly


def maxksat_to_qubo(inst: MaxKSatInstance):
    """QUBO whose minimum over auxiliaries counts unsatisfied clauses.

    Cubic monomials ``c x_a x_b x_c`` (``a < b < c``) become ``c w x_c`` with one
    auxiliary ``w`` per distinct pair ``(a, b)``, enforced by the penalty
    ``P (x_a x_b - 2 x_a w - 2 x_b w + 3 w)``. ``P`` is 2 unless the pair's cubic
    coefficients sum to more in absolute value, in which case it is that sum.

    Returns ``(qubo, aux)`` where ``aux`` maps each pair to
    ``(aux_index, penalty)``.
    """
    poly = {}
    for clause in inst.clauses:
        for mono, c in _clause_polynomial(clause).items():
            poly[mono] = poly.get(mono, 0) + c

    offset = poly.pop((), 0)
    pair_weight = {}
    for mono, c in poly.items():
        if len(mono) == 3 and c:
            pair_weight[mono[:2]] = pair_weight.get(mono[:2], 0) + abs(c)
    aux = {}
    nv = inst.num_literals
    for pair in sorted(pair_weight):
        aux[pair] = (nv, max(2, pair_weight[pair]))
        nv += 1

    terms = {}

    def add(i, j, c):
        key = (min(i, j), max(i, j))
        terms[key] = terms.get(key, 0) + c

    for mono, c in poly.items():
        if not c:
            continue
        if len(mono) == 1:
            add(mono[0], mono[0], c)
        elif len(mono) == 2:
            add(mono[0], mono[1], c)
        else:
            add(aux[mono[:2]][0], mono[2], c)
    for (y, z), (w, pen) in aux.items():
        add(y, z, pen)
        add(y, w, -2 * pen)
        add(z, w, -2 * pen)
        add(w, w, 3 * pen)
    terms = {k: v for k, v in terms.items() if v}
    return QuboProblem(nv, terms, offset), aux

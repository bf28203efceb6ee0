"""Ising/QUBO problem representation, energies, and the text instance format.

Energies use the minimization form ``offset + sum_{i<j} J_ij s_i s_j + sum_i h_i s_i``
with every stored coupler counted exactly once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np


class DimensionError(ValueError):
    """A configuration does not match the problem size."""


class InstanceParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _check_finite(value, what):
    if not math.isfinite(value):
        raise ValueError(f"non-finite {what}: {value!r}")


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Sparse Ising problem over spins in {-1, +1}.

    Args:
        num_vars: Number of spins.
        couplers: Mapping ``(i, j) -> J_ij``. Keys are normalized to ``i < j``;
            diagonal keys and repeated unordered pairs are rejected.
        biases: Length ``num_vars`` sequence of ``h_i`` (defaults to zeros).
        offset: Constant added to every energy.
    """

    num_vars: int
    couplers: Mapping[tuple[int, int], float] = field(default_factory=dict)
    biases: np.ndarray = None
    offset: float = 0.0

    def __post_init__(self):
        n = int(self.num_vars)
        if n < 0:
            raise ValueError("num_vars must be non-negative")
        object.__setattr__(self, "num_vars", n)

        canon = {}
        for (i, j), v in self.couplers.items():
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"diagonal coupler ({i}, {i}); fold it into the offset")
            if i > j:
                i, j = j, i
            if i < 0 or j >= n:
                raise IndexError(f"coupler ({i}, {j}) out of range for {n} variables")
            if (i, j) in canon:
                raise ValueError(f"coupler ({i}, {j}) given twice")
            v = float(v)
            _check_finite(v, "coupler")
            canon[(i, j)] = v
        object.__setattr__(self, "couplers", dict(sorted(canon.items())))

        h = np.zeros(n) if self.biases is None else np.array(self.biases, dtype=float)
        if h.shape != (n,):
            raise DimensionError(f"biases have shape {h.shape}, expected ({n},)")
        if not np.all(np.isfinite(h)):
            raise ValueError("non-finite bias")
        h.flags.writeable = False
        object.__setattr__(self, "biases", h)

        off = float(self.offset)
        _check_finite(off, "offset")
        object.__setattr__(self, "offset", off)

    @classmethod
    def empty(cls, offset=0.0):
        return cls(0, {}, None, offset)

    def __repr__(self):
        return (f"IsingProblem(num_vars={self.num_vars}, couplers={len(self.couplers)}, "
                f"offset={self.offset})")

    def __eq__(self, other):
        if not isinstance(other, IsingProblem):
            return NotImplemented
        return (self.num_vars == other.num_vars and self.couplers == other.couplers
                and np.array_equal(self.biases, other.biases) and self.offset == other.offset)

    __hash__ = None

    @cached_property
    def edges(self):
        """``(rows, cols, weights)`` arrays of the stored couplers, ``rows < cols``."""
        m = len(self.couplers)
        rows = np.fromiter((i for i, _ in self.couplers), dtype=np.int64, count=m)
        cols = np.fromiter((j for _, j in self.couplers), dtype=np.int64, count=m)
        w = np.fromiter(self.couplers.values(), dtype=float, count=m)
        for a in (rows, cols, w):
            a.flags.writeable = False
        return rows, cols, w

    @cached_property
    def csr(self):
        """Symmetric adjacency as ``(indptr, indices, weights)``."""
        rows, cols, w = self.edges
        src = np.concatenate([rows, cols])
        dst = np.concatenate([cols, rows])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        indptr = np.zeros(self.num_vars + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, np.ascontiguousarray(dst), np.ascontiguousarray(ww)

    def degree(self):
        indptr = self.csr[0]
        return np.diff(indptr)

    def neighbors(self, i):
        indptr, indices, weights = self.csr
        return indices[indptr[i]:indptr[i + 1]], weights[indptr[i]:indptr[i + 1]]

    @property
    def has_bias(self):
        return bool(np.any(self.biases != 0))

    @property
    def max_abs_coefficient(self):
        """``max(|J|, |h|, 1)``, the scale used by default temperature ladders."""
        vals = [1.0]
        if self.couplers:
            vals.append(float(np.max(np.abs(self.edges[2]))))
        if self.num_vars:
            vals.append(float(np.max(np.abs(self.biases))))
        return max(vals)

    def is_integral(self):
        vals = np.concatenate([self.edges[2], self.biases, [self.offset]])
        return bool(np.all(vals == np.round(vals)))

    def energies(self, configs):
        """Vectorized energies of a ``(k, num_vars)`` array of spin rows."""
        s = np.asarray(configs, dtype=float)
        if s.ndim != 2 or s.shape[1] != self.num_vars:
            raise DimensionError(f"configs have shape {s.shape}, expected (k, {self.num_vars})")
        rows, cols, w = self.edges
        e = np.full(s.shape[0], self.offset)
        if len(w):
            e += (s[:, rows] * s[:, cols]) @ w
        if self.num_vars:
            e += s @ self.biases
        return e


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """QUBO ``offset + sum_{i<=j} Q_ij x_i x_j`` over booleans."""

    num_vars: int
    terms: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        n = int(self.num_vars)
        canon = {}
        for (i, j), v in self.terms.items():
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if i < 0 or j >= n:
                raise IndexError(f"term ({i}, {j}) out of range for {n} variables")
            v = float(v)
            _check_finite(v, "term")
            canon[(i, j)] = canon.get((i, j), 0.0) + v
        object.__setattr__(self, "num_vars", n)
        object.__setattr__(self, "terms", dict(sorted(canon.items())))
        object.__setattr__(self, "offset", float(self.offset))

    def energy(self, x):
        x = np.asarray(x)
        if x.shape != (self.num_vars,):
            raise DimensionError(f"assignment has shape {x.shape}, expected ({self.num_vars},)")
        return self.offset + sum(v * x[i] * x[j] for (i, j), v in self.terms.items())


def as_spins(config, num_vars=None):
    """Validate and return ``config`` as an int8 array of +/-1 entries."""
    s = np.asarray(config)
    if s.ndim != 1:
        raise DimensionError("a spin configuration must be one-dimensional")
    if num_vars is not None and s.shape[0] != num_vars:
        raise DimensionError(f"config has length {s.shape[0]}, expected {num_vars}")
    if not np.all((s == 1) | (s == -1)):
        raise ValueError("spins must be -1 or +1")
    return s.astype(np.int8)


def evaluate_energy(problem: IsingProblem, config) -> float:
    s = np.asarray(config)
    if s.shape != (problem.num_vars,):
        raise DimensionError(
            f"config has shape {s.shape}, expected ({problem.num_vars},)")
    return float(problem.energies(s[None, :])[0])


class Sample:
    """Spin configurations with their energies.

    ``configs`` is a ``(k, n)`` int8 array, ``energies`` a length-``k`` float array.
    """

    def __init__(self, configs, energies, sorted_flag=False):
        configs = np.asarray(configs, dtype=np.int8)
        energies = np.asarray(energies, dtype=float)
        if configs.ndim != 2 or energies.shape != (configs.shape[0],):
            raise DimensionError("configs must be (k, n) and energies (k,)")
        self.configs = configs
        self.energies = energies
        self.sorted_flag = sorted_flag

    @classmethod
    def from_configs(cls, problem, configs):
        configs = np.asarray(configs, dtype=np.int8)
        if configs.ndim == 1:
            configs = configs.reshape(1, -1)
        return cls(configs, problem.energies(configs))

    def __len__(self):
        return len(self.energies)

    def __iter__(self):
        return iter(zip(self.configs, self.energies))

    @property
    def num_vars(self):
        return self.configs.shape[1]

    def sorted(self):
        """Ascending by energy; ties broken by lexicographic config order (-1 < +1)."""
        if self.sorted_flag:
            return self
        keys = [self.configs[:, c] for c in range(self.num_vars - 1, -1, -1)]
        order = np.lexsort(keys + [self.energies]) if len(self) else np.arange(0)
        return Sample(self.configs[order], self.energies[order], sorted_flag=True)

    def first(self, k):
        s = self.sorted()
        return Sample(s.configs[:k], s.energies[:k], sorted_flag=True)

    @property
    def best(self):
        s = self.sorted()
        return s.configs[0], float(s.energies[0])

    def check(self, problem, rtol=1e-9):
        """Raise if any stored energy disagrees with ``problem``."""
        if self.num_vars != problem.num_vars:
            raise DimensionError("sample and problem sizes differ")
        if not np.allclose(self.energies, problem.energies(self.configs), rtol=rtol, atol=0):
            raise ValueError("sample energies inconsistent with problem")


def qubo_to_ising(q: QuboProblem) -> IsingProblem:
    """Substitute ``x = (s + 1) / 2``."""
    n = q.num_vars
    h = np.zeros(n)
    couplers = {}
    offset = q.offset
    for (i, j), v in q.terms.items():
        if i == j:
            # x_i = (s_i + 1)/2, and x_i^2 = x_i
            h[i] += v / 2
            offset += v / 2
        else:
            # x_i x_j = (s_i s_j + s_i + s_j + 1)/4
            couplers[(i, j)] = couplers.get((i, j), 0.0) + v / 4
            h[i] += v / 4
            h[j] += v / 4
            offset += v / 4
    return IsingProblem(n, couplers, h, offset)


def ising_to_qubo(p: IsingProblem) -> QuboProblem:
    """Substitute ``s = 2x - 1``."""
    terms = {}
    offset = p.offset
    for (i, j), v in p.couplers.items():
        # s_i s_j = 4 x_i x_j - 2 x_i - 2 x_j + 1
        terms[(i, j)] = terms.get((i, j), 0.0) + 4 * v
        terms[(i, i)] = terms.get((i, i), 0.0) - 2 * v
        terms[(j, j)] = terms.get((j, j), 0.0) - 2 * v
        offset += v
    for i, v in enumerate(p.biases):
        if v:
            terms[(i, i)] = terms.get((i, i), 0.0) + 2 * v
            offset -= v
    return QuboProblem(p.num_vars, terms, offset)


def _fmt(v):
    return repr(float(v))


def write_instance(problem: IsingProblem) -> str:
    lines = [f"# vars {problem.num_vars}", f"# offset {_fmt(problem.offset)}"]
    items = [((i, i), float(v)) for i, v in enumerate(problem.biases) if v != 0]
    items += list(problem.couplers.items())
    for (i, j), v in sorted(items):
        lines.append(f"{i} {j} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str, num_vars: int | None = None) -> IsingProblem:
    """Parse the ``i j value`` instance format.

    ``# vars N`` and ``# offset v`` header comments are honoured; without a
    ``# vars`` header (or explicit ``num_vars``) the size is one past the
    largest index seen.
    """
    header_vars = None
    offset = 0.0
    entries = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            try:
                if len(parts) == 2 and parts[0] == "offset":
                    offset = float(parts[1])
                elif len(parts) == 2 and parts[0] == "vars":
                    header_vars = int(parts[1])
            except ValueError:
                raise InstanceParseError(lineno, f"bad header {line!r}") from None
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InstanceParseError(lineno, f"expected 'i j value', got {line!r}")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise InstanceParseError(lineno, f"cannot parse {line!r}") from None
        if i < 0 or j < 0:
            raise InstanceParseError(lineno, "negative index")
        if not math.isfinite(v):
            raise InstanceParseError(lineno, "non-finite value")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise InstanceParseError(lineno, f"duplicate pair {key} (first on line {seen[key]})")
        seen[key] = lineno
        entries.append((lineno, key, v))

    n = num_vars if num_vars is not None else header_vars
    if n is None:
        n = 1 + max((k[1] for _, k, _ in entries), default=-1)
    h = np.zeros(n)
    couplers = {}
    for lineno, (i, j), v in entries:
        if j >= n:
            raise InstanceParseError(lineno, f"index {j} out of range for {n} variables")
        if i == j:
            h[i] = v
        else:
            couplers[(i, j)] = v
    return IsingProblem(n, couplers, h, offset)


def read_instance(path) -> IsingProblem:
    with open(path) as fh:
        return parse_instance(fh.read())


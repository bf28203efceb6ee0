"""Low-energy samplers: simulated annealing, parallel tempering with
isoenergetic cluster moves (PTICM), and exhaustive enumeration.

Every sampler has the signature ``sampler(problem, spec) -> Sample`` and returns
exactly ``spec.num_reads`` entries, deterministically in ``(problem, spec)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .model import IsingProblem, Sample
from .rng import derive_seed


class SamplerConfigError(ValueError):
    pass


class BruteForceLimitError(ValueError):
    pass


KINDS = ("sa", "pticm", "brute_force")


@dataclass(frozen=True)
class SamplerSpec:
    """Declarative sampler configuration.

    ``beta_start``/``beta_end`` default to ``0.1 / J_max`` and ``5 / J_max`` with
    ``J_max = max(|J|, |h|, 1)`` of the problem being sampled. For PTICM,
    ``num_replicas`` is the number of temperatures; with cluster moves each
    temperature carries two chains. ``icm_enabled`` may be ``"auto"`` (cluster
    moves exactly when all biases are zero), ``True`` or ``False``.
    """

    kind: str = "sa"
    num_reads: int = 100
    num_sweeps: int = 1000
    beta_start: float | None = None
    beta_end: float | None = None
    schedule: str = "geometric"
    num_replicas: int = 16
    icm_enabled: object = "auto"
    elite_states_per_replica: int = 10
    lower_half_only: bool = True
    max_vars: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SamplerConfigError(f"unknown sampler kind {self.kind!r}")
        if self.num_reads < 1:
            raise SamplerConfigError("num_reads must be >= 1")
        if self.num_sweeps < 1:
            raise SamplerConfigError("num_sweeps must be >= 1")
        if self.schedule not in ("geometric", "linear"):
            raise SamplerConfigError(f"unknown schedule {self.schedule!r}")
        if self.num_replicas < 1 or self.elite_states_per_replica < 1:
            raise SamplerConfigError("num_replicas and elite_states_per_replica must be >= 1")
        if self.icm_enabled not in ("auto", True, False):
            raise SamplerConfigError("icm_enabled must be 'auto', True or False")
        for b in (self.beta_start, self.beta_end):
            if b is not None and not b > 0:
                raise SamplerConfigError("inverse temperatures must be positive")

    def with_(self, **changes):
        return replace(self, **changes)


def beta_range(problem, spec):
    scale = problem.max_abs_coefficient
    b0 = spec.beta_start if spec.beta_start is not None else 0.1 / scale
    b1 = spec.beta_end if spec.beta_end is not None else 5.0 / scale
    return b0, b1


def anneal_schedule(b0, b1, steps, kind="geometric"):
    """Inverse temperatures for ``steps`` sweeps from ``b0`` to ``b1``."""
    if steps == 1:
        return np.array([b1], dtype=float)
    if kind == "linear":
        return np.linspace(b0, b1, steps)
    return np.geomspace(b0, b1, steps)


def beta_ladder(problem, spec):
    """Geometric ladder of ``spec.num_replicas`` strictly increasing betas."""
    b0, b1 = beta_range(problem, spec)
    if spec.num_replicas == 1:
        return np.array([b1])
    if not b0 < b1:
        raise SamplerConfigError("PTICM ladder needs beta_start < beta_end")
    return np.geomspace(b0, b1, spec.num_replicas)


def _empty_sample(problem, num_reads):
    return Sample(np.zeros((num_reads, 0), dtype=np.int8), np.full(num_reads, problem.offset),
                  sorted_flag=True)


def _read_seeds(seed, count):
    return np.array([derive_seed(seed, r, "read") for r in range(count)], dtype=np.uint64)


def sample_sa(problem: IsingProblem, spec: SamplerSpec) -> Sample:
    """Independent single-spin Metropolis anneals, one per read.

    Each read starts from a random state and performs ``num_sweeps`` sweeps in
    fixed index order along the configured inverse-temperature schedule.
    """
    if problem.num_vars == 0:
        return _empty_sample(problem, spec.num_reads)
    b0, b1 = beta_range(problem, spec)
    betas = anneal_schedule(b0, b1, spec.num_sweeps, spec.schedule)
    indptr, indices, weights = problem.csr
    out = np.empty((spec.num_reads, problem.num_vars), dtype=np.int8)
    _kernels.sa_anneal(indptr, indices, weights, np.ascontiguousarray(problem.biases), betas,
                       _read_seeds(spec.seed, spec.num_reads), out, np.empty(0, np.int64))
    return Sample.from_configs(problem, out)


def _use_icm(problem, spec):
    if spec.icm_enabled is True and problem.has_bias:
        raise SamplerConfigError("isoenergetic cluster moves require all biases to be zero")
    if spec.icm_enabled == "auto":
        return not problem.has_bias
    return bool(spec.icm_enabled)


def _pticm_core(problem, spec, num_sweeps, trace):
    betas = beta_ladder(problem, spec)
    icm = _use_icm(problem, spec)
    chains = 2 if icm else 1
    nt = len(betas)
    tracked_from = nt // 2 if spec.lower_half_only else 0
    k = spec.elite_states_per_replica
    n = problem.num_vars
    elite_e = np.full((nt - tracked_from, chains, k), np.inf)
    elite_s = np.zeros((nt - tracked_from, chains, k, n), dtype=np.int8)
    count = np.zeros((nt - tracked_from, chains), dtype=np.int64)
    indptr, indices, weights = problem.csr
    _kernels.pticm_run(indptr, indices, weights, np.ascontiguousarray(problem.biases), betas,
                       chains, num_sweeps, icm, tracked_from, elite_e, elite_s, count,
                       np.uint64(derive_seed(spec.seed, 0, "read")), trace, 1e-12)
    rows = [elite_s[a, c, :count[a, c]] for a in range(count.shape[0])
            for c in range(chains)]
    return np.concatenate(rows, axis=0)


def sample_pticm(problem: IsingProblem, spec: SamplerSpec) -> Sample:
    """One parallel-tempering run; the sample is the pool of elite states.

    Each replica in the cold half of the ladder remembers its
    ``elite_states_per_replica`` lowest distinct states; the pooled states are
    sorted and cut (or padded with the best state) to ``num_reads``.
    """
    if problem.num_vars == 0:
        return _empty_sample(problem, spec.num_reads)
    pool = Sample.from_configs(problem, _pticm_core(problem, spec, spec.num_sweeps,
                                                    np.empty(0, np.int64))).sorted()
    configs, energies = pool.configs[:spec.num_reads], pool.energies[:spec.num_reads]
    short = spec.num_reads - len(energies)
    if short > 0:
        configs = np.concatenate([configs, np.repeat(configs[:1], short, axis=0)])
        energies = np.concatenate([energies, np.repeat(energies[:1], short)])
    return Sample(configs, energies, sorted_flag=True)


def brute_force_sample(problem: IsingProblem, spec: SamplerSpec) -> Sample:
    """The ``num_reads`` lowest-energy states by exhaustive enumeration.

    Ties are broken by lexicographic config order; row 0 is a certified ground
    state. Refuses problems with more than ``spec.max_vars`` spins.
    """
    n = problem.num_vars
    if n > spec.max_vars:
        raise BruteForceLimitError(f"{n} variables exceeds the brute-force cap of {spec.max_vars}")
    if n == 0:
        return _empty_sample(problem, spec.num_reads)
    k = spec.num_reads
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    chunk = 1 << min(n, 16)
    best_e = np.empty(0)
    best_i = np.empty(0, dtype=np.int64)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, start + chunk, dtype=np.int64)
        spins = (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(np.int8)
        e = problem.energies(spins)
        cand_e = np.concatenate([best_e, e])
        cand_i = np.concatenate([best_i, idx])
        keep = np.lexsort((cand_i, cand_e))[:k]
        best_e, best_i = cand_e[keep], cand_i[keep]
    if len(best_i) < k:
        best_i = np.concatenate([best_i, np.repeat(best_i[:1], k - len(best_i))])
    configs = (((best_i[:, None] >> shifts) & 1) * 2 - 1).astype(np.int8)
    return Sample(configs, problem.energies(configs), sorted_flag=True)


_DISPATCH = {"sa": sample_sa, "pticm": sample_pticm, "brute_force": brute_force_sample}


def sample(problem: IsingProblem, spec: SamplerSpec) -> Sample:
    return _DISPATCH[spec.kind](problem, spec)


def icm_move(r1, r2, problem: IsingProblem, rng: np.random.Generator):
    """Houdayer cluster move on two replicas of a zero-bias problem.

    Picks a random site where the replicas disagree, grows the coupler-connected
    cluster of disagreeing sites around it and flips it in both replicas. The
    sum of the two energies is unchanged. Returns new arrays.
    """
    if problem.has_bias:
        raise SamplerConfigError("isoenergetic cluster moves require all biases to be zero")
    s1 = np.array(r1, dtype=np.int8)
    s2 = np.array(r2, dtype=np.int8)
    sites = np.flatnonzero(s1 != s2)
    if len(sites) == 0:
        return s1, s2
    start = int(rng.choice(sites))
    n = problem.num_vars
    indptr, indices, _ = problem.csr
    _kernels.flood_flip(indptr, indices, s1, s2, start, np.empty(n, dtype=np.bool_),
                        np.empty(n, dtype=np.int64))
    return s1, s2


def exchange_probability(beta_a, beta_b, energy_a, energy_b):
    """Replica-exchange acceptance ``min(1, exp((beta_b - beta_a) (E_b - E_a)))``."""
    x = (beta_b - beta_a) * (energy_b - energy_a)
    return 1.0 if x >= 0 else math.exp(x)


def _histogram(trace, num_vars):
    counts = np.bincount(trace, minlength=1 << num_vars)
    return counts / counts.sum()


def sa_state_distribution(problem: IsingProblem, beta, num_sweeps, seed=0):
    """Empirical state distribution of a fixed-beta Metropolis chain.

    Index ``c`` of the result is the state whose spin ``i`` is ``+1`` iff bit
    ``n - 1 - i`` of ``c`` is set. Small problems only.
    """
    n = problem.num_vars
    if not 0 < n <= 20:
        raise ValueError("state distributions are limited to 1..20 variables")
    trace = np.empty(num_sweeps, dtype=np.int64)
    indptr, indices, weights = problem.csr
    _kernels.sa_anneal(indptr, indices, weights, np.ascontiguousarray(problem.biases),
                       np.full(num_sweeps, float(beta)), _read_seeds(seed, 1),
                       np.empty((1, n), dtype=np.int8), trace)
    return _histogram(trace, n)


def pticm_state_distribution(problem: IsingProblem, spec: SamplerSpec, num_sweeps):
    """Empirical state distribution of the coldest PTICM replica, one visit per sweep."""
    n = problem.num_vars
    if not 0 < n <= 20:
        raise ValueError("state distributions are limited to 1..20 variables")
    trace = np.empty(num_sweeps, dtype=np.int64)
    _pticm_core(problem, spec, num_sweeps, trace)
    return _histogram(trace, n)


def boltzmann_distribution(problem: IsingProblem, beta):
    """Exact Boltzmann weights over all states, indexed like the empirical helpers."""
    n = problem.num_vars
    idx = np.arange(1 << n, dtype=np.int64)
    spins = ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1) * 2 - 1
    e = problem.energies(spins)
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()

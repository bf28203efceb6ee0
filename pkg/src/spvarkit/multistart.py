"""Multi-start SPVAR and the budget-matched plain-restart baseline."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import IsingProblem, Sample
from .reduction import (ReducedProblem, apply_fix, connected_components, eliminate_leaves,
                        extend_sample, merge_component_solutions)
from .rng import derive_seed
from .samplers import SamplerSpec, sample as default_sampler
from .spvar import SpvarParams, correlation_prefix, spvar_fix


class StartError(RuntimeError):
    def __init__(self, start, cause):
        super().__init__(f"start {start} failed: {cause}")
        self.start = start


@dataclass(frozen=True)
class MultiStartParams:
    num_starts: int = 20
    fixing_sample_size: int = 50
    solving_sample_size: int = 50
    correlation_sample_size: int = 0
    spvar: SpvarParams = field(default_factory=SpvarParams)
    zero_bias_mode: bool = False
    preprocess_leaves: bool = False
    per_start_leaves: bool = False
    external_prefix_hook: Callable | None = None
    master_seed: int = 0

    def __post_init__(self):
        if min(self.num_starts, self.fixing_sample_size, self.solving_sample_size) < 1:
            raise ValueError("num_starts and sample sizes must be >= 1")
        if self.zero_bias_mode and self.correlation_sample_size < 1:
            raise ValueError("zero_bias_mode needs correlation_sample_size >= 1")

    @classmethod
    def from_budget(cls, total_sample_size, zero_bias=False, **kwargs):
        """Split a per-start budget: half/half, or 40/30/30 with correlation pre-fixing."""
        if zero_bias:
            corr = int(0.4 * total_sample_size)
            fix = int(0.3 * total_sample_size)
            return cls(fixing_sample_size=fix, solving_sample_size=total_sample_size - corr - fix,
                       correlation_sample_size=corr, zero_bias_mode=True, **kwargs)
        fix = total_sample_size // 2
        return cls(fixing_sample_size=fix, solving_sample_size=total_sample_size - fix, **kwargs)

    @property
    def sample_per_start(self):
        corr = self.correlation_sample_size if self.zero_bias_mode else 0
        return corr + self.fixing_sample_size + self.solving_sample_size

    @property
    def total_reads(self):
        return self.num_starts * self.sample_per_start


@dataclass
class StartRecord:
    recorded_energies: np.ndarray
    best_energy: float
    best_config: np.ndarray
    fixed_count: int = 0
    inferred_count: int = 0
    component_count: int = 1
    seeds: dict = field(default_factory=dict)
    reads_used: int = 0


@dataclass
class MultiStartResult:
    per_start: list
    best_config: np.ndarray
    best_energy: float
    preprocessed_fixed: int = 0

    @property
    def reads_used(self):
        return sum(r.reads_used for r in self.per_start)

    @property
    def all_energies(self):
        return np.concatenate([r.recorded_energies for r in self.per_start])


class _Recorder:
    def __init__(self, original):
        self.original = original
        self.energies = []
        self.best_e = np.inf
        self.best_c = None

    def add(self, rp: ReducedProblem, sample: Sample):
        full = extend_sample(rp, sample.configs)
        e = self.original.energies(full)
        self.energies.append(e)
        a = int(np.argmin(e))
        if e[a] < self.best_e:
            self.best_e, self.best_c = float(e[a]), full[a]

    def add_trivial(self, rp: ReducedProblem, reads=1):
        self.add(rp, Sample(np.zeros((reads, 0), dtype=np.int8),
                            np.full(reads, float(rp.problem.offset))))


def _global_reduction(p, params):
    rp = ReducedProblem.identity(p)
    if params.external_prefix_hook is not None:
        rp = rp.then(apply_fix(rp.problem, params.external_prefix_hook(rp.problem)))
    if params.preprocess_leaves:
        rp = rp.then(eliminate_leaves(rp.problem))
    return rp


def _draw(sampler, rp, spec, reads, seed, rec, seeds, phase):
    seeds[phase] = seed
    # an emptied problem needs no sampler call, but the slot still counts toward
    # the budget so spvar and restart campaigns stay read-for-read comparable
    if rp.problem.num_vars == 0:
        rec.add_trivial(rp, reads)
        return None, reads
    return sampler(rp.problem, spec.with_(num_reads=reads, seed=seed)), reads


def _one_start(p, base, spec, params, sampler, start):
    rec = _Recorder(p)
    seeds = {}
    reads = 0
    cur = base
    sp = params.spvar
    if params.zero_bias_mode:
        smp, used = _draw(sampler, cur, spec, params.correlation_sample_size,
                          derive_seed(params.master_seed, start, "correlation"), rec, seeds,
                          "correlation")
        reads += used
        if smp is not None:
            rec.add(cur, smp)
            cur = cur.then(correlation_prefix(cur.problem, smp, sp).reduced)

    smp, used = _draw(sampler, cur, spec, params.fixing_sample_size,
                      derive_seed(params.master_seed, start, "fix"), rec, seeds, "fix")
    reads += used
    if smp is not None:
        rec.add(cur, smp)
        cur = cur.then(spvar_fix(cur.problem, smp, sp).reduced)
    if params.per_start_leaves:
        cur = cur.then(eliminate_leaves(cur.problem))

    smp, used = _draw(sampler, cur, spec, params.solving_sample_size,
                      derive_seed(params.master_seed, start, "solve"), rec, seeds, "solve")
    reads += used
    components = len(connected_components(cur.problem))
    if smp is not None:
        if components > 1:
            smp = merge_component_solutions(cur.problem, smp)
        rec.add(cur, smp)

    return StartRecord(np.concatenate(rec.energies), rec.best_e, rec.best_c,
                       fixed_count=len(cur.fixed) - len(base.fixed),
                       inferred_count=len(cur.rules) - len(base.rules),
                       component_count=components, seeds=seeds, reads_used=reads)


def _restart(p, spec, params, sampler, start):
    rec = _Recorder(p)
    ident = ReducedProblem.identity(p)
    seeds = {}
    reads = 0
    phases = [("fix", params.fixing_sample_size), ("solve", params.solving_sample_size)]
    if params.zero_bias_mode:
        phases.insert(0, ("correlation", params.correlation_sample_size))
    for phase, size in phases:
        smp, used = _draw(sampler, ident, spec, size, derive_seed(params.master_seed, start, phase),
                          rec, seeds, phase)
        reads += used
        if smp is not None:
            rec.add(ident, smp)
    return StartRecord(np.concatenate(rec.energies), rec.best_e, rec.best_c,
                       component_count=len(connected_components(p)), seeds=seeds,
                       reads_used=reads)


def _run(fn, num_starts, jobs):
    def guarded(start):
        try:
            return fn(start)
        except Exception as exc:
            raise StartError(start, exc) from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(guarded, range(num_starts)))
    return [guarded(s) for s in range(num_starts)]


def _aggregate(records, preprocessed=0):
    best = min(range(len(records)), key=lambda s: (records[s].best_energy, s))
    return MultiStartResult(records, records[best].best_config, records[best].best_energy,
                            preprocessed)


def run_multistart(p: IsingProblem, spec: SamplerSpec, params: MultiStartParams,
                   sampler=default_sampler, jobs=1) -> MultiStartResult:
    """Run ``params.num_starts`` independent SPVAR starts on ``p``.

    Each start optionally fixes a correlated cluster (zero-bias mode), fixes
    persistent spins from a fixing sample, then samples the reduced problem.
    Every sampled state is mapped back to the original variables and its
    energy recorded. ``sampler(problem, spec)`` must return ``spec.num_reads``
    states; seeds come from ``params.master_seed`` so the result does not
    depend on ``jobs``.
    """
    base = _global_reduction(p, params)
    records = _run(lambda s: _one_start(p, base, spec, params, sampler, s), params.num_starts, jobs)
    return _aggregate(records, len(base.fixed) + len(base.rules))


def run_restarts(p: IsingProblem, spec: SamplerSpec, params: MultiStartParams,
                 sampler=default_sampler, jobs=1) -> MultiStartResult:
    """Baseline with the same sampler calls, sizes and seeds but no fixing."""
    records = _run(lambda s: _restart(p, spec, params, sampler, s), params.num_starts, jobs)
    return _aggregate(records)

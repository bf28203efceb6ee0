import numpy as np
import pytest

from spvarkit.model import Sample, evaluate_energy
from spvarkit.multistart import MultiStartParams, StartError, run_multistart, run_restarts
from spvarkit.samplers import SamplerSpec, sample
from spvarkit.spvar import SpvarParams

from conftest import enumerate_min, random_problem, random_tree, two_component_problem

SA = SamplerSpec(num_sweeps=20)
BF = SamplerSpec(kind="brute_force")


def test_brute_force_single_start_is_optimal(rng):
    p = random_problem(rng, 10)
    res = run_multistart(p, BF, MultiStartParams(num_starts=1, fixing_sample_size=10,
                                                 solving_sample_size=10))
    assert res.best_energy == enumerate_min(p)[0]
    assert evaluate_energy(p, res.best_config) == res.best_energy


def test_tree_needs_no_sampler_calls(rng):
    p = random_tree(rng, 12)
    calls = []

    def counting(problem, spec):
        calls.append(problem.num_vars)
        return sample(problem, spec)

    res = run_multistart(p, SA, MultiStartParams(num_starts=3, preprocess_leaves=True),
                         sampler=counting)
    assert calls == []
    assert res.best_energy == enumerate_min(p)[0]


def test_identical_fixing_sample_empties_problem(chain):
    def constant(problem, spec):
        return Sample.from_configs(problem, [[-1, 1, 1]] * spec.num_reads)

    params = MultiStartParams(num_starts=2, fixing_sample_size=4, solving_sample_size=4,
                              spvar=SpvarParams(elite_threshold=1.0))
    res = run_multistart(chain, SA, params, sampler=constant)
    assert res.best_energy == -4
    assert all(r.fixed_count == 3 for r in res.per_start)
    assert res.reads_used == params.total_reads


def test_budget_split():
    p = MultiStartParams.from_budget(100)
    assert (p.fixing_sample_size, p.solving_sample_size) == (50, 50)
    z = MultiStartParams.from_budget(101, zero_bias=True)
    assert (z.correlation_sample_size, z.fixing_sample_size, z.solving_sample_size) == (40, 30, 31)
    assert z.sample_per_start == 101


def test_budget_parity_and_seed_sharing(rng):
    p = random_problem(rng, 16, zero_bias=True)
    params = MultiStartParams.from_budget(30, zero_bias=True, num_starts=4, master_seed=5)
    a = run_multistart(p, SA, params)
    b = run_restarts(p, SA, params)
    assert a.reads_used == b.reads_used == params.total_reads
    assert [r.seeds for r in a.per_start] == [r.seeds for r in b.per_start]
    # the first phase sees the unreduced problem in both modes
    assert np.array_equal(a.per_start[0].recorded_energies[:12], b.per_start[0].recorded_energies[:12])


def test_best_never_worse_than_fixing_sample(rng):
    p = random_problem(rng, 14)
    params = MultiStartParams(num_starts=3, fixing_sample_size=10, solving_sample_size=10)
    res = run_multistart(p, SA, params)
    for rec in res.per_start:
        assert rec.best_energy <= rec.recorded_energies[:10].min()
        assert len(rec.recorded_energies) == 20
    assert res.best_energy == min(r.best_energy for r in res.per_start)


def test_parallel_starts_match_serial(rng):
    p = random_problem(rng, 14)
    params = MultiStartParams(num_starts=4, fixing_sample_size=8, solving_sample_size=8)
    a = run_multistart(p, SA, params, jobs=1)
    b = run_multistart(p, SA, params, jobs=3)
    assert a.best_energy == b.best_energy
    for x, y in zip(a.per_start, b.per_start):
        assert np.array_equal(x.recorded_energies, y.recorded_energies)


def test_components_are_merged(rng):
    p = two_component_problem(rng, 5, 6)
    params = MultiStartParams(num_starts=2, fixing_sample_size=10, solving_sample_size=10)
    res = run_multistart(p, SA, params)
    assert evaluate_energy(p, res.best_config) == res.best_energy


def test_start_failure_is_wrapped(chain):
    def broken(problem, spec):
        raise RuntimeError("boom")

    with pytest.raises(StartError) as err:
        run_multistart(chain, SA, MultiStartParams(num_starts=2), sampler=broken)
    assert err.value.start == 0


def test_external_hook_applied(chain):
    params = MultiStartParams(num_starts=1, fixing_sample_size=4, solving_sample_size=4,
                              external_prefix_hook=lambda q: {0: -1})
    res = run_multistart(chain, BF, params)
    assert res.preprocessed_fixed == 1 and res.best_config[0] == -1


def test_params_validation():
    with pytest.raises(ValueError):
        MultiStartParams(num_starts=0)
    with pytest.raises(ValueError):
        MultiStartParams(zero_bias_mode=True)

import itertools

import numpy as np
import pytest
from scipy import stats

from spvarkit.exact import exact_minimum
from spvarkit.generators import (ChimeraCoord, GenerationError, MaxKSatInstance, chimera_edges,
                                 degenerate_field_possible, degenerate_variables, gen_3d_lattice,
                                 gen_maxksat, gen_reduced_degeneracy, gen_u_range, gen_weak_strong,
                                 maxksat_to_qubo)
from spvarkit.model import IsingProblem
from spvarkit.samplers import SamplerSpec, brute_force_sample

from conftest import random_problem


@pytest.mark.parametrize("m, count", [(1, 16), (2, 80), (3, 192)])
def test_chimera_edge_counts(m, count):
    assert len(chimera_edges(m)) == count


def test_chimera_index_round_trip():
    for idx in range(72):
        assert ChimeraCoord.from_index(idx, 3).linear_index(3) == idx
    assert ChimeraCoord(1, 0, 1, 2).linear_index(2) == 8 * 2 + 4 + 2


def test_chimera_inactive_drops_edges():
    edges = chimera_edges(1, inactive=[0])
    assert len(edges) == 12 and all(0 not in e for e in edges)


def test_weak_strong_single_pair():
    p = gen_weak_strong(1, -0.42, seed=0)
    assert p.num_vars == 16 and len(p.couplers) == 36
    assert all(w == -1 for w in p.couplers.values())
    best = brute_force_sample(p, SamplerSpec(kind="brute_force", num_reads=4))
    assert np.all(best.configs[0] == best.configs[0][0])
    assert best.energies[1] > best.energies[0]


def test_weak_strong_degenerate_at_half():
    # h_w = -0.5 sits on the boundary excluded by the generator; build it by hand
    p = gen_weak_strong(1, -0.42, seed=0)
    h = np.where(p.biases == 1.0, 1.0, -0.5)
    q = IsingProblem(16, p.couplers, h)
    best = brute_force_sample(q, SamplerSpec(kind="brute_force", num_reads=3))
    assert best.energies[0] == best.energies[1] < best.energies[2]


def test_weak_strong_validation_and_seed():
    with pytest.raises(ValueError):
        gen_weak_strong(1, -0.6)
    a, b = gen_weak_strong(2, seed=1), gen_weak_strong(2, seed=1)
    assert a == b and a.num_vars == 64


def test_degenerate_field_examples():
    assert not degenerate_field_possible(1, [3])
    assert degenerate_field_possible(0, [1, -1])


def test_reduced_degeneracy_post_condition():
    p = gen_reduced_degeneracy(2, 5, True, seed=3)
    allowed = {-5, -4, -3, 3, 4, 5}
    assert set(p.couplers.values()) <= allowed and set(p.biases.tolist()) <= allowed
    assert degenerate_variables(p) == []
    assert p == gen_reduced_degeneracy(2, 5, True, seed=3)


def test_reduced_degeneracy_zero_bias_and_cap():
    p = gen_reduced_degeneracy(1, 6, False, seed=0)
    assert not p.has_bias and degenerate_variables(p) == []
    with pytest.raises(GenerationError):
        gen_reduced_degeneracy(2, 3, False, seed=0, max_passes=1)


def test_u_range_values():
    p = gen_u_range(2, 10, seed=1)
    w = np.array(list(p.couplers.values()))
    assert np.all(w != 0) and np.all(np.abs(w) <= 10) and np.all(np.abs(p.biases) <= 10)
    assert p == gen_u_range(2, 10, seed=1)


def test_u_range_uniformity():
    draws = np.concatenate([list(gen_u_range(8, 3, seed=s).couplers.values())
                            for s in range(70)])
    assert len(draws) >= 100_000
    _, counts = np.unique(draws, return_counts=True)
    assert len(counts) == 6
    assert stats.chisquare(counts).pvalue > 0.01


def test_lattice_counts():
    p = gen_3d_lattice(2, seed=0)
    assert p.num_vars == 8 and len(p.couplers) == 12
    q = gen_3d_lattice(3, seed=0)
    assert q.num_vars == 27 and len(q.couplers) == 81
    assert not q.has_bias and np.all(q.degree() == 6)
    b = gen_3d_lattice(3, "bimodal", seed=0)
    assert set(b.couplers.values()) <= {-1.0, 1.0}


def test_maxksat_generation():
    inst = gen_maxksat(2, 100, 100, seed=0)
    assert inst.phi == 1.0
    assert all(len({abs(l) for l in c}) == 2 for c in inst.clauses)
    assert inst == gen_maxksat(2, 100, 100, seed=0)
    with pytest.raises(ValueError):
        MaxKSatInstance(2, 3, ((1, -1),))


def _min_over_aux(qubo, n):
    table = {}
    for x in itertools.product((0, 1), repeat=qubo.num_vars):
        key = x[:n]
        table[key] = min(table.get(key, np.inf), qubo.energy(np.array(x)))
    return table


def test_two_clause_qubo():
    q, aux = maxksat_to_qubo(MaxKSatInstance(2, 2, ((1, 2),)))
    assert not aux
    table = _min_over_aux(q, 2)
    assert table == {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 0}


def test_three_clause_qubo():
    inst = MaxKSatInstance(3, 3, ((1, 2, 3),))
    q, aux = maxksat_to_qubo(inst)
    assert q.num_vars == 4 and len(aux) == 1
    for x, e in _min_over_aux(q, 3).items():
        assert e == (1 if x == (0, 0, 0) else 0)


def test_empty_instance_zero_qubo():
    q, aux = maxksat_to_qubo(MaxKSatInstance(3, 4, ()))
    assert q.terms == {} and q.offset == 0 and aux == {}


def test_shared_pair_stays_exact():
    inst = MaxKSatInstance(3, 4, ((1, 2, 3), (1, 2, 4), (-1, -2, 3), (1, -2, -4)))
    q, _ = maxksat_to_qubo(inst)
    for x, e in _min_over_aux(q, 4).items():
        assert e == inst.unsatisfied(x)


def test_exact_minimum_matches_enumeration(rng):
    for _ in range(5):
        p = random_problem(rng, 13, density=0.35)
        e, c = exact_minimum(p)
        best = brute_force_sample(p, SamplerSpec(kind="brute_force", num_reads=1))
        assert e == best.energies[0] and p.energies(c[None])[0] == e

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spvarkit.model import (DimensionError, InstanceParseError, IsingProblem, QuboProblem, Sample,
                            evaluate_energy, ising_to_qubo, parse_instance, qubo_to_ising,
                            write_instance)

from conftest import direct_energy, random_problem


def test_single_coupler_aligned():
    assert evaluate_energy(IsingProblem(2, {(0, 1): 1}), [1, 1]) == 1


def test_single_coupler_flipped():
    assert evaluate_energy(IsingProblem(2, {(0, 1): 1}), [1, -1]) == -1


def test_chain_energy(chain):
    # 2*(-1)(+1) + (-1)(+1)(+1) + 1*(-1) = -4
    assert evaluate_energy(chain, [-1, 1, 1]) == -4


def test_energy_dimension_error(chain):
    with pytest.raises(DimensionError):
        evaluate_energy(chain, [1, 1])


def test_diagonal_and_duplicate_couplers_rejected():
    with pytest.raises(ValueError):
        IsingProblem(2, {(1, 1): 1.0})
    with pytest.raises(ValueError):
        IsingProblem(2, {(0, 1): 1.0, (1, 0): 2.0})
    with pytest.raises(IndexError):
        IsingProblem(2, {(0, 2): 1.0})
    with pytest.raises(ValueError):
        IsingProblem(2, {(0, 1): float("inf")})


def test_vectorized_energies_match_direct_sum(rng):
    p = random_problem(rng, 9)
    configs = rng.choice([-1, 1], size=(50, 9))
    assert np.array_equal(p.energies(configs), [direct_energy(p, s) for s in configs])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_z2_symmetry_without_bias(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, 8, zero_bias=True)
    s = rng.choice([-1, 1], size=8)
    assert evaluate_energy(p, s) == evaluate_energy(p, -s)


def _qubo_energy_table(q):
    return {x: q.energy(np.array(x)) for x in itertools.product((0, 1), repeat=q.num_vars)}


def test_qubo_diagonal_only():
    p = qubo_to_ising(QuboProblem(1, {(0, 0): 1}))
    assert p.biases[0] == 0.5 and p.offset == 0.5 and not p.couplers


def test_qubo_empty():
    p = qubo_to_ising(QuboProblem(3, {}))
    assert p.offset == 0 and not p.couplers and not p.has_bias


def test_qubo_offdiagonal_all_assignments():
    q = QuboProblem(2, {(0, 1): 4})
    p = qubo_to_ising(q)
    assert p.couplers == {(0, 1): 1.0}
    assert list(p.biases) == [1.0, 1.0] and p.offset == 1.0
    for x, e in _qubo_energy_table(q).items():
        assert evaluate_energy(p, 2 * np.array(x) - 1) == e


def test_ising_to_qubo_zero_problem():
    q = ising_to_qubo(IsingProblem(3))
    assert q.terms == {} and q.offset == 0


@pytest.mark.parametrize("n", [2, 6])
def test_round_trip_energies(rng, n):
    p = IsingProblem(2, {(0, 1): 1}) if n == 2 else random_problem(rng, n)
    q = ising_to_qubo(p)
    back = qubo_to_ising(q)
    for s in itertools.product((-1, 1), repeat=n):
        x = (np.array(s) + 1) // 2
        assert q.energy(x) == evaluate_energy(p, s) == evaluate_energy(back, s)


def test_parse_basic():
    p = parse_instance("0 1 -1\n1 1 2")
    assert p.couplers == {(0, 1): -1.0} and list(p.biases) == [0.0, 2.0]


def test_parse_duplicate_pair_names_line():
    with pytest.raises(InstanceParseError) as err:
        parse_instance("0 0 1\n0 0 1")
    assert err.value.lineno == 2


@pytest.mark.parametrize("text", ["0 1", "0 x 1", "a 1 2", "-1 0 2"])
def test_parse_malformed(text):
    with pytest.raises(InstanceParseError):
        parse_instance(text)


def test_parse_out_of_range_with_header():
    with pytest.raises(InstanceParseError):
        parse_instance("# vars 2\n0 2 1.0")


def test_write_parse_round_trip(rng):
    p = random_problem(rng, 10)
    p = IsingProblem(10, {k: v * 0.37 for k, v in p.couplers.items()}, p.biases / 3, -1.25)
    assert parse_instance(write_instance(p)) == p


def test_write_empty_problem_is_header_only():
    text = write_instance(IsingProblem(0))
    assert all(line.startswith("#") for line in text.splitlines())
    assert parse_instance(text) == IsingProblem(0)


def test_write_single_bias_one_line():
    body = [l for l in write_instance(IsingProblem(1, {}, [3.0])).splitlines()
            if not l.startswith("#")]
    assert body == ["0 0 3.0"]


def test_write_is_ordered():
    p = IsingProblem(3, {(1, 2): 1, (0, 2): 1, (0, 1): 1}, [0, 1, 0])
    body = [tuple(map(int, l.split()[:2])) for l in write_instance(p).splitlines()
            if not l.startswith("#")]
    assert body == sorted(body)


def test_sample_sorting_breaks_ties_lexicographically():
    configs = [[1, 1], [-1, 1], [1, -1], [-1, -1]]
    s = Sample(configs, [0.0, 0.0, -1.0, 0.0]).sorted()
    assert s.configs.tolist() == [[1, -1], [-1, -1], [-1, 1], [1, 1]]


def test_sample_check(chain):
    s = Sample.from_configs(chain, [[-1, 1, 1], [1, 1, 1]])
    s.check(chain)
    with pytest.raises(ValueError):
        Sample(s.configs, s.energies + 1).check(chain)

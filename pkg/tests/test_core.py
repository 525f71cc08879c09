import math

import numpy as np
import pytest

from subsampling import ModularFunction, WeightedCoverage
from subsampling.core import (
    IndependenceOracle,
    OracleError,
    SampleBits,
    ValueOracle,
    arrival_marginal,
    arrival_marginal_sum,
    arrival_prefix,
    bits_probability,
    check_monotone,
    check_nonnegative,
    check_probability,
    check_submodular,
    derive_seed,
    draw_sample_bits,
    enumerate_bit_vectors,
    marginal,
    set_marginal,
    splitmix64,
)
from subsampling.constraints import Matchoid, UniformMatroid


def cardinality(n):
    return ValueOracle(ModularFunction(np.ones(n)))


def test_marginal_cardinality():
    f = cardinality(4)
    assert marginal(f, 2, {0, 1}) == 1
    assert marginal(f, 1, {0, 1}) == 0


def test_marginal_costs_two_queries():
    f = cardinality(4)
    marginal(f, 2, {0})
    assert f.query_count == 2


def test_coverage_marginals():
    # a:{1,2} b:{2,3} c:{4}
    f = ValueOracle(WeightedCoverage([[1, 2], [2, 3], [4]]))
    assert marginal(f, 1, {0}) == 1
    assert set_marginal(f, {1, 2}, {0}) == 2
    assert set_marginal(f, set(), {0}) == 0
    assert set_marginal(f, {0, 1}, {0, 1}) == 0


def test_arrival_marginal():
    # a:{1}, b:{1,2}; b sees only a before it
    f = ValueOracle(WeightedCoverage([[1], [1, 2]]))
    assert arrival_marginal(f, 1, {0, 1}) == 1
    assert arrival_marginal(f, 0, {0, 1}) == f.objective.value({0})
    assert arrival_marginal(f, 1, set()) == f.objective.value({1})


def test_arrival_prefix_with_rank():
    rank = np.array([2, 0, 1])  # arrival order 1, 2, 0
    assert arrival_prefix(0, {0, 1, 2}, rank) == frozenset({1, 2})
    assert arrival_prefix(1, {0, 1, 2}, rank) == frozenset()


def test_arrival_marginal_sum():
    w = np.array([0.5, 1.5, 2.0, 4.0])
    f = ValueOracle(ModularFunction(w))
    assert arrival_marginal_sum(f, set(), {0, 1}) == 0
    assert arrival_marginal_sum(f, {2}, {0, 1, 2}) == arrival_marginal(f, 2, {0, 1, 2})
    assert arrival_marginal_sum(f, {1, 3}, {0, 1, 2, 3}) == pytest.approx(5.5)


def test_oracle_rejects_foreign_elements():
    f = cardinality(3)
    with pytest.raises(OracleError):
        f.evaluate({5})


def test_matchoid_charges_per_member():
    g = Matchoid(3, [([0, 1, 2], UniformMatroid(3, 1)), ([0, 1, 2], UniformMatroid(3, 2))])
    ind = IndependenceOracle(g)
    assert ind.is_independent({0})
    assert ind.query_count == 2
    # first member rejects, second is not consulted
    assert not ind.is_independent({0, 1})
    assert ind.query_count == 3


def test_bits_q_one_all_set():
    for seed in range(5):
        assert draw_sample_bits(20, 1.0, seed).bits.all()


def test_bits_empty():
    assert len(draw_sample_bits(0, 0.3, 1)) == 0


def test_bits_mean_within_three_sigma():
    n, q = 10_000, 0.25
    b = draw_sample_bits(n, q, 12345)
    assert abs(b.bits.mean() - q) <= 3 * math.sqrt(q * (1 - q) / n)


def test_bits_prefix_stable():
    a = draw_sample_bits(50, 0.4, 9).bits
    b = draw_sample_bits(80, 0.4, 9).bits
    assert (a == b[:50]).all()


def test_bad_probability():
    for q in (0.0, -0.1, 1.5, float("nan")):
        with pytest.raises(ValueError):
            check_probability(q)


def test_sample_bits_helpers():
    sb = SampleBits.from_sequence([1, 0, 1], 0.5)
    assert sb.sampled() == [0, 2]
    assert sb[1] is False


def test_enumeration_covers_all_vectors():
    vecs = [tuple(v) for v in enumerate_bit_vectors(3)]
    assert len(set(vecs)) == 8
    assert math.fsum(bits_probability(np.array(v), 0.3) for v in vecs) == pytest.approx(1.0)


def test_seed_mixer_frozen():
    # reference values of the 64-bit mixer
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(1) == 0x910A2DEC89025CC1
    assert derive_seed(0, 0) != derive_seed(0, 1)
    assert derive_seed(7, 3) == derive_seed(7, 3)


def test_validators():
    cov = WeightedCoverage([[0, 1], [1], [2]])
    assert check_submodular(cov) is None
    assert check_monotone(cov) is None
    assert check_nonnegative(cov) is None

    class Supermodular:
        n = 2

        def value(self, S):
            return float(len(S) ** 2)

    witness = check_submodular(Supermodular())
    assert witness is not None
    A, B, e = witness
    assert A <= B and e not in B

    neg = ModularFunction([1.0, -2.0])
    assert check_nonnegative(neg) == frozenset({1})
    assert check_monotone(neg) is not None

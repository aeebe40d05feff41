import numpy as np
import pytest

from hstmatch.generators import FAMILIES, GeneratorSpec, generate_instance
from hstmatch.metric import validate_metric
from hstmatch.oracle import optimal_matching


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec("ring", 4, seed=0)
    with pytest.raises(ValueError):
        GeneratorSpec("star", 0, seed=0)
    with pytest.raises(ValueError):
        GeneratorSpec("euclidean", 4, seed=0, dim=0)


def test_star_instance_structure_and_opt():
    inst = generate_instance(GeneratorSpec("star", 3, seed=0))
    assert inst.servers == (1, 2, 3)
    assert inst.requests == (0, 1, 2)
    assert optimal_matching(inst).cost == pytest.approx(1.0)


def test_nested_uniform_structure_and_opt():
    inst = generate_instance(GeneratorSpec("nested-uniform", 2, seed=0))
    assert inst.servers == (1, 2)
    assert inst.requests == (0, 1)  # the unshared request comes first
    assert optimal_matching(inst).cost == pytest.approx(1.0)
    big = generate_instance(GeneratorSpec("nested-uniform", 9, seed=0))
    assert optimal_matching(big).cost == pytest.approx(1.0)


def test_line_single_pair_opt_is_coordinate_gap():
    inst = generate_instance(GeneratorSpec("line", 1, seed=5))
    assert inst.n == 1
    gap = float(inst.metric.dist[inst.servers[0], inst.requests[0]])
    assert optimal_matching(inst).cost == pytest.approx(gap)


def test_euclidean_and_line_sizes():
    inst = generate_instance(GeneratorSpec("euclidean", 5, seed=1, dim=3))
    assert inst.n == 5 and len(inst.metric) == 10
    assert sorted(inst.servers + inst.requests) == list(range(10))
    inst = generate_instance(GeneratorSpec("line", 4, seed=1))
    assert inst.n == 4 and len(inst.metric) == 8


@pytest.mark.parametrize("family", FAMILIES)
def test_generated_metrics_are_valid(family):
    for n in (1, 2, 7, 128):
        inst = generate_instance(GeneratorSpec(family, n, seed=n))
        assert validate_metric(inst.metric) is None


def test_generation_is_deterministic_in_seed():
    a = generate_instance(GeneratorSpec("euclidean", 6, seed=42))
    b = generate_instance(GeneratorSpec("euclidean", 6, seed=42))
    c = generate_instance(GeneratorSpec("euclidean", 6, seed=43))
    assert np.array_equal(a.metric.dist, b.metric.dist)
    assert a.servers == b.servers and a.requests == b.requests
    assert not np.array_equal(a.metric.dist, c.metric.dist)

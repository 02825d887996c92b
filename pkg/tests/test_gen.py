"""Generator soundness: every instance passes its model's checker."""

import random

import pytest

from cuplab.gen import GenParams, GenerationError, generate
from cuplab.graphs import safe_subgraph
from cuplab.validation import (
    FailedClause,
    check_bft_cup,
    check_bft_cupft,
    is_extended_k_osr,
)


def test_cup_instances_pass_checker():
    rng = random.Random(21)
    for seed in range(25):
        n = rng.randint(4, 12)
        f = rng.randint(0, min(2, (n - 1) // 3))
        inst = generate(GenParams(n, f, "cup"), seed)
        assert check_bft_cup(inst.graph, inst.faulty, f).verdict
        assert len(inst.graph.vertices) == n
        assert len(inst.faulty) == f


def test_cupft_instances_pass_checker():
    rng = random.Random(22)
    for seed in range(20):
        n = rng.randint(5, 10)
        f = rng.randint(0, min(2, (n - 1) // 3))
        inst = generate(GenParams(n, f, "cupft"), seed)
        assert check_bft_cupft(inst.graph, inst.faulty, f).verdict


def test_cup_only_instances_have_competing_cores():
    for seed in range(15):
        inst = generate(GenParams(8, 1, "cup-only"), seed)
        assert check_bft_cup(inst.graph, inst.faulty, 1).verdict
        report, _ = is_extended_k_osr(safe_subgraph(inst.graph, inst.faulty), 2)
        assert not report.verdict
        assert report.failed_clause is FailedClause.CORE_NOT_UNIQUE
        assert inst.clusters is not None
        side_a, side_b = inst.clusters
        assert not side_a & side_b


def test_spec_sizes():
    inst = generate(GenParams(7, 1, "cupft"), 5)
    assert check_bft_cupft(inst.graph, inst.faulty, 1).verdict
    inst = generate(GenParams(4, 1, "cup"), 5)
    assert check_bft_cup(inst.graph, inst.faulty, 1).verdict


def test_determinism():
    a = generate(GenParams(9, 1, "cupft"), 123)
    b = generate(GenParams(9, 1, "cupft"), 123)
    assert a.graph == b.graph and a.faulty == b.faulty


def test_parameter_validation():
    with pytest.raises(ValueError):
        GenParams(3, 1, "cup")
    with pytest.raises(ValueError):
        GenParams(7, 1, "cup-only")
    with pytest.raises(ValueError):
        GenParams(8, 1, "bogus")


def test_generation_error_carries_diagnostics():
    err = GenerationError(GenParams(8, 1, "cup-only"), 7, 40, "because")
    assert "cup-only" in str(err) and "because" in str(err)

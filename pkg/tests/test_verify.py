import numpy as np
import pytest
from hypothesis import given, settings

from conftest import seeds
from unirel import families as fam
from unirel.verify import SUITES, Check, run_suites


@pytest.mark.parametrize("name", ["identity", "u1", "u2", "u3"])
def test_named_examples_pass_every_suite(name):
    rows = run_suites(getattr(fam, name)(), N=3)
    assert {r.suite for r in rows} == set(SUITES)
    assert all(r.passed for r in rows), [r for r in rows if not r.passed]


@settings(max_examples=8)
@given(seeds)
def test_random_relations_pass(seed):
    rng = np.random.default_rng(seed)
    rel = fam.random_relation(int(rng.integers(1, 3)), int(rng.integers(1, 3)), rng)
    assert all(r.passed for r in run_suites(rel, N=3, seed=seed))


def test_check_row():
    row = Check("s", "n", 2e-10, 1e-10)
    assert not row.passed and row.as_dict()["passed"] is False


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suites(fam.u1(), "nope")

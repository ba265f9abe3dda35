import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyadmax.errors import ResourceError
from dyadmax.trees import (StepFunction, Tree, build_kadic, build_random_tree, integral_power,
                           load_tree, node_average, node_averages, read_step_csv,
                           read_tree_jsonl, save_tree, tree_to_jsonl, write_step_csv)


def test_kadic_shape():
    t = build_kadic(3, 2)
    assert t.n_nodes == 1 + 3 + 9
    assert len(t.leaves) == 9
    assert t.height == 2
    np.testing.assert_allclose(t.measure[t.leaves], 1 / 9)
    assert list(t.children(0)) == [1, 2, 3]
    assert t.ancestors(12) == [12, 3, 0]


def test_kadic_budget_error_names_budget():
    with pytest.raises(ResourceError, match="100"):
        build_kadic(2, 10, budget=100)


@pytest.mark.parametrize("parent, measure, msg", [
    ([-1, 0], [1.0, 1.0], "two children"),
    ([-1, 0, 0], [1.0, 0.5, 0.4], "sum to"),
    ([-1, 0, 0], [0.9, 0.45, 0.45], "root measure"),
    ([-1, 0, 0], [1.0, 1.0, 0.0], "positive"),
    ([-1, 2, 0], [1.0, 0.5, 0.5], "breadth-first"),
])
def test_invalid_trees_rejected(parent, measure, msg):
    with pytest.raises(ValueError, match=msg):
        Tree(parent, measure)


def test_from_parents_relabels():
    # node 3 is the root, given out of order
    t = Tree.from_parents([3, 3, 0, None, 0], [0.5, 0.5, 0.25, 1.0, 0.25])
    assert list(t.parent) == [-1, 0, 0, 1, 1]
    assert t.measure[3] == 0.25


def test_bad_node_is_rejected():
    t = build_kadic(2, 2)
    with pytest.raises(ValueError, match="does not belong"):
        t.ancestors(99)


def test_step_function_validation():
    t = build_kadic(2, 1)
    with pytest.raises(ValueError, match="one value per leaf"):
        StepFunction(t, [1.0])
    with pytest.raises(ValueError, match="nonnegative"):
        StepFunction(t, [1.0, -1.0])


def test_averages_match_direct_sum():
    for seed in range(20):
        t = build_random_tree(seed, max_depth=5)
        rng = np.random.default_rng(seed)
        phi = StepFunction(t, rng.uniform(0, 5, len(t.leaves)))
        avg = node_averages(t, phi)
        for node in range(t.n_nodes):
            assert avg[node] == pytest.approx(node_average(t, phi, node), rel=1e-13)


def test_constant_function_averages():
    t = build_kadic(2, 4)
    avg = node_averages(t, StepFunction.constant(t, 2.5))
    np.testing.assert_allclose(avg, 2.5, rtol=1e-14)


def test_integral_power():
    t = build_kadic(2, 1)
    phi = StepFunction(t, [1.0, 3.0])
    assert integral_power(t, phi, 2) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        integral_power(t, phi, 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), law=st.sampled_from(["equal", "dirichlet", "skewed"]),
       depth=st.integers(1, 6), kids=st.integers(2, 4))
def test_random_trees_are_valid(seed, law, depth, kids):
    t = build_random_tree(seed, max_depth=depth, max_children=kids, split_law=law)
    assert t.height <= depth
    assert math.isclose(t.measure[t.leaves].sum(), 1.0, rel_tol=1e-12)
    assert np.all(t.n_children[t.n_children > 0] >= 2)


def test_random_tree_is_deterministic():
    a = build_random_tree(42, max_depth=6)
    b = build_random_tree(42, max_depth=6)
    assert np.array_equal(a.parent, b.parent) and np.array_equal(a.measure, b.measure)


def test_jsonl_round_trip(tmp_path):
    t = build_random_tree(3, max_depth=5)
    t2 = read_tree_jsonl(io.StringIO(tree_to_jsonl(t)))
    assert np.array_equal(t.parent, t2.parent)
    assert np.array_equal(t.measure, t2.measure)
    path = tmp_path / "t.jsonl"
    save_tree(t, path)
    assert np.array_equal(load_tree(path).measure, t.measure)


def test_step_csv_round_trip():
    t = build_random_tree(5, max_depth=4)
    phi = StepFunction(t, np.random.default_rng(0).lognormal(size=len(t.leaves)))
    buf = io.StringIO()
    write_step_csv(phi, buf)
    buf.seek(0)
    assert np.array_equal(read_step_csv(t, buf).values, phi.values)


def test_step_csv_rejects_internal_node():
    t = build_kadic(2, 1)
    with pytest.raises(ValueError, match="not a leaf"):
        read_step_csv(t, io.StringIO("leaf_id,value\n0,1.0\n"))

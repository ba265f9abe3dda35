import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import direct_averages, naive_maximal, random_instance
from dyadmax.maximal import (linearize, maximal_function, mixed_integral, tree_moments,
                             weak_type_check)
from dyadmax.trees import StepFunction, build_kadic, build_random_tree, node_averages


def test_hand_example():
    # leaves 3..6 of a depth-2 dyadic tree carry 4, 0, 1, 1
    t = build_kadic(2, 2)
    phi = StepFunction(t, [4.0, 0.0, 1.0, 1.0])
    m = maximal_function(t, phi)
    # root avg 1.5, node 1 avg 2, node 2 avg 1
    np.testing.assert_array_equal(m.values, [4.0, 2.0, 1.5, 1.5])


@pytest.mark.parametrize("seed", range(500))
def test_matches_naive_oracle(seed):
    tree, phi = random_instance(seed)
    fast = maximal_function(tree, phi).values
    # exact on shared averages; the averages themselves are checked against fsum
    np.testing.assert_array_equal(fast, naive_maximal(tree, node_averages(tree, phi)))
    np.testing.assert_allclose(fast, naive_maximal(tree, direct_averages(tree, phi)), rtol=1e-13, atol=0)


def test_maximal_dominates_function():
    for seed in range(30):
        tree, phi = random_instance(seed)
        assert np.all(maximal_function(tree, phi).values >= phi.values * (1 - 1e-14))


def test_constant_is_fixed_point():
    t = build_random_tree(11, max_depth=5)
    phi = StepFunction.constant(t, 3.0)
    np.testing.assert_allclose(maximal_function(t, phi).values, 3.0, rtol=1e-14)


@pytest.mark.parametrize("seed", range(60))
def test_linearization_invariants(seed):
    tree, phi = random_instance(seed, max_depth=8)
    L = linearize(tree, phi, q=1.5)
    # reconstructs the maximal function exactly (same averages)
    np.testing.assert_array_equal(L.reconstruct(), maximal_function(tree, phi).values)
    # atoms partition the space
    assert L.a.sum() == pytest.approx(1.0, rel=1e-13)
    assert np.all(L.a >= 0)
    # a_I = mu(I) - sum of the selected nodes directly below I
    np.testing.assert_allclose(L.a, L.mu - L.star_sums(), rtol=1e-9, atol=1e-13)
    # ranks climb by one along star links, root is alone at rank 0
    assert L.nodes[0] == 0 and L.rank[0] == 0 and L.star[0] == -1
    assert np.all(L.rank[1:] == L.rank[L.star[1:]] + 1)
    # each selected non-root node has average strictly above its star parent
    assert np.all(L.y[1:] > L.y[L.star[1:]])
    # x_I^q a_I^(1-q) ... equivalently x_I = a^(1/q) * mean of phi on the atom
    pos = L.a > 0
    np.testing.assert_allclose(L.x[pos], L.a[pos] ** (1 / 1.5 - 1) * L.atom_integral[pos], rtol=1e-14)


def test_linearization_ties_go_to_topmost():
    t = build_kadic(2, 2)
    phi = StepFunction.constant(t, 1.0)
    L = linearize(t, phi)
    assert list(L.nodes) == [0]
    assert L.a[0] == pytest.approx(1.0)


def test_linearization_csv_columns():
    t = build_kadic(2, 2)
    L = linearize(t, StepFunction(t, [4.0, 0.0, 1.0, 1.0]))
    buf = io.StringIO()
    L.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "node_id,rank_in_S,mu,a_I,x_I,y_I,star_parent"
    # root with the 1/1 leaves, node 1 (avg 2), leaf 3 (avg 4)
    assert [int(r.split(",")[0]) for r in lines[1:]] == [0, 1, 3]


def test_linearize_rejects_q():
    t = build_kadic(2, 1)
    with pytest.raises(ValueError):
        linearize(t, StepFunction.constant(t, 1.0), q=1.0)


def test_weak_type_inequality_and_domain():
    tree, phi = random_instance(4)
    f = float(np.dot(phi.leaf_measure, phi.values))
    with pytest.raises(ValueError, match="must exceed"):
        weak_type_check(tree, phi, f)
    mvals = maximal_function(tree, phi).values
    for lam in np.unique(mvals[mvals > f])[:10]:
        measure, bound = weak_type_check(tree, phi, float(lam))
        assert measure <= bound * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), s=st.floats(0, 3), t=st.floats(0, 3))
def test_mixed_integral_matches_moments(seed, s, t):
    tree, phi = random_instance(seed, max_depth=6)
    val = mixed_integral(tree, phi, s, t)
    m = maximal_function(tree, phi).values
    assert val == pytest.approx(float(np.dot(phi.leaf_measure, m**s * phi.values**t)), rel=1e-12)


def test_moments_fields():
    tree, phi = random_instance(2)
    m = tree_moments(tree, phi, 3.0, 2.0)
    assert m.f == pytest.approx(float(node_averages(tree, phi)[0]), rel=1e-13)
    assert m.MTp >= m.F * (1 - 1e-13)
    assert m.mixed == pytest.approx(mixed_integral(tree, phi, 1.0, 2.0), rel=1e-13)

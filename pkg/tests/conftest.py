import math

import numpy as np

from dyadmax.trees import StepFunction, build_kadic, build_random_tree


def direct_averages(tree, phi):
    """Every node average summed from scratch over its own leaves."""
    pos = tree.leaf_position
    out = np.empty(tree.n_nodes)
    for node in range(tree.n_nodes):
        leaves = np.array(tree.subtree_leaves(node))
        out[node] = math.fsum((tree.measure[leaves] * phi.values[pos[leaves]]).tolist()) / tree.measure[node]
    return out


def naive_maximal(tree, avg):
    """Per-leaf max of ``avg`` over the leaf's ancestor chain, walked one link at a time."""
    return np.array([max(avg[node] for node in tree.ancestors(int(leaf))) for leaf in tree.leaves])


def random_instance(seed, max_depth=10):
    rng = np.random.default_rng(seed)
    if seed % 2 == 0:
        tree = build_kadic(2, int(rng.integers(1, max_depth + 1)))
    else:
        tree = build_random_tree(seed, max_depth=int(rng.integers(1, max_depth + 1)), max_children=3,
                                 split_law=("equal", "dirichlet", "skewed")[seed % 3])
    values = rng.lognormal(0.0, 1.0, len(tree.leaves))
    return tree, StepFunction(tree, values)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

"""Finite measured trees, leaf-constant functions on them, and quotient trees.

Nodes are stored in breadth-first order, so a node's children occupy a
contiguous id range and every level is a contiguous block.  All arrays are
frozen after construction.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ResourceError

DEFAULT_NODE_BUDGET = 2**22
MEASURE_RTOL = 1e-14


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Tree:
    """A finite tree of nested sets with positive measures, root mass 1.

    ``parent[0] == -1``; node ids are breadth-first.  Construct through
    :func:`build_kadic`, :func:`build_random_tree` or :meth:`from_parents`,
    which establish the ordering.
    """

    parent: np.ndarray
    measure: np.ndarray
    depth: np.ndarray = field(init=False)
    first_child: np.ndarray = field(init=False)
    n_children: np.ndarray = field(init=False)

    def __post_init__(self):
        parent = _frozen(self.parent, np.int64)
        measure = _frozen(self.measure, np.float64)
        n = len(parent)
        if n == 0 or parent[0] != -1 or np.any(parent[1:] < 0):
            raise ValueError("node 0 must be the unique root")
        if np.any(parent[1:] >= np.arange(1, n)):
            raise ValueError("nodes must be in breadth-first order (parent id < child id)")
        if np.any(np.diff(parent[1:]) < 0):
            raise ValueError("children of a node must be contiguous and levels ordered")
        depth = np.zeros(n, dtype=np.int64)
        safe_parent = np.where(parent < 0, 0, parent)
        while True:
            nxt = np.where(parent < 0, 0, depth[safe_parent] + 1)
            if np.array_equal(nxt, depth):
                break
            depth = nxt
        counts = np.bincount(parent[1:], minlength=n)
        first = np.full(n, -1, dtype=np.int64)
        if n > 1:
            kids = np.arange(1, n)
            # first occurrence of each parent id in the (sorted) parent column
            uniq, idx = np.unique(parent[1:], return_index=True)
            first[uniq] = kids[idx]
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "depth", _frozen(depth, np.int64))
        object.__setattr__(self, "first_child", _frozen(first, np.int64))
        object.__setattr__(self, "n_children", _frozen(counts, np.int64))
        self.validate()

    def validate(self) -> None:
        m = self.measure
        if not np.all(m > 0):
            raise ValueError("every node needs positive measure")
        if not math.isclose(m[0], 1.0, rel_tol=MEASURE_RTOL, abs_tol=0.0):
            raise ValueError(f"root measure must be 1, got {m[0]!r}")
        internal = self.n_children > 0
        if np.any(self.n_children[internal] < 2):
            raise ValueError("every internal node needs at least two children")
        sums = np.bincount(self.parent[1:], weights=m[1:], minlength=len(m))
        bad = internal & ~np.isclose(sums, m, rtol=MEASURE_RTOL, atol=0.0)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise ValueError(f"children of node {i} sum to {sums[i]!r}, not {m[i]!r}")

    @classmethod
    def from_parents(cls, parents, measures) -> "Tree":
        """Build from arbitrary ids ``0..n-1``; relabels into breadth-first order."""
        parents = list(parents)
        measures = list(measures)
        roots = [i for i, p in enumerate(parents) if p is None or p < 0]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        kids: dict[int, list[int]] = {i: [] for i in range(len(parents))}
        for i, p in enumerate(parents):
            if p is not None and p >= 0:
                kids[p].append(i)
        order = [roots[0]]
        for node in order:
            order.extend(kids[node])
        if len(order) != len(parents):
            raise ValueError("parent links do not form a single connected tree")
        relabel = {old: new for new, old in enumerate(order)}
        new_parent = [-1] + [relabel[parents[old]] for old in order[1:]]
        return cls(new_parent, [measures[old] for old in order])

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @cached_property
    def leaves(self) -> np.ndarray:
        return _frozen(np.flatnonzero(self.n_children == 0), np.int64)

    @cached_property
    def leaf_position(self) -> np.ndarray:
        """Map node id -> index into :attr:`leaves` (``-1`` for internal nodes)."""
        pos = np.full(self.n_nodes, -1, dtype=np.int64)
        pos[self.leaves] = np.arange(len(self.leaves))
        return _frozen(pos, np.int64)

    @cached_property
    def levels(self) -> tuple[np.ndarray, ...]:
        bounds = np.flatnonzero(np.diff(self.depth)) + 1
        return tuple(np.split(np.arange(self.n_nodes), bounds))

    @property
    def height(self) -> int:
        return int(self.depth[-1])

    def children(self, node: int) -> range:
        self._check_node(node)
        start = self.first_child[node]
        return range(start, start + self.n_children[node]) if start >= 0 else range(0)

    def ancestors(self, node: int) -> list[int]:
        """``node`` and all its ancestors, ordered from ``node`` up to the root."""
        self._check_node(node)
        chain = [node]
        while self.parent[chain[-1]] >= 0:
            chain.append(int(self.parent[chain[-1]]))
        return chain

    def subtree_leaves(self, node: int) -> list[int]:
        self._check_node(node)
        out, stack = [], [node]
        while stack:
            v = stack.pop()
            kids = self.children(v)
            if len(kids) == 0:
                out.append(v)
            else:
                stack.extend(kids)
        return sorted(out)

    def _check_node(self, node) -> None:
        if not (isinstance(node, (int, np.integer)) and 0 <= node < self.n_nodes):
            raise ValueError(f"node {node!r} does not belong to this tree of {self.n_nodes} nodes")


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Nonnegative function constant on each leaf; ``values[i]`` lives on ``tree.leaves[i]``."""

    tree: Tree
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values, np.float64)
        if v.shape != (len(self.tree.leaves),):
            raise ValueError(f"need one value per leaf ({len(self.tree.leaves)}), got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("step function values must be finite and nonnegative")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, tree: Tree, c: float) -> "StepFunction":
        return cls(tree, np.full(len(tree.leaves), float(c)))

    @cached_property
    def leaf_measure(self) -> np.ndarray:
        return self.tree.measure[self.tree.leaves]


# --------------------------------------------------------------------------
# construction


def build_kadic(k: int, depth: int, budget: int = DEFAULT_NODE_BUDGET) -> Tree:
    """Homogeneous tree: every node at depth < ``depth`` has ``k`` equal children."""
    if k < 2 or depth < 1:
        raise ValueError(f"need k >= 2 and depth >= 1, got k={k}, depth={depth}")
    n_nodes = (k ** (depth + 1) - 1) // (k - 1)
    if n_nodes > budget:
        raise ResourceError(f"k-adic tree with k={k}, depth={depth} needs {n_nodes} nodes; "
                            f"node budget is {budget}")
    parent = [np.array([-1])]
    measure = [np.array([1.0])]
    m, start, width = 1.0, 0, 1
    for _ in range(depth):
        m = m / k
        parent.append(np.repeat(np.arange(start, start + width), k))
        measure.append(np.full(width * k, m))
        start, width = start + width, width * k
    return Tree(np.concatenate(parent), np.concatenate(measure))


SPLIT_LAWS = ("equal", "dirichlet", "skewed")


def build_random_tree(seed: int, max_depth: int = 6, max_children: int = 3,
                      split_law: str = "dirichlet", stop_prob: float = 0.3,
                      budget: int = DEFAULT_NODE_BUDGET) -> Tree:
    """Random nonhomogeneous tree, deterministic in ``seed``.

    Each node above ``max_depth`` is a leaf with probability ``stop_prob``
    (the root always splits); otherwise it gets 2..max_children children whose
    shares follow ``split_law``.
    """
    if max_children < 2:
        raise ValueError(f"max_children must be >= 2, got {max_children}")
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    if split_law not in SPLIT_LAWS:
        raise ValueError(f"split_law must be one of {SPLIT_LAWS}, got {split_law!r}")
    rng = np.random.default_rng(seed)
    parent, measure, depth = [-1], [1.0], [0]
    i = 0
    while i < len(parent):
        d = depth[i]
        split = d < max_depth and (i == 0 or rng.random() >= stop_prob)
        if split:
            n = int(rng.integers(2, max_children + 1))
            if split_law == "equal":
                w = np.full(n, 1.0 / n)
            else:
                conc = 1.0 if split_law == "dirichlet" else 0.3
                w = rng.dirichlet(np.full(n, conc))
                w = (w + 1e-3) / (1.0 + n * 1e-3)
            share = [measure[i] * float(x) for x in w[:-1]]
            share.append(measure[i] - math.fsum(share))
            parent.extend([i] * n)
            measure.extend(share)
            depth.extend([d + 1] * n)
            if len(parent) > budget:
                raise ResourceError(f"random tree exceeded node budget {budget}")
        i += 1
    return Tree(parent, measure)


# --------------------------------------------------------------------------
# integrals


def node_integrals(tree: Tree, phi: StepFunction) -> np.ndarray:
    """``int_I phi`` for every node, accumulated bottom-up level by level."""
    total = np.zeros(tree.n_nodes)
    total[tree.leaves] = phi.leaf_measure * phi.values
    for nodes in reversed(tree.levels[1:]):
        np.add.at(total, tree.parent[nodes], total[nodes])
    return total


def node_averages(tree: Tree, phi: StepFunction) -> np.ndarray:
    return node_integrals(tree, phi) / tree.measure


def node_average(tree: Tree, phi: StepFunction, node: int) -> float:
    """Average of ``phi`` over one node, summed directly over its leaves."""
    if phi.tree is not tree:
        raise ValueError("step function is defined on a different tree")
    tree._check_node(node)
    pos = tree.leaf_position
    leaves = tree.subtree_leaves(node)
    return math.fsum(tree.measure[l] * phi.values[pos[l]] for l in leaves) / tree.measure[node]


def integral_power(tree: Tree, phi: StepFunction, r: float) -> float:
    if not r > 0:
        raise ValueError(f"exponent must be positive, got r={r!r}")
    return float(np.dot(phi.leaf_measure, phi.values**r))


# --------------------------------------------------------------------------
# serialization


def write_tree_jsonl(tree: Tree, fh) -> None:
    for i in range(tree.n_nodes):
        rec = {"id": i, "parent": int(tree.parent[i]) if i else None,
               "measure": float(tree.measure[i]), "depth": int(tree.depth[i])}
        fh.write(json.dumps(rec) + "\n")


def read_tree_jsonl(fh) -> Tree:
    recs = [json.loads(line) for line in fh if line.strip()]
    ids = [r["id"] for r in recs]
    if sorted(ids) != list(range(len(ids))):
        raise ValueError("node ids must be 0..n-1")
    by_id = {r["id"]: r for r in recs}
    parents = [by_id[i]["parent"] for i in range(len(ids))]
    measures = [by_id[i]["measure"] for i in range(len(ids))]
    return Tree.from_parents([-1 if p is None else p for p in parents], measures)


def write_step_csv(phi: StepFunction, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["leaf_id", "value"])
    for leaf, v in zip(phi.tree.leaves, phi.values):
        w.writerow([int(leaf), repr(float(v))])


def read_step_csv(tree: Tree, fh) -> StepFunction:
    rows = list(csv.DictReader(fh))
    pos = tree.leaf_position
    values = np.full(len(tree.leaves), np.nan)
    for row in rows:
        leaf = int(row["leaf_id"])
        if not 0 <= leaf < tree.n_nodes or pos[leaf] < 0:
            raise ValueError(f"{leaf} is not a leaf of this tree")
        values[pos[leaf]] = float(row["value"])
    if np.isnan(values).any():
        raise ValueError("CSV is missing values for some leaves")
    return StepFunction(tree, values)


def save_tree(tree: Tree, path: str | Path) -> None:
    with open(path, "w") as fh:
        write_tree_jsonl(tree, fh)


def load_tree(path: str | Path) -> Tree:
    with open(path) as fh:
        return read_tree_jsonl(fh)


def tree_to_jsonl(tree: Tree) -> str:
    buf = io.StringIO()
    write_tree_jsonl(tree, buf)
    return buf.getvalue()


# --------------------------------------------------------------------------
# quotient trees


@dataclass(frozen=True, eq=False)
class QuotientTree:
    """The selected family of a one-level k-adic construction, one class per rank.

    Every S-node of rank ``m`` has ``k - j`` selected children (measure
    ``mu/k`` each) and an atom made of the remaining ``j`` children, so all
    ``(k-j)**m`` nodes of a rank are congruent and a single entry stands for
    them.  Ranks ``0..max_rank-1`` carry atoms; rank ``max_rank`` is closed off
    and its whole mass is the recorded tail.
    """

    k: int
    j: int
    max_rank: int
    rank: np.ndarray
    node_measure: np.ndarray
    level_measure: np.ndarray
    atom_measure: np.ndarray
    level_atom_mass: np.ndarray
    tail_mass: float

    @property
    def alpha(self) -> float:
        return self.j / self.k

    @property
    def parent(self) -> np.ndarray:
        return self.rank - 1

    def multiplicity(self, m: int) -> int:
        return (self.k - self.j) ** m

    def check(self, rtol: float = 1e-12) -> None:
        a = self.alpha
        inner = self.rank < self.max_rank
        # a_I = mu(I) - sum over selected children
        star_sum = (self.k - self.j) * self.node_measure[inner] / self.k
        if not np.allclose(self.atom_measure[inner], self.node_measure[inner] - star_sum,
                           rtol=rtol, atol=0.0):
            raise AssertionError("atom measures disagree with mu(I) - sum of selected children")
        if not np.all(self.atom_measure[inner] > 0):
            raise AssertionError("atoms must have positive measure")
        total = math.fsum(self.level_atom_mass) + self.tail_mass
        if abs(total - 1.0) > 1e-12:
            raise AssertionError(f"atoms plus tail sum to {total!r}, not 1")
        expected = (1.0 - a) ** self.rank.astype(float)
        if not np.allclose(self.level_measure, expected, rtol=rtol, atol=0.0):
            raise AssertionError("rank masses differ from (1 - alpha)^m")

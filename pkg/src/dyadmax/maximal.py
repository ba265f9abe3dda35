"""The tree maximal operator and its linearization for leaf-constant functions."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .trees import StepFunction, Tree, node_averages

# Two averages closer than TIE_RTOL * (1 + |value|) count as the same maximum
# when deciding which ancestor attains it.
TIE_RTOL = 1e-12


def maximal_function(tree: Tree, phi: StepFunction) -> StepFunction:
    """Leafwise maximum of the node averages over the leaf's ancestor chain."""
    avg = node_averages(tree, phi)
    run = avg.copy()
    for nodes in tree.levels[1:]:
        run[nodes] = np.maximum(run[tree.parent[nodes]], avg[nodes])
    return StepFunction(tree, run[tree.leaves])


@dataclass(frozen=True, eq=False)
class Linearization:
    """Decomposition of the maximal function into atoms of its attaining nodes.

    Arrays are aligned with ``nodes`` (the selected nodes, ascending id, root
    first).  ``star[i]`` is the index of the smallest strictly larger selected
    node, ``-1`` for the root; ``leaf_owner`` gives, per leaf, the index of the
    selected node whose atom contains it.
    """

    tree: Tree
    q: float
    nodes: np.ndarray
    mu: np.ndarray
    a: np.ndarray
    atom_integral: np.ndarray
    x: np.ndarray
    y: np.ndarray
    star: np.ndarray
    rank: np.ndarray
    leaf_owner: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def reconstruct(self) -> np.ndarray:
        """Leafwise sum of ``y_I`` times the atom indicator."""
        return self.y[self.leaf_owner]

    def star_sums(self) -> np.ndarray:
        """Per selected node, the measure of the selected nodes directly below it."""
        out = np.zeros(len(self.nodes))
        below = self.star >= 0
        np.add.at(out, self.star[below], self.mu[below])
        return out

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "rank_in_S", "mu", "a_I", "x_I", "y_I", "star_parent"])
        for i, node in enumerate(self.nodes):
            star = int(self.nodes[self.star[i]]) if self.star[i] >= 0 else ""
            w.writerow([int(node), int(self.rank[i]), repr(float(self.mu[i])), repr(float(self.a[i])),
                        repr(float(self.x[i])), repr(float(self.y[i])), star])


def linearize(tree: Tree, phi: StepFunction, q: float = 2.0) -> Linearization:
    """Selected nodes, atoms and the ``x_I``/``y_I`` data of ``phi``.

    Each leaf is owned by the topmost ancestor attaining its maximal average.
    ``x_I = a_I^(1/q - 1) * int_{A_I} phi``, with ``x_root = 0`` when the root
    atom is empty.
    """
    if not q > 1:
        raise ValueError(f"q must exceed 1, got {q!r}")
    avg = node_averages(tree, phi)
    run = avg.copy()
    owner = np.zeros(tree.n_nodes, dtype=np.int64)
    for nodes in tree.levels[1:]:
        par = tree.parent[nodes]
        best = run[par]
        jump = avg[nodes] > best + TIE_RTOL * (1.0 + np.abs(best))
        owner[nodes] = np.where(jump, nodes, owner[par])
        run[nodes] = np.maximum(best, avg[nodes])

    leaf_owner_node = owner[tree.leaves]
    selected = np.union1d(leaf_owner_node, [0])
    index = np.full(tree.n_nodes, -1, dtype=np.int64)
    index[selected] = np.arange(len(selected))

    lm = phi.leaf_measure
    leaf_owner = index[leaf_owner_node]
    a = np.bincount(leaf_owner, weights=lm, minlength=len(selected))
    integral = np.bincount(leaf_owner, weights=lm * phi.values, minlength=len(selected))
    x = np.zeros(len(selected))
    pos = a > 0
    x[pos] = a[pos] ** (1.0 / q - 1.0) * integral[pos]

    # nearest selected node at or above every node
    nearest = np.zeros(tree.n_nodes, dtype=np.int64)
    for nodes in tree.levels[1:]:
        nearest[nodes] = np.where(index[nodes] >= 0, nodes, nearest[tree.parent[nodes]])
    star = np.full(len(selected), -1, dtype=np.int64)
    rank = np.zeros(len(selected), dtype=np.int64)
    for i, node in enumerate(selected[1:], start=1):
        s = index[nearest[tree.parent[node]]]
        star[i] = s
        rank[i] = rank[s] + 1

    return Linearization(tree=tree, q=q, nodes=selected, mu=tree.measure[selected].copy(),
                         a=a, atom_integral=integral, x=x, y=avg[selected].copy(),
                         star=star, rank=rank, leaf_owner=leaf_owner)


def mixed_integral(tree: Tree, phi: StepFunction, s: float, t: float,
                   mphi: StepFunction | None = None) -> float:
    """``int (M phi)^s phi^t``; ``0^0`` is taken as 1 so ``t = 0`` drops phi entirely."""
    if s < 0 or t < 0:
        raise ValueError(f"exponents must be nonnegative, got s={s!r}, t={t!r}")
    if mphi is None:
        mphi = maximal_function(tree, phi)
    return float(np.dot(phi.leaf_measure, mphi.values**s * phi.values**t))


def weak_type_check(tree: Tree, phi: StepFunction, lam: float,
                    mphi: StepFunction | None = None) -> tuple[float, float]:
    """``(mu{M phi >= lam}, (1/lam) int_{M phi >= lam} phi)`` for ``lam`` above the mean."""
    f = float(np.dot(phi.leaf_measure, phi.values))
    if not lam > f:
        raise ValueError(f"lambda must exceed f = {f!r} (the level set is all of X), got {lam!r}")
    if mphi is None:
        mphi = maximal_function(tree, phi)
    level = mphi.values >= lam
    lm = phi.leaf_measure
    return float(lm[level].sum()), float(np.dot(lm[level], phi.values[level]) / lam)


@dataclass(frozen=True)
class Moments:
    """The integrals entering every inequality, for one function and exponent pair."""

    p: float
    q: float
    f: float
    A: float       # int phi^q
    F: float       # int phi^p
    MTp: float     # int (M phi)^p
    MTq: float     # int (M phi)^q
    mixed: float   # int (M phi)^(p-q) phi^q
    mixed1: float  # int (M phi)^(p-1) phi


def tree_moments(tree: Tree, phi: StepFunction, p: float, q: float,
                 mphi: StepFunction | None = None) -> Moments:
    if mphi is None:
        mphi = maximal_function(tree, phi)
    w, v, m = phi.leaf_measure, phi.values, mphi.values
    dot = lambda g: float(np.dot(w, g))  # noqa: E731
    return Moments(p=p, q=q, f=dot(v), A=dot(v**q), F=dot(v**p), MTp=dot(m**p), MTq=dot(m**q),
                   mixed=dot(m ** (p - q) * v**q), mixed1=dot(m ** (p - 1) * v))

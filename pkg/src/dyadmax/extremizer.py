"""Near-extremal functions built on a one-level k-adic selected family.

Every selected node of rank ``m`` keeps ``k - j`` of its ``k`` children as
selected children and turns the other ``j`` into its atom, so ``alpha = j/k``
exactly and all nodes of a rank are congruent.  The function is constant on
atoms with value ``lambda * gamma^m * alpha^(-1/q)``; its maximal function
equals ``gamma^m f`` there.  Sums over ranks are carried numerically up to
the truncation rank and analytically (geometric remainders) beyond it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .maximal import Moments, tree_moments
from .scalars import (DEFAULT_ROOT, G_coeff, RootConfig, bellman_three_on_surface,
                      F_of_surface, omega, solve_z, upper_bound_three)
from .trees import DEFAULT_NODE_BUDGET, QuotientTree, StepFunction, Tree

TAIL_TARGET = 1e-10


# --------------------------------------------------------------------------
# selected family


def build_s_alpha(k: int, j: int, max_rank: int,
                  budget: int = DEFAULT_NODE_BUDGET) -> QuotientTree:
    if not 1 <= j < k:
        raise ValueError(f"need 1 <= j < k, got j={j}, k={k}")
    if max_rank < 0:
        raise ValueError(f"max_rank must be >= 0, got {max_rank}")
    if max_rank + 1 > budget:
        raise ResourceError(f"{max_rank + 1} rank classes exceed the node budget {budget}")
    alpha = j / k
    rank = np.arange(max_rank + 1)
    # per-node measures underflow to 0.0 past ~1074/log2(k) ranks; the level
    # totals below do not
    node_measure = np.exp(-rank * math.log(k))
    level_measure = (1.0 - alpha) ** rank.astype(float)
    atom_measure = np.where(rank < max_rank, alpha * node_measure, 0.0)
    level_atom_mass = alpha * level_measure[:-1]
    for a in (rank, node_measure, level_measure, atom_measure, level_atom_mass):
        a.setflags(write=False)
    return QuotientTree(k=k, j=j, max_rank=max_rank, rank=rank, node_measure=node_measure,
                        level_measure=level_measure, atom_measure=atom_measure,
                        level_atom_mass=level_atom_mass, tail_mass=float(level_measure[-1]))


# --------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ExtremizerParams:
    p: float
    q: float
    f: float
    beta: float
    k: int
    j: int = 1

    def __post_init__(self):
        if not 1 < self.q < self.p:
            raise DomainError(f"requires 1 < q < p, got q={self.q}, p={self.p}")
        if not self.f > 0:
            raise DomainError(f"requires f > 0, got f={self.f}")
        if not self.beta >= 0:
            raise DomainError(f"requires beta >= 0, got beta={self.beta}")
        if not 1 <= self.j < self.k:
            raise DomainError(f"requires 1 <= j < k, got j={self.j}, k={self.k}")
        for e, name in ((self.q, "q"), (self.p, "p")):
            if not self.decay(e) < 1.0:
                raise DomainError(
                    f"requires gamma^{name} (1 - alpha) < 1, i.e. "
                    f"z^{name} (1-alpha)^({name}-1) > (z-alpha)^{name}; "
                    f"got gamma={self.gamma!r}, alpha={self.alpha!r}")

    @classmethod
    def from_z(cls, p: float, q: float, f: float, z: float, k: int, j: int = 1) -> "ExtremizerParams":
        alpha = j / k
        return cls(p=p, q=q, f=f, beta=(z - 1.0) / (1.0 - alpha), k=k, j=j)

    @property
    def alpha(self) -> float:
        return self.j / self.k

    @property
    def z(self) -> float:
        return self.beta + 1.0 - self.beta * self.alpha

    @property
    def log_gamma(self) -> float:
        return math.log1p(self.beta * self.alpha / self.z)

    @property
    def gamma(self) -> float:
        return (self.beta + 1.0) / self.z

    @property
    def q_dual(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def lam(self) -> float:
        a = self.alpha
        return self.f * a ** (-1.0 / self.q_dual) * (1.0 - self.gamma * (1.0 - a))

    def decay(self, e: float) -> float:
        """``gamma^e (1 - alpha)``, the ratio of the rank series of weight e."""
        return math.exp(e * self.log_gamma + math.log1p(-self.alpha))

    def one_minus_decay(self, e: float) -> float:
        return -math.expm1(e * self.log_gamma + math.log1p(-self.alpha))

    def auto_rank(self, target: float = TAIL_TARGET) -> int:
        """Smallest rank with ``decay(max(p, q))^M < target``."""
        log_r = self.p * self.log_gamma + math.log1p(-self.alpha)
        return max(1, math.ceil(math.log(target) / log_r))


def F_alpha_closed(p: float, f: float, alpha: float, z: float) -> float:
    """``int phi_alpha^p`` in closed form."""
    c = (1.0 - alpha) ** (p - 1.0)
    return f**p * alpha * c / (z**p * c - (z - alpha) ** p)


# --------------------------------------------------------------------------
# realization

@dataclass(frozen=True, eq=False)
class ExtremizerRealization:
    params: ExtremizerParams
    tree: QuotientTree
    x: np.ndarray      # per node, ranks 0..M-1
    y: np.ndarray
    v: np.ndarray      # atom values

    @property
    def max_rank(self) -> int:
        return self.tree.max_rank

    def _series(self, name: str) -> tuple[float, float, np.ndarray]:
        """A functional as the rank series ``sum_m c r^m`` with ``r = gamma^e (1-alpha)``.

        Returns ``(c, e, terms)``, ``terms`` being the numeric per-rank values.
        """
        P = self.params
        p, q, f, a, lam = P.p, P.q, P.f, P.alpha, P.lam
        mass = self.tree.level_atom_mass
        my = self.maximal_values
        if name == "measure":
            return a, 0.0, mass.copy()
        if name == "f":
            return lam * a ** (1.0 / P.q_dual), 1.0, mass * self.v
        if name == "A":
            return lam**q, q, mass * self.v**q
        if name == "F":
            return lam**p * a ** (1.0 - p / q), p, mass * self.v**p
        if name == "MTp":
            return a * f**p, p, mass * my**p
        if name == "MTq":
            return a * f**q, q, mass * my**q
        if name == "mixed":
            return lam**q * f ** (p - q), p, mass * my ** (p - q) * self.v**q
        if name == "mixed1":
            return lam * a ** (1.0 / P.q_dual) * f ** (p - 1.0), p, mass * my ** (p - 1.0) * self.v
        raise KeyError(name)

    def _ratio(self, e: float) -> tuple[float, float]:
        P = self.params
        if e == 0.0:
            return 1.0 - P.alpha, P.alpha
        return P.decay(e), P.one_minus_decay(e)

    def partial(self, name: str) -> float:
        """Numeric sum over the atoms of ranks ``0..M-1``."""
        return float(np.sum(self._series(name)[2]))

    def analytic_partial(self, name: str) -> float:
        c, e, _ = self._series(name)
        r, one_minus_r = self._ratio(e)
        return c * -math.expm1(self.max_rank * math.log(r)) / one_minus_r

    def tail(self, name: str) -> float:
        """Geometric remainder from rank ``M`` on."""
        c, e, _ = self._series(name)
        r, one_minus_r = self._ratio(e)
        return c * r**self.max_rank / one_minus_r

    def closed(self, name: str) -> float:
        """The untruncated value ``c / (1 - r)``."""
        c, e, _ = self._series(name)
        return c / self._ratio(e)[1]

    def total(self, name: str) -> float:
        return self.partial(name) + self.tail(name)

    def tail_masses(self) -> dict[str, float]:
        return {name: self.tail(name) for name in ("measure", "A", "F", "MTp")}

    @cached_property
    def maximal_values(self) -> np.ndarray:
        return maximal_on_quotient(self)

    def moments(self) -> Moments:
        P = self.params
        t = {name: self.total(name) for name in ("f", "A", "F", "MTp", "MTq", "mixed", "mixed1")}
        return Moments(p=P.p, q=P.q, **t)


def build_phi_alpha(S: QuotientTree, params: ExtremizerParams) -> ExtremizerRealization:
    if (S.k, S.j) != (params.k, params.j):
        raise ValueError(f"quotient tree is for alpha={S.j}/{S.k}, params for {params.j}/{params.k}")
    M = S.max_rank
    m = np.arange(M, dtype=float)
    g = np.exp(m * params.log_gamma)
    x = params.lam * g * S.node_measure[:M] ** (1.0 / params.q)
    y = g * params.f
    v = params.lam * g * params.alpha ** (-1.0 / params.q)
    for arr in (x, y, v):
        arr.setflags(write=False)
    return ExtremizerRealization(params=params, tree=S, x=x, y=y, v=v)


def realize(params: ExtremizerParams, max_rank: int | None = None) -> ExtremizerRealization:
    M = params.auto_rank() if max_rank is None else max_rank
    return build_phi_alpha(build_s_alpha(params.k, params.j, M), params)


def maximal_on_quotient(R: ExtremizerRealization) -> np.ndarray:
    """Maximal function of ``phi_alpha`` on each atom class (ranks ``0..M-1``).

    On an atom of rank m the containing tree nodes are the selected chain
    ranks ``0..m`` and then the atom's own subtree, where the function is
    constant.  Node averages include the analytic tail beyond rank M.
    """
    P, S = R.params, R.tree
    a, M = P.alpha, S.max_rank
    # int over a rank-r node, scaled by the node count: sum_{s>=r} alpha (1-alpha)^s v_s
    terms = S.level_atom_mass * R.v
    c_f = P.lam * a ** (1.0 / P.q_dual)
    r_f = P.decay(1.0)
    tail = c_f * r_f**M / P.one_minus_decay(1.0)
    suffix = np.cumsum(terms[::-1])[::-1] + tail
    chain_avg = suffix / S.level_measure[:M]
    out = np.maximum(np.maximum.accumulate(chain_avg), R.v)
    out.setflags(write=False)
    return out


def expand_realization(R: ExtremizerRealization,
                       budget: int = 1 << 16) -> tuple[Tree, StepFunction, np.ndarray]:
    """Explicit tree for a small realization.

    Atoms become leaves carrying their value; closed-off rank-M nodes become
    leaves carrying their exact average ``gamma^M f``.  Returns the tree, the
    step function, and per leaf its rank (``-1`` marks tail leaves).
    """
    S, P = R.tree, R.params
    k, j, M = S.k, S.j, S.max_rank
    n_nodes = 1 + sum(k * (k - j) ** m for m in range(M))
    if n_nodes > budget:
        raise ResourceError(f"explicit expansion needs {n_nodes} nodes; budget {budget}")
    parent, measure, kind = [-1], [1.0], [0]  # rank of a selected node, None for an atom
    atom_rank = {}
    i = 0
    while i < len(parent):
        r = kind[i]
        if r is not None and r < M:
            mu = measure[i] / k
            for c in range(k):
                parent.append(i)
                measure.append(mu)
                if c < k - j:
                    kind.append(r + 1)
                else:
                    atom_rank[len(kind)] = r
                    kind.append(None)
        i += 1
    tail_value = math.exp(M * P.log_gamma) * P.f
    tree = Tree(parent, measure)
    values, ranks = [], []
    for leaf in tree.leaves:
        if leaf in atom_rank:
            values.append(R.v[atom_rank[leaf]])
            ranks.append(atom_rank[leaf])
        else:
            values.append(tail_value)
            ranks.append(-1)
    return tree, StepFunction(tree, values), np.array(ranks)


# --------------------------------------------------------------------------
# matching a prescribed q-integral


def eq_A_of_z(q: float, alpha: float, f: float, z: float) -> float:
    """``int phi_alpha^q`` as a function of ``z``."""
    c = (1.0 - alpha) ** (q - 1.0)
    return f**q * alpha * c / (-((z - alpha) ** q) + c * z**q)


def solve_z_for_A(q: float, alpha: float, f: float, A: float,
                  cfg: RootConfig = DEFAULT_ROOT) -> float:
    if not f > 0:
        raise DomainError(f"requires f > 0, got f={f}")
    if not f**q < A:
        raise DomainError(f"requires f^q < A, got f^q={f**q!r}, A={A!r}")
    return solve_z(q, alpha, f**q / A, cfg)


SHARPNESS_COLUMNS = ("k", "alpha", "z", "beta", "gamma", "F_alpha", "MTp_integral",
                     "target_omega_q_pow_p_times_F", "abs_err_z", "abs_err_F", "rank_M",
                     "tail_mass")


def sharpness_row(p: float, q: float, f: float, A: float, k: int,
                  cfg: RootConfig = DEFAULT_ROOT, max_rank: int | None = None) -> dict:
    alpha = 1.0 / k
    z = solve_z_for_A(q, alpha, f, A, cfg)
    params = ExtremizerParams.from_z(p, q, f, z, k)
    R = realize(params, max_rank)
    w = omega(q, f**q / A, cfg)
    F_target = F_of_surface(p, q, f, A, cfg)
    F_a = F_alpha_closed(p, f, alpha, z)
    return {
        "k": k, "alpha": alpha, "z": z, "beta": params.beta, "gamma": params.gamma,
        "F_alpha": F_a, "MTp_integral": R.total("MTp"),
        "target_omega_q_pow_p_times_F": w**p * F_target,
        "abs_err_z": abs(z**p - w**p), "abs_err_F": abs(F_a - F_target),
        "rank_M": R.max_rank, "tail_mass": R.tree.tail_mass,
    }


def sharpness_report(p: float, q: float, f: float, A: float, ks: Sequence[int],
                     cfg: RootConfig = DEFAULT_ROOT, max_rank: int | None = None) -> list[dict]:
    """One row per ``alpha = 1/k``: the extremizer's value against the surface target."""
    bellman_three_on_surface(p, q, f, A, cfg)  # validates the surface point up front
    return [sharpness_row(p, q, f, A, k, cfg, max_rank) for k in ks]


# --------------------------------------------------------------------------
# residuals: right-hand side minus left-hand side of each inequality


def theorem1_rhs(m: Moments, beta: float) -> float:
    p, q, f = m.p, m.q, m.f
    G = G_coeff(p, q, beta)
    b1q = (beta + 1.0) ** q
    return (p * b1q * m.mixed + (p - q) * (beta + 1.0) * f**p
            + p * (q - 1.0) * beta * f ** (p - q) * m.MTq
            - p * b1q * f ** (p - q) * m.A) / G


def cor2_rhs(m: Moments, beta: float) -> float:
    p, q = m.p, m.q
    G = G_coeff(p, q, beta)
    return (-q * (beta + 1.0) * m.f**p + p * (beta + 1.0) ** q * m.mixed) / G


def thmA_rhs(m: Moments) -> float:
    p = m.p
    return (-m.f**p + p * m.mixed1) / (p - 1.0)


def lemma31_rhs(m: Moments) -> float:
    p, q, f = m.p, m.q, m.f
    return f**p - p / (p - q) * f ** (p - q) * m.A + p / (p - q) * m.mixed


def lemma32_rhs(m: Moments, cfg: RootConfig = DEFAULT_ROOT) -> float:
    return upper_bound_three(m.p, m.q, m.f, m.A, m.F, cfg)


def eq69_rhs(m: Moments, beta: float) -> float:
    q = m.q
    return (beta + 1.0) / beta * ((beta + 1.0) ** (q - 1.0) * m.A - m.f**q) / (q - 1.0)


def residual_theorem1(tree: Tree, phi: StepFunction, p: float, q: float, beta: float) -> float:
    m = tree_moments(tree, phi, p, q)
    return theorem1_rhs(m, beta) - m.MTp


def residual_cor2(tree: Tree, phi: StepFunction, p: float, q: float, beta: float) -> float:
    m = tree_moments(tree, phi, p, q)
    return cor2_rhs(m, beta) - m.MTp


def residual_thmA(tree: Tree, phi: StepFunction, p: float) -> float:
    # q only enters Moments fields that thmA does not use
    m = tree_moments(tree, phi, p, 0.5 * (1.0 + p))
    return thmA_rhs(m) - m.MTp


def residual_ok(residual: float, rhs: float, rtol: float = 1e-11) -> bool:
    return residual >= -rtol * (1.0 + abs(rhs))

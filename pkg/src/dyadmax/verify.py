"""Seeded randomized checks of every inequality on generated step functions.

A sample is fully determined by ``(plan.seed, index)``, so the argmin case of
each check can be replayed exactly.  Check failures are data in the report,
never exceptions.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .extremizer import (ExtremizerParams, cor2_rhs, eq69_rhs, lemma31_rhs, lemma32_rhs,
                         realize, residual_ok, solve_z_for_A, theorem1_rhs, thmA_rhs)
from .maximal import maximal_function, tree_moments, weak_type_check
from .scalars import DEFAULT_ROOT, RootConfig, bellman_three_on_surface, bellman_two
from .trees import StepFunction, Tree, build_kadic, build_random_tree

# name -> the inequality, as printed in reports; f = int phi, A = int phi^q, F = int phi^p
CHECKS = {
    "thmA": "int (M phi)^p <= (p int phi (M phi)^(p-1) - f^p)/(p-1)",
    "thm1": "int (M phi)^p <= beta-family bound in f, A, int (M phi)^q, int (M phi)^(p-q) phi^q",
    "cor2": "int (M phi)^p <= (p (beta+1)^q int (M phi)^(p-q) phi^q - q (beta+1) f^p)/G",
    "weak": "mu{M phi >= lam} <= (1/lam) int_{M phi >= lam} phi",
    "lemma31": "int (M phi)^p <= f^p + p/(p-q) (int (M phi)^(p-q) phi^q - f^(p-q) A)",
    "lemma32": "int (M phi)^p <= F h^-1(k(f,A,F))^p",
    "eq69": "int (M phi)^q <= (beta+1)/beta ((beta+1)^(q-1) A - f^q)/(q-1)",
    "bellman2": "int (M phi)^p <= F omega_p(f^p/F)^p",
}
VALUE_LAWS = ("uniform", "lognormal", "spikes", "constant")
TREE_FAMILIES = ("binary", "triadic", "random", "mixed")
RESIDUAL_RTOL = 1e-11
N_LEVELS = 6


@dataclass(frozen=True)
class VerificationPlan:
    seed: int = 0
    samples: int = 500
    tree: str = "binary"
    min_depth: int = 10
    max_depth: int = 10
    value_laws: tuple[str, ...] = ("uniform", "lognormal", "spikes")
    pq_grid: tuple[tuple[float, float], ...] = ((2.0, 1.5), (3.0, 2.0), (1.5, 1.2))
    betas: tuple[float, ...] = (0.1, 0.5, 1.0, 2.0, 5.0)
    checks: tuple[str, ...] = tuple(CHECKS)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"sample count must be >= 1, got {self.samples}")
        if self.tree not in TREE_FAMILIES:
            raise ValueError(f"tree family must be one of {TREE_FAMILIES}, got {self.tree!r}")
        if not 1 <= self.min_depth <= self.max_depth:
            raise ValueError(f"need 1 <= min_depth <= max_depth, got {self.min_depth}, {self.max_depth}")
        if not self.value_laws or any(v not in VALUE_LAWS for v in self.value_laws):
            raise ValueError(f"value laws must be drawn from {VALUE_LAWS}, got {self.value_laws}")
        for p, q in self.pq_grid:
            if not 1 < q < p:
                raise ValueError(f"grid pairs need 1 < q < p, got (p={p}, q={q})")
        if any(not b >= 0 for b in self.betas):
            raise ValueError(f"betas must be >= 0, got {self.betas}")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise ValueError(f"unknown checks {sorted(unknown)}; known: {sorted(CHECKS)}")


@dataclass
class CheckStats:
    inequality: str
    runs: int = 0
    failures: int = 0
    worst_scaled: float = math.inf
    worst_residual: float = math.inf
    argmin: dict | None = None

    def add(self, residual: float, rhs: float, case: dict) -> None:
        self.runs += 1
        scaled = residual / (1.0 + abs(rhs))
        if not residual_ok(residual, rhs, RESIDUAL_RTOL):
            self.failures += 1
        if scaled < self.worst_scaled:
            self.worst_scaled, self.worst_residual, self.argmin = scaled, residual, case


@dataclass
class VerificationReport:
    plan: VerificationPlan
    checks: dict[str, CheckStats] = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(c.failures for c in self.checks.values())

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {"plan": asdict(self.plan),
                "checks": {k: asdict(v) for k, v in sorted(self.checks.items())},
                "failures": self.failures}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "inequality", "runs", "failures", "worst_scaled_residual", "worst_residual"])
        for name, c in sorted(self.checks.items()):
            w.writerow([name, c.inequality, c.runs, c.failures, repr(c.worst_scaled), repr(c.worst_residual)])
        return buf.getvalue()


# --------------------------------------------------------------------------
# sample generation


@lru_cache(maxsize=32)
def _kadic(k: int, depth: int) -> Tree:
    return build_kadic(k, depth)


def _family(plan: VerificationPlan, index: int) -> str:
    if plan.tree != "mixed":
        return plan.tree
    return ("binary", "triadic", "random")[(index // len(plan.value_laws)) % 3]


def draw_values(rng: np.random.Generator, law: str, n: int) -> np.ndarray:
    if law == "uniform":
        return rng.uniform(0.0, 1.0, n)
    if law == "lognormal":
        return rng.lognormal(0.0, 1.5, n)
    if law == "spikes":
        v = rng.uniform(0.0, 1e-3, n)
        hits = rng.choice(n, size=min(n, int(rng.integers(1, 4))), replace=False)
        v[hits] = rng.uniform(1.0, 1e3, len(hits))
        return v
    if law == "constant":
        return np.full(n, rng.uniform(0.1, 10.0))
    raise ValueError(f"unknown value law {law!r}")


def make_sample(plan: VerificationPlan, index: int) -> tuple[Tree, StepFunction, dict]:
    """The ``index``-th (tree, function) of a plan and its generator coordinates."""
    rng = np.random.default_rng([plan.seed, index])
    law = plan.value_laws[index % len(plan.value_laws)]
    family = _family(plan, index)
    depth = int(rng.integers(plan.min_depth, plan.max_depth + 1))
    if family == "binary":
        tree = _kadic(2, depth)
    elif family == "triadic":
        tree = _kadic(3, min(depth, 7))
    else:
        tree = build_random_tree(int(rng.integers(2**31)), max_depth=depth, max_children=4,
                                 split_law=("dirichlet", "skewed", "equal")[index % 3])
    values = draw_values(rng, law, len(tree.leaves))
    return tree, StepFunction(tree, values), {"seed": plan.seed, "sample": index,
                                              "law": law, "tree": family, "depth": depth}


def weak_levels(mvals: np.ndarray, f: float) -> np.ndarray:
    above = np.unique(mvals[mvals > f * (1 + 1e-12)])
    if len(above) == 0:
        return above
    pick = np.linspace(0, len(above) - 1, min(N_LEVELS, len(above))).round().astype(int)
    return above[np.unique(pick)]


# --------------------------------------------------------------------------
# evaluation


def _sample_residuals(plan: VerificationPlan, tree: Tree, phi: StepFunction,
                      cfg: RootConfig):
    """Yield ``(check, residual, rhs, extra)`` for one sample."""
    mphi = maximal_function(tree, phi)
    wanted = set(plan.checks)
    for p, q in plan.pq_grid:
        m = tree_moments(tree, phi, p, q, mphi)
        pq = {"p": p, "q": q}
        if "thmA" in wanted:
            rhs = thmA_rhs(m)
            yield "thmA", rhs - m.MTp, rhs, pq
        if "lemma31" in wanted:
            rhs = lemma31_rhs(m)
            yield "lemma31", rhs - m.MTp, rhs, pq
        if "lemma32" in wanted:
            try:
                rhs = lemma32_rhs(m, cfg)
            except DomainError:
                rhs = -math.inf
            yield "lemma32", rhs - m.MTp, rhs, pq
        if "bellman2" in wanted:
            rhs = bellman_two(p, m.f, max(m.F, m.f**p), cfg)
            yield "bellman2", rhs - m.MTp, rhs, pq
        for beta in plan.betas:
            extra = {**pq, "beta": beta}
            if "thm1" in wanted:
                rhs = theorem1_rhs(m, beta)
                yield "thm1", rhs - m.MTp, rhs, extra
            if "cor2" in wanted:
                rhs = cor2_rhs(m, beta)
                yield "cor2", rhs - m.MTp, rhs, extra
            if "eq69" in wanted and beta > 0:
                rhs = eq69_rhs(m, beta)
                yield "eq69", rhs - m.MTq, rhs, extra
    if "weak" in wanted:
        f = float(np.dot(phi.leaf_measure, phi.values))
        for i, lam in enumerate(weak_levels(mphi.values, f)):
            measure, bound = weak_type_check(tree, phi, float(lam), mphi)
            yield "weak", bound - measure, bound, {"level": i, "lambda": float(lam)}


def run_plan(plan: VerificationPlan, cfg: RootConfig = DEFAULT_ROOT) -> VerificationReport:
    report = VerificationReport(plan, {name: CheckStats(CHECKS[name]) for name in plan.checks})
    for index in range(plan.samples):
        tree, phi, coords = make_sample(plan, index)
        for name, residual, rhs, extra in _sample_residuals(plan, tree, phi, cfg):
            report.checks[name].add(residual, rhs, {**coords, **extra})
    return report


def replay(plan: VerificationPlan, case: dict, check: str,
           cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Recompute the residual of one recorded case."""
    tree, phi, _ = make_sample(plan, case["sample"])
    for name, residual, _, extra in _sample_residuals(plan, tree, phi, cfg):
        if name == check and all(case.get(k) == v for k, v in extra.items()):
            return residual
    raise KeyError(f"case {case} not produced by check {check!r}")


# --------------------------------------------------------------------------
# extremizer probe


def near_extremal_probe(p: float, q: float, f: float, A: float, k: int,
                        cfg: RootConfig = DEFAULT_ROOT) -> dict:
    """Measure the extremizer at ``alpha = 1/k`` against the surface Bellman value."""
    target = bellman_three_on_surface(p, q, f, A, cfg)
    z = solve_z_for_A(q, 1.0 / k, f, A, cfg)
    R = realize(ExtremizerParams.from_z(p, q, f, z, k))
    m = R.moments()
    ceiling = bellman_two(p, m.f, max(m.F, m.f**p), cfg)
    return {"k": k, "alpha": 1.0 / k, "z": z, "f": m.f, "A": m.A, "F": m.F,
            "MTp_integral": m.MTp, "target": target, "ratio": m.MTp / target,
            "bellman_two_ceiling": ceiling, "ceiling_ratio": m.MTp / ceiling}

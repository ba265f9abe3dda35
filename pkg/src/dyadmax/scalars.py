"""Closed-form scalar functions of the dyadic Bellman problem and their inverses.

Every inversion is a bracketed bisection on a branch where the function is
strictly monotone, so convergence is unconditional.  Domain violations raise
:class:`~dyadmax.errors.DomainError`; nothing is clamped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .errors import DomainError, NumericError

# Relative slack for quantities that equal a domain endpoint in exact
# arithmetic but land one rounding step outside it (e.g. k(f, A, F) = q at
# constant functions).
ENDPOINT_SLACK = 1e-12


@dataclass(frozen=True)
class RootConfig:
    """Settings for the bisection solvers.

    ``tol`` is the largest bracket width accepted on exit.  Bisection always
    runs until the bracket collapses to adjacent floats (or ``max_iter`` is
    spent), so results are usually far tighter than ``tol``.
    """

    tol: float = 1e-12
    max_iter: int = 200
    bracket: str = "doubling"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.bracket not in ("doubling", "linear"):
            raise ValueError(f"unknown bracketing strategy {self.bracket!r}")


DEFAULT_ROOT = RootConfig()


@dataclass(frozen=True)
class BellmanPoint:
    p: float
    q: float
    f: float
    A: float | None = None
    F: float | None = None

    def check(self, strict: bool = True) -> "BellmanPoint":
        """Validate the domain; ``strict=False`` admits the closure (constant functions)."""
        p, q, f, A, F = self.p, self.q, self.f, self.A, self.F
        if not p > 1:
            raise DomainError(f"requires p > 1, got p={p}")
        if not 1 < q < p:
            raise DomainError(f"requires 1 < q < p, got q={q}, p={p}")
        if not f > 0:
            raise DomainError(f"requires f > 0, got f={f}")
        lt = (lambda a, b: a < b) if strict else (lambda a, b: a <= b * (1 + ENDPOINT_SLACK))
        if A is not None and not lt(f**q, A):
            raise DomainError(f"requires f^q < A, got f^q={f**q!r}, A={A!r}")
        if A is not None and F is not None and not lt(A, F ** (q / p)):
            raise DomainError(f"requires A < F^(q/p), got A={A!r}, F^(q/p)={F ** (q / p)!r}")
        if A is None and F is not None and not f**p <= F:
            raise DomainError(f"requires f^p <= F, got f^p={f**p!r}, F={F!r}")
        return self


# --------------------------------------------------------------------------
# root finding


def bisect(g: Callable[[float], float], lo: float, hi: float,
           cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Root of ``g`` on ``[lo, hi]`` given ``g(lo) >= 0 >= g(hi)``.

    Either sign pattern works; the orientation is read off the endpoints.
    """
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise NumericError(f"no sign change on [{lo!r}, {hi!r}]: g={glo!r}, {ghi!r}")
    lo_positive = glo > 0
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == lo_positive:
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    if hi - lo > cfg.tol * max(1.0, abs(lo)):
        raise NumericError(
            f"bisection did not converge in {cfg.max_iter} iterations: "
            f"bracket [{lo!r}, {hi!r}], residuals {glo!r}, {ghi!r}")
    return lo if abs(glo) <= abs(ghi) else hi


def expand_upper(g: Callable[[float], float], lo: float, hi: float,
                 cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Grow ``hi`` until ``g(hi)`` has the opposite sign to ``g(lo)``."""
    positive = g(lo) > 0
    step = hi - lo
    for _ in range(cfg.max_iter):
        v = g(hi)
        if v == 0 or (v > 0) != positive:
            return hi
        if cfg.bracket == "doubling":
            hi = lo + 2.0 * (hi - lo)
        else:
            hi += step
    raise NumericError(f"could not bracket a root above {lo!r}; last upper bound {hi!r}")


# --------------------------------------------------------------------------
# H_p and its inverse


def H(p: float, z: float) -> float:
    # factored so the upper root p/(p-1) is hit to within one rounding
    return z ** (p - 1.0) * (p - (p - 1.0) * z)


def omega(p: float, tau: float, cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Inverse of ``H(p, .)`` on ``[1, p/(p-1)]``, where it falls from 1 to 0."""
    if not p > 1:
        raise DomainError(f"requires p > 1, got p={p}")
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"requires 0 <= tau <= 1, got tau={tau!r}")
    if tau == 1.0:
        return 1.0
    top = p / (p - 1.0)
    if tau == 0.0 or H(p, top) >= tau:
        # tau below the rounding floor of H at the upper endpoint
        return top
    return bisect(lambda z: H(p, z) - tau, 1.0, top, cfg)


def bellman_two(p: float, f: float, F: float, cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Largest possible integral of the p-th power of the maximal function
    given ``int phi = f`` and ``int phi^p = F``."""
    if not p > 1:
        raise DomainError(f"requires p > 1, got p={p}")
    if not f > 0:
        raise DomainError(f"requires f > 0, got f={f}")
    if not f**p <= F:
        raise DomainError(f"requires f^p <= F, got f^p={f**p!r}, F={F!r}")
    return F * omega(p, f**p / F, cfg) ** p


# --------------------------------------------------------------------------
# z(alpha, tau)


def _z_profile(q: float, alpha: float, z: float) -> float:
    # ((1-a)^(q-1) z^q - (z-a)^q) / (a (1-a)^(q-1)), written to avoid the
    # O(alpha) cancellation; tends to H(q, z) as alpha -> 0 and equals 1 at z = 1.
    d = q * math.log1p(-alpha / z) - (q - 1.0) * math.log1p(-alpha)
    return -(z**q) * math.expm1(d) / alpha


def z_equation_residual(q: float, alpha: float, tau: float, z: float) -> float:
    """Residual of ``-(z-a)^q + (1-a)^(q-1) z^q = tau a (1-a)^(q-1)`` in its raw form."""
    c = (1.0 - alpha) ** (q - 1.0)
    return -((z - alpha) ** q) + c * z**q - tau * alpha * c


def solve_z(q: float, alpha: float, tau: float, cfg: RootConfig = DEFAULT_ROOT) -> float:
    """The unique ``z >= 1`` solving the alpha-discretised H-equation."""
    if not q > 1:
        raise DomainError(f"requires q > 1, got q={q}")
    if not 0 < alpha < 1:
        raise DomainError(f"requires 0 < alpha < 1, got alpha={alpha!r}")
    if not 0 < tau <= 1:
        raise DomainError(f"requires 0 < tau <= 1, got tau={tau!r}")
    if tau == 1.0:
        return 1.0
    g = lambda z: _z_profile(q, alpha, z) - tau  # noqa: E731
    hi = expand_upper(g, 1.0, 2.0, cfg)
    return bisect(g, 1.0, hi, cfg)


# --------------------------------------------------------------------------
# coefficients


def G_coeff(p: float, q: float, beta: float) -> float:
    return p * (q - 1.0) * beta + (p - q) * (beta + 1.0)


class Lemma51Coeffs(NamedTuple):
    A: float
    B: float
    C: float
    D: float


def lemma51_coeffs(p: float, q: float, alpha: float, beta: float) -> Lemma51Coeffs:
    """The four coefficients of the finite-alpha extremizer lower bound.

    B and C vanish to first order in alpha in their textbook form; here they
    are expanded around ``e = beta*alpha/(beta+1)`` with expm1/log1p so the
    alpha -> 0 ratios keep full relative precision.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"requires 0 < alpha < 1, got alpha={alpha!r}")
    if not beta > 0:
        raise DomainError(f"requires beta > 0, got beta={beta!r}")
    if not 1 < q < p:
        raise DomainError(f"requires 1 < q < p, got q={q}, p={p}")
    b1 = beta + 1.0
    e = beta * alpha / b1
    w = b1 * (1.0 - e)  # beta + 1 - beta*alpha
    A = p * alpha * w**q * b1 ** (p - 1.0)
    B = b1**p * ((p - q) * alpha - p * e - q * math.expm1(p * math.log1p(-e)))
    C = -math.expm1((q - 1.0) * math.log1p(-e)) / (alpha * (1.0 - e) ** (q - 1.0) * b1 ** (q - 1.0))
    D = (p * b1 ** (p - q) - q * w ** (p - q)) / (p * b1 ** (p - 1.0))
    return Lemma51Coeffs(A, B, C, D)


# --------------------------------------------------------------------------
# the three-variable problem


def h_lemma32(p: float, q: float, t: float) -> float:
    return p * t ** (p - q) - (p - q) * t**p


def h_inverse(p: float, q: float, v: float, cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Inverse of ``h_lemma32`` on its decreasing branch ``[1, inf)``."""
    if not 1 < q < p:
        raise DomainError(f"requires 1 < q < p, got q={q}, p={p}")
    if not math.isfinite(v):
        raise DomainError(f"requires a finite value, got v={v!r}")
    if v > q:
        raise DomainError(f"requires v <= q = h(1), got v={v!r}")
    if v == q:
        return 1.0
    g = lambda t: h_lemma32(p, q, t) - v  # noqa: E731
    hi = expand_upper(g, 1.0, 2.0, cfg)
    return bisect(g, 1.0, hi, cfg)


def k_value(p: float, q: float, f: float, A: float, F: float) -> float:
    return (p * f ** (p - q) * A - (p - q) * f**p) / F


def upper_bound_three(p: float, q: float, f: float, A: float, F: float,
                      cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Upper bound for the maximal p-integral given the 1-, q- and p-integrals.

    Valid off the surface where the exact value is known; this is a bound,
    not the Bellman value.
    """
    if not 1 < q < p:
        raise DomainError(f"requires 1 < q < p, got q={q}, p={p}")
    if not (f > 0 and A > 0 and F > 0):
        raise DomainError(f"requires f, A, F > 0, got f={f!r}, A={A!r}, F={F!r}")
    k = k_value(p, q, f, A, F)
    if not 0 < k <= q * (1 + ENDPOINT_SLACK):
        raise DomainError(f"requires 0 < k(f,A,F) <= q, got k={k!r} (inconsistent f, A, F)")
    return F * h_inverse(p, q, min(k, q), cfg) ** p


def F_of_surface(p: float, q: float, f: float, A: float,
                 cfg: RootConfig = DEFAULT_ROOT) -> float:
    """The p-integral ``F(f, A)`` singled out by ``omega_p(f^p/F) = omega_q(f^q/A)``."""
    BellmanPoint(p, q, f, A).check()
    w = omega(q, f**q / A, cfg)
    hp = H(p, w)
    if not hp > 0:
        raise DomainError(
            f"requires omega_q(f^q/A) < p/(p-1) for the surface to exist, "
            f"got omega_q={w!r} >= {p / (p - 1.0)!r}")
    return f**p / hp


def bellman_three_on_surface(p: float, q: float, f: float, A: float,
                             cfg: RootConfig = DEFAULT_ROOT) -> float:
    F = F_of_surface(p, q, f, A, cfg)
    return omega(q, f**q / A, cfg) ** p * F


# --------------------------------------------------------------------------
# recovering the two-variable value through an arbitrary q


def _log_G(p: float, beta: float) -> float:
    # log of 1 / ((beta+1)^(p-1) (1 - beta (p-1)))
    u = -(p - 1.0) * beta
    if u <= -1.0:
        return math.inf
    return -(p - 1.0) * math.log1p(beta) - math.log1p(u)


def beta_from_fF(p: float, q: float, f: float, F: float,
                 cfg: RootConfig = DEFAULT_ROOT) -> float:
    """The ``beta`` in ``[0, 1/(p-1))`` with ``G(beta) = F / f^p``."""
    if not 1 < q < p:
        raise DomainError(f"requires 1 < q < p, got q={q}, p={p}")
    if not f > 0:
        raise DomainError(f"requires f > 0, got f={f}")
    if not f**p <= F:
        raise DomainError(f"requires f^p <= F, got f^p={f**p!r}, F={F!r}")
    target = math.log(F) - p * math.log(f)
    if target <= 0.0:
        return 0.0
    return bisect(lambda b: _log_G(p, b) - target, 0.0, 1.0 / (p - 1.0), cfg)


def A_beta(p: float, q: float, beta: float) -> float:
    b1 = beta + 1.0
    return (q - 1.0) * beta / b1**q + (p - q) / (p * b1 ** (q - 1.0))


def h_beta(p: float, q: float, beta: float, y: float) -> float:
    return y ** (p - q) - A_beta(p, q, beta) * y**p


def h_beta_inverse(p: float, q: float, beta: float, v: float,
                   cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Inverse of ``h_beta`` on ``[1, inf)``, where it is strictly decreasing."""
    if not 0 <= beta < 1.0 / (p - 1.0):
        raise DomainError(f"requires 0 <= beta < 1/(p-1), got beta={beta!r}")
    top = h_beta(p, q, beta, 1.0)
    if v > top * (1 + ENDPOINT_SLACK):
        raise DomainError(f"requires v <= h_beta(1) = {top!r}, got v={v!r}")
    if v >= top:
        return 1.0
    g = lambda y: h_beta(p, q, beta, y) - v  # noqa: E731
    hi = expand_upper(g, 1.0, 2.0, cfg)
    return bisect(g, 1.0, hi, cfg)


def bellman_two_via_q(p: float, q: float, f: float, F: float,
                      cfg: RootConfig = DEFAULT_ROOT) -> tuple[float, float]:
    """Two-variable Bellman value rebuilt from the q-inequality.

    Returns ``(beta, F * h_beta^{-1}(L)^p)``; the value does not depend on q.
    """
    beta = beta_from_fF(p, q, f, F, cfg)
    L = (q / p) * (beta + 1.0) ** (1.0 - q) * f**p / F
    return beta, F * h_beta_inverse(p, q, beta, L, cfg) ** p

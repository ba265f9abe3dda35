"""Tabulate |z(alpha, tau) - omega_q(tau)| as alpha -> 0 over a (q, tau) grid."""
from dyadmax.scalars import omega, solve_z

ALPHAS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)

print("q     tau   " + " ".join(f"{a:>10.0e}" for a in ALPHAS))
for q in (1.2, 1.5, 2.0, 3.0):
    for tau in (0.1, 0.5, 0.9):
        w = omega(q, tau)
        gaps = [abs(solve_z(q, a, tau) - w) for a in ALPHAS]
        print(f"{q:<5} {tau:<5} " + " ".join(f"{g:>10.3e}" for g in gaps))

"""Coherent state in a harmonic well, evolved over one period.

Prints the packet center next to ``x0 cos(omega t)`` at a few times and
the final norm before renormalization would apply.
"""

import argparse
import math

from shadowsim import pathint as pi


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--x0", type=float, default=2.0)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--points", type=int, default=2048)
    ap.add_argument("--rule", choices=("midpoint", "trapezoid"), default="midpoint")
    args = ap.parse_args()

    params = pi.PathParams(potential=pi.Potential("harmonic", omega=args.omega))
    x = pi.uniform_grid(-10, 10, args.points)
    grid = pi.PropagatorGrid(x, pi.coherent_state(x, args.x0, params), 0.0, params).normalized()
    eps = (6 * grid.dx) ** 2
    slices = int(round(2 * math.pi / args.omega / eps))
    trace = pi.evolve(grid, eps, slices, renormalize=True, record_every=max(1, slices // 8),
                      rule=args.rule)
    print(f"{slices} slices of eps={eps:.5g}")
    print("      t    center   x0*cos(wt)")
    for k in range(len(trace)):
        s = trace[k]
        print(f"{s.t:7.3f}  {s.center():8.5f}  {args.x0 * math.cos(args.omega * s.t):8.5f}")
    raw = pi.evolve(grid, eps, slices, rule=args.rule)
    print(f"norm after one period without renormalization: {raw.norms()[-1]:.6f}")


if __name__ == "__main__":
    main()

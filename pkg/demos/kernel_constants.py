"""Tour of the fractional Green function: two regimes, one closed form.

The kernel of the inverse fractional operator on radial hyperbolic space
behaves like the Euclidean Riesz kernel near the pole and decays
exponentially (with an algebraic correction) at large radius.  This demo
tabulates it at order s = 1/2 in dimension 3, where a Bessel-K closed form
is available, and extracts both regime constants by windowed fits.

Run:  python3 demos/kernel_constants.py
"""

import math

import numpy as np
from scipy.special import kv

from fpme import KernelParams, green_asymptotics, green_table, green_value


def main() -> None:
    params = KernelParams(dim=3, order=0.5)

    print("kernel values against the Bessel-K closed form (dim 3, s = 1/2)")
    print(f"{'r':>10} {'G(r)':>14} {'closed form':>14} {'rel diff':>10}")
    prefactor = (4.0 * math.pi) ** -1.5 * 4.0 / math.sqrt(math.pi)
    for r in (1e-3, 1e-2, 0.1, 1.0, 5.0, 10.0, 20.0):
        value = green_value(r, params)
        oracle = prefactor * kv(1.0, r) / math.sinh(r)
        print(f"{r:>10.3g} {value:>14.6e} {oracle:>14.6e} "
              f"{abs(value - oracle) / oracle:>10.2e}")

    near_target = 1.0 / (2.0 * math.pi**2)
    print(f"\nnear-field plateau r^2 G(r) (target 1/(2 pi^2) = {near_target:.6f})")
    for r in np.geomspace(1e-3, 1e-2, 5):
        print(f"  r = {r:8.2e}   r^2 G = {r * r * green_value(r, params):.6f}")

    fits = green_asymptotics(params)
    far_target = math.sqrt(math.pi / 2.0) / math.pi**2
    print("\nwindowed fits of both regimes:")
    print(f"  near exponent {fits['near_exponent']:+.4f}   (2s - N = -2)")
    print(f"  near constant {fits['near_constant']:.6f}   (1/(2 pi^2) = {near_target:.6f})")
    print(f"  far rate      {fits['far_rate']:+.4f}   (-(N-1) = -2)")
    print(f"  far power     {fits['far_power']:+.4f}   (s - 1 = -0.5)")
    print(f"  far constant  {fits['far_constant']:.6f}   (sqrt(pi/2)/pi^2 = {far_target:.6f})")

    table = green_table(params, 1e-3, 20.0, 32)
    print(f"\n32-point table: max quadrature error estimate {table.quadrature_error:.2e}")


if __name__ == "__main__":
    main()

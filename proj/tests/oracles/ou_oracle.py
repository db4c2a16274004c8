"""Stationary-scale gap of the Euler chain for the OU equation dX = -X dt + dL.

The exact invariant law is alpha-stable with scale (1/alpha)^(1/alpha); the
Euler chain Y+ = (1-eta) Y + eta^(1/alpha) S has scale
eta^(1/alpha) / (1 - (1-eta)^alpha)^(1/alpha). P is the difference.
"""
import mpmath as mp

mp.mp.dps = 60


def scale_x(alpha):
    alpha = mp.mpf(alpha)
    return (1 / alpha) ** (1 / alpha)


def scale_y(alpha, eta):
    alpha, eta = mp.mpf(alpha), mp.mpf(eta)
    return eta ** (1 / alpha) / (1 - (1 - eta) ** alpha) ** (1 / alpha)


def gap(alpha, eta):
    return scale_y(alpha, eta) - scale_x(alpha)


def slope_limit(alpha):
    # Limit of gap / eta as eta -> 0, from a series expansion in eta.
    a = mp.mpf(alpha)
    return mp.limit(lambda e: gap(a, e) / e, 0)


if __name__ == "__main__":
    for eta in ("1e-2", "1e-3", "1e-4"):
        print(eta, mp.nstr(gap("1.5", mp.mpf(eta)), 20))
    a = mp.mpf("1.5")
    print("limit", mp.nstr(slope_limit(a), 20))
    print("(1/a)^(1/a)(a-1)/(2a)", mp.nstr(scale_x(a) * (a - 1) / (2 * a), 20))
    print("(1/a)^(1/a)(a+1)/(2a)", mp.nstr(scale_x(a) * (a + 1) / (2 * a), 20))

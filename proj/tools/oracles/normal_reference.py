#!/usr/bin/env python3
"""Arbitrary-precision reference values for the standard-normal kernel.

Produces the frozen constants asserted in tests/test_gauss.cpp: values of the
standard normal cdf, the inverse Mills ratio phi(z)/Phi(z) across both
implementation branches, the closed-form Gaussian product-integral triple
(i0, i1, i2), and the tensor Gauss-Hermite example E[Phi(2Z+1)].

Everything here is computed with mpmath at 50 significant digits, entirely
independent of the C++ implementation.
"""

import mpmath as mp

mp.mp.dps = 50


def phi(z):
    return mp.exp(-z * z / 2) / mp.sqrt(2 * mp.pi)


def Phi(z):
    return mp.ncdf(z)


def inverse_mills(z):
    return phi(z) / Phi(z)


def identity_triple(a, b):
    """i0 = int Phi(ax+b) phi(x) dx, i1 = int x phi(ax+b) phi(x) dx,
    i2 = int x^2 Phi(ax+b) phi(x) dx, evaluated by adaptive quadrature."""
    i0 = mp.quad(lambda x: Phi(a * x + b) * phi(x), [-mp.inf, 0, mp.inf])
    i1 = mp.quad(lambda x: x * phi(a * x + b) * phi(x), [-mp.inf, 0, mp.inf])
    i2 = mp.quad(lambda x: x * x * Phi(a * x + b) * phi(x), [-mp.inf, 0, mp.inf])
    return i0, i1, i2


def main():
    print("# standard normal cdf")
    for z in ["-1.959964", "-8", "-37", "0.5", "6"]:
        print(f"Phi({z}) = {mp.nstr(Phi(mp.mpf(z)), 22)}")

    print("\n# inverse Mills ratio phi/Phi (both branches; crossover at z=-6)")
    for z in ["-500", "-100", "-40", "-12", "-7", "-6.5", "-6.000001",
              "-5.999999", "-5.5", "-3", "-1", "0", "1", "5", "10", "38"]:
        print(f"IM({z}) = {mp.nstr(inverse_mills(mp.mpf(z)), 22)}")
    print(f"IM(0) exact = sqrt(2/pi) = {mp.nstr(mp.sqrt(2 / mp.pi), 22)}")

    print("\n# identity triple (i0, i1, i2) by adaptive quadrature")
    for a, b in [(2, 1), (-1.5, 0.25), (0.7, -2.0), (3.0, -0.5), (-4.0, 4.0)]:
        i0, i1, i2 = identity_triple(mp.mpf(a), mp.mpf(b))
        print(f"(a={a}, b={b}): i0={mp.nstr(i0, 20)} i1={mp.nstr(i1, 20)} "
              f"i2={mp.nstr(i2, 20)}")

    print("\n# Gauss-Hermite example: E[Phi(2Z+1)] = Phi(1/sqrt(5))")
    print(f"Phi(1/sqrt(5)) = {mp.nstr(Phi(1 / mp.sqrt(5)), 22)}")

    print("\n# misc toy values used in estimator unit tests")
    print(f"sqrt(1/2)*IM(0)        = {mp.nstr(mp.sqrt(mp.mpf(1) / 2) * inverse_mills(mp.mpf(0)), 22)}")
    print(f"q toy 15/sqrt(10)      = {mp.nstr(15 / mp.sqrt(10), 22)}")
    print(f"1/sqrt(5*pi)           = {mp.nstr(1 / mp.sqrt(5 * mp.pi), 22)}")
    print(f"2*phi(0)               = {mp.nstr(2 * phi(mp.mpf(0)), 22)}")


if __name__ == "__main__":
    main()

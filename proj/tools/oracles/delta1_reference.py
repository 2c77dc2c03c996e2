#!/usr/bin/env python3
"""Brute-force reference for the conditional-expectation estimator delta1.

Given the minimal sufficient statistic (t1, t2, s), the selected arm's stage-1
mean V is distributed N(t1, sigma1^2) truncated to [t2, inf), with
sigma1 = sigma*sqrt(n2/(n1*(n1+n2))) — the parameter cancels, as it must for a
sufficient statistic. The improved single-stage estimator, written as a
function of V for fixed (t1, t2), is

    d0I(V) = pooled        if V < pooled   (when t1 > t2)
             V             otherwise
    d0I(V) = pooled        always          (when t1 <= t2, since pooled <= t2 <= V)

with pooled = ((n1+n2)*t1 + n1*t2)/(2*n1+n2). delta1 = E[d0I(V) | t1, t2] is
evaluated here by adaptive quadrature over the truncated-normal density and
frozen into tests/test_estimators.cpp against the closed-form implementation.
"""

import mpmath as mp

mp.mp.dps = 40


def phi(z):
    return mp.exp(-z * z / 2) / mp.sqrt(2 * mp.pi)


def Phi(z):
    return mp.ncdf(z)


def delta1_bruteforce(n1, n2, sigma, t1, t2):
    n1 = mp.mpf(n1); n2 = mp.mpf(n2); sigma = mp.mpf(sigma)
    t1 = mp.mpf(t1); t2 = mp.mpf(t2)
    big_n = 2 * n1 + n2
    sigma1 = sigma * mp.sqrt(n2 / (n1 * (n1 + n2)))
    pooled = ((n1 + n2) * t1 + n1 * t2) / big_n
    if t1 <= t2:
        return pooled
    # V ~ N(t1, sigma1^2) truncated to [t2, inf); integrate in w = (V-t1)/sigma1
    lo = (t2 - t1) / sigma1
    mass = 1 - Phi(lo)

    def integrand(w):
        v = t1 + sigma1 * w
        val = pooled if v < pooled else v
        return val * phi(w)

    gamma = (pooled - t1) / sigma1  # breakpoint of the piecewise integrand
    upper = max(40, gamma + 40)
    val = mp.quad(integrand, [lo, gamma, upper])
    return val / mass


def main():
    cases = [
        (5, 5, 1.0, 1.0, 0.2),
        (5, 5, 1.0, 0.3, 0.2),
        (10, 15, 2.0, 4.0, 1.5),
        (10, 5, 0.7, -1.0, -1.2),
        (40, 26, 1025.8542000097598938834783, 3877.4848484848484848, 3710.775),
        (3, 7, 1.3, 2.0, 2.0),     # boundary t1 == t2 -> pooled
        (3, 7, 1.3, 1.9, 2.0),     # t1 < t2 -> pooled
    ]
    for n1, n2, sigma, t1, t2 in cases:
        v = delta1_bruteforce(n1, n2, sigma, t1, t2)
        print(f"delta1(n1={n1}, n2={n2}, sigma={sigma}, t1={t1}, t2={t2}) "
              f"= {mp.nstr(v, 20)}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Independent exact-risk oracle for the seven estimators.

Computes E[(delta - mu_S)^2] and E[delta - mu_S] at mu = (0, theta) by nested
adaptive quadrature (QUADPACK) over the joint density of (D1, D2), using the
conditional-mixture identity: given (D1,D2) = (d1,d2), S1 = Xbar_S - mu_S is a
two-component normal mixture with common variance sigma^2/(2 n1 + n2), so

    delta - mu_S = S1 + (n2/(n1+n2)) d2 + psi(d1, d2)

has closed conditional first/second moments. This script shares no code or
coordinates with the C++ implementation (which integrates Gauss-Legendre
panels in (xi, zeta) = (n2 d2 - (n1+n2) d1, d1)); its values are frozen into
tests/test_theory.cpp.

Modes:
    python3 risk_reference.py            # spot risk/bias values for tests
    python3 risk_reference.py --table    # exact improvement-percentage table
"""

import math
import sys

import numpy as np
from scipy import integrate
from scipy.special import ndtr  # standard normal cdf

SQRT_2PI = math.sqrt(2 * math.pi)


def phi(z):
    return math.exp(-0.5 * z * z) / SQRT_2PI


def inverse_mills(z):
    if z >= -6.0:
        return phi(z) / ndtr(z)
    x = -z
    t = 0.0
    for k in range(100, 0, -1):
        t = k / (x + t)
    return x + t


class Design:
    def __init__(self, n1, n2, sigma):
        self.n1, self.n2, self.sigma = n1, n2, float(sigma)
        self.N = 2 * n1 + n2
        self.s1 = self.sigma / math.sqrt(n1)
        self.s2 = self.sigma / math.sqrt(n2)
        self.rho = n2 / (n1 + n2)
        self.k = math.sqrt(n1 / (n2 * (n1 + n2)))
        self.sigma1 = self.sigma * math.sqrt(n2 / (n1 * (n1 + n2)))
        self.alpha = n1 / self.N

    def xi(self, d1, d2):
        return self.n2 * d2 - (self.n1 + self.n2) * d1

    def c_of_xi(self, xi):
        return -self.n1 * xi / ((self.n1 + self.n2) * self.N)

    def xi_star(self):
        """Root of sigma*k*IM(k xi/sigma) = n1 xi/((n1+n2) N) on xi > 0."""
        def g(xi):
            return self.sigma * self.k * inverse_mills(self.k * xi / self.sigma) \
                + self.c_of_xi(xi)
        lo, hi = 1e-9, self.sigma / self.k
        while g(hi) > 0:
            hi *= 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def psi_factory(dsg: Design, est: str):
    n1, n2, N, rho = dsg.n1, dsg.n2, dsg.N, dsg.rho
    sig, k, sigma1, alpha = dsg.sigma, dsg.k, dsg.sigma1, dsg.alpha

    def psi_umvcue(d1, d2):
        return -sig * k * inverse_mills(k * dsg.xi(d1, d2) / sig)

    if est == "mle":
        return lambda d1, d2: 0.0
    if est == "umvcue":
        return psi_umvcue
    if est == "single_stage":
        return lambda d1, d2: -rho * d2
    if est == "single_stage_rb":
        return lambda d1, d2: sigma1 * inverse_mills(
            dsg.xi(d1, d2) / ((n1 + n2) * sigma1))
    if est == "delta1":
        def psi(d1, d2):
            xi = dsg.xi(d1, d2)
            c = dsg.c_of_xi(xi)
            if xi <= 0:
                return c
            z = xi / ((n1 + n2) * sigma1)
            pz = ndtr(z)
            return (c * (ndtr(-alpha * z) - ndtr(-z)) + sigma1 * phi(alpha * z)) / pz
        return psi
    if est == "umvcue_improved":
        def psi(d1, d2):
            xi = dsg.xi(d1, d2)
            c = dsg.c_of_xi(xi)
            p = psi_umvcue(d1, d2)
            if (p < c <= 0.0) or (0.0 <= c < p):
                return c
            return p
        return psi
    if est == "single_stage_improved":
        def psi(d1, d2):
            c = dsg.c_of_xi(dsg.xi(d1, d2))
            p = -rho * d2
            if (p < c <= 0.0) or (0.0 <= c < p):
                return c
            return p
        return psi
    raise ValueError(est)


def risk_bias(dsg: Design, theta: float, est: str):
    n1, n2, N = dsg.n1, dsg.n2, dsg.N
    s1, s2, sig = dsg.s1, dsg.s2, dsg.sigma
    psi = psi_factory(dsg, est)
    r = s1 / s2
    s0sq = sig * sig / N
    xi_star = dsg.xi_star() if est == "umvcue_improved" else None

    def g3(a1, b1, a2, b2):
        A = 1 + a1 * a1 + a2 * a2
        B = 2 * (a1 * b1 + a2 * b2)
        C = b1 * b1 + b2 * b2
        return math.exp(-0.5 * (C - B * B / (4 * A))) / (2 * math.pi * math.sqrt(A))

    def integrand(d2, d1, which):
        f = (g3(1.0, (d1 - theta) / s1, r, d2 / s2)
             + g3(1.0, (d1 + theta) / s1, r, d2 / s2)) / (s1 * s2)
        lin = n1 * d1 + n2 * d2
        xt = n1 * theta * ((n1 + n2) * d1 - n2 * d2) / (N * sig * sig)
        w1 = 1.0 / (1.0 + math.exp(-2.0 * min(max(xt, -350.0), 350.0)))
        m1 = (n1 * theta - lin) / N
        m2 = (-n1 * theta - lin) / N
        a = dsg.rho * d2 + psi(d1, d2)
        if which == "mse":
            val = w1 * ((m1 + a) ** 2 + s0sq) + (1 - w1) * ((m2 + a) ** 2 + s0sq)
        else:
            val = w1 * m1 + (1 - w1) * m2 + a
        return f * val

    half = 13.0
    d1_lo = -(theta + half * s1 * math.sqrt(2.0))
    d2_hw = theta + half * math.hypot(s1, s2)

    def inner(d1, which):
        pts = set()
        # xi = 0 and the single-stage improvement boundary zeta = -xi/N
        pts.add((n1 + n2) * d1 / n2)
        pts.add(-n1 * d1 / n2)
        if xi_star is not None:
            pts.add((xi_star + (n1 + n2) * d1) / n2)
        lo, hi = -d2_hw, d2_hw
        pts = sorted(p for p in pts if lo < p < hi)
        val, _ = integrate.quad(integrand, lo, hi, args=(d1, which),
                                points=pts or None, limit=300,
                                epsabs=1e-13, epsrel=1e-11)
        return val

    mse, _ = integrate.quad(lambda d1: inner(d1, "mse"), d1_lo, 0.0,
                            limit=300, epsabs=1e-12, epsrel=1e-10)
    bias, _ = integrate.quad(lambda d1: inner(d1, "bias"), d1_lo, 0.0,
                             limit=300, epsabs=1e-12, epsrel=1e-10)
    return mse, bias


ESTIMATORS = ["mle", "umvcue", "umvcue_improved", "single_stage",
              "single_stage_improved", "single_stage_rb", "delta1"]


def spot_values():
    for (n1, n2, sigma, thetas) in [
        (5, 5, 1.0, (0.0, 0.5, 2.0)),
        (10, 15, 1.0, (1.0,)),
        (10, 5, 1.0, (0.7,)),
    ]:
        dsg = Design(n1, n2, sigma)
        for theta in thetas:
            for est in ESTIMATORS:
                mse, bias = risk_bias(dsg, theta, est)
                print(f"(n1={n1}, n2={n2}, sigma={sigma}, theta={theta}) "
                      f"{est}: mse={mse:.12f} bias={bias:.12f}", flush=True)


def improvement_table():
    thetas = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    designs = [(5, 5), (10, 5), (10, 10), (10, 15)]
    print("theta," + ",".join(f"({a};{b})" for a, b in designs), flush=True)
    for theta in thetas:
        row = [f"{theta:.2f}"]
        for (n1, n2) in designs:
            dsg = Design(n1, n2, 1.0)
            m0, _ = risk_bias(dsg, theta, "single_stage")
            m1, _ = risk_bias(dsg, theta, "single_stage_improved")
            row.append(f"{100.0 * (m0 - m1) / m0:.4f}")
        print(",".join(row), flush=True)


if __name__ == "__main__":
    if "--table" in sys.argv[1:]:
        improvement_table()
    else:
        spot_values()

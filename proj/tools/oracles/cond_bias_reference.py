#!/usr/bin/env python3
"""Monte Carlo reference for conditional bias E[delta | S = s] - mu_s.

Used to validate the region-restricted quadrature in theory.cpp on general
(mu1, mu2) configurations where no closed form is available. Closed forms do
exist at mu1 = mu2 (frozen separately): the selected stage-1 mean has
conditional bias sigma/sqrt(n1*pi), and the pooled two-stage mean (MLE)
(n1/(n1+n2)) * sigma/sqrt(n1*pi).

Output: per config/estimator/arm, the MC estimate with its standard error
(5e7 replications, chunked). Frozen into tests/test_theory.cpp with 4-SE
tolerances.
"""

import math

import numpy as np
from scipy.special import ndtr


def inverse_mills(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    lo = z < -6.0
    direct = ~lo
    zz = z[direct]
    out[direct] = np.exp(-0.5 * zz * zz) / math.sqrt(2 * math.pi) / ndtr(zz)
    x = -z[lo]
    t = np.zeros_like(x)
    for k in range(100, 0, -1):
        t = k / (x + t)
    out[lo] = x + t
    return out


def estimates(n1, n2, sigma, x1, x2, y):
    """Vectorized evaluation of all seven estimators."""
    xs = np.maximum(x1, x2)
    xl = np.minimum(x1, x2)
    d1 = xl - xs
    d2 = y - xs
    t1 = (n1 * xs + n2 * y) / (n1 + n2)
    t2 = xl
    N = 2 * n1 + n2
    rho = n2 / (n1 + n2)
    k = math.sqrt(n1 / (n2 * (n1 + n2)))
    sigma1 = sigma * math.sqrt(n2 / (n1 * (n1 + n2)))
    alpha = n1 / N
    xi = n2 * d2 - (n1 + n2) * d1
    q = k * xi / sigma
    c = n1 * (t2 - t1) / N
    pooled = t1 + c

    vals = {}
    vals["mle"] = t1
    vals["umvcue"] = t1 - sigma * k * inverse_mills(q)
    vals["single_stage"] = xs
    vals["single_stage_rb"] = t1 + sigma1 * inverse_mills((t1 - t2) / sigma1)

    def improved(psi):
        take = ((psi < c) & (c <= 0)) | ((0 <= c) & (c < psi))
        return np.where(take, pooled, t1 + psi)

    vals["umvcue_improved"] = improved(vals["umvcue"] - t1)
    vals["single_stage_improved"] = improved(-rho * d2)

    z = (t1 - t2) / sigma1
    zp = np.maximum(z, 0.0)
    bracket = (ndtr(-alpha * zp) - ndtr(-zp)) / ndtr(zp)
    corr = sigma1 * np.exp(-0.5 * (alpha * zp) ** 2) / math.sqrt(2 * math.pi) / ndtr(zp)
    vals["delta1"] = np.where(z > 0, t1 + c * bracket + corr, pooled)
    return vals


def cond_bias_mc(n1, n2, sigma, mu1, mu2, reps=50_000_000, seed=20240817,
                 chunk=2_000_000):
    rng = np.random.default_rng(seed)
    sums = {}
    counts = np.zeros(2)
    done = 0
    while done < reps:
        m = min(chunk, reps - done)
        x1 = rng.normal(mu1, sigma / math.sqrt(n1), m)
        x2 = rng.normal(mu2, sigma / math.sqrt(n1), m)
        sel2 = x2 > x1
        mu_s = np.where(sel2, mu2, mu1)
        y = rng.normal(mu_s, sigma / math.sqrt(n2), m)
        vals = estimates(n1, n2, sigma, x1, x2, y)
        for est, v in vals.items():
            s = sums.setdefault(est, [np.zeros(2), np.zeros(2)])
            for arm_idx, mask in ((0, ~sel2), (1, sel2)):
                s[0][arm_idx] += v[mask].sum()
                s[1][arm_idx] += (v[mask] ** 2).sum()
        counts[0] += (~sel2).sum()
        counts[1] += sel2.sum()
        done += m
    out = {}
    for est, (s1v, s2v) in sums.items():
        mean = s1v / counts
        var = s2v / counts - mean ** 2
        se = np.sqrt(var / counts)
        out[est] = (mean - np.array([mu1, mu2]), se)
    return out, counts / reps


def main():
    configs = [
        (5, 5, 1.0, 0.0, 0.0),
        (10, 15, 1.5, 0.3, -0.4),
        (7, 3, 0.8, 1.0, 1.5),
    ]
    for n1, n2, sigma, mu1, mu2 in configs:
        res, psel = cond_bias_mc(n1, n2, sigma, mu1, mu2)
        print(f"# n1={n1} n2={n2} sigma={sigma} mu1={mu1} mu2={mu2} "
              f"P(S=1)={psel[0]:.6f} P(S=2)={psel[1]:.6f}")
        for est in ["mle", "umvcue", "umvcue_improved", "single_stage",
                    "single_stage_improved", "single_stage_rb", "delta1"]:
            b, se = res[est]
            print(f"{est}: arm1_bias={b[0]:+.6f} (se {se[0]:.6f})  "
                  f"arm2_bias={b[1]:+.6f} (se {se[1]:.6f})", flush=True)


if __name__ == "__main__":
    main()

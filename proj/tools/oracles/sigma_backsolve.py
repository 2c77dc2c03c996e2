#!/usr/bin/env python3
"""Back-solve the standard deviation implied by a published UMVCUE value.

The bundled trial dataset reports estimates computed with an unstated sigma.
The UMVCUE is strictly monotone in sigma on this dataset, so sigma can be
recovered from the published UMVCUE value 3860.262 by bisection on

    t1 - sigma * k * IM(k * xi0 / sigma) = 3860.262,
    k = sqrt(n1 / (n2 (n1+n2))),  xi0 = n2*d2 - (n1+n2)*d1,

where IM is the inverse Mills ratio and (d1, d2, t1) come from the dataset's
stage means. This mirrors dtl::solve_sigma_for_umvcue (C++); the value below
is frozen into the acceptance gate.

For the record, no natural variance estimate from the raw data reproduces it:
pooled stage-1 SD 951.65, per-arm SDs 1060.62 / 663.30, stage-2 SD 1095.02,
all-samples SD 1006.74.
"""

import mpmath as mp

mp.mp.dps = 50

N1, N2 = 40, 26
XBAR_S = mp.mpf("3846.05")
XBAR_LOSER = mp.mpf("3710.775")
YBAR = mp.mpf(102072) / 26  # stage-2 raw mean 3925.84615...
TARGET = mp.mpf("3860.262")


def inverse_mills(z):
    return mp.exp(-z * z / 2) / mp.sqrt(2 * mp.pi) / mp.ncdf(z)


def umvcue(sigma):
    d1 = XBAR_LOSER - XBAR_S
    d2 = YBAR - XBAR_S
    t1 = (N1 * XBAR_S + N2 * YBAR) / (N1 + N2)
    k = mp.sqrt(mp.mpf(N1) / (N2 * (N1 + N2)))
    xi0 = N2 * d2 - (N1 + N2) * d1
    return t1 - sigma * k * inverse_mills(k * xi0 / sigma)


def main():
    lo, hi = mp.mpf("1"), mp.mpf("100000")
    assert umvcue(lo) > TARGET and umvcue(hi) < TARGET
    for _ in range(220):
        mid = (lo + hi) / 2
        if umvcue(mid) > TARGET:
            lo = mid
        else:
            hi = mid
    sigma_star = (lo + hi) / 2
    print(f"sigma* = {mp.nstr(sigma_star, 30)}")
    print(f"umvcue(sigma*) = {mp.nstr(umvcue(sigma_star), 20)}")
    t1 = (N1 * XBAR_S + N2 * YBAR) / (N1 + N2)
    print(f"t1 = {mp.nstr(t1, 20)}")
    pooled = ((N1 + N2) * t1 + N1 * XBAR_LOSER) / (2 * N1 + N2)
    print(f"pooled = {mp.nstr(pooled, 20)}")


if __name__ == "__main__":
    main()

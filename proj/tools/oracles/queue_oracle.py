#!/usr/bin/env python3
"""Brute-force windowed queueing maps, used to freeze expected values for the
C++ unit tests.  The departure cumulative on a window [0, n-1] is

    Ft(l) = max( b + sum(om[0..l]),  max_{0<=k<=l} ( F(k) + sum(om[k..l]) ) )

with F the cumulative of the inter-arrival sequence anchored F(0) = 0 and b a
carried-in backlog (0 for the plain anchored map).  D = increments of Ft,
S = Ft - F.
"""

import numpy as np


def brute(om, inc, b=0.0):
    n = len(om)
    F = np.zeros(n)
    for k in range(1, n):
        F[k] = F[k - 1] + inc[k]
    Ft = np.empty(n)
    for l in range(n):
        cands = [b + om[: l + 1].sum()]
        for k in range(l + 1):
            cands.append(F[k] + om[k : l + 1].sum())
        Ft[l] = max(cands)
    D = np.zeros(n)
    D[1:] = np.diff(Ft)
    S = Ft - F
    return Ft, D, S


def show(name, arr):
    print(f"{name} = {{" + ", ".join(f"{v:.17g}" for v in arr) + "}")


if __name__ == "__main__":
    om = np.array([0.5, 2.0, 0.25, 3.0, 0.125, 1.0])
    inc = np.array([0.0, 1.5, 0.5, 2.5, 0.25, 4.0])

    print("# anchored (b = 0)")
    Ft, D, S = brute(om, inc, 0.0)
    show("Ft", Ft)
    show("D ", D)
    show("S ", S)

    print("# backlog b = 0.7")
    Ft, D, S = brute(om, inc, 0.7)
    show("Ft", Ft)
    show("D ", D)
    show("S ", S)

    # spec-style tiny window sanity
    om2 = np.array([5.0, 0.0, 0.0])
    inc2 = np.array([0.0, 1.0, 1.0])
    Ft, D, S = brute(om2, inc2)
    show("tiny Ft", Ft)
    show("tiny D ", D)
    show("tiny S ", S)

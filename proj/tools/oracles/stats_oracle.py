#!/usr/bin/env python3
"""Independent reference values for the statistics module.

Pure-stdlib computations: KS statistic / asymptotic p-values, the
closed-form separation probability, box-counting slopes for the
middle-thirds Cantor set, and normal quantiles.  Values printed here are
frozen into tests/test_stats.cpp.
"""
import math


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def ks_tail(lam: float) -> float:
    if lam < 0.02:
        return 1.0
    s = 0.0
    sign = 1.0
    for k in range(1, 100001):
        term = math.exp(-2.0 * lam * lam * k * k)
        s += sign * term
        sign = -sign
        if term < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * s))


def effective_count(n: int) -> float:
    rn = math.sqrt(n)
    return rn + 0.12 + 0.11 / rn


def ks_statistic(samples, cdf):
    xs = sorted(samples)
    n = len(xs)
    d = 0.0
    for i, x in enumerate(xs):
        f = cdf(x)
        d = max(d, (i + 1) / n - f, f - i / n)
    return d


def normal_quantile(p: float) -> float:
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def separation(xi: float, x: float, z: float) -> float:
    # Gaussian factor is the standard normal density at a = (z + 2 xi x) / s
    # times sqrt(2 pi), i.e. exp(-a^2 / 2); cross-checked against numeric
    # integration of the running-max law against an exponential backlog and
    # against Monte Carlo of that representation.
    s = 2.0 * math.sqrt(2.0 * x)
    a = (z + 2.0 * xi * x) / s
    first = normal_cdf((z - 2.0 * xi * x) / s)
    tail = normal_cdf(-a)
    gauss = math.exp(-0.5 * a * a)
    second = math.exp(0.5 * xi * z) * (
        (1.0 + 0.5 * xi * z + xi * xi * x) * tail - xi * math.sqrt(x / math.pi) * gauss
    )
    return first + second


def main() -> None:
    print("== KS ==")
    d = ks_statistic([0.25, 0.5, 0.75], lambda x: x)
    print(f"D for {{0.25,0.5,0.75}} vs U(0,1): {d!r}")
    for n, dd in [(100, 0.1), (3, 0.25), (1000, 0.05), (20, 0.2)]:
        lam = effective_count(n) * dd
        print(f"p(n={n}, D={dd}) = {ks_tail(lam)!r}   (lambda={lam!r})")
    # critical lambda at alpha = 0.01
    lo, hi = 0.02, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ks_tail(mid) > 0.01:
            lo = mid
        else:
            hi = mid
    lam_crit = 0.5 * (lo + hi)
    print(f"lambda* at alpha=0.01: {lam_crit!r}")
    print(f"D_crit(n=100, alpha=0.01): {lam_crit / effective_count(100)!r}")

    # quantile samples (i - 1/2)/n construction: D = 1/(2n)
    n = 40
    qs = [normal_quantile((i - 0.5) / n) for i in range(1, n + 1)]
    print(f"D for quantile construction (n={n}): {ks_statistic(qs, normal_cdf)!r}"
          f"  expected {1.0 / (2 * n)!r}")

    print("== normal quantiles ==")
    q75 = normal_quantile(0.75)
    print(f"Phi^-1(0.75) = {q75!r}")
    print(f"running-max median 2*Phi^-1(0.75) = {2.0 * q75!r}")

    print("== separation formula ==")
    print(f"sep(0, 1, 0.5) = {separation(0.0, 1.0, 0.5)!r}  (xi=0 -> 1)")
    for xi in (0.5, 1.0):
        for x in (0.5, 1.0):
            for z in (0.0, 0.5, 1.0):
                print(f"sep({xi}, {x}, {z}) = {separation(xi, x, z)!r}")

    print("== intensity constants ==")
    print(f"2*sqrt(2/pi) = {2.0 * math.sqrt(2.0 / math.pi)!r}")
    print(f"density at tau=2/pi: {math.sqrt(2.0 / (math.pi * (2.0 / math.pi)))!r}")

    print("== Cantor box counts ==")
    # Midpoints of the depth-10 intervals: never on a 3^-k box boundary,
    # so the counts are immune to float boundary rounding.
    pts = [0.0]
    for _ in range(10):
        pts = [p / 3.0 for p in pts] + [2.0 / 3.0 + p / 3.0 for p in pts]
    pts = [p + 0.5 * 3.0 ** -10 for p in pts]
    print(f"points: {len(pts)}")
    for k in range(1, 9):
        e = 3.0 ** (-k)
        boxes = {math.floor(p / e) for p in pts}
        print(f"scale 3^-{k}: boxes = {len(boxes)} (2^{k} = {2 ** k})")
    print(f"log2/log3 = {math.log(2.0) / math.log(3.0)!r}")


if __name__ == "__main__":
    main()

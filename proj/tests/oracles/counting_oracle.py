"""Brute-force counts and totient sums pinning the counting tests."""
from fractions import Fraction
from itertools import product

from mpmath import mp, mpf, sqrt, nint, ceil
from sympy import totient

mp.dps = 50


def dist(x):
    return abs(x - nint(x))


def box_count(A, p, N):
    rng = [range(-n, n + 1) for n in N]
    return sum(1 for x in product(*rng) if sum(a * t for a, t in zip(A, x)) % p == 0)


def restricted(alphas, gammas, N, deltas, eps):
    lo = int(ceil(mpf(N) ** sqrt(mpf(eps))))
    return [n for n in range(max(1, lo), N + 1)
            if all(dist(n * a - g) <= d for a, g, d in zip(alphas, gammas, deltas))]


if __name__ == "__main__":
    print("A=(1,1) p=2 [-2,2]^2:", box_count((1, 1), 2, (2, 2)))
    print("A=(1,2,3) p=5 [-10,10]^3:", box_count((1, 2, 3), 5, (10, 10, 10)))
    print("phi(12) =", totient(12))
    s = sum(Fraction(int(totient(n)), n) for n in range(1, 10**4 + 1))
    print("sum_{n<=1e4} phi(n)/n =", float(s))
    r = restricted([sqrt(2), sqrt(3)], [0, 0], 10**5, [mpf("0.2"), mpf("0.2")], "0.05")
    t = sum(mpf(int(totient(n))) / n for n in r)
    print("restricted k=3 N=1e5: count", len(r), "totient sum", mp.nstr(t, 20))
    # inner gap of the sqrt2 example: b=2547, A=(408,985), N=(5,5)
    elems = [2547 + 408 * i + 985 * j for i in range(1, 6) for j in range(1, 6)]
    for p in (2, 3, 5, 7, 11, 13):
        print("alpha_%d =" % p, Fraction(sum(1 for e in elems if e % p == 0), 25))
    print("gap totient sum:", sum(Fraction(int(totient(n)), n) for n in elems))

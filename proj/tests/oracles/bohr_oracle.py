"""Independent high-precision scans used to pin Bohr-set test values."""
from mpmath import mp, mpf, sqrt, floor, nint

mp.dps = 60


def dist(x):
    return abs(x - nint(x))


def bohr(alphas, gammas, N, deltas, lo=None):
    lo = -N if lo is None else lo
    out = []
    for n in range(lo, N + 1):
        if all(dist(n * a - g) <= d for a, g, d in zip(alphas, gammas, deltas)):
            out.append(n)
    return out


if __name__ == "__main__":
    print("||12 sqrt2|| =", mp.nstr(dist(12 * sqrt(2)), 15))
    s = bohr([sqrt(2)], [0], 100, [mpf("0.05")])
    print("sqrt2 N=100 d=0.05:", s)
    h = [n for n in range(-100, 101) if dist(n * sqrt(2)) <= mpf("0.05")]
    print("homog sqrt2 N=1000 d=0.5 -> |n|<=100, d/10=0.05:", len(h))
    eps = mpf("0.05")
    lo = int(mp.ceil(mpf(10) ** (5 * sqrt(eps))))
    r = bohr([sqrt(2), sqrt(3)], [0, 0], 10**5, [mpf("0.2"), mpf("0.2")], lo=lo)
    print("restricted k=3 N=1e5 d=0.2 eps=0.05: lo =", lo, "count =", len(r))

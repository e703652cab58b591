"""Arbitrary-precision reference values frozen into the Rust tests.

Run with `python3 python/oracles/closed_forms.py`; needs mpmath.
"""

from mpmath import mp, mpf, erf, log, sin, exp, pi, ceil, sqrt, cos

mp.dps = 60


def theory(q, k, sigma, t, eps, d=None):
    q, sigma, eps = mpf(q), mpf(sigma), mpf(eps)
    base = (q / pi) * sin(pi / q) * exp(-2 * pi**2 * sigma**2 / q**2)
    width = q if d is None else mpf(2 * d + 1)
    return 8 * log(width**k / eps) * base ** (-(2 ** (t + 1)))


def pmf(sigma, q):
    sigma = mpf(sigma)
    half = (q - 1) // 2
    wraps = int(ceil(10 * sigma / q)) + 2
    out = {}
    for e in range(-half, half + 1):
        total = mpf(0)
        for w in range(-wraps, wraps + 1):
            c = e + w * q
            lo, hi = (c - mpf(1) / 2) / (sigma * sqrt(2)), (c + mpf(1) / 2) / (sigma * sqrt(2))
            total += (erf(hi) - erf(lo)) / 2
        out[e] = total
    return out


def cosine_deviation(sigma_f, q):
    p = pmf(sigma_f, q)
    g = {e: log(q * v) for e, v in p.items()}
    gmax, gmin = max(g.values()), min(g.values())
    amp, off = (gmax - gmin) / 2, (gmax + gmin) / 2
    return max(abs(g[e] - (off + amp * cos(2 * pi * e / q))) for e in g)


if __name__ == "__main__":
    print("theory(1601,2,8.005,13,0.5) =", mp.nstr(theory(1601, 2, 8.005, 13, 0.5), 25))
    print("pruned d=25                 =", mp.nstr(theory(1601, 2, 8.005, 13, 0.5, 25), 25))
    s = mpf("0.0896") * 101
    print("theory(101,2,0.0896q,5,0.5) =", mp.nstr(theory(101, 2, s, 5, 0.5), 25))
    print("pruned d=28                 =", mp.nstr(theory(101, 2, s, 5, 0.5, 28), 25))
    for t in range(10, 15):
        sf = mpf("8.005") * mpf(2) ** (mpf(t) / 2)
        print(f"cosine deviation t={t}:", mp.nstr(cosine_deviation(sf, 1601), 20))

"""Generate high-precision oracle values frozen into tests/test_bounds.py.

Everything here is computed with mpmath at 60 significant digits, straight
from the defining formulas, independently of the package code.  Run and
paste; do not import descbound here.
"""

import mpmath as mp

mp.mp.dps = 60

N = 50000
C = 5000
DELTA = mp.mpf("0.05")


def slack(bits, n=N, c=C, delta=DELTA):
    return 2 * mp.ln(2) * (bits + mp.log(c / delta, 2)) / n


def pstar(p_hat, bits, n=N, c=C, delta=DELTA):
    k = slack(bits, n, c, delta)
    p_hat = mp.mpf(p_hat)
    disc = k * (k + 4 * p_hat * (1 - p_hat))
    return ((2 * p_hat + k) + mp.sqrt(disc)) / (2 * (1 + k))


def kl(p, eps):
    p, eps = mp.mpf(p), mp.mpf(eps)
    a, b = p - eps, 1 - p + eps
    return a * mp.log(a / p) + b * mp.log(b / (1 - p))


def main():
    print("# table bounds (p_hat, bits) -> p_star, 30 digits")
    rows = [
        ("0.0449", 426), ("0.0529", 362), ("0.0449", 729), ("0.0529", 741),
        ("0.0449", 556), ("0.0529", 454), ("0.0449", 1032), ("0.0529", 980),
    ]
    for p_hat, bits in rows:
        print(f'    (("{p_hat}", {bits}), "{mp.nstr(pstar(p_hat, bits), 30)}"),')

    print("# slack K for bits=426:", mp.nstr(slack(426), 30))
    print("# p_hat=0, bits=100: K/(1+K) =",
          mp.nstr(slack(100) / (1 + slack(100)), 30))

    print("# kl_bernoulli oracles")
    for p, eps in [("0.5", "0.1"), ("0.3", "0.25"), ("0.05", "0.001"),
                   ("0.9", "0.35"), ("0.0449", "0.02")]:
        print(f'    (("{p}", "{eps}"), "{mp.nstr(kl(p, eps), 30)}"),')

    print("# chernoff_lower_tail oracles")
    for p, eps, n in [("0.5", "0.1", 100), ("0.2", "0.05", 400),
                      ("0.0449", "0.01", 50000)]:
        v = mp.e ** (-n * mp.mpf(eps) ** 2 / (2 * mp.mpf(p) * (1 - mp.mpf(p))))
        print(f'    (("{p}", "{eps}", {n}), "{mp.nstr(v, 30)}"),')

    print("# folklore oracles")
    for bits, n, c in [(426, 50000, "1.0"), (980, 50000, "2.5")]:
        v = mp.mpf(c) * mp.sqrt(mp.mpf(bits) / n)
        print(f'    (({bits}, {n}, "{c}"), "{mp.nstr(v, 30)}"),')

    print("# percent renderings (2 dp, half-up) of the table bounds")
    for p_hat, bits in rows:
        v = pstar(p_hat, bits) * 100
        print(f"    {p_hat} {bits} -> {mp.nstr(v, 12)}")


if __name__ == "__main__":
    main()

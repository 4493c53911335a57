"""High-precision Mittag-Leffler reference values.

Evaluates E_{a,b}(z) = sum_k z^k / Gamma(a k + b) with mpmath at a working
precision chosen from the cancellation estimate exp(|z|^{1/a}), or, when that
would need more than ~1500 digits, with the algebraic asymptotic expansion
truncated at its smallest term (error below exp(-|z|^{1/a}) there).

Offsets such as b = a - 1 are applied exactly, so pole terms of the asymptotic
expansion vanish as they do for the nominal parameters.

Usage: python3 ml_reference.py > ../data/ml_reference.csv
"""
import math
import sys

import mpmath as mp


def ml_series(a, b, z):
    z = mp.mpf(z)
    total = mp.mpf(0)
    k = 0
    peak = abs(z) ** (1 / a) / a + 10
    while True:
        arg = a * k + b
        term = z**k * mp.rgamma(arg)
        total += term
        if k > peak and abs(term) < mp.mpf(10) ** (-mp.mp.dps + 5) * max(abs(total), mp.mpf(10) ** -300):
            break
        k += 1
    return total


def ml_asym(a, b, z):
    z = mp.mpf(z)
    total = mp.mpf(0)
    prev = mp.inf
    k = 1
    while k < 200000:
        x = b - a * k
        if x <= 0 and x == mp.floor(x):
            k += 1
            continue
        g = mp.rgamma(x)
        # Envelope without the oscillating sine factor of the reflection formula.
        if x < mp.mpf(1) / 2:
            env = mp.gamma(1 - x) / abs(z) ** k / mp.pi
        else:
            env = abs(g) / abs(z) ** k
        if k > 2 and env > prev:
            break
        total -= z ** (-k) * g
        prev = env
        if env < mp.mpf(10) ** (-40) * abs(total):
            break
        k += 1
    return total


def reference(a, offset, z):
    """E_{a, a*c + d}(z) with the offset applied exactly in high precision."""
    u = abs(z) ** (1.0 / a)
    digits = u / math.log(10) + 40
    if digits < 1500 or z >= 0:
        mp.mp.dps = int(digits)
        return ml_series(mp.mpf(a), nominal_b(a, offset), z)
    mp.mp.dps = 60
    return ml_asym(mp.mpf(a), nominal_b(a, offset), z)


def nominal_b(a, offset):
    c, d = offset
    return c * mp.mpf(a) + d


def main():
    alphas = [0.1, 0.25, 0.3, 0.5, 0.7, 0.9, 0.99]
    zs = [-1e-8, -1e-3, -0.3, -0.7, -1.0, -1.5, -2.0, -3.0, -5.0, -8.0, -12.0,
          -20.0, -35.0, -50.0, -80.0, -200.0, -1e3, -1e5, -1e8, -1e12, 0.5, 2.0]
    w = sys.stdout
    w.write("a,b,z,value\n")
    for a in alphas:
        for offset in [(1, -1), (1, 0), (0, 1), (1, 1), (1, 2)]:
            b = offset[0] * a + offset[1]
            for z in zs:
                if z > 0 and abs(z) ** (1 / a) > 200:
                    continue
                v = reference(a, offset, z)
                w.write(f"{a!r},{b!r},{z!r},{mp.nstr(v, 20)}\n")


if __name__ == "__main__":
    main()

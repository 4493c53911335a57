"""Reference values frozen into the unit tests.

Every number is computed with mpmath at 120 digits from the defining series
or a closed form, independently of the C++ implementation.

Usage: python3 derived_values.py
"""
import mpmath as mp

mp.mp.dps = 120


def ml(a, b, z):
    z = mp.mpf(z)
    total = mp.mpf(0)
    k = 0
    while True:
        term = z**k * mp.rgamma(a * k + b)
        total += term
        if k > 20 and abs(term) < mp.mpf(10) ** -110:
            return total
        k += 1


def show(name, value):
    print(f"{name:40s} {mp.nstr(value, 20)}")


half = mp.mpf(1) / 2
show("E_{1/2,1}(-1)", ml(half, 1, -1))
show("E_{1/2,1}(-1) closed form", mp.exp(1) * mp.erfc(1))
show("E_{1/2,1/2}(-1)", ml(half, half, -1))
show("E_{1/2,1}(-2)", ml(half, 1, -2))
show("kernel_antiderivative(1/2,2,0,1)", (1 - ml(half, 1, -2)) / 2)
show("B(1/4,3/4)", mp.beta(mp.mpf(1) / 4, mp.mpf(3) / 4))
show("Gamma(1/2)", mp.gamma(half))
for z in (-0.5, -2, -8, -12):
    show(f"E_{{1/2,7/2}}({z})", ml(half, mp.mpf(7) / 2, z))
for z in (-0.5, -2, -8):
    show(f"E_{{7/10,37/10}}({z})", ml(mp.mpf(7) / 10, mp.mpf(37) / 10, z))
# Forward modal solution with F = c t^2: u0 E_{a,1}(-m t^a) + 2 c t^{a+2} E_{a,a+3}(-m t^a).
a, m, c, u0, t = half, mp.pi**2, mp.mpf(1), mp.mpf(1), mp.mpf(1) / 2
show("forward(a=1/2,m=pi^2,u0=1,F=t^2)(1/2)", u0 * ml(a, 1, -m * t**a) + 2 * c * t ** (a + 2) * ml(a, a + 3, -m * t**a))

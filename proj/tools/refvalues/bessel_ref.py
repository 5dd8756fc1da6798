# Reference values for the Bessel implementation, generated with scipy.
# Run:  python tools/refvalues/bessel_ref.py
# The printed table is frozen into tests/test_device.cpp.
import numpy as np
from scipy import special, optimize

xs = [0.0, 1e-8, 0.1, 0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8411837813406593,
      2.0, 2.4048255576957728, 3.0, 5.0, 8.0, 11.9, 12.1, 15.0, 20.0, 50.0]

print("# x, J0(x), J1(x)")
for x in xs:
    print(f"{{{x!r}, {float(special.j0(x))!r}, {float(special.j1(x))!r}}},")

# J1 peak: dJ1/dx = 0 -> J0(x) = J1(x)/x
peak = optimize.brentq(lambda x: special.j0(x) - special.j1(x) / x, 1.0, 2.5,
                       xtol=1e-15)
print("j1 peak x      =", repr(peak))
print("j1 peak value  =", repr(float(special.j1(peak))))
print("j0 first zero  =", repr(float(special.jn_zeros(0, 1)[0])))

# Spot values for J2 (used by nothing critical, sanity only)
for x in [0.5, 2.0, 7.3]:
    print(f"J2({x}) =", repr(float(special.jn(2, x))))

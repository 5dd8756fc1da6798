# Tone amplitudes for the bundled scenario configs, generated with scipy.
# Run:  python3 tools/refvalues/drive_calibration_ref.py
# The printed numbers are frozen into the configs/ files.
#
# A tone of modulation index eps = Omega/nu on the common qubit realizes an
# effective exchange coupling |g_eff_j| = |g_j| J1(eps_j) prod_{k!=j} J0(eps_k)
# with its resonant target.  Given the per-tone coupling each scenario needs
# (fixed by its published duration), solve for the indices and report the
# drive amplitudes Omega_j = eps_j * nu_j in ordinary-frequency MHz.
import numpy as np
from scipy import optimize, special

# Measured lattice: qubit/bus frequencies (GHz) and couplings (MHz).
w = [5.0408, 5.0992, 5.2056, 5.2347]
wb = 5.5208
h = [17.3, 22.8, 18.2, 15.2]


def bus_coupling(j):
    d0 = (w[0] - wb) * 1e3
    dj = (w[j] - wb) * 1e3
    return (h[0] * h[j] / 2.0) * (1.0 / d0 + 1.0 / dj)  # MHz


def detuning(j):
    return (w[j] - w[0]) * 1e3  # MHz


def solve_indices(targets, g_wanted):
    """Indices eps with |g_eff_j| = g_wanted for every tone (fixed point)."""
    g = np.array([abs(bus_coupling(j)) for j in targets])

    def residual(eps):
        out = np.empty_like(eps)
        for i in range(len(eps)):
            others = np.prod([special.j0(eps[k]) for k in range(len(eps)) if k != i])
            out[i] = g[i] * special.j1(eps[i]) * others - g_wanted
        return out

    eps0 = np.full(len(targets), 0.5)
    eps = optimize.fsolve(residual, eps0, xtol=1e-14)
    assert np.max(np.abs(residual(eps))) < 1e-12
    return eps


def report(name, targets, g_wanted):
    eps = solve_indices(targets, g_wanted)
    print(f"{name}: per-tone |g_eff| = {g_wanted} MHz")
    for i, j in enumerate(targets):
        amp = eps[i] * detuning(j)
        print(f"  tone on qubit {j}: freq = {detuning(j):.1f} MHz, "
              f"eps = {eps[i]!r}, amplitude_MHz = {amp!r}")
    print()


# Durations 320/365/460/720 ns (equal-sharing) and 316/366 ns (quarter-swap)
# pin the couplings below.
report("w2_q1  (t = 320 ns)", [1], 0.390625)
report("w2_q2  (t = 365 ns)", [2], 1.0 / (8 * 0.365))
report("w3     (t = 460 ns)", [1, 2], np.arccos(1 / np.sqrt(3)) / (np.sqrt(2) * 2 * np.pi * 0.460))
report("w4     (t = 720 ns)", [1, 2, 3], np.arccos(0.5) / (np.sqrt(3) * 2 * np.pi * 0.720))
report("gate_q1 (t = 316 ns)", [1], 1.0 / (8 * 0.316))
report("gate_q2 (t = 366 ns)", [2], 1.0 / (8 * 0.366))

# Exact per-tone couplings implied by the published durations, for the
# budget expectations.
print("g(365 ns) =", repr(1.0 / (8 * 0.365)))
print("g(460 ns) =", repr(np.arccos(1 / np.sqrt(3)) / (np.sqrt(2) * 2 * np.pi * 0.460)))
print("g(720 ns) =", repr(np.arccos(0.5) / (np.sqrt(3) * 2 * np.pi * 0.720)))
print("g(316 ns) =", repr(1.0 / (8 * 0.316)))
print("g(366 ns) =", repr(1.0 / (8 * 0.366)))

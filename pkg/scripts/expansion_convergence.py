#!/usr/bin/env python3
"""Print the truncation-error ladder of the pole expansion of t(k).

For each built-in system: max |T_N(E) - T(E)| over 0 < E <= 5V as the number
of retained pole pairs N grows.  Shows how many poles the transmitted-packet
formula needs before it is indistinguishable from the exact transfer matrix.
"""

import sys

import numpy as np

from tunnelwave.poles import PoleSearchConfig, sweep_poles
from tunnelwave.potential import transmission_coefficient
from tunnelwave.presets import default_n_seed, preset_profile
from tunnelwave.resonances import expansion_t, residues

SIZES = (10, 30, 100, 300, 1000, 4000)


def ladder(name):
    profile = preset_profile(name)
    catalog = sweep_poles(profile, PoleSearchConfig(n_seed=default_n_seed(name)))
    residue_set = residues(profile, catalog)
    v_top = profile.barrier_height
    energies = np.linspace(5 * v_top / 2000, 5 * v_top, 2000)
    k = np.sqrt(energies / profile.units.inv_mass_coeff)
    t_exact = transmission_coefficient(profile, energies)
    print(f"{name}: {len(catalog)} poles")
    for n in SIZES:
        if n > len(catalog):
            continue
        amp = expansion_t(profile, k, catalog, residue_set, n)
        err = np.max(np.abs(np.abs(amp) ** 2 - t_exact))
        print(f"  N = {n:5d}: max error {err:.3e}")


if __name__ == "__main__":
    for preset in sys.argv[1:] or ("sb", "db", "qb"):
        ladder(preset)

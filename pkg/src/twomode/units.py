"""Internal unit convention shared by every module.

Everything is expressed in recoil units: hbar = 1, k_B = 1, omega_r = 1 and
the cavity wave number k = 1, which fixes the particle mass to m = 1/2
through the recoil relation omega_r = hbar k^2 / (2 m).

Concretely:

* positions are stored as the phase u = k x, wrapped into [0, 2*pi)
* momenta are stored as p / (hbar k); thermal equilibrium at temperature T
  means var(p) = m k_B T = T / 2 with T itself in units of hbar*omega_r
* time is omega_r * t, energies are in hbar*omega_r
* the kinetic energy per particle p^2/(2m) equals the square of the stored
  momentum, so ``mean(p**2)`` *is* the kinetic energy in hbar*omega_r

Laboratory quantities (MHz, nm, amu) appear only at the I/O boundary, see
:mod:`twomode.runconfig`.
"""

import math

HBAR = 1.0
BOLTZMANN = 1.0
OMEGA_R = 1.0
WAVE_NUMBER = 1.0
MASS = 0.5

TWO_PI = 2.0 * math.pi

# reference lab values of the system the default parameters describe
# (85Rb D2 line): recoil frequency nu_r = omega_r / 2 pi
DEFAULT_RECOIL_KHZ = 3.86
DEFAULT_WAVELENGTH_NM = 780.0

# kappa = 2 pi x 1.5 MHz expressed in recoil units
DEFAULT_KAPPA = 1.5e6 / (DEFAULT_RECOIL_KHZ * 1e3)


def recoil_check() -> float:
    """Return omega_r recomputed from the convention (identically 1)."""
    return HBAR * WAVE_NUMBER**2 / (2.0 * MASS)

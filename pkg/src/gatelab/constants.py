"""CODATA 2018 constants in SI units."""

import math

h = 6.62607015e-34  # J s (exact)
hbar = h / (2 * math.pi)
e = 1.602176634e-19  # C (exact)
atomic_mass = 1.66053906660e-27  # kg
epsilon_0 = 8.8541878128e-12  # F/m

TWO_PI = 2 * math.pi
KHZ = 1e3
MHZ = 1e6


def khz_to_angular(f_khz):
    return TWO_PI * KHZ * f_khz


def angular_to_khz(w):
    return w / (TWO_PI * KHZ)

"""
Closed-form gate speed limits and noise tolerances.

All rates are in Hz (gate operations per second), recoil frequencies are
E_R/h in Hz, and trap frequencies are angular (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from gatelab import constants as const
from gatelab.errors import ValidationError
from gatelab.species import BUILTIN_SPECIES, IonSpecies, MODE_FACTORS, recoil_frequency

# empirical exponent of the minimum ion spacing in an N-ion string
SPACING_EXPONENT = 1.71
# exponent of N in the spacing-limited swap rate, as quoted with the 2.5 prefactor
RATE_N_EXPONENT = 0.93
RATE_PREFACTOR = 2.5


def _check_epsilon(epsilon):
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")


def _check_common(epsilon, recoil_hz, N):
    _check_epsilon(epsilon)
    if recoil_hz <= 0:
        raise ValidationError("recoil frequency must be positive")
    if N < 1:
        raise ValidationError("N must be >= 1")


@dataclass(frozen=True)
class SpeedLimitReport:
    gate_kind: str
    epsilon_target: float
    max_rate: float
    governing_formula: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_rate < 0:
            raise ValidationError("max_rate must be non-negative")


def swap_rate_uncorrected(epsilon: float, recoil_hz: float, N: int = 1) -> float:
    """Swap rate when the light shift is left uncorrected: 4 eps E_R/(N h)."""
    _check_common(epsilon, recoil_hz, N)
    return 4 * epsilon * recoil_hz / N


def swap_rate_corrected(epsilon: float, recoil_hz: float, N: int, omega_z: float) -> float:
    """Swap rate with the laser tuned to the light-shifted sideband.

    2 sqrt(2) eps sqrt((E_R/(N h)) (w_z / 2 pi)), the geometric mean of the
    N-ion recoil frequency and the trap frequency.
    """
    _check_common(epsilon, recoil_hz, N)
    if omega_z <= 0:
        raise ValidationError("omega_z must be positive")
    return 2 * math.sqrt(2) * epsilon * math.sqrt(recoil_hz / N * omega_z / const.TWO_PI)


def monroe_rate(epsilon: float, recoil_hz: float, N: int, omega_z: float) -> float:
    """Magic-eta carrier gate rate, capped at the N-ion recoil frequency."""
    _check_common(epsilon, recoil_hz, N)
    if omega_z <= 0:
        raise ValidationError("omega_z must be positive")
    rate = math.sqrt(2) * epsilon * math.sqrt(recoil_hz / N * omega_z / const.TWO_PI)
    return min(rate, recoil_hz / N)


def speed_limit(gate_kind: str, epsilon: float, recoil_hz: float, N: int = 1,
                omega_z: float | None = None) -> SpeedLimitReport:
    """Maximum rate for a gate family as a report.

    ``gate_kind`` is 'swap_uncorrected', 'swap', 'cz' (half the swap rate) or
    'monroe'.
    """
    inputs = {"recoil_hz": recoil_hz, "N": N, "omega_z": omega_z}
    if gate_kind == "swap_uncorrected":
        return SpeedLimitReport(gate_kind, epsilon, swap_rate_uncorrected(epsilon, recoil_hz, N),
                                "4*eps*E_R/(N*h)", inputs)
    if omega_z is None:
        raise ValidationError(f"{gate_kind} limit needs omega_z")
    if gate_kind == "swap":
        return SpeedLimitReport(gate_kind, epsilon,
                                swap_rate_corrected(epsilon, recoil_hz, N, omega_z),
                                "2*sqrt(2)*eps*sqrt(E_R/(N*h)*f_z)", inputs)
    if gate_kind == "cz":
        return SpeedLimitReport(gate_kind, epsilon,
                                swap_rate_corrected(epsilon, recoil_hz, N, omega_z) / 2,
                                "sqrt(2)*eps*sqrt(E_R/(N*h)*f_z)", inputs)
    if gate_kind == "monroe":
        return SpeedLimitReport(gate_kind, epsilon, monroe_rate(epsilon, recoil_hz, N, omega_z),
                                "min(sqrt(2)*eps*sqrt(E_R/(N*h)*f_z), E_R/(N*h))", inputs)
    raise ValidationError(f"unknown gate kind {gate_kind!r}")


def intensity_noise_tolerance(gate_kind: str, epsilon: float, eta: float) -> float:
    """Relative Rabi-frequency stability needed for imprecision ``epsilon``."""
    _check_epsilon(epsilon)
    if eta <= 0:
        raise ValidationError("eta must be positive")
    kind = str(gate_kind).lower()
    if kind in ("swap", "cz", "cz_aux"):
        return epsilon
    if kind in ("monroe", "monroe_cx"):
        return eta**2 * epsilon
    raise ValidationError(f"unknown gate kind {gate_kind!r}")


def max_cm_frequency(spacing_s: float, N: int, mass: float) -> float:
    """Highest axial centre-of-mass frequency (rad/s) keeping the closest ions ``spacing_s`` apart.

    ``mass`` is in kg.
    """
    if spacing_s <= 0 or mass <= 0:
        raise ValidationError("spacing and mass must be positive")
    if N < 2:
        raise ValidationError("N must be >= 2")
    coulomb = const.e**2 / (4 * math.pi * const.epsilon_0)
    return math.sqrt(8 * coulomb / (mass * spacing_s**3 * N**SPACING_EXPONENT))


def _spacing(species: IonSpecies, spacing_s):
    return 10 * species.wavelength if spacing_s is None else spacing_s


def spacing_limited_swap_rate(species: IonSpecies, epsilon: float, N: int,
                              spacing_s: float | None = None,
                              angle: float = math.pi / 4) -> float:
    """Fastest swap rate (Hz) at given precision and closest-ion spacing.

    1/T_S = 2.5 (e^2/4 pi eps0)^(1/4) eps (E_R/h)^(1/2) M^(-1/4) s^(-3/4) N^(-0.93),
    which assumes the breathing mode carries the logic. The spacing defaults
    to ten wavelengths.
    """
    _check_epsilon(epsilon)
    if N < 1:
        raise ValidationError("N must be >= 1")
    s = _spacing(species, spacing_s)
    if s <= 0:
        raise ValidationError("spacing must be positive")
    coulomb = const.e**2 / (4 * math.pi * const.epsilon_0)
    recoil = recoil_frequency(species, angle)
    return (RATE_PREFACTOR * coulomb**0.25 * epsilon * math.sqrt(recoil)
            * species.mass_kg**-0.25 * s**-0.75 * N**-RATE_N_EXPONENT)


def gate_time_per_ion(species: IonSpecies, epsilon: float, spacing_s: float | None = None,
                      angle: float = math.pi / 4) -> float:
    """Minimum swap time per ion (s), T_S/N.

    N^(-0.93) in the spacing-limited rate is approximated by 1/N, so the
    per-ion time does not depend on N and equals the single-ion value.
    """
    return 1 / spacing_limited_swap_rate(species, epsilon, 1, spacing_s, angle)


def gate_time_per_ion_exact(species: IonSpecies, epsilon: float, N: int,
                            spacing_s: float | None = None, angle: float = math.pi / 4,
                            mode: str = "breathing") -> float:
    """T_S/N from composing the spacing limit, the mode factor and the corrected swap rate."""
    s = _spacing(species, spacing_s)
    omega_z = max_cm_frequency(s, N, species.mass_kg) * MODE_FACTORS[mode]
    rate = swap_rate_corrected(epsilon, recoil_frequency(species, angle), N, omega_z)
    return 1 / (rate * N)


def recoil_table(species: dict[str, IonSpecies] | None = None,
                 angle: float = math.pi / 4) -> list[tuple[str, float]]:
    """(name, E_R/h in Hz) for each species."""
    species = species or BUILTIN_SPECIES
    return [(name, recoil_frequency(sp, angle)) for name, sp in species.items()]


def gate_time_table(epsilon: float = 0.1, spacing_lambdas: float = 10.0,
                    species: dict[str, IonSpecies] | None = None) -> list[tuple[str, float, float]]:
    """(name, spacing in m, T_S/N in s) rows."""
    species = species or BUILTIN_SPECIES
    rows = []
    for name, sp in species.items():
        s = spacing_lambdas * sp.wavelength
        rows.append((name, s, gate_time_per_ion(sp, epsilon, s)))
    return rows

"""
Ion species, trap geometry, recoil frequencies and Lamb-Dicke parameters.

The recoil energy for a photon momentum r*hbar*k projected on a trap axis is

    E_R = (r hbar k cos(theta))**2 / (2 M),

with r = 1 for a single-photon transition and r = 2 for a Raman pair with
counter-propagating axial projections. The Lamb-Dicke parameter of a mode of
angular frequency w shared by N ions is eta = sqrt(E_R / (hbar w)) / sqrt(N).
"""

from __future__ import annotations

import configparser
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from gatelab import constants as const
from gatelab.errors import ValidationError

MODE_FACTORS = {
    "com": 1.0,
    "breathing": math.sqrt(3.0),
    "third": math.sqrt(29.0 / 5.0),
}


@dataclass(frozen=True)
class IonSpecies:
    """A candidate qubit ion and the transition used to drive it.

    Parameters
    ----------
    name : str
    mass : float
        Mass in atomic mass units.
    wavelength : float
        Transition (or Raman) wavelength in metres.
    photon_factor : int
        1 for a single-photon transition, 2 for a counter-propagating Raman pair.
    """

    name: str
    mass: float
    wavelength: float
    photon_factor: int = 1

    def __post_init__(self):
        if not self.mass > 0:
            raise ValidationError(f"{self.name}: mass must be positive")
        if not self.wavelength > 0:
            raise ValidationError(f"{self.name}: wavelength must be positive")
        if self.photon_factor not in (1, 2):
            raise ValidationError(f"{self.name}: photon_factor must be 1 or 2")

    @property
    def mass_kg(self) -> float:
        return self.mass * const.atomic_mass


BUILTIN_SPECIES = {
    "Be9_313": IonSpecies("Be9_313", 9, 313e-9, 2),
    "Ca40_397": IonSpecies("Ca40_397", 40, 397e-9, 2),
    "Ca40_729": IonSpecies("Ca40_729", 40, 729e-9, 1),
}


@dataclass(frozen=True)
class TrapConfig:
    """Trap mode frequencies (rad/s), ion number and beam direction.

    ``beam_angles`` are the angles (radians) between the laser wavevector and
    the x, y, z principal axes. ``mode_frequencies[2]`` is the axial
    centre-of-mass frequency; ``mode_choice`` selects which axial normal mode
    carries the logic.
    """

    mode_frequencies: tuple[float, float, float]
    ion_count: int = 1
    beam_angles: tuple[float, float, float] = (math.pi / 2, math.pi / 2, math.pi / 4)
    mode_choice: str = "com"

    def __post_init__(self):
        if len(self.mode_frequencies) != 3 or min(self.mode_frequencies) <= 0:
            raise ValidationError("mode_frequencies must be three positive values")
        if self.ion_count < 1:
            raise ValidationError("ion_count must be >= 1")
        cos2 = sum(math.cos(a) ** 2 for a in self.beam_angles)
        if cos2 > 1 + 1e-9:
            raise ValidationError(
                f"beam direction cosines squared sum to {cos2:.6f} > 1"
            )
        if self.mode_choice not in MODE_FACTORS:
            raise ValidationError(f"unknown mode_choice {self.mode_choice!r}")

    @property
    def axial_frequency(self) -> float:
        return mode_frequency(self.mode_frequencies[2], self.mode_choice)


@dataclass(frozen=True)
class LambDickeSet:
    eta_x: float
    eta_y: float
    eta_z: float

    def __post_init__(self):
        for name in ("eta_x", "eta_y", "eta_z"):
            value = getattr(self, name)
            if value < 0:
                raise ValidationError(f"{name} must be non-negative")
            if value >= 1:
                warnings.warn(f"{name} = {value:.3f} is outside the Lamb-Dicke regime",
                              stacklevel=3)

    def as_tuple(self):
        return (self.eta_x, self.eta_y, self.eta_z)


def recoil_frequency(species: IonSpecies, angle_to_axis: float = math.pi / 4) -> float:
    """Recoil frequency E_R/h in Hz for the wavevector projection at ``angle_to_axis``."""
    if not 0 <= angle_to_axis <= math.pi:
        raise ValidationError("angle must lie in [0, pi]")
    r = species.photon_factor
    return (r**2 * const.h * math.cos(angle_to_axis) ** 2
            / (2 * species.mass_kg * species.wavelength**2))


def lamb_dicke(species: IonSpecies, trap: TrapConfig) -> LambDickeSet:
    omegas = list(trap.mode_frequencies)
    omegas[2] = trap.axial_frequency
    etas = []
    for angle, omega in zip(trap.beam_angles, omegas):
        recoil_hz = recoil_frequency(species, angle)
        # E_R / (hbar w) = (E_R/h) / (w / 2 pi)
        etas.append(math.sqrt(recoil_hz / (omega / const.TWO_PI)) / math.sqrt(trap.ion_count))
    return LambDickeSet(*etas)


def mode_frequency(omega_cm: float, mode_choice: str = "com") -> float:
    """Frequency of an axial normal mode given the centre-of-mass frequency."""
    if omega_cm <= 0:
        raise ValidationError("omega_cm must be positive")
    try:
        return omega_cm * MODE_FACTORS[mode_choice]
    except KeyError:
        raise ValidationError(
            f"unknown mode {mode_choice!r}; expected one of {sorted(MODE_FACTORS)}"
        ) from None


def load_species_registry(path=None) -> dict[str, IonSpecies]:
    """Built-in species, extended or overridden by an INI file.

    Each section is one species::

        [Sr88_674]
        mass_u = 88
        wavelength_nm = 674
        photon_factor = 1
    """
    registry = dict(BUILTIN_SPECIES)
    if path is None:
        return registry
    parser = configparser.ConfigParser()
    if not parser.read(Path(path)):
        raise ValidationError(f"cannot read species file {path}")
    for name in parser.sections():
        sec = parser[name]
        unknown = set(sec) - {"mass_u", "wavelength_nm", "photon_factor"}
        if unknown:
            raise ValidationError(f"[{name}]: unknown keys {sorted(unknown)}")
        try:
            registry[name] = IonSpecies(
                name,
                float(sec["mass_u"]),
                float(sec["wavelength_nm"]) * 1e-9,
                int(sec.get("photon_factor", "1")),
            )
        except KeyError as exc:
            raise ValidationError(f"[{name}]: missing {exc.args[0]}") from None
        except ValueError as exc:
            raise ValidationError(f"[{name}]: {exc}") from None
    return registry

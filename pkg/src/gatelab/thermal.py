"""
Thermal averaging over spectator vibrational modes.

Spectator modes are not simulated as degrees of freedom. For each joint
occupation they rescale the Rabi frequency by the diagonal coupling factor
(first order: 1 - n eta^2) and shift the sideband resonance through their own
off-resonant sidebands. The z-mode dynamics is solved for every occupation
and the populations are averaged with thermal weights.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from gatelab import constants as const
from gatelab.coupling import coupling_element, coupling_matrix
from gatelab.dynamics import (
    PulseSpec,
    RotatingHamiltonian,
    SystemBasis,
    build_hamiltonian,
    excited_population,
    light_shift_analytic,
    resonance_detuning,
    window_contrast,
)
from gatelab.errors import ValidationError
from gatelab.gates import optimize_pulse

DEFAULT_CUTOFF = 1e-4


@dataclass(frozen=True)
class ThermalMode:
    """A spectator mode: Lamb-Dicke parameter, angular frequency, mean occupation."""

    eta: float
    omega: float
    n_bar: float
    name: str = ""

    def __post_init__(self):
        if self.eta < 0 or self.n_bar < 0:
            raise ValidationError("eta and n_bar must be non-negative")
        if self.omega <= 0:
            raise ValidationError("mode frequency must be positive")


@dataclass(frozen=True, eq=False)
class OccupationDistribution:
    n_bar: float
    probabilities: np.ndarray

    @property
    def n_cut(self) -> int:
        return len(self.probabilities) - 1

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probabilities)), self.probabilities))


def thermal_weights(n_bar: float, mass_cutoff: float = DEFAULT_CUTOFF) -> OccupationDistribution:
    """Bose-Einstein occupation probabilities, truncated and renormalised.

    p(n) = n_bar^n / (n_bar + 1)^(n + 1), cut at the smallest n_cut whose
    discarded tail q^(n_cut + 1), q = n_bar/(n_bar + 1), is below ``mass_cutoff``.
    """
    if n_bar < 0:
        raise ValidationError("n_bar must be non-negative")
    if not 0 < mass_cutoff < 1:
        raise ValidationError("mass_cutoff must lie in (0, 1)")
    if n_bar == 0:
        return OccupationDistribution(0.0, np.ones(1))
    q = n_bar / (n_bar + 1)
    n_cut = max(0, math.ceil(math.log(mass_cutoff) / math.log(q)) - 1)
    while q ** (n_cut + 1) >= mass_cutoff:
        n_cut += 1
    p = (1 - q) * q ** np.arange(n_cut + 1)
    return OccupationDistribution(float(n_bar), p / p.sum())


def rabi_factor(n: int, eta: float, exact: bool = False) -> float:
    """Diagonal coupling factor of one spectator mode in Fock state ``n``."""
    if n < 0:
        raise ValidationError("occupations must be non-negative")
    if exact:
        return coupling_element(n, n, eta).real
    factor = 1 - n * eta**2
    if factor <= 0:
        raise ValidationError(
            f"first-order Rabi scaling is non-positive at n = {n}, eta = {eta}; use exact=True"
        )
    return factor


def scaled_rabi(n_x: int, n_y: int, eta_x: float, eta_y: float, base_coupling: complex,
                exact: bool = False) -> complex:
    """(1 - n_x eta_x^2)(1 - n_y eta_y^2) times ``base_coupling``.

    With ``exact`` the first-order factors are replaced by C_nn(eta).
    """
    return rabi_factor(n_x, eta_x, exact) * rabi_factor(n_y, eta_y, exact) * base_coupling


def spectator_light_shift(n_y: int, eta_y: float, Omega_carrier: float, omega_gap: float,
                          omega_z: float | None = None) -> float:
    """Shift of a z-sideband resonance from a nearby spectator sideband (rad/s).

    (eta_y Omega)^2 (n_y + 1) / (2 omega_gap), where ``omega_gap`` is the
    spectator-mode frequency minus the laser's offset from the carrier.
    Warns when the gap is below 1e-3 ``omega_z``, where the estimate fails.
    """
    if omega_gap == 0:
        raise ValidationError("omega_gap must be non-zero")
    if omega_z is not None and abs(omega_gap) < 1e-3 * omega_z:
        warnings.warn("spectator sideband nearly degenerate; light-shift estimate invalid",
                      RuntimeWarning, stacklevel=2)
    return (eta_y * Omega_carrier) ** 2 * (n_y + 1) / (2 * omega_gap)


def joint_occupations(modes, mass_cutoff: float = DEFAULT_CUTOFF):
    """Joint spectator occupations in decreasing probability.

    The product distribution is enumerated until the accumulated mass reaches
    1 - ``mass_cutoff``, then renormalised. Returns a list of (occupations,
    weight) pairs in a fixed order.
    """
    if not modes:
        return [((), 1.0)]
    dists = [thermal_weights(m.n_bar, mass_cutoff).probabilities for m in modes]
    grids = np.meshgrid(*dists, indexing="ij")
    joint = np.prod(np.stack(grids), axis=0).ravel()
    order = np.argsort(-joint, kind="stable")
    cumulative = np.cumsum(joint[order])
    keep = int(np.searchsorted(cumulative, 1 - mass_cutoff) + 1)
    keep = min(keep, len(order))
    chosen = order[:keep]
    weights = joint[chosen] / joint[chosen].sum()
    shape = [len(d) for d in dists]
    return [(tuple(int(k) for k in np.unravel_index(i, shape)), float(w))
            for i, w in zip(chosen, weights)]


@dataclass(frozen=True)
class Scenario:
    """A z-mode pulse, its spectator modes and the reference numbers it should reproduce.

    ``detuning`` is the laser detuning from the bare carrier (rad/s);
    ``transition`` names the driven line and fixes the sign of the spectator
    light shift; ``initial`` is the starting basis state.
    """

    name: str
    eta_z: float
    omega_z: float
    rabi: float
    detuning: float
    transition: str = "blue"
    initial: str = "g0"
    spectators: tuple = ()
    n_max: int = 1
    phase: float = 0.0
    exact_scaling: bool = False
    reference: dict = field(default_factory=dict)

    @property
    def t_pi(self) -> float:
        if self.transition == "carrier":
            return math.pi / self.rabi
        return math.pi / (self.eta_z * self.rabi)

    def with_spectators(self, modes) -> "Scenario":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values["spectators"] = tuple(modes)
        return Scenario(**values)


class ThermalEnsemble:
    """Weighted set of z-mode pulses, one per joint spectator occupation.

    The Hamiltonians are diagonalised as one stacked batch and traces are
    accumulated over fixed-size chunks in a fixed order.
    """

    chunk = 512

    def __init__(self, scenario: Scenario, spectator_modes=None,
                 mass_cutoff: float = DEFAULT_CUTOFF):
        modes = tuple(scenario.spectators if spectator_modes is None else spectator_modes)
        self.scenario = scenario
        self.modes = modes
        self.basis = SystemBasis(scenario.n_max)
        sign = {"blue": -1.0, "red": 1.0, "carrier": 0.0}[scenario.transition]
        nominal = abs(resonance_detuning(scenario.transition, scenario.omega_z))
        occupations = joint_occupations(modes, mass_cutoff)
        self.occupations = [occ for occ, _ in occupations]
        self.weights = np.array([w for _, w in occupations])
        rabis, detunings = [], []
        for occ in self.occupations:
            factor = 1.0
            shift = 0.0
            for n, mode in zip(occ, modes):
                factor *= rabi_factor(n, mode.eta, scenario.exact_scaling)
                if sign:
                    shift += spectator_light_shift(n, mode.eta, scenario.rabi,
                                                   mode.omega - nominal, scenario.omega_z)
            rabis.append(scenario.rabi * factor)
            detunings.append(scenario.detuning + sign * shift)
        self.rabis = np.array(rabis)
        self.detunings = np.array(detunings)
        self._eigen = np.linalg.eigh(self._stack())
        self._psi0 = self.basis.state(scenario.initial)

    def _stack(self) -> np.ndarray:
        sc = self.scenario
        d = self.basis.levels
        ladder = np.arange(d) * sc.omega_z
        half = self.detunings[:, None] / 2
        diag = np.concatenate([ladder + half, ladder - half], axis=1)
        h = np.zeros((len(self.weights), 2 * d, 2 * d), dtype=complex)
        idx = np.arange(2 * d)
        h[:, idx, idx] = diag
        block = 0.5 * np.exp(1j * sc.phase) * coupling_matrix(sc.n_max, sc.eta_z).elements
        h[:, :d, d:] = self.rabis[:, None, None] * block
        h[:, d:, :d] = np.conj(np.swapaxes(h[:, :d, d:], 1, 2))
        return h

    def hamiltonian(self, k: int) -> RotatingHamiltonian:
        """Single-occupation Hamiltonian, for inspection."""
        pulse = PulseSpec(self.rabis[k], self.detunings[k], self.scenario.phase)
        return build_hamiltonian(self.scenario.eta_z, self.scenario.omega_z, pulse, self.basis)

    def __len__(self):
        return len(self.weights)

    def trace(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
            raise ValidationError("times must be sorted and non-negative")
        w, v = self._eigen
        c0 = np.einsum("kji,j->ki", v.conj(), self._psi0)
        total = np.zeros((len(times), self.basis.dimension))
        for start in range(0, len(self.weights), self.chunk):
            sl = slice(start, start + self.chunk)
            phases = np.exp(-1j * w[sl, None, :] * times[None, :, None]) * c0[sl, None, :]
            amps = np.einsum("kij,ktj->kti", v[sl], phases)
            total += np.einsum("k,kti->ti", self.weights[sl], np.abs(amps) ** 2)
        return total / total.sum(axis=1, keepdims=True)

    def excited(self, times) -> np.ndarray:
        return excited_population(self.trace(times), self.basis)

    def contrast(self, order: str = "pi") -> float:
        return window_contrast(self.excited, self.scenario.t_pi, order)


def thermal_average_trace(scenario: Scenario, spectator_modes=None, times=None,
                          mass_cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Thermally averaged basis-state probabilities, shape ``(len(times), dimension)``."""
    if times is None:
        times = default_times(scenario)
    return ThermalEnsemble(scenario, spectator_modes, mass_cutoff).trace(times)


def default_times(scenario: Scenario, cycles: float = 3.0, points: int = 601) -> np.ndarray:
    return np.linspace(0.0, cycles * scenario.t_pi, points)


def summarize(scenario: Scenario, mass_cutoff: float = DEFAULT_CUTOFF) -> dict:
    """Contrast at the pi and 2 pi times plus an echo of the scenario parameters."""
    ens = ThermalEnsemble(scenario, mass_cutoff=mass_cutoff)
    out = {
        "scenario": scenario.name,
        "transition": scenario.transition,
        "rabi_khz": const.angular_to_khz(scenario.rabi),
        "omega_z_khz": const.angular_to_khz(scenario.omega_z),
        "eta_z": scenario.eta_z,
        "detuning_offset_khz": const.angular_to_khz(
            scenario.detuning - resonance_detuning(scenario.transition, scenario.omega_z)),
        "t_pi_us": scenario.t_pi * 1e6,
        "occupations": len(ens),
        "contrast_pi": ens.contrast("pi"),
        "contrast_2pi": ens.contrast("2pi"),
    }
    for i, mode in enumerate(scenario.spectators):
        tag = mode.name or f"mode{i}"
        out[f"{tag}_n_bar"] = mode.n_bar
        out[f"{tag}_eta"] = mode.eta
        out[f"{tag}_khz"] = const.angular_to_khz(mode.omega)
    for key, value in scenario.reference.items():
        out[f"reference_{key}"] = value
    return out


# Experimental parameters of the 40Ca+ quadrupole-transition study
_K = const.khz_to_angular
FIT_RABI = _K(1090.0)
FIT_ETA_Z = 0.045
FIT_OMEGA_Z = _K(1850.0)
X_MODE = ThermalMode(0.04, _K(4000.0), 12.0, "x")
Y_MODE = ThermalMode(0.01, _K(1925.0), 25.0, "y")

PRESETS = ("fig1a", "fig1b", "fig3", "fig4")


def preset(name: str) -> Scenario:
    """Named reproduction scenarios.

    fig1a  carrier Rabi flopping, x-mode thermal with n_bar = 12
    fig1b  low-power blue sideband on the light-shifted resonance, x and y modes thermal
    fig3   high-power blue sideband 375 kHz below the bare sideband, y-mode n_bar = 25
    fig4   the same pulse with all modes cold and the detuning tuned for maximum contrast
    """
    if name == "fig1a":
        return Scenario(name, FIT_ETA_Z, FIT_OMEGA_Z, FIT_RABI, 0.0, "carrier", "g0",
                        (X_MODE,), reference={"contrast_pi_min": 0.95, "contrast_2pi_min": 0.95})
    if name == "fig1b":
        rabi = _K(7.4) / FIT_ETA_Z
        detuning = FIT_OMEGA_Z - light_shift_analytic(FIT_ETA_Z, FIT_OMEGA_Z, rabi)
        return Scenario(name, FIT_ETA_Z, FIT_OMEGA_Z, rabi, detuning, "blue", "g0",
                        (X_MODE, Y_MODE), reference={"contrast_pi": 0.95, "contrast_2pi": 0.85})
    if name == "fig3":
        return Scenario(name, FIT_ETA_Z, FIT_OMEGA_Z, FIT_RABI, FIT_OMEGA_Z - _K(375.0), "blue",
                        "g0", (Y_MODE,), reference={"contrast_pi": 0.75})
    if name == "fig4":
        pulse, _ = optimize_pulse(
            "swap", FIT_ETA_Z, FIT_RABI, FIT_OMEGA_Z, ("detuning",),
            {"detuning": (FIT_OMEGA_Z - _K(450.0), FIT_OMEGA_Z - _K(250.0))},
            objective="contrast", sideband="blue", n_max=1,
        )
        return Scenario(name, FIT_ETA_Z, FIT_OMEGA_Z, FIT_RABI, pulse.detuning, "blue", "g0",
                        (), reference={"contrast_pi": 0.92, "detuning_offset_khz": -355.0})
    raise ValidationError(f"unknown scenario {name!r}; expected one of {list(PRESETS)}")

"""
Two-level ion coupled to one vibrational mode: rotating-frame Hamiltonian,
exact propagators, population traces and light shifts.

Basis ordering is |g,0>..|g,n_max>, |e,0>..|e,n_max>. In the frame rotating
with the laser (hbar = 1, angular frequencies in rad/s)

    H~ = diag(n w_z + d/2 | n w_z - d/2) + (W/2) [[0, C e^{i phi}], [h.c., 0]]

where d is the laser detuning from the bare internal transition and W already
contains the Gaussian factor exp(-eta**2/2). The propagator returned by
:func:`propagate` is expressed in the computational frame,

    P = exp(+i H~0 t) exp(-i H~ t),

with H~0 the diagonal part of H~ (W = 0), so that basis-state amplitudes are
stationary when no light is applied.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh
from scipy.optimize import brentq, minimize_scalar

from gatelab.coupling import MAX_NMAX, coupling_matrix
from gatelab.errors import AmbiguousLabelingError, NumericalError, ValidationError

# (n_g, n_e) of the resonant pair for the named transitions
TRANSITIONS = {"red": (1, 0), "blue": (0, 1), "carrier": (0, 0)}

_LABEL = re.compile(r"^\s*([ge])\s*,?\s*(\d+)\s*$")


@dataclass(frozen=True)
class SystemBasis:
    """Product basis of the internal qubit and a truncated Fock ladder."""

    n_max: int = 3

    def __post_init__(self):
        if not 0 <= self.n_max <= MAX_NMAX:
            raise ValidationError(f"n_max must lie in [0, {MAX_NMAX}]")

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def dimension(self) -> int:
        return 2 * self.levels

    @property
    def labels(self) -> list[str]:
        return [f"g{n}" for n in range(self.levels)] + [f"e{n}" for n in range(self.levels)]

    def index(self, internal, n: int | None = None) -> int:
        """Position of |internal, n>. Accepts ``index('g', 1)`` or ``index('g1')``."""
        if n is None:
            match = _LABEL.match(str(internal))
            if not match:
                raise ValidationError(f"bad basis label {internal!r}; expected e.g. 'g0' or 'e,1'")
            internal, n = match.group(1), int(match.group(2))
        if internal not in ("g", "e"):
            raise ValidationError(f"internal state must be 'g' or 'e', got {internal!r}")
        if not 0 <= n <= self.n_max:
            raise ValidationError(f"Fock index {n} outside 0..{self.n_max}")
        return n if internal == "g" else self.levels + n

    def state(self, spec) -> np.ndarray:
        """State vector from a label, an index, or an amplitude array (normalised)."""
        if isinstance(spec, (str, tuple)):
            idx = self.index(*spec) if isinstance(spec, tuple) else self.index(spec)
            vec = np.zeros(self.dimension, dtype=complex)
            vec[idx] = 1.0
            return vec
        if isinstance(spec, (int, np.integer)):
            if not 0 <= spec < self.dimension:
                raise ValidationError(f"basis index {spec} out of range")
            vec = np.zeros(self.dimension, dtype=complex)
            vec[spec] = 1.0
            return vec
        vec = np.asarray(spec, dtype=complex)
        if vec.shape != (self.dimension,):
            raise ValidationError(f"state must have length {self.dimension}")
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValidationError("zero state vector")
        return vec / norm

    @property
    def computational(self) -> list[int]:
        """Indices of |g,0>, |g,1>, |e,0>, |e,1>."""
        if self.n_max < 1:
            raise ValidationError("computational subspace needs n_max >= 1")
        return [self.index("g", 0), self.index("g", 1), self.index("e", 0), self.index("e", 1)]


@dataclass(frozen=True)
class PulseSpec:
    """Square laser pulse.

    Parameters
    ----------
    rabi : float
        Carrier Rabi frequency in rad/s, Gaussian factor included.
    detuning : float
        Laser detuning from the bare internal transition, rad/s.
    phase : float
        Laser phase in radians.
    duration : float
        Pulse length in seconds.
    """

    rabi: float
    detuning: float = 0.0
    phase: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if not self.rabi >= 0:
            raise ValidationError("rabi frequency must be non-negative")
        if not self.duration >= 0:
            raise ValidationError("duration must be non-negative")
        for name in ("rabi", "detuning", "phase", "duration"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")

    def replace(self, **changes) -> "PulseSpec":
        values = dict(rabi=self.rabi, detuning=self.detuning, phase=self.phase,
                      duration=self.duration)
        values.update(changes)
        return PulseSpec(**values)


@dataclass(frozen=True, eq=False)
class RotatingHamiltonian:
    """Time-independent rotating-frame Hamiltonian and its diagonal reference."""

    matrix: np.ndarray
    reference: np.ndarray  # diagonal of H~0
    basis: SystemBasis = field(default_factory=SystemBasis)

    def __post_init__(self):
        dim = self.basis.dimension
        if self.matrix.shape != (dim, dim) or self.reference.shape != (dim,):
            raise ValidationError("Hamiltonian shape does not match basis")
        if not np.all(np.isfinite(self.matrix)):
            raise NumericalError("Hamiltonian contains non-finite entries")
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > 1e-12 * scale:
            raise NumericalError("Hamiltonian is not Hermitian")
        self.matrix.setflags(write=False)
        self.reference.setflags(write=False)

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        try:
            w, v = eigh(self.matrix)
        except (LinAlgError, ValueError) as exc:
            raise NumericalError(
                f"eigendecomposition failed ({exc}); "
                f"|H|_max = {np.max(np.abs(self.matrix)):.3e}, "
                f"cond = {np.linalg.cond(self.matrix):.3e}"
            ) from exc
        return w, v


@dataclass(frozen=True, eq=False)
class Propagator:
    """Computational-frame propagator for a pulse of the given duration."""

    matrix: np.ndarray
    duration: float

    def __post_init__(self):
        dim = self.matrix.shape[0]
        err = np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(dim)))
        if err > 1e-10:
            raise NumericalError(f"propagator not unitary: |P^dag P - 1|_max = {err:.2e}")
        self.matrix.setflags(write=False)


def build_hamiltonian(eta_z: float, omega_z: float, pulse: PulseSpec,
                      basis: SystemBasis | None = None) -> RotatingHamiltonian:
    """Rotating-frame Hamiltonian for a square pulse on the axial mode."""
    basis = basis or SystemBasis()
    if omega_z <= 0:
        raise ValidationError("omega_z must be positive")
    d = basis.levels
    ladder = np.arange(d) * omega_z
    reference = np.concatenate([ladder + pulse.detuning / 2, ladder - pulse.detuning / 2])
    h = np.diag(reference).astype(complex)
    block = 0.5 * pulse.rabi * np.exp(1j * pulse.phase) * coupling_matrix(basis.n_max, eta_z).elements
    h[:d, d:] = block
    h[d:, :d] = block.conj().T
    return RotatingHamiltonian(h, reference, basis)


def _evolution(hamiltonian: RotatingHamiltonian, t: float) -> np.ndarray:
    w, v = hamiltonian.eigensystem
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return np.exp(1j * hamiltonian.reference * t)[:, None] * u


def propagate(hamiltonian: RotatingHamiltonian, t: float) -> Propagator:
    """P = exp(i H~0 t) exp(-i H~ t) via the Hermitian eigendecomposition of H~."""
    if not t >= 0:
        raise ValidationError("time must be non-negative")
    return Propagator(_evolution(hamiltonian, t), t)


def population_trace(initial, hamiltonian: RotatingHamiltonian,
                     times: Sequence[float]) -> np.ndarray:
    """Basis-state probabilities at each time, shape ``(len(times), dimension)``.

    ``initial`` is a basis label (``'g0'``), an index, or an amplitude vector.
    Populations are frame independent, so the rotating-frame state is used.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValidationError("times must be one-dimensional")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValidationError("times must be sorted and non-negative")
    psi0 = hamiltonian.basis.state(initial)
    w, v = hamiltonian.eigensystem
    c0 = v.conj().T @ psi0
    amplitudes = (np.exp(-1j * np.outer(times, w)) * c0) @ v.T
    probs = np.abs(amplitudes) ** 2
    return probs / probs.sum(axis=1, keepdims=True)


def excited_population(probs: np.ndarray, basis: SystemBasis) -> np.ndarray:
    return probs[..., basis.levels:].sum(axis=-1)


def window_contrast(excited, t_pi: float, order: str = "pi", grid: int = 401) -> float:
    """Contrast of an internal-state oscillation given ``excited(times) -> P_e``.

    ``order='pi'`` returns the largest change of P_e relative to t = 0 for
    t in [0.5, 1.5] t_pi. ``order='2pi'`` returns that peak minus the closest
    return towards the initial value in [1.5, 2.5] t_pi. Grid extrema are
    polished with a bounded scalar search.
    """
    if t_pi <= 0:
        raise ValidationError("t_pi must be positive")
    if order not in ("pi", "2pi"):
        raise ValidationError("order must be 'pi' or '2pi'")
    p0 = float(excited(np.array([0.0]))[0])

    def extreme(f, lo, hi):
        ts = np.linspace(lo, hi, grid)
        vals = f(np.asarray(excited(ts)))
        i = int(np.argmax(vals))
        a, b = ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)]
        res = minimize_scalar(lambda t: -f(excited(np.array([t])))[0], bounds=(a, b),
                              method="bounded", options={"xatol": 1e-6 * t_pi})
        return max(float(vals[i]), float(-res.fun))

    peak = extreme(lambda p: np.abs(p - p0), 0.5 * t_pi, 1.5 * t_pi)
    if order == "pi":
        return peak
    back = extreme(lambda p: -np.abs(p - p0), 1.5 * t_pi, 2.5 * t_pi)
    return peak + back


def rabi_contrast(hamiltonian: RotatingHamiltonian, initial, t_pi: float,
                  order: str = "pi", grid: int = 401) -> float:
    """Internal-state contrast of the Rabi oscillation started from ``initial``."""
    basis = hamiltonian.basis

    def excited(ts):
        return excited_population(population_trace(initial, hamiltonian, ts), basis)

    return window_contrast(excited, t_pi, order, grid)


def light_shift_analytic(eta: float, omega_z: float, Omega: float) -> float:
    """Perturbative shift of the first sidebands from off-resonant carrier coupling."""
    if Omega < 0:
        raise ValidationError("Omega must be non-negative")
    x = Omega / omega_z
    return (0.5 * (1 + eta**2 / 2) * x**2 + x**4 / 8) * omega_z


def resonance_detuning(transition, omega_z: float) -> float:
    """Bare laser detuning that makes the (n_g, n_e) pair degenerate."""
    n_g, n_e = _pair(transition)
    return (n_e - n_g) * omega_z


def _pair(transition) -> tuple[int, int]:
    if isinstance(transition, str):
        try:
            return TRANSITIONS[transition]
        except KeyError:
            raise ValidationError(
                f"unknown transition {transition!r}; expected one of {sorted(TRANSITIONS)}"
            ) from None
    n_g, n_e = transition
    return int(n_g), int(n_e)


def _tracked_pair(eta, omega_z, Omega, detuning, idx, basis):
    """Follow the two levels that start on ``idx`` at zero power up to ``Omega``."""
    steps = max(1, math.ceil(Omega / (0.05 * omega_z)))
    dim = basis.dimension
    subspace = np.zeros((dim, 2), dtype=complex)
    subspace[idx[0], 0] = subspace[idx[1], 1] = 1.0
    for k in range(1, steps + 1):
        pulse = PulseSpec(Omega * k / steps, detuning)
        w, v = build_hamiltonian(eta, omega_z, pulse, basis).eigensystem
        weight = np.sum(np.abs(subspace.conj().T @ v) ** 2, axis=0)
        chosen = np.sort(np.argsort(weight)[-2:])
        if weight[chosen].min() < 0.5:
            raise AmbiguousLabelingError(
                f"level tracking lost the pair at Omega = {Omega * k / steps:.4g} rad/s "
                f"(overlap {weight[chosen].min():.3f})"
            )
        subspace = v[:, chosen]
    return w[chosen], subspace


def light_shift_numeric(eta: float, omega_z: float, Omega: float, target="red",
                        n_max: int = 3) -> float:
    """Light-shifted resonance of a transition from the dressed spectrum.

    The two levels of the target pair are tracked from zero power by adiabatic
    continuation in Omega. The resonance is the laser detuning at which the
    tracked pair is an equal mixture of its two bare states, the centre of
    the avoided crossing. Returned as the offset of that detuning from the
    bare resonance (rad/s), so the red sideband shifts up and the blue down.

    Parameters
    ----------
    target : {'red', 'blue', 'carrier'} or (n_g, n_e)
        Transition |g,n_g> <-> |e,n_e>.
    """
    if Omega < 0:
        raise ValidationError("Omega must be non-negative")
    if Omega >= 2 * omega_z:
        raise ValidationError("level identification is unreliable for Omega >= 2 omega_z")
    n_g, n_e = _pair(target)
    basis = SystemBasis(n_max)
    idx = (basis.index("g", n_g), basis.index("e", n_e))
    if Omega == 0:
        return 0.0
    bare = resonance_detuning((n_g, n_e), omega_z)

    def imbalance(offset):
        w, vecs = _tracked_pair(eta, omega_z, Omega, bare + offset, idx, basis)
        upper = vecs[:, int(np.argmax(w))]
        return abs(upper[idx[0]]) ** 2 - abs(upper[idx[1]]) ** 2

    if n_g == n_e:
        estimate = 0.0
    else:
        estimate = math.copysign(light_shift_analytic(eta, omega_z, Omega), n_g - n_e)
    scale = max(abs(estimate), (eta * Omega) ** 2 / omega_z, 1e-9 * omega_z)
    offsets = estimate + scale * np.linspace(-2, 2, 17)
    values = [imbalance(o) for o in offsets]
    centre = int(np.argmin(np.abs(offsets - estimate)))
    brackets = [i for i in range(len(offsets) - 1)
                if np.sign(values[i]) != np.sign(values[i + 1])]
    if not brackets:
        raise NumericalError("could not bracket the light-shifted resonance")
    i = min(brackets, key=lambda j: abs(j + 0.5 - centre))
    return float(brentq(imbalance, offsets[i], offsets[i + 1],
                        xtol=1e-13 * omega_z, rtol=1e-13))

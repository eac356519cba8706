import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIG3, KHZ
from gatelab.dynamics import (
    PulseSpec,
    RotatingHamiltonian,
    SystemBasis,
    build_hamiltonian,
    excited_population,
    light_shift_analytic,
    light_shift_numeric,
    population_trace,
    propagate,
    rabi_contrast,
    resonance_detuning,
    window_contrast,
)
from gatelab.errors import AmbiguousLabelingError, NumericalError, ValidationError

OMEGA_Z = 2 * math.pi * 1.85e6


def test_basis_labels_and_indices():
    basis = SystemBasis(3)
    assert basis.dimension == 8
    assert basis.labels == ["g0", "g1", "g2", "g3", "e0", "e1", "e2", "e3"]
    assert [basis.index(lab) for lab in basis.labels] == list(range(8))
    assert basis.index("e,1") == basis.index("e", 1) == 5
    assert basis.computational == [0, 1, 4, 5]
    with pytest.raises(ValidationError):
        basis.index("g4")
    with pytest.raises(ValidationError):
        basis.index("x0")
    with pytest.raises(ValidationError):
        SystemBasis(0).computational


def test_state_normalises():
    basis = SystemBasis(1)
    v = basis.state([1, 1j, 0, 0])
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert basis.state(("e", 0))[2] == 1
    with pytest.raises(ValidationError):
        basis.state([0, 0, 0, 0])


def test_pulse_validation():
    with pytest.raises(ValidationError):
        PulseSpec(-1.0)
    with pytest.raises(ValidationError):
        PulseSpec(1.0, duration=-1.0)
    with pytest.raises(ValidationError):
        PulseSpec(float("nan"))
    assert PulseSpec(1.0).replace(duration=2.0).duration == 2.0


def test_non_hermitian_rejected():
    m = np.zeros((8, 8), dtype=complex)
    m[0, 1] = 1.0
    with pytest.raises(NumericalError):
        RotatingHamiltonian(m, np.zeros(8))


pulses = st.builds(
    PulseSpec,
    rabi=st.floats(0, 2 * OMEGA_Z),
    detuning=st.floats(-2 * OMEGA_Z, 2 * OMEGA_Z),
    phase=st.floats(-math.pi, math.pi),
)


@settings(max_examples=40, deadline=None)
@given(pulse=pulses, eta=st.floats(0, 0.8), t=st.floats(0, 2e-4), n_max=st.integers(1, 7))
def test_hermitian_and_unitary(pulse, eta, t, n_max):
    h = build_hamiltonian(eta, OMEGA_Z, pulse, SystemBasis(n_max))
    assert np.max(np.abs(h.matrix - h.matrix.conj().T)) <= 1e-12 * OMEGA_Z
    p = propagate(h, t).matrix
    assert np.max(np.abs(p.conj().T @ p - np.eye(p.shape[0]))) < 1e-10


def test_zero_time_is_identity():
    h = build_hamiltonian(0.045, OMEGA_Z, PulseSpec(1e6, 3e5))
    assert np.allclose(propagate(h, 0.0).matrix, np.eye(8), atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(detuning=st.floats(-2 * OMEGA_Z, 2 * OMEGA_Z), t=st.floats(0, 1e-3),
       amps=st.lists(st.complex_numbers(max_magnitude=1), min_size=8, max_size=8))
def test_frame_is_static_without_light(detuning, t, amps):
    vec = np.array(amps)
    if np.linalg.norm(vec) < 1e-3:
        vec = np.ones(8)
    h = build_hamiltonian(0.1, OMEGA_Z, PulseSpec(0.0, detuning))
    assert np.allclose(propagate(h, t).matrix, np.eye(8), atol=1e-9)
    trace = population_trace(vec, h, [0.0, t])
    assert np.allclose(trace[0], trace[1], atol=1e-12)
    # eigenvalues at zero power are the diagonal reference
    assert np.allclose(np.sort(h.eigensystem[0]), np.sort(h.reference), atol=1e-6)


def test_carrier_flip_without_recoil():
    rabi = 2 * math.pi * 1e5
    h = build_hamiltonian(0.0, OMEGA_Z, PulseSpec(rabi))
    p = propagate(h, math.pi / rabi).matrix
    basis = h.basis
    for n in range(4):
        assert abs(p[basis.index("e", n), basis.index("g", n)]) == pytest.approx(1.0, abs=1e-12)


def test_carrier_flopping_is_sinusoidal():
    rabi = 2 * math.pi * 1e5
    h = build_hamiltonian(0.0, OMEGA_Z, PulseSpec(rabi))
    ts = np.linspace(0, 4 * math.pi / rabi, 50)
    pe = excited_population(population_trace("g0", h, ts), h.basis)
    assert np.allclose(pe, np.sin(rabi * ts / 2) ** 2, atol=1e-12)


def test_red_sideband_swap_at_low_power():
    eta, rabi = 0.045, 164 * KHZ
    shift = light_shift_numeric(eta, OMEGA_Z, rabi, "red")
    h = build_hamiltonian(eta, OMEGA_Z, PulseSpec(rabi, -OMEGA_Z + shift))
    p = propagate(h, math.pi / (eta * rabi)).matrix
    basis = h.basis
    assert abs(p[basis.index("e0"), basis.index("g1")]) ** 2 >= 0.99


def test_trace_normalised_and_validated():
    h = build_hamiltonian(FIG3["eta"], FIG3["omega_z"],
                          PulseSpec(FIG3["rabi"], FIG3["omega_z"] - 375 * KHZ))
    ts = np.linspace(0, 30e-6, 400)
    probs = population_trace("g0", h, ts)
    assert np.max(np.abs(probs.sum(axis=1) - 1)) < 1e-9
    with pytest.raises(ValidationError):
        population_trace("g0", h, [1e-6, 0.0])
    with pytest.raises(ValidationError):
        population_trace("g0", h, [-1e-6])


def test_fast_oscillation_near_trap_frequency():
    h = build_hamiltonian(FIG3["eta"], FIG3["omega_z"],
                          PulseSpec(FIG3["rabi"], FIG3["omega_z"] - 375 * KHZ))
    ts = np.linspace(0, 40e-6, 8192, endpoint=False)
    pe = excited_population(population_trace("g0", h, ts), h.basis)
    spectrum = np.abs(np.fft.rfft(pe - pe.mean()))
    freqs = np.fft.rfftfreq(len(ts), ts[1] - ts[0])
    band = freqs > 1e6
    peak = freqs[band][np.argmax(spectrum[band])]
    assert 1.5e6 < peak < 2.6e6


def test_analytic_light_shift_values():
    assert light_shift_analytic(0.045, OMEGA_Z, 0.0) == 0.0
    assert light_shift_analytic(0.0, 1.0, 0.1) == pytest.approx(0.0050125, rel=1e-12)
    fig3 = light_shift_analytic(FIG3["eta"], FIG3["omega_z"], FIG3["rabi"])
    assert fig3 / KHZ == pytest.approx(349.3, abs=0.5)


@pytest.mark.parametrize("x", [0.05, 0.1, 0.2, 0.3])
def test_numeric_light_shift_matches_expansion(x):
    omega = x * OMEGA_Z
    num = light_shift_numeric(0.045, OMEGA_Z, omega, "red")
    assert num == pytest.approx(light_shift_analytic(0.045, OMEGA_Z, omega), rel=0.02)
    blue = light_shift_numeric(0.045, OMEGA_Z, omega, "blue")
    assert blue == pytest.approx(-num, rel=1e-6)


def test_numeric_light_shift_limits():
    assert light_shift_numeric(0.045, OMEGA_Z, 0.0) == 0.0
    with pytest.raises(ValidationError):
        light_shift_numeric(0.045, OMEGA_Z, 2 * OMEGA_Z)


def test_carrier_light_shift_is_small():
    eta, omega = 0.045, 0.3 * OMEGA_Z
    shift = light_shift_numeric(eta, OMEGA_Z, omega, "carrier")
    # symmetric g/e dressing leaves the carrier centred
    assert abs(shift) <= (eta * omega) ** 2 / OMEGA_Z


def test_ambiguous_labeling_raises(monkeypatch):
    import gatelab.dynamics as dyn

    real = dyn.build_hamiltonian

    def scrambled(*args, **kwargs):
        h = real(*args, **kwargs)
        w, v = h.eigensystem
        rot = np.roll(np.eye(len(w)), 1, axis=0)
        object.__setattr__(h, "eigensystem", (w, (v @ rot + v) / math.sqrt(2)))
        return h

    monkeypatch.setattr(dyn, "build_hamiltonian", scrambled)
    with pytest.raises(AmbiguousLabelingError):
        light_shift_numeric(0.045, OMEGA_Z, 0.2 * OMEGA_Z)


def test_resonances():
    assert resonance_detuning("red", 2.0) == -2.0
    assert resonance_detuning("blue", 2.0) == 2.0
    assert resonance_detuning("carrier", 2.0) == 0.0
    with pytest.raises(ValidationError):
        resonance_detuning("green", 2.0)


def test_window_contrast():
    rabi = 1.0
    excited = lambda ts: np.sin(rabi * np.asarray(ts) / 2) ** 2 * 0.9
    assert window_contrast(excited, math.pi, "pi") == pytest.approx(0.9, abs=1e-9)
    assert window_contrast(excited, math.pi, "2pi") == pytest.approx(0.9, abs=1e-9)
    with pytest.raises(ValidationError):
        window_contrast(excited, math.pi, "3pi")


def test_rabi_contrast_carrier():
    h = build_hamiltonian(0.0, OMEGA_Z, PulseSpec(2 * math.pi * 1e5))
    assert rabi_contrast(h, "g0", 5e-6) == pytest.approx(1.0, abs=1e-9)

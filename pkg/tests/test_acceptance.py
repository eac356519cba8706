"""One check per headline requirement; each prints a PASS/FAIL line."""

import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import FIG3, KHZ
from gatelab.coupling import coupling_element, coupling_matrix, coupling_oracle
from gatelab.dynamics import (
    PulseSpec,
    SystemBasis,
    build_hamiltonian,
    light_shift_analytic,
    light_shift_numeric,
    propagate,
)
from gatelab.gates import (
    GateSpec,
    evaluate_gate,
    fidelity_oracle,
    monroe_pulse,
    optimize_pulse,
    swap_pulse,
)
from gatelab.limits import gate_time_per_ion
from gatelab.species import BUILTIN_SPECIES, recoil_frequency
from gatelab.thermal import ThermalEnsemble, preset, thermal_average_trace

pytestmark = pytest.mark.acceptance

ETA = FIG3["eta"]
OMEGA_Z = FIG3["omega_z"]


def corrected_swap(x, sideband="red", omega_z=OMEGA_Z, **kwargs):
    omega = x * omega_z
    pulse = swap_pulse(ETA, omega, omega_z, True, sideband, "numeric")
    return evaluate_gate("swap", ETA, omega_z, pulse, sideband=sideband, **kwargs)


def eps_corrected_formula(x):
    return x / (math.sqrt(2) * math.sqrt(x**2 + 1))


def test_criterion_1_recoil_table(criterion):
    expected = {"Be9_313": 452.0, "Ca40_397": 63.0, "Ca40_729": 4.7}
    got = {k: recoil_frequency(BUILTIN_SPECIES[k]) / 1e3 for k in expected}
    worst = max(abs(got[k] / v - 1) for k, v in expected.items())
    detail = ", ".join(f"{k} {got[k]:.2f} kHz" for k in expected)
    criterion(1, worst <= 0.01, f"{detail}; worst deviation {worst:.2%} (limit 1%)")


def test_criterion_2_coupling(criterion):
    worst_oracle = 0.0
    for eta in (0.01, 0.045, 0.1, 0.3, 0.6):
        g = math.exp(-eta**2 / 2)
        for n in range(6):
            for m in range(6):
                worst_oracle = max(worst_oracle,
                                   abs(g * coupling_element(n, m, eta) - coupling_oracle(n, m, eta)))
    eta = 0.045
    e2 = eta**2
    golden = {
        (0, 0): 1, (0, 1): 1j * eta, (0, 2): -e2 / math.sqrt(2),
        (0, 3): -1j * eta**3 / math.sqrt(6), (1, 1): 1 - e2,
        (1, 2): 1j * math.sqrt(2) * eta * (1 - e2 / 2),
        (1, 3): -math.sqrt(1.5) * e2 * (1 - e2 / 3), (2, 2): 1 - 2 * e2 + e2**2 / 2,
        (2, 3): 1j * math.sqrt(3) * eta * (1 - e2 + e2**2 / 6),
        (3, 3): 1 - 3 * e2 + 1.5 * e2**2 - e2**3 / 6,
    }
    c = coupling_matrix(3, eta).elements
    worst_golden = max(max(abs(c[n, m] - v), abs(c[m, n] - v)) for (n, m), v in golden.items())
    ok = worst_oracle <= 1e-10 and worst_golden <= 1e-12
    criterion(2, ok, f"oracle |d|max {worst_oracle:.1e} (<=1e-10), "
                     f"golden |d|max {worst_golden:.1e} (<=1e-12)")


def test_criterion_3_light_shift(criterion):
    worst = 0.0
    for x in (0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3):
        num = light_shift_numeric(ETA, OMEGA_Z, x * OMEGA_Z, "red")
        worst = max(worst, abs(num / light_shift_analytic(ETA, OMEGA_Z, x * OMEGA_Z) - 1))
    fig3 = light_shift_analytic(ETA, OMEGA_Z, FIG3["rabi"]) / KHZ
    ok = worst <= 0.02 and 250 < fig3 < 375
    criterion(3, ok, f"numeric/analytic worst {worst:.2%} (limit 2%); "
                     f"high-power analytic {fig3:.1f} kHz in (250, 375)")


def test_criterion_4_corrected_swap(criterion):
    worst = 0.0
    for x in (0.05, 0.1, 0.2, 0.3, 0.4, 0.5):
        eps = corrected_swap(x).epsilon
        worst = max(worst, abs(eps / eps_corrected_formula(x) - 1))
    r = corrected_swap(FIG3["rabi"] / OMEGA_Z)
    ok = worst <= 0.15 and abs(r.epsilon - 0.41) <= 0.04 and abs(r.fidelity - 0.83) <= 0.03
    criterion(4, ok, f"eps vs formula worst {worst:.1%} (limit 15%); high-power eps "
                     f"{r.epsilon:.3f} (0.41+-0.04), fidelity {r.fidelity:.1%} (83+-3)")


def test_criterion_5_low_power(criterion):
    omega = 7.4 * KHZ / ETA
    r = corrected_swap(omega / OMEGA_Z)
    ok = abs(r.epsilon - 0.063) <= 0.01 and r.fidelity >= 0.994
    criterion(5, ok, f"eps {r.epsilon:.4f} (0.063+-0.01), fidelity {r.fidelity:.2%} (>=99.4%)")


def test_criterion_6_detuning_optimum(criterion):
    pulse, report = optimize_pulse(
        "swap", ETA, FIG3["rabi"], OMEGA_Z, ("detuning",),
        {"detuning": (OMEGA_Z - 450 * KHZ, OMEGA_Z - 250 * KHZ)},
        objective="contrast", sideband="blue", n_max=1)
    offset = (pulse.detuning - OMEGA_Z) / KHZ
    ok = abs(offset + 355) <= 10 and abs(report.contrast - 0.92) <= 0.02
    criterion(6, ok, f"optimum {offset:.1f} kHz (-355+-10), contrast {report.contrast:.1%} (92+-2)")


def test_criterion_7_thermal_fits(criterion):
    fig1a = ThermalEnsemble(preset("fig1a"))
    fig3 = ThermalEnsemble(preset("fig3"))
    c1, c1_2pi, c3 = fig1a.contrast("pi"), fig1a.contrast("2pi"), fig3.contrast("pi")
    ok = c1 > 0.95 and c1_2pi > 0.95 and abs(c3 - 0.75) <= 0.05
    criterion(7, ok, f"fig1a contrast pi {c1:.1%} / 2pi {c1_2pi:.1%} (>95%); "
                     f"fig3 pi {c3:.1%} (75+-5)")


def test_criterion_8_monroe(criterion):
    worst = 0.0
    for x in (0.01, 0.05, 0.1):
        pulse, eta = monroe_pulse(2, x * OMEGA_Z)
        eps = evaluate_gate("monroe_cx", eta, OMEGA_Z, pulse).epsilon
        worst = max(worst, abs(eps / (math.sqrt(2) * eta * x) - 1))
    omega = 0.5 * OMEGA_Z
    nominal, eta = monroe_pulse(2, omega)
    eps_nominal = evaluate_gate("monroe_cx", eta, OMEGA_Z, nominal).epsilon
    pulse, report = optimize_pulse(
        "monroe_cx", eta, omega, OMEGA_Z, ("duration",),
        {"duration": (0.9 * nominal.duration, 1.2 * nominal.duration)}, grid_points=13)
    eps_formula = math.sqrt(2) * eta * 0.5
    rate = 1 / pulse.duration
    recoil_hz = eta**2 * OMEGA_Z / (2 * math.pi)
    ratio = max(rate / recoil_hz, recoil_hz / rate)
    usable = report.epsilon < eps_nominal and report.epsilon <= 1.5 * eps_formula
    ok = worst <= 0.2 and usable and ratio <= 1.5
    criterion(8, ok, f"small-power eps vs formula worst {worst:.1%} (limit 20%); at 0.5 w_z "
                     f"eps {eps_nominal:.3f} -> {report.epsilon:.3f} after duration x"
                     f"{pulse.duration / nominal.duration:.4f} (formula {eps_formula:.3f}); "
                     f"rate/recoil {rate / recoil_hz:.3f} (within x1.5)")


def test_criterion_9_table3(criterion):
    expected = {"Be9_313": 1.26, "Ca40_397": 5.6, "Ca40_729": 34.0}
    got = {k: gate_time_per_ion(BUILTIN_SPECIES[k], 0.1) * 1e6 for k in expected}
    worst = max(abs(got[k] / v - 1) for k, v in expected.items())
    detail = ", ".join(f"{k} {got[k]:.3g} us" for k in expected)
    criterion(9, worst <= 0.10, f"{detail}; worst deviation {worst:.1%} (limit 10%)")


def test_criterion_10_properties(criterion, tmp_path):
    rng = np.random.default_rng(1)
    unitarity = 0.0
    for _ in range(50):
        pulse = PulseSpec(rng.uniform(0, 2) * OMEGA_Z, rng.uniform(-2, 2) * OMEGA_Z,
                          rng.uniform(-math.pi, math.pi))
        h = build_hamiltonian(rng.uniform(0, 0.6), OMEGA_Z, pulse, SystemBasis(int(rng.integers(1, 8))))
        p = propagate(h, rng.uniform(0, 1e-4)).matrix
        unitarity = max(unitarity, np.max(np.abs(p.conj().T @ p - np.eye(len(p)))))

    truncation = max(corrected_swap(x, check_truncation=True).truncation_delta
                     for x in (7.4 * KHZ / ETA / OMEGA_Z, 0.1, 0.3, 0.5))

    pulse = swap_pulse(ETA, FIG3["rabi"], OMEGA_Z, True, "red", "numeric")
    report = evaluate_gate("swap", ETA, OMEGA_Z, pulse)
    prop = propagate(build_hamiltonian(ETA, OMEGA_Z, pulse), pulse.duration)
    oracle = fidelity_oracle(prop, GateSpec.swap("red"), report.phase_correction)
    gap = oracle - report.f_min

    normalisation = 0.0
    for name in ("fig1a", "fig3"):
        probs = thermal_average_trace(preset(name))
        normalisation = max(normalisation, np.max(np.abs(probs.sum(axis=1) - 1)))

    cfg = tmp_path / "run.ini"
    cfg.write_text("[scenario]\ngate = swap\nsideband = blue\neta_z = 0.045\n"
                   "mode_z_khz = 1850\nrabi_khz = 1090\ncorrected = true\n")
    outputs = []
    for i in range(2):
        out = tmp_path / f"out{i}.json"
        subprocess.run([sys.executable, "-m", "gatelab", "fidelity", "--config", str(cfg),
                        "--json", "-o", str(out)], check=True)
        outputs.append(out.read_bytes())
    deterministic = outputs[0] == outputs[1]

    ok = (unitarity <= 1e-10 and truncation <= 1e-4 and -1e-12 <= gap <= 5e-3
          and normalisation <= 1e-8 and deterministic)
    criterion(10, ok, f"unitarity {unitarity:.1e} (<=1e-10); truncation 3->7 {truncation:.1e} "
                      f"(<=1e-4); oracle - minimiser {gap:.1e} (in [0, 5e-3]); "
                      f"thermal normalisation {normalisation:.1e} (<=1e-8); "
                      f"byte-identical reruns {deterministic}")

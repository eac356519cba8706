import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gatelab import constants as const
from gatelab.errors import ValidationError
from gatelab.species import (
    BUILTIN_SPECIES,
    IonSpecies,
    LambDickeSet,
    TrapConfig,
    lamb_dicke,
    load_species_registry,
    mode_frequency,
    recoil_frequency,
)

TWO_PI = 2 * math.pi


@pytest.mark.parametrize("name, expected_khz", [
    ("Be9_313", 452.0), ("Ca40_397", 63.0), ("Ca40_729", 4.7),
])
def test_recoil_table(name, expected_khz):
    assert recoil_frequency(BUILTIN_SPECIES[name]) / 1e3 == pytest.approx(expected_khz, rel=0.01)


def test_recoil_perpendicular_beam_is_zero():
    for sp in BUILTIN_SPECIES.values():
        assert recoil_frequency(sp, math.pi / 2) == pytest.approx(0.0, abs=1e-20)


def test_recoil_scalings():
    sp = IonSpecies("X", 40, 500e-9, 1)
    base = recoil_frequency(sp, 0.3)
    assert recoil_frequency(IonSpecies("X", 40, 1000e-9, 1), 0.3) == pytest.approx(base / 4)
    assert recoil_frequency(IonSpecies("X", 40, 500e-9, 2), 0.3) == pytest.approx(4 * base)
    ratio = recoil_frequency(sp, 0.7) / recoil_frequency(sp, 0.2)
    assert ratio == pytest.approx(math.cos(0.7) ** 2 / math.cos(0.2) ** 2)


def test_recoil_rejects_bad_angle():
    with pytest.raises(ValidationError):
        recoil_frequency(BUILTIN_SPECIES["Ca40_729"], -0.1)


@pytest.mark.parametrize("kwargs", [
    {"mass": 0, "wavelength": 1e-7}, {"mass": 9, "wavelength": -1}, {"mass": 9, "wavelength": 1e-7,
                                                                      "photon_factor": 3},
])
def test_species_invariants(kwargs):
    with pytest.raises(ValidationError):
        IonSpecies("bad", **kwargs)


def test_lamb_dicke_experiment_geometry():
    # beam 50 deg from z, 40 deg from x, perpendicular to y
    trap = TrapConfig((4000e3 * TWO_PI, 1925e3 * TWO_PI, 1850e3 * TWO_PI), 1,
                      (math.radians(40), math.pi / 2, math.radians(50)))
    etas = lamb_dicke(BUILTIN_SPECIES["Ca40_729"], trap)
    assert etas.eta_z == pytest.approx(0.045, rel=0.03)
    assert etas.eta_x == pytest.approx(0.04, rel=0.1)
    assert etas.eta_y == pytest.approx(0.0, abs=1e-12)


def test_lamb_dicke_ion_number_scaling():
    freqs = (TWO_PI * 5e6, TWO_PI * 5e6, TWO_PI * 1e6)
    one = lamb_dicke(BUILTIN_SPECIES["Ca40_729"], TrapConfig(freqs, 1))
    four = lamb_dicke(BUILTIN_SPECIES["Ca40_729"], TrapConfig(freqs, 4))
    assert four.eta_z == pytest.approx(one.eta_z / 2)


@settings(max_examples=50, deadline=None)
@given(
    f_z=st.floats(1e5, 2e7),
    n=st.integers(1, 30),
    angle=st.floats(0.0, math.pi / 2 - 0.05),
    species=st.sampled_from(sorted(BUILTIN_SPECIES)),
)
def test_lamb_dicke_round_trip(f_z, n, angle, species):
    sp = BUILTIN_SPECIES[species]
    trap = TrapConfig((TWO_PI * 3e7, TWO_PI * 3e7, TWO_PI * f_z), n,
                      (math.pi / 2, math.pi / 2, angle))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eta = lamb_dicke(sp, trap).eta_z
    recoil_energy = const.h * recoil_frequency(sp, angle)
    assert eta**2 * const.hbar * TWO_PI * f_z == pytest.approx(recoil_energy / n, rel=1e-12)


def test_lamb_dicke_uses_selected_axial_mode():
    freqs = (TWO_PI * 5e6, TWO_PI * 5e6, TWO_PI * 1e6)
    com = lamb_dicke(BUILTIN_SPECIES["Ca40_729"], TrapConfig(freqs, 2))
    breathing = lamb_dicke(BUILTIN_SPECIES["Ca40_729"], TrapConfig(freqs, 2, mode_choice="breathing"))
    assert breathing.eta_z == pytest.approx(com.eta_z / 3**0.25)


def test_mode_frequency_factors():
    w = TWO_PI * 1e6
    assert mode_frequency(w, "com") == w
    assert mode_frequency(w, "breathing") / TWO_PI == pytest.approx(1.7321e6, rel=1e-4)
    assert mode_frequency(w, "third") / TWO_PI == pytest.approx(2.4083e6, rel=1e-4)
    with pytest.raises(ValidationError):
        mode_frequency(w, "rocking")


def test_trap_direction_cosines_checked():
    with pytest.raises(ValidationError):
        TrapConfig((1.0, 1.0, 1.0), 1, (0.0, 0.0, math.pi / 2))
    TrapConfig((1.0, 1.0, 1.0), 1, (math.pi / 4, math.pi / 2, math.pi / 4))


def test_lamb_dicke_set_invariants():
    with pytest.warns(UserWarning, match="Lamb-Dicke"):
        LambDickeSet(0.1, 0.2, 1.2)
    with pytest.raises(ValidationError):
        LambDickeSet(-0.1, 0.0, 0.0)


def test_species_registry(tmp_path):
    path = tmp_path / "species.ini"
    path.write_text("[Sr88_674]\nmass_u = 88\nwavelength_nm = 674\nphoton_factor = 1\n")
    registry = load_species_registry(path)
    assert set(BUILTIN_SPECIES) <= set(registry)
    assert registry["Sr88_674"].wavelength == pytest.approx(674e-9)

    path.write_text("[Bad]\nmass_u = 88\nwavelength_nm = 674\ncolour = red\n")
    with pytest.raises(ValidationError):
        load_species_registry(path)
    with pytest.raises(ValidationError):
        load_species_registry(tmp_path / "missing.ini")

"""
gatelab
=======

Exact propagators, worst-case gate fidelities, light shifts and speed limits
for laser-driven ion-trap logic gates: sideband swap and controlled-phase
gates, and the magic-Lamb-Dicke carrier controlled-not.

Internal computation uses angular frequencies (rad/s) with hbar = 1; I/O
uses Hz or kHz with explicit unit labels.
"""

from gatelab.errors import (
    AmbiguousLabelingError,
    GatelabError,
    NumericalError,
    OracleUnconverged,
    ValidationError,
)
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
from gatelab.coupling import (
    CouplingMatrix,
    coupling_element,
    coupling_matrix,
    coupling_oracle,
)
from gatelab.dynamics import (
    Propagator,
    PulseSpec,
    RotatingHamiltonian,
    SystemBasis,
    build_hamiltonian,
    light_shift_analytic,
    light_shift_numeric,
    population_trace,
    propagate,
    rabi_contrast,
)
from gatelab.gates import (
    GateKind,
    GateReport,
    GateSpec,
    cz_aux_pulse,
    evaluate_gate,
    fidelity_oracle,
    imprecision,
    monroe_pulse,
    optimize_pulse,
    phase_correction,
    swap_pulse,
)
from gatelab import limits, thermal

__all__ = [
    "AmbiguousLabelingError",
    "BUILTIN_SPECIES",
    "CouplingMatrix",
    "GateKind",
    "GateReport",
    "GateSpec",
    "GatelabError",
    "IonSpecies",
    "LambDickeSet",
    "NumericalError",
    "OracleUnconverged",
    "Propagator",
    "PulseSpec",
    "RotatingHamiltonian",
    "SystemBasis",
    "TrapConfig",
    "ValidationError",
    "build_hamiltonian",
    "coupling_element",
    "coupling_matrix",
    "coupling_oracle",
    "cz_aux_pulse",
    "evaluate_gate",
    "fidelity_oracle",
    "imprecision",
    "lamb_dicke",
    "light_shift_analytic",
    "light_shift_numeric",
    "limits",
    "load_species_registry",
    "mode_frequency",
    "monroe_pulse",
    "optimize_pulse",
    "phase_correction",
    "population_trace",
    "propagate",
    "rabi_contrast",
    "recoil_frequency",
    "swap_pulse",
    "thermal",
]

"""
Lamb-Dicke coupling factors between vibrational Fock states.

The laser couples |n> and |m> with strength

    <n| exp(i eta (a + a^dag)) |m> = exp(-eta**2 / 2) * C_nm(eta),

and the Gaussian prefactor is absorbed into the Rabi frequency. This module
evaluates the polynomial factor C_nm in closed form and provides an
independent brute-force check by exponentiating the truncated position
operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from gatelab.errors import OracleUnconverged, ValidationError

_FACTORIAL = np.array([float(math.factorial(k)) for k in range(171)])

MAX_NMAX = 20


def coupling_element(n: int, m: int, eta: float) -> complex:
    """Polynomial coupling factor C_nm(eta).

    C_nm = sqrt(n! m!) (i eta)^|n-m| sum_j (-1)^j eta^(2j) / (j! (j+|n-m|)! (min(n,m)-j)!)
    """
    if n < 0 or m < 0:
        raise ValidationError("Fock indices must be non-negative")
    if eta < 0:
        raise ValidationError("eta must be non-negative")
    k = abs(n - m)
    lo = min(n, m)
    if k + lo > 170:
        raise ValidationError("Fock index too large for the factorial table")
    j = np.arange(lo + 1)
    terms = (-1.0) ** j * eta ** (2 * j) / (_FACTORIAL[j] * _FACTORIAL[j + k] * _FACTORIAL[lo - j])
    prefactor = math.sqrt(_FACTORIAL[n] * _FACTORIAL[m])
    return complex(prefactor * (1j * eta) ** k * terms.sum())


@dataclass(frozen=True)
class CouplingMatrix:
    eta: float
    n_max: int
    elements: np.ndarray

    def __post_init__(self):
        self.elements.setflags(write=False)


def coupling_matrix(n_max: int, eta: float) -> CouplingMatrix:
    if not 0 <= n_max <= MAX_NMAX:
        raise ValidationError(f"n_max must lie in [0, {MAX_NMAX}]")
    size = n_max + 1
    elements = np.empty((size, size), dtype=complex)
    for n in range(size):
        for m in range(n, size):
            elements[n, m] = elements[m, n] = coupling_element(n, m, eta)
    return CouplingMatrix(eta, n_max, elements)


def _position(truncation):
    offdiag = np.sqrt(np.arange(1, truncation + 1))
    return np.diag(offdiag, 1) + np.diag(offdiag, -1)


def _displacement_element(n, m, eta, truncation):
    return expm(1j * eta * _position(truncation))[n, m]


def coupling_oracle(n: int, m: int, eta: float, oracle_truncation: int = 60) -> complex:
    """<n| exp(i eta (a + a^dag)) |m> from a truncated Fock-space exponential.

    Includes the Gaussian factor, so it equals exp(-eta**2/2) * C_nm.
    Raises OracleUnconverged if enlarging the space by 10 levels moves the
    element by more than 1e-12.
    """
    if oracle_truncation < n + m + 20:
        raise ValidationError("oracle_truncation must be at least n + m + 20")
    value = _displacement_element(n, m, eta, oracle_truncation)
    check = _displacement_element(n, m, eta, oracle_truncation + 10)
    if abs(value - check) > 1e-12:
        raise OracleUnconverged(
            f"<{n}|D|{m}> at eta={eta} changed by {abs(value - check):.2e} "
            f"between truncations {oracle_truncation} and {oracle_truncation + 10}"
        )
    return complex(check)


def displacement_block(eta: float, size: int, oracle_truncation: int = 60) -> np.ndarray:
    """Low-lying ``size`` x ``size`` block of the truncated displacement operator."""
    return expm(1j * eta * _position(oracle_truncation))[:size, :size]


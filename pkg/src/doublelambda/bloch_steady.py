"""Steady state of the four-level atomic coherences.

A weak probe and a weak signal field drive the two optical transitions of a
four-level double-lambda medium while a strong control pair (Omega_c,
Omega_d) links the two ground states.  With the population pinned in the
initial ground state, the three coherences rho31, rho41, rho21 obey a linear
system whose steady state closes the field-propagation equations.

Two routes are provided:

* :func:`steady_coherences` solves the full 3x3 complex linear system
  exactly, for general decay rates ``Gamma31 != Gamma41`` and ground-state
  dephasing ``Gamma21 >= 0``.
* :func:`first_order_coherences` evaluates the weak-field projector formula
  valid when both excited states decay at the same rate and the ground
  coherence is lossless; in that regime the two routes agree to machine
  precision, which the test suite exploits as a cross-check.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, SingularSystem


@dataclass(frozen=True)
class Rates:
    """Relaxation rates, in units of the common excited-state decay rate."""

    gamma31: float = 1.0
    gamma41: float = 1.0
    gamma21: float = 0.0

    def __post_init__(self):
        if not (self.gamma31 > 0 and self.gamma41 > 0):
            raise ValueError("excited-state decay rates must be positive")
        if self.gamma21 < 0:
            raise ValueError("ground-state dephasing rate must be non-negative")


@dataclass(frozen=True)
class DriveFields:
    """Complex Rabi frequencies of the four driving fields."""

    omega_p: complex
    omega_s: complex
    omega_c: complex
    omega_d: complex

    def __post_init__(self):
        for name in ("omega_p", "omega_s", "omega_c", "omega_d"):
            if not cmath.isfinite(complex(getattr(self, name))):
                raise NonFinite(f"{name} is not finite")

    @property
    def rabi(self) -> float:
        """Generalized control Rabi frequency sqrt(|Omega_c|^2 + |Omega_d|^2)."""
        return float(np.hypot(abs(self.omega_c), abs(self.omega_d)))


@dataclass(frozen=True)
class CoherenceSolution:
    """Steady-state coherences at a single point in the medium."""

    rho21: complex
    rho31: complex
    rho41: complex


def projector_matrix(theta: float) -> np.ndarray:
    """Symmetric rank-one projector [[cos^2, -sc], [-sc, sin^2]] of the mixing angle."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c * c, -s * c], [-s * c, s * s]])


def steady_coherences(fields: DriveFields, rates: Rates) -> CoherenceSolution:
    """Solve the steady state of the coherence equations exactly.

    Setting the three time derivatives to zero gives the linear system

        Gamma31 rho31 - i Omega_c rho21 = i Omega_p
        Gamma41 rho41 - i Omega_d rho21 = i Omega_s
        -i Omega_c* rho31 - i Omega_d* rho41 + Gamma21 rho21 = 0

    For ``gamma21 == 0`` the system is solved in closed form by eliminating
    rho31 and rho41 first (well conditioned down to vanishing control
    amplitude); otherwise the generic complex 3x3 solve is used.

    Raises
    ------
    SingularSystem
        If ``gamma21 == 0`` and both controls vanish: rho21 is then
        undetermined because the preparation assumption fails.
    NonFinite
        If the solution overflows.
    """
    op, os_, oc, od = (
        complex(fields.omega_p),
        complex(fields.omega_s),
        complex(fields.omega_c),
        complex(fields.omega_d),
    )
    g31, g41, g21 = rates.gamma31, rates.gamma41, rates.gamma21

    omega_sq = abs(oc) ** 2 + abs(od) ** 2
    if g21 == 0.0 and omega_sq == 0.0:
        raise SingularSystem(
            "gamma21 = 0 with both controls zero leaves rho21 undetermined"
        )

    if g21 == 0.0:
        # Closed-form elimination; reduces to -(Oc* Op + Od* Os)/Omega^2 when
        # gamma31 == gamma41.
        denom = abs(oc) ** 2 / g31 + abs(od) ** 2 / g41
        rho21 = -(oc.conjugate() * op / g31 + od.conjugate() * os_ / g41) / denom
        rho31 = 1j * (op + oc * rho21) / g31
        rho41 = 1j * (os_ + od * rho21) / g41
    else:
        a = np.array(
            [
                [g31, 0.0, -1j * oc],
                [0.0, g41, -1j * od],
                [-1j * oc.conjugate(), -1j * od.conjugate(), g21],
            ],
            dtype=complex,
        )
        b = np.array([1j * op, 1j * os_, 0.0], dtype=complex)
        rho31, rho41, rho21 = np.linalg.solve(a, b)

    sol = CoherenceSolution(rho21=complex(rho21), rho31=complex(rho31), rho41=complex(rho41))
    if not all(cmath.isfinite(r) for r in (sol.rho21, sol.rho31, sol.rho41)):
        raise NonFinite("steady-state solve overflowed")
    return sol


def first_order_coherences(
    omega_p: float, omega_s: float, theta: float, gamma: float = 1.0
) -> tuple[complex, complex]:
    """Weak-field optical coherences (i/Gamma) * P(theta) @ (Omega_p, Omega_s).

    ``P`` is :func:`projector_matrix`.  Valid when both excited states decay
    at the common rate ``gamma`` and the ground coherence is lossless.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not np.all(np.isfinite([omega_p, omega_s, theta])):
        raise NonFinite("non-finite input")
    r31, r41 = (1j / gamma) * projector_matrix(theta) @ (omega_p, omega_s)
    return complex(r31), complex(r41)


def coherence_residuals(
    fields: DriveFields, rates: Rates, sol: CoherenceSolution
) -> tuple[complex, complex, complex]:
    """Residuals of the three steady-state equations for a candidate solution."""
    r1 = 1j * (fields.omega_p + fields.omega_c * sol.rho21) - rates.gamma31 * sol.rho31
    r2 = 1j * (fields.omega_s + fields.omega_d * sol.rho21) - rates.gamma41 * sol.rho41
    r3 = (
        1j * (np.conjugate(fields.omega_c) * sol.rho31 + np.conjugate(fields.omega_d) * sol.rho41)
        - rates.gamma21 * sol.rho21
    )
    return complex(r1), complex(r2), complex(r3)

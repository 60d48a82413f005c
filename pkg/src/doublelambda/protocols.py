"""Mixing-angle profiles for the three spatial control protocols.

The pair of strong control fields is parametrized by a single mixing angle,
``Omega_c = Omega0 sin(theta)``, ``Omega_d = Omega0 cos(theta)``, with the
overall magnitude fixed at ``Omega0``: the reduced propagation depends on
theta only.  A protocol is therefore a profile ``theta(zeta)`` on the
dimensionless interval ``[0, alpha]``, possibly with instantaneous boundary
jumps (which leave the probe/signal fields unchanged).

Protocols provided:

* ``optimal``   -- boundary jump to theta0, linear decrease with the singular
  slope ``u_s = sin(2 theta0)/4``, boundary jump to 0.  ``theta0`` solves the
  transcendental equation ``(alpha/4) sin(2 theta0) = 2 theta0 - pi/2``.
* ``constant``  -- linear decrease from pi/2 to 0 at constant slope
  ``pi/(2 alpha)``, no jumps.
* ``adiabatic`` -- ``theta = arctan(exp(-(zeta - zeta0)/(2 zbar)))``, the
  angle of a smooth sigmoidal control pair with constant total magnitude.
  Its boundary values miss pi/2 and 0 by a recorded defect; no jumps are
  added to hide it.
* ``custom``    -- piecewise-linear interpolation of a (zeta, theta) table.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidAlpha, InvalidZbar, ProfileDomainMismatch

HALF_PI = math.pi / 2

#: Iteration cap for the bisection solve of the optimal entry angle.  The
#: bracket hits the float64 limit (well under the nominal 1e-12 width) long
#: before the cap.
_BISECT_MAX_ITER = 200


@dataclass
class ThetaProfile:
    """Mixing angle as a function of position, including boundary jumps.

    ``interior`` evaluates theta on ``[0, alpha]`` (one-sided limits at the
    ends).  ``theta_pre`` and ``theta_post`` are the angles seen by the
    incoming and outgoing fields; when they differ from the interior limits
    the profile carries an instantaneous jump at that boundary.
    ``knots`` holds an exact piecewise-linear representation when one exists
    (all kinds except ``adiabatic``), which downstream code may exploit for
    closed-form segment propagation.
    """

    kind: str
    alpha: float
    theta_pre: float
    theta_post: float
    interior: Callable[[np.ndarray], np.ndarray]
    interior_slope: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()
    knots: tuple[tuple[float, float], ...] | None = None
    boundary_defect: tuple[float, float] = (0.0, 0.0)
    params: dict = field(default_factory=dict)
    #: Optional one evaluator per breakpoint-delimited segment, for profiles
    #: whose interior is discontinuous: gives exact one-sided angle values at
    #: the segment ends, which ``interior`` alone cannot.
    segment_interiors: tuple[Callable[[np.ndarray], np.ndarray], ...] | None = None

    def theta(self, zeta):
        """Interior mixing angle at ``zeta`` (scalar or array)."""
        self._check_domain(zeta)
        return self.interior(np.asarray(zeta, dtype=float))

    def slope(self, zeta):
        """Interior d(theta)/d(zeta) at ``zeta``."""
        self._check_domain(zeta)
        return self.interior_slope(np.asarray(zeta, dtype=float))

    @property
    def entry_jump(self) -> tuple[float, float]:
        """(theta(0-), theta(0+))."""
        return (self.theta_pre, float(self.interior(np.asarray(0.0))))

    @property
    def exit_jump(self) -> tuple[float, float]:
        """(theta(alpha-), theta(alpha+))."""
        return (float(self.interior(np.asarray(self.alpha))), self.theta_post)

    def _check_domain(self, zeta) -> None:
        z = np.asarray(zeta, dtype=float)
        if np.any(z < -1e-12) or np.any(z > self.alpha + 1e-12):
            raise ProfileDomainMismatch(
                f"zeta outside [0, {self.alpha}] for profile '{self.kind}'"
            )


@dataclass
class ProtocolSpec:
    """Declarative description of a protocol, resolvable to a ThetaProfile."""

    kind: str
    alpha: float
    zeta0: float | None = None
    zbar: float | None = None
    knots: Sequence[tuple[float, float]] | None = None

    def build(self) -> ThetaProfile:
        return build_profile(self)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha > 0) or not math.isfinite(alpha):
        raise InvalidAlpha(f"optical density must be positive, got {alpha}")
    return alpha


def theta0_residual(theta0, alpha):
    """Residual of the optimality condition (alpha/4) sin(2 t) - 2 t + pi/2."""
    return (alpha / 4.0) * np.sin(2.0 * np.asarray(theta0)) - 2.0 * np.asarray(theta0) + HALF_PI


def solve_theta0(alpha: float) -> float:
    """Entry angle of the optimal protocol, from the transcendental equation.

    The residual is positive at pi/4 (value alpha/4) and negative at pi/2
    (value -pi/2) and crosses zero exactly once in between; plain bisection
    therefore converges unconditionally.  The bracket is tightened to the
    float64 limit so the returned root has residual at the rounding floor,
    ~(alpha/2) * eps.
    """
    alpha = _check_alpha(alpha)
    lo, hi = math.pi / 4, HALF_PI
    f_lo = float(theta0_residual(lo, alpha))
    if not (f_lo > 0 and float(theta0_residual(hi, alpha)) < 0):
        raise RuntimeError("root bracket lost; residual signs unexpected")
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket collapsed to adjacent floats
        f_mid = float(theta0_residual(mid, alpha))
        if f_mid > 0:
            lo = mid
        elif f_mid < 0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def singular_slope(theta0: float) -> float:
    """Constant slope of the singular arc, sin(2 theta0)/4."""
    return math.sin(2.0 * theta0) / 4.0


def optimal_protocol(alpha: float) -> ThetaProfile:
    """Jump / linear singular arc / jump profile maximizing the conversion."""
    alpha = _check_alpha(alpha)
    theta0 = solve_theta0(alpha)
    u_s = singular_slope(theta0)
    theta_end = theta0 - u_s * alpha  # equals pi/2 - theta0 by the optimality condition

    def interior(z):
        return theta0 - u_s * z

    def slope(z):
        return np.full_like(np.asarray(z, dtype=float), -u_s)

    return ThetaProfile(
        kind="optimal",
        alpha=alpha,
        theta_pre=HALF_PI,
        theta_post=0.0,
        interior=interior,
        interior_slope=slope,
        knots=((0.0, theta0), (alpha, theta_end)),
        params={"theta0": theta0, "u_s": u_s},
    )


def constant_protocol(alpha: float) -> ThetaProfile:
    """Linear decrease of the angle from pi/2 to 0 with no boundary jumps."""
    alpha = _check_alpha(alpha)
    u = HALF_PI / alpha

    def interior(z):
        return HALF_PI - u * z

    def slope(z):
        return np.full_like(np.asarray(z, dtype=float), -u)

    return ThetaProfile(
        kind="constant",
        alpha=alpha,
        theta_pre=HALF_PI,
        theta_post=0.0,
        interior=interior,
        interior_slope=slope,
        knots=((0.0, HALF_PI), (alpha, 0.0)),
        params={"u": u},
    )


def adiabatic_protocol(alpha: float, zeta0: float, zbar: float) -> ThetaProfile:
    """Smooth sigmoidal control pair, theta = arctan(exp(-(z - zeta0)/(2 zbar))).

    The boundary values ``theta(0) < pi/2`` and ``theta(alpha) > 0`` are only
    approximate; the defect is recorded on the profile rather than clamped
    away.  ``zbar`` of order 1/2 or below violates the adiabaticity condition
    ``|d theta/d zeta| << 1/2`` (the maximum slope is ``1/(4 zbar)``) and
    triggers a warning.
    """
    alpha = _check_alpha(alpha)
    zbar = float(zbar)
    if not (zbar > 0) or not math.isfinite(zbar):
        raise InvalidZbar(f"zbar must be positive, got {zbar}")
    if zbar <= 0.5:
        warnings.warn(
            "zbar <= 1/2 violates the adiabaticity condition |dtheta/dzeta| << 1/2",
            stacklevel=2,
        )
    zeta0 = float(zeta0)

    def interior(z):
        return np.arctan(np.exp(-(np.asarray(z, dtype=float) - zeta0) / (2.0 * zbar)))

    def slope(z):
        s = np.exp(-(np.asarray(z, dtype=float) - zeta0) / (2.0 * zbar))
        return -s / (2.0 * zbar * (1.0 + s * s))

    theta_start = float(interior(0.0))
    theta_end = float(interior(alpha))
    return ThetaProfile(
        kind="adiabatic",
        alpha=alpha,
        theta_pre=theta_start,  # no jumps: the incoming frame is the interior angle
        theta_post=theta_end,
        interior=interior,
        interior_slope=slope,
        boundary_defect=(HALF_PI - theta_start, theta_end),
        params={"zeta0": zeta0, "zbar": zbar},
    )


def tabulated_protocol(
    zeta: Sequence[float],
    theta: Sequence[float],
    alpha: float | None = None,
    kind: str = "custom",
) -> ThetaProfile:
    """Piecewise-linear profile through the given (zeta, theta) samples.

    The table must start at 0 and span the full interval; ``alpha`` defaults
    to the last sample position.  Interior knots become integration
    breakpoints so the fixed-step integrator never straddles a slope change.
    """
    z = np.asarray(zeta, dtype=float)
    t = np.asarray(theta, dtype=float)
    if z.ndim != 1 or z.shape != t.shape or z.size < 2:
        raise ProfileDomainMismatch("profile table needs two columns of equal length >= 2")
    if np.any(np.diff(z) <= 0):
        raise ProfileDomainMismatch("profile positions must be strictly increasing")
    if alpha is None:
        alpha = float(z[-1])
    alpha = _check_alpha(alpha)
    if abs(z[0]) > 1e-9 or abs(z[-1] - alpha) > 1e-9:
        raise ProfileDomainMismatch(
            f"profile table spans [{z[0]}, {z[-1]}], expected [0, {alpha}]"
        )
    if np.any(t < -1e-12) or np.any(t > HALF_PI + 1e-12):
        raise ProfileDomainMismatch("theta samples must lie in [0, pi/2]")

    def interior(x):
        return np.interp(np.asarray(x, dtype=float), z, t)

    slopes = np.diff(t) / np.diff(z)

    def slope(x):
        idx = np.clip(np.searchsorted(z, np.asarray(x, dtype=float), side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]

    return ThetaProfile(
        kind=kind,
        alpha=alpha,
        theta_pre=HALF_PI,
        theta_post=0.0,
        interior=interior,
        interior_slope=slope,
        breakpoints=tuple(float(v) for v in z[1:-1]),
        knots=tuple((float(a), float(b)) for a, b in zip(z, t)),
    )


def load_profile_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column whitespace-separated (zeta, theta) table; '#' comments."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ProfileDomainMismatch(f"expected two columns in {path}, got {data.shape[1]}")
    return data[:, 0], data[:, 1]


def build_profile(spec: ProtocolSpec) -> ThetaProfile:
    """Resolve a ProtocolSpec to a concrete profile."""
    if spec.kind == "optimal":
        return optimal_protocol(spec.alpha)
    if spec.kind == "constant":
        return constant_protocol(spec.alpha)
    if spec.kind == "adiabatic":
        zeta0 = spec.alpha / 2.0 if spec.zeta0 is None else spec.zeta0
        zbar = 5.0 if spec.zbar is None else spec.zbar
        return adiabatic_protocol(spec.alpha, zeta0, zbar)
    if spec.kind == "custom":
        if spec.knots is None:
            raise ProfileDomainMismatch("custom protocol needs a knot table")
        z, t = zip(*spec.knots)
        return tabulated_protocol(z, t, alpha=spec.alpha)
    raise ValueError(f"unknown protocol kind '{spec.kind}'")


def theta_to_controls(profile: ThetaProfile, zeta):
    """Control envelopes (Omega_c, Omega_d) in units of Omega0 at ``zeta``.

    The total control magnitude is held at Omega0, so the envelopes are
    simply (sin(theta), cos(theta)) of the interior angle.
    """
    th = profile.theta(zeta)
    return np.sin(th), np.cos(th)

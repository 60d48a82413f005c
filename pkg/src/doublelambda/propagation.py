"""Spatial propagation of the probe/signal pair through the medium.

Three routes integrate the same physics at different levels of reduction:

* :func:`propagate_reduced` -- the two-field lab-frame system
  ``d(Omega_p, Omega_s)/dzeta = -1/2 P(theta) (Omega_p, Omega_s)`` with
  ``P`` the rank-one projector of the mixing angle.  On resonance the system
  is real and the overall control magnitude drops out.
* :func:`propagate_adiabatic` -- the rotated-frame system
  ``dy/dzeta = -u x``, ``dx/dzeta = u y - x/2`` where ``u = -dtheta/dzeta``;
  boundary jumps of the angle become instantaneous rotations of ``(y, x)``.
* :func:`propagate_exact` -- the field equations closed microscopically
  through the exact steady-state coherence solve, for general decay rates.

All integrators use fixed-step classical fourth-order Runge-Kutta, split at
profile breakpoints so the right-hand side is smooth within every step;
deterministic output is preferred over adaptivity.  For piecewise-linear
angle profiles (constant control slope per segment) the rotated-frame system
has a closed-form matrix exponential, exposed as :func:`segment_step` /
:func:`propagate_piecewise_exact`; this path is exact to rounding and serves
as an independent oracle for the Runge-Kutta routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bloch_steady import DriveFields, Rates, steady_coherences
from .errors import ProfileDomainMismatch
from .protocols import ThetaProfile


@dataclass(frozen=True)
class FieldState:
    """Real probe/signal amplitudes in units of the input amplitude."""

    omega_p: float
    omega_s: float

    @property
    def norm_sq(self) -> float:
        return self.omega_p**2 + self.omega_s**2


@dataclass(frozen=True)
class AdiabaticState:
    """Rotated-frame amplitudes: y rides the lossless mode, x the lossy one."""

    x: float
    y: float

    @property
    def norm_sq(self) -> float:
        return self.x**2 + self.y**2


@dataclass(frozen=True)
class IntegratorOptions:
    """Fixed-step RK4 configuration.

    ``step_count`` overrides the resolution directly; otherwise the step
    count is ``ceil(alpha * steps_per_unit)``.  ``tolerance`` is the relative
    step-halving tolerance used by convergence diagnostics, not by the
    integrator itself.
    """

    step_count: int | None = None
    steps_per_unit: float = 10.0
    scheme: str = "rk4"
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.step_count is not None and self.step_count < 2:
            raise ValueError("step_count must be at least 2")
        if self.steps_per_unit <= 0:
            raise ValueError("steps_per_unit must be positive")
        if self.scheme != "rk4":
            raise ValueError(f"unknown scheme '{self.scheme}'")

    def resolve_steps(self, alpha: float) -> int:
        if self.step_count is not None:
            return self.step_count
        return max(2, math.ceil(alpha * self.steps_per_unit))


DEFAULT_OPTIONS = IntegratorOptions()


@dataclass
class Trajectory:
    """Lab-frame trajectory samples; ``theta`` is the interior mixing angle."""

    zeta: np.ndarray
    omega_p: np.ndarray
    omega_s: np.ndarray
    theta: np.ndarray | None = None

    @property
    def final_state(self) -> FieldState:
        return FieldState(float(np.real(self.omega_p[-1])), float(np.real(self.omega_s[-1])))

    @property
    def norm_sq(self) -> np.ndarray:
        return np.abs(self.omega_p) ** 2 + np.abs(self.omega_s) ** 2

    @property
    def efficiency(self) -> float:
        """Fraction of the input intensity leaving in the signal field."""
        return float(np.abs(self.omega_s[-1]) ** 2)


@dataclass
class AdiabaticTrajectory:
    """Rotated-frame samples between the boundary rotations.

    The sample at ``zeta = 0`` is taken after the entry rotation and the one
    at ``zeta = alpha`` before the exit rotation; ``initial_state`` and
    ``final_state`` hold the states outside the rotations.
    """

    zeta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    initial_state: AdiabaticState
    final_state: AdiabaticState


def to_adiabatic(theta: float, state: FieldState) -> AdiabaticState:
    """Rotate lab-frame fields into the frame of the mixing angle."""
    c, s = math.cos(theta), math.sin(theta)
    return AdiabaticState(
        y=s * state.omega_p + c * state.omega_s,
        x=c * state.omega_p - s * state.omega_s,
    )


def from_adiabatic(theta: float, state: AdiabaticState) -> FieldState:
    """Inverse of :func:`to_adiabatic` (the rotation is an involution)."""
    c, s = math.cos(theta), math.sin(theta)
    return FieldState(
        omega_p=s * state.y + c * state.x,
        omega_s=c * state.y - s * state.x,
    )


@dataclass
class ControlSchedule:
    """Slope control ``u(zeta) = -dtheta/dzeta`` plus boundary rotations."""

    alpha: float
    u: Callable[[np.ndarray], np.ndarray]
    entry_rotation: float = 0.0  # theta(0+) - theta(0-)
    exit_rotation: float = 0.0  # theta(alpha+) - theta(alpha-)
    breakpoints: tuple[float, ...] = ()


def schedule_from_profile(profile: ThetaProfile) -> ControlSchedule:
    """Derive the rotated-frame control schedule of an angle profile."""
    pre, start = profile.entry_jump
    end, post = profile.exit_jump
    return ControlSchedule(
        alpha=profile.alpha,
        u=lambda z: -profile.interior_slope(np.asarray(z, dtype=float)),
        entry_rotation=start - pre,
        exit_rotation=post - end,
        breakpoints=profile.breakpoints,
    )


def adiabatic_initial(profile: ThetaProfile, initial: FieldState) -> AdiabaticState:
    """Rotated-frame image of lab-frame input fields, in the incoming frame.

    The incoming frame is ``theta_pre``: pi/2 for profiles with an entry
    jump (where lab ``(1, 0)`` maps to ``(y, x) = (1, 0)``), the interior
    boundary value for jump-free profiles such as the adiabatic protocol.
    """
    return to_adiabatic(profile.theta_pre, initial)


def _segment_grid(alpha: float, breakpoints: Sequence[float], n_steps: int) -> list[np.ndarray]:
    """Per-segment uniform grids covering [0, alpha], split at breakpoints."""
    cuts = [0.0]
    for b in sorted(set(float(b) for b in breakpoints)):
        if 0.0 < b < alpha:
            cuts.append(b)
    cuts.append(alpha)
    grids = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(1, round(n_steps * (b - a) / alpha))
        grids.append(np.linspace(a, b, n + 1))
    return grids


def _validate_alpha(profile_alpha: float, alpha: float | None) -> float:
    if alpha is None:
        return profile_alpha
    if abs(alpha - profile_alpha) > 1e-9 * max(1.0, profile_alpha):
        raise ProfileDomainMismatch(
            f"profile defined on [0, {profile_alpha}], propagation requested on [0, {alpha}]"
        )
    return profile_alpha


def propagate_reduced(
    profile: ThetaProfile,
    alpha: float | None = None,
    initial: FieldState = FieldState(1.0, 0.0),
    opts: IntegratorOptions = DEFAULT_OPTIONS,
) -> Trajectory:
    """Integrate the reduced lab-frame system along the angle profile.

    Angle jumps (boundary or interior breakpoints) leave the fields
    untouched: the state is carried across each breakpoint unchanged, so the
    trajectory is continuous there by construction.
    """
    alpha = _validate_alpha(profile.alpha, alpha)
    n_steps = opts.resolve_steps(alpha)
    p, s = float(initial.omega_p), float(initial.omega_s)

    zs = [np.array([0.0])]
    ps = [np.array([p])]
    ss = [np.array([s])]
    for k, grid in enumerate(_segment_grid(alpha, profile.breakpoints, n_steps)):
        theta_fn = profile.interior
        if profile.segment_interiors is not None:
            theta_fn = profile.segment_interiors[k]
        half = 0.5 * (grid[:-1] + grid[1:])
        th0 = np.asarray(theta_fn(grid[:-1]), dtype=float)
        thh = np.asarray(theta_fn(half), dtype=float)
        th1 = np.asarray(theta_fn(grid[1:]), dtype=float)
        c0, s0 = np.cos(th0), np.sin(th0)
        cm, sm = np.cos(thh), np.sin(thh)
        c1, s1 = np.cos(th1), np.sin(th1)
        seg_p = np.empty(grid.size - 1)
        seg_s = np.empty(grid.size - 1)
        for i in range(grid.size - 1):
            h = grid[i + 1] - grid[i]
            p, s = _rk4_reduced_step(p, s, h, c0[i], s0[i], cm[i], sm[i], c1[i], s1[i])
            seg_p[i] = p
            seg_s[i] = s
        zs.append(grid[1:])
        ps.append(seg_p)
        ss.append(seg_s)

    zeta = np.concatenate(zs)
    traj = Trajectory(
        zeta=zeta,
        omega_p=np.concatenate(ps),
        omega_s=np.concatenate(ss),
        theta=np.asarray(profile.interior(zeta), dtype=float),
    )
    return traj


def _rk4_reduced_step(p, s, h, c0, s0, cm, sm, c1, s1):
    # dOmega/dzeta = -1/2 P(theta) Omega with P the rank-one projector: the
    # derivative is -(x/2) (cos, -sin) with x the lossy-mode amplitude.
    # (c, s) pairs are cos/sin of theta at the step start, midpoint and end.
    x1 = p * c0 - s * s0
    k1p, k1s = -0.5 * c0 * x1, 0.5 * s0 * x1
    pt, st = p + 0.5 * h * k1p, s + 0.5 * h * k1s
    x2 = pt * cm - st * sm
    k2p, k2s = -0.5 * cm * x2, 0.5 * sm * x2
    pt, st = p + 0.5 * h * k2p, s + 0.5 * h * k2s
    x3 = pt * cm - st * sm
    k3p, k3s = -0.5 * cm * x3, 0.5 * sm * x3
    pt, st = p + h * k3p, s + h * k3s
    x4 = pt * c1 - st * s1
    k4p, k4s = -0.5 * c1 * x4, 0.5 * s1 * x4
    return (
        p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
        s + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
    )


def _rotate(y: float, x: float, delta: float) -> tuple[float, float]:
    """Frame rotation accompanying an angle jump by ``delta``; lab fields fixed."""
    c, s = math.cos(delta), math.sin(delta)
    return c * y + s * x, -s * y + c * x


def propagate_adiabatic(
    schedule: ControlSchedule,
    initial: AdiabaticState = AdiabaticState(x=0.0, y=1.0),
    opts: IntegratorOptions = DEFAULT_OPTIONS,
) -> AdiabaticTrajectory:
    """Integrate the rotated-frame system under a slope-control schedule.

    ``initial`` is the state before the entry rotation; the returned
    ``final_state`` is the state after the exit rotation.  With ``u == 0``
    the ``y`` component is exactly conserved and ``x`` decays at rate 1/2.
    """
    alpha = schedule.alpha
    n_steps = opts.resolve_steps(alpha)
    y, x = _rotate(float(initial.y), float(initial.x), schedule.entry_rotation)

    zs = [np.array([0.0])]
    xs = [np.array([x])]
    ys = [np.array([y])]
    for grid in _segment_grid(alpha, schedule.breakpoints, n_steps):
        half = 0.5 * (grid[:-1] + grid[1:])
        u0 = np.asarray(schedule.u(grid[:-1]), dtype=float)
        uh = np.asarray(schedule.u(half), dtype=float)
        u1 = np.asarray(schedule.u(grid[1:]), dtype=float)
        seg_x = np.empty(grid.size - 1)
        seg_y = np.empty(grid.size - 1)
        for i in range(grid.size - 1):
            h = grid[i + 1] - grid[i]
            y, x = _rk4_adiabatic_step(y, x, h, u0[i], uh[i], u1[i])
            seg_x[i] = x
            seg_y[i] = y
        zs.append(grid[1:])
        xs.append(seg_x)
        ys.append(seg_y)

    y_out, x_out = _rotate(y, x, schedule.exit_rotation)
    return AdiabaticTrajectory(
        zeta=np.concatenate(zs),
        x=np.concatenate(xs),
        y=np.concatenate(ys),
        initial_state=initial,
        final_state=AdiabaticState(x=x_out, y=y_out),
    )


def _rk4_adiabatic_step(y, x, h, u0, uh, u1):
    # dy/dzeta = -u x ; dx/dzeta = u y - x/2
    k1y, k1x = -u0 * x, u0 * y - 0.5 * x
    ya, xa = y + 0.5 * h * k1y, x + 0.5 * h * k1x
    k2y, k2x = -uh * xa, uh * ya - 0.5 * xa
    ya, xa = y + 0.5 * h * k2y, x + 0.5 * h * k2x
    k3y, k3x = -uh * xa, uh * ya - 0.5 * xa
    ya, xa = y + h * k3y, x + h * k3x
    k4y, k4x = -u1 * xa, u1 * ya - 0.5 * xa
    return (
        y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
    )


def propagate_exact(
    controls: Callable[[float], tuple[complex, complex]],
    alpha: float,
    rates: Rates = Rates(),
    initial: FieldState = FieldState(1.0, 0.0),
    opts: IntegratorOptions = DEFAULT_OPTIONS,
    breakpoints: Sequence[float] = (),
) -> Trajectory:
    """Integrate the field equations closed by the exact coherence solve.

    ``controls`` maps ``zeta`` to the complex pair ``(Omega_c, Omega_d)``.
    Each Runge-Kutta stage solves the steady-state coherences at the local
    fields and feeds ``i gamma/2 rho`` back into the field derivatives.
    Under the reduction assumptions (equal decay rates, no dephasing, real
    controls) this reproduces :func:`propagate_reduced` stage for stage.
    """
    if alpha < 0:
        raise ProfileDomainMismatch("alpha must be non-negative")
    n_steps = opts.resolve_steps(alpha)
    g31, g41 = rates.gamma31, rates.gamma41

    def rhs(p, s, oc, od):
        sol = steady_coherences(
            DriveFields(omega_p=p, omega_s=s, omega_c=oc, omega_d=od), rates
        )
        return 0.5j * g31 * sol.rho31, 0.5j * g41 * sol.rho41

    p, s = complex(initial.omega_p), complex(initial.omega_s)
    zs = [np.array([0.0])]
    ps = [np.array([p])]
    ss = [np.array([s])]
    for grid in _segment_grid(alpha, breakpoints, n_steps):
        half = 0.5 * (grid[:-1] + grid[1:])
        ctrl0 = [controls(z) for z in grid[:-1]]
        ctrlh = [controls(z) for z in half]
        ctrl1 = [controls(z) for z in grid[1:]]
        seg_p = np.empty(grid.size - 1, dtype=complex)
        seg_s = np.empty(grid.size - 1, dtype=complex)
        for i in range(grid.size - 1):
            h = grid[i + 1] - grid[i]
            k1p, k1s = rhs(p, s, *ctrl0[i])
            k2p, k2s = rhs(p + 0.5 * h * k1p, s + 0.5 * h * k1s, *ctrlh[i])
            k3p, k3s = rhs(p + 0.5 * h * k2p, s + 0.5 * h * k2s, *ctrlh[i])
            k4p, k4s = rhs(p + h * k3p, s + h * k3s, *ctrl1[i])
            p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            s = s + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
            seg_p[i] = p
            seg_s[i] = s
        zs.append(grid[1:])
        ps.append(seg_p)
        ss.append(seg_s)

    return Trajectory(
        zeta=np.concatenate(zs),
        omega_p=np.concatenate(ps),
        omega_s=np.concatenate(ss),
    )


# ---------------------------------------------------------------------------
# Closed-form propagation for piecewise-linear profiles
# ---------------------------------------------------------------------------

def segment_step(y: float, x: float, u: float, dzeta: float) -> tuple[float, float]:
    """Exact rotated-frame propagation over a constant-slope segment.

    The system matrix ``[[0, -u], [u, -1/2]]`` has the closed-form
    exponential ``exp(-dz/4) [cosh(k dz) I + sinh(k dz)/k B]`` with
    ``B = A + I/4`` and ``k^2 = 1/16 - u^2``; for ``u > 1/4`` the hyperbolic
    pair continues to a trigonometric one, and at ``k = 0`` to its limit.
    """
    k2 = 0.0625 - u * u
    if k2 > 1e-14:
        k = math.sqrt(k2)
        kc = math.cosh(k * dzeta)
        ks = math.sinh(k * dzeta) / k
    elif k2 < -1e-14:
        w = math.sqrt(-k2)
        kc = math.cos(w * dzeta)
        ks = math.sin(w * dzeta) / w
    else:
        kc = 1.0
        ks = dzeta
    e = math.exp(-0.25 * dzeta)
    return (
        e * ((kc + 0.25 * ks) * y - ks * u * x),
        e * (ks * u * y + (kc - 0.25 * ks) * x),
    )


def propagate_piecewise_exact(
    profile: ThetaProfile, initial: FieldState = FieldState(1.0, 0.0)
) -> FieldState:
    """Final lab-frame fields of a piecewise-linear profile, exact to rounding.

    Uses the knot representation of the profile; boundary jumps enter only
    through the frame choice at the two ends, which leaves the lab-frame
    fields unchanged.
    """
    if profile.knots is None:
        raise ProfileDomainMismatch(
            f"profile kind '{profile.kind}' has no piecewise-linear representation"
        )
    knots = profile.knots
    state = to_adiabatic(knots[0][1], initial)
    y, x = state.y, state.x
    for (z0, t0), (z1, t1) in zip(knots[:-1], knots[1:]):
        y, x = segment_step(y, x, (t0 - t1) / (z1 - z0), z1 - z0)
    return from_adiabatic(knots[-1][1], AdiabaticState(x=x, y=y))


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def dissipation_residual(traj: Trajectory) -> np.ndarray:
    """Pointwise residual of d(norm)/dzeta = -(lossy amplitude)^2.

    The derivative of ``Omega_p^2 + Omega_s^2`` is estimated with the
    five-point central stencil (fourth-order accurate, matching the
    integrator order) on the interior of a uniform grid.
    """
    z = traj.zeta
    h = z[1] - z[0]
    if not np.allclose(np.diff(z), h, rtol=1e-9, atol=1e-12):
        raise ValueError("dissipation residual requires a uniform grid")
    if traj.theta is None:
        raise ValueError("trajectory carries no mixing angle")
    norm = traj.norm_sq
    x = np.real(traj.omega_p) * np.cos(traj.theta) - np.real(traj.omega_s) * np.sin(traj.theta)
    d = (norm[:-4] - 8.0 * norm[1:-3] + 8.0 * norm[3:-1] - norm[4:]) / (12.0 * h)
    return d + x[2:-2] ** 2


def dissipation_order(
    profile: ThetaProfile,
    steps_list: Sequence[int],
    initial: FieldState = FieldState(1.0, 0.0),
) -> tuple[float, np.ndarray]:
    """Observed convergence order of the dissipation-identity residual.

    Returns the log-log slope of max residual versus step size over the
    given step counts, together with the residual maxima.
    """
    res = []
    hs = []
    for n in steps_list:
        traj = propagate_reduced(profile, opts=IntegratorOptions(step_count=int(n)))
        res.append(float(np.max(np.abs(dissipation_residual(traj)))))
        hs.append(profile.alpha / n)
    slope = float(np.polyfit(np.log(hs), np.log(res), 1)[0])
    return slope, np.asarray(res)

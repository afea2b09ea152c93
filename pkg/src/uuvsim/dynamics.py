"""Continuous-time model of one underactuated underwater vehicle.

State is the 5-DOF pose eta = (x, y, z, theta, psi) plus body velocities
nu = (u, v, w, q, r); there is no roll state. Kinematics:

    x_dot     = cos(theta) cos(psi) u - sin(psi) v + sin(theta) cos(psi) w
    y_dot     = cos(theta) sin(psi) u + cos(psi) v + sin(theta) sin(psi) w
    z_dot     = -sin(theta) u + cos(theta) w
    theta_dot = q
    psi_dot   = r / cos(theta)

Dynamics, with effective masses m1..m5 (rigid mass/inertia minus added
mass) and linear damping:

    m1 u_dot = m2 v r - m3 w q - beta_u u + tau1 + d1
    m2 v_dot = -m1 u r - beta_v v + d2
    m3 w_dot = m1 u q - beta_w w + d3
    m4 q_dot = (m3 - m1) u w - beta_q q - beta_b sin(theta) + tau2 + d4
    m5 r_dot = (m1 - m2) u v - beta_r r + tau3 + d5

Only (tau1, tau2, tau3) are actuated; sway and heave are not. The
spherical re-parameterization (u_a, theta_a, psi_a) of the linear body
velocity makes the position kinematics fully actuated:

    u_a    = sqrt(u^2 + v^2 + w^2)
    theta' = arctan(-w / sqrt(u^2 + v^2)),  psi' = arctan(v / u)
    theta_a = theta + theta',               psi_a = psi + psi'
    x_dot = u_a cos(theta_a) cos(psi_a)
    y_dot = u_a cos(theta_a) sin(psi_a)
    z_dot = -u_a sin(theta_a)

All functions here are pure; integration state lives entirely in the
returned values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NonFinite, NonPositiveEffectiveMass, SingularAttitude

#: Default guard margin on cos(theta) before the yaw kinematics blow up (rad).
ATTITUDE_MARGIN = 1e-3

#: Default resultant-speed floor below which the flow angles are undefined (m/s).
U_EPS = 1e-6

#: Clamp used to keep flow angles strictly inside (-pi/2, pi/2).
_ANGLE_CLAMP = math.pi / 2 - 1e-6


@dataclass(frozen=True)
class VehicleParams:
    """Mass, inertia and hydrodynamic coefficients of one vehicle.

    Effective masses are derived on construction:
    m1 = m - beta_du, m2 = m - beta_dv, m3 = m - beta_dw,
    m4 = Iy - beta_dq, m5 = Iz - beta_dr; all must be strictly positive.
    """

    m: float          # rigid mass (kg)
    Iy: float         # pitch inertia (kg m^2)
    Iz: float         # yaw inertia (kg m^2)
    beta_du: float    # added mass, surge (kg)
    beta_dv: float    # added mass, sway (kg)
    beta_dw: float    # added mass, heave (kg)
    beta_dq: float    # added inertia, pitch (kg m^2)
    beta_dr: float    # added inertia, yaw (kg m^2)
    beta_u: float     # linear damping, surge
    beta_v: float     # linear damping, sway
    beta_w: float     # linear damping, heave
    beta_q: float     # linear damping, pitch
    beta_r: float     # linear damping, yaw
    beta_b: float     # restoring (buoyancy) coefficient
    m1: float = field(init=False)
    m2: float = field(init=False)
    m3: float = field(init=False)
    m4: float = field(init=False)
    m5: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "m1", self.m - self.beta_du)
        object.__setattr__(self, "m2", self.m - self.beta_dv)
        object.__setattr__(self, "m3", self.m - self.beta_dw)
        object.__setattr__(self, "m4", self.Iy - self.beta_dq)
        object.__setattr__(self, "m5", self.Iz - self.beta_dr)
        for name in ("m1", "m2", "m3", "m4", "m5"):
            if getattr(self, name) <= 0.0:
                raise NonPositiveEffectiveMass(
                    f"effective mass {name} = {getattr(self, name):g} must be > 0"
                )
        for name in ("beta_u", "beta_v", "beta_w", "beta_q", "beta_r"):
            if getattr(self, name) < 0.0:
                raise NonPositiveEffectiveMass(
                    f"damping coefficient {name} = {getattr(self, name):g} must be >= 0"
                )


@dataclass(frozen=True, slots=True)
class VehicleState:
    """Pose and body velocities of one vehicle (SI units, radians)."""

    x: float
    y: float
    z: float
    theta: float
    psi: float
    u: float
    v: float
    w: float
    q: float
    r: float

    @property
    def eta1(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @property
    def eta2(self) -> tuple[float, float]:
        return (self.theta, self.psi)

    @property
    def nu1(self) -> tuple[float, float, float]:
        return (self.u, self.v, self.w)

    @property
    def nu2(self) -> tuple[float, float]:
        return (self.q, self.r)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.x, self.y, self.z, self.theta, self.psi,
                self.u, self.v, self.w, self.q, self.r)

    @staticmethod
    def from_tuple(t) -> "VehicleState":
        return VehicleState(*t)

    def is_finite(self) -> bool:
        # inf - inf inside the sum yields nan, so one isfinite covers all.
        return math.isfinite(
            self.x + self.y + self.z + self.theta + self.psi
            + self.u + self.v + self.w + self.q + self.r
        )


@dataclass(frozen=True, slots=True)
class ControlInput:
    """Actuated generalized forces: surge force, pitch torque, yaw torque."""

    tau1: float  # N
    tau2: float  # N m
    tau3: float  # N m

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.tau1, self.tau2, self.tau3)


ZERO_INPUT = ControlInput(0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True)
class DisturbanceVector:
    """Generalized disturbance on the five dynamic equations."""

    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0
    d4: float = 0.0
    d5: float = 0.0

    def norm(self) -> float:
        return math.sqrt(self.d1 ** 2 + self.d2 ** 2 + self.d3 ** 2
                         + self.d4 ** 2 + self.d5 ** 2)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.d1, self.d2, self.d3, self.d4, self.d5)


ZERO_DISTURBANCE = DisturbanceVector()


@dataclass(frozen=True, slots=True)
class SphericalSpeed:
    """Spherical re-parameterization of the linear body velocity.

    ``degenerate`` is set when the resultant speed was below the floor
    (flow angles held at caller-supplied previous values) or when a flow
    angle had to be clamped away from +-pi/2.
    """

    u_a: float            # resultant speed, >= 0 (m/s)
    theta_prime: float    # flight-path pitch offset (rad)
    psi_prime: float      # sideslip yaw offset (rad)
    theta_a: float        # transformed pitch (rad)
    psi_a: float          # transformed yaw (rad)
    degenerate: bool = False


def _deriv(y: tuple, p: VehicleParams, tau: tuple, d: tuple,
           margin: float) -> tuple:
    """Tuple-level derivative kernel shared by the integrator stages."""
    x, yy, z, theta, psi, u, v, w, q, r = y
    cos_t = math.cos(theta)
    if cos_t <= margin:
        raise SingularAttitude(
            f"cos(theta) = {cos_t:.3e} <= margin {margin:g}: pitch too close to +-pi/2"
        )
    sin_t = math.sin(theta)
    cos_p = math.cos(psi)
    sin_p = math.sin(psi)
    return (
        cos_t * cos_p * u - sin_p * v + sin_t * cos_p * w,
        cos_t * sin_p * u + cos_p * v + sin_t * sin_p * w,
        -sin_t * u + cos_t * w,
        q,
        r / cos_t,
        (p.m2 * v * r - p.m3 * w * q - p.beta_u * u + tau[0] + d[0]) / p.m1,
        (-p.m1 * u * r - p.beta_v * v + d[1]) / p.m2,
        (p.m1 * u * q - p.beta_w * w + d[2]) / p.m3,
        ((p.m3 - p.m1) * u * w - p.beta_q * q - p.beta_b * sin_t
         + tau[1] + d[3]) / p.m4,
        ((p.m1 - p.m2) * u * v - p.beta_r * r + tau[2] + d[4]) / p.m5,
    )


def state_derivative(state: VehicleState, params: VehicleParams,
                     tau: ControlInput, d: DisturbanceVector,
                     margin: float = ATTITUDE_MARGIN) -> tuple[float, ...]:
    """Time derivative of the 10-dimensional vehicle state.

    Returns rates in the same component order as ``VehicleState.as_tuple``.
    Raises SingularAttitude when cos(theta) <= margin.
    """
    return _deriv(state.as_tuple(), params, tau.as_tuple(), d.as_tuple(),
                  margin)


def spherical_transform(nu1, eta2, prev: SphericalSpeed | None = None,
                        u_eps: float = U_EPS) -> SphericalSpeed:
    """Map body linear velocity to (u_a, theta', psi', theta_a, psi_a).

    Below the speed floor the flow angles are undefined; they are held at
    the previous values (zero if no previous sample) and the result is
    flagged degenerate. psi' is the two-argument arctangent of (v, u),
    which equals arctan(v/u) on the normal-operation branch u > 0; for
    u <= 0 it is clamped into (-pi/2, pi/2) and flagged. theta' gets the
    symmetric clamp for pure-heave motion (u = v = 0).
    """
    u, v, w = nu1
    theta, psi = eta2
    u_a = math.sqrt(u * u + v * v + w * w)
    if u_a < u_eps:
        tp = prev.theta_prime if prev is not None else 0.0
        pp = prev.psi_prime if prev is not None else 0.0
        return SphericalSpeed(u_a, tp, pp, theta + tp, psi + pp, degenerate=True)

    degenerate = False
    h = math.hypot(u, v)
    theta_prime = math.atan2(-w, h)
    if abs(theta_prime) > _ANGLE_CLAMP:  # only reachable when u = v = 0
        theta_prime = math.copysign(_ANGLE_CLAMP, theta_prime)
        degenerate = True
    psi_prime = math.atan2(v, u)
    if abs(psi_prime) > _ANGLE_CLAMP:  # u <= 0: outside the defined branch
        psi_prime = math.copysign(_ANGLE_CLAMP, psi_prime)
        degenerate = True
    return SphericalSpeed(u_a, theta_prime, psi_prime,
                          theta + theta_prime, psi + psi_prime, degenerate)


def transformed_kinematics(sph: SphericalSpeed) -> tuple[float, float, float]:
    """Position rates (x_dot, y_dot, z_dot) from the spherical speed."""
    c = sph.u_a * math.cos(sph.theta_a)
    return (c * math.cos(sph.psi_a),
            c * math.sin(sph.psi_a),
            -sph.u_a * math.sin(sph.theta_a))


def inverse_spherical(sph: SphericalSpeed) -> tuple[float, float, float]:
    """Reconstruct (u, v, w) from (u_a, theta', psi')."""
    c = sph.u_a * math.cos(sph.theta_prime)
    return (c * math.cos(sph.psi_prime),
            c * math.sin(sph.psi_prime),
            -sph.u_a * math.sin(sph.theta_prime))


def integrate_step(state: VehicleState, params: VehicleParams,
                   tau: ControlInput, disturbance, dt: float,
                   margin: float = ATTITUDE_MARGIN) -> VehicleState:
    """Advance the state by one classic 4-stage Runge-Kutta step.

    ``tau`` is held constant over the step; ``disturbance`` is a callable
    t -> DisturbanceVector evaluated at the stage times (absolute time is
    handled by the caller passing a shifted callable, here stages are at
    0, dt/2 and dt relative offsets).
    """
    if dt <= 0.0:
        raise ValueError(f"dt = {dt:g} must be > 0")
    y0 = state.as_tuple()
    tt = tau.as_tuple()
    d0 = disturbance(0.0).as_tuple()
    d_half = disturbance(0.5 * dt).as_tuple()
    d_full = disturbance(dt).as_tuple()

    half = 0.5 * dt
    k1 = _deriv(y0, params, tt, d0, margin)
    k2 = _deriv(tuple(a + half * b for a, b in zip(y0, k1)),
                params, tt, d_half, margin)
    k3 = _deriv(tuple(a + half * b for a, b in zip(y0, k2)),
                params, tt, d_half, margin)
    k4 = _deriv(tuple(a + dt * b for a, b in zip(y0, k3)),
                params, tt, d_full, margin)

    h6 = dt / 6.0
    out = VehicleState(*(a + h6 * (b1 + 2.0 * (b2 + b3) + b4)
                         for a, b1, b2, b3, b4 in zip(y0, k1, k2, k3, k4)))
    if not out.is_finite():
        raise NonFinite("integration produced a non-finite state component")
    return out

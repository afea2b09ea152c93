"""Inner-loop force/torque generation for one vehicle.

Five inner laws share the same cascade. The attitude loops first produce
virtual angular-rate commands

    q_cmd = -k_theta (theta_a - theta_cmd) - d(theta')/dt + d(theta_cmd)/dt
    r_cmd = cos(theta) [ -k_psi (psi_a - psi_cmd) - d(psi')/dt + d(psi_cmd)/dt ]

then the velocity loops cancel the model terms and feed back the errors
u_tilde = u_a - u_cmd, q_tilde = q - q_cmd, r_tilde = r - r_cmd:

  BC / BOC   exact backstepping: proportional error feedback plus the
             command-derivative feedforwards u_cmd_dot, q_cmd_dot, r_cmd_dot.
  NBC / NBOC the proportional terms are replaced by shunting-neuron
             outputs x1, x2, x3 and the command derivatives are dropped
             (absorbed as lumped disturbance); each neuron obeys
             x_dot = -(a + |s|) x + g(s), g(s) = b s (s >= 0), b' s (s < 0),
             which confines x to [-b', b] and thereby bounds the torque
             contribution a priori.
  BSMC       proportional terms become saturated switching terms
             k * sat(error / phi) with boundary layer phi.

Every time derivative an implementable law needs comes from a causal
washout (high-pass) differentiator; raw numerical differencing is never
used. All laws are continuous away from the guard boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .consensus import VirtualCommand
from .dynamics import (ATTITUDE_MARGIN, ControlInput, SphericalSpeed,
                       VehicleParams, VehicleState, spherical_transform)
from .errors import NonPositiveGain, SingularAttitude, SingularTransform

#: Default washout-differentiator time constant (s).
TAU_F = 0.02

#: Guard margin on cos(theta') * cos(psi') in the surge law.
TRANSFORM_MARGIN = 1e-3

#: Pitch envelope of the protective barrier (rad) and its stiffness.
#: The 5-DOF attitude model is only valid for |theta| < pi/2 (and the
#: coupled stability conditions need 1/cos(theta) bounded); beyond
#: PITCH_LIMIT the allowed outward pitch rate tapers to zero and the
#: pitch torque is overridden to enforce it, so disturbance-driven flow
#: transients cannot drag the attitude through the kinematic
#: singularity. Inactive in nominal maneuvers.
PITCH_LIMIT = 1.35
PITCH_BARRIER_GAIN = 6.0
PITCH_ENVELOPE_STIFFNESS = 40.0

#: Combined flow-angle floor: when cos(theta')cos(psi') falls below this,
#: the nominal laws are out of their domain (the surge law divides by
#: this product) and the loop switches to recovery mode; it switches
#: back above FLOW_RELEASE_MARGIN (hysteresis against mode chatter).
FLOW_HOLD_MARGIN = 0.15
FLOW_RELEASE_MARGIN = 0.25

#: Real-axis stability interval of the 4-stage integrator (|dt*lambda|).
RK4_REAL_STABILITY = 2.785


class Variant(str, Enum):
    NBOC = "NBOC"   # neurodynamics + online gain optimization
    BOC = "BOC"     # online gain optimization only
    NBC = "NBC"     # neurodynamics only
    BC = "BC"       # plain backstepping
    BSMC = "BSMC"   # backstepping sliding mode

    @property
    def uses_optimizer(self) -> bool:
        return self in (Variant.NBOC, Variant.BOC)

    @property
    def uses_shunting(self) -> bool:
        return self in (Variant.NBOC, Variant.NBC)


@dataclass(frozen=True)
class ShuntingParams:
    """Decay and saturation coefficients per (u, q, r) channel."""

    a: tuple[float, float, float]
    b: tuple[float, float, float]
    b_prime: tuple[float, float, float]

    def __post_init__(self):
        if any(x <= 0.0 for x in (*self.a, *self.b, *self.b_prime)):
            raise NonPositiveGain("shunting coefficients must be strictly positive")


@dataclass(frozen=True)
class SmcParams:
    """Boundary layer of the saturated switching terms (switching gains
    are the velocity-loop gains themselves)."""

    phi: float = 0.05

    def __post_init__(self):
        if self.phi <= 0.0:
            raise NonPositiveGain("boundary layer width phi must be > 0")


@dataclass(frozen=True)
class ControllerGains:
    k_theta: float
    k_psi: float
    k_u: float
    k_q: float
    k_r: float
    shunting: ShuntingParams | None = None
    smc: SmcParams | None = None

    def __post_init__(self):
        if min(self.k_theta, self.k_psi, self.k_u, self.k_q, self.k_r) <= 0.0:
            raise NonPositiveGain("inner-loop gains must be strictly positive")


@dataclass(frozen=True, slots=True)
class ShuntingState:
    x1: float = 0.0  # surge channel
    x2: float = 0.0  # pitch-rate channel
    x3: float = 0.0  # yaw-rate channel

    def as_tuple(self):
        return (self.x1, self.x2, self.x3)


@dataclass(frozen=True, slots=True)
class TrackingErrors:
    """Loop error signals and the derivative estimates feeding the laws."""

    tilde_u: float
    tilde_theta: float
    tilde_psi: float
    tilde_q: float
    tilde_r: float
    q_cmd: float
    r_cmd: float
    d_theta_prime: float
    d_psi_prime: float
    d_u_cmd: float
    d_theta_cmd: float
    d_psi_cmd: float
    d_q_cmd: float
    d_r_cmd: float


def wrap_angle(x: float) -> float:
    """Fold an angle difference into [-pi, pi]."""
    return math.remainder(x, math.tau)


class WashoutDifferentiator:
    """Causal rate estimator: bilinear discretization of s / (tau s + 1).

    Gain is bounded by 1/tau at all frequencies, ramps are recovered
    exactly in steady state, and the first sample initializes the state
    so a constant input yields zero from the start.
    """

    __slots__ = ("tau", "dt", "_x_prev", "_y_prev", "_a")

    def __init__(self, tau: float, dt: float):
        if tau < 2.0 * dt:
            raise ValueError(f"tau = {tau:g} must be >= 2*dt = {2 * dt:g}")
        self.tau = tau
        self.dt = dt
        self._a = 2.0 * tau / dt
        self._x_prev = None
        self._y_prev = 0.0

    def update(self, x: float) -> float:
        if self._x_prev is None:
            self._x_prev = x
            self._y_prev = 0.0
            return 0.0
        y = ((2.0 / self.dt) * (x - self._x_prev)
             + (self._a - 1.0) * self._y_prev) / (self._a + 1.0)
        self._x_prev = x
        self._y_prev = y
        return y

    def reset(self):
        self._x_prev = None
        self._y_prev = 0.0


def estimate_derivative(stream, tau_f: float, dt: float) -> list[float]:
    """Rate estimates for a uniformly sampled signal stream."""
    f = WashoutDifferentiator(tau_f, dt)
    return [f.update(x) for x in stream]


def virtual_angular_commands(tilde_theta: float, tilde_psi: float,
                             theta: float, d_theta_prime: float,
                             d_psi_prime: float, d_theta_cmd: float,
                             d_psi_cmd: float, gains: ControllerGains,
                             margin: float = ATTITUDE_MARGIN
                             ) -> tuple[float, float]:
    """Virtual pitch/yaw rate commands from wrapped attitude errors."""
    cos_t = math.cos(theta)
    if cos_t < margin:
        raise SingularAttitude(
            f"cos(theta) = {cos_t:.3e} below margin in angular command law"
        )
    q_cmd = -gains.k_theta * tilde_theta - d_theta_prime + d_theta_cmd
    r_cmd = cos_t * (-gains.k_psi * tilde_psi - d_psi_prime + d_psi_cmd)
    return q_cmd, r_cmd


def _model_terms(state: VehicleState, params: VehicleParams,
                 sph: SphericalSpeed,
                 margin: float = TRANSFORM_MARGIN):
    """Common cancellation terms; guards the surge-law division."""
    ctp = math.cos(sph.theta_prime)
    cpp = math.cos(sph.psi_prime)
    denom = ctp * cpp
    if denom < margin:
        raise SingularTransform(
            f"cos(theta')cos(psi') = {denom:.3e} below margin {margin:g}"
        )
    p = params
    u, v, w = state.u, state.v, state.w
    q, r = state.q, state.r
    # cross-flow correction entering the surge channel
    tau1_star = (ctp * math.sin(sph.psi_prime) / p.m2) * (p.m1 * u * r + p.beta_v * v) \
        + (math.sin(sph.theta_prime) / p.m3) * (p.m1 * u * q - p.beta_w * w)
    tau1_base = -p.m2 * v * r + p.m3 * w * q + p.beta_u * u
    tau2_base = -(p.m3 - p.m1) * u * w + p.beta_q * q + p.beta_b * math.sin(state.theta)
    tau3_base = -(p.m1 - p.m2) * u * v + p.beta_r * r
    return denom, tau1_star, tau1_base, tau2_base, tau3_base


def backstepping_law(state: VehicleState, params: VehicleParams,
                     sph: SphericalSpeed, errors: TrackingErrors,
                     gains: ControllerGains,
                     margin: float = TRANSFORM_MARGIN) -> ControlInput:
    """Exact backstepping law with command-derivative feedforwards."""
    denom, tau1_star, t1b, t2b, t3b = _model_terms(state, params, sph, margin)
    p = params
    cos_t = math.cos(state.theta)
    tau1 = t1b + (p.m1 / denom) * (-gains.k_u * errors.tilde_u
                                   + errors.d_u_cmd + tau1_star)
    tau2 = t2b - gains.k_q * p.m4 * errors.tilde_q - p.m4 * errors.tilde_theta \
        + p.m4 * errors.d_q_cmd
    tau3 = t3b - gains.k_r * p.m5 * errors.tilde_r \
        - p.m5 * errors.tilde_psi / cos_t + p.m5 * errors.d_r_cmd
    return ControlInput(tau1, tau2, tau3)


def shunting_gfun(y: float, b: float, b_prime: float) -> float:
    """Piecewise-linear neuron input gain: b*y for y >= 0, b'*y below."""
    return b * y if y >= 0.0 else b_prime * y


def shunting_step(x: ShuntingState, s, params: ShuntingParams,
                  dt: float) -> ShuntingState:
    """Advance the three shunting neurons one step (inputs held).

    Uses the same 4-stage scheme as the vehicle integrator; the exact
    flow keeps [-b', b] invariant, so the discrete output is projected
    back onto that interval to make the bound unconditional.
    """
    out = []
    for xj, sj, a, b, bp in zip(x.as_tuple(), s, params.a, params.b,
                                params.b_prime):
        decay = a + abs(sj)
        drive = shunting_gfun(sj, b, bp)

        def f(val):
            return -decay * val + drive

        k1 = f(xj)
        k2 = f(xj + 0.5 * dt * k1)
        k3 = f(xj + 0.5 * dt * k2)
        k4 = f(xj + dt * k3)
        xn = xj + dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
        out.append(min(max(xn, -bp), b))
    return ShuntingState(*out)


def neuro_backstepping_law(state: VehicleState, params: VehicleParams,
                           sph: SphericalSpeed, errors: TrackingErrors,
                           x: ShuntingState, gains: ControllerGains,
                           margin: float = TRANSFORM_MARGIN) -> ControlInput:
    """Shunting-compensated law: bounded feedback, no derivative feedforward."""
    denom, tau1_star, t1b, t2b, t3b = _model_terms(state, params, sph, margin)
    p = params
    cos_t = math.cos(state.theta)
    tau1 = t1b + (p.m1 / denom) * (-gains.k_u * x.x1 + tau1_star)
    tau2 = t2b - gains.k_q * p.m4 * x.x2 - p.m4 * errors.tilde_theta
    tau3 = t3b - gains.k_r * p.m5 * x.x3 - p.m5 * errors.tilde_psi / cos_t
    return ControlInput(tau1, tau2, tau3)


def sat(y: float) -> float:
    """Unit saturation: y inside [-1, 1], sign(y) outside."""
    return min(max(y, -1.0), 1.0)


def smc_law(state: VehicleState, params: VehicleParams,
            sph: SphericalSpeed, errors: TrackingErrors,
            gains: ControllerGains,
            margin: float = TRANSFORM_MARGIN) -> ControlInput:
    """Boundary-layer sliding-mode variant of the backstepping law."""
    if gains.smc is None:
        raise NonPositiveGain("BSMC requires boundary-layer parameters")
    denom, tau1_star, t1b, t2b, t3b = _model_terms(state, params, sph, margin)
    p = params
    phi = gains.smc.phi
    cos_t = math.cos(state.theta)
    tau1 = t1b + (p.m1 / denom) * (-gains.k_u * sat(errors.tilde_u / phi)
                                   + errors.d_u_cmd + tau1_star)
    tau2 = t2b - gains.k_q * p.m4 * sat(errors.tilde_q / phi) \
        - p.m4 * errors.tilde_theta + p.m4 * errors.d_q_cmd
    tau3 = t3b - gains.k_r * p.m5 * sat(errors.tilde_r / phi) \
        - p.m5 * errors.tilde_psi / cos_t + p.m5 * errors.d_r_cmd
    return ControlInput(tau1, tau2, tau3)


# ---------------------------------------------------------------------------
# Stateful per-vehicle loop


@dataclass(frozen=True)
class InnerResult:
    tau: ControlInput
    errors: TrackingErrors
    shunting: ShuntingState     # state used in this tick's law (pre-update)
    z: float                    # sqrt(u~^2 + q~^2 + r~^2)
    sph: SphericalSpeed


class InnerLoop:
    """Holds one vehicle's controller memory: previous flow angles for
    the degenerate-speed hold, the derivative filters, and the shunting
    neurons. One instance per vehicle; never shared."""

    def __init__(self, variant: Variant, params: VehicleParams,
                 gains: ControllerGains, dt: float, tau_f: float = TAU_F,
                 attitude_margin: float = ATTITUDE_MARGIN,
                 transform_margin: float = TRANSFORM_MARGIN,
                 u_eps: float = 1e-6,
                 tau_max: tuple = (math.inf, math.inf, math.inf)):
        if variant.uses_shunting and gains.shunting is None:
            raise NonPositiveGain(f"{variant.value} requires shunting parameters")
        if variant is Variant.BSMC and gains.smc is None:
            raise NonPositiveGain("BSMC requires boundary-layer parameters")
        self.variant = variant
        self.params = params
        self.gains = gains
        self.dt = dt
        self.attitude_margin = attitude_margin
        self.transform_margin = transform_margin
        self.u_eps = u_eps
        self.tau_max = tau_max
        self._sph_prev: SphericalSpeed | None = None
        self._recovery = False
        self.recovery_ticks = 0
        names = ("theta_prime", "psi_prime", "u_cmd", "theta_cmd",
                 "psi_cmd", "q_cmd", "r_cmd")
        self._filters = {n: WashoutDifferentiator(tau_f, dt) for n in names}
        self.shunting = ShuntingState()

    def compute(self, state: VehicleState, cmd: VirtualCommand) -> InnerResult:
        sph = spherical_transform(state.nu1, state.eta2, prev=self._sph_prev,
                                  u_eps=self.u_eps)
        conditioning = math.cos(sph.theta_prime) * math.cos(sph.psi_prime)
        if self._recovery:
            if not sph.degenerate and conditioning > FLOW_RELEASE_MARGIN:
                self._recovery = False
        elif sph.degenerate or conditioning < FLOW_HOLD_MARGIN:
            # flow reversal or extreme flow angles: the nominal laws left
            # their domain; switch to recovery until the flow realigns
            self._recovery = True
        if self._recovery and self._sph_prev is not None:
            # report the last well-conditioned flow angles meanwhile
            theta, psi = state.eta2
            sph = SphericalSpeed(
                u_a=sph.u_a,
                theta_prime=self._sph_prev.theta_prime,
                psi_prime=self._sph_prev.psi_prime,
                theta_a=theta + self._sph_prev.theta_prime,
                psi_a=psi + self._sph_prev.psi_prime,
                degenerate=True)
        else:
            self._sph_prev = sph
        f = self._filters
        d_tp = f["theta_prime"].update(sph.theta_prime)
        d_pp = f["psi_prime"].update(sph.psi_prime)
        d_uc = f["u_cmd"].update(cmd.u_cmd)
        d_tc = f["theta_cmd"].update(cmd.theta_cmd)
        d_pc = f["psi_cmd"].update(cmd.psi_cmd)

        tilde_u = sph.u_a - cmd.u_cmd
        tilde_theta = wrap_angle(sph.theta_a - cmd.theta_cmd)
        tilde_psi = wrap_angle(sph.psi_a - cmd.psi_cmd)
        q_cmd, r_cmd = virtual_angular_commands(
            tilde_theta, tilde_psi, state.theta, d_tp, d_pp, d_tc, d_pc,
            self.gains, self.attitude_margin)
        # protective pitch envelope, command level: outward rate commands
        # taper to zero at the model-validity limit
        q_cmd = min(q_cmd, PITCH_BARRIER_GAIN * (PITCH_LIMIT - state.theta))
        q_cmd = max(q_cmd, -PITCH_BARRIER_GAIN * (PITCH_LIMIT + state.theta))
        d_qc = f["q_cmd"].update(q_cmd)
        d_rc = f["r_cmd"].update(r_cmd)
        tilde_q = state.q - q_cmd
        tilde_r = state.r - r_cmd

        errors = TrackingErrors(
            tilde_u=tilde_u, tilde_theta=tilde_theta, tilde_psi=tilde_psi,
            tilde_q=tilde_q, tilde_r=tilde_r, q_cmd=q_cmd, r_cmd=r_cmd,
            d_theta_prime=d_tp, d_psi_prime=d_pp, d_u_cmd=d_uc,
            d_theta_cmd=d_tc, d_psi_cmd=d_pc, d_q_cmd=d_qc, d_r_cmd=d_rc)

        x_used = self.shunting
        if self._recovery:
            tau = self._recovery_law(state, cmd)
            self.recovery_ticks += 1
            if self.variant.uses_shunting:
                self.shunting = shunting_step(
                    x_used, (tilde_u, tilde_q, tilde_r),
                    self.gains.shunting, self.dt)
        elif self.variant.uses_shunting:
            tau = neuro_backstepping_law(state, self.params, sph, errors,
                                         x_used, self.gains,
                                         self.transform_margin)
            self.shunting = shunting_step(
                x_used, (tilde_u, tilde_q, tilde_r),
                self.gains.shunting, self.dt)
        elif self.variant is Variant.BSMC:
            tau = smc_law(state, self.params, sph, errors, self.gains,
                          self.transform_margin)
        else:
            tau = backstepping_law(state, self.params, sph, errors,
                                   self.gains, self.transform_margin)
        tau = self._pitch_envelope(state, tau)
        tau = ControlInput(
            min(max(tau.tau1, -self.tau_max[0]), self.tau_max[0]),
            min(max(tau.tau2, -self.tau_max[1]), self.tau_max[1]),
            min(max(tau.tau3, -self.tau_max[2]), self.tau_max[2]))

        z = math.sqrt(tilde_u * tilde_u + tilde_q * tilde_q + tilde_r * tilde_r)
        return InnerResult(tau=tau, errors=errors, shunting=x_used, z=z, sph=sph)

    def _recovery_law(self, state: VehicleState,
                      cmd: VirtualCommand) -> ControlInput:
        """Unusual-flow recovery: thrust along the body axis toward the
        commanded speed and damp the angular rates. No coriolis
        cancellation (those terms amplify a divergence) and no flow-angle
        divisions; every term is bounded by construction."""
        p = self.params
        tau1 = p.beta_u * state.u + p.m1 * self.gains.k_u * (cmd.u_cmd - state.u)
        tau2 = p.beta_b * math.sin(state.theta) - p.m4 * self.gains.k_q * state.q
        tau3 = -p.m5 * self.gains.k_r * state.r
        return ControlInput(tau1, tau2, tau3)

    def _pitch_envelope(self, state: VehicleState,
                        tau: ControlInput) -> ControlInput:
        """Protective override of the pitch torque at the envelope edge.

        Whenever the realized pitch rate exceeds the tapered outward
        allowance, the nominal law is replaced by a stiff rate servo
        toward the allowance (model cancellation plus rate feedback);
        recovery toward level pitch is never restricted.
        """
        q_hi = PITCH_BARRIER_GAIN * (PITCH_LIMIT - state.theta)
        q_lo = -PITCH_BARRIER_GAIN * (PITCH_LIMIT + state.theta)
        if q_lo <= state.q <= q_hi:
            return tau
        q_target = q_hi if state.q > q_hi else q_lo
        p = self.params
        tau2 = (-(p.m3 - p.m1) * state.u * state.w + p.beta_q * state.q
                + p.beta_b * math.sin(state.theta)
                - p.m4 * PITCH_ENVELOPE_STIFFNESS * (state.q - q_target))
        return ControlInput(tau.tau1, tau2, tau.tau3)


# ---------------------------------------------------------------------------
# Stability conditions


@dataclass(frozen=True)
class ConditionResult:
    name: str
    value: float
    limit: float
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class StabilityReport:
    conditions: tuple[ConditionResult, ...]
    c2: tuple[float, float, float]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def render(self) -> str:
        lines = []
        for c in self.conditions:
            mark = "PASS" if c.passed else "FAIL"
            note = f"  ({c.note})" if c.note else ""
            lines.append(f"  [{mark}] {c.name}: {c.value:.6g} "
                         f"(limit {c.limit:.6g}){note}")
        return "\n".join(lines)


def _channel_eigs(k: float, a: float, g: float) -> tuple[float, float]:
    """(max real part, max modulus) of [[0, -k], [g, -a]]."""
    disc = a * a - 4.0 * k * g
    if disc >= 0.0:
        root = math.sqrt(disc)
        max_re = 0.5 * (-a + root)
        max_mod = max(abs(0.5 * (-a + root)), abs(0.5 * (-a - root)))
    else:
        max_re = -0.5 * a
        max_mod = math.sqrt(k * g)  # |conjugate pair| = sqrt(det)
    return max_re, max_mod


def check_stability_conditions(gains: ControllerGains, dt: float,
                               max_abs_theta: float = 0.0) -> StabilityReport:
    """Evaluate the coupled error/shunting stability conditions.

    Per channel j the matrix T_j = [[0, -k_j], [g_j, -a_j]] is formed at
    the nominal operating point (the |error| additions to a_j at zero),
    for both input-gain branches g in {b_j, b'_j}; c2_j is the worst-case
    negated maximum real part. The cross-coupling conditions
    1/(c2_2 k_theta) < 1 and (sup 1/cos theta)^2 / (c2_3 k_psi) < 1 use
    ``max_abs_theta``, the realized (or assumed) pitch envelope.
    """
    if gains.shunting is None:
        raise ValueError("stability conditions apply to shunting-equipped "
                         "controllers only")
    sh = gains.shunting
    ks = (gains.k_u, gains.k_q, gains.k_r)
    names = ("surge", "pitch-rate", "yaw-rate")
    conditions = []
    c2 = []
    max_mod_all = 0.0
    for j in range(3):
        worst_re = -math.inf
        for g in (sh.b[j], sh.b_prime[j]):
            re, mod = _channel_eigs(ks[j], sh.a[j], g)
            worst_re = max(worst_re, re)
            max_mod_all = max(max_mod_all, mod)
        c2_j = -worst_re
        c2.append(c2_j)
        conditions.append(ConditionResult(
            name=f"T{j + 1} Hurwitz ({names[j]} channel)",
            value=worst_re, limit=0.0, passed=worst_re < 0.0,
            note=f"c2_{j + 1} = {c2_j:.6g}"))

    ratio_theta = 1.0 / (c2[1] * gains.k_theta) if c2[1] > 0.0 else math.inf
    conditions.append(ConditionResult(
        name="pitch coupling 1/(c2_2 * k_theta)",
        value=ratio_theta, limit=1.0, passed=ratio_theta < 1.0))

    if abs(max_abs_theta) >= math.pi / 2:
        sup_sec = math.inf
    else:
        sup_sec = 1.0 / math.cos(max_abs_theta)
    ratio_psi = (sup_sec ** 2) / (c2[2] * gains.k_psi) if c2[2] > 0.0 else math.inf
    conditions.append(ConditionResult(
        name="yaw coupling sup(1/cos theta)^2 / (c2_3 * k_psi)",
        value=ratio_psi, limit=1.0, passed=ratio_psi < 1.0,
        note=f"max |theta| = {max_abs_theta:.4g} rad"))

    step_margin = dt * max_mod_all
    conditions.append(ConditionResult(
        name="integrator step margin dt * max|lambda|",
        value=step_margin, limit=RK4_REAL_STABILITY,
        passed=step_margin < RK4_REAL_STABILITY,
        note="approximate 4-stage stability interval"))

    return StabilityReport(conditions=tuple(conditions),
                           c2=(c2[0], c2[1], c2[2]))

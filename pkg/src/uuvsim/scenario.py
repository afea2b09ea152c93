"""Scenario configuration: everything that determines one run.

A scenario file is TOML with the sections [sim], [vehicle], [topology],
[formation], [reference], [initial], [disturbance], [optimizer],
[gains.<VARIANT>] and optional [numerics]. One file fully determines a
deterministic run, including every default the underlying experiment
leaves unstated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .consensus import FormationSpec
from .controllers import (ControllerGains, ShuntingParams, SmcParams, TAU_F,
                          Variant)
from .dynamics import ATTITUDE_MARGIN, U_EPS, VehicleParams, VehicleState
from .errors import ScenarioError
from .gainopt import OptimizerConfig
from .graph import FleetTopology, validate_topology

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class LinearReference:
    """Constant-velocity reference: eta_d(t) = pos0 + vel * t."""

    pos0: Vec3
    vel: Vec3

    def __call__(self, t: float):
        p = (self.pos0[0] + self.vel[0] * t,
             self.pos0[1] + self.vel[1] * t,
             self.pos0[2] + self.vel[2] * t)
        return p, self.vel, (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class DisturbanceProfile:
    """Per-vehicle, per-channel sinusoidal disturbance description.

    Channel c of vehicle i is amplitude * trig(omega * t + phase) with
    trig in {sin, cos}. The conservative bound ||amplitudes|| must stay
    within the configured alpha1 cap (bounded-disturbance assumption).
    """

    enabled: bool
    alpha1: float
    amplitude: tuple[tuple[float, ...], ...]   # [vehicle][channel]
    omega: tuple[tuple[float, ...], ...]
    phase: tuple[tuple[float, ...], ...]
    trig: tuple[tuple[str, ...], ...]

    def validate(self, n: int):
        for name in ("amplitude", "omega", "phase", "trig"):
            rows = getattr(self, name)
            if len(rows) != n or any(len(r) != 5 for r in rows):
                raise ScenarioError(
                    f"disturbance.{name} must give 5 channels for each of "
                    f"{n} vehicles")
        for rows in self.trig:
            for t in rows:
                if t not in ("sin", "cos"):
                    raise ScenarioError(f"disturbance trig must be sin|cos, got {t!r}")
        if self.enabled:
            for i, amps in enumerate(self.amplitude):
                bound = math.sqrt(sum(a * a for a in amps))
                if bound > self.alpha1:
                    raise ScenarioError(
                        f"vehicle {i + 1} disturbance bound ||amplitudes|| = "
                        f"{bound:.4g} exceeds the alpha1 cap {self.alpha1:g} "
                        "(bounded-disturbance assumption)")


DISTURBANCE_OFF = DisturbanceProfile(
    enabled=False, alpha1=math.inf,
    amplitude=((0.0,) * 5,), omega=((0.0,) * 5,),
    phase=((0.0,) * 5,), trig=(("sin",) * 5,))


@dataclass(frozen=True)
class VariantGains:
    """Per-variant gain set: outer virtual gains plus the inner loop."""

    k1: Vec3
    inner: ControllerGains


@dataclass(frozen=True)
class Numerics:
    attitude_margin: float = ATTITUDE_MARGIN
    u_eps: float = U_EPS
    tau_f: float = TAU_F
    # physical speed-command ceiling for the fixed-gain variants, which
    # have no optimizer box; the raw law scaled to this resultant speed
    # (direction preserved). inf disables the cap.
    command_speed_cap: float = math.inf
    # actuator ceilings |tau1|, |tau2|, |tau3| (N, N m, N m); generous
    # defaults never bind in nominal maneuvers but stop the unbounded
    # cancellation laws from amplifying disturbance-driven spirals.
    tau_max: tuple = (math.inf, math.inf, math.inf)


@dataclass(frozen=True)
class Scenario:
    name: str
    dt: float
    dt_sample: float
    t_final: float
    controller: Variant
    vehicle: VehicleParams
    topology: FleetTopology
    formation: FormationSpec
    initial: tuple[VehicleState, ...]
    disturbance: DisturbanceProfile
    optimizer: OptimizerConfig
    gains: dict[Variant, VariantGains]
    numerics: Numerics = field(default_factory=Numerics)
    settle_fraction: float = 0.02
    settle_floor: float = 1e-3

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def steps_per_sample(self) -> int:
        return int(round(self.dt_sample / self.dt))

    def gains_for(self, variant: Variant) -> VariantGains:
        try:
            return self.gains[variant]
        except KeyError:
            raise ScenarioError(f"scenario defines no gains for {variant.value}")

    def with_overrides(self, controller: Variant | None = None,
                       t_final: float | None = None,
                       dt: float | None = None) -> "Scenario":
        s = self
        if controller is not None:
            s = replace(s, controller=controller)
        if t_final is not None:
            s = replace(s, t_final=t_final)
        if dt is not None:
            s = replace(s, dt=dt)
        s.validate()
        return s

    def validate(self):
        """Run every scenario invariant; raises ScenarioError on failure."""
        if self.dt <= 0.0:
            raise ScenarioError("sim.dt must be > 0")
        if self.t_final < 0.0:
            raise ScenarioError("sim.t_final must be >= 0")
        n_sub = self.dt_sample / self.dt
        if abs(round(n_sub) - n_sub) > 1e-9 or round(n_sub) < 1:
            raise ScenarioError(
                f"dt_sample = {self.dt_sample:g} must be an integer multiple "
                f"of dt = {self.dt:g}")
        n_opt = self.optimizer.dt_sample / self.dt_sample
        if abs(round(n_opt) - n_opt) > 1e-9 or round(n_opt) < 1:
            raise ScenarioError(
                f"optimizer.dt_sample = {self.optimizer.dt_sample:g} must be "
                f"an integer multiple of sim.dt_sample = {self.dt_sample:g}")
        validate_topology(self.topology)  # connectivity + pinning + L+B > 0
        if len(self.initial) != self.n:
            raise ScenarioError(
                f"{len(self.initial)} initial states for {self.n} vehicles")
        margin = self.numerics.attitude_margin
        for i, st in enumerate(self.initial):
            if not st.is_finite():
                raise ScenarioError(f"initial state of vehicle {i + 1} is not finite")
            if abs(st.theta) >= math.pi / 2 - margin:
                raise ScenarioError(
                    f"initial |theta| of vehicle {i + 1} violates the pitch "
                    "singularity guard")
        # every communicating pair needs a formation offset
        for i in range(self.n):
            for j in self.topology.neighbors(i):
                self.formation.delta(i, j)  # raises MissingDelta
        self.disturbance.validate(self.n)
        if self.controller not in self.gains:
            raise ScenarioError(
                f"scenario defines no gains for controller {self.controller.value}")
        for vg in self.gains.values():
            if min(vg.k1) <= 0.0:
                raise ScenarioError("outer virtual gains k1 must be strictly positive")
        if not (0.0 < self.settle_fraction < 1.0):
            raise ScenarioError("settle_fraction must lie in (0, 1)")
        ref_ok = all(
            math.isfinite(v)
            for t in (0.0, self.t_final)
            for part in self.formation.reference(t)
            for v in part
        )
        if not ref_ok:
            raise ScenarioError("reference signals must be finite on the horizon")


def _vec3(x, what: str) -> Vec3:
    if len(x) != 3:
        raise ScenarioError(f"{what} must have 3 components, got {len(x)}")
    return (float(x[0]), float(x[1]), float(x[2]))


def _per_vehicle_rows(value, n: int, what: str, cast=float):
    """Accept one shared 5-channel row or n per-vehicle rows."""
    if len(value) and isinstance(value[0], (list, tuple)):
        rows = [tuple(cast(v) for v in row) for row in value]
    else:
        rows = [tuple(cast(v) for v in value)] * n
    if len(rows) != n:
        raise ScenarioError(f"disturbance.{what}: expected {n} rows, got {len(rows)}")
    return tuple(rows)


def _load_gains(table: dict, variant: Variant) -> VariantGains:
    try:
        k1 = _vec3(table["k1"], f"gains.{variant.value}.k1")
        shunting = None
        if "shunting" in table:
            sh = table["shunting"]
            shunting = ShuntingParams(
                a=_vec3(sh["a"], "shunting.a"),
                b=_vec3(sh["b"], "shunting.b"),
                b_prime=_vec3(sh["b_prime"], "shunting.b_prime"))
        smc = None
        if "smc" in table:
            smc = SmcParams(phi=float(table["smc"]["phi"]))
        inner = ControllerGains(
            k_theta=float(table["k_theta"]),
            k_psi=float(table["k_psi"]),
            k_u=float(table["k_u"]),
            k_q=float(table["k_q"]),
            k_r=float(table["k_r"]),
            shunting=shunting,
            smc=smc)
    except KeyError as exc:
        raise ScenarioError(
            f"gains.{variant.value} is missing key {exc.args[0]!r}") from exc
    return VariantGains(k1=k1, inner=inner)


def load_scenario(path) -> Scenario:
    """Parse and fully validate a scenario file."""
    path = Path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    try:
        scenario = _from_document(doc, name=path.stem)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid scenario {path}: {exc}") from exc
    scenario.validate()
    return scenario


def _from_document(doc: dict, name: str) -> Scenario:
    sim = doc["sim"]
    try:
        controller = Variant(sim.get("controller", "NBOC"))
    except ValueError:
        raise ScenarioError(
            f"unknown controller {sim.get('controller')!r}; expected one of "
            f"{[v.value for v in Variant]}")

    veh = doc["vehicle"]
    params = VehicleParams(
        m=float(veh["m"]), Iy=float(veh["Iy"]), Iz=float(veh["Iz"]),
        beta_du=float(veh["beta_du"]), beta_dv=float(veh["beta_dv"]),
        beta_dw=float(veh["beta_dw"]), beta_dq=float(veh["beta_dq"]),
        beta_dr=float(veh["beta_dr"]), beta_u=float(veh["beta_u"]),
        beta_v=float(veh["beta_v"]), beta_w=float(veh["beta_w"]),
        beta_q=float(veh["beta_q"]), beta_r=float(veh["beta_r"]),
        beta_b=float(veh["beta_b"]))

    topo_tab = doc["topology"]
    adjacency = np.asarray(topo_tab["adjacency"], dtype=float)
    pinning = np.asarray(topo_tab["pinning"], dtype=float)
    topology = FleetTopology(n=len(pinning), adjacency=adjacency, pinning=pinning)
    n = topology.n

    deltas = {}
    for entry in doc["formation"]["deltas"]:
        i, j = int(entry["i"]) - 1, int(entry["j"]) - 1  # files are 1-indexed
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ScenarioError(f"formation offset names invalid pair ({i + 1}, {j + 1})")
        deltas[(i, j)] = _vec3(entry["offset"], "formation offset")

    ref_tab = doc["reference"]
    kind = ref_tab.get("kind", "linear")
    if kind != "linear":
        raise ScenarioError(f"unsupported reference kind {kind!r} (only 'linear')")
    reference = LinearReference(
        pos0=_vec3(ref_tab["position0"], "reference.position0"),
        vel=_vec3(ref_tab["velocity"], "reference.velocity"))
    formation = FormationSpec(deltas=deltas, reference=reference, n=n)

    init = doc["initial"]
    eta_rows, nu_rows = init["eta"], init["nu"]
    if len(eta_rows) != n or len(nu_rows) != n:
        raise ScenarioError(f"initial.eta and initial.nu must each have {n} rows")
    initial = tuple(
        VehicleState(x=float(e[0]), y=float(e[1]), z=float(e[2]),
                     theta=float(e[3]), psi=float(e[4]),
                     u=float(v[0]), v=float(v[1]), w=float(v[2]),
                     q=float(v[3]), r=float(v[4]))
        for e, v in zip(eta_rows, nu_rows))

    dist_tab = doc.get("disturbance")
    if dist_tab is None:
        disturbance = DISTURBANCE_OFF
    else:
        disturbance = DisturbanceProfile(
            enabled=bool(dist_tab.get("enabled", False)),
            alpha1=float(dist_tab.get("alpha1", math.inf)),
            amplitude=_per_vehicle_rows(dist_tab["amplitude"], n, "amplitude"),
            omega=_per_vehicle_rows(dist_tab["omega"], n, "omega"),
            phase=_per_vehicle_rows(dist_tab.get("phase", [0.0] * 5), n, "phase"),
            trig=_per_vehicle_rows(dist_tab.get("trig", ["sin"] * 5), n,
                                   "trig", cast=str))

    opt_tab = doc.get("optimizer", {})
    optimizer = OptimizerConfig(
        Q=_vec3(opt_tab.get("Q", (10.0, 10.0, 10.0)), "optimizer.Q"),
        R1=_vec3(opt_tab.get("R1", (1.0, 1.0, 1.0)), "optimizer.R1"),
        R2=_vec3(opt_tab.get("R2", (1.0, 1.0, 1.0)), "optimizer.R2"),
        p=_vec3(opt_tab.get("p", (0.1, 0.1, 0.1)), "optimizer.p"),
        rho_lo=_vec3(opt_tab.get("rho_lo", (-1.5, -1.5, -1.5)), "optimizer.rho_lo"),
        rho_hi=_vec3(opt_tab.get("rho_hi", (1.5, 1.5, 1.5)), "optimizer.rho_hi"),
        k_min=float(opt_tab.get("k_min", 1e-3)),
        k_max=float(opt_tab.get("k_max", math.inf)),
        # solve/prediction period of the gain optimization; defaults to
        # the logging sample period
        dt_sample=float(opt_tab.get("dt_sample", sim["dt_sample"])))

    gains = {}
    for key, table in doc.get("gains", {}).items():
        try:
            variant = Variant(key)
        except ValueError:
            raise ScenarioError(f"unknown controller {key!r} in [gains]")
        gains[variant] = _load_gains(table, variant)

    num_tab = doc.get("numerics", {})
    numerics = Numerics(
        attitude_margin=float(num_tab.get("attitude_margin", ATTITUDE_MARGIN)),
        u_eps=float(num_tab.get("u_eps", U_EPS)),
        tau_f=float(num_tab.get("tau_f", TAU_F)),
        command_speed_cap=float(num_tab.get("command_speed_cap", math.inf)),
        tau_max=tuple(float(x) for x in num_tab.get("tau_max",
                                                    (math.inf,) * 3)))

    return Scenario(
        name=name,
        dt=float(sim["dt"]),
        dt_sample=float(sim["dt_sample"]),
        t_final=float(sim["t_final"]),
        controller=controller,
        vehicle=params,
        topology=topology,
        formation=formation,
        initial=initial,
        disturbance=disturbance,
        optimizer=optimizer,
        gains=gains,
        numerics=numerics,
        settle_fraction=float(sim.get("settle_fraction", 0.02)),
        settle_floor=float(sim.get("settle_floor", 1e-3)))

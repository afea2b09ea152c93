"""Closed-loop fleet simulation.

Synchronous rounds: at every integrator tick all controllers read the
same frozen pre-tick fleet snapshot (each vehicle only through its
neighbor view), compute their force/torque inputs, and then all vehicles
integrate over one dt with inputs held. Gains are re-optimized (NBOC and
BOC) every dt_sample and held in between; a log record is emitted at
every sample instant. The loop is sequential with a fixed vehicle order,
so identical scenarios produce bit-identical logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .consensus import (VirtualCommand, consensus_error, extract_commands,
                        virtual_law)
from .controllers import InnerLoop, ShuntingState, Variant
from .dynamics import ControlInput, DisturbanceVector, VehicleState, integrate_step
from .errors import GuardError, SimAbort
from .gainopt import SolveStatus, build_problem, solve
from .graph import neighbor_view
from .scenario import Scenario

#: Status string recorded on ticks where gains were not re-optimized.
STATUS_FIXED = "fixed"

_VEHICLE_FIELDS = (
    "x", "y", "z", "theta", "psi", "u", "v", "w", "q", "r",
    "ex", "ey", "ez", "enorm",
    "ucmd", "thetacmd", "psicmd",
    "rhox", "rhoy", "rhoz",
    "kx", "ky", "kz",
    "tau1", "tau2", "tau3",
    "xs1", "xs2", "xs3",
    "znorm", "status",
)


@dataclass(frozen=True)
class TickDecision:
    """Everything one vehicle's control evaluation produced at one tick."""

    e: tuple[float, float, float]
    rho: tuple[float, float, float]
    cmd: VirtualCommand
    k: tuple[float, float, float]
    tau: ControlInput
    z: float
    shunting: ShuntingState
    status: str


@dataclass(frozen=True)
class SimLogRecord:
    t: float
    states: tuple[VehicleState, ...]
    decisions: tuple[TickDecision, ...]


@dataclass
class SimLog:
    scenario_name: str
    variant: str
    n: int
    dt: float
    dt_sample: float
    rho_lo: tuple[float, float, float]
    rho_hi: tuple[float, float, float]
    records: list[SimLogRecord]

    @property
    def columns(self) -> list[str]:
        cols = ["t"]
        for i in range(1, self.n + 1):
            cols.extend(f"{name}_{i}" for name in _VEHICLE_FIELDS)
        return cols

    def times(self) -> list[float]:
        return [rec.t for rec in self.records]

    def to_csv(self, path) -> None:
        """Fixed column order, 9-significant-digit floats, LF endings."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.columns) + "\n")
            for rec in self.records:
                fh.write(",".join(self._row(rec)) + "\n")

    def _row(self, rec: SimLogRecord) -> list[str]:
        cells = [format(rec.t, ".9g")]
        for st, dec in zip(rec.states, rec.decisions):
            values = (
                *st.as_tuple(),
                *dec.e,
                math.sqrt(dec.e[0] ** 2 + dec.e[1] ** 2 + dec.e[2] ** 2),
                dec.cmd.u_cmd, dec.cmd.theta_cmd, dec.cmd.psi_cmd,
                *dec.rho,
                *dec.k,
                *dec.tau.as_tuple(),
                *dec.shunting.as_tuple(),
                dec.z,
            )
            cells.extend(format(v, ".9g") for v in values)
            cells.append(dec.status)
        return cells


def disturbance_at(profile, i: int, t: float) -> DisturbanceVector:
    """Disturbance on vehicle i at time t per the sinusoidal profile."""
    if not profile.enabled:
        return DisturbanceVector()
    amps = profile.amplitude[i]
    omegas = profile.omega[i]
    phases = profile.phase[i]
    trigs = profile.trig[i]
    vals = []
    for a, w, ph, tr in zip(amps, omegas, phases, trigs):
        arg = w * t + ph
        vals.append(a * (math.cos(arg) if tr == "cos" else math.sin(arg)))
    return DisturbanceVector(*vals)


class VehicleAgent:
    """One vehicle's full control stack plus its slow-rate gain state.

    The agent sees the fleet only through the NeighborSnapshot handed to
    ``control``; holding no other cross-vehicle references is what makes
    the protocol distributed.
    """

    def __init__(self, i: int, scenario: Scenario, variant: Variant):
        vg = scenario.gains_for(variant)
        self.i = i
        self.variant = variant
        self.formation = scenario.formation
        self.optimizer = scenario.optimizer if variant.uses_optimizer else None
        # the optimizer's box is the speed authority where present;
        # otherwise the scenario's physical command-speed ceiling applies
        self.u_cap = (math.inf if self.optimizer is not None
                      else scenario.numerics.command_speed_cap)
        self.k = tuple(vg.k1)
        self.prev_cmd: VirtualCommand | None = None
        self.prev_rho: tuple[float, float, float] | None = None
        self.inner = InnerLoop(
            variant=variant,
            params=scenario.vehicle,
            gains=vg.inner,
            dt=scenario.dt,
            tau_f=scenario.numerics.tau_f,
            attitude_margin=scenario.numerics.attitude_margin,
            u_eps=scenario.numerics.u_eps,
            tau_max=scenario.numerics.tau_max,
        )

    def control(self, state: VehicleState, snapshot, t: float,
                optimize: bool) -> TickDecision:
        e = consensus_error(self.i, snapshot, state.eta1, self.formation, t)
        _, ref_vel, _ = self.formation.reference(t)

        status = STATUS_FIXED
        if self.optimizer is not None:
            if optimize:
                rho_prev = self.prev_rho
                if rho_prev is None:
                    rho_prev = virtual_law(e, self.k, ref_vel)
                problem = build_problem(self.i, snapshot, state.eta1, e,
                                        rho_prev, self.k, self.formation, t,
                                        self.optimizer)
                sol = solve(problem)
                self.k = sol.k_star
                rho = sol.rho_star
                status = sol.status.value
            else:
                # held gains between optimizations; commands stay inside
                # the velocity box the optimizer enforces (exact per-axis
                # clamp, the same constraint the solver works under)
                raw = virtual_law(e, self.k, ref_vel)
                lo, hi = self.optimizer.rho_lo, self.optimizer.rho_hi
                rho = tuple(min(max(raw[j], lo[j]), hi[j]) for j in range(3))
        else:
            rho = virtual_law(e, self.k, ref_vel)
            norm = math.sqrt(rho[0] ** 2 + rho[1] ** 2 + rho[2] ** 2)
            if norm > self.u_cap:
                scale = self.u_cap / norm
                rho = (rho[0] * scale, rho[1] * scale, rho[2] * scale)

        cmd = extract_commands(rho, self.prev_cmd)
        self.prev_cmd = cmd
        self.prev_rho = rho
        result = self.inner.compute(state, cmd)
        return TickDecision(e=e, rho=rho, cmd=cmd, k=self.k, tau=result.tau,
                            z=result.z, shunting=result.shunting,
                            status=status)


def run(scenario: Scenario) -> SimLog:
    """Simulate one scenario deterministically.

    Guard errors abort cleanly: the raised SimAbort names the offending
    vehicle, time and state and carries the partial log.
    """
    scenario.validate()
    variant = scenario.controller
    n = scenario.n
    topology = scenario.topology
    params = scenario.vehicle
    profile = scenario.disturbance
    dt = scenario.dt
    margin = scenario.numerics.attitude_margin
    n_sub = scenario.steps_per_sample
    n_opt = int(round(scenario.optimizer.dt_sample / dt))
    total_steps = int(round(scenario.t_final / dt))

    agents = [VehicleAgent(i, scenario, variant) for i in range(n)]
    states: list[VehicleState] = list(scenario.initial)
    log = SimLog(
        scenario_name=scenario.name,
        variant=variant.value,
        n=n,
        dt=dt,
        dt_sample=scenario.dt_sample,
        rho_lo=tuple(scenario.optimizer.rho_lo),
        rho_hi=tuple(scenario.optimizer.rho_hi),
        records=[],
    )

    def control_all(t: float, optimize: bool) -> list[TickDecision]:
        positions = [s.eta1 for s in states]
        ref_sample = scenario.formation.reference(t)[:2]
        decisions = []
        for i in range(n):
            snap = neighbor_view(topology, i, positions, reference=ref_sample)
            try:
                decisions.append(agents[i].control(states[i], snap, t, optimize))
            except GuardError as exc:
                raise SimAbort(
                    f"vehicle {i + 1} control guard at t = {t:.6g}: {exc}",
                    vehicle=i, t=t, state=states[i], partial_log=log,
                    cause=exc) from exc
        return decisions

    for step in range(total_steps):
        t = step * dt
        is_sample = step % n_sub == 0
        decisions = control_all(t, optimize=step % n_opt == 0 and step > 0)
        if is_sample:
            log.records.append(SimLogRecord(t=t, states=tuple(states),
                                            decisions=tuple(decisions)))
        for i in range(n):
            def dist(offset, _i=i, _t=t):
                return disturbance_at(profile, _i, _t + offset)

            try:
                states[i] = integrate_step(states[i], params,
                                           decisions[i].tau, dist, dt, margin)
            except GuardError as exc:
                raise SimAbort(
                    f"vehicle {i + 1} integration guard over "
                    f"[{t:.6g}, {t + dt:.6g}]: {exc}",
                    vehicle=i, t=t, state=states[i], partial_log=log,
                    cause=exc) from exc

    # closing record at t_final (an optimization instant when it falls on
    # the optimization grid, exactly like any other instant)
    t = total_steps * dt
    decisions = control_all(
        t, optimize=total_steps % n_opt == 0 and total_steps > 0)
    log.records.append(SimLogRecord(t=t, states=tuple(states),
                                    decisions=tuple(decisions)))
    return log


def count_rho_violations(log: SimLog) -> int:
    """(record, axis) pairs where the logged command leaves the box."""
    lo, hi = log.rho_lo, log.rho_hi
    count = 0
    for rec in log.records:
        for dec in rec.decisions:
            for j in range(3):
                if dec.rho[j] < lo[j] or dec.rho[j] > hi[j]:
                    count += 1
    return count


def constraint_statuses(log: SimLog) -> set[str]:
    return {dec.status for rec in log.records for dec in rec.decisions}


def repair_free(log: SimLog) -> bool:
    return SolveStatus.INFEASIBLE_REPAIRED.value not in constraint_statuses(log)

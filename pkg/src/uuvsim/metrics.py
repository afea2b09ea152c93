"""Run-level metric extraction from a simulation log."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import SimLog
from .errors import EmptyLog


@dataclass(frozen=True)
class VehicleMetrics:
    initial_error: float
    settle_threshold: float
    settling_time: float | None       # None = never settled on the horizon
    steady_error_mean: float
    steady_error_max: float
    steady_z_mean: float
    steady_z_max: float
    peak_tau: tuple[float, float, float]
    rho_violations: int               # (record, axis) pairs outside the box
    gains_final: tuple[float, float, float]


@dataclass(frozen=True)
class MetricsReport:
    scenario_name: str
    variant: str
    t_final: float
    settle_fraction: float
    per_vehicle: tuple[VehicleMetrics, ...]

    @property
    def worst_settling(self) -> float | None:
        times = [m.settling_time for m in self.per_vehicle]
        if any(t is None for t in times):
            return None
        return max(times) if times else 0.0

    @property
    def total_violations(self) -> int:
        return sum(m.rho_violations for m in self.per_vehicle)

    def render(self) -> str:
        lines = [
            f"scenario {self.scenario_name}  controller {self.variant}  "
            f"horizon {self.t_final:g} s",
        ]
        for i, m in enumerate(self.per_vehicle, start=1):
            settle = "never" if m.settling_time is None else f"{m.settling_time:.2f} s"
            lines.append(
                f"  vehicle {i}: |e(0)| = {m.initial_error:.4g}, settled "
                f"(< {m.settle_threshold:.3g}) at {settle}; steady |e| "
                f"mean/max = {m.steady_error_mean:.3g}/{m.steady_error_max:.3g}; "
                f"steady z mean/max = {m.steady_z_mean:.3g}/{m.steady_z_max:.3g}")
            lines.append(
                f"             peak |tau| = ({m.peak_tau[0]:.4g}, "
                f"{m.peak_tau[1]:.4g}, {m.peak_tau[2]:.4g}); box violations = "
                f"{m.rho_violations}; final gains = ({m.gains_final[0]:.4g}, "
                f"{m.gains_final[1]:.4g}, {m.gains_final[2]:.4g})")
        return "\n".join(lines)

    def csv_rows(self) -> list[str]:
        rows = ["variant,vehicle,initial_error,settle_threshold,settling_time,"
                "steady_error_mean,steady_error_max,steady_z_mean,steady_z_max,"
                "peak_tau1,peak_tau2,peak_tau3,rho_violations,"
                "k_final_x,k_final_y,k_final_z"]
        for i, m in enumerate(self.per_vehicle, start=1):
            settle = "" if m.settling_time is None else format(m.settling_time, ".9g")
            rows.append(",".join([
                self.variant, str(i),
                format(m.initial_error, ".9g"),
                format(m.settle_threshold, ".9g"),
                settle,
                format(m.steady_error_mean, ".9g"),
                format(m.steady_error_max, ".9g"),
                format(m.steady_z_mean, ".9g"),
                format(m.steady_z_max, ".9g"),
                format(m.peak_tau[0], ".9g"),
                format(m.peak_tau[1], ".9g"),
                format(m.peak_tau[2], ".9g"),
                str(m.rho_violations),
                format(m.gains_final[0], ".9g"),
                format(m.gains_final[1], ".9g"),
                format(m.gains_final[2], ".9g"),
            ]))
        return rows


def _norm3(v) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def compute_metrics(log: SimLog, settle_fraction: float = 0.02,
                    settle_floor: float = 1e-3) -> MetricsReport:
    """Settling, steady-state and effort metrics per vehicle.

    Settling time is the first instant after which ||e_i|| stays below
    max(settle_fraction * ||e_i(0)||, settle_floor); steady-state
    statistics are taken over the last quarter of the horizon.
    """
    if not log.records:
        raise EmptyLog("metrics requested on an empty simulation log")
    times = log.times()
    t_final = times[-1]
    steady_start = 0.75 * t_final
    steady_idx = [k for k, t in enumerate(times) if t >= steady_start]
    if not steady_idx:
        steady_idx = [len(times) - 1]
    lo, hi = log.rho_lo, log.rho_hi

    per_vehicle = []
    for i in range(log.n):
        enorm = [_norm3(rec.decisions[i].e) for rec in log.records]
        z = [rec.decisions[i].z for rec in log.records]
        initial = enorm[0]
        threshold = max(settle_fraction * initial, settle_floor)

        last_violation = None
        for k_idx, val in enumerate(enorm):
            if val >= threshold:
                last_violation = k_idx
        if last_violation is None:
            settling = 0.0
        elif last_violation + 1 < len(times):
            settling = times[last_violation + 1]
        else:
            settling = None

        violations = 0
        for rec in log.records:
            rho = rec.decisions[i].rho
            for j in range(3):
                if rho[j] < lo[j] or rho[j] > hi[j]:
                    violations += 1

        steady_e = [enorm[k] for k in steady_idx]
        steady_z = [z[k] for k in steady_idx]
        taus = [rec.decisions[i].tau.as_tuple() for rec in log.records]
        per_vehicle.append(VehicleMetrics(
            initial_error=initial,
            settle_threshold=threshold,
            settling_time=settling,
            steady_error_mean=sum(steady_e) / len(steady_e),
            steady_error_max=max(steady_e),
            steady_z_mean=sum(steady_z) / len(steady_z),
            steady_z_max=max(steady_z),
            peak_tau=tuple(max(abs(tt[j]) for tt in taus) for j in range(3)),
            rho_violations=violations,
            gains_final=log.records[-1].decisions[i].k,
        ))

    return MetricsReport(
        scenario_name=log.scenario_name,
        variant=log.variant,
        t_final=t_final,
        settle_fraction=settle_fraction,
        per_vehicle=tuple(per_vehicle),
    )

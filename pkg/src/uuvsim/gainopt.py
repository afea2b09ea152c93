"""Online gain optimization: one box-constrained QP per vehicle per sample.

At each sampling instant t_k every vehicle re-tunes its diagonal virtual
gains k = (k1, k2, k3) by minimizing

    J = e1' Q e1 + (rho - ref_vel)' R1 (rho - ref_vel)
        + sum_j p_j (k_j - k_j,prev)^2
        + (rho - rho_prev)' R2 (rho - rho_prev)

    R1 weighs the maneuvering effort around the unavoidable common cruise
    velocity. Weighing the absolute velocity instead would penalize
    keeping pace with the moving reference itself: the stationarity
    condition then parks every vehicle at a standing error of
    R1 |ref_vel| / (Q c dt) on the cruise axis (c the row coupling),
    which no choice of sampling period can push below
    2 sqrt(R1/Q) |ref_vel| once the prediction bias is accounted for.

subject to the one-step prediction

    rho = -diag(k) e0 + ref_vel            (virtual law at sampled data)
    eta_pred = eta0 + rho * dt             (own position moves)
    e1 = sum_j a_ij (eta_pred - eta_j - Delta_ij) + b (eta_pred - ref_pos)

with the velocity box rho_lo <= rho <= rho_hi and positivity k >= k_min
(realizing -diag(k) < 0 strictly). Neighbor positions and the reference
are sampled at t_k and propagated over the prediction step with the
fleet's common reference velocity (the one quantity every vehicle knows
about everyone else); freezing them instead would predict a rising
error for any vehicle that merely keeps pace with the moving reference,
and the optimizer would brake the cruise into a standing offset of at
least 2 sqrt(R1/Q) |ref_vel| on the cruise axis, for every sampling
period.

With diagonal weights the problem separates into three independent
one-dimensional convex quadratics over intervals, each solved exactly by
clamping the unconstrained minimizer; a projected coordinate-descent
fallback covers non-diagonal weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .consensus import FormationSpec, VirtualCommand, extract_commands
from .graph import NeighborSnapshot

#: |e0_j| below this cannot be influenced through k_j (rho_j is pinned).
E0_ZERO_TOL = 1e-9

Vec3 = tuple[float, float, float]


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    CLAMPED_FEASIBLE = "clamped"
    INFEASIBLE_REPAIRED = "repaired"


@dataclass(frozen=True)
class OptimizerConfig:
    """Weights and constraints shared by every vehicle's per-tick QP."""

    Q: Vec3 = (10.0, 10.0, 10.0)       # consensus-error weight (diagonal)
    R1: Vec3 = (1.0, 1.0, 1.0)         # maneuver-effort weight (diagonal)
    R2: Vec3 = (1.0, 1.0, 1.0)         # velocity-change weight (diagonal)
    p: Vec3 = (0.1, 0.1, 0.1)          # gain-change penalties
    rho_lo: Vec3 = (-1.5, -1.5, -1.5)  # velocity box, lower (m/s)
    rho_hi: Vec3 = (1.5, 1.5, 1.5)     # velocity box, upper (m/s)
    k_min: float = 1e-3                # strict-positivity floor on gains
    k_max: float = math.inf            # adapted-gain ceiling (see module doc)
    dt_sample: float = 0.1             # prediction/sampling period (s)

    def __post_init__(self):
        if any(q < 0 for q in self.Q) or any(r < 0 for r in self.R1) \
                or any(r < 0 for r in self.R2) or any(w < 0 for w in self.p):
            raise ValueError("QP weights must be non-negative")
        if any(lo >= hi for lo, hi in zip(self.rho_lo, self.rho_hi)):
            raise ValueError("velocity box must satisfy rho_lo < rho_hi componentwise")
        if self.k_min <= 0.0:
            raise ValueError("k_min must be > 0 (strict gain positivity)")
        if self.k_max <= self.k_min:
            raise ValueError("k_max must exceed k_min")
        if self.dt_sample <= 0.0:
            raise ValueError("dt_sample must be > 0")


@dataclass(frozen=True)
class GainQpProblem:
    """One vehicle's sampled optimization data at a single instant.

    Weight matrices are stored as full 3x3 rows; the shipped scenarios
    only ever populate the diagonals.
    """

    e0: Vec3                      # consensus error at t_k
    eta0: Vec3                    # own position at t_k
    ref_pos: Vec3 | None          # reference position sample (pinned only)
    ref_vel: Vec3                 # reference velocity sample
    rho_prev: Vec3                # previously applied virtual velocity
    k_prev: Vec3                  # gains currently in force
    neighbors: tuple[tuple[float, Vec3, Vec3], ...]  # (a_ij, eta_j, Delta_ij)
    b_i: float                    # pinning gain
    Q: tuple                      # 3x3
    R1: tuple                     # 3x3
    R2: tuple                     # 3x3
    p: Vec3
    dt_sample: float
    rho_lo: Vec3
    rho_hi: Vec3
    k_min: float
    k_max: float = math.inf
    drift: Vec3 = (0.0, 0.0, 0.0)  # dt * common velocity applied to
    #                                neighbor and reference predictions


@dataclass(frozen=True)
class GainQpSolution:
    k_star: Vec3
    rho_star: Vec3
    objective: float
    status: SolveStatus


def _diag3(v: Vec3) -> tuple:
    return ((v[0], 0.0, 0.0), (0.0, v[1], 0.0), (0.0, 0.0, v[2]))


def _is_diagonal(m) -> bool:
    return all(m[i][j] == 0.0 for i in range(3) for j in range(3) if i != j)


def build_problem(i: int, snapshot: NeighborSnapshot, own_eta1: Vec3,
                  e0: Vec3, rho_prev: Vec3, k_prev: Vec3,
                  formation: FormationSpec, t: float,
                  cfg: OptimizerConfig) -> GainQpProblem:
    """Sample every quantity the minimization needs at instant t.

    The own position is propagated by rho * dt; neighbors and the
    reference are propagated by the common reference velocity.
    """
    nbrs = tuple(
        (a_ij, pos_j, formation.delta(i, j))
        for j, a_ij, pos_j in snapshot.neighbors
    )
    ref_pos = None
    if snapshot.b_i > 0.0 and snapshot.reference is not None:
        # the pinned prediction tracks the vehicle's own desired position
        ref_pos = formation.desired_position(i, tuple(snapshot.reference[0]))
    _, ref_vel, _ = formation.reference(t)
    drift = (ref_vel[0] * cfg.dt_sample, ref_vel[1] * cfg.dt_sample,
             ref_vel[2] * cfg.dt_sample)
    return GainQpProblem(
        e0=tuple(e0),
        eta0=tuple(own_eta1),
        ref_pos=ref_pos,
        ref_vel=tuple(ref_vel),
        rho_prev=tuple(rho_prev),
        k_prev=tuple(k_prev),
        neighbors=nbrs,
        b_i=snapshot.b_i,
        drift=drift,
        Q=_diag3(cfg.Q),
        R1=_diag3(cfg.R1),
        R2=_diag3(cfg.R2),
        p=tuple(cfg.p),
        dt_sample=cfg.dt_sample,
        rho_lo=tuple(cfg.rho_lo),
        rho_hi=tuple(cfg.rho_hi),
        k_min=cfg.k_min,
        k_max=cfg.k_max,
    )


def _error_affine(p: GainQpProblem) -> tuple[Vec3, float]:
    """Predicted error as e1 = base + coupling * dt * rho (exact).

    ``base`` is the neighbor/reference sum at rho = 0 with everyone else
    advanced by the common drift; ``coupling`` is sum_j a_ij + b_i, the
    weight on the own predicted position.
    """
    bx = by = bz = 0.0
    coupling = p.b_i
    ox, oy, oz = p.eta0
    gx, gy, gz = p.drift
    for a_ij, pos_j, delta in p.neighbors:
        bx += a_ij * (ox - pos_j[0] - gx - delta[0])
        by += a_ij * (oy - pos_j[1] - gy - delta[1])
        bz += a_ij * (oz - pos_j[2] - gz - delta[2])
        coupling += a_ij
    if p.b_i > 0.0:
        if p.ref_pos is None:
            raise ValueError("pinned vehicle requires a reference position sample")
        bx += p.b_i * (ox - p.ref_pos[0] - gx)
        by += p.b_i * (oy - p.ref_pos[1] - gy)
        bz += p.b_i * (oz - p.ref_pos[2] - gz)
    return (bx, by, bz), coupling


def objective_value(p: GainQpProblem, k) -> float:
    """J of the stated minimization at gains k (any 3x3 weights)."""
    base, coupling = _error_affine(p)
    e0 = np.asarray(p.e0)
    rho = -np.asarray(k) * e0 + np.asarray(p.ref_vel)
    e1 = np.asarray(base) + coupling * p.dt_sample * rho
    dk = np.asarray(k) - np.asarray(p.k_prev)
    eff = rho - np.asarray(p.ref_vel)   # maneuvering effort around cruise
    drho = rho - np.asarray(p.rho_prev)
    Q = np.asarray(p.Q)
    R1 = np.asarray(p.R1)
    R2 = np.asarray(p.R2)
    return float(e1 @ Q @ e1 + eff @ R1 @ eff
                 + np.asarray(p.p) @ (dk * dk) + drho @ R2 @ drho)


def _axis_interval(e0_j: float, rv_j: float, lo: float, hi: float,
                   k_min: float, k_max: float) -> tuple[float, float] | None:
    """Feasible k-interval induced by the rho box, intersected with
    [k_min, k_max]. None when empty. Axes with negligible e0 are handled
    by the caller."""
    a = -e0_j  # d rho / d k
    if a > 0.0:
        k_lo, k_hi = (lo - rv_j) / a, (hi - rv_j) / a
    else:
        k_lo, k_hi = (hi - rv_j) / a, (lo - rv_j) / a
    k_lo = max(k_lo, k_min)
    k_hi = min(k_hi, k_max)
    if k_lo > k_hi:
        return None
    return (k_lo, k_hi)


def solve(p: GainQpProblem) -> GainQpSolution:
    """Exact separable solve (diagonal weights) with projected
    coordinate-descent fallback for non-diagonal weights."""
    if _is_diagonal(p.Q) and _is_diagonal(p.R1) and _is_diagonal(p.R2):
        return _solve_separable(p)
    return _solve_coordinate_descent(p)


def _solve_separable(p: GainQpProblem) -> GainQpSolution:
    base, coupling = _error_affine(p)
    cdt = coupling * p.dt_sample
    k_star = [0.0, 0.0, 0.0]
    rho_star = [0.0, 0.0, 0.0]
    status = SolveStatus.OPTIMAL

    for j in range(3):
        e0_j = p.e0[j]
        rv = p.ref_vel[j]
        lo, hi = p.rho_lo[j], p.rho_hi[j]
        qw = p.Q[j][j]
        r1 = p.R1[j][j]
        r2 = p.R2[j][j]
        pw = p.p[j]
        k0 = p.k_prev[j]
        rp = p.rho_prev[j]

        if abs(e0_j) < E0_ZERO_TOL:
            # k_j cannot move rho_j; only the gain-change penalty acts.
            k_j = min(max(k0, p.k_min), p.k_max)
            if lo <= rv <= hi:
                k_star[j], rho_star[j] = k_j, rv
            else:
                k_star[j] = k_j
                rho_star[j] = min(max(rv, lo), hi)
                status = SolveStatus.INFEASIBLE_REPAIRED
            continue

        interval = _axis_interval(e0_j, rv, lo, hi, p.k_min, p.k_max)
        if interval is None:
            # No admissible k puts rho_j inside the box: the box-induced
            # k-range lies entirely below k_min or above k_max. Take the
            # nearest admissible gain and project the command onto the box.
            a = -e0_j
            box_hi = (hi - rv) / a if a > 0.0 else (lo - rv) / a
            k_j = p.k_min if box_hi < p.k_min else p.k_max
            k_star[j] = k_j
            rho_star[j] = min(max(-k_j * e0_j + rv, lo), hi)
            status = SolveStatus.INFEASIBLE_REPAIRED
            continue

        # rho = A k + rv (so rho - rv = A k), e1 = alpha + beta k
        a_coef = -e0_j
        alpha = base[j] + cdt * rv
        beta = cdt * a_coef
        a2 = qw * beta * beta + r1 * a_coef * a_coef + pw + r2 * a_coef * a_coef
        a1 = 2.0 * (qw * alpha * beta - pw * k0
                    + r2 * a_coef * (rv - rp))
        if a2 > 0.0:
            k_unc = -a1 / (2.0 * a2)
        else:
            k_unc = k0  # J constant in k_j; keep the previous gain
        k_lo, k_hi = interval
        k_j = min(max(k_unc, k_lo), k_hi)
        if k_j != k_unc and status is SolveStatus.OPTIMAL:
            status = SolveStatus.CLAMPED_FEASIBLE
        k_star[j] = k_j
        # final projection absorbs the last-ulp roundoff of (hi-rv)/A * A
        rho_star[j] = min(max(-k_j * e0_j + rv, lo), hi)

    k_t = (k_star[0], k_star[1], k_star[2])
    return GainQpSolution(
        k_star=k_t,
        rho_star=(rho_star[0], rho_star[1], rho_star[2]),
        objective=objective_value(p, k_t),
        status=status,
    )


def _solve_coordinate_descent(p: GainQpProblem, tol: float = 1e-10,
                              max_sweeps: int = 500) -> GainQpSolution:
    base, coupling = _error_affine(p)
    e0 = np.asarray(p.e0)
    rv = np.asarray(p.ref_vel)
    M = np.diag(-e0)                      # d rho / d k
    G = coupling * p.dt_sample * M        # d e1 / d k
    alpha_v = np.asarray(base) + coupling * p.dt_sample * rv
    Q = np.asarray(p.Q)
    R1 = np.asarray(p.R1)
    R2 = np.asarray(p.R2)
    P = np.diag(p.p)
    k0 = np.asarray(p.k_prev)
    rp = np.asarray(p.rho_prev)
    H = 2.0 * (G.T @ Q @ G + M.T @ R1 @ M + P + M.T @ R2 @ M)

    intervals = []
    status = SolveStatus.OPTIMAL
    for j in range(3):
        if abs(e0[j]) < E0_ZERO_TOL:
            kj = min(max(p.k_prev[j], p.k_min), p.k_max)
            intervals.append((kj, kj))
            if not p.rho_lo[j] <= rv[j] <= p.rho_hi[j]:
                status = SolveStatus.INFEASIBLE_REPAIRED
        else:
            iv = _axis_interval(e0[j], rv[j], p.rho_lo[j], p.rho_hi[j],
                                p.k_min, p.k_max)
            if iv is None:
                intervals.append((p.k_min, p.k_min))
                status = SolveStatus.INFEASIBLE_REPAIRED
            else:
                intervals.append(iv)

    k = np.array([min(max(k0[j], intervals[j][0]), intervals[j][1])
                  for j in range(3)])
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(3):
            rho = M @ k + rv
            e1 = alpha_v + G @ k
            grad_j = 2.0 * (G[:, j] @ Q @ e1 + M[:, j] @ R1 @ (rho - rv)
                            + p.p[j] * (k[j] - k0[j]) + M[:, j] @ R2 @ (rho - rp))
            if H[j, j] <= 0.0:
                continue
            new_kj = min(max(k[j] - grad_j / H[j, j], intervals[j][0]),
                         intervals[j][1])
            delta = max(delta, abs(new_kj - k[j]))
            k[j] = new_kj
        if delta < tol:
            break

    rho_star = np.clip(M @ k + rv, p.rho_lo, p.rho_hi)
    if status is SolveStatus.OPTIMAL:
        for j in range(3):
            lo_j, hi_j = intervals[j]
            if lo_j < hi_j and (k[j] == lo_j or k[j] == hi_j):
                status = SolveStatus.CLAMPED_FEASIBLE
                break
    return GainQpSolution(
        k_star=tuple(float(x) for x in k),
        rho_star=tuple(float(x) for x in rho_star),
        objective=objective_value(p, k),
        status=status,
    )


def apply_solution(sol: GainQpSolution,
                   prev: VirtualCommand | None = None) -> VirtualCommand:
    """Turn the optimized virtual velocity into attitude/speed commands."""
    return extract_commands(sol.rho_star, prev)

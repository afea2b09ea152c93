"""Consensus formation-tracking layer.

Per vehicle, the tracking error couples the own position to neighbors
and (if pinned) to the reference:

    e_i = sum_j a_ij (eta_i1 - eta_j1 - Delta_ij) + b_i (eta_i1 - eta_d(t))

The velocity-level virtual law is rho_i = -K_i1 e_i + eta_d_dot, and the
commanded resultant speed / transformed attitude follow from the exact
re-parameterization

    rho = u_cmd * (cos(theta_cmd) cos(psi_cmd),
                   cos(theta_cmd) sin(psi_cmd),
                   -sin(theta_cmd)).

psi_cmd is resolved on the full circle with atan2(rho_y, rho_x) and then
unwrapped against the previous command so the attitude error signal
never jumps by 2*pi between ticks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import MissingDelta, NonPositiveGain
from .graph import NeighborSnapshot

#: Commanded-speed floor below which the attitude commands are held.
U_CMD_EPS = 1e-6

_THETA_CLAMP = math.pi / 2 - 1e-6

Vec3 = tuple[float, float, float]

#: Reference sample: (position, velocity, acceleration), each a Vec3.
ReferenceFn = Callable[[float], tuple[Vec3, Vec3, Vec3]]


@dataclass(frozen=True)
class FormationSpec:
    """Desired relative offsets plus the shared reference trajectory.

    ``deltas`` maps ordered vehicle pairs (i, j) to Delta_ij, the desired
    value of eta_i1 - eta_j1. Where both directions are given they must
    be negatives of each other.

    Each vehicle tracks its own desired position eta_i^d(t) =
    eta_d(t) + offset_i, where the constant station offsets are chained
    from the pairwise deltas with vehicle 1 as the anchor (offset_0 = 0,
    so the published trajectory is vehicle 1's). All desired velocities
    are therefore identical, as the stacked error dynamics require.
    """

    deltas: dict[tuple[int, int], Vec3]
    reference: ReferenceFn
    n: int = 0  # 0: infer from the delta keys

    def __post_init__(self):
        for (i, j), d in self.deltas.items():
            back = self.deltas.get((j, i))
            if back is not None:
                if any(abs(a + b) > 1e-12 for a, b in zip(d, back)):
                    raise ValueError(
                        f"formation offsets are inconsistent: Delta[{i},{j}] "
                        f"!= -Delta[{j},{i}]"
                    )
        n = self.n
        if n == 0:
            n = 1 + max((max(i, j) for i, j in self.deltas), default=0)
            object.__setattr__(self, "n", n)
        object.__setattr__(self, "offsets", self._chain_offsets(n))

    def _chain_offsets(self, n: int) -> tuple[Vec3, ...]:
        """Station offsets by breadth-first chaining over the delta pairs.

        offset_i - offset_j = Delta_ij along every traversed pair; a
        cycle whose deltas disagree with the chained values is rejected.
        Vehicles unreachable through any delta hold station on the
        reference itself (offset zero).
        """
        adjacency: dict[int, list[int]] = {k: [] for k in range(n)}
        for (i, j) in self.deltas:
            adjacency[i].append(j)
            adjacency[j].append(i)
        offsets: list[Vec3 | None] = [None] * n
        offsets[0] = (0.0, 0.0, 0.0)
        queue = [0]
        while queue:
            i = queue.pop(0)
            for j in adjacency[i]:
                d = self.delta(i, j)  # offset_i - offset_j
                cand = (offsets[i][0] - d[0], offsets[i][1] - d[1],
                        offsets[i][2] - d[2])
                if offsets[j] is None:
                    offsets[j] = cand
                    queue.append(j)
                elif any(abs(a - b) > 1e-9 for a, b in zip(offsets[j], cand)):
                    raise ValueError(
                        f"formation offsets are inconsistent around a cycle "
                        f"through vehicles {i + 1} and {j + 1}")
        return tuple(o if o is not None else (0.0, 0.0, 0.0) for o in offsets)

    def delta(self, i: int, j: int) -> Vec3:
        d = self.deltas.get((i, j))
        if d is None:
            back = self.deltas.get((j, i))
            if back is not None:
                return (-back[0], -back[1], -back[2])
            raise MissingDelta(f"edge ({i}, {j}) carries no formation offset")
        return d

    def desired_position(self, i: int, ref_pos: Vec3) -> Vec3:
        """eta_i^d sample: the shared reference plus vehicle i's station."""
        off = self.offsets[i]
        return (ref_pos[0] + off[0], ref_pos[1] + off[1], ref_pos[2] + off[2])


@dataclass(frozen=True)
class VirtualCommand:
    """Virtual velocity rho and the commands extracted from it."""

    rho: Vec3
    u_cmd: float       # commanded resultant speed, >= 0 (m/s)
    theta_cmd: float   # commanded transformed pitch (rad)
    psi_cmd: float     # commanded transformed yaw (rad), unwrapped
    clamped: bool = False  # theta_cmd hit the near-vertical clamp


def reconstruct_rho(u_cmd: float, theta_cmd: float, psi_cmd: float) -> Vec3:
    """Forward map from commands back to the virtual velocity vector."""
    c = u_cmd * math.cos(theta_cmd)
    return (c * math.cos(psi_cmd),
            c * math.sin(psi_cmd),
            -u_cmd * math.sin(theta_cmd))


def consensus_error(i: int, snapshot: NeighborSnapshot, own_eta1: Vec3,
                    spec: FormationSpec, t: float) -> Vec3:
    """Formation tracking error of vehicle i from neighbor data only."""
    ex = ey = ez = 0.0
    ox, oy, oz = own_eta1
    for j, a_ij, pos_j in snapshot.neighbors:
        dx, dy, dz = spec.delta(i, j)
        ex += a_ij * (ox - pos_j[0] - dx)
        ey += a_ij * (oy - pos_j[1] - dy)
        ez += a_ij * (oz - pos_j[2] - dz)
    if snapshot.b_i > 0.0:
        ref_pos, _, _ = spec.reference(t)
        dx, dy, dz = spec.desired_position(i, ref_pos)
        ex += snapshot.b_i * (ox - dx)
        ey += snapshot.b_i * (oy - dy)
        ez += snapshot.b_i * (oz - dz)
    return (ex, ey, ez)


def virtual_law(e: Vec3, k_gain, ref_vel: Vec3) -> Vec3:
    """rho = -diag(k) e + reference velocity; gains must be positive."""
    k1, k2, k3 = k_gain
    if k1 <= 0.0 or k2 <= 0.0 or k3 <= 0.0:
        raise NonPositiveGain(
            f"virtual gains must be strictly positive, got {tuple(k_gain)}"
        )
    return (-k1 * e[0] + ref_vel[0],
            -k2 * e[1] + ref_vel[1],
            -k3 * e[2] + ref_vel[2])


def extract_commands(rho: Vec3, prev: VirtualCommand | None = None,
                     u_eps: float = U_CMD_EPS) -> VirtualCommand:
    """Resolve (u_cmd, theta_cmd, psi_cmd) from the virtual velocity.

    Degenerate rho (norm below the floor) holds the previous attitude
    commands with u_cmd = 0. theta_cmd is clamped just inside +-pi/2
    when rho is nearly vertical. psi_cmd is unwrapped so consecutive
    commands differ by at most pi.
    """
    rx, ry, rz = rho
    u_cmd = math.sqrt(rx * rx + ry * ry + rz * rz)
    if u_cmd < u_eps:
        if prev is not None:
            return VirtualCommand(rho, 0.0, prev.theta_cmd, prev.psi_cmd)
        return VirtualCommand(rho, 0.0, 0.0, 0.0)

    clamped = False
    s = max(-1.0, min(1.0, rz / u_cmd))
    theta_cmd = -math.asin(s)
    if abs(theta_cmd) > _THETA_CLAMP:
        theta_cmd = math.copysign(_THETA_CLAMP, theta_cmd)
        clamped = True

    psi_cmd = math.atan2(ry, rx)
    if prev is not None:
        # keep |psi_cmd(t_k) - psi_cmd(t_{k-1})| <= pi
        psi_cmd = prev.psi_cmd + math.remainder(psi_cmd - prev.psi_cmd, math.tau)
    return VirtualCommand(rho, u_cmd, theta_cmd, psi_cmd, clamped)

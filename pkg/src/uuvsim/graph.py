"""Communication topology of the fleet and its Laplacian/pinning algebra.

The fleet graph is weighted and directed: a_ij > 0 means vehicle i can
receive vehicle j's state. b_i > 0 means vehicle i additionally receives
the reference trajectory. With in-degree d_i = sum_j a_ij, D = diag(d),
the Laplacian is L = D - A. The scenario is admissible when the
undirected support of A is connected and at least one b_i is positive;
then L + B is positive definite (checked numerically on its symmetric
part).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraph, IndexOutOfRange, NoPinnedVehicle

#: Minimum eigenvalue of sym(L+B) accepted as "positive definite".
PD_TOLERANCE = 1e-10


@dataclass(frozen=True)
class FleetTopology:
    """Immutable weighted digraph with pinning gains.

    adjacency is an n x n matrix with zero diagonal and non-negative
    weights; pinning is the length-n vector of b_i >= 0.
    """

    n: int
    adjacency: np.ndarray
    pinning: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        b = np.asarray(self.pinning, dtype=float)
        if a.shape != (self.n, self.n):
            raise ValueError(f"adjacency must be {self.n}x{self.n}, got {a.shape}")
        if b.shape != (self.n,):
            raise ValueError(f"pinning must have length {self.n}, got {b.shape}")
        if np.any(a < 0.0) or np.any(b < 0.0):
            raise ValueError("edge weights and pinning gains must be non-negative")
        if np.any(np.diag(a) != 0.0):
            raise ValueError("self-loops are not allowed (a_ii must be 0)")
        object.__setattr__(self, "adjacency", a)
        object.__setattr__(self, "pinning", b)
        a.setflags(write=False)
        b.setflags(write=False)

    @property
    def degree(self) -> np.ndarray:
        return np.diag(self.adjacency.sum(axis=1))

    @property
    def laplacian(self) -> np.ndarray:
        return self.degree - self.adjacency

    @property
    def lb(self) -> np.ndarray:
        """L + B."""
        return self.laplacian + np.diag(self.pinning)

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Indices j with a_ij > 0 (vehicles i listens to)."""
        return tuple(int(j) for j in np.nonzero(self.adjacency[i])[0])

    def coupling(self, i: int) -> float:
        """d_i + b_i: total weight multiplying the own position in e_i."""
        return float(self.adjacency[i].sum() + self.pinning[i])


@dataclass(frozen=True)
class ValidationReport:
    connected: bool                 # whole undirected support in one piece
    strongly_connected: bool        # digraph strong connectivity (advisory)
    has_pinned: bool
    every_component_pinned: bool    # each undirected component sees the reference
    min_eig_sym_lb: float
    positive_definite: bool

    @property
    def valid(self) -> bool:
        return (self.has_pinned and self.every_component_pinned
                and self.positive_definite)


@dataclass(frozen=True)
class NeighborSnapshot:
    """Everything vehicle i is allowed to see at one sample instant.

    This is the distributed-information contract: neighbor positions for
    a_ij > 0, the own pinning gain, and the reference sample only when
    pinned. No other vehicle state is reachable through this object.
    """

    i: int
    b_i: float
    neighbors: tuple[tuple[int, float, tuple[float, float, float]], ...]
    reference: tuple | None  # (pos, vel) sample, present only when b_i > 0


def _reach(adjacency: np.ndarray, start: int) -> set[int]:
    """Vertices reachable from ``start`` along positive entries."""
    seen = {start}
    stack = [start]
    while stack:
        k = stack.pop()
        for j in np.nonzero(adjacency[k])[0]:
            j = int(j)
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def validate_topology(t: FleetTopology, raise_on_error: bool = True) -> ValidationReport:
    """Check connectivity, pinning and positive definiteness of L + B.

    Connectivity is evaluated on the undirected support of A; strong
    connectivity of the digraph is advisory. The hard admissibility rule
    is that the reference must be visible everywhere: at least one b_i
    is positive (NoPinnedVehicle otherwise) and every undirected
    component contains a pinned vehicle (DisconnectedGraph otherwise) --
    a fully pinned edgeless fleet is admissible, an unpinned island is
    not. The numerical verdict on sym(L+B) completes the check: for
    strongly asymmetric directed weights connectivity alone does not
    guarantee definiteness.
    """
    und = np.maximum(t.adjacency, t.adjacency.T)
    connected = len(_reach(und, 0)) == t.n if t.n > 0 else True
    strongly = all(len(_reach(t.adjacency, i)) == t.n for i in range(t.n))
    has_pinned = bool(np.any(t.pinning > 0.0))

    every_component_pinned = True
    unseen = set(range(t.n))
    while unseen:
        component = _reach(und, next(iter(unseen)))
        unseen -= component
        if not any(t.pinning[k] > 0.0 for k in component):
            every_component_pinned = False

    lb = t.lb
    sym = 0.5 * (lb + lb.T)
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    report = ValidationReport(
        connected=connected,
        strongly_connected=strongly,
        has_pinned=has_pinned,
        every_component_pinned=every_component_pinned,
        min_eig_sym_lb=min_eig,
        positive_definite=min_eig > PD_TOLERANCE,
    )
    if raise_on_error:
        if not has_pinned:
            raise NoPinnedVehicle(
                "no vehicle is pinned to the reference: all b_i = 0 "
                "(topology assumption)"
            )
        if not every_component_pinned:
            raise DisconnectedGraph(
                "communication graph has a component with no pinned vehicle "
                "(topology assumption)"
            )
    return report


def neighbor_view(t: FleetTopology, i: int, positions,
                  reference=None) -> NeighborSnapshot:
    """Build vehicle i's view of the fleet at one instant.

    ``positions`` is the full per-vehicle sequence of eta1 triples (the
    engine-side snapshot); only entries with a_ij > 0 are copied out.
    ``reference`` is the (pos, vel) sample, attached only when b_i > 0.
    """
    if not 0 <= i < t.n:
        raise IndexOutOfRange(f"vehicle index {i} outside fleet of {t.n}")
    nbrs = tuple(
        (j, float(t.adjacency[i, j]), tuple(positions[j]))
        for j in t.neighbors(i)
    )
    b_i = float(t.pinning[i])
    return NeighborSnapshot(
        i=i,
        b_i=b_i,
        neighbors=nbrs,
        reference=reference if b_i > 0.0 else None,
    )

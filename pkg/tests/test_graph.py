"""Topology validation and the distributed-information contract.

Positive definiteness of sym(L+B) is cross-checked against two
independent oracles: a Cholesky factorization attempt and Sylvester's
leading-principal-minor criterion.
"""

import numpy as np
import pytest

from uuvsim import FleetTopology, neighbor_view, validate_topology
from uuvsim.errors import DisconnectedGraph, IndexOutOfRange, NoPinnedVehicle

# Chain topology of the four-vehicle experiment
SV_ADJ = np.array([
    [0.0, 0.8, 0.0, 0.0],
    [1.0, 0.0, 0.8, 0.0],
    [0.0, 1.0, 0.0, 0.8],
    [0.0, 0.0, 1.0, 0.0],
])
SV_PIN = np.array([1.0, 1.0, 1.0, 1.0])


def sv_topology() -> FleetTopology:
    return FleetTopology(n=4, adjacency=SV_ADJ, pinning=SV_PIN)


def _pd_oracle(m: np.ndarray) -> bool:
    """Independent positive-definiteness check: Cholesky + Sylvester."""
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    minors_positive = all(
        np.linalg.det(m[:k, :k]) > 0.0 for k in range(1, m.shape[0] + 1))
    return minors_positive


def test_sv_topology_valid_and_pd():
    t = sv_topology()
    report = validate_topology(t)
    assert report.valid
    assert report.min_eig_sym_lb > 0.0
    sym = 0.5 * (t.lb + t.lb.T)
    assert _pd_oracle(sym)


def test_laplacian_row_sums_zero():
    t = sv_topology()
    assert np.allclose(t.laplacian.sum(axis=1), 0.0, atol=1e-14)


def test_isolated_pinned_fleet_gives_identity():
    # no edges at all, but every vehicle sees the reference: admissible
    t = FleetTopology(n=3, adjacency=np.zeros((3, 3)), pinning=np.ones(3))
    report = validate_topology(t)
    assert report.valid
    assert not report.connected and report.every_component_pinned
    assert np.allclose(t.lb, np.eye(3))
    assert report.min_eig_sym_lb == pytest.approx(1.0)


def test_no_pinned_vehicle_rejected():
    t = FleetTopology(n=4, adjacency=SV_ADJ, pinning=np.zeros(4))
    with pytest.raises(NoPinnedVehicle):
        validate_topology(t)
    report = validate_topology(t, raise_on_error=False)
    assert not report.valid and not report.has_pinned


def test_disconnected_graph_rejected():
    adj = np.zeros((4, 4))
    adj[0, 1] = adj[1, 0] = 1.0  # {0,1} and {2,3} islands
    adj[2, 3] = adj[3, 2] = 1.0
    t = FleetTopology(n=4, adjacency=adj, pinning=np.array([1.0, 0, 0, 0]))
    with pytest.raises(DisconnectedGraph):
        validate_topology(t)


def test_random_connected_graphs_all_pd():
    """Random undirected weighted connected graphs (spanning tree plus
    extra edges) up to n = 8 with at least one pinned vehicle always
    give PD sym(L+B); checked against the independent oracle."""
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        adj = np.zeros((n, n))
        for k in range(1, n):  # random spanning tree
            parent = int(rng.integers(0, k))
            w = rng.uniform(0.1, 2.0)
            adj[k, parent] = w
            adj[parent, k] = w
        for _ in range(int(rng.integers(0, n))):  # extra undirected edges
            i, j = rng.integers(0, n, size=2)
            if i != j:
                w = rng.uniform(0.1, 2.0)
                adj[i, j] = adj[j, i] = w
        pin = np.zeros(n)
        pinned = rng.integers(0, n, size=max(1, int(rng.integers(1, n + 1))))
        pin[pinned] = rng.uniform(0.5, 2.0, size=len(pinned))
        t = FleetTopology(n=n, adjacency=adj, pinning=pin)
        report = validate_topology(t)
        assert report.valid
        sym = 0.5 * (t.lb + t.lb.T)
        assert _pd_oracle(sym)
        assert report.min_eig_sym_lb > 0.0


def test_asymmetric_digraph_can_defeat_definiteness():
    """Directed weights can break sym(L+B) definiteness even with the
    support connected and a vehicle pinned; the numerical verdict must
    catch it (connectivity alone is not a sufficient certificate)."""
    adj = np.array([[0.0, 10.0], [0.0, 0.0]])  # 1 listens to 2, not back
    t = FleetTopology(n=2, adjacency=adj, pinning=np.array([0.0, 1.0]))
    report = validate_topology(t, raise_on_error=False)
    assert report.has_pinned and report.every_component_pinned
    assert not report.positive_definite
    assert not report.valid
    sym = 0.5 * (t.lb + t.lb.T)
    assert not _pd_oracle(sym)


def test_neighbor_view_sv_vehicle_one():
    t = sv_topology()
    positions = [(0.0, 0.0, 0.0), (-1.0, -10.0, 0.0),
                 (8.5, -10.1, 0.0), (8.4, -0.1, 0.0)]
    snap = neighbor_view(t, 0, positions, reference=((5.0, 1.0, 5.0),
                                                     (0.7, 0.1, 0.0)))
    assert len(snap.neighbors) == 1
    j, weight, pos = snap.neighbors[0]
    assert (j, weight) == (1, 0.8)
    assert pos == (-1.0, -10.0, 0.0)
    assert snap.b_i == 1.0
    assert snap.reference is not None


def test_neighbor_view_isolated_pinned_node():
    t = FleetTopology(n=2, adjacency=np.zeros((2, 2)),
                      pinning=np.array([1.0, 1.0]))
    snap = neighbor_view(t, 0, [(0, 0, 0), (9, 9, 9)], reference=("p", "v"))
    assert snap.neighbors == ()
    assert snap.reference == ("p", "v")


def test_neighbor_view_unpinned_gets_no_reference():
    t = FleetTopology(n=2, adjacency=np.array([[0.0, 1.0], [1.0, 0.0]]),
                      pinning=np.array([1.0, 0.0]))
    snap = neighbor_view(t, 1, [(0, 0, 0), (1, 1, 1)], reference=("p", "v"))
    assert snap.reference is None


def test_neighbor_view_index_out_of_range():
    t = sv_topology()
    with pytest.raises(IndexOutOfRange):
        neighbor_view(t, 4, [(0, 0, 0)] * 4)


def test_neighbor_view_never_exposes_non_neighbors():
    """Sentinel positions of non-neighbors must be unreachable."""
    t = sv_topology()
    sentinel = (1e9, -1e9, 1e9)
    positions = [sentinel, (1.0, 2.0, 3.0), sentinel, sentinel]
    snap = neighbor_view(t, 0, positions)  # vehicle 1 sees only vehicle 2
    exposed = [pos for _, _, pos in snap.neighbors]
    assert sentinel not in exposed
    assert exposed == [(1.0, 2.0, 3.0)]

"""Communication graph among follower vehicles and consensus tracking errors.

The fleet is an undirected weighted graph over the N followers plus a pinning
vector that marks which followers receive the virtual leader's reference
directly.  Consensus errors weight each vehicle's pose mismatch against its
neighbours (offset by the desired formation geometry) and against the leader
for pinned vehicles:

    e1_i = sum_j a_ij (eta_i - eta_j - delta_ij) + b_i (eta_i - eta_d - delta_id)
    e2_i = sum_j a_ij (etadot_i - etadot_j)      + b_i (etadot_i - etadot_d)

Stacked quantities use agent-major ordering: a stacked 6N vector is the
concatenation of agent 0's six pose components, then agent 1's, and so on.
Matrix actions on stacked vectors are always blockwise, i.e. (H kron I_6).
"""

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NotLeaderConnected

DOF = 6


def _as_offset(value):
    """Normalize a formation offset to a 6-vector, padding 3-vectors with zero attitude."""
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.size == 3:
        arr = np.concatenate([arr, np.zeros(3)])
    if arr.size != DOF:
        raise DimensionMismatch(f"formation offset must have 3 or 6 components, got {arr.size}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FormationGraph:
    """Undirected weighted adjacency plus leader pinning gains.

    adjacency[i, j] > 0 is the edge weight between followers i and j;
    pinning[i] > 0 means follower i hears the leader directly.
    """

    adjacency: np.ndarray
    pinning: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=float)
        pin = np.asarray(self.pinning, dtype=float).reshape(-1)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise DimensionMismatch(f"adjacency must be square, got shape {adj.shape}")
        if pin.size != adj.shape[0]:
            raise DimensionMismatch(
                f"pinning length {pin.size} does not match {adj.shape[0]} agents"
            )
        if not np.allclose(adj, adj.T, rtol=0.0, atol=1e-12):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0.0):
            raise ValueError("adjacency diagonal must be zero")
        if np.any(adj < 0.0):
            raise ValueError("adjacency weights must be nonnegative")
        if np.any(pin < 0.0):
            raise ValueError("pinning gains must be nonnegative")
        if not np.any(pin > 0.0):
            raise NotLeaderConnected("at least one agent must be pinned to the leader")
        adj.flags.writeable = False
        pin.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "pinning", pin)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def leader_reachable(self) -> bool:
        """True when every agent reaches a pinned agent through positive-weight edges."""
        seen = set(np.flatnonzero(self.pinning > 0.0).tolist())
        frontier = deque(seen)
        while frontier:
            i = frontier.popleft()
            for j in np.flatnonzero(self.adjacency[i] > 0.0):
                if j not in seen:
                    seen.add(int(j))
                    frontier.append(int(j))
        return len(seen) == self.n


@dataclass(frozen=True)
class FormationSpec:
    """Desired relative poses: offsets[(i, j)] between followers, leader_offsets[i] to the leader.

    Offsets are 6-vectors (3-vectors are padded with zero attitude) and must be
    stored antisymmetrically: offsets[(i, j)] == -offsets[(j, i)].
    """

    offsets: dict
    leader_offsets: dict

    def __post_init__(self):
        offs = {
            (int(i), int(j)): _as_offset(v) for (i, j), v in self.offsets.items()
        }
        louts = {int(i): _as_offset(v) for i, v in self.leader_offsets.items()}
        for (i, j), v in offs.items():
            if i == j:
                raise ValueError(f"offset ({i},{j}) relates an agent to itself")
            if (j, i) not in offs:
                raise ValueError(f"offset ({i},{j}) is missing its mirror ({j},{i})")
            if not np.allclose(v, -offs[(j, i)], rtol=0.0, atol=1e-12):
                raise ValueError(f"offsets ({i},{j}) and ({j},{i}) are not antisymmetric")
        object.__setattr__(self, "offsets", offs)
        object.__setattr__(self, "leader_offsets", louts)


def validate_formation(graph: FormationGraph, spec: FormationSpec) -> None:
    """Check that offsets exist exactly for graph edges and pinned agents."""
    edges = {
        (int(i), int(j))
        for i, j in zip(*np.nonzero(graph.adjacency > 0.0))
    }
    stored = set(spec.offsets.keys())
    if stored != edges:
        missing = sorted(edges - stored)
        extra = sorted(stored - edges)
        raise ValueError(
            f"offsets must match graph edges exactly; missing {missing}, extra {extra}"
        )
    pinned = set(np.flatnonzero(graph.pinning > 0.0).tolist())
    if set(spec.leader_offsets.keys()) != pinned:
        raise ValueError(
            f"leader offsets must exist exactly for pinned agents {sorted(pinned)}"
        )


def laplacian(graph: FormationGraph) -> np.ndarray:
    """Graph Laplacian: off-diagonal -a_ij, diagonal row degree."""
    lap = -np.asarray(graph.adjacency).copy()
    np.fill_diagonal(lap, graph.adjacency.sum(axis=1))
    return lap


class GroundedMatrix(NamedTuple):
    matrix: np.ndarray
    lambda_min: float
    lambda_max: float


def grounded_matrix(graph: FormationGraph) -> GroundedMatrix:
    """Laplacian plus pinning diagonal, with its extreme eigenvalues.

    Raises NotLeaderConnected when the pinned set cannot reach every agent
    (equivalently, when L + B fails the positive-definiteness check).
    """
    if not graph.leader_reachable():
        raise NotLeaderConnected(
            "graph is not connected to the leader; L + B is singular"
        )
    h = laplacian(graph) + np.diag(graph.pinning)
    eigs = np.linalg.eigvalsh(h)
    if eigs[0] <= 0.0:
        raise NotLeaderConnected(
            f"L + B is not positive definite (lambda_min = {eigs[0]:.3e})"
        )
    return GroundedMatrix(h, float(eigs[0]), float(eigs[-1]))


def stacked_apply(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply (H kron I_6) to an agent-major stacked 6N vector."""
    h = np.asarray(h, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    n = h.shape[0]
    if h.ndim != 2 or h.shape != (n, n):
        raise DimensionMismatch(f"H must be square, got {h.shape}")
    if x.size != DOF * n:
        raise DimensionMismatch(f"stacked vector must have {DOF * n} entries, got {x.size}")
    return (h @ x.reshape(n, DOF)).reshape(-1)


def offset_bias(graph: FormationGraph, spec: FormationSpec) -> np.ndarray:
    """Per-agent constant sum_j a_ij delta_ij + b_i delta_id, shape (n, 6).

    With this bias the consensus position error is the affine form
    e1 = H @ eta - bias - outer(pinning, leader_pose).
    """
    n = graph.n
    bias = np.zeros((n, DOF))
    for (i, j), delta in spec.offsets.items():
        bias[i] += graph.adjacency[i, j] * delta
    for i, delta in spec.leader_offsets.items():
        bias[i] += graph.pinning[i] * delta
    return bias


def consensus_errors(states, leader_pose, leader_vel, graph: FormationGraph,
                     spec: FormationSpec, vel) -> tuple:
    """Stacked consensus tracking errors (e1, e2), each a 6N vector.

    ``states`` supplies each agent's pose (AuvState or bare 6-vector);
    ``vel`` supplies the inertial-frame pose rates etadot_i = J(eta2_i) nu_i,
    which the caller computes so this module stays kinematics-free.
    """
    n = graph.n
    if len(states) != n or len(vel) != n:
        raise DimensionMismatch(
            f"expected {n} states and pose rates, got {len(states)} and {len(vel)}"
        )
    eta = np.array([getattr(s, "eta", s) for s in states], dtype=float)
    etadot = np.array([np.asarray(v, dtype=float).reshape(-1) for v in vel])
    if eta.shape != (n, DOF) or etadot.shape != (n, DOF):
        raise DimensionMismatch("states and pose rates must be 6-vectors")
    leader_pose = np.asarray(leader_pose, dtype=float).reshape(-1)
    leader_vel = np.asarray(leader_vel, dtype=float).reshape(-1)
    if leader_pose.size != DOF or leader_vel.size != DOF:
        raise DimensionMismatch("leader pose and velocity must be 6-vectors")
    h = laplacian(graph) + np.diag(graph.pinning)
    bias = offset_bias(graph, spec)
    e1 = h @ eta - bias - np.outer(graph.pinning, leader_pose)
    e2 = h @ etadot - np.outer(graph.pinning, leader_vel)
    return e1.reshape(-1), e2.reshape(-1)

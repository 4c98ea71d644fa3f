"""Gaussian product-inference fuzzy approximator and its adaptive weight bound.

Nine rules share one center grid across all twelve inputs (pose + twist of one
vehicle).  Rule j's activation is the product of Gaussian memberships
exp(-(z_i - c_j)^2 / width) over the inputs; the basis vector normalizes the
activations to sum to one.  The controller does not use individual rule
outputs at run time, only ||Psi||^2 together with a single adaptive scalar
theta_hat per agent that upper-bounds the unknown optimal weight norm.

Far outside the center grid the 12-factor products underflow to exactly zero;
the normalizing sum is clamped at 1e-300 so the basis degenerates to the zero
vector instead of dividing 0/0.  In that regime the adaptive drive and the
compensation term switch themselves off, which also keeps the adaptation loop
integrable for very large initial formation errors.
"""

from dataclasses import dataclass

import numpy as np

from .control import sigpow
from .errors import DegenerateActivation, DimensionMismatch

_SUM_FLOOR = 1e-300


@dataclass(frozen=True)
class FuzzyNet:
    """Rule centers (strictly increasing), Gaussian width, and input dimension."""

    centers: np.ndarray = (-7.0, -5.0, -3.0, -1.0, 0.0, 1.0, 3.0, 5.0, 7.0)
    width: float = 4.0
    n_inputs: int = 12

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float).reshape(-1)
        if centers.size < 1 or np.any(np.diff(centers) <= 0.0):
            raise ValueError("rule centers must be strictly increasing")
        if self.width <= 0.0:
            raise ValueError(f"membership width must be positive, got {self.width}")
        if self.n_inputs < 1:
            raise ValueError("n_inputs must be at least 1")
        centers.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "n_inputs", int(self.n_inputs))

    @property
    def n_rules(self) -> int:
        return self.centers.size


@dataclass
class AdaptiveState:
    """Per-agent weight-bound estimates theta_hat with the decay-law constants."""

    theta_hat: np.ndarray
    w1: float = 1.0
    w2: float = 1.0
    gamma: float = 5.0 / 7.0
    iota: float = 7.0 / 5.0

    def __post_init__(self):
        self.theta_hat = np.asarray(self.theta_hat, dtype=float).reshape(-1)
        if self.w1 <= 0.0 or self.w2 <= 0.0:
            raise ValueError("adaptive gains w1, w2 must be positive")
        if not (0.0 < self.gamma < 1.0 < self.iota):
            raise ValueError("exponents must satisfy 0 < gamma < 1 < iota")


def membership(z: float, center: float, width: float) -> float:
    """Gaussian membership exp(-(z - c)^2 / width); equals 1 exactly at the center."""
    if width <= 0.0:
        raise ValueError(f"membership width must be positive, got {width}")
    return float(np.exp(-((z - center) ** 2) / width))


def basis_fleet(z: np.ndarray, net: FuzzyNet) -> np.ndarray:
    """Normalized rule activations for stacked inputs z of shape (n, n_inputs)."""
    mem = np.exp(-((z[:, :, None] - net.centers[None, None, :]) ** 2) / net.width)
    act = mem.prod(axis=1)
    total = act.sum(axis=1, keepdims=True)
    if not np.all(np.isfinite(total)):
        raise DegenerateActivation("rule activations are not finite")
    return act / np.maximum(total, _SUM_FLOOR)


def basis(z, net: FuzzyNet) -> np.ndarray:
    """Fuzzy basis vector Psi for one input vector z (length n_inputs)."""
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != net.n_inputs:
        raise DimensionMismatch(f"expected {net.n_inputs} inputs, got {z.size}")
    return basis_fleet(z[None, :], net)[0]


def fls_output(w, psi) -> float:
    """Fuzzy system output: inner product of rule weights with the basis vector."""
    w = np.asarray(w, dtype=float).reshape(-1)
    psi = np.asarray(psi, dtype=float).reshape(-1)
    if w.size != psi.size:
        raise DimensionMismatch(f"weights ({w.size}) and basis ({psi.size}) differ")
    return float(w @ psi)


def adapt_rate_fleet(theta_hat: np.ndarray, s2: np.ndarray, psi_sq: np.ndarray,
                     h: np.ndarray, w1: float, w2: float,
                     gamma: float, iota: float) -> np.ndarray:
    """theta_hat rates from stacked (n, 6) surfaces and precomputed ||Psi_j||^2."""
    s2_sq = (s2 * s2).sum(axis=1)
    return 0.5 * (h @ (s2_sq * psi_sq)) - w1 * sigpow(theta_hat, gamma) - w2 * sigpow(theta_hat, iota)


def adapt_derivative(theta_hat, s2, psi_all, h, gains: AdaptiveState) -> np.ndarray:
    """Adaptive law: neighbor-weighted surface energy drive minus the fixed-time decay.

    theta_hat_dot_i = 1/2 sum_j H_ij ||s2_j||^2 ||Psi_j||^2
                      - w1 sigpow(theta_hat_i, gamma) - w2 sigpow(theta_hat_i, iota)

    Only neighbors with H_ij != 0 contribute, so each agent can evaluate its
    own row from local communication.
    """
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    theta_hat = np.asarray(theta_hat, dtype=float).reshape(-1)
    s2 = np.asarray(s2, dtype=float).reshape(-1)
    if theta_hat.size != n:
        raise DimensionMismatch(f"expected {n} adaptive scalars, got {theta_hat.size}")
    if s2.size != 6 * n:
        raise DimensionMismatch(f"expected stacked 6x{n} surface, got {s2.size}")
    psi = np.array([np.asarray(p, dtype=float).reshape(-1) for p in psi_all])
    if psi.shape[0] != n:
        raise DimensionMismatch(f"expected {n} basis vectors, got {psi.shape[0]}")
    psi_sq = (psi * psi).sum(axis=1)
    return adapt_rate_fleet(theta_hat, s2.reshape(n, 6), psi_sq, h,
                            gains.w1, gains.w2, gains.gamma, gains.iota)

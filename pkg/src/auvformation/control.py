"""Formation controllers and saturation-compensation machinery.

Three torque laws share the same feedback-linearizing skeleton
tau = M J^-1 (acceleration command):

* a fixed-time backstepping sliding-mode law whose reaching terms mix linear
  and odd fractional powers of the second surface,
* its saturated adaptive variant, which adds a filtered auxiliary state that
  absorbs the commanded-vs-achievable torque mismatch and a fuzzy-bound
  compensation term driven by one adaptive scalar per agent,
* a conventional sliding-mode law used as the comparison baseline.

Sliding surfaces and gains act on stacked agent-major (n, 6) arrays; public
entry points accept flat 6N vectors and per-agent state/parameter lists, while
the ``*_fleet`` kernels work on the stacked arrays directly and are the ones
the simulation loop calls.  The adaptive law with zero auxiliary state and
zero adaptive scalars reduces bitwise to the smoothed fixed-time law; the test
suite pins that identity.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GainViolation
from .vehicle import (
    DOF,
    FleetKinematics,
    FleetParams,
    accel_to_torque_fleet,
    body_force_terms_fleet,
    torque_to_accel_fleet,
    unforced_pose_accel_fleet,
)


@dataclass(frozen=True)
class FtGains:
    """Gains of the fixed-time laws; defaults are the shipped scenario values."""

    k1: float = 5.0
    k2: float = 0.4
    k3: float = 0.4
    k8: float = 5.0
    k9: float = 0.4
    k10: float = 0.4
    gamma: float = 5.0 / 7.0
    iota: float = 7.0 / 5.0
    beta_s: float = 20.0
    eps_bl: float = 0.01
    eps_sing: float = 1e-3
    w1: float = 1.0
    w2: float = 1.0

    def __post_init__(self):
        positive = {
            "k1": self.k1, "k2": self.k2, "k3": self.k3, "k8": self.k8,
            "k9": self.k9, "k10": self.k10, "beta_s": self.beta_s,
            "eps_bl": self.eps_bl, "eps_sing": self.eps_sing,
            "w1": self.w1, "w2": self.w2,
        }
        for name, value in positive.items():
            if value <= 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not (0.0 < self.gamma < 1.0 < self.iota):
            raise ValueError(
                f"exponents must satisfy 0 < gamma < 1 < iota, got {self.gamma}, {self.iota}"
            )


@dataclass(frozen=True)
class BaselineGains:
    """Gains of the baseline sliding-mode law."""

    k1: float = 5.0
    beta0: float = 200.0
    eps_bl: float = 0.01

    def __post_init__(self):
        for name in ("k1", "beta0", "eps_bl"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass
class AuxState:
    """Filtered auxiliary state absorbing the saturation mismatch, stacked 6N vector."""

    mu: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float).reshape(-1)
        if not np.all(np.isfinite(self.mu)):
            raise ValueError("auxiliary state must be finite")

    @classmethod
    def zero(cls, n: int) -> "AuxState":
        return cls(np.zeros(n * DOF))


@dataclass(frozen=True)
class DisturbanceBound:
    """Per-agent bound on the pose-space disturbance J M^-1 d."""

    lambda_tilde: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambda_tilde, dtype=float).reshape(-1)
        if np.any(lam <= 0.0):
            raise ValueError("disturbance bounds must be positive")
        lam.flags.writeable = False
        object.__setattr__(self, "lambda_tilde", lam)

    def norm(self) -> float:
        return float(np.linalg.norm(self.lambda_tilde))


def sigpow(x, a: float):
    """Signed elementwise power sign(x) |x|^a; odd and monotone for a > 0."""
    if a <= 0.0:
        raise ValueError(f"exponent must be positive, got {a}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** a


def virtual_control(s1, g: FtGains) -> np.ndarray:
    """Stabilizing pseudo-input for the outer loop; odd in the first surface."""
    s1 = np.asarray(s1, dtype=float)
    return -(g.k1 * s1 + g.k2 * sigpow(s1, g.gamma) + g.k3 * sigpow(s1, g.iota))


def virtual_control_deriv(s1, s1_dot, g: FtGains) -> np.ndarray:
    """Time derivative of the virtual control along s1(t).

    The |s1|^(gamma-1) factor blows up at the origin, so |s1| is floored at
    eps_sing there; the iota branch has a positive exponent and needs no floor.
    """
    s1 = np.asarray(s1, dtype=float)
    s1_dot = np.asarray(s1_dot, dtype=float)
    slope = (
        g.k1
        + g.k2 * g.gamma * np.maximum(np.abs(s1), g.eps_sing) ** (g.gamma - 1.0)
        + g.k3 * g.iota * np.abs(s1) ** (g.iota - 1.0)
    )
    return -slope * s1_dot


def smooth_sat(tau, tau_max) -> np.ndarray:
    """Smooth saturation tau_max * tanh(tau / tau_max); strictly inside (-tau_max, tau_max)."""
    tau = np.asarray(tau, dtype=float)
    tau_max = np.asarray(tau_max, dtype=float)
    if np.any(tau_max <= 0.0):
        raise ValueError("tau_max must be positive")
    return tau_max * np.tanh(tau / tau_max)


def surfaces_fleet(eps1: np.ndarray, eps2: np.ndarray, alpha: np.ndarray,
                   h: np.ndarray, mu: np.ndarray = None) -> tuple:
    """Sliding surfaces on stacked (n, 6) arrays; mu shifts the second surface."""
    shift = alpha if mu is None else alpha + mu
    return eps1, eps2 - h @ shift


def sliding_surfaces(eps1, eps2, alpha_s, h, mu: AuxState = None) -> tuple:
    """Sliding surfaces (s1, s2) as stacked 6N vectors.

    s1 is the consensus position error; s2 subtracts the graph-weighted
    virtual control and, when an auxiliary state is supplied, the
    graph-weighted auxiliary state as well.
    """
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    eps1 = np.asarray(eps1, dtype=float).reshape(-1)
    eps2 = np.asarray(eps2, dtype=float).reshape(-1)
    alpha = np.asarray(alpha_s, dtype=float).reshape(-1)
    if eps1.size != n * DOF or eps2.size != n * DOF or alpha.size != n * DOF:
        raise DimensionMismatch(f"surfaces expect stacked {n * DOF}-vectors")
    mu_arr = None
    if mu is not None:
        mu_arr = mu.mu
        if mu_arr.size != n * DOF:
            raise DimensionMismatch(f"auxiliary state must have {n * DOF} entries")
        mu_arr = mu_arr.reshape(n, DOF)
    s1, s2 = surfaces_fleet(
        eps1.reshape(n, DOF), eps2.reshape(n, DOF), alpha.reshape(n, DOF), h, mu_arr
    )
    return s1.reshape(-1), s2.reshape(-1)


def aux_rate_fleet(mu: np.ndarray, tau: np.ndarray, kin: FleetKinematics,
                   fp: FleetParams) -> np.ndarray:
    """Auxiliary-state rate: leak to zero plus the smoothed-vs-commanded torque gap."""
    gap = smooth_sat(tau, fp.tau_max) - tau
    return -mu + torque_to_accel_fleet(kin, fp, gap)


def aux_derivative(mu: AuxState, tau, states, params) -> np.ndarray:
    """Rate of the auxiliary state for stacked commanded torque tau (6N vector)."""
    eta, nu, fp = _stack_states(states, params)
    n = fp.n
    tau = np.asarray(tau, dtype=float).reshape(-1)
    if tau.size != n * DOF or mu.mu.size != n * DOF:
        raise DimensionMismatch(f"expected stacked {n * DOF}-vectors")
    kin = FleetKinematics(eta, nu)
    return aux_rate_fleet(mu.mu.reshape(n, DOF), tau.reshape(n, DOF), kin, fp).reshape(-1)


def reaching_terms_fleet(s2: np.ndarray, g: FtGains, smooth: bool) -> np.ndarray:
    """Reaching law: switching term plus linear and odd-power feedback in s2."""
    if smooth:
        sw = s2 / (np.sqrt((s2 * s2).sum()) + g.eps_bl)
    else:
        sw = np.sign(s2)
    return -g.beta_s * sw - g.k8 * s2 - g.k9 * sigpow(s2, g.gamma) - g.k10 * sigpow(s2, g.iota)


def tau_tracking_fleet(kin: FleetKinematics, fp: FleetParams, unforced: np.ndarray,
                       leader_accel: np.ndarray, alpha_rate: np.ndarray,
                       s2: np.ndarray, g: FtGains, smooth: bool,
                       mu: np.ndarray = None, comp_gain: np.ndarray = None) -> np.ndarray:
    """Shared torque assembly of the fixed-time laws on stacked (n, 6) arrays.

    comp_gain holds theta_hat_i * ||Psi_i||^2 per agent for the adaptive
    variant; passing zeros (or None) and zero mu recovers the plain law
    exactly.
    """
    inner = -unforced + leader_accel + alpha_rate + reaching_terms_fleet(s2, g, smooth)
    if mu is not None:
        inner -= mu
    if comp_gain is not None:
        inner -= 0.5 * comp_gain[:, None] * s2
    return accel_to_torque_fleet(kin, fp, inner)


def tau_baseline_fleet(kin: FleetKinematics, fp: FleetParams, unforced: np.ndarray,
                       eps1: np.ndarray, eps2: np.ndarray, leader_accel: np.ndarray,
                       h: np.ndarray, g: BaselineGains) -> tuple:
    """Baseline sliding-mode torque; returns (tau, surface)."""
    s = g.k1 * (h @ eps1) + eps2
    sw = s / (np.sqrt((s * s).sum()) + g.eps_bl)
    inner = -unforced - g.k1 * eps2 + leader_accel - g.beta0 * sw
    return accel_to_torque_fleet(kin, fp, inner), s


def _stack_states(states, params) -> tuple:
    eta = np.array([np.asarray(s.eta, dtype=float) for s in states])
    nu = np.array([np.asarray(s.nu, dtype=float) for s in states])
    fp = params if isinstance(params, FleetParams) else FleetParams.from_params(params)
    if eta.shape[0] != fp.n:
        raise DimensionMismatch(f"{eta.shape[0]} states for {fp.n} parameter sets")
    return eta, nu, fp


def _tracking_setup(eps1, eps2, states, params, leader_accel, h):
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    eta, nu, fp = _stack_states(states, params)
    if fp.n != n:
        raise DimensionMismatch(f"{fp.n} agents for a {n}x{n} graph matrix")
    eps1 = np.asarray(eps1, dtype=float).reshape(n, DOF)
    eps2 = np.asarray(eps2, dtype=float).reshape(n, DOF)
    kin = FleetKinematics(eta, nu)
    cnu, dnu = body_force_terms_fleet(fp, nu)
    unforced = unforced_pose_accel_fleet(kin, fp, nu, cnu, dnu)
    accel_d = np.broadcast_to(np.asarray(leader_accel, dtype=float).reshape(DOF), (n, DOF))
    return n, fp, kin, eps1, eps2, unforced, accel_d


def ft_backstepping_tau(eps1, eps2, states, params, leader_accel, h, g: FtGains,
                        bound: DisturbanceBound = None, smooth: bool = False) -> np.ndarray:
    """Fixed-time backstepping sliding-mode torque command, stacked 6N vector.

    With ``smooth`` the switching term uses the boundary-layer form
    s2 / (||s2|| + eps_bl) instead of sign(s2).  When a disturbance bound is
    supplied and beta_s fails to dominate it, a GainViolation warning is
    emitted (the reaching argument is then unenforceable, but the command is
    still returned).
    """
    if bound is not None and g.beta_s <= bound.norm():
        warnings.warn(
            f"beta_s={g.beta_s} does not dominate the disturbance bound {bound.norm():.3g}",
            GainViolation,
            stacklevel=2,
        )
    n, fp, kin, e1, e2, unforced, accel_d = _tracking_setup(
        eps1, eps2, states, params, leader_accel, h
    )
    alpha = virtual_control(e1, g)
    alpha_rate = virtual_control_deriv(e1, e2, g)
    _, s2 = surfaces_fleet(e1, e2, alpha, np.asarray(h, dtype=float))
    tau = tau_tracking_fleet(kin, fp, unforced, accel_d, alpha_rate, s2, g, smooth)
    return tau.reshape(-1)


def adaptive_sat_tau(eps1, eps2, states, params, leader_accel, h, g: FtGains,
                     mu: AuxState, theta_hat, psi_all) -> np.ndarray:
    """Saturated adaptive fuzzy torque command, stacked 6N vector.

    Uses the auxiliary-shifted second surface, subtracts the auxiliary state
    from the acceleration command, and adds the adaptive compensation
    -(1/2) s2_i theta_hat_i ||Psi_i||^2 per agent.  Always smoothed.
    """
    n, fp, kin, e1, e2, unforced, accel_d = _tracking_setup(
        eps1, eps2, states, params, leader_accel, h
    )
    theta_hat = np.asarray(theta_hat, dtype=float).reshape(-1)
    if theta_hat.size != n:
        raise DimensionMismatch(f"expected {n} adaptive scalars, got {theta_hat.size}")
    if mu.mu.size != n * DOF:
        raise DimensionMismatch(f"auxiliary state must have {n * DOF} entries")
    psi = np.array([np.asarray(p, dtype=float).reshape(-1) for p in psi_all])
    if psi.shape[0] != n:
        raise DimensionMismatch(f"expected {n} basis vectors, got {psi.shape[0]}")
    mu_arr = mu.mu.reshape(n, DOF)
    alpha = virtual_control(e1, g)
    alpha_rate = virtual_control_deriv(e1, e2, g)
    _, s2 = surfaces_fleet(e1, e2, alpha, np.asarray(h, dtype=float), mu_arr)
    comp_gain = theta_hat * (psi * psi).sum(axis=1)
    tau = tau_tracking_fleet(
        kin, fp, unforced, accel_d, alpha_rate, s2, g, True, mu_arr, comp_gain
    )
    return tau.reshape(-1)


def baseline_smc_tau(eps1, eps2, states, params, leader_accel, h,
                     g: BaselineGains) -> np.ndarray:
    """Baseline distributed sliding-mode torque command, stacked 6N vector."""
    n, fp, kin, e1, e2, unforced, accel_d = _tracking_setup(
        eps1, eps2, states, params, leader_accel, h
    )
    tau, _ = tau_baseline_fleet(
        kin, fp, unforced, e1, e2, accel_d, np.asarray(h, dtype=float), g
    )
    return tau.reshape(-1)

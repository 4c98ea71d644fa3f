"""Fixed-step closed-loop simulation, settling-bound calculators, and metrics.

A scenario bundles the fleet (parameters, graph, formation geometry, initial
states), the leader trajectory, one controller selection with its gains, and
the integration grid.  ``run`` integrates the plant together with the
controller's auxiliary and adaptive states as one joint state bundle under
classical RK4, applying the per-channel hard torque clip on the plant side at
every stage, and records everything a later analysis needs.

The settling-bound calculators evaluate the two analytic fixed-time bounds
(the ideal reaching bound and the practical bound with a residual set) from
the gains and the grounded graph matrix, substituting lambda_min(L + B)
wherever a scalar graph factor appears inside a min().
"""

import dataclasses
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import control, fuzzy, topology, vehicle

try:
    if os.environ.get("AUVFORMATION_NO_NUMBA"):
        _fast = None
    else:
        from . import _fast
except Exception:  # numba unavailable: the numpy evaluator covers everything
    _fast = None
from .control import AuxState, BaselineGains, DisturbanceBound, FtGains
from .errors import AttitudeSingularity, InvalidExponents
from .fuzzy import FuzzyNet
from .topology import DOF, FormationGraph, FormationSpec
from .vehicle import AuvParams, AuvState, FleetKinematics, FleetParams

CONTROLLERS = ("ft_backstepping", "adaptive_sat", "baseline_smc")


@dataclass(frozen=True)
class LeaderPath:
    """Analytic virtual-leader trajectory.

    ``exp_approach`` ramps surge exponentially toward ``amplitude`` while
    drifting linearly in sway/heave; ``constant`` holds a fixed pose.
    """

    kind: str = "exp_approach"
    amplitude: float = 30.0
    rate: float = 1.0
    vy: float = 5.0
    vz: float = 2.0
    pose: tuple = (0.0,) * DOF

    def __post_init__(self):
        if self.kind not in ("exp_approach", "constant"):
            raise ValueError(f"unknown leader kind {self.kind!r}")
        if self.kind == "exp_approach" and self.rate <= 0.0:
            raise ValueError("leader rate must be positive")
        object.__setattr__(self, "pose", tuple(float(v) for v in self.pose))

    def eval(self, t: float) -> tuple:
        """Pose, velocity, and acceleration of the leader at time t."""
        if self.kind == "constant":
            return np.array(self.pose), np.zeros(DOF), np.zeros(DOF)
        decay = math.exp(-self.rate * t)
        a, r = self.amplitude, self.rate
        pose = np.array([a * (1.0 - decay), self.vy * t, self.vz * t, 0.0, 0.0, 0.0])
        velocity = np.array([a * r * decay, self.vy, self.vz, 0.0, 0.0, 0.0])
        accel = np.array([-a * r * r * decay, 0.0, 0.0, 0.0, 0.0, 0.0])
        return pose, velocity, accel


def leader_reference(t: float) -> tuple:
    """Shipped default leader trajectory (pose, velocity, acceleration) at time t."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    return LeaderPath().eval(t)


@dataclass
class Scenario:
    """Complete, deterministic description of one simulation."""

    agents: tuple
    graph: FormationGraph
    formation: FormationSpec
    leader: LeaderPath
    controller: str
    gains: Union[FtGains, BaselineGains]
    initial: tuple
    dt: float = 1e-3
    t_end: float = 20.0
    disturbance_on: bool = True
    kappa: float = 0.5
    seed: int = 0
    l1: float = 0.5
    l2: float = 0.5
    theta_bound: float = 0.0
    smooth_switching: bool = True
    fuzzy_net: FuzzyNet = field(default_factory=FuzzyNet)
    disturbance_bound: Optional[DisturbanceBound] = None

    def __post_init__(self):
        self.agents = tuple(self.agents)
        self.initial = tuple(self.initial)
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}, got {self.controller!r}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end must be at least dt, got {self.t_end}")
        if not (0.0 < self.kappa < 1.0):
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        n = self.graph.n
        if len(self.agents) != n or len(self.initial) != n:
            raise ValueError(
                f"graph has {n} agents but {len(self.agents)} parameter sets "
                f"and {len(self.initial)} initial states were given"
            )
        expected = BaselineGains if self.controller == "baseline_smc" else FtGains
        if not isinstance(self.gains, expected):
            raise ValueError(
                f"controller {self.controller!r} requires {expected.__name__}"
            )

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class RunLog:
    """Time-indexed record of one run; all arrays share the leading sample axis."""

    t: np.ndarray
    eta: np.ndarray
    nu: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray
    tau: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    mu: np.ndarray
    v1: Optional[np.ndarray] = None
    v3: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        spacing = np.diff(self.t)
        if self.t.size < 1 or np.any(spacing <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        if spacing.size and not np.allclose(spacing, spacing[0], rtol=0.0, atol=1e-9):
            raise ValueError("sample spacing must be constant")

    @property
    def n(self) -> int:
        return self.eta.shape[1]


@dataclass(frozen=True)
class Metrics:
    """Scalar summaries of one run; settling_time is None when never settled."""

    settling_time: Optional[float]
    ise: float
    peak_torque: float
    peak_applied: float
    chattering: float

    def to_dict(self) -> dict:
        return {
            "settling_time": self.settling_time,
            "ise": self.ise,
            "peak_torque": self.peak_torque,
            "peak_applied": self.peak_applied,
            "chattering": self.chattering,
        }


def rk4_step(y: np.ndarray, t: float, dt: float, f, k1: np.ndarray = None,
             project=None) -> np.ndarray:
    """One classical Runge-Kutta step of the flat state bundle y.

    ``k1`` optionally reuses a derivative already evaluated at (t, y) (the
    simulation loop logs it); ``project`` post-processes the stepped state
    (the loop clamps the adaptive scalars at zero).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = np.asarray(y, dtype=float)
    if k1 is None:
        k1 = f(t, y)
    half = 0.5 * dt
    k2 = f(t + half, y + half * k1)
    k3 = f(t + half, y + half * k2)
    k4 = f(t + dt, y + dt * k3)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if project is not None:
        out = project(out)
    return out


def theta_snap_floor(dt: float, g: FtGains) -> float:
    """Adaptive-scalar level below which one Euler step of the decay law crosses zero.

    RK4 stages straddle the origin of the odd, non-Lipschitz decay field and
    stall just above it; the projection therefore snaps anything at or below
    this floor to exactly zero so the estimate reaches zero in finite time.
    """
    return (dt * g.w1) ** (1.0 / (1.0 - g.gamma))


class _Evaluator:
    """Closed-loop derivative of the joint bundle [eta, nu, mu, theta_hat]."""

    def __init__(self, sc: Scenario, h: np.ndarray):
        self.n = sc.n
        self.h = h
        self.pin = sc.graph.pinning
        self.bias = topology.offset_bias(sc.graph, sc.formation)
        self.fp = FleetParams.from_params(sc.agents)
        self.gains = sc.gains
        self.controller = sc.controller
        self.leader = sc.leader
        self.dist_on = sc.disturbance_on
        self.smooth = sc.smooth_switching
        self.net = sc.fuzzy_net
        self.snap_floor = (
            theta_snap_floor(sc.dt, sc.gains) if isinstance(sc.gains, FtGains) else 0.0
        )

    def eval(self, t: float, y: np.ndarray) -> tuple:
        """Return (bundle rate, extras); extras = (eps1, eps2, tau, u, s1, s2)."""
        n = self.n
        eta = y[: 6 * n].reshape(n, DOF)
        nu = y[6 * n: 12 * n].reshape(n, DOF)
        mu = y[12 * n: 18 * n].reshape(n, DOF)
        theta = y[18 * n:]
        g = self.gains
        pose_d, vel_d, acc_d = self.leader.eval(t)
        kin = FleetKinematics(eta, nu, t)
        eps1 = self.h @ eta - self.bias - self.pin[:, None] * pose_d
        eps2 = self.h @ kin.eta_dot - self.pin[:, None] * vel_d
        cnu, dnu = vehicle.body_force_terms_fleet(self.fp, nu)
        unforced = vehicle.unforced_pose_accel_fleet(kin, self.fp, nu, cnu, dnu)
        accel_d = acc_d[None, :]
        adaptive = self.controller == "adaptive_sat"
        if self.controller == "baseline_smc":
            s1 = eps1
            tau, s2 = control.tau_baseline_fleet(
                kin, self.fp, unforced, eps1, eps2, accel_d, self.h, g
            )
        else:
            alpha = control.virtual_control(eps1, g)
            alpha_rate = control.virtual_control_deriv(eps1, eps2, g)
            if adaptive:
                psi = fuzzy.basis_fleet(np.concatenate([eta, nu], axis=1), self.net)
                psi_sq = (psi * psi).sum(axis=1)
                s1, s2 = control.surfaces_fleet(eps1, eps2, alpha, self.h, mu)
                tau = control.tau_tracking_fleet(
                    kin, self.fp, unforced, accel_d, alpha_rate, s2, g, True,
                    mu, theta * psi_sq,
                )
            else:
                s1, s2 = control.surfaces_fleet(eps1, eps2, alpha, self.h)
                tau = control.tau_tracking_fleet(
                    kin, self.fp, unforced, accel_d, alpha_rate, s2, g, self.smooth
                )
        u = np.clip(tau, -self.fp.tau_max, self.fp.tau_max)
        d = vehicle.disturbance_fleet(t, nu, self.dist_on)
        nu_dot = self.fp.inv_inertia * (u + d - cnu - dnu)
        ydot = np.empty_like(y)
        ydot[: 6 * n] = kin.eta_dot.reshape(-1)
        ydot[6 * n: 12 * n] = nu_dot.reshape(-1)
        if adaptive:
            mu_dot = control.aux_rate_fleet(mu, tau, kin, self.fp)
            theta_dot = fuzzy.adapt_rate_fleet(
                theta, s2, psi_sq, self.h, g.w1, g.w2, g.gamma, g.iota
            )
            ydot[12 * n: 18 * n] = mu_dot.reshape(-1)
            ydot[18 * n:] = theta_dot
        else:
            ydot[12 * n:] = 0.0
        return ydot, (eps1, eps2, tau, u, s1, s2)

    def rate(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.eval(t, y)[0]

    def project(self, y: np.ndarray) -> np.ndarray:
        theta = y[18 * self.n:]
        np.maximum(theta, 0.0, out=theta)
        theta[theta <= self.snap_floor] = 0.0
        return y


class _FastEvaluator(_Evaluator):
    """Same contract as _Evaluator, backed by the numba kernel.

    The extras buffers are reused between calls; run() copies them into the
    log before the next evaluation.
    """

    def __init__(self, sc: Scenario, h: np.ndarray):
        super().__init__(sc, h)
        g = sc.gains
        vec = np.zeros(16)
        if isinstance(g, FtGains):
            vec[:13] = (g.k1, g.k2, g.k3, g.k8, g.k9, g.k10, g.gamma, g.iota,
                        g.beta_s, g.eps_bl, g.eps_sing, g.w1, g.w2)
        else:
            vec[13:16] = (g.k1, g.beta0, g.eps_bl)
        self._gains_vec = vec
        self._ctrl = {
            "ft_backstepping": _fast.CTRL_FT,
            "adaptive_sat": _fast.CTRL_ADAPTIVE,
            "baseline_smc": _fast.CTRL_BASELINE,
        }[sc.controller]
        self._smooth = 1 if (sc.controller == "adaptive_sat" or self.smooth) else 0
        self._dist = 1 if sc.disturbance_on else 0
        if sc.leader.kind == "exp_approach":
            self._leader_kind = _fast.LEADER_EXP
            self._leader_coef = np.array(
                [sc.leader.amplitude, sc.leader.rate, sc.leader.vy, sc.leader.vz]
            )
            self._leader_pose = np.zeros(DOF)
        else:
            self._leader_kind = _fast.LEADER_CONSTANT
            self._leader_coef = np.zeros(4)
            self._leader_pose = np.array(sc.leader.pose)
        self._centers = np.ascontiguousarray(self.net.centers)
        self._inv_width = 1.0 / self.net.width
        self._extras = tuple(np.empty((self.n, DOF)) for _ in range(6))

    def eval(self, t: float, y: np.ndarray) -> tuple:
        ydot = np.empty_like(y)
        status = _fast.eval_rates(
            t, y, ydot, self.n, self._ctrl, self._smooth, self._dist,
            self._leader_kind, self._leader_coef, self._leader_pose,
            self.h, self.pin, self.bias,
            self.fp.inertia_diag, self.fp.inv_inertia, self.fp.drag,
            self.fp.tau_max, self._gains_vec, self._centers, self._inv_width,
            *self._extras,
        )
        if status >= 0:
            raise AttitudeSingularity(
                f"agent {status} pitch inside the guard band at t={t:.3f}",
                agent=status,
                time=t,
            )
        return ydot, self._extras


def run(sc: Scenario, use_fast: Optional[bool] = None) -> RunLog:
    """Simulate the scenario over [0, t_end] and return the sampled log.

    Deterministic: identical scenarios produce bitwise-identical logs.  Raises
    AttitudeSingularity (with agent and time) if any vehicle's pitch enters
    the guard band.  ``use_fast`` forces the compiled (True) or reference
    numpy (False) evaluator; None picks the compiled one when available.
    """
    grounded = topology.grounded_matrix(sc.graph)
    topology.validate_formation(sc.graph, sc.formation)
    if (
        sc.disturbance_bound is not None
        and sc.controller == "ft_backstepping"
        and isinstance(sc.gains, FtGains)
        and sc.gains.beta_s <= sc.disturbance_bound.norm()
    ):
        warnings.warn(
            f"beta_s={sc.gains.beta_s} does not dominate the disturbance bound "
            f"{sc.disturbance_bound.norm():.3g}",
            control.GainViolation,
            stacklevel=2,
        )
    if use_fast is None:
        use_fast = _fast is not None
    elif use_fast and _fast is None:
        raise RuntimeError("compiled evaluator requested but numba is unavailable")
    ev_cls = _FastEvaluator if use_fast else _Evaluator
    ev = ev_cls(sc, grounded.matrix)
    n = sc.n
    steps = int(round(sc.t_end / sc.dt))
    y = np.concatenate([
        np.array([s.eta for s in sc.initial]).reshape(-1),
        np.array([s.nu for s in sc.initial]).reshape(-1),
        np.zeros(6 * n),
        np.zeros(n),
    ])
    t_grid = np.arange(steps + 1) * sc.dt
    shape = (steps + 1, n, DOF)
    log_eta = np.empty(shape)
    log_nu = np.empty(shape)
    log_eps1 = np.empty(shape)
    log_eps2 = np.empty(shape)
    log_tau = np.empty(shape)
    log_u = np.empty(shape)
    log_mu = np.empty(shape)
    log_theta = np.empty((steps + 1, n))
    log_v1 = np.empty(steps + 1)
    log_v3 = np.empty(steps + 1)
    for k in range(steps + 1):
        t = t_grid[k]
        rate, (eps1, eps2, tau, u, s1, s2) = ev.eval(t, y)
        log_eta[k] = y[: 6 * n].reshape(n, DOF)
        log_nu[k] = y[6 * n: 12 * n].reshape(n, DOF)
        log_mu[k] = y[12 * n: 18 * n].reshape(n, DOF)
        log_theta[k] = y[18 * n:]
        log_eps1[k] = eps1
        log_eps2[k] = eps2
        log_tau[k] = tau
        log_u[k] = u
        log_v1[k] = 0.5 * float((s1 * s1).sum())
        log_v3[k] = 0.5 * float((s2 * s2).sum())
        if k == steps:
            break
        y = rk4_step(y, t, sc.dt, ev.rate, k1=rate, project=ev.project)
        if not np.isfinite(y).all():
            raise FloatingPointError(f"state diverged at t={t + sc.dt:.4f}")
    return RunLog(
        t=t_grid, eta=log_eta, nu=log_nu, eps1=log_eps1, eps2=log_eps2,
        tau=log_tau, u=log_u, theta=log_theta, mu=log_mu,
        v1=log_v1, v3=log_v3, v=log_v1 + log_v3,
    )


@dataclass(frozen=True)
class LyapunovTrace:
    """Energy traces along a run.

    v3/v include the adaptive-estimate error against a run-derived bound
    estimate; v3_sonly/v_sonly drop it (surfaces only).  theta_estimate is
    the scalar bound estimate used for the error term.
    """

    v1: np.ndarray
    v3: np.ndarray
    v: np.ndarray
    v3_sonly: np.ndarray
    v_sonly: np.ndarray
    theta_estimate: float


def estimate_theta(log: RunLog, g: FtGains) -> float:
    """Run-derived estimate of the unknown weight-norm bound.

    Supremum of theta_hat over the run plus the decay magnitude the adaptive
    law still applies at the final sample (the estimator keeps decaying below
    the true bound, so the final decay rate is added back as margin).
    """
    sup = float(log.theta.max(initial=0.0))
    final = log.theta[-1]
    margin = float((g.w1 * final ** g.gamma + g.w2 * final ** g.iota).max(initial=0.0))
    return sup + margin


def lyapunov_trace(log: RunLog, sc: Scenario) -> LyapunovTrace:
    """Recompute per-sample energies from a logged adaptive run.

    Only defined for the adaptive controller: the second surface is rebuilt
    from the logged errors and auxiliary state, and the adaptive-error term
    uses the run-derived bound estimate.
    """
    if sc.controller != "adaptive_sat":
        raise ValueError("lyapunov trace requires an adaptive_sat run")
    g = sc.gains
    h = topology.grounded_matrix(sc.graph).matrix
    alpha = control.virtual_control(log.eps1, g)
    shift = alpha + log.mu
    s2 = log.eps2 - np.einsum("ij,tjk->tik", h, shift)
    v1 = 0.5 * (log.eps1 ** 2).sum(axis=(1, 2))
    v3_s = 0.5 * (s2 ** 2).sum(axis=(1, 2))
    theta_est = estimate_theta(log, g)
    err = theta_est - log.theta
    v3 = v3_s + 0.5 * (err ** 2).sum(axis=1)
    return LyapunovTrace(v1, v3, v1 + v3, v3_s, v1 + v3_s, theta_est)


def sigma_value(g: FtGains, lambda_min: float, l1: float, theta: float) -> float:
    """Residual offset of the practical-stability inequality."""
    return 0.5 * lambda_min + l1 * (
        g.w1 * theta ** (1.0 + g.gamma) + g.w2 * theta ** (1.0 + g.iota)
    )


def settling_bound(g: FtGains, h, kind: str, kappa: float = None,
                   l1: float = 0.5, l2: float = 0.5) -> float:
    """Analytic fixed-time settling bound from the gains and grounded matrix.

    ``ideal`` is the ideal reaching bound of the unsaturated law; ``practical``
    the practical bound of the adaptive law, which needs kappa in (0, 1).
    Scalar graph factors use lambda_min(L + B).
    """
    if not (0.0 < g.gamma < 1.0 < g.iota):
        raise InvalidExponents(
            f"need 0 < gamma < 1 < iota, got gamma={g.gamma}, iota={g.iota}"
        )
    lam = float(np.linalg.eigvalsh(np.asarray(h, dtype=float))[0])
    e_lo = (g.gamma + 1.0) / 2.0
    e_hi = (g.iota + 1.0) / 2.0
    if kind == "ideal":
        zeta1 = min(g.k2, lam * g.k9)
        zeta2 = min(g.k3, lam * g.k10)
        return 2.0 / (zeta1 * 2.0 ** e_lo * (1.0 - g.gamma)) + 2.0 / (
            2.0 ** e_hi * zeta2 * (g.iota - 1.0)
        )
    if kind == "practical":
        if kappa is None or not (0.0 < kappa < 1.0):
            raise ValueError(f"the practical bound needs kappa in (0, 1), got {kappa}")
        nu1 = min(g.k9 * lam, l2 * g.w1)
        nu2 = min(g.k10 * lam, l2 * g.w2)
        chi1 = min(nu1, g.k2)
        chi2 = min(g.k3, nu2)
        return 2.0 / (chi1 * 2.0 ** e_lo * kappa * (1.0 - g.gamma)) + 2.0 / (
            chi2 * 2.0 ** e_hi * kappa * (g.iota - 1.0)
        )
    raise ValueError(f"kind must be 'ideal' or 'practical', got {kind!r}")


def residual_radius(chi1: float, chi2: float, p: float, q: float,
                    varphi: float, kappa: float) -> float:
    """Residual-set level of a practically fixed-time stable energy.

    min of chi1^(-1/p) (varphi/(1-kappa))^(1/p) and
    chi2^(-1/q) (varphi/(1-kappa))^(1/q), for exponents p > 1 > q > 0.
    """
    if chi1 <= 0.0 or chi2 <= 0.0:
        raise ValueError("chi coefficients must be positive")
    if not p > 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if varphi <= 0.0:
        raise ValueError(f"varphi must be positive, got {varphi}")
    if not (0.0 < kappa < 1.0):
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    scaled = varphi / (1.0 - kappa)
    return min(chi1 ** (-1.0 / p) * scaled ** (1.0 / p),
               chi2 ** (-1.0 / q) * scaled ** (1.0 / q))


def bound_report(g: FtGains, h, kappa: float, l1: float = 0.5, l2: float = 0.5,
                 theta: float = 0.0) -> dict:
    """All analytic bound quantities in one place (consumed by the CLI)."""
    h = np.asarray(h, dtype=float)
    eigs = np.linalg.eigvalsh(h)
    lam = float(eigs[0])
    e_lo = (g.gamma + 1.0) / 2.0
    e_hi = (g.iota + 1.0) / 2.0
    nu1 = min(g.k9 * lam, l2 * g.w1)
    nu2 = min(g.k10 * lam, l2 * g.w2)
    chi1 = min(nu1, g.k2)
    chi2 = min(g.k3, nu2)
    sigma = sigma_value(g, lam, l1, theta)
    level = residual_radius(
        2.0 ** e_hi * chi2, 2.0 ** e_lo * chi1, e_hi, e_lo, sigma, kappa
    )
    return {
        "lambda_min": lam,
        "lambda_max": float(eigs[-1]),
        "zeta1": min(g.k2, lam * g.k9),
        "zeta2": min(g.k3, lam * g.k10),
        "t_ideal": settling_bound(g, h, "ideal"),
        "nu1": nu1,
        "nu2": nu2,
        "chi1": chi1,
        "chi2": chi2,
        "sigma": sigma,
        "residual_level": level,
        "t_practical": settling_bound(g, h, "practical", kappa, l1, l2),
        "kappa": kappa,
        "l1": l1,
        "l2": l2,
        "theta": theta,
    }


def settling_time(log: RunLog, tol: float) -> Optional[float]:
    """First time after which the stacked position error stays below tol (inf-norm).

    0.0 when the error never reaches tol; None when it has not settled by the
    end of the log.
    """
    peak = np.abs(log.eps1).max(axis=(1, 2))
    above = np.flatnonzero(peak >= tol)
    if above.size == 0:
        return 0.0
    if above[-1] == peak.size - 1:
        return None
    return float(log.t[above[-1] + 1])


def compute_metrics(log: RunLog, tol: float) -> Metrics:
    """Scalar run summaries: settling time, ISE, torque peaks, total variation."""
    sq = (log.eps1 ** 2).sum(axis=(1, 2))
    ise = float(np.trapezoid(sq, log.t))
    chattering = float(np.abs(np.diff(log.tau, axis=0)).sum())
    return Metrics(
        settling_time=settling_time(log, tol),
        ise=ise,
        peak_torque=float(np.abs(log.tau).max()),
        peak_applied=float(np.abs(log.u).max()),
        chattering=chattering,
    )


def formation_slots(graph: FormationGraph, spec: FormationSpec,
                    leader_pose) -> np.ndarray:
    """Absolute pose of every formation slot for a given leader pose, (n, 6).

    Walks the offsets outward from the pinned agents; raises when the offsets
    around a cycle are inconsistent with a single rigid slot assignment.
    """
    leader_pose = np.asarray(leader_pose, dtype=float).reshape(DOF)
    n = graph.n
    slots = np.full((n, DOF), np.nan)
    todo = []
    for i, delta in spec.leader_offsets.items():
        slots[i] = leader_pose + delta
        todo.append(i)
    while todo:
        i = todo.pop()
        for j in np.flatnonzero(graph.adjacency[i] > 0.0):
            candidate = slots[i] - spec.offsets[(int(i), int(j))]
            if np.isnan(slots[j]).any():
                slots[j] = candidate
                todo.append(int(j))
            elif not np.allclose(slots[j], candidate, rtol=0.0, atol=1e-9):
                raise ValueError(f"formation offsets are inconsistent around agent {j}")
    if np.isnan(slots).any():
        raise ValueError("formation slots are underdetermined (graph not leader-connected)")
    return slots


@dataclass(frozen=True)
class SweepTrial:
    """One Monte-Carlo trial: label is the scale factor or 'random-k'."""

    label: str
    scale: Optional[float]
    settling_time: Optional[float]
    t_bound: float
    within_bound: bool
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "scale": self.scale,
            "settling_time": self.settling_time,
            "t_bound": self.t_bound,
            "within_bound": self.within_bound,
            "error": self.error,
        }


def mc_sweep(sc: Scenario, scales, n_random: int = 0,
             tol: float = 0.5) -> list:
    """Rerun the scenario over scaled and randomized initial formation errors.

    The initial state error of the base scenario is measured against the
    moving formation equilibrium (pose relative to the slots, body velocity
    relative to the slot-consistent velocity), so scale 1 reproduces the base
    scenario exactly and scale 0 starts on the moving equilibrium.  Scaled
    trials multiply that error; random trials draw per-agent errors uniformly
    within its per-component envelope, seeded deterministically from
    (scenario seed, trial index).  Per-trial failures are recorded, not
    raised.
    """
    if not isinstance(sc.gains, FtGains):
        raise ValueError("mc_sweep needs fixed-time gains for the analytic bound")
    h = topology.grounded_matrix(sc.graph).matrix
    t_bound = settling_bound(sc.gains, h, "practical", sc.kappa, sc.l1, sc.l2)
    pose0, vel0, _ = sc.leader.eval(0.0)
    slots = formation_slots(sc.graph, sc.formation, pose0)
    slot_nu = np.array([
        np.linalg.solve(vehicle.jacobian(slots[i, 3:]), vel0) for i in range(sc.n)
    ])
    base_eta = np.array([s.eta for s in sc.initial])
    base_nu = np.array([s.nu for s in sc.initial])
    eta_err = base_eta - slots
    nu_err = base_nu - slot_nu
    eta_envelope = np.abs(eta_err).max(axis=0)
    nu_envelope = np.abs(nu_err).max(axis=0)

    def trial(label, scale, eta0, nu0):
        try:
            states = tuple(AuvState(eta0[i], nu0[i]) for i in range(sc.n))
            log = run(dataclasses.replace(sc, initial=states))
            settle = settling_time(log, tol)
            within = settle is not None and settle <= t_bound
            return SweepTrial(label, scale, settle, t_bound, within)
        except (AttitudeSingularity, FloatingPointError, ValueError) as exc:
            return SweepTrial(label, scale, None, t_bound, False, error=str(exc))

    rows = []
    for scale in scales:
        # pose errors extrapolate freely; velocity errors only interpolate up
        # to the base value (the quadratic surge terms of the disturbance
        # model blow up under backward extrapolated velocities)
        rows.append(trial(
            f"scale-{scale:g}", float(scale),
            slots + scale * eta_err, slot_nu + min(float(scale), 1.0) * nu_err,
        ))
    for k in range(n_random):
        rng = np.random.default_rng([sc.seed, k])
        d_eta = rng.uniform(-1.0, 1.0, size=(sc.n, DOF)) * eta_envelope
        d_nu = rng.uniform(-1.0, 1.0, size=(sc.n, DOF)) * nu_envelope
        rows.append(trial(f"random-{k}", None, slots + d_eta, slot_nu + d_nu))
    return rows

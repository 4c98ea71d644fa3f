"""Six-DOF vehicle kinematics and dynamics.

Each vehicle follows the standard body-frame marine craft model

    etadot = J(eta2) nu
    M nudot + C(nu) nu + D nu = u + d

with a diagonal rigid-body-plus-added-mass inertia matrix M, the matching
skew-symmetric Coriolis/centripetal matrix C, linear hydrodynamic damping D,
neutral buoyancy (no restoring term), per-channel hard torque saturation on
the applied input u, and a time/velocity dependent disturbance d.

eta = [x, y, z, phi, theta, psi] is the inertial pose (ZYX Euler angles) and
nu = [vx, vy, vz, wx, wy, wz] the body twist.  The Euler-rate map is singular
at |theta| = pi/2; a guard band of PITCH_GUARD radians around it aborts any
computation before the matrices blow up.

Module-level functions ending in ``_fleet`` operate on (n, ...) stacked arrays
for all vehicles at once; they are the hot path of the simulation loop and are
cross-checked against the single-vehicle functions in the test suite.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AttitudeSingularity, NonPositiveInertia

DOF = 6
PITCH_GUARD = 0.2
PITCH_LIMIT = math.pi / 2.0 - PITCH_GUARD


def _frozen(a):
    arr = np.asarray(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class AuvParams:
    """Physical parameters of one vehicle.

    ``lin_drag`` and ``added_mass`` hold the (negative) hydrodynamic
    coefficients as conventionally tabulated, so the damping matrix is
    -diag(lin_drag) and the effective inertia is m - added_mass per channel.
    ``tau_max`` is the per-channel actuator limit.
    """

    m: float = 20.0
    inertia: np.ndarray = (20.0, 30.0, 35.0)
    lin_drag: np.ndarray = (-8.0, -10.0, -9.0, -0.2, -0.25, -0.15)
    added_mass: np.ndarray = (-7.0, -8.0, -6.0, -20.0, -30.0, -35.0)
    tau_max: float = 300.0

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float).reshape(3)
        lin_drag = np.asarray(self.lin_drag, dtype=float).reshape(DOF)
        added = np.asarray(self.added_mass, dtype=float).reshape(DOF)
        if self.m <= 0.0:
            raise NonPositiveInertia(f"mass must be positive, got {self.m}")
        if np.any(inertia <= 0.0):
            raise NonPositiveInertia(f"moments of inertia must be positive, got {inertia}")
        if self.tau_max <= 0.0:
            raise ValueError(f"tau_max must be positive, got {self.tau_max}")
        eff = np.concatenate([self.m - added[:3], inertia - added[3:]])
        if np.any(eff <= 0.0):
            raise NonPositiveInertia(f"effective inertia must be positive, got {eff}")
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "tau_max", float(self.tau_max))
        object.__setattr__(self, "inertia", _frozen(inertia))
        object.__setattr__(self, "lin_drag", _frozen(lin_drag))
        object.__setattr__(self, "added_mass", _frozen(added))

    def effective_inertia(self) -> np.ndarray:
        """Diagonal of M: rigid-body inertia minus added mass, per channel."""
        return np.concatenate(
            [self.m - self.added_mass[:3], self.inertia - self.added_mass[3:]]
        )


def default_params() -> AuvParams:
    """Shipped vehicle parameter set (common to all agents in the default scenario)."""
    return AuvParams()


@dataclass(frozen=True)
class AuvState:
    """Pose eta and body twist nu of one vehicle."""

    eta: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float).reshape(DOF)
        nu = np.asarray(self.nu, dtype=float).reshape(DOF)
        if abs(eta[4]) >= PITCH_LIMIT:
            raise AttitudeSingularity(
                f"pitch {eta[4]:.3f} rad is inside the guard band around pi/2"
            )
        object.__setattr__(self, "eta", _frozen(eta))
        object.__setattr__(self, "nu", _frozen(nu))


def mass_matrix(p: AuvParams) -> np.ndarray:
    """Diagonal inertia matrix including added mass; symmetric positive definite."""
    return np.diag(p.effective_inertia())


def skew(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def coriolis_matrix(p: AuvParams, nu) -> np.ndarray:
    """Coriolis/centripetal matrix for the diagonal M; skew-symmetric for every nu."""
    nu = np.asarray(nu, dtype=float).reshape(DOF)
    diag = p.effective_inertia()
    lin_mom = diag[:3] * nu[:3]
    ang_mom = diag[3:] * nu[3:]
    c = np.zeros((DOF, DOF))
    c[:3, 3:] = -skew(lin_mom)
    c[3:, :3] = -skew(lin_mom)
    c[3:, 3:] = -skew(ang_mom)
    return c


def damping_matrix(p: AuvParams) -> np.ndarray:
    """Linear hydrodynamic damping, positive semidefinite diagonal."""
    return np.diag(-p.lin_drag)


def _check_pitch(theta: float):
    if abs(theta) >= PITCH_LIMIT:
        raise AttitudeSingularity(
            f"pitch {theta:.3f} rad is inside the guard band around pi/2"
        )


def rotation(eta2) -> np.ndarray:
    """Body-to-inertial rotation matrix from ZYX Euler angles (phi, theta, psi)."""
    phi, theta, psi = np.asarray(eta2, dtype=float).reshape(3)
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.array([
        [cp * ct, -sp * cf + cp * st * sf, sp * sf + cp * cf * st],
        [sp * ct, cp * cf + sf * st * sp, -cp * sf + st * sp * cf],
        [-st, ct * sf, ct * cf],
    ])


def euler_rate_map(eta2) -> np.ndarray:
    """Map from body angular velocity to Euler angle rates."""
    phi, theta, _ = np.asarray(eta2, dtype=float).reshape(3)
    _check_pitch(theta)
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    tt = st / ct
    return np.array([
        [1.0, sf * tt, cf * tt],
        [0.0, cf, -sf],
        [0.0, sf / ct, cf / ct],
    ])


def jacobian(eta2) -> np.ndarray:
    """Block-diagonal pose kinematics matrix [R, 0; 0, T]; invertible inside the guard."""
    j = np.zeros((DOF, DOF))
    j[:3, :3] = rotation(eta2)
    j[3:, 3:] = euler_rate_map(eta2)
    return j


def disturbance(t: float, state, enabled: bool = True) -> np.ndarray:
    """Lumped environmental disturbance and model-uncertainty force, body frame."""
    if not enabled:
        return np.zeros(DOF)
    nu = np.asarray(getattr(state, "nu", state), dtype=float).reshape(DOF)
    vx, vy, vz, wx, wy, wz = nu
    st, ct = math.sin(t), math.cos(t)
    return np.array([
        2.5 * st - 0.5 * vx ** 2 - 0.7 * math.sin(vx * vy),
        2.5 * ct + 0.1 * vx ** 2 + 0.5 * math.sin(vy),
        2.5 * st + 0.7 * vx ** 2 + 0.8 * math.sin(vz),
        0.5 * st + 0.2 * wx ** 3,
        0.5 * ct - 0.2 * wy ** 2,
        0.5 * st - 0.4 * wz ** 3,
    ])


def saturate(tau, p: AuvParams) -> np.ndarray:
    """Per-channel hard clip of the commanded torque to +-tau_max."""
    return np.clip(np.asarray(tau, dtype=float), -p.tau_max, p.tau_max)


def plant_derivative(state: AuvState, u, d, p: AuvParams) -> tuple:
    """Continuous-time state derivatives (etadot, nudot) under applied torque u and disturbance d."""
    u = np.asarray(u, dtype=float).reshape(DOF)
    d = np.asarray(d, dtype=float).reshape(DOF)
    eta_dot = jacobian(state.eta[3:]) @ state.nu
    rhs = u + d - coriolis_matrix(p, state.nu) @ state.nu - damping_matrix(p) @ state.nu
    nu_dot = rhs / p.effective_inertia()
    return eta_dot, nu_dot


# --- stacked fleet kernels ---------------------------------------------------


@dataclass(frozen=True)
class FleetParams:
    """Per-channel parameter arrays for n vehicles, shapes (n, 6) except tau_max (n, 1)."""

    inertia_diag: np.ndarray
    inv_inertia: np.ndarray
    drag: np.ndarray
    tau_max: np.ndarray

    @classmethod
    def from_params(cls, params) -> "FleetParams":
        diag = np.array([p.effective_inertia() for p in params])
        drag = np.array([-p.lin_drag for p in params])
        tau_max = np.array([[p.tau_max] for p in params])
        return cls(_frozen(diag), _frozen(1.0 / diag), _frozen(drag), _frozen(tau_max))

    @property
    def n(self) -> int:
        return self.inertia_diag.shape[0]


class FleetKinematics:
    """Rotation and Euler-rate maps for all vehicles at one instant.

    Holds R (n,3,3), the Euler-rate map T and its inverse, the inertial pose
    rates etadot = J nu, and the trig values needed for the time derivative
    of T.
    """

    __slots__ = ("rot", "tmap", "tmap_inv", "eta_dot", "_trig")

    def __init__(self, eta: np.ndarray, nu: np.ndarray, time: float = None):
        phi = eta[:, 3]
        theta = eta[:, 4]
        psi = eta[:, 5]
        bad = np.abs(theta) >= PITCH_LIMIT
        if np.any(bad):
            agent = int(np.argmax(bad))
            raise AttitudeSingularity(
                f"agent {agent} pitch {theta[agent]:.3f} rad inside the guard band"
                + (f" at t={time:.3f}" if time is not None else ""),
                agent=agent,
                time=time,
            )
        n = eta.shape[0]
        cf, sf = np.cos(phi), np.sin(phi)
        ct, st = np.cos(theta), np.sin(theta)
        cp, sp = np.cos(psi), np.sin(psi)
        tt = st / ct
        rot = np.empty((n, 3, 3))
        rot[:, 0, 0] = cp * ct
        rot[:, 0, 1] = -sp * cf + cp * st * sf
        rot[:, 0, 2] = sp * sf + cp * cf * st
        rot[:, 1, 0] = sp * ct
        rot[:, 1, 1] = cp * cf + sf * st * sp
        rot[:, 1, 2] = -cp * sf + st * sp * cf
        rot[:, 2, 0] = -st
        rot[:, 2, 1] = ct * sf
        rot[:, 2, 2] = ct * cf
        tmap = np.zeros((n, 3, 3))
        tmap[:, 0, 0] = 1.0
        tmap[:, 0, 1] = sf * tt
        tmap[:, 0, 2] = cf * tt
        tmap[:, 1, 1] = cf
        tmap[:, 1, 2] = -sf
        tmap[:, 2, 1] = sf / ct
        tmap[:, 2, 2] = cf / ct
        tmap_inv = np.zeros((n, 3, 3))
        tmap_inv[:, 0, 0] = 1.0
        tmap_inv[:, 0, 2] = -st
        tmap_inv[:, 1, 1] = cf
        tmap_inv[:, 1, 2] = ct * sf
        tmap_inv[:, 2, 1] = -sf
        tmap_inv[:, 2, 2] = ct * cf
        eta_dot = np.empty((n, DOF))
        eta_dot[:, :3] = (rot @ nu[:, :3, None])[:, :, 0]
        eta_dot[:, 3:] = (tmap @ nu[:, 3:, None])[:, :, 0]
        self.rot = rot
        self.tmap = tmap
        self.tmap_inv = tmap_inv
        self.eta_dot = eta_dot
        self._trig = (cf, sf, ct, st, tt)

    def tmap_rate(self) -> np.ndarray:
        """d/dt of the Euler-rate map along the current motion."""
        cf, sf, ct, st, tt = self._trig
        phi_dot = self.eta_dot[:, 3]
        theta_dot = self.eta_dot[:, 4]
        sec2 = 1.0 / ct ** 2
        n = self.rot.shape[0]
        td = np.zeros((n, 3, 3))
        td[:, 0, 1] = cf * tt * phi_dot + sf * sec2 * theta_dot
        td[:, 0, 2] = -sf * tt * phi_dot + cf * sec2 * theta_dot
        td[:, 1, 1] = -sf * phi_dot
        td[:, 1, 2] = -cf * phi_dot
        td[:, 2, 1] = cf / ct * phi_dot + sf * st * sec2 * theta_dot
        td[:, 2, 2] = -sf / ct * phi_dot + cf * st * sec2 * theta_dot
        return td


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    out[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    out[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return out


def body_force_terms_fleet(fp: FleetParams, nu: np.ndarray) -> tuple:
    """Coriolis force C(nu) nu and damping force D nu for all vehicles, (n, 6) each."""
    lin_mom = fp.inertia_diag[:, :3] * nu[:, :3]
    ang_mom = fp.inertia_diag[:, 3:] * nu[:, 3:]
    cnu = np.empty_like(nu)
    cnu[:, :3] = -_cross(lin_mom, nu[:, 3:])
    cnu[:, 3:] = -_cross(lin_mom, nu[:, :3]) - _cross(ang_mom, nu[:, 3:])
    return cnu, fp.drag * nu


def unforced_pose_accel_fleet(kin: FleetKinematics, fp: FleetParams, nu: np.ndarray,
                              cnu: np.ndarray, dnu: np.ndarray) -> np.ndarray:
    """Pose acceleration etaddot with zero applied force and zero disturbance.

    Equals Jdot nu - J M^-1 (C nu + D nu); the controllers cancel it by
    feedback linearization.
    """
    out = np.empty_like(nu)
    # Rdot nu1 = R (w x nu1) since Rdot = R S(w)
    out[:, :3] = (kin.rot @ _cross(nu[:, 3:], nu[:, :3])[:, :, None])[:, :, 0]
    out[:, 3:] = (kin.tmap_rate() @ nu[:, 3:, None])[:, :, 0]
    forces = fp.inv_inertia * (cnu + dnu)
    out[:, :3] -= (kin.rot @ forces[:, :3, None])[:, :, 0]
    out[:, 3:] -= (kin.tmap @ forces[:, 3:, None])[:, :, 0]
    return out


def accel_to_torque_fleet(kin: FleetKinematics, fp: FleetParams, accel: np.ndarray) -> np.ndarray:
    """Invert the pose-acceleration map: tau = M J^-1 accel, per vehicle."""
    out = np.empty_like(accel)
    rot_t = kin.rot.transpose(0, 2, 1)
    out[:, :3] = (rot_t @ accel[:, :3, None])[:, :, 0]
    out[:, 3:] = (kin.tmap_inv @ accel[:, 3:, None])[:, :, 0]
    out *= fp.inertia_diag
    return out


def torque_to_accel_fleet(kin: FleetKinematics, fp: FleetParams, tau: np.ndarray) -> np.ndarray:
    """Pose acceleration produced by a body force/torque: J M^-1 tau, per vehicle."""
    forces = fp.inv_inertia * tau
    out = np.empty_like(tau)
    out[:, :3] = (kin.rot @ forces[:, :3, None])[:, :, 0]
    out[:, 3:] = (kin.tmap @ forces[:, 3:, None])[:, :, 0]
    return out


def disturbance_fleet(t: float, nu: np.ndarray, enabled: bool) -> np.ndarray:
    """Stacked disturbance forces, (n, 6)."""
    if not enabled:
        return np.zeros_like(nu)
    vx, vy, vz = nu[:, 0], nu[:, 1], nu[:, 2]
    wx, wy, wz = nu[:, 3], nu[:, 4], nu[:, 5]
    st, ct = math.sin(t), math.cos(t)
    vx2 = vx * vx
    out = np.empty_like(nu)
    out[:, 0] = 2.5 * st - 0.5 * vx2 - 0.7 * np.sin(vx * vy)
    out[:, 1] = 2.5 * ct + 0.1 * vx2 + 0.5 * np.sin(vy)
    out[:, 2] = 2.5 * st + 0.7 * vx2 + 0.8 * np.sin(vz)
    out[:, 3] = 0.5 * st + 0.2 * wx ** 3
    out[:, 4] = 0.5 * ct - 0.2 * wy ** 2
    out[:, 5] = 0.5 * st - 0.4 * wz ** 3
    return out

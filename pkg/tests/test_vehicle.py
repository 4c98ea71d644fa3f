"""Vehicle dynamics contracts and fleet-kernel consistency."""

import math

import numpy as np
import pytest

from auvformation.errors import AttitudeSingularity, NonPositiveInertia
from auvformation.sim import rk4_step
from auvformation.vehicle import (
    AuvParams,
    AuvState,
    FleetKinematics,
    FleetParams,
    accel_to_torque_fleet,
    body_force_terms_fleet,
    coriolis_matrix,
    damping_matrix,
    default_params,
    disturbance,
    disturbance_fleet,
    euler_rate_map,
    jacobian,
    mass_matrix,
    plant_derivative,
    rotation,
    saturate,
    skew,
    torque_to_accel_fleet,
    unforced_pose_accel_fleet,
)


def random_state(rng, attitude_scale=0.5):
    eta = rng.normal(scale=3.0, size=6)
    eta[3:] = rng.uniform(-attitude_scale, attitude_scale, 3)
    nu = rng.normal(scale=1.0, size=6)
    return AuvState(eta, nu)


class TestParams:
    def test_defaults_effective_inertia(self):
        # per-channel arithmetic: rigid value minus tabulated added mass
        assert np.array_equal(
            default_params().effective_inertia(), [27.0, 28.0, 26.0, 40.0, 60.0, 70.0]
        )

    def test_rejects_nonpositive_mass(self):
        with pytest.raises(NonPositiveInertia):
            AuvParams(m=0.0)

    def test_rejects_nonpositive_effective(self):
        with pytest.raises(NonPositiveInertia):
            AuvParams(added_mass=(25.0, 0, 0, 0, 0, 0))

    def test_rejects_nonpositive_tau_max(self):
        with pytest.raises(ValueError):
            AuvParams(tau_max=0.0)


class TestMassMatrix:
    def test_default_values(self):
        assert np.array_equal(
            mass_matrix(default_params()),
            np.diag([27.0, 28.0, 26.0, 40.0, 60.0, 70.0]),
        )

    def test_zero_added_mass(self):
        p = AuvParams(added_mass=np.zeros(6))
        assert np.array_equal(mass_matrix(p), np.diag([20.0, 20, 20, 20, 30, 35]))

    def test_positive_definite(self):
        assert np.linalg.eigvalsh(mass_matrix(default_params())).min() > 0.0


class TestCoriolis:
    def test_zero_twist(self):
        assert np.array_equal(coriolis_matrix(default_params(), np.zeros(6)), np.zeros((6, 6)))

    @pytest.mark.parametrize("seed", range(5))
    def test_skew_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        nu = rng.normal(size=6)
        c = coriolis_matrix(default_params(), nu)
        assert np.allclose(c, -c.T, atol=1e-12)
        for _ in range(3):
            x = rng.normal(size=6)
            assert abs(x @ c @ x) < 1e-10

    def test_unit_surge_hand_expansion(self):
        # momentum (27, 0, 0): only the cross blocks against it survive
        c = coriolis_matrix(default_params(), [1.0, 0, 0, 0, 0, 0])
        block = -skew([27.0, 0.0, 0.0])
        expected = np.zeros((6, 6))
        expected[:3, 3:] = block
        expected[3:, :3] = block
        assert np.array_equal(c, expected)

    def test_linear_in_twist(self):
        rng = np.random.default_rng(11)
        a, b = rng.normal(size=6), rng.normal(size=6)
        p = default_params()
        lhs = coriolis_matrix(p, 2.0 * a + 3.0 * b)
        rhs = 2.0 * coriolis_matrix(p, a) + 3.0 * coriolis_matrix(p, b)
        assert np.allclose(lhs, rhs, atol=1e-12)


class TestDamping:
    def test_default_values(self):
        assert np.array_equal(
            damping_matrix(default_params()),
            np.diag([8.0, 10.0, 9.0, 0.2, 0.25, 0.15]),
        )

    def test_zero_drag(self):
        assert np.array_equal(
            damping_matrix(AuvParams(lin_drag=np.zeros(6))), np.zeros((6, 6))
        )

    def test_dissipative(self):
        rng = np.random.default_rng(3)
        d = damping_matrix(default_params())
        for _ in range(5):
            nu = rng.normal(size=6)
            assert nu @ d @ nu >= 0.0


def rodrigues(axis_angle):
    """Rotation about axis*|angle| via the exponential map (test oracle)."""
    angle = np.linalg.norm(axis_angle)
    if angle < 1e-15:
        return np.eye(3)
    k = skew(axis_angle / angle)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def euler_from_rotation(r):
    """ZYX Euler extraction (test oracle)."""
    theta = -math.asin(r[2, 0])
    phi = math.atan2(r[2, 1], r[2, 2])
    psi = math.atan2(r[1, 0], r[0, 0])
    return np.array([phi, theta, psi])


class TestJacobian:
    def test_identity_at_zero_attitude(self):
        assert np.allclose(jacobian(np.zeros(3)), np.eye(6), atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_rotation_orthonormal(self, seed):
        rng = np.random.default_rng(seed)
        eta2 = rng.uniform(-1.2, 1.2, 3)
        r = rotation(eta2)
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    def test_euler_rate_map_finite_difference_oracle(self):
        # propagate the exact rotation under constant body rates and compare
        # the analytic Euler-rate map against a central difference of the
        # extracted angles
        eta2 = np.array([0.0, 0.3, 0.0])
        omega = np.array([0.37, -0.82, 0.55])
        r0 = rotation(eta2)
        h = 1e-6
        plus = euler_from_rotation(r0 @ rodrigues(omega * h))
        minus = euler_from_rotation(r0 @ rodrigues(-omega * h))
        fd_rates = (plus - minus) / (2.0 * h)
        assert np.allclose(euler_rate_map(eta2) @ omega, fd_rates, atol=1e-7)

    def test_singularity_guard(self):
        with pytest.raises(AttitudeSingularity):
            jacobian([0.0, math.pi / 2 - 0.1, 0.0])

    def test_state_guard(self):
        with pytest.raises(AttitudeSingularity):
            AuvState([0, 0, 0, 0, math.pi / 2, 0], np.zeros(6))


class TestDisturbance:
    def test_rest_at_zero_time(self):
        d = disturbance(0.0, AuvState(np.zeros(6), np.zeros(6)))
        assert np.allclose(d, [0.0, 2.5, 0.0, 0.0, 0.5, 0.0], atol=1e-12)

    def test_disabled(self):
        d = disturbance(1.7, AuvState(np.zeros(6), np.ones(6) * 0.4), enabled=False)
        assert np.array_equal(d, np.zeros(6))

    def test_quarter_period(self):
        d = disturbance(math.pi / 2, AuvState(np.zeros(6), np.zeros(6)))
        assert np.allclose(d, [2.5, 0.0, 2.5, 0.5, 0.0, 0.5], atol=1e-12)


class TestSaturate:
    def test_clip_above(self):
        assert saturate([400.0] * 6, default_params())[0] == 300.0

    def test_pass_through(self):
        assert saturate([-150.0] * 6, default_params())[0] == -150.0

    def test_boundary(self):
        assert saturate([-300.0] * 6, default_params())[0] == -300.0

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        tau = rng.normal(scale=500.0, size=6)
        once = saturate(tau, default_params())
        assert np.array_equal(saturate(once, default_params()), once)


class TestPlantDerivative:
    def test_rest_equilibrium(self):
        state = AuvState(np.zeros(6), np.zeros(6))
        eta_dot, nu_dot = plant_derivative(state, np.zeros(6), np.zeros(6), default_params())
        assert np.array_equal(eta_dot, np.zeros(6))
        assert np.array_equal(nu_dot, np.zeros(6))

    def test_surge_force_diagonal_solve(self):
        state = AuvState(np.zeros(6), np.zeros(6))
        _, nu_dot = plant_derivative(
            state, [54.0, 0, 0, 0, 0, 0], np.zeros(6), default_params()
        )
        assert np.allclose(nu_dot, [2.0, 0, 0, 0, 0, 0], atol=1e-14)

    def test_steady_state_drag_balance(self):
        # fixed point of pure surge: u = D v, C contributes nothing
        u = np.array([16.0, 0, 0, 0, 0, 0])
        v = u[0] / 8.0
        state = AuvState(np.zeros(6), [v, 0, 0, 0, 0, 0])
        _, nu_dot = plant_derivative(state, u, np.zeros(6), default_params())
        assert np.abs(nu_dot).max() < 1e-13

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        state = random_state(rng)
        u, d = rng.normal(size=6), rng.normal(size=6)
        a = plant_derivative(state, u, d, default_params())
        b = plant_derivative(state, u, d, default_params())
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_free_motion_energy_decays(self):
        # d/dt (kinetic energy) = -nu D nu with u = d = 0
        p = default_params()
        diag = p.effective_inertia()
        drag = -p.lin_drag
        dt = 1e-3
        state = np.concatenate([np.zeros(6), [0.8, -0.5, 0.3, 0.4, -0.2, 0.3]])

        def f(t, y):
            st = AuvState(y[:6], y[6:])
            eta_dot, nu_dot = plant_derivative(st, np.zeros(6), np.zeros(6), p)
            return np.concatenate([eta_dot, nu_dot])

        for k in range(1000):
            nu = state[6:]
            energy = 0.5 * float(diag @ nu ** 2)
            state = rk4_step(state, k * dt, dt, f)
            nu2 = state[6:]
            energy2 = 0.5 * float(diag @ nu2 ** 2)
            expected_rate = -float(drag @ (nu ** 2))
            assert energy2 <= energy + 1e-12
            assert abs((energy2 - energy) / dt - expected_rate) < 1e-3 * max(1.0, abs(expected_rate))


class TestFleetKernels:
    """The stacked kernels must agree with the single-vehicle contract functions."""

    def setup_method(self):
        rng = np.random.default_rng(77)
        self.params = [default_params(), AuvParams(m=25.0, tau_max=120.0),
                       AuvParams(inertia=(22.0, 31.0, 33.0))]
        self.states = [random_state(rng) for _ in range(3)]
        self.eta = np.array([s.eta for s in self.states])
        self.nu = np.array([s.nu for s in self.states])
        self.fp = FleetParams.from_params(self.params)
        self.kin = FleetKinematics(self.eta, self.nu)

    def test_kinematics_blocks(self):
        for i, s in enumerate(self.states):
            assert np.allclose(self.kin.rot[i], rotation(s.eta[3:]), atol=1e-14)
            assert np.allclose(self.kin.tmap[i], euler_rate_map(s.eta[3:]), atol=1e-14)
            assert np.allclose(
                self.kin.tmap_inv[i] @ self.kin.tmap[i], np.eye(3), atol=1e-12
            )
            assert np.allclose(self.kin.eta_dot[i], jacobian(s.eta[3:]) @ s.nu, atol=1e-13)

    def test_body_forces(self):
        cnu, dnu = body_force_terms_fleet(self.fp, self.nu)
        for i, (s, p) in enumerate(zip(self.states, self.params)):
            assert np.allclose(cnu[i], coriolis_matrix(p, s.nu) @ s.nu, atol=1e-12)
            assert np.allclose(dnu[i], damping_matrix(p) @ s.nu, atol=1e-12)

    def test_unforced_accel_matches_finite_difference(self):
        # etaddot with zero force equals d/dt (J nu) along the free plant flow
        cnu, dnu = body_force_terms_fleet(self.fp, self.nu)
        unforced = unforced_pose_accel_fleet(self.kin, self.fp, self.nu, cnu, dnu)
        h = 1e-6
        for i, (s, p) in enumerate(zip(self.states, self.params)):
            def pose_rate(eta, nu):
                return jacobian(eta[3:]) @ nu

            eta_dot, nu_dot = plant_derivative(s, np.zeros(6), np.zeros(6), p)
            plus = pose_rate(s.eta + h * eta_dot, s.nu + h * nu_dot)
            minus = pose_rate(s.eta - h * eta_dot, s.nu - h * nu_dot)
            fd = (plus - minus) / (2.0 * h)
            assert np.allclose(unforced[i], fd, rtol=1e-6, atol=1e-6)

    def test_torque_maps_are_inverse_pair(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(3, 6))
        tau = accel_to_torque_fleet(self.kin, self.fp, x)
        back = torque_to_accel_fleet(self.kin, self.fp, tau)
        assert np.allclose(back, x, atol=1e-11)
        for i, (s, p) in enumerate(zip(self.states, self.params)):
            explicit = mass_matrix(p) @ np.linalg.inv(jacobian(s.eta[3:])) @ x[i]
            assert np.allclose(tau[i], explicit, atol=1e-9)

    def test_disturbance_fleet_matches_single(self):
        t = 1.234
        d = disturbance_fleet(t, self.nu, True)
        for i, s in enumerate(self.states):
            assert np.allclose(d[i], disturbance(t, s), atol=1e-14)
        assert np.array_equal(disturbance_fleet(t, self.nu, False), np.zeros((3, 6)))

    def test_singularity_reports_agent(self):
        eta = self.eta.copy()
        eta[1, 4] = math.pi / 2 - 0.05
        with pytest.raises(AttitudeSingularity) as err:
            FleetKinematics(eta, self.nu, time=2.5)
        assert err.value.agent == 1
        assert err.value.time == 2.5

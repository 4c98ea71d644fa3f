"""Numba-compiled closed-loop derivative, drop-in accelerator for the simulator.

This mirrors the pure-numpy evaluator in sim.py step for step (same model,
same clamps, same operation structure) and is cross-checked against it by the
test suite.  run() prefers this path when numba is importable and the
AUVFORMATION_NO_NUMBA environment variable is unset; everything user-facing,
including all public operations, stays on the numpy implementations.

The kernel writes the bundle rate and the per-sample extras into caller-owned
buffers and returns -1, or the offending agent index when a pitch angle
enters the singularity guard band.
"""

import math

import numpy as np
from numba import njit

CTRL_FT = 0
CTRL_ADAPTIVE = 1
CTRL_BASELINE = 2

LEADER_EXP = 0
LEADER_CONSTANT = 1

# gains vector layout
G_K1, G_K2, G_K3, G_K8, G_K9, G_K10, G_GAMMA, G_IOTA, G_BETA_S, G_EPS_BL, \
    G_EPS_SING, G_W1, G_W2, G_K1B, G_BETA0, G_EPS_BLB = range(16)

PITCH_LIMIT = math.pi / 2.0 - 0.2
SUM_FLOOR = 1e-300


@njit(cache=True)
def _signed_pow(x, a):
    if x > 0.0:
        return x ** a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


@njit(cache=True)
def eval_rates(t, y, ydot, n, ctrl, smooth, dist_on, leader_kind,
               leader_coef, leader_pose, h, pin, bias,
               m_diag, minv, drag, tau_max, g, centers, inv_width,
               eps1, eps2, tau, u, s1, s2):
    # leader reference
    pd = np.zeros(6)
    vd = np.zeros(6)
    ad = np.zeros(6)
    if leader_kind == LEADER_EXP:
        amp = leader_coef[0]
        rate = leader_coef[1]
        decay = math.exp(-rate * t)
        pd[0] = amp * (1.0 - decay)
        pd[1] = leader_coef[2] * t
        pd[2] = leader_coef[3] * t
        vd[0] = amp * rate * decay
        vd[1] = leader_coef[2]
        vd[2] = leader_coef[3]
        ad[0] = -amp * rate * rate * decay
    else:
        for c in range(6):
            pd[c] = leader_pose[c]

    eta = y[: 6 * n].reshape(n, 6)
    nu = y[6 * n: 12 * n].reshape(n, 6)
    mu = y[12 * n: 18 * n].reshape(n, 6)
    theta = y[18 * n:]

    rot = np.empty((n, 3, 3))
    tmap = np.zeros((n, 3, 3))
    tinv = np.zeros((n, 3, 3))
    tdot = np.zeros((n, 3, 3))
    etadot = np.empty((n, 6))
    for i in range(n):
        pitch = eta[i, 4]
        if abs(pitch) >= PITCH_LIMIT:
            return i
        cf = math.cos(eta[i, 3])
        sf = math.sin(eta[i, 3])
        ct = math.cos(pitch)
        st = math.sin(pitch)
        cp = math.cos(eta[i, 5])
        sp = math.sin(eta[i, 5])
        tt = st / ct
        rot[i, 0, 0] = cp * ct
        rot[i, 0, 1] = -sp * cf + cp * st * sf
        rot[i, 0, 2] = sp * sf + cp * cf * st
        rot[i, 1, 0] = sp * ct
        rot[i, 1, 1] = cp * cf + sf * st * sp
        rot[i, 1, 2] = -cp * sf + st * sp * cf
        rot[i, 2, 0] = -st
        rot[i, 2, 1] = ct * sf
        rot[i, 2, 2] = ct * cf
        tmap[i, 0, 0] = 1.0
        tmap[i, 0, 1] = sf * tt
        tmap[i, 0, 2] = cf * tt
        tmap[i, 1, 1] = cf
        tmap[i, 1, 2] = -sf
        tmap[i, 2, 1] = sf / ct
        tmap[i, 2, 2] = cf / ct
        tinv[i, 0, 0] = 1.0
        tinv[i, 0, 2] = -st
        tinv[i, 1, 1] = cf
        tinv[i, 1, 2] = ct * sf
        tinv[i, 2, 1] = -sf
        tinv[i, 2, 2] = ct * cf
        for r in range(3):
            etadot[i, r] = (rot[i, r, 0] * nu[i, 0] + rot[i, r, 1] * nu[i, 1]
                            + rot[i, r, 2] * nu[i, 2])
            etadot[i, 3 + r] = (tmap[i, r, 0] * nu[i, 3] + tmap[i, r, 1] * nu[i, 4]
                                + tmap[i, r, 2] * nu[i, 5])
        phi_dot = etadot[i, 3]
        theta_dot = etadot[i, 4]
        sec2 = 1.0 / (ct * ct)
        tdot[i, 0, 1] = cf * tt * phi_dot + sf * sec2 * theta_dot
        tdot[i, 0, 2] = -sf * tt * phi_dot + cf * sec2 * theta_dot
        tdot[i, 1, 1] = -sf * phi_dot
        tdot[i, 1, 2] = -cf * phi_dot
        tdot[i, 2, 1] = cf / ct * phi_dot + sf * st * sec2 * theta_dot
        tdot[i, 2, 2] = -sf / ct * phi_dot + cf * st * sec2 * theta_dot

    # consensus errors
    for i in range(n):
        for c in range(6):
            acc1 = 0.0
            acc2 = 0.0
            for j in range(n):
                acc1 += h[i, j] * eta[j, c]
                acc2 += h[i, j] * etadot[j, c]
            eps1[i, c] = acc1 - bias[i, c] - pin[i] * pd[c]
            eps2[i, c] = acc2 - pin[i] * vd[c]

    # body-frame force terms
    cnu = np.empty((n, 6))
    dnu = np.empty((n, 6))
    for i in range(n):
        ax = m_diag[i, 0] * nu[i, 0]
        ay = m_diag[i, 1] * nu[i, 1]
        az = m_diag[i, 2] * nu[i, 2]
        bx = m_diag[i, 3] * nu[i, 3]
        by = m_diag[i, 4] * nu[i, 4]
        bz = m_diag[i, 5] * nu[i, 5]
        vx = nu[i, 0]
        vy = nu[i, 1]
        vz = nu[i, 2]
        wx = nu[i, 3]
        wy = nu[i, 4]
        wz = nu[i, 5]
        cnu[i, 0] = -(ay * wz - az * wy)
        cnu[i, 1] = -(az * wx - ax * wz)
        cnu[i, 2] = -(ax * wy - ay * wx)
        cnu[i, 3] = -(ay * vz - az * vy) - (by * wz - bz * wy)
        cnu[i, 4] = -(az * vx - ax * vz) - (bz * wx - bx * wz)
        cnu[i, 5] = -(ax * vy - ay * vx) - (bx * wy - by * wx)
        for c in range(6):
            dnu[i, c] = drag[i, c] * nu[i, c]

    # unforced pose acceleration
    unforced = np.empty((n, 6))
    for i in range(n):
        vx = nu[i, 0]
        vy = nu[i, 1]
        vz = nu[i, 2]
        wx = nu[i, 3]
        wy = nu[i, 4]
        wz = nu[i, 5]
        cr0 = wy * vz - wz * vy
        cr1 = wz * vx - wx * vz
        cr2 = wx * vy - wy * vx
        f0 = minv[i, 0] * (cnu[i, 0] + dnu[i, 0])
        f1 = minv[i, 1] * (cnu[i, 1] + dnu[i, 1])
        f2 = minv[i, 2] * (cnu[i, 2] + dnu[i, 2])
        f3 = minv[i, 3] * (cnu[i, 3] + dnu[i, 3])
        f4 = minv[i, 4] * (cnu[i, 4] + dnu[i, 4])
        f5 = minv[i, 5] * (cnu[i, 5] + dnu[i, 5])
        for r in range(3):
            unforced[i, r] = (rot[i, r, 0] * (cr0 - f0) + rot[i, r, 1] * (cr1 - f1)
                              + rot[i, r, 2] * (cr2 - f2))
            unforced[i, 3 + r] = (tdot[i, r, 0] * wx + tdot[i, r, 1] * wy
                                  + tdot[i, r, 2] * wz
                                  - (tmap[i, r, 0] * f3 + tmap[i, r, 1] * f4
                                     + tmap[i, r, 2] * f5))

    # fuzzy basis energy (adaptive controller only)
    psi_sq = np.zeros(n)
    if ctrl == CTRL_ADAPTIVE:
        n_rules = centers.shape[0]
        acts = np.empty(n_rules)
        for i in range(n):
            total = 0.0
            for j in range(n_rules):
                ssum = 0.0
                for c in range(6):
                    d_eta = eta[i, c] - centers[j]
                    d_nu = nu[i, c] - centers[j]
                    ssum += d_eta * d_eta + d_nu * d_nu
                a = math.exp(-ssum * inv_width)
                acts[j] = a
                total += a
            if total < SUM_FLOOR:
                total = SUM_FLOOR
            energy = 0.0
            for j in range(n_rules):
                p = acts[j] / total
                energy += p * p
            psi_sq[i] = energy

    inner = np.empty((n, 6))
    if ctrl == CTRL_BASELINE:
        k1b = g[G_K1B]
        s_norm_sq = 0.0
        for i in range(n):
            for c in range(6):
                acc = 0.0
                for j in range(n):
                    acc += h[i, j] * eps1[j, c]
                v = k1b * acc + eps2[i, c]
                s2[i, c] = v
                s1[i, c] = eps1[i, c]
                s_norm_sq += v * v
        denom = math.sqrt(s_norm_sq) + g[G_EPS_BLB]
        for i in range(n):
            for c in range(6):
                inner[i, c] = (-unforced[i, c] - k1b * eps2[i, c] + ad[c]
                               - g[G_BETA0] * s2[i, c] / denom)
    else:
        gamma = g[G_GAMMA]
        iota = g[G_IOTA]
        alpha = np.empty((n, 6))
        alpha_rate = np.empty((n, 6))
        for i in range(n):
            for c in range(6):
                v = eps1[i, c]
                mag = abs(v)
                alpha[i, c] = -(g[G_K1] * v + g[G_K2] * _signed_pow(v, gamma)
                                + g[G_K3] * _signed_pow(v, iota))
                reg = mag if mag > g[G_EPS_SING] else g[G_EPS_SING]
                slope = (g[G_K1] + g[G_K2] * gamma * reg ** (gamma - 1.0)
                         + g[G_K3] * iota * mag ** (iota - 1.0))
                alpha_rate[i, c] = -slope * eps2[i, c]
                s1[i, c] = v
        use_mu = ctrl == CTRL_ADAPTIVE
        s_norm_sq = 0.0
        for i in range(n):
            for c in range(6):
                acc = 0.0
                for j in range(n):
                    if use_mu:
                        acc += h[i, j] * (alpha[j, c] + mu[j, c])
                    else:
                        acc += h[i, j] * alpha[j, c]
                v = eps2[i, c] - acc
                s2[i, c] = v
                s_norm_sq += v * v
        denom = math.sqrt(s_norm_sq) + g[G_EPS_BL]
        for i in range(n):
            comp_gain = 0.5 * theta[i] * psi_sq[i] if use_mu else 0.0
            for c in range(6):
                v = s2[i, c]
                if smooth == 1:
                    sw = v / denom
                elif v > 0.0:
                    sw = 1.0
                elif v < 0.0:
                    sw = -1.0
                else:
                    sw = 0.0
                reach = (-g[G_BETA_S] * sw - g[G_K8] * v
                         - g[G_K9] * _signed_pow(v, gamma)
                         - g[G_K10] * _signed_pow(v, iota))
                inner[i, c] = -unforced[i, c] + ad[c] + alpha_rate[i, c] + reach
                if use_mu:
                    inner[i, c] -= mu[i, c] + comp_gain * v

    # torque command, hard clip, plant rates
    sin_t = math.sin(t)
    cos_t = math.cos(t)
    d_force = np.zeros(6)
    for i in range(n):
        for r in range(3):
            lin = (rot[i, 0, r] * inner[i, 0] + rot[i, 1, r] * inner[i, 1]
                   + rot[i, 2, r] * inner[i, 2])
            ang = (tinv[i, r, 0] * inner[i, 3] + tinv[i, r, 1] * inner[i, 4]
                   + tinv[i, r, 2] * inner[i, 5])
            tau[i, r] = m_diag[i, r] * lin
            tau[i, 3 + r] = m_diag[i, 3 + r] * ang
        cap = tau_max[i, 0]
        for c in range(6):
            v = tau[i, c]
            u[i, c] = cap if v > cap else (-cap if v < -cap else v)
        if dist_on == 1:
            vx = nu[i, 0]
            vx2 = vx * vx
            d_force[0] = 2.5 * sin_t - 0.5 * vx2 - 0.7 * math.sin(vx * nu[i, 1])
            d_force[1] = 2.5 * cos_t + 0.1 * vx2 + 0.5 * math.sin(nu[i, 1])
            d_force[2] = 2.5 * sin_t + 0.7 * vx2 + 0.8 * math.sin(nu[i, 2])
            d_force[3] = 0.5 * sin_t + 0.2 * nu[i, 3] ** 3
            d_force[4] = 0.5 * cos_t - 0.2 * nu[i, 4] ** 2
            d_force[5] = 0.5 * sin_t - 0.4 * nu[i, 5] ** 3
        for c in range(6):
            ydot[6 * i + c] = etadot[i, c]
            ydot[6 * n + 6 * i + c] = minv[i, c] * (u[i, c] + d_force[c]
                                                    - cnu[i, c] - dnu[i, c])

    # auxiliary state and adaptation (adaptive controller only)
    if ctrl == CTRL_ADAPTIVE:
        gap = np.empty(6)
        for i in range(n):
            cap = tau_max[i, 0]
            for c in range(6):
                gap[c] = minv[i, c] * (cap * math.tanh(tau[i, c] / cap) - tau[i, c])
            for r in range(3):
                ydot[12 * n + 6 * i + r] = (-mu[i, r] + rot[i, r, 0] * gap[0]
                                            + rot[i, r, 1] * gap[1]
                                            + rot[i, r, 2] * gap[2])
                ydot[12 * n + 6 * i + 3 + r] = (-mu[i, 3 + r] + tmap[i, r, 0] * gap[3]
                                                + tmap[i, r, 1] * gap[4]
                                                + tmap[i, r, 2] * gap[5])
        for i in range(n):
            drive = 0.0
            for j in range(n):
                s2_sq = 0.0
                for c in range(6):
                    s2_sq += s2[j, c] * s2[j, c]
                drive += h[i, j] * s2_sq * psi_sq[j]
            ydot[18 * n + i] = (0.5 * drive
                                - g[G_W1] * _signed_pow(theta[i], g[G_GAMMA])
                                - g[G_W2] * _signed_pow(theta[i], g[G_IOTA]))
    else:
        for k in range(12 * n, 19 * n):
            ydot[k] = 0.0

    return -1

"""Pure-Python versions of the numerical kernels.

Every function here mirrors one in ``_kernels.pyx`` operation for operation,
including the order in which uniforms are pulled from the generator, so the
two backends agree draw-for-draw on the stochastic paths.

Parameter vectors are packed by :func:`dengue_seir.kernels.pack` as
``[beta_np, a_beta, beta_p, t_p, sigma, omega, delta, gamma, mu, N]``.
"""
import math

import numpy as np

EXTINCT = 0
OUTBREAK = 1
CENSORED = 2

_RENORM_HI = 1e32
_RENORM_LO = 1e-32


def _beta_raw(s, beta_np, a_beta, beta_p, t_p, sigma):
    z = s - t_p
    gauss = a_beta * math.exp(-(z * z) / (2.0 * sigma * sigma))
    logistic = beta_p / (1.0 + math.exp((z - sigma) / sigma))
    return beta_np + gauss + logistic


def beta_value(t, beta_np, a_beta, beta_p, t_p, sigma, omega):
    tw = math.fmod(t, omega)
    if tw < 0.0:
        tw += omega
    return _beta_raw(tw, beta_np, a_beta, beta_p, t_p, sigma)


def _period_start(t, omega):
    # RK4 stages share the period of the step start, so a stage landing
    # exactly on the period boundary sees the left limit of the rate
    return omega * math.floor(t / omega)


def _rhs(q, s, S, E, I, R):
    b = _beta_raw(s, q[0], q[1], q[2], q[3], q[4])
    delta, gamma, mu, N = q[6], q[7], q[8], q[9]
    force = b * I * S / N
    dS = mu * N - force - mu * S
    dE = force - (delta + mu) * E
    dI = delta * E - (gamma + mu) * I
    dR = gamma * I - mu * R
    return dS, dE, dI, dR


def seir_rk4(q, y0, t0, n_days, steps_per_day):
    """Fixed-step RK4 over ``n_days``; returns (daily states, failing step or -1)."""
    q = [float(v) for v in q]
    N = q[9]
    h = 1.0 / steps_per_day
    floor = -1e-9 * N
    out = np.empty((n_days + 1, 4))
    S, E, I, R = (float(v) for v in y0)
    out[0] = (S, E, I, R)
    k = 0
    for day in range(n_days):
        for _ in range(steps_per_day):
            t = t0 + k * h
            t = t - _period_start(t, q[5])
            a1, a2, a3, a4 = _rhs(q, t, S, E, I, R)
            th = t + 0.5 * h
            b1, b2, b3, b4 = _rhs(q, th, S + 0.5 * h * a1, E + 0.5 * h * a2,
                                  I + 0.5 * h * a3, R + 0.5 * h * a4)
            c1, c2, c3, c4 = _rhs(q, th, S + 0.5 * h * b1, E + 0.5 * h * b2,
                                  I + 0.5 * h * b3, R + 0.5 * h * b4)
            d1, d2, d3, d4 = _rhs(q, t + h, S + h * c1, E + h * c2,
                                  I + h * c3, R + h * c4)
            S = S + (h / 6.0) * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
            E = E + (h / 6.0) * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
            I = I + (h / 6.0) * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
            R = R + (h / 6.0) * (a4 + 2.0 * b4 + 2.0 * c4 + d4)
            k += 1
            if S < floor or E < floor or I < floor or R < floor:
                return out[: day + 1], k
        out[day + 1] = (S, E, I, R)
    return out, -1


def _lin_rhs(q, lam, t, x00, x01, x10, x11):
    # d/dt X = [[-(delta+mu), beta/lam], [delta, -(gamma+mu)]] X
    b = _beta_raw(t, q[0], q[1], q[2], q[3], q[4]) / lam
    a = -(q[6] + q[8])
    d = -(q[7] + q[8])
    c = q[6]
    return (a * x00 + b * x10, a * x01 + b * x11,
            c * x00 + d * x10, c * x01 + d * x11)


def log_monodromy_radius(q, lam, h):
    """Log of the dominant Floquet multiplier of the scaled linearisation.

    Integrates over exactly one period starting at 0, so the rate is taken
    unwrapped on ``[0, omega]``.
    """
    q = [float(v) for v in q]
    omega = q[5]
    n = max(1, int(round(omega / h)))
    h = omega / n
    x00, x01, x10, x11 = 1.0, 0.0, 0.0, 1.0
    logscale = 0.0
    for k in range(n):
        t = k * h
        th = t + 0.5 * h
        a = _lin_rhs(q, lam, t, x00, x01, x10, x11)
        b = _lin_rhs(q, lam, th, x00 + 0.5 * h * a[0], x01 + 0.5 * h * a[1],
                     x10 + 0.5 * h * a[2], x11 + 0.5 * h * a[3])
        c = _lin_rhs(q, lam, th, x00 + 0.5 * h * b[0], x01 + 0.5 * h * b[1],
                     x10 + 0.5 * h * b[2], x11 + 0.5 * h * b[3])
        d = _lin_rhs(q, lam, t + h, x00 + h * c[0], x01 + h * c[1],
                     x10 + h * c[2], x11 + h * c[3])
        x00 = x00 + (h / 6.0) * (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0])
        x01 = x01 + (h / 6.0) * (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1])
        x10 = x10 + (h / 6.0) * (a[2] + 2.0 * b[2] + 2.0 * c[2] + d[2])
        x11 = x11 + (h / 6.0) * (a[3] + 2.0 * b[3] + 2.0 * c[3] + d[3])
        m = max(abs(x00), abs(x01), abs(x10), abs(x11))
        if m > _RENORM_HI or m < _RENORM_LO:
            x00 /= m
            x01 /= m
            x10 /= m
            x11 /= m
            logscale += math.log(m)
    return logscale + math.log(_spectral_radius_2x2(x00, x01, x10, x11))


def _spectral_radius_2x2(a, b, c, d):
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    disc = half_tr * half_tr - det
    if disc >= 0.0:
        root = math.sqrt(disc)
        return max(abs(half_tr + root), abs(half_tr - root))
    return math.sqrt(det)


def ctmc_path(q, S, E, I, R, t0, ol, t_max, rng, record=False):
    """One CTMC sample path by thinning the infection channel.

    Returns ``(outcome, t_end, events, log)``; ``log`` is a list of
    ``(t, S, E, I, R)`` after every accepted event when ``record`` is set,
    otherwise ``None``.
    """
    q = [float(v) for v in q]
    beta_np, a_beta, beta_p, t_p, sigma, omega = q[:6]
    delta, gamma, mu, N = q[6], q[7], q[8], q[9]
    bmax = beta_np + a_beta + beta_p
    birth = mu * N
    t = float(t0)
    events = 0
    log = [(t, S, E, I, R)] if record else None
    while True:
        if E + I == 0:
            return EXTINCT, t, events, log
        if E + I >= ol:
            return OUTBREAK, t, events, log
        r2 = mu * S
        r3 = mu * R
        r4 = bmax * I * S / N
        r5 = mu * E
        r6 = delta * E
        r7 = mu * I
        r8 = gamma * I
        total = birth + r2 + r3 + r4 + r5 + r6 + r7 + r8
        if total <= 0.0:
            return CENSORED, t_max, events, log
        t += -math.log(1.0 - rng.random()) / total
        if t >= t_max:
            return CENSORED, t_max, events, log
        u = rng.random() * total
        c = birth
        if u < c:
            S += 1
        elif u < (c := c + r2):
            S -= 1
        elif u < (c := c + r3):
            R -= 1
        elif u < (c := c + r4):
            b = beta_value(t, beta_np, a_beta, beta_p, t_p, sigma, omega)
            if rng.random() * bmax < b:
                S -= 1
                E += 1
            else:
                continue
        elif u < (c := c + r5):
            E -= 1
        elif u < (c := c + r6):
            E -= 1
            I += 1
        elif u < c + r7:
            I -= 1
        elif r8 > 0.0:
            I -= 1
            R += 1
        else:
            # u rounded up to total; no channel fires
            continue
        events += 1
        if record:
            log.append((t, S, E, I, R))

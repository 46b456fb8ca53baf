# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels; see ``_fallback.py`` for the reference semantics."""
from libc.math cimport exp, floor, fmod, log, sqrt, fabs, round as cround
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

import numpy as np
cimport numpy as cnp

cnp.import_array()

EXTINCT = 0
OUTBREAK = 1
CENSORED = 2

cdef double RENORM_HI = 1e32
cdef double RENORM_LO = 1e-32


cdef inline double _beta_raw(double s, double beta_np, double a_beta, double beta_p,
                             double t_p, double sigma) nogil:
    cdef double z = s - t_p
    cdef double gauss = a_beta * exp(-(z * z) / (2.0 * sigma * sigma))
    cdef double logistic = beta_p / (1.0 + exp((z - sigma) / sigma))
    return beta_np + gauss + logistic


cdef inline double _beta(double t, double beta_np, double a_beta, double beta_p,
                         double t_p, double sigma, double omega) nogil:
    cdef double tw = fmod(t, omega)
    if tw < 0.0:
        tw += omega
    return _beta_raw(tw, beta_np, a_beta, beta_p, t_p, sigma)


def beta_value(double t, double beta_np, double a_beta, double beta_p,
               double t_p, double sigma, double omega):
    return _beta(t, beta_np, a_beta, beta_p, t_p, sigma, omega)


cdef inline void _rhs(const double *q, double s, double S, double E, double I,
                      double R, double *out) nogil:
    cdef double b = _beta_raw(s, q[0], q[1], q[2], q[3], q[4])
    cdef double delta = q[6], gamma = q[7], mu = q[8], N = q[9]
    cdef double force = b * I * S / N
    out[0] = mu * N - force - mu * S
    out[1] = force - (delta + mu) * E
    out[2] = delta * E - (gamma + mu) * I
    out[3] = gamma * I - mu * R


def seir_rk4(q_in, y0, double t0, long n_days, long steps_per_day):
    cdef double[::1] qv = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y0, dtype=np.float64)
    cdef const double *q = &qv[0]
    cdef double N = q[9]
    cdef double h = 1.0 / steps_per_day
    cdef double floor_ = -1e-9 * N
    out_arr = np.empty((n_days + 1, 4))
    cdef double[:, ::1] out = out_arr
    cdef double S = yv[0], E = yv[1], I = yv[2], R = yv[3]
    cdef double a[4]
    cdef double b[4]
    cdef double c[4]
    cdef double d[4]
    cdef double t, th
    cdef long day, j, k = 0, fail = -1
    out[0, 0] = S; out[0, 1] = E; out[0, 2] = I; out[0, 3] = R
    with nogil:
        for day in range(n_days):
            for j in range(steps_per_day):
                t = t0 + k * h
                # stages share the period of the step start (left limit at the boundary)
                t = t - q[5] * floor(t / q[5])
                _rhs(q, t, S, E, I, R, a)
                th = t + 0.5 * h
                _rhs(q, th, S + 0.5 * h * a[0], E + 0.5 * h * a[1],
                     I + 0.5 * h * a[2], R + 0.5 * h * a[3], b)
                _rhs(q, th, S + 0.5 * h * b[0], E + 0.5 * h * b[1],
                     I + 0.5 * h * b[2], R + 0.5 * h * b[3], c)
                _rhs(q, t + h, S + h * c[0], E + h * c[1],
                     I + h * c[2], R + h * c[3], d)
                S = S + (h / 6.0) * (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0])
                E = E + (h / 6.0) * (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1])
                I = I + (h / 6.0) * (a[2] + 2.0 * b[2] + 2.0 * c[2] + d[2])
                R = R + (h / 6.0) * (a[3] + 2.0 * b[3] + 2.0 * c[3] + d[3])
                k += 1
                if S < floor_ or E < floor_ or I < floor_ or R < floor_:
                    fail = k
                    break
            if fail >= 0:
                break
            out[day + 1, 0] = S
            out[day + 1, 1] = E
            out[day + 1, 2] = I
            out[day + 1, 3] = R
    if fail >= 0:
        return out_arr[: day + 1], fail
    return out_arr, -1


cdef inline void _lin_rhs(const double *q, double lam, double t, const double *x,
                          double *out) nogil:
    cdef double b = _beta_raw(t, q[0], q[1], q[2], q[3], q[4]) / lam
    cdef double a = -(q[6] + q[8])
    cdef double d = -(q[7] + q[8])
    cdef double c = q[6]
    out[0] = a * x[0] + b * x[2]
    out[1] = a * x[1] + b * x[3]
    out[2] = c * x[0] + d * x[2]
    out[3] = c * x[1] + d * x[3]


cdef double _spectral_radius_2x2(double a, double b, double c, double d) nogil:
    cdef double half_tr = 0.5 * (a + d)
    cdef double det = a * d - b * c
    cdef double disc = half_tr * half_tr - det
    cdef double root, r1, r2
    if disc >= 0.0:
        root = sqrt(disc)
        r1 = fabs(half_tr + root)
        r2 = fabs(half_tr - root)
        return r1 if r1 >= r2 else r2
    return sqrt(det)


def log_monodromy_radius(q_in, double lam, double h):
    cdef double[::1] qv = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef const double *q = &qv[0]
    cdef double omega = q[5]
    cdef long n = <long>cround(omega / h)
    if n < 1:
        n = 1
    h = omega / n
    cdef double x[4]
    cdef double tmp[4]
    cdef double a[4]
    cdef double b[4]
    cdef double c[4]
    cdef double d[4]
    cdef double logscale = 0.0, t, th, m
    cdef long k
    cdef int i
    x[0] = 1.0; x[1] = 0.0; x[2] = 0.0; x[3] = 1.0
    with nogil:
        for k in range(n):
            t = k * h
            th = t + 0.5 * h
            _lin_rhs(q, lam, t, x, a)
            for i in range(4):
                tmp[i] = x[i] + 0.5 * h * a[i]
            _lin_rhs(q, lam, th, tmp, b)
            for i in range(4):
                tmp[i] = x[i] + 0.5 * h * b[i]
            _lin_rhs(q, lam, th, tmp, c)
            for i in range(4):
                tmp[i] = x[i] + h * c[i]
            _lin_rhs(q, lam, t + h, tmp, d)
            for i in range(4):
                x[i] = x[i] + (h / 6.0) * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])
            m = fabs(x[0])
            for i in range(1, 4):
                if fabs(x[i]) > m:
                    m = fabs(x[i])
            if m > RENORM_HI or m < RENORM_LO:
                for i in range(4):
                    x[i] /= m
                logscale += log(m)
    return logscale + log(_spectral_radius_2x2(x[0], x[1], x[2], x[3]))


def ctmc_path(q_in, long S, long E, long I, long R, double t0, long ol,
              double t_max, rng, bint record=False):
    cdef double[::1] qv = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef double beta_np = qv[0], a_beta = qv[1], beta_p = qv[2], t_p = qv[3]
    cdef double sigma = qv[4], omega = qv[5], delta = qv[6], gamma = qv[7]
    cdef double mu = qv[8], N = qv[9]
    cdef double bmax = beta_np + a_beta + beta_p
    cdef double birth = mu * N
    cdef double t = t0
    cdef double r2, r3, r4, r5, r6, r7, r8, total, u, cum, bt
    cdef long events = 0
    capsule = rng.bit_generator.capsule
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    log_ = [(t, S, E, I, R)] if record else None
    # bit generator is not shared across threads; no lock taken
    while True:
        if E + I == 0:
            return EXTINCT, t, events, log_
        if E + I >= ol:
            return OUTBREAK, t, events, log_
        r2 = mu * S
        r3 = mu * R
        r4 = bmax * I * S / N
        r5 = mu * E
        r6 = delta * E
        r7 = mu * I
        r8 = gamma * I
        total = birth + r2 + r3 + r4 + r5 + r6 + r7 + r8
        if total <= 0.0:
            return CENSORED, t_max, events, log_
        t += -log(1.0 - bg.next_double(bg.state)) / total
        if t >= t_max:
            return CENSORED, t_max, events, log_
        u = bg.next_double(bg.state) * total
        cum = birth
        if u < cum:
            S += 1
        else:
            cum = cum + r2
            if u < cum:
                S -= 1
            else:
                cum = cum + r3
                if u < cum:
                    R -= 1
                else:
                    cum = cum + r4
                    if u < cum:
                        bt = _beta(t, beta_np, a_beta, beta_p, t_p, sigma, omega)
                        if bg.next_double(bg.state) * bmax < bt:
                            S -= 1
                            E += 1
                        else:
                            continue
                    else:
                        cum = cum + r5
                        if u < cum:
                            E -= 1
                        else:
                            cum = cum + r6
                            if u < cum:
                                E -= 1
                                I += 1
                            elif u < cum + r7:
                                I -= 1
                            elif r8 > 0.0:
                                I -= 1
                                R += 1
                            else:
                                continue
        events += 1
        if record:
            log_.append((t, S, E, I, R))

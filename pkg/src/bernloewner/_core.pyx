# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in :mod:`bernloewner._pycore`."""
from libc.math cimport exp, expm1, cos, sin, pow, isfinite
import numpy as np

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef int SERIES_TERMS = 20
cdef double INV_FACT[21]
cdef int _n
INV_FACT[0] = 1.0
for _n in range(1, 21):
    INV_FACT[_n] = INV_FACT[_n - 1] / _n


cdef inline double complex _cexpm1_neg(double complex w) noexcept nogil:
    # e^{-w} - 1 computed as expm1(x) cos y - 2 sin^2(y/2) + i e^x sin y
    cdef double x = -creal(w)
    cdef double y = -cimag(w)
    cdef double s = sin(0.5 * y)
    cdef double re = expm1(x) * cos(y) - 2.0 * s * s
    cdef double im = exp(x) * sin(y)
    return re + 1j * im


cdef inline double complex _expm1_sub_linear(double complex w) noexcept nogil:
    cdef double complex acc, mw
    cdef int n
    if cabs(w) < 0.5:
        mw = -w
        acc = 0.0
        for n in range(SERIES_TERMS, 1, -1):
            acc = (acc + INV_FACT[n]) * mw
        return acc * mw
    return _cexpm1_neg(w) + w


cdef inline double complex _kernel(int code, double x, double complex z) noexcept nogil:
    cdef double complex w = x * z
    if code == 1:
        return -_cexpm1_neg(w)
    elif code == 2:
        return x * cexp(-w)
    elif code == 3:
        return x * x * cexp(-w)
    elif code == 4:
        if x < 1.0:
            return _expm1_sub_linear(w)
        return _cexpm1_neg(w)
    else:
        return _expm1_sub_linear(w)


cdef double complex _ksum(int code, const double[::1] xs, const double[::1] ws,
                          double complex z) noexcept nogil:
    cdef Py_ssize_t j
    cdef double complex acc = 0.0
    for j in range(xs.shape[0]):
        acc = acc + ws[j] * _kernel(code, xs[j], z)
    return acc


def kernel_sum(int code, nodes, weights, z):
    if code < 1 or code > 5:
        raise ValueError(f"unknown kernel code {code}")
    cdef const double[::1] xs = np.ascontiguousarray(nodes, dtype=float)
    cdef const double[::1] ws = np.ascontiguousarray(weights, dtype=float)
    if xs.shape[0] == 0:
        return 0j
    return complex(_ksum(code, xs, ws, complex(z)))


def generator_atoms(double q, double a, double b, xs, ws, w):
    cdef const double[::1] x = np.ascontiguousarray(xs, dtype=float)
    cdef const double[::1] wt = np.ascontiguousarray(ws, dtype=float)
    cdef double complex v = complex(w)
    return complex(-q + a * v + b * v * v + _ksum(4, x, wt, v))


cdef inline double complex _rhs(double q, double a, double b, const double[::1] xs,
                                const double[::1] ws, double complex w) noexcept nogil:
    return -(-q + a * w + b * w * w + _ksum(4, xs, ws, w))


# Dormand-Prince 5(4); must stay in sync with numerics.adaptive_ode_step
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 35.0 / 384 - 5179.0 / 57600
cdef double E3 = 500.0 / 1113 - 7571.0 / 16695
cdef double E4 = 125.0 / 192 - 393.0 / 640
cdef double E5 = -2187.0 / 6784 + 92097.0 / 339200
cdef double E6 = 11.0 / 84 - 187.0 / 2100
cdef double E7 = -1.0 / 40


def flow_atoms(double q, double a, double b, xs, ws, double t, z, double rtol,
               double atol, double max_step, long max_steps):
    """Solve ``dw/dt = -phi(w)``, ``w(0) = z`` up to ``t``; ``(w, steps, rejected)``."""
    cdef const double[::1] x = np.ascontiguousarray(xs, dtype=float)
    cdef const double[::1] wt = np.ascontiguousarray(ws, dtype=float)
    cdef double complex y = complex(z)
    cdef double complex k1, k2, k3, k4, k5, k6, k7, ynew, errv
    cdef double tc = 0.0, h, remaining, sc, err, fac, err_prev = 1.0, d0, d1, tol_t
    cdef long steps = 0, rejected = 0
    cdef bint last, grow_ok = True, ok
    if t == 0.0:
        return complex(y), 0, 0
    if t < 0.0:
        raise ValueError("flow_atoms integrates forward in time only")

    with nogil:
        k1 = _rhs(q, a, b, x, wt, y)
        sc = atol + rtol * cabs(y)
        d0 = cabs(y) / sc
        d1 = cabs(k1) / sc
        if d0 < 1e-5 or d1 < 1e-5:
            h = 1e-6
        else:
            h = 0.01 * d0 / d1
        h = min(h, t, max_step)

        while True:
            remaining = t - tc
            if remaining <= 1e-15 * max(1.0, t):
                break
            if steps + rejected >= max_steps:
                break
            last = h >= remaining
            if last:
                h = remaining
            k2 = _rhs(q, a, b, x, wt, y + h * (A21 * k1))
            k3 = _rhs(q, a, b, x, wt, y + h * (A31 * k1 + A32 * k2))
            k4 = _rhs(q, a, b, x, wt, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
            k5 = _rhs(q, a, b, x, wt, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
            k6 = _rhs(q, a, b, x, wt, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
            ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            ok = isfinite(creal(ynew)) and isfinite(cimag(ynew)) and creal(ynew) > 0.0
            if not ok:
                rejected += 1
                tol_t = 1e-10 * max(1.0, tc)
                if h <= tol_t:
                    break
                h *= 0.5
                grow_ok = False
                continue
            k7 = _rhs(q, a, b, x, wt, ynew)
            errv = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
            sc = atol + rtol * max(cabs(y), cabs(ynew))
            err = cabs(errv) / sc
            if err <= 1.0:
                tc = t if last else tc + h
                y = ynew
                k1 = k7
                steps += 1
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * pow(err, -0.7 / 5) * pow(err_prev, 0.4 / 5)
                    fac = min(5.0, max(0.2, fac))
                if not grow_ok:
                    fac = min(fac, 1.0)
                err_prev = max(err, 1e-4)
                grow_ok = True
                if last:
                    break
                h = min(h * fac, max_step)
            else:
                rejected += 1
                h *= max(0.2, 0.9 * pow(err, -1.0 / 5))
                grow_ok = False
                if h <= 1e-10 * max(1.0, tc):
                    break

    if tc < t and t - tc > 1e-15 * max(1.0, t):
        if steps + rejected >= max_steps:
            from .errors import NonConvergenceError
            raise NonConvergenceError(f"max_steps={max_steps} exceeded at t={tc}", [(tc, complex(y))])
        from .errors import DomainError
        raise DomainError(f"flow left the half-plane near t={tc}")
    return complex(y), steps, rejected

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot geometry kernels.

Mirrors _pure.py expression by expression; built with -ffp-contract=off so
results stay bit-identical to the pure backend.
"""

from libc.math cimport atan2, cos, fmod, sin, sqrt

NAME = "compiled"

TWO_PI = 6.283185307179586

INSIDE = 0
EXIT_R_PLUS = 1
EXIT_R_MINUS = 2
EXIT_TH_PLUS = 3
EXIT_TH_MINUS = 4

cdef double C_TWO_PI = 6.283185307179586

cdef int C_INSIDE = 0
cdef int C_EXIT_R_PLUS = 1
cdef int C_EXIT_R_MINUS = 2
cdef int C_EXIT_TH_PLUS = 3
cdef int C_EXIT_TH_MINUS = 4


cdef inline void _eval(double r_lo, double r_hi, double th_lo, double span,
                       double u0r, double u0t, double u1r, double u1t,
                       double u2r, double u2t, double u3r, double u3t,
                       double x, double y, double r_eps, bint clamp,
                       double* vx, double* vy) noexcept nogil:
    cdef double r = sqrt(x * x + y * y)
    cdef double th = atan2(y, x)

    cdef double dr = r_hi - r_lo
    cdef double a = (r - r_lo) / dr

    cdef double rel = fmod(th - th_lo, C_TWO_PI)
    if rel < 0.0:
        rel += C_TWO_PI
    cdef double b = rel / span
    if clamp:
        if a < 0.0:
            a = 0.0
        elif a > 1.0:
            a = 1.0
        if b < 0.0:
            b = 0.0
        elif b > 1.0:
            b = 1.0

    cdef double w0 = (1.0 - a) * (1.0 - b)
    cdef double w1 = a * (1.0 - b)
    cdef double w2 = a * b
    cdef double w3 = (1.0 - a) * b
    cdef double ur = w0 * u0r + w1 * u1r + w2 * u2r + w3 * u3r
    cdef double ut = w0 * u0t + w1 * u1t + w2 * u2t + w3 * u3t

    cdef double m = r
    if m < r_eps:
        m = r_eps
    cdef double tang = r * ut / m

    cdef double ct = cos(th)
    cdef double st = sin(th)
    vx[0] = ur * ct - tang * st
    vy[0] = ur * st + tang * ct


cdef inline int _classify(double r_lo, double r_hi, double th_lo, double span,
                          double x, double y) noexcept nogil:
    cdef double r = sqrt(x * x + y * y)
    cdef double th, rel, excess, gap
    if r > r_hi:
        return C_EXIT_R_PLUS
    if r < r_lo:
        return C_EXIT_R_MINUS
    if span < C_TWO_PI - 1e-12:
        th = atan2(y, x)
        rel = fmod(th - th_lo, C_TWO_PI)
        if rel < 0.0:
            rel += C_TWO_PI
        if rel > span:
            excess = rel - span
            gap = C_TWO_PI - span
            if excess <= gap * 0.5:
                return C_EXIT_TH_PLUS
            return C_EXIT_TH_MINUS
    return C_INSIDE


def eval_cell(double r_lo, double r_hi, double th_lo, double span, u,
              double x, double y, double r_eps, bint clamp):
    """See _pure.eval_cell."""
    cdef double u0r = u[0]
    cdef double u0t = u[1]
    cdef double u1r = u[2]
    cdef double u1t = u[3]
    cdef double u2r = u[4]
    cdef double u2t = u[5]
    cdef double u3r = u[6]
    cdef double u3t = u[7]
    cdef double vx = 0.0
    cdef double vy = 0.0
    _eval(r_lo, r_hi, th_lo, span, u0r, u0t, u1r, u1t, u2r, u2t, u3r, u3t,
          x, y, r_eps, clamp, &vx, &vy)
    return (vx, vy)


def classify(double r_lo, double r_hi, double th_lo, double span,
             double x, double y):
    """See _pure.classify."""
    return _classify(r_lo, r_hi, th_lo, span, x, y)


cdef tuple _integrate(double r_lo, double r_hi, double th_lo, double span,
                      double u0r, double u0t, double u1r, double u1t,
                      double u2r, double u2t, double u3r, double u3t,
                      double x0, double y0, double dt, long max_steps,
                      double r_eps):
    cdef double x = x0
    cdef double y = y0
    cdef double vx = 0.0
    cdef double vy = 0.0
    cdef long steps = 0
    cdef int code
    with nogil:
        while steps < max_steps:
            _eval(r_lo, r_hi, th_lo, span, u0r, u0t, u1r, u1t, u2r, u2t,
                  u3r, u3t, x, y, r_eps, True, &vx, &vy)
            x = x + dt * vx
            y = y + dt * vy
            steps += 1
            code = _classify(r_lo, r_hi, th_lo, span, x, y)
            if code != C_INSIDE:
                with gil:
                    return (code, steps, x, y)
    return (C_INSIDE, steps, x, y)


def integrate_cell(double r_lo, double r_hi, double th_lo, double span, u,
                   double x0, double y0, double dt, long max_steps,
                   double r_eps):
    """See _pure.integrate_cell."""
    return _integrate(r_lo, r_hi, th_lo, span, u[0], u[1], u[2], u[3],
                      u[4], u[5], u[6], u[7], x0, y0, dt, max_steps, r_eps)


def integrate_many(double r_lo, double r_hi, double th_lo, double span, u,
                   starts, double dt, long max_steps, double r_eps):
    """See _pure.integrate_many."""
    cdef double u0r = u[0]
    cdef double u0t = u[1]
    cdef double u1r = u[2]
    cdef double u1t = u[3]
    cdef double u2r = u[4]
    cdef double u2t = u[5]
    cdef double u3r = u[6]
    cdef double u3t = u[7]
    out = []
    for (x0, y0) in starts:
        out.append(_integrate(r_lo, r_hi, th_lo, span, u0r, u0t, u1r, u1t,
                              u2r, u2t, u3r, u3t, x0, y0, dt, max_steps,
                              r_eps))
    return out

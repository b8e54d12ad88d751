"""Pure-Python backend for the hot geometry kernels.

Keep every arithmetic expression textually identical to the compiled
backend (same operation order, same literals): the test suite asserts
bit-identical results between the two, and the compiled module is built
with float contraction disabled for the same reason.
"""

from math import atan2, cos, fmod, sin, sqrt

NAME = "pure"

TWO_PI = 6.283185307179586

# exit codes returned by integrate_cell
INSIDE = 0
EXIT_R_PLUS = 1
EXIT_R_MINUS = 2
EXIT_TH_PLUS = 3
EXIT_TH_MINUS = 4


def eval_cell(r_lo, r_hi, th_lo, span, u, x, y, r_eps, clamp):
    """Velocity of the interpolated cell field at Cartesian (x, y).

    ``u`` holds the four vertex vectors in polar components as a flat tuple
    (u0r, u0t, u1r, u1t, u2r, u2t, u3r, u3t); vertices are ordered inner/low,
    outer/low, outer/high, inner/high.  The angular rate is computed with the
    radius clamped below at ``r_eps``, which tapers the tangential term to
    zero at the origin.  With ``clamp`` true the bilinear coordinates are
    clamped to [0, 1] so points marginally outside the cell get the nearest
    facet value.
    """
    r = sqrt(x * x + y * y)
    th = atan2(y, x)

    dr = r_hi - r_lo
    a = (r - r_lo) / dr

    rel = fmod(th - th_lo, TWO_PI)
    if rel < 0.0:
        rel += TWO_PI
    b = rel / span
    if clamp:
        if a < 0.0:
            a = 0.0
        elif a > 1.0:
            a = 1.0
        if b < 0.0:
            b = 0.0
        elif b > 1.0:
            b = 1.0

    w0 = (1.0 - a) * (1.0 - b)
    w1 = a * (1.0 - b)
    w2 = a * b
    w3 = (1.0 - a) * b
    ur = w0 * u[0] + w1 * u[2] + w2 * u[4] + w3 * u[6]
    ut = w0 * u[1] + w1 * u[3] + w2 * u[5] + w3 * u[7]

    m = r
    if m < r_eps:
        m = r_eps
    tang = r * ut / m

    ct = cos(th)
    st = sin(th)
    vx = ur * ct - tang * st
    vy = ur * st + tang * ct
    return (vx, vy)


def classify(r_lo, r_hi, th_lo, span, x, y):
    """Locate (x, y) relative to the cell: INSIDE or the facet crossed.

    Radial facets take precedence over angular ones; an angular excursion
    is attributed to the nearer facet measured through the complement arc.
    """
    r = sqrt(x * x + y * y)
    if r > r_hi:
        return EXIT_R_PLUS
    if r < r_lo:
        return EXIT_R_MINUS
    if span < TWO_PI - 1e-12:
        th = atan2(y, x)
        rel = fmod(th - th_lo, TWO_PI)
        if rel < 0.0:
            rel += TWO_PI
        if rel > span:
            excess = rel - span
            gap = TWO_PI - span
            if excess <= gap * 0.5:
                return EXIT_TH_PLUS
            return EXIT_TH_MINUS
    return INSIDE


def integrate_cell(r_lo, r_hi, th_lo, span, u, x0, y0, dt, max_steps, r_eps):
    """Fixed-step Euler integration of the cell field from (x0, y0).

    Returns (exit_code, steps_taken, x, y): exit_code is INSIDE when the
    trajectory is still in the cell after max_steps, otherwise the facet
    first crossed, with the post-crossing position.
    """
    x = x0
    y = y0
    steps = 0
    while steps < max_steps:
        (vx, vy) = eval_cell(r_lo, r_hi, th_lo, span, u, x, y, r_eps, True)
        x = x + dt * vx
        y = y + dt * vy
        steps += 1
        code = classify(r_lo, r_hi, th_lo, span, x, y)
        if code != INSIDE:
            return (code, steps, x, y)
    return (INSIDE, steps, x, y)


def integrate_many(r_lo, r_hi, th_lo, span, u, starts, dt, max_steps, r_eps):
    """Run integrate_cell from every start point; returns a list of results."""
    return [
        integrate_cell(r_lo, r_hi, th_lo, span, u, x0, y0, dt, max_steps, r_eps)
        for (x0, y0) in starts
    ]

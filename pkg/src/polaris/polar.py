"""Polar partition of the motion disk and per-region vertex controllers.

Each follower's motion is abstracted over a disk of radius ``r_max``
partitioned by ``n_r`` radial and ``n_theta`` angular grid lines into
(n_r-1)(n_theta-1) annular sectors.  A region controller is specified by a
velocity vector at each of the region's four vertices; the field anywhere
inside is the bilinear interpolation of the vertex values in (r, theta)
coordinates, which makes facet-crossing behavior decidable from vertex
signs alone:

* invariant mode pushes strictly inward across every facet, so trajectories
  never leave;
* an exit mode pushes outward across the designated facet at every vertex
  and never outward across the others, so trajectories leave through the
  designated facet only.

Vertex order: v0 = (r_lo, th_lo), v1 = (r_hi, th_lo), v2 = (r_hi, th_hi),
v3 = (r_lo, th_hi).  The innermost ring has no inner facet (the disk
center); inward exits from it are rejected.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from . import kernels
from .errors import IndexOutOfRange, Infeasible, OutOfHorizon, OutsideRegion

__all__ = [
    "PolarPartition",
    "RegionIndex",
    "Mode",
    "VertexControls",
    "ValidationResult",
    "region_bounds",
    "locate",
    "design_controller",
    "eval_control",
    "validate_controller",
    "interpolate_polar",
]

TWO_PI = 2.0 * math.pi

DEFAULT_KAPPA = 0.5


@dataclass(frozen=True)
class PolarPartition:
    """Disk radius plus the counts of radial and angular grid lines."""

    r_max: float
    n_r: int
    n_theta: int

    def __post_init__(self):
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.n_r < 2 or self.n_theta < 2:
            raise ValueError("need at least two grid lines in each direction")

    @property
    def delta_r(self) -> float:
        return self.r_max / (self.n_r - 1)

    @property
    def delta_theta(self) -> float:
        return TWO_PI / (self.n_theta - 1)

    @property
    def r_eps(self) -> float:
        """Radius floor for the angular rate near the disk center."""
        return self.r_max * 1e-3

    def radius(self, i: int) -> float:
        return self.r_max * (i - 1) / (self.n_r - 1)

    def angle(self, j: int) -> float:
        return TWO_PI * (j - 1) / (self.n_theta - 1)

    @property
    def region_count(self) -> int:
        return (self.n_r - 1) * (self.n_theta - 1)

    def regions(self):
        for i in range(1, self.n_r):
            for j in range(1, self.n_theta):
                yield RegionIndex(i, j)


@dataclass(frozen=True, order=True)
class RegionIndex:
    """Address (i, j) of the region between grid radii i, i+1 and grid
    angles j, j+1 (both 1-based)."""

    i: int
    j: int


def _check_index(p: PolarPartition, idx: RegionIndex) -> None:
    if not (1 <= idx.i <= p.n_r - 1 and 1 <= idx.j <= p.n_theta - 1):
        raise IndexOutOfRange(f"region {idx} outside {p.n_r - 1}x{p.n_theta - 1} grid")


def region_bounds(p: PolarPartition, idx: RegionIndex):
    """Bounds (r_lo, r_hi, th_lo, th_hi) of the region.

    th_lo lies in [0, 2*pi); th_hi equals th_lo plus the sector span and is
    2*pi for the last sector of a full circle.
    """
    _check_index(p, idx)
    return (p.radius(idx.i), p.radius(idx.i + 1), p.angle(idx.j), p.angle(idx.j + 1))


def locate(p: PolarPartition, x: float, y: float) -> RegionIndex:
    """Region containing the point, ties broken toward the lower index."""
    r = math.hypot(x, y)
    if r > p.r_max:
        raise OutOfHorizon(f"point at radius {r:.6g} beyond horizon {p.r_max:.6g}")
    th = math.atan2(y, x)
    if th < 0.0:
        th += TWO_PI
    i = min(max(math.ceil(r / p.delta_r), 1), p.n_r - 1)
    j = min(max(math.ceil(th / p.delta_theta), 1), p.n_theta - 1)
    return RegionIndex(i, j)


class Mode(enum.Enum):
    """Control objective for one region."""

    INVARIANT = "invariant"
    EXIT_R_PLUS = "exit_r+"
    EXIT_R_MINUS = "exit_r-"
    EXIT_TH_PLUS = "exit_th+"
    EXIT_TH_MINUS = "exit_th-"


_EXIT_CODE = {
    Mode.EXIT_R_PLUS: kernels.EXIT_R_PLUS,
    Mode.EXIT_R_MINUS: kernels.EXIT_R_MINUS,
    Mode.EXIT_TH_PLUS: kernels.EXIT_TH_PLUS,
    Mode.EXIT_TH_MINUS: kernels.EXIT_TH_MINUS,
}

# facet name -> (vertex indices on the facet, outward normal in polar
# components).  Vertex order per the module docstring.
_FACETS = {
    "r+": ((1, 2), (1.0, 0.0)),
    "r-": ((0, 3), (-1.0, 0.0)),
    "th+": ((2, 3), (0.0, 1.0)),
    "th-": ((0, 1), (0.0, -1.0)),
}

_EXIT_FACET = {
    Mode.EXIT_R_PLUS: "r+",
    Mode.EXIT_R_MINUS: "r-",
    Mode.EXIT_TH_PLUS: "th+",
    Mode.EXIT_TH_MINUS: "th-",
}


@dataclass(frozen=True)
class VertexControls:
    """Mode plus the four polar vertex vectors (u_r, u_theta) in m/s."""

    mode: Mode
    u: tuple

    def flat(self) -> tuple:
        (u0, u1, u2, u3) = self.u
        return (u0[0], u0[1], u1[0], u1[1], u2[0], u2[1], u3[0], u3[1])

    def scaled(self, factor: float) -> "VertexControls":
        return VertexControls(
            self.mode, tuple((ur * factor, ut * factor) for (ur, ut) in self.u)
        )

    @property
    def exit_code(self) -> int:
        return _EXIT_CODE.get(self.mode, kernels.INSIDE)


def _facets_of(p: PolarPartition, idx: RegionIndex):
    """Facet names that exist for this region (no inner facet at i = 1)."""
    names = ["r+", "th+", "th-"] if idx.i == 1 else ["r+", "r-", "th+", "th-"]
    if p.n_theta == 2:
        # a single full-circle sector has no angular facets
        names = [f for f in names if not f.startswith("th")]
    return names


def design_controller(
    p: PolarPartition,
    idx: RegionIndex,
    mode: Mode,
    speed: float,
    kappa: float = DEFAULT_KAPPA,
) -> VertexControls:
    """Pick vertex vectors realizing the requested mode at the given speed.

    Exit modes push at full speed along the exit normal at every vertex and
    keep the orthogonal component zero, so no other facet is ever crossed.
    Invariant mode points each vertex vector inward across both incident
    facets with margin kappa*speed per component; at the innermost ring the
    radial component on the center vertices is dropped (no inner facet), so
    trajectories sink toward the desired position and stall there.
    """
    _check_index(p, idx)
    if speed <= 0.0:
        raise ValueError("speed must be positive")
    if not 0.0 < kappa <= 1.0:
        raise ValueError("kappa must be in (0, 1]")
    if mode is Mode.EXIT_R_MINUS and idx.i == 1:
        raise Infeasible("the innermost ring has no inward exit facet")
    if mode in (Mode.EXIT_TH_PLUS, Mode.EXIT_TH_MINUS) and p.n_theta == 2:
        raise Infeasible("a full-circle sector has no angular exit facet")

    if mode is Mode.EXIT_R_PLUS:
        vec = (speed, 0.0)
        u = (vec, vec, vec, vec)
    elif mode is Mode.EXIT_R_MINUS:
        vec = (-speed, 0.0)
        u = (vec, vec, vec, vec)
    elif mode is Mode.EXIT_TH_PLUS:
        vec = (0.0, speed)
        u = (vec, vec, vec, vec)
    elif mode is Mode.EXIT_TH_MINUS:
        vec = (0.0, -speed)
        u = (vec, vec, vec, vec)
    else:
        m = kappa * speed
        inner_r = 0.0 if idx.i == 1 else m
        mt = 0.0 if p.n_theta == 2 else m
        u = ((inner_r, mt), (-m, mt), (-m, -mt), (inner_r, -mt))
    return VertexControls(mode, u)


@lru_cache(maxsize=4096)
def cached_controller(
    p: PolarPartition, idx: RegionIndex, mode: Mode, speed: float, kappa: float
) -> VertexControls:
    return design_controller(p, idx, mode, speed, kappa)


def interpolate_polar(vc: VertexControls, alpha: float, beta: float):
    """Bilinear interpolation of the vertex vectors at cell coordinates.

    alpha is the radial fraction, beta the angular fraction; the weights
    (1-a)(1-b), a(1-b), ab, (1-a)b match vertices v0..v3 and sum to one.
    """
    w = (
        (1.0 - alpha) * (1.0 - beta),
        alpha * (1.0 - beta),
        alpha * beta,
        (1.0 - alpha) * beta,
    )
    ur = sum(wi * ui[0] for wi, ui in zip(w, vc.u))
    ut = sum(wi * ui[1] for wi, ui in zip(w, vc.u))
    return (ur, ut)


def eval_control(
    p: PolarPartition,
    idx: RegionIndex,
    vc: VertexControls,
    x: float,
    y: float,
    tol: Optional[float] = None,
):
    """Cartesian velocity of the interpolated field at a point of the region.

    The point must lie in the region within ``tol`` (default 1e-6 * r_max);
    the angular rate uses the radius clamped below at the partition's
    r_eps, tapering the tangential term near the center.
    """
    if tol is None:
        tol = 1e-6 * p.r_max
    (r_lo, r_hi, th_lo, th_hi) = region_bounds(p, idx)
    span = th_hi - th_lo
    r = math.hypot(x, y)
    if r < r_lo - tol or r > r_hi + tol:
        raise OutsideRegion(f"radius {r:.9g} outside [{r_lo:.9g}, {r_hi:.9g}]")
    if span < TWO_PI - 1e-12:
        th = math.atan2(y, x)
        rel = math.fmod(th - th_lo, TWO_PI)
        if rel < 0.0:
            rel += TWO_PI
        if rel > span:
            # distance past the nearer angular facet, as arc length
            excess = min(rel - span, TWO_PI - rel)
            if excess * max(r, p.r_eps) > tol:
                raise OutsideRegion(
                    f"angle {rel + th_lo:.9g} outside sector [{th_lo:.9g}, {th_hi:.9g}]"
                )
    return kernels.eval_cell(r_lo, r_hi, th_lo, span, vc.flat(), x, y, p.r_eps, False)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


def validate_controller(
    p: PolarPartition, idx: RegionIndex, vc: VertexControls, grid: int = 20
) -> ValidationResult:
    """Re-check the controller postconditions numerically.

    Vertex sign conditions are scale-invariant: an exit controller must
    point strictly outward across its exit facet at every vertex and never
    outward across another facet at that facet's vertices; an invariant
    controller must point strictly inward at every facet vertex.  On a
    grid x grid sample of the cell, boundary samples must not point outward
    across any non-exit facet.  Returns the violated facet names.
    """
    _check_index(p, idx)
    violations = []
    facets = _facets_of(p, idx)
    exit_facet = _EXIT_FACET.get(vc.mode)

    if exit_facet is not None and exit_facet not in facets:
        return ValidationResult(False, (f"{exit_facet} (absent)",))

    for name in facets:
        (verts, normal) = _FACETS[name]
        if name == exit_facet:
            for v in range(4):
                dot = vc.u[v][0] * normal[0] + vc.u[v][1] * normal[1]
                if dot <= 0.0:
                    violations.append(f"{name} (exit, vertex v{v})")
        else:
            strict = vc.mode is Mode.INVARIANT
            for v in verts:
                dot = vc.u[v][0] * normal[0] + vc.u[v][1] * normal[1]
                if (dot >= 0.0) if strict else (dot > 0.0):
                    violations.append(f"{name} (vertex v{v})")

    # sampled-grid check that no boundary point flows outward through a
    # non-exit facet
    tol = 1e-12
    for a_idx in range(grid):
        alpha = a_idx / (grid - 1)
        for b_idx in range(grid):
            beta = b_idx / (grid - 1)
            (ur, ut) = interpolate_polar(vc, alpha, beta)
            on = []
            if alpha == 0.0 and "r-" in facets:
                on.append("r-")
            if alpha == 1.0:
                on.append("r+")
            if beta == 0.0 and "th-" in facets:
                on.append("th-")
            if beta == 1.0 and "th+" in facets:
                on.append("th+")
            for name in on:
                if name == exit_facet:
                    continue
                (_, normal) = _FACETS[name]
                if ur * normal[0] + ut * normal[1] > tol:
                    violations.append(f"{name} (grid {a_idx},{b_idx})")

    seen = tuple(dict.fromkeys(violations))
    return ValidationResult(not seen, seen)

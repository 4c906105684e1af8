"""The limit set of f: Cantor gaps, periodic cycles, iterated images of I and
omega-limit sets."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .conjugation import phi_cell
from .core import (
    MapParams,
    NoCycleError,
    OrbitApproachError,
    ParameterError,
    PrecisionError,
    RationalRot,
    as_rotation,
    check_rho,
)
from .dynamics import f_apply, f_left
from .heckemahler import DEFAULT_TOL, SeriesTolerance
from .rotation import (
    INTERIOR,
    LEFT_ENDPOINT,
    NOT_RATIONAL,
    RIGHT_ENDPOINT,
    classify_boundary,
    rho_exact,
)

__all__ = [
    "Gap",
    "Cycle",
    "Arc",
    "IntervalDecomposition",
    "gap_endpoints",
    "gaps_up_to",
    "total_gap_length",
    "cycle_points",
    "fminus_cycle",
    "iterated_image",
    "hole_arcs",
    "circle_distance",
    "omega_limit",
    "OmegaLimit",
]

# closed forms are compared to direct iteration within this bound
CROSS_CHECK_TOL = 1e-9


def circle_distance(a: float, b: float) -> float:
    """Distance between a and b on the circle R/Z."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class Gap:
    """The hole [left, right) = [xi_l-, xi_l) removed at step l."""

    index: int
    left: float
    right: float

    @property
    def length(self) -> float:
        return self.right - self.left


def _floor_rho(rho):
    rot, value = as_rotation(rho)
    if rot is not None:
        p, q = rot.p, rot.q
        return lambda k: (k * p) // q
    return lambda k: math.floor(k * value)


def _iterate(step, params, x, l):
    for _ in range(l):
        x = step(params, x)
    return x


def gap_endpoints(
    params: MapParams, rho, l: int, tol: SeriesTolerance = DEFAULT_TOL, verify: bool = True
) -> Gap:
    """xi_l = f^l(0) and xi_l- = f^l(1-) from their closed forms.

        xi_l  = eta + sum_{k=0}^{l} lam^(l-k) mu^(fl(l rho) - fl(k rho)) (c + fl((k-1) rho) - fl(k rho))
        xi_l- = xi_l - lam^(l-1) mu^fl(l rho) (delta - mu(lam + delta - 1))

    with c = (lam + delta - 1)/lam.  Meant for irrational rho with delta on the
    staircase.  With ``verify`` both ends are compared with direct iteration
    of f from 0 and of f- from 1, and :class:`PrecisionError` is raised on a
    mismatch.  ``tol`` is accepted for interface symmetry; the sum is finite.
    """
    l = int(l)
    if l < 1:
        raise ParameterError("gap index l must be positive")
    check_rho(params.lam, params.mu, rho)
    lam, mu, delta = params.lam, params.mu, params.delta
    if l == 1:  # the sum collapses to delta
        return Gap(1, params.hole_left, delta)
    fl = _floor_rho(rho)
    c = (lam + delta - 1) / lam
    top = fl(l)
    total = 0.0
    for k in range(l + 1):
        total += lam ** (l - k) * mu ** (top - fl(k)) * (c + fl(k - 1) - fl(k))
    right = params.eta + total
    width = lam ** (l - 1) * mu ** top * (delta - params.hole_left)
    left = right - width
    if verify:
        it_right = _iterate(f_apply, params, 0.0, l)
        it_left = _iterate(f_left, params, 1.0, l)
        err = max(circle_distance(it_right, right), circle_distance(it_left, left))
        if err > CROSS_CHECK_TOL:
            raise PrecisionError(
                f"gap {l}: closed form and iteration differ by {err:.3g}; "
                "is delta on the staircase for this rho?"
            )
    return Gap(l, left, right)


def gaps_up_to(
    params: MapParams, rho, L: int, tol: SeriesTolerance = DEFAULT_TOL, verify: bool = True
) -> List[Gap]:
    """Gaps l = 1..L sorted by left end, checked to be pairwise disjoint."""
    gaps = sorted((gap_endpoints(params, rho, l, tol, verify) for l in range(1, int(L) + 1)),
                  key=lambda g: g.left)
    for g in gaps:
        if not 0 < g.left < g.right < 1:
            raise PrecisionError(f"gap {g.index} = [{g.left!r}, {g.right!r}) leaves (0, 1)")
    for a, b in zip(gaps, gaps[1:]):
        if a.right > b.left:
            raise PrecisionError(f"gaps {a.index} and {b.index} overlap")
    return gaps


def total_gap_length(gaps: Sequence[Gap]) -> float:
    return math.fsum(g.length for g in gaps)


@dataclass(frozen=True)
class Cycle:
    """A periodic orbit of f (``kind="f"``) or of f- (``kind="f-"``), sorted."""

    points: tuple
    rot: RationalRot
    kind: str = "f"

    @property
    def order(self) -> int:
        return len(self.points)

    def distance(self, x: float) -> float:
        return min(circle_distance(x, z) for z in self.points)


def _require(params, rot, allowed, what):
    boundary = classify_boundary(params, rot)
    if boundary not in allowed:
        raise NoCycleError(f"no {what} with rotation {rot}: delta is {boundary} of its plateau")
    return boundary


def _verify_cycle(params, points, p, step, lo, hi):
    q = len(points)
    for m, z in enumerate(points):
        if not lo(z) or not hi(z):
            raise PrecisionError(f"cycle point {z!r} outside the domain")
        target = points[(m + p) % q]
        if circle_distance(step(params, z), target) > CROSS_CHECK_TOL:
            raise PrecisionError(f"cycle point {m} is not mapped to point {(m + p) % q}")
    for a, b in zip(points, points[1:]):
        if not a < b:
            raise PrecisionError("cycle points are not strictly increasing")


def _as_rot(rot) -> RationalRot:
    got, _ = as_rotation(rot)
    if got is None:
        raise ParameterError("an exact rational rotation is required")
    return got


def _snap(z, target):
    # values one rounding away from an exact 0 or 1
    return target if abs(z - target) < 1e-13 else z


def cycle_points(params: MapParams, rot, tol: SeriesTolerance = DEFAULT_TOL) -> Cycle:
    """The f-cycle zeta_m = phi(m/q), m = 0..q-1, for delta in [delta_left, delta_right).

    At the right endpoint of the plateau there is no f-cycle and
    :class:`NoCycleError` is raised (see :func:`fminus_cycle`).
    """
    rot = _as_rot(rot)
    _require(params, rot, (INTERIOR, LEFT_ENDPOINT), "f-cycle")
    pts = tuple(_snap(phi_cell(params, rot, m), 0.0) for m in range(rot.q))
    _verify_cycle(params, pts, rot.p, _circle_f, lambda z: z >= 0, lambda z: z < 1)
    return Cycle(pts, rot, "f")


def _circle_f(params, z):
    return f_apply(params, z)


def fminus_cycle(params: MapParams, rot, tol: SeriesTolerance = DEFAULT_TOL) -> Cycle:
    """The f- cycle phi-(m/q), m = 1..q, for delta in (delta_left, delta_right].

    Lives in (0, 1]; at delta = delta_right it contains 1.
    """
    rot = _as_rot(rot)
    _require(params, rot, (INTERIOR, RIGHT_ENDPOINT), "f- cycle")
    pts = tuple(_snap(phi_cell(params, rot, m - 1), 1.0) for m in range(1, rot.q + 1))
    _verify_cycle(params, pts, rot.p, f_left, lambda z: z > 0, lambda z: z <= 1)
    return Cycle(pts, rot, "f-")


@dataclass(frozen=True)
class Arc:
    """Half-open arc [start, start + length) of the circle, start in [0, 1)."""

    start: float
    length: float

    @property
    def end(self) -> float:
        e = self.start + self.length
        return e - 1 if e > 1 else e

    @property
    def wraps(self) -> bool:
        return self.start + self.length > 1

    def pieces(self):
        """The arc as one or two linear intervals [a, b) inside [0, 1]."""
        if self.wraps:
            return [(self.start, 1.0), (0.0, self.start + self.length - 1)]
        return [(self.start, self.start + self.length)]

    def contains(self, x: float) -> bool:
        return any(a <= x < b for a, b in self.pieces())


@dataclass(frozen=True)
class IntervalDecomposition:
    """f^n(I) as disjoint circular arcs."""

    arcs: tuple
    n: int

    @property
    def measure(self) -> float:
        return math.fsum(a.length for a in self.arcs)

    @property
    def intervals(self):
        """(a, b) pairs; a > b marks an arc through 0."""
        return [(a.start, a.end) for a in self.arcs]

    def contains(self, x: float) -> bool:
        return any(a.contains(x) for a in self.arcs)


def _push(params: MapParams, a: float, b: float) -> Arc:
    # image of the linear piece [a, b), 0 <= a < b <= 1; F is continuous there
    lam, mu, eta = params.lam, params.mu, params.eta
    below = max(0.0, min(b, eta) - a)
    above = max(0.0, b - max(a, eta))
    start = f_apply(params, a)
    if start >= 1:  # rounding just below eta
        start -= 1
    return Arc(start, lam * below + lam * mu * above)


def iterated_image(params: MapParams, n: int) -> IntervalDecomposition:
    """f^n(I) for I = [0, 1), by pushing arcs forward n times.

    On each linear piece the lift F is continuous and increasing, so a piece
    maps to one arc whose length is lam times the part below eta plus
    lam*mu times the part above it.  Lengths are propagated multiplicatively,
    which keeps relative accuracy even when the image is tiny.
    """
    n = int(n)
    if n < 0:
        raise ParameterError("n must be non-negative")
    arcs = [Arc(0.0, 1.0)]
    for _ in range(n):
        new = []
        for arc in arcs:
            for a, b in arc.pieces():
                if b > a:
                    new.append(_push(params, a, b))
        arcs = sorted(new, key=lambda r: r.start)
    return IntervalDecomposition(tuple(arcs), n)


def hole_arcs(params: MapParams, n: int, q: Optional[int] = None) -> List[Gap]:
    """Holes [f-^l(1), f^l(0)) obtained by iteration.

    Without ``q`` all l = 1..n are returned; with a rational rotation p/q and
    n >= q only the last q indices matter, since older holes are covered.
    """
    n = int(n)
    first = 1 if q is None or n < q else n - q + 1
    out = []
    x, y = 0.0, 1.0
    for l in range(1, n + 1):
        x = f_apply(params, x)
        y = f_left(params, y)
        if l >= first:
            out.append(Gap(l, y, x))
    return out


@dataclass(frozen=True)
class OmegaLimit:
    """Result of :func:`omega_limit`.

    ``kind`` is ``"cycle"``, ``"finite_set"`` or ``"cantor"``; ``points`` is the
    limit set (cycle points, or the gap endpoints at the computed depth for
    the Cantor case) and ``gaps`` the gaps in the Cantor case.
    """

    kind: str
    points: tuple
    cycle: Optional[Cycle] = None
    gaps: Optional[tuple] = None
    final_distance: float = 0.0


def _approaches(distances, window, tol):
    # per-window maxima over the last 10% must not grow (unless already
    # below tol) and the final distance must be below tol
    tail = distances[-max(window, len(distances) // 10):]
    maxima = [max(tail[i:i + window]) for i in range(0, len(tail) - window + 1, window)]
    for prev, cur in zip(maxima, maxima[1:]):
        if cur > prev and cur >= tol:
            return False
    return tail[-1] < tol


def omega_limit(
    params: MapParams,
    x: float,
    orbit_steps: int = 2000,
    gap_depth: Optional[int] = None,
    tol: float = 1e-9,
    max_den: int = 10**6,
) -> OmegaLimit:
    """The omega-limit set of x under f, classified through :func:`rho_exact`.

    Rational rotation with delta in [delta_left, delta_right): the f-cycle.
    At delta = delta_right: the f- cycle, a set of q points containing 1, and
    the orbit is followed with f- after one f step if it starts at 0.
    Otherwise: the Cantor set, represented by the gap endpoints up to
    ``gap_depth`` (default ``orbit_steps + 200``).

    The orbit of x is then followed for ``orbit_steps`` steps and
    :class:`OrbitApproachError` is raised unless it approaches the set.
    """
    if not 0 <= x < 1:
        raise ParameterError("omega_limit needs x in [0, 1)")
    res = rho_exact(params, max_den=max_den)
    steps = int(orbit_steps)
    if res.boundary == NOT_RATIONAL:
        depth = int(gap_depth) if gap_depth is not None else steps + 200
        gaps = tuple(sorted(hole_arcs(params, depth), key=lambda g: g.left))
        ends = sorted([g.left for g in gaps] + [g.right for g in gaps])

        def dist(z):
            i = bisect.bisect_left(ends, z)
            near = [ends[j] for j in (i - 1, i) if 0 <= j < len(ends)]
            return min(circle_distance(z, e) for e in near)

        distances, z = [], x
        for _ in range(steps):
            z = f_apply(params, z)
            distances.append(dist(z))
        if not _approaches(distances, max(1, steps // 100), tol):
            raise OrbitApproachError(f"orbit of {x} not within {tol} of the limit set after {steps} steps")
        return OmegaLimit("cantor", tuple(ends), None, gaps, distances[-1])

    rot = res.rational
    if res.boundary == RIGHT_ENDPOINT:
        cyc = fminus_cycle(params, rot)
        kind = "finite_set"
        z = f_apply(params, x) if x == 0 else x
        step = f_left
    else:
        try:
            cyc = cycle_points(params, rot)
            kind = "cycle"
            z, step = x, f_apply
        except PrecisionError:
            # delta within rounding of the right endpoint: a cycle point is 1.0
            cyc = fminus_cycle(params, rot)
            kind = "finite_set"
            z = f_apply(params, x) if x == 0 else x
            step = f_left
    distances = []
    for _ in range(steps):
        z = step(params, z)
        distances.append(cyc.distance(z))
    if not _approaches(distances, rot.q, tol):
        raise OrbitApproachError(f"orbit of {x} not within {tol} of the limit set after {steps} steps")
    return OmegaLimit(kind, cyc.points, cyc, None, distances[-1])

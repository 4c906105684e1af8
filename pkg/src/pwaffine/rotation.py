"""Rotation number of f: orbit estimate and exact Stern-Brocot classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import (
    ConvergenceError,
    MapParams,
    ParameterError,
    RationalRot,
    RotationValue,
    r_bound,
    check_rho,
)
from .dynamics import _step
from .heckemahler import Plateau, delta_plateau

__all__ = [
    "INTERIOR",
    "LEFT_ENDPOINT",
    "RIGHT_ENDPOINT",
    "NOT_RATIONAL",
    "OUTSIDE",
    "DEFAULT_MAX_DEN",
    "RotationResult",
    "rho_orbit_estimate",
    "rho_exact",
    "classify_boundary",
]

INTERIOR = "interior"
LEFT_ENDPOINT = "left_endpoint"
RIGHT_ENDPOINT = "right_endpoint"
NOT_RATIONAL = "not_rational"
OUTSIDE = "outside"

DEFAULT_MAX_DEN = 10**6

# the search gives up once the two bracketing plateaus are this many ulps apart
_ULP_GAP = 4


@dataclass(frozen=True)
class RotationResult:
    """Outcome of :func:`rho_exact`.

    ``bracket`` holds the Farey interval (as Fractions) known to contain the
    rotation number when ``boundary`` is ``not_rational``.
    """

    value: RotationValue
    boundary: str
    plateau: Optional[Plateau] = None
    bracket: Optional[tuple] = None
    evidence: dict = field(default_factory=dict)

    @property
    def is_exact(self) -> bool:
        return self.value.is_exact

    @property
    def rational(self) -> Optional[RationalRot]:
        return self.value.rational

    @property
    def estimate(self) -> float:
        return self.value.approx


#: fixed-point fraction bits used to iterate exact parameters
FIXED_BITS = 192


def rho_orbit_estimate(params: MapParams, n: int = 10**6) -> RotationValue:
    """floor(x_n)/n along the lifted orbit of 0, with error bound 2/n.

    Exact (Fraction) parameters are iterated in FIXED_BITS-bit fixed point;
    f contracts, so the rounding error stays of order 2**-FIXED_BITS.
    """
    n = int(n)
    if n < 1:
        raise ParameterError("n must be positive")
    if params.exact:
        count = _fixed_point_carries(params, n, FIXED_BITS)
    else:
        lam, mu, delta, eta = params.lam, params.mu, params.delta, params.eta
        t, count = 0.0, 0
        for _ in range(n):
            t, carry = _step(lam, mu, delta, eta, t)
            count += carry
    return RotationValue.approximate(count / n, 2.0 / n)


def _fixed_point_carries(params: MapParams, n: int, bits: int) -> int:
    one = 1 << bits

    def scaled(v):
        return (v.numerator << bits) // v.denominator

    lam, mu, delta = scaled(params.lam), scaled(params.mu), scaled(params.delta)
    t, count = 0, 0
    for _ in range(n):
        y = ((lam * t) >> bits) + delta
        if y >= one:  # lam*t + delta >= 1 is the upper branch
            t = (mu * (y - one)) >> bits
            count += 1
        else:
            t = y
    return count


def _classify(delta, plateau: Plateau, rel_tol: float) -> str:
    slack = rel_tol * abs(delta)
    if abs(delta - plateau.delta_left) <= slack:
        return LEFT_ENDPOINT
    if abs(delta - plateau.delta_right) <= slack:
        return RIGHT_ENDPOINT
    if plateau.delta_left < delta < plateau.delta_right:
        return INTERIOR
    return OUTSIDE


def classify_boundary(params: MapParams, rot: RationalRot, rel_tol: float = 0.0) -> str:
    """Position of delta relative to the plateau of ``rot``.

    One of interior, left_endpoint, right_endpoint or outside.  Endpoints are
    matched by exact float equality unless ``rel_tol`` is given.  A ``rot``
    at or beyond r_bound has no plateau and is reported as outside.
    """
    try:
        plateau = delta_plateau(params.lam, params.mu, rot)
    except ConvergenceError:
        return OUTSIDE
    return _classify(params.delta, plateau, rel_tol)


class _Search:
    """Plateau probes on p/q with memoised results."""

    def __init__(self, params: MapParams, max_den: int, rel_tol: float):
        self.params = params
        self.max_den = max_den
        self.rel_tol = rel_tol
        self.probes = 0
        self.cache = {}

    def plateau(self, p, q) -> Optional[Plateau]:
        key = (p, q)
        if key not in self.cache:
            self.probes += 1
            rot = RationalRot(p, q)
            try:
                check_rho(self.params.lam, self.params.mu, rot)
            except ConvergenceError:
                self.cache[key] = None
            else:
                self.cache[key] = delta_plateau(self.params.lam, self.params.mu, rot)
        return self.cache[key]

    def side(self, p, q) -> str:
        """'left', 'right', 'inside' (delta on the plateau) or 'over' (q too large)."""
        if q > self.max_den:
            return "over"
        pl = self.plateau(p, q)
        if pl is None:  # p/q >= r_bound: the rotation number lies below
            return "left"
        d = self.params.delta
        slack = self.rel_tol * abs(d)
        # differences keep Fraction parameters exact
        if pl.delta_left - d > slack:
            return "left"
        if d - pl.delta_right > slack:
            return "right"
        return "inside"


def _run(search: _Search, probe, first: str):
    """Longest run k >= 1 of probe(k) classified ``first``.

    Returns (k_last, verdict of probe(k_last + 1), or an exact hit as (k, 'inside')).
    Classification is monotone in k, so an exponential then binary search works.
    """
    lo, hi = 1, 2
    while True:
        s = search.side(*probe(hi))
        if s == "inside":
            return hi, "inside"
        if s != first:
            break
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        s = search.side(*probe(mid))
        if s == "inside":
            return mid, "inside"
        if s == first:
            lo = mid
        else:
            hi = mid
    return lo, None


def rho_exact(
    params: MapParams, max_den: int = DEFAULT_MAX_DEN, rel_tol: float = 0.0
) -> RotationResult:
    """Rotation number by bisection of the Stern-Brocot tree against plateaus.

    At a mediant p/q the plateau [delta_left, delta_right] is computed; delta
    on it means the rotation number is exactly p/q, otherwise the search moves
    toward delta.  Long runs of moves in one direction are skipped with an
    exponential search.  Without an exact hit the result is ``not_rational``
    with the final Farey bracket, once the next denominator would exceed
    ``max_den`` or the two bracketing plateaus are within a few ulps of each
    other (deeper levels are below float resolution).  Exact parameters drop
    the ulp rule and are resolved down to ``max_den``; the plateau sums then
    run in Fractions, so keep ``max_den`` modest for them.
    """
    max_den = int(max_den)
    if max_den < 1:
        raise ParameterError("max_den must be positive")
    search = _Search(params, max_den, rel_tol)
    lam, mu, delta = params.lam, params.mu, params.delta
    # plateau ends of the bracket; the roots 0/1 and 1/1 map to the ends of the delta range
    a, b = (0, 1), (1, 1)
    a_right, b_left = 1 - lam, params.d
    depth = 0

    def exact(p, q):
        pl = search.plateau(p, q)
        rot = RationalRot(p, q)
        boundary = _classify(delta, pl, rel_tol)
        if boundary == OUTSIDE:  # only reachable through rel_tol slack
            boundary = LEFT_ENDPOINT if delta < pl.delta_left else RIGHT_ENDPOINT
        return RotationResult(
            RotationValue.exact(rot), boundary, pl, None,
            {"search_depth": depth, "probes": search.probes, "max_den": max_den},
        )

    while True:
        m = (a[0] + b[0], a[1] + b[1])
        gap = b_left - a_right
        if m[1] > max_den or (not params.exact and gap <= _ULP_GAP * math.ulp(delta)):
            lo, hi = Fraction(*a), Fraction(*b)
            value = RotationValue.approximate(float((lo + hi) / 2), float((hi - lo) / 2))
            return RotationResult(
                value, NOT_RATIONAL, None, (lo, hi),
                {"search_depth": depth, "probes": search.probes, "max_den": max_den},
            )
        depth += 1
        s = search.side(*m)
        if s == "inside":
            return exact(*m)
        if s == "right":
            def probe(k, a=a, b=b):
                return (a[0] + k * b[0], a[1] + k * b[1])
        else:
            def probe(k, a=a, b=b):
                return (k * a[0] + b[0], k * a[1] + b[1])
        k, hit = _run(search, probe, s)
        if hit == "inside":
            return exact(*probe(k))
        new = probe(k)
        if s == "right":
            a, a_right = new, search.plateau(*new).delta_right
        else:
            b = new
            pl = search.plateau(*new)
            b_left = pl.delta_left if pl is not None else params.d

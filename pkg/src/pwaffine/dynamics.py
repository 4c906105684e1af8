"""The map f, its left-limit f-, the lift F, orbits and itineraries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import (
    InconsistentItineraryError,
    MapParams,
    OutsideImageError,
    ParameterError,
    Side,
)

__all__ = [
    "OrbitTrace",
    "f_apply",
    "f_left",
    "lift_F",
    "f_inverse",
    "iter_orbit",
    "forward_orbit",
    "orbit_closed_form",
    "find_periodic_orbit",
    "STORE_LIMIT",
]

#: forward_orbit keeps every point up to this many steps; beyond it only the
#: itinerary and the final point are kept.
STORE_LIMIT = 10**6


def f_apply(params: MapParams, x: float) -> float:
    """f(x) for x in [0, 1): lam*x + delta below eta, mu*(lam*x + delta - 1) from eta on."""
    if not 0 <= x < 1:
        raise ParameterError(f"f is defined on [0, 1), got x = {x!r}")
    if x < params.eta:
        return params.lam * x + params.delta
    return params.mu * (params.lam * x + params.delta - 1)


def f_left(params: MapParams, x: float) -> float:
    """f-(x) = f(x-) for x in (0, 1]; differs from f only at eta, where it is 1."""
    if not 0 < x <= 1:
        raise ParameterError(f"f- is defined on (0, 1], got x = {x!r}")
    if x <= params.eta:
        return params.lam * x + params.delta
    return params.mu * (params.lam * x + params.delta - 1)


def lift_F(params: MapParams, x: float, side=Side.AT_POINT) -> float:
    """The lift F of f to the real line, or its left limit F- with ``side="left-limit"``.

    F(x + 1) = F(x) + 1 and frac(F(x)) = f(frac(x)).  F- differs from F only
    on the integers, where F-(n) = n + mu*(lam + delta - 1).
    """
    side = Side.coerce(side)
    n, t = _split(x)
    lam, mu, delta = params.lam, params.mu, params.delta
    if side is Side.LEFT_LIMIT and t == 0:
        return n + params.hole_left
    if t < params.eta:
        return n + (lam * t + delta)
    return n + 1 + mu * (lam * t + delta - 1)


def f_inverse(params: MapParams, x: float) -> float:
    """The unique y in [0, 1) with f(y) = x.

    Raises :class:`OutsideImageError` when x falls in the hole
    [mu*(lam + delta - 1), delta) that f(I) misses.
    """
    if not 0 <= x < 1:
        raise ParameterError(f"f_inverse needs x in [0, 1), got {x!r}")
    if x >= params.delta:
        return (x - params.delta) / params.lam
    if x < params.hole_left:
        return (x / params.mu + 1 - params.delta) / params.lam
    raise OutsideImageError(
        f"x = {x!r} lies in the hole [{params.hole_left!r}, {params.delta!r}) outside f(I)"
    )


def _split(x):
    # (floor, frac) with frac < 1 even when x - floor(x) rounds up to 1
    n = math.floor(x)
    t = x - n
    if t >= 1:
        return n + 1, 0.0
    return n, t


def _step(lam, mu, delta, eta, t):
    # one step of F on (floor, frac): returns (new frac, floor increment)
    if t < eta:
        y = lam * t + delta
        if y >= 1:  # rounding just below eta
            return y - 1, 1
        return y, 0
    y = mu * (lam * t + delta - 1)
    if y < 0:  # rounding at eta
        return y + 1, 0
    return y, 1


def iter_orbit(params: MapParams, x0: float) -> Iterator[tuple]:
    """Yield (floor(x_k), frac(x_k)) for the F-orbit of x0, forever.

    Floors are tracked as integers so long orbits keep full precision in the
    fractional part.
    """
    lam, mu, delta, eta = params.lam, params.mu, params.delta, params.eta
    n, t = _split(x0)
    while True:
        yield n, t
        t, carry = _step(lam, mu, delta, eta, t)
        n += carry


@dataclass(frozen=True)
class OrbitTrace:
    """Lifted orbit x_0 .. x_n of F and its itinerary bits floor(x_{k+1}) - floor(x_k)."""

    start: float
    itinerary: np.ndarray
    floors: Optional[np.ndarray] = None
    fracs: Optional[np.ndarray] = None
    final: float = 0.0

    @property
    def n(self) -> int:
        return len(self.itinerary)

    @property
    def points(self) -> np.ndarray:
        if self.floors is None:
            raise ValueError("points were not stored for this orbit (streamed)")
        return self.floors + self.fracs

    @property
    def fractional_parts(self) -> np.ndarray:
        if self.fracs is None:
            raise ValueError("points were not stored for this orbit (streamed)")
        return self.fracs

    def rotation_estimate(self) -> float:
        return float(self.itinerary.sum()) / self.n if self.n else 0.0


def forward_orbit(params: MapParams, x0: float, n: int, keep_points: Optional[bool] = None) -> OrbitTrace:
    """Iterate the lift F n times from x0.

    Points are kept when ``keep_points`` is true (default: when n <= STORE_LIMIT);
    the itinerary is always kept.
    """
    n = int(n)
    if n < 0:
        raise ParameterError("n must be non-negative")
    if keep_points is None:
        keep_points = n <= STORE_LIMIT
    lam, mu, delta, eta = params.lam, params.mu, params.delta, params.eta
    base, t = _split(x0)
    bits = np.zeros(n, dtype=np.uint8)
    if keep_points:
        fracs = np.empty(n + 1)
        fracs[0] = t
    for k in range(n):
        t, carry = _step(lam, mu, delta, eta, t)
        bits[k] = carry
        if keep_points:
            fracs[k + 1] = t
    floors = None
    if keep_points:
        floors = base + np.concatenate(([0], np.cumsum(bits, dtype=np.int64)))
        fracs = fracs
    final = base + int(bits.sum(dtype=np.int64)) + t
    return OrbitTrace(float(x0), bits, floors, fracs if keep_points else None, final)


def orbit_closed_form(params: MapParams, x: float, itinerary: Sequence[int], l: int, n: int) -> float:
    """x_{l+n} rebuilt from x and its itinerary, without iterating F.

    Uses the explicit composition of the affine branches: with eta = (1-delta)/lam
    and c = (lam + delta - 1)/lam,

        x_{l+n} = fl(l+n) + lam^n mu^(fl(l+n) - fl(l)) (frac(x_l) - eta) + eta
                  + sum_{k<n} lam^k mu^(fl(l+n) - fl(l+n-k)) (c + fl(l+n-k-1) - fl(l+n-k))

    where fl(j) = floor(x_j) is read off the itinerary.  x_l itself is obtained
    the same way from x.
    """
    bits = np.asarray(itinerary, dtype=np.int64)
    l, n = int(l), int(n)
    if l < 0 or n < 0:
        raise ParameterError("l and n must be non-negative")
    if l + n > len(bits):
        raise ParameterError(f"itinerary has {len(bits)} bits, need {l + n}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise InconsistentItineraryError("itinerary bits must be 0 or 1")
    base, frac = _split(x)
    floors = base + np.concatenate(([0], np.cumsum(bits[: l + n])))
    if l + n <= PREFIX_CHECK_LIMIT:
        _check_prefixes(params, frac, floors, bits, l + n)
    x_l = _compose(params, frac, floors, 0, l)
    return _compose(params, x_l - floors[l], floors, l, n)


#: orbit_closed_form re-derives every intermediate point (quadratic cost) up to this length
PREFIX_CHECK_LIMIT = 2000


def _check_prefixes(params, frac, floors, bits, total, slack=1e-9):
    # each x_j rebuilt from x must lie on the branch its bit claims
    eta = params.eta
    for j in range(total):
        t = _compose(params, frac, floors, 0, j, slack) - floors[j]
        ok = t >= eta - slack if bits[j] else t < eta + slack
        if not ok:
            raise InconsistentItineraryError(
                f"bit {j} = {int(bits[j])} disagrees with the reconstructed point (frac {t!r}, eta {eta!r})"
            )


def _compose(params, frac_start, floors, l, n, slack=1e-9):
    lam, mu = params.lam, params.mu
    eta = params.eta
    c = (lam + params.delta - 1) / lam
    top = int(floors[l + n])
    total = lam ** n * mu ** (top - int(floors[l])) * (frac_start - eta) + eta
    for k in range(n):
        hi, lo = int(floors[l + n - k]), int(floors[l + n - k - 1])
        total += lam ** k * mu ** (top - hi) * (c + lo - hi)
    if not -slack <= total < 1 + slack:
        raise InconsistentItineraryError(
            f"reconstructed fractional part {total!r} of x_{l + n} leaves [0, 1)"
        )
    return top + total


def find_periodic_orbit(
    params: MapParams,
    x0: float,
    steps: int = 10_000,
    max_period: int = 200,
    *,
    left: bool = False,
    detect_tol: float = 1e-9,
    margin: float = 1e-12,
):
    """Search the orbit of x0 for a periodic cycle of f (or f- with ``left``).

    After ``steps`` iterations the tail is scanned for the smallest period P
    with |x_N - x_{N-P}| < detect_tol.  The branch pattern of the tail then
    fixes an affine map whose fixed point is solved for directly, and the
    candidate cycle is accepted only if every point lies in its branch with
    the open ends kept ``margin`` away.  An orbit that merely accumulates on
    a discontinuity (or on 1, outside [0, 1)) is therefore not reported.

    Returns the sorted cycle points, or None.
    """
    lam, mu, delta, eta = params.lam, params.mu, params.delta, params.eta
    if left:
        def step(params, x):
            # a value rounding to 0 is the point 1 of (0, 1]
            y = f_left(params, x)
            return y if y > 0 else 1.0
    else:
        def step(params, x):
            # the circle step, so an orbit rounding up to 1 wraps to 0
            return _step(lam, mu, delta, eta, x)[0]
    x = x0
    tail = []
    keep = 2 * max_period + 1
    for k in range(steps):
        x = step(params, x)
        if k >= steps - keep:
            tail.append(x)
    if len(tail) < 2:
        return None
    last = tail[-1]
    period = None
    for P in range(1, min(max_period, len(tail) - 1) + 1):
        if abs(last - tail[-1 - P]) < detect_tol:
            period = P
            break
    if period is None:
        return None
    seg = tail[-period:]
    upper = [(z > eta) if left else (z >= eta) for z in seg]
    # compose the affine branches along the segment: z -> A z + B
    A, B = 1.0, 0.0
    for up in upper:
        if up:
            A, B = lam * mu * A, lam * mu * B + mu * (delta - 1)
        else:
            A, B = lam * A, lam * B + delta
    z = B / (1 - A)
    points = []
    for up in upper:
        points.append(z)
        if not _branch_ok(z, up, eta, left, margin):
            return None
        z = lam * z + delta if not up else mu * (lam * z + delta - 1)
    if abs(z - points[0]) > detect_tol:
        return None
    return sorted(points)


def _branch_ok(z, up, eta, left, margin):
    if not left:
        # [0, eta) and [eta, 1): closed ends get slack, open ends a margin
        if up:
            return eta - margin <= z < 1 - margin
        return -margin <= z < eta - margin
    # (0, eta] and (eta, 1]
    if up:
        return eta + margin < z <= 1 + margin
    return margin < z <= eta + margin

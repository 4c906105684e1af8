"""Hecke-Mahler series and the rotation-number staircase delta(lambda, mu, rho).

Truncated series stop on a rigorous geometric tail bound.  Rational arguments
(``Fraction``, ``RationalRot`` or ``"p/q"``) always go through exact integer
floors; plain floats are treated as irrational and their floors ``floor(k*rho)``
are taken in the working float width, which can misclassify a floor when
``k*rho`` is within a few ulps of an integer.  ``SeriesTolerance(precision=...)``
switches the series to mpmath with the requested mantissa width.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import mpmath

from .core import (
    ConvergenceError,
    ParameterError,
    RationalRot,
    SeriesTruncationError,
    Side,
    SideReal,
    as_rotation,
    check_rho,
)

__all__ = [
    "SeriesTolerance",
    "DEFAULT_TOL",
    "SeriesEval",
    "Plateau",
    "sigma",
    "sigma_eval",
    "sigma_rational",
    "s_sum",
    "psi",
    "psi_eval",
    "phi_series",
    "phi_series_eval",
    "delta_of_rho",
    "delta_from_sigma",
    "delta_plateau",
]


@dataclass(frozen=True)
class SeriesTolerance:
    """Truncation policy for the infinite series.

    ``precision`` is a mantissa width in bits; ``None`` keeps doubles.
    """

    abs_tol: float = 1e-12
    max_terms: int = 10**6
    precision: Optional[int] = None

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be a positive integer")
        if self.precision is not None and int(self.precision) < 8:
            raise ValueError("precision must be at least 8 bits")


DEFAULT_TOL = SeriesTolerance()


class SeriesEval(NamedTuple):
    value: object
    terms: int
    tail_bound: float


@contextmanager
def _arith(tol: SeriesTolerance):
    if tol.precision is None:
        yield float
    else:
        with mpmath.workprec(int(tol.precision)):
            yield mpmath.mpf


def _exact_rho(rho) -> Optional[Fraction]:
    if isinstance(rho, RationalRot):
        return rho.fraction
    if isinstance(rho, Fraction):
        return rho
    if isinstance(rho, str):
        return RationalRot.parse(rho).fraction
    return None


def _floors(rho, num):
    """Return k -> floor(k * rho), exact for rational rho."""
    exact = _exact_rho(rho)
    if exact is not None:
        p, q = exact.numerator, exact.denominator
        return lambda k: (k * p) // q
    r = num(rho)
    return lambda k: math.floor(k * r)


def _ceilings(rho, x, num, right: bool):
    """Return k -> ceil(k*rho + x), or floor(k*rho + x) + 1 with ``right``.

    The second form is the ceiling of (k*rho + x)+, i.e. a limit from the right.
    """
    exact = _exact_rho(rho)
    if exact is not None and not isinstance(x, mpmath.mpf):
        xf = Fraction(x)
        a, b = exact.numerator, exact.denominator
        c, d = xf.numerator, xf.denominator
        slope, offset, den = a * d, c * b, b * d
        if right:
            return lambda k: (k * slope + offset) // den + 1
        return lambda k: -((-(k * slope + offset)) // den)
    r, xv = num(float(exact) if exact is not None else rho), num(x)
    if right:
        return lambda k: math.floor(k * r + xv) + 1
    return lambda k: math.ceil(k * r + xv)


def _geom_tails(x, K):
    """(sum_{k>K} x^k, sum_{k>K} k x^k) for 0 <= x < 1."""
    xk = x ** (K + 1)
    one = 1 - x
    return xk / one, xk * ((K + 1) - K * x) / (one * one)


def _count_tail(L, M, rho, c, K):
    """Bound sum_{k>K} L^k G(n_k) with G(n) = 1 + M + ... + M^(n-1), n_k <= k*rho + c."""
    if M < 1:
        s1, s2 = _geom_tails(L, K)
        return min(s1 / (1 - M), rho * s2 + c * s1)
    if M == 1:
        s1, s2 = _geom_tails(L, K)
        return rho * s2 + c * s1
    x = L * M ** rho
    s1, s2 = _geom_tails(x, K)
    scale = M ** c
    return scale * min(s1 / (M - 1), rho * s2 + c * s1)


def sigma_eval(lam, mu, rho, tol: SeriesTolerance = DEFAULT_TOL) -> SeriesEval:
    """sigma with its term count and final tail bound.  See :func:`sigma`."""
    check_rho(lam, mu, rho)
    with _arith(tol) as num:
        floor_of = _floors(rho, num)
        L, M = num(lam), num(mu)
        rv = num(as_rotation(rho)[1])
        x = L * M ** rv
        if not x < 1:
            raise ConvergenceError(f"lambda*mu**rho = {x} >= 1")
        # mu^floor(k rho) <= max(1, 1/mu) * mu^(k rho)
        scale = max(num(1), 1 / M) / (1 - x)
        total = num(0)
        power = L  # lam^k mu^floor(k rho) at k = 1
        xk = x * x
        fk = floor_of(1)
        for k in range(1, int(tol.max_terms) + 1):
            fk1 = floor_of(k + 1)
            if fk1 != fk:
                total += (fk1 - fk) * power
            power *= L
            if fk1 != fk:
                power *= M ** (fk1 - fk)
            fk = fk1
            tail = scale * xk
            if tail < tol.abs_tol:
                return SeriesEval(total, k, float(tail))
            xk *= x
    raise SeriesTruncationError(
        f"sigma: tail bound {float(tail):.3g} still above {tol.abs_tol} after {tol.max_terms} terms"
    )


def sigma(lam, mu, rho, tol: SeriesTolerance = DEFAULT_TOL):
    """sum_{k>=1} (floor((k+1) rho) - floor(k rho)) lam^k mu^floor(k rho).

    Requires 0 < rho < r_bound(lam, mu).  The truncation error is below
    ``tol.abs_tol`` (rounding aside).
    """
    return sigma_eval(lam, mu, rho, tol).value


def _mono(lam, mu, a, b):
    # lam^a mu^b when the factors alone over- or underflow but the product does not
    try:
        return lam ** a * mu ** b
    except OverflowError:
        return math.exp(a * math.log(lam) + b * math.log(mu))


def s_sum(lam, mu, rot: RationalRot):
    """Finite sum S over k = 1 .. q-2 (zero when q = 2), with exact floors."""
    rot = as_rotation(rot)[0] if not isinstance(rot, RationalRot) else rot
    p, q = rot.p, rot.q
    total = 0 * lam
    power = lam  # lam^k mu^floor(kp/q) at k = 1 (floor(p/q) = 0)
    fk = 0
    for k in range(1, q - 1):
        fk1 = ((k + 1) * p) // q
        if fk1 != fk:
            total += power
            power *= mu
        power *= lam
        fk = fk1
    return total


def sigma_rational(lam, mu, rot, side=Side.AT_POINT):
    """Closed forms of sigma at p/q and at (p/q)-; no truncation.

    at-point:   (S + lam^(q-1) mu^(p-1)) / (1 - lam^q mu^p)
    left-limit: (S + lam^q mu^(p-1)) / (1 - lam^q mu^p)
    """
    rot = rot if isinstance(rot, RationalRot) else as_rotation(rot)[0]
    if rot is None:
        raise ParameterError("sigma_rational needs an exact rational rotation")
    check_rho(lam, mu, rot)
    side = Side.coerce(side)
    p, q = rot.p, rot.q
    S = s_sum(lam, mu, rot)
    denom = 1 - _mono(lam, mu, q, p)
    if side is Side.LEFT_LIMIT:
        return (S + _mono(lam, mu, q, p - 1)) / denom
    if side is Side.AT_POINT:
        return (S + _mono(lam, mu, q - 1, p - 1)) / denom
    raise ParameterError("sigma is right continuous; use at-point for the right limit")


def psi_eval(lam, mu, rho, tol: SeriesTolerance = DEFAULT_TOL) -> SeriesEval:
    """Psi with its term count and final tail bound.  See :func:`psi`."""
    if not 0 < lam < 1:
        raise ParameterError("psi needs 0 < lambda < 1")
    check_rho(lam, mu, rho, below_r=False)
    exact = _exact_rho(rho)
    with _arith(tol) as num:
        floor_of = _floors(rho, num)
        L, M = num(lam), num(mu)
        rv = num(float(exact)) if exact is not None else num(rho)
        total = num(0)
        lam_k = num(1)
        inner = num(0)  # mu + mu^2 + ... + mu^floor(k rho)
        mu_pow = M
        m = 0
        for k in range(1, int(tol.max_terms) + 1):
            lam_k *= L
            target = floor_of(k)
            while m < target:
                inner += mu_pow
                mu_pow *= M
                m += 1
            total += lam_k * inner
            tail = M * _count_tail(L, M, rv, 0, k)
            if tail < tol.abs_tol:
                return SeriesEval(total, k, float(tail))
    raise SeriesTruncationError(
        f"psi: tail bound {float(tail):.3g} still above {tol.abs_tol} after {tol.max_terms} terms"
    )


def psi(lam, mu, rho, tol: SeriesTolerance = DEFAULT_TOL):
    """Psi_rho(lam, mu) = sum_{k>=1} sum_{1<=h<=k rho} lam^k mu^h.

    Summed row by row as sum_k lam^k (mu + ... + mu^floor(k rho)), which is a
    different route from the floor-difference series of :func:`sigma`.
    """
    return psi_eval(lam, mu, rho, tol).value


def phi_series_eval(lam, mu, rho, x, tol: SeriesTolerance = DEFAULT_TOL) -> SeriesEval:
    """Phi with its term count and final tail bound.  See :func:`phi_series`."""
    if not 0 < lam < 1:
        raise ParameterError("phi_series needs 0 < lambda < 1")
    check_rho(lam, mu, rho, below_r=False)
    x = SideReal.coerce(x)
    right = x.side is Side.RIGHT_LIMIT
    exact = _exact_rho(rho)
    with _arith(tol) as num:
        ceil_of = _ceilings(rho, x.value, num, right)
        L, M = num(lam), num(mu)
        rv = num(float(exact)) if exact is not None else num(rho)
        c = max(num(0), num(x.value) + 1)
        total = num(0)
        lam_k = num(1)
        inner = num(0)  # 1 + mu + ... + mu^(n-1)
        mu_pow = num(1)
        n = 0
        for k in range(0, int(tol.max_terms)):
            target = ceil_of(k)
            while n < target:
                inner += mu_pow
                mu_pow *= M
                n += 1
            total += lam_k * inner
            lam_k *= L
            tail = _count_tail(L, M, rv, c, k)
            if tail < tol.abs_tol:
                return SeriesEval(total, k + 1, float(tail))
    raise SeriesTruncationError(
        f"phi_series: tail bound {float(tail):.3g} still above {tol.abs_tol} after {tol.max_terms} terms"
    )


def phi_series(lam, mu, rho, x, tol: SeriesTolerance = DEFAULT_TOL):
    """Phi_rho(lam, mu, x) = sum_{k>=0} sum_{0<=l<k rho + x} lam^k mu^l.

    ``x`` may be a :class:`SideReal`.  Phi is left continuous in x, so the
    left-limit side equals the at-point value; the right-limit side counts
    the indices with l <= k rho + x instead.
    """
    return phi_series_eval(lam, mu, rho, x, tol).value


def delta_from_sigma(lam, mu, s):
    """(1 - lam)(1 + mu s) / (1 + (mu - 1) s)."""
    return (1 - lam) * (1 + mu * s) / (1 + (mu - 1) * s)


def delta_of_rho(lam, mu, rho, tol: SeriesTolerance = DEFAULT_TOL, side=Side.AT_POINT):
    """The staircase delta(lam, mu, rho), increasing in rho on (0, r_bound).

    For an exact rational rho the closed form is used; ``side="left-limit"``
    then gives delta(lam, mu, (p/q)-), the left end of the plateau.
    """
    rot, _ = as_rotation(rho)
    if rot is not None:
        side = Side.coerce(side)
        if side is Side.RIGHT_LIMIT:
            raise ParameterError("delta is right continuous; use the at-point side")
        pl = delta_plateau(lam, mu, rot)
        return pl.delta_left if side is Side.LEFT_LIMIT else pl.delta_right
    return delta_from_sigma(lam, mu, sigma(lam, mu, rho, tol))


@dataclass(frozen=True)
class Plateau:
    """The delta-interval on which the rotation number equals ``rot``."""

    rot: RationalRot
    delta_left: float
    delta_right: float

    @property
    def width(self) -> float:
        return self.delta_right - self.delta_left

    def contains(self, delta, rel_tol: float = 0.0) -> bool:
        slack = rel_tol * abs(delta)
        return self.delta_left - slack <= delta <= self.delta_right + slack


def delta_plateau(lam, mu, rot) -> Plateau:
    """Both endpoints of the plateau of p/q, from the closed formulas in S.

    delta_right = (1-lam)(1 + mu S + lam^(q-1) mu^p (1-lam))
                  / (1 + (mu-1) S + lam^(q-1) mu^(p-1) (mu - lam mu - 1))
    delta_left  = (1-lam)(1 + mu S) / (1 + (mu-1) S - lam^q mu^(p-1))
    """
    rot = rot if isinstance(rot, RationalRot) else as_rotation(rot)[0]
    if rot is None:
        raise ParameterError("delta_plateau needs an exact rational rotation")
    check_rho(lam, mu, rot)
    p, q = rot.p, rot.q
    S = s_sum(lam, mu, rot)
    a = _mono(lam, mu, q - 1, p - 1)
    right = (1 - lam) * (1 + mu * S + a * mu * (1 - lam)) / (1 + (mu - 1) * S + a * (mu - lam * mu - 1))
    left = (1 - lam) * (1 + mu * S) / (1 + (mu - 1) * S - a * lam)
    return Plateau(rot, left, right)


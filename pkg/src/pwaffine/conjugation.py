"""The conjugation phi between the rotation by rho and the lift F.

For irrational rho, phi is a strictly increasing function with
F(phi(y)) = phi(y + rho) and floor(phi(y)) = floor(y) when delta sits on the
staircase.  For rational rho = p/q it is a step function, constant on every
cell [n/q, (n+1)/q), whose values are the points of the periodic cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .core import (
    MapParams,
    ParameterError,
    RationalRot,
    RotationValue,
    SeriesTruncationError,
    Side,
    SideReal,
    as_rotation,
    check_rho,
)
from .dynamics import lift_F
from .heckemahler import DEFAULT_TOL, SeriesTolerance, _arith, _mono, phi_series

__all__ = [
    "ConjugationSpec",
    "RESIDUAL_FACTOR",
    "phi_eval",
    "phi_eval_via_hm",
    "phi_cell",
    "conjugacy_residual",
]

#: conjugacy_residual stays below RESIDUAL_FACTOR * tol.abs_tol when the
#: hypothesis on delta holds.
RESIDUAL_FACTOR = 10


@dataclass(frozen=True)
class ConjugationSpec:
    """(lambda, mu, delta) together with rho and the series tolerance.

    ``rho`` may be a float (treated as irrational), a ``Fraction``, a
    ``RationalRot``, a ``"p/q"`` string or a :class:`RotationValue`.
    """

    params: MapParams
    rho: object
    tol: SeriesTolerance = field(default=DEFAULT_TOL)

    def __post_init__(self):
        rho = self.rho
        if isinstance(rho, RotationValue):
            rho = rho.rational if rho.is_exact else rho.approx
        rot, _ = as_rotation(rho)
        if rot is not None:
            rho = rot
        check_rho(self.params.lam, self.params.mu, rho, below_r=False)
        object.__setattr__(self, "rho", rho)

    @property
    def rational(self):
        """The exact rotation as a RationalRot, or None."""
        return self.rho if isinstance(self.rho, RationalRot) else None

    @property
    def rho_value(self) -> float:
        return float(self.rho)


def phi_cell(params: MapParams, rot: RationalRot, N: int) -> float:
    """Value of phi on the cell [N/q, (N+1)/q) for rho = p/q, with no truncation.

    Grouping the series by k modulo q leaves q terms and a geometric factor
    1 / (1 - lam^q mu^p).
    """
    lam, mu, delta = params.lam, params.mu, params.delta
    p, q = rot.p, rot.q
    c0 = (lam + delta - 1) / lam
    base = N // q
    total = 0.0
    for j in range(q):
        cur = (N - j * p) // q
        nxt = (N - (j + 1) * p) // q
        total += _mono(lam, mu, j, base - cur) * (c0 + nxt - cur)
    return base + params.eta + total / (1 - _mono(lam, mu, q, p))


def _phi_rational(spec: ConjugationSpec, y: SideReal) -> float:
    rot = spec.rho
    scaled = Fraction(y.value) * rot.q
    if y.side is Side.LEFT_LIMIT:
        N = math.ceil(scaled) - 1
    else:
        N = math.floor(scaled)
    return phi_cell(spec.params, rot, N)


def _phi_series(spec: ConjugationSpec, y: SideReal):
    params, tol = spec.params, spec.tol
    left = y.side is Side.LEFT_LIMIT
    rnd = (lambda v: math.ceil(v) - 1) if left else math.floor
    with _arith(tol) as num:
        L, M, D = num(params.lam), num(params.mu), num(params.delta)
        r, yv = num(spec.rho), num(y.value)
        c0 = (L + D - 1) / L
        base = rnd(yv)
        # |c0 + d_k| is bounded by the two possible floor jumps
        jumps = (math.floor(spec.rho), math.ceil(spec.rho))
        bound = max(abs(c0 - jumps[0]), abs(c0 - jumps[1])) * max(M, 1 / M)
        x = L * M ** r
        if not x < 1:
            raise ParameterError("phi needs lambda * mu**rho < 1")
        total = num(0)
        lam_k = num(1)
        cur = base
        for k in range(int(tol.max_terms)):
            nxt = rnd(yv - (k + 1) * r)
            total += lam_k * M ** (base - cur) * (c0 + nxt - cur)
            cur = nxt
            lam_k *= L
            tail = bound * x ** (k + 1) / (1 - x)
            if tail < tol.abs_tol:
                return _clamp_cell(base, (1 - D) / L + total, CLAMP_FACTOR * tol.abs_tol, left)
    raise SeriesTruncationError(
        f"phi: tail bound {float(tail):.3g} still above {tol.abs_tol} after {tol.max_terms} terms"
    )


#: series values that leave [0, 1) (relative to floor(y)) by less than
#: CLAMP_FACTOR * abs_tol are truncation noise and are pulled back in
CLAMP_FACTOR = 10


def _clamp_cell(base, t, slack, left):
    # phi(y) - floor(y) lies in [0, 1); phi(y-) - (ceil(y) - 1) in [0, 1]
    if -slack < t < 0:
        return base + t * 0
    value = base + t
    if not base + 1 - slack < value < base + 1 + slack:
        return value
    if left:
        return value * 0 + base + 1 if value > base + 1 else value
    if value >= base + 1:
        if isinstance(value, float):
            return math.nextafter(float(base + 1), -math.inf)
        return base + 1 - mpmath.eps * (abs(base) + 1)
    return value


def phi_eval(spec: ConjugationSpec, y) -> float:
    """phi(y), or phi(y-) when ``y`` is a SideReal on the left-limit side.

        phi(y) = floor(y) + eta
                 + sum_{k>=0} lam^k mu^(floor(y) - floor(y - k rho))
                              ((lam + delta - 1)/lam + floor(y - (k+1) rho) - floor(y - k rho))

    The left limit replaces every floor(v) by ceil(v) - 1.  A rational rho is
    evaluated exactly per cell (see :func:`phi_cell`); otherwise the series
    is truncated on a geometric tail bound, and a result that leaves
    [floor(y), floor(y) + 1) by truncation noise only is clamped back, so
    floor(phi(y)) = floor(y) holds exactly.
    """
    y = SideReal.coerce(y)
    if y.side is Side.RIGHT_LIMIT:
        raise ParameterError("phi is right continuous; use the at-point side")
    if spec.rational is not None:
        return _phi_rational(spec, y)
    return _phi_series(spec, y)


def phi_eval_via_hm(spec: ConjugationSpec, y) -> float:
    """phi(y) through the Hecke-Mahler series Phi:

        phi(y) = floor(y) + delta/(1 - lam) - ((delta - mu(lam + delta - 1))/lam) Phi(-frac(y))

    The left limit uses ceil(y) - 1 as integer part and reads Phi from the right.
    """
    y = SideReal.coerce(y)
    params = spec.params
    lam, mu, delta = params.lam, params.mu, params.delta
    exact = spec.rational is not None
    value = Fraction(y.value) if exact else y.value
    if y.side is Side.LEFT_LIMIT:
        base = math.ceil(value) - 1
        arg = SideReal(-(value - base), Side.RIGHT_LIMIT)
    else:
        base = math.floor(value)
        arg = SideReal(-(value - base), Side.AT_POINT)
    if not exact:
        arg = SideReal(float(arg.value), arg.side)
    coeff = (delta - params.hole_left) / lam
    big_phi = phi_series(lam, mu, spec.rho, arg, spec.tol)
    return base + delta / (1 - lam) - coeff * float(big_phi)


def conjugacy_residual(spec: ConjugationSpec, y) -> float:
    """|F(phi(y)) - phi(y + rho)|.

    Whether delta is compatible with rho is not checked here.
    """
    if spec.rational is not None:
        y = Fraction(y)
        shifted = y + spec.rational.fraction
    else:
        shifted = y + spec.rho
    return abs(lift_F(spec.params, float(phi_eval(spec, y))) - float(phi_eval(spec, shifted)))

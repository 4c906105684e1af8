"""Parameter records, validation helpers and exact rational plumbing.

Every other module takes a :class:`MapParams` built by :func:`validate_params`.
Validation compares the raw doubles exactly (through :class:`fractions.Fraction`),
so a parameter that sits one ulp outside the admissible range is rejected.
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

__all__ = [
    "PwAffineError",
    "ParameterError",
    "BijectiveBoundaryError",
    "ConvergenceError",
    "SeriesTruncationError",
    "DenominatorOverflowError",
    "OutsideImageError",
    "InconsistentItineraryError",
    "PrecisionError",
    "NoCycleError",
    "OrbitApproachError",
    "Side",
    "MapParams",
    "RationalRot",
    "RotationValue",
    "SideReal",
    "MAX_DENOMINATOR",
    "validate_params",
    "eta",
    "d_bound",
    "r_bound",
    "farey_mediant",
    "as_rotation",
    "check_rho",
]

#: Largest denominator :func:`farey_mediant` will produce unless told otherwise.
#: Beyond 2**53 a denominator is no longer an exact double.
MAX_DENOMINATOR = 2**53


class PwAffineError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(PwAffineError, ValueError):
    """A parameter lies outside the admissible range."""


class BijectiveBoundaryError(ParameterError):
    """delta equals d_bound with lambda*mu > 1: the map is a bijection.

    That boundary case has different dynamics (irrational rotation number
    -log(lambda)/log(mu)) and is not handled here.
    """


class ConvergenceError(ParameterError):
    """lambda * mu**rho >= 1, so the series involved diverge."""


class SeriesTruncationError(PwAffineError, ArithmeticError):
    """max_terms was exhausted before the tail bound fell below abs_tol."""


class DenominatorOverflowError(PwAffineError, OverflowError):
    pass


class OutsideImageError(PwAffineError, ValueError):
    """The point has no preimage: it lies in the hole of f(I)."""


class InconsistentItineraryError(PwAffineError, ValueError):
    pass


class PrecisionError(PwAffineError, ArithmeticError):
    """Two routes that must agree do not, at the working precision."""


class NoCycleError(PwAffineError):
    pass


class OrbitApproachError(PwAffineError):
    """An orbit did not settle on the predicted limit set in the allotted steps."""


class Side(str, enum.Enum):
    """Where a possibly discontinuous function is evaluated."""

    AT_POINT = "at-point"
    LEFT_LIMIT = "left-limit"
    # Only the Hecke-Mahler series Phi needs this one: it is left continuous,
    # and the left limit of the conjugation reads Phi from the right.
    RIGHT_LIMIT = "right-limit"

    @classmethod
    def coerce(cls, side: Union["Side", str, None]) -> "Side":
        if side is None:
            return cls.AT_POINT
        if isinstance(side, cls):
            return side
        key = str(side).strip().lower().replace("_", "-")
        aliases = {"left": cls.LEFT_LIMIT, "right": cls.RIGHT_LIMIT, "point": cls.AT_POINT}
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class SideReal:
    """A real number tagged with the side it is evaluated from (``x`` or ``x-``)."""

    value: object
    side: Side = Side.AT_POINT

    def __post_init__(self):
        object.__setattr__(self, "side", Side.coerce(self.side))

    @classmethod
    def coerce(cls, x) -> "SideReal":
        return x if isinstance(x, SideReal) else cls(x)


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, RationalRot):
        return x.fraction
    return Fraction(x)


def d_bound(lam: float, mu: float) -> float:
    """Upper bound for delta below which f is injective.

    1 when ``lam * mu < 1``, else ``mu * (1 - lam) / (mu - 1)``.
    """
    if lam * mu < 1:
        return 1.0
    return mu * (1 - lam) / (mu - 1)


def r_bound(lam: float, mu: float) -> float:
    """Supremum of the rotation numbers reachable for fixed (lam, mu).

    This is also the radius of convergence in rho of the Hecke-Mahler series:
    ``lam * mu**rho < 1`` exactly when ``rho < r_bound(lam, mu)``.
    """
    if lam * mu < 1:
        return 1.0
    return -math.log(lam) / math.log(mu)


@dataclass(frozen=True)
class MapParams:
    """The triple (lambda, mu, delta) defining the map f.

    Build instances with :func:`validate_params`; the constructor itself does
    not check the admissible region.  The fields are floats, or Fractions
    when built with ``exact=True``.
    """

    lam: float
    mu: float
    delta: float

    @property
    def eta(self) -> float:
        """Discontinuity point (1 - delta) / lambda of f."""
        return (1 - self.delta) / self.lam

    @property
    def d(self) -> float:
        return d_bound(self.lam, self.mu)

    @property
    def r(self) -> float:
        return r_bound(self.lam, self.mu)

    @property
    def hole_left(self) -> float:
        """mu * (lambda + delta - 1), the value f(1-)."""
        return self.mu * (self.lam + self.delta - 1)

    def replace(self, **changes) -> "MapParams":
        values = {"lam": self.lam, "mu": self.mu, "delta": self.delta}
        values.update(changes)
        return validate_params(**values, exact=self.exact)

    @property
    def exact(self) -> bool:
        return isinstance(self.delta, Fraction)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "mu": self.mu, "delta": self.delta}


def _check_real(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ParameterError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return value


def validate_params(lam, mu, delta, *, exact: bool = False) -> MapParams:
    """Check 0 < lambda < 1, mu > 0 and 1 - lambda < delta < d_bound(lambda, mu).

    All inequalities are strict and evaluated exactly on the given values.
    With ``exact`` the parameters are kept as Fractions (ints, Fractions and
    floats are converted without rounding), so plateaus narrower than a
    double's spacing can be resolved.

    Raises
    ------
    ParameterError
        If any inequality fails.
    BijectiveBoundaryError
        If delta equals d_bound while lambda * mu > 1.
    """
    raw = (lam, mu, delta)
    lam = _check_real(lam, "lambda")
    mu = _check_real(mu, "mu")
    delta = _check_real(delta, "delta")
    if exact:
        lam, mu, delta = (Fraction(v) for v in raw)
    if not 0 < lam < 1:
        raise ParameterError(f"lambda must satisfy 0 < lambda < 1, got {lam!r}")
    if not mu > 0:
        raise ParameterError(f"mu must be positive, got {mu!r}")
    L, M, D = Fraction(lam), Fraction(mu), Fraction(delta)
    if not D > 1 - L:
        raise ParameterError(f"delta must exceed 1-lambda = {1 - lam!r}, got {delta!r}")
    if L * M < 1:
        if not D < 1:
            raise ParameterError(f"delta must be below d_bound = 1 when lambda*mu < 1, got {delta!r}")
    else:
        # delta < mu(1 - lambda)/(mu - 1), cross-multiplied; mu > 1 here.
        lhs, rhs = D * (M - 1), M * (1 - L)
        if L * M > 1 and (lhs == rhs or (not exact and delta == d_bound(lam, mu))):
            raise BijectiveBoundaryError(
                "delta equals d_bound(lambda, mu) with lambda*mu > 1: "
                "f is then a bijection (bijective boundary case), which is not supported"
            )
        if not lhs < rhs:
            raise ParameterError(
                f"delta must be below d_bound = {d_bound(lam, mu)!r}, got {delta!r}"
            )
    return MapParams(lam, mu, delta)


def eta(params: MapParams) -> float:
    return params.eta


@dataclass(frozen=True, order=False)
class RationalRot:
    """A reduced fraction p/q with 0 < p/q < 1."""

    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        if isinstance(p, bool) or isinstance(q, bool) or not isinstance(p, numbers.Integral) \
                or not isinstance(q, numbers.Integral):
            raise ParameterError(f"p and q must be integers, got {p!r}/{q!r}")
        p, q = int(p), int(q)
        if not 0 < p < q:
            raise ParameterError(f"rotation p/q must satisfy 0 < p/q < 1, got {p}/{q}")
        if math.gcd(p, q) != 1:
            raise ParameterError(f"{p}/{q} is not reduced")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_fraction(cls, value) -> "RationalRot":
        value = Fraction(value)
        return cls(value.numerator, value.denominator)

    @classmethod
    def parse(cls, text: str) -> "RationalRot":
        num, sep, den = text.strip().partition("/")
        if not sep:
            raise ParameterError(f"expected a fraction 'p/q', got {text!r}")
        try:
            p, q = int(num), int(den)
        except ValueError:
            raise ParameterError(f"expected a fraction 'p/q', got {text!r}") from None
        g = math.gcd(p, q) or 1
        return cls(p // g, q // g)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return self.p / self.q

    def __lt__(self, other):
        return self.fraction < _exact(other)

    def __le__(self, other):
        return self.fraction <= _exact(other)

    def __gt__(self, other):
        return self.fraction > _exact(other)

    def __ge__(self, other):
        return self.fraction >= _exact(other)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class RotationValue:
    """A rotation number: an exact fraction, or a real with an error bound."""

    kind: str
    approx: float
    error_bound: float = 0.0
    rational: Optional[RationalRot] = field(default=None)

    EXACT = "exact-rational"
    APPROX = "real-approx"

    @classmethod
    def exact(cls, rot: RationalRot) -> "RotationValue":
        return cls(cls.EXACT, float(rot), 0.0, rot)

    @classmethod
    def approximate(cls, value: float, error_bound: float) -> "RotationValue":
        if error_bound < 0:
            raise ValueError("error_bound must be non-negative")
        return cls(cls.APPROX, float(value), float(error_bound), None)

    @property
    def is_exact(self) -> bool:
        return self.kind == self.EXACT

    def contains(self, value: float) -> bool:
        return abs(float(value) - self.approx) <= self.error_bound


def farey_mediant(a, b, max_den: int = MAX_DENOMINATOR) -> RationalRot:
    """Mediant (a.p + b.p)/(a.q + b.q) of two fractions with a < b, reduced.

    ``a`` and ``b`` may be :class:`RationalRot` or anything :class:`Fraction`
    accepts, so the Stern-Brocot roots 0/1 and 1/1 can be passed.
    """
    fa, fb = _exact(a), _exact(b)
    if not fa < fb:
        raise ValueError(f"farey_mediant needs a < b, got {fa} and {fb}")
    p = fa.numerator + fb.numerator
    q = fa.denominator + fb.denominator
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q > max_den:
        raise DenominatorOverflowError(f"mediant denominator {q} exceeds maximum {max_den}")
    return RationalRot(p, q)


def as_rotation(rho):
    """Split a rotation argument into (exact RationalRot or None, float value).

    Fractions, ``RationalRot`` and strings ``"p/q"`` are exact; plain reals
    (floats, mpmath numbers) are treated as approximations of an irrational.
    """
    if isinstance(rho, RationalRot):
        return rho, float(rho)
    if isinstance(rho, Fraction):
        return RationalRot.from_fraction(rho), float(rho)
    if isinstance(rho, str):
        rot = RationalRot.parse(rho)
        return rot, float(rot)
    return None, rho


def _converges(lam: float, mu: float, exact, value) -> bool:
    # lam * mu**rho < 1; for rho = a/b test lam**b * mu**a < 1 instead
    if exact is not None:
        return math.log(lam) * exact.denominator + math.log(mu) * exact.numerator < 0
    return math.log(lam) + value * math.log(mu) < 0


def check_rho(lam: float, mu: float, rho, *, below_r: bool = True) -> None:
    """Raise unless 0 < rho < r_bound(lam, mu).

    With ``below_r=False`` only the series convergence condition
    ``lam * mu**rho < 1`` is enforced, which allows rho >= 1 when lam*mu < 1.
    """
    if isinstance(rho, str):
        rho = RationalRot.parse(rho)
    exact = _exact(rho) if isinstance(rho, (Fraction, RationalRot)) else None
    value = float(exact) if exact is not None else rho
    if not value > 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    if not _converges(lam, mu, exact, value):
        raise ConvergenceError(
            f"rho = {rho} must be below r_bound = {r_bound(lam, mu)!r} (lambda*mu**rho < 1)"
        )
    if below_r and not value < 1:
        raise ParameterError(f"rho = {rho} must lie in (0, 1)")

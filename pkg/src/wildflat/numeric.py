"""Dual-mode scalar and angle arithmetic.

Scalars are either exact rationals (``fractions.Fraction``) or floats.  Mixing
an exact value into a float computation taints the result (Python's numeric
tower already does the right thing); comparisons apply the global tolerance
whenever either operand is approximate.

Angles are kept symbolically as rational multiples of pi whenever possible.
All corner angles arising from the constructions in this package are dyadic
multiples of pi, so angle sums along corner walks stay exact even on charts
whose coordinates are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, float]

DEFAULT_TOLERANCE = 1e-9
_tolerance = DEFAULT_TOLERANCE


def set_tolerance(tol: float) -> None:
    global _tolerance
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    _tolerance = float(tol)


def get_tolerance() -> float:
    return _tolerance


def is_exact(x: Scalar) -> bool:
    return isinstance(x, (Fraction, int))


def sc(x) -> Scalar:
    """Coerce ints/strings to exact scalars; floats stay approximate."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return x
    raise TypeError(f"not a scalar: {x!r}")


def sc_cmp(a: Scalar, b: Scalar, tol: float | None = None) -> int:
    """Three-way compare; tolerance applies iff either side is approximate."""
    if is_exact(a) and is_exact(b):
        if a < b:
            return -1
        if a > b:
            return 1
        return 0
    t = _tolerance if tol is None else tol
    d = float(a) - float(b)
    if d < -t:
        return -1
    if d > t:
        return 1
    return 0


def sc_eq(a: Scalar, b: Scalar, tol: float | None = None) -> bool:
    return sc_cmp(a, b, tol) == 0


def scalar_to_json(x: Scalar):
    if is_exact(x):
        f = Fraction(x)
        return {"num": str(f.numerator), "den": str(f.denominator)}
    return float(x)


def scalar_from_json(obj) -> Scalar:
    if isinstance(obj, dict):
        return Fraction(int(obj["num"]), int(obj["den"]))
    if isinstance(obj, (int, float)):
        return float(obj)
    raise ValueError(f"bad scalar payload: {obj!r}")


TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Angle:
    """An angle, exact (rational multiple of pi) or approximate (radians)."""

    pi_mult: Fraction | None = None
    rad: float | None = None

    def __post_init__(self):
        if (self.pi_mult is None) == (self.rad is None):
            raise ValueError("exactly one of pi_mult/rad must be set")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_pi(mult) -> "Angle":
        return Angle(pi_mult=Fraction(mult))

    @staticmethod
    def from_radians(r: float) -> "Angle":
        return Angle(rad=float(r))

    @staticmethod
    def zero() -> "Angle":
        return Angle.from_pi(0)

    @staticmethod
    def from_vector(dx: Scalar, dy: Scalar) -> "Angle":
        """Exact for the eight half-quadrant directions, else radians."""
        if is_exact(dx) and is_exact(dy):
            if dx == 0 and dy == 0:
                raise ValueError("zero vector has no direction")
            if dy == 0:
                return Angle.from_pi(0 if dx > 0 else 1)
            if dx == 0:
                return Angle.from_pi(Fraction(1, 2) if dy > 0 else Fraction(3, 2))
            if dx == dy:
                return Angle.from_pi(Fraction(1, 4) if dx > 0 else Fraction(5, 4))
            if dx == -dy:
                return Angle.from_pi(Fraction(7, 4) if dx > 0 else Fraction(3, 4))
        return Angle.from_radians(math.atan2(float(dy), float(dx)) % TWO_PI)

    # -- basic queries -----------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.pi_mult is not None

    @property
    def radians(self) -> float:
        if self.exact:
            return float(self.pi_mult) * math.pi
        return self.rad

    def is_dyadic(self) -> bool:
        if not self.exact:
            return False
        d = self.pi_mult.denominator
        return d & (d - 1) == 0

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Angle") -> "Angle":
        if self.exact and other.exact:
            return Angle(pi_mult=self.pi_mult + other.pi_mult)
        return Angle(rad=self.radians + other.radians)

    def __sub__(self, other: "Angle") -> "Angle":
        if self.exact and other.exact:
            return Angle(pi_mult=self.pi_mult - other.pi_mult)
        return Angle(rad=self.radians - other.radians)

    def __neg__(self) -> "Angle":
        if self.exact:
            return Angle(pi_mult=-self.pi_mult)
        return Angle(rad=-self.rad)

    def mod_2pi(self) -> "Angle":
        if self.exact:
            return Angle(pi_mult=self.pi_mult % 2)
        return Angle(rad=self.rad % TWO_PI)

    def mod_2pi_positive(self) -> "Angle":
        """Reduce into (0, 2pi]: a full turn stays a full turn."""
        if self.exact:
            m = self.pi_mult % 2
            return Angle(pi_mult=m if m != 0 else Fraction(2))
        r = self.rad % TWO_PI
        if abs(r) < _tolerance or abs(r - TWO_PI) < _tolerance:
            r = TWO_PI
        return Angle(rad=r)

    def cmp(self, other: "Angle") -> int:
        if self.exact and other.exact:
            a, b = self.pi_mult, other.pi_mult
            return (a > b) - (a < b)
        d = self.radians - other.radians
        if abs(d) <= _tolerance:
            return 0
        return 1 if d > 0 else -1

    def eq(self, other: "Angle") -> bool:
        return self.cmp(other) == 0

    def congruent_2pi(self, other: "Angle") -> bool:
        if self.exact and other.exact:
            return (self.pi_mult - other.pi_mult) % 2 == 0
        d = (self.radians - other.radians) % TWO_PI
        return d < _tolerance or TWO_PI - d < _tolerance

    # -- direction vectors -------------------------------------------------

    _EXACT_VECTORS = {
        Fraction(0): (Fraction(1), Fraction(0)),
        Fraction(1, 4): (Fraction(1), Fraction(1)),
        Fraction(1, 2): (Fraction(0), Fraction(1)),
        Fraction(3, 4): (Fraction(-1), Fraction(1)),
        Fraction(1): (Fraction(-1), Fraction(0)),
        Fraction(5, 4): (Fraction(-1), Fraction(-1)),
        Fraction(3, 2): (Fraction(0), Fraction(-1)),
        Fraction(7, 4): (Fraction(1), Fraction(-1)),
    }

    def vector(self) -> tuple[Scalar, Scalar]:
        """A direction vector (unnormalised); exact on the pi/4 grid."""
        if self.exact:
            key = self.pi_mult % 2
            v = self._EXACT_VECTORS.get(key)
            if v is not None:
                return v
        r = self.radians
        return (math.cos(r), math.sin(r))

    # -- serialisation -----------------------------------------------------

    def to_json(self):
        if self.exact:
            return {"pi_num": self.pi_mult.numerator, "pi_den": self.pi_mult.denominator}
        return {"rad": self.rad}

    @staticmethod
    def from_json(obj) -> "Angle":
        if "rad" in obj:
            return Angle.from_radians(obj["rad"])
        return Angle.from_pi(Fraction(int(obj["pi_num"]), int(obj["pi_den"])))

    def __repr__(self):
        if self.exact:
            return f"Angle({self.pi_mult}*pi)"
        return f"Angle({self.rad:.6f} rad)"


PI = Angle.from_pi(1)
HALF_PI = Angle.from_pi(Fraction(1, 2))
ANGLE_2PI = Angle.from_pi(2)


# -- small planar vector helpers (tuples of Scalars) -----------------------

def v_sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def v_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def v_scale(a, s):
    return (a[0] * s, a[1] * s)


def v_cross(a, b) -> Scalar:
    return a[0] * b[1] - a[1] * b[0]


def v_dot(a, b) -> Scalar:
    return a[0] * b[0] + a[1] * b[1]


def v_len_sq(a) -> Scalar:
    return a[0] * a[0] + a[1] * a[1]


def v_len(a) -> float:
    return math.sqrt(float(v_len_sq(a)))


def v_exact(a) -> bool:
    return is_exact(a[0]) and is_exact(a[1])


def seg_point_dist_sq(p, a, b) -> Scalar:
    """Squared distance from p to segment [a, b]; exact when inputs are."""
    ab = v_sub(b, a)
    ap = v_sub(p, a)
    denom = v_len_sq(ab)
    if denom == 0:
        return v_len_sq(ap)
    t = v_dot(ap, ab) / denom
    if t <= 0:
        return v_len_sq(ap)
    if t >= 1:
        return v_len_sq(v_sub(p, b))
    proj = v_add(a, v_scale(ab, t))
    return v_len_sq(v_sub(p, proj))

"""Reading a recorded bit sequence back off a window surface.

A window at level n is the floor corner at (2^-n, 0): flat (angle pi)
where the recorded bit is 0, split by a capped slit into a pair of
quarter turns where it is 1.  The recorder re-reads each bit through the
subbasis machinery alone.  Four reference balls sit around fixed probe
directions at the window, then every corner of the window's fan is swept:
each admissible probe approach is tested for membership in the ball of
its own direction.  A flat window answers yes exactly once per direction;
a slit window repeats the answers around the slit tip, whose approaches
run parallel to the references a slit-height away and so land inside the
balls.  Any other answer pattern raises PatternMismatch.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..numeric import Angle, sc_cmp
from ..surface import Surface
from ..wild import (
    UNKNOWN,
    YES,
    _sector_offset,
    enumerate_components,
    make_approach,
    make_ball,
    subbasis_contains,
)


class PatternMismatch(Exception):
    """The window sweep did not produce a readable answer pattern."""


def _default_probes() -> tuple:
    eighth = Fraction(1, 8)
    return tuple(Angle.from_pi(m * eighth) for m in (1, 3, 5, 7))


# both templates list probe indices in fan sweep order; the slit form is
# reference corner, then the tip echo, then the far reference corner
FLAT_PATTERN = (1, 2, 3, 4)
SLIT_PATTERN = (1, 2, 1, 2, 3, 4, 3, 4)


@dataclass(frozen=True)
class PassageRecorderConfig:
    """Probe directions and per-window scale factors.

    At window level n the probe length is ``t_base * 2**-n`` and the ball
    radius ``rho_base * 4**-n``.  The radius must exceed the slit height
    4**-n for the tip echo to register, while staying below every
    clearance of the reference points; the defaults hold that balance
    down to the shallowest window.
    """

    probes: tuple = field(default_factory=_default_probes)
    t_base: Fraction = Fraction(3, 4)
    rho_base: Fraction = Fraction(9, 8)

    def validate(self) -> None:
        if len(self.probes) != 4:
            raise ValueError("need exactly four probe directions")
        half = Angle.from_pi(Fraction(1, 2))
        flat = Angle.from_pi(1)
        x1, x2, x3, x4 = self.probes
        ordered = (
            Angle.zero().cmp(x1) < 0
            and x1.cmp(x2) < 0
            and x2.cmp(half) < 0
            and half.cmp(x3) < 0
            and x3.cmp(x4) < 0
            and x4.cmp(flat) < 0
        )
        if not ordered:
            raise ValueError(
                "probe directions must satisfy 0 < x1 < x2 < pi/2 < x3 < x4 < pi"
            )
        if self.t_base <= 0 or self.rho_base <= 0:
            raise ValueError("scale factors must be positive")


def _singular_center(surface: Surface):
    labels = getattr(surface, "class_labels", {})
    for key, lab in labels.items():
        if lab == "sigma" and key in surface.singular_marks:
            return key
    if surface.singular_marks:
        return min(surface.singular_marks)
    return None


def _dyadic_level(value) -> Optional[int]:
    """n for an exact 2**-n with n >= 2, else None."""
    if not isinstance(value, Fraction):
        return None
    if value.numerator != 1:
        return None
    den = value.denominator
    n = den.bit_length() - 1
    if den != 1 << n or n < 2:
        return None
    return n


def _window_fans(surface: Surface, views: list) -> dict:
    """Chain slices spanning each floor corner group at (2**-n, 0)."""
    spots = {}
    for v in views:
        for idx, key in enumerate(v.corners):
            pos = surface.position(key)
            if pos[1] != 0:
                continue
            n = _dyadic_level(pos[0])
            if n is None:
                continue
            spots.setdefault(n, []).append((v, idx))
    fans = {}
    for n, hits in spots.items():
        if len({id(v) for v, _ in hits}) != 1:
            raise PatternMismatch(f"window {n} spans several components")
        v = hits[0][0]
        lo = min(idx for _, idx in hits)
        hi = max(idx for _, idx in hits)
        fans[n] = v.corners[lo : hi + 1]
    return fans


def _read_window(surface: Surface, fan: list, n: int,
                 config: PassageRecorderConfig, budget: int) -> str:
    t = config.t_base * Fraction(1, 1 << n)
    rho = config.rho_base * Fraction(1, 1 << (2 * n))
    ray_budget = 4 * budget + 16  # what the membership test itself can afford
    spot = (Fraction(1, 1 << n), Fraction(0))
    anchors = {}
    for i, x in enumerate(config.probes):
        for key in fan:
            off = _sector_offset(surface, key, x)
            if off is not None and surface.position(key) == spot:
                anchors[i] = (key, off)
                break
    if set(anchors) != {0, 1, 2, 3}:
        raise PatternMismatch(f"window {n} has no anchor for some probe direction")
    balls = {}
    for i, (key, off) in anchors.items():
        center = make_approach(surface, key, off, budget=ray_budget, cap=2 * t)
        if sc_cmp(center.available_length, t) <= 0:
            raise PatternMismatch(f"window {n} reference ray is shorter than t")
        balls[i] = make_ball(surface, center, t, rho)
    events = []
    for key in fan:
        for i, x in enumerate(config.probes):
            off = _sector_offset(surface, key, x)
            if off is None:
                continue
            probe = make_approach(surface, key, off, budget=ray_budget, cap=2 * t)
            if sc_cmp(probe.available_length, t) <= 0:
                continue
            res = subbasis_contains(surface, balls[i], probe, budget=budget)
            if res == UNKNOWN:
                raise PatternMismatch(
                    f"window {n}: membership undecided for a probe at {key}"
                )
            if res == YES:
                events.append(i + 1)
    collapsed = tuple(
        e for k, e in enumerate(events) if k == 0 or events[k - 1] != e
    )
    if collapsed == FLAT_PATTERN:
        return "0"
    if collapsed == SLIT_PATTERN:
        return "1"
    raise PatternMismatch(f"window {n} answered {collapsed}")


def record_passage_sequence(surface: Surface, config: PassageRecorderConfig = None,
                            windows: int = None, budget: int = 8) -> str:
    """Bits r_2, r_3, ... read from the surface's window corners.

    With ``windows`` set, exactly that many bits are returned or
    PatternMismatch is raised; otherwise every realized window is read.
    """
    if config is None:
        config = PassageRecorderConfig()
    config.validate()
    sigma = _singular_center(surface)
    if sigma is None:
        raise PatternMismatch("surface declares no singular point")
    views = enumerate_components(surface, sigma)
    fans = _window_fans(surface, views)
    if not fans:
        raise PatternMismatch("no window corners found")
    bits = []
    n = 2
    while fans.get(n) is not None and (windows is None or len(bits) < windows):
        bits.append(_read_window(surface, fans[n], n, config, budget))
        n += 1
    if windows is not None and len(bits) < windows:
        raise PatternMismatch(
            f"requested {windows} windows but only {len(bits)} are realized"
        )
    return "".join(bits)

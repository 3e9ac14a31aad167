"""Box regions inside [0,1)^r with exact rational endpoints.

A region Omega = I_1 x ... x I_r of half-open intervals [alpha_j, beta_j)
is tested against lattice points after dilation by p: the point x lies in
p*Omega iff alpha_j <= x_j / p < beta_j for every coordinate, decided in
exact rational arithmetic (no floating point anywhere in this module).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError


def parse_fraction(text: str) -> Fraction:
    """Parse "num/den" or "num" into an exact Fraction."""
    try:
        f = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational {text!r}: {exc}") from exc
    return f


@dataclass(frozen=True)
class BoxRegion:
    """Product of half-open rational intervals [alpha_j, beta_j) in [0,1)."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        for j, (lo, hi) in enumerate(self.intervals):
            if not (0 <= lo <= hi <= 1):
                raise ValidationError(
                    f"interval {j + 1}: need 0 <= {lo} <= {hi} <= 1"
                )

    @classmethod
    def full(cls, r: int) -> "BoxRegion":
        """The whole box [0,1)^r."""
        one = Fraction(1)
        zero = Fraction(0)
        return cls(tuple((zero, one) for _ in range(r)))

    @classmethod
    def from_strings(cls, pairs) -> "BoxRegion":
        """Build from [["num/den", "num/den"], ...] as used in configs."""
        intervals = []
        for pair in pairs:
            if len(pair) != 2:
                raise ValidationError(f"interval needs two endpoints, got {pair!r}")
            intervals.append((parse_fraction(pair[0]), parse_fraction(pair[1])))
        return cls(tuple(intervals))

    @property
    def r(self) -> int:
        return len(self.intervals)

    def volume(self) -> Fraction:
        """prod (beta_j - alpha_j), exact."""
        v = Fraction(1)
        for lo, hi in self.intervals:
            v *= hi - lo
        return v

    def contains(self, x, p: int) -> bool:
        """Whether x in [0,p-1]^r lies in the dilated box p*Omega."""
        if len(x) != self.r:
            raise ValidationError(
                f"point has {len(x)} coordinates, region has {self.r}"
            )
        for xj, (lo, hi) in zip(x, self.intervals):
            # alpha <= x/p < beta, cross-multiplied to integers
            if not (lo.numerator * p <= xj * lo.denominator
                    and xj * hi.denominator < hi.numerator * p):
                return False
        return True

    def is_full(self) -> bool:
        return all(lo == 0 and hi == 1 for lo, hi in self.intervals)


def lattice_range(interval: tuple[Fraction, Fraction], p: int) -> tuple[int, int]:
    """Inclusive integer range [lo, hi] of m with m/p in [alpha, beta).

    Empty intervals give lo > hi. Since beta <= 1 the range always sits
    inside [0, p-1].
    """
    lo_f, hi_f = interval
    lo = -((-lo_f.numerator * p) // lo_f.denominator)  # ceil(p * alpha)
    hi = -((-hi_f.numerator * p) // hi_f.denominator) - 1  # ceil(p * beta) - 1
    return lo, hi


def progression_count(interval: tuple[Fraction, Fraction], p: int, a: int, b: int) -> int:
    """Exact count of m in [0, p-1] with m in p*I and m = b (mod a).

    Always within 2 of p*|I|/a.
    """
    if a <= 0:
        raise ValidationError(f"progression_count: modulus a must be positive, got {a}")
    if not (0 <= b < a):
        raise ValidationError(f"progression_count: need 0 <= b < a, got b={b}, a={a}")
    lo, hi = lattice_range(interval, p)
    lo = max(lo, 0)
    hi = min(hi, p - 1)
    if lo > hi:
        return 0
    return (hi - b) // a - ((lo - b - 1) // a)

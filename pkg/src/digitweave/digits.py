"""Exact base-b fractional digit arithmetic.

Every value handled here is a finite, canonical base-b expansion of a real
in [0, 1): a base, a digit tuple d_1..d_n (position i weighs base**-i), and
an ``exact`` flag that is true iff the represented real equals the digit sum
with a zero tail.  All operations are pure; instances are immutable and safe
to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

# frac_error refuses to measure when fewer than this many digits remain
# after the shift position; certificates carry the residual uncertainty.
GUARD_DIGITS = 8


def _check_base(base: int) -> None:
    if not isinstance(base, int) or base < 2:
        raise ValueError(f"base must be an integer >= 2, got {base!r}")


@dataclass(frozen=True)
class DigitExpansion:
    """Canonical finite base-b fractional expansion of a number in [0, 1)."""

    base: int
    digits: tuple[int, ...]
    exact: bool = False

    def __post_init__(self) -> None:
        _check_base(self.base)
        if len(self.digits) < 1:
            raise ValueError("expansion needs at least one digit position")
        for d in self.digits:
            if not 0 <= d < self.base:
                raise ValueError(f"digit {d} out of range for base {self.base}")

    @property
    def depth(self) -> int:
        return len(self.digits)

    @cached_property
    def numerator(self) -> int:
        """Integer N with value == N / base**depth."""
        n = 0
        for d in self.digits:
            n = n * self.base + d
        return n

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.base**self.depth)

    def is_zero(self) -> bool:
        return self.numerator == 0

    def pad(self, depth: int) -> "DigitExpansion":
        """Extend with zero digits to the requested depth (no-op if already there)."""
        if depth < self.depth:
            raise ValueError(f"cannot pad to smaller depth {depth} < {self.depth}")
        if depth == self.depth:
            return self
        return DigitExpansion(self.base, self.digits + (0,) * (depth - self.depth), self.exact)

    def to_text(self) -> str:
        """Serialize as ``b=<base>;exact=<0|1>;d=<digits>`` (comma-separated for base > 10)."""
        if self.base > 10:
            body = ",".join(str(d) for d in self.digits)
        else:
            body = "".join(str(d) for d in self.digits)
        return f"b={self.base};exact={1 if self.exact else 0};d={body}"

    @staticmethod
    def from_text(text: str) -> "DigitExpansion":
        fields = dict(part.split("=", 1) for part in text.strip().split(";"))
        base = int(fields["b"])
        exact = fields["exact"] == "1"
        body = fields["d"]
        if base > 10:
            digits = tuple(int(tok) for tok in body.split(",")) if body else ()
        else:
            digits = tuple(int(ch) for ch in body)
        return DigitExpansion(base, digits, exact)


class FracError(NamedTuple):
    """Result of one ``|b**h * x - p - theta|`` minimization."""

    p: int
    err: Fraction
    uncertainty: Fraction


def zeros(base: int, depth: int) -> DigitExpansion:
    """The exact zero expansion at the given depth."""
    _check_base(base)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return DigitExpansion(base, (0,) * depth, exact=True)


def from_digits(base: int, digits: Iterable[int], exact: bool = False) -> DigitExpansion:
    return DigitExpansion(base, tuple(digits), exact)


def from_numerator(numerator: int, base: int, depth: int, exact: bool = False) -> DigitExpansion:
    """Digits of numerator / base**depth, which must lie in [0, 1)."""
    _check_base(base)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not 0 <= numerator < base**depth:
        raise ValueError("numerator out of range for [0, 1) at this depth")
    digits = [0] * depth
    n = numerator
    for i in range(depth - 1, -1, -1):
        n, digits[i] = divmod(n, base)
    return DigitExpansion(base, tuple(digits), exact)


def from_rational(p: int, q: int, base: int, depth: int) -> DigitExpansion:
    """Truncated base-b expansion of p/q in [0, 1).

    Truncation rounds down, so the result is canonical: a terminating value
    is rendered with its terminating digits, never with a (b-1)-tail.  The
    ``exact`` flag is set iff the expansion terminates within ``depth``.
    """
    if q == 0:
        raise ValueError("q must be positive, got 0")
    if q < 0:
        raise ValueError(f"q must be positive, got {q}")
    if not 0 <= p < q:
        raise ValueError(f"need 0 <= p < q, got p={p}, q={q}")
    _check_base(base)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    scaled = p * base**depth
    n, rem = divmod(scaled, q)
    return from_numerator(n, base, depth, exact=(rem == 0))


def from_fraction(x: Fraction, base: int, depth: int) -> DigitExpansion:
    return from_rational(x.numerator, x.denominator, base, depth)


def splice(
    x: DigitExpansion,
    positions: Iterable[int],
    replacement: Mapping[int, int] | Iterable[int],
) -> DigitExpansion:
    """Override the digits of ``x`` at the given 1-based positions.

    ``replacement`` is either a mapping position -> digit, or a sequence of
    digits matching the sorted order of ``positions``.  Digits elsewhere are
    untouched; depth is unchanged.
    """
    pos = sorted(set(positions))
    if isinstance(replacement, Mapping):
        repl = {int(k): int(v) for k, v in replacement.items()}
        if set(repl) != set(pos):
            raise ValueError("replacement keys must equal the position set")
    else:
        seq = list(replacement)
        if len(seq) != len(pos):
            raise ValueError(f"{len(pos)} positions but {len(seq)} replacement digits")
        repl = dict(zip(pos, seq))
    if pos and (pos[0] < 1 or pos[-1] > x.depth):
        raise ValueError(f"positions must lie in [1, {x.depth}]")
    for d in repl.values():
        if not 0 <= d < x.base:
            raise ValueError(f"replacement digit {d} out of range for base {x.base}")
    new = list(x.digits)
    for i, d in repl.items():
        new[i - 1] = d
    return DigitExpansion(x.base, tuple(new), x.exact)


def add(x: DigitExpansion, y: DigitExpansion) -> tuple[int, DigitExpansion]:
    """Schoolbook addition; returns (carry, sum) with carry in {0, 1}.

    The shorter operand is zero-padded.  carry + value(sum) equals
    value(x) + value(y) exactly; the semantic ``exact`` flag survives only
    when both inputs are exact.
    """
    if x.base != y.base:
        raise ValueError(f"base mismatch: {x.base} vs {y.base}")
    depth = max(x.depth, y.depth)
    x, y = x.pad(depth), y.pad(depth)
    total = x.numerator + y.numerator
    carry, rem = divmod(total, x.base**depth)
    return carry, from_numerator(rem, x.base, depth, exact=x.exact and y.exact)


def frac_error(
    x: DigitExpansion,
    h: int,
    theta: DigitExpansion | None = None,
    guard: int = GUARD_DIGITS,
) -> FracError:
    """Minimize ``|b**h * x - p - theta|`` over integers p, exactly.

    Works on the represented prefixes: the result is exact for the truncated
    operands, and ``uncertainty`` bounds the contribution of the unrepresented
    tails (base**-(depth-h) for x, plus theta's own tail when inexact).
    Refuses when fewer than ``guard`` digits remain after position h.
    """
    if h < 0:
        raise ValueError(f"shift h must be >= 0, got {h}")
    remaining = x.depth - h
    if remaining < max(guard, 1):
        raise ValueError(
            f"insufficient depth: only {remaining} digits remain after position {h} "
            f"(need >= {max(guard, 1)})"
        )
    b = x.base
    if theta is None:
        theta = zeros(b, 1)
    if theta.base != b:
        raise ValueError(f"base mismatch: {b} vs {theta.base}")

    # common denominator b**L for frac(b**h x) and theta
    L = max(remaining, theta.depth)
    a = (x.numerator % b**remaining) * b ** (L - remaining)
    t = theta.numerator * b ** (L - theta.depth)
    scale = b**L
    delta = a - t
    r = delta % scale
    err = Fraction(min(r, scale - r), scale)
    # nearest integer to delta/scale, ties resolved downward
    offset = (2 * delta + scale - 1) // (2 * scale)
    p = x.numerator // b**remaining + offset

    unc = Fraction(1, b**remaining)
    if not theta.exact:
        unc += Fraction(1, b**theta.depth)
    return FracError(p=p, err=err, uncertainty=unc)

"""Interval ladders: the digit-position partitions that drive every construction.

A ladder splits positions 1..h_last into consecutive blocks I_0=[1, M],
I_j=[g_j, h_j] with g_{j+1} = h_j + 1 and h_j = floor(nu_j * g_j), nu_j > 1.
Each block is assigned a *follower*: the output vector (x0 or x1) whose
digits are prescribed on that block (zeros, or a target's leading digits),
while the other vector absorbs the difference.  Three schedules are
supported:

* ``alternating``   -- x1 follows on even blocks, x0 on odd blocks;
* ``mod_k_plus_1``  -- period k+1: block 0 mod (k+1) belongs to x0 (zeros),
                       block s mod (k+1) has x1 follow target s, 1 <= s <= k;
* ``liouville``     -- x0 follows on even blocks, x1 on odd ones, with the
                       target chosen by an enumeration phi that visits every
                       target index infinitely often on both parities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

RatioLike = Fraction | int | str

ALTERNATING = "alternating"
MOD_K_PLUS_1 = "mod_k_plus_1"
LIOUVILLE = "liouville"

_KINDS = (ALTERNATING, MOD_K_PLUS_1, LIOUVILLE)


def as_ratio(nu: RatioLike) -> Fraction:
    """Coerce a ratio to an exact Fraction; floats are rejected to keep the
    ladder arithmetic exact."""
    if isinstance(nu, float):
        raise TypeError("ladder ratios must be exact (int, Fraction, or 'p/q' string)")
    return Fraction(nu)


def default_phi(j: int, k: int) -> int:
    """Target index for liouville block j >= 1 among k targets.

    Enumerates 1, 1,2, 1,2,3, 1,2,3,4, ... and folds values above k back
    into 1..k, so every index keeps hitting both parities.
    """
    if j < 1:
        raise ValueError("phi is defined for block index j >= 1")
    # invert the triangular numbering: j = n(n-1)/2 + s with 1 <= s <= n
    n = 1
    total = 0
    while total + n < j:
        total += n
        n += 1
    s = j - total
    return (s - 1) % k + 1


def default_liouville_ramp(k: int) -> Callable[[int], Fraction]:
    """Default per-block ratios for liouville ladders.

    A short gentle warmup (the blocks before the enumeration first covers
    all k targets), then ratios 7, 8, 9, ... growing without bound so the
    block-length-to-position quotient h_j/g_j keeps increasing.
    """
    warmup = k * (k - 1) // 2

    def nu(j: int) -> Fraction:
        if j <= warmup:
            return Fraction(6, 5)
        return Fraction(7 + (j - warmup - 1))

    return nu


@dataclass(frozen=True)
class Schedule:
    """Block-role assignment: which vector follows which target on block j."""

    kind: str
    k: int = 0  # number of distinct targets (0 for homogeneous)
    swap: bool = False  # swap x0/x1 follower roles (alternating only)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == MOD_K_PLUS_1 and self.k < 1:
            raise ValueError("mod_k_plus_1 needs k >= 1 targets")
        if self.kind == LIOUVILLE and self.k < 1:
            raise ValueError("liouville needs at least one target")
        if self.swap and self.kind != ALTERNATING:
            raise ValueError("role swap is defined for the alternating schedule only")

    def role(self, j: int) -> tuple[int, int]:
        """Return (follower, target_index) for block j; target 0 means zeros."""
        if self.kind == ALTERNATING:
            follower = 1 if j % 2 == 0 else 0
            if self.swap:
                follower = 1 - follower
            target = min(self.k, 1) if follower == 1 else 0
            return follower, target
        if self.kind == MOD_K_PLUS_1:
            s = j % (self.k + 1)
            return (0, 0) if s == 0 else (1, s)
        # liouville: block 0 is a plain zero block for x0
        if j == 0:
            return 0, 0
        return (0 if j % 2 == 0 else 1), default_phi(j, self.k)

    @property
    def period(self) -> int | None:
        if self.kind == ALTERNATING:
            return 2
        if self.kind == MOD_K_PLUS_1:
            return self.k + 1
        return None


@dataclass(frozen=True)
class Interval:
    j: int
    g: int
    h: int
    follower: int  # 0 or 1: which vector's digits are prescribed here
    target: int  # 0 = zeros, s >= 1 = s-th target
    nu: Fraction | None  # ratio used to place h (None for the initial block)

    @property
    def length(self) -> int:
        return self.h - self.g + 1

    def role_label(self) -> str:
        side = f"x{self.follower}"
        return f"{side}/zero" if self.target == 0 else f"{side}/theta{self.target}"


@dataclass(frozen=True)
class IntervalLadder:
    M: int
    schedule: Schedule
    nu0: Fraction
    nu1: Fraction
    depth_budget: int
    intervals: tuple[Interval, ...]

    @property
    def h_last(self) -> int:
        return self.intervals[-1].h

    @property
    def g_last(self) -> int:
        return self.intervals[-1].g

    @property
    def Lambda(self) -> Fraction | None:
        """Ratio product over one schedule period (None for liouville)."""
        if self.schedule.kind == ALTERNATING:
            return self.nu0 * self.nu1
        if self.schedule.kind == MOD_K_PLUS_1:
            return self.nu0 * self.nu1**self.schedule.k
        return None

    def interval_of(self, position: int) -> Interval:
        """The block containing a 1-based digit position <= h_last."""
        if not 1 <= position <= self.h_last:
            raise ValueError(f"position {position} outside [1, {self.h_last}]")
        lo, hi = 0, len(self.intervals) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.intervals[mid].h < position:
                lo = mid + 1
            else:
                hi = mid
        return self.intervals[lo]

    def to_json_rows(self) -> list[dict]:
        return [
            {"j": iv.j, "g": iv.g, "h": iv.h, "role": iv.role_label()}
            for iv in self.intervals
        ]


def build_ladder(
    M: int,
    schedule: Schedule,
    nu0: RatioLike,
    nu1: RatioLike,
    depth_budget: int,
    nu_seq: Callable[[int], Fraction] | Sequence[RatioLike] | None = None,
) -> IntervalLadder:
    """Generate blocks until the first h_j >= depth_budget (included).

    ``nu0`` applies to x0-follower blocks and ``nu1`` to x1-follower blocks.
    For liouville schedules the per-block ratio comes from ``nu_seq`` instead
    (a callable j -> ratio or a sequence, extended by its last element);
    nu0/nu1 are ignored there beyond validation.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if depth_budget <= M:
        raise ValueError(f"depth budget {depth_budget} must exceed M={M}")
    r0, r1 = as_ratio(nu0), as_ratio(nu1)
    for r in (r0, r1):
        if r <= 1:
            raise ValueError(f"ladder ratios must exceed 1, got {r}")

    ramp: Callable[[int], Fraction] | None = None
    if schedule.kind == LIOUVILLE:
        if nu_seq is None:
            ramp = default_liouville_ramp(schedule.k)
        elif callable(nu_seq):
            ramp = nu_seq
        else:
            seq = [as_ratio(v) for v in nu_seq]
            if not seq:
                raise ValueError("empty nu_seq")
            ramp = lambda j, _s=tuple(seq): _s[min(j, len(_s)) - 1]

    def ratio_for(j: int, follower: int) -> Fraction:
        if ramp is not None:
            r = as_ratio(ramp(j))
        else:
            r = r1 if follower == 1 else r0
        if r <= 1:
            raise ValueError(f"ladder ratio at block {j} must exceed 1, got {r}")
        return r

    f0, t0 = schedule.role(0)
    intervals = [Interval(j=0, g=1, h=M, follower=f0, target=t0, nu=None)]
    j = 0
    while intervals[-1].h < depth_budget:
        j += 1
        g = intervals[-1].h + 1
        follower, target = schedule.role(j)
        nu = ratio_for(j, follower)
        h = (nu.numerator * g) // nu.denominator
        intervals.append(Interval(j=j, g=g, h=h, follower=follower, target=target, nu=nu))
    return IntervalLadder(
        M=M,
        schedule=schedule,
        nu0=r0,
        nu1=r1,
        depth_budget=depth_budget,
        intervals=tuple(intervals),
    )

"""Missing-digit sets, their natural sampling measure, dimensions, and
finite-resolution sumset cover checks.

A spec (base b, alphabets W_1..W_m) describes the product of the m
missing-digit sets {sum a_i b**-i : a_i in W}.  The cover check decides, at
resolution b**-depth, whether every base-b interval of the target range
contains a coordinatewise sum or difference of two set points; it works on
the reachable set of digit-prefix integers, with the independent pairwise
enumeration kept in the test-suite as its oracle.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .digits import DigitExpansion, from_digits

Vector = tuple[DigitExpansion, ...]

COVER_DEPTH_CAP = 16  # reachable-set size grows like b**depth


@dataclass(frozen=True)
class MissingDigitSpec:
    base: int
    alphabets: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if not self.alphabets:
            raise ValueError("need at least one alphabet")
        for w in self.alphabets:
            if len(set(w)) != len(w) or list(w) != sorted(w):
                raise ValueError("alphabets must be sorted and duplicate-free")
            if len(w) < 2:
                raise ValueError("alphabets need at least 2 digits")
            if any(not 0 <= d < self.base for d in w):
                raise ValueError("alphabet digit out of range")

    @property
    def m(self) -> int:
        return len(self.alphabets)

    def to_text(self) -> str:
        parts = [f"b={self.base}"]
        for i, w in enumerate(self.alphabets, start=1):
            if self.base > 10:
                parts.append(f"W{i}=" + ",".join(str(d) for d in w))
            else:
                parts.append(f"W{i}=" + "".join(str(d) for d in w))
        return ";".join(parts)

    @staticmethod
    def from_text(text: str) -> "MissingDigitSpec":
        fields = dict(part.split("=", 1) for part in text.strip().split(";"))
        base = int(fields["b"])
        alphabets = []
        i = 1
        while f"W{i}" in fields:
            body = fields[f"W{i}"]
            if base > 10:
                alphabets.append(tuple(int(tok) for tok in body.split(",")))
            else:
                alphabets.append(tuple(int(ch) for ch in body))
            i += 1
        return MissingDigitSpec(base, tuple(alphabets))


def make_spec(base: int, alphabets) -> MissingDigitSpec:
    return MissingDigitSpec(base, tuple(tuple(sorted(set(w))) for w in alphabets))


def membership(x: Vector | DigitExpansion, spec: MissingDigitSpec) -> bool:
    """True iff every represented digit of coordinate i lies in W_i."""
    coords = (x,) if isinstance(x, DigitExpansion) else tuple(x)
    if len(coords) != spec.m:
        raise ValueError(f"expected {spec.m} coordinates, got {len(coords)}")
    for coord, w in zip(coords, spec.alphabets):
        if coord.base != spec.base:
            raise ValueError("base mismatch")
        allowed = set(w)
        if any(d not in allowed for d in coord.digits):
            return False
    return True


def sample(spec: MissingDigitSpec, depth: int, seed: int) -> Vector:
    """Draw a point of the product set with iid uniform digits on each W_i.

    Deterministic per seed; this realizes the natural product measure.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = random.Random(seed)
    out = []
    for w in spec.alphabets:
        out.append(from_digits(spec.base, (rng.choice(w) for _ in range(depth))))
    return tuple(out)


def dims(spec: MissingDigitSpec) -> tuple[tuple[float, ...], float]:
    """Per-coordinate dimensions log|W_i|/log b and their sum."""
    d = tuple(math.log(len(w)) / math.log(spec.base) for w in spec.alphabets)
    return d, sum(d)


def normalize_shift(spec: MissingDigitSpec) -> tuple[MissingDigitSpec, tuple[Fraction, ...]]:
    """Shift each alphabet so 0 becomes a member: W -> W - min W.

    Returns the shifted spec and the per-coordinate rational shifts
    min W_i / (b - 1) that map points of the original set onto the new one.
    """
    alphabets = []
    shifts = []
    for w in spec.alphabets:
        lo = min(w)
        alphabets.append(tuple(d - lo for d in w))
        shifts.append(Fraction(lo, spec.base - 1))
    return MissingDigitSpec(spec.base, tuple(alphabets)), tuple(shifts)


@dataclass(frozen=True)
class CoverReport:
    spec_text: str
    op: str
    depth: int
    covered: bool
    target_lo: Fraction
    target_hi: Fraction
    gap_count: int
    gaps: tuple[tuple[Fraction, Fraction], ...]  # first uncovered intervals

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(
            {
                "spec": self.spec_text,
                "op": self.op,
                "depth": self.depth,
                "covered": self.covered,
                "target": [str(self.target_lo), str(self.target_hi)],
                "gap_count": self.gap_count,
                "gaps": [[str(a), str(b)] for a, b in self.gaps[:32]],
            },
            sort_keys=True,
            indent=indent,
        )


def _pair_digit_sums(w: tuple[int, ...], op: str) -> list[int]:
    if op == "plus":
        vals = {a + b for a in w for b in w}
    elif op == "minus":
        vals = {a - b for a in w for b in w}
    else:
        raise ValueError(f"op must be 'plus' or 'minus', got {op!r}")
    return sorted(vals)


def sumset_cover_check(
    spec: MissingDigitSpec, op: str, depth: int, depth_cap: int = COVER_DEPTH_CAP
) -> CoverReport:
    """Decide whether C op C covers its target interval at b-adic resolution.

    One-dimensional specs only.  Every candidate sum z = sum t_i b**-i with
    per-position digit sums t_i in W op W is tracked through its depth-digit
    prefix integer; an interval [k b**-d, (k+1) b**-d] is covered iff some
    reachable prefix N satisfies k - tmax <= N <= k + 1 - tmin, where
    [tmin, tmax] is the exact range of the tails.  Uncovered intervals are
    returned as witnesses.
    """
    if spec.m != 1:
        raise ValueError("cover check is defined for one-dimensional specs")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > depth_cap:
        raise ValueError(f"depth {depth} over cap {depth_cap}")
    b = spec.base
    sums = _pair_digit_sums(spec.alphabets[0], op)
    offset = -min(sums)  # shift so per-position values start at 0
    d_shift = [s + offset for s in sums]

    max_prefix = d_shift[-1] * (b**depth - 1) // (b - 1)
    reachable = np.zeros(max_prefix + 1, dtype=bool)
    reachable[0] = True
    for _ in range(depth):
        idx = np.flatnonzero(reachable)
        nxt = np.zeros_like(reachable)
        for t in d_shift:
            nxt[idx * b + t] = True
        reachable = nxt

    # shifted tails lie in [0, tmax]; shifted target is [0, tmax], and the
    # checked intervals [k, k+1]*b**-depth are those fully inside it
    tmax = Fraction(d_shift[-1], b - 1)
    scale = b**depth
    k_hi = (tmax.numerator * scale) // tmax.denominator
    cum = np.concatenate(([0], np.cumsum(reachable, dtype=np.int64)))

    # interval k is covered iff some reachable N satisfies
    # k - tmax <= N <= k + 1 (the shifted tail range is [0, tmax])
    ks = np.arange(k_hi, dtype=np.int64)
    tn, td = tmax.numerator, tmax.denominator
    lo_n = np.clip(-((tn - ks * td) // td), 0, None)
    hi_n = np.minimum(ks + 1, max_prefix)
    ok = (hi_n >= lo_n) & (cum[hi_n + 1] - cum[lo_n] > 0)
    gap_ks = ks[~ok]

    back_shift = Fraction(offset, b - 1)
    gaps = tuple(
        (Fraction(int(k), scale) - back_shift, Fraction(int(k) + 1, scale) - back_shift)
        for k in gap_ks[:256]
    )
    return CoverReport(
        spec_text=spec.to_text(),
        op=op,
        depth=depth,
        covered=len(gap_ks) == 0,
        target_lo=Fraction(min(sums), b - 1),
        target_hi=Fraction(max(sums), b - 1),
        gap_count=int(len(gap_ks)),
        gaps=gaps,
    )

"""Empirical Diophantine exponent measurement.

Everything here brute-forces the system ``1 <= q <= Q,
max_l |q*x_l - p_l - theta_l| <= err`` exactly over the represented digit
prefixes: no floating point enters an error value, only the final exponent
quotients -log(err)/log(Q).  Two admissible q sets are supported: ``all_q``
(every integer up to Q, capped) and ``b_ary`` (powers of the digit base).

Conventions for finite-scale estimates:

* the *uniform* estimate is the minimum of -log err(Q) / log Q over the tail
  (last third) of the evaluation ladder, err(Q) being the best error over
  admissible q <= Q;
* the *ordinary* estimate is the maximum of -log err(q) / log q over every
  measured q >= 2;
* measured errors are floored at the truncation uncertainty of the operands,
  so unknown digit tails can only make estimates more conservative.  An
  exact zero error on exact operands raises the RATIONAL flag instead.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .construct import SplitResult, make_plan, split
from .digits import GUARD_DIGITS, DigitExpansion, add, from_digits, zeros
from .ladder import IntervalLadder

Vector = tuple[DigitExpansion, ...]

DEFAULT_SCAN_CAP = 10**7
ALL_Q = "all_q"
B_ARY = "b_ary"


def _scan_cap(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    return int(os.environ.get("SCAN_CAP", DEFAULT_SCAN_CAP))


def _common_depth(x: Vector) -> int:
    depth = x[0].depth
    if any(c.depth != depth for c in x):
        raise ValueError("all coordinates must share one depth")
    return depth


def _align_theta(x: Vector, theta: Vector | None) -> Vector:
    """Validate theta against x; a missing theta means exact zeros.

    Coordinates may be shorter than x (their truncation uncertainty is
    accounted for separately) but never deeper.
    """
    base, depth = x[0].base, _common_depth(x)
    if theta is None:
        return tuple(zeros(base, 1) for _ in x)
    if len(theta) != len(x):
        raise ValueError(f"dimension mismatch: x has {len(x)}, theta has {len(theta)}")
    for t in theta:
        if t.base != base:
            raise ValueError("theta base mismatch")
        if t.depth > depth:
            raise ValueError("theta must not be deeper than x")
    return tuple(theta)


def _scaled_theta_nums(theta: Vector, base: int, depth: int) -> list[int]:
    return [t.numerator * base ** (depth - t.depth) for t in theta]


def _theta_unc_num(theta: Vector, base: int, depth: int) -> int:
    """Scaled truncation uncertainty of theta (0 when every coordinate is exact)."""
    worst = 0
    for t in theta:
        if not t.exact:
            worst = max(worst, base ** (depth - t.depth))
    return worst


@dataclass(frozen=True)
class ApproxRecord:
    """Best approximation at one threshold Q."""

    Q: int
    q_best: int
    p_best: tuple[int, ...]
    err: Fraction
    c_of_Q: float | None = None  # err * Q**w_ref for the caller's reference exponent

    def to_dict(self) -> dict:
        return {
            "Q": str(self.Q),
            "q_best": str(self.q_best),
            "p_best": [str(p) for p in self.p_best],
            "err": str(self.err),
            "log10_err": math.log10(self.err) if self.err > 0 else None,
            "c_of_Q": self.c_of_Q,
        }


def _max_norm_err_at_q(
    q: int, nums: Sequence[int], thetas: Sequence[int], scale: int
) -> int:
    """max over coordinates of dist(q*x_l - theta_l, Z), scaled by ``scale``."""
    worst = 0
    for x_num, t_num in zip(nums, thetas):
        r = (q * x_num - t_num) % scale
        d = min(r, scale - r)
        if d > worst:
            worst = d
    return worst


def _nearest_p(q: int, x_num: int, t_num: int, scale: int) -> int:
    """Nearest integer to q*x - theta (ties resolved downward)."""
    delta = q * x_num - t_num
    return (2 * delta + scale - 1) // (2 * scale)


def best_approx(
    x: Sequence[DigitExpansion],
    theta: Sequence[DigitExpansion] | None,
    Q: int,
    mode: str = ALL_Q,
    w_ref: float | None = None,
    scan_cap: int | None = None,
) -> ApproxRecord:
    """Exact minimization of the max-norm error over the admissible q <= Q.

    Ties are broken by the smallest q.  ``all_q`` scans every integer (guard:
    Q must not exceed the scan cap, overridable via the SCAN_CAP environment
    variable); ``b_ary`` scans powers of the base including b**0 = 1.
    """
    x = tuple(x)
    theta_v = _align_theta(x, tuple(theta) if theta is not None else None)
    if Q < 1:
        raise ValueError("Q must be >= 1")
    base, depth = x[0].base, _common_depth(x)
    scale = base**depth
    nums = [c.numerator for c in x]
    tnums = _scaled_theta_nums(theta_v, base, depth)

    if mode == ALL_Q:
        cap = _scan_cap(scan_cap)
        if Q > cap:
            raise ValueError(f"Q={Q} exceeds the all_q scan cap {cap}")
        q_range: Sequence[int] = range(1, Q + 1)
    elif mode == B_ARY:
        q_range = []
        q = 1
        while q <= Q:
            q_range.append(q)
            q *= base
    else:
        raise ValueError(f"unknown mode {mode!r}")

    best_q, best_err = None, None
    for q in q_range:
        e = _max_norm_err_at_q(q, nums, tnums, scale)
        if best_err is None or e < best_err:
            best_q, best_err = q, e
    assert best_q is not None and best_err is not None
    p_best = tuple(
        _nearest_p(best_q, n, t, scale) for n, t in zip(nums, tnums)
    )
    err = Fraction(best_err, scale)
    c = float(err) * Q**w_ref if w_ref is not None and err > 0 else (0.0 if w_ref is not None else None)
    return ApproxRecord(Q=Q, q_best=best_q, p_best=p_best, err=err, c_of_Q=c)


@dataclass(frozen=True)
class ExponentEstimate:
    m: int
    base: int
    depth: int
    mode: str
    w_ref: float | None
    records: tuple[ApproxRecord, ...]
    uniform_lower: float
    ordinary_lower: float
    rational: bool
    c_nonincreasing: bool | None
    truncation_uncertainty: float  # upper bound on every unrepresented tail

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "base": self.base,
            "depth": self.depth,
            "mode": self.mode,
            "w_ref": self.w_ref,
            "uniform_lower": self.uniform_lower,
            "ordinary_lower": self.ordinary_lower,
            "rational": self.rational,
            "c_nonincreasing": self.c_nonincreasing,
            "truncation_uncertainty_log10": (
                math.log10(self.truncation_uncertainty)
                if self.truncation_uncertainty > 0
                else None
            ),
            "records": [r.to_dict() for r in self.records[-12:]],
        }


def _bary_sweep(x: Vector, theta: Vector, n_max: int) -> tuple[list[int], list[int], int]:
    """Per-shift errors err_N for q = b**N, all over the common scale b**depth.

    Returns (err_nums, unc_nums, scale): the exact scaled max-norm error and
    the scaled truncation uncertainty for each N in 0..n_max.
    """
    base, depth = x[0].base, _common_depth(x)
    scale = base**depth
    x_inexact = any(not c.exact for c in x)
    th_unc = _theta_unc_num(theta, base, depth)
    err_nums = [0] * (n_max + 1)
    pw = [1] * (n_max + 1)
    for n in range(1, n_max + 1):
        pw[n] = pw[n - 1] * base
    unc_nums = [(pw[n] if x_inexact else 0) + th_unc for n in range(n_max + 1)]
    tnums = _scaled_theta_nums(theta, base, depth)
    for x_c, t_num in zip(x, tnums):
        x_num = x_c.numerator
        for n in range(n_max + 1):
            mod = scale // pw[n]
            r = ((x_num % mod) * pw[n] - t_num) % scale
            d = min(r, scale - r)
            if d > err_nums[n]:
                err_nums[n] = d
    return err_nums, unc_nums, scale


def exponent_ladder(
    x: Sequence[DigitExpansion],
    theta: Sequence[DigitExpansion] | None = None,
    q_ladder: Sequence[int] | None = None,
    mode: str = B_ARY,
    w_ref: float | None = None,
    tail_fraction: float = 1 / 3,
    scan_cap: int | None = None,
) -> ExponentEstimate:
    """Estimate uniform and ordinary exponents along an increasing Q ladder.

    In ``b_ary`` mode the ladder entries must be powers of the base; the
    default ladder is dense (every power up to the depth guard).  In
    ``all_q`` mode the default ladder doubles from 2 up to the cap.
    """
    x = tuple(x)
    theta_v = _align_theta(x, tuple(theta) if theta is not None else None)
    base, depth = x[0].base, _common_depth(x)
    m = len(x)

    if mode == B_ARY:
        n_max = depth - GUARD_DIGITS
        if n_max < 1:
            raise ValueError("depth too small for any b-ary measurement")
        err_nums, unc_nums, scale = _bary_sweep(x, theta_v, n_max)
        if q_ladder is None:
            ladder_ns = list(range(1, n_max + 1))
        else:
            ladder_ns = []
            for Q in q_ladder:
                n = round(math.log(Q, base))
                if base**n != Q:
                    raise ValueError(f"b_ary ladder entry {Q} is not a power of {base}")
                if n > n_max:
                    raise ValueError(f"ladder entry b**{n} exceeds measurable depth")
                ladder_ns.append(n)
            if ladder_ns != sorted(ladder_ns):
                raise ValueError("Q ladder must be increasing")

        eff = [max(e, u) for e, u in zip(err_nums, unc_nums)]
        rational = any(
            e == 0 and u == 0 for e, u in zip(err_nums, unc_nums)
        )
        # ordinary: per-q quotients, q = b**n for n >= 1
        ordinary = -math.inf
        for n in range(1, n_max + 1):
            if eff[n] == 0:
                ordinary = math.inf
                break
            ratio = (depth * math.log(base) - math.log(eff[n])) / (n * math.log(base))
            ordinary = max(ordinary, ratio)
        # uniform: prefix minima evaluated on the ladder tail
        prefix_min = [0] * (n_max + 1)
        cur = eff[0]
        for n in range(n_max + 1):
            if eff[n] < cur:
                cur = eff[n]
            prefix_min[n] = cur
        tail_start = int(len(ladder_ns) * (1 - tail_fraction))
        tail = ladder_ns[tail_start:] or ladder_ns[-1:]
        uniform = math.inf
        for n in tail:
            if prefix_min[n] == 0:
                continue
            ratio = (depth * math.log(base) - math.log(prefix_min[n])) / (
                n * math.log(base)
            )
            uniform = min(uniform, ratio)

        records = _bary_records(
            x, theta_v, ladder_ns, err_nums, prefix_min, scale, base, w_ref
        )
        c_flag = _c_nonincreasing(records, tail_start) if w_ref is not None else None
        return ExponentEstimate(
            m=m,
            base=base,
            depth=depth,
            mode=mode,
            w_ref=w_ref,
            records=tuple(records),
            uniform_lower=uniform,
            ordinary_lower=ordinary,
            rational=rational,
            c_nonincreasing=c_flag,
            truncation_uncertainty=base ** -(depth - n_max),
        )

    if mode != ALL_Q:
        raise ValueError(f"unknown mode {mode!r}")

    cap = _scan_cap(scan_cap)
    if q_ladder is None:
        q_ladder = []
        Q = 2
        while Q <= min(cap, 2**14):
            q_ladder.append(Q)
            Q *= 2
    q_ladder = list(q_ladder)
    if q_ladder != sorted(q_ladder):
        raise ValueError("Q ladder must be increasing")
    q_max = q_ladder[-1]
    if q_max > cap:
        raise ValueError(f"ladder maximum {q_max} exceeds the all_q scan cap {cap}")

    scale = base**depth
    nums = [c.numerator for c in x]
    tnums = _scaled_theta_nums(theta_v, base, depth)
    x_inexact = any(not c.exact for c in x)
    th_unc = _theta_unc_num(theta_v, base, depth)
    records: list[ApproxRecord] = []
    ordinary = -math.inf
    rational = False
    best_q, best_err = None, None
    ladder_iter = iter(q_ladder)
    next_q = next(ladder_iter)
    for q in range(1, q_max + 1):
        e = _max_norm_err_at_q(q, nums, tnums, scale)
        unc = (q if x_inexact else 0) + th_unc
        eff = max(e, unc)
        if q >= 2:
            if eff == 0:
                ordinary = math.inf
                rational = True
            else:
                ordinary = max(
                    ordinary,
                    (depth * math.log(base) - math.log(eff)) / math.log(q),
                )
        if best_err is None or eff < best_err:
            best_q, best_err = q, eff
        while q == next_q:
            assert best_q is not None and best_err is not None
            err = Fraction(best_err, scale)
            c = float(err) * q**w_ref if w_ref is not None else None
            records.append(
                ApproxRecord(
                    Q=q,
                    q_best=best_q,
                    p_best=tuple(
                        _nearest_p(best_q, n_, t_, scale)
                        for n_, t_ in zip(nums, tnums)
                    ),
                    err=err,
                    c_of_Q=c,
                )
            )
            try:
                next_q = next(ladder_iter)
            except StopIteration:
                next_q = -1
    tail_start = int(len(records) * (1 - tail_fraction))
    uniform = math.inf
    for rec in records[tail_start:] or records[-1:]:
        if rec.err == 0:
            rational = True
            continue
        uniform = min(uniform, -math.log(rec.err) / math.log(rec.Q))
    c_flag = _c_nonincreasing(records, tail_start) if w_ref is not None else None
    return ExponentEstimate(
        m=m,
        base=base,
        depth=depth,
        mode=mode,
        w_ref=w_ref,
        records=tuple(records),
        uniform_lower=uniform,
        ordinary_lower=ordinary,
        rational=rational,
        c_nonincreasing=c_flag,
        truncation_uncertainty=float(q_max) * base**-depth,
    )


def _bary_records(
    x: Vector,
    theta: Vector,
    ladder_ns: list[int],
    err_nums: list[int],
    prefix_min: list[int],
    scale: int,
    base: int,
    w_ref: float | None,
) -> list[ApproxRecord]:
    depth = x[0].depth
    nums = [c.numerator for c in x]
    tnums = _scaled_theta_nums(theta, base, depth)
    argmin: dict[int, int] = {}
    best_n, best_e = 0, err_nums[0]
    for n, e in enumerate(err_nums):
        if e < best_e:
            best_n, best_e = n, e
        argmin[n] = best_n
    p_cache: dict[int, tuple[int, ...]] = {}
    records = []
    for n in ladder_ns:
        n_star = argmin[n]
        if n_star not in p_cache:
            q = base**n_star
            p_cache[n_star] = tuple(
                _nearest_p(q, x_n, t_n, scale) for x_n, t_n in zip(nums, tnums)
            )
        err = Fraction(prefix_min[n], scale)
        c = None
        if w_ref is not None:
            # work in logs: Q = b**n can overflow a float
            if err > 0:
                log_c = math.log(float(err.numerator)) - depth * math.log(base)
                log_c += w_ref * n * math.log(base)
                c = math.exp(log_c) if abs(log_c) < 700 else math.inf * (1 if log_c > 0 else 0)
            else:
                c = 0.0
        records.append(
            ApproxRecord(
                Q=base**n,
                q_best=base**n_star,
                p_best=p_cache[n_star],
                err=err,
                c_of_Q=c,
            )
        )
    return records


def _c_nonincreasing(records: Sequence[ApproxRecord], tail_start: int) -> bool:
    tail = [r.c_of_Q for r in records[tail_start:] if r.c_of_Q is not None]
    return all(b <= a * (1 + 1e-12) for a, b in zip(tail, tail[1:]))


def checkpoint_q_ladder(ladder: IntervalLadder, base: int, depth: int) -> list[int]:
    """Q ladder ``b**h`` over the ladder checkpoints measurable at this depth."""
    ns = [iv.h for iv in ladder.intervals if iv.h <= depth - GUARD_DIGITS]
    return [base**n for n in ns]


# ---------------------------------------------------------------------------
# claimed-exponent cross-check


@dataclass(frozen=True)
class ClaimCheck:
    claim: str
    claimed: float
    measured: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.measured >= self.claimed - self.tolerance


def verify_exponent_claims(
    result: SplitResult,
    estimates: dict[int, ExponentEstimate],
    tolerance: float = 0.02,
) -> list[ClaimCheck]:
    """Compare a split's claimed exponents against measured lower bounds.

    ``estimates`` maps side (0 or 1) to that side's b-ary estimate.  The
    uniform claim is checked against the uniform side's uniform_lower, the
    ordinary claim against the other side's ordinary_lower.
    """
    claimed = result.plan.claimed
    if claimed is None:
        raise ValueError("this split kind carries no closed-form exponent claims")
    for side, est in estimates.items():
        if est.m != result.plan.m or est.base != result.plan.base:
            raise ValueError(f"estimate for side {side} does not match the split's shape")
    checks = []
    u = estimates.get(claimed.uniform_side)
    if u is not None:
        checks.append(
            ClaimCheck(
                claim=f"x{claimed.uniform_side} uniform >= {claimed.uniform_value}",
                claimed=float(claimed.uniform_value),
                measured=u.uniform_lower,
                tolerance=tolerance,
            )
        )
    o = estimates.get(claimed.ordinary_side)
    if o is not None:
        checks.append(
            ClaimCheck(
                claim=f"x{claimed.ordinary_side} ordinary >= {claimed.ordinary_value}",
                claimed=float(claimed.ordinary_value),
                measured=o.ordinary_lower,
                tolerance=tolerance,
            )
        )
    return checks


# ---------------------------------------------------------------------------
# base-3 factorial target pair


def theta_factorial(depth: int, base: int = 3) -> DigitExpansion:
    """Digit 1 at every factorial position 1!, 2!, 3!, ... up to depth."""
    if depth < 2:
        raise ValueError("depth must cover at least 2! = 2")
    digits = [0] * depth
    f, n = 1, 1
    while f <= depth:
        digits[f - 1] = 1
        n += 1
        f *= n
    return from_digits(base, digits, exact=False)


@dataclass(frozen=True)
class ReverseSample:
    label: str
    w1_hat: float
    w2_hat: float
    omega1_hat: float
    sum_ok: bool
    pp1_ok: bool
    trivial: bool


@dataclass(frozen=True)
class ReverseDemoReport:
    depth: int
    tolerance: float
    samples: tuple[ReverseSample, ...]

    @property
    def ok(self) -> bool:
        return all(s.sum_ok and s.pp1_ok for s in self.samples)

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(
            {
                "depth": self.depth,
                "tolerance": self.tolerance,
                "ok": self.ok,
                "samples": [
                    {
                        "label": s.label,
                        "w1_hat": s.w1_hat,
                        "w2_hat": s.w2_hat,
                        "omega1_hat": s.omega1_hat,
                        "sum_ok": s.sum_ok,
                        "pp1_ok": s.pp1_ok,
                        "trivial": s.trivial,
                    }
                    for s in self.samples
                ],
            },
            sort_keys=True,
            indent=indent,
        )


def reverse_demo(
    depth: int,
    samples: int = 50,
    seed: int = 0,
    tolerance: float = 0.05,
) -> ReverseDemoReport:
    """Trade-off demo for the base-3 factorial target pair.

    Builds theta1 with digit 1 at factorial positions and theta2 = 2*theta1
    by exact digit doubling, then checks two empirical inequalities on seeded
    samples plus one adversarial and one zero sample: the two uniform
    estimates must sum to at most 1 + tolerance, and the second uniform
    estimate must stay below 1/(ordinary1 + 1) + tolerance.
    """
    import random

    if depth < math.factorial(6) + GUARD_DIGITS:
        raise ValueError(f"depth {depth} is too short; need >= 6! + guard")
    theta1 = theta_factorial(depth)
    carry, theta2 = add(theta1, theta1)
    if carry:
        raise AssertionError("doubling a value below 1/2 cannot carry")

    rng = random.Random(seed)
    cases: list[tuple[str, Vector, bool]] = []
    for i in range(samples):
        digits = tuple(rng.randrange(3) for _ in range(depth))
        cases.append((f"random-{i}", (from_digits(3, digits),), False))

    # adversarial: a split output that tracks theta1 on long digit runs
    plan = make_plan(
        "inhomogeneous",
        m=1,
        base=3,
        depth_budget=depth,
        M=8,
        nu0=Fraction(6, 5),
        nu1=8,
        targets=((theta1,),),
    )
    adv_depth = min(depth, plan.ladder.h_last)
    adv_xi = (from_digits(3, tuple(rng.randrange(3) for _ in range(adv_depth))),)
    adv = split(adv_xi, plan)
    cases.append(("adversarial", adv.x1, False))
    cases.append(("zero", (zeros(3, depth),), True))

    rows = []
    for label, vec, trivial in cases:
        est1 = exponent_ladder(vec, (theta1,), mode=B_ARY)
        est2 = exponent_ladder(vec, (theta2,), mode=B_ARY)
        w1, w2 = est1.uniform_lower, est2.uniform_lower
        om1 = est1.ordinary_lower
        sum_ok = w1 + w2 <= 1 + tolerance
        pp1_ok = w2 <= 1 / (om1 + 1) + tolerance if om1 > -1 else True
        rows.append(
            ReverseSample(
                label=label,
                w1_hat=w1,
                w2_hat=w2,
                omega1_hat=om1,
                sum_ok=sum_ok,
                pp1_ok=pp1_ok,
                trivial=trivial,
            )
        )
    return ReverseDemoReport(depth=depth, tolerance=tolerance, samples=tuple(rows))

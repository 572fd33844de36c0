"""Digit-splitting constructions with per-checkpoint error certificates.

``split`` decomposes a vector xi in [0,1)^m into x0 + x1 (mod 1, carry
recorded per coordinate) along an interval ladder.  On each ladder block one
side is the *follower*: its digits there are prescribed (all zeros, or the
leading digits of a target vector); the other side absorbs the difference
through exact rational accumulation.  At every block boundary h_j this
pins the fractional part of b**h_j * x_side near its target, which is what
the emitted certificates record and what the exponent estimators measure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .digits import GUARD_DIGITS, DigitExpansion, add, frac_error, from_numerator, zeros
from .ladder import (
    ALTERNATING,
    LIOUVILLE,
    MOD_K_PLUS_1,
    IntervalLadder,
    RatioLike,
    Schedule,
    as_ratio,
    build_ladder,
)

Vector = tuple[DigitExpansion, ...]

PLAN_KINDS = ("homogeneous", "inhomogeneous", "multi", "liouville", "cantor")


@dataclass(frozen=True)
class ClaimedExponents:
    """Finite-scale exponent targets realized by a split."""

    uniform_side: int
    uniform_value: Fraction  # uniform b-ary exponent target (nu1-1)/Lambda
    ordinary_side: int
    ordinary_value: Fraction  # ordinary b-ary exponent target nu0-1


@dataclass(frozen=True)
class SplitPlan:
    kind: str
    m: int
    base: int
    ladder: IntervalLadder
    targets: tuple[Vector, ...] = ()
    alphabets: tuple[tuple[int, ...], ...] | None = None
    claimed: ClaimedExponents | None = None

    def __post_init__(self) -> None:
        if self.kind not in PLAN_KINDS:
            raise ValueError(f"unknown plan kind {self.kind!r}")
        if self.m < 1:
            raise ValueError("dimension m must be >= 1")
        for vec in self.targets:
            if len(vec) != self.m:
                raise ValueError("target dimension mismatch")
            for coord in vec:
                if coord.base != self.base:
                    raise ValueError("target base mismatch")
        if self.alphabets is not None:
            if len(self.alphabets) != self.m:
                raise ValueError("need one alphabet per coordinate")
            for w in self.alphabets:
                if len(set(w)) < 2:
                    raise ValueError("alphabets need at least 2 digits")
                if 0 not in w:
                    raise ValueError("cantor-mode alphabets must contain the digit 0")
                if any(not 0 <= d < self.base for d in w):
                    raise ValueError("alphabet digit out of base range")

    @property
    def pure_splice(self) -> bool:
        """True when all prescriptions are zeros, so no carries can occur."""
        return not self.targets

    @property
    def certificate_constant(self) -> int:
        return 1 if self.pure_splice else 2

    def params_dict(self) -> dict:
        params = {
            "kind": self.kind,
            "m": self.m,
            "base": self.base,
            "M": self.ladder.M,
            "nu0": str(self.ladder.nu0),
            "nu1": str(self.ladder.nu1),
            "k": self.ladder.schedule.k,
            "swap": self.ladder.schedule.swap,
            "depth_budget": self.ladder.depth_budget,
        }
        if self.kind == "liouville":
            params["nu_blocks"] = [str(iv.nu) for iv in self.ladder.intervals[1:]]
        return params


@dataclass(frozen=True)
class Certificate:
    """One checkpoint guarantee: at q = b**h the follower side approximates
    its target with max-norm error at most ``bound``."""

    block: int  # index j of the block whose prescription backs the checkpoint
    h: int  # checkpoint position (end of block j-1)
    side: int  # 0 or 1: which output vector the guarantee is about
    target: int  # 0 = zeros (homogeneous), s >= 1 = s-th target
    gap: int  # prescribed run length min(h_j, depth) - h
    bound: Fraction
    measured: Fraction
    uncertainty: Fraction

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound


@dataclass(frozen=True)
class SplitResult:
    plan: SplitPlan
    xi: Vector
    x0: Vector
    x1: Vector
    carries: tuple[int, ...]
    certificates: tuple[Certificate, ...]

    @property
    def depth(self) -> int:
        return self.xi[0].depth

    def to_json(self, indent: int | None = None) -> str:
        clm = self.plan.claimed
        payload = {
            "plan": self.plan.params_dict(),
            "ladder": self.plan.ladder.to_json_rows(),
            "targets": [[c.to_text() for c in vec] for vec in self.plan.targets],
            "alphabets": (
                [list(w) for w in self.plan.alphabets] if self.plan.alphabets else None
            ),
            "xi": [c.to_text() for c in self.xi],
            "x0": [c.to_text() for c in self.x0],
            "x1": [c.to_text() for c in self.x1],
            "carries": list(self.carries),
            "certificates": [
                {
                    "block": c.block,
                    "h": c.h,
                    "side": c.side,
                    "target": c.target,
                    "gap": c.gap,
                    "bound": str(c.bound),
                    "measured": str(c.measured),
                    "uncertainty": str(c.uncertainty),
                    "ok": c.ok,
                }
                for c in self.certificates
            ],
            "claimed_exponents": (
                None
                if clm is None
                else {
                    "uniform_side": clm.uniform_side,
                    "uniform_value": str(clm.uniform_value),
                    "ordinary_side": clm.ordinary_side,
                    "ordinary_value": str(clm.ordinary_value),
                }
            ),
        }
        return json.dumps(payload, sort_keys=True, indent=indent)

    @staticmethod
    def from_json(text: str) -> "SplitResult":
        data = json.loads(text)
        p = data["plan"]
        targets = tuple(
            tuple(DigitExpansion.from_text(t) for t in vec) for vec in data["targets"]
        )
        alphabets = (
            tuple(tuple(w) for w in data["alphabets"]) if data.get("alphabets") else None
        )
        plan = make_plan(
            p["kind"],
            m=p["m"],
            base=p["base"],
            depth_budget=p["depth_budget"],
            M=p["M"],
            nu0=Fraction(p["nu0"]),
            nu1=Fraction(p["nu1"]),
            targets=targets,
            alphabets=alphabets,
            nu_seq=[Fraction(v) for v in p["nu_blocks"]] if "nu_blocks" in p else None,
            swap=p.get("swap", False),
        )
        certs = tuple(
            Certificate(
                block=c["block"],
                h=c["h"],
                side=c["side"],
                target=c["target"],
                gap=c["gap"],
                bound=Fraction(c["bound"]),
                measured=Fraction(c["measured"]),
                uncertainty=Fraction(c["uncertainty"]),
            )
            for c in data["certificates"]
        )
        return SplitResult(
            plan=plan,
            xi=tuple(DigitExpansion.from_text(t) for t in data["xi"]),
            x0=tuple(DigitExpansion.from_text(t) for t in data["x0"]),
            x1=tuple(DigitExpansion.from_text(t) for t in data["x1"]),
            carries=tuple(data["carries"]),
            certificates=certs,
        )


def make_plan(
    kind: str,
    *,
    m: int,
    base: int,
    depth_budget: int,
    M: int = 8,
    nu0: RatioLike = 2,
    nu1: RatioLike | None = None,
    targets: Sequence[Vector] = (),
    alphabets: Sequence[Sequence[int]] | None = None,
    nu_seq=None,
    swap: bool = False,
) -> SplitPlan:
    """Validate parameters and assemble ladder + schedule for one split mode.

    * homogeneous  -- alternating schedule, both sides prescribe zeros;
    * inhomogeneous-- alternating, x1 follows the single target, x0 zeros;
    * multi        -- period-(k+1) schedule over k targets; nu1 defaults to
                      k/(k-1) for k >= 2;
    * liouville    -- alternating parities with the enumeration phi choosing
                      the target per block and a growing ratio ramp;
    * cantor       -- homogeneous restricted to missing-digit alphabets
                      (0 must be in every W_i).
    """
    targets = tuple(tuple(v) for v in targets)
    k = len(targets)
    if kind in ("homogeneous", "cantor"):
        if targets:
            raise ValueError(f"{kind} mode takes no targets")
        schedule = Schedule(ALTERNATING, k=0, swap=swap)
    elif kind == "inhomogeneous":
        if k != 1:
            raise ValueError("inhomogeneous mode needs exactly one target")
        schedule = Schedule(ALTERNATING, k=1, swap=swap)
    elif kind == "multi":
        if k < 1:
            raise ValueError("multi mode needs k >= 1 targets")
        if nu1 is None and k >= 2:
            nu1 = Fraction(k, k - 1)
        schedule = Schedule(MOD_K_PLUS_1, k=k)
    elif kind == "liouville":
        if k < 1:
            raise ValueError("liouville mode needs a finite target list")
        schedule = Schedule(LIOUVILLE, k=k)
    else:
        raise ValueError(f"unknown plan kind {kind!r}")
    if nu1 is None:
        nu1 = nu0

    ladder = build_ladder(M, schedule, nu0, nu1, depth_budget, nu_seq=nu_seq)

    # every followed block needs that many leading digits of its target
    need: dict[int, int] = {}
    for iv in ladder.intervals:
        if iv.target > 0:
            span = min(iv.h, depth_budget) - iv.g + 1
            need[iv.target] = max(need.get(iv.target, 0), span)
    for s, span in need.items():
        for coord in targets[s - 1]:
            if coord.depth < span:
                raise ValueError(
                    f"target {s} depth {coord.depth} < longest followed block ({span})"
                )

    claimed: ClaimedExponents | None = None
    if kind != "liouville":
        lam = ladder.Lambda
        assert lam is not None
        # the uniform claim belongs to the side that follows on the blocks
        # whose ratio drives the checkpoint gap; the other side gets the
        # ordinary claim from its own block ratio
        uniform_side = schedule.role(0)[0] if kind != "multi" else 1
        nu_uniform = as_ratio(nu1) if uniform_side == 1 else as_ratio(nu0)
        nu_ordinary = as_ratio(nu0) if uniform_side == 1 else as_ratio(nu1)
        claimed = ClaimedExponents(
            uniform_side=uniform_side,
            uniform_value=(nu_uniform - 1) / lam,
            ordinary_side=1 - uniform_side,
            ordinary_value=nu_ordinary - 1,
        )

    alph = tuple(tuple(sorted(set(w))) for w in alphabets) if alphabets else None
    if kind == "cantor" and alph is None:
        raise ValueError("cantor mode needs alphabets")

    return SplitPlan(
        kind=kind,
        m=m,
        base=base,
        ladder=ladder,
        targets=targets,
        alphabets=alph,
        claimed=claimed,
    )


def _target_prefix_num(theta: DigitExpansion, length: int) -> int:
    """Integer value of theta's first ``length`` digits (weight b**(length-1)..1)."""
    return theta.numerator // theta.base ** (theta.depth - length)


def _split_coordinate(
    xi: DigitExpansion, plan: SplitPlan, coord: int
) -> tuple[DigitExpansion, DigitExpansion, int]:
    """Split one coordinate; returns (x0, x1, carry)."""
    b, depth = xi.base, xi.depth
    big = b**depth
    prescribed = [0, 0]  # numerators of the prescription per side
    masked_xi = [0, 0]  # xi restricted to each side's blocks
    for iv in plan.ladder.intervals:
        if iv.g > depth:
            break
        h_cl = min(iv.h, depth)
        span = h_cl - iv.g + 1
        tail = b ** (depth - h_cl)
        if iv.target > 0:
            theta = plan.targets[iv.target - 1][coord]
            prescribed[iv.follower] += _target_prefix_num(theta, span) * tail
        masked_xi[iv.follower] += ((xi.numerator // tail) % b**span) * tail

    x1_num = (prescribed[1] + masked_xi[0] - prescribed[0]) % big
    x0_num = (xi.numerator - x1_num) % big
    carry = 0 if x0_num + x1_num == xi.numerator else 1
    x0 = from_numerator(x0_num, b, depth, exact=xi.exact and plan.pure_splice)
    x1 = from_numerator(x1_num, b, depth, exact=xi.exact and plan.pure_splice)
    return x0, x1, carry


def split(xi: Sequence[DigitExpansion], plan: SplitPlan) -> SplitResult:
    """Decompose xi into x0 + x1 along the plan, with checkpoint certificates.

    Requires all coordinates at one common depth D with
    g_last <= D <= h_last (build the ladder with depth_budget = D).
    """
    xi = tuple(xi)
    if len(xi) != plan.m:
        raise ValueError(f"xi has {len(xi)} coordinates, plan expects {plan.m}")
    depth = xi[0].depth
    for coord in xi:
        if coord.base != plan.base:
            raise ValueError("xi base mismatch with plan")
        if coord.depth != depth:
            raise ValueError("all xi coordinates must share one depth")
    lad = plan.ladder
    if depth > lad.h_last:
        raise ValueError(
            f"depth {depth} exceeds ladder coverage h_last={lad.h_last}; "
            "rebuild the ladder with a larger budget"
        )
    if depth < lad.g_last:
        raise ValueError(
            f"depth {depth} does not reach the last block (g_last={lad.g_last})"
        )
    if plan.alphabets is not None:
        for i, coord in enumerate(xi):
            allowed = set(plan.alphabets[i])
            if any(d not in allowed for d in coord.digits):
                raise ValueError(f"xi coordinate {i} leaves the alphabet W_{i + 1}")

    pieces = [_split_coordinate(c, plan, i) for i, c in enumerate(xi)]
    x0 = tuple(p[0] for p in pieces)
    x1 = tuple(p[1] for p in pieces)
    carries = tuple(p[2] for p in pieces)

    certificates = _certify(plan, x0, x1, depth)
    return SplitResult(
        plan=plan, xi=xi, x0=x0, x1=x1, carries=carries, certificates=certificates
    )


def _certify(
    plan: SplitPlan, x0: Vector, x1: Vector, depth: int
) -> tuple[Certificate, ...]:
    """Measure every checkpoint guarantee the ladder makes at this depth."""
    b = plan.base
    const = plan.certificate_constant
    certs: list[Certificate] = []
    for iv in plan.ladder.intervals[1:]:
        h = iv.g - 1  # checkpoint position: end of the previous block
        if depth - h < GUARD_DIGITS:
            continue
        gap = min(iv.h, depth) - h
        side_vec = x1 if iv.follower == 1 else x0
        theta_vec = plan.targets[iv.target - 1] if iv.target > 0 else None
        measured = Fraction(0)
        unc = Fraction(0)
        for ell in range(plan.m):
            theta = theta_vec[ell] if theta_vec is not None else None
            fe = frac_error(side_vec[ell], h, theta)
            measured = max(measured, fe.err)
            unc = max(unc, fe.uncertainty)
        certs.append(
            Certificate(
                block=iv.j,
                h=h,
                side=iv.follower,
                target=iv.target,
                gap=gap,
                bound=Fraction(const, b**gap),
                measured=measured,
                uncertainty=unc,
            )
        )
    return tuple(certs)


@dataclass(frozen=True)
class VerifyEntry:
    check: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    entries: tuple[VerifyEntry, ...]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(
            {
                "ok": self.ok,
                "entries": [
                    {"check": e.check, "ok": e.ok, "detail": e.detail}
                    for e in self.entries
                ],
            },
            sort_keys=True,
            indent=indent,
        )


def verify_split(result: SplitResult, xi: Vector | None = None, plan: SplitPlan | None = None) -> VerifyReport:
    """Recheck a split from scratch: reconstruction, certificates, alphabets.

    Everything is recomputed from the output digits via frac_error; stored
    certificate values must match the recomputation exactly and stay within
    their bounds.  Failures become report entries, never exceptions.
    """
    plan = plan or result.plan
    xi = tuple(xi) if xi is not None else result.xi
    entries: list[VerifyEntry] = []

    shape_ok = len(result.x0) == len(result.x1) == len(xi) == plan.m
    entries.append(VerifyEntry("shape", shape_ok, f"m={plan.m}"))
    if not shape_ok:
        return VerifyReport(tuple(entries))

    for ell in range(plan.m):
        carry, total = add(result.x0[ell], result.x1[ell])
        ok = total.digits == xi[ell].digits and carry == result.carries[ell]
        entries.append(
            VerifyEntry(
                f"reconstruction[{ell}]",
                ok,
                "x0 + x1 == xi (mod 1)" if ok else "digit mismatch",
            )
        )

    recomputed = _certify(plan, result.x0, result.x1, result.depth)
    stored = {(c.block, c.h): c for c in result.certificates}
    recomputed_keys = {(c.block, c.h) for c in recomputed}
    entries.append(
        VerifyEntry(
            "certificate-set",
            set(stored) == recomputed_keys,
            f"{len(recomputed)} checkpoints",
        )
    )
    for cert in recomputed:
        key = (cert.block, cert.h)
        got = stored.get(key)
        if got is None:
            continue
        match = got.measured == cert.measured and got.bound == cert.bound
        within = cert.measured <= got.bound
        entries.append(
            VerifyEntry(
                f"certificate[h={cert.h},side=x{cert.side}]",
                match and within,
                f"measured={float(cert.measured):.3e} bound={float(got.bound):.3e}",
            )
        )

    if plan.alphabets is not None:
        for label, vec in (("x0", result.x0), ("x1", result.x1)):
            ok = all(
                set(coord.digits) <= set(plan.alphabets[i])
                for i, coord in enumerate(vec)
            )
            entries.append(VerifyEntry(f"alphabet[{label}]", ok))

    return VerifyReport(tuple(entries))

"""Closed-form dimension-bound evaluators and the one numerical maximization.

Each formula is registered under a stable id and evaluated exactly (Fraction)
whenever its inputs are rational and the formula is algebraic; logarithmic
and exponential formulas fall back to double precision.  Parameter ranges
are enforced as hard errors naming the violated constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

Number = Fraction | float


class BoundDomainError(ValueError):
    """Raised when a formula is evaluated outside its validity range."""


@dataclass(frozen=True)
class BoundResult:
    formula_id: str
    params: dict
    value: Number
    validity: str
    argmax: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "formula": self.formula_id,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "value": float(self.value),
            "value_exact": str(self.value) if isinstance(self.value, Fraction) else None,
            "validity": self.validity,
            "argmax": self.argmax,
            **({"details": self.details} if self.details else {}),
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _num(v) -> Number:
    """Coerce to Fraction when exact, keep floats as floats."""
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    if isinstance(v, str):
        if v in ("inf", "infinity"):
            return math.inf
        return Fraction(v)
    if isinstance(v, float):
        if math.isinf(v):
            return math.inf
        return v
    raise TypeError(f"cannot interpret {v!r} as a number")


def _require(cond: bool, constraint: str) -> None:
    if not cond:
        raise BoundDomainError(f"parameter outside validity range: need {constraint}")


def _int_m(params: dict, minimum: int = 1) -> int:
    m = int(params["m"])
    _require(m >= minimum, f"m >= {minimum}")
    return m


LOG2, LOG3 = math.log(2), math.log(3)


# --- individual formulas ----------------------------------------------------


def _dfsu_dim(params: dict) -> BoundResult:
    m = _int_m(params, 2)
    value = m - 1 + Fraction(1, m + 1)
    return BoundResult("dfsu_dim", {"m": m}, value, "m >= 2")


def _dfsuoben(params: dict) -> BoundResult:
    m = _int_m(params, 2)
    w = _num(params["w"])
    _require(Fraction(1, m) <= w < 1, "1/m <= w < 1")
    first = m - 1 + Fraction(1, m + 1) - (2 * m + 1) * (m * w - 1) / ((m + 1) * (w + 1))
    second = m - m * (m - 1) * w / (m - w)
    value = max(first, second)
    return BoundResult(
        "dfsuoben",
        {"m": m, "w": w},
        value,
        "m >= 2, 1/m <= w < 1",
        details={"branch1": _jsonable(first), "branch2": _jsonable(second)},
    )


def _bchch(params: dict) -> BoundResult:
    w = _num(params["w"])
    _require(Fraction(1, 2) < w < 1, "1/2 < w < 1")
    return BoundResult("bchch", {"w": w}, 2 - 2 * w, "m = 2, 1/2 < w < 1")


def _blau(params: dict) -> BoundResult:
    m = _int_m(params, 2)
    w = _num(params["w"])
    _require(w > 0, "w > 0")
    value = min(m - (1 - m * w) / (1 + w), Fraction(m))
    return BoundResult("blau", {"m": m, "w": w}, value, "m >= 2, w > 0")


def _thmH(params: dict) -> BoundResult:
    m = _int_m(params)
    w = _num(params["w"])
    _require(0 <= w < 1, "0 <= w < 1")
    return BoundResult("thmH", {"m": m, "w": w}, (1 - w) * m, "m >= 1, 0 <= w < 1")


def _ax3(params: dict) -> BoundResult:
    m = _int_m(params)
    w = _num(params["w"])
    _require(0 <= w < 1, "0 <= w < 1")
    r = (1 - w) / (1 + w)
    return BoundResult("ax3", {"m": m, "w": w}, m * r * r, "m >= 1, 0 <= w < 1")


def _simu(params: dict) -> BoundResult:
    m = _int_m(params)
    k = int(params["k"])
    _require(k >= 1, "k >= 1")
    w = _num(params["w"])
    _require(0 <= w < 1, "0 <= w < 1")
    value = (1 - k * math.e * float(w)) * m
    return BoundResult(
        "simu", {"m": m, "k": k, "w": w}, value, "m >= 1, k >= 1, 0 <= w < 1"
    )


def _coro(params: dict) -> BoundResult:
    m = _int_m(params, 2)
    value = 1 - Fraction(1, m + 1)
    note = "m >= 2; applies for w < (sqrt(m)-1)^2/m"
    return BoundResult("coro", {"m": m}, value, note)


def _jarnik(params: dict) -> BoundResult:
    m = _int_m(params)
    w = _num(params["w"])
    _require(w >= Fraction(1, m), "w >= 1/m (w = inf allowed)")
    value = Fraction(0) if math.isinf(w) else (m + 1) / (w + 1)
    return BoundResult("jarnik", {"m": m, "w": w}, value, "m >= 1, 1/m <= w <= inf")


def _jarnik_bary(params: dict) -> BoundResult:
    m = _int_m(params)
    w = _num(params["w"])
    _require(math.isinf(w) or w >= 0, "w >= 0 (w = inf allowed)")
    value = Fraction(0) if math.isinf(w) else m / (w + 1)
    return BoundResult("jarnik_bary", {"m": m, "w": w}, value, "m >= 1, 0 <= w <= inf")


def _idne(params: dict) -> BoundResult:
    w = _num(params["w"])
    _require(0 < w < 1, "0 < w < 1")
    value = float(w) + 1 - 2 * math.sqrt(float(w))
    return BoundResult("idne", {"w": w}, value, "0 < w < 1")


def _alphabet_sizes(params: dict) -> tuple[int, list[int]]:
    b = int(params["b"])
    _require(b >= 2, "b >= 2")
    sizes = [int(s) for s in params["sizes"]]
    _require(len(sizes) >= 1, "at least one alphabet")
    for s in sizes:
        _require(2 <= s <= b, "2 <= |W_i| <= b")
    return b, sizes


def _cantor(params: dict) -> BoundResult:
    b, sizes = _alphabet_sizes(params)
    w = _num(params["w"])
    _require(0 <= w < 1, "0 <= w < 1")
    dim_k = sum(math.log(s) for s in sizes) / math.log(b)
    return BoundResult(
        "cantor",
        {"b": b, "sizes": sizes, "w": w},
        (1 - float(w)) * dim_k,
        "0 <= w < 1, |W_i| >= 2",
        details={"dim_K": dim_k},
    )


def _uh(params: dict) -> BoundResult:
    return BoundResult("uh", {}, LOG2 / LOG3, "product of two ternary {0,2} sets")


def _uh_tilde(params: dict) -> BoundResult:
    return BoundResult(
        "uh_tilde", {}, LOG2 / (2 * LOG3) + 0.5, "line times ternary {0,2} set"
    )


def _lemus(params: dict) -> BoundResult:
    tau = _num(params["tau"])
    _require(math.isinf(tau) or tau >= 0, "tau >= 0 (tau = inf allowed)")
    if "dim_k" in params:
        dim_k = float(params["dim_k"])
        _require(dim_k > 0, "dim_K > 0")
        shown: dict = {"dim_k": dim_k, "tau": tau}
    else:
        b, sizes = _alphabet_sizes(params)
        dim_k = sum(math.log(s) for s in sizes) / math.log(b)
        shown = {"b": b, "sizes": sizes, "tau": tau}
    value = 0.0 if math.isinf(tau) else dim_k / (float(tau) + 1)
    return BoundResult("lemus", shown, value, "0 <= tau <= inf")


def _khalil_upper(params: dict) -> BoundResult:
    return BoundResult(
        "khalil_upper", {}, 4 * LOG2 / (3 * LOG3), "product of two ternary {0,2} sets"
    )


def _haupack(params: dict) -> BoundResult:
    b = int(params["b"])
    _require(b >= 2, "b >= 2")
    size = int(params["size"])
    _require(2 <= size <= b, "2 <= |W| <= b")
    return BoundResult(
        "haupack", {"b": b, "size": size}, math.log(size) / math.log(b), "|W| >= 2"
    )


FORMULAS: dict[str, Callable[[dict], BoundResult]] = {
    "dfsu_dim": _dfsu_dim,
    "dfsuoben": _dfsuoben,
    "bchch": _bchch,
    "blau": _blau,
    "thmH": _thmH,
    "ax3": _ax3,
    "simu": _simu,
    "coro": _coro,
    "jarnik": _jarnik,
    "jarnik_bary": _jarnik_bary,
    "idne": _idne,
    "cantor": _cantor,
    "uh": _uh,
    "uh_tilde": _uh_tilde,
    "lemus": _lemus,
    "khalil_upper": _khalil_upper,
    "haupack": _haupack,
}

ALIASES = {"dfsu": "dfsu_dim"}


def evaluate_closed_form(formula_id: str, **params) -> BoundResult:
    """Evaluate one named bound; unknown ids and out-of-range parameters raise."""
    fid = ALIASES.get(formula_id, formula_id)
    if fid not in FORMULAS:
        raise ValueError(f"unknown formula id {formula_id!r}")
    return FORMULAS[fid](params)


def bounds_table(m: int, w, b: int = 3, sizes: Sequence[int] | None = None) -> list[BoundResult]:
    """All formulas that apply at the given (m, w) and optional alphabet data."""
    rows = []
    specs: list[tuple[str, dict]] = [
        ("dfsu_dim", {"m": m}),
        ("dfsuoben", {"m": m, "w": w}),
        ("bchch", {"w": w}),
        ("blau", {"m": m, "w": w}),
        ("thmH", {"m": m, "w": w}),
        ("ax3", {"m": m, "w": w}),
        ("simu", {"m": m, "k": 1, "w": w}),
        ("coro", {"m": m}),
        ("jarnik", {"m": m, "w": w}),
        ("jarnik_bary", {"m": m, "w": w}),
        ("idne", {"w": w}),
        ("uh", {}),
        ("uh_tilde", {}),
        ("khalil_upper", {}),
    ]
    if sizes:
        specs.append(("cantor", {"b": b, "sizes": list(sizes), "w": w}))
        specs.append(("lemus", {"b": b, "sizes": list(sizes), "tau": w}))
    for fid, params in specs:
        try:
            rows.append(evaluate_closed_form(fid, **params))
        except BoundDomainError:
            continue
    return rows


# --- numerical maximization -------------------------------------------------

_INV_PHI = (math.sqrt(5) - 1) / 2
_INV_PHI2 = (3 - math.sqrt(5)) / 2


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section maximization of a unimodal f on [a, b] to |b-a| < tol."""
    h = b - a
    c, d = a + _INV_PHI2 * h, a + _INV_PHI * h
    yc, yd = f(c), f(d)
    while h > tol:
        if yc > yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INV_PHI * h
            yd = f(d)
    t = (a + b) / 2
    return t, f(t)


def khr_objective(w: float, d_list: Sequence[float]) -> Callable[[float], float]:
    """The weighted rational objective summed over the coordinate dimensions."""

    def f(t: float) -> float:
        total = 0.0
        for d in d_list:
            num = -w * t * t + (w + 1) * t - 1
            den = (w + 1) * (1 - d) * t * t + ((w + 2) * d - 1) * t - d
            total += d * num / den
        return total

    return f


def _khr_denominator_roots(w: float, d: float) -> list[float]:
    a, bb, c = (w + 1) * (1 - d), (w + 2) * d - 1, -d
    if a == 0:
        return [-c / bb] if bb != 0 else []
    disc = bb * bb - 4 * a * c
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return sorted(((-bb - r) / (2 * a), (-bb + r) / (2 * a)))


def maximize_khr(w, d_list: Sequence[float], tol: float = 1e-8) -> BoundResult:
    """Maximize the weighted objective over t > 1.

    The numerator is positive only on (1, 1/w), every denominator is positive
    there (their real roots lie below 1, which is checked and excluded), so a
    grid scan plus golden-section refinement on that bracket finds the global
    maximum deterministically.
    """
    w = float(_num(w))
    d_vals = [float(d) for d in d_list]
    _require(0 < w <= 1, "0 < w < 1 (w = 1 degenerates to 0)")
    for d in d_vals:
        _require(0 < d <= 1, "0 < d_i <= 1")
    params = {"w": w, "d": d_vals}
    if w == 1:
        return BoundResult(
            "khr",
            params,
            0.0,
            "degenerate: the numerator -(t-1)^2 is nonpositive for w = 1",
            argmax=1.0,
            details={"degenerate": True},
        )

    lo, hi = 1.0, 1.0 / w
    roots = [r for d in d_vals for r in _khr_denominator_roots(w, d)]
    bad = [r for r in roots if r > lo + tol]
    if bad:  # cannot happen for d in (0,1]; guard against misuse
        hi = min(hi, min(bad) - tol)
    f = khr_objective(w, d_vals)

    grid_n = 2000
    step = (hi - lo) / grid_n
    best_i = max(range(1, grid_n), key=lambda i: f(lo + i * step))
    a = lo + (best_i - 1) * step
    b = lo + (best_i + 1) * step
    t_star, val = _golden_max(f, a, b, tol)
    return BoundResult(
        "khr",
        params,
        val,
        "0 < w < 1, 0 < d_i <= 1",
        argmax=t_star,
        details={"denominator_roots": roots, "bracket": [a, b]},
    )


# --- nested-interval liminf along a ladder ----------------------------------


def falconer_liminf(
    nu0,
    nu1,
    d: Sequence[float] | float = 1.0,
    terms: int = 50,
    M: int = 8,
) -> BoundResult:
    """Partial liminf quotients of the nested-interval dimension bound.

    Walks the exact two-phase ladder u -> f = floor(nu0*(u+1)) ->
    u' = floor(nu1*(f+1)); level k keeps b**(d*(f_k - u_k)) children per
    interval separated by gaps of order b**-f_k, so the quotient
    log(children so far) / -log(children_k * gap_k) tends to
    (nu0-1)*d / ((nu0*nu1-1) * (nu0 - (nu0-1)*d)) per coordinate (the plain
    (nu0-1)/(nu0*nu1-1) when d = 1).  Reports the tail value and its
    distance to that closed form, summed over coordinates.
    """
    n0, n1 = Fraction(nu0), Fraction(nu1)
    if n0 <= 1 or n1 <= 1:
        raise ValueError("ladder ratios must exceed 1 (non-expanding ladder)")
    if terms < 3:
        raise ValueError("need at least 3 terms")
    d_vals = [float(x) for x in (d if isinstance(d, (list, tuple)) else [d])]
    for dv in d_vals:
        _require(0 < dv <= 1, "0 < d_i <= 1")

    u = [M]
    fs = []
    for k in range(terms + 1):
        f_k = (n0.numerator * (u[k] + 1)) // n0.denominator
        fs.append(f_k)
        u.append((n1.numerator * (f_k + 1)) // n1.denominator)

    lam = n0 * n1
    per_coord = []
    closed_total = 0.0
    value_total = 0.0
    for dv in d_vals:
        free = 0
        quotients = []
        for k in range(1, terms + 1):
            if k >= 2:
                denom = fs[k] - dv * (fs[k] - u[k])
                quotients.append(free / denom)
            free += dv * (fs[k] - u[k])
        tail = quotients[-1]
        closed = (
            float(n0 - 1) * dv / (float(lam - 1) * (float(n0) - float(n0 - 1) * dv))
        )
        per_coord.append({"d": dv, "tail": tail, "closed_form": closed})
        value_total += tail
        closed_total += closed
    return BoundResult(
        "falconer_liminf",
        {"nu0": n0, "nu1": n1, "d": d_vals, "terms": terms, "M": M},
        value_total,
        "nu0 > 1, nu1 > 1, 0 < d_i <= 1",
        details={
            "closed_form": closed_total,
            "distance": abs(value_total - closed_total),
            "per_coordinate": per_coord,
        },
    )

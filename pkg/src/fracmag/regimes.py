"""Exponent bookkeeping and admissibility classification.

Inputs given as ``int`` or ``fractions.Fraction`` are evaluated exactly.
Float inputs use a 1e-12 band: a strict inequality whose two sides fall
inside the band is reported as a boundary case instead of being decided.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Optional, Union

Number = Union[int, float, Fraction]

BAND = 1e-12


class _Boundary(Exception):
    pass


def _exact(*xs) -> bool:
    return all(isinstance(x, Rational) for x in xs)


def _cmp(a: Number, b: Number) -> int:
    """Sign of a - b; raises _Boundary when float inputs are within the band."""
    if _exact(a, b):
        return (a > b) - (a < b)
    diff = float(a) - float(b)
    if abs(diff) <= BAND * max(1.0, abs(float(a)), abs(float(b))):
        raise _Boundary
    return 1 if diff > 0 else -1


def _lt(a, b) -> bool:
    return _cmp(a, b) < 0


def _as_number(x) -> Number:
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def _num_out(x) -> float:
    return float(x) if x is not None else None


@dataclass
class RegimeReport:
    d: int
    alpha: float
    beta: float
    s: float
    eta: float
    lwp_case: Optional[str]  # "CaseI" | "CaseII" | "Boundary" | None
    alpha_star: Optional[float]
    global_nonresistive: bool
    mild_admissible: bool
    mild_reasons: list[str]
    p: Optional[float]
    q: Optional[float]
    r: Optional[float]
    sigma: Optional[float]
    theta_window: Optional[tuple[float, float]]
    scaling_exponent: Optional[float]
    scaling_class: Optional[str]  # "Sub" | "Critical" | "Super" | "Boundary"
    flags: list[str] = field(default_factory=list)
    identities: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.theta_window is not None:
            out["theta_window"] = list(self.theta_window)
        return out

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, float):
                value = format(value, ".17g")
            lines.append(f"{key} = {value}")
        return "\n".join(lines)


def _lwp(d, alpha, s):
    """Local well-posedness case and the velocity regularity gain alpha*."""
    half_d = Fraction(d, 2) if _exact(d) else d / 2
    try:
        if _cmp(alpha, half_d) > 0:
            if _cmp(s, 1) >= 0:
                return "CaseI", alpha
            return None, None
        if _cmp(alpha, 0) >= 0:
            if _cmp(s, half_d + 1 - alpha) > 0:
                return "CaseII", 2 * alpha - half_d
        return None, None
    except _Boundary:
        return "Boundary", None


def classify(d: int, alpha: Number, beta: Number, s: Number = 1, eta: Number = 0,
             p_opt: Optional[Number] = None) -> RegimeReport:
    """Classify (d, alpha, beta, s, eta) against the well-posedness theorems."""
    alpha, beta, s, eta = (_as_number(v) for v in (alpha, beta, s, eta))
    flags: list[str] = []
    exact = _exact(alpha, beta, s)
    one = Fraction(1) if exact else 1.0
    half = Fraction(1, 2) if exact else 0.5
    dd = Fraction(d) if exact else float(d)

    lwp_case, alpha_star = _lwp(d, alpha, s)
    if alpha_star is not None:
        try:
            if _cmp(alpha_star, 0) <= 0:
                flags.append("LowRegularityVelocity")
        except _Boundary:
            flags.append("LowRegularityVelocity")

    try:
        global_nonresistive = _cmp(alpha, dd / 2 + 1) >= 0 and _cmp(s, 1) >= 0
    except _Boundary:
        global_nonresistive = True  # alpha = d/2 + 1 is admitted by the non-strict inequality

    reasons: list[str] = []
    checks = [
        ("1/2 < alpha", lambda: _lt(half, alpha)),
        ("alpha < (d+1)/2", lambda: _lt(alpha, (dd + 1) / 2)),
        ("beta > 1/2", lambda: _lt(half, beta)),
        ("alpha + beta < d + 1", lambda: _lt(alpha + beta, dd + 1)),
    ]
    ok = True
    for label, test in checks:
        try:
            if not test():
                ok = False
                reasons.append(f"violates {label}")
        except _Boundary:
            ok = False
            reasons.append(f"boundary of {label}")
    try:
        triggered = _lt((dd + 2) / 4, alpha) and _lt(alpha, (dd + 1) / 2)
    except _Boundary:
        # ambiguous trigger: the extra condition must then hold for admissibility
        triggered = True
    if triggered:
        try:
            if not _lt(3 * alpha + beta, (3 * dd + 4) / 2):
                ok = False
                reasons.append("violates 3 alpha + beta < (3d+4)/2 (needed for alpha > (d+2)/4)")
        except _Boundary:
            ok = False
            reasons.append("boundary of the 3 alpha + beta < (3d+4)/2 condition")
    mild_admissible = ok

    p = q = r = sigma = None
    theta_window = None
    identities = {}
    denom = alpha + beta - one
    try:
        positive_denom = _cmp(denom, 0) > 0
    except _Boundary:
        positive_denom = False
    if positive_denom:
        inv_p = denom / dd
        inv_q = inv_p - (2 * beta - one) / (3 * dd)
        inv_r = 2 * inv_q - (2 * alpha - one) / dd
        p = 1 / inv_p
        q = 1 / inv_q if inv_q != 0 else math.inf
        r = 1 / inv_r if inv_r != 0 else math.inf
        sigma = (dd / (2 * beta)) * (inv_p - inv_q)
        theta_window = (inv_p, 2 * beta / dd + 2 * inv_q - inv_p)
        identities = {
            "3sigma_plus_inv_2beta_minus_1": float(3 * sigma + 1 / (2 * beta) - 1),
            "inv_p_minus_inv_r_minus_inv_q": float(inv_p - inv_r - inv_q),
        }
        if mild_admissible:
            fails = []
            if not (_lt(max(p, 2), q) and inv_q > 0):
                fails.append("max{p,2} < q < inf")
            if not (inv_r > 0 and _lt(inv_r, 1)):
                fails.append("0 < 1/r < 1")
            if fails:
                flags.append("DerivedExponentCheckFailed: " + ", ".join(fails))

    scaling_exponent = scaling_class = None
    if p_opt is not None:
        p_opt = _as_number(p_opt)
        scaling_exponent = alpha + beta - one - dd / p_opt
        try:
            c = _cmp(scaling_exponent, 0)
            scaling_class = {1: "Sub", 0: "Critical", -1: "Super"}[c]
        except _Boundary:
            scaling_class = "Critical"

    return RegimeReport(
        d=d,
        alpha=float(alpha),
        beta=float(beta),
        s=float(s),
        eta=float(eta),
        lwp_case=lwp_case,
        alpha_star=_num_out(alpha_star),
        global_nonresistive=bool(global_nonresistive),
        mild_admissible=mild_admissible,
        mild_reasons=reasons,
        p=_num_out(p),
        q=_num_out(q),
        r=_num_out(r),
        sigma=_num_out(sigma),
        theta_window=None if theta_window is None else (float(theta_window[0]), float(theta_window[1])),
        scaling_exponent=_num_out(scaling_exponent),
        scaling_class=scaling_class,
        flags=flags,
        identities=identities,
    )


def exact_exponents(d: int, alpha: Number, beta: Number) -> dict[str, Fraction]:
    """p, q, r, sigma as exact fractions for rational (alpha, beta)."""
    alpha, beta = Fraction(alpha), Fraction(beta)
    inv_p = (alpha + beta - 1) / d
    inv_q = inv_p - (2 * beta - 1) / (3 * d)
    inv_r = 2 * inv_q - (2 * alpha - 1) / d
    return {
        "p": 1 / inv_p,
        "q": 1 / inv_q,
        "r": 1 / inv_r,
        "sigma": Fraction(d) / (2 * beta) * (inv_p - inv_q),
    }


def local_time_hint(b0_Hs_norm: float, c_cal: float = 1.0) -> float:
    """Advisory existence time (c_cal * ||b0||_{H^s})^{-2}."""
    if not b0_Hs_norm > 0:
        raise ValueError("norm must be positive")
    return (c_cal * b0_Hs_norm) ** -2

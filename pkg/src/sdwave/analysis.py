"""Decay fits, theoretical rate tables, admissible exponents and solution-space norms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .linear import NormSeries, sobolev_name


class ContaminatedWindowError(ValueError):
    """Fit window reaches past the periodic validity limit."""


class MissingNormError(KeyError):
    pass


# ---------------------------------------------------------------------------
# Fits

MODELS = ("power", "sqrt-log", "log")


@dataclass(frozen=True)
class FitResult:
    t_a: float
    t_b: float
    slope: float
    intercept: float
    rms: float
    model: str
    samples: int
    band: float | None = None  # max/min of value/√log(t+e), sqrt-log model only


def default_window(times, valid_until: float = math.inf) -> tuple[float, float]:
    """Last decade of the valid (non-contaminated) times."""
    t = np.asarray(times, dtype=float)
    t = t[t <= valid_until]
    if t.size == 0:
        raise ContaminatedWindowError("no valid times in series")
    t_b = float(t.max())
    return t_b / 10.0, t_b


def fit_decay(times, values, model: str = "power", window=None, valid_until: float = math.inf) -> FitResult:
    """Least-squares decay fit over ``window`` (inclusive).

    power:    log v = slope·log(1+t) + b
    log:      log v = slope·log log(t+e) + b
    sqrt-log: slope fixed to 1/2, ``band`` = max/min of v/√log(t+e)
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        window = default_window(t, valid_until)
    t_a, t_b = map(float, window)
    if not t_a < t_b:
        raise ValueError("window must satisfy t_a < t_b")
    if t_b > valid_until:
        raise ContaminatedWindowError(f"window end {t_b:g} is past the validity limit {valid_until:g}")
    sel = (t >= t_a * (1 - 1e-12)) & (t <= t_b * (1 + 1e-12))
    t, v = t[sel], v[sel]
    if t.size < 8:
        raise ValueError(f"need at least 8 samples in window, got {t.size}")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("fit values must be positive and finite")
    y = np.log(v)
    if model == "sqrt-log":
        ratio = v / np.sqrt(np.log(t + math.e))
        lr = np.log(ratio)
        b = float(lr.mean())
        rms = float(np.sqrt(np.mean((lr - b) ** 2)))
        return FitResult(t_a, t_b, 0.5, b, rms, model, int(t.size), float(ratio.max() / ratio.min()))
    x = np.log1p(t) if model == "power" else np.log(np.log(t + math.e))
    slope, b = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - slope * x - b) ** 2)))
    return FitResult(t_a, t_b, float(slope), float(b), rms, model, int(t.size))


def fit_series(series: NormSeries, quantity: str, model: str = "power", window=None) -> FitResult:
    return fit_decay(series.times, series[quantity], model, window, series.valid_until)


# ---------------------------------------------------------------------------
# Admissible exponents


@dataclass(frozen=True)
class Bound:
    value: Fraction
    strict: bool

    def admits(self, x: float) -> bool:
        return x > self.value if self.strict else x >= self.value

    def __str__(self):
        v = self.value
        txt = str(v.numerator) if v.denominator == 1 else f"{v} ≈ {float(v):.4g}"
        return f"> {txt} (strict)" if self.strict else f"≥ {txt}"


PROBLEM_U = "convection a·∇|u|^p"
PROBLEM_UT = "convection a·∇|u_t|^p"
PROBLEM_MIXED_U = "mixed |u|^p + a·∇|u|^q"
PROBLEM_MIXED_UT = "mixed |u_t|^p + a·∇|u_t|^q"

_DIMS = {PROBLEM_U: (2, 3, 4, 5), PROBLEM_UT: (2, 3, 4), PROBLEM_MIXED_U: (2, 3, 4, 5), PROBLEM_MIXED_UT: (2, 3, 4)}


def problem_name(j: int, mixed: bool) -> str:
    if j == 0:
        return PROBLEM_MIXED_U if mixed else PROBLEM_U
    if j == 1:
        return PROBLEM_MIXED_UT if mixed else PROBLEM_UT
    raise ValueError("j must be 0 or 1")


@dataclass(frozen=True)
class Threshold:
    n: int
    j: int
    mixed: bool
    problem: str
    supported: bool
    p: Bound | None = None
    q: Bound | None = None

    def admits(self, p: float, q: float | None = None) -> bool:
        if not self.supported:
            return False
        ok = self.p.admits(p)
        if self.q is not None:
            ok = ok and q is not None and self.q.admits(q)
        return ok

    def describe(self) -> str:
        if not self.supported:
            dims = ",".join(str(d) for d in _DIMS[self.problem])
            return f"unsupported: the {self.problem} result covers n={dims}"
        out = f"p {self.p}"
        if self.q is not None:
            out += f", q {self.q}"
        return out


def admissible_exponent(n: int, j: int, mixed: bool = False) -> Threshold:
    """Lower bounds on p (and q) for small-data global existence."""
    prob = problem_name(j, mixed)
    if n not in _DIMS[prob]:
        return Threshold(n, j, mixed, prob, False)
    F = Fraction
    if prob == PROBLEM_U:
        p = Bound(F(5), True) if n == 2 else Bound(1 + F(4, n - 1), False)
        return Threshold(n, j, mixed, prob, True, p)
    if prob == PROBLEM_UT:
        return Threshold(n, j, mixed, prob, True, Bound(1 + max(F(3, n), F(1)), False))
    if prob == PROBLEM_MIXED_U:
        if n == 2:
            return Threshold(n, j, mixed, prob, True, Bound(F(6), True), Bound(F(5), True))
        return Threshold(n, j, mixed, prob, True, Bound(1 + F(5, n - 1), True), Bound(1 + F(4, n - 1), False))
    return Threshold(n, j, mixed, prob, True, Bound(1 + F(4, n), True), Bound(1 + max(F(3, n), F(1)), False))


def exponent_table(dims=(1, 2, 3, 4, 5)) -> list[Threshold]:
    return [admissible_exponent(n, j, m) for m in (False, True) for j in (0, 1) for n in dims]


# ---------------------------------------------------------------------------
# Theoretical rates

POWER, SQRT_LOG, UNSUPPORTED = "power", "sqrt-log", "unsupported"


@dataclass(frozen=True)
class RateEntry:
    """Expected large-time behaviour: (1+t)^exponent, √log(t+e) growth, or unsupported."""

    kind: str
    exponent: float | None = None
    formula: str = ""
    reason: str = ""

    @property
    def model(self) -> str:
        return SQRT_LOG if self.kind == SQRT_LOG else POWER


def _unsupported(reason):
    return RateEntry(UNSUPPORTED, None, "", reason)


def _slowest(terms):
    """The slowest-decaying (largest exponent) of several power terms; √log beats all ≤ 0."""
    best = None
    for entry in terms:
        if entry is None:
            continue
        if best is None:
            best = entry
        elif entry.kind == SQRT_LOG:
            if best.kind != SQRT_LOG and best.exponent <= 0:
                best = entry
        elif best.kind == SQRT_LOG:
            if entry.exponent > 0:
                best = entry
        elif entry.exponent > best.exponent:
            best = entry
    return best


def linear_rate(n: int, quantity: str, data: str, s: float = 0.0, r: float = 1.0,
                l1: float = math.inf, l2: float = math.inf) -> RateEntry:
    """Rate of ‖u‖_{Ḣ^s} or ‖u_t‖_{Ḣ^s} for the linear problem driven by u₀ or u₁ alone.

    ``r`` is the Lebesgue index of the data norm (1 ≤ r ≤ 2); ``l1``, ``l2`` the
    Sobolev regularity of u₀, u₁ (infinite for smooth data).
    """
    if not 1 <= n <= 5:
        return _unsupported("linear table covers n=1..5")
    if not 1 <= r <= 2:
        return _unsupported("data index r must lie in [1, 2]")
    if data not in ("u0", "u1") or quantity not in ("u", "ut"):
        raise ValueError("quantity must be u or ut and data u0 or u1")
    g = n / 4 * (1 / r - 0.5)
    sreg = []
    if quantity == "u" and s == 0:
        if data == "u0":
            main = RateEntry(POWER, -g, f"-(n/4)(1/r-1/2) = {-g:g}")
            if math.isfinite(l1):
                sreg.append(RateEntry(POWER, -l1 / 2, "-l1/2"))
        else:
            if n == 1:
                main = RateEntry(POWER, 0.5, "t^{1/2} growth")
            elif n == 2:
                main = RateEntry(SQRT_LOG, None, "sqrt(log(t+e))")
            else:
                main = RateEntry(POWER, -g + 0.25, f"-(n/4)(1/r-1/2)+1/4 = {-g + 0.25:g}")
            if math.isfinite(l2):
                sreg.append(RateEntry(POWER, -l2 / 2 - 2, "-l2/2-2"))
    elif quantity == "u":
        if not 1 <= s <= min(l1 + 6, l2 + 4):
            return _unsupported("Ḣ^s estimate of u needs 1 ≤ s ≤ min(l1+6, l2+4)")
        if data == "u0":
            main = RateEntry(POWER, -g - s / 4, f"-(n/4)(1/r-1/2)-s/4 = {-g - s / 4:g}")
            if math.isfinite(l1):
                sreg.append(RateEntry(POWER, -(l1 - s) / 2, "-(l1-s)/2"))
        else:
            main = RateEntry(POWER, -g - (s - 1) / 4, f"-(n/4)(1/r-1/2)-(s-1)/4 = {-g - (s - 1) / 4:g}")
            if math.isfinite(l2):
                sreg.append(RateEntry(POWER, -(l2 - s) / 2 - 2, "-(l2-s)/2-2"))
    else:
        if not 0 <= s <= min(l1 + 2, l2):
            return _unsupported("Ḣ^s estimate of u_t needs 0 ≤ s ≤ min(l1+2, l2)")
        if data == "u0":
            main = RateEntry(POWER, -g - (s + 1) / 4, f"-(n/4)(1/r-1/2)-(s+1)/4 = {-g - (s + 1) / 4:g}")
            if math.isfinite(l1):
                sreg.append(RateEntry(POWER, -(l1 - s) / 2 - 1, "-(l1-s)/2-1"))
        else:
            main = RateEntry(POWER, -g - s / 4, f"-(n/4)(1/r-1/2)-s/4 = {-g - s / 4:g}")
            if math.isfinite(l2):
                sreg.append(RateEntry(POWER, -(l2 - s) / 2 - 3, "-(l2-s)/2-3"))
    return _slowest([main] + sreg)


NONLINEAR_QUANTITIES = ("u", "grad_u", "ut", "grad_ut")


def nonlinear_rate(n: int, quantity: str, j: int, eps: float = 0.1) -> RateEntry:
    """Rates along small-data global solutions of the j = 0 / j = 1 convection problems
    (shared by the mixed problems). ``grad_*`` is ∇^{n/2+ε}."""
    prob = problem_name(j, False)
    if n not in _DIMS[prob]:
        return _unsupported(f"the {prob} result covers n={','.join(map(str, _DIMS[prob]))}")
    if quantity not in NONLINEAR_QUANTITIES:
        raise ValueError(f"quantity must be one of {NONLINEAR_QUANTITIES}")
    if quantity == "u":
        if n == 2:
            return RateEntry(SQRT_LOG, None, "sqrt(log(t+e))")
        return RateEntry(POWER, -n / 8 + 0.25, "-n/8+1/4")
    if quantity == "grad_u":
        if n == 5:
            return RateEntry(POWER, -0.75 + eps / 2, "-3/4+eps/2 (loss of decay)")
        return RateEntry(POWER, -(n - 1 + eps) / 4, "-(n-1+eps)/4")
    if quantity == "ut":
        return RateEntry(POWER, -n / 8, "-n/8")
    if j == 0:
        return _unsupported("∇^{n/2+ε}u_t is not estimated for the |u|^p problem")
    return RateEntry(POWER, -(n + eps) / 4, "-(n+eps)/4")


def theoretical_rate(n: int, quantity: str, problem: str = "linear", **kw) -> RateEntry:
    """Dispatch: ``problem`` is ``linear`` (kw: data, s, r, l1, l2) or j = 0 / 1
    nonlinear (``u`` / ``ut``; kw: eps)."""
    if problem == "linear":
        return linear_rate(n, quantity, **kw)
    if problem in ("u", PROBLEM_U, PROBLEM_MIXED_U):
        return nonlinear_rate(n, quantity, 0, **kw)
    if problem in ("ut", PROBLEM_UT, PROBLEM_MIXED_UT):
        return nonlinear_rate(n, quantity, 1, **kw)
    raise ValueError(f"unknown problem {problem!r}")


def quantity_key(n: int, quantity: str, eps: float) -> str:
    """Series key recorded by the engines for a nonlinear-table quantity."""
    s = n / 2 + eps
    return {"u": "u", "ut": "ut", "grad_u": sobolev_name("u", s), "grad_ut": sobolev_name("ut", s)}[quantity]


# ---------------------------------------------------------------------------
# Comparison rows


@dataclass(frozen=True)
class Comparison:
    quantity: str
    fit: FitResult
    rate: RateEntry
    tolerance: float
    passed: bool

    @property
    def observed(self) -> float:
        return self.fit.band if self.fit.model == SQRT_LOG else self.fit.slope


def compare(quantity: str, fit: FitResult, rate: RateEntry, tolerance: float, band_limit: float = 1.5) -> Comparison:
    """Slope within ±tolerance of the theoretical exponent, or √log band ≤ band_limit."""
    if rate.kind == UNSUPPORTED:
        return Comparison(quantity, fit, rate, tolerance, False)
    if rate.kind == SQRT_LOG:
        ok = fit.band is not None and fit.band <= band_limit
    else:
        ok = abs(fit.slope - rate.exponent) <= tolerance
    return Comparison(quantity, fit, rate, tolerance, bool(ok))


def format_table(rows: list[Comparison]) -> str:
    head = f"{'quantity':<14}{'model':<10}{'observed':>12}{'theory':>22}{'tol':>8}  result"
    lines = [head, "-" * len(head)]
    for c in rows:
        theory = c.rate.formula if c.rate.kind != POWER else f"{c.rate.exponent:+.4f}"
        tol = "1.5 band" if c.fit.model == SQRT_LOG else f"{c.tolerance:g}"
        lines.append(f"{c.quantity:<14}{c.fit.model:<10}{c.observed:>12.4f}{theory:>22}{tol:>8}  "
                     f"{'PASS' if c.passed else 'FAIL'}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Solution-space norms


def ell_weight(n: int, tau):
    tau = np.asarray(tau, dtype=float)
    if n == 2:
        return 1.0 / np.sqrt(np.log(tau + math.e))
    if n in (3, 4):
        return (1 + tau) ** (n / 8 - 0.25)
    raise ValueError("ℓ(τ) is defined for n = 2, 3, 4")


@dataclass(frozen=True)
class AuxiliaryExponents:
    """Interpolation exponents used with the n = 5 space."""

    theta0: float
    theta1: float
    eps2: float


def auxiliary_exponents(eps: float) -> AuxiliaryExponents:
    return AuxiliaryExponents((5 / 2) / (5 / 2 + eps), 1 / (5 / 2 + eps), 13 * eps / (4 * (5 + 2 * eps)))


def _weights(kind: str, n: int, eps: float):
    """(series key, weight function) pairs for the norm."""
    s = n / 2 + eps
    if kind == "X1":
        if n not in (2, 3, 4):
            raise ValueError("X1 is used for n = 2, 3, 4")
        return [("u", lambda t: ell_weight(n, t)),
                (sobolev_name("u", s), lambda t: (1 + t) ** ((n - 1 + eps) / 4)),
                ("ut", lambda t: (1 + t) ** (n / 8))]
    if kind == "X2":
        if n != 5:
            raise ValueError("X2 is used for n = 5")
        return [("u", lambda t: (1 + t) ** 0.375),
                (sobolev_name("u", s), lambda t: (1 + t) ** (0.75 - eps / 2)),
                ("ut", lambda t: (1 + t) ** 0.625)]
    if kind == "Y":
        if n not in (2, 3, 4):
            raise ValueError("Y is used for n = 2, 3, 4")
        return _weights("X1", n, eps) + [(sobolev_name("ut", s), lambda t: (1 + t) ** ((n + eps) / 4))]
    raise ValueError(f"unknown solution space {kind!r}")


@dataclass(frozen=True)
class SolutionSpaceNorm:
    kind: str
    value: float
    attained_at: float
    terms: dict = field(default_factory=dict)  # per-term sup of the weighted norm
    weight: str = ""


def solution_space_norm(series: NormSeries, kind: str, eps: float, dim: int) -> SolutionSpaceNorm:
    """sup over the recorded times of the weighted norm combination."""
    spec = _weights(kind, dim, eps)
    missing = [k for k, _ in spec if k not in series.values]
    if missing:
        raise MissingNormError(f"{kind} norm needs series {', '.join(missing)}")
    t = np.asarray(series.times, dtype=float)
    parts = {k: w(t) * np.asarray(series[k], dtype=float) for k, w in spec}
    total = sum(parts.values())
    i = int(np.argmax(total))
    ell = "log^{-1/2}(τ+e)" if dim == 2 else f"(1+τ)^{dim / 8 - 0.25:g}"
    return SolutionSpaceNorm(kind, float(total[i]), float(t[i]),
                             {k: float(v.max()) for k, v in parts.items()}, ell if kind != "X2" else "(1+τ)^{3/8}")


def solution_space_for(n: int, j: int) -> str:
    if j == 1:
        return "Y"
    return "X2" if n == 5 else "X1"

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import EXPONENT_GOLDEN as GOLDEN
from sdwave.analysis import (
    SQRT_LOG,
    UNSUPPORTED,
    ContaminatedWindowError,
    FitResult,
    MissingNormError,
    RateEntry,
    admissible_exponent,
    auxiliary_exponents,
    compare,
    ell_weight,
    exponent_table,
    fit_decay,
    fit_series,
    format_table,
    linear_rate,
    nonlinear_rate,
    quantity_key,
    solution_space_for,
    solution_space_norm,
    theoretical_rate,
)
from sdwave.linear import NormSeries


@pytest.mark.parametrize("key", sorted(GOLDEN))
def test_golden_exponents(key):
    th = admissible_exponent(*key)
    (pv, ps), q = GOLDEN[key]
    assert th.supported
    assert (th.p.value, th.p.strict) == (pv, ps)
    if q is None:
        assert th.q is None
    else:
        assert (th.q.value, th.q.strict) == q


@pytest.mark.parametrize("n,j,mixed", [(1, 0, False), (6, 0, False), (1, 1, False), (5, 1, False),
                                       (5, 1, True), (1, 0, True), (6, 1, True)])
def test_unsupported_dimensions(n, j, mixed):
    th = admissible_exponent(n, j, mixed)
    assert not th.supported
    assert th.describe().startswith("unsupported")
    assert not th.admits(100.0, 100.0)


def test_table_covers_golden_exactly():
    supported = {(t.n, t.j, t.mixed) for t in exponent_table() if t.supported}
    assert supported == set(GOLDEN)


def test_strictness_at_the_threshold():
    assert not admissible_exponent(2, 0).admits(5.0)
    assert admissible_exponent(2, 0).admits(5.0001)
    assert admissible_exponent(3, 0).admits(3.0)
    assert admissible_exponent(4, 1, True).admits(2.0001, 2.0)
    assert not admissible_exponent(4, 1, True).admits(2.0, 2.0)
    assert not admissible_exponent(3, 0, True).admits(4.0, None)


def test_describe_text():
    assert admissible_exponent(2, 0).describe() == "p > 5 (strict)"
    assert admissible_exponent(3, 1).describe() == "p ≥ 2"
    assert "7/3" in admissible_exponent(4, 0).describe()
    assert "n=2,3,4" in admissible_exponent(5, 1).describe()


@pytest.mark.parametrize("j,mixed", [(0, False), (1, False), (0, True), (1, True)])
def test_thresholds_nonincreasing_in_n(j, mixed):
    rows = [admissible_exponent(n, j, mixed) for n in range(2, 6)]
    vals = [t.p.value for t in rows if t.supported]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    qs = [t.q.value for t in rows if t.supported and t.q is not None]
    assert all(a >= b for a, b in zip(qs, qs[1:]))


def test_bad_j():
    with pytest.raises(ValueError):
        admissible_exponent(3, 2)


# --- rates -----------------------------------------------------------------

def test_nonlinear_rate_table():
    assert nonlinear_rate(3, "u", 0).exponent == pytest.approx(-1 / 8)
    assert nonlinear_rate(2, "u", 0).kind == SQRT_LOG
    assert nonlinear_rate(4, "ut", 0).exponent == pytest.approx(-0.5)
    assert nonlinear_rate(4, "grad_ut", 1, eps=0.2).exponent == pytest.approx(-(4.2) / 4)
    assert nonlinear_rate(5, "grad_u", 0, eps=0.1).exponent == pytest.approx(-0.75 + 0.05)
    assert nonlinear_rate(3, "grad_u", 1, eps=0.1).exponent == pytest.approx(-(2.1) / 4)
    assert nonlinear_rate(3, "grad_ut", 0).kind == UNSUPPORTED
    assert nonlinear_rate(5, "u", 1).kind == UNSUPPORTED
    assert nonlinear_rate(6, "u", 0).kind == UNSUPPORTED
    with pytest.raises(ValueError):
        nonlinear_rate(3, "energy", 0)


def test_linear_rate_table():
    assert linear_rate(3, "u", "u0").exponent == pytest.approx(-3 / 8)
    assert linear_rate(3, "u", "u1").exponent == pytest.approx(-1 / 8)
    assert linear_rate(5, "ut", "u1").exponent == pytest.approx(-5 / 8)
    assert linear_rate(3, "ut", "u0").exponent == pytest.approx(-3 / 8 - 1 / 4)
    assert linear_rate(2, "u", "u1").kind == SQRT_LOG
    assert linear_rate(1, "u", "u1").exponent == pytest.approx(0.5)
    assert linear_rate(3, "u", "u0", s=2).exponent == pytest.approx(-3 / 8 - 1 / 2)
    assert linear_rate(3, "u", "u1", s=2).exponent == pytest.approx(-3 / 8 - 1 / 4)
    assert linear_rate(3, "ut", "u1", s=1).exponent == pytest.approx(-3 / 8 - 1 / 4)
    # r = 2 removes the Lebesgue gain
    assert linear_rate(4, "u", "u0", r=2).exponent == pytest.approx(0.0)


def test_linear_rate_regularity_terms():
    # low regularity makes the regularity term the slowest
    assert linear_rate(3, "u", "u0", l1=0.5).exponent == pytest.approx(-0.25)
    assert linear_rate(3, "u", "u0", l1=2).exponent == pytest.approx(-3 / 8)


def test_linear_rate_unsupported():
    assert linear_rate(3, "u", "u0", s=0.5).kind == UNSUPPORTED
    assert linear_rate(3, "u", "u0", s=3, l1=0, l2=-2).kind == UNSUPPORTED
    assert linear_rate(3, "ut", "u1", s=1, l2=0.5).kind == UNSUPPORTED
    assert linear_rate(6, "u", "u0").kind == UNSUPPORTED
    assert linear_rate(3, "u", "u0", r=3).kind == UNSUPPORTED
    with pytest.raises(ValueError):
        linear_rate(3, "v", "u0")


def test_theoretical_rate_dispatch():
    assert theoretical_rate(3, "u", data="u0") == linear_rate(3, "u", "u0")
    assert theoretical_rate(3, "ut", "u", eps=0.1) == nonlinear_rate(3, "ut", 0, 0.1)
    assert theoretical_rate(3, "ut", "ut") == nonlinear_rate(3, "ut", 1)
    with pytest.raises(ValueError):
        theoretical_rate(3, "u", "heat")


def test_quantity_key():
    assert quantity_key(3, "grad_u", 0.1) == "u_H1.6"
    assert quantity_key(2, "ut", 0.1) == "ut"


# --- fits ------------------------------------------------------------------

@given(st.floats(-2.0, 0.5), st.floats(0.1, 10.0))
@settings(max_examples=40, deadline=None)
def test_power_fit_exact(slope, amp):
    t = np.geomspace(1, 1e4, 81)
    v = amp * (1 + t) ** slope
    f = fit_decay(t, v)
    assert f.slope == pytest.approx(slope, abs=1e-6)
    assert f.t_a == pytest.approx(1e3) and f.t_b == pytest.approx(1e4)


def test_sqrt_log_fit_exact():
    t = np.geomspace(1, 1e4, 81)
    f = fit_decay(t, 3 * np.sqrt(np.log(t + math.e)), "sqrt-log")
    assert f.band == pytest.approx(1.0, abs=1e-6)
    assert math.exp(f.intercept) == pytest.approx(3.0, rel=1e-6)


def test_log_fit_exact():
    t = np.geomspace(1, 1e4, 81)
    f = fit_decay(t, np.log(t + math.e) ** -0.7, "log")
    assert f.slope == pytest.approx(-0.7, abs=1e-6)


def test_fit_refuses_contaminated_window():
    t = np.geomspace(1, 1e3, 61)
    with pytest.raises(ContaminatedWindowError):
        fit_decay(t, 1 / t, window=(10, 500), valid_until=100)
    s = NormSeries(t, {"u": 1 / (1 + t)}, valid_until=100)
    f = fit_series(s, "u")
    assert f.t_b <= 100 and f.slope == pytest.approx(-1, abs=1e-9)


def test_fit_validation():
    t = np.geomspace(1, 100, 41)
    with pytest.raises(ValueError):
        fit_decay(t, np.zeros_like(t))
    with pytest.raises(ValueError):
        fit_decay(t, 1 / t, model="spline")
    with pytest.raises(ValueError):
        fit_decay(t, 1 / t, window=(50, 10))
    with pytest.raises(ValueError):
        fit_decay(t[:5], 1 / t[:5])


def test_compare_and_table():
    fit = FitResult(1e3, 1e4, -0.38, 0.0, 0.0, "power", 41)
    ok = compare("u", fit, RateEntry("power", -0.375), 0.05)
    bad = compare("u", fit, RateEntry("power", -0.5), 0.05)
    assert ok.passed and not bad.passed
    assert not compare("u", fit, RateEntry(UNSUPPORTED), 1.0).passed
    band = FitResult(1e3, 1e4, 0.5, 0.0, 0.0, SQRT_LOG, 41, 1.2)
    assert compare("u", band, RateEntry(SQRT_LOG), 0.05).passed
    assert not compare("u", band, RateEntry(SQRT_LOG), 0.05, band_limit=1.1).passed
    text = format_table([ok, bad])
    assert "PASS" in text and "FAIL" in text and "-0.3800" in text


# --- solution-space norms ----------------------------------------------------

def _series(n, eps, const=1.0, t=None):
    t = np.linspace(0, 10, 11) if t is None else t
    s = n / 2 + eps
    keys = ["u", f"u_H{s:g}", "ut", f"ut_H{s:g}"]
    return NormSeries(t, {k: np.full_like(t, const) for k in keys})


def test_solution_norm_zero_field():
    s = _series(3, 0.1, 0.0)
    for kind, n in (("X1", 3), ("Y", 3)):
        assert solution_space_norm(s, kind, 0.1, n).value == 0.0


def test_solution_norm_constant_trajectory():
    n, eps = 3, 0.1
    res = solution_space_norm(_series(n, eps), "X1", eps, n)
    t = 10.0
    want = (1 + t) ** (n / 8 - 0.25) + (1 + t) ** ((n - 1 + eps) / 4) + (1 + t) ** (n / 8)
    assert res.attained_at == t and res.value == pytest.approx(want, rel=1e-14)


@given(st.floats(0.01, 100.0))
@settings(max_examples=30, deadline=None)
def test_solution_norm_homogeneous(lam):
    a = solution_space_norm(_series(4, 0.1, 0.3), "Y", 0.1, 4).value
    b = solution_space_norm(_series(4, 0.1, 0.3 * lam), "Y", 0.1, 4).value
    assert b == pytest.approx(lam * a, rel=1e-12)


def test_solution_norm_missing_series():
    s = NormSeries(np.arange(3.0), {"u": np.ones(3)})
    with pytest.raises(MissingNormError):
        solution_space_norm(s, "X1", 0.1, 3)


def test_solution_norm_space_checks():
    s = _series(5, 0.1)
    assert solution_space_norm(s, "X2", 0.1, 5).value > 0
    with pytest.raises(ValueError):
        solution_space_norm(s, "X1", 0.1, 5)
    with pytest.raises(ValueError):
        solution_space_norm(_series(3, 0.1), "X2", 0.1, 3)
    assert solution_space_for(5, 0) == "X2" and solution_space_for(3, 0) == "X1"
    assert solution_space_for(3, 1) == "Y"


def test_ell_weight():
    assert ell_weight(2, 0.0) == pytest.approx(1.0)
    assert ell_weight(3, 1.0) == pytest.approx(2 ** 0.125)
    assert ell_weight(4, 3.0) == pytest.approx(2 ** 0.5)
    with pytest.raises(ValueError):
        ell_weight(5, 1.0)


def test_auxiliary_exponents():
    a = auxiliary_exponents(0.1)
    assert a.theta0 + a.theta1 * 0.1 == pytest.approx(1.0)
    assert a.eps2 == pytest.approx(13 * 0.1 / (4 * 5.2))

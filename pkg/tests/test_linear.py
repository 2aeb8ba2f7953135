import math
import warnings

import numpy as np
import pytest

from oracles import gaussian_integral, loglog_slope, ode_propagator
from sdwave.linear import (
    LinearRunConfig,
    QuadratureRangeWarning,
    RadialProfile,
    RadialQuadrature,
    evolve_linear,
    initial_spectrum,
    l2_norm,
    linear_decay_run,
    moments,
    profile_residual,
    quadrature_for,
    sphere_area,
    split_key,
    time_ladder,
)
from sdwave.symbols import DampingParams, multipliers

ZERO = RadialProfile()
GAUSS = RadialProfile("gaussian")


def spectrum(dim, u0=GAUSS, u1=ZERO, nu=1.0, r_max=12.0, **kw):
    p = DampingParams(nu, dim)
    return initial_spectrum(p, u0, u1, RadialQuadrature.build(dim, r_max, **kw))


def test_sphere_area():
    assert sphere_area(1) == 2
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("dim", [1, 2, 3, 4, 5])
def test_quadrature_gaussian_oracle(dim):
    q = RadialQuadrature.build(dim, 12.0)
    for a in (0.5, 1.0, 4.0):
        got = q.integrate(np.exp(-a * q.nodes**2))
        assert got == pytest.approx(gaussian_integral(dim, a), rel=1e-12)


def test_evolve_identity_at_zero():
    s = spectrum(3, u1=GAUSS)
    e = evolve_linear(s, 0.0)
    np.testing.assert_array_equal(e.u_hat, s.u_hat)
    np.testing.assert_array_equal(e.ut_hat, s.ut_hat)


def test_evolve_rejects_negative():
    with pytest.raises(ValueError):
        evolve_linear(spectrum(2), -1.0)


def test_zero_node_follows_velocity_mass():
    p = DampingParams(1.0, 2)
    q = RadialQuadrature(2, np.array([0.0, 0.5]), np.array([1.0, 1.0]))
    s = evolve_linear(initial_spectrum(p, ZERO, GAUSS, q), 7.0)
    assert s.u_hat[0] == pytest.approx(7.0 * GAUSS.mass(2), rel=1e-15)


def test_evolve_single_node_against_oracle():
    p = DampingParams(1.0, 1)
    q = RadialQuadrature(1, np.array([2.0]), np.array([1.0]))
    u0 = RadialProfile("gaussian", 1 / math.sqrt(4 * math.pi), math.sqrt(2))  # û₀ = e^{-r²}
    spec = initial_spectrum(p, u0, ZERO, q)
    assert spec.u_hat[0].real == pytest.approx(math.exp(-4.0), rel=1e-14)
    out = evolve_linear(spec, 1.0)
    k0 = ode_propagator(1.0, 2.0, 1.0)[0][0]
    assert out.u_hat[0].real == pytest.approx(k0 * math.exp(-4.0), rel=1e-10)


def test_time_composability():
    s = spectrum(3, u1=RadialProfile("gaussian", 0.7, 1.3))
    for t1, t2 in ((0.5, 2.0), (10.0, 30.0), (3.0, 0.0)):
        a = evolve_linear(s, t1 + t2)
        b = evolve_linear(evolve_linear(s, t1), t2)
        scale = np.abs(s.u_hat).max() + np.abs(s.ut_hat).max()
        assert np.max(np.abs(a.u_hat - b.u_hat)) <= 1e-12 * scale
        assert np.max(np.abs(a.ut_hat - b.ut_hat)) <= 1e-12 * scale


def test_energy_nonincreasing_per_node():
    s = spectrum(2, u1=GAUSS)
    r = s.quadrature.nodes
    prev = None
    for t in np.linspace(0, 20, 81):
        e = evolve_linear(s, float(t))
        energy = np.abs(e.ut_hat) ** 2 + r**2 * np.abs(e.u_hat) ** 2
        if prev is not None:
            assert np.all(energy <= prev * (1 + 1e-13) + 1e-300)
        prev = energy


def test_norm_of_zero_field():
    assert l2_norm(spectrum(3, u0=ZERO), "u") == 0.0


@pytest.mark.parametrize("dim", [1, 2, 3, 5])
def test_plancherel_closed_form(dim):
    # ‖A e^{-|x|²/2σ²}‖² = A² (πσ²)^{n/2}
    prof = RadialProfile("gaussian", 1.7, 0.8)
    s = spectrum(dim, u0=prof, r_max=prof.cutoff_radius(dim))
    exact = 1.7 * (math.pi * 0.8**2) ** (dim / 4)
    assert l2_norm(s, "u") == pytest.approx(exact, rel=1e-8)


def test_plancherel_one_dimensional_bump():
    # û = e^{-r²} in n = 1: ‖u‖² = (2π)^{-1} ∫ e^{-2ξ²} dξ
    u0 = RadialProfile("gaussian", 1 / math.sqrt(4 * math.pi), math.sqrt(2))
    s = spectrum(1, u0=u0, r_max=10.0)
    assert l2_norm(s, "u") == pytest.approx(math.sqrt(gaussian_integral(1, 2.0) / (2 * math.pi)), rel=1e-8)


def test_sobolev_norm_closed_form():
    # ‖(-Δ)^{1/2} e^{-|x|²/2}‖² in n = 3: (2π)^{-3}(2π)^3 ∫ r² e^{-r²} dξ = 4π·(3√π/8)
    s = spectrum(3, r_max=14.0)
    want = math.sqrt(4 * math.pi * 3 * math.sqrt(math.pi) / 8)
    assert l2_norm(s, "u", 1.0) == pytest.approx(want, rel=1e-10)
    with pytest.raises(ValueError):
        l2_norm(s, "u", -1.0)
    with pytest.raises(ValueError):
        l2_norm(s, "v")


def test_quadrature_tail_warning():
    s = spectrum(2, r_max=2.0)
    with pytest.warns(QuadratureRangeWarning):
        l2_norm(s, "u")


def test_moments():
    n = 3
    unit = RadialProfile("gaussian", (2 * math.pi) ** (-n / 2), 1.0)
    assert moments(ZERO, unit, n).p1 == pytest.approx(1.0, rel=1e-14)
    assert moments(RadialProfile("gaussian_laplacian"), ZERO, n).p0 == 0.0
    g = RadialProfile("gaussian", 2.5, 0.7)
    assert moments(g, ZERO, n).p0 == pytest.approx(2.5 * (2 * math.pi * 0.49) ** 1.5, rel=1e-14)


def test_physical_and_hat_agree():
    # numerical Fourier transform of the physical profile at a few frequencies (n = 1)
    from scipy.integrate import quad

    for fam in ("gaussian", "gaussian_laplacian", "poisson"):
        prof = RadialProfile(fam, 1.3, 0.9)
        for xi in (0.0, 0.7, 2.0):
            f = lambda x: float(prof.physical(x, 1))  # noqa: E731
            if xi == 0:
                val = 2 * quad(f, 0, np.inf, epsabs=1e-13, limit=400)[0]
            else:  # Fourier-weighted rule copes with the slow Poisson tail
                val = 2 * quad(f, 0, np.inf, weight="cos", wvar=xi)[0]
            assert val == pytest.approx(float(prof.hat(xi, 1)), rel=1e-7, abs=1e-10)


def test_profile_residual_zero_data():
    s = evolve_linear(spectrum(2, u0=ZERO), 3.0)
    assert profile_residual(s, moments(ZERO, ZERO, 2)) == 0.0


def test_profile_residual_small_time_finite():
    s = spectrum(2, u0=GAUSS, u1=GAUSS, r_max=GAUSS.cutoff_radius(2))
    mom = moments(GAUSS, GAUSS, 2)
    with warnings.catch_warnings():
        # at t ≈ 0 the profile symbols are not yet damped, so the tail warning is expected
        warnings.simplefilter("ignore", QuadratureRangeWarning)
        vals = [profile_residual(evolve_linear(s, t), mom) for t in (1e-6, 1e-3, 1e-1)]
    assert all(math.isfinite(v) for v in vals)
    with pytest.raises(ValueError):
        profile_residual(s, mom)


def test_time_ladder():
    t = time_ladder(1, 1e4, 40)
    assert t.size == 161 and t[0] == 1 and t[-1] == pytest.approx(1e4)
    with pytest.raises(ValueError):
        time_ladder(5, 1, 10)


def test_zero_data_run_is_identically_zero():
    res = linear_decay_run(LinearRunConfig(DampingParams(1.0, 4), ZERO, ZERO, t_max=100, per_decade=5,
                                           bands=True))
    for v in res.norms.values.values():
        assert np.all(v == 0)
    assert np.all(res.residuals.residual == 0)


def test_run_is_deterministic():
    cfg = LinearRunConfig(DampingParams(1.0, 3), GAUSS, ZERO, t_max=100, per_decade=10)
    a, b = linear_decay_run(cfg), linear_decay_run(cfg)
    for k in a.norms.values:
        np.testing.assert_array_equal(a.norms[k], b.norms[k])


def test_band_split_recombines():
    cfg = LinearRunConfig(DampingParams(1.0, 3), GAUSS, GAUSS, t_max=100, per_decade=10, bands=True,
                          residuals=False)
    res = linear_decay_run(cfg)
    for w in ("u", "ut"):
        parts = [res.norms[f"{w}@{b}"] for b in ("low", "middle", "high")]
        # triangle inequality for the split pieces
        assert np.all(res.norms[w] <= sum(parts) * (1 + 1e-12))
        # 0 ≤ χ ≤ 1 pointwise, so no piece exceeds the whole
        assert np.all(np.max(parts, axis=0) <= res.norms[w] * (1 + 1e-12))
    assert split_key("u@low") == ("u", "low") and split_key("ut_H1") == ("ut_H1", "all")


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_quadrature_refinement(dim):
    base = LinearRunConfig(DampingParams(1.0, dim), GAUSS, GAUSS, t_max=1e4, per_decade=4,
                           s_values=(1.0,), residuals=True)
    fine = LinearRunConfig(DampingParams(1.0, dim), GAUSS, GAUSS, t_max=1e4, per_decade=4,
                           s_values=(1.0,), residuals=True, refine=2)
    a, b = linear_decay_run(base), linear_decay_run(fine)
    for k in a.norms.values:
        np.testing.assert_allclose(a.norms[k], b.norms[k], rtol=1e-6)
    np.testing.assert_allclose(a.residuals.residual, b.residuals.residual, rtol=1e-6)


def test_quadrature_resolves_oscillation():
    cfg = LinearRunConfig(DampingParams(1.0, 2))
    q = quadrature_for(cfg, 1e4)
    small = q.nodes[q.nodes < 0.05]
    # at least a few nodes per period π/t of sin(rt)
    assert np.max(np.diff(small)) < math.pi / 1e4


def test_slope_u1_case_n3():
    cfg = LinearRunConfig(DampingParams(1.0, 3), ZERO, GAUSS, t_min=100, t_max=1e4, per_decade=20,
                          residuals=False)
    res = linear_decay_run(cfg)
    assert loglog_slope(res.norms.times, res.norms["u"]) == pytest.approx(-0.125, abs=0.05)
    assert loglog_slope(res.norms.times, res.norms["ut"]) == pytest.approx(-0.375, abs=0.05)


def test_multipliers_are_what_evolve_uses():
    s = spectrum(2, u0=GAUSS, u1=GAUSS)
    out = evolve_linear(s, 2.5)
    k0, k1, _, _ = multipliers(1.0, 2.5, s.quadrature.nodes)
    np.testing.assert_allclose(out.u_hat, k0 * s.u_hat + k1 * s.ut_hat, rtol=0, atol=0)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        RadialProfile("boxcar")
    with pytest.raises(ValueError):
        RadialProfile("gaussian", 1.0, 0.0)


def test_no_warnings_on_default_run():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = linear_decay_run(LinearRunConfig(DampingParams(1.0, 3), GAUSS, ZERO, t_max=100, per_decade=5))
    assert res.warnings == []


@pytest.mark.parametrize("dim", [2, 3])
def test_profile_residual_rates_by_data_family(dim):
    # Gaussian data has a finite first moment and the residual gains t^{-1/4};
    # the Poisson kernel (kink at ξ = 0) shows the sharp t^{-n/8}
    want = {"gaussian": -(dim + 2) / 8, "poisson": -dim / 8}
    for fam, slope in want.items():
        cfg = LinearRunConfig(DampingParams(1.0, dim), ZERO, RadialProfile(fam), t_max=1e4, per_decade=20)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", QuadratureRangeWarning)
            rs = linear_decay_run(cfg).residuals
        last = rs.times >= 1e3
        assert loglog_slope(rs.times[last], rs.residual[last]) == pytest.approx(slope, abs=0.03)

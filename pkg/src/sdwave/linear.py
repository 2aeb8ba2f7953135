"""Radially symmetric linear solutions by direct multiplier quadrature.

Fourier convention used throughout the package:

    f̂(ξ) = ∫ f(x) e^{-ix·ξ} dx,      ‖f‖²_{L²} = (2π)^{-n} ∫ |f̂(ξ)|² dξ.

For radial data every L² quantity reduces to a one-dimensional integral in
r = |ξ| with surface measure ω_{n-1} r^{n-1}. The solution at time t is
obtained node-wise from the exact multipliers, so there is no time
discretisation at all.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .symbols import BandCutoffs, DampingParams, band_weights, multipliers, profile_symbol


class QuadratureRangeWarning(UserWarning):
    """The integrand is not negligible at the last quadrature node."""


def sphere_area(dim: int) -> float:
    """Surface area ω_{n-1} of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


# ---------------------------------------------------------------------------
# Data


_FAMILIES = ("zero", "gaussian", "gaussian_laplacian", "poisson")


@dataclass(frozen=True)
class RadialProfile:
    """Closed-form radial initial datum.

    family
        ``gaussian``: A e^{-|x|²/2σ²};
        ``gaussian_laplacian``: A (n - |x|²/σ²) e^{-|x|²/2σ²} (= -σ²Δ of the
        gaussian, zero mass);
        ``poisson``: A·P_σ(x), the Poisson kernel with transform A e^{-σr}
        (unit mass for A = 1, infinite first moment);
        ``zero``.
    amplitude
        A above.
    width
        σ above.
    """

    family: str = "zero"
    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown data family {self.family!r}; expected one of {_FAMILIES}")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValueError("width must be positive")

    @property
    def is_zero(self) -> bool:
        return self.family == "zero" or self.amplitude == 0.0

    def hat(self, r, dim: int):
        r = np.asarray(r, dtype=float)
        A, s = self.amplitude, self.width
        if self.is_zero:
            return np.zeros_like(r)
        if self.family == "poisson":
            return A * np.exp(-s * r)
        g = A * (2 * math.pi * s * s) ** (dim / 2) * np.exp(-0.5 * s * s * r * r)
        if self.family == "gaussian_laplacian":
            return g * s * s * r * r
        return g

    def physical(self, radius, dim: int):
        """Values in x-space at distance ``radius`` from the origin."""
        x2 = np.asarray(radius, dtype=float) ** 2
        A, s = self.amplitude, self.width
        if self.is_zero:
            return np.zeros_like(x2)
        if self.family == "poisson":
            c = math.gamma((dim + 1) / 2) / math.pi ** ((dim + 1) / 2)
            return A * c * s / (s * s + x2) ** ((dim + 1) / 2)
        g = A * np.exp(-0.5 * x2 / (s * s))
        if self.family == "gaussian_laplacian":
            return g * (dim - x2 / (s * s))
        return g

    def mass(self, dim: int) -> float:
        return float(self.hat(0.0, dim))

    def cutoff_radius(self, dim: int, extra_power: float = 0.0, rel: float = 1e-34) -> float:
        """Frequency beyond which |û|² r^{n-1+extra_power} is below ``rel`` of its peak."""
        if self.is_zero:
            return 1.0
        grid = np.geomspace(1e-3, 1e4, 4000)
        val = self.hat(grid, dim) ** 2 * grid ** (dim - 1 + extra_power)
        peak = val.max()
        above = np.nonzero(val > rel * peak)[0]
        return float(grid[min(above[-1] + 1, grid.size - 1)])

    def support_radius(self, rel: float = 1e-12) -> float:
        """Physical radius beyond which the datum is below ``rel`` of its peak."""
        if self.is_zero:
            return 0.0
        if self.family == "poisson":
            return math.inf
        s = self.width
        # the polynomial factor of gaussian_laplacian only adds a few widths
        pad = 2.0 if self.family == "gaussian_laplacian" else 0.0
        return s * (math.sqrt(2 * math.log(1 / rel)) + pad)

    def l1_norm(self, dim: int) -> float:
        """‖u‖_{L¹} (closed form)."""
        if self.is_zero:
            return 0.0
        if self.family in ("gaussian", "poisson"):
            return abs(self.mass(dim))
        # ∫ |n - ρ²/σ²| e^{-ρ²/2σ²} dx via the radial gamma integrals
        s = self.width
        k = 0.5 * dim
        from scipy.special import gammainc

        c = abs(self.amplitude) * (2 * math.pi * s * s) ** k
        # E|n - X| for X ~ chi²_n, split at X = n
        p_low, p_low2 = gammainc(k, k * 1.0), gammainc(k + 1, k * 1.0)
        inside = dim * p_low - dim * p_low2
        outside = dim * (1 - p_low2) - dim * (1 - p_low)
        return float(c * (inside + outside))


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class RadialQuadrature:
    """Composite Gauss-Legendre rule for ∫_{R^n} g(|ξ|) dξ.

    ``weights`` already contain ω_{n-1} r^{n-1}.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str = "gauss-legendre panels, log-spaced"

    @classmethod
    def build(
        cls,
        dim: int,
        r_max: float,
        r_min: float = 1e-6,
        panels_per_decade: int = 8,
        order: int = 16,
        resolve_time: float | None = None,
        nu: float | None = None,
        refine: int = 1,
    ) -> "RadialQuadrature":
        """Panels: [0, r_min], geometric panels up to r_max, plus uniform panels of
        width π/t where a mode oscillating like sin(rt) is not yet damped away."""
        if not 0 < r_min < r_max:
            raise ValueError("need 0 < r_min < r_max")
        decades = math.log10(r_max / r_min)
        n_geo = max(1, int(math.ceil(decades * panels_per_decade * refine)))
        edges = [np.array([0.0]), np.geomspace(r_min, r_max, n_geo + 1)]
        if resolve_time is not None and resolve_time > 0:
            damp = 1.0 if nu is None else nu
            r_osc = min(r_max, 2.0 * (2.0 / damp) ** (1.0 / 3.0), (80.0 / (damp * resolve_time)) ** 0.25)
            width = math.pi / resolve_time / refine
            n_uni = int(math.ceil(r_osc / width))
            if n_uni > 1:
                edges.append(np.linspace(0.0, r_osc, n_uni + 1))
        e = np.unique(np.concatenate(edges))
        # drop slivers produced by merging two edge families
        keep = np.concatenate([[True], np.diff(e) > 1e-9 * e[1:]])
        e = e[keep]
        x, w = np.polynomial.legendre.leggauss(order)
        a, b = e[:-1, None], e[1:, None]
        nodes = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
        wts = (0.5 * (b - a) * w).ravel()
        wts = wts * sphere_area(dim) * nodes ** (dim - 1)
        return cls(dim, nodes, wts)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def self_test(self, a: float = 1.0) -> float:
        """Relative error on ∫ e^{-a|ξ|²} dξ = (π/a)^{n/2}."""
        exact = (math.pi / a) ** (self.dim / 2)
        return abs(self.integrate(np.exp(-a * self.nodes**2)) - exact) / exact


# ---------------------------------------------------------------------------
# Spectra


@dataclass(frozen=True)
class RadialSpectrum:
    params: DampingParams
    quadrature: RadialQuadrature
    u_hat: np.ndarray
    ut_hat: np.ndarray
    time: float
    u0: RadialProfile
    u1: RadialProfile


def initial_spectrum(params: DampingParams, u0: RadialProfile, u1: RadialProfile,
                     quadrature: RadialQuadrature) -> RadialSpectrum:
    if quadrature.dim != params.dim:
        raise ValueError("quadrature dimension does not match params")
    r = quadrature.nodes
    return RadialSpectrum(
        params, quadrature,
        u0.hat(r, params.dim).astype(complex), u1.hat(r, params.dim).astype(complex),
        0.0, u0, u1,
    )


def propagate_modes(nu: float, t: float, r, u_hat, ut_hat):
    """Apply the exact 2x2 mode propagator over duration t."""
    k0, k1, dk0, dk1 = multipliers(nu, t, r)
    return k0 * u_hat + k1 * ut_hat, dk0 * u_hat + dk1 * ut_hat


def evolve_linear(spec: RadialSpectrum, t: float) -> RadialSpectrum:
    """Advance ``spec`` by duration t (from t = 0 this is the solution at time t)."""
    if not (math.isfinite(t) and t >= 0):
        raise ValueError("t must be nonnegative")
    u, ut = propagate_modes(spec.params.nu, t, spec.quadrature.nodes, spec.u_hat, spec.ut_hat)
    return replace(spec, u_hat=u, ut_hat=ut, time=spec.time + t)


def _plancherel(quad: RadialQuadrature, values, s: float, what: str, reference: float | None = None) -> float:
    """Radial Plancherel integral; warns if the last node is not negligible against ``reference``
    (defaults to the integral itself)."""
    r = quad.nodes
    dens = np.abs(values) ** 2
    if s:
        dens = dens * r ** (2 * s)
    contrib = quad.weights * dens
    total = contrib.sum()
    ref = total if reference is None else reference
    if ref > 0 and contrib[-1] > 1e-12 * ref:
        warnings.warn(f"{what}: integrand not negligible at r_max={r[-1]:.3g}", QuadratureRangeWarning, stacklevel=3)
    return math.sqrt(total / (2 * math.pi) ** quad.dim)


def l2_norm(spec: RadialSpectrum, which: str = "u", s: float = 0.0) -> float:
    """‖f‖_{Ḣ^s} of f = u or u_t (s = 0 is the L² norm)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if which == "u":
        vals = spec.u_hat
    elif which == "ut":
        vals = spec.ut_hat
    else:
        raise ValueError("which must be 'u' or 'ut'")
    return _plancherel(spec.quadrature, vals, s, f"norm of {which}")


@dataclass(frozen=True)
class Moments:
    p0: float
    p1: float


def moments(u0: RadialProfile, u1: RadialProfile, dim: int) -> Moments:
    """Masses P_j = ∫ u_j dx = û_j(0)."""
    return Moments(u0.mass(dim), u1.mass(dim))


def profile_residual(spec: RadialSpectrum, mom: Moments, include_nu: bool = True) -> float:
    """‖u(t) - P₀H₀(t) - P₁H₁(t)‖_{L²}."""
    if spec.time <= 0:
        raise ValueError("profile residual needs t > 0")
    prof = profile_symbol(spec.params, spec.time, spec.quadrature.nodes, include_nu=include_nu)
    diff = spec.u_hat - mom.p0 * prof.h0 - mom.p1 * prof.h1
    return _plancherel(spec.quadrature, diff, 0.0, "profile residual")


# ---------------------------------------------------------------------------
# Runs


def sobolev_name(which: str, s: float) -> str:
    """Series key for ‖f‖_{Ḣ^s}; plain ``u`` / ``ut`` for s = 0."""
    return which if s == 0 else f"{which}_H{s:g}"


BAND_NAMES = ("low", "middle", "high")


def band_name(key: str, band: str) -> str:
    return f"{key}@{band}"


def split_key(key: str) -> tuple[str, str]:
    """``u@low`` -> (``u``, ``low``); unbanded keys map to band ``all``."""
    base, _, band = key.partition("@")
    return base, band or "all"


def band_norms(spec: RadialSpectrum, cutoffs: BandCutoffs) -> dict[str, float]:
    """L² norms of χ_L u, χ_M u, χ_H u and likewise for u_t.

    Truncation is judged against the full (unsplit) norm: a band that is
    itself negligible does not need a relatively accurate tail."""
    quad = spec.quadrature
    chis = band_weights(cutoffs, quad.nodes)
    out = {}
    for which, vals in (("u", spec.u_hat), ("ut", spec.ut_hat)):
        ref = float(np.sum(quad.weights * np.abs(vals) ** 2))
        for name, chi in zip(BAND_NAMES, chis):
            out[band_name(which, name)] = _plancherel(quad, chi * vals, 0.0, f"{name} band of {which}", ref)
    return out


@dataclass
class NormSeries:
    times: np.ndarray
    values: dict[str, np.ndarray]
    valid_until: float = math.inf

    def __getitem__(self, key):
        return self.values[key]

    def names(self):
        return list(self.values)


@dataclass
class ProfileResidualSeries:
    times: np.ndarray
    residual: np.ndarray
    leading: np.ndarray
    residual_literal: np.ndarray | None = None


@dataclass(frozen=True)
class LinearRunConfig:
    params: DampingParams
    u0: RadialProfile = RadialProfile()
    u1: RadialProfile = RadialProfile("gaussian")
    t_min: float = 1.0
    t_max: float = 1e4
    per_decade: int = 40
    s_values: tuple[float, ...] = ()
    residuals: bool = True
    bands: bool = False
    r_min: float = 1e-6
    panels_per_decade: int = 8
    refine: int = 1

    def times(self) -> np.ndarray:
        return time_ladder(self.t_min, self.t_max, self.per_decade)


def time_ladder(t_min: float, t_max: float, per_decade: int) -> np.ndarray:
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    count = int(round(math.log10(t_max / t_min) * per_decade)) + 1
    return np.geomspace(t_min, t_max, max(count, 2))


@dataclass
class LinearRunResult:
    config: LinearRunConfig
    norms: NormSeries
    residuals: ProfileResidualSeries | None
    warnings: list[str] = field(default_factory=list)


def quadrature_for(cfg: LinearRunConfig, t: float | None) -> RadialQuadrature:
    n = cfg.params.dim
    top = max(cfg.s_values, default=0.0) + 2.0
    r_max = max(cfg.u0.cutoff_radius(n, 2 * top), cfg.u1.cutoff_radius(n, 2 * top))
    return RadialQuadrature.build(
        n, r_max, r_min=cfg.r_min, panels_per_decade=cfg.panels_per_decade,
        resolve_time=t, nu=cfg.params.nu, refine=cfg.refine,
    )


def linear_decay_run(cfg: LinearRunConfig) -> LinearRunResult:
    """Norms (and profile residuals) on a geometric time ladder."""
    times = cfg.times()
    n = cfg.params.dim
    names = ["u", "ut"] + [sobolev_name(w, s) for s in cfg.s_values for w in ("u", "ut") if s > 0]
    cutoffs = BandCutoffs.for_params(cfg.params) if cfg.bands else None
    if cutoffs is not None:
        names += [band_name(w, b) for w in ("u", "ut") for b in BAND_NAMES]
    vals = {k: np.empty(times.size) for k in names}
    res = np.empty(times.size)
    res_lit = np.empty(times.size)
    mom = moments(cfg.u0, cfg.u1, n)
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", QuadratureRangeWarning)
        for i, t in enumerate(times):
            quad = quadrature_for(cfg, t)
            spec = evolve_linear(initial_spectrum(cfg.params, cfg.u0, cfg.u1, quad), float(t))
            vals["u"][i] = l2_norm(spec, "u")
            vals["ut"][i] = l2_norm(spec, "ut")
            for s in cfg.s_values:
                if s > 0:
                    vals[sobolev_name("u", s)][i] = l2_norm(spec, "u", s)
                    vals[sobolev_name("ut", s)][i] = l2_norm(spec, "ut", s)
            if cutoffs is not None:
                for k, v in band_norms(spec, cutoffs).items():
                    vals[k][i] = v
            if cfg.residuals:
                res[i] = profile_residual(spec, mom)
                res_lit[i] = profile_residual(spec, mom, include_nu=False)
    for w in caught:
        msg = str(w.message)
        if msg not in notes:
            notes.append(msg)
    residuals = None
    if cfg.residuals:
        residuals = ProfileResidualSeries(times, res, (1 + times) ** (-n / 8 + 0.25), res_lit)
    return LinearRunResult(cfg, NormSeries(times, vals), residuals, notes)

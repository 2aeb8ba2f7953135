"""Frequency-side objects for u_tt - Δu + ν(-Δ)²u_t = F.

Every mode of the Fourier-transformed equation is a damped oscillator

    û_tt + ν r⁴ û_t + r² û = 0,        r = |ξ|,

with characteristic roots λ± = m ± δ, m = -ν r⁴/2, δ = ½ sqrt(ν² r⁸ - 4 r²).
The evolution multipliers K̂₀ (displacement) and K̂₁ (velocity) are written
through the midpoint/half-gap pair (m, δ) so that no branch loses accuracy:

* complex pair (δ = iω):   K̂₁ = e^{mt} sin(ωt)/ω
* real pair, |δ|t <= 1:    K̂₁ = e^{mt} sinh(δt)/δ   (covers the double root)
* real pair, |δ|t > 1:     K̂₁ = (e^{λ₊t} - e^{λ₋t})/(λ₊ - λ₋), λ₊ = r²/λ₋

and K̂₀ = ∂_tK̂₁ + ν r⁴ K̂₁, ∂_tK̂₀ = -r² K̂₁.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Relative width of the band |ν²r⁸ - 4r²| that is classified as a double root.
TOL_DISC = 1e-10
# |δ|·t below which the Duhamel weights use the midpoint series instead of
# divided differences of the two roots.
SWITCH_TOL = 0.1
# |δ|·t above which real-pair multipliers switch from the hyperbolic form to
# the two-exponential form (cosh/sinh would overflow).
_HYPERBOLIC_LIMIT = 1.0

REGIME_ZERO = "zero"
REGIME_COMPLEX = "complex-pair"
REGIME_DOUBLE = "double"
REGIME_REAL = "real-pair"
_REGIME_NAMES = (REGIME_ZERO, REGIME_COMPLEX, REGIME_DOUBLE, REGIME_REAL)


@dataclass(frozen=True)
class DampingParams:
    """Physical setup: damping strength, convection vector and dimension."""

    nu: float
    dim: int
    a: tuple[float, ...] = field(default=())

    def __post_init__(self):
        nu = float(self.nu)
        if not math.isfinite(nu) or nu <= 0:
            raise ValueError(f"nu must be a positive finite number, got {self.nu!r}")
        if int(self.dim) != self.dim or not 1 <= self.dim <= 5:
            raise ValueError(f"dimension out of supported range 1..5: {self.dim!r}")
        a = tuple(float(x) for x in self.a) if len(self.a) else (0.0,) * int(self.dim)
        if len(a) != self.dim:
            raise ValueError(f"convection vector needs {self.dim} entries, got {len(a)}")
        if not all(math.isfinite(x) for x in a):
            raise ValueError("convection vector must be finite")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "a", a)

    @property
    def double_root_radius(self) -> float:
        """Frequency (2/ν)^{1/3} where the two roots coincide."""
        return (2.0 / self.nu) ** (1.0 / 3.0)


@dataclass(frozen=True)
class CharRoots:
    lambda_plus: complex
    lambda_minus: complex
    regime: str


@dataclass(frozen=True)
class PropagatorValue:
    """K̂₀, K̂₁ and their time derivatives at one (t, |ξ|), or arrays of them."""

    k0: np.ndarray | float
    k1: np.ndarray | float
    dk0: np.ndarray | float
    dk1: np.ndarray | float

    def matrix(self) -> np.ndarray:
        """The 2x2 mode propagator acting on (û, û_t), stacked on the last two axes."""
        return np.stack(
            [np.stack([self.k0, self.k1], axis=-1), np.stack([self.dk0, self.dk1], axis=-1)],
            axis=-2,
        )


@dataclass(frozen=True)
class ProfileSymbols:
    h0: np.ndarray | float
    h1: np.ndarray | float


def _check_nonneg(name, x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    if np.any(x < 0):
        raise ValueError(f"{name} must be nonnegative")
    return x


def _regime_codes(nu, r, tol_disc=TOL_DISC):
    """Integer regime per node: 0 zero, 1 complex, 2 double, 3 real."""
    r8 = r**8
    disc = nu * nu * r8 - 4.0 * r * r
    code = np.where(disc < 0, 1, 3)
    # relative to the size of the two terms; an absolute floor would flag every tiny r as double
    code = np.where(np.abs(disc) <= tol_disc * np.maximum(4.0 * r * r, nu * nu * r8), 2, code)
    return np.where(r == 0, 0, code)


def _half_gap(nu, r):
    """|δ| = ½ r sqrt(|ν² r⁶ - 4|); imaginary in the complex regime."""
    return 0.5 * r * np.sqrt(np.abs(nu * nu * r**6 - 4.0))


def characteristic_roots(params: DampingParams, xi_mag: float, tol_disc: float = TOL_DISC) -> CharRoots:
    """Roots of λ² + ν r⁴ λ + r² = 0 at r = xi_mag, with regime classification."""
    r = float(_check_nonneg("xi_mag", xi_mag))
    nu = params.nu
    code = int(_regime_codes(nu, np.float64(r), tol_disc))
    m = -0.5 * nu * r**4
    g = float(_half_gap(nu, r))
    if code == 0:
        lp = lm = 0j
    elif code == 1:
        lp, lm = complex(m, g), complex(m, -g)
    elif code == 2:
        lp = lm = complex(m)
    else:
        lm = m - g
        lp = r * r / lm
        lp, lm = complex(lp), complex(lm)
    return CharRoots(lp, lm, _REGIME_NAMES[code])


def multipliers(nu: float, t, r, tol_disc: float = TOL_DISC):
    """Vectorised (K̂₀, K̂₁, ∂_tK̂₀, ∂_tK̂₁) for broadcastable t >= 0, r >= 0."""
    t = _check_nonneg("t", t)
    r = _check_nonneg("xi_mag", r)
    t, r = np.broadcast_arrays(t, r)
    code = _regime_codes(nu, r, tol_disc)
    m = -0.5 * nu * r**4
    g = _half_gap(nu, r)
    g = np.where(code == 2, 0.0, g)
    em = np.exp(m * t)

    k1 = np.empty(r.shape)
    dk1 = np.empty(r.shape)
    k0 = np.empty(r.shape)

    zero = code == 0
    k0[zero], k1[zero], dk1[zero] = 1.0, t[zero], 1.0

    cplx = code == 1
    if np.any(cplx):
        w, tt, mm, e = g[cplx], t[cplx], m[cplx], em[cplx]
        s = np.sin(w * tt) / w
        c = np.cos(w * tt)
        k1[cplx] = e * s
        dk1[cplx] = e * (c + mm * s)
        k0[cplx] = e * (c - mm * s)

    gt = g * t
    hyp = ((code == 2) | (code == 3)) & (gt <= _HYPERBOLIC_LIMIT)
    if np.any(hyp):
        tt, mm, e, x = t[hyp], m[hyp], em[hyp], gt[hyp]
        s = tt * _sinhc(x)
        c = np.cosh(x)
        k1[hyp] = e * s
        dk1[hyp] = e * (c + mm * s)
        k0[hyp] = e * (c - mm * s)

    far = (code == 3) & (gt > _HYPERBOLIC_LIMIT)
    if np.any(far):
        rr, tt = r[far], t[far]
        lm = m[far] - g[far]
        lp = rr * rr / lm
        gap = lp - lm
        ep, en = np.exp(lp * tt), np.exp(lm * tt)
        k1[far] = (ep - en) / gap
        dk1[far] = (lp * ep - lm * en) / gap
        k0[far] = (lp * en - lm * ep) / gap

    dk0 = -(r * r) * k1
    return k0, k1, dk0, dk1


def _sinhc(x):
    """sinh(x)/x for real x >= 0, series below 1e-4."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 + xs * xs / 6.0 + xs**4 / 120.0
    xb = x[~small]
    out[~small] = np.sinh(xb) / xb
    return out


def propagator(params: DampingParams, t, xi_mag) -> PropagatorValue:
    """Evolution multipliers at time t and frequency magnitude xi_mag.

    Scalars in, scalars out; arrays broadcast.
    """
    k0, k1, dk0, dk1 = multipliers(params.nu, t, xi_mag)
    if k0.ndim == 0:
        return PropagatorValue(float(k0), float(k1), float(dk0), float(dk1))
    return PropagatorValue(k0, k1, dk0, dk1)


# ---------------------------------------------------------------------------
# Duhamel weights for exponential integrators

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS
_SERIES_TERMS = 7


def phi_moments(z, jmax: int):
    """J_j(z) = ∫₀¹ u^j e^{zu} du for j = 0..jmax, complex z with Re z <= 0.

    Gauss-Legendre for |z| <= 16, upward recurrence beyond (stable there
    because j < |z|). Returns an array of shape (jmax+1,) + z.shape.
    """
    if jmax >= 16:
        raise ValueError("jmax must be below the recurrence switch radius")
    z = np.asarray(z, dtype=complex)
    out = np.empty((jmax + 1,) + z.shape, dtype=complex)
    near = np.abs(z) <= 16.0
    if np.any(near):
        zn = z[near]
        ez = np.exp(np.multiply.outer(zn, _GL_NODES))
        powers = _GL_NODES[None, :] ** np.arange(jmax + 1)[:, None]
        out[:, near] = np.einsum("kq,nq,q->kn", powers, ez, _GL_WEIGHTS)
    if np.any(~near):
        zf = z[~near]
        ef = np.exp(zf)
        cur = (ef - 1.0) / zf
        out[0, ~near] = cur
        for k in range(1, jmax + 1):
            cur = (ef - k * cur) / zf
            out[k, ~near] = cur
    return out


@dataclass(frozen=True)
class DuhamelWeights:
    """Mode-wise integrals of K̂₁ over one step of length h.

    ``phi1`` = ∫₀ʰ K̂₁(s) ds and ``psi`` = ∫₀ʰ s K̂₁(s) ds; ``k1`` = K̂₁(h).
    A constant forcing N over the step adds (phi1·N, k1·N) to (û, û_t); a
    forcing ramping linearly from 0 to ΔN adds (etd2_u·ΔN, etd2_v·ΔN).
    """

    h: float
    phi1: np.ndarray
    psi: np.ndarray
    k1: np.ndarray

    @property
    def etd2_u(self):
        return self.phi1 - self.psi / self.h

    @property
    def etd2_v(self):
        return self.phi1 / self.h


def duhamel_weights(nu: float, h: float, r, chunk: int = 16384) -> DuhamelWeights:
    """Exact step integrals of K̂₁ for the exponential integrators."""
    h = float(h)
    if not math.isfinite(h) or h <= 0:
        raise ValueError("step must be positive and finite")
    r = _check_nonneg("xi_mag", r)
    shape = r.shape
    flat = r.ravel()
    phi1 = np.empty(flat.shape)
    psi = np.empty(flat.shape)
    for start in range(0, flat.size, chunk):
        sl = slice(start, start + chunk)
        phi1[sl], psi[sl] = _duhamel_block(nu, h, flat[sl])
    _, k1, _, _ = multipliers(nu, h, r)
    return DuhamelWeights(h, phi1.reshape(shape), psi.reshape(shape), k1)


def _duhamel_block(nu, h, r):
    code = _regime_codes(nu, r)
    m = -0.5 * nu * r**4
    g = np.where(code == 2, 0.0, _half_gap(nu, r))
    # δ² carries the sign: negative in the complex regime.
    d2 = np.where(code == 1, -(g * g), g * g)
    gh = g * h
    phi1 = np.empty(r.shape)
    psi = np.empty(r.shape)

    conf = gh < SWITCH_TOL
    if np.any(conf):
        z = m[conf] * h
        x2 = d2[conf] * h * h
        jm = phi_moments(z, 2 * _SERIES_TERMS).real
        s1 = np.zeros(z.shape)
        s2 = np.zeros(z.shape)
        pw = np.ones(z.shape)
        for k in range(_SERIES_TERMS):
            fact = math.factorial(2 * k + 1)
            s1 += jm[2 * k + 1] * pw / fact
            s2 += jm[2 * k + 2] * pw / fact
            pw = pw * x2
        phi1[conf] = h * h * s1
        psi[conf] = h**3 * s2

    cplx = (~conf) & (code == 1)
    if np.any(cplx):
        lp = m[cplx] + 1j * g[cplx]
        lm = m[cplx] - 1j * g[cplx]
        jp = phi_moments(lp * h, 1)
        jn = phi_moments(lm * h, 1)
        gap = 2j * g[cplx]
        phi1[cplx] = (h * (jp[0] - jn[0]) / gap).real
        psi[cplx] = (h * h * (jp[1] - jn[1]) / gap).real

    real = (~conf) & (code == 3)
    if np.any(real):
        lm = m[real] - g[real]
        lp = r[real] ** 2 / lm
        jp = phi_moments(lp * h, 1).real
        jn = phi_moments(lm * h, 1).real
        gap = lp - lm
        phi1[real] = h * (jp[0] - jn[0]) / gap
        psi[real] = h * h * (jp[1] - jn[1]) / gap
    return phi1, psi


# ---------------------------------------------------------------------------
# Band cutoffs


def max_cutoff_scale(nu: float) -> float:
    """Upper bound ½(2/ν)^{1/3} on the band scale ρ (exclusive)."""
    return 0.5 * (2.0 / nu) ** (1.0 / 3.0)


def default_rho(nu: float) -> float:
    return 0.9 * max_cutoff_scale(nu)


def _smooth_step(x):
    """C^∞ step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    y = 1.0 - x
    b = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class BandCutoffs:
    """Smooth radial partition χ_L + χ_M + χ_H = 1 at scale ρ."""

    rho: float
    nu: float | None = None

    def __post_init__(self):
        rho = float(self.rho)
        if not math.isfinite(rho) or rho <= 0:
            raise ValueError("rho must be positive")
        if self.nu is not None and rho >= max_cutoff_scale(self.nu):
            raise ValueError(
                f"rho={rho} violates rho < ½(2/ν)^(1/3) = {max_cutoff_scale(self.nu):.6g}"
            )
        object.__setattr__(self, "rho", rho)

    @classmethod
    def for_params(cls, params: DampingParams, rho: float | None = None) -> "BandCutoffs":
        return cls(default_rho(params.nu) if rho is None else rho, params.nu)

    def low(self, r):
        # 1 on [0, ρ/2], 0 on [ρ, ∞)
        return 1.0 - _smooth_step((np.asarray(r, dtype=float) - 0.5 * self.rho) / (0.5 * self.rho))

    def high(self, r):
        # 0 on [0, 2ρ], 1 on [4ρ, ∞)
        return _smooth_step((np.asarray(r, dtype=float) - 2.0 * self.rho) / (2.0 * self.rho))

    def middle(self, r):
        return 1.0 - self.low(r) - self.high(r)


def band_weights(cutoffs: BandCutoffs, xi_mag):
    """(χ_L, χ_M, χ_H) at xi_mag; scalars for scalar input."""
    r = _check_nonneg("xi_mag", xi_mag)
    lo, hi = cutoffs.low(r), cutoffs.high(r)
    mid = 1.0 - lo - hi
    if r.ndim == 0:
        return float(lo), float(mid), float(hi)
    return lo, mid, hi


# ---------------------------------------------------------------------------
# Diffusion-wave profile


def profile_symbol(params: DampingParams, t, xi_mag, include_nu: bool = True) -> ProfileSymbols:
    """Ĥ₀ = e^{-νt r⁴/2} cos(tr), Ĥ₁ = e^{-νt r⁴/2} sin(tr)/r.

    ``include_nu=False`` drops ν from the exponent (the ν = 1 normalisation).
    """
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise ValueError("t must be positive")
    r = _check_nonneg("xi_mag", xi_mag)
    t, r = np.broadcast_arrays(t, r)
    coef = params.nu if include_nu else 1.0
    damp = np.exp(-0.5 * coef * t * r**4)
    tr = t * r
    small = tr < 1e-4
    safe_r = np.where(small, 1.0, r)
    sinc_t = np.where(small, t * (1.0 - tr * tr / 6.0), np.sin(tr) / safe_r)
    h0 = damp * np.cos(tr)
    h1 = damp * sinc_t
    if h0.ndim == 0:
        return ProfileSymbols(float(h0), float(h1))
    return ProfileSymbols(h0, h1)


def as_params(nu: float, dim: int, a: Sequence[float] = ()) -> DampingParams:
    return DampingParams(nu=nu, dim=dim, a=tuple(a))

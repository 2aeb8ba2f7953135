"""Pseudospectral solver on the periodic box [-L, L)^n, n ≤ 3.

Spectral arrays use numpy's ``rfftn`` layout (last axis halved) but are
scaled to approximate the continuous transform f̂(ξ) = ∫ f e^{-ix·ξ} dx on
ξ = πk/L, so the same multipliers and norms as in :mod:`sdwave.linear`
apply verbatim. The linear flow is exact per mode; the Duhamel integral is
handled by first or second order exponential time differencing.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .linear import NormSeries, RadialProfile, sobolev_name
from .symbols import DampingParams, duhamel_weights, multipliers

BLOWUP_THRESHOLD = 1e8


class BlowUpError(RuntimeError):
    """A field left the small-data regime (or turned non-finite)."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class AdmissibilityWarning(UserWarning):
    """Exponent outside the hypotheses of the global existence results."""


# ---------------------------------------------------------------------------
# Grid


@dataclass(frozen=True)
class PeriodicGrid:
    dim: int
    n: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("periodic grids support dimensions 1..3")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError("points per axis must be a power of two, at least 8")
        if not self.half_width > 0:
            raise ValueError("half-width must be positive")

    @property
    def dx(self) -> float:
        return 2 * self.half_width / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    def axis(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n)

    def radius(self) -> np.ndarray:
        """|x| on the physical grid."""
        ax = self.axis()
        grids = np.meshgrid(*([ax] * self.dim), indexing="ij", sparse=True)
        return np.sqrt(sum(g * g for g in grids))

    def _indices(self):
        full = np.fft.fftfreq(self.n, 1.0 / self.n).round().astype(int)
        half = np.arange(self.n // 2 + 1)
        out = []
        for i in range(self.dim):
            k = half if i == self.dim - 1 else full
            sh = [1] * self.dim
            sh[i] = k.size
            out.append(k.reshape(sh))
        return out

    @cached_property
    def _phase(self) -> np.ndarray:
        total = sum(self._indices())
        return np.where(total % 2 == 0, 1.0, -1.0)

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        """Broadcastable frequency components π k_i / L."""
        return tuple(np.pi / self.half_width * k for k in self._indices())

    @cached_property
    def xi_deriv(self) -> tuple[np.ndarray, ...]:
        """Frequency components for first derivatives: Nyquist entries zeroed."""
        out = []
        for k in self._indices():
            kk = np.where(np.abs(k) == self.n // 2, 0, k)
            out.append(np.pi / self.half_width * kk)
        return tuple(out)

    @cached_property
    def xi_mag(self) -> np.ndarray:
        return np.sqrt(sum(np.broadcast_to(x * x, self.spectral_shape) for x in self.xi))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cut = self.n // 3
        m = np.ones(self.spectral_shape, dtype=bool)
        for k in self._indices():
            m &= np.abs(k) <= cut
        return m

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Multiplicities of rfft modes in the full spectrum (1 or 2)."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = w[-1] = 1.0
        return np.broadcast_to(w, self.spectral_shape)

    def forward(self, f) -> np.ndarray:
        return sfft.rfftn(f) * (self.dx**self.dim) * self._phase

    def inverse(self, f_hat) -> np.ndarray:
        return sfft.irfftn(f_hat * self._phase, s=self.shape) / self.dx**self.dim

    def norm(self, f_hat, s: float = 0.0) -> float:
        """‖f‖_{Ḣ^s} by discrete Plancherel: (2L)^{-n} Σ_k |ξ_k|^{2s} |f̂_k|²."""
        dens = np.abs(f_hat) ** 2
        if s:
            dens = dens * self.xi_mag ** (2 * s)
        return math.sqrt(float(np.sum(self.half_weights * dens)) / (2 * self.half_width) ** self.dim)

    def symmetry_defect(self, f_hat) -> float:
        """Largest conjugate-symmetry violation on the self-paired planes, relative to max|f̂|."""
        scale = float(np.abs(f_hat).max())
        if scale == 0:
            return 0.0
        worst = 0.0
        for last in (0, self.n // 2):
            plane = f_hat[..., last]
            mirror = plane
            for ax in range(plane.ndim):
                mirror = np.roll(np.flip(mirror, axis=ax), 1, axis=ax)
            worst = max(worst, float(np.abs(plane - np.conj(mirror)).max()))
        return worst / scale


@dataclass(frozen=True)
class GridState:
    time: float
    u_hat: np.ndarray
    v_hat: np.ndarray

    def zero_mode(self) -> tuple[complex, complex]:
        idx = (0,) * self.u_hat.ndim
        return complex(self.u_hat[idx]), complex(self.v_hat[idx])


def state_from_fields(grid: PeriodicGrid, u, v, time: float = 0.0) -> GridState:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != grid.shape or v.shape != grid.shape:
        raise ValueError("field shape does not match the grid")
    return GridState(time, grid.forward(u), grid.forward(v))


def initial_state(grid: PeriodicGrid, u0: RadialProfile, u1: RadialProfile) -> GridState:
    """Sample radial data centred at the origin of the box."""
    rad = grid.radius()
    return state_from_fields(grid, u0.physical(rad, grid.dim), u1.physical(rad, grid.dim))


# ---------------------------------------------------------------------------
# Nonlinearity


@dataclass(frozen=True)
class NonlinearitySpec:
    """a·∇|∂_t^j u|^p, or with ``q`` set the mixed form |∂_t^j u|^p + a·∇|∂_t^j u|^q."""

    j: int = 0
    p: float = 2.0
    a: tuple[float, ...] = ()
    q: float | None = None

    def __post_init__(self):
        if self.j not in (0, 1):
            raise ValueError("j must be 0 or 1")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if self.q is not None and not self.q > 1:
            raise ValueError("q must exceed 1")
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))

    @property
    def mixed(self) -> bool:
        return self.q is not None

    @property
    def convection_power(self) -> float:
        return self.q if self.mixed else self.p

    def is_trivial(self) -> bool:
        return not self.mixed and not any(self.a)

    def advisory(self, dim: int) -> list[str]:
        """Human-readable notes where (n, j, p, q) leaves the proven range."""
        from .analysis import admissible_exponent

        th = admissible_exponent(dim, self.j, self.mixed)
        if not th.supported:
            return [th.describe()]
        notes = []
        if not th.admits(self.p, self.q):
            notes.append(f"exponent outside the proven range: {th.describe()}")
        if min(self.p, self.q or self.p) < 2:
            notes.append("p or q below 2: the Hölder steps of the existence argument assume p ≥ 2")
        return notes


def _power(field_values, p):
    if p == 2.0:
        return field_values * field_values
    return np.abs(field_values) ** p


def nonlinear_rhs(grid: PeriodicGrid, state: GridState, spec: NonlinearitySpec | None,
                  dealias: bool = True) -> np.ndarray:
    """Fourier transform of the forcing in the u_t equation."""
    out = np.zeros(grid.spectral_shape, dtype=complex)
    if spec is None or spec.is_trivial():
        return out
    if len(spec.a) not in (0, grid.dim):
        raise ValueError("convection vector length does not match dimension")
    src = state.u_hat if spec.j == 0 else state.v_hat
    f = grid.inverse(src)
    peak = float(np.abs(f).max())
    if not math.isfinite(peak) or peak > BLOWUP_THRESHOLD:
        raise BlowUpError(f"max|field| = {peak:.3g} exceeds {BLOWUP_THRESHOLD:g}", state.time)
    if any(spec.a):
        symbol = 1j * sum(ai * xi for ai, xi in zip(spec.a, grid.xi_deriv) if ai)
        out += symbol * grid.forward(_power(f, spec.convection_power))
    if spec.mixed:
        out += grid.forward(_power(f, spec.p))
    if dealias:
        out[~grid.dealias_mask] = 0.0
    return out


# ---------------------------------------------------------------------------
# Stepping


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = "etd2"
    dealias: bool = True
    output_every: float | None = None

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if self.scheme not in ("etd1", "etd2"):
            raise ValueError("scheme must be etd1 or etd2")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def output_stride(self) -> int:
        if self.output_every is None:
            return max(1, self.n_steps)
        return max(1, int(round(self.output_every / self.dt)))


def default_dt(grid: PeriodicGrid) -> float:
    return 0.05 * grid.dx


def _unique_apply(fn, r):
    """Evaluate a radial symbol once per distinct |ξ|."""
    vals, inv = np.unique(r, return_inverse=True)
    res = fn(vals)
    if isinstance(res, tuple):
        return tuple(x[inv].reshape(r.shape) for x in res)
    return res[inv].reshape(r.shape)


def linear_step(grid: PeriodicGrid, params: DampingParams, state: GridState, dt: float) -> GridState:
    """Exact per-mode linear flow over dt."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    k0, k1, dk0, dk1 = _unique_apply(lambda r: multipliers(params.nu, dt, r), grid.xi_mag)
    u, v = state.u_hat, state.v_hat
    return GridState(state.time + dt, k0 * u + k1 * v, dk0 * u + dk1 * v)


class Stepper:
    """Caches the step multipliers for one (grid, ν, dt)."""

    def __init__(self, grid: PeriodicGrid, params: DampingParams, spec: NonlinearitySpec | None,
                 config: StepperConfig, forcing: Callable[[float], np.ndarray] | None = None):
        if params.dim != grid.dim:
            raise ValueError("params and grid dimensions differ")
        self.grid, self.params, self.spec, self.config = grid, params, spec, config
        self.forcing = forcing
        dt = config.dt
        r = grid.xi_mag
        self.k0, self.k1, self.dk0, self.dk1 = _unique_apply(lambda x: multipliers(params.nu, dt, x), r)

        def weights(x):
            w = duhamel_weights(params.nu, dt, x)
            return w.phi1, w.etd2_u, w.etd2_v

        self.phi1, self.c_u, self.c_v = _unique_apply(weights, r)

    def rhs(self, state: GridState) -> np.ndarray:
        out = nonlinear_rhs(self.grid, state, self.spec, self.config.dealias)
        if self.forcing is not None:
            out = out + self.forcing(state.time)
        return out

    def _etd1(self, state: GridState, n_hat) -> GridState:
        u, v = state.u_hat, state.v_hat
        return GridState(
            state.time + self.config.dt,
            self.k0 * u + self.k1 * v + self.phi1 * n_hat,
            self.dk0 * u + self.dk1 * v + self.k1 * n_hat,
        )

    def step(self, state: GridState) -> GridState:
        n_hat = self.rhs(state)
        nxt = self._etd1(state, n_hat)
        if self.config.scheme == "etd2":
            diff = self.rhs(nxt) - n_hat
            nxt = GridState(nxt.time, nxt.u_hat + self.c_u * diff, nxt.v_hat + self.c_v * diff)
        if not (np.all(np.isfinite(nxt.u_hat)) and np.all(np.isfinite(nxt.v_hat))):
            raise BlowUpError("non-finite values after step", nxt.time)
        return nxt


def etd_step(grid, params, state, spec, config, forcing=None) -> GridState:
    """One exponential-integrator step (builds a fresh :class:`Stepper`)."""
    return Stepper(grid, params, spec, config, forcing).step(state)


# ---------------------------------------------------------------------------
# Runs


def tracked_names(dim: int, eps: float) -> list[str]:
    s = dim / 2 + eps
    return ["u", sobolev_name("u", s), "ut", sobolev_name("ut", s)]


def record_norms(grid: PeriodicGrid, state: GridState, eps: float) -> dict[str, float]:
    s = grid.dim / 2 + eps
    return {
        "u": grid.norm(state.u_hat),
        sobolev_name("u", s): grid.norm(state.u_hat, s),
        "ut": grid.norm(state.v_hat),
        sobolev_name("ut", s): grid.norm(state.v_hat, s),
    }


@dataclass
class RunResult:
    norms: NormSeries
    snapshots: list[GridState] = field(default_factory=list)
    final: GridState | None = None
    blowup: str | None = None
    last_valid_time: float = 0.0
    advisories: list[str] = field(default_factory=list)


def validity_limit(grid: PeriodicGrid, support: float) -> float:
    """Last time before periodic images reach the data (unit wave speed)."""
    return grid.half_width - support


def run(grid: PeriodicGrid, params: DampingParams, initial: GridState, spec: NonlinearitySpec | None,
        config: StepperConfig, eps: float = 0.1, support: float = 0.0,
        keep_snapshots: bool = False, on_output: Callable[[GridState], None] | None = None) -> RunResult:
    """Advance ``initial`` to ``config.t_end`` recording norms at the output cadence."""
    advisories = spec.advisory(grid.dim) if spec is not None and not spec.is_trivial() else []
    for note in advisories:
        warnings.warn(note, AdmissibilityWarning, stacklevel=2)
    stepper = Stepper(grid, params, spec, config)
    names = tracked_names(grid.dim, eps)
    times, rows, snaps = [], [], []

    def emit(st):
        times.append(st.time)
        rec = record_norms(grid, st, eps)
        rows.append([rec[k] for k in names])
        if keep_snapshots:
            snaps.append(st)
        if on_output is not None:
            on_output(st)

    state = initial
    emit(state)
    blow = None
    stride = config.output_stride
    for i in range(1, config.n_steps + 1):
        try:
            state = stepper.step(state)
        except BlowUpError as exc:
            blow = f"t={exc.time if exc.time is not None else state.time:.6g}: {exc}"
            break
        if i % stride == 0 or i == config.n_steps:
            emit(state)
    arr = np.array(rows).reshape(len(times), len(names))
    series = NormSeries(np.array(times), {k: arr[:, c] for c, k in enumerate(names)},
                        valid_until=validity_limit(grid, support))
    return RunResult(series, snaps, state, blow, state.time, advisories)


def linear_twin(grid: PeriodicGrid, params: DampingParams, initial: GridState, times: Sequence[float],
                eps: float = 0.1, support: float = 0.0) -> NormSeries:
    """Norms of the exact linear evolution of ``initial`` at the given times."""
    names = tracked_names(grid.dim, eps)
    out = {k: np.empty(len(times)) for k in names}
    for i, t in enumerate(times):
        dt = t - initial.time
        st = initial if dt <= 0 else linear_step(grid, params, initial, dt)
        rec = record_norms(grid, st, eps)
        for k in names:
            out[k][i] = rec[k]
    return NormSeries(np.asarray(times, dtype=float), out, valid_until=validity_limit(grid, support))


# ---------------------------------------------------------------------------
# Snapshots

_SNAPSHOT_MAGIC = "sdwave-snapshot v1"


def write_snapshot(path, grid: PeriodicGrid, state: GridState) -> None:
    """Text header followed by the physical fields u and u_t as little-endian float64."""
    u = np.ascontiguousarray(grid.inverse(state.u_hat), dtype="<f8")
    v = np.ascontiguousarray(grid.inverse(state.v_hat), dtype="<f8")
    header = "\n".join([
        _SNAPSHOT_MAGIC,
        f"dim {grid.dim}",
        f"N {grid.n}",
        f"L {grid.half_width!r}",
        f"t {state.time!r}",
        "fields u ut",
        "byteorder little",
        "dtype float64",
        "shape " + " ".join(str(s) for s in grid.shape),
        "END",
    ]) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(u.tobytes())
        fh.write(v.tobytes())


def read_snapshot(path) -> tuple[PeriodicGrid, GridState]:
    raw = Path(path).read_bytes()
    end = raw.index(b"END\n") + 4
    meta = {}
    lines = raw[:end].decode("ascii").splitlines()
    if lines[0] != _SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot file")
    for line in lines[1:-1]:
        key, _, val = line.partition(" ")
        meta[key] = val
    if meta.get("byteorder") != "little" or meta.get("dtype") != "float64":
        raise ValueError("unsupported snapshot encoding")
    grid = PeriodicGrid(int(meta["dim"]), int(meta["N"]), float(meta["L"]))
    count = grid.n**grid.dim
    data = np.frombuffer(raw[end:], dtype="<f8")
    if data.size != 2 * count:
        raise ValueError("snapshot payload has the wrong size")
    u = data[:count].reshape(grid.shape)
    v = data[count:].reshape(grid.shape)
    return grid, state_from_fields(grid, u, v, float(meta["t"]))

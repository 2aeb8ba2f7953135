"""Command-line front end: ``sdwave <command> [options]``.

Configuration precedence (later wins): built-in defaults, ``--config`` JSON
file, ``--set section.key=value`` overrides, dedicated flags such as
``--seed``. The fully resolved configuration is written to ``manifest.json``.

Exit codes: 0 pass, 1 gate failure, 2 configuration error, 3 blow-up.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    Comparison,
    RateEntry,
    UNSUPPORTED,
    _slowest,
    admissible_exponent,
    compare,
    exponent_table,
    fit_decay,
    format_table,
    linear_rate,
    nonlinear_rate,
    quantity_key,
    solution_space_for,
    solution_space_norm,
)
from .linear import (
    LinearRunConfig,
    NormSeries,
    QuadratureRangeWarning,
    RadialProfile,
    linear_decay_run,
    split_key,
)
from .symbols import DampingParams

EXIT_PASS, EXIT_GATE, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3
OUT_ENV = "SDWAVE_OUT"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Configuration

_DATA = {
    "u0": {"family": "gaussian", "amplitude": 1.0, "width": 1.0},
    "u1": {"family": "zero", "amplitude": 1.0, "width": 1.0},
}
_TIME = {"t_min": 1.0, "t_max": 1e4, "per_decade": 40}
_QUAD = {"r_min": 1e-6, "panels_per_decade": 8, "refine": 1}

DEFAULTS = {
    "linear-decay": {
        "problem": {"dim": 3, "nu": 1.0},
        "data": _DATA,
        "time": _TIME,
        "quadrature": _QUAD,
        "analysis": {"quantities": ["u", "ut"], "s_values": [], "window": None, "slope_tol": 0.05,
                     "band_limit": 1.5, "r": 1.0, "l1": None, "l2": None, "bands": True},
        "output": {"plot": True},
    },
    "profile-check": {
        "problem": {"dim": 2, "nu": 1.0},
        "data": {"u0": {"family": "zero", "amplitude": 1.0, "width": 1.0},
                 "u1": {"family": "gaussian", "amplitude": 1.0, "width": 1.0}},
        "time": _TIME,
        "quadrature": _QUAD,
        "analysis": {"window": None, "slope_margin": 0.1},
        "output": {"plot": True},
    },
    "simulate": {
        "problem": {"dim": 2, "nu": 1.0, "a": [1.0, 0.0], "j": 0, "p": 6.0, "q": None},
        "data": {"u0": {"family": "gaussian", "amplitude": 1e-3, "width": 1.0},
                 "u1": {"family": "gaussian", "amplitude": 1e-3, "width": 1.0}},
        "grid": {"n": 256, "half_width": 100.0},
        "stepper": {"scheme": "etd2", "dt": None, "t_end": 50.0, "dealias": True, "output_every": 1.0},
        "analysis": {"eps": 0.1, "twin_factor": 1.2, "fit": False, "window": None, "slope_tol": 0.1,
                     "band_limit": 1.5},
        "output": {"plot": True, "snapshot_every": None},
    },
    "verify": {
        "verify": {"selectors": []},
    },
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in out:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(out[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = _merge(out[key], val, where + ".")
        else:
            out[key] = val
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_set(cfg: dict, item: str) -> None:
    key, sep, val = item.partition("=")
    if not sep:
        raise ConfigError(f"--set expects section.key=value, got {item!r}")
    parts = key.split(".")
    node = cfg
    for i, part in enumerate(parts):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key {key!r}")
        if i == len(parts) - 1:
            node[part] = _parse_value(val)
        else:
            node = node[part]


def resolve_config(command: str, path: str | None, sets: list[str]) -> dict:
    cfg = copy.deepcopy(DEFAULTS[command])
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must contain a JSON object")
        cfg = _merge(cfg, loaded)
    for item in sets or []:
        _apply_set(cfg, item)
    return cfg


def _profile(d: dict) -> RadialProfile:
    try:
        return RadialProfile(d["family"], float(d["amplitude"]), float(d["width"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _params(prob: dict, with_a: bool = False) -> DampingParams:
    try:
        a = tuple(prob.get("a") or ()) if with_a else ()
        return DampingParams(float(prob["nu"]), int(prob["dim"]), a)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# Output helpers


def _fmt(x) -> str:
    return repr(float(x))


def write_norm_csv(path: Path, series: NormSeries, extra: dict[str, np.ndarray] | None = None) -> None:
    """Long format: t, quantity, value, band."""
    cols = dict(series.values)
    cols.update(extra or {})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "quantity", "value", "band"])
        for i, t in enumerate(series.times):
            for key, vals in cols.items():
                base, band = split_key(key)
                w.writerow([_fmt(t), base, _fmt(vals[i]), band])


def write_fits_csv(path: Path, rows: list[Comparison]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["quantity", "model", "t_a", "t_b", "slope", "intercept", "rms", "band_ratio",
                    "theory", "tolerance", "pass"])
        for c in rows:
            f = c.fit
            theory = c.rate.formula if c.rate.exponent is None else _fmt(c.rate.exponent)
            w.writerow([c.quantity, f.model, _fmt(f.t_a), _fmt(f.t_b), _fmt(f.slope), _fmt(f.intercept),
                        _fmt(f.rms), "" if f.band is None else _fmt(f.band), theory, _fmt(c.tolerance),
                        int(c.passed)])


def write_checks_csv(path: Path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "param_json", "measured", "refinement_ratio", "pass"])
        for r in reports:
            w.writerow([r.id, r.param_json(), _fmt(r.measured), _fmt(r.refinement_ratio), int(r.passed)])


_PLOT_TEMPLATE = '''"""Plot {csv} on log-log axes (needs matplotlib)."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

GUIDES = {guides!r}  # quantity -> theoretical exponent

series = defaultdict(lambda: ([], []))
with open({csv!r}) as fh:
    for row in csv.DictReader(fh):
        if row["band"] != "all":
            continue
        t, v = series[row["quantity"]]
        t.append(float(row["t"]))
        v.append(float(row["value"]))

fig, ax = plt.subplots()
for name, (t, v) in series.items():
    if max(v) <= 0:
        continue
    line, = ax.loglog(t, v, label=name)
    if name in GUIDES:
        k = GUIDES[name]
        ref = v[-1] * ((1 + t[-1]) ** -k)
        ax.loglog(t, [ref * (1 + x) ** k for x in t], "--", color=line.get_color(), lw=0.8,
                  label=f"{{name}} theory {{k:+.3f}}")
ax.set_xlabel("t")
ax.set_ylabel("norm")
ax.legend(fontsize="small")
fig.savefig({png!r}, dpi=150)
'''


def write_plot_script(path: Path, csv_name: str, guides: dict[str, float]) -> None:
    path.write_text(_PLOT_TEMPLATE.format(csv=csv_name, guides=guides, png=Path(csv_name).stem + ".png"))


def write_manifest(out: Path, command: str, cfg: dict, seed: int, gates: list[dict], notes: list[str],
                   files: list[str], extra: dict | None = None) -> None:
    doc = {"tool": "sdwave", "version": __version__, "command": command, "seed": seed, "config": cfg,
           "gates": gates, "warnings": notes, "files": sorted(files)}
    if extra:
        doc.update(extra)
    (out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def _gate(name: str, passed: bool, detail: str) -> dict:
    return {"gate": name, "pass": bool(passed), "detail": detail}


def _finish(gates: list[dict], notes: list[str], strict: bool, stream) -> int:
    for g in gates:
        print(f"{'PASS' if g['pass'] else 'FAIL'}  {g['gate']}: {g['detail']}", file=stream)
    for n in notes:
        print(f"warning: {n}", file=stream)
    failed = [g["gate"] for g in gates if not g["pass"]]
    if strict and notes:
        failed.append("strict: warnings present")
    if failed:
        print("gate failure: " + "; ".join(failed), file=stream)
        return EXIT_GATE
    return EXIT_PASS


# ---------------------------------------------------------------------------
# Commands


def _linear_config(cfg: dict, residuals: bool, bands: bool, s_values=()) -> LinearRunConfig:
    params = _params(cfg["problem"])
    t, q = cfg["time"], cfg["quadrature"]
    try:
        lc = LinearRunConfig(params, _profile(cfg["data"]["u0"]), _profile(cfg["data"]["u1"]),
                             float(t["t_min"]), float(t["t_max"]), int(t["per_decade"]),
                             tuple(float(s) for s in s_values), residuals, bands,
                             float(q["r_min"]), int(q["panels_per_decade"]), int(q["refine"]))
        lc.times()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return lc


def _linear_expectation(n, quantity, s, lc: LinearRunConfig, a: dict) -> RateEntry:
    def opt(x):
        return math.inf if x is None else float(x)

    entries = []
    for data, prof in (("u0", lc.u0), ("u1", lc.u1)):
        if not prof.is_zero:
            entries.append(linear_rate(n, quantity, data, s, float(a["r"]), opt(a["l1"]), opt(a["l2"])))
    if any(e.kind == UNSUPPORTED for e in entries):
        return next(e for e in entries if e.kind == UNSUPPORTED)
    return _slowest(entries)


def _window(a: dict, times):
    if a.get("window"):
        return tuple(float(x) for x in a["window"])
    return float(times[-1]) / 10, float(times[-1])


def cmd_linear_decay(cfg: dict, out: Path, seed: int, strict: bool, stream=None, jobs: int = 1) -> int:
    a = cfg["analysis"]
    lc = _linear_config(cfg, residuals=False, bands=bool(a["bands"]), s_values=a["s_values"])
    n = lc.params.dim
    res = linear_decay_run(lc)
    notes = list(res.warnings)
    series = res.norms
    files = ["norms.csv"]
    write_norm_csv(out / "norms.csv", series)
    gates, rows, guides = [], [], {}
    zero = lc.u0.is_zero and lc.u1.is_zero
    if zero:
        notes.append("empty data: every norm is identically zero, gates pass vacuously")
    else:
        qs = [(q, 0.0) for q in a["quantities"]] + [(w, float(s)) for s in a["s_values"] if float(s) > 0
                                                    for w in ("u", "ut")]
        for q, s in qs:
            key = q if s == 0 else f"{q}_H{s:g}"
            if key not in series.values:
                raise ConfigError(f"unknown quantity {q!r}")
            rate = _linear_expectation(n, q, s, lc, a)
            if rate.kind == UNSUPPORTED:
                notes.append(f"{key}: {rate.reason}")
                continue
            fit = fit_decay(series.times, series[key], rate.model, _window(a, series.times))
            c = compare(key, fit, rate, float(a["slope_tol"]), float(a["band_limit"]))
            rows.append(c)
            if rate.exponent is not None:
                guides[key] = rate.exponent
            gates.append(_gate(f"rate {key}", c.passed, f"observed {c.observed:.4f}, theory {rate.formula}"))
        write_fits_csv(out / "fits.csv", rows)
        files.append("fits.csv")
    table = format_table(rows) if rows else "(no fits)"
    (out / "report.txt").write_text(table + "\n")
    files.append("report.txt")
    print(table, file=stream)
    if cfg["output"]["plot"]:
        write_plot_script(out / "plot_norms.py", "norms.csv", guides)
        files.append("plot_norms.py")
    write_manifest(out, "linear-decay", cfg, seed, gates, notes, files)
    return _finish(gates, notes, strict, stream)


def cmd_profile_check(cfg: dict, out: Path, seed: int, strict: bool, stream=None, jobs: int = 1) -> int:
    lc = _linear_config(cfg, residuals=True, bands=False)
    n = lc.params.dim
    res = linear_decay_run(lc)
    notes = list(res.warnings)
    rs = res.residuals
    extra = {"residual": rs.residual, "leading": rs.leading}
    if lc.params.nu != 1.0:
        # report the ν-free kernel variant alongside
        extra["residual_literal"] = rs.residual_literal
    write_norm_csv(out / "norms.csv", NormSeries(rs.times, {}), extra)
    files = ["norms.csv", "report.txt"]
    gates = []
    margin = float(cfg["analysis"]["slope_margin"])
    lines = []
    if np.all(rs.residual == 0):
        notes.append("residual identically zero")
        gates.append(_gate("residual", True, "zero residual"))
    else:
        fit = fit_decay(rs.times, rs.residual, "power", _window(cfg["analysis"], rs.times))
        target = -n / 8 + margin
        gates.append(_gate("residual slope", fit.slope <= target,
                           f"slope {fit.slope:.4f} ≤ {target:.4f}"))
        last = rs.times >= rs.times[-1] / 10
        scaled = rs.residual[last] * rs.times[last] ** (n / 8 - 0.25)
        dec = bool(np.all(np.diff(scaled) < 0))
        gates.append(_gate("residual/leading decreasing", dec,
                           f"residual·t^(n/8-1/4) from {scaled[0]:.4g} to {scaled[-1]:.4g}"))
        lines.append(f"residual slope {fit.slope:+.4f} (gate ≤ {target:+.4f}), rms {fit.rms:.2e}")
        if "residual_literal" in extra:
            lit = fit_decay(rs.times, rs.residual_literal, "power", _window(cfg["analysis"], rs.times))
            lines.append(f"ν-free kernel residual slope {lit.slope:+.4f}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines), file=stream)
    if cfg["output"]["plot"]:
        write_plot_script(out / "plot_norms.py", "norms.csv", {"residual": -n / 8})
        files.append("plot_norms.py")
    write_manifest(out, "profile-check", cfg, seed, gates, notes, files)
    return _finish(gates, notes, strict, stream)


def cmd_simulate(cfg: dict, out: Path, seed: int, strict: bool, stream=None, jobs: int = 1) -> int:
    from .spectral import (
        AdmissibilityWarning,
        NonlinearitySpec,
        PeriodicGrid,
        StepperConfig,
        default_dt,
        initial_state,
        linear_twin,
        run,
        write_snapshot,
    )

    prob, st, an = cfg["problem"], cfg["stepper"], cfg["analysis"]
    params = _params(prob, with_a=True)
    if params.dim > 3:
        raise ConfigError("simulate supports dimensions 1..3")
    try:
        grid = PeriodicGrid(params.dim, int(cfg["grid"]["n"]), float(cfg["grid"]["half_width"]))
        spec = None
        if prob["p"] is not None:
            spec = NonlinearitySpec(int(prob["j"]), float(prob["p"]), params.a,
                                    None if prob["q"] is None else float(prob["q"]))
        dt = float(st["dt"]) if st["dt"] is not None else default_dt(grid)
        sc = StepperConfig(dt, float(st["t_end"]), st["scheme"], bool(st["dealias"]),
                           None if st["output_every"] is None else float(st["output_every"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    u0, u1 = _profile(cfg["data"]["u0"]), _profile(cfg["data"]["u1"])
    eps = float(an["eps"])
    support = max(u0.support_radius(), u1.support_radius())
    init = initial_state(grid, u0, u1)
    files, notes = [], []
    snap_every = cfg["output"]["snapshot_every"]
    snap_stride = None if snap_every is None else max(1, int(round(float(snap_every) / dt)))
    counter = {"i": 0}

    def on_output(state):
        step = int(round(state.time / dt))
        if snap_stride is not None and step % snap_stride == 0:
            name = f"snapshot_{counter['i']:04d}.bin"
            write_snapshot(out / name, grid, state)
            files.append(name)
            counter["i"] += 1

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdmissibilityWarning)
        result = run(grid, params, init, spec, sc, eps=eps, support=support, on_output=on_output)
    notes += result.advisories
    series = result.norms
    twin = linear_twin(grid, params, init, series.times, eps=eps, support=support)
    write_norm_csv(out / "norms.csv", series, {})
    write_norm_csv(out / "linear_twin.csv", twin, {})
    files += ["norms.csv", "linear_twin.csv"]
    gates = []
    ratio = max(float(np.max(series[k] / np.where(twin[k] > 0, twin[k], np.inf))) for k in series.values)
    factor = float(an["twin_factor"])
    if factor > 0:
        gates.append(_gate("linear twin", ratio <= factor, f"max norm/twin ratio {ratio:.6f} ≤ {factor}"))
    lines = [f"valid (uncontaminated) until t = {series.valid_until:.4g}"]
    ssn = None
    if params.dim in (2, 3) and spec is not None:
        kind = solution_space_for(params.dim, spec.j)
        ssn = solution_space_norm(series, kind, eps, params.dim)
        lines.append(f"{kind} norm {ssn.value:.6g} (sup at t = {ssn.attained_at:.4g})")
    rows = []
    if an["fit"] and spec is not None and params.dim >= 2:
        n = params.dim
        for q in ("u", "grad_u", "ut") + (("grad_ut",) if spec.j == 1 else ()):
            rate = nonlinear_rate(n, q, spec.j, eps)
            key = quantity_key(n, q, eps)
            win = _window(an, series.times) if an["window"] else (min(series.times[-1], series.valid_until) / 10,
                                                                   min(series.times[-1], series.valid_until))
            fit = fit_decay(series.times, series[key], rate.model, win, series.valid_until)
            c = compare(key, fit, rate, float(an["slope_tol"]), float(an["band_limit"]))
            rows.append(c)
            gates.append(_gate(f"rate {key}", c.passed, f"observed {c.observed:.4f}, theory {rate.formula}"))
        write_fits_csv(out / "fits.csv", rows)
        files.append("fits.csv")
        lines.append(format_table(rows))
    if result.blowup:
        lines.append(f"blow-up: {result.blowup}; last valid time {result.last_valid_time:.6g}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    files.append("report.txt")
    print("\n".join(lines), file=stream)
    if cfg["output"]["plot"]:
        write_plot_script(out / "plot_norms.py", "norms.csv", {})
        files.append("plot_norms.py")
    extra_doc = {"dt": dt, "valid_until": series.valid_until, "blowup": result.blowup,
                 "solution_space_norm": None if ssn is None else {"kind": ssn.kind, "value": ssn.value,
                                                                  "attained_at": ssn.attained_at}}
    write_manifest(out, "simulate", cfg, seed, gates, notes, files, extra_doc)
    if result.blowup:
        print(f"blow-up detected: {result.blowup}", file=stream)
        return EXIT_BLOWUP
    return _finish(gates, notes, strict, stream)


def cmd_verify(cfg: dict, out: Path, seed: int, strict: bool, stream=None, jobs: int = 1) -> int:
    from .verify import SelectorError, default_suite, parse_selector, run_suite, summary_table

    sels = cfg["verify"]["selectors"]
    if not isinstance(sels, list):
        raise ConfigError("verify.selectors must be a list of strings")
    try:
        selectors = [parse_selector(s) for s in sels] if sels else default_suite(seed)
    except SelectorError as exc:
        raise ConfigError(str(exc)) from None
    reports = run_suite(selectors, jobs=jobs)
    write_checks_csv(out / "checks.csv", reports)
    table = summary_table(reports)
    (out / "report.txt").write_text(table + "\n")
    print(table, file=stream)
    gates = [_gate(r.id, r.passed, r.detail) for r in reports if not r.passed]
    write_manifest(out, "verify", cfg, seed, gates, [], ["checks.csv", "report.txt"],
                   {"checks": len(reports), "passed": sum(r.passed for r in reports)})
    return _finish(gates, [], strict, stream)


def cmd_exponents(n: int | None, j: int | None, mixed: bool, stream=None) -> int:
    if n is not None and j is not None:
        rows = [admissible_exponent(n, j, mixed)]
    else:
        rows = [t for t in exponent_table() if (n is None or t.n == n) and (j is None or t.j == j)
                and t.mixed == mixed]
    for t in rows:
        print(f"n={t.n} j={t.j} {t.problem}: {t.describe()}", file=stream)
    return EXIT_PASS


COMMANDS = {
    "linear-decay": cmd_linear_decay,
    "profile-check": cmd_profile_check,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./sdwave-out)")
    common.add_argument("--seed", type=int, default=0, help="seed for random test fields")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers for independent checks")
    common.add_argument("--strict", action="store_true", help="treat warnings as gate failures")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value (JSON literal)")
    parser = argparse.ArgumentParser(prog="sdwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sdwave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("linear-decay", parents=[common], help="radial linear decay rates")
    sub.add_parser("profile-check", parents=[common], help="diffusion-wave profile residuals")
    sub.add_parser("simulate", parents=[common], help="pseudospectral nonlinear run")
    sub.add_parser("verify", parents=[common], help="inequality checks")
    ex = sub.add_parser("exponents", help="admissible exponent table")
    ex.add_argument("--n", type=int)
    ex.add_argument("--j", type=int, choices=(0, 1))
    ex.add_argument("--mixed", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    if args.command == "exponents":
        return cmd_exponents(args.n, args.j, args.mixed)
    try:
        cfg = resolve_config(args.command, args.config, args.set)
        out = Path(args.out or os.environ.get(OUT_ENV) or "sdwave-out")
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", QuadratureRangeWarning)
            return COMMANDS[args.command](cfg, out, args.seed, args.strict, sys.stdout, max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

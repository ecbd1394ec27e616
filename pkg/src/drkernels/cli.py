"""Command line front end: one CSV or JSON artifact per subcommand.

CSV numbers are printed with 17 significant digits so a written file
parses back to the exact double; column meanings are listed in each
subcommand's --help.  JSON reports carry a schema_version field.

Exit codes: 0 success, 1 numeric failure (JSON diagnostic on stderr),
2 usage error.

A config file (--config, INI-style flat key=value under [space],
[grids], [tolerances], [output], [run]) supplies defaults; explicit
command line flags win over file values.  DRKERNELS_THREADS sets the
default worker count for sweep subcommands; sweep results are always
assembled in input order, so output does not depend on the thread
count.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import Decay, RadialFunction, space_params
from .quadrature import NonConvergenceError

SCHEMA_VERSION = "1"


class UsageError(Exception):
    """Bad arguments detected after argparse (domain-level validation)."""


# ---------------------------------------------------------------------------
# run configuration

_CONFIG_LAYOUT = {
    "m": ("space", int),
    "k": ("space", int),
    "r_min": ("grids", float),
    "r_max": ("grids", float),
    "r_steps": ("grids", int),
    "s_min": ("grids", float),
    "s_max": ("grids", float),
    "s_steps": ("grids", int),
    "t_max": ("grids", float),
    "t_steps": ("grids", int),
    "quad_tol": ("tolerances", float),
    "ode_tol": ("tolerances", float),
    "fit_tol": ("tolerances", float),
    "out": ("output", str),
    "threads": ("run", int),
}

_NAMED_SPACES = {"RH3": (2, 0), "HEIS": (2, 1), "DR42": (4, 2), "QUAT": (4, 3)}


def _default_threads():
    raw = os.environ.get("DRKERNELS_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


@dataclass(frozen=True)
class RunConfig:
    """Defaults shared by all subcommands; round-trips through INI text."""

    m: int = 2
    k: int = 0
    r_min: float = 0.5
    r_max: float = 10.0
    r_steps: int = 33
    s_min: float = 0.1
    s_max: float = 8.0
    s_steps: int = 33
    t_max: float = 2.0
    t_steps: int = 17
    quad_tol: float = 1e-10
    ode_tol: float = 1e-11
    fit_tol: float = 1e-6
    out: str = "-"
    threads: int = dataclasses.field(default_factory=_default_threads)

    def validate(self):
        if self.m < 0 or self.m % 2:
            raise ValueError("m must be a nonnegative even integer")
        if self.k < 0:
            raise ValueError("k must be a nonnegative integer")
        for name in ("quad_tol", "ode_tol", "fit_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("r_steps", "s_steps", "t_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        return self

    def to_file(self, path):
        cp = configparser.ConfigParser()
        for field, (section, _) in _CONFIG_LAYOUT.items():
            if not cp.has_section(section):
                cp.add_section(section)
            value = getattr(self, field)
            text = repr(value) if isinstance(value, float) else str(value)
            cp.set(section, field, text)
        with open(path, "w") as fh:
            cp.write(fh)

    @classmethod
    def from_file(cls, path):
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read:
            raise ValueError(f"config file not found: {path}")
        values = {}
        for field, (section, cast) in _CONFIG_LAYOUT.items():
            if cp.has_option(section, field):
                raw = cp.get(section, field)
                try:
                    values[field] = cast(raw)
                except ValueError as exc:
                    raise ValueError(
                        f"config [{section}] {field}={raw!r}: {exc}") from None
        # reject stray keys so typos do not silently fall back to defaults
        known = {(s, f) for f, (s, _) in _CONFIG_LAYOUT.items()}
        for section in cp.sections():
            for key in cp.options(section):
                if (section, key) not in known:
                    raise ValueError(f"unknown config key [{section}] {key}")
        return cls(**values).validate()


def _resolve(args, cfg, name):
    """CLI flag if given, else config value."""
    value = getattr(args, name, None)
    return getattr(cfg, name) if value is None else value


def _space_of(args, cfg):
    name = getattr(args, "space", None)
    if name is not None:
        try:
            m, k = _NAMED_SPACES[name.upper()]
        except KeyError:
            raise UsageError(f"unknown named space {name!r}; "
                             f"choose from {sorted(_NAMED_SPACES)}") from None
    else:
        m, k = _resolve(args, cfg, "m"), _resolve(args, cfg, "k")
    try:
        return space_params(m, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# emission helpers

def _fmt(x):
    return format(float(x), ".17g")


class _Sink:
    def __init__(self, path):
        self.path = path
        self.fh = sys.stdout if path == "-" else open(path, "w")

    def row(self, *cells):
        self.fh.write(",".join(
            c if isinstance(c, str) else _fmt(c) for c in cells) + "\n")

    def comment(self, text):
        self.fh.write(f"# {text}\n")

    def json(self, payload):
        json.dump(payload, self.fh, indent=2, sort_keys=True)
        self.fh.write("\n")

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()


def _parallel_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))  # ordered: output independent of pool


def _emit_numeric_failure(exc):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "error": type(exc).__name__,
        "message": str(exc),
    }
    partial = getattr(exc, "partial", None)
    if partial is not None:
        try:
            payload["partial"] = abs(complex(partial))
        except TypeError:
            pass
    json.dump(payload, sys.stderr, indent=2, sort_keys=True)
    sys.stderr.write("\n")


# ---------------------------------------------------------------------------
# argument parsing helpers

def _parse_window(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"window must be A:B, got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"window must be numeric A:B, got {text!r}") from None
    if not b > a:
        raise UsageError("window must satisfy A < B")
    return a, b


def _parse_grid_spec(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be LO:HI:N, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be LO:HI:N, got {text!r}") from None
    if not (hi > lo and n >= 2):
        raise UsageError("grid needs HI > LO and N >= 2")
    return lo, hi, n


def _parse_q(text):
    if text.strip().lower() in {"inf", "infty", "infinity", "oo"}:
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"q must be a number or 'inf', got {text!r}") from None


def _parse_data_spec(p, text):
    """'gaussian:SIGMA' -> radial data exp(-r^2 / (2 sigma^2))."""
    kind, _, rest = text.partition(":")
    if kind != "gaussian":
        raise UsageError(f"unsupported data spec {text!r}; "
                         "expected gaussian:SIGMA")
    try:
        sigma = float(rest)
    except ValueError:
        raise UsageError(f"bad sigma in data spec {text!r}") from None
    if not sigma > 0:
        raise UsageError("sigma must be positive")
    rate = 1.0 / (2.0 * sigma * sigma)
    q_half = 0.5 * p.Q

    def ev(r):
        return np.exp(-rate * np.asarray(r, dtype=float) ** 2) + 0j

    def ev_scaled(r):
        r = np.asarray(r, dtype=float)
        return np.exp(q_half * r - rate * r ** 2) + 0j

    f = RadialFunction(ev, Decay(0.0, rate), 0.0, ev_scaled)
    return f, f"gaussian sigma={sigma}"


def _parse_tau_file(path):
    """One tau per line: 're' or 're im'; '#' starts a comment."""
    taus = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                body = line.split("#", 1)[0].strip()
                if not body:
                    continue
                parts = body.replace(",", " ").split()
                try:
                    re_part = float(parts[0])
                    im_part = float(parts[1]) if len(parts) > 1 else 0.0
                except (ValueError, IndexError):
                    raise UsageError(
                        f"{path}:{lineno}: expected 're [im]', got "
                        f"{body!r}") from None
                taus.append(complex(re_part, im_part))
    except OSError as exc:
        raise UsageError(f"cannot read tau list: {exc}") from None
    if not taus:
        raise UsageError(f"tau list {path} is empty")
    return taus


# ---------------------------------------------------------------------------
# subcommands

def _cmd_kernel(args, cfg, sink):
    from .kernels import kernel_h

    p = _space_of(args, cfg)
    tau = complex(args.tau_re, args.tau_im)
    if tau == 0:
        raise UsageError("tau must be nonzero")
    kv = kernel_h(p, tau, args.r)
    sink.row("r", "tau_re", "tau_im", "re", "im", "abs", "method", "quad_err")
    sink.row(kv.r, tau.real, tau.imag, kv.value.real, kv.value.imag,
             abs(kv.value), kv.method, kv.quad_error)
    return 0


def _cmd_kernel_grid(args, cfg, sink):
    from .kernels import kernel_grid

    p = _space_of(args, cfg)
    r_min = _resolve(args, cfg, "r_min")
    r_max = _resolve(args, cfg, "r_max")
    r_steps = _resolve(args, cfg, "r_steps")
    if not (0 < r_min < r_max):
        raise UsageError("need 0 < r-min < r-max")
    taus = _parse_tau_file(args.tau_list)
    if any(t == 0 for t in taus):
        raise UsageError("tau list contains zero")
    r = np.linspace(r_min, r_max, r_steps)
    method = "even-closed-form" if p.k % 2 == 0 else "odd-quadrature"
    threads = _resolve(args, cfg, "threads")

    results = _parallel_map(lambda tau: kernel_grid(p, tau, r), taus, threads)
    sink.row("r", "tau_re", "tau_im", "re", "im", "abs", "method", "quad_err")
    for tau, (vals, errs) in zip(taus, results):
        for i in range(r.size):
            v = vals[i]
            sink.row(r[i], tau.real, tau.imag, v.real, v.imag, abs(v),
                     method, errs[i])
    return 0


def _cmd_phi(args, cfg, sink):
    from .spherical import phi

    p = _space_of(args, cfg)
    if not args.s >= 0:
        raise UsageError("s must be nonnegative")
    if not args.r_max > 0:
        raise UsageError("r-max must be positive")
    r = np.linspace(0.0, args.r_max, _resolve(args, cfg, "r_steps"))
    sol = phi(p, args.s, r, rtol=_resolve(args, cfg, "ode_tol"))
    sink.row("r", "phi")
    for ri, vi in zip(sol.r, sol.samples):
        sink.row(ri, float(np.real(vi)))
    return 0


def _cmd_plancherel(args, cfg, sink):
    from .spherical import c_function, plancherel_density

    p = _space_of(args, cfg)
    s_min = _resolve(args, cfg, "s_min")
    s_max = _resolve(args, cfg, "s_max")
    steps = args.steps if args.steps is not None else cfg.s_steps
    if not (0 < s_min < s_max):
        raise UsageError("need 0 < s-min < s-max")
    if steps < 1:
        raise UsageError("steps must be at least 1")
    s_grid = np.linspace(s_min, s_max, steps)
    threads = _resolve(args, cfg, "threads")

    def one(s):
        return plancherel_density(p, s), c_function(p, s).residual

    rows = _parallel_map(one, s_grid, threads)
    sink.row("s", "density", "residual")
    for s, (dens, resid) in zip(s_grid, rows):
        sink.row(s, dens, resid)
    return 0


def _cmd_verify(args, cfg, sink):
    from .estimates import verify_lower_bound, verify_upper_bound

    p = _space_of(args, cfg)
    if args.kind == "upper":
        kwargs = {"refine": args.refine}
        if args.grid is not None:
            lo, hi, n = _parse_grid_spec(args.grid)
            kwargs.update(r_lo=lo, r_hi=hi, n_r=n)
        report = verify_upper_bound(p, **kwargs)
    else:
        kwargs = {"refine": args.refine}
        if args.grid is not None:
            _, hi, n = _parse_grid_spec(args.grid)
            kwargs.update(r_max=hi, n_r=n)
        if args.t_list:
            try:
                t_list = tuple(float(t) for t in args.t_list.split(","))
            except ValueError:
                raise UsageError("--t-list must be comma separated "
                                 "numbers") from None
            report = verify_lower_bound(p, t_list, **kwargs)
        else:
            report = verify_lower_bound(p, **kwargs)
    sink.json(json.loads(report.to_json()))
    return 0 if report.valid else 1


def _cmd_decay(args, cfg, sink):
    from .estimates import decay_fit

    p = _space_of(args, cfg)
    q = _parse_q(args.q)
    if not q > 2:
        raise UsageError("q must exceed 2")
    t_range = None
    if (args.t_min is None) != (args.t_max is None):
        raise UsageError("--t-min and --t-max go together")
    if args.t_min is not None:
        if not 0 < args.t_min < args.t_max:
            raise UsageError("need 0 < t-min < t-max")
        t_range = (args.t_min, args.t_max)
    fit = decay_fit(p, q, args.regime, t_range=t_range,
                    norm="aq" if args.norm == "aq" else "lq",
                    weak=args.norm == "weak",
                    tol=_resolve(args, cfg, "fit_tol"))
    sink.row("t", "norm")
    for t, v in zip(fit.times, fit.norms):
        sink.row(t, v)
    sink.comment(f"slope={_fmt(fit.slope)} stderr={_fmt(fit.slope_stderr)} "
                 f"residual={_fmt(fit.residual)}")
    return 0


def _cmd_weighted_growth(args, cfg, sink):
    from .estimates import weighted_growth_check

    p = _space_of(args, cfg)
    if args.t == 0:
        raise UsageError("t must be nonzero")
    fit = weighted_growth_check(p, args.t, c=args.c)
    sink.row("a", "log_inv_a", "abs_sigma")
    for x, v in zip(fit.times, fit.norms):
        sink.row(math.exp(-x), x, v)
    sink.comment(f"slope={_fmt(fit.slope)} stderr={_fmt(fit.slope_stderr)} "
                 f"residual={_fmt(fit.residual)}")
    return 0


def _cmd_propagate(args, cfg, sink):
    from .propagator import evolve_distinguished, evolve_schrodinger

    p = _space_of(args, cfg)
    f, label = _parse_data_spec(p, args.data)
    t_max = _resolve(args, cfg, "t_max")
    t_steps = _resolve(args, cfg, "t_steps")
    if not t_max > 0 or t_steps < 2:
        raise UsageError("need t-max > 0 and t-steps >= 2")
    t_grid = np.linspace(0.0, t_max, t_steps)
    evolve = evolve_distinguished if args.distinguished else evolve_schrodinger
    rec = evolve(p, f, t_grid, r_max=args.r_max,
                 tol=_resolve(args, cfg, "quad_tol") * 100, initial=label)
    sink.row("t", "r", "re", "im")
    stride = max(1, rec.r.size // max(args.r_points, 1))
    idx = np.arange(0, rec.r.size, stride)
    for i, t in enumerate(rec.t):
        for j in idx:
            u = rec.u[i][j]
            sink.row(t, rec.r[j], u.real, u.imag)
    return 0


def _cmd_strichartz(args, cfg, sink):
    from .estimates import lq_norm_left
    from .propagator import (AdmissiblePair, evolve_schrodinger, is_admissible,
                             strichartz_window_norm)

    p = _space_of(args, cfg)
    pq = _parse_q(args.p)
    q = _parse_q(args.q)
    if pq < 2 or q < 2:
        raise UsageError("p and q must be at least 2")
    window = _parse_window(args.window)
    pair = AdmissiblePair(pq, q)
    f, label = _parse_data_spec(p, args.data)
    t_steps = _resolve(args, cfg, "t_steps")
    if t_steps < 2:
        raise UsageError("t-steps must be at least 2")
    t_grid = np.linspace(window[0], window[1], t_steps)
    rec = evolve_schrodinger(p, f, t_grid, initial=label)
    norm = strichartz_window_norm(rec, pair, window)
    l2 = lq_norm_left(p, f, 2.0)
    sink.json({
        "schema_version": SCHEMA_VERSION,
        "m": p.m, "k": p.k, "n": p.n,
        "p": None if math.isinf(pq) else pq,
        "q": None if math.isinf(q) else q,
        "admissible": is_admissible(p, pair),
        "window": list(window),
        "t_steps": int(t_steps),
        "data": label,
        "strichartz_norm": norm,
        "data_l2": l2,
        "ratio": norm / l2,
    })
    return 0


def _cmd_acceptance(args, cfg, sink):
    from . import acceptance

    space = None
    if args.m is not None or args.k is not None or args.space is not None:
        space = _space_of(args, cfg)
    results = acceptance.run(space=space, stream=sink.fh)
    return 0 if all(res.passed for res in results) else 1


def _cmd_config_dump(args, cfg, sink):
    cp = configparser.ConfigParser()
    for field, (section, _) in _CONFIG_LAYOUT.items():
        if not cp.has_section(section):
            cp.add_section(section)
        value = getattr(cfg, field)
        text = repr(value) if isinstance(value, float) else str(value)
        cp.set(section, field, text)
    cp.write(sink.fh)
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def _add_space_flags(sp):
    sp.add_argument("--m", type=int, default=None,
                    help="first-layer dimension (even, default from config)")
    sp.add_argument("--k", type=int, default=None,
                    help="center dimension (default from config)")
    sp.add_argument("--space", default=None,
                    help="named instance: RH3, HEIS, DR42 or QUAT "
                         "(overrides --m/--k)")


def _add_common_flags(sp):
    sp.add_argument("--config", default=None, metavar="FILE",
                    help="INI config supplying defaults; flags override")
    sp.add_argument("--out", default=None, metavar="FILE",
                    help="artifact path, '-' for stdout (default)")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads for sweeps "
                         "(default DRKERNELS_THREADS or 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="drk",
        description="Complex-time heat and Schrodinger kernels on "
                    "Damek-Ricci spaces.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="COMMAND")

    sp = sub.add_parser(
        "kernel", help="single kernel value",
        description="Evaluate h_tau(r) at one point.  CSV columns: r, "
                    "tau_re, tau_im, re, im, abs (value), method "
                    "(even-closed-form or odd-quadrature), quad_err "
                    "(quadrature error estimate, 0 for closed form).")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--tau-re", type=float, required=True,
                    help="Re tau (heat time)")
    sp.add_argument("--tau-im", type=float, required=True,
                    help="Im tau (Schrodinger time)")
    sp.add_argument("--r", type=float, required=True, help="radius r > 0")
    sp.set_defaults(func=_cmd_kernel)

    sp = sub.add_parser(
        "kernel-grid", help="kernel on an r grid for a list of times",
        description="Evaluate h_tau on a uniform r grid for every tau in "
                    "--tau-list (one per line: 're' or 're im').  CSV "
                    "columns as for 'kernel'; rows ordered by tau file "
                    "order, then increasing r.")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--r-min", type=float, default=None, help="grid start")
    sp.add_argument("--r-max", type=float, default=None, help="grid end")
    sp.add_argument("--r-steps", type=int, default=None, help="grid points")
    sp.add_argument("--tau-list", required=True, metavar="FILE",
                    help="file with one tau per line")
    sp.set_defaults(func=_cmd_kernel_grid)

    sp = sub.add_parser(
        "phi", help="spherical function profile",
        description="Spherical function phi_s on [0, r-max].  CSV columns: "
                    "r, phi (real part; phi_s is real for real s).")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--s", type=float, required=True,
                    help="spectral parameter s >= 0")
    sp.add_argument("--r-max", type=float, required=True, help="profile end")
    sp.add_argument("--r-steps", type=int, default=201, help="sample count")
    sp.set_defaults(func=_cmd_phi)

    sp = sub.add_parser(
        "plancherel", help="Plancherel density on an s grid",
        description="Density |c(s)|^-2 on a uniform s grid.  CSV columns: "
                    "s, density, residual (c-function fit residual; the "
                    "density is trustworthy when residual is small).")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--s-min", type=float, default=None, help="grid start")
    sp.add_argument("--s-max", type=float, default=None, help="grid end")
    sp.add_argument("--steps", type=int, default=None, help="grid points")
    sp.set_defaults(func=_cmd_plancherel)

    sp = sub.add_parser(
        "verify", help="sup/inf bound sweep against the envelopes",
        description="Run the upper (two-regime envelope) or lower "
                    "(concentration zone) bound sweep and print a JSON "
                    "BoundReport with schema_version, ratio, drift and "
                    "grid metadata.  Exit 1 when the report is invalid "
                    "(unstable under refinement or bound violated).")
    sp.add_argument("kind", choices=("upper", "lower"),
                    help="which bound to sweep")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--grid", default=None, metavar="LO:HI:N",
                    help="radial grid override (lower uses HI:N)")
    sp.add_argument("--t-list", default=None,
                    help="comma separated times (lower bound only)")
    sp.add_argument("--refine", type=float, default=1.0,
                    help="base grid refinement factor")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser(
        "decay", help="fitted time-decay exponent of the kernel norm",
        description="Fit log ||s_t||_q against log t over one time regime.  "
                    "CSV columns: t, norm; trailing comment line carries "
                    "slope, stderr, residual.")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--q", required=True, help="exponent q > 2, or 'inf'")
    sp.add_argument("--regime", choices=("small", "large"), required=True,
                    help="time regime")
    sp.add_argument("--t-min", type=float, default=None, help="window start")
    sp.add_argument("--t-max", type=float, default=None, help="window end")
    sp.add_argument("--norm", choices=("lq", "weak", "aq"), default="lq",
                    help="strong Lq, weak Lorentz proxy, or phi_0-weighted")
    sp.set_defaults(func=_cmd_decay)

    sp = sub.add_parser(
        "weighted-growth", help="center-slice growth exponent",
        description="Sample |sigma_t(0,0,a)| as a -> 0 and fit its growth "
                    "in log log(1/a).  CSV columns: a, log_inv_a "
                    "(= log(1/a)), abs_sigma; trailing comment line "
                    "carries slope, stderr, residual.")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--t", type=float, required=True, help="time, nonzero")
    sp.add_argument("--c", type=float, default=4.0,
                    help="concentration-zone constant (samples need "
                         "log(1/a) > 1 + c|t|)")
    sp.set_defaults(func=_cmd_weighted_growth)

    sp = sub.add_parser(
        "propagate", help="Schrodinger evolution of radial data",
        description="Evolve radial data under the spherical multiplier "
                    "e^{-it(s^2+Q^2/4)} and print the profiles.  CSV "
                    "columns: t, r, re, im (value of u(t, r)).  With "
                    "--distinguished the record carries the twisted "
                    "evolution used for the distinguished Laplacian.")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--data", required=True, metavar="SPEC",
                    help="initial data, e.g. gaussian:1.0")
    sp.add_argument("--t-max", type=float, default=None, help="final time")
    sp.add_argument("--t-steps", type=int, default=None, help="time samples")
    sp.add_argument("--r-max", type=float, default=60.0,
                    help="radial domain size")
    sp.add_argument("--r-points", type=int, default=80,
                    help="approximate radial samples per time in the output")
    sp.add_argument("--distinguished", action="store_true",
                    help="emit the twisted (distinguished) evolution")
    sp.set_defaults(func=_cmd_propagate)

    sp = sub.add_parser(
        "strichartz", help="mixed-norm ratio over a time window",
        description="Evolve gaussian data and report the window norm "
                    "(int ||u||_q^p dt)^{1/p} and its ratio to ||f||_2 as "
                    "JSON with schema_version, admissibility and grid "
                    "metadata.")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.add_argument("--p", required=True, help="time exponent >= 2 or 'inf'")
    sp.add_argument("--q", required=True, help="space exponent >= 2 or 'inf'")
    sp.add_argument("--window", required=True, metavar="A:B",
                    help="time window")
    sp.add_argument("--data", default="gaussian:1.0", metavar="SPEC",
                    help="initial data (default gaussian:1.0)")
    sp.set_defaults(func=_cmd_strichartz)

    sp = sub.add_parser(
        "acceptance", help="run the acceptance suite",
        description="Run every acceptance criterion and print one "
                    "PASS/FAIL line each.  With --m/--k (or --space) the "
                    "space-parameterised criteria restrict to that space; "
                    "criteria pinned to specific spaces keep them.  Exit "
                    "0 only if every criterion passes.")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_acceptance)

    sp = sub.add_parser(
        "config-dump", help="print the resolved configuration",
        description="Print the merged configuration (defaults, then "
                    "--config file, then flags) as INI text that --config "
                    "accepts back unchanged.")
    _add_space_flags(sp)
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_config_dump)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        cfg = (RunConfig() if args.config is None
               else RunConfig.from_file(args.config))
        overrides = {}
        for field in _CONFIG_LAYOUT:
            value = getattr(args, field, None)
            if value is not None:
                overrides[field] = value
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))  # exits 2

    sink = _Sink(_resolve(args, cfg, "out"))
    try:
        return args.func(args, cfg, sink)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (NonConvergenceError, ValueError, ZeroDivisionError,
            FloatingPointError, OverflowError) as exc:
        _emit_numeric_failure(exc)
        return 1
    finally:
        sink.close()


if __name__ == "__main__":
    sys.exit(main())

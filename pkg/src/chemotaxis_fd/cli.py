"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex
from .diagnostics import (
    DEFAULT_THRESHOLD,
    DecayFitError,
    Sampler,
    detect_time_scales,
    flatten_rate,
)
from .dynamics import (
    DEFAULT_N_FLOOR,
    DEFAULT_OBSERVER_DT,
    InstabilityError,
    ModelParams,
    StepControl,
    default_mesh,
    integrate,
    stable_dt,
)
from .grid import interior, make_grid, trapezoid
from .transform import InitialCondition, c_from_v

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
VERBS = ("simulate", "sweep", "timescales", "converge", "decay")
DEFAULT_CONVERGE_EPS = (0.2, 0.1, 0.05, 0.025, 0.0125)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class Command:
    verb: str
    options: argparse.Namespace


def _ranged(lo=None, hi=None, lo_open=False, hi_open=False, kind=float):
    def parse(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}")
        if kind is float and not math.isfinite(val):
            raise argparse.ArgumentTypeError(f"value must be finite: {text!r}")
        if lo is not None and (val < lo or (lo_open and val == lo)):
            raise argparse.ArgumentTypeError(f"{val} is out of range")
        if hi is not None and (val > hi or (hi_open and val == hi)):
            raise argparse.ArgumentTypeError(f"{val} is out of range")
        return val
    return parse


EPS = _ranged(0.0, 1.0, hi_open=True)
RATE = _ranged(0.0)
POSITIVE = _ranged(0.0, lo_open=True)
MESH = _ranged(4, kind=int)
AMPL_U = _ranged(0.0, 1.0, hi_open=True)


def _float_list(check):
    def parse(text):
        vals = [check(tok.strip()) for tok in text.split(",") if tok.strip()]
        if not vals:
            raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
        return vals
    return parse


def _add_model_flags(p, ic=True):
    p.add_argument("--eps", type=EPS, required=True, help="chemical diffusivity in [0, 1)")
    p.add_argument("--r", type=RATE, required=True, help="logistic growth rate (>= 0)")
    p.add_argument("--n", type=MESH, help="mesh intervals (default: mesh rule, floor 64)")
    p.add_argument("--dt", type=POSITIVE, help="time step (default: dx^2/2)")
    p.add_argument("--threshold", type=POSITIVE, default=DEFAULT_THRESHOLD)
    p.add_argument("--observer-dt", type=POSITIVE, default=DEFAULT_OBSERVER_DT)
    p.add_argument("--clamp-u", action="store_true",
                   help="set negative u to zero after each step (exploratory runs only)")
    if ic:
        _add_ic_flags(p)


def _add_ic_flags(p, default="paper"):
    p.add_argument("--ic", choices=("paper", "smooth"), default=default)
    p.add_argument("--a-u", type=AMPL_U, default=0.2, help="cosine amplitude of u0 (smooth IC)")
    p.add_argument("--a-v", type=float, default=0.2, help="sine amplitude of v0 (smooth IC)")


def _add_horizon(p, default=None, required=False):
    grp = p.add_mutually_exclusive_group(required=required)
    grp.add_argument("--t-end", dest="t_end", type=POSITIVE, default=default)
    grp.add_argument("--t-max", dest="t_end", type=POSITIVE, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chemotaxis-fd",
                     description="Finite-difference lab for the transformed "
                                 "chemotaxis system with logistic growth.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate one trajectory and write diagnostics")
    _add_model_flags(p)
    _add_horizon(p, required=True)
    p.add_argument("--snapshot-at", type=_float_list(_ranged(0.0)),
                   help="comma-separated times for x,u,v,c field snapshots")
    p.add_argument("--out", help="diagnostics CSV (default: stdout)")

    p = sub.add_parser("timescales", help="detect t_D, tau and t_L for one case")
    _add_model_flags(p)
    _add_horizon(p)
    p.add_argument("--out", help="write the table record as CSV")

    p = sub.add_parser("sweep", help="time-scale table over an (eps, r) grid")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--eps", type=_float_list(EPS), help="comma-separated eps values")
    p.add_argument("--r", type=_float_list(POSITIVE), help="comma-separated r values")
    _add_horizon(p)
    p.add_argument("--n", type=MESH)
    p.add_argument("--threshold", type=POSITIVE)
    p.add_argument("--observer-dt", type=POSITIVE)
    p.add_argument("--jobs", type=_ranged(1, kind=int), default=1)
    p.add_argument("--out", help="table CSV")

    p = sub.add_parser("converge", help="vanishing chemical diffusivity study")
    p.add_argument("--eps", type=_float_list(EPS), default=list(DEFAULT_CONVERGE_EPS),
                   help="descending comma-separated eps values")
    p.add_argument("--r", type=RATE, default=0.1)
    _add_horizon(p, default=1.0)
    p.add_argument("--n", type=MESH)
    p.add_argument("--observer-dt", type=POSITIVE, default=DEFAULT_OBSERVER_DT)
    _add_ic_flags(p, default="smooth")
    p.add_argument("--out", help="convergence CSV")

    p = sub.add_parser("decay", help="exponential tail fit after carrying-capacity arrival")
    _add_model_flags(p)
    _add_horizon(p, default=60.0)
    p.add_argument("--out", help="fit CSV")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> Command:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.verb == "sweep":
        if ns.config and (ns.eps or ns.r):
            parser.error("--config cannot be combined with --eps/--r")
        if not ns.config and not (ns.eps and ns.r):
            parser.error("sweep needs --config or both --eps and --r")
    if ns.verb == "simulate" and ns.snapshot_at and not ns.out:
        parser.error("--snapshot-at needs --out to name the snapshot files")
    return Command(ns.verb, ns)


def _initial_condition(o) -> InitialCondition:
    if o.ic == "smooth":
        return InitialCondition.smooth(o.a_u, o.a_v)
    return InitialCondition.paper()


def _mesh_warnings(eps: float, n: Optional[int], dt: Optional[float]) -> None:
    if n is not None and eps > 0 and not 1.0 / n < math.sqrt(eps / 10.0):
        warnings.warn(f"--n {n} violates the mesh rule dx < sqrt(eps/10) "
                      f"(needs n >= {default_mesh(eps, 1)})", stacklevel=2)
    if dt is not None:
        n_eff = n if n is not None else default_mesh(eps, DEFAULT_N_FLOOR)
        if dt > stable_dt(1.0 / n_eff):
            warnings.warn(f"--dt {dt:g} exceeds dx^2/2 = {stable_dt(1.0 / n_eff):g}",
                          stacklevel=2)


def _meta(o, keys) -> dict:
    out = {}
    if getattr(o, "ic", None) != "smooth":
        keys = [k for k in keys if k not in ("a_u", "a_v")]
    for k in keys:
        val = getattr(o, k, None)
        if val is None or val is False:
            continue
        if isinstance(val, list):
            val = ",".join(repr(float(x)) for x in val)
        out[k.replace("_", "-")] = val
    return out


class _SnapshotPicker:
    """Keeps, per requested time, the observed state closest to it."""

    def __init__(self, times):
        self.times = list(times)
        self.best = [None] * len(self.times)

    def __call__(self, s, g):
        for k, t in enumerate(self.times):
            cur = self.best[k]
            if cur is None or abs(s.t - t) < abs(cur.t - t):
                self.best[k] = s.copy()


def _write_snapshot(path: Path, s, g, meta: dict) -> None:
    c = c_from_v(s.v, g)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        fh.write(f"# t={s.t!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u", "v", "c"])
        for x, ui, vi, ci in zip(g.x, interior(s.u), interior(s.v), interior(c)):
            w.writerow([repr(float(x)), repr(float(ui)), repr(float(vi)), repr(float(ci))])


def _cmd_simulate(o) -> int:
    _mesh_warnings(o.eps, o.n, o.dt)
    n = o.n if o.n is not None else default_mesh(o.eps, DEFAULT_N_FLOOR)
    g = make_grid(n)
    s0 = _initial_condition(o).build(g)
    u_avg0 = trapezoid(interior(s0.u), g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ctrl = StepControl.default(n, o.t_end, observer_dt=o.observer_dt, dt=o.dt,
                                   clamp_u=o.clamp_u)
    observers = [Sampler(u_avg0)]
    picker = _SnapshotPicker(o.snapshot_at or [])
    if o.snapshot_at:
        observers.append(picker)
    meta = _meta(o, ["eps", "r", "n", "dt", "t_end", "threshold", "observer_dt",
                     "ic", "a_u", "a_v", "clamp_u"])
    meta.update({"n-effective": n, "dt-effective": ctrl.dt})
    try:
        _, samples = integrate(s0, ModelParams(o.eps, o.r), ctrl, observers)
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    cols, rows = ex.samples_to_rows(samples)
    fh = open(o.out, "w", encoding="utf-8", newline="") if o.out else sys.stdout
    try:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([ex._cell(float(x) if x is not None else None) for x in row])
    finally:
        if fh is not sys.stdout:
            fh.close()

    if o.snapshot_at:
        stem = Path(o.out)
        for t_req, s in zip(picker.times, picker.best):
            path = stem.with_name(f"{stem.stem}_snapshot_t{t_req:g}{stem.suffix or '.csv'}")
            _write_snapshot(path, s, g, {**meta, "requested-t": t_req})

    rep = detect_time_scales(samples, o.threshold)
    print(f"t_D={rep.t_D} tau={rep.tau} t_L={rep.t_L} regime={rep.regime}",
          file=sys.stderr if not o.out else sys.stdout)
    return EXIT_OK


def _cmd_timescales(o) -> int:
    _mesh_warnings(o.eps, o.n, o.dt)
    t_max = o.t_end if o.t_end is not None else (30.0 / o.r if o.r > 0 else 30.0)
    try:
        _, _, tracker = ex.simulate_case(
            o.eps, o.r, t_max, ic=_initial_condition(o), n=o.n, threshold=o.threshold,
            observer_dt=o.observer_dt, dt=o.dt, clamp_u=o.clamp_u)
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    rep = tracker.report()
    print(f"t_D={_fmt(rep.t_D)} leave={_fmt(rep.tau)} arrive={_fmt(rep.t_L)} "
          f"regime={rep.regime} relative_transition={_fmt(rep.relative_transition)}")
    if o.out:
        rec = ex.TableRecord(o.eps, o.r, rep.tau, rep.t_L, rep.regime,
                             rep.relative_transition, flatten_rate(rep), 0.0)
        ex.write_csv([rec], o.out, meta=_meta(o, ["eps", "r", "n", "dt", "t_end",
                                                   "threshold", "observer_dt", "ic"]))
    return EXIT_OK


def _fmt(x) -> str:
    return "NA" if x is None else f"{x:.6g}"


def _cmd_sweep(o) -> int:
    if o.config:
        cfg = ex.load_config(o.config)
    else:
        cfg = ex.SweepConfig(eps_list=o.eps, r_list=o.r)
    overrides = {"t_max": o.t_end, "n_override": o.n, "threshold": o.threshold,
                 "observer_dt": o.observer_dt, "out_path": o.out}
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    out_path, cfg.out_path = cfg.out_path, None
    records = ex.run_sweep(cfg, jobs=o.jobs)
    meta = {"eps-list": ",".join(map(repr, cfg.eps_list)),
            "r-list": ",".join(map(repr, cfg.r_list)),
            "threshold": cfg.threshold, "t-max": cfg.t_max, "n": cfg.n_override,
            "observer-dt": cfg.observer_dt}
    meta = {k: v for k, v in meta.items() if v is not None}
    if out_path:
        ex.write_csv(records, out_path, meta=meta)
    for rec in records:
        print(f"eps={rec.eps:g} r={rec.r:g} leave={_fmt(rec.leave_time)} "
              f"arrive={_fmt(rec.arrive_time)} regime={rec.regime}")
    return EXIT_NUMERIC if any(rec.regime == "error" for rec in records) else EXIT_OK


def _cmd_converge(o) -> int:
    eps = [float(e) for e in o.eps]
    if any(a < b for a, b in zip(eps, eps[1:])):
        raise UsageError("--eps must be sorted in descending order")
    try:
        records = ex.convergence_study(eps, o.t_end, ic=_initial_condition(o), n=o.n,
                                       r=o.r, observer_dt=o.observer_dt)
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for rec in records:
        print(f"eps={rec.eps:g} sup_h1_sq_diff={rec.sup_h1_sq_diff:.6e}")
    if o.out:
        ex.write_csv(records, o.out, meta=_meta(o, ["eps", "r", "t_end", "n", "observer_dt",
                                                     "ic", "a_u", "a_v"]),
                     record_type=ex.ConvergenceRecord)
    return EXIT_OK


def _cmd_decay(o) -> int:
    _mesh_warnings(o.eps, o.n, o.dt)
    try:
        fit = ex.decay_study(o.eps, o.r, _initial_condition(o), o.t_end, n=o.n, dt=o.dt,
                             threshold=o.threshold, observer_dt=o.observer_dt)
    except (InstabilityError, DecayFitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"rate={fit.rate:.6g} intercept={fit.intercept:.6g} "
          f"r_squared={fit.r_squared:.6f} window=({fit.window[0]:.4g}, {fit.window[1]:.4g})")
    if o.out:
        with open(o.out, "w", encoding="utf-8", newline="") as fh:
            for k, v in _meta(o, ["eps", "r", "t_end", "n", "threshold", "ic"]).items():
                fh.write(f"# {k}={v}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "r", "rate", "intercept", "r_squared", "t_start", "t_end"])
            w.writerow([repr(o.eps), repr(o.r), repr(fit.rate), repr(fit.intercept),
                        repr(fit.r_squared), repr(fit.window[0]), repr(fit.window[1])])
    return EXIT_OK


_DISPATCH = {
    "simulate": _cmd_simulate,
    "timescales": _cmd_timescales,
    "sweep": _cmd_sweep,
    "converge": _cmd_converge,
    "decay": _cmd_decay,
}


def dispatch(cmd: Command) -> int:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return _DISPATCH[cmd.verb](cmd.options)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cmd = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return dispatch(cmd)


if __name__ == "__main__":
    sys.exit(main())

"""Parameter sweeps, the vanishing-diffusivity study and decay fits."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .diagnostics import (
    DEFAULT_THRESHOLD,
    DecayFit,
    DecayFitError,
    Sampler,
    TimeScaleTracker,
    fit_decay,
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
)
from .grid import h1_sq, interior, make_grid, trapezoid
from .transform import InitialCondition

log = logging.getLogger(__name__)

PAPER_EPS = (0.0001, 0.001, 0.01, 0.1, 0.9)
PAPER_R = (1.0, 0.1, 0.01, 0.001)
DESK_EPS = (0.01, 0.1, 0.9)
DESK_R = (0.1, 0.01)


@dataclass
class SweepConfig:
    eps_list: Sequence[float] = DESK_EPS
    r_list: Sequence[float] = DESK_R
    threshold: float = DEFAULT_THRESHOLD
    t_max: Optional[float] = None
    n_override: Optional[int] = None
    observer_dt: float = DEFAULT_OBSERVER_DT
    out_path: Optional[str] = None

    def __post_init__(self):
        self.eps_list = tuple(float(e) for e in self.eps_list)
        self.r_list = tuple(float(r) for r in self.r_list)
        if not self.eps_list or not self.r_list:
            raise ValueError("eps_list and r_list must be nonempty")
        for e in self.eps_list:
            if not 0.0 <= e < 1.0:
                raise ValueError(f"eps values must lie in [0, 1), got {e}")
        for r in self.r_list:
            if not r > 0:
                raise ValueError(f"r values must be positive, got {r}")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not self.observer_dt > 0:
            raise ValueError("observer_dt must be positive")
        if self.n_override is not None:
            self.n_override = int(self.n_override)

    def horizon(self, r: float) -> float:
        """Per-case cutoff; ``30/r`` unless fixed explicitly."""
        if self.t_max is not None:
            return self.t_max
        return 30.0 / r if r > 0 else 30.0


def _parse_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


_CONFIG_PARSERS = {
    "eps_list": _parse_list,
    "r_list": _parse_list,
    "threshold": float,
    "t_max": float,
    "n_override": int,
    "observer_dt": float,
    "out_path": str,
}


def load_config(path) -> SweepConfig:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_PARSERS[key](val)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return SweepConfig(**values)


@dataclass
class TableRecord:
    eps: float
    r: float
    leave_time: Optional[float]
    arrive_time: Optional[float]
    regime: str
    relative_transition: Optional[float]
    flatten_rate: Optional[float]
    wall_time: float


@dataclass
class ConvergenceRecord:
    eps: float
    T: float
    sup_h1_sq_diff: float


def _mesh_for(eps: float, n_override: Optional[int]) -> int:
    return n_override if n_override is not None else default_mesh(eps, DEFAULT_N_FLOOR)


def simulate_case(eps: float, r: float, t_max: float, *, ic: InitialCondition | None = None,
                  n: Optional[int] = None, threshold: float = DEFAULT_THRESHOLD,
                  observer_dt: float = DEFAULT_OBSERVER_DT, stop_at_arrival: bool = True,
                  dt: Optional[float] = None, dt_factor: float = 1.0, clamp_u: bool = False):
    """Integrate one case; returns ``(final_state, samples, tracker)``."""
    ic = ic or InitialCondition.paper()
    n = _mesh_for(eps, n)
    g = make_grid(n)
    s0 = ic.build(g)
    u_avg0 = trapezoid(interior(s0.u), g)
    tracker = TimeScaleTracker(threshold)

    def stop(samples):
        tracker.update(samples[-1])
        return stop_at_arrival and tracker.t_L is not None

    ctrl = StepControl.default(n, t_max, observer_dt=observer_dt, dt=dt,
                               dt_factor=dt_factor, clamp_u=clamp_u)
    final, samples = integrate(s0, ModelParams(eps, r), ctrl, [Sampler(u_avg0)], stop)
    return final, samples, tracker


def run_case(eps: float, r: float, cfg: SweepConfig) -> TableRecord:
    start = time.perf_counter()
    try:
        _, _, tracker = simulate_case(
            eps, r, cfg.horizon(r), n=cfg.n_override,
            threshold=cfg.threshold, observer_dt=cfg.observer_dt)
    except InstabilityError as exc:
        raise InstabilityError(exc.t, exc.state, exc.samples,
                               context=f"case eps={eps:g}, r={r:g}") from exc
    report = tracker.report()
    return TableRecord(
        eps=eps,
        r=r,
        leave_time=report.tau,
        arrive_time=report.t_L,
        regime=report.regime,
        relative_transition=report.relative_transition,
        flatten_rate=flatten_rate(report),
        wall_time=time.perf_counter() - start,
    )


def _run_case_safe(args) -> TableRecord:
    eps, r, cfg = args
    try:
        return run_case(eps, r, cfg)
    except (InstabilityError, ValueError) as exc:
        log.warning("case eps=%g r=%g failed: %s", eps, r, exc)
        return TableRecord(eps, r, None, None, "error", None, None, 0.0)


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[TableRecord]:
    """Run every (eps, r) pair; records come back sorted by (eps, r)."""
    cases = [(e, r, cfg) for e in cfg.eps_list for r in cfg.r_list]
    if jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_case_safe, cases))
    else:
        records = [_run_case_safe(c) for c in cases]
    records.sort(key=lambda rec: (rec.eps, rec.r))
    if cfg.out_path:
        write_csv(records, cfg.out_path)
    return records


class _Snapshots:
    def __init__(self):
        self.frames = []

    def __call__(self, s, g):
        self.frames.append((s.t, s.u.copy(), s.v.copy()))


class _DiffTracker:
    def __init__(self, reference):
        self.reference = reference
        self.index = 0
        self.sup = 0.0

    def __call__(self, s, g):
        t_ref, u_ref, v_ref = self.reference[self.index]
        if not math.isclose(t_ref, s.t, rel_tol=0, abs_tol=1e-12):
            raise RuntimeError("reference and perturbed runs sampled at different times")
        self.index += 1
        diff = h1_sq(s.u - u_ref, g) + h1_sq(s.v - v_ref, g)
        self.sup = max(self.sup, diff)


def convergence_study(eps_list: Sequence[float], T: float,
                      ic: InitialCondition | None = None, n: Optional[int] = None,
                      r: float = 0.1, observer_dt: float = DEFAULT_OBSERVER_DT
                      ) -> list[ConvergenceRecord]:
    """Sup-in-time squared H1 distance between each eps run and eps = 0.

    All runs share one mesh and one time step, so fields are compared slot
    by slot without interpolation.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ValueError("eps_list must be nonempty")
    if any(not 0.0 <= e < 1.0 for e in eps_list):
        raise ValueError("eps values must lie in [0, 1)")
    if any(a < b for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be sorted in descending order")
    ic = ic or InitialCondition.smooth()
    if n is None:
        positive = [e for e in eps_list if e > 0]
        n = default_mesh(min(positive), DEFAULT_N_FLOOR) if positive else DEFAULT_N_FLOOR
    g = make_grid(n)
    ctrl = StepControl.default(n, T, observer_dt=observer_dt)
    s0 = ic.build(g)

    ref = _Snapshots()
    integrate(s0, ModelParams(0.0, r), ctrl, [ref])
    out = []
    for eps in eps_list:
        tracker = _DiffTracker(ref.frames)
        integrate(s0, ModelParams(eps, r), ctrl, [tracker])
        out.append(ConvergenceRecord(eps=eps, T=T, sup_h1_sq_diff=tracker.sup))
    return out


DECAY_DT_FACTOR = 0.9


def decay_study(eps: float, r: float, ic: InitialCondition | None = None,
                t_max: float = 60.0, *, n: Optional[int] = None,
                threshold: float = DEFAULT_THRESHOLD,
                observer_dt: float = DEFAULT_OBSERVER_DT,
                dt: Optional[float] = None,
                dt_factor: float = DECAY_DT_FACTOR) -> DecayFit:
    """Fit the exponential tail of ``||u-1||^2 + ||v||^2`` after arrival.

    Runs with a step slightly below ``dx**2/2`` by default: at the bound
    itself the checkerboard mode seeded by discontinuous data grows once u
    is close to 1 and swamps the tail being fitted.
    """
    if not r > 0:
        raise DecayFitError("t_L not reached: logistic rate r must be positive")
    if not eps > 0:
        raise ValueError("decay study needs eps > 0")
    _, samples, tracker = simulate_case(
        eps, r, t_max, ic=ic, n=n, threshold=threshold,
        observer_dt=observer_dt, stop_at_arrival=False, dt=dt, dt_factor=dt_factor)
    t_L = tracker.t_L
    if t_L is None:
        raise DecayFitError(f"t_L not reached before t_max={t_max}")
    return fit_decay(samples, (t_L, t_max + observer_dt))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(records: Iterable, path, meta: dict | None = None,
              record_type: type | None = None) -> None:
    """Write dataclass records as CSV.

    Optional values become empty cells.  ``meta`` entries are written first
    as ``# key=value`` comment lines.
    """
    records = list(records)
    if record_type is None:
        record_type = type(records[0]) if records else TableRecord
    columns = [f.name for f in fields(record_type)]
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            for key, val in (meta or {}).items():
                fh.write(f"# {key}={_cell(val)}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for rec in records:
                writer.writerow([_cell(getattr(rec, c)) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path) -> list[dict]:
    """Rows of a CSV written by :func:`write_csv` (comment lines skipped)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def samples_to_rows(samples) -> tuple[list[str], list[list]]:
    cols = ["t", "l2_ux_sq", "l2_u_minus_avg_sq", "l2_u_minus_1_sq",
            "l2_v_sq", "l2_vx_sq", "E1", "f_int", "min_u"]
    return cols, [[getattr(s, c) for c in cols] for s in samples]

"""Entropy functionals, threshold time-scale detection and decay fits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .dynamics import State
from .grid import Grid1D, d1, interior, l2_sq, trapezoid

POSITIVITY_FLOOR = 1e-12
NEGATIVITY_TOLERANCE = 1e-6
DEFAULT_THRESHOLD = 0.01


class NegativeDensityError(ValueError):
    pass


class DecayFitError(ValueError):
    pass


@dataclass(frozen=True)
class DiagnosticsSample:
    t: float
    l2_ux_sq: float
    l2_u_minus_avg_sq: float
    l2_u_minus_1_sq: float
    l2_v_sq: float
    l2_vx_sq: float
    E1: Optional[float]
    f_int: Optional[float]
    min_u: float

    def as_dict(self) -> dict:
        return asdict(self)


def eta_integral(u: np.ndarray, g: Grid1D) -> float:
    """Trapezoid integral of ``u ln u - u`` with ``0 ln 0 = 0``."""
    ui = interior(u)
    lo = float(ui.min())
    if lo < -NEGATIVITY_TOLERANCE:
        raise NegativeDensityError(f"u is materially negative (min {lo:.3e})")
    z = np.maximum(ui, 0.0)
    zlogz = np.zeros_like(z)
    pos = z > 0
    zlogz[pos] = z[pos] * np.log(z[pos])
    return trapezoid(zlogz - z, g)


def f_integral(u: np.ndarray, g: Grid1D) -> Optional[float]:
    """Trapezoid integral of ``u - ln u``, or None where u touches zero."""
    ui = interior(u)
    if ui.min() <= POSITIVITY_FLOOR:
        return None
    return trapezoid(ui - np.log(ui), g)


def lyapunov_E1(s: State, g: Grid1D) -> float:
    return eta_integral(s.u, g) + 0.5 * l2_sq(s.v, g)


def sample(s: State, g: Grid1D, u_avg0: float) -> DiagnosticsSample:
    u, v = s.u, s.v
    try:
        e1 = lyapunov_E1(s, g)
    except NegativeDensityError:
        # trajectory left the admissible set; keep sampling the norms
        e1 = None
    return DiagnosticsSample(
        t=float(s.t),
        l2_ux_sq=l2_sq(d1(u, g), g),
        l2_u_minus_avg_sq=l2_sq(u - u_avg0, g),
        l2_u_minus_1_sq=l2_sq(u - 1.0, g),
        l2_v_sq=l2_sq(v, g),
        l2_vx_sq=l2_sq(d1(v, g), g),
        E1=e1,
        f_int=f_integral(u, g),
        min_u=float(interior(u).min()),
    )


class Sampler:
    """Observer that records a :class:`DiagnosticsSample` per call."""

    def __init__(self, u_avg0: float):
        self.u_avg0 = u_avg0

    def __call__(self, s: State, g: Grid1D) -> DiagnosticsSample:
        return sample(s, g, self.u_avg0)


@dataclass(frozen=True)
class TimeScaleReport:
    t_D: Optional[float]
    tau: Optional[float]
    t_L: Optional[float]
    regime: str
    relative_transition: Optional[float]


class TimeScaleTracker:
    """Online version of :func:`detect_time_scales`.

    Feeding samples one at a time yields the same report as the batch
    function on the same list, which lets a run stop as soon as the
    arrival time is known.
    """

    def __init__(self, threshold: float = DEFAULT_THRESHOLD):
        if not threshold > 0:
            raise ValueError("threshold must be positive")
        self.threshold = threshold
        self.t_first: Optional[float] = None
        self.t_D: Optional[float] = None
        self.tau: Optional[float] = None
        self._arrive_any: Optional[float] = None
        self._arrive_after_tau: Optional[float] = None

    def update(self, smp: DiagnosticsSample) -> None:
        thr = self.threshold
        t = smp.t
        if self.t_first is None:
            self.t_first = t
        if self._arrive_any is None and smp.l2_u_minus_1_sq < thr:
            self._arrive_any = t
        if self.tau is not None:
            if self._arrive_after_tau is None and t > self.tau and smp.l2_u_minus_1_sq < thr:
                self._arrive_after_tau = t
        elif self.t_D is not None:
            if t > self.t_D and smp.l2_u_minus_avg_sq >= thr:
                self.tau = t
        elif smp.l2_ux_sq < thr:
            self.t_D = t

    @property
    def t_L(self) -> Optional[float]:
        return self._arrive_any if self.tau is None else self._arrive_after_tau

    def report(self) -> TimeScaleReport:
        if self.t_first is None:
            raise ValueError("no samples to analyse")
        t_D, tau, t_L = self.t_D, self.tau, self.t_L
        rel = None
        if t_D is not None and t_L is not None and t_D == t_L == self.t_first:
            regime = "degenerate"
        elif t_D is not None and tau is not None and t_L is not None:
            regime = "normal"
            rel = (t_L - tau) / t_L
        elif t_L is not None and (tau is None or (t_D is not None and t_L < t_D)):
            regime = "bypassed"
        else:
            regime = "incomplete"
        return TimeScaleReport(t_D, tau, t_L, regime, rel)


def detect_time_scales(samples: Sequence[DiagnosticsSample],
                       threshold: float = DEFAULT_THRESHOLD) -> TimeScaleReport:
    """First-crossing times of the three L2 thresholds along a trajectory.

    * ``t_D``: first sample with ``||u_x||^2 < threshold``
    * ``tau``: first sample after ``t_D`` with ``||u - avg0||^2 >= threshold``
    * ``t_L``: first sample after ``tau`` (or from the start when ``tau`` is
      undefined) with ``||u - 1||^2 < threshold``
    """
    if len(samples) == 0:
        raise ValueError("no samples to analyse")
    tracker = TimeScaleTracker(threshold)
    for smp in samples:
        tracker.update(smp)
    return tracker.report()


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


def _decay_quantity(smp: DiagnosticsSample) -> float:
    return smp.l2_u_minus_1_sq + smp.l2_v_sq


def fit_decay(samples: Iterable[DiagnosticsSample], window: tuple[float, float],
              min_samples: int = 10) -> DecayFit:
    """Least-squares line through ``(t, ln(||u-1||^2 + ||v||^2))``.

    Only samples strictly inside ``window`` are used.  ``rate`` is the
    negated slope.
    """
    t0, t1 = window
    pts = [(s.t, _decay_quantity(s)) for s in samples if t0 < s.t < t1]
    if len(pts) < min_samples:
        raise DecayFitError(
            f"need at least {min_samples} samples inside ({t0}, {t1}), got {len(pts)}")
    t = np.array([p[0] for p in pts])
    q = np.array([p[1] for p in pts])
    if np.any(q <= 0) or not np.all(np.isfinite(np.log(q))):
        raise DecayFitError("converged below floor: decay quantity underflowed to 0")
    y = np.log(q)
    A = np.vstack([t, np.ones_like(t)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y * y))):
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return DecayFit(rate=-float(slope), intercept=float(intercept),
                    r_squared=r2, window=(float(t0), float(t1)))


def flatten_rate(report: TimeScaleReport) -> Optional[float]:
    if report.t_D is None or report.t_D <= 0 or not math.isfinite(report.t_D):
        return None
    return 1.0 / report.t_D

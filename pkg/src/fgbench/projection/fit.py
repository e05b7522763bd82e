"""Work-rate regression: rate per lane as a saturating function of work per lane."""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

SAMPLE_COLUMNS = ("algorithm", "family", "scale", "nodes", "work_per_lane", "rate_per_lane")


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class WorkRateSample:
    algorithm: str
    family: str
    scale: int
    nodes: int
    work_per_lane: float
    rate_per_lane: float

    def __post_init__(self):
        if not (self.work_per_lane > 0 and self.rate_per_lane > 0):
            raise ValueError("work_per_lane and rate_per_lane must be positive")


def sigmoid(x, c, x0, k):
    """c*x / (1 + (x/x0)^k)."""
    x = np.asarray(x, dtype=np.float64)
    return c * x / (1.0 + (x / x0) ** k)


@dataclass(frozen=True)
class WorkRateModel:
    c: float
    x0: float
    k: float
    rate_cutoff: float
    rms_log_residual: float = 0.0
    sample_count: int = 0
    monotone: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.c > 0 and self.x0 > 0 and self.rate_cutoff > 0):
            raise FitError("c, x0 and rate_cutoff must be positive")

    def raw(self, x):
        return sigmoid(x, self.c, self.x0, self.k)

    def rate(self, x):
        """min(f(x), cutoff)."""
        return np.minimum(self.raw(x), self.rate_cutoff)

    def check_monotone(self, lo: float, hi: float, points: int = 400) -> bool:
        xs = np.geomspace(lo, hi, points)
        r = self.rate(xs)
        return bool(np.all(np.diff(r) >= -1e-12 * np.abs(r[:-1])))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "WorkRateModel":
        return cls(**d)


def _residuals(theta, lx, ly):
    lc, lx0, k = theta
    # log f = log c + log x - log(1 + exp(k (log x - log x0)))
    return lc + lx - np.logaddexp(0.0, k * (lx - lx0)) - ly


def fit_work_rate(samples=None, x=None, y=None, starts: int = 5, k_bounds=(0.05, 20.0)) -> WorkRateModel:
    """Least squares of log rate on log work over (log c, log x0, k), best of ``starts`` starts.

    Accepts WorkRateSample objects or raw ``x`` (work/lane) and ``y`` (rate/lane).
    Needs >= 4 samples spanning at least one decade of work per lane.
    """
    if samples is not None:
        x = np.array([s.work_per_lane for s in samples], dtype=np.float64)
        y = np.array([s.rate_per_lane for s in samples], dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1-d arrays of equal length")
    if x.size < 4:
        raise FitError(f"need at least 4 samples, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x * y)):
        raise FitError("samples must be positive and finite")
    if x.max() / x.min() < 10.0:
        raise FitError("samples must span at least one decade of work per lane")
    lx, ly = np.log(x), np.log(y)
    # slope-1 intercept of the low-work end seeds c; x0 guesses spread over the range
    low = lx <= np.quantile(lx, 0.25)
    lc0 = float(np.median(ly[low] - lx[low]))
    guesses_x0 = np.quantile(lx, np.linspace(0.15, 0.85, starts))
    guesses_k = np.resize([1.0, 2.0, 0.7, 1.5, 3.0], starts)
    lo = [-np.inf, lx.min() - 10.0, k_bounds[0]]
    hi = [np.inf, lx.max() + 10.0, k_bounds[1]]
    best = None
    for g_x0, g_k in zip(guesses_x0, guesses_k):
        r = least_squares(_residuals, [lc0, g_x0, g_k], args=(lx, ly), bounds=(lo, hi),
                          method="trf", x_scale="jac", xtol=1e-12, ftol=1e-12, gtol=1e-12)
        if best is None or r.cost < best.cost:
            best = r
    lc, lx0, k = best.x
    resid = _residuals(best.x, lx, ly)
    cutoff = float(y.max())
    model = WorkRateModel(float(np.exp(lc)), float(np.exp(lx0)), float(k), cutoff,
                          float(np.sqrt(np.mean(resid ** 2))), int(x.size))
    mono = model.check_monotone(x.min() / 10.0, x.max() * 1e9)
    diag = {"cost": float(best.cost), "status": int(best.status), "x_range": [float(x.min()), float(x.max())]}
    return WorkRateModel(model.c, model.x0, model.k, cutoff, model.rms_log_residual, model.sample_count,
                         mono, diag)


def read_samples(path) -> list[WorkRateSample]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        missing = set(SAMPLE_COLUMNS) - set(r)
        if missing:
            raise FitError(f"{path}: missing columns {sorted(missing)}")
        out.append(WorkRateSample(r["algorithm"], r["family"], int(r["scale"]), int(r["nodes"]),
                                  float(r["work_per_lane"]), float(r["rate_per_lane"])))
    return out


def samples_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SAMPLE_COLUMNS, lineterminator="\n")
    w.writeheader()
    for s in samples:
        w.writerow({k: getattr(s, k) for k in SAMPLE_COLUMNS})
    return buf.getvalue()

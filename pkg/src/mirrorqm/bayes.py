"""Joint detection densities P(x, t) and their Bayes decompositions.

P(x, t) = f(t) |psi(x|t)|^2 = g(x) |phi(t|x)|^2.  Everything here works at
the density level, so the amplitude phases never enter.  Arrays are indexed
(x, t) like :class:`~mirrorqm.core.JointDensity`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy import stats

from .core import Grid1D, JointDensity, RealField, trapezoid, trapezoid_weights

__all__ = [
    "DetectionEvent",
    "EventLog",
    "Conditionals",
    "EmpiricalMarginals",
    "joint_density",
    "marginals",
    "conditionals",
    "reconstruct_f",
    "reconstruct_f_all",
    "sample_events",
    "empirical_marginals",
    "grid_cdf",
]

NORM_TOL = 1e-6
# marginal values below this fraction of their peak leave the conditional undefined
DEFINED_THRESHOLD = 1e-12
SINGULAR_FLOOR = 1e-300


@dataclass(frozen=True)
class DetectionEvent:
    x: float
    t: float


@dataclass(frozen=True)
class EventLog:
    """Detection events in draw order, with the seed and model that produced them."""

    x: np.ndarray
    t: np.ndarray
    seed: int
    model: str = ""

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if x.shape != t.shape or x.ndim != 1:
            raise ValueError("event coordinates must be 1D arrays of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
            raise ValueError("event coordinates must be finite")
        x.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    def __len__(self) -> int:
        return self.x.size

    def __iter__(self) -> Iterator[DetectionEvent]:
        for x, t in zip(self.x.tolist(), self.t.tolist()):
            yield DetectionEvent(x, t)

    @property
    def events(self) -> list[DetectionEvent]:
        return list(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.model == other.model
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.t, other.t)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Conditionals:
    """Conditional densities; undefined slices are NaN and flagged False."""

    psi_sq: np.ndarray
    phi_sq: np.ndarray
    t_defined: np.ndarray
    x_defined: np.ndarray


@dataclass(frozen=True)
class EmpiricalMarginals:
    t_hist: RealField
    x_hist: RealField
    ks_t: float | None
    ks_x: float | None
    outside_t: int
    outside_x: int


def joint_density(f: RealField, psi_sq: np.ndarray, x_grid: Grid1D) -> JointDensity:
    """P(x, t) = f(t) |psi(x|t)|^2 from a time weighting and fixed-time densities."""
    t_grid = f.grid
    psi_sq = np.asarray(psi_sq, dtype=float)
    if psi_sq.shape != (x_grid.count, t_grid.count):
        raise ValueError(
            f"psi_sq has shape {psi_sq.shape}, expected ({x_grid.count}, {t_grid.count})"
        )
    if np.any(f.values < 0):
        raise ValueError("f: time weighting must be nonnegative")
    f_total = f.integral()
    if abs(f_total - 1.0) > NORM_TOL:
        raise ValueError(f"f: time weighting integrates to {f_total:.10g}, not 1")
    if np.any(psi_sq < 0):
        raise ValueError("psi_sq: densities must be nonnegative")
    slices = trapezoid(psi_sq, x_grid, axis=0)
    bad = np.flatnonzero(np.abs(slices - 1.0) > NORM_TOL)
    if bad.size:
        i = bad[0]
        raise ValueError(
            f"psi_sq: slice at t = {t_grid.point(i):.6g} integrates to "
            f"{slices[i]:.10g} over x ({bad.size} slices not normalized)"
        )
    return JointDensity(x_grid, t_grid, psi_sq * f.values[None, :])


def marginals(joint: JointDensity) -> tuple[RealField, RealField]:
    """Time marginal f(t) and position marginal g(x)."""
    f = trapezoid(joint.values, joint.x_grid, axis=0)
    g = trapezoid(joint.values, joint.t_grid, axis=1)
    return RealField(joint.t_grid, f), RealField(joint.x_grid, g)


def _defined(marginal: np.ndarray, threshold: float) -> np.ndarray:
    peak = marginal.max()
    return marginal > threshold * peak if peak > 0 else np.zeros(marginal.shape, bool)


def conditionals(
    joint: JointDensity, threshold: float = DEFINED_THRESHOLD
) -> Conditionals:
    """psi_sq(x|t) = P/f(t) and phi_sq(t|x) = P/g(x) where the marginal is not negligible."""
    f, g = marginals(joint)
    t_ok = _defined(f.values, threshold)
    x_ok = _defined(g.values, threshold)
    psi_sq = np.full(joint.values.shape, np.nan)
    phi_sq = np.full(joint.values.shape, np.nan)
    psi_sq[:, t_ok] = joint.values[:, t_ok] / f.values[t_ok][None, :]
    phi_sq[x_ok, :] = joint.values[x_ok, :] / g.values[x_ok][:, None]
    for arr in (psi_sq, phi_sq, t_ok, x_ok):
        arr.setflags(write=False)
    return Conditionals(psi_sq, phi_sq, t_ok, x_ok)


def _ratio_integral(psi_col: np.ndarray, phi_col: np.ndarray, x_grid: Grid1D) -> float:
    # NaN marks an undefined conditional slice (negligible g); it is skipped
    live = (psi_col > 0) & ~np.isnan(phi_col)
    small = ~(phi_col >= SINGULAR_FLOOR)
    if np.any(live & small):
        i = np.flatnonzero(live & small)[0]
        raise ZeroDivisionError(
            f"singular configuration: phi_sq vanishes at x = {x_grid.point(i):.6g} "
            "where psi_sq does not"
        )
    ratio = np.where(live, psi_col / np.where(small, 1.0, phi_col), 0.0)
    return trapezoid(ratio, x_grid)


def reconstruct_f(
    psi_sq: np.ndarray,
    phi_sq: np.ndarray,
    x_grid: Grid1D,
    t_grid: Grid1D,
    t: float,
) -> float:
    """Time weighting at ``t`` from the two conditionals:
    f(t) = 1 / int psi_sq(x|t) / phi_sq(t|x) dx.

    Positions whose phi_sq slice is undefined (NaN, see :func:`conditionals`)
    are left out.  A defined phi_sq below 1e-300 where psi_sq is positive
    raises ZeroDivisionError.
    """
    j = t_grid.index_of(t)
    integral = _ratio_integral(np.asarray(psi_sq)[:, j], np.asarray(phi_sq)[:, j], x_grid)
    if integral <= 0:
        raise ZeroDivisionError(f"psi_sq(x|t) vanishes for every x at t = {t}")
    return 1.0 / integral


def reconstruct_f_all(
    psi_sq: np.ndarray, phi_sq: np.ndarray, x_grid: Grid1D, t_grid: Grid1D
) -> RealField:
    """:func:`reconstruct_f` at every time sample."""
    out = np.empty(t_grid.count)
    for j in range(t_grid.count):
        out[j] = 1.0 / _ratio_integral(psi_sq[:, j], phi_sq[:, j], x_grid)
    return RealField(t_grid, out)


def _cell_bounds(grid: Grid1D, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # trapezoid cells: [p - h/2, p + h/2], clipped to the grid at both ends
    centre = grid.start + idx * grid.step
    lo = np.maximum(centre - 0.5 * grid.step, grid.start)
    hi = np.minimum(centre + 0.5 * grid.step, grid.stop)
    return lo, hi


def _inverse_cdf(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cumulative, u * cumulative[-1], side="right")
    return np.minimum(idx, cumulative.size - 1)


def sample_events(joint: JointDensity, n: int, seed: int, model: str = "") -> EventLog:
    """Draw ``n`` detection events from a gridded joint density.

    Each sample point owns its trapezoid cell.  The time cell is drawn from the
    time marginal, the position cell from the conditional on that time, and
    the event is placed uniformly inside both cells.  A counter-based Philox
    stream keyed by ``seed`` makes the log reproducible.
    """
    if n < 1:
        raise ValueError(f"need at least one event, got n={n}")
    xg, tg = joint.x_grid, joint.t_grid
    mass = joint.values * trapezoid_weights(xg)[:, None] * trapezoid_weights(tg)[None, :]
    col = mass.sum(axis=0)
    if not col.sum() > 0:
        raise ValueError("joint density has no mass")

    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((4, n))

    j = _inverse_cdf(np.cumsum(col), u[0])
    i = np.empty(n, dtype=np.int64)
    cum_x = np.cumsum(mass, axis=0)
    for jj in np.unique(j):
        sel = j == jj
        i[sel] = _inverse_cdf(cum_x[:, jj], u[1][sel])

    t_lo, t_hi = _cell_bounds(tg, j)
    x_lo, x_hi = _cell_bounds(xg, i)
    t = t_lo + u[2] * (t_hi - t_lo)
    x = x_lo + u[3] * (x_hi - x_lo)
    return EventLog(x, t, seed, model)


def grid_cdf(density: RealField) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise-linear CDF from the cumulative trapezoid of a gridded density."""
    g = density.grid
    v = density.values
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * g.step)))
    cum /= cum[-1]
    pts = g.points
    return lambda x: np.interp(x, pts, cum, left=0.0, right=1.0)


def _histogram(values: np.ndarray, grid: Grid1D) -> tuple[RealField, int]:
    edges = np.concatenate(
        ([grid.start], grid.start + (np.arange(grid.count - 1) + 0.5) * grid.step, [grid.stop])
    )
    inside = (values >= grid.start) & (values <= grid.stop)
    counts, _ = np.histogram(values[inside], bins=edges)
    total = max(values.size, 1)
    return RealField(grid, counts / (total * np.diff(edges))), int((~inside).sum())


def _ks(values: np.ndarray, reference) -> float | None:
    if reference is None:
        return None
    cdf = reference if callable(reference) else grid_cdf(reference)
    return float(stats.kstest(values, cdf).statistic)


def empirical_marginals(
    log: EventLog,
    t_grid: Grid1D,
    x_grid: Grid1D,
    t_reference=None,
    x_reference=None,
) -> EmpiricalMarginals:
    """Histograms of event times and positions, plus KS distances.

    References are either CDF callables or gridded densities (RealField).
    Events outside a grid are counted, excluded from that histogram, and still
    enter the KS statistic.
    """
    if len(log) == 0:
        raise ValueError("event log is empty")
    t_hist, out_t = _histogram(log.t, t_grid)
    x_hist, out_x = _histogram(log.x, x_grid)
    return EmpiricalMarginals(
        t_hist, x_hist, _ks(log.t, t_reference), _ks(log.x, x_reference), out_t, out_x
    )

"""Grids, sampled fields and momentum spectra shared by the physics modules.

Every physics routine takes an explicit :class:`PhysicalConstants`; natural
units (hbar = m = 1) are the default.  Grids are uniform and all integrals are
trapezoid sums over grid samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

__all__ = [
    "NumericalGuardError",
    "PhaseResolutionError",
    "SpectrumTruncationError",
    "BoundaryDecayError",
    "PhysicalConstants",
    "NATURAL",
    "Grid1D",
    "make_grid",
    "ComplexField",
    "RealField",
    "MomentumSpectrum",
    "PseudoSpinorField",
    "JointAmplitude",
    "JointDensity",
    "trapezoid",
    "trapezoid_weights",
    "gaussian_amplitude",
    "gaussian_spectrum",
    "normalize_spectrum",
]

Branch = Literal["plus", "minus", "both"]

# fraction of the untruncated |C|^2 mass a spectrum grid may lose
TRUNCATION_TOLERANCE = 0.01


class NumericalGuardError(ValueError):
    """A numerical precondition (resolution, truncation, decay) is violated."""


class PhaseResolutionError(NumericalGuardError):
    def __init__(self, message: str, required_count: int):
        super().__init__(message)
        self.required_count = required_count


class SpectrumTruncationError(NumericalGuardError):
    pass


class BoundaryDecayError(NumericalGuardError):
    def __init__(self, message: str, edge: str):
        super().__init__(message)
        self.edge = edge


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self) -> None:
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive and finite, got {self.mass}")


NATURAL = PhysicalConstants()


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``start + i * step`` for ``0 <= i < count``."""

    start: float
    step: float
    count: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start) and math.isfinite(self.step)):
            raise ValueError("grid start and step must be finite")
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")
        object.__setattr__(self, "count", int(self.count))

    @property
    def stop(self) -> float:
        return self.start + (self.count - 1) * self.step

    @property
    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    @property
    def span(self) -> float:
        return (self.count - 1) * self.step

    def point(self, i: int) -> float:
        if not 0 <= i < self.count:
            raise IndexError(f"grid index {i} out of range [0, {self.count})")
        return self.start + i * self.step

    def index_of(self, value: float, tol: float = 1e-9) -> int:
        """Index of the grid point equal to ``value`` (within ``tol`` steps)."""
        pos = (value - self.start) / self.step
        i = int(round(pos))
        # rounding in start + i*step scales with the magnitudes involved
        slack = 8 * np.finfo(float).eps * max(abs(self.start), abs(value)) / self.step
        if abs(pos - i) > tol + slack or not 0 <= i < self.count:
            raise ValueError(f"{value} is not a point of {self}")
        return i

    def nearest_index(self, value: float) -> int:
        i = int(round((value - self.start) / self.step))
        return min(max(i, 0), self.count - 1)

    def __len__(self) -> int:
        return self.count


def make_grid(start: float, stop: float, count: int) -> Grid1D:
    """Uniform grid on ``[start, stop]`` with both endpoints included."""
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValueError(f"grid bounds must be finite, got ({start}, {stop})")
    if int(count) != count or count < 2:
        raise ValueError(f"grid needs at least 2 points, got {count}")
    if stop <= start:
        raise ValueError(f"grid stop ({stop}) must exceed start ({start})")
    return Grid1D(float(start), (stop - start) / (count - 1), int(count))


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    w = np.full(grid.count, grid.step)
    w[0] = w[-1] = 0.5 * grid.step
    return w


def trapezoid(values: np.ndarray, grid: Grid1D, axis: int = -1) -> np.ndarray | float:
    """Trapezoid rule on a uniform grid along ``axis``.

    The sum order is fixed (interior sum, then endpoints) so results do not
    depend on how callers partition work.
    """
    values = np.asarray(values)
    if values.shape[axis] != grid.count:
        raise ValueError(
            f"axis {axis} has {values.shape[axis]} samples, grid has {grid.count}"
        )
    v = np.moveaxis(values, axis, -1)
    total = v[..., 1:-1].sum(axis=-1) + 0.5 * (v[..., 0] + v[..., -1])
    total = total * grid.step
    return total.item() if np.ndim(total) == 0 else total


def _check_length(name: str, values: np.ndarray, grid: Grid1D) -> None:
    if values.ndim != 1 or values.shape[0] != grid.count:
        raise ValueError(
            f"{name} has shape {values.shape}, expected ({grid.count},) for its grid"
        )


@dataclass(frozen=True)
class ComplexField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        _check_length("values", vals, self.grid)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def norm_sq(self) -> float:
        return trapezoid(np.abs(self.values) ** 2, self.grid)


@dataclass(frozen=True)
class RealField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        _check_length("values", vals, self.grid)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def integral(self) -> float:
        return trapezoid(self.values, self.grid)


@dataclass(frozen=True)
class MomentumSpectrum:
    """Branch amplitudes C+ and C- sampled on a grid of strictly positive P."""

    grid: Grid1D
    c_plus: np.ndarray
    c_minus: np.ndarray

    def __post_init__(self) -> None:
        if self.grid.start <= 0:
            raise ValueError(
                f"momentum grid must lie in P > 0, starts at {self.grid.start}"
            )
        for name in ("c_plus", "c_minus"):
            vals = np.asarray(getattr(self, name), dtype=complex)
            _check_length(name, vals, self.grid)
            vals.setflags(write=False)
            object.__setattr__(self, name, vals)

    def branch_weights(self) -> tuple[float, float]:
        return (
            trapezoid(np.abs(self.c_plus) ** 2, self.grid),
            trapezoid(np.abs(self.c_minus) ** 2, self.grid),
        )

    def total_weight(self) -> float:
        wp, wm = self.branch_weights()
        return wp + wm

    def is_one_sided(self) -> bool:
        return not np.any(self.c_minus)

    def with_phase(self, phase: np.ndarray) -> MomentumSpectrum:
        """Multiply both branches by ``phase`` sampled on the P grid."""
        return MomentumSpectrum(
            self.grid, self.c_plus * phase, self.c_minus * phase
        )

    def plus_only(self) -> MomentumSpectrum:
        return MomentumSpectrum(self.grid, self.c_plus, np.zeros(self.grid.count))


@dataclass(frozen=True)
class PseudoSpinorField:
    """Two-component amplitude (phi+, phi-) on a time grid at fixed x."""

    grid: Grid1D
    plus: np.ndarray
    minus: np.ndarray
    x: float

    def __post_init__(self) -> None:
        for name in ("plus", "minus"):
            vals = np.asarray(getattr(self, name), dtype=complex)
            _check_length(name, vals, self.grid)
            vals.setflags(write=False)
            object.__setattr__(self, name, vals)

    def density(self) -> np.ndarray:
        return np.abs(self.plus) ** 2 + np.abs(self.minus) ** 2


def _check_2d(values: np.ndarray, x_grid: Grid1D, t_grid: Grid1D) -> None:
    if values.shape != (x_grid.count, t_grid.count):
        raise ValueError(
            f"2D samples have shape {values.shape}, "
            f"expected (x, t) = ({x_grid.count}, {t_grid.count})"
        )


@dataclass(frozen=True)
class JointAmplitude:
    """Samples of the joint amplitude Psi(x & t); axis 0 is x, axis 1 is t."""

    x_grid: Grid1D
    t_grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        _check_2d(vals, self.x_grid, self.t_grid)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def norm_sq(self) -> float:
        dens = np.abs(self.values) ** 2
        return trapezoid(trapezoid(dens, self.t_grid, axis=1), self.x_grid)

    def density(self) -> JointDensity:
        return JointDensity(self.x_grid, self.t_grid, np.abs(self.values) ** 2)


@dataclass(frozen=True)
class JointDensity:
    """Nonnegative samples of P(x, t); axis 0 is x, axis 1 is t."""

    x_grid: Grid1D
    t_grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        _check_2d(vals, self.x_grid, self.t_grid)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("joint density must be finite and nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def total(self) -> float:
        return trapezoid(trapezoid(self.values, self.t_grid, axis=1), self.x_grid)

    def normalized(self) -> JointDensity:
        total = self.total()
        if total <= 0:
            raise ValueError("cannot normalize a zero joint density")
        return JointDensity(self.x_grid, self.t_grid, self.values / total)


def gaussian_amplitude(p: np.ndarray, p0: float, sigma: float) -> np.ndarray:
    """Unnormalized amplitude whose square is a Gaussian of std ``sigma``."""
    return np.exp(-((np.asarray(p) - p0) ** 2) / (4.0 * sigma**2))


def _gaussian_mass_outside(lo: float, hi: float, p0: float, sigma: float) -> float:
    s = sigma * math.sqrt(2.0)
    return 0.5 * math.erfc((p0 - lo) / s) + 0.5 * math.erfc((hi - p0) / s)


def gaussian_spectrum(
    p0: float, sigma: float, grid: Grid1D, branch: Branch = "plus"
) -> MomentumSpectrum:
    """Normalized Gaussian momentum spectrum with |C|^2 centred at ``p0``.

    Raises SpectrumTruncationError when more than 1% of the untruncated
    Gaussian mass falls outside the grid.
    """
    if p0 <= 0 or sigma <= 0:
        raise ValueError(f"need p0 > 0 and sigma > 0, got p0={p0}, sigma={sigma}")
    if grid.start <= 0:
        raise ValueError(f"momentum grid must lie in P > 0, starts at {grid.start}")
    if branch not in ("plus", "minus", "both"):
        raise ValueError(f"unknown branch {branch!r}")
    lost = _gaussian_mass_outside(grid.start, grid.stop, p0, sigma)
    if lost > TRUNCATION_TOLERANCE:
        raise SpectrumTruncationError(
            f"{lost:.3%} of the Gaussian spectrum (p0={p0}, sigma={sigma}) lies "
            f"outside [{grid.start}, {grid.stop}]; widen the momentum grid"
        )
    amp = gaussian_amplitude(grid.points, p0, sigma).astype(complex)
    zero = np.zeros(grid.count, dtype=complex)
    if branch == "plus":
        spec = MomentumSpectrum(grid, amp, zero)
    elif branch == "minus":
        spec = MomentumSpectrum(grid, zero, amp)
    else:
        spec = MomentumSpectrum(grid, amp, amp)
    return normalize_spectrum(spec)


def normalize_spectrum(spec: MomentumSpectrum) -> MomentumSpectrum:
    total = spec.total_weight()
    if not total > 0:
        raise ValueError("cannot normalize a spectrum with zero total weight")
    if total == 1.0:
        return spec
    scale = 1.0 / math.sqrt(total)
    return MomentumSpectrum(spec.grid, spec.c_plus * scale, spec.c_minus * scale)

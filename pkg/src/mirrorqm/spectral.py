"""Fourier representations and the Riemann-Liouville half-derivative.

The half-derivative (lower limit -inf) acts on a Fourier mode exp(-i w t) as
multiplication by sqrt(-i w), principal branch:

    sqrt(-i w) = sqrt(|w|) * exp(-i pi/4 * sign(w)),   0 at w = 0.

On a finite grid the operator is applied through the DFT.  The plain DFT is
periodic, so signals that neither decay nor wrap cleanly need either a taper
(:func:`smooth_window`) or ``boundary="extrapolate"``, which continues the
signal past both edges by linear prediction before transforming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter, lfiltic

from .core import (
    NATURAL,
    BoundaryDecayError,
    ComplexField,
    Grid1D,
    JointAmplitude,
    PhysicalConstants,
    RealField,
    trapezoid,
)

__all__ = [
    "angular_frequencies",
    "half_multiplier",
    "half_derivative",
    "time_derivative",
    "smooth_window",
    "JointSpectrum",
    "joint_fourier",
    "mean_energy",
    "mean_momentum",
]

Boundary = Literal["periodic", "extrapolate"]


def angular_frequencies(n: int, step: float) -> np.ndarray:
    """Frequencies w of the DFT modes, written as exp(-i w t), in numpy FFT order."""
    return -2.0 * np.pi * np.fft.fftfreq(n, step)


def half_multiplier(w: np.ndarray, branch: int = 1) -> np.ndarray:
    """Transfer function of the half-derivative for modes exp(-i w t).

    ``branch=-1`` swaps the e^{-+i pi/4} phases.  It is the wrong branch and
    exists only so the verification suite can show it detects the swap.
    """
    w = np.asarray(w, dtype=float)
    if branch == 1:
        return np.sqrt(-1j * w)
    if branch == -1:
        return np.sqrt(1j * w)
    raise ValueError(f"branch must be +1 or -1, got {branch}")


def _bump_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step rising from 0 at u <= 0 to 1 at u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def smooth_window(count: int, taper: float) -> np.ndarray:
    """Window that is 1 in the middle and falls smoothly to 0 over ``taper``
    (a fraction of ``count``) at each end."""
    if not 0 < taper <= 0.5:
        raise ValueError(f"taper fraction must be in (0, 0.5], got {taper}")
    i = np.arange(count, dtype=float)
    width = taper * (count - 1)
    return _bump_step(i / width) * _bump_step((count - 1 - i) / width)


def _prediction_filter(block: np.ndarray, order: int) -> np.ndarray:
    """Forward linear-prediction coefficients, stabilized by root reflection.

    Returns ``a`` with x[n] = sum_k a[k] * x[n - 1 - k].
    """
    rows = sliding_window_view(block, order)[:-1]
    target = block[order:]
    coef, *_ = np.linalg.lstsq(rows[:, ::-1], target, rcond=1e-10)
    if not np.any(coef):
        return coef
    roots = np.roots(np.concatenate(([1.0], -coef)))
    outside = np.abs(roots) > 1.0
    roots[outside] = 1.0 / np.conj(roots[outside])
    return -np.poly(roots)[1:]


def _extrapolate(block: np.ndarray, steps: int, order: int) -> np.ndarray:
    """Continue ``block`` forward by ``steps`` samples."""
    coef = _prediction_filter(block, order)
    if not np.any(coef):
        return np.zeros(steps, dtype=complex)
    den = np.concatenate(([1.0], -coef))
    history = block[::-1][:order]
    zi = lfiltic([1.0], den, history)
    out, _ = lfilter([1.0], den, np.zeros(steps, dtype=complex), zi=zi)
    return out


def _extend(values: np.ndarray, order: int, pad_factor: int) -> tuple[np.ndarray, int]:
    n = values.size
    block = min(n, max(8 * order, n // 8))
    order = max(1, min(order, block // 3))
    pad = pad_factor * n
    right = _extrapolate(values[-block:], pad, order)
    left = _extrapolate(values[:block][::-1], pad, order)[::-1]
    ext = np.concatenate((left, values, right))
    # taper only the outer part of each pad, far from the original samples
    i = np.arange(ext.size, dtype=float)
    width = 0.8 * pad
    ext = ext * _bump_step(i / width) * _bump_step((ext.size - 1 - i) / width)
    return ext, pad


def half_derivative(
    field: ComplexField,
    boundary: Boundary = "periodic",
    *,
    order: int = 16,
    pad_factor: int = 4,
    branch: int = 1,
) -> ComplexField:
    """Riemann-Liouville half-derivative of a field sampled on a time grid.

    With ``boundary="periodic"`` the samples are treated as one period.  With
    ``"extrapolate"`` the history before the first sample (and the future
    after the last) is supplied by an order-``order`` linear predictor fitted
    near each edge; signals made of a few exponentials are continued exactly.
    Each side is padded by ``pad_factor`` times the input length and tapered
    far from the data.  The taper's leakage shrinks as w times the pad
    duration grows, so slow modes need a longer pad.
    """
    values = np.asarray(field.values, dtype=complex)
    step = field.grid.step
    if boundary == "periodic":
        w = angular_frequencies(values.size, step)
        out = np.fft.ifft(np.fft.fft(values) * half_multiplier(w, branch))
    elif boundary == "extrapolate":
        ext, pad = _extend(values, order, pad_factor)
        w = angular_frequencies(ext.size, step)
        full = np.fft.ifft(np.fft.fft(ext) * half_multiplier(w, branch))
        out = full[pad : pad + values.size]
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    return ComplexField(field.grid, out)


def time_derivative(field: ComplexField) -> ComplexField:
    """Spectral d/dt (multiplier -i w), periodic boundary."""
    w = angular_frequencies(field.grid.count, field.grid.step)
    return ComplexField(
        field.grid, np.fft.ifft(np.fft.fft(field.values) * (-1j * w))
    )


@dataclass(frozen=True)
class JointSpectrum:
    """Samples of the energy-momentum amplitude; axis 0 is p, axis 1 is epsilon."""

    p_grid: Grid1D
    eps_grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.p_grid.count, self.eps_grid.count):
            raise ValueError(
                f"spectrum has shape {vals.shape}, expected "
                f"({self.p_grid.count}, {self.eps_grid.count})"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm_sq(self) -> float:
        return trapezoid(trapezoid(self.density(), self.eps_grid, axis=1), self.p_grid)

    def energy_marginal(self) -> RealField:
        return RealField(self.eps_grid, trapezoid(self.density(), self.p_grid, axis=0))

    def momentum_marginal(self) -> RealField:
        return RealField(self.p_grid, trapezoid(self.density(), self.eps_grid, axis=1))


def _check_decay(values: np.ndarray, tol: float) -> None:
    peak = np.abs(values).max()
    if peak == 0:
        return
    edges = {
        "x_min": values[0, :],
        "x_max": values[-1, :],
        "t_min": values[:, 0],
        "t_max": values[:, -1],
    }
    for edge, samples in edges.items():
        worst = np.abs(samples).max()
        if worst >= tol * peak:
            raise BoundaryDecayError(
                f"joint amplitude does not decay at the {edge} edge "
                f"(|Psi| = {worst:.3e}, {worst / peak:.3e} of peak); "
                "extend that grid",
                edge,
            )


def _conjugate_axis(count: int, step: float, center: float, hbar: float):
    q = np.fft.fftshift(2.0 * np.pi * hbar * np.fft.fftfreq(count, step))
    return q, Grid1D(center + q[0], 2.0 * np.pi * hbar / (count * step), count)


def joint_fourier(
    amp: JointAmplitude,
    const: PhysicalConstants = NATURAL,
    *,
    p_center: float = 0.0,
    eps_center: float = 0.0,
    decay_tol: float = 1e-6,
) -> JointSpectrum:
    """Energy-momentum representation of a joint amplitude.

    Computes (1/2 pi hbar) sum exp[-i(p x - eps t)/hbar] Psi dx dt on the
    sampling-theorem grids, centred at ``p_center`` and ``eps_center``.  The
    discrete transform is unitary: squared norms agree to rounding.
    """
    hbar = const.hbar
    values = np.asarray(amp.values, dtype=complex)
    _check_decay(values, decay_tol)
    xg, tg = amp.x_grid, amp.t_grid
    x, t = xg.points, tg.points

    q, p_grid = _conjugate_axis(xg.count, xg.step, p_center, hbar)
    r, eps_grid = _conjugate_axis(tg.count, tg.step, eps_center, hbar)

    shifted = values * np.exp(-1j * p_center * x / hbar)[:, None]
    shifted = shifted * np.exp(1j * eps_center * t / hbar)[None, :]
    out = np.fft.fftshift(np.fft.fft(shifted, axis=0), axes=0)
    out = np.fft.fftshift(np.fft.ifft(out, axis=1), axes=1) * tg.count
    out *= np.exp(-1j * q * xg.start / hbar)[:, None]
    out *= np.exp(1j * r * tg.start / hbar)[None, :]
    out *= xg.step * tg.step / (2.0 * math.pi * hbar)
    return JointSpectrum(p_grid, eps_grid, out)


def mean_energy(spec: JointSpectrum) -> float:
    """Trapezoid value of the double integral of |Psi~|^2 * eps.

    The Lorentzian energy profile of a detected stationary state has only a
    principal-value mean, so the epsilon grid must be symmetric about the
    line centre for the result to be meaningful.
    """
    inner = trapezoid(spec.density() * spec.eps_grid.points[None, :], spec.eps_grid, axis=1)
    return float(trapezoid(inner, spec.p_grid))


def mean_momentum(spec: JointSpectrum) -> float:
    inner = trapezoid(spec.density(), spec.eps_grid, axis=1)
    return float(trapezoid(inner * spec.p_grid.points, spec.p_grid))

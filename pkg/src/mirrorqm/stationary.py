"""Stationary states observed by a memoryless (Poisson) detector.

A detector that fires with constant probability per unit time gives the
detection-time density f(t) = L exp(-L t) for t >= 0.  Attaching sqrt(f) to a
stationary state turns its sharp energy E_n into a Lorentzian line of full
width hbar * L centred on E_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .core import (
    NATURAL,
    ComplexField,
    Grid1D,
    JointAmplitude,
    PhysicalConstants,
    RealField,
    make_grid,
    trapezoid,
)
from .spectral import joint_fourier

__all__ = [
    "PoissonDetection",
    "LorentzianProfile",
    "detection_pdf",
    "detection_time_stats",
    "detection_time_moments",
    "full_stationary_state",
    "energy_distribution",
    "stationary_energy_marginal",
    "convolve_lorentzians",
    "numerical_convolution",
    "harmonic_ground_state",
    "default_time_grid",
    "l1_distance",
]


@dataclass(frozen=True)
class PoissonDetection:
    lam: float

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"detection rate must be positive, got {self.lam}")

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.lam * np.exp(-self.lam * np.maximum(t, 0.0)), 0.0)

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, np.exp(-self.lam * np.maximum(t, 0.0)), 1.0)

    def cdf(self, t):
        return 1.0 - self.survival(t)


@dataclass(frozen=True)
class LorentzianProfile:
    center: float
    half_width: float

    def __post_init__(self) -> None:
        if not self.half_width > 0:
            raise ValueError(f"half width must be positive, got {self.half_width}")

    def __call__(self, eps):
        d = np.asarray(eps, dtype=float) - self.center
        return self.half_width / (math.pi * (d * d + self.half_width**2))

    @property
    def fwhm(self) -> float:
        return 2.0 * self.half_width

    @property
    def peak(self) -> float:
        return 1.0 / (math.pi * self.half_width)

    def cdf(self, eps):
        d = np.asarray(eps, dtype=float) - self.center
        return 0.5 + np.arctan(d / self.half_width) / math.pi


def detection_pdf(model: PoissonDetection, t_grid: Grid1D) -> RealField:
    return RealField(t_grid, model.pdf(t_grid.points))


def detection_time_stats(model: PoissonDetection) -> tuple[float, float]:
    """Mean and standard deviation of the detection time, both 1/L."""
    return 1.0 / model.lam, 1.0 / model.lam


def default_time_grid(model: PoissonDetection, count: int = 20001) -> Grid1D:
    """Grid on [0, 20/L]; the truncated tail carries exp(-20) of the mass."""
    return make_grid(0.0, 20.0 / model.lam, count)


def detection_time_moments(
    model: PoissonDetection, t_grid: Grid1D | None = None
) -> tuple[float, float]:
    """Mean and standard deviation of the detection time by trapezoid quadrature."""
    grid = t_grid or default_time_grid(model)
    f = model.pdf(grid.points)
    t = grid.points
    mass = trapezoid(f, grid)
    mean = trapezoid(t * f, grid) / mass
    second = trapezoid(t * t * f, grid) / mass
    return mean, math.sqrt(second - mean * mean)


def harmonic_ground_state(
    x_grid: Grid1D, omega: float, const: PhysicalConstants = NATURAL
) -> ComplexField:
    """Oscillator ground state (energy hbar*omega/2), renormalized on the grid."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    alpha = const.mass * omega / const.hbar
    psi = np.exp(-0.5 * alpha * x_grid.points**2)
    norm = trapezoid(psi**2, x_grid)
    return ComplexField(x_grid, psi / math.sqrt(norm))


def full_stationary_state(
    psi_n: ComplexField,
    energy: float,
    model: PoissonDetection,
    t_grid: Grid1D,
    const: PhysicalConstants = NATURAL,
    *,
    norm_tol: float = 1e-6,
) -> JointAmplitude:
    """Joint amplitude psi_n(x) sqrt(L) exp(-L t/2 - i E_n t/hbar), zero for t < 0.

    Time grids may extend below t = 0 (useful as padding before a Fourier
    transform); the amplitude vanishes there.
    """
    norm = psi_n.norm_sq()
    if abs(norm - 1.0) > norm_tol:
        raise ValueError(f"psi_n is not normalized on its grid (norm^2 = {norm:.8g})")
    t = t_grid.points
    temporal = np.where(
        t >= 0,
        math.sqrt(model.lam)
        * np.exp(-0.5 * model.lam * np.maximum(t, 0.0) - 1j * energy * t / const.hbar),
        0.0,
    )
    return JointAmplitude(psi_n.grid, t_grid, np.outer(psi_n.values, temporal))


def energy_distribution(
    energy: float,
    model: PoissonDetection,
    eps_grid: Grid1D,
    const: PhysicalConstants = NATURAL,
) -> tuple[LorentzianProfile, RealField]:
    """Lorentzian energy profile of a detected stationary state and its samples."""
    profile = LorentzianProfile(energy, 0.5 * const.hbar * model.lam)
    return profile, RealField(eps_grid, profile(eps_grid.points))


def stationary_energy_marginal(
    psi_n: ComplexField,
    energy: float,
    model: PoissonDetection,
    t_grid: Grid1D,
    const: PhysicalConstants = NATURAL,
) -> RealField:
    """Energy marginal obtained numerically: build the full state, transform it,
    integrate out p.  ``t_grid`` must start below 0 so the amplitude decays at
    both time edges."""
    amp = full_stationary_state(psi_n, energy, model, t_grid, const)
    spec = joint_fourier(amp, const, eps_center=energy)
    return spec.energy_marginal()


def convolve_lorentzians(
    lam: float,
    gamma: float,
    const: PhysicalConstants = NATURAL,
    center: float = 0.0,
) -> LorentzianProfile:
    """Detection-broadened line (FWHM hbar*lam) convolved with a natural line
    (FWHM hbar*gamma): a Lorentzian of FWHM hbar*(lam + gamma)."""
    if not lam > 0:
        raise ValueError(f"detection rate must be positive, got {lam}")
    if gamma < 0:
        raise ValueError(f"natural width rate must be nonnegative, got {gamma}")
    return LorentzianProfile(center, 0.5 * const.hbar * (lam + gamma))


def numerical_convolution(
    lam: float,
    gamma: float,
    eps_grid: Grid1D,
    const: PhysicalConstants = NATURAL,
    center: float = 0.0,
) -> RealField:
    """Direct convolution of the two sampled profiles on ``eps_grid``.

    The detection line is centred at ``center`` and the natural line at 0, so
    the result stays centred at ``center``.  For gamma = 0 the detection line
    is returned as is.
    """
    first = LorentzianProfile(center, 0.5 * const.hbar * lam)(eps_grid.points)
    if gamma == 0:
        return RealField(eps_grid, first)
    n = eps_grid.count
    # natural line sampled on a zero-centred grid of the same step
    offsets = (np.arange(n) - (n - 1) / 2) * eps_grid.step
    second = LorentzianProfile(0.0, 0.5 * const.hbar * gamma)(offsets)
    full = fftconvolve(first, second, mode="full") * eps_grid.step
    lo = (n - 1) // 2
    if n % 2 == 0:
        # even count: offsets are half-step shifted; average neighbours back on grid
        full = 0.5 * (full[:-1] + full[1:])
    return RealField(eps_grid, full[lo : lo + n])


def l1_distance(a: RealField, b: RealField) -> float:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return trapezoid(np.abs(a.values - b.values), a.grid)

"""Release-gate checks, shared by ``mirrorqm verify`` and the test suite.

Each ``criterion_*`` function returns one or more :class:`CheckResult` rows.
``branch`` swaps the half-derivative branch; it only exists to show that the
gate catches that mistake.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import arrival as arr
from . import bayes
from . import stationary as st
from .core import (
    NATURAL,
    ComplexField,
    Grid1D,
    JointDensity,
    RealField,
    gaussian_amplitude,
    gaussian_spectrum,
    make_grid,
    trapezoid,
)
from .spectral import half_derivative, half_multiplier

__all__ = ["CheckResult", "CRITERIA", "run_all", "format_table", "reference_spectrum"]

P0, SIGMA = 5.0, 0.25


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    bound: float
    passed: bool
    comparison: str = "<"

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<46} {self.measured:>12.4e} {self.comparison} {self.bound:<10.3g} {status}"


def _lt(name: str, measured: float, bound: float) -> CheckResult:
    return CheckResult(name, float(measured), bound, bool(measured < bound))


def reference_spectrum(p0: float = P0, sigma: float = SIGMA, count: int = 2048):
    """Gaussian spectrum on a P grid from 0.01 to p0 + 20 sigma."""
    grid = make_grid(0.01, p0 + 20.0 * sigma, count)
    return gaussian_spectrum(p0, sigma, grid, "plus")


def arrival_grid(p0: float, sigma: float, x: float, widths: float = 12.0, count: int = 2001) -> Grid1D:
    centre, width = arr.semiclassical_arrival(p0, sigma, x)
    return make_grid(centre - widths * width, centre + widths * width, count)


def _interior(n: int) -> slice:
    edge = n // 20
    return slice(edge, n - edge)


def criterion_01(branch: int = 1) -> list[CheckResult]:
    grid = make_grid(-200.0, 200.0, 2**14)
    t = grid.points
    out = []
    for w in (0.5, 1.0, 4.0):
        mode = np.exp(-1j * w * t)
        got = half_derivative(ComplexField(grid, mode), "extrapolate", branch=branch).values
        factor = complex(half_multiplier(np.array(w)))
        err = np.abs(got - factor * mode)[_interior(grid.count)].max() / abs(factor)
        out.append(_lt(f"1 half-derivative eigenrelation w={w:g}", err, 1e-6))
    return out


def criterion_02(branch: int = 1) -> list[CheckResult]:
    rng = np.random.default_rng(2)
    worst = 0.0
    for w in rng.uniform(0.0, 100.0, 100):
        p, q = arr.dispersion(w)
        target = 2.0 * w
        rel = abs(p * p - target) / target if target else abs(p)
        worst = max(worst, rel, abs(p + q))
    out = [_lt("2a dispersion P^2 = 2 m hbar w (100 draws)", worst, 4 * np.finfo(float).eps)]
    grid = make_grid(-50.0, 50.0, 4096)
    worst = 0.0
    for p in (1.0, 2.0, 5.0):
        phi = arr.phi_eigenfunction(p, grid)
        for sign in (1, -1):
            got = arr.mirror_momentum(phi, NATURAL, sign, boundary="extrapolate", branch=branch).values
            want = sign * p * phi.values
            sl = _interior(grid.count)
            worst = max(worst, np.abs(got - want)[sl].max() / np.abs(want)[sl].max())
    out.append(_lt("2b sigma_z sqrt(2mi hbar) D^1/2 phi_P = P phi_P", worst, 1e-5))
    return out


def criterion_03(branch: int = 1) -> list[CheckResult]:
    spec = reference_spectrum()
    out = []
    for x in (10.0, 20.0, 40.0):
        rho = arr.arrival_density(spec, x, arrival_grid(P0, SIGMA, x))
        out.append(_lt(f"3 arrival normalization x={x:g}", abs(rho.normalization() - 1.0), 1e-3))
    return out


def _continuous_gaussian(spec, p0: float, sigma: float) -> Callable[[float], complex]:
    i = int(np.argmin(np.abs(spec.grid.points - p0)))
    scale = spec.c_plus[i] / gaussian_amplitude(spec.grid.points[i], p0, sigma)
    return lambda p: scale * math.exp(-((p - p0) ** 2) / (4.0 * sigma**2))


def criterion_04(branch: int = 1) -> list[CheckResult]:
    spec = reference_spectrum()
    c = _continuous_gaussian(spec, P0, SIGMA)
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        x = rng.uniform(5.0, 40.0)
        centre, width = arr.semiclassical_arrival(P0, SIGMA, x)
        t = centre + rng.uniform(-2.0, 2.0) * width
        got = arr.arrival_density(spec, x, Grid1D(t, 1.0, 2)).values[0]
        want = arr.arrival_density_oracle(
            c, None, (spec.grid.start, spec.grid.stop), x, t, breakpoints=(P0,)
        )
        worst = max(worst, abs(got - want) / want)
    return [_lt("4 trapezoid vs Gauss-Kronrod (50 points)", worst, 1e-5)]


def current_l1(p0: float, sigma: float, x: float = 20.0) -> float:
    """L1 distance between rho(t|x) and the flux-normalized Schrodinger current."""
    spec = reference_spectrum(p0, sigma, 4096)
    grid = arrival_grid(p0, sigma, x, count=3001)
    rho = arr.arrival_density(spec, x, grid)
    current = arr.current_density(spec, x, grid)
    return trapezoid(np.abs(rho.values - current.values / current.integral()), grid)


def criterion_05(branch: int = 1) -> list[CheckResult]:
    # sigma fixed at the reference width; sigma/p0 = 0.1, 0.05, 0.02
    l1 = [current_l1(p0, SIGMA) for p0 in (2.5, 5.0, 12.5)]
    steps = max(l1[1] - l1[0], l1[2] - l1[1])
    return [
        _lt("5a L1(rho, J) at sigma/P0=0.05, x=20", l1[1], 0.02),
        CheckResult("5b L1 monotone over sigma/P0=0.1,0.05,0.02", steps, 0.0, steps < 0.0),
    ]


def criterion_06(branch: int = 1) -> list[CheckResult]:
    spec = reference_spectrum()
    rho = arr.arrival_density(spec, 20.0, make_grid(2.0, 6.0, 4001))
    target = 20.0 / P0
    return [_lt("6 arrival peak vs m x / P0", abs(rho.peak_time() - target) / target, 0.02)]


def criterion_07(branch: int = 1) -> list[CheckResult]:
    worst = 0.0
    for lam in (0.5, 1.0, 10.0):
        model = st.PoissonDetection(lam)
        mean, std = st.detection_time_stats(model)
        qmean, qstd = st.detection_time_moments(model)
        worst = max(worst, abs(qmean - mean) / mean, abs(qstd - std) / std)
    return [_lt("7 <T> = dT = 1/Lambda (quadrature)", worst, 1e-4)]


def _measured_fwhm(samples: RealField) -> float:
    """Width between the half-maximum crossings, linearly interpolated."""
    v = samples.values
    x = samples.grid.points
    half = 0.5 * v.max()
    above = np.flatnonzero(v >= half)
    lo, hi = above[0], above[-1]
    left = np.interp(half, [v[lo - 1], v[lo]], [x[lo - 1], x[lo]])
    right = np.interp(half, [v[hi + 1], v[hi]], [x[hi + 1], x[hi]])
    return right - left


def criterion_08(branch: int = 1) -> list[CheckResult]:
    out = []
    fwhm_err = peak_err = product_err = 0.0
    for lam in (0.1, 1.0, 2.0):
        model = st.PoissonDetection(lam)
        hw = 0.5 * lam
        grid = make_grid(1.0 - 10 * hw, 1.0 + 10 * hw, 2001)
        profile, samples = st.energy_distribution(1.0, model, grid)
        fwhm_err = max(fwhm_err, abs(_measured_fwhm(samples) - lam) / grid.step)
        peak = samples.values[grid.index_of(1.0)]
        want = 2.0 / (math.pi * lam)
        peak_err = max(peak_err, abs(peak - want) / want)
        product_err = max(product_err, abs(st.detection_time_stats(model)[1] * profile.fwhm - 1.0))
    out.append(CheckResult("8a FWHM = hbar Lambda (grid steps)", fwhm_err, 1.0, fwhm_err <= 1.0, "<="))
    out.append(_lt("8b peak = 2/(pi hbar Lambda)", peak_err, 1e-6))
    out.append(CheckResult("8c dT * FWHM = hbar exactly", product_err, 0.0, product_err == 0.0, "=="))
    return out


def criterion_09(branch: int = 1) -> list[CheckResult]:
    model = st.PoissonDetection(0.1)
    psi = st.harmonic_ground_state(make_grid(-8.0, 8.0, 128), 2.0)
    marginal = st.stationary_energy_marginal(psi, 1.0, model, make_grid(-400.0, 400.0, 2**14))
    _, exact = st.energy_distribution(1.0, model, marginal.grid)
    return [_lt("9 Fourier pipeline vs Lorentzian (L1)", st.l1_distance(marginal, exact), 0.01)]


def criterion_10(branch: int = 1) -> list[CheckResult]:
    out = []
    for lam, gamma in ((1.0, 0.0), (1.0, 1.0), (1.0, 2.0)):
        profile = st.convolve_lorentzians(lam, gamma)
        hw = profile.half_width
        grid = make_grid(-20 * hw, 20 * hw, 4001)
        numeric = st.numerical_convolution(lam, gamma, grid)
        exact = RealField(grid, profile(grid.points))
        out.append(_lt(f"10 convolution L1 (L={lam:g}, G={gamma:g})", st.l1_distance(numeric, exact), 0.01))
    return out


def stationary_joint(lam: float = 1.0, omega: float = 2.0) -> tuple[JointDensity, np.ndarray]:
    """Poisson-detected oscillator ground state; returns the joint and |psi_n|^2."""
    x_grid = make_grid(-6.0, 6.0, 241)
    t_grid = make_grid(0.0, 20.0 / lam, 2001)
    psi_sq = np.abs(st.harmonic_ground_state(x_grid, omega).values) ** 2
    f = st.detection_pdf(st.PoissonDetection(lam), t_grid)
    f = RealField(t_grid, f.values / f.integral())
    joint = bayes.joint_density(f, np.repeat(psi_sq[:, None], t_grid.count, axis=1), x_grid)
    return joint, psi_sq


def synthetic_joint() -> JointDensity:
    """Correlated Gaussian in (x, t): not a product of its marginals."""
    x_grid = make_grid(-4.0, 4.0, 161)
    t_grid = make_grid(-4.0, 4.0, 201)
    x, t = np.meshgrid(x_grid.points, t_grid.points, indexing="ij")
    r = 0.5
    vals = np.exp(-(x * x - 2 * r * x * t + t * t) / (2 * (1 - r * r)))
    return JointDensity(x_grid, t_grid, vals).normalized()


def criterion_11(branch: int = 1) -> list[CheckResult]:
    lam = 1.0
    joint, _ = stationary_joint(lam)
    cond = bayes.conditionals(joint)
    worst = 0.0
    for t in joint.t_grid.points[joint.t_grid.points <= 5.0 / lam]:
        got = bayes.reconstruct_f(cond.psi_sq, cond.phi_sq, joint.x_grid, joint.t_grid, t)
        want = lam * math.exp(-lam * t)
        worst = max(worst, abs(got - want) / want)
    out = [_lt("11a f(t) reconstruction, stationary model", worst, 1e-3)]

    joint = synthetic_joint()
    cond = bayes.conditionals(joint)
    f, _ = bayes.marginals(joint)
    rec = bayes.reconstruct_f_all(cond.psi_sq, cond.phi_sq, joint.x_grid, joint.t_grid)
    out.append(_lt("11b f(t) reconstruction vs marginal, nonseparable", np.max(np.abs(rec.values - f.values) / f.values), 1e-3))
    return out


def criterion_12(branch: int = 1, n: int = 100_000, seed: int = 12) -> list[CheckResult]:
    lam = 1.0
    joint, _ = stationary_joint(lam)
    log = bayes.sample_events(joint, n, seed)
    again = bayes.sample_events(joint, n, seed)
    ks_t = stats.kstest(log.t, lambda t: 1.0 - np.exp(-lam * np.maximum(t, 0.0))).statistic
    # |psi_0|^2 for omega = 2 is a normal density with standard deviation 1/2
    ks_x = stats.kstest(log.x, stats.norm(scale=0.5).cdf).statistic
    same = log == again and log.t.tobytes() == again.t.tobytes() and log.x.tobytes() == again.x.tobytes()
    return [
        _lt("12a KS of t-marginal (n=1e5)", ks_t, 0.02),
        _lt("12b KS of x-marginal (n=1e5)", ks_x, 0.02),
        CheckResult("12c repeated seed gives identical log", 0.0 if same else 1.0, 0.0, same, "=="),
    ]


def criterion_13(branch: int = 1) -> list[CheckResult]:
    spec = reference_spectrum()
    res = arr.mirror_residual(spec, 20.0, make_grid(-6.0, 14.0, 2048), branch=branch)
    return [_lt("13 mirror-equation residual (V=0, x=20)", res.value, 1e-3)]


def criterion_14(branch: int = 1) -> list[CheckResult]:
    spec = reference_spectrum()
    p = spec.grid.points
    x, a, t0 = 20.0, 3.0, 1.5
    grid = arrival_grid(P0, SIGMA, x + a)
    shifted = arr.arrival_density(spec.with_phase(np.exp(1j * p * a)), x, grid).values
    direct = arr.arrival_density(spec, x + a, grid).values
    space = np.abs(shifted - direct).max() / direct.max()

    grid = arrival_grid(P0, SIGMA, x)
    delayed_grid = Grid1D(grid.start - t0, grid.step, grid.count)
    delayed = arr.arrival_density(spec.with_phase(np.exp(1j * p * p / 2.0 * t0)), x, grid).values
    direct = arr.arrival_density(spec, x, delayed_grid).values
    time = np.abs(delayed - direct).max() / direct.max()
    return [
        _lt("14a translation covariance of rho", space, 1e-10),
        _lt("14b time-shift covariance of rho", time, 1e-10),
    ]


CRITERIA: list[Callable[..., list[CheckResult]]] = [
    criterion_01, criterion_02, criterion_03, criterion_04, criterion_05,
    criterion_06, criterion_07, criterion_08, criterion_09, criterion_10,
    criterion_11, criterion_12, criterion_13, criterion_14,
]


def run_all(branch: int = 1) -> list[CheckResult]:
    results: list[CheckResult] = []
    for criterion in CRITERIA:
        results.extend(criterion(branch=branch))
    return results


def format_table(results: list[CheckResult]) -> str:
    header = f"{'criterion':<46} {'measured':>12}   {'bound':<10} status"
    return "\n".join([header, "-" * len(header), *(r.line() for r in results)])

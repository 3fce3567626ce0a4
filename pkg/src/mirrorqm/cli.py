"""Command-line front end.

    mirrorqm arrival    [--config PATH] [--out PATH]
    mirrorqm stationary [--config PATH] [--out PATH]
    mirrorqm bayes-demo [--config PATH] [--out PATH] [--seed N]
    mirrorqm verify

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 numerical guard (phase resolution, spectrum truncation, boundary decay).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import acceptance, bayes
from . import arrival as arr
from . import stationary as st
from .config import ConfigError, ScenarioConfig, load_config
from .core import NumericalGuardError, RealField, gaussian_spectrum

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


def _fmt(value) -> str:
    # repr of a Python float is the shortest round-trip form
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run_arrival(cfg: ScenarioConfig, out: str | Path) -> dict[float, float]:
    """Write rho and the pseudospinor for every (x, t); return the normalizations."""
    const = cfg.constants
    spec = gaussian_spectrum(cfg.p0, cfg.sigma, cfg.grid("p"), cfg.branch)
    t_grid = cfg.grid("t")
    t = t_grid.points
    rows = []
    norms = {}
    for x in cfg.x_values:
        spinor = arr.mirror_solution(spec, x, t_grid, const)
        rho = spinor.density()
        norms[x] = float(RealField(t_grid, rho).integral())
        for k in range(t_grid.count):
            p, m = spinor.plus[k], spinor.minus[k]
            rows.append((t[k], x, rho[k], p.real, p.imag, m.real, m.imag))
    write_csv(
        out,
        ("t", "x", "rho", "phi_plus_re", "phi_plus_im", "phi_minus_re", "phi_minus_im"),
        rows,
    )
    for x, norm in norms.items():
        print(f"normalization x={_fmt(x)} integral={_fmt(norm)}")
    return norms


def stationary_summary(cfg: ScenarioConfig) -> dict[str, float]:
    const = cfg.constants
    model = st.PoissonDetection(cfg.lam)
    t_mean, t_std = st.detection_time_stats(model)
    profile, _ = st.energy_distribution(cfg.energy, model, cfg.grid("eps"), const)
    convolved = st.convolve_lorentzians(cfg.lam, cfg.gamma, const, cfg.energy)
    return {
        "T_mean": t_mean,
        "T_std": t_std,
        "fwhm": profile.fwhm,
        "fwhm_convolved": convolved.fwhm,
        "uncertainty_product": t_std * profile.fwhm,
    }


def run_stationary(cfg: ScenarioConfig, out: str | Path) -> dict[str, float]:
    const = cfg.constants
    model = st.PoissonDetection(cfg.lam)
    eps_grid = cfg.grid("eps")
    _, chi_sq = st.energy_distribution(cfg.energy, model, eps_grid, const)
    convolved = st.convolve_lorentzians(cfg.lam, cfg.gamma, const, cfg.energy)
    eps = eps_grid.points
    write_csv(
        out,
        ("epsilon", "chi_sq", "chi_sq_convolved"),
        zip(eps, chi_sq.values, convolved(eps)),
    )
    summary = stationary_summary(cfg)
    print(",".join(summary))
    print(",".join(_fmt(v) for v in summary.values()))
    return summary


def _events_path(cfg: ScenarioConfig, out: Path) -> Path:
    if cfg.events_output:
        return Path(cfg.events_output)
    return out.with_name(out.stem + "_events" + (out.suffix or ".csv"))


def bayes_demo_joint(cfg: ScenarioConfig):
    """Poisson-detected oscillator ground state with energy ``cfg.energy``."""
    const = cfg.constants
    x_grid, t_grid = cfg.grid("x"), cfg.grid("t")
    omega = 2.0 * cfg.energy / const.hbar
    psi = st.harmonic_ground_state(x_grid, omega, const)
    psi_sq = np.abs(psi.values) ** 2
    f = st.detection_pdf(st.PoissonDetection(cfg.lam), t_grid)
    f = RealField(t_grid, f.values / f.integral())
    joint = bayes.joint_density(f, np.repeat(psi_sq[:, None], t_grid.count, axis=1), x_grid)
    x_sd = math.sqrt(const.hbar / (2.0 * const.mass * omega))
    return joint, x_sd


def run_bayes_demo(cfg: ScenarioConfig, out: str | Path) -> dict[str, float]:
    out = Path(out)
    joint, x_sd = bayes_demo_joint(cfg)
    f, g = bayes.marginals(joint)
    cond = bayes.conditionals(joint)
    rec = bayes.reconstruct_f_all(cond.psi_sq, cond.phi_sq, joint.x_grid, joint.t_grid)

    xs, ts = joint.x_grid.points, joint.t_grid.points
    write_csv(
        out,
        ("x", "t", "p_joint", "f_marginal", "g_marginal"),
        (
            (xs[i], ts[j], joint.values[i, j], f.values[j], g.values[i])
            for i in range(xs.size)
            for j in range(ts.size)
        ),
    )
    model = f"stationary-poisson lam={_fmt(cfg.lam)} energy={_fmt(cfg.energy)}"
    log = bayes.sample_events(joint, cfg.n_events, cfg.seed, model)
    write_csv(
        _events_path(cfg, out),
        ("event_index", "x", "t"),
        ((k, x, t) for k, (x, t) in enumerate(zip(log.x.tolist(), log.t.tolist()))),
    )
    lam = cfg.lam
    emp = bayes.empirical_marginals(
        log,
        joint.t_grid,
        joint.x_grid,
        lambda t: 1.0 - np.exp(-lam * np.maximum(t, 0.0)),
        stats.norm(scale=x_sd).cdf,
    )
    report = {
        "ks_t": emp.ks_t,
        "ks_x": emp.ks_x,
        "reconstruct_f_max_abs_diff": float(np.max(np.abs(rec.values - f.values))),
        "events_outside_t": emp.outside_t,
        "events_outside_x": emp.outside_x,
    }
    for key, value in report.items():
        print(f"{key}={_fmt(value)}")
    return report


def run_verify(branch: int = 1) -> int:
    results = acceptance.run_all(branch=branch)
    print(acceptance.format_table(results))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_FAIL


_RUNNERS = {
    "arrival": run_arrival,
    "stationary": run_stationary,
    "bayes-demo": run_bayes_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorqm",
        description="Arrival-time densities, detection-broadened lines and joint space-time statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_RUNNERS, "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--seed", type=int, help="override the configured seed")
        if name == "verify":
            p.add_argument("--perturb-branch", action="store_true", help=argparse.SUPPRESS)
    return parser


def _scenario_config(args: argparse.Namespace) -> ScenarioConfig:
    base = ScenarioConfig.preset(args.command)
    cfg = load_config(args.config, base) if args.config else base
    if cfg.scenario != args.command:
        raise ConfigError(
            f"config is for scenario {cfg.scenario!r}, command is {args.command!r}"
        )
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg.validate()


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return run_verify(branch=-1 if args.perturb_branch else 1)
    try:
        cfg = _scenario_config(args)
        out = args.out or cfg.output or f"{args.command}.csv"
        _RUNNERS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

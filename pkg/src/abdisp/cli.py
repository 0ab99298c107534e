"""Command-line front end: parameter sweeps, verification suites, reports.

Subcommands: propagator, resolvent, evolve, selftest.  Exit status 0 on
success, 2 when the zero-resonance assumption is violated, 1 on any other
error.  Every run is reproducible: fixed summation orders, fixed sample
seeds, no time-seeded randomness.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import evolution, propagator, resolvent, scattering
from .errors import DomainError, ZeroResonanceError
from .field import Flux, PolarPoint, PotentialSpec, reduce_flux
from .specfun import bessel_jy, gamma


def parse_ladder(spec: str) -> np.ndarray:
    """`start:stop:points_per_decade` -> log-spaced grid, endpoints included."""
    try:
        start_s, stop_s, ppd_s = spec.split(":")
        start, stop, ppd = float(start_s), float(stop_s), float(ppd_s)
    except ValueError as exc:
        raise DomainError(f"bad ladder spec {spec!r}; expected start:stop:points_per_decade") from exc
    if start <= 0 or stop <= start or ppd <= 0:
        raise DomainError(f"ladder {spec!r} needs 0 < start < stop and positive density")
    npts = max(2, int(round(math.log10(stop / start) * ppd)) + 1)
    return np.geomspace(start, stop, npts)


@dataclass
class RunConfig:
    """Validated parameters shared by the subcommands."""

    alpha_raw: float
    flux: Flux = field(init=False)
    potential: str = "none"
    r_max: float = 3.0
    n: int = 56
    modes: int = 8
    t_spec: str = "1e2:1e4:12"
    lambda_spec: str = "1e-3:1e3:8"
    lam_max: float = 600.0
    tol: float = 1e-10
    out_dir: str = "."
    jobs: int = 1
    r: float = 1.0
    rp: float = 1.0
    dtheta: float = 0.0

    def __post_init__(self):
        self.flux = reduce_flux(self.alpha_raw)
        if self.tol <= 0.0:
            raise DomainError("tol must be positive")
        if self.r_max <= 0.0:
            raise DomainError("R_max must be positive")
        if self.n < 16:
            raise DomainError("need n >= 16 radial nodes")
        if self.modes < 4:
            raise DomainError("need a mode window M >= 4")
        if self.jobs < 1:
            raise DomainError("jobs must be >= 1")
        if self.r < 0.0 or self.rp < 0.0:
            raise DomainError("radii must be nonnegative")
        self.times = parse_ladder(self.t_spec)
        self.lambdas = parse_ladder(self.lambda_spec)
        self.V = self._load_potential()
        if self.V.support_radius > self.r_max:
            raise DomainError(
                f"potential support {self.V.support_radius} exceeds R_max {self.r_max}"
            )

    def _load_potential(self) -> PotentialSpec:
        if self.potential == "none":
            return PotentialSpec.zero(radius=min(1.0, self.r_max))
        path = Path(self.potential)
        if not path.exists():
            raise DomainError(f"potential file {path} does not exist")
        return PotentialSpec.from_file(path)

    def outpath(self, name: str) -> Path:
        out = Path(self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return out / name

    def grid(self) -> scattering.RadialGrid:
        breaks = () if self.V.is_zero else (self.V.support_radius,)
        return scattering.build_radial_grid(
            self.r_max, n=self.n, mode_window=self.modes, breakpoints=breaks
        )


def _write_summary(path: Path, records: dict) -> None:
    with open(path, "w") as fh:
        for key, val in records.items():
            fh.write(f"{key} = {val}\n")


def _propagator_row(args):
    alpha_raw, t, r, rp, dtheta, tol = args
    flux = reduce_flux(alpha_raw)
    x = PolarPoint(r, dtheta)
    y = PolarPoint(rp, 0.0)
    kv = propagator.propagator_kernel(flux, t, x, y, tol)
    env = propagator.pointwise_bound_envelope(flux, t, x, y)
    lead = propagator.propagator_leading_term(flux, t, x, y)
    ratio = kv.value / lead if lead != 0 else complex(math.nan, math.nan)
    return (t, r, rp, dtheta, kv.value.real, kv.value.imag, abs(kv.value), env, abs(ratio))


def cmd_propagator(cfg: RunConfig) -> int:
    tasks = [(cfg.alpha_raw, float(t), cfg.r, cfg.rp, cfg.dtheta, cfg.tol) for t in cfg.times]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_propagator_row, tasks))
    else:
        rows = [_propagator_row(task) for task in tasks]
    csv = cfg.outpath("propagator.csv")
    with open(csv, "w") as fh:
        fh.write("t,r,rp,dtheta,re_k,im_k,abs_k,envelope,leading_ratio\n")
        for row in rows:
            fh.write(",".join(f"{v!r}" for v in row) + "\n")
    c0 = max(row[6] * row[0] for row in rows)
    c_env = max(row[6] / row[7] for row in rows if row[7] > 0)
    _write_summary(
        cfg.outpath("propagator_summary.txt"),
        {
            "alpha_raw": cfg.alpha_raw,
            "alpha_reduced": cfg.flux.alpha,
            "C0_fitted_sup_tK": c0,
            "C_fitted_sup_K_over_envelope": c_env,
            "leading_ratio_last": rows[-1][8],
            "rows": len(rows),
        },
    )
    print(f"wrote {csv}")
    return 0


def cmd_resolvent(cfg: RunConfig, checks: list[str]) -> int:
    flux = cfg.flux
    summary = {"alpha_raw": cfg.alpha_raw, "alpha_reduced": flux.alpha}
    if "scaling" in checks:
        rng = np.random.default_rng(20240817)
        worst = 0.0
        rows = []
        for _ in range(100):
            lam = float(rng.uniform(0.25, 4.0))
            r1, r2 = rng.uniform(0.2, 2.4, 2)
            if abs(r1 - r2) < 0.12:
                r2 = r1 + 0.25
            th1, th2 = rng.uniform(0.0, 2.0 * math.pi, 2)
            s = math.sqrt(lam)
            v1 = resolvent.free_resolvent_kernel(flux, lam, PolarPoint(r1, th1), PolarPoint(r2, th2))
            v2 = resolvent.free_resolvent_kernel(flux, 1.0, PolarPoint(s * r1, th1), PolarPoint(s * r2, th2))
            resid = abs(v1 - v2)
            worst = max(worst, resid)
            rows.append((lam, r1, r2, th1, th2, resid))
        with open(cfg.outpath("resolvent_scaling.csv"), "w") as fh:
            fh.write("lambda,r1,r2,theta1,theta2,residual\n")
            for row in rows:
                fh.write(",".join(f"{v!r}" for v in row) + "\n")
        summary["scaling_max_residual"] = worst
    if "g0" in checks:
        rows = []
        worst = 0.0
        for ratio in np.linspace(0.01, 0.95, 48):
            g0 = resolvent.threshold_kernel(0, flux, PolarPoint(float(ratio), 1.0), PolarPoint(1.0, 1.0))
            ref = math.atanh(math.sqrt(ratio)) / math.pi if abs(abs(flux.alpha) - 0.5) < 1e-12 else math.nan
            err = abs(g0 - ref) if not math.isnan(ref) else math.nan
            if not math.isnan(err):
                worst = max(worst, err)
            rows.append((float(ratio), g0.real, g0.imag, ref, err))
        with open(cfg.outpath("resolvent_g0.csv"), "w") as fh:
            fh.write("ratio,re_g0,im_g0,artanh_reference,abs_error\n")
            for row in rows:
                fh.write(",".join(f"{v!r}" for v in row) + "\n")
        summary["g0_closed_form_max_error"] = worst if abs(abs(flux.alpha) - 0.5) < 1e-12 else "n/a (alpha != 1/2)"
    if "slope" in checks:
        x, y = PolarPoint(0.8, 0.3), PolarPoint(1.6, 1.1)
        lams = np.geomspace(1e-4, 1e-2, 9)
        vals = np.array([abs(resolvent.low_energy_remainder(flux, float(l), x, y)) for l in lams])
        slope = float(np.polyfit(np.log(lams), np.log(vals), 1)[0])
        with open(cfg.outpath("resolvent_slope.csv"), "w") as fh:
            fh.write("lambda,abs_remainder\n")
            for l, v in zip(lams, vals):
                fh.write(f"{l!r},{v!r}\n")
        summary["expansion_slope"] = slope
        summary["expansion_slope_floor"] = abs(abs(flux.alpha) - 1.0) + 0.2
    _write_summary(cfg.outpath("resolvent_summary.txt"), summary)
    print(f"wrote resolvent reports to {cfg.out_dir}")
    return 0


def cmd_evolve(cfg: RunConfig) -> int:
    flux = cfg.flux
    grid = cfg.grid()
    report = scattering.check_zero_resonance(flux, cfg.V, grid)
    if not report.passed:
        raise ZeroResonanceError(
            f"zero-resonance assumption violated: margin {report.margin:.3e} "
            f"<= threshold {report.threshold:.1e}"
        )
    res = evolution.evolve_weighted_ladder(flux, cfg.V, cfg.times, grid, lam_max=cfg.lam_max)
    fit = evolution.fit_decay_exponent(res.times, res.norms)
    lead = scattering.leading_evolution_operator(flux, cfg.V, grid)
    scale = max(np.linalg.norm(op.matrix, 2) for op in lead)
    a = flux.abs_alpha
    lead_err = []
    for ti, t in enumerate(res.times):
        itp = np.exp((1.0 + a) * (math.log(t) + 0.5j * math.pi))
        err = max(
            np.linalg.norm(itp * res.mode_operators[ti][mi].matrix - lead[mi].matrix, 2)
            for mi in range(len(lead))
        )
        lead_err.append(err / scale)
    margin = scattering.positive_energy_margin(flux, cfg.V, grid, cfg.lambdas)
    with open(cfg.outpath("evolve_ladder.csv"), "w") as fh:
        fh.write("t,weighted_norm,rescaled_leading_error\n")
        for t, nrm, err in zip(res.times, res.norms, lead_err):
            fh.write(f"{t!r},{nrm!r},{err!r}\n")
    _write_summary(
        cfg.outpath("evolve_summary.txt"),
        {
            "alpha_raw": cfg.alpha_raw,
            "alpha_reduced": flux.alpha,
            "potential": cfg.potential,
            "resonance_margin": report.margin,
            "decay_exponent": fit.exponent,
            "decay_exponent_expected": 1.0 + a,
            "fit_residual": fit.residual,
            "positive_energy_margin": margin,
            "lambda_nodes": res.lambda_nodes,
            "tail_estimate": res.tail_estimate,
        },
    )
    print(
        f"decay exponent {fit.exponent:.4f} (expected {1.0 + a}); "
        f"reports in {cfg.out_dir}"
    )
    return 0


def cmd_selftest() -> int:
    """Condensed invariant suite; one PASS/FAIL line per check."""
    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    xs = np.geomspace(0.1, 20.0, 25)
    check(
        "gamma recurrence",
        all(abs(gamma(x + 1.0) - x * gamma(x)) <= 1e-12 * gamma(x + 1.0) for x in xs),
    )
    worst = 0.0
    for nu in (0.25, 0.5, 1.75, 6.5):
        for x in (0.7, 5.0, 12.0, 40.0):
            p0, p1 = bessel_jy(nu, x), bessel_jy(nu + 1.0, x)
            jp = nu / x * p0.j - p1.j
            yp = nu / x * p0.y - p1.y
            worst = max(worst, abs(p0.j * yp - jp * p0.y - 2.0 / (math.pi * x)))
    check("cylinder Wronskian", worst < 1e-9)
    fl = reduce_flux(0.7)
    check("flux reduction", abs(fl.alpha + 0.3) < 1e-14 and reduce_flux(fl.alpha).alpha == fl.alpha)
    fl5 = reduce_flux(0.5)
    g0 = resolvent.threshold_kernel(0, fl5, PolarPoint(0.4, 1.0), PolarPoint(1.0, 1.0))
    check("G0 artanh closed form", abs(g0 - math.atanh(math.sqrt(0.4)) / math.pi) < 1e-10)
    fl = reduce_flux(0.25)
    v1 = resolvent.free_resolvent_kernel(fl, 2.0, PolarPoint(0.7, 0.1), PolarPoint(1.4, 2.0))
    v2 = resolvent.free_resolvent_kernel(
        fl, 1.0, PolarPoint(0.7 * math.sqrt(2.0), 0.1), PolarPoint(1.4 * math.sqrt(2.0), 2.0)
    )
    check("resolvent scaling identity", abs(v1 - v2) < 1e-10)
    val = evolution.erdelyi_integral(0.5, 1e3, evolution.CutoffSpec())
    ref = evolution.erdelyi_reference(0.5, 1e3)
    check("erdelyi ratio", abs(val / ref - 1.0) < 0.05)
    k = propagator.propagator_kernel(fl, 1e3, PolarPoint(1.0, 0.0), PolarPoint(1.0, 0.0), 1e-10)
    lead = propagator.propagator_leading_term(fl, 1e3, PolarPoint(1.0, 0.0), PolarPoint(1.0, 0.0))
    check("propagator leading ratio", abs(k.value / lead - 1.0) < 0.05)
    print(f"{'OK' if failures == 0 else 'FAILED'}: selftest")
    return 0 if failures == 0 else 1


def _read_config_file(path: str) -> dict:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"config line {line!r} is not key = value")
        key, val = (tok.strip() for tok in line.split("=", 1))
        values[key] = val
    return values


_CONFIG_CASTS = {
    "alpha": float, "potential": str, "rmax": float, "n": int, "modes": int,
    "t": str, "lambdas": str, "lmax": float, "tol": float, "out": str,
    "jobs": int, "r": float, "rp": float, "dtheta": float,
}


def _build_config(args) -> RunConfig:
    merged = {}
    if getattr(args, "config", None):
        raw = _read_config_file(args.config)
        for key, val in raw.items():
            if key not in _CONFIG_CASTS:
                raise DomainError(f"unknown config key {key!r}")
            merged[key] = _CONFIG_CASTS[key](val)
    for key in _CONFIG_CASTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    if "alpha" not in merged:
        raise DomainError("alpha is required (flag --alpha or config file)")
    return RunConfig(
        alpha_raw=merged["alpha"],
        potential=merged.get("potential", "none"),
        r_max=merged.get("rmax", 3.0),
        n=merged.get("n", 56),
        modes=merged.get("modes", 8),
        t_spec=merged.get("t", "1e2:1e4:12"),
        lambda_spec=merged.get("lambdas", "1e-3:1e3:8"),
        lam_max=merged.get("lmax", 600.0),
        tol=merged.get("tol", 1e-10),
        out_dir=merged.get("out", "."),
        jobs=merged.get("jobs", 1),
        r=merged.get("r", 1.0),
        rp=merged.get("rp", 1.0),
        dtheta=merged.get("dtheta", 0.0),
    )


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="raw magnetic flux (reduced internally)")
    p.add_argument("--config", type=str, help="key = value config file; flags override")
    p.add_argument("--potential", type=str, help="potential table file or 'none'")
    p.add_argument("--rmax", type=float, help="radial grid extent")
    p.add_argument("--n", type=int, help="radial quadrature nodes")
    p.add_argument("--modes", type=int, help="mode window M")
    p.add_argument("--t", type=str, help="time ladder start:stop:points_per_decade")
    p.add_argument("--lambdas", type=str, help="lambda grid start:stop:points_per_decade")
    p.add_argument("--lmax", type=float, help="high-energy truncation for evolve")
    p.add_argument("--tol", type=float, help="kernel summation tolerance")
    p.add_argument("--out", type=str, help="output directory")
    p.add_argument("--jobs", type=int, help="worker cap for ladder sweeps")
    p.add_argument("--r", type=float, help="first radius")
    p.add_argument("--rp", type=float, help="second radius")
    p.add_argument("--dtheta", type=float, help="angle difference theta - theta'")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="abdisp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("propagator", "resolvent", "evolve"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "resolvent":
            p.add_argument("--scaling-check", action="store_true")
            p.add_argument("--g0-closed-form", action="store_true")
            p.add_argument("--expansion-slope", action="store_true")
    sub.add_parser("selftest")
    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest()
        cfg = _build_config(args)
        if args.command == "propagator":
            return cmd_propagator(cfg)
        if args.command == "resolvent":
            checks = []
            if args.scaling_check:
                checks.append("scaling")
            if args.g0_closed_form:
                checks.append("g0")
            if args.expansion_slope:
                checks.append("slope")
            if not checks:
                checks = ["scaling", "slope"]
            return cmd_resolvent(cfg, checks)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        raise DomainError(f"unknown command {args.command}")
    except ZeroResonanceError as exc:
        print(f"abdisp: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single CLI failure funnel
        print(f"abdisp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

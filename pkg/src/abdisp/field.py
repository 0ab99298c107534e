"""Flux normalization, geometry, weights, angular projection, potentials.

Shared vocabulary for every kernel module: the gauge-reduced flux with its
derived Bessel orders |m + alpha|, polar points, the polynomial and
super-exponential weight functions, the angular mode projector, and radial
compactly supported potentials with their plain-text table format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResolutionError

_INT_TOL = 1e-12
_EXP_ARG_MAX = 709.0  # exp overflow threshold for float64


@dataclass(frozen=True)
class Flux:
    """Gauge-reduced Aharonov-Bohm flux.

    alpha lies in (-1/2, 1/2] \\ {0}; raw is the flux before reduction.
    """

    alpha: float
    sign: int
    raw: float

    def mode_order(self, m: int) -> float:
        """Bessel order |m + alpha| of angular mode m."""
        return abs(m + self.alpha)

    @property
    def abs_alpha(self) -> float:
        return abs(self.alpha)


def reduce_flux(raw: float) -> Flux:
    """Reduce a flux to the canonical interval (-1/2, 1/2].

    Integer flux gauges away entirely and is rejected.
    """
    raw = float(raw)
    if abs(raw - round(raw)) <= _INT_TOL:
        raise DomainError(f"integer flux {raw} is gauge-trivial")
    k = math.ceil(raw - 0.5)
    alpha = raw - k
    return Flux(alpha=alpha, sign=1 if alpha > 0 else -1, raw=raw)


def sigma_alpha(flux: Flux) -> int:
    """1 at the boundary |alpha| = 1/2, else 0."""
    return 1 if abs(abs(flux.alpha) - 0.5) < _INT_TOL else 0


@dataclass(frozen=True)
class PolarPoint:
    """Plane point stored as (r, theta) with theta wrapped into [0, 2pi)."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0.0:
            raise DomainError(f"radius must be >= 0, got {self.r}")
        object.__setattr__(self, "theta", self.theta % (2.0 * math.pi))

    @classmethod
    def from_cartesian(cls, x1: float, x2: float) -> "PolarPoint":
        return cls(r=math.hypot(x1, x2), theta=math.atan2(x2, x1))

    def to_cartesian(self) -> tuple[float, float]:
        return self.r * math.cos(self.theta), self.r * math.sin(self.theta)


def vector_potential(x: tuple[float, float], flux: Flux) -> tuple[float, float]:
    """Aharonov-Bohm vector potential (alpha/|x|^2) (-x2, x1)."""
    x1, x2 = x
    rho2 = x1 * x1 + x2 * x2
    if rho2 == 0.0:
        raise DomainError("vector potential is singular at the origin")
    c = flux.alpha / rho2
    return (-c * x2, c * x1)


def weight(kind: str, point, s: float | None = None) -> float:
    """Weight functions w^s = (1+r^2)^(s/2), rho^(1/2) = e^(r^4/2), rho^(-1/2).

    `point` may be a PolarPoint or a bare radius.
    """
    r = point.r if isinstance(point, PolarPoint) else float(point)
    if kind == "poly":
        if s is None:
            raise DomainError("poly weight needs the exponent s")
        return (1.0 + r * r) ** (0.5 * s)
    if kind == "rho_half":
        a = 0.5 * r ** 4
        if a > _EXP_ARG_MAX:
            raise OverflowError(f"e^(r^4/2) overflows at r={r}; truncate the domain first")
        return math.exp(a)
    if kind == "rho_inv_half":
        return math.exp(-0.5 * r ** 4)
    raise DomainError(f"unknown weight kind {kind!r}")


def theta_grid(n: int) -> np.ndarray:
    """Uniform angular samples theta_j = 2 pi j / n on [0, 2pi)."""
    return 2.0 * math.pi * np.arange(n) / n


def project_mode(u: np.ndarray, m: int) -> np.ndarray:
    """Angular Fourier coefficient f_m(r_i) of samples u[i, j] = u(r_i, theta_j).

    theta_j must be the uniform grid of theta_grid(n); the trapezoid rule is
    then exact for trigonometric polynomials below the Nyquist degree.
    """
    u = np.asarray(u)
    if u.ndim != 2:
        raise ResolutionError("expected samples on an (r_i, theta_j) grid")
    n = u.shape[1]
    if n < 4 * (abs(m) + 1):
        raise ResolutionError(
            f"{n} angular samples cannot resolve mode {m}; need >= {4 * (abs(m) + 1)}"
        )
    phase = np.exp(-1j * m * theta_grid(n))
    return u @ phase / n


@dataclass(frozen=True)
class PotentialSpec:
    """Radial, bounded, compactly supported potential as a sampled table.

    Linear interpolation between samples; identically zero beyond
    support_radius.  Piecewise-constant wells are exact under this
    representation.
    """

    support_radius: float
    bound: float
    r_values: np.ndarray = field(repr=False)
    v_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        rv = np.asarray(self.r_values, dtype=float)
        vv = np.asarray(self.v_values, dtype=float)
        if self.support_radius <= 0.0:
            raise DomainError("support_radius must be positive")
        if rv.ndim != 1 or rv.shape != vv.shape or rv.size < 1:
            raise DomainError("potential table must be matching 1-d r/value arrays")
        if np.any(np.diff(rv) <= 0.0):
            raise DomainError("potential table radii must be strictly increasing")
        if rv[0] < 0.0 or rv[-1] > self.support_radius + 1e-12:
            raise DomainError("potential table must live inside [0, support_radius]")
        if np.max(np.abs(vv)) > self.bound + 1e-12:
            raise DomainError("potential table exceeds the declared bound")
        object.__setattr__(self, "r_values", rv)
        object.__setattr__(self, "v_values", vv)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        v = np.interp(r, self.r_values, self.v_values)
        return np.where(r > self.support_radius, 0.0, v)

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.v_values == 0.0))

    @classmethod
    def constant_well(cls, depth: float, radius: float) -> "PotentialSpec":
        """V = depth on [0, radius], zero outside."""
        return cls(
            support_radius=radius,
            bound=abs(depth),
            r_values=np.array([0.0, radius]),
            v_values=np.array([depth, depth]),
        )

    @classmethod
    def zero(cls, radius: float = 1.0) -> "PotentialSpec":
        return cls(
            support_radius=radius,
            bound=0.0,
            r_values=np.array([0.0, radius]),
            v_values=np.array([0.0, 0.0]),
        )

    @classmethod
    def from_file(cls, path) -> "PotentialSpec":
        """Read the plain-text table: `# support_radius=<R> bound=<B>` header,
        then one `r value` pair per line with strictly increasing r."""
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("#"):
                raise DomainError(f"{path}: missing '# support_radius=... bound=...' header")
            fields = dict(
                tok.split("=", 1) for tok in header.lstrip("#").split() if "=" in tok
            )
            try:
                support = float(fields["support_radius"])
                bound = float(fields["bound"])
            except (KeyError, ValueError) as exc:
                raise DomainError(f"{path}: bad header {header!r}") from exc
            rows = [line.split() for line in fh if line.strip()]
        try:
            rv = np.array([float(row[0]) for row in rows])
            vv = np.array([float(row[1]) for row in rows])
        except (IndexError, ValueError) as exc:
            raise DomainError(f"{path}: malformed table row") from exc
        return cls(support_radius=support, bound=bound, r_values=rv, v_values=vv)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(
                f"# support_radius={float(self.support_radius)!r} bound={float(self.bound)!r}\n"
            )
            for r, v in zip(self.r_values, self.v_values):
                fh.write(f"{float(r)!r} {float(v)!r}\n")

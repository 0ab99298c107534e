"""Discretized weighted integral operators on radial grids, per angular mode.

Functions on the plane are reduced mode-by-mode to L^2(R_+, r dr); a grid
node vector u_i ~ u(r_i) sqrt(W_i) turns kernels K(r, r') into matrices
K_ij = K(r_i, r_j) sqrt(W_i W_j) whose 2-norms approximate operator norms.
The rho-type weightings are diagonal in this representation.

Radial mode kernels used here (factor 2 pi relative to the plane kernels,
consistent with the direct-sum normalization):

    R0_m(lambda; r, r') = (pi i/2) J_nu(a)(J_nu(b) + i Y_nu(b))
    G0_m(r, r') = ratio^nu / (2 nu),   ratio = min(r/r', r'/r)
    G1_m, G2_m, gcal1_m, gcal2_m: 2 pi times the closed-form kernels,
    living only in mode 0 and mode -sign(alpha) respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.special import roots_jacobi, roots_legendre

from .errors import DomainError, GridError
from .field import Flux, PotentialSpec, sigma_alpha
from .resolvent import _mode_cross_product, _use_scaled
from .specfun import bessel_jy_grid, gamma


@dataclass(frozen=True)
class RadialGrid:
    """Quadrature nodes and weights for the measure r dr on (0, R_max]."""

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    r_max: float
    mode_window: int
    breakpoints: tuple = ()

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def modes(self) -> range:
        return range(-self.mode_window, self.mode_window + 1)

    def integrate(self, values) -> float:
        """Integral of f(r) r dr from node samples."""
        return float(np.dot(self.weights, values))


def build_radial_grid(
    r_max: float, n: int = 64, mode_window: int = 12, breakpoints: tuple = ()
) -> RadialGrid:
    """Composite Gauss rule for int_0^{R_max} f(r) r dr.

    The panel touching zero is Gauss-Jacobi with weight r (so the measure is
    exact there); later panels are Gauss-Legendre with the r factor folded
    into the weights.  Panel edges can be aligned with potential jumps via
    `breakpoints` to keep the integrands panelwise smooth.
    """
    if r_max <= 0.0:
        raise GridError("R_max must be positive")
    if n < 16:
        raise GridError("need at least 16 radial nodes")
    if mode_window < 4:
        raise GridError("need a mode window of at least 4")
    edges = [0.0] + sorted(b for b in breakpoints if 0.0 < b < r_max) + [r_max]
    lengths = np.diff(edges)
    counts = np.maximum(8, np.round(n * lengths / r_max).astype(int))
    # trim to the requested total, never below 8 per panel
    while counts.sum() > n and np.any(counts > 8):
        counts[np.argmax(counts)] -= 1
    all_nodes, all_weights = [], []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        ni = int(counts[i])
        if a == 0.0:
            xj, wj = roots_jacobi(ni, 0.0, 1.0)  # weight (1+x) on [-1, 1]
            r = 0.5 * b * (1.0 + xj)
            w = (0.5 * b) ** 2 * wj
        else:
            xl, wl = roots_legendre(ni)
            r = 0.5 * (a + b) + 0.5 * (b - a) * xl
            w = 0.5 * (b - a) * wl * r
        all_nodes.append(r)
        all_weights.append(w)
    nodes = np.concatenate(all_nodes)
    weights = np.concatenate(all_weights)
    order = np.argsort(nodes)
    return RadialGrid(
        nodes=nodes[order],
        weights=weights[order],
        r_max=float(r_max),
        mode_window=int(mode_window),
        breakpoints=tuple(edges[1:-1]),
    )


_WEIGHTINGS = {
    "none": lambda r: np.ones_like(r),
    "rho_inv_half": lambda r: np.exp(-0.5 * r ** 4),
    "rho_inv": lambda r: np.exp(-r ** 4),
}


@dataclass(frozen=True)
class ModeOperator:
    """Discretized weighted integral operator of one angular mode."""

    m: int
    matrix: np.ndarray = field(repr=False)
    weighting: str = "none"
    lam: float | None = None

    def norm2(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def fro(self) -> float:
        return float(np.linalg.norm(self.matrix, "fro"))

    def save_txt(self, path) -> None:
        """Row-major plain-text export with an identifying header."""
        n = self.matrix.shape[0]
        with open(path, "w") as fh:
            fh.write(
                f"# m={self.m} lambda={self.lam!r} weighting={self.weighting} n={n}\n"
            )
            for row in self.matrix:
                fh.write(" ".join(f"{z.real!r} {z.imag!r}" for z in row) + "\n")


def load_mode_operator(path) -> ModeOperator:
    with open(path) as fh:
        header = fh.readline().lstrip("#").split()
        fields = dict(tok.split("=", 1) for tok in header if "=" in tok)
        rows = []
        for line in fh:
            vals = np.array([float(tok) for tok in line.split()])
            rows.append(vals[0::2] + 1j * vals[1::2])
    lam = None if fields["lambda"] == "None" else float(fields["lambda"])
    return ModeOperator(
        m=int(fields["m"]), matrix=np.array(rows), weighting=fields["weighting"], lam=lam
    )


def weight_diagonal(grid: RadialGrid, weighting: str) -> np.ndarray:
    try:
        return _WEIGHTINGS[weighting](grid.nodes)
    except KeyError:
        raise DomainError(f"unknown weighting tag {weighting!r}") from None


def discretize_mode_kernel(
    kernel, grid: RadialGrid, weighting: str = "none", m: int = 0, lam: float | None = None
) -> ModeOperator:
    """Matrix W_i K(r_i, r_j) W_j sqrt(weight_i weight_j) for a finite kernel.

    `kernel` must accept broadcast arrays (r[:, None], r[None, :]).
    """
    r = grid.nodes
    mat = np.asarray(kernel(r[:, None], r[None, :]))
    if not np.all(np.isfinite(mat)):
        raise DomainError("kernel produced non-finite entries on the grid")
    wh = weight_diagonal(grid, weighting)
    sq = np.sqrt(grid.weights)
    scale = wh * sq
    return ModeOperator(m=m, matrix=scale[:, None] * mat * scale[None, :],
                        weighting=weighting, lam=lam)


def _mode_g0_matrix(flux: Flux, m: int, grid: RadialGrid) -> np.ndarray:
    """Radial G0 kernel ratio^nu/(2 nu) on the grid (exact 1/(2 nu) diagonal)."""
    nu = flux.mode_order(m)
    r = grid.nodes
    logr = np.log(r)
    mat = np.exp(-nu * np.abs(logr[:, None] - logr[None, :])) / (2.0 * nu)
    sq = np.sqrt(grid.weights)
    return sq[:, None] * mat * sq[None, :]


def _mode_r0_matrix(
    flux: Flux, m: int, lam: float, grid: RadialGrid, seed_cache: dict | None = None
) -> np.ndarray:
    """Radial resolvent kernel matrix at lambda > 0 (triangular assembly)."""
    nu = flux.mode_order(m)
    x = grid.nodes * math.sqrt(lam)
    b_max = float(x[-1])
    if _use_scaled(nu, b_max):
        lo = x[:, None] * np.ones_like(x)[None, :]
        hi = np.maximum(lo, lo.T)
        lo = np.minimum(lo, lo.T)
        cross = np.empty(lo.shape, dtype=complex)
        for i in range(lo.shape[0]):
            for j in range(i, lo.shape[1]):
                cross[i, j] = _mode_cross_product(nu, lo[i, j], hi[i, j])
                cross[j, i] = cross[i, j]
    else:
        j_arr, y_arr = bessel_jy_grid(nu, x, seed_cache)
        h_arr = j_arr + 1j * y_arr
        cross = np.empty((x.size, x.size), dtype=complex)
        iu = np.triu_indices(x.size)
        cross[iu] = j_arr[iu[0]] * h_arr[iu[1]]  # r_i <= r_j above the diagonal
        il = (iu[1], iu[0])
        cross[il] = cross[iu]
    kern = 0.5j * math.pi * cross
    sq = np.sqrt(grid.weights)
    return sq[:, None] * kern * sq[None, :]


def _mode_gcal1_matrix(flux: Flux, grid: RadialGrid) -> np.ndarray:
    a = flux.abs_alpha
    r = grid.nodes
    p = (0.25 * r[:, None] * r[None, :]) ** a / (2.0 * gamma(1.0 + a))
    sq = np.sqrt(grid.weights)
    return sq[:, None] * p * sq[None, :]


def _mode_gcal2_matrix(flux: Flux, grid: RadialGrid) -> np.ndarray:
    # lives in mode m = -sign(alpha); angular phase is carried by that mode
    a = flux.abs_alpha
    nu2 = 1.0 - a
    r = grid.nodes
    p = gamma(1.0 + a) * (0.25 * r[:, None] * r[None, :]) ** nu2 / (
        2.0 * gamma(1.0 + nu2) ** 2
    )
    sq = np.sqrt(grid.weights)
    return sq[:, None] * p * sq[None, :]


def _mode_g12_matrix(flux: Flux, m: int, grid: RadialGrid) -> np.ndarray:
    """Radial (G1 + sigma_alpha G2) block of mode m (zero except two modes)."""
    a = flux.abs_alpha
    r = grid.nodes
    sq = np.sqrt(grid.weights)
    zero = np.zeros((grid.n, grid.n), dtype=complex)
    if m == 0:
        c = complex(-math.cos(math.pi * a) / math.sin(math.pi * a), 1.0)
        p = c * (0.25 * r[:, None] * r[None, :]) ** a * math.pi / (
            2.0 * gamma(1.0 + a) ** 2
        )
        return sq[:, None] * p * sq[None, :]
    if sigma_alpha(flux) and m == -flux.sign:
        nu2 = 1.0 - a
        c = complex(-math.cos(math.pi * nu2) / math.sin(math.pi * nu2), 1.0)
        p = c * (0.25 * r[:, None] * r[None, :]) ** nu2 * math.pi / (
            2.0 * gamma(1.0 + nu2) ** 2
        )
        return sq[:, None] * p * sq[None, :]
    return zero


def _check_potential(V: PotentialSpec, grid: RadialGrid) -> np.ndarray:
    if V.support_radius > grid.r_max + 1e-12:
        raise GridError(
            f"potential support {V.support_radius} exceeds the grid R_max {grid.r_max}"
        )
    return V(grid.nodes)


@dataclass(frozen=True)
class ResonanceReport:
    """Smallest singular values of 1 + G0 V per mode."""

    margins: dict
    margin: float
    threshold: float
    passed: bool


def check_zero_resonance(
    flux: Flux, V: PotentialSpec, grid: RadialGrid, threshold: float = 1e-6
) -> ResonanceReport:
    """Numerical witness of the zero-resonance assumption: 1 + G0 V invertible."""
    v = _check_potential(V, grid)
    margins = {}
    for m in grid.modes:
        a_mat = np.eye(grid.n) + _mode_g0_matrix(flux, m, grid) * v[None, :]
        margins[m] = float(np.linalg.svd(a_mat, compute_uv=False)[-1])
    margin = min(margins.values())
    return ResonanceReport(
        margins=margins, margin=margin, threshold=threshold, passed=margin > threshold
    )


def _solve_with_refinement(a_mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Dense solve with one step of iterative refinement."""
    lu = lu_factor(a_mat)
    x = lu_solve(lu, rhs)
    resid = rhs - a_mat @ x
    return x + lu_solve(lu, resid)


def spectral_density(
    flux: Flux, lam: float, V: PotentialSpec, grid: RadialGrid
) -> list[ModeOperator]:
    """E(alpha, lambda) = (1/pi) Im R(lambda) per mode, Hermitian PSD."""
    if lam <= 0.0:
        raise DomainError("spectral density needs lambda > 0")
    v = _check_potential(V, grid)
    out = []
    seed_cache: dict = {}
    for m in grid.modes:
        r0 = _mode_r0_matrix(flux, m, lam, grid, seed_cache)
        a_mat = np.eye(grid.n) + r0 * v[None, :]
        try:
            r_full = _solve_with_refinement(a_mat, r0)
        except np.linalg.LinAlgError as exc:
            raise GridError(
                f"(1 + R0 V) numerically singular at lambda={lam}, mode {m}; "
                "refine the grid"
            ) from exc
        e_m = (r_full - r_full.conj().T) / (2j * math.pi)
        e_m = 0.5 * (e_m + e_m.conj().T)
        out.append(ModeOperator(m=m, matrix=e_m, weighting="none", lam=lam))
    return out


@dataclass(frozen=True)
class ThresholdOperators:
    """T0 = (1+G0V)^-1 G0, T1 = (1+G0V)^-1 (G1+sigma G2) (1+VG0)^-1, and the
    spectral-density leading block E1 (with the gcal kernels)."""

    t0: list
    t1: list
    e1: list


def threshold_operators(flux: Flux, V: PotentialSpec, grid: RadialGrid) -> ThresholdOperators:
    v = _check_potential(V, grid)
    a = flux.abs_alpha
    sig = sigma_alpha(flux)
    t0, t1, e1 = [], [], []
    for m in grid.modes:
        g0 = _mode_g0_matrix(flux, m, grid)
        left = np.eye(grid.n) + g0 * v[None, :]        # 1 + G0 V
        right = np.eye(grid.n) + v[:, None] * g0       # 1 + V G0
        t0_m = _solve_with_refinement(left, g0.astype(complex))
        g12 = _mode_g12_matrix(flux, m, grid)
        gc = _mode_gcal1_matrix(flux, grid).astype(complex) if m == 0 else (
            _mode_gcal2_matrix(flux, grid).astype(complex)
            if (sig and m == -flux.sign)
            else np.zeros((grid.n, grid.n), dtype=complex)
        )
        if np.any(g12):
            t1_m = _solve_with_refinement(
                left.astype(complex),
                np.linalg.solve(right.T.astype(complex), g12.T).T,
            )
        else:
            t1_m = g12
        if np.any(gc):
            e1_m = _solve_with_refinement(
                left.astype(complex),
                np.linalg.solve(right.T.astype(complex), gc.T).T,
            ) / gamma(1.0 + a)
        else:
            e1_m = gc
        t0.append(ModeOperator(m=m, matrix=t0_m, weighting="none", lam=0.0))
        t1.append(ModeOperator(m=m, matrix=t1_m, weighting="none", lam=0.0))
        e1.append(ModeOperator(m=m, matrix=e1_m, weighting="none", lam=0.0))
    return ThresholdOperators(t0=t0, t1=t1, e1=e1)


def leading_evolution_operator(
    flux: Flux, V: PotentialSpec, grid: RadialGrid, weighting: str = "rho_inv_half"
) -> list[ModeOperator]:
    """Weighted (1+G0V)^-1 (gcal1 + sigma gcal2) (1+VG0)^-1, the limit of the
    (it)^{1+|alpha|}-rescaled evolution."""
    ops = threshold_operators(flux, V, grid)
    wd = weight_diagonal(grid, weighting)
    out = []
    for op in ops.e1:
        mat = gamma(1.0 + flux.abs_alpha) * (wd[:, None] * op.matrix * wd[None, :])
        out.append(ModeOperator(m=op.m, matrix=mat, weighting=weighting, lam=0.0))
    return out


def positive_energy_margin(
    flux: Flux, V: PotentialSpec, grid: RadialGrid, lambdas
) -> float:
    """min over lambda and modes of the smallest singular value of 1 + V R0."""
    v = _check_potential(V, grid)
    margin = math.inf
    for lam in lambdas:
        seed_cache: dict = {}
        for m in grid.modes:
            r0 = _mode_r0_matrix(flux, m, float(lam), grid, seed_cache)
            a_mat = np.eye(grid.n) + v[:, None] * r0
            s_min = float(np.linalg.svd(a_mat, compute_uv=False)[-1])
            margin = min(margin, s_min)
    return margin


def triangle_hs_norm_sq(kernel, r_max: float, n: int = 48) -> float:
    """Hilbert-Schmidt integral int int |K|^2 e^{-2r^4} e^{-2r'^4} r r' dr dr'.

    Split at the diagonal so kernels with a |r - r'| kink stay panelwise
    smooth; `kernel(lo, hi)` is called with lo <= hi elementwise.
    """
    x, w = roots_legendre(n)
    r = 0.5 * r_max * (1.0 + x)
    wr = 0.5 * r_max * w
    total = 0.0
    for i, (ri, wi) in enumerate(zip(r, wr)):
        # inner integral over r' in (ri, r_max)
        h = r_max - ri
        rp = ri + 0.5 * h * (1.0 + x)
        wp = 0.5 * h * w
        vals = np.abs(kernel(ri, rp)) ** 2 * np.exp(-2.0 * rp ** 4) * rp
        total += 2.0 * wi * ri * math.exp(-2.0 * ri ** 4) * float(np.dot(wp, vals))
    return total


def g0_weighted_hs_norm_sq(flux: Flux, r_max: float, n: int = 48, modes: int = 60) -> float:
    """Sum over modes of the rho-weighted HS norms of the G0 mode kernels."""
    total = 0.0
    for m in range(-modes, modes + 1):
        nu = flux.mode_order(m)
        total += triangle_hs_norm_sq(
            lambda lo, hi, nu=nu: (lo / hi) ** nu / (2.0 * nu), r_max, n
        )
    return total

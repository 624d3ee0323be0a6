"""Discretized Weyl transform kernels.

The kernel of W_lam(f) is K(xi, eta) = integral f(x, eta - xi) exp(i*pi*lam*x*(xi + eta)) dx.
The xi-grid is the unshifted copy of the y-axis grid and the eta-grid is the
y-axis grid itself, so eta - xi always lands on a y sample.

For a separable term f1 (x) f2 the kernel has the closed form
    K(xi, eta) = f2(eta - xi) * F f1(-lam * (xi + eta) / 2)
and kernels built from separable terms keep them, which lets the lattice sums
evaluate K anywhere on the real line (see kernel_band).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from twistframe import config, grid, twistframe_logging
from twistframe.common import parallel
from twistframe.common.exception import GridError, LambdaError
from twistframe.grid import AxisGrid, GridSpec, SampledFunction, SeparableTerm

logger = twistframe_logging.init_logging("weyl")

_ROW_CHUNK = 16


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    xi_grid: AxisGrid
    eta_grid: AxisGrid
    values: np.ndarray
    lam: float
    terms: Tuple[SeparableTerm, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.lam == 0:
            raise LambdaError(lam=self.lam)
        if self.values.shape != (self.xi_grid.count, self.eta_grid.count):
            raise GridError(reason="kernel values do not match the (xi, eta) grids")

    @property
    def cell_area(self) -> float:
        return self.xi_grid.h * self.eta_grid.h

    def hs_norm2(self) -> float:
        """Squared HS norm by quadrature on the kernel grid."""
        return float(np.sum(np.abs(self.values) ** 2) * self.cell_area)


def kernel_grids(spec: GridSpec) -> Tuple[AxisGrid, AxisGrid]:
    if spec.role != "phase-plane" or spec.dimension != 2:
        raise GridError(reason=f"Weyl kernels need a two-axis phase-plane grid, got {spec.role}")
    y_axis = spec.axes[1]
    return y_axis.unshifted(), y_axis


def _check_lambda(lam: float) -> None:
    if lam == 0:
        raise LambdaError(lam=lam)


def _term_kernel(terms: Tuple[SeparableTerm, ...], xi: np.ndarray, eta: np.ndarray, lam: float) -> np.ndarray:
    diff = eta[None, :] - xi[:, None]
    freq = -0.5 * lam * (xi[:, None] + eta[None, :])
    out = np.zeros(diff.shape, dtype=complex)
    for term in terms:
        f1, f2 = term.factors
        second = f2.evaluate(diff)
        nonzero = second != 0
        if not np.any(nonzero):
            continue
        first = np.zeros(diff.shape, dtype=complex)
        first[nonzero] = f1.fourier(freq[nonzero])
        out = out + term.coefficient * second * first
    return out


def _direct_rows(
    f: SampledFunction, xi_grid: AxisGrid, eta_grid: AxisGrid, lam: float, threads: Optional[int]
) -> np.ndarray:
    x_axis = f.spec.axes[0]
    x = x_axis.points()
    xi = xi_grid.points()
    eta = eta_grid.points()
    n_eta = eta_grid.count
    half = -eta_grid.first_index

    def rows(start: int) -> np.ndarray:
        stop = min(start + _ROW_CHUNK, len(xi))
        block = np.zeros((stop - start, n_eta), dtype=complex)
        for i in range(start, stop):
            d = np.arange(n_eta) - i + half
            valid = (d >= 0) & (d < f.spec.axes[1].count)
            if not np.any(valid):
                continue
            columns = f.values[:, d[valid]]
            phase = grid.unit_phase(lam * np.outer(x, xi[i] + eta[valid]))
            block[i - start, valid] = np.sum(columns * phase, axis=0) * x_axis.h
        return block

    blocks = parallel.ordered_map(rows, range(0, len(xi), _ROW_CHUNK), threads)
    return np.vstack(blocks)


def weyl_kernel(
    f: SampledFunction, lam: float = 1.0, fast_path: Optional[bool] = None, threads: Optional[int] = None
) -> KernelMatrix:
    """Kernel of W_lam(f) on the kernel grids of f's phase-plane grid.

    The separable fast path is used when f carries analytic terms, unless
    fast_path=False forces x-quadrature on the samples.
    """
    _check_lambda(lam)
    xi_grid, eta_grid = kernel_grids(f.spec)
    use_terms = bool(f.terms) if fast_path is None else fast_path
    if use_terms and not f.terms:
        raise GridError(reason="the separable fast path needs analytic terms")
    if use_terms:
        values = _term_kernel(f.terms, xi_grid.points(), eta_grid.points(), lam)
    else:
        values = _direct_rows(f, xi_grid, eta_grid, lam, threads)
    return KernelMatrix(xi_grid, eta_grid, values, float(lam), f.terms)


def kernel_band(K: KernelMatrix, xi: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Matrix of K(xi_a, xi_a + u_b).

    With analytic terms any real xi is allowed. Without them xi and xi + u must
    lie on the grid lattices and samples outside the kernel box read as zero.
    """
    xi = np.asarray(xi, dtype=float)
    u = np.asarray(u, dtype=float)
    out = np.zeros((len(xi), len(u)), dtype=complex)
    if K.terms:
        for term in K.terms:
            f1, f2 = term.factors
            second = f2.evaluate(u)
            cols = np.flatnonzero(second)
            if len(cols) == 0:
                continue
            freq = -K.lam * (xi[:, None] + 0.5 * u[None, cols])
            out[:, cols] += term.coefficient * second[None, cols] * f1.fourier(freq)
        return out

    rows, row_inside = K.xi_grid.lookup(xi)
    cols, col_inside = K.eta_grid.lookup(xi[:, None] + u[None, :])
    valid = row_inside[:, None] & col_inside
    row_index = np.broadcast_to(rows[:, None], valid.shape)
    out[valid] = K.values[row_index[valid], cols[valid]]
    return out


def band_support(K: KernelMatrix, u: np.ndarray) -> np.ndarray:
    """Mask of the lags u = eta - xi where the kernel can be nonzero."""
    if not K.terms:
        return np.ones(len(u), dtype=bool)
    scale = np.zeros(len(u))
    for term in K.terms:
        scale = np.maximum(scale, np.abs(term.coefficient * term.factors[1].evaluate(u)))
    peak = scale.max() if len(scale) else 0.0
    return scale > grid.NEGLIGIBLE * peak if peak > 0 else np.zeros(len(u), dtype=bool)


def frequency_cutoff(terms: Tuple[SeparableTerm, ...], frequency_radius: Optional[float] = None) -> float:
    """Frequency radius for lattice sums and HS integrals over the real line."""
    limit = frequency_radius or config.getfloat("twistframe", "frequency_radius", section="weyl")
    widest = max((t.factors[0].bandwidth() for t in terms), default=math.inf)
    return min(limit, widest)


def _check_pair(K1: KernelMatrix, K2: KernelMatrix) -> None:
    if K1.xi_grid != K2.xi_grid or K1.eta_grid != K2.eta_grid:
        raise GridError(reason="kernels live on different (xi, eta) grids")
    if K1.lam != K2.lam:
        raise GridError(reason=f"kernels carry different lambda ({K1.lam} and {K2.lam})")


def hs_inner(
    K1: KernelMatrix, K2: KernelMatrix, frequency_radius: Optional[float] = None, threads: Optional[int] = None
) -> complex:
    """Hilbert-Schmidt pairing integral K1 * conj(K2).

    Kernels with analytic terms are integrated over the whole (xi, u = eta - xi)
    plane up to the frequency radius; otherwise the common grid is summed.
    """
    _check_pair(K1, K2)
    if not (K1.terms and K2.terms):
        return complex(np.vdot(K2.values, K1.values) * K1.cell_area)

    u = K1.eta_grid.points()
    cols = band_support(K1, u) & band_support(K2, u)
    if not np.any(cols):
        return 0j
    u = u[cols]
    width = K1.eta_grid.half_width
    radius = frequency_cutoff(K1.terms + K2.terms, frequency_radius)
    # rectangle rule in xi is exact once lam * step undercuts the inverse box width
    step = 1.0 / (8.0 * width * abs(K1.lam))
    extent = radius / abs(K1.lam) + width
    count = int(math.ceil(extent / step))
    xi = (np.arange(-count, count) + 0.5) * step
    h_u = K1.eta_grid.h
    same = K1 is K2

    def chunk(start: int) -> complex:
        part = xi[start : start + 4096]
        first = kernel_band(K1, part, u)
        second = first if same else kernel_band(K2, part, u)
        return complex(np.sum(first * np.conj(second)))

    partial = parallel.ordered_map(chunk, range(0, len(xi), 4096), threads)
    return complex(sum(partial) * step * h_u)


def compose_kernels(K1: KernelMatrix, K2: KernelMatrix) -> KernelMatrix:
    """Discretized composition integral K1(xi, zeta) K2(zeta, eta) d zeta."""
    if K1.eta_grid != K2.xi_grid:
        raise GridError(reason="the inner variable of a composition must share one grid")
    if K1.lam != K2.lam:
        raise GridError(reason="composition of kernels with different lambda")
    values = K1.values @ K2.values * K1.eta_grid.h
    return KernelMatrix(K1.xi_grid, K2.eta_grid, values, K1.lam)


def twisted_convolution(f: SampledFunction, g: SampledFunction, threads: Optional[int] = None) -> SampledFunction:
    """(f x g)(z) = integral f(z - w) g(w) exp(i*pi*(y*u - x*v)) dw by direct summation.

    Both inputs must share an unshifted phase-plane grid so that z - w stays on it.
    """
    if f.spec != g.spec:
        raise GridError(reason="twisted convolution of functions on different grids")
    spec = f.spec
    if spec.role != "phase-plane" or spec.dimension != 2:
        raise GridError(reason="twisted convolution needs a two-axis phase-plane grid")
    if any(a.midpoint for a in spec.axes):
        raise GridError(reason="twisted convolution needs unshifted axes")
    x_axis, y_axis = spec.axes
    nx, ny = x_axis.count, y_axis.count
    x, y = x_axis.points(), y_axis.points()

    # padded[a + nx // 2, b + ny // 2] = f[a, b]; then f(x_i - u_j, .) sits at row i - j + nx
    padded = np.zeros((2 * nx, 2 * ny), dtype=complex)
    padded[nx // 2 : nx // 2 + nx, ny // 2 : ny // 2 + ny] = f.values
    lag = np.arange(ny)[:, None] - np.arange(ny)[None, :] + ny
    y_phase = grid.unit_phase(np.outer(y, x))

    def row(i: int) -> np.ndarray:
        window = padded[i + 1 : i + nx + 1][::-1]
        shifted = window[:, lag]
        weighted = g.values * grid.unit_phase(-x[i] * y)[None, :]
        return np.einsum("jkm,jm,kj->k", shifted, weighted, y_phase)

    values = np.array(parallel.ordered_map(row, range(nx), threads)) * x_axis.h * y_axis.h
    result = SampledFunction(spec, values)
    twistframe_logging.log_truncation(
        logger, logging.WARNING, "Twisted convolution reaches the box boundary", result.boundary_mass(), grid.NEGLIGIBLE
    )
    return result


def kernel_to_function(K: KernelMatrix, threads: Optional[int] = None) -> SampledFunction:
    """Invert the kernel formula on the (eta, eta) phase-plane grid.

    For fixed y, K(xi, xi + y) is the x-transform of f(., y) at -lam*(2*xi + y)/2.
    Only the kernel samples are inverted; analytic terms are ignored.
    """
    if K.xi_grid != K.eta_grid.unshifted():
        raise GridError(reason="kernel grids do not come from one phase-plane grid")
    axis = K.eta_grid
    spec = grid.phase_plane_spec(axis)
    if K.terms:
        K = KernelMatrix(K.xi_grid, K.eta_grid, K.values, K.lam)

    xi = K.xi_grid.points()
    y = axis.points()
    x = axis.points()
    scale = abs(K.lam) * K.xi_grid.h

    def column(d: int) -> np.ndarray:
        band = kernel_band(K, xi, np.array([y[d]]))[:, 0]
        keep = band != 0
        if not np.any(keep):
            return np.zeros(len(x), dtype=complex)
        freq = -K.lam * (xi[keep] + 0.5 * y[d])
        return (np.exp(2j * np.pi * np.outer(x, freq)) @ band[keep]) * scale

    columns: List[np.ndarray] = parallel.ordered_map(column, range(len(y)), threads)
    return SampledFunction(spec, np.stack(columns, axis=1))

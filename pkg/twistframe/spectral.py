"""Lattice periodizations of Weyl kernels: the weight function, condition C and canonical duals.

R_l(xi) = sum_m integral K(xi + m, eta) conj(K(xi + m + l, eta)) d eta, and w = R_0.
Sums run over |m| <= M in the order m = 0, 1, -1, 2, -2, ... and are
evaluated through kernel_band, so kernels with analytic terms are periodized
over the whole line and grid kernels over their box.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from twistframe import config, grid, twisted, twistframe_logging, weyl
from twistframe.common import parallel
from twistframe.common.exception import GridError, InputError, RefusalError
from twistframe.grid import SampledFunction, TorusGrid
from twistframe.weyl import KernelMatrix

logger = twistframe_logging.init_logging("spectral")

_M_CHUNK = 32
FINITE = "finite"
DIVERGENT = "divergent"
SATISFIED = "condition C satisfied"
VIOLATED = "condition C violated"


@dataclass(frozen=True, eq=False)
class WeightSamples:
    torus: TorusGrid
    values: np.ndarray
    m_truncation: int
    tail_bound: float
    source_norm2: float

    def mass(self) -> float:
        return float(np.sum(self.values) * self.torus.h)

    def sup(self) -> float:
        return float(self.values.max())

    def inf(self) -> float:
        return float(self.values.min())

    def at(self, xi: np.ndarray) -> np.ndarray:
        """Periodic extension evaluated at torus lattice points."""
        q = self.torus.count
        scaled = np.asarray(xi, dtype=float) * q
        idx = np.rint(scaled)
        if np.any(np.abs(scaled - idx) > 1e-6):
            raise GridError(reason="weight samples are only known on the torus lattice")
        return self.values[np.mod(idx.astype(np.int64), q)]

    def metadata(self) -> Dict[str, Any]:
        return {
            "torus_samples": self.torus.count,
            "m_truncation": self.m_truncation,
            "tail_bound": self.tail_bound,
            "source_norm2": self.source_norm2,
            "mass": self.mass(),
        }


@dataclass(frozen=True)
class ConditionCReport:
    residuals: Dict[int, float]
    l_max: int
    m_truncation: int
    tail_bound: float
    threshold: float
    satisfied: bool

    @property
    def verdict(self) -> str:
        return SATISFIED if self.satisfied else VIOLATED

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "residuals": [{"l": l, "residual": r} for l, r in sorted(self.residuals.items())],
            "l_max": self.l_max,
            "m_truncation": self.m_truncation,
            "tail_bound": self.tail_bound,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class ReciprocalProbe:
    estimates: Tuple[Tuple[float, float], ...]
    verdict: str
    min_w: float
    argmin_xi: float

    @property
    def value(self) -> float:
        return self.estimates[-1][1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimates": [{"epsilon": e, "integral": v} for e, v in self.estimates],
            "verdict": self.verdict,
            "min_w": self.min_w,
            "argmin_xi": self.argmin_xi,
        }


def m_order(M: int) -> List[int]:
    order = [0]
    for m in range(1, M + 1):
        order.extend((m, -m))
    return order


def _resolve_m(K: KernelMatrix, M: Optional[int]) -> int:
    if M is None:
        M = config.getint("twistframe", "m_truncation", section="spectral")
    if M < 1:
        raise InputError(reason=f"the m-sum truncation must be positive, got {M}")
    if not K.terms:
        reach = int(math.ceil(K.xi_grid.half_width)) + 1
        if M > reach:
            logger.debug("m-sum truncated to %d: grid kernels vanish outside their box", reach)
        M = min(M, reach)
    return M


def _lattice_sum(
    K: KernelMatrix, xi: np.ndarray, l: int, M: int, threads: Optional[int] = None
) -> np.ndarray:
    u = K.eta_grid.points()
    cols = weyl.band_support(K, u) & weyl.band_support(K, u - l)
    if not np.any(cols):
        return np.zeros(len(xi), dtype=complex)
    u = u[cols]
    order = m_order(M)
    h_u = K.eta_grid.h

    def chunk(start: int) -> np.ndarray:
        ms = np.array(order[start : start + _M_CHUNK], dtype=float)
        points = (ms[:, None] + xi[None, :]).ravel()
        first = weyl.kernel_band(K, points, u)
        second = first if l == 0 else weyl.kernel_band(K, points + l, u - l)
        per_point = np.sum(first * np.conj(second), axis=1).reshape(len(ms), len(xi))
        total = np.zeros(len(xi), dtype=complex)
        for row in per_point:
            total = total + row
        return total

    partial = parallel.ordered_map(chunk, range(0, len(order), _M_CHUNK), threads)
    total = np.zeros(len(xi), dtype=complex)
    for part in partial:
        total = total + part
    return total * h_u


def tail_bound(K: KernelMatrix, M: int) -> float:
    """Bound on the mass of the m-sum beyond |m| = M, from the decay of the x-factor transforms."""
    if not K.terms:
        rows = K.xi_grid.samples_per_unit
        edge = np.abs(K.values[:rows]) ** 2 + np.abs(K.values[-rows:]) ** 2
        return float(np.sum(edge) * K.cell_area)
    u = K.eta_grid.points()
    amplitude = 0.0
    for term in K.terms:
        f1, f2 = term.factors
        power, constant = f1.ft_decay_constant()
        second = float(np.sum(np.abs(f2.evaluate(u)) ** 2) * K.eta_grid.h)
        if power == 2:
            per_term = 2.0 * constant * second / M
        elif power == 4:
            per_term = 2.0 * constant * second / (3.0 * M**3)
        else:
            per_term = 0.0
        amplitude += abs(term.coefficient) * math.sqrt(per_term)
    return amplitude**2


def _require_unit_lambda(K: KernelMatrix) -> None:
    if K.lam != 1:
        raise GridError(reason=f"lattice periodizations are defined for lambda = 1 kernels, got {K.lam}")


def bracket(
    K: KernelMatrix,
    l: int,
    M: Optional[int] = None,
    torus: Optional[TorusGrid] = None,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Samples of R_l on the torus grid (R_0 is the weight function)."""
    _require_unit_lambda(K)
    M = _resolve_m(K, M)
    torus = torus or grid.torus_grid(K.xi_grid.samples_per_unit)
    return _lattice_sum(K, torus.points(), int(l), M, threads)


def weight_at(K: KernelMatrix, xi: np.ndarray, M: Optional[int] = None, threads: Optional[int] = None) -> np.ndarray:
    """Truncated weight sum at arbitrary xi (xi on the kernel lattice for grid kernels)."""
    _require_unit_lambda(K)
    return _lattice_sum(K, np.asarray(xi, dtype=float), 0, _resolve_m(K, M), threads).real


def weight_function(
    K: KernelMatrix, M: Optional[int] = None, torus: Optional[TorusGrid] = None, threads: Optional[int] = None
) -> WeightSamples:
    _require_unit_lambda(K)
    M = _resolve_m(K, M)
    torus = torus or grid.torus_grid(K.xi_grid.samples_per_unit)
    values = _lattice_sum(K, torus.points(), 0, M, threads).real
    tail = tail_bound(K, M)
    norm2 = weyl.hs_inner(K, K, threads=threads).real
    mass = float(np.sum(values) * torus.h)
    twistframe_logging.log_truncation(
        logger, logging.WARNING, f"m-sum truncation M={M} leaves a large tail bound", tail / max(norm2, 1e-300), 1e-2
    )
    logger.debug("weight mass %.6f against source norm %.6f (tail %.2e)", mass, norm2, tail)
    return WeightSamples(torus, values, M, tail, norm2)


def condition_c_residual(
    K: KernelMatrix,
    l_max: Optional[int] = None,
    M: Optional[int] = None,
    threshold: Optional[float] = None,
    threads: Optional[int] = None,
) -> ConditionCReport:
    _require_unit_lambda(K)
    if l_max is None:
        l_max = config.getint("twistframe", "l_max", section="spectral")
    if l_max < 1:
        raise InputError(reason=f"l_max must be positive, got {l_max}")
    M = _resolve_m(K, M)
    torus = grid.torus_grid(K.xi_grid.samples_per_unit)
    residuals = {}
    for l in [*range(-l_max, 0), *range(1, l_max + 1)]:
        R = _lattice_sum(K, torus.points(), l, M, threads)
        residuals[l] = float(np.abs(R).max())
    tail = tail_bound(K, M)
    if threshold is None:
        threshold = max(10.0 * tail, 1e-8)
    satisfied = all(r <= threshold for r in residuals.values())
    return ConditionCReport(residuals, l_max, M, tail, threshold, satisfied)


def probe_samples(
    values: np.ndarray, points: np.ndarray, schedule: Optional[Sequence[float]] = None
) -> ReciprocalProbe:
    """Integrals of 1/max(v, eps) over uniform samples of a unit period, along a decreasing eps schedule.

    The verdict is finite when the last two estimates differ by less than 1%.
    """
    if schedule is None:
        schedule = [float(e) for e in config.getlist("twistframe", "epsilon_schedule", section="spectral")]
    if not schedule:
        raise InputError(reason="empty epsilon schedule")
    estimates = tuple((float(e), float(np.mean(1.0 / np.maximum(values, e)))) for e in schedule)
    verdict = FINITE
    if len(estimates) > 1:
        previous, last = estimates[-2][1], estimates[-1][1]
        if abs(last - previous) >= 1e-2 * abs(previous):
            verdict = DIVERGENT
    argmin = int(np.argmin(values))
    return ReciprocalProbe(estimates, verdict, float(values[argmin]), float(points[argmin]))


def reciprocal_probe(w: WeightSamples, schedule: Optional[Sequence[float]] = None) -> ReciprocalProbe:
    return probe_samples(w.values, w.torus.points(), schedule)


def dual_coefficients(w: WeightSamples) -> np.ndarray:
    """Fourier coefficients a_n, |n| < q/2, of 1/w."""
    return grid.fourier_coefficients(1.0 / w.values, w.torus.count // 2 - 1)


def canonical_dual(
    phi: SampledFunction, w: WeightSamples, epsilon: Optional[float] = None, schedule: Optional[Sequence[float]] = None
) -> SampledFunction:
    """phi~ = sum_n a_n T_(n,0) phi with a_n the Fourier coefficients of 1/w.

    Its kernel is K_phi(xi, eta) / w(xi). Refuses when 1/w is not integrable
    or w drops below epsilon on the grid.
    """
    if epsilon is None:
        epsilon = config.getfloat("twistframe", "epsilon", section="spectral")
    probe = reciprocal_probe(w, schedule)
    if probe.min_w <= epsilon or probe.verdict == DIVERGENT:
        diagnostic = probe.to_dict()
        diagnostic["epsilon"] = epsilon
        raise RefusalError(
            reason=f"1/w is not integrable on the grid (min w = {probe.min_w:.3e} at xi = {probe.argmin_xi})",
            diagnostic=diagnostic,
        )
    coefficients = dual_coefficients(w)
    n_max = len(coefficients) // 2
    cutoff = 1e-15 * np.abs(coefficients).max()
    functions, weights = [], []
    for n in m_order(n_max):
        a = coefficients[n + n_max]
        if abs(a) <= cutoff:
            continue
        functions.append(twisted.twisted_translate(phi, twisted.LatticeIndex(n, 0), warn=False))
        weights.append(a)
    return grid.combine(functions, weights)


def dual_kernel(K: KernelMatrix, w: WeightSamples) -> KernelMatrix:
    """K(xi, eta) / w(xi) with w extended periodically in xi."""
    _require_unit_lambda(K)
    xi = K.xi_grid.points()
    divided = K.values / w.at(xi)[:, None]
    return KernelMatrix(K.xi_grid, K.eta_grid, divided, K.lam)


def dual_weight_deviation(w: WeightSamples, w_dual: WeightSamples, floor: float = 0.1) -> float:
    """max |w_dual * w - 1| over the torus samples where w > floor."""
    if w.torus != w_dual.torus:
        raise GridError(reason="the two weights are sampled on different tori")
    mask = w.values > floor
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(w_dual.values[mask] * w.values[mask] - 1.0)))

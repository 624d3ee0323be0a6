"""Grids, quadrature and sampled functions.

Conventions
-----------
* Axis grids have spacing h = 1/q and points -L + offset + j*h, 0 <= j < 2*L*q,
  with offset 0 or h/2 (midpoint sampling).
* Forward Fourier transform: F h(w) = integral h(x) exp(-2*pi*i*x*w) dx.
* A Factor1D is one of a small set of analytic 1-D functions, optionally
  shifted, modulated and multiplied by a unit phase:
  x -> exp(2*pi*i*turns) * exp(2*pi*i*modulation*x) * base(x - shift).
* A SampledFunction keeps its samples and, when it is a finite sum of
  separable products, the list of SeparableTerm it was built from. The terms
  give the other modules closed-form access to the function away from the
  sampling box.
"""

import functools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from twistframe import config, twistframe_logging
from twistframe.common.exception import DimensionError, GridError

logger = twistframe_logging.init_logging("grid")

ROLES = ("line", "phase-plane", "group")

# factor kinds with a closed-form Fourier transform
ANALYTIC_KINDS = ("indicator", "gaussian", "sinc", "abs_exp", "step_decay")
KINDS = ANALYTIC_KINDS + ("bump",)

# relative amplitude below which a factor (or its transform) is treated as zero
NEGLIGIBLE = 1e-12

# sample count of the support grid used for factors without closed-form transform
_SUPPORT_QUADRATURE_POINTS = 1024
_FT_CHUNK = 4096


def unit_phase(theta: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """exp(i*pi*theta) with theta reduced modulo 2 first, so large arguments keep full accuracy."""
    reduced = np.mod(theta, 2.0)
    return np.exp(1j * np.pi * reduced)


def sign_of_parity(n: int) -> int:
    """exp(i*pi*n) for an integer n, exactly."""
    return -1 if n % 2 else 1


@dataclass(frozen=True)
class AxisGrid:
    half_width: float
    samples_per_unit: int
    offset: float = 0.0

    @property
    def h(self) -> float:
        return 1.0 / self.samples_per_unit

    @property
    def count(self) -> int:
        return int(round(2 * self.half_width * self.samples_per_unit))

    @property
    def first_index(self) -> int:
        """Index of the leftmost sample in units of h (the box starts at first_index * h)."""
        return -int(round(self.half_width * self.samples_per_unit))

    @property
    def midpoint(self) -> bool:
        return self.offset != 0.0

    def points(self) -> np.ndarray:
        shift = 0.5 if self.midpoint else 0.0
        return (np.arange(self.count) + (self.first_index + shift)) / self.samples_per_unit

    def lookup(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Map coordinates lying on the grid lattice to (indices, inside-box mask).

        Coordinates off the lattice raise GridError; coordinates on the lattice
        but outside the box are reported through the mask.
        """
        shift = 0.5 if self.midpoint else 0.0
        scaled = np.asarray(x, dtype=float) * self.samples_per_unit - (self.first_index + shift)
        idx = np.rint(scaled)
        if np.any(np.abs(scaled - idx) > 1e-6):
            raise GridError(reason="coordinates do not lie on the grid lattice")
        idx = idx.astype(np.int64)
        inside = (idx >= 0) & (idx < self.count)
        return idx, inside

    def unshifted(self) -> "AxisGrid":
        return replace(self, offset=0.0)


def make_grid(L: float, q: int, midpoint: bool = False) -> AxisGrid:
    if q is None or int(q) != q or q < 1:
        raise GridError(reason=f"samples per unit must be a positive integer, got {q}")
    if L <= 0:
        raise GridError(reason=f"half width must be positive, got {L}")
    if abs(L * q - round(L * q)) > 1e-9:
        raise GridError(reason=f"L*q must be integral, got L={L}, q={q}")
    q = int(q)
    return AxisGrid(float(L), q, 0.5 / q if midpoint else 0.0)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform samples j/q, 0 <= j < q, of the torus [0, 1)."""

    samples_per_unit: int

    @property
    def h(self) -> float:
        return 1.0 / self.samples_per_unit

    @property
    def count(self) -> int:
        return self.samples_per_unit

    def points(self) -> np.ndarray:
        return np.arange(self.samples_per_unit) / self.samples_per_unit


def torus_grid(q: int) -> TorusGrid:
    if int(q) != q or q < 1:
        raise GridError(reason=f"torus sample count must be a positive integer, got {q}")
    return TorusGrid(int(q))


def fourier_coefficients(samples: np.ndarray, n_max: int) -> np.ndarray:
    """Trigonometric coefficients c_n = integral_0^1 s(x) exp(-2*pi*i*n*x) dx for -n_max <= n <= n_max.

    The samples are taken on torus_grid(len(samples)).
    """
    q = len(samples)
    if 2 * n_max >= q:
        raise GridError(reason=f"{q} torus samples cannot resolve coefficients up to {n_max}")
    spectrum = np.fft.fft(samples) / q
    return np.array([spectrum[n % q] for n in range(-n_max, n_max + 1)])


@dataclass(frozen=True)
class GridSpec:
    axes: Tuple[AxisGrid, ...]
    role: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise GridError(reason=f"unknown role {self.role}")
        if not self.axes:
            raise GridError(reason="a grid needs at least one axis")
        n_axes = len(self.axes)
        if self.role == "line" and n_axes != 1:
            raise GridError(reason="a line grid has exactly one axis")
        if self.role == "phase-plane" and n_axes % 2:
            raise GridError(reason="a phase-plane grid pairs x-axes with y-axes")
        if self.role == "group" and n_axes % 2 != 1:
            raise GridError(reason="a group grid has 2n+1 axes")

    @property
    def dimension(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a.h for a in self.axes]))


def _int_option(option: str) -> int:
    return config.getint("twistframe", option, section="grid")


def phase_plane_axis(L: Optional[float] = None, q: Optional[int] = None, midpoint: Optional[bool] = None) -> AxisGrid:
    return make_grid(
        L if L is not None else _int_option("phase_plane_half_width"),
        q if q is not None else _int_option("phase_plane_samples_per_unit"),
        midpoint if midpoint is not None else config.getboolean("twistframe", "midpoint", section="grid"),
    )


def t_axis(L: Optional[float] = None, q: Optional[int] = None, midpoint: Optional[bool] = None) -> AxisGrid:
    return make_grid(
        L if L is not None else _int_option("group_t_half_width"),
        q if q is not None else _int_option("group_t_samples_per_unit"),
        midpoint if midpoint is not None else config.getboolean("twistframe", "midpoint", section="grid"),
    )


def line_spec(axis: Optional[AxisGrid] = None) -> GridSpec:
    return GridSpec((axis or phase_plane_axis(),), "line")


def phase_plane_spec(axis: Optional[AxisGrid] = None, y_axis: Optional[AxisGrid] = None) -> GridSpec:
    x = axis or phase_plane_axis()
    return GridSpec((x, y_axis or x), "phase-plane")


def group_spec(
    axis: Optional[AxisGrid] = None, y_axis: Optional[AxisGrid] = None, t: Optional[AxisGrid] = None
) -> GridSpec:
    x = axis or phase_plane_axis()
    return GridSpec((x, y_axis or x, t or t_axis()), "group")


@dataclass(frozen=True)
class Factor1D:
    """One-dimensional analytic factor.

    kind/params select the base function:
      indicator (a, b)    chi_[a,b)
      gaussian (alpha,)   exp(-alpha x^2)
      sinc ()             sin(pi x)/(pi x)
      abs_exp ()          exp(-|x|)
      bump (a, b)         exp(-1/((x-a)(b-x))) on (a, b)
      step_decay (n_max,) sum_{n<=n_max} chi_[2n,2n+1)/(n+1)
    """

    kind: str
    params: Tuple[float, ...] = ()
    shift: float = 0.0
    modulation: float = 0.0
    turns: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown factor kind {self.kind}")

    @property
    def is_plain(self) -> bool:
        return self.shift == 0.0 and self.modulation == 0.0 and self.turns == 0.0

    @property
    def has_analytic_ft(self) -> bool:
        return self.kind in ANALYTIC_KINDS

    @property
    def base(self) -> "Factor1D":
        return Factor1D(self.kind, self.params)

    # transformations ------------------------------------------------------

    def shifted(self, s: float) -> "Factor1D":
        """x -> self(x - s)"""
        return replace(self, shift=self.shift + s, turns=float(np.mod(self.turns - self.modulation * s, 1.0)))

    def modulated(self, nu: float) -> "Factor1D":
        """x -> exp(2*pi*i*nu*x) * self(x)"""
        return replace(self, modulation=self.modulation + nu)

    # evaluation -----------------------------------------------------------

    def _base_values(self, x: np.ndarray) -> np.ndarray:
        kind, p = self.kind, self.params
        if kind == "indicator":
            return ((x >= p[0]) & (x < p[1])).astype(float)
        if kind == "gaussian":
            return np.exp(-p[0] * x * x)
        if kind == "sinc":
            return np.sinc(x)
        if kind == "abs_exp":
            return np.exp(-np.abs(x))
        if kind == "bump":
            a, b = p
            inside = (x > a) & (x < b)
            safe = np.where(inside, x, 0.5 * (a + b))
            return np.where(inside, np.exp(-1.0 / ((safe - a) * (b - safe))), 0.0)
        # step_decay
        out = np.zeros_like(x, dtype=float)
        for n in range(int(p[0]) + 1):
            out = out + ((x >= 2 * n) & (x < 2 * n + 1)) / (n + 1.0)
        return out

    def evaluate(self, x: Union[float, np.ndarray]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        values = self._base_values(x - self.shift).astype(complex)
        if self.modulation != 0.0:
            values = values * unit_phase(2.0 * self.modulation * x)
        if self.turns != 0.0:
            values = values * unit_phase(2.0 * self.turns)
        return values

    # support and decay ----------------------------------------------------

    @property
    def support(self) -> Optional[Tuple[float, float]]:
        """Closed support interval, or None when unbounded."""
        kind, p = self.kind, self.params
        if kind in ("indicator", "bump"):
            return (p[0] + self.shift, p[1] + self.shift)
        if kind == "step_decay":
            return (self.shift, 2 * int(p[0]) + 1 + self.shift)
        return None

    def tail_mass(self, L: float) -> float:
        """Estimate of the squared L2 mass outside [-L, L)."""
        support = self.support
        if support is not None:
            a, b = support
            if a >= -L and b <= L:
                return 0.0
            grid = make_grid(max(abs(a), abs(b)) + 1.0, 256, midpoint=True)
            x = grid.points()
            mass = np.abs(self.evaluate(x)) ** 2
            return float(np.sum(mass[(x < -L) | (x >= L)]) * grid.h)
        left, right = -L - self.shift, L - self.shift
        kind, p = self.kind, self.params
        if kind == "gaussian":
            r = math.sqrt(2.0 * p[0])
            return float(0.5 * math.sqrt(math.pi / (2.0 * p[0])) * (special.erfc(-r * left) + special.erfc(r * right)))
        if kind == "abs_exp":
            return 0.5 * (math.exp(2.0 * min(left, 0.0)) + math.exp(-2.0 * max(right, 0.0)))
        # sinc: integral of 1/(pi x)^2 bounds the squared tail
        return 1.0 / (math.pi**2 * max(-left, 1.0)) + 1.0 / (math.pi**2 * max(right, 1.0))

    def step_tail_mass(self) -> float:
        """Squared mass of the steps dropped by the step_decay truncation."""
        if self.kind != "step_decay":
            return 0.0
        kept = sum(1.0 / (n + 1.0) ** 2 for n in range(int(self.params[0]) + 1))
        return math.pi**2 / 6.0 - kept

    def ft_decay_constant(self) -> Tuple[int, float]:
        """(p, C) with |F(w)|^2 <= C / |w|^p for large |w|; p = 0 means faster than any power."""
        kind, p = self.kind, self.params
        if kind == "indicator":
            return 2, 1.0 / math.pi**2
        if kind == "step_decay":
            total = sum(1.0 / (n + 1.0) for n in range(int(p[0]) + 1))
            return 2, (total / math.pi) ** 2
        if kind == "abs_exp":
            return 4, 1.0 / (4.0 * math.pi**4)
        return 0, 0.0

    def bandwidth(self, tol: float = NEGLIGIBLE) -> float:
        """Frequency radius beyond which |F| < tol * max |F| (math.inf for algebraic decay)."""
        return _bandwidth(self.base, tol) + abs(self.modulation)

    # Fourier transform ----------------------------------------------------

    def _base_ft(self, w: np.ndarray) -> np.ndarray:
        kind, p = self.kind, self.params
        if kind == "indicator":
            a, b = p
            return (b - a) * unit_phase(-w * (a + b)) * np.sinc(w * (b - a))
        if kind == "gaussian":
            alpha = p[0]
            return (math.sqrt(math.pi / alpha) * np.exp(-(math.pi**2) * w * w / alpha)).astype(complex)
        if kind == "sinc":
            aw = np.abs(w)
            return np.where(aw < 0.5, 1.0, np.where(aw == 0.5, 0.5, 0.0)).astype(complex)
        if kind == "abs_exp":
            return (2.0 / (1.0 + 4.0 * math.pi**2 * w * w)).astype(complex)
        if kind == "step_decay":
            out = np.zeros_like(w, dtype=complex)
            for n in range(int(p[0]) + 1):
                out = out + unit_phase(-w * (4 * n + 1)) * np.sinc(w) / (n + 1.0)
            return out
        return _support_quadrature_ft(self.base, w)

    def fourier(self, w: Union[float, np.ndarray]) -> np.ndarray:
        """Closed-form (or support-quadrature) Fourier transform at frequencies w."""
        w = np.asarray(w, dtype=float)
        nu = w - self.modulation
        values = self._base_ft(nu)
        if self.shift != 0.0:
            values = values * unit_phase(-2.0 * self.shift * nu)
        if self.turns != 0.0:
            values = values * unit_phase(2.0 * self.turns)
        return values

    # correlation ----------------------------------------------------------

    def correlate(self, other: "Factor1D", tau: Union[float, np.ndarray]) -> np.ndarray:
        """C(tau) = integral self(t) * conj(other(t + tau)) dt."""
        tau = np.asarray(tau, dtype=float)
        if self.is_plain and other.is_plain and self.kind == other.kind:
            if self.kind == "gaussian":
                a, b = self.params[0], other.params[0]
                return (math.sqrt(math.pi / (a + b)) * np.exp(-a * b * tau * tau / (a + b))).astype(complex)
            if self.kind == "sinc":
                return np.sinc(tau).astype(complex)
            if self.kind == "abs_exp":
                at = np.abs(tau)
                return ((1.0 + at) * np.exp(-at)).astype(complex)
        return _quadrature_correlation(self, other, tau)


def indicator(a: float, b: float) -> Factor1D:
    return Factor1D("indicator", (float(a), float(b)))


def gaussian(alpha: float) -> Factor1D:
    return Factor1D("gaussian", (float(alpha),))


def sinc() -> Factor1D:
    return Factor1D("sinc")


def abs_exp() -> Factor1D:
    return Factor1D("abs_exp")


def bump(a: float, b: float) -> Factor1D:
    return Factor1D("bump", (float(a), float(b)))


def step_decay(n_max: int) -> Factor1D:
    return Factor1D("step_decay", (float(int(n_max)),))


def step_decay_for_box(L: float) -> Factor1D:
    """step_decay keeping every step [2n, 2n+1) that lies inside [-L, L)."""
    return step_decay(max(0, int(math.floor((L - 1) / 2.0))))


def _support_quadrature_ft(factor: Factor1D, w: np.ndarray) -> np.ndarray:
    """Midpoint quadrature on the factor's support, evaluated once per distinct frequency."""
    support = factor.support
    if support is None:
        grid = phase_plane_axis(midpoint=True)
        x = grid.points()
        h = grid.h
    else:
        a, b = support
        h = (b - a) / _SUPPORT_QUADRATURE_POINTS
        x = a + h * (np.arange(_SUPPORT_QUADRATURE_POINTS) + 0.5)
    fx = factor.evaluate(x)
    flat = w.ravel()
    unique, inverse = np.unique(flat, return_inverse=True)
    out = np.empty(unique.shape, dtype=complex)
    for start in range(0, len(unique), _FT_CHUNK):
        chunk = unique[start : start + _FT_CHUNK]
        out[start : start + _FT_CHUNK] = np.exp(-2j * np.pi * np.outer(chunk, x)) @ fx * h
    return out[inverse].reshape(w.shape)


@functools.lru_cache(maxsize=256)
def _bandwidth(factor: Factor1D, tol: float) -> float:
    kind, p = factor.kind, factor.params
    if kind == "gaussian":
        return math.sqrt(p[0] * math.log(1.0 / tol)) / math.pi
    if kind == "sinc":
        return 0.5
    if kind in ("indicator", "step_decay", "abs_exp"):
        return math.inf
    # bump: scan powers of two until the transform has decayed
    peak = float(np.abs(factor.fourier(0.0)))
    w = 1.0
    limit = config.getfloat("twistframe", "frequency_radius", section="weyl")
    while w < limit:
        probe = np.abs(factor.fourier(np.array([w, -w]))).max()
        if probe < tol * peak:
            return w
        w *= 2.0
    return math.inf


def _quadrature_correlation(first: Factor1D, second: Factor1D, tau: np.ndarray) -> np.ndarray:
    grid = make_grid(16, 64, midpoint=True)
    t = grid.points()
    ft = first.evaluate(t)
    flat = tau.ravel()
    unique, inverse = np.unique(flat, return_inverse=True)
    out = np.empty(unique.shape, dtype=complex)
    for i, shift in enumerate(unique):
        out[i] = np.sum(ft * np.conj(second.evaluate(t + shift))) * grid.h
    return out[inverse].reshape(tau.shape)


@dataclass(frozen=True)
class SeparableTerm:
    coefficient: complex
    factors: Tuple[Factor1D, ...]

    def sample(self, spec: GridSpec) -> np.ndarray:
        if len(self.factors) != spec.dimension:
            raise DimensionError(expected=spec.dimension, got=len(self.factors))
        arrays = [f.evaluate(a.points()) for f, a in zip(self.factors, spec.axes)]
        return self.coefficient * functools.reduce(np.multiply.outer, arrays)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    spec: GridSpec
    values: np.ndarray
    terms: Tuple[SeparableTerm, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.values.shape != self.spec.shape:
            raise GridError(reason=f"values of shape {self.values.shape} do not match the grid {self.spec.shape}")

    @property
    def factors(self) -> Optional[Tuple[Factor1D, ...]]:
        if len(self.terms) == 1 and self.terms[0].coefficient == 1:
            return self.terms[0].factors
        return None

    @property
    def is_separable_sum(self) -> bool:
        return bool(self.terms)

    def norm2(self) -> float:
        return float(inner_product(self, self).real)

    def scaled(self, c: complex) -> "SampledFunction":
        terms = tuple(SeparableTerm(c * t.coefficient, t.factors) for t in self.terms)
        return SampledFunction(self.spec, c * self.values, terms)

    def boundary_mass(self, width: int = 1) -> float:
        """Squared mass of the outermost `width` samples along every axis, relative to the total."""
        total = float(np.sum(np.abs(self.values) ** 2))
        if total == 0.0:
            return 0.0
        inner = np.abs(self.values) ** 2
        for axis in range(self.values.ndim):
            inner = np.delete(inner, list(range(width)) + list(range(-width, 0)), axis=axis)
        return (total - float(np.sum(inner))) / total


def combine(functions: Sequence[SampledFunction], coefficients: Sequence[complex]) -> SampledFunction:
    """Linear combination sum_i c_i f_i; analytic terms are kept when every input has them."""
    if not functions:
        raise ValueError("nothing to combine")
    spec = functions[0].spec
    values = np.zeros(spec.shape, dtype=complex)
    terms: List[SeparableTerm] = []
    keep_terms = all(f.terms for f in functions)
    for f, c in zip(functions, coefficients):
        if f.spec != spec:
            raise GridError(reason="cannot combine functions sampled on different grids")
        values = values + c * f.values
        if keep_terms:
            terms.extend(SeparableTerm(c * t.coefficient, t.factors) for t in f.terms)
    return SampledFunction(spec, values, tuple(terms))


def sample_terms(terms: Iterable[SeparableTerm], spec: GridSpec) -> SampledFunction:
    terms = tuple(terms)
    values = np.zeros(spec.shape, dtype=complex)
    for term in terms:
        values = values + term.sample(spec)
    return SampledFunction(spec, values, terms)


def sample_separable(factors: Sequence[Factor1D], spec: GridSpec) -> SampledFunction:
    if len(factors) != spec.dimension:
        raise DimensionError(expected=spec.dimension, got=len(factors))
    return sample_terms((SeparableTerm(1.0, tuple(factors)),), spec)


def inner_product(f: SampledFunction, g: SampledFunction) -> complex:
    if f.spec != g.spec:
        raise GridError(reason="inner product of functions on different grids")
    return complex(np.vdot(g.values, f.values) * f.spec.cell_volume)


def fourier_1d(
    f: Union[Factor1D, SampledFunction], omega: Union[float, np.ndarray], log_level: int = logging.WARNING
) -> Union[complex, np.ndarray]:
    """Approximate integral f(x) exp(-2*pi*i*x*omega) dx.

    Factors and separable 1-D functions use their analytic transform; plain
    samples use the grid quadrature and warn when the box truncates mass.
    """
    w = np.asarray(omega, dtype=float)
    if isinstance(f, Factor1D):
        out = f.fourier(w)
    else:
        if f.spec.dimension != 1:
            raise DimensionError(expected=1, got=f.spec.dimension)
        if f.terms:
            out = np.zeros(w.shape, dtype=complex)
            for term in f.terms:
                out = out + term.coefficient * term.factors[0].fourier(w)
        else:
            twistframe_logging.log_truncation(
                logger, log_level, "Fourier transform of a function truncated by its box", f.boundary_mass(), NEGLIGIBLE
            )
            axis = f.spec.axes[0]
            x = axis.points()
            flat = w.ravel()
            out = (np.exp(-2j * np.pi * np.outer(flat, x)) @ f.values * axis.h).reshape(w.shape)
    if out.ndim == 0:
        return complex(out)
    return out


def quadrature_ft(factor: Factor1D, omega: np.ndarray, axis: Optional[AxisGrid] = None) -> Tuple[np.ndarray, float]:
    """Grid quadrature of the factor's transform together with the box tail bound."""
    axis = axis or phase_plane_axis()
    sampled = sample_separable([factor], line_spec(axis))
    values = fourier_1d(sampled, omega, log_level=logging.DEBUG)
    return np.asarray(values), math.sqrt(2 * axis.half_width * factor.tail_mass(axis.half_width))


def term_norms(terms: Sequence[SeparableTerm], axis: AxisGrid, index: int) -> Dict[int, float]:
    """Squared quadrature norms of the index-th factor of each term on an axis."""
    x = axis.points()
    return {i: float(np.sum(np.abs(t.factors[index].evaluate(x)) ** 2) * axis.h) for i, t in enumerate(terms)}

"""Left translates on the Heisenberg group and their phase-plane shadows.

Group law: (x, y, t)(x', y', t') = (x + x', y + y', t + t' + (x'y - y'x)/2).
The lattice elements are (2k, l, m), written HLatticeIndex(k, l, m), and

    L_(2k,l,m) phi(x, y, t) = phi(x - 2k, y - l, t - m + k*y - l*x/2).

Functions built from separable products f (x) g (x) h are kept as lists of
HTerm, each a coefficient times a left translate of one product. All the
bracket quantities are then evaluated factor by factor: t-integrals through
Factor1D.correlate and partial Fourier transforms through Factor1D.fourier.
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from twistframe import config, grid, spectral, twisted, twistframe_logging, weyl
from twistframe.common import parallel
from twistframe.common.exception import GridError, InputError, LambdaError, RefusalError, UnknownExampleError
from twistframe.grid import AxisGrid, Factor1D, GridSpec, SampledFunction, SeparableTerm
from twistframe.sections import GramSection, hermitian_from_upper
from twistframe.weyl import KernelMatrix

logger = twistframe_logging.init_logging("heisenberg")

ROUTES = ("reduced", "kernel-direct")


@dataclass(frozen=True, order=True)
class HLatticeIndex:
    k: int
    l: int
    m: int

    def __post_init__(self) -> None:
        for name in ("k", "l", "m"):
            value = getattr(self, name)
            if int(value) != value:
                raise GridError(reason=f"lattice coordinates must be integers, got {name}={value}")
            object.__setattr__(self, name, int(value))

    def as_group_element(self) -> Tuple[int, int, int]:
        return (2 * self.k, self.l, self.m)

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.k, self.l, self.m)


IDENTITY = HLatticeIndex(0, 0, 0)


def group_law(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float, float]:
    x, y, t = a
    x2, y2, t2 = b
    return (x + x2, y + y2, t + t2 + 0.5 * (x2 * y - y2 * x))


def group_product(a: HLatticeIndex, b: HLatticeIndex) -> HLatticeIndex:
    """a . b on the lattice; the centre picks up k_b * l_a - k_a * l_b."""
    return HLatticeIndex(a.k + b.k, a.l + b.l, a.m + b.m + b.k * a.l - a.k * b.l)


def group_inverse(a: HLatticeIndex) -> HLatticeIndex:
    return HLatticeIndex(-a.k, -a.l, -a.m)


def h_window(radius: int) -> List[HLatticeIndex]:
    r = range(-radius, radius + 1)
    return [HLatticeIndex(k, l, m) for k in r for l in r for m in r]


@dataclass(frozen=True)
class HTerm:
    """coefficient * f(x - 2k) g(y - l) h(t - m + k*y - l*x/2)"""

    coefficient: complex
    factors: Tuple[Factor1D, Factor1D, Factor1D]
    index: HLatticeIndex = IDENTITY

    @property
    def shape(self) -> Tuple[Factor1D, Factor1D, Factor1D, int, int]:
        return (*self.factors, self.index.k, self.index.l)

    def evaluate(self, x: np.ndarray, y: np.ndarray, t: np.ndarray) -> np.ndarray:
        f, g, h = self.factors
        k, l, m = self.index.as_tuple()
        return self.coefficient * f.evaluate(x - 2 * k) * g.evaluate(y - l) * h.evaluate(t - m + k * y - 0.5 * l * x)


@dataclass(frozen=True, eq=False)
class HFunction:
    spec: GridSpec
    terms: Tuple[HTerm, ...] = field(default=())
    values: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.spec.role != "group" or self.spec.dimension != 3:
            raise GridError(reason="Heisenberg functions live on three-axis group grids")
        if not self.terms and self.values is None:
            raise InputError(reason="a Heisenberg function needs terms or samples")
        if self.values is not None and self.values.shape != self.spec.shape:
            raise GridError(reason="samples do not match the group grid")

    @property
    def phase_plane(self) -> GridSpec:
        return grid.phase_plane_spec(self.spec.axes[0], self.spec.axes[1])

    def samples(self) -> np.ndarray:
        """Dense samples on the group grid; only sensible for small grids."""
        if self.values is not None:
            return self.values
        x, y, t = (a.points() for a in self.spec.axes)
        X, Y, T = np.meshgrid(x, y, t, indexing="ij")
        out = np.zeros(self.spec.shape, dtype=complex)
        for term in self.terms:
            out = out + term.evaluate(X, Y, T)
        return out

    def scaled(self, c: complex) -> "HFunction":
        terms = tuple(HTerm(c * t.coefficient, t.factors, t.index) for t in self.terms)
        return HFunction(self.spec, terms, None if self.values is None else c * self.values)

    def norm2(self) -> float:
        return h_inner_product(self, self).real


def separable(factors: Sequence[Factor1D], spec: Optional[GridSpec] = None) -> HFunction:
    if len(factors) != 3:
        raise InputError(reason=f"a Heisenberg product has three factors, got {len(factors)}")
    return HFunction(spec or grid.group_spec(), (HTerm(1.0, (factors[0], factors[1], factors[2])),))


_H_CHOICES = {"gaussian": lambda: grid.gaussian(1.0), "abs_exp": grid.abs_exp, "sinc": grid.sinc}


def _factor_param(params: Mapping[str, Any], name: str, default: Factor1D) -> Factor1D:
    value = params.get(name)
    if value is None:
        return default
    if isinstance(value, Factor1D):
        return value
    if value not in _H_CHOICES:
        raise InputError(reason=f"unknown factor {value!r} for {name}")
    return _H_CHOICES[value]()


def example_factory(
    example_id: int, params: Optional[Mapping[str, Any]] = None, spec: Optional[GridSpec] = None
) -> HFunction:
    """Generators of the six worked examples.

    1: chi_[0,2] (x) chi_[0,1] (x) h, h = exp(-t^2) unless given
    2: the same with h = exp(-t^2)
    3: the same with h = exp(-|t|)
    4: bump(0,2) (x) bump(0,1) (x) h
    5: chi_[0,3] (x) chi_[0,1] (x) sinc
    6: exp(-|x|) (x) step_decay (x) sinc
    """
    params = params or {}
    spec = spec or grid.group_spec()
    gaussian_h = grid.gaussian(1.0)
    if example_id in (1, 2, 3):
        default_h = grid.abs_exp() if example_id == 3 else gaussian_h
        h = _factor_param(params, "h", default_h) if example_id == 1 else default_h
        factors = (grid.indicator(0, 2), grid.indicator(0, 1), h)
    elif example_id == 4:
        factors = (grid.bump(0, 2), grid.bump(0, 1), _factor_param(params, "h", gaussian_h))
    elif example_id == 5:
        factors = (grid.indicator(0, 3), grid.indicator(0, 1), _factor_param(params, "h", grid.sinc()))
    elif example_id == 6:
        steps = grid.step_decay_for_box(spec.axes[1].half_width)
        logger.info(
            "Example 6 keeps %d steps; truncated squared mass %.3e", int(steps.params[0]) + 1, steps.step_tail_mass()
        )
        factors = (grid.abs_exp(), steps, _factor_param(params, "h", grid.sinc()))
    else:
        raise UnknownExampleError(example_id=example_id)
    return separable(factors, spec)


def _fractional_t_shift(values: np.ndarray, t_axis: AxisGrid, shift: np.ndarray) -> np.ndarray:
    """values(x, y, t - shift(x, y)) by a Fourier phase along t (periodic in the t-box)."""
    frequencies = np.fft.fftfreq(t_axis.count, d=t_axis.h)
    spectrum = np.fft.fft(values, axis=2)
    return np.fft.ifft(spectrum * np.exp(-2j * np.pi * shift[:, :, None] * frequencies[None, None, :]), axis=2)


def left_translate(phi: HFunction, idx: HLatticeIndex, interpolate: bool = False) -> HFunction:
    """L_(2k,l,m) phi; separable terms are translated exactly through their lattice index."""
    if idx == IDENTITY:
        return phi
    if phi.terms:
        terms = tuple(HTerm(t.coefficient, t.factors, group_product(idx, t.index)) for t in phi.terms)
        return HFunction(phi.spec, terms)
    if not interpolate:
        raise InputError(reason="left translation of sampled functions needs interpolation along t")

    x_axis, y_axis, t_axis = phi.spec.axes
    out = np.zeros_like(phi.values)
    sx, sy = 2 * idx.k * x_axis.samples_per_unit, idx.l * y_axis.samples_per_unit
    nx, ny = x_axis.count, y_axis.count
    if abs(sx) < nx and abs(sy) < ny:
        src = (slice(max(0, -sx), nx - max(0, sx)), slice(max(0, -sy), ny - max(0, sy)))
        dst = (slice(max(0, sx), nx - max(0, -sx)), slice(max(0, sy), ny - max(0, -sy)))
        out[dst] = phi.values[src]
    shift = idx.m - idx.k * y_axis.points()[None, :] + 0.5 * idx.l * x_axis.points()[:, None]
    logger.warning("Left translate by %s interpolated along t", idx.as_tuple())
    return HFunction(phi.spec, (), _fractional_t_shift(out, t_axis, shift))


def _merge(terms: Iterable[SeparableTerm]) -> Tuple[SeparableTerm, ...]:
    merged: Dict[Tuple[Factor1D, ...], complex] = {}
    for term in terms:
        merged[term.factors] = merged.get(term.factors, 0j) + term.coefficient
    return tuple(SeparableTerm(c, factors) for factors, c in merged.items() if c != 0)


def partial_ft_terms(phi: HFunction, lam: float) -> Tuple[SeparableTerm, ...]:
    out = []
    for term in phi.terms:
        f, g, h = term.factors
        k, l, m = term.index.as_tuple()
        coefficient = term.coefficient * complex(grid.unit_phase(2.0 * lam * m)) * complex(h.fourier(-lam))
        if coefficient == 0:
            continue
        factors = (f.shifted(2 * k).modulated(0.5 * lam * l), g.shifted(l).modulated(-lam * k))
        out.append(SeparableTerm(coefficient, factors))
    return _merge(out)


def partial_ft(phi: HFunction, lam: float) -> SampledFunction:
    """phi^lam(x, y) = integral phi(x, y, t) exp(2*pi*i*lam*t) dt."""
    spec = phi.phase_plane
    if phi.terms:
        return grid.sample_terms(partial_ft_terms(phi, lam), spec)
    t_axis = phi.spec.axes[2]
    t = t_axis.points()
    edge = np.abs(phi.values[:, :, [0, -1]]).max()
    peak = np.abs(phi.values).max()
    if peak > 0:
        twistframe_logging.log_truncation(
            logger, logging.WARNING, "t-transform of a function with heavy tails in t", edge / peak, grid.NEGLIGIBLE
        )
    values = phi.values @ grid.unit_phase(2.0 * lam * t) * t_axis.h
    return SampledFunction(spec, values)


def plane_inner(F: SampledFunction, G: SampledFunction) -> complex:
    """Phase-plane inner product; separable sums are paired factor by factor."""
    if F.spec != G.spec:
        raise GridError(reason="inner product of functions on different grids")
    if not (F.terms and G.terms):
        return grid.inner_product(F, G)
    return terms_inner(F.terms, G.terms, F.spec)


def terms_inner(first: Sequence[SeparableTerm], second: Sequence[SeparableTerm], spec: GridSpec) -> complex:
    x_axis, y_axis = spec.axes
    total = 0j
    for a in first:
        for b in second:
            px = _overlap(a.factors[0], 0.0, b.factors[0], 0.0, x_axis)
            if not px.any():
                continue
            py = _overlap(a.factors[1], 0.0, b.factors[1], 0.0, y_axis)
            total += a.coefficient * np.conj(b.coefficient) * np.sum(px) * np.sum(py) * x_axis.h * y_axis.h
    return complex(total)


def group_fourier_kernel(phi: HFunction, lam: float, threads: Optional[int] = None) -> KernelMatrix:
    if lam == 0:
        raise LambdaError(lam=lam)
    return weyl.weyl_kernel(partial_ft(phi, lam), lam, threads=threads)


@functools.lru_cache(maxsize=8192)
def _overlap(first: Factor1D, a: float, second: Factor1D, b: float, axis: AxisGrid) -> np.ndarray:
    """Samples of first(x - a) * conj(second(x - b)) on an axis."""
    x = axis.points()
    values = first.evaluate(x - a) * np.conj(second.evaluate(x - b))
    values.setflags(write=False)
    return values


def _term_inner(a: HTerm, b: HTerm, spec: GridSpec) -> complex:
    x_axis, y_axis, _ = spec.axes
    (f1, g1, h1), (f2, g2, h2) = a.factors, b.factors
    k1, l1, m1 = a.index.as_tuple()
    k2, l2, m2 = b.index.as_tuple()
    px = _overlap(f1, 2.0 * k1, f2, 2.0 * k2, x_axis)
    if not px.any():
        return 0j
    py = _overlap(g1, float(l1), g2, float(l2), y_axis)
    if not py.any():
        return 0j
    scale = a.coefficient * np.conj(b.coefficient) * x_axis.h * y_axis.h
    if k1 == k2 and l1 == l2:
        lag = complex(h1.correlate(h2, float(m1 - m2)))
        return complex(scale * lag * np.sum(px) * np.sum(py))
    rows, cols = np.flatnonzero(px), np.flatnonzero(py)
    x, y = x_axis.points()[rows], y_axis.points()[cols]
    tau = (m1 - m2) + (k2 - k1) * y[None, :] - 0.5 * (l2 - l1) * x[:, None]
    lag = h1.correlate(h2, tau)
    return complex(scale * np.sum(px[rows][:, None] * py[cols][None, :] * lag))


def h_inner_product(phi: HFunction, psi: HFunction) -> complex:
    """Inner product on the Heisenberg group.

    Separable terms: integral over (x, y) of the two (x, y)-profiles times the
    t-correlation of the h factors at the lag between the t-arguments.
    """
    if phi.spec != psi.spec:
        raise GridError(reason="inner product of functions on different grids")
    if phi.terms and psi.terms:
        total = 0j
        for a in phi.terms:
            for b in psi.terms:
                total += _term_inner(a, b, phi.spec)
        return total
    return complex(np.vdot(psi.samples(), phi.samples()) * phi.spec.cell_volume)


@dataclass(frozen=True, eq=False)
class GSamples:
    k: int
    l: int
    lambdas: np.ndarray
    values: np.ndarray
    R: int
    tail_bound: float
    route: str

    def sup(self) -> float:
        return float(np.abs(self.values).max())

    def inf(self) -> float:
        return float(np.abs(self.values).min())

    def mean(self) -> complex:
        return complex(np.mean(self.values))

    def metadata(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "l": self.l,
            "lambda_samples": len(self.lambdas),
            "r_truncation": self.R,
            "tail_bound": self.tail_bound,
            "route": self.route,
        }


def lambda_grid(samples: Optional[int] = None) -> np.ndarray:
    """Midpoints of a uniform partition of (0, 1]."""
    n = samples or config.getint("twistframe", "lambda_samples", section="heisenberg")
    return (np.arange(n) + 0.5) / n


_VERIFIED_SHAPES: Dict[Tuple[Any, ...], bool] = {}


def scaling_plancherel_table(
    phi: HFunction, lambdas: Sequence[float] = (0.25, 0.5, 1.0), threads: Optional[int] = None
) -> List[Dict[str, float]]:
    """||K^lam||_HS^2 * |lam| against ||phi^lam||^2 at each lam."""
    rows = []
    for lam in lambdas:
        F = partial_ft(phi, lam)
        if not (F.terms or np.any(F.values)):
            rows.append({"lambda": float(lam), "kernel": 0.0, "plane": 0.0, "relative_error": 0.0})
            continue
        K = weyl.weyl_kernel(F, lam)
        lhs = weyl.hs_inner(K, K, threads=threads).real * abs(lam)
        rhs = plane_inner(F, F).real
        error = abs(lhs - rhs) / rhs if rhs > 1e-300 else abs(lhs)
        rows.append({"lambda": float(lam), "kernel": lhs, "plane": rhs, "relative_error": error})
    return rows


def verify_scaling_plancherel(phi: HFunction, tol: float = 1e-4, threads: Optional[int] = None) -> bool:
    """Check the fiberwise Plancherel identity once per distinct term shape."""
    if not phi.terms:
        return all(row["relative_error"] <= tol for row in scaling_plancherel_table(phi, threads=threads))
    shapes = sorted({t.shape for t in phi.terms}, key=repr)
    for shape in shapes:
        key = (shape, tol)
        if key not in _VERIFIED_SHAPES:
            f, g, h, k, l = shape
            single = HFunction(phi.spec, (HTerm(1.0, (f, g, h), HLatticeIndex(k, l, 0)),))
            table = scaling_plancherel_table(single, threads=threads)
            _VERIFIED_SHAPES[key] = all(row["relative_error"] <= tol for row in table)
            logger.debug("scaling Plancherel check for %r: %s", shape, table)
        if not _VERIFIED_SHAPES[key]:
            return False
    return True


def _g_tail(phi: HFunction, R: int) -> float:
    if not phi.terms:
        return 0.0
    x_axis, y_axis, _ = phi.spec.axes
    beyond = np.concatenate([np.arange(R + 1, R + 65), -np.arange(R + 1, R + 65)]).astype(float)
    amplitude = 0.0
    for term in phi.terms:
        f, g, h = term.factors
        norm_f = float(np.sum(np.abs(f.evaluate(x_axis.points())) ** 2) * x_axis.h)
        norm_g = float(np.sum(np.abs(g.evaluate(y_axis.points())) ** 2) * y_axis.h)
        mass = float(np.sum(np.abs(h.fourier(beyond)) ** 2))
        amplitude += abs(term.coefficient) * math.sqrt(norm_f * norm_g * mass)
    return amplitude**2


def _negligible_frequency(phi: HFunction, nu: float) -> bool:
    if not phi.terms:
        return False
    t_factors = [t.factors[2] for t in phi.terms]
    return all(abs(h.fourier(-nu)) < grid.NEGLIGIBLE * max(abs(h.fourier(0.0)), 1e-300) for h in t_factors)


def G_function(
    phi: HFunction,
    kl: Tuple[int, int] = (0, 0),
    lambdas: Optional[Sequence[float]] = None,
    R: Optional[int] = None,
    route: str = "reduced",
    prerequisite: Optional[bool] = None,
    threads: Optional[int] = None,
) -> GSamples:
    """G_(k,l)(lam) = sum_|r|<=R <phi^(lam+r), (L_(2k,l,0) phi)^(lam+r)> on a lambda grid in (0, 1].

    The reduced route pairs the partial transforms on the phase plane; it rests
    on the fiberwise Plancherel identity, which is checked first. The
    kernel-direct route pairs the Weyl kernels and weights by |lam + r|.
    """
    if route not in ROUTES:
        raise InputError(reason=f"unknown bracket route {route}")
    lams = lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float)
    if np.any(lams <= 0) or np.any(lams > 1):
        raise InputError(reason="bracket samples are taken in (0, 1]")
    if R is None:
        R = config.getint("twistframe", "r_truncation", section="heisenberg")
    k, l = kl
    translate = left_translate(phi, HLatticeIndex(k, l, 0), interpolate=not phi.terms)

    if route == "reduced":
        verified = verify_scaling_plancherel(phi, threads=threads) if prerequisite is None else prerequisite
        if not verified:
            raise RefusalError(
                reason="the fiberwise Plancherel identity could not be verified for this generator",
                diagnostic={"table": scaling_plancherel_table(phi, threads=threads)},
            )

    order = spectral.m_order(R)
    plane = phi.phase_plane

    def sample(lam: float) -> complex:
        total = 0j
        for r in order:
            nu = lam + r
            if _negligible_frequency(phi, nu):
                continue
            # the kernel route has no lambda = 0 fiber; pair the transforms there
            direct = route == "kernel-direct" and nu != 0
            if not direct and phi.terms:
                total += terms_inner(partial_ft_terms(phi, nu), partial_ft_terms(translate, nu), plane)
            elif not direct:
                total += plane_inner(partial_ft(phi, nu), partial_ft(translate, nu))
            else:
                total += weyl.hs_inner(group_fourier_kernel(phi, nu), group_fourier_kernel(translate, nu)) * abs(nu)
        return total

    values = np.array(parallel.ordered_map(sample, list(lams), threads), dtype=complex)
    if (k, l) == (0, 0):
        values = values.real.astype(complex)
    return GSamples(k, l, lams, values, R, _g_tail(phi, R), route)


@dataclass(frozen=True)
class CoefficientCheck:
    via_bracket: complex
    via_inner: complex

    @property
    def discrepancy(self) -> float:
        return abs(self.via_bracket - self.via_inner)


def G_fourier_coeff(phi: HFunction, kl: Tuple[int, int], m: int, G: Optional[GSamples] = None) -> CoefficientCheck:
    """integral_0^1 G_(k,l)(lam) exp(-2*pi*i*m*lam) d lam against <phi, L_(2k,l,m) phi>."""
    k, l = kl
    if G is None:
        G = G_function(phi, kl)
    elif (G.k, G.l) != (k, l):
        raise InputError(reason=f"bracket samples belong to {(G.k, G.l)}, not {kl}")
    via_bracket = complex(np.mean(G.values * grid.unit_phase(-2.0 * m * G.lambdas)))
    via_inner = h_inner_product(phi, left_translate(phi, HLatticeIndex(k, l, m)))
    return CoefficientCheck(via_bracket, via_inner)


@dataclass(frozen=True)
class HConditionCReport:
    entries: Dict[Tuple[int, int, int], complex]
    threshold: float
    satisfied: bool

    @property
    def max_residual(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    @property
    def argmax(self) -> Optional[Tuple[int, int, int]]:
        if not self.entries:
            return None
        return max(self.entries, key=lambda idx: abs(self.entries[idx]))

    @property
    def verdict(self) -> str:
        return spectral.SATISFIED if self.satisfied else spectral.VIOLATED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_residual": self.max_residual,
            "argmax": self.argmax,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }


def box_tail(phi: HFunction) -> float:
    """Squared mass of the (x, y) factors outside the sampling box."""
    if not phi.terms:
        return 0.0
    x_axis, y_axis, _ = phi.spec.axes
    tail = 0.0
    for term in phi.terms:
        f, g, _ = term.factors
        tail = max(tail, f.tail_mass(x_axis.half_width), g.tail_mass(y_axis.half_width))
    return tail


def condition_c_residual_H(
    phi: HFunction,
    k_max: Optional[int] = None,
    l_max: Optional[int] = None,
    m_max: Optional[int] = None,
    threshold: Optional[float] = None,
) -> HConditionCReport:
    """Largest |<phi, L_(2k,l,m) phi>| over (k, l) != (0, 0) in the window."""
    k_max = config.getint("twistframe", "k_max", section="heisenberg") if k_max is None else k_max
    l_max = config.getint("twistframe", "l_max", section="heisenberg") if l_max is None else l_max
    m_max = config.getint("twistframe", "m_max", section="heisenberg") if m_max is None else m_max
    entries = {}
    for k in range(-k_max, k_max + 1):
        for l in range(-l_max, l_max + 1):
            if k == 0 and l == 0:
                continue
            for m in range(-m_max, m_max + 1):
                idx = HLatticeIndex(k, l, m)
                entries[idx.as_tuple()] = h_inner_product(phi, left_translate(phi, idx))
    if threshold is None:
        threshold = max(1e-8, 10.0 * box_tail(phi))
    satisfied = all(abs(v) <= threshold for v in entries.values())
    return HConditionCReport(entries, threshold, satisfied)


def central_synthesis(phi: HFunction, coefficients: Mapping[int, complex]) -> HFunction:
    """sum_n b_n L_(0,0,n) phi"""
    terms = []
    for n, b in coefficients.items():
        for term in phi.terms:
            terms.append(HTerm(b * term.coefficient, term.factors, group_product(HLatticeIndex(0, 0, n), term.index)))
    return HFunction(phi.spec, tuple(terms))


def canonical_dual_H(
    phi: HFunction,
    epsilon: Optional[float] = None,
    G00: Optional[GSamples] = None,
    condition_c: Optional[HConditionCReport] = None,
    threads: Optional[int] = None,
) -> HFunction:
    """phi~ with phi~^lam = phi^lam / G_00(lam).

    Realized as sum_n b_n L_(0,0,n) phi with b_n the Fourier coefficients of
    1/G_00, sampled on a midpoint lambda grid.
    """
    if not phi.terms:
        raise InputError(reason="the Heisenberg dual is built from separable generators")
    if epsilon is None:
        epsilon = config.getfloat("twistframe", "epsilon", section="spectral")
    report = condition_c or condition_c_residual_H(phi)
    if not report.satisfied:
        raise RefusalError(reason="condition C fails for the generator", diagnostic=report.to_dict())
    G = G00 or G_function(phi, (0, 0), threads=threads)
    values = G.values.real
    probe = spectral.probe_samples(values, G.lambdas)
    if probe.min_w <= epsilon or probe.verdict == spectral.DIVERGENT:
        diagnostic = probe.to_dict()
        diagnostic["epsilon"] = epsilon
        raise RefusalError(
            reason=f"1/G_00 is not integrable on the grid (min G_00 = {probe.min_w:.3e} at lambda = {probe.argmin_xi})",
            diagnostic=diagnostic,
        )
    n_max = len(G.lambdas) // 2 - 1
    reciprocal = 1.0 / values
    coefficients = {}
    for n in spectral.m_order(n_max):
        coefficients[n] = complex(np.mean(reciprocal * grid.unit_phase(-2.0 * n * G.lambdas)))
    cutoff = 1e-15 * max(abs(b) for b in coefficients.values())
    return central_synthesis(phi, {n: b for n, b in coefficients.items() if abs(b) > cutoff})


def gram_table_H(
    phi: HFunction, differences: Iterable[HLatticeIndex], threads: Optional[int] = None
) -> Dict[HLatticeIndex, complex]:
    """<L_d phi, phi> for each difference d."""
    ds = sorted(set(differences))
    values = parallel.ordered_map(lambda d: np.conj(h_inner_product(phi, left_translate(phi, d))), ds, threads)
    return dict(zip(ds, values))


def gram_H(
    phi: HFunction, radius: int, cap: Optional[int] = None, threads: Optional[int] = None
) -> GramSection:
    """Gram section over |k|, |l|, |m| <= radius with <L_a phi, L_b phi> = <L_(b^-1 a) phi, phi>."""
    if radius < 0 or int(radius) != radius:
        raise InputError(reason=f"window radius must be a nonnegative integer, got {radius}")
    indices = h_window(radius)
    twisted.check_cap(len(indices), cap)
    pairs = {}
    for i, a in enumerate(indices):
        for j in range(i, len(indices)):
            pairs[(i, j)] = group_product(group_inverse(indices[j]), a)
    table = gram_table_H(phi, pairs.values(), threads)
    matrix = hermitian_from_upper({ij: complex(table[d]) for ij, d in pairs.items()}, len(indices))
    return GramSection.from_matrix(radius, [idx.as_tuple() for idx in indices], matrix)


def synthesize_H(c: Mapping[HLatticeIndex, complex], phi: HFunction) -> HFunction:
    if not c:
        raise InputError(reason="empty coefficient field")
    terms: List[HTerm] = []
    for idx in sorted(c):
        terms.extend(HTerm(c[idx] * t.coefficient, t.factors, t.index) for t in left_translate(phi, idx).terms)
    return HFunction(phi.spec, tuple(terms))


def central_symbol(c: Mapping[HLatticeIndex, complex], lambdas: np.ndarray) -> Dict[Tuple[int, int], np.ndarray]:
    """rho_(k,l)(lam) = sum_m c_(k,l,m) exp(2*pi*i*m*lam)"""
    symbols: Dict[Tuple[int, int], np.ndarray] = {}
    for idx in sorted(c):
        key = (idx.k, idx.l)
        symbols[key] = symbols.get(key, 0) + c[idx] * grid.unit_phase(2.0 * idx.m * lambdas)
    return symbols


def norm_identity_H(
    phi: HFunction, c: Mapping[HLatticeIndex, complex], G00: Optional[GSamples] = None
) -> Tuple[float, float]:
    """(||sum c L phi||^2, sum_(k,l) integral |rho_(k,l)|^2 G_00); equal under condition C."""
    G = G00 or G_function(phi, (0, 0))
    lhs = synthesize_H(c, phi).norm2()
    rhs = 0.0
    for symbol in central_symbol(c, G.lambdas).values():
        rhs += float(np.mean(np.abs(symbol) ** 2 * G.values.real))
    return lhs, rhs


def membership_H(
    f: HFunction, c: Mapping[HLatticeIndex, complex], phi: HFunction, lambdas: Sequence[float]
) -> float:
    """Largest relative L2 distance between f^lam and sum_(k,l) rho_(k,l)(lam) (L_(2k,l,0) phi)^lam."""
    worst = 0.0
    for lam in lambdas:
        lhs = partial_ft(f, lam)
        symbols = central_symbol(c, np.array([lam]))
        predicted = np.zeros(lhs.values.shape, dtype=complex)
        for (k, l), rho in symbols.items():
            predicted = predicted + rho[0] * partial_ft(left_translate(phi, HLatticeIndex(k, l, 0)), lam).values
        norm = math.sqrt(float(np.sum(np.abs(lhs.values) ** 2)))
        if norm == 0:
            continue
        worst = max(worst, math.sqrt(float(np.sum(np.abs(lhs.values - predicted) ** 2))) / norm)
    return worst

"""Finite-section probes of frame properties of twisted and left translates.

The statements concern infinite systems, so every probe works on Gram
sections over growing windows and only asserts one-sided consequences that
are stable under sectioning: upper bounds, monotone eigenvalue trends and
witness inequalities. Everything else is reported as a trend.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from twistframe import config, grid, heisenberg, twisted, twistframe_logging
from twistframe.common.exception import GridError, InputError
from twistframe.grid import SampledFunction
from twistframe.heisenberg import GSamples, HConditionCReport, HFunction, HLatticeIndex
from twistframe.sections import GramSection
from twistframe.spectral import ConditionCReport, WeightSamples
from twistframe.twisted import CoefficientField, LatticeIndex
from twistframe.verdict import Verdicts

logger = twistframe_logging.init_logging("frames")

__all__ = [
    "GramSection",
    "ProbeReport",
    "WitnessReport",
    "bessel_bound_estimate",
    "independence_probe",
    "biorthogonality_check",
    "hilbertian_probe",
    "bessel_bound_estimate_H",
    "independence_probe_H",
    "biorthogonality_check_H",
    "hilbertian_probe_H",
]

INTERLACING_TOL = 1e-10
BESSEL_TOL = 1e-2
NULL_RESIDUAL = 1e-6
WITNESS_SLACK = 1.0 + 1e-2
DEFAULT_CUTS = (0, 1, 2, 4)


@dataclass
class ProbeReport:
    radii: List[int]
    lam_min: List[float]
    lam_max: List[float]
    sigma_min: List[float]
    reference: Dict[str, float]
    verdicts: Verdicts = field(default_factory=Verdicts)
    sections: List[GramSection] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "radii": self.radii,
            "lam_min": self.lam_min,
            "lam_max": self.lam_max,
            "sigma_min": self.sigma_min,
            "reference": self.reference,
            "verdicts": self.verdicts.to_list(),
        }


@dataclass
class WitnessReport:
    cauchy: List[Dict[str, Any]]
    dual: List[Dict[str, Any]]
    asserting: bool
    verdicts: Verdicts = field(default_factory=Verdicts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cauchy": self.cauchy,
            "dual": self.dual,
            "asserting": self.asserting,
            "verdicts": self.verdicts.to_list(),
        }


def _check_radii(radii: Optional[Sequence[int]]) -> List[int]:
    if radii is None:
        radii = [int(r) for r in config.getlist("twistframe", "radii", section="frames")]
    radii = sorted({int(r) for r in radii})
    if not radii:
        raise InputError(reason="the list of window radii is empty")
    if radii[0] < 0:
        raise InputError(reason=f"window radii must be nonnegative, got {radii[0]}")
    return radii


def _sub_section(full: GramSection, radius: int) -> GramSection:
    keep = [i for i, idx in enumerate(full.indices) if max(abs(v) for v in idx) <= radius]
    matrix = full.matrix[np.ix_(keep, keep)]
    return GramSection.from_matrix(radius, [full.indices[i] for i in keep], matrix)


def _nested_sections(full: GramSection, radii: Sequence[int]) -> List[GramSection]:
    return [full if r == full.radius else _sub_section(full, r) for r in radii]


def gram_sections(
    phi: SampledFunction,
    radii: Optional[Sequence[int]] = None,
    route: str = "auto",
    cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[GramSection]:
    """Gram sections over the windows |k|, |l| <= r, all cut from the largest one."""
    radii = _check_radii(radii)
    full = twisted.gram_matrix(phi, radii[-1], route=route, cap=cap, threads=threads)
    return _nested_sections(full, radii)


def _report(radii: List[int], sections: List[GramSection], reference: Dict[str, float]) -> ProbeReport:
    return ProbeReport(
        radii=radii,
        lam_min=[s.lam_min for s in sections],
        lam_max=[s.lam_max for s in sections],
        sigma_min=[s.sigma_min for s in sections],
        reference=reference,
        sections=sections,
    )


def _bessel_verdicts(report: ProbeReport, bound: Optional[float], condition_c: bool) -> None:
    lam_max = report.lam_max
    monotone = all(b >= a - INTERLACING_TOL for a, b in zip(lam_max, lam_max[1:]))
    report.verdicts.add("lambda_max nondecreasing", "holds" if monotone else "fails")
    if bound is None or not condition_c:
        report.verdicts.add(
            "bessel bound", "non-asserting", {"reason": "condition C not established or no bracket supplied"}
        )
        return
    worst = max(lam_max)
    status = "holds" if worst <= bound + BESSEL_TOL else "fails"
    report.verdicts.add("bessel bound", status, {"lam_max": worst, "bound": bound, "tol": BESSEL_TOL})


def bessel_bound_estimate(
    phi: SampledFunction,
    radii: Optional[Sequence[int]] = None,
    w: Optional[WeightSamples] = None,
    condition_c: Optional[ConditionCReport] = None,
    route: str = "auto",
    cap: Optional[int] = None,
    threads: Optional[int] = None,
    sections: Optional[List[GramSection]] = None,
) -> ProbeReport:
    """lambda_max of the Gram sections against sup w.

    The finite-section bound lambda_max(r) <= sup w is asserted only when
    condition C has been established for phi.
    """
    radii = _check_radii(radii)
    if sections is None:
        sections = gram_sections(phi, radii, route, cap, threads)
    reference = {} if w is None else {"sup_w": w.sup(), "inf_w": w.inf()}
    report = _report(radii, sections, reference)
    _bessel_verdicts(report, None if w is None else w.sup(), bool(condition_c and condition_c.satisfied))
    return report


def _zero_report(radii: List[int]) -> ProbeReport:
    zeros = [0.0] * len(radii)
    report = ProbeReport(radii, list(zeros), list(zeros), list(zeros), {})
    report.verdicts.add("l2-independence", "dependent", {"reason": "the generator vanishes"})
    return report


def _independence_verdict(report: ProbeReport, inf_value: Optional[float], epsilon: float) -> None:
    worst = min(report.sigma_min)
    if worst < NULL_RESIDUAL:
        at = report.radii[report.sigma_min.index(worst)]
        report.verdicts.add("l2-independence", "inconsistent", {"radius": at, "residual": worst})
    elif inf_value is not None and inf_value > epsilon:
        report.verdicts.add("l2-independence", "consistent with l2-independence", {"inf": inf_value})
    else:
        report.verdicts.add(
            "l2-independence", "trend reported", {"sigma_min": report.sigma_min, "inf": inf_value}
        )


def independence_probe(
    phi: SampledFunction,
    radii: Optional[Sequence[int]] = None,
    w: Optional[WeightSamples] = None,
    epsilon: Optional[float] = None,
    route: str = "auto",
    cap: Optional[int] = None,
    threads: Optional[int] = None,
    sections: Optional[List[GramSection]] = None,
) -> ProbeReport:
    """sigma_min of the synthesis restricted to each window, with a trend toward inf w.

    sigma_min(r) = sqrt(lambda_min(r)) is the smallest ratio ||sum c T phi|| / ||c||_2 over
    coefficients supported in the window, so a null vector shows up as sigma_min below
    NULL_RESIDUAL.
    """
    radii = _check_radii(radii)
    if not np.any(phi.values):
        return _zero_report(radii)
    if epsilon is None:
        epsilon = config.getfloat("twistframe", "epsilon", section="spectral")
    if sections is None:
        sections = gram_sections(phi, radii, route, cap, threads)
    reference = {} if w is None else {"sup_w": w.sup(), "inf_w": w.inf()}
    report = _report(radii, sections, reference)
    _independence_verdict(report, None if w is None else w.inf(), epsilon)
    return report


def biorthogonality_check(
    dual: SampledFunction, phi: SampledFunction, radius: int, threads: Optional[int] = None
) -> float:
    """max over |k|, |l| <= radius of |<T_(k,l) dual, phi> - delta|"""
    if dual.spec != phi.spec:
        raise GridError(reason="the dual and the generator live on different grids")
    worst = 0.0
    for idx in twisted.window(radius):
        value = grid.inner_product(twisted.twisted_translate(dual, idx, warn=False), phi)
        target = 1.0 if idx == LatticeIndex(0, 0) else 0.0
        worst = max(worst, abs(value - target))
    return worst


def _quadratic_form(matrix: np.ndarray, v: np.ndarray) -> float:
    """||sum_i v_i e_i||^2 for a Gram matrix G_ij = <e_i, e_j>"""
    return float(np.real(v @ matrix @ np.conj(v)))


def _cut_masks(indices: Sequence[Tuple[int, ...]], cuts: Sequence[int]) -> List[np.ndarray]:
    radii = np.array([max(abs(v) for v in idx) for idx in indices])
    masks = [np.zeros(len(indices), dtype=bool)]
    masks.extend(radii <= r for r in cuts)
    return masks


def _decaying(indices: Sequence[Tuple[int, ...]]) -> np.ndarray:
    return np.array([1.0 / (1.0 + sum(v * v for v in idx)) for idx in indices], dtype=complex)


def _cauchy_witnesses(
    full: GramSection, c: np.ndarray, masks: List[np.ndarray], cuts: Sequence[Any], sup: float
) -> List[Dict[str, Any]]:
    rows = []
    for label, A, B in zip(cuts, masks, masks[1:]):
        diff = np.where(B & ~A, c, 0)
        mass = float(np.sum(np.abs(diff) ** 2))
        lhs = _quadratic_form(full.matrix, diff)
        bound = sup * mass * WITNESS_SLACK
        rows.append({"cut": label, "norm2": lhs, "coefficient_mass": mass, "bound": bound, "holds": lhs <= bound})
    return rows


def _witness_verdicts(report: WitnessReport) -> None:
    for name, rows in (("cauchy witness", report.cauchy), ("dual besselian witness", report.dual)):
        if not report.asserting:
            report.verdicts.add(name, "non-asserting", {"reason": "condition C not established"})
        else:
            report.verdicts.add(name, "holds" if all(r["holds"] for r in rows) else "fails")


def hilbertian_probe(
    phi: SampledFunction,
    w: WeightSamples,
    c: Optional[CoefficientField] = None,
    cuts: Sequence[int] = DEFAULT_CUTS,
    condition_c: Optional[ConditionCReport] = None,
    route: str = "auto",
    cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> WitnessReport:
    """Cauchy (Hilbertian) witnesses for the partial sums of sum c T phi and Besselian witnesses for the dual system.

    Partial sums S_A run over nested windows A, starting from the empty set.
    Hilbertian: ||S_B - S_A||^2 <= sup w * sum_(B minus A) |c|^2.
    Dual Besselian: sum_A |c|^2 <= sup w * ||sum_A c T dual||^2, with the dual
    norm taken from the bracket identity with 1/w in place of w.
    """
    cuts = sorted({int(r) for r in cuts})
    if not cuts:
        raise InputError(reason="no cut radii")
    full = twisted.gram_matrix(phi, cuts[-1], route=route, cap=cap, threads=threads)
    indices = full.indices
    if c is None:
        vector = _decaying(indices)
    else:
        if not len(c):
            raise InputError(reason="empty coefficient field")
        vector = c.vector([LatticeIndex(*idx) for idx in indices])
    masks = _cut_masks(indices, cuts)
    sup = w.sup()
    cauchy = _cauchy_witnesses(full, vector, masks, cuts, sup)

    reciprocal = WeightSamples(w.torus, 1.0 / np.maximum(w.values, 1e-300), w.m_truncation, w.tail_bound, 0.0)
    dual = []
    for label, A in zip(cuts, masks[1:]):
        support = {LatticeIndex(*indices[i]): vector[i] for i in np.flatnonzero(A) if vector[i] != 0}
        field_A = CoefficientField.from_mapping(support)
        mass = float(np.sum(np.abs(vector[A]) ** 2))
        dual_norm2 = twisted.synthesis_energy(field_A, reciprocal)
        bound = sup * dual_norm2 * WITNESS_SLACK
        dual.append(
            {"cut": label, "coefficient_mass": mass, "dual_norm2": dual_norm2, "bound": bound, "holds": mass <= bound}
        )

    report = WitnessReport(cauchy, dual, bool(condition_c and condition_c.satisfied))
    _witness_verdicts(report)
    return report


# Heisenberg lattice ----------------------------------------------------------


def gram_sections_H(
    phi: HFunction, radii: Optional[Sequence[int]] = None, cap: Optional[int] = None, threads: Optional[int] = None
) -> List[GramSection]:
    radii = _check_radii(radii)
    full = heisenberg.gram_H(phi, radii[-1], cap=cap, threads=threads)
    return _nested_sections(full, radii)


def bessel_bound_estimate_H(
    phi: HFunction,
    radii: Optional[Sequence[int]] = None,
    G00: Optional[GSamples] = None,
    condition_c: Optional[HConditionCReport] = None,
    cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> ProbeReport:
    """lambda_max of the sections over |k|, |l|, |m| <= r against sup G_00."""
    radii = _check_radii(radii)
    sections = gram_sections_H(phi, radii, cap, threads)
    reference = {} if G00 is None else {"sup_G00": G00.sup(), "inf_G00": G00.inf()}
    report = _report(radii, sections, reference)
    _bessel_verdicts(report, None if G00 is None else G00.sup(), bool(condition_c and condition_c.satisfied))
    return report


def independence_probe_H(
    phi: HFunction,
    radii: Optional[Sequence[int]] = None,
    G00: Optional[GSamples] = None,
    epsilon: Optional[float] = None,
    cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> ProbeReport:
    radii = _check_radii(radii)
    if all(t.coefficient == 0 for t in phi.terms) and (phi.values is None or not np.any(phi.values)):
        return _zero_report(radii)
    if epsilon is None:
        epsilon = config.getfloat("twistframe", "epsilon", section="spectral")
    sections = gram_sections_H(phi, radii, cap, threads)
    reference = {} if G00 is None else {"sup_G00": G00.sup(), "inf_G00": G00.inf()}
    report = _report(radii, sections, reference)
    _independence_verdict(report, None if G00 is None else G00.inf(), epsilon)
    return report


def biorthogonality_check_H(dual: HFunction, phi: HFunction, radius: int) -> float:
    """max over the window of |<L_(2k,l,m) dual, phi> - delta|"""
    worst = 0.0
    for idx in heisenberg.h_window(radius):
        value = heisenberg.h_inner_product(heisenberg.left_translate(dual, idx), phi)
        target = 1.0 if idx == heisenberg.IDENTITY else 0.0
        worst = max(worst, abs(value - target))
    return worst


def hilbertian_probe_H(
    phi: HFunction,
    G00: GSamples,
    c: Optional[Mapping[HLatticeIndex, complex]] = None,
    cuts: Sequence[int] = (0, 1, 2),
    condition_c: Optional[HConditionCReport] = None,
    cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> WitnessReport:
    """The witnesses of hilbertian_probe with G_00 in place of w."""
    cuts = sorted({int(r) for r in cuts})
    if not cuts:
        raise InputError(reason="no cut radii")
    full = heisenberg.gram_H(phi, cuts[-1], cap=cap, threads=threads)
    indices = full.indices
    if c is None:
        vector = _decaying(indices)
    else:
        if not c:
            raise InputError(reason="empty coefficient field")
        vector = np.array([c.get(HLatticeIndex(*idx), 0) for idx in indices], dtype=complex)
    masks = _cut_masks(indices, cuts)
    sup = G00.sup()
    cauchy = _cauchy_witnesses(full, vector, masks, cuts, sup)

    reciprocal = 1.0 / np.maximum(G00.values.real, 1e-300)
    dual = []
    for label, A in zip(cuts, masks[1:]):
        support = {HLatticeIndex(*indices[i]): vector[i] for i in np.flatnonzero(A) if vector[i] != 0}
        dual_norm2 = 0.0
        for symbol in heisenberg.central_symbol(support, G00.lambdas).values():
            dual_norm2 += float(np.mean(np.abs(symbol) ** 2 * reciprocal))
        mass = float(np.sum(np.abs(vector[A]) ** 2))
        bound = sup * dual_norm2 * WITNESS_SLACK
        dual.append(
            {"cut": label, "coefficient_mass": mass, "dual_norm2": dual_norm2, "bound": bound, "holds": mass <= bound}
        )

    report = WitnessReport(cauchy, dual, bool(condition_c and condition_c.satisfied))
    _witness_verdicts(report)
    return report

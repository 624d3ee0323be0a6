#!/usr/bin/env python3

"""Command line front end.

Every subcommand runs one pipeline, writes its data files into the output
directory and finishes with report.json. Exit codes: 0 on success, 1 on
usage errors, 2 when the requested object does not exist (mathematical
refusal); refusals still write a report carrying the diagnostic.
"""

import argparse
import os
import sys
import time
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence, Tuple

import numpy as np

from twistframe import config, frames, grid, heisenberg, json, report, spectral, twisted, twistframe_logging, weyl
from twistframe.common.exception import RefusalError, TwistframeException
from twistframe.grid import GridSpec, SampledFunction
from twistframe.report import Report
from twistframe.verdict import Verdicts

logger = twistframe_logging.init_logging("cli")

# keys accepted in a --config document and the type they are read with
CONFIG_KEYS: Dict[str, Callable[[Any], Any]] = {
    "L": float,
    "q": int,
    "midpoint": bool,
    "t_L": float,
    "t_q": int,
    "M": int,
    "R": int,
    "l_max": int,
    "k_max": int,
    "m_max": int,
    "epsilon": float,
    "threshold": float,
    "radii": lambda v: [int(r) for r in v],
    "lambda_samples": int,
    "threads": int,
    "cap": int,
}

# closed-form values reported by the worked-example reproductions, with tolerances
EXAMPLE_VALUES = {
    2: ("inner_product_(0,0,1)", heisenberg.HLatticeIndex(0, 0, 1), 1.520346, 1e-4),
    5: ("inner_product_(1,0,0)", heisenberg.HLatticeIndex(1, 0, 0), 0.589490, 1e-2),
}

# relative tolerance of w_dual * w = 1 and of G_dual * G_00 = 1
DUAL_IDENTITY_TOL = 5e-2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _square() -> List[grid.Factor1D]:
    return [grid.indicator(0, 1), grid.indicator(0, 1)]


def named_generator(name: str, spec: Optional[GridSpec] = None) -> SampledFunction:
    """Phase-plane generators addressable from the command line."""
    spec = spec or grid.phase_plane_spec()
    if name == "unit-square":
        return grid.sample_separable(_square(), spec)
    if name == "rect-2x1":
        return grid.sample_separable([grid.indicator(0, 2), grid.indicator(0, 1)], spec)
    if name == "gaussian":
        return grid.sample_separable([grid.gaussian(np.pi), grid.gaussian(np.pi)], spec)
    if name == "psi":
        square = grid.sample_separable(_square(), spec)
        shifted = twisted.twisted_translate(square, twisted.LatticeIndex(1, 0))
        return grid.combine([square, shifted], [1.0, 1.0])
    raise UsageError(f"unknown generator {name}")


NAMED_GENERATORS = ("unit-square", "rect-2x1", "gaussian", "psi")


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {value!r}") from e


def load_run_config(path: Optional[str]) -> Dict[str, Any]:
    """Flat JSON document of run parameters; unknown keys are usage errors."""
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise UsageError(f"could not read configuration {path}: {e.strerror}") from e
    except ValueError as e:
        raise UsageError(f"configuration {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise UsageError(f"configuration {path} must be a JSON object")
    resolved = {}
    for key, value in data.items():
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown configuration key {key!r} in {path}")
        resolved[key] = CONFIG_KEYS[key](value)
    return resolved


def resolve(args: argparse.Namespace) -> Dict[str, Any]:
    """Configuration file values overridden by command line flags."""
    cfg = load_run_config(args.config)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def phase_plane(cfg: Dict[str, Any]) -> GridSpec:
    return grid.phase_plane_spec(grid.phase_plane_axis(cfg.get("L"), cfg.get("q"), cfg.get("midpoint")))


def group(cfg: Dict[str, Any]) -> GridSpec:
    axis = grid.phase_plane_axis(cfg.get("L"), cfg.get("q"), cfg.get("midpoint"))
    return grid.group_spec(axis, t=grid.t_axis(cfg.get("t_L"), cfg.get("t_q"), cfg.get("midpoint")))


class Context:
    """State shared by the pipelines of one run."""

    def __init__(self, args: argparse.Namespace, cfg: Dict[str, Any]):
        self.args = args
        self.cfg = cfg
        self.out_dir = args.out_dir
        self.threads = cfg.get("threads")
        self.report = report.new_report(args.command, cfg)
        self.verdicts = Verdicts()

    def result(self, name: str, value: Any, tol: Optional[float] = None, provenance: str = "computed") -> None:
        report.add_result(self.report, name, value, tol, provenance)

    def data_file(self, name: str) -> str:
        self.report["files"].append(name)
        return os.path.join(self.out_dir, name)


# R^2n pipelines ---------------------------------------------------------------


def _weight(ctx: Context, phi: SampledFunction) -> spectral.WeightSamples:
    K = weyl.weyl_kernel(phi, 1.0, threads=ctx.threads)
    return spectral.weight_function(K, ctx.cfg.get("M"), threads=ctx.threads)


def cmd_weight(ctx: Context) -> None:
    phi = named_generator(ctx.args.phi, phase_plane(ctx.cfg))
    w = _weight(ctx, phi)
    norm2 = phi.norm2()
    ctx.result("mass", w.mass(), 1e-2 * norm2)
    ctx.result("norm2", norm2)
    ctx.result("sup_w", w.sup())
    ctx.result("inf_w", w.inf())
    ctx.result("tail_bound", w.tail_bound, provenance="derived")
    holds = abs(w.mass() - norm2) <= 1e-2 * norm2
    ctx.verdicts.add("weight mass identity", "holds" if holds else "fails", w.metadata())
    report.write_weight_csv(ctx.data_file(ctx.args.out), w.torus.points(), w.values)


def cmd_condition_c(ctx: Context) -> None:
    phi = named_generator(ctx.args.phi, phase_plane(ctx.cfg))
    K = weyl.weyl_kernel(phi, 1.0, threads=ctx.threads)
    res = spectral.condition_c_residual(
        K, ctx.cfg.get("l_max"), ctx.cfg.get("M"), ctx.cfg.get("threshold"), threads=ctx.threads
    )
    ctx.result("max_residual", res.max_residual, res.threshold)
    ctx.result("residuals", {str(l): r for l, r in sorted(res.residuals.items())})
    ctx.result("tail_bound", res.tail_bound, provenance="derived")
    ctx.verdicts.add("condition C", res.verdict, res.to_dict())


def cmd_gram(ctx: Context) -> None:
    phi = named_generator(ctx.args.phi, phase_plane(ctx.cfg))
    section = twisted.gram_matrix(
        phi, ctx.args.radius, route=ctx.args.route, cap=ctx.cfg.get("cap"), M=ctx.cfg.get("M"), threads=ctx.threads
    )
    for key, value in section.eigen_summary().items():
        ctx.result(key, value)
    hermitian = float(np.abs(section.matrix - section.matrix.conj().T).max())
    ctx.verdicts.add("hermitian", "holds" if hermitian == 0.0 else "fails")
    report.write_matrix_csv(ctx.data_file("gram.csv"), section.matrix)


def cmd_dual(ctx: Context) -> None:
    phi = named_generator(ctx.args.phi, phase_plane(ctx.cfg))
    w = _weight(ctx, phi)
    dual = spectral.canonical_dual(phi, w, ctx.cfg.get("epsilon"))
    deviation = frames.biorthogonality_check(dual, phi, ctx.args.radius, threads=ctx.threads)
    K_dual = weyl.weyl_kernel(dual, 1.0, threads=ctx.threads)
    w_dual = spectral.weight_function(K_dual, ctx.cfg.get("M"), torus=w.torus, threads=ctx.threads)
    weight_deviation = spectral.dual_weight_deviation(w, w_dual)
    ctx.result("biorthogonality_deviation", deviation, 1e-2)
    ctx.result("dual_weight_deviation", weight_deviation, DUAL_IDENTITY_TOL)
    ctx.result("dual_norm2", dual.norm2())
    ctx.verdicts.add("reciprocal probe", spectral.reciprocal_probe(w).verdict)
    ctx.verdicts.add("biorthogonality", "holds" if deviation <= 1e-2 else "fails")
    ctx.verdicts.add("dual weight identity", "holds" if weight_deviation <= DUAL_IDENTITY_TOL else "fails")
    report.write_weight_csv(ctx.data_file("dual_weight.csv"), w_dual.torus.points(), w_dual.values)


def cmd_probe(ctx: Context) -> None:
    phi = named_generator(ctx.args.phi, phase_plane(ctx.cfg))
    w = _weight(ctx, phi)
    K = weyl.weyl_kernel(phi, 1.0, threads=ctx.threads)
    cond = spectral.condition_c_residual(K, ctx.cfg.get("l_max"), ctx.cfg.get("M"), threads=ctx.threads)
    radii = ctx.cfg.get("radii")
    sections = frames.gram_sections(phi, radii, cap=ctx.cfg.get("cap"), threads=ctx.threads)
    bessel = frames.bessel_bound_estimate(phi, radii, w, cond, sections=sections)
    independence = frames.independence_probe(phi, radii, w, ctx.cfg.get("epsilon"), sections=sections)
    witnesses = frames.hilbertian_probe(phi, w, condition_c=cond, cap=ctx.cfg.get("cap"), threads=ctx.threads)
    ctx.result("bessel", bessel.to_dict(), frames.BESSEL_TOL)
    ctx.result("independence", independence.to_dict(), frames.NULL_RESIDUAL)
    ctx.result("witnesses", witnesses.to_dict())
    ctx.verdicts.add("condition C", cond.verdict)
    for probe in (bessel, independence, witnesses):
        ctx.verdicts.merge(probe.verdicts)
    for section in sections:
        report.write_matrix_csv(ctx.data_file(f"gram_r{section.radius}.csv"), section.matrix)


def cmd_kernel(ctx: Context) -> None:
    phi = named_generator(ctx.args.phi, phase_plane(ctx.cfg))
    lam = ctx.args.lam
    K = weyl.weyl_kernel(phi, lam, threads=ctx.threads)
    hs = K.hs_norm2()
    norm2 = phi.norm2()
    ctx.result("hs_norm2", hs, 1e-4 * norm2 / abs(lam))
    ctx.result("norm2", norm2)
    metadata = {
        "lambda": lam,
        "xi": {"half_width": K.xi_grid.half_width, "samples_per_unit": K.xi_grid.samples_per_unit},
        "eta": {"half_width": K.eta_grid.half_width, "samples_per_unit": K.eta_grid.samples_per_unit},
        "generator": ctx.args.phi,
    }
    path = ctx.data_file("kernel.csv")
    report.write_kernel_csv(path, K.xi_grid.points(), K.eta_grid.points(), K.values, metadata)
    ctx.report["files"].append("kernel.csv.json")


# Heisenberg pipelines -------------------------------------------------------


def _example(ctx: Context, example_id: int) -> heisenberg.HFunction:
    params = {"h": ctx.args.h} if getattr(ctx.args, "h", None) else {}
    return heisenberg.example_factory(example_id, params, group(ctx.cfg))


def _g(ctx: Context, phi: heisenberg.HFunction, kl: Tuple[int, int], route: str = "reduced") -> heisenberg.GSamples:
    return heisenberg.G_function(
        phi,
        kl,
        heisenberg.lambda_grid(ctx.cfg.get("lambda_samples")),
        ctx.cfg.get("R"),
        route=route,
        threads=ctx.threads,
    )


def cmd_heisenberg_g(ctx: Context) -> None:
    phi = _example(ctx, ctx.args.example)
    kl = (ctx.args.k, ctx.args.l)
    G = _g(ctx, phi, kl, ctx.args.route)
    ctx.result("sup", G.sup())
    ctx.result("inf", G.inf())
    ctx.result("integral", G.mean())
    ctx.result("tail_bound", G.tail_bound, provenance="derived")
    if kl == (0, 0):
        norm2 = phi.norm2()
        ctx.result("norm2", norm2)
        holds = abs(G.mean().real - norm2) <= 1e-2 * norm2
        ctx.verdicts.add("plancherel chain", "holds" if holds else "fails", G.metadata())
    report.write_lambda_csv(ctx.data_file("g.csv"), G.lambdas, G.values)


def _condition_c_H(ctx: Context, phi: heisenberg.HFunction) -> heisenberg.HConditionCReport:
    return heisenberg.condition_c_residual_H(
        phi, ctx.cfg.get("k_max"), ctx.cfg.get("l_max"), ctx.cfg.get("m_max"), ctx.cfg.get("threshold")
    )


def cmd_heisenberg_condition_c(ctx: Context) -> None:
    phi = _example(ctx, ctx.args.example)
    res = _condition_c_H(ctx, phi)
    ctx.result("max_residual", res.max_residual, res.threshold)
    ctx.result("argmax", res.argmax)
    ctx.verdicts.add("condition C", res.verdict, res.to_dict())


def cmd_heisenberg_dual(ctx: Context) -> None:
    phi = _example(ctx, ctx.args.example)
    cond = _condition_c_H(ctx, phi)
    G = _g(ctx, phi, (0, 0))
    dual = heisenberg.canonical_dual_H(phi, ctx.cfg.get("epsilon"), G, cond, threads=ctx.threads)
    deviation = frames.biorthogonality_check_H(dual, phi, ctx.args.radius)
    G_dual = heisenberg.G_function(dual, (0, 0), G.lambdas, ctx.cfg.get("R"), threads=ctx.threads)
    bracket_deviation = float(np.max(np.abs(G_dual.values.real * G.values.real - 1.0)))
    ctx.result("biorthogonality_deviation", deviation, 1e-3)
    ctx.result("dual_bracket_deviation", bracket_deviation, DUAL_IDENTITY_TOL)
    ctx.result("dual_terms", len(dual.terms))
    ctx.verdicts.add("condition C", cond.verdict)
    ctx.verdicts.add("biorthogonality", "holds" if deviation <= 1e-3 else "fails")
    ctx.verdicts.add("dual bracket identity", "holds" if bracket_deviation <= DUAL_IDENTITY_TOL else "fails")
    report.write_lambda_csv(ctx.data_file("g.csv"), G.lambdas, G.values)
    report.write_lambda_csv(ctx.data_file("dual_g.csv"), G_dual.lambdas, G_dual.values)


def _reproduce_one(ctx: Context, example_id: int, prefix: str) -> None:
    phi = _example(ctx, example_id)
    res = _condition_c_H(ctx, phi)
    ctx.result(f"{prefix}max_residual", res.max_residual, res.threshold)
    ctx.result(f"{prefix}argmax", res.argmax)
    if example_id in EXAMPLE_VALUES:
        name, idx, expected, tol = EXAMPLE_VALUES[example_id]
        value = heisenberg.h_inner_product(phi, heisenberg.left_translate(phi, idx)).real
        ctx.result(f"{prefix}{name}", value, tol)
        ctx.result(f"{prefix}{name}_expected", expected, tol, provenance="closed-form")
    ctx.verdicts.add(f"{prefix}condition C", res.verdict, res.to_dict())


def cmd_reproduce(ctx: Context) -> None:
    target = ctx.args.target
    if target == "all":
        for example_id in range(1, 7):
            _reproduce_one(ctx, example_id, f"example-{example_id}.")
        return
    if not target.startswith("example-") or not target[len("example-") :].isdigit():
        raise UsageError(f"reproduce expects example-N or all, got {target!r}")
    _reproduce_one(ctx, int(target[len("example-") :]), "")


PIPELINES: Dict[str, Callable[[Context], None]] = {
    "weight": cmd_weight,
    "condition-c": cmd_condition_c,
    "gram": cmd_gram,
    "dual": cmd_dual,
    "probe": cmd_probe,
    "kernel": cmd_kernel,
    "heisenberg-g": cmd_heisenberg_g,
    "heisenberg-condition-c": cmd_heisenberg_condition_c,
    "heisenberg-dual": cmd_heisenberg_dual,
    "reproduce": cmd_reproduce,
}


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat JSON document with run parameters", default=None)
    common.add_argument("--out-dir", dest="out_dir", help="Directory for report.json and data files", default=".")
    common.add_argument("--format", dest="fmt", choices=report.FORMATS, default="json")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (default: configuration)")
    common.add_argument(
        "--record-time",
        dest="record_time",
        action="store_true",
        help="Record the wall-clock time in the report (the report is then no longer reproducible byte for byte)",
    )
    common.add_argument("--L", dest="L", type=float, default=None, help="Half width of the phase-plane box")
    common.add_argument("--q", dest="q", type=int, default=None, help="Samples per unit on the phase plane")
    common.add_argument("--M", dest="M", type=int, default=None, help="Truncation of the lattice m-sums")
    common.add_argument("--epsilon", type=float, default=None)

    parser = ArgumentParser(prog="twistframe", description="Twisted-translate frame diagnostics")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgumentParser)
    sub.required = True

    def phase_plane_command(name: str, help_text: str) -> ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--phi", choices=NAMED_GENERATORS, default="unit-square")
        return p

    p = phase_plane_command("weight", "Weight function w of a generator")
    p.add_argument("--out", default="weight.csv", help="CSV file (xi, w) inside the output directory")

    p = phase_plane_command("condition-c", "Residuals of the bracket functions R_l, l != 0")
    p.add_argument("--l-max", dest="l_max", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)

    p = phase_plane_command("gram", "Gram section over a window of twisted translates")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--route", choices=twisted.ROUTES, default="auto")
    p.add_argument("--cap", type=int, default=None)

    p = phase_plane_command("dual", "Canonical dual generator and its biorthogonality")
    p.add_argument("--radius", type=int, default=3)

    p = phase_plane_command("probe", "Bessel, independence and Hilbertian probes")
    p.add_argument("--radii", type=_int_list, default=None)
    p.add_argument("--l-max", dest="l_max", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)

    p = phase_plane_command("kernel", "Weyl kernel samples")
    p.add_argument("--lam", type=float, default=1.0)

    def group_command(name: str, help_text: str) -> ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--example", type=int, choices=range(1, 7), default=1)
        p.add_argument(
            "--h-factor",
            dest="h",
            choices=("gaussian", "abs_exp", "sinc"),
            default=None,
            help="t-factor of examples 1, 4, 5, 6",
        )
        p.add_argument("--R", dest="R", type=int, default=None)
        p.add_argument("--lambda-samples", dest="lambda_samples", type=int, default=None)
        p.add_argument("--k-max", dest="k_max", type=int, default=None)
        p.add_argument("--l-max", dest="l_max", type=int, default=None)
        p.add_argument("--m-max", dest="m_max", type=int, default=None)
        p.add_argument("--threshold", type=float, default=None)
        return p

    p = group_command("heisenberg-g", "Bracket function G_(k,l) on a lambda grid")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--route", choices=heisenberg.ROUTES, default="reduced")

    group_command("heisenberg-condition-c", "Condition C on the Heisenberg lattice")

    p = group_command("heisenberg-dual", "Canonical dual on the Heisenberg group")
    p.add_argument("--radius", type=int, default=2)

    p = group_command("reproduce", "Reproduce the worked examples")
    p.add_argument("target", help="example-N (N = 1..6) or all")

    return parser


def _refusal_report(ctx: Context, error: RefusalError) -> None:
    ctx.result("diagnostic", error.diagnostic, provenance="reported")
    ctx.result("reason", str(error), provenance="reported")
    ctx.verdicts.add(ctx.args.command, "refused", error.diagnostic)


def run(argv: Sequence[str]) -> Tuple[int, Optional[Report]]:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        cfg = resolve(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 1, None

    if not os.path.isdir(args.out_dir):
        print(f"twistframe: error: output directory {args.out_dir} does not exist", file=sys.stderr)
        return 1, None

    ctx = Context(args, cfg)
    start = time.perf_counter()
    code = 0
    try:
        PIPELINES[args.command](ctx)
    except RefusalError as e:
        logger.warning("%s", e)
        _refusal_report(ctx, e)
        code = 2
    except (UsageError, TwistframeException) as e:
        print(f"twistframe: error: {e}", file=sys.stderr)
        return 1, None

    ctx.report["verdicts"] = ctx.verdicts.to_list()
    if args.record_time:
        ctx.report["seconds"] = time.perf_counter() - start
    report.emit_report(ctx.report, args.fmt, args.out_dir)
    return code, ctx.report


def main() -> None:
    config.check_version("twistframe", logger=logger)
    try:
        code, _ = run(sys.argv[1:])
    except Exception:
        logger.exception("twistframe failed")
        sys.exit(1)
    sys.exit(code)


if __name__ == "__main__":
    main()

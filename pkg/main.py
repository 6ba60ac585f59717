import argparse
import logging
import os
import sys
import time
from typing import Any, Literal, NoReturn, Optional, TextIO

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from logging_utils import make_run_id, run_id_ctx, sanitize_for_log, setup_logging
from report_utils import envelope, render
from suite import run_suite
from summa.banach import (
    DiagonalSpec,
    cotype_constant_lower,
    diag_classify,
    diag_growth_experiment,
    phs_lower,
    phs_vs_gamma_report,
    phs_vs_pi2_report,
    type_constant_lower,
)
from summa.errors import SummaError, UsageError
from summa.grothendieck import bilinear_hilbert_sup, grothendieck_ratio, little_grothendieck_check, norm_inf_to_1
from summa.linalg import NormEstimate, Operator, SpaceSpec, op_norm, op_norm_upper
from summa.matrix_io import load_family, load_matrix, parse_exponent_flag
from summa.pietsch import PietschCertificate, pi_2_upper, pietsch_factorize, verify_certificate
from summa.randsums import RandomPlan, gaussian_moment, rademacher_moment
from summa.sequences import strong_lp_norm, weak_lp_norm, weak_lp_upper
from summa.summing import (
    SearchBudget,
    gamma_norm_hilbert_domain,
    gamma_summing_lower,
    hs_norm,
    pi_p_lower,
    r_summing_lower,
    weak_star_nuclear_rep,
)

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SUITE_FAILED = 2

Command = Literal[
    "hs",
    "opnorm",
    "weaknorm",
    "radmoment",
    "gaussmoment",
    "pi2",
    "pi1-lb",
    "gamma",
    "pietsch",
    "nuclear",
    "grothendieck",
    "diag-classify",
    "diag-growth",
    "cotype",
    "type",
    "phs",
    "suite",
]


class RunConfig(BaseModel):
    command: Command
    seed: int = Field(42, ge=0, le=2**64 - 1, description="64-bit seed; SUMMA_SEED overrides --seed")
    samples: int = Field(100_000, ge=1, description="Monte Carlo samples")
    restarts: int = Field(32, ge=0, description="Multistart / witness restarts")
    tol: float = Field(1e-8, gt=0, description="Ascent tolerance")
    output: Literal["json", "csv"] = "json"


# =========================
# Argument parsing
# =========================


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as input errors instead of exiting."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _add_matrix(p: argparse.ArgumentParser, domain: str = "l2", codomain: str = "l2") -> None:
    p.add_argument("--matrix", required=True, help="Matrix file (.json or .csv)")
    p.add_argument("--domain", default=domain, help="Domain exponent: l1, l2, linf, 1.5, ...")
    p.add_argument("--codomain", default=codomain, help="Codomain exponent")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="summa", description="Operator-ideal norms on finite-dimensional l_p spaces")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--restarts", type=int, default=32)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--output", choices=["json", "csv"], default="json")
    common.add_argument("--cap", type=int, default=None, help="Override the sign-enumeration cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hs", parents=[common], help="Hilbert-Schmidt norm")
    p.add_argument("--matrix", required=True)

    p = sub.add_parser("opnorm", parents=[common], help="l_p -> l_q operator norm")
    _add_matrix(p)

    p = sub.add_parser("weaknorm", parents=[common], help="Weak and strong l_p norms of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--p", default="1")

    p = sub.add_parser("radmoment", parents=[common], help="Exact Rademacher moment of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--moment-p", type=float, default=2.0)

    p = sub.add_parser("gaussmoment", parents=[common], help="Gaussian moment of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--moment-p", type=float, default=2.0)

    p = sub.add_parser("pi2", parents=[common], help="2-summing norm bracket")
    _add_matrix(p)
    p.add_argument("--upper", action="store_true")
    p.add_argument("--lower", action="store_true")

    p = sub.add_parser("pi1-lb", parents=[common], help="p-summing witness lower bound")
    _add_matrix(p)
    p.add_argument("--p", type=float, default=1.0)

    p = sub.add_parser("gamma", parents=[common], help="gamma-summing and R-summing bounds")
    _add_matrix(p)
    p.add_argument("--rademacher", action="store_true", help="Also report the R-summing lower bound")

    p = sub.add_parser("pietsch", parents=[common], help="Pietsch certificate and factorisation")
    _add_matrix(p)
    p.add_argument("--certificate", default=None, help="Verify and factor with this certificate JSON")

    p = sub.add_parser("nuclear", parents=[common], help="Weak*-1-nuclear representation")
    p.add_argument("--matrix", required=True)

    p = sub.add_parser("grothendieck", parents=[common], help="inf->1 norm and Hilbertian bilinear sup")
    p.add_argument("--matrix", required=True)
    p.add_argument("--ratio", action="store_true")
    p.add_argument("--little", action="store_true", help="Little Grothendieck check for l_1 -> l_2")

    p = sub.add_parser("diag-classify", parents=[common], help="Classify a diagonal operator")
    _add_diagonal(p)

    p = sub.add_parser("diag-growth", parents=[common], help="Growth of truncated gamma-norms")
    _add_diagonal(p)
    p.add_argument("--dims", default="2,4,8,16,32,64")

    p = sub.add_parser("cotype", parents=[common], help="Cotype constant witness")
    p.add_argument("--space", required=True, help="Space exponent, e.g. linf")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--q", default="2")
    p.add_argument("--gaussian", action="store_true")

    p = sub.add_parser("type", parents=[common], help="Type constant witness")
    p.add_argument("--space", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--gaussian", action="store_true")

    p = sub.add_parser("phs", parents=[common], help="Pre-Hilbert-Schmidt lower bound")
    _add_matrix(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--vs-pi2", action="store_true")
    p.add_argument("--vs-gamma", action="store_true")

    p = sub.add_parser("suite", parents=[common], help="Run the acceptance suite")
    p.add_argument("--quick", action="store_true")
    return parser


def _add_diagonal(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--alpha", type=float)
    group.add_argument("--sigma", help="Comma-separated explicit sigma values")
    p.add_argument("--table", choices=["gamma", "phs"], default="gamma")


# =========================
# Dispatch
# =========================


def _operator(args: argparse.Namespace, domain: Optional[str] = None, codomain: Optional[str] = None) -> Operator:
    a = load_matrix(args.matrix)
    p = parse_exponent_flag(domain or getattr(args, "domain", "l2"))
    q = parse_exponent_flag(codomain or getattr(args, "codomain", "l2"))
    return Operator.from_matrix(a, p=p, q=q)


def _diagonal(args: argparse.Namespace) -> DiagonalSpec:
    p, q = parse_exponent_flag(args.p), parse_exponent_flag(args.q)
    if args.alpha is not None:
        return DiagonalSpec.power(p, q, args.alpha)
    return DiagonalSpec.explicit(p, q, [float(s) for s in args.sigma.split(",") if s.strip()])


def _int_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def dispatch(config: RunConfig, args: argparse.Namespace) -> tuple[Any, int]:
    """Run one command; returns (result, exit code)."""
    cap = args.cap
    budget = SearchBudget(restarts=config.restarts, seed=config.seed)
    plan = RandomPlan(seed=config.seed, samples=config.samples, moment_p=getattr(args, "moment_p", 2.0))
    cmd = config.command

    if cmd == "hs":
        return NormEstimate.exact(hs_norm(_operator(args, "l2", "l2")), meta="frobenius"), EXIT_OK
    if cmd == "opnorm":
        u = _operator(args)
        return {"lower": op_norm(u, restarts=config.restarts, tol=config.tol, cap=cap, seed=config.seed), "upper": op_norm_upper(u, cap=cap)}, EXIT_OK
    if cmd == "weaknorm":
        fam = load_family(args.family)
        return {
            "weak": weak_lp_norm(fam, args.p, cap=cap, restarts=config.restarts, seed=config.seed),
            "weak_upper": weak_lp_upper(fam, args.p, cap=cap),
            "strong": NormEstimate.exact(strong_lp_norm(fam, args.p)),
        }, EXIT_OK
    if cmd == "radmoment":
        fam = load_family(args.family)
        return NormEstimate.exact(rademacher_moment(fam, args.moment_p, cap=cap), meta="sign enumeration"), EXIT_OK
    if cmd == "gaussmoment":
        return gaussian_moment(load_family(args.family), plan), EXIT_OK
    if cmd == "pi2":
        u = _operator(args)
        both = not (args.upper or args.lower)
        result: dict[str, Any] = {}
        if args.lower or both:
            result["lower"] = pi_p_lower(u, 2, budget, cap=cap)
        if args.upper or both:
            upper, cert = pi_2_upper(u, cap=cap, seed=config.seed)
            result["upper"] = upper
            result["certificate"] = cert
        return result, EXIT_OK
    if cmd == "pi1-lb":
        return pi_p_lower(_operator(args), args.p, budget, cap=cap), EXIT_OK
    if cmd == "gamma":
        u = _operator(args)
        result = {"summing_lower": gamma_summing_lower(u, budget, plan, cap=cap)}
        if u.domain.is_hilbert:
            result["hilbert_domain"] = gamma_norm_hilbert_domain(u, plan)
        if args.rademacher:
            result["r_summing_lower"] = r_summing_lower(u, budget, cap=cap)
        return result, EXIT_OK
    if cmd == "pietsch":
        u = _operator(args)
        if args.certificate:
            with open(args.certificate, encoding="utf-8") as fh:
                cert = PietschCertificate.model_validate_json(fh.read())
            verify_certificate(u, cert)
            upper = NormEstimate.upper(cert.bound, meta="supplied certificate")
        else:
            upper, cert = pi_2_upper(u, cap=cap, seed=config.seed)
        fact = pietsch_factorize(u, cert)
        return {"upper": upper, "certificate": cert, "factorization": fact}, EXIT_OK
    if cmd == "nuclear":
        return weak_star_nuclear_rep(_operator(args, "l2", "l2"), cap=cap), EXIT_OK
    if cmd == "grothendieck":
        if args.little:
            return little_grothendieck_check(_operator(args, "l1", "l2"), budget, cap=cap), EXIT_OK
        a = load_matrix(args.matrix)
        if args.ratio:
            return grothendieck_ratio(a, budget, cap=cap), EXIT_OK
        return {"inf_to_1": NormEstimate.exact(norm_inf_to_1(a, cap=cap)), "hilbert_sup": bilinear_hilbert_sup(a, budget, cap=cap)}, EXIT_OK
    if cmd == "diag-classify":
        return diag_classify(_diagonal(args), table=args.table), EXIT_OK
    if cmd == "diag-growth":
        return diag_growth_experiment(_diagonal(args), _int_list(args.dims), plan, budget), EXIT_OK
    if cmd in ("cotype", "type"):
        space = SpaceSpec(dim=args.dim, exp=parse_exponent_flag(args.space))
        sums = "gaussian" if args.gaussian else "rademacher"
        if cmd == "cotype":
            return cotype_constant_lower(space, parse_exponent_flag(args.q), budget, plan, sums=sums, cap=cap), EXIT_OK
        return type_constant_lower(space, args.p, budget, plan, sums=sums, cap=cap), EXIT_OK
    if cmd == "phs":
        u = _operator(args)
        k = args.k or u.domain.dim
        m = args.m or u.codomain.dim
        result = {"phs_lower": phs_lower(u, k, m, budget, plan, cap=cap)}
        if args.vs_pi2:
            result["vs_pi2"] = phs_vs_pi2_report(u, budget, k=k, m=m, cap=cap)
        if args.vs_gamma:
            result["vs_gamma"] = phs_vs_gamma_report(u, budget, plan, cap=cap)
        return result, EXIT_OK
    if cmd == "suite":
        report = run_suite(config.seed, quick=args.quick)
        return report, EXIT_OK if report.passed else EXIT_SUITE_FAILED
    raise ValueError(f"unknown command {cmd!r}")


def _seed_override(seed: int) -> int:
    env = os.getenv("SUMMA_SEED")
    if env is None or not env.strip():
        return seed
    try:
        return int(env.strip())
    except ValueError:
        raise ValueError(f"SUMMA_SEED must be an integer, got {env!r}")


def run(config: RunConfig, args: argparse.Namespace, out: TextIO) -> int:
    """Run a command and write its report; returns the exit code."""
    start = time.perf_counter()
    logger.info("command start %s", config.command)
    result, code = dispatch(config, args)
    doc = envelope(config.command, config.model_dump(), result)
    out.write(render(doc, config.output))
    dur_ms = (time.perf_counter() - start) * 1000
    logger.info("command end %s exit=%s duration_ms=%.2f", config.command, code, dur_ms)
    logger.debug("report %s", sanitize_for_log(doc))
    return code


def main(argv: Optional[list[str]] = None, out: Optional[TextIO] = None) -> int:
    setup_logging()
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        config = RunConfig(
            command=args.command,
            seed=_seed_override(args.seed),
            samples=args.samples,
            restarts=args.restarts,
            tol=args.tol,
            output=args.output,
        )
    except (ValidationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    token = run_id_ctx.set(make_run_id({**config.model_dump(), "argv": list(argv or sys.argv[1:])}))
    try:
        return run(config, args, out)
    except (SummaError, ValidationError, OSError, ValueError) as e:
        logger.warning("input error: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        logger.exception("command failed")
        print("error: command failed (see log)", file=sys.stderr)
        return EXIT_INPUT
    finally:
        run_id_ctx.reset(token)


if __name__ == "__main__":
    sys.exit(main())

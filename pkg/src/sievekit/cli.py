"""``sievekit`` command-line front end.

Exit status: 0 when everything checked holds (or the bound is positive),
1 on a counterexample or nonpositive bound, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import ast
import operator
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import kuhn, linear_sieve, verifier
from ._pool import resolve_workers
from .errors import CheckpointError, DomainError, LedgerViolation, PreconditionError
from .report import FORMATS, emit_report, exit_status, to_document

COMMANDS = (
    "theorem",
    "scan-epsilon",
    "verify-mertens",
    "verify-interval",
    "verify-4p",
    "scan-params",
    "lower-bound",
)

_LITERAL = re.compile(r"(?<![\w.])(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def parse_exact(text: str) -> Fraction:
    """Evaluate ``1.98e28+1``, ``10**30``, ``198*10**26`` etc. exactly."""
    literals: List[Fraction] = []

    def stash(m: re.Match) -> str:
        literals.append(Fraction(m.group(0)))
        return f"_v{len(literals) - 1}"

    source = _LITERAL.sub(stash, text.strip().replace("^", "**"))

    def ev(node: ast.AST) -> Fraction:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Name) and node.id.startswith("_v"):
            return literals[int(node.id[2:])]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Pow):
                if right.denominator != 1 or abs(right) > 4096:
                    raise ValueError("exponent must be a small integer")
                return left ** int(right)
            return _BINOPS[type(node.op)](left, right)
        raise ValueError(f"unsupported syntax in {text!r}")

    try:
        return ev(ast.parse(source, mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(str(exc)) from None


def exact_int(text: str) -> int:
    try:
        v = parse_exact(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r} ({exc})")
    if v.denominator != 1:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


def positive_int(text: str) -> int:
    v = exact_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def real(text: str) -> float:
    try:
        return float(parse_exact(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r} ({exc})")


class _Once(argparse.Action):
    """Store action that rejects a flag given twice."""

    def __call__(self, parser, namespace, values, option_string=None):
        seen = namespace.__dict__.setdefault("_seen", set())
        if self.dest in seen:
            parser.error(f"{option_string} given more than once")
        seen.add(self.dest)
        setattr(namespace, self.dest, values)


class _Parser(argparse.ArgumentParser):
    def add(self, *flags, **kw):
        kw.setdefault("action", _Once)
        return self.add_argument(*flags, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sievekit", description="Almost-prime sieve bounds and finite verifications.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, help: str) -> _Parser:
        p = sub.add_parser(name, help=help)
        p.add("--format", choices=FORMATS, default="json")
        p.add("--out", metavar="PATH")
        p.add("--workers", type=positive_int, default=1)
        return p

    def sieve_flags(p: _Parser):
        d = linear_sieve.PUBLISHED_PARAMS
        p.add("--N", type=exact_int, required=True)
        p.add("--k1", type=real, default=d.k1)
        p.add("--k2", type=positive_int, default=d.k2)
        p.add("--alpha", type=real, default=d.alpha)
        p.add("--epsilon", type=real, default=d.epsilon)

    p = command("theorem", "certified lower bound for r_k2(A(N))")
    sieve_flags(p)
    p.add("--s", type=real, default=linear_sieve.PUBLISHED_PARAMS.s)

    p = command("lower-bound", "lower bound for S(A(N), P, z)")
    sieve_flags(p)
    p.add("--s", type=real, default=linear_sieve.PUBLISHED_PARAMS.s)
    p.add("--squarefree", choices=("auto", "exact", "analytic"), default="auto")

    p = command("scan-params", "maximise the bound over an (s, alpha) grid")
    sieve_flags(p)
    p.add("--s-min", type=real, default=3.0)
    p.add("--s-max", type=real, default=4.0)
    p.add("--s-step", type=real, default=0.05)
    p.add("--alpha-min", type=real, default=0.01)
    p.add("--alpha-max", type=real, default=0.12)
    p.add("--alpha-step", type=real, default=0.01)

    p = command("scan-epsilon", "small-z epsilon scan (case 1)")
    p.add("--z-min", type=exact_int, default=verifier.CASE1_Z[0])
    p.add("--z-max", type=exact_int, default=verifier.CASE1_Z[1])

    p = command("verify-mertens", "check the Mertens product band at every prime up to a limit")
    p.add("--limit", type=exact_int, required=True)
    p.add("--segment-width", type=positive_int, default=10**8)
    p.add("--checkpoint", metavar="PATH")

    p = command("verify-interval", "an integer with at most k prime factors between consecutive squares")
    p.add("--n-min", type=positive_int, required=True)
    p.add("--n-max", type=positive_int, required=True)
    p.add("--k", type=positive_int, required=True)

    p = command("verify-4p", "a prime p with n^2 < 4p < (n+1)^2")
    p.add("--n-min", type=positive_int, required=True)
    p.add("--n-max", type=positive_int, required=True)
    return parser


@dataclass
class RunConfig:
    command: str
    options: Dict[str, Any] = field(default_factory=dict)
    output_format: str = "json"
    checkpoint_path: Optional[str] = None
    worker_count: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.output_format not in FORMATS:
            raise DomainError(f"unknown format {self.output_format!r}")
        if self.worker_count < 1:
            raise DomainError("worker_count must be >= 1")
        if self.checkpoint_path and self.command != "verify-mertens":
            raise DomainError("--checkpoint only applies to verify-mertens")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        opts = {
            k: v
            for k, v in vars(ns).items()
            if k not in ("command", "format", "out", "workers", "checkpoint", "_seen")
        }
        return cls(
            command=ns.command,
            options=opts,
            output_format=ns.format,
            checkpoint_path=getattr(ns, "checkpoint", None),
            worker_count=resolve_workers(ns.workers),
            out=ns.out,
        )


def _params(o: Dict[str, Any]) -> linear_sieve.SieveParams:
    return linear_sieve.PUBLISHED_PARAMS.replace(
        k1=o["k1"], k2=o["k2"], alpha=o["alpha"], epsilon=o["epsilon"], s=o.get("s", 3.3)
    )


def _compute(cfg: RunConfig) -> Any:
    o, w = cfg.options, cfg.worker_count
    if cfg.command == "theorem":
        return kuhn.theorem_pipeline(o["N"], _params(o), enforce_ledger=False)
    if cfg.command == "lower-bound":
        return linear_sieve.lower_bound_S(o["N"], _params(o), squarefree=o["squarefree"])
    if cfg.command == "scan-params":
        return kuhn.scan_parameters(
            o["N"],
            kuhn.grid(o["s_min"], o["s_max"], o["s_step"]),
            kuhn.grid(o["alpha_min"], o["alpha_max"], o["alpha_step"]),
            base=_params(o),
        )
    if cfg.command == "scan-epsilon":
        return verifier.scan_epsilon_case1(o["z_min"], o["z_max"], workers=w)
    if cfg.command == "verify-mertens":
        return verifier.verify_mertens(
            o["limit"], checkpoint=cfg.checkpoint_path, workers=w, segment_width=o["segment_width"]
        )
    if cfg.command == "verify-interval":
        return verifier.verify_interval(o["n_min"], o["n_max"], o["k"], workers=w)
    return verifier.verify_4p(o["n_min"], o["n_max"], workers=w)


def run(cfg: RunConfig) -> Tuple[int, str]:
    """Execute one command; returns (exit status, serialised report)."""
    t0 = time.perf_counter()
    result = _compute(cfg)
    doc = to_document(result, cfg.command, cfg.options, time.perf_counter() - t0)
    return exit_status(doc), emit_report(doc, cfg.output_format)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_args(ns)
        status, text = run(cfg)
    except (DomainError, PreconditionError, LedgerViolation, CheckpointError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"sievekit {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())

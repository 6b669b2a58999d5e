"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 schema or I/O error,
3 mathematical domain error (pole, size cap, charge sum).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .config import RunConfig
from .elliptic import (
    ZSeries,
    eta_numeric,
    minus_i_theta1_series,
    pn_numeric,
    pn_series,
    prime_form_numeric,
    prime_form_series,
    theta1_numeric,
)
from .errors import MathDomainError
from .jsonio import (
    SchemaError,
    decode_qseries,
    decode_zseries,
    encode_qseries,
    encode_result,
    encode_zseries,
    load_problem,
)
from .npoint import npoint_full
from .oracle import brute_trace, dump_basis
from .series import INF, QSeries, eisenstein, eisenstein_numeric, eta
from .suites import SUITES, run_suite
from .voa import FockState, LatticeData, monomial_from_exponents


# -- pretty printing ---------------------------------------------------------------------


def _fmt_coeff(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    z = complex(x)
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"({z.real:.12g}{z.imag:+.12g}j)"


def _q_power(e: int) -> str:
    x = Fraction(e, 24)
    if x == 0:
        return ""
    if x == 1:
        return "q"
    return f"q^{x}" if x.denominator == 1 else f"q^({x})"


def pretty_qseries(s: QSeries) -> str:
    out = ""
    for e, x in sorted(s.items()):
        p = _q_power(e)
        c = _fmt_coeff(x)
        sign = "+"
        if c.startswith("-"):
            sign, c = "-", c[1:]
        term = c if not p else (p if c == "1" else f"{c}*{p}")
        out = f"{sign}{term}" if not out and sign == "-" else (term if not out else f"{out} {sign} {term}")
    if s.trunc != INF:
        tail = f"O({_q_power(s.trunc) or '1'})"
        out = f"{out} + {tail}" if out else tail
    return out or "0"


def pretty_zseries(s: ZSeries) -> str:
    lines = []
    for m, c in sorted(s.items()):
        lines.append(f"z^{m}: {pretty_qseries(c)}")
    if s.log_coeff:
        lines.append(f"log z: {-s.log_coeff}")
    if s.ztrunc != INF:
        lines.append(f"O(z^{s.ztrunc})")
    return "\n".join(lines) or "0"


# -- argument helpers ---------------------------------------------------------------------


def _complex_arg(text: str) -> complex:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}") from None
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    return complex(parts[0], parts[1])


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON {text!r}: {exc.msg}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trunc", type=int, help="q-truncation in units of q^(1/24)")
    common.add_argument("--zorder", type=int, help="number of z-orders kept")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--threads", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--format", dest="output_format", choices=["json", "pretty"])

    parser = argparse.ArgumentParser(prog="torus-npoint", description="Genus-one n-point functions for Heisenberg and lattice VOAs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("special", help="special functions")
    ssub = sp.add_subparsers(dest="function", required=True)
    for name in ("eisenstein", "eta", "pn", "primeform", "theta1"):
        p = ssub.add_parser(name, parents=[common])
        p.add_argument("--tau", type=_complex_arg, help="numeric tau as 're,im'")
        if name in ("pn", "primeform", "theta1"):
            p.add_argument("--z", type=_complex_arg, help="numeric z as 're,im'")
        if name == "eisenstein":
            p.add_argument("--k", type=int, required=True)
        if name == "pn":
            p.add_argument("--n", type=int, required=True)

    npn = sub.add_parser("npoint", help="n-point functions")
    nsub = npn.add_subparsers(dest="action", required=True)
    ev = nsub.add_parser("eval", parents=[common])
    ev.add_argument("problem", help="problem JSON file")
    ve = nsub.add_parser("verify", parents=[common])
    ve.add_argument("suite", choices=list(SUITES) + ["all"])

    orc = sub.add_parser("oracle", help="brute-force Fock-space traces")
    osub = orc.add_subparsers(dest="action", required=True)
    tr = osub.add_parser("trace", parents=[common])
    tr.add_argument("--gram", type=_json_arg, default=[[2]])
    tr.add_argument("--beta", type=_json_arg)
    tr.add_argument("--fock", type=_json_arg, default=[], help="[[r, k, e], ...] square-bracket monomial")
    tr.add_argument("--weight", type=int, default=8, help="module weight cutoff W")
    tr.add_argument("--dump-basis", action="store_true")
    return parser


# -- commands ----------------------------------------------------------------------------


def _special(args, cfg: RunConfig) -> dict:
    numeric = args.tau is not None
    fn = args.function
    if fn in ("pn", "primeform", "theta1") and numeric != (args.z is not None):
        raise SchemaError("--tau and --z must be given together for numeric evaluation", "/z")
    if fn == "eisenstein":
        if numeric:
            return {"quantity": f"E_{args.k}", "value": _pair(eisenstein_numeric(args.k, args.tau))}
        return {"quantity": f"E_{args.k}", "qseries": encode_qseries(eisenstein(args.k, cfg.trunc))}
    if fn == "eta":
        if numeric:
            return {"quantity": "eta", "value": _pair(eta_numeric(args.tau))}
        return {"quantity": "eta", "qseries": encode_qseries(eta(cfg.trunc))}
    if fn == "pn":
        if numeric:
            return {"quantity": f"P_{args.n}", "value": _pair(pn_numeric(args.n, args.z, args.tau))}
        return {"quantity": f"P_{args.n}", "zseries": encode_zseries(pn_series(args.n, cfg.zorder, cfg.trunc))}
    if fn == "primeform":
        if numeric:
            return {"quantity": "K", "value": _pair(prime_form_numeric(args.z, args.tau))}
        return {"quantity": "K", "zseries": encode_zseries(prime_form_series(cfg.zorder, cfg.trunc))}
    if numeric:
        return {"quantity": "theta1", "value": _pair(theta1_numeric(args.z, args.tau))}
    # theta_1 has purely imaginary coefficients; -i theta_1 keeps them rational
    return {"quantity": "-i*theta1", "zseries": encode_zseries(minus_i_theta1_series(cfg.zorder, cfg.trunc))}


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _eval(args, cfg: RunConfig) -> dict:
    prob = load_problem(args.problem, args.trunc, args.zorder, defaults=(cfg.trunc, cfg.zorder))
    res = npoint_full(prob, cap=cfg.involution_cap)
    return encode_result(res)


def _verify(args, cfg: RunConfig) -> tuple[dict, bool]:
    names = SUITES if args.suite == "all" else (args.suite,)
    checks = []
    for name in names:
        checks.extend(run_suite(name, cfg.tolerance, cfg.seed))
    ok = all(c["pass"] for c in checks)
    return {"suite": args.suite, "pass": ok, "count": len(checks), "checks": checks}, ok


def _trace(args, cfg: RunConfig) -> dict:
    try:
        lattice = LatticeData(args.gram)
    except (ValueError, TypeError) as exc:
        raise SchemaError(str(exc), "/gram") from None
    beta = args.beta if args.beta is not None else [0] * lattice.rank
    try:
        mono = monomial_from_exponents(args.fock)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"bad fock monomial: {exc}", "/fock") from None
    if any(not 1 <= r <= lattice.rank or k < 1 for r, k in mono):
        raise SchemaError("fock entries need 1 <= r <= rank and k >= 1", "/fock")
    v = FockState.monomial(mono)
    out = {"qseries": encode_qseries(brute_trace(lattice, v, beta, args.weight, cfg.weight_cap))}
    if args.dump_basis:
        out["basis"] = dump_basis(lattice, beta, args.weight)
    return out


def _emit(payload, cfg: RunConfig, out) -> None:
    if cfg.output_format == "pretty":
        out.write(_pretty_payload(payload) + "\n")
    else:
        out.write(json.dumps(payload) + "\n")


def _pretty_payload(payload: dict) -> str:
    if "qseries" in payload:
        return pretty_qseries(decode_qseries(payload["qseries"]))
    if "zseries" in payload:
        return pretty_zseries(decode_zseries(payload["zseries"]))
    if "value" in payload:
        return _fmt_coeff(complex(*payload["value"]))
    if "checks" in payload:
        lines = [f"{'PASS' if c['pass'] else 'FAIL'} {c['suite']} {c['case_id']} residual={c['residual']:.3g}" for c in payload["checks"]]
        lines.append(f"{sum(c['pass'] for c in payload['checks'])}/{payload['count']} passed")
        return "\n".join(lines)
    return json.dumps(payload, indent=2)


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_env(
            trunc=getattr(args, "trunc", None),
            zorder=getattr(args, "zorder", None),
            tolerance=getattr(args, "tolerance", None),
            threads=getattr(args, "threads", None),
            seed=getattr(args, "seed", None),
            output_format=getattr(args, "output_format", None),
        )
    except ValueError as exc:
        err.write(json.dumps({"error": "config", "pointer": "/", "message": str(exc)}) + "\n")
        return 2
    try:
        if args.command == "special":
            _emit(_special(args, cfg), cfg, out)
            return 0
        if args.command == "npoint" and args.action == "eval":
            _emit(_eval(args, cfg), cfg, out)
            return 0
        if args.command == "npoint" and args.action == "verify":
            report, ok = _verify(args, cfg)
            _emit(report, cfg, out)
            return 0 if ok else 1
        if args.command == "oracle":
            _emit(_trace(args, cfg), cfg, out)
            return 0
    except SchemaError as exc:
        err.write(json.dumps(exc.to_json()) + "\n")
        return 2
    except MathDomainError as exc:
        err.write(json.dumps({"error": "math-domain", "quantity": exc.quantity, "message": str(exc)}) + "\n")
        return 3
    except ValueError as exc:
        err.write(json.dumps({"error": "schema", "pointer": "/", "message": str(exc)}) + "\n")
        return 2
    parser.error("unknown command")
    return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""JSON encoding of series and problems.

Exact coefficients are written as ``[exp24, "num", "den"]`` with integers as
strings so that big values survive any JSON reader; float coefficients are
``[exp24, re, im]``. A ``null`` truncation means the series is exact.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .elliptic import ZSeries
from .npoint import FORMAL, Insertion, NPointProblem, NPointResult
from .series import INF, QSeries
from .voa import FockState, LatticeData, monomial_exponents, monomial_from_exponents


class SchemaError(ValueError):
    """Malformed input; ``pointer`` is a JSON pointer to the offending node."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer or "/"

    def to_json(self) -> dict:
        return {"error": "schema", "pointer": self.pointer, "message": str(self)}


# -- numbers and series --------------------------------------------------------------


def encode_coeff(e: int, x) -> list:
    if isinstance(x, Fraction):
        return [e, str(x.numerator), str(x.denominator)]
    if isinstance(x, int):
        return [e, str(x), "1"]
    z = complex(x)
    return [e, z.real, z.imag]


def decode_coeff(item, pointer: str = ""):
    if not isinstance(item, list) or len(item) != 3 or not isinstance(item[0], int):
        raise SchemaError("coefficient must be [exp, num, den] or [exp, re, im]", pointer)
    e, a, b = item
    if isinstance(a, str) and isinstance(b, str):
        try:
            return e, Fraction(int(a), int(b))
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational: {exc}", pointer) from None
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return e, complex(a, b)
    raise SchemaError("coefficient entries must be two strings or two numbers", pointer)


def encode_qseries(s: QSeries) -> dict:
    return {
        "trunc": None if s.trunc == INF else int(s.trunc),
        "coeffs": [encode_coeff(e, x) for e, x in sorted(s.items())],
    }


def decode_qseries(obj, pointer: str = "") -> QSeries:
    if not isinstance(obj, dict) or "coeffs" not in obj:
        raise SchemaError("q-series must be an object with 'coeffs'", pointer)
    trunc = obj.get("trunc")
    if trunc is not None and not isinstance(trunc, int):
        raise SchemaError("trunc must be an integer or null", pointer + "/trunc")
    coeffs = {}
    for i, item in enumerate(obj["coeffs"]):
        e, x = decode_coeff(item, f"{pointer}/coeffs/{i}")
        coeffs[e] = x
    return QSeries(coeffs, INF if trunc is None else trunc)


def encode_zseries(s: ZSeries) -> dict:
    return {
        "ztrunc": None if s.ztrunc == INF else int(s.ztrunc),
        "log_coeff": s.log_coeff,
        "terms": [[m, encode_qseries(c)] for m, c in sorted(s.items())],
    }


def decode_zseries(obj, pointer: str = "") -> ZSeries:
    if not isinstance(obj, dict) or "terms" not in obj:
        raise SchemaError("z-series must be an object with 'terms'", pointer)
    zt = obj.get("ztrunc")
    terms = {}
    for i, item in enumerate(obj["terms"]):
        if not isinstance(item, list) or len(item) != 2 or not isinstance(item[0], int):
            raise SchemaError("z-series term must be [power, qseries]", f"{pointer}/terms/{i}")
        terms[item[0]] = decode_qseries(item[1], f"{pointer}/terms/{i}/1")
    return ZSeries(terms, INF if zt is None else zt, obj.get("log_coeff", 0))


def encode_result(res: NPointResult) -> dict:
    out = {"mode": res.mode, "field": res.field, "provenance": res.provenance}
    v = res.value
    if isinstance(v, QSeries):
        out["qseries"] = encode_qseries(v)
    elif isinstance(v, ZSeries):
        out["zseries"] = encode_zseries(v)
    else:
        z = complex(v)
        out["value"] = [z.real, z.imag]
    return out


def decode_result_value(obj: dict):
    if "qseries" in obj:
        return decode_qseries(obj["qseries"], "/qseries")
    if "zseries" in obj:
        return decode_zseries(obj["zseries"], "/zseries")
    if "value" in obj:
        re, im = obj["value"]
        return complex(re, im)
    raise SchemaError("result has no value field", "/")


# -- problems -----------------------------------------------------------------------


def _int_list(x, pointer: str) -> list[int]:
    if not isinstance(x, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in x):
        raise SchemaError("expected a list of integers", pointer)
    return x


def _complex(x, pointer: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise SchemaError("expected a number or [re, im]", pointer)


def parse_position(x, pointer: str):
    """"formal" -> coefficient 1; {"formal": "p/q"} -> that coefficient; otherwise complex."""
    if x == FORMAL:
        return Fraction(1)
    if isinstance(x, dict):
        if set(x) != {"formal"}:
            raise SchemaError("formal position object must have exactly the key 'formal'", pointer)
        try:
            return Fraction(str(x["formal"]))
        except (ValueError, ZeroDivisionError):
            raise SchemaError("formal coefficient must be a rational 'p/q'", pointer + "/formal") from None
    return _complex(x, pointer)


def parse_problem(obj, T: int | None = None, Z: int | None = None, defaults=None) -> NPointProblem:
    """Build a problem; explicit T/Z win over the file's "trunc"/"zorder", which win over ``defaults``."""
    if not isinstance(obj, dict):
        raise SchemaError("problem must be a JSON object", "/")
    for key in ("gram", "insertions"):
        if key not in obj:
            raise SchemaError(f"missing required key '{key}'", f"/{key}")
    gram = obj["gram"]
    if not isinstance(gram, list) or not gram:
        raise SchemaError("gram must be a non-empty list of rows", "/gram")
    for i, row in enumerate(gram):
        _int_list(row, f"/gram/{i}")
    try:
        lattice = LatticeData(gram)
    except ValueError as exc:
        raise SchemaError(str(exc), "/gram") from None
    rank = lattice.rank
    beta = obj.get("beta", [0] * rank)
    _int_list(beta, "/beta")
    if len(beta) != rank:
        raise SchemaError(f"beta must have {rank} entries", "/beta")

    tau_raw = obj.get("tau", FORMAL)
    tau = FORMAL if tau_raw == FORMAL else _complex(tau_raw, "/tau")

    if not isinstance(obj["insertions"], list):
        raise SchemaError("insertions must be a list", "/insertions")
    insertions = []
    for i, ins in enumerate(obj["insertions"]):
        p = f"/insertions/{i}"
        if not isinstance(ins, dict):
            raise SchemaError("insertion must be an object", p)
        alpha = ins.get("alpha", [0] * rank)
        _int_list(alpha, p + "/alpha")
        if len(alpha) != rank:
            raise SchemaError(f"alpha must have {rank} entries", p + "/alpha")
        fock = ins.get("fock", [])
        if not isinstance(fock, list):
            raise SchemaError("fock must be a list of [r, k, e] triples", p + "/fock")
        for j, tr in enumerate(fock):
            _int_list(tr, f"{p}/fock/{j}")
            if len(tr) != 3 or not 1 <= tr[0] <= rank or tr[1] < 1 or tr[2] < 0:
                raise SchemaError(f"fock triple must be [r in 1..{rank}, k >= 1, e >= 0]", f"{p}/fock/{j}")
        state = FockState({monomial_from_exponents(fock): 1}, tuple(alpha))
        z = parse_position(ins.get("z", FORMAL), p + "/z")
        if tau == FORMAL and not isinstance(z, Fraction):
            raise SchemaError("with formal tau every position must be formal", p + "/z")
        if tau != FORMAL and isinstance(z, Fraction):
            raise SchemaError("with numeric tau every position must be numeric", p + "/z")
        insertions.append(Insertion(state, tuple(alpha), z))

    kw = {}
    if defaults is not None:
        kw["T"], kw["Z"] = defaults
    for key, name in (("trunc", "T"), ("zorder", "Z")):
        if key in obj:
            if not isinstance(obj[key], int) or isinstance(obj[key], bool) or obj[key] < 1:
                raise SchemaError(f"{key} must be a positive integer", f"/{key}")
            kw[name] = obj[key]
    if T is not None:
        kw["T"] = T
    if Z is not None:
        kw["Z"] = Z
    return NPointProblem(lattice, tuple(beta), insertions, tau, **kw)


def load_problem(path, T: int | None = None, Z: int | None = None, defaults=None) -> NPointProblem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}", "") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} at line {exc.lineno}", "") from None
    return parse_problem(obj, T, Z, defaults)


def dump_problem(prob: NPointProblem) -> dict:
    def pos(z):
        if isinstance(z, Fraction):
            return FORMAL if z == 1 else {"formal": str(z)}
        z = complex(z)
        return [z.real, z.imag]

    ins = []
    for x in prob.insertions:
        if len(x.state.terms) != 1:
            raise ValueError("only single-monomial insertions are serializable")
        (mono, coeff), = x.state.terms.items()
        if coeff != 1:
            raise ValueError("only unit-coefficient insertions are serializable")
        ins.append({"alpha": list(x.alpha), "fock": monomial_exponents(mono), "z": pos(x.z)})
    tau = FORMAL if prob.formal else [complex(prob.tau).real, complex(prob.tau).imag]
    return {
        "gram": [list(r) for r in prob.lattice.gram],
        "beta": list(prob.beta),
        "tau": tau,
        "trunc": prob.T,
        "zorder": prob.Z,
        "insertions": ins,
    }

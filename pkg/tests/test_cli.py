import io
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

import torus_npoint
from torus_npoint.cli import pretty_qseries, run
from torus_npoint.config import RunConfig
from torus_npoint.elliptic import ZSeries
from torus_npoint.jsonio import (
    SchemaError,
    decode_qseries,
    decode_result_value,
    decode_zseries,
    dump_problem,
    encode_qseries,
    encode_zseries,
    load_problem,
    parse_problem,
)
from torus_npoint.npoint import npoint_full
from torus_npoint.series import QSeries

PROBLEMS = Path(torus_npoint.__file__).parent / "data" / "problems"
GOLDEN = sorted(PROBLEMS.glob("*.json"))


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_eisenstein_constant_term():
    code, out, _ = cli("special", "eisenstein", "--k", "2", "--trunc", "48")
    assert code == 0
    s = decode_qseries(json.loads(out)["qseries"])
    assert s[0] == Fraction(-1, 12)
    assert s[24] == 2


def test_numeric_special_values():
    code, out, _ = cli("special", "pn", "--n", "2", "--tau", "0,1", "--z", "0.3,0.2")
    assert code == 0
    assert len(json.loads(out)["value"]) == 2


def test_formal_theta1_is_rational():
    code, out, _ = cli("special", "theta1", "--trunc", "48", "--zorder", "4")
    payload = json.loads(out)
    assert code == 0 and payload["quantity"] == "-i*theta1"
    assert decode_zseries(payload["zseries"]).is_exact


def test_tau_without_z_is_schema_error():
    code, _, err = cli("special", "primeform", "--tau", "0,1")
    assert code == 2
    assert json.loads(err)["pointer"] == "/z"


def test_missing_file_exits_2(tmp_path):
    code, _, err = cli("npoint", "eval", str(tmp_path / "absent.json"))
    assert code == 2
    assert json.loads(err)["error"] == "schema"


def test_schema_pointer_reported(tmp_path):
    bad = json.loads((PROBLEMS / "two_point_currents_formal.json").read_text())
    bad["insertions"][1]["fock"] = [[1, 0, 1]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = cli("npoint", "eval", str(path))
    assert code == 2
    assert json.loads(err)["pointer"].startswith("/insertions/1")


def test_lower_half_plane_exits_3():
    code, _, err = cli("special", "eta", "--tau", "0,-1")
    assert code == 3
    assert json.loads(err) == {"error": "math-domain", "quantity": "tau", "message": json.loads(err)["message"]}


def test_pole_exits_3():
    code, _, err = cli("special", "pn", "--n", "2", "--tau", "0,1", "--z", "0,0")
    assert code == 3
    assert json.loads(err)["quantity"] == "z"


def test_charge_sum_exits_3(tmp_path):
    prob = json.loads((PROBLEMS / "lattice_two_point_formal.json").read_text())
    prob["insertions"][1]["alpha"] = prob["insertions"][0]["alpha"]
    path = tmp_path / "charged.json"
    path.write_text(json.dumps(prob))
    code, _, err = cli("npoint", "eval", str(path))
    assert code == 3
    assert json.loads(err)["quantity"] == "sum(alpha_i)"


def test_golden_corpus_present():
    assert len(GOLDEN) >= 20


@pytest.mark.parametrize("path", GOLDEN, ids=lambda p: p.stem)
def test_eval_round_trip(path):
    code, out, _ = cli("npoint", "eval", str(path))
    assert code == 0
    payload = json.loads(out)
    cfg = RunConfig()
    direct = npoint_full(load_problem(path, defaults=(cfg.trunc, cfg.zorder))).value
    decoded = decode_result_value(payload)
    if payload["field"] == "exact-rational":
        assert decoded == direct
    elif isinstance(direct, complex):
        assert decoded == direct
    else:
        assert decoded.max_abs_diff(direct) == 0


def test_formal_golden_results_are_exact():
    for path in GOLDEN:
        if load_problem(path).formal:
            _, out, _ = cli("npoint", "eval", str(path))
            assert json.loads(out)["field"] == "exact-rational", path.stem


def test_problem_dump_round_trip():
    for path in GOLDEN:
        prob = load_problem(path)
        again = parse_problem(json.loads(json.dumps(dump_problem(prob))))
        assert dump_problem(again) == dump_problem(prob)


def test_cli_trunc_overrides_file():
    path = PROBLEMS / "two_point_currents_formal.json"
    _, out, _ = cli("npoint", "eval", str(path), "--trunc", "48", "--zorder", "3")
    z = decode_zseries(json.loads(out)["zseries"])
    assert z.ztrunc == 3
    assert all(q.trunc <= 48 for _, q in z.items())


def test_verify_suite_passes():
    code, out, _ = cli("npoint", "verify", "laurent")
    report = json.loads(out)
    assert code == 0 and report["pass"] and report["count"] > 0


def test_pretty_output():
    code, out, _ = cli("special", "eisenstein", "--k", "2", "--trunc", "72", "--format", "pretty")
    assert code == 0
    assert out.strip() == "-1/12 + 2*q + 6*q^2 + O(q^3)"


def test_pretty_handles_signs():
    s = QSeries({0: Fraction(1), 24: Fraction(-3)}, 48)
    assert pretty_qseries(s) == "1 - 3*q + O(q^2)"


def test_oracle_trace_with_basis():
    code, out, _ = cli("oracle", "trace", "--gram", "[[2]]", "--fock", "[[1,1,2]]", "--weight", "3", "--dump-basis")
    payload = json.loads(out)
    assert code == 0
    assert [len(level) for level in payload["basis"]] == [1, 1, 2, 3]
    assert decode_qseries(payload["qseries"])[-1] == Fraction(-1, 12)


def test_oracle_trace_weight_cap():
    code, _, _ = cli("oracle", "trace", "--weight", "20")
    assert code == 3


def test_environment_overrides_defaults():
    cfg = RunConfig.from_env({"TORUS_NPOINT_TRUNC": "48", "TORUS_NPOINT_OUTPUT_FORMAT": "pretty"})
    assert cfg.trunc == 48 and cfg.output_format == "pretty"
    assert RunConfig.from_env({"TORUS_NPOINT_TRUNC": "48"}, trunc=72).trunc == 72
    with pytest.raises(ValueError):
        RunConfig.from_env({"TORUS_NPOINT_ZORDER": "0"})


def test_bad_environment_exits_2(monkeypatch):
    monkeypatch.setenv("TORUS_NPOINT_TOLERANCE", "-1")
    code, _, err = cli("special", "eta")
    assert code == 2
    assert json.loads(err)["error"] == "config"


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "torus_npoint.cli", "special", "eta", "--trunc", "49"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    s = decode_qseries(json.loads(proc.stdout)["qseries"])
    assert s[1] == 1 and s[25] == -1


fractions = st.fractions(max_denominator=10**6)
complexes = st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6)


@given(st.dictionaries(st.integers(-30, 200), fractions, max_size=8), st.one_of(st.none(), st.integers(201, 400)))
def test_qseries_json_round_trip_exact(coeffs, trunc):
    s = QSeries(coeffs) if trunc is None else QSeries(coeffs, trunc)
    assert decode_qseries(json.loads(json.dumps(encode_qseries(s)))) == s


@given(st.dictionaries(st.integers(0, 100), complexes, max_size=6))
def test_qseries_json_round_trip_float(coeffs):
    s = QSeries(coeffs, 101)
    assert decode_qseries(json.loads(json.dumps(encode_qseries(s)))) == s


@given(st.dictionaries(st.integers(-4, 6), st.dictionaries(st.integers(0, 48), fractions, max_size=3), max_size=4))
def test_zseries_json_round_trip(terms):
    z = ZSeries({m: QSeries(c, 49) for m, c in terms.items()}, 7)
    assert decode_zseries(json.loads(json.dumps(encode_zseries(z)))) == z


def test_decode_rejects_garbage():
    with pytest.raises(SchemaError):
        decode_qseries({"trunc": None, "coeffs": [[0, "1"]]})
    with pytest.raises(SchemaError):
        decode_qseries({"trunc": None, "coeffs": [[0, "1", "0"]]})

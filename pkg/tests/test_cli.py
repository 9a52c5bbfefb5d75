import json
import re
from pathlib import Path

import jsonschema
import pytest

from rankone.cli import main
from rankone.schemas import document_schema

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, document_schema(argv[0]))
    return code, doc, err


def test_analyze_bs14(capsys):
    code, doc, _ = run_json(capsys, "analyze", DATA / "bs14.fp", "--primes", "2,3")
    (rep,) = doc["reports"]
    assert code == 0
    assert {r["p"]: r["d_p"] for r in rep["per_prime"]} == {2: 1, 3: 2}


def test_analyze_klein(capsys):
    _, doc, _ = run_json(capsys, "analyze", DATA / "klein.fp")
    rep = doc["reports"][0]
    assert (rep["betti"], rep["torsion"]) == (1, [2])


def test_malformed_input_exit_2(capsys):
    code, _, err = run(capsys, "analyze", DATA / "malformed.fp")
    assert code == 2
    assert re.search(r"line 2, column 7", err)


def test_missing_file_exit_2(capsys):
    code, _, err = run(capsys, "analyze", DATA / "no-such-file.fp")
    assert code == 2 and err


def test_vsa_precondition_exit_3(tmp_path, capsys):
    f = tmp_path / "def0.fp"
    f.write_text("< a, b | a^2, b^3 >\n")
    code, doc, _ = run_json(capsys, "vsa", f)
    assert code == 3
    assert doc["reports"][0]["exit_code"] == 3


def test_vsa_exhausted_on_abelian(capsys):
    code, doc, _ = run_json(capsys, "vsa", DATA / "z2.fp", "--max-index", "6")
    rep = doc["reports"][0]
    assert code == 0 and not rep["found"] and rep["max_rank"] <= 2 and rep["searched_index"] == 6


def test_vsa_witness_for_bs24(capsys):
    _, doc, _ = run_json(capsys, "vsa", DATA / "bs24.fp", "--max-index", "8")
    rep = doc["reports"][0]
    assert rep["found"] and rep["witness"]["rank"] >= 3


def test_strict_budget_exit_5(capsys):
    args = ("vsa", DATA / "bs23.fp", "--max-index", "12", "--budget-ms", "20")
    code, doc, _ = run_json(capsys, *args)
    assert code == 0 and doc["reports"][0]["budget_exhausted"]
    code, _, _ = run_json(capsys, *args, "--strict")
    assert code == 5


def test_hnn_build_ds(capsys):
    _, doc, _ = run_json(capsys, "hnn", "build", DATA / "ds2_3.endo")
    assert doc["reports"][0]["presentation"] == "< t, a, b | t a t^-1 a^-3, t b t^-1 b^-3 >"


def test_hnn_periodic_fibonacci(capsys):
    _, doc, _ = run_json(capsys, "hnn", "periodic", DATA / "fib.endo")
    assert doc["reports"][0]["status"] == "none-within-bounds"


def test_hnn_primitive(capsys):
    _, doc, _ = run_json(capsys, "hnn", "primitive", DATA / "a2b.endo")
    rep = doc["reports"][0]
    assert rep["status"] == "primitive" and rep["certificate"]["primitive"]


def test_hnn_witness(capsys):
    code, doc, _ = run_json(capsys, "hnn", "witness", DATA / "a2b.endo")
    rep = doc["reports"][0]
    assert code == 0 and rep["status"] == "found" and rep["rank"] >= 3 and rep["prime"] == 3


def test_hnn_non_injective_exit_4(capsys):
    code, _, err = run(capsys, "hnn", "build", DATA / "noninj.endo")
    assert code == 4 and "noninj" in err


def test_gbs_circle(capsys):
    code, out, _ = run(capsys, "gbs", DATA / "circle.gbs")
    assert code == 0
    assert "label: GBS-exception" in out
    assert "G is a quotient of BS(9,4)" in out
    _, doc, _ = run_json(capsys, "gbs", DATA / "circle.gbs")
    assert doc["reports"][0]["quotient_relation"]["relation"] == "t a^9 t^-1 a^-4"


def test_classify_bs12(capsys):
    code, out, _ = run(capsys, "classify", DATA / "bs12.fp")
    assert code == 0 and "bounded generation: boundedly generated" in out


def test_classify_free2(capsys):
    _, doc, _ = run_json(capsys, "classify", DATA / "free2.fp")
    rep = doc["reports"][0]
    assert rep["label"] == "VSA-witnessed"
    assert rep["certificates"][0]["index"] == 2


def test_seed_recorded(capsys):
    _, doc, _ = run_json(capsys, "analyze", DATA / "z2.fp", "--seed", "1234")
    assert doc["config"]["seed"] == 1234
    assert all(r["seed"] == 1234 for r in doc["reports"])
    _, out, _ = run(capsys, "analyze", DATA / "z2.fp", "--seed", "1234")
    assert "seed: 1234" in out


def _scalars(obj, prefix=()):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _scalars(v, prefix + (k,))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _scalars(v, prefix + (i,))
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        yield prefix, obj


@pytest.mark.parametrize("argv", [
    ("analyze", DATA / "bs14.fp", "--primes", "2,3,5"),
    ("vsa", DATA / "bs24.fp", "--max-index", "4"),
    ("gbs", DATA / "circle.gbs"),
])
def test_text_and_json_agree(capsys, argv):
    _, out, _ = run(capsys, *argv)
    _, doc, _ = run_json(capsys, *argv)
    text_numbers = re.findall(r"-?\d+(?:\.\d+)?", out)
    for path, value in _scalars(doc["reports"][0]):
        if "timings" in path:
            continue
        assert str(value) in text_numbers, path


def test_jobs_determinism(capsys):
    files = sorted(DATA.glob("*.fp"))
    _, a, _ = run(capsys, "classify", *files, "--format", "json", "--jobs", "1")
    _, b, _ = run(capsys, "classify", *files, "--format", "json", "--jobs", "4")
    a, b = json.loads(a), json.loads(b)
    for doc in (a, b):
        doc["config"].pop("jobs")
        for rep in doc["reports"]:
            rep.pop("timings", None)
    assert a == b


def test_bad_flags_rejected():
    with pytest.raises(SystemExit):
        main(["vsa", "x.fp", "--max-index", "0"])
    with pytest.raises(SystemExit):
        main(["vsa", "x.fp", "--primes", "two"])

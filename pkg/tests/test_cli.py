import json
import subprocess
import sys
from pathlib import Path

import pytest

from irmlab import Domain, canonical
from irmlab.cli import main
from irmlab.io import InstanceDocument, save_document

DATA = Path(__file__).resolve().parents[1] / "demos" / "data"
CANON = str(DATA / "canonical.toml")
CANON_CLS = str(DATA / "canonical_classification.toml")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_shipped_documents_are_canonical():
    from irmlab.io import load_document

    assert load_document(CANON) == canonical()
    assert load_document(CANON_CLS) == canonical("classification")


def test_validate(capsys):
    code, rep, _ = run(capsys, "validate", "--instance", CANON)
    assert code == 0 and rep["results"]["valid"]
    assert rep["command"] == "validate" and len(rep["instance_digest"]) == 64


def test_validate_invalid_exits_1(capsys, tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text(Path(CANON).read_text().replace('"1/5"', '"1/2"', 1))
    code, rep, _ = run(capsys, "validate", "--instance", str(p))
    assert code == 1 and not rep["results"]["valid"]
    assert rep["results"]["instance_violations"] == ["kernel row 0 sums to 1.3"]


def test_invalid_instance_is_input_error_elsewhere(capsys, tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text(Path(CANON).read_text().replace('"1/5"', '"1/2"', 1))
    code, rep, err = run(capsys, "ood-risk", "--instance", str(p))
    assert code == 2 and rep is None and "invalid instance" in err


def test_risk_default_and_explicit(capsys):
    code, rep, _ = run(capsys, "risk", "--instance", CANON, "--domain", "e1,e3")
    assert code == 0
    assert set(rep["results"]["risks"]) == {"e1", "e3"}
    code, rep, _ = run(capsys, "risk", "--instance", CANON, "--phi", "constant", "--head", "1/2", "--domain", "e1")
    assert rep["results"]["risks"]["e1"]["exact"] == "1/4"


def test_ood_risk_bayes(capsys):
    code, rep, _ = run(capsys, "ood-risk", "--instance", CANON)
    assert code == 0
    assert rep["results"]["ood_risk"] == {"exact": "4/25", "decimal": "0.16"}
    assert rep["results"]["predictor"]["phi"] == [0, 0, 1, 1]


def test_ood_risk_classification_float(capsys):
    code, rep, _ = run(capsys, "ood-risk", "--instance", CANON_CLS, "--float")
    assert code == 0 and rep["results"]["ood_risk"]["exact"] is None
    assert abs(float(rep["results"]["ood_risk"]["decimal"]) - 0.500402423538188) < 1e-12


def test_invariances_and_characterize(capsys):
    _, rep, _ = run(capsys, "invariances", "--instance", CANON)
    assert rep["results"]["partitions"] == [[0, 0, 1, 1]]
    _, rep, _ = run(capsys, "invariances", "--instance", CANON, "--domains", "e1,e2")
    assert [0, 0, 0, 0] in rep["results"]["partitions"]
    _, rep, _ = run(capsys, "characterize", "--instance", CANON)
    assert rep["results"]["partitions"] == [[0, 0, 1, 1]]


def test_witness(capsys):
    code, rep, _ = run(capsys, "witness", "--instance", CANON, "--phi", "x2-projection")
    assert code == 0
    assert rep["results"]["conditional_a"] == "1/1" and rep["results"]["conditional_b"] == "0/1"
    _, rep, _ = run(capsys, "witness", "--instance", CANON, "--phi", "x1-projection")
    assert rep["results"]["outcome"] == "factors"


def test_solve_irm(capsys):
    code, rep, _ = run(capsys, "solve-irm", "--instance", CANON)
    assert code == 0 and rep["results"]["pooled_risk"]["exact"] == "12/25"
    (m,) = rep["results"]["minimizers"]
    assert m["phi"] == [0, 0, 1, 1]
    assert [v["exact"] for v in m["head"][0]] == ["1/5"]


def test_check_conditions(capsys):
    _, rep, _ = run(capsys, "check-conditions", "--instance", CANON, "--domains", "e1,e2")
    assert rep["results"]["conditions"]["i"]["status"] == "fails"
    assert rep["results"]["conditions"]["i"]["evidence"] == [0, 0, 0, 0]
    assert not rep["results"]["all_hold"]


def test_verify_expect_holds(capsys):
    code, rep, _ = run(capsys, "verify", "--instance", CANON, "--loss", "least-square", "--expect-holds")
    assert code == 0 and rep["results"]["min_ood_risk"]["exact"] == "4/25"


def test_verify_expectation_failure_exits_1(capsys, tmp_path):
    doc = canonical()
    inst = doc.instance
    same = Domain.product(inst, [1, 0], lambda i1, j: [0, 1] if j == 0 else [1, 0])
    flip = Domain.product(inst, [1, 0], lambda i1, j: [1, 0] if j == 0 else [0, 1])
    p = tmp_path / "uncovered.toml"
    save_document(InstanceDocument(inst, {"a": same, "b": flip}, ("a", "b")), p)
    code, rep, _ = run(capsys, "verify", "--instance", str(p), "--expect-holds")
    assert code == 1 and rep["results"]["inclusion_holds"] is False
    assert rep["results"]["offending_ood_risk"]["exact"] == "13/25"
    code, _, _ = run(capsys, "verify", "--instance", str(p))
    assert code == 0


def test_empty_invariance_set_is_exit_2(capsys, tmp_path):
    p = tmp_path / "tiny.toml"
    save_document(canonical(h_size=1), p)
    code, _, err = run(capsys, "solve-irm", "--instance", str(p))
    assert code == 2 and err


def test_mine_small(capsys):
    code, rep, _ = run(capsys, "mine", "--seed", "7", "--trials", "40", "--break", "none", "--expect-empty")
    assert code == 0 and rep["results"]["violations"] == 0
    assert rep["instance_digest"] is None
    code, rep, _ = run(capsys, "mine", "--seed", "7", "--trials", "60", "--break", "ii", "--expect-empty")
    assert code == 1 and rep["results"]["violations"] >= 1


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["risk", "--instance", "missing.toml"], "No such file"),
        (["risk", "--instance", CANON, "--domain", "e9"], "unknown domain"),
        (["risk", "--instance", CANON, "--phi", "constant", "--head", "1;2"], "cell value"),
        (["ood-risk", "--instance", CANON, "--loss", "cross-entropy"], "loss"),
        (["witness", "--instance", CANON, "--phi", "0,1"], ""),
        (["mine", "--trials", "-1"], "non-negative"),
    ],
)
def test_input_errors_exit_2(capsys, argv, fragment):
    code, rep, err = run(capsys, *argv)
    assert code == 2 and rep is None and fragment in err


@pytest.mark.parametrize("argv", [["bogus"], ["verify", "--instance", CANON, "--nope"], ["mine", "--break", "iii"]])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "usage:" in capsys.readouterr().err


def test_module_entry_point_and_determinism():
    argv = [sys.executable, "-m", "irmlab", "verify", "--instance", CANON, "--expect-holds"]
    a = subprocess.run(argv, capture_output=True, check=True)
    b = subprocess.run(argv, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout.endswith(b"\n")
    bad = subprocess.run([sys.executable, "-m", "irmlab", "--bogus"], capture_output=True)
    assert bad.returncode == 2 and b"usage" in bad.stderr

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from acbm.class_f import class_template
from acbm.cli import main
from acbm.curvature import build_pi_and_L
from acbm.hypersurface import example_fixture
from acbm.serialize import tensor_document
from acbm.structure import canonical_structure


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc.to_json())
    return str(path)


def test_selftest_n2(capsys):
    code, out, _ = run(capsys, "selftest", "--n", "2", "--seed", "7", "--samples", "50")
    report = json.loads(out)
    assert code == 0
    assert report["passed"] and len(report["checks"]) >= 30


def test_selftest_n3_skips_only_decomposition(capsys):
    code, out, _ = run(capsys, "selftest", "--n", "3", "--samples", "10")
    report = json.loads(out)
    skipped = {k for k, v in report["checks"].items() if v["status"].startswith("skipped")}
    assert code == 0
    assert skipped == {"sections.decomposition", "sections.basis_independence", "sections.nu_of_associated"}


def test_selftest_bad_flags(capsys):
    assert run(capsys, "selftest", "--n", "0")[0] == 2
    assert run(capsys, "selftest", "--n", "two")[0] == 2


def test_selftest_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("ACBM_SEED", "5")
    _, out, _ = run(capsys, "selftest", "--n", "1", "--samples", "5")
    assert json.loads(out)["seed"] == 5
    _, out, _ = run(capsys, "selftest", "--n", "1", "--samples", "5", "--seed", "3")
    assert json.loads(out)["seed"] == 3
    monkeypatch.setenv("ACBM_SEED", "abc")
    assert run(capsys, "selftest", "--n", "1")[0] == 2


def test_classify_f11(capsys, tmp_path, rng):
    s = canonical_structure(2)
    omega = rng.standard_normal(5)
    omega[-1] = 0.0
    path = write(tmp_path, "f11.json", tensor_document("f_tensor", class_template("F11", s, omega).F, s))
    code, out, _ = run(capsys, "classify", path)
    report = json.loads(out)
    assert code == 0
    assert report["residuals"]["F11"] < 1e-10
    assert report["members"] == ["F11"]


def test_classify_zero(capsys, tmp_path):
    s = canonical_structure(2)
    path = write(tmp_path, "zero.json", tensor_document("f_tensor", np.zeros((5, 5, 5)), s))
    code, out, _ = run(capsys, "classify", path)
    assert code == 0 and "F0" in json.loads(out)["members"]


def test_classify_bad_inputs(capsys, tmp_path, rng):
    s = canonical_structure(2)
    raw = json.loads(tensor_document("f_tensor", np.zeros((5, 5, 5)), s).to_json())
    raw["payload"] = raw["payload"][:-1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw))
    assert run(capsys, "classify", str(bad))[0] == 2
    assert run(capsys, "classify", str(tmp_path / "missing.json"))[0] == 2
    broken = write(tmp_path, "broken.json", tensor_document("f_tensor", rng.standard_normal((5, 5, 5)), s))
    code, out, _ = run(capsys, "classify", broken)
    assert code == 1 and "error" in json.loads(out)


def test_decompose(capsys, tmp_path):
    s = canonical_structure(2)
    cb = build_pi_and_L(s)
    path = write(tmp_path, "L.json", tensor_document("curv_tensor", 3 * cb.L1 - 2 * cb.L2, s))
    code, out, _ = run(capsys, "decompose", path)
    report = json.loads(out)
    assert code == 0
    assert report["nu"] == pytest.approx(3.0) and report["nu_star"] == pytest.approx(-2.0)

    K = example_fixture(2, math.acosh(math.sqrt(2))).K
    path = write(tmp_path, "K.json", tensor_document("curv_tensor", K, s))
    report = json.loads(run(capsys, "decompose", path)[1])
    assert report["nu"] == pytest.approx(0.5, abs=1e-12)
    assert report["nu_star"] == pytest.approx(0.0, abs=1e-12)


def test_decompose_failures(capsys, tmp_path):
    s = canonical_structure(2)
    path = write(tmp_path, "pi1.json", tensor_document("curv_tensor", build_pi_and_L(s).pi[0], s))
    code, out, _ = run(capsys, "decompose", path)
    assert code == 1 and "NotPhiKaehler" in json.loads(out)["error"]
    s3 = canonical_structure(3)
    path = write(tmp_path, "L3.json", tensor_document("curv_tensor", build_pi_and_L(s3).L1, s3))
    assert run(capsys, "decompose", path)[0] == 2
    path = write(tmp_path, "f.json", tensor_document("f_tensor", np.zeros((5, 5, 5)), s))
    assert run(capsys, "decompose", path)[0] == 2


def test_example(capsys):
    code, out, _ = run(capsys, "example", "--n", "2", "--t-min", "0.5", "--t-max", "2", "--steps", "16")
    assert code == 0 and json.loads(out)["passed"]
    assert run(capsys, "example", "--n", "2", "--t-min", "0")[0] == 2
    code, out, _ = run(capsys, "example", "--n", "3", "--steps", "3")
    assert code == 0
    assert "decomposition skipped (dimension is not 5)" in json.loads(out)["notes"]


def test_example_bad_ranges(capsys):
    assert run(capsys, "example", "--t-min", "2", "--t-max", "1")[0] == 2
    assert run(capsys, "example", "--steps", "0")[0] == 2
    assert run(capsys, "example", "--n", "1")[0] == 2
    assert run(capsys, "example", "--fd-step", "-1")[0] == 2


def test_random_f5_classifies(capsys, tmp_path):
    out = str(tmp_path / "f5.json")
    assert run(capsys, "random", "--kind", "f_tensor", "--class", "F5", "--n", "2", "--seed", "1", "--out", out)[0] == 0
    code, report, _ = run(capsys, "classify", out)
    assert code == 0 and json.loads(report)["members"] == ["F5"]


def test_random_curv_decomposes(capsys, tmp_path):
    out = str(tmp_path / "L.json")
    assert run(capsys, "random", "--kind", "curv_tensor", "--n", "2", "--seed", "1", "--out", out)[0] == 0
    code, report, _ = run(capsys, "decompose", out)
    assert code == 0 and json.loads(report)["residual"] < 1e-9


@pytest.mark.parametrize("argv", [
    ["random", "--kind", "f_tensor", "--class", "F7"],
    ["random", "--kind", "f_tensor"],
    ["random", "--kind", "structure", "--class", "F1"],
    ["random", "--kind", "curv_tensor", "--class", "F1"],
    ["random", "--kind", "torsion", "--class", "F0"],
    ["random", "--kind", "spinor"],
    ["random", "--kind", "curv_tensor", "--n", "4"],
])
def test_random_unsupported(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_random_is_byte_identical(capsys, tmp_path):
    for kind, extra in (("structure", []), ("f_tensor", ["--class", "F1"]), ("torsion", []), ("curv_tensor", [])):
        a, b = tmp_path / f"{kind}_a.json", tmp_path / f"{kind}_b.json"
        for path in (a, b):
            assert run(capsys, "random", "--kind", kind, *extra, "--seed", "9", "--out", str(path))[0] == 0
        assert a.read_bytes() == b.read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "acbm.cli", "selftest", "--n", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "--n must be >= 1" in proc.stderr

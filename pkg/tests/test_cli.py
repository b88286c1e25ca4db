import json
import re

import numpy as np
import pytest

from chacon.automorphism import GridPermutation, grid_permutation_of
from chacon.cli import exact, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_build_small_maps(capsys, tmp_path):
    code, out = run(capsys, "build", "--n", "1")
    assert code == 0 and out.rstrip().endswith("3 1\n2 4")
    path = tmp_path / "u2.perm"
    code, out = run(capsys, "build", "--n", "2", "--out", str(path))
    assert code == 0
    pi = GridPermutation.from_bytes(path.read_bytes())
    assert pi.size == 16
    assert (tmp_path / "u2.perm.pieces.json").exists()
    assert json.loads(out[:out.rindex("}") + 1])["cycle_type"] == {"1": 1, "15": 1}


def test_build_n6(capsys, tmp_path):
    code, out = run(capsys, "build", "--n", "6", "--out", str(tmp_path / "u6.json"), "--format", "json")
    assert code == 0
    pi = GridPermutation.from_json((tmp_path / "u6.json").read_text())
    assert np.array_equal(np.sort(pi.forward), np.arange(4096))


def test_build_rejects_coarse_resolution(capsys):
    assert main(["build", "--n", "3", "--m", "2"]) == 2
    assert main(["build", "--n", "13"]) == 2


def test_verify_range(capsys):
    code, out = run(capsys, "verify", "--n-range", "1..5")
    rows = json.loads(out)
    assert code == 0
    assert rows[0]["direct_vs_recursive"] == "base case, direct only"
    assert all(r["status"] == "pass" for r in rows)


def test_verify_output_round_trip_and_corruption(capsys, tmp_path):
    good = tmp_path / "u3.perm"
    main(["build", "--n", "3", "--m", "4", "--out", str(good)])
    capsys.readouterr()
    code, out = run(capsys, "verify", "--perm", str(good), "--n", "3")
    assert code == 0 and json.loads(out)[0]["first_difference"] is None
    pi = GridPermutation.from_bytes(good.read_bytes())
    f = pi.forward.copy()
    f[[10, 20]] = f[[20, 10]]
    bad = tmp_path / "bad.perm"
    bad.write_bytes(GridPermutation(4, f).to_bytes())
    code, out = run(capsys, "verify", "--perm", str(bad), "--n", "3")
    assert code == 1 and json.loads(out)[0]["first_difference"] == 10


def test_witness(capsys):
    code, out = run(capsys, "witness", "--n", "2", "--k", "2", "3", "4")
    rows = json.loads(out)
    assert code == 0
    assert rows[0]["ratio"] == "1/2^2"


def test_mixing_and_guard(capsys):
    code, out = run(capsys, "mixing", "--n", "5", "--N", "64", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "j,intersection,cesaro_partial"
    assert len(out.splitlines()) == 65
    assert main(["mixing", "--n", "4", "--N", "128"]) == 1
    assert main(["mixing", "--n", "4", "--A", "17:1:1:1", "--N", "10"]) == 2


def test_field_rotation(capsys):
    code, out = run(capsys, "field", "rotation", "--a", "1", "--b", "1", "--g", "1024")
    est = json.loads(out)[0]
    assert code == 0 and abs(est["tv"] - 8) < 0.08


def test_flow_eval(capsys):
    # cell 0 of the 4x4 grid goes to cell 2 under U_2
    assert grid_permutation_of(2, 2)(0) == 2
    code, out = run(capsys, "flow-eval", "--n-max", "2", "--point", "1/8,7/8", "--t0", "1/4")
    assert code == 0 and json.loads(out)["image"] == ["5/2^3", "7/2^3"]
    assert main(["flow-eval", "--n-max", "2", "--point", "1/3,0"]) == 2


def test_render(capsys, tmp_path):
    code, out = run(capsys, "render", "configuration", "--matrix", "[[1,2],[3,4]]")
    assert code == 0 and out.startswith("<svg") and out.count("<rect") == 4
    # row 1 is on top: label 1 is drawn above label 3
    y1 = float(re.search(r'<text x="[^"]*" y="([^"]*)"[^>]*>1</text>', out).group(1))
    y3 = float(re.search(r'<text x="[^"]*" y="([^"]*)"[^>]*>3</text>', out).group(1))
    assert y1 < y3
    for target in ("partition", "column"):
        path = tmp_path / f"{target}.svg"
        assert main(["render", target, "--n", "3", "--out", str(path)]) == 0
        assert path.read_text().startswith("<svg")
    assert main(["render", "movement", "--move", "R-(4,1)", "--out", str(tmp_path / "m.svg")]) == 0
    assert main(["render", "movement", "--move", "nonsense"]) == 2


def test_chacon1d(capsys):
    code, out = run(capsys, "chacon1d", "--n", "2")
    data = json.loads(out)
    assert code == 0 and data["heights"] == [1, 4, 13]
    assert data["spacer"] == ["26/27", "80/81"]


def test_exact_format():
    assert exact("3/8") == "3/2^3"
    assert exact("2/9") == "2/9"


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 2

import json
import re

import pytest
from click.testing import CliRunner

from fbl.cli import main


def run_cli(*args):
    runner = CliRunner()
    return runner.invoke(main, list(args))


def payload(result):
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    data.pop("timestamp", None)
    return data


def test_eval_command():
    res = run_cli("eval", "--space", "1:2", "|d([1,0])|", "--at", "[-2,5]")
    assert payload(res)["value"] == 2.0

    res = run_cli("eval", "--space", "2:2", "d([3,-4])", "--at", "[1,0]")
    assert payload(res)["value"] == 3.0


def test_eval_syntax_error_exit_2():
    res = run_cli("eval", "--space", "1:2", "d([1,0", "--at", "[1,0]")
    assert res.exit_code == 2


def test_eval_verify():
    res = run_cli(
        "eval", "--space", "1:2", "|d([1,0])| /\\ d([0,1])", "--at", "[3,1]",
        "--verify",
    )
    data = payload(res)
    assert data["value"] == 1.0
    assert data["verification"]["ok"]


def test_norm_linear_case():
    res = run_cli("norm", "--space", "1:2", "d([3,-4])", "--mmax", "1",
                  "--restarts", "2")
    data = payload(res)
    assert data["result"]["lower"] == pytest.approx(7.0, abs=1e-6)
    assert data["result"]["upper"] == pytest.approx(7.0, abs=1e-12)
    assert data["result"]["certificate"]


def test_norm_exact_l1():
    res = run_cli(
        "norm", "--space", "1:2", "--exact-l1", "|d([1,0])| /\\ |d([0,1])|"
    )
    data = payload(res)
    assert data["result"]["value"] == pytest.approx(1.0, abs=1e-9)
    assert data["result"]["phi"] == pytest.approx([0.5, 0.5], abs=1e-7)


def test_norm_gphi_gap_contract():
    res = run_cli("norm", "--space", "2:3", "gphi:[1,1,1]", "--mmax", "3",
                  "--restarts", "3")
    data = payload(res)
    assert data["result"]["lower"] <= data["result"]["upper"] + 1e-9
    assert data["result"]["upper"] == 3.0


def test_norm_verify_flag():
    res = run_cli("norm", "--space", "1:2", "gphi:[1,-2]", "--mmax", "2",
                  "--restarts", "2", "--verify")
    data = payload(res)
    assert data["verification"]["ok"]


def test_determinism_identical_payloads():
    args = ("norm", "--space", "2:2", "|d([1,-1])| \\/ |d([0.3,1])|",
            "--seed", "7", "--mmax", "3", "--restarts", "3")
    a = run_cli(*args)
    b = run_cli(*args)
    strip = lambda out: re.sub(r'"timestamp": "[^"]*"', '"timestamp": "X"', out)
    assert strip(a.output) == strip(b.output)


def test_seed_changes_search_path_not_soundness():
    vals = []
    for seed in ("1", "2"):
        res = run_cli("norm", "--space", "2:2", "|d([1,-1])|", "--seed", seed,
                      "--mmax", "2", "--restarts", "2")
        data = payload(res)
        vals.append(data["result"]["lower"])
        assert data["result"]["lower"] <= data["result"]["upper"] + 1e-9
    assert vals[0] == pytest.approx(vals[1], abs=1e-6)


def test_extend_command():
    res = run_cli(
        "extend", "--space", "1:2", "--codomain", "1:2",
        "--matrix", "[[1,0],[0,1]]", "|d([1,-1])|", "--verify",
    )
    data = payload(res)
    assert data["result"]["values"] == [1.0, 1.0]
    assert data["result"]["via"] == "diff_of_joins"
    assert data["result"]["hom_lower_bound"] == pytest.approx(2.0, abs=1e-12)
    assert data["verification"]["ok"]


def test_rk_command():
    res = run_cli("rk", "--ystar", "[1,1]", "--us", "[[2,0],[0,3]]")
    assert payload(res)["value"] == pytest.approx(5.0, abs=1e-9)


def test_majorant_command():
    res = run_cli(
        "majorant", "--space", "1:2", "|d([1,0])| /\\ |d([0,1])|", "--verify"
    )
    data = payload(res)
    assert data["result"]["constant"] == pytest.approx(1.0, abs=1e-3)
    assert data["verification"]["ok"]


def test_nakano_family_command():
    res = run_cli(
        "nakano", "--space", "1:2",
        "--family", '["|d([1,0])|", "|d([0,1])|"]', "--verify",
    )
    data = payload(res)
    assert data["result"]["value"] == pytest.approx(2.0, abs=1e-6)
    assert data["result"]["phi"] == pytest.approx([1.0, 1.0], abs=1e-6)
    assert data["verification"]["ok"]


def test_nakano_check_command():
    res = run_cli("nakano", "--space", "1:2", "--check", "gphi:[1,1]")
    data = payload(res)
    assert data["result"] == {
        "monotone": True, "superadditive": True, "flat_norm": True
    }


def test_nakano_gphi_norm():
    res = run_cli("nakano", "--gphi", "[3,-4]")
    assert payload(res)["result"]["norm"] == 7.0


def test_nakano_needs_a_mode():
    res = run_cli("nakano")
    assert res.exit_code == 2


def test_example_harmonic():
    res = run_cli("example", "harmonic", "--N", "4")
    data = payload(res)
    assert data["result"]["lower"] == pytest.approx(25 / 12, abs=1e-12)
    assert data["result"]["expected"] == "25/12"
    assert len(data["growth"]) == 4


def test_example_harmonic_csv():
    res = run_cli("example", "harmonic", "--N", "3", "--format", "csv")
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert lines[0] == "N,lower,expected"
    assert len(lines) == 4


def test_example_distance():
    res = run_cli("example", "distance", "--n", "2")
    data = payload(res)
    assert data["result"]["bound"] >= 7 / 24 - 1e-12
    assert data["result"]["cancellation"] == 0.0


def test_example_distance_with_g():
    res = run_cli(
        "example", "distance", "--n", "2", "--g", "|d([1,0,0,0])|", "--verify"
    )
    data = payload(res)
    assert data["result"]["bound"] >= 7 / 24 - 1e-12
    assert data["verification"]["ok"]


def test_example_fatou():
    res = run_cli(
        "example", "fatou", "--grid", "4", "--gscale", "1.5",
        "--samples", "200",
    )
    data = payload(res)
    assert data["result"]["sup_fn"] <= 1 + 1e-6
    assert data["result"]["g"] >= 1.5 - 1e-6


def test_example_rademacher():
    res = run_cli(
        "example", "rademacher", "--gamma", "4", "--p", "2",
        "--A", "1,3", "--grid", "6",
    )
    data = payload(res)
    assert data["result"]["pairings"] == [1, 0, 1, 0]

    res = run_cli(
        "example", "rademacher", "--gamma", "4", "--p", "2", "--A", "1,3",
        "--a", "1,-2,3,-4", "--grid", "6", "--verify",
    )
    data = payload(res)
    assert data["result"]["bound"] == 5.0
    assert data["verification"]["ok"]


def test_example_interval():
    res = run_cli(
        "example", "interval", "--space", "1:3", "--f", "0",
        "--g", "|d([1,0,0])|", "--us", "[[0,1,0],[0,0,1]]",
    )
    data = payload(res)
    assert data["result"]["lowers"][0][1] >= 1.0 - 1e-9


def test_out_file(tmp_path):
    target = tmp_path / "report.json"
    res = run_cli(
        "eval", "--space", "1:2", "d([1,0])", "--at", "[2,0]",
        "--out", str(target),
    )
    assert res.exit_code == 0
    data = json.loads(target.read_text())
    assert data["value"] == 2.0


def test_invariant_failure_exits_3():
    # a majorant constant strictly above the supplied proxy trips exit 3
    res = run_cli("majorant", "--space", "1:2", "--proxy", "0.2",
                  "|d([1,0])| \\/ |d([0,1])|")
    assert res.exit_code == 3

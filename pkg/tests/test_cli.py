from __future__ import annotations

import json
from fractions import Fraction

import pytest

import main
from balance.core.poset import antichain, chain, e_poset
from balance.models.schemas import BalanceReport
from balance.services.family import tn_delta


def _run(capsys, *argv: str) -> tuple[int, str]:
    code = main.run(list(argv))
    return code, capsys.readouterr().out


def test_delta_of_e(capsys, poset_file) -> None:
    code, out = _run(capsys, "delta", str(poset_file(e_poset())))
    assert code == 0
    assert out.strip() == "delta = 1/3 (~0.333333), witness (a2, b1)"


def test_delta_cross_check(capsys, poset_file) -> None:
    code, out = _run(capsys, "delta", "--method", "both", str(poset_file(e_poset())))
    assert code == 0
    assert "delta = 1/3" in out


def test_delta_of_a_chain(capsys, poset_file) -> None:
    code, out = _run(capsys, "delta", str(poset_file(chain(4))))
    assert code == 0
    assert out.strip() == "delta = 0 (~0.000000), no incomparable pair"


def test_delta_json(capsys, poset_file) -> None:
    code, out = _run(capsys, "--json", "delta", str(poset_file(e_poset())))
    assert code == 0
    payload = json.loads(out)
    assert payload["grid"]["delta"] == "1/3"
    assert payload["grid"]["witness_cell"] == [2, 1]


def test_oracle_handles_wide_posets(capsys, poset_file) -> None:
    path = str(poset_file(antichain(3)))
    code, out = _run(capsys, "oracle", path)
    assert (code, out.strip()) == (0, "e(P) = 6")
    code, out = _run(capsys, "delta", "--method", "oracle", path)
    assert code == 0
    assert out.strip() == "delta = 1/2 (~0.500000), witness (0, 1)"


def test_input_errors_exit_with_one(capsys, poset_file, tmp_path) -> None:
    assert main.run(["delta", str(poset_file(antichain(3)))]) == 1
    assert main.run(["delta", str(poset_file("poset x\n", name="bad.txt"))]) == 1
    assert main.run(["delta", str(tmp_path / "missing.txt")]) == 1
    assert main.run(["tn", "--n", "0"]) == 1
    assert "width 3" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["tn", "--n", "abc"],
        ["tn"],
        ["delta", "poset.txt", "--method", "bogus"],
        ["search", "--jobs", "two"],
    ],
)
def test_malformed_arguments_exit_with_one(capsys, argv) -> None:
    with pytest.raises(SystemExit) as exit_info:
        main.run(argv)
    assert exit_info.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_global_flags_after_the_subcommand(capsys) -> None:
    code, out = _run(capsys, "tn", "--n", "1", "--json")
    assert code == 0
    assert json.loads(out)["delta"] == str(tn_delta(1))
    code, out = _run(capsys, "tn", "-v", "--n", "1")
    assert code == 0
    assert out.startswith("delta(T_1) = ")


def test_disagreement_exits_with_two(capsys, poset_file, monkeypatch) -> None:
    wrong = BalanceReport(delta=Fraction(1, 2), extension_count=3, method="oracle")
    monkeypatch.setattr(main, "delta_oracle", lambda poset: wrong)
    code, _ = _run(capsys, "delta", "--method", "both", str(poset_file(e_poset())))
    assert code == 2


def test_probabilities_and_grid(capsys, poset_file) -> None:
    path = str(poset_file(e_poset()))
    code, out = _run(capsys, "--json", "probabilities", path)
    assert code == 0
    assert json.loads(out) == [["2/3"], ["1/3"]]
    code, out = _run(capsys, "grid", path)
    assert code == 0
    assert out.rstrip("\n") == "* +\n .\n* *\n .\n+ *"


def test_tn(capsys) -> None:
    code, out = _run(capsys, "tn", "--n", "1")
    assert code == 0
    assert out.splitlines()[0].startswith(f"delta(T_1) = {tn_delta(1)} (~0.3")


@pytest.mark.slow
def test_verify_appendix(capsys) -> None:
    code, out = _run(capsys, "verify-appendix", "--n", "1")
    assert code == 0
    lines = out.splitlines()
    assert "CHECK top-corner - PASS" in lines
    assert "CHECK recurrence 1 PASS" in lines
    assert not any(line.endswith("FAIL") for line in lines)


@pytest.mark.slow
def test_verify_cases(capsys) -> None:
    code, out = _run(capsys, "verify-cases")
    assert code == 0
    lines = [line for line in out.splitlines() if line.startswith("CASE ")]
    assert len(lines) == 9
    assert lines[0] == "CASE 1 BOUND 2/5 STATUS PASS"
    assert lines[7] == "CASE 8 BOUND 9/23 STATUS PASS"
    assert lines[8] == "CASE 9 BOUND (-3/52 + 5/52*sqrt(17)) STATUS PASS"


def test_search(capsys, tmp_path) -> None:
    cache = tmp_path / "cache.tsv"
    code, out = _run(capsys, "search", "--max-size", "3", "--cache", str(cache))
    assert code == 0
    records = [line.split("\t") for line in out.splitlines() if line.count("\t") == 2]
    assert len(records) == 7
    assert {fields[1] for fields in records} == {"0", "1/3", "1/2"}
    assert len(cache.read_text().splitlines()) == 7

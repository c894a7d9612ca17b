import json

import pytest

from gkmc.cli import main
from gkmc.bisim import check_witness, witness_from_document
from gkmc.model import PointedModel, load_model, load_model_file

from conftest import fixture_path


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


DE_DICTO_SENTENCE = "([] exists x. ?[r] x & (~ exists x. [] ?[r] x & [] ?[r] #c))"


# --- validate ------------------------------------------------------------


def test_validate_fixture(capsys):
    code, out = run(capsys, "validate", fixture_path("de_dicto.gkm.json"))
    assert code == 0
    assert "valid" in out


def test_validate_unreadable_file(capsys):
    code, _ = run(capsys, "validate", "/nonexistent/q.gkm.json")
    assert code == 2


def test_validate_truncated_file(capsys, tmp_path):
    bad = tmp_path / "bad.gkm.json"
    bad.write_text('{"worlds": ["s0"')
    code, out = run(capsys, "validate", str(bad))
    assert code == 2
    assert "format" in out


def test_validate_tracking_gap(capsys, tmp_path):
    doc = {
        "worlds": ["s0"],
        "children": {"n1": {"worlds": ["t0"]}},
        "tracking": {},
    }
    path = tmp_path / "gap.gkm.json"
    path.write_text(json.dumps(doc))
    code, out = run(capsys, "validate", str(path))
    assert code == 1
    assert "T-total" in out


# --- eval ----------------------------------------------------------------


def test_eval_de_dicto_at_s0(capsys):
    code, _ = run(capsys, "eval", fixture_path("de_dicto.gkm.json"), DE_DICTO_SENTENCE, "--world", "s0")
    assert code == 0


def test_eval_fails_at_s2(capsys):
    code, _ = run(capsys, "eval", fixture_path("de_dicto.gkm.json"), DE_DICTO_SENTENCE, "--world", "s2")
    assert code == 1


def test_eval_top_lists_all_worlds(capsys):
    code, out = run(capsys, "eval", fixture_path("de_dicto.gkm.json"), "T")
    assert code == 0
    assert json.loads(out) == ["s0", "s1", "s2"]


def test_eval_non_sentence_diagnosed(capsys):
    code, out = run(capsys, "eval", fixture_path("de_dicto.gkm.json"), "xi X. X")
    assert code == 2
    assert "C1-free-var" in out
    assert "C2-xi-subformula" in out


def test_eval_unknown_name_rejected(capsys):
    code, out = run(capsys, "eval", fixture_path("de_dicto.gkm.json"), "zzz")
    assert code == 2
    assert "zzz" in out


def test_eval_unknown_world(capsys):
    code, _ = run(capsys, "eval", fixture_path("de_dicto.gkm.json"), "T", "--world", "zz")
    assert code == 2


def test_eval_vocab_override(capsys, tmp_path):
    vocab = tmp_path / "vocab.json"
    vocab.write_text('{"props": ["r", "extra"], "constants": ["c"]}')
    code, _ = run(capsys, "eval", fixture_path("de_dicto.gkm.json"), "extra | T", "--vocab", str(vocab))
    assert code == 0


# --- bisim ---------------------------------------------------------------


def test_bisim_same_pointed_model(capsys, tmp_path):
    witness_file = tmp_path / "witness.json"
    code, _ = run(
        capsys,
        "bisim",
        fixture_path("de_dicto.gkm.json"), "s0",
        fixture_path("de_dicto.gkm.json"), "s0",
        "--witness", str(witness_file),
    )
    assert code == 0
    m = load_model_file(fixture_path("de_dicto.gkm.json"))
    witness = witness_from_document(json.loads(witness_file.read_text()))
    assert check_witness(PointedModel(m, "s0"), PointedModel(m, "s0"), witness).ok


def test_bisim_different_models(capsys):
    code, _ = run(
        capsys,
        "bisim",
        fixture_path("de_dicto.gkm.json"), "s0",
        fixture_path("waitall.gkm.json"), "s0",
    )
    assert code == 1


def test_bisim_with_oracle_agreement(capsys, tmp_path):
    doc = {"worlds": ["w0"], "valuation": {"p": ["w0"]}}
    path = tmp_path / "one.gkm.json"
    path.write_text(json.dumps(doc))
    code, _ = run(capsys, "bisim", str(path), "w0", str(path), "w0", "--oracle")
    assert code == 0


def test_bisim_budget_exhausted_is_unknown(capsys):
    code, out = run(
        capsys,
        "bisim",
        fixture_path("de_dicto.gkm.json"), "s0",
        fixture_path("de_dicto.gkm.json"), "s0",
        "--budget", "0",
    )
    assert code == 3
    assert "unknown" in out


def test_bisim_env_budget(capsys, monkeypatch):
    monkeypatch.setenv("GKMC_BISIM_BUDGET", "0")
    code, _ = run(
        capsys,
        "bisim",
        fixture_path("de_dicto.gkm.json"), "s0",
        fixture_path("de_dicto.gkm.json"), "s0",
    )
    assert code == 3


def test_bisim_vocab_containment(capsys, tmp_path):
    vocab = tmp_path / "vocab.json"
    vocab.write_text('{"props": [], "constants": []}')
    code, out = run(
        capsys,
        "bisim",
        fixture_path("de_dicto.gkm.json"), "s0",
        fixture_path("de_dicto.gkm.json"), "s0",
        "--vocab", str(vocab),
    )
    assert code == 2
    assert "outside the vocabulary" in out


# --- distinguish -----------------------------------------------------------


def test_distinguish_prop_difference(capsys, tmp_path):
    a = tmp_path / "a.gkm.json"
    b = tmp_path / "b.gkm.json"
    a.write_text(json.dumps({"worlds": ["w0"], "valuation": {"p": ["w0"]}}))
    b.write_text(json.dumps({"worlds": ["w0"], "valuation": {"p": []}}))
    code, out = run(capsys, "distinguish", str(a), "w0", str(b), "w0", "--max-depth", "2")
    assert code == 0
    assert out.strip() in ("p", "~p")


def test_distinguish_identical_exhausts(capsys):
    code, out = run(
        capsys,
        "distinguish",
        fixture_path("de_dicto.gkm.json"), "s0",
        fixture_path("de_dicto.gkm.json"), "s0",
        "--max-depth", "2",
    )
    assert code == 3
    assert "not a bisimilarity proof" in out


# --- gen / fmt -------------------------------------------------------------


def test_gen_emits_loadable_document(capsys):
    code, out = run(capsys, "gen", "--seed", "11", "--max-worlds", "3")
    assert code == 0
    m = load_model(out)
    assert m.worlds


def test_gen_deterministic(capsys):
    _, first = run(capsys, "gen", "--seed", "4")
    _, second = run(capsys, "gen", "--seed", "4")
    assert first == second


def test_gen_to_file(capsys, tmp_path):
    target = tmp_path / "out.gkm.json"
    code, _ = run(capsys, "gen", "--seed", "2", "-o", str(target))
    assert code == 0
    assert load_model(target.read_text()).worlds


def test_fmt_canonicalizes(capsys):
    code, out = run(capsys, "fmt", "xi X.forall x.?[X] x")
    assert code == 0
    assert out.strip() == "xi X. forall x. ?[X] x"


def test_fmt_parse_error(capsys):
    code, _ = run(capsys, "fmt", "p & & q")
    assert code == 2


# --- json mode --------------------------------------------------------------


def test_json_mode_is_bit_stable(capsys):
    args = ("--json", "eval", fixture_path("de_dicto.gkm.json"), DE_DICTO_SENTENCE, "--world", "s0")
    code1, out1 = run(capsys, *args)
    code2, out2 = run(capsys, *args)
    assert (code1, out1) == (code2, out2)
    payload = json.loads(out1)
    assert payload["holds"] is True
    assert payload["world"] == "s0"


def test_json_mode_single_line(capsys):
    _, out = run(capsys, "--json", "validate", fixture_path("waitall.gkm.json"))
    assert out.count("\n") == 1
    assert json.loads(out) == {"valid": True}


def test_exit_codes_never_conflate_unknown(capsys):
    # code 3 is reserved for budget exhaustion; a definite "not bisimilar" stays 1
    code, _ = run(
        capsys,
        "bisim",
        fixture_path("de_dicto.gkm.json"), "s0",
        fixture_path("deadlock.gkm.json"), "s0",
    )
    assert code == 1

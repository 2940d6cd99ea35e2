import json

import pytest

from fmw.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def corpus(corpus_path):
    return str(corpus_path)


def test_check_holds_and_fails(capsys, corpus):
    code, out, _ = run(capsys, "check", corpus, "--structure", "Z2", "--formula", "comm")
    assert code == 0 and out.startswith("holds")
    code, out, _ = run(capsys, "check", corpus, "--structure", "LeftProj", "--formula", "|- m(x,y)=m(y,x)")
    assert code == 1 and "x=0, y=1" in out


def test_class_check(capsys, corpus):
    code, _, _ = run(capsys, "class-check", corpus, "--class", "Z2,Z3,Z4", "--formula", "assoc")
    assert code == 0
    code, _, _ = run(capsys, "class-check", corpus, "--class", "Z2,LeftProj", "--formula", "comm")
    assert code == 1


def test_witness_commands(capsys, corpus):
    code, out, _ = run(capsys, "malcev", corpus, "--structure", "P_edge", "--class", "S_sym")
    assert code == 1 and "r(x,y) |- r(y,x)" in out
    code, out, _ = run(capsys, "birkhoff", corpus, "--structure", "LeftProj", "--class", "Z2", "--json")
    doc = json.loads(out)
    assert code == 1 and doc["formula"] == "|- m(x,y)=m(y,x)" and doc["falsifying"] == {"x": 0, "y": 1}
    code, out, _ = run(capsys, "birkhoff", corpus, "--structure", "Z2", "--class", "Z4")
    assert code == 0 and "embedded" in out
    code, out, _ = run(capsys, "malcev", corpus, "--structure", "P_edge", "--class", "Path3", "--faithful")
    assert code == 0 and "⟨{1,3,5,7,9}⟩" in out


def test_filter_command(capsys):
    code, out, _ = run(capsys, "filter", "--n", "3", "--gens", "{0,1};{1,2}")
    assert code == 0
    assert out.splitlines() == ["filter ⟨{1}⟩ over 3 indices", "members: {1} {0,1} {1,2} {0,1,2}"]
    code, out, err = run(capsys, "filter", "--n", "3", "--gens", "{0};{1}")
    assert code == 2 and out == "" and err.strip() == "fmw: FIP violation: {0}∩{1}=∅"


def test_quotient_and_embed(capsys, corpus):
    code, out, _ = run(capsys, "quotient", corpus, "--structure", "Z2", "--target", "Z4", "--json")
    assert code == 0 and json.loads(out)["surjection"] == [0, 1, 0, 1]
    code, out, _ = run(capsys, "quotient", corpus, "--structure", "Z2", "--target", "Z3")
    assert code == 1 and "pairing conflict" in out
    code, out, _ = run(capsys, "embed", corpus, "--structure", "Z2", "--target", "Z4", "--constants", "0,2")
    assert code == 0 and "[0, 2]" in out
    code, out, _ = run(capsys, "embed", corpus, "--structure", "P_edge", "--target", "S_sym")
    assert code == 1 and "¬r(ȧ1,ȧ0)" in out


def test_structures_and_products(capsys, corpus):
    code, out, _ = run(capsys, "unit", corpus, "--signature", "Graph")
    assert code == 0 and "rel r = {(0,0)};" in out
    code, out, _ = run(capsys, "product", corpus, "--factors", "Z2,Z3", "--json")
    assert code == 0 and json.loads(out)["size"] == 6
    code, out, _ = run(capsys, "rprod", corpus, "--factors", "P_edge,S_loop", "--filter", "{1}", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["size"] == 1 and doc["relations"]["r"] == [[0, 0]]
    code, out, _ = run(capsys, "diagram", corpus, "--structure", "P_edge")
    assert "diag⁺(P_edge): 1 sentence" in out and "¬(ȧ0=ȧ1)" in out


def test_hom_command(capsys, corpus):
    code, out, _ = run(capsys, "hom", corpus, "--source", "Z4", "--target", "Z2")
    assert code == 0 and "[0, 0, 0, 0]" in out
    code, out, _ = run(capsys, "hom", corpus, "--source", "P_edge", "--target", "S_sym", "--map", "0,0")
    assert code == 1 and "r not preserved at r(0,1)" in out
    code, _, _ = run(capsys, "hom", corpus, "--source", "S_sym", "--target", "P_edge", "--kind", "embedding")
    assert code == 1


def test_audits_and_axiomatize(capsys, corpus):
    code, out, _ = run(capsys, "los-audit", corpus, "--factors", "P_edge,S_sym", "--filter", "{1}", "--vars", "3")
    assert code == 0 and "no violations" in out
    code, out, _ = run(capsys, "strict-audit", corpus, "--class", "P_edge", "--no-unit")
    assert "r(x,x) |- false" in out
    code, out, _ = run(capsys, "strict-audit", corpus, "--class", "P_edge")
    assert code == 0 and "0 non-strict" in out
    code, out, _ = run(capsys, "axiomatize", corpus, "--class", "Z2", "--kind", "identity", "--negatives", "0")
    assert code == 0 and "|- m(x,y)=m(y,x)" in out.splitlines()


def test_verify_command(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "diagram", "--seed", "1", "--cases", "10")
    assert code == 0 and out.startswith("suite diagram (seed 1): 10/10 passed")


def test_errors_and_caps(capsys, corpus, tmp_path):
    code, _, err = run(capsys, "check", corpus, "--structure", "Nope", "--formula", "comm")
    assert code == 2 and err.startswith("fmw: ")
    code, _, err = run(capsys, "product", corpus, "--factors", "Z4,Z4,Z4", "--max-product", "10")
    assert code == 3 and "resource cap" in err
    code, _, _ = run(capsys, "check", str(tmp_path / "missing.fmw"), "--structure", "Z2", "--formula", "comm")
    assert code == 2
    bad = tmp_path / "bad.fmw"
    bad.write_text("signature G { rel r/2; }\nstructure S : G { universe 0; rel r = {}; }\n")
    code, _, err = run(capsys, "diagram", str(bad), "--structure", "S")
    assert code == 2
    with pytest.raises(SystemExit) as info:
        main(["malcev"])
    assert info.value.code == 2

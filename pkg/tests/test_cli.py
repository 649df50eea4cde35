import json
import subprocess
import sys

from conftest import DATA
from realsyn.cli import main


def run(capsys, *args):
    code = main(["run", *map(str, args)])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_intro_pessimistic(capsys):
    code, out, _ = run(capsys, DATA / "intro.sk", "--json")
    report = json.loads(out)
    assert code == 0
    assert report["program"] == "x=1; y=1; assert(x==1&&y==1)"
    assert report["oracle_confirmed"] is True
    for key in ("verdict", "program", "vc_checks", "syn_checks", "vc_ms", "syn_ms", "precondition"):
        assert key in report


def test_doomed_choice_exits_1_with_witness(capsys):
    code, out, _ = run(capsys, DATA / "doomed_choice.sk", "--json")
    report = json.loads(out)
    assert code == 1 and report["verdict"] == "unrealizable"
    assert report["witness"][0]["unjustified"] == "{x=0}"
    assert report["witness"][0]["node"].startswith("0.1")


def test_treiber_pop_optimistic(capsys):
    code, out, _ = run(capsys, DATA / "treiber_pop.sk", "--mode", "optimistic", "--json")
    report = json.loads(out)
    assert code == 0
    inserted = sorted(i["program"] for i in report["insertions"])
    assert inserted == ["@inv active(TOS)", "@inv active(TOS)", "in:protect(top); re:protect(top)"]
    assert report["annotations_to_discharge_separately"] == ["@inv active(TOS)", "@inv active(TOS)"]


def test_outline_flag(capsys):
    code, out, _ = run(capsys, DATA / "factorial.sk", "--json", "--emit-outline")
    report = json.loads(out)
    assert code == 0 and report["outline"]["kind"] == "seq"
    assert report["outline"]["first"]["invariant"]


def test_usage_and_parse_errors(capsys, tmp_path):
    assert run(capsys, tmp_path / "missing.sk")[0] == 2
    bad = tmp_path / "bad.sk"
    bad.write_text("domain finite; vars x:0..1; sketch { x = }")
    code, _, err = run(capsys, bad)
    assert code == 2 and "1:" in err
    assert run(capsys, DATA / "intro.sk", "--target", "7")[0] == 2
    assert run(capsys, DATA / "intro.sk", "--domain", "smr")[0] == 2


def test_target_all(capsys):
    code, out, _ = run(capsys, DATA / "intro.sk", "--target", "all", "--json")
    report = json.loads(out)
    assert code == 0 and len(report["targets"]) == 1


def test_optimistic_abort_is_distinguished(capsys):
    code, out, _ = run(capsys, DATA / "doomed_choice.sk", "--mode", "optimistic", "--json")
    assert code == 1 and json.loads(out)["verdict"] == "not synthesized (outline unvalidated)"


def test_reports_are_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        assert run(capsys, DATA / "treiber_pop.sk", "--out", path, "--emit-outline")[0] == 0
        report = json.loads(path.read_text())
        for key in ("vc_ms", "syn_ms"):
            report.pop(key)
        outs.append(json.dumps(report, sort_keys=True))
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "realsyn", "run", str(DATA / "treiber_push.sk")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict: realized" in proc.stdout


def test_recursive_grammar_is_reported(capsys, tmp_path):
    path = tmp_path / "rec.sk"
    path.write_text("domain finite; vars x:0..2; grammar N ::= x = x + 1 | x = x + 1; N;"
                    "pre { x=0 } post { x=2 } sketch { N }")
    code, out, _ = run(capsys, path, "--json")
    report = json.loads(out)
    assert code == 0 and report["recursive_nonterminals"] == ["N"]
    assert report["program"] == "x=x+1; x=x+1"

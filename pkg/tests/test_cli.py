import json
from pathlib import Path

import pytest

from yangw import cli

GOLDEN = Path(__file__).parent / "golden"
CASES = ["p1_1", "p2_2", "p3_3", "p4_1", "p2_1"]


def _load(path):
    return json.loads(Path(path).read_text())


@pytest.mark.parametrize("case", CASES)
def test_golden_reports(case, tmp_path, capsys):
    out = tmp_path / "r.json"
    code = cli.main(["run", "--config", str(GOLDEN / f"{case}.cfg"), "--report", str(out)])
    assert code == 0
    got = cli.strip_timings(_load(out))
    assert got == _load(GOLDEN / f"{case}.json")
    assert set(_load(out)["timings"]) == set(got["config"]["checks"])


def test_golden_main_identity_verdicts():
    rep = _load(GOLDEN / "p4_1.json")
    mi = next(c for c in rep["checks"] if c["check"] == "main-identity")
    assert mi["a_convention_verdicts"] == {"theorem": False, "proof": False,
                                           "negated-theorem": True, "negated": True}
    assert mi["status"] == "exact pass"


def test_relations_on_21_is_usage_error(capsys):
    assert cli.main(["check-relations", "--partition", "2,1"]) == 2
    assert "no Yangian factor" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["check-ev", "--n", "2"],
    ["check-dzero"],
    ["check-dzero", "--partition", "1,2"],
    ["check-ev", "--mode", "random", "--points", "1"],
    ["check-ev", "--cutoff", "-1"],
    ["check-commutativity", "--partition", "4,1"],
    ["check-emb", "--partition", "2,1,1"],
    ["run"],
])
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == 2


def test_exit_codes_pass_and_fail(capsys):
    assert cli.main(["check-ev", "--n", "3", "--cutoff", "1"]) == 0
    assert cli.main(["check-ev", "--n", "3", "--cutoff", "1", "--perturb"]) == 1
    assert "fail" in capsys.readouterr().out


def test_random_mode_status_and_determinism(tmp_path, capsys):
    reps = []
    for i in range(2):
        out = tmp_path / f"{i}.json"
        cli.main(["check-dzero", "--partition", "2,1", "--mode", "random", "--seed", "7",
                  "--points", "2", "--report", str(out)])
        reps.append(out.read_text())
    a, b = (cli.strip_timings(json.loads(r)) for r in reps)
    assert a == b
    assert a["checks"][0]["status"] == "probabilistic pass"
    assert len(a["checks"][0]["suites"]) == 2


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nchecks = ev, coproduct\nn = 4\ncutoff = 1  # low\nperturb = yes\n")
    vals = cli.load_config(cfg)
    assert vals == {"checks": ["ev", "coproduct"], "n": 4, "cutoff": 1, "perturb": True}
    args = cli.build_parser().parse_args(["run", "--config", str(cfg), "--cutoff", "2"])
    rc = cli.config_from_args(args)
    assert rc.cutoff == 2 and rc.n == 4 and rc.checks == ["ev", "coproduct"]


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("colour = red\n")
    with pytest.raises(cli.UsageError):
        cli.load_config(cfg)
    assert cli.main(["run", "--config", str(cfg)]) == 2


def test_emit_generators_11(tmp_path):
    out = tmp_path / "g.json"
    assert cli.main(["emit", "generators", "--partition", "1,1", "--out", str(out)]) == 0
    data = _load(out)
    w2 = next(g for g in data["cdet"] if g["label"] == "W~2[1,1]")
    assert sorted(map(tuple, w2["state"])) == [
        ("E(1,1)[-1] E(2,2)[-1] |0>", "1/1"),
        ("E(2,1)[-1] |0>", "1/1"),
        ("E(2,2)[-2] |0>", "1/1*k + 1/1"),
    ]
    again = tmp_path / "g2.json"
    cli.main(["wgen", "--partition", "1,1", "--out", str(again)])
    assert again.read_text() == out.read_text()


def test_emit_opes_33(tmp_path):
    out = tmp_path / "o.json"
    assert cli.main(["emit", "opes", "--partition", "3,3", "--out", str(out)]) == 0
    rows = _load(out)["opes"]
    assert len(rows) == (2 * 9) ** 2
    w11 = next(r for r in rows if r["left"] == "W1[1,1]" and r["right"] == "W1[1,1]")
    assert [o["pole"] for o in w11["ope"]] == [2]


def test_emit_delta_terms_41(capsys):
    assert cli.main(["emit", "delta-terms", "--partition", "4,1", "--format", "latex"]) == 0
    text = capsys.readouterr().out
    assert text.count("D: ") == 4
    assert "E^(1)_{1,4} t^(-s-1) E^(1)_{4,1} t^(s+1)" in text


def test_perturbations_listing(capsys):
    assert cli.main(["perturbations"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [ln.split(":")[0] for ln in lines] == list(cli.CHECKS)

import json
import os
from pathlib import Path

import jsonschema
import pytest

from graphmc.cli import main

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"
SCHEMAS = HERE.parent / "schemas"
EX1 = ["--graph", str(DATA / "ex1_graph.json"), "--dist", str(DATA / "ex1_mu.json")]
SPLIT = ["--graph", str(DATA / "split_graph.json"), "--dist", str(DATA / "split_dist.json")]
PATH5 = ["--graph", str(DATA / "path5_graph.json"), "--dist", str(DATA / "path5_dist.json")]


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


GOLDEN_CASES = {
    "classify": (["classify", *EX1], "classify"),
    "plan_paper": (["plan", *EX1, "--schedule", "paper"], "plan"),
    "plan_epsilon": (["plan", *EX1, "--epsilon", "0.05"], "plan"),
    "kernel": (["kernel", *EX1], "kernel"),
    "kernel_k20": (["kernel", *EX1, "--k", "20"], "kernel"),
    "dobrushin_k4": (["dobrushin", *EX1, "--k", "4"], "lemma"),
    "simulate_epsilon": (["simulate", *EX1, "--epsilon", "0.05", "--steps", "10000",
                          "--seed", "3", "--checkpoints", "100,1000,10000"], "report"),
    "simulate_practical": (["simulate", *EX1, "--schedule", str(DATA / "practical_schedule.json"),
                            "--steps", "50000", "--seed", "1"], "report"),
    "counterexample": (["counterexample", "--replicas", "20", "--steps", "500"], "counterexample"),
}


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden(capsys, name):
    argv, sch = GOLDEN_CASES[name]
    code, out, _ = invoke(capsys, *argv)
    assert code == 0
    jsonschema.validate(json.loads(out), schema(sch))
    path = GOLDEN / f"{name}.json"
    if os.environ.get("GRAPHMC_REGEN_GOLDEN"):
        path.write_text(out)
    assert out == path.read_text()


def test_classify_example(capsys):
    code, out, _ = invoke(capsys, "classify", *EX1)
    assert code == 0 and json.loads(out)["case"] == "SUPPORT_IN_ONE_COMPONENT"


def test_dobrushin_example(capsys):
    code, out, _ = invoke(capsys, "dobrushin", *EX1, "--k", "4")
    rep = json.loads(out)
    assert code == 0 and rep["holds"] is True and rep["N"] == 4


def test_split_exit_codes(capsys):
    code, out, _ = invoke(capsys, "classify", *SPLIT)
    assert code == 3 and json.loads(out)["case"] == "SUPPORT_SPLIT"
    code, out, _ = invoke(capsys, "plan", *SPLIT)
    assert code == 3 and json.loads(out)["mode"] == "INFEASIBLE"
    jsonschema.validate(json.loads(out), schema("plan"))
    code, out, err = invoke(capsys, "simulate", *SPLIT, "--steps", "10")
    assert code == 3 and out == ""
    jsonschema.validate(json.loads(err), schema("error"))
    assert json.loads(err)["error"] == "InfeasiblePlan"


@pytest.mark.parametrize("argv", [
    ["simulate", *EX1],                                    # needs schedule or epsilon
    ["simulate", *EX1, "--epsilon", "0.1", "--schedule", "paper"],
    ["simulate", *EX1, "--epsilon", "1.5"],
    ["simulate", *EX1, "--steps", "0", "--epsilon", "0.1"],
    ["dobrushin", *EX1, "--k", "2"],                       # k must exceed kbar
    ["plan", *EX1, "--schedule", "growth:-1"],
    ["kernel", "--graph", str(DATA / "missing.json"), "--dist", str(DATA / "ex1_mu.json")],
    ["classify", "--graph", str(DATA / "ex1_graph.json"), "--dist", str(DATA / "split_dist.json")],
    ["simulate", *EX1, "--mode", "epsilon", "--schedule", "paper"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 2 and out == ""


def test_structured_error_on_stderr(capsys):
    code, _, err = invoke(capsys, "dobrushin", *EX1, "--k", "2")
    obj = json.loads(err)
    jsonschema.validate(obj, schema("error"))
    assert obj["error"] == "InvalidK"


def test_byte_identical_reruns(capsys):
    argv = ["simulate", *PATH5, "--steps", "20000", "--seed", "9", "--replicas", "3"]
    _, a, _ = invoke(capsys, *argv)
    _, b, _ = invoke(capsys, *argv)
    assert a == b
    jsonschema.validate(json.loads(a), schema("report"))
    assert json.loads(a)["pooled"]["steps"] == 60000


def test_out_file_and_csv(capsys, tmp_path):
    target = tmp_path / "k.csv"
    code, out, _ = invoke(capsys, "kernel", *EX1, "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    rows = target.read_text().splitlines()
    assert rows[0] == "from,s1,s2,s3,s4" and len(rows) == 5


def test_trace_file(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    code, _, _ = invoke(capsys, "simulate", *PATH5, "--steps", "500", "--trace", str(trace))
    assert code == 0
    rows = trace.read_text().splitlines()
    assert rows[0] == "time,state" and len(rows) == 501
    assert rows[1].startswith("0,")


def test_product_command(capsys):
    code, out, _ = invoke(capsys, "product", "--spec", str(DATA / "product_k2.json"),
                          "--steps", "50000", "--seed", "2")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, schema("product"))
    assert rep["joint"]["consistency_violations"] == 0
    assert rep["joint"]["labels"] == ["(a0,b0)", "(a0,b1)", "(a1,b0)", "(a1,b1)"]


def test_input_files_match_schemas():
    for f in DATA.glob("*_graph.json"):
        jsonschema.validate(json.loads(f.read_text()), schema("graph"))
    for f in list(DATA.glob("*_dist.json")) + [DATA / "ex1_mu.json"]:
        jsonschema.validate(json.loads(f.read_text()), schema("distribution"))
    jsonschema.validate(json.loads((DATA / "product_k2.json").read_text()), schema("product_spec"))
    jsonschema.validate(json.loads((DATA / "practical_schedule.json").read_text()),
                        schema("schedule_file"))

import json

import pytest

import main
from src.core.abstractions import ExitCode, JobSpec, Verb
from src.core.orchestrator import EngineOrchestrator

SMALL_SUITES = """
selftest_seed: 7
axiom_instances: 3
pavelka_formulas: 4
oracle_formulas: 4
oracle_points: 2
bookkeeping_pairs: 4
integral_formulas: 4
sandwich_max_index: 4
limit_upto: 4
duality_polyhedra: 2
mvgen_generators: 4
consequence_checks: 4
max_depth: 3
max_arity: 2
"""


@pytest.fixture
def run(tmp_path, capsys):
    """Run main() against a private config and return (exit code, stdout)."""
    config = tmp_path / "config.yaml"
    config.write_text(SMALL_SUITES, encoding="utf-8")

    def invoke(*argv):
        code = main.main(list(argv) + ["--config", str(config)])
        return code, capsys.readouterr().out
    return invoke


def test_truth_degree_report(run):
    """Exact truth degree with witness and seed, compact JSON on one line."""
    code, out = run("truth-degree", "-e", "v1 \\/ ~v1")
    assert code == ExitCode.OK
    assert out == '{"kind":"exact","value":"1/2","witness":["1/2"],"seed":7}\n'


def test_integral_report(run):
    """The integral state of v1 ⊕ v1 is 3/4."""
    code, out = run("integral", "-e", "v1 + v1")
    assert code == ExitCode.OK
    assert json.loads(out)["value"] == "3/4"


def test_reports_are_deterministic(run):
    """Repeated runs give byte-identical output."""
    first = run("unit-norm", "-e", "v1 . ~v2 \\/ delta[1/3] v2", "--seed", "3")
    second = run("unit-norm", "-e", "v1 . ~v2 \\/ delta[1/3] v2", "--seed", "3")
    assert first == second
    assert json.loads(first[1])["seed"] == 3


def test_csv_output(run):
    """CSV reports carry one header line and one row."""
    code, out = run("truth-degree", "-e", "v1 \\/ ~v1", "--format", "csv")
    assert code == ExitCode.OK
    assert out == "kind,value,witness,seed\nexact,1/2,1/2,7\n"


def test_eval_needs_a_point(run):
    """Formulas with variables are evaluated at an explicit point."""
    code, out = run("eval", "-e", "v1 + v2", "--point", "1/3,1/2")
    assert code == ExitCode.OK
    assert json.loads(out)["value"] == "5/6"
    assert run("eval", "-e", "v1")[0] == ExitCode.VALIDATION


def test_real_formula_gives_interval(run):
    """RL degrees are enclosures at the requested index."""
    code, out = run("unit-norm", "-e", "delta[sqrt2_over_2] v1", "--precision", "10")
    report = json.loads(out)
    assert code == ExitCode.OK
    assert report["kind"] == "interval"
    assert report["precision"] == 10


def test_consequence_verbs(run):
    """Countermodels and models are reported as p/q lists."""
    code, out = run("consequence", "--premise", "v1 + v1", "-e", "v1")
    assert code == ExitCode.OK
    assert json.loads(out) == {"verdict": "no", "value": "1/2", "witness": ["1/2"], "seed": 7}
    code, out = run("consistent", "--premise", "v1", "--premise", "~v1")
    assert json.loads(out)["consistent"] is False


def test_limit_check_verb(run, tmp_path):
    """A ramp sequence read from a spec file meets its rate."""
    spec = tmp_path / "ramp.json"
    spec.write_text(json.dumps({"kind": "scalar-ramp", "formula": "eta[q]", "schedule": "1-2^-n",
                                "rate": "1-2^-n", "target": "eta[1]"}), encoding="utf-8")
    code, out = run("limit-check", "--sequence", str(spec), "--upto", "5")
    report = json.loads(out)
    assert code == ExitCode.OK
    assert report["holds"] is True
    assert [row["delta"] for row in report["rows"]] == ["1", "1/2", "1/4", "1/8", "1/16", "1/32"]


def test_zeroset_and_dump(run, tmp_path):
    """The zero set of ¬(v1 ⊕ v1) is [1/2,1]; --dump-pwl writes the compiled function."""
    dump = tmp_path / "f.json"
    code, out = run("zeroset", "-e", "~(v1 + v1)", "--dump-pwl", str(dump))
    assert code == ExitCode.OK
    assert json.loads(out)["polyhedron"] == {"dim": 1, "simplices": [[["1/2"], ["1"]]]}
    assert json.loads(dump.read_text(encoding="utf-8"))["dim"] == 1


def test_mvgen_verb(run):
    """x/2 is generated by x with multiplier 2."""
    code, out = run("mvgen", "-e", "delta[1/2] v1")
    report = json.loads(out)
    assert code == ExitCode.OK
    assert report["verdict"] == "yes"
    assert report["multiplier"] == 2
    assert all(report["certificate"].values())


def test_subst_check_verb(run, tmp_path):
    """The first non-integer image is named."""
    path = tmp_path / "subst.json"
    path.write_text(json.dumps({"v1": "v1 + v2", "v2": "delta[1/2] v1"}), encoding="utf-8")
    code, out = run("subst-check", "-f", str(path))
    assert code == ExitCode.OK
    assert json.loads(out)["offender"] == "v2"


def test_syntax_error_exit_code(run):
    """Malformed formulas exit with 1 and print no report."""
    code, out = run("truth-degree", "-e", "v1 +")
    assert code == ExitCode.VALIDATION
    assert out == ""


def test_cell_cap_exit_code(run):
    """Refinements beyond --cap exit with 2."""
    code, _ = run("truth-degree", "-e", "v1 + v1", "--cap", "1")
    assert code == ExitCode.CELL_CAP


def test_argument_errors_exit_with_one(run):
    """Unknown verbs and conflicting flags are validation errors."""
    assert run("frobnicate")[0] == ExitCode.VALIDATION
    assert run("truth-degree", "-e", "v1", "-f", "x.txt")[0] == ExitCode.VALIDATION


def test_selftest_verb(run):
    """A small axiom suite passes and reports its counts."""
    code, out = run("selftest", "--suite", "axioms")
    report = json.loads(out)
    assert code == ExitCode.OK
    assert report["passed"] is True
    assert report["suites"][0]["suite"] == "axioms"


def test_audit_depth_reaches_the_registry(tmp_path):
    """The configured audit depth is used for every registry real."""
    config = tmp_path / "config.yaml"
    config.write_text("audit_depth: 5\n", encoding="utf-8")
    orchestrator = EngineOrchestrator(str(config))
    assert orchestrator.initialize()
    registry = orchestrator._get_registry(JobSpec(Verb.EVAL))
    assert registry["sqrt2_over_2"].audit_depth == 5

"""Tests for config parsing, experiment orchestration, and table emission."""

import io
import json

import pytest
from numpy.testing import assert_allclose

from tsvar import (
    ConfigError,
    EquationKind,
    ExperimentConfig,
    ProblemKind,
    ResultRow,
    emit_table,
    main,
    parse_config,
    run_table,
)

ALL_KINDS = (
    ProblemKind.DELTA_DELTA,
    ProblemKind.NABLA_NABLA,
    ProblemKind.DELTA_NABLA,
    ProblemKind.NABLA_DELTA,
)


def run_cli(argv):
    buffer = io.StringIO()
    code = main(argv, stdout=buffer)
    return code, buffer.getvalue()


# ---------------------------------------------------------------------------
# config parsing


def test_empty_config_resolves_to_defaults():
    cfg = parse_config("")
    assert cfg.params.discount_rate == 0.05
    assert cfg.params.horizon == 3
    assert (cfg.params.y_initial, cfg.params.y_terminal) == (2.0, 3.0)
    assert cfg.problems == ALL_KINDS
    assert cfg.equations == tuple(EquationKind)
    assert cfg.output_format == "csv"
    assert not cfg.multistart and cfg.guesses == ()


def test_config_overrides_and_comments():
    cfg = parse_config(
        "# sweep scenario\n"
        "[params]\n"
        "rho = 0.02   # discount\n"
        "[solver]\n"
        "tol = 1e-10\n"
        "max_iter = 25\n"
        "[run]\n"
        "problems = dn, nd\n"
        "equations = el1\n"
        "guess = 2.3,2.7; 1.5,2.2\n"
        "multistart = true\n"
        "grid = 1.0, 3.0, 1.0\n"
        "format = json\n"
        "output = table.json\n"
    )
    assert cfg.params.discount_rate == 0.02
    assert cfg.solver.tol_residual == 1e-10
    assert cfg.solver.max_iterations == 25
    assert cfg.problems == (ProblemKind.DELTA_NABLA, ProblemKind.NABLA_DELTA)
    assert cfg.equations == (EquationKind.TIMESCALE_EL1,)
    assert cfg.guesses == ((2.3, 2.7), (1.5, 2.2))
    assert cfg.multistart and cfg.grid == (1.0, 3.0, 1.0)
    assert cfg.output_format == "json" and cfg.output_path == "table.json"


def test_case_sensitive_keys_keep_both_constants():
    cfg = parse_config("[params]\nb = 9\nB = 7\n")
    assert cfg.params.b == 9.0
    assert cfg.params.B == 7.0


def test_invalid_rho_is_named():
    with pytest.raises(ConfigError, match="rho"):
        parse_config("[params]\nrho = -1\n")


def test_unknown_key_and_section_are_named():
    with pytest.raises(ConfigError, match="whoops"):
        parse_config("[params]\nwhoops = 1\n")
    with pytest.raises(ConfigError, match="extras"):
        parse_config("[extras]\nx = 1\n")
    with pytest.raises(ConfigError, match="tolerance"):
        parse_config("[solver]\ntolerance = 1e-9\n")


def test_malformed_line_reports_line_number():
    with pytest.raises(ConfigError, match="line *2"):
        parse_config("[params]\nrho 0.05\n")


def test_non_numeric_value_is_rejected():
    with pytest.raises(ConfigError, match="horizon"):
        parse_config("[params]\nhorizon = soon\n")
    with pytest.raises(ConfigError, match="multistart"):
        parse_config("[run]\nmultistart = perhaps\n")
    with pytest.raises(ConfigError, match="grid"):
        parse_config("[run]\ngrid = 1.0, 2.0\n")


def test_config_invariants():
    with pytest.raises(ConfigError, match="problems"):
        ExperimentConfig(problems=())
    with pytest.raises(ConfigError, match="equations"):
        ExperimentConfig(equations=())
    with pytest.raises(ConfigError, match="format"):
        ExperimentConfig(output_format="yaml")


# ---------------------------------------------------------------------------
# orchestration


def test_single_kind_run_matches_worked_value():
    cfg = parse_config("[run]\nproblems = dd\n")
    rows = run_table(cfg)
    assert len(rows) == 1
    row = rows[0]
    assert row.kind is ProblemKind.DELTA_DELTA
    assert row.equation is None and row.equation_label == "all"
    assert row.converged
    assert_allclose(row.functional, -16.97843026, atol=1e-6)


def test_full_run_emits_eight_rows_in_fixed_order():
    rows = run_table(parse_config(""))
    labels = [(r.kind.value, r.equation_label) for r in rows]
    assert labels == [
        ("dd", "all"),
        ("nn", "all"),
        ("dn", "direct"),
        ("dn", "el1"),
        ("dn", "el2"),
        ("nd", "direct"),
        ("nd", "el1"),
        ("nd", "el2"),
    ]
    assert all(r.converged for r in rows)


def test_run_table_is_deterministic():
    cfg = parse_config("[run]\nproblems = dn\n")
    first = run_table(cfg)
    second = run_table(cfg)
    assert [(r.root, r.functional) for r in first] == [
        (r.root, r.functional) for r in second
    ]


def test_equation_subset_never_moves_pure_kind_rows():
    full = run_table(parse_config("[run]\nproblems = nn\n"))
    only_el2 = run_table(parse_config("[run]\nproblems = nn\nequations = el2\n"))
    assert_allclose(only_el2[0].functional, full[0].functional, rtol=0)
    assert_allclose(only_el2[0].root, full[0].root, rtol=0)


def test_failed_cells_are_reported_and_the_run_continues():
    # one Newton step from this start leaves the feasible set, and with
    # damping disabled the cell cannot recover
    cfg = parse_config(
        "[solver]\nmax_iter = 3\nmax_halvings = 0\n"
        "[run]\nproblems = dd, nn\nguess = 7.0,7.9\n"
    )
    rows = run_table(cfg)
    assert len(rows) == 2
    assert not all(r.converged for r in rows)
    failed = [r for r in rows if not r.converged]
    assert all(r.functional is None for r in failed)


def test_guess_dimension_mismatch_is_rejected():
    cfg = parse_config("[run]\nguess = 2.0,2.5,3.0\n")
    with pytest.raises(ConfigError, match="coordinates"):
        run_table(cfg)


def test_result_row_guards_functional_presence():
    with pytest.raises(ValueError):
        ResultRow(
            kind=ProblemKind.DELTA_DELTA,
            equation=None,
            root=(2.0, 2.5),
            functional=-1.0,
            converged=False,
            iterations=3,
        )


# ---------------------------------------------------------------------------
# emission


def sample_rows():
    return [
        ResultRow(ProblemKind.DELTA_DELTA, None, (2.322251305, 2.679109439),
                  -16.97843024, True, 3),
        ResultRow(ProblemKind.DELTA_NABLA, EquationKind.DIRECT,
                  (2.910488554, 2.97001718), -10.11399052, True, 3),
        ResultRow(ProblemKind.DELTA_NABLA, EquationKind.TIMESCALE_EL1,
                  (7.0, 7.9), None, False, 3),
    ]


def test_csv_layout_and_line_endings():
    text = emit_table(sample_rows(), "csv")
    lines = text.split("\n")
    assert lines[0] == "kind,equation,y_values,functional,converged,iterations"
    assert lines[1] == "dd,all,2.322251305;2.679109439,-16.97843024,true,3"
    assert lines[2] == "dn,direct,2.910488554;2.97001718,-10.11399052,true,3"
    assert lines[3] == "dn,el1,7;7.9,,false,3"
    assert text.endswith("\n") and "\r" not in text


def test_single_row_csv_is_header_plus_one_line():
    text = emit_table(sample_rows()[:1], "csv")
    assert len(text.strip().split("\n")) == 2


def test_csv_round_trips_ten_significant_digits():
    rows = run_table(parse_config("[run]\nproblems = dn\nequations = direct\n"))
    text = emit_table(rows, "csv")
    record = text.strip().split("\n")[1].split(",")
    assert float(record[3]) == float(f"{rows[0].functional:.10g}")
    back = [float(v) for v in record[2].split(";")]
    for printed, original in zip(back, rows[0].root):
        assert printed == float(f"{original:.10g}")


def test_json_round_trips_without_loss():
    text = emit_table(sample_rows(), "json")
    parsed = json.loads(text)
    assert [row["kind"] for row in parsed] == ["dd", "dn", "dn"]
    assert parsed[0]["functional"] == float(f"{-16.97843024:.10g}")
    assert parsed[2]["functional"] is None
    assert parsed[0]["y_values"] == [2.322251305, 2.679109439]
    assert json.loads(emit_table(sample_rows(), "json")) == parsed


def test_markdown_matrix_layout():
    text = emit_table(sample_rows(), "markdown")
    lines = text.strip().split("\n")
    assert lines[0] == "| problem | direct | EL1 | EL2 |"
    assert lines[2].startswith("| ΔΔ |")
    # the shared pure-kind value fills all three equation columns
    assert lines[2].count("-16.97843024") == 3
    dn_line = lines[3]
    assert "-10.11399052" in dn_line and "did not converge" in dn_line


def test_emit_rejects_empty_rows_and_bad_format():
    with pytest.raises(ValueError):
        emit_table([], "csv")
    with pytest.raises(ValueError):
        emit_table(sample_rows(), "yaml")


def test_emission_sorts_rows_deterministically():
    rows = list(reversed(sample_rows()))
    text = emit_table(rows, "csv")
    lines = text.strip().split("\n")
    assert lines[1].startswith("dd,") and lines[2].startswith("dn,direct")


# ---------------------------------------------------------------------------
# entry point


def test_table1_command_exits_zero_with_csv():
    code, text = run_cli(["table1"])
    assert code == 0
    lines = text.strip().split("\n")
    assert lines[0] == "kind,equation,y_values,functional,converged,iterations"
    assert len(lines) == 9


def test_table2_command_applies_the_low_rate_preset():
    code, text = run_cli(["table2"])
    assert code == 0
    dd_line = text.strip().split("\n")[1]
    assert_allclose(float(dd_line.split(",")[3]), -19.03571446, atol=1e-6)


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "sweep.ini"
    path.write_text("[params]\nrho = 0.03\n[run]\nproblems = dd\n")
    code, text = run_cli(["run", "--config", str(path), "--rho", "0.05"])
    assert code == 0
    assert_allclose(float(text.strip().split("\n")[1].split(",")[3]),
                    -16.97843026, atol=1e-6)


def test_output_flag_writes_the_file(tmp_path):
    path = tmp_path / "out.csv"
    code, text = run_cli(["table1", "--format", "json", "--output", str(path)])
    assert code == 0
    assert text == ""
    parsed = json.loads(path.read_text())
    assert len(parsed) == 8


def test_config_errors_exit_with_two(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[params]\nrho = -1\n")
    code, _ = run_cli(["run", "--config", str(path)])
    assert code == 2
    code, _ = run_cli(["run", "--config", str(tmp_path / "missing.ini")])
    assert code == 2


def test_unconverged_rows_exit_with_one():
    code, text = run_cli(["run", "--problem", "dd", "--guess", "7.0,1.0",
                          "--max-iter", "2"])
    assert code == 1
    assert ",false," in text

import csv
import io
import logging

import numpy as np
import pytest

from coillink.cli import (EXIT_COMPUTATION, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, build_parser,
                          load_config, main)
from coillink.logger import configure_logging, use_color


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_pte_of_one_preset(capsys):
    code, out, _ = _run(capsys, "pte", "--preset", "flat")
    assert code == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 1
    assert rows[0]["preset"] == "flat"
    assert 0.38 <= float(rows[0]["pte"]) <= 0.41


def test_pte_lists_every_preset(capsys):
    code, out, _ = _run(capsys, "pte")
    assert code == EXIT_OK
    assert [row["preset"] for row in _rows(out)] == ["bended", "flat"]


def test_impedance(capsys):
    code, out, _ = _run(capsys, "impedance", "--k", "0.05")
    assert code == EXIT_OK
    rows = _rows(out)
    assert [row["load"] for row in rows] == ["light", "heavy"]
    assert float(rows[1]["i1_magnitude"]) > float(rows[0]["i1_magnitude"])


def test_sweep_with_parasitic_changes_sign_once(capsys):
    code, out, _ = _run(capsys, "sweep-k", "--cp", "12p")
    assert code == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 200
    k = np.array([float(row["k"]) for row in rows])
    delta = np.array([float(row["delta_i1"]) for row in rows])
    changes = np.flatnonzero(np.sign(delta[:-1]) != np.sign(delta[1:]))
    assert len(changes) == 1
    assert 0.04 <= k[changes[0]] <= 0.06


def test_sweep_options(capsys):
    code, out, _ = _run(capsys, "sweep-k", "--k", "0.02:0.1", "--points", "9", "--scale", "log")
    assert code == EXIT_OK
    k = [float(row["k"]) for row in _rows(out)]
    assert len(k) == 9
    assert k[0] == pytest.approx(0.02) and k[-1] == pytest.approx(0.1)


def test_flip_threshold_without_parasitic(capsys):
    code, out, _ = _run(capsys, "flip-threshold", "--cp", "0")
    assert code == EXIT_OK
    assert _rows(out)[0]["k_star"] == "none"


def test_flip_threshold_with_primary_error(capsys):
    code, out, _ = _run(capsys, "flip-threshold", "--cp", "12p", "--cs1-error", "1%")
    assert code == EXIT_OK
    assert 0.08 <= float(_rows(out)[0]["k_star"]) <= 0.10


def test_corrected_primary_capacitor(capsys):
    code, out, _ = _run(capsys, "flip-threshold", "--cp", "12p", "--cs1", "17.03p",
                        "--k", "0.03:0.2")
    assert code == EXIT_OK
    assert _rows(out)[0]["flipped"] == "false"


def test_decode(capsys):
    code, out, _ = _run(capsys, "decode", "--cp", "12p", "--cs1-error", "1", "--k", "0.06",
                        "--bit-period", "10u")
    assert code == EXIT_OK
    rows = _rows(out)
    assert [row["decoded"] for row in rows] == ["0", "1", "0", "1"]
    assert rows[0]["polarity_flipped"] == "true"


def test_invalid_coupling_range(capsys):
    code, _, err = _run(capsys, "sweep-k", "--k", "1.5:2")
    assert code == EXIT_VALIDATION
    assert "invalid input" in err


def test_range_where_single_coupling_expected(capsys):
    code, _, _ = _run(capsys, "impedance", "--k", "0.01:0.2")
    assert code == EXIT_VALIDATION


def test_constant_pattern_cannot_be_decoded(capsys):
    code, _, err = _run(capsys, "decode", "--pattern", "0000", "--bit-period", "2u")
    assert code == EXIT_COMPUTATION
    assert "computation failed" in err


@pytest.mark.parametrize("argv", [
    ["sweep-k", "--svg"],
    ["reproduce"],
    ["sweep-k", "--cp", "twelve"],
    ["transient", "--pattern", "10x"],
    ["pte", "--cs1", "17p", "--cs1-error", "1"],
    ["resonate"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_USAGE


def test_output_files_are_deterministic(tmp_path):
    first, second = tmp_path / "a" / "sweep.csv", tmp_path / "b" / "sweep.csv"
    assert main(["sweep-k", "--cp", "12p", "--points", "40", "--out", str(first), "--svg"]) == 0
    assert main(["sweep-k", "--cp", "12p", "--points", "40", "--out", str(second), "--svg"]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.with_suffix(".svg").read_bytes() == second.with_suffix(".svg").read_bytes()


def test_transient_stride(tmp_path):
    path = tmp_path / "trace.csv"
    code = main(["transient", "--pattern", "10", "--bit-period", "1u", "--stride", "50",
                 "--out", str(path)])
    assert code == EXIT_OK
    rows = _rows(path.read_text(encoding="utf-8"))
    assert list(rows[0]) == ["t", "i1", "i2", "v_c1", "v_c2", "sw"]
    assert {row["sw"] for row in rows} == {"0", "1"}


def test_scenario_file(tmp_path, capsys):
    path = tmp_path / "parasitic.scn"
    path.write_text("c_p = 12p\n[sweep]\npoints = 120\n", encoding="utf-8")
    code, out, _ = _run(capsys, "flip-threshold", "--scenario", str(path))
    assert code == EXIT_OK
    assert 0.04 <= float(_rows(out)[0]["k_star"]) <= 0.06


def test_scenario_file_errors_exit_with_validation_code(tmp_path, capsys):
    path = tmp_path / "broken.scn"
    path.write_text("[link]\ncoupling = 2\n", encoding="utf-8")
    code, _, err = _run(capsys, "impedance", "--scenario", str(path))
    assert code == EXIT_VALIDATION
    assert "line 2" in err


def test_command_line_overrides_scenario(tmp_path):
    path = tmp_path / "case.scn"
    path.write_text("[mismatch]\nc_p_override = 5p\n[transient]\nduration = 40u\n",
                    encoding="utf-8")
    args = build_parser().parse_args(["decode", "--scenario", str(path), "--cp", "12p",
                                      "--pattern", "101010"])
    config = load_config(args)
    assert config.scenario.secondary_tank.c_p == pytest.approx(12e-12)
    assert config.mismatch.c_p_override is None
    assert config.transient.sw_pattern == (1, 0, 1, 0, 1, 0)
    assert config.transient.duration is None


def test_log_file(tmp_path):
    log_path = tmp_path / "run.log"
    code = main(["sweep-k", "--points", "20", "--out", str(tmp_path / "sweep.csv"),
                 "--log-level", "info", "--log-file", str(log_path)])
    assert code == EXIT_OK
    text = log_path.read_text(encoding="utf-8")
    assert "| INFO     | coillink.lsk_analysis | Swept 20 couplings" in text
    assert "\033[" not in text


def test_log_level_from_environment(tmp_path, monkeypatch):
    log_path = tmp_path / "run.log"
    monkeypatch.setenv("COIL_LINK_LOG_LEVEL", "debug")
    assert main(["pte", "--preset", "flat", "--out", str(tmp_path / "pte.csv"),
                 "--log-file", str(log_path)]) == EXIT_OK
    assert logging.getLogger("coillink").level == logging.DEBUG


def test_color_only_on_terminals(monkeypatch):
    class Terminal(io.StringIO):
        def isatty(self):
            return True

    monkeypatch.delenv("NO_COLOR", raising=False)
    assert use_color(Terminal())
    assert not use_color(io.StringIO())
    monkeypatch.setenv("NO_COLOR", "1")
    assert not use_color(Terminal())


def test_configure_logging_replaces_handlers():
    first, second = io.StringIO(), io.StringIO()
    configure_logging("info", stream=first)
    configured = configure_logging("info", stream=second)
    logging.getLogger("coillink.link_model").info("tank retuned")
    assert first.getvalue() == ""
    assert "| INFO     | coillink.link_model | tank retuned" in second.getvalue()
    assert len(configured.logger.handlers) == 1

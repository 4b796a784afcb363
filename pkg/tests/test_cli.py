import numpy as np
import pytest

from qemcmc import cli


def _run(argv):
    cfg = cli.build_config(argv)
    return cli.run(cfg)


def _rows(csv_text):
    lines = csv_text.strip().split("\n")
    assert lines[0] == "experiment,N,alpha,beta,h,t,quantity,value,method,seed"
    return [line.split(",") for line in lines[1:]]


def test_header_and_schema():
    csv_text, status = _run(["--experiment", "scan", "--n-min", "10",
                             "--n-max", "14"])
    assert status == 0
    rows = _rows(csv_text)
    assert all(len(r) == 10 for r in rows)
    quantities = {r[6] for r in rows}
    assert quantities <= {"delta_exact", "delta_closed", "bound", "tv",
                          "tmix", "slope"}


def test_rows_sorted_and_lf_terminated(tmp_path):
    out = tmp_path / "scan.csv"
    status = cli.main(["--experiment", "scan", "--n-min", "10", "--n-max", "14",
                       "--out", str(out)])
    assert status == 0
    data = out.read_bytes()
    assert b"\r" not in data
    assert data.endswith(b"\n")
    lines = data.decode().strip().split("\n")[1:]
    assert lines == sorted(lines)


def test_byte_determinism():
    argv = ["--experiment", "figure-a", "--n-min", "10", "--n-max", "12",
            "--avg-samples", "8", "--max-dense-n", "10", "--seed", "3"]
    first, _ = _run(argv)
    second, _ = _run(argv)
    assert first == second


def test_scan_gaps_decrease_with_system_size():
    csv_text, _ = _run(["--experiment", "scan", "--n-min", "10", "--n-max", "20"])
    rows = [r for r in _rows(csv_text) if r[6] == "delta_closed"]
    gaps = {int(r[1]): float(r[7]) for r in rows}
    ordered = [gaps[n] for n in sorted(gaps)]
    assert len(ordered) == 11
    assert np.all(np.diff(ordered) < 0)


def test_figure_a_dual_route_agreement():
    csv_text, _ = _run(["--experiment", "figure-a", "--n-min", "10",
                        "--n-max", "12", "--avg-samples", "16"])
    rows = _rows(csv_text)
    closed = {int(r[1]): float(r[7]) for r in rows if r[6] == "delta_closed"}
    exact = {int(r[1]): float(r[7]) for r in rows if r[6] == "delta_exact"}
    assert set(exact) == {10, 11, 12}
    for n, value in exact.items():
        assert abs(value - closed[n]) / closed[n] < 1e-6


def test_figure_a_single_point_degenerates_to_closed_form():
    from qemcmc.spectral import grover_gap_closed_form

    csv_text, _ = _run(["--experiment", "figure-a", "--n-min", "10",
                        "--n-max", "11", "--avg-samples", "1", "--h", "-1.0",
                        "--t", "1.5:1.5", "--max-dense-n", "0"])
    rows = _rows(csv_text)
    for r in rows:
        n = int(r[1])
        assert float(r[7]) == pytest.approx(
            grover_gap_closed_form(n, 1.0, 5.0, -1.0, 1.5), rel=1e-12)


def test_figure_b_exact_below_bound():
    csv_text, _ = _run(["--experiment", "figure-b", "--n-min", "6",
                        "--n-max", "10", "--max-dense-n", "8"])
    rows = _rows(csv_text)
    bound = {int(r[1]): float(r[7]) for r in rows if r[6] == "bound"}
    exact = {int(r[1]): float(r[7]) for r in rows if r[6] == "delta_exact"}
    assert set(bound) == set(range(6, 11))
    assert set(exact) == {6, 7, 8}
    for n, value in exact.items():
        assert value <= bound[n] + 1e-12


def test_sample_rows():
    csv_text, _ = _run(["--experiment", "sample", "--n-min", "4", "--n-max", "4",
                        "--beta", "1", "--steps", "200", "--seed", "11"])
    rows = _rows(csv_text)
    tv = [r for r in rows if r[6] == "tv"]
    tmix = [r for r in rows if r[6] == "tmix"]
    assert len(tv) == 4 and len(tmix) == 1
    for r in tv:
        assert 0.0 <= float(r[7]) <= 1.0


def test_validate_experiment_reports_criteria():
    csv_text, status = _run(["--experiment", "validate"])
    rows = _rows(csv_text)
    verdicts = {r[6]: r[8] for r in rows}
    assert "figure-determinism" in verdicts
    assert verdicts["figure-determinism"] == "pass"
    assert set(verdicts.values()) <= {"pass", "fail"}
    # the exit status mirrors the verdict column
    assert status == (1 if "fail" in verdicts.values() else 0)


def test_config_file_and_flag_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("n-min = 10\nn-max = 12\nbeta = 2.0  # comment\n")
    cfg = cli.build_config(["--experiment", "scan", "--config", str(cfg_file),
                            "--beta", "3.0"])
    assert cfg.n_min == 10 and cfg.n_max == 12
    assert cfg.beta == 3.0   # flag wins over file


def test_config_errors_exit_2(tmp_path):
    assert cli.main(["--experiment", "scan", "--n-min", "8", "--n-max", "4"]) == 2
    assert cli.main(["--experiment", "scan", "--h", "nonsense"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("not a key value line\n")
    assert cli.main(["--experiment", "scan", "--config", str(bad)]) == 2
    assert cli.main(["--experiment", "scan", "--config", str(tmp_path / "nope")]) == 2


def test_unknown_config_key_rejected(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("frobnicate = 1\n")
    assert cli.main(["--experiment", "scan", "--config", str(cfg_file)]) == 2


def test_value_spec_parsing():
    assert cli._parse_spec("1.5", allow_resonance=False) == 1.5
    assert cli._parse_spec("0:2", allow_resonance=False) == (0.0, 2.0)
    assert cli._parse_spec("resonance", allow_resonance=True) == "resonance"
    with pytest.raises(ValueError):
        cli._parse_spec("resonance", allow_resonance=False)
    with pytest.raises(ValueError):
        cli._parse_spec("3:1", allow_resonance=False)

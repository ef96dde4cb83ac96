import numpy as np
import pytest

from uavcast import cli
from uavcast.analysis import (
    average_ase,
    average_delay,
    coverage_probability,
    request_success_probability,
    transmission_success_probability,
)
from uavcast.config import ScenarioConfig
from uavcast.errors import IntegrityError, NumericError


def test_metrics_row_matches_analysis(capsys):
    assert cli.main(["metrics", "--v-norm", "800"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "p_cov,p_suc,p_req,delay_aver_ms,ase_aver"
    p_cov, p_suc, p_req, delay, ase = map(float, out[1].split(","))
    config = ScenarioConfig()
    assert p_cov == pytest.approx(
        coverage_probability(config.geometry(800.0), config.radio), rel=1e-9)
    assert p_suc == pytest.approx(
        transmission_success_probability(50.0, config.radio), rel=1e-9)
    assert p_req == pytest.approx(
        request_success_probability(p_cov, p_suc, 1e-3, 50.0), rel=1e-6)
    assert delay == pytest.approx(
        average_delay(p_cov, p_suc, 10.0, 1.0), rel=1e-6)
    assert ase == pytest.approx(average_ase(p_cov, p_suc, 1e-3, 20.0), rel=1e-6)


def test_metrics_writes_csv(tmp_path, capsys):
    out = tmp_path / "metrics.csv"
    assert cli.main(["metrics", "--v-norm", "400", "--out", str(out)]) == 0
    printed = capsys.readouterr().out.splitlines()
    lines = out.read_text().splitlines()
    assert lines == printed[-2:]


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("d0_m=400\nnum_clusters=2\n")
    dump = tmp_path / "effective.cfg"
    assert cli.main(["metrics", "--config", str(cfg), "--d0", "600",
                     "--dump-config", str(dump)]) == 0
    capsys.readouterr()
    effective = ScenarioConfig.from_file(dump)
    assert effective.d0_m == 600.0       # flag beats file
    assert effective.num_clusters == 2   # file beats default


def test_dump_config_round_trips(tmp_path, capsys):
    first = tmp_path / "first.cfg"
    second = tmp_path / "second.cfg"
    assert cli.main(["metrics", "--gamma", "31.5", "--seed", "9",
                     "--dump-config", str(first)]) == 0
    assert cli.main(["metrics", "--config", str(first),
                     "--dump-config", str(second)]) == 0
    capsys.readouterr()
    assert first.read_bytes() == second.read_bytes()


def test_config_error_exit_code(capsys):
    assert cli.main(["metrics", "--d0", "50"]) == cli.EXIT_CONFIG
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: config: ")


def test_missing_config_file_exit_code(capsys):
    rc = cli.main(["metrics", "--config", "/nonexistent/scenario.cfg"])
    assert rc == cli.EXIT_CONFIG
    assert "file not found" in capsys.readouterr().err


def test_numeric_and_integrity_exit_codes(capsys, monkeypatch):
    def numeric_failure(args):
        raise NumericError("quadrature blew up")
    monkeypatch.setattr(cli, "_cmd_metrics", numeric_failure)
    assert cli.main(["metrics"]) == cli.EXIT_NUMERIC
    assert capsys.readouterr().err.startswith("error: numeric: ")

    def integrity_failure(args):
        raise IntegrityError("channel overlap")
    monkeypatch.setattr(cli, "_cmd_metrics", integrity_failure)
    assert cli.main(["metrics"]) == cli.EXIT_INTEGRITY
    assert capsys.readouterr().err.startswith("error: integrity: ")


def test_topology_writes_all_drops(tmp_path, capsys):
    out = tmp_path / "drops.csv"
    assert cli.main(["topology", "--drops", "2", "--out", str(out)]) == 0
    assert "100 UAV positions" in capsys.readouterr().out
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "drop_id,cluster_id,uav_id,x,y,h"
    assert len(lines) == 1 + 100
    assert {row.split(",")[0] for row in lines[1:]} == {"0", "1"}


def test_simulate_is_reproducible(tmp_path, capsys):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    out_c = tmp_path / "c.csv"
    assert cli.main(["simulate", "--scheme", "clustering", "--seed", "7",
                     "--out", str(out_a)]) == 0
    assert cli.main(["simulate", "--scheme", "clustering", "--seed", "7",
                     "--out", str(out_b)]) == 0
    assert cli.main(["simulate", "--scheme", "clustering", "--seed", "9",
                     "--out", str(out_c)]) == 0
    summary = capsys.readouterr().out.splitlines()
    assert out_a.read_bytes() == out_b.read_bytes()
    assert out_a.read_bytes() != out_c.read_bytes()
    assert summary[0] == summary[1] != summary[2]
    assert summary[0].startswith("scheme=clustering uavs=50 ")
    header = out_a.read_text().splitlines()[0]
    assert header == "uav_id,cluster_id,delivered,via_broadcast,delivery_time_ms"


def test_simulate_event_log(tmp_path, capsys):
    log = tmp_path / "events.csv"
    assert cli.main(["simulate", "--scheme", "benchmark", "--seed", "3",
                     "--event-log", str(log)]) == 0
    capsys.readouterr()
    lines = log.read_text().strip().splitlines()
    assert lines[0] == "time,actor,event_kind,packet_id,cluster_id"
    assert len(lines) > 1
    kinds = {row.split(",")[2] for row in lines[1:]}
    assert "bs_broadcast_end" in kinds


def test_distributions_sampling_checks(capsys):
    assert cli.main(["distributions", "--kind", "center-offset",
                     "--samples", "5000"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("kind=center-offset samples=5000 ")
    fields = dict(part.split("=") for part in line.split())
    assert float(fields["empirical_ks_gap"]) < 0.05
    assert float(fields["sampler_ks_gap"]) < 0.05


def test_distributions_table_output(tmp_path, capsys):
    out = tmp_path / "peer.csv"
    assert cli.main(["distributions", "--kind", "peer", "--offset-a", "25",
                     "--samples", "0", "--out", str(out)]) == 0
    capsys.readouterr()
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "distance_m,pdf,cdf"
    data = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    assert data.shape == (513, 3)
    assert abs(np.trapezoid(data[:, 1], data[:, 0]) - 1.0) < 1e-3
    assert data[0, 2] == 0.0 and abs(data[-1, 2] - 1.0) < 1e-9


def test_study_command_writes_reproducible_table(tmp_path, capsys):
    out_dir = tmp_path / "results"
    argv = ["study", "--study", "validation-coverage", "--v-values", "400",
            "--replications", "2000", "--out-dir", str(out_dir)]
    assert cli.main(argv) == 0
    path = out_dir / "validation_coverage.csv"
    assert path.exists()
    first = path.read_bytes()
    assert cli.main(argv) == 0
    capsys.readouterr()
    assert path.read_bytes() == first
    lines = first.decode().strip().splitlines()
    assert lines[0] == "study,sweep_param,sweep_value,scheme,metric,mean,stderr,n"
    assert len(lines) == 1 + 2  # theory + monte_carlo for the single point
    assert lines[2].endswith(",2000")


def test_study_design_insight(tmp_path, capsys):
    out_dir = tmp_path / "results"
    assert cli.main(["study", "--study", "design-insight",
                     "--c-values", "2,5", "--v-values", "400",
                     "--out-dir", str(out_dir)]) == 0
    assert "wrote" in capsys.readouterr().out
    lines = (out_dir / "design_insight.csv").read_text().strip().splitlines()
    # per cluster count: p_suc plus (p_cov, p_req) for the single distance
    assert len(lines) == 1 + 2 * 3

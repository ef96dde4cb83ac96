import math

import numpy as np
import pytest

from uavcast import analysis
from uavcast.config import ScenarioConfig
from uavcast.distributions import ClusterGeometry
from uavcast.errors import ParameterError
from uavcast.experiments import (
    DEFAULT_DESIGN_C_GRID,
    MetricRow,
    MetricTable,
    SweepSpec,
    _mean_stderr,
    design_radius,
    run_ase_study,
    run_delay_study,
    run_design_insight_study,
    run_validation_study,
)


def test_sweep_spec_validation():
    SweepSpec("v_norm", (200.0, 400.0))
    with pytest.raises(ParameterError):
        SweepSpec("v_norm", ())
    with pytest.raises(ParameterError):
        SweepSpec("v_norm", (200.0, 200.0))
    with pytest.raises(ParameterError):
        SweepSpec("v_norm", (400.0, 200.0))
    with pytest.raises(ParameterError):
        SweepSpec("v_norm", (200.0, math.inf))


def test_mean_stderr_skips_nan():
    mean, stderr, n = _mean_stderr(np.array([1.0, np.nan, 3.0, np.nan]))
    assert mean == 2.0 and n == 2
    assert stderr == pytest.approx(np.std([1.0, 3.0], ddof=1) / math.sqrt(2))
    mean, stderr, n = _mean_stderr(np.array([np.nan, np.nan]))
    assert math.isnan(mean) and math.isnan(stderr) and n == 0
    mean, stderr, n = _mean_stderr(np.array([4.0]))
    assert mean == 4.0 and math.isnan(stderr) and n == 1


def test_metric_table_select_value_and_csv(tmp_path):
    rows = [MetricRow("s", "x", 1.0, "a", "m", 0.5, 0.01, 10),
            MetricRow("s", "x", 2.0, "a", "m", 0.6, 0.01, 10),
            MetricRow("s", "x", 1.0, "b", "m", 0.7, 0.01, 10)]
    table = MetricTable(rows)
    assert len(table.select(scheme="a")) == 2
    assert table.value(scheme="b", sweep_value=1.0) == 0.7
    with pytest.raises(ParameterError):
        table.value(scheme="a")  # ambiguous
    with pytest.raises(ParameterError):
        table.value(scheme="missing")
    path = tmp_path / "table.csv"
    table.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "study,sweep_param,sweep_value,scheme,metric,mean,stderr,n"
    assert lines[1] == "s,x,1,a,m,0.5,0.01,10"
    assert path.read_text() == table.csv_text()


def test_validation_study_rejects_unknown_kind():
    with pytest.raises(ParameterError):
        run_validation_study("delay", ScenarioConfig())


def test_validation_coverage_matches_theory():
    config = ScenarioConfig(replications=10_000)
    table = run_validation_study("coverage", config)
    theory = table.select(scheme="theory")
    sim = table.select(scheme="monte_carlo")
    assert len(theory) == len(sim) == 6
    means = [r.mean for r in theory]
    assert all(a > b for a, b in zip(means, means[1:]))
    for t, s in zip(theory, sim):
        assert t.sweep_param == s.sweep_param == "v_norm"
        assert s.n == 10_000 and s.stderr > 0.0
        assert abs(s.mean - t.mean) < 4.0 * s.stderr


def test_validation_success_matches_theory():
    config = ScenarioConfig(replications=10_000)
    table = run_validation_study("success", config)
    theory = table.select(scheme="theory")
    sim = table.select(scheme="monte_carlo")
    assert len(theory) == len(sim) == 5
    means = [r.mean for r in theory]
    assert all(a > b for a, b in zip(means, means[1:]))
    for t, s in zip(theory, sim):
        assert t.metric == s.metric == "p_suc"
        assert abs(s.mean - t.mean) < 4.0 * s.stderr


def test_validation_single_point_sweep():
    table = run_validation_study("coverage", ScenarioConfig(replications=2000),
                                 SweepSpec("v_norm", (800.0,)))
    assert len(table.rows) == 2
    assert table.value(scheme="theory") == pytest.approx(0.9307929356717329,
                                                         rel=1e-9)


def test_validation_stderr_scales_with_replications():
    small = run_validation_study("coverage", ScenarioConfig(replications=2500),
                                 SweepSpec("v_norm", (800.0,)))
    large = run_validation_study("coverage", ScenarioConfig(replications=10_000),
                                 SweepSpec("v_norm", (800.0,)))
    ratio = (small.select(scheme="monte_carlo")[0].stderr
             / large.select(scheme="monte_carlo")[0].stderr)
    assert 1.6 < ratio < 2.5  # nominal factor 2 for a 4x sample increase


def test_design_radius_preserves_density():
    r = design_radius(50, 5, 1e-3)
    assert r == pytest.approx(math.sqrt(50 / (5 * 1e-3 * math.pi)), rel=1e-12)
    assert (50 / 5) / (math.pi * r ** 2) == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(ParameterError):
        design_radius(50, 0, 1e-3)
    with pytest.raises(ParameterError):
        design_radius(50, 5, 0.0)


def test_design_insight_close_range_improves_with_more_clusters():
    table = run_design_insight_study(ScenarioConfig())
    p_req = [table.value(sweep_value=float(c), metric="p_req_v400")
             for c in DEFAULT_DESIGN_C_GRID]
    assert all(b >= a for a, b in zip(p_req, p_req[1:]))
    assert all(0.0 < p <= 1.0 for p in p_req)


def test_design_insight_consistent_with_direct_formulas():
    config = ScenarioConfig()
    table = run_design_insight_study(config, c_values=(5,), v_values=(800.0,))
    r5 = design_radius(50, 5, 1e-3)
    p_suc = analysis.transmission_success_probability(r5, config.radio)
    assert table.value(metric="p_suc") == pytest.approx(p_suc, rel=1e-12)
    geom = ClusterGeometry(v_norm=800.0, radius_r=r5, h1=10.0, h2=20.0)
    p_cov = analysis.coverage_probability(geom, config.radio)
    assert table.value(metric="p_cov_v800") == pytest.approx(p_cov, rel=1e-12)
    p_req = analysis.request_success_probability(p_cov, p_suc, 1e-3, r5)
    assert table.value(metric="p_req_v800") == pytest.approx(p_req, rel=1e-12)


def test_design_insight_marks_infeasible_grid_points():
    # 60 clusters of <1 expected member each: every metric degenerates
    table = run_design_insight_study(ScenarioConfig(), c_values=(60,),
                                     v_values=(400.0,))
    assert math.isnan(table.value(sweep_value=60.0, metric="p_req_v400"))


def test_delay_study_shape_and_analytic_rows():
    config = ScenarioConfig(replications=40)
    table = run_delay_study(config, d0_values=(400.0,), c_values=(2,))
    delay_rows = table.select(metric="delay_ms_d0_400")
    assert sorted(r.scheme for r in delay_rows) == \
        ["analytic", "benchmark", "clustering", "rnc"]
    for r in delay_rows:
        if r.scheme == "analytic":
            assert r.n == 0 and r.stderr == 0.0
            assert r.mean == pytest.approx(10.13338, abs=0.001)
        else:
            assert r.n == 40
            assert 9.0 < r.mean < 40.0
    ratios = table.select(metric="delivery_ratio_d0_400")
    assert len(ratios) == 3
    assert all(0.9 < r.mean <= 1.0 for r in ratios)


def test_ase_study_rnc_rows_mirror_benchmark():
    config = ScenarioConfig(replications=40)
    table = run_ase_study(config, d0_values=(800.0,), c_values=(2, 5))
    for c in (2.0, 5.0):
        bench = table.select(scheme="benchmark", sweep_value=c)[0]
        rnc = table.select(scheme="rnc", sweep_value=c)[0]
        assert (rnc.mean, rnc.stderr, rnc.n) == \
            (bench.mean, bench.stderr, bench.n)
        clustering = table.select(scheme="clustering", sweep_value=c)[0]
        assert clustering.mean >= bench.mean
        upper = 1e-3 * math.log2(21.0)
        assert 0.0 < bench.mean <= upper + 1e-12
        assert clustering.mean <= upper + 1e-12


def test_studies_are_deterministic_in_base_seed():
    config = ScenarioConfig(replications=30)
    kwargs = dict(d0_values=(800.0,), c_values=(5,))
    assert run_delay_study(config, **kwargs).csv_text() == \
        run_delay_study(config, **kwargs).csv_text()
    reseeded = config.replace(base_seed=2)
    assert run_delay_study(config, **kwargs).csv_text() != \
        run_delay_study(reseeded, **kwargs).csv_text()
    assert run_validation_study(
        "success", ScenarioConfig(replications=500),
        SweepSpec("radius_r", (50.0,))).csv_text() == \
        run_validation_study(
        "success", ScenarioConfig(replications=500),
        SweepSpec("radius_r", (50.0,))).csv_text()

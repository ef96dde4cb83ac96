import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavcast.config import ScenarioConfig
from uavcast.errors import ParameterError
from uavcast.geometry import (
    Cluster,
    Position3,
    Vec2,
    build_topology,
    sample_cluster_members,
    sample_parent_centers,
    sample_uniform_disk,
    topology_csv_rows,
    write_topology_csv,
)


def test_vec2_and_position_validation():
    assert Vec2(3.0, 4.0).norm() == 5.0
    with pytest.raises(ParameterError):
        Vec2(math.inf, 0.0)
    with pytest.raises(ParameterError):
        Position3(Vec2(0.0, 0.0), -1.0)


def test_uniform_disk_is_area_uniform():
    """P(radius <= r/2) must equal 1/4 for an area-uniform disk sample."""
    pts = sample_uniform_disk(np.random.default_rng(11), 1_000_000, 50.0)
    radii = np.hypot(pts[:, 0], pts[:, 1])
    assert radii.max() <= 50.0
    assert abs(np.mean(radii <= 25.0) - 0.25) < 0.002


def test_uniform_disk_radial_cdf_gap():
    pts = sample_uniform_disk(np.random.default_rng(7), 100_000, 50.0)
    radii = np.sort(np.hypot(pts[:, 0], pts[:, 1]))
    empirical = np.arange(1, radii.size + 1) / radii.size
    assert np.max(np.abs(empirical - (radii / 50.0) ** 2)) < 0.01


def test_uniform_disk_argument_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ParameterError):
        sample_uniform_disk(rng, 10, 0.0)
    with pytest.raises(ParameterError):
        sample_uniform_disk(rng, -1, 10.0)


def test_parent_process_mean_count():
    """Sample mean of the parent count tracks density * area (4 SE band)."""
    rng = np.random.default_rng(3)
    drops = 10_000
    counts = [sample_parent_centers(100.0, 1e-4, rng).shape[0]
              for _ in range(drops)]
    target = 1e-4 * math.pi * 100.0 ** 2
    se = math.sqrt(target / drops)
    assert abs(np.mean(counts) - target) < 4.0 * se


def test_parent_centers_inside_region():
    rng = np.random.default_rng(5)
    for _ in range(50):
        centers = sample_parent_centers(100.0, 5e-4, rng)
        if centers.size:
            assert np.hypot(centers[:, 0], centers[:, 1]).max() <= 100.0


def test_parent_process_argument_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ParameterError):
        sample_parent_centers(0.0, 1e-4, rng)
    with pytest.raises(ParameterError):
        sample_parent_centers(100.0, 0.0, rng)


def test_cluster_members_stay_in_disk():
    center = Position3(Vec2(30.0, -40.0), 20.0)
    members = sample_cluster_members(center, 50.0, 10, np.random.default_rng(2))
    assert members.shape == (10, 2)
    assert np.hypot(members[:, 0] - 30.0, members[:, 1] + 40.0).max() <= 50.0


def test_cluster_members_count_contract():
    center = Position3(Vec2(0.0, 0.0), 20.0)
    rng = np.random.default_rng(0)
    assert sample_cluster_members(center, 50.0, 1, rng).shape == (1, 2)
    with pytest.raises(ParameterError):
        sample_cluster_members(center, 50.0, 0, rng)


@given(radius=st.floats(1.0, 200.0), count=st.integers(1, 40),
       seed=st.integers(0, 2 ** 31 - 1))
@settings(max_examples=30, deadline=None)
def test_members_never_leave_the_disk(radius, count, seed):
    center = Position3(Vec2(5.0, -3.0), 20.0)
    members = sample_cluster_members(center, radius, count,
                                     np.random.default_rng(seed))
    cluster = Cluster(center=center, members_xy=members, radius_r=radius)
    assert cluster.n_members == count
    assert cluster.max_member_offset() <= radius * (1.0 + 1e-12)


def test_build_topology_even_split():
    topo = build_topology(ScenarioConfig(), np.random.default_rng(1))
    assert [c.n_members for c in topo.clusters] == [10] * 5
    assert topo.n_uavs == 50
    assert topo.mode == "fixed_total"
    assert topo.parent_density is None


def test_build_topology_remainder_goes_first():
    config = ScenarioConfig(num_clusters=3, total_uavs=50)
    topo = build_topology(config, np.random.default_rng(1))
    assert [c.n_members for c in topo.clusters] == [17, 17, 16]


def test_build_topology_single_cluster():
    config = ScenarioConfig(num_clusters=1)
    topo = build_topology(config, np.random.default_rng(1))
    assert len(topo.clusters) == 1 and topo.clusters[0].n_members == 50


def test_build_topology_density_mode():
    config = ScenarioConfig(mode="density")
    topo = build_topology(config, np.random.default_rng(0))
    # every cluster holds floor(lambda_off * pi * r^2) = 7 members
    assert topo.clusters and all(c.n_members == 7 for c in topo.clusters)
    assert topo.parent_density == config.lambda_per_m2
    assert topo.mode == "density"


def _config_stub(**overrides):
    base = dict(region_radius_m=100.0, d0_m=800.0, num_clusters=5,
                total_uavs=50, lambda_per_m2=1e-4, lambda_off_per_m2=1e-3,
                radius_r_m=50.0, h1_m=10.0, h2_m=20.0, mode="fixed_total")
    base.update(overrides)
    return SimpleNamespace(**base)


def test_build_topology_rejects_bad_stub_inputs():
    """build_topology guards its own inputs even without config validation."""
    rng = np.random.default_rng(0)
    with pytest.raises(ParameterError, match="radius_r_m"):
        build_topology(_config_stub(radius_r_m=150.0), rng)
    with pytest.raises(ParameterError, match="lambda_off_per_m2"):
        build_topology(_config_stub(mode="density", lambda_off_per_m2=1e-6), rng)
    with pytest.raises(ParameterError, match="mode"):
        build_topology(_config_stub(mode="grid"), rng)


def test_build_topology_geometry_and_heights():
    config = ScenarioConfig(d0_m=900.0, h1_m=12.0, h2_m=25.0)
    topo = build_topology(config, np.random.default_rng(4))
    assert topo.bs_position.planar == Vec2(900.0, 0.0)
    assert topo.bs_position.height == 12.0
    assert all(c.center.height == 25.0 for c in topo.clusters)
    centers = np.array([[c.center.planar.x, c.center.planar.y]
                        for c in topo.clusters])
    assert np.hypot(centers[:, 0], centers[:, 1]).max() <= 100.0
    for c in topo.clusters:
        assert c.max_member_offset() <= c.radius_r


def test_build_topology_deterministic():
    config = ScenarioConfig()
    a = build_topology(config, np.random.default_rng(9))
    b = build_topology(config, np.random.default_rng(9))
    assert all(np.array_equal(x.members_xy, y.members_xy)
               for x, y in zip(a.clusters, b.clusters))


def test_cluster_index_alignment():
    topo = build_topology(ScenarioConfig(num_clusters=3, total_uavs=7),
                          np.random.default_rng(0))
    idx = topo.cluster_index()
    assert idx.tolist() == [0, 0, 0, 1, 1, 2, 2]
    assert topo.members_xy().shape == (7, 2)


def test_topology_csv_round_trip(tmp_path):
    config = ScenarioConfig(num_clusters=2, total_uavs=6)
    drops = [build_topology(config, np.random.default_rng(s)) for s in (0, 1)]
    path = tmp_path / "drops.csv"
    write_topology_csv(path, drops)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "drop_id,cluster_id,uav_id,x,y,h"
    assert len(lines) == 1 + 12
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "0" and first[2] == "0"
    x, y = float(first[3]), float(first[4])
    assert math.isclose(x, drops[0].clusters[0].members_xy[0, 0], rel_tol=1e-9)
    assert math.isclose(y, drops[0].clusters[0].members_xy[0, 1], rel_tol=1e-9)
    assert len(list(topology_csv_rows(drops[0], 0))) == 6

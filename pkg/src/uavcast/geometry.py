"""Cluster topology generation.

Cluster centers form either a Poisson point process on the deployment disk
(density mode) or a fixed-size uniform binomial process (fixed-total mode).
Each cluster's members are placed uniformly on a disk of radius `radius_r`
around the center.  All UAVs fly at a common height; the base station sits
on the ground at planar distance `d0` from the deployment-region center.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .errors import ParameterError

if TYPE_CHECKING:  # pragma: no cover
    from .config import ScenarioConfig


@dataclass(frozen=True)
class Vec2:
    """Planar point, meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ParameterError(f"coordinates must be finite, got ({self.x}, {self.y})")

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class Position3:
    """Planar point plus height above ground, meters."""

    planar: Vec2
    height: float

    def __post_init__(self):
        if not (math.isfinite(self.height) and self.height >= 0):
            raise ParameterError(f"height must be non-negative, got {self.height}")


@dataclass
class Cluster:
    """One cluster: its center and the planar offsets of its members.

    Members share the center's height, so only planar coordinates are stored
    (`members_xy`, shape (n, 2), absolute coordinates).
    """

    center: Position3
    members_xy: np.ndarray
    radius_r: float

    @property
    def n_members(self) -> int:
        return int(self.members_xy.shape[0])

    def member_positions(self) -> list[Position3]:
        h = self.center.height
        return [Position3(Vec2(float(x), float(y)), h) for x, y in self.members_xy]

    def max_member_offset(self) -> float:
        """Largest member distance from the cluster center."""
        if self.n_members == 0:
            return 0.0
        c = np.array([self.center.planar.x, self.center.planar.y])
        return float(np.max(np.hypot(*(self.members_xy - c).T)))


@dataclass
class Topology:
    """A full network drop: clusters plus the base-station position."""

    clusters: list[Cluster]
    bs_position: Position3
    region_radius: float
    parent_density: float | None
    mode: str

    @property
    def n_uavs(self) -> int:
        return sum(c.n_members for c in self.clusters)

    def members_xy(self) -> np.ndarray:
        """All member planar coordinates stacked, shape (n_uavs, 2)."""
        if not self.clusters:
            return np.empty((0, 2))
        return np.vstack([c.members_xy for c in self.clusters])

    def cluster_index(self) -> np.ndarray:
        """Cluster id of each member, aligned with `members_xy`."""
        return np.repeat(np.arange(len(self.clusters)),
                         [c.n_members for c in self.clusters])


def sample_uniform_disk(rng: np.random.Generator, n: int, radius: float,
                        center_xy=(0.0, 0.0)) -> np.ndarray:
    """n points uniform on a disk; radial CDF proportional to r^2."""
    if radius <= 0:
        raise ParameterError(f"disk radius must be positive, got {radius}")
    if n < 0:
        raise ParameterError(f"sample count must be non-negative, got {n}")
    r = radius * np.sqrt(rng.random(n))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([center_xy[0] + r * np.cos(theta),
                            center_xy[1] + r * np.sin(theta)])


def sample_parent_centers(region_radius: float, density: float,
                          rng: np.random.Generator) -> np.ndarray:
    """Poisson point process on the deployment disk, shape (k, 2).

    k is Poisson with mean density * pi * region_radius^2; positions are
    i.i.d. uniform on the disk.  k = 0 yields an empty array.
    """
    if region_radius <= 0:
        raise ParameterError(f"region_radius must be positive, got {region_radius}")
    if density <= 0:
        raise ParameterError(f"parent density must be positive, got {density}")
    mean_count = density * np.pi * region_radius ** 2
    k = int(rng.poisson(mean_count))
    return sample_uniform_disk(rng, k, region_radius)


def sample_cluster_members(center: Position3, radius_r: float, count: int,
                           rng: np.random.Generator) -> np.ndarray:
    """Planar coordinates of `count` members uniform on the cluster disk."""
    if count < 1:
        raise ParameterError(f"cluster member count must be >= 1, got {count}")
    return sample_uniform_disk(rng, count, radius_r,
                               (center.planar.x, center.planar.y))


def build_topology(config: "ScenarioConfig", rng: np.random.Generator) -> Topology:
    """Draw one topology according to the scenario configuration.

    fixed_total mode: exactly `num_clusters` centers uniform on the region
    disk, `total_uavs` members split as evenly as possible (remainder goes
    to the lowest-indexed clusters).

    density mode: Poisson centers with density `lambda_per_m2`, each holding
    floor(lambda_off_per_m2 * pi * radius_r^2) members.
    """
    if config.radius_r_m > config.region_radius_m:
        raise ParameterError(
            "radius_r_m: cluster radius "
            f"{config.radius_r_m} exceeds region radius {config.region_radius_m}")
    if config.mode == "fixed_total":
        centers = sample_uniform_disk(rng, config.num_clusters, config.region_radius_m)
        base, extra = divmod(config.total_uavs, config.num_clusters)
        counts = [base + (1 if i < extra else 0) for i in range(config.num_clusters)]
        density = None
    elif config.mode == "density":
        centers = sample_parent_centers(config.region_radius_m,
                                        config.lambda_per_m2, rng)
        per_cluster = math.floor(config.lambda_off_per_m2 * math.pi
                                 * config.radius_r_m ** 2)
        if per_cluster < 1:
            raise ParameterError(
                "lambda_off_per_m2: offspring density too low, expected members "
                f"per cluster {per_cluster} < 1")
        counts = [per_cluster] * len(centers)
        density = config.lambda_per_m2
    else:
        raise ParameterError(f"mode: unknown mode {config.mode!r}")

    clusters = []
    for (cx, cy), count in zip(centers, counts):
        center = Position3(Vec2(float(cx), float(cy)), config.h2_m)
        members = sample_cluster_members(center, config.radius_r_m, count, rng)
        clusters.append(Cluster(center=center, members_xy=members,
                                radius_r=config.radius_r_m))
    bs = Position3(Vec2(config.d0_m, 0.0), config.h1_m)
    return Topology(clusters=clusters, bs_position=bs,
                    region_radius=config.region_radius_m,
                    parent_density=density, mode=config.mode)


def topology_csv_rows(topology: Topology, drop_id: int) -> Iterable[tuple]:
    for cid, cluster in enumerate(topology.clusters):
        h = cluster.center.height
        for uid, (x, y) in enumerate(cluster.members_xy):
            yield (drop_id, cid, uid, f"{x:.10g}", f"{y:.10g}", f"{h:.10g}")


def write_topology_csv(path, topologies: Iterable[Topology]) -> None:
    """Serialize drops as CSV with columns drop_id,cluster_id,uav_id,x,y,h."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drop_id", "cluster_id", "uav_id", "x", "y", "h"])
        for drop_id, topology in enumerate(topologies):
            writer.writerows(topology_csv_rows(topology, drop_id))

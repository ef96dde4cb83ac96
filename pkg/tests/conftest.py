"""Shared builders for protocol-level tests."""

import numpy as np

from uavcast.geometry import Cluster, Position3, Topology, Vec2


def ring_topology(n, radius_r=50.0, ring=20.0, d0=800.0):
    """One cluster of n members evenly spaced on a ring about its center."""
    ang = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    xy = np.column_stack([ring * np.cos(ang), ring * np.sin(ang)])
    return Topology(
        clusters=[Cluster(center=Position3(Vec2(0.0, 0.0), 20.0),
                          members_xy=xy, radius_r=radius_r)],
        bs_position=Position3(Vec2(d0, 0.0), 10.0),
        region_radius=100.0, parent_density=None, mode="fixed_total")


def four_uav_topology():
    """Fixed 4-member cluster used by the scripted recovery scenarios."""
    members = np.array([[0.0, 10.0], [10.0, 0.0], [-10.0, 0.0], [0.0, -10.0]])
    return Topology(
        clusters=[Cluster(center=Position3(Vec2(0.0, 0.0), 20.0),
                          members_xy=members, radius_r=50.0)],
        bs_position=Position3(Vec2(800.0, 0.0), 10.0),
        region_radius=100.0, parent_density=None, mode="fixed_total")


def fixed_success(p):
    """Reception hook: each reception succeeds independently with prob p."""
    def hook(distances, rng):
        return rng.random(np.atleast_1d(distances).shape[0]) < p
    return hook


def all_links(value):
    """Reception hook: every reception succeeds (True) or fails (False)."""
    def hook(distances, rng):
        return np.full(np.atleast_1d(distances).shape[0], value, dtype=bool)
    return hook


def reception_pattern(*flags):
    """Reception hook returning a fixed per-member pattern (first call shape)."""
    pattern = np.array(flags, dtype=bool)

    def hook(distances, rng):
        n = np.atleast_1d(distances).shape[0]
        return pattern[:n]
    return hook

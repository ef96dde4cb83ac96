"""Distance distributions inside a uniformly populated cluster disk.

Three random distances drive the link analysis:

* the distance from the base station to a cluster member, where the member
  is uniform on a disk whose center is a known planar distance away and the
  two ends differ in height;
* the distance between a transmitting member at known offset `a` from the
  cluster center and another member uniform on the disk;
* the offset `a` itself (radial distance of a uniform point from the
  center).

Each has a closed-form pdf.  `DistanceDistribution` tabulates the matching
CDF once on a dense grid and then supports inverse-CDF sampling and
empirical goodness-of-fit checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import IntegrityError, ParameterError

# Tolerated floating-point excursion of an inverse-trig argument past +-1.
_TRIG_ARG_TOL = 1e-12
_DEFAULT_GRID_POINTS = 4097


class DistanceKind(enum.Enum):
    BS_MEMBER = "bs_member"
    PEER = "peer"
    CENTER_OFFSET = "center_offset"


@dataclass(frozen=True)
class ClusterGeometry:
    """Deployment geometry of one cluster relative to the base station.

    v_norm:   planar distance from the BS to the cluster center, m
    radius_r: cluster disk radius, m
    h1, h2:   BS antenna height and UAV flight height, m
    """

    v_norm: float
    radius_r: float
    h1: float
    h2: float

    def __post_init__(self):
        if not (math.isfinite(self.radius_r) and self.radius_r > 0):
            raise ParameterError(f"radius_r must be positive, got {self.radius_r}")
        if not (math.isfinite(self.v_norm) and self.v_norm > self.radius_r):
            raise ParameterError(
                f"v_norm must exceed radius_r ({self.radius_r}), got {self.v_norm}")
        for name in ("h1", "h2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be non-negative, got {value}")

    @property
    def delta_h(self) -> float:
        """Height difference between the BS antenna and the UAV plane."""
        return abs(self.h2 - self.h1)


def _checked_arccos(arg: np.ndarray) -> np.ndarray:
    """arccos with a tight clamp; large excursions indicate a geometry bug."""
    excess = np.max(np.abs(arg), initial=0.0) - 1.0
    if excess > _TRIG_ARG_TOL:
        raise IntegrityError(
            f"inverse-trig argument out of range by {excess:.3e}")
    return np.arccos(np.clip(arg, -1.0, 1.0))


def planar_bs_support(geom: ClusterGeometry) -> tuple[float, float]:
    return (geom.v_norm - geom.radius_r, geom.v_norm + geom.radius_r)


def bs_member_support(geom: ClusterGeometry) -> tuple[float, float]:
    dh2 = geom.delta_h ** 2
    return (math.sqrt((geom.v_norm - geom.radius_r) ** 2 + dh2),
            math.sqrt((geom.v_norm + geom.radius_r) ** 2 + dh2))


def peer_support(offset_a: float, radius_r: float) -> tuple[float, float]:
    return (0.0, radius_r + offset_a)


def center_offset_support(radius_r: float) -> tuple[float, float]:
    return (0.0, radius_r)


def pdf_planar_bs_distance(x, geom: ClusterGeometry) -> np.ndarray:
    """pdf of the planar BS-to-member distance.

    The member is uniform on a disk of radius r whose center is v away from
    the BS (projected to the ground plane); x must satisfy v - r <= x <=
    v + r.  The density is the normalized arc length of the circle of radius
    x that falls inside the disk:

        f(x) = (2 x / (pi r^2)) * arccos((x^2 + v^2 - r^2) / (2 v x))
    """
    x = np.asarray(x, dtype=float)
    v, r = geom.v_norm, geom.radius_r
    lo, hi = planar_bs_support(geom)
    out = np.zeros_like(x)
    inside = (x >= lo) & (x <= hi)
    if np.any(inside):
        xi = x[inside]
        # (x^2 + v^2 - r^2) / (2 v x), factored so both support endpoints
        # give the argument exactly 1 (no cancellation noise)
        arg = 1.0 + (xi - hi) * (xi - lo) / (2.0 * v * xi)
        out[inside] = (2.0 * xi / (np.pi * r ** 2)) * _checked_arccos(arg)
    return out


def pdf_bs_member_distance(d, geom: ClusterGeometry) -> np.ndarray:
    """pdf of the 3D BS-to-member distance.

    Change of variables from the planar distance x = sqrt(d^2 - delta_h^2);
    the Jacobian d/x cancels against the planar density's leading x, leaving

        f(d) = (2 d / (pi r^2)) * arccos((x^2 + v^2 - r^2) / (2 v x)).
    """
    d = np.asarray(d, dtype=float)
    v, r = geom.v_norm, geom.radius_r
    dh2 = geom.delta_h ** 2
    lo, hi = bs_member_support(geom)
    out = np.zeros_like(d)
    inside = (d >= lo) & (d <= hi)
    if np.any(inside):
        di = d[inside]
        # clip guards the subtraction at the lower support edge
        x = np.sqrt(np.maximum(di ** 2 - dh2, (v - r) ** 2))
        arg = 1.0 + (x - (v + r)) * (x - (v - r)) / (2.0 * v * x)
        out[inside] = (2.0 * di / (np.pi * r ** 2)) * _checked_arccos(arg)
    return out


def pdf_peer_distance(d, offset_a: float, radius_r: float) -> np.ndarray:
    """pdf of the distance from a member at offset `a` to a uniform member.

    For d <= r - a the circle of radius d around the transmitter lies fully
    inside the cluster disk, giving the linear density 2 d / r^2; beyond
    that only an arc falls inside:

        f(d) = (2 d / (pi r^2)) * arccos((d^2 + a^2 - r^2) / (2 a d))

    The two branches agree at d = r - a, where the arccos argument is -1.
    """
    if radius_r <= 0:
        raise ParameterError(f"radius_r must be positive, got {radius_r}")
    if not (0.0 <= offset_a <= radius_r):
        raise ParameterError(
            f"offset_a must lie in [0, radius_r], got {offset_a}")
    d = np.asarray(d, dtype=float)
    r, a = radius_r, offset_a
    out = np.zeros_like(d)
    if a == 0.0:
        inside = (d >= 0) & (d <= r)
        out[inside] = 2.0 * d[inside] / r ** 2
        return out
    j = r - a
    full = (d >= 0) & (d <= j)
    out[full] = 2.0 * d[full] / r ** 2
    arc = (d > j) & (d <= r + a)
    if np.any(arc):
        di = d[arc]
        # (d^2 + a^2 - r^2) / (2 a d), split so the argument is exactly -1
        # at the branch junction d = r - a
        arg = (di + j) * (di - j) / (2.0 * a * di) - j / di
        out[arc] = (2.0 * di / (np.pi * r ** 2)) * _checked_arccos(arg)
    return out


def pdf_center_offset(a, radius_r: float) -> np.ndarray:
    """pdf of the radial offset of a uniform point on the cluster disk."""
    if radius_r <= 0:
        raise ParameterError(f"radius_r must be positive, got {radius_r}")
    a = np.asarray(a, dtype=float)
    out = np.zeros_like(a)
    inside = (a >= 0) & (a <= radius_r)
    out[inside] = 2.0 * a[inside] / radius_r ** 2
    return out


def _cosine_grid(lo: float, hi: float, breakpoints: Sequence[float],
                 n_points: int) -> np.ndarray:
    """Grid over [lo, hi] clustered toward segment ends (endpoints exact).

    Each segment between consecutive breakpoints gets an equal share of the
    points; cosine spacing concentrates nodes where square-root behavior of
    the pdfs makes the trapezoid rule weakest.
    """
    edges = [lo, *sorted(b for b in breakpoints if lo < b < hi), hi]
    n_segments = len(edges) - 1
    per = max(2, (n_points - 1) // n_segments + 1)
    pieces = []
    for i in range(n_segments):
        t = np.linspace(0.0, 1.0, per)
        x = edges[i] + (edges[i + 1] - edges[i]) * 0.5 * (1.0 - np.cos(np.pi * t))
        pieces.append(x if i == 0 else x[1:])
    return np.concatenate(pieces)


class DistanceDistribution:
    """A distance pdf with a tabulated CDF for sampling and checking.

    Construction integrates the pdf once (raising `IntegrityError` if it
    does not normalize to 1 within 1e-4) and tabulates the CDF on a dense
    grid; `sample` then inverts the CDF by linear interpolation.
    """

    def __init__(self, pdf: Callable[[np.ndarray], np.ndarray],
                 support: tuple[float, float], kind: DistanceKind,
                 *, breakpoints: Sequence[float] = (),
                 grid_points: int = _DEFAULT_GRID_POINTS,
                 positional_sampler: Callable[[np.random.Generator, int],
                                              np.ndarray] | None = None):
        lo, hi = float(support[0]), float(support[1])
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
            raise ParameterError(f"invalid support ({lo}, {hi})")
        self.pdf = pdf
        self.support = (lo, hi)
        self.kind = kind
        self._positional_sampler = positional_sampler
        if hi - lo < 1e-12:
            # Degenerate support: all mass at lo.
            self._grid = np.array([lo, lo])
            self._cdf = np.array([0.0, 1.0])
            return
        interior = [b for b in breakpoints if lo < b < hi]
        total, abserr = integrate.quad(lambda t: float(pdf(t)), lo, hi,
                                       points=interior or None, limit=200)
        if abs(total - 1.0) > 1e-4:
            raise IntegrityError(
                f"pdf integrates to {total:.8f}, expected 1 within 1e-4")
        grid = _cosine_grid(lo, hi, interior, grid_points)
        density = np.asarray(pdf(grid), dtype=float)
        if np.min(density) < -_TRIG_ARG_TOL:
            raise IntegrityError("pdf is negative on its support")
        cdf = integrate.cumulative_trapezoid(density, grid, initial=0.0)
        cdf /= cdf[-1]
        self._grid = grid
        self._cdf = cdf

    # -- constructors ------------------------------------------------------

    @classmethod
    def bs_member(cls, geom: ClusterGeometry,
                  grid_points: int = _DEFAULT_GRID_POINTS) -> "DistanceDistribution":
        dh = geom.delta_h

        def positions(rng: np.random.Generator, n: int) -> np.ndarray:
            from .geometry import sample_uniform_disk
            pts = sample_uniform_disk(rng, n, geom.radius_r, (geom.v_norm, 0.0))
            planar = np.hypot(pts[:, 0], pts[:, 1])
            return np.sqrt(planar ** 2 + dh ** 2)

        return cls(lambda d: pdf_bs_member_distance(d, geom),
                   bs_member_support(geom), DistanceKind.BS_MEMBER,
                   grid_points=grid_points, positional_sampler=positions)

    @classmethod
    def peer(cls, offset_a: float, radius_r: float,
             grid_points: int = _DEFAULT_GRID_POINTS) -> "DistanceDistribution":
        def positions(rng: np.random.Generator, n: int) -> np.ndarray:
            from .geometry import sample_uniform_disk
            pts = sample_uniform_disk(rng, n, radius_r, (offset_a, 0.0))
            return np.hypot(pts[:, 0], pts[:, 1])

        return cls(lambda d: pdf_peer_distance(d, offset_a, radius_r),
                   peer_support(offset_a, radius_r), DistanceKind.PEER,
                   breakpoints=(radius_r - offset_a,),
                   grid_points=grid_points, positional_sampler=positions)

    @classmethod
    def center_offset(cls, radius_r: float,
                      grid_points: int = _DEFAULT_GRID_POINTS) -> "DistanceDistribution":
        def positions(rng: np.random.Generator, n: int) -> np.ndarray:
            from .geometry import sample_uniform_disk
            pts = sample_uniform_disk(rng, n, radius_r)
            return np.hypot(pts[:, 0], pts[:, 1])

        return cls(lambda a: pdf_center_offset(a, radius_r),
                   center_offset_support(radius_r), DistanceKind.CENTER_OFFSET,
                   grid_points=grid_points, positional_sampler=positions)

    # -- queries -----------------------------------------------------------

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self._grid, self._cdf, left=0.0, right=1.0)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draw(s); scalar when `size` is None."""
        lo, hi = self.support
        if hi - lo < 1e-12:
            return np.full(size, lo) if size is not None else lo
        u = rng.random(size)
        out = np.interp(u, self._cdf, self._grid)
        return out if np.ndim(out) else float(out)


def _ks_gap(samples: np.ndarray, dist: DistanceDistribution) -> float:
    """Two-sided Kolmogorov-Smirnov sup-norm gap of samples vs dist.cdf."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    f = np.asarray(dist.cdf(s))
    ranks = np.arange(1, n + 1) / n
    return float(max(np.max(ranks - f), np.max(f - (ranks - 1.0 / n))))


def empirical_distance_check(dist: DistanceDistribution, n_samples: int,
                             rng: np.random.Generator) -> float:
    """Sup-norm gap between a geometric sampling construction and the CDF.

    Positions are drawn directly (uniform disk plus offsets), distances are
    measured, and their empirical CDF is compared against the tabulated one.
    This exercises the closed-form pdf end to end.
    """
    if n_samples < 1:
        raise ParameterError(f"n_samples must be >= 1, got {n_samples}")
    if dist._positional_sampler is None:
        raise ParameterError("distribution has no positional sampling rule")
    samples = dist._positional_sampler(rng, n_samples)
    return _ks_gap(samples, dist)


def sampler_self_check(dist: DistanceDistribution, n_samples: int,
                       rng: np.random.Generator) -> float:
    """Sup-norm gap between inverse-CDF samples and the tabulated CDF."""
    samples = np.asarray(dist.sample(rng, n_samples))
    return _ks_gap(samples, dist)

"""Closed-form performance metrics, evaluated by adaptive quadrature.

Five quantities describe one cluster served by the base station:

* coverage probability: a random member decodes the BS broadcast;
* transmission success probability: a random member decodes a packet
  relayed by another random member of the same cluster;
* request success probability: at least one cluster member holds the packet
  and a recovery exchange succeeds;
* average delay of a packet, counting the recovery round trip;
* average area spectral efficiency (ASE) of the multicast.

All probabilities average the per-link exponential success law over the
closed-form distance densities from `distributions`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .channel import LinkKind, RadioParams, link_success_probability
from .distributions import (
    ClusterGeometry,
    bs_member_support,
    pdf_bs_member_distance,
    pdf_center_offset,
    pdf_peer_distance,
)
from .errors import NumericError, ParameterError

# Absolute tolerance demanded from every quadrature result.
_QUAD_TOL = 1e-6


def _quad(f, lo: float, hi: float, points=None, epsabs=1e-10) -> float:
    result = integrate.quad(f, lo, hi, points=points, limit=200,
                            epsabs=epsabs, epsrel=1e-10, full_output=1)
    if len(result) > 3:
        raise NumericError(f"quadrature failed on [{lo}, {hi}]: {result[3]}")
    value, abserr = result[0], result[1]
    if abserr > _QUAD_TOL:
        raise NumericError(
            f"quadrature error {abserr:.2e} exceeds {_QUAD_TOL:.0e} on [{lo}, {hi}]")
    return value


def coverage_probability(geom: ClusterGeometry, radio: RadioParams) -> float:
    """Probability that a random cluster member decodes the BS broadcast."""
    lo, hi = bs_member_support(geom)

    def integrand(d):
        return (link_success_probability(radio.p_bs_mw, d, LinkKind.BS_TO_UAV, radio)
                * float(pdf_bs_member_distance(d, geom)))

    return _quad(integrand, lo, hi)


def transmission_success_probability(radius_r: float, radio: RadioParams) -> float:
    """Probability that one member decodes a relay from another member.

    Both ends are uniform on the cluster disk; the relay offset `a` is
    averaged over its own density, the receiver distance over the
    conditional peer density (whose two branches meet at r - a).
    """
    if radius_r <= 0:
        raise ParameterError(f"radius_r must be positive, got {radius_r}")
    r = radius_r

    def success_given_offset(a: float) -> float:
        def integrand(d):
            return (link_success_probability(radio.p_uav_mw, d,
                                             LinkKind.UAV_TO_UAV, radio)
                    * float(pdf_peer_distance(d, a, r)))

        junction = r - a
        points = [junction] if 0.0 < junction < r + a else None
        return _quad(integrand, 0.0, r + a, points=points, epsabs=1e-11)

    def outer(a):
        return success_given_offset(float(a)) * float(pdf_center_offset(a, r))

    return _quad(outer, 0.0, r)


def cluster_peer_count(lambda_off: float, radius_r: float) -> int:
    """Nominal number of members per cluster disk at offspring density
    lambda_off: floor(lambda_off * pi * r^2)."""
    if lambda_off <= 0 or radius_r <= 0:
        raise ParameterError(
            f"lambda_off and radius_r must be positive, got {lambda_off}, {radius_r}")
    return math.floor(lambda_off * math.pi * radius_r ** 2)


def request_success_probability(p_cov: float, p_suc: float, lambda_off: float,
                                radius_r: float) -> float:
    """Probability a missing member recovers the packet from its cluster.

    Some member must have decoded the broadcast (one minus the chance that
    all floor(lambda_off * pi * r^2) members failed), and the relayed copy
    must then be decoded.
    """
    for name, p in (("p_cov", p_cov), ("p_suc", p_suc)):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"{name} must lie in [0, 1], got {p}")
    k = cluster_peer_count(lambda_off, radius_r)
    if k < 1:
        raise ParameterError(
            f"expected members per cluster is {k}; need at least 1")
    return (1.0 - (1.0 - p_cov) ** k) * p_suc


def average_delay(p_cov: float, p_suc: float, packet_len_ms: float,
                  t_req_ms: float) -> float:
    """Mean per-packet delay in ms under the recovery protocol.

    A covered member is done after the broadcast; an uncovered one waits for
    the broadcast, then for a request plus relayed copy repeated until the
    relay is decoded (geometric with mean 1 / p_suc).
    """
    for name, p in (("p_cov", p_cov), ("p_suc", p_suc)):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"{name} must lie in [0, 1], got {p}")
    if packet_len_ms <= 0 or t_req_ms < 0:
        raise ParameterError(
            f"packet_len_ms must be positive and t_req_ms non-negative, "
            f"got {packet_len_ms}, {t_req_ms}")
    if p_suc == 0.0 and p_cov < 1.0:
        raise NumericError("average delay diverges: p_suc = 0 with p_cov < 1")
    if p_cov == 1.0:
        return packet_len_ms
    recovery = (packet_len_ms + t_req_ms) / p_suc
    return p_cov * packet_len_ms + (1.0 - p_cov) * (packet_len_ms + recovery)


def average_ase(p_cov: float, p_suc: float, lambda_off: float,
                snr_threshold: float) -> float:
    """Average area spectral efficiency in bit/s/Hz/m^2.

    Members served either directly or through one recovery exchange count
    toward the delivered rate density.
    """
    for name, p in (("p_cov", p_cov), ("p_suc", p_suc)):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"{name} must lie in [0, 1], got {p}")
    if lambda_off <= 0 or snr_threshold <= 0:
        raise ParameterError(
            f"lambda_off and snr_threshold must be positive, "
            f"got {lambda_off}, {snr_threshold}")
    served = p_cov + (1.0 - p_cov) * p_suc
    return served * lambda_off * math.log2(1.0 + snr_threshold)


@dataclass(frozen=True)
class MetricInputs:
    """Everything needed to evaluate the five metrics for one cluster."""

    geom: ClusterGeometry
    radio: RadioParams
    lambda_off: float
    packet_len_ms: float
    t_req_ms: float


@dataclass(frozen=True)
class MetricResults:
    p_cov: float
    p_suc: float
    p_req: float
    delay_aver_ms: float
    ase_aver: float


def evaluate_metrics(inputs: MetricInputs) -> MetricResults:
    """Evaluate all five metrics for one cluster geometry."""
    p_cov = coverage_probability(inputs.geom, inputs.radio)
    p_suc = transmission_success_probability(inputs.geom.radius_r, inputs.radio)
    p_req = request_success_probability(p_cov, p_suc, inputs.lambda_off,
                                        inputs.geom.radius_r)
    delay = average_delay(p_cov, p_suc, inputs.packet_len_ms, inputs.t_req_ms)
    ase = average_ase(p_cov, p_suc, inputs.lambda_off,
                      inputs.radio.snr_threshold)
    return MetricResults(p_cov=p_cov, p_suc=p_suc, p_req=p_req,
                         delay_aver_ms=delay, ase_aver=ase)

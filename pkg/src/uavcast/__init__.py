"""Clustered UAV multicast: geometry, link analysis, and protocol simulation.

A macro base station multicasts to a swarm of UAVs deployed as a Poisson
cluster process.  The package provides the closed-form distance
distributions and performance metrics for that geometry, an event-driven
simulation of a cluster-based packet recovery protocol (plus ACK
retransmission and random-network-coding baselines), and studies that
validate the analysis against simulation.
"""

from .analysis import (
    MetricInputs,
    MetricResults,
    average_ase,
    average_delay,
    cluster_peer_count,
    coverage_probability,
    evaluate_metrics,
    request_success_probability,
    transmission_success_probability,
)
from .channel import (
    LinkKind,
    PathLossParams,
    RadioParams,
    db_to_linear,
    linear_to_db,
    link_success_probability,
    path_loss_db,
    path_loss_linear,
    reception_success,
)
from .config import ScenarioConfig
from .distributions import (
    ClusterGeometry,
    DistanceDistribution,
    DistanceKind,
    empirical_distance_check,
    pdf_bs_member_distance,
    pdf_center_offset,
    pdf_peer_distance,
    pdf_planar_bs_distance,
    sampler_self_check,
)
from .errors import IntegrityError, NumericError, ParameterError, UavcastError
from .experiments import (
    MetricRow,
    MetricTable,
    SweepSpec,
    design_radius,
    run_ase_study,
    run_delay_study,
    run_design_insight_study,
    run_validation_study,
)
from .geometry import (
    Cluster,
    Position3,
    Topology,
    Vec2,
    build_topology,
    sample_cluster_members,
    sample_parent_centers,
    sample_uniform_disk,
    write_topology_csv,
)
from .protocol import (
    Event,
    EventKind,
    MediumState,
    SchemeOutcome,
    SimParams,
    UavState,
    run_ack_benchmark,
    run_clustering_scheme,
    run_rnc_scheme,
    write_event_log,
)

__version__ = "0.1.0"

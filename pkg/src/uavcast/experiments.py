"""Monte-Carlo studies and their aggregation into metric tables.

Every study emits a `MetricTable` whose rows follow one CSV schema:

    study,sweep_param,sweep_value,scheme,metric,mean,stderr,n

Replications are mutually independent: each gets its own generator derived
from (base_seed, study id, sweep indices, scheme, replication index) through
`numpy`'s splittable SeedSequence, so reruns with the same base seed are
bit-for-bit reproducible and replications could be farmed out concurrently
without changing results.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import analysis
from .channel import LinkKind, reception_success
from .config import ScenarioConfig
from .distributions import ClusterGeometry
from .errors import ParameterError
from .geometry import build_topology, sample_uniform_disk
from .protocol import SCHEME_RUNNERS

_STUDY_IDS = {"validation_coverage": 1, "validation_success": 2,
              "design_insight": 3, "delay": 4, "ase": 5}
_SCHEME_ORDER = ("clustering", "benchmark", "rnc")

DEFAULT_V_GRID = (200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0)
DEFAULT_R_GRID = (10.0, 25.0, 50.0, 75.0, 100.0)
DEFAULT_DESIGN_C_GRID = (2, 4, 6, 8, 10)
DEFAULT_DESIGN_V_GRID = (400.0, 800.0, 1200.0)
DEFAULT_D0_GRID = (400.0, 800.0, 1200.0)
DEFAULT_C_GRID = (2, 5, 10)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep dimension: a parameter name and its grid of values."""

    parameter: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ParameterError(f"{self.parameter}: empty sweep")
        if any(not math.isfinite(v) for v in self.values):
            raise ParameterError(f"{self.parameter}: sweep values must be finite")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ParameterError(
                f"{self.parameter}: sweep values must be strictly increasing")


@dataclass(frozen=True)
class MetricRow:
    study: str
    sweep_param: str
    sweep_value: float
    scheme: str
    metric: str
    mean: float
    stderr: float
    n: int


@dataclass
class MetricTable:
    rows: list[MetricRow]

    CSV_HEADER = ("study", "sweep_param", "sweep_value", "scheme", "metric",
                  "mean", "stderr", "n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        for r in self.rows:
            writer.writerow([r.study, r.sweep_param, f"{r.sweep_value:.10g}",
                             r.scheme, r.metric, f"{r.mean:.10g}",
                             f"{r.stderr:.10g}", r.n])
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())

    def select(self, **criteria) -> list[MetricRow]:
        """Rows whose attributes equal all given criteria."""
        out = self.rows
        for name, wanted in criteria.items():
            out = [r for r in out if getattr(r, name) == wanted]
        return out

    def value(self, **criteria) -> float:
        """Mean of the single row matching the criteria."""
        rows = self.select(**criteria)
        if len(rows) != 1:
            raise ParameterError(
                f"expected exactly one row for {criteria}, found {len(rows)}")
        return rows[0].mean


def _rng(base_seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=key))


def _mean_stderr(samples: np.ndarray) -> tuple[float, float, int]:
    """Mean, standard error and count, skipping NaN entries."""
    valid = samples[~np.isnan(samples)]
    n = valid.size
    if n == 0:
        return float("nan"), float("nan"), 0
    if n == 1:
        return float(valid[0]), float("nan"), 1
    return float(valid.mean()), float(valid.std(ddof=1) / math.sqrt(n)), n


def run_validation_study(kind: str, config: ScenarioConfig,
                         sweep: SweepSpec | None = None) -> MetricTable:
    """Closed-form probabilities against direct geometric simulation.

    kind "coverage": broadcast decoding probability vs the cluster-center
    distance.  kind "success": member-to-member decoding probability vs the
    cluster radius.  The simulation draws positions and fading directly and
    never touches the quadrature path.
    """
    if kind not in ("coverage", "success"):
        raise ParameterError(f"kind: expected 'coverage' or 'success', got {kind!r}")
    study = f"validation_{kind}"
    if sweep is None:
        sweep = (SweepSpec("v_norm", DEFAULT_V_GRID) if kind == "coverage"
                 else SweepSpec("radius_r", DEFAULT_R_GRID))
    n_trials = config.replications
    radio = config.radio
    rows = []
    for i, value in enumerate(sweep.values):
        rng = _rng(config.base_seed, (_STUDY_IDS[study], i))
        if kind == "coverage":
            geom = config.geometry(v_norm=value)
            pts = sample_uniform_disk(rng, n_trials, geom.radius_r,
                                      (geom.v_norm, 0.0))
            dist = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2 + geom.delta_h ** 2)
            ok = reception_success(radio.p_bs_mw, dist, LinkKind.BS_TO_UAV,
                                   radio, rng)
            theory = analysis.coverage_probability(geom, radio)
            metric = "p_cov"
        else:
            a = sample_uniform_disk(rng, n_trials, value)
            b = sample_uniform_disk(rng, n_trials, value)
            dist = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])
            ok = reception_success(radio.p_uav_mw, dist, LinkKind.UAV_TO_UAV,
                                   radio, rng)
            theory = analysis.transmission_success_probability(value, radio)
            metric = "p_suc"
        mean = float(np.mean(ok))
        stderr = float(np.std(ok, ddof=1) / math.sqrt(n_trials))
        rows.append(MetricRow(study, sweep.parameter, value, "theory", metric,
                              theory, 0.0, 0))
        rows.append(MetricRow(study, sweep.parameter, value, "monte_carlo",
                              metric, mean, stderr, n_trials))
    return MetricTable(rows)


def design_radius(total_uavs: int, num_clusters: int, lambda_off: float) -> float:
    """Cluster radius that keeps the member density at lambda_off when
    total_uavs are split into num_clusters clusters."""
    if num_clusters < 1 or total_uavs < 1 or lambda_off <= 0:
        raise ParameterError("design_radius arguments must be positive")
    return math.sqrt(total_uavs / (num_clusters * lambda_off * math.pi))


def run_design_insight_study(config: ScenarioConfig,
                             c_values=DEFAULT_DESIGN_C_GRID,
                             v_values=DEFAULT_DESIGN_V_GRID) -> MetricTable:
    """Recovery success vs the number of clusters, analytic only.

    For each cluster count the radius shrinks to hold the member density
    fixed (`design_radius`), trading per-cluster holder diversity against
    shorter relay links.  Grid points whose geometry is infeasible (no
    members, or center distance inside the cluster disk) carry NaN means.
    """
    study = "design_insight"
    rows = []
    for c in c_values:
        r_c = design_radius(config.total_uavs, int(c), config.lambda_off_per_m2)
        try:
            p_suc = analysis.transmission_success_probability(r_c, config.radio)
            k = analysis.cluster_peer_count(config.lambda_off_per_m2, r_c)
        except ParameterError:
            p_suc, k = float("nan"), 0
        rows.append(MetricRow(study, "num_clusters", float(c), "theory",
                              "p_suc", p_suc, 0.0, 0))
        for v in v_values:
            try:
                if k < 1:
                    raise ParameterError("no members per cluster")
                geom = ClusterGeometry(v_norm=v, radius_r=r_c,
                                       h1=config.h1_m, h2=config.h2_m)
                p_cov = analysis.coverage_probability(geom, config.radio)
                p_req = analysis.request_success_probability(
                    p_cov, p_suc, config.lambda_off_per_m2, r_c)
            except ParameterError:
                p_cov, p_req = float("nan"), float("nan")
            rows.append(MetricRow(study, "num_clusters", float(c), "theory",
                                  f"p_cov_v{v:g}", p_cov, 0.0, 0))
            rows.append(MetricRow(study, "num_clusters", float(c), "theory",
                                  f"p_req_v{v:g}", p_req, 0.0, 0))
    return MetricTable(rows)


def _epoch_metrics(scheme: str, config: ScenarioConfig, rng: np.random.Generator):
    """Run one epoch and reduce it to (mean delay, delivery ratio, ase)."""
    topology = build_topology(config, rng)
    outcome = SCHEME_RUNNERS[scheme](topology, config.radio,
                                     config.sim_params(), rng)
    n = outcome.n_uavs
    delivered = outcome.delivered
    delays = outcome.delivery_time_ms[delivered]
    if scheme == "rnc":
        # Per-packet delay: the decode instant covers a whole generation
        # streamed back to back, so all but one packet length is pipeline
        # amortization.
        delays = delays - (config.rnc_generation_size - 1) * config.packet_len_ms
    mean_delay = float(delays.mean()) if delays.size else float("nan")
    ratio = float(delivered.mean()) if n else float("nan")
    rate_density = (config.lambda_off_per_m2
                    * math.log2(1.0 + config.radio.snr_threshold))
    if scheme == "clustering":
        served = int(np.count_nonzero(delivered))
    else:
        # ACK benchmark: only members served by the first broadcast count,
        # later rounds are retransmissions of the same packet.
        served = int(np.count_nonzero(outcome.via_broadcast))
    ase = (served / n) * rate_density if n else float("nan")
    return mean_delay, ratio, ase


def _replicated(study: str, scheme: str, config: ScenarioConfig,
                key: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    reps = config.replications
    delays = np.empty(reps)
    ratios = np.empty(reps)
    ases = np.empty(reps)
    scheme_id = _SCHEME_ORDER.index(scheme)
    for rep in range(reps):
        rng = _rng(config.base_seed,
                   (_STUDY_IDS[study], *key, scheme_id, rep))
        delays[rep], ratios[rep], ases[rep] = _epoch_metrics(scheme, config, rng)
    return delays, ratios, ases


def run_delay_study(config: ScenarioConfig, d0_values=DEFAULT_D0_GRID,
                    c_values=DEFAULT_C_GRID) -> MetricTable:
    """Simulated per-packet delay of every enabled scheme over (d0, C).

    Rows carry the replication mean of per-epoch delay averages (undelivered
    members excluded) plus a delivery-ratio metric; `analytic` rows give the
    closed-form clustering delay at center distance d0.
    """
    study = "delay"
    rows = []
    for i_d0, d0 in enumerate(d0_values):
        analytic = _analytic_metrics(config, d0)
        for i_c, c in enumerate(c_values):
            scenario = config.replace(d0_m=d0, num_clusters=int(c))
            for scheme in config.schemes:
                delays, ratios, _ = _replicated(study, scheme, scenario,
                                                (i_d0, i_c))
                mean, stderr, n = _mean_stderr(delays)
                rows.append(MetricRow(study, "num_clusters", float(c), scheme,
                                      f"delay_ms_d0_{d0:g}", mean, stderr, n))
                rmean, rstderr, rn = _mean_stderr(ratios)
                rows.append(MetricRow(study, "num_clusters", float(c), scheme,
                                      f"delivery_ratio_d0_{d0:g}", rmean,
                                      rstderr, rn))
            rows.append(MetricRow(study, "num_clusters", float(c), "analytic",
                                  f"delay_ms_d0_{d0:g}",
                                  analytic["delay"], 0.0, 0))
    return MetricTable(rows)


def run_ase_study(config: ScenarioConfig, d0_values=DEFAULT_D0_GRID,
                  c_values=DEFAULT_C_GRID) -> MetricTable:
    """Simulated area spectral efficiency over (d0, C).

    The clustering rows count members served either by the broadcast or by
    in-cluster recovery; benchmark rows count only the first broadcast.  The
    RNC baseline spends its airtime on coded repair of the same packets, so
    its delivered-rate density equals the benchmark's by construction and
    its rows duplicate them.
    """
    study = "ase"
    rows = []
    for i_d0, d0 in enumerate(d0_values):
        analytic = _analytic_metrics(config, d0)
        for i_c, c in enumerate(c_values):
            scenario = config.replace(d0_m=d0, num_clusters=int(c))
            benchmark_row = None
            for scheme in ("clustering", "benchmark"):
                _, _, ases = _replicated(study, scheme, scenario, (i_d0, i_c))
                mean, stderr, n = _mean_stderr(ases)
                row = MetricRow(study, "num_clusters", float(c), scheme,
                                f"ase_d0_{d0:g}", mean, stderr, n)
                rows.append(row)
                if scheme == "benchmark":
                    benchmark_row = row
            rows.append(MetricRow(study, "num_clusters", float(c), "rnc",
                                  benchmark_row.metric, benchmark_row.mean,
                                  benchmark_row.stderr, benchmark_row.n))
            rows.append(MetricRow(study, "num_clusters", float(c), "analytic",
                                  f"ase_d0_{d0:g}", analytic["ase"], 0.0, 0))
    return MetricTable(rows)


def _analytic_metrics(config: ScenarioConfig, d0: float) -> dict[str, float]:
    geom = config.geometry(v_norm=d0)
    p_cov = analysis.coverage_probability(geom, config.radio)
    p_suc = analysis.transmission_success_probability(config.radius_r_m,
                                                      config.radio)
    return {
        "p_cov": p_cov,
        "p_suc": p_suc,
        "delay": analysis.average_delay(p_cov, p_suc, config.packet_len_ms,
                                        config.t_req_ms),
        "ase": analysis.average_ase(p_cov, p_suc, config.lambda_off_per_m2,
                                    config.radio.snr_threshold),
    }

"""Per-decision latency, energy, and memory accounting."""

import resource
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyTrace

DEFAULT_DEVICE_WATTS = 10.0  # embedded-target power envelope for estimates


@dataclass(frozen=True)
class LatencyStats:
    mean_ms: float
    p95_ms: float
    max_ms: float
    n_decisions: int
    energy_j_per_decision: float
    memory_peak_bytes: int

    def to_dict(self):
        return {
            "mean_ms": self.mean_ms, "p95_ms": self.p95_ms, "max_ms": self.max_ms,
            "n_decisions": self.n_decisions,
            "energy_j_per_decision": self.energy_j_per_decision,
            "memory_peak_bytes": self.memory_peak_bytes,
        }


def nearest_rank_percentile(values, q):
    """Nearest-rank percentile: the ceil(q/100 * n)-th order statistic."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if len(v) == 0:
        raise EmptyTrace("no values")
    rank = int(np.ceil(q / 100.0 * len(v)))
    return float(v[max(rank, 1) - 1])


def peak_rss_bytes():
    """Process peak resident set size (documented as a process-level
    estimate of the decode path footprint)."""
    ru = resource.getrusage(resource.RUSAGE_SELF)
    return int(ru.ru_maxrss * 1024)  # ru_maxrss is KiB on Linux


def measure(trace_ms, cpu_seconds=None, watts=DEFAULT_DEVICE_WATTS):
    """LatencyStats from per-decision latencies (ms).

    Energy per decision = CPU time per decision x the configured watts;
    when cpu_seconds is not supplied, wall latencies stand in for CPU
    time (single-threaded decode path).
    """
    trace_ms = list(trace_ms)
    if not trace_ms:
        raise EmptyTrace("no decisions recorded")
    n = len(trace_ms)
    if cpu_seconds is None:
        cpu_seconds = sum(trace_ms) / 1000.0
    return LatencyStats(
        mean_ms=float(np.mean(trace_ms)),
        p95_ms=nearest_rank_percentile(trace_ms, 95.0),
        max_ms=float(np.max(trace_ms)),
        n_decisions=n,
        energy_j_per_decision=float(cpu_seconds / n * watts),
        memory_peak_bytes=peak_rss_bytes(),
    )

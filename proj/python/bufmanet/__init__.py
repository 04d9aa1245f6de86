"""Buffer-limited two-hop relay MANET: closed-form model and slotted simulator."""

from ._core import (
    Accounting,
    ConvergenceError,
    DelayLimit,
    EcGeometry,
    FixedPointOptions,
    FixedPointResult,
    Mac,
    Mobility,
    NetworkParams,
    RelayOSD,
    ReplicationResult,
    SchedProbs,
    SimOptions,
    SimReport,
    SourceOSD,
    TheoryReport,
    ThroughputLimit,
    analyze,
    cli,
    ec_mac_probs,
    limiting_delay,
    limiting_throughput,
    ls_mac_probs,
    overflow_fixed_point,
    relay_osd,
    relay_substate_dist,
    sched_probs,
    simulate,
    source_osd,
    theory_json,
    throughput_capacity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

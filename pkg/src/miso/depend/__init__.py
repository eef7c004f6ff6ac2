"""Replicated execution, fault injection and health monitoring."""
from miso.depend.faults import FaultModel, FaultSpec, inject_faults
from miso.depend.health import CellHealth, update_health
from miso.depend.replication import (
    MismatchRecord, ReplicatedExecutor, ReplicationConfig, UnrecoverableMismatch,
    run_replicated,
)

__all__ = [
    "CellHealth", "FaultModel", "FaultSpec", "MismatchRecord", "ReplicatedExecutor",
    "ReplicationConfig", "UnrecoverableMismatch", "inject_faults", "run_replicated",
    "update_health",
]

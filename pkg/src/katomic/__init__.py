"""Verification of k-atomicity for timed read/write register histories."""

from .history import (
    Anomaly,
    AnomalyKind,
    History,
    Kind,
    Operation,
    Record,
    Trace,
    TraceSyntaxError,
    normalize,
    parse_trace,
    partition_by_key,
    precedes,
    read,
    validate,
    write,
)
from .witness import ReadContainer, Verdict, WitnessOrder, WriteSlot
from .zones import Cluster, Zone, ZoneKind, check_1atomic, clusters, zone
from .lbt import check_2atomic_lbt
from .fzf import check_2atomic_fzf, chunk_set, candidate_orders, is_viable
from .oracle import CapExceeded, Unknown, brute_force_k_atomic, check_witness, min_k

__version__ = "0.1.0"

"""Observe artificial-life runs and check evolutionary axioms on their traces."""

from .config import ObserverConfig, SelectionThresholds, default_observer
from .report import full_report
from .relations import build_relations
from .trace import EntityRef, EntitySnapshot, State, Trace, read_trace, write_trace, validate_trace

__version__ = "0.1.0"

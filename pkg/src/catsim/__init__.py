from .states import (CoherentKet, DyadMixture, SuperposedState, encode, fidelity, inner, normalize,
                     overlap, prune, tensor)
from .schema_definitions import (BeamSplitterSpec, DecoherenceParams, DetectorModel, EpsilonSchedule,
                                 ErrorBudget, EulerAngles, LogicalQubit, RotationSpec, RunConfig)
from .mappings import BellOutcome, QuasiBellLabel, ReadoutOutcome
from . import detection, error_analysis, gates, oracle, protocols


__all__ = (
    "CoherentKet",
    "SuperposedState",
    "DyadMixture",
    "overlap",
    "inner",
    "normalize",
    "tensor",
    "prune",
    "encode",
    "fidelity",
    "BeamSplitterSpec",
    "DecoherenceParams",
    "DetectorModel",
    "EpsilonSchedule",
    "ErrorBudget",
    "EulerAngles",
    "LogicalQubit",
    "RotationSpec",
    "RunConfig",
    "BellOutcome",
    "QuasiBellLabel",
    "ReadoutOutcome",
    "gates",
    "detection",
    "protocols",
    "error_analysis",
    "oracle",
)

def __dir__() -> "list[str]":
    return list(__all__)

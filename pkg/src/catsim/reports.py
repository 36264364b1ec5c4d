"""Tabular reports for the command line, written as CSV or JSON."""
from __future__ import annotations
import csv
import itertools
import json
import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple
import numpy as np
from .detection import readout, sample_many
from .error_analysis import default_epsilon_bar, detector_miss, rotation_fidelity, threshold_probs
from .mappings import ReadoutOutcome, reference_values
from .oracle.checks import CheckResult
from .protocols import ProtocolResult, ProtocolTrace, cnot, cnot_trace, describe_outcome
from .schema_definitions import DetectorModel, LogicalQubit
from .states import SuperposedState, encode, normalize

Row = Dict[str, object]
RunTraces = List[Tuple[str, ProtocolTrace]]


def format_number(value) -> str:
    """Scientific notation with 12 significant digits, '.' decimal."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.11e}"
    if value is None:
        return ""
    return str(getattr(value, "value", value))


def write_rows(rows: Sequence[Row], columns: Sequence[str], stream: TextIO, output_format: str = "csv"):
    match output_format:
        case "csv":
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_number(row.get(c)) for c in columns])
        case "json":
            document = [{c: format_number(row.get(c)) for c in columns} for row in rows]
            stream.write(json.dumps(document, indent=2) + "\n")
        case "jsonl":
            for row in rows:
                stream.write(json.dumps({c: row.get(c) for c in columns}) + "\n")
        case _:
            raise ValueError(f"Unsupported output format: {output_format}")


# Reference numbers
REFERENCE_COLUMNS = ["quantity", "value", "reference", "relative_deviation"]


def reference_rows(alpha: float, efficiency: float) -> List[Row]:
    eps_bar = default_epsilon_bar(alpha)
    k0 = threshold_probs(alpha, efficiency, 0, eps_bar)
    k2 = threshold_probs(alpha, efficiency, 2, eps_bar)
    values = {
        "detector_miss": detector_miss(alpha, efficiency),
        "rotation_fidelity": rotation_fidelity(1 / np.sqrt(2), 1 / np.sqrt(2), alpha, eps_bar),
        "p_A_k0": k0.p_A,
        "p_B_k0": k0.p_B,
        "undetected_k0": k0.undetected,
        "detected_k0": k0.detected,
        "undetected_k2": k2.undetected,
        "detected_k2": k2.detected,
    }
    rows = []
    for quantity, value in values.items():
        reference = reference_values[quantity]
        rows.append({"quantity": quantity, "value": value, "reference": reference,
                     "relative_deviation": (value - reference) / reference})
    return rows


# Readout
READOUT_COLUMNS = ["outcome", "probability", "sampled", "rate"]


def readout_rows(qubit: LogicalQubit, det: DetectorModel, shots: int = 0, seed: int = 0) -> List[Row]:
    dist = readout(normalize(encode(qubit)), qubit.alpha, det)
    counts = {}
    if shots:
        samples = sample_many(dist, shots, seed)
        counts = {outcome: samples.count(outcome) for outcome in ReadoutOutcome}
    return [{"outcome": outcome, "probability": p,
             "sampled": counts.get(outcome) if shots else None,
             "rate": counts.get(outcome, 0) / shots if shots else None}
            for outcome, p in dist.items()]


# Teleportation
BRANCH_COLUMNS = ["outcome", "probability", "fidelity", "sampled"]


def branch_rows(result: ProtocolResult, shots: int = 0, seed: int = 0) -> List[Row]:
    dist = result.distribution()
    counts = {}
    if shots:
        samples = sample_many(dist, shots, seed)
        counts = {outcome: samples.count(outcome) for outcome in dist.outcomes()}
    rows = []
    for outcome, branch in result.branches.items():
        label = describe_outcome(outcome)
        rows.append({"outcome": label, "probability": branch.probability, "fidelity": branch.fidelity,
                     "sampled": counts.get(outcome, 0) if shots else None})
    return rows


# CNOT
CNOT_COLUMNS = ["control", "target", "success", "mean_fidelity", "min_fidelity", "sampled_success",
                "sampled_fidelity"]


def cnot_rows(inputs: Iterable, alpha: float, det: DetectorModel, prune_tol: float,
              ideal_corrections: bool = True, chi: Optional[SuperposedState] = None,
              shots: int = 0, seed: int = 0) -> Tuple[List[Row], RunTraces]:
    """One row per input pair, plus the traces of the followed (or, with shots, every sampled) run."""
    rows, traces = [], []
    for control_label, control, target_label, target in inputs:
        result, _ = cnot(control, target, alpha, det, chi=chi, ideal_corrections=ideal_corrections,
                         seed=seed, prune_tol=prune_tol)
        done = [b for b in result.branches.values() if b.state is not None and b.probability > 0]
        success = sum(b.probability for b in done)
        mean = sum(b.probability * b.fidelity for b in done) / success if success > 0 else float("nan")
        row = {"control": control_label, "target": target_label, "success": success,
               "mean_fidelity": mean, "min_fidelity": min((b.fidelity for b in done), default=float("nan"))}
        if shots:
            sampled = [result.branches[o] for o in sample_many(result.distribution(), shots, seed)]
            fidelities = [b.fidelity for b in sampled if b.state is not None]
            row["sampled_success"] = len(fidelities)
            row["sampled_fidelity"] = float(np.mean(fidelities)) if fidelities else float("nan")
        rows.append(row)
        traces += run_traces(result, cnot_trace, shots, seed, prefix=f"{control_label}|{target_label}:")
        logging.info(f"CNOT {control_label},{target_label}: success {success:.6g}, mean fidelity {mean:.6g}")
    return rows, traces


def truth_table_inputs(alpha: float):
    basis = {0: SuperposedState.coherent(alpha), 1: SuperposedState.coherent(-alpha)}
    for x, y in itertools.product((0, 1), repeat=2):
        yield str(x), basis[x], str(y), basis[y]


# Traces
TRACE_COLUMNS = ["run", "step", "outcome", "p", "fidelity"]


def run_traces(result: ProtocolResult, trace_for: Callable, shots: int = 0, seed: int = 0,
               prefix: str = "") -> RunTraces:
    """The followed run's trace, or one trace per sampled run when shots > 0."""
    if not shots:
        return [(f"{prefix}0", result.trace)]
    outcomes = sample_many(result.distribution(), shots, seed)
    return [(f"{prefix}{i}", trace_for(result, outcome)) for i, outcome in enumerate(outcomes)]


def trace_rows(traces: RunTraces) -> List[Row]:
    return [{"run": run, **step.model_dump()} for run, trace in traces for step in trace.steps]


# Verification
CHECK_COLUMNS = ["name", "max_deviation", "bound", "passed", "detail"]


def check_rows(results: Sequence[CheckResult]) -> List[Row]:
    return [result.model_dump() for result in results]


"""Composite protocols: entangled resources, teleportation and the gate-teleported CNOT.

Every protocol evaluates all measurement branches exactly and then follows one of them, either
the one requested by the caller or one drawn with the given seed.
"""
from __future__ import annotations
import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
from .detection import OutcomeDistribution, bell_measure, sample
from .exceptions import ContractViolation, ProtocolFailure
from .gates import (PAULI_X, balanced_beam_splitter, displace_via_bs, hadamard, hadamard_fidelity_bound,
                    ideal_cnot, ideal_hadamard, ideal_pauli, logical_gate, phase_shift_pi, u_z)
from .mappings import BellOutcome, QuasiBellLabel, cnot_corrections, quasi_bell_signs, teleport_corrections
from .schema_definitions import DetectorModel, TraceStep
from .states import DEFAULT_PRUNE_TOL, SuperposedState, fidelity, normalize, prune, tensor


class ProtocolTrace:
    """Audit trail of a protocol run, one step per measurement or checkpoint."""

    def __init__(self, steps: Optional[List[TraceStep]] = None):
        self.steps = list(steps or [])

    def record(self, step: str, outcome: str, p: float, fidelity: Optional[float] = None):
        self.steps.append(TraceStep(step=step, outcome=outcome, p=min(max(p, 0.0), 1.0), fidelity=fidelity))

    @property
    def failed(self) -> bool:
        return any(s.outcome == BellOutcome.FAILURE.value for s in self.steps)

    def to_jsonl(self) -> str:
        return "\n".join(step.model_dump_json() for step in self.steps)

    def __len__(self):
        return len(self.steps)


class Branch:
    def __init__(self, outcome, probability: float, state: Optional[SuperposedState],
                 fidelity: Optional[float] = None):
        self.outcome = outcome
        self.probability = probability
        self.state = state
        self.fidelity = fidelity

    def __repr__(self):
        return f"Branch({self.outcome}, p={self.probability:.6g}, fidelity={self.fidelity})"


class ProtocolResult:
    """All branches of a protocol and the one that was followed."""

    def __init__(self, branches: Dict, outcome, trace: ProtocolTrace):
        self.branches = branches
        self.outcome = outcome
        self.trace = trace

    @property
    def output(self) -> Optional[SuperposedState]:
        branch = self.branches.get(self.outcome)
        return None if branch is None else branch.state

    def require_output(self) -> SuperposedState:
        if self.output is None:
            raise ProtocolFailure(f"Protocol ended in {describe_outcome(self.outcome)}", self.trace)
        return self.output

    def distribution(self) -> OutcomeDistribution:
        return OutcomeDistribution({o: b.probability for o, b in self.branches.items()})

    @property
    def failure_probability(self) -> float:
        return sum(b.probability for o, b in self.branches.items() if _is_failure(o))


def describe_outcome(outcome) -> str:
    """'phi_plus' for one Bell outcome, 'phi_plus/failure' for a pair."""
    if isinstance(outcome, tuple):
        return "/".join(o.value for o in outcome)
    return getattr(outcome, "value", str(outcome))


def _is_failure(outcome) -> bool:
    if isinstance(outcome, tuple):
        return BellOutcome.FAILURE in outcome
    return outcome is BellOutcome.FAILURE


def _choose(distribution: OutcomeDistribution, outcome, seed: Optional[int]):
    if outcome is not None:
        if outcome not in distribution:
            raise ContractViolation(f"Unknown outcome {outcome}")
        return outcome
    if seed is None:
        return max(distribution.items(), key=lambda item: item[1])[0]
    return sample(distribution, seed)


# Pauli corrections
def apply_pauli(s: SuperposedState, mode: int, pauli: str, alpha: float, ideal: bool = False,
                sigma_z_transmission: Optional[float] = None) -> SuperposedState:
    """X is the pi phase shift. Z is D(i pi / (4 alpha)), or its beam-splitter drive, or the ideal map."""
    match pauli:
        case "x":
            return phase_shift_pi(s, mode)
        case "z" if ideal:
            return ideal_pauli(s, mode, alpha, "z")
        case "z" if sigma_z_transmission is not None:
            drive = np.pi / (4 * alpha * np.sqrt(1 - sigma_z_transmission))
            return displace_via_bs(s, mode, drive, sigma_z_transmission)
        case "z":
            return u_z(s, mode, np.pi, alpha)
        case _:
            raise ContractViolation(f"Unknown Pauli {pauli!r}")


def apply_paulis(s: SuperposedState, mode: int, paulis: Sequence[str], alpha: float, **options) -> SuperposedState:
    for pauli in paulis:
        s = apply_pauli(s, mode, pauli, alpha, **options)
    return s


# Resource states
def make_quasi_bell(label: QuasiBellLabel, alpha: float) -> SuperposedState:
    if not alpha > 0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")
    second, relative = quasi_bell_signs[QuasiBellLabel(label)]
    kets = np.array([[alpha, second * alpha], [-alpha, -second * alpha]], dtype=complex)
    return normalize(SuperposedState([1.0, relative], kets))


def make_channel(alpha: float, exact: bool = False, prune_tol: float = DEFAULT_PRUNE_TOL) -> SuperposedState:
    """|Phi+> from |sqrt(2) alpha> through a Hadamard and a 50:50 beam splitter with vacuum."""
    if exact:
        return make_quasi_bell(QuasiBellLabel.PHI_PLUS, alpha)
    boosted = np.sqrt(2) * alpha
    cat = hadamard(SuperposedState.coherent(boosted), 0, boosted)
    out = balanced_beam_splitter(tensor(cat, SuperposedState.vacuum()), 0, 1)
    return normalize(prune(out, prune_tol))


def make_xi(alpha: float, exact: bool = False, prune_tol: float = DEFAULT_PRUNE_TOL) -> SuperposedState:
    """N(|sqrt(2) a, a, a> + |-sqrt(2) a, -a, -a>) from |2 alpha> through a Hadamard and two beam splitters."""
    if not alpha > 0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")
    if exact:
        ket = np.array([np.sqrt(2) * alpha, alpha, alpha], dtype=complex)
        return normalize(SuperposedState([1.0, 1.0], np.stack([ket, -ket])))
    cat = hadamard(SuperposedState.coherent(2 * alpha), 0, 2 * alpha)
    out = tensor(cat, SuperposedState.vacuum(2))
    out = balanced_beam_splitter(out, 0, 1)
    out = balanced_beam_splitter(out, 1, 2)
    return normalize(prune(out, prune_tol))


def chi_state(alpha: float) -> SuperposedState:
    """sum_x |x, x> (x) sum_y |y, y xor x> on modes (b, c, e, f)"""
    logical = {0: alpha, 1: -alpha}
    kets = [[logical[x], logical[x], logical[y], logical[y ^ x]] for x, y in itertools.product((0, 1), repeat=2)]
    return normalize(SuperposedState(np.ones(4), np.array(kets, dtype=complex)))


_chi_corrections = {
    BellOutcome.PHI_PLUS: (),
    BellOutcome.PHI_MINUS: (("z", 0),),
    BellOutcome.PSI_PLUS: (("x", 0), ("x", 1)),
    BellOutcome.PSI_MINUS: (("x", 0), ("x", 1), ("z", 0)),
}


def chi_fidelity_floor(alpha: float) -> float:
    """Reference floor for a |chi> branch built from circuit resources.

    Product of the per-Hadamard floors: one at 2 alpha inside each |xi>, then sqrt(2) alpha, alpha
    and alpha on modes d, e, f. Errors on distinct modes compound multiplicatively.
    """
    amplitudes = (2 * alpha, 2 * alpha, np.sqrt(2) * alpha, alpha, alpha)
    return float(np.prod([hadamard_fidelity_bound(a) for a in amplitudes]))


def make_chi(alpha: float, det: DetectorModel, exact_resources: bool = True, ideal_corrections: bool = True,
             outcome: Optional[BellOutcome] = None, seed: Optional[int] = None,
             prune_tol: float = DEFAULT_PRUNE_TOL) -> Tuple[ProtocolResult, ProtocolTrace]:
    """Four-mode CNOT resource on modes (b, c, e, f) from two three-mode states.

    Hadamards act on d, e, f of the second |xi>; the Bell measurement on (a, d) runs at amplitude
    sqrt(2) alpha and its outcome is undone on b and c.
    """
    xi = make_xi(alpha, exact=exact_resources, prune_tol=prune_tol)
    state = tensor(xi, xi)  # a b c d e f
    gate = ideal_hadamard if exact_resources else hadamard
    for mode, amplitude in ((3, np.sqrt(2) * alpha), (4, alpha), (5, alpha)):
        state = prune(gate(state, mode, amplitude), prune_tol)
    state = normalize(state)
    target = chi_state(alpha)
    trace = ProtocolTrace()
    measurement = bell_measure(state, (0, 3), np.sqrt(2) * alpha, det)
    branches = {}
    for bell_outcome, branch in measurement.branches.items():
        out = branch.state
        if out is not None:
            for pauli, mode in _chi_corrections[bell_outcome]:
                out = apply_pauli(out, mode, pauli, alpha, ideal=ideal_corrections)
            out = normalize(prune(out, prune_tol))
        branches[bell_outcome] = Branch(bell_outcome, branch.probability, out,
                                        None if out is None else fidelity(out, target))
    branches[BellOutcome.FAILURE] = Branch(BellOutcome.FAILURE, measurement.failure, None)
    result = ProtocolResult(branches, None, trace)
    result.outcome = _choose(result.distribution(), outcome, seed)
    chosen = branches[result.outcome]
    trace.record("bell_ad", result.outcome.value, chosen.probability, chosen.fidelity)
    logging.info(f"chi resource: outcome {result.outcome.value}, fidelity {chosen.fidelity}")
    return result, trace


# Teleportation
def teleport(q: SuperposedState, channel: SuperposedState, det: DetectorModel, alpha: float,
             ideal_corrections: bool = False, sigma_z_transmission: Optional[float] = None,
             outcome: Optional[BellOutcome] = None, seed: Optional[int] = None,
             prune_tol: float = DEFAULT_PRUNE_TOL) -> ProtocolResult:
    """Teleports q through the two-mode channel; the output lives on the channel's second mode."""
    if q.modes != 1 or channel.modes != 2:
        raise ContractViolation(f"teleport needs a 1-mode input and 2-mode channel, got {q.modes} and {channel.modes}")
    q = normalize(q)
    state = tensor(q, normalize(channel))
    measurement = bell_measure(state, (0, 1), alpha, det)
    branches = {}
    for bell_outcome, branch in measurement.branches.items():
        out = branch.state
        if out is not None:
            out = apply_paulis(out, 0, teleport_corrections[bell_outcome], alpha,
                               ideal=ideal_corrections, sigma_z_transmission=sigma_z_transmission)
            out = normalize(prune(out, prune_tol))
        branches[bell_outcome] = Branch(bell_outcome, branch.probability, out,
                                        None if out is None else fidelity(out, q))
    branches[BellOutcome.FAILURE] = Branch(BellOutcome.FAILURE, measurement.failure, None)
    result = ProtocolResult(branches, None, ProtocolTrace())
    result.outcome = _choose(result.distribution(), outcome, seed)
    result.trace = teleport_trace(result, result.outcome)
    return result


def teleport_trace(result: ProtocolResult, outcome: BellOutcome) -> ProtocolTrace:
    """Steps of the run that followed ``outcome``."""
    chosen = result.branches[outcome]
    trace = ProtocolTrace()
    trace.record("bell_measure", outcome.value, chosen.probability, chosen.fidelity)
    if chosen.state is not None:
        trace.record("correction", "+".join(teleport_corrections[outcome]) or "none", 1.0, chosen.fidelity)
    return trace


# Gate-teleported CNOT
def cnot_branches(control: SuperposedState, target: SuperposedState, alpha: float, det: DetectorModel,
                  chi: Optional[SuperposedState] = None,
                  prune_tol: float = DEFAULT_PRUNE_TOL) -> Dict[Tuple[BellOutcome, BellOutcome], Branch]:
    """Uncorrected two-mode states (control out, target out) for every pair of Bell outcomes."""
    chi = chi_state(alpha) if chi is None else chi
    # control, target, b, c, e, f
    state = normalize(tensor(tensor(control, target), chi))
    first = bell_measure(state, (0, 2), alpha, det)  # leaves target, c, e, f
    branches = {}
    for first_outcome, first_branch in first.branches.items():
        if first_branch.state is None:
            for second_outcome in BellOutcome:
                branches[(first_outcome, second_outcome)] = Branch((first_outcome, second_outcome), 0.0, None)
            continue
        second = bell_measure(prune(first_branch.state, prune_tol), (0, 2), alpha, det)  # leaves c, f
        for second_outcome, second_branch in second.branches.items():
            key = (first_outcome, second_outcome)
            branches[key] = Branch(key, first_branch.probability * second_branch.probability, second_branch.state)
        key = (first_outcome, BellOutcome.FAILURE)
        branches[key] = Branch(key, first_branch.probability * second.failure, None)
    for second_outcome in BellOutcome:
        key = (BellOutcome.FAILURE, second_outcome)
        branches[key] = Branch(key, first.failure if second_outcome is BellOutcome.FAILURE else 0.0, None)
    return branches


def cnot(control: SuperposedState, target: SuperposedState, alpha: float, det: DetectorModel,
         chi: Optional[SuperposedState] = None, ideal_corrections: bool = True,
         corrections: Optional[Dict] = None, outcome: Optional[Tuple[BellOutcome, BellOutcome]] = None,
         seed: Optional[int] = None, prune_tol: float = DEFAULT_PRUNE_TOL) -> Tuple[ProtocolResult, ProtocolTrace]:
    """CNOT by teleporting both qubits through the four-mode resource. Output modes (control, target)."""
    if control.modes != 1 or target.modes != 1:
        raise ContractViolation("cnot needs single-mode control and target states")
    control, target = normalize(control), normalize(target)
    corrections = cnot_corrections if corrections is None else corrections
    expected = normalize(ideal_cnot(tensor(control, target), 0, 1, alpha))
    branches = cnot_branches(control, target, alpha, det, chi, prune_tol)
    for key, branch in branches.items():
        if branch.state is None:
            continue
        control_paulis, target_paulis = corrections[key]
        out = apply_paulis(branch.state, 0, control_paulis, alpha, ideal=ideal_corrections)
        out = apply_paulis(out, 1, target_paulis, alpha, ideal=ideal_corrections)
        branch.state = normalize(prune(out, prune_tol))
        branch.fidelity = fidelity(branch.state, expected)
    result = ProtocolResult(branches, None, ProtocolTrace())
    result.outcome = _choose(result.distribution(), outcome, seed)
    result.trace = cnot_trace(result, result.outcome)
    logging.info(f"CNOT outcome {describe_outcome(result.outcome)}, fidelity {branches[result.outcome].fidelity}")
    return result, result.trace


def cnot_trace(result: ProtocolResult, outcome: Tuple[BellOutcome, BellOutcome]) -> ProtocolTrace:
    """Steps of the run that followed the outcome pair; the second step is conditioned on the first."""
    first, second = outcome
    chosen = result.branches[outcome]
    first_p = sum(b.probability for (f, _), b in result.branches.items() if f is first)
    trace = ProtocolTrace()
    trace.record("bell_control", first.value, first_p)
    trace.record("bell_target", second.value, chosen.probability / first_p if first_p > 0 else 0.0,
                 chosen.fidelity)
    return trace


_pauli_options = [(), ("x",), ("z",), ("x", "z")]


def search_cnot_corrections(alpha: float, det: Optional[DetectorModel] = None) -> Dict:
    """Brute-force the Pauli pair that best restores every outcome pair over a set of trial inputs."""
    det = DetectorModel() if det is None else det
    trials = [normalize(logical_gate(SuperposedState.coherent(alpha), 0, alpha, m))
              for m in (np.eye(2), PAULI_X, (np.eye(2) + PAULI_X) / np.sqrt(2),
                        (np.eye(2) + 1j * PAULI_X) / np.sqrt(2))]
    runs = []
    for control, target in itertools.product(trials, repeat=2):
        expected = normalize(ideal_cnot(tensor(control, target), 0, 1, alpha))
        runs.append((expected, cnot_branches(control, target, alpha, det)))
    table = {}
    for key in itertools.product([o for o in BellOutcome if o is not BellOutcome.FAILURE], repeat=2):
        scores = {}
        for control_paulis, target_paulis in itertools.product(_pauli_options, repeat=2):
            total = 0.0
            for expected, branches in runs:
                state = branches[key].state
                if state is None:
                    continue
                out = apply_paulis(state, 0, control_paulis, alpha, ideal=True)
                out = apply_paulis(out, 1, target_paulis, alpha, ideal=True)
                total += fidelity(normalize(out), expected)
            scores[(control_paulis, target_paulis)] = total
        table[key] = max(scores, key=scores.get)
        logging.debug(f"Correction for {key[0].value}/{key[1].value}: {table[key]}")
    return table

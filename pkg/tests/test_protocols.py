import json
import pytest
import numpy as np
from catsim import gates, protocols
from catsim.exceptions import ContractViolation, ProtocolFailure
from catsim.mappings import BellOutcome, QuasiBellLabel, cnot_corrections
from catsim.states import SuperposedState, fidelity, logical, normalize, tensor
from test_utils import qubit_state, random_qubit

SIGMA_Z_BRANCHES = (BellOutcome.PHI_MINUS, BellOutcome.PSI_MINUS)

@pytest.mark.parametrize("label", list(QuasiBellLabel))
def test_quasi_bell_states_are_normalized(alpha, label):
    state = protocols.make_quasi_bell(label, alpha)
    assert state.norm_squared() == pytest.approx(1.0, abs=1e-14)
    assert state.modes == 2

def test_quasi_bell_needs_positive_alpha():
    with pytest.raises(ContractViolation, match="alpha"):
        protocols.make_quasi_bell(QuasiBellLabel.PHI_PLUS, 0.0)

class TestResources:
    def test_exact_channel(self, alpha):
        channel = protocols.make_channel(alpha, exact=True)
        assert fidelity(channel, protocols.make_quasi_bell(QuasiBellLabel.PHI_PLUS, alpha)) == pytest.approx(1.0)

    def test_circuit_channel(self, alpha):
        channel = protocols.make_channel(alpha)
        assert fidelity(channel, protocols.make_channel(alpha, exact=True)) >= 0.975

    def test_circuit_xi(self, alpha):
        xi = protocols.make_xi(alpha)
        assert xi.modes == 3
        assert fidelity(xi, protocols.make_xi(alpha, exact=True)) >= 0.98
        assert fidelity(xi, protocols.make_xi(alpha, exact=True)) >= gates.hadamard_fidelity_bound(2 * alpha) - 1e-6

    def test_chi_state(self, alpha):
        chi = protocols.chi_state(alpha)
        assert chi.modes == 4
        assert len(chi) == 4
        assert chi.norm_squared() == pytest.approx(1.0)

    def test_chi_from_exact_resources(self, alpha, ideal_detector):
        result, trace = protocols.make_chi(alpha, ideal_detector)
        assert len(trace) == 1
        for outcome in (o for o in BellOutcome if o is not BellOutcome.FAILURE):
            branch = result.branches[outcome]
            assert branch.probability > 0.2
            assert branch.fidelity >= 1 - 1e-6
        assert result.distribution().total == pytest.approx(1.0, abs=1e-9)

    def test_chi_from_circuit_resources(self, alpha, ideal_detector):
        floor = protocols.chi_fidelity_floor(alpha)
        assert floor == pytest.approx(0.8124, abs=1e-3)
        result, _ = protocols.make_chi(alpha, ideal_detector, exact_resources=False)
        for outcome in (o for o in BellOutcome if o is not BellOutcome.FAILURE):
            assert result.branches[outcome].fidelity >= floor

    @pytest.mark.parametrize("amplitude", [2.0, 3.0, 6.0])
    def test_chi_floor_grows_with_alpha(self, amplitude):
        assert protocols.chi_fidelity_floor(amplitude) < protocols.chi_fidelity_floor(amplitude + 1.0) < 1.0

class TestTeleport:
    def test_branch_probabilities(self, rng, alpha, ideal_detector):
        q = qubit_state(*random_qubit(rng, alpha), alpha)
        result = protocols.teleport(q, protocols.make_channel(alpha, exact=True), ideal_detector, alpha)
        # exact branch probability: 0.249938 at alpha=3, not 1/4
        expected = 0.25 * (1 - np.exp(-alpha ** 2)) ** 2
        assert expected == pytest.approx(0.249938, abs=1e-6)
        for outcome in (o for o in BellOutcome if o is not BellOutcome.FAILURE):
            assert result.branches[outcome].probability == pytest.approx(expected, abs=1e-6)
        assert result.distribution().total == pytest.approx(1.0, abs=1e-12)

    def test_branch_fidelities(self, rng, alpha, ideal_detector):
        q = qubit_state(*random_qubit(rng, alpha), alpha)
        result = protocols.teleport(q, protocols.make_channel(alpha, exact=True), ideal_detector, alpha)
        for outcome in (BellOutcome.PHI_PLUS, BellOutcome.PSI_PLUS):
            assert result.branches[outcome].fidelity == pytest.approx(1.0, abs=1e-12)
        for outcome in SIGMA_Z_BRANCHES:
            assert result.branches[outcome].fidelity >= np.exp(-(np.pi / 12) ** 2) - 1e-6

    def test_ideal_corrections(self, rng, alpha, ideal_detector):
        q = qubit_state(*random_qubit(rng, alpha), alpha)
        result = protocols.teleport(q, protocols.make_channel(alpha, exact=True), ideal_detector, alpha,
                                    ideal_corrections=True)
        for outcome in SIGMA_Z_BRANCHES:
            assert result.branches[outcome].fidelity == pytest.approx(1.0, abs=1e-10)

    def test_beam_splitter_drive_matches_displacement(self, alpha, ideal_detector):
        q = logical(1, 1j, alpha)
        channel = protocols.make_channel(alpha, exact=True)
        direct = protocols.teleport(q, channel, ideal_detector, alpha)
        driven = protocols.teleport(q, channel, ideal_detector, alpha, sigma_z_transmission=0.99)
        for outcome in SIGMA_Z_BRANCHES:
            assert driven.branches[outcome].fidelity == pytest.approx(direct.branches[outcome].fidelity, abs=1e-12)

    def test_lossy_detectors(self, alpha, lossy_detector):
        q = logical(1, 1, alpha)
        result = protocols.teleport(q, protocols.make_channel(alpha, exact=True), lossy_detector, alpha)
        assert 0 < result.failure_probability < 0.2
        assert result.branches[BellOutcome.PHI_PLUS].fidelity > 0.9

    def test_outcome_selection(self, alpha, lossy_detector):
        q = logical(1, 0, alpha)
        channel = protocols.make_channel(alpha, exact=True)
        first = protocols.teleport(q, channel, lossy_detector, alpha, seed=11)
        second = protocols.teleport(q, channel, lossy_detector, alpha, seed=11)
        assert first.outcome == second.outcome
        chosen = protocols.teleport(q, channel, lossy_detector, alpha, outcome=BellOutcome.PSI_MINUS)
        assert chosen.outcome is BellOutcome.PSI_MINUS
        assert [step.step for step in chosen.trace.steps] == ["bell_measure", "correction"]
        assert chosen.trace.steps[1].outcome == "x+z"
        assert len(chosen.trace.to_jsonl().splitlines()) == 2
        assert json.loads(chosen.trace.to_jsonl().splitlines()[0])["outcome"] == "psi_minus"

    def test_failure_has_no_output(self, alpha, lossy_detector):
        q = logical(1, 0, alpha)
        result = protocols.teleport(q, protocols.make_channel(alpha, exact=True), lossy_detector, alpha,
                                    outcome=BellOutcome.FAILURE)
        assert result.output is None
        assert result.trace.failed
        with pytest.raises(ProtocolFailure, match="failure") as exc_info:
            result.require_output()
        assert exc_info.value.trace is result.trace

    def test_mode_contract(self, alpha, ideal_detector):
        with pytest.raises(ContractViolation, match="1-mode input"):
            protocols.teleport(SuperposedState.vacuum(2), protocols.make_channel(alpha, exact=True), ideal_detector, alpha)

    def test_unknown_outcome(self, alpha, ideal_detector):
        with pytest.raises(ContractViolation, match="Unknown outcome"):
            protocols.teleport(logical(1, 0, alpha), protocols.make_channel(alpha, exact=True), ideal_detector,
                               alpha, outcome="heads")

def test_apply_pauli(alpha):
    zero = SuperposedState.coherent(alpha)
    assert protocols.apply_pauli(zero, 0, "x", alpha).kets.tolist() == [[-alpha]]
    assert protocols.apply_pauli(SuperposedState.coherent(-alpha), 0, "z", alpha, ideal=True).coeffs.tolist() == [-1]
    with pytest.raises(ContractViolation, match="Unknown Pauli"):
        protocols.apply_pauli(zero, 0, "w", alpha)

class TestCnot:
    @pytest.mark.parametrize("control,target", [(0, 0), (0, 1), (1, 0), (1, 1)])
    def test_truth_table(self, alpha, ideal_detector, control, target):
        basis = {0: (1, 0), 1: (0, 1)}
        result, trace = protocols.cnot(logical(*basis[control], alpha), logical(*basis[target], alpha), alpha,
                                       ideal_detector)
        done = [b for b in result.branches.values() if b.state is not None and b.probability > 1e-12]
        assert sum(b.probability for b in done) > 0.99
        assert all(b.fidelity >= 1 - 1e-6 for b in done)
        assert len(trace) == 2

    def test_superposed_control_gives_phi_plus(self, alpha, ideal_detector):
        control = logical(1, 1, alpha)
        result, _ = protocols.cnot(control, logical(1, 0, alpha), alpha, ideal_detector)
        phi_plus = protocols.make_quasi_bell(QuasiBellLabel.PHI_PLUS, alpha)
        assert fidelity(result.output, phi_plus) >= 1 - 1e-5

    def test_branches_cover_all_outcomes(self, alpha, ideal_detector):
        branches = protocols.cnot_branches(logical(1, 1, alpha), logical(1, -1, alpha), alpha, ideal_detector)
        assert len(branches) == 25
        assert sum(b.probability for b in branches.values()) == pytest.approx(1.0, abs=1e-9)

    def test_failure_outcome(self, alpha, lossy_detector):
        outcome = (BellOutcome.FAILURE, BellOutcome.FAILURE)
        result, _ = protocols.cnot(logical(1, 0, alpha), logical(1, 0, alpha), alpha, lossy_detector, outcome=outcome)
        assert result.output is None
        assert result.failure_probability > 0

    def test_correction_table(self, alpha):
        table = protocols.search_cnot_corrections(alpha)
        for key, paulis in table.items():
            assert paulis == cnot_corrections[key]

    def test_physical_corrections(self, alpha, ideal_detector):
        result, _ = protocols.cnot(logical(1, 0, alpha), logical(1, 0, alpha), alpha, ideal_detector,
                                   ideal_corrections=False)
        done = [b for b in result.branches.values() if b.state is not None and b.probability > 1e-12]
        assert all(b.fidelity >= np.exp(-2 * (np.pi / 12) ** 2) - 1e-3 for b in done)

    def test_contract(self, alpha, ideal_detector):
        with pytest.raises(ContractViolation, match="single-mode"):
            protocols.cnot(SuperposedState.vacuum(2), logical(1, 0, alpha), alpha, ideal_detector)

    @pytest.mark.parametrize("control,target", [(0, 0), (0, 1), (1, 0), (1, 1)])
    def test_applying_twice_restores_basis_states(self, alpha, ideal_detector, control, target):
        basis = {0: (1, 0), 1: (0, 1)}
        original = tensor(logical(*basis[control], alpha), logical(*basis[target], alpha))
        first, _ = protocols.cnot(logical(*basis[control], alpha), logical(*basis[target], alpha), alpha,
                                  ideal_detector, outcome=(BellOutcome.PSI_MINUS, BellOutcome.PHI_MINUS))
        # feed the dominant output ket back in
        ket = first.output.kets[np.argmax(np.abs(first.output.coeffs))]
        assert fidelity(first.output, SuperposedState.coherent(*ket)) >= 1 - 1e-6
        second, _ = protocols.cnot(SuperposedState.coherent(ket[0]), SuperposedState.coherent(ket[1]), alpha,
                                   ideal_detector, outcome=(BellOutcome.PHI_PLUS, BellOutcome.PSI_PLUS))
        assert fidelity(second.output, original) >= 1 - 1e-5

def run_protocol(name: str, alpha: float, det) -> protocols.ProtocolResult:
    match name:
        case "teleport":
            return protocols.teleport(logical(1, 1, alpha), protocols.make_channel(alpha, exact=True), det, alpha)
        case "make_chi":
            return protocols.make_chi(alpha, det)[0]
        case "cnot":
            return protocols.cnot(logical(1, 0, alpha), logical(1, 1, alpha), alpha, det)[0]

@pytest.mark.parametrize("name", ["teleport", "make_chi", "cnot"])
def test_failure_decreases_with_alpha(name, lossy_detector):
    failures = [run_protocol(name, a, lossy_detector).failure_probability for a in np.arange(2.0, 4.01, 0.5)]
    assert np.all(np.diff(failures) <= 0)
    assert failures[-1] < failures[0]

def test_teleport_failure_decreases_with_alpha_ideal_detector(ideal_detector):
    failures = [run_protocol("teleport", a, ideal_detector).failure_probability for a in np.arange(2.0, 4.01, 0.5)]
    assert np.all(np.diff(failures) <= 0)

def test_average_teleport_fidelity(alpha, ideal_detector):
    rng = np.random.default_rng(5)
    channel = protocols.make_channel(alpha, exact=True)
    floor = np.exp(-(np.pi / (4 * alpha)) ** 2)
    averages = []
    for _ in range(100):
        q = qubit_state(*random_qubit(rng, alpha), alpha)
        result = protocols.teleport(q, channel, ideal_detector, alpha)
        done = [b for b in result.branches.values() if b.state is not None and b.probability > 0]
        averages.append(sum(b.probability * b.fidelity for b in done) / sum(b.probability for b in done))
    assert min(averages) >= floor - 1e-6
    assert np.mean(averages) >= (1 + floor) / 2 - 1e-3

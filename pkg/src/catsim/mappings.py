from enum import Enum


class ReadoutOutcome(str, Enum):
    ZERO = "zero"
    ONE = "one"
    FAILURE_NO_CLICK = "failure_no_click"
    FAILURE_BOTH_CLICK = "failure_both_click"

    @property
    def is_failure(self) -> bool:
        return self in (ReadoutOutcome.FAILURE_NO_CLICK, ReadoutOutcome.FAILURE_BOTH_CLICK)


class QuasiBellLabel(str, Enum):
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"


class BellOutcome(str, Enum):
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"
    FAILURE = "failure"

    @property
    def label(self) -> QuasiBellLabel:
        return bell_labels[self]


bell_labels = {outcome: QuasiBellLabel(outcome.value) for outcome in BellOutcome if outcome is not BellOutcome.FAILURE}

# (second-mode sign, relative sign): Phi -> |a,a> +- |-a,-a>, Psi -> |a,-a> +- |-a,a>
quasi_bell_signs = {
    QuasiBellLabel.PHI_PLUS: (1, 1),
    QuasiBellLabel.PHI_MINUS: (1, -1),
    QuasiBellLabel.PSI_PLUS: (-1, 1),
    QuasiBellLabel.PSI_MINUS: (-1, -1),
}

# Index of the silent detector (A, B, C, D) for each outcome
silent_detector = {
    BellOutcome.PHI_PLUS: 0,
    BellOutcome.PHI_MINUS: 1,
    BellOutcome.PSI_PLUS: 2,
    BellOutcome.PSI_MINUS: 3,
}

# Pauli corrections after teleportation, applied left to right
teleport_corrections = {
    BellOutcome.PHI_PLUS: (),
    BellOutcome.PHI_MINUS: ("z",),
    BellOutcome.PSI_PLUS: ("x",),
    BellOutcome.PSI_MINUS: ("x", "z"),
}

# Gate-teleported CNOT: outcome of (control, b) and (target, e) -> Paulis on (control out, target out).
# A Pauli error E on either teleported qubit is conjugated through the CNOT:
# X_c -> X_c X_t, Z_c -> Z_c, X_t -> X_t, Z_t -> Z_c Z_t.
_control_frame = {
    BellOutcome.PHI_PLUS: (0, 0, 0, 0),
    BellOutcome.PHI_MINUS: (0, 1, 0, 0),
    BellOutcome.PSI_PLUS: (1, 0, 1, 0),
    BellOutcome.PSI_MINUS: (1, 1, 1, 0),
}
_target_frame = {
    BellOutcome.PHI_PLUS: (0, 0, 0, 0),
    BellOutcome.PHI_MINUS: (0, 1, 0, 1),
    BellOutcome.PSI_PLUS: (0, 0, 1, 0),
    BellOutcome.PSI_MINUS: (0, 1, 1, 1),
}


def _frame_to_paulis(bits):
    x_c, z_c, x_t, z_t = bits
    control = ("x",) * x_c + ("z",) * z_c
    target = ("x",) * x_t + ("z",) * z_t
    return control, target


cnot_corrections = {
    (first, second): _frame_to_paulis(tuple(a ^ b for a, b in zip(_control_frame[first], _target_frame[second])))
    for first in _control_frame
    for second in _target_frame
}

# Published error estimates at the working point alpha=3, d=0.9
reference_values = {
    "detector_miss": 9e-8,
    "rotation_fidelity": 0.93,
    "p_A_k0": 9e-8,
    "p_B_k0": 0.030,
    "undetected_k0": 3e-9,
    "detected_k0": 0.030,
    "undetected_k2": 6e-11,
    "detected_k2": 2e-5,
}

"""Gate set on coherent-state superpositions.

Linear optics (beam splitter, pi phase shift, displacement) maps coherent kets to coherent kets.
The Kerr quarter map splits each ket in two. Logical rotations are composed from these, with the
ideal 2x2 action available through ``logical_gate`` for reference states and ideal corrections.

Matrix conventions: ``U_z(x) = exp(ixZ)``, ``U_x(x) = exp(ixX)``, ``U_y(x) = exp(-ixY)``, in the
logical basis ``|0_L> = |alpha>``, ``|1_L> = |-alpha>``.
"""
from __future__ import annotations
import logging
import numpy as np
from .exceptions import ContractViolation
from .schema_definitions import BeamSplitterSpec, EulerAngles, RotationSpec
from .states import SuperposedState

KERR_PHASE = np.exp(-1j * np.pi / 4) / np.sqrt(2)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _check_mode(s: SuperposedState, mode: int):
    if not 0 <= mode < s.modes:
        raise ContractViolation(f"Mode {mode} out of range for a {s.modes}-mode state")


def _check_alpha(alpha: float):
    if not alpha > 0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")


# Ideal logical matrices
def uz_matrix(x: float) -> np.ndarray:
    return np.diag([np.exp(1j * x), np.exp(-1j * x)])


def ux_matrix(x: float) -> np.ndarray:
    return np.cos(x) * np.eye(2) + 1j * np.sin(x) * PAULI_X


def uy_matrix(x: float) -> np.ndarray:
    return np.cos(x) * np.eye(2) - 1j * np.sin(x) * PAULI_Y


def euler_matrix(angles: EulerAngles) -> np.ndarray:
    """U_z(theta/2) U_y(phi/2) U_z(eta/2)"""
    return uz_matrix(angles.theta / 2) @ uy_matrix(angles.phi / 2) @ uz_matrix(angles.eta / 2)


def rotation_matrix(spec: RotationSpec) -> np.ndarray:
    match spec.axis:
        case "x":
            return ux_matrix(spec.half_angle)
        case "y":
            return uy_matrix(spec.half_angle)
        case "z":
            return uz_matrix(spec.half_angle)


# Linear optics
def beam_splitter(s: SuperposedState, spec: BeamSplitterSpec) -> SuperposedState:
    """(beta, gamma) -> (sqrt(T) beta + sqrt(1-T) gamma, sqrt(1-T) beta - sqrt(T) gamma)"""
    _check_mode(s, spec.mode_i)
    _check_mode(s, spec.mode_j)
    r, t = np.sqrt(1 - spec.transmission), np.sqrt(spec.transmission)
    kets = s.kets.copy()
    beta, gamma = kets[:, spec.mode_i].copy(), kets[:, spec.mode_j].copy()
    kets[:, spec.mode_i] = t * beta + r * gamma
    kets[:, spec.mode_j] = r * beta - t * gamma
    return s.with_kets(kets)


def balanced_beam_splitter(s: SuperposedState, mode_i: int, mode_j: int) -> SuperposedState:
    return beam_splitter(s, BeamSplitterSpec(mode_i=mode_i, mode_j=mode_j))


def phase_shift_pi(s: SuperposedState, mode: int) -> SuperposedState:
    """P(pi), the NOT gate on the coherent-state qubit."""
    _check_mode(s, mode)
    kets = s.kets.copy()
    kets[:, mode] *= -1
    return s.with_kets(kets)


def displace(s: SuperposedState, mode: int, delta: complex) -> SuperposedState:
    _check_mode(s, mode)
    delta = complex(delta)
    beta = s.kets[:, mode]
    phase = np.exp((delta * np.conj(beta) - np.conj(delta) * beta) / 2)
    kets = s.kets.copy()
    kets[:, mode] += delta
    return s.with_kets(kets, s.coeffs * phase)


def displace_via_bs(s: SuperposedState, mode: int, drive: float, transmission: float) -> SuperposedState:
    """Strong field i*drive mixed in on a beam splitter of transmission T, taken in its pure-state limit."""
    if not 0 < transmission < 1:
        raise ContractViolation(f"transmission must lie in (0, 1), got {transmission}")
    return displace(s, mode, 1j * drive * np.sqrt(1 - transmission))


def kerr_quarter(s: SuperposedState, mode: int) -> SuperposedState:
    """|beta> -> e^{-i pi/4}/sqrt(2) (|beta> + i|-beta>); original branch first for every term."""
    _check_mode(s, mode)
    coeffs = np.stack([s.coeffs * KERR_PHASE, s.coeffs * 1j * KERR_PHASE], axis=1).ravel()
    flipped = s.kets.copy()
    flipped[:, mode] *= -1
    kets = np.stack([s.kets, flipped], axis=1).reshape(-1, s.modes)
    return SuperposedState(coeffs, kets)


# Logical rotations
def u_z(s: SuperposedState, mode: int, theta: float, alpha: float) -> SuperposedState:
    """U_z(theta/2) by the displacement D(i theta / (4 alpha))."""
    _check_alpha(alpha)
    return displace(s, mode, 1j * theta / (4 * alpha))


def u_x_quarter(s: SuperposedState, mode: int, sign: int = 1) -> SuperposedState:
    """U_x(+-pi/4) up to global phase. The minus sign applies P(pi) after the Kerr map."""
    if sign not in (1, -1):
        raise ContractViolation(f"sign must be +1 or -1, got {sign}")
    out = kerr_quarter(s, mode)
    return out if sign == 1 else phase_shift_pi(out, mode)


def u_y(s: SuperposedState, mode: int, phi: float, alpha: float) -> SuperposedState:
    """U_y(phi/2) = U_x(-pi/4) U_z(phi/2) U_x(pi/4)"""
    out = u_x_quarter(s, mode, 1)
    out = u_z(out, mode, phi, alpha)
    return u_x_quarter(out, mode, -1)


def hadamard(s: SuperposedState, mode: int, alpha: float) -> SuperposedState:
    """-U_z(pi/4) U_x(pi/4) U_z(pi/4); alpha is the amplitude incident on this mode."""
    out = u_z(s, mode, np.pi / 2, alpha)
    out = kerr_quarter(out, mode)
    return u_z(out, mode, np.pi / 2, alpha)


def wrap_angle(theta: float) -> float:
    """theta + 2 pi k in [-pi, pi); u_z and u_y only pick up a global sign per 2 pi."""
    return float((theta + np.pi) % (2 * np.pi) - np.pi)


def compile_euler(angles: EulerAngles) -> EulerAngles:
    """Equivalent angles with the least total |theta| + |phi| + |eta|.

    Besides wrapping every angle, U_z(a) U_y(b) U_z(c) = U_z(a - pi/2) U_y(-b) U_z(c + pi/2)
    gives a second family (theta - pi, -phi, eta + pi) to choose from.
    """
    families = [(angles.theta, angles.phi, angles.eta),
                (angles.theta - np.pi, -angles.phi, angles.eta + np.pi)]
    wrapped = [tuple(wrap_angle(x) for x in family) for family in families]
    theta, phi, eta = min(wrapped, key=lambda family: sum(abs(x) for x in family))
    return EulerAngles(theta=theta, phi=phi, eta=eta)


def rotation_displacements(angles: EulerAngles, alpha: float) -> np.ndarray:
    """Displacements eps = angle / (4 alpha) that ``rotate`` applies, in application order."""
    _check_alpha(alpha)
    compiled = compile_euler(angles)
    return np.array([compiled.eta, compiled.phi, compiled.theta]) / (4 * alpha)


def displacement_fidelity_bound(epsilons) -> float:
    """Fidelity floor of a rotation circuit whose only imperfections are the displacements D(i eps_k).

    On the code space D(i eps) misses its ideal U_z by a vector of norm sqrt(2 - 2 exp(-eps^2 / 2))
    whatever the state. The misses add at most linearly through the remaining unitaries, so with
    L their sum, F >= (1 - L^2 / 2)^2 while L <= sqrt(2).
    """
    eps = np.asarray(epsilons, dtype=float)
    total = np.sum(np.sqrt(2 - 2 * np.exp(-eps ** 2 / 2)))
    return float(max(1 - total ** 2 / 2, 0.0) ** 2)


def hadamard_fidelity_bound(alpha: float) -> float:
    """Floor for ``hadamard`` on a code state of amplitude alpha: two displacements of pi / (8 alpha)."""
    _check_alpha(alpha)
    return displacement_fidelity_bound(np.full(2, np.pi / (8 * alpha)))


def rotate(s: SuperposedState, mode: int, angles: EulerAngles, alpha: float) -> SuperposedState:
    """R(theta, phi, eta) as u_z(eta), u_y(phi), u_z(theta) on the compiled angles."""
    compiled = compile_euler(angles)
    logging.debug(f"Compiled {angles} to {compiled}")
    out = u_z(s, mode, compiled.eta, alpha)
    out = u_y(out, mode, compiled.phi, alpha)
    return u_z(out, mode, compiled.theta, alpha)


def apply_rotation(s: SuperposedState, mode: int, spec: RotationSpec, alpha: float) -> SuperposedState:
    """Single-axis rotation U_axis(half_angle), with the displaced angle wrapped into [-pi, pi)."""
    x = spec.half_angle
    match spec.axis:
        case "z":
            return u_z(s, mode, wrap_angle(2 * x), alpha)
        case "y":
            return u_y(s, mode, wrap_angle(2 * x), alpha)
        case "x" if np.isclose(abs(x), np.pi / 4):
            return u_x_quarter(s, mode, int(np.sign(x)))
        case "x":
            # U_x(x) = U_z(-pi/4) U_y(x) U_z(pi/4)
            out = u_z(s, mode, np.pi / 2, alpha)
            out = u_y(out, mode, wrap_angle(2 * x), alpha)
            return u_z(out, mode, -np.pi / 2, alpha)


# Ideal maps
def logical_gate(s: SuperposedState, mode: int, alpha: float, matrix: np.ndarray) -> SuperposedState:
    """Applies a 2x2 logical matrix to every ket at ``mode``.

    An amplitude beta is read as logical 0 of the pair (beta, -beta) when Re(beta * conj(alpha)) > 0
    and as logical 1 otherwise, so residual displacements ride along. Amplitudes with
    |beta| < |alpha|/2 are vacuum-like and left unchanged.
    """
    _check_mode(s, mode)
    _check_alpha(abs(alpha))
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (2, 2):
        raise ContractViolation(f"Expected a 2x2 logical matrix, got {matrix.shape}")
    beta = s.kets[:, mode]
    vacuum_like = np.abs(beta) < abs(alpha) / 2
    is_zero = np.real(beta * np.conj(alpha)) > 0
    # (stay, flip) weights per term
    stay = np.where(vacuum_like, 1.0, np.where(is_zero, matrix[0, 0], matrix[1, 1]))
    flip = np.where(vacuum_like, 0.0, np.where(is_zero, matrix[1, 0], matrix[0, 1]))
    flipped = s.kets.copy()
    flipped[:, mode] *= -1
    coeffs = np.stack([s.coeffs * stay, s.coeffs * flip], axis=1).ravel()
    kets = np.stack([s.kets, flipped], axis=1).reshape(-1, s.modes)
    keep = coeffs != 0
    logging.debug(f"Ideal logical gate kept {keep.sum()} of {keep.size} branches")
    return SuperposedState(coeffs[keep], kets[keep])


def ideal_hadamard(s: SuperposedState, mode: int, alpha: float) -> SuperposedState:
    return logical_gate(s, mode, alpha, HADAMARD)


def ideal_cnot(s: SuperposedState, control: int, target: int, alpha: float) -> SuperposedState:
    """Flips the target ket wherever the control ket reads as logical 1."""
    _check_mode(s, control)
    _check_mode(s, target)
    beta = s.kets[:, control]
    flip = (np.abs(beta) >= abs(alpha) / 2) & (np.real(beta * np.conj(alpha)) <= 0)
    kets = s.kets.copy()
    kets[flip, target] *= -1
    return s.with_kets(kets)


def ideal_pauli(s: SuperposedState, mode: int, alpha: float, pauli: str) -> SuperposedState:
    matrix = {"x": PAULI_X, "z": PAULI_Z, "y": PAULI_Y}[pauli]
    return logical_gate(s, mode, alpha, matrix)

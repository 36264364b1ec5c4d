"""Equivalence checks between the coherent-state algebra and the Fock-space simulator."""
from __future__ import annotations
import logging
from typing import Callable, List, Optional
import numpy as np
from pydantic import BaseModel
from ..detection import photon_count_distribution, readout_state
from ..error_analysis import threshold_probs
from ..exceptions import TruncationError
from ..gates import beam_splitter, compile_euler, displace, hadamard, kerr_quarter, phase_shift_pi, rotate, u_y, u_z
from ..schema_definitions import BeamSplitterSpec, DetectorModel, EulerAngles
from ..states import SuperposedState, inner, normalize
from .fock import (FockVector, TwoModeFock, coherent_to_fock, fock_beam_splitter, fock_detect,
                   fock_detect_joint, fock_displace, fock_fidelity, fock_inner, fock_kerr)

STATE_BOUND = 1e-8
KERR_ANGLES = {"pi/2": np.pi / 2, "pi": np.pi}


class CheckResult(BaseModel):
    name: str
    max_deviation: float
    bound: float
    passed: bool
    detail: Optional[str] = None


def random_state(rng: np.random.Generator, modes: int, max_amplitude: float, terms: int = None) -> SuperposedState:
    """Normalized superposition of one or two random coherent kets inside the disk |beta| <= max_amplitude."""
    terms = terms or int(rng.integers(1, 3))
    radius = max_amplitude * np.sqrt(rng.random((terms, modes)))
    kets = radius * np.exp(2j * np.pi * rng.random((terms, modes)))
    coeffs = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    return normalize(SuperposedState(coeffs, kets))


def _embed(s: SuperposedState, truncation: int):
    return FockVector.from_state(s, truncation) if s.modes == 1 else TwoModeFock.from_state(s, truncation)


def _state_deviation(s: SuperposedState, reference, truncation: int) -> float:
    """Largest coefficient difference between the embedded state and a Fock reference, phases included."""
    return float(np.max(np.abs(_embed(s, truncation).coefficients - reference.coefficients)))


def _fock_parity(v: FockVector) -> FockVector:
    return FockVector((-1.0) ** np.arange(v.coefficients.size) * v.coefficients)


def _fock_u_z(v: FockVector, theta: float, alpha: float) -> FockVector:
    return fock_displace(v, 1j * theta / (4 * alpha))


def _fock_u_y(v: FockVector, phi: float, alpha: float) -> FockVector:
    v = _fock_u_z(fock_kerr(v, np.pi / 2), phi, alpha)
    return _fock_parity(fock_kerr(v, np.pi / 2))


def _fock_hadamard(v: FockVector, alpha: float) -> FockVector:
    v = fock_kerr(_fock_u_z(v, np.pi / 2, alpha), np.pi / 2)
    return _fock_u_z(v, np.pi / 2, alpha)


def _fock_rotate(v: FockVector, angles: EulerAngles, alpha: float) -> FockVector:
    compiled = compile_euler(angles)
    v = _fock_u_y(_fock_u_z(v, compiled.eta, alpha), compiled.phi, alpha)
    return _fock_u_z(v, compiled.theta, alpha)


def _check(name: str, bound: float, evaluate: Callable[[], float]) -> CheckResult:
    try:
        deviation = evaluate()
    except TruncationError as e:
        logging.error(f"{name}: {e}")
        return CheckResult(name=name, max_deviation=float("inf"), bound=bound, passed=False, detail=str(e))
    passed = bool(deviation <= bound)
    logging.info(f"{name}: max deviation {deviation:.3e} (bound {bound:.0e})")
    return CheckResult(name=name, max_deviation=deviation, bound=bound, passed=passed)


def kerr_theta_pinning(alpha: float, truncation: int) -> CheckResult:
    """Which Kerr angle theta in e^{-i theta n^2} reproduces the quarter map on |alpha>."""
    try:
        source = coherent_to_fock(alpha, truncation)
        target = FockVector.from_state(kerr_quarter(SuperposedState.coherent(alpha), 0), truncation)
    except TruncationError as e:
        return CheckResult(name="kerr_theta_pinning", max_deviation=float("inf"), bound=1e-9,
                           passed=False, detail=str(e))
    deviations = {label: 1 - fock_fidelity(fock_kerr(source, theta), target) for label, theta in KERR_ANGLES.items()}
    pinned = min(deviations, key=deviations.get)
    detail = f"theta={pinned} reproduces the quarter map; " + ", ".join(
        f"1-F(theta={label})={value:.3e}" for label, value in deviations.items())
    return CheckResult(name="kerr_theta_pinning", max_deviation=deviations[pinned], bound=1e-9,
                       passed=bool(deviations[pinned] <= 1e-9), detail=detail)


def run_checks(alpha: float = 3.0, truncation: int = 128, seed: int = 0, samples: int = 50,
               efficiency: float = 0.9) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    max_amplitude = min(alpha, 3.5)
    singles = [random_state(rng, 1, max_amplitude) for _ in range(samples)]
    pairs = [random_state(rng, 2, max_amplitude) for _ in range(samples)]
    deltas = max_amplitude / 2 * (rng.normal(size=samples) + 1j * rng.normal(size=samples)) / np.sqrt(2)
    angles = [EulerAngles(theta=theta, phi=phi, eta=eta)
              for theta, phi, eta in rng.uniform(-2 * np.pi, 2 * np.pi, size=(samples, 3))]

    def overlaps():
        return max(abs(inner(s1, s2) - fock_inner(_embed(s1, truncation), _embed(s2, truncation)))
                   for s1, s2 in zip(singles, singles[1:] + singles[:1]))

    def displacements():
        return max(_state_deviation(displace(s, 0, delta), fock_displace(_embed(s, truncation), delta), truncation)
                   for s, delta in zip(singles, deltas))

    def phase_shifts():
        parity = (-1.0) ** np.arange(truncation)
        return max(_state_deviation(phase_shift_pi(s, 0), FockVector(parity * _embed(s, truncation).coefficients),
                                    truncation) for s in singles)

    def kerr_maps():
        return max(_state_deviation(kerr_quarter(s, 0), fock_kerr(_embed(s, truncation), np.pi / 2), truncation)
                   for s in singles)

    def z_rotations():
        return max(_state_deviation(u_z(s, 0, a.theta, alpha), _fock_u_z(_embed(s, truncation), a.theta, alpha),
                                    truncation) for s, a in zip(singles, angles))

    def y_rotations():
        return max(_state_deviation(u_y(s, 0, a.phi, alpha), _fock_u_y(_embed(s, truncation), a.phi, alpha),
                                    truncation) for s, a in zip(singles, angles))

    def hadamards():
        return max(_state_deviation(hadamard(s, 0, alpha), _fock_hadamard(_embed(s, truncation), alpha), truncation)
                   for s in singles)

    def rotations():
        return max(_state_deviation(rotate(s, 0, a, alpha), _fock_rotate(_embed(s, truncation), a, alpha), truncation)
                   for s, a in zip(singles, angles))

    def beam_splitters():
        worst = 0.0
        for s, transmission in zip(pairs, rng.uniform(0.05, 0.95, size=samples)):
            out = beam_splitter(s, BeamSplitterSpec(mode_i=0, mode_j=1, transmission=transmission))
            reference = fock_beam_splitter(_embed(s, truncation), transmission)
            worst = max(worst, _state_deviation(out, reference, truncation))
        return worst

    def count_distributions():
        det = DetectorModel(efficiency=efficiency, truncation=truncation)
        worst = 0.0
        for q in singles:
            mixed = readout_state(q, alpha)
            counts = photon_count_distribution(mixed, det).probabilities
            reference = fock_detect_joint(_embed(mixed, truncation), efficiency)[:counts.shape[0], :counts.shape[1]]
            worst = max(worst, 0.5 * float(np.abs(counts - reference).sum()))
        return worst

    def threshold_kernel():
        worst = 0.0
        for k in (0, 2):
            budget = threshold_probs(alpha, efficiency, k)
            signal = np.sqrt(2) * alpha + 1j * np.pi / (4 * alpha) / np.sqrt(2)
            p_leq, _ = fock_detect(coherent_to_fock(signal, truncation), efficiency, k)
            worst = max(worst, abs(p_leq - budget.p_A))
        return worst

    results = [
        _check("overlap", STATE_BOUND, overlaps),
        _check("displace", STATE_BOUND, displacements),
        _check("phase_shift_pi", STATE_BOUND, phase_shifts),
        _check("kerr_quarter", STATE_BOUND, kerr_maps),
        _check("u_z", STATE_BOUND, z_rotations),
        _check("u_y", STATE_BOUND, y_rotations),
        _check("hadamard", STATE_BOUND, hadamards),
        _check("rotate", STATE_BOUND, rotations),
        _check("beam_splitter", STATE_BOUND, beam_splitters),
        _check("photon_counts", STATE_BOUND, count_distributions),
        _check("threshold_p_A", 1e-10, threshold_kernel),
        kerr_theta_pinning(alpha, truncation),
    ]
    failed = [r.name for r in results if not r.passed]
    if failed:
        logging.warning(f"Failed checks: {', '.join(failed)}")
    return results

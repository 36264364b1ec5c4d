"""Error budget of the coherent-state qubit: detector misses, residual displacements and decoherence."""
from __future__ import annotations
import itertools
import logging
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Union
import numpy as np
from scipy.stats import binom, poisson
from .detection import check_truncation
from .exceptions import ContractViolation
from .gates import displace
from .schema_definitions import DecoherenceParams, EpsilonSchedule, ErrorBudget, LogicalQubit
from .states import DyadMixture, SuperposedState, check_normalized, encode

Method = Literal["closed", "sum"]

SWEEP_COLUMNS = ["alpha", "d", "k", "gamma_tau", "eps_bar", "p_A", "p_B", "P_s",
                 "undetected", "detected", "Gamma"]


def default_epsilon_bar(alpha: float) -> float:
    return np.pi / (4 * alpha)


def readout_failure_ideal(a: complex, b: complex, alpha: float) -> float:
    """|a + b|^2 e^{-2 alpha^2}, the no-click probability with ideal detectors."""
    return abs(a + b) ** 2 * np.exp(-2 * alpha ** 2)


def _at_most(intensity: float, d: float, k: int, method: Method, truncation: int) -> float:
    """P(detected count <= k) for a coherent state of mean photon number ``intensity``."""
    match method:
        case "closed":
            return float(poisson.cdf(k, d * intensity))
        case "sum":
            check_truncation(intensity, truncation)
            n = np.arange(truncation)
            return float(np.sum(poisson.pmf(n, intensity) * binom.cdf(k, n, d)))
        case _:
            raise ContractViolation(f"Unknown method {method!r}")


def _more_than(intensity: float, d: float, k: int, method: Method, truncation: int) -> float:
    if method == "closed":
        return float(poisson.sf(k, d * intensity))
    return 1.0 - _at_most(intensity, d, k, method, truncation)


def detector_miss(alpha: float, d: float, method: Method = "closed", truncation: int = 128) -> float:
    """Probability that |sqrt(2) alpha> registers no photon: e^{-2 d alpha^2}."""
    if not 0 <= d <= 1:
        raise ContractViolation(f"efficiency must lie in [0, 1], got {d}")
    return _at_most(2 * alpha ** 2, d, 0, method, truncation)


def threshold_probs(alpha: float, d: float, k: int, epsilon_bar: Optional[float] = None,
                    method: Method = "closed", truncation: int = 128) -> ErrorBudget:
    """Readout error budget when counts <= k are read as no click.

    The signal mode carries |sqrt(2) alpha + i eps/sqrt(2)> and the other mode the residual
    |i eps/sqrt(2)>. p_A is the signal staying below threshold, p_B the residual crossing it.
    """
    if k < 0:
        raise ContractViolation(f"threshold must be >= 0, got {k}")
    eps = default_epsilon_bar(alpha) if epsilon_bar is None else epsilon_bar
    signal = abs(np.sqrt(2) * alpha + 1j * eps / np.sqrt(2)) ** 2
    residual = abs(eps) ** 2 / 2
    p_a = _at_most(signal, d, k, method, truncation)
    p_b = _more_than(residual, d, k, method, truncation)
    p_s = (1.0 - p_b) * _more_than(signal, d, k, method, truncation)
    undetected = p_a * p_b
    budget = ErrorBudget(p_A=p_a, p_B=p_b, P_s=p_s, undetected=undetected,
                         detected=1.0 - p_s - undetected)
    logging.debug(f"Error budget at alpha={alpha}, d={d}, k={k}: {budget}")
    return budget


def schedule_signs(magnitudes: Sequence[float], alpha: float) -> EpsilonSchedule:
    """Greedy signs keeping every partial sum within the largest magnitude; ties go positive."""
    total = 0.0
    signed = []
    for magnitude in magnitudes:
        if magnitude < 0:
            raise ContractViolation(f"magnitudes must be >= 0, got {magnitude}")
        step = magnitude if total <= 0 else -magnitude
        total += step
        signed.append(step)
    return EpsilonSchedule(epsilons=signed, alpha=alpha)


def accumulated_state(q: LogicalQubit, schedule: EpsilonSchedule) -> SuperposedState:
    state = encode(q)
    for epsilon in schedule.epsilons:
        state = displace(state, 0, 1j * epsilon)
    return state


def rotation_fidelity(a: complex, b: complex, alpha: float, epsilon: float,
                      normalized: bool = False) -> float:
    """Fidelity between the displaced qubit D(i eps)(a|alpha> + b|-alpha>) and its ideal z rotation.

    The unnormalized form is e^{-eps^2} S^2 with S = |a|^2 + |b|^2 + 2 e^{-2 alpha^2} Re(a b* e^{2i alpha eps}).
    With ``normalized`` both states are divided by their exact norms.
    """
    cross = np.exp(-2 * alpha ** 2)
    overlap_sum = abs(a) ** 2 + abs(b) ** 2 + 2 * cross * np.real(a * np.conj(b) * np.exp(2j * alpha * epsilon))
    value = np.exp(-epsilon ** 2) * overlap_sum ** 2
    if normalized:
        displaced_norm = abs(a) ** 2 + abs(b) ** 2 + 2 * cross * np.real(np.conj(a) * b)
        rotated_norm = abs(a) ** 2 + abs(b) ** 2 + 2 * cross * np.real(np.conj(a) * b * np.exp(-4j * alpha * epsilon))
        value /= displaced_norm * rotated_norm
    return float(value)


def decohere(s: Union[SuperposedState, DyadMixture], params: DecoherenceParams) -> DyadMixture:
    """Vacuum amplitude damping: |b><g| -> exp[(1 - t^2)(b g* - (|b|^2 + |g|^2)/2)] |tb><tg|."""
    check_normalized(s)
    mixture = DyadMixture.from_pure(s) if isinstance(s, SuperposedState) else s
    t = params.t
    basis = mixture.basis
    intensities = np.abs(basis) ** 2
    exponent = basis[:, None, :] * np.conj(basis)[None, :, :] \
        - 0.5 * (intensities[:, None, :] + intensities[None, :, :])
    damping = np.exp((1 - t ** 2) * exponent.sum(axis=2))
    return DyadMixture(t * basis, mixture.matrix * damping).normalize()


def logical_basis_drift(params: DecoherenceParams) -> float:
    """Amplitude t*alpha of the decohered logical basis |+-t alpha>."""
    return params.t * params.alpha


def sweep(alphas: Iterable[float], efficiencies: Iterable[float], thresholds: Iterable[int],
          gamma_taus: Iterable[float] = (0.0,)) -> List[Dict[str, float]]:
    """One row per grid point in alpha, d, k, gamma_tau order."""
    grid = list(itertools.product(alphas, efficiencies, thresholds, gamma_taus))
    if not grid:
        raise ContractViolation("Sweep grid is empty")
    rows = []
    for alpha, d, k, gamma_tau in grid:
        budget = threshold_probs(alpha, d, k)
        params = DecoherenceParams(gamma_tau=gamma_tau, alpha=alpha)
        rows.append({"alpha": alpha, "d": d, "k": k, "gamma_tau": gamma_tau,
                     "eps_bar": default_epsilon_bar(alpha), **budget.model_dump(),
                     "Gamma": params.gamma_factor})
    logging.info(f"Swept {len(rows)} grid points")
    return rows

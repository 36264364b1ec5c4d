"""Photon-counting statistics, readout and quasi-Bell measurement.

Detector effects are binomially thinned number projectors. Outcome probabilities use the closed
form of ``<g'|Pi_{<=k}|g>`` between coherent kets, so no Fock truncation enters; the explicit count
distribution is the truncated-sum path and is checked against it.
"""
from __future__ import annotations
import logging
from math import factorial
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import numpy as np
from scipy.special import gammaln
from scipy.stats import binom, poisson
from .exceptions import ContractViolation, TruncationError
from .gates import balanced_beam_splitter, ideal_hadamard
from .mappings import BellOutcome, ReadoutOutcome, silent_detector
from .schema_definitions import DetectorModel
from .states import DyadMixture, SuperposedState, check_normalized, gram, tensor

TAIL_BOUND = 1e-12


def required_truncation(mean: float, tail: float = TAIL_BOUND) -> int:
    """Smallest N with Poisson(mean) mass beyond N-1 below tail."""
    if mean < 1e-300:
        return 1
    return int(poisson.isf(tail, mean)) + 1


def check_truncation(mean: float, truncation: int, tail: float = TAIL_BOUND):
    required = required_truncation(mean, tail)
    if truncation < required:
        raise TruncationError(f"Truncation {truncation} leaves a Poisson tail above {tail} "
                              f"for mean photon number {mean:.3g}; need N >= {required}", required)


# Closed-form threshold kernels
def no_click_kernel(bras: np.ndarray, kets: np.ndarray, det: DetectorModel) -> np.ndarray:
    """<bras[j]|Pi_{<=k}|kets[l]> for single-mode amplitude vectors."""
    bras = np.asarray(bras, dtype=complex)
    kets = np.asarray(kets, dtype=complex)
    z = np.conj(bras)[:, None] * kets[None, :]
    d = det.efficiency
    series = sum((d * z) ** m / factorial(m) for m in range(det.vacuum_threshold + 1))
    exponent = -0.5 * np.abs(bras)[:, None] ** 2 - 0.5 * np.abs(kets)[None, :] ** 2 + (1 - d) * z
    return np.exp(exponent) * series


def click_kernel(bras: np.ndarray, kets: np.ndarray, det: DetectorModel) -> np.ndarray:
    """<bras[j]|Pi_{>k}|kets[l]>"""
    overlaps = gram(np.asarray(bras)[:, None], np.asarray(kets)[:, None])
    return overlaps - no_click_kernel(bras, kets, det)


def effect_kernel(kets: np.ndarray, modes: Sequence[int], clicks: Sequence[bool],
                  det: DetectorModel) -> np.ndarray:
    """<kets[j]|E|kets[l]> on the detected modes for the product effect E of a click pattern."""
    result = np.ones((len(kets), len(kets)), dtype=complex)
    for mode, click in zip(modes, clicks):
        column = kets[:, mode]
        kernel = click_kernel if click else no_click_kernel
        result *= kernel(column, column, det)
    return result


def conditional_mixture(s: SuperposedState, modes: Sequence[int], clicks: Sequence[bool],
                        det: DetectorModel) -> Tuple[float, Optional[DyadMixture]]:
    """Probability of a click pattern and the unnormalized operator left on the other modes."""
    effect = effect_kernel(s.kets, modes, clicks, det)
    remaining = s.drop_modes(modes)
    # rho_rest = sum_jl c_j c_l* <d_l|E|d_j> |r_j><r_l|
    matrix = np.outer(s.coeffs, np.conj(s.coeffs)) * effect.T
    if remaining.shape[1] == 0:
        return max(float(np.real(matrix.sum())), 0.0), None
    mixture = DyadMixture(remaining, matrix).compact()
    return max(mixture.trace(), 0.0), mixture


# Truncated count distribution
class CountDistribution:
    """Joint distribution of detected photon counts, indexed by count tuple."""

    def __init__(self, probabilities: np.ndarray):
        self.probabilities = np.where(probabilities < 0, 0.0, probabilities)
        self.probabilities.setflags(write=False)

    @property
    def modes(self) -> int:
        return self.probabilities.ndim

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    @property
    def tail(self) -> float:
        return max(1.0 - self.total, 0.0)

    def __getitem__(self, counts: Tuple[int, ...]) -> float:
        counts = tuple(counts)
        if any(m >= n for m, n in zip(counts, self.probabilities.shape)):
            return 0.0
        return float(self.probabilities[counts])

    def marginal(self, mode: int) -> np.ndarray:
        axes = tuple(a for a in range(self.modes) if a != mode)
        return self.probabilities.sum(axis=axes)

    def pattern_probability(self, clicks: Sequence[bool], threshold: int) -> float:
        """P(counts > threshold exactly on the modes flagged in clicks)."""
        mask = np.ones(self.probabilities.shape, dtype=bool)
        for axis, click in enumerate(clicks):
            counts = np.arange(self.probabilities.shape[axis])
            select = counts > threshold if click else counts <= threshold
            shape = [1] * self.modes
            shape[axis] = -1
            mask &= select.reshape(shape)
        return float(self.probabilities[mask].sum())

    def outcomes(self) -> List[Tuple[int, ...]]:
        return list(np.ndindex(*self.probabilities.shape))

    def rows(self, min_probability: float = 0.0) -> Iterator[Tuple[int, ...]]:
        """(m1, ..., mM, probability) in C order"""
        for counts in np.ndindex(*self.probabilities.shape):
            p = float(self.probabilities[counts])
            if p > min_probability:
                yield (*counts, p)


def fock_amplitudes(beta: np.ndarray, cutoff: int) -> np.ndarray:
    """<n|beta> for n < cutoff, one row per amplitude."""
    n = np.arange(cutoff)
    log_norm = -0.5 * np.abs(beta)[:, None] ** 2 - 0.5 * gammaln(n + 1)[None, :]
    return np.exp(log_norm) * np.power(beta[:, None], n[None, :])


def thinning_matrix(cutoff: int, efficiency: float) -> np.ndarray:
    """B[m, n] = P(m detected | n incident)"""
    n = np.arange(cutoff)
    return binom.pmf(n[:, None], n[None, :], efficiency)


def photon_count_distribution(s: SuperposedState, det: DetectorModel) -> CountDistribution:
    check_normalized(s)
    intensities = np.abs(s.kets) ** 2
    cutoffs = []
    for mode in range(s.modes):
        mean = float(intensities[:, mode].max())
        check_truncation(mean, det.truncation)
        cutoffs.append(min(det.truncation, required_truncation(mean)))
    logging.debug(f"Count distribution over cutoffs {cutoffs}")
    amplitudes = s.coeffs.reshape(-1, *([1] * s.modes))
    for mode, cutoff in enumerate(cutoffs):
        shape = [len(s)] + [1] * s.modes
        shape[mode + 1] = cutoff
        amplitudes = amplitudes * fock_amplitudes(s.kets[:, mode], cutoff).reshape(shape)
    incident = np.abs(amplitudes.sum(axis=0)) ** 2
    detected = incident
    for mode, cutoff in enumerate(cutoffs):
        detected = np.moveaxis(np.tensordot(thinning_matrix(cutoff, det.efficiency), detected,
                                            axes=([1], [mode])), 0, mode)
    distribution = CountDistribution(detected)
    if distribution.tail > 1e-9:
        logging.warning(f"Count distribution is missing {distribution.tail:.3g} of its mass")
    return distribution


# Outcome distributions
class OutcomeDistribution:
    """Probabilities over an enumeration, ordered by the enumeration's definition order."""

    def __init__(self, probabilities: Dict):
        self._probabilities = dict(probabilities)

    def __getitem__(self, outcome) -> float:
        return self._probabilities[outcome]

    def __contains__(self, outcome) -> bool:
        return outcome in self._probabilities

    def items(self):
        return self._probabilities.items()

    def outcomes(self) -> list:
        return list(self._probabilities)

    def weights(self) -> np.ndarray:
        return np.array(list(self._probabilities.values()), dtype=float)

    @property
    def total(self) -> float:
        return float(self.weights().sum())

    def __repr__(self):
        body = ", ".join(f"{getattr(k, 'value', k)}={v:.6g}" for k, v in self._probabilities.items())
        return f"OutcomeDistribution({body})"


_readout_patterns = {
    ReadoutOutcome.ZERO: (True, False),
    ReadoutOutcome.ONE: (False, True),
    ReadoutOutcome.FAILURE_NO_CLICK: (False, False),
    ReadoutOutcome.FAILURE_BOTH_CLICK: (True, True),
}


def readout_state(q: SuperposedState, alpha: float) -> SuperposedState:
    """The two detector modes after mixing q with the auxiliary |alpha> on a 50:50 beam splitter."""
    if q.modes != 1:
        raise ContractViolation(f"readout needs a single-mode state, got {q.modes} modes")
    return balanced_beam_splitter(tensor(q, SuperposedState.coherent(alpha)), 0, 1)


def readout(q: SuperposedState, alpha: float, det: DetectorModel) -> OutcomeDistribution:
    """Detector A clicking alone reads 0, B alone reads 1; no clicks or two clicks fail."""
    check_normalized(q)
    mixed = readout_state(q, alpha)
    probabilities = {outcome: conditional_mixture(mixed, (0, 1), clicks, det)[0]
                     for outcome, clicks in _readout_patterns.items()}
    logging.debug(f"Readout distribution {probabilities}")
    return OutcomeDistribution(probabilities)


def readout_from_counts(counts: CountDistribution, threshold: int) -> OutcomeDistribution:
    return OutcomeDistribution({outcome: counts.pattern_probability(clicks, threshold)
                                for outcome, clicks in _readout_patterns.items()})


# Quasi-Bell measurement
class BellBranch:
    """One Bell outcome: its probability and the normalized conditional state of the other modes."""

    def __init__(self, outcome: BellOutcome, probability: float, mixture: Optional[DyadMixture]):
        self.outcome = outcome
        self.probability = probability
        self.mixture = None
        self.state = None
        self.purity = 1.0
        if mixture is not None and probability > 1e-300:
            self.mixture = mixture.normalize()
            self.state, self.purity = self.mixture.principal_state()
            if self.purity < 1 - 1e-6:
                logging.warning(f"Conditional state for {outcome.value} has principal weight {self.purity:.6g}")

    def __repr__(self):
        return f"BellBranch({self.outcome.value}, p={self.probability:.6g})"


class BellMeasurement:
    def __init__(self, branches: Dict[BellOutcome, BellBranch], failure: float):
        self.branches = branches
        self.failure = failure

    def __getitem__(self, outcome: BellOutcome) -> BellBranch:
        return self.branches[outcome]

    def distribution(self) -> OutcomeDistribution:
        probabilities = {outcome: branch.probability for outcome, branch in self.branches.items()}
        probabilities[BellOutcome.FAILURE] = self.failure
        return OutcomeDistribution(probabilities)


def bell_network(s: SuperposedState, modes: Tuple[int, int], scale: float) -> Tuple[SuperposedState, List[int]]:
    """Runs the optical network and returns the state with detector modes in order A, B, C, D.

    Both outputs of the 50:50 beam splitter get an ideal Hadamard at amplitude sqrt(2)*scale and are
    then mixed with an auxiliary field of amplitude -sqrt(2)*scale. For |Phi+> at scale alpha the
    detectors see (0, 2 alpha, -alpha, alpha).
    """
    i, j = modes
    if i == j:
        raise ContractViolation("A Bell measurement needs two different modes")
    boosted = np.sqrt(2) * scale
    out = balanced_beam_splitter(s, i, j)
    out = ideal_hadamard(out, i, boosted)
    out = ideal_hadamard(out, j, boosted)
    out = out.append_modes([-boosted, -boosted])
    aux_a, aux_b = s.modes, s.modes + 1
    out = balanced_beam_splitter(out, i, aux_a)
    out = balanced_beam_splitter(out, j, aux_b)
    return out, [i, aux_a, j, aux_b]


def bell_measure(s: SuperposedState, modes: Tuple[int, int], alpha: float,
                 det: DetectorModel) -> BellMeasurement:
    """Exactly one silent detector names the outcome; anything else is a failure."""
    check_normalized(s)
    network, detectors = bell_network(s, modes, alpha)
    branches = {}
    for outcome in BellOutcome:
        if outcome is BellOutcome.FAILURE:
            continue
        clicks = [index != silent_detector[outcome.label] for index in range(4)]
        probability, mixture = conditional_mixture(network, detectors, clicks, det)
        branches[outcome] = BellBranch(outcome, probability, mixture)
    failure = max(1.0 - sum(b.probability for b in branches.values()), 0.0)
    logging.info("Bell measurement: " + ", ".join(f"{o.value}={b.probability:.6g}" for o, b in branches.items())
                 + f", FAILURE={failure:.3g}")
    return BellMeasurement(branches, failure)


# Sampling
def _inverse_cdf(weights: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(weights)
    if not cdf[-1] > 0:
        raise ContractViolation("Cannot sample from a distribution with zero total weight")
    index = np.searchsorted(cdf, uniforms * cdf[-1], side="right")
    return np.minimum(index, len(weights) - 1)


def _outcomes_and_weights(dist):
    if isinstance(dist, CountDistribution):
        return dist.outcomes(), dist.probabilities.ravel()
    return dist.outcomes(), dist.weights()


def sample(dist, seed: int):
    """One outcome by inverse CDF over the distribution's stable ordering."""
    outcomes, weights = _outcomes_and_weights(dist)
    rng = np.random.default_rng(seed)
    return outcomes[int(_inverse_cdf(weights, rng.random(1))[0])]


def sample_many(dist, shots: int, seed: int) -> list:
    outcomes, weights = _outcomes_and_weights(dist)
    rng = np.random.default_rng(seed)
    return [outcomes[i] for i in _inverse_cdf(weights, rng.random(shots))]

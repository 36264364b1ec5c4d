"""Truncated Fock-space reference simulator.

Independent of the coherent-state algebra: states are number-basis coefficient arrays and
operators are matrices or matrix exponentials in the truncated space.
"""
from __future__ import annotations
import logging
from functools import lru_cache
from typing import Tuple
import numpy as np
from scipy.linalg import expm
from ..detection import check_truncation, fock_amplitudes, thinning_matrix
from ..exceptions import ContractViolation, TruncationError
from ..states import SuperposedState


class FockVector:
    """Single-mode state as coefficients of |0>, ..., |N-1>."""

    def __init__(self, coefficients: np.ndarray):
        self.coefficients = np.asarray(coefficients, dtype=complex)
        if self.coefficients.ndim != 1:
            raise ContractViolation("A Fock vector is one-dimensional")

    @property
    def truncation(self) -> int:
        return self.coefficients.size

    def norm_squared(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)

    def mean_photons(self) -> float:
        return float(np.sum(np.arange(self.truncation) * np.abs(self.coefficients) ** 2))

    @classmethod
    def from_state(cls, s: SuperposedState, truncation: int) -> "FockVector":
        if s.modes != 1:
            raise ContractViolation(f"Expected a single-mode state, got {s.modes} modes")
        check_truncation(s.max_intensity(), truncation)
        return cls(s.coeffs @ fock_amplitudes(s.kets[:, 0], truncation))


class TwoModeFock:
    """Two-mode state as an N x N grid of coefficients of |n, m>."""

    def __init__(self, coefficients: np.ndarray):
        self.coefficients = np.asarray(coefficients, dtype=complex)
        if self.coefficients.ndim != 2 or self.coefficients.shape[0] != self.coefficients.shape[1]:
            raise ContractViolation("A two-mode Fock grid is square")

    @property
    def truncation(self) -> int:
        return self.coefficients.shape[0]

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    @classmethod
    def from_state(cls, s: SuperposedState, truncation: int) -> "TwoModeFock":
        if s.modes != 2:
            raise ContractViolation(f"Expected a two-mode state, got {s.modes} modes")
        check_truncation(s.max_intensity(), truncation)
        first = fock_amplitudes(s.kets[:, 0], truncation)
        second = fock_amplitudes(s.kets[:, 1], truncation)
        return cls(np.einsum("t,tn,tm->nm", s.coeffs, first, second))


def coherent_to_fock(beta: complex, truncation: int) -> FockVector:
    check_truncation(abs(beta) ** 2, truncation)
    return FockVector(fock_amplitudes(np.atleast_1d(np.asarray(beta, dtype=complex)), truncation)[0])


def fock_inner(v1, v2) -> complex:
    if v1.coefficients.shape != v2.coefficients.shape:
        raise ContractViolation("Fock states have different truncations")
    return complex(np.vdot(v1.coefficients, v2.coefficients))


def fock_fidelity(v1, v2) -> float:
    return abs(fock_inner(v1, v2)) ** 2 / (v1.norm_squared() * v2.norm_squared())


def annihilation(truncation: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, truncation)), k=1).astype(complex)


def fock_displace(v: FockVector, delta: complex) -> FockVector:
    """exp(delta a^dag - delta^* a) by matrix exponential of the truncated generator."""
    reach = (np.sqrt(v.mean_photons()) + abs(delta)) ** 2
    check_truncation(reach, v.truncation)
    a = annihilation(v.truncation)
    generator = delta * a.conj().T - np.conj(delta) * a
    return FockVector(expm(generator) @ v.coefficients)


def fock_kerr(v: FockVector, theta: float) -> FockVector:
    """c_n -> e^{-i theta n^2} c_n, the Kerr evolution in the frame rotating at the mode frequency."""
    n = np.arange(v.truncation)
    return FockVector(np.exp(-1j * theta * n ** 2) * v.coefficients)


@lru_cache(maxsize=None)
def _rotation_block(total: int, transmission: float) -> np.ndarray:
    """exp(phi (b^dag a - a^dag b)) on span{|p, total - p>}, cos(phi) = sqrt(T)."""
    phi = np.arccos(np.sqrt(transmission))
    p = np.arange(total + 1)
    # b^dag a |p, L-p> = sqrt(p (L-p+1)) |p-1, L-p+1>
    lowering = np.sqrt(p[1:] * (total - p[1:] + 1))
    generator = np.zeros((total + 1, total + 1))
    generator[p[:-1], p[1:]] = lowering
    generator -= generator.T
    return expm(phi * generator)


def fock_beam_splitter(g: TwoModeFock, transmission: float) -> TwoModeFock:
    """a^dag -> sqrt(T) a^dag + sqrt(1-T) b^dag, b^dag -> sqrt(1-T) a^dag - sqrt(T) b^dag.

    Realized as a pi phase on mode b followed by a rotation that conserves the total photon
    number, one block per total below the truncation.
    """
    if not 0 < transmission < 1:
        raise ContractViolation(f"transmission must lie in (0, 1), got {transmission}")
    size = g.truncation
    n, m = np.indices((size, size))
    beyond = float(np.sum(np.abs(g.coefficients[n + m >= size]) ** 2))
    if beyond > 1e-12:
        raise TruncationError(f"{beyond:.3g} of the weight has total photon number >= {size}", 2 * size)
    phased = g.coefficients * (-1.0) ** m
    out = np.zeros_like(phased)
    for total in range(size):
        p = np.arange(total + 1)
        block = _rotation_block(total, float(transmission))
        out[p, total - p] = block @ phased[p, total - p]
    logging.debug(f"Fock beam splitter over {size} photon-number blocks")
    return TwoModeFock(out)


def fock_detect(v: FockVector, d: float, k: int) -> Tuple[float, np.ndarray]:
    """(P(detected <= k), detected-count distribution) under binomial thinning."""
    distribution = thinning_matrix(v.truncation, d) @ (np.abs(v.coefficients) ** 2)
    return float(distribution[:k + 1].sum()), distribution


def fock_detect_joint(g: TwoModeFock, d: float) -> np.ndarray:
    thinning = thinning_matrix(g.truncation, d)
    return thinning @ (np.abs(g.coefficients) ** 2) @ thinning.T

"""Exact algebra of finite superpositions of multimode coherent states.

A state is a coefficient vector ``c`` (T,) and a ket matrix ``kets`` (T, M) of coherent
amplitudes; the state is ``sum_j c_j |kets[j, 0], ..., kets[j, M-1]>``. Inner products
are evaluated through the Gram matrix of coherent overlaps, never by truncating a Fock basis.
"""
from __future__ import annotations
import logging
from typing import Sequence, Tuple, Union
import numpy as np
from .exceptions import ContractViolation, DegenerateStateError
from .schema_definitions import LogicalQubit, MixtureDocument, StateDocument, TermDocument

KET_TOL = 1e-14
DEFAULT_PRUNE_TOL = 1e-12
NORMALIZED_TOL = 1e-8


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


def _check_finite(array: np.ndarray, what: str):
    if not np.all(np.isfinite(array)):
        raise ContractViolation(f"{what} contains NaN or Inf")


def _abs2(z: np.ndarray) -> np.ndarray:
    # re^2 + im^2 so that overlap(k, k) cancels to exactly 0 in the exponent
    return z.real * z.real + z.imag * z.imag


def log_gram(bras: np.ndarray, kets: np.ndarray) -> np.ndarray:
    """log <bras[j]|kets[k]> for two (T, M) amplitude matrices, summed over modes."""
    bras = np.asarray(bras, dtype=complex)
    kets = np.asarray(kets, dtype=complex)
    if bras.shape[1] != kets.shape[1]:
        raise ContractViolation(f"Mode counts differ: {bras.shape[1]} vs {kets.shape[1]}")
    cross = np.conj(bras)[:, None, :] * kets[None, :, :]
    exponent = -0.5 * _abs2(bras)[:, None, :] - 0.5 * _abs2(kets)[None, :, :] + cross
    return exponent.sum(axis=2)


def gram(bras: np.ndarray, kets: np.ndarray) -> np.ndarray:
    return np.exp(log_gram(bras, kets))


class CoherentKet:
    """Tensor product of single-mode coherent states."""

    __slots__ = ("_amplitudes",)

    def __init__(self, amplitudes: Sequence[complex]):
        amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=complex))
        if amplitudes.ndim != 1 or amplitudes.size < 1:
            raise ContractViolation("A coherent ket needs at least one mode")
        _check_finite(amplitudes, "ket")
        self._amplitudes = _frozen(amplitudes)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def modes(self) -> int:
        return self._amplitudes.size

    def __repr__(self):
        return f"CoherentKet({list(self._amplitudes)})"


def overlap(k1: CoherentKet, k2: CoherentKet) -> complex:
    """<k1|k2> = prod exp(-|b|^2/2 - |g|^2/2 + b* g)"""
    if k1.modes != k2.modes:
        raise ContractViolation(f"Mode counts differ: {k1.modes} vs {k2.modes}")
    return complex(gram(k1.amplitudes[None, :], k2.amplitudes[None, :])[0, 0])


class SuperposedState:
    """Finite linear combination of coherent kets sharing one mode count. Immutable."""

    __slots__ = ("_coeffs", "_kets")

    def __init__(self, coeffs: Sequence[complex], kets: np.ndarray):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        kets = np.asarray(kets, dtype=complex)
        if kets.ndim == 1:
            # one amplitude per term for several terms, else one multimode ket
            kets = kets[:, None] if coeffs.size > 1 else kets[None, :]
        if kets.ndim != 2 or kets.shape[0] != coeffs.size or kets.shape[1] < 1:
            raise ContractViolation(f"Expected kets of shape ({coeffs.size}, M), got {kets.shape}")
        if coeffs.size == 0:
            raise ContractViolation("A state needs at least one term")
        _check_finite(coeffs, "coefficients")
        _check_finite(kets, "kets")
        self._coeffs = _frozen(coeffs)
        self._kets = _frozen(kets)

    # Constructors
    @classmethod
    def coherent(cls, *amplitudes: complex) -> "SuperposedState":
        return cls([1.0], np.asarray(amplitudes, dtype=complex)[None, :])

    @classmethod
    def vacuum(cls, modes: int = 1) -> "SuperposedState":
        return cls([1.0], np.zeros((1, modes), dtype=complex))

    # Accessors
    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def kets(self) -> np.ndarray:
        return self._kets

    @property
    def modes(self) -> int:
        return self._kets.shape[1]

    def __len__(self) -> int:
        return self._coeffs.size

    def __repr__(self):
        return f"SuperposedState(terms={len(self)}, modes={self.modes})"

    def norm_squared(self) -> float:
        return inner(self, self).real

    def max_intensity(self) -> float:
        return float(_abs2(self._kets).max())

    # Term-level helpers used by the gates
    def with_kets(self, kets: np.ndarray, coeffs: np.ndarray = None) -> "SuperposedState":
        return SuperposedState(self._coeffs if coeffs is None else coeffs, kets)

    def scaled(self, factor: complex) -> "SuperposedState":
        return SuperposedState(self._coeffs * factor, self._kets)

    def drop_modes(self, modes: Sequence[int]) -> np.ndarray:
        keep = [m for m in range(self.modes) if m not in set(modes)]
        return self._kets[:, keep]

    def append_modes(self, amplitudes: Sequence[complex]) -> "SuperposedState":
        extra = np.broadcast_to(np.asarray(amplitudes, dtype=complex), (len(self), len(amplitudes)))
        return SuperposedState(self._coeffs, np.concatenate([self._kets, extra], axis=1))

    # Serialization
    def to_document(self) -> StateDocument:
        terms = [TermDocument(c=(c.real, c.imag), ket=[(z.real, z.imag) for z in ket])
                 for c, ket in zip(self._coeffs, self._kets)]
        return StateDocument(modes=self.modes, terms=terms)

    def to_json(self) -> str:
        return self.to_document().model_dump_json()

    @classmethod
    def from_json(cls, document: str) -> "SuperposedState":
        doc = StateDocument.model_validate_json(document)
        coeffs = [complex(*t.c) for t in doc.terms]
        kets = np.array([[complex(*z) for z in t.ket] for t in doc.terms]).reshape(len(coeffs), doc.modes)
        return cls(coeffs, kets)


def _check_modes(s1, s2):
    if s1.modes != s2.modes:
        raise ContractViolation(f"Mode counts differ: {s1.modes} vs {s2.modes}")


def inner(s1: SuperposedState, s2: SuperposedState) -> complex:
    """<s1|s2> = sum_jk c1_j* c2_k <ket1_j|ket2_k>"""
    _check_modes(s1, s2)
    return complex(np.conj(s1.coeffs) @ gram(s1.kets, s2.kets) @ s2.coeffs)


def normalize(s: SuperposedState) -> SuperposedState:
    norm2 = s.norm_squared()
    if not norm2 > 1e-300:
        raise DegenerateStateError(f"Cannot normalize a state with squared norm {norm2}")
    return s.scaled(1 / np.sqrt(norm2))


def tensor(s1: SuperposedState, s2: SuperposedState) -> SuperposedState:
    coeffs = np.outer(s1.coeffs, s2.coeffs).ravel()
    kets = np.concatenate([np.repeat(s1.kets, len(s2), axis=0),
                           np.tile(s2.kets, (len(s1), 1))], axis=1)
    return SuperposedState(coeffs, kets)


def merge_kets(coeffs: np.ndarray, kets: np.ndarray, tol: float = KET_TOL):
    """Sums the coefficients of kets that agree within tol per component, keeping first-seen order."""
    coeffs = np.asarray(coeffs, dtype=complex)
    kets = np.asarray(kets, dtype=complex)
    same = np.all(np.abs(kets[:, None, :] - kets[None, :, :]) <= tol, axis=2)
    owner = np.argmax(same, axis=1)
    keep = np.flatnonzero(owner == np.arange(len(coeffs)))
    merged = np.zeros(len(coeffs), dtype=complex)
    np.add.at(merged, owner, coeffs)
    return merged[keep], kets[keep]


def prune(s: SuperposedState, tol: float = DEFAULT_PRUNE_TOL) -> SuperposedState:
    if tol < 0:
        raise ContractViolation("prune tolerance must be >= 0")
    coeffs, kets = merge_kets(s.coeffs, s.kets)
    norm = np.sqrt(max(np.real(np.conj(coeffs) @ gram(kets, kets) @ coeffs), 0.0))
    keep = np.abs(coeffs) > tol * norm
    if not keep.any():
        keep[np.argmax(np.abs(coeffs))] = True
    if keep.sum() < len(s):
        logging.debug(f"Pruned {len(s)} terms to {keep.sum()}")
    return SuperposedState(coeffs[keep], kets[keep])


def encode(q: LogicalQubit) -> SuperposedState:
    """a|alpha> + b|-alpha>, not renormalized"""
    if q.alpha <= 0:
        raise ContractViolation("alpha must be positive")
    return SuperposedState([q.a, q.b], np.array([[q.alpha], [-q.alpha]], dtype=complex))


def logical(a: complex, b: complex, alpha: float) -> SuperposedState:
    """Normalized a|alpha> + b|-alpha> for arbitrary (non-zero) a, b."""
    return normalize(SuperposedState([a, b], np.array([[alpha], [-alpha]], dtype=complex)))


def gram_eigenvalues(s: SuperposedState) -> np.ndarray:
    return np.linalg.eigvalsh(gram(s.kets, s.kets))


class DyadMixture:
    """Operator sum_kl matrix[k, l] |basis_k><basis_l| over coherent kets. Immutable.

    Hermitian exactly when ``matrix`` is Hermitian, which every constructor here guarantees.
    """

    __slots__ = ("_basis", "_matrix")

    def __init__(self, basis: np.ndarray, matrix: np.ndarray):
        basis = np.asarray(basis, dtype=complex)
        matrix = np.asarray(matrix, dtype=complex)
        if basis.ndim != 2 or matrix.shape != (basis.shape[0], basis.shape[0]):
            raise ContractViolation(f"Matrix {matrix.shape} does not match basis {basis.shape}")
        _check_finite(basis, "basis")
        _check_finite(matrix, "matrix")
        self._basis = _frozen(basis)
        self._matrix = _frozen(0.5 * (matrix + matrix.conj().T))

    @classmethod
    def from_pure(cls, s: SuperposedState) -> "DyadMixture":
        return cls(s.kets, np.outer(s.coeffs, np.conj(s.coeffs)))

    @property
    def basis(self) -> np.ndarray:
        return self._basis

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def modes(self) -> int:
        return self._basis.shape[1]

    def __len__(self):
        return self._basis.shape[0]

    def __repr__(self):
        return f"DyadMixture(basis={len(self)}, modes={self.modes})"

    def compact(self) -> "DyadMixture":
        """Merges basis kets equal within KET_TOL, summing their rows and columns."""
        basis = self._basis
        same = np.all(np.abs(basis[:, None, :] - basis[None, :, :]) <= KET_TOL, axis=2)
        owner = np.argmax(same, axis=1)
        keep = np.flatnonzero(owner == np.arange(len(basis)))
        fold = (owner[None, :] == keep[:, None]).astype(complex)
        return DyadMixture(basis[keep], fold @ self._matrix @ fold.T)

    def trace(self) -> float:
        # Tr |b_k><b_l| = <b_l|b_k>
        g = gram(self._basis, self._basis)
        return float(np.real(np.sum(self._matrix * g.T)))

    def normalize(self) -> "DyadMixture":
        trace = self.trace()
        if not trace > 1e-300:
            raise DegenerateStateError(f"Cannot normalize a mixture with trace {trace}")
        return DyadMixture(self._basis, self._matrix / trace)

    def expectation(self, s: SuperposedState) -> float:
        """<psi|rho|psi>"""
        if s.modes != self.modes:
            raise ContractViolation(f"Mode counts differ: {s.modes} vs {self.modes}")
        left = np.conj(s.coeffs) @ gram(s.kets, self._basis)
        right = gram(self._basis, s.kets) @ s.coeffs
        return float(np.real(left @ self._matrix @ right))

    def principal_state(self) -> Tuple[SuperposedState, float]:
        """Dominant pure component and its weight relative to the trace."""
        g = gram(self._basis, self._basis)
        values, vectors = np.linalg.eig(self._matrix @ g)
        best = int(np.argmax(values.real))
        state = normalize(SuperposedState(vectors[:, best], self._basis))
        return prune(state), float(values[best].real / self.trace())

    def to_json(self) -> str:
        doc = MixtureDocument(
            modes=self.modes,
            basis=[[(z.real, z.imag) for z in row] for row in self._basis],
            matrix=[[(z.real, z.imag) for z in row] for row in self._matrix])
        return doc.model_dump_json()

    @classmethod
    def from_json(cls, document: str) -> "DyadMixture":
        doc = MixtureDocument.model_validate_json(document)
        basis = np.array([[complex(*z) for z in row] for row in doc.basis]).reshape(-1, doc.modes)
        matrix = np.array([[complex(*z) for z in row] for row in doc.matrix]).reshape(len(basis), len(basis))
        return cls(basis, matrix)


State = Union[SuperposedState, DyadMixture]


def check_normalized(s: State):
    weight = s.trace() if isinstance(s, DyadMixture) else s.norm_squared()
    if abs(weight - 1.0) > NORMALIZED_TOL:
        raise ContractViolation(f"Expected a normalized state, got norm {weight}")


def fidelity(s1: State, s2: State) -> float:
    check_normalized(s1)
    check_normalized(s2)
    match s1, s2:
        case SuperposedState(), SuperposedState():
            return abs(inner(s1, s2)) ** 2
        case SuperposedState(), DyadMixture():
            return s2.expectation(s1)
        case DyadMixture(), SuperposedState():
            return s1.expectation(s2)
        case _:
            raise ContractViolation("fidelity between two mixtures is not supported")

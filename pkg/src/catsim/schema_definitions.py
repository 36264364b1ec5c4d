from __future__ import annotations
import itertools
import math
import warnings
from typing import List, Literal, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Parameter classes
class DetectorModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    efficiency: float = Field(default=1.0, ge=0.0, le=1.0)
    vacuum_threshold: int = Field(default=0, ge=0)
    truncation: int = Field(default=128, ge=1)


class LogicalQubit(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: complex
    b: complex
    alpha: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _check_normalization(self):
        # approximate normalization; the exact norm of the encoded state uses the Gram matrix
        weight = abs(self.a) ** 2 + abs(self.b) ** 2
        if not math.isfinite(weight) or abs(weight - 1.0) > 1e-9:
            raise ValueError(f"|a|^2 + |b|^2 must be 1 within 1e-9, got {weight}")
        return self

    @classmethod
    def from_unnormalized(cls, a: complex, b: complex, alpha: float) -> "LogicalQubit":
        weight = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if weight == 0.0:
            raise ValueError("Qubit amplitudes cannot both be zero")
        if abs(weight - 1.0) > 1e-9:
            warnings.warn(f"Rescaling qubit amplitudes by 1/{weight}")
        return cls(a=a / weight, b=b / weight, alpha=alpha)


class BeamSplitterSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode_i: int = Field(ge=0)
    mode_j: int = Field(ge=0)
    transmission: float = Field(default=0.5, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _distinct_modes(self):
        if self.mode_i == self.mode_j:
            raise ValueError("A beam splitter needs two different modes")
        return self


class RotationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    axis: Literal["x", "y", "z"]
    half_angle: float

    @field_validator("half_angle")
    @classmethod
    def _finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("half_angle must be finite")
        return value


class EulerAngles(BaseModel):
    """R(theta, phi, eta) = U_z(theta/2) U_y(phi/2) U_z(eta/2)"""
    model_config = ConfigDict(frozen=True)

    theta: float = 0.0
    phi: float = 0.0
    eta: float = 0.0


class DecoherenceParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma_tau: float = Field(ge=0.0)
    alpha: float = Field(gt=0.0)

    @property
    def t(self) -> float:
        return math.exp(-self.gamma_tau / 2)

    @property
    def gamma_factor(self) -> float:
        return math.exp(-2 * (1 - self.t ** 2) * self.alpha ** 2)


class ErrorBudget(BaseModel):
    p_A: float = Field(ge=0.0, le=1.0)
    p_B: float = Field(ge=0.0, le=1.0)
    P_s: float = Field(ge=0.0, le=1.0)
    undetected: float = Field(ge=0.0, le=1.0)
    detected: float = Field(ge=-1e-12, le=1.0)

    @model_validator(mode="after")
    def _undetected_is_product(self):
        if self.undetected != self.p_A * self.p_B:
            raise ValueError("undetected must equal p_A * p_B")
        return self


class EpsilonSchedule(BaseModel):
    """Signed displacement errors applied one after another to a logical qubit."""
    model_config = ConfigDict(frozen=True)

    epsilons: List[float] = Field(default_factory=list)
    alpha: float = Field(gt=0.0)

    @property
    def epsilon_bar(self) -> float:
        return math.pi / (4 * self.alpha)

    @property
    def partial_sums(self) -> List[float]:
        return list(itertools.accumulate(self.epsilons))

    @property
    def total(self) -> float:
        return math.fsum(self.epsilons)

    @model_validator(mode="after")
    def _bounded_partial_sums(self):
        if not self.epsilons:
            return self
        bound = self.epsilon_bar + max(abs(e) for e in self.epsilons)
        worst = max(abs(s) for s in self.partial_sums)
        if worst > bound + 1e-12:
            raise ValueError(f"Partial sum {worst} exceeds the bound {bound}")
        return self


# Serialization documents
class TermDocument(BaseModel):
    c: Tuple[float, float]
    ket: List[Tuple[float, float]]


class StateDocument(BaseModel):
    modes: int = Field(ge=1)
    terms: List[TermDocument]

    @model_validator(mode="after")
    def _mode_counts(self):
        for term in self.terms:
            if len(term.ket) != self.modes:
                raise ValueError(f"Term has {len(term.ket)} modes, document declares {self.modes}")
        return self


class MixtureDocument(BaseModel):
    modes: int = Field(ge=1)
    basis: List[List[Tuple[float, float]]]
    matrix: List[List[Tuple[float, float]]]


class TraceStep(BaseModel):
    step: str
    outcome: str
    p: float = Field(ge=0.0, le=1.0 + 1e-9)
    fidelity: Optional[float] = None


class RunConfig(BaseModel):
    alpha: float = Field(default=3.0, gt=0.0)
    efficiency: float = Field(default=0.9, ge=0.0, le=1.0)
    threshold: int = Field(default=0, ge=0)
    truncation: int = Field(default=128, ge=1)
    seed: int = Field(default=0, ge=0)
    shots: int = Field(default=0, ge=0)
    output_format: Literal["csv", "json"] = "csv"
    prune_tol: float = Field(default=1e-12, ge=0.0)
    gamma_tau: float = Field(default=0.0, ge=0.0)
    ideal_corrections: bool = False
    sigma_z_transmission: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    verbose: bool = False

    def detector(self) -> DetectorModel:
        return DetectorModel(efficiency=self.efficiency, vacuum_threshold=self.threshold,
                             truncation=self.truncation)

import csv
import io
import json
import numpy as np
from catsim.states import SuperposedState, normalize

def random_qubit(rng, alpha: float) -> tuple:
    """Random logical amplitudes (a, b) with |a|^2 + |b|^2 = 1"""
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    z /= np.linalg.norm(z)
    return complex(z[0]), complex(z[1])

def qubit_state(a: complex, b: complex, alpha: float) -> SuperposedState:
    return normalize(SuperposedState([a, b], np.array([[alpha], [-alpha]], dtype=complex)))

def random_state(rng, modes: int, max_amplitude: float = 3.0, terms: int = 3) -> SuperposedState:
    radius = max_amplitude * np.sqrt(rng.random((terms, modes)))
    kets = radius * np.exp(2j * np.pi * rng.random((terms, modes)))
    coeffs = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    return normalize(SuperposedState(coeffs, kets))

def read_report(text: str, output_format: str = "csv") -> list:
    """Rows of a CLI report as dicts of strings"""
    match output_format:
        case "csv":
            return list(csv.DictReader(io.StringIO(text)))
        case "json":
            return json.loads(text)
        case _:
            raise ValueError

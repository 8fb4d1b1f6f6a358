"""Dense Hermitian linear algebra used by every other module.

Matrices are plain ``numpy`` complex arrays.  The helpers here validate
Hermiticity, compute spectral data and compress operators onto subspaces.
"""
from __future__ import annotations

import contextlib
import dataclasses
import math
from fractions import Fraction
from typing import Iterator, NamedTuple, Union

import numpy as np

Number = Union[int, float, Fraction]


@dataclasses.dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-9  # relative to matrix norm
    eig: float = 1e-9
    order: float = 1e-9  # absolute
    cluster: float = 1e-7  # relative eigenvalue merge
    context: float = 1e-7  # projector Frobenius distance
    strict: float = 1e-9  # strict inequalities on eigenvalues
    prob: float = 1e-9
    near_miss: float = 1e-6


TOL = Tolerances()


@contextlib.contextmanager
def using_tolerances(**overrides: float) -> Iterator[Tolerances]:
    """Temporarily replace module-wide tolerances."""
    global TOL
    saved = TOL
    TOL = dataclasses.replace(saved, **overrides)
    try:
        yield TOL
    finally:
        TOL = saved


def tol() -> Tolerances:
    return TOL


class LinalgError(ValueError):
    pass


class NonHermitianInput(LinalgError):
    pass


class DimensionMismatch(LinalgError):
    pass


class ZeroRankProjection(LinalgError):
    pass


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray  # columns


class RationalInterval(NamedTuple):
    """Open interval ``(lo, hi)``; endpoints are Fractions or +-inf."""

    lo: Union[Fraction, float]
    hi: Union[Fraction, float]

    @classmethod
    def make(cls, lo, hi) -> "RationalInterval":
        lo, hi = _endpoint(lo), _endpoint(hi)
        if lo >= hi:
            raise ValueError(f"empty interval ({lo}, {hi})")
        return cls(lo, hi)

    @classmethod
    def parse(cls, text: str) -> "RationalInterval":
        parts = text.split(",")
        if len(parts) != 2:
            raise ValueError(f"interval must be 'r,s', got {text!r}")
        return cls.make(*(p.strip() for p in parts))

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def __str__(self) -> str:
        return f"({_fmt_endpoint(self.lo)},{_fmt_endpoint(self.hi)})"


def _endpoint(x) -> Union[Fraction, float]:
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity", "+infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        return Fraction(s)
    if isinstance(x, float) and math.isinf(x):
        return x
    return Fraction(x)


def _fmt_endpoint(x) -> str:
    if isinstance(x, float):
        return "inf" if x > 0 else "-inf"
    return str(x)


def as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def hermitian(a) -> np.ndarray:
    """Validate ``a`` as Hermitian and return its exactly symmetrised copy."""
    m = as_matrix(a)
    scale = max(norm(m), 1.0)
    if norm(m - m.conj().T) > TOL.herm * scale:
        raise NonHermitianInput("matrix is not Hermitian within tolerance")
    out = (m + m.conj().T) / 2
    out.flags.writeable = False
    return out


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape} vs {b.shape}")


def eigen(a) -> EigenDecomposition:
    h = hermitian(a)
    values, vectors = np.linalg.eigh(h)
    return EigenDecomposition(values, vectors)


def eigenvalue_clusters(values: np.ndarray, scale: float) -> list[list[int]]:
    """Group ascending eigenvalues whose neighbours differ by <= cluster tol."""
    gap = TOL.cluster * max(scale, 1e-300)
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def spectral_decomposition(a) -> list[tuple[float, np.ndarray]]:
    """Distinct (clustered) eigenvalues with their spectral projections."""
    h = hermitian(a)
    dec = eigen(h)
    out = []
    for group in eigenvalue_clusters(dec.values, norm(h)):
        v = dec.vectors[:, group]
        out.append((float(np.mean(dec.values[group])), v @ v.conj().T))
    return out


def spectral_projection(a, interval: RationalInterval) -> np.ndarray:
    """Sum of eigenprojections of ``a`` whose eigenvalue lies in ``interval``."""
    dec = eigen(a)
    keep = [i for i, v in enumerate(dec.values) if interval.contains(v)]
    v = dec.vectors[:, keep]
    return v @ v.conj().T


def is_positive_leq(a, b) -> bool:
    """``a <= b`` in the operator order: ``b - a`` positive semidefinite."""
    a, b = hermitian(a), hermitian(b)
    _same_dim(a, b)
    return bool(np.linalg.eigvalsh(b - a)[0] >= -TOL.order)


def is_projection(p) -> bool:
    m = as_matrix(p)
    scale = max(norm(m), 1.0)
    return norm(m - m.conj().T) <= TOL.herm * scale and norm(m @ m - m) <= TOL.eig * scale


def rank(p) -> int:
    return int(round(np.trace(as_matrix(p)).real))


def range_basis(p) -> np.ndarray:
    """Orthonormal columns spanning the range of projection ``p``."""
    values, vectors = np.linalg.eigh(hermitian(p))
    return vectors[:, values > 0.5]


def compress(a, p) -> np.ndarray:
    """``p a p`` written on an orthonormal basis of ``range(p)``."""
    a, p = hermitian(a), hermitian(p)
    _same_dim(a, p)
    basis = range_basis(p)
    if basis.shape[1] == 0:
        raise ZeroRankProjection("cannot compress onto a zero projection")
    return hermitian(basis.conj().T @ a @ basis)


def projector(vector) -> np.ndarray:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector")
    v = v / n
    return np.outer(v, v.conj())


# -- JSON encoding ---------------------------------------------------------

def _complex_from_json(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return complex(float(x), 0.0)
    if isinstance(x, str):
        return complex(float(Fraction(x)), 0.0)
    raise ValueError(f"bad matrix entry {x!r}")


def matrix_to_json(a) -> dict:
    m = as_matrix(a)
    return {
        "dim": m.shape[0],
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Decode ``{"dim", "entries"}`` or a bare nested list of entries."""
    if isinstance(obj, dict):
        rows = obj["entries"]
        dim = obj.get("dim", len(rows))
    else:
        rows = obj
        dim = len(rows)
    m = np.array([[_complex_from_json(x) for x in row] for row in rows], dtype=complex)
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"declared dim {dim} but entries have shape {m.shape}")
    return m


def vector_from_json(obj) -> np.ndarray:
    return np.array([_complex_from_json(x) for x in obj], dtype=complex)

"""States, their per-context valuations and the state-proposition pairing."""
from __future__ import annotations

import dataclasses
import warnings
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import daseinisation, frames, linalg
from .contexts import Context, ContextPoset, UpperSet
from .linalg import DimensionMismatch, RationalInterval
from .spectrum import SpectralOpen


class InvalidState(ValueError):
    pass


class NearMissWarning(UserWarning):
    """A probability sits just below 1: not accepted, but close."""


@dataclasses.dataclass(frozen=True, eq=False)
class State:
    rho: np.ndarray

    def __post_init__(self):
        rho = linalg.hermitian(self.rho)
        if abs(np.trace(rho).real - 1.0) > 1e-9:
            raise InvalidState(f"trace is {np.trace(rho).real!r}, not 1")
        if np.linalg.eigvalsh(rho)[0] < -linalg.tol().order:
            raise InvalidState("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def pure(cls, vector) -> "State":
        return cls(linalg.projector(vector))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def expectation(self, a) -> float:
        return float(np.trace(self.rho @ linalg.hermitian(a)).real)


def as_state(rho) -> State:
    if isinstance(rho, State):
        return rho
    arr = np.asarray(rho, dtype=complex)
    return State.pure(arr) if arr.ndim == 1 else State(arr)


@dataclasses.dataclass(frozen=True)
class ContextValuation:
    """Probability valuation on ``L_C``: exact sums of per-atom Born weights."""

    context: Optional[int]
    weights: tuple[Fraction, ...]

    def __call__(self, atoms: int) -> Fraction:
        return sum((self.weights[i] for i in frames.bits(atoms)), Fraction(0))

    def is_one(self, atoms: int) -> bool:
        value = float(self(atoms))
        t = linalg.tol()
        if value >= 1 - t.prob:
            return True
        if value > 1 - t.near_miss:
            warnings.warn(f"probability {value!r} is a near miss for 1", NearMissWarning, stacklevel=2)
        return False


def valuation(rho, c: Context, index: Optional[int] = None) -> ContextValuation:
    state = as_state(rho)
    if state.dim != c.dim:
        raise DimensionMismatch("state and context dimensions differ")
    weights = tuple(Fraction(float(np.trace(state.rho @ p).real)) for p in c.atoms)
    return ContextValuation(index, weights)


def valuations(rho, poset: ContextPoset) -> list[ContextValuation]:
    return [valuation(rho, c, i) for i, c in enumerate(poset.contexts)]


def state_subobject_membership(rho, u: SpectralOpen, c: int) -> bool:
    """Stage ``c`` forces ``μ_ρ(u) = 1``: probability one at every ``D >= c``."""
    poset = u.poset
    poset.check_index(c)
    return all(valuation(rho, poset.contexts[d], d).is_one(u.values[d]) for d in poset.up(c))


def pair(a, iv: RationalInterval, rho, poset: ContextPoset, base: int) -> UpperSet:
    """Truth value of ``a ∈ (r, s)`` in state ``rho``, as an upper set of ``↑base``."""
    state = as_state(rho)
    a = linalg.hermitian(a)
    if a.shape[0] != poset.dim or state.dim != poset.dim:
        raise DimensionMismatch("observable, state and poset dimensions must agree")
    poset.check_index(base)
    members = []
    for d in poset.up(base):
        ctx = poset.contexts[d]
        prof = daseinisation.inner_outer(a, ctx, d)
        mu = valuation(state, ctx, d)
        lower = daseinisation.lower_mask(prof, iv.lo)
        upper = daseinisation.upper_mask(prof, iv.hi)
        if mu.is_one(lower) and mu.is_one(upper):
            members.append(d)
    return UpperSet(base, frozenset(members))


def state_from_valuations(poset: ContextPoset, vals: Sequence[ContextValuation]) -> np.ndarray:
    """A density-like matrix reproducing every per-atom probability (least squares).

    The constraints are linear in the matrix entries, so any consistent
    family of valuations is matched exactly up to roundoff.
    """
    n = poset.dim
    rows, rhs = [], []
    for ctx, val in zip(poset.contexts, vals):
        for p, w in zip(ctx.atoms, val.weights):
            # tr(X p) with X Hermitian = sum over entries of conj(p) * X
            rows.append(np.concatenate([p.real.reshape(-1), p.imag.reshape(-1)]))
            rhs.append(float(w))
    m = np.array(rows)
    sol, *_ = np.linalg.lstsq(m, np.array(rhs), rcond=None)
    x = sol[: n * n].reshape(n, n) + 1j * sol[n * n:].reshape(n, n)
    return (x + x.conj().T) / 2

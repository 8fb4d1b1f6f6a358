"""Daseinisation: approximating an observable inside every context.

For an atom ``p`` of a context, the best inner bound (sup of the
``p``-coefficient over ``f <= a`` in the context) is the least eigenvalue
of the compression of ``a`` to ``range(p)``; the best outer bound is the
greatest.  An interval ``(r, s)`` then selects the atoms with
``inner > r`` and ``outer < s``.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Optional

import numpy as np

from . import linalg, spectrum
from .contexts import Context, ContextPoset
from .linalg import DimensionMismatch, RationalInterval
from .spectrum import SpectralOpen


class BoundaryWarning(UserWarning):
    """An interval endpoint sits within the strictness tolerance of a profile value."""


@dataclasses.dataclass(frozen=True)
class InnerOuterProfile:
    context: Optional[int]
    inner: tuple[float, ...]
    outer: tuple[float, ...]


def inner_outer(a, c: Context, index: Optional[int] = None) -> InnerOuterProfile:
    a = linalg.hermitian(a)
    if a.shape[0] != c.dim:
        raise DimensionMismatch("observable and context dimensions differ")
    inner, outer = [], []
    for basis in c.bases:
        block = linalg.hermitian(basis.conj().T @ a @ basis)
        w = np.linalg.eigvalsh(block)
        inner.append(float(w[0]))
        outer.append(float(w[-1]))
    return InnerOuterProfile(index, tuple(inner), tuple(outer))


def _above(x: float, r, what: str) -> bool:
    if isinstance(r, float) and math.isinf(r):
        return r < 0
    diff = x - float(r)
    eps = linalg.tol().strict
    if abs(diff) <= eps:
        warnings.warn(f"{what} {x!r} within {eps} of endpoint {r}", BoundaryWarning, stacklevel=3)
    return diff > eps


def select_atoms(profile: InnerOuterProfile, iv: RationalInterval) -> int:
    """Atoms with inner bound above ``iv.lo`` and outer bound below ``iv.hi``."""
    mask = 0
    for i, (lam, mu) in enumerate(zip(profile.inner, profile.outer)):
        if _above(lam, iv.lo, "inner bound") and _above(-mu, -iv.hi, "outer bound"):
            mask |= 1 << i
    return mask


def lower_mask(profile: InnerOuterProfile, r) -> int:
    """Atoms whose inner bound exceeds ``r`` (the support of ``⋁_{f<=a} D_{f-r}``)."""
    return select_atoms(profile, RationalInterval(r, math.inf))


def upper_mask(profile: InnerOuterProfile, s) -> int:
    """Atoms whose outer bound is below ``s`` (the support of ``⋁_{a<=g} D_{s-g}``)."""
    return select_atoms(profile, RationalInterval(-math.inf, s))


def _is_inf(x, sign: int) -> bool:
    return isinstance(x, float) and math.isinf(x) and (x > 0) == (sign > 0)


def profiles(a, poset: ContextPoset) -> list[InnerOuterProfile]:
    a = linalg.hermitian(a)
    if a.shape[0] != poset.dim:
        raise DimensionMismatch("observable and poset dimensions differ")
    return [inner_outer(a, c, i) for i, c in enumerate(poset.contexts)]


def daseinise(a, iv: RationalInterval, poset: ContextPoset) -> SpectralOpen:
    """The spectral open ``δ(a)⁻¹(r, s)``."""
    return SpectralOpen(poset, tuple(select_atoms(p, iv) for p in profiles(a, poset)))


def daseinise_union(a, intervals, poset: ContextPoset) -> SpectralOpen:
    """Image of a finite union of basic intervals: the join of their images."""
    out = spectrum.bottom(poset)
    for iv in intervals:
        out = out | daseinise(a, iv, poset)
    return out


def gelfand_open(a, c: Context, iv: RationalInterval) -> int:
    """``D_{a-r} ∧ D_{s-a}`` for ``a`` in the span of ``c`` (infinite ends drop a clause)."""
    a = linalg.hermitian(a)
    if not c.contains(a):
        raise spectrum.NotInContext(f"observable is not in the span of context {c.label!r}")
    one = np.eye(c.dim)
    mask = spectrum.full_mask(c)
    if not _is_inf(iv.lo, -1):
        mask &= spectrum.generator(c, a - float(iv.lo) * one)
    if not _is_inf(iv.hi, +1):
        mask &= spectrum.generator(c, float(iv.hi) * one - a)
    return mask


def daseinise_leq(a, b, poset: ContextPoset) -> bool:
    """``δ(a) <= δ(b)``: inner and outer bounds of ``a`` below those of ``b`` everywhere."""
    a, b = linalg.hermitian(a), linalg.hermitian(b)
    if a.shape != b.shape:
        raise DimensionMismatch("observables of different dimensions")
    eps = linalg.tol().order
    for pa, pb in zip(profiles(a, poset), profiles(b, poset)):
        if any(x > y + eps for x, y in zip(pa.inner, pb.inner)):
            return False
        if any(x > y + eps for x, y in zip(pa.outer, pb.outer)):
            return False
    return True

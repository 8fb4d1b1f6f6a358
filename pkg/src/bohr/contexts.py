"""Contexts (orthogonal decompositions of the identity) and their poset.

A context stands for a unital commutative *-subalgebra: the real span of
its atoms.  ``C <= D`` means ``C`` is a subalgebra of ``D``, i.e. every
atom of ``C`` is a sum of atoms of ``D``.
"""
from __future__ import annotations

import dataclasses
import functools
import os
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import linalg
from .linalg import DimensionMismatch

DEFAULT_POSET_CAP = 512
DEFAULT_ENUMERATION_CAP = 20


class PosetTooLarge(RuntimeError):
    pass


class EnumerationTooLarge(RuntimeError):
    pass


class InvalidContext(ValueError):
    pass


def _atom_key(p: np.ndarray) -> tuple:
    flat = np.round(p, 6).reshape(-1)
    # +0.0 normalises the sign of rounded zeros
    return (linalg.rank(p),) + tuple((float(z.real) + 0.0, float(z.imag) + 0.0) for z in flat)


@dataclasses.dataclass(frozen=True, eq=False)
class Context:
    """An orthogonal decomposition of the identity into nonzero projections."""

    atoms: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self):
        if not self.atoms:
            raise InvalidContext("a context needs at least one atom")
        atoms = [linalg.hermitian(p) for p in self.atoms]
        dim = atoms[0].shape[0]
        t = linalg.tol()
        total = np.zeros((dim, dim), dtype=complex)
        for i, p in enumerate(atoms):
            if p.shape != (dim, dim):
                raise DimensionMismatch("atoms of different dimensions")
            if not linalg.is_projection(p) or linalg.rank(p) < 1:
                raise InvalidContext(f"atom {i} is not a nonzero projection")
            for q in atoms[:i]:
                if linalg.norm(p @ q) > t.context:
                    raise InvalidContext("atoms are not pairwise orthogonal")
            total += p
        if linalg.norm(total - np.eye(dim)) > t.context:
            raise InvalidContext("atoms do not sum to the identity")
        atoms.sort(key=_atom_key)
        object.__setattr__(self, "atoms", tuple(atoms))

    @property
    def dim(self) -> int:
        return self.atoms[0].shape[0]

    @property
    def size(self) -> int:
        return len(self.atoms)

    @functools.cached_property
    def bases(self) -> tuple[np.ndarray, ...]:
        return tuple(linalg.range_basis(p) for p in self.atoms)

    @functools.cached_property
    def ranks(self) -> tuple[int, ...]:
        return tuple(linalg.rank(p) for p in self.atoms)

    def is_trivial(self) -> bool:
        return len(self.atoms) == 1

    def same_as(self, other: "Context") -> bool:
        if self.dim != other.dim or self.size != other.size:
            return False
        eps = linalg.tol().context
        return all(
            any(linalg.norm(p - q) < eps for q in other.atoms) for p in self.atoms
        )

    def coefficients(self, a) -> Optional[np.ndarray]:
        """Coefficients ``x_p`` with ``a = sum x_p p``, or None if ``a`` is outside the span."""
        a = linalg.hermitian(a)
        if a.shape[0] != self.dim:
            raise DimensionMismatch("observable and context dimensions differ")
        coef = np.array([np.trace(p @ a).real / r for p, r in zip(self.atoms, self.ranks)])
        rebuilt = sum(x * p for x, p in zip(coef, self.atoms))
        if linalg.norm(a - rebuilt) > linalg.tol().herm * max(linalg.norm(a), 1.0):
            return None
        return coef

    def contains(self, a) -> bool:
        return self.coefficients(a) is not None

    def __repr__(self) -> str:
        return f"Context({self.label!r}, dim={self.dim}, ranks={self.ranks})"


def trivial_context(dim: int, label: str = "1") -> Context:
    return Context((np.eye(dim, dtype=complex),), label)


def context_of(a, label: str = "") -> Context:
    """The context generated by a single Hermitian matrix: its spectral projections."""
    return Context(tuple(p for _, p in linalg.spectral_decomposition(a)), label)


def context_from_basis(vectors: Sequence, label: str = "") -> Context:
    return Context(tuple(linalg.projector(v) for v in vectors), label)


def refinement_map(c: Context, d: Context) -> Optional[tuple[int, ...]]:
    """For ``c <= d``: index of the ``c`` atom above each ``d`` atom; else None."""
    if c.dim != d.dim:
        raise DimensionMismatch("contexts of different dimensions")
    eps = linalg.tol().context
    parents = []
    for q in d.atoms:
        for i, p in enumerate(c.atoms):
            if linalg.norm(p @ q - q) < eps:
                parents.append(i)
                break
        else:
            return None
    return tuple(parents)


def includes(c: Context, d: Context) -> bool:
    """True iff ``c`` is a subalgebra of ``d`` (``d`` refines ``c``)."""
    return refinement_map(c, d) is not None


def _seed() -> int:
    return int(os.environ.get("BOHR_SEED", "0"))


def intersect(c: Context, d: Context, seed: Optional[int] = None, label: str = "") -> Context:
    """Context of the subalgebra ``C ∩ D``.

    The common real span is found as a null space; its atoms are the
    spectral projections of a generic element with random rational weights.
    """
    if c.dim != d.dim:
        raise DimensionMismatch("contexts of different dimensions")
    label = label or f"({c.label}&{d.label})"
    if includes(c, d):
        return Context(c.atoms, label)
    if includes(d, c):
        return Context(d.atoms, label)

    def vec(p):
        flat = p.reshape(-1)
        return np.concatenate([flat.real, flat.imag])

    cols = [vec(p) for p in c.atoms] + [-vec(q) for q in d.atoms]
    m = np.stack(cols, axis=1)
    _, s, vh = np.linalg.svd(m)
    null_rank = m.shape[1] - int(np.sum(s > 1e-9 * max(s[0], 1.0)))
    null = vh[m.shape[1] - null_rank:].T
    basis = [sum(x * p for x, p in zip(col[: c.size], c.atoms)) for col in null.T]
    k = len(basis)
    if k <= 1:
        return trivial_context(c.dim, label)
    rng = np.random.default_rng(_seed() if seed is None else seed)
    for _ in range(64):
        weights = [float(Fraction(int(n), 97)) for n in rng.integers(1, 9700, size=k)]
        generic = sum(w * b for w, b in zip(weights, basis))
        parts = linalg.spectral_decomposition(generic)
        if len(parts) == k:
            return Context(tuple(p for _, p in parts), label)
    raise RuntimeError("could not find a generic element of the intersection algebra")


@dataclasses.dataclass(frozen=True, eq=False)
class ContextPoset:
    """A finite intersection-closed family of contexts under inclusion."""

    contexts: tuple[Context, ...]
    leq: np.ndarray
    bottom: int = 0

    def __len__(self) -> int:
        return len(self.contexts)

    @property
    def dim(self) -> int:
        return self.contexts[0].dim

    def index(self, label: str) -> int:
        for i, c in enumerate(self.contexts):
            if c.label == label:
                return i
        raise KeyError(f"no context labelled {label!r}")

    def check_index(self, i: int) -> int:
        if not 0 <= i < len(self.contexts):
            raise IndexError(f"context index {i} out of range")
        return i

    def up(self, i: int) -> list[int]:
        return [j for j in range(len(self)) if self.leq[i, j]]

    def down(self, i: int) -> list[int]:
        return [j for j in range(len(self)) if self.leq[j, i]]

    @functools.cached_property
    def _parent_maps(self) -> dict:
        maps = {}
        for i, c in enumerate(self.contexts):
            for j, d in enumerate(self.contexts):
                if self.leq[i, j]:
                    maps[i, j] = refinement_map(c, d)
        return maps

    def parent_map(self, i: int, j: int) -> tuple[int, ...]:
        return self._parent_maps[i, j]

    @functools.cached_property
    def embed_tables(self) -> dict:
        """For ``i <= j``: table sending an atom bitmask of ``i`` to its image in ``j``."""
        tables = {}
        for (i, j), parents in self._parent_maps.items():
            k = self.contexts[i].size
            tables[i, j] = tuple(
                sum(1 << q for q, p in enumerate(parents) if x >> p & 1) for x in range(1 << k)
            )
        return tables

    def hasse_edges(self) -> list[tuple[int, int]]:
        n = len(self)
        edges = []
        for i in range(n):
            for j in range(n):
                if i != j and self.leq[i, j] and not any(
                    k not in (i, j) and self.leq[i, k] and self.leq[k, j] for k in range(n)
                ):
                    edges.append((i, j))
        return edges

    def maximal(self) -> list[int]:
        return [i for i in range(len(self)) if self.up(i) == [i]]

    def topological_order(self) -> list[int]:
        """Indices ordered so that every context precedes those above it."""
        return sorted(range(len(self)), key=lambda i: (len(self.down(i)), i))

    def to_dot(self, highlight: Iterable[int] = ()) -> str:
        marked = set(highlight)
        lines = ["digraph poset {", "  rankdir=BT;"]
        for i, c in enumerate(self.contexts):
            style = ', style=filled, fillcolor="lightblue"' if i in marked else ""
            lines.append(f'  n{i} [label="{c.label}"{style}];')
        for i, j in self.hasse_edges():
            lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_poset(generators: Sequence[Context], cap: int = DEFAULT_POSET_CAP,
                seed: Optional[int] = None) -> ContextPoset:
    """Close ``generators`` under intersection and add the trivial context."""
    if not generators:
        raise ValueError("need at least one generating context")
    dim = generators[0].dim
    if any(g.dim != dim for g in generators):
        raise DimensionMismatch("generators of different dimensions")

    members: list[Context] = [trivial_context(dim)]

    def add(c: Context) -> bool:
        if any(m.same_as(c) for m in members):
            return False
        if len(members) >= cap:
            raise PosetTooLarge(f"poset exceeds cap of {cap} contexts")
        members.append(c)
        return True

    for g in generators:
        if g.is_trivial():
            continue
        add(g)
    frontier = True
    while frontier:
        frontier = False
        n = len(members)
        for i in range(1, n):
            for j in range(i + 1, n):
                if add(intersect(members[i], members[j], seed=seed)):
                    frontier = True
    n = len(members)
    leq = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            leq[i, j] = i == j or includes(members[i], members[j])
    leq.flags.writeable = False
    return ContextPoset(tuple(members), leq, 0)


@dataclasses.dataclass(frozen=True)
class UpperSet:
    """An upper set of ``↑base``: an element of the truth-value object at ``base``."""

    base: int
    members: frozenset

    def __le__(self, other: "UpperSet") -> bool:
        return self.members <= other.members


def _check_upper(poset: ContextPoset, base: int, members: frozenset) -> None:
    for m in members:
        if not poset.leq[base, m]:
            raise ValueError(f"context {m} is not above base {base}")
        for k in poset.up(m):
            if k not in members:
                raise ValueError("set is not upward closed")


def upper_set(poset: ContextPoset, base: int, members: Iterable[int]) -> UpperSet:
    ms = frozenset(members)
    _check_upper(poset, base, ms)
    return UpperSet(base, ms)


def principal_up(poset: ContextPoset, c: int) -> UpperSet:
    poset.check_index(c)
    return UpperSet(c, frozenset(poset.up(c)))


def omega_elements(poset: ContextPoset, c: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[UpperSet]:
    """All upper sets of ``↑c``, from the empty set to ``↑c`` itself."""
    poset.check_index(c)
    region = poset.up(c)
    if len(region) > cap:
        raise EnumerationTooLarge(f"|↑c| = {len(region)} exceeds cap {cap}")
    # decide elements from the top down, so everything above is already fixed
    order = sorted(region, key=lambda i: -len(poset.down(i)))
    out: list[UpperSet] = []

    def rec(k: int, chosen: set):
        if k == len(order):
            out.append(UpperSet(c, frozenset(chosen)))
            return
        x = order[k]
        rec(k + 1, chosen)
        if all(y in chosen for y in poset.up(x) if y != x):
            chosen.add(x)
            rec(k + 1, chosen)
            chosen.discard(x)

    rec(0, set())
    out.sort(key=lambda u: (len(u.members), sorted(u.members)))
    return out


def omega_meet(s: UpperSet, t: UpperSet) -> UpperSet:
    return UpperSet(s.base, s.members & t.members)


def omega_join(s: UpperSet, t: UpperSet) -> UpperSet:
    return UpperSet(s.base, s.members | t.members)


def omega_implies(poset: ContextPoset, s: UpperSet, t: UpperSet) -> UpperSet:
    """Largest upper set ``U`` of ``↑base`` with ``U ∩ s ⊆ t``."""
    members = frozenset(
        d for d in poset.up(s.base)
        if all(e in t.members for e in poset.up(d) if e in s.members)
    )
    return UpperSet(s.base, members)


def omega_restrict(poset: ContextPoset, s: UpperSet, d: int) -> UpperSet:
    """Truncate an upper set of ``↑base`` to ``↑d`` for ``base <= d``."""
    if not poset.leq[s.base, d]:
        raise ValueError("restriction target must lie above the base")
    return UpperSet(d, frozenset(m for m in s.members if poset.leq[d, m]))


# -- JSON ------------------------------------------------------------------

def context_to_json(c: Context) -> dict:
    return {"label": c.label, "atoms": [linalg.matrix_to_json(p) for p in c.atoms]}


def context_from_json(obj: dict) -> Context:
    label = obj.get("label", "")
    if "atoms" in obj:
        return Context(tuple(linalg.matrix_from_json(m) for m in obj["atoms"]), label)
    if "basis" in obj:
        return context_from_basis([linalg.vector_from_json(v) for v in obj["basis"]], label)
    raise InvalidContext("context JSON needs 'atoms' or 'basis'")

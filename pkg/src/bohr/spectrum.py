"""The external Gelfand spectrum over a context poset.

For a context ``C`` with ``k`` atoms the generating lattice ``L_C`` is the
powerset of atoms (bitmask ints).  A spectral open assigns to each context
one element of ``L_C`` monotonically along inclusions; such assignments
form a Heyting algebra (a finite frame) under pointwise meet and join.
"""
from __future__ import annotations

import dataclasses
from typing import Iterable, Iterator, Mapping, Optional


from . import frames, linalg
from .contexts import Context, ContextPoset


class NotInContext(ValueError):
    pass


class NotComparable(ValueError):
    pass


class PosetMismatch(ValueError):
    pass


class NotMonotone(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class LatticeElement:
    context: int
    atoms: int  # bitmask over the context's atoms

    def __le__(self, other: "LatticeElement") -> bool:
        return self.context == other.context and self.atoms & ~other.atoms == 0


def full_mask(c: Context) -> int:
    return (1 << c.size) - 1


def generator(c: Context, a) -> int:
    """``D_a`` in ``L_C``: atoms on which the coefficient of ``a`` is positive."""
    coef = c.coefficients(a)
    if coef is None:
        raise NotInContext(f"observable is not in the span of context {c.label!r}")
    eps = linalg.tol().strict
    return frames.mask_of(i for i, x in enumerate(coef) if x > eps)


def spectral_lattice(c: Context) -> frames.FiniteLattice:
    return frames.FiniteLattice.powerset(c.size)


def spectrum_cover(x: int, family: Iterable[int]) -> bool:
    """Cover on ``L_C``; with finite spectrum it reduces to ``x <= ⋁U``."""
    joined = 0
    for u in family:
        joined |= u
    return x & ~joined == 0


def embed_mask(poset: ContextPoset, x: int, c: int, d: int) -> int:
    """Image of ``x ∈ L_C`` in ``L_D``: the ``D``-atoms lying under atoms of ``x``."""
    if not poset.leq[c, d]:
        raise NotComparable(f"context {c} is not below context {d}")
    parents = poset.parent_map(c, d)
    return frames.mask_of(q for q, p in enumerate(parents) if x >> p & 1)


def embed(poset: ContextPoset, x: LatticeElement, d: int) -> LatticeElement:
    return LatticeElement(d, embed_mask(poset, x.atoms, x.context, d))


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralOpen:
    """A monotone choice of ``values[C] ∈ L_C`` for every context of ``poset``."""

    poset: ContextPoset
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.poset):
            raise PosetMismatch("one value per context is required")
        tables = self.poset.embed_tables
        for (c, d), table in tables.items():
            if table[self.values[c]] & ~self.values[d]:
                raise NotMonotone(
                    f"value at {self.poset.contexts[c].label!r} does not embed below "
                    f"value at {self.poset.contexts[d].label!r}"
                )

    def __eq__(self, other) -> bool:
        return isinstance(other, SpectralOpen) and self.poset is other.poset and self.values == other.values

    def __hash__(self) -> int:
        return hash((id(self.poset), self.values))

    def _check(self, other: "SpectralOpen") -> None:
        if other.poset is not self.poset:
            raise PosetMismatch("spectral opens live over different posets")

    def __le__(self, other: "SpectralOpen") -> bool:
        self._check(other)
        return all(x & ~y == 0 for x, y in zip(self.values, other.values))

    def __and__(self, other: "SpectralOpen") -> "SpectralOpen":
        self._check(other)
        return SpectralOpen(self.poset, tuple(x & y for x, y in zip(self.values, other.values)))

    def __or__(self, other: "SpectralOpen") -> "SpectralOpen":
        self._check(other)
        return SpectralOpen(self.poset, tuple(x | y for x, y in zip(self.values, other.values)))

    def implies(self, other: "SpectralOpen") -> "SpectralOpen":
        self._check(other)
        return SpectralOpen(self.poset, implication_values(self.poset, self.values, other.values))

    def __rshift__(self, other: "SpectralOpen") -> "SpectralOpen":
        return self.implies(other)

    def __invert__(self) -> "SpectralOpen":
        return self.implies(bottom(self.poset))

    def at(self, c: int) -> LatticeElement:
        return LatticeElement(c, self.values[c])

    def atoms_at(self, c: int) -> list[int]:
        return list(frames.bits(self.values[c]))

    def to_json(self) -> dict:
        return {
            "values": {
                ctx.label: self.atoms_at(i) for i, ctx in enumerate(self.poset.contexts)
            }
        }

    def table(self) -> str:
        rows = []
        for i, ctx in enumerate(self.poset.contexts):
            k = ctx.size
            marks = "".join("#" if self.values[i] >> b & 1 else "." for b in range(k))
            rows.append(f"{ctx.label:>20}  [{marks}]  {self.atoms_at(i)}")
        return "\n".join(rows)


def implication_values(poset: ContextPoset, u: tuple, v: tuple) -> tuple[int, ...]:
    """Pointwise values of ``u → v``.

    Since embedding preserves joins, the largest admissible element at ``C``
    is the union of the atoms ``p`` with ``embed(p, D) ∧ u(D) <= v(D)`` for
    every ``D >= C``.
    """
    tables = poset.embed_tables
    out = []
    for c, ctx in enumerate(poset.contexts):
        above = poset.up(c)
        x = 0
        for p in range(ctx.size):
            bit = 1 << p
            if all(tables[c, d][bit] & u[d] & ~v[d] == 0 for d in above):
                x |= bit
        out.append(x)
    return tuple(out)


def top(poset: ContextPoset) -> SpectralOpen:
    return SpectralOpen(poset, tuple(full_mask(c) for c in poset.contexts))


def bottom(poset: ContextPoset) -> SpectralOpen:
    return SpectralOpen(poset, (0,) * len(poset))


def spectral_open(poset: ContextPoset, values: Mapping) -> SpectralOpen:
    """Build from ``{context label or index: iterable of atom indices}``; missing contexts get ∅."""
    vals = [0] * len(poset)
    for key, atoms in values.items():
        i = key if isinstance(key, int) else poset.index(key)
        vals[i] = frames.mask_of(atoms)
    return SpectralOpen(poset, tuple(vals))


def spectral_open_from_json(poset: ContextPoset, obj: dict) -> SpectralOpen:
    return spectral_open(poset, obj["values"])


def pi_sigma_star(poset: ContextPoset, d: int) -> SpectralOpen:
    """Image of the basic open ``↑D``: ``⊤`` on contexts containing ``D``, ``⊥`` elsewhere."""
    poset.check_index(d)
    return SpectralOpen(
        poset,
        tuple(full_mask(c) if poset.leq[d, e] else 0 for e, c in enumerate(poset.contexts)),
    )


def enumerate_opens(poset: ContextPoset, limit: Optional[int] = None) -> Iterator[SpectralOpen]:
    """All spectral opens, contexts filled bottom-up with supersets of what is forced."""
    order = poset.topological_order()
    tables = poset.embed_tables
    vals = [0] * len(poset)
    count = 0

    def rec(k: int):
        nonlocal count
        if k == len(order):
            count += 1
            yield SpectralOpen(poset, tuple(vals))
            return
        d = order[k]
        forced = 0
        for c in poset.down(d):
            if c != d:
                forced |= tables[c, d][vals[c]]
        free = full_mask(poset.contexts[d]) & ~forced
        sub = free
        while True:
            vals[d] = forced | sub
            for o in rec(k + 1):
                yield o
                if limit is not None and count >= limit:
                    return
            if sub == 0:
                break
            sub = (sub - 1) & free

    yield from rec(0)


def as_subfunctor(u: SpectralOpen) -> list[int]:
    """Per context, the ideal ``↓u(C)`` of ``L_C`` as a bitset over ``L_C``."""
    out = []
    for c, ctx in enumerate(u.poset.contexts):
        lc = spectral_lattice(ctx)
        out.append(lc.down(u.values[c]))
    return out


def is_spectrum_subfunctor(poset: ContextPoset, family: list[int]) -> bool:
    """Subfunctor test in the generators-and-covers form.

    ``family[C]`` is a bitset over ``L_C``; it must be closed under the
    spectrum cover at each context and grow along inclusions.
    """
    tables = poset.embed_tables
    for c, ctx in enumerate(poset.contexts):
        members = list(frames.bits(family[c]))
        for x in range(1 << ctx.size):
            if spectrum_cover(x, members) and not family[c] >> x & 1:
                return False
        for d in poset.up(c):
            for x in members:
                if not family[d] >> tables[c, d][x] & 1:
                    return False
    return True

"""Finite lattices, covering relations and the frames they present.

Subsets of a site are Python ints used as bitsets: bit ``i`` set means
element ``i`` is a member.  All checks are exhaustive unless the site is
too large, in which case a seeded sample of subsets is used.
"""
from __future__ import annotations

import dataclasses
import functools
import itertools
import random
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Optional, Sequence

import numpy as np

EXHAUSTIVE_LIMIT = 12
PAIR_EXHAUSTIVE_LIMIT = 8
SAMPLE_SIZE = 1000
SAMPLE_SEED = 0


class NotALattice(ValueError):
    pass


class InvalidCovering(ValueError):
    def __init__(self, axiom: int, detail: str):
        super().__init__(f"covering axiom {axiom} fails: {detail}")
        self.axiom = axiom


class NotContinuous(ValueError):
    def __init__(self, condition: int, detail: str):
        super().__init__(f"continuity condition {condition} fails: {detail}")
        self.condition = condition


def bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _transitive_leq(n: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    leq = np.eye(n, dtype=bool)
    for i, j in pairs:
        leq[i, j] = True
    for k in range(n):
        leq |= leq[:, [k]] & leq[[k], :]
    return leq


@dataclasses.dataclass(frozen=True, eq=False)
class FiniteLattice:
    elements: tuple
    leq: np.ndarray
    meet: np.ndarray
    join: np.ndarray
    top: int
    bottom: int

    @classmethod
    def from_leq(cls, elements: Sequence[Hashable], leq) -> "FiniteLattice":
        leq = np.array(leq, dtype=bool)
        n = len(elements)
        if leq.shape != (n, n):
            raise NotALattice("order matrix has the wrong shape")
        meet = np.empty((n, n), dtype=int)
        join = np.empty((n, n), dtype=int)
        for i in range(n):
            for j in range(n):
                lower = [k for k in range(n) if leq[k, i] and leq[k, j]]
                upper = [k for k in range(n) if leq[i, k] and leq[j, k]]
                glb = [k for k in lower if all(leq[m, k] for m in lower)]
                lub = [k for k in upper if all(leq[k, m] for m in upper)]
                if len(glb) != 1 or len(lub) != 1:
                    raise NotALattice(f"no unique meet/join for {elements[i]!r}, {elements[j]!r}")
                meet[i, j], join[i, j] = glb[0], lub[0]
        tops = [k for k in range(n) if leq[:, k].all()]
        bots = [k for k in range(n) if leq[k, :].all()]
        if len(tops) != 1 or len(bots) != 1:
            raise NotALattice("lattice needs a top and a bottom")
        for a in (leq, meet, join):
            a.flags.writeable = False
        return cls(tuple(elements), leq, meet, join, tops[0], bots[0])

    @classmethod
    def from_pairs(cls, elements: Sequence[Hashable], pairs: Iterable[tuple[int, int]]) -> "FiniteLattice":
        return cls.from_leq(elements, _transitive_leq(len(elements), pairs))

    @classmethod
    def powerset(cls, n: int) -> "FiniteLattice":
        """Boolean algebra of subsets of ``n`` atoms; element ``i`` is the bitmask ``i``."""
        size = 1 << n
        leq = np.array([[(i & ~j) == 0 for j in range(size)] for i in range(size)])
        return cls.from_leq(tuple(range(size)), leq)

    @classmethod
    def chain(cls, n: int) -> "FiniteLattice":
        leq = np.array([[i <= j for j in range(n)] for i in range(n)])
        return cls.from_leq(tuple(range(n)), leq)

    @classmethod
    def of_sets(cls, sets: Sequence[int]) -> "FiniteLattice":
        """Lattice of bitsets ordered by inclusion (must be closed enough to be a lattice)."""
        leq = np.array([[(a & ~b) == 0 for b in sets] for a in sets])
        return cls.from_leq(tuple(sets), leq)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, element) -> int:
        return self.elements.index(element)

    def join_all(self, indices: Iterable[int]) -> int:
        return functools.reduce(lambda a, b: int(self.join[a, b]), indices, self.bottom)

    def meet_all(self, indices: Iterable[int]) -> int:
        return functools.reduce(lambda a, b: int(self.meet[a, b]), indices, self.top)

    def down(self, x: int) -> int:
        return mask_of(k for k in range(len(self)) if self.leq[k, x])

    def is_distributive(self) -> bool:
        r = range(len(self))
        m, j = self.meet, self.join
        return all(m[x, j[y, z]] == j[m[x, y], m[x, z]] for x in r for y in r for z in r)

    def hasse_edges(self) -> list[tuple[int, int]]:
        n = len(self)
        return [
            (i, j) for i in range(n) for j in range(n)
            if i != j and self.leq[i, j]
            and not any(k not in (i, j) and self.leq[i, k] and self.leq[k, j] for k in range(n))
        ]

    def to_json(self) -> dict:
        return {
            "elements": [_jsonable(e) for e in self.elements],
            "leq": [[i, j] for i, j in self.hasse_edges()],
            "top": self.top,
            "bottom": self.bottom,
        }

    def to_dot(self, name: str = "lattice") -> str:
        lines = [f"digraph {name} {{", "  rankdir=BT;"]
        for i, e in enumerate(self.elements):
            lines.append(f'  n{i} [label="{_label(e)}"];')
        for i, j in self.hasse_edges():
            lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _jsonable(e):
    if isinstance(e, (int, str, float)) or e is None:
        return e
    if isinstance(e, Fraction):
        return str(e)
    if isinstance(e, (tuple, list)):
        return [_jsonable(x) for x in e]
    if isinstance(e, frozenset):
        return sorted(_jsonable(x) for x in e)
    return str(e)


def _label(e) -> str:
    if isinstance(e, int):
        return "{" + ",".join(str(b) for b in bits(e)) + "}"
    return str(e)


# -- well inside, normality, regular ideals ---------------------------------

def well_inside(lattice: FiniteLattice, x: int, y: int) -> bool:
    """``x ≪ y``: some ``z`` has ``x ∧ z = ⊥`` and ``y ∨ z = ⊤``."""
    return any(
        lattice.meet[x, z] == lattice.bottom and lattice.join[y, z] == lattice.top
        for z in range(len(lattice))
    )


def well_inside_matrix(lattice: FiniteLattice) -> np.ndarray:
    n = len(lattice)
    return np.array([[well_inside(lattice, x, y) for y in range(n)] for x in range(n)])


def is_normal(lattice: FiniteLattice) -> bool:
    L, r = lattice, range(len(lattice))
    for b1 in r:
        for b2 in r:
            if L.join[b1, b2] != L.top:
                continue
            if not any(
                L.meet[c1, c2] == L.bottom and L.join[c1, b1] == L.top and L.join[c2, b2] == L.top
                for c1 in r for c2 in r
            ):
                return False
    return True


def is_strongly_normal(lattice: FiniteLattice) -> bool:
    L, r = lattice, range(len(lattice))
    for a in r:
        for b in r:
            if not any(
                L.leq[a, L.join[b, x]] and L.leq[b, L.join[a, y]] and L.meet[x, y] == L.bottom
                for x in r for y in r
            ):
                return False
    return True


def is_ideal(lattice: FiniteLattice, subset: int) -> bool:
    members = list(bits(subset))
    if not subset >> lattice.bottom & 1:
        return False
    for x in members:
        if lattice.down(x) & ~subset:
            return False
        for y in members:
            if not subset >> int(lattice.join[x, y]) & 1:
                return False
    return True


def is_regular_ideal(lattice: FiniteLattice, subset: int, wi: Optional[np.ndarray] = None) -> bool:
    if not is_ideal(lattice, subset):
        return False
    wi = well_inside_matrix(lattice) if wi is None else wi
    for x in range(len(lattice)):
        approximants = mask_of(y for y in range(len(lattice)) if wi[y, x])
        if approximants & ~subset == 0 and not subset >> x & 1:
            return False
    return True


def regular_ideals(lattice: FiniteLattice) -> FiniteLattice:
    """Frame of regular ideals, ordered by inclusion.

    Every ideal of a finite lattice is principal, so only ``↓x`` is tried.
    """
    wi = well_inside_matrix(lattice)
    found = sorted(
        {lattice.down(x) for x in range(len(lattice)) if is_regular_ideal(lattice, lattice.down(x), wi)},
        key=lambda m: (bin(m).count("1"), m),
    )
    return FiniteLattice.of_sets(found)


# -- sites -----------------------------------------------------------------

Cover = Callable[[int, int], bool]


@dataclasses.dataclass(frozen=True, eq=False)
class Site:
    """A finite meet-semilattice with a covering relation ``covers(x, U)``."""

    elements: tuple
    leq: np.ndarray
    meet: np.ndarray
    covers: Cover
    name: str = "site"

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def full(self) -> int:
        return (1 << len(self)) - 1

    def down(self, x: int) -> int:
        return mask_of(k for k in range(len(self)) if self.leq[k, x])

    def down_closure(self, subset: int) -> int:
        out = 0
        for x in bits(subset):
            out |= self.down(x)
        return out

    def is_down_set(self, subset: int) -> bool:
        return self.down_closure(subset) == subset

    def meet_sets(self, u: int, v: int) -> int:
        return mask_of(int(self.meet[x, y]) for x in bits(u) for y in bits(v))


def join_cover_site(lattice: FiniteLattice, name: str = "join-cover") -> Site:
    """Site whose cover is ``x ◁ U`` iff ``x <= ⋁U``."""

    def covers(x: int, subset: int) -> bool:
        return bool(lattice.leq[x, lattice.join_all(bits(subset))])

    return Site(lattice.elements, lattice.leq, lattice.meet, covers, name)


def explicit_cover_site(lattice: FiniteLattice, pairs: Iterable[tuple[int, int]], name: str = "explicit") -> Site:
    """Site whose cover is generated by listed basic covers ``(y, V)``.

    ``x ◁ U`` iff ``x ∈ ↓U`` or ``x <= y`` for a listed ``(y, V)`` with ``V ⊆ ↓U``.
    The result must still pass :func:`check_covering`.
    """
    basic = [(y, v) for y, v in pairs]
    downs = [lattice.down(k) for k in range(len(lattice))]

    def down_closure(subset):
        out = 0
        for k in bits(subset):
            out |= downs[k]
        return out

    def covers(x: int, subset: int) -> bool:
        closed = down_closure(subset)
        if closed >> x & 1:
            return True
        return any(lattice.leq[x, y] and v & ~closed == 0 for y, v in basic)

    return Site(lattice.elements, lattice.leq, lattice.meet, covers, name)


def closure(site: Site, subset: int) -> int:
    """``{x : x ◁ U}`` as a bitset."""
    return mask_of(x for x in range(len(site)) if site.covers(x, subset))


def _subsets(site: Site, rng: random.Random) -> Iterator[int]:
    if len(site) <= EXHAUSTIVE_LIMIT:
        yield from range(site.full + 1)
    else:
        yield 0
        yield site.full
        for _ in range(SAMPLE_SIZE):
            yield rng.getrandbits(len(site))


def _subset_pairs(site: Site, rng: random.Random) -> Iterator[tuple[int, int]]:
    if len(site) <= PAIR_EXHAUSTIVE_LIMIT:
        yield from itertools.product(range(site.full + 1), repeat=2)
    else:
        for _ in range(SAMPLE_SIZE):
            yield rng.getrandbits(len(site)), rng.getrandbits(len(site))


def check_covering(site: Site) -> list[tuple[int, str]]:
    """Return violated covering axioms as ``(axiom number, description)``.

    Axiom 2 (transitivity) is checked in its equivalent form: the closure
    is monotone and idempotent.
    """
    rng = random.Random(SAMPLE_SEED)
    n = len(site)
    cl = functools.lru_cache(maxsize=None)(lambda u: closure(site, u))
    problems: list[tuple[int, str]] = []
    for u in _subsets(site, rng):
        au = cl(u)
        if u & ~au:
            problems.append((1, f"some member of {u:#x} is not covered by it"))
        if cl(au) & ~au:
            problems.append((2, f"closure of {u:#x} is not idempotent"))
        for y in range(n):
            if au & ~cl(u | (1 << y)):
                problems.append((2, f"closure not monotone at {u:#x} + {y}"))
                break
        for x in bits(au):
            if site.down(x) & ~au:
                problems.append((3, f"covered set of {u:#x} not down-closed at {x}"))
                break
        if problems:
            return problems
    for u, v in _subset_pairs(site, rng):
        both = cl(u) & cl(v)
        if both & ~cl(site.meet_sets(u, v)):
            problems.append((4, f"x ◁ {u:#x}, x ◁ {v:#x} but not x ◁ U∧V"))
            return problems
    return problems


def validate_covering(site: Site) -> None:
    problems = check_covering(site)
    if problems:
        raise InvalidCovering(*problems[0])


def down_sets(site: Site) -> list[int]:
    """All down-closed subsets, enumerated by deciding elements top-down."""
    n = len(site)
    order = sorted(range(n), key=lambda i: -sum(site.leq[:, i]))
    out: list[int] = []

    def rec(k: int, chosen: int):
        if k == n:
            out.append(chosen)
            return
        x = order[k]
        # x may be left out only if nothing above it was chosen
        above = mask_of(y for y in range(n) if y != x and site.leq[x, y])
        if not chosen & above:
            rec(k + 1, chosen)
        rec(k + 1, chosen | (1 << x))

    rec(0, 0)
    return sorted(out, key=lambda m: (bin(m).count("1"), m))


def frame_of_site(site: Site, validate: bool = True) -> FiniteLattice:
    """The frame of closure-fixed down-sets, ordered by inclusion."""
    if validate:
        validate_covering(site)
    fixed = [u for u in down_sets(site) if closure(site, u) == u]
    return FiniteLattice.of_sets(fixed)


def canonical_map(site: Site, x: int) -> int:
    return closure(site, site.down(x))


# -- continuous maps ---------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class FrameMap:
    domain: FiniteLattice
    codomain: FiniteLattice
    table: dict  # domain frame element (bitset) -> codomain frame element

    def __call__(self, u: int) -> int:
        return self.table[u]

    def preserves_structure(self) -> bool:
        d, c, f = self.domain, self.codomain, self.table
        el = d.elements
        if f[el[d.top]] != c.elements[c.top]:
            return False
        if f[el[d.bottom]] != c.elements[c.bottom]:
            return False
        for i in range(len(d)):
            for j in range(len(d)):
                mi = c.index(f[el[i]])
                mj = c.index(f[el[j]])
                if f[el[d.meet[i, j]]] != c.elements[c.meet[mi, mj]]:
                    return False
                if f[el[d.join[i, j]]] != c.elements[c.join[mi, mj]]:
                    return False
        return True


def induced_frame_map(f_star: Callable[[int], int], domain: Site, codomain: Site,
                      check: bool = True) -> FrameMap:
    """Frame map ``U ↦ closure(f*(U))`` from ``F(domain)`` to ``F(codomain)``.

    ``f_star`` sends a domain element to a bitset of codomain elements.
    Raises :class:`NotContinuous` with the index of the failed condition.
    """
    images = [f_star(x) for x in range(len(domain))]

    def image(subset: int) -> int:
        out = 0
        for x in bits(subset):
            out |= images[x]
        return out

    if check:
        everything = image(domain.full)
        if closure(codomain, everything) != codomain.full:
            raise NotContinuous(1, "f*(L) does not cover the codomain")
        for x in range(len(domain)):
            for y in range(len(domain)):
                lhs = codomain.meet_sets(images[x], images[y])
                target = closure(codomain, images[int(domain.meet[x, y])])
                if lhs & ~target:
                    raise NotContinuous(2, f"f*({x}) ∧ f*({y}) not covered by f*({x}∧{y})")
        rng = random.Random(SAMPLE_SEED)
        for u in _subsets(domain, rng):
            au = closure(domain, u)
            target = closure(codomain, image(u))
            for x in bits(au):
                if images[x] & ~target:
                    raise NotContinuous(3, f"{x} ◁ {u:#x} but f*({x}) is not covered by f*(U)")
    dom = frame_of_site(domain, validate=False)
    cod = frame_of_site(codomain, validate=False)
    table = {u: closure(codomain, image(u)) for u in dom.elements}
    fm = FrameMap(dom, cod, table)
    if check and not fm.preserves_structure():
        raise NotContinuous(0, "induced map is not a frame homomorphism")
    return fm


# -- interval domain -------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class IntervalSite:
    """Rational intervals ``(p, q)`` with endpoints on a finite grid, plus ``⊥``.

    Element 0 is ``⊥``; the others are ``(p, q)`` with ``p < q``, ordered by
    inclusion.
    """

    grid: tuple

    @functools.cached_property
    def elements(self) -> tuple:
        pairs = [(p, q) for p, q in itertools.combinations(self.grid, 2)]
        return (None,) + tuple(pairs)

    @functools.cached_property
    def refined(self) -> tuple:
        pts = set(self.grid)
        for p, q in zip(self.grid, self.grid[1:]):
            pts.add(p + (q - p) / 3)
            pts.add(p + 2 * (q - p) / 3)
        return tuple(sorted(pts))

    @functools.cached_property
    def probes(self) -> tuple:
        """Per element, the refined-grid subintervals that a cover must contain."""
        out = []
        for el in self.elements:
            if el is None:
                out.append(())
                continue
            inner = [t for t in self.refined if el[0] < t < el[1]]
            out.append(tuple(itertools.combinations(inner, 2)))
        return tuple(out)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, p, q) -> int:
        return self.elements.index((Fraction(p), Fraction(q)))

    def leq_elem(self, x, y) -> bool:
        if x is None:
            return True
        if y is None:
            return False
        return y[0] <= x[0] and x[1] <= y[1]

    def meet_elem(self, x, y):
        if x is None or y is None:
            return None
        lo, hi = max(x[0], y[0]), min(x[1], y[1])
        return (lo, hi) if lo < hi else None

    def site(self) -> Site:
        el = self.elements
        n = len(el)
        leq = np.array([[self.leq_elem(el[i], el[j]) for j in range(n)] for i in range(n)])
        meet = np.array([[el.index(self.meet_elem(el[i], el[j])) for j in range(n)] for i in range(n)])
        return Site(el, leq, meet, lambda x, u: interval_cover(self, x, u), "interval")


def interval_site(grid: Iterable) -> IntervalSite:
    g = tuple(sorted({Fraction(x) for x in grid}))
    if len(g) < 2:
        raise ValueError("interval grid needs at least two points")
    return IntervalSite(g)


def interval_cover(site: IntervalSite, x: int, subset: int) -> bool:
    """``(p,q) ◀ U``: every ``p < p' < q' < q`` from the refined grid fits inside a member."""
    el = site.elements
    if el[x] is None:
        return True
    members = [el[k] for k in bits(subset) if el[k] is not None]
    return all(any(a <= p1 and q1 <= b for a, b in members) for p1, q1 in site.probes[x])

"""Points of the spectrum on a finite context poset, and Kochen-Specker search.

A point picks one atom in every context such that whenever ``C <= D`` the
atom chosen in ``D`` lies under the atom chosen in ``C``.  The search is a
deterministic backtracking with forward propagation over comparable pairs.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Optional, Sequence


from . import contexts as ctx_mod
from . import linalg
from .contexts import Context, ContextPoset


class IncompleteChoice(ValueError):
    pass


class InvalidConfiguration(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class KSCertificate:
    point: Optional[tuple[int, ...]]
    nodes: int
    dead_ends: int
    contexts: int
    order: tuple[int, ...]
    exhaustive: bool

    @property
    def verdict(self) -> str:
        return "point_found" if self.point is not None else "no_point"

    def to_json(self, poset: Optional[ContextPoset] = None) -> dict:
        out = {
            "verdict": self.verdict,
            "stats": {
                "nodes_visited": self.nodes,
                "dead_ends": self.dead_ends,
                "contexts": self.contexts,
                "exhaustive": self.exhaustive,
            },
            "search_order": list(self.order),
        }
        if self.point is not None:
            if poset is None:
                out["point"] = list(self.point)
            else:
                out["point"] = {c.label: self.point[i] for i, c in enumerate(poset.contexts)}
        return out


def _compatibility(poset: ContextPoset):
    """For each comparable pair ``c < d``: parent index in ``c`` of each ``d`` atom."""
    return {
        (c, d): poset.parent_map(c, d)
        for c in range(len(poset)) for d in poset.up(c) if c != d
    }


def find_point(poset: ContextPoset) -> KSCertificate:
    n = len(poset)
    links = _compatibility(poset)
    neighbours: list[list[int]] = [[] for _ in range(n)]
    for c, d in links:
        neighbours[c].append(d)
        neighbours[d].append(c)
    order = tuple(sorted(range(n), key=lambda i: (-len(neighbours[i]), i)))
    domains = [set(range(poset.contexts[i].size)) for i in range(n)]
    stats = {"nodes": 0, "dead": 0}

    def allowed(c: int, d: int, dom_c: set, dom_d: set) -> tuple[set, set]:
        parents = links[c, d]
        new_d = {q for q in dom_d if parents[q] in dom_c}
        new_c = {p for p in dom_c if any(parents[q] == p for q in new_d)}
        return new_c, new_d

    def propagate(doms: list[set], start: int) -> bool:
        queue = [start]
        while queue:
            x = queue.pop()
            for y in neighbours[x]:
                c, d = (x, y) if (x, y) in links else (y, x)
                new_c, new_d = allowed(c, d, doms[c], doms[d])
                for k, new in ((c, new_c), (d, new_d)):
                    if new != doms[k]:
                        if not new:
                            return False
                        doms[k] = new
                        queue.append(k)
        return True

    def search(doms: list[set], k: int) -> Optional[list[set]]:
        while k < n and len(doms[order[k]]) == 1:
            k += 1
        if k == n:
            return doms
        x = order[k]
        for atom in sorted(doms[x]):
            stats["nodes"] += 1
            trial = [set(d) for d in doms]
            trial[x] = {atom}
            if propagate(trial, x):
                found = search(trial, k + 1)
                if found is not None:
                    return found
            else:
                stats["dead"] += 1
        return None

    initial = [set(d) for d in domains]
    ok = all(propagate(initial, i) for i in range(n))
    result = search(initial, 0) if ok else None
    point = tuple(min(d) for d in result) if result is not None else None
    return KSCertificate(point, stats["nodes"], stats["dead"], n, order, True)


def verify_point(poset: ContextPoset, choice: Sequence[int]) -> bool:
    if len(choice) != len(poset):
        raise IncompleteChoice(f"need a choice for each of {len(poset)} contexts")
    for i, c in enumerate(poset.contexts):
        if not 0 <= choice[i] < c.size:
            raise IncompleteChoice(f"choice at {c.label!r} is not an atom index")
    for c in range(len(poset)):
        for d in poset.up(c):
            if poset.parent_map(c, d)[choice[d]] != choice[c]:
                return False
    return True


# -- configurations --------------------------------------------------------

def load_configuration(source) -> tuple[int, list[Context]]:
    """Read ``{"dim": n, "bases": [[vector, ...], ...]}``; each basis becomes a context."""
    if isinstance(source, (str, Path)):
        obj = json.loads(Path(source).read_text())
    else:
        obj = source
    dim = int(obj["dim"])
    out = []
    for k, basis in enumerate(obj["bases"]):
        vectors = [linalg.vector_from_json(v) for v in basis]
        if len(vectors) != dim or any(v.shape != (dim,) for v in vectors):
            raise InvalidConfiguration(f"basis {k} does not have {dim} vectors of length {dim}")
        label = obj.get("labels", [None] * len(obj["bases"]))[k] or f"B{k}"
        try:
            out.append(ctx_mod.context_from_basis(vectors, label))
        except ctx_mod.InvalidContext as e:
            raise InvalidConfiguration(f"basis {k}: {e}") from e
    return dim, out


def bundled_configuration(name: str = "cabello18") -> Path:
    return Path(__file__).parent / "data" / f"{name}.json"


def shared_atoms_have_common_subcontext(poset: ContextPoset) -> bool:
    """Any rank-one atom shared by two contexts is an atom of a common lower context."""
    eps = linalg.tol().context
    n = len(poset)
    for i in range(n):
        for j in range(i + 1, n):
            for p in poset.contexts[i].atoms:
                if linalg.rank(p) != 1:
                    continue
                if not any(linalg.norm(p - q) < eps for q in poset.contexts[j].atoms):
                    continue
                common = [k for k in range(n) if poset.leq[k, i] and poset.leq[k, j]]
                if not any(
                    any(linalg.norm(p - r) < eps for r in poset.contexts[k].atoms) for k in common
                ):
                    return False
    return True

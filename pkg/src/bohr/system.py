"""Loading system descriptions (observables, states, contexts) from JSON."""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Optional

import numpy as np

from . import contexts, linalg
from .contexts import Context, ContextPoset
from .states import State


class SchemaError(ValueError):
    pass


@dataclasses.dataclass
class SystemDescription:
    dim: int
    observables: dict
    states: dict
    contexts: list  # explicit Context list, or empty when generated
    generate: bool = True
    options: dict = dataclasses.field(default_factory=dict)

    def generators(self) -> list[Context]:
        if not self.generate:
            return list(self.contexts)
        return [contexts.context_of(a, name) for name, a in self.observables.items()]

    def poset(self, cap: Optional[int] = None) -> ContextPoset:
        gens = self.generators() or [contexts.trivial_context(self.dim)]
        cap = cap or int(self.options.get("poset_cap", contexts.DEFAULT_POSET_CAP))
        return contexts.build_poset(gens, cap=cap)

    def observable(self, name: str) -> np.ndarray:
        try:
            return self.observables[name]
        except KeyError:
            raise SchemaError(f"unknown observable {name!r}") from None

    def state(self, name: str) -> State:
        try:
            return self.states[name]
        except KeyError:
            raise SchemaError(f"unknown state {name!r}") from None


def _state_from_json(obj) -> State:
    if isinstance(obj, dict):
        if "vector" in obj:
            return State.pure(linalg.vector_from_json(obj["vector"]))
        if "density" in obj:
            return State(linalg.matrix_from_json(obj["density"]))
        if "entries" in obj:
            return State(linalg.matrix_from_json(obj))
        raise SchemaError("state needs 'vector' or 'density'")
    arr = obj
    if arr and isinstance(arr[0], list) and arr[0] and isinstance(arr[0][0], list):
        return State(linalg.matrix_from_json(arr))
    if arr and isinstance(arr[0], list) and len(arr[0]) == 2 and not isinstance(arr[0][0], list):
        # ambiguous between a vector of [re, im] pairs and a 2x2 real matrix
        raise SchemaError("write states as {'vector': ...} or {'density': ...}")
    return State.pure(linalg.vector_from_json(arr))


def system_from_json(obj: dict) -> SystemDescription:
    try:
        dim = int(obj["dim"])
    except (KeyError, TypeError, ValueError):
        raise SchemaError("system needs an integer 'dim'") from None
    try:
        observables = {}
        for name, m in (obj.get("observables") or {}).items():
            a = linalg.hermitian(linalg.matrix_from_json(m))
            if a.shape[0] != dim:
                raise SchemaError(f"observable {name!r} has dim {a.shape[0]}, expected {dim}")
            observables[name] = a
        states = {}
        for name, s in (obj.get("states") or {}).items():
            st = _state_from_json(s)
            if st.dim != dim:
                raise SchemaError(f"state {name!r} has dim {st.dim}, expected {dim}")
            states[name] = st
        ctx_field = obj.get("contexts", "generate")
        explicit: list[Context] = []
        generate = ctx_field == "generate"
        if not generate:
            if not isinstance(ctx_field, list):
                raise SchemaError("'contexts' must be 'generate' or a list")
            explicit = [contexts.context_from_json(c) for c in ctx_field]
            labels = [c.label for c in explicit]
            if len(set(labels)) != len(labels):
                raise SchemaError("context labels must be unique")
            if any(c.dim != dim for c in explicit):
                raise SchemaError("context dimension mismatch")
    except SchemaError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise SchemaError(str(e)) from e
    return SystemDescription(dim, observables, states, explicit, generate, dict(obj.get("options") or {}))


def load_system(path) -> SystemDescription:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"cannot read system file {path}: {e}") from e
    return system_from_json(obj)

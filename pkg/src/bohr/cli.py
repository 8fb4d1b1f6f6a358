"""``bohr`` command line interface.

JSON goes to stdout (or ``--out``); human-readable tables go to stderr.
Exit codes: 0 success, 2 input error, 3 Kochen-Specker contradiction,
4 numeric boundary warning under ``--strict``.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from . import contexts, daseinisation, frames, ks, linalg, spectrum, states
from .linalg import RationalInterval
from .system import SchemaError, load_system

EXIT_OK, EXIT_INPUT, EXIT_NO_POINT, EXIT_BOUNDARY = 0, 2, 3, 4


class InputError(Exception):
    pass


def _meta(command: str) -> dict:
    return {
        "command": command,
        "seed": contexts._seed(),
        "tolerances": dataclasses.asdict(linalg.tol()),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def _emit(args, payload: dict) -> None:
    text = dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_dot(args, dot: str) -> None:
    if args.dot:
        Path(args.dot).write_text(dot)


def _info(text: str) -> None:
    sys.stderr.write(text.rstrip("\n") + "\n")


def _context_index(poset, label: Optional[str]) -> int:
    if label is None:
        return poset.bottom
    try:
        return poset.index(label)
    except KeyError:
        raise InputError(f"no context labelled {label!r}; known: {[c.label for c in poset.contexts]}")


def _interval(text: str) -> RationalInterval:
    try:
        return RationalInterval.parse(text)
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"bad interval {text!r}: {e}")


def _poset_json(poset) -> dict:
    return {
        "contexts": [
            {"index": i, "label": c.label, "ranks": list(c.ranks),
             "atoms": [linalg.matrix_to_json(p) for p in c.atoms]}
            for i, c in enumerate(poset.contexts)
        ],
        "bottom": poset.bottom,
        "hasse": [[poset.contexts[i].label, poset.contexts[j].label] for i, j in poset.hasse_edges()],
    }


def cmd_poset(args) -> int:
    sysd = load_system(args.system)
    poset = sysd.poset(args.cap)
    _emit(args, {"meta": _meta("poset"), "poset": _poset_json(poset)})
    _write_dot(args, poset.to_dot())
    for i, j in poset.hasse_edges():
        _info(f"{poset.contexts[i].label} < {poset.contexts[j].label}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    sysd = load_system(args.system)
    poset = sysd.poset(args.cap)
    payload = {
        "meta": _meta("spectrum"),
        "contexts": [
            {"label": c.label, "atoms": c.size, "lattice_size": 1 << c.size}
            for c in poset.contexts
        ],
    }
    if args.enumerate:
        opens = list(spectrum.enumerate_opens(poset, limit=args.limit + 1))
        payload["opens_count"] = len(opens) if len(opens) <= args.limit else None
        payload["opens"] = [u.to_json()["values"] for u in opens[: args.limit]]
    if args.base is not None:
        d = _context_index(poset, args.base)
        u = spectrum.pi_sigma_star(poset, d)
        payload["pi_sigma_star"] = {"base": args.base, **u.to_json()}
        _info(u.table())
    _emit(args, payload)
    _write_dot(args, poset.to_dot())
    return EXIT_OK


def cmd_daseinise(args) -> int:
    sysd = load_system(args.system)
    poset = sysd.poset(args.cap)
    a = sysd.observable(args.observable)
    iv = _interval(args.interval)
    u = daseinisation.daseinise(a, iv, poset)
    profs = daseinisation.profiles(a, poset)
    payload = {
        "meta": _meta("daseinise"),
        "observable": args.observable,
        "interval": str(iv),
        **u.to_json(),
        "profiles": {
            poset.contexts[p.context].label: {"inner": list(p.inner), "outer": list(p.outer)}
            for p in profs
        },
    }
    _emit(args, payload)
    _write_dot(args, poset.to_dot(i for i, v in enumerate(u.values) if v))
    _info(u.table())
    return EXIT_OK


def cmd_pair(args) -> int:
    sysd = load_system(args.system)
    poset = sysd.poset(args.cap)
    a = sysd.observable(args.observable)
    rho = sysd.state(args.state)
    iv = _interval(args.interval)
    base = _context_index(poset, args.base)
    truth = states.pair(a, iv, rho, poset, base)
    members = sorted(truth.members)
    payload = {
        "meta": _meta("pair"),
        "observable": args.observable,
        "interval": str(iv),
        "state": args.state,
        "base": poset.contexts[base].label,
        "members": [poset.contexts[m].label for m in members],
    }
    _emit(args, payload)
    _write_dot(args, poset.to_dot(members))
    for i, c in enumerate(poset.contexts):
        if poset.leq[base, i]:
            _info(f"{c.label:>20}  {'*' if i in truth.members else '.'}")
    return EXIT_OK


def cmd_ks(args) -> int:
    if args.config:
        try:
            _, gens = ks.load_configuration(args.config)
        except (OSError, json.JSONDecodeError, KeyError, ks.InvalidConfiguration) as e:
            raise InputError(f"cannot load configuration: {e}")
        poset = contexts.build_poset(gens, cap=args.cap or contexts.DEFAULT_POSET_CAP)
    elif args.system:
        poset = load_system(args.system).poset(args.cap)
    else:
        raise InputError("ks needs --config or --system")
    cert = ks.find_point(poset)
    _emit(args, {"meta": _meta("ks"), **cert.to_json(poset)})
    _write_dot(args, poset.to_dot())
    _info(f"{cert.verdict}: {cert.nodes} nodes, {cert.dead_ends} dead ends, {cert.contexts} contexts")
    return EXIT_OK if cert.point is not None else EXIT_NO_POINT


def _load_site(path):
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read site file {path}: {e}")
    if "interval_grid" in obj:
        return frames.interval_site(obj["interval_grid"]).site()
    try:
        elements = obj["elements"]
        lattice = frames.FiniteLattice.from_pairs(elements, [tuple(p) for p in obj.get("leq", [])])
    except (KeyError, frames.NotALattice) as e:
        raise InputError(f"bad site lattice: {e}")
    cover = obj.get("cover", "join-cover")
    if cover == "join-cover":
        return frames.join_cover_site(lattice)
    try:
        pairs = [(int(x), frames.mask_of(u)) for x, u in cover]
    except (TypeError, ValueError):
        raise InputError("explicit cover must be a list of [element, [elements]] pairs")
    return frames.explicit_cover_site(lattice, pairs)


def cmd_frame(args) -> int:
    site = _load_site(args.site)
    try:
        frame = frames.frame_of_site(site)
    except frames.InvalidCovering as e:
        raise InputError(str(e))
    payload = {
        "meta": _meta("frame"),
        "site_size": len(site),
        "frame": {
            **frame.to_json(),
            "elements": [[frames._jsonable(site.elements[i]) for i in frames.bits(u)] for u in frame.elements],
        },
    }
    _emit(args, payload)
    _write_dot(args, frame.to_dot("frame"))
    _info(f"frame with {len(frame)} elements over a site of {len(site)}")
    return EXIT_OK


TOLERANCE_NAMES = [f.name for f in dataclasses.fields(linalg.Tolerances)]


def _parse_tolerance(text: str) -> tuple[str, float]:
    name, _, value = text.partition("=")
    if name not in TOLERANCE_NAMES or not value:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME in {TOLERANCE_NAMES}")
    return name, float(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bohr", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--dot", help="write a DOT Hasse diagram here")
    common.add_argument("--strict", action="store_true", help="exit 4 on numeric boundary warnings")
    common.add_argument("--cap", type=int, default=None, help="poset size cap")
    common.add_argument("--tolerance", action="append", type=_parse_tolerance, default=[],
                        metavar="NAME=VALUE")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("poset", parents=[common], help="build the context poset")
    p.add_argument("--system", required=True)
    p.set_defaults(func=cmd_poset)

    p = sub.add_parser("spectrum", parents=[common], help="describe the spectrum lattices")
    p.add_argument("--system", required=True)
    p.add_argument("--base", help="context label for the image of its principal upper set")
    p.add_argument("--enumerate", action="store_true", help="list all spectral opens")
    p.add_argument("--limit", type=int, default=1000)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("daseinise", parents=[common], help="spectral open of a ∈ (r,s)")
    p.add_argument("--system", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--interval", required=True, help="r,s with -inf/inf allowed")
    p.set_defaults(func=cmd_daseinise)

    p = sub.add_parser("pair", parents=[common], help="truth value of a ∈ (r,s) in a state")
    p.add_argument("--system", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--interval", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--base", help="context label (default: the trivial context)")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("ks", parents=[common], help="search for a point of the spectrum")
    p.add_argument("--config", help="KS configuration JSON (dim + bases)")
    p.add_argument("--system")
    p.set_defaults(func=cmd_ks)

    p = sub.add_parser("frame", parents=[common], help="frame presented by a finite site")
    p.add_argument("--site", required=True)
    p.set_defaults(func=cmd_frame)
    return parser


def _attach_intervals(argv: Sequence[str]) -> list[str]:
    """Glue ``--interval -1/2,1`` into one token so argparse does not read it as a flag."""
    out, it = [], iter(argv)
    for token in it:
        if token == "--interval":
            value = next(it, None)
            out.append(token if value is None else f"--interval={value}")
        else:
            out.append(token)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _attach_intervals(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    overrides = dict(args.tolerance)
    with linalg.using_tolerances(**overrides), warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            code = args.func(args)
        except (InputError, SchemaError, linalg.LinalgError, contexts.InvalidContext,
                contexts.PosetTooLarge, spectrum.NotInContext) as e:
            _info(f"error: {e}")
            return EXIT_INPUT
    boundary = [w for w in caught
                if issubclass(w.category, (daseinisation.BoundaryWarning, states.NearMissWarning))]
    for w in boundary:
        _info(f"warning: {w.message}")
    if boundary and args.strict and code == EXIT_OK:
        return EXIT_BOUNDARY
    return code


if __name__ == "__main__":
    sys.exit(main())

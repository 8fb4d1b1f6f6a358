import itertools
import json
import time

import numpy as np
import pytest

from bohr import contexts, ks, spectrum
from bohr.contexts import context_of

from conftest import SX, SZ, brute_force_points, random_context


@pytest.fixture(scope="module")
def cabello():
    dim, gens = ks.load_configuration(ks.bundled_configuration())
    return dim, gens


def test_chain_has_points():
    poset = contexts.build_poset([context_of(np.diag([1.0, 2.0, 3.0]), "C")])
    cert = ks.find_point(poset)
    assert cert.verdict == "point_found"
    assert ks.verify_point(poset, cert.point)
    assert len(brute_force_points(poset)) == 3


def test_vee_has_four_points(vee):
    cert = ks.find_point(vee)
    assert ks.verify_point(vee, cert.point)
    assert len(brute_force_points(vee)) == 4


def test_cabello_configuration_has_no_point(cabello):
    dim, gens = cabello
    assert dim == 4 and len(gens) == 9
    rays = {}
    for g in gens:
        for p in g.atoms:
            key = tuple(np.round(p, 6).reshape(-1))
            rays[key] = rays.get(key, 0) + 1
    assert len(rays) == 18 and set(rays.values()) == {2}
    poset = contexts.build_poset(gens)
    start = time.perf_counter()
    cert = ks.find_point(poset)
    assert time.perf_counter() - start < 10
    assert cert.verdict == "no_point" and cert.exhaustive and cert.point is None


def test_dropping_a_basis_restores_points(cabello):
    _, gens = cabello
    for k in range(len(gens)):
        poset = contexts.build_poset(gens[:k] + gens[k + 1:])
        cert = ks.find_point(poset)
        assert cert.verdict == "point_found"
        assert ks.verify_point(poset, cert.point)


def small_posets(cabello_gens, rng):
    for combo in itertools.combinations(range(9), 2):
        yield contexts.build_poset([cabello_gens[i] for i in combo])
    for _ in range(10):
        n = int(rng.integers(2, 4))
        yield contexts.build_poset([random_context(rng, n) for _ in range(int(rng.integers(1, 4)))])
    yield contexts.build_poset([context_of(SZ), context_of(SX)])


def test_search_agrees_with_brute_force(cabello, rng):
    checked = 0
    for poset in small_posets(cabello[1], rng):
        if len(poset) > 10 or max(c.size for c in poset.contexts) > 4:
            continue
        cert = ks.find_point(poset)
        points = brute_force_points(poset)
        assert (cert.point is not None) == bool(points)
        if cert.point is not None:
            assert cert.point in points
        checked += 1
    assert checked >= 20


def test_verify_point_cases():
    fine = context_of(np.diag([1.0, 2.0, 3.0]), "F")
    coarse = context_of(np.diag([1.0, 1.0, 3.0]), "G")
    poset = contexts.build_poset([coarse, fine])
    f, g = poset.index("F"), poset.index("G")
    choice = [0] * len(poset)
    choice[g] = coarse.ranks.index(2)
    # pick the fine atom e3, which is not under the rank-2 coarse atom
    e3 = next(i for i, p in enumerate(fine.atoms) if p[2, 2].real > 0.5)
    choice[f] = e3
    assert not ks.verify_point(poset, choice)
    single = contexts.build_poset([contexts.trivial_context(2)])
    assert ks.verify_point(single, [0])
    with pytest.raises(ks.IncompleteChoice):
        ks.verify_point(poset, [0])
    with pytest.raises(ks.IncompleteChoice):
        ks.verify_point(poset, [0, 0, 7])


def test_shared_atoms_have_common_subcontext(cabello):
    poset = contexts.build_poset(cabello[1])
    assert ks.shared_atoms_have_common_subcontext(poset)


def test_points_are_consistent_with_generators(cabello, rng):
    poset = contexts.build_poset(cabello[1][:5])
    cert = ks.find_point(poset)
    point = cert.point
    for c, ctx in enumerate(poset.contexts):
        coef = rng.integers(-2, 3, size=ctx.size)
        a = sum(float(k) * p for k, p in zip(coef, ctx.atoms))
        d_a = spectrum.generator(ctx, a)
        truth = bool(d_a >> point[c] & 1)
        assert truth == (coef[point[c]] > 0)
        for d in poset.up(c):
            image = spectrum.embed_mask(poset, d_a, c, d)
            assert bool(image >> point[d] & 1) == truth
            # the same observable read in the finer context
            assert bool(spectrum.generator(poset.contexts[d], a) >> point[d] & 1) == truth


def test_load_configuration_errors(tmp_path):
    with pytest.raises(ks.InvalidConfiguration):
        ks.load_configuration({"dim": 2, "bases": [[[1, 0]]]})
    with pytest.raises(ks.InvalidConfiguration):
        ks.load_configuration({"dim": 2, "bases": [[[1, 0], [1, 1]]]})
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"dim": 2, "bases": [[[1, 0], [0, 1]]], "labels": ["Z"]}))
    dim, gens = ks.load_configuration(path)
    assert dim == 2 and gens[0].label == "Z"


def test_certificate_json(vee):
    out = ks.find_point(vee).to_json(vee)
    assert out["verdict"] == "point_found"
    assert set(out["point"]) == {"1", "Cz", "Cx"}
    assert out["stats"]["contexts"] == 3

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohr import linalg
from bohr.linalg import RationalInterval

from conftest import SX, SZ, random_hermitian

INF = math.inf


def test_eigen_diagonal():
    dec = linalg.eigen(np.diag([0.0, 1.0]))
    assert np.allclose(dec.values, [0, 1])
    assert np.allclose(abs(dec.vectors), np.eye(2))


def test_eigen_sigma_x():
    # characteristic polynomial λ² − 1
    assert np.allclose(linalg.eigen(SX).values, [-1, 1])


def test_eigen_identity():
    assert np.allclose(linalg.eigen(np.eye(3)).values, [1, 1, 1])


def test_eigen_rejects_non_hermitian():
    with pytest.raises(linalg.NonHermitianInput):
        linalg.eigen([[0, 1], [0, 0]])


def test_eigen_reconstruction(rng):
    for n in range(1, 7):
        a = random_hermitian(rng, n)
        dec = linalg.eigen(a)
        rebuilt = dec.vectors @ np.diag(dec.values) @ dec.vectors.conj().T
        assert linalg.norm(rebuilt - a) <= 1e-9 * linalg.norm(a)
        assert np.allclose(dec.vectors.conj().T @ dec.vectors, np.eye(n), atol=1e-9)
        assert np.all(np.diff(dec.values) >= 0)


@pytest.mark.parametrize(
    "a, iv, expected",
    [
        (np.diag([0.0, 1.0]), RationalInterval.make("1/2", "inf"), np.diag([0.0, 1.0])),
        (np.diag([0.0, 1.0]), RationalInterval.make(-1, 2), np.eye(2)),
        (SX, RationalInterval.make(0, "inf"), 0.5 * np.ones((2, 2))),
    ],
)
def test_spectral_projection_examples(a, iv, expected):
    assert np.allclose(linalg.spectral_projection(a, iv), expected)


def test_spectral_projection_partitions(rng):
    for n in range(1, 7):
        a = random_hermitian(rng, n)
        assert np.allclose(linalg.spectral_projection(a, RationalInterval(-INF, INF)), np.eye(n))
        # split points chosen away from the spectrum
        w = np.linalg.eigvalsh(a)
        cut = Fraction((w[0] + w[-1]) / 2)
        while min(abs(w - float(cut))) < 1e-6:
            cut += Fraction(1, 1000)
        lo = linalg.spectral_projection(a, RationalInterval(-INF, cut))
        hi = linalg.spectral_projection(a, RationalInterval(cut, INF))
        assert np.allclose(lo @ hi, 0, atol=1e-9)
        assert np.allclose(lo + hi, np.eye(n), atol=1e-9)
        assert np.allclose(lo @ a, a @ lo, atol=1e-9)


def test_positive_order_examples():
    assert linalg.is_positive_leq(np.zeros((2, 2)), np.eye(2))
    assert not linalg.is_positive_leq(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))
    # the spectrum of 1 − σ_x is {0, 2}
    assert linalg.is_positive_leq(SX, np.eye(2))


def test_positive_order_dimension_mismatch():
    with pytest.raises(linalg.DimensionMismatch):
        linalg.is_positive_leq(np.eye(2), np.eye(3))


def hermitians(n):
    entries = st.floats(-3, 3, allow_nan=False).map(lambda x: round(x, 3))
    return st.lists(entries, min_size=2 * n * n, max_size=2 * n * n).map(
        lambda xs: _to_herm(np.array(xs), n)
    )


def _to_herm(xs, n):
    m = xs[: n * n].reshape(n, n) + 1j * xs[n * n:].reshape(n, n)
    return (m + m.conj().T) / 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(hermitians(n), hermitians(n), hermitians(n))))
def test_positive_order_is_preorder(triple):
    a, b, c = triple
    assert linalg.is_positive_leq(a, a)
    # make a chain a <= a + pp* <= a + pp* + qq*
    b2 = a + b @ b.conj().T
    c2 = b2 + c @ c.conj().T
    assert linalg.is_positive_leq(a, b2) and linalg.is_positive_leq(b2, c2)
    assert linalg.is_positive_leq(a, c2)


def test_compress_examples():
    a = np.array([[2.0, 1j], [-1j, 3.0]])
    c = linalg.compress(a, np.eye(2))
    assert np.allclose(np.linalg.eigvalsh(c), np.linalg.eigvalsh(a))
    # e₁* σ_x e₁ = 0
    assert np.allclose(linalg.compress(SX, np.diag([1.0, 0.0])), [[0]])
    assert np.allclose(linalg.compress(np.diag([2.0, 3.0]), np.diag([0.0, 1.0])), [[3]])


def test_compress_zero_rank():
    with pytest.raises(linalg.ZeroRankProjection):
        linalg.compress(SZ, np.zeros((2, 2)))


def test_compress_eigenvalues_within_range(rng):
    for _ in range(50):
        n = int(rng.integers(2, 6))
        a = random_hermitian(rng, n)
        p = linalg.spectral_projection(random_hermitian(rng, n), RationalInterval(0, INF))
        if linalg.rank(p) == 0:
            continue
        w = np.linalg.eigvalsh(linalg.compress(a, p))
        lo, hi = np.linalg.eigvalsh(a)[[0, -1]]
        assert w[0] >= lo - 1e-9 and w[-1] <= hi + 1e-9


def test_clustering_merges_roundoff():
    a = np.diag([1.0, 1.0 + 1e-12, 2.0])
    parts = linalg.spectral_decomposition(a)
    assert [linalg.rank(p) for _, p in parts] == [2, 1]


def test_matrix_json_round_trip(rng):
    a = random_hermitian(rng, 3) / 7
    text = json.dumps(linalg.matrix_to_json(a))
    b = linalg.matrix_from_json(json.loads(text))
    assert np.array_equal(a, b)
    assert json.dumps(linalg.matrix_to_json(b)) == text


def test_matrix_json_accepts_fractions_and_reals():
    m = linalg.matrix_from_json([["1/2", 0], [0, [0.5, 0]]])
    assert np.allclose(m, np.diag([0.5, 0.5]))


def test_interval_parse():
    iv = RationalInterval.parse("-inf,1/3")
    assert iv.lo == -INF and iv.hi == Fraction(1, 3)
    assert str(iv) == "(-inf,1/3)"
    with pytest.raises(ValueError):
        RationalInterval.parse("2,1")


def test_tolerance_override():
    with linalg.using_tolerances(order=0.5):
        assert linalg.is_positive_leq(np.eye(2), np.eye(2) * 0.6)
    assert not linalg.is_positive_leq(np.eye(2), np.eye(2) * 0.6)

import numpy as np
import pytest

from bohr import contexts

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)

ACCEPTANCE_RESULTS = {}


def random_hermitian(rng, n, scale=1.0):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (x + x.conj().T) / 2


def random_unitary(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(x)
    return q * (np.diag(r) / abs(np.diag(r)))


def random_state(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def random_context(rng, n, label="", min_atoms=1):
    """Random context: a random unitary basis grouped into random blocks."""
    u = random_unitary(rng, n)
    k = int(rng.integers(min(min_atoms, n), n + 1))
    cuts = sorted(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else []
    groups = np.split(np.arange(n), cuts)
    atoms = tuple(u[:, g] @ u[:, g].conj().T for g in groups)
    return contexts.Context(atoms, label)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def vee():
    """Trivial context below the incomparable contexts of σ_z and σ_x."""
    return contexts.build_poset([contexts.context_of(SZ, "Cz"), contexts.context_of(SX, "Cx")])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, text = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {text}")


def open_array(opens):
    return np.array([u.values for u in opens], dtype=np.int64).reshape(len(opens), -1)


def heyting_failures(poset, opens, pairs=None):
    """Check adjunction and distributivity for every x against each (y, z) pair.

    Returns a list of failure descriptions (empty when all laws hold).
    """
    from bohr import spectrum

    vals = open_array(opens)
    n = len(opens)
    pairs = pairs if pairs is not None else [(i, j) for i in range(n) for j in range(n)]
    failures = []
    for i, j in pairs:
        y, z = vals[i], vals[j]
        imp = np.array(spectrum.implication_values(poset, tuple(y), tuple(z)), dtype=np.int64)
        left = ((vals & ~imp) == 0).all(axis=1)
        right = ((vals & y & ~z) == 0).all(axis=1)
        if (left != right).any():
            failures.append(f"adjunction fails for y={i}, z={j}")
        if ((vals & (y | z)) != ((vals & y) | (vals & z))).any():
            failures.append(f"distributivity fails for y={i}, z={j}")
    return failures


def extremal_oracle(a, p, iters=80):
    """Inner and outer bounds of ``a`` at projection ``p`` by bisection on the order.

    The inner bound is the largest λ with λp − M(1−p) ≤ a; the outer bound the
    smallest μ with a ≤ μp + M(1−p), where M = 10⁶‖a‖.
    """
    from bohr import linalg

    n = a.shape[0]
    big = 1e6 * max(np.linalg.norm(a), 1e-12)
    rest = np.eye(n) - p
    w = np.linalg.eigvalsh(a)
    lo, hi = w[0] - 1.0, w[-1] + 1.0

    a_lo, a_hi = lo, hi
    for _ in range(iters):
        mid = (a_lo + a_hi) / 2
        if linalg.is_positive_leq(mid * p - big * rest, a):
            a_lo = mid
        else:
            a_hi = mid
    b_lo, b_hi = lo, hi
    for _ in range(iters):
        mid = (b_lo + b_hi) / 2
        if linalg.is_positive_leq(a, mid * p + big * rest):
            b_hi = mid
        else:
            b_lo = mid
    return a_lo, b_hi


def brute_force_points(poset):
    """All choice functions satisfying naturality, tested on the projectors themselves."""
    import itertools

    n = len(poset)
    ok = {}
    for c in range(n):
        for d in range(n):
            if c != d and poset.leq[c, d]:
                pc, pd = poset.contexts[c].atoms, poset.contexts[d].atoms
                ok[c, d] = [[np.linalg.norm(p @ q - q) < 1e-7 for q in pd] for p in pc]
    sizes = [c.size for c in poset.contexts]
    return [
        choice for choice in itertools.product(*(range(k) for k in sizes))
        if all(tab[choice[c]][choice[d]] for (c, d), tab in ok.items())
    ]

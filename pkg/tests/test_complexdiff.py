import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levidf import hyperdual as hd
from levidf.complexdiff import (
    HermitianForm,
    is_positive_definite,
    min_eigenvalue,
    min_eigenvalue_native,
    positivity_margin,
    realify,
    schur_blocks,
    schur_positive,
    wirtinger,
)
from levidf.exprparse import eval_jet, parse


def _w(src, point, n):
    return wirtinger(eval_jet(parse(src, n), point), n)


def test_modulus_squared():
    w = _w("abs2(z1)", [0.3 + 0.2j], 1)
    assert w.dz[0] == pytest.approx(0.3 - 0.2j)
    assert w.levi[0, 0] == pytest.approx(1.0)


def test_real_part_is_pluriharmonic():
    w = _w("re(z1)", [0.7 - 0.1j], 1)
    assert w.dz[0] == pytest.approx(0.5)
    assert abs(w.levi[0, 0]) == 0.0


def test_minus_log_levi_against_closed_form_and_fd():
    w = _w("-log(1 - abs2(z1))", [0.5], 1)
    assert w.levi[0, 0].real == pytest.approx(16 / 9, rel=1e-14)
    f = hd.fd_jet(lambda zs: -hd.log(1.0 - hd.abs2(zs[0])), [0.5])
    assert wirtinger(f, 1).levi[0, 0].real == pytest.approx(16 / 9, rel=1e-6)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        wirtinger(hd.seed((0.0, 0.0), 0), 2)


def test_holomorphic_modulus_is_rank_one(rng):
    # |g|^2 with g = z1*z2 + z1^2; levi = (dg)(dg)^*
    for _ in range(10):
        p = rng.uniform(-0.7, 0.7, 2) + 1j * rng.uniform(-0.7, 0.7, 2)
        w = _w("abs2(z1*z2 + z1*z1)", p, 2)
        dg = np.array([p[1] + 2 * p[0], p[0]])
        assert np.max(np.abs(w.levi - np.outer(dg, dg.conj()))) < 1e-10


def test_constant_shift_invariance(rng):
    p = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.5, 0.5, 2)
    a = _w("log(1 + abs2(z1 - z2)) * re(z2)", p, 2)
    b = _w("log(1 + abs2(z1 - z2)) * re(z2) + 3.25", p, 2)
    assert np.array_equal(a.dz, b.dz) and np.array_equal(a.levi, b.levi)


@pytest.mark.parametrize(
    "m, expected",
    [(np.eye(2), 1.0), (np.diag([3.0, -2.0]), -2.0), (np.array([[2, 1j], [-1j, 2]]), 1.0)],
)
def test_min_eigenvalue(m, expected):
    assert min_eigenvalue(m) == pytest.approx(expected, abs=1e-14)
    assert min_eigenvalue_native(m) == pytest.approx(expected, abs=1e-14)


def test_realify_doubles_spectrum():
    m = np.array([[2, 1j], [-1j, 2]])
    lam = np.sort(np.linalg.eigvalsh(realify(m)))
    assert lam == pytest.approx([1, 1, 3, 3])


def test_hermitian_form_validation():
    with pytest.raises(ValueError):
        HermitianForm([[1, 2], [0, 1]])
    f = HermitianForm([[1, 0.5j], [-0.5j, 1]])
    assert f.dim == 2
    assert min_eigenvalue(f) == pytest.approx(0.5)


def test_schur_examples():
    assert schur_positive(np.eye(2))
    m = np.array([[1.0, 2.0], [2.0, 1.0]])
    assert not schur_positive(m)
    assert np.linalg.eigvalsh(m).min() < 0
    a, b, c = schur_blocks(np.diag([1.0, 2.0, 3.0]))
    assert c == 3.0 and a.shape == (2, 2) and not np.any(b)


def test_schur_requires_dim_two():
    with pytest.raises(ValueError):
        schur_positive(np.eye(1))


def test_margin_counts_as_not_positive():
    m = np.diag([1.0, 1e-12])
    assert positivity_margin(m) > 1e-12
    assert not is_positive_definite(m)
    assert is_positive_definite(np.eye(3))


def test_native_matches_realified(rng):
    for _ in range(200):
        k = int(rng.integers(1, 6))
        a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        m = a + a.conj().T
        assert abs(min_eigenvalue(m) - min_eigenvalue_native(m)) < 1e-10


entry = st.floats(-1.0, 1.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5).flatmap(lambda k: st.lists(entry, min_size=2 * k * k, max_size=2 * k * k)), st.floats(0, 5))
def test_schur_agrees_with_eigenvalues(values, shift):
    k = int(round((len(values) / 2) ** 0.5))
    a = np.array(values[: k * k]).reshape(k, k) + 1j * np.array(values[k * k :]).reshape(k, k)
    m = 0.5 * (a + a.conj().T) + shift * np.eye(k)
    lam = np.linalg.eigvalsh(m)[0]
    if abs(lam) < 1e-9:
        return
    assert schur_positive(m) == (lam > 0)


def test_wirtinger_levi_is_hermitian_exactly(rng):
    for _ in range(20):
        p = rng.uniform(-0.6, 0.6, 3) + 1j * rng.uniform(-0.6, 0.6, 3)
        w = _w("log(1 + abs2(z1*z2 - z3)) + re(z1) * im(z3)^2", p, 3)
        assert np.array_equal(w.levi, w.levi.conj().T)

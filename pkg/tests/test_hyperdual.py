import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levidf import hyperdual as hd
from levidf.hyperdual import Cplx, DifferentiationDomainError, Jet2, Tangent


def test_seed_coordinate_function():
    j = hd.seed((0.3, 0.1), 0)
    assert j.value == 0.3
    assert j.grad.tolist() == [1.0, 0.0]
    assert not j.hess.any()
    j = hd.seed((0.0, 0.0), 1)
    assert j.value == 0.0 and j.grad.tolist() == [0.0, 1.0]


def test_seed_index_out_of_range():
    with pytest.raises((IndexError, ValueError)):
        hd.seed((0.0, 0.0), 2)


def test_constant_lift():
    c = hd.constant(2.5, 4)
    assert c.value == 2.5 and not c.grad.any() and not c.hess.any()


def test_square():
    x = hd.seed((3.0,), 0)
    y = x * x
    assert (y.value, y.grad[0], y.hess[0, 0]) == (9.0, 6.0, 2.0)


def test_log_of_one_minus_square_against_oracle():
    x = hd.seed((0.5,), 0)
    j = hd.log(1.0 - x * x)
    assert j.value == pytest.approx(math.log(0.75), rel=1e-15)
    assert j.grad[0] == pytest.approx(-4.0 / 3.0, rel=1e-14)
    assert j.hess[0, 0] == pytest.approx(-2 / 0.75 - 1 / 0.5625, rel=1e-14)
    # central differences with Richardson, step 1e-4
    f = lambda x: math.log(1 - x * x)  # noqa: E731

    def d2(h):
        return (f(0.5 + h) - 2 * f(0.5) + f(0.5 - h)) / h**2

    rich = (4 * d2(5e-5) - d2(1e-4)) / 3
    assert j.hess[0, 0] == pytest.approx(rich, rel=1e-6)


def test_sqrt_power():
    u = Jet2(4.0, [1.0, 0.0], np.zeros((2, 2)))
    r = hd.pow_real(u, 0.5)
    assert r.value == 2.0
    assert r.grad.tolist() == [0.25, 0.0]
    assert hd.sqrt(u).grad.tolist() == [0.25, 0.0]


@pytest.mark.parametrize(
    "op, value",
    [(hd.log, 0.0), (hd.log, -1.0), (hd.sqrt, -0.5)],
)
def test_domain_errors_carry_op_and_value(op, value):
    with pytest.raises(DifferentiationDomainError) as err:
        op(hd.constant(value, 2))
    assert err.value.value == value
    assert err.value.op


def test_division_by_zero_is_domain_error():
    with pytest.raises(DifferentiationDomainError):
        hd.seed((1.0, 0.0), 0) / hd.constant(0.0, 2)


def test_exp_sin_cos_chain():
    x = hd.seed((0.7,), 0)
    e = hd.exp(2.0 * x)
    assert e.grad[0] == pytest.approx(2 * math.exp(1.4))
    assert e.hess[0, 0] == pytest.approx(4 * math.exp(1.4))
    s = hd.sin(x)
    assert s.hess[0, 0] == pytest.approx(-math.sin(0.7))
    c = hd.cos(x)
    assert c.grad[0] == pytest.approx(-math.sin(0.7))


def test_hessian_shape_checked():
    with pytest.raises(ValueError):
        Jet2(0.0, [1.0, 2.0], np.zeros((3, 3)))


def test_tangent_directional_derivative():
    # d/ds of exp(x + s) at s=0 carries the full jet of exp(x)
    x = hd.seed((0.2,), 0)
    out = hd.exp(Tangent(x, hd.constant(1.0, 1)))
    assert out.a.value == pytest.approx(math.exp(0.2))
    assert out.b.value == pytest.approx(math.exp(0.2))
    assert out.b.hess[0, 0] == pytest.approx(math.exp(0.2))


def test_cplx_arithmetic_matches_complex():
    a, b = Cplx(0.3, -0.4), Cplx(1.2, 0.5)
    for got, want in [
        (a * b, (0.3 - 0.4j) * (1.2 + 0.5j)),
        (a / b, (0.3 - 0.4j) / (1.2 + 0.5j)),
        (a - b, (0.3 - 0.4j) - (1.2 + 0.5j)),
        (a.conj(), 0.3 + 0.4j),
        (hd.exp(a), complex(np.exp(0.3 - 0.4j))),
    ]:
        assert complex(float(got.re), float(got.imag())) == pytest.approx(want, abs=1e-15)
    assert a.abs2() == pytest.approx(0.25)


def test_cplx_log_requires_real():
    with pytest.raises(DifferentiationDomainError):
        hd.log(Cplx(1.0, 0.5))


def _field(zs):
    z1, z2 = zs
    return hd.log(1.0 + hd.abs2(z1 * z2 - 0.3)) + (z1.conj() * z2).re / (2.0 + hd.abs2(z2))


def test_jet_matches_fd_oracle(rng):
    for _ in range(20):
        p = rng.uniform(-0.8, 0.8, 2) + 1j * rng.uniform(-0.8, 0.8, 2)
        j = hd.jet(_field, p)
        f = hd.fd_jet(_field, p)
        assert hd.within_tolerance(j.grad, f.grad)
        assert hd.within_tolerance(j.hess, f.hess)


def test_within_tolerance_policy():
    assert hd.within_tolerance([1.0 + 5e-7], [1.0])
    assert not hd.within_tolerance([1.0 + 5e-6], [1.0])
    assert hd.within_tolerance([5e-10], [0.0])
    assert not hd.within_tolerance([5e-9], [0.0])


finite = st.floats(-2.0, 2.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(finite, finite, finite, finite, finite, finite)
def test_symmetry_and_linearity(x, y, a, b, u, v):
    p = np.array([complex(x, y), complex(u, v)])
    f = lambda zs: hd.abs2(zs[0]) * zs[1].re + hd.exp(zs[1].imag() * 0.5)  # noqa: E731
    g = lambda zs: hd.sin(zs[0].re) * hd.cos(zs[1].imag()) + zs[0].re * zs[1].re  # noqa: E731
    jf, jg = hd.jet(f, p), hd.jet(g, p)
    comb = hd.jet(lambda zs: a * f(zs) + b * g(zs), p)
    assert np.array_equal(comb.hess, comb.hess.T)
    assert np.array_equal(jf.hess, jf.hess.T)
    tol = 1e-12 * (1 + abs(a) + abs(b)) * (1 + np.max(np.abs(jf.hess)) + np.max(np.abs(jg.hess)))
    assert np.max(np.abs(comb.hess - (a * jf.hess + b * jg.hess))) <= tol
    assert np.max(np.abs(comb.grad - (a * jf.grad + b * jg.grad))) <= tol

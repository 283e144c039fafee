import math

import numpy as np
import pytest

from levidf import domains as D
from levidf.domains import (
    ChartRangeError,
    NotOnChartError,
    RegistrationError,
    builtin,
    chart_normal,
    gradient_normal,
    leafwise_levi_norm,
    locate,
    normal_cross_check,
    register_user_domain,
    validate_distinguished,
)

DISK_BUNDLE = "1 - abs2((z2 - z1)/(1 - conj(z1)*z2))"


def test_builtin_values():
    db = builtin("disk_bundle")
    assert db.delta.value([0, 0.9]) == pytest.approx(0.19, abs=1e-15)
    assert builtin("product_bidisk").delta.value([0.5, 0.9]) == pytest.approx(0.19, abs=1e-15)
    assert abs(db.delta.value([0.3, np.exp(1j)])) < 1e-12
    assert abs(db.delta.value(db.chart.embed([0.3], 1.0))) < 1e-12


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin("torus")


def test_ball():
    b = builtin("ball_3")
    assert b.n == 3 and not b.levi_flat and not b.charts
    assert b.delta.value([0.5, 0.5, 0.5]) == pytest.approx(0.25)


def test_moebius_identity_grid():
    db = builtin("disk_bundle")
    r = np.linspace(-0.9, 0.9, 20)
    worst = 0.0
    for a in r:
        for b in r:
            for c in r:
                zp, w = complex(a, b * 0.4), complex(c, a * 0.3)
                if abs(zp) >= 1 or abs(w) >= 1:
                    continue
                closed = (1 - abs(zp) ** 2) * (1 - abs(w) ** 2) / abs(1 - zp.conjugate() * w) ** 2
                worst = max(worst, abs(db.delta.value([zp, w]) - closed))
    assert worst < 1e-12


@pytest.mark.parametrize("name", ["disk_bundle", "product_bidisk"])
def test_chart_on_boundary_and_normals(name):
    dom = builtin(name)
    for zp, _ in D.leaf_samples(dom.chart, 6, 0.8):
        for t in D.t_samples(dom.chart, 6):
            assert abs(dom.delta.value(dom.chart.embed(zp, t))) < 1e-8
            assert normal_cross_check(dom, dom.chart, zp, t) < 1e-8
            assert leafwise_levi_norm(dom, dom.chart.embed(zp, t)) < 1e-8


def test_gradient_normal_points_inward():
    dom = builtin("disk_bundle")
    p = dom.chart.embed([0.2j], 0.4)
    nu = gradient_normal(dom, p)
    assert dom.delta.value(p + 1e-4 * nu) > 0
    assert np.allclose(nu, chart_normal(dom, dom.chart, [0.2j], 0.4))


def test_chart_range():
    from levidf.levimetric import metric_h, reparametrized

    dom = builtin("disk_bundle")
    with pytest.raises(ChartRangeError):
        metric_h(dom, dom.chart, [0.99], 0.0)
    short = reparametrized(dom.chart, lambda s: s, t_range=(0.0, 1.0), periodic=False)
    with pytest.raises(ChartRangeError):
        metric_h(dom, short, [0.1], 1.5)


def test_locate_round_trip():
    chart = builtin("disk_bundle").chart
    zp, t = locate(chart, chart.embed([0.1 - 0.3j], 2.5))
    assert zp[0] == pytest.approx(0.1 - 0.3j) and t == pytest.approx(2.5)
    with pytest.raises(NotOnChartError):
        locate(chart, np.array([0.1, 0.5]))


def test_validate_distinguished():
    bidisk = builtin("product_bidisk")
    rep = validate_distinguished(bidisk.chart, np.array([0.2 + 0.1j, np.exp(0.7j)]))
    assert rep.zeta_residual == 0.0 and rep.dt_residual < 1e-15
    db = builtin("disk_bundle")
    rep = validate_distinguished(db.chart, np.array([0, 1 + 0j]))
    assert rep.passed
    bad = register_user_domain("1 - abs2(z2)", "exp(2*i*t)", 2, name="double_speed", validate=True)
    rep = validate_distinguished(bad.chart, np.array([0, 1 + 0j]), domain=bad)
    assert not rep.passed
    assert rep.dt_residual == pytest.approx(1.0, abs=1e-12)


def test_registered_copy_matches_builtin(rng):
    user = register_user_domain(DISK_BUNDLE, "exp(i*t)", 2, name="db_copy")
    ref = builtin("disk_bundle")
    for _ in range(50):
        p = 0.9 * (rng.uniform(-0.7, 0.7, 2) + 1j * rng.uniform(-0.7, 0.7, 2))
        assert abs(user.delta.value(p) - ref.delta.value(p)) < 1e-12
    assert "db_copy" in D.catalog_names()
    assert D.get_domain("db_copy") is user


def test_register_sweep_only():
    d = register_user_domain("1 - abs2(z1) - abs2(z2)", None, 2, name="ball_copy")
    assert not d.levi_flat and not d.charts


@pytest.mark.parametrize(
    "delta, chart, message",
    [
        ("(1 - abs2(z2))^2", "exp(i*t)", "degenerate defining function"),
        ("1 - abs2(z2)", "0.5*exp(i*t)", "does not lie on"),
        ("1 - abs2(z2) - 0.01*abs2(z1)", "exp(i*t) * sqrt(1 - 0.01*abs2(z1))", "holomorphic"),
        ("abs2(z2) - 1", "exp(i*t)", "positive"),
        ("1 - abs2(z2", "exp(i*t)", None),
    ],
)
def test_registration_errors(delta, chart, message):
    with pytest.raises((RegistrationError, ValueError)) as err:
        register_user_domain(delta, chart, 2)
    if message:
        assert message in str(err.value)


def test_config_file(tmp_path):
    path = tmp_path / "db.toml"
    path.write_text(
        'name = "from_file"\ndimension = 2\n'
        f'delta = "{DISK_BUNDLE}"\n'
        "interior = [[0, 0], [0, 0]]\n"
        '[chart]\nzeta = "exp(i*t)"\n'
        f"range = {{ t = [0, {2 * math.pi}], leaf_radius = 0.9, periodic = true }}\n"
    )
    dom = D.load_domain_file(path)
    assert dom.name == "from_file" and dom.levi_flat
    assert dom.chart.leaf_radius == 0.9
    with pytest.raises(RegistrationError):
        D.parse_domain_config("name = 1\n")
    with pytest.raises(RegistrationError):
        D.parse_domain_config("name = [\n")

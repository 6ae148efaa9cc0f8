import json

import numpy as np
import pytest

from sympten.chart import Chart, ChartError, Field, load_shipped, scalar_field, shipped_charts, vector_field


def test_shipped_charts_load_and_validate():
    names = shipped_charts()
    assert "nonclosed_n2.json" in names and "constant_n2.json" in names
    for name in names:
        ch = load_shipped(name)
        info = ch.validate()
        assert info["max_condition"] < 1e12


def test_unknown_shipped_chart():
    with pytest.raises(ChartError):
        load_shipped("nope")


def test_omega_formats_agree():
    base = {"n": 1, "domain": [[-1, 1], [-1, 1]]}
    a = Chart.from_config({**base, "omega": {"1,2": "1 + x1^2"}})
    b = Chart.from_config({**base, "omega": [["1 + x1^2"]]})
    c = Chart.from_config({**base, "omega": [["0", "1 + x1^2"], ["-(1 + x1^2)", "0"]]})
    x = [0.3, -0.2]
    assert np.allclose(a.omega_at(x), b.omega_at(x))
    assert np.allclose(a.omega_at(x), c.omega_at(x))


@pytest.mark.parametrize("omega", [
    {"1,1": "1"},
    {"1,5": "1"},
    [["0", "1"], ["1", "0"]],
    [["1", "1"], ["-1", "0"]],
    "not a matrix",
    {"1,2": "x9"},
])
def test_bad_omega_rejected(omega):
    with pytest.raises(ChartError):
        Chart.from_config({"n": 1, "omega": omega})


def test_degenerate_omega_rejected():
    ch = Chart.from_config({"n": 1, "domain": [[-1, 1], [-1, 1]], "omega": {"1,2": "x1"}})
    with pytest.raises(ChartError, match="degenerate"):
        ch.validate()


def test_point_outside_domain():
    ch = load_shipped("nonclosed_n2")
    with pytest.raises(ChartError):
        ch.omega_at([0.9, 0, 0, 0])


def test_config_round_trip(tmp_path):
    ch = load_shipped("closed_n2")
    path = tmp_path / "c.json"
    path.write_text(json.dumps(ch.to_config()))
    again = Chart.load(path)
    for x in ch.lattice(2, n_random=4):
        assert np.allclose(again.omega_at(x), ch.omega_at(x), rtol=0, atol=1e-15)
        assert np.allclose(again.d_omega_partials(x), ch.d_omega_partials(x), rtol=0, atol=1e-15)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ nope")
    with pytest.raises(ChartError, match="invalid JSON"):
        Chart.load(path)


def test_analytic_partials_match_fd():
    ch = load_shipped("nonclosed_n3")
    fd = ch.omega.with_derivatives("fd", richardson=True)
    for x in ch.lattice(1, n_random=5)[1:]:
        assert np.abs(ch.d_omega_partials(x) - fd.partials(x)).max() < 1e-8


def test_fd_chart_matches_analytic_twin():
    a, b = load_shipped("nonclosed_n2"), load_shipped("nonclosed_n2_fd")
    assert a.analytic and not b.analytic
    x = np.array([0.1, -0.2, 0.3, 0.05])
    assert np.abs(a.d_omega_partials(x) - b.d_omega_partials(x)).max() < 1e-8


def test_lattice_is_interior_and_seeded():
    ch = load_shipped("nonclosed_n2")
    pts = ch.lattice(3, n_random=16, seed=1)
    assert pts.shape == (3 ** 4 + 16, 4)
    assert all(ch.contains(p) for p in pts)
    assert np.array_equal(pts, ch.lattice(3, n_random=16, seed=1))
    assert not np.array_equal(pts, ch.lattice(3, n_random=16, seed=2))


def test_field_algebra_stays_analytic():
    f = scalar_field("x1*x2", 2)
    g = scalar_field("sin(x1)", 2)
    h = (f * 2.0 + g).exp()
    assert h.analytic
    x = np.array([0.4, -0.3])
    val = np.exp(2 * 0.4 * -0.3 + np.sin(0.4))
    assert np.isclose(h(x), val)
    d = h.partials(x)
    assert np.allclose(d, val * np.array([2 * -0.3 + np.cos(0.4), 2 * 0.4]))


def test_callable_field_uses_fd():
    f = Field.from_callable(lambda x: np.array([x[0] ** 3, x[0] * x[1]]), (2,), 2, richardson=True)
    assert not f.analytic
    d = f.partials([0.5, 2.0])
    assert np.allclose(d, [[0.75, 2.0], [0.0, 0.5]], atol=1e-8)
    with pytest.raises(ValueError):
        f.with_derivatives("analytic")


def test_vector_field_length_checked():
    with pytest.raises(ValueError):
        vector_field(["x1"], 2)


def test_conformal_chart():
    ch = load_shipped("constant_n2")
    f = scalar_field("0.3*x1 - x2^2", 4)
    cf = ch.conformal(f)
    x = np.array([0.2, 0.1, -0.4, 0.3])
    assert np.allclose(cf.omega_at(x), np.exp(2 * f(x)) * ch.omega_at(x))

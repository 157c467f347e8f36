import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import darboux_fields, fd_bracket, fd_christoffel, poly_values, random_polys
from paracontact.connections import DegenerateMetricError, levi_civita
from paracontact.kernel import (DomainError, MetricField, Model, Point, Poly, PolyArray, ScalarField,
                                VectorField, bracket, derivative, jacobi_check, jacobi_residual, lie_bracket)

CHART = Model.chart(3, "r3")
PTS = CHART.sample_points(10)


def vf(polys, name=""):
    return VectorField.from_polys(CHART, polys, name)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


# -- jets -------------------------------------------------------------------


def test_jet_value_matches_direct_evaluation():
    polys = random_polys(np.random.default_rng(1), 3, (3, 3), degree=3, nterms=4)
    pa = PolyArray(polys)
    for p in PTS:
        assert np.allclose(pa.jet(p.array()).v, poly_values(polys, p.array()), atol=1e-13)


def _cubic_field(rng):
    polys = random_polys(rng, 3, (3,), degree=3, nterms=4)
    for k in range(3):
        e = [0, 0, 0]
        e[k] = 3
        polys[k] = polys[k] + Poly(3, {tuple(e): 1.0})
    return polys


@given(seeds)
def test_jet_first_derivative_converges_quadratically(seed):
    polys = _cubic_field(np.random.default_rng(seed))
    pa = PolyArray(polys)
    x = np.array([0.3, -0.4, 0.5])
    exact = pa.jet(x).d
    errs = []
    for step in (1e-3, 1e-4):
        fd = np.stack([(poly_values(polys, x + step * e) - poly_values(polys, x - step * e)) / (2 * step)
                       for e in np.eye(3)], axis=-1)
        errs.append(np.abs(fd - exact).max())
    assert errs[1] < 1e-7
    # a hundredfold smaller step must cut the error by far more than tenfold
    assert errs[1] < errs[0] / 30


def test_jet_second_derivative_against_finite_differences():
    polys = _cubic_field(np.random.default_rng(7))
    pa = PolyArray(polys)
    x = np.array([0.1, 0.2, -0.6])
    h = 1e-3
    dd = pa.jet(x).dd
    eye = np.eye(3)
    for a in range(3):
        for b in range(3):
            f = lambda u: poly_values(polys, u)
            fd = (f(x + h * eye[a] + h * eye[b]) - f(x + h * eye[a] - h * eye[b])
                  - f(x - h * eye[a] + h * eye[b]) + f(x - h * eye[a] - h * eye[b])) / (4 * h * h)
            assert np.allclose(dd[:, a, b], fd, atol=1e-5)


# -- brackets ---------------------------------------------------------------


@given(seeds)
def test_bracket_matches_finite_difference_oracle(seed):
    rng = np.random.default_rng(seed)
    xp, yp = random_polys(rng, 3, (3,)), random_polys(rng, 3, (3,))
    x, y = vf(xp), vf(yp)
    for p in PTS[:4]:
        assert np.allclose(lie_bracket(x, y, p), fd_bracket(xp, yp, p.array()), atol=1e-8)


@given(seeds)
def test_bracket_antisymmetric_and_jacobi(seed):
    rng = np.random.default_rng(seed)
    x, y, z = (vf(random_polys(rng, 3, (3,), degree=3)) for _ in range(3))
    jac = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
    for p in PTS[:4]:
        assert np.array_equal(lie_bracket(x, y, p), -lie_bracket(y, x, p))
        assert np.abs(jac.value(p)).max() <= 1e-9


@given(seeds)
def test_bracket_leibniz_rule(seed):
    rng = np.random.default_rng(seed)
    xp, yp = random_polys(rng, 3, (3,)), random_polys(rng, 3, (3,))
    fp = random_polys(rng, 3, (), degree=2)[()]
    f = ScalarField.from_polys(CHART, np.array(fp, dtype=object))
    fy = vf(np.array([fp * q for q in yp], dtype=object))
    x, y = vf(xp), vf(yp)
    xf = derivative(x, f)
    for p in PTS[:4]:
        want = xf.value(p) * y.value(p) + f.value(p) * lie_bracket(x, y, p)
        assert np.allclose(lie_bracket(x, fy, p), want, atol=1e-9)


def test_bracket_acts_as_commutator_of_derivations():
    rng = np.random.default_rng(3)
    x, y = vf(random_polys(rng, 3, (3,))), vf(random_polys(rng, 3, (3,)))
    f = ScalarField.from_polys(CHART, np.array(random_polys(rng, 3, (), degree=3)[()], dtype=object))
    lhs = derivative(x, derivative(y, f)) - derivative(y, derivative(x, f))
    rhs = derivative(bracket(x, y), f)
    for p in PTS:
        assert abs(lhs.value(p) - rhs.value(p)) <= 1e-10


def test_darboux_frame_brackets(darboux2):
    f = darboux_fields(darboux2)
    fields = {k: v for k, v in f.items()}
    frame_polys = {}
    from paracontact.models import _darboux_frame
    frame, _ = _darboux_frame(2)
    names = ["X1", "X2", "Y1", "Y2", "xi"]
    for j, k in enumerate(names):
        frame_polys[k] = frame[:, j]
    for p in darboux2.model.sample_points(10, seed=11):
        assert np.allclose(lie_bracket(fields["xi"], fields["X1"], p), 0.0)
        got = lie_bracket(fields["X1"], fields["Y1"], p)
        assert np.allclose(got, fields["xi"].value(p), atol=1e-14)
        assert np.allclose(got, fd_bracket(frame_polys["X1"], frame_polys["Y1"], p.array()), atol=1e-8)
        assert np.allclose(lie_bracket(fields["X1"], fields["Y2"], p), 0.0)


def test_point_outside_box_rejected():
    x = vf(random_polys(np.random.default_rng(0), 3, (3,)))
    with pytest.raises(DomainError):
        x.value(Point((0.0, 2.0, 0.0)))
    with pytest.raises(DomainError):
        x.value(Point((0.0, 0.0)))


def test_model_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        Model.chart(4)
    with pytest.raises(ValueError):
        Model.chart(1)


def test_sample_points_deterministic():
    a = CHART.sample_points(5, seed=9)
    b = CHART.sample_points(5, seed=9)
    assert [p.coords for p in a] == [p.coords for p in b]
    assert all(np.abs(p.array()).max() <= 1.0 for p in a)


# -- frame models -----------------------------------------------------------


def heisenberg() -> np.ndarray:
    c = np.zeros((3, 3, 3))
    c[2, 0, 1], c[2, 1, 0] = 1.0, -1.0
    return c


def test_frame_brackets_are_structure_constants():
    c = heisenberg()
    m = Model.frame(c)
    p = m.sample_points()[0]
    for i in range(3):
        for j in range(3):
            assert np.array_equal(lie_bracket(m.frame_field(i), m.frame_field(j), p), c[:, i, j])


def test_jacobi_residuals():
    assert jacobi_residual(Model.frame(np.zeros((3, 3, 3)))) == 0.0
    assert jacobi_check(Model.frame(heisenberg())).passed


def test_jacobi_violation_detected(km):
    c = np.array(km.model.c)
    # the e0 component of [e0, e1]; perturbing the diagonal constants keeps a Lie algebra
    c[0, 0, 1] += 0.1
    c[0, 1, 0] -= 0.1
    with pytest.raises(ValueError, match="Jacobi"):
        Model.frame(c)
    loose = Model.frame(c, jacobi_tol=10.0)
    check = jacobi_check(loose, 1e-9)
    assert not check and check.residual > 1e-3


def test_jacobi_check_needs_frame_model():
    with pytest.raises(TypeError):
        jacobi_residual(CHART)


def test_structure_constants_must_be_antisymmetric():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    with pytest.raises(ValueError):
        Model.frame(c)


# -- contractions -----------------------------------------------------------


def test_identity_tensor_and_form_evaluation(darboux2):
    f = darboux_fields(darboux2)
    eta = darboux2.form.eta
    ident = darboux2.model.identity()
    for p in darboux2.model.sample_points(5):
        assert np.array_equal((ident @ f["Y1"]).value(p), f["Y1"].value(p))
        assert eta(f["xi"]).value(p) == pytest.approx(1.0, abs=1e-14)
        assert eta(f["X1"]).value(p) == pytest.approx(0.0, abs=1e-14)
        assert eta(f["Y2"]).value(p) == pytest.approx(0.0, abs=1e-14)


# -- Levi-Civita ------------------------------------------------------------


def _metric(sig: tuple[float, float, float], seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = np.empty((3, 3), dtype=object)
    small = random_polys(rng, 3, (3, 3), degree=2, nterms=2)
    for i in range(3):
        for j in range(i, 3):
            base = Poly.const(3, sig[i] * 2.0 if i == j else 0.0)
            g[i, j] = g[j, i] = base + small[i, j] * Poly.const(3, 0.1)
    return g


@pytest.mark.parametrize("sig", [(1.0, 1.0, 1.0), (1.0, 1.0, -1.0)], ids=["riemannian", "lorentzian"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_koszul_metric_and_torsion_free(sig, seed):
    gp = _metric(sig, seed)
    g = MetricField.from_polys(CHART, gp, "g")
    lc = levi_civita(g)
    ng = lc.nabla_bilinear(g)
    for p in PTS:
        assert np.abs(lc.torsion_tensor.value(p)).max() <= 1e-12
        assert np.abs(ng.value(p)).max() <= 1e-9
        assert np.allclose(lc.coeffs(p).v, fd_christoffel(gp, p.array()), atol=1e-7)
        r = lc.curvature_tensor.value(p)
        assert np.array_equal(r, -np.swapaxes(r, 2, 3))


def test_levi_civita_of_flat_metric_on_abelian_frame():
    m = Model.frame(np.zeros((3, 3, 3)))
    lc = levi_civita(MetricField.constant(m, np.eye(3)))
    assert np.array_equal(lc.coeffs(m.sample_points()[0]).v, np.zeros((3, 3, 3)))


def test_levi_civita_rejects_degenerate_metric():
    m = Model.frame(np.zeros((3, 3, 3)))
    with pytest.raises(DegenerateMetricError):
        levi_civita(MetricField.constant(m, np.diag([1.0, 1.0, 0.0])))


def test_connection_leibniz_rule():
    gp = _metric((1.0, 1.0, 1.0), 4)
    lc = levi_civita(MetricField.from_polys(CHART, gp))
    rng = np.random.default_rng(4)
    xp, yp = random_polys(rng, 3, (3,)), random_polys(rng, 3, (3,))
    fp = random_polys(rng, 3, (), degree=2)[()]
    f = ScalarField.from_polys(CHART, np.array(fp, dtype=object))
    x, y = vf(xp), vf(yp)
    fy = vf(np.array([fp * q for q in yp], dtype=object))
    xf = derivative(x, f)
    for p in PTS[:5]:
        want = xf.value(p) * y.value(p) + f.value(p) * lc.nabla(x, y).value(p)
        assert np.allclose(lc.nabla(x, fy).value(p), want, atol=1e-10)

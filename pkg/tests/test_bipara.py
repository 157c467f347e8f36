import numpy as np
import pytest

from oracles import darboux_fields, darboux_frame_matrix
from paracontact import bipara as bp
from paracontact.checks import PreconditionError
from paracontact.contact import Distribution
from paracontact.kernel import bracket
from paracontact.models import builtin, darboux_adapted_tensors
from paracontact.structures import AxiomError

TOL = 1e-9


@pytest.fixture(scope="module")
def frame(darboux2):
    return darboux_fields(darboux2)


def span(*fields, name=""):
    return Distribution.from_spans(list(fields), name)


def in_adapted_frame(bm, t, p):
    f = darboux_frame_matrix(bm, p)
    return np.linalg.solve(f, t.value(p) @ f)


# -- construction -------------------------------------------------------------


def test_darboux_example_is_valid_and_matches_tensors(darboux2, pts2):
    b = darboux2.bipara
    b.validate(pts2, 1e-12)
    want = darboux_adapted_tensors(2)
    for p in pts2[:4]:
        for a in (1, 2, 3):
            assert np.allclose(in_adapted_frame(darboux2, b.phi(a), p), want[f"phi{a}"], atol=1e-13)


def test_phi2_equal_phi1_rejected(darboux2, pts2):
    b = darboux2.bipara
    with pytest.raises(AxiomError):
        bp.build_biparacontact(b.phi1, b.phi1, darboux2.form, pts2)


def test_eigendistributions_of_example(darboux2, frame, pts2):
    b = darboux2.bipara
    expected = {
        (1, 1): [frame["X1"], frame["X2"]],
        (1, -1): [frame["Y1"], frame["Y2"]],
        (2, 1): [frame["X1"] - frame["Y1"], frame["X2"] - frame["Y2"]],
        (2, -1): [frame["X1"] + frame["Y1"], frame["X2"] + frame["Y2"]],
    }
    for key, fields in expected.items():
        d = b.distribution(*key)
        for u in fields:
            assert all(np.abs(d.contains(u).value(p)).max() <= 1e-13 for p in pts2)


def test_algebraic_identities(darboux2, km):
    for bm in (darboux2, km):
        pts = bm.model.sample_points(6)
        b = bm.bipara
        assert all(b.axiom_checks(pts, 1e-12).values())
        assert b.product_identities(pts, 1e-12)
        assert all(b.eigendistribution_checks(pts, 1e-12).values())
        assert b.h_relations(pts, 1e-10)


def test_from_bilegendrian_pair_reproduces_example(darboux2, frame, pts2):
    l = span(frame["X1"], frame["X2"], name="L")
    q = span(frame["Y1"], frame["Y2"], name="Q")
    l2 = span(frame["X1"] - frame["Y1"], frame["X2"] - frame["Y2"], name="L'")
    q2 = span(frame["X1"] + frame["Y1"], frame["X2"] + frame["Y2"], name="Q'")
    b = bp.from_bilegendrian_pair(l, q, l2, q2, darboux2.form, pts2)
    ref = darboux2.bipara
    swapped = bp.from_bilegendrian_pair(l2, q2, l, q, darboux2.form, pts2)
    for p in pts2[:4]:
        for a in (1, 2, 3):
            assert np.allclose(b.phi(a).value(p), ref.phi(a).value(p), atol=1e-12)
        assert np.allclose(swapped.phi1.value(p), ref.phi2.value(p), atol=1e-12)
        assert np.allclose(swapped.phi2.value(p), ref.phi1.value(p), atol=1e-12)
        assert np.allclose(swapped.phi3.value(p), -ref.phi3.value(p), atol=1e-12)
    with pytest.raises(PreconditionError):
        bp.from_bilegendrian_pair(l, q, l, q, darboux2.form, pts2)


def test_conjugate_structure(darboux2, frame, pts2):
    l = span(frame["X1"], frame["X2"], name="L")
    b = bp.conjugate_structure(darboux2.metric, l, pts2)
    assert all(b.axiom_checks(pts2, 1e-12).values())
    assert b.is_legendrian(pts2, 1e-10)
    for p in pts2[:3]:
        assert np.allclose(b.phi3.value(p), darboux2.metric.base.phi.value(p), atol=1e-12)
        for u in l.spans:
            assert np.allclose((b.phi2 @ u).value(p), u.value(p), atol=1e-12)


# -- Legendrian / integrable / normal -------------------------------------------


def test_legendrian_cases(darboux2, km):
    for bm in (darboux2, km):
        pts = bm.model.sample_points(6)
        check = bm.bipara.is_legendrian(pts, 1e-10)
        assert check and check.detail["consistent"]
        assert bm.bipara.n1_values_in_opposite(pts, 1e-10)


def test_non_legendre_splitting_reports_witness(darboux2, frame, pts2):
    f = frame
    l, q = span(f["X1"], f["Y1"], name="L"), span(f["X2"], f["Y2"], name="Q")
    l2 = span(f["X1"] + f["X2"], f["Y1"] + f["Y2"], name="L'")
    q2 = span(f["X1"] - f["X2"], f["Y1"] - f["Y2"], name="Q'")
    b = bp.from_bilegendrian_pair(l, q, l2, q2, darboux2.form, pts2)
    check = b.is_legendrian(pts2, 1e-10)
    assert not check
    assert "witness" in check.detail
    assert check.detail["consistent"]


def test_integrable_and_normal(darboux2, km):
    d = darboux2.bipara
    pts = darboux2.model.sample_points(6)
    assert d.is_integrable(pts, 1e-10) and d.is_normal(pts, 1e-10)
    kp = km.model.sample_points()
    integ = km.bipara.is_integrable(kp, 1e-10)
    assert integ and integ.detail["theorem_N1_phi3_on_D"]
    normal = km.bipara.is_normal(kp, 1e-10)
    assert not normal
    assert not normal.detail["all_foliations_flat"]
    assert np.abs(km.bipara.h(2).value(kp[0])).max() > 1.0


# -- the connections ------------------------------------------------------------


def test_darboux_connections_coincide(darboux2, pts2):
    b = darboux2.bipara
    for p in pts2[:4]:
        g1 = b.connections[1].coeffs(p).v
        assert np.allclose(b.connections[2].coeffs(p).v, g1, atol=1e-12)
        assert np.allclose(b.connections[3].coeffs(p).v, g1, atol=1e-12)
        want = 2 * np.einsum("ij,k->kij", darboux2.form.deta.value(p), b.xi.value(p))
        assert np.allclose(b.connections[1].torsion_tensor.value(p), want, atol=1e-12)


def test_kappa_mu_nabla_phi_relations(km_structure):
    s = km_structure
    b = s.standard
    p = s.model.sample_points()[0]
    eta = s.base.eta.value(p)
    d12 = b.connections[1].nabla_tensor(b.phi2).value(p)
    assert np.allclose(d12, 2 * s.lam * np.einsum("i,kl->ikl", eta, b.phi3.value(p)), atol=1e-12)
    for beta in (1, 2, 3):
        assert np.abs(b.connections[2].nabla_tensor(b.phi(beta)).value(p)).max() <= 1e-12


@pytest.mark.parametrize("name", ["darboux2", "kappa_mu", "kappa_mu_small"])
def test_connection_theorem(name):
    bm = builtin(name)
    b = bm.bipara
    pts = bm.model.sample_points(6)
    for alpha in (1, 2, 3):
        assert all(bp.connection_theorem_checks(b, alpha, pts, TOL).values())
    for alpha in (1, 2):
        general = bp.nabla_alpha_general(b, alpha)
        for p in pts:
            assert np.allclose(general.coeffs(p).v, b.connections[alpha].coeffs(p).v, atol=TOL)


@pytest.mark.parametrize("name", ["kappa_mu", "kappa_mu_negative"])
def test_torsion_formulas(name):
    bm = builtin(name)
    b = bm.bipara
    p = bm.model.sample_points()[0]
    for alpha in (1, 2):
        assert np.allclose(b.connections[alpha].torsion_tensor.value(p), bp.torsion_formula(b, alpha, p), atol=TOL)
    t3 = b.connections[3].torsion_tensor.value(p)
    assert np.allclose(t3, bp.torsion_formula(b, 3, p, "corrected"), atol=TOL)
    # the repeated N1_phi1 term as displayed does not reproduce the torsion
    assert np.abs(t3 - bp.torsion_formula(b, 3, p, "printed")).max() > 0.1


def test_nabla_alpha_along_xi_is_projected_bracket(km):
    b = km.bipara
    p = km.model.sample_points()[0]
    xi = b.xi
    for alpha in (1, 2):
        conn = b.connections[alpha]
        for s in (1, -1):
            d = b.distribution(alpha, s)
            proj = b.projector(alpha, s)
            for u in d.spans:
                assert np.allclose(conn.nabla(xi, u).value(p), (proj @ bracket(xi, u)).value(p), atol=1e-10)


def test_nabla_alpha_rejects_bad_index(km):
    with pytest.raises(ValueError):
        km.bipara.nabla_alpha(4)
    with pytest.raises(ValueError):
        bp.nabla_alpha_general(km.bipara, 3)


# -- canonical connection -------------------------------------------------------


@pytest.mark.parametrize("name", ["darboux2", "kappa_mu", "kappa_mu_im0"])
def test_canonical_connection(name):
    bm = builtin(name)
    pts = bm.model.sample_points(6)
    checks = bp.canonical_connection_checks(bm.bipara, pts, TOL)
    assert all(checks.values()), {k: c.residual for k, c in checks.items()}


def test_canonical_torsion_along_reeb(km_structure):
    s = km_structure
    b = s.standard
    p = s.model.sample_points()[0]
    t = b.nabla_c.torsion_tensor.value(p)
    xi, phi, h = s.base.xi.value(p), s.base.phi.value(p), s.base.h.value(p)
    want = (2 / 3) * ((1 - s.mu / 2) * phi + phi @ h)
    assert np.allclose(np.einsum("kij,j->ki", t, xi), want, atol=1e-12)


def test_canonical_connection_is_explicit_formula(km, darboux2, pts2):
    for b, pts in ((km.bipara, km.model.sample_points()), (darboux2.bipara, pts2[:4])):
        oracle = bp.nabla_c_explicit(b)
        for p in pts:
            assert np.allclose(b.nabla_c.coeffs(p).v, oracle.coeffs(p).v, atol=1e-9)


def test_normal_case_on_darboux(darboux2, pts2):
    checks = bp.normal_case_checks(darboux2.bipara, pts2, 1e-10)
    assert all(checks.values())
    nc = darboux2.bipara.nabla_c
    for p in pts2[:4]:
        assert np.abs(nc.curvature_tensor.value(p)).max() <= 1e-10
        assert np.abs(nc.ricci_tensor.value(p)).max() <= 1e-10


def test_normal_case_rejects_non_normal(km):
    with pytest.raises(PreconditionError):
        bp.normal_case_checks(km.bipara, km.model.sample_points(), 1e-10)

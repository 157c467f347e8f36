import importlib.util
from pathlib import Path

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from paracontact import kappa_mu as kmu
from paracontact.checks import PreconditionError
from paracontact.models import builtin, kappa_mu_constants, kappa_mu_frame

SCRIPT = Path(__file__).resolve().parents[1] / "scripts" / "derive_kappa_mu_constants.py"


def load_oracle():
    spec = importlib.util.spec_from_file_location("derive_kappa_mu_constants", SCRIPT)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


@pytest.mark.parametrize("kappa,mu", [(-8, -8), (0, 0), (-8, 2), (-3, 5)])
def test_frame_curvature_matches_symbolic_oracle(kappa, mu):
    oracle = load_oracle()
    a, b = kappa_mu_constants(kappa, mu)
    c = oracle.structure(sp.nsimplify(a), sp.nsimplify(b))
    r = oracle.curvature(c, oracle.levi_civita(c))
    bm = kappa_mu_frame(kappa, mu)
    p = bm.model.sample_points()[0]
    got = bm.metric.levi_civita.curvature_tensor.value(p)
    for idx in np.ndindex(3, 3, 3, 3):
        assert got[idx] == pytest.approx(float(r(*idx)), abs=1e-10)


def test_symbolic_constants_for_reference_model():
    a, b = kappa_mu_constants(-8, -8)
    assert (a, b) == (8.0, -2.0)
    with pytest.raises(ValueError):
        kappa_mu_constants(1.0, 0.0)


def test_verify_kappa_mu_cases(darboux2, km):
    pts = darboux2.model.sample_points(6)
    sas = kmu.verify_kappa_mu(darboux2.metric, 1.0, 0.0, pts, 1e-9)
    assert sas and sas.detail["mu_fit"] is None
    assert sas.detail["kappa_fit"] == pytest.approx(1.0)
    check = kmu.verify_kappa_mu(km.metric, -8.0, -8.0)
    assert check and check.residual <= 1e-9
    flat = builtin("kappa_mu_flat")
    fit = kmu.fit_nullity(flat.metric.levi_civita, flat.metric.base.h, flat.metric.base.xi,
                          flat.metric.base.eta, flat.model.sample_points())
    assert fit.kappa == pytest.approx(0.0, abs=1e-12) and fit.mu == pytest.approx(0.0, abs=1e-12)
    assert not kmu.verify_kappa_mu(km.metric, -8.0, -7.0)


def test_structure_guards(darboux2, km):
    with pytest.raises(ValueError):
        kmu.KappaMuStructure(km.metric, 2.0, 0.0)
    sas = kmu.KappaMuStructure(darboux2.metric, 1.0, 0.0)
    assert sas.is_sasakian
    with pytest.raises(PreconditionError):
        sas.boeckx
    with pytest.raises(PreconditionError):
        kmu.KappaMuStructure(kmu.induced_metric(km.bipara, 1), -8.0, -8.0)


def test_derived_quantities(km_structure):
    s = km_structure
    assert s.lam == 3.0
    assert s.boeckx == pytest.approx(5 / 3)
    pts = s.model.sample_points()
    assert kmu.h_square_check(s, pts, 1e-12)
    assert all(kmu.h_eigen_checks(s, pts, 1e-12).values())


def test_phi_h_eigendecomposition(km_structure):
    s = km_structure
    pts = s.model.sample_points()
    split = kmu.phi_h_eigendecomposition(s, pts, 1e-10)
    assert all(split.checks.values())
    assert split.plus.rank == split.minus.rank == 1
    p = pts[0]
    ev = np.sort(np.linalg.eigvals(s.phi_h.value(p)).real)
    assert ev == pytest.approx([-3, 0, 3], abs=1e-12)
    g = s.ms.g.value(p)
    assert split.plus.matrix(p).T @ g @ split.minus.matrix(p) == pytest.approx(0.0, abs=1e-12)


def test_standard_structure(km_structure):
    s = km_structure
    pts = s.model.sample_points()
    b = s.standard
    assert all(kmu.standard_operator_checks(s, pts, 1e-12).values())
    p = pts[0]
    assert np.allclose(b.h(1).value(p), -(5 / 3) * s.base.h.value(p))
    assert np.allclose(b.phi2.value(p) @ b.phi2.value(p), np.eye(3) - np.outer(b.xi.value(p), b.eta.value(p)))
    assert b.is_integrable(pts, 1e-10)


def test_induced_metrics_reference_values(km_structure):
    ex = kmu.expected_induced_values(-8, -8)
    assert ex == {"kappa1": 24.0, "mu1": -4.0, "kappa2": 15.0, "mu2": 2.0}
    checks = kmu.verify_indotte(km_structure, km_structure.model.sample_points(), 1e-9)
    assert all(checks.values()), [k for k, c in checks.items() if not c]


def test_induced_metric_torsion_link(km_structure):
    # xi-torsion of the g1 canonical paracontact connection is -phi1 h1
    s = km_structure
    g1 = kmu.induced_metric(s.standard, 1)
    p = s.model.sample_points()[0]
    from paracontact.connections import paracontact_canonical
    t = paracontact_canonical(g1).torsion_tensor.value(p)
    b = s.standard
    assert np.allclose(np.einsum("kij,j->ki", t, b.xi.value(p)), -b.phi1.value(p) @ b.h(1).value(p), atol=1e-12)


def test_connection_identifications(km_structure):
    checks = kmu.connection_identifications(km_structure, km_structure.model.sample_points(), 1e-9)
    assert all(checks.values()), [k for k, c in checks.items() if not c]
    coef, resid = kmu.read_off_coefficients(km_structure.standard, km_structure.standard.nabla_c,
                                            km_structure.model.sample_points())
    assert resid <= 1e-10
    assert coef[1, 2] == pytest.approx(-10 / 3)
    assert coef[2, 1] == pytest.approx(10 / 3)
    assert coef[2, 3] == pytest.approx(2.0)
    assert coef[3, 2] == pytest.approx(2.0)


@pytest.mark.parametrize("name,cls", [("kappa_mu", "positive"), ("kappa_mu_im0", "flat"),
                                      ("kappa_mu_negative", "negative"), ("kappa_mu_small", "positive")])
def test_pang_classification(name, cls):
    s = builtin(name).kappa_mu()
    pts = s.model.sample_points()
    assert kmu.pang_classification(s, pts, 1e-9) == {"plus": cls, "minus": cls}
    assert kmu.expected_pang_class(s.boeckx, 1e-12) == cls


def test_pang_factor_is_twice_lambda_times_invariant(km_structure):
    s = km_structure
    pts = s.model.sample_points()
    split = kmu.phi_h_eigendecomposition(s, pts, 1e-10)
    assert kmu.measured_pang_factor(s, split, pts[0]) == pytest.approx(10.0, abs=1e-12)
    assert kmu.pang_ratio_check(s, 10.0, pts, 1e-9)
    assert not kmu.pang_ratio_check(s, 10 / 3, pts, 1e-9)


def test_main3_reconstruction(km):
    rep = kmu.main3_reconstruction(km.bipara, km.model.sample_points(), 1e-9, declared_mu=-8.0)
    assert all(rep["checks"].values()), [k for k, c in rep["checks"].items() if not c]
    assert rep["a"] == pytest.approx(10 / 3) and rep["b"] == pytest.approx(2.0)
    assert rep["mu3_fitted"] == pytest.approx(-8.0)
    assert rep["mu3_formula_minus"] == pytest.approx(-8.0)
    assert rep["mu3_formula_plus"] == pytest.approx(12.0)
    assert rep["expected"]["kappa3"] == pytest.approx(-8.0)


def test_main3_degenerate_read_off():
    bm = builtin("kappa_mu_im0")
    with pytest.raises(PreconditionError, match="vanishes"):
        kmu.main3_reconstruction(bm.bipara, bm.model.sample_points(), 1e-9)


@pytest.mark.parametrize("name,branch", [("kappa_mu", "i"), ("kappa_mu_negative", "i"),
                                         ("kappa_mu_small", "ii"), ("kappa_mu_im0", "ii")])
def test_main4_branches(name, branch):
    s = builtin(name).kappa_mu()
    b, rep = kmu.main4_supplementary(s, s.model.sample_points(), 1e-9)
    assert rep["branch"] == branch
    assert all(rep["checks"].values()), [k for k, c in rep["checks"].items() if not c]
    assert all(b.axiom_checks(s.model.sample_points(), 1e-12).values())


def test_main4_rejects_unit_invariant():
    s = builtin("kappa_mu_flat").kappa_mu()
    with pytest.raises(PreconditionError, match="I_M"):
        kmu.main4_supplementary(s, s.model.sample_points(), 1e-9)


kappas = st.floats(min_value=-15.0, max_value=0.9)
mus = st.floats(min_value=-10.0, max_value=10.0)


@settings(max_examples=15)
@given(kappas, mus)
def test_random_kappa_mu_models(kappa, mu):
    bm = kappa_mu_frame(kappa, mu)
    s = bm.kappa_mu()
    pts = bm.model.sample_points()
    assert kmu.verify_kappa_mu(bm.metric, kappa, mu, pts, 1e-8)
    fit = kmu.fit_nullity(bm.metric.levi_civita, s.base.h, s.base.xi, s.base.eta, pts)
    assert fit.kappa == pytest.approx(kappa, abs=1e-8) and fit.mu == pytest.approx(mu, abs=1e-8)
    checks = kmu.verify_indotte(s, pts, 1e-8)
    assert all(checks.values()), [k for k, c in checks.items() if not c]
    split = kmu.phi_h_eigendecomposition(s, pts, 1e-8)
    factor = kmu.measured_pang_factor(s, split, pts[0])
    assert factor == pytest.approx(2 * s.lam * s.boeckx, abs=1e-8)

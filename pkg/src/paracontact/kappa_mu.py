"""Contact metric (kappa, mu)-spaces and the bi-paracontact structures they carry."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .bipara import BiParacontact, build_biparacontact
from .checks import Check, PreconditionError, combine, scan
from .connections import Connection, check_bilegendrian_axioms, paracontact_canonical
from .contact import (ContactForm, Distribution, classify_pang, is_involutive, is_legendre,
                      pang_gram, transversality_check)
from .kernel import Point, Tensor11, as_metric, outer_forms
from .structures import AlmostContact, MetricStructure

SASAKIAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# nullity condition


@dataclass
class NullityFit:
    kappa: float
    mu: float | None
    residual: float


def nullity_arrays(conn: Connection, h: Tensor11, xi, eta, p: Point):
    """``R(E_i, E_j) xi`` and the two model tensors it is fitted against."""
    r = np.einsum("klij,l->kij", conn.curvature_tensor.value(p), xi.value(p))
    e, hv = eta.value(p), h.value(p)
    idm = np.eye(len(e))
    a = np.einsum("j,ki->kij", e, idm) - np.einsum("i,kj->kij", e, idm)
    b = np.einsum("j,ki->kij", e, hv) - np.einsum("i,kj->kij", e, hv)
    return r, a, b


def fit_nullity(conn: Connection, h: Tensor11, xi, eta, points: Sequence[Point]) -> NullityFit:
    """Least-squares ``(kappa, mu)``; ``mu`` is None when ``h`` vanishes on the samples."""
    rs, as_, bs = zip(*(nullity_arrays(conn, h, xi, eta, p) for p in points))
    r = np.concatenate([x.ravel() for x in rs])
    a = np.concatenate([x.ravel() for x in as_])
    b = np.concatenate([x.ravel() for x in bs])
    if np.linalg.norm(b) <= 1e-9 * max(1.0, np.linalg.norm(a)):
        k = float(a @ r / (a @ a))
        return NullityFit(k, None, float(np.abs(r - k * a).max()))
    coef, *_ = np.linalg.lstsq(np.column_stack([a, b]), r, rcond=None)
    k, m = (float(v) for v in coef)
    return NullityFit(k, m, float(np.abs(r - k * a - m * b).max()))


def nullity_check(name: str, conn: Connection, h: Tensor11, xi, eta, kappa: float | None, mu: float | None,
                  points: Sequence[Point], tol: float) -> Check:
    fit = fit_nullity(conn, h, xi, eta, points)
    k = fit.kappa if kappa is None else kappa
    m = (fit.mu or 0.0) if mu is None else mu

    def res(p):
        r, a, b = nullity_arrays(conn, h, xi, eta, p)
        return r - k * a - m * b

    out = scan(name, res, points, tol)
    out.detail = {"kappa_fit": _sig(fit.kappa), "mu_fit": None if fit.mu is None else _sig(fit.mu)}
    if fit.mu is None:
        out.detail["mu_fit_status"] = "indeterminate (h vanishes)"
    return out


def verify_kappa_mu(ms: MetricStructure, kappa: float | None = None, mu: float | None = None,
                    points: Sequence[Point] | None = None, tol: float = 1e-9) -> Check:
    if not ms.base.is_contact:
        raise PreconditionError("the (kappa, mu) condition is checked on contact metric structures")
    pts = points if points is not None else ms.model.sample_points()
    s = ms.base
    return nullity_check("kappa_mu_nullity", ms.levi_civita, s.h, s.xi, s.eta, kappa, mu, pts, tol)


def _sig(x: float) -> float:
    return float(f"{x:.10g}")


# ---------------------------------------------------------------------------
# the structure


@dataclass(frozen=True, eq=False)
class KappaMuStructure:
    ms: MetricStructure
    kappa: float
    mu: float

    def __post_init__(self):
        if not self.ms.base.is_contact:
            raise PreconditionError("a (kappa, mu)-structure is a contact metric structure")
        if self.kappa > 1 + SASAKIAN_TOL:
            raise ValueError(f"kappa must be <= 1, got {self.kappa}")

    @property
    def model(self):
        return self.ms.model

    @property
    def base(self) -> AlmostContact:
        return self.ms.base

    @property
    def form(self) -> ContactForm:
        return self.base.form

    @property
    def is_sasakian(self) -> bool:
        return abs(1 - self.kappa) <= SASAKIAN_TOL

    def require_non_sasakian(self) -> None:
        if self.is_sasakian:
            raise PreconditionError("Sasakian structure (kappa = 1): the h-eigenspaces are undefined")

    @property
    def lam(self) -> float:
        return float(np.sqrt(max(1.0 - self.kappa, 0.0)))

    @property
    def boeckx(self) -> float:
        self.require_non_sasakian()
        return (1 - self.mu / 2) / self.lam

    @cached_property
    def phi_h(self) -> Tensor11:
        return self.base.phi @ self.base.h

    @cached_property
    def standard(self) -> BiParacontact:
        return standard_bipara(self)


def h_square_check(s: KappaMuStructure, points: Sequence[Point], tol: float) -> Check:
    b = s.base
    return scan("h_square", lambda p: b.h.value(p) @ b.h.value(p) - (s.kappa - 1) * b.phi.value(p) @ b.phi.value(p),
                points, tol)


def h_eigen_checks(s: KappaMuStructure, points: Sequence[Point], tol: float) -> dict[str, Check]:
    """``D_h(lambda)`` and ``D_h(-lambda)``: orthogonal, swapped by phi."""
    s.require_non_sasakian()
    st = s.standard
    plus, minus = st.distribution(2, 1), st.distribution(2, -1)
    phi, g = s.base.phi, s.ms.g

    def orth(p):
        return plus.matrix(p).T @ g.value(p) @ minus.matrix(p)

    def swap(p):
        return [minus.complement.value(p) @ phi.value(p) @ u.value(p) for u in plus.spans]

    return {"orthogonal": scan("h_eigenspaces_orthogonal", orth, points, tol),
            "phi_swaps": scan("phi_maps_Dh_plus_to_minus", swap, points, tol)}


@dataclass
class Eigensplitting:
    plus: Distribution
    minus: Distribution
    checks: dict[str, Check]


def phi_h_eigendecomposition(s: KappaMuStructure, points: Sequence[Point], tol: float) -> Eigensplitting:
    s.require_non_sasakian()
    st = s.standard
    dh_plus, dh_minus = st.distribution(2, 1), st.distribution(2, -1)
    one_plus_phi = s.model.identity() + s.base.phi
    plus = Distribution.from_spans([one_plus_phi @ u for u in dh_plus.spans], "D_phih(+lambda)")
    minus = Distribution.from_spans([one_plus_phi @ u for u in dh_minus.spans], "D_phih(-lambda)")
    lam, n, form, g = s.lam, s.model.n, s.form, s.ms.g

    def eig_eq(p):
        ph = s.phi_h.value(p)
        return ([ph @ u.value(p) - lam * u.value(p) for u in plus.spans]
                + [ph @ u.value(p) + lam * u.value(p) for u in minus.spans])

    def spectrum(p):
        ev = np.sort(np.linalg.eigvals(s.phi_h.value(p)).real)
        return ev - np.r_[[-lam] * n, 0.0, [lam] * n]

    def orth(p):
        return plus.matrix(p).T @ g.value(p) @ minus.matrix(p)

    cross = [transversality_check([a, b, s.base.xi], points[:1])
             for a in (plus, minus) for b in (dh_plus, dh_minus)]
    checks = {
        "eigen_equations": scan("phi_h_eigen_equations", eig_eq, points, tol),
        "spectrum": scan("phi_h_spectrum", spectrum, points, tol),
        "orthogonal": scan("phi_h_eigenspaces_orthogonal", orth, points, tol),
        "legendre_plus": is_legendre(form, plus, points, tol),
        "legendre_minus": is_legendre(form, minus, points, tol),
        "involutive_plus": is_involutive(plus, points, tol),
        "involutive_minus": is_involutive(minus, points, tol),
        "splitting_phi_h": transversality_check([plus, minus, s.base.xi], points[:1]),
        "splitting_h": transversality_check([dh_plus, dh_minus, s.base.xi], points[:1]),
        "cross_transversal": combine("cross_transversal", cross),
    }
    return Eigensplitting(plus, minus, checks)


# ---------------------------------------------------------------------------
# standard bi-paracontact structure


def standard_bipara(s: KappaMuStructure, points: Sequence[Point] | None = None, tol: float = 1e-8) -> BiParacontact:
    """``(phi h / lambda, h / lambda, phi)``."""
    s.require_non_sasakian()
    lam = s.lam
    return build_biparacontact(s.phi_h / lam, s.base.h / lam, s.form, points, tol)


def standard_operator_checks(s: KappaMuStructure, points: Sequence[Point], tol: float) -> dict[str, Check]:
    st = s.standard
    im, lam = s.boeckx, s.lam
    h, phi, ph = s.base.h, s.base.phi, s.phi_h
    return {
        "phi3_is_phi": scan("phi3_equals_phi", lambda p: st.phi3.value(p) - phi.value(p), points, tol),
        "h1": scan("h1_formula", lambda p: st.h(1).value(p) + im * h.value(p), points, tol),
        "h2": scan("h2_formula", lambda p: st.h(2).value(p) - im * ph.value(p) - lam * phi.value(p), points, tol),
        "h3": scan("h3_formula", lambda p: st.h(3).value(p) - h.value(p), points, tol),
    }


# ---------------------------------------------------------------------------
# induced metrics


def induced_metric(b: BiParacontact, alpha: int) -> MetricStructure:
    """``g_alpha = d eta(., phi_alpha .) + eta (x) eta``; the sign of the first term flips for alpha = 3."""
    sign = -1.0 if alpha == 3 else 1.0
    g = sign * b.form.deta.compose(b.phi(alpha)) + outer_forms(b.eta, b.eta)
    return MetricStructure(b.structures[alpha], as_metric(g))


def induced_metrics(s: KappaMuStructure) -> tuple[MetricStructure, MetricStructure]:
    st = s.standard
    return induced_metric(st, 1), induced_metric(st, 2)


def expected_induced_values(kappa: float, mu: float) -> dict[str, float]:
    alpha, lam = 1 - mu / 2, np.sqrt(1 - kappa)
    return {"kappa1": alpha ** 2 - 1, "mu1": 2 * (1 - lam), "kappa2": kappa - 2 + alpha ** 2, "mu2": 2.0}


def _fit_check(name: str, ms: MetricStructure, kappa: float, mu: float, points: Sequence[Point],
               tol: float, fit_tol: float) -> Check:
    s = ms.base
    fit = fit_nullity(ms.levi_civita, s.h, s.xi, s.eta, points)
    mu_fit = fit.mu if fit.mu is not None else mu
    dev = max(abs(fit.kappa - kappa), abs(mu_fit - mu))
    c = nullity_check(name, ms.levi_civita, s.h, s.xi, s.eta, kappa, mu, points, tol)
    return Check(name, bool(c) and dev <= fit_tol, max(c.residual, dev), tol, c.worst,
                 {**c.detail, "kappa_expected": _sig(kappa), "mu_expected": _sig(mu),
                  "fit_deviation": float(f"{dev:.3g}")})


def verify_indotte(s: KappaMuStructure, points: Sequence[Point], tol: float,
                   fit_tol: float = 1e-7) -> dict[str, Check]:
    s.require_non_sasakian()
    ex = expected_induced_values(s.kappa, s.mu)
    g1, g2 = induced_metrics(s)
    out: dict[str, Check] = {}
    for label, ms, k, m in (("g1", g1, ex["kappa1"], ex["mu1"]), ("g2", g2, ex["kappa2"], ex["mu2"])):
        out[f"{label}_metric_structure"] = ms.is_metric_structure(points, tol)
        out[f"{label}_signature"] = ms.signature_check(points)
        out[f"{label}_nullity"] = _fit_check(f"{label}_paracontact_nullity", ms, k, m, points, tol, fit_tol)
        out[f"{label}_integrability"] = ms.integrability_check(points, tol)["nabla_phi"]
        out[f"{label}_reeb_gradient"] = ms.reeb_gradient_check(points, tol)
        out[f"{label}_curvature_formula"] = ms.curvature_formula_check(points, tol)
        out.update({f"{label}_{k2}": v for k2, v in paracontact_connection_checks(ms, points, tol).items()})

    ps = g1.para_sasakian_check(points, tol)
    flag = abs(s.boeckx) <= tol
    out["para_sasakian_iff_IM_zero"] = Check("para_sasakian_iff_IM_zero", bool(ps) == flag, ps.residual, tol,
                                             ps.worst, {"I_M": _sig(s.boeckx), "para_sasakian": bool(ps)})
    return out


def paracontact_connection_checks(ms: MetricStructure, points: Sequence[Point], tol: float) -> dict[str, Check]:
    """Parallel tensors and the xi-torsion of the canonical paracontact connection."""
    s = ms.base
    pc = paracontact_canonical(ms)
    phih = s.phi @ s.h

    def torsion_xi(p):
        return np.einsum("kij,j->ki", pc.torsion_tensor.value(p), s.xi.value(p)) + phih.value(p)

    return {
        "pc_eta": scan("pc_parallel_eta", pc.nabla_form(s.eta).value, points, tol),
        "pc_metric": scan("pc_parallel_metric", pc.nabla_bilinear(ms.g).value, points, tol),
        "pc_phi": scan("pc_parallel_phi", pc.nabla_tensor(s.phi).value, points, tol),
        "pc_torsion_xi": scan("pc_torsion_xi", torsion_xi, points, tol),
    }


# ---------------------------------------------------------------------------
# connections


def read_off_coefficients(b: BiParacontact, conn: Connection, points: Sequence[Point]) -> tuple[np.ndarray, float]:
    """Fit ``conn phi_alpha = eta (x) sum_beta C[alpha, beta] phi_beta``; returns (C, residual).

    ``C`` is indexed from 1 (row/column 0 unused).
    """
    coef = np.zeros((4, 4))
    worst = 0.0
    for a in (1, 2, 3):
        d = conn.nabla_tensor(b.phi(a))
        rows, rhs = [], []
        for p in points:
            basis = [np.einsum("i,kl->ikl", b.eta.value(p), b.phi(c).value(p)).ravel() for c in (1, 2, 3)]
            rows.append(np.column_stack(basis))
            rhs.append(d.value(p).ravel())
        m, r = np.vstack(rows), np.concatenate(rhs)
        c, *_ = np.linalg.lstsq(m, r, rcond=None)
        coef[a, 1:] = c
        worst = max(worst, float(np.abs(m @ c - r).max()))
    return coef, worst


def connection_identifications(s: KappaMuStructure, points: Sequence[Point], tol: float) -> dict[str, Check]:
    st = s.standard
    split = phi_h_eigendecomposition(s, points, tol)
    form, xi, eta = s.form, s.base.xi, s.base.eta
    n1, n2, n3, nc = st.connections[1], st.connections[2], st.connections[3], st.nabla_c
    out: dict[str, Check] = {}

    bl2 = check_bilegendrian_axioms(n2, form, st.distribution(2, 1), st.distribution(2, -1), points, tol)
    bl1 = check_bilegendrian_axioms(n1, form, split.plus, split.minus, points, tol)
    out["nabla2_bilegendrian_Dh"] = combine("nabla2_bilegendrian_Dh", list(bl2.values()))
    out["nabla1_bilegendrian_Dphih"] = combine("nabla1_bilegendrian_Dphih", list(bl1.values()))

    diff = n2.difference(n1)
    hor = form.horizontal_projector()

    def s_xi(p):
        return np.einsum("kij,i->kj", diff.value(p), xi.value(p)) + s.phi_h.value(p)

    def s_rest(p):
        d, pr = diff.value(p), hor.value(p)
        return np.concatenate([np.einsum("kij,j->ki", d, xi.value(p)).ravel(),
                               np.einsum("kab,ai,bj->kij", d, pr, pr).ravel()])

    out["difference_xi"] = scan("difference_xi_equals_minus_phi_h", s_xi, points, tol)
    out["difference_elsewhere"] = scan("difference_vanishes_elsewhere", s_rest, points, tol)

    dphi = n1.nabla_tensor(s.base.phi)
    out["nabla1_xi_phi"] = scan("nabla1_xi_phi_equals_2h",
                                lambda p: np.einsum("ikl,i->kl", dphi.value(p), xi.value(p)) - 2 * s.base.h.value(p),
                                points, tol)

    def agree(p):
        pr = hor.value(p)
        g = nc.coeffs(p).v
        return np.concatenate([np.einsum("kab,ai,bj->kij", c.coeffs(p).v - g, pr, pr).ravel()
                               for c in (n1, n2, n3)])

    out["agree_on_D"] = scan("connections_agree_on_D", agree, points, tol)
    out["nabla_c_xi"] = scan("nabla_c_parallel_xi", nc.nabla_vector(xi).value, points, tol)
    out["nabla_c_eta"] = scan("nabla_c_parallel_eta", nc.nabla_form(eta).value, points, tol)
    out["nabla_c_deta"] = scan("nabla_c_parallel_deta", nc.nabla_bilinear(form.deta).value, points, tol)

    alpha, lam = 1 - s.mu / 2, s.lam
    coef, resid = read_off_coefficients(st, nc, points)
    want = np.zeros((4, 4))
    want[1, 2] = -2 / 3 * alpha
    want[2, 1], want[2, 3] = 2 / 3 * alpha, 2 / 3 * lam
    want[3, 2] = 2 / 3 * lam
    dev = float(np.abs(coef - want).max())
    out["nabla_c_phi_coefficients"] = Check(
        "nabla_c_phi_coefficients", dev <= tol and resid <= tol, max(dev, resid), tol, None,
        {"phi1_on_phi2": _sig(coef[1, 2]), "phi2_on_phi1": _sig(coef[2, 1]), "phi2_on_phi3": _sig(coef[2, 3]),
         "phi3_on_phi2": _sig(coef[3, 2]), "pattern_residual": float(f"{resid:.3g}")})

    phi, ph = s.base.phi, s.phi_h

    def torsion(p):
        e = eta.value(p)
        v = alpha * phi.value(p) + ph.value(p)
        want_t = (2 / 3) * (np.einsum("j,ki->kij", e, v) - np.einsum("i,kj->kij", e, v)) \
            + 2 * np.einsum("ij,k->kij", form.deta.value(p), xi.value(p))
        return nc.torsion_tensor.value(p) - want_t

    out["nabla_c_torsion"] = scan("nabla_c_torsion_formula", torsion, points, tol)
    return out


# ---------------------------------------------------------------------------
# Pang form on the phi h eigenfoliations


def pang_ratio_check(s: KappaMuStructure, factor: float, points: Sequence[Point], tol: float,
                     name: str = "pang_form") -> Check:
    """``Pi = factor * g`` on both ``D_phih(+lambda)`` and ``D_phih(-lambda)``."""
    split = phi_h_eigendecomposition(s, points, tol)
    g = s.ms.g

    def res(p):
        out = []
        for d in (split.plus, split.minus):
            u = d.matrix(p)
            out.append((pang_gram(s.form, d, p) - factor * u.T @ g.value(p) @ u).ravel())
        return np.concatenate(out)

    c = scan(name, res, points, tol)
    c.detail = {"factor": _sig(factor), "measured_factor": _sig(measured_pang_factor(s, split, points[0]))}
    return c


def measured_pang_factor(s: KappaMuStructure, split: Eigensplitting, p: Point) -> float:
    u = split.plus.matrix(p)
    gram = u.T @ s.ms.g.value(p) @ u
    return float(np.trace(pang_gram(s.form, split.plus, p)) / np.trace(gram))


def pang_classification(s: KappaMuStructure, points: Sequence[Point], tol: float) -> dict[str, str]:
    split = phi_h_eigendecomposition(s, points, tol)
    return {"plus": classify_pang(s.form, split.plus, points, tol),
            "minus": classify_pang(s.form, split.minus, points, tol)}


def expected_pang_class(boeckx: float, tol: float) -> str:
    if abs(boeckx) <= tol:
        return "flat"
    return "positive" if boeckx > 0 else "negative"


# ---------------------------------------------------------------------------
# reconstruction of a (kappa, mu)-structure from a bi-paracontact structure


def main3_reconstruction(b: BiParacontact, points: Sequence[Point], tol: float, fit_tol: float = 1e-7,
                         declared_mu: float | None = None) -> dict:
    """Read off the canonical-connection constants, rebuild the metrics and fit their nullity constants."""
    integ = b.is_integrable(points, tol)
    if not integ:
        raise PreconditionError("main3 needs an integrable structure")
    nc = b.nabla_c
    deta_par = scan("nabla_c_parallel_deta", nc.nabla_bilinear(b.form.deta).value, points, tol)
    if not deta_par:
        raise PreconditionError("canonical connection does not parallelize d eta")
    coef, resid = read_off_coefficients(b, nc, points)
    a, bc = float(coef[2, 1]), float(coef[3, 2])
    pattern = max(abs(coef[1, 2] + a), abs(coef[2, 3] - bc), resid,
                  *(abs(coef[i, j]) for i, j in ((1, 1), (1, 3), (2, 2), (3, 1), (3, 3))))
    if abs(a) <= tol:
        raise PreconditionError("read-off constant a vanishes: degenerate reconstruction")

    g1, g2, g3 = (induced_metric(b, k) for k in (1, 2, 3))
    hor = b.form.horizontal_projector()
    h = {k: b.h(k) for k in (1, 2, 3)}

    def pi1_eigs(p):
        pr = hor.value(p)
        u, sv, _ = np.linalg.svd(pr)
        q = u[:, sv > 0.5]
        pi = g1.g.value(p) @ h[1].value(p)
        pi = 0.5 * (pi + pi.T)
        return np.linalg.eigvalsh(q.T @ pi @ q)

    eigs = np.concatenate([pi1_eigs(p) for p in points])
    if not (np.all(eigs > tol) or np.all(eigs < -tol)):
        raise PreconditionError("pi1 = g1(h1 ., .) is not definite on the contact distribution")
    if np.sign(eigs[0]) != np.sign(a):
        raise PreconditionError("sign of pi1 does not match the sign of the read-off constant a")

    f = {k: b.phi(k) for k in (1, 2, 3)}
    confronto = scan("h_from_constants", lambda p: np.concatenate([
        (h[1].value(p) + 1.5 * a * f[2].value(p)).ravel(),
        (h[2].value(p) - 1.5 * (a * f[1].value(p) + bc * f[3].value(p))).ravel(),
        (h[3].value(p) - 1.5 * bc * f[2].value(p)).ravel()]), points, tol)

    lc3 = g3.levi_civita

    def relation(p):
        pr = hor.value(p)
        gl = lc3.coeffs(p).v
        proj = np.eye(b.model.dim) - np.outer(b.xi.value(p), b.eta.value(p))
        diff = nc.coeffs(p).v - np.einsum("km,mij->kij", proj, gl)
        return np.einsum("kab,ai,bj->kij", diff, pr, pr)

    expected = {
        "kappa1": 9 / 4 * a ** 2 - 1, "mu1": 2 - 3 * bc,
        "kappa2": 9 / 4 * (a ** 2 - bc ** 2) - 1, "mu2": 2.0,
        "kappa3": 1 - 9 / 4 * bc ** 2,
    }
    fits = {k: fit_nullity(ms.levi_civita, ms.base.h, b.xi, b.eta, points) for k, ms in
            (("1", g1), ("2", g2), ("3", g3))}

    def dev(k, kappa, mu):
        fk = fits[k]
        m = fk.mu if fk.mu is not None else mu
        return max(abs(fk.kappa - kappa), abs(m - mu), fk.residual)

    checks = {
        "integrable": integ,
        "nabla_c_deta": deta_par,
        "phi_pattern": Check("nabla_c_phi_pattern", pattern <= tol, float(pattern), tol),
        "g3_riemannian": g3.signature_check(points),
        "g3_metric_structure": g3.is_metric_structure(points, tol),
        "h_from_constants": confronto,
        "connection_relation": scan("nabla_c_vs_g3_on_D", relation, points, tol),
        "fit1": _value_check("nullity_g1", dev("1", expected["kappa1"], expected["mu1"]), fit_tol),
        "fit2": _value_check("nullity_g2", dev("2", expected["kappa2"], expected["mu2"]), fit_tol),
        "kappa3": _value_check("kappa3", abs(fits["3"].kappa - expected["kappa3"]), fit_tol),
    }
    mu3 = fits["3"].mu
    report = {"a": a, "b": bc, "expected": expected,
              "fitted": {k: {"kappa": v.kappa, "mu": v.mu, "residual": v.residual} for k, v in fits.items()},
              "mu3_fitted": mu3, "mu3_formula_plus": 2 + 3 * a, "mu3_formula_minus": 2 - 3 * a}
    if declared_mu is not None and mu3 is not None:
        checks["mu3"] = _value_check("mu3_matches_declared", abs(mu3 - declared_mu), fit_tol)
    report["checks"] = checks
    return report


def _value_check(name: str, dev: float, tol: float) -> Check:
    return Check(name, dev <= tol, float(dev), tol)


# ---------------------------------------------------------------------------
# supplementary structures


def main4_supplementary(s: KappaMuStructure, points: Sequence[Point], tol: float) -> tuple[BiParacontact, dict]:
    """The second integrable structure built from ``h2``; branch chosen by ``|I_M|``."""
    s.require_non_sasakian()
    im, lam = s.boeckx, s.lam
    alpha = lam * im
    if abs(abs(im) - 1) <= 1e-12:
        raise PreconditionError("I_M = ±1")
    st = s.standard
    h2 = st.h(2)
    h, phi, ph = s.base.h, s.base.phi, s.phi_h
    root = float(np.sqrt(abs(alpha ** 2 - lam ** 2)))
    if abs(im) > 1:
        branch = "i"
        b = build_biparacontact(h2 / root, h / lam, s.form, points, tol)
        expected = {1: lambda p: -np.sqrt(im ** 2 - 1) * h.value(p),
                    2: lambda p: im * ph.value(p) + lam * phi.value(p),
                    3: lambda p: 0 * h.value(p)}
        normal_third = 3
    else:
        branch = "ii"
        first = h / lam
        b = build_biparacontact(first, first @ h2 / root, s.form, points, tol)
        expected = {1: lambda p: im * ph.value(p) + lam * phi.value(p),
                    2: lambda p: 0 * h.value(p),
                    3: lambda p: np.sqrt(1 - im ** 2) * h.value(p)}
        normal_third = 2
    checks: dict[str, Check] = {
        f"h{k}": scan(f"h{k}_supplementary", lambda p, k=k: b.h(k).value(p) - expected[k](p), points, tol)
        for k in (1, 2, 3)}
    checks["integrable"] = b.is_integrable(points, tol)
    checks["legendrian"] = b.is_legendrian(points, tol)
    normal = b.is_normal(points, tol)
    checks["not_normal"] = Check("structure_not_normal", not normal.passed, normal.residual, tol)
    checks["third_structure_normal"] = scan(
        f"N1_phi{normal_third}_vanishes", b.structures[normal_third].n1_tensor.value, points, tol)
    return b, {"branch": branch, "checks": checks}

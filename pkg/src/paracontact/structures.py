"""Almost contact and almost paracontact structures and their Nijenhuis-type tensors.

``sign = -1`` is the contact case (``phi^2 = -I + eta (x) xi``) and ``sign = +1``
the paracontact case (``phi^2 = I - eta (x) xi``).  The same sign enters the
first Nijenhuis-type tensor as ``[phi, phi] - 2 sign d eta (x) xi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .checks import Check, PreconditionError, combine, scan
from .connections import Connection, levi_civita
from .contact import ContactForm
from .jets import Jet, jeinsum
from .kernel import (Field, MetricField, Model, OneForm, Point, Tensor11, VectorField,
                     frame_brackets, lie_derivative_form_jet, lie_derivative_tensor_jet)

CONTACT, PARACONTACT = -1, 1


class AxiomError(ValueError):
    """A structure failed one of its defining identities."""


def nijenhuis_jet(model: Model, t: Jet) -> Jet:
    """``[T, T](E_i, E_j)`` as ``nt[k, i, j]``."""
    t2 = jeinsum("km,ml->kl", t, t)
    out = jeinsum("km,mij->kij", t2, frame_brackets(model, None, None)) \
        + frame_brackets(model, t, t) \
        - jeinsum("km,mij->kij", t, frame_brackets(model, t, None)) \
        - jeinsum("km,mij->kij", t, frame_brackets(model, None, t))
    return out


def nijenhuis(t: Tensor11, x: VectorField, y: VectorField, p: Point) -> np.ndarray:
    return np.einsum("kij,i,j->k", nijenhuis_jet(t.model, t.at(p)).v, x.value(p), y.value(p))


@dataclass(frozen=True, eq=False)
class AlmostContact:
    phi: Tensor11
    xi: VectorField
    eta: OneForm
    sign: int = CONTACT

    def __post_init__(self):
        if self.sign not in (CONTACT, PARACONTACT):
            raise ValueError("sign must be -1 (contact) or +1 (paracontact)")

    @property
    def model(self) -> Model:
        return self.phi.model

    @cached_property
    def form(self) -> ContactForm:
        return ContactForm(self.eta, self.xi)

    @property
    def is_contact(self) -> bool:
        return self.sign == CONTACT

    # tensors ---------------------------------------------------------------

    @cached_property
    def n1_tensor(self) -> Field:
        m = self.model
        deta = self.form.deta

        def fn(p: Point) -> Jet:
            return nijenhuis_jet(m, self.phi.at(p)) \
                - 2.0 * self.sign * jeinsum("ij,k->kij", deta.at(p), self.xi.at(p))

        return Field(m, fn, "N1")

    @cached_property
    def n2_tensor(self) -> Field:
        """``[i, j]``: ``(L_{phi E_i} eta)(E_j) - (L_{phi E_j} eta)(E_i)``."""
        m = self.model

        def fn(p: Point) -> Jet:
            phi, eta = self.phi.at(p), self.eta.at(p)
            a = jeinsum("ai,ja->ij", phi, eta.grad()) - jeinsum("k,kij->ij", eta, frame_brackets(m, phi, None))
            return a - jeinsum("ji->ij", a)

        return Field(m, fn, "N2")

    @cached_property
    def n3(self) -> Tensor11:
        m = self.model
        return Tensor11(m, lambda p: lie_derivative_tensor_jet(m, self.xi.at(p), self.phi.at(p)), "N3")

    @cached_property
    def n4(self) -> OneForm:
        m = self.model
        return OneForm(m, lambda p: lie_derivative_form_jet(m, self.xi.at(p), self.eta.at(p)), "N4")

    @cached_property
    def h(self) -> Tensor11:
        return Tensor11(self.model, lambda p: 0.5 * self.n3.at(p), "h")

    def n1(self, x: VectorField, y: VectorField, p: Point) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.n1_tensor.value(p), x.value(p), y.value(p))

    def n2(self, x: VectorField, y: VectorField, p: Point) -> float:
        return float(x.value(p) @ self.n2_tensor.value(p) @ y.value(p))

    # checks ----------------------------------------------------------------

    def axiom_checks(self, points: Sequence[Point], tol: float) -> dict[str, Check]:
        m = self.model
        idm = np.eye(m.dim)

        def square(p):
            phi, xi, eta = self.phi.value(p), self.xi.value(p), self.eta.value(p)
            return phi @ phi - self.sign * (idm - np.outer(xi, eta))

        out = {
            "eta_xi": scan("eta_xi", lambda p: self.eta.value(p) @ self.xi.value(p) - 1.0, points, tol),
            "phi_xi": scan("phi_xi", lambda p: self.phi.value(p) @ self.xi.value(p), points, tol),
            "eta_phi": scan("eta_phi", lambda p: self.eta.value(p) @ self.phi.value(p), points, tol),
            "phi_square": scan("phi_square", square, points, tol),
        }
        if self.sign == PARACONTACT:
            out["eigen_ranks"] = self._eigen_rank_check(points)
        return out

    def _eigen_rank_check(self, points: Sequence[Point]) -> Check:
        n = self.model.n
        bad = 0
        for p in points:
            ev = np.linalg.eigvals(self.phi.value(p)).real
            if (np.sum(ev > 0.5), np.sum(ev < -0.5)) != (n, n):
                bad += 1
        return Check("eigen_ranks", bad == 0, float(bad), 0.0, None, {"n": n})

    def validate(self, points: Sequence[Point], tol: float) -> None:
        for name, c in self.axiom_checks(points, tol).items():
            if not c:
                raise AxiomError(f"{name} fails: residual {c.residual:.3g} at {c.worst}")

    def rank_check(self, points: Sequence[Point]) -> Check:
        n = self.model.n
        ranks = {int(np.linalg.matrix_rank(self.phi.value(p), tol=1e-8)) for p in points}
        return Check("phi_rank", ranks == {2 * n}, float(abs(max(ranks) - 2 * n)), 0.0, None,
                     {"ranks": sorted(ranks)})

    def lemma2_tensor(self) -> Field:
        """``phi N1(X,Y) + N1(phi X, Y) - N2(X,Y) xi - eta(X) N3(Y)`` as ``[k, i, j]``."""
        if self.sign != CONTACT:
            raise PreconditionError("the N1/N2/N3 identity is stated for almost contact structures only")

        def fn(p: Point) -> Jet:
            phi, n1 = self.phi.at(p), self.n1_tensor.at(p)
            return (jeinsum("km,mij->kij", phi, n1) + jeinsum("kmj,mi->kij", n1, phi)
                    - jeinsum("ij,k->kij", self.n2_tensor.at(p), self.xi.at(p))
                    - jeinsum("i,kj->kij", self.eta.at(p), self.n3.at(p)))

        return Field(self.model, fn)

    def lemma2_residual(self, x: VectorField, y: VectorField, p: Point) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.lemma2_tensor().value(p), x.value(p), y.value(p))

    def normality_cascade(self, points: Sequence[Point], tol: float) -> dict[str, Check]:
        return {
            "N1": scan("N1", self.n1_tensor.value, points, tol),
            "N2": scan("N2", self.n2_tensor.value, points, tol),
            "N3": scan("N3", self.n3.value, points, tol),
            "N4": scan("N4", self.n4.value, points, tol),
        }


def signature(g: np.ndarray, tol: float = 1e-9) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(0.5 * (g + g.T))
    return int(np.sum(ev > tol)), int(np.sum(ev < -tol))


@dataclass(frozen=True, eq=False)
class MetricStructure:
    base: AlmostContact
    g: MetricField

    @property
    def model(self) -> Model:
        return self.base.model

    @cached_property
    def levi_civita(self) -> Connection:
        return levi_civita(self.g)

    def compatibility_check(self, points: Sequence[Point], tol: float) -> Check:
        s = self.base

        def res(p):
            phi, g, eta = s.phi.value(p), self.g.value(p), s.eta.value(p)
            return phi.T @ g @ phi + s.sign * g - s.sign * np.outer(eta, eta)

        return scan("compatible_metric", res, points, tol)

    def associated_check(self, points: Sequence[Point], tol: float) -> Check:
        s = self.base
        return scan("associated", lambda p: self.g.value(p) @ s.phi.value(p) - s.form.deta.value(p),
                    points, tol)

    def signature_check(self, points: Sequence[Point]) -> Check:
        n = self.model.n
        want = (2 * n + 1, 0) if self.base.is_contact else (n + 1, n)
        sigs = {signature(self.g.value(p)) for p in points}
        return Check("signature", sigs == {want}, 0.0 if sigs == {want} else 1.0, 0.0, None,
                     {"signature": [list(s) for s in sorted(sigs)], "expected": list(want)})

    def h_symmetry_check(self, points: Sequence[Point], tol: float) -> Check:
        s = self.base

        def res(p):
            gh = self.g.value(p) @ s.h.value(p)
            phi, h = s.phi.value(p), s.h.value(p)
            return np.concatenate([(gh - gh.T).ravel(), (h @ phi + phi @ h).ravel()])

        return scan("h_symmetric_anticommuting", res, points, tol)

    def is_metric_structure(self, points: Sequence[Point], tol: float) -> Check:
        checks = list(self.base.axiom_checks(points, tol).values())
        checks += [self.compatibility_check(points, tol), self.associated_check(points, tol),
                   self.signature_check(points)]
        return combine("metric_structure", checks)

    # identities involving the Levi-Civita connection ----------------------

    def _plus_h(self, p: Point) -> np.ndarray:
        """``I + h`` in the contact case, ``I - h`` in the paracontact case."""
        s = self.base
        return np.eye(self.model.dim) - s.sign * s.h.value(p)

    def integrability_check(self, points: Sequence[Point], tol: float,
                            lc: Connection | None = None) -> dict[str, Check]:
        s = self.base
        lc = lc or self.levi_civita
        dphi = lc.nabla_tensor(s.phi)

        def rhs(p):
            a, g, xi, eta = self._plus_h(p), self.g.value(p), s.xi.value(p), s.eta.value(p)
            # contact: g(AX,Y) xi - eta(Y) AX; paracontact: eta(Y) AX - g(AX,Y) xi
            t = np.einsum("ai,al,k->ikl", a, g, xi) - np.einsum("l,ki->ikl", eta, a)
            return t if s.sign == CONTACT else -t

        def consequence(p):
            phih = s.phi.value(p) @ s.h.value(p)
            eta = s.eta.value(p)
            want = 2 * (np.einsum("j,ki->kij", eta, phih) - np.einsum("i,kj->kij", eta, phih))
            return s.n1_tensor.value(p) - want

        return {
            "nabla_phi": scan("integrability_condition", lambda p: dphi.value(p) - rhs(p), points, tol),
            "n1_consequence": scan("n1_from_integrability", consequence, points, tol),
        }

    def reeb_gradient_check(self, points: Sequence[Point], tol: float,
                            lc: Connection | None = None) -> Check:
        s = self.base
        lc = lc or self.levi_civita
        nxi = lc.nabla_vector(s.xi)

        def res(p):
            phi, h = s.phi.value(p), s.h.value(p)
            # contact: -phi - phi h; paracontact: -phi + phi h
            want = -phi + s.sign * (phi @ h)
            return nxi.value(p) - want.T

        return scan("reeb_gradient", res, points, tol)

    def para_sasakian_check(self, points: Sequence[Point], tol: float,
                            lc: Connection | None = None) -> Check:
        """``(nabla_X phi) Y = -g(X, Y) xi + eta(Y) X``."""
        s = self.base
        if s.sign != PARACONTACT:
            raise PreconditionError("para-Sasakian condition needs a paracontact structure")
        lc = lc or self.levi_civita
        dphi = lc.nabla_tensor(s.phi)

        def res(p):
            g, xi, eta = self.g.value(p), s.xi.value(p), s.eta.value(p)
            want = -np.einsum("il,k->ikl", g, xi) + np.einsum("l,ki->ikl", eta, np.eye(self.model.dim))
            return dphi.value(p) - want

        return scan("para_sasakian", res, points, tol)

    def curvature_formula_check(self, points: Sequence[Point], tol: float,
                                lc: Connection | None = None) -> Check:
        """Paracontact expression of ``R(X, Y) xi`` through ``nabla phi`` and ``nabla h``."""
        s = self.base
        if s.sign != PARACONTACT:
            raise PreconditionError("this curvature formula is the paracontact one")
        lc = lc or self.levi_civita
        dphi = lc.nabla_tensor(s.phi)
        dh = lc.nabla_tensor(s.h)
        curv = lc.curvature_tensor

        def res(p):
            xi = s.xi.value(p)
            lhs = np.einsum("klij,l->kij", curv.value(p), xi)  # R(E_i, E_j) xi
            dp, dhv, phi, h = dphi.value(p), dh.value(p), s.phi.value(p), s.h.value(p)
            a = np.einsum("ikj->kij", dp)                      # (nabla_i phi) E_j
            b = np.einsum("ikm,mj->kij", dp, h)                # (nabla_i phi) h E_j
            c = np.einsum("km,imj->kij", phi, dhv)             # phi (nabla_i h) E_j
            rhs = -a + np.swapaxes(a, 1, 2) + b + c - np.swapaxes(b, 1, 2) - np.swapaxes(c, 1, 2)
            return lhs - rhs

        return scan("paracontact_curvature_formula", res, points, tol)

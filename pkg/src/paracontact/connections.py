"""Affine connections stored as frame coefficients.

``gamma[k, i, j]`` is the ``E_k`` component of ``nabla_{E_i} E_j``.  Torsion,
curvature and covariant derivatives of tensors are computed from these
coefficient jets; curvature differentiates them once more, so chart models
must supply coefficients of jet order at least one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .checks import Check, PreconditionError, combine, scan
from .contact import ContactForm, Distribution, transversality_check
from .jets import Jet, jeinsum, jinv
from .kernel import (Bilinear, Field, Model, OneForm, Point, Tensor11,
                     VectorField, bracket_jet)

if TYPE_CHECKING:
    from .structures import MetricStructure

TAGS = ("levi_civita", "paracontact_canonical", "nabla1", "nabla2", "nabla3", "canonical_c", "user")


class DegenerateMetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Connection:
    gamma: Field
    tag: str = "user"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown connection tag {self.tag!r}")

    @property
    def model(self) -> Model:
        return self.gamma.model

    def coeffs(self, p: Point) -> Jet:
        return self.gamma.at(p)

    # affine combinations -------------------------------------------------

    @staticmethod
    def barycenter(conns: Sequence["Connection"], tag: str = "user") -> "Connection":
        m = conns[0].model
        w = 1.0 / len(conns)

        def fn(p: Point) -> Jet:
            out = w * conns[0].coeffs(p)
            for c in conns[1:]:
                out = out + w * c.coeffs(p)
            return out

        return Connection(Field(m, fn), tag)

    def difference(self, other: "Connection") -> Field:
        """The (1,2)-tensor ``S(X, Y) = nabla_X Y - other_X Y`` as ``s[k, i, j]``."""
        return Field(self.model, lambda p: self.coeffs(p) - other.coeffs(p))

    # covariant derivatives -----------------------------------------------

    def covariant_jet(self, x: Jet, y: Jet, p: Point) -> Jet:
        return jeinsum("i,ki->k", x, y.grad()) + jeinsum("i,kij,j->k", x, self.coeffs(p), y)

    def nabla(self, x: VectorField, y: VectorField) -> VectorField:
        return VectorField(self.model, lambda p: self.covariant_jet(x.at(p), y.at(p), p))

    def nabla_vector(self, y: VectorField) -> Field:
        """``[i, k]``: component k of ``nabla_{E_i} Y``."""
        return Field(self.model, lambda p: jeinsum("ki->ik", y.at(p).grad())
                     + jeinsum("kij,j->ik", self.coeffs(p), y.at(p)))

    def nabla_tensor(self, t: Tensor11) -> Field:
        """``[i, k, l]``: ``((nabla_{E_i} T) E_l)^k``."""
        def fn(p: Point) -> Jet:
            tj, g = t.at(p), self.coeffs(p)
            return (jeinsum("kli->ikl", tj.grad()) + jeinsum("kim,ml->ikl", g, tj)
                    - jeinsum("km,mil->ikl", tj, g))
        return Field(self.model, fn)

    def nabla_form(self, eta: OneForm) -> Field:
        """``[i, l]``: ``(nabla_{E_i} eta)(E_l)``."""
        return Field(self.model, lambda p: jeinsum("li->il", eta.at(p).grad())
                     - jeinsum("mil,m->il", self.coeffs(p), eta.at(p)))

    def nabla_bilinear(self, b: Bilinear) -> Field:
        """``[i, j, l]``: ``(nabla_{E_i} B)(E_j, E_l)``."""
        def fn(p: Point) -> Jet:
            bj, g = b.at(p), self.coeffs(p)
            return (jeinsum("jli->ijl", bj.grad()) - jeinsum("mij,ml->ijl", g, bj)
                    - jeinsum("mil,jm->ijl", g, bj))
        return Field(self.model, fn)

    # torsion and curvature -----------------------------------------------

    @cached_property
    def torsion_tensor(self) -> Field:
        """``[k, i, j]``: ``T(E_i, E_j)^k``."""
        m = self.model
        return Field(m, lambda p: self.coeffs(p) - jeinsum("kji->kij", self.coeffs(p)) - m.const(m.c))

    @cached_property
    def curvature_tensor(self) -> Field:
        """``[k, l, i, j]``: ``(R(E_i, E_j) E_l)^k``."""
        m = self.model

        def fn(p: Point) -> Jet:
            g = self.coeffs(p)
            dg = g.grad()
            # antisymmetrizing one half keeps R(X, Y) = -R(Y, X) exact in floating point
            half = jeinsum("kjli->klij", dg) + jeinsum("kim,mjl->klij", g, g)
            out = half - jeinsum("klij->klji", half)
            if m.is_frame:
                out = out - jeinsum("mij,kml->klij", m.c, g)
            return out

        return Field(m, fn)

    @cached_property
    def ricci_tensor(self) -> Field:
        """``[a, b]``: ``trace(Z -> R(Z, E_a) E_b)``."""
        return Field(self.model, lambda p: jeinsum("ibia->ab", self.curvature_tensor.at(p)))

    def torsion(self, x: VectorField, y: VectorField, p: Point) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.torsion_tensor.value(p), x.value(p), y.value(p))

    def curvature(self, x: VectorField, y: VectorField, z: VectorField, p: Point) -> np.ndarray:
        return np.einsum("klij,i,j,l->k", self.curvature_tensor.value(p), x.value(p), y.value(p), z.value(p))

    def ricci(self, x: VectorField, y: VectorField, p: Point) -> float:
        return float(x.value(p) @ self.ricci_tensor.value(p) @ y.value(p))


# --------------------------------------------------------------------------
# Levi-Civita and the canonical paracontact connection


def koszul_jet(model: Model, g: Jet) -> Jet:
    gi = jinv(g)
    dg = g.grad()  # dg[a, b, x] = E_x g_ab
    k = jeinsum("jli->ijl", dg) + jeinsum("ilj->ijl", dg) - jeinsum("ijl->ijl", dg)
    if model.is_frame:
        c = model.c
        k = k + jeinsum("mij,ml->ijl", c, g) - jeinsum("mil,mj->ijl", c, g) - jeinsum("mjl,mi->ijl", c, g)
    return 0.5 * jeinsum("kl,ijl->kij", gi, k)


def levi_civita(g: Bilinear, points: Sequence[Point] | None = None) -> Connection:
    """Levi-Civita connection by the Koszul formula, solved with the inverse Gram matrix."""
    m = g.model
    for p in points if points is not None else m.sample_points(4):
        gv = g.value(p)
        if np.abs(gv - gv.T).max() > 1e-10:
            raise DegenerateMetricError(f"metric is not symmetric at {p.describe()}")
        if np.abs(np.linalg.det(gv)) < 1e-12:
            raise DegenerateMetricError(f"metric is degenerate at {p.describe()}")
    return Connection(Field(m, lambda p: koszul_jet(m, g.at(p)), "levi_civita"), "levi_civita")


def paracontact_canonical(ms: "MetricStructure", lc: Connection | None = None) -> Connection:
    """``nabla^g X Y + eta(X) phi Y + eta(Y)(phi X - phi h X) + g(X - h X, phi Y) xi``."""
    if ms.base.sign != 1:
        raise PreconditionError("the canonical paracontact connection needs a paracontact structure")
    lc = lc or ms.levi_civita
    s = ms.base
    m = s.model

    def fn(p: Point) -> Jet:
        phi, h, eta, xi, g = s.phi.at(p), s.h.at(p), s.eta.at(p), s.xi.at(p), ms.g.at(p)
        idm = m.const(np.eye(m.dim))
        phih = jeinsum("km,ml->kl", phi, h)
        return (lc.coeffs(p) + jeinsum("i,kj->kij", eta, phi) + jeinsum("j,ki->kij", eta, phi - phih)
                + jeinsum("ai,ab,bj,k->kij", idm - h, g, phi, xi))

    return Connection(Field(m, fn), "paracontact_canonical")


# --------------------------------------------------------------------------
# bi-Legendrian axioms


def splitting_projectors(l1: Distribution, l2: Distribution, xi: VectorField) -> tuple[Tensor11, Tensor11]:
    """Projectors onto ``L1`` and ``L2`` for the splitting ``TM = L1 + L2 + R xi``."""
    m = xi.model
    r1, r2 = l1.rank, l2.rank

    def basis(p: Point) -> Jet:
        from .jets import stack
        cols = [s.at(p) for s in l1.spans] + [s.at(p) for s in l2.spans] + [xi.at(p)]
        return jeinsum("ia->ai", stack(cols))

    def proj(sel: np.ndarray):
        return lambda p: jeinsum("ai,i,ib->ab", basis(p), sel, jinv(basis(p)))

    s1 = np.r_[np.ones(r1), np.zeros(r2 + 1)]
    s2 = np.r_[np.zeros(r1), np.ones(r2), 0.0]
    return Tensor11(m, proj(s1)), Tensor11(m, proj(s2))


def check_bilegendrian_axioms(conn: Connection, form: ContactForm, l1: Distribution, l2: Distribution,
                              points: Sequence[Point], tol: float) -> dict[str, Check]:
    """Per-axiom residuals for a candidate bi-Legendrian connection of ``(L1, L2)``."""
    m = conn.model
    xi = form.reeb
    trans = transversality_check([l1, l2, xi], points[:1])
    if not trans:
        raise PreconditionError("L1, L2 and xi do not span the tangent space")
    p1, p2 = splitting_projectors(l1, l2, xi)
    frame = m.frame_fields()

    def preserve(dist: Distribution):
        fields = [dist.contains(conn.nabla(x, u)) for u in dist.spans for x in frame]
        return lambda p: [f.value(p) for f in fields]

    nxi = conn.nabla_vector(xi)
    ndeta = conn.nabla_bilinear(form.deta)
    tors = conn.torsion_tensor

    def mixed_torsion(p: Point):
        t, de, xv = tors.value(p), form.deta.value(p), xi.value(p)
        out = []
        for u in l1.spans:
            for v in l2.spans:
                uv, vv = u.value(p), v.value(p)
                out.append(np.einsum("kij,i,j->k", t, uv, vv) - 2 * (uv @ de @ vv) * xv)
        return out

    def xi_torsion(p: Point):
        t = tors.value(p)
        xj = xi.at(p)
        out = []
        for x in frame:
            xv = x.value(p)
            a = bracket_jet(m, xj, (p1 @ x).at(p)).v
            b = bracket_jet(m, xj, (p2 @ x).at(p)).v
            expected = p2.value(p) @ a + p1.value(p) @ b
            out.append(np.einsum("kij,i,j->k", t, xv, xi.value(p)) - expected)
        return out

    return {
        "preserves_L1": scan("preserves_L1", preserve(l1), points, tol),
        "preserves_L2": scan("preserves_L2", preserve(l2), points, tol),
        "parallel_xi": scan("parallel_xi", nxi.value, points, tol),
        "parallel_deta": scan("parallel_deta", ndeta.value, points, tol),
        "torsion_L1_L2": scan("torsion_L1_L2", mixed_torsion, points, tol),
        "torsion_xi": scan("torsion_xi", xi_torsion, points, tol),
    }


def bilegendrian_summary(report: dict[str, Check], name: str = "bilegendrian_axioms") -> Check:
    return combine(name, list(report.values()))

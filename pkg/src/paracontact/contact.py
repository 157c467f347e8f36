"""Contact forms, the Reeb field, distributions and Legendre foliations."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .checks import Check, PreconditionError, scan
from .jets import Jet, jeinsum, jinv
from .kernel import (Bilinear, Model, OneForm, Point, Tensor11, VectorField, bracket,
                     bracket_jet, derivative)


class NotContactError(ValueError):
    pass


def d_eta_jet(model: Model, eta: Jet) -> Jet:
    """``d eta[i, j] = 1/2 (E_i eta_j - E_j eta_i - eta([E_i, E_j]))``."""
    g = eta.grad()
    out = 0.5 * (jeinsum("ji->ij", g) - g)
    if model.is_frame:
        out = out - 0.5 * jeinsum("kij,k->ij", model.c, eta)
    return out


@dataclass(frozen=True, eq=False)
class ContactForm:
    """A one-form ``eta``, optionally with its Reeb field declared up front.

    Chart models should declare the Reeb field: a solved Reeb field is one jet
    order short (it depends on ``d eta``).
    """

    eta: OneForm
    xi: VectorField | None = None

    @property
    def model(self) -> Model:
        return self.eta.model

    @cached_property
    def deta(self) -> Bilinear:
        return Bilinear(self.model, lambda p: d_eta_jet(self.model, self.eta.at(p)), "deta")

    @cached_property
    def reeb(self) -> VectorField:
        return self.xi if self.xi is not None else self.reeb_solve()

    def contact_matrix(self, p: Point) -> np.ndarray:
        """Rows: eta, then the pairings ``d eta(., E_i)``; full column rank iff contact."""
        return np.vstack([self.eta.value(p)[None, :], self.deta.value(p).T])

    def contact_check(self, points: Sequence[Point], tol: float = 1e-8) -> Check:
        worst, wp = np.inf, None
        for p in points:
            s = np.linalg.svd(self.contact_matrix(p), compute_uv=False)[-1]
            if s < worst:
                worst, wp = s, p
        return Check("contact_condition", worst > tol, float(worst), tol, wp.describe(),
                     {"min_singular_value": float(f"{worst:.3g}")})

    def reeb_solve(self) -> VectorField:
        """Solve ``eta(xi) = 1``, ``d eta(xi, E_i) = 0`` pointwise (least squares)."""
        m = self.model

        def fn(p: Point) -> Jet:
            eta = self.eta.at(p)
            de = self.deta.at(p)
            gram = jeinsum("a,b->ab", eta, eta) + jeinsum("ai,bi->ab", de, de)
            if np.linalg.cond(gram.v) > 1e12:
                raise NotContactError(f"Reeb system is singular at {p.describe()}: not a contact form")
            return jeinsum("ab,b->a", jinv(gram), eta)

        return VectorField(m, fn, "xi")

    def d_eta(self, x: VectorField, y: VectorField, p: Point) -> float:
        """``1/2 (X(eta(Y)) - Y(eta(X)) - eta([X, Y]))`` evaluated by the bracket formula."""
        a = derivative(x, self.eta(y)).at(p).v
        b = derivative(y, self.eta(x)).at(p).v
        c = self.eta(bracket(x, y)).at(p).v
        return float(0.5 * (a - b - c))

    def horizontal_projector(self) -> Tensor11:
        """``I - eta (x) xi``: projection onto ker eta along xi."""
        return self.model.identity() - Tensor11.rank_one(self.reeb, self.eta)

    def lie_xi_deta_check(self, points: Sequence[Point], tol: float) -> Check:
        """``xi(d eta(X, Y)) - d eta([xi, X], Y) - d eta(X, [xi, Y]) = 0`` on frame pairs."""
        m = self.model

        def res(p):
            xi, de = self.reeb.at(p), self.deta.at(p)
            brk = np.stack([bracket_jet(m, xi, m.const(np.eye(m.dim)[j])).v for j in range(m.dim)], axis=1)
            return np.einsum("a,ija->ij", xi.v, de.grad().v) - brk.T @ de.v - de.v @ brk
        return scan("lie_xi_deta", res, points, tol)

    def reeb_check(self, points: Sequence[Point], tol: float) -> Check:
        def res(p):
            xi = self.reeb.value(p)
            return np.concatenate([[self.eta.value(p) @ xi - 1.0], xi @ self.deta.value(p)])
        return scan("reeb_conditions", res, points, tol)


# --------------------------------------------------------------------------
# distributions


def _prune(vectors: np.ndarray, rtol: float = 1e-8) -> list[int]:
    """Greedy pivoted elimination: indices of a maximal independent subset of columns."""
    scale = max(np.abs(vectors).max(), 1.0)
    chosen: list[int] = []
    basis: list[np.ndarray] = []
    remaining = list(range(vectors.shape[1]))
    while remaining:
        resid = {}
        for j in remaining:
            r = vectors[:, j].copy()
            for q in basis:
                r -= (q @ r) * q
            resid[j] = r
        j = max(remaining, key=lambda k: np.linalg.norm(resid[k]))
        nrm = np.linalg.norm(resid[j])
        if nrm <= rtol * scale:
            break
        chosen.append(j)
        basis.append(resid[j] / nrm)
        remaining.remove(j)
    return sorted(chosen)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Spanning sections plus a pointwise map whose kernel is the distribution."""

    spans: tuple[VectorField, ...]
    complement: Tensor11
    name: str = ""

    @property
    def model(self) -> Model:
        return self.complement.model

    @property
    def rank(self) -> int:
        return len(self.spans)

    @classmethod
    def from_projector(cls, proj: Tensor11, name: str = "", at: Point | None = None) -> "Distribution":
        """Image of a projector, spanned by ``P E_a`` pruned at the first sample point."""
        m = proj.model
        p = at if at is not None else m.sample_points(1)[0]
        keep = _prune(proj.value(p))
        spans = tuple(proj @ m.frame_field(a) for a in keep)
        return cls(spans, m.identity() - proj, name)

    @classmethod
    def from_spans(cls, fields: Sequence[VectorField], name: str = "") -> "Distribution":
        m = fields[0].model

        def comp(p: Point) -> Jet:
            from .jets import stack
            u = jeinsum("ia->ai", stack([f.at(p) for f in fields]))
            gram = jeinsum("ai,aj->ij", u, u)
            return m.const(np.eye(m.dim)) - jeinsum("ai,ij,bj->ab", u, jinv(gram), u)

        return cls(tuple(fields), Tensor11(m, comp), name)

    def matrix(self, p: Point) -> np.ndarray:
        return np.column_stack([s.value(p) for s in self.spans])

    def rank_at(self, p: Point) -> int:
        return int(np.linalg.matrix_rank(self.matrix(p), tol=1e-8))

    def contains(self, v: VectorField) -> VectorField:
        """Residual field ``complement(v)``; vanishes iff ``v`` lies in the distribution."""
        return self.complement @ v


def direct_sum_rank(parts: Sequence[Distribution | VectorField], p: Point) -> int:
    cols = []
    for part in parts:
        cols.append(part.matrix(p) if isinstance(part, Distribution) else part.value(p)[:, None])
    return int(np.linalg.matrix_rank(np.hstack(cols), tol=1e-8))


def transversality_check(parts: Sequence[Distribution | VectorField], points: Sequence[Point]) -> Check:
    dim = parts[0].model.dim
    total = sum(p.rank if isinstance(p, Distribution) else 1 for p in parts)
    worst = min(direct_sum_rank(parts, q) for q in points)
    ok = worst == dim and total == dim
    return Check("direct_sum", ok, float(dim - worst), 0.0, None, {"rank": worst, "dim": dim})


def is_legendre(form: ContactForm, dist: Distribution, points: Sequence[Point], tol: float) -> Check:
    """Rank n, inside ker eta, and ``d eta`` vanishing on spanning pairs."""
    m = form.model
    inside = scan("inside_ker_eta", lambda p: [form.eta.value(p) @ s.value(p) for s in dist.spans],
                  points, tol)
    if not inside:
        raise PreconditionError(f"{dist.name or 'distribution'} is not contained in ker eta "
                                f"(residual {inside.residual:.3g})")
    ranks = {dist.rank_at(p) for p in points[:1]}
    worst, wp, pair = 0.0, None, None
    for p in points:
        de = form.deta.value(p)
        u = dist.matrix(p)
        block = np.abs(u.T @ de @ u)
        i, j = np.unravel_index(np.argmax(block), block.shape) if block.size else (0, 0)
        if block.size and block[i, j] > worst:
            worst, wp, pair = float(block[i, j]), p, (int(i), int(j))
    ok = worst <= tol and ranks == {m.n}
    detail = {"rank": sorted(ranks)[0], "n": m.n}
    if pair is not None and worst > tol:
        detail["witness"] = [dist.spans[pair[0]].name or f"U{pair[0]}", dist.spans[pair[1]].name or f"U{pair[1]}"]
    return Check(f"legendre[{dist.name}]", ok, worst, tol, None if wp is None else wp.describe(), detail)


def is_involutive(dist: Distribution, points: Sequence[Point], tol: float) -> Check:
    pairs = [(a, b) for a in range(dist.rank) for b in range(a + 1, dist.rank)]
    fields = [dist.contains(bracket(dist.spans[a], dist.spans[b])) for a, b in pairs]
    return scan(f"involutive[{dist.name}]", lambda p: [f.value(p) for f in fields] or [0.0], points, tol)


def pang_form(form: ContactForm, x: VectorField, y: VectorField, p: Point) -> float:
    """``2 d eta([xi, X], X')`` at ``p``."""
    m = form.model
    br = bracket_jet(m, form.reeb.at(p), x.at(p)).v
    return float(2.0 * br @ form.deta.value(p) @ y.value(p))


def pang_gram(form: ContactForm, dist: Distribution, p: Point) -> np.ndarray:
    return np.array([[pang_form(form, a, b, p) for b in dist.spans] for a in dist.spans])


def classify_pang(form: ContactForm, dist: Distribution, points: Sequence[Point], tol: float) -> str:
    """positive / negative / nondegenerate / degenerate / flat, from Gram eigenvalues."""
    eigs = []
    for p in points:
        gram = pang_gram(form, dist, p)
        eigs.append(np.linalg.eigvalsh(0.5 * (gram + gram.T)))
    e = np.concatenate(eigs)
    if np.all(np.abs(e) <= tol):
        return "flat"
    if np.all(e > tol):
        return "positive"
    if np.all(e < -tol):
        return "negative"
    if np.all(np.abs(e) > tol):
        return "nondegenerate"
    return "degenerate"

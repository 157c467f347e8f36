"""Models, points, tensor fields and Lie brackets.

Every field is expressed against the model frame ``E_0..E_{N-1}``.  On a chart
model the frame is the coordinate frame and derivatives of components come
from polynomial jets; on a frame model the frame is left-invariant, all
declared components are constant, and ``[E_i, E_j] = c[k, i, j] E_k``.

Index conventions used throughout the package:

* vector ``X[k]``, one-form ``eta[i]``
* (1,1)-tensor ``T[k, l]`` with ``T E_l = T[k, l] E_k``
* bilinear form ``g[i, j] = g(E_i, E_j)``
* connection ``gamma[k, i, j]`` with ``nabla_{E_i} E_j = gamma[k, i, j] E_k``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .jets import Jet, jeinsum

DEFAULT_SEED = 0x42195
DEFAULT_SAMPLES = 32


class DomainError(ValueError):
    pass


# --------------------------------------------------------------------------
# polynomials


class Poly:
    """Sparse real polynomial in ``nvars`` variables: ``{exponents: coefficient}``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict[tuple[int, ...], float] | None = None):
        self.nvars = nvars
        self.terms = {}
        for e, c in (terms or {}).items():
            if c != 0:
                e = tuple(int(x) for x in e)
                if len(e) != nvars or min(e, default=0) < 0:
                    raise ValueError(f"bad exponent tuple {e}")
                self.terms[e] = self.terms.get(e, 0.0) + float(c)

    @classmethod
    def const(cls, nvars: int, c: float) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1.0})

    def _lift(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly.const(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other) -> "Poly":
        other = self._lift(other)
        out: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.terms.values())

    def to_list(self) -> list:
        return [[c, list(e)] for e, c in sorted(self.terms.items())]

    @classmethod
    def from_list(cls, nvars: int, items: Iterable) -> "Poly":
        p = cls(nvars)
        for c, e in items:
            p = p + cls(nvars, {tuple(e): c})
        return p

    def __call__(self, x) -> float:
        return float(sum(c * np.prod(np.asarray(x, float) ** np.array(e)) for e, c in self.terms.items()))


class PolyArray:
    """An array of polynomials compiled for fast jet evaluation."""

    def __init__(self, polys: np.ndarray):
        polys = np.asarray(polys, dtype=object)
        self.shape = polys.shape
        self.nvars = polys.flat[0].nvars
        idx, coef, exps = [], [], []
        for flat, p in enumerate(polys.flat):
            for e, c in p.terms.items():
                idx.append(flat)
                coef.append(c)
                exps.append(e)
        self._idx = np.array(idx, dtype=int)
        self._coef = np.array(coef, dtype=float)
        self._exps = np.array(exps, dtype=int).reshape(-1, self.nvars)
        self._size = int(np.prod(self.shape)) if self.shape else 1
        self.polys = polys

    @property
    def is_constant(self) -> bool:
        return not self._exps.any()

    def jet(self, x: np.ndarray) -> Jet:
        n = self.nvars
        size = self._size
        v = np.zeros(size)
        d = np.zeros((size, n))
        dd = np.zeros((size, n, n))
        if len(self._coef):
            e = self._exps
            x = np.asarray(x, dtype=float)
            # powers x**k for k in e, e-1, e-2 with negative exponents masked to 0
            p0 = _safe_pow(x, e)
            p1 = _safe_pow(x, e - 1)
            p2 = _safe_pow(x, e - 2)
            mono = self._coef * np.prod(p0, axis=1)
            np.add.at(v, self._idx, mono)
            for a in range(n):
                others = np.prod(np.delete(p0, a, axis=1), axis=1)
                g = self._coef * e[:, a] * p1[:, a] * others
                np.add.at(d[:, a], self._idx, g)
                h = self._coef * e[:, a] * (e[:, a] - 1) * p2[:, a] * others
                np.add.at(dd[:, a, a], self._idx, h)
                for b in range(a + 1, n):
                    rest = np.prod(np.delete(p0, [a, b], axis=1), axis=1)
                    h = self._coef * e[:, a] * e[:, b] * p1[:, a] * p1[:, b] * rest
                    np.add.at(dd[:, a, b], self._idx, h)
                    np.add.at(dd[:, b, a], self._idx, h)
        return Jet(v.reshape(self.shape), d.reshape(self.shape + (n,)),
                   dd.reshape(self.shape + (n, n)), order=2, n=n)


def _safe_pow(x: np.ndarray, e: np.ndarray) -> np.ndarray:
    out = np.where(e >= 0, np.power(x, np.maximum(e, 0)), 0.0)
    return out


def poly_matrix(rows: list[list]) -> np.ndarray:
    return np.array(rows, dtype=object)


def poly_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix (or matrix-vector) product of object arrays of :class:`Poly`."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    out = np.empty((a.shape[0], b.shape[1]), dtype=object)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            acc = a[i, 0] * b[0, j]
            for k in range(1, a.shape[1]):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc
    return out[:, 0] if vec else out


# --------------------------------------------------------------------------
# models and points


@dataclass(frozen=True)
class Point:
    """A sample point; on frame models ``coords`` is empty (homogeneous space)."""

    coords: tuple[float, ...]

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def describe(self) -> list[float] | str:
        return [float(f"{c:.6g}") for c in self.coords] if self.coords else "homogeneous"


@dataclass(frozen=True, eq=False)
class Model:
    """A chart on a box ``[-box, box]^dim`` or a left-invariant frame."""

    kind: str
    dim: int
    c: np.ndarray
    name: str = ""
    box: float = 1.0

    def __post_init__(self):
        if self.kind not in ("chart", "frame"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.dim < 3 or self.dim % 2 == 0:
            raise ValueError(f"dimension must be odd and >= 3, got {self.dim}")
        c = np.asarray(self.c, dtype=float)
        if c.shape != (self.dim,) * 3:
            raise ValueError("structure constants must have shape (dim, dim, dim)")
        if np.abs(c + np.swapaxes(c, 1, 2)).max() > 0:
            raise ValueError("structure constants must be antisymmetric in the lower indices")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def chart(cls, dim: int, name: str = "", box: float = 1.0) -> "Model":
        return cls("chart", dim, np.zeros((dim, dim, dim)), name, box)

    @classmethod
    def frame(cls, c: np.ndarray, name: str = "", jacobi_tol: float = 1e-9) -> "Model":
        m = cls("frame", np.shape(c)[0], c, name)
        res = jacobi_residual(m)
        if res > jacobi_tol:
            raise ValueError(f"structure constants violate the Jacobi identity (residual {res:.3g})")
        return m

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2

    @property
    def is_frame(self) -> bool:
        return self.kind == "frame"

    def sample_points(self, k: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> list[Point]:
        """Deterministic sample set; a frame model needs a single formal point."""
        if self.is_frame:
            return [Point(())]
        rng = np.random.default_rng(seed)
        xs = rng.uniform(-self.box, self.box, size=(k, self.dim))
        return [Point(tuple(float(v) for v in x)) for x in xs]

    def check_point(self, p: Point) -> None:
        if self.is_frame:
            return
        if len(p.coords) != self.dim:
            raise DomainError(f"point has {len(p.coords)} coordinates, model needs {self.dim}")
        if np.abs(p.array()).max() > self.box * (1 + 1e-12):
            raise DomainError(f"point {p.describe()} lies outside the box [-{self.box}, {self.box}]^{self.dim}")

    def const(self, arr) -> Jet:
        return Jet.const(arr, self.dim)

    def identity(self) -> "Tensor11":
        return Tensor11.constant(self, np.eye(self.dim))

    def frame_field(self, i: int) -> "VectorField":
        return VectorField.constant(self, np.eye(self.dim)[i], name=f"E{i}")

    def frame_fields(self) -> list["VectorField"]:
        return [self.frame_field(i) for i in range(self.dim)]


def jacobi_residual(model: Model) -> float:
    """max |sum_cyc c^m_ij c^l_mk| over all triples (frame models only)."""
    if not model.is_frame:
        raise TypeError("the Jacobi check on structure constants needs a frame model")
    c = model.c
    t = np.einsum("mij,lmk->lijk", c, c)
    cyc = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
    return float(np.abs(cyc).max()) if cyc.size else 0.0


# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class Field:
    """A pointwise-evaluable tensor field; ``fn`` maps a point to a jet."""

    model: Model
    fn: Callable[[Point], Jet]
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def at(self, p: Point) -> Jet:
        try:
            return self._cache[p]
        except KeyError:
            self.model.check_point(p)
            j = self.fn(p)
            self._cache[p] = j
            return j

    def value(self, p: Point) -> np.ndarray:
        return self.at(p).v

    @classmethod
    def constant(cls, model: Model, arr, name: str = ""):
        j = model.const(np.asarray(arr, dtype=float))
        return cls(model, lambda p: j, name)

    @classmethod
    def from_polys(cls, model: Model, polys, name: str = ""):
        pa = PolyArray(polys)
        if pa.is_constant:
            return cls.constant(model, pa.jet(np.zeros(model.dim)).v, name)
        return cls(model, lambda p: pa.jet(p.array()), name)

    def _same(self, other: "Field") -> None:
        if other.model is not self.model:
            raise ValueError("fields live on different models")

    def _lin(self, other, a: float, b: float):
        self._same(other)
        return type(self)(self.model, lambda p: a * self.at(p) + b * other.at(p))

    def __add__(self, other):
        return self._lin(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._lin(other, 1.0, -1.0)

    def __neg__(self):
        return type(self)(self.model, lambda p: -self.at(p))

    def __mul__(self, s):
        if isinstance(s, ScalarField):
            self._same(s)
            return type(self)(self.model, lambda p: self.at(p) * s.at(p))
        s = float(s)
        return type(self)(self.model, lambda p: s * self.at(p))

    __rmul__ = __mul__

    def __truediv__(self, s: float):
        return self * (1.0 / float(s))


class ScalarField(Field):
    pass


class VectorField(Field):
    pass


class OneForm(Field):
    def __call__(self, x: VectorField) -> ScalarField:
        self._same(x)
        return ScalarField(self.model, lambda p: jeinsum("i,i->", self.at(p), x.at(p)))


class Tensor11(Field):
    def __matmul__(self, other):
        self._same(other)
        if isinstance(other, Tensor11):
            return Tensor11(self.model, lambda p: jeinsum("km,ml->kl", self.at(p), other.at(p)))
        if isinstance(other, VectorField):
            return VectorField(self.model, lambda p: jeinsum("kl,l->k", self.at(p), other.at(p)))
        return NotImplemented

    def transpose_form(self, eta: OneForm) -> OneForm:
        """The one-form ``eta o T``."""
        self._same(eta)
        return OneForm(self.model, lambda p: jeinsum("k,kl->l", eta.at(p), self.at(p)))

    @classmethod
    def rank_one(cls, x: VectorField, eta: OneForm) -> "Tensor11":
        """The endomorphism ``Y -> eta(Y) x``."""
        x._same(eta)
        return cls(x.model, lambda p: jeinsum("k,l->kl", x.at(p), eta.at(p)))


class Bilinear(Field):
    """A (0,2)-tensor: metric or 2-form."""

    def __call__(self, x: VectorField, y: VectorField) -> ScalarField:
        return ScalarField(self.model, lambda p: jeinsum("i,ij,j->", x.at(p), self.at(p), y.at(p)))

    def compose(self, t: Tensor11) -> "Bilinear":
        """``(X, Y) -> B(X, T Y)``."""
        self._same(t)
        return Bilinear(self.model, lambda p: jeinsum("im,mj->ij", self.at(p), t.at(p)))


class MetricField(Bilinear):
    pass


def as_metric(b: Bilinear) -> MetricField:
    return MetricField(b.model, b.at, b.name)


def outer_forms(a: OneForm, b: OneForm) -> Bilinear:
    a._same(b)
    return Bilinear(a.model, lambda p: jeinsum("i,j->ij", a.at(p), b.at(p)))


# --------------------------------------------------------------------------
# brackets and Lie derivatives


def bracket_jet(model: Model, u: Jet, v: Jet) -> Jet:
    """Jet of ``[U, V]`` from component jets of ``U`` and ``V``."""
    out = jeinsum("a,ka->k", u, v.grad()) - jeinsum("a,ka->k", v, u.grad())
    if model.is_frame:
        out = out + jeinsum("kab,a,b->k", model.c, u, v)
    return out


def frame_brackets(model: Model, a: Jet | None, b: Jet | None) -> Jet:
    """All brackets ``[A E_i, B E_j]`` as a jet ``br[k, i, j]``; ``None`` means identity."""
    a = model.const(np.eye(model.dim)) if a is None else a
    b = model.const(np.eye(model.dim)) if b is None else b
    out = jeinsum("ai,kja->kij", a, b.grad()) - jeinsum("bj,kib->kij", b, a.grad())
    if model.is_frame:
        out = out + jeinsum("kab,ai,bj->kij", model.c, a, b)
    return out


def bracket(x: VectorField, y: VectorField) -> VectorField:
    x._same(y)
    return VectorField(x.model, lambda p: bracket_jet(x.model, x.at(p), y.at(p)))


def lie_bracket(x: VectorField, y: VectorField, p: Point) -> np.ndarray:
    """Value of ``[X, Y]`` at ``p``."""
    return bracket_jet(x.model, x.at(p), y.at(p)).v


def derivative(x: VectorField, f: ScalarField) -> ScalarField:
    """The function ``X(f)``."""
    x._same(f)
    return ScalarField(x.model, lambda p: jeinsum("a,a->", x.at(p), f.at(p).grad()))


def lie_derivative_tensor_jet(model: Model, x: Jet, t: Jet) -> Jet:
    """``(L_X T)[k, l]`` from ``(L_X T) E_l = [X, T E_l] - T [X, E_l]``."""
    term = jeinsum("a,kla->kl", x, t.grad()) - jeinsum("al,ka->kl", t, x.grad()) \
        + jeinsum("km,ml->kl", t, x.grad())
    if model.is_frame:
        term = term + jeinsum("kab,a,bl->kl", model.c, x, t) - jeinsum("km,mal,a->kl", t, model.c, x)
    return term


def lie_derivative_tensor(x: VectorField, t: Tensor11) -> Tensor11:
    x._same(t)
    return Tensor11(x.model, lambda p: lie_derivative_tensor_jet(x.model, x.at(p), t.at(p)))


def lie_derivative_form_jet(model: Model, x: Jet, eta: Jet) -> Jet:
    """``(L_X eta)(E_l) = X(eta(E_l)) - eta([X, E_l])``."""
    out = jeinsum("a,la->l", x, eta.grad()) + jeinsum("m,ml->l", eta, x.grad())
    if model.is_frame:
        out = out - jeinsum("m,mal,a->l", eta, model.c, x)
    return out


def lie_derivative_form(x: VectorField, eta: OneForm) -> OneForm:
    x._same(eta)
    return OneForm(x.model, lambda p: lie_derivative_form_jet(x.model, x.at(p), eta.at(p)))


def jacobi_check(model: Model, tol: float = 0.0):
    """Structure-constant Jacobi residual as a :class:`~paracontact.checks.Check`."""
    from .checks import Check

    res = jacobi_residual(model)
    return Check("jacobi", res <= tol, res, tol)

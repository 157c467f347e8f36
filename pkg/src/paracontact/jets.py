"""Truncated second-order Taylor arithmetic ("jets") over numpy arrays.

A :class:`Jet` carries the value of an array-valued function at a point
together with its first and second partial derivatives.  Derivative axes are
always trailing: for a value of shape ``S`` the gradient has shape
``S + (n,)`` and the Hessian ``S + (n, n)``.

Jets lose one order each time they are differentiated.  Constant jets
(``order == CONST``) keep no derivative data and never lose order, which is
what makes constant-coefficient frame models cheap.
"""

from __future__ import annotations

import itertools

import numpy as np

CONST = 99

# einsum letters reserved for derivative axes
_D1, _D2 = "Y", "Z"


class JetOrderError(ValueError):
    """Raised when a derivative is requested beyond the available jet order."""


class Jet:
    __slots__ = ("v", "d", "dd", "order", "n")

    def __init__(self, v, d=None, dd=None, order: int = 2, n: int | None = None):
        self.v = np.asarray(v, dtype=float)
        self.order = order
        if n is None:
            if d is None:
                raise ValueError("derivative dimension unknown")
            n = np.shape(d)[-1]
        self.n = n
        if order == CONST:
            self.d = self.dd = None
        else:
            self.d = None if order < 1 else np.asarray(d, dtype=float)
            self.dd = None if order < 2 else np.asarray(dd, dtype=float)

    @classmethod
    def const(cls, v, n: int) -> "Jet":
        return cls(v, order=CONST, n=n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.v.shape

    @property
    def is_const(self) -> bool:
        return self.order == CONST

    def _d(self) -> np.ndarray:
        if self.is_const:
            return np.zeros(self.v.shape + (self.n,))
        if self.d is None:
            raise JetOrderError("first derivative not available")
        return self.d

    def _dd(self) -> np.ndarray:
        if self.is_const:
            return np.zeros(self.v.shape + (self.n, self.n))
        if self.dd is None:
            raise JetOrderError("second derivative not available")
        return self.dd

    def grad(self) -> "Jet":
        """Jet of the gradient; the new derivative index is the last value axis."""
        if self.is_const:
            return Jet.const(np.zeros(self.v.shape + (self.n,)), self.n)
        if self.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet")
        return Jet(self.d, self.dd, None, order=self.order - 1, n=self.n)

    def truncate(self, order: int) -> "Jet":
        if self.is_const or order >= self.order:
            return self
        return Jet(self.v, self.d, self.dd, order=order, n=self.n)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("ellipsis indexing is ambiguous on jets")
        d = None if self.d is None else self.d[idx]
        dd = None if self.dd is None else self.dd[idx]
        return Jet(self.v[idx], d, dd, order=self.order, n=self.n)

    def _combine(self, other, sign: float) -> "Jet":
        other = as_jet(other, self.n)
        order = min(self.order, other.order)
        if order == CONST:
            return Jet.const(self.v + sign * other.v, self.n)
        d = dd = None
        if order >= 1:
            d = self._d() + sign * other._d()
        if order >= 2:
            dd = self._dd() + sign * other._dd()
        return Jet(self.v + sign * other.v, d, dd, order=order, n=self.n)

    def __add__(self, other) -> "Jet":
        return self._combine(other, 1.0)

    def __radd__(self, other) -> "Jet":
        return self._combine(other, 1.0)

    def __sub__(self, other) -> "Jet":
        return self._combine(other, -1.0)

    def __rsub__(self, other) -> "Jet":
        return (-self)._combine(other, 1.0)

    def __neg__(self) -> "Jet":
        return self * -1.0

    def __mul__(self, s) -> "Jet":
        if isinstance(s, Jet):
            if s.shape != ():
                raise TypeError("jet products need jeinsum unless one factor is scalar")
            sub = "".join(_letters(self.v.ndim))
            return jeinsum(f",{sub}->{sub}", s, self)
        s = float(s)
        d = None if self.d is None else s * self.d
        dd = None if self.dd is None else s * self.dd
        return Jet(s * self.v, d, dd, order=self.order, n=self.n)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "Jet":
        return self * (1.0 / float(s))

    def __repr__(self) -> str:
        o = "const" if self.is_const else self.order
        return f"Jet(shape={self.shape}, order={o})"


def _letters(k: int) -> list[str]:
    return list("abcdefghijklmnopqrstuvw"[:k])


def as_jet(x, n: int) -> Jet:
    return x if isinstance(x, Jet) else Jet.const(x, n)


def stack(jets: list[Jet], axis: int = 0) -> Jet:
    """Stack jets along a new leading value axis (only ``axis=0`` is supported)."""
    if axis != 0:
        raise ValueError("jets stack along the leading axis only")
    n = jets[0].n
    order = min(j.order for j in jets)
    v = np.stack([j.v for j in jets])
    if order == CONST:
        return Jet.const(v, n)
    d = np.stack([j._d() for j in jets]) if order >= 1 else None
    dd = np.stack([j._dd() for j in jets]) if order >= 2 else None
    return Jet(v, d, dd, order=order, n=n)


def jeinsum(subscripts: str, *operands) -> Jet:
    """``np.einsum`` lifted to jets by the multilinear product rule.

    Plain arrays are treated as constants.  Subscripts must be explicit
    (``->`` present) and must not use the letters ``Y`` and ``Z``.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    ins = ins.split(",")
    n = next((o.n for o in operands if isinstance(o, Jet)), None)
    if n is None:
        raise TypeError("jeinsum needs at least one Jet operand")
    ops = [as_jet(o, n) for o in operands]
    vs = [o.v for o in ops]
    v = np.einsum(subscripts, *vs)
    live = [i for i, o in enumerate(ops) if not o.is_const]
    if not live:
        return Jet.const(v, n)
    order = min(ops[i].order for i in live)

    def term(replace: dict[int, tuple[np.ndarray, str]], suffix: str) -> np.ndarray:
        subs, arrs = [], []
        for i, s in enumerate(ins):
            if i in replace:
                arr, extra = replace[i]
                subs.append(s + extra)
                arrs.append(arr)
            else:
                subs.append(s)
                arrs.append(vs[i])
        return np.einsum(f"{','.join(subs)}->{out}{suffix}", *arrs)

    d = dd = None
    if order >= 1:
        d = sum(term({i: (ops[i].d, _D1)}, _D1) for i in live)
    if order >= 2:
        dd = sum(term({i: (ops[i].dd, _D1 + _D2)}, _D1 + _D2) for i in live)
        for i, j in itertools.combinations(live, 2):
            cross = term({i: (ops[i].d, _D1), j: (ops[j].d, _D2)}, _D1 + _D2)
            dd = dd + cross + np.swapaxes(cross, -1, -2)
    return Jet(v, d, dd, order=order, n=n)


def jinv(m: Jet) -> Jet:
    """Inverse of a square-matrix jet."""
    mi = np.linalg.inv(m.v)
    if m.is_const:
        return Jet.const(mi, m.n)
    d = dd = None
    if m.order >= 1:
        d = -np.einsum("ij,jkY,kl->ilY", mi, m.d, mi)
    if m.order >= 2:
        a = np.einsum("ij,jkY,kl,lmZ,mp->ipYZ", mi, m.d, mi, m.d, mi)
        dd = a + np.swapaxes(a, -1, -2) - np.einsum("ij,jkYZ,kl->ilYZ", mi, m.dd, mi)
    return Jet(mi, d, dd, order=m.order, n=m.n)


def jsqrt(s: Jet) -> Jet:
    """Square root of a positive scalar jet."""
    r = np.sqrt(s.v)
    if s.is_const:
        return Jet.const(r, s.n)
    d = dd = None
    if s.order >= 1:
        d = s.d / (2 * r)
    if s.order >= 2:
        dd = s.dd / (2 * r) - np.outer(s.d, s.d) / (4 * r**3)
    return Jet(r, d, dd, order=s.order, n=s.n)


def compose_scalar(s: Jet, f0: float, f1: float, f2: float) -> Jet:
    """Jet of ``f(s)`` given ``f``, ``f'`` and ``f''`` evaluated at ``s.v`` (scalar ``s``)."""
    if s.is_const:
        return Jet.const(f0, s.n)
    d = dd = None
    if s.order >= 1:
        d = f1 * s.d
    if s.order >= 2:
        dd = f1 * s.dd + f2 * np.outer(s.d, s.d)
    return Jet(f0, d, dd, order=s.order, n=s.n)

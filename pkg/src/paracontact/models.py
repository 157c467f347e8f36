"""Built-in models and the JSON model-definition format.

Two families ship with the package:

* ``darboux(n)``: the standard contact form on R^(2n+1) as a polynomial chart,
  with its bi-paracontact example tensors and the Sasakian metric.
* ``kappa_mu_frame(kappa, mu)``: a three-dimensional left-invariant frame whose
  structure constants realize a contact metric (kappa, mu)-space.  The constants
  come from ``scripts/derive_kappa_mu_constants.py``; the closed form used here
  is the one that script derives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .bipara import BiParacontact, build_biparacontact
from .checks import PreconditionError
from .contact import ContactForm
from .kernel import (Field, MetricField, Model, OneForm, Poly, Tensor11, VectorField, poly_matmul,
                     poly_matrix)
from .structures import CONTACT, AlmostContact, AxiomError, MetricStructure


class ModelError(ValueError):
    """A model definition could not be loaded or failed its own checks."""


@dataclass(eq=False)
class BuiltinModel:
    name: str
    model: Model
    form: ContactForm
    metric: MetricStructure | None = None
    bipara: BiParacontact | None = None
    kappa: float | None = None
    mu: float | None = None
    facts: dict[str, Any] = field(default_factory=dict)
    source: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def is_kappa_mu(self) -> bool:
        return self.kappa is not None

    def kappa_mu(self):
        from .kappa_mu import KappaMuStructure
        if self.kappa is None or self.metric is None:
            raise PreconditionError(f"model {self.name!r} does not declare a (kappa, mu)-structure")
        return KappaMuStructure(self.metric, self.kappa, self.mu)

    def to_json(self) -> str:
        return json.dumps(self.source, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# Darboux chart


def _darboux_frame(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate components of the adapted frame ``(X_1..X_n, Y_1..Y_n, xi)`` and of its coframe.

    Coordinates are ordered ``(x_1..x_n, y_1..y_n, z)``.
    """
    dim = 2 * n + 1
    zero, one = Poly.const(dim, 0.0), Poly.const(dim, 1.0)
    frame = poly_matrix([[zero] * dim for _ in range(dim)])
    coframe = poly_matrix([[zero] * dim for _ in range(dim)])
    z = 2 * n
    for i in range(n):
        y = Poly.var(dim, n + i)
        frame[n + i, i] = one                  # X_i = d/dy_i
        frame[i, n + i] = one                  # Y_i = d/dx_i + y_i d/dz
        frame[z, n + i] = y
        coframe[i, n + i] = one                # dy_i
        coframe[n + i, i] = one                # dx_i
        coframe[z, i] = -1.0 * y               # eta = dz - sum y_i dx_i
    frame[z, z] = one
    coframe[z, z] = one
    return frame, coframe


def darboux_adapted_tensors(n: int) -> dict[str, np.ndarray]:
    """Example tensors and the Sasakian metric in the adapted frame."""
    dim = 2 * n + 1
    p1, p2, p3 = np.zeros((dim, dim)), np.zeros((dim, dim)), np.zeros((dim, dim))
    for i in range(n):
        x, y = i, n + i
        p1[x, x], p1[y, y] = 1.0, -1.0
        p2[y, x], p2[x, y] = -1.0, -1.0
        p3[y, x], p3[x, y] = 1.0, -1.0
    g = np.diag([0.5] * (2 * n) + [1.0])
    return {"phi1": p1, "phi2": p2, "phi3": p3, "g": g}


def darboux(n: int = 2, box: float = 1.0) -> BuiltinModel:
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = 2 * n + 1
    model = Model.chart(dim, f"darboux{n}", box)
    frame, coframe = _darboux_frame(n)
    adapted = darboux_adapted_tensors(n)

    def lift(a: np.ndarray) -> np.ndarray:
        consts = poly_matrix([[Poly.const(dim, float(v)) for v in row] for row in a])
        return poly_matmul(poly_matmul(frame, consts), coframe)

    def lift_form(a: np.ndarray) -> np.ndarray:
        consts = poly_matrix([[Poly.const(dim, float(v)) for v in row] for row in a])
        return poly_matmul(poly_matmul(coframe.T, consts), coframe)

    polys = {
        "eta": coframe[2 * n],
        "xi": frame[:, 2 * n],
        "phi1": lift(adapted["phi1"]),
        "phi2": lift(adapted["phi2"]),
        "g": lift_form(adapted["g"]),
    }
    source = {"kind": "chart", "dim": dim, "name": model.name, "box": box,
              "fields": {k: _polys_to_list(v) for k, v in polys.items()},
              "facts": {"kappa": 1.0, "normal": True}}
    bm = _assemble(model, polys_fields(model, polys), source)
    bm.facts.update(expected_facts_darboux(bm))
    return bm


def polys_fields(model: Model, polys: dict[str, np.ndarray]) -> dict[str, Field]:
    kinds = {"eta": OneForm, "xi": VectorField, "phi": Tensor11, "phi1": Tensor11, "phi2": Tensor11,
             "g": MetricField}
    return {k: kinds[k].from_polys(model, v, k) for k, v in polys.items()}


def _polys_to_list(a: np.ndarray):
    if a.ndim == 1:
        return [p.to_list() for p in a]
    return [_polys_to_list(row) for row in a]


def _polys_from_list(dim: int, items, depth: int) -> np.ndarray:
    if depth == 1:
        return np.array([Poly.from_list(dim, p) for p in items], dtype=object)
    return np.array([_polys_from_list(dim, row, depth - 1) for row in items], dtype=object)


# ---------------------------------------------------------------------------
# (kappa, mu) frame


def kappa_mu_constants(kappa: float, mu: float) -> tuple[float, float]:
    """``[e0, e1] = a e2`` and ``[e0, e2] = b e1`` with ``[e1, e2] = 2 e0``."""
    if kappa >= 1:
        raise ValueError(f"kappa must be < 1 for the frame realization, got {kappa}")
    alpha, beta = 1 - mu / 2, float(np.sqrt(1 - kappa))
    return alpha + beta, beta - alpha


def kappa_mu_frame(kappa: float, mu: float, name: str | None = None) -> BuiltinModel:
    a, b = kappa_mu_constants(kappa, mu)
    c = np.zeros((3, 3, 3))
    c[0, 1, 2], c[0, 2, 1] = 2.0, -2.0
    c[2, 0, 1], c[2, 1, 0] = a, -a
    c[1, 0, 2], c[1, 2, 0] = b, -b
    model = Model.frame(c, name or f"kappa_mu({kappa:g},{mu:g})")
    phi = np.array([[0.0, 0, 0], [0, 0, -1], [0, 1, 0]])
    arrays = {"eta": np.array([1.0, 0, 0]), "xi": np.array([1.0, 0, 0]), "phi": phi, "g": np.eye(3)}
    source = {"kind": "frame", "dim": 3, "name": model.name, "c": _c_to_list(c),
              "fields": {k: v.tolist() for k, v in arrays.items()},
              "facts": {"kappa": kappa, "mu": mu}}
    return load_model_dict(source)


def _c_to_list(c: np.ndarray) -> list:
    dim = c.shape[0]
    return [[i, j, k, float(c[k, i, j])] for i in range(dim) for j in range(i + 1, dim) for k in range(dim)
            if c[k, i, j] != 0]


def _c_from_list(dim: int, items) -> np.ndarray:
    c = np.zeros((dim, dim, dim))
    for i, j, k, v in items:
        i, j, k = int(i), int(j), int(k)
        if i == j:
            if v != 0:
                raise ModelError(f"structure constant [e{i}, e{i}] must vanish")
            continue
        c[k, i, j] = float(v)
        c[k, j, i] = -float(v)
    return c


# ---------------------------------------------------------------------------
# loading


def _assemble(model: Model, fields: dict[str, Field], source: dict) -> BuiltinModel:
    if "eta" not in fields:
        raise ModelError("model file must declare eta")
    form = ContactForm(fields["eta"], fields.get("xi"))
    pts = model.sample_points(8)
    tol = 1e-8
    if not form.contact_check(pts):
        raise ModelError("eta is not a contact form on the sample set")
    if not form.reeb_check(pts, tol):
        raise ModelError("declared xi does not satisfy the Reeb conditions")
    facts = dict(source.get("facts", {}))
    bm = BuiltinModel(source.get("name", model.name), model, form, source=source)
    try:
        if "phi1" in fields and "phi2" in fields:
            bm.bipara = build_biparacontact(fields["phi1"], fields["phi2"], form, pts, tol)
        phi = fields.get("phi") or (bm.bipara.phi3 if bm.bipara is not None else None)
        if phi is not None and "g" in fields:
            ac = AlmostContact(phi, form.reeb, form.eta, CONTACT)
            ac.validate(pts, tol)
            bm.metric = MetricStructure(ac, fields["g"])
            check = bm.metric.is_metric_structure(pts, tol)
            if not check:
                raise ModelError(f"declared metric is not a contact metric structure: {check.detail}")
    except AxiomError as exc:
        raise ModelError(f"axiom failure while loading {bm.name!r}: {exc}") from exc
    if "mu" in facts:
        bm.kappa, bm.mu = float(facts["kappa"]), float(facts["mu"])
        bm.facts.update(expected_facts_kappa_mu(bm))
        if bm.bipara is None:
            bm.bipara = bm.kappa_mu().standard
    return bm


def load_model_dict(data: dict) -> BuiltinModel:
    try:
        kind, dim = data["kind"], int(data["dim"])
        raw = data.get("fields", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model definition: {exc}") from exc
    depth = {"eta": 1, "xi": 1, "phi": 2, "phi1": 2, "phi2": 2, "g": 2}
    unknown = set(raw) - set(depth)
    if unknown:
        raise ModelError(f"unknown fields {sorted(unknown)}")
    try:
        if kind == "chart":
            model = Model.chart(dim, data.get("name", ""), float(data.get("box", 1.0)))
            fields = polys_fields(model, {k: _polys_from_list(dim, v, depth[k]) for k, v in raw.items()})
        elif kind == "frame":
            model = Model.frame(_c_from_list(dim, data.get("c", [])), data.get("name", ""))
            kinds = {"eta": OneForm, "xi": VectorField, "phi": Tensor11, "phi1": Tensor11, "phi2": Tensor11,
                     "g": MetricField}
            fields = {k: kinds[k].constant(model, np.asarray(v, dtype=float), k) for k, v in raw.items()}
            for k, v in fields.items():
                want = (dim,) * depth[k]
                if v.value(model.sample_points(1)[0]).shape != want:
                    raise ModelError(f"field {k} must have shape {want}")
        else:
            raise ModelError(f"unknown model kind {kind!r}")
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(str(exc)) from exc
    return _assemble(model, fields, data)


def load_model_file(path: str | Path) -> BuiltinModel:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    return load_model_dict(data)


# ---------------------------------------------------------------------------
# expected facts, re-derived at load time


def expected_facts_kappa_mu(bm: BuiltinModel) -> dict[str, Any]:
    from .kappa_mu import fit_nullity
    s = bm.kappa_mu()
    pts = bm.model.sample_points(4)
    fit = fit_nullity(bm.metric.levi_civita, s.base.h, s.base.xi, s.base.eta, pts)
    kappa, mu = bm.kappa, bm.mu
    if abs(fit.kappa - kappa) > 1e-8 or fit.mu is None or abs(fit.mu - mu) > 1e-8 or fit.residual > 1e-8:
        raise ModelError(f"model {bm.name!r}: curvature gives kappa={fit.kappa:.6g}, mu={fit.mu}, "
                         f"declared ({kappa:g}, {mu:g})")
    lam = float(np.sqrt(1 - kappa))
    im = (1 - mu / 2) / lam
    ev = np.sort(np.linalg.eigvals(s.base.h.value(pts[0])).real)
    if np.abs(ev - np.r_[-lam, 0.0, lam]).max() > 1e-8:
        raise ModelError(f"model {bm.name!r}: h spectrum {ev} does not match lambda = {lam:g}")
    return {"kappa": kappa, "mu": mu, "lambda": lam, "I_M": im, "sasakian": False,
            "normal": False, "main4_applicable": abs(abs(im) - 1) > 1e-12}


def expected_facts_darboux(bm: BuiltinModel) -> dict[str, Any]:
    pts = bm.model.sample_points(4)
    normal = bool(bm.bipara.is_normal(pts, 1e-8))
    if not normal:
        raise ModelError("Darboux example structure failed its normality check")
    h = bm.metric.base.h
    if max(np.abs(h.value(p)).max() for p in pts) > 1e-10:
        raise ModelError("Darboux Sasakian structure has h != 0")
    return {"kappa": 1.0, "sasakian": True, "normal": True, "n": bm.model.n}


# ---------------------------------------------------------------------------
# registry

BUILTINS = {
    "darboux1": lambda: darboux(1),
    "darboux2": lambda: darboux(2),
    "darboux3": lambda: darboux(3),
    "kappa_mu": lambda: kappa_mu_frame(-8.0, -8.0, "kappa_mu"),
    "kappa_mu_flat": lambda: kappa_mu_frame(0.0, 0.0, "kappa_mu_flat"),
    "kappa_mu_im0": lambda: kappa_mu_frame(-8.0, 2.0, "kappa_mu_im0"),
    "kappa_mu_small": lambda: kappa_mu_frame(-8.0, -1.0, "kappa_mu_small"),
    "kappa_mu_negative": lambda: kappa_mu_frame(-8.0, 12.0, "kappa_mu_negative"),
}


def builtin(name: str) -> BuiltinModel:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ModelError(f"unknown builtin model {name!r}; choose from {sorted(BUILTINS)}") from None


def resolve(ref: str) -> BuiltinModel:
    """``builtin:<name>`` or a path to a JSON model file."""
    if ref.startswith("builtin:"):
        return builtin(ref.split(":", 1)[1])
    return load_model_file(ref)

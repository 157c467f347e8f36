"""Independent reference computations used by the tests.

Everything here avoids the jet machinery: values come from plain polynomial
evaluation and derivatives from central finite differences.
"""

from __future__ import annotations

import numpy as np

from paracontact.kernel import Poly, VectorField
from paracontact.models import _darboux_frame


def poly_values(polys: np.ndarray, x: np.ndarray) -> np.ndarray:
    polys = np.asarray(polys, dtype=object)
    return np.array([p(x) for p in polys.flat]).reshape(polys.shape)


def fd_gradient(polys: np.ndarray, x: np.ndarray, step: float) -> np.ndarray:
    """Central differences; last axis indexes the coordinate."""
    x = np.asarray(x, float)
    cols = []
    for a in range(len(x)):
        e = np.zeros_like(x)
        e[a] = step
        cols.append((poly_values(polys, x + e) - poly_values(polys, x - e)) / (2 * step))
    return np.stack(cols, axis=-1)


def fd_bracket(xp: np.ndarray, yp: np.ndarray, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """``[X, Y]^k = X^a d_a Y^k - Y^a d_a X^k`` on a coordinate chart."""
    return (fd_gradient(yp, x, step) @ poly_values(xp, x)) - (fd_gradient(xp, x, step) @ poly_values(yp, x))


def fd_christoffel(gp: np.ndarray, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """``gamma[k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)``."""
    g = poly_values(gp, x)
    dg = fd_gradient(gp, x, step)            # dg[a, b, c] = d_c g_ab
    t = np.einsum("jli->ijl", dg) + np.einsum("ilj->ijl", dg) - dg
    return 0.5 * np.einsum("kl,ijl->kij", np.linalg.inv(g), t)


def random_polys(rng: np.random.Generator, nvars: int, shape: tuple, degree: int = 2,
                 nterms: int = 3) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        terms = {}
        for _ in range(nterms):
            e = tuple(int(v) for v in rng.integers(0, degree + 1, size=nvars))
            if sum(e) <= degree:
                terms[e] = terms.get(e, 0.0) + float(rng.uniform(-1, 1))
        out[idx] = Poly(nvars, terms)
    return out


def darboux_fields(bm) -> dict[str, VectorField]:
    """Adapted frame ``X_i, Y_i, xi`` of a Darboux model as named vector fields."""
    n = bm.model.n
    frame, _ = _darboux_frame(n)
    out = {}
    for i in range(n):
        out[f"X{i + 1}"] = VectorField.from_polys(bm.model, frame[:, i], f"X{i + 1}")
        out[f"Y{i + 1}"] = VectorField.from_polys(bm.model, frame[:, n + i], f"Y{i + 1}")
    out["xi"] = VectorField.from_polys(bm.model, frame[:, 2 * n], "xi")
    return out


def darboux_frame_matrix(bm, p) -> np.ndarray:
    """Columns are the adapted frame at ``p`` in coordinates."""
    frame, _ = _darboux_frame(bm.model.n)
    return poly_values(frame, p.array())

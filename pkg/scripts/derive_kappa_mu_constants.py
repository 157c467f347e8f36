"""Derive the structure constants of the three-dimensional (kappa, mu) frame model.

Frame ``e0 = xi, e1, e2 = phi e1``, orthonormal, with brackets

    [e1, e2] = 2 e0,   [e0, e1] = a e2,   [e0, e2] = b e1.

The script imposes the Jacobi identity, computes the Levi-Civita connection by
the Koszul formula, h = 1/2 L_xi phi and the curvature, and solves the nullity
condition for (a, b).  It prints the closed form used by
``paracontact.models.kappa_mu_constants`` and re-verifies it on every pair of
frame fields.  Run with ``python3 scripts/derive_kappa_mu_constants.py``.
"""

import sympy as sp

N = 3
a, b = sp.symbols("a b", real=True)
kappa, mu = sp.symbols("kappa mu", real=True)


def structure(a, b):
    c = sp.MutableDenseNDimArray.zeros(N, N, N)   # c[k, i, j]: [e_i, e_j] = c[k, i, j] e_k
    for i, j, k, v in ((1, 2, 0, 2), (0, 1, 2, a), (0, 2, 1, b)):
        c[k, i, j], c[k, j, i] = v, -v
    return c


def jacobi(c):
    out = []
    for i in range(N):
        for j in range(N):
            for k in range(N):
                for l in range(N):
                    out.append(sum(c[m, i, j] * c[l, m, k] + c[m, j, k] * c[l, m, i] + c[m, k, i] * c[l, m, j]
                                   for m in range(N)))
    return [sp.simplify(e) for e in out if sp.simplify(e) != 0]


def levi_civita(c):
    # orthonormal frame: Gamma[k][i][j] = 1/2 (c_kij - c_jik - c_ijk) with indices lowered by the identity
    return [[[sp.Rational(1, 2) * (c[k, i, j] - c[i, j, k] - c[j, i, k]) for j in range(N)] for i in range(N)]
            for k in range(N)]


def curvature(c, gam):
    def r(k, l, i, j):
        return sp.simplify(sum(gam[k][i][m] * gam[m][j][l] - gam[k][j][m] * gam[m][i][l]
                               - c[m, i, j] * gam[k][m][l] for m in range(N)))
    return r


def h_matrix(c):
    phi = sp.Matrix([[0, 0, 0], [0, 0, -1], [0, 1, 0]])
    ad = sp.Matrix(N, N, lambda k, j: c[k, 0, j])        # [xi, E_j]
    return (ad * phi - phi * ad) / 2, phi


def main():
    c = structure(a, b)
    assert not jacobi(c), "Jacobi identity fails"
    gam = levi_civita(c)
    r = curvature(c, gam)
    h, phi = h_matrix(c)
    lam = sp.simplify(h[1, 1])
    print("h =", h.tolist(), " lambda =", lam)
    # R(e1, xi) xi = (kappa + mu lambda) e1 and R(e2, xi) xi = (kappa - mu lambda) e2
    eqs = [sp.Eq(r(1, 0, 1, 0), kappa + mu * lam), sp.Eq(r(2, 0, 2, 0), kappa - mu * lam)]
    sols = sp.solve(eqs, [a, b], dict=True)
    for s in sols:
        print("solution:", {k: sp.simplify(v) for k, v in s.items()})
    alpha, beta = 1 - mu / 2, sp.sqrt(1 - kappa)
    closed = {a: alpha + beta, b: beta - alpha}
    print("closed form: a = (1 - mu/2) + sqrt(1 - kappa), b = sqrt(1 - kappa) - (1 - mu/2)")

    cc = structure(closed[a], closed[b])
    gg = levi_civita(cc)
    rr = curvature(cc, gg)
    hh, _ = h_matrix(cc)
    eta = [1, 0, 0]
    worst = 0
    for i in range(N):
        for j in range(N):
            for k in range(N):
                lhs = rr(k, 0, i, j)
                rhs = (kappa * (eta[j] * (1 if k == i else 0) - eta[i] * (1 if k == j else 0))
                       + mu * (eta[j] * hh[k, i] - eta[i] * hh[k, j]))
                diff = sp.simplify(lhs - rhs)
                if diff != 0:
                    worst += 1
                    print("mismatch", (k, i, j), diff)
    print("nullity condition verified on all frame pairs" if worst == 0 else f"{worst} mismatches")
    for kv, mv in ((-8, -8), (0, 0), (-8, 2), (-8, -1), (-8, 12)):
        print(f"kappa={kv:>3}, mu={mv:>3}: a={closed[a].subs({kappa: kv, mu: mv})}, "
              f"b={closed[b].subs({kappa: kv, mu: mv})}")


if __name__ == "__main__":
    main()

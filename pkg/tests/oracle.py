"""Independent sympy reference computations used as test oracles.

Nothing here imports the package's arithmetic; numbers live in Q(sqrt p)
as sympy expressions.
"""

from fractions import Fraction

import sympy as sp

u, E = sp.symbols("u E")


def split(expr, p):
    """a + b sqrt(p) -> (Fraction(a), Fraction(b))."""
    s = sp.sqrt(p)
    e = sp.expand(expr)
    b = e.coeff(s)
    a = sp.expand(e - b * s)
    return Fraction(int(sp.fraction(a)[0]), int(sp.fraction(a)[1])), Fraction(int(sp.fraction(b)[0]), int(sp.fraction(b)[1]))


def elem(c, p):
    """Sympy value of a FieldElem-like (x, y) pair."""
    return sp.Rational(c.x.numerator, c.x.denominator) + sp.Rational(c.y.numerator, c.y.denominator) * sp.sqrt(p)


def coeffs(expr, n):
    """u-coefficients 0..n of a polynomial or power series in u."""
    ser = sp.series(expr, u, 0, n + 1).removeO() if not expr.is_polynomial(u) else expr
    poly = sp.Poly(sp.expand(ser), u)
    out = [sp.Integer(0)] * (n + 1)
    for (deg,), c in poly.terms():
        if deg <= n:
            out[deg] = c
    return out


def monodromy_f_basis(p, k, L):
    """N in the basis f1 = -phi(v), f2 = v, v = e1 + L e2 (sympy matrices)."""
    w = sp.sqrt(p)
    phi = sp.diag(w ** k, w ** (k - 2))
    N = sp.Matrix([[0, 0], [1, 0]])
    v = sp.Matrix([1, L])
    f1 = -phi * v
    Q = sp.Matrix.hstack(f1, v)
    return sp.simplify(Q.inv() * N * Q), sp.simplify(Q.inv() * phi * Q)


def solve_x(p, h, a, b, c, d):
    """x_1..x_{h-1} from the Fil^i divisibility conditions, solved one level at a time.

    Works with polynomials in E (u = E - p) and N = -u d/du = -(E - p) d/dE.
    """
    xs = []
    z_prev = sp.Integer(0)
    z_cur = sp.Integer(0)
    for i in range(2, h + 1):
        x = sp.Symbol("x")
        z_new = z_cur + x * E ** (i - 1)
        Nz = sp.expand(-(E - p) * sp.diff(z_new, E))
        rem = sp.expand((b + Nz + a * z_new) - (d + c * z_new) * z_cur)
        poly = sp.Poly(rem, E)
        eqs = [poly.coeff_monomial(E ** j) for j in range(i - 1)]
        sol = sp.solve(eqs[-1], x)
        assert len(sol) == 1
        xv = sp.radsimp(sp.expand(sol[0]))
        for eq in eqs[:-1]:
            assert sp.simplify(eq.subs(x, xv)) == 0
        xs.append(sp.expand(xv))
        z_prev, z_cur = z_cur, z_cur + xv * E ** (i - 1)
    return xs

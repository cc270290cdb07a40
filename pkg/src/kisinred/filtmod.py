"""Rank two filtered (phi, N)-modules D_{k,L} over F.

The module D_{k,L} has basis e1, e2 with

    phi = diag(w^k, w^(k-2)),   N(e1) = e2, N(e2) = 0,
    Fil^i = F (e1 + L e2) for 1 <= i <= k-1.

Matrices act on column vectors: column j holds the coordinates of the image
of the j-th basis vector.  L = None stands for the crystalline limit L = oo,
where N = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .padic import Cert, FieldElem, is_prime

Mat2 = tuple  # ((m11, m12), (m21, m22)) of FieldElem


class UnsupportedBasisError(ValueError):
    """The f-basis does not exist (L = 0 or L = oo)."""


def mat_mul(A, B):
    return tuple(
        tuple(A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)) for i in range(2)
    )


def mat_scale(c, A):
    return tuple(tuple(c * A[i][j] for j in range(2)) for i in range(2))


def mat_det(A):
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def mat_inv(A):
    d = mat_det(A)
    return mat_scale(d.inverse("matrix inverse"), ((A[1][1], -A[0][1]), (-A[1][0], A[0][0])))


def mat_vec(A, v):
    return (A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1])


def mat_eq(A, B) -> bool:
    return all(A[i][j] == B[i][j] for i in range(2) for j in range(2))


def _zero(p):
    return FieldElem(0, 0, p)


def _one(p):
    return FieldElem(1, 0, p)


@dataclass(frozen=True)
class FilteredModule:
    """A rank two filtered (phi, N)-module with Hodge-Tate weights 0 < k-1."""

    p: int
    k: int
    L: Optional[FieldElem]
    phi_mat: Mat2
    n_mat: Mat2
    fil_gen: tuple
    basis_tag: str = "e"
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def h(self) -> int:
        return self.k - 1

    def fil_dim(self, i: int) -> int:
        if i <= 0:
            return 2
        return 1 if i <= self.h else 0

    def check_axioms(self) -> dict:
        """Exact checks of N phi = p phi N, N^2 = 0 and L = oo => N = 0."""
        N, P = self.n_mat, self.phi_mat
        lhs = mat_mul(N, P)
        rhs = mat_scale(FieldElem(self.p, 0, self.p), mat_mul(P, N))
        zero = ((_zero(self.p),) * 2,) * 2
        out = {
            "n_phi_relation": mat_eq(lhs, rhs),
            "n_nilpotent": mat_eq(mat_mul(N, N), zero),
        }
        if self.L is None:
            out["crystalline_n_zero"] = mat_eq(N, zero)
        return out


def make_D(p: int, k: int, L) -> FilteredModule:
    """The module D_{k,L} in its defining basis (L=None means L = oo).

    Raises:
        ValueError: if p is not an odd prime or k < 3.
    """
    if not is_prime(p) or p == 2:
        raise ValueError(f"p must be an odd prime, got {p}")
    if k < 3:
        raise ValueError(f"weight k must be at least 3, got {k}")
    phi = ((FieldElem.w_power(k, p), _zero(p)), (_zero(p), FieldElem.w_power(k - 2, p)))
    if L is None:
        n = ((_zero(p), _zero(p)), (_zero(p), _zero(p)))
        return FilteredModule(p, k, None, phi, n, (_one(p), _one(p)), "e")
    if not isinstance(L, FieldElem):
        L = FieldElem(L, 0, p)
    n = ((_zero(p), _zero(p)), (_one(p), _zero(p)))
    return FilteredModule(p, k, L, phi, n, (_one(p), L), "e")


def f_basis_change(D: FilteredModule) -> Mat2:
    """Columns f1 = -phi(v), f2 = v where v generates the filtration."""
    v = D.fil_gen
    f1 = mat_vec(D.phi_mat, v)
    f1 = (-f1[0], -f1[1])
    return ((f1[0], v[0]), (f1[1], v[1]))


def to_f_basis(D: FilteredModule) -> FilteredModule:
    """Rewrite D in the basis f1 = -phi(e1 + L e2), f2 = e1 + L e2.

    The monodromy is obtained by explicit base change.

    Raises:
        UnsupportedBasisError: if L is 0 or oo.
    """
    if D.basis_tag != "e":
        raise UnsupportedBasisError("module is not in the defining basis")
    if D.L is None:
        raise UnsupportedBasisError("the f-basis needs a finite L (got L = oo)")
    if D.L.is_zero_at_prec():
        raise UnsupportedBasisError("the f-basis needs L != 0: e1 + L e2 is then a phi-eigenvector")
    Q = f_basis_change(D)
    Qi = mat_inv(Q)
    phi_f = mat_mul(Qi, mat_mul(D.phi_mat, Q))
    n_f = mat_mul(Qi, mat_mul(D.n_mat, Q))
    p = D.p
    out = FilteredModule(p, D.k, D.L, phi_f, n_f, (_zero(p), _one(p)), "f", {"Q": Q})
    out.notes["displayed_n_comparison"] = compare_displayed_n(out)
    return out


def expected_phi_f(p: int, h: int) -> Mat2:
    from .padic import a_p

    return ((a_p(p, h), FieldElem(-1, 0, p)), (FieldElem(p ** h, 0, p), _zero(p)))


def monodromy_scalars(Df: FilteredModule):
    """(a, b, c, d) with N(f1) = a f1 + c f2 and N(f2) = b f1 + d f2."""
    (a, b), (c, d) = Df.n_mat
    return a, b, c, d


def theorem_b_value(p: int, h: int, L: FieldElem) -> FieldElem:
    """b = -1 / (w^(h-1) L (1-p))."""
    return FieldElem(-1, 0, p) / (FieldElem.w_power(h - 1, p) * L * (1 - p))


def displayed_n_matrix(p: int, h: int, L: FieldElem) -> Mat2:
    """p/(L(1-p)) * (1, w^(-h-1); w^(h+1), -1), the alternative printed form."""
    s = FieldElem(p, 0, p) / (L * (1 - p))
    return mat_scale(
        s,
        ((_one(p), FieldElem.w_power(-h - 1, p)), (FieldElem.w_power(h + 1, p), FieldElem(-1, 0, p))),
    )


def compare_displayed_n(Df: FilteredModule) -> dict:
    """Record which printed monodromy forms the computed one agrees with."""
    p, h, L = Df.p, Df.h, Df.L
    disp = displayed_n_matrix(p, h, L)
    neg_disp = mat_scale(FieldElem(-1, 0, p), disp)
    b_ok = Df.n_mat[0][1] == theorem_b_value(p, h, L)
    exact = mat_eq(Df.n_mat, disp)
    entries_sign = [
        "same" if Df.n_mat[i][j] == disp[i][j] else ("opposite" if Df.n_mat[i][j] == -disp[i][j] else "other")
        for i in range(2) for j in range(2)
    ]
    return {
        "matches_b_value": b_ok,
        "matches_displayed_matrix": exact,
        "matches_negated_displayed_matrix": mat_eq(Df.n_mat, neg_disp),
        "entrywise_vs_displayed": entries_sign,
    }


# weak admissibility -----------------------------------------------------------

@dataclass
class AdmissibilityReport:
    admissible: Cert
    t_N: Fraction
    t_H: int
    lines: list


def _line_t_H(D: FilteredModule, v) -> int:
    """Largest i with the line F v inside Fil^i."""
    g = D.fil_gen
    det = v[0] * g[1] - v[1] * g[0]
    return D.h if det.is_zero_at_prec() else 0


def _stable_lines(D: FilteredModule) -> list:
    p = D.p
    N = D.n_mat
    zero_n = all(N[i][j].is_zero_at_prec() for i in range(2) for j in range(2))
    phi = D.phi_mat
    lines = []
    if not zero_n:
        # the only N-stable line is ker N
        if not (N[0][0].is_zero_at_prec() and N[0][1].is_zero_at_prec()):
            v = (-N[0][1], N[0][0])
        else:
            v = (-N[1][1], N[1][0])
        image = mat_vec(phi, v)
        if (image[0] * v[1] - image[1] * v[0]).is_zero_at_prec():
            lines.append(v)
        return lines
    # N = 0: phi-eigenlines
    a, b = phi[0]
    c, d = phi[1]
    tr = a + d
    disc = tr * tr - 4 * (a * d - b * c)
    if disc.is_zero_at_prec() and b.is_zero_at_prec() and c.is_zero_at_prec():
        # scalar phi: every line is stable; the filtration line is the extreme case
        return [D.fil_gen, (_one(p), _zero(p)), (_zero(p), _one(p))]
    root = disc.sqrt_exact()
    if root is None:
        return []
    for r in (root, -root):
        lam = (tr + r) / 2
        # (phi - lam) v = 0
        m11, m12, m21, m22 = a - lam, b, c, d - lam
        if not (m11.is_zero_at_prec() and m12.is_zero_at_prec()):
            v = (-m12, m11)
        elif not (m21.is_zero_at_prec() and m22.is_zero_at_prec()):
            v = (-m22, m21)
        else:
            v = (_one(p), _zero(p))
        if not any(_same_line(v, u) for u in lines):
            lines.append(v)
    return lines


def _same_line(v, u) -> bool:
    return (v[0] * u[1] - v[1] * u[0]).is_zero_at_prec()


def weak_admissibility_check(D: FilteredModule) -> AdmissibilityReport:
    """Newton/Hodge comparison on D and on every phi- and N-stable line."""
    t_N = mat_det(D.phi_mat).valuation()
    t_H = D.h  # Fil^1 = ... = Fil^h is a line, so the Hodge sum is h
    ok = t_N == t_H
    lines = []
    for v in _stable_lines(D):
        image = mat_vec(D.phi_mat, v)
        idx = 0 if not v[0].is_zero_at_prec() else 1
        eig = image[idx] / v[idx]
        tn = eig.valuation()
        th = _line_t_H(D, v)
        lines.append({"line": v, "t_N": tn, "t_H": th, "ok": th <= tn})
        ok = ok and th <= tn
    return AdmissibilityReport(Cert.of(ok), t_N, t_H, lines)

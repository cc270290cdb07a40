"""Drive the library step by step: filtration, Kisin matrix, G, descent."""

from kisinred.breuil import recursion_from_module
from kisinred.descent import descend, normalize_to_G
from kisinred.filtmod import make_D, to_f_basis
from kisinred.kisin import SeriesContext, build_A, build_A_prime, z_series
from kisinred.padic import FieldElem
from kisinred.reduction import classify, format_residue_matrix, reduce_mod_p

p, k = 7, 6
h = k - 1
L = FieldElem.w_power(-5, p)
data = recursion_from_module(to_f_basis(make_D(p, k, L)))
print("v(x_i):", data.x_valuations())

ctx = SeriesContext(p, h, N=60, cap=60)
A = build_A(ctx, build_A_prime(ctx, z_series(ctx, data)))
G = normalize_to_G(A, ctx).G
res = descend(G, ctx)
print("rounds:", res.rounds, "history:", res.history)
print("v(P_n):", res.P_valuations)
mat = reduce_mod_p(res.P, h, p)
print(format_residue_matrix(mat, p), "->", classify(mat, p).label)
